//! The `regen` command line.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use regen_core::mds::{verify_mds, VectorFamily};
use regen_core::verify::{certify, CheckOutcome};
use regen_core::{FieldSpec, LinearStorageCode, NodeId};

use crate::cluster::{join_ids, Cluster, Code, CodeConfig, Explicit, LowestIds};
use crate::codefile;
use crate::error::SimError;
use crate::manifest::CodeKind;
use crate::persist;
use crate::trial::{run_trial, FailureModel, TrialConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARAM: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "regen", version, about = "Exact regenerating codes for distributed storage")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a file into a cluster directory.
    Encode(EncodeArgs),
    /// Regenerate a failed node from its helpers.
    Repair(RepairArgs),
    /// Recover the original file from k nodes.
    Reconstruct(ReconstructArgs),
    /// Check a cluster or a code description.
    Verify(VerifyArgs),
    /// Run a seeded failure/repair trial and print metrics.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub code: CodeKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// `prime:<p>` or `gf2:<m>`; chosen automatically when omitted.
    #[arg(long)]
    pub field: Option<FieldSpec>,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Seeds the MSR auxiliary vectors.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// MBR: nodes that store the source uncoded, e.g. `1,2,3`.
    #[arg(long, value_delimiter = ',')]
    pub systematic: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct RepairArgs {
    #[arg(long)]
    pub cluster: PathBuf,
    #[arg(long)]
    pub node: usize,
    /// Helper nodes; the lowest-numbered live nodes by default.
    #[arg(long, value_delimiter = ',')]
    pub helpers: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub cluster: PathBuf,
    /// The k nodes to read; the lowest-numbered live nodes by default.
    #[arg(long, value_delimiter = ',')]
    pub nodes: Option<Vec<usize>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct VerifyArgs {
    #[arg(long)]
    pub cluster: Option<PathBuf>,
    #[arg(long)]
    pub codefile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub code: CodeKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub field: Option<FieldSpec>,
    #[arg(long)]
    pub cycles: usize,
    #[arg(long)]
    pub seed: u64,
    /// Fail this many nodes at once each cycle.
    #[arg(long)]
    pub burst: Option<usize>,
    #[arg(long, default_value_t = 4096)]
    pub payload: usize,
    /// Also write one CSV row per repair to this file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        use regen_core::Error as E;
        let code = match &e {
            SimError::Io { .. } | SimError::Format { .. } => EXIT_IO,
            SimError::DataLoss { .. } | SimError::RepairImpossible { .. } => EXIT_FAILURE,
            SimError::Code(E::InconsistentSymbols(..) | E::DeadNode(_) | E::MissingHelper(_)) => EXIT_FAILURE,
            _ => EXIT_PARAM,
        };
        Self::new(code, e.to_string())
    }
}

impl From<regen_core::Error> for Failure {
    fn from(e: regen_core::Error) -> Self {
        SimError::from(e).into()
    }
}

type CliResult = Result<(), Failure>;

fn ids(raw: &[usize]) -> Vec<NodeId> {
    raw.iter().copied().map(NodeId).collect()
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::new(EXIT_IO, format!("{}: {e}", path.display()))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_PARAM } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Encode(a) => encode(&a, out),
        Command::Repair(a) => repair(&a, out),
        Command::Reconstruct(a) => reconstruct(&a, out),
        Command::Verify(a) => verify(&a, out),
        Command::Simulate(a) => simulate(&a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn encode(a: &EncodeArgs, out: &mut dyn Write) -> CliResult {
    let config = CodeConfig {
        field: a.field,
        aux_seed: a.seed,
        systematic: a.systematic.as_deref().map(ids),
        ..CodeConfig::new(a.code, a.n, a.k)
    };
    // Rejects bad parameters before touching the filesystem.
    config.build()?;
    let bytes = fs::read(&a.input).map_err(|e| io_failure(&a.input, e))?;
    let cluster = Cluster::ingest(&bytes, &config, a.seed)?;
    persist::save(&cluster, &a.out)?;
    let m = cluster.manifest();
    let _ = write!(
        out,
        "code={}\nn={}\nk={}\nd={}\nalpha={}\nbeta={}\nB={}\ntheta={}\nq={}\nfield={}\nconstruction={}\nlength={}\nchunks={}\npadding={}\n",
        m.code,
        m.n,
        m.k,
        m.d,
        m.alpha,
        m.beta,
        m.b,
        m.theta,
        m.field.order(),
        m.field,
        m.construction,
        m.length,
        m.chunks,
        m.padding
    );
    Ok(())
}

fn repair(a: &RepairArgs, out: &mut dyn Write) -> CliResult {
    let mut cluster = persist::load(&a.cluster, 0)?;
    let failed = NodeId(a.node);
    let transcript = match &a.helpers {
        Some(h) => cluster.repair(failed, &Explicit(ids(h)))?,
        None => cluster.repair(failed, &LowestIds)?,
    };
    persist::save_node(&cluster, &a.cluster, failed)?;
    let _ = write!(
        out,
        "failed={}\nhelpers={}\nsymbols_per_chunk={}\nchunks={}\ntotal_symbols={}\nsymbol_bytes={}\ntotal_bytes={}\n",
        transcript.failed,
        join_ids(&transcript.helper_ids()),
        transcript.symbols_per_chunk(),
        transcript.chunks,
        transcript.total_symbols(),
        transcript.symbol_bytes(),
        transcript.total_bytes()
    );
    Ok(())
}

fn reconstruct(a: &ReconstructArgs, out: &mut dyn Write) -> CliResult {
    let cluster = persist::load(&a.cluster, 0)?;
    let nodes = match &a.nodes {
        Some(n) => ids(n),
        None => cluster.live_nodes().into_iter().take(cluster.code().k()).collect(),
    };
    let bytes = cluster.collect(&nodes)?;
    let name = a.out.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = a.out.with_file_name(format!(".{name}.partial"));
    fs::write(&tmp, &bytes).map_err(|e| io_failure(&tmp, e))?;
    fs::rename(&tmp, &a.out).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_failure(&a.out, e)
    })?;
    let _ = writeln!(out, "nodes={}\nlength={}", join_ids(&nodes), bytes.len());
    Ok(())
}

fn report(checks: &[CheckOutcome], out: &mut dyn Write) -> CliResult {
    for c in checks {
        let status = if c.pass() { "pass" } else { "FAIL" };
        let _ = write!(
            out,
            "check={} cases={} failed={} status={status}",
            c.name, c.cases, c.failed
        );
        match &c.first_failure {
            Some(f) => {
                let _ = writeln!(out, " first_failure={f}");
            }
            None => {
                let _ = writeln!(out);
            }
        }
    }
    let failing: Vec<&str> = checks.iter().filter(|c| !c.pass()).map(|c| c.name).collect();
    if failing.is_empty() {
        let _ = writeln!(out, "result=pass");
        Ok(())
    } else {
        let _ = writeln!(out, "result=fail");
        Err(Failure::new(
            EXIT_FAILURE,
            format!("verification failed: {}", failing.join(", ")),
        ))
    }
}

fn verify(a: &VerifyArgs, out: &mut dyn Write) -> CliResult {
    if let Some(path) = &a.codefile {
        let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
        let code = codefile::parse(&text).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
        return report(&certify(&code).checks, out);
    }
    let root = a.cluster.as_deref().expect("clap requires one of the two");
    let cluster = persist::load(root, 0)?;
    let _ = writeln!(out, "live={}", join_ids(&cluster.live_nodes()));
    let _ = writeln!(out, "failed={}", join_ids(&cluster.failed_nodes()));
    let mut checks = match cluster.code() {
        Code::Mbr(spec) => certify(&LinearStorageCode::from_mbr(spec)).checks,
        Code::Msr(spec) => {
            let n = spec.params().n;
            let mains = (1..=n)
                .map(|i| spec.main_vector(NodeId(i)).map(<[_]>::to_vec))
                .collect::<regen_core::Result<Vec<_>>>()?;
            let family = VectorFamily::custom(spec.field(), spec.params().k, mains)?;
            let ok = verify_mds(&family, spec.params().k);
            vec![CheckOutcome {
                name: "main-vectors-mds",
                cases: 1,
                failed: usize::from(!ok),
                first_failure: (!ok).then(|| "some k main vectors are dependent".to_string()),
            }]
        }
    };
    let problems = cluster.consistency_failures()?;
    checks.push(CheckOutcome {
        name: "chunk-consistency",
        cases: cluster.manifest().chunks,
        failed: problems.len(),
        first_failure: problems.into_iter().next(),
    });
    report(&checks, out)
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> CliResult {
    let config = TrialConfig {
        field: a.field,
        model: a.burst.map_or(FailureModel::Single, FailureModel::Burst),
        payload_bytes: a.payload,
        ..TrialConfig::new(a.code, a.n, a.k, a.cycles, a.seed)
    };
    let metrics = run_trial(&config)?;
    if let Some(path) = &a.csv {
        let file = fs::File::create(path).map_err(|e| io_failure(path, e))?;
        metrics.write_csv(io::BufWriter::new(file))?;
    }
    let _ = write!(out, "{metrics}");
    if metrics.reconstructions_failed > 0 {
        return Err(Failure::new(EXIT_FAILURE, "a reconstruction returned wrong data"));
    }
    Ok(())
}
