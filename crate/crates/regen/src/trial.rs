//! Seeded failure/repair trials and their metrics.

use std::fmt;
use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regen_core::{FieldSpec, MbrParams, MsrParams, NodeId, RepairTranscript};

use crate::cluster::{join_ids, Cluster, CodeConfig, Event, LowestIds};
use crate::error::{Result, SimError};
use crate::manifest::CodeKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureModel {
    /// One node fails and is repaired per cycle.
    Single,
    /// This many nodes fail together, then are repaired one by one.
    Burst(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialConfig {
    pub code: CodeKind,
    pub n: usize,
    pub k: usize,
    pub field: Option<FieldSpec>,
    pub cycles: usize,
    pub seed: u64,
    pub model: FailureModel,
    /// Size of the random file stored in the cluster.
    pub payload_bytes: usize,
}

impl TrialConfig {
    pub fn new(code: CodeKind, n: usize, k: usize, cycles: usize, seed: u64) -> Self {
        Self {
            code,
            n,
            k,
            field: None,
            cycles,
            seed,
            model: FailureModel::Single,
            payload_bytes: 4096,
        }
    }
}

/// One row per repair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairRow {
    pub cycle: usize,
    pub failed: NodeId,
    pub helpers: Vec<NodeId>,
    pub symbols_per_chunk: usize,
    pub chunks: usize,
    pub total_symbols: usize,
    pub bytes: usize,
}

impl RepairRow {
    fn new(cycle: usize, t: &RepairTranscript) -> Self {
        Self {
            cycle,
            failed: t.failed,
            helpers: t.helper_ids(),
            symbols_per_chunk: t.symbols_per_chunk(),
            chunks: t.chunks,
            total_symbols: t.total_symbols(),
            bytes: t.total_bytes(),
        }
    }
}

/// A rational `num/den`, printed in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio(pub usize, pub usize);

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = gcd(self.0, self.1).max(1);
        let (n, d) = (self.0 / g, self.1 / g);
        if d == 1 {
            write!(f, "{n}")
        } else {
            write!(f, "{n}/{d}")
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metrics {
    pub config: TrialConfig,
    pub field: FieldSpec,
    pub d: usize,
    pub alpha: usize,
    pub beta: usize,
    pub b: usize,
    pub chunks: usize,
    pub rows: Vec<RepairRow>,
    pub reconstructions_ok: usize,
    pub reconstructions_failed: usize,
    /// Optimal `(α, β)` per chunk at this tradeoff point.
    pub optimum: (Ratio, Ratio),
    pub log: Vec<Event>,
}

impl Metrics {
    pub fn total_repair_symbols(&self) -> usize {
        self.rows.iter().map(|r| r.total_symbols).sum()
    }

    pub fn total_repair_bytes(&self) -> usize {
        self.rows.iter().map(|r| r.bytes).sum()
    }

    /// Range of per-chunk repair downloads seen, if any repair ran.
    pub fn per_repair_range(&self) -> Option<(usize, usize)> {
        let min = self.rows.iter().map(|r| r.symbols_per_chunk).min()?;
        let max = self.rows.iter().map(|r| r.symbols_per_chunk).max()?;
        Some((min, max))
    }

    /// Download for one repair when the newcomer fetches `B` symbols and
    /// re-encodes, as a plain MDS code would.
    pub fn naive_repair_symbols(&self) -> usize {
        self.b
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e: csv::Error| SimError::Infeasible(format!("csv output: {e}"));
        w.write_record([
            "cycle",
            "failed",
            "helpers",
            "symbols_per_chunk",
            "chunks",
            "total_symbols",
            "bytes",
        ])
        .map_err(wrap)?;
        for r in &self.rows {
            w.write_record([
                r.cycle.to_string(),
                r.failed.to_string(),
                join_ids(&r.helpers),
                r.symbols_per_chunk.to_string(),
                r.chunks.to_string(),
                r.total_symbols.to_string(),
                r.bytes.to_string(),
            ])
            .map_err(wrap)?;
        }
        w.flush().map_err(|e| SimError::Infeasible(format!("csv output: {e}")))
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(f, "code={}", c.code)?;
        writeln!(f, "n={}", c.n)?;
        writeln!(f, "k={}", c.k)?;
        writeln!(f, "d={}", self.d)?;
        writeln!(f, "alpha={}", self.alpha)?;
        writeln!(f, "beta={}", self.beta)?;
        writeln!(f, "B={}", self.b)?;
        writeln!(f, "field={}", self.field)?;
        writeln!(f, "seed={}", c.seed)?;
        writeln!(f, "cycles={}", c.cycles)?;
        match c.model {
            FailureModel::Single => writeln!(f, "failure_model=single")?,
            FailureModel::Burst(s) => writeln!(f, "failure_model=burst:{s}")?,
        }
        writeln!(f, "chunks={}", self.chunks)?;
        writeln!(f, "repairs={}", self.rows.len())?;
        writeln!(f, "total_repair_symbols={}", self.total_repair_symbols())?;
        writeln!(f, "total_repair_bytes={}", self.total_repair_bytes())?;
        match self.per_repair_range() {
            Some((lo, hi)) if lo == hi => writeln!(f, "per_repair_symbols_per_chunk={lo}")?,
            Some((lo, hi)) => writeln!(f, "per_repair_symbols_per_chunk={lo}..{hi}")?,
            None => writeln!(f, "per_repair_symbols_per_chunk=none")?,
        }
        let (alpha, beta) = self.optimum;
        writeln!(f, "optimal_alpha={alpha}")?;
        writeln!(f, "optimal_beta={beta}")?;
        writeln!(f, "optimal_repair_symbols_per_chunk={}", Ratio(beta.0 * self.d, beta.1))?;
        writeln!(f, "naive_repair_symbols_per_chunk={}", self.naive_repair_symbols())?;
        writeln!(f, "reconstructions_ok={}", self.reconstructions_ok)?;
        writeln!(f, "reconstructions_failed={}", self.reconstructions_failed)
    }
}

/// Stores a seeded random file, runs `cycles` failure/repair rounds with a
/// collection from `k` random live nodes after each, and tallies the cost.
pub fn run_trial(config: &TrialConfig) -> Result<Metrics> {
    if config.payload_bytes == 0 {
        return Err(SimError::EmptyInput);
    }
    let code_config = CodeConfig {
        field: config.field,
        aux_seed: config.seed,
        ..CodeConfig::new(config.code, config.n, config.k)
    };
    let code = code_config.build()?;
    let (n, d) = (code.n(), code.d());
    let burst = match config.model {
        FailureModel::Single => 1,
        FailureModel::Burst(s) => s,
    };
    if burst == 0 || burst > n - d {
        return Err(SimError::Infeasible(format!(
            "burst of {burst} failures; repairable bursts are 1..={} for n={n}, d={d}",
            n - d
        )));
    }

    let mut payload = vec![0u8; config.payload_bytes];
    ChaCha8Rng::seed_from_u64(config.seed).fill_bytes(&mut payload);
    let mut cluster = Cluster::ingest(&payload, &code_config, config.seed)?;

    let mut rows = Vec::new();
    let (mut ok, mut failed) = (0, 0);
    let mut check = |cluster: &mut Cluster| -> Result<()> {
        let (_, bytes) = cluster.collect_random()?;
        if bytes == payload {
            ok += 1;
        } else {
            failed += 1;
        }
        Ok(())
    };
    if config.cycles == 0 {
        check(&mut cluster)?;
    }
    for cycle in 0..config.cycles {
        for _ in 0..burst {
            cluster.fail_random()?;
        }
        for t in cluster.repair_all(&LowestIds)? {
            rows.push(RepairRow::new(cycle, &t));
        }
        check(&mut cluster)?;
    }

    let (b, k) = (code.b(), code.k());
    let optimum = match config.code {
        CodeKind::Mbr => MbrParams::tradeoff_point(b, k, d),
        CodeKind::Msr => MsrParams::tradeoff_point(b, k, d),
    };
    Ok(Metrics {
        config: config.clone(),
        field: code.field().spec(),
        d,
        alpha: code.alpha(),
        beta: code.beta(),
        b,
        chunks: cluster.manifest().chunks,
        rows,
        reconstructions_ok: ok,
        reconstructions_failed: failed,
        optimum: (Ratio(optimum.0 .0, optimum.0 .1), Ratio(optimum.1 .0, optimum.1 .1)),
        log: cluster.log().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_print_reduced() {
        assert_eq!(Ratio(8, 2).to_string(), "4");
        assert_eq!(Ratio(6, 4).to_string(), "3/2");
        assert_eq!(Ratio(0, 3).to_string(), "0");
    }
}
