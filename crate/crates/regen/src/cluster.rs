//! In-memory storage cluster: chunking, node lifecycle, repair and
//! collection.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use regen_core::mds::systematize;
use regen_core::{
    AuxInit, Construction, Field, FieldSpec, MbrCodeSpec, MbrDecoder, MsrCodeSpec, MsrDecoder, MsrParams, NodeId,
    RepairTranscript, Symbol,
};

use crate::error::{Result, SimError};
use crate::manifest::{CodeKind, Manifest, FORMAT_VERSION};
use crate::packing;

/// Chunks per rayon task; below this everything runs on one thread.
const PAR_MIN_CHUNKS: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Code {
    Mbr(MbrCodeSpec),
    Msr(MsrCodeSpec),
}

impl Code {
    pub fn kind(&self) -> CodeKind {
        match self {
            Self::Mbr(_) => CodeKind::Mbr,
            Self::Msr(_) => CodeKind::Msr,
        }
    }

    pub fn field(&self) -> &Field {
        match self {
            Self::Mbr(s) => s.field(),
            Self::Msr(s) => s.field(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Mbr(s) => s.params().n,
            Self::Msr(s) => s.params().n,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Self::Mbr(s) => s.params().k,
            Self::Msr(s) => s.params().k,
        }
    }

    pub fn d(&self) -> usize {
        match self {
            Self::Mbr(s) => s.params().d,
            Self::Msr(s) => s.params().d,
        }
    }

    pub fn alpha(&self) -> usize {
        match self {
            Self::Mbr(s) => s.params().alpha,
            Self::Msr(s) => s.params().alpha,
        }
    }

    pub fn beta(&self) -> usize {
        match self {
            Self::Mbr(s) => s.params().beta,
            Self::Msr(s) => s.params().beta,
        }
    }

    pub fn b(&self) -> usize {
        match self {
            Self::Mbr(s) => s.params().b,
            Self::Msr(s) => s.params().b,
        }
    }

    pub fn theta(&self) -> usize {
        match self {
            Self::Mbr(s) => s.params().theta,
            Self::Msr(s) => s.params().n,
        }
    }

    pub fn construction(&self) -> Construction {
        match self {
            Self::Mbr(s) => s.family().construction(),
            Self::Msr(_) => Construction::Vandermonde,
        }
    }

    /// `α` symbols per node for one chunk of `B` source symbols.
    fn encode_chunk(&self, source: &[Symbol]) -> Result<Vec<Vec<Symbol>>> {
        let nodes = match self {
            Self::Mbr(s) => s.encode(source)?,
            Self::Msr(s) => s.encode(source)?,
        };
        Ok(nodes.into_iter().map(|n| n.symbols).collect())
    }

    fn decoder(&self, ids: &[NodeId]) -> Result<Decoder> {
        Ok(match self {
            Self::Mbr(s) => Decoder::Mbr(s.decoder(ids)?),
            Self::Msr(s) => Decoder::Msr(s.decoder(ids)?),
        })
    }
}

enum Decoder {
    Mbr(MbrDecoder),
    Msr(MsrDecoder),
}

impl Decoder {
    fn decode(&self, symbols: &[&[Symbol]]) -> regen_core::Result<Vec<Symbol>> {
        match self {
            Self::Mbr(d) => d.decode(symbols),
            Self::Msr(d) => d.decode(symbols),
        }
    }
}

/// How to build the code for a new cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeConfig {
    pub kind: CodeKind,
    pub n: usize,
    pub k: usize,
    /// `None` picks the smallest field that works.
    pub field: Option<FieldSpec>,
    /// Seed for the MSR auxiliary vectors.
    pub aux_seed: u64,
    /// MBR only: nodes that should store the source uncoded.
    pub systematic: Option<Vec<NodeId>>,
}

impl CodeConfig {
    pub fn new(kind: CodeKind, n: usize, k: usize) -> Self {
        Self {
            kind,
            n,
            k,
            field: None,
            aux_seed: 0,
            systematic: None,
        }
    }

    pub fn build(&self) -> Result<Code> {
        match self.kind {
            CodeKind::Mbr => {
                let spec = match self.field {
                    Some(f) => MbrCodeSpec::with_field(self.n, self.k, &Field::new(f))?,
                    None => MbrCodeSpec::new(self.n, self.k)?,
                };
                let spec = match &self.systematic {
                    Some(nodes) => systematize(&spec, nodes)?,
                    None => spec,
                };
                Ok(Code::Mbr(spec))
            }
            CodeKind::Msr => {
                if self.systematic.is_some() {
                    return Err(SimError::Infeasible(
                        "systematic layout is only defined for MBR codes".into(),
                    ));
                }
                let aux = AuxInit::Seeded(self.aux_seed);
                let spec = match self.field {
                    Some(f) => MsrCodeSpec::build(MsrParams::derive(self.n, self.k)?, &Field::new(f), aux)?,
                    None => MsrCodeSpec::new(self.n, self.k, aux)?,
                };
                Ok(Code::Msr(spec))
            }
        }
    }
}

/// Chooses the `d` helpers for a repair.
pub trait HelperPolicy {
    /// `live` excludes the failed node and is sorted ascending.
    fn helpers(&self, failed: NodeId, live: &[NodeId], d: usize) -> Vec<NodeId>;
}

/// The lexicographically smallest eligible helper set.
#[derive(Debug, Clone, Copy, Default)]
pub struct LowestIds;

impl HelperPolicy for LowestIds {
    fn helpers(&self, _failed: NodeId, live: &[NodeId], d: usize) -> Vec<NodeId> {
        live.iter().copied().take(d).collect()
    }
}

/// A fixed helper list, used as given.
#[derive(Debug, Clone)]
pub struct Explicit(pub Vec<NodeId>);

impl HelperPolicy for Explicit {
    fn helpers(&self, _failed: NodeId, _live: &[NodeId], _d: usize) -> Vec<NodeId> {
        self.0.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Ingest {
        length: usize,
        chunks: usize,
    },
    Fail(NodeId),
    Repair {
        node: NodeId,
        helpers: Vec<NodeId>,
        symbols: usize,
    },
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ingest { length, chunks } => write!(f, "ingest length={length} chunks={chunks}"),
            Self::Fail(id) => write!(f, "fail node={id}"),
            Self::Repair { node, helpers, symbols } => {
                write!(f, "repair node={node} helpers={} symbols={symbols}", join_ids(helpers))
            }
        }
    }
}

pub fn join_ids(ids: &[NodeId]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct NodeStore {
    live: bool,
    /// `chunks * α` symbols, chunk-major.
    symbols: Vec<Symbol>,
}

#[derive(Debug, Clone)]
pub struct Cluster {
    code: Code,
    manifest: Manifest,
    nodes: Vec<NodeStore>,
    log: Vec<Event>,
    rng: ChaCha8Rng,
}

fn manifest_for(code: &Code, length: usize, chunks: usize, padding: usize) -> Manifest {
    Manifest {
        version: FORMAT_VERSION,
        code: code.kind(),
        n: code.n(),
        k: code.k(),
        d: code.d(),
        alpha: code.alpha(),
        beta: code.beta(),
        b: code.b(),
        theta: code.theta(),
        field: code.field().spec(),
        length,
        chunks,
        padding,
        construction: code.construction(),
        aux_version: match code {
            Code::Mbr(_) => None,
            Code::Msr(s) => Some(s.aux_version()),
        },
    }
}

impl Cluster {
    /// Splits `bytes` into chunks of `B` symbols and encodes each one.
    pub fn ingest(bytes: &[u8], config: &CodeConfig, seed: u64) -> Result<Self> {
        let code = config.build()?;
        if bytes.is_empty() {
            return Err(SimError::EmptyInput);
        }
        let spec = code.field().spec();
        let mut symbols = packing::bytes_to_symbols(spec, bytes);
        let b = code.b();
        let chunks = symbols.len().div_ceil(b);
        let padding = chunks * b - symbols.len();
        symbols.resize(chunks * b, 0);

        let alpha = code.alpha();
        let encoded: Vec<Vec<Vec<Symbol>>> = symbols
            .par_chunks(b)
            .with_min_len(PAR_MIN_CHUNKS)
            .map(|chunk| code.encode_chunk(chunk))
            .collect::<Result<_>>()?;
        let mut nodes: Vec<NodeStore> = (0..code.n())
            .map(|_| NodeStore {
                live: true,
                symbols: Vec::with_capacity(chunks * alpha),
            })
            .collect();
        for chunk in encoded {
            for (node, s) in nodes.iter_mut().zip(chunk) {
                node.symbols.extend_from_slice(&s);
            }
        }
        let manifest = manifest_for(&code, bytes.len(), chunks, padding);
        Ok(Self {
            code,
            manifest,
            nodes,
            log: vec![Event::Ingest {
                length: bytes.len(),
                chunks,
            }],
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Reassembles a cluster from stored parts; `None` marks a failed node.
    pub fn from_parts(code: Code, manifest: Manifest, nodes: Vec<Option<Vec<Symbol>>>, seed: u64) -> Result<Self> {
        let expected = manifest_for(&code, manifest.length, manifest.chunks, manifest.padding);
        if expected != manifest {
            return Err(SimError::Infeasible(
                "manifest does not match the code it describes".into(),
            ));
        }
        if nodes.len() != code.n() {
            return Err(regen_core::Error::WrongNodeCount {
                expected: code.n(),
                got: nodes.len(),
            }
            .into());
        }
        let want = manifest.chunks * code.alpha();
        let nodes = nodes
            .into_iter()
            .map(|s| match s {
                Some(symbols) if symbols.len() == want => Ok(NodeStore { live: true, symbols }),
                Some(symbols) => Err(SimError::from(regen_core::Error::LengthMismatch {
                    expected: want,
                    got: symbols.len(),
                })),
                None => Ok(NodeStore {
                    live: false,
                    symbols: Vec::new(),
                }),
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            code,
            manifest,
            nodes,
            log: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn code(&self) -> &Code {
        &self.code
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn log(&self) -> &[Event] {
        &self.log
    }

    pub fn is_live(&self, id: NodeId) -> bool {
        self.node(id).map(|n| n.live).unwrap_or(false)
    }

    pub fn live_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].live)
            .map(NodeId::from_index)
            .collect()
    }

    pub fn failed_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&i| !self.nodes[i].live)
            .map(NodeId::from_index)
            .collect()
    }

    /// All stored symbols of a live node, chunk-major.
    pub fn node_symbols(&self, id: NodeId) -> Option<&[Symbol]> {
        self.node(id).ok().filter(|n| n.live).map(|n| n.symbols.as_slice())
    }

    /// The `α` symbols a live node holds for one chunk.
    pub fn chunk(&self, id: NodeId, chunk: usize) -> Option<&[Symbol]> {
        let a = self.code.alpha();
        self.node_symbols(id).and_then(|s| s.get(chunk * a..(chunk + 1) * a))
    }

    fn node(&self, id: NodeId) -> Result<&NodeStore> {
        if id.0 == 0 || id.0 > self.nodes.len() {
            return Err(regen_core::Error::UnknownNode(id).into());
        }
        Ok(&self.nodes[id.index()])
    }

    pub fn fail(&mut self, id: NodeId) -> Result<()> {
        if !self.node(id)?.live {
            return Err(SimError::AlreadyFailed(id));
        }
        let node = &mut self.nodes[id.index()];
        node.live = false;
        node.symbols = Vec::new();
        self.log.push(Event::Fail(id));
        Ok(())
    }

    /// Fails a uniformly random live node.
    pub fn fail_random(&mut self) -> Result<NodeId> {
        let live = self.live_nodes();
        let id = *live
            .choose(&mut self.rng)
            .ok_or_else(|| SimError::Infeasible("no live node left to fail".into()))?;
        self.fail(id)?;
        Ok(id)
    }

    /// Rebuilds `failed` from `d` live helpers picked by `policy`.
    pub fn repair(&mut self, failed: NodeId, policy: &dyn HelperPolicy) -> Result<RepairTranscript> {
        if self.node(failed)?.live {
            return Err(SimError::NotFailed(failed));
        }
        let d = self.code.d();
        let live = self.live_nodes();
        if live.len() < d {
            return Err(SimError::RepairImpossible { live: live.len(), d });
        }
        let helpers = policy.helpers(failed, &live, d);
        for h in &helpers {
            if !self.node(*h)?.live {
                return Err(regen_core::Error::DeadNode(*h).into());
            }
        }
        let chunks = self.manifest.chunks;
        let alpha = self.code.alpha();
        let (symbols, transcript) = match &mut self.code {
            Code::Mbr(spec) => {
                let mut sorted = helpers.clone();
                sorted.sort_unstable();
                let others: Vec<NodeId> = (1..=spec.params().n).map(NodeId).filter(|&i| i != failed).collect();
                if sorted != others {
                    return Err(regen_core::Error::InvalidQuery(format!(
                        "MBR repair of node {failed} needs every other node as a helper"
                    ))
                    .into());
                }
                let plan = spec.repair_plan(failed)?;
                let mut out = vec![0 as Symbol; chunks * alpha];
                let nodes = &self.nodes;
                out.par_chunks_mut(alpha)
                    .with_min_len(PAR_MIN_CHUNKS)
                    .enumerate()
                    .for_each(|(c, dst)| {
                        for step in &plan {
                            dst[step.target_position] =
                                nodes[step.helper.index()].symbols[c * alpha + step.helper_position];
                        }
                    });
                (out, spec.transcript(failed, chunks)?)
            }
            Code::Msr(spec) => {
                let coeffs = spec.regen_coefficients(failed, &helpers)?;
                let field = spec.field().clone();
                let nodes = &self.nodes;
                let mut out = vec![0 as Symbol; chunks * alpha];
                out.par_chunks_mut(alpha)
                    .with_min_len(PAR_MIN_CHUNKS)
                    .enumerate()
                    .try_for_each(|(c, dst)| -> regen_core::Result<()> {
                        let v = helpers
                            .iter()
                            .enumerate()
                            .map(|(slot, h)| {
                                let stored = &nodes[h.index()].symbols[c * alpha..(c + 1) * alpha];
                                coeffs.helper_symbol(&field, slot, stored)
                            })
                            .collect::<regen_core::Result<Vec<_>>>()?;
                        dst.copy_from_slice(&coeffs.rebuild(&field, &v)?);
                        Ok(())
                    })?;
                let transcript = spec.commit_repair(&coeffs, chunks)?;
                self.manifest.aux_version = Some(spec.aux_version());
                (out, transcript)
            }
        };
        let node = &mut self.nodes[failed.index()];
        node.symbols = symbols;
        node.live = true;
        self.log.push(Event::Repair {
            node: failed,
            helpers: transcript.helper_ids(),
            symbols: transcript.total_symbols(),
        });
        Ok(transcript)
    }

    /// Repairs every failed node in ascending id order.
    pub fn repair_all(&mut self, policy: &dyn HelperPolicy) -> Result<Vec<RepairTranscript>> {
        self.failed_nodes()
            .into_iter()
            .map(|id| self.repair(id, policy))
            .collect()
    }

    fn check_collectable(&self) -> Result<()> {
        let live = self.live_nodes().len();
        let k = self.code.k();
        if live < k {
            return Err(SimError::DataLoss { live, k });
        }
        Ok(())
    }

    /// Source symbols of every chunk, padding included.
    pub fn decode_symbols(&self, ids: &[NodeId], parallel: bool) -> Result<Vec<Symbol>> {
        self.check_collectable()?;
        for &id in ids {
            if !self.node(id)?.live {
                return Err(regen_core::Error::DeadNode(id).into());
            }
        }
        let decoder = self.code.decoder(ids)?;
        let alpha = self.code.alpha();
        let decode_one = |c: usize| {
            let parts: Vec<&[Symbol]> = ids
                .iter()
                .map(|id| &self.nodes[id.index()].symbols[c * alpha..(c + 1) * alpha])
                .collect();
            decoder.decode(&parts)
        };
        let chunks = self.manifest.chunks;
        let decoded: Vec<Vec<Symbol>> = if parallel {
            (0..chunks)
                .into_par_iter()
                .with_min_len(PAR_MIN_CHUNKS)
                .map(decode_one)
                .collect::<regen_core::Result<_>>()?
        } else {
            (0..chunks).map(decode_one).collect::<regen_core::Result<_>>()?
        };
        Ok(decoded.concat())
    }

    /// The original bytes, read from the `k` nodes `ids`.
    pub fn collect(&self, ids: &[NodeId]) -> Result<Vec<u8>> {
        self.collect_with(ids, true)
    }

    pub fn collect_with(&self, ids: &[NodeId], parallel: bool) -> Result<Vec<u8>> {
        let mut symbols = self.decode_symbols(ids, parallel)?;
        symbols.truncate(self.manifest.payload_symbols());
        Ok(packing::symbols_to_bytes(
            self.manifest.field,
            &symbols,
            self.manifest.length,
        ))
    }

    /// Collects from `k` live nodes picked at random.
    pub fn collect_random(&mut self) -> Result<(Vec<NodeId>, Vec<u8>)> {
        self.check_collectable()?;
        let mut ids: Vec<NodeId> = self
            .live_nodes()
            .choose_multiple(&mut self.rng, self.code.k())
            .copied()
            .collect();
        ids.sort_unstable();
        let bytes = self.collect(&ids)?;
        Ok((ids, bytes))
    }

    /// Picks `count` distinct live nodes at random.
    pub fn random_live(&mut self, count: usize) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self
            .live_nodes()
            .choose_multiple(&mut self.rng, count)
            .copied()
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn rng(&mut self) -> &mut impl Rng {
        &mut self.rng
    }

    /// Re-derives every live node's contents from the lowest `k` live nodes
    /// and reports each chunk where stored and expected symbols differ.
    pub fn consistency_failures(&self) -> Result<Vec<String>> {
        self.check_collectable()?;
        let ids: Vec<NodeId> = self.live_nodes().into_iter().take(self.code.k()).collect();
        let decoder = self.code.decoder(&ids)?;
        let alpha = self.code.alpha();
        let b = self.code.b();
        let mut out = Vec::new();
        for c in 0..self.manifest.chunks {
            let parts: Vec<&[Symbol]> = ids
                .iter()
                .map(|id| &self.nodes[id.index()].symbols[c * alpha..(c + 1) * alpha])
                .collect();
            let source = match decoder.decode(&parts) {
                Ok(s) => s,
                Err(e) => {
                    out.push(format!("chunk {c}: {e}"));
                    continue;
                }
            };
            if c + 1 == self.manifest.chunks && source[b - self.manifest.padding..].iter().any(|&s| s != 0) {
                out.push(format!("chunk {c}: padding symbols are not zero"));
            }
            let expected = self.code.encode_chunk(&source)?;
            for (i, want) in expected.iter().enumerate() {
                if self.nodes[i].live && self.nodes[i].symbols[c * alpha..(c + 1) * alpha] != want[..] {
                    out.push(format!(
                        "chunk {c}: node {} disagrees with nodes {}",
                        i + 1,
                        join_ids(&ids)
                    ));
                }
            }
        }
        Ok(out)
    }
}
