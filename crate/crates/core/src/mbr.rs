//! Exact regenerating code at the minimum-bandwidth point with `d = n - 1`.
//!
//! Nodes are the vertices of the complete graph `K_n`; each of its
//! `θ = n(n-1)/2` edges carries one coded symbol `f^t v_e`, stored at both
//! endpoints. With `β = 1` every node holds `α = d` symbols and the file has
//! `B = kd - k(k-1)/2` source symbols. The `θ` coding vectors form an MDS
//! family in `F^B`.
//!
//! Repair of node `i` downloads, from every other node `j`, the symbol on
//! edge `{i, j}`, which reproduces node `i` exactly. A data collector talking
//! to `k` nodes sees `kα` symbols of which `C(k, 2)` are repeats, leaving `B`
//! distinct MDS symbols to decode.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{Field, Symbol};
use crate::linalg::Matrix;
use crate::mds::{make_mds, select_field, VectorFamily};
use crate::node::{HelperContribution, NodeId, NodeState, RepairTranscript};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MbrParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub alpha: usize,
    pub beta: usize,
    /// File size in symbols.
    pub b: usize,
    pub theta: usize,
}

impl MbrParams {
    pub fn derive(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::InvalidParameters(format!("MBR needs 1 <= k < n (n={n}, k={k})")));
        }
        let d = n - 1;
        Ok(Self {
            n,
            k,
            d,
            alpha: d,
            beta: 1,
            b: k * d - k * (k - 1) / 2,
            theta: d * (d + 1) / 2,
        })
    }

    /// Per-node storage and repair bandwidth at the MBR point for a file of
    /// `b` symbols, as rationals `(num, den)`: `α = 2Bd / (2kd - k^2 + k)`,
    /// `β = 2B / (2kd - k^2 + k)`.
    pub fn tradeoff_point(b: usize, k: usize, d: usize) -> ((usize, usize), (usize, usize)) {
        let den = 2 * k * d + k - k * k;
        ((2 * b * d, den), (2 * b, den))
    }

    /// Symbols downloaded by one repair.
    pub fn repair_bandwidth(&self) -> usize {
        self.d * self.beta
    }
}

/// The `n x θ` incidence matrix of `K_n`. Columns enumerate edges `{i, j}`,
/// `i < j`, lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    n: usize,
    edges: Vec<(usize, usize)>,
    node_columns: Vec<Vec<usize>>,
}

impl IncidenceMatrix {
    pub fn complete_graph(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameters(format!("need at least 2 nodes, got {n}")));
        }
        let mut edges = Vec::with_capacity(n * (n - 1) / 2);
        let mut node_columns = vec![Vec::with_capacity(n - 1); n];
        for i in 0..n {
            for j in i + 1..n {
                let col = edges.len();
                edges.push((i, j));
                node_columns[i].push(col);
                node_columns[j].push(col);
            }
        }
        for cols in &mut node_columns {
            cols.sort_unstable();
        }
        Ok(Self { n, edges, node_columns })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> usize {
        self.edges.len()
    }

    /// Endpoints (0-based) of the edge in column `col`.
    pub fn edge(&self, col: usize) -> (usize, usize) {
        self.edges[col]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Column indices incident to node `index` (0-based), ascending.
    pub fn columns_of(&self, index: usize) -> &[usize] {
        &self.node_columns[index]
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        let (a, b) = self.edges[col];
        u8::from(row == a || row == b)
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|r| (0..self.theta()).map(|c| self.get(r, c)).collect())
            .collect()
    }

    /// Column shared by nodes `a` and `b` (0-based, distinct).
    pub fn column_between(&self, a: usize, b: usize) -> usize {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        // columns before row i: sum_{r<i} (n-1-r)
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }
}

/// One step of an MBR repair: `helper` sends its symbol at
/// `helper_position`, which lands at `target_position` of the new node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepairStep {
    pub helper: NodeId,
    pub helper_position: usize,
    pub target_position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MbrCodeSpec {
    params: MbrParams,
    incidence: IncidenceMatrix,
    family: VectorFamily,
}

impl MbrCodeSpec {
    /// Builds the code over the smallest field that supports it.
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let params = MbrParams::derive(n, k)?;
        let field = Field::new(select_field(params.theta, params.b)?);
        Self::with_field(n, k, &field)
    }

    pub fn with_field(n: usize, k: usize, field: &Field) -> Result<Self> {
        let params = MbrParams::derive(n, k)?;
        Self::with_family(n, k, make_mds(params.theta, params.b, field)?)
    }

    pub fn with_family(n: usize, k: usize, family: VectorFamily) -> Result<Self> {
        let params = MbrParams::derive(n, k)?;
        if family.count() != params.theta || family.dim() != params.b {
            return Err(Error::InvalidParameters(format!(
                "family has {} vectors of length {}, code needs {} of length {}",
                family.count(),
                family.dim(),
                params.theta,
                params.b
            )));
        }
        Ok(Self {
            params,
            incidence: IncidenceMatrix::complete_graph(n)?,
            family,
        })
    }

    pub fn params(&self) -> &MbrParams {
        &self.params
    }

    pub fn incidence(&self) -> &IncidenceMatrix {
        &self.incidence
    }

    pub fn family(&self) -> &VectorFamily {
        &self.family
    }

    pub fn field(&self) -> &Field {
        self.family.field()
    }

    fn check_node(&self, id: NodeId) -> Result<usize> {
        if id.0 == 0 || id.0 > self.params.n {
            return Err(Error::UnknownNode(id));
        }
        Ok(id.index())
    }

    pub fn node_columns(&self, id: NodeId) -> Result<&[usize]> {
        Ok(self.incidence.columns_of(self.check_node(id)?))
    }

    /// The coding vectors of the symbols node `id` stores, in storage order.
    pub fn node_vectors(&self, id: NodeId) -> Result<Vec<&[Symbol]>> {
        Ok(self.node_columns(id)?.iter().map(|&c| self.family.vector(c)).collect())
    }

    fn check_distinct(&self, ids: &[NodeId]) -> Result<()> {
        for (i, &id) in ids.iter().enumerate() {
            self.check_node(id)?;
            if ids[..i].contains(&id) {
                return Err(Error::DuplicateNode(id));
            }
        }
        Ok(())
    }

    /// Union of the edge columns held by `nodes`, ascending.
    pub fn distinct_edges(&self, nodes: &[NodeId]) -> Result<Vec<usize>> {
        self.check_distinct(nodes)?;
        let mut cols: Vec<usize> = nodes
            .iter()
            .flat_map(|id| self.incidence.columns_of(id.index()).iter().copied())
            .collect();
        cols.sort_unstable();
        cols.dedup();
        Ok(cols)
    }

    /// `f^t v_e` for every edge `e`.
    pub fn edge_symbols(&self, source: &[Symbol]) -> Result<Vec<Symbol>> {
        if source.len() != self.params.b {
            return Err(Error::LengthMismatch {
                expected: self.params.b,
                got: source.len(),
            });
        }
        let f = self.field();
        if let Some(&bad) = source.iter().find(|&&s| !f.contains(s as u64)) {
            return Err(Error::OutOfRange {
                value: bad as u64,
                order: f.order(),
            });
        }
        Ok(self.family.vectors().iter().map(|v| f.dot(source, v)).collect())
    }

    pub fn encode(&self, source: &[Symbol]) -> Result<Vec<NodeState>> {
        let edge = self.edge_symbols(source)?;
        Ok((0..self.params.n)
            .map(|i| {
                let symbols = self.incidence.columns_of(i).iter().map(|&c| edge[c]).collect();
                NodeState::new(NodeId::from_index(i), symbols)
            })
            .collect())
    }

    pub fn decoder(&self, nodes: &[NodeId]) -> Result<MbrDecoder> {
        MbrDecoder::new(self, nodes)
    }

    /// Recovers the `B` source symbols from any `k` live nodes.
    pub fn reconstruct(&self, nodes: &[NodeState]) -> Result<Vec<Symbol>> {
        if let Some(dead) = nodes.iter().find(|n| !n.live) {
            return Err(Error::DeadNode(dead.id));
        }
        let ids: Vec<NodeId> = nodes.iter().map(|n| n.id).collect();
        let decoder = self.decoder(&ids)?;
        let symbols: Vec<&[Symbol]> = nodes.iter().map(|n| n.symbols.as_slice()).collect();
        decoder.decode(&symbols)
    }

    /// Who sends what when `failed` is rebuilt: one step per stored symbol.
    pub fn repair_plan(&self, failed: NodeId) -> Result<Vec<RepairStep>> {
        let fi = self.check_node(failed)?;
        Ok(self
            .incidence
            .columns_of(fi)
            .iter()
            .enumerate()
            .map(|(target_position, &col)| {
                let (a, b) = self.incidence.edge(col);
                let helper = if a == fi { b } else { a };
                let helper_position = self
                    .incidence
                    .columns_of(helper)
                    .binary_search(&col)
                    .expect("edge is incident to both endpoints");
                RepairStep {
                    helper: NodeId::from_index(helper),
                    helper_position,
                    target_position,
                }
            })
            .collect())
    }

    pub fn transcript(&self, failed: NodeId, chunks: usize) -> Result<RepairTranscript> {
        let helpers = self
            .repair_plan(failed)?
            .iter()
            .map(|s| HelperContribution {
                node: s.helper,
                symbols_per_chunk: self.params.beta,
            })
            .collect();
        Ok(RepairTranscript {
            failed,
            helpers,
            chunks,
            symbol_bits: self.field().spec().symbol_bits(),
        })
    }

    /// Exact regeneration of `failed` from the other `n - 1` nodes.
    pub fn regenerate(&self, failed: NodeId, helpers: &[NodeState]) -> Result<(NodeState, RepairTranscript)> {
        self.check_node(failed)?;
        let ids: Vec<NodeId> = helpers.iter().map(|h| h.id).collect();
        self.check_distinct(&ids)?;
        if ids.contains(&failed) {
            return Err(Error::InvalidQuery(format!("node {failed} cannot help repair itself")));
        }
        let plan = self.repair_plan(failed)?;
        let mut symbols = vec![0; self.params.alpha];
        for step in &plan {
            let helper = helpers
                .iter()
                .find(|h| h.id == step.helper)
                .ok_or(Error::MissingHelper(step.helper))?;
            if !helper.live {
                return Err(Error::DeadNode(helper.id));
            }
            if helper.symbols.len() != self.params.alpha {
                return Err(Error::LengthMismatch {
                    expected: self.params.alpha,
                    got: helper.symbols.len(),
                });
            }
            symbols[step.target_position] = helper.symbols[step.helper_position];
        }
        Ok((NodeState::new(failed, symbols), self.transcript(failed, 1)?))
    }
}

/// Decoding recipe for one fixed set of `k` nodes, reusable across chunks.
#[derive(Debug, Clone)]
pub struct MbrDecoder {
    nodes: Vec<NodeId>,
    alpha: usize,
    /// `(slot, position)` of the first copy of each distinct edge.
    picks: Vec<(usize, usize)>,
    /// Second copies of shared edges, paired with their first copy.
    repeats: Vec<((usize, usize), (usize, usize))>,
    /// `None` when the picked vectors are already the standard basis.
    inverse: Option<Matrix>,
}

impl MbrDecoder {
    pub fn new(spec: &MbrCodeSpec, nodes: &[NodeId]) -> Result<Self> {
        let params = spec.params();
        if nodes.len() != params.k {
            return Err(Error::WrongNodeCount {
                expected: params.k,
                got: nodes.len(),
            });
        }
        spec.check_distinct(nodes)?;
        let mut first_copy: Vec<Option<(usize, usize)>> = vec![None; params.theta];
        let mut repeats = Vec::new();
        for (slot, id) in nodes.iter().enumerate() {
            for (pos, &col) in spec.incidence.columns_of(id.index()).iter().enumerate() {
                match first_copy[col] {
                    Some(first) => repeats.push((first, (slot, pos))),
                    None => first_copy[col] = Some((slot, pos)),
                }
            }
        }
        let (cols, picks): (Vec<usize>, Vec<(usize, usize)>) = first_copy
            .iter()
            .enumerate()
            .filter_map(|(col, pick)| pick.map(|p| (col, p)))
            .unzip();
        debug_assert_eq!(repeats.len(), params.k * (params.k - 1) / 2);
        let field = spec.field();
        let rows: Vec<&[Symbol]> = cols.iter().map(|&c| spec.family.vector(c)).collect();
        let m = Matrix::from_rows(field, params.b, &rows)?;
        let inverse = if m == Matrix::identity(field, params.b) {
            None
        } else {
            Some(m.invert().map_err(|_| Error::RankDeficient {
                rank: m.rank(),
                needed: params.b,
            })?)
        };
        Ok(Self {
            nodes: nodes.to_vec(),
            alpha: params.alpha,
            picks,
            repeats,
            inverse,
        })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Number of downloaded symbols that duplicate another one.
    pub fn repeat_count(&self) -> usize {
        self.repeats.len()
    }

    /// True when decoding is a pure read (systematic node set).
    pub fn is_systematic(&self) -> bool {
        self.inverse.is_none()
    }

    /// `symbols[slot]` holds the α symbols of `nodes()[slot]`.
    pub fn decode(&self, symbols: &[&[Symbol]]) -> Result<Vec<Symbol>> {
        if symbols.len() != self.nodes.len() {
            return Err(Error::WrongNodeCount {
                expected: self.nodes.len(),
                got: symbols.len(),
            });
        }
        if let Some(s) = symbols.iter().find(|s| s.len() != self.alpha) {
            return Err(Error::LengthMismatch {
                expected: self.alpha,
                got: s.len(),
            });
        }
        for &((s1, p1), (s2, p2)) in &self.repeats {
            if symbols[s1][p1] != symbols[s2][p2] {
                return Err(Error::InconsistentSymbols(self.nodes[s1], self.nodes[s2]));
            }
        }
        let y: Vec<Symbol> = self.picks.iter().map(|&(s, p)| symbols[s][p]).collect();
        match &self.inverse {
            None => Ok(y),
            Some(inv) => inv.mul_vec(&y),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_parameters() {
        let p = MbrParams::derive(5, 3).unwrap();
        assert_eq!((p.d, p.alpha, p.beta, p.b, p.theta), (4, 4, 1, 9, 10));
        let p = MbrParams::derive(2, 1).unwrap();
        assert_eq!((p.d, p.alpha, p.b, p.theta), (1, 1, 1, 1));
        let p = MbrParams::derive(6, 3).unwrap();
        assert_eq!((p.b, p.theta), (12, 15));
        assert!(MbrParams::derive(3, 3).is_err());
        assert!(MbrParams::derive(3, 0).is_err());
    }

    #[test]
    fn tradeoff_point_at_beta_one() {
        for n in 2..10 {
            for k in 1..n {
                let p = MbrParams::derive(n, k).unwrap();
                let ((an, ad), (bn, bd)) = MbrParams::tradeoff_point(p.b, p.k, p.d);
                assert_eq!(an, p.alpha * ad);
                assert_eq!(bn, p.beta * bd);
            }
        }
    }

    #[test]
    fn column_between_matches_edge_list() {
        for n in 2..9 {
            let inc = IncidenceMatrix::complete_graph(n).unwrap();
            for (col, &(a, b)) in inc.edges().iter().enumerate() {
                assert_eq!(inc.column_between(a, b), col);
                assert_eq!(inc.column_between(b, a), col);
            }
        }
    }

    #[test]
    fn two_node_code() {
        let spec = MbrCodeSpec::new(2, 1).unwrap();
        let nodes = spec.encode(&[1]).unwrap();
        assert_eq!(nodes[0].symbols, vec![1]);
        assert_eq!(spec.reconstruct(&nodes[..1]).unwrap(), vec![1]);
        let (regen, t) = spec.regenerate(NodeId(2), &nodes[..1]).unwrap();
        assert_eq!(regen, nodes[1]);
        assert_eq!(t.helper_ids(), vec![NodeId(1)]);
        assert_eq!(t.total_symbols(), 1);
    }

    #[test]
    fn error_paths() {
        let spec = MbrCodeSpec::new(5, 3).unwrap();
        assert!(matches!(spec.encode(&[0; 8]), Err(Error::LengthMismatch { .. })));
        let nodes = spec.encode(&[1, 0, 1, 1, 0, 0, 1, 0, 1]).unwrap();
        let dup = [nodes[0].clone(), nodes[0].clone(), nodes[1].clone()];
        assert_eq!(spec.reconstruct(&dup), Err(Error::DuplicateNode(NodeId(1))));
        assert!(matches!(
            spec.reconstruct(&nodes[..2]),
            Err(Error::WrongNodeCount { .. })
        ));

        let mut corrupt = nodes[..3].to_vec();
        corrupt[1].symbols[0] ^= 1; // node 2's copy of edge {1,2}
        assert_eq!(
            spec.reconstruct(&corrupt),
            Err(Error::InconsistentSymbols(NodeId(1), NodeId(2)))
        );

        let helpers: Vec<NodeState> = nodes
            .iter()
            .filter(|n| n.id != NodeId(3) && n.id != NodeId(5))
            .cloned()
            .collect();
        assert_eq!(
            spec.regenerate(NodeId(3), &helpers),
            Err(Error::MissingHelper(NodeId(5)))
        );
        assert_eq!(spec.regenerate(NodeId(6), &helpers), Err(Error::UnknownNode(NodeId(6))));
    }
}
