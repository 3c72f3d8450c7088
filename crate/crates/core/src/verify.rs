//! Subspace checks for linear exact-regenerating codes at the MBR point.
//!
//! Each node `i` of a linear storage code stores `α` coefficient vectors in
//! `F^B`; their span `W_i` is the node subspace. A linear code is an exact
//! regenerating MBR code iff:
//!
//! * every `W_i` has dimension `α`;
//! * for `m < k` nodes `D_m` not containing `i`, `W_i ∩ Σ W_j` has
//!   dimension `mβ`;
//! * for any `d` helpers `D`, the intersections `W_i ∩ W_j` (`j ∈ D`) each
//!   have dimension `β` and together span `W_i` as a direct sum;
//! * every `d + 1` nodes look like the complete-graph construction.
//!
//! The checks return structured reports with the computed dimensions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{Field, Symbol};
use crate::linalg::{sum_dim, Subspace};
use crate::mbr::MbrCodeSpec;
use crate::msr::MsrCodeSpec;
use crate::node::NodeId;
use crate::subsets::combinations;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearStorageCode {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub alpha: usize,
    pub beta: usize,
    pub b: usize,
    field: Field,
    /// `nodes[i]` is the list of α vectors stored by node `i + 1`.
    nodes: Vec<Vec<Vec<Symbol>>>,
}

impl LinearStorageCode {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        field: &Field,
        n: usize,
        k: usize,
        d: usize,
        alpha: usize,
        beta: usize,
        b: usize,
        nodes: Vec<Vec<Vec<Symbol>>>,
    ) -> Result<Self> {
        if n == 0 || k == 0 || k > n || d == 0 || d >= n || b == 0 {
            return Err(Error::InvalidParameters(format!(
                "n={n} k={k} d={d} B={b} is not a valid storage code"
            )));
        }
        if nodes.len() != n {
            return Err(Error::WrongNodeCount {
                expected: n,
                got: nodes.len(),
            });
        }
        for vectors in &nodes {
            if vectors.len() != alpha {
                return Err(Error::LengthMismatch {
                    expected: alpha,
                    got: vectors.len(),
                });
            }
            for v in vectors {
                if v.len() != b {
                    return Err(Error::LengthMismatch {
                        expected: b,
                        got: v.len(),
                    });
                }
                if let Some(&bad) = v.iter().find(|&&x| !field.contains(x as u64)) {
                    return Err(Error::OutOfRange {
                        value: bad as u64,
                        order: field.order(),
                    });
                }
            }
        }
        Ok(Self {
            n,
            k,
            d,
            alpha,
            beta,
            b,
            field: field.clone(),
            nodes,
        })
    }

    pub fn from_mbr(spec: &MbrCodeSpec) -> Self {
        let p = spec.params();
        let nodes = (0..p.n)
            .map(|i| {
                spec.node_vectors(NodeId::from_index(i))
                    .expect("node in range")
                    .into_iter()
                    .map(<[Symbol]>::to_vec)
                    .collect()
            })
            .collect();
        Self {
            n: p.n,
            k: p.k,
            d: p.d,
            alpha: p.alpha,
            beta: p.beta,
            b: p.b,
            field: spec.field().clone(),
            nodes,
        }
    }

    /// Node `i` stores `f·p_i` and `g·p_i + f·u_i`, i.e. the vectors
    /// `(p_i, 0)` and `(u_i, p_i)` over the source `(f, g)`.
    pub fn from_msr(spec: &MsrCodeSpec) -> Self {
        let p = spec.params();
        let nodes = (0..p.n)
            .map(|i| {
                let id = NodeId::from_index(i);
                let main = spec.main_vector(id).expect("node in range");
                let aux = spec.aux_vector(id).expect("node in range");
                let mut first = main.to_vec();
                first.resize(p.b, 0);
                let mut second = aux.to_vec();
                second.extend_from_slice(main);
                alloc::vec![first, second]
            })
            .collect();
        Self {
            n: p.n,
            k: p.k,
            d: p.d,
            alpha: p.alpha,
            beta: p.beta,
            b: p.b,
            field: spec.field().clone(),
            nodes,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn node_vectors(&self, id: NodeId) -> &[Vec<Symbol>] {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> &[Vec<Vec<Symbol>>] {
        &self.nodes
    }

    /// Replaces one stored vector.
    pub fn set_vector(&mut self, id: NodeId, slot: usize, v: Vec<Symbol>) -> Result<()> {
        if v.len() != self.b {
            return Err(Error::LengthMismatch {
                expected: self.b,
                got: v.len(),
            });
        }
        let node = self.nodes.get_mut(id.index()).ok_or(Error::UnknownNode(id))?;
        let entry = node
            .get_mut(slot)
            .ok_or(Error::InvalidQuery(format!("slot {slot} out of range")))?;
        *entry = v;
        Ok(())
    }

    pub fn node_space(&self, id: NodeId) -> Subspace {
        Subspace::from_vectors(&self.field, self.b, &self.nodes[id.index()]).expect("validated on construction")
    }

    fn check_node(&self, id: NodeId) -> Result<()> {
        if id.0 == 0 || id.0 > self.n {
            return Err(Error::UnknownNode(id));
        }
        Ok(())
    }

    fn spaces(&self) -> Vec<Subspace> {
        (0..self.n).map(|i| self.node_space(NodeId::from_index(i))).collect()
    }

    /// The pairwise `β`-dimensional intersections follow from the `m = 1`
    /// case of the intersection bound, which needs `k >= 2`. With `k = 1`
    /// every node holds the whole file and the edge pattern does not apply.
    pub fn has_edge_pattern(&self) -> bool {
        self.k >= 2
    }

    /// `B = β (kd - k(k-1)/2)` and `α = dβ`.
    pub fn is_mbr_regime(&self) -> bool {
        self.alpha == self.d * self.beta
            && 2 * self.b + self.beta * self.k * (self.k - 1) == 2 * self.beta * self.k * self.d
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma1Report {
    pub dims: Vec<usize>,
    pub expected: usize,
}

impl Lemma1Report {
    pub fn pass(&self) -> bool {
        self.dims.iter().all(|&d| d == self.expected)
    }

    pub fn failing_nodes(&self) -> Vec<NodeId> {
        self.dims
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != self.expected)
            .map(|(i, _)| NodeId::from_index(i))
            .collect()
    }
}

/// `dim W_i` for every node; passes iff all equal `α`.
pub fn check_lemma1(code: &LinearStorageCode) -> Lemma1Report {
    Lemma1Report {
        dims: code.spaces().iter().map(Subspace::dim).collect(),
        expected: code.alpha,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionReport {
    pub node: NodeId,
    pub others: Vec<NodeId>,
    pub dim: usize,
    pub expected: usize,
}

impl IntersectionReport {
    pub fn pass(&self) -> bool {
        self.dim == self.expected
    }
}

/// `dim(W_i ∩ Σ_{j ∈ D_m} W_j)`, expected `mβ`. Only defined for `m < k`.
pub fn check_corollary1(code: &LinearStorageCode, node: NodeId, others: &[NodeId]) -> Result<IntersectionReport> {
    code.check_node(node)?;
    let m = others.len();
    if m >= code.k {
        return Err(Error::InvalidQuery(format!(
            "the intersection dimension is only characterised for m < k (m={m}, k={})",
            code.k
        )));
    }
    if others.contains(&node) {
        return Err(Error::InvalidQuery(format!("node {node} is in its own helper subset")));
    }
    for (i, &o) in others.iter().enumerate() {
        code.check_node(o)?;
        if others[..i].contains(&o) {
            return Err(Error::DuplicateNode(o));
        }
    }
    let wi = code.node_space(node);
    let mut sum = Subspace::zero(&code.field, code.b);
    for &o in others {
        sum = sum.sum(&code.node_space(o))?;
    }
    Ok(IntersectionReport {
        node,
        others: others.to_vec(),
        dim: wi.intersect(&sum)?.dim(),
        expected: m * code.beta,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma2Report {
    pub node: NodeId,
    /// `(j, dim(W_i ∩ W_j))` for each helper `j`.
    pub pairwise: Vec<(NodeId, usize)>,
    /// Dimension of the sum of the pairwise intersections.
    pub sum_dim: usize,
    pub beta: usize,
    pub alpha: usize,
}

impl Lemma2Report {
    pub fn pass(&self) -> bool {
        let d = self.pairwise.len();
        self.pairwise.iter().all(|&(_, dim)| dim == self.beta)
            && self.sum_dim == d * self.beta
            && d * self.beta == self.alpha
    }
}

/// For helper set `D` (`|D| = d`, `i ∉ D`): each `W_i ∩ W_j` must have
/// dimension `β` and the `d` intersections must be linearly independent,
/// spanning `dβ = α` dimensions.
pub fn check_lemma2(code: &LinearStorageCode, node: NodeId, helpers: &[NodeId]) -> Result<Lemma2Report> {
    code.check_node(node)?;
    if !code.has_edge_pattern() {
        return Err(Error::InvalidQuery(
            "pairwise intersections are only characterised for k >= 2".into(),
        ));
    }
    if helpers.len() != code.d {
        return Err(Error::WrongNodeCount {
            expected: code.d,
            got: helpers.len(),
        });
    }
    if helpers.contains(&node) {
        return Err(Error::InvalidQuery(format!("node {node} is in its own helper set")));
    }
    for (i, &h) in helpers.iter().enumerate() {
        code.check_node(h)?;
        if helpers[..i].contains(&h) {
            return Err(Error::DuplicateNode(h));
        }
    }
    let wi = code.node_space(node);
    let mut pairwise = Vec::with_capacity(helpers.len());
    let mut pieces = Vec::with_capacity(helpers.len());
    for &h in helpers {
        let s = wi.intersect(&code.node_space(h))?;
        pairwise.push((h, s.dim()));
        pieces.push(s);
    }
    Ok(Lemma2Report {
        node,
        pairwise,
        sum_dim: sum_dim(&pieces)?,
        beta: code.beta,
        alpha: code.alpha,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetReport {
    pub nodes: Vec<NodeId>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    pub mbr_regime: bool,
    pub subsets: Vec<SubsetReport>,
    /// `k`-subsets whose nodes span fewer than `B` dimensions.
    pub reconstruction_failures: Vec<Vec<NodeId>>,
}

impl StructureReport {
    pub fn pass(&self) -> bool {
        self.mbr_regime && self.reconstruction_failures.is_empty() && self.subsets.iter().all(|s| s.failure.is_none())
    }

    pub fn first_failure(&self) -> Option<String> {
        if !self.mbr_regime {
            return Some("parameters are not at the MBR point (need α = dβ, B = β(kd - k(k-1)/2))".into());
        }
        if let Some(s) = self.subsets.iter().find(|s| s.failure.is_some()) {
            return Some(format!("subset {:?}: {}", ids(&s.nodes), s.failure.as_ref().unwrap()));
        }
        self.reconstruction_failures
            .first()
            .map(|set| format!("nodes {:?} span fewer than B dimensions", ids(set)))
    }
}

fn ids(nodes: &[NodeId]) -> Vec<usize> {
    nodes.iter().map(|n| n.0).collect()
}

fn check_complete_graph_pattern(
    code: &LinearStorageCode,
    spaces: &[Subspace],
    subset: &[usize],
) -> Result<Option<String>> {
    let beta = code.beta;
    for &i in subset {
        if spaces[i].dim() != code.alpha {
            return Ok(Some(format!(
                "node {} stores {} dimensions, not α = {}",
                i + 1,
                spaces[i].dim(),
                code.alpha
            )));
        }
    }
    // edge subspaces W_i ∩ W_j for i < j in the subset
    let mut edges: Vec<((usize, usize), Subspace)> = Vec::new();
    for (x, &i) in subset.iter().enumerate() {
        for &j in &subset[x + 1..] {
            let s = spaces[i].intersect(&spaces[j])?;
            if s.dim() != beta {
                return Ok(Some(format!(
                    "nodes {} and {} share {} dimensions, not β = {beta}",
                    i + 1,
                    j + 1,
                    s.dim()
                )));
            }
            edges.push(((i, j), s));
        }
    }
    for (x, (e1, s1)) in edges.iter().enumerate() {
        if let Some((e2, _)) = edges[x + 1..].iter().find(|(_, s2)| s2 == s1) {
            return Ok(Some(format!(
                "edges {{{},{}}} and {{{},{}}} carry the same subspace",
                e1.0 + 1,
                e1.1 + 1,
                e2.0 + 1,
                e2.1 + 1
            )));
        }
    }
    for &i in subset {
        let incident: Vec<Subspace> = edges
            .iter()
            .filter(|((a, b), _)| *a == i || *b == i)
            .map(|(_, s)| s.clone())
            .collect();
        let dim = sum_dim(&incident)?;
        if dim != incident.len() * beta || dim != spaces[i].dim() {
            return Ok(Some(format!(
                "edge subspaces at node {} span {dim} dimensions, not a direct-sum basis of its {} dimensions",
                i + 1,
                spaces[i].dim()
            )));
        }
    }
    Ok(None)
}

/// Certifies the complete-graph structure on every `(d+1)`-subset and
/// reconstruction from every `k`-subset. For `k = 1` only the latter.
pub fn check_structure(code: &LinearStorageCode) -> StructureReport {
    let spaces = code.spaces();
    let mbr_regime = code.is_mbr_regime();
    let subsets = combinations(code.n, code.d + 1)
        .filter(|_| code.has_edge_pattern())
        .map(|subset| {
            let failure = check_complete_graph_pattern(code, &spaces, &subset).unwrap_or_else(|e| Some(format!("{e}")));
            SubsetReport {
                nodes: subset.into_iter().map(NodeId::from_index).collect(),
                failure,
            }
        })
        .collect();
    let reconstruction_failures = combinations(code.n, code.k)
        .filter(|set| {
            let chosen: Vec<Subspace> = set.iter().map(|&i| spaces[i].clone()).collect();
            sum_dim(&chosen).map(|d| d != code.b).unwrap_or(true)
        })
        .map(|set| set.into_iter().map(NodeId::from_index).collect())
        .collect();
    StructureReport {
        mbr_regime,
        subsets,
        reconstruction_failures,
    }
}

/// Outcome of one named check in a [`Certificate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

impl CheckOutcome {
    pub fn pass(&self) -> bool {
        self.failed == 0
    }
}

/// All four subspace checks, swept over every admissible node and subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub checks: Vec<CheckOutcome>,
}

impl Certificate {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(CheckOutcome::pass)
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.pass())
    }
}

pub fn certify(code: &LinearStorageCode) -> Certificate {
    let lemma1 = check_lemma1(code);
    let lemma1 = CheckOutcome {
        name: "lemma1",
        cases: code.n,
        failed: lemma1.failing_nodes().len(),
        first_failure: lemma1.failing_nodes().first().map(|id| {
            format!(
                "node {id} stores {} dimensions, expected {}",
                lemma1.dims[id.index()],
                lemma1.expected
            )
        }),
    };

    let mut cor = CheckOutcome {
        name: "corollary1",
        cases: 0,
        failed: 0,
        first_failure: None,
    };
    let mut lem2 = CheckOutcome {
        name: "lemma2",
        cases: 0,
        failed: 0,
        first_failure: None,
    };
    for i in 0..code.n {
        let node = NodeId::from_index(i);
        let others: Vec<NodeId> = (0..code.n).filter(|&j| j != i).map(NodeId::from_index).collect();
        for m in 1..code.k.min(code.d + 1) {
            for subset in combinations(others.len(), m) {
                let chosen: Vec<NodeId> = subset.iter().map(|&s| others[s]).collect();
                cor.cases += 1;
                let r = check_corollary1(code, node, &chosen).expect("admissible query");
                if !r.pass() {
                    cor.failed += 1;
                    cor.first_failure.get_or_insert_with(|| {
                        format!(
                            "node {node} vs {:?}: intersection has dimension {}, expected {}",
                            ids(&chosen),
                            r.dim,
                            r.expected
                        )
                    });
                }
            }
        }
        if !code.has_edge_pattern() {
            continue;
        }
        for subset in combinations(others.len(), code.d) {
            let helpers: Vec<NodeId> = subset.iter().map(|&s| others[s]).collect();
            lem2.cases += 1;
            let r = check_lemma2(code, node, &helpers).expect("admissible query");
            if !r.pass() {
                lem2.failed += 1;
                lem2.first_failure.get_or_insert_with(|| {
                    format!(
                        "node {node} with helpers {:?}: pairwise dims {:?}, sum {}, expected β = {} each and α = {} total",
                        ids(&helpers),
                        r.pairwise.iter().map(|p| p.1).collect::<Vec<_>>(),
                        r.sum_dim,
                        r.beta,
                        r.alpha
                    )
                });
            }
        }
    }

    let structure = check_structure(code);
    let structure = CheckOutcome {
        name: "structure",
        cases: structure.subsets.len() + 1,
        failed: structure.subsets.iter().filter(|s| s.failure.is_some()).count()
            + usize::from(!structure.mbr_regime || !structure.reconstruction_failures.is_empty()),
        first_failure: structure.first_failure(),
    };

    Certificate {
        checks: alloc::vec![lemma1, cor, lem2, structure],
    }
}
