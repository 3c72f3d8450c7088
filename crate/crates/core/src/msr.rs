//! Regenerating code at the minimum-storage point with `d = k + 1`.
//!
//! The file is `2k` symbols split into halves `f` and `g`. Node `i` keeps a
//! main vector `p_i` (the `n` main vectors form a Vandermonde MDS family in
//! `F^k`) and an auxiliary vector `u_i`, and stores
//! `(f·p_i, g·p_i + f·u_i)`. Reconstruction never depends on the `u_i`.
//!
//! Repair keeps the main vector but may change the auxiliary one, so the
//! code description is mutable: each regeneration records the new `ũ`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec, Symbol};
use crate::linalg::{vandermonde_row, Matrix, Solution};
use crate::node::{HelperContribution, NodeId, NodeState, RepairTranscript};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MsrParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub alpha: usize,
    pub beta: usize,
    /// File size in symbols.
    pub b: usize,
}

impl MsrParams {
    pub fn derive(n: usize, k: usize) -> Result<Self> {
        if k == 0 || n < k + 2 {
            return Err(Error::InvalidParameters(format!(
                "MSR with d = k+1 needs k >= 1 and n >= k + 2 (n={n}, k={k})"
            )));
        }
        let d = k + 1;
        Ok(Self {
            n,
            k,
            d,
            alpha: d - k + 1,
            beta: 1,
            b: k * (d - k + 1),
        })
    }

    /// `(α, β) = (B/k, B/(k(d-k+1)))` as rationals `(num, den)`.
    pub fn tradeoff_point(b: usize, k: usize, d: usize) -> ((usize, usize), (usize, usize)) {
        ((b, k), (b, k * (d - k + 1)))
    }

    pub fn repair_bandwidth(&self) -> usize {
        self.d * self.beta
    }
}

/// How auxiliary vectors are initialised. Any values work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxInit {
    Zero,
    Seeded(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MsrCodeSpec {
    params: MsrParams,
    field: Field,
    main: Vec<Vec<Symbol>>,
    aux: Vec<Vec<Symbol>>,
    aux_version: u64,
}

impl MsrCodeSpec {
    /// Builds the code over the smallest field with `q >= n`.
    pub fn new(n: usize, k: usize, aux: AuxInit) -> Result<Self> {
        let params = MsrParams::derive(n, k)?;
        let field = Field::new(FieldSpec::smallest_with_order(n)?);
        Self::build(params, &field, aux)
    }

    /// Main vector `p_i = (1, x_i, ..., x_i^(k-1))` with `x_i = i - 1`.
    pub fn build(params: MsrParams, field: &Field, aux: AuxInit) -> Result<Self> {
        if (field.order() as usize) < params.n {
            return Err(Error::FieldTooSmall {
                need: params.n,
                have: field.order(),
            });
        }
        let main = (0..params.n)
            .map(|i| vandermonde_row(field, i as Symbol, params.k))
            .collect();
        let aux = match aux {
            AuxInit::Zero => vec![vec![0; params.k]; params.n],
            AuxInit::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..params.n)
                    .map(|_| {
                        (0..params.k)
                            .map(|_| rng.gen_range(0..field.order()) as Symbol)
                            .collect()
                    })
                    .collect()
            }
        };
        Ok(Self {
            params,
            field: field.clone(),
            main,
            aux,
            aux_version: 0,
        })
    }

    /// Replaces the auxiliary table, e.g. when loading a persisted cluster.
    pub fn with_aux_table(mut self, aux: Vec<Vec<Symbol>>, version: u64) -> Result<Self> {
        if aux.len() != self.params.n {
            return Err(Error::WrongNodeCount {
                expected: self.params.n,
                got: aux.len(),
            });
        }
        for u in &aux {
            if u.len() != self.params.k {
                return Err(Error::LengthMismatch {
                    expected: self.params.k,
                    got: u.len(),
                });
            }
            if let Some(&bad) = u.iter().find(|&&x| !self.field.contains(x as u64)) {
                return Err(Error::OutOfRange {
                    value: bad as u64,
                    order: self.field.order(),
                });
            }
        }
        self.aux = aux;
        self.aux_version = version;
        Ok(self)
    }

    pub fn params(&self) -> &MsrParams {
        &self.params
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn main_vector(&self, id: NodeId) -> Result<&[Symbol]> {
        Ok(&self.main[self.check_node(id)?])
    }

    pub fn aux_vector(&self, id: NodeId) -> Result<&[Symbol]> {
        Ok(&self.aux[self.check_node(id)?])
    }

    pub fn aux_table(&self) -> &[Vec<Symbol>] {
        &self.aux
    }

    /// Bumped on every committed repair.
    pub fn aux_version(&self) -> u64 {
        self.aux_version
    }

    fn check_node(&self, id: NodeId) -> Result<usize> {
        if id.0 == 0 || id.0 > self.params.n {
            return Err(Error::UnknownNode(id));
        }
        Ok(id.index())
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

    fn check_source(&self, source: &[Symbol]) -> Result<()> {
        if source.len() != self.params.b {
            return Err(Error::LengthMismatch {
                expected: self.params.b,
                got: source.len(),
            });
        }
        if let Some(&bad) = source.iter().find(|&&s| !self.field.contains(s as u64)) {
            return Err(Error::OutOfRange {
                value: bad as u64,
                order: self.field.order(),
            });
        }
        Ok(())
    }

    /// The two symbols of node `id`; `source = f || g`.
    pub fn node_symbols(&self, id: NodeId, source: &[Symbol]) -> Result<[Symbol; 2]> {
        self.check_source(source)?;
        let i = self.check_node(id)?;
        let (f, g) = source.split_at(self.params.k);
        let fld = &self.field;
        Ok([
            fld.dot(f, &self.main[i]),
            fld.add(fld.dot(g, &self.main[i]), fld.dot(f, &self.aux[i])),
        ])
    }

    pub fn encode(&self, source: &[Symbol]) -> Result<Vec<NodeState>> {
        self.check_source(source)?;
        (0..self.params.n)
            .map(|i| {
                let id = NodeId::from_index(i);
                Ok(NodeState::new(id, self.node_symbols(id, source)?.to_vec()))
            })
            .collect()
    }

    pub fn decoder(&self, nodes: &[NodeId]) -> Result<MsrDecoder> {
        let k = self.params.k;
        if nodes.len() != k {
            return Err(Error::WrongNodeCount {
                expected: k,
                got: nodes.len(),
            });
        }
        self.check_distinct(nodes)?;
        let rows: Vec<&[Symbol]> = nodes.iter().map(|id| self.main[id.index()].as_slice()).collect();
        let p = Matrix::from_rows(&self.field, k, &rows)?;
        let inverse = p.invert().map_err(|_| Error::RankDeficient {
            rank: p.rank(),
            needed: k,
        })?;
        Ok(MsrDecoder {
            nodes: nodes.to_vec(),
            inverse,
            aux: nodes.iter().map(|id| self.aux[id.index()].clone()).collect(),
            field: self.field.clone(),
        })
    }

    pub fn reconstruct(&self, nodes: &[NodeState]) -> Result<Vec<Symbol>> {
        if let Some(dead) = nodes.iter().find(|n| !n.live) {
            return Err(Error::DeadNode(dead.id));
        }
        let ids: Vec<NodeId> = nodes.iter().map(|n| n.id).collect();
        let symbols: Vec<&[Symbol]> = nodes.iter().map(|n| n.symbols.as_slice()).collect();
        self.decoder(&ids)?.decode(&symbols)
    }

    /// Coefficients for rebuilding `failed` from `helpers` (`d = k + 1`
    /// distinct other nodes).
    ///
    /// With `b_i = 1`: `ρ` solves `Σ ρ_i p_i = p_failed`; `δ` spans the
    /// one-dimensional kernel of `[p_1 .. p_d]`, scaled so `δ_1 = 1`; `a`
    /// solves `Σ δ_i a_i p_i = p_failed - Σ δ_i u_i` through `x_i = δ_i a_i`.
    /// Free variables are zero, so the result is deterministic.
    pub fn regen_coefficients(&self, failed: NodeId, helpers: &[NodeId]) -> Result<RegenCoefficients> {
        let fi = self.check_node(failed)?;
        let d = self.params.d;
        let k = self.params.k;
        if helpers.len() != d {
            return Err(Error::WrongNodeCount {
                expected: d,
                got: helpers.len(),
            });
        }
        self.check_distinct(helpers)?;
        if helpers.contains(&failed) {
            return Err(Error::InvalidQuery(format!("node {failed} cannot help repair itself")));
        }
        let fld = &self.field;

        // k x d, column i is p_{helper i}
        let cols: Vec<&[Symbol]> = helpers.iter().map(|h| self.main[h.index()].as_slice()).collect();
        let p = Matrix::from_rows(fld, k, &cols)?.transpose();
        let target = &self.main[fi];

        let rho = match p.solve(target)? {
            Solution::Inconsistent => {
                return Err(Error::RankDeficient {
                    rank: p.rank(),
                    needed: k,
                })
            }
            s => s.particular().expect("consistent").to_vec(),
        };

        let kernel = p.nullspace();
        if kernel.dim() != 1 {
            return Err(Error::RankDeficient {
                rank: d - kernel.dim(),
                needed: k,
            });
        }
        let raw = kernel.basis().row(0);
        let scale = fld.inv(raw[0]).map_err(|_| Error::ZeroDelta(0))?;
        let delta: Vec<Symbol> = raw.iter().map(|&x| fld.mul(x, scale)).collect();
        if let Some(i) = delta.iter().position(|&x| x == 0) {
            return Err(Error::ZeroDelta(i));
        }

        let b = vec![1 as Symbol; d];
        let mut rhs = target.to_vec();
        for (i, h) in helpers.iter().enumerate() {
            let weight = fld.mul(delta[i], b[i]);
            for (r, &u) in rhs.iter_mut().zip(&self.aux[h.index()]) {
                *r = fld.sub(*r, fld.mul(weight, u));
            }
        }
        let x = match p.solve(&rhs)? {
            Solution::Inconsistent => {
                return Err(Error::RankDeficient {
                    rank: p.rank(),
                    needed: k,
                })
            }
            s => s.particular().expect("consistent").to_vec(),
        };
        let a: Vec<Symbol> = x
            .iter()
            .zip(&delta)
            .map(|(&xi, &di)| fld.div(xi, di))
            .collect::<Result<_>>()?;

        // ũ = Σ ρ_i (a_i p_i + b_i u_i)
        let mut new_aux = vec![0 as Symbol; k];
        for (i, h) in helpers.iter().enumerate() {
            let (pv, uv) = (&self.main[h.index()], &self.aux[h.index()]);
            for (j, out) in new_aux.iter_mut().enumerate() {
                let term = fld.add(fld.mul(a[i], pv[j]), fld.mul(b[i], uv[j]));
                *out = fld.mul_add(*out, rho[i], term);
            }
        }

        Ok(RegenCoefficients {
            failed,
            helpers: helpers.to_vec(),
            a,
            b,
            delta,
            rho,
            new_aux,
            aux_version: self.aux_version,
        })
    }

    /// The first `d` live-eligible helpers in ascending id order.
    pub fn default_helpers(&self, failed: NodeId, live: &[NodeId]) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = live.iter().copied().filter(|&id| id != failed).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.truncate(self.params.d);
        ids
    }

    /// Records the regenerated node's new auxiliary vector.
    pub fn commit_repair(&mut self, coeffs: &RegenCoefficients, chunks: usize) -> Result<RepairTranscript> {
        if coeffs.aux_version != self.aux_version {
            return Err(Error::InvalidQuery(format!(
                "coefficients were computed against auxiliary table version {}, current is {}",
                coeffs.aux_version, self.aux_version
            )));
        }
        let fi = self.check_node(coeffs.failed)?;
        self.aux[fi] = coeffs.new_aux.clone();
        self.aux_version += 1;
        Ok(self.transcript(coeffs, chunks))
    }

    pub fn transcript(&self, coeffs: &RegenCoefficients, chunks: usize) -> RepairTranscript {
        RepairTranscript {
            failed: coeffs.failed,
            helpers: coeffs
                .helpers
                .iter()
                .map(|&node| HelperContribution {
                    node,
                    symbols_per_chunk: self.params.beta,
                })
                .collect(),
            chunks,
            symbol_bits: self.field.spec().symbol_bits(),
        }
    }

    /// Rebuilds `failed` from the `d` symbols `v_i` its helpers sent, and
    /// commits the new auxiliary vector. Returns the new node and its `ũ`.
    pub fn regenerate(
        &mut self,
        failed: NodeId,
        helpers: &[NodeId],
        helper_symbols: &[Symbol],
    ) -> Result<(NodeState, Vec<Symbol>, RepairTranscript)> {
        let coeffs = self.regen_coefficients(failed, helpers)?;
        let symbols = coeffs.rebuild(&self.field, helper_symbols)?;
        let transcript = self.commit_repair(&coeffs, 1)?;
        Ok((NodeState::new(failed, symbols.to_vec()), coeffs.new_aux, transcript))
    }

    /// [`regenerate`](Self::regenerate) with each helper computing its own
    /// `v_i` from its stored symbols.
    pub fn regenerate_from_nodes(
        &mut self,
        failed: NodeId,
        helpers: &[NodeState],
    ) -> Result<(NodeState, Vec<Symbol>, RepairTranscript)> {
        if let Some(dead) = helpers.iter().find(|n| !n.live) {
            return Err(Error::DeadNode(dead.id));
        }
        let ids: Vec<NodeId> = helpers.iter().map(|h| h.id).collect();
        let coeffs = self.regen_coefficients(failed, &ids)?;
        let v = helpers
            .iter()
            .enumerate()
            .map(|(slot, h)| coeffs.helper_symbol(&self.field, slot, &h.symbols))
            .collect::<Result<Vec<_>>>()?;
        self.regenerate(failed, &ids, &v)
    }

    /// Adds node `n + 1` with the next unused evaluation point; needs
    /// `q > n`. Its contents come from a subsequent regeneration.
    pub fn add_node(&mut self) -> Result<NodeId> {
        let n = self.params.n;
        if self.field.order() as usize <= n {
            return Err(Error::FieldTooSmall {
                need: n + 1,
                have: self.field.order(),
            });
        }
        self.main.push(vandermonde_row(&self.field, n as Symbol, self.params.k));
        self.aux.push(vec![0; self.params.k]);
        self.params.n += 1;
        self.aux_version += 1;
        Ok(NodeId(n + 1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegenCoefficients {
    pub failed: NodeId,
    pub helpers: Vec<NodeId>,
    pub a: Vec<Symbol>,
    pub b: Vec<Symbol>,
    pub delta: Vec<Symbol>,
    pub rho: Vec<Symbol>,
    /// Auxiliary vector the regenerated node ends up with.
    pub new_aux: Vec<Symbol>,
    aux_version: u64,
}

impl RegenCoefficients {
    /// `v = a_i s_0 + b_i s_1`, what helper `slot` sends.
    pub fn helper_symbol(&self, field: &Field, slot: usize, stored: &[Symbol]) -> Result<Symbol> {
        if stored.len() != 2 {
            return Err(Error::LengthMismatch {
                expected: 2,
                got: stored.len(),
            });
        }
        Ok(field.add(field.mul(self.a[slot], stored[0]), field.mul(self.b[slot], stored[1])))
    }

    /// `(Σ δ_i v_i, Σ ρ_i v_i)`.
    pub fn rebuild(&self, field: &Field, v: &[Symbol]) -> Result<[Symbol; 2]> {
        if v.len() != self.helpers.len() {
            return Err(Error::WrongNodeCount {
                expected: self.helpers.len(),
                got: v.len(),
            });
        }
        Ok([field.dot(&self.delta, v), field.dot(&self.rho, v)])
    }
}

/// Decoding recipe for one fixed set of `k` nodes.
#[derive(Debug, Clone)]
pub struct MsrDecoder {
    nodes: Vec<NodeId>,
    inverse: Matrix,
    aux: Vec<Vec<Symbol>>,
    field: Field,
}

impl MsrDecoder {
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Solve the first symbols for `f`, strip `f·u_i` from the second ones,
    /// then solve again for `g`.
    pub fn decode(&self, symbols: &[&[Symbol]]) -> Result<Vec<Symbol>> {
        if symbols.len() != self.nodes.len() {
            return Err(Error::WrongNodeCount {
                expected: self.nodes.len(),
                got: symbols.len(),
            });
        }
        if let Some(s) = symbols.iter().find(|s| s.len() != 2) {
            return Err(Error::LengthMismatch {
                expected: 2,
                got: s.len(),
            });
        }
        let first: Vec<Symbol> = symbols.iter().map(|s| s[0]).collect();
        let f = self.inverse.mul_vec(&first)?;
        let second: Vec<Symbol> = symbols
            .iter()
            .zip(&self.aux)
            .map(|(s, u)| self.field.sub(s[1], self.field.dot(&f, u)))
            .collect();
        let mut out = f;
        out.extend(self.inverse.mul_vec(&second)?);
        Ok(out)
    }
}
