//! MDS vector families: sets of length-`dim` vectors any `dim` of which are
//! linearly independent. MBR codes need `θ` of them in `F^B`; MSR codes use
//! an `n`-vector family in `F^k` for the main vectors.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec, Symbol};
use crate::linalg::{vandermonde_row, Matrix};
use crate::mbr::MbrCodeSpec;
use crate::node::NodeId;
use crate::subsets::combinations;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    Vandermonde,
    SingleParityCheck,
    Identity,
    Custom,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::Vandermonde => "vandermonde",
            Construction::SingleParityCheck => "single-parity-check",
            Construction::Identity => "identity",
            Construction::Custom => "custom",
        })
    }
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "vandermonde" => Construction::Vandermonde,
            "single-parity-check" => Construction::SingleParityCheck,
            "identity" => Construction::Identity,
            "custom" => Construction::Custom,
            other => return Err(Error::InvalidParameters(format!("unknown construction {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorFamily {
    dim: usize,
    vectors: Vec<Vec<Symbol>>,
    construction: Construction,
    field: Field,
}

impl VectorFamily {
    /// Vector `i` is `(1, x_i, ..., x_i^(dim-1))` with `x_i = i`, the i-th
    /// field element in integer order.
    pub fn vandermonde(field: &Field, count: usize, dim: usize) -> Result<Self> {
        if (field.order() as usize) < count {
            return Err(Error::FieldTooSmall {
                need: count,
                have: field.order(),
            });
        }
        let vectors = (0..count).map(|i| vandermonde_row(field, i as Symbol, dim)).collect();
        Ok(Self {
            dim,
            vectors,
            construction: Construction::Vandermonde,
            field: field.clone(),
        })
    }

    pub fn identity(field: &Field, dim: usize) -> Self {
        let vectors = (0..dim)
            .map(|i| {
                let mut v = vec![0; dim];
                v[i] = 1;
                v
            })
            .collect();
        Self {
            dim,
            vectors,
            construction: Construction::Identity,
            field: field.clone(),
        }
    }

    /// The standard basis followed by the all-ones vector. MDS over any field.
    pub fn single_parity_check(field: &Field, dim: usize) -> Self {
        let mut family = Self::identity(field, dim);
        family.vectors.push(vec![1; dim]);
        family.construction = Construction::SingleParityCheck;
        family
    }

    pub fn custom(field: &Field, dim: usize, vectors: Vec<Vec<Symbol>>) -> Result<Self> {
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
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
        Ok(Self {
            dim,
            vectors,
            construction: Construction::Custom,
            field: field.clone(),
        })
    }

    /// Rebuilds a tagged family from its parameters. Custom families carry
    /// raw vectors and cannot be rebuilt this way.
    pub fn from_construction(construction: Construction, field: &Field, count: usize, dim: usize) -> Result<Self> {
        let family = match construction {
            Construction::Vandermonde => Self::vandermonde(field, count, dim)?,
            Construction::Identity => Self::identity(field, dim),
            Construction::SingleParityCheck => Self::single_parity_check(field, dim),
            Construction::Custom => {
                return Err(Error::InvalidParameters("custom families need explicit vectors".into()))
            }
        };
        if family.count() != count {
            return Err(Error::InvalidParameters(format!(
                "{construction} family of dimension {dim} has {} vectors, not {count}",
                family.count()
            )));
        }
        Ok(family)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<Symbol>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[Symbol] {
        &self.vectors[i]
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Applies `v -> T v` to every vector. The result is tagged custom.
    pub fn transform(&self, t: &Matrix) -> Result<Self> {
        let vectors = self.vectors.iter().map(|v| t.mul_vec(v)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: self.dim,
            vectors,
            construction: Construction::Custom,
            field: self.field.clone(),
        })
    }
}

/// `count` vectors in `F^dim` with every `dim`-subset independent.
///
/// `count == dim` gives the identity family and `count == dim + 1` the
/// single-parity-check family, both valid over any field including GF(2).
/// Otherwise a Vandermonde family, which needs `q >= count`.
pub fn make_mds(count: usize, dim: usize, field: &Field) -> Result<VectorFamily> {
    if dim == 0 || count < dim {
        return Err(Error::InvalidParameters(format!(
            "an MDS family needs count >= dim >= 1 (count={count}, dim={dim})"
        )));
    }
    if count == dim {
        Ok(VectorFamily::identity(field, dim))
    } else if count == dim + 1 {
        Ok(VectorFamily::single_parity_check(field, dim))
    } else {
        VectorFamily::vandermonde(field, count, dim)
    }
}

/// The smallest field over which [`make_mds`] succeeds for these sizes.
pub fn select_field(count: usize, dim: usize) -> Result<FieldSpec> {
    if count <= dim + 1 {
        FieldSpec::gf2(1)
    } else {
        FieldSpec::smallest_with_order(count)
    }
}

/// True iff every `k`-subset of the family has rank `k`.
pub fn verify_mds(family: &VectorFamily, k: usize) -> bool {
    if k > family.dim() || k > family.count() {
        return false;
    }
    combinations(family.count(), k).all(|subset| {
        let rows: Vec<&[Symbol]> = subset.iter().map(|&i| family.vector(i)).collect();
        Matrix::from_rows(family.field(), family.dim(), &rows)
            .map(|m| m.rank() == k)
            .unwrap_or(false)
    })
}

/// Changes basis so that the chosen `k` nodes store the source uncoded.
///
/// The `B` distinct edges of the chosen nodes, in ascending column order,
/// are mapped to the standard basis vectors `e_0, ..., e_{B-1}`; every other
/// vector undergoes the same invertible transform, so reconstruction and
/// exact regeneration carry over unchanged.
pub fn systematize(spec: &MbrCodeSpec, nodes: &[NodeId]) -> Result<MbrCodeSpec> {
    let params = spec.params();
    if nodes.len() != params.k {
        return Err(Error::WrongNodeCount {
            expected: params.k,
            got: nodes.len(),
        });
    }
    let edges = spec.distinct_edges(nodes)?;
    let field = spec.field();
    let b = params.b;
    // columns of `m` are the chosen vectors; T = m^-1 sends them to e_j
    let chosen: Vec<&[Symbol]> = edges.iter().map(|&e| spec.family().vector(e)).collect();
    let m = Matrix::from_rows(field, b, &chosen)?.transpose();
    let rank = m.rank();
    if edges.len() != b || rank != b {
        return Err(Error::RankDeficient { rank, needed: b });
    }
    let t = m.invert()?;
    MbrCodeSpec::with_family(params.n, params.k, spec.family().transform(&t)?)
}
