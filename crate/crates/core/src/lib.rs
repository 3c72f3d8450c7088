//! Exact regenerating codes for distributed storage.
//!
//! * [`mbr`]: the minimum-bandwidth code with `d = n - 1`, built on the
//!   complete graph `K_n`; every repair reproduces the lost node exactly by
//!   downloading one symbol from each survivor.
//! * [`msr`]: the minimum-storage code with `d = k + 1` (two symbols per
//!   node), repairable from any `k + 1` survivors.
//! * [`verify`]: subspace checks that certify whether an arbitrary linear
//!   storage code is an exact regenerating code at the MBR point.
//!
//! The crate is `no_std` and only needs `alloc`. File handling, the cluster
//! simulator and the command line live in the companion `regen` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod field;
pub mod linalg;
pub mod mbr;
pub mod mds;
pub mod msr;
pub mod node;
pub mod subsets;
pub mod verify;

pub use error::{Error, Result};
pub use field::{Field, FieldElement, FieldKind, FieldSpec, Symbol};
pub use linalg::{Matrix, Solution, Subspace};
pub use mbr::{IncidenceMatrix, MbrCodeSpec, MbrDecoder, MbrParams};
pub use mds::{Construction, VectorFamily};
pub use msr::{AuxInit, MsrCodeSpec, MsrDecoder, MsrParams, RegenCoefficients};
pub use node::{HelperContribution, NodeId, NodeState, RepairTranscript};
pub use verify::LinearStorageCode;
