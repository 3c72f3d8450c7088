//! Storage-cluster simulator, on-disk formats and command line for the
//! regenerating codes in `regen-core`.

pub mod cli;
pub mod cluster;
pub mod codefile;
pub mod error;
pub mod manifest;
pub mod packing;
pub mod persist;
pub mod trial;

pub use cluster::{Cluster, Code, CodeConfig, Event, Explicit, HelperPolicy, LowestIds};
pub use error::{Result, SimError};
pub use manifest::{CodeKind, Manifest};
pub use trial::{run_trial, FailureModel, Metrics, TrialConfig};
