//! Dynamical Casimir effect in a cavity optomechanical system: dressed-basis
//! spectra, a non-secular thermal master equation and the observables built on it.

pub mod bosonics;
pub mod dressed_me;
pub mod error;
pub mod evolve;
pub mod linalg;
pub mod model;
pub mod observables;

pub use bosonics::{FockDims, OperatorMatrix};
pub use dressed_me::{DensityMatrix, DressedJumpSet, Liouvillian};
pub use error::{Error, Result};
pub use evolve::{CorrelationRecord, PropagationOptions, SpectrumRecord, Trajectory};
pub use linalg::C64;
pub use model::{CrossingRecord, EigenSystem, SweepResult, SystemParams};
pub use observables::{ModeObservables, ObservableRecord};
