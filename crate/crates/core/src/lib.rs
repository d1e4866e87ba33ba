//! Invariant and selective representations of signals under finite unitary
//! group actions.
//!
//! A signal is summarized by the laws of its one-dimensional projections
//! `⟨I, g·t⟩` over a group orbit, for a bank of random templates `t`. Any
//! statistic of those laws (CDF on a grid, truncated moments) is exactly
//! invariant to the group action, and with enough templates the summaries
//! separate distinct orbits.
//!
//! Modules:
//!
//! * [`groups`]: finite Abelian groups and permutation actions.
//! * [`pooling`]: pooling nonlinearities, CDF and moment summaries.
//! * [`representations`]: template banks, orbit projections, `represent`.
//! * [`metrics`]: KS and sliced orbit distances, concentration experiment.
//! * [`pog`]: partially observable (windowed) averages and covariance.
//! * [`hierarchy`]: distribution kernels and the two-layer construction.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod groups;
pub mod hierarchy;
pub mod linalg;
pub mod metrics;
pub mod pog;
pub mod pooling;
pub mod random;
pub mod representations;
pub mod signal;

pub use error::{Error, Result};
pub use groups::{make_cyclic_group, make_torus_group, FiniteGroup, GroupAction, GroupKind};
pub use pooling::{BinGrid, MomentVector, Nonlinearity};
pub use representations::{
    orbit_equivalent, project_orbit, represent, sample_templates, OrbitProjection, Pooling,
    RepMatrix, RepresentationConfig, TemplateBank,
};
pub use signal::Signal;
