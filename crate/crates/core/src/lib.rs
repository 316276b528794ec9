//! Exact computations on metrics on the double `X ⊔ X'` of a finite metric space.
//!
//! Elements are double metrics over a shared base, multiplied by the min-plus
//! product of their cross blocks. Coarse questions (does one metric control
//! another, are two metrics coarsely equivalent) are decided on nested
//! truncations of an unbounded prototype space and always come back with a
//! certificate: a verified homeomorphism, a divergent witness, or an explicit
//! `Inconclusive`.
//!
//! The crate is `no_std` + `alloc` without the `std` feature; `parallel`
//! (default) spreads the kernels over rayon.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dist;
pub mod double;
pub mod dsl;
pub mod error;
pub mod fundamental;
pub mod metric;
pub mod order;
pub mod sample;
pub mod space;
pub mod tropical;

pub use dist::{Dist, DistMatrix, MAX_QUANTA};
pub use double::{assemble_double, make_catalog_double, transpose, CatalogKind, DoubleMetric};
pub use error::{ComposeError, DoubleError, FundamentalError, MetricError, OrderError, ShapeError, SpaceError};
pub use metric::{metric_closure, validate_metric, FiniteMetric};
pub use order::{
    build_homeomorphism, check_controls, check_equivalent, is_idempotent, CheckParams, Homeomorphism, Ladder,
    MetricFamily, PairFunction, Verdict, Witness,
};
pub use space::{generate_space, SpaceKind};
pub use tropical::{compose, compose_chain, ComposeOptions};
