//! Trajectory ensembles on a symmetric two-saddle potential energy surface
//! whose valley-ridge inflection (VRI) point can be moved along the reaction
//! axis without disturbing the critical points.
//!
//! The crate covers the surface itself ([`pes`]), Hamilton's equations with
//! fate classification ([`integrator`]), the two deterministic initial
//! condition families ([`ensembles`]), the numerical studies built on them
//! ([`experiments`]) and the configuration and file formats used by the
//! `vri` command line tool ([`config`], [`output`], [`run`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod linalg;
pub mod output;
pub mod pes;
pub mod quadrature;
pub mod roots;
pub mod run;
pub mod tolerances;

pub use error::{Error, Result};
pub use integrator::{Fate, IntegratorConfig, State, TrajectoryResult};
pub use pes::{Pes, PesSpec};
