//! Numerical geometry of the Calabi ALE metric and of gluing it into a
//! Kähler–Einstein orbifold point.
//!
//! - [`tensor_core`]: chart metrics, finite-difference curvature, tensor fields.
//! - [`calabi`]: the Calabi metric, its potential and its adapted charts.
//! - [`deform_ops`]: the trace-free deformation `o`, the form `Ω` and the
//!   linearised Einstein operator.
//! - [`obstruction`]: curvature data at the orbifold point, sphere moments and
//!   the obstruction integral with its closed form.
//! - [`indicial`]: indicial roots of the model operators on the cone.
//! - [`gluing`]: the refined neck metric and its residual sweep.
//! - [`suites`], [`report`], [`cli`]: the check suites behind the command-line
//!   tool and their deterministic reports.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calabi;
pub mod cli;
pub mod deform_ops;
pub mod error;
pub mod fit;
pub mod gluing;
pub mod indicial;
pub mod obstruction;
pub mod report;
pub mod suites;
pub mod tensor_core;
