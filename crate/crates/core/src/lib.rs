//! Continuous-time unit commitment with frequency-security constraints.
//!
//! Generator output, reserve, demand and renewable infeed are represented as
//! cubic Bernstein polynomials on hourly segments. The scheduling problem is
//! encoded as a MILP over the Bernstein coefficients, so bounds that hold on
//! the coefficients hold for the whole continuous trajectory.
//!
//! Modules, bottom-up:
//!
//! - [`bernstein`]: segment algebra and constrained least-squares fitting.
//! - [`sysmodel`]: case data, case-file ingestion, profile approximation.
//! - [`milp`]: solver-agnostic model, MPS export, solver backends.
//! - [`cuc`]: the unit-commitment model builder and schedule extraction.
//! - [`freq`]: RoCoF / quasi-steady-state / nadir constraints and the nadir
//!   evaluators (closed form, per-coefficient approximation, ODE oracle).
//! - [`nadirlearn`]: synthetic operating-point dataset and the linear nadir
//!   surrogate.
//! - [`cli`]: the solve / train / evaluate pipeline used by the `cfcuc` binary.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod bernstein;
pub mod cli;
pub mod cuc;
pub mod desk;
pub mod error;
pub mod freq;
pub mod milp;
pub mod nadirlearn;
pub mod sysmodel;

pub use error::{Error, Result};
