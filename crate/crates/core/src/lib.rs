//! Routing games on directed multigraphs, their associated resistor networks,
//! and local effective-resistance bounds for single-link network design.
//!
//! The crate is organized around one pipeline:
//!
//! 1. [`net`] — directed multigraphs with a single origin/destination pair,
//!    pruning, incidence structures and series-parallel recognition.
//! 2. [`wardrop`] — Wardrop equilibria of affine and general routing games,
//!    KKT multipliers and social cost.
//! 3. [`resistor`] — the associated resistor network of a game, voltages,
//!    currents, effective resistances and random-walk Green's functions.
//! 4. [`localres`] — cutting/shorting constructions that bound the effective
//!    resistance of a link using only the network within hop distance `d`.
//! 5. [`walks`] — hitting-probability diagnostics that control the bound gap.
//! 6. [`ndp`] — the single-link design problem: closed-form cost gains,
//!    error bounds, and the full scan-and-optimize procedure.
//! 7. [`generators`] — grids, rings, double trees and seeded random corpora.
//!
//! All numeric work is in `f64`. Linear systems are symmetric positive
//! definite reductions of graph Laplacians; see [`linalg`] for the solver
//! policy (sparse LDL^T below [`linalg::DIRECT_NODE_LIMIT`] unknowns,
//! preconditioned conjugate gradients above).

pub mod error;
pub mod generators;
pub mod linalg;
pub mod localres;
pub mod ndp;
pub mod net;
pub mod resistor;
pub mod walks;
pub mod wardrop;

pub use error::{Error, Result};
pub use net::DirectedNetwork;
pub use resistor::ResistorNet;
pub use wardrop::{AffineGame, Equilibrium, GeneralGame};

/// Relative tolerance for classifying an equilibrium flow as zero.
///
/// Scaled by the throughput `m`, so the classification is invariant under
/// rescaling all flows.
pub const SUPPORT_REL_TOL: f64 = 1e-8;

/// Target relative residual for iterative linear solves.
pub const ITERATIVE_REL_RESIDUAL: f64 = 1e-10;
