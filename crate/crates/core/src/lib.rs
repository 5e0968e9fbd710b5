//! Bound-state energies, critical couplings and wavefunctions of
//! one-dimensional potentials by Wronskian quantization.
//!
//! The canonical pair `C`, `S` is integrated outward from a matching point
//! ([`integrator`]); Wronskians against the convergent asymptotic tails
//! ([`wronskian`]) vanish exactly at the bound-state energies, which
//! [`solver`] brackets and refines.

// `!(a < b)` is used deliberately so that NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod export;
pub mod integrator;
pub mod potential;
pub mod solver;
pub mod wronskian;

pub use integrator::{integrate_pair, Grid, IntegrationError, PairNode, SolutionPair};
pub use potential::{
    builtin, nondimensionalize, parse_potential, tail_cut, Params, Parity, PhysicalScales,
    Potential, PotentialError, TailCut,
};
pub use wronskian::{asymptotic_basis, AsymptoticBasis, Side, TailMode, WronskianError};
