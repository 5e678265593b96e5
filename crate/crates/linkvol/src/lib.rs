//! Generalized octahedral potential of an oriented link diagram.
//!
//! Pipeline: PD code → [`diagram::LinkDiagram`] → SL(2,ℂ)
//! [`representation::Representation`] → region coloring → solution
//! `(w, m)` of the critical equations → corrected potential `W0`, whose
//! imaginary part is the volume and whose negated real part is the
//! Chern–Simons invariant modulo π².

pub mod cli;
pub mod coloring;
pub mod diagram;
pub mod engine;
pub mod numerics;
pub mod potential;
pub mod representation;

pub use numerics::C64;
