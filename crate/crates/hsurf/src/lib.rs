//! Numerical machinery for the H-surface equation `Δv = 2 v_x ∧ v_y`.
//!
//! The crate is organised bottom-up:
//!
//! * [`bubble_core`] — the bubble family `R ∘ π(λ(ξ − a))`, rotations and
//!   their angle charts, wedge calculus, universal constants and pointwise
//!   identities.
//! * [`domain_green`] — Green's function, Robin function, the harmonic
//!   corrections `h₁, h₂, h₃`, the concentration function `H̃` and harmonic
//!   extension on the unit disk and on conformal images of it.
//! * [`annulus_robin`] — deck-transformation series for `H̃` and `2e^{2H}` on
//!   round annuli, radial scans and critical points.
//! * [`reduced_energy`] — boundary data, the one-bubble functional, pairwise
//!   interactions, the k-bubble functional `Σ` and its analytic gradient.
//! * [`direct_energy`] — a quadrature oracle for the full Euler functional,
//!   used to validate the reduced expansions by residual scaling.
//! * [`construction`] — the multi-sphere construction: the data `g_ω` and
//!   `G_{k,ω}`, the Hessian matrix `A_{ω,ε}`, boxes `T_μ`, a Newton search
//!   for critical points of `Σ` and a degree certificate.
//! * [`linearized_s2`] — Legendre recurrences, spherical harmonics and the
//!   linearized operator `Γ` on degree-n blocks; numerical kernel
//!   classification.
//! * [`cli`] — the command-line surface tying the modules together.
//!
//! Runnable walkthroughs live in the `examples/` directory of this crate.

pub mod annulus_robin;
pub mod bubble_core;
pub mod cli;
pub mod construction;
pub mod direct_energy;
pub mod domain_green;
pub mod error;
pub mod jet;
pub mod linearized_s2;
pub mod optimize;
pub mod quadrature;
pub mod reduced_energy;

pub use error::{Error, Result};
