//! Classical-capacity bounds for single-mode bosonic attenuators with arbitrary
//! environment states and for classical-noise channels with arbitrary phase-space
//! noise, together with the exact truncated-Fock machinery used to check them.
//!
//! Layout:
//!
//! - [`fock`]: density matrices in the number basis, beamsplitter and displacement
//!   operators, partial trace, entropies.
//! - [`gauss`]: the thermal entropy function `g`, its inverse, Gaussian moments.
//! - [`quadrature`]: Gauss–Hermite / Gauss–Legendre rules used for phase-space integrals.
//! - [`channels`]: attenuator and classical-noise appliers, analytic moment maps,
//!   coherent-state Holevo rates.
//! - [`bounds`]: closed-form upper/lower capacity bounds and gap bounds.
//! - [`verify`]: randomized checks of the entropy inequalities behind the bounds.
//!
//! All entropies are in nats. Conventions: `Q = (a + a†)/√2`, `P = (a − a†)/(i√2)`,
//! vacuum quadrature variance ½.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod channels;
mod error;
pub mod exec;
pub mod fock;
pub mod gauss;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
