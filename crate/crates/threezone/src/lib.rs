//! Limit-cycle analysis for planar piecewise-linear Hamiltonian systems
//! with three zones separated by the vertical lines `x = -1` and `x = 1`.
//!
//! Each zone carries a quadratic Hamiltonian (a linear vector field) plus an
//! optional small linear perturbation. When the central zone has a real
//! center and the outer zones have centers or saddles, the unperturbed
//! system owns a periodic annulus crossing all three zones. This crate
//! computes the first-order Melnikov function of that annulus in closed
//! form, cross-checks it with an adaptive-quadrature oracle, counts and
//! places its zeros, and validates each predicted limit cycle by direct
//! event-driven integration of the perturbed system.
//!
//! The main entry points are:
//!
//! - [`model`]: system types, zone classification, hypothesis checks;
//! - [`normal_form`]: reduction to the canonical frame where the central
//!   Hamiltonian is `(x^2 + y^2)/2`;
//! - [`unperturbed`]: annulus geometry, crossing points, closed-form arcs;
//! - [`melnikov`]: basis functions, coefficients, and the quadrature oracle;
//! - [`analysis`]: Wronskian independence tests, zero isolation, inverse
//!   design of perturbations with prescribed zeros;
//! - [`integrator`]: event-driven Runge-Kutta integration, Poincaré samples
//!   and limit-cycle certificates;
//! - [`scenarios`]: the seven built-in benchmark configurations.
//!
//! All numerics are generic over the scalar type through [`Real`];
//! `f64` aliases are exported at the crate root.

pub mod analysis;
pub mod error;
pub mod integrator;
pub mod melnikov;
pub mod model;
pub mod normal_form;
pub mod numerics;
pub mod scenarios;
pub mod unperturbed;

use std::fmt;

use num_traits::{Float, FromPrimitive};

pub use error::Error;
pub use model::{
    Point, Side, SystemClass, ThreeZoneSystem, ZoneHamiltonian, ZoneKind, ZonePerturbation,
};

/// Scalar type the whole crate is generic over: `f32`, `f64`, or any other
/// IEEE-like float exposing the usual transcendental functions.
pub trait Real:
    Float + FromPrimitive + fmt::Debug + fmt::Display + fmt::LowerExp + 'static
{
}
impl<T> Real for T where
    T: Float + FromPrimitive + fmt::Debug + fmt::Display + fmt::LowerExp + 'static
{
}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub(crate) fn lit<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("scalar type must represent f64 literals")
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Concrete `f64` aliases for the common types.
pub type System64 = ThreeZoneSystem<f64>;
pub type Zone64 = ZoneHamiltonian<f64>;
pub type Perturbation64 = ZonePerturbation<f64>;
pub type Point64 = Point<f64>;
pub type MelnikovForm64 = melnikov::MelnikovForm<f64>;
pub type AnnulusInterval64 = unperturbed::AnnulusInterval<f64>;
