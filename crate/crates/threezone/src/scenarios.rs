//! The seven built-in benchmark configurations, already in normal form,
//! together with the published Wronskian fixtures each of them pins.
//!
//! Naming: `scs`/`ccs`/`ccc` by configuration class, then a letter per
//! phase-portrait subcase (saddle/center placement and boundary object).

use crate::melnikov::BasisFunction;
use crate::model::{Side, ThreeZoneSystem, ZoneHamiltonian, ZonePerturbation};

/// Names of the built-in scenarios, in canonical order.
pub const NAMES: [&str; 7] = [
    "scs-a", "scs-b", "ccs-c", "ccs-d", "ccc-a", "ccc-b", "ccc-c",
];

/// One-line description per scenario.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "scs-a" => "two real saddles, distinct separatrix ordinates (homoclinic loop)",
        "scs-b" => "two real saddles, equal separatrix ordinates (heteroclinic orbit)",
        "ccs-c" => "virtual left center, real right saddle",
        "ccs-d" => "real left center, real right saddle",
        "ccc-a" => "virtual outer centers (unbounded annulus)",
        "ccc-b" => "real left center, virtual right center",
        "ccc-c" => "two real outer centers",
        _ => return None,
    })
}

fn zh(a: f64, b: f64, c: f64, alpha: f64, beta: f64) -> ZoneHamiltonian<f64> {
    ZoneHamiltonian::new(a, b, c, alpha, beta)
}

/// Builds a built-in scenario (zero perturbation, `epsilon = 0`).
pub fn builtin(name: &str) -> Option<ThreeZoneSystem<f64>> {
    let center = zh(0.0, 1.0, -1.0, 0.0, 0.0);
    let (left, right) = match name {
        "scs-a" => (zh(1.0, 1.0, 0.0, 1.0, 2.0), zh(0.0, 1.0, 1.0, 0.0, -2.0)),
        "scs-b" => (zh(1.0, 1.0, 0.0, 1.0, 1.0), zh(0.0, 1.0, 1.0, 0.0, -2.0)),
        "ccs-c" => (zh(1.0, 2.0, -1.0, 1.0, 1.0), zh(0.0, 1.0, 1.0, 0.0, -2.0)),
        "ccs-d" => (zh(1.0, 2.0, -1.0, 1.0, -2.0), zh(0.0, 1.0, 1.0, 0.0, -2.0)),
        "ccc-a" => (zh(1.0, 2.0, -1.0, 1.0, 1.0), zh(0.0, 1.0, -1.0, 0.0, 0.0)),
        "ccc-b" => (zh(1.0, 2.0, -1.0, 1.0, -3.0), zh(0.0, 1.0, -1.0, 0.0, 0.0)),
        "ccc-c" => (zh(1.0, 2.0, -1.0, 1.0, -3.0), zh(0.0, 1.0, -1.0, 0.0, 2.0)),
        _ => return None,
    };
    Some(ThreeZoneSystem::unperturbed(left, center, right))
}

/// How many simple zeros the benchmark's basis supports for the design
/// pipeline (the heteroclinic case collapses to a three-function basis).
pub fn zero_capacity(name: &str) -> Option<usize> {
    Some(match name {
        "scs-b" => 2,
        n if NAMES.contains(&n) => 3,
        _ => return None,
    })
}

/// A published Wronskian value with the exact function list that
/// reproduces it.
#[derive(Debug, Clone)]
pub struct PaperWronskian {
    pub basis: Vec<BasisFunction<f64>>,
    /// Evaluation point.
    pub at: f64,
    /// The printed value.
    pub value: f64,
    /// Half a unit in the last printed decimal place.
    pub tol: f64,
}

/// Published Wronskian fixture per scenario.
///
/// The printed values were produced with per-case conventions that do not
/// all agree with each other: `ccs-d` was evaluated with the left-center
/// function of its actual parameters (not the stale display copied from
/// the previous case) and with the column order `(fLC, fRS)`; `ccc-a`
/// carries the `b_L^2 = 4` normalization on its left function; `ccc-b`
/// and `ccc-c` drop that factor again and order the columns `(fLC, fRC)`.
/// Every function uses the principal arccos branch. The lists below
/// reproduce each printed value to half a unit in its last digit.
pub fn paper_wronskian(name: &str) -> Option<PaperWronskian> {
    use BasisFunction::{CenterArc, Fcc, Saddle, F0};
    let frs = Saddle { side: Side::Right, sigma: 1.0, scale: 1.0 };
    let fls = Saddle { side: Side::Left, sigma: 2.0, scale: 1.0 };
    let flc_wide = CenterArc { side: Side::Left, nu: 2.0, scale: 1.0 };
    let flc_narrow = CenterArc { side: Side::Left, nu: 1.0, scale: 1.0 };
    let flc_scaled = CenterArc { side: Side::Left, nu: 2.0, scale: 4.0 };
    let frc = CenterArc { side: Side::Right, nu: 1.0, scale: 1.0 };
    let (basis, at, value, tol) = match name {
        "scs-a" => (vec![F0, Fcc, frs, fls], 0.4, 9.16568, 5e-6),
        "scs-b" => (vec![F0, Fcc, frs], 0.4, -10.6955, 5e-5),
        "ccs-c" => (vec![F0, Fcc, frs, flc_wide], 0.4, 13.25, 5e-3),
        "ccs-d" => (vec![F0, Fcc, flc_narrow, frs], 0.2, -4.26846, 5e-6),
        "ccc-a" => (vec![F0, Fcc, frc, flc_scaled], 0.2, -2.92151, 5e-6),
        "ccc-b" => (vec![F0, Fcc, flc_wide, frc], 0.5, 7.2124, 5e-5),
        "ccc-c" => (vec![F0, Fcc, flc_wide, frc], 0.5, 7.2124, 5e-5),
        _ => return None,
    };
    Some(PaperWronskian { basis, at, value, tol })
}

/// Default design targets per scenario class.
pub fn default_targets(name: &str) -> Option<Vec<f64>> {
    Some(match name {
        "scs-b" => vec![0.2, 0.5],
        n if n.starts_with("ccc") => vec![0.5, 1.0, 2.0],
        n if NAMES.contains(&n) => vec![0.2, 0.5, 0.8],
        _ => return None,
    })
}

/// Convenience: a benchmark with a perturbation installed.
pub fn with_perturbation(
    name: &str,
    left: ZonePerturbation<f64>,
    center: ZonePerturbation<f64>,
    right: ZonePerturbation<f64>,
    epsilon: f64,
) -> Option<ThreeZoneSystem<f64>> {
    Some(builtin(name)?.with_perturbation(left, center, right, epsilon))
}
