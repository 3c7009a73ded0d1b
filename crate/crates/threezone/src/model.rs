//! Core data types for three-zone piecewise-linear Hamiltonian systems,
//! zone classification and verification of the standing hypotheses.
//!
//! The plane is split by the vertical lines `x = -1` and `x = 1` into a
//! left, central and right zone. Each zone carries the quadratic
//! Hamiltonian
//!
//! ```text
//! H(x, y) = b/2 y^2 - c/2 x^2 + a xy + alpha y - beta x
//! ```
//!
//! together with a linear perturbation `(f, g) = (p x + q y + r,
//! s x + u y + v)`; the perturbed field is `(H_y + eps f, -H_x + eps g)`.

use crate::error::{Error, Hypothesis};
use crate::{lit, Real, Result};

/// Absolute tolerance below which `a^2 + b c` counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Tolerance for locating an equilibrium exactly on a switching line.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Tolerance for the tangent-point coincidence checks of hypothesis H2.
pub const TANGENCY_MATCH_TOL: f64 = 1e-10;

/// A point of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<R> {
    pub x: R,
    pub y: R,
}

impl<R: Real> Point<R> {
    pub fn new(x: R, y: R) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point<R>) -> R {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Which zone (or switching line side) an object belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Center,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Center => "center",
            Side::Right => "right",
        }
    }
}

/// Quadratic Hamiltonian coefficients of one zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneHamiltonian<R> {
    /// xy coefficient.
    pub a: R,
    /// y^2/2 coefficient.
    pub b: R,
    /// -x^2/2 coefficient.
    pub c: R,
    /// y coefficient.
    pub alpha: R,
    /// -x coefficient.
    pub beta: R,
}

impl<R: Real> ZoneHamiltonian<R> {
    pub fn new(a: R, b: R, c: R, alpha: R, beta: R) -> Self {
        ZoneHamiltonian { a, b, c, alpha, beta }
    }

    /// `a^2 + b c`; negative for centers, positive for saddles.
    pub fn discriminant(&self) -> R {
        self.a * self.a + self.b * self.c
    }

    /// Rotation/hyperbolic rate `sqrt(|a^2 + b c|)`.
    pub fn omega(&self) -> R {
        self.discriminant().abs().sqrt()
    }

    pub fn hamiltonian(&self, p: Point<R>) -> R {
        let half = lit::<R>(0.5);
        self.b * half * p.y * p.y - self.c * half * p.x * p.x
            + self.a * p.x * p.y
            + self.alpha * p.y
            - self.beta * p.x
    }

    /// Unperturbed field `(H_y, -H_x)`.
    pub fn field(&self, p: Point<R>) -> (R, R) {
        (
            self.b * p.y + self.a * p.x + self.alpha,
            self.c * p.x - self.a * p.y + self.beta,
        )
    }

    /// Equilibrium of the zone field; `None` when degenerate.
    pub fn equilibrium(&self) -> Option<Point<R>> {
        let d = self.discriminant();
        if d.abs() <= lit(DEGENERACY_TOL) {
            return None;
        }
        let x = -(self.a * self.alpha + self.b * self.beta) / d;
        let y = -(self.a * x + self.alpha) / self.b;
        Some(Point::new(x, y))
    }
}

/// Linear perturbation coefficients of one zone:
/// `f = p x + q y + r`, `g = s x + u y + v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZonePerturbation<R> {
    pub p: R,
    pub q: R,
    pub r: R,
    pub s: R,
    pub u: R,
    pub v: R,
}

impl<R: Real> ZonePerturbation<R> {
    pub fn new(p: R, q: R, r: R, s: R, u: R, v: R) -> Self {
        ZonePerturbation { p, q, r, s, u, v }
    }

    pub fn zero() -> Self {
        let z = R::zero();
        ZonePerturbation::new(z, z, z, z, z, z)
    }

    pub fn f(&self, p: Point<R>) -> R {
        self.p * p.x + self.q * p.y + self.r
    }

    pub fn g(&self, p: Point<R>) -> R {
        self.s * p.x + self.u * p.y + self.v
    }

    pub fn scale(&self, lambda: R) -> Self {
        ZonePerturbation::new(
            self.p * lambda,
            self.q * lambda,
            self.r * lambda,
            self.s * lambda,
            self.u * lambda,
            self.v * lambda,
        )
    }
}

/// The full three-zone system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeZoneSystem<R> {
    pub left: ZoneHamiltonian<R>,
    pub center: ZoneHamiltonian<R>,
    pub right: ZoneHamiltonian<R>,
    pub left_pert: ZonePerturbation<R>,
    pub center_pert: ZonePerturbation<R>,
    pub right_pert: ZonePerturbation<R>,
    pub epsilon: R,
}

impl<R: Real> ThreeZoneSystem<R> {
    /// Builds a system, validating `epsilon` and coefficient finiteness.
    pub fn new(
        left: ZoneHamiltonian<R>,
        center: ZoneHamiltonian<R>,
        right: ZoneHamiltonian<R>,
        left_pert: ZonePerturbation<R>,
        center_pert: ZonePerturbation<R>,
        right_pert: ZonePerturbation<R>,
        epsilon: R,
    ) -> Result<Self> {
        if !(epsilon >= R::zero() && epsilon < R::one()) {
            return Err(Error::InvalidInput(format!(
                "epsilon must lie in [0, 1), got {epsilon}"
            )));
        }
        let all_finite = [&left, &center, &right].iter().all(|z| {
            z.a.is_finite()
                && z.b.is_finite()
                && z.c.is_finite()
                && z.alpha.is_finite()
                && z.beta.is_finite()
        }) && [&left_pert, &center_pert, &right_pert].iter().all(|w| {
            w.p.is_finite()
                && w.q.is_finite()
                && w.r.is_finite()
                && w.s.is_finite()
                && w.u.is_finite()
                && w.v.is_finite()
        });
        if !all_finite {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(ThreeZoneSystem {
            left,
            center,
            right,
            left_pert,
            center_pert,
            right_pert,
            epsilon,
        })
    }

    /// Unperturbed system with the same Hamiltonian blocks.
    pub fn unperturbed(sys_left: ZoneHamiltonian<R>, center: ZoneHamiltonian<R>, right: ZoneHamiltonian<R>) -> Self {
        ThreeZoneSystem {
            left: sys_left,
            center,
            right,
            left_pert: ZonePerturbation::zero(),
            center_pert: ZonePerturbation::zero(),
            right_pert: ZonePerturbation::zero(),
            epsilon: R::zero(),
        }
    }

    pub fn zone(&self, side: Side) -> &ZoneHamiltonian<R> {
        match side {
            Side::Left => &self.left,
            Side::Center => &self.center,
            Side::Right => &self.right,
        }
    }

    pub fn perturbation(&self, side: Side) -> &ZonePerturbation<R> {
        match side {
            Side::Left => &self.left_pert,
            Side::Center => &self.center_pert,
            Side::Right => &self.right_pert,
        }
    }

    /// Zone owning the open region containing `x` (center on the lines).
    pub fn side_of(&self, x: R) -> Side {
        if x < -R::one() {
            Side::Left
        } else if x > R::one() {
            Side::Right
        } else {
            Side::Center
        }
    }

    /// Perturbed field of the given zone.
    pub fn perturbed_field(&self, side: Side, p: Point<R>) -> (R, R) {
        let (hx, hy) = self.zone(side).field(p);
        let w = self.perturbation(side);
        (hx + self.epsilon * w.f(p), hy + self.epsilon * w.g(p))
    }

    /// Replaces all perturbations, keeping the Hamiltonian blocks.
    pub fn with_perturbation(
        &self,
        left: ZonePerturbation<R>,
        center: ZonePerturbation<R>,
        right: ZonePerturbation<R>,
        epsilon: R,
    ) -> Self {
        ThreeZoneSystem {
            left_pert: left,
            center_pert: center,
            right_pert: right,
            epsilon,
            ..*self
        }
    }
}

/// Focus-free equilibrium type of a linear Hamiltonian zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Center,
    Saddle,
}

/// Location of a zone equilibrium relative to its own zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Real,
    Virtual,
    Boundary,
}

/// Classification of one zone: equilibrium type, its location, and the
/// point itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneKind<R> {
    pub kind: EquilibriumKind,
    pub location: Location,
    pub equilibrium: Point<R>,
}

/// The three-letter configuration class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    Scs,
    Ccs,
    Ccc,
}

impl ClassKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassKind::Scs => "SCS",
            ClassKind::Ccs => "CCS",
            ClassKind::Ccc => "CCC",
        }
    }
}

/// Configuration class plus the orientation flag: `reflected` records that
/// the canonical form (binding saddle or separatrix on the right) requires
/// the y-axis reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemClass {
    pub kind: ClassKind,
    pub reflected: bool,
}

/// Outcome of the hypothesis verification; failures are listed in
/// `details` rather than raised as errors.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub h1: bool,
    pub h2: bool,
    pub h3: bool,
    pub details: Vec<String>,
}

impl HypothesisReport {
    pub fn all(&self) -> bool {
        self.h1 && self.h2 && self.h3
    }
}

/// Classifies one zone: center/saddle by the sign of `a^2 + b c`, and
/// real/virtual/boundary by the equilibrium position against the zone's
/// half-plane (the central zone uses the strip `-1 < x < 1`).
pub fn classify_zone<R: Real>(z: &ZoneHamiltonian<R>, side: Side) -> Result<ZoneKind<R>> {
    let d = z.discriminant();
    if d.abs() <= lit(DEGENERACY_TOL) {
        return Err(Error::DegenerateZone {
            side: side.name(),
            disc: d.to_f64().unwrap_or(f64::NAN),
        });
    }
    let kind = if d < R::zero() {
        EquilibriumKind::Center
    } else {
        EquilibriumKind::Saddle
    };
    let eq = z.equilibrium().expect("non-degenerate zone has an equilibrium");
    let tol = lit::<R>(BOUNDARY_TOL);
    let one = R::one();
    let location = match side {
        Side::Left => {
            if (eq.x + one).abs() <= tol {
                Location::Boundary
            } else if eq.x < -one {
                Location::Real
            } else {
                Location::Virtual
            }
        }
        Side::Right => {
            if (eq.x - one).abs() <= tol {
                Location::Boundary
            } else if eq.x > one {
                Location::Real
            } else {
                Location::Virtual
            }
        }
        Side::Center => {
            if (eq.x - one).abs() <= tol || (eq.x + one).abs() <= tol {
                Location::Boundary
            } else if eq.x > -one && eq.x < one {
                Location::Real
            } else {
                Location::Virtual
            }
        }
    };
    Ok(ZoneKind { kind, location, equilibrium: eq })
}

/// The four tangent points of the unperturbed system with the switching
/// lines: `P1, P2` on `x = 1` and `P3, P4` on `x = -1`. A zone field is
/// tangent to `x = l` where `H_y(l, y) = 0`, so the ordinates carry the
/// zone's own `alpha`; with the central equilibrium translated to the
/// origin (`alpha_C = 0`) they reduce to `∓a_C/b_C` on the center side.
pub fn tangent_points<R: Real>(sys: &ThreeZoneSystem<R>) -> Result<[Point<R>; 4]> {
    for (side, z) in [
        (Side::Left, &sys.left),
        (Side::Center, &sys.center),
        (Side::Right, &sys.right),
    ] {
        if z.b == R::zero() {
            return Err(Error::DegenerateZone { side: side.name(), disc: 0.0 });
        }
    }
    let one = R::one();
    let p1 = Point::new(one, -(sys.center.a + sys.center.alpha) / sys.center.b);
    let p2 = Point::new(one, -(sys.right.a + sys.right.alpha) / sys.right.b);
    let p3 = Point::new(-one, (sys.center.a - sys.center.alpha) / sys.center.b);
    let p4 = Point::new(-one, (sys.left.a - sys.left.alpha) / sys.left.b);
    Ok([p1, p2, p3, p4])
}

/// Classifies the full system into SCS / CCS / CCC with the orientation
/// flag. Errors when the central subsystem is not a real center.
pub fn classify_system<R: Real>(sys: &ThreeZoneSystem<R>) -> Result<SystemClass> {
    let center = classify_zone(&sys.center, Side::Center)?;
    if center.kind != EquilibriumKind::Center || center.location != Location::Real {
        return Err(Error::HypothesisViolation {
            which: Hypothesis::H1,
            detail: format!(
                "central subsystem must be a real center, found {:?}/{:?}",
                center.kind, center.location
            ),
        });
    }
    let left = classify_zone(&sys.left, Side::Left)?;
    let right = classify_zone(&sys.right, Side::Right)?;
    use EquilibriumKind::*;
    let (kind, reflected) = match (left.kind, right.kind) {
        (Saddle, Saddle) => {
            // binding side = smaller separatrix ordinate, compared in the
            // normal-form frame
            let nf = crate::normal_form::to_normal_form(sys)?;
            let sr = crate::unperturbed::saddle_ordinate(&nf.system, Side::Right)?;
            let sl = crate::unperturbed::saddle_ordinate(&nf.system, Side::Left)?;
            (ClassKind::Scs, sl < sr - lit(TANGENCY_MATCH_TOL))
        }
        (Center, Saddle) => (ClassKind::Ccs, false),
        (Saddle, Center) => (ClassKind::Ccs, true),
        (Center, Center) => (ClassKind::Ccc, false),
    };
    Ok(SystemClass { kind, reflected })
}

/// Verifies hypotheses (H1)-(H3). Failures never error; they are recorded
/// in the report.
pub fn check_hypotheses<R: Real>(sys: &ThreeZoneSystem<R>) -> HypothesisReport {
    let mut details = Vec::new();

    // H1: real center in the middle, centers or saddles outside, no
    // boundary equilibria anywhere.
    let mut h1 = true;
    match classify_zone(&sys.center, Side::Center) {
        Ok(k) if k.kind == EquilibriumKind::Center && k.location == Location::Real => {}
        Ok(k) => {
            h1 = false;
            details.push(format!(
                "H1: central subsystem is {:?}/{:?}, needs a real center",
                k.kind, k.location
            ));
        }
        Err(e) => {
            h1 = false;
            details.push(format!("H1: {e}"));
        }
    }
    for (side, z) in [(Side::Left, &sys.left), (Side::Right, &sys.right)] {
        match classify_zone(z, side) {
            Ok(k) if k.location == Location::Boundary => {
                h1 = false;
                details.push(format!(
                    "H1: {} equilibrium sits on a switching line",
                    side.name()
                ));
            }
            Ok(_) => {}
            Err(e) => {
                h1 = false;
                details.push(format!("H1: {e}"));
            }
        }
    }

    // H2: transversality signs plus coincidence of the tangent points.
    let mut h2 = true;
    if sys.left.b * sys.center.b <= R::zero() {
        h2 = false;
        details.push("H2: b_L * b_C <= 0 creates sliding segments on x = -1".into());
    }
    if sys.right.b * sys.center.b <= R::zero() {
        h2 = false;
        details.push("H2: b_R * b_C <= 0 creates sliding segments on x = 1".into());
    }
    match tangent_points(sys) {
        Ok([p1, p2, p3, p4]) => {
            let tol = lit::<R>(TANGENCY_MATCH_TOL);
            if (p1.y - p2.y).abs() > tol {
                h2 = false;
                details.push(format!(
                    "H2: tangent points on x = 1 differ (y = {} vs {})",
                    p1.y, p2.y
                ));
            }
            if (p3.y - p4.y).abs() > tol {
                h2 = false;
                details.push(format!(
                    "H2: tangent points on x = -1 differ (y = {} vs {})",
                    p3.y, p4.y
                ));
            }
        }
        Err(e) => {
            h2 = false;
            details.push(format!("H2: {e}"));
        }
    }

    // H3: a probe orbit must close through the four crossing points with
    // clockwise orientation; delegated to the annulus construction.
    let mut h3 = h1 && h2;
    if h3 {
        match crate::normal_form::to_normal_form(sys) {
            Ok(nf) => match crate::unperturbed::annulus_interval(&nf.system) {
                Ok(interval) => {
                    let probe = if interval.upper.is_finite() {
                        interval.upper * lit(0.5)
                    } else {
                        R::one()
                    };
                    match crate::unperturbed::orbit_arcs(&nf.system, probe) {
                        Ok(_) => {}
                        Err(e) => {
                            h3 = false;
                            details.push(format!("H3: probe orbit failed: {e}"));
                        }
                    }
                }
                Err(e) => {
                    h3 = false;
                    details.push(format!("H3: no crossing annulus: {e}"));
                }
            },
            Err(e) => {
                h3 = false;
                details.push(format!("H3: normal form unavailable: {e}"));
            }
        }
    } else {
        details.push("H3: not evaluated (H1/H2 already fail)".into());
    }

    HypothesisReport { h1, h2, h3, details }
}

/// The y-axis reflection `(x, y) -> (-x, -y)` with the left and right
/// zones exchanged. It preserves the switching lines and the clockwise
/// orientation; on coefficients it acts as `(a, b, c, alpha, beta) ->
/// (a, b, c, -alpha, -beta)` and `(p, q, r, s, u, v) -> (p, q, -r, s, u,
/// -v)` on the exchanged zones.
pub fn reflect<R: Real>(sys: &ThreeZoneSystem<R>) -> ThreeZoneSystem<R> {
    let flip_h = |z: &ZoneHamiltonian<R>| ZoneHamiltonian::new(z.a, z.b, z.c, -z.alpha, -z.beta);
    let flip_p =
        |w: &ZonePerturbation<R>| ZonePerturbation::new(w.p, w.q, -w.r, w.s, w.u, -w.v);
    ThreeZoneSystem {
        left: flip_h(&sys.right),
        center: flip_h(&sys.center),
        right: flip_h(&sys.left),
        left_pert: flip_p(&sys.right_pert),
        center_pert: flip_p(&sys.center_pert),
        right_pert: flip_p(&sys.left_pert),
        epsilon: sys.epsilon,
    }
}
