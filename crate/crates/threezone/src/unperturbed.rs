//! Geometry and dynamics of the unperturbed normal-form system: crossing
//! points, the admissible energy interval, separatrix ordinates and exact
//! orbit arcs with their flight times.
//!
//! Orbits are parametrized by the ordinate `h` of the crossing point
//! `A(h) = (1, h)`. In normal form the crossing quadruple is always
//! `(1, h), (1, -h), (-1, -h), (-1, h)`.

use crate::error::{Error, Hypothesis};
use crate::model::{EquilibriumKind, Point, Side, ThreeZoneSystem, ZoneHamiltonian};
use crate::normal_form::verify_normal_form;
use crate::{lit, Real, Result};

/// Tolerance for deciding that the two separatrix ordinates coincide
/// (heteroclinic boundary).
pub const HETEROCLINIC_TOL: f64 = 1e-10;

/// The four crossing points of the orbit through `A(h) = (1, h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingQuad<R> {
    pub a: Point<R>,
    pub a1: Point<R>,
    pub a2: Point<R>,
    pub a3: Point<R>,
    pub h: R,
}

/// What bounds the periodic annulus at the upper end of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    HomoclinicLoop,
    HeteroclinicOrbit,
    Unbounded,
}

impl BoundaryKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::HomoclinicLoop => "homoclinic-loop",
            BoundaryKind::HeteroclinicOrbit => "heteroclinic-orbit",
            BoundaryKind::Unbounded => "unbounded",
        }
    }
}

/// The admissible energy interval `(0, upper)`; `upper` is `+inf` for the
/// CCC class. `tangency_count_at_zero` counts the periodic orbits tangent
/// to the switching lines in the `h -> 0` limit (the central one plus one
/// per real outer center).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusInterval<R> {
    pub lower: R,
    pub upper: R,
    pub boundary: BoundaryKind,
    pub tangency_count_at_zero: u8,
}

impl<R: Real> AnnulusInterval<R> {
    /// Strict interior membership.
    pub fn contains(&self, h: R) -> bool {
        h > self.lower && h < self.upper
    }

    fn out_of_annulus(&self, h: R) -> Error {
        Error::OutOfAnnulus {
            h: h.to_f64().unwrap_or(f64::NAN),
            lo: self.lower.to_f64().unwrap_or(f64::NAN),
            hi: self.upper.to_f64().unwrap_or(f64::NAN),
        }
    }
}

/// Separatrix crossing points of the saddle zones, when present.
/// Each pair is `(unstable, stable)` and is symmetric about the x-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparatrixPoints<R> {
    pub left: Option<(Point<R>, Point<R>)>,
    pub right: Option<(Point<R>, Point<R>)>,
}

fn require_normal_form<R: Real>(sys: &ThreeZoneSystem<R>) -> Result<()> {
    if verify_normal_form(sys) {
        Ok(())
    } else {
        Err(Error::Domain(
            "operation requires a system in normal form (run to_normal_form first)".into(),
        ))
    }
}

/// Separatrix crossing ordinate of a saddle outer zone: the positive `y`
/// where the stable (right) or unstable (left) separatrix meets its
/// switching line.
pub fn saddle_ordinate<R: Real>(sys: &ThreeZoneSystem<R>, side: Side) -> Result<R> {
    let z = sys.zone(side);
    let d = z.discriminant();
    if d <= R::zero() {
        return Err(Error::NotASaddle { side: side.name() });
    }
    let w = d.sqrt();
    Ok(match side {
        Side::Right => (z.a * z.a - z.b * z.beta - w * w) / (z.b * w),
        Side::Left => (z.a * z.a + z.b * z.beta - w * w) / (z.b * w),
        Side::Center => return Err(Error::Domain("central zone has no separatrix".into())),
    })
}

/// Signed tangency slack of a center-type outer zone; positive when the
/// equilibrium is virtual, negative when it is real. The orbit arc sweeps
/// the angle `acos((nu^2 - h^2)/(nu^2 + h^2))` around the equilibrium for
/// virtual centers and the complementary `2*pi` branch for real ones.
pub fn center_slack<R: Real>(sys: &ThreeZoneSystem<R>, side: Side) -> Result<R> {
    let z = sys.zone(side);
    let d = z.discriminant();
    if d >= R::zero() {
        return Err(Error::Domain(format!("{} zone is not a center", side.name())));
    }
    let w = (-d).sqrt();
    Ok(match side {
        Side::Right => -(z.beta + z.c) / w,
        Side::Left => (z.beta - z.c) / w,
        Side::Center => return Err(Error::Domain("outer zones only".into())),
    })
}

/// The admissible interval of the annulus parameter `h`.
pub fn annulus_interval<R: Real>(sys: &ThreeZoneSystem<R>) -> Result<AnnulusInterval<R>> {
    require_normal_form(sys)?;
    let mut tangencies = 1u8;
    let mut sigma_left = None;
    let mut sigma_right = None;
    for side in [Side::Left, Side::Right] {
        let kind = crate::model::classify_zone(sys.zone(side), side)?;
        match kind.kind {
            EquilibriumKind::Saddle => {
                let s = saddle_ordinate(sys, side)?;
                if s <= R::zero() {
                    return Err(Error::HypothesisViolation {
                        which: Hypothesis::H3,
                        detail: format!(
                            "{} separatrix meets its line at y = {s} <= 0: no crossing annulus",
                            side.name()
                        ),
                    });
                }
                match side {
                    Side::Left => sigma_left = Some(s),
                    Side::Right => sigma_right = Some(s),
                    Side::Center => unreachable!(),
                }
            }
            EquilibriumKind::Center => {
                if kind.location == crate::model::Location::Real {
                    tangencies += 1;
                }
            }
        }
    }
    let (upper, boundary) = match (sigma_left, sigma_right) {
        (Some(sl), Some(sr)) => {
            let boundary = if (sl - sr).abs() <= lit(HETEROCLINIC_TOL) {
                BoundaryKind::HeteroclinicOrbit
            } else {
                BoundaryKind::HomoclinicLoop
            };
            (sl.min(sr), boundary)
        }
        (Some(s), None) | (None, Some(s)) => (s, BoundaryKind::HomoclinicLoop),
        (None, None) => (R::infinity(), BoundaryKind::Unbounded),
    };
    Ok(AnnulusInterval {
        lower: R::zero(),
        upper,
        boundary,
        tangency_count_at_zero: tangencies,
    })
}

/// Crossing quadruple of the orbit through `(1, h)`, verifying the energy
/// equalities that define it.
pub fn crossing_quad<R: Real>(sys: &ThreeZoneSystem<R>, h: R) -> Result<CrossingQuad<R>> {
    let interval = annulus_interval(sys)?;
    if !interval.contains(h) {
        return Err(interval.out_of_annulus(h));
    }
    let one = R::one();
    let quad = CrossingQuad {
        a: Point::new(one, h),
        a1: Point::new(one, -h),
        a2: Point::new(-one, -h),
        a3: Point::new(-one, h),
        h,
    };
    let tol = lit::<R>(1e-12) * (one + h * h);
    let checks = [
        sys.right.hamiltonian(quad.a) - sys.right.hamiltonian(quad.a1),
        sys.center.hamiltonian(quad.a1) - sys.center.hamiltonian(quad.a2),
        sys.left.hamiltonian(quad.a2) - sys.left.hamiltonian(quad.a3),
        sys.center.hamiltonian(quad.a3) - sys.center.hamiltonian(quad.a),
    ];
    for d in checks {
        if d.abs() > tol {
            return Err(Error::Domain(format!(
                "crossing energy equality violated by {d:e}"
            )));
        }
    }
    Ok(quad)
}

/// Separatrix crossing points of the saddle zones.
pub fn separatrix_points<R: Real>(sys: &ThreeZoneSystem<R>) -> Result<SeparatrixPoints<R>> {
    require_normal_form(sys)?;
    let one = R::one();
    let left = match saddle_ordinate(sys, Side::Left) {
        Ok(s) => Some((Point::new(-one, s), Point::new(-one, -s))),
        Err(Error::NotASaddle { .. }) => None,
        Err(e) => return Err(e),
    };
    let right = match saddle_ordinate(sys, Side::Right) {
        Ok(s) => Some((Point::new(one, -s), Point::new(one, s))),
        Err(Error::NotASaddle { .. }) => None,
        Err(e) => return Err(e),
    };
    if left.is_none() && right.is_none() {
        return Err(Error::NotASaddle { side: "left/right" });
    }
    Ok(SeparatrixPoints { left, right })
}

/// Which quarter of the revolution an arc covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcZone {
    Right,
    CenterLower,
    Left,
    CenterUpper,
}

impl ArcZone {
    pub fn name(self) -> &'static str {
        match self {
            ArcZone::Right => "right",
            ArcZone::CenterLower => "center_lower",
            ArcZone::Left => "left",
            ArcZone::CenterUpper => "center_upper",
        }
    }

    pub fn side(self) -> Side {
        match self {
            ArcZone::Right => Side::Right,
            ArcZone::Left => Side::Left,
            ArcZone::CenterLower | ArcZone::CenterUpper => Side::Center,
        }
    }
}

/// One closed-form orbit arc: an exact evaluator for the zone flow from
/// `start` (at `t = 0`) to `end` (at `t = flight_time`).
#[derive(Debug, Clone, Copy)]
pub struct OrbitArc<R> {
    pub zone: ArcZone,
    pub ham: ZoneHamiltonian<R>,
    pub start: Point<R>,
    pub end: Point<R>,
    pub flight_time: R,
    equilibrium: Point<R>,
    omega: R,
    rotational: bool,
}

impl<R: Real> OrbitArc<R> {
    fn new(
        zone: ArcZone,
        ham: ZoneHamiltonian<R>,
        start: Point<R>,
        end: Point<R>,
        flight_time: R,
    ) -> Self {
        let equilibrium = ham.equilibrium().expect("arc zones are non-degenerate");
        let omega = ham.omega();
        let rotational = ham.discriminant() < R::zero();
        OrbitArc {
            zone,
            ham,
            start,
            end,
            flight_time,
            equilibrium,
            omega,
            rotational,
        }
    }

    /// Exact state at time `t` along the arc: `E + exp(Mt)(start - E)`.
    pub fn eval(&self, t: R) -> Point<R> {
        let dx = self.start.x - self.equilibrium.x;
        let dy = self.start.y - self.equilibrium.y;
        let w = self.omega;
        let (cw, sw) = if self.rotational {
            ((w * t).cos(), (w * t).sin() / w)
        } else {
            ((w * t).cosh(), (w * t).sinh() / w)
        };
        let mdx = self.ham.a * dx + self.ham.b * dy;
        let mdy = self.ham.c * dx - self.ham.a * dy;
        Point::new(
            self.equilibrium.x + cw * dx + sw * mdx,
            self.equilibrium.y + cw * dy + sw * mdy,
        )
    }

    /// Velocity of the unperturbed flow at time `t` along the arc.
    pub fn velocity(&self, t: R) -> (R, R) {
        self.ham.field(self.eval(t))
    }

    /// Uniform samples `(t, point)` including both endpoints.
    pub fn sample(&self, n: usize) -> Vec<(R, Point<R>)> {
        let n = n.max(2);
        (0..n)
            .map(|k| {
                let t = self.flight_time * lit::<R>(k as f64) / lit::<R>((n - 1) as f64);
                (t, self.eval(t))
            })
            .collect()
    }
}

/// Flight time of the outer-zone arc from `(±1, ±h)` around its zone.
fn outer_flight_time<R: Real>(sys: &ThreeZoneSystem<R>, side: Side, h: R) -> Result<R> {
    let z = sys.zone(side);
    if z.discriminant() > R::zero() {
        let w = z.omega();
        let sigma = saddle_ordinate(sys, side)?;
        if h >= sigma {
            return Err(Error::Domain(format!(
                "h = {h} reaches the {} separatrix ordinate {sigma}",
                side.name()
            )));
        }
        Ok(((sigma + h) / (sigma - h)).ln() / w)
    } else {
        let w = z.omega();
        let nu = center_slack(sys, side)?;
        let theta = ((nu * nu - h * h) / (nu * nu + h * h)).acos();
        let sweep = if nu > R::zero() {
            theta
        } else {
            lit::<R>(2.0) * R::from_f64(std::f64::consts::PI).unwrap() - theta
        };
        debug_assert!(sweep > R::zero() && sweep < lit(2.0 * std::f64::consts::PI + 1e-9));
        Ok(sweep / w)
    }
}

/// The four arcs of the crossing orbit through `(1, h)`, ordered
/// right, lower-center, left, upper-center.
pub fn orbit_arcs<R: Real>(sys: &ThreeZoneSystem<R>, h: R) -> Result<[OrbitArc<R>; 4]> {
    let quad = crossing_quad(sys, h)?;
    let t_center = ((h * h - R::one()) / (h * h + R::one())).acos();
    debug_assert!(t_center < R::from_f64(std::f64::consts::PI + 1e-12).unwrap());
    let t_right = outer_flight_time(sys, Side::Right, h)?;
    let t_left = outer_flight_time(sys, Side::Left, h)?;
    Ok([
        OrbitArc::new(ArcZone::Right, sys.right, quad.a, quad.a1, t_right),
        OrbitArc::new(ArcZone::CenterLower, sys.center, quad.a1, quad.a2, t_center),
        OrbitArc::new(ArcZone::Left, sys.left, quad.a2, quad.a3, t_left),
        OrbitArc::new(ArcZone::CenterUpper, sys.center, quad.a3, quad.a, t_center),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn quad_ordinates_are_symmetric() {
        let sys = scenarios::builtin("scs-a").unwrap();
        let q = crossing_quad(&sys, 0.5).unwrap();
        assert_eq!((q.a.y, q.a1.y, q.a2.y, q.a3.y), (0.5, -0.5, -0.5, 0.5));
        assert_eq!((q.a.x, q.a1.x, q.a2.x, q.a3.x), (1.0, 1.0, -1.0, -1.0));
    }

    #[test]
    fn quad_degenerates_to_tangent_points() {
        let sys = scenarios::builtin("scs-a").unwrap();
        let q = crossing_quad(&sys, 1e-9).unwrap();
        assert!(q.a.dist(&Point::new(1.0, 0.0)) < 1e-8);
        assert!(q.a2.dist(&Point::new(-1.0, 0.0)) < 1e-8);
    }

    #[test]
    fn quad_rejects_h_at_tau() {
        let sys = scenarios::builtin("scs-a").unwrap();
        assert!(matches!(
            crossing_quad(&sys, 1.0),
            Err(Error::OutOfAnnulus { .. })
        ));
        assert!(matches!(
            crossing_quad(&sys, 0.0),
            Err(Error::OutOfAnnulus { .. })
        ));
    }

    #[test]
    fn annulus_goldens() {
        let cases: [(&str, f64, BoundaryKind, u8); 7] = [
            ("scs-a", 1.0, BoundaryKind::HomoclinicLoop, 1),
            ("scs-b", 1.0, BoundaryKind::HeteroclinicOrbit, 1),
            ("ccs-c", 1.0, BoundaryKind::HomoclinicLoop, 1),
            ("ccs-d", 1.0, BoundaryKind::HomoclinicLoop, 2),
            ("ccc-a", f64::INFINITY, BoundaryKind::Unbounded, 1),
            ("ccc-b", f64::INFINITY, BoundaryKind::Unbounded, 2),
            ("ccc-c", f64::INFINITY, BoundaryKind::Unbounded, 3),
        ];
        for (name, upper, boundary, tangencies) in cases {
            let sys = scenarios::builtin(name).unwrap();
            let j = annulus_interval(&sys).unwrap();
            assert_eq!(j.lower, 0.0, "{name}");
            if upper.is_finite() {
                assert!((j.upper - upper).abs() < 1e-12, "{name}: upper = {}", j.upper);
            } else {
                assert!(j.upper.is_infinite(), "{name}");
            }
            assert_eq!(j.boundary, boundary, "{name}");
            assert_eq!(j.tangency_count_at_zero, tangencies, "{name}");
        }
    }

    #[test]
    fn separatrix_points_of_scs_a() {
        let sys = scenarios::builtin("scs-a").unwrap();
        let sep = separatrix_points(&sys).unwrap();
        let (lu, ls) = sep.left.unwrap();
        let (ru, rs) = sep.right.unwrap();
        assert_eq!((lu.x, lu.y), (-1.0, 2.0));
        assert_eq!((rs.x, rs.y), (1.0, 1.0));
        // symmetric pairs about the x-axis
        assert_eq!(ls.y, -lu.y);
        assert_eq!(ru.y, -rs.y);
    }

    #[test]
    fn separatrix_requires_a_saddle() {
        let sys = scenarios::builtin("ccc-a").unwrap();
        assert!(matches!(
            separatrix_points(&sys),
            Err(Error::NotASaddle { .. })
        ));
        assert!(matches!(
            saddle_ordinate(&sys, Side::Right),
            Err(Error::NotASaddle { .. })
        ));
    }

    #[test]
    fn center_arc_flight_time_at_unit_energy() {
        let sys = scenarios::builtin("scs-a").unwrap();
        let arcs = orbit_arcs(&sys, 1.0 - 1e-12);
        assert!(arcs.is_err()); // tau = 1 is excluded
        let sys = scenarios::builtin("ccc-a").unwrap();
        let arcs = orbit_arcs(&sys, 1.0).unwrap();
        assert!((arcs[1].flight_time - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn right_saddle_flight_time_is_log3() {
        let sys = scenarios::builtin("scs-a").unwrap();
        let arcs = orbit_arcs(&sys, 0.5).unwrap();
        assert!((arcs[0].flight_time - 3.0f64.ln()).abs() < 1e-14);
        // frozen: t_L(0.5) for the same configuration
        assert!((arcs[2].flight_time - 0.51082562376599068321).abs() < 1e-14);
    }

    #[test]
    fn real_center_arc_takes_the_long_way() {
        // frozen high-precision sweep times for the real-center zones
        let sys = scenarios::builtin("ccs-d").unwrap();
        let arcs = orbit_arcs(&sys, 0.4).unwrap();
        assert!((arcs[2].flight_time - 5.5221725529548567043).abs() < 1e-13);
        assert!(arcs[2].flight_time > std::f64::consts::PI);

        let sys = scenarios::builtin("ccc-c").unwrap();
        let arcs = orbit_arcs(&sys, 0.4).unwrap();
        assert!((arcs[0].flight_time - 5.5221725529548567043).abs() < 1e-13);

        let sys = scenarios::builtin("ccc-b").unwrap();
        let arcs = orbit_arcs(&sys, 0.5).unwrap();
        assert!((arcs[2].flight_time - 5.7932279809258581686).abs() < 1e-13);
    }

    #[test]
    fn virtual_center_arc_is_short() {
        let sys = scenarios::builtin("ccs-c").unwrap();
        let arcs = orbit_arcs(&sys, 0.5).unwrap();
        assert!((arcs[2].flight_time - 0.48995732625372830834).abs() < 1e-14);
        assert!(arcs[2].flight_time < std::f64::consts::PI);
    }

    #[test]
    fn arcs_land_on_their_endpoints() {
        for name in scenarios::NAMES {
            let sys = scenarios::builtin(name).unwrap();
            for h in [0.1, 0.5, 0.9] {
                let arcs = match orbit_arcs(&sys, h) {
                    Ok(a) => a,
                    Err(_) => continue,
                };
                for arc in arcs {
                    let p0 = arc.eval(0.0);
                    let p1 = arc.eval(arc.flight_time);
                    assert!(p0.dist(&arc.start) < 1e-12, "{name} {:?}", arc.zone);
                    assert!(p1.dist(&arc.end) < 1e-10, "{name} {:?} h={h}: {p1:?}", arc.zone);
                }
            }
        }
    }

    #[test]
    fn arcs_conserve_energy() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for name in scenarios::NAMES {
            let sys = scenarios::builtin(name).unwrap();
            let arcs = orbit_arcs(&sys, 0.6).unwrap();
            for arc in arcs {
                let e0 = arc.ham.hamiltonian(arc.start);
                for _ in 0..50 {
                    let t = rng.gen_range(0.0..arc.flight_time);
                    let e = arc.ham.hamiltonian(arc.eval(t));
                    assert!((e - e0).abs() <= 1e-10, "{name} {:?}: drift {}", arc.zone, e - e0);
                }
            }
        }
    }

    #[test]
    fn arcs_wind_clockwise() {
        for name in scenarios::NAMES {
            let sys = scenarios::builtin(name).unwrap();
            let arcs = orbit_arcs(&sys, 0.7).unwrap();
            for (arc, check) in arcs.iter().zip([
                |p: Point<f64>| p.x >= 1.0 - 1e-12,
                |p: Point<f64>| p.y < 0.0,
                |p: Point<f64>| p.x <= -1.0 + 1e-12,
                |p: Point<f64>| p.y > 0.0,
            ]) {
                for k in 1..20 {
                    let t = arc.flight_time * (k as f64) / 20.0;
                    assert!(check(arc.eval(t)), "{name} {:?} at t={t}", arc.zone);
                }
            }
        }
    }

    #[test]
    fn flight_time_diverges_at_the_homoclinic_loop() {
        let sys = scenarios::builtin("scs-a").unwrap();
        let mut last = 0.0;
        for h in [0.9, 0.99, 0.999, 0.9999] {
            let t = orbit_arcs(&sys, h).unwrap()[0].flight_time;
            assert!(t > last);
            last = t;
        }
        assert!(last > 9.0); // log grows without bound as h -> tau
    }
}
