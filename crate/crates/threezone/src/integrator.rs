//! Direct numerical validation: event-driven integration of the perturbed
//! system across the switching lines, Poincaré samples of one full
//! revolution, and localization of the bifurcated limit cycles.
//!
//! The per-zone fields are integrated with Dormand-Prince 5(4); switching
//! events are bracketed on the dense output and then polished against
//! exact re-integration, so event states are resolved to roughly 1e-12.

use crate::error::Error;
use crate::melnikov::MelnikovForm;
use crate::model::{Point, Side, ThreeZoneSystem};
use crate::normal_form::verify_normal_form;
use crate::numerics::{brent, Dopri5, Flow, StepControl};
use crate::{lit, Real, Result};

/// Below this horizontal speed a line contact counts as tangential.
pub const TANGENCY_TOL: f64 = 1e-10;
/// Residual tolerance of the return-map fixed point.
pub const MAP_TOL: f64 = 1e-10;
/// Default upper bound on `epsilon` for cycle hunting; above it the
/// first-order theory degrades and misses become likely.
pub const EPSILON_MAX: f64 = 1e-2;
/// Escape radius: trajectories leaving this box abort the revolution.
const ESCAPE: f64 = 1e3;

/// A located switching-line crossing.
#[derive(Debug, Clone, Copy)]
pub struct CrossingEvent<R> {
    /// The line x = +1 or x = -1.
    pub line: R,
    /// Sign of `dx/dt` at the crossing: `+1` rightward, `-1` leftward.
    pub direction: i8,
    pub t: R,
    pub point: Point<R>,
}

/// Why an integration run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination<R> {
    /// Reached the time horizon.
    TimeLimit,
    /// Collected the requested number of crossings.
    EventLimit,
    /// Hit a switching line tangentially.
    Tangency { point: Point<R> },
}

/// A recorded trajectory with its events.
#[derive(Debug, Clone)]
pub struct Trajectory<R> {
    /// Accepted integration nodes `(t, state, active side)`.
    pub samples: Vec<(R, Point<R>, Side)>,
    pub events: Vec<CrossingEvent<R>>,
    pub termination: Termination<R>,
    pub t_final: R,
    pub state_final: Point<R>,
    pub steps: usize,
}

/// One full revolution of the perturbed Poincaré map.
#[derive(Debug, Clone)]
pub struct PoincareSample<R> {
    pub h: R,
    pub epsilon: R,
    /// Ordinate displacement `d_eps(h) - h` on returning to `x = 1`.
    pub d_return: R,
    /// `H^R(D_eps) - H^R(A)`: the energy displacement whose first order
    /// in epsilon is the Melnikov function.
    pub h_energy_diff: R,
    pub steps: usize,
    pub events: Vec<CrossingEvent<R>>,
}

/// Evidence for one located limit cycle.
#[derive(Debug, Clone, Copy)]
pub struct CycleCertificate<R> {
    pub h_star: R,
    pub epsilon: R,
    pub fixed_point_residual: R,
    pub multiplier_estimate: R,
    pub predicted_h: R,
}

/// Outcome of hunting one Melnikov zero.
#[derive(Debug, Clone)]
pub enum CycleSearch<R> {
    Found(CycleCertificate<R>),
    NotFound { predicted_h: R, reason: String },
}

/// Integration options for the event-driven driver.
#[derive(Debug, Clone, Copy)]
pub struct EventIntegration<R> {
    pub control: StepControl<R>,
    /// Stop after this many crossings (`None`: run to the time horizon).
    pub max_events: Option<usize>,
    /// Keep the accepted integration nodes in the trajectory.
    pub record_samples: bool,
}

impl<R: Real> Default for EventIntegration<R> {
    fn default() -> Self {
        EventIntegration {
            control: StepControl::default(),
            max_events: None,
            record_samples: false,
        }
    }
}

fn require_normal_form<R: Real>(sys: &ThreeZoneSystem<R>) -> Result<()> {
    if verify_normal_form(sys) {
        Ok(())
    } else {
        Err(Error::Domain(
            "integration operates on normal-form systems (run to_normal_form first)".into(),
        ))
    }
}

/// Horizontal speed of the perturbed field of `side` at `p`.
fn xdot<R: Real>(sys: &ThreeZoneSystem<R>, side: Side, p: Point<R>) -> R {
    sys.perturbed_field(side, p).0
}

/// Picks the active zone at a start point. Exactly on a line, the zone is
/// the one the flow enters; a tangential start is reported as such.
fn active_side_at<R: Real>(sys: &ThreeZoneSystem<R>, p: Point<R>) -> std::result::Result<Side, Termination<R>> {
    let one = R::one();
    let tol = lit::<R>(1e-12);
    if (p.x - one).abs() > tol && (p.x + one).abs() > tol {
        return Ok(sys.side_of(p.x));
    }
    let (inner, outer, line_is_right) = if (p.x - one).abs() <= tol {
        (Side::Center, Side::Right, true)
    } else {
        (Side::Left, Side::Center, false)
    };
    let vx = xdot(sys, inner, p);
    if vx.abs() <= lit(TANGENCY_TOL) && xdot(sys, outer, p).abs() <= lit(TANGENCY_TOL) {
        return Err(Termination::Tangency { point: p });
    }
    // moving right crosses into the zone right of the line
    let rightward = if vx.abs() > lit(TANGENCY_TOL) {
        vx > R::zero()
    } else {
        xdot(sys, outer, p) > R::zero()
    };
    Ok(match (line_is_right, rightward) {
        (true, true) => Side::Right,
        (true, false) => Side::Center,
        (false, true) => Side::Center,
        (false, false) => Side::Left,
    })
}

/// The switching lines bounding a zone.
fn zone_lines(side: Side) -> &'static [f64] {
    match side {
        Side::Left => &[-1.0],
        Side::Center => &[-1.0, 1.0],
        Side::Right => &[1.0],
    }
}

/// Integrates the perturbed piecewise field from `start` for at most
/// `t_max`, locating every transversal crossing of `x = ±1` and switching
/// the active zone there. Tangential contacts terminate the run with a
/// `Tangency` flag; sliding contacts (the two zone fields disagreeing in
/// direction) are an error.
pub fn integrate_crossing<R: Real>(
    sys: &ThreeZoneSystem<R>,
    start: Point<R>,
    t_max: R,
    options: EventIntegration<R>,
) -> Result<Trajectory<R>> {
    require_normal_form(sys)?;
    let mut side = match active_side_at(sys, start) {
        Ok(s) => s,
        Err(term) => {
            return Ok(Trajectory {
                samples: vec![(R::zero(), start, sys.side_of(start.x))],
                events: Vec::new(),
                termination: term,
                t_final: R::zero(),
                state_final: start,
                steps: 0,
            })
        }
    };

    let mut samples = Vec::new();
    let mut events: Vec<CrossingEvent<R>> = Vec::new();
    let mut t = R::zero();
    let mut y = start;
    let mut steps = 0usize;
    if options.record_samples {
        samples.push((t, y, side));
    }

    'zones: loop {
        let sys_side = side;
        let field_owned = move |z: [R; 2]| {
            let (vx, vy) = sys.perturbed_field(sys_side, Point::new(z[0], z[1]));
            [vx, vy]
        };
        let field: &dyn Fn([R; 2]) -> [R; 2] = &field_owned;
        let solver = Dopri5::new(field, options.control);

        // propagate until a boundary sign change shows up in a step; the
        // dense output is scanned so grazing re-entries inside one step
        // are bracketed too
        let mut hit: Option<(R, [R; 2], R, R, R)> = None; // (t0, y0, line, dt_lo, dt_hi)
        let mut local_steps = 0usize;
        const NSCAN: usize = 6;
        let (t_end, y_end) = solver.propagate(t, [y.x, y.y], t_max, |step| {
            local_steps += 1;
            let mut first: Option<(R, R, R)> = None; // (line, dt_lo, dt_hi)
            for &line in zone_lines(side) {
                let line = lit::<R>(line);
                let mut prev_dt = R::zero();
                let mut prev_g = step.y0[0] - line;
                if prev_g == R::zero() {
                    // a start exactly on this line belongs to the current
                    // zone; only a later sign change counts as a crossing
                    continue;
                }
                for k in 1..=NSCAN {
                    let dt = step.h * lit::<R>(k as f64 / NSCAN as f64);
                    let g = if k == NSCAN {
                        step.y1[0] - line
                    } else {
                        step.eval(step.t0 + dt)[0] - line
                    };
                    if (prev_g > R::zero()) != (g > R::zero()) {
                        if first.map_or(true, |(_, lo, _)| prev_dt < lo) {
                            first = Some((line, prev_dt, dt));
                        }
                        break;
                    }
                    prev_dt = dt;
                    prev_g = g;
                }
            }
            if let Some((line, dt_lo, dt_hi)) = first {
                hit = Some((step.t0, step.y0, line, dt_lo, dt_hi));
                return Flow::Stop;
            }
            if step.y1[0].abs() > lit(ESCAPE) || step.y1[1].abs() > lit(ESCAPE) {
                return Flow::Stop;
            }
            if options.record_samples {
                samples.push((step.t0 + step.h, Point::new(step.y1[0], step.y1[1]), side));
            }
            Flow::Continue
        })?;
        steps += local_steps;

        let Some((t0, y0, line, dt_lo, dt_hi)) = hit else {
            let p = Point::new(y_end[0], y_end[1]);
            if p.x.abs() > lit(ESCAPE) || p.y.abs() > lit(ESCAPE) {
                return Err(Error::OrbitEscaped);
            }
            // time horizon reached inside the current zone
            return Ok(Trajectory {
                samples,
                events,
                termination: Termination::TimeLimit,
                t_final: t_end,
                state_final: p,
                steps,
            });
        };

        // polish the crossing time against exact re-integration from the
        // step start
        let cross = |dt: R| -> R {
            if dt == R::zero() {
                return y0[0] - line;
            }
            solver
                .integrate_to(R::zero(), y0, dt)
                .map(|z| z[0] - line)
                .unwrap_or(R::nan())
        };
        let sol = brent(cross, dt_lo, dt_hi, lit(1e-14), 120).ok_or_else(|| {
            Error::StepFailure {
                t: t0.to_f64().unwrap_or(f64::NAN),
                detail: "crossing bracket collapsed during refinement".into(),
            }
        })?;
        let t_event = t0 + sol.root;
        let z = solver.integrate_to(R::zero(), y0, sol.root)?;
        let mut p = Point::new(z[0], z[1]);
        p.x = line; // snap onto the switching line

        // transversality at the event
        let vx_here = xdot(sys, side, p);
        let other = if line > R::zero() {
            if side == Side::Right { Side::Center } else { Side::Right }
        } else if side == Side::Left {
            Side::Center
        } else {
            Side::Left
        };
        let vx_other = xdot(sys, other, p);
        if vx_here.abs() <= lit(TANGENCY_TOL) || vx_other.abs() <= lit(TANGENCY_TOL) {
            return Ok(Trajectory {
                samples,
                events,
                termination: Termination::Tangency { point: p },
                t_final: t_event,
                state_final: p,
                steps,
            });
        }
        if vx_here * vx_other < R::zero() {
            return Err(Error::SlidingDetected {
                line: line.to_f64().unwrap_or(f64::NAN),
                y: p.y.to_f64().unwrap_or(f64::NAN),
            });
        }

        let direction = if vx_here > R::zero() { 1 } else { -1 };
        events.push(CrossingEvent { line, direction, t: t_event, point: p });
        if options.record_samples {
            samples.push((t_event, p, other));
        }
        t = t_event;
        y = p;
        side = other;

        if let Some(max) = options.max_events {
            if events.len() >= max {
                return Ok(Trajectory {
                    samples,
                    events,
                    termination: Termination::EventLimit,
                    t_final: t,
                    state_final: y,
                    steps,
                });
            }
        }
        if t >= t_max {
            return Ok(Trajectory {
                samples,
                events,
                termination: Termination::TimeLimit,
                t_final: t,
                state_final: y,
                steps,
            });
        }
        continue 'zones;
    }
}

/// Time budget for one revolution: the unperturbed flight times plus slack.
fn revolution_budget<R: Real>(sys: &ThreeZoneSystem<R>, h: R) -> R {
    match crate::unperturbed::orbit_arcs(sys, h) {
        Ok(arcs) => {
            let total = arcs.iter().fold(R::zero(), |acc, a| acc + a.flight_time);
            total * lit(3.0) + lit(10.0)
        }
        Err(_) => lit(200.0),
    }
}

/// Runs one full revolution `A -> A_eps -> B_eps -> C_eps -> D_eps` of the
/// perturbed system starting from `A(h) = (1, h)` and reports the
/// ordinate and energy displacements.
pub fn poincare_sample<R: Real>(
    sys: &ThreeZoneSystem<R>,
    h: R,
    epsilon: R,
) -> Result<PoincareSample<R>> {
    require_normal_form(sys)?;
    let interval = crate::unperturbed::annulus_interval(sys)?;
    if !interval.contains(h) {
        return Err(Error::OutOfAnnulus {
            h: h.to_f64().unwrap_or(f64::NAN),
            lo: 0.0,
            hi: interval.upper.to_f64().unwrap_or(f64::NAN),
        });
    }
    if epsilon < R::zero() || epsilon > lit(EPSILON_MAX) {
        return Err(Error::InvalidInput(format!(
            "epsilon = {epsilon} outside [0, {EPSILON_MAX}]"
        )));
    }
    let sys = sys.with_perturbation(sys.left_pert, sys.center_pert, sys.right_pert, epsilon);
    let start = Point::new(R::one(), h);
    let budget = revolution_budget(&sys, h);
    let traj = integrate_crossing(
        &sys,
        start,
        budget,
        EventIntegration { max_events: Some(4), ..Default::default() },
    )?;
    match traj.termination {
        Termination::EventLimit => {}
        Termination::Tangency { point } => {
            return Err(Error::Domain(format!(
                "revolution hit a tangency at ({}, {})",
                point.x, point.y
            )))
        }
        Termination::TimeLimit => return Err(Error::OrbitEscaped),
    }
    // the four crossings of a clockwise revolution
    let expected: [(f64, i8); 4] = [(1.0, -1), (-1.0, -1), (-1.0, 1), (1.0, 1)];
    for (ev, (line, dir)) in traj.events.iter().zip(expected) {
        if (ev.line - lit(line)).abs() > lit(1e-9) || ev.direction != dir {
            return Err(Error::OrbitEscaped);
        }
    }
    let d_point = traj.events[3].point;
    let a_point = start;
    Ok(PoincareSample {
        h,
        epsilon,
        d_return: d_point.y - h,
        h_energy_diff: sys.right.hamiltonian(d_point) - sys.right.hamiltonian(a_point),
        steps: traj.steps,
        events: traj.events,
    })
}

/// Brackets and refines a fixed point of the return map near each
/// Melnikov zero. Misses are reported per zero, not raised.
pub fn locate_limit_cycles<R: Real>(
    sys: &ThreeZoneSystem<R>,
    epsilon: R,
    zeros: &[R],
    form: &MelnikovForm<R>,
) -> Result<Vec<CycleSearch<R>>> {
    require_normal_form(sys)?;
    if epsilon <= R::zero() || epsilon > lit(EPSILON_MAX) {
        return Err(Error::InvalidInput(format!(
            "epsilon = {epsilon} outside (0, {EPSILON_MAX}]"
        )));
    }
    let lo = form.domain.lower;
    let hi = if form.domain.upper.is_finite() {
        form.domain.upper
    } else {
        let mut cap = lit::<R>(10.0);
        for &z in zeros {
            cap = cap.max(z * lit(2.0));
        }
        cap
    };
    let span = hi - lo;
    let margin = span * lit::<R>(1e-4);

    let mut out = Vec::with_capacity(zeros.len());
    'zero: for (idx, &hstar) in zeros.iter().enumerate() {
        // keep the bracket away from the neighbouring zeros
        let mut lo_lim = lo + margin;
        let mut hi_lim = hi - margin;
        if idx > 0 {
            lo_lim = lo_lim.max((zeros[idx - 1] + hstar) * lit(0.5));
        }
        if idx + 1 < zeros.len() {
            hi_lim = hi_lim.min((zeros[idx + 1] + hstar) * lit(0.5));
        }

        let g = |h: R| poincare_sample(sys, h, epsilon).map(|s| s.d_return);
        let mut delta = span * lit::<R>(0.05);
        for _ in 0..=4 {
            let a = (hstar - delta).max(lo_lim);
            let b = (hstar + delta).min(hi_lim);
            let (ga, gb) = match (g(a), g(b)) {
                (Ok(x), Ok(y)) => (x, y),
                _ => {
                    delta = delta * lit(2.0);
                    continue;
                }
            };
            // pure integration noise must not fabricate a cycle
            if ga.abs().max(gb.abs()) < lit::<R>(10.0) * lit::<R>(MAP_TOL) {
                out.push(CycleSearch::NotFound {
                    predicted_h: hstar,
                    reason: "return displacement below noise floor".into(),
                });
                continue 'zero;
            }
            if (ga > R::zero()) != (gb > R::zero()) {
                let sol = brent(
                    |h| g(h).unwrap_or(R::nan()),
                    a,
                    b,
                    lit(1e-13),
                    120,
                )
                .filter(|s| s.f_root.abs() <= lit(MAP_TOL));
                match sol {
                    Some(s) => {
                        // return-map slope from a centered difference
                        let dh = (b - a) * lit::<R>(1e-3);
                        let slope = match (g(s.root + dh), g(s.root - dh)) {
                            (Ok(p), Ok(m)) => (p - m) / (dh + dh),
                            _ => R::nan(),
                        };
                        out.push(CycleSearch::Found(CycleCertificate {
                            h_star: s.root,
                            epsilon,
                            fixed_point_residual: s.f_root.abs(),
                            multiplier_estimate: R::one() + slope,
                            predicted_h: hstar,
                        }));
                    }
                    None => out.push(CycleSearch::NotFound {
                        predicted_h: hstar,
                        reason: "bracket refinement missed the map tolerance".into(),
                    }),
                }
                continue 'zero;
            }
            delta = delta * lit(2.0);
        }
        out.push(CycleSearch::NotFound {
            predicted_h: hstar,
            reason: "no sign change of the return displacement near the zero".into(),
        });
    }
    Ok(out)
}
