//! Dormand-Prince 5(4) with the standard fourth-order dense output,
//! specialised to planar systems.
//!
//! Coefficients follow the classic `dopri5` tableau (Hairer, Nørsett &
//! Wanner, Solving ODEs I).

use crate::error::Error;
use crate::{lit, Real, Result};

type V2<R> = [R; 2];

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
// fifth-order solution weights (also the last stage row: FSAL)
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// error weights b5 - b4
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense-output coefficients
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Adaptive step-size parameters.
#[derive(Debug, Clone, Copy)]
pub struct StepControl<R> {
    pub atol: R,
    pub rtol: R,
    pub h_max: R,
    pub h_min: R,
    pub max_steps: usize,
}

impl<R: Real> Default for StepControl<R> {
    fn default() -> Self {
        StepControl {
            atol: lit(1e-12),
            rtol: lit(1e-12),
            h_max: lit(0.05),
            h_min: lit(1e-14),
            max_steps: 5_000_000,
        }
    }
}

/// One accepted step with its dense interpolant.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<R> {
    pub t0: R,
    pub h: R,
    pub y0: V2<R>,
    pub y1: V2<R>,
    rcont: [V2<R>; 5],
}

impl<R: Real> DenseStep<R> {
    /// Evaluates the interpolant at `t` inside `[t0, t0 + h]`.
    pub fn eval(&self, t: R) -> V2<R> {
        let theta = (t - self.t0) / self.h;
        let th1 = R::one() - theta;
        let mut out = [R::zero(); 2];
        for i in 0..2 {
            out[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + th1
                            * (self.rcont[2][i]
                                + theta * (self.rcont[3][i] + th1 * self.rcont[4][i])));
        }
        out
    }

    pub fn t1(&self) -> R {
        self.t0 + self.h
    }
}

/// What the step callback tells the driver to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Dormand-Prince driver over a planar field `f(y) -> dy/dt`.
pub struct Dopri5<'a, R> {
    field: &'a dyn Fn(V2<R>) -> V2<R>,
    pub ctrl: StepControl<R>,
}

impl<'a, R: Real> Dopri5<'a, R> {
    pub fn new(field: &'a dyn Fn(V2<R>) -> V2<R>, ctrl: StepControl<R>) -> Self {
        Dopri5 { field, ctrl }
    }

    fn stages(&self, y: V2<R>, h: R) -> ([V2<R>; 7], V2<R>, R) {
        let f = self.field;
        let add = |y: V2<R>, terms: &[(f64, V2<R>)]| {
            let mut out = y;
            for &(c, k) in terms {
                let c = lit::<R>(c) * h;
                out[0] = out[0] + c * k[0];
                out[1] = out[1] + c * k[1];
            }
            out
        };
        let k1 = f(y);
        let k2 = f(add(y, &[(A21, k1)]));
        let k3 = f(add(y, &[(A31, k1), (A32, k2)]));
        let k4 = f(add(y, &[(A41, k1), (A42, k2), (A43, k3)]));
        let k5 = f(add(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
        let k6 = f(add(y, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]));
        let y1 = add(y, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        let k7 = f(y1);

        let mut err = R::zero();
        for i in 0..2 {
            let e = lit::<R>(E1) * k1[i]
                + lit::<R>(E3) * k3[i]
                + lit::<R>(E4) * k4[i]
                + lit::<R>(E5) * k5[i]
                + lit::<R>(E6) * k6[i]
                + lit::<R>(E7) * k7[i];
            let scale = self.ctrl.atol
                + self.ctrl.rtol * y[i].abs().max(y1[i].abs());
            let r = h * e / scale;
            err = err + r * r;
        }
        let err = (err * lit::<R>(0.5)).sqrt();
        ([k1, k2, k3, k4, k5, k6, k7], y1, err)
    }

    fn dense(&self, t0: R, h: R, y0: V2<R>, y1: V2<R>, ks: &[V2<R>; 7]) -> DenseStep<R> {
        let mut rcont = [[R::zero(); 2]; 5];
        for i in 0..2 {
            let ydiff = y1[i] - y0[i];
            let bspl = h * ks[0][i] - ydiff;
            rcont[0][i] = y0[i];
            rcont[1][i] = ydiff;
            rcont[2][i] = bspl;
            rcont[3][i] = ydiff - h * ks[6][i] - bspl;
            rcont[4][i] = h
                * (lit::<R>(D1) * ks[0][i]
                    + lit::<R>(D3) * ks[2][i]
                    + lit::<R>(D4) * ks[3][i]
                    + lit::<R>(D5) * ks[4][i]
                    + lit::<R>(D6) * ks[5][i]
                    + lit::<R>(D7) * ks[6][i]);
        }
        DenseStep { t0, h, y0, y1, rcont }
    }

    fn initial_step(&self, y: V2<R>) -> R {
        let f = (self.field)(y);
        let fn2 = (f[0] * f[0] + f[1] * f[1]).sqrt().max(lit(1e-6));
        let yn2 = (y[0] * y[0] + y[1] * y[1]).sqrt().max(R::one());
        (lit::<R>(0.01) * yn2 / fn2).min(self.ctrl.h_max)
    }

    /// Integrates from `(t0, y0)` until `t_end` or until the callback
    /// requests a stop, handing every accepted step (with dense output) to
    /// `on_step`. Returns the final `(t, y)`.
    pub fn propagate(
        &self,
        t0: R,
        y0: V2<R>,
        t_end: R,
        mut on_step: impl FnMut(&DenseStep<R>) -> Flow,
    ) -> Result<(R, V2<R>)> {
        let mut t = t0;
        let mut y = y0;
        let mut h = self.initial_step(y0).min((t_end - t0).abs().max(self.ctrl.h_min));
        let mut steps = 0usize;
        while t < t_end {
            if steps >= self.ctrl.max_steps {
                return Err(Error::StepFailure {
                    t: t.to_f64().unwrap_or(f64::NAN),
                    detail: "step budget exhausted".into(),
                });
            }
            steps += 1;
            h = h.min(t_end - t).min(self.ctrl.h_max);
            let (ks, y1, err) = self.stages(y, h);
            if err <= R::one() || h <= self.ctrl.h_min {
                let step = self.dense(t, h, y, y1, &ks);
                t = t + h;
                y = y1;
                let flow = on_step(&step);
                let factor = if err > R::zero() {
                    (lit::<R>(0.9) * err.powf(lit(-0.2))).min(lit(5.0)).max(lit(0.2))
                } else {
                    lit(5.0)
                };
                h = (h * factor).max(self.ctrl.h_min);
                if flow == Flow::Stop {
                    return Ok((t, y));
                }
            } else {
                let factor = (lit::<R>(0.9) * err.powf(lit(-0.2))).max(lit(0.2));
                h = h * factor;
                if h < self.ctrl.h_min {
                    return Err(Error::StepFailure {
                        t: t.to_f64().unwrap_or(f64::NAN),
                        detail: "step size underflow".into(),
                    });
                }
            }
        }
        Ok((t, y))
    }

    /// Integrates to exactly `t_end` and returns the final state.
    pub fn integrate_to(&self, t0: R, y0: V2<R>, t_end: R) -> Result<V2<R>> {
        let (_, y) = self.propagate(t0, y0, t_end, |_| Flow::Continue)?;
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        // y'' = -y: solution (cos t, -sin t) from (1, 0)
        let field = |y: [f64; 2]| [y[1], -y[0]];
        let solver = Dopri5::new(&field, StepControl::default());
        let y = solver
            .integrate_to(0.0, [1.0, 0.0], 2.0 * std::f64::consts::PI)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10, "got {y:?}");
        assert!(y[1].abs() < 1e-10);
    }

    #[test]
    fn dense_output_matches_solution() {
        let field = |y: [f64; 2]| [y[1], -y[0]];
        let solver = Dopri5::new(&field, StepControl::default());
        let mut worst = 0.0f64;
        solver
            .propagate(0.0, [1.0, 0.0], 3.0, |step| {
                for k in 1..5 {
                    let t = step.t0 + step.h * (k as f64) / 5.0;
                    let y = step.eval(t);
                    worst = worst.max((y[0] - t.cos()).abs()).max((y[1] + t.sin()).abs());
                }
                Flow::Continue
            })
            .unwrap();
        assert!(worst < 1e-9, "dense error {worst}");
    }

    #[test]
    fn linear_saddle_flow() {
        // y' = [[0, 1], [1, 0]] y: x(t) = cosh t from (1, 0)
        let field = |y: [f64; 2]| [y[1], y[0]];
        let solver = Dopri5::new(&field, StepControl::default());
        let y = solver.integrate_to(0.0, [1.0, 0.0], 1.5).unwrap();
        assert!((y[0] - 1.5f64.cosh()).abs() < 1e-10);
        assert!((y[1] - 1.5f64.sinh()).abs() < 1e-10);
    }
}
