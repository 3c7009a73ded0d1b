//! Brent's method: bisection / secant / inverse quadratic interpolation
//! on a bracketing interval.

use crate::{lit, Real};

/// Outcome of a Brent solve.
#[derive(Debug, Clone, Copy)]
pub struct BrentResult<R> {
    pub root: R,
    pub f_root: R,
    pub iterations: usize,
}

/// Finds a root of `f` in `[a, b]`, assuming `f(a)` and `f(b)` have
/// opposite signs. Stops when the bracket shrinks below `xtol`.
///
/// Returns `None` if the initial interval does not bracket a sign change.
pub fn brent<R: Real>(
    mut f: impl FnMut(R) -> R,
    mut a: R,
    mut b: R,
    xtol: R,
    max_iter: usize,
) -> Option<BrentResult<R>> {
    let two = lit::<R>(2.0);
    let three = lit::<R>(3.0);
    let half = lit::<R>(0.5);

    let mut fa = f(a);
    let mut fb = f(b);
    if fa == R::zero() {
        return Some(BrentResult { root: a, f_root: fa, iterations: 0 });
    }
    if fb == R::zero() {
        return Some(BrentResult { root: b, f_root: fb, iterations: 0 });
    }
    if (fa > R::zero()) == (fb > R::zero()) {
        return None;
    }
    if fa.abs() < fb.abs() {
        core::mem::swap(&mut a, &mut b);
        core::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut bisected = true;

    for it in 0..max_iter {
        let s = if fa != fc && fb != fc {
            // inverse quadratic interpolation
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };

        let lo = (three * a + b) / lit(4.0);
        let cond_range = !((s > lo && s < b) || (s < lo && s > b));
        let cond_slow = if bisected {
            (s - b).abs() >= (b - c).abs() * half
        } else {
            (s - b).abs() >= (c - d).abs() * half
        };
        let cond_tiny = if bisected {
            (b - c).abs() < xtol
        } else {
            (c - d).abs() < xtol
        };

        let s = if cond_range || cond_slow || cond_tiny {
            bisected = true;
            (a + b) * half
        } else {
            bisected = false;
            s
        };

        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if (fa > R::zero()) != (fs > R::zero()) {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            core::mem::swap(&mut a, &mut b);
            core::mem::swap(&mut fa, &mut fb);
        }
        if fb == R::zero() || (b - a).abs() <= xtol * two {
            return Some(BrentResult { root: b, f_root: fb, iterations: it + 1 });
        }
    }
    Some(BrentResult { root: b, f_root: fb, iterations: max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_root() {
        let r = brent(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14, 100).unwrap();
        assert!((r.root - 2.0f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_bracket() {
        assert!(brent(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-14, 100).is_none());
    }

    #[test]
    fn transcendental_root() {
        let r = brent(|x: f64| x.cos() - x, 0.0, 1.0, 1e-15, 200).unwrap();
        assert!((r.root - 0.7390851332151607).abs() < 1e-12);
    }
}
