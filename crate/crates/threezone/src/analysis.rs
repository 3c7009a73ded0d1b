//! Zero counting and placement: Wronskian independence certificates, root
//! isolation for the Melnikov function, and inverse design of
//! perturbations realizing prescribed zeros.

use crate::error::Error;
use crate::melnikov::{eval_melnikov, melnikov_coefficients, BasisFunction, MelnikovForm};
use crate::model::{ThreeZoneSystem, ZonePerturbation};
use crate::numerics::{brent, jacobi_symmetric_4};
use crate::{lit, Real, Result};

/// Residual bound a refined zero must satisfy.
pub const ROOT_TOL: f64 = 1e-12;
/// A zero is simple when the local derivative magnitude exceeds this.
pub const SIMPLE_TOL: f64 = 1e-8;
/// Default scan cap for unbounded (CCC) domains.
pub const DEFAULT_UNBOUNDED_CAP: f64 = 10.0;
/// Wronskian magnitude accepted as an independence witness.
pub const WITNESS_TOL: f64 = 1e-6;

/// How the derivatives entering a Wronskian were computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WronskianMethod {
    AnalyticDerivatives,
    FiniteDifference,
}

/// A Wronskian evaluation at one point.
#[derive(Debug, Clone, Copy)]
pub struct WronskianReport<R> {
    pub h: R,
    pub value: R,
    pub order: usize,
    pub method: WronskianMethod,
}

fn det_small<R: Real>(m: &mut [[R; 4]; 4], n: usize) -> R {
    // Gaussian elimination with partial pivoting on the leading n x n block
    let mut det = R::one();
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        if m[pivot][col] == R::zero() {
            return R::zero();
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det = det * m[col][col];
        for row in (col + 1)..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] = m[row][k] - factor * m[col][k];
            }
        }
    }
    det
}

/// Richardson-extrapolated central-difference derivatives of orders 0..=3
/// from value evaluations only. Returns the estimates and the relative
/// disagreement between the two extrapolation levels.
fn fd_derivs<R: Real>(f: &BasisFunction<R>, h: R, order: usize) -> Result<([R; 4], R)> {
    let base = h.abs() * lit::<R>(1e-3);
    let eval = |x: R| f.eval(x);
    let stencil = |d: R| -> Result<[R; 4]> {
        let two = lit::<R>(2.0);
        let f0 = eval(h)?;
        let fp = eval(h + d)?;
        let fm = eval(h - d)?;
        let fp2 = eval(h + two * d)?;
        let fm2 = eval(h - two * d)?;
        Ok([
            f0,
            (fp - fm) / (two * d),
            (fp - two * f0 + fm) / (d * d),
            (fp2 - two * fp + two * fm - fm2) / (two * d * d * d),
        ])
    };
    let a1 = stencil(base)?;
    let a2 = stencil(base * lit(0.5))?;
    let mut out = [R::zero(); 4];
    let mut disagreement = R::zero();
    for k in 0..=order.min(3) {
        // the stencils are O(d^2): one Richardson level
        let r = (lit::<R>(4.0) * a2[k] - a1[k]) / lit::<R>(3.0);
        out[k] = r;
        let rel = (r - a2[k]).abs() / r.abs().max(R::one());
        disagreement = disagreement.max(rel);
    }
    Ok((out, disagreement))
}

/// Evaluates the Wronskian of up to four basis functions at `h`.
///
/// `AnalyticDerivatives` uses the closed-form derivative cascades of the
/// basis functions (the transcendental factors all have rational
/// derivatives). `FiniteDifference` rebuilds the rows from Richardson-
/// extrapolated central differences of the plain evaluators and reports
/// `IllConditioned` when the extrapolation levels disagree beyond `1e-5`
/// relative.
pub fn wronskian_with_method<R: Real>(
    funcs: &[BasisFunction<R>],
    h: R,
    method: WronskianMethod,
) -> Result<WronskianReport<R>> {
    let n = funcs.len();
    if n == 0 || n > 4 {
        return Err(Error::Domain(format!(
            "wronskian expects 1..=4 functions, got {n}"
        )));
    }
    let mut m = [[R::zero(); 4]; 4];
    for (j, f) in funcs.iter().enumerate() {
        let analytic = matches!(f, BasisFunction::F0 | BasisFunction::Fcc);
        let col = match method {
            // the FD route still differentiates f0 and fCC exactly; only
            // the parametrized functions go through the stencils
            WronskianMethod::FiniteDifference if !analytic => {
                let (col, disagreement) = fd_derivs(f, h, n - 1)?;
                if disagreement > lit(1e-5) {
                    return Err(Error::IllConditioned(format!(
                        "finite-difference extrapolation disagrees by {disagreement:e} at h = {h}"
                    )));
                }
                col
            }
            _ => f.derivs(h)?,
        };
        for (k, row) in m.iter_mut().enumerate().take(n) {
            row[j] = col[k];
        }
    }
    let value = det_small(&mut m, n);
    Ok(WronskianReport { h, value, order: n, method })
}

/// Wronskian with analytic derivatives (the default path).
pub fn wronskian<R: Real>(funcs: &[BasisFunction<R>], h: R) -> Result<WronskianReport<R>> {
    wronskian_with_method(funcs, h, WronskianMethod::AnalyticDerivatives)
}

/// Scans the interval for a point where `|W|` exceeds the witness
/// threshold. `true` comes with the witness; `false` only means no
/// certificate was found, not dependence.
pub fn independence_certificate<R: Real>(
    funcs: &[BasisFunction<R>],
    lo: R,
    hi: R,
    samples: usize,
) -> (bool, Option<WronskianReport<R>>) {
    let n = samples.max(4);
    for k in 1..=n {
        let t = lit::<R>(k as f64) / lit::<R>((n + 1) as f64);
        let h = lo + (hi - lo) * t;
        if let Ok(report) = wronskian(funcs, h) {
            if report.value.abs() > lit(WITNESS_TOL) {
                return (true, Some(report));
            }
        }
    }
    (false, None)
}

/// One isolated zero of the Melnikov function.
#[derive(Debug, Clone, Copy)]
pub struct Zero<R> {
    pub h: R,
    pub residual: R,
    pub derivative: R,
    pub simple: bool,
}

/// All zeros found by a scan, with the brackets used and advisories.
#[derive(Debug, Clone)]
pub struct ZeroSet<R> {
    pub zeros: Vec<Zero<R>>,
    pub brackets: Vec<(R, R)>,
    pub advisories: Vec<String>,
}

/// Options of the zero scan.
#[derive(Debug, Clone, Copy)]
pub struct ZeroScan<R> {
    /// Number of grid points (at least 16).
    pub grid: usize,
    /// Scan cap for unbounded domains; defaults to ten times the unit
    /// scale when absent.
    pub cap: Option<R>,
}

impl<R: Real> Default for ZeroScan<R> {
    fn default() -> Self {
        ZeroScan { grid: 256, cap: None }
    }
}

/// Scans the domain interior for sign changes of `M` and refines each
/// bracket by Brent's method. Non-simple zeros are kept but flagged.
pub fn find_zeros<R: Real>(form: &MelnikovForm<R>, scan: ZeroScan<R>) -> Result<ZeroSet<R>> {
    if scan.grid < 16 {
        return Err(Error::Domain("zero scan needs a grid of at least 16".into()));
    }
    let lo = form.domain.lower;
    let hi = if form.domain.upper.is_finite() {
        form.domain.upper
    } else {
        scan.cap.unwrap_or_else(|| lit(DEFAULT_UNBOUNDED_CAP))
    };
    let span = hi - lo;
    let delta = span * lit::<R>(1e-6);
    let a = lo + delta;
    let b = hi - delta;

    let mut advisories = Vec::new();
    let eval = |h: R| eval_melnikov(form, h);

    if form.coeffs.iter().all(|k| k.abs() == R::zero()) {
        advisories.push("melnikov function is identically zero; no isolated zeros".into());
        return Ok(ZeroSet { zeros: Vec::new(), brackets: Vec::new(), advisories });
    }

    let n = scan.grid;
    let mut grid = Vec::with_capacity(n);
    for k in 0..n {
        let t = lit::<R>(k as f64) / lit::<R>((n - 1) as f64);
        let h = a + (b - a) * t;
        grid.push((h, eval(h)?));
    }

    let mut brackets: Vec<(R, R)> = Vec::new();
    let mut last_bracket_end: Option<usize> = None;
    for i in 0..n - 1 {
        let (h0, m0) = grid[i];
        let (h1, m1) = grid[i + 1];
        if m0 == R::zero() {
            continue; // handled as an exact grid hit below
        }
        if (m0 > R::zero()) != (m1 > R::zero()) {
            if last_bracket_end == Some(i) {
                advisories.push(format!(
                    "adjacent sign-change brackets touch near h = {h0}; grid may be too coarse"
                ));
            }
            brackets.push((h0, h1));
            last_bracket_end = Some(i + 1);
        }
    }

    let mut zeros = Vec::new();
    let fd_step = (span * lit::<R>(1e-7)).max(lit(1e-9));
    let push_zero = |h: R, residual: R, zeros: &mut Vec<Zero<R>>, advisories: &mut Vec<String>| -> Result<()> {
        let hp = (h + fd_step).min(b);
        let hm = (h - fd_step).max(a);
        let derivative = (eval(hp)? - eval(hm)?) / (hp - hm);
        let simple = derivative.abs() > lit(SIMPLE_TOL);
        if !simple {
            advisories.push(format!("zero at h = {h} is not simple (|M'| = {derivative:e})"));
        }
        if residual.abs() > lit(ROOT_TOL) {
            advisories.push(format!("zero at h = {h} carries residual {residual:e}"));
        }
        zeros.push(Zero { h, residual: residual.abs(), derivative, simple });
        Ok(())
    };

    for &(h, m) in &grid {
        if m == R::zero() {
            push_zero(h, R::zero(), &mut zeros, &mut advisories)?;
        }
    }
    for &(ha, hb) in &brackets {
        let sol = brent(
            |h| eval_melnikov(form, h).unwrap_or(R::nan()),
            ha,
            hb,
            lit(1e-14),
            200,
        )
        .ok_or_else(|| Error::Domain("bracket lost its sign change during refinement".into()))?;
        push_zero(sol.root, sol.f_root, &mut zeros, &mut advisories)?;
    }
    zeros.sort_by(|p, q| p.h.partial_cmp(&q.h).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ZeroSet { zeros, brackets, advisories })
}

/// Which parameter the fourth design column drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignConvention {
    /// Free parameters `(p_C, p_R, p_L, r_L)`, everything else zero.
    FreeRl,
    /// Fallback: `(p_C, p_R, p_L, r_R)`.
    FreeRr,
}

/// A designed perturbation realizing the prescribed zeros.
#[derive(Debug, Clone)]
pub struct Design<R> {
    pub left: ZonePerturbation<R>,
    pub center: ZonePerturbation<R>,
    pub right: ZonePerturbation<R>,
    pub form: MelnikovForm<R>,
    pub parameters: [R; 4],
    pub convention: DesignConvention,
}

fn pert_from_parameters<R: Real>(
    v: [R; 4],
    convention: DesignConvention,
) -> [ZonePerturbation<R>; 3] {
    let z = R::zero();
    let center = ZonePerturbation::new(v[0], z, z, z, z, z);
    let mut right = ZonePerturbation::new(v[1], z, z, z, z, z);
    let mut left = ZonePerturbation::new(v[2], z, z, z, z, z);
    match convention {
        DesignConvention::FreeRl => left.r = v[3],
        DesignConvention::FreeRr => right.r = v[3],
    }
    [left, center, right]
}

fn design_with_convention<R: Real>(
    sys: &ThreeZoneSystem<R>,
    targets: &[R],
    convention: DesignConvention,
) -> Result<Design<R>> {
    // response matrix: column j = M(h_i) with the j-th free parameter = 1
    let t = targets.len();
    let mut a = [[R::zero(); 4]; 3];
    for j in 0..4 {
        let mut v = [R::zero(); 4];
        v[j] = R::one();
        let [pl, pc, pr] = pert_from_parameters(v, convention);
        let probe = sys.with_perturbation(pl, pc, pr, R::zero());
        let form = melnikov_coefficients(&probe)?;
        for (i, &h) in targets.iter().enumerate() {
            a[i][j] = eval_melnikov(&form, h)?;
        }
    }

    // normal matrix A^T A and its eigendecomposition
    let mut ata = [[R::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = R::zero();
            for row in a.iter().take(t) {
                s = s + row[i] * row[j];
            }
            ata[i][j] = s;
        }
    }
    let (vals, vecs) = jacobi_symmetric_4(ata);
    let scale = vals[3].max(lit(1e-300));
    let rank = vals.iter().filter(|&&l| l > scale * lit(1e-24)).count();
    if rank < t {
        return Err(Error::SingularDesign);
    }
    let mut v = vecs[0];

    // normalize to unit max parameter magnitude
    let mut maxabs = R::zero();
    for &x in &v {
        maxabs = maxabs.max(x.abs());
    }
    if maxabs == R::zero() {
        return Err(Error::NonInvertibleConvention);
    }
    for x in &mut v {
        *x = *x / maxabs;
    }

    let [pl, pc, pr] = pert_from_parameters(v, convention);
    let designed = sys.with_perturbation(pl, pc, pr, R::zero());
    let mut form = melnikov_coefficients(&designed)?;

    // deterministic sign: k0 >= 0, falling back to the first nonzero
    // coefficient
    let lead = form
        .coeffs
        .iter()
        .find(|k| k.abs() > lit(1e-14))
        .copied()
        .unwrap_or(R::zero());
    if lead < R::zero() {
        for x in &mut v {
            *x = -*x;
        }
        for k in &mut form.coeffs {
            *k = -*k;
        }
    }
    let [pl, pc, pr] = pert_from_parameters(v, convention);

    // the zeros must actually be realized
    for &h in targets {
        let m = eval_melnikov(&form, h)?;
        if m.abs() > lit(1e-9) {
            return Err(Error::NonInvertibleConvention);
        }
    }

    Ok(Design {
        left: pl,
        center: pc,
        right: pr,
        form,
        parameters: v,
        convention,
    })
}

/// Designs a perturbation whose Melnikov function vanishes at the given
/// targets (one to three distinct interior points). Only `p_C`, `p_R`,
/// `p_L` and one `r` coefficient are used; the result is normalized to
/// unit max parameter and signed so the leading coefficient is positive.
pub fn design_perturbation<R: Real>(
    sys: &ThreeZoneSystem<R>,
    targets: &[R],
) -> Result<Design<R>> {
    if targets.is_empty() || targets.len() > 3 {
        return Err(Error::InvalidTargets(format!(
            "need between 1 and 3 targets, got {}",
            targets.len()
        )));
    }
    let base_form = melnikov_coefficients(sys)?;
    let domain = &base_form.domain;
    for (i, &h) in targets.iter().enumerate() {
        if !domain.contains(h) {
            return Err(Error::InvalidTargets(format!(
                "target {h} outside the domain (0, {})",
                domain.upper
            )));
        }
        for &g in &targets[..i] {
            if (h - g).abs() < lit(1e-9) {
                return Err(Error::InvalidTargets(format!("repeated target {h}")));
            }
        }
    }

    // precondition: the basis must certify independence somewhere
    let hi = if domain.upper.is_finite() {
        domain.upper
    } else {
        let mut m = lit::<R>(DEFAULT_UNBOUNDED_CAP);
        for &h in targets {
            m = m.max(h * lit(2.0));
        }
        m
    };
    let (ok, _) = independence_certificate(&base_form.basis, domain.lower, hi, 64);
    if !ok {
        return Err(Error::SingularDesign);
    }

    match design_with_convention(sys, targets, DesignConvention::FreeRl) {
        Ok(design) => Ok(design),
        Err(Error::SingularDesign) => Err(Error::SingularDesign),
        Err(_) => design_with_convention(sys, targets, DesignConvention::FreeRr),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reflect;
    use crate::normal_form::to_normal_form;
    use crate::scenarios;

    #[test]
    fn single_function_wronskian_is_the_function() {
        let r = wronskian(&[BasisFunction::<f64>::F0], 1.0).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.order, 1);
    }

    #[test]
    fn printed_wronskian_values_reproduce() {
        // each benchmark pins the function set, the evaluation point and
        // the published value (tolerance: half a unit in the last digit)
        for name in scenarios::NAMES {
            let golden = scenarios::paper_wronskian(name).unwrap();
            let rep = wronskian(&golden.basis, golden.at).unwrap();
            assert!(
                (rep.value - golden.value).abs() <= golden.tol,
                "{name}: W({}) = {} vs printed {} +- {}",
                golden.at,
                rep.value,
                golden.value,
                golden.tol
            );
            assert_eq!(rep.value.signum(), golden.value.signum(), "{name} sign");
        }
    }

    #[test]
    fn finite_difference_agrees_with_analytic() {
        for name in ["scs-a", "ccs-d", "ccc-b"] {
            let golden = scenarios::paper_wronskian(name).unwrap();
            let a = wronskian(&golden.basis, golden.at).unwrap();
            let f = wronskian_with_method(
                &golden.basis,
                golden.at,
                WronskianMethod::FiniteDifference,
            )
            .unwrap();
            assert!(
                (a.value - f.value).abs() <= 2e-4 * a.value.abs().max(1.0),
                "{name}: analytic {} vs fd {}",
                a.value,
                f.value
            );
        }
    }

    #[test]
    fn duplicated_functions_give_no_certificate() {
        let funcs = [BasisFunction::<f64>::F0, BasisFunction::F0];
        let (ok, _) = independence_certificate(&funcs, 0.0, 1.0, 32);
        assert!(!ok);
    }

    #[test]
    fn benchmark_bases_certify_independence() {
        for name in scenarios::NAMES {
            let sys = scenarios::builtin(name).unwrap();
            let form = melnikov_coefficients(&sys).unwrap();
            let hi = if form.domain.upper.is_finite() { form.domain.upper } else { 4.0 };
            let (ok, witness) = independence_certificate(&form.basis, 0.0, hi, 64);
            assert!(ok, "{name}");
            assert!(witness.unwrap().value.abs() > WITNESS_TOL);
        }
    }

    #[test]
    fn positive_k0_alone_has_no_zeros() {
        let sys = scenarios::builtin("scs-a").unwrap();
        let mut form = melnikov_coefficients(&sys).unwrap();
        form.coeffs = vec![1.0, 0.0, 0.0, 0.0];
        let zs = find_zeros(&form, ZeroScan::default()).unwrap();
        assert!(zs.zeros.is_empty());
    }

    #[test]
    fn identically_zero_form_reports_an_advisory() {
        let sys = scenarios::builtin("scs-a").unwrap();
        let form = melnikov_coefficients(&sys).unwrap();
        let zs = find_zeros(&form, ZeroScan::default()).unwrap();
        assert!(zs.zeros.is_empty());
        assert!(!zs.advisories.is_empty());
    }

    #[test]
    fn design_roundtrip_on_each_class() {
        for (name, targets) in [
            ("scs-a", vec![0.2, 0.5, 0.8]),
            ("ccs-c", vec![0.2, 0.5, 0.8]),
            ("ccs-d", vec![0.2, 0.5, 0.8]),
            ("ccc-a", vec![0.5, 1.0, 2.0]),
            ("ccc-c", vec![0.5, 1.0, 2.0]),
            ("scs-b", vec![0.3, 0.7]),
        ] {
            let sys = scenarios::builtin(name).unwrap();
            let design = design_perturbation(&sys, &targets).unwrap();
            for &h in &targets {
                let m = eval_melnikov(&design.form, h).unwrap();
                assert!(m.abs() <= 1e-9, "{name}: |M({h})| = {m:e}");
            }
            let zs = find_zeros(&design.form, ZeroScan { grid: 512, cap: Some(4.0) }).unwrap();
            assert_eq!(zs.zeros.len(), targets.len(), "{name}: {:?}", zs.zeros);
            for (z, &t) in zs.zeros.iter().zip(targets.iter()) {
                assert!((z.h - t).abs() < 1e-8, "{name}: {} vs {t}", z.h);
                assert!(z.simple, "{name}: zero at {} not simple", z.h);
            }
        }
    }

    #[test]
    fn repeated_targets_are_rejected() {
        let sys = scenarios::builtin("scs-a").unwrap();
        assert!(matches!(
            design_perturbation(&sys, &[0.3, 0.3, 0.8]),
            Err(Error::InvalidTargets(_))
        ));
        assert!(matches!(
            design_perturbation(&sys, &[0.3, 1.5, 0.8]),
            Err(Error::InvalidTargets(_))
        ));
    }

    #[test]
    fn zero_set_is_invariant_under_positive_scaling() {
        let sys = scenarios::builtin("ccs-c").unwrap();
        let design = design_perturbation(&sys, &[0.25, 0.55, 0.85]).unwrap();
        let scaled = sys.with_perturbation(
            design.left.scale(3.7),
            design.center.scale(3.7),
            design.right.scale(3.7),
            0.0,
        );
        let sform = melnikov_coefficients(&scaled).unwrap();
        let z1 = find_zeros(&design.form, ZeroScan::default()).unwrap();
        let z2 = find_zeros(&sform, ZeroScan::default()).unwrap();
        assert_eq!(z1.zeros.len(), z2.zeros.len());
        for (a, b) in z1.zeros.iter().zip(z2.zeros.iter()) {
            assert!((a.h - b.h).abs() < 1e-10);
        }
    }

    #[test]
    fn reflection_preserves_the_zero_set() {
        let sys = scenarios::builtin("scs-a").unwrap();
        let design = design_perturbation(&sys, &[0.2, 0.5, 0.8]).unwrap();
        let designed = sys.with_perturbation(design.left, design.center, design.right, 0.0);
        let reflected = reflect(&designed);
        let nf = to_normal_form(&reflected).unwrap();
        let rform = melnikov_coefficients(&nf.system).unwrap();
        let z = find_zeros(&rform, ZeroScan::default()).unwrap();
        assert_eq!(z.zeros.len(), 3, "{:?}", z.zeros);
        for (zero, target) in z.zeros.iter().zip([0.2, 0.5, 0.8]) {
            assert!((zero.h - target).abs() < 1e-8, "{} vs {target}", zero.h);
        }
    }
}
