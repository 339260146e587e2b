//! Adaptive Simpson quadrature.

/// Panels the interval is cut into before adaptive refinement starts, so that
/// oscillatory integrands cannot fool the first error estimate.
const INITIAL_PANELS: usize = 16;
const MAX_DEPTH: u32 = 48;

/// ∫ₐᵇ f(t) dt to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -integrate(f, b, a, tol);
    }
    let h = (b - a) / INITIAL_PANELS as f64;
    let panel_tol = tol / INITIAL_PANELS as f64;
    (0..INITIAL_PANELS)
        .map(|k| {
            let lo = a + k as f64 * h;
            let hi = if k + 1 == INITIAL_PANELS { b } else { lo + h };
            let (flo, fhi) = (f(lo), f(hi));
            let mid = 0.5 * (lo + hi);
            let fmid = f(mid);
            let whole = simpson(lo, hi, flo, fmid, fhi);
            refine(f, lo, hi, flo, fmid, fhi, whole, panel_tol, MAX_DEPTH)
        })
        .sum()
}

/// Like [`integrate`], but splits the interval at every breakpoint inside
/// (a, b) so kinks sit on panel edges.
pub fn integrate_with_breaks(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    if b < a {
        return -integrate_with_breaks(f, b, a, breaks, tol);
    }
    let mut edges = vec![a];
    edges.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    let pieces = (edges.len() - 1) as f64;
    edges.windows(2).map(|w| integrate(f, w[0], w[1], tol / pieces)).sum()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + refine(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(&|t| 3.0 * t * t, 0.0, 2.0, 1e-12);
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn exponential_and_oscillatory() {
        let v = integrate(&|t| (-t).exp(), 0.0, 20.0, 1e-10);
        assert!((v - (1.0 - (-20.0f64).exp())).abs() < 1e-10);
        let v = integrate(&f64::sin, 0.0, 2.0 * std::f64::consts::PI, 1e-10);
        assert!(v.abs() < 1e-10);
    }

    #[test]
    fn reversed_and_empty_intervals() {
        assert_eq!(integrate(&|t| t, 1.0, 1.0, 1e-10), 0.0);
        let v = integrate(&|t| t, 2.0, 0.0, 1e-12);
        assert!((v + 2.0).abs() < 1e-13);
    }

    #[test]
    fn kink_on_breakpoint() {
        let f = |t: f64| (t - 0.3).abs();
        let exact = 0.3 * 0.3 / 2.0 + 0.7 * 0.7 / 2.0;
        let v = integrate_with_breaks(&f, 0.0, 1.0, &[0.3, 5.0], 1e-12);
        assert!((v - exact).abs() < 1e-13);
    }
}
