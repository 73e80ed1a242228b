//! 1-D adaptive quadrature and scalar maximization used across the kernels.

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// `tol` is treated as an absolute tolerance for the segment; callers pass a
/// relative tolerance scaled by an estimate of the integral when needed.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 52)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || !delta.is_finite() {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrate `f(t) dt` over `[a, b]`, 0 < a < b, with the substitution
/// t = e^u. Power-law integrands become exponentials in u, which is the
/// natural scale for the potential kernels.
pub fn integrate_log_scale<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    assert!(a > 0.0 && b > a, "integrate_log_scale needs 0 < a < b");
    let g = |u: f64| {
        let t = u.exp();
        f(t) * t
    };
    let (ua, ub) = (a.ln(), b.ln());
    // Coarse scan for the scale of the integral, then refine with Simpson.
    let mut scale = 0.0_f64;
    const SCAN: usize = 16;
    for i in 0..=SCAN {
        let u = ua + (ub - ua) * i as f64 / SCAN as f64;
        scale = scale.max(g(u).abs());
    }
    let tol = (scale * (ub - ua)).max(1e-300) * rel_tol;
    adaptive_simpson(&g, ua, ub, tol)
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max)`. Falls back to the best sampled point when the
/// function is not unimodal, which is acceptable for the bracketed pieces
/// it is applied to.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut lo = a;
    let mut hi = b;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol * (1.0 + lo.abs() + hi.abs()) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let xm = 0.5 * (lo + hi);
    let fm = f(xm);
    if f1.max(f2) > fm {
        if f1 > f2 {
            (x1, f1)
        } else {
            (x2, f2)
        }
    } else {
        (xm, fm)
    }
}
