//! Adaptive quadrature for closed-form profiles.

/// Adaptive Simpson rule for `∫_a^b f` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    refine(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn refine(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // the relative floor stops the recursion once round-off dominates
    let floor = 1e-15 * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `∫_0^∞ f` for an integrand decaying at least exponentially, split into unit
/// panels until one contributes less than `tol`.
pub fn integrate_decaying(f: &impl Fn(f64) -> f64, tol: f64) -> f64 {
    let mut total = 0.0;
    let mut a = 0.0;
    loop {
        let part = adaptive_simpson(f, a, a + 1.0, tol * 1e-2);
        total += part;
        a += 1.0;
        if part.abs() < tol * 1e-3 || a > 1e4 {
            return total;
        }
    }
}
