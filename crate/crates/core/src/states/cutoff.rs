/// `exp(-1/t)` for `t > 0`, else 0.
fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth monotone ramp with `χ = 0` on `[0, 1]` and `χ = 1` on `[2, ∞)`.
pub fn cutoff_chi(x: f64) -> f64 {
    let (a, b) = (bump(x - 1.0), bump(2.0 - x));
    a / (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_values_and_midpoint() {
        assert_eq!(cutoff_chi(0.0), 0.0);
        assert_eq!(cutoff_chi(0.5), 0.0);
        assert_eq!(cutoff_chi(1.0), 0.0);
        assert_eq!(cutoff_chi(2.0), 1.0);
        assert_eq!(cutoff_chi(3.0), 1.0);
        assert!((cutoff_chi(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn monotone_on_dense_sample() {
        let xs: Vec<f64> = (0..=30_000).map(|k| k as f64 * 1e-4).collect();
        for w in xs.windows(2) {
            let (a, b) = (cutoff_chi(w[0]), cutoff_chi(w[1]));
            assert!(b >= a && (0.0..=1.0).contains(&a));
        }
    }
}
