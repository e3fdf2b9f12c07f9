//! Scalar helpers shared by the entropy pipeline: log-gamma, stable
//! log-sum/log-diff primitives, and grid construction.
//!
//! Everything here works on natural logarithms so that quantities like
//! Gamma(3N/2) for N up to a million never leave the representable range.

pub const LN_2PI: f64 = 1.837_877_066_409_345_3;
pub const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Natural log of the Gamma function for positive arguments.
///
/// Lanczos approximation with g = 7 and the 9 Godfrey coefficients,
/// accurate to about 1e-13 relative over the positive axis. Arguments
/// are expected positive; non-positive input returns NaN.
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if !(x > 0.0) {
        return f64::NAN;
    }
    // Reflection is not needed for x > 0; evaluate the series directly.
    // For x < 0.5 use Gamma(x) = Gamma(x+1)/x to stay in the stable region.
    if x < 0.5 {
        return ln_gamma(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * LN_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

/// ln(exp(a) + exp(b)) without overflow. Either argument may be -inf.
#[inline(always)]
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// ln(exp(a) - exp(b)) for a > b; None when the difference is not positive.
#[inline(always)]
pub fn log_diff_exp(a: f64, b: f64) -> Option<f64> {
    if b == f64::NEG_INFINITY {
        return if a == f64::NEG_INFINITY { None } else { Some(a) };
    }
    if a <= b {
        return None;
    }
    // -expm1(b - a) is in (0, 1], so the outer ln is safe.
    Some(a + (-((b - a).exp_m1())).ln())
}

/// ln(sum_i exp(x_i)) over a slice, two-pass max-shifted accumulation.
/// The summation order is the slice order, so results are deterministic.
pub fn log_sum_exp_slice(xs: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &x in xs {
        if x > m {
            m = x;
        }
    }
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut s = 0.0;
    for &x in xs {
        s += (x - m).exp();
    }
    m + s.ln()
}

/// Surface area of the unit (d-1)-sphere embedded in R^d, as a natural log:
/// ln |S^{d-1}| = ln 2 + (d/2) ln pi - ln Gamma(d/2).
pub fn ln_sphere_area(d: u64) -> f64 {
    let half = d as f64 / 2.0;
    std::f64::consts::LN_2 + half * LN_PI - ln_gamma(half)
}

/// ln(n!) via ln_gamma(n + 1).
pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// k points spaced evenly on [lo, hi]; a single point collapses to lo.
pub fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k <= 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (k - 1) as f64;
    (0..k).map(|i| lo + step * i as f64).collect()
}

/// k points spaced evenly in log between lo and hi (both positive).
pub fn logspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (k - 1) as f64;
    (0..k).map(|i| (a + step * i as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_known_values() {
        // Gamma(1/2) = sqrt(pi), Gamma(1) = Gamma(2) = 1, Gamma(10) = 9!.
        assert!((ln_gamma(0.5) - 0.5723649429247001).abs() < 1e-12);
        assert!(ln_gamma(1.0).abs() < 1e-13);
        assert!(ln_gamma(2.0).abs() < 1e-13);
        assert!((ln_gamma(1.5) - (-0.12078223763524522)).abs() < 1e-12);
        assert!((ln_gamma(10.0) - 362880.0_f64.ln()).abs() < 1e-11);
        // ln(99!) to full precision.
        assert!((ln_gamma(100.0) - 359.1342053695754).abs() < 1e-9);
    }

    #[test]
    fn ln_gamma_recurrence_holds() {
        // ln Gamma(x+1) - ln Gamma(x) = ln x across scales.
        for &x in &[0.7, 1.3, 4.5, 88.0, 1234.5, 9.9e5] {
            let lhs = ln_gamma(x + 1.0) - ln_gamma(x);
            assert!(
                (lhs - x.ln()).abs() < 1e-10 * x.ln().abs().max(1.0),
                "recurrence failed at x={x}: {lhs} vs {}",
                x.ln()
            );
        }
    }

    #[test]
    fn ln_gamma_large_argument_is_finite() {
        let v = ln_gamma(1.5e6);
        assert!(v.is_finite());
        // Stirling leading order: x ln x - x.
        let stirling = 1.5e6_f64 * (1.5e6_f64).ln() - 1.5e6;
        assert!((v - stirling) / v < 1e-4);
    }

    #[test]
    fn log_sum_exp_basic_identities() {
        let l2 = std::f64::consts::LN_2;
        assert_eq!(log_sum_exp(3.0, f64::NEG_INFINITY), 3.0);
        assert_eq!(log_sum_exp(f64::NEG_INFINITY, -7.0), -7.0);
        assert_eq!(log_sum_exp(5.0, 5.0), 5.0 + l2);
        // 700-scale magnitudes must not overflow.
        let v = log_sum_exp(700.0, 700.0);
        assert!((v - (700.0 + l2)).abs() < 1e-12);
    }

    #[test]
    fn log_diff_exp_basic_identities() {
        // ln(e^2 - e^1) = 1 + ln(e - 1).
        let v = log_diff_exp(2.0, 1.0).unwrap();
        assert!((v - (1.0 + (std::f64::consts::E - 1.0).ln())).abs() < 1e-14);
        assert_eq!(log_diff_exp(2.0, 2.0), None);
        assert_eq!(log_diff_exp(1.0, 2.0), None);
        assert_eq!(log_diff_exp(3.5, f64::NEG_INFINITY), Some(3.5));
        assert_eq!(log_diff_exp(f64::NEG_INFINITY, f64::NEG_INFINITY), None);
    }

    #[test]
    fn log_sum_exp_slice_matches_pairwise() {
        let xs = [0.3, -2.0, 4.1, 4.1, -30.0];
        let mut acc = f64::NEG_INFINITY;
        for &x in &xs {
            acc = log_sum_exp(acc, x);
        }
        assert!((log_sum_exp_slice(&xs) - acc).abs() < 1e-13);
        assert_eq!(log_sum_exp_slice(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn sphere_area_low_dimensions() {
        // |S^1| = 2 pi, |S^2| = 4 pi, |S^3| = 2 pi^2.
        let pi = std::f64::consts::PI;
        assert!((ln_sphere_area(2) - (2.0 * pi).ln()).abs() < 1e-13);
        assert!((ln_sphere_area(3) - (4.0 * pi).ln()).abs() < 1e-13);
        assert!((ln_sphere_area(4) - (2.0 * pi * pi).ln()).abs() < 1e-13);
    }

    #[test]
    fn grids_have_expected_endpoints() {
        let g = linspace(1.0, 3.0, 5);
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 1.0);
        assert!((g[4] - 3.0).abs() < 1e-15);
        let lg = logspace(0.01, 100.0, 9);
        assert!((lg[4] - 1.0).abs() < 1e-12);
    }
}
