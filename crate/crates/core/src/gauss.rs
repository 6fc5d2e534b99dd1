//! Univariate and bivariate standard normal densities and tails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{domain, Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_94;

pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Upper tail `P(Z > x)`.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `ln P(Z > x)`, finite far beyond the underflow of [`norm_sf`].
pub fn ln_norm_sf(x: f64) -> f64 {
    if x < 30.0 {
        return norm_sf(x).ln();
    }
    // Mills ratio series, relative error below 1e-12 for x >= 30
    let r = 1.0 / (x * x);
    let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
    -0.5 * x * x - (x / FRAC_1_SQRT_2PI).ln() + series.ln()
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("correlation must lie in (-1, 1), got {rho}")))
    }
}

/// Density of a standard bivariate normal with correlation `rho`.
pub fn bvn_pdf(x: f64, y: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let one_minus = 1.0 - rho * rho;
    let q = (x * x - 2.0 * rho * x * y + y * y) / (2.0 * one_minus);
    Ok((-q).exp() / (2.0 * PI * one_minus.sqrt()))
}

/// Upper orthant probability `P(X1 > h, X2 > k)` for a standard bivariate
/// normal with correlation `rho`.
///
/// Conditions on `X1 = x` and integrates `phi(x) * P(X2 > k | x)` over
/// `(h, h + 40]` with adaptive Gauss-Kronrod (7/15) bisection. The tolerance
/// is relative to the running estimate, so tiny tails keep full precision.
pub fn bvn_tail(h: f64, k: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if h.is_nan() || k.is_nan() {
        return Err(domain("bvn_tail arguments must not be NaN"));
    }
    if h == f64::INFINITY || k == f64::INFINITY {
        return Ok(0.0);
    }
    let h = h.max(-40.0);
    let k = k.max(-40.0);
    let s = (1.0 - rho * rho).sqrt();
    let f = |x: f64| norm_pdf(x) * norm_sf((k - rho * x) / s);
    // Break points where the integrand changes shape: the mode region of
    // phi near h and the switch of the conditional tail near k / rho.
    let mut cuts = vec![h, h + 40.0];
    for c in [h + 1.0, h + 4.0, h + 10.0] {
        cuts.push(c);
    }
    if rho != 0.0 {
        let knee = k / rho;
        if knee > h && knee < h + 40.0 {
            cuts.push(knee);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += adaptive_gk(&f, w[0], w[1], 1e-13, 4000)?;
    }
    Ok(total.clamp(0.0, 1.0))
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_9,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive bisection on the interval with the largest error estimate.
pub(crate) fn adaptive_gk(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.abs() || err < 1e-300 {
            return Ok(total);
        }
        if parts.len() >= max_intervals {
            return Err(Error::AccuracyNotReached {
                intervals: parts.len(),
                estimate: total,
                error: err,
            });
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sf_reference_values() {
        // mpmath 0.5*erfc(x/sqrt(2)) at 50 digits
        let refs = [
            (0.0, 0.5),
            (1.0, 0.158_655_253_931_457_05),
            (4.0, 3.167_124_183_311_992e-5),
            (8.0, 6.220_960_574_271_784_1e-16),
            (12.0, 1.776_482_112_077_679_4e-33),
            (-3.0, 0.998_650_101_968_369_9),
        ];
        for (x, want) in refs {
            let got = norm_sf(x);
            assert!(((got - want) / want).abs() < 1e-12, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn log_tail_is_continuous() {
        for x in [-2.0, 0.0, 5.0, 29.0] {
            assert!((ln_norm_sf(x) - norm_sf(x).ln()).abs() < 1e-12);
        }
        let below = ln_norm_sf(30.0 - 1e-9);
        let above = ln_norm_sf(30.0);
        assert!((below - above).abs() < 1e-6);
        assert!(ln_norm_sf(100.0).is_finite());
    }

    #[test]
    fn pdf_examples() {
        let at_origin = bvn_pdf(0.0, 0.0, 0.0).unwrap();
        assert!((at_origin - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let a = bvn_pdf(1.0, 2.0, 0.3).unwrap();
        let b = bvn_pdf(2.0, 1.0, 0.3).unwrap();
        assert_eq!(a, b);
        // exp(-1/1.5) / (2 pi sqrt(0.75))
        let want = (-2.0f64 / 3.0).exp() / (2.0 * PI * 0.75f64.sqrt());
        let got = bvn_pdf(1.0, 1.0, 0.5).unwrap();
        assert!((got - want).abs() < 1e-15);
        assert!((got - 0.094_353_897_709).abs() < 1e-11);
        assert!(bvn_pdf(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn tail_factorizes_under_independence() {
        for (h, k) in [(0.0, 0.0), (1.0, -0.5), (4.0, 6.0), (-2.0, 3.0), (8.0, 8.0)] {
            let got = bvn_tail(h, k, 0.0).unwrap();
            let want = norm_sf(h) * norm_sf(k);
            assert!(((got - want) / want).abs() < 1e-11, "({h},{k}): {got} vs {want}");
        }
    }

    #[test]
    fn orthant_identity() {
        for rho in [-0.9, -0.5, 0.0, 0.3, 0.5, 0.95] {
            let got = bvn_tail(0.0, 0.0, rho).unwrap();
            let want = 0.25 + f64::asin(rho) / (2.0 * PI);
            assert!((got - want).abs() < 1e-12, "rho={rho}");
        }
        assert!((bvn_tail(0.0, 0.0, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tail_edges() {
        assert_eq!(bvn_tail(f64::INFINITY, 0.0, 0.2).unwrap(), 0.0);
        assert!(bvn_tail(60.0, 0.0, 0.2).unwrap() < 1e-300);
        let all = bvn_tail(-12.0, -12.0, 0.7).unwrap();
        assert!((1.0 - 1e-6..=1.0).contains(&all));
        assert!(bvn_tail(0.0, 0.0, -1.0).is_err());
        assert_eq!(bvn_tail(1.3, -0.4, 0.6).unwrap(), bvn_tail(1.3, -0.4, 0.6).unwrap());
        let ab = bvn_tail(1.3, -0.4, 0.6).unwrap();
        let ba = bvn_tail(-0.4, 1.3, 0.6).unwrap();
        assert!((ab - ba).abs() < 1e-12);
    }
}
