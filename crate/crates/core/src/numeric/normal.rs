//! Standard normal density, distribution and quantile functions.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// A probability strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Probability(value))
        } else {
            Err(Error::invalid(
                "probability",
                format!("{value} is not strictly between 0 and 1"),
            ))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Standard normal quantile of this probability.
    pub fn z(self) -> f64 {
        std_normal_quantile(self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

fn check_sd(sd: f64) -> Result<()> {
    if sd > 0.0 && sd.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "sd",
            format!("{sd} must be positive and finite"),
        ))
    }
}

#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

#[inline]
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(z)` without cancellation.
#[inline]
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

pub fn normal_pdf(x: f64, mean: f64, sd: f64) -> Result<f64> {
    check_sd(sd)?;
    Ok(std_normal_pdf((x - mean) / sd) / sd)
}

pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> Result<f64> {
    check_sd(sd)?;
    Ok(std_normal_cdf((x - mean) / sd))
}

pub fn normal_quantile(p: f64) -> Result<f64> {
    Probability::new(p).map(Probability::z)
}

// Wichura, AS241 (PPND16). Coefficients are kept as published.
#[allow(clippy::excessive_precision)]
const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
#[allow(clippy::excessive_precision)]
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
#[allow(clippy::excessive_precision)]
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
#[allow(clippy::excessive_precision)]
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
#[allow(clippy::excessive_precision)]
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
#[allow(clippy::excessive_precision)]
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

#[inline]
fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn as241(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let z = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -z
    } else {
        z
    }
}

/// Standard normal quantile for `p` in (0, 1): rational approximation
/// followed by one Newton step on the distribution function.
///
/// Callers must ensure `0 < p < 1`; use [`normal_quantile`] for a checked
/// entry point.
pub fn std_normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let z = as241(p);
    let density = std_normal_pdf(z);
    if density <= f64::MIN_POSITIVE {
        return z;
    }
    // Φ(z) - p, evaluated in the tail nearest z; 1 - p is exact for p >= 0.5.
    let residual = if z > 0.0 {
        (1.0 - p) - std_normal_sf(z)
    } else {
        std_normal_cdf(z) - p
    };
    z - residual / density
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Maclaurin series of erf, summed term by term; independent of libm.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        for n in 1..200 {
            term *= -x2 / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        sum * 2.0 / PI.sqrt()
    }

    fn cdf_series(z: f64) -> f64 {
        0.5 * (1.0 + erf_series(z * FRAC_1_SQRT_2))
    }

    fn bisect_quantile(p: f64, cdf: impl Fn(f64) -> f64) -> f64 {
        let (mut lo, mut hi) = (-10.0, 10.0);
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < p {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn pdf_values() {
        assert!((normal_pdf(0.0, 0.0, 1.0).unwrap() - 0.398_942_3).abs() < 1e-7);
        let expected = (-0.5f64).exp() / (2.0 * PI).sqrt();
        assert!((normal_pdf(1.0, 0.0, 1.0).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.241_970_7).abs() < 1e-7);
        for t in [0.1, 0.7, 2.5, 11.0] {
            let a = normal_pdf(3.0 + t, 3.0, 0.4).unwrap();
            let b = normal_pdf(3.0 - t, 3.0, 0.4).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn non_positive_sd_rejected() {
        for sd in [0.0, -1.0, f64::NAN] {
            assert_eq!(
                normal_pdf(0.0, 0.0, sd).unwrap_err().code(),
                "invalid-parameter"
            );
            assert_eq!(
                normal_cdf(0.0, 0.0, sd).unwrap_err().code(),
                "invalid-parameter"
            );
        }
    }

    #[test]
    fn cdf_matches_series_oracle() {
        assert_eq!(normal_cdf(0.0, 0.0, 1.0).unwrap(), 0.5);
        // The series loses digits to cancellation beyond |z| ~ 3.
        let mut z = -3.0;
        while z <= 3.0 {
            let got = std_normal_cdf(z);
            assert!((got - cdf_series(z)).abs() < 1e-12, "z={z}");
            assert!((got + std_normal_cdf(-z) - 1.0).abs() < 1e-15);
            z += 0.173;
        }
        let at = std_normal_cdf(-1.036_433_4);
        assert!((at - 0.15).abs() < 1e-7);
    }

    #[test]
    fn cdf_saturates() {
        assert_eq!(std_normal_cdf(-40.0), 0.0);
        assert_eq!(std_normal_cdf(40.0), 1.0);
    }

    #[test]
    fn quantile_against_bisection() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        let oracle = bisect_quantile(0.15, cdf_series);
        assert!((oracle - -1.036_433_4).abs() < 1e-7);
        assert!((normal_quantile(0.15).unwrap() - oracle).abs() < 1e-10);
        for p in [1e-6, 0.01, 0.05, 0.2, 0.42, 0.75, 0.8, 0.95, 0.999] {
            let oracle = bisect_quantile(p, std_normal_cdf);
            assert!(
                (normal_quantile(p).unwrap() - oracle).abs() < 1e-10,
                "p={p}"
            );
        }
    }

    #[test]
    fn quantile_rejects_boundary() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(normal_quantile(p).is_err());
        }
    }

    #[test]
    fn round_trip_on_grid() {
        let mut z = -6.0;
        while z <= 6.0 {
            let p = std_normal_cdf(z);
            let back = std_normal_quantile(p);
            // Doubles just below 1 are 2^-53 apart, so Φ(z) itself pins z down
            // only to about half an ulp of p divided by the density.
            let representable = 0.5 * f64::EPSILON * p / std_normal_pdf(z);
            assert!(
                (back - z).abs() <= 1e-9_f64.max(2.0 * representable),
                "z={z} back={back}"
            );
            if z <= 5.3 {
                assert!((back - z).abs() <= 1e-9, "z={z} back={back}");
            }
            // The complement carries full relative precision in the upper tail.
            if z >= 0.0 {
                let mirrored = -std_normal_quantile(std_normal_sf(z));
                assert!((mirrored - z).abs() <= 1e-9, "z={z} mirrored={mirrored}");
            }
            z += 0.01;
        }
        let mut k = 1e-6;
        while k < 1.0 - 1e-6 {
            let p = k;
            assert!((std_normal_cdf(std_normal_quantile(p)) - p).abs() <= 1e-10);
            k += 0.000_731;
        }
    }

    #[test]
    fn monotone_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let (a, b): (f64, f64) = (rng.random_range(-9.0..9.0), rng.random_range(-9.0..9.0));
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            assert!(std_normal_cdf(lo) <= std_normal_cdf(hi));
            let (p, q): (f64, f64) = (rng.random_range(1e-12..1.0), rng.random_range(1e-12..1.0));
            let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
            assert!(std_normal_quantile(lo) <= std_normal_quantile(hi));
        }
    }
}
