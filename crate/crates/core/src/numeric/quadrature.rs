//! Globally adaptive Gauss-Kronrod (7/15) quadrature on finite or
//! Gaussian-truncated intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub absolute_tolerance: f64,
    pub max_subdivisions: usize,
    /// Infinite limits are replaced by `mean ± truncation_sigmas * sd` of the
    /// caller-supplied [`GaussianProxy`].
    pub truncation_sigmas: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            absolute_tolerance: 1e-9,
            max_subdivisions: 200,
            truncation_sigmas: 8.5,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.absolute_tolerance > 0.0) {
            return Err(Error::invalid("absolute_tolerance", "must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions", "must be at least 1"));
        }
        if !(self.truncation_sigmas >= 6.0) {
            return Err(Error::invalid("truncation_sigmas", "must be at least 6"));
        }
        Ok(())
    }
}

/// Location and scale of the Gaussian factor that dominates an integrand's
/// tails. Needed whenever a limit is infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProxy {
    pub mean: f64,
    pub sd: f64,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[lower, upper]` to within
/// `settings.absolute_tolerance`.
///
/// Infinite limits require `proxy`; they are truncated at
/// `proxy.mean ± settings.truncation_sigmas * proxy.sd`. A truncated range
/// that ends up empty integrates to zero, as does `lower == upper`.
pub fn integrate<F>(
    f: F,
    lower: f64,
    upper: f64,
    proxy: Option<GaussianProxy>,
    settings: &QuadratureSettings,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    settings.validate()?;
    if lower.is_nan() || upper.is_nan() {
        return Err(Error::invalid("limits", "NaN integration limit"));
    }
    if lower > upper {
        return Err(Error::invalid(
            "limits",
            format!("lower {lower} exceeds upper {upper}"),
        ));
    }
    if lower == upper {
        return Ok(0.0);
    }

    let (mut a, mut b) = (lower, upper);
    if a.is_infinite() || b.is_infinite() {
        let proxy = proxy
            .ok_or_else(|| Error::invalid("limits", "infinite limit without a Gaussian proxy"))?;
        if !(proxy.sd > 0.0 && proxy.sd.is_finite() && proxy.mean.is_finite()) {
            return Err(Error::invalid(
                "proxy",
                "proxy needs finite mean and positive sd",
            ));
        }
        let reach = settings.truncation_sigmas * proxy.sd;
        if a.is_infinite() {
            a = proxy.mean - reach;
        }
        if b.is_infinite() {
            b = proxy.mean + reach;
        }
        if a >= b {
            return Ok(0.0);
        }
    }

    let first = kronrod15(&f, a, b);
    let mut total = first.value;
    let mut total_error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    while total_error > settings.absolute_tolerance {
        if heap.len() >= settings.max_subdivisions {
            return Err(Error::Convergence {
                estimate: total,
                error_estimate: total_error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel too narrow to split further in binary64.
            return Err(Error::Convergence {
                estimate: total,
                error_estimate: total_error,
            });
        }
        let left = kronrod15(&f, worst.a, mid);
        let right = kronrod15(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);

        // Re-sum occasionally so the running totals do not drift.
        if heap.len() % 32 == 0 {
            total = heap.iter().map(|p| p.value).sum();
            total_error = heap.iter().map(|p| p.error).sum();
        }
    }

    Ok(heap.iter().map(|p| p.value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::normal::std_normal_pdf;

    fn std_proxy() -> Option<GaussianProxy> {
        Some(GaussianProxy { mean: 0.0, sd: 1.0 })
    }

    #[test]
    fn normal_density_normalizes() {
        let s = QuadratureSettings::default();
        let whole = integrate(
            std_normal_pdf,
            f64::NEG_INFINITY,
            f64::INFINITY,
            std_proxy(),
            &s,
        )
        .unwrap();
        assert!((whole - 1.0).abs() < 1e-9);
        let half = integrate(std_normal_pdf, f64::NEG_INFINITY, 0.0, std_proxy(), &s).unwrap();
        assert!((half - 0.5).abs() < 1e-9);
    }

    #[test]
    fn first_moment() {
        let s = QuadratureSettings::default();
        let f = |x: f64| x * std_normal_pdf((x - 2.0) / 3.0) / 3.0;
        let proxy = Some(GaussianProxy { mean: 2.0, sd: 3.0 });
        let m = integrate(f, f64::NEG_INFINITY, f64::INFINITY, proxy, &s).unwrap();
        assert!((m - 2.0).abs() < 1e-8, "{m}");
    }

    #[test]
    fn polynomial_exact() {
        let s = QuadratureSettings::default();
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, None, &s).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn kink_needs_subdivision() {
        let s = QuadratureSettings::default();
        let v = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, None, &s).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let s = QuadratureSettings {
            absolute_tolerance: 1e-14,
            max_subdivisions: 3,
            truncation_sigmas: 8.5,
        };
        match integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, None, &s) {
            Err(Error::Convergence { estimate, .. }) => {
                assert!((estimate - 4.0 / 3.0).abs() < 1e-2)
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_and_invalid_limits() {
        let s = QuadratureSettings::default();
        assert_eq!(integrate(|_| 1.0, 1.0, 1.0, None, &s).unwrap(), 0.0);
        assert!(integrate(|_| 1.0, 2.0, 1.0, None, &s).is_err());
        assert!(integrate(|_| 1.0, f64::NEG_INFINITY, 1.0, None, &s).is_err());
        // Entire finite range lies beyond the truncation window.
        let far = integrate(std_normal_pdf, f64::NEG_INFINITY, -20.0, std_proxy(), &s).unwrap();
        assert_eq!(far, 0.0);
    }

    #[test]
    fn settings_validation() {
        let narrow = QuadratureSettings {
            truncation_sigmas: 5.0,
            ..QuadratureSettings::default()
        };
        assert!(narrow.validate().is_err());
        let exact = QuadratureSettings {
            absolute_tolerance: 0.0,
            ..QuadratureSettings::default()
        };
        assert!(exact.validate().is_err());
    }
}
