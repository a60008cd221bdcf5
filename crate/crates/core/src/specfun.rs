//! Log-gamma, digamma and gamma ratios on the positive real axis.
//!
//! Accuracy targets on `[1e-3, 1e6]`: `ln_gamma` 1e-13 relative, `digamma`
//! 1e-12 absolute. Gamma ratios are always formed in log space so that
//! large concentration sums never overflow.

use crate::error::{Result, SddError};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments at or above this use the Stirling series directly.
const STIRLING_MIN: f64 = 10.0;

/// `B_{2k} / (2k (2k-1))` for k = 1..8.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// `B_{2k} / (2k)` for k = 1..8.
const DIGAMMA_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

/// Taylor coefficients of `ln Γ(1 + z)` beyond the linear term:
/// `(-1)^k ζ(k) / k` for k = 2..30.
const LN_GAMMA_1P_COEFFS: [f64; 29] = [
    0.822_467_033_424_113_2,
    -0.400_685_634_386_531_4,
    0.270_580_808_427_784_55,
    -0.207_385_551_028_673_98,
    0.169_557_176_997_408_2,
    -0.144_049_896_768_846_12,
    0.125_509_669_524_743_04,
    -0.111_334_265_869_564_7,
    0.100_099_457_512_781_81,
    -0.090_954_017_145_829_04,
    0.083_353_840_546_109,
    -0.076_932_516_411_352_19,
    0.071_432_946_295_361_34,
    -0.066_668_705_882_420_47,
    0.062_500_955_141_213_04,
    -0.058_823_978_658_684_58,
    0.055_555_767_627_403_61,
    -0.052_631_679_379_616_66,
    0.050_000_047_698_101_69,
    -0.047_619_070_330_142_23,
    0.045_454_556_293_204_67,
    -0.043_478_266_053_040_26,
    0.041_666_669_150_341_21,
    -0.040_000_001_192_140_14,
    0.038_461_539_034_675_19,
    -0.037_037_037_312_989_33,
    0.035_714_285_847_333_36,
    -0.034_482_758_684_919_3,
    0.033_333_333_364_377_58,
];

/// Radius around 1 and 2 where the Taylor expansion replaces the shifted
/// Stirling series (which cancels badly near the zeros of `ln Γ`).
const NEAR_ZERO_RADIUS: f64 = 0.2;

fn check_domain(function: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(SddError::Domain { function, arg: x })
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_domain("ln_gamma", x)?;
    Ok(ln_gamma_pos(x))
}

/// `ψ(x) = d/dx ln Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_domain("digamma", x)?;
    Ok(digamma_pos(x))
}

/// `Γ(x + ½) / Γ(x)`.
pub fn gamma_half_ratio(x: f64) -> Result<f64> {
    Ok(GammaRatio::new(x, 0.5)?.value)
}

/// `ln(Γ(x + a) / Γ(x))` for `x > 0`, `a >= 0`.
pub fn ln_gamma_ratio(x: f64, a: f64) -> Result<f64> {
    check_domain("ln_gamma_ratio", x)?;
    if !(a >= 0.0 && a.is_finite()) {
        return Err(SddError::InvalidArgument(format!(
            "gamma ratio shift must be finite and nonnegative, got {a}"
        )));
    }
    Ok(ln_gamma_ratio_pos(x, a))
}

/// The ratio `Γ(x + a) / Γ(x)` together with its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRatio {
    pub numerator_shift: f64,
    pub value: f64,
    pub ln_value: f64,
}

impl GammaRatio {
    pub fn new(x: f64, a: f64) -> Result<Self> {
        let ln_value = ln_gamma_ratio(x, a)?;
        Ok(Self {
            numerator_shift: a,
            value: ln_value.exp(),
            ln_value,
        })
    }
}

fn stirling_correction(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in STIRLING_COEFFS.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

fn ln_gamma_1p_series(z: f64) -> f64 {
    let mut acc = 0.0;
    for c in LN_GAMMA_1P_COEFFS.iter().rev() {
        acc = acc * z + c;
    }
    z * (acc * z - EULER_GAMMA)
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x >= STIRLING_MIN {
        return (x - 0.5) * x.ln() - x + HALF_LN_2PI + stirling_correction(x);
    }
    if (x - 1.0).abs() <= NEAR_ZERO_RADIUS {
        return ln_gamma_1p_series(x - 1.0);
    }
    if (x - 2.0).abs() <= NEAR_ZERO_RADIUS {
        let z = x - 2.0;
        return z.ln_1p() + ln_gamma_1p_series(z);
    }
    // Γ(x) = Γ(x + k) / (x (x+1) ... (x+k-1))
    let mut shifted = x;
    let mut product = 1.0;
    while shifted < STIRLING_MIN {
        product *= shifted;
        shifted += 1.0;
    }
    ln_gamma_pos(shifted) - product.ln()
}

pub(crate) fn digamma_pos(x: f64) -> f64 {
    let mut shifted = x;
    let mut acc = 0.0;
    while shifted < 6.0 {
        acc -= 1.0 / shifted;
        shifted += 1.0;
    }
    let inv2 = 1.0 / (shifted * shifted);
    let mut series = 0.0;
    for c in DIGAMMA_COEFFS.iter().rev() {
        series = series * inv2 + c;
    }
    acc + shifted.ln() - 0.5 / shifted - series * inv2
}

pub(crate) fn ln_gamma_ratio_pos(x: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if x >= STIRLING_MIN {
        // Difference of two Stirling expansions, rearranged so that the
        // O(x ln x) parts cancel analytically.
        let xa = x + a;
        (x - 0.5) * (a / x).ln_1p() + a * xa.ln() - a + stirling_correction(xa)
            - stirling_correction(x)
    } else {
        ln_gamma_pos(x + a) - ln_gamma_pos(x)
    }
}

pub(crate) fn ln_gamma_half_ratio_pos(x: f64) -> f64 {
    ln_gamma_ratio_pos(x, 0.5)
}
