//! Gaussian tail functions and log-domain primitives.
//!
//! `q_func` is the standard Gaussian upper tail `Q(x) = P[N(0,1) > x]`,
//! evaluated through `erfc`. `q_inv` inverts it by Newton iteration on
//! `ln Q`, which stays well conditioned deep in the tails.

use std::f64::consts::{LN_2, SQRT_2};

use crate::error::{Error, Result};

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::Domain {
                what: "probability",
                value,
            })
        }
    }

    /// Clips `value` into `[0, 1]`. NaN maps to 1.
    pub fn clipped(value: f64) -> Self {
        if value.is_nan() {
            Probability(1.0)
        } else {
            Probability(value.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Gaussian upper tail probability `Q(x)`.
pub fn q_func(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// `ln Q(x)`, finite for every finite `x`.
pub fn ln_q(x: f64) -> f64 {
    if x < 37.0 {
        return q_func(x).ln();
    }
    // erfc underflows here; asymptotic series for the Mills ratio.
    let r = 1.0 / (x * x);
    let series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - 105.0 * r)));
    -0.5 * x * x - x.ln() - LN_SQRT_2PI + series.ln()
}

/// Inverse of [`q_func`] on `(0, 1)`.
pub fn q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            what: "q_inv argument",
            value: p,
        });
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        // 1 - p is exact for p in (0.5, 1).
        return Ok(-upper_tail_inverse(1.0 - p));
    }
    Ok(upper_tail_inverse(p))
}

/// Solves `Q(x) = p` for `p < 0.5`.
fn upper_tail_inverse(p: f64) -> f64 {
    let ln_p = p.ln();
    let mut x = -acklam_quantile(p);
    for _ in 0..50 {
        // d/dx ln Q(x) = -phi(x) / Q(x)
        let lq = ln_q(x);
        let ratio = (lq - (-0.5 * x * x - LN_SQRT_2PI)).exp();
        let step = (lq - ln_p) * ratio;
        x += step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Rational approximation of the standard normal quantile (relative error ~1e-9).
fn acklam_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let lower = |p: f64| {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        lower(p)
    } else if p > 1.0 - P_LOW {
        -lower(1.0 - p)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// `ln cosh(x)` without overflow.
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a - LN_2 + (-2.0 * a).exp().ln_1p()
}

/// `ln(w e^a + (1 - w) e^b)`, evaluated relative to `max(a, b)`.
pub fn log_mixture(a: f64, b: f64, w: f64) -> f64 {
    if w >= 1.0 {
        return a;
    }
    if w <= 0.0 {
        return b;
    }
    let m = a.max(b);
    m + (w * (a - m).exp() + (1.0 - w) * (b - m).exp()).ln()
}

/// `ln Σ exp(v)` over a slice; `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// `ln(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
