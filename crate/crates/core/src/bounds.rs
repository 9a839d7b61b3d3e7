//! Finite-blocklength bounds for detection and decoding on the BI-AWGN channel.
//!
//! * Genie converse on the blocklength (and its inverse, the minimum SNR).
//! * Union-bound achievability for decoder-aided detection, with the
//!   code-size search that combines the detection limit with a synchronous
//!   coding bound.
//! * Monte Carlo dependency-testing (achievability) and meta-converse bounds
//!   on the code size, both driven by samples of the information density
//!   under equiprobable BPSK inputs.
//!
//! Code sizes are carried as integer-valued `f64` so that sizes beyond
//! `u64` (up to `2^n`) stay representable.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::numerics::{ln_q, q_func, q_inv, softplus};
use crate::par::{self, Execution};
use crate::rng::{GaussianSource, Stream};

/// Smallest trial count accepted by the Monte Carlo coding bounds.
pub const MIN_DENSITY_TRIALS: u64 = 10_000;

/// Target error rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Requirements {
    pub eps_fa: f64,
    pub eps_md: f64,
    pub eps_ie: f64,
}

impl Requirements {
    pub fn new(eps_fa: f64, eps_md: f64, eps_ie: f64) -> Result<Self> {
        for (what, v) in [("eps_fa", eps_fa), ("eps_md", eps_md), ("eps_ie", eps_ie)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain { what, value: v });
            }
        }
        Ok(Requirements {
            eps_fa,
            eps_md,
            eps_ie,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Achievability,
    Converse,
}

impl BoundKind {
    pub fn label(self) -> &'static str {
        match self {
            BoundKind::Achievability => "achievability",
            BoundKind::Converse => "converse",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundPoint {
    pub scheme: String,
    pub kind: BoundKind,
    pub n: usize,
    pub es_n0_db: f64,
    pub value: f64,
}

fn detection_gap(eps_fa: f64, eps_md: f64) -> Result<f64> {
    Ok(q_inv(eps_fa)? - q_inv(1.0 - eps_md)?)
}

/// Minimum blocklength `σ² (Q⁻¹(ε_FA) − Q⁻¹(1 − ε_MD))²` for which any
/// detector can meet both detection targets. Not rounded.
pub fn min_blocklength(sigma2: f64, eps_fa: f64, eps_md: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::Domain {
            what: "noise variance",
            value: sigma2,
        });
    }
    let gap = detection_gap(eps_fa, eps_md)?;
    Ok(sigma2 * gap * gap)
}

/// Smallest integer blocklength satisfying [`min_blocklength`].
pub fn min_feasible_blocklength(sigma2: f64, eps_fa: f64, eps_md: f64) -> Result<usize> {
    Ok((min_blocklength(sigma2, eps_fa, eps_md)?.ceil() as usize).max(1))
}

/// Minimum `Es/N0` in dB for blocklength `n`; `-inf` when the targets are trivial.
pub fn min_snr_db(n: usize, eps_fa: f64, eps_md: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain {
            what: "blocklength",
            value: 0.0,
        });
    }
    let gap = detection_gap(eps_fa, eps_md)?;
    Ok(10.0 * (gap * gap / (2.0 * n as f64)).log10())
}

/// Union-bound threshold `γ = √(nσ²) Q⁻¹(ε_FA / M)` for decoder-aided detection.
pub fn dad_gamma(n: usize, sigma2: f64, eps_fa: f64, m: f64) -> Result<f64> {
    if !(m >= 1.0) {
        return Err(Error::Domain {
            what: "code size",
            value: m,
        });
    }
    Ok((n as f64 * sigma2).sqrt() * q_inv(eps_fa / m)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DadErrorBounds {
    /// `min(1, M Q(γ / √(nσ²)))`.
    pub pfa_ub: f64,
    /// `1 − Q((γ − n) / √(nσ²))`.
    pub pmd_ub: f64,
}

impl DadErrorBounds {
    /// `P_IE ≤ P_MD + P_CW`, clipped to 1.
    pub fn pie_ub(&self, pcw_ub: f64) -> f64 {
        (self.pmd_ub + pcw_ub).min(1.0)
    }
}

pub fn dad_error_bounds(n: usize, sigma2: f64, gamma: f64, m: f64) -> DadErrorBounds {
    let scale = (n as f64 * sigma2).sqrt();
    DadErrorBounds {
        pfa_ub: (m * q_func(gamma / scale)).clamp(0.0, 1.0),
        // 1 − Q(x) = Q(−x), without cancellation
        pmd_ub: q_func((n as f64 - gamma) / scale).clamp(0.0, 1.0),
    }
}

/// Detection-limited code size `⌊ε_FA / Q(Q⁻¹(1 − ε_MD) + √(n/σ²))⌋`.
pub fn dad_detection_limit(n: usize, sigma2: f64, eps_fa: f64, eps_md: f64) -> Result<f64> {
    let arg = q_inv(1.0 - eps_md)? + (n as f64 / sigma2).sqrt();
    Ok((eps_fa.ln() - ln_q(arg)).exp().floor())
}

/// Largest code size meeting all three targets under decoder-aided detection.
///
/// `m_star(p_e, n, σ²)` must return an achievable synchronous code size at
/// codeword error `p_e`. The search starts at the detection limit and
/// iterates `M ← min(D, M*(p̃_e(M)))` until the current `M` satisfies both
/// terms. Feasibility is downward closed in `M`, so a final bisection between
/// the last infeasible and the first feasible iterate recovers the largest
/// feasible size. Returns 0 when nothing works.
pub fn dad_max_code_size<F>(n: usize, sigma2: f64, req: &Requirements, mut m_star: F) -> Result<f64>
where
    F: FnMut(f64, usize, f64) -> f64,
{
    if (n as f64) < min_blocklength(sigma2, req.eps_fa, req.eps_md)? {
        return Ok(0.0);
    }
    // a binary code of length n has at most 2^n codewords
    let limit = dad_detection_limit(n, sigma2, req.eps_fa, req.eps_md)?
        .min(2f64.powi(n.min(1000) as i32));
    if limit < 1.0 {
        return Ok(0.0);
    }
    let root_snr = (n as f64 / sigma2).sqrt();
    let mut decoding_limit = |m: f64| -> Result<f64> {
        let pe = req.eps_ie - 1.0 + q_func(q_inv(req.eps_fa / m)? - root_snr);
        Ok(if pe > 0.0 { m_star(pe.min(1.0), n, sigma2).floor() } else { 0.0 })
    };

    let mut m = limit;
    let mut infeasible: Option<f64> = None;
    let mut feasible = None;
    for _ in 0..100 {
        let cap = decoding_limit(m)?;
        if m <= cap {
            feasible = Some(m);
            break;
        }
        infeasible = Some(m);
        m = cap.min(limit);
        if m < 1.0 {
            return Ok(0.0);
        }
    }
    let Some(mut lo) = feasible else {
        return Ok(0.0);
    };
    if let Some(mut hi) = infeasible {
        while hi - lo > 1.0 && (hi - lo) > 1e-12 * lo {
            let mid = integer_midpoint(lo, hi);
            if mid <= decoding_limit(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(lo)
}

/// Midpoint for bisection on integer-valued sizes spanning many decades.
fn integer_midpoint(lo: f64, hi: f64) -> f64 {
    let mid = if hi > 4.0 * lo.max(1.0) {
        (lo.max(1.0) * hi).sqrt()
    } else {
        0.5 * (lo + hi)
    };
    mid.floor().clamp(lo + 1.0, hi - 1.0)
}

/// `P_IE` bracket from detection and decoding error rates:
/// `max(P_MD, P_CW) ≤ P_IE ≤ P_MD + P_CW`.
pub fn pie_sandwich(pmd: f64, pcw_lower: f64, pcw_upper: f64) -> (f64, f64) {
    (pmd.max(pcw_lower), (pmd + pcw_upper).min(1.0))
}

/// Information density of one BI-AWGN use with input `+1`:
/// `ln 2 − ln(1 + e^{−2y/σ²})`.
fn density_term(y: f64, sigma2: f64) -> f64 {
    LN_2 - softplus(-2.0 * y / sigma2)
}

/// Sorted samples of the information density `i(Xⁿ; Yⁿ)` under equiprobable
/// inputs. By symmetry of the channel the all-plus input is used throughout.
#[derive(Debug, Clone)]
pub struct DensitySample {
    n: usize,
    sigma2: f64,
    sorted: Vec<f64>,
    /// `tail[j] = Σ_{l ≥ j} e^{−i_l}`
    tail: Vec<f64>,
    /// `tail2[j] = Σ_{l ≥ j} e^{−2 i_l}`
    tail2: Vec<f64>,
}

impl DensitySample {
    pub fn draw(n: usize, sigma2: f64, trials: u64, seed: u64, exec: Execution) -> Result<Self> {
        if trials < MIN_DENSITY_TRIALS {
            return Err(Error::InsufficientTrials {
                needed: MIN_DENSITY_TRIALS,
                got: trials,
            });
        }
        if n == 0 || !(sigma2 >= 0.0) {
            return Err(Error::Domain {
                what: "density sample parameters",
                value: sigma2,
            });
        }
        let sigma = sigma2.sqrt();
        let values = par::map_collect(exec, 0..trials, |t| {
            if sigma2 == 0.0 {
                return n as f64 * LN_2;
            }
            let mut g = GaussianSource::for_trial(seed, Stream::Density, t);
            (0..n)
                .map(|_| density_term(1.0 + sigma * g.standard_normal(), sigma2))
                .sum()
        });
        Ok(Self::from_values(n, sigma2, values))
    }

    fn from_values(n: usize, sigma2: f64, mut sorted: Vec<f64>) -> Self {
        sorted.sort_by(f64::total_cmp);
        let len = sorted.len();
        let mut tail = vec![0.0; len + 1];
        let mut tail2 = vec![0.0; len + 1];
        for j in (0..len).rev() {
            // Entries below −700 never enter a sum that matters (thresholds are ≥ −ln 2).
            let e = (-sorted[j].max(-700.0)).exp();
            tail[j] = tail[j + 1] + e;
            tail2[j] = tail2[j + 1] + e * e;
        }
        DensitySample {
            n,
            sigma2,
            sorted,
            tail,
            tail2,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn trials(&self) -> usize {
        self.sorted.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// Upper bound on code size, `2^n`.
    fn max_size(&self) -> f64 {
        2f64.powi(self.n as i32)
    }

    /// Dependency-testing error bound `E[exp(−(i − ln((M−1)/2))⁺)]` and its
    /// Monte Carlo standard error.
    pub fn dt_error(&self, m: f64) -> (f64, f64) {
        if m <= 1.0 {
            return (0.0, 0.0);
        }
        let t = ((m - 1.0) / 2.0).ln();
        let count = self.sorted.len() as f64;
        // first index with i > t
        let j = self.sorted.partition_point(|&v| v <= t);
        let below = j as f64;
        let et = t.exp();
        let mean = (below + et * self.tail[j]) / count;
        let second = (below + et * et * self.tail2[j]) / count;
        let var = (second - mean * mean).max(0.0) * count / (count - 1.0);
        (mean.min(1.0), (var / count).sqrt())
    }

    /// Largest `M` whose dependency-testing bound is at most `target`.
    pub fn dt_max_size(&self, target: f64) -> f64 {
        if self.dt_error(2.0).0 > target {
            return 1.0;
        }
        let (mut lo, mut hi) = (2.0, self.max_size() + 1.0);
        if self.dt_error(self.max_size()).0 <= target {
            return self.max_size();
        }
        while hi - lo > 1.0 && (hi - lo) > 1e-12 * lo {
            let mid = integer_midpoint(lo, hi);
            if self.dt_error(mid).0 <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// `β` of the randomized Neyman–Pearson test between the channel law and
    /// the equiprobable-input output law at type-I level `eps`, plus its
    /// standard error. The test keeps the top `(1 − eps)·N` samples, with the
    /// boundary sample weighted fractionally.
    pub fn meta_converse_beta(&self, eps: f64) -> (f64, f64) {
        let count = self.sorted.len();
        let keep = ((1.0 - eps.clamp(0.0, 1.0)) * count as f64).min(count as f64);
        let full = keep.floor() as usize;
        let frac = keep - full as f64;
        let start = count - full;
        let mut sum = self.tail[start];
        let mut sum2 = self.tail2[start];
        if frac > 0.0 && start > 0 {
            let e = (-self.sorted[start - 1].max(-700.0)).exp();
            sum += frac * e;
            sum2 += frac * frac * e * e;
        }
        let nf = count as f64;
        let mean = sum / nf;
        let var = (sum2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
        (mean, (var / nf).sqrt())
    }

    /// Meta-converse size limit `⌊1/β⌋`, capped at `2^n`.
    pub fn meta_converse_max_size(&self, eps: f64) -> f64 {
        let (beta, _) = self.meta_converse_beta(eps);
        (1.0 / beta).floor().min(self.max_size()).max(1.0)
    }

    /// Smallest average error compatible with `M` codewords under the
    /// meta-converse, i.e. the least `eps` with `β(eps) ≤ 1/M`.
    pub fn meta_converse_min_error(&self, m: f64) -> f64 {
        if m <= 1.0 {
            return 0.0;
        }
        let target = 1.0 / m;
        if self.meta_converse_beta(0.0).0 <= target {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.meta_converse_beta(mid).0 <= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// A Monte Carlo code-size bound with its uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeSizeBound {
    /// Integer-valued code size.
    pub m: f64,
    pub log2_m: f64,
    /// Bound value at `m` (error probability for DT, `β` for the meta-converse).
    pub value_at_m: f64,
    pub stderr: f64,
    /// `log2 M` range when the estimate is moved by three standard errors.
    pub log2_m_low: f64,
    pub log2_m_high: f64,
    /// Standard error exceeds 10% of the target error.
    pub insufficient: bool,
}

/// Largest `M` certified by the dependency-testing achievability bound at
/// average error `target`.
pub fn dt_bound_max_m(
    n: usize,
    sigma2: f64,
    target: f64,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<CodeSizeBound> {
    let sample = DensitySample::draw(n, sigma2, trials, seed, exec)?;
    dt_bound_from_sample(&sample, target)
}

pub fn dt_bound_from_sample(sample: &DensitySample, target: f64) -> Result<CodeSizeBound> {
    check_target(target)?;
    let m = sample.dt_max_size(target);
    let (value, se) = sample.dt_error(m);
    // the size just past m pins down where the bound crosses the target
    let (_, se_next) = sample.dt_error(m + 1.0);
    let se = se.max(se_next);
    let low = sample.dt_max_size((target - 3.0 * se).max(0.0));
    let high = sample.dt_max_size((target + 3.0 * se).min(1.0));
    Ok(CodeSizeBound {
        m,
        log2_m: m.log2(),
        value_at_m: value,
        stderr: se,
        log2_m_low: low.log2(),
        log2_m_high: high.log2(),
        insufficient: se > 0.1 * target,
    })
}

/// Meta-converse upper bound on `M` at average error `target`.
pub fn meta_converse_max_m(
    n: usize,
    sigma2: f64,
    target: f64,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<CodeSizeBound> {
    let sample = DensitySample::draw(n, sigma2, trials, seed, exec)?;
    meta_converse_from_sample(&sample, target)
}

pub fn meta_converse_from_sample(sample: &DensitySample, target: f64) -> Result<CodeSizeBound> {
    check_target(target)?;
    let nf = sample.trials() as f64;
    let (beta, se) = sample.meta_converse_beta(target);
    let m = sample.meta_converse_max_size(target);
    // quantile jitter plus the spread of the β estimate
    let shift = 3.0 * (target * (1.0 - target) / nf).sqrt();
    let cap = sample.max_size();
    let (b_lo, se_lo) = sample.meta_converse_beta((target - shift).max(0.0));
    let (b_hi, se_hi) = sample.meta_converse_beta((target + shift).min(1.0));
    let low = (1.0 / (b_lo + 3.0 * se_lo)).floor().clamp(1.0, cap);
    let high_beta = b_hi - 3.0 * se_hi;
    let high = if high_beta > 0.0 {
        (1.0 / high_beta).floor().clamp(1.0, cap)
    } else {
        cap
    };
    Ok(CodeSizeBound {
        m,
        log2_m: m.log2(),
        value_at_m: beta,
        stderr: se,
        log2_m_low: low.log2(),
        log2_m_high: high.log2(),
        insufficient: se > 0.1 * beta,
    })
}

fn check_target(target: f64) -> Result<()> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain {
            what: "target error",
            value: target,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::snr_to_sigma2;
    use approx::assert_relative_eq;

    const S2_M3DB: f64 = 0.997_631_157_484_44;

    #[test]
    fn requirements_domain() {
        assert!(Requirements::new(1e-4, 1e-4, 1e-3).is_ok());
        assert!(Requirements::new(0.0, 1e-4, 1e-3).is_err());
        assert!(Requirements::new(1e-4, 1.0, 1e-3).is_err());
    }

    #[test]
    fn blocklength_bound() {
        assert_eq!(min_blocklength(1.0, 0.5, 0.5).unwrap(), 0.0);
        let nb = min_blocklength(S2_M3DB, 1e-4, 1e-4).unwrap();
        assert_relative_eq!(nb, 55.19, max_relative = 1e-3);
        assert_relative_eq!(
            min_blocklength(2.0 * S2_M3DB, 1e-4, 1e-4).unwrap(),
            2.0 * nb,
            max_relative = 1e-14
        );
        assert_eq!(min_feasible_blocklength(S2_M3DB, 1e-4, 1e-4).unwrap(), 56);
        assert_relative_eq!(
            min_blocklength(0.6, 1e-3, 1e-5).unwrap(),
            min_blocklength(0.6, 1e-5, 1e-3).unwrap(),
            max_relative = 1e-12
        );
        assert!(min_blocklength(0.0, 0.1, 0.1).is_err());
    }

    #[test]
    fn snr_bound() {
        assert!((min_snr_db(84, 1e-4, 1e-4).unwrap() + 4.82).abs() < 0.05);
        let d = min_snr_db(21, 1e-3, 1e-3).unwrap() - min_snr_db(84, 1e-3, 1e-3).unwrap();
        assert_relative_eq!(d, 10.0 * 4f64.log10(), max_relative = 1e-12);
        assert_eq!(min_snr_db(10, 0.5, 0.5).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn gamma_and_union_bounds() {
        assert_eq!(dad_gamma(10, 1.0, 0.5, 1.0).unwrap(), 0.0);
        let g = dad_gamma(84, S2_M3DB, 1e-4, 4096.0).unwrap();
        assert_relative_eq!(g, 49.91, max_relative = 1e-2);
        assert!(dad_gamma(84, S2_M3DB, 1e-4, 8192.0).unwrap() > g);
        assert!(dad_gamma(84, S2_M3DB, 1e-4, 0.5).is_err());

        let b = dad_error_bounds(84, S2_M3DB, g, 4096.0);
        assert_relative_eq!(b.pfa_ub, 1e-4, max_relative = 1e-10);
        assert!(b.pmd_ub <= 1e-4);
        assert_relative_eq!(b.pmd_ub, 9.8e-5, max_relative = 0.05);

        let zero = dad_error_bounds(20, 0.5, 0.0, 4.0);
        assert_eq!(zero.pfa_ub, 1.0);
        assert_relative_eq!(zero.pmd_ub, q_func((20.0f64 / 0.5).sqrt()), max_relative = 1e-12);
        assert!(dad_error_bounds(84, 1.0, 40.0, 8.0).pfa_ub > dad_error_bounds(84, 1.0, 40.0, 4.0).pfa_ub);
        assert_eq!(zero.pie_ub(1.0), 1.0);
        assert_relative_eq!(zero.pie_ub(0.5), 0.5 + zero.pmd_ub);
    }

    #[test]
    fn detection_limit_value() {
        assert_eq!(dad_detection_limit(58, S2_M3DB, 1e-4, 1e-4).unwrap(), 2.0);
    }

    #[test]
    fn code_size_search() {
        let req = Requirements::new(1e-4, 1e-4, 1e-3).unwrap();
        // below the blocklength bound nothing is feasible
        assert_eq!(dad_max_code_size(50, S2_M3DB, &req, |_, _, _| 1e9).unwrap(), 0.0);
        // an unlimited decoder leaves the detection limit
        assert_eq!(dad_max_code_size(58, S2_M3DB, &req, |_, _, _| 1e9).unwrap(), 2.0);
        // decoding-limited: the answer satisfies both terms and size+1 does not
        let m_star = |pe: f64, _: usize, _: f64| (pe * 1e6).floor();
        let m = dad_max_code_size(150, 0.01, &req, m_star).unwrap();
        assert!(m >= 1.0);
        let pe = |m: f64| req.eps_ie - 1.0 + q_func(q_inv(req.eps_fa / m).unwrap() - (150.0f64 / 0.01).sqrt());
        assert!(m <= m_star(pe(m), 0, 0.0));
        assert!(m + 1.0 > m_star(pe(m + 1.0), 0, 0.0));
    }

    #[test]
    fn code_size_monotone_on_grid() {
        let s2 = snr_to_sigma2(-3.0);
        let m_star = |pe: f64, n: usize, _: f64| (pe * 2f64.powf(0.3 * n as f64)).floor().max(1.0);
        let mut prev = 0.0;
        for n in (50..=120).step_by(5) {
            let m = dad_max_code_size(n, s2, &Requirements::new(1e-4, 1e-4, 1e-3).unwrap(), m_star).unwrap();
            assert!(m >= prev, "n={n}");
            prev = m;
            let tight = dad_max_code_size(n, s2, &Requirements::new(1e-5, 1e-4, 1e-3).unwrap(), m_star).unwrap();
            assert!(tight <= m);
            let tight = dad_max_code_size(n, s2, &Requirements::new(1e-4, 1e-4, 1e-4).unwrap(), m_star).unwrap();
            assert!(tight <= m);
        }
    }

    #[test]
    fn sandwich() {
        assert_eq!(pie_sandwich(0.0, 0.3, 0.3), (0.3, 0.3));
        assert_eq!(pie_sandwich(0.3, 0.0, 0.0), (0.3, 0.3));
        let (lo, hi) = pie_sandwich(1e-4, 5e-4, 8e-4);
        assert_relative_eq!(lo, 5e-4);
        assert_relative_eq!(hi, 9e-4, max_relative = 1e-12);
        assert_eq!(pie_sandwich(0.7, 0.1, 0.6).1, 1.0);
    }

    #[test]
    fn density_sample_requires_trials() {
        assert!(matches!(
            DensitySample::draw(4, 1.0, 100, 0, Execution::Sequential),
            Err(Error::InsufficientTrials { .. })
        ));
    }

    #[test]
    fn dt_near_zero_capacity() {
        let b = dt_bound_max_m(8, 100.0, 1e-3, 20_000, 1, Execution::default()).unwrap();
        assert_eq!(b.m, 1.0);
    }

    #[test]
    fn meta_converse_noiseless() {
        let b = meta_converse_max_m(12, 0.0, 1e-3, 10_000, 1, Execution::default()).unwrap();
        // β = (1 − ε) 2^{-n}
        assert!(b.m >= 0.99 * 4096.0 && b.m <= 4096.0, "{}", b.m);
    }

    #[test]
    fn dt_rate_grows_with_snr() {
        let mut prev = 0.0;
        for db in [-6.0, -3.0, 0.0, 3.0] {
            let b = dt_bound_max_m(32, snr_to_sigma2(db), 1e-3, 20_000, 9, Execution::default()).unwrap();
            assert!(b.log2_m_high >= prev, "{db}");
            prev = b.log2_m;
        }
    }

    #[test]
    fn beta_interpolates() {
        let s = DensitySample::from_values(1, 1.0, vec![0.0, 1.0, 2.0, 3.0]);
        // keep top 2.5 samples: e^-3 + e^-2 + 0.5 e^-1
        let want = ((-3.0f64).exp() + (-2.0f64).exp() + 0.5 * (-1.0f64).exp()) / 4.0;
        assert_relative_eq!(s.meta_converse_beta(0.375).0, want, max_relative = 1e-14);
        assert_relative_eq!(s.meta_converse_beta(0.0).0, s.tail[0] / 4.0, max_relative = 1e-14);
        assert_eq!(s.meta_converse_beta(1.0).0, 0.0);
    }

    #[test]
    fn dt_error_matches_direct_average() {
        let s = DensitySample::draw(6, 0.8, 10_000, 4, Execution::default()).unwrap();
        for m in [2.0, 5.0, 17.0, 40.0] {
            let t: f64 = ((m - 1.0) / 2.0f64).ln();
            let direct = s.values().iter().map(|i| (-(i - t).max(0.0)).exp()).sum::<f64>() / 10_000.0;
            assert_relative_eq!(s.dt_error(m).0, direct, max_relative = 1e-10);
        }
        let (target, m) = (1e-2, s.dt_max_size(1e-2));
        assert!(s.dt_error(m).0 <= target && s.dt_error(m + 1.0).0 > target);
    }

    #[test]
    fn meta_converse_min_error_inverts_size() {
        let s = DensitySample::draw(16, 1.0, 10_000, 4, Execution::default()).unwrap();
        let m = s.meta_converse_max_size(1e-2);
        let eps = s.meta_converse_min_error(m);
        assert!(eps <= 1e-2 + 1e-9);
        assert!(s.meta_converse_min_error(m * 4.0) > eps);
    }
}
