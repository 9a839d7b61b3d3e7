//! Detection statistics for a single slot and the threshold decision.
//!
//! All statistics are "larger means more likely active". Likelihood ratios
//! are handled in the log domain.

use crate::channel::{ChannelParams, FramePlan};
use crate::codebook::{dot, Codebook};
use crate::error::{Error, Result};
use crate::numerics::{log_cosh, log_mixture};

/// Largest code dimension for the exhaustive codebook-likelihood sum.
pub const MAX_CODEBOOK_AIDED_K: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorKind {
    /// Matched filter on the preamble only.
    Preamble,
    /// Exact log-likelihood ratio of preamble plus i.i.d. payload with
    /// `Pr{x = +1} = prior`.
    HypedExact { prior: f64 },
    /// `gamma_a · y_pᵀx_p + ‖y_c‖`.
    HypedHeuristic { gamma_a: f64 },
    /// Correlation with the best codeword.
    Dad,
    /// Codebook likelihood plus ML-codeword likelihood against the idle slot.
    CodebookAided { gamma_a: f64 },
    /// Correlation with the transmitted codeword, known to the receiver.
    Genie,
}

impl DetectorKind {
    pub fn label(&self) -> &'static str {
        match self {
            DetectorKind::Preamble => "preamble",
            DetectorKind::HypedExact { .. } => "hyped",
            DetectorKind::HypedHeuristic { .. } => "hyped-heuristic",
            DetectorKind::Dad => "dad",
            DetectorKind::CodebookAided { .. } => "codebook-aided",
            DetectorKind::Genie => "genie",
        }
    }

    fn needs_codebook(&self) -> bool {
        matches!(self, DetectorKind::Dad | DetectorKind::CodebookAided { .. })
    }
}

/// A detector kind together with its threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec {
    pub kind: DetectorKind,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Idle,
    /// Detected; carries the decoded message when a decoder is available.
    Detected(Option<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionOutcome {
    pub decision: Decision,
    pub statistic: f64,
}

/// `stat ≥ gamma` declares a transmission.
pub fn decide(stat: f64, gamma: f64, message: Option<usize>) -> DetectionOutcome {
    let decision = if stat >= gamma {
        Decision::Detected(message)
    } else {
        Decision::Idle
    };
    DetectionOutcome {
        decision,
        statistic: stat,
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

/// Preamble log-likelihood ratio `Σ (2 x_i y_i − 1) / (2σ²)`.
pub fn stat_preamble(y_p: &[f64], plan: &FramePlan, params: &ChannelParams) -> Result<f64> {
    if plan.n_p() == 0 {
        return Err(Error::EmptyPreamble);
    }
    check_len(plan.n_p(), y_p.len())?;
    let two_s2 = 2.0 * params.sigma2();
    Ok(y_p
        .iter()
        .zip(plan.preamble())
        .map(|(y, x)| (2.0 * x * y - 1.0) / two_s2)
        .sum())
}

/// Exact hybrid preamble/energy log-likelihood ratio.
///
/// `prior = 0.5` takes the `ln cosh` path; other priors use the two-point
/// mixture per payload symbol.
pub fn stat_hyped_exact(
    y: &[f64],
    plan: &FramePlan,
    params: &ChannelParams,
    prior: f64,
) -> Result<f64> {
    if !(prior > 0.0 && prior <= 1.0) {
        return Err(Error::Domain {
            what: "payload prior",
            value: prior,
        });
    }
    if prior == 0.5 {
        hyped_equal_prior(y, plan, params)
    } else {
        hyped_general_prior(y, plan, params, prior)
    }
}

fn hyped_equal_prior(y: &[f64], plan: &FramePlan, params: &ChannelParams) -> Result<f64> {
    let (y_p, y_c) = plan.split(y)?;
    let s2 = params.sigma2();
    let payload: f64 = y_c.iter().map(|v| log_cosh(v / s2)).sum();
    Ok(payload + dot(y_p, plan.preamble()) / s2 - plan.n() as f64 / (2.0 * s2))
}

fn hyped_general_prior(
    y: &[f64],
    plan: &FramePlan,
    params: &ChannelParams,
    prior: f64,
) -> Result<f64> {
    let (y_p, y_c) = plan.split(y)?;
    let s2 = params.sigma2();
    let payload: f64 = y_c
        .iter()
        .map(|v| log_mixture(v / s2, -v / s2, prior))
        .sum();
    Ok(payload + dot(y_p, plan.preamble()) / s2 - plan.n() as f64 / (2.0 * s2))
}

/// Heuristic hybrid rule `gamma_a · y_pᵀx_p + ‖y_c‖`.
pub fn stat_hyped_heuristic(y: &[f64], plan: &FramePlan, gamma_a: f64) -> Result<f64> {
    let (y_p, y_c) = plan.split(y)?;
    Ok(gamma_a * dot(y_p, plan.preamble()) + dot(y_c, y_c).sqrt())
}

/// Decoder-aided statistic `y_pᵀx_p + max_m x_{c,m}ᵀ y_c` and the maximizing message.
pub fn stat_dad(y: &[f64], cb: &Codebook, plan: &FramePlan) -> Result<(f64, usize)> {
    check_len(plan.n_c(), cb.n_c())?;
    let (y_p, y_c) = plan.split(y)?;
    let (m, corr) = cb.argmax_correlation(y_c);
    Ok((dot(y_p, plan.preamble()) + corr, m))
}

/// Log of the optimal joint detection/decoding ratio
/// `(γ_a Σ_m p(y|x_m) + max_m p(y|x_m)) / p(y|x_∅)`.
///
/// With `a_m = x_mᵀy / σ²` this is `ln(γ_a Σ e^{a_m} + e^{max a}) − n / (2σ²)`.
pub fn stat_codebook_aided(
    y: &[f64],
    cb: &Codebook,
    plan: &FramePlan,
    params: &ChannelParams,
    gamma_a: f64,
) -> Result<(f64, usize)> {
    if cb.k() > MAX_CODEBOOK_AIDED_K {
        return Err(Error::CodeTooLarge {
            k: cb.k(),
            max: MAX_CODEBOOK_AIDED_K,
        });
    }
    if !(gamma_a >= 0.0) {
        return Err(Error::Domain {
            what: "codebook weight",
            value: gamma_a,
        });
    }
    check_len(plan.n_c(), cb.n_c())?;
    let (y_p, y_c) = plan.split(y)?;
    let s2 = params.sigma2();
    let pre = dot(y_p, plan.preamble());

    let mut exps = vec![0.0; cb.size()];
    cb.correlations_into(y_c, &mut exps)?;
    let mut best = (0usize, f64::NEG_INFINITY);
    for (m, a) in exps.iter_mut().enumerate() {
        *a = (pre + *a) / s2;
        if *a > best.1 {
            best = (m, *a);
        }
    }
    let shifted: f64 = if gamma_a > 0.0 {
        exps.iter().map(|a| (a - best.1).exp()).sum()
    } else {
        0.0
    };
    let log_ratio = best.1 + (gamma_a * shifted).ln_1p() - plan.n() as f64 / (2.0 * s2);
    Ok((log_ratio, best.0))
}

/// Genie statistic `x_mᵀ y`.
pub fn stat_genie(y: &[f64], x_m: &[f64], _params: &ChannelParams) -> Result<f64> {
    check_len(x_m.len(), y.len())?;
    Ok(dot(x_m, y))
}

/// Statistic value plus the message it singles out, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub statistic: f64,
    pub message: Option<usize>,
}

/// A detector bound to its frame layout, channel and (optional) codebook.
///
/// When a codebook is attached, detectors that do not produce a message
/// themselves decode the payload by ML after a positive decision.
#[derive(Debug, Clone)]
pub struct Detector<'a> {
    kind: DetectorKind,
    plan: &'a FramePlan,
    params: &'a ChannelParams,
    codebook: Option<&'a Codebook>,
    reference: Vec<f64>,
}

impl<'a> Detector<'a> {
    pub fn new(
        kind: DetectorKind,
        plan: &'a FramePlan,
        params: &'a ChannelParams,
        codebook: Option<&'a Codebook>,
    ) -> Result<Self> {
        check_len(plan.n(), params.n())?;
        if let Some(cb) = codebook {
            check_len(plan.n_c(), cb.n_c())?;
        } else if kind.needs_codebook() {
            return Err(Error::MissingCodebook);
        }
        match kind {
            DetectorKind::Preamble if plan.n_p() == 0 => return Err(Error::EmptyPreamble),
            DetectorKind::HypedExact { prior } if !(prior > 0.0 && prior <= 1.0) => {
                return Err(Error::Domain {
                    what: "payload prior",
                    value: prior,
                })
            }
            DetectorKind::CodebookAided { .. } => {
                let k = codebook.map_or(0, Codebook::k);
                if k > MAX_CODEBOOK_AIDED_K {
                    return Err(Error::CodeTooLarge {
                        k,
                        max: MAX_CODEBOOK_AIDED_K,
                    });
                }
            }
            _ => {}
        }
        let mut reference = vec![1.0; plan.n()];
        reference[..plan.n_p()].copy_from_slice(plan.preamble());
        Ok(Detector {
            kind,
            plan,
            params,
            codebook,
            reference,
        })
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn plan(&self) -> &FramePlan {
        self.plan
    }

    pub fn params(&self) -> &ChannelParams {
        self.params
    }

    pub fn codebook(&self) -> Option<&Codebook> {
        self.codebook
    }

    /// Evaluates the statistic. `sent` is the message the genie knows about;
    /// other detectors ignore it.
    pub fn score(&self, y: &[f64], sent: Option<usize>) -> Result<Score> {
        let (statistic, message) = match self.kind {
            DetectorKind::Preamble => {
                let (y_p, _) = self.plan.split(y)?;
                (stat_preamble(y_p, self.plan, self.params)?, None)
            }
            DetectorKind::HypedExact { prior } => {
                (stat_hyped_exact(y, self.plan, self.params, prior)?, None)
            }
            DetectorKind::HypedHeuristic { gamma_a } => {
                (stat_hyped_heuristic(y, self.plan, gamma_a)?, None)
            }
            DetectorKind::Dad => {
                let cb = self.codebook.ok_or(Error::MissingCodebook)?;
                let (s, m) = stat_dad(y, cb, self.plan)?;
                (s, Some(m))
            }
            DetectorKind::CodebookAided { gamma_a } => {
                let cb = self.codebook.ok_or(Error::MissingCodebook)?;
                let (s, m) = stat_codebook_aided(y, cb, self.plan, self.params, gamma_a)?;
                (s, Some(m))
            }
            DetectorKind::Genie => {
                let m = sent.unwrap_or(0);
                let s = match self.codebook {
                    Some(cb) => {
                        let x = self.plan.frame(cb.encode(m)?)?;
                        stat_genie(y, &x, self.params)?
                    }
                    None => stat_genie(y, &self.reference, self.params)?,
                };
                (s, self.codebook.map(|_| m))
            }
        };
        Ok(Score { statistic, message })
    }

    /// Full receiver: statistic, threshold, then decoding if needed.
    pub fn receive(&self, y: &[f64], sent: Option<usize>, gamma: f64) -> Result<DetectionOutcome> {
        let score = self.score(y, sent)?;
        let mut outcome = decide(score.statistic, gamma, score.message);
        if let Decision::Detected(None) = outcome.decision {
            if let Some(cb) = self.codebook {
                let (_, y_c) = self.plan.split(y)?;
                outcome.decision = Decision::Detected(Some(cb.argmax_correlation(y_c).0));
            }
        }
        Ok(outcome)
    }
}
