//! Seeded trial engine: threshold calibration, error-rate estimation and
//! binomial confidence intervals.
//!
//! Every trial draws its randomness from `rng::derive_seed(seed, stream, t)`,
//! and trials are reduced in fixed-size batches whose partial counts are
//! added in batch order. Estimates are therefore bit-identical for a given
//! seed regardless of the execution mode or the number of worker threads.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use statrs::function::beta::beta_reg;

use crate::channel::add_noise;
use crate::detectors::{Decision, Detector, DetectorKind};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::rng::{GaussianSource, Stream};

const BATCH: u64 = 4096;

/// Two-sided Clopper–Pearson interval for `successes` out of `trials`.
pub fn clopper_pearson(successes: u64, trials: u64, level: f64) -> (f64, f64) {
    assert!(successes <= trials, "successes exceed trials");
    if trials == 0 {
        return (0.0, 1.0);
    }
    let alpha = 1.0 - level;
    let (x, n) = (successes as f64, trials as f64);
    let low = if successes == 0 {
        0.0
    } else {
        // P[X ≥ x; p] = I_p(x, n − x + 1), increasing in p
        bisect(|p| beta_reg(x, n - x + 1.0, p) - alpha / 2.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        // P[X ≤ x; p] = 1 − I_p(x + 1, n − x), decreasing in p
        bisect(|p| alpha / 2.0 - (1.0 - beta_reg(x + 1.0, n - x, p)))
    };
    (low, high)
}

/// Root of an increasing function on `[0, 1]`.
fn bisect(f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Empirical probability with a 95% Clopper–Pearson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RateEstimate {
    pub const LEVEL: f64 = 0.95;

    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = clopper_pearson(successes, trials, Self::LEVEL);
        let p_hat = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        RateEstimate {
            successes,
            trials,
            p_hat,
            ci_low: ci_low.min(p_hat),
            ci_high: ci_high.max(p_hat),
        }
    }

    /// Binomial standard error `√(p̂(1 − p̂)/N)`.
    pub fn stderr(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

impl fmt::Display for RateEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.4e} [{:.4e}, {:.4e}] ({}/{})",
            self.p_hat, self.ci_low, self.ci_high, self.successes, self.trials
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CalibrationConfig {
    /// Idle slots used to fit the threshold.
    pub trials: u64,
    /// Idle slots, on an independent stream, used to re-measure `P_FA`.
    pub eval_trials: u64,
    pub seed: u64,
    pub exec: Execution,
}

impl CalibrationConfig {
    /// Trial counts sized for a false-alarm target: at least `50/ε` fitting
    /// slots (and 5·10⁵ for targets at or below 10⁻⁴), and four times as many
    /// evaluation slots.
    pub fn for_target(eps_fa: f64, seed: u64) -> Self {
        let mut trials = (50.0 / eps_fa).ceil() as u64;
        if eps_fa <= 1e-4 {
            trials = trials.max(500_000);
        }
        CalibrationConfig {
            trials,
            eval_trials: 4 * trials,
            seed,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationResult {
    pub gamma: f64,
    pub achieved_pfa: RateEstimate,
    /// The re-measured `P_FA` exceeds the target with 95% confidence.
    pub infeasible: bool,
}

/// Fits the upper `(1 − ε_FA)` quantile of an idle-slot statistic.
///
/// `stat` sees the noise-only observation of length `n` and the trial's
/// Gaussian source (after noise has been drawn), which genie-style
/// statistics may use to draw the reference message.
pub fn calibrate_threshold<F>(
    stat: F,
    n: usize,
    sigma2: f64,
    eps_fa: f64,
    cfg: &CalibrationConfig,
) -> Result<CalibrationResult>
where
    F: Fn(&[f64], &mut GaussianSource) -> Result<f64> + Sync + Send,
{
    if !(eps_fa > 0.0 && eps_fa < 1.0) {
        return Err(Error::Domain {
            what: "eps_fa",
            value: eps_fa,
        });
    }
    let needed = (50.0 / eps_fa).ceil() as u64;
    if cfg.trials < needed {
        return Err(Error::InsufficientTrials {
            needed,
            got: cfg.trials,
        });
    }
    let sigma = sigma2.sqrt();
    let idle_stat = |stream: Stream, t: u64| -> Result<f64> {
        let mut g = GaussianSource::for_trial(cfg.seed, stream, t);
        let mut y = vec![0.0; n];
        add_noise(&mut y, sigma, &mut g);
        stat(&y, &mut g)
    };

    let mut values = par::try_map_collect(cfg.exec, 0..cfg.trials, |t| {
        idle_stat(Stream::Calibration, t)
    })?;
    values.sort_by(f64::total_cmp);
    let gamma = upper_quantile(&values, eps_fa);

    let hits = batched_sum(cfg.exec, cfg.eval_trials, |t| {
        Ok(u64::from(idle_stat(Stream::IdleEvaluation, t)? >= gamma))
    })?;
    let achieved_pfa = RateEstimate::from_counts(hits, cfg.eval_trials);
    Ok(CalibrationResult {
        gamma,
        achieved_pfa,
        infeasible: achieved_pfa.ci_low > eps_fa,
    })
}

/// Threshold with an empirical exceedance of about `eps` on sorted `values`,
/// interpolated linearly between order statistics. When ties make the
/// interpolated point admit more than `eps` of the sample, the threshold
/// moves just above the tied value.
fn upper_quantile(sorted: &[f64], eps: f64) -> f64 {
    let len = sorted.len();
    let h = (1.0 - eps) * (len - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(len - 1);
    let mut gamma = sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]);
    let above = len - sorted.partition_point(|&v| v < gamma);
    if above as f64 > eps * len as f64 + 1.0 {
        gamma = gamma.next_up();
    }
    gamma
}

/// Calibrates a bound detector on idle slots.
pub fn calibrate_detector(
    det: &Detector<'_>,
    eps_fa: f64,
    cfg: &CalibrationConfig,
) -> Result<CalibrationResult> {
    let m_total = det.codebook().map_or(1, |cb| cb.size());
    calibrate_threshold(
        |y, g| {
            let sent = g.index(m_total);
            Ok(det.score(y, Some(sent))?.statistic)
        },
        det.plan().n(),
        det.params().sigma2(),
        eps_fa,
        cfg,
    )
}

#[derive(Debug, Clone, Copy)]
pub struct RateConfig {
    pub idle_trials: u64,
    pub active_trials: u64,
    pub seed: u64,
    pub exec: Execution,
}

/// Estimated error rates of one operating point.
///
/// `pcw` and `pie` require a decoder; `pcw` is also `None` when no active
/// slot was detected (the conditioning event is empty).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    pub pfa: RateEstimate,
    pub pmd: RateEstimate,
    pub pcw: Option<RateEstimate>,
    pub pie: Option<RateEstimate>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct ActiveCounts {
    missed: u64,
    detected: u64,
    wrong: u64,
}

impl Add for ActiveCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ActiveCounts {
            missed: self.missed + o.missed,
            detected: self.detected + o.detected,
            wrong: self.wrong + o.wrong,
        }
    }
}

/// Sums fallible per-trial counts in fixed batches, in batch order.
fn batched_sum<T, F>(exec: Execution, trials: u64, f: F) -> Result<T>
where
    T: Send + Default + Add<Output = T> + Copy,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let batches = trials.div_ceil(BATCH);
    let partial = par::map_collect(exec, 0..batches, |b| -> Result<T> {
        let start = b * BATCH;
        let end = (start + BATCH).min(trials);
        let mut acc = T::default();
        for t in start..end {
            acc = acc + f(t)?;
        }
        Ok(acc)
    });
    partial
        .into_iter()
        .try_fold(T::default(), |acc, p| Ok(acc + p?))
}

/// Estimates `P_FA`, `P_MD`, `P_CW` and `P_IE` at threshold `gamma`.
///
/// Active slots carry `(preamble | payload)`. The payload is a uniformly drawn
/// codeword when the detector has a codebook; otherwise i.i.d. symbols with
/// `Pr{+1}` equal to the HyPED prior (1/2 for other detectors), or all `+1`
/// for a genie without a codebook.
pub fn estimate_rates(det: &Detector<'_>, gamma: f64, cfg: &RateConfig) -> Result<RateSet> {
    let plan = det.plan();
    let n = plan.n();
    let sigma = det.params().sigma();
    let codebook = det.codebook();
    let m_total = codebook.map_or(1, |cb| cb.size());
    let prior = match det.kind() {
        DetectorKind::HypedExact { prior } => prior,
        DetectorKind::Genie if codebook.is_none() => 1.0,
        _ => 0.5,
    };

    let false_alarms = batched_sum(cfg.exec, cfg.idle_trials, |t| {
        let mut g = GaussianSource::for_trial(cfg.seed, Stream::IdleEvaluation, t);
        let mut y = vec![0.0; n];
        add_noise(&mut y, sigma, &mut g);
        let sent = g.index(m_total);
        let out = det.receive(&y, Some(sent), gamma)?;
        Ok(u64::from(out.decision != Decision::Idle))
    })?;

    let counts = batched_sum(cfg.exec, cfg.active_trials, |t| {
        let mut g = GaussianSource::for_trial(cfg.seed, Stream::Active, t);
        let m = g.index(m_total);
        let mut y = vec![0.0; n];
        match codebook {
            Some(cb) => plan.frame_into(cb.codeword(m), &mut y)?,
            None => {
                y[..plan.n_p()].copy_from_slice(plan.preamble());
                for v in &mut y[plan.n_p()..] {
                    *v = if prior >= 1.0 || g.uniform() < prior { 1.0 } else { -1.0 };
                }
            }
        }
        add_noise(&mut y, sigma, &mut g);
        let out = det.receive(&y, Some(m), gamma)?;
        Ok(match out.decision {
            Decision::Idle => ActiveCounts {
                missed: 1,
                ..Default::default()
            },
            Decision::Detected(decoded) => ActiveCounts {
                detected: 1,
                wrong: u64::from(decoded.is_some_and(|d| d != m)),
                ..Default::default()
            },
        })
    })?;

    let decodes = codebook.is_some();
    Ok(RateSet {
        pfa: RateEstimate::from_counts(false_alarms, cfg.idle_trials),
        pmd: RateEstimate::from_counts(counts.missed, cfg.active_trials),
        pcw: (decodes && counts.detected > 0)
            .then(|| RateEstimate::from_counts(counts.wrong, counts.detected)),
        pie: decodes.then(|| {
            RateEstimate::from_counts(counts.missed + counts.wrong, cfg.active_trials)
        }),
    })
}

/// Line-based `key=value` record of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunManifest {
    entries: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl fmt::Display) -> &mut Self {
        self.entries.insert(key.into(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={}\n", v.replace('\n', " ")))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = RunManifest::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "expected key=value".into(),
            })?;
            m.set(k.trim(), v.trim());
        }
        Ok(m)
    }
}
