//! Experiment drivers: rate sweep over blocklength, inclusive-error sweep
//! over SNR, preamble-split optimization, and closed-form bound tables.

use std::path::Path;

use jdd::bounds::{
    dad_error_bounds, dad_detection_limit, dad_gamma, dad_max_code_size, dt_bound_from_sample,
    meta_converse_from_sample, min_blocklength, min_snr_db, pie_sandwich, CodeSizeBound,
    DensitySample, Requirements,
};
use jdd::channel::{ChannelParams, FramePlan};
use jdd::codebook::Codebook;
use jdd::detectors::{Detector, DetectorKind};
use jdd::montecarlo::{
    calibrate_detector, estimate_rates, CalibrationConfig, RateConfig, RateEstimate, RunManifest,
};
use jdd::rng::{derive_seed, Stream};

use crate::config::{Scheme, Sweep, SweepConfig};
use crate::error::CliError;
use crate::output::{number, sort_rows, Axis, Flag, Row};

/// Rows plus the manifest entries a run produced.
#[derive(Debug, Clone)]
pub struct Run {
    pub rows: Vec<Row>,
    pub manifest: RunManifest,
}

/// A loaded generator file and the label its rows carry.
#[derive(Debug, Clone)]
pub struct NamedCode {
    pub name: String,
    pub code: Codebook,
}

impl NamedCode {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let code = Codebook::load(path)?;
        let name = path
            .file_stem()
            .map_or_else(|| "code".to_string(), |s| s.to_string_lossy().into_owned());
        Ok(NamedCode { name, code })
    }
}

fn sub_seed(base: u64, index: u64) -> u64 {
    derive_seed(base, Stream::Auxiliary, index)
}

fn calibration(cfg: &SweepConfig, seed: u64) -> CalibrationConfig {
    let mut c = CalibrationConfig::for_target(cfg.req.eps_fa, seed);
    if let Some(trials) = cfg.calib_trials {
        c.trials = trials;
        c.eval_trials = trials;
    }
    c.exec = cfg.exec;
    c
}

fn detector_kind(scheme: Scheme) -> DetectorKind {
    match scheme {
        Scheme::Genie => DetectorKind::Genie,
        Scheme::Dad => DetectorKind::Dad,
        Scheme::Hyped => DetectorKind::HypedExact { prior: 0.5 },
        Scheme::Preamble => DetectorKind::Preamble,
    }
}

/// Calibrated detection, with the miss rate measured on active slots.
#[derive(Debug, Clone, Copy)]
struct Detection {
    pmd: RateEstimate,
    pie: Option<RateEstimate>,
    calibration_failed: bool,
}

fn simulate(
    scheme: Scheme,
    plan: &FramePlan,
    params: &ChannelParams,
    code: Option<&Codebook>,
    cfg: &SweepConfig,
    seed: u64,
) -> Result<Detection, CliError> {
    let det = Detector::new(detector_kind(scheme), plan, params, code)?;
    let c = calibrate_detector(&det, cfg.req.eps_fa, &calibration(cfg, sub_seed(seed, 0)))?;
    let rates = estimate_rates(
        &det,
        c.gamma,
        &RateConfig {
            idle_trials: 0,
            active_trials: cfg.active_trials,
            seed: sub_seed(seed, 1),
            exec: cfg.exec,
        },
    )?;
    Ok(Detection {
        pmd: rates.pmd,
        pie: rates.pie,
        calibration_failed: c.infeasible,
    })
}

fn rate_row(scheme: &str, kind: &str, n: usize, snr: f64, b: &CodeSizeBound) -> Row {
    let nf = n as f64;
    let flag = if b.insufficient { Flag::Insufficient } else { Flag::Ok };
    Row::new(
        scheme,
        kind,
        n,
        snr,
        b.log2_m / nf,
        (b.log2_m_high - b.log2_m_low) / (6.0 * nf),
        flag,
    )
}

fn blocked(scheme: &str, kind: &str, n: usize, snr: f64, value: f64) -> Row {
    Row::new(scheme, kind, n, snr, value, 0.0, Flag::Infeasible)
}

fn manifest_for(cfg: &SweepConfig, command: &str) -> RunManifest {
    let mut m = RunManifest::new();
    m.set("command", command)
        .set("version", env!("CARGO_PKG_VERSION"))
        .set("seed", cfg.seed)
        .set("execution", if cfg.exec.is_parallel() { "parallel" } else { "sequential" });
    for (k, v) in &cfg.entries {
        m.set(format!("config.{k}"), v);
    }
    m
}

/// Achievable and converse rates `log2(M)/n` over a blocklength grid at fixed SNR.
pub fn run_rate_sweep(cfg: &SweepConfig) -> Result<Run, CliError> {
    let Sweep::Blocklength { n_grid, es_n0_db } = &cfg.sweep else {
        return Err(CliError::Config("rate-sweep needs n_grid".into()));
    };
    let snr = *es_n0_db;
    let s2 = jdd::channel::snr_to_sigma2(snr);
    let req = cfg.req;
    let n_min = min_blocklength(s2, req.eps_fa, req.eps_md)?;
    let mut manifest = manifest_for(cfg, "rate-sweep");
    manifest.set("jdd.n_min", number(n_min));
    let mut rows = Vec::new();

    for (i, &n) in n_grid.iter().enumerate() {
        let seed = sub_seed(cfg.seed, i as u64);
        let masked = (n as f64) < n_min;
        let sample = DensitySample::draw(n, s2, cfg.density_trials, sub_seed(seed, 0), cfg.exec)?;
        let dt = dt_bound_from_sample(&sample, req.eps_ie)?;
        let mc = meta_converse_from_sample(&sample, req.eps_ie)?;

        rows.push(if masked {
            blocked("jdd", "converse", n, snr, 0.0)
        } else {
            rate_row("jdd", "converse", n, snr, &mc)
        });

        for &scheme in &cfg.schemes {
            let label = scheme.label();
            match scheme {
                Scheme::Genie => {
                    rows.push(rate_row(label, "achievability", n, snr, &dt));
                    rows.push(rate_row(label, "converse", n, snr, &mc));
                }
                _ if masked => rows.push(blocked(label, "achievability", n, snr, 0.0)),
                Scheme::Dad => {
                    let m = dad_max_code_size(n, s2, &req, |pe, _, _| sample.dt_max_size(pe))?;
                    rows.push(if m >= 2.0 {
                        Row::new(label, "achievability", n, snr, m.log2() / n as f64, 0.0, Flag::Ok)
                    } else {
                        blocked(label, "achievability", n, snr, 0.0)
                    });
                }
                Scheme::Hyped | Scheme::Preamble => {
                    let best = best_split_rate(scheme, n, s2, cfg, sub_seed(seed, 1 + scheme as u64))?;
                    match best {
                        Some((n_p, bound)) => {
                            manifest.set(format!("{label}.n{n}.n_p"), n_p);
                            rows.push(rate_row(label, "achievability", n, snr, &bound));
                        }
                        None => rows.push(blocked(label, "achievability", n, snr, 0.0)),
                    }
                }
            }
        }
    }
    sort_rows(&mut rows, Axis::Blocklength);
    Ok(Run { rows, manifest })
}

/// Best preamble split for a detection-then-decode scheme at blocklength `n`:
/// the miss rate must meet `eps_md`, and the decoder gets the remaining
/// inclusive-error budget on `n_c = n − n_p` symbols.
fn best_split_rate(
    scheme: Scheme,
    n: usize,
    s2: f64,
    cfg: &SweepConfig,
    seed: u64,
) -> Result<Option<(usize, CodeSizeBound)>, CliError> {
    let first = if scheme == Scheme::Preamble { 1 } else { 0 };
    let mut best: Option<(usize, CodeSizeBound)> = None;
    for n_p in (first..n).step_by(cfg.split_step) {
        let n_c = n - n_p;
        let plan = FramePlan::new(n_p, n_c);
        let params = ChannelParams::from_sigma2(s2, n)?;
        let d = simulate(scheme, &plan, &params, None, cfg, sub_seed(seed, n_p as u64))?;
        let budget = cfg.req.eps_ie - d.pmd.p_hat;
        if d.calibration_failed || d.pmd.p_hat > cfg.req.eps_md || budget <= 0.0 {
            continue;
        }
        let sample = DensitySample::draw(n_c, s2, cfg.density_trials, sub_seed(seed, 10_000 + n_p as u64), cfg.exec)?;
        let bound = dt_bound_from_sample(&sample, budget)?;
        if best.as_ref().map_or(true, |(_, b)| bound.m > b.m) {
            best = Some((n_p, bound));
        }
    }
    Ok(best.filter(|(_, b)| b.m >= 2.0))
}

/// Inclusive error rate over an SNR grid at fixed `n` and `k`: bound
/// intervals for every scheme, plus simulated points for each supplied code.
pub fn run_pie_sweep(cfg: &SweepConfig, codes: &[NamedCode]) -> Result<Run, CliError> {
    let Sweep::Snr { snr_grid, n } = &cfg.sweep else {
        return Err(CliError::Config("pie-sweep needs snr_grid".into()));
    };
    let n = *n;
    if cfg.k > n {
        return Err(CliError::Config(format!("k = {} does not fit n = {n}", cfg.k)));
    }
    for c in codes {
        if c.code.n_c() > n {
            return Err(CliError::Config(format!(
                "code {} has n_c = {} > n = {n}",
                c.name,
                c.code.n_c()
            )));
        }
    }
    let m = 2f64.powi(cfg.k as i32);
    let req = cfg.req;
    let snr_min = min_snr_db(n, req.eps_fa, req.eps_md)?;
    let mut manifest = manifest_for(cfg, "pie-sweep");
    manifest.set("jdd.min_snr_db", number(snr_min));
    let mut rows = Vec::new();

    for (i, &snr) in snr_grid.iter().enumerate() {
        let seed = sub_seed(cfg.seed, i as u64);
        let s2 = jdd::channel::snr_to_sigma2(snr);
        let params = ChannelParams::from_sigma2(s2, n)?;
        let infeasible = snr < snr_min;
        let full = DensitySample::draw(n, s2, cfg.density_trials, sub_seed(seed, 0), cfg.exec)?;
        let (pcw_full, pcw_full_se) = full.dt_error(m);

        for &scheme in &cfg.schemes {
            let label = scheme.label();
            match scheme {
                Scheme::Genie => {
                    rows.push(Row::new(label, "achievability", n, snr, pcw_full, pcw_full_se, Flag::Ok));
                    rows.push(Row::new(label, "converse", n, snr, full.meta_converse_min_error(m), 0.0, Flag::Ok));
                }
                _ if infeasible => {
                    rows.push(blocked(label, "achievability", n, snr, 1.0));
                    rows.push(blocked(label, "converse", n, snr, 1.0));
                }
                Scheme::Dad => {
                    let gamma = dad_gamma(n, s2, req.eps_fa, m)?;
                    let b = dad_error_bounds(n, s2, gamma, m);
                    rows.push(Row::new(label, "achievability", n, snr, b.pie_ub(pcw_full), pcw_full_se, Flag::Ok));
                }
                Scheme::Hyped | Scheme::Preamble => {
                    let n_p = match cfg.n_p {
                        Some(n_p) => n_p,
                        None => {
                            let s = optimize_preamble_split(scheme, n, cfg.k, &params, cfg, None, sub_seed(seed, 7))?;
                            s.plan.n_p()
                        }
                    };
                    if n_p > n - cfg.k || (scheme == Scheme::Preamble && n_p == 0) {
                        return Err(CliError::Config(format!("n_p = {n_p} leaves no room for {label}")));
                    }
                    manifest.set(format!("{label}.snr{}.n_p", number(snr)), n_p);
                    let plan = FramePlan::new(n_p, n - n_p);
                    let d = simulate(scheme, &plan, &params, None, cfg, sub_seed(seed, 1 + scheme as u64))?;
                    let sample = DensitySample::draw(n - n_p, s2, cfg.density_trials, sub_seed(seed, 20 + scheme as u64), cfg.exec)?;
                    let (pcw_up, pcw_se) = sample.dt_error(m);
                    let (lo, hi) = pie_sandwich(d.pmd.p_hat, sample.meta_converse_min_error(m), pcw_up);
                    let flag = if d.calibration_failed { Flag::Insufficient } else { Flag::Ok };
                    let se = (d.pmd.stderr().powi(2) + pcw_se.powi(2)).sqrt();
                    rows.push(Row::new(label, "achievability", n, snr, hi, se, flag));
                    rows.push(Row::new(label, "converse", n, snr, lo, d.pmd.stderr(), flag));
                }
            }
        }

        for (ci, c) in codes.iter().enumerate() {
            let n_p = n - c.code.n_c();
            let plan = FramePlan::new(n_p, c.code.n_c());
            for &scheme in &cfg.schemes {
                if scheme == Scheme::Preamble && n_p == 0 {
                    continue;
                }
                let seed = sub_seed(seed, 100 + 10 * ci as u64 + scheme as u64);
                let d = simulate(scheme, &plan, &params, Some(&c.code), cfg, seed)?;
                let pie = d.pie.expect("decoding detector reports P_IE");
                let flag = if d.calibration_failed { Flag::Insufficient } else { Flag::Ok };
                let label = format!("{}+{}", scheme.label(), c.name);
                rows.push(Row::new(&label, "simulated", n, snr, pie.p_hat, pie.stderr(), flag));
            }
        }
    }
    sort_rows(&mut rows, Axis::Snr);
    Ok(Run { rows, manifest })
}

/// One evaluated preamble split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitRow {
    pub n_p: usize,
    pub n_c: usize,
    pub pmd: f64,
    /// Decoding error bound (or simulated `P_CW` share with a code).
    pub pcw: f64,
    /// Upper bound on (or, with a code, simulated) inclusive error.
    pub pie: f64,
}

#[derive(Debug, Clone)]
pub struct SplitChoice {
    pub plan: FramePlan,
    pub pie: f64,
    /// No split meets `eps_ie`.
    pub infeasible: bool,
    pub table: Vec<SplitRow>,
}

/// Grid search over the preamble length.
///
/// Without a code, each split is scored by the inclusive-error upper bound
/// `P_MD + P_CW`, with `P_MD` from the union bound (decoder-aided) or from
/// simulation (preamble and hybrid detectors) and `P_CW` from the DT bound on
/// `n_c` symbols. A code fixes `n_c`, leaving one candidate that is simulated.
pub fn optimize_preamble_split(
    scheme: Scheme,
    n: usize,
    k: usize,
    params: &ChannelParams,
    cfg: &SweepConfig,
    code: Option<&Codebook>,
    seed: u64,
) -> Result<SplitChoice, CliError> {
    if scheme == Scheme::Genie {
        return Err(CliError::Config("the genie scheme has no preamble split".into()));
    }
    if n == 0 || k > n {
        return Err(CliError::Config(format!("k = {k} does not fit n = {n}")));
    }
    let s2 = params.sigma2();
    let params = params.with_n(n)?;
    let m = 2f64.powi(k as i32);
    let candidates: Vec<usize> = match code {
        Some(cb) if cb.n_c() > n => {
            return Err(CliError::Config(format!("code length {} exceeds n = {n}", cb.n_c())))
        }
        Some(cb) => vec![n - cb.n_c()],
        None => {
            let first = usize::from(scheme == Scheme::Preamble);
            (first..=n - k).step_by(cfg.split_step).collect()
        }
    };
    if scheme == Scheme::Preamble && candidates == [0] {
        return Err(CliError::Config("preamble detection needs n_p > 0".into()));
    }

    let mut table = Vec::new();
    for &n_p in &candidates {
        let n_c = n - n_p;
        let plan = FramePlan::new(n_p, n_c);
        let split_seed = sub_seed(seed, n_p as u64);
        let row = if let Some(cb) = code {
            let d = simulate(scheme, &plan, &params, Some(cb), cfg, split_seed)?;
            let pie = d.pie.expect("decoding detector reports P_IE").p_hat;
            SplitRow { n_p, n_c, pmd: d.pmd.p_hat, pcw: pie - d.pmd.p_hat, pie }
        } else {
            let pmd = if scheme == Scheme::Dad {
                let gamma = dad_gamma(n, s2, cfg.req.eps_fa, m)?;
                dad_error_bounds(n, s2, gamma, m).pmd_ub
            } else {
                simulate(scheme, &plan, &params, None, cfg, split_seed)?.pmd.p_hat
            };
            let sample = DensitySample::draw(n_c, s2, cfg.density_trials, sub_seed(split_seed, 1), cfg.exec)?;
            let pcw = sample.dt_error(m).0;
            SplitRow { n_p, n_c, pmd, pcw, pie: (pmd + pcw).min(1.0) }
        };
        table.push(row);
    }
    let best = table
        .iter()
        .min_by(|a, b| a.pie.total_cmp(&b.pie).then(a.n_p.cmp(&b.n_p)))
        .expect("at least one candidate split");
    Ok(SplitChoice {
        plan: FramePlan::new(best.n_p, best.n_c),
        pie: best.pie,
        infeasible: best.pie > cfg.req.eps_ie,
        table,
    })
}

/// Runs the split optimizer for the first configured scheme at every SNR.
/// Returns the result rows and the per-split table as CSV text.
pub fn run_optimize_split(cfg: &SweepConfig, code: Option<&NamedCode>) -> Result<(Run, String), CliError> {
    let Sweep::Snr { snr_grid, n } = &cfg.sweep else {
        return Err(CliError::Config("optimize-split needs snr_grid".into()));
    };
    let scheme = *cfg
        .schemes
        .first()
        .ok_or_else(|| CliError::Config("no scheme given".into()))?;
    let k = code.map_or(cfg.k, |c| c.code.k());
    let mut manifest = manifest_for(cfg, "optimize-split");
    let mut rows = Vec::new();
    let mut table = String::from("scheme,es_n0_db,n_p,n_c,pmd,pcw,pie\n");
    for (i, &snr) in snr_grid.iter().enumerate() {
        let params = ChannelParams::from_snr_db(snr, *n)?;
        let choice = optimize_preamble_split(
            scheme,
            *n,
            k,
            &params,
            cfg,
            code.map(|c| &c.code),
            sub_seed(cfg.seed, i as u64),
        )?;
        let flag = if choice.infeasible { Flag::Infeasible } else { Flag::Ok };
        let label = scheme.label();
        rows.push(Row::new(label, "n_p", *n, snr, choice.plan.n_p() as f64, 0.0, flag));
        rows.push(Row::new(label, "pie", *n, snr, choice.pie, 0.0, flag));
        manifest.set(format!("{label}.snr{}.n_p", number(snr)), choice.plan.n_p());
        for r in &choice.table {
            table.push_str(&format!(
                "{label},{},{},{},{},{},{}\n",
                number(snr),
                r.n_p,
                r.n_c,
                number(r.pmd),
                number(r.pcw),
                number(r.pie)
            ));
        }
    }
    sort_rows(&mut rows, Axis::Snr);
    Ok((Run { rows, manifest }, table))
}

/// Closed-form bound table at every grid point: the blocklength and SNR
/// limits, and the decoder-aided threshold, error bounds and detection limit
/// for `M = 2^k`.
pub fn run_bounds(cfg: &SweepConfig) -> Result<Run, CliError> {
    let req: Requirements = cfg.req;
    let m = 2f64.powi(cfg.k as i32);
    let (points, axis): (Vec<(usize, f64)>, Axis) = match &cfg.sweep {
        Sweep::Blocklength { n_grid, es_n0_db } => {
            (n_grid.iter().map(|&n| (n, *es_n0_db)).collect(), Axis::Blocklength)
        }
        Sweep::Snr { snr_grid, n } => (snr_grid.iter().map(|&s| (*n, s)).collect(), Axis::Snr),
    };
    let mut rows = Vec::new();
    for (n, snr) in points {
        let s2 = jdd::channel::snr_to_sigma2(snr);
        let n_min = min_blocklength(s2, req.eps_fa, req.eps_md)?;
        let flag = if (n as f64) < n_min { Flag::Infeasible } else { Flag::Ok };
        rows.push(Row::new("jdd", "min_blocklength", n, snr, n_min, 0.0, flag));
        rows.push(Row::new("jdd", "min_snr_db", n, snr, min_snr_db(n, req.eps_fa, req.eps_md)?, 0.0, flag));
        let gamma = dad_gamma(n, s2, req.eps_fa, m)?;
        let b = dad_error_bounds(n, s2, gamma, m);
        rows.push(Row::new("dad", "gamma", n, snr, gamma, 0.0, Flag::Ok));
        rows.push(Row::new("dad", "pfa_ub", n, snr, b.pfa_ub, 0.0, Flag::Ok));
        rows.push(Row::new("dad", "pmd_ub", n, snr, b.pmd_ub, 0.0, Flag::Ok));
        let limit = dad_detection_limit(n, s2, req.eps_fa, req.eps_md)?;
        let limit_flag = if limit < 1.0 { Flag::Infeasible } else { Flag::Ok };
        rows.push(Row::new("dad", "detection_limit", n, snr, limit, 0.0, limit_flag));
    }
    sort_rows(&mut rows, axis);
    Ok(Run {
        rows,
        manifest: manifest_for(cfg, "bounds"),
    })
}
