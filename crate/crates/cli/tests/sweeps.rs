use jdd::channel::ChannelParams;
use jdd::codebook::Codebook;
use jdd_cli::output::{to_csv, Row};
use jdd_cli::sweeps::{
    optimize_preamble_split, run_bounds, run_pie_sweep, run_rate_sweep, NamedCode,
};
use jdd_cli::{Scheme, SweepConfig};

fn find<'a>(rows: &'a [Row], scheme: &str, kind: &str, n: usize) -> &'a Row {
    rows.iter()
        .find(|r| r.scheme() == scheme && r.kind() == kind && r.n() == n as f64)
        .unwrap_or_else(|| panic!("no row {scheme}/{kind}/{n}"))
}

fn find_snr<'a>(rows: &'a [Row], scheme: &str, kind: &str, snr: f64) -> &'a Row {
    rows.iter()
        .find(|r| r.scheme() == scheme && r.kind() == kind && r.es_n0_db() == snr)
        .unwrap_or_else(|| panic!("no row {scheme}/{kind}/{snr}"))
}

#[test]
fn rate_sweep_masks_and_dad_point() {
    let cfg = SweepConfig::parse(
        "schemes = genie, dad\n\
         n_grid = 50, 84, 100\n\
         es_n0_db = -3\n\
         eps_fa = 1e-4\neps_md = 1e-4\neps_ie = 1e-3\n\
         density_trials = 50000\nseed = 11\n",
    )
    .unwrap();
    let run = run_rate_sweep(&cfg).unwrap();

    let below = find(&run.rows, "dad", "achievability", 50);
    assert_eq!(below.value(), 0.0);
    assert_eq!(below.flag(), "infeasible");
    assert_eq!(find(&run.rows, "jdd", "converse", 50).flag(), "infeasible");

    for n in [84, 100] {
        let dad = find(&run.rows, "dad", "achievability", n);
        let genie = find(&run.rows, "genie", "achievability", n);
        assert_eq!(dad.flag(), "ok");
        assert!(dad.value() > 0.0, "n = {n}");
        assert!(genie.value() >= dad.value(), "n = {n}");
        assert!(find(&run.rows, "genie", "converse", n).value() >= genie.value());
    }
}

#[test]
fn rate_sweep_hybrid_below_genie() {
    let cfg = SweepConfig::parse(
        "schemes = genie, hyped, preamble\n\
         n_grid = 48, 64\n\
         es_n0_db = 0\n\
         eps_fa = 1e-2\neps_md = 1e-2\neps_ie = 5e-2\n\
         calib_trials = 5000\nactive_trials = 5000\ndensity_trials = 10000\n\
         split_step = 8\nseed = 3\n",
    )
    .unwrap();
    let run = run_rate_sweep(&cfg).unwrap();
    for n in [48, 64] {
        let genie = find(&run.rows, "genie", "achievability", n);
        let slack = 3.0 * genie.fields[5].parse::<f64>().unwrap() + 1.0 / n as f64;
        for scheme in ["hyped", "preamble"] {
            let r = find(&run.rows, scheme, "achievability", n);
            assert!(r.value() <= genie.value() + slack, "{scheme} n = {n}");
        }
        assert!(run.manifest.get(&format!("hyped.n{n}.n_p")).is_some());
    }
}

#[test]
fn pie_sweep_flags_low_snr() {
    let cfg = SweepConfig::parse(
        "schemes = genie, dad\nsnr_grid = -5, -3\nn = 84\nk = 12\n\
         density_trials = 20000\nseed = 5\n",
    )
    .unwrap();
    let run = run_pie_sweep(&cfg, &[]).unwrap();
    let low = find_snr(&run.rows, "dad", "achievability", -5.0);
    assert_eq!(low.flag(), "infeasible");
    let ok = find_snr(&run.rows, "dad", "achievability", -3.0);
    assert_eq!(ok.flag(), "ok");
    assert!(ok.value() < 1.0);
    // the genie bounds hold whatever the SNR
    assert_eq!(find_snr(&run.rows, "genie", "converse", -5.0).flag(), "ok");
    let g = find_snr(&run.rows, "genie", "achievability", -3.0);
    assert!(find_snr(&run.rows, "genie", "converse", -3.0).value() <= g.value());
}

#[test]
fn simulated_ordering_with_a_small_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rm15.txt");
    let cb = Codebook::reed_muller_1(5).unwrap();
    let text: String = cb
        .generator()
        .iter()
        .map(|r| r.iter().map(|b| char::from(b'0' + b)).collect::<String>() + "\n")
        .collect();
    std::fs::write(&path, text).unwrap();
    let code = NamedCode::load(&path).unwrap();

    let cfg = SweepConfig::parse(
        "schemes = dad, hyped, preamble\nsnr_grid = -2.5\nn = 48\nk = 6\nn_p = 16\n\
         eps_fa = 1e-3\neps_md = 1e-3\neps_ie = 1e-2\n\
         active_trials = 40000\ndensity_trials = 10000\nseed = 9\n",
    )
    .unwrap();
    let run = run_pie_sweep(&cfg, &[code]).unwrap();
    let get = |s: &str| {
        let r = find_snr(&run.rows, s, "simulated", -2.5);
        (r.value(), r.fields[5].parse::<f64>().unwrap())
    };
    let (pre, pre_se) = get("preamble+rm15");
    let (hyp, hyp_se) = get("hyped+rm15");
    let (dad, _) = get("dad+rm15");
    assert!(pre + 3.0 * pre_se >= hyp, "{pre} vs {hyp}");
    assert!(hyp + 3.0 * hyp_se >= dad, "{hyp} vs {dad}");
    assert!(pre > dad);
}

#[test]
fn split_optimizer_properties() {
    let cfg = SweepConfig::parse(
        "snr_grid = 0\nn = 84\nk = 12\ndensity_trials = 20000\nsplit_step = 12\n\
         eps_fa = 1e-2\neps_md = 1e-2\neps_ie = 1e-1\n\
         calib_trials = 5000\nactive_trials = 5000\nseed = 2\n",
    )
    .unwrap();
    let params = ChannelParams::from_snr_db(0.0, 84).unwrap();

    let dad = optimize_preamble_split(Scheme::Dad, 84, 12, &params, &cfg, None, 1).unwrap();
    assert_eq!(dad.plan.n_p(), 0);
    assert!(dad.table.iter().all(|r| dad.pie <= r.pie));

    let hyped = optimize_preamble_split(Scheme::Hyped, 84, 12, &params, &cfg, None, 1).unwrap();
    assert!(hyped.table.len() > 1);
    assert!(hyped.table.iter().all(|r| hyped.pie <= r.pie));
    assert!(hyped.table.iter().all(|r| r.n_c >= 12));

    let code = Codebook::reed_muller_1(5).unwrap();
    let forced = optimize_preamble_split(Scheme::Preamble, 84, 6, &params, &cfg, Some(&code), 1).unwrap();
    assert_eq!(forced.table.len(), 1);
    assert_eq!(forced.plan.n_p(), 84 - 32);

    assert!(optimize_preamble_split(Scheme::Genie, 84, 12, &params, &cfg, None, 1).is_err());
}

#[test]
fn bounds_table_is_sorted_and_masked() {
    let cfg = SweepConfig::parse("n_grid = 100, 50, 56\nes_n0_db = -3\nk = 12\n").unwrap();
    let run = run_bounds(&cfg).unwrap();
    let ns: Vec<f64> = run
        .rows
        .iter()
        .filter(|r| r.scheme() == "jdd" && r.kind() == "min_blocklength")
        .map(Row::n)
        .collect();
    assert_eq!(ns, vec![50.0, 56.0, 100.0]);
    assert_eq!(find(&run.rows, "jdd", "min_blocklength", 50).flag(), "infeasible");
    assert_eq!(find(&run.rows, "jdd", "min_blocklength", 56).flag(), "ok");
    let gamma = find(&run.rows, "dad", "gamma", 100);
    assert!(gamma.value() > 0.0);
}

#[test]
fn runs_are_deterministic_across_execution_modes() {
    let base = "schemes = genie, dad, hyped\nsnr_grid = -3, -2\nn = 40\nk = 4\nn_p = 8\n\
                eps_fa = 1e-2\neps_md = 1e-2\neps_ie = 5e-2\n\
                calib_trials = 5000\nactive_trials = 5000\ndensity_trials = 10000\nseed = 4\n";
    let csv = |extra: &str| {
        let cfg = SweepConfig::parse(&format!("{base}{extra}")).unwrap();
        to_csv(&run_pie_sweep(&cfg, &[]).unwrap().rows).unwrap()
    };
    let a = csv("execution = parallel\n");
    assert_eq!(a, csv("execution = sequential\n"));
    assert_eq!(a, csv(""));
    assert!(a.starts_with("scheme,kind,n,es_n0_db,value,stderr,flag\n"));
}
