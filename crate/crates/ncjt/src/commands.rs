//! Subcommand bodies. Each returns the table to write and its sidecar, so
//! the binary and the tests share one code path.

use ncjt_core::csi::{self, RadiusRule};
use ncjt_core::mc_sim::{self, SimWindow};
use ncjt_core::sinr::SinrAnalysis;
use ncjt_core::stats;
use ncjt_core::{gamma_fit, scheduling, CsiMode, FadingModel, Scenario};
use serde_json::json;

use crate::output::{Sidecar, Table};
use crate::runner;
use crate::scenario_file::{db_to_linear, ScenarioFile};

/// Evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn base_sidecar(command: &str, scn: &Scenario) -> Sidecar {
    Sidecar::new(command).scenario("scenario", ScenarioFile::from_scenario(scn))
}

/// Simulation window: the default rule, or a fixed radius in metres.
pub fn window(scn: &Scenario, rsim: Option<f64>) -> ncjt_core::Result<SimWindow> {
    match rsim {
        Some(r) => Ok(mc_sim::window_with_radius(scn, r)),
        None => mc_sim::default_window(scn),
    }
}

fn window_json(w: &SimWindow) -> serde_json::Value {
    json!({ "radius_m": w.radius, "far_field_mean": w.far_field_mean })
}

/// Fitted Gamma parameters, optionally checked against simulated
/// denominators `J_C + J_Cbar + 1/eta` on a grid relative to the fitted mean.
pub fn fit_gamma(
    scn: &Scenario,
    mc: Option<(u64, u64)>,
    rsim: Option<f64>,
) -> anyhow::Result<(Table, Sidecar)> {
    let fit = gamma_fit::fit_scenario(scn)?;
    let mut side = base_sidecar("fit-gamma", scn);
    side.note("shape", fit.shape);
    side.note("scale", fit.scale);
    side.note("mean", fit.mean());
    side.note("variance", fit.variance());
    let rel_db = linspace(-20.0, 20.0, 161);
    let xs: Vec<f64> = rel_db
        .iter()
        .map(|&r| fit.mean() * db_to_linear(r))
        .collect();
    let mut cols = vec!["x_rel_db", "x", "fitted_cdf"];
    let mut emp = None;
    if let Some((trials, seed)) = mc {
        let w = window(scn, rsim)?;
        let noise = scn.noise();
        let d = stats::sorted(runner::simulate_map(
            scn,
            trials,
            seed,
            &w,
            runner::worker_count(),
            |t| t.intra_interference + t.out_interference + noise,
        )?);
        let ks = stats::ks_statistic(&d, |x| fit.cdf(x));
        side.seed = Some(seed);
        side.note("trials", trials);
        side.note("ks_distance", ks);
        side.note("window", window_json(&w));
        cols.push("empirical_cdf");
        emp = Some(d);
    }
    let mut t = Table::new(cols);
    for (r, &x) in rel_db.iter().zip(&xs) {
        let mut row = vec![*r, x, fit.cdf(x)];
        if let Some(d) = &emp {
            row.push(stats::ecdf(d, x));
        }
        t.push(row);
    }
    Ok((t, side))
}

/// Which analytic columns `cdf` writes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CdfColumns {
    pub bounds: bool,
    pub approx: bool,
    /// Tail-form evaluation truncated at this order.
    pub tail: Option<usize>,
}

pub fn cdf(scn: &Scenario, grid_db: &[f64], cols: CdfColumns) -> anyhow::Result<(Table, Sidecar)> {
    let a = SinrAnalysis::new(scn)?;
    let grid: Vec<f64> = grid_db.iter().map(|&b| db_to_linear(b)).collect();
    let curve = a.curve(&grid)?;
    let mut names = vec!["beta_db"];
    if cols.bounds {
        names.extend(["lower", "upper", "gap"]);
    }
    if cols.approx {
        names.push("approx");
    }
    if cols.tail.is_some() {
        names.extend(["tail", "truncation_bound"]);
    }
    let mut t = Table::new(names);
    for i in 0..grid.len() {
        let mut row = vec![grid_db[i]];
        if cols.bounds {
            row.extend([curve.lower[i], curve.upper[i], curve.gap[i]]);
        }
        if cols.approx {
            row.push(curve.approx[i]);
        }
        if let Some(m_hi) = cols.tail {
            let r = a.cdf_tail_remainder(grid[i], m_hi)?;
            row.extend([r.value, r.truncation_bound]);
        }
        t.push(row);
    }
    let fit = a.fit();
    let mut side = base_sidecar("cdf", scn);
    side.note("shape", fit.shape);
    side.note("scale", fit.scale);
    side.note("atom", a.atom());
    Ok((t, side))
}

/// Per-trial samples: `sinr, P, J_C, J_Cbar, active_count`.
pub fn simulate(
    scn: &Scenario,
    trials: u64,
    seed: u64,
    rsim: Option<f64>,
    threads: usize,
) -> anyhow::Result<(Table, Sidecar)> {
    let w = window(scn, rsim)?;
    let set = runner::simulate_with_threads(scn, trials, seed, w, threads)?;
    let mut t = Table::new(["sinr", "P", "J_C", "J_Cbar", "active_count"]);
    let mut acc = stats::Welford::new();
    for s in &set.trials {
        acc.push(s.sinr);
        t.push(vec![
            s.sinr,
            s.useful_power,
            s.intra_interference,
            s.out_interference,
            s.active_count as f64,
        ]);
    }
    let zero = set.trials.iter().filter(|s| s.useful_power == 0.0).count();
    let mut side = base_sidecar("simulate", scn);
    side.seed = Some(seed);
    side.note("trials", trials);
    side.note("window", window_json(&w));
    side.note("mean_sinr", acc.mean());
    side.note("zero_power_fraction", zero as f64 / trials as f64);
    Ok((t, side))
}

/// Analytic approximation against the empirical CDF on the same grid.
pub fn compare(
    scn: &Scenario,
    grid_db: &[f64],
    trials: u64,
    seed: u64,
    rsim: Option<f64>,
) -> anyhow::Result<(Table, Sidecar, f64)> {
    let grid: Vec<f64> = grid_db.iter().map(|&b| db_to_linear(b)).collect();
    let a = SinrAnalysis::new(scn)?.curve(&grid)?;
    let w = window(scn, rsim)?;
    let sorted = stats::sorted(runner::simulate_map(
        scn,
        trials,
        seed,
        &w,
        runner::worker_count(),
        |t| t.sinr,
    )?);
    let band = stats::dkw_epsilon(trials, mc_sim::DKW_ALPHA);
    let mut t = Table::new(["beta_db", "lower", "approx", "upper", "empirical"]);
    let mut sup: f64 = 0.0;
    for i in 0..grid.len() {
        let e = stats::ecdf(&sorted, grid[i]);
        sup = sup.max((a.approx[i] - e).abs());
        t.push(vec![grid_db[i], a.lower[i], a.approx[i], a.upper[i], e]);
    }
    let mut side = base_sidecar("compare", scn);
    side.seed = Some(seed);
    side.note("trials", trials);
    side.note("window", window_json(&w));
    side.note("sup_distance", sup);
    side.note("dkw_band", band);
    Ok((t, side, sup))
}

/// Average spectral efficiency against cluster size.
pub fn avg_se(
    base: &Scenario,
    ks: &[u32],
    pilots: &[u32],
    rule: RadiusRule,
) -> anyhow::Result<(Table, Sidecar)> {
    let mut cols = vec!["k".to_string(), "perfect".to_string()];
    cols.extend(pilots.iter().map(|n| format!("pilots_{n}")));
    let mut curves = vec![csi::avg_se_vs_k(base, ks, CsiMode::Perfect, rule)?];
    for &n in pilots {
        curves.push(csi::avg_se_vs_k(base, ks, CsiMode::Pilot(n), rule)?);
    }
    let mut t = Table::new(cols);
    for (i, &k) in ks.iter().enumerate() {
        let mut row = vec![k as f64];
        row.extend(curves.iter().map(|c| c[i]));
        t.push(row);
    }
    let mut side = base_sidecar("avg-se", base);
    side.note(
        "radius_rule",
        match rule {
            RadiusRule::Fixed => "fixed",
            RadiusRule::MatchDensity => "match-density",
        },
    );
    Ok((t, side))
}

/// Resource saving over cluster-edge thresholds in dB.
pub fn delta(
    model: &FadingModel,
    alpha: f64,
    ttilde_db: &[f64],
) -> anyhow::Result<(Table, Sidecar)> {
    let edges: Vec<f64> = ttilde_db.iter().map(|&d| db_to_linear(d)).collect();
    let v = scheduling::delta_curve(model, alpha, &edges)?;
    let mut t = Table::new(["ttilde_db", "delta"]);
    for (d, x) in ttilde_db.iter().zip(v) {
        t.push(vec![*d, x]);
    }
    let mut side = Sidecar::new("delta");
    side.note("path_loss", alpha);
    side.note(
        "fading",
        serde_json::to_value(crate::scenario_file::FadingSpec::from(*model))?,
    );
    Ok((t, side))
}
