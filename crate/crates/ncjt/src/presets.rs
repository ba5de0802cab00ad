//! Figure presets: named parameter sets and the tables they produce.
//!
//! Parameters that the figures leave open are listed under `swept` in the
//! sidecar together with the values used here.

use ncjt_core::csi::RadiusRule;
use ncjt_core::mc_sim;
use ncjt_core::sinr::SinrAnalysis;
use ncjt_core::stats;
use ncjt_core::{ClusterMode, FadingModel, Scenario, Scheduling};
use serde_json::json;

use crate::commands::{self, linspace};
use crate::output::{Sidecar, Table};
use crate::runner;
use crate::scenario_file::{db_to_linear, ScenarioFile};

pub const NAMES: [&str; 9] = [
    "fig2a", "fig2b", "fig4", "fig5", "fig6a", "fig6b", "fig7a", "fig8a", "fig8b",
];

pub const TX_SNR_DB: f64 = 162.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FigureOptions {
    /// Monte Carlo trials per curve; zero skips the simulated columns.
    pub trials: u64,
    pub seed: u64,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            trials: 100_000,
            seed: 1,
        }
    }
}

/// One output file of a figure.
pub struct FigureData {
    pub stem: String,
    pub table: Table,
    pub sidecar: Sidecar,
}

pub fn scenario(
    density_km2: f64,
    alpha: f64,
    d: f64,
    ttilde_db: Option<f64>,
    fading: FadingModel,
) -> Scenario {
    Scenario::new(
        density_km2 * 1e-6,
        alpha,
        d,
        ttilde_db.map_or(0.0, db_to_linear),
        db_to_linear(TX_SNR_DB),
        fading,
    )
}

/// Unconditional SINR scenario of the main-result figure.
pub fn fig4_scenario(alpha: f64) -> Scenario {
    scenario(14.0, alpha, 300.0, Some(0.0), FadingModel::Exponential)
}

/// Conditional counterpart with `K = 3`.
pub fn fig5_scenario(alpha: f64) -> Scenario {
    fig4_scenario(alpha).with_cluster(ClusterMode::Conditional(3))
}

/// Interference-fit cells: `D` in {450, 750} m and `T~` in {0, 6} dB.
pub fn fig2_scenarios(alpha: f64) -> Vec<(String, Scenario)> {
    let mut v = Vec::new();
    for d in [450.0, 750.0] {
        for t in [0.0, 6.0] {
            v.push((
                format!("d{d}_t{t}"),
                scenario(4.0, alpha, d, Some(t), FadingModel::Exponential),
            ));
        }
    }
    v
}

pub fn fig6_fadings() -> [(&'static str, FadingModel); 3] {
    [
        ("deterministic", FadingModel::Deterministic),
        ("lognormal", FadingModel::Lognormal { sigma_db: 6.0 }),
        (
            "nakagami_lognormal",
            FadingModel::NakagamiLognormal {
                m: 4.0,
                sigma_db: 8.0,
            },
        ),
    ]
}

/// Fading comparison at `alpha = 4.5`; `D` and `T~` are not given by the
/// figure and default to the main-result values.
pub fn fig6_scenario(fading: FadingModel) -> Scenario {
    scenario(14.0, 4.5, 300.0, Some(0.0), fading)
}

/// Cluster-size sweep base: `T = 0`, radius tied to `K`.
pub fn fig7_base() -> Scenario {
    scenario(4.0, 4.0, 300.0, None, FadingModel::Exponential)
}

pub const FIG7_PILOTS: [u32; 3] = [100, 200, 400];
pub const FIG7_RULE: RadiusRule = RadiusRule::MatchDensity;

pub fn fig8_scenario(ttilde_db: f64, scheduling: Scheduling) -> Scenario {
    scenario(14.0, 3.5, 400.0, Some(ttilde_db), FadingModel::Exponential)
        .with_scheduling(scheduling)
}

pub const FIG8_TTILDE_DB: [f64; 3] = [-10.0, 0.0, 6.0];

fn sinr_grid_db() -> Vec<f64> {
    linspace(-10.0, 20.0, 81)
}

fn empirical(
    scn: &Scenario,
    grid: &[f64],
    opts: &FigureOptions,
    f: impl Fn(f64) -> f64 + Sync,
) -> anyhow::Result<Vec<f64>> {
    let w = mc_sim::default_window(scn)?;
    let s = stats::sorted(runner::simulate_map(
        scn,
        opts.trials,
        opts.seed,
        &w,
        runner::worker_count(),
        |t| f(t.sinr),
    )?);
    Ok(grid.iter().map(|&x| stats::ecdf(&s, x)).collect())
}

/// SINR CDFs of several labelled scenarios on the standard grid.
fn sinr_family(
    name: &str,
    family: &[(String, Scenario)],
    opts: &FigureOptions,
    bounds: bool,
) -> anyhow::Result<FigureData> {
    let grid_db = sinr_grid_db();
    let grid: Vec<f64> = grid_db.iter().map(|&b| db_to_linear(b)).collect();
    let mut cols = vec!["beta_db".to_string()];
    let mut data: Vec<Vec<f64>> = Vec::new();
    let mut side = Sidecar::new(&format!("figure {name}"));
    for (label, scn) in family {
        let c = SinrAnalysis::new(scn)?.curve(&grid)?;
        if bounds {
            cols.push(format!("lower_{label}"));
            data.push(c.lower.clone());
        }
        cols.push(format!("approx_{label}"));
        data.push(c.approx.clone());
        if bounds {
            cols.push(format!("upper_{label}"));
            data.push(c.upper.clone());
        }
        if opts.trials > 0 {
            let e = empirical(scn, &grid, opts, |x| x)?;
            let sup = c
                .approx
                .iter()
                .zip(&e)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            side.note(&format!("sup_distance_{label}"), sup);
            cols.push(format!("mc_{label}"));
            data.push(e);
        }
        side = side.scenario(label, ScenarioFile::from_scenario(scn));
    }
    let mut t = Table::new(cols);
    for i in 0..grid.len() {
        let mut row = vec![grid_db[i]];
        row.extend(data.iter().map(|c| c[i]));
        t.push(row);
    }
    if opts.trials > 0 {
        side.seed = Some(opts.seed);
        side.note("trials", opts.trials);
    }
    Ok(FigureData {
        stem: name.to_string(),
        table: t,
        sidecar: side,
    })
}

/// Rate CDFs `P(log2(1 + SINR) <= tau)` of labelled scenarios.
fn rate_family(
    name: &str,
    family: &[(String, Scenario)],
    opts: &FigureOptions,
) -> anyhow::Result<FigureData> {
    let taus = linspace(0.0, 8.0, 81);
    let betas: Vec<f64> = taus
        .iter()
        .map(|t| (t * std::f64::consts::LN_2).exp_m1())
        .collect();
    let mut cols = vec!["rate".to_string()];
    let mut data = Vec::new();
    let mut side = Sidecar::new(&format!("figure {name}"));
    for (label, scn) in family {
        let a = SinrAnalysis::new(scn)?;
        let v = taus
            .iter()
            .map(|&t| a.rate_cdf(t))
            .collect::<Result<Vec<_>, _>>()?;
        cols.push(format!("approx_{label}"));
        if opts.trials > 0 {
            let e = empirical(scn, &betas, opts, |x| x)?;
            let sup = v
                .iter()
                .zip(&e)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            side.note(&format!("sup_distance_{label}"), sup);
            data.push(v);
            cols.push(format!("mc_{label}"));
            data.push(e);
        } else {
            data.push(v);
        }
        side = side.scenario(label, ScenarioFile::from_scenario(scn));
    }
    let mut t = Table::new(cols);
    for i in 0..taus.len() {
        let mut row = vec![taus[i]];
        row.extend(data.iter().map(|c: &Vec<f64>| c[i]));
        t.push(row);
    }
    if opts.trials > 0 {
        side.seed = Some(opts.seed);
        side.note("trials", opts.trials);
    }
    Ok(FigureData {
        stem: name.to_string(),
        table: t,
        sidecar: side,
    })
}

fn fig2(name: &str, alpha: f64, opts: &FigureOptions) -> anyhow::Result<FigureData> {
    let cells = fig2_scenarios(alpha);
    let mut cols = vec!["x_rel_db".to_string()];
    let mut data: Vec<Vec<f64>> = Vec::new();
    let mut side = Sidecar::new(&format!("figure {name}"));
    let mc = (opts.trials > 0).then_some((opts.trials, opts.seed));
    let mut rel = Vec::new();
    for (label, scn) in &cells {
        let (t, s) = commands::fit_gamma(scn, mc, None)?;
        rel = t.column("x_rel_db").expect("column");
        cols.push(format!("fitted_{label}"));
        data.push(t.column("fitted_cdf").expect("column"));
        if let Some(e) = t.column("empirical_cdf") {
            cols.push(format!("mc_{label}"));
            data.push(e);
        }
        side.note(
            &format!("fit_{label}"),
            serde_json::Value::Object(s.summary),
        );
        side = side.scenario(label, ScenarioFile::from_scenario(scn));
    }
    let mut t = Table::new(cols);
    for i in 0..rel.len() {
        let mut row = vec![rel[i]];
        row.extend(data.iter().map(|c| c[i]));
        t.push(row);
    }
    side.swept.push(
        "density_per_km2 (figure quotes only the ~500 m inter-site distance; 4/km² used)".into(),
    );
    if mc.is_some() {
        side.seed = Some(opts.seed);
    }
    Ok(FigureData {
        stem: name.to_string(),
        table: t,
        sidecar: side,
    })
}

/// Build every file of the named figure.
pub fn figure(name: &str, opts: &FigureOptions) -> anyhow::Result<Vec<FigureData>> {
    let data = match name {
        "fig2a" => fig2(name, 3.0, opts)?,
        "fig2b" => fig2(name, 5.0, opts)?,
        "fig4" => sinr_family(
            name,
            &[3.5, 4.5].map(|a| (format!("alpha{a}"), fig4_scenario(a))),
            opts,
            true,
        )?,
        "fig5" => sinr_family(
            name,
            &[3.5, 4.5].map(|a| (format!("alpha{a}"), fig5_scenario(a))),
            opts,
            true,
        )?,
        "fig6a" => {
            let fam: Vec<_> = fig6_fadings()
                .iter()
                .map(|(l, f)| (l.to_string(), fig6_scenario(*f)))
                .collect();
            let mut d = sinr_family(name, &fam, opts, false)?;
            d.sidecar.swept.push("coop_radius_m (300 used)".into());
            d.sidecar.swept.push("edge_threshold_db (0 used)".into());
            d
        }
        "fig6b" => {
            let fam = [(
                "exponential".to_string(),
                fig6_scenario(FadingModel::Exponential),
            )];
            let mut d = rate_family(name, &fam, opts)?;
            d.sidecar.swept.push("coop_radius_m (300 used)".into());
            d.sidecar.swept.push("edge_threshold_db (0 used)".into());
            d
        }
        "fig7a" => {
            let ks: Vec<u32> = (1..=10).collect();
            let (t, mut s) = commands::avg_se(&fig7_base(), &ks, &FIG7_PILOTS, FIG7_RULE)?;
            s.command = format!("figure {name}");
            s.swept.push(format!("pilots ({:?} used)", FIG7_PILOTS));
            s.swept
                .push("cluster sizes (1..=10 used, radius sqrt(K / (lambda pi)))".into());
            FigureData {
                stem: name.to_string(),
                table: t,
                sidecar: s,
            }
        }
        "fig8a" => {
            let (t, mut s) =
                commands::delta(&FadingModel::Exponential, 3.5, &linspace(-10.0, 10.0, 81))?;
            s.command = format!("figure {name}");
            s.swept.push("edge_threshold_db (-10..10 dB used)".into());
            FigureData {
                stem: name.to_string(),
                table: t,
                sidecar: s,
            }
        }
        "fig8b" => {
            let mut fam = Vec::new();
            for t in FIG8_TTILDE_DB {
                fam.push((format!("fr_t{t}"), fig8_scenario(t, Scheduling::FullReuse)));
                fam.push((
                    format!("cs_t{t}"),
                    fig8_scenario(t, Scheduling::Coordinated),
                ));
            }
            let mut d = rate_family(name, &fam, opts)?;
            d.sidecar
                .swept
                .push(format!("edge_threshold_db ({:?} used)", FIG8_TTILDE_DB));
            let deltas: Vec<_> = FIG8_TTILDE_DB
                .iter()
                .map(|&t| {
                    ncjt_core::scheduling::delta_saving(
                        &FadingModel::Exponential,
                        3.5,
                        db_to_linear(t),
                    )
                })
                .collect::<Result<_, _>>()?;
            d.sidecar.note("delta", json!(deltas));
            d
        }
        _ => anyhow::bail!("unknown figure {name:?}; known: {}", NAMES.join(", ")),
    };
    Ok(vec![data])
}
