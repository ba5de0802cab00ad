use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ncjt::commands::{self, linspace, CdfColumns};
use ncjt::output::{self, Sidecar, Table};
use ncjt::presets::{self, FigureOptions};
use ncjt::scenario_file::{
    db_to_linear, parse_int_list, parse_range, ScenarioFile, SchedulingSpec,
};
use ncjt_core::csi::RadiusRule;
use ncjt_core::{ClusterMode, CsiMode, Scenario, Scheduling};

#[derive(Parser)]
#[command(
    name = "ncjt",
    version,
    about = "SINR analysis of non-coherent joint transmission in Poisson networks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Gamma fit of the interference-plus-noise term
    FitGamma {
        #[command(flatten)]
        scn: ScenarioArgs,
        /// Also simulate this many denominators and report the KS distance
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        rsim: Option<f64>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Analytic SINR CDF
    Cdf {
        #[command(flatten)]
        scn: ScenarioArgs,
        #[arg(long)]
        bounds: bool,
        #[arg(long)]
        approx: bool,
        /// Tail form truncated at this order
        #[arg(long, value_name = "M_HI")]
        tail: Option<usize>,
        /// Thresholds in dB as lo:hi:n
        #[arg(long, default_value = "-15:25:81")]
        beta_grid: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo samples of the SINR and its parts
    Simulate {
        #[command(flatten)]
        scn: ScenarioArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Simulation radius in metres
        #[arg(long)]
        rsim: Option<f64>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Analytic approximation against simulation
    Compare {
        #[command(flatten)]
        scn: ScenarioArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        rsim: Option<f64>,
        #[arg(long, default_value = "-15:25:81")]
        beta_grid: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Average spectral efficiency against cluster size
    AvgSe {
        #[command(flatten)]
        scn: ScenarioArgs,
        #[arg(long, default_value = "1..=10")]
        k_range: String,
        /// Comma-separated pilot counts
        #[arg(long, default_value = "100,200,400")]
        n_pilot: String,
        /// Keep D fixed instead of D = sqrt(K / (lambda pi))
        #[arg(long)]
        fixed_radius: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Resource saving of frequency reuse over coordinated scheduling
    Delta {
        #[command(flatten)]
        scn: ScenarioArgs,
        /// Cluster-edge thresholds in dB as lo:hi:n
        #[arg(long, default_value = "-10:10:81")]
        ttilde_grid: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Data for a named figure preset
    Figure {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(presets::NAMES))]
        name: String,
        /// Monte Carlo trials per curve (0 for analytic only)
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

/// Scenario source and overrides. Without `--scenario` or `--preset` the
/// main-result configuration at alpha = 4 is used.
#[derive(Args)]
struct ScenarioArgs {
    /// TOML scenario file
    #[arg(long, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// fig4, fig5, fig6a, fig7a or fig8b
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Stations per km²
    #[arg(long)]
    density: Option<f64>,
    /// Cooperation radius in metres
    #[arg(long)]
    radius: Option<f64>,
    /// Cluster-edge threshold in dB
    #[arg(long)]
    ttilde_db: Option<f64>,
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long)]
    cluster_size: Option<u32>,
    #[arg(long, value_enum)]
    scheduling: Option<SchedulingSpec>,
    #[arg(long)]
    pilots: Option<u32>,
}

fn preset_scenario(name: &str) -> anyhow::Result<Scenario> {
    Ok(match name {
        "fig4" => presets::fig4_scenario(4.5),
        "fig5" => presets::fig5_scenario(4.5),
        "fig6a" => presets::fig6_scenario(ncjt_core::FadingModel::Lognormal { sigma_db: 6.0 }),
        "fig7a" => presets::fig7_base(),
        "fig8b" => presets::fig8_scenario(6.0, Scheduling::FullReuse),
        _ => anyhow::bail!("unknown preset {name:?}; known: fig4, fig5, fig6a, fig7a, fig8b"),
    })
}

impl ScenarioArgs {
    fn resolve(&self) -> anyhow::Result<Scenario> {
        let mut s = match (&self.scenario, &self.preset) {
            (Some(p), _) => ScenarioFile::load(p)?.to_scenario()?,
            (None, Some(n)) => preset_scenario(n)?,
            (None, None) => presets::fig4_scenario(4.0),
        };
        if let Some(a) = self.alpha {
            s.path_loss = a;
        }
        if let Some(d) = self.density {
            s.density = d * 1e-6;
        }
        if let Some(r) = self.radius {
            s.coop_radius = r;
        }
        if let Some(t) = self.ttilde_db {
            s.edge_threshold = db_to_linear(t);
        }
        if let Some(e) = self.snr_db {
            s.tx_snr = db_to_linear(e);
        }
        if let Some(k) = self.cluster_size {
            s.cluster = ClusterMode::Conditional(k);
        }
        if let Some(sc) = self.scheduling {
            s.scheduling = match sc {
                SchedulingSpec::Fr => Scheduling::FullReuse,
                SchedulingSpec::Cs => Scheduling::Coordinated,
            };
        }
        if let Some(n) = self.pilots {
            s.csi = CsiMode::Pilot(n);
        }
        s.validate()?;
        Ok(s)
    }
}

fn grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let (lo, hi, n) = parse_range(spec)?;
    Ok(linspace(lo, hi, n))
}

fn emit(t: &Table, s: &Sidecar, out: Option<&Path>) -> anyhow::Result<()> {
    output::emit(t, s, out)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::FitGamma {
            scn,
            trials,
            seed,
            rsim,
            out,
        } => {
            let s = scn.resolve()?;
            let (t, side) = commands::fit_gamma(&s, trials.map(|n| (n, seed)), rsim)?;
            if let Some(ks) = side.summary.get("ks_distance") {
                eprintln!("ks distance {ks}");
            }
            emit(&t, &side, out.as_deref())
        }
        Cmd::Cdf {
            scn,
            bounds,
            approx,
            tail,
            beta_grid,
            out,
        } => {
            let s = scn.resolve()?;
            let cols = CdfColumns {
                bounds,
                approx: approx || !(bounds || tail.is_some()),
                tail,
            };
            let (t, side) = commands::cdf(&s, &grid(&beta_grid)?, cols)?;
            emit(&t, &side, out.as_deref())
        }
        Cmd::Simulate {
            scn,
            trials,
            seed,
            rsim,
            out,
        } => {
            let s = scn.resolve()?;
            let (t, side) =
                commands::simulate(&s, trials, seed, rsim, ncjt::runner::worker_count())?;
            emit(&t, &side, out.as_deref())
        }
        Cmd::Compare {
            scn,
            trials,
            seed,
            rsim,
            beta_grid,
            out,
        } => {
            let s = scn.resolve()?;
            let (t, side, sup) = commands::compare(&s, &grid(&beta_grid)?, trials, seed, rsim)?;
            eprintln!(
                "sup distance {sup:.5} (DKW band {:.5})",
                side.summary["dkw_band"].as_f64().unwrap_or(0.0)
            );
            emit(&t, &side, out.as_deref())
        }
        Cmd::AvgSe {
            scn,
            k_range,
            n_pilot,
            fixed_radius,
            out,
        } => {
            let s = scn.resolve()?;
            let rule = if fixed_radius {
                RadiusRule::Fixed
            } else {
                RadiusRule::MatchDensity
            };
            let (t, side) = commands::avg_se(
                &s,
                &parse_int_list(&k_range)?,
                &parse_int_list(&n_pilot)?,
                rule,
            )?;
            emit(&t, &side, out.as_deref())
        }
        Cmd::Delta {
            scn,
            ttilde_grid,
            out,
        } => {
            let s = scn.resolve()?;
            let (t, side) = commands::delta(&s.fading, s.path_loss, &grid(&ttilde_grid)?)?;
            emit(&t, &side, out.as_deref())
        }
        Cmd::Figure {
            name,
            trials,
            seed,
            out_dir,
        } => {
            for d in presets::figure(&name, &FigureOptions { trials, seed })? {
                let p = out_dir.join(format!("{}.csv", d.stem));
                emit(&d.table, &d.sidecar, Some(&p))?;
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}

/// 2 for bad input, 3 when the series needs more derivatives than allowed,
/// 1 for anything else.
fn exit_code(e: &anyhow::Error) -> u8 {
    for c in e.chain() {
        if let Some(ce) = c.downcast_ref::<ncjt_core::Error>() {
            return match ce {
                ncjt_core::Error::DerivativeCap { .. } => 3,
                ncjt_core::Error::Quadrature { .. } => 1,
                _ => 2,
            };
        }
        if c.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
