//! TOML scenario files.
//!
//! Units follow the usual link-budget conventions: density per km², radius
//! in metres, thresholds and SNR in dB. Conversion to the linear units of
//! the core happens here and nowhere else.
//!
//! ```toml
//! density_per_km2 = 14.0
//! path_loss = 4.0
//! coop_radius_m = 300.0
//! edge_threshold_db = 0.0
//! tx_snr_db = 162.0
//! cluster_size = 3        # omit for a Poisson cluster
//! scheduling = "fr"       # or "cs"
//! pilots = 200            # omit for perfect CSI
//!
//! [fading]
//! model = "lognormal"
//! sigma_db = 6.0
//! ```

use std::path::Path;

use anyhow::{bail, Context};
use ncjt_core::{ClusterMode, CsiMode, FadingModel, Scenario, Scheduling};
use serde::{Deserialize, Serialize};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FadingSpec {
    Exponential {},
    Deterministic {},
    Lognormal { sigma_db: f64 },
    NakagamiLognormal { m: f64, sigma_db: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SchedulingSpec {
    Fr,
    Cs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub density_per_km2: f64,
    pub path_loss: f64,
    pub coop_radius_m: f64,
    #[serde(default)]
    pub edge_threshold_db: Option<f64>,
    pub tx_snr_db: f64,
    pub fading: FadingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_size: Option<u32>,
    #[serde(default = "default_scheduling")]
    pub scheduling: SchedulingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilots: Option<u32>,
}

fn default_scheduling() -> SchedulingSpec {
    SchedulingSpec::Fr
}

impl From<FadingSpec> for FadingModel {
    fn from(f: FadingSpec) -> Self {
        match f {
            FadingSpec::Exponential {} => FadingModel::Exponential,
            FadingSpec::Deterministic {} => FadingModel::Deterministic,
            FadingSpec::Lognormal { sigma_db } => FadingModel::Lognormal { sigma_db },
            FadingSpec::NakagamiLognormal { m, sigma_db } => {
                FadingModel::NakagamiLognormal { m, sigma_db }
            }
        }
    }
}

impl From<FadingModel> for FadingSpec {
    fn from(f: FadingModel) -> Self {
        match f {
            FadingModel::Exponential => FadingSpec::Exponential {},
            FadingModel::Deterministic => FadingSpec::Deterministic {},
            FadingModel::Lognormal { sigma_db } => FadingSpec::Lognormal { sigma_db },
            FadingModel::NakagamiLognormal { m, sigma_db } => {
                FadingSpec::NakagamiLognormal { m, sigma_db }
            }
        }
    }
}

impl ScenarioFile {
    /// Linear-unit scenario. A missing edge threshold means `T = 0`
    /// (every cluster station transmits).
    pub fn to_scenario(&self) -> ncjt_core::Result<Scenario> {
        let edge = self.edge_threshold_db.map_or(0.0, db_to_linear);
        let scn = Scenario::new(
            self.density_per_km2 * 1e-6,
            self.path_loss,
            self.coop_radius_m,
            edge,
            db_to_linear(self.tx_snr_db),
            self.fading.into(),
        )
        .with_cluster(match self.cluster_size {
            Some(k) => ClusterMode::Conditional(k),
            None => ClusterMode::Unconditional,
        })
        .with_scheduling(match self.scheduling {
            SchedulingSpec::Fr => Scheduling::FullReuse,
            SchedulingSpec::Cs => Scheduling::Coordinated,
        })
        .with_csi(match self.pilots {
            Some(n) => CsiMode::Pilot(n),
            None => CsiMode::Perfect,
        });
        scn.validate()?;
        Ok(scn)
    }

    pub fn from_scenario(scn: &Scenario) -> Self {
        ScenarioFile {
            density_per_km2: scn.density * 1e6,
            path_loss: scn.path_loss,
            coop_radius_m: scn.coop_radius,
            edge_threshold_db: (scn.edge_threshold > 0.0).then(|| linear_to_db(scn.edge_threshold)),
            tx_snr_db: linear_to_db(scn.tx_snr),
            fading: scn.fading.into(),
            cluster_size: match scn.cluster {
                ClusterMode::Conditional(k) => Some(k),
                ClusterMode::Unconditional => None,
            },
            scheduling: match scn.scheduling {
                Scheduling::FullReuse => SchedulingSpec::Fr,
                Scheduling::Coordinated => SchedulingSpec::Cs,
            },
            pilots: match scn.csi {
                CsiMode::Pilot(n) => Some(n),
                CsiMode::Perfect => None,
            },
        }
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in scenario file {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }
}

/// Parse `lo:hi:n` into its parts.
pub fn parse_range(spec: &str) -> anyhow::Result<(f64, f64, usize)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("expected lo:hi:n, got {spec:?}");
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .with_context(|| format!("bad lower end in {spec:?}"))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .with_context(|| format!("bad upper end in {spec:?}"))?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .with_context(|| format!("bad count in {spec:?}"))?;
    if n == 0 || hi.is_nan() || lo.is_nan() || hi < lo || (n > 1 && hi == lo) {
        bail!("empty or reversed range {spec:?}");
    }
    Ok((lo, hi, n))
}

/// Parse `a..b` or `a..=b` or a comma list of integers.
pub fn parse_int_list(spec: &str) -> anyhow::Result<Vec<u32>> {
    let spec = spec.trim();
    let v: Vec<u32> = if let Some((a, b)) = spec.split_once("..=") {
        (a.trim().parse()?..=b.trim().parse()?).collect()
    } else if let Some((a, b)) = spec.split_once("..") {
        (a.trim().parse()?..b.trim().parse()?).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_, _>>()
            .with_context(|| format!("bad integer list {spec:?}"))?
    };
    if v.is_empty() {
        bail!("empty list {spec:?}");
    }
    Ok(v)
}
