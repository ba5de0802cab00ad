//! Network model configuration.

use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fading::FadingModel;
use crate::{Error, Result};

/// How many stations the cooperation disk holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterMode {
    /// Poisson count with mean `lambda pi D^2`.
    Unconditional,
    /// Exactly `K` stations, uniform in the disk.
    Conditional(u32),
}

/// Intra-cluster resource usage of non-serving cluster members.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheduling {
    /// Frequency reuse: inactive cluster stations interfere.
    FullReuse,
    /// Coordinated scheduling: inactive cluster stations stay silent.
    Coordinated,
}

/// Receiver-side channel knowledge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsiMode {
    Perfect,
    /// MMSE estimation from `N` pilot symbols shared by the cluster.
    Pilot(u32),
}

/// Full model configuration in linear units (metres, per-m² densities,
/// received powers referenced to 1 m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    /// Base-station density `lambda` in stations per m².
    pub density: f64,
    /// Path-loss exponent `alpha > 2`.
    pub path_loss: f64,
    /// Cooperation radius `D` in metres.
    pub coop_radius: f64,
    /// Cluster-edge activation threshold `T~ = T D^alpha` (linear).
    pub edge_threshold: f64,
    /// Transmit SNR `eta` (linear).
    pub tx_snr: f64,
    pub fading: FadingModel,
    pub cluster: ClusterMode,
    pub scheduling: Scheduling,
    pub csi: CsiMode,
}

impl Scenario {
    /// Frequency reuse, perfect CSI, unconditional cluster.
    pub fn new(
        density: f64,
        path_loss: f64,
        coop_radius: f64,
        edge_threshold: f64,
        tx_snr: f64,
        fading: FadingModel,
    ) -> Self {
        Scenario {
            density,
            path_loss,
            coop_radius,
            edge_threshold,
            tx_snr,
            fading,
            cluster: ClusterMode::Unconditional,
            scheduling: Scheduling::FullReuse,
            csi: CsiMode::Perfect,
        }
    }

    pub fn with_cluster(mut self, cluster: ClusterMode) -> Self {
        self.cluster = cluster;
        self
    }

    pub fn with_scheduling(mut self, scheduling: Scheduling) -> Self {
        self.scheduling = scheduling;
        self
    }

    pub fn with_csi(mut self, csi: CsiMode) -> Self {
        self.csi = csi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.path_loss > 2.0) || !self.path_loss.is_finite() {
            return Err(Error::InvalidScenario("path-loss exponent must exceed 2"));
        }
        if !(self.coop_radius > 0.0) || !self.coop_radius.is_finite() {
            return Err(Error::InvalidScenario(
                "cooperation radius must be positive",
            ));
        }
        if !(self.density > 0.0) || !self.density.is_finite() {
            return Err(Error::InvalidScenario("density must be positive"));
        }
        if !(self.tx_snr > 0.0) {
            return Err(Error::InvalidScenario("transmit SNR must be positive"));
        }
        if !(self.edge_threshold >= 0.0) {
            return Err(Error::InvalidScenario(
                "activation threshold must be non-negative",
            ));
        }
        if let ClusterMode::Conditional(0) = self.cluster {
            return Err(Error::InvalidScenario(
                "conditional cluster size must be at least 1",
            ));
        }
        if let CsiMode::Pilot(0) = self.csi {
            return Err(Error::InvalidScenario("pilot count must be at least 1"));
        }
        self.fading.validate()
    }

    /// `delta = 2 / alpha`.
    pub fn delta(&self) -> f64 {
        2.0 / self.path_loss
    }

    /// Absolute activation threshold `T = T~ D^-alpha`.
    pub fn threshold(&self) -> f64 {
        if self.edge_threshold == 0.0 {
            return 0.0;
        }
        (self.edge_threshold.ln() - self.path_loss * self.coop_radius.ln()).exp()
    }

    /// `ln(D^-alpha)`, the log path gain at the cluster edge.
    pub fn ln_edge_gain(&self) -> f64 {
        -self.path_loss * self.coop_radius.ln()
    }

    pub fn noise(&self) -> f64 {
        1.0 / self.tx_snr
    }

    /// `lambda pi D^2`.
    pub fn mean_cluster_size(&self) -> f64 {
        self.density * PI * self.coop_radius * self.coop_radius
    }

    /// FNV-1a over every parameter, for provenance records.
    pub fn hash(&self) -> u64 {
        let mut h = Fnv::new();
        h.f64(self.density);
        h.f64(self.path_loss);
        h.f64(self.coop_radius);
        h.f64(self.edge_threshold);
        h.f64(self.tx_snr);
        match self.fading {
            FadingModel::Exponential => h.u64(1),
            FadingModel::Deterministic => h.u64(2),
            FadingModel::Lognormal { sigma_db } => {
                h.u64(3);
                h.f64(sigma_db);
            }
            FadingModel::NakagamiLognormal { m, sigma_db } => {
                h.u64(4);
                h.f64(m);
                h.f64(sigma_db);
            }
        }
        match self.cluster {
            ClusterMode::Unconditional => h.u64(0),
            ClusterMode::Conditional(k) => h.u64(1 << 32 | k as u64),
        }
        h.u64(match self.scheduling {
            Scheduling::FullReuse => 0,
            Scheduling::Coordinated => 1,
        });
        match self.csi {
            CsiMode::Perfect => h.u64(0),
            CsiMode::Pilot(n) => h.u64(1 << 32 | n as u64),
        }
        h.0
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Scenario {
        Scenario::new(14e-6, 4.0, 300.0, 1.0, 1e16, FadingModel::Exponential)
    }

    #[test]
    fn threshold_round_trip() {
        let s = base();
        assert!((s.threshold() * 300f64.powi(4) - 1.0).abs() < 1e-14);
        assert_eq!(s.delta(), 0.5);
    }

    #[test]
    fn validation_rejects_bad_values() {
        assert!(base().validate().is_ok());
        let mut s = base();
        s.path_loss = 2.0;
        assert!(s.validate().is_err());
        assert!(base()
            .with_cluster(ClusterMode::Conditional(0))
            .validate()
            .is_err());
        assert!(base().with_csi(CsiMode::Pilot(0)).validate().is_err());
        let mut s = base();
        s.edge_threshold = -1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn hash_distinguishes_modes() {
        let a = base();
        let b = base().with_scheduling(Scheduling::Coordinated);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), base().hash());
    }
}
