//! Second-order Gamma fit of interference plus noise.
//!
//! The denominator `J_C + J_Cbar + 1/eta` is replaced by a Gamma variable
//! with the same mean and variance. Moments come from Campbell's theorem.

use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::scenario::{ClusterMode, CsiMode, Scenario, Scheduling};
use crate::specfun;
use crate::{csi, Error, Result};

/// Gamma law with shape `k` and scale `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFit {
    pub shape: f64,
    pub scale: f64,
}

impl GammaFit {
    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        specfun::gamma_p(self.shape, x / self.scale).unwrap_or(1.0)
    }
}

/// Moment match: `k = mean^2 / var`, `theta = var / mean`.
pub fn fit(mean: f64, variance: f64) -> Result<GammaFit> {
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::domain("fit", "mean must be positive"));
    }
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::domain("fit", "variance must be positive"));
    }
    Ok(GammaFit {
        shape: mean * mean / variance,
        scale: variance / mean,
    })
}

/// Mean and variance of the out-of-cluster interference `J_Cbar`.
pub fn out_of_cluster_moments(scn: &Scenario) -> (f64, f64) {
    let a = scn.path_loss;
    let ln_d = scn.coop_radius.ln();
    let mean = 2.0 * PI * scn.density / (a - 2.0) * ((2.0 - a) * ln_d).exp();
    let var =
        PI * scn.density / (a - 1.0) * scn.fading.mean_square() * ((2.0 - 2.0 * a) * ln_d).exp();
    (mean, var)
}

/// Per-station intra-cluster moments for a station uniform in the disk:
/// `(E[X; X < T], E[X^2; X < T])` with `X = g |x|^-alpha`.
pub fn intra_station_moments(scn: &Scenario) -> Result<(f64, f64)> {
    let edge = scn.edge_threshold;
    if edge == 0.0 {
        return Ok((0.0, 0.0));
    }
    let a = scn.path_loss;
    let delta = scn.delta();
    let d2 = scn.coop_radius * scn.coop_radius;
    let ln_d = scn.coop_radius.ln();
    let f = &scn.fading;
    let (below_d, below_1, below_2) = if edge.is_infinite() {
        // Every station is inactive; moments diverge at the disk centre.
        return Err(Error::domain("intra_station_moments", "infinite threshold"));
    } else {
        (
            f.partial_moment(delta, 0.0, edge)?,
            f.partial_moment(1.0, 0.0, edge)?,
            f.partial_moment(2.0, 0.0, edge)?,
        )
    };
    let ln_edge = edge.ln();
    // T~^(n - delta) E[g^delta; g < T~] - E[g^n; g < T~] >= 0
    let b1 = (((1.0 - delta) * ln_edge).exp() * below_d - below_1).max(0.0);
    let b2 = (((2.0 - delta) * ln_edge).exp() * below_d - below_2).max(0.0);
    let e1 = 2.0 / ((a - 2.0) * d2) * ((2.0 - a) * ln_d).exp() * b1;
    let e2 = 1.0 / ((a - 1.0) * d2) * ((2.0 - 2.0 * a) * ln_d).exp() * b2;
    Ok((e1, e2))
}

/// Mean and variance of `J_C` under frequency reuse.
pub fn intra_cluster_moments(scn: &Scenario) -> Result<(f64, f64)> {
    if scn.scheduling == Scheduling::Coordinated || scn.edge_threshold == 0.0 {
        return Ok((0.0, 0.0));
    }
    let (e1, e2) = intra_station_moments(scn)?;
    Ok(match scn.cluster {
        ClusterMode::Unconditional => {
            let n = scn.mean_cluster_size();
            (n * e1, n * e2)
        }
        ClusterMode::Conditional(k) => {
            let k = k as f64;
            (k * e1, k * (e2 - e1 * e1).max(0.0))
        }
    })
}

/// Mean and variance of the Gamma-approximated denominator.
pub fn interference_moments(scn: &Scenario) -> Result<(f64, f64)> {
    scn.validate()?;
    let (mo, vo) = out_of_cluster_moments(scn);
    let (mi, vi) = intra_cluster_moments(scn)?;
    let (mc, vc) = match scn.csi {
        CsiMode::Perfect => (0.0, 0.0),
        CsiMode::Pilot(_) => csi::residual_moments(scn)?,
    };
    Ok((scn.noise() + mo + mi + mc, vo + vi + vc))
}

/// Gamma fit of the scenario's denominator.
pub fn fit_scenario(scn: &Scenario) -> Result<GammaFit> {
    let (m, v) = interference_moments(scn)?;
    fit(m, v)
}
