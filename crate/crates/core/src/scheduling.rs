//! Frequency reuse versus coordinated scheduling inside the cluster.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fading::FadingModel;
use crate::scenario::{Scenario, Scheduling};
use crate::sinr::{CdfCurve, SinrAnalysis};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SchedulingReport {
    /// Average fraction of cluster stations freed by switching CS to FR.
    pub delta: f64,
    pub fr_curve: CdfCurve,
    pub cs_curve: CdfCurve,
    /// `max |F_FR - F_CS|` over the grid (approximation column).
    pub sup_gap: f64,
}

/// `Delta = 1 - E[min{1, (g / T~)^(2/alpha)}]`, the probability that a
/// station uniform in the cooperation disk stays inactive. Independent of
/// density and radius.
pub fn delta_saving(model: &FadingModel, alpha: f64, edge: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::domain(
            "delta_saving",
            "path-loss exponent must exceed 2",
        ));
    }
    if !(edge >= 0.0) {
        return Err(Error::domain(
            "delta_saving",
            "threshold must be non-negative",
        ));
    }
    Ok(model.activation_split(edge, 2.0 / alpha)?.inactive())
}

/// FR and CS curves on the same grid, plus the resource saving.
pub fn compare_fr_cs(scn: &Scenario, grid: &[f64]) -> Result<SchedulingReport> {
    if grid.is_empty() {
        return Err(Error::Empty("threshold grid"));
    }
    let fr = SinrAnalysis::new(&scn.with_scheduling(Scheduling::FullReuse))?.curve(grid)?;
    let cs = SinrAnalysis::new(&scn.with_scheduling(Scheduling::Coordinated))?.curve(grid)?;
    let sup_gap = fr
        .approx
        .iter()
        .zip(&cs.approx)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(SchedulingReport {
        delta: delta_saving(&scn.fading, scn.path_loss, scn.edge_threshold)?,
        fr_curve: fr,
        cs_curve: cs,
        sup_gap,
    })
}

/// `Delta` over a grid of cluster-edge thresholds.
pub fn delta_curve(model: &FadingModel, alpha: f64, edges: &[f64]) -> Result<Vec<f64>> {
    edges
        .iter()
        .map(|&e| delta_saving(model, alpha, e))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_limits() {
        let e = FadingModel::Exponential;
        assert_eq!(delta_saving(&e, 3.5, 0.0).unwrap(), 0.0);
        assert!(delta_saving(&e, 3.5, 1e6).unwrap() > 0.99);
        assert!(delta_saving(&e, 2.0, 1.0).is_err());
    }

    #[test]
    fn deterministic_step() {
        let d = FadingModel::Deterministic;
        assert_eq!(delta_saving(&d, 4.0, 0.5).unwrap(), 0.0);
        assert_eq!(delta_saving(&d, 4.0, 1.0).unwrap(), 0.0);
        let v = delta_saving(&d, 4.0, 4.0).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exponential_closed_form() {
        let t: f64 = 1.0;
        let delta = 2.0 / 3.5;
        let g = crate::specfun::gamma_lower(1.0 + delta, t).unwrap();
        let expect = 1.0 - (-t).exp() - t.powf(-delta) * g;
        assert!((delta_saving(&FadingModel::Exponential, 3.5, t).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn strictly_increasing() {
        let v = delta_curve(&FadingModel::Exponential, 3.5, &[0.1, 0.5, 1.0, 4.0, 10.0]).unwrap();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
}
