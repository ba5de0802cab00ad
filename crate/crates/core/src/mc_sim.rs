//! Monte Carlo ground truth: draws the station field around a user at the
//! origin and evaluates the SINR definition directly.
//!
//! Each trial owns a ChaCha8 stream selected by its index, so any subset of
//! trials can be computed in any order (or in parallel) with bit-identical
//! results.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;
#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::gamma_fit;
use crate::scenario::{ClusterMode, CsiMode, Scenario, Scheduling};
use crate::sinr::{CdfCurve, Provenance};
use crate::stats::{self, Welford};
use crate::{Error, Result};

/// Expected station count above which the window stops growing; the mean
/// of everything farther out is added deterministically instead.
pub const POINT_BUDGET: f64 = 500.0;

/// Target truncation bias relative to the mean interference.
pub const BIAS_TARGET: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrialSample {
    /// Useful power `P` (after MMSE scaling under pilot estimation).
    pub useful_power: f64,
    /// Intra-cluster interference `J_C` (zero under coordinated scheduling).
    pub intra_interference: f64,
    /// Out-of-cluster interference `J_Cbar`, far-field mean included.
    pub out_interference: f64,
    /// Residual interference from channel-estimation error.
    pub csi_interference: f64,
    pub sinr: f64,
    pub active_count: u32,
    pub cluster_count: u32,
}

impl TrialSample {
    /// `J_CSI + J_C + J_Cbar + 1/eta`.
    pub fn denominator(&self, noise: f64) -> f64 {
        self.csi_interference + self.intra_interference + self.out_interference + noise
    }
}

/// Simulation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimWindow {
    pub radius: f64,
    /// Campbell mean of the interference beyond `radius`, added to every trial.
    pub far_field_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub trials: Vec<TrialSample>,
    pub seed: u64,
    pub scenario_hash: u64,
    pub window: SimWindow,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn sorted_sinr(&self) -> Vec<f64> {
        stats::sorted(self.trials.iter().map(|t| t.sinr))
    }
}

/// Mean interference from stations beyond `r_sim`:
/// `2 pi lambda / (alpha - 2) R^(2 - alpha)`.
pub fn estimate_truncation_bias(scn: &Scenario, r_sim: f64) -> f64 {
    if r_sim.is_infinite() {
        return 0.0;
    }
    let a = scn.path_loss;
    2.0 * PI * scn.density / (a - 2.0) * ((2.0 - a) * r_sim.ln()).exp()
}

/// Radius at which the truncation bias falls to `BIAS_TARGET` times the
/// analytic mean interference.
pub fn bias_radius(scn: &Scenario) -> Result<f64> {
    let (mo, _) = gamma_fit::out_of_cluster_moments(scn);
    let (mi, _) = gamma_fit::intra_cluster_moments(scn)?;
    let target = BIAS_TARGET * (mo + mi);
    let a = scn.path_loss;
    Ok((2.0 * PI * scn.density / ((a - 2.0) * target)).powf(1.0 / (a - 2.0)))
}

/// Default window: `max(10 D, bias radius)`, capped at [`POINT_BUDGET`]
/// expected stations but never below `10 D`. The far-field mean beyond the
/// chosen radius is compensated.
pub fn default_window(scn: &Scenario) -> Result<SimWindow> {
    let cap = (POINT_BUDGET / (PI * scn.density)).sqrt();
    let r = (10.0 * scn.coop_radius).max(bias_radius(scn)?.min(cap));
    Ok(window_with_radius(scn, r))
}

/// Window of the given radius with far-field compensation.
pub fn window_with_radius(scn: &Scenario, radius: f64) -> SimWindow {
    SimWindow {
        radius,
        far_field_mean: estimate_truncation_bias(scn, radius),
    }
}

fn check(scn: &Scenario, window: &SimWindow) -> Result<()> {
    scn.validate()?;
    if !(window.radius >= 5.0 * scn.coop_radius) {
        return Err(Error::Simulation("simulation radius must be at least 5 D"));
    }
    Ok(())
}

/// Generator of trial `index` for `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One trial. `cluster_size` overrides the scenario's cluster mode:
/// `Some(k)` places exactly `k` stations in the disk (zero allowed).
pub fn simulate_with_rng<R: Rng + ?Sized>(
    scn: &Scenario,
    window: &SimWindow,
    cluster_size: Option<u32>,
    rng: &mut R,
) -> TrialSample {
    let a = scn.path_loss;
    let half_a = 0.5 * a;
    let d = scn.coop_radius;
    let d2 = d * d;
    let r2_max = window.radius * window.radius;
    let t_thr = scn.threshold();
    let gain = |r2: f64| -> f64 {
        if half_a == 2.0 {
            1.0 / (r2 * r2)
        } else {
            (-half_a * r2.ln()).exp()
        }
    };
    let mut s = TrialSample::default();
    let pilot = matches!(scn.csi, CsiMode::Pilot(_));
    let mut active: Vec<(f64, f64)> = Vec::new();
    let mut visit_cluster = |r2: f64, g: f64, s: &mut TrialSample| {
        let t = gain(r2);
        let p = g * t;
        s.cluster_count += 1;
        if p >= t_thr {
            s.active_count += 1;
            if pilot {
                active.push((t, g));
            } else {
                s.useful_power += p;
            }
        } else {
            s.intra_interference += p;
        }
    };

    let fixed = cluster_size.or(match scn.cluster {
        ClusterMode::Conditional(k) => Some(k),
        ClusterMode::Unconditional => None,
    });
    match fixed {
        None => {
            let n = poisson(scn.density * PI * r2_max, rng);
            for _ in 0..n {
                let r2 = r2_max * rng.random::<f64>();
                let g = scn.fading.sample(rng);
                if r2 <= d2 {
                    visit_cluster(r2, g, &mut s);
                } else {
                    s.out_interference += g * gain(r2);
                }
            }
        }
        Some(k) => {
            for _ in 0..k {
                let r2 = d2 * rng.random::<f64>();
                let g = scn.fading.sample(rng);
                visit_cluster(r2, g, &mut s);
            }
            let n = poisson(scn.density * PI * (r2_max - d2), rng);
            for _ in 0..n {
                let r2 = d2 + (r2_max - d2) * rng.random::<f64>();
                let g = scn.fading.sample(rng);
                s.out_interference += g * gain(r2);
            }
        }
    }
    s.out_interference += window.far_field_mean;
    if scn.scheduling == Scheduling::Coordinated {
        s.intra_interference = 0.0;
    }
    let noise = scn.noise();
    if let CsiMode::Pilot(n) = scn.csi {
        let k = s.cluster_count.max(1) as f64;
        let b = n as f64 / k / (s.out_interference + noise);
        for &(t, g) in &active {
            let sigma2 = 1.0 / (1.0 + t * b);
            s.useful_power += (1.0 - sigma2) * g * t;
            s.csi_interference += sigma2 * g * t;
        }
    }
    s.sinr = s.useful_power / s.denominator(noise);
    s
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let v: f64 = Poisson::new(mean).expect("positive mean").sample(rng);
    v as u64
}

/// Trial `index` of the scenario.
pub fn simulate_trial(scn: &Scenario, window: &SimWindow, seed: u64, index: u64) -> TrialSample {
    let mut rng = trial_rng(seed, index);
    simulate_with_rng(scn, window, None, &mut rng)
}

/// Trials `range` in order.
pub fn run_range(
    scn: &Scenario,
    window: &SimWindow,
    seed: u64,
    range: Range<u64>,
) -> Result<Vec<TrialSample>> {
    check(scn, window)?;
    Ok(range
        .map(|i| simulate_trial(scn, window, seed, i))
        .collect())
}

/// Serial run of `trials` trials.
pub fn run(scn: &Scenario, trials: u64, seed: u64, window: SimWindow) -> Result<SampleSet> {
    if trials == 0 {
        return Err(Error::Simulation("need at least one trial"));
    }
    let trials = run_range(scn, &window, seed, 0..trials)?;
    Ok(SampleSet {
        trials,
        seed,
        scenario_hash: scn.hash(),
        window,
    })
}

/// Level of the DKW band attached to empirical curves.
pub const DKW_ALPHA: f64 = 0.01;

/// Empirical SINR CDF on `grid` with a 99% DKW band in `lower`/`upper`.
pub fn empirical_cdf(samples: &SampleSet, grid: &[f64]) -> Result<CdfCurve> {
    if samples.is_empty() {
        return Err(Error::Empty("sample set"));
    }
    let sorted = samples.sorted_sinr();
    let band = stats::dkw_epsilon(sorted.len() as u64, DKW_ALPHA);
    let approx: Vec<f64> = grid.iter().map(|&b| stats::ecdf(&sorted, b)).collect();
    Ok(CdfCurve {
        grid: grid.to_vec(),
        lower: approx.iter().map(|v| (v - band).max(0.0)).collect(),
        upper: approx.iter().map(|v| (v + band).min(1.0)).collect(),
        approx,
        gap: Vec::new(),
        meta: Provenance::Empirical {
            scenario_hash: samples.scenario_hash,
            trials: samples.len() as u64,
            seed: samples.seed,
            band,
        },
    })
}

/// Monte Carlo estimate of the resource saving `Delta`: the mean inactive
/// fraction of cluster stations over trials with a non-empty cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub used: u64,
    pub discarded: u64,
}

pub fn delta_estimate(samples: &[TrialSample]) -> DeltaEstimate {
    let mut w = Welford::new();
    let mut discarded = 0;
    for t in samples {
        if t.cluster_count == 0 {
            discarded += 1;
        } else {
            w.push(1.0 - t.active_count as f64 / t.cluster_count as f64);
        }
    }
    DeltaEstimate {
        mean: w.mean(),
        std_err: w.std_err(),
        used: w.count,
        discarded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::FadingModel;
    use alloc::vec;

    fn fig4() -> Scenario {
        Scenario::new(
            14e-6,
            4.0,
            300.0,
            1.0,
            10f64.powf(16.2),
            FadingModel::Exponential,
        )
    }

    #[test]
    fn window_precondition() {
        let s = fig4();
        let w = window_with_radius(&s, 1000.0);
        assert!(run(&s, 10, 1, w).is_err());
        assert!(run(&s, 0, 1, default_window(&s).unwrap()).is_err());
    }

    #[test]
    fn bias_power_law() {
        let s = fig4();
        let b1 = estimate_truncation_bias(&s, 3000.0);
        let b2 = estimate_truncation_bias(&s, 6000.0);
        assert!((b1 / b2 - 4.0).abs() < 1e-12);
        assert_eq!(estimate_truncation_bias(&s, f64::INFINITY), 0.0);
    }

    #[test]
    fn trials_are_order_independent() {
        let s = fig4();
        let w = default_window(&s).unwrap();
        let all = run_range(&s, &w, 9, 0..20).unwrap();
        let tail = run_range(&s, &w, 9, 10..20).unwrap();
        assert_eq!(&all[10..], &tail[..]);
    }

    #[test]
    fn sinr_identity_and_counts() {
        let s = fig4();
        let w = default_window(&s).unwrap();
        for t in run_range(&s, &w, 3, 0..200).unwrap() {
            assert!(t.active_count <= t.cluster_count);
            assert_eq!(t.sinr, t.useful_power / t.denominator(s.noise()));
        }
    }

    #[test]
    fn zero_threshold_makes_schedules_equal() {
        let mut s = fig4();
        s.edge_threshold = 0.0;
        let w = default_window(&s).unwrap();
        let fr = run_range(&s, &w, 5, 0..50).unwrap();
        let cs = run_range(&s.with_scheduling(Scheduling::Coordinated), &w, 5, 0..50).unwrap();
        assert_eq!(fr, cs);
        assert!(fr.iter().all(|t| t.intra_interference == 0.0));
    }

    #[test]
    fn single_trial_cdf_jumps_once() {
        let s = fig4();
        let w = default_window(&s).unwrap();
        let set = run(&s, 1, 2, w).unwrap();
        let x = set.trials[0].sinr;
        let c = empirical_cdf(&set, &[x * 0.999, x, x * 1.001]).unwrap();
        assert_eq!(c.approx, vec![0.0, 1.0, 1.0]);
    }
}
