//! Pilot-based MMSE channel estimation at the receiver.
//!
//! Station `i` at path gain `t_i = |x_i|^-alpha` is estimated with error
//! variance `sigma_i^2 = 1 / (1 + t_i b_K)`, where
//! `b_K = (N_pilot / K) / (E[J_Cbar] + 1/eta)`. The useful power of an
//! active station shrinks to `g t^2 / (t + 1/b_K)` and the remainder
//! `g t / (1 + t b_K)` becomes residual interference `J_CSI`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fading::FadingModel;
use crate::gamma_fit::out_of_cluster_moments;
use crate::laplace::{compose_power, station_quad, DerivativeStack, StationTerms, DERIVATIVE_CAP};
use crate::quad::{self, QuadConfig};
use crate::scenario::{ClusterMode, CsiMode, Scenario};
use crate::sinr::SinrAnalysis;
use crate::specfun::{hyp2f1_special, ln_factorial};
use crate::{Error, Result};

/// Cumulative Poisson mass kept when averaging over the cluster size.
pub const POISSON_MASS: f64 = 1.0 - 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsiContext {
    /// Cluster size `K`.
    pub k: u32,
    pub n_pilot: f64,
    /// Effective pilot gain `b_K`.
    pub b: f64,
    /// `E[J_Cbar]`.
    pub mean_out_cluster: f64,
    /// Mean residual interference per station.
    pub mu: f64,
}

/// `E[J_Cbar] = 2 pi lambda / (alpha - 2) D^(2 - alpha)`.
pub fn mean_out_cluster_interference(scn: &Scenario) -> f64 {
    out_of_cluster_moments(scn).0
}

impl CsiContext {
    /// Context for `k` stations sharing `n_pilot` pilot symbols.
    pub fn new(scn: &Scenario, k: u32, n_pilot: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain(
                "CsiContext::new",
                "cluster size must be positive",
            ));
        }
        if !(n_pilot > 0.0) {
            return Err(Error::domain(
                "CsiContext::new",
                "pilot count must be positive",
            ));
        }
        let mean_out = mean_out_cluster_interference(scn);
        let b = n_pilot / k as f64 / (mean_out + scn.noise());
        let mut ctx = CsiContext {
            k,
            n_pilot,
            b,
            mean_out_cluster: mean_out,
            mu: 0.0,
        };
        ctx.mu = residual_station_moments(scn, &ctx)?.0;
        Ok(ctx)
    }

    /// Context from a conditional pilot scenario.
    pub fn from_scenario(scn: &Scenario) -> Result<Self> {
        match (scn.cluster, scn.csi) {
            (ClusterMode::Conditional(k), CsiMode::Pilot(n)) => CsiContext::new(scn, k, n as f64),
            _ => Err(Error::InvalidScenario(
                "CSI context needs a conditional cluster with pilot estimation",
            )),
        }
    }
}

/// `sigma^2 = 1 / (1 + t b_K)`.
pub fn mmse_factor(ctx: &CsiContext, link_gain: f64) -> f64 {
    1.0 / (1.0 + link_gain * ctx.b)
}

/// Per-station `(E[R], E[R^2])` of the residual term `R = sigma^2 g t 1{active}`.
fn residual_station_moments(scn: &Scenario, ctx: &CsiContext) -> Result<(f64, f64)> {
    let edge = scn.edge_threshold;
    if edge.is_infinite() {
        return Ok((0.0, 0.0));
    }
    let a = scn.path_loss;
    let delta = scn.delta();
    let ln_da = a * scn.coop_radius.ln();
    let ln_t = if edge > 0.0 {
        scn.threshold().ln()
    } else {
        f64::NEG_INFINITY
    };
    let ln_b = ctx.b.ln();
    let breaks: Vec<f64> = if edge > 0.0 { vec![edge] } else { Vec::new() };
    let mut err = None;
    let v = scn.fading.expect_vec_with(
        2,
        0.0,
        f64::INFINITY,
        &breaks,
        &QuadConfig::default().with_rel_tol(1e-10),
        |g, out: &mut [f64]| {
            // rho^alpha = min{D^alpha, g/T}
            let ln_clip = ln_da.min(g.ln() - ln_t);
            let z = (ln_clip - ln_b).exp();
            let rho2 = (delta * ln_clip).exp();
            match (hyp2f1_special(1, delta, z), hyp2f1_special(2, delta, z)) {
                (Ok(f1), Ok(f2)) => {
                    out[0] = g * rho2 * f1;
                    out[1] = g * g * rho2 * f2;
                }
                (Err(e), _) | (_, Err(e)) => {
                    err = Some(e);
                    out.fill(0.0);
                }
            }
        },
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    let d2 = scn.coop_radius * scn.coop_radius;
    Ok((v[0] / (ctx.b * d2), v[1] / (ctx.b * ctx.b * d2)))
}

/// `(E[J_CSI], Var[J_CSI])` for `K = ctx.k` stations.
pub fn jcsi_moments(scn: &Scenario, ctx: &CsiContext) -> Result<(f64, f64)> {
    let (m1, m2) = residual_station_moments(scn, ctx)?;
    let k = ctx.k as f64;
    let var = k * m2 - k * m1 * m1;
    Ok((k * m1, var.max(0.0)))
}

/// Poisson(mean) weights over `0..`, truncated once the cumulative mass
/// reaches [`POISSON_MASS`].
pub fn poisson_weights(mean: f64) -> Vec<(u32, f64)> {
    let mut out = Vec::new();
    let mut cum = 0.0;
    let mut k = 0u32;
    loop {
        let p = (k as f64 * mean.ln() - mean - ln_factorial(k as usize)).exp();
        let p = if mean == 0.0 {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            p
        };
        cum += p;
        out.push((k, p));
        if cum >= POISSON_MASS || (k as f64 > mean && p == 0.0) {
            break;
        }
        k += 1;
    }
    out
}

/// Residual-interference moments for a pilot scenario. Unconditional
/// clusters average over the Poisson cluster size.
pub fn residual_moments(scn: &Scenario) -> Result<(f64, f64)> {
    let n = match scn.csi {
        CsiMode::Perfect => return Ok((0.0, 0.0)),
        CsiMode::Pilot(n) => n as f64,
    };
    match scn.cluster {
        ClusterMode::Conditional(k) => jcsi_moments(scn, &CsiContext::new(scn, k, n)?),
        ClusterMode::Unconditional => {
            let mut m = 0.0;
            let mut s = 0.0;
            for (k, p) in poisson_weights(scn.mean_cluster_size()) {
                if k == 0 || p == 0.0 {
                    continue;
                }
                let (mk, vk) = jcsi_moments(scn, &CsiContext::new(scn, k, n)?)?;
                m += p * mk;
                s += p * (vk + mk * mk);
            }
            Ok((m, (s - m * m).max(0.0)))
        }
    }
}

/// Normalised per-station terms of the CSI-scaled useful power at `s0`.
pub fn csi_station_terms(
    scn: &Scenario,
    ctx: &CsiContext,
    s0: f64,
    m_max: usize,
) -> Result<StationTerms> {
    if !(s0 > 0.0) || !s0.is_finite() {
        return Err(Error::domain(
            "csi_station_terms",
            "evaluation point must be positive and finite",
        ));
    }
    let a = scn.path_loss;
    let ln_edge_gain = scn.ln_edge_gain();
    let t_thr = scn.threshold();
    let inv_b = 1.0 / ctx.b;
    let dim = m_max + 2;
    let mut err = None;
    let mut inner = vec![0.0; dim];
    let exponential = scn.fading == FadingModel::Exponential;
    // u is the area fraction r^2 / D^2.
    let v = quad::integrate_vec(
        |u, out: &mut [f64]| {
            if u <= 0.0 {
                out.fill(0.0);
                return;
            }
            let t = (ln_edge_gain - 0.5 * a * u.ln()).exp();
            let w = t * t / (t + inv_b);
            let h = t_thr / t;
            let r = if exponential {
                exponential_kernel(s0 * w, h, out);
                Ok(())
            } else {
                general_kernel(&scn.fading, s0 * w, h, &mut inner)
                    .map(|_| out.copy_from_slice(&inner))
            };
            if let Err(e) = r {
                err = Some(e);
                out.fill(0.0);
            }
        },
        dim,
        0.0,
        1.0,
        &[],
        &station_quad(),
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    let phi = v[0].min(1.0);
    let one_minus_phi = v[1].max(0.0);
    let mut log_hat = Vec::with_capacity(m_max + 1);
    log_hat.push(phi.ln());
    log_hat.extend(
        v[2..]
            .iter()
            .map(|&x| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY }),
    );
    Ok(StationTerms {
        phi,
        one_minus_phi,
        log_hat,
    })
}

/// Layout `[phi, 1 - phi, hat_1, ..]` for `g ~ Exp(1)`, kernel argument `a`
/// and fading threshold `h`.
fn exponential_kernel(a: f64, h: f64, out: &mut [f64]) {
    let one_a = 1.0 + a;
    let x = one_a * h;
    let e_h = (-h).exp();
    out[0] = -(-h).exp_m1() + (-x).exp() / one_a;
    out[1] = e_h * (1.0 - (-a * h).exp() / one_a);
    // hat_m = rho^m / (1 + a) Q(m + 1, (1 + a) h), Q by upward recurrence.
    let ln_rho = a.ln() - one_a.ln();
    let ln_x = x.ln();
    let mut q = (-x).exp();
    for m in 1..out.len() - 1 {
        let mf = m as f64;
        q += if h > 0.0 {
            (mf * ln_x - x - ln_factorial(m)).exp()
        } else {
            0.0
        };
        out[m + 1] = (mf * ln_rho).exp() / one_a * q.min(1.0);
    }
}

fn general_kernel(fading: &FadingModel, a: f64, h: f64, out: &mut [f64]) -> Result<()> {
    let dim = out.len();
    let below = fading.probability(0.0, h)?;
    let v = fading.expect_vec_with(
        dim,
        h,
        f64::INFINITY,
        &[],
        &station_quad(),
        |g, o: &mut [f64]| {
            let ag = a * g;
            o[0] = (-ag).exp();
            o[1] = -(-ag).exp_m1();
            let ln_ag = ag.ln();
            for m in 1..dim - 1 {
                o[m + 1] = (m as f64 * ln_ag - ag - ln_factorial(m)).exp();
            }
        },
    )?;
    out.copy_from_slice(&v);
    out[0] += below;
    Ok(())
}

/// `ln t_0 .. ln t_m` of the CSI-scaled useful power for `K = ctx.k`.
pub fn csi_log_terms(scn: &Scenario, ctx: &CsiContext, s0: f64, m_max: usize) -> Result<Vec<f64>> {
    if m_max > DERIVATIVE_CAP {
        return Err(Error::DerivativeCap {
            required: m_max,
            cap: DERIVATIVE_CAP,
        });
    }
    let st = csi_station_terms(scn, ctx, s0, m_max)?;
    Ok(compose_power(ctx.k, &st, m_max))
}

/// Derivative stack of the numerator transform under imperfect CSI.
pub fn csi_numerator_laplace_derivatives(
    scn: &Scenario,
    ctx: &CsiContext,
    s0: f64,
    m_max: usize,
) -> Result<DerivativeStack> {
    let lt = csi_log_terms(scn, ctx, s0, m_max)?;
    Ok(DerivativeStack::from_log_terms(s0, &lt))
}

/// How the cooperation radius follows the cluster size in a `K` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusRule {
    /// Keep the scenario's `D`.
    Fixed,
    /// `D = sqrt(K / (lambda pi))`, so the disk holds `K` stations on average.
    MatchDensity,
}

/// Scenario used for cluster size `k` in a sweep.
pub fn sweep_scenario(base: &Scenario, k: u32, csi: CsiMode, rule: RadiusRule) -> Scenario {
    let mut scn = base.with_cluster(ClusterMode::Conditional(k)).with_csi(csi);
    if rule == RadiusRule::MatchDensity {
        scn.coop_radius = (k as f64 / (scn.density * PI)).sqrt();
    }
    scn
}

/// Average spectral efficiency for each cluster size in `ks`.
pub fn avg_se_vs_k(
    base: &Scenario,
    ks: &[u32],
    csi: CsiMode,
    rule: RadiusRule,
) -> Result<Vec<f64>> {
    ks.iter()
        .map(|&k| {
            SinrAnalysis::new(&sweep_scenario(base, k, csi, rule))?.mean_spectral_efficiency()
        })
        .collect()
}
