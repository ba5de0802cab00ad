//! Laplace transform of the useful (cooperative) power and its derivatives.
//!
//! Everything is evaluated at a real positive point `s0` in the frame
//! `F(s) = E[exp(-s P)]`, `F^(m)(s0) := E[P^m exp(-s0 P)] >= 0`. The SINR
//! series only ever needs the normalised terms
//! `t_m = F^(m)(s0) s0^m / m! = E[Poisson pmf(m; s0 P)]`, which sum to one.
//!
//! One cluster station, uniform in the disk, contributes
//! `Y = g D^-alpha V 1{g V >= T~}` with `V` Pareto(2/alpha) on `[1, inf)`.
//! Its normalised terms are Pareto-mixed Poisson weights, see
//! [`crate::specfun::pareto_poisson_weights`].

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::quad::QuadConfig;
use crate::scenario::{ClusterMode, Scenario};
use crate::specfun::{
    self, complete_bell_from_logs, ln_factorial, ln_gamma, log_sum_exp,
    partial_bell_table_from_logs,
};
use crate::{Error, Result};

/// Highest derivative order computed before handing over to the tail form
/// or the simulator.
pub const DERIVATIVE_CAP: usize = 300;

/// `F^(0)(s0) .. F^(m)(s0)` in log magnitude. Every value is non-negative in
/// this frame, so no sign is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeStack {
    pub eval_point: f64,
    pub log_values: Vec<f64>,
}

impl DerivativeStack {
    /// Build from `ln t_m`.
    pub fn from_log_terms(eval_point: f64, log_terms: &[f64]) -> Self {
        let ls = eval_point.ln();
        let log_values = log_terms
            .iter()
            .enumerate()
            .map(|(m, &lt)| lt - m as f64 * ls + ln_factorial(m))
            .collect();
        DerivativeStack {
            eval_point,
            log_values,
        }
    }

    pub fn len(&self) -> usize {
        self.log_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }

    /// Highest order held.
    pub fn order(&self) -> usize {
        self.log_values.len().saturating_sub(1)
    }

    pub fn value(&self, m: usize) -> f64 {
        self.log_values[m].exp()
    }

    /// `ln(F^(m) s0^m / m!)`.
    pub fn log_term(&self, m: usize) -> f64 {
        self.log_values[m] + m as f64 * self.eval_point.ln() - ln_factorial(m)
    }

    pub fn term(&self, m: usize) -> f64 {
        self.log_term(m).exp()
    }

    /// Normalised terms `t_0..t_m`.
    pub fn terms(&self) -> Vec<f64> {
        (0..self.len()).map(|m| self.term(m)).collect()
    }
}

/// Normalised per-station quantities at `s0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationTerms {
    /// `phi = E[exp(-s0 Y)]`.
    pub phi: f64,
    /// `1 - phi`, without cancellation.
    pub one_minus_phi: f64,
    /// `ln E[pmf(m; s0 Y)]` for `m = 0..=m_max`; entry 0 is `ln phi`.
    pub log_hat: Vec<f64>,
}

fn check_point(func: &'static str, s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(
            func,
            "evaluation point must be positive and finite",
        ));
    }
    Ok(())
}

/// Quadrature settings for the per-station expectations.
pub(crate) fn station_quad() -> QuadConfig {
    QuadConfig::default()
        .with_rel_tol(1e-10)
        .with_abs_tol(1e-18)
}

/// Per-station normalised terms for the scenario's fading and threshold.
pub fn station_terms(scn: &Scenario, s0: f64, m_max: usize) -> Result<StationTerms> {
    check_point("station_terms", s0)?;
    let delta = scn.delta();
    let edge = scn.edge_threshold;
    if edge.is_infinite() {
        let mut log_hat = vec![f64::NEG_INFINITY; m_max + 1];
        log_hat[0] = 0.0;
        return Ok(StationTerms {
            phi: 1.0,
            one_minus_phi: 0.0,
            log_hat,
        });
    }
    let split = scn.fading.activation_split(edge, delta)?;
    let ln_gain = scn.ln_edge_gain();
    let dim = m_max + 2;
    // Layout: [h, 1 - h, W_1, .., W_m].
    let mut w = vec![0.0; m_max + 1];
    let tail = scn.fading.expect_vec_with(
        dim,
        edge,
        f64::INFINITY,
        &[],
        &station_quad(),
        |g, out: &mut [f64]| {
            let y = s0 * (g.ln() + ln_gain).exp();
            let (h, hc) = specfun::pareto_laplace(delta, y);
            specfun::pareto_poisson_weights(delta, y, &mut w);
            out[0] = h;
            out[1] = hc;
            out[2..].copy_from_slice(&w[1..]);
        },
    )?;
    let mut acc = tail;
    if split.below > 0.0 {
        let xt = s0 * scn.threshold();
        let (h, hc) = specfun::pareto_laplace(delta, xt);
        specfun::pareto_poisson_weights(delta, xt, &mut w);
        acc[0] += split.below * h;
        acc[1] += split.below * hc;
        for m in 1..=m_max {
            acc[m + 1] += split.below * w[m];
        }
    }
    let phi = (split.inactive() + acc[0]).min(1.0);
    let one_minus_phi = acc[1].max(0.0);
    let mut log_hat = Vec::with_capacity(m_max + 1);
    log_hat.push(phi.ln());
    log_hat.extend(
        acc[2..]
            .iter()
            .map(|&v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY }),
    );
    Ok(StationTerms {
        phi,
        one_minus_phi,
        log_hat,
    })
}

/// Conditional-case transform `phi(s)^K`.
pub fn signal_laplace_conditional(scn: &Scenario, s: f64) -> Result<f64> {
    let k = match scn.cluster {
        ClusterMode::Conditional(k) => k,
        ClusterMode::Unconditional => {
            return Err(Error::InvalidScenario(
                "conditional transform needs a conditional cluster",
            ))
        }
    };
    let st = station_terms(scn, s, 0)?;
    Ok((k as f64 * (-st.one_minus_phi).ln_1p()).exp())
}

/// Unconditional transform `exp(-lambda pi D^2 (1 - phi(s)))`.
pub fn signal_laplace_unconditional(scn: &Scenario, s: f64) -> Result<f64> {
    let st = station_terms(scn, s, 0)?;
    Ok((-scn.mean_cluster_size() * st.one_minus_phi).exp())
}

/// Derivatives `G^(m)`, `m = 1..=m_max`, of the (sign-normalised) exponent
/// `lambda pi D^2 (phi(s) - 1)` at `s0`. For a conditional scenario the
/// prefactor is dropped, giving the derivatives of the per-station `phi`.
pub fn exponent_derivatives(scn: &Scenario, s0: f64, m_max: usize) -> Result<Vec<f64>> {
    if m_max < 1 {
        return Err(Error::domain("exponent_derivatives", "need m_max >= 1"));
    }
    let st = station_terms(scn, s0, m_max)?;
    let ln_n = match scn.cluster {
        ClusterMode::Unconditional => scn.mean_cluster_size().ln(),
        ClusterMode::Conditional(_) => 0.0,
    };
    let ls = s0.ln();
    Ok((1..=m_max)
        .map(|m| (ln_n + ln_factorial(m) + st.log_hat[m] - m as f64 * ls).exp())
        .collect())
}

/// Normalised terms of `exp(N (phi - 1))` from per-station terms:
/// `t_n = F0 B_n(x) / n!` with `x_m = N m! hat_m`.
pub fn compose_exp(mean_count: f64, st: &StationTerms, m_max: usize) -> Vec<f64> {
    let ln_f0 = -mean_count * st.one_minus_phi;
    if mean_count == 0.0 {
        let mut out = vec![f64::NEG_INFINITY; m_max + 1];
        out[0] = 0.0;
        return out;
    }
    let ln_n = mean_count.ln();
    let lx: Vec<f64> = (1..=m_max)
        .map(|m| ln_n + ln_factorial(m) + st.log_hat[m])
        .collect();
    let bell = complete_bell_from_logs(&lx);
    bell.log_values
        .iter()
        .enumerate()
        .map(|(n, &lb)| ln_f0 + lb - ln_factorial(n))
        .collect()
}

/// Normalised terms of `phi^K`:
/// `t_n = sum_j K!/(K-j)! phi^(K-j) B_{n,j}(x) / n!` with `x_m = m! hat_m`.
pub fn compose_power(k: u32, st: &StationTerms, m_max: usize) -> Vec<f64> {
    let kf = k as f64;
    let ln_phi = (-st.one_minus_phi).ln_1p();
    let mut out = Vec::with_capacity(m_max + 1);
    out.push(kf * ln_phi);
    if m_max == 0 {
        return out;
    }
    let lx: Vec<f64> = (1..=m_max)
        .map(|m| ln_factorial(m) + st.log_hat[m])
        .collect();
    let j_max = (k as usize).min(m_max);
    let table = partial_bell_table_from_logs(&lx, m_max, j_max);
    let ln_kfact = ln_gamma(kf + 1.0);
    let mut terms = Vec::with_capacity(j_max);
    for (n, row) in table.iter().enumerate().skip(1) {
        terms.clear();
        for (j, &lb) in row.iter().enumerate().take(j_max.min(n) + 1).skip(1) {
            if lb == f64::NEG_INFINITY {
                continue;
            }
            let falling = ln_kfact - ln_gamma(kf - j as f64 + 1.0);
            let power = if k as usize == j {
                0.0
            } else {
                (kf - j as f64) * ln_phi
            };
            terms.push(falling + power + lb);
        }
        out.push(log_sum_exp(terms.iter().copied()) - ln_factorial(n));
    }
    out
}

fn check_cap(m_max: usize) -> Result<()> {
    if m_max > DERIVATIVE_CAP {
        return Err(Error::DerivativeCap {
            required: m_max,
            cap: DERIVATIVE_CAP,
        });
    }
    Ok(())
}

/// `ln t_0 .. ln t_m` for the useful power under perfect channel knowledge.
pub fn signal_log_terms(scn: &Scenario, s0: f64, m_max: usize) -> Result<Vec<f64>> {
    check_cap(m_max)?;
    let st = station_terms(scn, s0, m_max)?;
    Ok(match scn.cluster {
        ClusterMode::Unconditional => compose_exp(scn.mean_cluster_size(), &st, m_max),
        ClusterMode::Conditional(k) => compose_power(k, &st, m_max),
    })
}

/// `F^(0)(s0) .. F^(m_max)(s0)` through Faà di Bruno's formula.
pub fn signal_laplace_derivatives(
    scn: &Scenario,
    s0: f64,
    m_max: usize,
) -> Result<DerivativeStack> {
    scn.validate()?;
    check_point("signal_laplace_derivatives", s0)?;
    let lt = signal_log_terms(scn, s0, m_max)?;
    Ok(DerivativeStack::from_log_terms(s0, &lt))
}

/// Probability that no cluster station is active (`P = 0`).
pub fn zero_power_probability(scn: &Scenario) -> Result<f64> {
    let edge = scn.edge_threshold;
    if edge.is_infinite() {
        return Ok(1.0);
    }
    let split = scn.fading.activation_split(edge, scn.delta())?;
    Ok(match scn.cluster {
        ClusterMode::Unconditional => (-scn.mean_cluster_size() * split.active()).exp(),
        ClusterMode::Conditional(k) => split.inactive().powi(k as i32),
    })
}
