//! SINR distribution: truncated-series bounds, interpolated approximation,
//! tail form and spectral-efficiency functionals.
//!
//! With the denominator fitted by Gamma(k, theta) and `s0 = 1/(theta beta)`,
//! `P(SINR <= beta)` lies between `sum_{m < floor k} t_m` and
//! `sum_{m < ceil k} t_m`, where `t_m` are the normalised Laplace terms of
//! the useful power (see [`crate::laplace`]).

use alloc::vec::Vec;
use core::f64::consts::LN_2;
#[allow(unused_imports)]
use num_traits::Float;

use crate::csi::{self, CsiContext};
use crate::gamma_fit::{self, GammaFit};
use crate::laplace::{self, DERIVATIVE_CAP};
use crate::quad::{self, QuadConfig};
use crate::scenario::{ClusterMode, CsiMode, Scenario};
use crate::{Error, Result};

/// Tolerance used when checking curve invariants.
pub const CURVE_TOL: f64 = 1e-9;

/// Where a curve came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Analytic {
        scenario_hash: u64,
    },
    Empirical {
        scenario_hash: u64,
        trials: u64,
        seed: u64,
        /// Half-width of the 99% DKW band.
        band: f64,
    },
}

/// CDF values on a threshold grid. For empirical curves `lower`/`upper`
/// hold the DKW band and `gap` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfCurve {
    pub grid: Vec<f64>,
    pub lower: Vec<f64>,
    pub approx: Vec<f64>,
    pub upper: Vec<f64>,
    /// Summand of order `floor k` at each point (zero for integer `k`).
    pub gap: Vec<f64>,
    pub meta: Provenance,
}

impl CdfCurve {
    /// Check ordering, range and monotonicity.
    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        if self.lower.len() != n || self.approx.len() != n || self.upper.len() != n {
            return Err(Error::Empty("curve columns differ in length"));
        }
        for i in 0..n {
            let (l, a, u) = (self.lower[i], self.approx[i], self.upper[i]);
            if !(l >= -CURVE_TOL
                && l <= a + CURVE_TOL
                && a <= u + CURVE_TOL
                && u <= 1.0 + CURVE_TOL)
            {
                return Err(Error::domain("CdfCurve::validate", "bounds out of order"));
            }
            if i > 0 {
                if !(self.grid[i] > self.grid[i - 1]) {
                    return Err(Error::domain("CdfCurve::validate", "grid not increasing"));
                }
                if self.lower[i] < self.lower[i - 1] - CURVE_TOL
                    || self.approx[i] < self.approx[i - 1] - CURVE_TOL
                    || self.upper[i] < self.upper[i - 1] - CURVE_TOL
                {
                    return Err(Error::domain("CdfCurve::validate", "curve decreases"));
                }
            }
        }
        if !self.gap.is_empty() {
            for i in 0..n {
                let d = self.upper[i] - self.lower[i];
                if (d - self.gap[i]).abs() > 1e-12 {
                    return Err(Error::domain(
                        "CdfCurve::validate",
                        "bound gap differs from stored summand",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// One analytic CDF evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfPoint {
    pub lower: f64,
    pub approx: f64,
    pub upper: f64,
    pub gap: f64,
}

/// Tail-form value `1 - sum_{m = ceil k}^{m_hi - 1} t_m` with the mass not
/// yet accounted for by orders below `m_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRemainder {
    pub value: f64,
    pub truncation_bound: f64,
}

#[derive(Debug, Clone)]
enum Numerator {
    Perfect,
    Pilot(CsiContext),
}

#[derive(Debug, Clone)]
struct Component {
    scn: Scenario,
    fit: GammaFit,
    numerator: Numerator,
}

impl Component {
    fn new(scn: Scenario) -> Result<Self> {
        let fit = gamma_fit::fit_scenario(&scn)?;
        let numerator = match scn.csi {
            CsiMode::Perfect => Numerator::Perfect,
            CsiMode::Pilot(_) => Numerator::Pilot(CsiContext::from_scenario(&scn)?),
        };
        Ok(Component {
            scn,
            fit,
            numerator,
        })
    }

    fn log_terms(&self, s0: f64, m_max: usize) -> Result<Vec<f64>> {
        match &self.numerator {
            Numerator::Perfect => laplace::signal_log_terms(&self.scn, s0, m_max),
            Numerator::Pilot(ctx) => csi::csi_log_terms(&self.scn, ctx, s0, m_max),
        }
    }

    fn split(&self) -> (usize, usize, f64) {
        let k = self.fit.shape;
        let lo = k.floor();
        (lo as usize, k.ceil() as usize, k - lo)
    }

    fn point(&self, beta: f64) -> Result<CdfPoint> {
        let (lo, hi, frac) = self.split();
        let m_max = hi.saturating_sub(1);
        if m_max > DERIVATIVE_CAP {
            return Err(Error::DerivativeCap {
                required: m_max,
                cap: DERIVATIVE_CAP,
            });
        }
        let s0 = 1.0 / (self.fit.scale * beta);
        let lt = self.log_terms(s0, m_max)?;
        let t: Vec<f64> = lt.iter().map(|v| v.exp()).collect();
        let lower: f64 = t[..lo].iter().sum();
        let (gap, approx, upper) = if hi == lo {
            (0.0, lower, lower)
        } else {
            let g = t[lo];
            (g, lower + frac * g, lower + g)
        };
        Ok(CdfPoint {
            lower,
            approx,
            upper,
            gap,
        })
    }

    fn tail(&self, beta: f64, m_hi: usize) -> Result<TailRemainder> {
        let (_, hi, _) = self.split();
        if m_hi < hi {
            return Err(Error::domain(
                "cdf_tail_remainder",
                "m_hi must be at least ceil(k)",
            ));
        }
        if m_hi == hi {
            let m_max = hi.saturating_sub(1);
            let lt = self.log_terms(1.0 / (self.fit.scale * beta), m_max.min(DERIVATIVE_CAP))?;
            let below: f64 = lt[..hi].iter().map(|v| v.exp()).sum();
            return Ok(TailRemainder {
                value: 1.0,
                truncation_bound: (1.0 - below).max(0.0),
            });
        }
        let s0 = 1.0 / (self.fit.scale * beta);
        let lt = self.log_terms(s0, m_hi - 1)?;
        let t: Vec<f64> = lt.iter().map(|v| v.exp()).collect();
        let zeta: f64 = t[hi..m_hi].iter().sum();
        let all: f64 = t.iter().sum();
        Ok(TailRemainder {
            value: 1.0 - zeta,
            truncation_bound: (1.0 - all).max(0.0),
        })
    }
}

/// Analytic SINR distribution of one scenario.
#[derive(Debug, Clone)]
pub struct SinrAnalysis {
    scn: Scenario,
    atom: f64,
    /// Weighted components; more than one only for unconditional clusters
    /// with pilot estimation, which are averaged over the cluster size.
    parts: Vec<(f64, Component)>,
    /// Weight of the empty cluster in such mixtures (CDF identically one).
    empty_weight: f64,
}

impl SinrAnalysis {
    pub fn new(scn: &Scenario) -> Result<Self> {
        scn.validate()?;
        let atom = laplace::zero_power_probability(scn)?;
        let mut parts = Vec::new();
        let mut empty_weight = 0.0;
        match (scn.cluster, scn.csi) {
            (ClusterMode::Unconditional, CsiMode::Pilot(_)) => {
                for (k, p) in csi::poisson_weights(scn.mean_cluster_size()) {
                    if k == 0 {
                        empty_weight = p;
                    } else if p > 0.0 {
                        parts.push((
                            p,
                            Component::new(scn.with_cluster(ClusterMode::Conditional(k)))?,
                        ));
                    }
                }
            }
            _ => parts.push((1.0, Component::new(*scn)?)),
        }
        Ok(SinrAnalysis {
            scn: *scn,
            atom,
            parts,
            empty_weight,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scn
    }

    /// Gamma fit of the denominator (of the first mixture component).
    pub fn fit(&self) -> GammaFit {
        self.parts[0].1.fit
    }

    /// `P(P = 0)`, the limit of the CDF as `beta -> 0`.
    pub fn atom(&self) -> f64 {
        self.atom
    }

    fn check_beta(beta: f64) -> Result<()> {
        if !(beta >= 0.0) || beta.is_infinite() {
            return Err(Error::domain(
                "sinr",
                "threshold must be finite and non-negative",
            ));
        }
        Ok(())
    }

    /// Lower bound, interpolation and upper bound at `beta`.
    pub fn cdf_point(&self, beta: f64) -> Result<CdfPoint> {
        Self::check_beta(beta)?;
        if beta == 0.0 {
            return Ok(CdfPoint {
                lower: self.atom,
                approx: self.atom,
                upper: self.atom,
                gap: 0.0,
            });
        }
        let mut acc = CdfPoint {
            lower: self.empty_weight,
            approx: self.empty_weight,
            upper: self.empty_weight,
            gap: 0.0,
        };
        for (w, c) in &self.parts {
            let p = c.point(beta)?;
            acc.lower += w * p.lower;
            acc.approx += w * p.approx;
            acc.upper += w * p.upper;
            acc.gap += w * p.gap;
        }
        Ok(acc)
    }

    pub fn cdf_bounds(&self, beta: f64) -> Result<(f64, f64)> {
        let p = self.cdf_point(beta)?;
        Ok((p.lower, p.upper))
    }

    pub fn cdf_approx(&self, beta: f64) -> Result<f64> {
        Ok(self.cdf_point(beta)?.approx)
    }

    /// Tail form of the upper bound truncated at order `m_hi`.
    pub fn cdf_tail_remainder(&self, beta: f64, m_hi: usize) -> Result<TailRemainder> {
        if !(beta > 0.0) || beta.is_infinite() {
            return Err(Error::domain(
                "cdf_tail_remainder",
                "threshold must be positive",
            ));
        }
        if self.parts.len() != 1 {
            return Err(Error::domain(
                "cdf_tail_remainder",
                "not available for cluster-size mixtures",
            ));
        }
        self.parts[0].1.tail(beta, m_hi)
    }

    /// `P(log2(1 + SINR) <= tau)`.
    pub fn rate_cdf(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0) {
            return Err(Error::domain("rate_cdf", "rate must be non-negative"));
        }
        self.cdf_approx((tau * LN_2).exp_m1())
    }

    /// `E[R] = int_0^inf P(SINR > 2^tau - 1) dtau` in bit/s/Hz.
    pub fn mean_spectral_efficiency(&self) -> Result<f64> {
        let ccdf = |tau: f64| -> Result<f64> { Ok((1.0 - self.rate_cdf(tau)?).max(0.0)) };
        let mut tau_max = 8.0;
        while ccdf(tau_max)? >= 1e-6 {
            tau_max *= 2.0;
            if tau_max > 256.0 {
                return Err(Error::domain(
                    "mean_spectral_efficiency",
                    "rate distribution has no finite support",
                ));
            }
        }
        let mut err = None;
        let cfg = QuadConfig {
            rel_tol: 1e-7,
            abs_tol: 2e-5,
            max_intervals: 200,
            fail_rel: 1e-4,
        };
        let v = quad::integrate(
            |tau| match ccdf(tau) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            },
            0.0,
            tau_max,
            &[],
            &cfg,
        )?;
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// Evaluate every grid point (linear thresholds, increasing).
    pub fn curve(&self, grid: &[f64]) -> Result<CdfCurve> {
        let mut c = CdfCurve {
            grid: grid.to_vec(),
            lower: Vec::with_capacity(grid.len()),
            approx: Vec::with_capacity(grid.len()),
            upper: Vec::with_capacity(grid.len()),
            gap: Vec::with_capacity(grid.len()),
            meta: Provenance::Analytic {
                scenario_hash: self.scn.hash(),
            },
        };
        for &b in grid {
            let p = self.cdf_point(b)?;
            c.lower.push(p.lower);
            c.approx.push(p.approx);
            c.upper.push(p.upper);
            c.gap.push(p.gap);
        }
        c.validate()?;
        Ok(c)
    }
}

/// `n` thresholds spaced evenly in dB from `lo_db` to `hi_db`, returned linear.
pub fn db_grid(lo_db: f64, hi_db: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![(lo_db / 10.0 * core::f64::consts::LN_10).exp()];
    }
    (0..n)
        .map(|i| {
            let db = lo_db + (hi_db - lo_db) * i as f64 / (n - 1) as f64;
            (db / 10.0 * core::f64::consts::LN_10).exp()
        })
        .collect()
}
