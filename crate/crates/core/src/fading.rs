//! Unit-mean power fading laws.
//!
//! Expectations are taken in `u = ln g`, which keeps the Lognormal tails
//! inside a finite window. Regions are half-open, `lo <= g < hi`, so the
//! activation test `g >= T~` puts the Deterministic atom on the active side.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_10, PI, SQRT_2};
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::quad::{self, QuadConfig};
use crate::specfun::{self, ln_gamma};
use crate::{Error, Result};

/// Relative tolerance of every fading expectation.
pub const EXPECT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingModel {
    /// Rayleigh fading: unit-mean exponential power.
    Exponential,
    /// No fading, `g = 1`.
    Deterministic,
    /// Mean-normalised Lognormal shadowing with dB spread `sigma_db`.
    Lognormal { sigma_db: f64 },
    /// Nakagami-`m` power (Gamma(m, 1/m)) times unit-mean Lognormal shadowing.
    NakagamiLognormal { m: f64, sigma_db: f64 },
}

/// Split of the fading law at a cluster-edge threshold `T~`:
/// `below = E[(g/T~)^delta; g < T~]`, `tail = P(g >= T~)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationSplit {
    pub below: f64,
    pub tail: f64,
    /// `P(g < T~)`.
    pub below_prob: f64,
}

impl ActivationSplit {
    /// Per-station activation probability for a station uniform in the
    /// cooperation disk.
    pub fn active(&self) -> f64 {
        self.below + self.tail
    }

    /// `1 - active()`, without cancellation against the tail.
    pub fn inactive(&self) -> f64 {
        (self.below_prob - self.below).max(0.0)
    }
}

fn sigma_nat(sigma_db: f64) -> f64 {
    sigma_db * LN_10 / 10.0
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

impl FadingModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FadingModel::Exponential | FadingModel::Deterministic => Ok(()),
            FadingModel::Lognormal { sigma_db } => {
                if sigma_db > 0.0 && sigma_db.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidScenario(
                        "lognormal sigma_db must be positive",
                    ))
                }
            }
            FadingModel::NakagamiLognormal { m, sigma_db } => {
                if !(m >= 0.5 && m.is_finite()) {
                    return Err(Error::InvalidScenario("nakagami m must be at least 0.5"));
                }
                if sigma_db > 0.0 && sigma_db.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidScenario(
                        "lognormal sigma_db must be positive",
                    ))
                }
            }
        }
    }

    /// `E[g^2]`.
    pub fn mean_square(&self) -> f64 {
        match *self {
            FadingModel::Exponential => 2.0,
            FadingModel::Deterministic => 1.0,
            FadingModel::Lognormal { sigma_db } => sigma_nat(sigma_db).powi(2).exp(),
            FadingModel::NakagamiLognormal { m, sigma_db } => {
                (1.0 + 1.0 / m) * sigma_nat(sigma_db).powi(2).exp()
            }
        }
    }

    /// Density of `ln g`, for the continuous laws.
    fn log_density(&self, u: f64) -> f64 {
        match *self {
            FadingModel::Exponential => (u - u.exp()).exp(),
            FadingModel::Deterministic => 0.0,
            FadingModel::Lognormal { sigma_db } => {
                let s = sigma_nat(sigma_db);
                let z = (u + 0.5 * s * s) / s;
                (-0.5 * z * z).exp() / (s * (2.0 * PI).sqrt())
            }
            FadingModel::NakagamiLognormal { m, sigma_db } => {
                nakagami_lognormal_log_density(m, sigma_nat(sigma_db), u)
            }
        }
    }

    /// Window in `u = ln g` carrying all but a negligible part of `E[g^2]`.
    fn log_window(&self) -> (f64, f64) {
        match *self {
            FadingModel::Exponential => (-40.0, 80f64.ln()),
            FadingModel::Deterministic => (0.0, 0.0),
            FadingModel::Lognormal { sigma_db } => {
                let s = sigma_nat(sigma_db);
                let mu = -0.5 * s * s;
                (mu - 10.0 * s, mu + 2.0 * s * s + 10.0 * s)
            }
            FadingModel::NakagamiLognormal { m, sigma_db } => {
                let s = sigma_nat(sigma_db);
                let mu = -0.5 * s * s;
                let (xlo, xhi) = nakagami_log_window(m);
                (mu - 10.0 * s + xlo, mu + 2.0 * s * s + 10.0 * s + xhi)
            }
        }
    }

    /// `E[f(g)]`.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64> {
        let v = self.expect_vec(1, 0.0, f64::INFINITY, |g, out: &mut [f64]| out[0] = f(g))?;
        Ok(v[0])
    }

    /// `E[f(g); lo <= g < hi]` for a vector-valued `f`.
    pub fn expect_vec<F>(&self, dim: usize, lo: f64, hi: f64, f: F) -> Result<Vec<f64>>
    where
        F: FnMut(f64, &mut [f64]),
    {
        self.expect_vec_with(
            dim,
            lo,
            hi,
            &[],
            &QuadConfig::default().with_rel_tol(EXPECT_REL_TOL),
            f,
        )
    }

    /// As [`FadingModel::expect_vec`] with extra breakpoints (in `g`) and an
    /// explicit quadrature configuration.
    pub fn expect_vec_with<F>(
        &self,
        dim: usize,
        lo: f64,
        hi: f64,
        breaks: &[f64],
        cfg: &QuadConfig,
        mut f: F,
    ) -> Result<Vec<f64>>
    where
        F: FnMut(f64, &mut [f64]),
    {
        if !(lo >= 0.0) || !(hi >= lo) {
            return Err(Error::domain("expect_vec", "need 0 <= lo <= hi"));
        }
        if let FadingModel::Deterministic = self {
            let mut out = vec![0.0; dim];
            if lo <= 1.0 && 1.0 < hi {
                f(1.0, &mut out);
            }
            return Ok(out);
        }
        let (wlo, whi) = self.log_window();
        let ulo = if lo > 0.0 { lo.ln().max(wlo) } else { wlo };
        let uhi = if hi.is_finite() {
            hi.ln().min(whi)
        } else {
            whi
        };
        if !(uhi > ulo) {
            return Ok(vec![0.0; dim]);
        }
        let ubreaks: Vec<f64> = breaks
            .iter()
            .filter(|&&b| b > 0.0)
            .map(|b| b.ln())
            .collect();
        let mut scratch = vec![0.0; dim];
        quad::integrate_vec(
            |u, out: &mut [f64]| {
                let w = self.log_density(u);
                if w == 0.0 {
                    out.fill(0.0);
                    return;
                }
                f(u.exp(), &mut scratch);
                for (o, s) in out.iter_mut().zip(scratch.iter()) {
                    *o = w * s;
                }
            },
            dim,
            ulo,
            uhi,
            &ubreaks,
            cfg,
        )
    }

    /// `E[g^p; lo <= g < hi]` for `p >= 0`.
    pub fn partial_moment(&self, p: f64, lo: f64, hi: f64) -> Result<f64> {
        if !(p >= 0.0) {
            return Err(Error::domain(
                "partial_moment",
                "order must be non-negative",
            ));
        }
        if !(lo >= 0.0) || !(hi >= lo) {
            return Err(Error::domain("partial_moment", "need 0 <= lo <= hi"));
        }
        if lo == hi {
            return Ok(0.0);
        }
        match *self {
            FadingModel::Exponential => {
                // E[g^p; g >= c] = Gamma(p + 1, c)
                let upper = |c: f64| -> Result<f64> {
                    if c.is_infinite() {
                        Ok(0.0)
                    } else {
                        specfun::gamma_upper(p + 1.0, c)
                    }
                };
                if lo == 0.0 {
                    if hi.is_infinite() {
                        return Ok(libm::tgamma(p + 1.0));
                    }
                    return specfun::gamma_lower(p + 1.0, hi);
                }
                if hi.is_infinite() {
                    return upper(lo);
                }
                let lg = ln_gamma(p + 1.0);
                let q = specfun::gamma_q(p + 1.0, lo)? - specfun::gamma_q(p + 1.0, hi)?;
                Ok(q.max(0.0) * lg.exp())
            }
            FadingModel::Deterministic => Ok(if lo <= 1.0 && 1.0 < hi { 1.0 } else { 0.0 }),
            FadingModel::Lognormal { sigma_db } => {
                // E[g^p 1{g < c}] = E[g^p] Phi((ln c - mu - p s^2) / s)
                let s = sigma_nat(sigma_db);
                let mu = -0.5 * s * s;
                let raw = (p * mu + 0.5 * p * p * s * s).exp();
                let z = |c: f64| (c.ln() - mu - p * s * s) / s;
                let upper_part = if hi.is_infinite() {
                    0.0
                } else {
                    normal_sf(z(hi))
                };
                let lower_part = if lo == 0.0 { 1.0 } else { normal_sf(z(lo)) };
                let frac = if lo == 0.0 && hi.is_finite() {
                    normal_cdf(z(hi))
                } else {
                    lower_part - upper_part
                };
                Ok(raw * frac.max(0.0))
            }
            FadingModel::NakagamiLognormal { .. } => {
                let v = self.expect_vec(1, lo, hi, |g, out: &mut [f64]| out[0] = g.powf(p))?;
                Ok(v[0])
            }
        }
    }

    /// `P(lo <= g < hi)`.
    pub fn probability(&self, lo: f64, hi: f64) -> Result<f64> {
        self.partial_moment(0.0, lo, hi)
    }

    /// Activation split at cluster-edge threshold `edge` and exponent `delta = 2/alpha`.
    pub fn activation_split(&self, edge: f64, delta: f64) -> Result<ActivationSplit> {
        if !(edge >= 0.0) {
            return Err(Error::domain(
                "activation_split",
                "threshold must be non-negative",
            ));
        }
        if edge == 0.0 {
            return Ok(ActivationSplit {
                below: 0.0,
                tail: 1.0,
                below_prob: 0.0,
            });
        }
        if edge.is_infinite() {
            return Ok(ActivationSplit {
                below: 0.0,
                tail: 0.0,
                below_prob: 1.0,
            });
        }
        let below = (-delta * edge.ln()).exp() * self.partial_moment(delta, 0.0, edge)?;
        let tail = self.probability(edge, f64::INFINITY)?;
        let below_prob = self.probability(0.0, edge)?;
        Ok(ActivationSplit {
            below,
            tail,
            below_prob,
        })
    }

    /// Draw one fading power.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            FadingModel::Exponential => Exp1.sample(rng),
            FadingModel::Deterministic => 1.0,
            FadingModel::Lognormal { sigma_db } => {
                let s = sigma_nat(sigma_db);
                let z: f64 = StandardNormal.sample(rng);
                (s * z - 0.5 * s * s).exp()
            }
            FadingModel::NakagamiLognormal { m, sigma_db } => {
                let s = sigma_nat(sigma_db);
                let z: f64 = StandardNormal.sample(rng);
                let x = Gamma::new(m, 1.0 / m).expect("shape validated").sample(rng);
                x * (s * z - 0.5 * s * s).exp()
            }
        }
    }
}

fn nakagami_log_window(m: f64) -> (f64, f64) {
    (-60.0 / m - 2.0, (1.0 + (60.0 + 12.0 * m.sqrt()) / m).ln())
}

/// Density of `ln X + ln Y`, X ~ Gamma(m, 1/m), Y unit-mean Lognormal.
fn nakagami_lognormal_log_density(m: f64, s: f64, u: f64) -> f64 {
    let mu = -0.5 * s * s;
    let norm = m * m.ln() - ln_gamma(m);
    let (xlo, xhi) = nakagami_log_window(m);
    // Shadowing component w, Gamma component v = u - w.
    let wlo = (mu - 10.0 * s).max(u - xhi);
    let whi = (mu + 10.0 * s).min(u - xlo);
    if !(whi > wlo) {
        return 0.0;
    }
    let c = 1.0 / (s * (2.0 * PI).sqrt());
    let cfg = QuadConfig::default().with_rel_tol(1e-12);
    quad::integrate(
        |w| {
            let z = (w - mu) / s;
            let v = u - w;
            c * (-0.5 * z * z + norm + m * v - m * v.exp()).exp()
        },
        wlo,
        whi,
        &[],
        &cfg,
    )
    .unwrap_or(0.0)
}

/// `E[g min{D^a, g/T}^(delta - 1)]` with `delta = 2/alpha`.
pub fn clipped_moment_1(model: &FadingModel, d: f64, t: f64, alpha: f64) -> Result<f64> {
    clipped_moment(model, 1, d, t, alpha)
}

/// `E[g^2 min{D^a, g/T}^(delta - 2)]`.
pub fn clipped_moment_2(model: &FadingModel, d: f64, t: f64, alpha: f64) -> Result<f64> {
    clipped_moment(model, 2, d, t, alpha)
}

fn check_clip_args(func: &'static str, d: f64, t: f64, alpha: f64) -> Result<()> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(Error::domain(func, "path-loss exponent must exceed 2"));
    }
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain(func, "cooperation radius must be positive"));
    }
    if !(t >= 0.0) {
        return Err(Error::domain(func, "threshold must be non-negative"));
    }
    Ok(())
}

/// Shared form: with `T~ = T D^alpha`,
/// `E[g^n min{..}^(delta - n)] = D^(2 - n alpha) (T~^(n - delta) E[g^delta; g < T~] + E[g^n; g >= T~])`.
fn clipped_moment(model: &FadingModel, n: i32, d: f64, t: f64, alpha: f64) -> Result<f64> {
    check_clip_args("clipped_moment", d, t, alpha)?;
    let delta = 2.0 / alpha;
    let nf = n as f64;
    let ln_scale = (2.0 - nf * alpha) * d.ln();
    let ln_edge = t.ln() + alpha * d.ln();
    let edge = ln_edge.exp();
    if t == 0.0 {
        return Ok(model.partial_moment(nf, 0.0, f64::INFINITY)? * ln_scale.exp());
    }
    if edge.is_infinite() {
        // Threshold above every fading value: only the g/T branch remains.
        let m = model.partial_moment(delta, 0.0, f64::INFINITY)?;
        return Ok(((nf - delta) * t.ln()).exp() * m);
    }
    let below = model.partial_moment(delta, 0.0, edge)?;
    let tail = model.partial_moment(nf, edge, f64::INFINITY)?;
    let bracket = ((nf - delta) * ln_edge).exp() * below + tail;
    Ok(bracket * ln_scale.exp())
}

/// Direct quadrature of `E[g^n min{D^alpha, g/T}^(delta - n)]`; reference
/// path for the decomposed form.
pub fn clipped_moment_quadrature(
    model: &FadingModel,
    n: u32,
    d: f64,
    t: f64,
    alpha: f64,
) -> Result<f64> {
    check_clip_args("clipped_moment_quadrature", d, t, alpha)?;
    let delta = 2.0 / alpha;
    let nf = n as f64;
    let da = d.powf(alpha);
    let edge = t * da;
    let breaks: Vec<f64> = if edge > 0.0 { vec![edge] } else { Vec::new() };
    let cfg = QuadConfig::default().with_rel_tol(EXPECT_REL_TOL);
    let v = model.expect_vec_with(
        1,
        0.0,
        f64::INFINITY,
        &breaks,
        &cfg,
        |g, out: &mut [f64]| {
            let clip = if t > 0.0 { da.min(g / t) } else { da };
            out[0] = g.powf(nf) * clip.powf(delta - nf);
        },
    )?;
    Ok(v[0])
}
