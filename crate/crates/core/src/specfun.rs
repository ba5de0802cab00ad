//! Special functions used by the interference and Laplace-transform
//! machinery.
//!
//! Incomplete gamma functions follow the classic split: power series for the
//! lower function when `x < a + 1`, Lentz continued fraction for the upper
//! function otherwise. Everything that can overflow has a log-domain twin.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 20_000;

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

fn check_gamma_args(func: &'static str, a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(
            func,
            "shape parameter must be positive and finite",
        ));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(func, "argument must be non-negative"));
    }
    Ok(())
}

/// `ln` of the series `sum_n x^n / (a (a+1) ... (a+n))`, so that
/// `gamma_lower(a, x) = exp(-x + a ln x) * series`.
fn lower_series_ln(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum.ln()
}

/// Lentz evaluation of the continued fraction with
/// `Gamma(a, x) = exp(-x + a ln x) * cf`. Valid for any real `a` when `x > 0`,
/// fast when `x > a + 1`.
fn upper_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized pair `(P(a, x), Q(a, x))` together with `ln gamma_lower` and
/// `ln Gamma_upper`.
fn incomplete_gamma_parts(a: f64, x: f64) -> (f64, f64, f64, f64) {
    let lg = ln_gamma(a);
    if x == 0.0 {
        return (0.0, 1.0, f64::NEG_INFINITY, lg);
    }
    let prefix = -x + a * x.ln();
    if x < a + 1.0 {
        let ln_lower = prefix + lower_series_ln(a, x);
        let p = (ln_lower - lg).exp().min(1.0);
        let ln_upper = lg + (-p).ln_1p();
        (p, 1.0 - p, ln_lower, ln_upper)
    } else {
        let ln_upper = prefix + upper_cf(a, x).ln();
        let q = (ln_upper - lg).exp().min(1.0);
        let ln_lower = lg + (-q).ln_1p();
        (1.0 - q, q, ln_lower, ln_upper)
    }
}

/// Upper incomplete gamma function `Gamma(a, x) = int_x^inf t^(a-1) e^-t dt`.
///
/// Overflows for `a` beyond about 171; use [`ln_gamma_upper`] there.
pub fn gamma_upper(a: f64, x: f64) -> Result<f64> {
    Ok(ln_gamma_upper(a, x)?.exp())
}

/// Lower incomplete gamma function `gamma(a, x) = int_0^x t^(a-1) e^-t dt`.
pub fn gamma_lower(a: f64, x: f64) -> Result<f64> {
    Ok(ln_gamma_lower(a, x)?.exp())
}

pub fn ln_gamma_upper(a: f64, x: f64) -> Result<f64> {
    check_gamma_args("ln_gamma_upper", a, x)?;
    if x.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(incomplete_gamma_parts(a, x).3)
}

pub fn ln_gamma_lower(a: f64, x: f64) -> Result<f64> {
    check_gamma_args("ln_gamma_lower", a, x)?;
    if x.is_infinite() {
        return Ok(ln_gamma(a));
    }
    Ok(incomplete_gamma_parts(a, x).2)
}

/// Regularized lower incomplete gamma `P(a, x)`, the Gamma(a, 1) CDF.
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    check_gamma_args("gamma_p", a, x)?;
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(incomplete_gamma_parts(a, x).0)
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    check_gamma_args("gamma_q", a, x)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(incomplete_gamma_parts(a, x).1)
}

/// Laplace transform of a Pareto variable: `E[exp(-x V)]` where `V` has
/// density `delta v^(-delta-1)` on `[1, inf)`. Equals `delta x^delta Gamma(-delta, x)`.
///
/// Returns `(value, 1 - value)`, each computed without cancellation.
pub fn pareto_laplace(delta: f64, x: f64) -> (f64, f64) {
    debug_assert!(delta > 0.0 && delta < 1.0);
    if x <= 0.0 {
        return (1.0, 0.0);
    }
    if x.is_infinite() {
        return (0.0, 1.0);
    }
    if x < 1.0 {
        // x^delta Gamma(1 - delta, x) via the shifted recurrence.
        let tail = (delta * x.ln() + incomplete_gamma_parts(1.0 - delta, x).3).exp();
        let value = (-x).exp() - tail;
        let complement = -(-x).exp_m1() + tail;
        (value, complement)
    } else {
        let value = delta * (-x).exp() * upper_cf(-delta, x);
        (value, 1.0 - value)
    }
}

/// Pareto-mixed Poisson probabilities
/// `W_m(x) = E[(xV)^m exp(-xV) / m!] = delta x^delta Gamma(m - delta, x) / m!`
/// for `m = 0..out.len()`, with `V` Pareto as in [`pareto_laplace`].
///
/// The weights sum to one over all `m`. Upward recurrence in `m` only adds
/// positive terms.
pub fn pareto_poisson_weights(delta: f64, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    if x <= 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    if x.is_infinite() {
        out.fill(0.0);
        return;
    }
    out[0] = pareto_laplace(delta, x).0;
    if out.len() == 1 {
        return;
    }
    let ln_x = x.ln();
    let mut w = (delta.ln() + delta * ln_x + incomplete_gamma_parts(1.0 - delta, x).3).exp();
    out[1] = w;
    for m in 1..out.len() - 1 {
        let mf = m as f64;
        let pois = (mf * ln_x - x - ln_factorial(m)).exp();
        w = ((mf - delta) * w + delta * pois) / (mf + 1.0);
        out[m + 1] = w;
    }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `2F1(a, b; 1 + b; -z)` for `a` in `{1, 2}`, `0 < b < 1`, `z >= 0`.
///
/// Uses `2F1(a, b; b+1; -z) = b z^-b B(z/(1+z); b, a-b)`, evaluated through
/// the incomplete-beta continued fraction on whichever side converges.
pub fn hyp2f1_special(a: u32, b: f64, z: f64) -> Result<f64> {
    if a != 1 && a != 2 {
        return Err(Error::domain(
            "hyp2f1_special",
            "first parameter must be 1 or 2",
        ));
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::domain("hyp2f1_special", "b must lie in (0, 1)"));
    }
    if !(z >= 0.0) {
        return Err(Error::domain("hyp2f1_special", "z must be non-negative"));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z.is_infinite() {
        return Ok(0.0);
    }
    let af = a as f64;
    let q = af - b;
    let w = z / (1.0 + z);
    let w_c = 1.0 / (1.0 + z);
    let ln_one_plus_z = z.ln_1p();
    if w < (b + 1.0) / (af + 2.0) {
        Ok((-af * ln_one_plus_z).exp() * beta_cf(b, q, w))
    } else {
        // B(b, 1-b) = pi / sin(pi b), B(b, 2-b) = (1-b) pi / sin(pi b)
        let complete = if a == 1 {
            PI / (PI * b).sin()
        } else {
            (1.0 - b) * PI / (PI * b).sin()
        };
        let head = b * (-b * z.ln()).exp() * complete;
        let tail = (b / q) * (-af * ln_one_plus_z).exp() * beta_cf(q, b, w_c);
        Ok(head - tail)
    }
}

/// Stable `ln(sum exp(t))`; returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp<I: IntoIterator<Item = f64> + Clone>(terms: I) -> f64 {
    let max = terms.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = terms.into_iter().map(|t| (t - max).exp()).sum();
    max + s.ln()
}

/// Natural logs of complete Bell polynomials `B_0..B_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellStack {
    pub log_values: Vec<f64>,
}

impl BellStack {
    pub fn len(&self) -> usize {
        self.log_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }

    pub fn value(&self, n: usize) -> f64 {
        self.log_values[n].exp()
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    (0..=n).map(ln_factorial).collect()
}

/// Complete Bell polynomials `B_0..B_m` of `x_1..x_m`, in log domain.
pub fn complete_bell_log(x: &[f64]) -> Result<BellStack> {
    if x.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::domain(
            "complete_bell_log",
            "arguments must be positive",
        ));
    }
    let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    Ok(complete_bell_from_logs(&logs))
}

/// As [`complete_bell_log`] but taking `ln x_1..ln x_m`; `-inf` entries
/// stand for zero arguments.
pub fn complete_bell_from_logs(log_x: &[f64]) -> BellStack {
    let m = log_x.len();
    let lf = ln_factorials(m);
    let mut out = Vec::with_capacity(m + 1);
    out.push(0.0);
    let mut terms = Vec::with_capacity(m);
    for n in 0..m {
        // B_{n+1} = sum_k C(n, k) B_{n-k} x_{k+1}
        terms.clear();
        terms.extend((0..=n).map(|k| lf[n] - lf[k] - lf[n - k] + out[n - k] + log_x[k]));
        out.push(log_sum_exp(terms.iter().copied()));
    }
    BellStack { log_values: out }
}

/// `ln B_{n,j}(x_1, .., x_{n-j+1})`, the partial Bell polynomial.
pub fn partial_bell_log(x: &[f64], n: usize, j: usize) -> Result<f64> {
    if j == 0 || j > n {
        return Err(Error::domain("partial_bell_log", "need 1 <= j <= n"));
    }
    let need = n - j + 1;
    if x.len() < need {
        return Err(Error::domain("partial_bell_log", "too few arguments"));
    }
    if x[..need].iter().any(|&v| !(v > 0.0)) {
        return Err(Error::domain(
            "partial_bell_log",
            "arguments must be positive",
        ));
    }
    let logs: Vec<f64> = x[..need].iter().map(|v| v.ln()).collect();
    let table = partial_bell_table_from_logs(&logs, n, j);
    Ok(table[n][j])
}

/// Table `t[n][j] = ln B_{n,j}` for `n <= n_max`, `j <= min(n, j_max)`, from
/// `ln x_1..`. Entries with `j > n` are `-inf`.
///
/// Uses `B_{n,j} = sum_{i=1}^{n-j+1} C(n-1, i-1) x_i B_{n-i, j-1}`.
pub fn partial_bell_table_from_logs(log_x: &[f64], n_max: usize, j_max: usize) -> Vec<Vec<f64>> {
    let lf = ln_factorials(n_max);
    let mut table = vec![vec![f64::NEG_INFINITY; j_max + 1]; n_max + 1];
    table[0][0] = 0.0;
    let mut terms = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        for j in 1..=j_max.min(n) {
            terms.clear();
            for i in 1..=(n - j + 1) {
                let prev = table[n - i][j - 1];
                let lx = log_x.get(i - 1).copied().unwrap_or(f64::NEG_INFINITY);
                if prev == f64::NEG_INFINITY || lx == f64::NEG_INFINITY {
                    continue;
                }
                terms.push(lf[n - 1] - lf[i - 1] - lf[n - i] + lx + prev);
            }
            table[n][j] = log_sum_exp(terms.iter().copied());
        }
    }
    table
}
