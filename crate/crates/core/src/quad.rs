//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature.
//!
//! The vector form integrates several functions sharing the same nodes,
//! which is what the derivative stacks need: one pass over the fading
//! density yields every derivative order at once.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerances for the adaptive driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    /// Per-component relative tolerance.
    pub rel_tol: f64,
    /// Per-component absolute floor.
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Relative error above which running out of intervals is an error
    /// rather than a best-effort result.
    pub fail_rel: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_intervals: 4000,
            fail_rel: 1e-6,
        }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * resabs;
        if min_err > err {
            err = min_err;
        }
    }
    err
}

struct Workspace {
    dim: usize,
    fv: Vec<f64>,
}

impl Workspace {
    fn new(dim: usize) -> Self {
        Workspace {
            dim,
            fv: vec![0.0; 21 * dim],
        }
    }

    fn rule<F: FnMut(f64, &mut [f64])>(&mut self, f: &mut F, a: f64, b: f64) -> Segment {
        let dim = self.dim;
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        // Node layout: 0 = centre, 2j+1 / 2j+2 = centre -/+ half * XGK[j].
        f(center, &mut self.fv[..dim]);
        #[allow(clippy::needless_range_loop)]
        for j in 0..10 {
            let dx = half * XGK[j];
            let (lo, hi) = (1 + 2 * j, 2 + 2 * j);
            f(center - dx, &mut self.fv[lo * dim..(lo + 1) * dim]);
            f(center + dx, &mut self.fv[hi * dim..(hi + 1) * dim]);
        }
        let mut value = vec![0.0; dim];
        let mut error = vec![0.0; dim];
        for c in 0..dim {
            let fc = self.fv[c];
            let mut res_k = fc * WGK[10];
            let mut res_g = 0.0;
            let mut resabs = res_k.abs();
            #[allow(clippy::needless_range_loop)]
            for j in 0..10 {
                let f1 = self.fv[(1 + 2 * j) * dim + c];
                let f2 = self.fv[(2 + 2 * j) * dim + c];
                res_k += WGK[j] * (f1 + f2);
                resabs += WGK[j] * (f1.abs() + f2.abs());
                if j % 2 == 1 {
                    res_g += WG[j / 2] * (f1 + f2);
                }
            }
            let mean = res_k * 0.5;
            let mut resasc = WGK[10] * (fc - mean).abs();
            #[allow(clippy::needless_range_loop)]
            for j in 0..10 {
                let f1 = self.fv[(1 + 2 * j) * dim + c];
                let f2 = self.fv[(2 + 2 * j) * dim + c];
                resasc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
            }
            let h = half.abs();
            value[c] = res_k * half;
            error[c] = rescale_error((res_k - res_g) * half, resabs * h, resasc * h);
        }
        Segment { a, b, value, error }
    }
}

/// Integrate the vector-valued `f` over `[a, b]` split at `breaks`.
///
/// `f(x, out)` must fill `out` (length `dim`). Each component converges to
/// `max(rel_tol * |I_j|, abs_tol)`.
pub fn integrate_vec<F>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    if dim == 0 {
        return Ok(Vec::new());
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integrate_vec", "limits must be finite"));
    }
    if a == b {
        return Ok(vec![0.0; dim]);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut points: Vec<f64> = vec![lo];
    let mut sorted: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&p| p > lo && p < hi)
        .collect();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sorted.dedup();
    points.extend(sorted);
    points.push(hi);

    let mut ws = Workspace::new(dim);
    let mut segs: Vec<Segment> = points
        .windows(2)
        .map(|w| ws.rule(&mut f, w[0], w[1]))
        .collect();

    let mut total = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    let mut tol = vec![0.0; dim];
    loop {
        total.fill(0.0);
        err.fill(0.0);
        for s in &segs {
            for c in 0..dim {
                total[c] += s.value[c];
                err[c] += s.error[c];
            }
        }
        let mut converged = true;
        for c in 0..dim {
            tol[c] = (cfg.rel_tol * total[c].abs()).max(cfg.abs_tol);
            if err[c] > tol[c] {
                converged = false;
            }
        }
        if converged {
            break;
        }
        if segs.len() >= cfg.max_intervals {
            let achieved = (0..dim)
                .map(|c| {
                    err[c]
                        / total[c]
                            .abs()
                            .max(cfg.abs_tol / cfg.rel_tol.max(f64::MIN_POSITIVE))
                })
                .fold(0.0, f64::max);
            if achieved > cfg.fail_rel {
                return Err(Error::Quadrature { achieved });
            }
            break;
        }
        // Bisect the segment contributing most to the worst tolerance ratio.
        let mut worst = 0;
        let mut worst_score = -1.0;
        for (i, s) in segs.iter().enumerate() {
            let score = (0..dim).map(|c| s.error[c] / tol[c]).fold(0.0, f64::max);
            if score > worst_score {
                worst_score = score;
                worst = i;
            }
        }
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if !(mid > s.a && mid < s.b) {
            // Interval cannot be split further in floating point.
            let achieved = (0..dim)
                .map(|c| err[c] / total[c].abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            if achieved > cfg.fail_rel {
                return Err(Error::Quadrature { achieved });
            }
            segs.push(s);
            break;
        }
        let left = ws.rule(&mut f, s.a, mid);
        let right = ws.rule(&mut f, mid, s.b);
        segs.push(left);
        segs.push(right);
    }
    for v in total.iter_mut() {
        *v *= sign;
    }
    Ok(total)
}

/// Scalar adaptive quadrature over a finite interval.
pub fn integrate<F>(mut f: F, a: f64, b: f64, breaks: &[f64], cfg: &QuadConfig) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let v = integrate_vec(|x, out: &mut [f64]| out[0] = f(x), 1, a, b, breaks, cfg)?;
    Ok(v[0])
}

/// Integral over `[a, inf)` via `x = a + t / (1 - t)`.
pub fn integrate_to_infinity<F>(mut f: F, a: f64, cfg: &QuadConfig) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(
        |t| {
            let one_minus = 1.0 - t;
            let x = a + t / one_minus;
            let v = f(x) / (one_minus * one_minus);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        &[],
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let cfg = QuadConfig::default();
        let v = integrate(|x| 3.0 * x * x + 1.0, 0.0, 2.0, &[], &cfg).unwrap();
        assert!((v - 10.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let cfg = QuadConfig::default();
        let v = integrate(|x| x.exp(), 1.0, 0.0, &[], &cfg).unwrap();
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn kink_with_breakpoint() {
        let cfg = QuadConfig::default();
        let v = integrate(|x| (x - 0.3).abs(), 0.0, 1.0, &[0.3], &cfg).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity() {
        let cfg = QuadConfig::default();
        let v = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, &[], &cfg).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn vector_components_converge_independently() {
        let cfg = QuadConfig::default();
        let v = integrate_vec(
            |x, out: &mut [f64]| {
                out[0] = x.sin();
                out[1] = 1e-20 * x;
            },
            2,
            0.0,
            core::f64::consts::PI,
            &[],
            &cfg,
        )
        .unwrap();
        assert!((v[0] - 2.0).abs() < 1e-12);
        assert!((v[1] / (1e-20 * core::f64::consts::PI.powi(2) / 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite() {
        let cfg = QuadConfig::default();
        let v = integrate_to_infinity(|x| (-x).exp(), 0.0, &cfg).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }
}
