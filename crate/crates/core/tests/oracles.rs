//! Numbers checked against independent evaluations: direct quadrature,
//! finite differences and sampling.

use std::f64::consts::PI;

use ncjt_core::csi::{csi_numerator_laplace_derivatives, CsiContext};
use ncjt_core::gamma_fit::fit_scenario;
use ncjt_core::laplace::{signal_laplace_derivatives, signal_laplace_unconditional};
use ncjt_core::mc_sim;
use ncjt_core::quad::{integrate, integrate_to_infinity, QuadConfig};
use ncjt_core::scheduling::delta_saving;
use ncjt_core::sinr::SinrAnalysis;
use ncjt_core::specfun::{
    gamma_lower, gamma_upper, hyp2f1_special, ln_gamma, pareto_poisson_weights,
};
use ncjt_core::stats::Welford;
use ncjt_core::{ClusterMode, CsiMode, FadingModel, Scenario};

fn tight() -> QuadConfig {
    QuadConfig::default().with_rel_tol(1e-13).with_abs_tol(0.0)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn base() -> Scenario {
    Scenario::new(
        14e-6,
        4.0,
        300.0,
        1.0,
        10f64.powf(16.2),
        FadingModel::Exponential,
    )
}

/// m-th derivative by central differences and Richardson extrapolation with
/// step ratio `q`.
fn richardson(f: &dyn Fn(f64) -> f64, x: f64, m: usize, h0: f64, levels: usize, q: f64) -> f64 {
    let binom =
        |n: usize, k: usize| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    let diff = |h: f64| {
        let mut s = 0.0;
        for j in 0..=m {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binom(m, j) * f(x + (m as f64 / 2.0 - j as f64) * h);
        }
        s / h.powi(m as i32)
    };
    let mut table: Vec<Vec<f64>> = Vec::new();
    for k in 0..levels {
        let mut row = vec![diff(h0 / q.powi(k as i32))];
        for l in 1..=k {
            let p = (q * q).powi(l as i32);
            row.push(row[l - 1] + (row[l - 1] - table[k - 1][l - 1]) / (p - 1.0));
        }
        table.push(row);
    }
    *table.last().unwrap().last().unwrap()
}

#[test]
fn incomplete_gamma_against_quadrature() {
    for &a in &[0.3f64, 0.8, 1.0, 2.5, 7.0] {
        for &x in &[0.05f64, 0.7, 3.0, 12.0] {
            // t = u^(1/a) removes the endpoint singularity for a < 1.
            let lower = integrate(
                |u| (-u.powf(1.0 / a)).exp() / a,
                0.0,
                x.powf(a),
                &[],
                &tight(),
            )
            .unwrap();
            let upper =
                integrate_to_infinity(|t| t.powf(a - 1.0) * (-t).exp(), x, &tight()).unwrap();
            assert!(
                rel(gamma_lower(a, x).unwrap(), lower) < 1e-10,
                "lower a={a} x={x}"
            );
            assert!(
                rel(gamma_upper(a, x).unwrap(), upper) < 1e-10,
                "upper a={a} x={x}"
            );
            assert!(rel(lower + upper, ln_gamma(a).exp()) < 1e-10);
        }
    }
}

#[test]
fn hypergeometric_against_integral_form() {
    // 2F1(a, b; 1+b; -z) = int_0^1 (1 + z u^(1/b))^-a du
    for a in [1u32, 2] {
        for &b in &[0.2f64, 0.4444, 0.5714, 0.9] {
            for &z in &[0.01f64, 0.5, 1.0, 7.0, 300.0, 1e5] {
                let oracle = integrate(
                    |u| (1.0 + z * u.powf(1.0 / b)).powi(-(a as i32)),
                    0.0,
                    1.0,
                    &[],
                    &tight(),
                )
                .unwrap();
                let v = hyp2f1_special(a, b, z).unwrap();
                assert!(rel(v, oracle) < 1e-10, "a={a} b={b} z={z}: {v} vs {oracle}");
            }
        }
    }
}

#[test]
fn pareto_poisson_weights_against_mixture_integral() {
    for &delta in &[0.4f64, 0.5, 2.0 / 3.0] {
        for &x in &[0.1f64, 1.0, 4.0] {
            let mut w = [0.0; 8];
            pareto_poisson_weights(delta, x, &mut w);
            for (m, &wm) in w.iter().enumerate() {
                let oracle = integrate_to_infinity(
                    |v| {
                        let ln_pois = m as f64 * (x * v).ln() - x * v - ln_gamma(m as f64 + 1.0);
                        delta * v.powf(-delta - 1.0) * ln_pois.exp()
                    },
                    1.0,
                    &tight(),
                )
                .unwrap();
                assert!(rel(wm, oracle) < 1e-9, "delta={delta} x={x} m={m}");
            }
        }
    }
}

#[test]
fn delta_against_quadrature() {
    for &alpha in &[2.5f64, 3.5, 4.5] {
        let d = 2.0 / alpha;
        for &edge in &[0.1f64, 1.0, 4.0] {
            let used = integrate(
                |g| (-g).exp() * (g / edge).powf(d),
                0.0,
                edge,
                &[],
                &tight(),
            )
            .unwrap()
                + (-edge).exp();
            let v = delta_saving(&FadingModel::Exponential, alpha, edge).unwrap();
            assert!(
                (v - (1.0 - used)).abs() < 1e-12,
                "alpha={alpha} edge={edge}"
            );
        }
    }
}

#[test]
fn signal_derivatives_against_finite_differences() {
    for scn in [base(), base().with_cluster(ClusterMode::Conditional(3))] {
        let s0 = 1.0 / fit_scenario(&scn).unwrap().scale;
        let stack = signal_laplace_derivatives(&scn, s0, 4).unwrap();
        let f = |u: f64| match scn.cluster {
            ClusterMode::Unconditional => signal_laplace_unconditional(&scn, s0 * u).unwrap(),
            ClusterMode::Conditional(_) => {
                ncjt_core::laplace::signal_laplace_conditional(&scn, s0 * u).unwrap()
            }
        };
        assert!(rel(stack.value(0), f(1.0)) < 1e-12);
        for m in 1..=4 {
            let fd = richardson(&f, 1.0, m, 0.3, 6, 1.4);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let analytic = sign * stack.value(m) * s0.powi(m as i32);
            assert!(
                rel(fd, analytic) < 1e-5,
                "{:?} m={m}: {fd} vs {analytic}",
                scn.cluster
            );
        }
    }
}

#[test]
fn csi_derivatives_against_finite_differences() {
    let scn = Scenario::new(
        4e-6,
        4.0,
        300.0,
        0.0,
        10f64.powf(16.2),
        FadingModel::Exponential,
    )
    .with_cluster(ClusterMode::Conditional(3))
    .with_csi(CsiMode::Pilot(100));
    let ctx = CsiContext::from_scenario(&scn).unwrap();
    let s0 = 1.0 / fit_scenario(&scn).unwrap().scale;
    let stack = csi_numerator_laplace_derivatives(&scn, &ctx, s0, 3).unwrap();
    let f = |u: f64| {
        csi_numerator_laplace_derivatives(&scn, &ctx, s0 * u, 0)
            .unwrap()
            .value(0)
    };
    for m in 1..=3 {
        let fd = richardson(&f, 1.0, m, 0.3, 6, 1.4);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let analytic = sign * stack.value(m) * s0.powi(m as i32);
        assert!(rel(fd, analytic) < 1e-5, "m={m}: {fd} vs {analytic}");
    }
}

#[test]
fn signal_laplace_against_simulation() {
    let scn = base();
    let window = mc_sim::default_window(&scn).unwrap();
    let samples = mc_sim::run_range(&scn, &window, 11, 0..20_000).unwrap();
    let mean_p = samples.iter().map(|t| t.useful_power).sum::<f64>() / samples.len() as f64;
    let s = 1.0 / mean_p;
    let mut w = Welford::new();
    for t in &samples {
        w.push((-s * t.useful_power).exp());
    }
    let analytic = signal_laplace_unconditional(&scn, s).unwrap();
    assert!(
        (w.mean() - analytic).abs() < 4.0 * w.std_err(),
        "{} vs {analytic}",
        w.mean()
    );
}

#[test]
fn out_of_cluster_mean_matches_campbell() {
    // Mean interference from an infinite Poisson field beyond D with unit-mean
    // fading: 2 pi lambda D^(2 - alpha) / (alpha - 2).
    let scn = base().with_cluster(ClusterMode::Conditional(2));
    let window = mc_sim::default_window(&scn).unwrap();
    let samples = mc_sim::run_range(&scn, &window, 5, 0..20_000).unwrap();
    let mut w = Welford::new();
    samples.iter().for_each(|t| w.push(t.out_interference));
    let (a, d) = (scn.path_loss, scn.coop_radius);
    let campbell = 2.0 * PI * scn.density * d.powf(2.0 - a) / (a - 2.0);
    assert!(
        (w.mean() - campbell).abs() < 4.0 * w.std_err(),
        "{} vs {campbell}",
        w.mean()
    );
}

#[test]
fn normalized_terms_sum_to_one() {
    let scn = Scenario::new(
        14e-6,
        4.5,
        300.0,
        1.0,
        10f64.powf(16.2),
        FadingModel::Lognormal { sigma_db: 6.0 },
    );
    let a = SinrAnalysis::new(&scn).unwrap();
    let m_hi = a.fit().shape.ceil() as usize + 50;
    let mut prev = 1.0;
    for beta_db in [0.0, 40.0, 80.0, 120.0, 160.0] {
        let beta = 10f64.powf(beta_db / 10.0);
        let tail = a.cdf_tail_remainder(beta, m_hi).unwrap();
        let (_, upper) = a.cdf_bounds(beta).unwrap();
        // 1 - sum_{ceil k <= m < m_hi} t_m = upper + the mass beyond m_hi.
        assert!((tail.value - upper - tail.truncation_bound).abs() < 1e-12);
        assert!(tail.truncation_bound >= 0.0 && tail.truncation_bound < prev);
        prev = tail.truncation_bound;
    }
    // The remainder decays like beta^(-2/alpha), so it is only small far out.
    assert!(prev < 1e-6, "{prev}");
    let beta = 10f64.powf(16.0);
    let tail = a.cdf_tail_remainder(beta, m_hi).unwrap();
    assert!((tail.value - a.cdf_approx(beta).unwrap()).abs() < 1e-4);
}
