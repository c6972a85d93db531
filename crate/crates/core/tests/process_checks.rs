mod common;

use std::f64::consts::PI;

use common::{autocov, ma2_theta, ma2_zeta_oracle, mean_var, median, simpson};
use qrenyi::montecarlo::ks_test_with;
use qrenyi::processes::{
    gaussian_ma_zeta, gen_cauchy_ratio, gen_copula_onedep, gen_gaussian_ma, gen_lognormal_ma, gen_pearson2, generate,
    pearson2_std_quantile, Copula, Marginal, ProcessSpec,
};
use qrenyi::special::normal_cdf;
use qrenyi::RngStream;

const N: usize = 100_000;

fn rng(stream: u64) -> RngStream {
    RngStream::new(2024, stream)
}

/// |autocovariance| at lags beyond the dependence range stays within
/// three standard errors (`var / √n`) of zero.
fn assert_m_dependent(xs: &[f64], m: usize) {
    let (_, var) = mean_var(xs);
    let se = var / (xs.len() as f64).sqrt();
    for lag in m + 1..=m + 3 {
        let c = autocov(xs, lag);
        assert!(c.abs() < 3.0 * se, "lag {lag}: {c} vs se {se}");
    }
}

#[test]
fn gaussian_ma_marginal_and_autocovariance() {
    let x = gen_gaussian_ma(&ma2_theta(), N, &mut rng(1)).unwrap();
    let xs = x.as_flat();
    let (_, var) = mean_var(xs);
    assert!((0.99..=1.01).contains(&var), "var {var}");
    assert!((autocov(xs, 1) - 2.0 / 3.0).abs() < 0.02);
    assert!((autocov(xs, 2) - 1.0 / 3.0).abs() < 0.02);
    assert_m_dependent(xs, 2);
    let ks = ks_test_with(&xs[..10_000], normal_cdf).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn trivial_ma_is_iid_normal() {
    let x = gen_gaussian_ma(&[1.0], 10_000, &mut rng(2)).unwrap();
    assert_m_dependent(x.as_flat(), 0);
    assert!(ks_test_with(x.as_flat(), normal_cdf).unwrap().p_value > 0.01);
}

#[test]
fn lognormal_ma_marginal() {
    let theta = [3f64.sqrt() / 2.0, -0.5];
    let x = gen_lognormal_ma(&theta, N, &mut rng(3)).unwrap();
    let xs = x.as_flat();
    assert!(xs.iter().all(|&v| v > 0.0));
    let med = median(xs);
    assert!((0.97..=1.03).contains(&med), "median {med}");
    let logs: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    assert_m_dependent(&logs, 1);
    let m = Marginal::LogNormal { mu: 0.0, sigma: 1.0 };
    assert!(ks_test_with(&xs[..10_000], |t| m.cdf(t)).unwrap().p_value > 0.01);
}

#[test]
fn cauchy_ratio_marginal() {
    let x = gen_cauchy_ratio(N, &mut rng(4)).unwrap();
    let xs = x.as_flat();
    assert!(median(xs).abs() < 0.02);
    let inside = xs.iter().filter(|v| v.abs() <= 1.0).count() as f64 / N as f64;
    assert!((inside - 0.5).abs() < 0.01, "{inside}");
    let bounded: Vec<f64> = xs.iter().map(|v| v.atan()).collect();
    assert_m_dependent(&bounded, 1);
    let m = Marginal::Cauchy {
        location: 0.0,
        scale: 1.0,
    };
    assert!(ks_test_with(&xs[..10_000], |t| m.cdf(t)).unwrap().p_value > 0.01);
}

#[test]
fn independence_copula_gives_iid_uniforms() {
    let x = gen_copula_onedep(|p| p, &Copula::Independence, 10_000, &mut rng(5)).unwrap();
    assert!(ks_test_with(x.as_flat(), |t| t.clamp(0.0, 1.0)).unwrap().p_value > 0.01);
    assert_m_dependent(x.as_flat(), 0);
}

#[test]
fn clayton_copula_is_one_dependent_with_uniform_marginal() {
    let x = gen_copula_onedep(|p| p, &Copula::Clayton { theta: 2.0 }, N, &mut rng(6)).unwrap();
    let xs = x.as_flat();
    assert!(ks_test_with(&xs[..10_000], |t| t.clamp(0.0, 1.0)).unwrap().p_value > 0.01);
    let (_, var) = mean_var(xs);
    let corr = |lag| autocov(xs, lag) / var;
    assert!(corr(1) > 0.1, "lag-1 corr {}", corr(1));
    assert!(corr(2).abs() < 0.02, "lag-2 corr {}", corr(2));
    assert_m_dependent(xs, 1);
}

#[test]
fn clayton_with_pearson_marginal_stays_on_support() {
    let m = Marginal::PearsonII { mean: 0.0, sd: 1.0 };
    let x = gen_copula_onedep(|p| m.quantile(p), &Copula::Clayton { theta: 2.0 }, 20_000, &mut rng(7)).unwrap();
    assert!(x.as_flat().iter().all(|v| v.abs() <= 5f64.sqrt()));
    assert!(ks_test_with(&x.as_flat()[..10_000], |t| m.cdf(t)).unwrap().p_value > 0.01);
}

#[test]
fn copula_rejects_bad_inputs() {
    assert!(gen_copula_onedep(|p| p, &Copula::Clayton { theta: -0.5 }, 10, &mut rng(0)).is_err());
    assert!(gen_copula_onedep(|p| -p, &Copula::Independence, 10, &mut rng(0)).is_err());
    assert!(gen_copula_onedep(|p| 1.0 / (p - 0.5), &Copula::Independence, 10, &mut rng(0)).is_err());
}

#[test]
fn pearson_support_and_variance() {
    let x = gen_pearson2(&[0.0], &[vec![1.0]], 4, N, &mut rng(8)).unwrap();
    let xs = x.as_flat();
    assert!(xs.iter().all(|v| v * v <= 5.0 + 1e-12));
    let (_, var) = mean_var(xs);
    assert!((var - 1.0).abs() < 0.02, "var {var}");
    let m = Marginal::PearsonII { mean: 0.0, sd: 1.0 };
    assert!(ks_test_with(&xs[..10_000], |t| m.cdf(t)).unwrap().p_value > 0.01);
    let sq: Vec<f64> = xs.iter().map(|v| v * v).collect();
    assert_m_dependent(&sq, 4);
}

#[test]
fn pearson_smaller_dependence_orders() {
    for m in 1..=3 {
        let x = gen_pearson2(&[0.0], &[vec![1.0]], m, N, &mut rng(10 + m as u64)).unwrap();
        let sq: Vec<f64> = x.as_flat().iter().map(|v| v * v).collect();
        assert_m_dependent(&sq, m);
        let marginal = Marginal::PearsonII { mean: 0.0, sd: 1.0 };
        assert!(
            ks_test_with(&x.as_flat()[..10_000], |t| marginal.cdf(t))
                .unwrap()
                .p_value
                > 0.01
        );
    }
}

#[test]
fn pearson_two_dimensional_support_and_covariance() {
    let sigma = vec![vec![2.0, 0.6], vec![0.6, 1.0]];
    let x = gen_pearson2(&[1.0, -1.0], &sigma, 5, 50_000, &mut rng(20)).unwrap();
    let det = 2.0 - 0.36;
    let inv = [[1.0 / det, -0.6 / det], [-0.6 / det, 2.0 / det]];
    let mut cov = [[0.0; 2]; 2];
    for p in x.points() {
        let z = [p[0] - 1.0, p[1] + 1.0];
        let q = z[0] * (inv[0][0] * z[0] + inv[0][1] * z[1]) + z[1] * (inv[1][0] * z[0] + inv[1][1] * z[1]);
        assert!(q <= 6.0 + 1e-9, "quadratic form {q}");
        for i in 0..2 {
            for j in 0..2 {
                cov[i][j] += z[i] * z[j] / 50_000.0;
            }
        }
    }
    assert!((cov[0][0] - 2.0).abs() < 0.05 && (cov[1][1] - 1.0).abs() < 0.03 && (cov[0][1] - 0.6).abs() < 0.03);
}

#[test]
fn pearson_quantile_by_bisection_oracle() {
    let cdf = |z: f64| 0.5 + 3.0 / (4.0 * 5f64.sqrt()) * (z - z.powi(3) / 15.0);
    for &p in &[0.001, 0.1, 0.37, 0.5, 0.9, 0.999] {
        let (mut lo, mut hi) = (-5f64.sqrt(), 5f64.sqrt());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((pearson2_std_quantile(p) - lo).abs() < 1e-12);
    }
}

#[test]
fn reproducible_generation() {
    let spec = ProcessSpec::CopulaOneDep {
        copula: Copula::Clayton { theta: 1.5 },
        marginal: Marginal::Normal { mean: 0.0, sd: 2.0 },
    };
    let a = generate(&spec, 1000, 17, 3).unwrap();
    let b = generate(&spec, 1000, 17, 3).unwrap();
    let c = generate(&spec, 1000, 17, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.sample, c.sample);
}

#[test]
fn quadratic_functionals_match_quadrature() {
    let cases = [
        Marginal::Normal { mean: 1.0, sd: 0.7 },
        Marginal::Uniform { lo: -1.0, hi: 3.0 },
        Marginal::Cauchy {
            location: 0.0,
            scale: 2.0,
        },
        Marginal::PearsonII { mean: 0.0, sd: 1.5 },
    ];
    for m in cases {
        let (a, b) = match m {
            Marginal::Uniform { lo, hi } => (lo, hi),
            Marginal::PearsonII { mean, sd } => (mean - 5f64.sqrt() * sd, mean + 5f64.sqrt() * sd),
            Marginal::Cauchy { .. } => (-1e4, 1e4),
            _ => (-20.0, 20.0),
        };
        let panels = if matches!(m, Marginal::Cauchy { .. }) {
            2_000_000
        } else {
            20_000
        };
        let q2 = simpson(|x| m.density(x).powi(2), a, b, panels);
        let q3 = simpson(|x| m.density(x).powi(3), a, b, panels);
        assert!((m.q2() / q2 - 1.0).abs() < 1e-5, "{m:?}: {} vs {q2}", m.q2());
        assert!((m.q3() / q3 - 1.0).abs() < 1e-5, "{m:?}: {} vs {q3}", m.q3());
    }
    // log-normal via x = e^u
    let m = Marginal::LogNormal { mu: 0.3, sigma: 0.8 };
    let q2 = simpson(|u| m.density(u.exp()).powi(2) * u.exp(), -15.0, 15.0, 40_000);
    let q3 = simpson(|u| m.density(u.exp()).powi(3) * u.exp(), -15.0, 15.0, 40_000);
    assert!((m.q2() / q2 - 1.0).abs() < 1e-8);
    assert!((m.q3() / q3 - 1.0).abs() < 1e-8);
    let ex3 = Marginal::LogNormal { mu: 0.0, sigma: 1.0 };
    assert!((ex3.q2() - 0.25f64.exp() / (2.0 * PI.sqrt())).abs() < 1e-15);
}

#[test]
fn closed_form_zeta_matches_quadrature() {
    assert!((gaussian_ma_zeta(&ma2_theta()) / ma2_zeta_oracle() - 1.0).abs() < 1e-8);
    let t = ProcessSpec::GaussianMA { theta: ma2_theta() }.truth().unwrap();
    assert!((t.zeta.unwrap() - 0.024_222_673_564_912_7).abs() < 1e-12);
}
