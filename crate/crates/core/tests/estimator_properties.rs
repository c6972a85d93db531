mod common;

use std::f64::consts::PI;

use common::{brute_pairs, ma2_theta, ma2_zeta_oracle};
use proptest::prelude::*;
use qrenyi::estimators::{
    estimate_h2, estimate_h3, estimate_q2, estimate_u3, estimate_u3_all, residual_from_parts, u_from_parts,
    w_from_parts, zeta_from_parts,
};
use qrenyi::geometry::{ball_volume, unit_ball_volume};
use qrenyi::processes::{gen_cauchy_ratio, gen_gaussian_ma, gen_iid, Marginal};
use qrenyi::{estimate, EstimateConfig, ResidualKind, RngStream, SeriesSample};

fn ma2_sample(n: usize, stream: u64) -> SeriesSample {
    gen_gaussian_ma(&ma2_theta(), n, &mut RngStream::new(99, stream)).unwrap()
}

#[test]
fn q2_hat_near_truth_for_equal_weight_ma2() {
    let truth = 1.0 / (2.0 * PI.sqrt());
    let vals: Vec<f64> = (0..20)
        .map(|k| estimate_q2(&ma2_sample(500, k), 0.1).unwrap().1)
        .collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    assert!((mean - truth).abs() < 0.015, "mean {mean} vs {truth}");
}

#[test]
fn u0_and_h3_for_equal_weight_ma2() {
    let q3 = 1.0 / (2.0 * PI * 3f64.sqrt());
    let mut u0 = 0.0;
    let mut h3 = 0.0;
    for k in 0..20 {
        let s = ma2_sample(500, k);
        u0 += estimate_u3(&s, 0, 0.1).unwrap() / 20.0;
        h3 += estimate_h3(&s, 0.1).unwrap() / 20.0;
    }
    assert!((u0 / q3 - 1.0).abs() < 0.1, "U0 {u0} vs {q3}");
    assert!((h3 - (-0.5 * q3.ln())).abs() < 0.06, "h3 {h3}");
    assert!((-0.5 * q3.ln() - 1.193_59).abs() < 1e-5);
}

#[test]
fn cauchy_entropy_near_ln_2pi() {
    let mut h = 0.0;
    for k in 0..20 {
        let s = gen_cauchy_ratio(500, &mut RngStream::new(4, k)).unwrap();
        h += estimate_h2(&s, 0.01).unwrap() / 20.0;
    }
    assert!((h - (2.0 * PI).ln()).abs() < 0.15, "h {h}");
}

#[test]
fn zeta_converges_for_equal_weight_ma2() {
    let oracle = ma2_zeta_oracle();
    assert!((oracle - 0.024_222_673_564_912_7).abs() < 1e-9, "oracle {oracle}");
    let mut z = 0.0;
    for k in 0..10 {
        let s = ma2_sample(2000, 100 + k);
        let u = estimate_u3_all(&s, 6, 0.1).unwrap();
        z += zeta_from_parts(&u, estimate_q2(&s, 0.1).unwrap().1) / 10.0;
    }
    assert!((z / oracle - 1.0).abs() < 0.2, "zeta {z} vs {oracle}");
}

#[test]
fn zeta_is_insensitive_to_overshooting_r_on_iid_data() {
    let m = Marginal::Normal { mean: 0.0, sd: 1.0 };
    let oracle = m.q3() - m.q2() * m.q2();
    let (mut z2, mut z5) = (0.0, 0.0);
    for k in 0..10 {
        let s = gen_iid(&m, 2000, &mut RngStream::new(8, k)).unwrap();
        let q = estimate_q2(&s, 0.1).unwrap().1;
        let u = estimate_u3_all(&s, 5, 0.1).unwrap();
        z2 += zeta_from_parts(&u[..3], q) / 10.0;
        z5 += zeta_from_parts(&u, q) / 10.0;
    }
    assert!((z2 - oracle).abs() < 0.35 * oracle, "r=2: {z2} vs {oracle}");
    assert!((z5 - oracle).abs() < 0.5 * oracle, "r=5: {z5} vs {oracle}");
}

#[test]
fn report_components_recompose() {
    let s = ma2_sample(500, 7);
    let config = EstimateConfig::new(0.1, 6);
    let rep = estimate(&s, &config).unwrap();
    let pairs = brute_pairs(&s, 0.1);
    assert_eq!(rep.n_pairs_close, pairs);
    let q2 = pairs as f64 / (500.0 * 499.0 / 2.0) / 0.2;
    assert!((rep.q2_hat - q2).abs() < 1e-14);
    let zeta = rep.u3_hat[0] - q2 * q2 + 2.0 * rep.u3_hat[1..].iter().map(|u| u - q2 * q2).sum::<f64>();
    assert!((rep.zeta_hat - zeta).abs() < 1e-14);
    let w = (2.0 * q2 / (500.0 * 0.2) + 4.0 * zeta.max(1.0 / 500.0)).sqrt();
    assert!((rep.w_hat - w).abs() < 1e-14);
    let u = (2.0 * q2.max(1.0 / 500.0) / 2.0).sqrt();
    assert!((rep.u_hat - u).abs() < 1e-14);
    assert!(rep.w_hat > 0.0 && rep.w_hat.is_finite());
    assert_eq!(estimate(&s, &config).unwrap(), rep);
}

#[test]
fn radius_doubling_with_a_distance_gap() {
    // clusters of width 0.01 separated by 10: radii 0.1 and 0.2 see the same pairs
    let xs: Vec<f64> = (0..30)
        .map(|i| (i / 5) as f64 * 10.0 + (i % 5) as f64 * 0.002)
        .collect();
    let s = SeriesSample::from_scalars(&xs).unwrap();
    let (_, a) = estimate_q2(&s, 0.1).unwrap();
    let (_, b) = estimate_q2(&s, 0.2).unwrap();
    assert!((b / a - 0.5).abs() < 1e-14);
    let pts: Vec<[f64; 2]> = xs.iter().map(|&x| [x, -x]).collect();
    let s2 = SeriesSample::from_points(&pts).unwrap();
    let (_, a) = estimate_q2(&s2, 0.1).unwrap();
    let (_, b) = estimate_q2(&s2, 0.2).unwrap();
    assert!((b / a - 0.25).abs() < 1e-14);
}

#[test]
fn hand_arithmetic() {
    assert!((w_from_parts(0.0, -5.0, 100, 1.0) - 0.2).abs() < 1e-15);
    assert!((w_from_parts(0.6, 0.2, 100, 1.0) - 0.812f64.sqrt()).abs() < 1e-15);
    assert!((u_from_parts(0.0, 50, 2.0) - 0.02f64.sqrt()).abs() < 1e-15);
    assert!((u_from_parts(1.0 / (2.0 * PI), 50, 2.0) - 0.398_942_280_4).abs() < 1e-9);
    let r = residual_from_parts(ResidualKind::QSqrtN, 0.3, 0.0, 0.28, 0.9, 100, 0.1, 1).unwrap();
    assert!((r - 0.2 / 0.9).abs() < 1e-14);
    assert_eq!(
        residual_from_parts(ResidualKind::QNeps, 0.28, 0.0, 0.28, 0.5, 100, 0.1, 1).unwrap(),
        0.0
    );
}

fn rotate(p: &[f64], angle: f64, shift: (f64, f64)) -> Vec<f64> {
    let (s, c) = angle.sin_cos();
    vec![c * p[0] - s * p[1] + shift.0, s * p[0] + c * p[1] + shift.1]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clamp_when_no_close_pairs(n in 2usize..200, gap in 1.0f64..5.0) {
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * gap).collect();
        let s = SeriesSample::from_scalars(&xs).unwrap();
        let h = estimate_h2(&s, 0.5).unwrap();
        prop_assert_eq!(h, (n as f64).ln());
    }

    #[test]
    fn rigid_motion_invariance(
        pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 8..60),
        angle in 0.0f64..std::f64::consts::TAU,
        dx in -3.0f64..3.0,
        dy in -3.0f64..3.0,
    ) {
        let a = SeriesSample::from_points(&pts).unwrap();
        let b = a.map_points(|p| rotate(p, angle, (dx, dy))).unwrap();
        // radius between rounding-sensitive distances is avoided by a gap check
        let eps = 0.3;
        let near_boundary = (0..a.len()).any(|i| (i + 1..a.len()).any(|j| {
            let d = common::sq_dist(a.point(i), a.point(j)).sqrt();
            (d - eps).abs() < 1e-9
        }));
        prop_assume!(!near_boundary);
        let ca = EstimateConfig::new(eps, 2);
        let ra = estimate(&a, &ca).unwrap();
        let rb = estimate(&b, &ca).unwrap();
        prop_assert_eq!(ra.n_pairs_close, rb.n_pairs_close);
        prop_assert_eq!(ra.u3_hat, rb.u3_hat);
    }

    #[test]
    fn report_invariants(xs in prop::collection::vec(-2.0f64..2.0, 10..120), eps in 0.01f64..1.0, r in 0usize..5) {
        let s = SeriesSample::from_scalars(&xs).unwrap();
        let rep = estimate(&s, &EstimateConfig::new(eps, r)).unwrap();
        prop_assert!(rep.q2_hat >= 0.0);
        prop_assert!(rep.h2_hat <= (xs.len() as f64).ln() + 1e-12);
        prop_assert!(rep.w_hat > 0.0);
        prop_assert!(rep.u_hat > 0.0);
        prop_assert_eq!(rep.u3_hat.len(), r + 1);
        prop_assert!((rep.q2_hat * ball_volume(1, eps).unwrap() - rep.qn_raw).abs() < 1e-12);
        prop_assert!(unit_ball_volume(1).unwrap() == 2.0);
    }
}
