//! Randomized invariants of the information measures, bottleneck evaluation,
//! perturbation bounds and file formats.

use ibcurve_core::bounds::{
    bound_cond_entropy, bound_mi_diff, bound_trade_off, gamma, perturb_joint, random_deterministic_joint,
    random_encoder, refinement_chain, verify_issue3_fano, verify_thm_a1_a2,
};
use ibcurve_core::infotheory::{conditional_entropy, entropy, kl_divergence, l1_distance, mutual_information};
use ibcurve_core::io::{format_number, joint_to_csv, joint_to_json, parse_joint};
use ibcurve_core::{chain_evaluate, evaluate, Encoder, JointMatrix, JointXY, LayerChain, Matrix, ProbVector};
use proptest::prelude::*;

/// A strictly positive weight vector normalized to a distribution.
fn distribution(n: impl Into<proptest::sample::SizeRange>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn joint_matrix(max: usize) -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| distribution(r * c).prop_map(move |v| (r, c, v)))
}

fn to_joint(r: usize, c: usize, v: Vec<f64>) -> JointXY {
    let labels = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect();
    JointXY::new(Matrix::from_flat(r, c, v).unwrap(), labels("x", r), labels("y", c)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn entropy_is_bounded(p in distribution(1..12)) {
        let n = p.len();
        let h = entropy(&ProbVector::new(p).unwrap());
        prop_assert!(h >= 0.0 && h <= (n as f64).ln() + 1e-12);
    }

    #[test]
    fn kl_is_nonnegative_and_zero_on_self(p in distribution(2..8usize), q in distribution(2..8usize)) {
        let n = p.len().min(q.len());
        let norm = |v: &[f64]| { let s: f64 = v[..n].iter().sum(); ProbVector::new(v[..n].iter().map(|x| x / s).collect()).unwrap() };
        let (p, q) = (norm(&p), norm(&q));
        prop_assert!(kl_divergence(&p, &q).unwrap() >= 0.0);
        prop_assert!(kl_divergence(&p, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn mutual_information_identities((r, c, v) in joint_matrix(6)) {
        let j = JointMatrix::new(Matrix::from_flat(r, c, v).unwrap()).unwrap();
        let i = mutual_information(&j);
        prop_assert!(i >= 0.0);
        prop_assert!((i - mutual_information(&j.transpose())).abs() < 1e-12);
        let hc = entropy(&ProbVector::new(j.col_marginal()).unwrap());
        prop_assert!((i - (hc - conditional_entropy(&j))).abs() < 1e-10);
        prop_assert!(i <= hc + 1e-12);
    }

    #[test]
    fn evaluation_respects_plane_invariants((r, c, v) in joint_matrix(5), t in 1usize..6, hard in any::<bool>(), seed in any::<u64>()) {
        let j = to_joint(r, c, v);
        let enc = random_encoder(j.x_card(), t, hard, seed);
        let rep = evaluate(&j, &enc).unwrap();
        prop_assert!(rep.is_consistent());
        prop_assert!(rep.i_yt <= rep.i_xt + 1e-9);
        prop_assert!(rep.i_xt <= rep.h_t + 1e-9);
        if hard {
            prop_assert!((rep.i_xt - rep.h_t).abs() < 1e-9);
        }
    }

    #[test]
    fn chains_obey_data_processing((r, c, v) in joint_matrix(5), t1 in 1usize..6, t2 in 1usize..6, seed in any::<u64>()) {
        let j = to_joint(r, c, v);
        let chain = LayerChain::new(vec![
            random_encoder(j.x_card(), t1, false, seed),
            random_encoder(t1, t2, seed % 2 == 0, seed ^ 1),
        ]).unwrap();
        let reps = chain_evaluate(&j, &chain).unwrap();
        prop_assert!(reps[1].i_xt <= reps[0].i_xt + 1e-9);
        prop_assert!(reps[1].i_yt <= reps[0].i_yt + 1e-9);
    }

    #[test]
    fn bounds_grow_with_epsilon(e1 in 1e-6f64..0.5, e2 in 1e-6f64..0.5, ny in 2usize..20) {
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        for f in [bound_cond_entropy, bound_mi_diff, gamma, bound_trade_off] {
            prop_assert!(f(lo, ny).unwrap() <= f(hi, ny).unwrap() + 1e-15);
        }
    }

    #[test]
    fn bounds_match_their_closed_forms(eps in 1e-9f64..=0.5, ny in 2usize..64) {
        let m = ny as f64;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
        prop_assert!(close(bound_cond_entropy(eps, ny).unwrap(), -eps * (eps / m.powi(3)).ln()));
        prop_assert!(close(bound_mi_diff(eps, ny).unwrap(), -2.0 * eps * (eps / (m * m)).ln()));
        prop_assert!(close(gamma(eps, ny).unwrap(), -3.0 * eps * eps.ln() + 5.0 * eps * m.ln()));
        prop_assert!(close(bound_trade_off(eps, ny).unwrap(), -eps * (eps / m).ln()));
    }

    #[test]
    fn perturbations_hit_their_target(ny in 2usize..8, extra in 0usize..6, eps in 0.0f64..=0.5, seed in any::<u64>()) {
        let base = random_deterministic_joint(ny + extra, ny, seed).unwrap();
        let s = perturb_joint(&base, eps, seed ^ 7).unwrap();
        prop_assert!((s.epsilon_actual - eps).abs() < 1e-9);
        prop_assert!((l1_distance(&s.base, &s.perturbed).unwrap() - s.epsilon_actual).abs() < 1e-15);
        for (a, b) in s.perturbed.p_x().iter().zip(base.p_x()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbation_bounds_hold(ny in 2usize..8, extra in 0usize..6, eps in 1e-4f64..=0.5, t in 1usize..8, seed in any::<u64>()) {
        let base = random_deterministic_joint(ny + extra, ny, seed).unwrap();
        let s = perturb_joint(&base, eps, seed).unwrap();
        let (a1, a2) = verify_thm_a1_a2(&s, &random_encoder(base.x_card(), t, seed % 2 == 0, seed)).unwrap();
        prop_assert!(a1.holds, "{:?}", a1);
        prop_assert!(a2.holds, "{:?}", a2);
        let c = verify_issue3_fano(&s, &refinement_chain(&base, 3, seed).unwrap()).unwrap();
        for r in c.into_reports() {
            prop_assert!(r.holds, "{:?}", r);
        }
    }

    #[test]
    fn joint_files_round_trip((r, c, v) in joint_matrix(6)) {
        let j = to_joint(r, c, v);
        for text in [joint_to_csv(&j).unwrap(), joint_to_json(&j).unwrap()] {
            let back = parse_joint(&text).unwrap();
            prop_assert_eq!(back.x_labels(), j.x_labels());
            prop_assert_eq!(back.y_labels(), j.y_labels());
            for (a, b) in back.matrix().as_slice().iter().zip(j.matrix().as_slice()) {
                prop_assert!((a - b).abs() <= 1e-11 * b.max(1e-3));
            }
        }
    }

    #[test]
    fn number_format_round_trips(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let s = format_number(v);
        let parsed: f64 = s.parse().unwrap();
        prop_assert_eq!(format_number(parsed), s.clone());
        prop_assert!((parsed - v).abs() <= 5e-12 * v.abs());
    }
}

#[test]
fn identity_chain_on_deterministic_joint_is_lossless() {
    let base = random_deterministic_joint(9, 3, 4).unwrap();
    let chain = LayerChain::new(vec![Encoder::identity(9)]).unwrap();
    let r = chain_evaluate(&base, &chain).unwrap();
    assert!((r[0].i_yt - base.h_y()).abs() < 1e-12);
}
