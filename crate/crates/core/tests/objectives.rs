mod common;

use common::*;
use proptest::prelude::*;
use tabkip::objectives::{loss_and_grad, shifted_sigmoid, sigmoid, Objective};

fn all_objectives() -> Vec<Objective> {
    vec![
        Objective::Mse,
        Objective::Ce,
        Objective::Wce { coe: 0.8 },
        Objective::Focal { gamma: 2.0 },
        Objective::Asig {
            gamma: 2.0,
            alpha_w: 0.75,
            alpha_g: 0.6,
            beta_g: -0.2,
            ir: 9.0,
        },
    ]
}

fn loss(obj: &Objective, z: &[f64], y: &[u8]) -> f64 {
    loss_and_grad(obj, z, y).unwrap().0
}

#[test]
fn gradients_match_central_differences() {
    for seed in 0..20 {
        let mut r = seeded(seed);
        let z: Vec<f64> = (0..32).map(|_| 2.0 * normal(&mut r)).collect();
        let y = labels(&mut r, 32);
        for obj in all_objectives() {
            let (_, g) = loss_and_grad(&obj, &z, &y).unwrap();
            let fd = central_differences(&z, 1e-5, |v| loss(&obj, v, &y));
            let err = max_relative_error(&g, &fd, 1e-4);
            assert!(err < 1e-6, "seed {seed} {obj:?}: {err:e}");
        }
    }
}

#[test]
fn ce_of_even_odds_is_ln2() {
    let (l, _) = loss_and_grad(&Objective::Ce, &[0.0, 0.0], &[1, 0]).unwrap();
    assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
}

#[test]
fn mse_perfect_fit() {
    let (l, g) = loss_and_grad(&Objective::Mse, &[1.0, -1.0, 1.0], &[1, 0, 1]).unwrap();
    assert_eq!(l, 0.0);
    assert!(g.iter().all(|&v| v == 0.0));
}

#[test]
fn ce_gradient_vanishes_near_the_label() {
    // p within 1e-9 of the label
    let u = (1.0f64 / 1e-9).ln();
    let (_, g) = loss_and_grad(&Objective::Ce, &[u, -u], &[1, 0]).unwrap();
    assert!(g.iter().all(|v| v.abs() < 1e-6), "{g:?}");
}

#[test]
fn losses_are_finite_for_extreme_scores() {
    let z = [-1e300, -1e6, -40.0, 0.0, 40.0, 1e6, 1e300];
    let y = [1, 0, 1, 0, 1, 0, 1];
    for obj in all_objectives() {
        if obj == Objective::Mse {
            continue;
        }
        let (l, g) = loss_and_grad(&obj, &z, &y).unwrap();
        assert!(l.is_finite() && g.iter().all(|v| v.is_finite()), "{obj:?}");
    }
}

#[test]
fn errors() {
    assert!(loss_and_grad(&Objective::Ce, &[0.0], &[1, 0]).is_err());
    assert!(loss_and_grad(&Objective::Focal { gamma: -1.0 }, &[0.0], &[1]).is_err());
    assert!(loss_and_grad(&Objective::Wce { coe: 1.5 }, &[0.0], &[1]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn reduction_identities(seed in any::<u64>(), n in 1usize..40) {
        let mut r = seeded(seed);
        let z: Vec<f64> = (0..n).map(|_| 3.0 * normal(&mut r)).collect();
        let y: Vec<u8> = (0..n).map(|i| u8::from(normal(&mut r) > 0.5 || i == 0)).collect();
        let (ce, ce_g) = loss_and_grad(&Objective::Ce, &z, &y).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);

        let (f, f_g) = loss_and_grad(&Objective::Focal { gamma: 0.0 }, &z, &y).unwrap();
        prop_assert!(close(f, ce));
        prop_assert!(f_g.iter().zip(&ce_g).all(|(a, b)| close(*a, *b)));

        let (w, w_g) = loss_and_grad(&Objective::Wce { coe: 0.5 }, &z, &y).unwrap();
        prop_assert!(close(w, 0.5 * ce));
        prop_assert!(w_g.iter().zip(&ce_g).all(|(a, b)| close(*a, 0.5 * b)));

        let asig = Objective::Asig { gamma: 0.0, alpha_w: 0.5, alpha_g: 0.0, beta_g: 0.0, ir: 7.0 };
        let (a, a_g) = loss_and_grad(&asig, &z, &y).unwrap();
        prop_assert!(close(a, 0.5 * ce));
        prop_assert!(a_g.iter().zip(&ce_g).all(|(x, b)| close(*x, 0.5 * b)));

        let plain: Vec<f64> = z.iter().map(|&v| sigmoid(v)).collect();
        prop_assert_eq!(shifted_sigmoid(&z, 0.0), plain);
    }

    #[test]
    fn larger_shift_lowers_every_probability(seed in any::<u64>(), g in -3.0f64..3.0, dg in 0.01f64..2.0) {
        let mut r = seeded(seed);
        let z: Vec<f64> = (0..16).map(|_| 2.0 * normal(&mut r)).collect();
        let lo = shifted_sigmoid(&z, g);
        let hi = shifted_sigmoid(&z, g + dg);
        prop_assert!(lo.iter().zip(&hi).all(|(a, b)| b < a));
    }
}
