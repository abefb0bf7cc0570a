use std::f64::consts::TAU;

use mvtorus::calculus::{
    generator_apply, hamiltonian, hamiltonian_split, linear_derivative_rho_sq, Control, ControlDictionary, DiffusionConvention,
    MomentFamily, SmoothFunction, TestFunctionGadget,
};
use mvtorus::metrics::{rho_lambda, sobolev_norm, DecayCertificate, SobolevWeight};
use mvtorus::torus::{wrap, FourierTable, ParticleCloud, TorusMeasure};
use proptest::prelude::*;

fn cloud(dim: usize) -> impl Strategy<Value = TorusMeasure<f64>> {
    (1usize..5).prop_flat_map(move |n| {
        (prop::collection::vec(0.0..TAU, n * dim), prop::collection::vec(0.05..1.0f64, n)).prop_map(move |(x, w)| {
            let total: f64 = w.iter().sum();
            ParticleCloud::new(dim, x.iter().map(|&v| wrap(v)).collect(), w.iter().map(|v| v / total).collect()).unwrap().into()
        })
    })
}

fn trig(coeffs: &[(i64, f64, f64)]) -> SmoothFunction<f64> {
    let mut t = FourierTable::zeros(1, 3).unwrap();
    for &(k, c, s) in coeffs {
        t = t.combine(1.0, &FourierTable::cosine(1, &[k], c).unwrap().with_cutoff(3), 1.0).unwrap();
        t = t.combine(1.0, &FourierTable::sine(1, &[k], s).unwrap().with_cutoff(3), 1.0).unwrap();
    }
    SmoothFunction::polynomial(t)
}

/// Kuramoto-type family with a law-dependent drift so that every generator
/// term is exercised.
fn coupled() -> MomentFamily<f64> {
    let mut f = MomentFamily::kuramoto(0.7, 0.8).unwrap();
    f.drift_moments = vec![0.3, -0.2];
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_is_linear(mu in cloud(1), x in 0.0..TAU, a in -2.0..2.0f64, b in -2.0..2.0f64, ctl in -1.5..1.5f64,
                           g1 in prop::collection::vec((1i64..=3, -1.0..1.0f64, -1.0..1.0f64), 1..3),
                           g2 in prop::collection::vec((1i64..=3, -1.0..1.0f64, -1.0..1.0f64), 1..3)) {
        let family = coupled();
        let (p, q) = (trig(&g1), trig(&g2));
        let alpha = Control::Constant(vec![ctl]);
        let atoms = mu.atoms();
        for conv in [DiffusionConvention::Bare, DiffusionConvention::Half] {
            let lhs = generator_apply(&p.combine(a, &q, b).unwrap(), &atoms, &alpha, &family, &[x], conv).unwrap();
            let rhs = a * generator_apply(&p, &atoms, &alpha, &family, &[x], conv).unwrap()
                + b * generator_apply(&q, &atoms, &alpha, &family, &[x], conv).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10);
        }
    }

    #[test]
    fn enlarging_the_dictionary_never_raises_h(mu in cloud(1), g in prop::collection::vec((1i64..=3, -1.0..1.0f64, -1.0..1.0f64), 1..3),
                                               extra in prop::collection::vec(-3.0..3.0f64, 1..4)) {
        let family = coupled();
        let small = ControlDictionary::constant_grid(-1.0, 1.0, 3);
        let large = small.union(&ControlDictionary::constants(&extra));
        let gamma = trig(&g);
        let hs = hamiltonian(&mu, &gamma, &small, &family, DiffusionConvention::Bare).unwrap().value;
        let hl = hamiltonian(&mu, &gamma, &large, &family, DiffusionConvention::Bare).unwrap().value;
        prop_assert!(hl <= hs);
    }

    #[test]
    fn hamiltonian_difference_is_bounded_by_the_split((mu, nu) in (cloud(1), cloud(1)), eps in 0.05..2.0f64) {
        let gadget = TestFunctionGadget::new(mu, nu, 0.3, 0.1, eps, 16).unwrap();
        let dict = ControlDictionary::constant_grid(-2.0, 2.0, 5);
        let split = hamiltonian_split(&gadget, &dict, &coupled(), DiffusionConvention::Bare).unwrap();
        prop_assert!(split.bound_holds(), "{split:?}");
    }

    #[test]
    fn derivative_norm_equals_distance_in_two_dimensions((mu, nu) in (cloud(2), cloud(2))) {
        let weight = SobolevWeight::star(2).unwrap();
        let cutoff = 12;
        let r = rho_lambda(&mu, &nu, weight, cutoff).unwrap();
        let g = linear_derivative_rho_sq(&mu, &nu, weight, cutoff).unwrap();
        let norm = sobolev_norm(&g.table, weight, cutoff, Some(DecayCertificate::TrigPolynomial)).unwrap().value;
        prop_assert!((norm - r.value).abs() <= 2.0 * r.truncation_error);
    }
}

#[test]
fn second_order_term_follows_the_convention() {
    // γ = e_1 + e_{-1} = 2(2π)^{-1/2} cos x, so γ''(0) = −2(2π)^{-1/2}.
    let family = MomentFamily { sigma: vec![1.0], ..MomentFamily::zero(1) };
    let mut t = FourierTable::zeros(1, 1).unwrap();
    t.coeffs_mut()[0].re = 1.0;
    t.coeffs_mut()[2].re = 1.0;
    let gamma = SmoothFunction::polynomial(t);
    let mu = TorusMeasure::dirac(&[0.0]).unwrap();
    let alpha = Control::Constant(vec![0.0]);
    let expected = -2.0 / TAU.sqrt();
    let bare = generator_apply(&gamma, &mu.atoms(), &alpha, &family, &[0.0], DiffusionConvention::Bare).unwrap();
    let half = generator_apply(&gamma, &mu.atoms(), &alpha, &family, &[0.0], DiffusionConvention::Half).unwrap();
    assert!((bare - expected).abs() < 1e-14);
    assert!((half - expected / 2.0).abs() < 1e-14);
}

#[test]
fn hamiltonian_ties_go_to_the_lowest_index() {
    let family = MomentFamily::frozen(1, 1.0);
    let dict = ControlDictionary::constants(&[1.0, -1.0, 0.0]);
    let mu = TorusMeasure::dirac(&[0.5]).unwrap();
    let h = hamiltonian(&mu, &trig(&[(1, 1.0, 0.0)]), &dict, &family, DiffusionConvention::Bare).unwrap();
    assert_eq!((h.value, h.argmin), (1.0, 0));
}
