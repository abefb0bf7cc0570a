use std::f64::consts::{PI, TAU};

use mvtorus::stats::log_log_slope;
use mvtorus::torus::{
    fourier_coefficient, fourier_table, lift_mean, parse_measure, reduce_to_torus, sample_measure, write_measure, GridDensity, ParticleCloud,
    TorusMeasure,
};
use proptest::prelude::*;

fn cloud(dim: usize) -> impl Strategy<Value = ParticleCloud<f64>> {
    (1usize..6).prop_flat_map(move |n| {
        (prop::collection::vec(-20.0..20.0f64, n * dim), prop::collection::vec(0.05..1.0f64, n)).prop_map(move |(x, w)| {
            let total: f64 = w.iter().sum();
            ParticleCloud::new(dim, x.iter().map(|&v| mvtorus::torus::wrap(v)).collect(), w.iter().map(|v| v / total).collect())
                .unwrap()
        })
    })
}

proptest! {
    #[test]
    fn fourier_tables_are_conjugate_symmetric_and_bounded(c in (1usize..=3).prop_flat_map(cloud)) {
        let dim = c.dim();
        let t = fourier_table(&TorusMeasure::from(c), 4).unwrap();
        let bound = TAU.powf(-(dim as f64) / 2.0) + 1e-12;
        for i in 0..t.len() {
            let (a, b) = (t.coeffs()[i], t.coeffs()[t.mirror(i)]);
            prop_assert_eq!(a, b.conj());
            prop_assert!(a.norm() <= bound);
        }
    }

    #[test]
    fn reduce_to_torus_is_idempotent(x in prop::collection::vec(-1e4..1e4f64, 1..=3)) {
        let once = reduce_to_torus(&x).unwrap();
        let twice = reduce_to_torus(once.coords()).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.coords().iter().all(|&v| (0.0..TAU).contains(&v)));
    }

    #[test]
    fn lifted_mean_ignores_atom_order(c in cloud(1), rot in 0usize..6) {
        let n = c.len();
        let k = rot % n;
        let coords: Vec<f64> = (0..n).map(|i| c.coords()[(i + k) % n]).collect();
        let weights: Vec<f64> = (0..n).map(|i| c.weights()[(i + k) % n]).collect();
        let d = ParticleCloud::new(1, coords, weights).unwrap();
        let (a, b) = (lift_mean(&c.atoms()).unwrap(), lift_mean(&d.atoms()).unwrap());
        prop_assert!((a.mean - b.mean).abs() < 1e-12 && a.ambiguous == b.ambiguous);
    }

    #[test]
    fn text_format_round_trips(c in cloud(2)) {
        let mu = TorusMeasure::from(c);
        let back: TorusMeasure<f64> = parse_measure(&write_measure(&mu)).unwrap();
        prop_assert_eq!(back, mu);
    }
}

#[test]
fn table_entries_match_direct_coefficients() {
    let mu: TorusMeasure<f64> = ParticleCloud::new(2, vec![0.3, 1.1, 4.0, 5.5], vec![0.25, 0.75]).unwrap().into();
    let t = fourier_table(&mu, 3).unwrap();
    for i in 0..t.len() {
        let k = t.wavevector(i);
        assert!((t.coeffs()[i] - fourier_coefficient(&mu, &k).unwrap()).norm() < 1e-14);
    }
}

#[test]
fn zeroth_coefficient_follows_the_basis_normalization() {
    let mu: TorusMeasure<f64> = GridDensity::uniform(vec![8, 8]).unwrap().into();
    let f0 = fourier_coefficient(&mu, &[0, 0]).unwrap();
    assert!((f0.re - 1.0 / TAU).abs() < 1e-14 && f0.im.abs() < 1e-14);
}

#[test]
fn sampling_is_reproducible() {
    let mu: TorusMeasure<f64> = GridDensity::from_fn(vec![16], |x: &[f64]| 1.0 + 0.5 * x[0].cos()).unwrap().into();
    let a = write_measure(&sample_measure(&mu, 500, 7).unwrap().into());
    let b = write_measure(&sample_measure(&mu, 500, 7).unwrap().into());
    let c = write_measure(&sample_measure(&mu, 500, 8).unwrap().into());
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn sample_means_obey_the_central_limit_scale() {
    // Density (1 + cos x)/(2π) has E[cos X] = 1/2 and Var[cos X] = 1/4.
    let mu: TorusMeasure<f64> = GridDensity::from_fn(vec![4096], |x: &[f64]| 1.0 + x[0].cos()).unwrap().into();
    let n = 20_000;
    let zs: Vec<f64> = (0..20)
        .map(|seed| {
            let s = sample_measure(&mu, n, seed).unwrap();
            let m = s.coords().iter().map(|x| x.cos()).sum::<f64>() / n as f64;
            (m - 0.5) / (0.5 / (n as f64).sqrt())
        })
        .collect();
    let rms = (zs.iter().map(|z| z * z).sum::<f64>() / zs.len() as f64).sqrt();
    assert!(zs.iter().all(|z| z.abs() < 4.5), "{zs:?}");
    assert!((0.5..1.6).contains(&rms), "rms z = {rms}");
}

#[test]
fn grid_quadrature_converges_at_second_order() {
    // p(x) ∝ x(2π − x) is continuous with a derivative jump at 0; its first
    // coefficient is −(2π)^{-1/2}·3/π².
    let exact = -3.0 / (PI * PI) / TAU.sqrt();
    let sizes = [16usize, 32, 64, 128, 256];
    let errors: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let g: TorusMeasure<f64> = GridDensity::from_fn(vec![n], |x: &[f64]| x[0] * (TAU - x[0])).unwrap().into();
            let f = fourier_coefficient(&g, &[1]).unwrap();
            (f.re - exact).hypot(f.im)
        })
        .collect();
    let hs: Vec<f64> = sizes.iter().map(|&n| TAU / n as f64).collect();
    let slope = log_log_slope(&hs, &errors).unwrap();
    assert!(slope >= 1.8, "slope {slope}, errors {errors:?}");
}
