use isospec::algebra::{
    mat_exp_traceless, mat_log_near_identity, ConeSpec, Mat2, MatrixSeries, MultiIndex, WeightScheme,
};
use isospec::cocycle::{free_laplacian_le, transfer_matrix, CocycleSpec, Potential};
use isospec::diophantine::{estimate_gamma, small_denominator, Frequency};
use isospec::kam::{apply_homological_operator, classify_resonance, homological_solve, ConstantPart};
use isospec::spectral::sarnak_le_reference;
use num_complex::Complex64;
use proptest::prelude::*;

fn complex(bound: f64) -> impl Strategy<Value = Complex64> {
    (-bound..bound, -bound..bound).prop_map(|(a, b)| Complex64::new(a, b))
}

fn traceless(bound: f64) -> impl Strategy<Value = Mat2> {
    (complex(bound), complex(bound), complex(bound)).prop_map(|(h, e, f)| Mat2::traceless(h, e, f))
}

fn scheme2() -> impl Strategy<Value = WeightScheme> {
    (0.5..2.0f64, 0.5..2.0f64, 0.5..2.0f64).prop_map(|(eta, w0, w1)| WeightScheme::new(eta, vec![w0, w1]).unwrap())
}

fn index2(bound: i64) -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec(-bound..=bound, 2).prop_map(MultiIndex)
}

fn series(scheme: WeightScheme, width: f64) -> impl Strategy<Value = MatrixSeries> {
    prop::collection::vec((index2(4), traceless(1.0)), 1..6).prop_map(move |modes| {
        let mut f = MatrixSeries::new(scheme.clone(), width);
        for (k, m) in modes {
            f.set_mode(k, Some(m));
        }
        f
    })
}

fn unit_scheme() -> WeightScheme {
    WeightScheme::new(1.0, vec![1.0, 1.0]).unwrap()
}

proptest! {
    #[test]
    fn cone_is_closed_under_addition(
        scheme in scheme2(),
        fraction in 0.05..1.0f64,
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
    ) {
        // Largest admissible aperture for this scheme, read back from the constructor.
        let probe = ConeSpec::new(0.01, scheme.clone()).unwrap();
        let widest = (1..=100).map(|s| s as f64 / 100.0).take_while(|r| ConeSpec::new(*r, scheme.clone()).is_ok()).last();
        let cone = ConeSpec::new(widest.unwrap_or(0.01) * fraction, scheme).unwrap_or(probe);
        let members = cone.members_up_to(8.0);
        prop_assume!(!members.is_empty());
        let (k, n) = (i.get(&members), j.get(&members));
        prop_assert!(cone.contains(&k.add(n)));
    }

    #[test]
    fn weighted_norm_is_submultiplicative(f in series(unit_scheme(), 0.4), g in series(unit_scheme(), 0.4)) {
        let fg = f.multiply(&g, 1e6).unwrap();
        let gf = g.multiply(&f, 1e6).unwrap();
        prop_assert_eq!(fg.dropped_mass, 0.0);
        let bound = f.norm() * g.norm();
        prop_assert!(fg.series.norm() <= bound * (1.0 + 1e-12));
        prop_assert!(fg.series.sub(&gf.series).norm() <= 2.0 * bound * (1.0 + 1e-12));
    }

    #[test]
    fn truncations_reconstruct(f in series(unit_scheme(), 0.3), n in 0.0..8.0f64) {
        let back = f.truncate_low(n).add(&f.truncate_high(n));
        prop_assert_eq!(back.len(), f.len());
        for (k, c) in f.iter() {
            prop_assert_eq!(back.coefficient(k), *c);
        }
    }

    #[test]
    fn exp_log_round_trip(m in traceless(1.0), size in 0.0..0.3f64) {
        let x = m.scale_real(size / m.op_norm().max(1e-300));
        let e = mat_exp_traceless(&x);
        prop_assert!((e.det() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let back = mat_log_near_identity(&e).unwrap();
        prop_assert!((back - x).max_abs() < 1e-12);
    }

    #[test]
    fn small_denominators_are_even(k in index2(50)) {
        let freq = Frequency::golden_silver();
        prop_assert_eq!(small_denominator(&k, &freq), small_denominator(&k.neg(), &freq));
    }

    #[test]
    fn gamma_is_non_increasing(k1 in 1.0..40.0f64, extra in 0.0..40.0f64) {
        let freq = Frequency::golden();
        let s = WeightScheme::scalar();
        let a = estimate_gamma(&freq, 2.0, k1, &s).unwrap();
        let b = estimate_gamma(&freq, 2.0, k1 + extra, &s).unwrap();
        prop_assert!(b <= a);
    }

    #[test]
    fn transfer_matrices_are_unimodular(
        lambda in -3.0..3.0f64,
        e in complex(3.0),
        x in 0.0..std::f64::consts::TAU,
        eps in -0.9..0.9f64,
    ) {
        let spec = CocycleSpec::new(Frequency::golden(), e, Potential::cosine(lambda, 1.0), eps).unwrap();
        prop_assert!((transfer_matrix(&spec, &[x]).det() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sarnak_reference_dominates_free(lambda in 1.0..5.0f64, e in complex(4.0)) {
        let r = sarnak_le_reference(lambda, e).unwrap();
        prop_assert!(r >= free_laplacian_le(e));
    }

    #[test]
    fn homological_residual_vanishes(
        f in series(unit_scheme(), 0.5),
        xi in 0.1..3.0f64,
        zeta in complex(1.0),
        upper in any::<bool>(),
    ) {
        let freq = Frequency::golden_silver();
        let cone = ConeSpec::new(0.05, unit_scheme()).unwrap();
        let f = f.filter(|k, _| cone.contains(k));
        prop_assume!(!f.is_empty());
        let xi = Complex64::new(xi, 0.0);
        let a = if upper { ConstantPart::upper(xi, zeta) } else { ConstantPart::lower(xi, zeta) };
        prop_assume!(classify_resonance(&a, &freq, &cone, 10.0, 1e-2).chosen.is_none());
        let y = homological_solve(&a, &f, &freq, &[]).unwrap();
        let residual = apply_homological_operator(&a, &y, &freq).sub(&f).norm_at(0.5);
        prop_assert!(residual < 1e-12 * f.norm().max(1.0));
    }
}
