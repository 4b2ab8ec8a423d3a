use isospec::cocycle::{CocycleSpec, Potential};
use isospec::diophantine::Frequency;
use isospec::kam::{
    reduce, reduce_elliptic, schrodinger_embedding, trace_residual, Branch, KamOptions, NormalForm, StepKind,
    StepOptions,
};
use isospec::verify::endpoint_energy;
use num_complex::Complex64;

fn sarnak_spec(energy: Complex64, lambda: f64) -> CocycleSpec {
    CocycleSpec::new(Frequency::golden(), energy, Potential::sarnak(lambda, 1.0), 0.0).unwrap()
}

#[test]
fn endpoint_has_one_resonance_and_parabolic_tail() {
    let freq = Frequency::golden();
    let spec = sarnak_spec(endpoint_energy(&freq), 1e-6);
    let emb = schrodinger_embedding(&spec, 1.0).unwrap();
    let trace = reduce_elliptic(&emb.problem, &KamOptions::default()).unwrap();
    assert_eq!(trace.resonances(), 1);
    let first = &trace.steps[0];
    assert_eq!(first.kind, StepKind::Resonant);
    assert_eq!(first.k_star.as_deref(), Some(&[1i64][..]));
    assert_eq!(first.branch, Some(Branch::Plus));
    assert!(matches!(trace.normal_form, NormalForm::Parabolic { .. }));
    // |zeta| comes out as lambda / 2.
    assert!((trace.terminal.constant.zeta.norm() - 5e-7).abs() < 1e-12);
    assert!(trace_residual(&trace, &emb.problem, &StepOptions::default()) < 1e-12);
}

#[test]
fn zero_perturbation_gives_empty_trace() {
    let spec = CocycleSpec::new(Frequency::golden(), Complex64::new(1.0, 0.0), Potential::sarnak(0.0, 1.0), 0.0)
        .unwrap();
    let emb = schrodinger_embedding(&spec, 1.0).unwrap();
    let trace = reduce(&emb.problem, &KamOptions::default()).unwrap();
    assert!(trace.steps.is_empty());
    match trace.normal_form {
        // E = 1 = 2 cos(pi / 3).
        NormalForm::Elliptic { rho_turns } => assert!((rho_turns - 1.0 / 6.0).abs() < 1e-12),
        other => panic!("unexpected normal form {other:?}"),
    }
}

#[test]
fn hyperbolic_energy_keeps_imaginary_part() {
    let spec = sarnak_spec(Complex64::new(1.0, 0.5), 1e-3);
    let emb = schrodinger_embedding(&spec, 1.0).unwrap();
    let im_before = emb.problem.constant.xi.im;
    let trace = reduce(&emb.problem, &KamOptions::default()).unwrap();
    assert!(matches!(trace.normal_form, NormalForm::Hyperbolic { .. }));
    assert_eq!(trace.steps.last().unwrap().kind, StepKind::HyperbolicFinish);
    assert!(trace.im_xi_drift < 1e-10);
    assert!((trace.terminal.constant.xi.im - im_before).abs() < 1e-10);
    assert!(trace_residual(&trace, &emb.problem, &StepOptions::default()) < 1e-12);
}

#[test]
fn trace_serializes_one_line_per_step() {
    let spec = sarnak_spec(Complex64::new(1.0, 0.5), 1e-3);
    let emb = schrodinger_embedding(&spec, 1.0).unwrap();
    let trace = reduce(&emb.problem, &KamOptions::default()).unwrap();
    let text = trace.to_json_lines().unwrap();
    assert_eq!(text.lines().count(), trace.steps.len());
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("kind").is_some());
    }
}

#[test]
fn every_step_satisfies_the_step_invariants() {
    let freq = Frequency::golden();
    for energy in [endpoint_energy(&freq), Complex64::new(0.3, 0.0), Complex64::new(1.0, 0.5)] {
        let spec = sarnak_spec(energy, 1e-4);
        let emb = schrodinger_embedding(&spec, 1.0).unwrap();
        let trace = reduce(&emb.problem, &KamOptions::default()).unwrap();
        for s in &trace.steps {
            let d = &s.diagnostics;
            assert!(d.residual < 1e-9, "{energy}: step {} residual {}", s.n, d.residual);
            assert!(d.zero_mode < 1e-12 && d.off_cone_max < 1e-12, "{energy}: step {}", s.n);
            assert!(s.rho_update_error.unwrap_or(0.0) < 1e-12, "{energy}: step {}", s.n);
        }
    }
}
