use proptest::prelude::*;

use super::*;

fn builtin(name: &str) -> KinematicModel {
    builtin_model(name, &default_params(name).unwrap()).unwrap()
}

#[test]
fn zero_fields_pass_trivially() {
    for name in builtin_names() {
        let m = builtin(name);
        let v = vec![Poly::zero(&m.coords); m.m()];
        let w = vec![Poly::zero(&m.coords); m.n()];
        assert!(ibp_residual(&m.f, &v, &w, &m.domain).unwrap().is_zero());
    }
}

#[test]
fn full_suite_passes_and_is_complete() {
    let r = run_suite(&VerifyConfig {
        seed: 7,
        ..VerifyConfig::default()
    })
    .unwrap();
    let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed()).collect();
    assert!(failed.is_empty(), "{failed:#?}");
    let count = |kind: &str| r.checks.iter().filter(|c| c.kind == kind).count();
    assert_eq!(count("lemma1"), 12 * DEFAULT_TRIALS);
    assert_eq!(count("energy"), 12);
    assert_eq!(count("spd"), 12);
    assert_eq!(count("limit"), 3);
    assert!(count("mutation") >= 6);
    let ids: Vec<&str> = r.checks.iter().map(|c| c.id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn report_is_byte_stable() {
    let cfg = VerifyConfig {
        models: vec!["timoshenko".into(), "torsion".into()],
        seed: 11,
        trials: 5,
    };
    let a = run_suite(&cfg).unwrap().to_json();
    let b = run_suite(&cfg).unwrap().to_json();
    assert_eq!(a, b);
    assert!(!a.contains("elapsed"));
}

#[test]
fn subset_includes_related_reductions() {
    let r = run_suite(&VerifyConfig {
        models: vec!["torsion".into()],
        seed: 1,
        trials: 2,
    })
    .unwrap();
    assert!(r.get("limits/torsion-two-strain").is_some());
    assert!(r.get("limits/reddy-mindlin").is_none());
    assert!(r.get("spd/torsion").unwrap().passed());
    assert!(r.get("mutation/boundary-sign").is_none());
}

#[test]
fn unknown_model_is_reported() {
    let err = run_suite(&VerifyConfig {
        models: vec!["plate9".into()],
        ..VerifyConfig::default()
    })
    .unwrap_err();
    assert_eq!(err.to_string(), "unknown builtin model `plate9`");
}

#[test]
fn every_mutation_is_detected() {
    for m in mutation_catalogue() {
        let r = check_mutation(&m, DEFAULT_TRIALS, 3);
        assert_eq!(r.status, Status::Pass, "{} survived: {:?}", m.name, r.witness);
        assert!(r.detail.unwrap().starts_with("detected at trial"));
    }
}

#[test]
fn lemma1_witness_on_corrupted_boundary() {
    let m = builtin("timoshenko");
    let mut rng = field_rng(0, "x", 0);
    let v = random_fields(&m, 2, 3, &mut rng);
    let w = random_fields(&m, 2, 3, &mut rng);
    let bs = mutation_catalogue().into_iter().find(|x| x.name == "boundary-sign").unwrap();
    let res = bs.residual(&m, &v, &w).unwrap();
    let good = ibp_residual(&m.f, &v, &w, &m.domain).unwrap();
    assert!(good.is_zero());
    assert!(!res.is_zero());
}

#[test]
fn energy_passes_for_timoshenko_and_reddy() {
    for name in ["timoshenko", "reddy_plate"] {
        let s = assemble_phs(&builtin(name)).unwrap();
        let r = check_energy_structure(&s, 5, 2);
        assert_eq!(r.status, Status::Pass, "{:?}", r.witness);
    }
}

#[test]
fn energy_detects_asymmetric_stiffness() {
    let mut s = assemble_phs(&builtin("timoshenko")).unwrap();
    let k = s.stiffness.q.clone();
    s.stiffness.q = k.add(&RatMatrix::from_i64(&[&[0, 1], &[-1, 0]]));
    let r = check_energy_structure(&s, 5, 2);
    assert_eq!(r.status, Status::Fail);
    assert!(r.witness.unwrap().contains("dH/dt minus boundary power"));
}

#[test]
fn reductions_hold() {
    for r in check_limits_and_reductions() {
        assert_eq!(r.status, Status::Pass, "{}: {:?}", r.id, r.witness);
    }
}

#[test]
fn deleting_rows_and_columns() {
    let s = assemble_phs(&builtin("rayleigh_beam")).unwrap();
    let j = delete_rows_cols(&s.j, &[0], &[0]);
    assert_eq!((j.m(), j.n()), (2, 2));
    assert_eq!(j.entry_text(1, 0), "d1^2");
}

#[test]
fn file_model_suite_skips_builtin_only_checks() {
    let m = builtin("string");
    let r = run_model_suite(&m, 0, 3);
    assert!(r.passed());
    assert_eq!(r.summary.skipped, 2);
    assert_eq!(r.get("limits/*").unwrap().status, Status::Skipped);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn identity_holds_for_any_seed(seed in any::<u64>(), idx in 0usize..12) {
        let name = builtin_names()[idx];
        let m = builtin(name);
        let r = check_lemma1(&[&m], 1, None, seed);
        prop_assert_eq!(r[0].status, Status::Pass);
    }
}
