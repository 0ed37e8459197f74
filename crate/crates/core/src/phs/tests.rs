use std::collections::BTreeMap;

use super::*;
use crate::model::builtins::reddy_plate_with_alpha;
use crate::model::{builtin_model, builtin_names, default_params, physical_params};
use crate::rational::{int, rat};

fn params(pairs: &[(&str, Rational)]) -> BTreeMap<String, Rational> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn system(name: &str, p: &BTreeMap<String, Rational>) -> PHSystem {
    assemble_phs(&builtin_model(name, p).unwrap()).unwrap()
}

fn diag(d: &[Rational]) -> RatMatrix {
    RatMatrix::diag(d)
}

/// `h^{i+1} / (2^i (i+1))` for even `i`, zero otherwise.
fn thickness_moment(h: &Rational, i: u32) -> Rational {
    if i % 2 == 1 {
        return Rational::zero();
    }
    let mut hp = Rational::one();
    for _ in 0..=i {
        hp *= h;
    }
    hp / (int(1 << i) * int(i as i64 + 1))
}

#[test]
fn thickness_moments_match_closed_form() {
    for h in [rat(1, 1), rat(3, 7), rat(5, 2)] {
        let s = Section::Interval { h: h.clone() };
        for i in 0..9 {
            let got = section_moment(&s, i).unwrap();
            assert_eq!(got.pi_pow, 0);
            assert_eq!(got.coef, thickness_moment(&h, i), "h={h} i={i}");
        }
    }
    let unit = Section::Interval { h: int(1) };
    assert_eq!(section_moment(&unit, 2).unwrap().coef, rat(1, 12));
}

#[test]
fn section_moment_of_none_is_unit_for_order_zero() {
    assert_eq!(section_moment(&Section::None, 0).unwrap().coef, int(1));
    assert!(section_moment(&Section::None, 2).is_err());
}

fn timoshenko_params() -> BTreeMap<String, Rational> {
    params(&[
        ("E", int(2)),
        ("G", int(3)),
        ("kappa", rat(5, 6)),
        ("rho", int(7)),
        ("b", int(2)),
        ("h", int(3)),
    ])
}

#[test]
fn timoshenko_mass_and_stiffness() {
    let s = system("timoshenko", &timoshenko_params());
    let (a, i) = (int(6), int(2 * 27) / int(12));
    assert_eq!(s.mass.pi_pow, 0);
    assert_eq!(s.mass.q, diag(&[int(7) * &i, int(7) * &a]));
    assert_eq!(s.stiffness.q, diag(&[int(2) * &i, rat(5, 6) * int(3) * &a]));
    assert_eq!(s.mass_inverse.q, s.mass.q.inverse().unwrap());
}

#[test]
fn timoshenko_operator_block() {
    let s = system("timoshenko", &timoshenko_params());
    let expected = [
        ["0", "0", "d1", "1"],
        ["0", "0", "0", "d1"],
        ["d1", "0", "0", "0"],
        ["-1", "d1", "0", "0"],
    ];
    for (r, row) in expected.iter().enumerate() {
        for (c, e) in row.iter().enumerate() {
            assert_eq!(s.j.entry_text(r, c), *e, "J({r},{c})");
        }
    }
}

#[test]
fn operator_block_is_formally_skew() {
    for name in builtin_names() {
        let s = system(name, &default_params(name).unwrap());
        let jt = s.j.formal_adjoint();
        assert_eq!(jt.p0(), &s.j.p0().scale(&-Rational::one()), "{name}");
        for (k, c) in s.j.terms() {
            assert_eq!(
                jt.coefficient(k.0, k.1).unwrap(),
                &c.scale(&-Rational::one()),
                "{name} {k:?}"
            );
        }
    }
}

#[test]
fn truss_stiffness_and_ports() {
    let p = params(&[("E", int(5)), ("rho", int(2)), ("b", int(3)), ("h", rat(1, 2))]);
    let s = system("truss", &p);
    assert_eq!(s.stiffness.q, diag(&[rat(15, 2)]));
    assert_eq!(s.mass.q, diag(&[int(3)]));
    let a = boundary_port_map(&s, &[int(-1)]).unwrap();
    assert_eq!(a.input, RatMatrix::from_i64(&[&[-1]]));
    assert_eq!(a.output, RatMatrix::identity(1));
    let b = boundary_port_map(&s, &[int(1)]).unwrap();
    assert_eq!(b.input, RatMatrix::from_i64(&[&[1]]));
}

#[test]
fn rayleigh_stiffness_is_quarter_bending() {
    let p = params(&[("E", int(3)), ("rho", int(1)), ("b", int(2)), ("h", int(2))]);
    let s = system("rayleigh_beam", &p);
    let i = rat(2 * 8, 12);
    assert_eq!(s.stiffness.q, diag(&[int(3) * &i / int(4)]));
    assert_eq!(s.mass.q, diag(&[i, int(4)]));
    assert_eq!(s.boundary.order(), 2);
    assert_eq!(s.boundary.shape(), (4, 2));
}

#[test]
fn torsion_mass_carries_pi() {
    let p = params(&[("G", int(2)), ("R", int(2)), ("rho", int(3))]);
    let s = system("torsion", &p);
    // I_p = π R⁴ / 2
    assert_eq!(s.mass.pi_pow, 1);
    assert_eq!(s.mass.q, diag(&[int(3) * int(8)]));
    assert_eq!(s.mass_inverse.pi_pow, -1);
    assert_eq!(s.stiffness.q, diag(&[int(2) * int(8)]));
    let h = s.hamiltonian_density(&[1.0], &[0.0]);
    assert!((h - 0.5 / (24.0 * std::f64::consts::PI)).abs() < 1e-15);
}

fn reddy_oracle(h: &Rational, rho: &Rational, alpha: &Rational, c: &RatMatrix) -> (RatMatrix, RatMatrix) {
    let ib = |i| thickness_moment(h, i);
    let a = alpha;
    let bend = &ib(2) - int(2) * a * ib(4) + a * a * ib(6);
    let cross = a * (ib(4) - a * ib(6));
    let top = a * a * ib(6);
    let shear = ib(0) - int(6) * a * ib(2) + int(9) * a * a * ib(4);

    let mut m = RatMatrix::zeros(5, 5);
    for k in 0..2 {
        m.set(k, k, rho * &bend);
        m.set(k, 3 + k, rho * &cross);
        m.set(3 + k, k, rho * &cross);
        m.set(3 + k, 3 + k, rho * &top);
    }
    m.set(2, 2, rho * ib(0));

    let cb = c.block(0, 0, 3, 3);
    let cs = c.block(3, 3, 2, 2);
    let mut k = RatMatrix::zeros(8, 8);
    k.set_block(0, 0, &cb.scale(&bend));
    k.set_block(0, 5, &cb.scale(&cross));
    k.set_block(5, 0, &cb.scale(&cross));
    k.set_block(5, 5, &cb.scale(&top));
    k.set_block(3, 3, &cs.scale(&shear));
    (m, k)
}

#[test]
fn reddy_plate_matches_block_formulas() {
    for (h, nu) in [(int(1), int(0)), (rat(1, 5), rat(3, 10)), (rat(7, 3), rat(1, 4))] {
        let p = params(&[
            ("E", int(1)),
            ("nu", nu),
            ("G", int(1)),
            ("rho", int(1)),
            ("h", h.clone()),
        ]);
        let model = builtin_model("reddy_plate", &p).unwrap();
        let alpha = int(4) / (int(3) * &h * &h);
        let s = assemble_phs(&model).unwrap();
        let (m, k) = reddy_oracle(&h, &int(1), &alpha, &model.c);
        assert_eq!(s.mass.q, m, "h={h}");
        assert_eq!(s.stiffness.q, k, "h={h}");
    }
}

#[test]
fn reddy_plate_constitutive_layout() {
    let p = params(&[("E", int(1)), ("nu", int(0)), ("G", int(1)), ("rho", int(1)), ("h", int(1))]);
    let model = builtin_model("reddy_plate", &p).unwrap();
    assert_eq!(model.c, diag(&[int(1), int(1), rat(1, 2), int(1), int(1)]));
}

#[test]
fn reddy_mass_corner_entry() {
    let p = params(&[("E", int(1)), ("nu", int(0)), ("G", int(1)), ("rho", int(1)), ("h", int(1))]);
    let s = system("reddy_plate", &p);
    let expected = rat(1, 12) - rat(8, 3) * rat(1, 80) + rat(16, 9) * rat(1, 448);
    assert_eq!(expected, rat(17, 315));
    assert_eq!(s.mass.q.get(0, 0), &expected);
}

#[test]
fn reddy_plate_at_zero_alpha_reduces_to_mindlin() {
    let p = default_params("reddy_plate").unwrap();
    let reddy = reddy_plate_with_alpha(&p, Rational::zero()).unwrap();
    let mut mp = default_params("mindlin_plate").unwrap();
    mp.retain(|k, _| p.contains_key(k));
    let mindlin = system("mindlin_plate", &mp);
    let m = mass_matrix_unchecked(&reddy).unwrap().q;
    let k = stiffness_matrix_unchecked(&reddy).unwrap().q;
    assert_eq!(m.block(0, 0, 3, 3), mindlin.mass.q);
    assert_eq!(k.block(0, 0, 5, 5), mindlin.stiffness.q);
    assert!(m.block(3, 0, 2, 5).is_zero() && m.block(0, 3, 5, 2).is_zero());
    assert!(k.block(5, 0, 3, 8).is_zero() && k.block(0, 5, 8, 3).is_zero());
    assert!(matches!(
        stiffness_matrix(&reddy),
        Err(PhsError::NotPositive { which: "stiffness", .. })
    ));
}

#[test]
fn mindlin_edge_boundary_rows() {
    let s = system("mindlin_plate", &default_params("mindlin_plate").unwrap());
    let p1 = boundary_port_map(&s, &[int(1), int(0)]).unwrap().input;
    let p2 = boundary_port_map(&s, &[int(0), int(1)]).unwrap().input;
    assert_eq!(
        p1,
        RatMatrix::from_i64(&[&[1, 0, 0, 0, 0], &[0, 0, 1, 0, 0], &[0, 0, 0, 1, 0]])
    );
    assert_eq!(
        p2,
        RatMatrix::from_i64(&[&[0, 0, 1, 0, 0], &[0, 1, 0, 0, 0], &[0, 0, 0, 0, 1]])
    );
    let doc = ExportDocument::new(&s);
    assert_eq!(doc.boundary.p_boundary[0], ["1/1*n1", "0/1", "1/1*n2", "0/1", "0/1"]);
}

#[test]
fn port_map_rejects_oblique_normals() {
    let s = system("mindlin_plate", &default_params("mindlin_plate").unwrap());
    assert!(matches!(
        boundary_port_map(&s, &[rat(3, 5), rat(4, 5)]),
        Err(PhsError::Normal(_))
    ));
    assert!(boundary_port_map(&s, &[int(1)]).is_err());
}

#[test]
fn second_order_ports_use_full_boundary_matrix() {
    let s = system("euler_bernoulli", &default_params("euler_bernoulli").unwrap());
    let b = boundary_port_map(&s, &[int(1)]).unwrap();
    assert_eq!(b.input, s.boundary.assemble(&[int(1)]));
    assert_eq!(b.input_labels, ["e_eps1", "d1 e_eps1"]);
    assert_eq!(b.output_labels, ["e_p1", "d1 e_p1"]);
}

#[test]
fn truss_lagrangian_is_wave_operator() {
    let p = params(&[("E", int(5)), ("rho", int(2)), ("b", int(3)), ("h", rat(1, 2))]);
    let s = system("truss", &p);
    let l = lagrangian_form(&s);
    let c = s.coords().clone();
    let z1 = Poly::var(&c, 0);
    let r = vec![z1.pow(3)];
    let er = l.e_r(&r).unwrap();
    let ea = rat(15, 2);
    assert_eq!(er.polys, vec![z1.scale(&(-ea * int(6)))]);
    let zero = l.e_r(&[Poly::zero(&c)]).unwrap();
    assert!(zero.polys[0].is_zero());
    assert_eq!(l.j0, RatMatrix::from_i64(&[&[0, -1], &[1, 0]]));
}

#[test]
fn timoshenko_lagrangian_by_hand() {
    let s = system("timoshenko", &timoshenko_params());
    let l = lagrangian_form(&s);
    let c = s.coords().clone();
    let z1 = Poly::var(&c, 0);
    let er = l.e_r(&[z1.pow(2), z1.pow(3)]).unwrap();
    // F r = (2 z1, 2 z1²); K = diag(EI, κGA) with EI = 9, κGA = 15.
    let ei = int(9);
    let kga = int(15);
    let e1 = Poly::constant(&c, -int(2) * &ei) + z1.pow(2).scale(&(-int(2) * &kga));
    let e2 = z1.scale(&(-int(4) * &kga));
    assert_eq!(er.polys, vec![e1, e2]);
}

#[test]
fn exact_hamiltonian_of_polynomial_fields() {
    let p = params(&[("E", int(5)), ("rho", int(2)), ("b", int(3)), ("h", rat(1, 2)), ("L", int(2))]);
    let s = system("truss", &p);
    let c = s.coords().clone();
    let z1 = Poly::var(&c, 0);
    let h = s.hamiltonian(std::slice::from_ref(&z1), &[Poly::one(&c)]).unwrap();
    // ½ ∫₀² z²/(ρA) + ½ ∫₀² EA
    assert_eq!(h.kinetic.coef, rat(1, 2) * rat(8, 3) / int(3));
    assert_eq!(h.potential.coef, rat(1, 2) * rat(15, 2) * int(2));
}

#[test]
fn symmetric_for_all_builtins_and_positive_for_physical_params() {
    for name in builtin_names() {
        for p in [default_params(name).unwrap(), physical_params(name).unwrap()] {
            let s = system(name, &p);
            assert!(s.mass.q.is_symmetric() && s.stiffness.q.is_symmetric(), "{name}");
            assert!(s.mass.q.positive_definite().is_ok(), "{name}");
            assert!(s.stiffness.q.positive_definite().is_ok(), "{name}");
        }
    }
}

#[test]
fn indefinite_stiffness_reports_minor() {
    let mut m = builtin_model("timoshenko", &default_params("timoshenko").unwrap()).unwrap();
    m.c = RatMatrix::from_i64(&[&[1, 0], &[0, -1]]);
    let err = stiffness_matrix(&m).unwrap_err();
    match err {
        PhsError::NotPositive { which, witness } => {
            assert_eq!(which, "stiffness");
            assert!(witness.contains("order 2"), "{witness}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn export_json_uses_fractions() {
    let s = system("timoshenko", &timoshenko_params());
    let v: serde_json::Value = serde_json::from_str(&export_json(&s)).unwrap();
    assert_eq!(v["dims"]["n"], 2);
    assert_eq!(v["dims"]["N"], 1);
    assert_eq!(v["mass"]["entries"][0][0], "63/2");
    assert_eq!(v["j"]["entries"][3][0], "-1");
    assert_eq!(v["boundary"]["q"][0][0], "1/1*n1");
    assert_eq!(v["f"]["coefficients"][0]["axis"], 1);
}

#[test]
fn export_csv_writes_float_matrices() {
    let s = system("rayleigh_beam", &default_params("rayleigh_beam").unwrap());
    let dir = std::env::temp_dir().join(format!("phs-export-{}", std::process::id()));
    let files = export_csv(&s, &dir).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|f| f.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert!(names.contains(&"K.csv".to_string()));
    assert!(names.contains(&"F_P1_2.csv".to_string()));
    assert!(names.contains(&"Q_n1.csv".to_string()));
    let k = std::fs::read_to_string(dir.join("K.csv")).unwrap();
    assert_eq!(k.trim(), format!("{:.15e}", 1.0 / 48.0));
    std::fs::remove_dir_all(&dir).unwrap();
}
