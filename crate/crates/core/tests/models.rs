use homaloidal::graphs::{Dag, UGraph};
use homaloidal::models::*;
use homaloidal::pde::{CheckOptions, Convention, Mle};
use homaloidal::poly::{parse, parse_rational, Polynomial, Rat, RationalFunction, VarTable};
use homaloidal::symcalc::{quadric_pair, QMatrix};
use homaloidal::Error;

/// Leibniz expansion of a principal minor of the generic symmetric matrix, as text.
fn minor_text(idx: &[usize]) -> String {
    fn perms(n: usize) -> Vec<(Vec<usize>, i32)> {
        if n == 0 {
            return vec![(vec![], 1)];
        }
        let mut out = Vec::new();
        for (p, sign) in perms(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                let moved = (p.len() - pos) as i32;
                out.push((q, if moved % 2 == 0 { sign } else { -sign }));
            }
        }
        out
    }
    let name = |a: usize, b: usize| {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        format!("s{}{}", a, b)
    };
    let terms: Vec<String> = perms(idx.len())
        .into_iter()
        .map(|(p, sign)| {
            let f: Vec<String> = p.iter().enumerate().map(|(i, &j)| name(idx[i], idx[j])).collect();
            format!("{}{}", if sign < 0 { "-" } else { "+" }, f.join("*"))
        })
        .collect();
    format!("({})", terms.join(""))
}

fn sym(m: usize, text: &str) -> RationalFunction {
    parse_rational(text, &VarTable::symmetric("s", m)).unwrap()
}

fn entry(mf: &ModelFormula, i: usize, j: usize) -> RationalFunction {
    match &mf.psi {
        Mle::Matrix(p) => p.get(i, j).clone(),
        Mle::Vector(_) => panic!("expected a matrix MLE"),
    }
}

fn det_text(m: usize) -> String {
    minor_text(&(1..=m).collect::<Vec<_>>())
}

#[test]
fn minor_oracle_matches_two_by_two() {
    assert_eq!(sym(2, &minor_text(&[1, 2])), sym(2, "s11*s22 - s12^2"));
}

#[test]
fn path_graph() {
    let mf = chordal_phi(&UGraph::path(3)).unwrap();
    let phi = sym(3, &format!("s22/({}*{})", minor_text(&[1, 2]), minor_text(&[2, 3])));
    assert_eq!(mf.phi, phi);
    let psi22 = sym(
        3,
        "(s11*s22^2*s33 - s12^2*s23^2)/(s22*(s22*s33 - s23^2)*(s11*s22 - s12^2))",
    );
    assert_eq!(entry(&mf, 1, 1), psi22);
    assert!(entry(&mf, 0, 2).is_zero());
    let k = VarTable::symmetric("k", 3);
    assert_eq!(mf.equations, vec![parse("k13", &k).unwrap()]);
}

#[test]
fn complete_graph_inverts() {
    let mf = chordal_phi(&UGraph::complete(3)).unwrap();
    assert_eq!(mf.phi, sym(3, &format!("1/{}", det_text(3))));
    let Mle::Matrix(psi) = &mf.psi else { panic!() };
    let s = homaloidal::symcalc::SymMatrix::generic_rational(&VarTable::symmetric("s", 3)).unwrap();
    let prod = s.mul_dense(psi);
    for (i, row) in prod.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            assert_eq!(e.is_zero(), i != j);
            if i == j {
                assert!(e.num().is_one() && e.den().is_one());
            }
        }
    }
}

#[test]
fn five_vertex_chordal() {
    let g = UGraph::new(5, &[(0, 1), (1, 2), (1, 3), (2, 3), (3, 4)]).unwrap();
    let mf = chordal_phi(&g).unwrap();
    let phi = sym(
        5,
        &format!(
            "s22*s44/({}*{}*{})",
            minor_text(&[1, 2]),
            minor_text(&[2, 3, 4]),
            minor_text(&[4, 5])
        ),
    );
    assert_eq!(mf.phi, phi);
    let psi23 = sym(5, &format!("(s24*s34 - s23*s44)/{}", minor_text(&[2, 3, 4])));
    assert_eq!(entry(&mf, 1, 2), psi23);
    for &(i, j) in &[(0, 2), (0, 3), (0, 4), (1, 4), (2, 4)] {
        assert!(entry(&mf, i, j).is_zero());
    }
    assert_eq!(mf.equations.len(), 5);
}

#[test]
fn non_chordal_graph_rejected() {
    let g = UGraph::cycle(4);
    assert!(matches!(chordal_phi(&g), Err(Error::NotChordal(c)) if c.len() == 4));
}

#[test]
fn collider() {
    let d = Dag::new(3, &[(0, 2), (1, 2)]).unwrap();
    let k = VarTable::symmetric("k", 3);
    let eq = parse("k13*k23 - k12*k33", &k).unwrap();
    let mf = dag_phi_with_equations(&d, vec![eq]).unwrap();
    let det = det_text(3);
    assert_eq!(mf.phi, sym(3, &format!("(s11*s22 - s12^2)/(s11*s22*{det})")));
    assert_eq!(entry(&mf, 2, 2), sym(3, &format!("(s11*s22 - s12^2)/{det}")));
    assert_eq!(entry(&mf, 0, 2), sym(3, &format!("(s12*s23 - s13*s22)/{det}")));
    assert_eq!(entry(&mf, 1, 2), sym(3, &format!("(s12*s13 - s11*s23)/{det}")));
    assert_eq!(
        entry(&mf, 0, 1),
        sym(
            3,
            &format!("(s12*s13 - s11*s23)*(s12*s23 - s13*s22)/((s11*s22 - s12^2)*{det})")
        )
    );
}

#[test]
fn collider_rejects_wrong_equation() {
    let d = Dag::new(3, &[(0, 2), (1, 2)]).unwrap();
    let k = VarTable::symmetric("k", 3);
    let eq = parse("k12", &k).unwrap();
    assert!(matches!(dag_phi_with_equations(&d, vec![eq]), Err(Error::Invariant(_))));
}

#[test]
fn empty_dag_is_diagonal() {
    let mf = dag_phi(&Dag::empty(3)).unwrap();
    assert_eq!(mf.phi, sym(3, "1/(s11*s22*s33)"));
    assert_eq!(entry(&mf, 1, 1), sym(3, "1/s22"));
    assert!(entry(&mf, 0, 1).is_zero());
}

#[test]
fn five_vertex_dag() {
    let d = Dag::new(5, &[(0, 1), (0, 2), (1, 3), (2, 3), (2, 4), (3, 4)]).unwrap();
    let mf = dag_phi(&d).unwrap();
    let phi = sym(
        5,
        &format!(
            "s11*{}*{}/({}*{}*{}*{})",
            minor_text(&[2, 3]),
            minor_text(&[3, 4]),
            minor_text(&[1, 2]),
            minor_text(&[1, 3]),
            minor_text(&[2, 3, 4]),
            minor_text(&[3, 4, 5])
        ),
    );
    assert_eq!(mf.phi, phi);
    let psi23 = sym(
        5,
        &format!(
            "-(s33*s24 - s23*s34)*(s23*s24 - s22*s34)/({}*{})",
            minor_text(&[2, 3, 4]),
            minor_text(&[2, 3])
        ),
    );
    assert_eq!(entry(&mf, 1, 2), psi23);
}

#[test]
fn cyclic_graph_rejected() {
    assert!(matches!(Dag::new(4, &[(0, 1), (1, 3), (3, 2), (2, 0)]), Err(Error::Cyclic)));
}

fn xs(n: usize) -> VarTable {
    VarTable::indexed("x", n)
}

fn us(n: usize, text: &str) -> RationalFunction {
    parse_rational(text, &VarTable::indexed("u", n)).unwrap()
}

#[test]
fn product_of_coordinates() {
    let x = xs(3);
    let forms: Vec<Polynomial> = ["x1", "x2", "x3"].iter().map(|t| parse(t, &x).unwrap()).collect();
    let mf = product_of_forms(&forms, &[1, 1, 1]).unwrap();
    assert_eq!(mf.phi, us(3, "1/(u1*u2*u3)"));
    let Mle::Vector(psi) = &mf.psi else { panic!() };
    assert_eq!(psi, &vec![us(3, "1/u1"), us(3, "1/u2"), us(3, "1/u3")]);
}

#[test]
fn product_with_square() {
    let x = xs(2);
    let forms = vec![parse("x1", &x).unwrap(), parse("x2", &x).unwrap()];
    let mf = product_of_forms(&forms, &[2, 1]).unwrap();
    assert_eq!(mf.phi, us(2, "4/(u1^2*u2)"));
    let Mle::Vector(psi) = &mf.psi else { panic!() };
    assert_eq!(psi, &vec![us(2, "2/u1"), us(2, "1/u2")]);
}

#[test]
fn product_of_non_basis_rejected() {
    let x = xs(2);
    let forms: Vec<Polynomial> = ["x1", "x2", "x1 + x2"].iter().map(|t| parse(t, &x).unwrap()).collect();
    assert!(matches!(product_of_forms(&forms, &[1, 1, 1]), Err(Error::NotABasis(_))));
    let dependent = vec![parse("x1 + x2", &x).unwrap(), parse("2*x1 + 2*x2", &x).unwrap()];
    assert!(matches!(product_of_forms(&dependent, &[1, 1]), Err(Error::NotABasis(_))));
}

#[test]
fn product_inverts_log_gradient() {
    // Ψ(∇ log F) = identity for F = (x1 + x2) x2^2
    let x = xs(2);
    let forms = vec![parse("x1 + x2", &x).unwrap(), parse("x2", &x).unwrap()];
    let mf = product_of_forms(&forms, &[1, 2]).unwrap();
    let glog = RationalFunction::from_poly(mf.f.clone()).grad_log().unwrap();
    let Mle::Vector(psi) = &mf.psi else { panic!() };
    for (i, p) in psi.iter().enumerate() {
        let back = p.substitute(&glog).unwrap();
        assert_eq!(back, RationalFunction::var(2, back.domain(), i));
    }
}

fn rats(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| Rat::from_int(x)).collect()
}

fn hyperbolic() -> homaloidal::symcalc::QuadricPair {
    // Q∨ = u0 u1 − u2 u3, so A⁻¹ has ±1/2 off the diagonal
    let h = Rat::new(1, 2);
    let z = Rat::zero();
    let ainv = QMatrix::from_rows(vec![
        vec![z.clone(), h.clone(), z.clone(), z.clone()],
        vec![h.clone(), z.clone(), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), z.clone(), h.neg()],
        vec![z.clone(), z.clone(), h.neg(), z.clone()],
    ])
    .unwrap();
    quadric_pair(&ainv.inverse().unwrap()).unwrap()
}

#[test]
fn hyperplane_section_of_quadric() {
    let qp = hyperbolic();
    let mf = quadric_model(&qp, &QuadricKind::HyperplaneSection(rats(&[1, 0, 0, 0]))).unwrap();
    let u = VarTable::indexed_from_zero("u", 4);
    let e = |t: &str| parse_rational(t, &u).unwrap();
    assert_eq!(mf.phi, e("u1/(u0*u1 - u2*u3)"));
    let Mle::Vector(psi) = &mf.psi else { panic!() };
    let q = "(u0*u1 - u2*u3)";
    assert_eq!(psi[0], e(&format!("u1/{q}")));
    assert_eq!(psi[1], e(&format!("u0/{q} - 1/u1")));
    assert_eq!(psi[2], e(&format!("-u3/{q}")));
    assert_eq!(psi[3], e(&format!("-u2/{q}")));
    let x = VarTable::indexed_from_zero("x", 4);
    assert_eq!(mf.equations, vec![parse("x0*x1 - x2*x3", &x).unwrap()]);
}

#[test]
fn hyperplane_needs_tangency() {
    let qp = hyperbolic();
    let r = quadric_model(&qp, &QuadricKind::HyperplaneSection(rats(&[1, 1, 0, 0])));
    assert!(matches!(r, Err(Error::Tangency(_))));
}

#[test]
fn fermat_quadric() {
    let qp = quadric_pair(&QMatrix::identity(3)).unwrap();
    let mf = quadric_model(&qp, &QuadricKind::Full).unwrap();
    assert_eq!(mf.phi, us(3, "4/(u1^2 + u2^2 + u3^2)"));
}

#[test]
fn conic_with_tangent_line() {
    let h = Rat::new(1, 2);
    let z = Rat::zero();
    // Q = x1 x3 − x2²
    let a = QMatrix::from_rows(vec![
        vec![z.clone(), z.clone(), h.clone()],
        vec![z.clone(), Rat::from_int(-1), z.clone()],
        vec![h, z.clone(), z],
    ])
    .unwrap();
    let qp = quadric_pair(&a).unwrap();
    let x = xs(3);
    assert_eq!(qp.q, parse("x1*x3 - x2^2", &x).unwrap());
    let l = rats(&[1, 0, 0]);
    assert_eq!(qp.dual_gradient_at(&l), rats(&[0, 0, 4]));
    let mf = quadric_model(&qp, &QuadricKind::TangentProduct(l)).unwrap();
    assert_eq!(mf.f, parse("x1^2*x3 - x1*x2^2", &x).unwrap());
    // 16 u(p)/Q∨² with p = (0, 0, 4) and Q∨ = 4 u1 u3 − u2²
    assert_eq!(mf.phi, us(3, "64*u3/(4*u1*u3 - u2^2)^2"));
    let r = quadric_model(&qp, &QuadricKind::TangentProduct(rats(&[0, 1, 0])));
    assert!(matches!(r, Err(Error::Tangency(_))));
}

#[test]
fn linear_f_from_quadric() {
    let qp = hyperbolic();
    let l = rats(&[1, 0, 0, 0]);
    let sol = linear_f_solution(&qp.qdual, &l).unwrap();
    let quad = quadric_model(&qp, &QuadricKind::HyperplaneSection(l)).unwrap();
    assert_eq!(sol.phi, quad.phi);
    let mf = linear_f_model(&sol).unwrap();
    assert_eq!(mf.phi, quad.phi);
}

#[test]
fn linear_f_from_monomial() {
    let u = VarTable::indexed("u", 3);
    let g = parse("u1*u2*u3", &u).unwrap();
    let sol = linear_f_solution(&g, &rats(&[1, 0, 0])).unwrap();
    assert_eq!(sol.f, parse("u2*u3", &u).unwrap());
    assert_eq!(sol.phi, us(3, "1/u1"));
    linear_f_model(&sol).unwrap();
}

#[test]
fn linear_f_off_axis() {
    // ℓ = (1, 1, 0) lies on two of the three planes of g, a double point of the cubic
    let u = VarTable::indexed("u", 3);
    let g = parse("u2*(u1 - u2)*u3", &u).unwrap();
    let sol = linear_f_solution(&g, &rats(&[1, 1, 0])).unwrap();
    assert_eq!(sol.f, parse("(u1 - u2)*u3", &u).unwrap());
    assert_eq!(sol.phi, us(3, "1/u2"));
    let mf = linear_f_model(&sol).unwrap();
    assert_eq!(mf.f, parse("x1 + x2", &xs(3)).unwrap());
    // a simple point of the same cubic is rejected
    assert!(matches!(linear_f_solution(&g, &rats(&[0, 1, 1])), Err(Error::Multiplicity(_))));
}

#[test]
fn linear_f_rejections() {
    let u = VarTable::indexed("u", 3);
    let g = parse("u1^3", &u).unwrap();
    assert!(matches!(linear_f_solution(&g, &rats(&[0, 1, 0])), Err(Error::Multiplicity(_))));
    let g = parse("u1^2 + u2^2 + u3^2", &u).unwrap();
    assert!(matches!(linear_f_solution(&g, &rats(&[1, 0, 0])), Err(Error::Multiplicity(_))));
}

fn det_k(m: usize) -> Polynomial {
    let k = VarTable::symmetric("k", m);
    parse(&det_text(m).replace('s', "k"), &k).unwrap()
}

#[test]
fn square_and_corner() {
    let k = VarTable::symmetric("k", 3);
    let eqs: Vec<Polynomial> = ["k23", "k13", "k12^2 - k11*k22 + k11*k33"]
        .iter()
        .map(|t| parse(t, &k).unwrap())
        .collect();
    let phi = sym(3, "4*s22/((s22 + s33)^2*(s11*s22 - s12^2))");
    let mf = custom_model(&phi, &det_k(3), eqs, Convention::Symmetric(3), &CheckOptions::default())
        .unwrap();
    // the tabulated form with the opposite sign on both factors is the same function
    assert_eq!(mf.phi, sym(3, "-4*s22/((s22 + s33)^2*(s12^2 - s11*s22))"));
    let d = "(s11*s22 - s12^2)";
    assert_eq!(entry(&mf, 0, 0), sym(3, &format!("s22/{d}")));
    assert_eq!(entry(&mf, 0, 1), sym(3, &format!("-s12/{d}")));
    assert_eq!(entry(&mf, 1, 1), sym(3, &format!("-1/s22 + 2/(s22 + s33) + s11/{d}")));
    assert_eq!(entry(&mf, 2, 2), sym(3, "2/(s22 + s33)"));
    assert!(entry(&mf, 0, 2).is_zero() && entry(&mf, 1, 2).is_zero());
}

#[test]
fn naive_four_cycle_rejected() {
    let phi = sym(
        4,
        "s11*s22*s33*s44/((s11*s22 - s12^2)*(s22*s33 - s23^2)*(s33*s44 - s34^2)*(s11*s44 - s14^2))",
    );
    let r = custom_model(&phi, &det_k(4), vec![], Convention::Symmetric(4), &CheckOptions::default());
    assert!(matches!(r, Err(Error::PdeFailure(_))));
}

#[test]
fn full_model_custom() {
    let phi = sym(3, &format!("1/{}", det_text(3)));
    let mf = custom_model(&phi, &det_k(3), vec![], Convention::Symmetric(3), &CheckOptions::default())
        .unwrap();
    assert_eq!(mf.kind, ModelKind::Custom);
}

fn colored_cycle_g() -> QMatrix {
    QMatrix::from_rows(vec![
        rats(&[1, 1, 0]),
        rats(&[1, -1, 0]),
        vec![Rat::zero(), Rat::zero(), Rat::new(1, 2)],
    ])
    .unwrap()
}

/// Entries of g S gᵀ for the colored-cycle transport, written out by hand.
fn transported_minors() -> (String, String, String) {
    let t11 = "(s11 + 2*s12 + s22)";
    let t22 = "(s11 - 2*s12 + s22)";
    let t13 = "(s13 + s23)/2";
    let t23 = "(s13 - s23)/2";
    let t33 = "s33/4";
    let d23 = format!("({t22}*{t33} - ({t23})^2)");
    let d13 = format!("({t11}*{t33} - ({t13})^2)");
    (t33.to_string(), d23, d13)
}

#[test]
fn colored_cycle_transport() {
    // chordal model of 1 - 3 - 2, i.e. k12 = 0
    let base = chordal_phi(&UGraph::new(3, &[(0, 2), (1, 2)]).unwrap()).unwrap();
    let g = colored_cycle_g();
    let mf = sl_transport(&base, &g).unwrap();
    let (t33, d23, d13) = transported_minors();
    assert_eq!(mf.phi, sym(3, &format!("({t33})/({d23}*{d13})")));
    let k = VarTable::symmetric("k", 3);
    assert_eq!(mf.equations, vec![parse("k11 - k22", &k).unwrap()]);
}

#[test]
fn colored_cycle_printed_constant() {
    // the constant 4 s33 is sixteen times the solution; only the normalizing check accepts it
    let (_, d23, d13) = transported_minors();
    let printed = sym(3, &format!("4*s33/({d23}*{d13})"));
    let strict = custom_model(&printed, &det_k(3), vec![], Convention::Symmetric(3), &CheckOptions::default());
    assert!(matches!(strict, Err(Error::PdeFailure(_))));
    let opts = CheckOptions { normalize_scalar: true, ..Default::default() };
    let mf = custom_model(&printed, &det_k(3), vec![], Convention::Symmetric(3), &opts).unwrap();
    assert_eq!(mf.phi, printed.scale(&homaloidal::poly::Coefficient::Rational(Rat::new(1, 16))));
}

#[test]
fn identity_transport() {
    let base = dag_phi(&Dag::new(3, &[(0, 2), (1, 2)]).unwrap()).unwrap();
    let mf = sl_transport(&base, &QMatrix::identity(3)).unwrap();
    assert_eq!(mf.phi, base.phi);
    assert_eq!(mf.psi, base.psi);
}

fn diag(v: &[i64]) -> QMatrix {
    let mut a = QMatrix::zeros(v.len(), v.len());
    for (i, &x) in v.iter().enumerate() {
        a.set(i, i, Rat::from_int(x));
    }
    a
}

fn paper_detrep() -> Vec<QMatrix> {
    vec![QMatrix::zeros(2, 2), diag(&[1, 0]), diag(&[0, 1]), diag(&[1, 1])]
}

#[test]
fn detrep_diagonal_example() {
    let x = xs(3);
    let f = parse("(x1 + x3)*(x2 + x3)", &x).unwrap();
    assert!(detrep_verify(&paper_detrep(), &f).unwrap());
    let mut bad = paper_detrep();
    bad[1] = diag(&[2, 0]);
    assert!(!detrep_verify(&bad, &f).unwrap());
    assert!(matches!(detrep_verify(&paper_detrep()[..3], &f), Err(Error::SizeMismatch(_))));
}

#[test]
fn detrep_augmented_example() {
    let a = paper_detrep();
    assert_eq!(independent_suffix(&a), Some(2));
    let aug = detrep_augment(&a, 2).unwrap();
    assert!(!aug.passthrough);
    let x = xs(3);
    // x1 & 0 & x1+x3 & 0 / 0 & 0 & 0 & x2+x3 / x1+x3 & 0 & 0 & 0 / 0 & x2+x3 & 0 & 0
    let expect: [[&str; 4]; 4] = [
        ["x1", "0", "x1 + x3", "0"],
        ["0", "0", "0", "x2 + x3"],
        ["x1 + x3", "0", "0", "0"],
        ["0", "x2 + x3", "0", "0"],
    ];
    for (i, row) in expect.iter().enumerate() {
        for (j, t) in row.iter().enumerate() {
            let p = parse(t, &x).unwrap();
            for v in 0..3 {
                let c = p.derivative(v).constant_value().unwrap();
                assert_eq!(c.as_rat().unwrap(), aug.b_list[v + 1].get(i, j));
            }
            assert!(aug.b_list[0].get(i, j).is_zero());
        }
    }
    let f = parse("(x1 + x3)*(x2 + x3)", &x).unwrap();
    assert!(detrep_verify(&aug.b_list, &f.pow(2)).unwrap());
}

#[test]
fn detrep_independent_passthrough() {
    let a = vec![QMatrix::zeros(2, 2), diag(&[1, 0]), diag(&[0, 1])];
    assert_eq!(independent_suffix(&a), Some(1));
    let aug = detrep_augment(&a, 1).unwrap();
    assert!(aug.passthrough);
    assert_eq!(aug.b_list, a);
}

#[test]
fn detrep_odd_size_and_padding() {
    // m = 1 with three dependent multiples: r − 1 = 2 slots exceed m, forcing padding
    let one = |c: i64| QMatrix::from_rows(vec![vec![Rat::from_int(c)]]).unwrap();
    let a = vec![one(1), one(1), one(2), one(3)];
    let r = independent_suffix(&a).unwrap();
    assert_eq!(r, 3);
    let aug = detrep_augment(&a, r).unwrap();
    let f = detrep_det(&a).unwrap();
    assert_eq!(detrep_det(&aug.b_list).unwrap(), f.pow(2));
}

#[test]
fn detrep_rejects_bad_suffix() {
    let a = paper_detrep();
    assert!(detrep_augment(&a, 1).is_err());
}

#[test]
fn explicit_json_model() {
    let text = r#"{"phi": "1/(s11*s22 - s12^2)", "F": "det", "m": 2}"#;
    let spec: ExplicitModelSpec = serde_json::from_str(text).unwrap();
    let mf = spec.build(&CheckOptions::default()).unwrap();
    assert_eq!(mf.convention, Convention::Symmetric(2));
    let text = r#"{"phi": "1/(u1*u2)", "F": "x1*x2", "n": 2}"#;
    let spec: ExplicitModelSpec = serde_json::from_str(text).unwrap();
    assert!(spec.build(&CheckOptions::default()).is_ok());
}
