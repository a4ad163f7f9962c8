mod common;

use std::time::Instant;

use common::{brute_force_roots, is_reduced_groebner, normal_form};
use homaloidal::mldeg::*;
use homaloidal::poly::{parse, parse_in, Domain, Polynomial, Rat, VarTable};
use homaloidal::Error;
use proptest::prelude::*;

fn ideal(p: u64, n: usize, gens: &[&str]) -> Ideal {
    let vars = VarTable::indexed("x", n);
    let gens = gens.iter().map(|g| parse_in(g, &vars, Domain::Prime(p)).unwrap()).collect();
    Ideal::new(gens, vars).unwrap()
}

fn x(n: usize, text: &str) -> Polynomial {
    parse(text, &VarTable::indexed("x", n)).unwrap()
}

fn k3(text: &str) -> Polynomial {
    parse(text, &VarTable::symmetric("k", 3)).unwrap()
}

#[test]
fn coordinate_ideal() {
    let gb = groebner(&ideal(1000003, 2, &["x1", "x2"])).unwrap();
    assert_eq!(gb.polys, ideal(1000003, 2, &["x2", "x1"]).gens);
    assert_eq!(quotient_dim(&gb), QuotientDim::Finite(1));
}

#[test]
fn two_points() {
    let i = ideal(1000003, 2, &["x1^2 - 1", "x2 - x1"]);
    let gb = groebner(&i).unwrap();
    assert!(is_reduced_groebner(&gb.polys));
    assert_eq!(quotient_dim(&gb), QuotientDim::Finite(2));
}

#[test]
fn cube_roots_of_unity() {
    // 31 ≡ 1 mod 3, so all three roots of x^3 = 1 are rational
    let i = ideal(31, 2, &["x1*x2 - 1", "x1^2 - x2"]);
    let gb = groebner(&i).unwrap();
    assert!(is_reduced_groebner(&gb.polys));
    assert_eq!(quotient_dim(&gb), QuotientDim::Finite(3));
    assert_eq!(brute_force_roots(&i), 3);
    let big = groebner(&ideal(1000003, 2, &["x1*x2 - 1", "x1^2 - x2"])).unwrap();
    assert_eq!(quotient_dim(&big), QuotientDim::Finite(3));
}

#[test]
fn deterministic_basis() {
    let i = ideal(1000033, 3, &["x1^2 + x2*x3 - 2", "x2^2 - x1*x3", "x3^2 - x1 + 5"]);
    assert_eq!(groebner(&i).unwrap(), groebner(&i).unwrap());
}

#[test]
fn rejects_rational_generators() {
    let vars = VarTable::indexed("x", 1);
    let r = Ideal::new(vec![parse("x1", &vars).unwrap()], vars);
    assert!(matches!(r, Err(Error::DomainMismatch(_))));
}

fn timed(f: &Polynomial) -> DegreeCertificate {
    let start = Instant::now();
    let c = homaloidal_degree(f, &TrialConfig::default()).unwrap();
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert_eq!(c.trials.len(), 9);
    c
}

#[test]
fn smooth_conic() {
    assert!(timed(&x(3, "x1^2 + x2^2 + x3^2")).is_one());
}

#[test]
fn three_general_lines() {
    assert!(timed(&x(3, "x1*x2*x3")).is_one());
}

#[test]
fn concurrent_lines() {
    let c = timed(&x(3, "x1*x2*(x1 + x2)"));
    assert!(c.agreement);
    assert_eq!(c.degree, QuotientDim::Finite(0));
    assert!(!c.is_one());
}

#[test]
fn fermat_quadric_four_variables() {
    assert!(timed(&x(4, "x1^2 + x2^2 + x3^2 + x4^2")).is_one());
}

#[test]
fn conic_and_tangent_line() {
    assert!(timed(&x(3, "x1*(x1*x3 - x2^2)")).is_one());
}

#[test]
fn radical_pair() {
    assert!(timed(&x(3, "x1^2*x2*x3")).is_one());
    assert!(timed(&x(3, "x1*x2*x3")).is_one());
}

#[test]
fn larger_degrees() {
    // two general lines in the plane: the binary form x1 x2 has degree 1,
    // a general binary cubic has degree 2
    assert!(timed(&x(2, "x1*x2")).is_one());
    let c = timed(&x(2, "x1*x2*(x1 + x2)"));
    assert_eq!(c.degree, QuotientDim::Finite(2));
    assert!(c.agreement);
}

#[test]
fn certificate_json_shape() {
    let c = homaloidal_degree(&x(3, "x1*x2*x3"), &TrialConfig::new(vec![1000003], 2, 5)).unwrap();
    let js = c.to_json();
    assert_eq!(js["degree"], 1);
    assert_eq!(js["seeds"], serde_json::json!([5, 6]));
    assert_eq!(js["agreement"], true);
    assert_eq!(serde_json::to_string(&js).unwrap(), serde_json::to_string(&c.to_json()).unwrap());
}

#[test]
fn homaloidal_input_errors() {
    let cfg = TrialConfig::default();
    assert!(matches!(homaloidal_degree(&x(2, "x1^2 + x2"), &cfg), Err(Error::NotHomogeneous(_))));
    assert!(homaloidal_degree(&x(2, "0"), &cfg).is_err());
    let bad = TrialConfig::new(vec![1000001], 1, 0);
    assert!(matches!(homaloidal_degree(&x(2, "x1*x2"), &bad), Err(Error::BadPrime(_))));
}

/// Same prime and data for both counts.
fn oracle_matches(f: &Polynomial, p: u64, seeds: std::ops::Range<u64>) {
    for seed in seeds {
        let u = random_residues(p, seed, f.nvars());
        let i = homaloidal_system(&f.reduce_mod_p(p).unwrap(), &u).unwrap();
        let q = quotient_dim(&groebner(&i).unwrap());
        assert_eq!(q, QuotientDim::Finite(brute_force_roots(&i)), "seed {seed}");
    }
}

#[test]
fn brute_force_oracle_small_systems() {
    for f in ["x1^2 + x2^2 + x3^2", "x1*x2*x3", "x1*x2*(x1 + x2)", "x1*(x1*x3 - x2^2)"] {
        oracle_matches(&x(3, f), 31, 0..3);
    }
}

#[test]
fn brute_force_oracle_binary_cubic() {
    // exhaustion only sees rational roots, so it can undercount but never overcount
    let f = x(2, "x1*x2*(x1 + x2)");
    let p = 101;
    let mut matched = 0;
    for seed in 0..20 {
        let u = random_residues(p, seed, 2);
        let i = homaloidal_system(&f.reduce_mod_p(p).unwrap(), &u).unwrap();
        let q = quotient_dim(&groebner(&i).unwrap()).finite().unwrap();
        let b = brute_force_roots(&i);
        assert!(b <= q);
        if b == q {
            matched += 1;
        }
    }
    assert!(matched > 0);
}

#[test]
fn hyperplane_k11_minus_k22() {
    let start = Instant::now();
    let c = ml_degree_hypersurface(&k3("k11 - k22"), 3, &TrialConfig::default()).unwrap();
    assert!(c.is_one(), "{:?}", c.trials);
    assert!(!c.singular_flag);
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn hyperplane_k12() {
    assert!(ml_degree_hypersurface(&k3("k12"), 3, &TrialConfig::default()).unwrap().is_one());
}

#[test]
fn collider_equation() {
    let start = Instant::now();
    let c = ml_degree_hypersurface(&k3("k13*k23 - k12*k33"), 3, &TrialConfig::default()).unwrap();
    assert!(c.is_one(), "{:?}", c.trials);
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn generic_hyperplane_is_not_one() {
    let c = ml_degree_hypersurface(&k3("k11 + 2*k12 + 3*k13 - k22 + 5*k23 + 7*k33"), 3, &TrialConfig::default())
        .unwrap();
    assert!(c.agreement);
    assert!(c.degree.finite().unwrap() > 1);
}

#[test]
fn hypersurface_size_mismatch() {
    let r = ml_degree_hypersurface(&k3("k12"), 2, &TrialConfig::default());
    assert!(matches!(r, Err(Error::SizeMismatch(_))));
}

fn gv(v: &[i64]) -> Vec<Gaussian> {
    v.iter().map(|&a| Gaussian::int(a)).collect()
}

#[test]
fn ed_generic_plane() {
    let c = ed_degree_linear(&[gv(&[1, 2, 3]), gv(&[-2, 1, 5])], 3, &TrialConfig::default()).unwrap();
    assert!(c.is_one());
}

#[test]
fn ed_tangent_plane() {
    // the plane x1 + i x2 = 0 touches x1^2 + x2^2 + x3^2 along (1, i, 0)
    let b1 = vec![Gaussian::int(1), Gaussian::new(Rat::zero(), Rat::one()), Gaussian::int(0)];
    let c = ed_degree_linear(&[b1, gv(&[0, 0, 1])], 3, &TrialConfig::default()).unwrap();
    assert!(!c.is_one());
    assert_eq!(c.degree, QuotientDim::Finite(0));
}

#[test]
fn ed_complex_gram_uses_split_primes() {
    let b1 = vec![Gaussian::int(1), Gaussian::new(Rat::from_int(1), Rat::one()), Gaussian::int(2)];
    let c = ed_degree_linear(&[b1, gv(&[0, 1, 1])], 3, &TrialConfig::default()).unwrap();
    assert!(c.primes.iter().all(|p| p % 4 == 1));
    assert!(c.is_one());
}

#[test]
fn ed_line() {
    assert!(ed_degree_linear(&[gv(&[1, 1, 0])], 3, &TrialConfig::default()).unwrap().is_one());
}

#[test]
fn ed_dependent_basis() {
    let r = ed_degree_linear(&[gv(&[1, 2, 3]), gv(&[2, 4, 6])], 3, &TrialConfig::default());
    assert!(matches!(r, Err(Error::Input(_))));
}

fn small_poly() -> impl Strategy<Value = String> {
    let term = (-5i64..=5, 0u8..3, 0u8..3, 0u8..2).prop_map(|(c, a, b, d)| format!("{c}*x1^{a}*x2^{b}*x3^{d}"));
    prop::collection::vec(term, 1..4).prop_map(|t| t.join(" + "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn basis_passes_buchberger_criterion(gens in prop::collection::vec(small_poly(), 1..4)) {
        let refs: Vec<&str> = gens.iter().map(|s| s.as_str()).collect();
        let i = ideal(101, 3, &refs);
        prop_assume!(!i.gens.is_empty());
        let gb = groebner(&i).unwrap();
        prop_assert!(is_reduced_groebner(&gb.polys));
        for g in &i.gens {
            prop_assert!(normal_form(g, &gb.polys).is_zero());
        }
    }

    #[test]
    fn quotient_dim_counts_rational_points(a in 1u64..13, b in 1u64..13, c in 0u64..13) {
        // x1^2 = a, x2 = b x1 + c: two points when a is a nonzero square mod 13, else none over F_13
        let text = [format!("x1^2 - {a}"), format!("x2 - {b}*x1 - {c}")];
        let i = ideal(13, 2, &[&text[0], &text[1]]);
        let q = quotient_dim(&groebner(&i).unwrap());
        prop_assert_eq!(q, QuotientDim::Finite(2));
        let roots = brute_force_roots(&i);
        prop_assert!(roots == 0 || roots == 2);
    }
}
