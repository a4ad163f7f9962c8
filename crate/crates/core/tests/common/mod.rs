#![allow(dead_code)]

use homaloidal::mldeg::Ideal;
use homaloidal::poly::{Coefficient, Domain, Polynomial};

/// Number of points of `F_p^n` where every generator vanishes, by exhaustion.
pub fn brute_force_roots(ideal: &Ideal) -> usize {
    let p = ideal.prime();
    let n = ideal.vars.len();
    assert!((p as f64).powi(n as i32) < 5e7, "search space too large");
    let polys: Vec<Vec<(Vec<usize>, u64)>> = ideal
        .gens
        .iter()
        .map(|g| {
            g.terms()
                .iter()
                .map(|t| (t.mono.exps().iter().map(|&e| e as usize).collect(), t.coeff.as_residue().unwrap()))
                .collect()
        })
        .collect();
    let maxdeg = polys.iter().flatten().flat_map(|(e, _)| e.iter().copied()).max().unwrap_or(0);
    let mut pt = vec![0u64; n];
    let mut pow = vec![vec![1u64; maxdeg + 1]; n];
    let mut count = 0;
    loop {
        for i in 0..n {
            for k in 1..=maxdeg {
                pow[i][k] = pow[i][k - 1] * pt[i] % p;
            }
        }
        let root = polys.iter().all(|g| {
            g.iter().fold(0u64, |acc, (e, c)| {
                let mut v = *c;
                for (i, &k) in e.iter().enumerate() {
                    v = v * pow[i][k] % p;
                }
                (acc + v) % p
            }) == 0
        });
        if root {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            pt[i] += 1;
            if pt[i] < p {
                break;
            }
            pt[i] = 0;
            i += 1;
        }
    }
}

/// Remainder of multivariate division by `basis` (leading terms first).
pub fn normal_form(f: &Polynomial, basis: &[Polynomial]) -> Polynomial {
    let dom = f.domain();
    let n = f.nvars();
    let mut rem = Polynomial::zero(n, dom);
    let mut f = f.clone();
    while let Some(lt) = f.leading_term().cloned() {
        let red = basis.iter().find(|g| g.leading_term().map_or(false, |gl| gl.mono.divides(&lt.mono)));
        match red {
            Some(g) => {
                let gl = g.leading_term().unwrap();
                let q = lt.mono.div(&gl.mono).unwrap();
                let c = dom.div(&lt.coeff, &gl.coeff);
                f = &f - &g.mul_term(&q, &c);
            }
            None => {
                let t = Polynomial::monomial(dom, lt.mono.clone(), lt.coeff.clone());
                rem = &rem + &t;
                f = &f - &t;
            }
        }
    }
    rem
}

pub fn s_polynomial(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let dom = a.domain();
    let (la, lb) = (a.leading_term().unwrap(), b.leading_term().unwrap());
    let l = la.mono.lcm(&lb.mono);
    let fa = a.mul_term(&l.div(&la.mono).unwrap(), &dom.div(&dom.one(), &la.coeff));
    let fb = b.mul_term(&l.div(&lb.mono).unwrap(), &dom.div(&dom.one(), &lb.coeff));
    &fa - &fb
}

/// Buchberger's criterion plus reducedness, checked independently of the engine.
pub fn is_reduced_groebner(basis: &[Polynomial]) -> bool {
    for (i, a) in basis.iter().enumerate() {
        if a.leading_coeff() != Coefficient::Residue(1) && !matches!(a.domain(), Domain::Rational) {
            return false;
        }
        for (j, b) in basis.iter().enumerate() {
            if i == j {
                continue;
            }
            let lb = &b.leading_term().unwrap().mono;
            if a.terms().iter().any(|t| lb.divides(&t.mono)) {
                return false;
            }
            if i < j && !normal_form(&s_polynomial(a, b), basis).is_zero() {
                return false;
            }
        }
    }
    true
}
