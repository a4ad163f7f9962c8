//! Multivariate gcd. Over QQ a heuristic integer gcd is tried first; the
//! recursive subresultant remainder sequence is the fallback.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::coeff::{Coefficient, Domain, Rat};
use super::polynomial::{Monomial, Polynomial, Term};

/// Normalizes a gcd result: primitive with positive leading coefficient over
/// QQ, monic over ZZ/p.
pub fn normalize(p: &Polynomial) -> Polynomial {
    p.primitive_part()
}

/// Greatest common divisor, normalized as in [`normalize`]. `gcd(a, 0)` is
/// `normalize(a)` and `gcd(0, 0)` is zero.
pub fn gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    assert_eq!(a.domain(), b.domain(), "gcd across domains");
    assert_eq!(a.nvars(), b.nvars(), "gcd across variable counts");
    if a.is_zero() {
        return normalize(b);
    }
    if b.is_zero() {
        return normalize(a);
    }
    let n = a.nvars();
    let dom = a.domain();
    if a.is_constant() || b.is_constant() {
        return Polynomial::one(n, dom);
    }
    let a = normalize(a);
    let b = normalize(b);
    if a == b {
        return a;
    }
    let (small, large) = if a.len() <= b.len() { (&a, &b) } else { (&b, &a) };
    if large.len() > small.len() && large.div_exact(small).is_some() {
        return small.clone();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = ma.gcd(&mb);
    let core = gcd_core(&a.div_monomial(&ma), &b.div_monomial(&mb));
    if mg.is_one() {
        core
    } else {
        core.mul_term(&mg, &dom.one())
    }
}

/// gcd of a list, smallest first with early exit on a unit.
pub fn gcd_many(polys: &[Polynomial]) -> Option<Polynomial> {
    let mut sorted: Vec<&Polynomial> = polys.iter().filter(|p| !p.is_zero()).collect();
    if sorted.is_empty() {
        return polys.first().cloned();
    }
    sorted.sort_by_key(|p| p.len());
    let mut g = normalize(sorted[0]);
    for p in &sorted[1..] {
        if g.is_constant() {
            break;
        }
        g = gcd(&g, p);
    }
    Some(g)
}

/// Both inputs normalized and free of monomial factors.
fn gcd_core(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let n = a.nvars();
    let dom = a.domain();
    if a.is_constant() || b.is_constant() {
        return Polynomial::one(n, dom);
    }
    if dom == Domain::Rational {
        let mut vars = a.variables();
        vars.extend(b.variables().into_iter().filter(|v| !a.contains_var(*v)));
        if vars.len() > HEURISTIC_VARS {
            return gcd_subresultant(a, b);
        }
        if let Some(g) = heuristic(a, b, &vars, &mut HEURISTIC_CALLS.clone()) {
            return normalize(&g);
        }
    }
    gcd_subresultant(a, b)
}

fn gcd_subresultant(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let n = a.nvars();
    let dom = a.domain();
    let va = a.variables();
    let vb = b.variables();
    // A variable missing from one side forces the gcd into the coefficients of the other.
    if let Some(&v) = va.iter().find(|v| !vb.contains(v)) {
        return gcd_with_coefficients(b, a, v);
    }
    if let Some(&v) = vb.iter().find(|v| !va.contains(v)) {
        return gcd_with_coefficients(a, b, v);
    }
    let x = *va
        .iter()
        .min_by_key(|&&v| (a.degree_in(v) as u32 + b.degree_in(v) as u32, v))
        .unwrap();
    let ua = to_univariate(a, x);
    let ub = to_univariate(b, x);
    let (ca, pa) = split_content(&ua);
    let (cb, pb) = split_content(&ub);
    let cg = gcd(&ca, &cb);
    let pg = if pa.len() >= pb.len() {
        subresultant(pa, pb)
    } else {
        subresultant(pb, pa)
    };
    let pg = match pg {
        Some(p) => from_univariate(&p, x, n, dom),
        None => return cg,
    };
    normalize(&(&cg * &pg))
}

/// Bit budget for evaluation points times degree before giving up.
const HEURISTIC_BITS: u64 = 20000;
/// Integer sizes compound with each evaluated variable; beyond this many the
/// remainder sequence is cheaper.
const HEURISTIC_VARS: usize = 5;
/// Recursive calls allowed per top-level attempt; retries compound with depth.
const HEURISTIC_CALLS: u32 = 200;

fn int_coeff(c: &Coefficient) -> BigInt {
    c.as_rat().expect("rational coefficients").numer()
}

fn max_norm(p: &Polynomial) -> BigInt {
    p.terms().iter().map(|t| int_coeff(&t.coeff).abs()).max().unwrap_or_default()
}

fn int_content(p: &Polynomial) -> BigInt {
    p.terms().iter().fold(BigInt::zero(), |g, t| g.gcd(&int_coeff(&t.coeff)))
}

fn scale_int(p: &Polynomial, c: &BigInt) -> Polynomial {
    p.scale(&Coefficient::Rational(Rat::from_bigint(c.clone())))
}

/// Exact division of every coefficient by the integer `c`.
fn div_int(p: &Polynomial, c: &BigInt) -> Polynomial {
    let terms = p
        .terms()
        .iter()
        .map(|t| Term { mono: t.mono.clone(), coeff: Coefficient::Rational(Rat::from_bigint(int_coeff(&t.coeff) / c)) })
        .collect();
    Polynomial::from_terms(p.nvars(), p.domain(), terms)
}

/// `p` with `x` replaced by the integer `xi`, by Horner in `x`.
fn eval_at(p: &Polynomial, x: usize, xi: &BigInt) -> Polynomial {
    let xi = Coefficient::Rational(Rat::from_bigint(xi.clone()));
    let mut acc = Polynomial::zero(p.nvars(), p.domain());
    for c in to_univariate(p, x).iter().rev() {
        acc = &acc.scale(&xi) + c;
    }
    acc
}

/// Inverse of evaluation: the `xi`-adic expansion with symmetric residues.
fn interpolate(mut gamma: Polynomial, x: usize, xi: &BigInt) -> Polynomial {
    let n = gamma.nvars();
    let half = xi >> 1;
    let mut out: Vec<Term> = Vec::new();
    let mut e = 0u16;
    while !gamma.is_zero() {
        let mut digit: Vec<Term> = Vec::new();
        for t in gamma.terms() {
            let mut r = int_coeff(&t.coeff).mod_floor(xi);
            if r > half {
                r -= xi;
            }
            if !r.is_zero() {
                digit.push(Term { mono: t.mono.clone(), coeff: Coefficient::Rational(Rat::from_bigint(r)) });
            }
        }
        let g = Polynomial::from_terms(n, Domain::Rational, digit);
        let xm = Monomial::var(n, x, e);
        out.extend(g.terms().iter().map(|t| Term { mono: t.mono.mul(&xm), coeff: t.coeff.clone() }));
        gamma = div_int(&(&gamma - &g), xi);
        e += 1;
    }
    Polynomial::from_terms(n, Domain::Rational, out)
}

/// Heuristic gcd of integral polynomials: evaluate one variable at a large
/// integer, recurse, rebuild the candidate and keep it only if it divides both.
fn heuristic(a: &Polynomial, b: &Polynomial, vars: &[usize], fuel: &mut u32) -> Option<Polynomial> {
    if *fuel == 0 {
        return None;
    }
    *fuel -= 1;
    let n = a.nvars();
    if a.is_zero() || b.is_zero() {
        return Some(if a.is_zero() { b.clone() } else { a.clone() });
    }
    let (ca, cb) = (int_content(a), int_content(b));
    let c = ca.gcd(&cb);
    let Some(pos) = vars.iter().position(|&v| a.contains_var(v) || b.contains_var(v)) else {
        return Some(Polynomial::from_rat(n, Rat::from_bigint(c)));
    };
    let x = vars[pos];
    let rest = &vars[pos + 1..];
    let (a, b) = (div_int(a, &ca), div_int(b, &cb));
    let deg = a.degree_in(x).max(b.degree_in(x)) as u64;
    let mut xi: BigInt = max_norm(&a).min(max_norm(&b)) * 2u32 + 29u32;
    for _ in 0..6 {
        if xi.bits() * deg > HEURISTIC_BITS {
            return None;
        }
        if let Some(gamma) = heuristic(&eval_at(&a, x, &xi), &eval_at(&b, x, &xi), rest, fuel) {
            let g = interpolate(gamma, x, &xi);
            if !g.is_zero() {
                let g = div_int(&g, &int_content(&g));
                if a.div_exact(&g).is_some() && b.div_exact(&g).is_some() {
                    return Some(scale_int(&g, &c));
                }
            }
        }
        xi = xi * 73794u32 / 27011u32;
    }
    None
}

fn gcd_with_coefficients(other: &Polynomial, p: &Polynomial, v: usize) -> Polynomial {
    let mut coeffs: Vec<Polynomial> = p.coefficients_in(v).into_iter().map(|(_, c)| c).collect();
    coeffs.sort_by_key(|c| c.len());
    let mut g = normalize(other);
    for c in &coeffs {
        if g.is_constant() {
            break;
        }
        g = gcd(&g, c);
    }
    g
}

/// Dense coefficient vector in `x`; entries do not involve `x`.
fn to_univariate(p: &Polynomial, x: usize) -> Vec<Polynomial> {
    let d = p.degree_in(x) as usize;
    let mut out = vec![Polynomial::zero(p.nvars(), p.domain()); d + 1];
    for (e, c) in p.coefficients_in(x) {
        out[e as usize] = c;
    }
    out
}

fn from_univariate(u: &[Polynomial], x: usize, n: usize, dom: Domain) -> Polynomial {
    let mut terms: Vec<Term> = Vec::new();
    for (e, c) in u.iter().enumerate() {
        let xm = Monomial::var(n, x, e as u16);
        for t in c.terms() {
            terms.push(Term {
                mono: t.mono.mul(&xm),
                coeff: t.coeff.clone(),
            });
        }
    }
    Polynomial::from_terms(n, dom, terms)
}

fn split_content(u: &[Polynomial]) -> (Polynomial, Vec<Polynomial>) {
    let c = gcd_many(u).expect("nonzero polynomial");
    if c.is_one() {
        return (c, u.to_vec());
    }
    let pp = u
        .iter()
        .map(|q| q.div_exact(&c).expect("content divides coefficients"))
        .collect();
    (c, pp)
}

fn trim(u: &mut Vec<Polynomial>) {
    while u.len() > 1 && u.last().unwrap().is_zero() {
        u.pop();
    }
    if u.len() == 1 && u[0].is_zero() {
        u.clear();
    }
}

fn prem(a: &[Polynomial], b: &[Polynomial]) -> Vec<Polynomial> {
    let n = b.len() - 1;
    let lb = &b[n];
    let mut r: Vec<Polynomial> = a.to_vec();
    let mut e = (a.len() - b.len() + 1) as u32;
    trim(&mut r);
    while !r.is_empty() && r.len() > n {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let k = dr - n;
        for c in r.iter_mut() {
            *c = &*c * lb;
        }
        for (i, bi) in b.iter().enumerate() {
            if !bi.is_zero() {
                r[i + k] = &r[i + k] - &(&lr * bi);
            }
        }
        debug_assert!(r[dr].is_zero());
        r.pop();
        trim(&mut r);
        e -= 1;
    }
    if e > 0 && !r.is_empty() {
        let f = lb.pow(e);
        for c in r.iter_mut() {
            *c = &*c * &f;
        }
    }
    r
}

/// Primitive gcd of two primitive univariate polynomials with deg a >= deg b >= 1.
/// `None` means the gcd is a unit.
fn subresultant(a: Vec<Polynomial>, b: Vec<Polynomial>) -> Option<Vec<Polynomial>> {
    let nv = a[0].nvars();
    let dom = a[0].domain();
    let mut a = a;
    let mut b = b;
    let mut g = Polynomial::one(nv, dom);
    let mut h = Polynomial::one(nv, dom);
    loop {
        let delta = (a.len() - b.len()) as u32;
        let r = prem(&a, &b);
        if r.is_empty() {
            let (_, pp) = split_content(&b);
            return Some(pp);
        }
        if r.len() == 1 {
            return None;
        }
        let divisor = &g * &h.pow(delta);
        let r: Vec<Polynomial> = r
            .iter()
            .map(|c| c.div_exact(&divisor).expect("subresultant division is exact"))
            .collect();
        a = b;
        b = r;
        g = a.last().unwrap().clone();
        h = match delta {
            0 => h,
            1 => g.clone(),
            d => g
                .pow(d)
                .div_exact(&h.pow(d - 1))
                .expect("subresultant division is exact"),
        };
        // keep coefficient growth in check without breaking exactness
        if b.len() > 1 {
            let (_, pb) = split_content(&b);
            if pb != b {
                // restart the sequence from the primitive parts
                let (_, pa) = split_content(&a);
                a = pa;
                b = pb;
                g = Polynomial::one(nv, dom);
                h = Polynomial::one(nv, dom);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::coeff::Domain;

    fn x(i: usize) -> Polynomial {
        Polynomial::var(3, Domain::Rational, i)
    }

    #[test]
    fn difference_of_squares() {
        let a = &x(0).pow(2) - &x(1).pow(2);
        let b = &x(0) - &x(1);
        assert_eq!(gcd(&a, &b), b);
    }

    #[test]
    fn coprime_variables() {
        assert!(gcd(&x(0), &x(1)).is_one());
    }

    #[test]
    fn determinant_gcd() {
        let d = &(&x(0) * &x(1)) - &x(2).pow(2);
        let e = &d * &x(1);
        assert_eq!(gcd(&d, &e), d);
    }

    #[test]
    fn shared_factor_is_recovered() {
        let f = &(&x(0) + &x(1).scale_int(2)) - &x(2);
        let a = &f * &(&x(0).pow(2) + &x(2));
        let b = &f * &(&x(1) - &x(0).pow(3));
        assert_eq!(gcd(&a, &b), normalize(&f));
    }

    #[test]
    fn modular_gcd_is_monic() {
        let d = Domain::Prime(101);
        let y = |i| Polynomial::var(2, d, i);
        let f = &y(0).scale_int(3) + &y(1);
        let a = &f * &y(0);
        let b = &f * &(&y(1) + &Polynomial::one(2, d));
        let g = gcd(&a, &b);
        assert!(g.leading_coeff().is_one());
        assert!(a.div_exact(&g).is_some());
        assert!(b.div_exact(&g).is_some());
    }

    #[test]
    fn heuristic_handles_dense_cofactors() {
        let v = crate::poly::VarTable::indexed("x", 3);
        let p = |t: &str| crate::poly::parse(t, &v).unwrap();
        let a = p("5*x1*x2^2 - 1/2*x2^2 - x1*x3 - 4*x2*x3 + x3");
        let b = p("x2^4 - 8/3*x3^4 - 9*x1*x2^2 + 7*x2*x3^2 - 8/3");
        let c = p("-7/2*x1^4 + 7*x2*x3^3 - 2/3*x1*x2 + x3^2");
        let start = std::time::Instant::now();
        assert_eq!(gcd(&(&a * &c), &(&b * &c)), normalize(&c));
        assert!(start.elapsed().as_secs() < 2);
    }

    #[test]
    fn vanishing_image_is_handled() {
        // evaluating x1 = x2 = x3 = 31 kills the first factor of `a`
        let v = crate::poly::VarTable::indexed("x", 5);
        let p = |t: &str| crate::poly::parse(t, &v).unwrap();
        let b = p("x4^2 - x5");
        let a = &p("x2^2 - x1*x3") * &b;
        let h = heuristic(&a, &b, &[0, 1, 2, 3, 4], &mut HEURISTIC_CALLS.clone());
        assert_eq!(h.map(|h| normalize(&h)), Some(b.clone()));
        assert_eq!(gcd(&a, &b), b);
    }

    #[test]
    fn heuristic_agrees_with_subresultants() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let random = |rng: &mut rand_chacha::ChaCha8Rng| {
            let terms: Vec<(i64, Vec<u16>)> =
                (0..rng.gen_range(1..4)).map(|_| (rng.gen_range(-5..=5), (0..3).map(|_| rng.gen_range(0..=2)).collect())).collect();
            let t: Vec<(i64, &[u16])> = terms.iter().map(|(c, e)| (*c, e.as_slice())).collect();
            Polynomial::from_int_terms(3, &t)
        };
        for _ in 0..200 {
            let (a, b, c) = (random(&mut rng), random(&mut rng), random(&mut rng));
            let (ac, bc) = (normalize(&(&a * &c)), normalize(&(&b * &c)));
            if ac.is_constant() || bc.is_constant() {
                continue;
            }
            let (ma, mb) = (ac.monomial_content(), bc.monomial_content());
            let (ac, bc) = (ac.div_monomial(&ma), bc.div_monomial(&mb));
            if ac.is_constant() || bc.is_constant() {
                continue;
            }
            let vars = [0, 1, 2];
            if let Some(h) = heuristic(&ac, &bc, &vars, &mut HEURISTIC_CALLS.clone()) {
                assert_eq!(normalize(&h), gcd_subresultant(&ac, &bc));
            }
        }
    }
}
