//! Buchberger's algorithm over ZZ/p in grevlex, with the Gebauer-Möller
//! pair criteria and sugar selection.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::poly::{Coefficient, Domain, Monomial, Polynomial, Term};

/// Most variables an ideal may have.
pub const MAX_VARS: usize = 24;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct Mono {
    deg: u32,
    e: [u16; MAX_VARS],
}

impl Mono {
    fn one() -> Self {
        Mono { deg: 0, e: [0; MAX_VARS] }
    }

    fn from_monomial(m: &Monomial) -> Self {
        let mut out = Mono::one();
        for (i, &x) in m.exps().iter().enumerate() {
            out.e[i] = x;
        }
        out.deg = m.degree();
        out
    }

    fn to_monomial(self, n: usize) -> Monomial {
        Monomial::from_exps(&self.e[..n])
    }

    fn mask(&self) -> u32 {
        let mut m = 0u32;
        for (i, &x) in self.e.iter().enumerate() {
            if x > 0 {
                m |= 1 << i;
            }
        }
        m
    }

    fn divides(&self, other: &Mono) -> bool {
        self.deg <= other.deg && self.e.iter().zip(other.e.iter()).all(|(a, b)| a <= b)
    }

    fn mul(&self, other: &Mono) -> Mono {
        let mut e = [0u16; MAX_VARS];
        for i in 0..MAX_VARS {
            e[i] = self.e[i].checked_add(other.e[i]).expect("exponent overflow");
        }
        Mono { deg: self.deg + other.deg, e }
    }

    /// `self / other`, assuming divisibility.
    fn div(&self, other: &Mono) -> Mono {
        let mut e = [0u16; MAX_VARS];
        for i in 0..MAX_VARS {
            e[i] = self.e[i] - other.e[i];
        }
        Mono { deg: self.deg - other.deg, e }
    }

    fn lcm(&self, other: &Mono) -> Mono {
        let mut e = [0u16; MAX_VARS];
        let mut deg = 0;
        for i in 0..MAX_VARS {
            e[i] = self.e[i].max(other.e[i]);
            deg += e[i] as u32;
        }
        Mono { deg, e }
    }

    fn coprime(&self, other: &Mono) -> bool {
        self.e.iter().zip(other.e.iter()).all(|(a, b)| *a == 0 || *b == 0)
    }
}


impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.deg.cmp(&other.deg) {
            Ordering::Equal => {}
            o => return o,
        }
        for i in (0..MAX_VARS).rev() {
            match self.e[i].cmp(&other.e[i]) {
                Ordering::Equal => continue,
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (p as i64, a as i64);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1);
    t.rem_euclid(p as i64) as u64
}

/// Terms sorted strictly descending, coefficients in `[1, p)`.
pub(crate) type Poly = Vec<(Mono, u64)>;

fn make_monic(f: &mut Poly, p: u64) {
    if let Some(&(_, c)) = f.first() {
        if c != 1 {
            let inv = inv_mod(c, p);
            for t in f.iter_mut() {
                t.1 = mul_mod(t.1, inv, p);
            }
        }
    }
}

/// `a - c·m·b`, both sorted.
fn sub_mul(a: &[(Mono, u64)], c: u64, m: &Mono, b: &[(Mono, u64)], p: u64) -> Poly {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let neg = (p - c) % p;
    while i < a.len() || j < b.len() {
        if j == b.len() {
            out.extend_from_slice(&a[i..]);
            break;
        }
        let bm = b[j].0.mul(m);
        if i == a.len() {
            out.push((bm, mul_mod(neg, b[j].1, p)));
            j += 1;
            continue;
        }
        match a[i].0.cmp(&bm) {
            Ordering::Greater => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Less => {
                out.push((bm, mul_mod(neg, b[j].1, p)));
                j += 1;
            }
            Ordering::Equal => {
                let v = (a[i].1 + mul_mod(neg, b[j].1, p)) % p;
                if v != 0 {
                    out.push((bm, v));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Mono,
    sugar: u32,
}

struct Engine {
    p: u64,
    polys: Vec<Poly>,
    sugar: Vec<u32>,
    lm: Vec<Mono>,
    mask: Vec<u32>,
    basis: Vec<usize>,
    pairs: Vec<Pair>,
}

impl Engine {
    fn find_reducer(&self, m: &Mono) -> Option<usize> {
        let mm = m.mask();
        self.basis
            .iter()
            .copied()
            .find(|&g| self.mask[g] & !mm == 0 && self.lm[g].divides(m))
    }

    /// Normal form; with `full == false` only the leading term is reduced.
    fn reduce(&self, mut f: Poly, mut sugar: u32, full: bool) -> (Poly, u32) {
        let mut done: Poly = Vec::new();
        let mut pos = 0;
        while pos < f.len() {
            let (m, c) = f[pos];
            match self.find_reducer(&m) {
                Some(g) => {
                    let q = m.div(&self.lm[g]);
                    sugar = sugar.max(self.sugar[g] + q.deg);
                    f = sub_mul(&f[pos + 1..], c, &q, &self.polys[g][1..], self.p);
                    pos = 0;
                }
                None => {
                    if !full {
                        break;
                    }
                    done.push((m, c));
                    pos += 1;
                }
            }
        }
        if full {
            done.extend_from_slice(&f[pos..]);
            (done, sugar)
        } else {
            f.drain(..pos);
            (f, sugar)
        }
    }

    fn spoly(&self, pr: &Pair) -> Poly {
        let (a, b) = (&self.polys[pr.i], &self.polys[pr.j]);
        let qa = pr.lcm.div(&self.lm[pr.i]);
        let qb = pr.lcm.div(&self.lm[pr.j]);
        let scaled: Poly = a[1..].iter().map(|&(m, c)| (m.mul(&qa), c)).collect();
        sub_mul(&scaled, 1, &qb, &b[1..], self.p)
    }

    /// Adds a monic nonzero `h` and updates pairs (Gebauer-Möller).
    fn insert(&mut self, h: Poly, sugar: u32) {
        let k = self.polys.len();
        let lh = h[0].0;
        self.lm.push(lh);
        self.mask.push(lh.mask());
        self.polys.push(h);
        self.sugar.push(sugar);

        let mut cand: Vec<Pair> = self
            .basis
            .iter()
            .map(|&g| {
                let lcm = lh.lcm(&self.lm[g]);
                let s = (sugar + lcm.deg - lh.deg).max(self.sugar[g] + lcm.deg - self.lm[g].deg);
                Pair { i: g, j: k, lcm, sugar: s }
            })
            .collect();
        cand.reverse();
        let mut kept: Vec<Pair> = Vec::new();
        while let Some(c) = cand.pop() {
            let keep = self.lm[c.i].coprime(&lh)
                || (!cand.iter().any(|d| d.lcm.divides(&c.lcm))
                    && !kept.iter().any(|d| d.lcm.divides(&c.lcm)));
            if keep {
                kept.push(c);
            }
        }
        let new_pairs: Vec<Pair> = kept
            .into_iter()
            .filter(|c| !self.lm[c.i].coprime(&lh))
            .collect();

        let (lm, lh_ref) = (&self.lm, &lh);
        self.pairs.retain(|pr| {
            !(lh_ref.divides(&pr.lcm)
                && lh_ref.lcm(&lm[pr.i]) != pr.lcm
                && lh_ref.lcm(&lm[pr.j]) != pr.lcm)
        });
        self.pairs.extend(new_pairs);

        let lmv = &self.lm;
        self.basis.retain(|&g| !lh.divides(&lmv[g]));
        self.basis.push(k);
    }

    fn next_pair(&mut self) -> Option<Pair> {
        if self.pairs.is_empty() {
            return None;
        }
        let mut best = 0;
        for (idx, pr) in self.pairs.iter().enumerate() {
            let b = &self.pairs[best];
            if (pr.sugar, pr.lcm) < (b.sugar, b.lcm) {
                best = idx;
            }
        }
        Some(self.pairs.swap_remove(best))
    }
}

/// Reduced Gröbner basis over ZZ/p. Returns `None` when the ideal is the unit ideal.
pub(crate) fn buchberger(gens: Vec<Poly>, p: u64) -> Option<Vec<Poly>> {
    let mut eng = Engine {
        p,
        polys: Vec::new(),
        sugar: Vec::new(),
        lm: Vec::new(),
        mask: Vec::new(),
        basis: Vec::new(),
        pairs: Vec::new(),
    };
    let mut gens: Vec<Poly> = gens.into_iter().filter(|g| !g.is_empty()).collect();
    gens.sort_by(|a, b| a[0].0.cmp(&b[0].0));
    for g in gens {
        let s = g[0].0.deg;
        let (mut h, s) = eng.reduce(g, s, false);
        if h.is_empty() {
            continue;
        }
        if h[0].0.deg == 0 {
            return None;
        }
        make_monic(&mut h, p);
        eng.insert(h, s);
    }
    while let Some(pr) = eng.next_pair() {
        let sp = eng.spoly(&pr);
        if sp.is_empty() {
            continue;
        }
        let (mut h, s) = eng.reduce(sp, pr.sugar, false);
        if h.is_empty() {
            continue;
        }
        if h[0].0.deg == 0 {
            return None;
        }
        make_monic(&mut h, p);
        eng.insert(h, s);
    }

    // interreduce the minimal basis
    let mut idx = eng.basis.clone();
    idx.sort_by(|&a, &b| eng.lm[a].cmp(&eng.lm[b]));
    let mut out = Vec::with_capacity(idx.len());
    for &g in &idx {
        let lead = eng.polys[g][0];
        let (tail, _) = eng.reduce(eng.polys[g][1..].to_vec(), 0, true);
        let mut f = vec![lead];
        f.extend(tail);
        out.push(f);
    }
    Some(out)
}

pub(crate) fn to_internal(f: &Polynomial) -> Result<Poly> {
    if f.nvars() > MAX_VARS {
        return Err(Error::Input(format!("at most {MAX_VARS} variables are supported")));
    }
    f.terms()
        .iter()
        .map(|t| match t.coeff.as_residue() {
            Some(c) => Ok((Mono::from_monomial(&t.mono), c)),
            None => Err(Error::DomainMismatch("Gröbner bases need a prime field".into())),
        })
        .collect()
}

pub(crate) fn from_internal(f: &Poly, n: usize, p: u64) -> Polynomial {
    let terms = f
        .iter()
        .map(|&(m, c)| Term { mono: m.to_monomial(n), coeff: Coefficient::Residue(c) })
        .collect();
    Polynomial::from_terms(n, Domain::Prime(p), terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_mod() {
        for a in [1u64, 2, 17, 1000002] {
            assert_eq!(a * inv_mod(a, 1000003) % 1000003, 1);
        }
    }

    #[test]
    fn grevlex_matches_polynomial_order() {
        let a = Monomial::from_exps(&[1, 0, 1]);
        let b = Monomial::from_exps(&[0, 2, 0]);
        assert_eq!(
            Mono::from_monomial(&a).cmp(&Mono::from_monomial(&b)),
            a.cmp(&b)
        );
    }
}
