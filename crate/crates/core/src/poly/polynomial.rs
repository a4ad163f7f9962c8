//! Sparse multivariate polynomials in graded reverse lexicographic order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use super::coeff::{Coefficient, Domain, Rat};
use crate::error::{Error, Result};

/// An exponent vector together with its total degree.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    deg: u32,
    exps: SmallVec<[u16; 16]>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial {
            deg: 0,
            exps: SmallVec::from_elem(0, nvars),
        }
    }

    pub fn from_exps(exps: &[u16]) -> Self {
        Monomial {
            deg: exps.iter().map(|&e| e as u32).sum(),
            exps: SmallVec::from_slice(exps),
        }
    }

    pub fn var(nvars: usize, i: usize, e: u16) -> Self {
        let mut m = Monomial::one(nvars);
        m.exps[i] = e;
        m.deg = e as u32;
        m
    }

    pub fn exps(&self) -> &[u16] {
        &self.exps
    }

    pub fn exp(&self, i: usize) -> u16 {
        self.exps[i]
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn is_one(&self) -> bool {
        self.deg == 0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let exps = self
            .exps
            .iter()
            .zip(other.exps.iter())
            .map(|(a, b)| a.checked_add(*b).expect("exponent overflow"))
            .collect();
        Monomial {
            deg: self.deg + other.deg,
            exps,
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.deg <= other.deg && self.exps.iter().zip(other.exps.iter()).all(|(a, b)| a <= b)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        if !other.divides(self) {
            return None;
        }
        let exps = self
            .exps
            .iter()
            .zip(other.exps.iter())
            .map(|(a, b)| a - b)
            .collect();
        Some(Monomial {
            deg: self.deg - other.deg,
            exps,
        })
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let exps: SmallVec<[u16; 16]> = self
            .exps
            .iter()
            .zip(other.exps.iter())
            .map(|(a, b)| *a.min(b))
            .collect();
        Monomial {
            deg: exps.iter().map(|&e| e as u32).sum(),
            exps,
        }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let exps: SmallVec<[u16; 16]> = self
            .exps
            .iter()
            .zip(other.exps.iter())
            .map(|(a, b)| *a.max(b))
            .collect();
        Monomial {
            deg: exps.iter().map(|&e| e as u32).sum(),
            exps,
        }
    }

    pub(crate) fn set_exp(&mut self, i: usize, e: u16) {
        self.deg = self.deg - self.exps[i] as u32 + e as u32;
        self.exps[i] = e;
    }
}

impl Ord for Monomial {
    /// Graded reverse lexicographic comparison.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.deg.cmp(&other.deg) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for i in (0..self.exps.len()).rev() {
            match self.exps[i].cmp(&other.exps[i]) {
                Ordering::Equal => continue,
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps.as_slice())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Term {
    pub mono: Monomial,
    pub coeff: Coefficient,
}

/// A polynomial in `nvars` variables over a [`Domain`].
///
/// Terms are stored strictly descending in grevlex order with nonzero
/// coefficients; the zero polynomial has no terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    domain: Domain,
    terms: Vec<Term>,
}

struct HeapEntry {
    mono: Monomial,
    i: usize,
    j: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.mono == other.mono
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.mono.cmp(&other.mono)
    }
}

impl Polynomial {
    pub fn zero(nvars: usize, domain: Domain) -> Self {
        Polynomial {
            nvars,
            domain,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, domain: Domain, c: Coefficient) -> Self {
        let mut p = Polynomial::zero(nvars, domain);
        if !c.is_zero() {
            p.terms.push(Term {
                mono: Monomial::one(nvars),
                coeff: c,
            });
        }
        p
    }

    pub fn one(nvars: usize, domain: Domain) -> Self {
        Polynomial::constant(nvars, domain, domain.one())
    }

    pub fn from_int(nvars: usize, domain: Domain, v: i64) -> Self {
        Polynomial::constant(nvars, domain, domain.from_int(v))
    }

    pub fn from_rat(nvars: usize, r: Rat) -> Self {
        Polynomial::constant(nvars, Domain::Rational, Coefficient::Rational(r))
    }

    /// The variable `x_i` (zero-based).
    pub fn var(nvars: usize, domain: Domain, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        Polynomial {
            nvars,
            domain,
            terms: vec![Term {
                mono: Monomial::var(nvars, i, 1),
                coeff: domain.one(),
            }],
        }
    }

    pub fn monomial(domain: Domain, mono: Monomial, coeff: Coefficient) -> Self {
        let nvars = mono.nvars();
        let mut p = Polynomial::zero(nvars, domain);
        if !coeff.is_zero() {
            p.terms.push(Term { mono, coeff });
        }
        p
    }

    /// Builds a polynomial from arbitrary terms: sorts, merges and drops zeros.
    pub fn from_terms(nvars: usize, domain: Domain, mut terms: Vec<Term>) -> Self {
        terms.sort_by(|a, b| b.mono.cmp(&a.mono));
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            assert_eq!(t.mono.nvars(), nvars, "monomial arity mismatch");
            if let Some(last) = out.last_mut() {
                if last.mono == t.mono {
                    last.coeff = domain.add(&last.coeff, &t.coeff);
                    continue;
                }
            }
            out.push(t);
        }
        out.retain(|t| !t.coeff.is_zero());
        Polynomial {
            nvars,
            domain,
            terms: out,
        }
    }

    /// Wraps terms already strictly descending with nonzero coefficients.
    pub(crate) fn from_sorted_terms(nvars: usize, domain: Domain, terms: Vec<Term>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].mono > w[1].mono));
        debug_assert!(terms.iter().all(|t| !t.coeff.is_zero()));
        Polynomial {
            nvars,
            domain,
            terms,
        }
    }

    /// Convenience constructor over QQ from `(coefficient, exponents)` pairs.
    pub fn from_int_terms(nvars: usize, terms: &[(i64, &[u16])]) -> Self {
        let terms = terms
            .iter()
            .map(|(c, e)| {
                assert_eq!(e.len(), nvars);
                Term {
                    mono: Monomial::from_exps(e),
                    coeff: Coefficient::Rational(Rat::from_int(*c)),
                }
            })
            .collect();
        Polynomial::from_terms(nvars, Domain::Rational, terms)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].mono.is_one())
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].mono.is_one() && self.terms[0].coeff.is_one()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Constant term value if the polynomial is constant.
    pub fn constant_value(&self) -> Option<Coefficient> {
        if self.terms.is_empty() {
            Some(self.domain.zero())
        } else if self.is_constant() {
            Some(self.terms[0].coeff.clone())
        } else {
            None
        }
    }

    pub fn leading_term(&self) -> Option<&Term> {
        self.terms.first()
    }

    pub fn leading_coeff(&self) -> Coefficient {
        self.terms
            .first()
            .map(|t| t.coeff.clone())
            .unwrap_or_else(|| self.domain.zero())
    }

    /// Total degree; `None` plays the role of −∞ for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.first().map(|t| t.mono.degree())
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.mono.degree()).min()
    }

    pub fn degree_in(&self, i: usize) -> u16 {
        self.terms.iter().map(|t| t.mono.exp(i)).max().unwrap_or(0)
    }

    /// True for the zero polynomial and for polynomials whose terms share one degree.
    pub fn is_homogeneous(&self) -> bool {
        match self.terms.first() {
            None => true,
            Some(t) => self.terms.iter().all(|s| s.mono.degree() == t.mono.degree()),
        }
    }

    pub fn homogeneous_degree(&self) -> Option<u32> {
        if self.is_zero() || !self.is_homogeneous() {
            None
        } else {
            self.total_degree()
        }
    }

    /// Bitmask-free list of variables that occur.
    pub fn variables(&self) -> Vec<usize> {
        let mut seen = vec![false; self.nvars];
        for t in &self.terms {
            for (i, &e) in t.mono.exps().iter().enumerate() {
                if e > 0 {
                    seen[i] = true;
                }
            }
        }
        (0..self.nvars).filter(|&i| seen[i]).collect()
    }

    pub fn contains_var(&self, i: usize) -> bool {
        self.terms.iter().any(|t| t.mono.exp(i) > 0)
    }

    fn check_compatible(&self, other: &Polynomial) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch(format!(
                "{} vs {}",
                self.domain, other.domain
            )));
        }
        if self.nvars != other.nvars {
            return Err(Error::DomainMismatch(format!(
                "{} vs {} variables",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_compatible(other)?;
        Ok(self.add_impl(other, false))
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_compatible(other)?;
        Ok(self.add_impl(other, true))
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_compatible(other)?;
        Ok(self.mul_impl(other))
    }

    fn add_impl(&self, other: &Polynomial, subtract: bool) -> Polynomial {
        let dom = self.domain;
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        let b = &other.terms;
        while i < a.len() && j < b.len() {
            match a[i].mono.cmp(&b[j].mono) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if subtract { dom.neg(&b[j].coeff) } else { b[j].coeff.clone() };
                    out.push(Term {
                        mono: b[j].mono.clone(),
                        coeff: c,
                    });
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if subtract {
                        dom.sub(&a[i].coeff, &b[j].coeff)
                    } else {
                        dom.add(&a[i].coeff, &b[j].coeff)
                    };
                    if !c.is_zero() {
                        out.push(Term {
                            mono: a[i].mono.clone(),
                            coeff: c,
                        });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if subtract { dom.neg(&t.coeff) } else { t.coeff.clone() };
            out.push(Term {
                mono: t.mono.clone(),
                coeff: c,
            });
        }
        Polynomial::from_sorted_terms(self.nvars, dom, out)
    }

    fn mul_impl(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero(self.nvars, self.domain);
        }
        if self.terms.len() == 1 {
            return other.mul_term(&self.terms[0].mono, &self.terms[0].coeff);
        }
        if other.terms.len() == 1 {
            return self.mul_term(&other.terms[0].mono, &other.terms[0].coeff);
        }
        let dom = self.domain;
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc: FxHashMap<Monomial, Coefficient> = FxHashMap::default();
        acc.reserve(small.terms.len() * large.terms.len() / 2 + 1);
        for s in &small.terms {
            for l in &large.terms {
                let m = s.mono.mul(&l.mono);
                let c = dom.mul(&s.coeff, &l.coeff);
                match acc.entry(m) {
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        let v = dom.add(e.get(), &c);
                        *e.get_mut() = v;
                    }
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                }
            }
        }
        let mut terms: Vec<Term> = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(mono, coeff)| Term { mono, coeff })
            .collect();
        terms.sort_unstable_by(|a, b| b.mono.cmp(&a.mono));
        Polynomial::from_sorted_terms(self.nvars, dom, terms)
    }

    /// Multiplies by a single term `c * m`.
    pub fn mul_term(&self, m: &Monomial, c: &Coefficient) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars, self.domain);
        }
        let dom = self.domain;
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                mono: t.mono.mul(m),
                coeff: dom.mul(&t.coeff, c),
            })
            .filter(|t| !t.coeff.is_zero())
            .collect();
        Polynomial::from_sorted_terms(self.nvars, dom, terms)
    }

    pub fn scale(&self, c: &Coefficient) -> Polynomial {
        self.mul_term(&Monomial::one(self.nvars), c)
    }

    pub fn scale_int(&self, v: i64) -> Polynomial {
        self.scale(&self.domain.from_int(v))
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut result = Polynomial::one(self.nvars, self.domain);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Partial derivative with respect to `x_i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let dom = self.domain;
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let e = t.mono.exp(i);
            if e == 0 {
                continue;
            }
            let c = dom.mul(&t.coeff, &dom.from_int(e as i64));
            if c.is_zero() {
                continue;
            }
            let mut m = t.mono.clone();
            m.set_exp(i, e - 1);
            terms.push(Term { mono: m, coeff: c });
        }
        // lowering one exponent can reorder terms under grevlex
        Polynomial::from_terms(self.nvars, dom, terms)
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Polynomial) -> Option<Polynomial> {
        assert!(!d.is_zero(), "division by the zero polynomial");
        debug_assert_eq!(self.domain, d.domain);
        let dom = self.domain;
        if self.is_zero() {
            return Some(Polynomial::zero(self.nvars, dom));
        }
        if d.terms.len() == 1 {
            let dm = &d.terms[0].mono;
            let dc = &d.terms[0].coeff;
            let mut terms = Vec::with_capacity(self.terms.len());
            for t in &self.terms {
                terms.push(Term {
                    mono: t.mono.div(dm)?,
                    coeff: dom.div(&t.coeff, dc),
                });
            }
            return Some(Polynomial::from_sorted_terms(self.nvars, dom, terms));
        }
        let lead = &d.terms[0];
        if !lead.mono.divides(&self.terms[0].mono) {
            return None;
        }
        let last_self = &self.terms[self.terms.len() - 1].mono;
        let last_d = &d.terms[d.terms.len() - 1].mono;
        if !last_d.divides(last_self) {
            return None;
        }
        let mut q: Vec<Term> = Vec::new();
        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
        let mut k = 0;
        loop {
            let m = match (self.terms.get(k), heap.peek()) {
                (None, None) => break,
                (Some(t), None) => t.mono.clone(),
                (None, Some(h)) => h.mono.clone(),
                (Some(t), Some(h)) => {
                    if t.mono >= h.mono {
                        t.mono.clone()
                    } else {
                        h.mono.clone()
                    }
                }
            };
            let mut c = dom.zero();
            if k < self.terms.len() && self.terms[k].mono == m {
                c = self.terms[k].coeff.clone();
                k += 1;
            }
            while heap.peek().map(|h| h.mono == m).unwrap_or(false) {
                let h = heap.pop().unwrap();
                c = dom.sub(&c, &dom.mul(&q[h.i].coeff, &d.terms[h.j].coeff));
                if h.j + 1 < d.terms.len() {
                    heap.push(HeapEntry {
                        mono: q[h.i].mono.mul(&d.terms[h.j + 1].mono),
                        i: h.i,
                        j: h.j + 1,
                    });
                }
            }
            if c.is_zero() {
                continue;
            }
            let qm = m.div(&lead.mono)?;
            let qc = dom.div(&c, &lead.coeff);
            q.push(Term { mono: qm, coeff: qc });
            let i = q.len() - 1;
            heap.push(HeapEntry {
                mono: q[i].mono.mul(&d.terms[1].mono),
                i,
                j: 1,
            });
        }
        Some(Polynomial::from_sorted_terms(self.nvars, dom, q))
    }

    /// Evaluates at a point of the coefficient domain.
    pub fn evaluate(&self, point: &[Coefficient]) -> Coefficient {
        assert_eq!(point.len(), self.nvars);
        let dom = self.domain;
        let mut powers: Vec<Vec<Coefficient>> = Vec::with_capacity(self.nvars);
        for (i, x) in point.iter().enumerate() {
            let d = self.degree_in(i) as usize;
            let mut pw = Vec::with_capacity(d + 1);
            pw.push(dom.one());
            for k in 1..=d {
                let next = dom.mul(&pw[k - 1], x);
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut acc = dom.zero();
        for t in &self.terms {
            let mut v = t.coeff.clone();
            for (i, &e) in t.mono.exps().iter().enumerate() {
                if e > 0 {
                    v = dom.mul(&v, &powers[i][e as usize]);
                }
            }
            acc = dom.add(&acc, &v);
        }
        acc
    }

    /// Composition `self(values[0], ..., values[n-1])` with polynomial arguments.
    pub fn compose(&self, values: &[Polynomial]) -> Result<Polynomial> {
        if values.len() != self.nvars {
            return Err(Error::SizeMismatch(format!(
                "{} substitutions for {} variables",
                values.len(),
                self.nvars
            )));
        }
        let Some(first) = values.first() else {
            return Ok(self.clone());
        };
        let target_n = first.nvars;
        let dom = self.domain;
        for v in values {
            if v.nvars != target_n || v.domain != dom {
                return Err(Error::DomainMismatch("substituted polynomials disagree".into()));
            }
        }
        let mut powers: Vec<Vec<Polynomial>> = Vec::with_capacity(self.nvars);
        for (i, v) in values.iter().enumerate() {
            let d = self.degree_in(i) as usize;
            let mut pw = vec![Polynomial::one(target_n, dom)];
            for k in 1..=d {
                let next = &pw[k - 1] * v;
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut acc = Polynomial::zero(target_n, dom);
        for t in &self.terms {
            let mut prod = Polynomial::constant(target_n, dom, t.coeff.clone());
            for (i, &e) in t.mono.exps().iter().enumerate() {
                if e > 0 {
                    prod = &prod * &powers[i][e as usize];
                }
            }
            acc = &acc + &prod;
        }
        Ok(acc)
    }

    /// Reinterprets the polynomial in a larger or re-indexed variable set:
    /// variable `i` becomes variable `map[i]` of an `nvars`-variable ring.
    pub fn remap_vars(&self, nvars: usize, map: &[usize]) -> Polynomial {
        assert_eq!(map.len(), self.nvars);
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut e = vec![0u16; nvars];
                for (i, &x) in t.mono.exps().iter().enumerate() {
                    e[map[i]] += x;
                }
                Term {
                    mono: Monomial::from_exps(&e),
                    coeff: t.coeff.clone(),
                }
            })
            .collect();
        Polynomial::from_terms(nvars, self.domain, terms)
    }

    /// Coefficients with respect to `x_i`, as `(exponent, coefficient)` pairs,
    /// each coefficient free of `x_i`. Sorted by exponent ascending.
    pub fn coefficients_in(&self, i: usize) -> Vec<(u16, Polynomial)> {
        let mut buckets: Vec<Vec<Term>> = vec![Vec::new(); self.degree_in(i) as usize + 1];
        for t in &self.terms {
            let e = t.mono.exp(i);
            let mut m = t.mono.clone();
            m.set_exp(i, 0);
            buckets[e as usize].push(Term {
                mono: m,
                coeff: t.coeff.clone(),
            });
        }
        buckets
            .into_iter()
            .enumerate()
            .filter(|(_, b)| !b.is_empty())
            .map(|(e, b)| (e as u16, Polynomial::from_terms(self.nvars, self.domain, b)))
            .collect()
    }

    /// Componentwise minimum of all exponent vectors.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        match it.next() {
            None => Monomial::one(self.nvars),
            Some(t) => it.fold(t.mono.clone(), |acc, s| acc.gcd(&s.mono)),
        }
    }

    /// Divides every term by the monomial `m`, which must divide all of them.
    pub fn div_monomial(&self, m: &Monomial) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                mono: t.mono.div(m).expect("monomial divides every term"),
                coeff: t.coeff.clone(),
            })
            .collect();
        Polynomial::from_sorted_terms(self.nvars, self.domain, terms)
    }

    /// Whether every coefficient is an integer (always true over a prime field).
    pub fn is_integral(&self) -> bool {
        self.terms.iter().all(|t| match &t.coeff {
            Coefficient::Rational(r) => r.is_integer(),
            Coefficient::Residue(_) => true,
        })
    }

    /// Rational content: `c` with `self = c * q`, `q` integral with coprime
    /// integer coefficients and positive leading coefficient. Over a prime
    /// field the content is the leading coefficient.
    pub fn content(&self) -> Coefficient {
        match self.domain {
            Domain::Prime(_) => self.leading_coeff(),
            Domain::Rational => {
                if self.is_zero() {
                    return Coefficient::Rational(Rat::zero());
                }
                let mut num_gcd = BigInt::zero();
                let mut den_lcm = BigInt::one();
                for t in &self.terms {
                    let r = t.coeff.as_rat().unwrap();
                    num_gcd = num_gcd.gcd(&r.numer());
                    den_lcm = den_lcm.lcm(&r.denom());
                }
                let mut c = num_rational::BigRational::new(num_gcd, den_lcm);
                if self.terms[0].coeff.is_negative() {
                    c = -c;
                }
                Coefficient::Rational(Rat::from_big(c))
            }
        }
    }

    /// `self / content(self)`: primitive integral with positive leading coefficient over QQ, monic over ZZ/p.
    pub fn primitive_part(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.content();
        if c.is_one() {
            return self.clone();
        }
        let inv = self.domain.div(&self.domain.one(), &c);
        self.scale(&inv)
    }

    /// Coefficient-wise reduction modulo `p`.
    pub fn reduce_mod_p(&self, p: u64) -> Result<Polynomial> {
        let target = Domain::prime(p)?;
        if self.domain != Domain::Rational {
            return Err(Error::DomainMismatch("reduction expects a rational polynomial".into()));
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let c = target.from_rat(t.coeff.as_rat().unwrap())?;
            if !c.is_zero() {
                terms.push(Term {
                    mono: t.mono.clone(),
                    coeff: c,
                });
            }
        }
        Ok(Polynomial::from_sorted_terms(self.nvars, target, terms))
    }

    /// Sum of `|coefficient|` as `f64`, a crude magnitude scale.
    pub fn coefficient_l1(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| match &t.coeff {
                Coefficient::Rational(r) => r.to_f64().abs(),
                Coefficient::Residue(r) => *r as f64,
            })
            .sum()
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.checked_add(rhs).expect("incompatible polynomials")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.checked_sub(rhs).expect("incompatible polynomials")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.checked_mul(rhs).expect("incompatible polynomials")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        let dom = self.domain;
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                mono: t.mono.clone(),
                coeff: dom.neg(&t.coeff),
            })
            .collect();
        Polynomial::from_sorted_terms(self.nvars, dom, terms)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.nvars).map(|i| format!("x{i}")).collect();
        write!(f, "{}", super::render::render_with(self, &names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Polynomial {
        Polynomial::var(3, Domain::Rational, i)
    }

    #[test]
    fn difference_of_squares() {
        let p = &(&x(0) + &x(1)) * &(&x(0) - &x(1));
        let expect = &x(0).pow(2) - &x(1).pow(2);
        assert_eq!(p, expect);
    }

    #[test]
    fn annihilator_and_inverse() {
        let zero = Polynomial::zero(3, Domain::Rational);
        assert!((&x(0) * &zero).is_zero());
        let m = &(&x(0) * &x(1)) * &x(2);
        assert!((&m + &(-&m)).is_zero());
    }

    #[test]
    fn grevlex_order() {
        // x1*x3 < x2^2 in grevlex with x1 > x2 > x3
        let a = Monomial::from_exps(&[1, 0, 1]);
        let b = Monomial::from_exps(&[0, 2, 0]);
        assert!(a < b);
        let c = Monomial::from_exps(&[2, 0, 0]);
        assert!(c > b);
    }

    #[test]
    fn exact_division() {
        let a = &(&x(0) + &x(1)) * &(&x(1) - &x(2).scale_int(3));
        let q = a.div_exact(&(&x(0) + &x(1))).unwrap();
        assert_eq!(q, &x(1) - &x(2).scale_int(3));
        assert!(a.div_exact(&(&x(0) + &x(2))).is_none());
    }

    #[test]
    fn domain_mismatch_is_an_error() {
        let a = x(0);
        let b = Polynomial::var(3, Domain::Prime(7), 0);
        assert!(matches!(a.checked_add(&b), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn reduce_mod_examples() {
        let half = Polynomial::from_rat(1, Rat::new(1, 2));
        let p = &half * &Polynomial::var(1, Domain::Rational, 0);
        let r = p.reduce_mod_p(5).unwrap();
        assert_eq!(r.terms()[0].coeff, Coefficient::Residue(3));
        let third = &Polynomial::from_rat(1, Rat::new(1, 3)) * &Polynomial::var(1, Domain::Rational, 0);
        assert!(matches!(third.reduce_mod_p(3), Err(Error::BadPrime(_))));
    }
}
