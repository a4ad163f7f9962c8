//! ML and homaloidal degrees by counting solutions of critical systems over ZZ/p.

mod groebner;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::{is_prime, Coefficient, Domain, Monomial, Polynomial, Rat, Term, VarTable};
use crate::symcalc::{adjugate, det_exact, SymMatrix};

pub use groebner::MAX_VARS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MonomialOrder {
    Grevlex,
}

/// Polynomials over one prime field sharing a variable table.
#[derive(Clone, Debug)]
pub struct Ideal {
    pub gens: Vec<Polynomial>,
    pub order: MonomialOrder,
    pub vars: VarTable,
    prime: u64,
}

impl Ideal {
    /// Zero generators are dropped.
    pub fn new(gens: Vec<Polynomial>, vars: VarTable) -> Result<Self> {
        let prime = match gens.first().map(|g| g.domain()) {
            Some(Domain::Prime(p)) => p,
            Some(Domain::Rational) => {
                return Err(Error::DomainMismatch("ideal generators must live over ZZ/p".into()))
            }
            None => return Err(Error::Input("an ideal needs at least one generator".into())),
        };
        if prime >= 1 << 32 {
            return Err(Error::BadPrime(format!("{prime} exceeds 2^32")));
        }
        for g in &gens {
            if g.domain() != Domain::Prime(prime) {
                return Err(Error::DomainMismatch("generators over different fields".into()));
            }
            if g.nvars() != vars.len() {
                return Err(Error::SizeMismatch(format!(
                    "generator in {} variables, table has {}",
                    g.nvars(),
                    vars.len()
                )));
            }
        }
        if vars.len() > MAX_VARS {
            return Err(Error::Input(format!("at most {MAX_VARS} variables are supported")));
        }
        let gens = gens.into_iter().filter(|g| !g.is_zero()).collect();
        Ok(Ideal { gens, order: MonomialOrder::Grevlex, vars, prime })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }
}

/// A reduced Gröbner basis, sorted by ascending leading monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct GroebnerBasis {
    pub polys: Vec<Polynomial>,
    pub nvars: usize,
    pub prime: u64,
}

impl GroebnerBasis {
    pub fn is_unit(&self) -> bool {
        self.polys.len() == 1 && self.polys[0].is_constant()
    }

    /// Coordinates of the unique point when the basis is `{x_i - a_i}`.
    pub fn point(&self) -> Option<Vec<u64>> {
        if self.polys.len() != self.nvars {
            return None;
        }
        let mut pt = vec![None; self.nvars];
        for g in &self.polys {
            let lt = g.leading_term()?;
            let i = (0..self.nvars).find(|&i| lt.mono == Monomial::var(self.nvars, i, 1))?;
            if g.len() > 2 || pt[i].is_some() {
                return None;
            }
            let c = if g.len() == 2 { g.terms()[1].coeff.as_residue()? } else { 0 };
            pt[i] = Some((self.prime - c) % self.prime);
        }
        let pt = pt.into_iter().collect::<Option<Vec<u64>>>()?;
        Some(pt)
    }
}

/// Reduced Gröbner basis of `ideal` in grevlex; the unit ideal gives `{1}`.
pub fn groebner(ideal: &Ideal) -> Result<GroebnerBasis> {
    let p = ideal.prime;
    let n = ideal.vars.len();
    let gens = ideal.gens.iter().map(groebner::to_internal).collect::<Result<Vec<_>>>()?;
    let polys = match groebner::buchberger(gens, p) {
        None => vec![Polynomial::one(n, Domain::Prime(p))],
        Some(b) => b.iter().map(|f| groebner::from_internal(f, n, p)).collect(),
    };
    Ok(GroebnerBasis { polys, nvars: n, prime: p })
}

/// Vector-space dimension of the quotient ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuotientDim {
    Finite(usize),
    NotZeroDimensional,
}

impl QuotientDim {
    pub fn finite(self) -> Option<usize> {
        match self {
            QuotientDim::Finite(d) => Some(d),
            QuotientDim::NotZeroDimensional => None,
        }
    }
}

impl Serialize for QuotientDim {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            QuotientDim::Finite(d) => s.serialize_u64(*d as u64),
            QuotientDim::NotZeroDimensional => s.serialize_str("not zero-dimensional"),
        }
    }
}

/// Number of standard monomials, or the sentinel when some variable has no
/// pure-power leading monomial.
pub fn quotient_dim(gb: &GroebnerBasis) -> QuotientDim {
    if gb.is_unit() {
        return QuotientDim::Finite(0);
    }
    let n = gb.nvars;
    let leads: Vec<Vec<u16>> = gb
        .polys
        .iter()
        .filter_map(|g| g.leading_term().map(|t| t.mono.exps().to_vec()))
        .collect();
    let mut bound = vec![0u16; n];
    for (i, b) in bound.iter_mut().enumerate() {
        let pure = leads
            .iter()
            .filter(|l| l.iter().enumerate().all(|(j, &e)| j == i || e == 0) && l[i] > 0)
            .map(|l| l[i])
            .min();
        match pure {
            Some(e) => *b = e,
            None => return QuotientDim::NotZeroDimensional,
        }
    }
    let mut cur = vec![0u16; n];
    QuotientDim::Finite(count_standard(&leads, &bound, &mut cur, 0))
}

fn count_standard(leads: &[Vec<u16>], bound: &[u16], cur: &mut Vec<u16>, i: usize) -> usize {
    let divisible = |m: &[u16]| leads.iter().any(|l| l.iter().zip(m).all(|(a, b)| a <= b));
    if i == cur.len() {
        return 1;
    }
    let mut total = 0;
    for e in 0..bound[i] {
        cur[i] = e;
        if divisible(cur) {
            break;
        }
        total += count_standard(leads, bound, cur, i + 1);
    }
    cur[i] = 0;
    total
}

/// Primes and data seeds; every (prime, seed) combination is one trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialConfig {
    pub primes: Vec<u64>,
    pub seeds: Vec<u64>,
}

pub const DEFAULT_PRIMES: [u64; 3] = [1_000_003, 1_000_033, 2_147_483_647];

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig { primes: DEFAULT_PRIMES.to_vec(), seeds: vec![0, 1, 2] }
    }
}

impl TrialConfig {
    /// Seeds `seed, seed + 1, ..., seed + trials - 1`.
    pub fn new(primes: Vec<u64>, trials: usize, seed: u64) -> Self {
        TrialConfig { primes, seeds: (0..trials as u64).map(|k| seed + k).collect() }
    }

    fn validate(&self) -> Result<()> {
        if self.primes.is_empty() || self.seeds.is_empty() {
            return Err(Error::Input("at least one prime and one seed are required".into()));
        }
        for &p in &self.primes {
            if p < 3 || p >= 1 << 32 || !is_prime(p) {
                return Err(Error::BadPrime(format!("{p} is not an odd prime below 2^32")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trial {
    pub prime: u64,
    pub seed: u64,
    pub dim: QuotientDim,
    /// A solution was read off and it annihilates the constraint gradient.
    pub singular: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeCertificate {
    /// The common count when trials agree, otherwise the largest finite count.
    pub degree: QuotientDim,
    pub primes: Vec<u64>,
    pub seeds: Vec<u64>,
    pub agreement: bool,
    pub singular_flag: bool,
    pub trials: Vec<Trial>,
}

impl DegreeCertificate {
    /// Every trial reported exactly one solution.
    pub fn is_one(&self) -> bool {
        self.agreement && self.degree == QuotientDim::Finite(1)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("certificate serializes")
    }

    fn from_trials(primes: Vec<u64>, seeds: Vec<u64>, trials: Vec<Trial>) -> Result<Self> {
        if trials.iter().all(|t| t.dim == QuotientDim::NotZeroDimensional) {
            return Err(Error::NotZeroDimensional);
        }
        let agreement = trials.windows(2).all(|w| w[0].dim == w[1].dim);
        let degree = if agreement {
            trials[0].dim
        } else {
            trials.iter().filter(|t| t.dim != QuotientDim::NotZeroDimensional).map(|t| t.dim).max().unwrap()
        };
        let singular_flag = trials.iter().any(|t| t.singular);
        Ok(DegreeCertificate { degree, primes, seeds, agreement, singular_flag, trials })
    }
}

/// Deterministic nonzero residues for trial `(p, seed)`.
pub fn random_residues(p: u64, seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ p);
    (0..count).map(|_| rng.gen_range(1..p)).collect()
}

fn extend_vars(f: &Polynomial, total: usize) -> Polynomial {
    let map: Vec<usize> = (0..f.nvars()).collect();
    f.remap_vars(total, &map)
}

fn residue(p: u64, v: u64) -> Coefficient {
    Coefficient::Residue(v % p)
}

/// Critical system `∂_i F - u_i F`, `t F - 1` in variables `x_1..x_n, t`.
pub fn homaloidal_system(f: &Polynomial, u: &[u64]) -> Result<Ideal> {
    let Domain::Prime(p) = f.domain() else {
        return Err(Error::DomainMismatch("expected a polynomial over ZZ/p".into()));
    };
    let n = f.nvars();
    if u.len() != n {
        return Err(Error::SizeMismatch(format!("{} data values for {n} variables", u.len())));
    }
    let dom = Domain::Prime(p);
    let fx = extend_vars(f, n + 1);
    let mut gens = Vec::with_capacity(n + 1);
    for (i, &ui) in u.iter().enumerate() {
        gens.push(&extend_vars(&f.derivative(i), n + 1) - &fx.scale(&residue(p, ui)));
    }
    let t = Polynomial::var(n + 1, dom, n);
    gens.push(&(&t * &fx) - &Polynomial::one(n + 1, dom));
    let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    names.push("t".into());
    Ideal::new(gens, VarTable::new(&names)?)
}

fn run_trials<F>(cfg: &TrialConfig, primes: Vec<u64>, trial: F) -> Result<DegreeCertificate>
where
    F: Fn(u64, u64) -> Result<Trial> + Sync,
{
    let jobs: Vec<(u64, u64)> =
        primes.iter().flat_map(|&p| cfg.seeds.iter().map(move |&s| (p, s))).collect();
    let trials = jobs.par_iter().map(|&(p, s)| trial(p, s)).collect::<Result<Vec<_>>>()?;
    DegreeCertificate::from_trials(primes, cfg.seeds.clone(), trials)
}

fn homaloidal_trials<R>(n: usize, cfg: &TrialConfig, primes: Vec<u64>, reduce: R) -> Result<DegreeCertificate>
where
    R: Fn(u64) -> Result<Polynomial> + Sync,
{
    run_trials(cfg, primes, |p, seed| {
        let fp = reduce(p)?;
        if fp.is_zero() {
            return Err(Error::BadPrime(format!("F vanishes modulo {p}")));
        }
        let ideal = homaloidal_system(&fp, &random_residues(p, seed, n))?;
        let dim = quotient_dim(&groebner(&ideal)?);
        Ok(Trial { prime: p, seed, dim, singular: false })
    })
}

fn check_form(f: &Polynomial) -> Result<()> {
    if f.is_zero() {
        return Err(Error::Input("F must be nonzero".into()));
    }
    if f.domain() != Domain::Rational {
        return Err(Error::DomainMismatch("F must have rational coefficients".into()));
    }
    if !f.is_homogeneous() {
        return Err(Error::NotHomogeneous("F".into()));
    }
    Ok(())
}

/// Degree of `∇ log F`: the number of critical points of `log F - u·x` for random `u`.
pub fn homaloidal_degree(f: &Polynomial, cfg: &TrialConfig) -> Result<DegreeCertificate> {
    check_form(f)?;
    cfg.validate()?;
    homaloidal_trials(f.nvars(), cfg, cfg.primes.clone(), |p| f.reduce_mod_p(p))
}

/// ML degree of `V(h) ⊂ Sym_2` for `F = det`, via Lagrange multipliers.
///
/// Variables are the upper triangle `k_ij`, then `λ`, then `t`.
pub fn ml_degree_hypersurface(h: &Polynomial, m: usize, cfg: &TrialConfig) -> Result<DegreeCertificate> {
    let n = m * (m + 1) / 2;
    if h.nvars() != n {
        return Err(Error::SizeMismatch(format!("h has {} variables, expected {n}", h.nvars())));
    }
    if h.domain() != Domain::Rational {
        return Err(Error::DomainMismatch("h must have rational coefficients".into()));
    }
    if h.is_constant() {
        return Err(Error::Input("h must be nonconstant".into()));
    }
    if n + 2 > MAX_VARS {
        return Err(Error::Input(format!("m = {m} is too large")));
    }
    cfg.validate()?;
    let kvars = VarTable::symmetric("k", m);
    let kmat = SymMatrix::generic(&kvars, Domain::Rational)?;
    let adj = adjugate(&kmat);
    let det = det_exact(&kmat);
    let half = Coefficient::Rational(Rat::new(1, 2));
    let mut grad: Vec<Polynomial> = Vec::with_capacity(n);
    for i in 0..m {
        for j in i..m {
            let d = h.derivative(kvars.sym_index(i, j)?);
            grad.push(if i == j { d } else { d.scale(&half) });
        }
    }
    let total = n + 2;
    run_trials(cfg, cfg.primes.clone(), |p, seed| {
        let dom = Domain::Prime(p);
        let s = random_residues(p, seed, n);
        let lam = Polynomial::var(total, dom, n);
        let t = Polynomial::var(total, dom, n + 1);
        let red = |f: &Polynomial| -> Result<Polynomial> { Ok(extend_vars(&f.reduce_mod_p(p)?, total)) };
        let grad_p = grad.iter().map(|g| g.reduce_mod_p(p)).collect::<Result<Vec<_>>>()?;
        let mut gens = Vec::with_capacity(n + 2);
        let mut slot = 0;
        for i in 0..m {
            for j in i..m {
                let a = red(adj.get(i, j))?;
                let g = extend_vars(&grad_p[slot], total);
                let e = &(&(&t * &a) - &Polynomial::constant(total, dom, residue(p, s[slot]))) - &(&lam * &g);
                gens.push(e);
                slot += 1;
            }
        }
        gens.push(red(h)?);
        gens.push(&(&t * &red(&det)?) - &Polynomial::one(total, dom));
        let mut names: Vec<String> = kvars.names().to_vec();
        names.push("lambda".into());
        names.push("t".into());
        let gb = groebner(&Ideal::new(gens, VarTable::new(&names)?)?)?;
        let dim = quotient_dim(&gb);
        let singular = match gb.point() {
            Some(pt) if dim == QuotientDim::Finite(1) => {
                let kp: Vec<Coefficient> = pt[..n].iter().map(|&v| Coefficient::Residue(v)).collect();
                grad_p.iter().all(|g| g.evaluate(&kp).is_zero())
            }
            _ => false,
        };
        Ok(Trial { prime: p, seed, dim, singular })
    })
}

/// An element `re + im·i` of QQ(i).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gaussian {
    pub re: Rat,
    pub im: Rat,
}

impl Gaussian {
    pub fn new(re: Rat, im: Rat) -> Self {
        Gaussian { re, im }
    }

    pub fn real(re: Rat) -> Self {
        Gaussian { re, im: Rat::zero() }
    }

    pub fn int(v: i64) -> Self {
        Gaussian::real(Rat::from_int(v))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Parses `a + b*i` with rational `a`, `b`, e.g. `"1/2 - 3*i"`.
    pub fn parse(text: &str) -> Result<Gaussian> {
        let vars = VarTable::new(&["i"])?;
        let p = crate::poly::parse(text, &vars)?;
        if p.total_degree().unwrap_or(0) > 1 {
            return Err(Error::Input(format!("`{text}` is not of the form a + b*i")));
        }
        let mut g = Gaussian::int(0);
        for t in p.terms() {
            let c = t.coeff.as_rat().expect("rational parse").clone();
            if t.mono.exp(0) == 1 {
                g.im = c;
            } else {
                g.re = c;
            }
        }
        Ok(g)
    }

    fn add(&self, o: &Gaussian) -> Gaussian {
        Gaussian::new(self.re.add(&o.re), self.im.add(&o.im))
    }

    fn sub(&self, o: &Gaussian) -> Gaussian {
        Gaussian::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }

    fn mul(&self, o: &Gaussian) -> Gaussian {
        Gaussian::new(
            self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        )
    }

    fn div(&self, o: &Gaussian) -> Gaussian {
        let norm = o.re.mul(&o.re).add(&o.im.mul(&o.im));
        let conj = Gaussian::new(o.re.clone(), o.im.neg());
        let num = self.mul(&conj);
        Gaussian::new(num.re.div(&norm), num.im.div(&norm))
    }
}

fn gaussian_rank(rows: &[Vec<Gaussian>]) -> usize {
    let mut a = rows.to_vec();
    let cols = a.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(rank, piv);
        for r in 0..a.len() {
            if r != rank && !a[r][c].is_zero() {
                let f = a[r][c].div(&a[rank][c]);
                for k in c..cols {
                    let v = a[r][k].sub(&f.mul(&a[rank][k]));
                    a[r][k] = v;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// A square root of `-1` modulo a prime `p ≡ 1 (mod 4)`.
fn sqrt_minus_one(p: u64) -> u64 {
    let c = (2..p).find(|&c| pow_mod(c, (p - 1) / 2, p) == p - 1).expect("non-residue exists");
    pow_mod(c, (p - 1) / 4, p)
}

fn next_prime_1_mod_4(p: u64) -> u64 {
    (p..).find(|&q| q % 4 == 1 && is_prime(q)).unwrap()
}

/// ED degree of the span of `basis` in `C^n`: the homaloidal degree of the
/// Fermat quadric restricted to it.
///
/// When the restricted quadric has non-real coefficients each prime
/// `≡ 3 (mod 4)` is replaced by the next prime `≡ 1 (mod 4)`, so that `i`
/// exists in the field; the certificate lists the primes actually used.
pub fn ed_degree_linear(basis: &[Vec<Gaussian>], n: usize, cfg: &TrialConfig) -> Result<DegreeCertificate> {
    let d = basis.len();
    if d == 0 {
        return Err(Error::Input("empty basis".into()));
    }
    if basis.iter().any(|b| b.len() != n) {
        return Err(Error::SizeMismatch(format!("basis vectors must have length {n}")));
    }
    if gaussian_rank(basis) < d {
        return Err(Error::Input("basis vectors are linearly dependent".into()));
    }
    cfg.validate()?;
    let mut gram = vec![vec![Gaussian::int(0); d]; d];
    for j in 0..d {
        for k in 0..d {
            let mut acc = Gaussian::int(0);
            for i in 0..n {
                acc = acc.add(&basis[j][i].mul(&basis[k][i]));
            }
            gram[j][k] = acc;
        }
    }
    if gram.iter().flatten().all(|g| g.is_zero()) {
        return Err(Error::Input("the subspace lies on the quadric".into()));
    }
    let quadric = |re_of: &dyn Fn(&Gaussian) -> Result<Coefficient>, dom: Domain| -> Result<Polynomial> {
        let mut terms = Vec::new();
        for j in 0..d {
            for k in 0..d {
                let mut e = vec![0u16; d];
                e[j] += 1;
                e[k] += 1;
                terms.push(Term { mono: Monomial::from_exps(&e), coeff: re_of(&gram[j][k])? });
            }
        }
        Ok(Polynomial::from_terms(d, dom, terms))
    };
    let real = gram.iter().flatten().all(|g| g.im.is_zero());
    if real {
        let f = quadric(&|g| Ok(Coefficient::Rational(g.re.clone())), Domain::Rational)?;
        return homaloidal_trials(d, cfg, cfg.primes.clone(), |p| f.reduce_mod_p(p));
    }
    let primes: Vec<u64> =
        cfg.primes.iter().map(|&p| if p % 4 == 1 { p } else { next_prime_1_mod_4(p) }).collect();
    if let Some(&q) = primes.iter().find(|&&q| q >= 1 << 32) {
        return Err(Error::BadPrime(format!("{q} exceeds 2^32")));
    }
    homaloidal_trials(d, cfg, primes, |p| {
        let i = sqrt_minus_one(p);
        quadric(
            &|g| {
                let re = g.re.reduce_mod(p)?;
                let im = g.im.reduce_mod(p)?;
                Ok(Coefficient::Residue((re + im * i % p) % p))
            },
            Domain::Prime(p),
        )
    })
}
