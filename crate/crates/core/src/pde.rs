//! Verification of the homaloidal PDE `Φ = F∘(−∇logΦ)` and the conditions on MLE maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{
    gcd, render_with, Coefficient, Domain, Polynomial, Rat, RationalFunction, Term, VarTable,
};
use crate::symcalc::{self, grad_sym_log, SymMatrix};

/// How gradients are identified with the primal space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// Plain partial derivatives; `F` is any homogeneous polynomial.
    Generic,
    /// Trace pairing on `m × m` symmetric matrices; `F` is the determinant.
    Symmetric(usize),
}

impl Convention {
    /// The dual variable table used by this convention for `n` variables.
    pub fn dual_vars(&self, n: usize) -> VarTable {
        match *self {
            Convention::Generic => VarTable::indexed("u", n),
            Convention::Symmetric(m) => VarTable::symmetric("s", m),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    /// Evaluate at five random points mod a large prime first; a mismatch
    /// rejects without the symbolic subtraction.
    pub fast_path: Option<u64>,
    /// Accept `Φ` when `c·Φ` is a solution for a nonzero constant `c`.
    pub normalize_scalar: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdeReport {
    pub holds: bool,
    /// `F∘(−∇logΦ) − Φ`, or `None` when the fast path rejected.
    pub residual: Option<RationalFunction>,
    pub homogeneity_ok: bool,
    pub euler_ok: bool,
    /// Set when scalar normalization was needed: `scalar · Φ` is the solution.
    pub scalar: Option<Rat>,
    pub fast_path_rejected: bool,
}

#[derive(Serialize)]
struct ReportJson {
    holds: bool,
    residual: Option<String>,
    homogeneity_ok: bool,
    euler_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    scalar: Option<String>,
    fast_path_rejected: bool,
}

impl PdeReport {
    pub fn to_json(&self, vars: &VarTable) -> serde_json::Value {
        let js = ReportJson {
            holds: self.holds,
            residual: self.residual.as_ref().map(|r| render_truncated(r, vars, 10)),
            homogeneity_ok: self.homogeneity_ok,
            euler_ok: self.euler_ok,
            scalar: self.scalar.as_ref().map(|s| s.to_string()),
            fast_path_rejected: self.fast_path_rejected,
        };
        serde_json::to_value(js).expect("report serializes")
    }
}

fn truncate(p: &Polynomial, names: &[String], limit: usize) -> String {
    if p.len() <= limit {
        return render_with(p, names);
    }
    let head: Vec<Term> = p.terms()[..limit].to_vec();
    let q = Polynomial::from_terms(p.nvars(), p.domain(), head);
    format!("{} + ... ({} terms)", render_with(&q, names), p.len())
}

/// Renders a rational function keeping at most `limit` terms of numerator and denominator.
pub fn render_truncated(f: &RationalFunction, vars: &VarTable, limit: usize) -> String {
    let names = vars.names();
    let n = truncate(f.num(), names, limit);
    if f.den().is_one() {
        return n;
    }
    format!("({})/({})", n, truncate(f.den(), names, limit))
}

fn sym_det(m: usize) -> Polynomial {
    let v = VarTable::symmetric("s", m);
    symcalc::det_exact(&SymMatrix::generic(&v, Domain::Rational).expect("generic matrix"))
}

fn validate(f: &Polynomial, phi: &RationalFunction, conv: Convention) -> Result<u32> {
    let d = f
        .homogeneous_degree()
        .ok_or_else(|| Error::NotHomogeneous("F must be homogeneous".into()))?;
    if f.nvars() != phi.nvars() {
        return Err(Error::SizeMismatch(format!(
            "F has {} variables, Φ has {}",
            f.nvars(),
            phi.nvars()
        )));
    }
    if phi.is_zero() {
        return Err(Error::Input("Φ is identically zero".into()));
    }
    if let Convention::Symmetric(m) = conv {
        if f.nvars() != m * (m + 1) / 2 {
            return Err(Error::SizeMismatch(format!("{} variables for m = {m}", f.nvars())));
        }
        if *f != sym_det(m) {
            return Err(Error::Input("symmetric convention requires F = det".into()));
        }
    }
    Ok(d)
}

/// `−∇logΦ` as a coordinate vector (generic) or a symmetric matrix.
pub fn mle_of(phi: &RationalFunction, conv: Convention) -> Result<Mle> {
    match conv {
        Convention::Generic => Ok(Mle::Vector(phi.grad_log()?.iter().map(|g| g.neg()).collect())),
        Convention::Symmetric(m) => {
            let v = VarTable::symmetric("s", m);
            let g = grad_sym_log(phi, &v)?;
            Ok(Mle::Matrix(g.map(g.template().clone(), |e| e.neg())))
        }
    }
}

/// An MLE map in either convention.
#[derive(Clone, Debug, PartialEq)]
pub enum Mle {
    Vector(Vec<RationalFunction>),
    Matrix(SymMatrix<RationalFunction>),
}

impl Mle {
    /// Coordinates in variable order (the upper triangle for matrices).
    pub fn coordinates(&self) -> Vec<RationalFunction> {
        match self {
            Mle::Vector(v) => v.clone(),
            Mle::Matrix(m) => m.upper().to_vec(),
        }
    }

    /// `F∘Ψ`: the determinant for matrices.
    pub fn apply(&self, f: &Polynomial) -> Result<RationalFunction> {
        match self {
            Mle::Vector(v) => RationalFunction::from_poly(f.clone()).substitute(v),
            Mle::Matrix(m) => Ok(symcalc::det_rational(m)),
        }
    }

    /// `Σ u_i ψ_i`, resp. `tr(SΨ)`.
    pub fn euler_pairing(&self) -> RationalFunction {
        match self {
            Mle::Vector(v) => {
                let n = v.first().map(|x| x.nvars()).unwrap_or(0);
                let mut acc = RationalFunction::zero(n, Domain::Rational);
                for (i, e) in v.iter().enumerate() {
                    acc = &acc + &e.mul_poly(&Polynomial::var(n, e.domain(), i));
                }
                acc
            }
            Mle::Matrix(m) => {
                let s = SymMatrix::generic_rational(&VarTable::symmetric("s", m.size()))
                    .expect("generic matrix");
                s.trace_product(m)
            }
        }
    }

    pub fn evaluate(&self, point: &[Coefficient]) -> Option<Vec<Coefficient>> {
        self.coordinates().iter().map(|e| e.evaluate(point)).collect()
    }

    pub fn reduce_mod_p(&self, p: u64) -> Result<Mle> {
        Ok(match self {
            Mle::Vector(v) => Mle::Vector(v.iter().map(|e| e.reduce_mod_p(p)).collect::<Result<_>>()?),
            Mle::Matrix(m) => {
                let t = RationalFunction::zero(m.template().nvars(), Domain::Prime(p));
                Mle::Matrix(m.try_map(t, |e| e.reduce_mod_p(p))?)
            }
        })
    }
}

fn entries_homogeneous_minus_one(mle: &Mle) -> bool {
    mle.coordinates()
        .iter()
        .all(|e| e.is_zero() || e.homogeneous_degree() == Some(-1))
}

const FAST_PRIME: u64 = 2_147_483_647;

/// Determinant of a numeric matrix over `dom` by elimination.
pub(crate) fn det_numeric(mut a: Vec<Vec<Coefficient>>, dom: Domain) -> Coefficient {
    let n = a.len();
    let mut det = dom.one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return dom.zero();
        };
        if p != k {
            a.swap(p, k);
            det = dom.neg(&det);
        }
        let piv = a[k][k].clone();
        det = dom.mul(&det, &piv);
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = dom.div(&a[i][k], &piv);
            for j in k..n {
                let t = dom.mul(&f, &a[k][j]);
                a[i][j] = dom.sub(&a[i][j], &t);
            }
        }
    }
    det
}

/// Random-point test mod a prime. `Some(false)` is a certain rejection.
fn fast_reject(f: &Polynomial, phi: &RationalFunction, conv: Convention, seed: u64) -> Option<bool> {
    let p = FAST_PRIME;
    let dom = Domain::Prime(p);
    let phip = phi.reduce_mod_p(p).ok()?;
    let mle = mle_of(&phip, conv).ok()?;
    let fp = f.reduce_mod_p(p).ok()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = phi.nvars();
    let mut tested = 0;
    let mut attempts = 0;
    while tested < 5 && attempts < 50 {
        attempts += 1;
        let pt: Vec<Coefficient> = (0..n).map(|_| Coefficient::Residue(rng.gen_range(1..p))).collect();
        let Some(lhs) = phip.evaluate(&pt) else { continue };
        let Some(psi) = mle.evaluate(&pt) else { continue };
        let rhs = match (&mle, conv) {
            (Mle::Matrix(_), Convention::Symmetric(m)) => {
                let mut rows = vec![vec![dom.zero(); m]; m];
                let mut k = 0;
                for i in 0..m {
                    for j in i..m {
                        rows[i][j] = psi[k].clone();
                        rows[j][i] = psi[k].clone();
                        k += 1;
                    }
                }
                det_numeric(rows, dom)
            }
            _ => fp.evaluate(&psi),
        };
        if lhs != rhs {
            return Some(false);
        }
        tested += 1;
    }
    Some(true)
}

/// Strict check: the PDE must hold exactly.
pub fn check(f: &Polynomial, phi: &RationalFunction, conv: Convention) -> Result<PdeReport> {
    check_with(f, phi, conv, &CheckOptions::default())
}

pub fn check_with(
    f: &Polynomial,
    phi: &RationalFunction,
    conv: Convention,
    opts: &CheckOptions,
) -> Result<PdeReport> {
    let d = validate(f, phi, conv)?;
    let homogeneity_ok = phi.homogeneous_degree() == Some(-(d as i64));
    if let Some(seed) = opts.fast_path {
        if !opts.normalize_scalar && fast_reject(f, phi, conv, seed) == Some(false) {
            return Ok(PdeReport {
                holds: false,
                residual: None,
                homogeneity_ok,
                euler_ok: false,
                scalar: None,
                fast_path_rejected: true,
            });
        }
    }
    let mle = mle_of(phi, conv)?;
    let expected_pairing = match conv {
        Convention::Generic => d as i64,
        Convention::Symmetric(m) => m as i64,
    };
    let euler_ok = mle.euler_pairing() == RationalFunction::from_int(phi.nvars(), Domain::Rational, expected_pairing);
    let value = mle.apply(f)?;
    let residual = &value - phi;
    if residual.is_zero() {
        return Ok(PdeReport {
            holds: true,
            residual: Some(residual),
            homogeneity_ok,
            euler_ok,
            scalar: None,
            fast_path_rejected: false,
        });
    }
    if opts.normalize_scalar {
        let ratio = value.checked_div(phi)?;
        if let Some(Coefficient::Rational(c)) = ratio.constant_value() {
            if !c.is_zero() {
                return Ok(PdeReport {
                    holds: true,
                    residual: Some(RationalFunction::zero(phi.nvars(), Domain::Rational)),
                    homogeneity_ok,
                    euler_ok,
                    scalar: Some(c),
                    fast_path_rejected: false,
                });
            }
        }
    }
    Ok(PdeReport {
        holds: false,
        residual: Some(residual),
        homogeneity_ok,
        euler_ok,
        scalar: None,
        fast_path_rejected: false,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MleReport {
    /// Every entry is homogeneous of degree −1.
    pub homogeneous: bool,
    /// `∇ log(F∘Ψ) = −Ψ`.
    pub gradient_identity: bool,
    /// `F∘Ψ`, present when both conditions hold.
    pub phi: Option<RationalFunction>,
}

impl MleReport {
    pub fn holds(&self) -> bool {
        self.homogeneous && self.gradient_identity
    }
}

/// Both conditions on a candidate MLE map `Ψ` (generic coordinates).
pub fn check_mle_conditions(f: &Polynomial, psi: &[RationalFunction]) -> Result<MleReport> {
    if psi.len() != f.nvars() {
        return Err(Error::SizeMismatch(format!(
            "{} coordinates for {} variables",
            psi.len(),
            f.nvars()
        )));
    }
    mle_conditions(f, &Mle::Vector(psi.to_vec()), Convention::Generic)
}

/// Both conditions for a symmetric-matrix MLE with `F = det`.
pub fn check_mle_conditions_sym(psi: &SymMatrix<RationalFunction>) -> Result<MleReport> {
    let m = psi.size();
    mle_conditions(&sym_det(m), &Mle::Matrix(psi.clone()), Convention::Symmetric(m))
}

fn mle_conditions(f: &Polynomial, mle: &Mle, conv: Convention) -> Result<MleReport> {
    let homogeneous = entries_homogeneous_minus_one(mle);
    let phi = mle.apply(f)?;
    if phi.is_zero() {
        return Ok(MleReport { homogeneous, gradient_identity: false, phi: None });
    }
    let gradient_identity = mle_of(&phi, conv)? == *mle;
    let ok = homogeneous && gradient_identity;
    Ok(MleReport {
        homogeneous,
        gradient_identity,
        phi: ok.then_some(phi),
    })
}

/// `ψ_i = c_i ∏ f^{α_{i,f}}` for one coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateFactorization {
    pub scalar: Rat,
    pub factors: Vec<(Polynomial, i32)>,
}

impl CoordinateFactorization {
    pub fn product(&self, nvars: usize) -> Result<RationalFunction> {
        let mut acc = RationalFunction::from_rat(nvars, self.scalar.clone());
        for (f, a) in &self.factors {
            acc = acc.checked_mul(&RationalFunction::from_poly(f.clone()).pow(*a)?)?;
        }
        Ok(acc)
    }
}

/// Claimed prime factorizations of every coordinate of `Ψ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationClaim {
    pub coordinates: Vec<CoordinateFactorization>,
}

impl FactorizationClaim {
    /// Splits each coordinate against the candidate factors by repeated exact
    /// division; leftover non-constant parts become claimed factors themselves.
    pub fn from_candidates(psi: &[RationalFunction], candidates: &[Polynomial]) -> Result<Self> {
        let cands: Vec<Polynomial> = candidates.iter().map(normal_factor).collect();
        let mut coordinates = Vec::with_capacity(psi.len());
        for e in psi {
            if e.is_zero() {
                coordinates.push(CoordinateFactorization { scalar: Rat::zero(), factors: vec![] });
                continue;
            }
            let mut factors = Vec::new();
            let mut num = e.num().clone();
            let mut den = e.den().clone();
            for c in &cands {
                let mut a = 0i32;
                while !num.is_constant() {
                    match num.div_exact(c) {
                        Some(q) => {
                            num = q;
                            a += 1;
                        }
                        None => break,
                    }
                }
                while !den.is_constant() {
                    match den.div_exact(c) {
                        Some(q) => {
                            den = q;
                            a -= 1;
                        }
                        None => break,
                    }
                }
                if a != 0 {
                    factors.push((c.clone(), a));
                }
            }
            let mut scalar = Rat::one();
            for (rest, sign) in [(num, 1), (den, -1)] {
                if rest.is_constant() {
                    let v = rest.constant_value().and_then(|c| c.as_rat().cloned()).expect("rational");
                    scalar = if sign > 0 { scalar.mul(&v) } else { scalar.div(&v) };
                } else {
                    let nf = normal_factor(&rest);
                    let c = rest.div_exact(&nf).expect("scalar multiple");
                    let v = c.constant_value().and_then(|c| c.as_rat().cloned()).expect("rational");
                    scalar = if sign > 0 { scalar.mul(&v) } else { scalar.div(&v) };
                    factors.push((nf, sign));
                }
            }
            coordinates.push(CoordinateFactorization { scalar, factors });
        }
        Ok(FactorizationClaim { coordinates })
    }
}

/// Primitive with positive leading coefficient.
fn normal_factor(p: &Polynomial) -> Polynomial {
    let q = p.primitive_part();
    if q.leading_coeff().is_negative() {
        -&q
    } else {
        q
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorReport {
    /// No exponent below −1.
    pub denominators_linear: bool,
    /// Denominator factors depend exactly on the coordinates whose denominators they divide.
    pub support_ok: bool,
    /// Every claimed factor passes the squarefree test (irreducibility is not checked).
    pub squarefree_ok: bool,
}

impl FactorReport {
    pub fn holds(&self) -> bool {
        self.denominators_linear && self.support_ok && self.squarefree_ok
    }
}

pub fn check_factor_claim(psi: &[RationalFunction], claim: &FactorizationClaim) -> Result<FactorReport> {
    if psi.len() != claim.coordinates.len() {
        return Err(Error::BadClaim(format!(
            "{} coordinates claimed for {}",
            claim.coordinates.len(),
            psi.len()
        )));
    }
    let n = psi.first().map(|p| p.nvars()).unwrap_or(0);
    for (i, (e, c)) in psi.iter().zip(&claim.coordinates).enumerate() {
        if c.product(n)? != *e {
            return Err(Error::BadClaim(format!("claim does not reproduce coordinate {i}")));
        }
    }
    // merge factors that agree up to scalars
    let mut distinct: Vec<Polynomial> = Vec::new();
    let mut alpha: Vec<Vec<i32>> = vec![Vec::new(); psi.len()];
    for (i, c) in claim.coordinates.iter().enumerate() {
        for (f, a) in &c.factors {
            let nf = normal_factor(f);
            let k = match distinct.iter().position(|d| *d == nf) {
                Some(k) => k,
                None => {
                    distinct.push(nf);
                    distinct.len() - 1
                }
            };
            if alpha[i].len() < distinct.len() {
                alpha[i].resize(distinct.len(), 0);
            }
            alpha[i][k] += a;
        }
    }
    for row in alpha.iter_mut() {
        row.resize(distinct.len(), 0);
    }
    let denominators_linear = alpha.iter().flatten().all(|&a| a >= -1);
    let mut support_ok = true;
    for (k, f) in distinct.iter().enumerate() {
        if !alpha.iter().any(|row| row[k] == -1) {
            continue;
        }
        for (j, row) in alpha.iter().enumerate() {
            let depends = !f.derivative(j).is_zero();
            if depends != (row[k] == -1) {
                support_ok = false;
            }
        }
    }
    let squarefree_ok = distinct.iter().all(squarefree_check);
    Ok(FactorReport { denominators_linear, support_ok, squarefree_ok })
}

/// True iff `gcd(p, ∂p/∂x_1, …, ∂p/∂x_n)` is constant.
pub fn squarefree_check(p: &Polynomial) -> bool {
    if p.is_zero() {
        return false;
    }
    let mut g = p.clone();
    for i in 0..p.nvars() {
        if g.is_constant() {
            break;
        }
        let d = p.derivative(i);
        if !d.is_zero() {
            g = gcd(&g, &d);
        }
    }
    g.is_constant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse, parse_rational};

    #[test]
    fn diagonal_generic() {
        let x = VarTable::indexed("x", 3);
        let u = VarTable::indexed("u", 3);
        let f = parse("x1*x2*x3", &x).unwrap();
        let phi = parse_rational("1/(u1*u2*u3)", &u).unwrap();
        let r = check(&f, &phi, Convention::Generic).unwrap();
        assert!(r.holds && r.homogeneity_ok && r.euler_ok);
    }

    #[test]
    fn full_model_symmetric() {
        let s = VarTable::symmetric("s", 2);
        let phi = parse_rational("1/(s11*s22 - s12^2)", &s).unwrap();
        let r = check(&sym_det(2), &phi, Convention::Symmetric(2)).unwrap();
        assert!(r.holds && r.euler_ok);
    }

    #[test]
    fn wrong_scalar() {
        let s = VarTable::symmetric("s", 2);
        let phi = parse_rational("3/(s11*s22 - s12^2)", &s).unwrap();
        let r = check(&sym_det(2), &phi, Convention::Symmetric(2)).unwrap();
        assert!(!r.holds);
        let opts = CheckOptions { normalize_scalar: true, ..Default::default() };
        let r = check_with(&sym_det(2), &phi, Convention::Symmetric(2), &opts).unwrap();
        assert!(r.holds);
        assert_eq!(r.scalar, Some(Rat::new(1, 3)));
    }

    #[test]
    fn fast_path_rejects() {
        let s = VarTable::symmetric("s", 2);
        let phi = parse_rational("1/(s11*s22 + s12^2)", &s).unwrap();
        let opts = CheckOptions { fast_path: Some(7), ..Default::default() };
        let r = check_with(&sym_det(2), &phi, Convention::Symmetric(2), &opts).unwrap();
        assert!(!r.holds && r.fast_path_rejected && r.residual.is_none());
    }

    #[test]
    fn symmetric_needs_det() {
        let s = VarTable::symmetric("s", 2);
        let phi = parse_rational("1/(s11*s22)", &s).unwrap();
        let f = parse("s11*s22", &s).unwrap();
        assert!(check(&f, &phi, Convention::Symmetric(2)).is_err());
    }

    #[test]
    fn not_homogeneous() {
        let x = VarTable::indexed("x", 2);
        let f = parse("x1 + x2^2", &x).unwrap();
        let phi = parse_rational("1/x1", &x).unwrap();
        assert!(matches!(check(&f, &phi, Convention::Generic), Err(Error::NotHomogeneous(_))));
    }

    #[test]
    fn squarefree() {
        let x = VarTable::indexed("x", 2);
        assert!(squarefree_check(&parse("x1*x2", &x).unwrap()));
        assert!(!squarefree_check(&parse("x1^2", &x).unwrap()));
        assert!(!squarefree_check(&parse("x1^2*x2", &x).unwrap()));
    }

    #[test]
    fn truncated_rendering() {
        let x = VarTable::indexed("x", 12);
        let text: Vec<String> = (1..=12).map(|i| format!("x{i}")).collect();
        let p = parse_rational(&text.join(" + "), &x).unwrap();
        let r = render_truncated(&p, &x, 10);
        assert!(r.ends_with("... (12 terms)"));
    }
}
