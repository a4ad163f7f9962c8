//! Rational functions in canonical reduced form.

use std::fmt;

use super::coeff::{Coefficient, Domain, Rat};
use super::gcd::gcd;
use super::polynomial::Polynomial;
use crate::error::{Error, Result};

/// A quotient `num / den` of coprime polynomials.
///
/// Canonical form: over QQ both parts have integer coefficients, their joint
/// integer content is 1 and the leading coefficient of `den` is positive;
/// over ZZ/p `den` is monic. The zero function is `0 / 1`. Equality is
/// structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

/// Reduces `num / den` against a denominator supplied as a list of factors,
/// cancelling each factor against the numerator in turn. Factors may repeat.
pub fn reduce_factored(num: &Polynomial, factors: &[Polynomial]) -> RationalFunction {
    let n = num.nvars();
    let dom = num.domain();
    if num.is_zero() {
        return RationalFunction::zero(n, dom);
    }
    let mut num = num.clone();
    let mut den = Polynomial::one(n, dom);
    for f in factors {
        assert!(!f.is_zero(), "zero denominator factor");
        let mut f = f.clone();
        if !f.is_constant() && !num.is_constant() {
            let g = gcd(&num, &f);
            if !g.is_constant() {
                num = num.div_exact(&g).expect("gcd divides");
                f = f.div_exact(&g).expect("gcd divides");
            }
        }
        den = &den * &f;
    }
    RationalFunction::from_coprime(num, den)
}

impl RationalFunction {
    pub fn zero(nvars: usize, domain: Domain) -> Self {
        RationalFunction {
            num: Polynomial::zero(nvars, domain),
            den: Polynomial::one(nvars, domain),
        }
    }

    pub fn one(nvars: usize, domain: Domain) -> Self {
        RationalFunction::from_poly(Polynomial::one(nvars, domain))
    }

    pub fn from_int(nvars: usize, domain: Domain, v: i64) -> Self {
        RationalFunction::from_poly(Polynomial::from_int(nvars, domain, v))
    }

    pub fn from_rat(nvars: usize, r: Rat) -> Self {
        RationalFunction::from_coprime(
            Polynomial::from_rat(nvars, r),
            Polynomial::one(nvars, Domain::Rational),
        )
    }

    pub fn constant(nvars: usize, domain: Domain, c: Coefficient) -> Self {
        RationalFunction::from_coprime(
            Polynomial::constant(nvars, domain, c),
            Polynomial::one(nvars, domain),
        )
    }

    pub fn var(nvars: usize, domain: Domain, i: usize) -> Self {
        RationalFunction::from_poly(Polynomial::var(nvars, domain, i))
    }

    pub fn from_poly(p: Polynomial) -> Self {
        let n = p.nvars();
        let dom = p.domain();
        RationalFunction::from_coprime(p, Polynomial::one(n, dom))
    }

    /// Canonical reduced form of `num / den`.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero("zero denominator".into()));
        }
        if num.domain() != den.domain() || num.nvars() != den.nvars() {
            return Err(Error::DomainMismatch("numerator and denominator disagree".into()));
        }
        if num.is_zero() {
            return Ok(RationalFunction::zero(num.nvars(), num.domain()));
        }
        let g = gcd(&num, &den);
        if g.is_constant() {
            return Ok(RationalFunction::from_coprime(num, den));
        }
        let num = num.div_exact(&g).expect("gcd divides numerator");
        let den = den.div_exact(&g).expect("gcd divides denominator");
        Ok(RationalFunction::from_coprime(num, den))
    }

    /// Normalizes scalars of an already coprime pair.
    pub(crate) fn from_coprime(num: Polynomial, den: Polynomial) -> Self {
        let n = num.nvars();
        let dom = num.domain();
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RationalFunction::zero(n, dom);
        }
        match dom {
            Domain::Prime(_) => {
                let lc = den.leading_coeff();
                if lc.is_one() {
                    return RationalFunction { num, den };
                }
                let inv = dom.div(&dom.one(), &lc);
                RationalFunction {
                    num: num.scale(&inv),
                    den: den.scale(&inv),
                }
            }
            Domain::Rational => {
                let cn = num.content();
                let cd = den.content();
                let pn = if cn.is_one() { num } else { num.primitive_part() };
                let pd = if cd.is_one() { den } else { den.primitive_part() };
                let r = dom.div(&cn, &cd);
                let r = r.as_rat().unwrap();
                let p = Rat::from_bigint(r.numer());
                let q = Rat::from_bigint(r.denom());
                let num = if p.is_one() {
                    pn
                } else {
                    pn.scale(&Coefficient::Rational(p))
                };
                let den = if q.is_one() {
                    pd
                } else {
                    pd.scale(&Coefficient::Rational(q))
                };
                RationalFunction { num, den }
            }
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn into_parts(self) -> (Polynomial, Polynomial) {
        (self.num, self.den)
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn domain(&self) -> Domain {
        self.num.domain()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    /// The value as a polynomial, when the denominator is a constant.
    pub fn as_polynomial(&self) -> Option<Polynomial> {
        if !self.den.is_constant() {
            return None;
        }
        let c = self.den.leading_coeff();
        if c.is_one() {
            return Some(self.num.clone());
        }
        let dom = self.domain();
        Some(self.num.scale(&dom.div(&dom.one(), &c)))
    }

    pub fn constant_value(&self) -> Option<Coefficient> {
        if !self.is_constant() {
            return None;
        }
        let dom = self.domain();
        let n = self.num.constant_value().unwrap();
        let d = self.den.constant_value().unwrap();
        Some(dom.div(&n, &d))
    }

    fn check(&self, other: &RationalFunction) -> Result<()> {
        if self.domain() != other.domain() || self.nvars() != other.nvars() {
            return Err(Error::DomainMismatch(format!(
                "{}/{} vs {}/{}",
                self.domain(),
                self.nvars(),
                other.domain(),
                other.nvars()
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &RationalFunction) -> Result<RationalFunction> {
        self.check(other)?;
        Ok(self.add_impl(other))
    }

    pub fn checked_sub(&self, other: &RationalFunction) -> Result<RationalFunction> {
        self.check(other)?;
        Ok(self.add_impl(&other.neg()))
    }

    pub fn checked_mul(&self, other: &RationalFunction) -> Result<RationalFunction> {
        self.check(other)?;
        Ok(self.mul_impl(other))
    }

    pub fn checked_div(&self, other: &RationalFunction) -> Result<RationalFunction> {
        self.check(other)?;
        Ok(self.mul_impl(&other.inv()?))
    }

    fn add_impl(&self, other: &RationalFunction) -> RationalFunction {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            let t = &self.num + &other.num;
            if self.den.is_constant() {
                return RationalFunction::from_coprime(t, self.den.clone());
            }
            return RationalFunction::new(t, self.den.clone()).unwrap();
        }
        let (a, b, c, d) = (&self.num, &self.den, &other.num, &other.den);
        let g = if b.is_constant() || d.is_constant() {
            Polynomial::one(self.nvars(), self.domain())
        } else {
            gcd(b, d)
        };
        if g.is_constant() {
            let t = &(a * d) + &(b * c);
            return RationalFunction::from_coprime(t, b * d);
        }
        let b1 = b.div_exact(&g).unwrap();
        let d1 = d.div_exact(&g).unwrap();
        let t = &(a * &d1) + &(c * &b1);
        if t.is_zero() {
            return RationalFunction::zero(self.nvars(), self.domain());
        }
        let g2 = gcd(&t, &g);
        if g2.is_constant() {
            return RationalFunction::from_coprime(t, &b1 * d);
        }
        let t = t.div_exact(&g2).unwrap();
        let d2 = d.div_exact(&g2).unwrap();
        RationalFunction::from_coprime(t, &b1 * &d2)
    }

    fn mul_impl(&self, other: &RationalFunction) -> RationalFunction {
        if self.is_zero() || other.is_zero() {
            return RationalFunction::zero(self.nvars(), self.domain());
        }
        let (a, b, c, d) = (&self.num, &self.den, &other.num, &other.den);
        let (a, d) = cancel(a, d);
        let (c, b) = cancel(c, b);
        RationalFunction::from_coprime(&a * &c, &b * &d)
    }

    pub fn neg(&self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn inv(&self) -> Result<RationalFunction> {
        if self.is_zero() {
            return Err(Error::DivisionByZero("inverse of zero".into()));
        }
        Ok(RationalFunction::from_coprime(self.den.clone(), self.num.clone()))
    }

    pub fn pow(&self, e: i32) -> Result<RationalFunction> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let k = e.unsigned_abs();
        Ok(RationalFunction::from_coprime(base.num.pow(k), base.den.pow(k)))
    }

    pub fn scale(&self, c: &Coefficient) -> RationalFunction {
        RationalFunction::from_coprime(self.num.scale(c), self.den.clone())
    }

    pub fn scale_int(&self, v: i64) -> RationalFunction {
        self.scale(&self.domain().from_int(v))
    }

    pub fn mul_poly(&self, p: &Polynomial) -> RationalFunction {
        let (p, d) = cancel(p, &self.den);
        RationalFunction::from_coprime(&self.num * &p, d)
    }

    pub fn div_poly(&self, p: &Polynomial) -> Result<RationalFunction> {
        if p.is_zero() {
            return Err(Error::DivisionByZero("division by zero polynomial".into()));
        }
        let (n, p) = cancel(&self.num, p);
        Ok(RationalFunction::from_coprime(n, &self.den * &p))
    }

    /// Partial derivative with respect to `x_i`.
    pub fn derivative(&self, i: usize) -> RationalFunction {
        let dn = self.num.derivative(i);
        let dd = self.den.derivative(i);
        if dd.is_zero() {
            return RationalFunction::from_coprime(dn, self.den.clone());
        }
        // d(a/b) = (a' (b/g) - a (b'/g)) / (b (b/g)) with g = gcd(b, b')
        let g = gcd(&self.den, &dd);
        let b1 = self.den.div_exact(&g).unwrap();
        let c1 = dd.div_exact(&g).unwrap();
        let t = &(&dn * &b1) - &(&self.num * &c1);
        reduce_factored(&t, &[self.den.clone(), b1])
    }

    /// `(∂f/∂x_i) / f` for every `i`. Fails on the zero function.
    pub fn grad_log(&self) -> Result<Vec<RationalFunction>> {
        if self.is_zero() {
            return Err(Error::DivisionByZero("logarithmic gradient of zero".into()));
        }
        let n = self.nvars();
        let mut out = Vec::with_capacity(n);
        let lp = log_parts(&self.num);
        let lq = log_parts(&self.den);
        for i in 0..n {
            // N'/N - D'/D with N = gN * rN and N' = gN * sN
            let a = log_component(&self.num, &lp, i);
            let b = log_component(&self.den, &lq, i);
            out.push(match (a, b) {
                (None, None) => RationalFunction::zero(n, self.domain()),
                (Some(a), None) => a,
                (None, Some(b)) => b.neg(),
                (Some(a), Some(b)) => a.add_impl(&b.neg()),
            });
        }
        Ok(out)
    }

    /// Evaluates at a point; `None` when the denominator vanishes there.
    pub fn evaluate(&self, point: &[Coefficient]) -> Option<Coefficient> {
        let d = self.den.evaluate(point);
        if d.is_zero() {
            return None;
        }
        let dom = self.domain();
        Some(dom.div(&self.num.evaluate(point), &d))
    }

    /// Exact composition `self(assignment)`.
    pub fn substitute(&self, assignment: &[RationalFunction]) -> Result<RationalFunction> {
        if assignment.len() != self.nvars() {
            return Err(Error::SizeMismatch(format!(
                "{} substitutions for {} variables",
                assignment.len(),
                self.nvars()
            )));
        }
        let Some(first) = assignment.first() else {
            return Ok(self.clone());
        };
        let target_n = first.nvars();
        let dom = self.domain();
        for a in assignment {
            if a.nvars() != target_n || a.domain() != dom {
                return Err(Error::DomainMismatch("assignment entries disagree".into()));
            }
        }
        // common denominator L of the assignment, kept as a factor list
        let mut factors: Vec<Polynomial> = Vec::new();
        for a in assignment {
            let mut rest = a.den.clone();
            for f in &factors {
                if rest.is_constant() {
                    break;
                }
                let g = gcd(&rest, f);
                if !g.is_constant() {
                    rest = rest.div_exact(&g).unwrap();
                }
            }
            if !rest.is_constant() {
                factors.push(rest);
            }
        }
        let mut l = Polynomial::one(target_n, dom);
        for f in &factors {
            l = &l * f;
        }
        let lifted: Vec<Polynomial> = assignment
            .iter()
            .map(|a| &a.num * &l.div_exact(&a.den).expect("common denominator"))
            .collect();
        let (pn, dn) = homogenized_compose(&self.num, &lifted, &l)?;
        let (pd, dd) = homogenized_compose(&self.den, &lifted, &l)?;
        if pd.is_zero() {
            return Err(Error::DivisionByZero(
                "denominator vanishes identically after substitution".into(),
            ));
        }
        // value = (pn / L^dn) / (pd / L^dd)
        let mut den_factors = vec![pd];
        let mut num = pn;
        if dn >= dd {
            for _ in 0..(dn - dd) {
                den_factors.extend(factors.iter().cloned());
            }
        } else {
            num = &num * &l.pow(dd - dn);
        }
        if num.is_zero() {
            return Ok(RationalFunction::zero(target_n, dom));
        }
        Ok(reduce_factored(&num, &den_factors))
    }

    /// `deg(num) − deg(den)` when both are homogeneous.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let dn = self.num.homogeneous_degree();
        let dd = self.den.homogeneous_degree()?;
        if self.num.is_zero() {
            return None;
        }
        Some(dn? as i64 - dd as i64)
    }

    pub fn reduce_mod_p(&self, p: u64) -> Result<RationalFunction> {
        let num = self.num.reduce_mod_p(p)?;
        let den = self.den.reduce_mod_p(p)?;
        if den.is_zero() {
            return Err(Error::BadPrime(format!("{p} annihilates the denominator")));
        }
        RationalFunction::new(num, den)
    }
}

/// Data for the logarithmic derivative of `p`.
struct LogParts {
    /// gcd(p, ∂p/∂x_i) per variable, with p / gcd.
    per_var: Vec<Option<(Polynomial, Polynomial)>>,
}

fn log_parts(p: &Polynomial) -> LogParts {
    let per_var = (0..p.nvars())
        .map(|i| {
            let d = p.derivative(i);
            if d.is_zero() {
                return None;
            }
            let g = gcd(p, &d);
            Some((d.div_exact(&g).unwrap(), p.div_exact(&g).unwrap()))
        })
        .collect();
    LogParts { per_var }
}

fn log_component(_p: &Polynomial, parts: &LogParts, i: usize) -> Option<RationalFunction> {
    parts.per_var[i]
        .as_ref()
        .map(|(s, r)| RationalFunction::from_coprime(s.clone(), r.clone()))
}

/// Cancels the gcd of `a` and `b`.
fn cancel(a: &Polynomial, b: &Polynomial) -> (Polynomial, Polynomial) {
    if a.is_constant() || b.is_constant() {
        return (a.clone(), b.clone());
    }
    let g = gcd(a, b);
    if g.is_constant() {
        (a.clone(), b.clone())
    } else {
        (a.div_exact(&g).unwrap(), b.div_exact(&g).unwrap())
    }
}

/// `L^D · f(lifted / L)` as a polynomial, with `D = deg f`.
fn homogenized_compose(
    f: &Polynomial,
    lifted: &[Polynomial],
    l: &Polynomial,
) -> Result<(Polynomial, u32)> {
    let target_n = l.nvars();
    let dom = l.domain();
    let Some(d) = f.total_degree() else {
        return Ok((Polynomial::zero(target_n, dom), 0));
    };
    if l.is_one() || f.is_homogeneous() {
        return Ok((f.compose(lifted)?, d));
    }
    let mut acc = Polynomial::zero(target_n, dom);
    let mut lpow = vec![Polynomial::one(target_n, dom)];
    for k in 1..=d as usize {
        let next = &lpow[k - 1] * l;
        lpow.push(next);
    }
    for deg in 0..=d {
        let terms: Vec<_> = f
            .terms()
            .iter()
            .filter(|t| t.mono.degree() == deg)
            .cloned()
            .collect();
        if terms.is_empty() {
            continue;
        }
        let piece = Polynomial::from_terms(f.nvars(), f.domain(), terms).compose(lifted)?;
        acc = &acc + &(&piece * &lpow[(d - deg) as usize]);
    }
    Ok((acc, d))
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{:?}", self.num)
        } else {
            write!(f, "({:?})/({:?})", self.num, self.den)
        }
    }
}

impl std::ops::Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        self.checked_add(rhs).expect("incompatible rational functions")
    }
}

impl std::ops::Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self.checked_sub(rhs).expect("incompatible rational functions")
    }
}

impl std::ops::Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        self.checked_mul(rhs).expect("incompatible rational functions")
    }
}

impl std::ops::Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction::neg(self)
    }
}

/// Canonical form of `num / den`.
pub fn rat_simplify(num: &Polynomial, den: &Polynomial) -> Result<RationalFunction> {
    RationalFunction::new(num.clone(), den.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::var(n, Domain::Rational, i)
    }

    #[test]
    fn cancels_common_factor() {
        let num = &x(2, 0).pow(2) - &x(2, 1).pow(2);
        let den = &x(2, 0) - &x(2, 1);
        let r = rat_simplify(&num, &den).unwrap();
        assert_eq!(r.num(), &(&x(2, 0) + &x(2, 1)));
        assert!(r.den().is_one());
    }

    #[test]
    fn scalar_normalization() {
        let r = rat_simplify(&x(2, 0).scale_int(2), &x(2, 1).scale_int(4)).unwrap();
        assert_eq!(r.num(), &x(2, 0));
        assert_eq!(r.den(), &x(2, 1).scale_int(2));
        let s = rat_simplify(&x(2, 0), &x(2, 1).scale_int(-3)).unwrap();
        assert_eq!(s.num(), &x(2, 0).scale_int(-1));
        assert_eq!(s.den(), &x(2, 1).scale_int(3));
    }

    #[test]
    fn diagonal_substitution() {
        let f = RationalFunction::from_poly(&(&x(3, 0) * &x(3, 1)) * &x(3, 2));
        let inv: Vec<_> = (0..3)
            .map(|i| RationalFunction::var(3, Domain::Rational, i).inv().unwrap())
            .collect();
        let g = f.substitute(&inv).unwrap();
        assert!(g.num().is_one());
        assert_eq!(g.den(), &(&(&x(3, 0) * &x(3, 1)) * &x(3, 2)));
        assert_eq!(g.homogeneous_degree(), Some(-3));
    }

    #[test]
    fn identity_substitution() {
        let f = rat_simplify(&(&x(2, 0) + &x(2, 1).pow(3)), &x(2, 1)).unwrap();
        let id: Vec<_> = (0..2).map(|i| RationalFunction::var(2, Domain::Rational, i)).collect();
        assert_eq!(f.substitute(&id).unwrap(), f);
    }

    #[test]
    fn log_gradient_of_monomial() {
        let f = RationalFunction::from_poly(&(&x(3, 0) * &x(3, 1)) * &x(3, 2));
        let g = f.grad_log().unwrap();
        for (i, gi) in g.iter().enumerate() {
            assert!(gi.num().is_one());
            assert_eq!(gi.den(), &x(3, i));
        }
    }

    #[test]
    fn not_homogeneous() {
        let f = RationalFunction::from_poly(&x(1, 0) + &x(1, 0).pow(2));
        assert_eq!(f.homogeneous_degree(), None);
    }

    #[test]
    fn addition_reduces() {
        let a = rat_simplify(&x(2, 0), &(&x(2, 0) + &x(2, 1))).unwrap();
        let b = rat_simplify(&x(2, 1), &(&x(2, 0) + &x(2, 1))).unwrap();
        assert_eq!(&a + &b, RationalFunction::one(2, Domain::Rational));
    }

    #[test]
    fn derivative_quotient_rule() {
        let f = rat_simplify(&x(1, 0), &x(1, 0).pow(2).scale_int(1)).unwrap();
        // 1/x → −1/x²
        let d = f.derivative(0);
        assert_eq!(d.num(), &Polynomial::from_int(1, Domain::Rational, -1));
        assert_eq!(d.den(), &x(1, 0).pow(2));
    }
}
