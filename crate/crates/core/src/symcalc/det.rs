//! Exact determinants and inverses.

use rustc_hash::FxHashMap;

use super::matrix::{Scalar, SymMatrix};
use crate::error::{Error, Result};
use crate::poly::{gcd, reduce_factored, Polynomial, RationalFunction};

/// Fraction-free Gaussian elimination. Pivot: first nonzero entry in the column.
pub fn det_bareiss(rows: &[Vec<Polynomial>], template: &Polynomial) -> Polynomial {
    let n = rows.len();
    if n == 0 {
        return template.one_like();
    }
    let mut a: Vec<Vec<Polynomial>> = rows.to_vec();
    let mut negate = false;
    let mut prev = template.one_like();
    for k in 0..n - 1 {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return template.zero_like();
        };
        if p != k {
            a.swap(p, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = if prev.is_one() {
                    t
                } else {
                    t.div_exact(&prev).expect("Bareiss division is exact")
                };
            }
            a[i][k] = template.zero_like();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -&d
    } else {
        d
    }
}

/// Laplace expansion along rows, memoized over column subsets.
pub fn det_cofactor<T: Scalar>(rows: &[Vec<T>], template: &T) -> T {
    let n = rows.len();
    assert!(n < 64, "cofactor expansion limited to 63 columns");
    let mut memo: FxHashMap<u64, T> = FxHashMap::default();
    let full = if n == 0 { 0 } else { (1u64 << n) - 1 };
    minor(rows, 0, full, template, &mut memo)
}

fn minor<T: Scalar>(
    rows: &[Vec<T>],
    k: usize,
    cols: u64,
    template: &T,
    memo: &mut FxHashMap<u64, T>,
) -> T {
    if cols == 0 {
        return template.one_like();
    }
    if let Some(v) = memo.get(&cols) {
        return v.clone();
    }
    let mut acc = template.zero_like();
    let mut position = 0usize;
    for j in 0..rows.len() {
        if cols & (1 << j) == 0 {
            continue;
        }
        let e = &rows[k][j];
        if !e.is_zero() {
            let sub = minor(rows, k + 1, cols & !(1 << j), template, memo);
            if !sub.is_zero() {
                let t = e.mul(&sub);
                acc = if position % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
            }
        }
        position += 1;
    }
    memo.insert(cols, acc.clone());
    acc
}

/// Determinant of a polynomial matrix (Bareiss).
pub fn det_exact(m: &SymMatrix<Polynomial>) -> Polynomial {
    det_bareiss(&m.rows(), m.template())
}

/// Determinant of a rational-function matrix.
pub fn det_rational(m: &SymMatrix<RationalFunction>) -> RationalFunction {
    det_rational_elimination(&m.rows(), m.template())
}

/// Clears each row of denominators, takes the polynomial determinant and
/// reduces against the collected row denominators.
pub fn det_rational_rows(rows: &[Vec<RationalFunction>], template: &RationalFunction) -> RationalFunction {
    let n = template.nvars();
    let dom = template.domain();
    let ptemplate = Polynomial::zero(n, dom);
    let mut factors: Vec<Polynomial> = Vec::new();
    let mut prow: Vec<Vec<Polynomial>> = Vec::with_capacity(rows.len());
    for row in rows {
        let (lcm, fl) = common_denominator(row.iter().map(|r| r.den()));
        prow.push(
            row.iter()
                .map(|r| r.num() * &lcm.div_exact(r.den()).expect("common denominator"))
                .collect(),
        );
        factors.extend(fl);
    }
    let d = det_bareiss(&prow, &ptemplate);
    reduce_factored(&d, &factors)
}

/// Gaussian elimination over the field of rational functions, pivoting on
/// the smallest available entry. Intermediate Schur complements stay reduced.
pub fn det_rational_elimination(
    rows: &[Vec<RationalFunction>],
    template: &RationalFunction,
) -> RationalFunction {
    let n = rows.len();
    let mut a: Vec<Vec<RationalFunction>> = rows.to_vec();
    let mut det = RationalFunction::one(template.nvars(), template.domain());
    let size = |r: &RationalFunction| r.num().len() + r.den().len();
    for k in 0..n {
        let Some(p) = (k..n)
            .filter(|&r| !a[r][k].is_zero())
            .min_by_key(|&r| size(&a[r][k]))
        else {
            return RationalFunction::zero(template.nvars(), template.domain());
        };
        if p != k {
            a.swap(p, k);
            det = det.neg();
        }
        let piv = a[k][k].clone();
        det = &det * &piv;
        let inv = piv.inv().expect("nonzero pivot");
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] * &inv;
            for j in k + 1..n {
                if !a[k][j].is_zero() {
                    let t = &f * &a[k][j];
                    a[i][j] = &a[i][j] - &t;
                }
            }
        }
    }
    det
}

/// A common multiple of the given denominators, with a factor list whose product is it.
pub fn common_denominator<'a>(
    dens: impl Iterator<Item = &'a Polynomial>,
) -> (Polynomial, Vec<Polynomial>) {
    let mut factors: Vec<Polynomial> = Vec::new();
    let mut template: Option<Polynomial> = None;
    for d in dens {
        if template.is_none() {
            template = Some(Polynomial::one(d.nvars(), d.domain()));
        }
        let mut rest = d.clone();
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
            factors.push(rest.primitive_part());
        }
    }
    let mut l = template.expect("at least one denominator");
    for f in &factors {
        l = &l * f;
    }
    (l, factors)
}

/// Adjugate `adj(M)` with `M · adj(M) = det(M) · I`.
pub fn adjugate(m: &SymMatrix<Polynomial>) -> SymMatrix<Polynomial> {
    let n = m.size();
    let rows = m.rows();
    let t = m.template().clone();
    SymMatrix::from_fn(n, t.clone(), |i, j| {
        let sub: Vec<Vec<Polynomial>> = (0..n)
            .filter(|&r| r != j)
            .map(|r| {
                (0..n)
                    .filter(|&c| c != i)
                    .map(|c| rows[r][c].clone())
                    .collect()
            })
            .collect();
        let c = det_cofactor(&sub, &t);
        if (i + j) % 2 == 0 {
            c
        } else {
            -&c
        }
    })
}

/// `M⁻¹ = adj(M) / det(M)`.
pub fn inverse(m: &SymMatrix<Polynomial>) -> Result<SymMatrix<RationalFunction>> {
    let d = det_exact(m);
    if d.is_zero() {
        return Err(Error::Singular("determinant vanishes identically".into()));
    }
    let adj = adjugate(m);
    let t = RationalFunction::zero(d.nvars(), d.domain());
    adj.try_map(t, |a| RationalFunction::new(a.clone(), d.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse, Domain, VarTable};

    #[test]
    fn two_by_two() {
        let v = VarTable::symmetric("s", 2);
        let s = SymMatrix::generic(&v, Domain::Rational).unwrap();
        assert_eq!(det_exact(&s), parse("s11*s22 - s12^2", &v).unwrap());
    }

    #[test]
    fn identity_and_empty() {
        let t = Polynomial::zero(2, Domain::Rational);
        assert!(det_exact(&SymMatrix::identity(3, t.clone())).is_one());
        assert!(det_exact(&SymMatrix::identity(0, t)).is_one());
    }

    #[test]
    fn three_by_three_agrees() {
        let v = VarTable::symmetric("s", 3);
        let s = SymMatrix::generic(&v, Domain::Rational).unwrap();
        let a = det_exact(&s);
        let b = det_cofactor(&s.rows(), s.template());
        // five distinct monomials once s_ij = s_ji
        assert_eq!(a.len(), 5);
        assert_eq!(a, b);
    }

    #[test]
    fn inverse_times_matrix() {
        let v = VarTable::symmetric("s", 3);
        let s = SymMatrix::generic(&v, Domain::Rational).unwrap();
        let inv = inverse(&s).unwrap();
        let prod = s.to_rational().mul_dense(&inv);
        for (i, row) in prod.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if i == j {
                    assert!(e.num().is_one() && e.den().is_one());
                } else {
                    assert!(e.is_zero());
                }
            }
        }
    }

    #[test]
    fn rational_determinant() {
        let v = VarTable::symmetric("s", 2);
        let s = SymMatrix::generic(&v, Domain::Rational).unwrap();
        let inv = inverse(&s).unwrap();
        let d = det_rational(&inv);
        assert_eq!(d, det_rational_rows(&inv.rows(), inv.template()));
        let one = Polynomial::one(3, Domain::Rational);
        assert_eq!(d, RationalFunction::new(one, det_exact(&s)).unwrap());
    }
}
