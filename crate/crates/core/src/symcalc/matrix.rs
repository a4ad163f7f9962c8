//! Symmetric matrices with exact entries.

use std::fmt;

use crate::error::{Error, Result};
use crate::poly::{tri_index, Coefficient, Domain, Polynomial, RationalFunction, VarTable};

/// Exact ring elements usable as matrix entries.
pub trait Scalar: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Scalar for Polynomial {
    fn zero_like(&self) -> Self {
        Polynomial::zero(self.nvars(), self.domain())
    }
    fn one_like(&self) -> Self {
        Polynomial::one(self.nvars(), self.domain())
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        Polynomial::is_zero(self)
    }
}

impl Scalar for RationalFunction {
    fn zero_like(&self) -> Self {
        RationalFunction::zero(self.nvars(), self.domain())
    }
    fn one_like(&self) -> Self {
        RationalFunction::one(self.nvars(), self.domain())
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        RationalFunction::is_zero(self)
    }
}

/// A symmetric `m × m` matrix stored as its row-major upper triangle.
///
/// The 0×0 matrix carries a template element so that its determinant (one)
/// lives in the right ring.
#[derive(Clone, PartialEq)]
pub struct SymMatrix<T> {
    m: usize,
    entries: Vec<T>,
    template: T,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn from_fn(m: usize, template: T, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut entries = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            for j in i..m {
                entries.push(f(i, j));
            }
        }
        let template = template.zero_like();
        SymMatrix {
            m,
            entries,
            template,
        }
    }

    /// From a full square array; fails unless it is symmetric.
    pub fn from_rows(rows: Vec<Vec<T>>, template: T) -> Result<Self> {
        let m = rows.len();
        for r in &rows {
            if r.len() != m {
                return Err(Error::SizeMismatch("matrix is not square".into()));
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::Input(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(SymMatrix::from_fn(m, template, |i, j| rows[i][j].clone()))
    }

    pub fn zeros(m: usize, template: T) -> Self {
        let z = template.zero_like();
        SymMatrix::from_fn(m, template, |_, _| z.clone())
    }

    pub fn identity(m: usize, template: T) -> Self {
        let z = template.zero_like();
        let o = template.one_like();
        SymMatrix::from_fn(m, template, |i, j| if i == j { o.clone() } else { z.clone() })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn template(&self) -> &T {
        &self.template
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        &self.entries[tri_index(self.m, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let k = tri_index(self.m, i, j);
        self.entries[k] = v;
    }

    /// Upper-triangular entries in row-major order.
    pub fn upper(&self) -> &[T] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.m)
            .map(|i| (0..self.m).map(|j| self.get(i, j).clone()).collect())
            .collect()
    }

    pub fn map<U: Scalar>(&self, template: U, mut f: impl FnMut(&T) -> U) -> SymMatrix<U> {
        SymMatrix {
            m: self.m,
            entries: self.entries.iter().map(&mut f).collect(),
            template: template.zero_like(),
        }
    }

    pub fn try_map<U: Scalar>(
        &self,
        template: U,
        mut f: impl FnMut(&T) -> Result<U>,
    ) -> Result<SymMatrix<U>> {
        let entries = self.entries.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Ok(SymMatrix {
            m: self.m,
            entries,
            template: template.zero_like(),
        })
    }

    /// Principal submatrix on the sorted index set `idx` (zero-based).
    pub fn submatrix(&self, idx: &[usize]) -> Result<SymMatrix<T>> {
        check_index_set(idx, self.m)?;
        Ok(SymMatrix::from_fn(idx.len(), self.template.clone(), |a, b| {
            self.get(idx[a], idx[b]).clone()
        }))
    }

    /// `[self]^V`: places this matrix, indexed by `idx`, in an `m × m` zero matrix.
    pub fn pad(&self, idx: &[usize], m: usize) -> Result<SymMatrix<T>> {
        check_index_set(idx, m)?;
        if idx.len() != self.m {
            return Err(Error::BadIndex(format!(
                "{} indices for a {}x{} block",
                idx.len(),
                self.m,
                self.m
            )));
        }
        let mut pos = vec![None; m];
        for (a, &i) in idx.iter().enumerate() {
            pos[i] = Some(a);
        }
        let z = self.template.zero_like();
        Ok(SymMatrix::from_fn(m, self.template.clone(), |i, j| {
            match (pos[i], pos[j]) {
                (Some(a), Some(b)) => self.get(a, b).clone(),
                _ => z.clone(),
            }
        }))
    }

    pub fn add(&self, other: &SymMatrix<T>) -> Result<SymMatrix<T>> {
        if self.m != other.m {
            return Err(Error::SizeMismatch(format!("{} vs {}", self.m, other.m)));
        }
        Ok(SymMatrix {
            m: self.m,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
            template: self.template.clone(),
        })
    }

    pub fn sub(&self, other: &SymMatrix<T>) -> Result<SymMatrix<T>> {
        if self.m != other.m {
            return Err(Error::SizeMismatch(format!("{} vs {}", self.m, other.m)));
        }
        Ok(SymMatrix {
            m: self.m,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.sub(b))
                .collect(),
            template: self.template.clone(),
        })
    }

    /// Full product as a dense array (products of symmetric matrices need not be symmetric).
    pub fn mul_dense(&self, other: &SymMatrix<T>) -> Vec<Vec<T>> {
        let m = self.m;
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let mut acc = self.template.zero_like();
                        for k in 0..m {
                            acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    /// `tr(self · other)`.
    pub fn trace_product(&self, other: &SymMatrix<T>) -> T {
        let mut acc = self.template.zero_like();
        for i in 0..self.m {
            for j in 0..self.m {
                acc = acc.add(&self.get(i, j).mul(other.get(j, i)));
            }
        }
        acc
    }
}

fn check_index_set(idx: &[usize], m: usize) -> Result<()> {
    for w in idx.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::BadIndex(format!("index set {idx:?} is not strictly increasing")));
        }
    }
    if let Some(&last) = idx.last() {
        if last >= m {
            return Err(Error::BadIndex(format!("index {last} outside 0..{m}")));
        }
    }
    Ok(())
}

impl<T: Scalar> fmt::Debug for SymMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl SymMatrix<Polynomial> {
    /// The generic symmetric matrix whose `(i, j)` entry is the role-mapped variable.
    pub fn generic(vars: &VarTable, domain: Domain) -> Result<Self> {
        let roles = vars
            .sym_roles()
            .ok_or_else(|| Error::MissingRoleMap("variable table has no symmetric roles".into()))?;
        let n = vars.len();
        let t = Polynomial::zero(n, domain);
        Ok(SymMatrix::from_fn(roles.m, t, |i, j| {
            Polynomial::var(n, domain, roles.slot(i, j))
        }))
    }

    pub fn to_rational(&self) -> SymMatrix<RationalFunction> {
        let t = RationalFunction::zero(self.template.nvars(), self.template.domain());
        self.map(t, |p| RationalFunction::from_poly(p.clone()))
    }

    /// Evaluates every entry at a point.
    pub fn evaluate(&self, point: &[Coefficient]) -> Vec<Vec<Coefficient>> {
        let m = self.m;
        (0..m)
            .map(|i| (0..m).map(|j| self.get(i, j).evaluate(point)).collect())
            .collect()
    }
}

impl SymMatrix<RationalFunction> {
    pub fn generic_rational(vars: &VarTable) -> Result<Self> {
        Ok(SymMatrix::<Polynomial>::generic(vars, Domain::Rational)?.to_rational())
    }
}
