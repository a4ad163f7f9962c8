//! Dense matrices over QQ.

use std::fmt;

use crate::error::{Error, Result};
use crate::poly::Rat;

#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::SizeMismatch("ragged matrix rows".into()));
        }
        Ok(QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        QMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rat::from_int(v)).collect())
                .collect(),
        )
        .expect("rectangular literal")
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> QMatrix {
        let mut t = QMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.rows {
            return Err(Error::SizeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Rat::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if !a.is_zero() {
                        acc = acc.add(&a.mul(other.get(k, j)));
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Row echelon form with the column permutation-free rank.
    fn echelon(&self) -> (QMatrix, usize, bool) {
        let mut a = self.clone();
        let mut rank = 0;
        let mut negate = false;
        for c in 0..a.cols {
            let Some(p) = (rank..a.rows).find(|&r| !a.get(r, c).is_zero()) else {
                continue;
            };
            if p != rank {
                for j in 0..a.cols {
                    a.data.swap(p * a.cols + j, rank * a.cols + j);
                }
                negate = !negate;
            }
            let piv = a.get(rank, c).clone();
            for r in rank + 1..a.rows {
                let f = a.get(r, c).div(&piv);
                if f.is_zero() {
                    continue;
                }
                for j in c..a.cols {
                    let v = a.get(r, j).sub(&f.mul(a.get(rank, j)));
                    a.set(r, j, v);
                }
            }
            rank += 1;
            if rank == a.rows {
                break;
            }
        }
        (a, rank, negate)
    }

    pub fn rank(&self) -> usize {
        self.echelon().1
    }

    pub fn det(&self) -> Result<Rat> {
        if !self.is_square() {
            return Err(Error::SizeMismatch("determinant of a non-square matrix".into()));
        }
        let (e, rank, negate) = self.echelon();
        if rank < self.rows {
            return Ok(Rat::zero());
        }
        let mut d = Rat::one();
        for i in 0..self.rows {
            d = d.mul(e.get(i, i));
        }
        Ok(if negate { d.neg() } else { d })
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<QMatrix> {
        if !self.is_square() {
            return Err(Error::SizeMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = QMatrix::identity(n);
        for c in 0..n {
            let p = (c..n)
                .find(|&r| !a.get(r, c).is_zero())
                .ok_or_else(|| Error::Singular("matrix is not invertible".into()))?;
            if p != c {
                for j in 0..n {
                    a.data.swap(p * n + j, c * n + j);
                    inv.data.swap(p * n + j, c * n + j);
                }
            }
            let piv = a.get(c, c).clone();
            for j in 0..n {
                a.set(c, j, a.get(c, j).div(&piv));
                inv.set(c, j, inv.get(c, j).div(&piv));
            }
            for r in 0..n {
                if r == c {
                    continue;
                }
                let f = a.get(r, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a.set(r, j, a.get(r, j).sub(&f.mul(a.get(c, j))));
                    inv.set(r, j, inv.get(r, j).sub(&f.mul(inv.get(c, j))));
                }
            }
        }
        Ok(inv)
    }

    /// `v^T M` for a row vector `v`.
    pub fn left_mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        (0..self.cols)
            .map(|j| {
                let mut acc = Rat::zero();
                for (i, vi) in v.iter().enumerate() {
                    acc = acc.add(&vi.mul(self.get(i, j)));
                }
                acc
            })
            .collect()
    }

    /// `M v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        (0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for (j, vj) in v.iter().enumerate() {
                    acc = acc.add(&self.get(i, j).mul(vj));
                }
                acc
            })
            .collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|r| r.to_f64()).collect())
            .collect()
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|r| r.to_string()).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let a = QMatrix::from_int_rows(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), QMatrix::identity(3));
        assert_eq!(a.det().unwrap(), Rat::from_int(18));
    }

    #[test]
    fn rank_deficient() {
        let a = QMatrix::from_int_rows(&[&[1, 2], &[2, 4]]);
        assert_eq!(a.rank(), 1);
        assert!(a.inverse().is_err());
        assert!(a.det().unwrap().is_zero());
    }
}
