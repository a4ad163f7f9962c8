//! Symbolic calculus: gradients, symmetric-matrix gradients, determinants and quadric duality.

pub mod det;
pub mod matrix;
pub mod qmatrix;

pub use det::{
    adjugate, common_denominator, det_bareiss, det_cofactor, det_exact, det_rational,
    det_rational_elimination, det_rational_rows, inverse,
};
pub use matrix::{Scalar, SymMatrix};
pub use qmatrix::QMatrix;

use crate::error::{Error, Result};
use crate::poly::{Coefficient, Domain, Polynomial, Rat, RationalFunction, VarTable};

/// One rational function per variable.
pub type GradientVector = Vec<RationalFunction>;

pub fn gradient(f: &RationalFunction) -> GradientVector {
    (0..f.nvars()).map(|i| f.derivative(i)).collect()
}

pub fn poly_gradient(f: &Polynomial) -> Vec<Polynomial> {
    (0..f.nvars()).map(|i| f.derivative(i)).collect()
}

/// `∇ log f`; fails on the zero function.
pub fn grad_log(f: &RationalFunction) -> Result<GradientVector> {
    f.grad_log()
}

fn half() -> Coefficient {
    Coefficient::Rational(Rat::new(1, 2))
}

fn symmetrize(g: &[RationalFunction], vars: &VarTable) -> Result<SymMatrix<RationalFunction>> {
    let roles = vars
        .sym_roles()
        .ok_or_else(|| Error::MissingRoleMap("symmetric gradient needs a role map".into()))?;
    if g.len() != vars.len() {
        return Err(Error::SizeMismatch(format!(
            "{} partials for {} variables",
            g.len(),
            vars.len()
        )));
    }
    let t = RationalFunction::zero(vars.len(), g.first().map(|x| x.domain()).unwrap_or(Domain::Rational));
    let h = match t.domain() {
        Domain::Rational => half(),
        d @ Domain::Prime(_) => d.div(&d.one(), &d.from_int(2)),
    };
    Ok(SymMatrix::from_fn(roles.m, t, |i, j| {
        let e = &g[roles.slot(i, j)];
        if i == j {
            e.clone()
        } else {
            e.scale(&h)
        }
    }))
}

/// `(∇_S f)_ij = (1/(2 − δ_ij)) ∂f/∂s_ij`.
pub fn grad_sym(f: &RationalFunction, vars: &VarTable) -> Result<SymMatrix<RationalFunction>> {
    symmetrize(&gradient(f), vars)
}

/// `∇_S log f` in the same convention.
pub fn grad_sym_log(f: &RationalFunction, vars: &VarTable) -> Result<SymMatrix<RationalFunction>> {
    symmetrize(&grad_log(f)?, vars)
}

/// Converts a symmetric-convention gradient back to plain partials.
pub fn unsymmetrize(g: &SymMatrix<RationalFunction>, vars: &VarTable) -> Result<GradientVector> {
    let roles = vars
        .sym_roles()
        .ok_or_else(|| Error::MissingRoleMap("symmetric gradient needs a role map".into()))?;
    let mut out = vec![g.template().clone(); vars.len()];
    for i in 0..roles.m {
        for j in i..roles.m {
            let e = g.get(i, j);
            out[roles.slot(i, j)] = if i == j { e.clone() } else { e.scale_int(2) };
        }
    }
    Ok(out)
}

/// The linear form `Σ c_i x_i` in `c.len()` variables.
pub fn linear_form(c: &[Rat]) -> Polynomial {
    let n = c.len();
    let mut acc = Polynomial::zero(n, Domain::Rational);
    for (i, ci) in c.iter().enumerate() {
        if !ci.is_zero() {
            acc = &acc
                + &Polynomial::var(n, Domain::Rational, i).scale(&Coefficient::Rational(ci.clone()));
        }
    }
    acc
}

/// Quadratic form `v^T A v` in `n` variables.
pub fn quadratic_form(a: &QMatrix) -> Polynomial {
    let n = a.nrows();
    let x: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(n, Domain::Rational, i)).collect();
    let mut acc = Polynomial::zero(n, Domain::Rational);
    for i in 0..n {
        for j in 0..n {
            let c = a.get(i, j);
            if !c.is_zero() {
                acc = &acc + &(&x[i] * &x[j]).scale(&Coefficient::Rational(c.clone()));
            }
        }
    }
    acc
}

/// A nondegenerate quadric `Q = x^T A x` and its dual `Q∨ = u A⁻¹ u^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadricPair {
    pub a: QMatrix,
    pub a_inv: QMatrix,
    pub q: Polynomial,
    pub qdual: Polynomial,
}

impl QuadricPair {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// `p = ∇_ℓ Q∨ = 2 A⁻¹ ℓ^T`.
    pub fn dual_gradient_at(&self, l: &[Rat]) -> Vec<Rat> {
        self.a_inv.mul_vec(l).iter().map(|v| v.mul(&Rat::from_int(2))).collect()
    }

    /// `∇_p Q = 2 A p`.
    pub fn primal_gradient_at(&self, p: &[Rat]) -> Vec<Rat> {
        self.a.mul_vec(p).iter().map(|v| v.mul(&Rat::from_int(2))).collect()
    }

    pub fn q_at(&self, p: &[Rat]) -> Rat {
        eval_rat(&self.q, p)
    }

    pub fn qdual_at(&self, l: &[Rat]) -> Rat {
        eval_rat(&self.qdual, l)
    }
}

/// Evaluates a rational polynomial at a rational point.
pub fn eval_rat(p: &Polynomial, point: &[Rat]) -> Rat {
    let pt: Vec<Coefficient> = point.iter().map(|r| Coefficient::Rational(r.clone())).collect();
    p.evaluate(&pt).as_rat().cloned().expect("rational evaluation")
}

/// Builds the pair and verifies `Q(∇Q∨) = 4 Q∨`.
pub fn quadric_pair(a: &QMatrix) -> Result<QuadricPair> {
    if !a.is_symmetric() {
        return Err(Error::Input("quadric matrix must be symmetric".into()));
    }
    if a.det()?.is_zero() {
        return Err(Error::Singular("quadric matrix is singular".into()));
    }
    let a_inv = a.inverse()?;
    let q = quadratic_form(a);
    let qdual = quadratic_form(&a_inv);
    let grad = poly_gradient(&qdual);
    let lhs = q.compose(&grad)?;
    if lhs != qdual.scale_int(4) {
        return Err(Error::Invariant("Q(grad Q-dual) differs from 4 Q-dual".into()));
    }
    Ok(QuadricPair { a: a.clone(), a_inv, q, qdual })
}

/// The entries of `g S g^T` as linear forms in the role-mapped s-variables.
pub fn congruence_entries(g: &QMatrix, vars: &VarTable) -> Result<SymMatrix<Polynomial>> {
    let roles = vars
        .sym_roles()
        .ok_or_else(|| Error::MissingRoleMap("congruence needs a role map".into()))?;
    let m = roles.m;
    if g.nrows() != m || g.ncols() != m {
        return Err(Error::SizeMismatch(format!("{}x{} action on {m}x{m}", g.nrows(), g.ncols())));
    }
    let s = SymMatrix::generic(vars, Domain::Rational)?;
    let n = vars.len();
    Ok(SymMatrix::from_fn(m, Polynomial::zero(n, Domain::Rational), |i, j| {
        let mut acc = Polynomial::zero(n, Domain::Rational);
        for k in 0..m {
            for l in 0..m {
                let c = g.get(i, k).mul(g.get(j, l));
                if !c.is_zero() {
                    acc = &acc + &s.get(k, l).scale(&Coefficient::Rational(c));
                }
            }
        }
        acc
    }))
}

/// `f(g S g^T)`: each `s_ij` replaced by entry `(i, j)` of `g S g^T`.
pub fn congruence_pullback(
    f: &RationalFunction,
    g: &QMatrix,
    vars: &VarTable,
) -> Result<RationalFunction> {
    if g.det()?.is_zero() {
        return Err(Error::Singular("congruence by a singular matrix".into()));
    }
    let e = congruence_entries(g, vars)?;
    let roles = vars.sym_roles().unwrap();
    let mut assignment = vec![RationalFunction::zero(vars.len(), Domain::Rational); vars.len()];
    for i in 0..roles.m {
        for j in i..roles.m {
            assignment[roles.slot(i, j)] = RationalFunction::from_poly(e.get(i, j).clone());
        }
    }
    f.substitute(&assignment)
}
