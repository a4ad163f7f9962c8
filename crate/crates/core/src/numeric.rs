//! Floating-point evaluation of MLE formulas, likelihood geometry and an
//! iterative cross-check.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{Dag, UGraph};
use crate::models::ModelFormula;
use crate::pde::Mle;
use crate::poly::{parse_rational, Polynomial, VarTable};
use crate::symcalc::{det_exact, SymMatrix};

/// Dense symmetric matrix of finite doubles.
#[derive(Clone, Debug, PartialEq)]
pub struct NumSymMatrix {
    data: DMatrix<f64>,
}

impl NumSymMatrix {
    /// Symmetrizes `(a + aᵀ)/2` after checking the asymmetry is at rounding level.
    pub fn from_matrix(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::SizeMismatch(format!("{}x{} matrix is not square", a.nrows(), a.ncols())));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("matrix has non-finite entries".into()));
        }
        let scale = a.amax().max(1.0);
        let t = a.transpose();
        if (&a - &t).amax() > 1e-12 * scale {
            return Err(Error::Input("matrix is not symmetric".into()));
        }
        Ok(NumSymMatrix { data: (a + t) * 0.5 })
    }

    /// For results symmetric up to rounding by construction.
    fn symmetrized(a: DMatrix<f64>) -> Self {
        let t = a.transpose();
        NumSymMatrix { data: (a + t) * 0.5 }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::SizeMismatch("covariance rows must form a square array".into()));
        }
        NumSymMatrix::from_matrix(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
    }

    pub fn identity(m: usize) -> Self {
        NumSymMatrix { data: DMatrix::identity(m, m) }
    }

    pub fn size(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn scale(&self, t: f64) -> NumSymMatrix {
        NumSymMatrix { data: &self.data * t }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.size()).map(|i| self.data.row(i).iter().copied().collect()).collect()
    }

    pub fn max_abs_diff(&self, other: &NumSymMatrix) -> f64 {
        (&self.data - &other.data).amax()
    }

    /// Covariance JSON: an array of rows, entries numbers or `"p/q"` strings.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = || Error::Input("covariance JSON must be an array of arrays".into());
        let rows = v.as_array().ok_or_else(bad)?;
        let mut out = Vec::with_capacity(rows.len());
        for r in rows {
            let r = r.as_array().ok_or_else(bad)?;
            out.push(r.iter().map(json_number).collect::<Result<Vec<f64>>>()?);
        }
        NumSymMatrix::from_rows(&out)
    }
}

impl Serialize for NumSymMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

fn json_number(v: &serde_json::Value) -> Result<f64> {
    match v {
        serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| Error::Input(format!("bad number {n}"))),
        serde_json::Value::String(s) => {
            let one = VarTable::new::<&str>(&[])?;
            let r = parse_rational(s, &one)?;
            let c = r.constant_value().ok_or_else(|| Error::Input(format!("`{s}` is not a number")))?;
            Ok(c.as_rat().expect("rational input").to_f64())
        }
        other => Err(Error::Input(format!("`{other}` is not a number"))),
    }
}

/// Data CSV: one sample per row, no header.
pub fn parse_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Input(e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::Input(format!("`{f}` is not a number"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// `S = (1/n) Σ Yᵢ Yᵢᵀ` over the rows `Yᵢ`.
pub fn sample_covariance(data: &[Vec<f64>]) -> Result<NumSymMatrix> {
    let n = data.len();
    let m = data.first().map(|r| r.len()).unwrap_or(0);
    if n == 0 || m == 0 {
        return Err(Error::EmptyData);
    }
    if data.iter().any(|r| r.len() != m) {
        return Err(Error::SizeMismatch("data rows have different lengths".into()));
    }
    let y = DMatrix::from_fn(n, m, |i, j| data[i][j]);
    Ok(NumSymMatrix::symmetrized(y.transpose() * &y / n as f64))
}

/// Lower Cholesky factor, or `None` when a pivot is at most `1e-12 · max diag`.
pub fn cholesky(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let m = a.nrows();
    let maxd = (0..m).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    let tol = 1e-12 * maxd;
    let mut l = DMatrix::zeros(m, m);
    for j in 0..m {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > tol) {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..m {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / d;
        }
    }
    Some(l)
}

pub fn is_pd(a: &NumSymMatrix) -> bool {
    cholesky(&a.data).is_some()
}

fn cholesky_inverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    let m = l.nrows();
    let mut inv = DMatrix::identity(m, m);
    // solve L Y = I, then Lᵀ X = Y
    for c in 0..m {
        for i in 0..m {
            let mut v = inv[(i, c)];
            for k in 0..i {
                v -= l[(i, k)] * inv[(k, c)];
            }
            inv[(i, c)] = v / l[(i, i)];
        }
        for i in (0..m).rev() {
            let mut v = inv[(i, c)];
            for k in i + 1..m {
                v -= l[(k, i)] * inv[(k, c)];
            }
            inv[(i, c)] = v / l[(i, i)];
        }
    }
    inv
}

/// `(log det K − tr(KS), K⁻¹ − S)`.
pub fn loglik_and_grad(k: &NumSymMatrix, s: &NumSymMatrix) -> Result<(f64, NumSymMatrix)> {
    if k.size() != s.size() {
        return Err(Error::SizeMismatch("K and S differ in size".into()));
    }
    let l = cholesky(&k.data).ok_or(Error::NotPositiveDefinite)?;
    let logdet: f64 = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let value = logdet - k.data.component_mul(&s.data).sum();
    let grad = cholesky_inverse(&l) - &s.data;
    Ok((value, NumSymMatrix::symmetrized(grad)))
}

/// A polynomial flattened for repeated floating-point evaluation.
#[derive(Clone, Debug)]
struct Compiled {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl Compiled {
    fn new(p: &Polynomial) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|t| {
                let c = t.coeff.as_rat().expect("rational coefficients").to_f64();
                let e = t
                    .mono
                    .exps()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e as i32))
                    .collect();
                (c, e)
            })
            .collect();
        Compiled { terms }
    }

    /// Value and `Σ |c| Π |x|^e`.
    fn eval(&self, x: &[f64]) -> (f64, f64) {
        let (mut v, mut s) = (0.0, 0.0);
        for (c, e) in &self.terms {
            let mut t = *c;
            for &(i, k) in e {
                t *= x[i].powi(k);
            }
            v += t;
            s += t.abs();
        }
        (v, s)
    }
}

fn slots(vars: &VarTable, m: usize) -> Vec<(usize, usize)> {
    let mut out = vec![(0, 0); vars.len()];
    let mut idx = 0;
    for i in 0..m {
        for j in i..m {
            let v = match vars.sym_roles() {
                Some(r) => r.slot(i, j),
                None => idx,
            };
            out[v] = (i, j);
            idx += 1;
        }
    }
    out
}

fn point_of(s: &NumSymMatrix, vars: &VarTable) -> Vec<f64> {
    slots(vars, s.size()).iter().map(|&(i, j)| s.get(i, j)).collect()
}

fn subset_name(idx: &[usize], m: usize) -> String {
    let parts: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    format!("det(S_{})", if m < 10 { parts.concat() } else { parts.join(",") })
}

/// Names the smallest principal minor dividing `den` that nearly vanishes at `s`.
fn name_singular(den: &Polynomial, s: &NumSymMatrix, vars: &VarTable) -> String {
    let m = s.size();
    let mut subsets: Vec<Vec<usize>> = (1u32..(1 << m))
        .map(|mask| (0..m).filter(|&i| mask >> i & 1 == 1).collect())
        .collect();
    subsets.sort_by_key(|w| w.len());
    let Ok(full) = SymMatrix::generic(vars, den.domain()) else {
        return "a denominator of Ψ".into();
    };
    for w in subsets {
        let Ok(sub) = full.submatrix(&w) else { continue };
        let minor = det_exact(&sub);
        let (v, sc) = Compiled::new(&minor).eval(&point_of(s, vars));
        if v.abs() <= 1e-12 * sc.max(f64::MIN_POSITIVE) && den.div_exact(&minor).is_some() {
            return subset_name(&w, m);
        }
    }
    "a denominator of Ψ".into()
}

/// Entrywise evaluation of `Ψ` at `S`.
pub fn evaluate(mf: &ModelFormula, s: &NumSymMatrix) -> Result<NumSymMatrix> {
    let Mle::Matrix(psi) = &mf.psi else {
        return Err(Error::Input("numeric evaluation needs a symmetric-matrix model".into()));
    };
    let m = psi.size();
    if s.size() != m {
        return Err(Error::SizeMismatch(format!("S is {}x{}, model has m = {m}", s.size(), s.size())));
    }
    let x = point_of(s, &mf.dual_vars);
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let f = psi.get(i, j);
            let (num, _) = Compiled::new(f.num()).eval(&x);
            let (den, scale) = Compiled::new(f.den()).eval(&x);
            if den.abs() <= 1e-12 * scale {
                return Err(Error::NearSingular(name_singular(f.den(), s, &mf.dual_vars)));
            }
            k[(i, j)] = num / den;
            k[(j, i)] = num / den;
        }
    }
    Ok(NumSymMatrix::symmetrized(k))
}

fn frob(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

fn e_sym(m: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(m, m);
    e[(i, j)] = 1.0;
    e[(j, i)] = 1.0;
    e
}

/// Gram-Schmidt under the trace inner product, dropping dependent directions.
fn orthonormalize(vs: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    let mut out: Vec<DMatrix<f64>> = Vec::new();
    for v in vs {
        let norm0 = frob(v, v).sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = frob(&w, q);
                w -= q * c;
            }
        }
        let n = frob(&w, &w).sqrt();
        if n > 1e-10 * norm0 {
            out.push(w / n);
        }
    }
    out
}

/// A linear space of symmetric matrices containing the concentration matrices of a model.
#[derive(Clone, Debug)]
pub struct LinearSpan {
    m: usize,
    basis: Vec<DMatrix<f64>>,
}

impl LinearSpan {
    pub fn full(m: usize) -> Self {
        LinearSpan::from_graph(&UGraph::complete(m))
    }

    /// Matrices supported on the diagonal and the edges.
    pub fn from_graph(g: &UGraph) -> Self {
        let m = g.size();
        let mut vs: Vec<DMatrix<f64>> = (0..m).map(|i| e_sym(m, i, i)).collect();
        vs.extend(g.edges().into_iter().map(|(a, b)| e_sym(m, a, b)));
        LinearSpan { m, basis: orthonormalize(&vs) }
    }

    /// Common kernel of linear forms in the `k` variables.
    pub fn from_linear_equations(eqs: &[Polynomial], vars: &VarTable, m: usize) -> Result<Self> {
        let sl = slots(vars, m);
        let n = sl.len();
        let mut rows = Vec::new();
        for h in eqs {
            if h.homogeneous_degree() != Some(1) {
                return Err(Error::Input("span equations must be linear forms".into()));
            }
            let mut row = vec![0.0; n];
            for t in h.terms() {
                let v = t.mono.exps().iter().position(|&e| e == 1).expect("linear term");
                row[v] = t.coeff.as_rat().expect("rational coefficients").to_f64();
            }
            rows.push(row);
        }
        let basis = kernel_directions(&rows, &sl, m);
        Ok(LinearSpan { m, basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.m, self.m);
        for q in &self.basis {
            out += q * frob(a, q);
        }
        out
    }
}

/// Symmetric matrices whose slot coordinates lie in the kernel of `rows`.
fn kernel_directions(rows: &[Vec<f64>], sl: &[(usize, usize)], m: usize) -> Vec<DMatrix<f64>> {
    let n = sl.len();
    let to_matrix = |d: &[f64]| {
        let mut t = DMatrix::zeros(m, m);
        for (v, &(i, j)) in sl.iter().enumerate() {
            t[(i, j)] = d[v];
            t[(j, i)] = d[v];
        }
        t
    };
    if rows.is_empty() {
        let dirs: Vec<DMatrix<f64>> = (0..n)
            .map(|v| {
                let mut d = vec![0.0; n];
                d[v] = 1.0;
                to_matrix(&d)
            })
            .collect();
        return orthonormalize(&dirs);
    }
    let j = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
    // kernel of J via the eigenvectors of JᵀJ with negligible eigenvalues
    let jtj = j.transpose() * &j;
    let eig = jtj.clone().symmetric_eigen();
    let top = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let dirs: Vec<DMatrix<f64>> = (0..n)
        .filter(|&i| eig.eigenvalues[i].abs() <= 1e-12 * top)
        .map(|i| {
            let v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            to_matrix(&v)
        })
        .collect();
    orthonormalize(&dirs)
}

/// Where tangent directions of the model come from.
#[derive(Clone, Debug)]
pub enum Geometry {
    /// A linear concentration model.
    Span(LinearSpan),
    /// The DAG parametrization `K = (I − Λ) Ω⁻¹ (I − Λ)ᵀ`.
    Dag(Dag),
    /// Kernel of the Jacobian of these equations in the `k` variables.
    Equations(Vec<Polynomial>, VarTable),
}

fn dag_parameters(g: &Dag, k: &NumSymMatrix) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let m = g.size();
    let l = cholesky(k.matrix()).ok_or(Error::NotPositiveDefinite)?;
    let sigma = cholesky_inverse(&l);
    let mut lambda = DMatrix::zeros(m, m);
    let mut omega = vec![0.0; m];
    for v in 0..m {
        let pa = g.parents(v)?;
        if pa.is_empty() {
            omega[v] = sigma[(v, v)];
            continue;
        }
        let spa = DMatrix::from_fn(pa.len(), pa.len(), |a, b| sigma[(pa[a], pa[b])]);
        let rhs = DVector::from_fn(pa.len(), |a, _| sigma[(pa[a], v)]);
        let coef = spa.cholesky().ok_or(Error::NotPositiveDefinite)?.solve(&rhs);
        for (a, &u) in pa.iter().enumerate() {
            lambda[(u, v)] = coef[a];
        }
        omega[v] = sigma[(v, v)] - rhs.dot(&coef);
    }
    Ok((lambda, omega))
}

fn dag_point(lambda: &DMatrix<f64>, omega: &[f64]) -> DMatrix<f64> {
    let m = omega.len();
    let a = DMatrix::identity(m, m) - lambda;
    let oinv = DMatrix::from_diagonal(&DVector::from_iterator(m, omega.iter().map(|w| 1.0 / w)));
    &a * oinv * a.transpose()
}

impl Geometry {
    /// Orthonormal tangent directions at `k`.
    /// Geometry read off a symmetric model's equations: the full space, a
    /// linear span, or the variety itself.
    pub fn of_model(mf: &ModelFormula) -> Option<Geometry> {
        let m = mf.sym_size()?;
        if mf.equations.is_empty() {
            return Some(Geometry::Span(LinearSpan::full(m)));
        }
        if mf.equations.iter().all(|h| h.homogeneous_degree() == Some(1)) {
            return LinearSpan::from_linear_equations(&mf.equations, &mf.primal_vars, m).ok().map(Geometry::Span);
        }
        Some(Geometry::Equations(mf.equations.clone(), mf.primal_vars.clone()))
    }

    pub fn tangent(&self, k: &NumSymMatrix) -> Result<Vec<DMatrix<f64>>> {
        let m = k.size();
        match self {
            Geometry::Span(s) => Ok(s.basis.clone()),
            Geometry::Dag(g) => {
                let (lambda, omega) = dag_parameters(g, k)?;
                let a = DMatrix::identity(m, m) - &lambda;
                let oinv = DMatrix::from_diagonal(&DVector::from_iterator(m, omega.iter().map(|w| 1.0 / w)));
                let mut dirs = Vec::new();
                for (u, v) in g.edges() {
                    let mut e = DMatrix::zeros(m, m);
                    e[(u, v)] = 1.0;
                    let left = &e * &oinv * a.transpose();
                    dirs.push(-(&left + left.transpose()));
                }
                for v in 0..m {
                    let col = a.column(v);
                    dirs.push(-(&col * col.transpose()) / (omega[v] * omega[v]));
                }
                Ok(orthonormalize(&dirs))
            }
            Geometry::Equations(eqs, vars) => {
                let sl = slots(vars, m);
                let x = point_of(k, vars);
                let mut rows = Vec::new();
                for h in eqs {
                    let row: Vec<f64> = (0..sl.len()).map(|v| Compiled::new(&h.derivative(v)).eval(&x).0).collect();
                    rows.push(row);
                }
                Ok(kernel_directions(&rows, &sl, m))
            }
        }
    }

    /// Norm of the gradient of `ℓ_S` projected onto the tangent space at `k`.
    pub fn projected_gradient_norm(&self, k: &NumSymMatrix, s: &NumSymMatrix) -> Result<f64> {
        let (_, g) = loglik_and_grad(k, s)?;
        let t = self.tangent(k)?;
        Ok(t.iter().map(|q| frob(g.matrix(), q).powi(2)).sum::<f64>().sqrt())
    }

    /// A random positive definite point of the model, when one can be drawn.
    pub fn random_point<R: Rng>(&self, m: usize, rng: &mut R) -> Option<NumSymMatrix> {
        match self {
            Geometry::Span(s) => {
                let base = s.project(&DMatrix::identity(m, m));
                cholesky(&base)?;
                for _ in 0..1000 {
                    let mut k = base.clone() * rng.gen_range(0.2..3.0);
                    for q in &s.basis {
                        k += q * rng.gen_range(-0.5..0.5);
                    }
                    if cholesky(&k).is_some() {
                        return Some(NumSymMatrix::symmetrized(k));
                    }
                }
                None
            }
            Geometry::Dag(g) => {
                let mut lambda = DMatrix::zeros(m, m);
                for (u, v) in g.edges() {
                    lambda[(u, v)] = rng.gen_range(-1.0..1.0);
                }
                let omega: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..2.0)).collect();
                Some(NumSymMatrix::symmetrized(dag_point(&lambda, &omega)))
            }
            Geometry::Equations(..) => None,
        }
    }
}

/// Random positive definite `Z Zᵀ + 0.1 I`, `Z` uniform in `[−1, 1]`.
pub fn random_pd<R: Rng>(m: usize, rng: &mut R) -> NumSymMatrix {
    let z = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..=1.0));
    NumSymMatrix::symmetrized(&z * z.transpose() + DMatrix::identity(m, m) * 0.1)
}

pub fn random_pd_seeded(m: usize, seed: u64) -> NumSymMatrix {
    random_pd(m, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Maximizes `ℓ_S` over the positive definite part of a linear span by damped
/// Newton steps with backtracking.
pub fn fit_iterative(span: &LinearSpan, s: &NumSymMatrix) -> Result<NumSymMatrix> {
    let m = span.m;
    if s.size() != m {
        return Err(Error::SizeMismatch("S and the span differ in size".into()));
    }
    if !is_pd(s) {
        return Err(Error::NotPositiveDefinite);
    }
    let d = span.basis.len();
    let mut k = span.project(&DMatrix::identity(m, m));
    if cholesky(&k).is_none() {
        return Err(Error::Input("the span has no positive definite element near the identity".into()));
    }
    let c = m as f64 / frob(&k, s.matrix());
    k *= c;
    let ll = |k: &DMatrix<f64>| -> Option<f64> {
        let l = cholesky(k)?;
        Some(2.0 * l.diagonal().iter().map(|x| x.ln()).sum::<f64>() - frob(k, s.matrix()))
    };
    let mut value = ll(&k).expect("positive definite start");
    let max_iter = 100_000;
    let mut gnorm = f64::INFINITY;
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let l = cholesky(&k).expect("iterates stay positive definite");
        let kinv = cholesky_inverse(&l);
        let grad = &kinv - s.matrix();
        let g = DVector::from_iterator(d, span.basis.iter().map(|q| frob(&grad, q)));
        gnorm = g.norm();
        if gnorm < 1e-9 * kinv.norm().max(1.0) {
            return Ok(NumSymMatrix::symmetrized(k));
        }
        let kq: Vec<DMatrix<f64>> = span.basis.iter().map(|q| &kinv * q * &kinv).collect();
        let h = DMatrix::from_fn(d, d, |a, b| frob(&kq[a], &span.basis[b]));
        let dir = match h.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => g.clone(),
        };
        let slope = g.dot(&dir);
        let step_of = |t: f64| {
            let mut kn = k.clone();
            for (q, x) in span.basis.iter().zip(dir.iter()) {
                kn += q * (t * x);
            }
            kn
        };
        let mut t = 1.0;
        let mut moved = false;
        loop {
            let kn = step_of(t);
            if let Some(v) = ll(&kn) {
                if v >= value + 1e-4 * t * slope || t < 1e-12 {
                    if v > value {
                        k = kn;
                        value = v;
                        moved = true;
                    }
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-30 {
                break;
            }
        }
        if !moved {
            // no ascent left at working precision
            if gnorm < 1e-7 * kinv.norm().max(1.0) {
                return Ok(NumSymMatrix::symmetrized(k));
            }
            break;
        }
    }
    Err(Error::NonConvergence { iterations, gradient_norm: gnorm })
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub k_hat: NumSymMatrix,
    pub gradient_norm: Option<f64>,
    pub pd: bool,
    pub loglik: Option<f64>,
    pub optimizer_k: Option<NumSymMatrix>,
    pub distance: Option<f64>,
}

/// Closed-form estimate with diagnostics; the optimizer runs when `verify`
/// is set and the geometry is a linear span.
pub fn fit(mf: &ModelFormula, geometry: Option<&Geometry>, s: &NumSymMatrix, verify: bool) -> Result<FitReport> {
    let k_hat = evaluate(mf, s)?;
    let pd = is_pd(&k_hat);
    let loglik = if pd { Some(loglik_and_grad(&k_hat, s)?.0) } else { None };
    let gradient_norm = match (geometry, pd) {
        (Some(g), true) => Some(g.projected_gradient_norm(&k_hat, s)?),
        _ => None,
    };
    let (optimizer_k, distance) = match geometry {
        Some(Geometry::Span(span)) if verify => {
            let k = fit_iterative(span, s)?;
            let dist = k.max_abs_diff(&k_hat);
            (Some(k), Some(dist))
        }
        _ => (None, None),
    };
    Ok(FitReport { k_hat, gradient_norm, pd, loglik, optimizer_k, distance })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ImageDiagnostics {
    pub samples: usize,
    pub skipped: usize,
    pub equation_failures: usize,
    pub euler_failures: usize,
    pub max_equation_residual: f64,
    pub max_euler_error: f64,
}

/// Evaluates `Ψ` at `count` random covariances and checks the model
/// equations (relative residual `1e-9`) and `tr(SΨ(S)) = m` (relative `1e-10`).
pub fn image_sample(mf: &ModelFormula, count: usize, seed: u64) -> Result<ImageDiagnostics> {
    let m = mf.sym_size().ok_or_else(|| Error::Input("image sampling needs a symmetric model".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eqs: Vec<Compiled> = mf.equations.iter().map(Compiled::new).collect();
    let mut out = ImageDiagnostics::default();
    for _ in 0..count {
        let s = random_pd(m, &mut rng);
        let k = match evaluate(mf, &s) {
            Ok(k) => k,
            Err(Error::NearSingular(_)) => {
                out.skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        out.samples += 1;
        let x = point_of(&k, &mf.primal_vars);
        for h in &eqs {
            let (v, sc) = h.eval(&x);
            let r = if sc > 0.0 { v.abs() / sc } else { v.abs() };
            out.max_equation_residual = out.max_equation_residual.max(r);
            if r > 1e-9 {
                out.equation_failures += 1;
            }
        }
        let prod = s.matrix().component_mul(k.matrix());
        let scale = prod.abs().sum().max(1.0);
        let err = (prod.sum() - m as f64).abs() / scale;
        out.max_euler_error = out.max_euler_error.max(err);
        if err > 1e-10 {
            out.euler_failures += 1;
        }
    }
    Ok(out)
}

/// `Φ(S) = Π det S_pa(v) / det S_{v ∪ pa(v)}`, each factor the reciprocal of a
/// Schur complement.
pub fn dag_phi_value(g: &Dag, s: &NumSymMatrix) -> Result<f64> {
    let mut phi = 1.0;
    for v in 0..g.size() {
        let pa = g.parents(v)?;
        let schur = if pa.is_empty() {
            s.get(v, v)
        } else {
            let spa = DMatrix::from_fn(pa.len(), pa.len(), |a, b| s.get(pa[a], pa[b]));
            let l = cholesky(&spa).ok_or(Error::NotPositiveDefinite)?;
            // ‖L⁻¹ s_pa,v‖² = s_v,pa S_pa⁻¹ s_pa,v
            let mut y = vec![0.0; pa.len()];
            for i in 0..pa.len() {
                let mut t = s.get(pa[i], v);
                for k in 0..i {
                    t -= l[(i, k)] * y[k];
                }
                y[i] = t / l[(i, i)];
            }
            s.get(v, v) - y.iter().map(|t| t * t).sum::<f64>()
        };
        phi /= schur;
    }
    Ok(phi)
}

/// `K̂ = Σ_v [S_{v ∪ pa(v)}⁻¹]^pad − [S_pa(v)⁻¹]^pad`.
pub fn dag_mle_padded(g: &Dag, s: &NumSymMatrix) -> Result<NumSymMatrix> {
    let m = g.size();
    let mut k = DMatrix::zeros(m, m);
    let add_inverse = |idx: &[usize], sign: f64, k: &mut DMatrix<f64>| -> Result<()> {
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| s.get(idx[a], idx[b]));
        let inv = cholesky_inverse(&cholesky(&sub).ok_or(Error::NotPositiveDefinite)?);
        for a in 0..idx.len() {
            for b in 0..idx.len() {
                k[(idx[a], idx[b])] += sign * inv[(a, b)];
            }
        }
        Ok(())
    };
    for v in 0..m {
        let pa = g.parents(v)?.to_vec();
        let mut fa = pa.clone();
        fa.push(v);
        add_inverse(&fa, 1.0, &mut k)?;
        if !pa.is_empty() {
            add_inverse(&pa, -1.0, &mut k)?;
        }
    }
    Ok(NumSymMatrix::symmetrized(k))
}
