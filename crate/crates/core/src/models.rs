//! Closed-form solutions `Φ` and MLE maps `Ψ` for the model families with ML degree one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{decompose, Dag, UGraph, WeakDecomposition};
use crate::pde::{self, CheckOptions, Convention, Mle};
use crate::poly::{
    parse, parse_rational, Coefficient, Domain, Polynomial, Rat, RationalFunction, VarTable,
};
use crate::symcalc::{
    congruence_pullback, det_bareiss, det_exact, inverse, linear_form, QMatrix, QuadricPair,
    SymMatrix,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Chordal,
    Dag,
    Product,
    Quadric,
    #[serde(rename = "linearF")]
    LinearF,
    Custom,
}

/// A verified solution of the homaloidal PDE with its MLE map.
#[derive(Clone, Debug)]
pub struct ModelFormula {
    pub kind: ModelKind,
    pub convention: Convention,
    /// Variables of `Φ` and `Ψ` (data side).
    pub dual_vars: VarTable,
    /// Variables of `F` and of the model equations.
    pub primal_vars: VarTable,
    pub phi: RationalFunction,
    pub psi: Mle,
    pub f: Polynomial,
    pub equations: Vec<Polynomial>,
}

impl ModelFormula {
    pub fn degree(&self) -> u32 {
        self.f.total_degree().unwrap_or(0)
    }

    /// Replaces the variable names without touching the formulas.
    pub fn with_names(mut self, dual: VarTable, primal: VarTable) -> Result<Self> {
        if dual.len() != self.dual_vars.len() || primal.len() != self.primal_vars.len() {
            return Err(Error::SizeMismatch("renaming changes the variable count".into()));
        }
        self.dual_vars = dual;
        self.primal_vars = primal;
        Ok(self)
    }

    /// Runs every construction-time invariant.
    pub fn verify(&self) -> Result<()> {
        let d = self
            .f
            .homogeneous_degree()
            .ok_or_else(|| Error::NotHomogeneous("F".into()))?;
        if self.phi.homogeneous_degree() != Some(-(d as i64)) {
            return Err(Error::Invariant(format!("Φ is not homogeneous of degree -{d}")));
        }
        for (i, e) in self.psi.coordinates().iter().enumerate() {
            if !e.is_zero() && e.homogeneous_degree() != Some(-1) {
                return Err(Error::Invariant(format!("Ψ coordinate {i} is not of degree -1")));
            }
        }
        if pde::mle_of(&self.phi, self.convention)? != self.psi {
            return Err(Error::Invariant("Ψ differs from -grad log Φ".into()));
        }
        let expected = match self.convention {
            Convention::Generic => d as i64,
            Convention::Symmetric(m) => m as i64,
        };
        let n = self.phi.nvars();
        if self.psi.euler_pairing() != RationalFunction::from_int(n, Domain::Rational, expected) {
            return Err(Error::Invariant("Euler pairing fails".into()));
        }
        let value = self.psi.apply(&self.f)?;
        if value != self.phi {
            let r = &value - &self.phi;
            return Err(Error::PdeFailure(pde::render_truncated(&r, &self.dual_vars, 10)));
        }
        let coords = self.psi.coordinates();
        for (i, h) in self.equations.iter().enumerate() {
            let v = RationalFunction::from_poly(h.clone()).substitute(&coords)?;
            if !v.is_zero() {
                return Err(Error::Invariant(format!("model equation {i} does not vanish on Ψ")));
            }
        }
        Ok(())
    }

    fn verified(self) -> Result<Self> {
        self.verify()?;
        Ok(self)
    }

    pub fn sym_size(&self) -> Option<usize> {
        match self.convention {
            Convention::Symmetric(m) => Some(m),
            Convention::Generic => None,
        }
    }
}

/// Signed multiset of principal minors `det S_W`.
#[derive(Default, Debug, Clone)]
struct MinorProduct {
    exps: BTreeMap<Vec<usize>, i32>,
}

impl MinorProduct {
    fn add(&mut self, w: &[usize], e: i32) {
        if w.is_empty() {
            return;
        }
        let mut key = w.to_vec();
        key.sort_unstable();
        *self.exps.entry(key).or_insert(0) += e;
    }

    fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, i32)> {
        self.exps.iter().filter(|(_, &e)| e != 0).map(|(w, &e)| (w, e))
    }

    /// `Φ = ∏ det(S_W)^{e_W}`. Distinct principal minors of a generic
    /// symmetric matrix are distinct irreducibles, so no gcd is needed.
    fn phi(&self, s: &SymMatrix<Polynomial>) -> Result<RationalFunction> {
        let mut num = Polynomial::one(s.template().nvars(), Domain::Rational);
        let mut den = num.clone();
        for (w, e) in self.terms() {
            let d = det_exact(&s.submatrix(w)?).pow(e.unsigned_abs());
            if e > 0 {
                num = &num * &d;
            } else {
                den = &den * &d;
            }
        }
        Ok(RationalFunction::from_coprime(num, den))
    }

    /// `Ψ = −∇_S logΦ = Σ −e_W [S_W⁻¹]^V`.
    fn psi(&self, s: &SymMatrix<Polynomial>) -> Result<SymMatrix<RationalFunction>> {
        let m = s.size();
        let t = RationalFunction::zero(s.template().nvars(), Domain::Rational);
        let mut acc = SymMatrix::zeros(m, t);
        for (w, e) in self.terms() {
            let inv = inverse(&s.submatrix(w)?)?.pad(w, m)?;
            let scaled = inv.map(acc.template().clone(), |x| x.scale_int(-(e as i64)));
            acc = acc.add(&scaled)?;
        }
        Ok(acc)
    }
}

fn sym_tables(m: usize) -> (VarTable, VarTable) {
    (VarTable::symmetric("s", m), VarTable::symmetric("k", m))
}

fn minor_model(
    kind: ModelKind,
    m: usize,
    minors: &MinorProduct,
    equations: Vec<Polynomial>,
) -> Result<ModelFormula> {
    let (s_vars, k_vars) = sym_tables(m);
    let s = SymMatrix::generic(&s_vars, Domain::Rational)?;
    let k = SymMatrix::generic(&k_vars, Domain::Rational)?;
    let phi = minors.phi(&s)?;
    let psi = minors.psi(&s)?;
    ModelFormula {
        kind,
        convention: Convention::Symmetric(m),
        dual_vars: s_vars,
        primal_vars: k_vars,
        phi,
        psi: Mle::Matrix(psi),
        f: det_exact(&k),
        equations,
    }
    .verified()
}

fn non_edge_equations(g: &UGraph) -> Vec<Polynomial> {
    let m = g.size();
    let n = m * (m + 1) / 2;
    let k_vars = VarTable::symmetric("k", m);
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if !g.has_edge(i, j) {
                let slot = k_vars.sym_index(i, j).expect("in range");
                out.push(Polynomial::var(n, Domain::Rational, slot));
            }
        }
    }
    out
}

fn decomposition_minors(d: &WeakDecomposition, acc: &mut MinorProduct) {
    match d {
        WeakDecomposition::Leaf(w) => acc.add(w, -1),
        WeakDecomposition::Split { c, left, right, .. } => {
            acc.add(c, 1);
            decomposition_minors(left, acc);
            decomposition_minors(right, acc);
        }
    }
}

/// Chordal undirected graph: `Φ = ∏_separators det S_C / ∏_cliques det S_W`.
pub fn chordal_phi(g: &UGraph) -> Result<ModelFormula> {
    let peo = match g.chordality() {
        crate::graphs::Chordality::Chordal(peo) => peo,
        crate::graphs::Chordality::NotChordal(cycle) => return Err(Error::NotChordal(cycle)),
    };
    let d = decompose(g, &peo)?;
    chordal_phi_with(g, &d)
}

/// Same, following a caller-supplied weak decomposition.
pub fn chordal_phi_with(g: &UGraph, d: &WeakDecomposition) -> Result<ModelFormula> {
    crate::graphs::validate_decomposition(g, d)?;
    let mut minors = MinorProduct::default();
    decomposition_minors(d, &mut minors);
    let pattern = non_edge_equations(g);
    minor_model(ModelKind::Chordal, g.size(), &minors, pattern)
}

/// The `Φ` of a decomposition without verification; used to compare decompositions cheaply.
pub fn chordal_phi_unverified(g: &UGraph, d: &WeakDecomposition) -> Result<RationalFunction> {
    crate::graphs::validate_decomposition(g, d)?;
    let mut minors = MinorProduct::default();
    decomposition_minors(d, &mut minors);
    let s = SymMatrix::generic(&VarTable::symmetric("s", g.size()), Domain::Rational)?;
    minors.phi(&s)
}

fn dag_minors(g: &Dag) -> Result<MinorProduct> {
    let mut minors = MinorProduct::default();
    for v in 0..g.size() {
        let pa = g.parents(v)?;
        let mut fam = pa.to_vec();
        fam.push(v);
        minors.add(pa, 1);
        minors.add(&fam, -1);
    }
    Ok(minors)
}

/// DAG model: `Φ = ∏_v det S_pa(v) / det S_{v∪pa(v)}`.
pub fn dag_phi(g: &Dag) -> Result<ModelFormula> {
    dag_phi_with_equations(g, Vec::new())
}

/// DAG model with caller-supplied equations in the `k` variables, verified on `Ψ`.
pub fn dag_phi_with_equations(g: &Dag, equations: Vec<Polynomial>) -> Result<ModelFormula> {
    let minors = dag_minors(g)?;
    minor_model(ModelKind::Dag, g.size(), &minors, equations)
}

fn rat_coeff(r: &Rat) -> Coefficient {
    Coefficient::Rational(r.clone())
}

/// Coefficient vector of a linear form.
fn linear_coefficients(p: &Polynomial) -> Result<Vec<Rat>> {
    if !p.is_zero() && p.homogeneous_degree() != Some(1) {
        return Err(Error::Input("expected a linear form".into()));
    }
    let mut c = vec![Rat::zero(); p.nvars()];
    for t in p.terms() {
        let i = (0..p.nvars()).find(|&i| t.mono.exp(i) == 1).expect("linear term");
        c[i] = t.coeff.as_rat().cloned().ok_or_else(|| Error::DomainMismatch("rational forms only".into()))?;
    }
    Ok(c)
}

fn generic_tables(n: usize) -> (VarTable, VarTable) {
    (VarTable::indexed("u", n), VarTable::indexed("x", n))
}

/// `F = ∏ ℓ_i^{a_i}` for a basis `ℓ_i`: `Ψ(u) = Σ a_i/u(p_i) · p_i`.
pub fn product_of_forms(forms: &[Polynomial], exponents: &[u32]) -> Result<ModelFormula> {
    let n = forms.first().map(|f| f.nvars()).ok_or_else(|| Error::Input("no forms".into()))?;
    if forms.len() != exponents.len() {
        return Err(Error::SizeMismatch("one exponent per form".into()));
    }
    if exponents.iter().any(|&a| a == 0) {
        return Err(Error::Input("exponents must be positive".into()));
    }
    if forms.len() != n {
        return Err(Error::NotABasis(format!("{} forms in {} variables", forms.len(), n)));
    }
    let rows: Vec<Vec<Rat>> = forms.iter().map(linear_coefficients).collect::<Result<_>>()?;
    let l = QMatrix::from_rows(rows)?;
    if l.det()?.is_zero() {
        return Err(Error::NotABasis("the forms are linearly dependent".into()));
    }
    // ℓ_i(p_j) = δ_ij: the p_j are the columns of L⁻¹
    let p = l.inverse()?;
    let mut f = Polynomial::one(n, Domain::Rational);
    for (form, &a) in forms.iter().zip(exponents) {
        f = &f * &form.pow(a);
    }
    let zero = RationalFunction::zero(n, Domain::Rational);
    let mut psi = vec![zero; n];
    let mut phi = RationalFunction::one(n, Domain::Rational);
    for (i, &a) in exponents.iter().enumerate() {
        let col: Vec<Rat> = (0..n).map(|k| p.get(k, i).clone()).collect();
        let up = linear_form(&col);
        let inv = RationalFunction::new(Polynomial::from_int(n, Domain::Rational, a as i64), up.clone())?;
        for (k, c) in col.iter().enumerate() {
            if !c.is_zero() {
                psi[k] = &psi[k] + &inv.scale(&rat_coeff(c));
            }
        }
        // ℓ_i(Ψ) = a_i / u(p_i)
        phi = phi.checked_mul(&inv.pow(a as i32)?)?;
    }
    let (u, x) = generic_tables(n);
    ModelFormula {
        kind: ModelKind::Product,
        convention: Convention::Generic,
        dual_vars: u,
        primal_vars: x,
        phi,
        psi: Mle::Vector(psi),
        f,
        equations: Vec::new(),
    }
    .verified()
}

#[derive(Clone, Debug, PartialEq)]
pub enum QuadricKind {
    /// `F = Q` on the whole space.
    Full,
    /// `F = ℓ` on `X = V(Q)`; requires `Q∨(ℓ) = 0`.
    HyperplaneSection(Vec<Rat>),
    /// `F = Q·ℓ` with `V(ℓ)` tangent to `V(Q)`; requires `Q∨(ℓ) = 0`.
    TangentProduct(Vec<Rat>),
}

fn rf(p: Polynomial) -> RationalFunction {
    RationalFunction::from_poly(p)
}

/// Models attached to a smooth quadric.
pub fn quadric_model(qp: &QuadricPair, kind: &QuadricKind) -> Result<ModelFormula> {
    let n = qp.n();
    let qd = rf(qp.qdual.clone());
    let grad: Vec<RationalFunction> = (0..n).map(|i| rf(qp.qdual.derivative(i))).collect();
    // ∇Q∨ / Q∨
    let base: Vec<RationalFunction> = grad
        .iter()
        .map(|g| g.checked_div(&qd))
        .collect::<Result<_>>()?;
    let tangency = |l: &[Rat]| -> Result<(Vec<Rat>, Polynomial)> {
        if l.len() != n {
            return Err(Error::SizeMismatch(format!("ℓ has {} entries, expected {n}", l.len())));
        }
        if l.iter().all(|c| c.is_zero()) {
            return Err(Error::Tangency("ℓ is zero".into()));
        }
        if !qp.qdual_at(l).is_zero() {
            return Err(Error::Tangency("Q-dual does not vanish at ℓ".into()));
        }
        let p = qp.dual_gradient_at(l);
        let lp: Rat = l.iter().zip(&p).fold(Rat::zero(), |acc, (a, b)| acc.add(&a.mul(b)));
        if !qp.q_at(&p).is_zero() || !lp.is_zero() {
            return Err(Error::Tangency("tangency point is off the quadric".into()));
        }
        Ok((p.clone(), linear_form(&p)))
    };
    let (phi, psi, f, equations) = match kind {
        QuadricKind::Full => {
            let phi = RationalFunction::new(Polynomial::from_int(n, Domain::Rational, 4), qp.qdual.clone())?;
            (phi, base, qp.q.clone(), Vec::new())
        }
        QuadricKind::HyperplaneSection(l) => {
            let (p, up) = tangency(l)?;
            let phi = RationalFunction::new(up.clone(), qp.qdual.clone())?;
            let psi = correction(&base, 1, &p, &up)?;
            (phi, psi, linear_form(l), vec![qp.q.primitive_part()])
        }
        QuadricKind::TangentProduct(l) => {
            let (p, up) = tangency(l)?;
            let phi = RationalFunction::new(up.scale_int(16), qp.qdual.pow(2))?;
            let psi = correction(&base, 2, &p, &up)?;
            (phi, psi, &qp.q * &linear_form(l), Vec::new())
        }
    };
    let (u, x) = generic_tables(n);
    ModelFormula {
        kind: ModelKind::Quadric,
        convention: Convention::Generic,
        dual_vars: u,
        primal_vars: x,
        phi,
        psi: Mle::Vector(psi),
        f,
        equations,
    }
    .verified()
}

/// `c·∇Q∨/Q∨ − p/u(p)`.
fn correction(
    base: &[RationalFunction],
    c: i64,
    p: &[Rat],
    up: &Polynomial,
) -> Result<Vec<RationalFunction>> {
    let inv = RationalFunction::new(Polynomial::one(up.nvars(), Domain::Rational), up.clone())?;
    Ok(base
        .iter()
        .zip(p)
        .map(|(b, pi)| {
            let head = b.scale_int(c);
            if pi.is_zero() {
                head
            } else {
                &head - &inv.scale(&rat_coeff(pi))
            }
        })
        .collect())
}

/// `Φ = f/g` solving the PDE for the linear polynomial `ℓ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFSolution {
    pub g: Polynomial,
    pub l: Vec<Rat>,
    /// `f = ℓ(∇g)`.
    pub f: Polynomial,
    pub phi: RationalFunction,
}

/// Checks that `ℓ` is a point of `V(g)` of multiplicity `deg g − 1` and returns `Φ = ℓ(∇g)/g`.
pub fn linear_f_solution(g: &Polynomial, l: &[Rat]) -> Result<LinearFSolution> {
    let n = g.nvars();
    let d = g
        .homogeneous_degree()
        .ok_or_else(|| Error::NotHomogeneous("g must be homogeneous".into()))?;
    if l.len() != n {
        return Err(Error::SizeMismatch(format!("ℓ has {} entries, expected {n}", l.len())));
    }
    let Some(k) = l.iter().position(|c| !c.is_zero()) else {
        return Err(Error::Multiplicity("ℓ is zero".into()));
    };
    if d == 0 {
        return Err(Error::Multiplicity("g is constant".into()));
    }
    // u = M v with first column ℓ and the other columns unit vectors e_j, j ≠ k
    let mut subs = Vec::with_capacity(n);
    let mut next = 1;
    let v = |i: usize| Polynomial::var(n, Domain::Rational, i);
    for (i, li) in l.iter().enumerate() {
        let mut e = v(0).scale(&rat_coeff(li));
        if i != k {
            e = &e + &v(next);
            next += 1;
        }
        subs.push(e);
    }
    let gv = g.compose(&subs)?;
    let f_v: Polynomial = gv.derivative(0);
    if gv.degree_in(0) != 1 || f_v.is_zero() {
        return Err(Error::Multiplicity(format!(
            "ℓ is not a point of multiplicity {} on V(g)",
            d - 1
        )));
    }
    let mut f = Polynomial::zero(n, Domain::Rational);
    for (i, li) in l.iter().enumerate() {
        if !li.is_zero() {
            f = &f + &g.derivative(i).scale(&rat_coeff(li));
        }
    }
    let phi = RationalFunction::new(f.clone(), g.clone())?;
    Ok(LinearFSolution { g: g.clone(), l: l.to_vec(), f, phi })
}

/// The model of a [`LinearFSolution`], with `F = ℓ`.
pub fn linear_f_model(sol: &LinearFSolution) -> Result<ModelFormula> {
    let n = sol.g.nvars();
    let (u, x) = generic_tables(n);
    let psi = pde::mle_of(&sol.phi, Convention::Generic)?;
    ModelFormula {
        kind: ModelKind::LinearF,
        convention: Convention::Generic,
        dual_vars: u,
        primal_vars: x,
        phi: sol.phi.clone(),
        psi,
        f: linear_form(&sol.l),
        equations: Vec::new(),
    }
    .verified()
}

/// A model given by an explicit `Φ`. With `normalize_scalar`, a `Φ` that is
/// off by a constant factor is replaced by the rescaled solution.
pub fn custom_model(
    phi: &RationalFunction,
    f: &Polynomial,
    equations: Vec<Polynomial>,
    convention: Convention,
    opts: &CheckOptions,
) -> Result<ModelFormula> {
    let report = pde::check_with(f, phi, convention, opts)?;
    let (dual, primal) = match convention {
        Convention::Symmetric(m) => sym_tables(m),
        Convention::Generic => generic_tables(phi.nvars()),
    };
    if !report.holds {
        let why = match &report.residual {
            Some(r) => format!("residual {}", pde::render_truncated(r, &dual, 10)),
            None => "rejected at random points".to_string(),
        };
        return Err(Error::PdeFailure(why));
    }
    let phi = match &report.scalar {
        Some(c) => phi.scale(&rat_coeff(c)),
        None => phi.clone(),
    };
    let psi = pde::mle_of(&phi, convention)?;
    ModelFormula {
        kind: ModelKind::Custom,
        convention,
        dual_vars: dual,
        primal_vars: primal,
        phi,
        psi,
        f: f.clone(),
        equations,
    }
    .verified()
}

/// Explicit model JSON: `{"phi": .., "F": .., "equations": [..], "m": 3}` for
/// the symmetric convention, or `"n"` (with optional `"dual_vars"` and
/// `"primal_vars"` names) for the generic one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplicitModelSpec {
    pub phi: String,
    #[serde(rename = "F")]
    pub f: String,
    #[serde(default)]
    pub equations: Vec<String>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub dual_vars: Option<Vec<String>>,
    #[serde(default)]
    pub primal_vars: Option<Vec<String>>,
}

impl ExplicitModelSpec {
    /// Parsed `(Φ, F, equations, convention, dual, primal)`.
    #[allow(clippy::type_complexity)]
    pub fn parse(
        &self,
    ) -> Result<(RationalFunction, Polynomial, Vec<Polynomial>, Convention, VarTable, VarTable)> {
        let (conv, dual, primal) = match (self.m, self.n, &self.dual_vars) {
            (Some(m), _, _) => {
                let (s, k) = sym_tables(m);
                (Convention::Symmetric(m), s, k)
            }
            (None, _, Some(names)) => {
                let dual = VarTable::new(names)?;
                let primal = match &self.primal_vars {
                    Some(p) => VarTable::new(p)?,
                    None => VarTable::indexed("x", names.len()),
                };
                (Convention::Generic, dual, primal)
            }
            (None, Some(n), None) => {
                let (u, x) = generic_tables(n);
                let primal = match &self.primal_vars {
                    Some(p) => VarTable::new(p)?,
                    None => x,
                };
                (Convention::Generic, u, primal)
            }
            (None, None, None) => {
                return Err(Error::Input("model JSON needs \"m\", \"n\" or \"dual_vars\"".into()))
            }
        };
        if dual.len() != primal.len() {
            return Err(Error::SizeMismatch("dual and primal variable counts differ".into()));
        }
        let phi = parse_rational(&self.phi, &dual)?;
        let f = if conv != Convention::Generic && self.f.trim() == "det" {
            det_exact(&SymMatrix::generic(&primal, Domain::Rational)?)
        } else {
            parse(&self.f, &primal)?
        };
        let eqs = self
            .equations
            .iter()
            .map(|e| parse(e, &primal))
            .collect::<Result<Vec<_>>>()?;
        Ok((phi, f, eqs, conv, dual, primal))
    }

    pub fn build(&self, opts: &CheckOptions) -> Result<ModelFormula> {
        let (phi, f, eqs, conv, dual, primal) = self.parse()?;
        custom_model(&phi, &f, eqs, conv, opts)?.with_names(dual, primal)
    }
}

/// Transport by `g`: `Φ'(S) = det(g)² Φ(g S gᵀ)`, equations `h(g⁻ᵀ K g⁻¹)`.
pub fn sl_transport(mf: &ModelFormula, g: &QMatrix) -> Result<ModelFormula> {
    let Convention::Symmetric(m) = mf.convention else {
        return Err(Error::Input("transport acts on symmetric-matrix models".into()));
    };
    let dg = g.det()?;
    if dg.is_zero() {
        return Err(Error::Singular("transport by a singular matrix".into()));
    }
    let pulled = congruence_pullback(&mf.phi, g, &mf.dual_vars)?;
    let phi = pulled.scale(&rat_coeff(&dg.mul(&dg)));
    let g_inv_t = g.inverse()?.transpose();
    let mut equations = Vec::with_capacity(mf.equations.len());
    for h in &mf.equations {
        let t = congruence_pullback(&rf(h.clone()), &g_inv_t, &mf.primal_vars)?;
        let p = t
            .as_polynomial()
            .ok_or_else(|| Error::Invariant("transported equation is not polynomial".into()))?;
        equations.push(p.primitive_part());
    }
    let psi = pde::mle_of(&phi, mf.convention)?;
    let out = ModelFormula {
        kind: mf.kind,
        convention: Convention::Symmetric(m),
        dual_vars: mf.dual_vars.clone(),
        primal_vars: mf.primal_vars.clone(),
        phi,
        psi,
        f: mf.f.clone(),
        equations,
    };
    out.verify()?;
    Ok(out)
}

fn poly_matrix(a_list: &[QMatrix], nvars: usize) -> Result<Vec<Vec<Polynomial>>> {
    let m = a_list[0].nrows();
    for a in a_list {
        if !a.is_square() || a.nrows() != m {
            return Err(Error::SizeMismatch("matrices must be square of one size".into()));
        }
    }
    let mut rows = vec![vec![Polynomial::zero(nvars, Domain::Rational); m]; m];
    for (k, a) in a_list.iter().enumerate() {
        let base = if k == 0 {
            Polynomial::one(nvars, Domain::Rational)
        } else {
            Polynomial::var(nvars, Domain::Rational, k - 1)
        };
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                let c = a.get(i, j);
                if !c.is_zero() {
                    *e = &*e + &base.scale(&rat_coeff(c));
                }
            }
        }
    }
    Ok(rows)
}

/// `det(A₀ + Σ x_i A_i) = F`?
pub fn detrep_verify(a_list: &[QMatrix], f: &Polynomial) -> Result<bool> {
    let k = f.nvars();
    if a_list.len() != k + 1 {
        return Err(Error::SizeMismatch(format!(
            "{} matrices for {} variables",
            a_list.len(),
            k
        )));
    }
    let rows = poly_matrix(a_list, k)?;
    let d = det_bareiss(&rows, &Polynomial::zero(k, Domain::Rational));
    Ok(d == *f)
}

/// Evaluates `det(A₀ + Σ x_i A_i)`.
pub fn detrep_det(a_list: &[QMatrix]) -> Result<Polynomial> {
    if a_list.is_empty() {
        return Err(Error::Input("empty matrix list".into()));
    }
    let k = a_list.len() - 1;
    let rows = poly_matrix(a_list, k)?;
    Ok(det_bareiss(&rows, &Polynomial::zero(k, Domain::Rational)))
}

fn flatten_rank(mats: &[QMatrix]) -> usize {
    if mats.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<Rat>> = mats
        .iter()
        .map(|a| (0..a.nrows()).flat_map(|i| (0..a.ncols()).map(move |j| (i, j))).map(|(i, j)| a.get(i, j).clone()).collect())
        .collect();
    QMatrix::from_rows(rows).expect("rectangular").rank()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetrepAugmentation {
    /// `(B₀, …, B_k)`.
    pub b_list: Vec<QMatrix>,
    /// The input was already linearly independent and is returned unchanged.
    pub passthrough: bool,
}

/// The smallest `r` such that `A_r, …, A_k` is a maximal linearly independent subset.
pub fn independent_suffix(a_list: &[QMatrix]) -> Option<usize> {
    let k = a_list.len().checked_sub(1)?;
    let total = flatten_rank(&a_list[1..]);
    (1..=k + 1).rev().find(|&r| {
        let tail = &a_list[r..];
        flatten_rank(tail) == tail.len() && tail.len() == total
    })
    .or(if total == 0 { Some(k + 1) } else { None })
}

fn block_diag_identity(a: &QMatrix, extra: usize, identity: bool) -> QMatrix {
    let m = a.nrows();
    let mut out = QMatrix::zeros(m + extra, m + extra);
    for i in 0..m {
        for j in 0..m {
            out.set(i, j, a.get(i, j).clone());
        }
    }
    if identity {
        for i in m..m + extra {
            out.set(i, i, Rat::one());
        }
    }
    out
}

/// `B(x) = [[D, A(x)], [A(x), 0]]` with `D = diag(x_1, …, x_{r−1}, 0, …)`, where
/// `A_r, …, A_k` are a maximal independent subset. `det B = F²`.
pub fn detrep_augment(a_list: &[QMatrix], r: usize) -> Result<DetrepAugmentation> {
    if a_list.is_empty() {
        return Err(Error::Input("empty matrix list".into()));
    }
    let k = a_list.len() - 1;
    if r == 0 || r > k + 1 {
        return Err(Error::Input(format!("r = {r} out of range for {k} matrices")));
    }
    let m0 = a_list[0].nrows();
    poly_matrix(a_list, k)?;
    let tail = &a_list[r..];
    let total = flatten_rank(&a_list[1..]);
    if flatten_rank(tail) != tail.len() || tail.len() != total {
        return Err(Error::Input(format!("A_{r}, ..., A_{k} is not a maximal independent subset")));
    }
    if r == 1 {
        return Ok(DetrepAugmentation { b_list: a_list.to_vec(), passthrough: true });
    }
    // D needs r − 1 diagonal slots; an even size makes (−1)^m = 1
    let mut m = m0.max(r - 1);
    if m % 2 == 1 {
        m += 1;
    }
    let extra = m - m0;
    let padded: Vec<QMatrix> = a_list
        .iter()
        .enumerate()
        .map(|(i, a)| block_diag_identity(a, extra, i == 0))
        .collect();
    let mut b_list = Vec::with_capacity(k + 1);
    for (idx, a) in padded.iter().enumerate() {
        let mut b = QMatrix::zeros(2 * m, 2 * m);
        for i in 0..m {
            for j in 0..m {
                let c = a.get(i, j).clone();
                b.set(i, m + j, c.clone());
                b.set(m + i, j, c);
            }
        }
        if idx >= 1 && idx < r {
            b.set(idx - 1, idx - 1, Rat::one());
        }
        b_list.push(b);
    }
    if flatten_rank(&b_list[1..]) != k {
        return Err(Error::Invariant("augmented matrices are dependent".into()));
    }
    Ok(DetrepAugmentation { b_list, passthrough: false })
}
