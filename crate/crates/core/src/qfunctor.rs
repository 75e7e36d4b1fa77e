//! Quasitensor functors into Hilbert spaces.
//!
//! A functor is given on words (`dim`, `arrow_map`, `inclusion`) and is then
//! compressed to irreducible objects: for each irrep `n` a space `F(n)`, and for
//! each pair `(n, m)` the inclusion `S_{n,m}` written in the channels
//! `F(n⊗m) ≅ ⊕_α F(α)` fixed by the isometries `s_α` of the category. The
//! compressed form is what the spectral algebra consumes, and it is also the
//! on-disk format for user-supplied functors.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    adjoint_mul_sparse, c, column_space_isometry, conj, dist, frobenius, hermitian_eigenvalues, identity, inverse,
    kron, unvectorize, vectorize, vstack, Matrix, Tolerance, C64,
};
use crate::repcat::{bullet, Arrow, ConjugateSolution, IrrepLabel, ObjectWord, RepCat};
use crate::tlcat::{evaluate, DualityDatum};

/// Linear map that may be an identity, so identity inclusions cost nothing.
#[derive(Clone, Debug)]
pub enum Lin {
    Id(usize),
    Mat(Matrix),
}

impl Lin {
    pub fn rows(&self) -> usize {
        match self {
            Lin::Id(n) => *n,
            Lin::Mat(m) => m.nrows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Lin::Id(n) => *n,
            Lin::Mat(m) => m.ncols(),
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        match self {
            Lin::Id(n) => identity(*n),
            Lin::Mat(m) => m.clone(),
        }
    }

    pub fn adjoint(&self) -> Lin {
        match self {
            Lin::Id(n) => Lin::Id(*n),
            Lin::Mat(m) => Lin::Mat(m.adjoint()),
        }
    }

    pub fn mul(&self, other: &Lin) -> Lin {
        match (self, other) {
            (Lin::Id(_), x) | (x, Lin::Id(_)) => x.clone(),
            (Lin::Mat(a), Lin::Mat(b)) => Lin::Mat(a * b),
        }
    }

    pub fn apply(&self, m: &Matrix) -> Matrix {
        match self {
            Lin::Id(_) => m.clone(),
            Lin::Mat(a) => a * m,
        }
    }

    pub fn kron(&self, other: &Lin) -> Lin {
        match (self, other) {
            (Lin::Id(a), Lin::Id(b)) => Lin::Id(a * b),
            _ => Lin::Mat(kron(&self.to_matrix(), &other.to_matrix())),
        }
    }

    pub fn dist(&self, other: &Lin) -> f64 {
        match (self, other) {
            (Lin::Id(a), Lin::Id(b)) if a == b => 0.0,
            _ => dist(&self.to_matrix(), &other.to_matrix()),
        }
    }
}

/// A quasitensor functor described on words.
pub trait QuasitensorFunctor: Send + Sync {
    fn name(&self) -> String;
    fn category(&self) -> &Arc<RepCat>;
    fn dim(&self, r: ObjectWord) -> usize;
    /// `F(T)` for `T ∈ (u^a, u^b)`, a `dim(b) × dim(a)` matrix.
    fn arrow_map(&self, t: &Arrow) -> Result<Matrix>;
    /// `S_{a,b} : F(u^a) ⊗ F(u^b) → F(u^{a+b})`.
    fn inclusion(&self, a: ObjectWord, b: ObjectWord) -> Result<Lin>;
}

/// The identity functor into Hilbert spaces.
pub struct Embedding {
    cat: Arc<RepCat>,
}

pub fn make_embedding(cat: Arc<RepCat>) -> Embedding {
    Embedding { cat }
}

impl QuasitensorFunctor for Embedding {
    fn name(&self) -> String {
        "embedding".into()
    }

    fn category(&self) -> &Arc<RepCat> {
        &self.cat
    }

    fn dim(&self, r: ObjectWord) -> usize {
        1 << r
    }

    fn arrow_map(&self, t: &Arrow) -> Result<Matrix> {
        Ok(t.mat.clone())
    }

    fn inclusion(&self, a: ObjectWord, b: ObjectWord) -> Result<Lin> {
        Ok(Lin::Id(1 << (a + b)))
    }
}

/// Which subspaces `K_r ⊆ (C²)^{⊗r}` a family starts from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyBase {
    /// Tensor basis vectors with equally many `e₁` and `e₂` factors.
    WeightZero,
    Full,
}

/// A family of subspaces `K_r`, stored as isometries, with optional overrides.
pub struct SubspaceFamily {
    base: FamilyBase,
    overrides: BTreeMap<ObjectWord, Matrix>,
    memo: Mutex<BTreeMap<ObjectWord, Arc<Matrix>>>,
}

impl Clone for SubspaceFamily {
    fn clone(&self) -> Self {
        SubspaceFamily {
            base: self.base,
            overrides: self.overrides.clone(),
            memo: Mutex::new(BTreeMap::new()),
        }
    }
}

impl SubspaceFamily {
    pub fn new(base: FamilyBase) -> Self {
        SubspaceFamily {
            base,
            overrides: BTreeMap::new(),
            memo: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn weight_zero() -> Self {
        Self::new(FamilyBase::WeightZero)
    }

    pub fn full() -> Self {
        Self::new(FamilyBase::Full)
    }

    /// Replace `K_r` by the column space of `basis`.
    pub fn with_override(mut self, r: ObjectWord, basis: &Matrix, tol: Tolerance) -> Result<Self> {
        if basis.nrows() != 1 << r {
            return Err(Error::Shape(format!("override for word {r} has wrong row count")));
        }
        self.overrides.insert(r, column_space_isometry(basis, tol));
        self.memo.lock().expect("memo poisoned").clear();
        Ok(self)
    }

    pub fn isometry(&self, r: ObjectWord) -> Arc<Matrix> {
        if let Some(m) = self.memo.lock().expect("memo poisoned").get(&r) {
            return m.clone();
        }
        let m = Arc::new(match self.overrides.get(&r) {
            Some(m) => m.clone(),
            None => match self.base {
                FamilyBase::Full => identity(1 << r),
                FamilyBase::WeightZero => weight_zero_isometry(r),
            },
        });
        self.memo
            .lock()
            .expect("memo poisoned")
            .insert(r, m.clone());
        m
    }

    pub fn projection(&self, r: ObjectWord) -> Matrix {
        let w = self.isometry(r);
        &*w * w.adjoint()
    }
}

fn weight_zero_isometry(r: ObjectWord) -> Matrix {
    let n = 1usize << r;
    if r % 2 == 1 {
        return Matrix::zeros(n, 0);
    }
    let cols: Vec<usize> = (0..n)
        .filter(|x| x.count_ones() as usize * 2 == r)
        .collect();
    let mut m = Matrix::zeros(n, cols.len());
    for (k, &x) in cols.iter().enumerate() {
        m[(x, k)] = c(1.0);
    }
    m
}

/// Functor `u ↦ K_u` with arrows restricted and `S` the inclusion.
pub struct SubspaceFunctor {
    cat: Arc<RepCat>,
    family: SubspaceFamily,
    label: String,
}

pub fn make_weight_zero(cat: Arc<RepCat>) -> SubspaceFunctor {
    make_subspace_functor(cat, SubspaceFamily::weight_zero(), "weight-zero")
}

pub fn make_subspace_functor(cat: Arc<RepCat>, family: SubspaceFamily, label: &str) -> SubspaceFunctor {
    SubspaceFunctor {
        cat,
        family,
        label: label.into(),
    }
}

impl SubspaceFunctor {
    pub fn family(&self) -> &SubspaceFamily {
        &self.family
    }
}

impl QuasitensorFunctor for SubspaceFunctor {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn category(&self) -> &Arc<RepCat> {
        &self.cat
    }

    fn dim(&self, r: ObjectWord) -> usize {
        self.family.isometry(r).ncols()
    }

    fn arrow_map(&self, t: &Arrow) -> Result<Matrix> {
        let wa = self.family.isometry(t.source());
        let wb = self.family.isometry(t.target());
        Ok(wb.adjoint() * &t.mat * &*wa)
    }

    fn inclusion(&self, a: ObjectWord, b: ObjectWord) -> Result<Lin> {
        let wa = self.family.isometry(a);
        let wb = self.family.isometry(b);
        let wab = self.family.isometry(a + b);
        Ok(Lin::Mat(adjoint_mul_sparse(&wab, &kron(&wa, &wb))))
    }
}

/// Fiber functor of a duality datum: arrows are re-evaluated through `D`.
pub struct Fiber {
    cat: Arc<RepCat>,
    datum: DualityDatum,
}

pub fn make_fiber(cat: Arc<RepCat>, datum: DualityDatum) -> Result<Fiber> {
    if (datum.mu() - cat.mu()).abs() > 1e-15 {
        return Err(Error::Invalid(format!(
            "datum has mu = {} but the category has mu = {}",
            datum.mu(),
            cat.mu()
        )));
    }
    Ok(Fiber { cat, datum })
}

impl Fiber {
    pub fn datum(&self) -> &DualityDatum {
        &self.datum
    }
}

impl QuasitensorFunctor for Fiber {
    fn name(&self) -> String {
        format!("fiber-{}", self.datum.dim())
    }

    fn category(&self) -> &Arc<RepCat> {
        &self.cat
    }

    fn dim(&self, r: ObjectWord) -> usize {
        self.datum.dim().pow(r as u32)
    }

    fn arrow_map(&self, t: &Arrow) -> Result<Matrix> {
        Ok(evaluate(&t.tl, &self.datum))
    }

    fn inclusion(&self, a: ObjectWord, b: ObjectWord) -> Result<Lin> {
        Ok(Lin::Id(self.dim(a + b)))
    }
}

/// Maximum residual per axiom.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct AxiomReport {
    pub residuals: BTreeMap<String, f64>,
}

impl AxiomReport {
    fn record(&mut self, key: &str, r: f64) {
        let e = self.residuals.entry(key.to_string()).or_insert(0.0);
        if r > *e || r.is_nan() {
            *e = r;
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.residuals.values().all(|r| *r <= tol)
    }

    pub fn merge(&mut self, other: &AxiomReport) {
        for (k, v) in &other.residuals {
            self.record(k, *v);
        }
    }
}

/// Residual of the operator inequality `X ≤ E` for `X = E₁E₂`.
fn le_residual(x: &Matrix, e: &Matrix) -> f64 {
    let herm = dist(x, &x.adjoint());
    let xh = (x + x.adjoint()) * c(0.5);
    let gap = hermitian_eigenvalues(&(e - xh))
        .first()
        .map_or(0.0, |l| (-l).max(0.0));
    herm.max(gap)
}

/// Unit object, unit inclusions, isometry, associativity, projection laws and naturality
/// on all splittings of words up to `max_len`.
pub fn check_axioms(f: &dyn QuasitensorFunctor, max_len: usize) -> Result<AxiomReport> {
    let cat = f.category();
    let mut rep = AxiomReport::default();
    rep.record("unit object", (f.dim(0) as f64 - 1.0).abs());
    for a in 0..=max_len {
        let d = f.dim(a);
        rep.record("unit inclusions", f.inclusion(a, 0)?.dist(&Lin::Id(d)));
        rep.record("unit inclusions", f.inclusion(0, a)?.dist(&Lin::Id(d)));
        for b in 0..=max_len - a {
            let s = f.inclusion(a, b)?;
            let ss = s.adjoint().mul(&s);
            rep.record("isometry of S", ss.dist(&Lin::Id(f.dim(a) * f.dim(b))));
        }
    }
    for a in 0..=max_len {
        for b in 0..=max_len - a {
            for cc in 0..=max_len - a - b {
                let (da, dc) = (f.dim(a), f.dim(cc));
                let s_ab = f.inclusion(a, b)?;
                let s_bc = f.inclusion(b, cc)?;
                let s_ab_c = f.inclusion(a + b, cc)?;
                let s_a_bc = f.inclusion(a, b + cc)?;
                let left = s_ab_c.mul(&s_ab.kron(&Lin::Id(dc)));
                let right = s_a_bc.mul(&Lin::Id(da).kron(&s_bc));
                rep.record("associativity", left.dist(&right));
                let e1 = s_ab_c.mul(&s_ab_c.adjoint());
                let e2 = s_a_bc.mul(&s_a_bc.adjoint());
                let e3 = left.mul(&left.adjoint());
                let p12 = e1.mul(&e2);
                let p21 = e2.mul(&e1);
                rep.record("commuting projections", p12.dist(&e3).max(p21.dist(&e3)));
                if let (Lin::Id(_), Lin::Id(_)) = (&p12, &e3) {
                    rep.record("projection inequality", 0.0);
                } else {
                    rep.record(
                        "projection inequality",
                        le_residual(&p12.to_matrix(), &e3.to_matrix()),
                    );
                }
            }
        }
    }
    // naturality over hom-space bases
    for a in 0..=max_len {
        for b in 0..=max_len - a {
            let s_ab = f.inclusion(a, b)?;
            for a2 in 0..=max_len {
                if (a + a2) % 2 == 1 {
                    continue;
                }
                for b2 in 0..=max_len - a2 {
                    if (b + b2) % 2 == 1 {
                        continue;
                    }
                    let s_ab2 = f.inclusion(a2, b2)?;
                    let hs = cat.hom_basis(a, a2)?;
                    let ht = cat.hom_basis(b, b2)?;
                    let fs: Vec<Matrix> = hs.arrows.iter().map(|x| f.arrow_map(x)).collect::<Result<_>>()?;
                    let ft: Vec<Matrix> = ht.arrows.iter().map(|x| f.arrow_map(x)).collect::<Result<_>>()?;
                    for (x, fx) in hs.arrows.iter().zip(&fs) {
                        for (y, fy) in ht.arrows.iter().zip(&ft) {
                            let xy = cat.tensor(x, y);
                            let lhs = Lin::Mat(f.arrow_map(&xy)?).mul(&s_ab);
                            let rhs = s_ab2.mul(&Lin::Mat(kron(fx, fy)));
                            rep.record("naturality", lhs.dist(&rhs));
                        }
                    }
                }
            }
        }
    }
    // functoriality on composites, a cheap sanity check of arrow_map itself
    for a in 0..=max_len.min(4) {
        for b in (a % 2..=max_len.min(4)).step_by(2) {
            let h1 = cat.hom_basis(a, b)?;
            let h2 = cat.hom_basis(b, a)?;
            for x in h1.arrows.iter().take(3) {
                for y in h2.arrows.iter().take(3) {
                    let xy = cat.compose(y, x)?;
                    let lhs = f.arrow_map(&xy)?;
                    let rhs = f.arrow_map(y)? * f.arrow_map(x)?;
                    rep.record("functoriality", dist(&lhs, &rhs));
                }
            }
        }
    }
    Ok(rep)
}

/// `(R̂, R̄̂)` on `F(ρ)` with the antilinear `J ψ = r_ψ* R̂`.
#[derive(Clone, Debug)]
pub struct PushedConjugate {
    pub solution: ConjugateSolution,
    /// Matrix of `J`: `J x = j_matrix · x̄`.
    pub j_matrix: Matrix,
    pub conjugate_residual: f64,
}

impl PushedConjugate {
    fn from_vectors(rhat: Matrix, rbarhat: Matrix) -> Result<Self> {
        let solution = ConjugateSolution::new(rhat, rbarhat)?;
        let conjugate_residual = if solution.dim == 0 { 0.0 } else { solution.residual() };
        Ok(PushedConjugate {
            j_matrix: solution.j_matrix(),
            solution,
            conjugate_residual,
        })
    }

    pub fn dim(&self) -> usize {
        self.solution.dim
    }

    /// `‖R̂‖ ‖R̄̂‖`.
    pub fn qmult(&self) -> f64 {
        self.solution.dimension()
    }

    /// `(Tr(JJ*) Tr((JJ*)⁻¹))^{1/2}`, computed from `R̂` alone.
    pub fn qmult_trace(&self) -> Result<f64> {
        if self.dim() == 0 {
            return Ok(0.0);
        }
        let jj = &self.j_matrix * self.j_matrix.adjoint();
        let t1: f64 = jj.trace().re;
        let t2: f64 = inverse(&jj)?.trace().re;
        Ok((t1 * t2).sqrt())
    }
}

/// Push the nested solution of `u^r` through the word-level functor.
pub fn push_conjugate_word(f: &dyn QuasitensorFunctor, r: ObjectWord) -> Result<PushedConjugate> {
    let cat = f.category();
    let cup = cat.word_cup(r);
    let sol = cat.conjugate(r);
    let ratio = sol.rbar[(first_nonzero(&sol.r), 0)] / sol.r[(first_nonzero(&sol.r), 0)];
    let fr = f.arrow_map(&cup)?;
    let s = f.inclusion(r, r)?;
    let rhat = s.adjoint().apply(&fr);
    let rbarhat = &rhat * ratio;
    PushedConjugate::from_vectors(rhat, rbarhat)
}

fn first_nonzero(v: &Matrix) -> usize {
    v.iter().position(|z| z.norm() > 0.0).unwrap_or(0)
}

/// Irrep-level description of a quasitensor functor.
#[derive(Clone, Debug)]
pub struct IrrepFunctor {
    pub name: String,
    pub mu: f64,
    pub max_label: IrrepLabel,
    pub dims: Vec<usize>,
    /// For `n + m ≤ max_label`: `S_{n,m}` stacked over the channels `α ∈ n⊗m`
    /// in ascending order, `Σ_α d_α × d_n d_m`.
    pub inclusions: BTreeMap<(IrrepLabel, IrrepLabel), Matrix>,
    /// Isometries `F(n) → F(u^n)` when the functor came from words.
    pub carriers: Option<Vec<Matrix>>,
    /// Pushed standardized solutions `(R̂_n, R̄̂_n)`; grades with `2n ≤ max_label`
    /// can also be recovered from the inclusions.
    pub conjugates: BTreeMap<IrrepLabel, (Matrix, Matrix)>,
}

pub fn channels(n: IrrepLabel, m: IrrepLabel) -> impl Iterator<Item = IrrepLabel> {
    (n.abs_diff(m)..=n + m).step_by(2)
}

impl IrrepFunctor {
    pub fn dim(&self, n: IrrepLabel) -> usize {
        self.dims[n]
    }

    /// `C^α_{n,m} = F(s_α)* S_{n,m}`, a `d_α × d_n d_m` block.
    pub fn block(&self, n: IrrepLabel, m: IrrepLabel, alpha: IrrepLabel) -> Result<Matrix> {
        let full = self.inclusions.get(&(n, m)).ok_or_else(|| {
            Error::Contract(format!("no inclusion stored for ({n}, {m})"))
        })?;
        let mut off = 0;
        for a in channels(n, m) {
            if a == alpha {
                return Ok(full.rows(off, self.dims[a]).into_owned());
            }
            off += self.dims[a];
        }
        Err(Error::Contract(format!("{alpha} is not a channel of {n}⊗{m}")))
    }

    /// Compress a word-level functor to irreps `0..=max_label`.
    pub fn from_functor(f: &dyn QuasitensorFunctor, max_label: IrrepLabel) -> Result<Self> {
        let cat = f.category();
        let tol = cat.tolerance();
        let mut carriers = Vec::with_capacity(max_label + 1);
        for n in 0..=max_label {
            let p = f.arrow_map(&*cat.jw(n)?)?;
            carriers.push(column_space_isometry(&p, tol));
        }
        let dims: Vec<usize> = carriers.iter().map(|w| w.ncols()).collect();
        let mut inclusions = BTreeMap::new();
        for n in 0..=max_label {
            for m in 0..=max_label - n {
                let s = f.inclusion(n, m)?;
                let wnm = kron(&carriers[n], &carriers[m]);
                let x = s.apply(&wnm);
                let mut blocks = Vec::new();
                for ch in cat.fusion(n, m)?.iter() {
                    let fs = f.arrow_map(&ch.lift)? * &carriers[ch.alpha];
                    blocks.push(fs.adjoint() * &x);
                }
                inclusions.insert((n, m), vstack(&blocks, dims[n] * dims[m]));
            }
        }
        let mut conjugates = BTreeMap::new();
        for n in 0..=max_label {
            if dims[n] > 0 {
                let p = push_conjugate_carrier(f, &carriers[n], n)?;
                conjugates.insert(n, (p.solution.r, p.solution.rbar));
            }
        }
        Ok(IrrepFunctor {
            name: f.name(),
            mu: cat.mu(),
            max_label,
            dims,
            inclusions,
            carriers: Some(carriers),
            conjugates,
        })
    }

    /// The pushed standardized solution of irrep `n`.
    pub fn conjugate(&self, cat: &RepCat, n: IrrepLabel) -> Result<PushedConjugate> {
        if n > self.max_label {
            return Err(Error::Contract(format!("irrep {n} exceeds max_label")));
        }
        if self.dims[n] == 0 {
            return PushedConjugate::from_vectors(Matrix::zeros(0, 1), Matrix::zeros(0, 1));
        }
        if let Some((r, rb)) = self.conjugates.get(&n) {
            return PushedConjugate::from_vectors(r.clone(), rb.clone());
        }
        if 2 * n <= self.max_label {
            return push_conjugate_irrep(cat, self, n);
        }
        Err(Error::Contract(format!("no conjugate data for irrep {n}")))
    }
}

/// `R̂_n = (W⊗W)* S*_{u^n,u^n} F(R_n)` with `R_n` the standardized irrep solution
/// placed in `u^{2n}`.
fn push_conjugate_carrier(f: &dyn QuasitensorFunctor, carrier: &Matrix, n: IrrepLabel) -> Result<PushedConjugate> {
    let cat = f.category();
    let sol = cat.irrep_conjugate(n)?;
    let w = cat.irrep_isometry(n)?;
    let ww = kron(&w, &w);
    let s_adj = f.inclusion(n, n)?.adjoint();
    let d = carrier.nrows();
    // (W⊗W)* y = vec(W* Y conj(W)) for row-major vec, avoiding the Kronecker product
    let push = |v: &Matrix| -> Result<Matrix> {
        let lifted = cat.lift(0, 2 * n, &(&ww * v))?;
        let y = unvectorize(&s_adj.apply(&f.arrow_map(&lifted)?), d, d)?;
        Ok(vectorize(&(carrier.adjoint() * y * conj(carrier))))
    };
    PushedConjugate::from_vectors(push(&sol.r)?, push(&sol.rbar)?)
}

/// Recoupling scalar `ω(β, β'; γ)` between the two bracketings of `n⊗m⊗k`.
pub fn recoupling(
    cat: &RepCat,
    n: IrrepLabel,
    m: IrrepLabel,
    k: IrrepLabel,
    beta: IrrepLabel,
    beta2: IrrepLabel,
    gamma: IrrepLabel,
) -> Result<C64> {
    let find = |a: usize, b: usize, al: usize| -> Result<Matrix> {
        cat.fusion(a, b)?
            .iter()
            .find(|ch| ch.alpha == al)
            .map(|ch| ch.s.clone())
            .ok_or_else(|| Error::Contract(format!("{al} is not in {a}⊗{b}")))
    };
    let l = kron(&find(n, m, beta)?, &identity(k + 1)) * find(beta, k, gamma)?;
    let r = kron(&identity(n + 1), &find(m, k, beta2)?) * find(n, beta2, gamma)?;
    Ok((l.adjoint() * r).trace() / c((gamma + 1) as f64))
}

/// Irrep-level axioms: unit, isometry, associativity through the recoupling
/// scalars of the category, and the projection laws for triples with `n+m+k ≤ max_label`.
pub fn check_irrep_axioms(cat: &RepCat, f: &IrrepFunctor) -> Result<AxiomReport> {
    let mut rep = AxiomReport::default();
    if (f.mu - cat.mu()).abs() > 1e-12 {
        return Err(Error::Invalid("functor and category disagree on mu".into()));
    }
    rep.record("unit object", (f.dims[0] as f64 - 1.0).abs());
    for (&(n, m), s) in &f.inclusions {
        let d = f.dims[n] * f.dims[m];
        rep.record("isometry of S", dist(&(s.adjoint() * s), &identity(d)));
        if n == 0 || m == 0 {
            rep.record("unit inclusions", dist(s, &identity(d)));
        }
    }
    let ml = f.max_label;
    for n in 0..=ml {
        for m in 0..=ml - n {
            for k in 0..=ml - n - m {
                let (dn, dm, dk) = (f.dims[n], f.dims[m], f.dims[k]);
                let dom = dn * dm * dk;
                // left coordinates (β, γ) and right coordinates (β', γ)
                let mut left_slots = Vec::new();
                let mut left_maps = Vec::new();
                for beta in channels(n, m) {
                    let cb = f.block(n, m, beta)?;
                    let cbk = kron(&cb, &identity(dk));
                    for gamma in channels(beta, k) {
                        left_slots.push((beta, gamma));
                        left_maps.push(f.block(beta, k, gamma)? * &cbk);
                    }
                }
                let mut right_slots = Vec::new();
                let mut right_maps = Vec::new();
                for beta2 in channels(m, k) {
                    let cb = kron(&identity(dn), &f.block(m, k, beta2)?);
                    for gamma in channels(n, beta2) {
                        right_slots.push((beta2, gamma));
                        right_maps.push(f.block(n, beta2, gamma)? * &cb);
                    }
                }
                let mut omega = BTreeMap::new();
                for &(b, g) in &left_slots {
                    for &(b2, g2) in &right_slots {
                        if g == g2 {
                            omega.insert((b, b2, g), recoupling(cat, n, m, k, b, b2, g)?);
                        }
                    }
                }
                let mut assoc: f64 = 0.0;
                for (i, &(b, g)) in left_slots.iter().enumerate() {
                    let mut acc = Matrix::zeros(f.dims[g], dom);
                    for (j, &(b2, g2)) in right_slots.iter().enumerate() {
                        if g2 == g {
                            acc += &right_maps[j] * omega[&(b, b2, g)];
                        }
                    }
                    assoc = assoc.max(dist(&left_maps[i], &acc));
                }
                rep.record("associativity", assoc);

                // projections on F(n⊗m⊗k) in left coordinates
                let offs = |slots: &[(usize, usize)]| -> Vec<usize> {
                    let mut o = vec![0];
                    for &(_, g) in slots {
                        o.push(o.last().unwrap() + f.dims[g]);
                    }
                    o
                };
                let lo = offs(&left_slots);
                let ro = offs(&right_slots);
                let total = *lo.last().unwrap();
                if total == 0 {
                    continue;
                }
                let mut omega_mat = Matrix::zeros(total, *ro.last().unwrap());
                for (i, &(b, g)) in left_slots.iter().enumerate() {
                    for (j, &(b2, g2)) in right_slots.iter().enumerate() {
                        if g == g2 {
                            let w = omega[&(b, b2, g)];
                            for t in 0..f.dims[g] {
                                omega_mat[(lo[i] + t, ro[j] + t)] = w;
                            }
                        }
                    }
                }
                let mut e1 = Matrix::zeros(total, total);
                for beta in channels(n, m) {
                    let rows: Vec<usize> = left_slots
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| s.0 == beta)
                        .map(|(i, _)| i)
                        .collect();
                    if rows.is_empty() {
                        continue;
                    }
                    let (start, end) = (lo[rows[0]], lo[*rows.last().unwrap() + 1]);
                    let g = f.inclusions[&(beta, k)].clone();
                    let proj = &g * g.adjoint();
                    e1.view_mut((start, start), (end - start, end - start))
                        .copy_from(&proj);
                }
                let rt = *ro.last().unwrap();
                let mut e2r = Matrix::zeros(rt, rt);
                for beta2 in channels(m, k) {
                    let cols: Vec<usize> = right_slots
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| s.0 == beta2)
                        .map(|(i, _)| i)
                        .collect();
                    if cols.is_empty() {
                        continue;
                    }
                    let (start, end) = (ro[cols[0]], ro[*cols.last().unwrap() + 1]);
                    let g = f.inclusions[&(n, beta2)].clone();
                    let proj = &g * g.adjoint();
                    e2r.view_mut((start, start), (end - start, end - start))
                        .copy_from(&proj);
                }
                let e2 = &omega_mat * e2r * omega_mat.adjoint();
                let s3 = vstack(&left_maps, dom);
                let e3 = &s3 * s3.adjoint();
                let p12 = &e1 * &e2;
                let p21 = &e2 * &e1;
                rep.record(
                    "commuting projections",
                    dist(&p12, &e3).max(dist(&p21, &e3)),
                );
                rep.record("projection inequality", le_residual(&p12, &e3));
            }
        }
    }
    Ok(rep)
}

/// Conjugate solution of irrep `n` pushed through the irrep-level functor.
pub fn push_conjugate_irrep(cat: &RepCat, f: &IrrepFunctor, n: IrrepLabel) -> Result<PushedConjugate> {
    let sol = cat.irrep_conjugate(n)?;
    push_solution_irrep(cat, f, n, &sol)
}

/// Push an arbitrary solution `(R, R̄)` for irrep `n`.
pub fn push_solution_irrep(
    cat: &RepCat,
    f: &IrrepFunctor,
    n: IrrepLabel,
    sol: &ConjugateSolution,
) -> Result<PushedConjugate> {
    if sol.dim != n + 1 {
        return Err(Error::Contract(format!("solution does not belong to irrep {n}")));
    }
    let (rho, rhobar, c0) = unit_channel(cat, f, n, sol)?;
    let v = c0.adjoint();
    PushedConjugate::from_vectors(&v * rho, &v * rhobar)
}

/// `(s₀*R, s₀*R̄, C⁰_{n,n})` for the invariant channel of `n⊗n`.
fn unit_channel(
    cat: &RepCat,
    f: &IrrepFunctor,
    n: IrrepLabel,
    sol: &ConjugateSolution,
) -> Result<(C64, C64, Matrix)> {
    let ch = cat.fusion(n, n)?;
    let s0 = &ch[0].s;
    let rho = (s0.adjoint() * &sol.r)[(0, 0)];
    let rhobar = (s0.adjoint() * &sol.rbar)[(0, 0)];
    Ok((rho, rhobar, f.block(n, n, 0)?))
}

/// `(mult, qmult, qdim)` for irrep `n` with the standardized solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionBounds {
    pub grade: IrrepLabel,
    pub mult: usize,
    pub qmult: f64,
    pub qmult_trace: f64,
    pub qdim: f64,
    pub conjugate_residual: f64,
}

pub fn dimension_bounds(cat: &RepCat, f: &IrrepFunctor, n: IrrepLabel) -> Result<DimensionBounds> {
    let sol = cat.irrep_conjugate(n)?;
    let push = f.conjugate(cat, n)?;
    Ok(DimensionBounds {
        grade: n,
        mult: f.dims[n],
        qmult: push.qmult(),
        qmult_trace: push.qmult_trace()?,
        qdim: sol.dimension(),
        conjugate_residual: push.conjugate_residual,
    })
}

/// True iff `F(R) ∈ Im S` and `F(R̄) ∈ Im S`, the equality case of the bounds.
pub fn equality_case_probe(cat: &RepCat, f: &IrrepFunctor, n: IrrepLabel) -> Result<bool> {
    let (a, b) = equality_residuals(cat, f, n)?;
    let tol = cat.tolerance().eq_tol;
    Ok(a <= tol && b <= tol)
}

/// `(‖(1 − E)F(R)‖, ‖(1 − E)F(R̄)‖)` for irrep `n`.
///
/// In channel coordinates `F(R) = ρ δ₀`, so `(1 − E)F(R) = ρ(δ₀ − S C⁰*)`.
/// Without the `(n, n)` inclusion the norms `‖F(R)‖ = ‖R‖` and `‖E F(R)‖ = ‖R̂‖`
/// are compared instead.
pub fn equality_residuals(cat: &RepCat, f: &IrrepFunctor, n: IrrepLabel) -> Result<(f64, f64)> {
    let sol = cat.irrep_conjugate(n)?;
    if 2 * n <= f.max_label {
        let (rho, rhobar, c0) = unit_channel(cat, f, n, &sol)?;
        let s = &f.inclusions[&(n, n)];
        let mut miss = -(s * c0.adjoint());
        miss[(0, 0)] += c(1.0);
        let m = frobenius(&miss);
        return Ok((rho.norm() * m, rhobar.norm() * m));
    }
    let push = f.conjugate(cat, n)?;
    let gap = |full: f64, part: f64| (full * full - part * part).max(0.0).sqrt();
    Ok((
        gap(sol.norm_r(), push.solution.norm_r()),
        gap(sol.norm_rbar(), push.solution.norm_rbar()),
    ))
}

/// The same probe computed on words: `‖(1 − E) F(R_n)‖` inside `F(u^{2n})`.
pub fn equality_residual_word(f: &dyn QuasitensorFunctor, ir: &IrrepFunctor, n: IrrepLabel) -> Result<f64> {
    let cat = f.category();
    let carriers = ir
        .carriers
        .as_ref()
        .ok_or_else(|| Error::Contract("functor has no word-level carriers".into()))?;
    let sol = cat.irrep_conjugate(n)?;
    let w = cat.irrep_isometry(n)?;
    let ww = kron(&w, &w);
    let lifted = cat.lift(0, 2 * n, &(&ww * &sol.r))?;
    let fr = f.arrow_map(&lifted)?;
    let s = f.inclusion(n, n)?;
    let cn = kron(&carriers[n], &carriers[n]);
    let img = s.apply(&cn);
    let proj = &img * img.adjoint();
    Ok(frobenius(&(&fr - &proj * &fr)))
}

/// `J_{u⊗v} S_{u,v} = S_{v̄,ū}(J_v ⊗ J_u)θ` on words, as a residual.
pub fn lemma_tensor_conjugate_residual(f: &dyn QuasitensorFunctor, a: ObjectWord, b: ObjectWord) -> Result<f64> {
    let (da, db) = (f.dim(a), f.dim(b));
    if da == 0 || db == 0 {
        return Ok(0.0);
    }
    let ja = push_conjugate_word(f, a)?.j_matrix;
    let jb = push_conjugate_word(f, b)?.j_matrix;
    let jab = push_conjugate_word(f, a + b)?.j_matrix;
    let s_ab = f.inclusion(a, b)?.to_matrix();
    let s_ba = f.inclusion(b, a)?.to_matrix();
    let lhs = jab * conj(&s_ab);
    let theta = swap(da, db);
    let rhs = s_ba * kron(&jb, &ja) * theta;
    Ok(dist(&lhs, &rhs))
}

/// Flip `C^p ⊗ C^q → C^q ⊗ C^p`.
pub fn swap(p: usize, q: usize) -> Matrix {
    let mut m = Matrix::zeros(p * q, p * q);
    for i in 0..p {
        for j in 0..q {
            m[(j * p + i, i * q + j)] = c(1.0);
        }
    }
    m
}

/// `F(j_v S j_u⁻¹) = J_v F(S) J_u⁻¹` for `S ∈ (u^a, u^b)`, as a residual.
pub fn lemma_conjugate_arrow_residual(f: &dyn QuasitensorFunctor, s: &Arrow) -> Result<f64> {
    let cat = f.category();
    let (a, b) = (s.source(), s.target());
    if f.dim(a) == 0 || f.dim(b) == 0 {
        return Ok(0.0);
    }
    let sb = bullet(&s.mat, &cat.conjugate(a), &cat.conjugate(b), cat.tolerance())?;
    let lifted = cat.lift(a, b, &sb)?;
    let lhs = f.arrow_map(&lifted)?;
    let ja = push_conjugate_word(f, a)?.j_matrix;
    let jb = push_conjugate_word(f, b)?.j_matrix;
    let rhs = jb * conj(&f.arrow_map(s)?) * inverse(&ja)?;
    Ok(dist(&lhs, &rhs))
}

#[derive(Serialize, Deserialize)]
struct FunctorFile {
    schema: String,
    name: String,
    mu: f64,
    max_label: usize,
    dims: Vec<usize>,
    inclusions: Vec<InclusionEntry>,
    #[serde(default)]
    conjugates: Vec<ConjugateEntry>,
}

#[derive(Serialize, Deserialize)]
struct ConjugateEntry {
    n: usize,
    r_re: Vec<f64>,
    r_im: Vec<f64>,
    rbar_re: Vec<f64>,
    rbar_im: Vec<f64>,
}

fn split_parts(v: &Matrix) -> (Vec<f64>, Vec<f64>) {
    (v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect())
}

fn join_parts(re: &[f64], im: &[f64], len: usize, what: &str) -> Result<Matrix> {
    if re.len() != len || im.len() != len {
        return Err(Error::Invalid(format!("{what} has wrong entry count")));
    }
    if re.iter().chain(im).any(|x| !x.is_finite()) {
        return Err(Error::Invalid(format!("{what} has non-finite entries")));
    }
    Ok(Matrix::from_fn(len, 1, |i, _| C64::new(re[i], im[i])))
}

#[derive(Serialize, Deserialize)]
struct InclusionEntry {
    n: usize,
    m: usize,
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

pub const FUNCTOR_SCHEMA: &str = "qcat-functor/1";

impl IrrepFunctor {
    pub fn to_json(&self) -> Result<String> {
        let inclusions = self
            .inclusions
            .iter()
            .map(|(&(n, m), s)| {
                let (rows, cols) = s.shape();
                let mut re = Vec::with_capacity(rows * cols);
                let mut im = Vec::with_capacity(rows * cols);
                for i in 0..rows {
                    for j in 0..cols {
                        re.push(s[(i, j)].re);
                        im.push(s[(i, j)].im);
                    }
                }
                InclusionEntry { n, m, rows, cols, re, im }
            })
            .collect();
        let conjugates = self
            .conjugates
            .iter()
            .map(|(&n, (r, rb))| {
                let (r_re, r_im) = split_parts(r);
                let (rbar_re, rbar_im) = split_parts(rb);
                ConjugateEntry { n, r_re, r_im, rbar_re, rbar_im }
            })
            .collect();
        let file = FunctorFile {
            schema: FUNCTOR_SCHEMA.into(),
            name: self.name.clone(),
            mu: self.mu,
            max_label: self.max_label,
            dims: self.dims.clone(),
            inclusions,
            conjugates,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Parse and structurally validate; axioms are checked separately.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FunctorFile = serde_json::from_str(text)
            .map_err(|e| Error::Invalid(format!("malformed functor file: {e}")))?;
        if file.schema != FUNCTOR_SCHEMA {
            return Err(Error::Invalid(format!("unknown functor schema '{}'", file.schema)));
        }
        if !(file.mu > 0.0 && file.mu <= 1.0) {
            return Err(Error::Invalid(format!("mu must lie in (0, 1], got {}", file.mu)));
        }
        if file.dims.len() != file.max_label + 1 {
            return Err(Error::Invalid("dims must list every irrep up to max_label".into()));
        }
        if file.dims[0] != 1 {
            return Err(Error::Invalid("the trivial irrep must have dimension 1".into()));
        }
        let mut inclusions = BTreeMap::new();
        for e in file.inclusions {
            if e.n + e.m > file.max_label {
                return Err(Error::Invalid(format!("pair ({}, {}) exceeds max_label", e.n, e.m)));
            }
            let rows: usize = channels(e.n, e.m).map(|a| file.dims[a]).sum();
            let cols = file.dims[e.n] * file.dims[e.m];
            if e.rows != rows || e.cols != cols {
                return Err(Error::Invalid(format!(
                    "inclusion ({}, {}) must be {rows}x{cols}, found {}x{}",
                    e.n, e.m, e.rows, e.cols
                )));
            }
            if e.re.len() != rows * cols || e.im.len() != rows * cols {
                return Err(Error::Invalid(format!("inclusion ({}, {}) has wrong entry count", e.n, e.m)));
            }
            if e.re.iter().chain(e.im.iter()).any(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!("inclusion ({}, {}) has non-finite entries", e.n, e.m)));
            }
            let m = Matrix::from_fn(rows, cols, |i, j| C64::new(e.re[i * cols + j], e.im[i * cols + j]));
            if inclusions.insert((e.n, e.m), m).is_some() {
                return Err(Error::Invalid(format!("duplicate inclusion ({}, {})", e.n, e.m)));
            }
        }
        for n in 0..=file.max_label {
            for m in 0..=file.max_label - n {
                if !inclusions.contains_key(&(n, m)) {
                    return Err(Error::Invalid(format!("missing inclusion ({n}, {m})")));
                }
            }
        }
        let mut conjugates = BTreeMap::new();
        for e in file.conjugates {
            if e.n > file.max_label || file.dims[e.n] == 0 {
                return Err(Error::Invalid(format!("conjugate for irrep {} has no space", e.n)));
            }
            let len = file.dims[e.n] * file.dims[e.n];
            let what = format!("conjugate for irrep {}", e.n);
            let r = join_parts(&e.r_re, &e.r_im, len, &what)?;
            let rb = join_parts(&e.rbar_re, &e.rbar_im, len, &what)?;
            if conjugates.insert(e.n, (r, rb)).is_some() {
                return Err(Error::Invalid(format!("duplicate {what}")));
            }
        }
        Ok(IrrepFunctor {
            name: file.name,
            mu: file.mu,
            max_label: file.max_label,
            dims: file.dims,
            inclusions,
            carriers: None,
            conjugates,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Helper for tests and fault injection: a functor with one inclusion perturbed.
pub struct Perturbed<'a> {
    pub inner: &'a dyn QuasitensorFunctor,
    pub pair: (ObjectWord, ObjectWord),
    pub entry: (usize, usize),
    pub amount: f64,
}

impl QuasitensorFunctor for Perturbed<'_> {
    fn name(&self) -> String {
        format!("{}-perturbed", self.inner.name())
    }

    fn category(&self) -> &Arc<RepCat> {
        self.inner.category()
    }

    fn dim(&self, r: ObjectWord) -> usize {
        self.inner.dim(r)
    }

    fn arrow_map(&self, t: &Arrow) -> Result<Matrix> {
        self.inner.arrow_map(t)
    }

    fn inclusion(&self, a: ObjectWord, b: ObjectWord) -> Result<Lin> {
        let s = self.inner.inclusion(a, b)?;
        if (a, b) != self.pair {
            return Ok(s);
        }
        let mut m = s.to_matrix();
        m[self.entry] += c(self.amount);
        Ok(Lin::Mat(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tlcat::LoopParameter;

    fn cat(mu: f64) -> Arc<RepCat> {
        Arc::new(RepCat::new(mu).unwrap())
    }

    fn fiber4() -> Fiber {
        let c = cat(0.2);
        let l = ((0.52 + 0.1104f64.sqrt()) / 2.0).sqrt();
        let d = DualityDatum::from_pairs(LoopParameter::new(0.2).unwrap(), &[l, l]).unwrap();
        make_fiber(c, d).unwrap()
    }

    #[test]
    fn weight_zero_dims() {
        let f = make_weight_zero(cat(0.5));
        assert_eq!(f.dim(0), 1);
        assert_eq!(f.dim(1), 0);
        assert_eq!(f.dim(2), 2);
        assert_eq!(f.dim(4), 6);
    }

    #[test]
    fn axioms_small_words() {
        let c = cat(0.6);
        let e = make_embedding(c.clone());
        assert!(check_axioms(&e, 3).unwrap().passes(1e-9));
        let w = make_weight_zero(c);
        let rep = check_axioms(&w, 4).unwrap();
        assert!(rep.passes(1e-9), "{rep:?}");
        let f = fiber4();
        assert!(check_axioms(&f, 3).unwrap().passes(1e-9));
    }

    #[test]
    fn perturbed_inclusion_fails() {
        let w = make_weight_zero(cat(0.6));
        let p = Perturbed {
            inner: &w,
            pair: (2, 2),
            entry: (1, 0),
            amount: 1e-3,
        };
        let rep = check_axioms(&p, 4).unwrap();
        assert!(rep.residuals["isometry of S"] >= 1e-4);
        assert!(rep.residuals["naturality"] >= 1e-4);
        assert!(!rep.passes(1e-8));
    }

    #[test]
    fn perturbed_embedding_breaks_associativity() {
        let e = make_embedding(cat(0.3));
        let p = Perturbed {
            inner: &e,
            pair: (1, 1),
            entry: (1, 2),
            amount: 1e-3,
        };
        let rep = check_axioms(&p, 3).unwrap();
        assert!(rep.residuals["associativity"] >= 1e-4, "{rep:?}");
    }

    #[test]
    fn word_and_block_conjugates_agree() {
        let c = cat(0.5);
        for f in [
            Box::new(make_embedding(c.clone())) as Box<dyn QuasitensorFunctor>,
            Box::new(make_weight_zero(c.clone())),
        ] {
            let ir = IrrepFunctor::from_functor(f.as_ref(), 4).unwrap();
            for n in 0..=2 {
                if ir.dims[n] == 0 {
                    continue;
                }
                let a = ir.conjugate(&c, n).unwrap();
                let b = push_conjugate_irrep(&c, &ir, n).unwrap();
                assert!(dist(&a.solution.r, &b.solution.r) < 1e-9);
                assert!(dist(&a.solution.rbar, &b.solution.rbar) < 1e-9);
            }
            for n in 3..=4 {
                if ir.dims[n] > 0 {
                    assert!(ir.conjugate(&c, n).unwrap().conjugate_residual < 1e-9);
                }
            }
        }
    }

    #[test]
    fn irrep_compression_and_axioms() {
        for &mu in &[0.3, 1.0] {
            let c = cat(mu);
            for f in [
                Box::new(make_embedding(c.clone())) as Box<dyn QuasitensorFunctor>,
                Box::new(make_weight_zero(c.clone())),
            ] {
                let ir = IrrepFunctor::from_functor(f.as_ref(), 4).unwrap();
                let rep = check_irrep_axioms(&c, &ir).unwrap();
                assert!(rep.passes(1e-9), "{} {rep:?}", f.name());
            }
        }
        let f = fiber4();
        let ir = IrrepFunctor::from_functor(&f, 3).unwrap();
        assert_eq!(ir.dims, vec![1, 4, 15, 56]);
        assert!(check_irrep_axioms(f.category(), &ir).unwrap().passes(1e-9));
    }

    #[test]
    fn embedding_bounds_are_equalities() {
        let c = cat(0.5);
        let ir = IrrepFunctor::from_functor(&make_embedding(c.clone()), 4).unwrap();
        let b = dimension_bounds(&c, &ir, 1).unwrap();
        assert_eq!(b.mult, 2);
        assert!((b.qmult - 2.5).abs() < 1e-9 && (b.qdim - 2.5).abs() < 1e-12);
        assert!(equality_case_probe(&c, &ir, 1).unwrap());
    }

    #[test]
    fn weight_zero_irrep_two() {
        let c = cat(0.5);
        let f = make_weight_zero(c.clone());
        let ir = IrrepFunctor::from_functor(&f, 4).unwrap();
        let b = dimension_bounds(&c, &ir, 2).unwrap();
        assert_eq!(b.mult, 1);
        assert!((b.qmult - 1.0).abs() < 1e-9);
        assert!((b.qdim - 5.25).abs() < 1e-12);
        assert!((b.qmult_trace - b.qmult).abs() < 1e-9);
        assert!(!equality_case_probe(&c, &ir, 2).unwrap());
        assert!(equality_residual_word(&f, &ir, 2).unwrap() > 0.1);
    }

    #[test]
    fn fiber_equality_case() {
        let f = fiber4();
        let c = f.category().clone();
        let ir = IrrepFunctor::from_functor(&f, 2).unwrap();
        let b = dimension_bounds(&c, &ir, 1).unwrap();
        assert_eq!(b.mult, 4);
        assert!((b.qmult - 5.2).abs() < 1e-9, "{b:?}");
        assert!((b.qdim - 5.2).abs() < 1e-9);
        assert!(equality_case_probe(&c, &ir, 1).unwrap());
        assert!(equality_residual_word(&f, &ir, 1).unwrap() < 1e-9);
        let raw = push_conjugate_word(&f, 1).unwrap();
        assert!((raw.solution.norm_r().powi(2) - 1.04).abs() < 1e-12);
        assert!((raw.solution.norm_rbar().powi(2) - 1.04 / 0.04).abs() < 1e-9);
    }

    #[test]
    fn tensor_and_arrow_conjugation_lemmas() {
        let c = cat(0.4);
        let fs: Vec<Box<dyn QuasitensorFunctor>> = vec![
            Box::new(make_embedding(c.clone())),
            Box::new(make_weight_zero(c.clone())),
        ];
        for f in &fs {
            for a in 0..=2 {
                for b in 0..=2 {
                    assert!(lemma_tensor_conjugate_residual(f.as_ref(), a, b).unwrap() < 1e-9);
                }
            }
            for (a, b) in [(2, 2), (2, 4), (4, 2)] {
                for x in c.hom_basis(a, b).unwrap().arrows.iter() {
                    assert!(lemma_conjugate_arrow_residual(f.as_ref(), x).unwrap() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn functor_file_roundtrip_and_validation() {
        let c = cat(0.5);
        let ir = IrrepFunctor::from_functor(&make_weight_zero(c), 3).unwrap();
        let text = ir.to_json().unwrap();
        let back = IrrepFunctor::from_json(&text).unwrap();
        assert_eq!(back.dims, ir.dims);
        for (k, v) in &ir.inclusions {
            assert_eq!(&back.inclusions[k], v);
        }
        let broken = text.replace("\"max_label\": 3", "\"max_label\": 4");
        assert!(IrrepFunctor::from_json(&broken).is_err());
        assert!(IrrepFunctor::from_json("{").is_err());
        assert!(IrrepFunctor::from_json(&text.replace(FUNCTOR_SCHEMA, "other/9")).is_err());
    }
}
