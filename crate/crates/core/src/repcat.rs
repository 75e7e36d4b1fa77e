//! Concrete model of the representation category of `SU_μ(2)`.
//!
//! Objects are words in the fundamental `u`; since `ū = u` a word is fixed by
//! its length. Arrows are intertwiners between tensor powers of `C²`, obtained
//! by evaluating Temperley–Lieb diagrams through the standard datum. The
//! irreducible object `n` is the range of the Jones–Wenzl projector in `u^{⊗n}`.

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::numerics::{
    c, column, column_space_isometry, conj, dist, fix_phase, frobenius, hstack, identity, kron,
    least_squares, unvectorize, vectorize, Matrix, Tolerance, C64,
};
use crate::tlcat::{
    compose, jones_wenzl, tl_basis, DualityDatum, LoopParameter, TLDiagram, TLMorphism,
};

/// A word `u^{⊗r}`, identified by `r`.
pub type ObjectWord = usize;
/// The irreducible object of dimension `n + 1`.
pub type IrrepLabel = usize;

/// An intertwiner between words together with a Temperley–Lieb preimage.
#[derive(Clone, Debug)]
pub struct Arrow {
    pub tl: TLMorphism,
    pub mat: Matrix,
}

impl Arrow {
    pub fn source(&self) -> ObjectWord {
        self.tl.n_in()
    }

    pub fn target(&self) -> ObjectWord {
        self.tl.n_out()
    }
}

/// Frobenius-orthonormal basis of `(u^a, u^b)`.
#[derive(Clone, Debug)]
pub struct HomBasis {
    pub source: ObjectWord,
    pub target: ObjectWord,
    pub arrows: Vec<Arrow>,
}

/// Orthogonal isometries `s_α ∈ (α, u^r)` with `Σ s_α s_α* = 1`, ordered by
/// label and then by Gram–Schmidt order.
#[derive(Clone, Debug)]
pub struct DecompositionCertificate {
    pub word: ObjectWord,
    pub pieces: Vec<(IrrepLabel, Matrix)>,
    pub completeness_residual: f64,
}

impl DecompositionCertificate {
    pub fn multiplicity(&self, n: IrrepLabel) -> usize {
        self.pieces.iter().filter(|(l, _)| *l == n).count()
    }
}

/// Solution `(R, R̄)` of the conjugate equations for an object of dimension
/// `dim` whose conjugate is realized on a space of the same dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugateSolution {
    pub dim: usize,
    /// `R ∈ H_ρ̄ ⊗ H_ρ`, as a column of length `dim²`.
    pub r: Matrix,
    /// `R̄ ∈ H_ρ ⊗ H_ρ̄`.
    pub rbar: Matrix,
}

impl ConjugateSolution {
    pub fn new(r: Matrix, rbar: Matrix) -> Result<Self> {
        let n2 = r.nrows();
        let dim = (n2 as f64).sqrt().round() as usize;
        if dim * dim != n2 || r.ncols() != 1 || rbar.shape() != (n2, 1) {
            return Err(Error::Shape("conjugate solution vectors have wrong shape".into()));
        }
        Ok(ConjugateSolution { dim, r, rbar })
    }

    pub fn norm_r(&self) -> f64 {
        frobenius(&self.r)
    }

    pub fn norm_rbar(&self) -> f64 {
        frobenius(&self.rbar)
    }

    /// `‖R‖ ‖R̄‖`.
    pub fn dimension(&self) -> f64 {
        self.norm_r() * self.norm_rbar()
    }

    /// Matrix `J` of the antilinear `j ψ = r_ψ* R`, i.e. `j x = J x̄`.
    pub fn j_matrix(&self) -> Matrix {
        unvectorize(&self.r, self.dim, self.dim).expect("square by construction")
    }

    pub fn jbar_matrix(&self) -> Matrix {
        unvectorize(&self.rbar, self.dim, self.dim).expect("square by construction")
    }

    /// Residuals of `(R̄*⊗1)(1⊗R) = 1` and `(R*⊗1)(1⊗R̄) = 1`.
    pub fn residuals(&self) -> (f64, f64) {
        // (R̄*⊗1)(1⊗R) = (conj(J̄) J)^T in terms of the reshaped vectors
        let i = identity(self.dim);
        let (j, jb) = (self.j_matrix(), self.jbar_matrix());
        let a = (conj(&jb) * &j).transpose();
        let b = (conj(&j) * &jb).transpose();
        (dist(&a, &i), dist(&b, &i))
    }

    pub fn residual(&self) -> f64 {
        let (a, b) = self.residuals();
        a.max(b)
    }

    pub fn scaled(&self, t: C64) -> Self {
        ConjugateSolution {
            dim: self.dim,
            r: &self.r * t,
            rbar: &self.rbar / t.conj(),
        }
    }
}

/// Rescale `(R, R̄) → (tR, R̄/t̄)` so that `‖R‖ = ‖R̄‖`.
///
/// Only meaningful for irreducible objects, where the solution is unique up
/// to this scaling; the label is used to check the dimension.
pub fn standardize_conjugate(c0: &ConjugateSolution, irrep: IrrepLabel) -> Result<ConjugateSolution> {
    if c0.dim != irrep + 1 {
        return Err(Error::Contract(format!(
            "solution of dimension {} does not belong to irrep {irrep}",
            c0.dim
        )));
    }
    let (a, b) = (c0.norm_r(), c0.norm_rbar());
    if a == 0.0 || b == 0.0 {
        return Err(Error::Contract("degenerate conjugate solution".into()));
    }
    Ok(c0.scaled(c((b / a).sqrt())))
}

/// `T• ∈ (ρ̄, ρ̄')` for `T ∈ (ρ, ρ')`, defined by `(T•⊗1)R_ρ = (1⊗T*)R_ρ'`.
///
/// In matrix form `T• J_ρ = J_ρ' T̄`, solved by least squares.
pub fn bullet(
    t: &Matrix,
    src: &ConjugateSolution,
    dst: &ConjugateSolution,
    tol: Tolerance,
) -> Result<Matrix> {
    if t.shape() != (dst.dim, src.dim) {
        return Err(Error::Shape("arrow does not match the conjugate solutions".into()));
    }
    let jr = src.j_matrix();
    let rhs = dst.j_matrix() * conj(t);
    // X J = rhs  <=>  J^T X^T = rhs^T
    let xt = least_squares(&jr.transpose(), &rhs.transpose(), tol)?;
    let x = xt.transpose();
    let res = dist(&(&x * &jr), &rhs);
    if res > tol.eq_tol * (1.0 + frobenius(&rhs)) {
        return Err(Error::Rank(format!("bullet equation inconsistent, residual {res:e}")));
    }
    Ok(x)
}

struct Memo<K, V>(Mutex<HashMap<K, Arc<V>>>);

impl<K: Eq + Hash + Clone, V> Memo<K, V> {
    fn new() -> Self {
        Memo(Mutex::new(HashMap::new()))
    }

    fn get_or(&self, k: K, f: impl FnOnce() -> Result<V>) -> Result<Arc<V>> {
        if let Some(v) = self.0.lock().expect("memo poisoned").get(&k) {
            return Ok(v.clone());
        }
        let v = Arc::new(f()?);
        Ok(self
            .0
            .lock()
            .expect("memo poisoned")
            .entry(k)
            .or_insert(v)
            .clone())
    }
}

/// The category at a fixed μ, with memoized constructions.
pub struct RepCat {
    lp: LoopParameter,
    datum: DualityDatum,
    tol: Tolerance,
    jw: Memo<usize, Arrow>,
    irrep_iso: Memo<usize, Matrix>,
    hom: Memo<(usize, usize), HomBasis>,
    dec: Memo<usize, DecompositionCertificate>,
    fusion: Memo<(usize, usize), Vec<FusionChannel>>,
}

/// The isometry `s_α ∈ (α, n⊗m)` and its lift to words.
#[derive(Clone, Debug)]
pub struct FusionChannel {
    pub alpha: IrrepLabel,
    /// `(n+1)(m+1) × (α+1)` isometry.
    pub s: Matrix,
    /// `(w_n⊗w_m) s w_α* ∈ (u^α, u^{n+m})`.
    pub lift: Arrow,
}

impl RepCat {
    pub fn new(mu: f64) -> Result<Self> {
        Self::with_tolerance(mu, Tolerance::default())
    }

    /// Process-wide instance for `mu` with default tolerances, so memoized
    /// bases and fusion channels are computed once.
    pub fn shared(mu: f64) -> Result<Arc<Self>> {
        static SHARED: OnceLock<Mutex<HashMap<u64, Arc<RepCat>>>> = OnceLock::new();
        let map = SHARED.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(c) = map.lock().expect("cache poisoned").get(&mu.to_bits()) {
            return Ok(c.clone());
        }
        let cat = Arc::new(Self::new(mu)?);
        Ok(map
            .lock()
            .expect("cache poisoned")
            .entry(mu.to_bits())
            .or_insert(cat)
            .clone())
    }

    pub fn with_tolerance(mu: f64, tol: Tolerance) -> Result<Self> {
        let lp = LoopParameter::new(mu)?;
        Ok(RepCat {
            lp,
            datum: DualityDatum::standard(lp),
            tol,
            jw: Memo::new(),
            irrep_iso: Memo::new(),
            hom: Memo::new(),
            dec: Memo::new(),
            fusion: Memo::new(),
        })
    }

    pub fn mu(&self) -> f64 {
        self.lp.mu()
    }

    pub fn loop_parameter(&self) -> LoopParameter {
        self.lp
    }

    pub fn datum(&self) -> &DualityDatum {
        &self.datum
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    /// `[n+1]_μ`, the intrinsic dimension of irrep `n`.
    pub fn qdim(&self, n: IrrepLabel) -> f64 {
        self.lp.qint(n + 1)
    }

    pub fn word_dim(&self, r: ObjectWord) -> usize {
        1 << r
    }

    pub fn compose_tl(&self, f: &TLMorphism, g: &TLMorphism) -> Result<TLMorphism> {
        compose(f, g, self.lp)
    }

    pub fn arrow(&self, tl: TLMorphism) -> Arrow {
        let mat = tl.evaluate(&self.datum);
        Arrow { tl, mat }
    }

    pub fn compose(&self, f: &Arrow, g: &Arrow) -> Result<Arrow> {
        Ok(Arrow {
            tl: self.compose_tl(&f.tl, &g.tl)?,
            mat: &f.mat * &g.mat,
        })
    }

    pub fn tensor(&self, f: &Arrow, g: &Arrow) -> Arrow {
        Arrow {
            tl: f.tl.tensor(&g.tl),
            mat: kron(&f.mat, &g.mat),
        }
    }

    pub fn identity(&self, r: ObjectWord) -> Arrow {
        self.arrow(TLMorphism::identity(r))
    }

    /// Jones–Wenzl projector on `u^n`.
    pub fn jw(&self, n: IrrepLabel) -> Result<Arc<Arrow>> {
        self.jw.get_or(n, || Ok(self.arrow(jones_wenzl(n, self.lp)?)))
    }

    /// Isometry `w_n : H_n → (C²)^{⊗n}` onto the range of the projector.
    pub fn irrep_isometry(&self, n: IrrepLabel) -> Result<Arc<Matrix>> {
        self.irrep_iso.get_or(n, || {
            let p = self.jw(n)?;
            let w = column_space_isometry(&p.mat, self.tol);
            if w.ncols() != n + 1 {
                return Err(Error::Rank(format!(
                    "projector for irrep {n} has rank {}",
                    w.ncols()
                )));
            }
            Ok(w)
        })
    }

    pub fn hom_basis(&self, a: ObjectWord, b: ObjectWord) -> Result<Arc<HomBasis>> {
        self.hom.get_or((a, b), || {
            let diagrams = tl_basis(a, b);
            let rows = self.word_dim(a) * self.word_dim(b);
            if diagrams.is_empty() {
                return Ok(HomBasis {
                    source: a,
                    target: b,
                    arrows: Vec::new(),
                });
            }
            let cols: Vec<Matrix> = diagrams
                .iter()
                .map(|d| vectorize(&TLMorphism::from_diagram(d.clone()).evaluate(&self.datum)))
                .collect();
            let big = hstack(&cols, rows);
            let w = column_space_isometry(&big, self.tol);
            let coef = least_squares(&big, &w, self.tol)?;
            let arrows = (0..w.ncols())
                .map(|k| {
                    let mut tl = TLMorphism::zero(a, b);
                    for (i, d) in diagrams.iter().enumerate() {
                        let z = coef[(i, k)];
                        if z.norm() > 1e-15 {
                            tl.add_scaled(&TLMorphism::from_diagram(d.clone()), z)
                                .expect("same type");
                        }
                    }
                    let mat = unvectorize(&column(&w, k), self.word_dim(b), self.word_dim(a))
                        .expect("sizes agree");
                    Arrow { tl, mat }
                })
                .collect();
            Ok(HomBasis {
                source: a,
                target: b,
                arrows,
            })
        })
    }

    /// Orthonormal basis of `(u^a, u^b)` as matrices.
    pub fn hom_space(&self, a: ObjectWord, b: ObjectWord) -> Result<Vec<Matrix>> {
        Ok(self
            .hom_basis(a, b)?
            .arrows
            .iter()
            .map(|x| x.mat.clone())
            .collect())
    }

    /// Express a matrix intertwiner in the Temperley–Lieb span.
    pub fn lift(&self, a: ObjectWord, b: ObjectWord, t: &Matrix) -> Result<Arrow> {
        if t.shape() != (self.word_dim(b), self.word_dim(a)) {
            return Err(Error::Shape(format!("matrix is not an arrow ({a}, {b})")));
        }
        let basis = self.hom_basis(a, b)?;
        let mut tl = TLMorphism::zero(a, b);
        let mut back = Matrix::zeros(t.nrows(), t.ncols());
        for x in &basis.arrows {
            let z: C64 = x.mat.iter().zip(t.iter()).map(|(p, q)| p.conj() * q).sum();
            tl.add_scaled(&x.tl, z)?;
            back += &x.mat * z;
        }
        let res = dist(&back, t);
        if res > self.tol.eq_tol.max(self.tol.rank_tol * frobenius(t)) * 10.0 {
            return Err(Error::Contract(format!("matrix is not an intertwiner, residual {res:e}")));
        }
        Ok(Arrow { tl, mat: t.clone() })
    }

    pub fn decompose(&self, r: ObjectWord) -> Result<Arc<DecompositionCertificate>> {
        self.dec.get_or(r, || {
            let mut pieces = Vec::new();
            let dim = self.word_dim(r);
            for alpha in (r % 2..=r).step_by(2) {
                let w = self.irrep_isometry(alpha)?;
                let basis = self.hom_basis(alpha, r)?;
                let ys: Vec<Matrix> = basis
                    .arrows
                    .iter()
                    .map(|x| vectorize(&(&x.mat * &*w)))
                    .collect();
                let q = column_space_isometry(&hstack(&ys, dim * (alpha + 1)), self.tol);
                for k in 0..q.ncols() {
                    let s = unvectorize(&column(&q, k), dim, alpha + 1)? * c(((alpha + 1) as f64).sqrt());
                    pieces.push((alpha, s));
                }
            }
            let mut total = Matrix::zeros(dim, dim);
            for (_, s) in &pieces {
                total += s * s.adjoint();
            }
            let completeness_residual = dist(&total, &identity(dim));
            if completeness_residual > 1e3 * self.tol.eq_tol {
                return Err(Error::Rank(format!(
                    "decomposition of u^{r} incomplete, residual {completeness_residual:e}"
                )));
            }
            Ok(DecompositionCertificate {
                word: r,
                pieces,
                completeness_residual,
            })
        })
    }

    /// Nested (rainbow) cup on `u^r`, with `R_u` the unnormalized cup of the datum.
    pub fn word_cup(&self, r: ObjectWord) -> Arrow {
        let n = 2 * r;
        let pair = (0..n).map(|k| n - 1 - k).collect();
        let d = TLDiagram::new(0, n, pair).expect("rainbow is planar");
        let tl = TLMorphism::from_diagram(d).scale(c(self.mu().powf(r as f64 / 2.0)));
        self.arrow(tl)
    }

    /// Nested solution for a word: `R_{u⊗v} = (1⊗R_u⊗1)R_v`, with `R̄_u = −R_u/μ`.
    pub fn conjugate(&self, r: ObjectWord) -> ConjugateSolution {
        let cup = self.word_cup(r).mat;
        let rbar = &cup * c((-1.0 / self.mu()).powi(r as i32));
        ConjugateSolution {
            dim: self.word_dim(r),
            r: cup,
            rbar,
        }
    }

    /// `(R̄, R̄)` for the conjugate word, used when applying `•` twice.
    pub fn conjugate_of_conjugate(&self, r: ObjectWord) -> ConjugateSolution {
        let s = self.conjugate(r);
        ConjugateSolution {
            dim: s.dim,
            r: s.rbar,
            rbar: s.r,
        }
    }

    /// Compression of the word solution to irrep `n`, standardized.
    pub fn irrep_conjugate(&self, n: IrrepLabel) -> Result<ConjugateSolution> {
        let w = self.irrep_isometry(n)?;
        let ww = kron(&w, &w).adjoint();
        let s = self.conjugate(n);
        let raw = ConjugateSolution {
            dim: n + 1,
            r: &ww * &s.r,
            rbar: &ww * &s.rbar,
        };
        standardize_conjugate(&raw, n)
    }

    /// Channels `α ∈ n⊗m` with isometries `s_α`, phases fixed canonically.
    pub fn fusion(&self, n: IrrepLabel, m: IrrepLabel) -> Result<Arc<Vec<FusionChannel>>> {
        self.fusion.get_or((n, m), || {
            let wn = self.irrep_isometry(n)?;
            let wm = self.irrep_isometry(m)?;
            let wnm = kron(&wn, &wm);
            let pn = self.jw(n)?;
            let pm = self.jw(m)?;
            let pnm = pn.tl.tensor(&pm.tl);
            let mut out = Vec::new();
            let lo = n.abs_diff(m);
            for alpha in (lo..=n + m).step_by(2) {
                let wa = self.irrep_isometry(alpha)?;
                let basis = self.hom_basis(alpha, n + m)?;
                let ys: Vec<Matrix> = basis
                    .arrows
                    .iter()
                    .map(|x| wnm.adjoint() * &x.mat * &*wa)
                    .collect();
                let rows = (n + 1) * (m + 1) * (alpha + 1);
                let vs = hstack(&ys.iter().map(vectorize).collect::<Vec<_>>(), rows);
                let q = column_space_isometry(&vs, self.tol);
                if q.ncols() != 1 {
                    return Err(Error::Rank(format!(
                        "({alpha}, {n}⊗{m}) has dimension {}",
                        q.ncols()
                    )));
                }
                let s0 = unvectorize(&column(&q, 0), (n + 1) * (m + 1), alpha + 1)?
                    * c(((alpha + 1) as f64).sqrt());
                let s = fix_phase(&s0);
                // coefficients of s in the compressed basis, to build the lift
                let coef = least_squares(&vs, &vectorize(&s), self.tol)?;
                let mut x_tl = TLMorphism::zero(alpha, n + m);
                for (i, x) in basis.arrows.iter().enumerate() {
                    x_tl.add_scaled(&x.tl, coef[(i, 0)])?;
                }
                let pa = self.jw(alpha)?;
                let tl = self.compose_tl(&pnm, &self.compose_tl(&x_tl, &pa.tl)?)?;
                let mat = &wnm * &s * wa.adjoint();
                let lifted = self.arrow(tl);
                let res = dist(&lifted.mat, &mat);
                if res > 1e-8 {
                    return Err(Error::Rank(format!(
                        "lift of ({alpha}, {n}⊗{m}) inconsistent, residual {res:e}"
                    )));
                }
                out.push(FusionChannel {
                    alpha,
                    s,
                    lift: Arrow { tl: lifted.tl, mat },
                });
            }
            Ok(out)
        })
    }
}
