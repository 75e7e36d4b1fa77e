//! The graded *-algebra `⊕_n \overline{F(n)} ⊗ H_n` of a quasitensor functor.
//!
//! An element stores one block per grade: `X_n[k, a]` is the coefficient of
//! `T̄_k ⊗ e_a`, with `T_k` the basis of `F(n)` and `e_a` that of `H_n`. The
//! product of two blocks lands in the channels `α ∈ n⊗m` as
//! `conj(C^α) · (X ⊗ Y) · conj(s_α)`, where `C^α = F(s_α)* S_{n,m}`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    c, conj, dist, frobenius, hermitian_eigenvalues, identity, inverse, kron, Matrix, C64, ONE, ZERO,
};
use crate::qfunctor::{channels, check_irrep_axioms, IrrepFunctor, QuasitensorFunctor};
use crate::repcat::{Arrow, IrrepLabel, ObjectWord, RepCat};

/// `T̄_k ⊗ e_a` in grade `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpectralBasisElement {
    pub grade: IrrepLabel,
    pub k: usize,
    pub a: usize,
}

/// Finitely supported element, one `d_n × (n+1)` block per grade.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlgebraElement {
    pub blocks: BTreeMap<IrrepLabel, Matrix>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&n, y) in &other.blocks {
            match out.blocks.get_mut(&n) {
                Some(x) => *x += y,
                None => {
                    out.blocks.insert(n, y.clone());
                }
            }
        }
        out
    }

    pub fn scale(&self, z: C64) -> Self {
        AlgebraElement {
            blocks: self.blocks.iter().map(|(&n, x)| (n, x * z)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(c(-1.0)))
    }

    /// Component of grade `n`.
    pub fn grade_part(&self, n: IrrepLabel) -> Self {
        AlgebraElement {
            blocks: self.blocks.get(&n).map(|x| (n, x.clone())).into_iter().collect(),
        }
    }

    pub fn coefficient(&self, e: SpectralBasisElement) -> C64 {
        self.blocks.get(&e.grade).map_or(ZERO, |x| x[(e.k, e.a)])
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.blocks
            .values()
            .flat_map(|x| x.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
struct Channel {
    alpha: IrrepLabel,
    /// `conj(C^α)`, `d_α × d_n d_m`.
    cbar: Matrix,
    /// `conj(s_α)`, `(n+1)(m+1) × (α+1)`.
    sbar: Matrix,
}

#[derive(Clone, Debug)]
struct GradeData {
    /// `J x = j · x̄` on `F(n)`.
    j: Matrix,
    /// `M⁻¹` for the standardized solution on `H_n`.
    minv: Matrix,
    /// `‖R_n‖²` of the standardized solution.
    rnorm2: f64,
    /// `(J^T conj(J))^T`, the Gram matrix of the closed-form inner product.
    gram_t: Matrix,
}

/// Structure constants and involution data up to grade `2·max_spin`.
#[derive(Clone, Debug)]
pub struct SpectralAlgebra {
    pub name: String,
    pub mu: f64,
    pub max_spin: IrrepLabel,
    pub dims: Vec<usize>,
    cells: BTreeMap<(IrrepLabel, IrrepLabel), Vec<Channel>>,
    grades: BTreeMap<IrrepLabel, GradeData>,
}

/// Build the algebra; the functor must pass the irrep-level axioms.
pub fn build_algebra(cat: &RepCat, f: &IrrepFunctor, max_spin: IrrepLabel) -> Result<SpectralAlgebra> {
    let top = 2 * max_spin;
    if f.max_label < top {
        return Err(Error::Contract(format!(
            "functor covers irreps up to {}, the algebra needs {top}",
            f.max_label
        )));
    }
    let rep = check_irrep_axioms(cat, f)?;
    let tol = 1e3 * cat.tolerance().eq_tol;
    if !rep.passes(tol) {
        let worst = rep
            .residuals
            .iter()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, v)| format!("{k}: {v:e}"))
            .unwrap_or_default();
        return Err(Error::Axiom(format!("functor fails the axioms ({worst})")));
    }
    let pairs: Vec<(usize, usize)> = (0..=top)
        .flat_map(|n| (0..=top - n).map(move |m| (n, m)))
        .filter(|&(n, m)| f.dims[n] > 0 && f.dims[m] > 0)
        .collect();
    let cells: Vec<((usize, usize), Vec<Channel>)> = pairs
        .par_iter()
        .map(|&(n, m)| -> Result<_> {
            let fusion = cat.fusion(n, m)?;
            let mut out = Vec::new();
            for ch in fusion.iter() {
                if f.dims[ch.alpha] == 0 {
                    continue;
                }
                out.push(Channel {
                    alpha: ch.alpha,
                    cbar: conj(&f.block(n, m, ch.alpha)?),
                    sbar: conj(&ch.s),
                });
            }
            Ok(((n, m), out))
        })
        .collect::<Result<_>>()?;
    let mut grades = BTreeMap::new();
    for n in 0..=top {
        if f.dims[n] == 0 {
            continue;
        }
        let sol = cat.irrep_conjugate(n)?;
        let pushed = f.conjugate(cat, n)?;
        grades.insert(
            n,
            GradeData {
                gram_t: (pushed.j_matrix.transpose() * conj(&pushed.j_matrix)).transpose(),
                j: pushed.j_matrix,
                minv: inverse(&sol.j_matrix())?,
                rnorm2: sol.norm_r().powi(2),
            },
        );
    }
    Ok(SpectralAlgebra {
        name: f.name.clone(),
        mu: f.mu,
        max_spin,
        dims: f.dims[..=top].to_vec(),
        cells: cells.into_iter().collect(),
        grades,
    })
}

impl SpectralAlgebra {
    /// `(α, C^α, s_α)` for the channels of `n⊗m` with `F(α) ≠ 0`.
    pub fn channel_data(&self, n: IrrepLabel, m: IrrepLabel) -> Result<Vec<(IrrepLabel, Matrix, Matrix)>> {
        let cell = self
            .cells
            .get(&(n, m))
            .ok_or_else(|| Error::Contract(format!("no product cell for ({n}, {m})")))?;
        Ok(cell
            .iter()
            .map(|ch| (ch.alpha, conj(&ch.cbar), conj(&ch.sbar)))
            .collect())
    }

    /// Highest grade an element may carry.
    pub fn top_grade(&self) -> IrrepLabel {
        2 * self.max_spin
    }

    /// Grades `n` with `F(n) ≠ 0`, up to `limit`.
    pub fn spectral_grades(&self, limit: IrrepLabel) -> Vec<IrrepLabel> {
        (0..=limit.min(self.top_grade()))
            .filter(|&n| self.dims[n] > 0)
            .collect()
    }

    /// Dimension of the grade-`n` spectral subspace, `d_n (n+1)`.
    pub fn grade_dim(&self, n: IrrepLabel) -> usize {
        self.dims.get(n).map_or(0, |d| d * (n + 1))
    }

    pub fn basis(&self, limit: IrrepLabel) -> Vec<SpectralBasisElement> {
        let mut out = Vec::new();
        for n in self.spectral_grades(limit) {
            for k in 0..self.dims[n] {
                for a in 0..=n {
                    out.push(SpectralBasisElement { grade: n, k, a });
                }
            }
        }
        out
    }

    pub fn element(&self, e: SpectralBasisElement) -> Result<AlgebraElement> {
        if e.grade > self.top_grade() || e.k >= self.dims[e.grade] || e.a > e.grade {
            return Err(Error::Contract(format!("{e:?} is not a basis element")));
        }
        let mut x = Matrix::zeros(self.dims[e.grade], e.grade + 1);
        x[(e.k, e.a)] = ONE;
        Ok(AlgebraElement {
            blocks: [(e.grade, x)].into_iter().collect(),
        })
    }

    pub fn unit(&self) -> AlgebraElement {
        self.element(SpectralBasisElement { grade: 0, k: 0, a: 0 })
            .expect("grade 0 is one-dimensional")
    }

    fn check(&self, x: &AlgebraElement) -> Result<()> {
        for (&n, b) in &x.blocks {
            if n > self.top_grade() || b.shape() != (self.dims[n], n + 1) {
                return Err(Error::Shape(format!("block of grade {n} does not fit the algebra")));
            }
        }
        Ok(())
    }

    pub fn multiply(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(x)?;
        self.check(y)?;
        let mut out = AlgebraElement::zero();
        for (&n, xb) in &x.blocks {
            for (&m, yb) in &y.blocks {
                if self.dims[n] == 0 || self.dims[m] == 0 {
                    continue;
                }
                let cell = self.cells.get(&(n, m)).ok_or_else(|| {
                    Error::Contract(format!(
                        "product of grades {n} and {m} exceeds the truncation {}",
                        self.top_grade()
                    ))
                })?;
                let t = kron(xb, yb);
                for ch in cell {
                    let z = &ch.cbar * &t * &ch.sbar;
                    match out.blocks.get_mut(&ch.alpha) {
                        Some(acc) => *acc += z,
                        None => {
                            out.blocks.insert(ch.alpha, z);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `(T̄⊗φ)* = \overline{JT} ⊗ (j⁻¹)*φ`, extended antilinearly.
    pub fn star(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(x)?;
        let mut out = AlgebraElement::zero();
        for (&n, xb) in &x.blocks {
            let g = &self.grades[&n];
            out.blocks.insert(n, conj(&(&g.j * xb * &g.minv)));
        }
        Ok(out)
    }

    /// Haar state: the coefficient of the unit.
    pub fn haar(&self, x: &AlgebraElement) -> C64 {
        x.blocks.get(&0).map_or(ZERO, |b| b[(0, 0)])
    }

    /// `h(x* y)` from the structure constants.
    pub fn haar_inner_product(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<C64> {
        let xs = self.star(x)?;
        let mut total = ZERO;
        for (&n, xb) in &xs.blocks {
            let Some(yb) = y.blocks.get(&n) else { continue };
            let cell = self.cells.get(&(n, n)).ok_or_else(|| {
                Error::Contract(format!("h(x*y) in grade {n} needs grade {} products", 2 * n))
            })?;
            let ch = &cell[0];
            debug_assert_eq!(ch.alpha, 0);
            total += (&ch.cbar * kron(xb, yb) * &ch.sbar)[(0, 0)];
        }
        Ok(total)
    }

    /// Closed form `h((T̄⊗φ)*(S̄⊗ψ)) = (JT, JS)(φ, ψ) / ‖R_n‖²`.
    pub fn haar_inner_closed(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<C64> {
        self.check(x)?;
        self.check(y)?;
        let mut total = ZERO;
        for (&n, xb) in &x.blocks {
            let Some(yb) = y.blocks.get(&n) else { continue };
            let g = &self.grades[&n];
            // Σ conj(X[k,a]) Y[l,a] G[k,l]
            let z = (xb.adjoint() * (&g.gram_t * yb)).trace();
            total += z / c(g.rnorm2);
        }
        Ok(total)
    }

    /// `‖x‖_h = h(x*x)^{1/2}`, through the closed form so that every grade is covered.
    pub fn h_norm(&self, x: &AlgebraElement) -> Result<f64> {
        Ok(self.haar_inner_closed(x, x)?.re.max(0.0).sqrt())
    }

    /// Gram matrix of the basis up to `limit` from the structure constants.
    pub fn gram_matrix(&self, limit: IrrepLabel) -> Result<Matrix> {
        let basis = self.basis(limit);
        let elems: Vec<AlgebraElement> = basis.iter().map(|&e| self.element(e)).collect::<Result<_>>()?;
        let n = elems.len();
        let rows: Vec<Vec<C64>> = elems
            .par_iter()
            .map(|x| {
                elems
                    .iter()
                    .map(|y| {
                        if basis_grade(x) == basis_grade(y) {
                            self.haar_inner_product(x, y)
                        } else {
                            Ok(ZERO)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Smallest eigenvalue of the Gram matrix: positive iff `h` is faithful there.
    pub fn gram_min_eigenvalue(&self, limit: IrrepLabel) -> Result<f64> {
        let g = self.gram_matrix(limit)?;
        Ok(hermitian_eigenvalues(&g).first().copied().unwrap_or(f64::INFINITY))
    }

    /// Max discrepancy between the two computations of `h(x*y)` on basis pairs.
    pub fn closed_form_residual(&self, limit: IrrepLabel) -> Result<f64> {
        let basis = self.basis(limit.min(self.max_spin));
        let mut worst: f64 = 0.0;
        for &e in &basis {
            for &f in &basis {
                let x = self.element(e)?;
                let y = self.element(f)?;
                let a = self.haar_inner_product(&x, &y)?;
                let b = self.haar_inner_closed(&x, &y)?;
                worst = worst.max((a - b).norm());
            }
        }
        Ok(worst)
    }

    /// `c_n[k][a] = T̄_k ⊗ e_a`.
    pub fn multiplicity_map(&self, n: IrrepLabel) -> Result<MultiplicityMap> {
        if n > self.top_grade() {
            return Err(Error::Contract(format!("grade {n} exceeds the truncation")));
        }
        let d = self.dims[n];
        let mut entries = Vec::with_capacity(d);
        for k in 0..d {
            let row = (0..=n)
                .map(|a| self.element(SpectralBasisElement { grade: n, k, a }))
                .collect::<Result<Vec<_>>>()?;
            entries.push(row);
        }
        Ok(MultiplicityMap { grade: n, entries })
    }

    /// `max_{k,l} ‖(c c*)_{kl} − δ_{kl}‖_h`.
    pub fn coisometry_residual(&self, c_u: &MultiplicityMap) -> Result<f64> {
        let unit = self.unit();
        let mut worst: f64 = 0.0;
        for (k, rk) in c_u.entries.iter().enumerate() {
            for (l, rl) in c_u.entries.iter().enumerate() {
                let mut acc = AlgebraElement::zero();
                for (x, y) in rk.iter().zip(rl) {
                    acc = acc.add(&self.multiply(x, &self.star(y)?)?);
                }
                if k == l {
                    acc = acc.sub(&unit);
                }
                worst = worst.max(self.h_norm(&acc)?);
            }
        }
        Ok(worst)
    }

    /// Rows `y = λᵀ c` rebuilt from `λ' = y c*`; returns `max(|λ' − λ|, ‖λ'ᵀc − y‖_h)`.
    pub fn multiplet_residual(&self, c_u: &MultiplicityMap, lambda: &[C64]) -> Result<f64> {
        let width = c_u.grade + 1;
        let ys: Vec<AlgebraElement> = (0..width)
            .map(|a| {
                c_u.entries
                    .iter()
                    .zip(lambda)
                    .fold(AlgebraElement::zero(), |acc, (row, &z)| acc.add(&row[a].scale(z)))
            })
            .collect();
        let mut worst: f64 = 0.0;
        let mut recovered = Vec::new();
        for row in &c_u.entries {
            let mut acc = AlgebraElement::zero();
            for (y, x) in ys.iter().zip(row) {
                acc = acc.add(&self.multiply(y, &self.star(x)?)?);
            }
            let scalar = self.haar(&acc);
            worst = worst.max(self.h_norm(&acc.sub(&self.unit().scale(scalar)))?);
            recovered.push(scalar);
        }
        for (a, b) in recovered.iter().zip(lambda) {
            worst = worst.max((a - b).norm());
        }
        for (a, y) in ys.iter().enumerate() {
            let rebuilt = c_u
                .entries
                .iter()
                .zip(&recovered)
                .fold(AlgebraElement::zero(), |acc, (row, &z)| acc.add(&row[a].scale(z)));
            worst = worst.max(self.h_norm(&rebuilt.sub(y))?);
        }
        Ok(worst)
    }

    /// `h`-norm of `ab − ba`, maximized over basis pairs with grades ≤ `max_spin`.
    pub fn commutativity_probe(&self) -> Result<f64> {
        let basis = self.basis(self.max_spin);
        let elems: Vec<AlgebraElement> = basis.iter().map(|&e| self.element(e)).collect::<Result<_>>()?;
        let worst = elems
            .par_iter()
            .enumerate()
            .map(|(i, x)| -> Result<f64> {
                let mut w: f64 = 0.0;
                for y in &elems[i + 1..] {
                    let d = self.multiply(x, y)?.sub(&self.multiply(y, x)?);
                    w = w.max(self.h_norm(&d)?);
                }
                Ok(w)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(worst.into_iter().fold(0.0, f64::max))
    }

    /// Random element with a random coefficient block in every grade ≤ `limit`.
    pub fn random_element(&self, rng: &mut ChaCha8Rng, limit: IrrepLabel) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for n in self.spectral_grades(limit) {
            let b = Matrix::from_fn(self.dims[n], n + 1, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            out.blocks.insert(n, b);
        }
        out
    }

    /// Uniformly drawn basis element of grade `n`; `n` must carry a nonzero `F(n)`.
    pub fn random_in_grade(&self, rng: &mut ChaCha8Rng, n: IrrepLabel) -> AlgebraElement {
        let e = SpectralBasisElement {
            grade: n,
            k: rng.gen_range(0..self.dims[n]),
            a: rng.gen_range(0..=n),
        };
        self.element(e).expect("grade carries a basis")
    }

    /// Random basis element of grade ≤ `limit`.
    pub fn random_basis_element(&self, rng: &mut ChaCha8Rng, limit: IrrepLabel) -> AlgebraElement {
        let basis = self.basis(limit);
        let e = basis[rng.gen_range(0..basis.len())];
        self.element(e).expect("drawn from the basis")
    }
}

fn basis_grade(x: &AlgebraElement) -> IrrepLabel {
    *x.blocks.keys().next().expect("basis elements have one grade")
}

/// Matrix `c_u` of algebra elements, rows over `F(n)`, columns over `H_n`.
#[derive(Clone, Debug)]
pub struct MultiplicityMap {
    pub grade: IrrepLabel,
    pub entries: Vec<Vec<AlgebraElement>>,
}

/// Residuals of the algebra laws on seeded random samples.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct AlgebraReport {
    pub unit: f64,
    pub associativity: f64,
    pub star_involution: f64,
    pub star_antimultiplicative: f64,
    pub gram_min_eigenvalue: f64,
    pub closed_form: f64,
    pub coisometry: f64,
    pub grading: f64,
}

/// Unit, associativity (100 triples with total grade in range), `a** = a`, `(ab)* = b*a*`
/// (50 pairs), Gram positivity, the closed-form inner product, `c c* = 1` and
/// the grading law.
pub fn algebra_report(alg: &SpectralAlgebra, seed: u64) -> Result<AlgebraReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = AlgebraReport::default();
    let unit = alg.unit();
    let half = alg.max_spin;
    for e in alg.basis(alg.top_grade() - alg.max_spin.min(alg.top_grade())) {
        let x = alg.element(e)?;
        rep.unit = rep.unit.max(alg.multiply(&unit, &x)?.sub(&x).max_abs());
        rep.unit = rep.unit.max(alg.multiply(&x, &unit)?.sub(&x).max_abs());
    }
    // grade triples are drawn uniformly among those whose products stay in range
    let grades = alg.spectral_grades(alg.top_grade());
    let mut triples = Vec::new();
    for &x in &grades {
        for &y in &grades {
            for &z in &grades {
                if x + y + z <= alg.top_grade() {
                    triples.push((x, y, z));
                }
            }
        }
    }
    for _ in 0..100 {
        let (ga, gb, gc) = triples[rng.gen_range(0..triples.len())];
        let a = alg.random_in_grade(&mut rng, ga);
        let b = alg.random_in_grade(&mut rng, gb);
        let cc = alg.random_in_grade(&mut rng, gc);
        let l = alg.multiply(&alg.multiply(&a, &b)?, &cc)?;
        let r = alg.multiply(&a, &alg.multiply(&b, &cc)?)?;
        rep.associativity = rep.associativity.max(alg.h_norm(&l.sub(&r))?);
    }
    for e in alg.basis(alg.top_grade()) {
        let x = alg.element(e)?;
        let back = alg.star(&alg.star(&x)?)?;
        rep.star_involution = rep.star_involution.max(alg.h_norm(&back.sub(&x))?);
    }
    for _ in 0..50 {
        let a = alg.random_element(&mut rng, half.min(2));
        let b = alg.random_element(&mut rng, half.min(2));
        let l = alg.star(&alg.multiply(&a, &b)?)?;
        let r = alg.multiply(&alg.star(&b)?, &alg.star(&a)?)?;
        let scale = 1.0 + alg.h_norm(&l)?;
        rep.star_antimultiplicative = rep.star_antimultiplicative.max(alg.h_norm(&l.sub(&r))? / scale);
    }
    rep.gram_min_eigenvalue = alg.gram_min_eigenvalue(half)?;
    rep.closed_form = alg.closed_form_residual(half)?;
    for n in alg.spectral_grades(half) {
        let cu = alg.multiplicity_map(n)?;
        rep.coisometry = rep.coisometry.max(alg.coisometry_residual(&cu)?);
    }
    for n in alg.spectral_grades(half) {
        for m in alg.spectral_grades(half) {
            let x = alg.element(SpectralBasisElement { grade: n, k: 0, a: 0 })?;
            let y = alg.element(SpectralBasisElement { grade: m, k: 0, a: m })?;
            let p = alg.multiply(&x, &y)?;
            for (&g, b) in &p.blocks {
                let allowed = channels(n, m).any(|a| a == g);
                if !allowed {
                    rep.grading = rep.grading.max(frobenius(b));
                }
            }
        }
    }
    Ok(rep)
}

impl AlgebraReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.unit <= tol
            && self.associativity <= tol
            && self.star_involution <= tol
            && self.star_antimultiplicative <= tol
            && self.gram_min_eigenvalue > 1e-10
            && self.closed_form <= tol
            && self.coisometry <= tol
            && self.grading <= tol
    }
}

/// Linear independence of all coefficients `c^n_{ka}` up to `limit`.
pub fn linear_independence_check(alg: &SpectralAlgebra, limit: IrrepLabel, rank_tol: f64) -> Result<bool> {
    Ok(alg.gram_min_eigenvalue(limit)? > rank_tol)
}

/// `α_U(T̄⊗φ) = \overline{UT}⊗φ` for a unitary natural family `U_n : F(n) → G(n)`.
#[derive(Clone, Debug)]
pub struct AlgebraIsomorphism {
    pub unitaries: BTreeMap<IrrepLabel, Matrix>,
}

impl AlgebraIsomorphism {
    pub fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        let mut out = AlgebraElement::zero();
        for (&n, b) in &x.blocks {
            let u = self
                .unitaries
                .get(&n)
                .ok_or_else(|| Error::Contract(format!("no unitary for grade {n}")))?;
            out.blocks.insert(n, conj(u) * b);
        }
        Ok(out)
    }
}

/// Validate `U` (unitary per grade and `C_G^α (U_n⊗U_m) = U_α C_F^α`) and build `α_U`.
pub fn induce_isomorphism(
    u: &BTreeMap<IrrepLabel, Matrix>,
    from: &SpectralAlgebra,
    to: &SpectralAlgebra,
    tol: f64,
) -> Result<AlgebraIsomorphism> {
    if from.dims != to.dims || (from.mu - to.mu).abs() > 1e-15 {
        return Err(Error::Invalid("algebras have different grade dimensions".into()));
    }
    for n in from.spectral_grades(from.top_grade()) {
        let un = u
            .get(&n)
            .ok_or_else(|| Error::Invalid(format!("no unitary for grade {n}")))?;
        let d = from.dims[n];
        if un.shape() != (d, d) {
            return Err(Error::Invalid(format!("unitary for grade {n} has wrong shape")));
        }
        let r = dist(&(un.adjoint() * un), &identity(d));
        if r > tol {
            return Err(Error::Invalid(format!("U_{n} is not unitary, residual {r:e}")));
        }
    }
    for (&(n, m), cells) in &from.cells {
        let other = &to.cells[&(n, m)];
        let unm = kron(&u[&n], &u[&m]);
        for (a, b) in cells.iter().zip(other) {
            let lhs = conj(&b.cbar) * &unm;
            let rhs = &u[&a.alpha] * conj(&a.cbar);
            let r = dist(&lhs, &rhs);
            if r > tol {
                return Err(Error::Invalid(format!(
                    "U is not natural on ({n}, {m}) → {}, residual {r:e}",
                    a.alpha
                )));
            }
        }
    }
    Ok(AlgebraIsomorphism {
        unitaries: u.clone(),
    })
}

/// Max residuals of `α(xy) = α(x)α(y)`, `α(x*) = α(x)*`, `h∘α = h` on samples.
pub fn isomorphism_residuals(
    iso: &AlgebraIsomorphism,
    from: &SpectralAlgebra,
    to: &SpectralAlgebra,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mult, mut star, mut haar): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..samples {
        let x = from.random_element(&mut rng, from.max_spin);
        let y = from.random_element(&mut rng, from.max_spin);
        let l = iso.apply(&from.multiply(&x, &y)?)?;
        let r = to.multiply(&iso.apply(&x)?, &iso.apply(&y)?)?;
        mult = mult.max(to.h_norm(&l.sub(&r))?);
        let l = iso.apply(&from.star(&x)?)?;
        let r = to.star(&iso.apply(&x)?)?;
        star = star.max(to.h_norm(&l.sub(&r))?);
        let a = from.haar_inner_closed(&x, &y)?;
        let b = to.haar_inner_closed(&iso.apply(&x)?, &iso.apply(&y)?)?;
        haar = haar.max((a - b).norm());
    }
    Ok((mult, star, haar))
}

/// Algebra element `T̄ ⊗ φ` for a word: `Σ_{(α,s)} \overline{F(s)*T} ⊗ s*φ` over the
/// decomposition of `u^r`.
pub fn word_element(
    f: &dyn QuasitensorFunctor,
    ir: &IrrepFunctor,
    r: ObjectWord,
    t: &Matrix,
    phi: &Matrix,
) -> Result<AlgebraElement> {
    let cat = f.category();
    let carriers = ir
        .carriers
        .as_ref()
        .ok_or_else(|| Error::Contract("word elements need word-level carriers".into()))?;
    let dec = cat.decompose(r)?;
    let mut out = AlgebraElement::zero();
    for (alpha, s) in &dec.pieces {
        if ir.dims[*alpha] == 0 {
            continue;
        }
        let wa = cat.irrep_isometry(*alpha)?;
        let x = cat.lift(*alpha, r, &(s * wa.adjoint()))?;
        let fs = f.arrow_map(&x)? * &carriers[*alpha];
        let tp = fs.adjoint() * t;
        let pp = s.adjoint() * phi;
        let block = conj(&tp) * pp.transpose();
        out = out.add(&AlgebraElement {
            blocks: [(*alpha, block)].into_iter().collect(),
        });
    }
    Ok(out)
}

/// `(L̄_A ⊗ 1) c_u = c_v A` for `A ∈ (u^a, u^b)`, checked on basis vectors.
pub fn intertwining_residual(
    f: &dyn QuasitensorFunctor,
    ir: &IrrepFunctor,
    alg: &SpectralAlgebra,
    arrow: &Arrow,
) -> Result<f64> {
    let (a, b) = (arrow.source(), arrow.target());
    let fa = f.arrow_map(arrow)?;
    let (da, db) = (f.dim(a), f.dim(b));
    let ha = 1usize << a;
    let mut worst: f64 = 0.0;
    for i in 0..db {
        let ei = unit_vec(db, i);
        for p in 0..ha {
            let phi = unit_vec(ha, p);
            let mut lhs = AlgebraElement::zero();
            for k in 0..da {
                let w = word_element(f, ir, a, &unit_vec(da, k), &phi)?;
                lhs = lhs.add(&w.scale(fa[(i, k)]));
            }
            let rhs = word_element(f, ir, b, &ei, &(&arrow.mat * &phi))?;
            worst = worst.max(alg.h_norm(&lhs.sub(&rhs))?);
        }
    }
    Ok(worst)
}

fn unit_vec(n: usize, i: usize) -> Matrix {
    let mut v = Matrix::zeros(n, 1);
    v[(i, 0)] = ONE;
    v
}

/// Rebuild the `(n, m)` cell with `s_α` replaced by `e^{iθ_α} s_α`, recomputing
/// `F(s_α)` through the word-level functor, and compare products.
pub fn rotated_cell_residual(
    f: &dyn QuasitensorFunctor,
    ir: &IrrepFunctor,
    alg: &SpectralAlgebra,
    n: IrrepLabel,
    m: IrrepLabel,
    phases: &[f64],
) -> Result<f64> {
    let cat = f.category();
    let carriers = ir
        .carriers
        .as_ref()
        .ok_or_else(|| Error::Contract("rotation needs word-level carriers".into()))?;
    let wnm = kron(&*cat.irrep_isometry(n)?, &*cat.irrep_isometry(m)?);
    let incl = f.inclusion(n, m)?.apply(&kron(&carriers[n], &carriers[m]));
    let mut rotated = Vec::new();
    for (ch, &theta) in cat.fusion(n, m)?.iter().zip(phases.iter().cycle()) {
        if ir.dims[ch.alpha] == 0 {
            continue;
        }
        let s = &ch.s * C64::from_polar(1.0, theta);
        let wa = cat.irrep_isometry(ch.alpha)?;
        let lift = cat.lift(ch.alpha, n + m, &(&wnm * &s * wa.adjoint()))?;
        let fs = f.arrow_map(&lift)? * &carriers[ch.alpha];
        rotated.push(Channel {
            alpha: ch.alpha,
            cbar: conj(&(fs.adjoint() * &incl)),
            sbar: conj(&s),
        });
    }
    let mut worst: f64 = 0.0;
    for k in 0..alg.dims[n] {
        for a in 0..=n {
            for l in 0..alg.dims[m] {
                for b in 0..=m {
                    let x = alg.element(SpectralBasisElement { grade: n, k, a })?;
                    let y = alg.element(SpectralBasisElement { grade: m, k: l, a: b })?;
                    let want = alg.multiply(&x, &y)?;
                    let t = kron(&x.blocks[&n], &y.blocks[&m]);
                    let mut got = AlgebraElement::zero();
                    for ch in &rotated {
                        got = got.add(&AlgebraElement {
                            blocks: [(ch.alpha, &ch.cbar * &t * &ch.sbar)].into_iter().collect(),
                        });
                    }
                    worst = worst.max(got.sub(&want).max_abs());
                }
            }
        }
    }
    Ok(worst)
}

/// One nonzero structure constant: `(n,k,a)·(m,l,b)` has coefficient `re + i·im`
/// on `(alpha,kp,c)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureConstant {
    pub n: usize,
    pub k: usize,
    pub a: usize,
    pub m: usize,
    pub l: usize,
    pub b: usize,
    pub alpha: usize,
    pub kp: usize,
    pub c: usize,
    pub re: f64,
    pub im: f64,
}

pub const STRUCTURE_SCHEMA: &str = "qcat-structure/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureTable {
    pub schema_version: String,
    pub name: String,
    pub mu: f64,
    pub max_spin: usize,
    pub dims: Vec<usize>,
    pub entries: Vec<StructureConstant>,
}

pub fn structure_table(alg: &SpectralAlgebra) -> Result<StructureTable> {
    let mut entries = Vec::new();
    for (&(n, m), cell) in &alg.cells {
        if n > alg.max_spin || m > alg.max_spin {
            continue;
        }
        for k in 0..alg.dims[n] {
            for a in 0..=n {
                for l in 0..alg.dims[m] {
                    for b in 0..=m {
                        let col = k * alg.dims[m] + l;
                        let row = a * (m + 1) + b;
                        for ch in cell {
                            for kp in 0..alg.dims[ch.alpha] {
                                for cc in 0..=ch.alpha {
                                    let z = ch.cbar[(kp, col)] * ch.sbar[(row, cc)];
                                    if z != ZERO {
                                        entries.push(StructureConstant {
                                            n, k, a, m, l, b,
                                            alpha: ch.alpha,
                                            kp,
                                            c: cc,
                                            re: z.re,
                                            im: z.im,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(StructureTable {
        schema_version: STRUCTURE_SCHEMA.into(),
        name: alg.name.clone(),
        mu: alg.mu,
        max_spin: alg.max_spin,
        dims: alg.dims[..=alg.max_spin].to_vec(),
        entries,
    })
}

impl StructureTable {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: StructureTable = serde_json::from_str(text)?;
        if t.schema_version != STRUCTURE_SCHEMA {
            return Err(Error::Invalid(format!("unknown structure schema '{}'", t.schema_version)));
        }
        Ok(t)
    }

    /// Header line plus one row per entry; floats in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,k,a,m,l,b,alpha,kp,c,re,im\n");
        for e in &self.entries {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{:?},{:?}\n",
                e.n, e.k, e.a, e.m, e.l, e.b, e.alpha, e.kp, e.c, e.re, e.im
            ));
        }
        s
    }

    pub fn entries_from_csv(text: &str) -> Result<Vec<StructureConstant>> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 11 {
                return Err(Error::Invalid(format!("csv line {} has {} fields", i + 1, f.len())));
            }
            let u = |j: usize| -> Result<usize> {
                f[j].parse()
                    .map_err(|_| Error::Invalid(format!("csv line {}: bad index '{}'", i + 1, f[j])))
            };
            let r = |j: usize| -> Result<f64> {
                f[j].parse()
                    .map_err(|_| Error::Invalid(format!("csv line {}: bad number '{}'", i + 1, f[j])))
            };
            out.push(StructureConstant {
                n: u(0)?,
                k: u(1)?,
                a: u(2)?,
                m: u(3)?,
                l: u(4)?,
                b: u(5)?,
                alpha: u(6)?,
                kp: u(7)?,
                c: u(8)?,
                re: r(9)?,
                im: r(10)?,
            });
        }
        Ok(out)
    }
}
