//! Subspace families `K_u ⊆ H_u`, the bracket spaces `⟨H_u, H_v⟩`, and the
//! passage from a character of the spectral algebra to a natural embedding
//! into the embedding functor.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numerics::{
    column, column_space_isometry, conj, dist, frobenius, hstack, identity, kron, unvectorize,
    vectorize, Matrix, Tolerance, ZERO,
};
use crate::qfunctor::{AxiomReport, IrrepFunctor, SubspaceFunctor};
use crate::repcat::{IrrepLabel, ObjectWord, RepCat};
use crate::spectral::{AlgebraElement, SpectralAlgebra, SpectralBasisElement};

pub use crate::qfunctor::{FamilyBase, SubspaceFamily};

fn complement_apply(e: &Matrix, x: &Matrix) -> f64 {
    frobenius(&(x - e * x))
}

/// Family axioms (projections commuting with arrows, tensor compatibility, contractions,
/// conjugation, insertion) over words of total length ≤ `max_len`.
pub fn check_family(k: &SubspaceFamily, cat: &RepCat, max_len: usize) -> Result<AxiomReport> {
    let mut rep = AxiomReport::default();
    let mut put = |key: &str, v: f64| {
        let e = rep.residuals.entry(key.to_string()).or_insert(0.0);
        if v > *e || v.is_nan() {
            *e = v;
        }
    };
    let e: Vec<Matrix> = (0..=max_len).map(|r| k.projection(r)).collect();
    let w: Vec<Matrix> = (0..=max_len).map(|r| (*k.isometry(r)).clone()).collect();
    let unit = dist(&e[0], &identity(1));
    put("trivial word", unit);
    for a in 0..=max_len {
        for b in 0..=max_len {
            if (a + b) % 2 == 1 {
                continue;
            }
            for t in cat.hom_basis(a, b)?.arrows.iter() {
                put("commutes with arrows", dist(&(&t.mat * &e[a]), &(&e[b] * &t.mat)));
                put("arrow invariance", complement_apply(&e[b], &(&t.mat * &e[a])));
            }
        }
    }
    for a in 0..=max_len {
        for b in 0..=max_len - a {
            let (da, db) = (1usize << a, 1usize << b);
            let eab = &e[a + b];
            let ee = kron(&e[a], &e[b]);
            put("left tensor", dist(&ee, &(kron(&identity(da), &e[b]) * eab)));
            put("right tensor", dist(&ee, &(kron(&e[a], &identity(db)) * eab)));
            put("tensor closure", complement_apply(eab, &ee));
            for j in 0..w[b].ncols() {
                let rk = kron(&identity(da), &column(&w[b], j).adjoint());
                put("contraction", complement_apply(&e[a], &(&rk * eab)));
                for t in cat.hom_basis(0, a + b)?.arrows.iter() {
                    put("invariant contraction", complement_apply(&e[a], &(&rk * &t.mat)));
                }
            }
        }
    }
    for r in 0..=max_len {
        for t in cat.hom_basis(0, r)?.arrows.iter() {
            put("contains invariants", complement_apply(&e[r], &t.mat));
        }
        let j = cat.conjugate(r).j_matrix();
        let img = &j * conj(&w[r]);
        let dim_gap = (column_space_isometry(&img, cat.tolerance()).ncols() as f64 - w[r].ncols() as f64).abs();
        put("conjugation", complement_apply(&e[r], &img).max(dim_gap));
    }
    for a in 0..=max_len {
        for b in 0..=max_len - a {
            for z in 0..=max_len - a - b {
                let (da, dz) = (1usize << a, 1usize << z);
                let big = &e[a + b + z];
                for p in 0..w[b].ncols() {
                    let phi = column(&w[b], p);
                    for q in 0..w[a + z].ncols() {
                        let km = unvectorize(&column(&w[a + z], q), da, dz)?;
                        // (1⊗φ⊗1)k
                        let mut v = Matrix::zeros(da * phi.nrows() * dz, 1);
                        for i in 0..da {
                            for (jj, f) in phi.iter().enumerate() {
                                for l in 0..dz {
                                    v[((i * phi.nrows() + jj) * dz + l, 0)] = km[(i, l)] * f;
                                }
                            }
                        }
                        put("insertion", complement_apply(big, &v));
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Weight-zero family with one basis vector of `K_r` (a tensor-basis index) removed.
pub fn corrupted_family(r: ObjectWord, drop_index: usize, tol: Tolerance) -> Result<SubspaceFamily> {
    let base = SubspaceFamily::weight_zero();
    let w = base.isometry(r);
    let keep: Vec<Matrix> = (0..w.ncols())
        .map(|j| column(&w, j))
        .filter(|v| v[(drop_index, 0)] == ZERO)
        .collect();
    if keep.len() == w.ncols() {
        return Err(Error::Invalid(format!("index {drop_index} is not a weight-zero vector of u^{r}")));
    }
    let basis = if keep.is_empty() {
        Matrix::zeros(1 << r, 0)
    } else {
        hstack(&keep, 1 << r)
    };
    SubspaceFamily::weight_zero().with_override(r, &basis, tol)
}

/// Orthonormal basis (Frobenius) of `⟨H_u, H_v⟩ ⊆ (H_u, H_v)`.
#[derive(Clone, Debug)]
pub struct BracketSpace {
    pub u: ObjectWord,
    pub v: ObjectWord,
    pub basis: Vec<Matrix>,
}

impl BracketSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `‖x − P x‖` for the orthogonal projection `P` onto the span.
    pub fn distance(&self, x: &Matrix) -> f64 {
        let mut r = x.clone();
        for b in &self.basis {
            let z: crate::numerics::C64 = b.iter().zip(x.iter()).map(|(p, q)| p.conj() * q).sum();
            r -= b * z;
        }
        frobenius(&r)
    }

    /// Projector onto the span, acting on vectorized arrows.
    pub fn projector(&self) -> Matrix {
        let n = (1usize << self.u) * (1usize << self.v);
        let mut p = Matrix::zeros(n, n);
        for b in &self.basis {
            let x = vectorize(b);
            p += &x * x.adjoint();
        }
        p
    }
}

/// `{(R̄*⊗1_v)(1_u⊗φ) : φ ∈ K_{ū⊗v}}` with the nested solution of `u`.
pub fn bracket_space(k: &SubspaceFamily, cat: &RepCat, u: ObjectWord, v: ObjectWord) -> Result<BracketSpace> {
    bracket_space_with(k, cat, u, v, &cat.conjugate(u).rbar)
}

/// Same, for any `R̄ ∈ H_u ⊗ H_ū` of a conjugate of `u` realized on `H_u`.
pub fn bracket_space_with(
    k: &SubspaceFamily,
    cat: &RepCat,
    u: ObjectWord,
    v: ObjectWord,
    rbar: &Matrix,
) -> Result<BracketSpace> {
    let (du, dv) = (1usize << u, 1usize << v);
    if rbar.shape() != (du * du, 1) {
        return Err(Error::Shape("R̄ does not match the word".into()));
    }
    let rm = conj(&unvectorize(rbar, du, du)?);
    let kw = k.isometry(u + v);
    let mut cols = Vec::with_capacity(kw.ncols());
    for j in 0..kw.ncols() {
        let phi = unvectorize(&column(&kw, j), du, dv)?;
        cols.push(vectorize(&(&rm * phi).transpose()));
    }
    let basis = if cols.is_empty() {
        Vec::new()
    } else {
        let q = column_space_isometry(&hstack(&cols, du * dv), cat.tolerance());
        (0..q.ncols())
            .map(|j| unvectorize(&column(&q, j), dv, du))
            .collect::<Result<_>>()?
    };
    Ok(BracketSpace { u, v, basis })
}

/// Max distance of the hom-space basis `(u, v)` from the bracket space.
pub fn contains_hom_residual(bs: &BracketSpace, cat: &RepCat) -> Result<f64> {
    if (bs.u + bs.v) % 2 == 1 {
        return Ok(0.0);
    }
    Ok(cat
        .hom_space(bs.u, bs.v)?
        .iter()
        .map(|x| bs.distance(x))
        .fold(0.0, f64::max))
}

/// Closure under composition, adjoint and tensor product, for words with
/// lengths ≤ `max_len` (tensor products keep both sides ≤ `max_len`).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClosureReport {
    pub contains_hom: f64,
    pub composition: f64,
    pub adjoint: f64,
    pub tensor: f64,
}

pub fn closure_report(k: &SubspaceFamily, cat: &RepCat, max_len: usize) -> Result<ClosureReport> {
    let mut spaces = BTreeMap::new();
    for u in 0..=max_len {
        for v in 0..=max_len {
            spaces.insert((u, v), bracket_space(k, cat, u, v)?);
        }
    }
    let mut rep = ClosureReport::default();
    for bs in spaces.values() {
        rep.contains_hom = rep.contains_hom.max(contains_hom_residual(bs, cat)?);
        let back = &spaces[&(bs.v, bs.u)];
        for x in &bs.basis {
            rep.adjoint = rep.adjoint.max(back.distance(&x.adjoint()));
        }
    }
    for u in 0..=max_len {
        for v in 0..=max_len {
            for w in 0..=max_len {
                let (a, b, target) = (&spaces[&(u, v)], &spaces[&(v, w)], &spaces[&(u, w)]);
                for x in &a.basis {
                    for y in &b.basis {
                        rep.composition = rep.composition.max(target.distance(&(y * x)));
                    }
                }
            }
        }
    }
    for u in 0..=max_len {
        for u2 in 0..=max_len - u {
            for v in 0..=max_len {
                for v2 in 0..=max_len - v {
                    let target = &spaces[&(u + u2, v + v2)];
                    for x in &spaces[&(u, v)].basis {
                        for y in &spaces[&(u2, v2)].basis {
                            rep.tensor = rep.tensor.max(target.distance(&kron(x, y)));
                        }
                    }
                }
            }
        }
    }
    Ok(rep)
}

impl ClosureReport {
    pub fn max_residual(&self) -> f64 {
        self.contains_hom
            .max(self.composition)
            .max(self.adjoint)
            .max(self.tensor)
    }
}

/// Linear functional on the spectral algebra: `χ(T̄_k ⊗ e_a) = blocks[n][(k, a)]`.
#[derive(Clone, Debug, Default)]
pub struct Character {
    pub blocks: BTreeMap<IrrepLabel, Matrix>,
}

impl Character {
    pub fn eval(&self, x: &AlgebraElement) -> crate::numerics::C64 {
        let mut total = ZERO;
        for (n, b) in &x.blocks {
            if let Some(g) = self.blocks.get(n) {
                total += b.iter().zip(g.iter()).map(|(p, q)| p * q).sum::<crate::numerics::C64>();
            }
        }
        total
    }

    /// The functional vanishing off the unit.
    pub fn unit_only() -> Self {
        Character {
            blocks: [(0, Matrix::from_element(1, 1, crate::numerics::ONE))]
                .into_iter()
                .collect(),
        }
    }
}

/// `χ` induced by a natural family `η_n : F(n) → H_n`: `χ((n,k,a)) = conj(η_n[a, k])`.
pub fn character_from_transformation(eta: &BTreeMap<IrrepLabel, Matrix>) -> Character {
    Character {
        blocks: eta.iter().map(|(&n, m)| (n, m.adjoint())).collect(),
    }
}

/// `η_n = w_n* ι_n W_n`: the inclusion of a subspace functor into the embedding,
/// in irrep coordinates. For the weight-zero family this is evaluation at the pole.
pub fn inclusion_transformation(
    f: &SubspaceFunctor,
    ir: &IrrepFunctor,
    max_label: IrrepLabel,
) -> Result<BTreeMap<IrrepLabel, Matrix>> {
    let cat = crate::qfunctor::QuasitensorFunctor::category(f);
    let carriers = ir
        .carriers
        .as_ref()
        .ok_or_else(|| Error::Contract("inclusion needs word-level carriers".into()))?;
    let mut out = BTreeMap::new();
    for n in 0..=max_label.min(ir.max_label) {
        if ir.dims[n] == 0 {
            continue;
        }
        let w = cat.irrep_isometry(n)?;
        out.insert(n, w.adjoint() * &*f.family().isometry(n) * &carriers[n]);
    }
    Ok(out)
}

/// Isometric natural transformation into the embedding functor.
#[derive(Clone, Debug)]
pub struct NaturalEmbedding {
    /// `η_n`, an `(n+1) × d_n` matrix.
    pub eta: BTreeMap<IrrepLabel, Matrix>,
    pub isometry_residual: f64,
    pub naturality_residual: f64,
}

/// Validate `χ` (unital, multiplicative and `*`-preserving on basis pairs of
/// grade ≤ `max_spin`) and build `η_n[a, k] = χ((T̄_k ⊗ e_a)*)`.
pub fn character_to_transformation(chi: &Character, alg: &SpectralAlgebra, tol: f64) -> Result<NaturalEmbedding> {
    let unit = alg.unit();
    if (chi.eval(&unit) - crate::numerics::ONE).norm() > tol {
        return Err(Error::Invalid("character is not unital".into()));
    }
    let basis = alg.basis(alg.max_spin);
    let elems: Vec<AlgebraElement> = basis.iter().map(|&e| alg.element(e)).collect::<Result<_>>()?;
    for x in &elems {
        let s = chi.eval(&alg.star(x)?);
        if (s - chi.eval(x).conj()).norm() > tol {
            return Err(Error::Invalid("character does not preserve the involution".into()));
        }
        for y in &elems {
            let lhs = chi.eval(&alg.multiply(x, y)?);
            let rhs = chi.eval(x) * chi.eval(y);
            if (lhs - rhs).norm() > tol {
                return Err(Error::Invalid(format!(
                    "character is not multiplicative, defect {:e}",
                    (lhs - rhs).norm()
                )));
            }
        }
    }
    let mut eta = BTreeMap::new();
    for n in alg.spectral_grades(alg.top_grade()) {
        let d = alg.dims[n];
        let mut m = Matrix::zeros(n + 1, d);
        for k in 0..d {
            for a in 0..=n {
                let x = alg.element(SpectralBasisElement { grade: n, k, a })?;
                m[(a, k)] = chi.eval(&alg.star(&x)?);
            }
        }
        eta.insert(n, m);
    }
    let mut iso: f64 = 0.0;
    for m in eta.values() {
        iso = iso.max(dist(&(m.adjoint() * m), &identity(m.ncols())));
    }
    let nat = naturality_residual(alg, &eta)?;
    Ok(NaturalEmbedding {
        eta,
        isometry_residual: iso,
        naturality_residual: nat,
    })
}

/// `max ‖Σ_α s_α η_α C^α − η_n ⊗ η_m‖` over pairs with `n + m ≤ 2·max_spin`.
pub fn naturality_residual(alg: &SpectralAlgebra, eta: &BTreeMap<IrrepLabel, Matrix>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let grades = alg.spectral_grades(alg.top_grade());
    for &n in &grades {
        for &m in &grades {
            if n + m > alg.top_grade() {
                continue;
            }
            let rhs = kron(&eta[&n], &eta[&m]);
            let mut lhs = Matrix::zeros(rhs.nrows(), rhs.ncols());
            for (alpha, cmat, s) in alg.channel_data(n, m)? {
                lhs += s * &eta[&alpha] * cmat;
            }
            worst = worst.max(dist(&lhs, &rhs));
        }
    }
    Ok(worst)
}
