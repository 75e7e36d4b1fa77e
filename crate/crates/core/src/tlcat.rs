//! Temperley–Lieb diagrams and their evaluation through a duality datum.
//!
//! A diagram `n_in → n_out` is a planar perfect matching of its boundary
//! points. Points are numbered bottom left-to-right (`0..n_in`), then top
//! left-to-right (`n_in..n_in+n_out`).
//!
//! The generators are normalized: a cup evaluates to `R/√μ`, so a closed loop
//! is worth `δ = μ + 1/μ`. The fundamental representation has Frobenius–Schur
//! sign −1, so every zigzag straightened during composition contributes a
//! factor −1. Endomorphism algebras are still the usual Temperley–Lieb
//! algebras, which is what the Jones–Wenzl recursion needs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{c, conj, dist, vectorize, Matrix, C64, ZERO};

/// Deformation parameter μ ∈ (0, 1] together with the loop value it induces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopParameter {
    mu: f64,
}

impl LoopParameter {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::Invalid(format!("mu must lie in (0, 1], got {mu}")));
        }
        Ok(LoopParameter { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn delta(&self) -> f64 {
        self.mu + 1.0 / self.mu
    }

    /// `[n]_μ`, so that `[n+1]_μ = Σ_{k=0..n} μ^{n-2k}`.
    pub fn qint(&self, n: usize) -> f64 {
        quantum_integer(n, self.mu)
    }
}

pub fn quantum_integer(n: usize, mu: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let m = n as i32 - 1;
    (0..n as i32).map(|k| mu.powi(m - 2 * k)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcKind {
    Cap,
    Cup,
    Through,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TLDiagram {
    n_in: usize,
    n_out: usize,
    pair: Vec<usize>,
}

impl TLDiagram {
    /// Build from a partner list, rejecting non-involutions and crossings.
    pub fn new(n_in: usize, n_out: usize, pair: Vec<usize>) -> Result<Self> {
        let n = n_in + n_out;
        if pair.len() != n {
            return Err(Error::Invalid(format!(
                "pairing has {} entries for {n} points",
                pair.len()
            )));
        }
        for (i, &p) in pair.iter().enumerate() {
            if p >= n || p == i || pair[p] != i {
                return Err(Error::Invalid(format!("point {i} is not properly paired")));
            }
        }
        let d = TLDiagram { n_in, n_out, pair };
        if !d.is_planar() {
            return Err(Error::Invalid("pairing is not planar".into()));
        }
        Ok(d)
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn partner(&self, p: usize) -> usize {
        self.pair[p]
    }

    pub fn identity(n: usize) -> Self {
        let pair = (0..2 * n).map(|p| if p < n { p + n } else { p - n }).collect();
        TLDiagram { n_in: n, n_out: n, pair }
    }

    fn circle_pos(&self, p: usize) -> usize {
        if p < self.n_in {
            p
        } else {
            self.n_in + self.n_out - 1 - (p - self.n_in)
        }
    }

    fn is_planar(&self) -> bool {
        let arcs: Vec<(usize, usize)> = self
            .arcs()
            .into_iter()
            .map(|(p, q)| {
                let (a, b) = (self.circle_pos(p), self.circle_pos(q));
                (a.min(b), a.max(b))
            })
            .collect();
        for (i, &(a, b)) in arcs.iter().enumerate() {
            for &(x, y) in &arcs[i + 1..] {
                if (a < x && x < b && b < y) || (x < a && a < y && y < b) {
                    return false;
                }
            }
        }
        true
    }

    /// Arcs `(p, q)` with `p < q`.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        (0..self.pair.len())
            .filter(|&p| p < self.pair[p])
            .map(|p| (p, self.pair[p]))
            .collect()
    }

    pub fn kind(&self, p: usize, q: usize) -> ArcKind {
        match (p < self.n_in, q < self.n_in) {
            (true, true) => ArcKind::Cap,
            (false, false) => ArcKind::Cup,
            _ => ArcKind::Through,
        }
    }

    /// Number of cups plus caps: the critical points of the canonical drawing.
    pub fn turns(&self) -> usize {
        (self.n_in + self.n_out) / 2 - self.through_count()
    }

    pub fn through_count(&self) -> usize {
        (0..self.n_in).filter(|&p| self.pair[p] >= self.n_in).count()
    }

    pub fn adjoint(&self) -> TLDiagram {
        let (a, b) = (self.n_in, self.n_out);
        // old top k -> new bottom k; old bottom i -> new top i
        let map = |p: usize| if p < a { b + p } else { p - a };
        let mut pair = vec![0; a + b];
        for p in 0..a + b {
            pair[map(p)] = map(self.pair[p]);
        }
        TLDiagram { n_in: b, n_out: a, pair }
    }

    pub fn tensor(&self, other: &TLDiagram) -> TLDiagram {
        let (a, b, cc, d) = (self.n_in, self.n_out, other.n_in, other.n_out);
        let n_in = a + cc;
        let fmap = |p: usize| if p < a { p } else { n_in + (p - a) };
        let gmap = |p: usize| if p < cc { a + p } else { n_in + b + (p - cc) };
        let mut pair = vec![0; n_in + b + d];
        for p in 0..a + b {
            pair[fmap(p)] = fmap(self.pair[p]);
        }
        for p in 0..cc + d {
            pair[gmap(p)] = gmap(other.pair[p]);
        }
        TLDiagram { n_in, n_out: b + d, pair }
    }

    /// Stack `g` below `self`. Returns the reduced diagram, the number of
    /// closed loops, and the number of straightened zigzags.
    pub fn compose_raw(&self, g: &TLDiagram) -> Result<(TLDiagram, usize, usize)> {
        let f = self;
        if g.n_out != f.n_in {
            return Err(Error::Shape(format!(
                "cannot stack {}→{} on top of {}→{}",
                f.n_in, f.n_out, g.n_in, g.n_out
            )));
        }
        let (a, b, cc) = (g.n_in, g.n_out, f.n_out);
        let mut seen = vec![false; b];
        let mut pair = vec![0usize; a + cc];
        // ends: result bottom i = g point i, result top k = f point b + k
        enum Side {
            G(usize),
            F(usize),
        }
        let walk = |start: Side, seen: &mut Vec<bool>| -> usize {
            let mut cur = start;
            loop {
                match cur {
                    Side::G(p) => {
                        let q = g.pair[p];
                        if q < a {
                            return q;
                        }
                        let m = q - a;
                        seen[m] = true;
                        cur = Side::F(m);
                    }
                    Side::F(p) => {
                        let q = f.pair[p];
                        if q >= b {
                            return a + (q - b);
                        }
                        seen[q] = true;
                        cur = Side::G(a + q);
                    }
                }
            }
        };
        for i in 0..a {
            pair[i] = walk(Side::G(i), &mut seen);
        }
        for k in 0..cc {
            pair[a + k] = walk(Side::F(b + k), &mut seen);
        }
        let mut loops = 0;
        for m in 0..b {
            if seen[m] {
                continue;
            }
            loops += 1;
            let mut cur = m;
            loop {
                seen[cur] = true;
                let up = f.pair[cur];
                seen[up] = true;
                let down = g.pair[a + up] - a;
                if down == m {
                    break;
                }
                cur = down;
            }
        }
        let out = TLDiagram {
            n_in: a,
            n_out: cc,
            pair,
        };
        let excess = f.turns() + g.turns() - out.turns() - 2 * loops;
        debug_assert!(excess % 2 == 0);
        Ok((out, loops, excess / 2))
    }
}

/// All planar diagrams `n_in → n_out`, in a fixed deterministic order.
pub fn tl_basis(n_in: usize, n_out: usize) -> Vec<TLDiagram> {
    let n = n_in + n_out;
    if n % 2 == 1 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = vec![usize::MAX; n];
    matchings(&mut cur, &mut out);
    // circle position back to point index
    let point = |pos: usize| {
        if pos < n_in {
            pos
        } else {
            n_in + (n_in + n_out - 1 - pos)
        }
    };
    out.into_iter()
        .map(|m| {
            let mut pair = vec![0; n];
            for (pos, &q) in m.iter().enumerate() {
                pair[point(pos)] = point(q);
            }
            TLDiagram { n_in, n_out, pair }
        })
        .collect()
}

fn matchings(cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let Some(lo) = cur.iter().position(|&x| x == usize::MAX) else {
        out.push(cur.clone());
        return;
    };
    // partner of lo must enclose an even block of still-free points
    let mut hi = lo + 1;
    while hi < cur.len() {
        if cur[hi] == usize::MAX && (hi - lo - 1) % 2 == 0 {
            let inner_free = (lo + 1..hi).all(|p| cur[p] == usize::MAX);
            if inner_free {
                cur[lo] = hi;
                cur[hi] = lo;
                matchings(cur, out);
                cur[lo] = usize::MAX;
                cur[hi] = usize::MAX;
            }
        }
        if cur[hi] != usize::MAX {
            break;
        }
        hi += 1;
    }
}

/// Formal linear combination of diagrams with the same boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct TLMorphism {
    n_in: usize,
    n_out: usize,
    terms: BTreeMap<TLDiagram, C64>,
}

impl TLMorphism {
    pub fn zero(n_in: usize, n_out: usize) -> Self {
        TLMorphism {
            n_in,
            n_out,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_diagram(d: TLDiagram) -> Self {
        let mut m = Self::zero(d.n_in, d.n_out);
        m.terms.insert(d, c(1.0));
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagram(TLDiagram::identity(n))
    }

    pub fn cup() -> Self {
        Self::from_diagram(TLDiagram {
            n_in: 0,
            n_out: 2,
            pair: vec![1, 0],
        })
    }

    pub fn cap() -> Self {
        Self::from_diagram(TLDiagram {
            n_in: 2,
            n_out: 0,
            pair: vec![1, 0],
        })
    }

    /// `E_i` on `n` strands (1-based, joining strands i and i+1).
    pub fn generator(n: usize, i: usize, mu: LoopParameter) -> Result<Self> {
        if i == 0 || i >= n {
            return Err(Error::Invalid(format!("E_{i} does not exist on {n} strands")));
        }
        let e = compose(&Self::cup(), &Self::cap(), mu)?;
        Ok(Self::identity(i - 1)
            .tensor(&e)
            .tensor(&Self::identity(n - i - 1)))
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TLDiagram, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, d: &TLDiagram) -> C64 {
        self.terms.get(d).copied().unwrap_or(ZERO)
    }

    fn push(&mut self, d: TLDiagram, z: C64) {
        let e = self.terms.entry(d).or_insert(ZERO);
        *e += z;
    }

    fn prune(mut self) -> Self {
        self.terms.retain(|_, z| *z != ZERO);
        self
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= z;
        }
        out.prune()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.n_in, self.n_out) != (other.n_in, other.n_out) {
            return Err(Error::Shape("adding TL morphisms of different type".into()));
        }
        let mut out = self.clone();
        for (d, z) in &other.terms {
            out.push(d.clone(), *z);
        }
        Ok(out.prune())
    }

    /// `self += z · other`, in place.
    pub fn add_scaled(&mut self, other: &Self, z: C64) -> Result<()> {
        if (self.n_in, self.n_out) != (other.n_in, other.n_out) {
            return Err(Error::Shape("adding TL morphisms of different type".into()));
        }
        for (d, w) in &other.terms {
            self.push(d.clone(), z * w);
        }
        self.terms.retain(|_, z| *z != ZERO);
        Ok(())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n_in + other.n_in, self.n_out + other.n_out);
        for (d, z) in &self.terms {
            for (e, w) in &other.terms {
                out.push(d.tensor(e), z * w);
            }
        }
        out.prune()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.n_out, self.n_in);
        for (d, z) in &self.terms {
            out.push(d.adjoint(), z.conj());
        }
        out
    }

    pub fn evaluate(&self, datum: &DualityDatum) -> Matrix {
        evaluate(self, datum)
    }
}

/// `f ∘ g` (apply `g` first).
pub fn compose(f: &TLMorphism, g: &TLMorphism, mu: LoopParameter) -> Result<TLMorphism> {
    if g.n_out != f.n_in {
        return Err(Error::Shape(format!(
            "cannot compose {}→{} after {}→{}",
            f.n_in, f.n_out, g.n_in, g.n_out
        )));
    }
    let delta = mu.delta();
    let mut out = TLMorphism::zero(g.n_in, f.n_out);
    for (df, zf) in &f.terms {
        for (dg, zg) in &g.terms {
            let (d, loops, zigzags) = df.compose_raw(dg)?;
            let sign = if zigzags % 2 == 0 { 1.0 } else { -1.0 };
            out.push(d, zf * zg * c(sign * delta.powi(loops as i32)));
        }
    }
    Ok(out.prune())
}

/// Jones–Wenzl idempotent by Wenzl's recursion.
pub fn jones_wenzl(n: usize, mu: LoopParameter) -> Result<TLMorphism> {
    let mut p = TLMorphism::identity(n.min(1));
    if n == 0 {
        return Ok(TLMorphism::identity(0));
    }
    for k in 2..=n {
        let q = p.tensor(&TLMorphism::identity(1));
        let e = TLMorphism::generator(k, k - 1, mu)?;
        let qeq = compose(&q, &compose(&e, &q, mu)?, mu)?;
        let ratio = mu.qint(k - 1) / mu.qint(k);
        p = q.add(&qeq.scale(c(-ratio)))?;
    }
    Ok(p)
}

/// Antilinear map `j` with `j x = J x̄`, encoded by the matrix `J`.
///
/// The associated cup vector is `R = Σ_i j e_i ⊗ e_i`, whose row-major
/// reshaping is `J` itself.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityDatum {
    mu: f64,
    j: Matrix,
}

impl DualityDatum {
    /// `j e₁ = −μ e₂`, `j e₂ = e₁`, giving `R = e₁⊗e₂ − μ e₂⊗e₁`.
    pub fn standard(mu: LoopParameter) -> Self {
        let mut j = Matrix::zeros(2, 2);
        j[(0, 1)] = c(1.0);
        j[(1, 0)] = c(-mu.mu());
        DualityDatum { mu: mu.mu(), j }
    }

    /// Block-diagonal datum `j e_{2k-1} = λ_k e_{2k}`, `j e_{2k} = −(μ/λ_k) e_{2k-1}`.
    pub fn from_pairs(mu: LoopParameter, lambdas: &[f64]) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::Invalid("at least one pair block is required".into()));
        }
        if lambdas.iter().any(|l| !l.is_finite() || *l == 0.0) {
            return Err(Error::Invalid("pair parameters must be finite and nonzero".into()));
        }
        let m = mu.mu();
        let residual = pair_constraint_residual(m, lambdas);
        if residual.abs() > 1e-9 {
            return Err(Error::Invalid(format!(
                "pair constraint sum(l^2 + mu^2/l^2) = 1 + mu^2 violated, residual {residual:e}"
            )));
        }
        let n = 2 * lambdas.len();
        let mut j = Matrix::zeros(n, n);
        for (k, &l) in lambdas.iter().enumerate() {
            j[(2 * k + 1, 2 * k)] = c(l);
            j[(2 * k, 2 * k + 1)] = c(-m / l);
        }
        Ok(DualityDatum { mu: m, j })
    }

    /// General datum; checks `j² = −μ` and `Tr(j*j) = 1 + μ²`.
    pub fn general(mu: LoopParameter, j: Matrix) -> Result<Self> {
        let n = j.nrows();
        if j.ncols() != n || n == 0 {
            return Err(Error::Invalid("datum matrix must be square and nonempty".into()));
        }
        if n % 2 == 1 {
            return Err(Error::Invalid(format!("odd fiber dimension {n}")));
        }
        let m = mu.mu();
        let sq = &j * conj(&j);
        let target = Matrix::identity(n, n) * c(-m);
        if dist(&sq, &target) > 1e-9 {
            return Err(Error::Invalid("datum does not square to -mu".into()));
        }
        let tr: f64 = j.iter().map(|z| z.norm_sqr()).sum();
        if (tr - (1.0 + m * m)).abs() > 1e-9 {
            return Err(Error::Invalid(format!(
                "datum trace constraint violated, residual {:e}",
                tr - (1.0 + m * m)
            )));
        }
        Ok(DualityDatum { mu: m, j })
    }

    /// Transport along a unitary `V`: `j' = V j V*`.
    pub fn conjugate_by(&self, v: &Matrix) -> Result<Self> {
        let n = self.dim();
        if v.shape() != (n, n) {
            return Err(Error::Shape("unitary has wrong size".into()));
        }
        let j = v * &self.j * v.transpose();
        Self::general(LoopParameter::new(self.mu)?, j)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn j_matrix(&self) -> &Matrix {
        &self.j
    }

    /// Unnormalized cup vector `R` of length `dim²`.
    pub fn r_vec(&self) -> Matrix {
        vectorize(&self.j)
    }
}

pub fn pair_constraint_residual(mu: f64, lambdas: &[f64]) -> f64 {
    lambdas
        .iter()
        .map(|l| l * l + mu * mu / (l * l))
        .sum::<f64>()
        - (1.0 + mu * mu)
}

/// Evaluate through the datum: cup ↦ `R/√μ`, cap ↦ `R*/√μ`.
pub fn evaluate(f: &TLMorphism, datum: &DualityDatum) -> Matrix {
    let n = datum.dim();
    let rows = n.pow(f.n_out as u32);
    let cols = n.pow(f.n_in as u32);
    let mut out = Matrix::zeros(rows, cols);
    let s = 1.0 / datum.mu.sqrt();
    let mut cup_nz = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let w = datum.j[(x, y)];
            if w != ZERO {
                cup_nz.push((x, y, w * s));
            }
        }
    }
    let cap_nz: Vec<_> = cup_nz.iter().map(|&(x, y, w)| (x, y, w.conj())).collect();
    let id_nz: Vec<_> = (0..n).map(|x| (x, x, c(1.0))).collect();
    for (d, &coef) in &f.terms {
        // (row place, col place) contributed per unit value at a point
        let place = |p: usize| -> (usize, usize) {
            if p < d.n_in {
                (0, n.pow((d.n_in - 1 - p) as u32))
            } else {
                (n.pow((d.n_out - 1 - (p - d.n_in)) as u32), 0)
            }
        };
        let arcs: Vec<_> = d
            .arcs()
            .into_iter()
            .map(|(p, q)| {
                let nz = match d.kind(p, q) {
                    ArcKind::Cup => &cup_nz,
                    ArcKind::Cap => &cap_nz,
                    ArcKind::Through => &id_nz,
                };
                (place(p), place(q), nz)
            })
            .collect();
        accumulate(&arcs, 0, 0, 0, coef, &mut out);
    }
    out
}

type ArcNz<'a> = ((usize, usize), (usize, usize), &'a Vec<(usize, usize, C64)>);

fn accumulate(arcs: &[ArcNz], k: usize, row: usize, col: usize, w: C64, out: &mut Matrix) {
    if k == arcs.len() {
        out[(row, col)] += w;
        return;
    }
    let ((pr, pc), (qr, qc), nz) = arcs[k];
    for &(x, y, v) in nz.iter() {
        accumulate(
            arcs,
            k + 1,
            row + x * pr + y * qr,
            col + x * pc + y * qc,
            w * v,
            out,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{identity, kron, numerical_rank, Tolerance};
    use proptest::prelude::*;

    fn lp(mu: f64) -> LoopParameter {
        LoopParameter::new(mu).unwrap()
    }

    fn catalan(k: usize) -> usize {
        let mut c = 1usize;
        for i in 0..k {
            c = c * 2 * (2 * i + 1) / (i + 2);
        }
        c
    }

    fn fiber_lambda() -> f64 {
        ((0.52 + 0.1104f64.sqrt()) / 2.0).sqrt()
    }

    #[test]
    fn quantum_integers() {
        assert!((quantum_integer(2, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantum_integer(3, 0.5) - 5.25).abs() < 1e-15);
        assert_eq!(quantum_integer(3, 1.0), 3.0);
        assert!(LoopParameter::new(1.5).is_err());
        assert!(LoopParameter::new(0.0).is_err());
    }

    #[test]
    fn basis_counts_are_catalan() {
        assert_eq!(tl_basis(3, 3).len(), 5);
        assert!(tl_basis(2, 1).is_empty());
        assert_eq!(tl_basis(0, 0).len(), 1);
        for n in 0..=12 {
            for a in 0..=n {
                let b = n - a;
                let basis = tl_basis(a, b);
                let want = if n % 2 == 0 { catalan(n / 2) } else { 0 };
                assert_eq!(basis.len(), want, "({a},{b})");
                for d in &basis {
                    assert!(TLDiagram::new(a, b, d.pair.clone()).is_ok());
                }
                let mut sorted = basis.clone();
                sorted.sort();
                sorted.dedup();
                assert_eq!(sorted.len(), basis.len());
            }
        }
    }

    #[test]
    fn crossing_rejected() {
        // bottom 0-2, bottom 1-3 cross
        assert!(TLDiagram::new(4, 0, vec![2, 3, 0, 1]).is_err());
        assert!(TLDiagram::new(2, 2, vec![3, 2, 1, 0]).is_err());
        assert!(TLDiagram::new(2, 2, vec![2, 3, 0, 1]).is_ok());
    }

    #[test]
    fn loop_and_zigzag() {
        let m = lp(0.5);
        let e = compose(&TLMorphism::cup(), &TLMorphism::cap(), m).unwrap();
        let ee = compose(&e, &e, m).unwrap();
        assert_eq!(ee, e.scale(c(2.5)));
        let circle = compose(&TLMorphism::cap(), &TLMorphism::cup(), m).unwrap();
        assert_eq!(circle, TLMorphism::identity(0).scale(c(2.5)));
        let s = compose(
            &TLMorphism::cap().tensor(&TLMorphism::identity(1)),
            &TLMorphism::identity(1).tensor(&TLMorphism::cup()),
            m,
        )
        .unwrap();
        assert_eq!(s, TLMorphism::identity(1).scale(c(-1.0)));
    }

    #[test]
    fn temperley_lieb_relations() {
        let m = lp(0.3);
        let e1 = TLMorphism::generator(3, 1, m).unwrap();
        let e2 = TLMorphism::generator(3, 2, m).unwrap();
        let e121 = compose(&e1, &compose(&e2, &e1, m).unwrap(), m).unwrap();
        assert_eq!(e121, e1);
        let e212 = compose(&e2, &compose(&e1, &e2, m).unwrap(), m).unwrap();
        assert_eq!(e212, e2);
    }

    #[test]
    fn jones_wenzl_idempotent_and_killed() {
        for &mu in &[0.3, 0.5, 1.0] {
            let m = lp(mu);
            for n in 0..=6 {
                let p = jones_wenzl(n, m).unwrap();
                let pp = compose(&p, &p, m).unwrap();
                let diff = pp.add(&p.scale(c(-1.0))).unwrap();
                assert!(diff.terms().all(|(_, z)| z.norm() < 1e-10), "n={n}");
                assert!((p.coefficient(&TLDiagram::identity(n)) - c(1.0)).norm() < 1e-12);
                for i in 1..n {
                    let e = TLMorphism::generator(n, i, m).unwrap();
                    let ep = compose(&e, &p, m).unwrap();
                    assert!(ep.terms().all(|(_, z)| z.norm() < 1e-10));
                    let pe = compose(&p, &e, m).unwrap();
                    assert!(pe.terms().all(|(_, z)| z.norm() < 1e-10));
                }
            }
        }
    }

    #[test]
    fn raw_datum_identities() {
        for &mu in &[0.2, 0.5, 1.0] {
            let d = DualityDatum::standard(lp(mu));
            let r = d.r_vec();
            let rr = (r.adjoint() * &r)[(0, 0)];
            assert!((rr - c(1.0 + mu * mu)).norm() < 1e-14);
            let zig = kron(&r.adjoint(), &identity(2)) * kron(&identity(2), &r);
            assert!(dist(&zig, &(identity(2) * c(-mu))) < 1e-14);
            let zag = kron(&identity(2), &r.adjoint()) * kron(&r, &identity(2));
            assert!(dist(&zag, &(identity(2) * c(-mu))) < 1e-14);
        }
        let d = DualityDatum::standard(lp(0.5));
        let r = d.r_vec();
        assert_eq!(r[(1, 0)], c(1.0));
        assert_eq!(r[(2, 0)], c(-0.5));
    }

    #[test]
    fn evaluate_generators() {
        let m = lp(0.5);
        let d = DualityDatum::standard(m);
        let cup = TLMorphism::cup().evaluate(&d) * c(0.5f64.sqrt());
        assert!(dist(&cup, &d.r_vec()) < 1e-15);
        let circle = compose(&TLMorphism::cap(), &TLMorphism::cup(), m).unwrap();
        assert!((circle.evaluate(&d)[(0, 0)] - c(2.5)).norm() < 1e-14);
        let p2 = jones_wenzl(2, m).unwrap().evaluate(&d);
        let r = d.r_vec();
        let want = identity(4) - &r * r.adjoint() * c(1.0 / 1.25);
        assert!(dist(&p2, &want) < 1e-14);
    }

    #[test]
    fn pair_datum() {
        let m = lp(0.2);
        let l = fiber_lambda();
        let d = DualityDatum::from_pairs(m, &[l, l]).unwrap();
        assert_eq!(d.dim(), 4);
        let r = d.r_vec();
        assert!(((r.adjoint() * &r)[(0, 0)].re - 1.04).abs() < 1e-12);
        let err = DualityDatum::from_pairs(m, &[l, l + 0.1]).unwrap_err();
        assert!(err.to_string().contains("residual"));
        let mut j = Matrix::zeros(3, 3);
        j[(0, 0)] = c(1.0);
        assert!(DualityDatum::general(m, j).unwrap_err().to_string().contains("odd"));
        // standard datum passes the general validation
        assert!(DualityDatum::general(m, DualityDatum::standard(m).j.clone()).is_ok());
    }

    #[test]
    fn evaluation_is_faithful() {
        let m = lp(0.6);
        let datums = [
            DualityDatum::standard(m),
            DualityDatum::standard(lp(1.0)),
            DualityDatum::from_pairs(lp(0.2), &[fiber_lambda(), fiber_lambda()]).unwrap(),
        ];
        for d in &datums {
            for (a, b) in [(2, 2), (3, 3), (1, 5), (4, 4)] {
                let basis = tl_basis(a, b);
                let cols: Vec<Matrix> = basis
                    .iter()
                    .map(|x| vectorize(&TLMorphism::from_diagram(x.clone()).evaluate(d)))
                    .collect();
                let stacked = crate::numerics::hstack(&cols, cols[0].nrows());
                assert_eq!(numerical_rank(&stacked, Tolerance::default()), basis.len());
            }
        }
    }

    fn datum_strategy() -> impl Strategy<Value = DualityDatum> {
        prop_oneof![
            (0.1f64..1.0).prop_map(|mu| DualityDatum::standard(lp(mu))),
            Just(DualityDatum::from_pairs(lp(0.2), &[fiber_lambda(), fiber_lambda()]).unwrap()),
        ]
    }

    fn diagram(n_in: usize, n_out: usize) -> impl Strategy<Value = TLDiagram> {
        let basis = tl_basis(n_in, n_out);
        (0..basis.len()).prop_map(move |i| basis[i].clone())
    }

    fn triple() -> impl Strategy<Value = (TLDiagram, TLDiagram)> {
        (0usize..4, 0usize..4, 0usize..4)
            .prop_filter("parity", |(a, b, cc)| (a + b) % 2 == 0 && (b + cc) % 2 == 0)
            .prop_flat_map(|(a, b, cc)| (diagram(b, cc), diagram(a, b)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn evaluation_is_a_functor(d in datum_strategy(), (f, g) in triple()) {
            let m = lp(d.mu());
            let fg = compose(&TLMorphism::from_diagram(f.clone()), &TLMorphism::from_diagram(g.clone()), m).unwrap();
            let lhs = fg.evaluate(&d);
            let rhs = TLMorphism::from_diagram(f).evaluate(&d) * TLMorphism::from_diagram(g).evaluate(&d);
            prop_assert!(dist(&lhs, &rhs) < 1e-9 * (1.0 + crate::numerics::frobenius(&rhs)));
        }

        #[test]
        fn evaluation_is_monoidal_and_star(d in datum_strategy(), (f, g) in triple()) {
            let tf = TLMorphism::from_diagram(f);
            let tg = TLMorphism::from_diagram(g);
            let lhs = tf.tensor(&tg).evaluate(&d);
            let rhs = kron(&tf.evaluate(&d), &tg.evaluate(&d));
            prop_assert!(dist(&lhs, &rhs) < 1e-12);
            prop_assert!(dist(&tf.adjoint().evaluate(&d), &tf.evaluate(&d).adjoint()) < 1e-12);
        }

        #[test]
        fn compose_is_associative((f, g) in triple(), mu in 0.1f64..1.0) {
            let m = lp(mu);
            let tf = TLMorphism::from_diagram(f.clone());
            let tg = TLMorphism::from_diagram(g);
            let h = TLMorphism::from_diagram(f.adjoint());
            // (h f) g = h (f g)
            let l = compose(&compose(&h, &tf, m).unwrap(), &tg, m).unwrap();
            let r = compose(&h, &compose(&tf, &tg, m).unwrap(), m).unwrap();
            let diff = l.add(&r.scale(c(-1.0))).unwrap();
            prop_assert!(diff.terms().all(|(_, z)| z.norm() < 1e-9));
        }
    }
}
