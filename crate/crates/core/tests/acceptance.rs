//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any failure.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use qcat::numerics::{column_space_isometry, identity, kron, Matrix, C64};
use qcat::qfunctor::{
    check_axioms, dimension_bounds, equality_case_probe, make_embedding, make_fiber, make_weight_zero,
    IrrepFunctor, QuasitensorFunctor,
};
use qcat::repcat::RepCat;
use qcat::spectral::{
    algebra_report, build_algebra, induce_isomorphism, isomorphism_residuals, linear_independence_check,
    SpectralAlgebra,
};
use qcat::subgroup::{
    character_from_transformation, character_to_transformation, check_family, closure_report, corrupted_family,
    inclusion_transformation, SubspaceFamily,
};
use qcat::tlcat::{DualityDatum, LoopParameter};

type Outcome = qcat::Result<(bool, String)>;

const TOL: f64 = 1e-8;
const BOUND_TOL: f64 = 1e-6;
/// Commutator h-norm of the weight-zero algebra at mu = 0.5, max_spin 3 (basis pairs of grade ≤ 3).
const COMMUTATOR_MU_HALF: f64 = 0.42991238991570263;

fn fiber_lambda() -> f64 {
    ((0.52 + 0.1104f64.sqrt()) / 2.0).sqrt()
}

fn fiber(mu: f64, lambdas: &[f64]) -> qcat::Result<Box<dyn QuasitensorFunctor>> {
    let cat = RepCat::shared(mu)?;
    let d = DualityDatum::from_pairs(LoopParameter::new(mu)?, lambdas)?;
    Ok(Box::new(make_fiber(cat, d)?))
}

fn builtin(mu: f64, which: &str) -> qcat::Result<Box<dyn QuasitensorFunctor>> {
    let cat = RepCat::shared(mu)?;
    Ok(match which {
        "embedding" => Box::new(make_embedding(cat)),
        "weight-zero" => Box::new(make_weight_zero(cat)),
        _ => fiber(mu, &[fiber_lambda(), fiber_lambda()])?,
    })
}

fn algebra(mu: f64, which: &str, max_spin: usize) -> qcat::Result<(Arc<RepCat>, SpectralAlgebra)> {
    let cat = RepCat::shared(mu)?;
    let f = builtin(mu, which)?;
    let ir = IrrepFunctor::from_functor(f.as_ref(), 2 * max_spin)?;
    let alg = build_algebra(&cat, &ir, max_spin)?;
    Ok((cat, alg))
}

fn axioms() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cases = Vec::new();
    for mu in [0.3, 0.6, 1.0] {
        for which in ["embedding", "weight-zero"] {
            cases.push((mu, which));
        }
    }
    cases.push((0.2, "fiber"));
    for (mu, which) in cases {
        let f = builtin(mu, which)?;
        let r = check_axioms(f.as_ref(), 5)?.max_residual();
        worst = worst.max(r);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= TOL && secs < 60.0,
        format!("max residual {worst:.2e} over 7 functors, words ≤ 5, {secs:.1} s (target < 60 s)"),
    ))
}

fn bound_cases() -> qcat::Result<Vec<(String, Arc<RepCat>, IrrepFunctor)>> {
    let mut out = Vec::new();
    for (mu, which) in [(0.5, "embedding"), (0.5, "weight-zero"), (0.3, "weight-zero"), (0.2, "fiber")] {
        let f = builtin(mu, which)?;
        out.push((format!("{which}@{mu}"), RepCat::shared(mu)?, IrrepFunctor::from_functor(f.as_ref(), 4)?));
    }
    Ok(out)
}

fn conjugates_and_bounds(cases: &[(String, Arc<RepCat>, IrrepFunctor)]) -> Outcome {
    let (mut conj, mut chain, mut dims_ok, mut rows) = (0.0f64, 0.0f64, true, 0);
    for (_, cat, ir) in cases {
        for n in 0..=4 {
            if ir.dims[n] == 0 {
                continue;
            }
            let b = dimension_bounds(cat, ir, n)?;
            let pushed = ir.conjugate(cat, n)?;
            conj = conj.max(b.conjugate_residual);
            // the conjugate of irrep n is n, so both sides are F(n)
            dims_ok &= pushed.dim() == b.mult;
            chain = chain.max(b.mult as f64 - b.qmult).max(b.qmult - b.qdim);
            rows += 1;
        }
    }
    Ok((
        conj <= TOL && dims_ok && chain <= BOUND_TOL,
        format!("{rows} (functor, irrep) pairs: conjugate residual {conj:.2e}, chain violation {chain:.2e}"),
    ))
}

fn qmult_formulas(cases: &[(String, Arc<RepCat>, IrrepFunctor)]) -> Outcome {
    let mut worst: f64 = 0.0;
    for (_, cat, ir) in cases {
        for n in 0..=4 {
            if ir.dims[n] > 0 {
                let b = dimension_bounds(cat, ir, n)?;
                worst = worst.max((b.qmult - b.qmult_trace).abs());
            }
        }
    }
    Ok((worst <= BOUND_TOL, format!("max |norm product - trace formula| = {worst:.2e}")))
}

fn equality_case(cases: &[(String, Arc<RepCat>, IrrepFunctor)]) -> Outcome {
    let (_, fcat, fib) = cases.iter().find(|c| c.0 == "fiber@0.2").unwrap();
    let a = dimension_bounds(fcat, fib, 1)?;
    let pa = equality_case_probe(fcat, fib, 1)?;
    let (_, wcat, wz) = cases.iter().find(|c| c.0 == "weight-zero@0.5").unwrap();
    let b = dimension_bounds(wcat, wz, 2)?;
    let pb = equality_case_probe(wcat, wz, 2)?;
    let ok = a.mult == 4
        && (a.qmult - 5.2).abs() <= BOUND_TOL
        && (a.qdim - 5.2).abs() <= BOUND_TOL
        && pa
        && b.mult == 1
        && (b.qmult - 1.0).abs() <= BOUND_TOL
        && (b.qdim - 5.25).abs() <= BOUND_TOL
        && b.qmult < b.qdim
        && !pb;
    Ok((
        ok,
        format!(
            "fiber: ({}, {:.9}, {:.9}) probe {pa}; weight-zero irrep 2: ({}, {:.9}, {:.9}) probe {pb}",
            a.mult, a.qmult, a.qdim, b.mult, b.qmult, b.qdim
        ),
    ))
}

/// `build_secs` is the construction time of both algebras; the budget covers it too.
fn algebra_laws(algs: &[(&str, SpectralAlgebra)], build_secs: f64) -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, alg) in algs {
        let r = algebra_report(alg, 2024)?;
        ok &= r.unit <= 1e-12
            && r.associativity <= TOL
            && r.star_involution <= TOL
            && r.star_antimultiplicative <= TOL
            && r.gram_min_eigenvalue > 1e-10
            && r.closed_form <= TOL;
        parts.push(format!(
            "{name}: unit {:.1e} assoc {:.1e} star {:.1e}/{:.1e} gram min {:.4} closed form {:.1e}",
            r.unit, r.associativity, r.star_involution, r.star_antimultiplicative, r.gram_min_eigenvalue, r.closed_form
        ));
    }
    let secs = build_secs + start.elapsed().as_secs_f64();
    parts.push(format!("{secs:.1} s (target < 90 s)"));
    Ok((ok && secs < 90.0, parts.join("; ")))
}

fn multiplicity_maps(algs: &[(&str, SpectralAlgebra)]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut independent = true;
    for (_, alg) in algs {
        for n in alg.spectral_grades(3) {
            let cu = alg.multiplicity_map(n)?;
            worst = worst.max(alg.coisometry_residual(&cu)?);
        }
        independent &= linear_independence_check(alg, 3, 1e-10)?;
    }
    Ok((
        worst <= TOL && independent,
        format!("max ‖c c* - 1‖_h = {worst:.2e}, coefficient Gram nondegenerate: {independent}"),
    ))
}

fn podles_pattern() -> Outcome {
    let expected = [1, 0, 1, 0, 1, 0, 1];
    let mut ok = true;
    let mut seen = Vec::new();
    for mu in [0.3, 0.5, 1.0] {
        let cat = RepCat::shared(mu)?;
        let f = make_weight_zero(cat.clone());
        let dims: Vec<usize> = (0..=6)
            .map(|n| -> qcat::Result<usize> {
                let p = f.arrow_map(&*cat.jw(n)?)?;
                Ok(column_space_isometry(&p, cat.tolerance()).ncols())
            })
            .collect::<qcat::Result<_>>()?;
        ok &= dims == expected;
        seen.push(format!("mu {mu}: {dims:?}"));
    }
    Ok((ok, seen.join("; ")))
}

fn classical_limit(wz_half: &SpectralAlgebra) -> Outcome {
    let (_, wz_one) = algebra(1.0, "weight-zero", 3)?;
    let c1 = wz_one.commutativity_probe()?;
    let ch = wz_half.commutativity_probe()?;
    Ok((
        c1 <= TOL && ch >= 1e-3 && (ch - COMMUTATOR_MU_HALF).abs() <= 1e-9,
        format!("commutator mu=1: {c1:.2e}; mu=0.5: {ch:.12} (pinned {COMMUTATOR_MU_HALF})"),
    ))
}

fn isomorphisms(alg: &SpectralAlgebra) -> Outcome {
    let ids: BTreeMap<usize, Matrix> = alg
        .spectral_grades(alg.top_grade())
        .into_iter()
        .map(|n| (n, identity(alg.dims[n])))
        .collect();
    let id = induce_isomorphism(&ids, alg, alg, TOL)?;
    let mut id_worst: f64 = 0.0;
    for e in alg.basis(alg.top_grade()) {
        let x = alg.element(e)?;
        id_worst = id_worst.max(id.apply(&x)?.sub(&x).max_abs());
    }
    let mu = 0.2;
    let cat = RepCat::shared(mu)?;
    let l = fiber_lambda();
    let d = DualityDatum::from_pairs(LoopParameter::new(mu)?, &[l, l])?;
    let v = Matrix::from_fn(4, 4, |i, j| C64::from_polar(0.5, (i * j) as f64 * std::f64::consts::FRAC_PI_2));
    let d2 = d.conjugate_by(&v)?;
    let i1 = IrrepFunctor::from_functor(&make_fiber(cat.clone(), d)?, 2)?;
    let i2 = IrrepFunctor::from_functor(&make_fiber(cat.clone(), d2)?, 2)?;
    let a1 = build_algebra(&cat, &i1, 1)?;
    let a2 = build_algebra(&cat, &i2, 1)?;
    let (c1, c2) = (i1.carriers.as_ref().unwrap(), i2.carriers.as_ref().unwrap());
    let mut u = BTreeMap::new();
    let mut vn = identity(1);
    for n in 0..=2 {
        u.insert(n, c2[n].adjoint() * &vn * &c1[n]);
        vn = kron(&vn, &v);
    }
    let iso = induce_isomorphism(&u, &a1, &a2, TOL)?;
    let (m, s, h) = isomorphism_residuals(&iso, &a1, &a2, 20, 9)?;
    Ok((
        id_worst == 0.0 && m <= TOL && s <= TOL && h <= TOL,
        format!("identity deviation {id_worst:.1e}; conjugated fiber: mult {m:.2e} star {s:.2e} haar {h:.2e}"),
    ))
}

fn family_suite() -> Outcome {
    let cat = RepCat::shared(0.5)?;
    let tol = cat.tolerance();
    let wz = check_family(&SubspaceFamily::weight_zero(), &cat, 5)?.max_residual();
    let closure = closure_report(&SubspaceFamily::weight_zero(), &cat, 3)?.max_residual();
    let k2 = check_family(&corrupted_family(2, 2, tol)?, &cat, 5)?.max_residual();
    let k4 = check_family(&corrupted_family(4, 5, tol)?, &cat, 5)?.max_residual();
    Ok((
        wz <= TOL && closure <= TOL && k2 >= 1e-2 && k4 >= 1e-2,
        format!("weight-zero {wz:.2e}, bracket closure {closure:.2e}, faults K_2 {k2:.3}, K_4 {k4:.3}"),
    ))
}

fn characters() -> Outcome {
    let cat = RepCat::shared(1.0)?;
    let f = make_weight_zero(cat.clone());
    let ir = IrrepFunctor::from_functor(&f, 4)?;
    let alg = build_algebra(&cat, &ir, 2)?;
    let eta = inclusion_transformation(&f, &ir, 4)?;
    let chi = character_from_transformation(&eta);
    let emb = character_to_transformation(&chi, &alg, TOL)?;
    Ok((
        emb.isometry_residual <= TOL && emb.naturality_residual <= TOL,
        format!(
            "isometry {:.2e}, naturality {:.2e}",
            emb.isometry_residual, emb.naturality_residual
        ),
    ))
}

fn report(n: usize, label: &str, out: Outcome, start: Instant, failures: &mut usize) {
    let secs = start.elapsed().as_secs_f64();
    match out {
        Ok((true, d)) => println!("PASS [{n:2}] {label}: {d} ({secs:.1} s)"),
        Ok((false, d)) => {
            *failures += 1;
            println!("FAIL [{n:2}] {label}: {d} ({secs:.1} s)");
        }
        Err(e) => {
            *failures += 1;
            println!("FAIL [{n:2}] {label}: error {e} ({secs:.1} s)");
        }
    }
}

fn main() {
    let mut failures = 0;

    let t = Instant::now();
    report(1, "quasitensor axioms", axioms(), t, &mut failures);

    let t = Instant::now();
    let cases = bound_cases();
    let cases = match cases {
        Ok(c) => c,
        Err(e) => {
            for (n, label) in [(2, "conjugates and dimension bounds"), (3, "quantum multiplicity formulas"), (4, "equality case")] {
                report(n, label, Err(qcat::Error::Invalid(e.to_string())), t, &mut failures);
            }
            Vec::new()
        }
    };
    if !cases.is_empty() {
        report(2, "conjugates and dimension bounds", conjugates_and_bounds(&cases), t, &mut failures);
        let t = Instant::now();
        report(3, "quantum multiplicity formulas", qmult_formulas(&cases), t, &mut failures);
        let t = Instant::now();
        report(4, "equality case", equality_case(&cases), t, &mut failures);
    }

    let t = Instant::now();
    let built = algebra(0.5, "embedding", 3).and_then(|(_, e)| Ok((e, algebra(0.5, "weight-zero", 3)?.1)));
    let build_secs = t.elapsed().as_secs_f64();
    match built {
        Ok((emb, wz)) => {
            let algs = [("embedding", emb), ("weight-zero", wz)];
            report(5, "spectral algebra laws", algebra_laws(&algs, build_secs), t, &mut failures);
            let t = Instant::now();
            report(6, "multiplicity maps and independence", multiplicity_maps(&algs), t, &mut failures);
            let t = Instant::now();
            report(7, "weight-zero multiplicities", podles_pattern(), t, &mut failures);
            let t = Instant::now();
            report(8, "classical limit", classical_limit(&algs[1].1), t, &mut failures);
            let t = Instant::now();
            report(9, "induced isomorphisms", isomorphisms(&algs[1].1), t, &mut failures);
        }
        Err(e) => {
            for (n, label) in [
                (5, "spectral algebra laws"),
                (6, "multiplicity maps and independence"),
                (8, "classical limit"),
                (9, "induced isomorphisms"),
            ] {
                report(n, label, Err(qcat::Error::Invalid(e.to_string())), t, &mut failures);
            }
            let t = Instant::now();
            report(7, "weight-zero multiplicities", podles_pattern(), t, &mut failures);
        }
    }

    let t = Instant::now();
    report(10, "subspace families and bracket spaces", family_suite(), t, &mut failures);
    let t = Instant::now();
    report(11, "characters give natural isometries", characters(), t, &mut failures);

    println!("{} of 11 criteria passed", 11 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
