use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use qcat::qfunctor::{
    check_axioms, check_irrep_axioms, dimension_bounds, equality_case_probe, make_embedding, make_fiber,
    make_weight_zero, AxiomReport, IrrepFunctor, QuasitensorFunctor,
};
use qcat::repcat::RepCat;
use qcat::spectral::{algebra_report, build_algebra, structure_table, SpectralAlgebra};
use qcat::subgroup::{check_family, closure_report, SubspaceFamily};
use qcat::tlcat::{DualityDatum, LoopParameter};
use serde_json::{json, Value};

use crate::config::{Check, FunctorKind, RunConfig};
use crate::report::{CheckResult, DimensionRow, Report, Status, StructureStats, REPORT_SCHEMA};

/// Slack for the dimension chain and the two quantum multiplicity formulas.
const BOUND_TOL: f64 = 1e-6;

pub struct Setup {
    pub cat: Arc<RepCat>,
    pub word: Option<Box<dyn QuasitensorFunctor>>,
    pub family: Option<SubspaceFamily>,
    pub irrep: IrrepFunctor,
}

/// Construct the functor; failures here are configuration errors.
pub fn setup(cfg: &RunConfig) -> Result<Setup, String> {
    let cat = RepCat::shared(cfg.mu).map_err(|e| e.to_string())?;
    let max_label = 2 * cfg.max_spin;
    let (word, family): (Option<Box<dyn QuasitensorFunctor>>, _) = match cfg.functor {
        FunctorKind::Embedding => (Some(Box::new(make_embedding(cat.clone()))), Some(SubspaceFamily::full())),
        FunctorKind::WeightZero => (
            Some(Box::new(make_weight_zero(cat.clone()))),
            Some(SubspaceFamily::weight_zero()),
        ),
        FunctorKind::Fiber => {
            let lp = LoopParameter::new(cfg.mu).map_err(|e| e.to_string())?;
            let d = DualityDatum::from_pairs(lp, &cfg.fiber_pairs).map_err(|e| e.to_string())?;
            (Some(Box::new(make_fiber(cat.clone(), d).map_err(|e| e.to_string())?)), None)
        }
        FunctorKind::UserFile => (None, None),
    };
    let irrep = match &word {
        Some(f) => IrrepFunctor::from_functor(f.as_ref(), max_label).map_err(|e| e.to_string())?,
        None => {
            let path = cfg.functor_file.as_ref().expect("validated");
            let ir = IrrepFunctor::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
            if (ir.mu - cfg.mu).abs() > 1e-12 {
                return Err(format!("functor file has mu = {} but --mu is {}", ir.mu, cfg.mu));
            }
            ir
        }
    };
    Ok(Setup {
        cat,
        word,
        family,
        irrep,
    })
}

fn residual_details(rep: &AxiomReport) -> BTreeMap<String, Value> {
    rep.residuals.iter().map(|(k, v)| (k.clone(), json!(v))).collect()
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

struct Outcome {
    status: Status,
    max_residual: Option<f64>,
    details: BTreeMap<String, Value>,
    message: Option<String>,
}

impl Outcome {
    fn skipped(msg: &str) -> Self {
        Outcome {
            status: Status::Skipped,
            max_residual: None,
            details: BTreeMap::new(),
            message: Some(msg.into()),
        }
    }

    fn error(msg: String) -> Self {
        Outcome {
            status: Status::Error,
            max_residual: None,
            details: BTreeMap::new(),
            message: Some(msg),
        }
    }
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    s: &'a Setup,
    alg: Option<Result<SpectralAlgebra, String>>,
    rows: Vec<DimensionRow>,
    structure: Option<StructureStats>,
}

impl<'a> Runner<'a> {
    fn algebra(&mut self) -> Result<&SpectralAlgebra, String> {
        if self.alg.is_none() {
            let built = build_algebra(&self.s.cat, &self.s.irrep, self.cfg.max_spin).map_err(|e| e.to_string());
            self.alg = Some(built);
        }
        self.alg.as_ref().unwrap().as_ref().map_err(|e| e.clone())
    }

    fn axioms(&mut self) -> qcat::Result<Outcome> {
        let mut rep = check_irrep_axioms(&self.s.cat, &self.s.irrep)?;
        if let Some(f) = &self.s.word {
            rep.merge(&check_axioms(f.as_ref(), self.cfg.max_word)?);
        }
        let m = rep.max_residual();
        Ok(Outcome {
            status: status(rep.passes(self.cfg.tol)),
            max_residual: Some(m),
            details: residual_details(&rep),
            message: None,
        })
    }

    fn bounds(&mut self) -> qcat::Result<Outcome> {
        let (cat, ir) = (&self.s.cat, &self.s.irrep);
        let mut conj: f64 = 0.0;
        let mut formula: f64 = 0.0;
        let mut chain: f64 = 0.0;
        for n in 0..=ir.max_label {
            if ir.dims[n] == 0 {
                self.rows.push(DimensionRow {
                    grade: n,
                    mult: 0,
                    qmult: Some(0.0),
                    qmult_trace: Some(0.0),
                    qdim: cat.qdim(n),
                    equality: None,
                });
                continue;
            }
            let b = dimension_bounds(cat, ir, n)?;
            conj = conj.max(b.conjugate_residual);
            formula = formula.max((b.qmult - b.qmult_trace).abs());
            chain = chain.max(b.mult as f64 - b.qmult).max(b.qmult - b.qdim);
            self.rows.push(DimensionRow {
                grade: n,
                mult: b.mult,
                qmult: Some(b.qmult),
                qmult_trace: Some(b.qmult_trace),
                qdim: b.qdim,
                equality: Some(equality_case_probe(cat, ir, n)?),
            });
        }
        let chain = chain.max(0.0);
        let mut details = BTreeMap::new();
        details.insert("conjugate equations".into(), json!(conj));
        details.insert("qmult formulas".into(), json!(formula));
        details.insert("dimension chain".into(), json!(chain));
        Ok(Outcome {
            status: status(conj <= self.cfg.tol && formula <= BOUND_TOL && chain <= BOUND_TOL),
            max_residual: Some(conj.max(formula).max(chain)),
            details,
            message: None,
        })
    }

    fn algebra_check(&mut self) -> qcat::Result<Outcome> {
        let (tol, seed) = (self.cfg.tol, self.cfg.seed);
        let alg = match self.algebra() {
            Ok(a) => a,
            Err(e) => return Ok(Outcome::error(e)),
        };
        let rep = algebra_report(alg, seed)?;
        let table = structure_table(alg)?;
        let stats = StructureStats {
            entries: table.entries.len(),
            max_abs: table.entries.iter().map(|e| e.re.hypot(e.im)).fold(0.0, f64::max),
            dims: table.dims.clone(),
        };
        let value = serde_json::to_value(&rep).map_err(qcat::Error::from)?;
        let details: BTreeMap<String, Value> = value
            .as_object()
            .map(|o| o.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
            .unwrap_or_default();
        let m = [
            rep.unit,
            rep.associativity,
            rep.star_involution,
            rep.star_antimultiplicative,
            rep.closed_form,
            rep.coisometry,
            rep.grading,
        ]
        .into_iter()
        .fold(0.0, f64::max);
        self.structure = Some(stats);
        Ok(Outcome {
            status: status(rep.passes(tol)),
            max_residual: Some(m),
            details,
            message: None,
        })
    }

    fn subgroup(&mut self) -> qcat::Result<Outcome> {
        let Some(k) = &self.s.family else {
            return Ok(Outcome::skipped("the functor is not given by a subspace family"));
        };
        let mut rep = check_family(k, &self.s.cat, self.cfg.max_word)?;
        let closure = closure_report(k, &self.s.cat, self.cfg.max_word.min(3))?;
        for (key, v) in [
            ("bracket contains hom", closure.contains_hom),
            ("bracket composition", closure.composition),
            ("bracket adjoint", closure.adjoint),
            ("bracket tensor", closure.tensor),
        ] {
            rep.residuals.insert(key.into(), v);
        }
        Ok(Outcome {
            status: status(rep.passes(self.cfg.tol)),
            max_residual: Some(rep.max_residual()),
            details: residual_details(&rep),
            message: None,
        })
    }

    fn commutativity(&mut self) -> qcat::Result<Outcome> {
        let tol = self.cfg.tol;
        let alg = match self.algebra() {
            Ok(a) => a,
            Err(e) => return Ok(Outcome::error(e)),
        };
        let r = alg.commutativity_probe()?;
        let mut details = BTreeMap::new();
        details.insert("commutator".into(), json!(r));
        Ok(Outcome {
            status: status(r <= tol),
            max_residual: Some(r),
            details,
            message: None,
        })
    }
}

pub fn run(cfg: &RunConfig, s: &Setup) -> Report {
    let mut runner = Runner {
        cfg,
        s,
        alg: None,
        rows: Vec::new(),
        structure: None,
    };
    let mut checks = Vec::new();
    for &c in &cfg.checks {
        let start = Instant::now();
        let out = match c {
            Check::Axioms => runner.axioms(),
            Check::Bounds => runner.bounds(),
            Check::Algebra => runner.algebra_check(),
            Check::Subgroup => runner.subgroup(),
            Check::Commutativity => runner.commutativity(),
        }
        .unwrap_or_else(|e| Outcome::error(e.to_string()));
        let status = match out.max_residual {
            Some(r) if r.is_nan() => Status::Fail,
            _ => out.status,
        };
        checks.push(CheckResult {
            name: c.name().into(),
            status,
            max_residual: out.max_residual,
            wall_time_s: start.elapsed().as_secs_f64(),
            details: out.details,
            message: out.message,
        });
    }
    Report {
        schema_version: REPORT_SCHEMA,
        config: cfg.clone(),
        functor: s.irrep.name.clone(),
        checks,
        dimensions: runner.rows,
        structure: runner.structure,
    }
}
