//! Sequential optimization loop: seed design, surrogate fits for the
//! objective and each constraint, acquisition maximization, evaluation
//! and trace accumulation.

use std::io::Write;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::acquisition::{efi, Incumbent};
use crate::gp::{self, FitConfig, GpModel};
use crate::testfuns::{self, BoxDomain, Evaluation, FunctionSpec, TestFunError};

/// Candidates per acquisition maximization step, per input dimension.
const CANDIDATES_PER_DIM: usize = 200;
/// Acquisition evaluations spent on the local polish.
const POLISH_EVALS: usize = 50;
/// Rescaled distance below which a proposal counts as a duplicate.
const DUPLICATE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error(transparent)]
    TestFun(#[from] TestFunError),
    #[error(transparent)]
    Gp(#[from] gp::GpError),
    #[error("all candidates duplicate existing design points")]
    ExhaustedCandidates,
    #[error("invalid budget: start must be >= 2 and end > start (got start={start}, end={end})")]
    BadBudget { start: usize, end: usize },
}

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub iter: usize,
    pub x: Vec<f64>,
    pub eval: Evaluation,
    pub feasible: bool,
    pub best_feasible: Option<f64>,
}

/// Full optimization history of one run.
#[derive(Debug, Clone)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub seed: u64,
    pub spec: &'static FunctionSpec,
    pub start: usize,
    pub end: usize,
    /// Iterations where a failed surrogate fit fell back to the
    /// previous iteration's models.
    pub fit_fallbacks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestFeasible {
    pub x_best: Vec<f64>,
    pub obj_best: f64,
    pub found: bool,
}

impl BestFeasible {
    fn not_found() -> Self {
        BestFeasible {
            x_best: vec![],
            obj_best: f64::NAN,
            found: false,
        }
    }
}

/// Fitted surrogates for one iteration: objective plus one model per
/// constraint.
pub struct Models {
    pub objective: GpModel,
    pub constraints: Vec<GpModel>,
}

impl Models {
    /// EFI score of a single candidate.
    fn acquisition(&self, x: &[f64], incumbent: Incumbent) -> f64 {
        let p = self.objective.predict(x).expect("dimension checked");
        let (mu_c, sigma_c): (Vec<f64>, Vec<f64>) = self
            .constraints
            .iter()
            .map(|m| {
                let pc = m.predict(x).expect("dimension checked");
                (pc.mu, pc.sigma)
            })
            .unzip();
        efi(p.mu, p.sigma, incumbent, &mu_c, &sigma_c)
    }
}

/// Latin hypercube design: one point per equal-width stratum in every
/// dimension, deterministic for a given seed.
pub fn lhs_design(n: usize, domain: &BoxDomain, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    lhs_with_rng(n, domain, &mut rng)
}

fn lhs_with_rng(n: usize, domain: &BoxDomain, rng: &mut ChaCha12Rng) -> Vec<Vec<f64>> {
    assert!(n >= 1);
    let d = domain.dim();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    for _ in 0..d {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        let col: Vec<f64> = strata
            .into_iter()
            .map(|s| (s as f64 + rng.random_range(0.0..1.0)) / n as f64)
            .collect();
        cols.push(col);
    }
    (0..n)
        .map(|i| {
            let u: Vec<f64> = (0..d).map(|j| cols[j][i]).collect();
            domain.unrescale(&u)
        })
        .collect()
}

fn rescaled_dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn is_duplicate(candidate: &[f64], existing_scaled: &[Vec<f64>], domain: &BoxDomain) -> bool {
    let c = domain.rescale(candidate);
    existing_scaled
        .iter()
        .any(|e| rescaled_dist2(&c, e).sqrt() < DUPLICATE_TOL)
}

/// Selects the next evaluation point: scores an LHS candidate set under
/// EFI, polishes the best candidate with a shrinking coordinate search,
/// and rejects near-duplicates of existing design points.
pub fn propose_next(
    existing: &[Vec<f64>],
    models: &Models,
    domain: &BoxDomain,
    incumbent: Incumbent,
    rng: &mut ChaCha12Rng,
) -> Result<Vec<f64>, OptimError> {
    let d = domain.dim();
    let n_cand = CANDIDATES_PER_DIM * d;
    let candidates = lhs_with_rng(n_cand, domain, rng);
    let existing_scaled: Vec<Vec<f64>> = existing.iter().map(|x| domain.rescale(x)).collect();

    let obj_pred = models.objective.predict_batch(&candidates)?;
    let con_pred: Vec<Vec<gp::PredictiveMoments>> = models
        .constraints
        .iter()
        .map(|m| m.predict_batch(&candidates))
        .collect::<Result<_, _>>()?;

    let mut scored: Vec<(usize, f64)> = (0..n_cand)
        .map(|i| {
            let (mu_c, sigma_c): (Vec<f64>, Vec<f64>) = con_pred
                .iter()
                .map(|p| (p[i].mu, p[i].sigma))
                .unzip();
            let a = efi(obj_pred[i].mu, obj_pred[i].sigma, incumbent, &mu_c, &sigma_c);
            (i, a)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));

    // Numerically dead acquisition surface: fall back to pure
    // exploration by predictive standard deviation.
    let all_zero = scored[0].1 <= 1e-300;
    if all_zero {
        scored.sort_by(|a, b| obj_pred[b.0].sigma.total_cmp(&obj_pred[a.0].sigma));
    }

    for &(idx, score) in &scored {
        let mut candidate = candidates[idx].clone();
        if !all_zero && score > 0.0 {
            candidate = polish(&candidate, models, domain, incumbent);
        }
        if !is_duplicate(&candidate, &existing_scaled, domain) {
            return Ok(candidate);
        }
        // Polished point collided; try the unpolished candidate too.
        if !is_duplicate(&candidates[idx], &existing_scaled, domain) {
            return Ok(candidates[idx].clone());
        }
    }
    Err(OptimError::ExhaustedCandidates)
}

/// Derivative-free coordinate search on the acquisition around `x0`,
/// with a shrinking step in rescaled units.
fn polish(x0: &[f64], models: &Models, domain: &BoxDomain, incumbent: Incumbent) -> Vec<f64> {
    let d = domain.dim();
    let mut u = domain.rescale(x0);
    let mut best = models.acquisition(x0, incumbent);
    let mut evals = 1usize;
    let mut step = 0.05f64;
    while evals < POLISH_EVALS && step > 1e-4 {
        let mut improved = false;
        for j in 0..d {
            for sign in [1.0f64, -1.0] {
                if evals >= POLISH_EVALS {
                    break;
                }
                let mut cand = u.clone();
                cand[j] = (cand[j] + sign * step).clamp(0.0, 1.0);
                if cand[j] == u[j] {
                    continue;
                }
                let x = domain.unrescale(&cand);
                let a = models.acquisition(&x, incumbent);
                evals += 1;
                if a > best {
                    best = a;
                    u = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    domain.unrescale(&u)
}

fn incumbent_of(rows: &[TraceRow]) -> Incumbent {
    let mut inc = Incumbent::none();
    for r in rows {
        if r.feasible && (!inc.feasible_exists || r.eval.obj < inc.f_min) {
            inc = Incumbent::feasible(r.eval.obj);
        }
    }
    inc
}

fn fit_models(
    rows: &[TraceRow],
    spec: &FunctionSpec,
    warm: Option<&Models>,
    full: bool,
    seed: u64,
) -> Result<Models, gp::GpError> {
    let n = rows.len();
    let d = spec.dim;
    let mut x = Array2::<f64>::zeros((n, d));
    for (i, r) in rows.iter().enumerate() {
        for j in 0..d {
            x[[i, j]] = r.x[j];
        }
    }
    let bounds = Some((
        spec.domain.lower().to_vec(),
        spec.domain.upper().to_vec(),
    ));
    let cfg_for = |k: usize, warm_theta: Option<Vec<f64>>| FitConfig {
        seed: seed.wrapping_add(k as u64),
        bounds: bounds.clone(),
        warm_start: warm_theta,
        n_starts: if full { 5 } else { 1 },
        max_evals_per_start: if full { 25 } else { 12 },
        ..FitConfig::default()
    };

    let y_obj = Array1::from_iter(rows.iter().map(|r| r.eval.obj));
    let objective = gp::fit(
        x.view(),
        y_obj.view(),
        &cfg_for(0, warm.map(|m| m.objective.theta().to_vec())),
    )?;

    let mut constraints = Vec::with_capacity(spec.n_constraints);
    for k in 0..spec.n_constraints {
        let y_c = Array1::from_iter(rows.iter().map(|r| r.eval.con[k]));
        let warm_theta = warm.map(|m| m.constraints[k].theta().to_vec());
        constraints.push(gp::fit(x.view(), y_c.view(), &cfg_for(k + 1, warm_theta))?);
    }
    Ok(Models {
        objective,
        constraints,
    })
}

fn push_row(rows: &mut Vec<TraceRow>, iter: usize, x: Vec<f64>, eval: Evaluation) {
    let feasible = eval.is_feasible();
    let prev_best = rows.last().and_then(|r| r.best_feasible);
    let best_feasible = match (prev_best, feasible) {
        (Some(b), true) => Some(b.min(eval.obj)),
        (Some(b), false) => Some(b),
        (None, true) => Some(eval.obj),
        (None, false) => None,
    };
    rows.push(TraceRow {
        iter,
        x,
        eval,
        feasible,
        best_feasible,
    });
}

/// Runs the sequential loop: an LHS design of size `start`, then
/// model-guided proposals until `end` total evaluations.
pub fn run(name: &str, start: usize, end: usize, seed: u64) -> Result<Trace, OptimError> {
    let spec = testfuns::lookup(name)?;
    if start < 2 || end <= start {
        return Err(OptimError::BadBudget { start, end });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let mut rows: Vec<TraceRow> = Vec::with_capacity(end);
    for x in lhs_with_rng(start, &spec.domain, &mut rng) {
        let eval = testfuns::evaluate(name, &x)?;
        let iter = rows.len();
        push_row(&mut rows, iter, x, eval);
    }

    let mut models: Option<Models> = None;
    let mut fit_fallbacks = Vec::new();
    while rows.len() < end {
        let n = rows.len();
        // Full multi-start hyperparameter search early and periodically;
        // warm-started single-start refinement in between.
        let full = n <= 30 || n % 25 == 0;
        match fit_models(rows.as_slice(), spec, models.as_ref(), full, seed ^ (n as u64) << 20) {
            Ok(m) => models = Some(m),
            Err(_) => fit_fallbacks.push(n),
        }
        let incumbent = incumbent_of(&rows);
        let x_next = match &models {
            Some(m) => {
                let existing: Vec<Vec<f64>> = rows.iter().map(|r| r.x.clone()).collect();
                propose_next(&existing, m, &spec.domain, incumbent, &mut rng)?
            }
            // No usable surrogate yet: fall back to a random in-domain
            // point so the run stays total.
            None => {
                let u: Vec<f64> = (0..spec.dim).map(|_| rng.random_range(0.0..1.0)).collect();
                spec.domain.unrescale(&u)
            }
        };
        let eval = testfuns::evaluate(name, &x_next)?;
        push_row(&mut rows, n, x_next, eval);
    }

    Ok(Trace {
        rows,
        seed,
        spec,
        start,
        end,
        fit_fallbacks,
    })
}

/// Minimum objective over feasible rows.
pub fn best_feasible(trace: &Trace) -> BestFeasible {
    let mut best = BestFeasible::not_found();
    for r in &trace.rows {
        if r.feasible && (!best.found || r.eval.obj < best.obj_best) {
            best = BestFeasible {
                x_best: r.x.clone(),
                obj_best: r.eval.obj,
                found: true,
            };
        }
    }
    best
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

impl Trace {
    /// CSV with header `iter,x1..xd,obj,con1..conm,feasible,best_feasible`;
    /// floats carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let d = self.spec.dim;
        let m = self.spec.n_constraints;
        let mut header = String::from("iter");
        for j in 1..=d {
            header.push_str(&format!(",x{j}"));
        }
        header.push_str(",obj");
        for k in 1..=m {
            header.push_str(&format!(",con{k}"));
        }
        header.push_str(",feasible,best_feasible");
        writeln!(w, "{header}")?;
        for r in &self.rows {
            let mut line = r.iter.to_string();
            for v in &r.x {
                line.push(',');
                line.push_str(&fmt17(*v));
            }
            line.push(',');
            line.push_str(&fmt17(r.eval.obj));
            for c in &r.eval.con {
                line.push(',');
                line.push_str(&fmt17(*c));
            }
            line.push(',');
            line.push_str(if r.feasible { "true" } else { "false" });
            line.push(',');
            match r.best_feasible {
                Some(b) => line.push_str(&fmt17(b)),
                None => line.push_str("NA"),
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}
