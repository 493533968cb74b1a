//! Fixed-structure controller synthesis.
//!
//! Each start draws a random parameter vector, drives the closed loop stable
//! by minimizing the spectral abscissa, then descends with a restarted
//! simplex search. Descent first runs on a relaxed objective (hard items
//! weighted by [`RELAX_WEIGHT`], no step), which lets the search pass through
//! slightly non-passive designs; a draw whose relaxed level is still above 1
//! after [`DRAW_EVALS`] evaluations is replaced by a fresh draw while budget
//! allows. The best draw then finishes on the true objective. Starts run in
//! parallel, each with its own generator derived from `(seed, start index)`.

pub mod objective;
pub mod published;
pub mod search;
pub mod structure;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loops::{close_loop, Controller, GeneralizedPlant};
use crate::specs::{evaluate, SpecItem, SpecReport};

pub use objective::{score, Objective, HARD_PENALTY, UNSTABLE_OFFSET};
pub use published::{
    default_gamma1, hinf3, hinf3_theta, recalibrated_gamma1, unweighted_plant, verify_published, Published,
    REFERENCE_ALPHA, WEIGHTED_GAMMA1,
};
pub use search::{minimize, Budget, SearchOutcome};
pub use structure::{decode, encode, random_theta, ControllerStructure, StructureKind};

/// Abscissa a start must reach before descent begins.
pub const STABILITY_TARGET: f64 = -1e-3;
/// Weight on hard-item excess while exploring.
pub const RELAX_WEIGHT: f64 = 10.0;
/// Relaxed-descent evaluations given to each draw before deciding to redraw.
pub const DRAW_EVALS: usize = 1000;
/// Evaluations kept back for the final descent on the true objective.
pub const FINAL_EVALS: usize = 1000;
/// Stabilization cap per draw (or a quarter of the start budget if larger).
pub const STABILIZE_EVALS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    pub starts: usize,
    /// Objective evaluations per start, stabilization included.
    pub budget: usize,
    pub seed: u64,
    /// Replaces the random draw of start 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start: Option<Vec<f64>>,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self { starts: 8, budget: 4000, seed: 0, warm_start: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StartSummary {
    pub index: usize,
    pub objective: f64,
    pub evaluations: usize,
    pub stabilized: bool,
    pub best_abscissa: f64,
    /// Random draws tried by this start.
    pub draws: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthesisResult {
    pub controller: Controller,
    pub structure: ControllerStructure,
    pub report: SpecReport,
    pub objective: f64,
    /// Objective values of the winning start's descent, in evaluation order.
    pub objective_history: Vec<f64>,
    /// Evaluations across all starts.
    pub evaluations: usize,
    pub seed: u64,
    pub starts: Vec<StartSummary>,
}

impl SynthesisResult {
    /// Best-so-far envelope of the history.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.objective_history
            .iter()
            .scan(f64::INFINITY, |b, v| {
                *b = b.min(*v);
                Some(*b)
            })
            .collect()
    }
}

/// Seed of start `index`, mixed so neighbouring starts are unrelated.
pub fn start_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Minimize the spectral abscissa from `theta0` until it drops below
/// [`STABILITY_TARGET`]. Returns the parameters and evaluations spent.
pub fn stabilize_phase(
    g: &GeneralizedPlant,
    kind: StructureKind,
    theta0: &[f64],
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, usize)> {
    let obj = Objective::new(g, kind, &[]);
    let a0 = obj.abscissa(theta0);
    if a0 < STABILITY_TARGET {
        return Ok((theta0.to_vec(), 1));
    }
    let out = minimize(
        |t: &[f64]| obj.abscissa(t),
        theta0,
        Budget { max_evals: budget, stop_below: Some(STABILITY_TARGET) },
        rng,
    );
    if out.f < STABILITY_TARGET {
        Ok((out.x, out.evaluations))
    } else {
        Err(Error::NoStabilizer { best_abscissa: out.f })
    }
}

struct StartOutcome {
    theta: Vec<f64>,
    value: f64,
    history: Vec<f64>,
    summary: StartSummary,
}

fn run_start(
    g: &GeneralizedPlant,
    kind: StructureKind,
    specs: &[SpecItem],
    opts: &SynthOptions,
    index: usize,
) -> StartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(start_seed(opts.seed, index));
    let warm = if index == 0 { opts.warm_start.clone() } else { None };
    let budget = opts.budget;
    let relaxed = Objective { relaxed: Some(RELAX_WEIGHT), ..Objective::new(g, kind, specs) };
    let obj = Objective::new(g, kind, specs);
    let mut used = 0;
    let mut best_abscissa = f64::INFINITY;
    // (stabilized start, relaxed result, relaxed level)
    let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    let mut draws = 0;
    loop {
        let is_warm = warm.is_some() && draws == 0;
        let theta0 = match &warm {
            Some(w) if draws == 0 => w.clone(),
            _ => random_theta(kind, &mut rng),
        };
        draws += 1;
        let cap = budget.saturating_sub(used).min(STABILIZE_EVALS.max(budget / 4));
        match stabilize_phase(g, kind, &theta0, cap, &mut rng) {
            Ok((theta, n)) => {
                used += n;
                let out = minimize(
                    |t: &[f64]| relaxed.value(t),
                    &theta,
                    Budget { max_evals: budget.saturating_sub(used).min(DRAW_EVALS).max(1), stop_below: None },
                    &mut rng,
                );
                used += out.evaluations;
                if best.as_ref().is_none_or(|b| out.f < b.2) {
                    best = Some((theta, out.x, out.f));
                }
            }
            Err(Error::NoStabilizer { best_abscissa: a }) => {
                used += cap;
                best_abscissa = best_abscissa.min(a);
            }
            Err(_) => used += cap,
        }
        let level = best.as_ref().map_or(f64::INFINITY, |b| b.2);
        if is_warm || level <= 1.0 || budget.saturating_sub(used) < DRAW_EVALS + FINAL_EVALS {
            break;
        }
    }
    let Some((stabilized, relaxed_x, _)) = best else {
        return StartOutcome {
            theta: Vec::new(),
            value: f64::INFINITY,
            history: Vec::new(),
            summary: StartSummary {
                index,
                objective: f64::INFINITY,
                evaluations: used,
                stabilized: false,
                best_abscissa,
                draws,
            },
        };
    };
    // continue the best draw: relaxed first, then the true objective from
    // whichever of the two candidates scores lower on it
    let more = budget.saturating_sub(used) / 2;
    let relaxed_x = if more > 0 {
        let out = minimize(
            |t: &[f64]| relaxed.value(t),
            &relaxed_x,
            Budget { max_evals: more, stop_below: None },
            &mut rng,
        );
        used += out.evaluations;
        out.x
    } else {
        relaxed_x
    };
    let mut history = Vec::new();
    let mut start = (f64::INFINITY, relaxed_x.clone());
    for cand in [stabilized, relaxed_x] {
        let v = obj.value(&cand);
        used += 1;
        history.push(v);
        if v < start.0 {
            start = (v, cand);
        }
    }
    let out = minimize(
        |t: &[f64]| obj.value(t),
        &start.1,
        Budget { max_evals: budget.saturating_sub(used).max(1), stop_below: None },
        &mut rng,
    );
    used += out.evaluations;
    history.extend(out.history);
    let best_abscissa = obj.abscissa(&out.x);
    StartOutcome {
        theta: out.x,
        value: out.f,
        history,
        summary: StartSummary {
            index,
            objective: out.f,
            evaluations: used,
            stabilized: true,
            best_abscissa,
            draws,
        },
    }
}

/// Multi-start synthesis over `kind` for the bound set `specs`.
pub fn synthesize(
    g: &GeneralizedPlant,
    kind: StructureKind,
    specs: &[SpecItem],
    opts: &SynthOptions,
) -> Result<SynthesisResult> {
    if opts.starts == 0 {
        return Err(Error::validation("starts", "must be at least 1"));
    }
    if opts.budget == 0 {
        return Err(Error::validation("budget", "must be at least 1"));
    }
    if let Some(w) = &opts.warm_start {
        if w.len() != kind.len() {
            return Err(Error::Shape { expected: kind.len(), got: w.len() });
        }
    }
    let outcomes: Vec<StartOutcome> = (0..opts.starts)
        .into_par_iter()
        .map(|i| run_start(g, kind, specs, opts, i))
        .collect();
    let evaluations = outcomes.iter().map(|o| o.summary.evaluations).sum();
    let summaries: Vec<StartSummary> = outcomes.iter().map(|o| o.summary.clone()).collect();
    // first strict minimum wins, so ties go to the lowest start index
    let best = outcomes
        .into_iter()
        .filter(|o| o.summary.stabilized)
        .reduce(|a, b| if b.value < a.value { b } else { a });
    let Some(best) = best else {
        let best_abscissa = summaries.iter().map(|s| s.best_abscissa).fold(f64::INFINITY, f64::min);
        return Err(Error::NoStabilizer { best_abscissa });
    };
    let structure = ControllerStructure::new(kind, best.theta)?;
    let controller = structure.decode()?;
    let report = evaluate(&close_loop(g, &controller)?, specs)?;
    Ok(SynthesisResult {
        controller,
        structure,
        objective: best.value,
        report,
        objective_history: best.history,
        evaluations,
        seed: opts.seed,
        starts: summaries,
    })
}
