//! Hooke-Jeeves pattern search with an exterior penalty, plus the motor
//! objective, multi-start driver and a brute-force grid used to check it.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::{evaluate_constraints, ConstraintReport, ConstraintSpec};
use crate::error::{EvimError, Result};
use crate::performance::{MotorModel, PerformanceReport};
use crate::spec::{DesignVector, SlotShape, VariableBounds, NUM_VARIABLES, VARIABLE_NAMES};

/// Objective of a design the pipeline rejected. The failing stage ordinal is
/// added on top so rejected designs still compare deterministically.
pub const INFEASIBLE_OBJECTIVE: f64 = 1.0e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HJConfig {
    /// Initial step as a fraction of each variable's range.
    pub initial_step_fraction: f64,
    pub step_reduction: f64,
    /// Search stops once the step fraction falls below this.
    pub min_step_fraction: f64,
    pub max_evaluations: usize,
    pub pattern_acceleration: f64,
    pub penalty_mu: f64,
    /// Times the penalty weight may be doubled when the search converges to
    /// an infeasible point.
    pub max_penalty_doublings: u32,
    pub start_fractions: Vec<f64>,
}

impl Default for HJConfig {
    fn default() -> Self {
        HJConfig {
            initial_step_fraction: 0.1,
            step_reduction: 0.5,
            min_step_fraction: 1e-4,
            max_evaluations: 20_000,
            pattern_acceleration: 1.0,
            penalty_mu: crate::constraints::DEFAULT_PENALTY_MU,
            max_penalty_doublings: 6,
            start_fractions: vec![0.3, 0.4, 0.5, 0.6, 0.7],
        }
    }
}

impl HJConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_step_fraction > 0.0
            && self.initial_step_fraction <= 1.0
            && self.step_reduction > 0.0
            && self.step_reduction < 1.0
            && self.min_step_fraction > 0.0
            && self.min_step_fraction <= self.initial_step_fraction
            && self.max_evaluations > 0
            && self.pattern_acceleration >= 0.0
            && self.penalty_mu > 0.0
            && !self.start_fractions.is_empty()
            && self.start_fractions.iter().all(|f| (0.0..=1.0).contains(f));
        if ok {
            Ok(())
        } else {
            Err(EvimError::Invalid(
                "optimizer configuration out of range".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Start,
    Exploratory,
    Pattern,
    StepReduction,
}

impl MoveKind {
    pub fn label(self) -> &'static str {
        match self {
            MoveKind::Start => "start",
            MoveKind::Exploratory => "exploratory",
            MoveKind::Pattern => "pattern",
            MoveKind::StepReduction => "step_reduction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub x: Vec<f64>,
    pub objective: f64,
    pub step_fraction: f64,
    pub move_kind: MoveKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StepTolerance,
    EvaluationBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HJResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub evaluations: usize,
    pub termination: Termination,
    pub trace: Vec<TraceEntry>,
}

struct Budget<F> {
    f: F,
    used: usize,
    max: usize,
}

impl<F: FnMut(&[f64]) -> f64> Budget<F> {
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.used >= self.max {
            return None;
        }
        self.used += 1;
        let v = (self.f)(x);
        Some(if v.is_nan() { f64::INFINITY } else { v })
    }
}

fn clamp_to(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// One sweep over the coordinates in index order: try `+step`, then `-step`,
/// keep the first strict improvement. Returns `None` when the budget ran out.
fn exploratory_search<F: FnMut(&[f64]) -> f64>(
    budget: &mut Budget<F>,
    base: &[f64],
    f_base: f64,
    step: &[f64],
    bounds: &[(f64, f64)],
) -> Option<(Vec<f64>, f64)> {
    let mut x = base.to_vec();
    let mut fx = f_base;
    for i in 0..x.len() {
        let original = x[i];
        let mut improved = false;
        for dir in [1.0, -1.0] {
            let trial = (original + dir * step[i]).clamp(bounds[i].0, bounds[i].1);
            if trial == original {
                continue;
            }
            x[i] = trial;
            let ft = budget.eval(&x)?;
            if ft < fx {
                fx = ft;
                improved = true;
                break;
            }
        }
        if !improved {
            x[i] = original;
        }
    }
    Some((x, fx))
}

/// Minimize `f` over the box `bounds` from `x0`.
///
/// The trace holds every accepted point; its objective column never increases.
pub fn hooke_jeeves<F: FnMut(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    config: &HJConfig,
) -> Result<HJResult> {
    config.validate()?;
    if x0.len() != bounds.len() || bounds.iter().any(|&(lo, hi)| !(lo < hi)) {
        return Err(EvimError::Invalid(
            "bounds must match x0 and have lo < hi".into(),
        ));
    }
    let ranges: Vec<f64> = bounds.iter().map(|&(lo, hi)| hi - lo).collect();
    let mut budget = Budget {
        f,
        used: 0,
        max: config.max_evaluations,
    };
    let mut trace = Vec::new();
    let mut base = x0.to_vec();
    clamp_to(&mut base, bounds);
    let mut f_base = budget.eval(&base).expect("budget is positive");
    let mut fraction = config.initial_step_fraction;
    let mut iteration = 0;
    let record = |trace: &mut Vec<TraceEntry>, it, x: &[f64], obj, frac, kind| {
        trace.push(TraceEntry {
            iteration: it,
            x: x.to_vec(),
            objective: obj,
            step_fraction: frac,
            move_kind: kind,
        })
    };
    record(&mut trace, 0, &base, f_base, fraction, MoveKind::Start);

    let termination = 'search: loop {
        iteration += 1;
        let step: Vec<f64> = ranges.iter().map(|r| r * fraction).collect();
        let Some((mut x_new, mut f_new)) =
            exploratory_search(&mut budget, &base, f_base, &step, bounds)
        else {
            break Termination::EvaluationBudget;
        };
        if f_new < f_base {
            record(
                &mut trace,
                iteration,
                &x_new,
                f_new,
                fraction,
                MoveKind::Exploratory,
            );
            loop {
                let mut pattern: Vec<f64> = x_new
                    .iter()
                    .zip(&base)
                    .map(|(n, b)| n + config.pattern_acceleration * (n - b))
                    .collect();
                clamp_to(&mut pattern, bounds);
                base = x_new;
                f_base = f_new;
                let Some(f_pattern) = budget.eval(&pattern) else {
                    break 'search Termination::EvaluationBudget;
                };
                let Some((x_e, f_e)) =
                    exploratory_search(&mut budget, &pattern, f_pattern, &step, bounds)
                else {
                    break 'search Termination::EvaluationBudget;
                };
                // Landing back on the base (up to rounding) is not progress.
                let moved = x_e
                    .iter()
                    .zip(&base)
                    .zip(&step)
                    .any(|((a, b), h)| (a - b).abs() > 0.5 * h);
                if f_e < f_base && moved {
                    x_new = x_e;
                    f_new = f_e;
                    record(
                        &mut trace,
                        iteration,
                        &x_new,
                        f_new,
                        fraction,
                        MoveKind::Pattern,
                    );
                } else {
                    break;
                }
            }
        } else {
            fraction *= config.step_reduction;
            if fraction < config.min_step_fraction {
                break Termination::StepTolerance;
            }
            record(
                &mut trace,
                iteration,
                &base,
                f_base,
                fraction,
                MoveKind::StepReduction,
            );
        }
    };

    Ok(HJResult {
        x: base,
        objective: f_base,
        evaluations: budget.used,
        termination,
        trace,
    })
}

/// Exhaustive search on a `resolution`-point grid per coordinate (at most
/// three coordinates). Ties go to the lexicographically first grid point.
pub fn grid_oracle<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    bounds: &[(f64, f64)],
    resolution: usize,
) -> Result<(Vec<f64>, f64)> {
    if bounds.is_empty() || bounds.len() > 3 {
        return Err(EvimError::Invalid(
            "grid oracle handles 1 to 3 variables".into(),
        ));
    }
    if resolution < 5 {
        return Err(EvimError::Invalid(
            "grid resolution must be at least 5".into(),
        ));
    }
    let axis = |&(lo, hi): &(f64, f64)| -> Vec<f64> {
        (0..resolution)
            .map(|k| lo + (hi - lo) * k as f64 / (resolution - 1) as f64)
            .collect()
    };
    let axes: Vec<Vec<f64>> = bounds.iter().map(axis).collect();
    let total = resolution.pow(bounds.len() as u32);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut x = vec![0.0; bounds.len()];
    for flat in 0..total {
        // First coordinate varies slowest: lexicographic order.
        let mut rem = flat;
        for d in (0..bounds.len()).rev() {
            x[d] = axes[d][rem % resolution];
            rem /= resolution;
        }
        let v = f(&x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((x.clone(), v));
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// Evaluated design together with its constraint check.
#[derive(Debug, Clone)]
pub enum Assessment {
    Evaluated {
        report: Box<PerformanceReport>,
        constraints: ConstraintReport,
    },
    Rejected(crate::performance::InfeasibleDesign),
}

/// The motor design problem restricted to a subset of the variables; the
/// others stay at `base`.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    pub model: MotorModel,
    pub constraints: Vec<ConstraintSpec>,
    pub bounds: VariableBounds,
    pub base: DesignVector,
    pub active: Vec<usize>,
}

impl DesignProblem {
    /// All variables active, except the rotor slot depth when it is tied to
    /// the width by round rotor slots.
    pub fn full(
        model: MotorModel,
        constraints: Vec<ConstraintSpec>,
        bounds: VariableBounds,
    ) -> Self {
        let tied = model.spec.rotor_slot_shape == SlotShape::Round;
        let active = (0..NUM_VARIABLES)
            .filter(|&i| !(tied && VARIABLE_NAMES[i] == "rotor_slot_depth"))
            .collect();
        let base = bounds.at_fraction(0.5);
        DesignProblem {
            model,
            constraints,
            bounds,
            base,
            active,
        }
    }

    pub fn active_bounds(&self) -> Vec<(f64, f64)> {
        let pairs = self.bounds.pairs();
        self.active.iter().map(|&i| pairs[i]).collect()
    }

    pub fn design(&self, reduced: &[f64]) -> DesignVector {
        let mut full = self.base.to_array();
        for (&i, &v) in self.active.iter().zip(reduced) {
            full[i] = v;
        }
        DesignVector::from_slice(&full).tied_to(self.model.spec.rotor_slot_shape)
    }

    pub fn reduce(&self, x: &DesignVector) -> Vec<f64> {
        let full = x.to_array();
        self.active.iter().map(|&i| full[i]).collect()
    }

    pub fn assess(&self, x: &DesignVector) -> Result<Assessment> {
        Ok(match self.model.evaluate(x) {
            Ok(report) => {
                let constraints = evaluate_constraints(&report, &self.constraints)?;
                Assessment::Evaluated {
                    report: Box::new(report),
                    constraints,
                }
            }
            Err(e) => Assessment::Rejected(e),
        })
    }

    /// Penalized objective `-efficiency + mu * sum(w * v^2)`.
    pub fn objective(&self, reduced: &[f64], mu: f64) -> f64 {
        self.objective_parts(reduced, mu).0
    }

    /// Objective plus, for feasible designs, the efficiency reached.
    fn objective_parts(&self, reduced: &[f64], mu: f64) -> (f64, Option<f64>) {
        match self.assess(&self.design(reduced)) {
            Ok(Assessment::Evaluated {
                report,
                constraints,
            }) => {
                let obj = -report.efficiency + mu * constraints.penalty;
                (obj, constraints.feasible.then_some(report.efficiency))
            }
            Ok(Assessment::Rejected(inf)) => {
                (INFEASIBLE_OBJECTIVE + inf.stage.ordinal() as f64, None)
            }
            // Unknown constraint field: configuration error, never optimal.
            Err(_) => (f64::INFINITY, None),
        }
    }
}

/// Search statistics and outcome of one start point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start_fraction: f64,
    pub design: DesignVector,
    pub efficiency: Option<f64>,
    pub feasible: bool,
    pub objective: f64,
    pub evaluations: usize,
    pub penalty_mu: f64,
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best: StartOutcome,
    pub starts: Vec<StartOutcome>,
}

impl OptimizationResult {
    pub fn total_evaluations(&self) -> usize {
        self.starts.iter().map(|s| s.evaluations).sum()
    }
}

/// Pattern search from one start, doubling the penalty weight while the
/// converged point is infeasible. If the final incumbent is still infeasible
/// the best feasible design met along the way is returned instead.
pub fn optimize_from(
    problem: &DesignProblem,
    x0: &[f64],
    config: &HJConfig,
) -> Result<StartOutcome> {
    let bounds = problem.active_bounds();
    let mut mu = config.penalty_mu;
    let mut x = x0.to_vec();
    let mut evaluations = 0;
    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut best_feasible: Option<(f64, Vec<f64>)> = None;
    let mut doublings = 0;
    loop {
        let mut local_best: Option<(f64, Vec<f64>)> = None;
        let result = hooke_jeeves(
            |r: &[f64]| {
                let (obj, eta) = problem.objective_parts(r, mu);
                if let Some(eta) = eta {
                    if local_best.as_ref().is_none_or(|(b, _)| eta > *b) {
                        local_best = Some((eta, r.to_vec()));
                    }
                }
                obj
            },
            &x,
            &bounds,
            &HJConfig {
                max_evaluations: config.max_evaluations.saturating_sub(evaluations).max(1),
                ..config.clone()
            },
        )?;
        evaluations += result.evaluations;
        if let Some((eta, r)) = local_best {
            if best_feasible.as_ref().is_none_or(|(b, _)| eta > *b) {
                best_feasible = Some((eta, r));
            }
        }
        let offset = trace.last().map_or(0, |t| t.iteration + 1);
        trace.extend(result.trace.into_iter().map(|mut t| {
            t.iteration += offset;
            t
        }));
        x = result.x;
        let design = problem.design(&x);
        let feasible = matches!(
            problem.assess(&design)?,
            Assessment::Evaluated { ref constraints, .. } if constraints.feasible
        );
        let exhausted = evaluations >= config.max_evaluations;
        if feasible || exhausted || doublings >= config.max_penalty_doublings {
            let (design, feasible, objective, efficiency) = if feasible {
                (design, true, result.objective, Some(-result.objective))
            } else if let Some((eta, r)) = &best_feasible {
                (problem.design(r), true, -eta, Some(*eta))
            } else {
                (design, false, result.objective, None)
            };
            return Ok(StartOutcome {
                start_fraction: f64::NAN,
                design,
                efficiency,
                feasible,
                objective,
                evaluations,
                penalty_mu: mu,
                trace,
            });
        }
        mu *= 2.0;
        doublings += 1;
    }
}

/// Multi-start search. Starts run in parallel on the current rayon pool; the
/// winner is the feasible start with the lowest objective, ties broken by
/// start order, so the result does not depend on scheduling.
pub fn optimize(problem: &DesignProblem, config: &HJConfig) -> Result<OptimizationResult> {
    config.validate()?;
    let starts: Vec<StartOutcome> = config
        .start_fractions
        .par_iter()
        .map(|&fraction| {
            let x0 = problem.reduce(&problem.bounds.at_fraction(fraction));
            optimize_from(problem, &x0, config).map(|mut s| {
                s.start_fraction = fraction;
                s
            })
        })
        .collect::<Result<_>>()?;
    let best = starts
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            b.feasible
                .cmp(&a.feasible)
                .then(a.objective.total_cmp(&b.objective))
                .then(i.cmp(j))
        })
        .map(|(_, s)| s.clone())
        .expect("at least one start");
    Ok(OptimizationResult { best, starts })
}

/// Trace as CSV: one row per accepted point, design variables by name.
pub fn write_trace<W: Write>(
    out: W,
    result: &OptimizationResult,
    problem: &DesignProblem,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "start".to_string(),
        "iteration".into(),
        "move".into(),
        "step_fraction".into(),
        "objective".into(),
    ];
    header.extend(VARIABLE_NAMES.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for (k, s) in result.starts.iter().enumerate() {
        for t in &s.trace {
            let design = problem.design(&t.x).to_array();
            let mut row = vec![
                k.to_string(),
                t.iteration.to_string(),
                t.move_kind.label().to_string(),
                format!("{:e}", t.step_fraction),
                format!("{:.12e}", t.objective),
            ];
            row.extend(design.iter().map(|v| format!("{v:.9e}")));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| (v - 0.3).powi(2)).sum()
    }

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn sphere_converges() {
        let r = hooke_jeeves(sphere, &[0.9; 5], &[(0.0, 1.0); 5], &HJConfig::default()).unwrap();
        assert!(r.objective < 1e-6, "{}", r.objective);
        assert_eq!(r.termination, Termination::StepTolerance);
    }

    #[test]
    fn rosenbrock_converges() {
        let r = hooke_jeeves(
            rosenbrock,
            &[-1.2, 1.0],
            &[(-2.0, 2.0); 2],
            &HJConfig::default(),
        )
        .unwrap();
        assert!(
            r.objective < 1e-4,
            "{} after {}",
            r.objective,
            r.evaluations
        );
        assert!(r.evaluations <= 20_000);
    }

    #[test]
    fn trace_is_monotone_and_starts_at_x0() {
        let r = hooke_jeeves(sphere, &[0.9; 5], &[(0.0, 1.0); 5], &HJConfig::default()).unwrap();
        assert_eq!(r.trace[0].move_kind, MoveKind::Start);
        assert_eq!(r.trace[0].x, vec![0.9; 5]);
        for w in r.trace.windows(2) {
            assert!(w[1].objective <= w[0].objective);
        }
    }

    #[test]
    fn budget_is_respected() {
        let cfg = HJConfig {
            max_evaluations: 37,
            ..HJConfig::default()
        };
        let mut calls = 0;
        let r = hooke_jeeves(
            |x: &[f64]| {
                calls += 1;
                rosenbrock(x)
            },
            &[-1.2, 1.0],
            &[(-2.0, 2.0); 2],
            &cfg,
        )
        .unwrap();
        assert_eq!(r.termination, Termination::EvaluationBudget);
        assert_eq!(r.evaluations, 37);
        assert_eq!(calls, 37);
    }

    #[test]
    fn exploratory_takes_plus_before_minus() {
        // Symmetric objective: both directions improve equally; +step wins.
        let mut budget = Budget {
            f: |x: &[f64]| -(x[0] - 0.5).abs(),
            used: 0,
            max: 100,
        };
        let (x, _) = exploratory_search(&mut budget, &[0.5], -0.0, &[0.1], &[(0.0, 1.0)]).unwrap();
        assert!((x[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn stays_inside_bounds() {
        // Unconstrained minimum lies outside the box.
        let r = hooke_jeeves(
            |x: &[f64]| (x[0] + 3.0).powi(2) + (x[1] - 5.0).powi(2),
            &[0.5, 0.5],
            &[(0.0, 1.0); 2],
            &HJConfig::default(),
        )
        .unwrap();
        assert!(r.x[0].abs() < 1e-12 && (r.x[1] - 1.0).abs() < 1e-12);
        for t in &r.trace {
            assert!(t.x.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn nan_objective_never_accepted() {
        let r = hooke_jeeves(
            |x: &[f64]| {
                if x[0] > 0.55 {
                    f64::NAN
                } else {
                    (x[0] - 1.0).powi(2)
                }
            },
            &[0.5],
            &[(0.0, 1.0)],
            &HJConfig::default(),
        )
        .unwrap();
        assert!(r.x[0] <= 0.55);
    }

    #[test]
    fn grid_oracle_finds_minimum_with_lexicographic_ties() {
        let (x, v) = grid_oracle(
            |x: &[f64]| (x[0] - 0.5).powi(2) + x[1],
            &[(0.0, 1.0); 2],
            21,
        )
        .unwrap();
        assert_eq!(v, 0.0);
        assert!((x[0] - 0.5).abs() < 1e-12 && x[1] == 0.0);
        let (x, _) = grid_oracle(|_: &[f64]| 1.0, &[(0.0, 1.0); 3], 5).unwrap();
        assert_eq!(x, vec![0.0, 0.0, 0.0]);
        assert!(grid_oracle(|_: &[f64]| 1.0, &[(0.0, 1.0); 4], 5).is_err());
        assert!(grid_oracle(|_: &[f64]| 1.0, &[(0.0, 1.0); 2], 4).is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = HJConfig {
            step_reduction: 1.0,
            ..HJConfig::default()
        };
        assert!(hooke_jeeves(sphere, &[0.5], &[(0.0, 1.0)], &cfg).is_err());
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn separable_quadratic_never_worse_than_start(
            c in proptest::collection::vec(0.0f64..1.0, 1..5),
            s in 0.0f64..1.0,
        ) {
            let n = c.len();
            let f = |x: &[f64]| x.iter().zip(&c).map(|(v, ci)| (v - ci).powi(2)).sum::<f64>();
            let x0 = vec![s; n];
            let r = hooke_jeeves(f, &x0, &vec![(0.0, 1.0); n], &HJConfig::default()).unwrap();
            prop_assert!(r.objective <= f(&x0));
            prop_assert!(r.objective < 1e-6);
        }
    }
}
