//! Engineering limits checked against a performance report, and the exterior
//! penalty built from their violations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{EvimError, Result};
use crate::performance::PerformanceReport;
use crate::spec::MotorSpec;

/// Normalized violation assigned to every constraint of an unevaluable design.
pub const SENTINEL_VIOLATION: f64 = 10.0;

pub const DEFAULT_PENALTY_MU: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub name: String,
    pub kind: ConstraintKind,
    pub bound: f64,
    #[serde(default = "unit_weight")]
    pub weight: f64,
    /// Report field the constraint reads.
    pub field: String,
    #[serde(default = "enabled")]
    pub enabled: bool,
}

fn unit_weight() -> f64 {
    1.0
}

fn enabled() -> bool {
    true
}

impl ConstraintSpec {
    pub fn new(name: &str, kind: ConstraintKind, bound: f64, field: &str) -> Self {
        ConstraintSpec {
            name: name.to_string(),
            kind,
            bound,
            weight: 1.0,
            field: field.to_string(),
            enabled: true,
        }
    }

    /// Amount by which `value` lies on the wrong side of the bound; closed
    /// inequality, so a value at the bound is not a violation.
    pub fn violation(&self, value: f64) -> f64 {
        let excess = match self.kind {
            ConstraintKind::Min => self.bound - value,
            ConstraintKind::Max => value - self.bound,
        };
        if excess.is_nan() {
            f64::INFINITY
        } else {
            excess.max(0.0)
        }
    }
}

/// The traction-motor limit set: power factor, temperature rise, production
/// torque, overload capability at base and top speed, rotor peripheral speed,
/// rotor time constant and stator tooth flux density. Cost and weight caps are
/// present but disabled.
pub fn default_constraints(spec: &MotorSpec) -> Vec<ConstraintSpec> {
    use ConstraintKind::*;
    let mut cost = ConstraintSpec::new("max_cost", Max, 1000.0, "cost");
    cost.enabled = false;
    let mut mass = ConstraintSpec::new("max_mass", Max, 100.0, "mass");
    mass.enabled = false;
    vec![
        ConstraintSpec::new("min_power_factor", Min, 0.85, "power_factor"),
        ConstraintSpec::new("max_temperature_rise", Max, 75.0, "temperature_rise"),
        ConstraintSpec::new("min_rated_torque", Min, spec.rated_torque(), "rated_torque"),
        ConstraintSpec::new("min_breakdown_ratio", Min, 1.5, "breakdown_ratio"),
        ConstraintSpec::new("min_breakdown_torque_max", Min, 3.5, "breakdown_torque_max"),
        ConstraintSpec::new("max_tip_speed", Max, 120.0, "tip_speed_at_max"),
        ConstraintSpec::new("max_rotor_time_constant", Max, 4.0, "rotor_time_constant"),
        ConstraintSpec::new(
            "max_stator_tooth_flux",
            Max,
            1.2,
            "stator_tooth_flux_density",
        ),
        cost,
        mass,
    ]
}

/// Bound/weight/enable overrides keyed by constraint name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintOverride {
    #[serde(default)]
    pub bound: Option<f64>,
    #[serde(default)]
    pub weight: Option<f64>,
    #[serde(default)]
    pub enabled: Option<bool>,
}

pub fn apply_overrides(
    constraints: &mut [ConstraintSpec],
    overrides: &BTreeMap<String, ConstraintOverride>,
) -> Result<()> {
    for (name, o) in overrides {
        let c = constraints
            .iter_mut()
            .find(|c| &c.name == name)
            .ok_or_else(|| EvimError::Invalid(format!("unknown constraint `{name}`")))?;
        if let Some(b) = o.bound {
            c.bound = b;
        }
        if let Some(w) = o.weight {
            c.weight = w;
        }
        if let Some(e) = o.enabled {
            c.enabled = e;
        }
        // A weight that is not positive would let violations go unpunished.
        if !(c.weight > 0.0) || !c.bound.is_finite() {
            return Err(EvimError::Invalid(format!(
                "constraint `{name}` needs weight > 0 and a finite bound"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintOutcome {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub violation: f64,
    pub normalized_violation: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub outcomes: Vec<ConstraintOutcome>,
    pub feasible: bool,
    /// Weighted sum of squared normalized violations (penalty at mu = 1).
    pub penalty: f64,
}

impl ConstraintReport {
    fn from_outcomes(outcomes: Vec<ConstraintOutcome>) -> Self {
        let feasible = outcomes.iter().all(|o| o.violation == 0.0);
        let penalty = outcomes
            .iter()
            .map(|o| o.weight * o.normalized_violation.powi(2))
            .sum();
        ConstraintReport {
            outcomes,
            feasible,
            penalty,
        }
    }

    /// Every active constraint violated at the sentinel level.
    pub fn sentinel(constraints: &[ConstraintSpec]) -> Self {
        let outcomes = constraints
            .iter()
            .filter(|c| c.enabled)
            .map(|c| ConstraintOutcome {
                name: c.name.clone(),
                value: f64::NAN,
                bound: c.bound,
                violation: SENTINEL_VIOLATION * c.bound.abs(),
                normalized_violation: SENTINEL_VIOLATION,
                weight: c.weight,
            })
            .collect();
        Self::from_outcomes(outcomes)
    }

    pub fn get(&self, name: &str) -> Option<&ConstraintOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }
}

pub fn evaluate_constraints(
    report: &PerformanceReport,
    constraints: &[ConstraintSpec],
) -> Result<ConstraintReport> {
    let mut outcomes = Vec::with_capacity(constraints.len());
    for c in constraints.iter().filter(|c| c.enabled) {
        let value = report
            .field(&c.field)
            .ok_or_else(|| EvimError::UnknownField(c.field.clone()))?;
        let violation = c.violation(value);
        outcomes.push(ConstraintOutcome {
            name: c.name.clone(),
            value,
            bound: c.bound,
            violation,
            normalized_violation: violation / c.bound.abs(),
            weight: c.weight,
        });
    }
    Ok(ConstraintReport::from_outcomes(outcomes))
}

/// Quadratic exterior penalty `mu * sum(w * v^2)`.
pub fn penalty(report: &ConstraintReport, mu: f64) -> f64 {
    mu * report.penalty
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::performance::MotorModel;
    use crate::reference::two_pole_1800;

    fn report() -> PerformanceReport {
        MotorModel::new(MotorSpec::ev_traction(2, 1800.0))
            .evaluate(&two_pole_1800())
            .unwrap()
    }

    /// A report whose default-constraint fields all sit strictly inside.
    fn comfortable() -> PerformanceReport {
        let mut r = report();
        r.power_factor = 0.86;
        r.temperature_rise = 60.0;
        r.rated_torque = 60.0;
        r.breakdown_ratio = 1.7;
        r.breakdown_torque_max = 4.0;
        r.tip_speed_at_max = 60.0;
        r.rotor_time_constant = 0.3;
        r.stator_tooth_flux_density = 1.1;
        r
    }

    fn spec() -> MotorSpec {
        MotorSpec::ev_traction(2, 1800.0)
    }

    #[test]
    fn default_set_has_eight_active() {
        let cs = default_constraints(&spec());
        assert_eq!(cs.iter().filter(|c| c.enabled).count(), 8);
        assert_eq!(cs.iter().filter(|c| !c.enabled).count(), 2);
        assert!(cs.iter().all(|c| c.weight > 0.0 && c.bound.is_finite()));
        let torque = cs.iter().find(|c| c.name == "min_rated_torque").unwrap();
        assert!((torque.bound - 11185.5 / (1800.0 * std::f64::consts::PI / 30.0)).abs() < 1e-9);
    }

    #[test]
    fn inside_report_is_feasible() {
        let cr = evaluate_constraints(&comfortable(), &default_constraints(&spec())).unwrap();
        assert!(cr.feasible);
        assert_eq!(cr.penalty, 0.0);
        assert_eq!(penalty(&cr, 100.0), 0.0);
    }

    #[test]
    fn four_pole_power_factor_violates() {
        let mut r = comfortable();
        r.power_factor = 0.741;
        let cr = evaluate_constraints(&r, &default_constraints(&spec())).unwrap();
        assert!(!cr.feasible);
        let pf = cr.get("min_power_factor").unwrap();
        assert!((pf.violation - 0.109).abs() < 1e-12);
        assert!((pf.normalized_violation - 0.109 / 0.85).abs() < 1e-12);
    }

    #[test]
    fn values_at_bounds_are_feasible() {
        let cs = default_constraints(&spec());
        let mut r = comfortable();
        for c in cs.iter().filter(|c| c.enabled) {
            let v = c.bound;
            match c.field.as_str() {
                "power_factor" => r.power_factor = v,
                "temperature_rise" => r.temperature_rise = v,
                "rated_torque" => r.rated_torque = v,
                "breakdown_ratio" => r.breakdown_ratio = v,
                "breakdown_torque_max" => r.breakdown_torque_max = v,
                "tip_speed_at_max" => r.tip_speed_at_max = v,
                "rotor_time_constant" => r.rotor_time_constant = v,
                "stator_tooth_flux_density" => r.stator_tooth_flux_density = v,
                f => panic!("unexpected field {f}"),
            }
        }
        let cr = evaluate_constraints(&r, &cs).unwrap();
        assert!(cr.feasible);
        assert_eq!(cr.penalty, 0.0);
    }

    #[test]
    fn temperature_overshoot_normalized() {
        let mut r = comfortable();
        r.temperature_rise = 77.08;
        let cr = evaluate_constraints(&r, &default_constraints(&spec())).unwrap();
        let t = cr.get("max_temperature_rise").unwrap();
        assert!((t.normalized_violation - 0.0277).abs() < 1e-4);
    }

    #[test]
    fn sentinel_violates_everything_at_cap() {
        let cs = default_constraints(&spec());
        let cr = ConstraintReport::sentinel(&cs);
        assert!(!cr.feasible);
        assert_eq!(cr.outcomes.len(), 8);
        assert!(cr
            .outcomes
            .iter()
            .all(|o| o.normalized_violation == SENTINEL_VIOLATION));
    }

    #[test]
    fn unknown_field_is_an_error() {
        let cs = vec![ConstraintSpec::new(
            "x",
            ConstraintKind::Max,
            1.0,
            "torque_ripple",
        )];
        assert_eq!(
            evaluate_constraints(&report(), &cs).unwrap_err(),
            EvimError::UnknownField("torque_ripple".into())
        );
    }

    #[test]
    fn penalty_arithmetic() {
        let cr = ConstraintReport::from_outcomes(vec![ConstraintOutcome {
            name: "a".into(),
            value: 0.0,
            bound: 1.0,
            violation: 0.1,
            normalized_violation: 0.1,
            weight: 1.0,
        }]);
        assert!((penalty(&cr, 100.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overrides_change_bounds_and_reject_unknown_names() {
        let mut cs = default_constraints(&spec());
        let mut o = BTreeMap::new();
        o.insert(
            "max_cost".to_string(),
            ConstraintOverride {
                bound: Some(150.0),
                enabled: Some(true),
                weight: None,
            },
        );
        apply_overrides(&mut cs, &o).unwrap();
        let cost = cs.iter().find(|c| c.name == "max_cost").unwrap();
        assert!(cost.enabled && cost.bound == 150.0);
        o.insert("bogus".into(), ConstraintOverride::default());
        assert!(apply_overrides(&mut cs, &o).is_err());
    }

    #[test]
    fn constraint_set_ignores_design() {
        let a = default_constraints(&spec());
        let b = default_constraints(&spec());
        assert_eq!(a, b);
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn penalty_monotone_in_violation(v in 0.0f64..5.0, dv in 1e-6f64..1.0, mu in 1.0f64..1e4) {
            let mk = |v: f64| ConstraintReport::from_outcomes(vec![ConstraintOutcome {
                name: "a".into(), value: 0.0, bound: 1.0, violation: v,
                normalized_violation: v, weight: 1.0,
            }]);
            let lo = mk(v);
            let hi = mk(v + dv);
            prop_assert!(penalty(&hi, mu) > penalty(&lo, mu));
            prop_assert_eq!(penalty(&lo, mu) == 0.0, lo.feasible);
        }
    }
}
