//! Coefficients of the sizing, circuit, thermal and stray-loss models.
//!
//! Everything the analytical model needs beyond the motor ratings and the
//! material catalog lives here, so a calibration change is one edit.

use serde::{Deserialize, Serialize};

use crate::spec::Violation;

/// How the base-speed breakdown torque is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakdownModel {
    /// Slip-maximized fundamental torque of the T-circuit.
    #[default]
    Circuit,
    /// `T_n * R_r1 / X_r1`, kept for comparison with the literal expression.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConstants {
    /// Fundamental winding factor (distribution x pitch).
    pub winding_factor: f64,
    /// Copper fraction of the stator slot area.
    pub slot_fill: f64,
    /// Mean turn = a*L + b*pole_pitch + c.
    pub turn_length_core_coeff: f64,
    pub turn_length_pole_pitch_coeff: f64,
    pub turn_length_fixed: f64,
    /// Shaft diameter as a fraction of the stator bore.
    pub shaft_fraction: f64,
    /// Rotor inertia allowance for shaft and rings.
    pub inertia_allowance: f64,
    /// Slot openings used for Carter and zigzag terms, m.
    pub stator_slot_opening: f64,
    pub rotor_slot_opening: f64,
    /// Slot permeance of a round slot.
    pub round_slot_permeance: f64,
    /// Lumped stray load loss as a fraction of rated output.
    pub stray_fraction: f64,
    /// Apportionment of stray loss: tooth pulsation, skew, zigzag, bar leakage.
    pub stray_split: [f64; 4],
    /// Frame heat transfer coefficient, W/(m^2 K).
    pub heat_transfer_coefficient: f64,
    pub breakdown_model: BreakdownModel,
}

impl Default for ModelConstants {
    fn default() -> Self {
        ModelConstants {
            winding_factor: 0.955,
            slot_fill: 0.40,
            turn_length_core_coeff: 2.0,
            turn_length_pole_pitch_coeff: 2.3,
            turn_length_fixed: 0.08,
            shaft_fraction: 0.25,
            inertia_allowance: 1.0,
            stator_slot_opening: 0.0025,
            rotor_slot_opening: 0.0015,
            round_slot_permeance: 0.66,
            stray_fraction: 0.018,
            stray_split: [0.35, 0.15, 0.35, 0.15],
            // Calibrated so the optimized 2-pole 1800 rpm design runs about
            // 60 K above ambient.
            heat_transfer_coefficient: 14.0,
            breakdown_model: BreakdownModel::Circuit,
        }
    }
}

impl ModelConstants {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut check = |ok: bool, code: &str, message: &str| {
            if !ok {
                out.push(Violation {
                    code: code.to_string(),
                    message: message.to_string(),
                });
            }
        };
        check(
            (0.8..=1.0).contains(&self.winding_factor),
            "winding_factor",
            "winding factor in [0.8, 1.0]",
        );
        check(
            self.slot_fill > 0.0 && self.slot_fill < 1.0,
            "slot_fill",
            "slot fill in (0, 1)",
        );
        check(
            self.turn_length_core_coeff >= 2.0
                && self.turn_length_pole_pitch_coeff >= 0.0
                && self.turn_length_fixed >= 0.0,
            "turn_length",
            "mean turn covers both core sides",
        );
        check(
            self.shaft_fraction > 0.0 && self.shaft_fraction < 1.0,
            "shaft_fraction",
            "shaft fraction in (0, 1)",
        );
        check(self.inertia_allowance > 0.0, "inertia_allowance", "k_J > 0");
        check(
            self.stator_slot_opening > 0.0 && self.rotor_slot_opening > 0.0,
            "slot_opening",
            "slot openings > 0",
        );
        check(
            self.round_slot_permeance > 0.0,
            "round_slot_permeance",
            "round slot permeance > 0",
        );
        check(
            self.stray_fraction >= 0.0,
            "stray_fraction",
            "stray fraction >= 0",
        );
        check(
            self.stray_split.iter().all(|&s| s >= 0.0)
                && (self.stray_split.iter().sum::<f64>() - 1.0).abs() < 1e-12,
            "stray_split",
            "stray split nonnegative and sums to 1",
        );
        check(
            self.heat_transfer_coefficient > 0.0,
            "heat_transfer_coefficient",
            "h > 0",
        );
        out
    }
}
