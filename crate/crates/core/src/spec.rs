//! Fixed motor inputs: ratings, topology, materials, supply spectrum and
//! the design-variable box.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::ModelConstants;
use crate::constraints::{
    apply_overrides, default_constraints, ConstraintOverride, ConstraintSpec,
};
use crate::error::{EvimError, Result};
use crate::optimizer::HJConfig;

/// Watts per mechanical horsepower.
pub const WATTS_PER_HP: f64 = 745.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotShape {
    Rectangular,
    Round,
}

impl SlotShape {
    pub fn label(self) -> &'static str {
        match self {
            SlotShape::Rectangular => "rect",
            SlotShape::Round => "round",
        }
    }
}

/// Direction of the rotating field produced by a supply harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rotation {
    Forward,
    Backward,
}

impl Rotation {
    /// 6k+1 orders rotate with the fundamental, 6k-1 orders against it.
    pub fn for_order(order: u32) -> Self {
        if order % 6 == 5 {
            Rotation::Backward
        } else {
            Rotation::Forward
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Rotation::Forward => 1.0,
            Rotation::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawHarmonicEntry")]
pub struct HarmonicEntry {
    pub order: u32,
    /// Per-unit of the fundamental phase voltage.
    pub amplitude: f64,
    pub rotation: Rotation,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHarmonicEntry {
    order: u32,
    amplitude: f64,
    #[serde(default)]
    rotation: Option<Rotation>,
}

impl From<RawHarmonicEntry> for HarmonicEntry {
    fn from(raw: RawHarmonicEntry) -> Self {
        HarmonicEntry {
            order: raw.order,
            amplitude: raw.amplitude,
            rotation: raw
                .rotation
                .unwrap_or_else(|| Rotation::for_order(raw.order)),
        }
    }
}

impl HarmonicEntry {
    pub fn new(order: u32, amplitude: f64) -> Self {
        HarmonicEntry {
            order,
            amplitude,
            rotation: Rotation::for_order(order),
        }
    }
}

/// Time harmonics of the inverter supply voltage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HarmonicSpectrum {
    pub entries: Vec<HarmonicEntry>,
}

impl HarmonicSpectrum {
    pub fn entry(&self, order: u32) -> Option<&HarmonicEntry> {
        self.entries.iter().find(|e| e.order == order)
    }

    pub fn fundamental_only() -> Self {
        HarmonicSpectrum {
            entries: vec![HarmonicEntry::new(1, 1.0)],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Six-step inverter spectrum: fundamental plus the 5th..17th orders.
pub fn default_spectrum() -> HarmonicSpectrum {
    const ORDERS: [u32; 6] = [1, 5, 7, 11, 13, 17];
    const AMPLITUDES: [f64; 6] = [1.0, 0.972, 0.088, 0.019, 0.015, 0.050];
    HarmonicSpectrum {
        entries: ORDERS
            .iter()
            .zip(AMPLITUDES)
            .map(|(&m, a)| HarmonicEntry::new(m, a))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorSpec {
    /// Rated shaft output, W.
    pub rated_power: f64,
    /// Rated rms line voltage, V.
    pub rated_voltage_line: f64,
    pub pole_count: u32,
    /// Rated (= base) speed, rpm.
    pub rated_speed: f64,
    /// Maximum speed, rpm.
    pub max_speed: f64,
    pub stator_slots: u32,
    pub rotor_slots: u32,
    pub stator_slot_shape: SlotShape,
    pub rotor_slot_shape: SlotShape,
    #[serde(default = "default_spectrum")]
    pub spectrum: HarmonicSpectrum,
    #[serde(default = "default_phases")]
    pub phases: u32,
}

fn default_phases() -> u32 {
    3
}

impl MotorSpec {
    /// 15 hp, 96 V traction motor with the slot combination used for the
    /// given pole count and a 9000 rpm top speed.
    pub fn ev_traction(pole_count: u32, rated_speed: f64) -> Self {
        let (stator_slots, rotor_slots) = default_slot_counts(pole_count);
        MotorSpec {
            rated_power: 15.0 * WATTS_PER_HP,
            rated_voltage_line: 96.0,
            pole_count,
            rated_speed,
            max_speed: 9000.0,
            stator_slots,
            rotor_slots,
            stator_slot_shape: SlotShape::Rectangular,
            rotor_slot_shape: SlotShape::Rectangular,
            spectrum: default_spectrum(),
            phases: 3,
        }
    }

    pub fn with_rotor_slot_shape(mut self, shape: SlotShape) -> Self {
        self.rotor_slot_shape = shape;
        self
    }

    pub fn pole_pairs(&self) -> f64 {
        f64::from(self.pole_count) / 2.0
    }

    /// Rms phase voltage of the fundamental (star connection).
    pub fn phase_voltage(&self) -> f64 {
        self.rated_voltage_line / 3f64.sqrt()
    }

    /// Rated mechanical speed, rad/s.
    pub fn rated_omega(&self) -> f64 {
        self.rated_speed * std::f64::consts::PI / 30.0
    }

    pub fn rated_torque(&self) -> f64 {
        self.rated_power / self.rated_omega()
    }
}

/// Default (stator, rotor) slot counts by pole count.
pub fn default_slot_counts(pole_count: u32) -> (u32, u32) {
    match pole_count {
        4 => (24, 18),
        _ => (18, 13),
    }
}

/// Supply frequency at rated speed, Hz. Slip is not subtracted.
pub fn base_frequency(spec: &MotorSpec) -> f64 {
    f64::from(spec.pole_count) * spec.rated_speed / 120.0
}

/// Supply frequency at maximum speed, Hz.
pub fn max_frequency(spec: &MotorSpec) -> f64 {
    f64::from(spec.pole_count) * spec.max_speed / 120.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Densities {
    pub steel: f64,
    pub copper: f64,
    pub aluminum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitPrices {
    pub steel: f64,
    pub copper: f64,
    pub aluminum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialCatalog {
    /// Lamination thickness, mm.
    pub lamination_thickness: f64,
    /// Lamination resistivity, ohm-cm.
    pub lamination_resistivity: f64,
    pub hysteresis_coefficient: f64,
    pub eddy_coefficient: f64,
    pub steinmetz_exponent: f64,
    pub sigma_h: f64,
    /// Per-order eddy multiplier; orders not listed use 1.0.
    #[serde(default)]
    pub harmonic_permeability_factor: BTreeMap<u32, f64>,
    /// kg/m^3.
    pub densities: Densities,
    /// currency/kg.
    pub unit_prices: UnitPrices,
    /// Stator conductor resistivity at working temperature, ohm-m.
    pub copper_resistivity: f64,
    /// Cage resistivity at working temperature, ohm-m.
    pub aluminum_resistivity: f64,
}

impl MaterialCatalog {
    pub fn permeability_factor(&self, order: u32) -> f64 {
        self.harmonic_permeability_factor
            .get(&order)
            .copied()
            .unwrap_or(1.0)
    }
}

impl Default for MaterialCatalog {
    fn default() -> Self {
        MaterialCatalog {
            lamination_thickness: 0.35,
            lamination_resistivity: 48e-6,
            // Calibrated so the mid-range 2-pole 1800 rpm design (every
            // variable at the centre of its default range) dissipates 2 % of
            // rated power in the core.
            hysteresis_coefficient: 0.0132,
            eddy_coefficient: 1.32e-7,
            steinmetz_exponent: 2.0,
            sigma_h: 3.0,
            harmonic_permeability_factor: BTreeMap::new(),
            densities: Densities {
                steel: 7850.0,
                copper: 8900.0,
                aluminum: 2700.0,
            },
            unit_prices: UnitPrices {
                steel: 2.0,
                copper: 8.0,
                aluminum: 3.0,
            },
            copper_resistivity: 2.1e-8,
            aluminum_resistivity: 3.2e-8,
        }
    }
}

/// The eleven optimization variables, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignVector {
    pub stator_inner_diameter: f64,
    pub core_length: f64,
    pub stator_slot_width: f64,
    pub stator_slot_depth: f64,
    pub rotor_slot_width: f64,
    pub rotor_slot_depth: f64,
    pub stator_yoke_depth: f64,
    pub rotor_yoke_depth: f64,
    pub airgap_length: f64,
    pub end_ring_cross_section: f64,
    pub airgap_flux_density: f64,
}

pub const NUM_VARIABLES: usize = 11;

pub const VARIABLE_NAMES: [&str; NUM_VARIABLES] = [
    "stator_inner_diameter",
    "core_length",
    "stator_slot_width",
    "stator_slot_depth",
    "rotor_slot_width",
    "rotor_slot_depth",
    "stator_yoke_depth",
    "rotor_yoke_depth",
    "airgap_length",
    "end_ring_cross_section",
    "airgap_flux_density",
];

impl DesignVector {
    pub fn to_array(&self) -> [f64; NUM_VARIABLES] {
        [
            self.stator_inner_diameter,
            self.core_length,
            self.stator_slot_width,
            self.stator_slot_depth,
            self.rotor_slot_width,
            self.rotor_slot_depth,
            self.stator_yoke_depth,
            self.rotor_yoke_depth,
            self.airgap_length,
            self.end_ring_cross_section,
            self.airgap_flux_density,
        ]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        assert_eq!(x.len(), NUM_VARIABLES, "design vector has 11 entries");
        DesignVector {
            stator_inner_diameter: x[0],
            core_length: x[1],
            stator_slot_width: x[2],
            stator_slot_depth: x[3],
            rotor_slot_width: x[4],
            rotor_slot_depth: x[5],
            stator_yoke_depth: x[6],
            rotor_yoke_depth: x[7],
            airgap_length: x[8],
            end_ring_cross_section: x[9],
            airgap_flux_density: x[10],
        }
    }

    /// Round rotor slots have a single diameter: depth follows width.
    pub fn tied_to(mut self, rotor_shape: SlotShape) -> Self {
        if rotor_shape == SlotShape::Round {
            self.rotor_slot_depth = self.rotor_slot_width;
        }
        self
    }

    pub fn index_of(name: &str) -> Option<usize> {
        VARIABLE_NAMES.iter().position(|n| *n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableBounds {
    pub lower: DesignVector,
    pub upper: DesignVector,
}

impl VariableBounds {
    pub fn lower_array(&self) -> [f64; NUM_VARIABLES] {
        self.lower.to_array()
    }

    pub fn upper_array(&self) -> [f64; NUM_VARIABLES] {
        self.upper.to_array()
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.lower_array()
            .into_iter()
            .zip(self.upper_array())
            .collect()
    }

    pub fn contains(&self, x: &DesignVector) -> bool {
        self.pairs()
            .iter()
            .zip(x.to_array())
            .all(|(&(lo, hi), v)| lo <= v && v <= hi)
    }

    /// Point at `fraction` of every range, measured from the lower bound.
    pub fn at_fraction(&self, fraction: f64) -> DesignVector {
        let x: Vec<f64> = self
            .pairs()
            .iter()
            .map(|&(lo, hi)| lo + fraction * (hi - lo))
            .collect();
        DesignVector::from_slice(&x)
    }
}

/// Box bounds wide enough to hold every reference optimum for the 96 V
/// traction scenarios. Slot widths are capped so that the start points of the
/// multi-start search keep positive tooth widths for both slot combinations.
pub fn default_bounds(_spec: &MotorSpec) -> VariableBounds {
    VariableBounds {
        lower: DesignVector {
            stator_inner_diameter: 0.06,
            core_length: 0.04,
            stator_slot_width: 0.003,
            stator_slot_depth: 0.005,
            rotor_slot_width: 0.003,
            rotor_slot_depth: 0.005,
            stator_yoke_depth: 0.005,
            rotor_yoke_depth: 0.005,
            airgap_length: 0.0002,
            end_ring_cross_section: 2.0e-5,
            airgap_flux_density: 0.3,
        },
        upper: DesignVector {
            stator_inner_diameter: 0.30,
            core_length: 0.30,
            stator_slot_width: 0.025,
            stator_slot_depth: 0.05,
            rotor_slot_width: 0.03,
            rotor_slot_depth: 0.05,
            stator_yoke_depth: 0.10,
            rotor_yoke_depth: 0.06,
            airgap_length: 0.002,
            end_ring_cross_section: 1.5e-3,
            airgap_flux_density: 1.0,
        },
    }
}

/// One invariant violation found by [`validate_spec`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: String,
    pub message: String,
}

impl Violation {
    fn new(code: &str, message: impl Into<String>) -> Self {
        Violation {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

pub fn validate_spec(spec: &MotorSpec, materials: &MaterialCatalog) -> Vec<Violation> {
    let mut out = Vec::new();
    let positive = |v: f64| v.is_finite() && v > 0.0;

    if !positive(spec.rated_power) {
        out.push(Violation::new("rated_power", "rated_power > 0"));
    }
    if !positive(spec.rated_voltage_line) {
        out.push(Violation::new("rated_voltage", "rated_voltage_line > 0"));
    }
    if spec.pole_count != 2 && spec.pole_count != 4 {
        out.push(Violation::new(
            "pole_count",
            format!("pole_count must be 2 or 4, got {}", spec.pole_count),
        ));
    }
    if !positive(spec.rated_speed) {
        out.push(Violation::new("rated_speed", "rated_speed > 0"));
    }
    if !(spec.rated_speed < spec.max_speed) {
        out.push(Violation::new("speed_order", "rated_speed < max_speed"));
    }
    if spec.stator_slots == 0 || spec.rotor_slots == 0 {
        out.push(Violation::new("slot_count", "slot counts must be positive"));
    } else if spec.stator_slots == spec.rotor_slots {
        out.push(Violation::new("slot_counts_equal", "slot counts equal"));
    }
    if spec.phases != 3 {
        out.push(Violation::new("phases", "only three-phase machines"));
    }
    if spec.stator_slot_shape != SlotShape::Rectangular {
        out.push(Violation::new(
            "stator_slot_shape",
            "stator slots are rectangular",
        ));
    }

    let entries = &spec.spectrum.entries;
    if !entries.windows(2).all(|w| w[0].order < w[1].order) {
        out.push(Violation::new(
            "spectrum_order",
            "harmonic orders strictly increasing",
        ));
    }
    match spec.spectrum.entry(1) {
        Some(e) if e.amplitude == 1.0 && e.rotation == Rotation::Forward => {}
        _ => out.push(Violation::new(
            "spectrum_fundamental",
            "fundamental present, forward, amplitude 1.0",
        )),
    }
    if entries.iter().any(|e| e.order == 0) {
        out.push(Violation::new("spectrum_zero_order", "harmonic order 0"));
    }
    if entries
        .iter()
        .any(|e| !(e.amplitude >= 0.0) || !e.amplitude.is_finite())
    {
        out.push(Violation::new("spectrum_amplitude", "amplitudes >= 0"));
    }

    let m = materials;
    let physical = [
        ("lamination_thickness", m.lamination_thickness),
        ("lamination_resistivity", m.lamination_resistivity),
        ("hysteresis_coefficient", m.hysteresis_coefficient),
        ("eddy_coefficient", m.eddy_coefficient),
        ("sigma_h", m.sigma_h),
        ("density_steel", m.densities.steel),
        ("density_copper", m.densities.copper),
        ("density_aluminum", m.densities.aluminum),
        ("price_steel", m.unit_prices.steel),
        ("price_copper", m.unit_prices.copper),
        ("price_aluminum", m.unit_prices.aluminum),
        ("copper_resistivity", m.copper_resistivity),
        ("aluminum_resistivity", m.aluminum_resistivity),
    ];
    for (name, v) in physical {
        if !positive(v) {
            out.push(Violation::new(name, format!("{name} > 0")));
        }
    }
    if !(1.6..=2.4).contains(&m.steinmetz_exponent) {
        out.push(Violation::new("steinmetz_exponent", "k in [1.6, 2.4]"));
    }
    if m.harmonic_permeability_factor
        .values()
        .any(|&v| !positive(v))
    {
        out.push(Violation::new(
            "harmonic_permeability_factor",
            "K_Em > 0 for every order",
        ));
    }
    out
}

/// The `--spec` JSON document: motor, materials and model constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub motor: MotorSpec,
    #[serde(default)]
    pub materials: MaterialCatalog,
    #[serde(default)]
    pub constants: ModelConstants,
    #[serde(default)]
    pub bounds: Option<VariableBounds>,
    #[serde(default)]
    pub constraints: BTreeMap<String, ConstraintOverride>,
    #[serde(default)]
    pub optimizer: HJConfig,
}

impl SpecDocument {
    /// Default materials, constants, bounds, constraints and search settings.
    pub fn new(motor: MotorSpec) -> Self {
        SpecDocument {
            motor,
            materials: MaterialCatalog::default(),
            constants: ModelConstants::default(),
            bounds: None,
            constraints: BTreeMap::new(),
            optimizer: HJConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut v = validate_spec(&self.motor, &self.materials);
        v.extend(self.constants.validate());
        if let Err(e) = self.constraint_set() {
            v.push(Violation::new("constraints", e.to_string()));
        }
        if let Err(e) = self.optimizer.validate() {
            v.push(Violation::new("optimizer", e.to_string()));
        }
        v
    }

    /// Default constraint set with this document's overrides applied.
    pub fn constraint_set(&self) -> Result<Vec<ConstraintSpec>> {
        let mut c = default_constraints(&self.motor);
        apply_overrides(&mut c, &self.constraints)?;
        Ok(c)
    }

    pub fn bounds(&self) -> VariableBounds {
        self.bounds
            .clone()
            .unwrap_or_else(|| default_bounds(&self.motor))
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<_> = v.iter().map(|x| x.message.as_str()).collect();
            Err(EvimError::Invalid(msgs.join("; ")))
        }
    }
}
