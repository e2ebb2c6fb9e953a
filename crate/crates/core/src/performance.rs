//! Losses, efficiency, torques, thermal rise and inertia of one design, and
//! the full evaluation pipeline.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{
    solve_rated_slip, synthesize_winding, HarmonicCircuit, MachineCircuit, SpectrumSolution,
    WindingSpec,
};
use crate::constants::{BreakdownModel, ModelConstants};
use crate::error::{EvimError, Stage};
use crate::geometry::{
    derive_geometry, mass_and_volume, material_cost, rotor_inertia, rotor_tip_speed, CostBreakdown,
    DerivedGeometry, MassBreakdown,
};
use crate::spec::{
    base_frequency, max_frequency, DesignVector, HarmonicSpectrum, MaterialCatalog, MotorSpec,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorePart {
    StatorTeeth,
    StatorYoke,
    RotorTeeth,
    RotorYoke,
}

impl CorePart {
    pub const ALL: [CorePart; 4] = [
        CorePart::StatorTeeth,
        CorePart::StatorYoke,
        CorePart::RotorTeeth,
        CorePart::RotorYoke,
    ];

    pub fn is_rotor(self) -> bool {
        matches!(self, CorePart::RotorTeeth | CorePart::RotorYoke)
    }
}

/// Flux condition of one core part under one harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoreExcitation {
    pub order: u32,
    pub part: CorePart,
    /// G_i, kg.
    pub mass: f64,
    /// Frequency of the flux in this part, Hz.
    pub frequency: f64,
    /// Peak flux density, T.
    pub flux_density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoreLossTerm {
    pub order: u32,
    pub part: CorePart,
    pub hysteresis: f64,
    pub eddy: f64,
}

/// Hysteresis `G K_h sigma_h f B^k` plus eddy `G K_e t^2 f^2 B^2 K_Em / rho_t`
/// summed over parts and harmonics.
pub fn core_losses(
    excitations: &[CoreExcitation],
    materials: &MaterialCatalog,
) -> (f64, Vec<CoreLossTerm>) {
    let m = materials;
    let t2 = m.lamination_thickness * m.lamination_thickness;
    let mut total = 0.0;
    let detail: Vec<CoreLossTerm> = excitations
        .iter()
        .map(|e| {
            let hysteresis = e.mass
                * m.hysteresis_coefficient
                * m.sigma_h
                * e.frequency
                * e.flux_density.powf(m.steinmetz_exponent);
            let eddy = e.mass
                * m.eddy_coefficient
                * t2
                * e.frequency.powi(2)
                * e.flux_density.powi(2)
                * m.permeability_factor(e.order)
                / m.lamination_resistivity;
            total += hysteresis + eddy;
            CoreLossTerm {
                order: e.order,
                part: e.part,
                hysteresis,
                eddy,
            }
        })
        .collect();
    (total, detail)
}

/// Fundamental peak flux densities of the four core parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartFluxDensities {
    pub stator_teeth: f64,
    pub stator_yoke: f64,
    pub rotor_teeth: f64,
    pub rotor_yoke: f64,
}

impl PartFluxDensities {
    pub fn from_airgap(geom: &DerivedGeometry, b_g: f64, flux_per_pole: f64) -> Self {
        let l = geom.core_length;
        PartFluxDensities {
            stator_teeth: b_g * geom.stator_slot_pitch / geom.stator_tooth_width,
            stator_yoke: flux_per_pole / (2.0 * geom.stator_yoke_depth * l),
            rotor_teeth: b_g * geom.rotor_slot_pitch / geom.rotor_tooth_width,
            rotor_yoke: flux_per_pole / (2.0 * geom.rotor_yoke_depth * l),
        }
    }

    pub fn get(&self, part: CorePart) -> f64 {
        match part {
            CorePart::StatorTeeth => self.stator_teeth,
            CorePart::StatorYoke => self.stator_yoke,
            CorePart::RotorTeeth => self.rotor_teeth,
            CorePart::RotorYoke => self.rotor_yoke,
        }
    }
}

fn part_mass(masses: &MassBreakdown, part: CorePart) -> f64 {
    match part {
        CorePart::StatorTeeth => masses.stator_teeth,
        CorePart::StatorYoke => masses.stator_yoke,
        CorePart::RotorTeeth => masses.rotor_teeth,
        CorePart::RotorYoke => masses.rotor_yoke,
    }
}

/// Harmonic flux densities scale with amplitude/order; rotor parts see the
/// rotor frequency `s_m f_m`.
pub fn core_excitations(
    masses: &MassBreakdown,
    flux: &PartFluxDensities,
    spectrum: &HarmonicSpectrum,
    solution: &SpectrumSolution,
    f_base: f64,
) -> Vec<CoreExcitation> {
    let mut out = Vec::with_capacity(4 * spectrum.len());
    for (e, sol) in spectrum.entries.iter().zip(&solution.solutions) {
        let m = f64::from(e.order);
        let f_m = m * f_base;
        for part in CorePart::ALL {
            let frequency = if part.is_rotor() {
                (sol.slip * f_m).abs()
            } else {
                f_m
            };
            out.push(CoreExcitation {
                order: e.order,
                part,
                mass: part_mass(masses, part),
                frequency,
                flux_density: flux.get(part) * e.amplitude / m,
            });
        }
    }
    out
}

/// P_Omega = sum over harmonics of 3 (R_s I_s^2 + R_r I_r^2).
pub fn ohmic_losses(solution: &SpectrumSolution) -> (f64, f64) {
    solution
        .circuits
        .iter()
        .zip(&solution.solutions)
        .fold((0.0, 0.0), |(s, r), (c, o)| {
            (
                s + 3.0 * c.r_s * o.i_s.norm_sqr(),
                r + 3.0 * c.r_r * o.i_r.norm_sqr(),
            )
        })
}

/// Friction and windage, `8 D_r (L + 0.15) v^2` W.
pub fn mechanical_losses(geom: &DerivedGeometry, speed_rpm: f64) -> f64 {
    let v = rotor_tip_speed(geom, speed_rpm);
    8.0 * geom.rotor_outer_diameter * (geom.core_length + 0.15) * v * v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrayLosses {
    pub tooth_pulsation: f64,
    pub skew: f64,
    pub zigzag: f64,
    pub bar_leakage: f64,
}

impl StrayLosses {
    pub fn total(&self) -> f64 {
        self.tooth_pulsation + self.skew + self.zigzag + self.bar_leakage
    }
}

/// Lumped stray load loss apportioned over the four leakage mechanisms.
pub fn stray_losses(spec: &MotorSpec, constants: &ModelConstants) -> StrayLosses {
    let total = constants.stray_fraction * spec.rated_power;
    let [p, k, z, bl] = constants.stray_split;
    StrayLosses {
        tooth_pulsation: total * p,
        skew: total * k,
        zigzag: total * z,
        bar_leakage: total * bl,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub core: f64,
    pub core_hysteresis: f64,
    pub core_eddy: f64,
    pub core_detail: Vec<CoreLossTerm>,
    pub ohmic: f64,
    pub stator_ohmic: f64,
    pub rotor_ohmic: f64,
    pub mechanical: f64,
    pub stray: StrayLosses,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(
        core_detail: Vec<CoreLossTerm>,
        stator_ohmic: f64,
        rotor_ohmic: f64,
        mechanical: f64,
        stray: StrayLosses,
    ) -> Self {
        let core_hysteresis: f64 = core_detail.iter().map(|t| t.hysteresis).sum();
        let core_eddy: f64 = core_detail.iter().map(|t| t.eddy).sum();
        let core: f64 = core_detail.iter().map(|t| t.hysteresis + t.eddy).sum();
        let ohmic = stator_ohmic + rotor_ohmic;
        LossBreakdown {
            core,
            core_hysteresis,
            core_eddy,
            core_detail,
            ohmic,
            stator_ohmic,
            rotor_ohmic,
            mechanical,
            stray,
            total: ohmic + core + mechanical + stray.total(),
        }
    }
}

/// P_in = sum over harmonics of 3 V I cos(phi).
pub fn input_power(solution: &SpectrumSolution) -> f64 {
    solution.solutions.iter().map(|s| s.input_power()).sum()
}

pub fn efficiency(p_in: f64, p_loss: f64) -> Result<f64, EvimError> {
    if !(p_in > 0.0) || !(p_loss < p_in) || !(p_loss >= 0.0) {
        return Err(EvimError::NonPhysical {
            input: p_in,
            losses: p_loss,
        });
    }
    Ok((p_in - p_loss) / p_in)
}

/// Electromagnetic torque summed over harmonics; backward fields brake.
pub fn shaft_torque(
    solution: &SpectrumSolution,
    spectrum: &HarmonicSpectrum,
    spec: &MotorSpec,
) -> f64 {
    let f_b = base_frequency(spec);
    let p = spec.pole_pairs();
    spectrum
        .entries
        .iter()
        .zip(solution.circuits.iter().zip(&solution.solutions))
        .map(|(e, (c, o))| {
            if o.slip == 0.0 {
                return 0.0;
            }
            let f_m = f64::from(e.order) * f_b;
            e.rotation.sign() * 3.0 * p * c.r_r * o.i_r.norm_sqr() / (2.0 * PI * f_m * o.slip)
        })
        .sum()
}

/// The printed torque sum `1.5 P R I^2 / (m f_m s_m)` with P the pole count,
/// reported for audit only.
pub fn shaft_torque_literal(solution: &SpectrumSolution, spec: &MotorSpec) -> f64 {
    let f_b = base_frequency(spec);
    let poles = f64::from(spec.pole_count);
    solution
        .circuits
        .iter()
        .zip(&solution.solutions)
        .filter(|(_, o)| o.slip != 0.0)
        .map(|(c, o)| {
            let m = f64::from(c.order);
            1.5 * poles * c.r_r * o.i_r.norm_sqr() / (m * m * f_b * o.slip)
        })
        .sum()
}

/// Torque of the fundamental circuit at slip `s`.
pub fn fundamental_torque(
    circuit: &HarmonicCircuit,
    v_phase: f64,
    s: f64,
    spec: &MotorSpec,
) -> f64 {
    let omega_s = 2.0 * PI * base_frequency(spec) / spec.pole_pairs();
    match crate::circuit::solve_harmonic(circuit, v_phase, s) {
        Ok(o) => o.airgap_power(circuit) / omega_s,
        Err(_) => 0.0,
    }
}

/// Maximum of the fundamental torque-slip curve, from the Thevenin form of
/// the T-circuit. The maximum does not depend on the rotor resistance.
pub fn breakdown_torque_base(circuit: &HarmonicCircuit, v_phase: f64, spec: &MotorSpec) -> f64 {
    let omega_s = 2.0 * PI * base_frequency(spec) / spec.pole_pairs();
    let (ratio, zth) = circuit.thevenin();
    let vth2 = (ratio * v_phase).norm_sqr();
    let x = zth.im + circuit.x_lr;
    3.0 * vth2 / (2.0 * omega_s * (zth.re + (zth.re * zth.re + x * x).sqrt()))
}

/// Breakdown torque at maximum speed under constant voltage.
pub fn breakdown_torque_max(t_pb: f64, spec: &MotorSpec) -> f64 {
    (base_frequency(spec) / max_frequency(spec)).powi(2) * t_pb
}

/// H = J w_r^2 / (2 Q), with w_r the rated mechanical speed and Q rated output.
pub fn inertia_constant(j: f64, spec: &MotorSpec) -> f64 {
    0.5 * j * spec.rated_omega().powi(2) / spec.rated_power
}

/// Cooling surface: frame barrel over core plus end windings, and two end caps.
pub fn cooling_area(geom: &DerivedGeometry) -> f64 {
    let d_o = geom.stator_outer_diameter;
    PI * d_o * (geom.core_length + 2.0 * geom.pole_pitch) + 2.0 * PI / 4.0 * d_o * d_o
}

/// Steady-state frame temperature rise, K.
pub fn temperature_rise(
    losses: &LossBreakdown,
    geom: &DerivedGeometry,
    constants: &ModelConstants,
) -> f64 {
    let heat = losses.ohmic + losses.core + losses.stray.total();
    heat / (constants.heat_transfer_coefficient * cooling_area(geom))
}

/// Per-harmonic echo of the circuit and its solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicRecord {
    pub order: u32,
    pub slip: f64,
    pub voltage: f64,
    pub stator_current: f64,
    pub rotor_current: f64,
    pub emf: f64,
    pub cos_phi: f64,
    pub input_power: f64,
    pub r_s: f64,
    pub r_r: f64,
    pub x_ls: f64,
    pub x_lr: f64,
    pub x_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub schema_version: u32,
    pub design: DesignVector,
    pub geometry: DerivedGeometry,
    pub masses: MassBreakdown,
    pub costs: CostBreakdown,
    pub winding: WindingSpec,
    pub circuit: MachineCircuit,
    pub harmonics: Vec<HarmonicRecord>,
    pub flux_densities: PartFluxDensities,
    pub losses: LossBreakdown,
    pub input_power: f64,
    pub output_power: f64,
    pub efficiency: f64,
    pub power_factor: f64,
    pub rated_slip: f64,
    pub rated_torque: f64,
    pub rated_torque_literal: f64,
    pub breakdown_torque_base: f64,
    pub breakdown_torque_base_literal: f64,
    pub breakdown_torque_max: f64,
    pub breakdown_ratio: f64,
    pub temperature_rise: f64,
    pub mass: f64,
    pub volume: f64,
    pub cost: f64,
    pub inertia: f64,
    pub inertia_constant: f64,
    pub stator_tooth_flux_density: f64,
    pub rotor_time_constant: f64,
    pub tip_speed_at_max: f64,
}

/// Scalar report fields addressable by name.
pub const REPORT_FIELDS: &[&str] = &[
    "efficiency",
    "power_factor",
    "input_power",
    "output_power",
    "total_losses",
    "rated_slip",
    "rated_torque",
    "breakdown_torque_base",
    "breakdown_torque_max",
    "breakdown_ratio",
    "temperature_rise",
    "mass",
    "volume",
    "cost",
    "inertia",
    "inertia_constant",
    "stator_tooth_flux_density",
    "rotor_time_constant",
    "tip_speed_at_max",
];

impl PerformanceReport {
    pub fn field(&self, name: &str) -> Option<f64> {
        Some(match name {
            "efficiency" => self.efficiency,
            "power_factor" => self.power_factor,
            "input_power" => self.input_power,
            "output_power" => self.output_power,
            "total_losses" => self.losses.total,
            "rated_slip" => self.rated_slip,
            "rated_torque" => self.rated_torque,
            "breakdown_torque_base" => self.breakdown_torque_base,
            "breakdown_torque_max" => self.breakdown_torque_max,
            "breakdown_ratio" => self.breakdown_ratio,
            "temperature_rise" => self.temperature_rise,
            "mass" => self.mass,
            "volume" => self.volume,
            "cost" => self.cost,
            "inertia" => self.inertia,
            "inertia_constant" => self.inertia_constant,
            "stator_tooth_flux_density" => self.stator_tooth_flux_density,
            "rotor_time_constant" => self.rotor_time_constant,
            "tip_speed_at_max" => self.tip_speed_at_max,
            _ => return None,
        })
    }
}

/// A design the pipeline could not evaluate, with the stage that failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleDesign {
    pub stage: Stage,
    pub reason: String,
}

impl From<EvimError> for InfeasibleDesign {
    fn from(e: EvimError) -> Self {
        InfeasibleDesign {
            stage: e.stage().unwrap_or(Stage::Efficiency),
            reason: e.to_string(),
        }
    }
}

impl std::fmt::Display for InfeasibleDesign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}: {}", self.stage, self.reason)
    }
}

/// Motor ratings plus everything needed to evaluate a design vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorModel {
    pub spec: MotorSpec,
    pub materials: MaterialCatalog,
    pub constants: ModelConstants,
}

impl MotorModel {
    pub fn new(spec: MotorSpec) -> Self {
        MotorModel {
            spec,
            materials: MaterialCatalog::default(),
            constants: ModelConstants::default(),
        }
    }

    pub fn evaluate(&self, x: &DesignVector) -> Result<PerformanceReport, InfeasibleDesign> {
        evaluate_design(&self.spec, x, &self.materials, &self.constants)
    }
}

/// Geometry, winding, harmonic circuits, rated slip, losses, torques, thermal
/// rise and bulk properties of one design.
pub fn evaluate_design(
    spec: &MotorSpec,
    x: &DesignVector,
    materials: &MaterialCatalog,
    constants: &ModelConstants,
) -> Result<PerformanceReport, InfeasibleDesign> {
    let x = x.tied_to(spec.rotor_slot_shape);
    let geom = derive_geometry(spec, &x, constants)?;
    let masses = mass_and_volume(&geom, materials, constants);
    let costs = material_cost(&masses, materials);
    let inertia = rotor_inertia(&geom, materials, constants);

    let b_g = x.airgap_flux_density;
    let winding = synthesize_winding(spec, &geom, b_g, constants)?;
    let machine = MachineCircuit::new(spec, &geom, &winding, materials, constants);
    let flux = PartFluxDensities::from_airgap(&geom, b_g, winding.flux_per_pole);

    let f_b = base_frequency(spec);
    let v_phase = spec.phase_voltage();
    let p_fw = mechanical_losses(&geom, spec.rated_speed);
    let stray = stray_losses(spec, constants);
    let fixed_demand = spec.rated_power + p_fw + stray.total();
    let core_at = |sol: &SpectrumSolution| {
        core_losses(
            &core_excitations(&masses, &flux, &spec.spectrum, sol, f_b),
            materials,
        )
    };
    let solution = solve_rated_slip(
        &machine,
        &spec.spectrum,
        v_phase,
        1e-6 * spec.rated_power,
        |sol| fixed_demand + core_at(sol).0,
    )?;

    let (_, core_detail) = core_at(&solution);
    let (stator_ohmic, rotor_ohmic) = ohmic_losses(&solution);
    let losses = LossBreakdown::new(core_detail, stator_ohmic, rotor_ohmic, p_fw, stray);

    let p_in = input_power(&solution);
    let eta = efficiency(p_in, losses.total)?;

    let (c1, o1) = solution.fundamental();
    let t_n = shaft_torque(&solution, &spec.spectrum, spec);
    let t_pb_circuit = breakdown_torque_base(c1, v_phase, spec);
    let t_pb_literal = t_n * c1.r_r / c1.x_lr;
    let t_pb = match constants.breakdown_model {
        BreakdownModel::Circuit => t_pb_circuit,
        BreakdownModel::Literal => t_pb_literal,
    };
    let t_pm = breakdown_torque_max(t_pb, spec);

    let harmonics = solution
        .circuits
        .iter()
        .zip(&solution.solutions)
        .map(|(c, o)| HarmonicRecord {
            order: c.order,
            slip: o.slip,
            voltage: o.v_s,
            stator_current: o.stator_current(),
            rotor_current: o.rotor_current(),
            emf: o.e_s.norm(),
            cos_phi: o.cos_phi,
            input_power: o.input_power(),
            r_s: c.r_s,
            r_r: c.r_r,
            x_ls: c.x_ls,
            x_lr: c.x_lr,
            x_m: c.x_m,
        })
        .collect();

    let temperature = temperature_rise(&losses, &geom, constants);
    Ok(PerformanceReport {
        schema_version: REPORT_SCHEMA_VERSION,
        design: x,
        input_power: p_in,
        output_power: p_in - losses.total,
        efficiency: eta,
        power_factor: o1.cos_phi,
        rated_slip: solution.s1,
        rated_torque: t_n,
        rated_torque_literal: shaft_torque_literal(&solution, spec),
        breakdown_torque_base: t_pb,
        breakdown_torque_base_literal: t_pb_literal,
        breakdown_torque_max: t_pm,
        breakdown_ratio: t_pb / t_n,
        temperature_rise: temperature,
        mass: masses.total,
        volume: masses.active_volume,
        cost: costs.total,
        inertia,
        inertia_constant: inertia_constant(inertia, spec),
        stator_tooth_flux_density: flux.stator_teeth,
        rotor_time_constant: (c1.x_lr + c1.x_m) / (2.0 * PI * f_b * c1.r_r),
        tip_speed_at_max: rotor_tip_speed(&geom, spec.max_speed),
        geometry: geom,
        masses,
        costs,
        winding,
        circuit: machine,
        harmonics,
        flux_densities: flux,
        losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use approx::assert_relative_eq;

    fn spec(p: u32, speed: f64) -> MotorSpec {
        MotorSpec::ev_traction(p, speed)
    }

    fn reference_report() -> PerformanceReport {
        MotorModel::new(spec(2, 1800.0))
            .evaluate(&reference::two_pole_1800())
            .expect("reference design evaluates")
    }

    #[test]
    fn friction_and_windage_hand_value() {
        let mut x = reference::two_pole_1800();
        x.stator_inner_diameter = 0.1264 + 2.0 * x.airgap_length;
        let s = spec(2, 1800.0);
        let geom = derive_geometry(&s, &x, &ModelConstants::default()).unwrap();
        assert_relative_eq!(geom.rotor_outer_diameter, 0.1264, max_relative = 1e-12);
        // v = pi * 0.1264 * 30 = 11.9129 m/s; 8 * 0.1264 * 0.2354 * v^2
        let p = mechanical_losses(&geom, 1800.0);
        assert!((p - 33.8).abs() / 33.8 < 0.005, "{p}");
        assert_relative_eq!(
            mechanical_losses(&geom, 3600.0),
            4.0 * p,
            max_relative = 1e-12
        );
    }

    #[test]
    fn stray_default_and_zero() {
        let s = spec(2, 1800.0);
        let st = stray_losses(&s, &ModelConstants::default());
        assert_relative_eq!(st.total(), 201.339, max_relative = 1e-5);
        assert_relative_eq!(st.tooth_pulsation, 0.35 * st.total(), max_relative = 1e-12);
        let zero = ModelConstants {
            stray_fraction: 0.0,
            ..ModelConstants::default()
        };
        assert_eq!(stray_losses(&s, &zero).total(), 0.0);
    }

    #[test]
    fn efficiency_arithmetic_and_rejection() {
        assert_relative_eq!(
            efficiency(13009.0, 1823.0).unwrap(),
            0.859866,
            max_relative = 1e-5
        );
        assert!(efficiency(1000.0, 1000.0).is_err());
        assert!(efficiency(0.0, 0.0).is_err());
        assert!(efficiency(1000.0, -1.0).is_err());
        assert!(efficiency(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn breakdown_at_max_speed_matches_tables() {
        for (t_pb, speed, t_pm) in [
            (110.57, 1600.0, 3.495),
            (93.97, 1800.0, 3.759),
            (81.85, 2000.0, 4.042),
        ] {
            let got = breakdown_torque_max(t_pb, &spec(2, speed));
            assert!((got - t_pm).abs() / t_pm < 1.5e-3, "{got} vs {t_pm}");
        }
        let mut s = spec(2, 1800.0);
        s.max_speed = s.rated_speed;
        assert_eq!(breakdown_torque_max(93.97, &s), 93.97);
    }

    #[test]
    fn inertia_constant_hand_value() {
        // 0.5 * 0.0265 * (1800 * 2 pi / 60)^2 / 11185.5
        let h = inertia_constant(0.0265, &spec(2, 1800.0));
        assert!((h - 0.0421).abs() < 5e-5, "{h}");
    }

    #[test]
    fn core_loss_scaling() {
        let m = MaterialCatalog::default();
        let one = |f: f64, b: f64| {
            let (_, d) = core_losses(
                &[CoreExcitation {
                    order: 1,
                    part: CorePart::StatorYoke,
                    mass: 3.0,
                    frequency: f,
                    flux_density: b,
                }],
                &m,
            );
            (d[0].hysteresis, d[0].eddy)
        };
        let (h0, e0) = one(60.0, 0.8);
        let (h1, e1) = one(120.0, 0.8);
        assert_relative_eq!(h1, 2.0 * h0, max_relative = 1e-12);
        assert_relative_eq!(e1, 4.0 * e0, max_relative = 1e-12);
        let (h2, e2) = one(60.0, 1.6);
        assert_relative_eq!(h2, 4.0 * h0, max_relative = 1e-12);
        assert_relative_eq!(e2, 4.0 * e0, max_relative = 1e-12);
        assert_eq!(one(0.0, 0.8), (0.0, 0.0));
        assert_eq!(one(60.0, 0.0), (0.0, 0.0));
    }

    #[test]
    fn report_identities_on_reference_design() {
        let r = reference_report();
        let l = &r.losses;
        assert_relative_eq!(
            l.total,
            l.ohmic + l.core + l.mechanical + l.stray.total(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            r.efficiency * r.input_power + l.total,
            r.input_power,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            r.output_power,
            r.input_power - l.total,
            max_relative = 1e-12
        );
        let s = spec(2, 1800.0);
        assert!((r.output_power - s.rated_power).abs() <= 1e-6 * s.rated_power + 1e-9);
        assert_relative_eq!(
            r.breakdown_torque_max,
            (1800.0f64 / 9000.0).powi(2) * r.breakdown_torque_base,
            max_relative = 1e-12
        );
        assert!(r.power_factor > 0.0 && r.power_factor <= 1.0);
        assert!(r.efficiency > 0.0 && r.efficiency < 1.0);
    }

    #[test]
    fn ohmic_loss_matches_harmonic_currents() {
        let r = reference_report();
        let expect: f64 = r
            .harmonics
            .iter()
            .map(|h| 3.0 * (h.r_s * h.stator_current.powi(2) + h.r_r * h.rotor_current.powi(2)))
            .sum();
        assert_relative_eq!(r.losses.ohmic, expect, max_relative = 1e-9);
    }

    #[test]
    fn thermal_rise_is_heat_over_conductance() {
        let r = reference_report();
        let c = ModelConstants::default();
        let g = &r.geometry;
        let d_o = g.stator_outer_diameter;
        let area = PI * d_o * (g.core_length + 2.0 * g.pole_pitch) + PI / 2.0 * d_o * d_o;
        let heat = r.losses.ohmic + r.losses.core + r.losses.stray.total();
        assert_relative_eq!(
            r.temperature_rise,
            heat / (c.heat_transfer_coefficient * area),
            max_relative = 1e-12
        );
    }

    #[test]
    fn field_lookup_covers_listed_names() {
        let r = reference_report();
        for name in REPORT_FIELDS {
            assert!(r.field(name).is_some_and(f64::is_finite), "{name}");
        }
        assert_eq!(r.field("colour"), None);
        assert_eq!(r.field("efficiency"), Some(r.efficiency));
    }

    #[test]
    fn literal_breakdown_model_is_selectable() {
        let constants = ModelConstants {
            breakdown_model: BreakdownModel::Literal,
            ..ModelConstants::default()
        };
        let model = MotorModel {
            spec: spec(2, 1800.0),
            materials: MaterialCatalog::default(),
            constants,
        };
        let r = model.evaluate(&reference::two_pole_1800()).unwrap();
        assert_eq!(r.breakdown_torque_base, r.breakdown_torque_base_literal);
        let h1 = &r.harmonics[0];
        assert_relative_eq!(
            r.breakdown_torque_base_literal,
            r.rated_torque * h1.r_r / h1.x_lr,
            max_relative = 1e-12
        );
    }
}
