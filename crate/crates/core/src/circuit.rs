//! Per-phase T-circuit synthesized from the geometry and solved per supply
//! harmonic.
//!
//! Element formulas follow classical induction machine design practice:
//! EMF sizing of the turns, slot/zigzag/end permeances for leakage, Carter's
//! coefficient for the magnetizing reactance and the rectangular-bar skin
//! factor for the cage resistance.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::ModelConstants;
use crate::error::{EvimError, Result};
use crate::geometry::DerivedGeometry;
use crate::spec::{
    base_frequency, HarmonicSpectrum, MaterialCatalog, MotorSpec, Rotation, SlotShape,
};

pub const MU0: f64 = 4.0e-7 * PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingSpec {
    pub turns_per_phase: u32,
    pub winding_factor: f64,
    /// Cross-section of one conductor, m^2.
    pub conductor_area: f64,
    pub parallel_paths: u32,
    pub conductors_per_slot: f64,
    /// Fundamental flux per pole, Wb.
    pub flux_per_pole: f64,
}

/// Turns from the EMF equation `V = 4.44 f k_w N Phi`, with the pole flux of a
/// sinusoidal airgap field of peak `b_g`.
pub fn synthesize_winding(
    spec: &MotorSpec,
    geom: &DerivedGeometry,
    b_g: f64,
    constants: &ModelConstants,
) -> Result<WindingSpec> {
    let f = base_frequency(spec);
    let kw = constants.winding_factor;
    let pole_area = PI * geom.stator_inner_diameter * geom.core_length / f64::from(spec.pole_count);
    let flux = b_g * pole_area * 2.0 / PI;
    let turns = (spec.phase_voltage() / (4.44 * f * kw * flux)).round();
    if !(turns >= 1.0) || !turns.is_finite() {
        return Err(EvimError::WindingInfeasible(format!(
            "turns per phase rounds to {turns}"
        )));
    }
    if !(geom.stator_slot_area > 0.0) {
        return Err(EvimError::WindingInfeasible("zero stator slot area".into()));
    }
    let conductors_per_slot = 2.0 * f64::from(spec.phases) * turns / f64::from(spec.stator_slots);
    let conductor_area = geom.stator_slot_area * constants.slot_fill / conductors_per_slot;
    if !(conductor_area > 0.0 && conductor_area.is_finite()) {
        return Err(EvimError::WindingInfeasible(format!(
            "{conductors_per_slot:.1} conductors do not fit the slot"
        )));
    }
    Ok(WindingSpec {
        turns_per_phase: turns as u32,
        winding_factor: kw,
        conductor_area,
        parallel_paths: 1,
        conductors_per_slot,
        flux_per_pole: flux,
    })
}

/// Slip seen by the field of harmonic `order` when the fundamental slip is `s1`.
pub fn harmonic_slip(order: u32, s1: f64, rotation: Rotation) -> f64 {
    let m = f64::from(order);
    match rotation {
        Rotation::Forward => (m - (1.0 - s1)) / m,
        Rotation::Backward => (m + (1.0 - s1)) / m,
    }
}

/// Resistance ratio of a rectangular bar of reduced height `xi`.
pub fn skin_resistance_factor(xi: f64) -> f64 {
    if xi < 1e-2 {
        // series: 1 + 4 xi^4 / 45
        return 1.0 + 4.0 * xi.powi(4) / 45.0;
    }
    if xi > 20.0 {
        return xi;
    }
    let t = 2.0 * xi;
    xi * (t.sinh() + t.sin()) / (t.cosh() - t.cos())
}

/// Specific permeance of a slot: `d/(3w)` for a rectangular slot filled by its
/// conductor, a constant for a round one.
pub fn slot_permeance(shape: SlotShape, width: f64, depth: f64, constants: &ModelConstants) -> f64 {
    match shape {
        SlotShape::Rectangular => depth / (3.0 * width),
        SlotShape::Round => constants.round_slot_permeance,
    }
}

/// Carter factor of one slotted surface.
pub fn carter_factor(slot_pitch: f64, opening: f64, airgap: f64) -> f64 {
    let r = opening / airgap;
    let gamma = r * r / (5.0 + r);
    slot_pitch / (slot_pitch - gamma * airgap)
}

fn zigzag_permeance(kc_g: f64, opening: f64) -> f64 {
    let r = kc_g / opening;
    5.0 * r / (5.0 + 4.0 * r)
}

/// Elements of the T-circuit for one harmonic, per phase, referred to the stator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCircuit {
    pub order: u32,
    pub r_s: f64,
    pub r_r: f64,
    pub x_ls: f64,
    pub x_lr: f64,
    pub x_m: f64,
}

impl HarmonicCircuit {
    /// Z_s: stator branch.
    pub fn stator_impedance(&self) -> Complex64 {
        Complex64::new(self.r_s, self.x_ls)
    }

    /// Z_t: input impedance at slip `s`.
    pub fn total_impedance(&self, s: f64) -> Complex64 {
        let zm = Complex64::new(0.0, self.x_m);
        if s == 0.0 {
            return self.stator_impedance() + zm;
        }
        let zr = Complex64::new(self.r_r / s, self.x_lr);
        self.stator_impedance() + zm * zr / (zm + zr)
    }

    /// Thevenin equivalent seen by the rotor branch: (voltage ratio, impedance).
    pub fn thevenin(&self) -> (Complex64, Complex64) {
        let zm = Complex64::new(0.0, self.x_m);
        let zs = self.stator_impedance();
        let ratio = zm / (zs + zm);
        (ratio, zm * zs / (zs + zm))
    }
}

/// Frequency-independent part of the circuit of one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineCircuit {
    pub base_frequency: f64,
    pub r_s: f64,
    /// Referred bar resistance before skin correction.
    pub r_bar: f64,
    /// Referred end-ring contribution.
    pub r_ring: f64,
    /// Leakage and magnetizing reactances at the base frequency.
    pub x_ls: f64,
    pub x_lr: f64,
    pub x_m: f64,
    pub carter: f64,
    /// Bar height used in the skin-effect argument.
    pub bar_depth: f64,
    pub bar_resistivity: f64,
}

impl MachineCircuit {
    pub fn new(
        spec: &MotorSpec,
        geom: &DerivedGeometry,
        winding: &WindingSpec,
        materials: &MaterialCatalog,
        constants: &ModelConstants,
    ) -> Self {
        let f = base_frequency(spec);
        let omega = 2.0 * PI * f;
        let n = f64::from(winding.turns_per_phase);
        let kw = winding.winding_factor;
        let l = geom.core_length;
        let g = geom.airgap;
        let phases = f64::from(spec.phases);
        let p = spec.pole_pairs();
        let s1 = f64::from(spec.stator_slots);
        let s2 = f64::from(spec.rotor_slots);
        let q = s1 / (2.0 * p * phases);

        let l_mt = geom.mean_turn_length(constants);
        let r_s = materials.copper_resistivity * n * l_mt
            / (winding.conductor_area * f64::from(winding.parallel_paths));

        let referral = 4.0 * phases * (kw * n).powi(2) / s2;
        let rho_al = materials.aluminum_resistivity;
        let bar = rho_al * l / geom.bar_area;
        let ring_segment =
            rho_al * PI * geom.end_ring_mean_diameter / (s2 * geom.end_ring_cross_section);
        let ring_angle = (PI * p / s2).sin().powi(2);
        let ring = ring_segment / (2.0 * ring_angle);

        let open_s = constants.stator_slot_opening.min(geom.stator_slot_width);
        let open_r = constants.rotor_slot_opening.min(geom.rotor_slot_width);
        let kc1 = carter_factor(geom.stator_slot_pitch, open_s, g);
        let kc2 = carter_factor(geom.rotor_slot_pitch, open_r, g);
        let carter = kc1 * kc2;

        let lambda_slot_s = slot_permeance(
            SlotShape::Rectangular,
            geom.stator_slot_width,
            geom.stator_slot_depth,
            constants,
        );
        let lambda_zz_s = zigzag_permeance(carter * g, open_s);
        let end_length = (l_mt - constants.turn_length_core_coeff * l) / 2.0;
        let lambda_end = (0.34 * q * (end_length - 0.64 * geom.pole_pitch) / l).max(0.0);
        let x_ls =
            2.0 * MU0 * omega * l * n * n * (lambda_slot_s + lambda_zz_s + lambda_end) / (p * q);

        let lambda_slot_r = slot_permeance(
            geom.rotor_slot_shape,
            geom.rotor_slot_width,
            geom.rotor_slot_depth,
            constants,
        );
        let lambda_zz_r = zigzag_permeance(carter * g, open_r);
        let d_ring = geom.end_ring_mean_diameter;
        let ring_log = (4.7 * d_ring / (3.0 * geom.end_ring_cross_section.sqrt()))
            .log10()
            .max(0.0);
        let ring_leak = 2.3 * d_ring / (4.0 * s2 * ring_angle) * ring_log;
        let x_lr = referral * omega * MU0 * (l * (lambda_slot_r + lambda_zz_r) + ring_leak);

        let x_m =
            6.0 * MU0 * omega * (kw * n).powi(2) * geom.pole_pitch * l / (PI * PI * p * carter * g);

        MachineCircuit {
            base_frequency: f,
            r_s,
            r_bar: referral * bar,
            r_ring: referral * ring,
            x_ls,
            x_lr,
            x_m,
            carter,
            bar_depth: geom.rotor_slot_depth,
            bar_resistivity: rho_al,
        }
    }

    /// Reduced bar height at rotor frequency `f_rotor`.
    pub fn skin_argument(&self, f_rotor: f64) -> f64 {
        self.bar_depth * (PI * MU0 * f_rotor.abs() / self.bar_resistivity).sqrt()
    }

    /// Circuit of harmonic `order` at harmonic slip `slip`.
    pub fn harmonic(&self, order: u32, slip: f64) -> HarmonicCircuit {
        let m = f64::from(order);
        let f_rotor = m * self.base_frequency * slip;
        let kr = skin_resistance_factor(self.skin_argument(f_rotor));
        HarmonicCircuit {
            order,
            r_s: self.r_s,
            r_r: self.r_bar * kr + self.r_ring,
            x_ls: self.x_ls * m,
            x_lr: self.x_lr * m,
            x_m: self.x_m * m,
        }
    }

    /// Circuit with DC rotor resistance.
    pub fn fundamental_dc(&self) -> HarmonicCircuit {
        HarmonicCircuit {
            order: 1,
            r_s: self.r_s,
            r_r: self.r_bar + self.r_ring,
            x_ls: self.x_ls,
            x_lr: self.x_lr,
            x_m: self.x_m,
        }
    }
}

pub fn circuit_params(
    spec: &MotorSpec,
    geom: &DerivedGeometry,
    winding: &WindingSpec,
    materials: &MaterialCatalog,
    constants: &ModelConstants,
    order: u32,
    slip: f64,
) -> HarmonicCircuit {
    MachineCircuit::new(spec, geom, winding, materials, constants).harmonic(order, slip)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingSolution {
    pub order: u32,
    pub slip: f64,
    /// Phase voltage, V rms (reference phasor).
    pub v_s: f64,
    pub i_s: Complex64,
    pub i_r: Complex64,
    pub e_s: Complex64,
    pub cos_phi: f64,
}

impl OperatingSolution {
    pub fn stator_current(&self) -> f64 {
        self.i_s.norm()
    }

    pub fn rotor_current(&self) -> f64 {
        self.i_r.norm()
    }

    /// Three-phase input power.
    pub fn input_power(&self) -> f64 {
        3.0 * self.v_s * self.i_s.norm() * self.cos_phi
    }

    /// Three-phase power crossing the airgap.
    pub fn airgap_power(&self, c: &HarmonicCircuit) -> f64 {
        if self.slip == 0.0 {
            0.0
        } else {
            3.0 * self.i_r.norm_sqr() * c.r_r / self.slip
        }
    }

    /// Mechanical power converted by this harmonic's field.
    pub fn converted_power(&self, c: &HarmonicCircuit) -> f64 {
        self.airgap_power(c) * (1.0 - self.slip)
    }
}

pub fn solve_harmonic(circuit: &HarmonicCircuit, v: f64, slip: f64) -> Result<OperatingSolution> {
    let z = circuit.total_impedance(slip);
    // NaN lands here too: a parallel branch pair summing to zero.
    if !(z.norm() >= 1e-12) {
        return Err(EvimError::SingularCircuit(z.norm()));
    }
    let v_ph = Complex64::new(v, 0.0);
    let i_s = v_ph / z;
    let e_s = v_ph - i_s * circuit.stator_impedance();
    let i_r = if slip == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        e_s / Complex64::new(circuit.r_r / slip, circuit.x_lr)
    };
    Ok(OperatingSolution {
        order: circuit.order,
        slip,
        v_s: v,
        i_s,
        i_r,
        e_s,
        cos_phi: (z.re / z.norm()).clamp(0.0, 1.0),
    })
}

/// Harmonic solutions of the whole spectrum at fundamental slip `s1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSolution {
    pub s1: f64,
    pub circuits: Vec<HarmonicCircuit>,
    pub solutions: Vec<OperatingSolution>,
}

impl SpectrumSolution {
    pub fn converted_power(&self) -> f64 {
        self.circuits
            .iter()
            .zip(&self.solutions)
            .map(|(c, s)| s.converted_power(c))
            .sum()
    }

    pub fn fundamental(&self) -> (&HarmonicCircuit, &OperatingSolution) {
        (&self.circuits[0], &self.solutions[0])
    }
}

pub fn solve_spectrum(
    machine: &MachineCircuit,
    spectrum: &HarmonicSpectrum,
    v_phase: f64,
    s1: f64,
) -> Result<SpectrumSolution> {
    let mut circuits = Vec::with_capacity(spectrum.len());
    let mut solutions = Vec::with_capacity(spectrum.len());
    for e in &spectrum.entries {
        let s_m = harmonic_slip(e.order, s1, e.rotation);
        let c = machine.harmonic(e.order, s_m);
        solutions.push(solve_harmonic(&c, e.amplitude * v_phase, s_m)?);
        circuits.push(c);
    }
    Ok(SpectrumSolution {
        s1,
        circuits,
        solutions,
    })
}

/// Slip of maximum converted power of the fundamental circuit (DC rotor
/// resistance). The converted power rises monotonically below it.
pub fn max_power_slip(machine: &MachineCircuit) -> f64 {
    let c = machine.fundamental_dc();
    let (_, zth) = c.thevenin();
    let r = c.r_r;
    let load = (zth + Complex64::new(r, c.x_lr)).norm();
    r / (r + load)
}

/// Finds the fundamental slip at which the converted mechanical power of all
/// harmonics meets `demand(s1, solution)`, by bisection on `(0, s_pmax]`.
///
/// `demand` returns the mechanical power the airgap must deliver: rated
/// output plus the losses that are not part of the circuit.
pub fn solve_rated_slip<F>(
    machine: &MachineCircuit,
    spectrum: &HarmonicSpectrum,
    v_phase: f64,
    tolerance: f64,
    mut demand: F,
) -> Result<SpectrumSolution>
where
    F: FnMut(&SpectrumSolution) -> f64,
{
    let mut surplus = |s: f64| -> Result<(f64, f64, SpectrumSolution)> {
        let sol = solve_spectrum(machine, spectrum, v_phase, s)?;
        let need = demand(&sol);
        let have = sol.converted_power();
        Ok((have - need, need, sol))
    };

    let hi_slip = max_power_slip(machine);
    let (g_hi, need_hi, sol_hi) = surplus(hi_slip)?;
    if g_hi < 0.0 {
        return Err(EvimError::NoRatedPoint {
            required: need_hi,
            available: sol_hi.converted_power(),
        });
    }
    if g_hi.abs() <= tolerance {
        return Ok(sol_hi);
    }
    let mut lo = 0.0;
    let mut hi = hi_slip;
    let mut best = sol_hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (g, _, sol) = surplus(mid)?;
        if g.abs() <= tolerance {
            return Ok(sol);
        }
        if g > 0.0 {
            hi = mid;
            best = sol;
        } else {
            lo = mid;
        }
    }
    Ok(best)
}
