//! Cross-section geometry, masses, rotor inertia and material cost.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::ModelConstants;
use crate::error::{EvimError, Result};
use crate::spec::{DesignVector, MaterialCatalog, MotorSpec, SlotShape};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedGeometry {
    pub stator_inner_diameter: f64,
    pub rotor_outer_diameter: f64,
    pub stator_outer_diameter: f64,
    /// Inner diameter of the rotor lamination (rests on the shaft allowance).
    pub rotor_inner_diameter: f64,
    pub shaft_diameter: f64,
    pub core_length: f64,
    pub airgap: f64,
    pub stator_slots: u32,
    pub rotor_slots: u32,
    pub rotor_slot_shape: SlotShape,
    pub stator_slot_width: f64,
    pub stator_slot_depth: f64,
    pub rotor_slot_width: f64,
    pub rotor_slot_depth: f64,
    pub stator_yoke_depth: f64,
    pub rotor_yoke_depth: f64,
    /// Slot pitches at the airgap surfaces.
    pub stator_slot_pitch: f64,
    pub rotor_slot_pitch: f64,
    /// Tooth widths at mid slot depth.
    pub stator_tooth_width: f64,
    pub rotor_tooth_width: f64,
    pub stator_slot_area: f64,
    pub bar_area: f64,
    pub end_ring_cross_section: f64,
    pub end_ring_mean_diameter: f64,
    pub pole_pitch: f64,
}

fn slot_area(shape: SlotShape, width: f64, depth: f64) -> f64 {
    match shape {
        SlotShape::Rectangular => width * depth,
        SlotShape::Round => PI * width * width / 4.0,
    }
}

pub fn derive_geometry(
    spec: &MotorSpec,
    x: &DesignVector,
    constants: &ModelConstants,
) -> Result<DerivedGeometry> {
    let x = x.tied_to(spec.rotor_slot_shape);
    if let Some((i, v)) = x
        .to_array()
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        return Err(EvimError::GeometryInfeasible(format!(
            "{} must be positive, got {v}",
            crate::spec::VARIABLE_NAMES[i]
        )));
    }

    let d = x.stator_inner_diameter;
    let g = x.airgap_length;
    let dr = d - 2.0 * g;
    let s1 = f64::from(spec.stator_slots);
    let s2 = f64::from(spec.rotor_slots);

    let stator_bore_tooth = PI * d / s1 - x.stator_slot_width;
    if stator_bore_tooth <= 0.0 {
        return Err(EvimError::GeometryInfeasible(format!(
            "stator tooth width {stator_bore_tooth:.3e} m at the bore"
        )));
    }
    // Rotor teeth narrow towards the shaft; round slots are widest at their centre.
    let rotor_narrowest_diameter = match spec.rotor_slot_shape {
        SlotShape::Rectangular => dr - 2.0 * x.rotor_slot_depth,
        SlotShape::Round => dr - x.rotor_slot_depth,
    };
    let rotor_min_tooth = PI * rotor_narrowest_diameter / s2 - x.rotor_slot_width;
    if rotor_min_tooth <= 0.0 {
        return Err(EvimError::GeometryInfeasible(format!(
            "rotor tooth width {rotor_min_tooth:.3e} m"
        )));
    }

    let shaft = constants.shaft_fraction * d;
    let slot_bottom = dr - 2.0 * x.rotor_slot_depth;
    if slot_bottom <= shaft {
        return Err(EvimError::GeometryInfeasible(format!(
            "rotor slots reach diameter {slot_bottom:.4} m, inside shaft allowance {shaft:.4} m"
        )));
    }
    // The lamination cannot extend into the shaft: a deeper yoke is cut back.
    let rotor_yoke = x.rotor_yoke_depth.min((slot_bottom - shaft) / 2.0);
    let rotor_inner = slot_bottom - 2.0 * rotor_yoke;

    Ok(DerivedGeometry {
        stator_inner_diameter: d,
        rotor_outer_diameter: dr,
        stator_outer_diameter: d + 2.0 * x.stator_slot_depth + 2.0 * x.stator_yoke_depth,
        rotor_inner_diameter: rotor_inner,
        shaft_diameter: shaft,
        core_length: x.core_length,
        airgap: g,
        stator_slots: spec.stator_slots,
        rotor_slots: spec.rotor_slots,
        rotor_slot_shape: spec.rotor_slot_shape,
        stator_slot_width: x.stator_slot_width,
        stator_slot_depth: x.stator_slot_depth,
        rotor_slot_width: x.rotor_slot_width,
        rotor_slot_depth: x.rotor_slot_depth,
        stator_yoke_depth: x.stator_yoke_depth,
        rotor_yoke_depth: rotor_yoke,
        stator_slot_pitch: PI * d / s1,
        rotor_slot_pitch: PI * dr / s2,
        stator_tooth_width: PI * (d + x.stator_slot_depth) / s1 - x.stator_slot_width,
        rotor_tooth_width: PI * (dr - x.rotor_slot_depth) / s2 - x.rotor_slot_width,
        stator_slot_area: slot_area(
            spec.stator_slot_shape,
            x.stator_slot_width,
            x.stator_slot_depth,
        ),
        bar_area: slot_area(
            spec.rotor_slot_shape,
            x.rotor_slot_width,
            x.rotor_slot_depth,
        ),
        end_ring_cross_section: x.end_ring_cross_section,
        end_ring_mean_diameter: dr - x.rotor_slot_depth,
        pole_pitch: PI * d / f64::from(spec.pole_count),
    })
}

impl DerivedGeometry {
    /// Mean length of one stator turn, m.
    pub fn mean_turn_length(&self, c: &ModelConstants) -> f64 {
        c.turn_length_core_coeff * self.core_length
            + c.turn_length_pole_pitch_coeff * self.pole_pitch
            + c.turn_length_fixed
    }

    /// Diameter at the bottom of the stator slots.
    pub fn stator_slot_bottom_diameter(&self) -> f64 {
        self.stator_inner_diameter + 2.0 * self.stator_slot_depth
    }

    pub fn rotor_slot_bottom_diameter(&self) -> f64 {
        self.rotor_outer_diameter - 2.0 * self.rotor_slot_depth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassBreakdown {
    pub stator_teeth: f64,
    pub stator_yoke: f64,
    pub rotor_teeth: f64,
    pub rotor_yoke: f64,
    /// Copper inside the slots.
    pub stator_slot_copper: f64,
    /// Copper in the end windings.
    pub stator_end_copper: f64,
    pub rotor_bars: f64,
    pub end_rings: f64,
    pub stator_iron: f64,
    pub rotor_iron: f64,
    pub stator_copper: f64,
    pub rotor_aluminum: f64,
    pub total: f64,
    /// Envelope pi/4 * D_o^2 * L, m^3.
    pub active_volume: f64,
}

fn annulus(outer: f64, inner: f64) -> f64 {
    PI / 4.0 * (outer * outer - inner * inner)
}

pub fn mass_and_volume(
    geom: &DerivedGeometry,
    materials: &MaterialCatalog,
    constants: &ModelConstants,
) -> MassBreakdown {
    let l = geom.core_length;
    let rho = &materials.densities;
    let s1 = f64::from(geom.stator_slots);
    let s2 = f64::from(geom.rotor_slots);

    let stator_slot_bottom = geom.stator_slot_bottom_diameter();
    let rotor_slot_bottom = geom.rotor_slot_bottom_diameter();

    let stator_teeth = (annulus(stator_slot_bottom, geom.stator_inner_diameter)
        - s1 * geom.stator_slot_area)
        * l
        * rho.steel;
    let stator_yoke = annulus(geom.stator_outer_diameter, stator_slot_bottom) * l * rho.steel;
    let rotor_teeth = (annulus(geom.rotor_outer_diameter, rotor_slot_bottom) - s2 * geom.bar_area)
        * l
        * rho.steel;
    let rotor_yoke = annulus(rotor_slot_bottom, geom.rotor_inner_diameter) * l * rho.steel;

    let copper_section = constants.slot_fill * s1 * geom.stator_slot_area;
    let stator_slot_copper = copper_section * l * rho.copper;
    let end_length = geom.mean_turn_length(constants) / 2.0 - l;
    let stator_end_copper = copper_section * end_length.max(0.0) * rho.copper;

    let rotor_bars = s2 * geom.bar_area * l * rho.aluminum;
    let end_rings =
        2.0 * geom.end_ring_cross_section * PI * geom.end_ring_mean_diameter * rho.aluminum;

    let stator_iron = stator_teeth + stator_yoke;
    let rotor_iron = rotor_teeth + rotor_yoke;
    let stator_copper = stator_slot_copper + stator_end_copper;
    let rotor_aluminum = rotor_bars + end_rings;
    MassBreakdown {
        stator_teeth,
        stator_yoke,
        rotor_teeth,
        rotor_yoke,
        stator_slot_copper,
        stator_end_copper,
        rotor_bars,
        end_rings,
        stator_iron,
        rotor_iron,
        stator_copper,
        rotor_aluminum,
        total: stator_iron + rotor_iron + stator_copper + rotor_aluminum,
        active_volume: PI / 4.0 * geom.stator_outer_diameter.powi(2) * l,
    }
}

/// Rotor moment of inertia, kg m^2: a solid steel cylinder of the rotor
/// diameter with the slot steel swapped for cage aluminum.
pub fn rotor_inertia(
    geom: &DerivedGeometry,
    materials: &MaterialCatalog,
    constants: &ModelConstants,
) -> f64 {
    let l = geom.core_length;
    let r = geom.rotor_outer_diameter / 2.0;
    let slots = f64::from(geom.rotor_slots) * geom.bar_area * l;
    let cylinder = PI * r * r * l;
    let mass =
        materials.densities.steel * (cylinder - slots) + materials.densities.aluminum * slots;
    constants.inertia_allowance * 0.5 * mass * r * r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub steel: f64,
    pub copper: f64,
    pub aluminum: f64,
    pub total: f64,
}

pub fn material_cost(mass: &MassBreakdown, materials: &MaterialCatalog) -> CostBreakdown {
    let p = &materials.unit_prices;
    let steel = (mass.stator_iron + mass.rotor_iron) * p.steel;
    let copper = mass.stator_copper * p.copper;
    let aluminum = mass.rotor_aluminum * p.aluminum;
    CostBreakdown {
        steel,
        copper,
        aluminum,
        total: steel + copper + aluminum,
    }
}

/// Peripheral rotor speed, m/s.
pub fn rotor_tip_speed(geom: &DerivedGeometry, speed_rpm: f64) -> f64 {
    PI * geom.rotor_outer_diameter * speed_rpm / 60.0
}
