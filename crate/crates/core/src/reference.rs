//! Reference designs used by tests, examples and the calibration notes.

use crate::spec::DesignVector;

/// Reference 2-pole, 1800 rpm rectangular-slot design. Bore, length, slot
/// dimensions and outer diameter are fixed; the stator yoke follows from the
/// outer diameter. Rotor yoke, airgap, end ring and flux density are typical
/// values, chosen so that the design reaches rated power.
pub fn two_pole_1800() -> DesignVector {
    DesignVector {
        stator_inner_diameter: 0.1264,
        core_length: 0.0854,
        stator_slot_width: 0.0111,
        stator_slot_depth: 0.0267,
        rotor_slot_width: 0.0146,
        rotor_slot_depth: 0.0234,
        stator_yoke_depth: (0.2203 - 0.1264 - 2.0 * 0.0267) / 2.0,
        rotor_yoke_depth: 0.018,
        airgap_length: 0.0005,
        end_ring_cross_section: 6.0e-4,
        airgap_flux_density: 0.9,
    }
}

/// Reference 4-pole, 1800 rpm rectangular-slot design, completed the same way.
pub fn four_pole_1800() -> DesignVector {
    DesignVector {
        stator_inner_diameter: 0.1326,
        core_length: 0.1326,
        stator_slot_width: 0.0111,
        stator_slot_depth: 0.0261,
        rotor_slot_width: 0.0124,
        rotor_slot_depth: 0.0153,
        stator_yoke_depth: (0.2076 - 0.1326 - 2.0 * 0.0261) / 2.0,
        rotor_yoke_depth: 0.025,
        airgap_length: 0.0005,
        end_ring_cross_section: 4.0e-4,
        airgap_flux_density: 0.6,
    }
}
