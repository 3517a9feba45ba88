#![allow(dead_code)]

use emskin::constants::PhysicalConstants;
use emskin::geometry::{build_lattice, SphericalPoint};
use emskin::incident::{incident_field_on_aperture, HornDescriptor, IncidentFieldGrid, Polarization, SourcePlacement};
use emskin::meta_atom::{currents_for_layout, surrogate_table, EMSLayout, MetaAtomTable, SurfaceCurrentGrid, SurrogateParams};

pub const PITCH: f64 = 8.565e-3;
pub const FREQ: f64 = 17.5e9;

pub fn consts() -> PhysicalConstants {
    PhysicalConstants::at_frequency(FREQ).unwrap()
}

/// High-gain horn 50 m away at (30°, 180°), 20 dBm, y-polarized.
pub fn placement() -> SourcePlacement {
    SourcePlacement {
        position: SphericalPoint::new(50.0, 30f64.to_radians(), 180f64.to_radians()).unwrap(),
        tx_power_dbm: 20.0,
        polarization: Polarization::Y,
    }
}

pub fn incident(n: usize, quad_order: usize) -> IncidentFieldGrid {
    let lattice = build_lattice(n, n, PITCH, PITCH).unwrap();
    incident_field_on_aperture(&placement(), &HornDescriptor::high_gain(), &lattice, quad_order, &consts()).unwrap()
}

pub fn table() -> MetaAtomTable {
    surrogate_table(&SurrogateParams::default()).unwrap()
}

/// Currents of a uniform layout away from resonance.
pub fn uniform_currents(n: usize) -> SurfaceCurrentGrid {
    let grid = incident(n, 4);
    currents_for_layout(&EMSLayout::uniform(n, n, 3e-3), &table(), &grid, &consts()).unwrap()
}
