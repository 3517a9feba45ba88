//! Phase-conjugation targets, phase-mismatch cost, received power and the
//! swarm-driven layout search.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::constants::PhysicalConstants;
use crate::field::{component_weights, reflected_field};
use crate::geometry::{ApertureLattice, DirectionCosines, SphericalPoint};
use crate::incident::IncidentFieldGrid;
use crate::meta_atom::{currents_for_layout, EMSLayout, MetaAtomTable, SurfaceCurrentGrid};
use crate::pso::{minimize, minimize_separable, SwarmConfig, SwarmMode};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Usm,
    Ffm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Usm => "usm",
            Method::Ffm => "ffm",
        }
    }
}

/// Wraps an angle to (-π, π].
pub fn wrap_phase(x: f64) -> f64 {
    PI - (PI - x).rem_euclid(TAU)
}

/// Target current phase per cell, shared by every current component.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPhaseGrid {
    pub m_count: usize,
    pub n_count: usize,
    pub phase: Vec<f64>,
    pub method: Method,
}

/// Phases that bring every cell into phase at a focus at finite range.
pub fn target_phase_usm(lattice: &ApertureLattice, rx: &SphericalPoint, lambda0: f64) -> TargetPhaseGrid {
    let d = rx.direction();
    let (u, v, w) = (d.u, d.v, d.w);
    let phase = lattice
        .centers()
        .map(|(x, y)| {
            let cross = x * v - y * u;
            let quad = PI / (lambda0 * rx.r) * ((x * w).powi(2) + (y * w).powi(2) + cross * cross);
            wrap_phase(quad - 2.0 * PI / lambda0 * (x * u + y * v))
        })
        .collect();
    TargetPhaseGrid { m_count: lattice.m_count, n_count: lattice.n_count, phase, method: Method::Usm }
}

/// Linear steering phases toward a direction.
pub fn target_phase_ffm(lattice: &ApertureLattice, direction: &DirectionCosines, lambda0: f64) -> TargetPhaseGrid {
    let phase = lattice
        .centers()
        .map(|(x, y)| wrap_phase(-2.0 * PI / lambda0 * (x * direction.u + y * direction.v)))
        .collect();
    TargetPhaseGrid { m_count: lattice.m_count, n_count: lattice.n_count, phase, method: Method::Ffm }
}

pub fn target_phase(method: Method, lattice: &ApertureLattice, rx: &SphericalPoint, lambda0: f64) -> TargetPhaseGrid {
    match method {
        Method::Usm => target_phase_usm(lattice, rx, lambda0),
        Method::Ffm => target_phase_ffm(lattice, &rx.direction(), lambda0),
    }
}

/// Sum over components and cells of the squared wrapped phase error, times
/// the cell area. Cells whose coefficient is negligible for a component are
/// skipped for that component.
pub fn phase_mismatch_cost(currents: &SurfaceCurrentGrid, target: &TargetPhaseGrid) -> Result<f64> {
    let n = currents.lattice.cell_count();
    if target.phase.len() != n {
        return Err(Error::ShapeMismatch(format!("target has {} cells, currents {n}", target.phase.len())));
    }
    Ok(cost_unchecked(currents, &target.phase))
}

fn cost_unchecked(currents: &SurfaceCurrentGrid, target: &[f64]) -> f64 {
    let mut terms = vec![0.0; target.len()];
    cost_terms(currents, target, &mut terms);
    terms.iter().sum()
}

/// Per-cell contributions to the phase-mismatch cost.
fn cost_terms(currents: &SurfaceCurrentGrid, target: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let area = currents.lattice.cell_area();
    let floor = magnitude_floor(currents);
    for comp in currents.components() {
        for ((c, t), o) in comp.iter().zip(target).zip(out.iter_mut()) {
            if c.norm() >= floor && c.norm() > 0.0 {
                *o += wrap_phase(t - c.arg()).powi(2) * area;
            }
        }
    }
}

/// Magnitude below which a coefficient's phase is treated as undefined:
/// 1e-12 of the largest coefficient over all components.
fn magnitude_floor(currents: &SurfaceCurrentGrid) -> f64 {
    let peak = currents
        .components()
        .iter()
        .flat_map(|c| c.iter().map(|v| v.norm()))
        .fold(0.0, f64::max);
    1e-12 * peak
}

/// Power collected by a receiver of gain `g_rx`, in watts.
pub fn received_power(f_theta: Complex64, f_phi: Complex64, g_rx: f64, lambda0: f64, eta0: f64) -> f64 {
    lambda0 * lambda0 * g_rx / (8.0 * PI * eta0) * (f_theta.norm_sqr() + f_phi.norm_sqr())
}

pub fn watts_to_dbm(p: f64) -> f64 {
    10.0 * (p / 1e-3).log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn dbi_to_linear(dbi: f64) -> f64 {
    10f64.powf(dbi / 10.0)
}

/// |F|² at the focus when every cell adds in phase there.
pub fn focused_power_bound(currents: &SurfaceCurrentGrid, rx: &SphericalPoint, constants: &PhysicalConstants) -> f64 {
    let l = &currents.lattice;
    let (wt, wp) = component_weights(rx, constants.eta0);
    let dir = rx.direction();
    let gamma = crate::field::gamma_coefficient(0.0, 0.0, rx.r, &dir, l.dx, l.dy, constants.lambda0).norm();
    let comps = currents.components();
    let (mut a_t, mut a_p) = (0.0, 0.0);
    for i in 0..l.cell_count() {
        for k in 0..4 {
            let m = comps[k][i].norm();
            a_t += wt[k] * m;
            a_p += wp[k] * m;
        }
    }
    let scale = gamma / (2.0 * constants.lambda0 * rx.r);
    scale * scale * (a_t * a_t + a_p * a_p)
}

/// Keeps each coefficient's magnitude and replaces its phase by the target.
pub fn apply_target_phases(currents: &SurfaceCurrentGrid, target: &TargetPhaseGrid) -> Result<SurfaceCurrentGrid> {
    if target.phase.len() != currents.lattice.cell_count() {
        return Err(Error::ShapeMismatch("target and current grids differ".into()));
    }
    let mut out = currents.clone();
    for comp in out.components_mut() {
        for (c, &t) in comp.iter_mut().zip(&target.phase) {
            *c = Complex64::from_polar(c.norm(), t);
        }
    }
    Ok(out)
}

/// Idealized currents: twice the tangential incident field over η0 in
/// magnitude, with the target phase.
pub fn ideal_currents(incident: &IncidentFieldGrid, target: &TargetPhaseGrid, constants: &PhysicalConstants) -> Result<SurfaceCurrentGrid> {
    let mut out = SurfaceCurrentGrid::zeros(&incident.lattice);
    if target.phase.len() != out.lattice.cell_count() {
        return Err(Error::ShapeMismatch("target and lattice differ".into()));
    }
    for (i, cell) in incident.e_cells.iter().enumerate() {
        let ph = target.phase[i];
        out.je_x[i] = Complex64::from_polar(2.0 * cell.mean[0].norm() / constants.eta0, ph);
        out.je_y[i] = Complex64::from_polar(2.0 * cell.mean[1].norm() / constants.eta0, ph);
    }
    Ok(out)
}

/// Everything the layout search needs besides the table and target.
#[derive(Debug, Clone)]
pub struct SynthesisScenario {
    pub constants: PhysicalConstants,
    pub incident: IncidentFieldGrid,
    pub rx: SphericalPoint,
    /// Receiver gain, linear.
    pub g_rx: f64,
}

impl SynthesisScenario {
    pub fn lattice(&self) -> &ApertureLattice {
        &self.incident.lattice
    }

    pub fn currents(&self, layout: &EMSLayout, table: &MetaAtomTable) -> Result<SurfaceCurrentGrid> {
        currents_for_layout(layout, table, &self.incident, &self.constants)
    }

    /// Received power at the configured receiver for a current grid, in dBm.
    pub fn received_dbm(&self, currents: &SurfaceCurrentGrid) -> f64 {
        let f = reflected_field(currents, &self.rx, &self.constants);
        watts_to_dbm(received_power(f.f_theta, f.f_phi, self.g_rx, self.constants.lambda0, self.constants.eta0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub layout: EMSLayout,
    pub cost: f64,
    pub cost_trace: Vec<f64>,
    pub psi_rx_dbm: f64,
    pub method: Method,
    pub iterations: usize,
}

pub fn run_sbd_synthesis(
    scenario: &SynthesisScenario,
    table: &MetaAtomTable,
    target: &TargetPhaseGrid,
    swarm: &SwarmConfig,
) -> Result<SynthesisResult> {
    swarm.validate()?;
    let lattice = scenario.lattice();
    let (m, n) = (lattice.m_count, lattice.n_count);
    if target.phase.len() != m * n {
        return Err(Error::ShapeMismatch(format!("target has {} cells, lattice {}", target.phase.len(), m * n)));
    }
    let (lo, hi) = table.range();
    let currents = |g: &[f64]| scenario.currents(&EMSLayout { m_count: m, n_count: n, g: g.to_vec() }, table);
    let separable = match swarm.mode {
        SwarmMode::Global => false,
        SwarmMode::Separable => true,
        SwarmMode::Auto => table_is_local(table),
    };
    let out = if separable {
        let terms = |g: &[f64], out: &mut [f64]| match currents(g) {
            Ok(j) => cost_terms(&j, &target.phase, out),
            Err(_) => out.iter_mut().for_each(|v| *v = f64::INFINITY),
        };
        minimize_separable(terms, m * n, lo, hi, swarm)?
    } else {
        let objective = |g: &[f64]| currents(g).map_or(f64::INFINITY, |j| cost_unchecked(&j, &target.phase));
        minimize(objective, m * n, lo, hi, swarm)?
    };
    let layout = EMSLayout { m_count: m, n_count: n, g: out.best };
    let j = scenario.currents(&layout, table)?;
    Ok(SynthesisResult {
        psi_rx_dbm: scenario.received_dbm(&j),
        cost: cost_unchecked(&j, &target.phase),
        layout,
        cost_trace: out.trace,
        method: target.method,
        iterations: out.iterations,
    })
}

/// True when no entry has a normal susceptibility, so each cell's current
/// depends on its own descriptor only.
pub fn table_is_local(table: &MetaAtomTable) -> bool {
    let zero = Complex64::new(0.0, 0.0);
    (0..table.len()).all(|i| {
        let (s, _) = table.entry(i);
        s.psi_e_zz == zero && s.psi_h_zz == zero
    })
}

/// Cell-wise exhaustive optimum when the currents are strictly local.
///
/// Scans every table node plus `refine - 1` evenly spaced points inside
/// each interval, using uniform layouts. Returns the layout and its cost.
pub fn separable_optimum(
    scenario: &SynthesisScenario,
    table: &MetaAtomTable,
    target: &TargetPhaseGrid,
    refine: usize,
) -> Result<(EMSLayout, f64)> {
    let lattice = scenario.lattice();
    let (m, n) = (lattice.m_count, lattice.n_count);
    let nodes = table.descriptors();
    let refine = refine.max(1);
    let mut candidates = Vec::with_capacity(nodes.len() * refine);
    for w in nodes.windows(2) {
        for s in 0..refine {
            candidates.push(w[0] + (w[1] - w[0]) * s as f64 / refine as f64);
        }
    }
    candidates.push(nodes[nodes.len() - 1]);
    let mut best_g = vec![candidates[0]; m * n];
    let mut best_c = vec![f64::INFINITY; m * n];
    let mut terms = vec![0.0; m * n];
    for &g in &candidates {
        let j = scenario.currents(&EMSLayout::uniform(m, n, g), table)?;
        cost_terms(&j, &target.phase, &mut terms);
        for (i, &c) in terms.iter().enumerate() {
            if c < best_c[i] {
                best_c[i] = c;
                best_g[i] = g;
            }
        }
    }
    let layout = EMSLayout { m_count: m, n_count: n, g: best_g };
    let cost = phase_mismatch_cost(&scenario.currents(&layout, table)?, target)?;
    Ok((layout, cost))
}
