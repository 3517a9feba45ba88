//! Transmitting horn model and the incident field sampled over the aperture.

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::constants::{PhysicalConstants, C0};
use crate::geometry::{ApertureLattice, SphericalPoint};
use crate::meta_atom::ReflectionTensor;
use crate::quadrature::{cell_rule, gauss_legendre};
use crate::vector::{complexify, cross_rc, dot_rc, zero, CVec3};
use crate::{Error, Result};

const HORN_QUAD_ORDER: usize = 96;

/// Pyramidal horn geometry (all lengths in meters) and its peak gain.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HornDescriptor {
    pub c1: f64,
    pub c2: f64,
    pub beta: f64,
    pub rho_e: f64,
    pub rho_h: f64,
    /// H-plane aperture width.
    pub b1: f64,
    /// E-plane aperture height.
    pub b2: f64,
    pub g_max_dbi: f64,
    pub frequency: f64,
}

impl HornDescriptor {
    pub fn low_gain() -> Self {
        Self {
            c1: 1.295e-2,
            c2: 6.477e-3,
            beta: 1.072e-3,
            rho_e: 1.925e-2,
            rho_h: 2.449e-2,
            b1: 3.549e-2,
            b2: 2.569e-2,
            g_max_dbi: 13.7,
            frequency: 17.5e9,
        }
    }

    pub fn high_gain() -> Self {
        Self {
            c1: 1.295e-2,
            c2: 6.477e-3,
            beta: 8.897e-2,
            rho_e: 1.041e-1,
            rho_h: 1.137e-1,
            b1: 7.648e-2,
            b2: 5.976e-2,
            g_max_dbi: 20.4,
            frequency: 17.5e9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lengths = [
            ("c1", self.c1),
            ("c2", self.c2),
            ("beta", self.beta),
            ("rho_e", self.rho_e),
            ("rho_h", self.rho_h),
            ("b1", self.b1),
            ("b2", self.b2),
            ("frequency", self.frequency),
        ];
        for (name, v) in lengths {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("horn {name} must be positive, got {v}")));
            }
        }
        if !(self.g_max_dbi.is_finite() && self.g_max_dbi > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "horn peak gain must be positive in dBi, got {}",
                self.g_max_dbi
            )));
        }
        Ok(())
    }

    pub fn peak_gain(&self) -> f64 {
        10f64.powf(self.g_max_dbi / 10.0)
    }
}

/// Precomputed aperture integrals for repeated gain evaluation.
///
/// The aperture field is a cosine taper across `b1` and uniform across `b2`,
/// each carrying the quadratic phase error of its flare.
#[derive(Debug, Clone)]
pub struct HornPattern {
    k: f64,
    peak: f64,
    h_plane: Vec<(f64, Complex64)>,
    e_plane: Vec<(f64, Complex64)>,
    norm: f64,
}

impl HornPattern {
    pub fn new(horn: &HornDescriptor) -> Result<Self> {
        horn.validate()?;
        let k = 2.0 * PI * horn.frequency / C0;
        let gl = gauss_legendre(HORN_QUAD_ORDER)?;
        let h_plane = gl
            .iter()
            .map(|&(t, w)| {
                let x = 0.5 * horn.b1 * t;
                let amp = (PI * x / horn.b1).cos() * w * 0.5 * horn.b1;
                (x, Complex64::from_polar(amp, -k * x * x / (2.0 * horn.rho_h)))
            })
            .collect();
        let e_plane = gl
            .iter()
            .map(|&(t, w)| {
                let y = 0.5 * horn.b2 * t;
                let amp = w * 0.5 * horn.b2;
                (y, Complex64::from_polar(amp, -k * y * y / (2.0 * horn.rho_e)))
            })
            .collect();
        let mut p = Self { k, peak: horn.peak_gain(), h_plane, e_plane, norm: 1.0 };
        p.norm = p.relative_field(0.0, 0.0);
        Ok(p)
    }

    fn relative_field(&self, theta: f64, phi: f64) -> f64 {
        let st = theta.sin();
        let kx = self.k * st * phi.cos();
        let ky = self.k * st * phi.sin();
        let i1: Complex64 = self
            .h_plane
            .iter()
            .map(|&(x, a)| a * Complex64::cis(kx * x))
            .sum();
        let i2: Complex64 = self
            .e_plane
            .iter()
            .map(|&(y, a)| a * Complex64::cis(ky * y))
            .sum();
        0.5 * (1.0 + theta.cos()) * (i1 * i2).norm()
    }

    /// Gain toward horn-frame angles (θ', φ').
    pub fn gain(&self, theta: f64, phi: f64) -> f64 {
        let f = self.relative_field(theta, phi) / self.norm;
        self.peak * f * f
    }
}

pub fn horn_gain(horn: &HornDescriptor, theta: f64, phi: f64) -> Result<f64> {
    Ok(HornPattern::new(horn)?.gain(theta, phi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    X,
    Y,
}

impl Polarization {
    pub fn axis(self) -> Vector3<f64> {
        match self {
            Polarization::X => Vector3::x(),
            Polarization::Y => Vector3::y(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourcePlacement {
    pub position: SphericalPoint,
    pub tx_power_dbm: f64,
    pub polarization: Polarization,
}

impl SourcePlacement {
    pub fn tx_power_watts(&self) -> f64 {
        1e-3 * 10f64.powf(self.tx_power_dbm / 10.0)
    }
}

/// Uniform plane wave arriving from direction (theta, phi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub theta: f64,
    pub phi: f64,
    pub amplitude: Complex64,
    pub polarization: Polarization,
}

impl PlaneWave {
    pub fn propagation(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        -Vector3::new(st * cp, st * sp, ct)
    }
}

#[derive(Debug, Clone)]
pub enum Illumination {
    Horn { placement: SourcePlacement, horn: HornDescriptor },
    PlaneWave(PlaneWave),
}

/// Incident field at one quadrature point.
#[derive(Debug, Clone, Copy)]
pub struct FieldPoint {
    pub position: Vector3<f64>,
    /// Fraction of the cell area carried by this point.
    pub weight: f64,
    pub k_hat: Vector3<f64>,
    pub e: CVec3,
    pub h: CVec3,
}

/// Cell means of the field and of its projections on the local ⊥/∥ basis.
///
/// `proj[0..4]` hold the ⊥⊥, ⊥∥, ∥⊥, ∥∥ parts so that the reflected field
/// is `Σ Γ_ij proj[ij]`. The normal component rides on the ∥∥ entry.
#[derive(Debug, Clone, Copy)]
pub struct CellProjection {
    pub mean: CVec3,
    pub proj: [CVec3; 4],
}

#[derive(Debug, Clone)]
pub struct IncidentFieldGrid {
    pub lattice: ApertureLattice,
    pub quad_order: usize,
    /// `quad_order²` consecutive samples per cell, cells in lattice order.
    pub samples: Vec<FieldPoint>,
    pub e_cells: Vec<CellProjection>,
    pub h_cells: Vec<CellProjection>,
}

impl IncidentFieldGrid {
    pub fn cell_samples(&self, idx: usize) -> &[FieldPoint] {
        let q = self.quad_order * self.quad_order;
        &self.samples[idx * q..(idx + 1) * q]
    }

    pub fn mean_e(&self) -> Vec<CVec3> {
        self.e_cells.iter().map(|c| c.mean).collect()
    }

    pub fn mean_h(&self) -> Vec<CVec3> {
        self.h_cells.iter().map(|c| c.mean).collect()
    }
}

/// Local incidence-plane basis (⊥, ∥), both tangential to the aperture.
pub fn incidence_basis(k_hat: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let z = Vector3::z();
    let c = z.cross(k_hat);
    let perp = if c.norm() < 1e-12 { Vector3::y() } else { c.normalize() };
    (perp, z.cross(&perp))
}

fn project(points: &[FieldPoint], pick: impl Fn(&FieldPoint) -> CVec3) -> CellProjection {
    let z = Vector3::z();
    let mut mean = zero();
    let mut proj = [zero(); 4];
    for p in points {
        let f = pick(p) * Complex64::from(p.weight);
        let (perp, par) = incidence_basis(&p.k_hat);
        let fp = dot_rc(&perp, &f);
        let fl = dot_rc(&par, &f);
        mean += f;
        proj[0] += complexify(&perp) * fp;
        proj[1] += complexify(&perp) * fl;
        proj[2] += complexify(&par) * fp;
        proj[3] += complexify(&par) * fl + complexify(&z) * f[2];
    }
    CellProjection { mean, proj }
}

fn sample_aperture<F>(lattice: &ApertureLattice, quad_order: usize, field: F) -> Result<IncidentFieldGrid>
where
    F: Fn(Vector3<f64>) -> (Vector3<f64>, CVec3, CVec3) + Sync,
{
    let rule = cell_rule(quad_order, lattice.dx, lattice.dy)?;
    let q = rule.len();
    let samples: Vec<FieldPoint> = (0..lattice.cell_count() * q)
        .into_par_iter()
        .map(|i| {
            let (xc, yc) = lattice.center(i / q);
            let (ox, oy, weight) = rule[i % q];
            let position = Vector3::new(xc + ox, yc + oy, 0.0);
            let (k_hat, e, h) = field(position);
            FieldPoint { position, weight, k_hat, e, h }
        })
        .collect();
    let (e_cells, h_cells) = samples
        .par_chunks(q)
        .map(|c| (project(c, |p| p.e), project(c, |p| p.h)))
        .unzip();
    Ok(IncidentFieldGrid { lattice: lattice.clone(), quad_order, samples, e_cells, h_cells })
}

/// Horn field over the aperture, in the horn's far field.
///
/// E points exactly along the declared axis; H = k̂ × E / η0.
pub fn incident_field_on_aperture(
    placement: &SourcePlacement,
    horn: &HornDescriptor,
    lattice: &ApertureLattice,
    quad_order: usize,
    constants: &PhysicalConstants,
) -> Result<IncidentFieldGrid> {
    let tx = placement.position.to_cartesian();
    if !(tx.norm() > 0.0) {
        return Err(Error::InvalidArgument("source placed at the origin".into()));
    }
    let pattern = HornPattern::new(horn)?;
    let axis = placement.polarization.axis();
    let z_h = -tx.normalize();
    let y_h = axis - z_h * axis.dot(&z_h);
    if y_h.norm() < 1e-9 {
        return Err(Error::InvalidArgument(
            "polarization axis is parallel to the horn boresight".into(),
        ));
    }
    let y_h = y_h.normalize();
    let x_h = y_h.cross(&z_h);
    let scale = constants.eta0 * placement.tx_power_watts() / (2.0 * PI);
    let (k0, eta0) = (constants.k0, constants.eta0);
    sample_aperture(lattice, quad_order, |p| {
        let d_vec = p - tx;
        let d = d_vec.norm();
        let k_hat = d_vec / d;
        let theta = k_hat.dot(&z_h).clamp(-1.0, 1.0).acos();
        let phi = k_hat.dot(&y_h).atan2(k_hat.dot(&x_h));
        let amp = (scale * pattern.gain(theta, phi)).sqrt() / d;
        let e = complexify(&axis) * Complex64::from_polar(amp, -k0 * d);
        let h = cross_rc(&k_hat, &e) * Complex64::from(1.0 / eta0);
        (k_hat, e, h)
    })
}

pub fn plane_wave_on_aperture(
    wave: &PlaneWave,
    lattice: &ApertureLattice,
    quad_order: usize,
    constants: &PhysicalConstants,
) -> Result<IncidentFieldGrid> {
    let k_hat = wave.propagation();
    let axis = complexify(&wave.polarization.axis());
    let (k0, eta0, a) = (constants.k0, constants.eta0, wave.amplitude);
    sample_aperture(lattice, quad_order, |p| {
        let e = axis * (a * Complex64::cis(-k0 * k_hat.dot(&p)));
        let h = cross_rc(&k_hat, &e) * Complex64::from(1.0 / eta0);
        (k_hat, e, h)
    })
}

pub fn illuminate(
    source: &Illumination,
    lattice: &ApertureLattice,
    quad_order: usize,
    constants: &PhysicalConstants,
) -> Result<IncidentFieldGrid> {
    match source {
        Illumination::Horn { placement, horn } => {
            incident_field_on_aperture(placement, horn, lattice, quad_order, constants)
        }
        Illumination::PlaneWave(w) => plane_wave_on_aperture(w, lattice, quad_order, constants),
    }
}

/// Per-cell average of (F + Γ·F)/2 for the electric and magnetic fields.
pub fn surface_averaged_field(
    grid: &IncidentFieldGrid,
    reflection: &[ReflectionTensor],
) -> Result<(Vec<CVec3>, Vec<CVec3>)> {
    if reflection.len() != grid.e_cells.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} reflection tensors for {} cells",
            reflection.len(),
            grid.e_cells.len()
        )));
    }
    let avg = |c: &CellProjection, g: &ReflectionTensor| -> CVec3 {
        let reflected = c.proj[0] * g.gamma_pp
            + c.proj[1] * g.gamma_ps
            + c.proj[2] * g.gamma_sp
            + c.proj[3] * g.gamma_ss;
        (c.mean + reflected) * Complex64::from(0.5)
    };
    let e = grid.e_cells.iter().zip(reflection).map(|(c, g)| avg(c, g)).collect();
    let h = grid.h_cells.iter().zip(reflection).map(|(c, g)| avg(c, g)).collect();
    Ok((e, h))
}
