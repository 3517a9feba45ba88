//! Reflected field of the sheet currents: Fresnel closed form, far-field
//! form, and a brute-force dipole-superposition reference.

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::constants::PhysicalConstants;
use crate::geometry::{region_boundaries, DirectionCosines, SphericalPoint};
use crate::meta_atom::SurfaceCurrentGrid;
use crate::quadrature::cell_rule;
use crate::vector::{complexify, cross_rc, dot_rc, zero, CVec3};
use crate::{Error, Result};

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Spherical components of a field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub f_theta: Complex64,
    pub f_phi: Complex64,
    pub at: SphericalPoint,
    /// Set when the point lies closer than the radiative near-field radius.
    pub below_fresnel: bool,
}

impl FieldSample {
    pub fn magnitude(&self) -> f64 {
        (self.f_theta.norm_sqr() + self.f_phi.norm_sqr()).sqrt()
    }

    pub fn power(&self) -> f64 {
        self.f_theta.norm_sqr() + self.f_phi.norm_sqr()
    }
}

/// Observation points plus a two-number label per point for tabulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub points: Vec<SphericalPoint>,
    pub labels: Vec<(f64, f64)>,
}

impl ObservationSet {
    pub fn new(points: Vec<SphericalPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("observation set is empty".into()));
        }
        let labels = points.iter().map(|p| (p.theta, p.phi)).collect();
        Ok(Self { points, labels })
    }

    /// `count` points at radius `r` with signed θ evenly spaced over
    /// [-theta_max, theta_max] in the plane `phi_cut`. Labels hold (θ, 0).
    pub fn theta_cut(r: f64, phi_cut: f64, theta_max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidArgument(format!("a cut needs at least 2 points, got {count}")));
        }
        let mut points = Vec::with_capacity(count);
        let mut labels = Vec::with_capacity(count);
        for i in 0..count {
            let t = -theta_max + 2.0 * theta_max * i as f64 / (count - 1) as f64;
            points.push(SphericalPoint::on_cut(r, t, phi_cut)?);
            labels.push((t, 0.0));
        }
        Ok(Self { points, labels })
    }

    /// Square `count`×`count` grid of side `width` centered on `center`,
    /// spanned by the local θ̂ and φ̂ directions. Labels hold the offsets.
    pub fn plane(center: &SphericalPoint, width: f64, count: usize) -> Result<Self> {
        if count < 1 || !(width >= 0.0) {
            return Err(Error::InvalidArgument("plane needs at least one point and width >= 0".into()));
        }
        let c = center.to_cartesian();
        let (a, b) = (center.theta_hat(), center.phi_hat());
        let step = if count > 1 { width / (count - 1) as f64 } else { 0.0 };
        let mut points = Vec::with_capacity(count * count);
        let mut labels = Vec::with_capacity(count * count);
        for i in 0..count {
            for k in 0..count {
                let s = -0.5 * width + step * i as f64;
                let t = -0.5 * width + step * k as f64;
                points.push(SphericalPoint::from_cartesian(c + a * s + b * t)?);
                labels.push((s, t));
            }
        }
        Ok(Self { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Unnormalized sinc, sin(t)/t.
pub fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

fn element_factor(dx: f64, dy: f64, dir: &DirectionCosines, lambda0: f64) -> f64 {
    dx * dy * sinc(PI * dx * dir.u / lambda0) * sinc(PI * dy * dir.v / lambda0)
}

fn fresnel_phase(x: f64, y: f64, r: f64, dir: &DirectionCosines, lambda0: f64) -> f64 {
    let (u, v, w) = (dir.u, dir.v, dir.w);
    let cross = x * v - y * u;
    -PI / (lambda0 * r) * ((x * w).powi(2) + (y * w).powi(2) + cross * cross)
}

fn steering_phase(x: f64, y: f64, dir: &DirectionCosines, lambda0: f64) -> f64 {
    2.0 * PI / lambda0 * (x * dir.u + y * dir.v)
}

/// Closed-form aperture integral of one cell, including the quadratic phase.
pub fn gamma_coefficient(
    x: f64,
    y: f64,
    r: f64,
    dir: &DirectionCosines,
    dx: f64,
    dy: f64,
    lambda0: f64,
) -> Complex64 {
    let ph = fresnel_phase(x, y, r, dir, lambda0) + steering_phase(x, y, dir, lambda0);
    Complex64::from_polar(element_factor(dx, dy, dir, lambda0), ph)
}

/// Far-field limit of [`gamma_coefficient`].
pub fn gamma_coefficient_ff(x: f64, y: f64, dir: &DirectionCosines, dx: f64, dy: f64, lambda0: f64) -> Complex64 {
    Complex64::from_polar(element_factor(dx, dy, dir, lambda0), steering_phase(x, y, dir, lambda0))
}

/// Trig weights mapping (Jxe, Jye, Jxh, Jyh) onto the θ and φ sums.
pub(crate) fn component_weights(at: &SphericalPoint, eta0: f64) -> ([f64; 4], [f64; 4]) {
    let ct = at.theta.cos();
    let (sp, cp) = at.phi.sin_cos();
    (
        [eta0 * ct * cp, eta0 * ct * sp, -sp, cp],
        [-eta0 * sp, eta0 * cp, -ct * cp, -ct * sp],
    )
}

pub(crate) fn prefactor(r: f64, constants: &PhysicalConstants) -> Complex64 {
    -J * Complex64::cis(-constants.k0 * r) / (2.0 * constants.lambda0 * r)
}

fn closed_form(currents: &SurfaceCurrentGrid, at: &SphericalPoint, constants: &PhysicalConstants, fresnel: bool) -> FieldSample {
    let lattice = &currents.lattice;
    let dir = at.direction();
    let lambda0 = constants.lambda0;
    let (wt, wp) = component_weights(at, constants.eta0);
    let comps = currents.components();
    let mut s_theta = Complex64::new(0.0, 0.0);
    let mut s_phi = Complex64::new(0.0, 0.0);
    for (i, (x, y)) in lattice.centers().enumerate() {
        let mut ct = Complex64::new(0.0, 0.0);
        let mut cp = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            let j = comps[k][i];
            ct += j * wt[k];
            cp += j * wp[k];
        }
        if ct == Complex64::new(0.0, 0.0) && cp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut ph = steering_phase(x, y, &dir, lambda0);
        if fresnel {
            ph += fresnel_phase(x, y, at.r, &dir, lambda0);
        }
        let g = Complex64::cis(ph);
        s_theta += g * ct;
        s_phi += g * cp;
    }
    let ef = element_factor(lattice.dx, lattice.dy, &dir, lambda0);
    let pref = prefactor(at.r, constants) * ef;
    let bounds = region_boundaries(lattice, lambda0);
    FieldSample { f_theta: pref * s_theta, f_phi: pref * s_phi, at: *at, below_fresnel: at.r < bounds.r_nf }
}

/// Closed-form field valid from the radiative near field outward.
pub fn reflected_field(currents: &SurfaceCurrentGrid, obs: &SphericalPoint, constants: &PhysicalConstants) -> FieldSample {
    closed_form(currents, obs, constants, true)
}

/// Far-field form: the closed form without the quadratic phase.
pub fn reflected_field_ff(
    currents: &SurfaceCurrentGrid,
    direction: &DirectionCosines,
    r: f64,
    constants: &PhysicalConstants,
) -> Result<FieldSample> {
    let theta = direction.w.clamp(-1.0, 1.0).acos();
    let phi = direction.v.atan2(direction.u);
    let at = SphericalPoint::new(r, theta, phi)?;
    Ok(closed_form(currents, &at, constants, false))
}

/// Which predictor to evaluate over an observation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predictor {
    Fresnel,
    FarField,
}

/// Evaluates a predictor at every point, in parallel over points.
pub fn evaluate(
    currents: &SurfaceCurrentGrid,
    obs: &ObservationSet,
    predictor: Predictor,
    constants: &PhysicalConstants,
) -> Vec<FieldSample> {
    let fresnel = predictor == Predictor::Fresnel;
    obs.points.par_iter().map(|p| closed_form(currents, p, constants, fresnel)).collect()
}

/// Exact radiation of electric (`il`, A·m) and magnetic (`ml`, V·m) current
/// elements at `src`, observed at `obs`.
pub fn dipole_field(src: &Vector3<f64>, il: &CVec3, ml: &CVec3, obs: &Vector3<f64>, constants: &PhysicalConstants) -> CVec3 {
    let rv = obs - src;
    let r = rv.norm();
    let rh = rv / r;
    let kr = constants.k0 * r;
    let g = Complex64::cis(-kr) / (4.0 * PI * r);
    let inv = 1.0 / kr;
    let a = Complex64::new(1.0 - inv * inv, -inv);
    let b = Complex64::new(-1.0 + 3.0 * inv * inv, 3.0 * inv);
    let e_el = (il * a + complexify(&rh) * (dot_rc(&rh, il) * b)) * (-J * constants.omega * constants.mu0 * g);
    let e_mag = cross_rc(&rh, ml) * (J * constants.k0 * g * Complex64::new(1.0, -inv));
    e_el + e_mag
}

fn check_proximity(currents: &SurfaceCurrentGrid, p: &Vector3<f64>) -> Result<()> {
    let l = &currents.lattice;
    let hx = 0.5 * l.m_count as f64 * l.dx;
    let hy = 0.5 * l.n_count as f64 * l.dy;
    let cx = p.x.clamp(-hx, hx);
    let cy = p.y.clamp(-hy, hy);
    let d = ((p.x - cx).powi(2) + (p.y - cy).powi(2) + p.z * p.z).sqrt();
    if d < l.dx.max(l.dy) {
        return Err(Error::SingularProximity { distance: d });
    }
    Ok(())
}

/// Superposition of exact dipole fields over `subsamples_per_cell`² points per cell.
pub fn oracle_field(
    currents: &SurfaceCurrentGrid,
    obs: &SphericalPoint,
    subsamples_per_cell: usize,
    constants: &PhysicalConstants,
) -> Result<FieldSample> {
    currents.check()?;
    let l = &currents.lattice;
    let p = obs.to_cartesian();
    check_proximity(currents, &p)?;
    let rule = cell_rule(subsamples_per_cell, l.dx, l.dy)?;
    let area = l.cell_area();
    let mut total = zero();
    for (i, (x, y)) in l.centers().enumerate() {
        let je = CVec3::new(currents.je_x[i], currents.je_y[i], Complex64::new(0.0, 0.0));
        let jh = CVec3::new(currents.jh_x[i], currents.jh_y[i], Complex64::new(0.0, 0.0));
        if je == zero() && jh == zero() {
            continue;
        }
        for &(ox, oy, w) in &rule {
            let s = Complex64::from(w * area);
            let src = Vector3::new(x + ox, y + oy, 0.0);
            total += dipole_field(&src, &(je * s), &(jh * s), &p, constants);
        }
    }
    let bounds = region_boundaries(l, constants.lambda0);
    Ok(FieldSample {
        f_theta: dot_rc(&obs.theta_hat(), &total),
        f_phi: dot_rc(&obs.phi_hat(), &total),
        at: *obs,
        below_fresnel: obs.r < bounds.r_nf,
    })
}

/// Doubles the per-cell sampling from 3 until successive results agree to
/// `tol` relative. Returns the field and the sampling order used.
pub fn oracle_field_converged(
    currents: &SurfaceCurrentGrid,
    obs: &SphericalPoint,
    tol: f64,
    constants: &PhysicalConstants,
) -> Result<(FieldSample, usize)> {
    const MAX_ORDER: usize = 48;
    let mut order = 3;
    let mut prev = oracle_field(currents, obs, order, constants)?;
    loop {
        let next_order = order * 2;
        let next = oracle_field(currents, obs, next_order, constants)?;
        let diff = ((next.f_theta - prev.f_theta).norm_sqr() + (next.f_phi - prev.f_phi).norm_sqr()).sqrt();
        let scale = next.magnitude();
        if diff <= tol * scale || scale == 0.0 || next_order >= MAX_ORDER {
            return Ok((next, next_order));
        }
        prev = next;
        order = next_order;
    }
}

/// Self-converged oracle over a whole observation set, in parallel over points.
///
/// The sampling order is converged on the set as a whole, so every point
/// uses the same order.
pub fn oracle_cut(
    currents: &SurfaceCurrentGrid,
    obs: &ObservationSet,
    tol: f64,
    constants: &PhysicalConstants,
) -> Result<(Vec<FieldSample>, usize)> {
    let run = |order: usize| -> Result<Vec<FieldSample>> {
        obs.points.par_iter().map(|p| oracle_field(currents, p, order, constants)).collect()
    };
    let mut order = 3;
    let mut prev = run(order)?;
    loop {
        let next = run(order * 2)?;
        order *= 2;
        let scale = next.iter().map(|s| s.magnitude()).fold(0.0, f64::max);
        let diff = next
            .iter()
            .zip(&prev)
            .map(|(a, b)| ((a.f_theta - b.f_theta).norm_sqr() + (a.f_phi - b.f_phi).norm_sqr()).sqrt())
            .fold(0.0, f64::max);
        if diff <= tol * scale || scale == 0.0 || order >= 48 {
            return Ok((next, order));
        }
        prev = next;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionErrorMap {
    pub values: Vec<f64>,
}

impl PredictionErrorMap {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Squared co-polar magnitude error per point, normalized by the peak
/// squared reference magnitude.
pub fn prediction_error_map(predicted: &[FieldSample], reference: &[FieldSample]) -> Result<PredictionErrorMap> {
    if predicted.len() != reference.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predicted vs {} reference points",
            predicted.len(),
            reference.len()
        )));
    }
    let peak = reference.iter().map(|s| s.f_phi.norm_sqr()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::ZeroReference);
    }
    let values = predicted
        .iter()
        .zip(reference)
        .map(|(p, r)| (p.f_phi.norm() - r.f_phi.norm()).powi(2) / peak)
        .collect();
    Ok(PredictionErrorMap { values })
}

/// Largest co-polar magnitude difference over a set, relative to the
/// reference peak.
pub fn max_copolar_deviation(predicted: &[FieldSample], reference: &[FieldSample]) -> Result<f64> {
    Ok(prediction_error_map(predicted, reference)?.max().sqrt())
}
