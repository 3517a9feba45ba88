//! Coordinates, aperture lattice and radiative-region radii.

use nalgebra::Vector3;
use std::f64::consts::{PI, TAU};

use crate::{Error, Result};

/// Point in spherical coordinates about the aperture center.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SphericalPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    /// Builds a point, folding `phi` into [0, 2π).
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::OutOfRange { what: "theta", value: theta, min: 0.0, max: PI });
        }
        if !phi.is_finite() {
            return Err(Error::InvalidArgument("phi must be finite".into()));
        }
        Ok(Self { r, theta, phi: fold_phi(phi) })
    }

    /// Point on a planar cut where negative `theta` means the opposite half plane.
    pub fn on_cut(r: f64, signed_theta: f64, phi_cut: f64) -> Result<Self> {
        if signed_theta < 0.0 {
            Self::new(r, -signed_theta, phi_cut + PI)
        } else {
            Self::new(r, signed_theta, phi_cut)
        }
    }

    pub fn from_cartesian(p: Vector3<f64>) -> Result<Self> {
        let r = p.norm();
        if r == 0.0 {
            return Err(Error::InvalidArgument("point at the origin has no direction".into()));
        }
        let theta = (p.z / r).clamp(-1.0, 1.0).acos();
        Self::new(r, theta, p.y.atan2(p.x))
    }

    pub fn to_cartesian(&self) -> Vector3<f64> {
        self.r_hat() * self.r
    }

    pub fn direction(&self) -> DirectionCosines {
        direction_cosines(self.theta, self.phi)
    }

    pub fn r_hat(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    pub fn theta_hat(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(ct * cp, ct * sp, -st)
    }

    pub fn phi_hat(&self) -> Vector3<f64> {
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(-sp, cp, 0.0)
    }
}

fn fold_phi(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// Direction cosines (u, v, w) of a unit vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionCosines {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl DirectionCosines {
    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.u, self.v, self.w)
    }
}

pub fn direction_cosines(theta: f64, phi: f64) -> DirectionCosines {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    DirectionCosines { u: st * cp, v: st * sp, w: ct }
}

/// Uniform M×N grid of meta-atoms centered on the origin in the z=0 plane.
///
/// Cells are stored row-major with `m` running along x: flat index `m * n_count + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureLattice {
    pub m_count: usize,
    pub n_count: usize,
    pub dx: f64,
    pub dy: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub side_length: f64,
    pub diameter: f64,
}

impl ApertureLattice {
    pub fn cell_count(&self) -> usize {
        self.m_count * self.n_count
    }

    pub fn index(&self, m: usize, n: usize) -> usize {
        m * self.n_count + n
    }

    pub fn center(&self, idx: usize) -> (f64, f64) {
        (self.x[idx / self.n_count], self.y[idx % self.n_count])
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn centers(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().flat_map(move |&x| self.y.iter().map(move |&y| (x, y)))
    }
}

pub fn build_lattice(m: usize, n: usize, dx: f64, dy: f64) -> Result<ApertureLattice> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("cell counts must be positive, got {m}x{n}")));
    }
    if !(dx.is_finite() && dx > 0.0 && dy.is_finite() && dy > 0.0) {
        return Err(Error::InvalidArgument(format!("cell pitch must be positive, got ({dx}, {dy})")));
    }
    let axis = |count: usize, d: f64| -> Vec<f64> {
        let mid = (count as f64 + 1.0) / 2.0;
        (1..=count).map(|i| (i as f64 - mid) * d).collect()
    };
    let lx = m as f64 * dx;
    let ly = n as f64 * dy;
    Ok(ApertureLattice {
        m_count: m,
        n_count: n,
        dx,
        dy,
        x: axis(m, dx),
        y: axis(n, dy),
        side_length: lx.max(ly),
        diameter: lx.hypot(ly),
    })
}

/// Inner radius of the radiative near field and of the far field.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RegionBoundaries {
    pub r_nf: f64,
    pub r_ff: f64,
}

pub fn region_boundaries(lattice: &ApertureLattice, lambda0: f64) -> RegionBoundaries {
    let d = lattice.diameter;
    let floor = (10.0 * d).max(10.0 * lambda0);
    RegionBoundaries {
        r_nf: floor.max(0.62 * (d.powi(3) / lambda0).sqrt()),
        r_ff: floor.max(2.0 * d * d / lambda0),
    }
}
