//! Small helpers for mixing real and complex 3-vectors.

use nalgebra::Vector3;
use num_complex::Complex64;

pub type CVec3 = Vector3<Complex64>;

pub fn complexify(v: &Vector3<f64>) -> CVec3 {
    v.map(|x| Complex64::new(x, 0.0))
}

/// Real-by-complex cross product.
pub fn cross_rc(a: &Vector3<f64>, b: &CVec3) -> CVec3 {
    CVec3::new(
        b[2] * a[1] - b[1] * a[2],
        b[0] * a[2] - b[2] * a[0],
        b[1] * a[0] - b[0] * a[1],
    )
}

/// Real-by-complex dot product without conjugation.
pub fn dot_rc(a: &Vector3<f64>, b: &CVec3) -> Complex64 {
    b[0] * a[0] + b[1] * a[1] + b[2] * a[2]
}

pub fn zero() -> CVec3 {
    CVec3::from_element(Complex64::new(0.0, 0.0))
}

pub fn norm(v: &CVec3) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt()
}
