//! Toroidal coordinates `(eta, theta, phi)` with focal radius `a`.

use crate::error::{Error, Result};
use crate::scalar::{wrap_pi, wrap_two_pi, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianPoint<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> CartesianPoint<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(v: [T; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn distance(&self, other: &Self) -> T {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn offset(&self, d: [T; 3]) -> Self {
        Self::new(self.x + d[0], self.y + d[1], self.z + d[2])
    }
}

/// Point in toroidal coordinates. `theta` is kept in `(-π, π]` and `phi`
/// in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToroidalPoint<T> {
    eta: T,
    theta: T,
    phi: T,
}

impl<T: Scalar> ToroidalPoint<T> {
    pub fn new(eta: T, theta: T, phi: T) -> Result<Self> {
        if !(eta.is_finite() && theta.is_finite() && phi.is_finite()) {
            return Err(Error::Domain("non-finite toroidal coordinate".into()));
        }
        if eta < T::zero() {
            return Err(Error::Domain(format!("eta = {} is negative", eta)));
        }
        Ok(Self { eta, theta: wrap_pi(theta), phi: wrap_two_pi(phi) })
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    /// `cosh(eta) - cos(theta)`, written to avoid cancellation near the
    /// point at infinity.
    pub fn denominator(&self) -> T {
        let sh = (self.eta * T::half()).sinh();
        let sn = (self.theta * T::half()).sin();
        T::two() * (sh * sh + sn * sn)
    }
}

pub fn toroidal_to_cartesian<T: Scalar>(tp: &ToroidalPoint<T>, a: T) -> Result<CartesianPoint<T>> {
    let c = tp.denominator();
    if c <= T::zero() {
        return Err(Error::Domain("point at infinity (eta = 0, theta = 0)".into()));
    }
    let r = a * tp.eta.sinh() / c;
    Ok(CartesianPoint::new(r * tp.phi.cos(), r * tp.phi.sin(), a * tp.theta.sin() / c))
}

pub fn cartesian_to_toroidal<T: Scalar>(p: &CartesianPoint<T>, a: T) -> Result<ToroidalPoint<T>> {
    let rho = p.x.hypot(p.y);
    let z = p.z;
    let d2 = (rho - a) * (rho - a) + z * z;
    let dist = d2.sqrt();
    if dist < T::c(1e-9) * a {
        return Err(Error::FocalRing { distance: dist.as_f64() });
    }
    let four = T::c(4.0);
    let eta = T::half() * (four * a * rho / d2).ln_1p();
    let theta = (T::two() * a * z).atan2(rho * rho + z * z - a * a);
    let phi = p.y.atan2(p.x);
    ToroidalPoint::new(eta, theta, phi)
}

/// Scale factors `(h1, h2, h3)` and the volume element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricFactors<T> {
    pub h1: T,
    pub h2: T,
    pub h3: T,
    pub volume: T,
}

pub fn metric_factors<T: Scalar>(tp: &ToroidalPoint<T>, a: T) -> MetricFactors<T> {
    let h = a / tp.denominator();
    let h3 = h * tp.eta.sinh();
    MetricFactors { h1: h, h2: h, h3, volume: h * h * h3 }
}

/// Cartesian components of the unit vectors `e_eta`, `e_theta`, `e_phi`
/// (rows of the direction-cosine matrix). Right-handed.
pub fn basis_vectors<T: Scalar>(tp: &ToroidalPoint<T>) -> Result<[[T; 3]; 3]> {
    if tp.eta == T::zero() {
        return Err(Error::AxisDegenerate { eta: 0.0 });
    }
    let c = tp.denominator();
    let (she, che) = (tp.eta.sinh(), tp.eta.cosh());
    let (st, ct) = tp.theta.sin_cos();
    let (sp, cp) = tp.phi.sin_cos();
    let u = (T::one() - che * ct) / c;
    let v = she * st / c;
    let w = (che * ct - T::one()) / c;
    Ok([
        [u * cp, u * sp, -v],
        [-v * cp, -v * sp, w],
        [-sp, cp, T::zero()],
    ])
}
