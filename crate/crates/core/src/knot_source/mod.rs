//! Torus-knot geometry, the dipole-line source and its harmonic
//! coefficients.

mod quadrature_route;
mod spectral;
mod table;

pub use quadrature_route::coefficients_quadrature;
pub use spectral::{coefficients_spectral, mean_of_product, Wave};
pub use table::HarmonicCoefficientTable;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{basis_vectors, toroidal_to_cartesian, CartesianPoint, ToroidalPoint};
use crate::quadrature::AdaptiveQuadrature;
use crate::scalar::{norm3, Scalar};

/// Side of the knot torus `eta = eta0` on which an expansion holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// `eta < eta0`: the hole side, including the symmetry axis and infinity.
    Inside,
    /// `eta > eta0`: inside the tube, around the focal ring.
    Outside,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Inside => "inside",
            Region::Outside => "outside",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "inside" => Some(Region::Inside),
            "outside" => Some(Region::Outside),
            _ => None,
        }
    }
}

/// A `(p, q)` torus knot on the torus of major radius `R` and minor radius
/// `d`, carrying dipole density `m` along its tangent.
///
/// The knot is `theta' = q s`, `phi' = -p s` for `s` in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnotSpec<T> {
    p: i64,
    q: i64,
    major_radius: T,
    minor_radius: T,
    dipole_density: T,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl<T: Scalar> KnotSpec<T> {
    pub fn new(p: i64, q: i64, major_radius: T, minor_radius: T, dipole_density: T) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidSpec("q = 0 is only available through the unknot fixture".into()));
        }
        Self::build(p, q, major_radius, minor_radius, dipole_density)
    }

    /// The `(1, 0)` fixture: a circle of radius `R + d` in the plane `z = 0`.
    pub fn unknot(major_radius: T, minor_radius: T, dipole_density: T) -> Result<Self> {
        Self::build(1, 0, major_radius, minor_radius, dipole_density)
    }

    fn build(p: i64, q: i64, major_radius: T, minor_radius: T, dipole_density: T) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidSpec("p must be nonzero".into()));
        }
        if gcd(p, q) != 1 {
            return Err(Error::InvalidSpec(format!("p = {p} and q = {q} are not coprime")));
        }
        if !(minor_radius > T::zero() && minor_radius < major_radius && major_radius.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "radii must satisfy 0 < d < R (R = {}, d = {})",
                major_radius, minor_radius
            )));
        }
        if !dipole_density.is_finite() {
            return Err(Error::InvalidSpec("dipole density must be finite".into()));
        }
        Ok(Self { p, q, major_radius, minor_radius, dipole_density })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn is_unknot(&self) -> bool {
        self.q == 0
    }

    pub fn major_radius(&self) -> T {
        self.major_radius
    }

    pub fn minor_radius(&self) -> T {
        self.minor_radius
    }

    pub fn dipole_density(&self) -> T {
        self.dipole_density
    }

    /// Focal radius `a = sqrt(R^2 - d^2)`.
    pub fn focal_radius(&self) -> T {
        let (r, d) = (self.major_radius, self.minor_radius);
        ((r - d) * (r + d)).sqrt()
    }

    pub fn cosh_eta0(&self) -> T {
        self.major_radius / self.minor_radius
    }

    pub fn sinh_eta0(&self) -> T {
        self.focal_radius() / self.minor_radius
    }

    pub fn eta0(&self) -> T {
        (self.focal_radius() / self.minor_radius).asinh()
    }

    /// Ratio of the poloidal to toroidal tangent components.
    pub fn lambda0(&self) -> T {
        -T::int(self.q) / (T::int(self.p) * self.sinh_eta0())
    }

    pub fn sigma(&self) -> T {
        self.lambda0().atan()
    }

    /// Stable identifier of the knot, used to tag coefficient caches.
    pub fn spec_hash(&self) -> String {
        let text = format!(
            "{} {} {:.16e} {:.16e} {:.16e}",
            self.p,
            self.q,
            self.major_radius.as_f64(),
            self.minor_radius.as_f64(),
            self.dipole_density.as_f64()
        );
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn point(&self, s: T) -> ToroidalPoint<T> {
        ToroidalPoint::new(self.eta0(), T::int(self.q) * s, -T::int(self.p) * s)
            .expect("knot coordinates are finite")
    }

    pub fn position(&self, s: T) -> CartesianPoint<T> {
        let (st, ct) = (T::int(self.q) * s).sin_cos();
        let (sp, cp) = (-T::int(self.p) * s).sin_cos();
        let a = self.focal_radius();
        let c = self.cosh_eta0() - ct;
        let r = a * self.sinh_eta0() / c;
        CartesianPoint::new(r * cp, r * sp, a * st / c)
    }

    /// `dr'/ds` in Cartesian components.
    pub fn velocity(&self, s: T) -> [T; 3] {
        let tp = self.point(s);
        let e = basis_vectors(&tp).expect("eta0 is positive");
        let h = self.focal_radius() / (self.cosh_eta0() - tp.theta().cos());
        let vt = h * T::int(self.q);
        let vp = -h * self.sinh_eta0() * T::int(self.p);
        [
            vt * e[1][0] + vp * e[2][0],
            vt * e[1][1] + vp * e[2][1],
            vt * e[1][2] + vp * e[2][2],
        ]
    }

    /// Unit tangent, the dipole direction.
    pub fn tangent(&self, s: T) -> [T; 3] {
        let v = self.velocity(s);
        let n = norm3(&v);
        [v[0] / n, v[1] / n, v[2] / n]
    }

    pub fn reduced_current(&self, s: T) -> ReducedCurrent<T> {
        let h = self.focal_radius() / (self.cosh_eta0() - (T::int(self.q) * s).cos());
        let m = self.dipole_density;
        ReducedCurrent {
            s,
            j_theta: m * T::int(self.q) * h,
            j_phi: -m * T::int(self.p) * h * self.sinh_eta0(),
        }
    }

    pub fn arc_length(&self) -> Result<T> {
        let quad = AdaptiveQuadrature::new(15, T::epsilon() * T::c(1e3))
            .with_initial_panels(4 * (self.p.unsigned_abs() + self.q.unsigned_abs()) as usize);
        quad.integrate(|s| norm3(&self.velocity(s)), T::zero(), T::TAU())
    }

    /// Distance from `x` to the knot and the parameter of the closest point.
    pub fn closest_point(&self, x: &CartesianPoint<T>) -> (T, T) {
        let samples = 256 * (self.p.unsigned_abs() + self.q.unsigned_abs()) as usize;
        let step = T::TAU() / T::int(samples as i64);
        let dist = |s: T| self.position(s).distance(x);
        let mut best = (dist(T::zero()), T::zero());
        for k in 1..samples {
            let s = step * T::int(k as i64);
            let d = dist(s);
            if d < best.0 {
                best = (d, s);
            }
        }
        // golden-section refinement on the bracketing interval
        let g = (T::c(5.0).sqrt() - T::one()) * T::half();
        let (mut lo, mut hi) = (best.1 - step, best.1 + step);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (dist(x1), dist(x2));
        for _ in 0..80 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = dist(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = dist(x2);
            }
        }
        let s = (lo + hi) * T::half();
        let d = dist(s);
        if d < best.0 {
            (d, s)
        } else {
            best
        }
    }

    pub fn distance_to(&self, x: &CartesianPoint<T>) -> T {
        self.closest_point(x).0
    }

    pub fn cartesian(&self, tp: &ToroidalPoint<T>) -> Result<CartesianPoint<T>> {
        toroidal_to_cartesian(tp, self.focal_radius())
    }
}

/// Toroidal components of `m dr'/ds` along the knot. Their ratio
/// `j_theta / j_phi` is `lambda0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCurrent<T> {
    pub s: T,
    pub j_theta: T,
    pub j_phi: T,
}
