use crate::error::{Error, Result};
use crate::geometry::CartesianPoint;
use crate::harmonics::elliptic_ke;
use crate::knot_source::KnotSpec;
use crate::quadrature::AdaptiveQuadrature;
use crate::scalar::{cross3, Scalar};

fn line_quadrature<T: Scalar>(spec: &KnotSpec<T>, tol: T) -> AdaptiveQuadrature<T> {
    let windings = (spec.p().unsigned_abs() + spec.q().unsigned_abs()) as usize;
    AdaptiveQuadrature::new(15, tol).with_initial_panels(8 * windings)
}

fn check_distance<T: Scalar>(x: &CartesianPoint<T>, spec: &KnotSpec<T>) -> Result<()> {
    let d = spec.distance_to(x);
    if d < T::c(1e-6) * spec.focal_radius() {
        return Err(Error::TooCloseToSource { distance: d.as_f64() });
    }
    Ok(())
}

/// `H(x) = m ∮ (dr'/ds) / |x - r'| ds`.
pub fn hertz_oracle<T: Scalar>(x: &CartesianPoint<T>, spec: &KnotSpec<T>, quad_tol: T) -> Result<[T; 3]> {
    check_distance(x, spec)?;
    let m = spec.dipole_density();
    let v = line_quadrature(spec, quad_tol).integrate3(
        |s| {
            let r = spec.position(s);
            let d = x.distance(&r);
            spec.velocity(s).map(|c| c / d)
        },
        T::zero(),
        T::TAU(),
    )?;
    Ok(v.map(|c| c * m))
}

/// `A(x) = m ∮ (dr'/ds) × (x - r') / |x - r'|^3 ds`.
pub fn vector_potential_oracle<T: Scalar>(x: &CartesianPoint<T>, spec: &KnotSpec<T>, quad_tol: T) -> Result<[T; 3]> {
    check_distance(x, spec)?;
    let m = spec.dipole_density();
    let v = line_quadrature(spec, quad_tol).integrate3(
        |s| {
            let r = spec.position(s);
            let sep = [x.x - r.x, x.y - r.y, x.z - r.z];
            let d = x.distance(&r);
            let inv = T::one() / (d * d * d);
            cross3(&spec.velocity(s), &sep).map(|c| c * inv)
        },
        T::zero(),
        T::TAU(),
    )?;
    Ok(v.map(|c| c * m))
}

/// Field of a ring of radius `b` in the plane `z = 0`, carrying `current`
/// counter-clockwise about `+z`, in the same units as
/// [`vector_potential_oracle`].
pub fn unknot_closed_form<T: Scalar>(x: &CartesianPoint<T>, b: T, current: T) -> Result<[T; 3]> {
    let rho = x.x.hypot(x.y);
    let z = x.z;
    let near = (b - rho) * (b - rho) + z * z;
    if near.sqrt() < T::c(1e-12) * b {
        return Err(Error::OnRing);
    }
    if rho < T::c(1e-9) * b {
        let axial = T::TAU() * current * b * b / (b * b + z * z).powf(T::c(1.5));
        return Ok([T::zero(), T::zero(), axial]);
    }
    let far = (b + rho) * (b + rho) + z * z;
    let k = (T::c(4.0) * b * rho / far).sqrt();
    let (kk, ee) = elliptic_ke(k)?;
    let root = far.sqrt();
    let bz = T::two() * current / root * (kk + (b * b - rho * rho - z * z) / near * ee);
    let br = T::two() * current * z / (rho * root) * (-kk + (b * b + rho * rho + z * z) / near * ee);
    Ok([br * x.x / rho, br * x.y / rho, bz])
}
