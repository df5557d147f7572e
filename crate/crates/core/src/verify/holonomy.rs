use rayon::prelude::*;

use super::oracles::vector_potential_oracle;
use crate::error::{Error, Result};
use crate::field::FlatConnection;
use crate::geometry::{cartesian_to_toroidal, CartesianPoint};
use crate::knot_source::KnotSpec;
use crate::quadrature::AdaptiveQuadrature;
use crate::scalar::{cross3, dot3, norm3, Scalar};

/// Closed polygonal loop. The last sample joins the first; `orientation`
/// of `-1` traverses the samples in reverse.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopPath<T> {
    samples: Vec<CartesianPoint<T>>,
    orientation: i8,
}

impl<T: Scalar> LoopPath<T> {
    pub fn new(samples: Vec<CartesianPoint<T>>, orientation: i8) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::Domain("a loop needs at least three points".into()));
        }
        if orientation != 1 && orientation != -1 {
            return Err(Error::Domain(format!("orientation {orientation} is not +1 or -1")));
        }
        Ok(Self { samples, orientation })
    }

    /// Regular polygon with `n` vertices on the circle
    /// `center + radius (cos t u + sin t v)`, traversed with increasing `t`.
    pub fn circle(center: CartesianPoint<T>, u: [T; 3], v: [T; 3], radius: T, n: usize) -> Result<Self> {
        let samples = (0..n)
            .map(|k| {
                let t = T::TAU() * T::int(k as i64) / T::int(n as i64);
                let (s, c) = t.sin_cos();
                center.offset([0, 1, 2].map(|i| radius * (c * u[i] + s * v[i])))
            })
            .collect();
        Self::new(samples, 1)
    }

    /// Small circle around the knot at parameter `s`, right-handed about the
    /// knot tangent, so that it links the knot once.
    pub fn meridian(spec: &KnotSpec<T>, s: T, radius: T, n: usize) -> Result<Self> {
        let t = spec.tangent(s);
        let pick = if t[2].abs() < T::c(0.9) { [T::zero(), T::zero(), T::one()] } else { [T::one(), T::zero(), T::zero()] };
        let u0 = cross3(&t, &pick);
        let nu = norm3(&u0);
        let u = u0.map(|c| c / nu);
        let v = cross3(&t, &u);
        Self::circle(spec.position(s), u, v, radius, n)
    }

    /// The same loop traversed `times` times.
    pub fn repeated(&self, times: usize) -> Self {
        let mut samples = Vec::with_capacity(self.samples.len() * times);
        for _ in 0..times {
            samples.extend_from_slice(&self.samples);
        }
        Self { samples, orientation: self.orientation }
    }

    pub fn reversed(&self) -> Self {
        Self { samples: self.samples.clone(), orientation: -self.orientation }
    }

    pub fn samples(&self) -> &[CartesianPoint<T>] {
        &self.samples
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    /// Directed segments in traversal order.
    pub fn segments(&self) -> Vec<(CartesianPoint<T>, [T; 3])> {
        let n = self.samples.len();
        let mut segs: Vec<_> = (0..n)
            .map(|k| {
                let (a, b) = (self.samples[k], self.samples[(k + 1) % n]);
                (a, [b.x - a.x, b.y - a.y, b.z - a.z])
            })
            .collect();
        if self.orientation < 0 {
            segs = segs
                .into_iter()
                .rev()
                .map(|(a, d)| (a.offset(d), d.map(|c| -c)))
                .collect();
        }
        segs
    }

    /// Approximate closest approach between the loop and the knot.
    pub fn distance_to_knot(&self, spec: &KnotSpec<T>) -> T {
        let per_segment = 8;
        let mut best = (T::infinity(), self.samples[0]);
        for (a, d) in self.segments() {
            for j in 0..per_segment {
                let t = T::int(j) / T::int(per_segment);
                let x = a.offset(d.map(|c| c * t));
                let dist = spec.distance_to(&x);
                if dist < best.0 {
                    best = (dist, x);
                }
            }
        }
        best.0
    }

    pub fn check_clearance(&self, spec: &KnotSpec<T>, minimum: T) -> Result<()> {
        let d = self.distance_to_knot(spec);
        if d < minimum {
            return Err(Error::LoopTooCloseToSource { distance: d.as_f64(), minimum: minimum.as_f64() });
        }
        Ok(())
    }
}

/// `∮ A · dl` along the polygon, segment by segment with adaptive
/// Gauss-Legendre panels.
pub fn holonomy<T, F>(path: &LoopPath<T>, field: F, quad_tol: T) -> Result<T>
where
    T: Scalar,
    F: Fn(&CartesianPoint<T>) -> Result<[T; 3]> + Sync,
{
    let parts: Vec<Result<T>> = path
        .segments()
        .par_iter()
        .map(|(a, d)| {
            let mid = field(&a.offset(d.map(|c| c * T::half())))?;
            let scale = norm3(&mid) * norm3(d);
            let quad = AdaptiveQuadrature::new(15, quad_tol).with_abs_tol(quad_tol * scale);
            quad.integrate_vec(
                |t, out| match field(&a.offset(d.map(|c| c * t))) {
                    Ok(v) => out[0] = dot3(&v, d),
                    Err(_) => out[0] = T::nan(),
                },
                T::zero(),
                T::one(),
                1,
            )
            .map(|v| v[0])
            .map_err(|e| match e {
                Error::QuadratureFailure(msg) => match field(&a.offset(d.map(|c| c * T::half()))) {
                    Err(inner) => inner,
                    Ok(_) => Error::QuadratureFailure(msg),
                },
                other => other,
            })
        })
        .collect();
    let mut total = T::zero();
    for p in parts {
        total = total + p?;
    }
    Ok(total)
}

/// Gauss linking integral between the loop and the knot, as a real number.
pub fn gauss_linking_value<T: Scalar>(path: &LoopPath<T>, spec: &KnotSpec<T>, quad_tol: T) -> Result<T> {
    let windings = (spec.p().unsigned_abs() + spec.q().unsigned_abs()) as usize;
    let inner = AdaptiveQuadrature::new(15, quad_tol).with_initial_panels(8 * windings);
    let parts: Vec<Result<T>> = path
        .segments()
        .par_iter()
        .map(|(a, d)| {
            let outer = AdaptiveQuadrature::new(15, quad_tol).with_abs_tol(quad_tol * T::c(1e-3));
            let mut failure = None;
            let v = outer.integrate(
                |t| {
                    let r1 = a.offset(d.map(|c| c * t));
                    let got = inner.integrate(
                        |s| {
                            let r2 = spec.position(s);
                            let sep = [r1.x - r2.x, r1.y - r2.y, r1.z - r2.z];
                            let dist = norm3(&sep);
                            dot3(&sep, &cross3(d, &spec.velocity(s))) / (dist * dist * dist)
                        },
                        T::zero(),
                        T::TAU(),
                    );
                    match got {
                        Ok(v) => v,
                        Err(e) => {
                            failure = Some(e);
                            T::zero()
                        }
                    }
                },
                T::zero(),
                T::one(),
            )?;
            match failure {
                Some(e) => Err(e),
                None => Ok(v),
            }
        })
        .collect();
    let mut total = T::zero();
    for p in parts {
        total = total + p?;
    }
    Ok(total / (T::c(4.0) * T::PI()))
}

/// Gauss linking number of the loop with the knot.
pub fn gauss_linking<T: Scalar>(path: &LoopPath<T>, spec: &KnotSpec<T>) -> Result<i64> {
    path.check_clearance(spec, T::c(0.05) * spec.focal_radius())?;
    let v = gauss_linking_value(path, spec, T::c(1e-8))?;
    let k = v.round();
    if (v - k).abs() > T::c(0.1) {
        return Err(Error::AmbiguousLinking { value: v.as_f64() });
    }
    Ok(k.to_i64().unwrap_or(0))
}

/// Source of `A` for loop integrals.
#[derive(Debug, Clone, Copy)]
pub enum Evaluator<'a, T> {
    /// Harmonic series; fails inside the excluded band.
    Series(&'a FlatConnection<T>),
    /// Direct line integral over the knot.
    Oracle { spec: &'a KnotSpec<T>, tol: T },
    /// Series where `|eta - eta0| > min_gap`, line integral elsewhere.
    Hybrid { connection: &'a FlatConnection<T>, min_gap: T, tol: T },
}

impl<T: Scalar> Evaluator<'_, T> {
    pub fn potential(&self, x: &CartesianPoint<T>) -> Result<[T; 3]> {
        match self {
            Evaluator::Series(c) => c.connection_cartesian(x),
            Evaluator::Oracle { spec, tol } => vector_potential_oracle(x, spec, *tol),
            Evaluator::Hybrid { connection, min_gap, tol } => {
                let spec = connection.spec();
                let tp = cartesian_to_toroidal(x, spec.focal_radius());
                match tp {
                    Ok(tp) if (tp.eta() - spec.eta0()).abs() > *min_gap => connection.connection_cartesian(x),
                    _ => vector_potential_oracle(x, spec, *tol),
                }
            }
        }
    }
}

/// Loop integral together with the topological prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolonomyReport<T> {
    pub value: T,
    pub flux: T,
    pub linking: i64,
    /// `|value - flux * linking| / |flux|`.
    pub residual: T,
}

impl<T: Scalar> HolonomyReport<T> {
    pub fn compute<F>(path: &LoopPath<T>, spec: &KnotSpec<T>, field: F, flux: T, quad_tol: T) -> Result<Self>
    where
        F: Fn(&CartesianPoint<T>) -> Result<[T; 3]> + Sync,
    {
        path.check_clearance(spec, T::c(0.05) * spec.focal_radius())?;
        let value = holonomy(path, field, quad_tol)?;
        let linking = gauss_linking(path, spec)?;
        let residual = (value - flux * T::int(linking)).abs() / flux.abs();
        Ok(Self { value, flux, linking, residual })
    }
}
