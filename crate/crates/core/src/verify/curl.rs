use crate::error::Result;
use crate::geometry::CartesianPoint;
use crate::scalar::Scalar;

/// Central-difference curl of a Cartesian vector field with step `h`.
pub fn fd_curl<T, F>(field: F, x: &CartesianPoint<T>, h: T) -> Result<[T; 3]>
where
    T: Scalar,
    F: Fn(&CartesianPoint<T>) -> Result<[T; 3]>,
{
    let mut d = [[T::zero(); 3]; 3];
    for k in 0..3 {
        let mut step = [T::zero(); 3];
        step[k] = h;
        let plus = field(&x.offset(step))?;
        step[k] = -h;
        let minus = field(&x.offset(step))?;
        for i in 0..3 {
            // d[k][i] = dA_i / dx_k
            d[k][i] = (plus[i] - minus[i]) / (T::two() * h);
        }
    }
    Ok([d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curl_of_linear_field() {
        // A = (-y, x, 0) has curl (0, 0, 2)
        let f = |p: &CartesianPoint<f64>| Ok([-p.y, p.x, 0.0]);
        let c = fd_curl(f, &CartesianPoint::new(0.3, -1.0, 2.0), 1e-3).unwrap();
        assert!((c[0]).abs() < 1e-12 && (c[1]).abs() < 1e-12 && (c[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_is_curl_free() {
        let f = |p: &CartesianPoint<f64>| {
            let r3 = (p.x * p.x + p.y * p.y + p.z * p.z).powf(1.5);
            Ok([p.x / r3, p.y / r3, p.z / r3])
        };
        let c = fd_curl(f, &CartesianPoint::new(0.7, 0.2, -0.4), 1e-4).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-7));
    }
}
