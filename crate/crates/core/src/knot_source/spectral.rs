//! Coefficients from the Heine expansion of the source weight: every
//! integral over the knot reduces to exact means of trigonometric
//! products with integer frequencies.

use rayon::prelude::*;

use super::{HarmonicCoefficientTable, KnotSpec, Region};
use crate::error::Result;
use crate::harmonics::{HarmonicKind, HarmonicTable, TruncationPolicy};
use crate::scalar::{neumann, Scalar};

/// `cos(k s)` or `sin(k s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wave {
    Cos(i64),
    Sin(i64),
}

impl Wave {
    fn freq(self) -> i64 {
        match self {
            Wave::Cos(k) | Wave::Sin(k) => k,
        }
    }
}

/// Exact value of `(1/2π) ∫_0^{2π} ∏ factors ds`.
pub fn mean_of_product(factors: &[Wave]) -> f64 {
    let sines = factors.iter().filter(|w| matches!(w, Wave::Sin(_))).count();
    if sines % 2 == 1 {
        return 0.0;
    }
    let mut count: i64 = 0;
    for mask in 0u32..(1 << factors.len()) {
        let mut freq = 0;
        let mut sign = 1;
        for (j, w) in factors.iter().enumerate() {
            let minus = mask >> j & 1 == 1;
            freq += if minus { -w.freq() } else { w.freq() };
            if minus && matches!(w, Wave::Sin(_)) {
                sign = -sign;
            }
        }
        if freq == 0 {
            count += sign;
        }
    }
    let phase = if (sines / 2) % 2 == 0 { 1.0 } else { -1.0 };
    phase * count as f64 / (1u64 << factors.len()) as f64
}

/// Values of `r` for which `cos(q r s)` can cancel the frequencies of
/// `others`.
fn resonant_orders(others: &[Wave], q: i64, out: &mut Vec<usize>) {
    for mask in 0u32..(1 << others.len()) {
        let mut freq = 0i64;
        for (j, w) in others.iter().enumerate() {
            freq += if mask >> j & 1 == 1 { -w.freq() } else { w.freq() };
        }
        if freq % q == 0 {
            out.push((freq / q).unsigned_abs() as usize);
        }
    }
}

struct SourceSums<T> {
    q: Vec<T>,
    dq: Vec<T>,
}

/// Coefficient table for `region` from the Heine route.
pub fn coefficients_spectral<T: Scalar>(
    spec: &KnotSpec<T>,
    region: Region,
    policy: &TruncationPolicy,
) -> Result<HarmonicCoefficientTable<T>> {
    policy.validate()?;
    let (n_max, m_max) = (policy.n_max, policy.m_max);
    let (p, q) = (spec.p(), spec.q());
    let eta0 = spec.eta0();
    let a = spec.focal_radius();
    let sh = spec.sinh_eta0();
    let lambda = spec.cosh_eta0();
    let lam0 = spec.lambda0();
    let mut table = HarmonicCoefficientTable::zeroed(region, n_max, m_max, a, eta0, spec.spec_hash());

    let kind = match region {
        Region::Outside => HarmonicKind::FirstKind,
        Region::Inside => HarmonicKind::SecondKind,
    };
    let src = HarmonicTable::new(kind, eta0, n_max, m_max)?;
    for m in 0..=m_max {
        table.row_scale[m] = src.row_scale(m);
    }

    // Q_{r-1/2}(cosh eta0) and its eta-derivative
    let sums = if q == 0 {
        let half = eta0 * T::half();
        let s = half.sinh();
        SourceSums {
            q: vec![T::PI() / (T::two() * s)],
            dq: vec![-T::PI() * half.cosh() / (T::c(4.0) * s * s)],
        }
    } else {
        let r_max = (q.unsigned_abs() as usize * n_max + p.unsigned_abs() as usize * (m_max + 1)) / q.unsigned_abs() as usize + 2;
        let qt = HarmonicTable::second_kind(eta0, r_max, 0)?;
        let mut sq = Vec::with_capacity(r_max + 1);
        let mut sdq = Vec::with_capacity(r_max + 1);
        for r in 0..=r_max {
            let f = qt.log_scale(r, 0).exp();
            sq.push(qt.mantissa(r, 0) * f);
            sdq.push(qt.deriv_mantissa(r, 0) * f);
        }
        SourceSums { q: sq, dq: sdq }
    };

    let pref = T::SQRT_2() * a / T::PI() * sh * T::int(p) * spec.dipole_density() * T::TAU();
    let width = n_max + 1;
    let rows: Vec<Vec<[T; 4]>> = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let mut row = vec![[T::zero(); 4]; 3 * width];
            let mut rs = Vec::new();
            for n in 0..=n_max {
                let z_src = src.mantissa(n, m);
                for v in 0..4 {
                    let mw = if v < 2 { Wave::Cos(-p * m as i64) } else { Wave::Sin(-p * m as i64) };
                    let nw = if v % 2 == 0 { Wave::Cos(q * n as i64) } else { Wave::Sin(q * n as i64) };
                    for i in 0..3 {
                        let (ifac, jfac, jsign): (Vec<Wave>, Vec<Wave>, f64) = match i {
                            0 => (vec![Wave::Cos(-p), Wave::Sin(q), mw, nw], vec![Wave::Sin(-p), mw, nw], 1.0),
                            1 => (vec![Wave::Sin(-p), Wave::Sin(q), mw, nw], vec![Wave::Cos(-p), mw, nw], -1.0),
                            _ => (vec![mw, nw], vec![], 0.0),
                        };
                        let sum = if q == 0 {
                            let im = mean_of_product(&ifac);
                            let jm = mean_of_product(&jfac);
                            combine(i, im, jm, jsign, sums.dq[0], sums.q[0], lam0, sh, lambda)
                        } else {
                            rs.clear();
                            resonant_orders(&ifac, q, &mut rs);
                            if i < 2 {
                                resonant_orders(&jfac, q, &mut rs);
                            }
                            rs.sort_unstable();
                            rs.dedup();
                            let mut acc = T::zero();
                            for &r in rs.iter() {
                                let mut fi = ifac.clone();
                                fi.push(Wave::Cos(q * r as i64));
                                let mut fj = jfac.clone();
                                fj.push(Wave::Cos(q * r as i64));
                                let im = mean_of_product(&fi);
                                let jm = if i < 2 { mean_of_product(&fj) } else { 0.0 };
                                let term = combine(i, im, jm, jsign, sums.dq[r], sums.q[r], lam0, sh, lambda);
                                acc = acc + neumann::<T>(r) * term;
                            }
                            acc
                        };
                        row[i * width + n][v] = pref * z_src * sum;
                    }
                }
            }
            row
        })
        .collect::<Vec<_>>();
    for (m, row) in rows.into_iter().enumerate() {
        for i in 0..3 {
            for n in 0..=n_max {
                let k = table.index(i, n, m);
                table.entries[k] = row[i * width + n];
            }
        }
    }
    Ok(table)
}

/// `S1 I + S2 J` for one component, given the exact means. For the `z`
/// component `im` is the plain mean `T` with `I = -T`, `J = -cosh sinh T`.
#[allow(clippy::too_many_arguments)]
fn combine<T: Scalar>(i: usize, im: f64, jm: f64, jsign: f64, dq: T, q: T, lam0: T, sh: T, lambda: T) -> T {
    let s1 = -T::two() * lam0 * dq;
    if i < 2 {
        s1 * T::c(im) + q * T::c(jsign * jm)
    } else {
        let t = T::c(im);
        sh * s1 * (-t) + (-lam0 / sh) * q * (-lambda * sh * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_means() {
        assert_eq!(mean_of_product(&[]), 1.0);
        assert_eq!(mean_of_product(&[Wave::Cos(0)]), 1.0);
        assert_eq!(mean_of_product(&[Wave::Cos(3), Wave::Cos(3)]), 0.5);
        assert_eq!(mean_of_product(&[Wave::Sin(2), Wave::Sin(2)]), 0.5);
        assert_eq!(mean_of_product(&[Wave::Sin(2), Wave::Sin(-2)]), -0.5);
        assert_eq!(mean_of_product(&[Wave::Sin(1), Wave::Cos(1)]), 0.0);
        // sin a sin b cos(a+b) = -1/4 on average when a, b, a+b are nonzero
        assert_eq!(mean_of_product(&[Wave::Sin(2), Wave::Sin(3), Wave::Cos(5)]), -0.25);
    }

    #[test]
    fn means_match_sampling() {
        let f = [Wave::Cos(2), Wave::Sin(-3), Wave::Sin(4), Wave::Cos(1), Wave::Cos(0)];
        let n = 64;
        let mut acc = 0.0;
        for k in 0..n {
            let s = std::f64::consts::TAU * k as f64 / n as f64;
            acc += f
                .iter()
                .map(|w| match *w {
                    Wave::Cos(j) => (j as f64 * s).cos(),
                    Wave::Sin(j) => (j as f64 * s).sin(),
                })
                .product::<f64>();
        }
        assert!((acc / n as f64 - mean_of_product(&f)).abs() < 1e-15);
    }
}
