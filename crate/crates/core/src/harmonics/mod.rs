//! Toroidal harmonics: half-integer Legendre functions, the Heine identity
//! and the expansion of the Newtonian kernel.

mod elliptic;
mod legendre;

pub use elliptic::{elliptic_e, elliptic_k, elliptic_ke, elliptic_ke_complement};
pub use legendre::{HarmonicKind, HarmonicTable, HarmonicValue};

use crate::error::{Error, Result};
use crate::geometry::ToroidalPoint;
use crate::scalar::{neumann, Scalar};

/// Series truncation limits shared by every expansion in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub n_max: usize,
    pub m_max: usize,
    /// Relative size of the estimated remainder that counts as converged.
    pub tail_tol: f64,
    /// Upper bound on `n_max` and `m_max`.
    pub hard_cap: usize,
    /// Half-width of the excluded band around the knot torus, in eta.
    pub eta_band: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { n_max: 384, m_max: 320, tail_tol: 1e-10, hard_cap: 512, eta_band: 0.05 }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::InvalidPolicy(format!("tail_tol {} must lie in (0, 1)", self.tail_tol)));
        }
        if !(self.eta_band > 0.0 && self.eta_band.is_finite()) {
            return Err(Error::InvalidPolicy(format!("eta_band {} must be positive", self.eta_band)));
        }
        if self.n_max > self.hard_cap || self.m_max > self.hard_cap {
            return Err(Error::InvalidPolicy(format!(
                "n_max {} / m_max {} exceed hard_cap {}",
                self.n_max, self.m_max, self.hard_cap
            )));
        }
        Ok(())
    }
}

/// `P^{-m}_{n-1/2}(cosh eta)`.
pub fn legendre_p_half<T: Scalar>(n: usize, m: usize, eta: T) -> Result<HarmonicValue<T>> {
    Ok(HarmonicTable::first_kind(eta, n, m)?.get(n, m))
}

/// `Q^m_{n-1/2}(cosh eta)`.
pub fn legendre_q_half<T: Scalar>(n: usize, m: usize, eta: T) -> Result<HarmonicValue<T>> {
    Ok(HarmonicTable::second_kind(eta, n, m)?.get(n, m))
}

/// `d/deta P^{-m}_{n-1/2}(cosh eta)`.
pub fn legendre_p_half_deta<T: Scalar>(n: usize, m: usize, eta: T) -> Result<HarmonicValue<T>> {
    Ok(HarmonicTable::first_kind(eta, n, m)?.get_deriv(n, m))
}

/// `d/deta Q^m_{n-1/2}(cosh eta)`.
pub fn legendre_q_half_deta<T: Scalar>(n: usize, m: usize, eta: T) -> Result<HarmonicValue<T>> {
    Ok(HarmonicTable::second_kind(eta, n, m)?.get_deriv(n, m))
}

/// `Q_{-1/2}` and `Q_{1/2}` of `cosh eta` from complete elliptic integrals.
pub fn q_half_closed_form<T: Scalar>(eta: T) -> Result<(T, T)> {
    if !(eta > T::zero()) {
        return Err(Error::Domain(format!("eta = {} must be positive", eta)));
    }
    let half = eta * T::half();
    let k = T::one() / half.cosh();
    let (kk, ee) = elliptic_ke_complement(half.tanh())?;
    let z = eta.cosh();
    Ok((k * kk, z * k * kk - T::two() / k * ee))
}

/// Partial Heine sum `(sqrt 2 / pi) sum_{r <= r_max} eps_r Q_{r-1/2}(lambda) cos(r theta)`,
/// which tends to `(lambda - cos theta)^{-1/2}`.
pub fn heine_sum<T: Scalar>(lambda: T, theta: T, r_max: usize) -> Result<T> {
    if !(lambda > T::one()) {
        return Err(Error::Domain(format!("lambda = {} must exceed 1", lambda)));
    }
    let tab = HarmonicTable::second_kind(lambda.acosh(), r_max, 0)?;
    let mut sum = T::zero();
    for r in (0..=r_max).rev() {
        let q = tab.get(r, 0).value()?;
        sum = sum + neumann::<T>(r) * q * (T::int(r as i64) * theta).cos();
    }
    Ok(sum * T::SQRT_2() / T::PI())
}

/// Heine sum carried until the terms fall below `tail_tol` relative to the
/// partial sum, up to `hard_cap` terms.
pub fn heine_sum_converged<T: Scalar>(lambda: T, theta: T, policy: &TruncationPolicy) -> Result<T> {
    if !(lambda > T::one()) {
        return Err(Error::Domain(format!("lambda = {} must exceed 1", lambda)));
    }
    let eta = lambda.acosh();
    let needed = (-(policy.tail_tol * 1e-2).ln() / eta.as_f64()).ceil();
    let r_max = if needed.is_finite() { (needed as usize).min(policy.hard_cap) } else { policy.hard_cap };
    let sum = heine_sum(lambda, theta, r_max)?;
    let tab = HarmonicTable::second_kind(eta, r_max, 0)?;
    let last = tab.get(r_max, 0).value()? * T::two() * T::SQRT_2() / T::PI();
    let ratio = (-eta).exp();
    let tail = (last.abs() * ratio / (T::one() - ratio) / sum.abs()).as_f64();
    if tail > policy.tail_tol {
        return Err(Error::NonConvergence { what: "Heine sum".into(), tail });
    }
    Ok(sum)
}

/// Toroidal expansion of `1 / |x - x'|`, truncated at `policy.n_max`,
/// `policy.m_max`. Returns an error when the estimated remainder exceeds
/// `policy.tail_tol`.
pub fn green_expansion<T: Scalar>(
    tp: &ToroidalPoint<T>,
    tp_src: &ToroidalPoint<T>,
    a: T,
    policy: &TruncationPolicy,
) -> Result<T> {
    policy.validate()?;
    let (lo, hi) = if tp.eta() < tp_src.eta() { (tp, tp_src) } else { (tp_src, tp) };
    if lo.eta() == hi.eta() {
        return Err(Error::Domain("expansion needs distinct eta values".into()));
    }
    let (n_max, m_max) = (policy.n_max, policy.m_max);
    let p = HarmonicTable::first_kind(lo.eta(), n_max, m_max)?;
    let q = HarmonicTable::second_kind(hi.eta(), n_max, m_max)?;
    let d_eta = hi.eta() - lo.eta();
    let dtheta = tp.theta() - tp_src.theta();
    let dphi = tp.phi() - tp_src.phi();
    let decay = (-d_eta).exp();
    let mut total = T::zero();
    let mut last_row = T::zero();
    let mut last_col = T::zero();
    for m in 0..=m_max {
        let scale = (p.row_scale(m) + q.row_scale(m)).exp();
        if scale == T::zero() {
            break;
        }
        let mut row = T::zero();
        let mut row_abs = T::zero();
        let mut en = T::one();
        for n in 0..=n_max {
            let term = neumann::<T>(n) * p.mantissa(n, m) * q.mantissa(n, m) * en;
            row = row + term * (T::int(n as i64) * dtheta).cos();
            row_abs = row_abs + term.abs();
            if n == n_max {
                last_col = last_col + term.abs() * scale * neumann::<T>(m);
            }
            en = en * decay;
        }
        let sign = if m % 2 == 0 { T::one() } else { -T::one() };
        total = total + neumann::<T>(m) * sign * scale * row * (T::int(m as i64) * dphi).cos();
        last_row = neumann::<T>(m) * scale * row_abs;
        if !total.is_finite() {
            return Err(Error::Overflow("Green expansion".into()));
        }
    }
    let tail = (last_row.max(last_col) / total.abs()).as_f64();
    if tail > policy.tail_tol {
        return Err(Error::NonConvergence { what: "Green expansion".into(), tail });
    }
    let c = tp.denominator() * tp_src.denominator();
    Ok(c.sqrt() / (a * T::PI()) * total)
}
