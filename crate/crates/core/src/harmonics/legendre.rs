//! Tables of half-integer-degree Legendre functions of argument `cosh(eta)`.
//!
//! Entry `(n, m)` is `P^{-m}_{n-1/2}` (first kind) or `Q^m_{n-1/2}` (second
//! kind, sign `(-1)^m`). Values are stored as mantissas with a per-order log
//! scale and a per-degree exponential, so that
//! `F(n, m) = mantissa * exp(row_scale[m] + n * slope)` with `slope = eta`
//! for the first kind and `-eta` for the second kind.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest backward-recurrence start before giving up.
const MILLER_LIMIT: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarmonicKind {
    /// `P^{-m}_{n-1/2}(cosh eta)`, regular on the axis.
    FirstKind,
    /// `Q^m_{n-1/2}(cosh eta)`, regular at infinity in eta.
    SecondKind,
}

/// A value held as `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicValue<T> {
    pub mantissa: T,
    pub log_scale: T,
}

impl<T: Scalar> HarmonicValue<T> {
    pub fn value(&self) -> Result<T> {
        if self.mantissa == T::zero() {
            return Ok(T::zero());
        }
        let v = self.mantissa * self.log_scale.exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow(format!(
                "harmonic value {} * exp({})",
                self.mantissa, self.log_scale
            )))
        }
    }

    pub fn ln_abs(&self) -> T {
        self.mantissa.abs().ln() + self.log_scale
    }
}

#[derive(Debug, Clone)]
pub struct HarmonicTable<T> {
    kind: HarmonicKind,
    eta: T,
    n_max: usize,
    m_max: usize,
    slope: T,
    row_scale: Vec<T>,
    values: Vec<T>,
    derivs: Vec<T>,
}

impl<T: Scalar> HarmonicTable<T> {
    pub fn new(kind: HarmonicKind, eta: T, n_max: usize, m_max: usize) -> Result<Self> {
        match kind {
            HarmonicKind::FirstKind => Self::first_kind(eta, n_max, m_max),
            HarmonicKind::SecondKind => Self::second_kind(eta, n_max, m_max),
        }
    }

    pub fn kind(&self) -> HarmonicKind {
        self.kind
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn slope(&self) -> T {
        self.slope
    }

    pub fn row_scale(&self, m: usize) -> T {
        self.row_scale[m]
    }

    #[inline]
    fn idx(&self, n: usize, m: usize) -> usize {
        m * (self.n_max + 1) + n
    }

    #[inline]
    pub fn mantissa(&self, n: usize, m: usize) -> T {
        self.values[self.idx(n, m)]
    }

    /// Mantissa of `d/deta` at the same scale as [`mantissa`](Self::mantissa).
    #[inline]
    pub fn deriv_mantissa(&self, n: usize, m: usize) -> T {
        self.derivs[self.idx(n, m)]
    }

    pub fn log_scale(&self, n: usize, m: usize) -> T {
        self.row_scale[m] + self.slope * T::int(n as i64)
    }

    pub fn get(&self, n: usize, m: usize) -> HarmonicValue<T> {
        HarmonicValue { mantissa: self.mantissa(n, m), log_scale: self.log_scale(n, m) }
    }

    pub fn get_deriv(&self, n: usize, m: usize) -> HarmonicValue<T> {
        HarmonicValue { mantissa: self.deriv_mantissa(n, m), log_scale: self.log_scale(n, m) }
    }

    fn empty(kind: HarmonicKind, eta: T, n_max: usize, m_max: usize, slope: T) -> Self {
        let rows = m_max + 2;
        Self {
            kind,
            eta,
            n_max,
            m_max,
            slope,
            row_scale: vec![T::zero(); rows],
            values: vec![T::zero(); rows * (n_max + 1)],
            derivs: vec![T::zero(); (m_max + 1) * (n_max + 1)],
        }
    }

    /// `P^{-m}_{n-1/2}(cosh eta)` for `n <= n_max`, `m <= m_max`.
    ///
    /// Each order is seeded at `n = 0, 1` from the hypergeometric series in
    /// `tanh^2(eta/2)` and carried upward in degree.
    pub fn first_kind(eta: T, n_max: usize, m_max: usize) -> Result<Self> {
        check_eta(eta, true)?;
        let mut tab = Self::empty(HarmonicKind::FirstKind, eta, n_max, m_max, eta);
        let width = n_max + 1;
        if eta == T::zero() {
            tab.values[..width].iter_mut().for_each(|v| *v = T::one());
            if m_max >= 1 {
                tab.derivs[width..2 * width].iter_mut().for_each(|v| *v = T::half());
            }
            return Ok(tab);
        }
        let half_eta = eta * T::half();
        let t = half_eta.tanh();
        let w = t * t;
        let ch = half_eta.cosh();
        let z = eta.cosh();
        let e1 = (-eta).exp();
        let e2 = e1 * e1;
        let ln_t = t.ln();
        let mut ln_fact = T::zero();
        for m in 0..=m_max + 1 {
            if m > 0 {
                ln_fact = ln_fact + T::int(m as i64).ln();
            }
            let mf = T::int(m as i64);
            tab.row_scale[m] = mf * ln_t - ln_fact;
            let row = &mut tab.values[m * width..(m + 1) * width];
            let f0 = hypergeometric(T::half(), mf + T::half(), mf + T::one(), w)?;
            row[0] = f0 / ch;
            if n_max >= 1 {
                let three_half = T::c(1.5);
                let f1 = hypergeometric(three_half, mf + three_half, mf + T::one(), w)?;
                row[1] = f1 / (ch * ch * ch) * e1;
            }
            for n in 1..n_max {
                let nf = T::int(n as i64);
                let num = T::two() * nf * z * e1 * row[n] - (nf - mf - T::half()) * e2 * row[n - 1];
                row[n + 1] = num / (nf + mf + T::half());
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Overflow(format!("first-kind row m = {m}")));
            }
        }
        let coth = T::one() / eta.tanh();
        for m in 0..=m_max {
            let mf = T::int(m as i64);
            let up = (tab.row_scale[m + 1] - tab.row_scale[m]).exp();
            for n in 0..=n_max {
                let nf = T::int(n as i64);
                let lift = (nf + mf + T::half()) * (nf - mf - T::half()) * up;
                let i = tab.idx(n, m);
                tab.derivs[i] = mf * coth * tab.values[i] + lift * tab.values[tab.idx(n, m + 1)];
            }
        }
        Ok(tab)
    }

    /// `Q^m_{n-1/2}(cosh eta)` for `n <= n_max`, `m <= m_max`.
    ///
    /// Degree ratios come from backward continued fractions. The order-zero
    /// chain is normalised by the Heine sum at `theta = 0`; the `n = 0`
    /// column is carried upward in order.
    pub fn second_kind(eta: T, n_max: usize, m_max: usize) -> Result<Self> {
        check_eta(eta, false)?;
        let mut tab = Self::empty(HarmonicKind::SecondKind, eta, n_max, m_max, -eta);
        let width = n_max + 1;
        let z = eta.cosh();
        let s = eta.sinh();
        let coth = z / s;
        let e1 = eta.exp();
        let ln_eps = -T::epsilon().ln();
        let decay = |depth: T| -> Result<usize> {
            let k = (depth / (T::two() * eta)).ceil().as_f64();
            if !(k.is_finite() && k < MILLER_LIMIT as f64) {
                return Err(Error::NonConvergence {
                    what: "backward recurrence start".into(),
                    tail: f64::INFINITY,
                });
            }
            Ok(k as usize + 20)
        };

        // order zero: ratios plus the Heine normalisation
        let heine_len = decay(T::two() * ln_eps)? + 10;
        let start = (n_max + 1).max(heine_len) + decay(ln_eps)?;
        let keep = n_max.max(1);
        let mut ratios = vec![T::zero(); keep];
        let mut r = T::zero();
        let mut acc = T::zero();
        for n in (1..=start).rev() {
            let nf = T::int(n as i64);
            r = (nf - T::half()) / (T::two() * nf * z - (nf + T::half()) * r);
            acc = r * (T::one() + acc);
            if n - 1 < keep {
                ratios[n - 1] = r;
            }
        }
        let heine = T::one() + T::two() * acc;
        let q0 = T::PI() / (T::two() * heine * (eta * T::half()).sinh());
        let q1_0 = q0 * (ratios[0] - z) / (T::two() * s);

        // n = 0 column over orders, renormalised as it grows
        let big = T::max_value().sqrt().sqrt();
        let mut ln_base = q0.abs().ln();
        let mut prev = q0.signum();
        let mut cur = q1_0 / q0.abs();
        let mut seeds = vec![(prev, ln_base), (cur.signum(), ln_base + cur.abs().ln())];
        for m in 0..m_max {
            let mf = T::int(m as i64);
            let next = -T::two() * (mf + T::one()) * coth * cur - (mf + T::half()) * (mf + T::half()) * prev;
            prev = cur;
            cur = next;
            if !cur.is_finite() || cur == T::zero() {
                return Err(Error::Overflow(format!("second-kind order recurrence at m = {}", m + 2)));
            }
            if cur.abs() > big {
                let sc = cur.abs();
                prev = prev / sc;
                cur = cur / sc;
                ln_base = ln_base + sc.ln();
            }
            seeds.push((cur.signum(), ln_base + cur.abs().ln()));
        }

        for m in 0..=m_max + 1 {
            let (sign, scale) = seeds[m];
            tab.row_scale[m] = scale;
            let row_ratios: Vec<T> = if m == 0 {
                ratios.clone()
            } else {
                let mf = T::int(m as i64);
                let start = n_max.max(m) + 1 + decay(ln_eps)?;
                let mut rr = vec![T::zero(); keep];
                let mut r = T::zero();
                for n in (1..=start).rev() {
                    let nf = T::int(n as i64);
                    r = (nf + mf - T::half()) / (T::two() * nf * z - (nf - mf + T::half()) * r);
                    if n - 1 < keep {
                        rr[n - 1] = r;
                    }
                }
                rr
            };
            let row = &mut tab.values[m * width..(m + 1) * width];
            row[0] = sign;
            for n in 0..n_max {
                row[n + 1] = row[n] * row_ratios[n] * e1;
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Overflow(format!("second-kind row m = {m}")));
            }
        }
        for m in 0..=m_max {
            let mf = T::int(m as i64);
            let up = (tab.row_scale[m + 1] - tab.row_scale[m]).exp();
            for n in 0..=n_max {
                let i = tab.idx(n, m);
                tab.derivs[i] = mf * coth * tab.values[i] + up * tab.values[tab.idx(n, m + 1)];
            }
        }
        Ok(tab)
    }
}

fn check_eta<T: Scalar>(eta: T, allow_zero: bool) -> Result<()> {
    if !eta.is_finite() || eta < T::zero() || (!allow_zero && eta == T::zero()) {
        return Err(Error::Domain(format!("eta = {} outside the admissible range", eta)));
    }
    Ok(())
}

/// Gauss series `2F1(a, b; c; w)` for `0 <= w < 1` with positive terms.
fn hypergeometric<T: Scalar>(a: T, b: T, c: T, w: T) -> Result<T> {
    let mut term = T::one();
    let mut sum = T::one();
    let tol = T::epsilon() * T::half();
    for k in 0..5_000_000_u32 {
        let kf = T::from_u32(k).unwrap();
        term = term * (a + kf) * (b + kf) / ((c + kf) * (kf + T::one())) * w;
        sum = sum + term;
        if term <= tol * (T::one() - w) * sum && kf > (a + b - c) / (T::one() - w) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence { what: "hypergeometric seed".into(), tail: term.as_f64() })
}
