//! Gauss-Legendre panels with adaptive bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Gauss-Legendre rule on `[-1, 1]`, with nodes found by Newton iteration
/// in the working precision.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let tol = T::epsilon() * T::c(4.0);
        for i in 0..n.div_ceil(2) {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = T::c(guess);
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= tol {
                    let (_, d) = legendre_and_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = T::two() / ((T::one() - x * x) * dp * dp);
            nodes[i] = x;
            weights[i] = w;
            nodes[n - 1 - i] = -x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Applies the rule on `[a, b]`, accumulating into `out`.
    pub fn apply_vec<F>(&self, f: &mut F, a: T, b: T, out: &mut [T], scratch: &mut [T]) -> Result<()>
    where
        F: FnMut(T, &mut [T]),
    {
        let half = (b - a) * T::half();
        let mid = (a + b) * T::half();
        out.iter_mut().for_each(|o| *o = T::zero());
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            scratch.iter_mut().for_each(|s| *s = T::zero());
            f(mid + half * *x, scratch);
            for (o, s) in out.iter_mut().zip(scratch.iter()) {
                if !s.is_finite() {
                    return Err(Error::QuadratureFailure("non-finite integrand".into()));
                }
                *o = *o + *w * *s;
            }
        }
        out.iter_mut().for_each(|o| *o = *o * half);
        Ok(())
    }
}

fn legendre_and_derivative<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::int(k as i64);
        let p2 = ((T::two() * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::int(n as i64);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Adaptive integrator. Panels are bisected worst-first until the summed
/// error estimate meets `max(abs_tol, rel_tol * |I|)` in the max norm.
#[derive(Debug, Clone)]
pub struct AdaptiveQuadrature<T> {
    rule: GaussLegendre<T>,
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_panels: usize,
    pub initial_panels: usize,
}

struct Panel<T> {
    a: T,
    b: T,
    left: Vec<T>,
    right: Vec<T>,
    err: f64,
}

struct Keyed(f64, usize);

impl PartialEq for Keyed {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Keyed {}
impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Keyed {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

impl<T: Scalar> AdaptiveQuadrature<T> {
    pub fn new(order: usize, rel_tol: T) -> Self {
        Self {
            rule: GaussLegendre::new(order),
            rel_tol,
            abs_tol: T::zero(),
            max_panels: 20_000,
            initial_panels: 1,
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: T) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_initial_panels(mut self, n: usize) -> Self {
        self.initial_panels = n.max(1);
        self
    }

    pub fn with_max_panels(mut self, n: usize) -> Self {
        self.max_panels = n;
        self
    }

    fn make_panel<F>(&self, f: &mut F, a: T, b: T, whole: &[T], scratch: &mut [T]) -> Result<Panel<T>>
    where
        F: FnMut(T, &mut [T]),
    {
        let dim = whole.len();
        let m = (a + b) * T::half();
        let mut left = vec![T::zero(); dim];
        let mut right = vec![T::zero(); dim];
        self.rule.apply_vec(f, a, m, &mut left, scratch)?;
        self.rule.apply_vec(f, m, b, &mut right, scratch)?;
        let err = whole
            .iter()
            .zip(left.iter().zip(&right))
            .map(|(w, (l, r))| (*l + *r - *w).abs())
            .fold(T::zero(), |acc, e| acc.max(e));
        Ok(Panel { a, b, left, right, err: err.as_f64() })
    }

    /// Integrates a vector-valued `f` over `[a, b]`. The closure writes the
    /// integrand into a zeroed slice of length `dim`.
    pub fn integrate_vec<F>(&self, mut f: F, a: T, b: T, dim: usize) -> Result<Vec<T>>
    where
        F: FnMut(T, &mut [T]),
    {
        let mut scratch = vec![T::zero(); dim];
        let mut panels: Vec<Panel<T>> = Vec::new();
        let mut heap = BinaryHeap::new();
        let mut total = vec![T::zero(); dim];
        let mut err_total = 0.0_f64;
        let n0 = self.initial_panels;
        let width = (b - a) / T::int(n0 as i64);
        for k in 0..n0 {
            let pa = a + width * T::int(k as i64);
            let pb = if k + 1 == n0 { b } else { pa + width };
            let mut whole = vec![T::zero(); dim];
            self.rule.apply_vec(&mut f, pa, pb, &mut whole, &mut scratch)?;
            let panel = self.make_panel(&mut f, pa, pb, &whole, &mut scratch)?;
            for i in 0..dim {
                total[i] = total[i] + panel.left[i] + panel.right[i];
            }
            err_total += panel.err;
            heap.push(Keyed(panel.err, panels.len()));
            panels.push(panel);
        }
        loop {
            let scale = total.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
            let target = self.abs_tol.max(self.rel_tol * scale).as_f64();
            if err_total <= target {
                // the running sum drifts after many subtractions
                err_total = panels.iter().map(|p| p.err).sum();
                if err_total <= target {
                    break;
                }
            }
            if panels.len() >= self.max_panels {
                return Err(Error::QuadratureFailure(format!(
                    "error estimate {err_total:e} above {target:e} after {} panels",
                    panels.len()
                )));
            }
            let Keyed(_, idx) = heap.pop().expect("heap holds every panel");
            let (pa, pb) = (panels[idx].a, panels[idx].b);
            let m = (pa + pb) * T::half();
            let left_whole = std::mem::take(&mut panels[idx].left);
            let right_whole = std::mem::take(&mut panels[idx].right);
            let first = self.make_panel(&mut f, pa, m, &left_whole, &mut scratch)?;
            let second = self.make_panel(&mut f, m, pb, &right_whole, &mut scratch)?;
            for i in 0..dim {
                total[i] = total[i] - left_whole[i] - right_whole[i]
                    + first.left[i]
                    + first.right[i]
                    + second.left[i]
                    + second.right[i];
            }
            err_total = (err_total - panels[idx].err).max(0.0) + first.err + second.err;
            heap.push(Keyed(first.err, idx));
            panels[idx] = first;
            heap.push(Keyed(second.err, panels.len()));
            panels.push(second);
        }
        let mut sum = vec![T::zero(); dim];
        let mut order: Vec<usize> = (0..panels.len()).collect();
        order.sort_by(|&i, &j| panels[i].a.partial_cmp(&panels[j].a).unwrap_or(Ordering::Equal));
        for i in order {
            for k in 0..dim {
                sum[k] = sum[k] + panels[i].left[k] + panels[i].right[k];
            }
        }
        Ok(sum)
    }

    pub fn integrate<F>(&self, mut f: F, a: T, b: T) -> Result<T>
    where
        F: FnMut(T) -> T,
    {
        let v = self.integrate_vec(|x, out| out[0] = f(x), a, b, 1)?;
        Ok(v[0])
    }

    pub fn integrate3<F>(&self, mut f: F, a: T, b: T) -> Result<[T; 3]>
    where
        F: FnMut(T) -> [T; 3],
    {
        let v = self.integrate_vec(|x, out| out.copy_from_slice(&f(x)), a, b, 3)?;
        Ok([v[0], v[1], v[2]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let g = GaussLegendre::<f64>::new(7);
        let s: f64 = g.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 12 monomial: integral over [-1,1] is 2/13
        let v: f64 = g.nodes().iter().zip(g.weights()).map(|(x, w)| w * x.powi(12)).sum();
        assert!((v - 2.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let q = AdaptiveQuadrature::new(15, 1e-13);
        let eps = 1e-3_f64;
        let v = q.integrate(|x| eps / (x * x + eps * eps), -1.0, 1.0).unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((v - exact).abs() < 1e-11 * exact);
    }

    #[cfg(feature = "quad")]
    #[test]
    fn quad_rule_reaches_extended_precision() {
        use f128::f128;
        use num_traits::Float;
        let one = f128::c(1.0);
        let q = AdaptiveQuadrature::<f128>::new(20, f128::c(1e-30));
        let v = q.integrate(|x| x.exp(), f128::c(0.0), one).unwrap();
        let exact = one.exp() - one;
        assert!((v - exact).abs() < f128::c(1e-30));
    }
}
