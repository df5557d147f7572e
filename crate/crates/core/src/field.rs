//! Hertz vector and flat connection from the coefficient tables.

use crate::error::{Error, Result};
use crate::geometry::{basis_vectors, cartesian_to_toroidal, metric_factors, CartesianPoint, ToroidalPoint};
use crate::harmonics::{HarmonicKind, HarmonicTable, TruncationPolicy};
use crate::knot_source::{coefficients_spectral, HarmonicCoefficientTable, KnotSpec, Region};
use crate::scalar::{cross3, neumann, Scalar};

/// Below this eta the connection is taken by finite differences in
/// Cartesian coordinates.
const AXIS_ETA: f64 = 1e-6;

/// Components of a vector at a point, in either frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    Cartesian,
    Toroidal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorSample<T> {
    pub position: CartesianPoint<T>,
    pub toroidal: ToroidalPoint<T>,
    pub vector: [T; 3],
    pub basis: Basis,
}

impl<T: Scalar> VectorSample<T> {
    pub fn to_cartesian(&self) -> Result<Self> {
        match self.basis {
            Basis::Cartesian => Ok(*self),
            Basis::Toroidal => {
                let e = basis_vectors(&self.toroidal)?;
                let v = [0, 1, 2].map(|i| (0..3).map(|k| self.vector[k] * e[k][i]).sum());
                Ok(Self { vector: v, basis: Basis::Cartesian, ..*self })
            }
        }
    }

    pub fn to_toroidal(&self) -> Result<Self> {
        match self.basis {
            Basis::Toroidal => Ok(*self),
            Basis::Cartesian => {
                let e = basis_vectors(&self.toroidal)?;
                let v = [0, 1, 2].map(|k| (0..3).map(|i| self.vector[i] * e[k][i]).sum());
                Ok(Self { vector: v, basis: Basis::Toroidal, ..*self })
            }
        }
    }
}

/// Hertz vector (Cartesian components) and its partial derivatives in
/// `eta`, `theta`, `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HertzPartials<T> {
    pub value: [T; 3],
    pub d_eta: [T; 3],
    pub d_theta: [T; 3],
    pub d_phi: [T; 3],
    /// Estimated remainder relative to `|H|`.
    pub tail: f64,
    pub n_used: usize,
    pub m_used: usize,
}

fn region_of<T: Scalar>(tp: &ToroidalPoint<T>, table: &HarmonicCoefficientTable<T>, band: f64) -> Result<()> {
    let gap = tp.eta() - table.eta0();
    if gap.abs().as_f64() <= band {
        return Err(Error::EtaBandViolation { distance: gap.abs().as_f64(), band });
    }
    let region = if gap > T::zero() { Region::Outside } else { Region::Inside };
    if region != table.region() {
        return Err(Error::RegionMismatch);
    }
    Ok(())
}

/// Truncation of the double sum at a point `gap` away from the knot torus.
struct Limits {
    m_lim: usize,
    n_base: usize,
    slope: f64,
    row_ratio: f64,
    capped: bool,
}

fn limits<T: Scalar>(spec_pq: (i64, i64), eta: f64, eta0: f64, table: &HarmonicCoefficientTable<T>, tol: f64) -> Limits {
    let (p, q) = spec_pq;
    let (lo, hi) = if eta < eta0 { (eta, eta0) } else { (eta0, eta) };
    let gap = hi - lo;
    let depth = (1.0 / tol).ln() + 10f64.ln();
    let slope = if q == 0 { 0.0 } else { p.unsigned_abs() as f64 / q.unsigned_abs() as f64 };
    let rho = (0.5 * lo).tanh() / (0.5 * hi).tanh();
    let rate_m = -rho.ln() + slope * gap;
    let row_ratio = (-rate_m).exp();
    let want_m = if rate_m > 0.0 { (1.2 * depth / rate_m).ceil() + 4.0 } else { f64::INFINITY };
    let want_n = (depth / gap).ceil() + 4.0;
    let m_lim = if want_m.is_finite() { (want_m as usize).min(table.m_max()) } else { table.m_max() };
    let n_base = if want_n.is_finite() { want_n as usize } else { usize::MAX / 4 };
    let capped = want_m > table.m_max() as f64 || slope * m_lim as f64 + want_n > table.n_max() as f64;
    Limits { m_lim, n_base, slope, row_ratio, capped }
}

/// Sum of the Hertz series and its coordinate derivatives at `tp`.
pub fn hertz_partials<T: Scalar>(
    tp: &ToroidalPoint<T>,
    table: &HarmonicCoefficientTable<T>,
    pq: (i64, i64),
    policy: &TruncationPolicy,
) -> Result<HertzPartials<T>> {
    region_of(tp, table, policy.eta_band)?;
    let eta = tp.eta();
    let lim = limits(pq, eta.as_f64(), table.eta0().as_f64(), table, policy.tail_tol);
    let n_lim_of = |m: usize| -> usize {
        let n = (lim.slope * m as f64).ceil() as usize + lim.n_base;
        n.min(table.n_max())
    };
    let n_top = (0..=lim.m_lim).map(n_lim_of).max().unwrap_or(0);
    let field = match table.region() {
        Region::Outside => HarmonicTable::new(HarmonicKind::SecondKind, eta, n_top, lim.m_lim)?,
        Region::Inside => HarmonicTable::new(HarmonicKind::FirstKind, eta, n_top, lim.m_lim)?,
    };
    let gap = (eta - table.eta0()).abs();
    let decay = (-gap).exp();
    let (theta, phi) = (tp.theta(), tp.phi());
    let mut cn = vec![T::zero(); n_top + 1];
    let mut sn = vec![T::zero(); n_top + 1];
    for n in 0..=n_top {
        let (s, c) = (T::int(n as i64) * theta).sin_cos();
        cn[n] = c;
        sn[n] = s;
    }

    let mut s0 = [T::zero(); 3];
    let mut se = [T::zero(); 3];
    let mut st = [T::zero(); 3];
    let mut sp = [T::zero(); 3];
    let mut last_row = T::zero();
    let mut last_col = T::zero();
    let mut m_used = 0;
    for m in 0..=lim.m_lim {
        if table.row_is_zero(m) {
            last_row = T::zero();
            continue;
        }
        m_used = m;
        let scale = (table.row_scale(m) + field.row_scale(m)).exp();
        if scale == T::zero() {
            continue;
        }
        if !scale.is_finite() {
            return Err(Error::Overflow(format!("Hertz series scale at m = {m}")));
        }
        let mf = T::int(m as i64);
        let (sm, cm) = (mf * phi).sin_cos();
        let n_lim = n_lim_of(m);
        let mut w = scale * neumann::<T>(m) * if m % 2 == 0 { T::one() } else { -T::one() };
        let mut row_abs = T::zero();
        for n in 0..=n_lim {
            let d = w * neumann::<T>(n);
            let z = field.mantissa(n, m) * d;
            let dz = field.deriv_mantissa(n, m) * d;
            let nf = T::int(n as i64);
            for i in 0..3 {
                let [al, be, ga, de] = table.mantissas(i, n, m);
                let cc = al * cn[n] + be * sn[n];
                let cs = ga * cn[n] + de * sn[n];
                let trig = cc * cm + cs * sm;
                let d_theta = nf * ((be * cn[n] - al * sn[n]) * cm + (de * cn[n] - ga * sn[n]) * sm);
                let d_phi = mf * (cs * cm - cc * sm);
                s0[i] = s0[i] + z * trig;
                se[i] = se[i] + dz * trig;
                st[i] = st[i] + z * d_theta;
                sp[i] = sp[i] + z * d_phi;
                let mag = (z * (al.abs() + be.abs() + ga.abs() + de.abs())).abs();
                row_abs = row_abs + mag;
                if n == n_lim {
                    last_col = last_col + mag;
                }
            }
            w = w * decay;
        }
        last_row = row_abs;
    }
    let norm = (s0[0] * s0[0] + s0[1] * s0[1] + s0[2] * s0[2]).sqrt();
    let rr = T::c(lim.row_ratio.min(0.999));
    let dd = decay.min(T::c(0.999));
    let tail_abs = last_row * rr / (T::one() - rr) + last_col * dd / (T::one() - dd);
    let tail = if norm > T::zero() { (tail_abs / norm).as_f64() } else { 0.0 };
    if lim.capped && tail > policy.tail_tol {
        return Err(Error::NonConvergence { what: "Hertz series".into(), tail });
    }
    let f = T::one() / (table.focal_radius() * T::PI());
    let c = tp.denominator();
    let rc = c.sqrt();
    let she = eta.sinh();
    let sth = theta.sin();
    let value = [0, 1, 2].map(|i| f * rc * s0[i]);
    let d_eta = [0, 1, 2].map(|i| f * (rc * se[i] + she / (T::two() * rc) * s0[i]));
    let d_theta = [0, 1, 2].map(|i| f * (rc * st[i] + sth / (T::two() * rc) * s0[i]));
    let d_phi = [0, 1, 2].map(|i| f * rc * sp[i]);
    Ok(HertzPartials { value, d_eta, d_theta, d_phi, tail, n_used: n_top, m_used })
}

/// Hertz-vector Cartesian components at `tp`.
pub fn hertz_series<T: Scalar>(
    tp: &ToroidalPoint<T>,
    table: &HarmonicCoefficientTable<T>,
    pq: (i64, i64),
    policy: &TruncationPolicy,
) -> Result<[T; 3]> {
    Ok(hertz_partials(tp, table, pq, policy)?.value)
}

/// `curl H` from the coordinate partials, in Cartesian components.
pub fn curl_from_partials<T: Scalar>(tp: &ToroidalPoint<T>, a: T, hp: &HertzPartials<T>) -> Result<[T; 3]> {
    let e = basis_vectors(tp)?;
    let h = metric_factors(tp, a);
    let terms = [
        (cross3(&e[0], &hp.d_eta), h.h1),
        (cross3(&e[1], &hp.d_theta), h.h2),
        (cross3(&e[2], &hp.d_phi), h.h3),
    ];
    Ok([0, 1, 2].map(|i| terms.iter().map(|(v, hk)| v[i] / *hk).sum()))
}

/// Flat connection of a dipole-lined knot, ready for evaluation anywhere
/// outside the excluded band.
#[derive(Debug, Clone)]
pub struct FlatConnection<T> {
    spec: KnotSpec<T>,
    policy: TruncationPolicy,
    inside: HarmonicCoefficientTable<T>,
    outside: HarmonicCoefficientTable<T>,
}

impl<T: Scalar> FlatConnection<T> {
    /// Builds both coefficient tables by the spectral route.
    pub fn new(spec: KnotSpec<T>, policy: TruncationPolicy) -> Result<Self> {
        policy.validate()?;
        let inside = coefficients_spectral(&spec, Region::Inside, &policy)?;
        let outside = coefficients_spectral(&spec, Region::Outside, &policy)?;
        Ok(Self { spec, policy, inside, outside })
    }

    pub fn from_tables(
        spec: KnotSpec<T>,
        policy: TruncationPolicy,
        inside: HarmonicCoefficientTable<T>,
        outside: HarmonicCoefficientTable<T>,
    ) -> Result<Self> {
        policy.validate()?;
        if inside.region() != Region::Inside || outside.region() != Region::Outside {
            return Err(Error::RegionMismatch);
        }
        let hash = spec.spec_hash();
        if inside.spec_hash() != hash || outside.spec_hash() != hash {
            return Err(Error::CacheFormat(format!("coefficient tables were built for a different knot (expected {hash})")));
        }
        Ok(Self { spec, policy, inside, outside })
    }

    pub fn spec(&self) -> &KnotSpec<T> {
        &self.spec
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    pub fn table(&self, region: Region) -> &HarmonicCoefficientTable<T> {
        match region {
            Region::Inside => &self.inside,
            Region::Outside => &self.outside,
        }
    }

    pub fn region_of(&self, tp: &ToroidalPoint<T>) -> Region {
        if tp.eta() > self.spec.eta0() {
            Region::Outside
        } else {
            Region::Inside
        }
    }

    fn pq(&self) -> (i64, i64) {
        (self.spec.p(), self.spec.q())
    }

    pub fn hertz_partials(&self, tp: &ToroidalPoint<T>) -> Result<HertzPartials<T>> {
        hertz_partials(tp, self.table(self.region_of(tp)), self.pq(), &self.policy)
    }

    pub fn hertz(&self, tp: &ToroidalPoint<T>) -> Result<[T; 3]> {
        Ok(self.hertz_partials(tp)?.value)
    }

    pub fn hertz_cartesian(&self, x: &CartesianPoint<T>) -> Result<[T; 3]> {
        let tp = cartesian_to_toroidal(x, self.spec.focal_radius())?;
        self.hertz(&tp)
    }

    /// `(A_eta, A_theta, A_phi)`.
    pub fn connection_toroidal(&self, tp: &ToroidalPoint<T>) -> Result<[T; 3]> {
        if tp.eta().as_f64() <= AXIS_ETA {
            return Err(Error::AxisDegenerate { eta: tp.eta().as_f64() });
        }
        let hp = self.hertz_partials(tp)?;
        let a = curl_from_partials(tp, self.spec.focal_radius(), &hp)?;
        let e = basis_vectors(tp)?;
        Ok([0, 1, 2].map(|k| (0..3).map(|i| a[i] * e[k][i]).sum()))
    }

    /// Cartesian `A`, switching to a finite-difference curl on the axis.
    pub fn connection_cartesian(&self, x: &CartesianPoint<T>) -> Result<[T; 3]> {
        let a = self.spec.focal_radius();
        let tp = cartesian_to_toroidal(x, a)?;
        if tp.eta().as_f64() > AXIS_ETA {
            let hp = self.hertz_partials(&tp)?;
            return curl_from_partials(&tp, a, &hp);
        }
        let h = T::c(1e-5) * a;
        crate::verify::fd_curl(|y| self.hertz_cartesian(y), x, h)
    }

    pub fn sample(&self, x: &CartesianPoint<T>) -> Result<VectorSample<T>> {
        let tp = cartesian_to_toroidal(x, self.spec.focal_radius())?;
        let vector = self.connection_cartesian(x)?;
        Ok(VectorSample { position: *x, toroidal: tp, vector, basis: Basis::Cartesian })
    }
}
