//! Coefficients by direct adaptive quadrature over the knot parameter.

use super::{HarmonicCoefficientTable, KnotSpec, Region};
use crate::error::Result;
use crate::geometry::basis_vectors;
use crate::harmonics::{HarmonicKind, HarmonicTable, TruncationPolicy};
use crate::quadrature::AdaptiveQuadrature;
use crate::scalar::Scalar;

/// Coefficient table for `region`, integrating
/// `Z(eta0) ∫ (dx'_i/ds) sqrt(c') trig(m phi') trig(n theta') ds` numerically.
///
/// `quad_tol` is the absolute tolerance relative to `∫ |dr'/ds| sqrt(c') ds`.
/// Run it in extended precision when the table has entries many orders of
/// magnitude below that scale.
pub fn coefficients_quadrature<T: Scalar>(
    spec: &KnotSpec<T>,
    region: Region,
    policy: &TruncationPolicy,
    quad_tol: T,
) -> Result<HarmonicCoefficientTable<T>> {
    policy.validate()?;
    let (n_max, m_max) = (policy.n_max, policy.m_max);
    let (p, q) = (spec.p(), spec.q());
    let eta0 = spec.eta0();
    let lambda = spec.cosh_eta0();
    let mut table = HarmonicCoefficientTable::zeroed(region, n_max, m_max, spec.focal_radius(), eta0, spec.spec_hash());
    let kind = match region {
        Region::Outside => HarmonicKind::FirstKind,
        Region::Inside => HarmonicKind::SecondKind,
    };
    let src = HarmonicTable::new(kind, eta0, n_max, m_max)?;
    for m in 0..=m_max {
        table.row_scale[m] = src.row_scale(m);
    }

    let weight = |s: T| -> [T; 3] {
        let j = spec.reduced_current(s);
        let e = basis_vectors(&spec.point(s)).expect("eta0 is positive");
        let root = (lambda - (T::int(q) * s).cos()).sqrt();
        [0, 1, 2].map(|i| (j.j_theta * e[1][i] + j.j_phi * e[2][i]) * root)
    };
    let oscillation = (q.unsigned_abs() as usize) * (n_max + 1) + (p.unsigned_abs() as usize) * (m_max + 1);
    let panels = (oscillation / 2).max(8);
    let scale = AdaptiveQuadrature::new(15, T::c(1e-6))
        .with_initial_panels(panels)
        .integrate(|s| {
            let w = weight(s);
            (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt()
        }, T::zero(), T::TAU())?;

    let quad = AdaptiveQuadrature::new(20, T::zero())
        .with_abs_tol(quad_tol * scale)
        .with_initial_panels(panels);
    let width = n_max + 1;
    let dim = 3 * (m_max + 1) * width * 4;
    let mut cm = vec![T::zero(); m_max + 1];
    let mut sm = vec![T::zero(); m_max + 1];
    let mut cn = vec![T::zero(); n_max + 1];
    let mut sn = vec![T::zero(); n_max + 1];
    let integrals = quad.integrate_vec(
        |s, out| {
            let w = weight(s);
            harmonics_of(-T::int(p) * s, &mut cm, &mut sm);
            harmonics_of(T::int(q) * s, &mut cn, &mut sn);
            for (i, wi) in w.iter().enumerate() {
                for m in 0..=m_max {
                    let (wc, ws) = (*wi * cm[m], *wi * sm[m]);
                    let base = ((i * (m_max + 1) + m) * width) * 4;
                    for n in 0..=n_max {
                        let k = base + n * 4;
                        out[k] = wc * cn[n];
                        out[k + 1] = wc * sn[n];
                        out[k + 2] = ws * cn[n];
                        out[k + 3] = ws * sn[n];
                    }
                }
            }
        },
        T::zero(),
        T::TAU(),
        dim,
    )?;
    for i in 0..3 {
        for m in 0..=m_max {
            for n in 0..=n_max {
                let base = ((i * (m_max + 1) + m) * width + n) * 4;
                let z = src.mantissa(n, m);
                let k = table.index(i, n, m);
                table.entries[k] = [0, 1, 2, 3].map(|v| z * integrals[base + v]);
            }
        }
    }
    Ok(table)
}

/// `cos(k x)` and `sin(k x)` for `k = 0..len` by angle addition.
fn harmonics_of<T: Scalar>(x: T, c: &mut [T], s: &mut [T]) {
    let (s1, c1) = x.sin_cos();
    c[0] = T::one();
    s[0] = T::zero();
    for k in 1..c.len() {
        // reseed so the recurrence error stays flat
        if k % 16 == 0 {
            let (sk, ck) = (T::int(k as i64) * x).sin_cos();
            c[k] = ck;
            s[k] = sk;
        } else {
            c[k] = c[k - 1] * c1 - s[k - 1] * s1;
            s[k] = s[k - 1] * c1 + c[k - 1] * s1;
        }
    }
}
