use std::io::{BufRead, Write};

use super::Region;
use crate::error::{Error, Result};
use crate::scalar::{neumann, Scalar};

const CACHE_MARKER: &str = "# knotfield coefficient cache v1";

/// Hertz-vector coefficients `alpha, beta, gamma, delta` for the three
/// Cartesian components, one region, and `n <= n_max`, `m <= m_max`.
///
/// Entries are held as mantissas: the coefficient is
/// `mantissa * exp(row_scale[m] + n * slope)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoefficientTable<T> {
    pub(crate) region: Region,
    pub(crate) n_max: usize,
    pub(crate) m_max: usize,
    pub(crate) focal_radius: T,
    pub(crate) eta0: T,
    pub(crate) slope: T,
    pub(crate) row_scale: Vec<T>,
    pub(crate) entries: Vec<[T; 4]>,
    pub(crate) spec_hash: String,
}

impl<T: Scalar> HarmonicCoefficientTable<T> {
    pub(crate) fn zeroed(
        region: Region,
        n_max: usize,
        m_max: usize,
        focal_radius: T,
        eta0: T,
        spec_hash: String,
    ) -> Self {
        let slope = match region {
            Region::Outside => eta0,
            Region::Inside => -eta0,
        };
        Self {
            region,
            n_max,
            m_max,
            focal_radius,
            eta0,
            slope,
            row_scale: vec![T::zero(); m_max + 1],
            entries: vec![[T::zero(); 4]; 3 * (m_max + 1) * (n_max + 1)],
            spec_hash,
        }
    }

    #[inline]
    pub(crate) fn index(&self, i: usize, n: usize, m: usize) -> usize {
        (i * (self.m_max + 1) + m) * (self.n_max + 1) + n
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn focal_radius(&self) -> T {
        self.focal_radius
    }

    pub fn eta0(&self) -> T {
        self.eta0
    }

    pub fn spec_hash(&self) -> &str {
        &self.spec_hash
    }

    pub fn slope(&self) -> T {
        self.slope
    }

    pub fn row_scale(&self, m: usize) -> T {
        self.row_scale[m]
    }

    /// `[alpha, beta, gamma, delta]` mantissas for component `i`.
    #[inline]
    pub fn mantissas(&self, i: usize, n: usize, m: usize) -> [T; 4] {
        self.entries[self.index(i, n, m)]
    }

    pub fn log_scale(&self, n: usize, m: usize) -> T {
        self.row_scale[m] + self.slope * T::int(n as i64)
    }

    /// Unscaled `[alpha, beta, gamma, delta]` (may overflow to infinity for
    /// very high orders).
    pub fn coefficients(&self, i: usize, n: usize, m: usize) -> [T; 4] {
        let f = self.log_scale(n, m).exp();
        self.mantissas(i, n, m).map(|v| if v == T::zero() { v } else { v * f })
    }

    pub fn alpha(&self, i: usize, n: usize, m: usize) -> T {
        self.coefficients(i, n, m)[0]
    }

    pub fn beta(&self, i: usize, n: usize, m: usize) -> T {
        self.coefficients(i, n, m)[1]
    }

    pub fn gamma(&self, i: usize, n: usize, m: usize) -> T {
        self.coefficients(i, n, m)[2]
    }

    pub fn delta(&self, i: usize, n: usize, m: usize) -> T {
        self.coefficients(i, n, m)[3]
    }

    /// Normalisation `eps_n eps_m (-1)^m / (a π)` of each term.
    pub fn d_nm(&self, n: usize, m: usize) -> T {
        let sign = if m % 2 == 0 { T::one() } else { -T::one() };
        neumann::<T>(n) * neumann::<T>(m) * sign / (self.focal_radius * T::PI())
    }

    /// Whether every entry of order `m` vanishes.
    pub fn row_is_zero(&self, m: usize) -> bool {
        (0..3).all(|i| (0..=self.n_max).all(|n| self.mantissas(i, n, m).iter().all(|v| *v == T::zero())))
    }

    /// Largest absolute unscaled entry.
    pub fn max_abs(&self) -> T {
        let mut best = T::zero();
        for i in 0..3 {
            for m in 0..=self.m_max {
                for n in 0..=self.n_max {
                    for v in self.coefficients(i, n, m) {
                        best = best.max(v.abs());
                    }
                }
            }
        }
        best
    }

    /// Same table cut down to `n <= n_max`, `m <= m_max`.
    pub fn truncated(&self, n_max: usize, m_max: usize) -> Self {
        let (n_max, m_max) = (n_max.min(self.n_max), m_max.min(self.m_max));
        let mut out = Self::zeroed(self.region, n_max, m_max, self.focal_radius, self.eta0, self.spec_hash.clone());
        out.row_scale = self.row_scale[..=m_max].to_vec();
        for i in 0..3 {
            for m in 0..=m_max {
                for n in 0..=n_max {
                    let k = out.index(i, n, m);
                    out.entries[k] = self.mantissas(i, n, m);
                }
            }
        }
        out
    }

    /// Writes the plain-text cache. Numbers carry 17 significant digits.
    pub fn write_cache<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let f = |x: T| format!("{:.16e}", x.as_f64());
        writeln!(w, "{CACHE_MARKER}")?;
        writeln!(w, "spec_hash {}", self.spec_hash)?;
        writeln!(w, "region {}", self.region.name())?;
        writeln!(w, "n_max {}", self.n_max)?;
        writeln!(w, "m_max {}", self.m_max)?;
        writeln!(w, "focal_radius {}", f(self.focal_radius))?;
        writeln!(w, "eta0 {}", f(self.eta0))?;
        writeln!(w, "# m row_scale")?;
        for (m, s) in self.row_scale.iter().enumerate() {
            writeln!(w, "scale {m} {}", f(*s))?;
        }
        writeln!(w, "# i n m alpha beta gamma delta (mantissas; value = mantissa * exp(row_scale[m] +/- n * eta0))")?;
        for i in 0..3 {
            for m in 0..=self.m_max {
                for n in 0..=self.n_max {
                    let e = self.mantissas(i, n, m);
                    writeln!(w, "{i} {n} {m} {} {} {} {}", f(e[0]), f(e[1]), f(e[2]), f(e[3]))?;
                }
            }
        }
        Ok(())
    }

    /// Reads every table from a stream holding several caches back to back.
    pub fn read_caches<R: BufRead>(r: R) -> Result<Vec<Self>> {
        let mut sections: Vec<String> = Vec::new();
        for line in r.lines() {
            let line = line.map_err(|e| Error::CacheFormat(e.to_string()))?;
            if line.trim() == CACHE_MARKER || sections.is_empty() {
                sections.push(String::new());
            }
            let last = sections.last_mut().expect("a section was opened");
            last.push_str(&line);
            last.push('\n');
        }
        let tables: Vec<Self> = sections
            .iter()
            .filter(|s| s.lines().any(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#')))
            .map(|s| Self::read_cache(s.as_bytes()))
            .collect::<Result<_>>()?;
        if tables.is_empty() {
            return Err(Error::CacheFormat("no coefficient tables found".into()));
        }
        Ok(tables)
    }

    pub fn read_cache<R: BufRead>(r: R) -> Result<Self> {
        let bad = |msg: String| Error::CacheFormat(msg);
        let num = |s: &str| -> Result<T> {
            let v: f64 = s.parse().map_err(|_| Error::CacheFormat(format!("bad number '{s}'")))?;
            Ok(T::c(v))
        };
        let mut header = std::collections::HashMap::new();
        let mut scales: Vec<(usize, T)> = Vec::new();
        let mut rows: Vec<(usize, usize, usize, [T; 4])> = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| bad(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let at = |k: usize| bad(format!("line {}: expected {k} fields", lineno + 1));
            match parts[0] {
                "spec_hash" | "region" | "n_max" | "m_max" | "focal_radius" | "eta0" => {
                    if parts.len() != 2 {
                        return Err(at(2));
                    }
                    header.insert(parts[0].to_string(), parts[1].to_string());
                }
                "scale" => {
                    if parts.len() != 3 {
                        return Err(at(3));
                    }
                    let m = parts[1].parse().map_err(|_| bad(format!("line {}: bad order", lineno + 1)))?;
                    scales.push((m, num(parts[2])?));
                }
                _ => {
                    if parts.len() != 7 {
                        return Err(at(7));
                    }
                    let idx = |k: usize| -> Result<usize> {
                        parts[k].parse().map_err(|_| bad(format!("line {}: bad index", lineno + 1)))
                    };
                    rows.push((
                        idx(0)?,
                        idx(1)?,
                        idx(2)?,
                        [num(parts[3])?, num(parts[4])?, num(parts[5])?, num(parts[6])?],
                    ));
                }
            }
        }
        let get = |k: &str| header.get(k).ok_or_else(|| bad(format!("missing header '{k}'")));
        let region = Region::parse(get("region")?).ok_or_else(|| bad("unknown region".into()))?;
        let n_max: usize = get("n_max")?.parse().map_err(|_| bad("bad n_max".into()))?;
        let m_max: usize = get("m_max")?.parse().map_err(|_| bad("bad m_max".into()))?;
        let focal_radius = num(get("focal_radius")?)?;
        let eta0 = num(get("eta0")?)?;
        let mut t = Self::zeroed(region, n_max, m_max, focal_radius, eta0, get("spec_hash")?.clone());
        if scales.len() != m_max + 1 {
            return Err(bad(format!("expected {} scale rows, found {}", m_max + 1, scales.len())));
        }
        for (m, s) in scales {
            if m > m_max {
                return Err(bad(format!("scale order {m} out of range")));
            }
            t.row_scale[m] = s;
        }
        if rows.len() != 3 * (n_max + 1) * (m_max + 1) {
            return Err(bad(format!("expected {} coefficient rows, found {}", 3 * (n_max + 1) * (m_max + 1), rows.len())));
        }
        for (i, n, m, e) in rows {
            if i > 2 || n > n_max || m > m_max {
                return Err(bad(format!("entry ({i}, {n}, {m}) out of range")));
            }
            let k = t.index(i, n, m);
            t.entries[k] = e;
        }
        Ok(t)
    }
}
