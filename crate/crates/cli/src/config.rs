//! Run configuration: built-in defaults, then a TOML document, then flags.

use std::path::{Path, PathBuf};

use knotfield::harmonics::TruncationPolicy;
use knotfield::KnotSpec64;
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnotConfig {
    pub p: i64,
    pub q: i64,
    pub major_radius: f64,
    pub minor_radius: f64,
    pub dipole_density: f64,
    /// Allows `q = 0`, the circular test fixture.
    pub unknot: bool,
}

impl Default for KnotConfig {
    fn default() -> Self {
        Self { p: 2, q: 3, major_radius: 2.0, minor_radius: 0.5, dipole_density: 1.0, unknot: false }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationConfig {
    pub n_max: usize,
    pub m_max: usize,
    pub tail_tol: f64,
    pub hard_cap: usize,
    pub eta_band: f64,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        let p = TruncationPolicy::default();
        Self { n_max: p.n_max, m_max: p.m_max, tail_tol: p.tail_tol, hard_cap: p.hard_cap, eta_band: p.eta_band }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub resolution: [usize; 3],
    /// Also emit the Hertz vector.
    pub hertz: bool,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { min: [-4.0, -4.0, -2.0], max: [4.0, 4.0, 2.0], resolution: [17, 17, 17], hertz: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    Series,
    Oracle,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolonomyConfig {
    pub loop_file: Option<PathBuf>,
    pub evaluator: EvaluatorKind,
    pub quad_tol: f64,
    /// Relative residual above which the run fails.
    pub tolerance: f64,
    /// Knot parameter of the reference meridian.
    pub meridian_s: f64,
    /// Radius of the reference meridian; defaults to 0.4 d.
    pub meridian_radius: Option<f64>,
    /// Series is used where |eta - eta0| exceeds this, for the hybrid evaluator.
    pub hybrid_gap: f64,
}

impl Default for HolonomyConfig {
    fn default() -> Self {
        Self {
            loop_file: None,
            evaluator: EvaluatorKind::Hybrid,
            quad_tol: 1e-10,
            tolerance: 1e-4,
            meridian_s: 0.3,
            meridian_radius: None,
            hybrid_gap: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub quick: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Spectral,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoeffsConfig {
    /// Size of the two-route comparison.
    pub compare_n: usize,
    pub compare_m: usize,
    pub tolerance: f64,
    /// Quadrature tolerance for the quadrature route, which runs in quad precision.
    pub quad_tol: f64,
    /// Route of the tables written to the cache.
    pub route: Route,
}

impl Default for CoeffsConfig {
    fn default() -> Self {
        Self { compare_n: 20, compare_m: 20, tolerance: 1e-8, quad_tol: 1e-24, route: Route::Spectral }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    /// File of "x y z" lines; random points are drawn when absent.
    pub points_file: Option<PathBuf>,
    pub count: usize,
    /// Minimum |eta - eta0| of drawn points.
    pub min_gap: f64,
    pub oracle_tol: f64,
    pub tolerance: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { points_file: None, count: 30, min_gap: 0.12, oracle_tol: 1e-12, tolerance: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub knot: KnotConfig,
    pub truncation: TruncationConfig,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    pub seed: u64,
    /// Coefficient cache to load instead of computing the tables.
    pub cache: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub sample: SampleConfig,
    pub holonomy: HolonomyConfig,
    pub verify: VerifyConfig,
    pub coeffs: CoeffsConfig,
    pub compare: CompareConfig,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn policy(&self) -> TruncationPolicy {
        let t = &self.truncation;
        TruncationPolicy { n_max: t.n_max, m_max: t.m_max, tail_tol: t.tail_tol, hard_cap: t.hard_cap, eta_band: t.eta_band }
    }

    pub fn spec(&self) -> Result<KnotSpec64, Failure> {
        let k = &self.knot;
        let spec = if k.q == 0 {
            if !k.unknot {
                return Err(Failure::Config("q = 0 requires knot.unknot = true".into()));
            }
            if k.p != 1 {
                return Err(Failure::Config("the unknot fixture has p = 1".into()));
            }
            KnotSpec64::unknot(k.major_radius, k.minor_radius, k.dipole_density)
        } else {
            KnotSpec64::new(k.p, k.q, k.major_radius, k.minor_radius, k.dipole_density)
        };
        spec.map_err(|e| Failure::Config(e.to_string()))
    }

    /// Checks everything that can be checked before computing.
    pub fn validate(&self) -> Result<(), Failure> {
        self.spec()?;
        self.policy().validate().map_err(|e| Failure::Config(e.to_string()))?;
        let s = &self.sample;
        for k in 0..3 {
            if s.resolution[k] == 0 {
                return Err(Failure::Config("sample.resolution entries must be positive".into()));
            }
            if !(s.min[k] <= s.max[k]) || !s.min[k].is_finite() || !s.max[k].is_finite() {
                return Err(Failure::Config(format!("sample bounds on axis {k} are not ordered")));
            }
        }
        let positive = [
            ("holonomy.quad_tol", self.holonomy.quad_tol),
            ("holonomy.tolerance", self.holonomy.tolerance),
            ("holonomy.hybrid_gap", self.holonomy.hybrid_gap),
            ("coeffs.tolerance", self.coeffs.tolerance),
            ("coeffs.quad_tol", self.coeffs.quad_tol),
            ("compare.oracle_tol", self.compare.oracle_tol),
            ("compare.tolerance", self.compare.tolerance),
            ("compare.min_gap", self.compare.min_gap),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::Config(format!("{name} must be positive")));
            }
        }
        if let Some(r) = self.holonomy.meridian_radius {
            if !(r > 0.0) {
                return Err(Failure::Config("holonomy.meridian_radius must be positive".into()));
            }
        }
        Ok(())
    }
}
