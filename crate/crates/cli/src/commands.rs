use std::f64::consts::{PI, TAU};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use knotfield::field::FlatConnection;
use knotfield::geometry::{toroidal_to_cartesian, CartesianPoint, ToroidalPoint};
use knotfield::harmonics::TruncationPolicy;
use knotfield::knot_source::{coefficients_quadrature, coefficients_spectral, KnotSpec, Region};
use knotfield::verify::suite::{route_discrepancy, Suite, SuiteConfig};
use knotfield::verify::{hertz_oracle, holonomy as loop_integral, vector_potential_oracle, Evaluator, HolonomyReport, LoopPath};
use knotfield::{CoefficientTable64, Error, FlatConnection64, KnotSpec64, Quad, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{EvaluatorKind, RunConfig, Route};
use crate::input;
use crate::Failure;

type Point = CartesianPoint<f64>;

fn io_err(what: &str, e: std::io::Error) -> Failure {
    Failure::Input(format!("{what}: {e}"))
}

/// Standard output or the configured file.
fn sink(cfg: &RunConfig) -> Result<Box<dyn Write>, Failure> {
    Ok(match &cfg.output {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| io_err(&path.display().to_string(), e))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_all(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| io_err("output", e))
}

fn connection(cfg: &RunConfig) -> Result<FlatConnection64, Failure> {
    let spec = cfg.spec()?;
    let policy = cfg.policy();
    let Some(path) = &cfg.cache else {
        return Ok(FlatConnection::new(spec, policy)?);
    };
    let file = File::open(path).map_err(|e| io_err(&path.display().to_string(), e))?;
    let tables = CoefficientTable64::read_caches(BufReader::new(file))
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let pick = |region: Region| {
        tables
            .iter()
            .find(|t| t.region() == region)
            .cloned()
            .ok_or_else(|| Failure::Input(format!("{}: no {} table", path.display(), region.name())))
    };
    FlatConnection::from_tables(spec, policy, pick(Region::Inside)?, pick(Region::Outside)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Errors that mark a point as outside the series' reach rather than
/// failing the run.
fn maskable(e: &Error) -> bool {
    matches!(
        e,
        Error::EtaBandViolation { .. }
            | Error::NonConvergence { .. }
            | Error::FocalRing { .. }
            | Error::TooCloseToSource { .. }
            | Error::AxisDegenerate { .. }
            | Error::OnRing
    )
}

fn fmt_row(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",")
}

fn grid_axis(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
    if n == 1 {
        lo
    } else {
        lo + (hi - lo) * k as f64 / (n - 1) as f64
    }
}

pub fn sample(cfg: &RunConfig) -> Result<(), Failure> {
    let conn = connection(cfg)?;
    let s = &cfg.sample;
    let [nx, ny, nz] = s.resolution;
    let total = nx * ny * nz;
    // x varies fastest
    let point = |idx: usize| {
        let (i, j, k) = (idx % nx, (idx / nx) % ny, idx / (nx * ny));
        Point::new(grid_axis(s.min[0], s.max[0], nx, i), grid_axis(s.min[1], s.max[1], ny, j), grid_axis(s.min[2], s.max[2], nz, k))
    };
    let width = if s.hertz { 6 } else { 3 };
    let rows: Vec<Result<(Vec<f64>, bool), Error>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let x = point(idx);
            let values = conn.connection_cartesian(&x).and_then(|a| {
                let mut v = a.to_vec();
                if s.hertz {
                    v.extend(conn.hertz_cartesian(&x)?);
                }
                Ok(v)
            });
            let mut row = x.to_array().to_vec();
            match values {
                Ok(v) => {
                    row.extend(v);
                    Ok((row, false))
                }
                Err(e) if maskable(&e) => {
                    row.extend(std::iter::repeat_n(f64::NAN, width));
                    Ok((row, true))
                }
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut text = String::from(if s.hertz { "x,y,z,Ax,Ay,Az,Hx,Hy,Hz,masked\n" } else { "x,y,z,Ax,Ay,Az,masked\n" });
    let mut masked = 0;
    for (idx, r) in rows.into_iter().enumerate() {
        let (row, m) = r.map_err(|e| Failure::Numerical(format!("grid point {idx}: {e}")))?;
        masked += m as usize;
        text.push_str(&fmt_row(&row));
        text.push_str(if m { ",1\n" } else { ",0\n" });
    }
    write_all(&mut *sink(cfg)?, &text)?;
    eprintln!("sampled {total} points ({nx} x {ny} x {nz}), {masked} masked");
    Ok(())
}

pub fn holonomy(cfg: &RunConfig) -> Result<(), Failure> {
    let h = &cfg.holonomy;
    let Some(loop_file) = &h.loop_file else {
        return Err(Failure::Config("holonomy needs a loop file".into()));
    };
    let path = input::read_loop(loop_file)?;
    let spec = cfg.spec()?;
    let oracle_tol = (h.quad_tol * 1e-2).max(1e-14);
    let conn = match h.evaluator {
        EvaluatorKind::Oracle => None,
        _ => Some(connection(cfg)?),
    };
    let evaluator = match (&conn, h.evaluator) {
        (Some(c), EvaluatorKind::Series) => Evaluator::Series(c),
        (Some(c), _) => Evaluator::Hybrid { connection: c, min_gap: h.hybrid_gap, tol: oracle_tol },
        (None, _) => Evaluator::Oracle { spec: &spec, tol: oracle_tol },
    };
    let field = |x: &Point| evaluator.potential(x);
    let radius = h.meridian_radius.unwrap_or(0.4 * spec.minor_radius());
    let meridian = LoopPath::meridian(&spec, h.meridian_s, radius, 96)?;
    let flux = loop_integral(&meridian, field, h.quad_tol)?;
    let report = HolonomyReport::compute(&path, &spec, field, flux, h.quad_tol)?;
    let human = format!(
        "holonomy  {:.16e}\nflux      {:.16e}  (meridian at s = {}, radius {})\nlinking   {}\nresidual  {:.3e}  (tolerance {:.1e})\n",
        report.value, report.flux, h.meridian_s, radius, report.linking, report.residual, h.tolerance
    );
    let machine = format!(
        "value,flux,linking,residual\n{},{},{:.16e}\n",
        fmt_row(&[report.value, report.flux]),
        report.linking,
        report.residual
    );
    match &cfg.output {
        Some(_) => {
            print!("{human}");
            write_all(&mut *sink(cfg)?, &machine)?;
        }
        None => write_all(&mut *sink(cfg)?, &format!("{human}\n{machine}"))?,
    }
    if !(report.residual <= h.tolerance) {
        return Err(Failure::Verification(format!(
            "residual {:.3e} exceeds {:.1e} for linking number {}",
            report.residual, h.tolerance, report.linking
        )));
    }
    Ok(())
}

pub fn verify(cfg: &RunConfig) -> Result<(), Failure> {
    let conn = connection(cfg)?;
    let suite = Suite::new(&conn, SuiteConfig { quick: cfg.verify.quick, seed: cfg.seed, ..Default::default() });
    let mut out = sink(cfg)?;
    let mut first_failure = None;
    for id in 1..=10 {
        let outcome = suite.run(id);
        write_all(&mut *out, &format!("{}\n", outcome.line()))?;
        if !outcome.passed && first_failure.is_none() {
            first_failure = Some(format!("check {} ({})", outcome.id, outcome.name));
        }
    }
    match first_failure {
        Some(name) => Err(Failure::Verification(format!("first failing check: {name}"))),
        None => {
            eprintln!("all checks passed");
            Ok(())
        }
    }
}

/// Largest entry breaking axial symmetry, relative to the largest entry.
/// A rotation-invariant source has its x and y components at `m = 1` only
/// and no z component.
fn asymmetric_fraction(t: &CoefficientTable64) -> f64 {
    let mut off = 0.0f64;
    for i in 0..3 {
        for m in (0..=t.m_max()).filter(|&m| i == 2 || m != 1) {
            for n in 0..=t.n_max() {
                off = off.max(t.coefficients(i, n, m).iter().fold(0.0, |acc, v| acc.max(v.abs())));
            }
        }
    }
    let max = t.max_abs();
    if max > 0.0 {
        off / max
    } else {
        off
    }
}

fn quad_spec(spec: &KnotSpec64) -> Result<KnotSpec<Quad>, Failure> {
    let (r, d, m) = (Quad::c(spec.major_radius()), Quad::c(spec.minor_radius()), Quad::c(spec.dipole_density()));
    Ok(if spec.is_unknot() { KnotSpec::unknot(r, d, m)? } else { KnotSpec::new(spec.p(), spec.q(), r, d, m)? })
}

pub fn coeffs(cfg: &RunConfig) -> Result<(), Failure> {
    let spec = cfg.spec()?;
    let c = &cfg.coeffs;
    let (worst, label) = route_discrepancy(&spec, c.compare_n, c.compare_m)?;
    let mut report = format!(
        "route discrepancy (n <= {}, m <= {}, against {label}): {worst:.3e} (tolerance {:.1e})\n",
        c.compare_n, c.compare_m, c.tolerance
    );
    if !(worst <= c.tolerance) {
        eprint!("{report}");
        return Err(Failure::Verification(format!("coefficient routes differ by {worst:.3e}")));
    }
    let policy: TruncationPolicy = cfg.policy();
    let mut cache = Vec::new();
    for region in [Region::Inside, Region::Outside] {
        match c.route {
            Route::Spectral => {
                let t = coefficients_spectral(&spec, region, &policy)?;
                if spec.is_unknot() {
                    report.push_str(&format!(
                        "{} table: largest entry breaking axial symmetry {:.3e} of the largest entry\n",
                        region.name(),
                        asymmetric_fraction(&t)
                    ));
                }
                t.write_cache(&mut cache)
            }
            Route::Quadrature => {
                let t = coefficients_quadrature(&quad_spec(&spec)?, region, &policy, Quad::c(c.quad_tol))?;
                t.write_cache(&mut cache)
            }
        }
        .map_err(|e| io_err("cache", e))?;
    }
    report.push_str(&format!(
        "wrote {} route tables n <= {}, m <= {} (spec hash {})\n",
        match c.route {
            Route::Spectral => "spectral",
            Route::Quadrature => "quadrature",
        },
        policy.n_max,
        policy.m_max,
        spec.spec_hash()
    ));
    let mut out = sink(cfg)?;
    out.write_all(&cache).and_then(|_| out.flush()).map_err(|e| io_err("output", e))?;
    if cfg.output.is_some() {
        print!("{report}");
    } else {
        eprint!("{report}");
    }
    Ok(())
}

fn relative(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let n = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    n([a[0] - b[0], a[1] - b[1], a[2] - b[2]]) / n(*b)
}

/// Seeded points off the knot torus, alternating sides, with
/// `min_gap <= |eta - eta0| <= 1.5`.
fn random_points(spec: &KnotSpec64, count: usize, min_gap: f64, seed: u64) -> Result<Vec<Point>, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, eta0) = (spec.focal_radius(), spec.eta0());
    let max_gap = min_gap.max(1.5);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let gap = rng.random_range(min_gap..=max_gap);
        let eta = if out.len() % 2 == 0 { eta0 + gap } else { eta0 - gap };
        let (theta, phi) = (rng.random_range(-PI..PI), rng.random_range(0.0..TAU));
        if eta < 0.05 {
            continue;
        }
        let tp = ToroidalPoint::new(eta, theta, phi)?;
        out.push(toroidal_to_cartesian(&tp, a)?);
    }
    Ok(out)
}

pub fn compare(cfg: &RunConfig) -> Result<(), Failure> {
    let c = &cfg.compare;
    let spec = cfg.spec()?;
    let points = match &c.points_file {
        Some(p) => input::read_points(p)?,
        None => random_points(&spec, c.count, c.min_gap, cfg.seed)?,
    };
    let conn = connection(cfg)?;
    let rows: Vec<Result<(Vec<f64>, bool), Error>> = points
        .par_iter()
        .map(|x| {
            let mut row = x.to_array().to_vec();
            let series = conn.connection_cartesian(x).and_then(|a| Ok((a, conn.hertz_cartesian(x)?)));
            let oracle = vector_potential_oracle(x, &spec, c.oracle_tol).and_then(|a| Ok((a, hertz_oracle(x, &spec, c.oracle_tol)?)));
            match (series, oracle) {
                (Ok((a, h)), Ok((ao, ho))) => {
                    row.extend(a);
                    row.extend(ao);
                    row.push(relative(&a, &ao));
                    row.push(relative(&h, &ho));
                    Ok((row, false))
                }
                (Err(e), _) | (_, Err(e)) if maskable(&e) => {
                    row.extend([f64::NAN; 8]);
                    Ok((row, true))
                }
                (Err(e), _) | (_, Err(e)) => Err(e),
            }
        })
        .collect();
    let mut text = String::from("x,y,z,Ax,Ay,Az,Ax_oracle,Ay_oracle,Az_oracle,err_A,err_H,masked\n");
    let (mut masked, mut worst_a, mut worst_h) = (0usize, 0.0f64, 0.0f64);
    for (idx, r) in rows.into_iter().enumerate() {
        let (row, m) = r.map_err(|e| Failure::Numerical(format!("point {}: {e}", idx + 1)))?;
        if m {
            masked += 1;
        } else {
            worst_a = worst_a.max(row[9]);
            worst_h = worst_h.max(row[10]);
        }
        text.push_str(&fmt_row(&row));
        text.push_str(if m { ",1\n" } else { ",0\n" });
    }
    write_all(&mut *sink(cfg)?, &text)?;
    eprintln!(
        "compared {} points, {masked} masked, max relative error A {worst_a:.3e}, H {worst_h:.3e} (tolerance {:.1e})",
        points.len(),
        c.tolerance
    );
    let worst = worst_a.max(worst_h);
    if !(worst <= c.tolerance) {
        return Err(Failure::Verification(format!("series and oracle differ by {worst:.3e}")));
    }
    Ok(())
}
