//! Loop and point files.
//!
//! Both hold one `x y z` point per line; blank lines and lines starting
//! with `#` are ignored. A loop file ends with `closed +1` or `closed -1`,
//! the sign giving the direction of travel relative to the listed order.

use std::path::Path;

use knotfield::geometry::CartesianPoint;
use knotfield::LoopPath64;

use crate::Failure;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_point(line: &str) -> Result<CartesianPoint<f64>, String> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(format!("expected 3 coordinates, found {}", fields.len()));
    }
    let mut v = [0.0; 3];
    for (slot, f) in v.iter_mut().zip(&fields) {
        *slot = f.parse::<f64>().map_err(|_| format!("'{f}' is not a number"))?;
        if !slot.is_finite() {
            return Err(format!("'{f}' is not finite"));
        }
    }
    Ok(CartesianPoint::from_array(v))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_loop(text: &str, origin: &str) -> Result<LoopPath64, Failure> {
    let bad = |line: usize, msg: String| Failure::Input(format!("{origin}:{line}: {msg}"));
    let mut samples = Vec::new();
    let mut orientation = None;
    let mut last_line = 0;
    for (no, line) in content_lines(text) {
        last_line = no;
        if orientation.is_some() {
            return Err(bad(no, "content after the closing line".into()));
        }
        if let Some(rest) = line.strip_prefix("closed") {
            orientation = Some(match rest.trim() {
                "+1" | "1" => 1i8,
                "-1" => -1i8,
                other => return Err(bad(no, format!("orientation must be +1 or -1, found '{other}'"))),
            });
            continue;
        }
        samples.push(parse_point(line).map_err(|m| bad(no, m))?);
    }
    let Some(orientation) = orientation else {
        return Err(bad(last_line.max(1), "missing terminating 'closed +1' or 'closed -1' line".into()));
    };
    LoopPath64::new(samples, orientation).map_err(|e| bad(last_line, e.to_string()))
}

pub fn read_loop(path: &Path) -> Result<LoopPath64, Failure> {
    parse_loop(&read(path)?, &path.display().to_string())
}

pub fn parse_points(text: &str, origin: &str) -> Result<Vec<CartesianPoint<f64>>, Failure> {
    let pts = content_lines(text)
        .map(|(no, line)| parse_point(line).map_err(|m| Failure::Input(format!("{origin}:{no}: {m}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if pts.is_empty() {
        return Err(Failure::Input(format!("{origin}: no points")));
    }
    Ok(pts)
}

pub fn read_points(path: &Path) -> Result<Vec<CartesianPoint<f64>>, Failure> {
    parse_points(&read(path)?, &path.display().to_string())
}

/// Writes a loop in the format `read_loop` accepts.
#[cfg(test)]
pub fn format_loop(path: &LoopPath64) -> String {
    let mut out = String::new();
    for p in path.samples() {
        out.push_str(&format!("{:.16e} {:.16e} {:.16e}\n", p.x, p.y, p.z));
    }
    out.push_str(if path.orientation() > 0 { "closed +1\n" } else { "closed -1\n" });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loop_round_trip() {
        let text = "# square\n0 0 0\n1 0 0\n\n1 1 0\nclosed -1\n";
        let path = parse_loop(text, "t").unwrap();
        assert_eq!(path.samples().len(), 3);
        assert_eq!(path.orientation(), -1);
        let again = parse_loop(&format_loop(&path), "t").unwrap();
        assert_eq!(again.samples(), path.samples());
    }

    #[test]
    fn loop_errors_carry_line_numbers() {
        let msg = |t: &str| parse_loop(t, "f").unwrap_err().to_string();
        assert!(msg("0 0 0\n1 0\n1 1 0\nclosed +1\n").contains("f:2:"));
        assert!(msg("0 0 0\n1 0 0\n1 1 0\n").contains("missing"));
        assert!(msg("0 0 0\n1 0 0\n1 1 0\nclosed 2\n").contains("f:4:"));
        assert!(msg("0 0 0\n1 0 0\n1 1 0\nclosed +1\n2 2 2\n").contains("f:5:"));
        assert!(msg("0 0 x\n").contains("'x'"));
    }
}
