//! Horizontal curve comparison: the dB gap between two BER curves at a
//! target error rate, by log-linear interpolation along each curve.

use std::fmt;
use std::path::Path;

/// A curve point as read back from a result CSV.
#[derive(Clone, Copy, Debug)]
pub struct CsvPoint {
    pub snr_db: f64,
    pub ber: f64,
}

#[derive(Debug)]
pub enum CompareError {
    Io(String),
    Malformed(String),
    /// The target BER lies outside a curve's estimated range.
    NotComparable(String),
}

impl fmt::Display for CompareError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompareError::Io(m) | CompareError::Malformed(m) | CompareError::NotComparable(m) => {
                write!(f, "{m}")
            }
        }
    }
}

impl std::error::Error for CompareError {}

pub fn read_curve(path: &Path) -> Result<Vec<CsvPoint>, CompareError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CompareError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CompareError::Malformed(format!("{} is empty", path.display())))?;
    if !header.starts_with("snr_db,ber") {
        return Err(CompareError::Malformed(format!(
            "{} does not look like a BER CSV (header: {header})",
            path.display()
        )));
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 2 {
            return Err(CompareError::Malformed(format!(
                "{} line {}: expected at least 2 columns",
                path.display(),
                i + 2
            )));
        }
        let parse = |s: &str| -> Result<f64, CompareError> {
            s.parse().map_err(|_| {
                CompareError::Malformed(format!(
                    "{} line {}: bad number {s}",
                    path.display(),
                    i + 2
                ))
            })
        };
        points.push(CsvPoint {
            snr_db: parse(cols[0])?,
            ber: parse(cols[1])?,
        });
    }
    points.sort_by(|a, b| a.snr_db.partial_cmp(&b.snr_db).unwrap());
    Ok(points)
}

/// SNR (dB) at which the curve crosses the target BER, interpolating
/// linearly in (dB, log₁₀ BER) on the first bracketing segment.
pub fn snr_at_ber(points: &[CsvPoint], target: f64) -> Result<f64, CompareError> {
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.snr_db, p.ber)).collect();
    bastc::engine::snr_at_ber(&pairs, target)
        .map_err(|e| CompareError::NotComparable(e.to_string()))
}

/// Gap report at one target BER: positive `gap_db` means curve `b`
/// reaches the target at a lower SNR than curve `a`.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct GapReport {
    pub target_ber: f64,
    pub snr_a_db: f64,
    pub snr_b_db: f64,
    pub gap_db: f64,
}

pub fn compare_curves(
    a: &[CsvPoint],
    b: &[CsvPoint],
    target_ber: f64,
) -> Result<GapReport, CompareError> {
    let snr_a = snr_at_ber(a, target_ber)?;
    let snr_b = snr_at_ber(b, target_ber)?;
    Ok(GapReport {
        target_ber,
        snr_a_db: snr_a,
        snr_b_db: snr_b,
        gap_db: snr_a - snr_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: &[(f64, f64)]) -> Vec<CsvPoint> {
        points
            .iter()
            .map(|&(snr_db, ber)| CsvPoint { snr_db, ber })
            .collect()
    }

    #[test]
    fn identical_curves_have_zero_gap() {
        let a = curve(&[(0.0, 1e-1), (10.0, 1e-2), (20.0, 1e-3)]);
        let r = compare_curves(&a, &a, 3e-3).unwrap();
        assert!(r.gap_db.abs() < 1e-12);
    }

    #[test]
    fn shifted_curve_reports_the_shift() {
        let a = curve(&[(0.0, 1e-1), (10.0, 1e-2), (20.0, 1e-3)]);
        let b = curve(&[(-2.0, 1e-1), (8.0, 1e-2), (18.0, 1e-3)]);
        let r = compare_curves(&a, &b, 1e-2).unwrap();
        assert!((r.gap_db - 2.0).abs() < 0.01, "gap {}", r.gap_db);
    }

    #[test]
    fn out_of_range_target_is_not_comparable() {
        let a = curve(&[(0.0, 1e-1), (10.0, 1e-2)]);
        assert!(matches!(
            compare_curves(&a, &a, 1e-6),
            Err(CompareError::NotComparable(_))
        ));
    }
}
