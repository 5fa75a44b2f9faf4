//! Bit-stable artifact serialization: fixed field order, 17-significant-digit
//! floats, LF line endings.

use std::fs;
use std::io::Write;
use std::path::Path;

/// 17 significant digits round-trip any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write CSV rows (already formatted) under a fixed header.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> std::io::Result<()> {
    let mut buf = String::with_capacity(rows.len() * 64 + header.len() + 1);
    buf.push_str(header);
    buf.push('\n');
    for row in rows {
        buf.push_str(row);
        buf.push('\n');
    }
    atomic_write(path, buf.as_bytes())
}

/// Serialize any fixed-field-order value as pretty JSON with LF endings.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    atomic_write(path, s.as_bytes())
}

fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_17_digits() {
        assert_eq!(fmt_f64(0.25), "2.5000000000000000e-1");
        let x = 0.1 + 0.2;
        let s = fmt_f64(x);
        assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn empty_report_gives_header_only_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.csv");
        write_csv(&p, "a,b,c", &[]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "a,b,c\n");
    }

    #[test]
    fn writes_are_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rows.csv");
        let rows = vec![format!("{},{}", fmt_f64(1.0 / 3.0), 7)];
        write_csv(&p, "x,k", &rows).unwrap();
        let first = fs::read(&p).unwrap();
        write_csv(&p, "x,k", &rows).unwrap();
        assert_eq!(first, fs::read(&p).unwrap());
        assert!(!first.contains(&b'\r'));
    }

    #[test]
    fn gaussian_report_round_trips_through_json() {
        use innerclt::harness::*;
        let rep = GaussianReport {
            n: 4,
            sample_count: 1000,
            sigma: 1.5,
            mean_re: 0.0,
            mean_im: -0.1,
            second_moment: 2.0,
            covariance: [[1.0, 0.0], [0.0, 1.0]],
            cf_table: vec![CfRow { t_re: 0.0, t_im: 0.0, cf_re: 1.0, cf_im: 0.0, target: 1.0, gap: 0.0 }],
            cf_sup_gap: 0.0,
            ks_re: KsOutcome { statistic: 0.01, p_value: 0.5 },
            ks_im: KsOutcome { statistic: 0.01, p_value: 0.5 },
            radial_ks: KsOutcome { statistic: 0.01, p_value: 0.5 },
            thresholds: Thresholds::default().resolve(1000),
            verdicts: Verdicts {
                mean: true,
                second_moment: true,
                cf: true,
                ks_re: true,
                ks_im: true,
                radial: true,
            },
            pass: true,
        };
        let s = serde_json::to_string(&rep).unwrap();
        let back: GaussianReport = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }
}
