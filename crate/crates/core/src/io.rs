//! CSV conventions shared by every table this crate writes: header row,
//! 17 significant digits, LF line endings.

use std::path::Path;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // Normalise the sign of zero so equal tables compare equal bytewise.
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

pub fn csv_writer(path: &Path) -> csv::Result<csv::Writer<std::fs::File>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)
}

pub fn csv_reader(path: &Path, has_headers: bool) -> csv::Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new().has_headers(has_headers).trim(csv::Trim::All).from_path(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, -0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(-0.0), fmt_f64(0.0));
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    }
}
