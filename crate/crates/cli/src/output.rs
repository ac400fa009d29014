//! Writers for the files a run leaves in its output directory.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// Pretty JSON with a trailing newline.
pub fn write_json<S: Serialize>(dir: &Path, name: &str, value: &S) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

/// A CSV file of preformatted cells.
pub fn write_csv(dir: &Path, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(dir.join(name))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest decimal that reads back to the same f64.
pub fn num(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        tropifs::BOTTOM_TOKEN.to_string()
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, -1.0, 0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
    }
}
