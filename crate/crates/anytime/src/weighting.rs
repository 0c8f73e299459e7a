//! Weighting and interrupt-sample files.
//!
//! Piecewise-constant weightings are CSV rows `time_ms,weight`; sample files
//! hold one `time_ms` per row. A non-numeric first row is taken as a header
//! and lines starting with `#` are ignored.

use std::path::Path;

use anyhow::{bail, Context, Result};
use anytime_core::Weighting;

fn read_rows(path: &Path, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("reading {}", path.display()))?;
        if record.len() != columns {
            bail!("{}: row {} has {} columns, expected {columns}", path.display(), i + 1, record.len());
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(values) => rows.push(values),
            Err(_) if i == 0 => continue,
            Err(e) => bail!("{}: row {}: {e}", path.display(), i + 1),
        }
    }
    Ok(rows)
}

pub fn read_piecewise(path: &Path) -> Result<Weighting> {
    let rows = read_rows(path, 2)?;
    Weighting::piecewise(rows.into_iter().map(|r| (r[0], r[1])).collect())
        .with_context(|| path.display().to_string())
}

pub fn read_samples(path: &Path) -> Result<Vec<f64>> {
    Ok(read_rows(path, 1)?.into_iter().map(|r| r[0]).collect())
}

/// Parses `uniform`, `piecewise:<file>` or `samples:<file>`.
pub fn parse_weighting(arg: &str) -> Result<Weighting> {
    if arg == "uniform" {
        return Ok(Weighting::Uniform);
    }
    if let Some(file) = arg.strip_prefix("piecewise:") {
        return read_piecewise(Path::new(file));
    }
    if let Some(file) = arg.strip_prefix("samples:") {
        let samples = read_samples(Path::new(file))?;
        return Weighting::samples(samples).with_context(|| file.to_string());
    }
    bail!("unknown weighting {arg:?}; expected uniform, piecewise:<file> or samples:<file>")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn piecewise_with_header_and_comments() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "time_ms,weight\n# early interrupts are rare\n0,0.5\n2.5, 2").unwrap();
        let w = read_piecewise(f.path()).unwrap();
        assert_eq!(w, Weighting::PiecewiseConstant(vec![(0.0, 0.5), (2.5, 2.0)]));
    }

    #[test]
    fn samples_are_sorted() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "3\n1\n2").unwrap();
        let arg = format!("samples:{}", f.path().display());
        assert_eq!(parse_weighting(&arg).unwrap(), Weighting::EmpiricalSamples(vec![1.0, 2.0, 3.0]));
    }

    #[test]
    fn bad_input_is_rejected() {
        assert!(parse_weighting("gaussian").is_err());
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "0,1\nx,2").unwrap();
        assert!(read_piecewise(f.path()).is_err());
    }
}
