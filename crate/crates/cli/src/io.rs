use std::io::Write;
use std::path::Path;

use kinkscan::scenario::{Dataset, Latents};

use crate::error::{CliError, CliResult};

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.flush().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn provenance_line(seed: u64, config_sha256: &str) -> String {
    format!("# master_seed={seed} config_sha256={config_sha256}\n")
}

/// Dataset CSV: `x,y` plus `eps,F` when latents are present.
pub fn dataset_csv(data: &Dataset<f64>, header_comment: &str) -> String {
    let mut out = String::from(header_comment);
    let latents = data.latents.as_ref();
    out.push_str(if latents.is_some() {
        "x,y,eps,F\n"
    } else {
        "x,y\n"
    });
    for i in 0..data.n() {
        out.push_str(&fmt_float(data.x[i]));
        out.push(',');
        out.push_str(&fmt_float(data.y[i]));
        if let Some(l) = latents {
            out.push(',');
            out.push_str(&fmt_float(l.epsilon[i]));
            out.push(',');
            out.push_str(&fmt_float(l.f_of_x[i]));
        }
        out.push('\n');
    }
    out
}

/// Reads a dataset CSV; `#` lines are comments. An `F` column becomes the
/// oracle design CDF and an `eps` column the latent errors.
pub fn read_dataset(path: &Path) -> CliResult<Dataset<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            other => CliError::Usage(format!("{}: {other:?}", path.display())),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let (xi, yi) = match (column("x"), column("y")) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            return Err(CliError::Data {
                line: reader.position().line(),
                message: format!(
                    "header must contain x and y columns, got '{}'",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            })
        }
    };
    let (ei, fi) = (column("eps"), column("F"));
    let (mut x, mut y, mut eps, mut f) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> CliResult<f64> {
            let raw = record.get(i).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Data {
                    line,
                    message: format!("column {name}: cannot parse '{raw}' as a finite number"),
                })
        };
        x.push(field(xi, "x")?);
        y.push(field(yi, "y")?);
        if let Some(i) = ei {
            eps.push(field(i, "eps")?);
        }
        if let Some(i) = fi {
            f.push(field(i, "F")?);
        }
    }
    let mut data = Dataset::from_xy(x, y)?;
    if fi.is_some() {
        data.latents = Some(Latents {
            epsilon: eps,
            f_of_x: f,
            theta: Vec::new(),
            lambda: Vec::new(),
        });
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 123456.789, f64::MIN_POSITIVE] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn malformed_row_reports_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "# c\nx,y\n0.1,0.2\n0.3,abc\n").unwrap();
        let err = read_dataset(&path).unwrap_err().to_string();
        assert!(err.contains("line 4"), "{err}");
        std::fs::write(&path, "x,y\n0.1,0.2\n0.3\n").unwrap();
        let err = read_dataset(&path).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
