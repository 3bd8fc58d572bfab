use std::path::Path;

use serde::Serialize;

use purcellsim::fit::FitResult;

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A named output file held in memory until the command succeeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Comment line, header row, then one record per row. Floats use the
/// shortest round-trip representation.
pub fn csv_artifact(name: &str, config_sha256: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Artifact {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8");
    Artifact {
        name: name.to_string(),
        contents: format!("# purcellsim {VERSION} config_sha256={config_sha256}\n{body}"),
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn xy_artifact(name: &str, sha: &str, header: [&str; 2], points: impl IntoIterator<Item = (f64, f64)>) -> Artifact {
    csv_artifact(name, sha, &header, points.into_iter().map(|(x, y)| vec![num(x), num(y)]))
}

#[derive(Serialize)]
struct ParamReport<'a> {
    name: &'a str,
    value: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct FitReport<'a> {
    tool: String,
    config_sha256: &'a str,
    model: &'a str,
    params: Vec<ParamReport<'a>>,
    residual_norm: f64,
    converged: bool,
    iterations: usize,
    warnings: Vec<String>,
}

/// Non-finite numbers serialize as `null`.
pub fn fit_artifact(name: &str, sha: &str, model: &str, fit: &FitResult) -> Artifact {
    let report = FitReport {
        tool: format!("purcellsim {VERSION}"),
        config_sha256: sha,
        model,
        params: fit
            .names
            .iter()
            .zip(fit.params.iter().zip(&fit.stderr))
            .map(|(n, (&value, &stderr))| ParamReport { name: n, value, stderr })
            .collect(),
        residual_norm: fit.residual_norm,
        converged: fit.converged,
        iterations: fit.iterations,
        warnings: fit.warnings.iter().map(ToString::to_string).collect(),
    };
    let mut contents = serde_json::to_string_pretty(&report).expect("report serializes");
    contents.push('\n');
    Artifact {
        name: name.to_string(),
        contents,
    }
}

/// Reads the two named columns of a CSV written by this tool (or any CSV
/// with that header; `#` lines are skipped).
pub fn read_xy(path: &Path, header: [&str; 2]) -> Result<Vec<(f64, f64)>, CliError> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let bad = |msg: String| CliError::config(format!("{}: {msg}", path.display()));
    let columns = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let index = |name: &str| {
        columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| bad(format!("missing column {name}")))
    };
    let (ix, iy) = (index(header[0])?, index(header[1])?);
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| -> Result<f64, CliError> {
            rec.get(i).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| {
                bad(format!(
                    "row {}: unparsable value in column {}",
                    row + 1,
                    columns.get(i).unwrap_or("?")
                ))
            })
        };
        out.push((field(ix)?, field(iy)?));
    }
    Ok(out)
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for a in artifacts {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.contents).map_err(|source| CliError::Io { path, source })?;
    }
    Ok(())
}
