//! Report files: `report.json`, optional CSV tables and matrix dumps.

use std::fs;
use std::path::Path;

use crate::error::CliError;
use crate::report::Report;
use crate::run::Session;

pub const REPORT_FILE: &str = "report.json";

pub fn to_json(report: &Report) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn from_json(src: &str) -> Result<Report, CliError> {
    Ok(serde_json::from_str(src)?)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn tag<S: serde::Serialize>(value: &S) -> String {
    serde_json::to_value(value)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub(crate) fn write_outputs(session: &Session<'_>, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let report = &session.report;
    let path = dir.join(REPORT_FILE);
    fs::write(&path, to_json(report)?).map_err(io_err(&path))?;

    if session.cfg.output.csv {
        if let Some(s) = &report.spectrum {
            let mut w = csv::Writer::from_path(dir.join("eigenvalues.csv"))?;
            w.write_record(["index", "eigenvalue", "residual"])?;
            for (i, (ev, res)) in s.eigenvalues.iter().zip(&s.residuals).enumerate() {
                w.write_record([i.to_string(), ev.to_string(), res.to_string()])?;
            }
            w.flush().map_err(io_err(dir))?;
        }
        let mut w = csv::Writer::from_path(dir.join("bounds.csv"))?;
        w.write_record([
            "bound",
            "target",
            "method",
            "value",
            "constituent",
            "constituent_value",
            "provenance",
        ])?;
        for b in &report.bounds {
            let value = b.result.value.map(|v| v.to_string()).unwrap_or_default();
            for c in &b.result.constituents {
                w.write_record([
                    b.id.clone(),
                    tag(&b.result.target),
                    tag(&b.result.method),
                    value.clone(),
                    c.name.clone(),
                    c.value.to_string(),
                    tag(&c.provenance),
                ])?;
            }
        }
        w.flush().map_err(io_err(dir))?;
    }

    if session.cfg.output.dump_matrices {
        if let Some(op) = &session.op {
            let mut w = csv::Writer::from_path(dir.join("stiffness.csv"))?;
            w.write_record(["row", "col", "value"])?;
            for (i, j, v) in op.stiffness().triplets() {
                w.write_record([i.to_string(), j.to_string(), v.to_string()])?;
            }
            w.flush().map_err(io_err(dir))?;

            let grid = op.grid();
            let mut w = csv::Writer::from_path(dir.join("mass.csv"))?;
            let mut header = vec!["node".to_string()];
            header.extend((1..=grid.dim).map(|i| format!("x{i}")));
            header.push("mass".into());
            w.write_record(&header)?;
            for (k, m) in op.mass().iter().enumerate() {
                let mut row = vec![k.to_string()];
                row.extend(grid.node(k).iter().map(|x| x.to_string()));
                row.push(m.to_string());
                w.write_record(&row)?;
            }
            w.flush().map_err(io_err(dir))?;
        }
        if let Some(s) = &session.spectrum {
            let mut w = csv::Writer::from_path(dir.join("eigenvectors.csv"))?;
            let mut header = vec!["node".to_string()];
            header.extend((0..s.vectors.len()).map(|j| format!("v{j}")));
            w.write_record(&header)?;
            let len = s.vectors.first().map_or(0, Vec::len);
            for k in 0..len {
                let mut row = vec![k.to_string()];
                row.extend(s.vectors.iter().map(|v| v[k].to_string()));
                w.write_record(&row)?;
            }
            w.flush().map_err(io_err(dir))?;
        }
    }
    Ok(())
}
