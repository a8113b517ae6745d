use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::RunReport;
use crate::dns::write_series_csv;
use crate::error::Result;

/// How the harness picks the time step when `auto_dt` is set.
pub const DT_RULE: &str = "dt = min(0.2 pi / (max(|c_v|, |c_theta|) k_M), 1e-2), \
     capped at half the advective limit 1 / (max|v| k_M + max|w| N pi) of the initial state, \
     then shortened so that t_end is reached in a whole number of steps";

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    kind: String,
    pass: bool,
    report: &'a RunReport,
    dt_rule: &'static str,
    files: Vec<String>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes every series, table and plot script of `report` into `dir`
/// (created if needed) with names prefixed by the experiment kind, followed
/// by the JSON manifest `<kind>.json` listing them. Returns the manifest path.
pub fn write_outputs(report: &RunReport, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let kind = report.kind.name();
    let mut files = Vec::new();
    let mut csv_of = Vec::new();
    for (label, series) in &report.series {
        let name = format!("{kind}_{label}.csv");
        let mut w = create(&dir.join(&name))?;
        write_series_csv(series, &mut w)?;
        w.flush()?;
        csv_of.push((label.clone(), name.clone()));
        files.push(name);
    }
    for table in &report.tables {
        let name = format!("{kind}_{}.csv", table.name);
        let mut w = create(&dir.join(&name))?;
        writeln!(w, "{}", table.header.join(","))?;
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
        csv_of.push((table.name.clone(), name.clone()));
        files.push(name);
    }
    for plot in &report.plots {
        let Some((_, csv)) = csv_of.iter().find(|(label, _)| *label == plot.table) else {
            continue;
        };
        let name = format!("{kind}_{}.gp", plot.name);
        let body = plot
            .body
            .replace("{csv}", csv)
            .replace(&format!("'{}.png'", plot.name), &format!("'{kind}_{}.png'", plot.name));
        std::fs::write(dir.join(&name), body)?;
        files.push(name);
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        kind: kind.to_string(),
        pass: report.pass,
        report,
        dt_rule: DT_RULE,
        files,
    };
    let path = dir.join(format!("{kind}.json"));
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    writeln!(w)?;
    w.flush()?;
    Ok(path)
}
