//! CSV and SVG writers for result rows.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

use crate::eval::Row;
use crate::plot::{Chart, Series};
use crate::spec::{Engine, Metric};

/// Serializes rows with the fixed header. Floats use the shortest
/// round-trip representation, so equal results give equal bytes.
pub fn csv_bytes(rows: &[Row]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(Row::HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    Ok(w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?)
}

pub fn write_csv(path: &Path, rows: &[Row]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, csv_bytes(rows)?).with_context(|| format!("writing {}", path.display()))
}

pub fn write_svg(path: &Path, chart: &Chart) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, chart.to_svg()).with_context(|| format!("writing {}", path.display()))
}

/// The rows of one metric and engine as a plot series. Simulated points
/// get markers with 95% error bars; analytic points are joined by lines.
pub fn series(rows: &[Row], metric: Metric, engine: Engine, label: impl Into<String>) -> Series {
    let mut s = Series::line(label);
    s.markers_only = engine == Engine::Mc;
    s.points = rows
        .iter()
        .filter(|r| r.metric == metric && r.engine == engine)
        .filter_map(|r| r.mean.map(|m| (r.value, m, r.std_err.map(|e| 1.96 * e))))
        .collect();
    s
}

/// One chart per metric, with one series per engine that has values.
pub fn sweep_charts(rows: &[Row], x_label: &str) -> Vec<(Metric, Chart)> {
    let mut metrics: Vec<Metric> = rows.iter().map(|r| r.metric).collect();
    metrics.sort();
    metrics.dedup();
    metrics
        .into_iter()
        .map(|m| {
            let series = [Engine::Mc, Engine::Analytic]
                .into_iter()
                .map(|e| series(rows, m, e, e.as_str()))
                .filter(|s| !s.points.is_empty())
                .collect();
            let chart = Chart {
                title: m.as_str().to_owned(),
                x_label: x_label.to_owned(),
                y_label: m.label().to_owned(),
                log_y: false,
                series,
            };
            (m, chart)
        })
        .collect()
}

/// Writes `<stem>.csv` and `<stem>_<metric>.svg` files into `dir`.
pub fn write_sweep(dir: &Path, stem: &str, rows: &[Row], x_label: &str) -> anyhow::Result<Vec<PathBuf>> {
    let csv = dir.join(format!("{stem}.csv"));
    write_csv(&csv, rows)?;
    let mut files = vec![csv];
    for (m, chart) in sweep_charts(rows, x_label) {
        let p = dir.join(format!("{stem}_{}.svg", m.as_str()));
        write_svg(&p, &chart)?;
        files.push(p);
    }
    Ok(files)
}
