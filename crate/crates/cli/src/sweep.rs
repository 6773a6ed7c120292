use std::path::{Path, PathBuf};

use qfim_core::QfimOptions;

use crate::compute::compute;
use crate::error::{CliError, Result};
use crate::report::ReportFile;
use crate::scene_file::{SceneFile, SweepParameter};

pub const CSV_NAME: &str = "sweep.csv";

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub reports: Vec<(f64, ReportFile)>,
    pub report_paths: Vec<PathBuf>,
    pub csv_path: PathBuf,
}

/// Evaluates every sweep value in order. The swept value replaces the
/// scene's own.
pub fn run_sweep(file: &SceneFile, opts: QfimOptions) -> Result<Vec<(f64, ReportFile)>> {
    let sweep = file
        .options
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Usage("scene file has no options.sweep section".into()))?;
    let param = SweepParameter::parse(&sweep.parameter)
        .ok_or_else(|| CliError::Usage(format!("unknown sweep parameter {:?}", sweep.parameter)))?;
    let mut out = Vec::with_capacity(sweep.values.len());
    for &value in &sweep.values {
        let mut point = file.clone();
        point.options.sweep = None;
        param.apply(&mut point.scene, value)?;
        out.push((value, compute(&point, opts)?));
    }
    Ok(out)
}

/// Writes `report_NNN.json` per value and a CSV of the upper triangle of `H`.
pub fn write_sweep(file: &SceneFile, opts: QfimOptions, dir: &Path) -> Result<SweepOutput> {
    let reports = run_sweep(file, opts)?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let parameter = file.options.sweep.as_ref().map(|s| s.parameter.clone()).unwrap_or_default();

    let mut report_paths = Vec::with_capacity(reports.len());
    for (i, (_, rep)) in reports.iter().enumerate() {
        let path = dir.join(format!("report_{i:03}.json"));
        std::fs::write(&path, rep.to_json()).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        report_paths.push(path);
    }

    let csv_path = dir.join(CSV_NAME);
    let mut w = csv::Writer::from_path(&csv_path)?;
    let labels = reports.first().map(|(_, r)| r.labels.clone()).unwrap_or_default();
    let n = labels.len();
    let mut header = vec![parameter, "max_relative_residual".to_string()];
    for i in 0..n {
        for j in i..n {
            header.push(format!("H[{},{}]", labels[i], labels[j]));
        }
    }
    w.write_record(&header)?;
    for (value, rep) in &reports {
        let worst = rep
            .diagnostics
            .params
            .iter()
            .map(|p| p.relative_residual)
            .fold(0.0, f64::max);
        let mut row = vec![value.to_string(), worst.to_string()];
        for i in 0..n {
            for j in i..n {
                row.push(rep.h[i][j].to_string());
            }
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CliError::io(format!("writing {}", csv_path.display()), e))?;
    Ok(SweepOutput {
        reports,
        report_paths,
        csv_path,
    })
}
