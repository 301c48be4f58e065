use std::path::Path;

use crate::error::{CliError, CliResult};

pub const PLOT_HEADER: &str = "series,x,value,variance";

/// Long-format rows from the correlation and spectrum CSVs found in `dir`.
///
/// Both layouts keep the value in column 1 and the variance in column 3:
/// correlations give `(t, re, variance)`, spectra `(omega, modulus, variance)`.
pub fn plot_data(dir: &Path) -> CliResult<String> {
    if !dir.is_dir() {
        return Err(CliError::Io(format!("artifact directory {} not found", dir.display())));
    }
    let mut names: Vec<String> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv") && (n.starts_with("ttc_") || n.starts_with("spectrum_site")))
        .collect();
    names.sort();
    let mut out = String::from(PLOT_HEADER);
    out.push('\n');
    for name in names {
        let series = name.trim_end_matches(".csv");
        let mut rdr = csv::Reader::from_path(dir.join(&name))?;
        for rec in rdr.records() {
            let rec = rec?;
            let cell = |i: usize| rec.get(i).ok_or_else(|| CliError::Io(format!("{name}: short row")));
            out.push_str(&format!("{series},{},{},{}\n", cell(0)?, cell(1)?, cell(3)?));
        }
    }
    Ok(out)
}
