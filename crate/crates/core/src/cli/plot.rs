//! Tidy CSV files for external plotting, one per figure id.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::verification::{Table, VerificationReport};

/// Figures always written, header-only when no report contributes rows.
pub const STANDARD_FIGURES: [(&str, &[&str]); 4] = [
    ("exceedance_vs_eps", &["epsilon", "p_hat", "ci_lo", "ci_hi", "T", "replicas"]),
    ("moment_vs_bound", &["p", "t", "estimate", "ci_lo", "ci_hi", "ln_bound"]),
    (
        "tail_exponent_vs_m",
        &["A1", "A2", "p", "eta", "m", "exponent", "dominating_term", "m_star_flag"],
    ),
    (
        "holder_quotients",
        &["is_time", "offset", "norm", "quotient", "beta", "p", "t", "bound"],
    ),
];

/// Merges the reports' tables by figure id, in first-seen order after the
/// standard figures.
pub fn collect_figures(reports: &[VerificationReport]) -> Result<Vec<Table>> {
    let mut figures: Vec<Table> = STANDARD_FIGURES
        .iter()
        .map(|(id, cols)| Table::new(id, cols))
        .collect();
    for table in reports.iter().flat_map(|r| &r.tables) {
        match figures.iter_mut().find(|f| f.figure == table.figure) {
            Some(f) if f.rows.is_empty() && f.columns != table.columns => {
                // a standard figure is only a default schema
                *f = table.clone();
            }
            Some(f) if f.columns == table.columns => f.rows.extend(table.rows.iter().cloned()),
            Some(f) => {
                return Err(Error::Precondition(format!(
                    "figure `{}` has conflicting columns: {:?} vs {:?}",
                    f.figure, f.columns, table.columns
                )))
            }
            None => figures.push(table.clone()),
        }
    }
    Ok(figures)
}

/// Writes `<dir>/<figure>.csv` for every figure and returns the paths.
pub fn emit_plot_data(reports: &[VerificationReport], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    collect_figures(reports)?
        .into_iter()
        .map(|t| {
            let path = dir.join(format!("{}.csv", t.figure));
            std::fs::write(&path, t.to_csv())?;
            Ok(path)
        })
        .collect()
}
