//! Classification metrics and embedding projection.

mod metrics;
mod pca;

use std::io::Write;

pub use metrics::{
    coarse_f1, confusion_matrix, evaluate, f1_per_class, weighted_fine_f1, ClassMetrics,
    ClassReport, Confusion, EvalReport,
};
pub use pca::{pca_project, PcaProjection};

use crate::error::{Error, Result};

/// Writes `id,label,x,y` rows for the first two projected coordinates.
pub fn write_projection_csv<W: Write>(
    out: &mut W,
    ids: &[String],
    labels: &[String],
    projection: &PcaProjection,
) -> Result<()> {
    let coords = &projection.coordinates;
    if ids.len() != coords.nrows() || labels.len() != coords.nrows() {
        return Err(Error::dim(format!(
            "{} ids and {} labels for {} projected points",
            ids.len(),
            labels.len(),
            coords.nrows()
        )));
    }
    if coords.ncols() < 2 {
        return Err(Error::dim("CSV output needs two components"));
    }
    writeln!(out, "id,label,x,y")?;
    for (i, (id, label)) in ids.iter().zip(labels).enumerate() {
        writeln!(
            out,
            "{},{},{},{}",
            csv_field(id),
            csv_field(label),
            coords[[i, 0]],
            coords[[i, 1]]
        )?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
