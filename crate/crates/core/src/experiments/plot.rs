use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::curve::{format_mm, BerCurve, BerValue};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotFiles {
    pub data: PathBuf,
    pub script: PathBuf,
}

/// `r0,<series>...` with r0 in mm. Zero-error points are written as `nan`
/// so a log axis skips them.
pub fn plot_data_csv(curve: &BerCurve) -> Result<String> {
    if curve.points.is_empty() {
        return Err(Error::InvalidParameter("cannot plot an empty curve".into()));
    }
    let labels = curve.labels();
    let series: Vec<_> = labels
        .iter()
        .map(|l| curve.series(l).expect("label comes from the curve"))
        .collect();
    let mut out = format!("r0,{}\n", labels.join(","));
    for (i, p) in curve.points.iter().enumerate() {
        out.push_str(&format_mm(p.r0));
        for s in &series {
            match s.ber[i] {
                BerValue::Measured(v) => {
                    let _ = write!(out, ",{v:.6e}");
                }
                BerValue::Below(_) => out.push_str(",nan"),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

fn plot_script(data_file: &str, image_file: &str, labels: &[String]) -> String {
    let series = labels
        .iter()
        .map(|l| format!("{l:?}"))
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        r#"import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))
data = np.genfromtxt(os.path.join(here, {data_file:?}), delimiter=",", names=True)

fig, ax = plt.subplots(figsize=(6, 4))
for name in [{series}]:
    ax.semilogy(data["r0"], data[name], marker="o", label=name)
ax.set_xlabel("r0 (mm)")
ax.set_ylabel("BER")
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, {image_file:?}), dpi=150)
"#
    )
}

/// Writes `<stem>.csv` and a matplotlib script `<stem>.py` that renders
/// `<stem>.png` next to them.
pub fn render_plot_data(curve: &BerCurve, stem: impl AsRef<Path>) -> Result<PlotFiles> {
    let stem = stem.as_ref();
    let csv = plot_data_csv(curve)?;
    let data = stem.with_extension("csv");
    let script = stem.with_extension("py");
    let file_name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let image = file_name(&stem.with_extension("png"));
    std::fs::write(&data, csv).map_err(|e| Error::io(&data, e))?;
    std::fs::write(&script, plot_script(&file_name(&data), &image, &curve.labels()))
        .map_err(|e| Error::io(&script, e))?;
    Ok(PlotFiles { data, script })
}
