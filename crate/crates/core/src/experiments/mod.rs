//! Canned reproductions: the two mode-pair plans, r0 sweeps, BER tables,
//! plot data, and the distance-gain table.

pub mod config;
pub mod curve;
pub mod distance;
pub mod plan;
pub mod plot;

pub use config::{output_dir_from_env, PlanConfig, OUTPUT_DIR_ENV};
pub use curve::{diversity_label, BerCurve, BerSeries, BerTable, BerValue};
pub use distance::{crossing_r0, distance_gain_percent, distance_gain_table, Crossing, DistanceRow, DistanceTable};
pub use plan::{run_sweep, ExperimentPlan, BUILTIN_PLANS};
pub use plot::{plot_data_csv, render_plot_data, PlotFiles};
