//! Plan files: TOML naming a built-in plan plus optional overrides.
//!
//! ```toml
//! plan = "paper-n4"
//! bits_per_screen = 20000
//! screens = 512
//! seed = 7
//! noise_sigma = 0.15
//! r0_sweep_mm = [1.0, 4.5, 17.0]
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::link::Arm;
use crate::modes::ModeSpec;

use super::plan::{default_grid, parse_combining, parse_detection, ExperimentPlan, BUILTIN_PLANS};

/// Environment variable that replaces the output directory of any plan.
pub const OUTPUT_DIR_ENV: &str = "MODALDIV_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "results";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    /// Built-in plan the overrides apply to.
    pub plan: String,
    /// Name used for output files; defaults to the built-in name.
    pub name: Option<String>,
    #[serde(default)]
    pub full_scale: bool,
    pub bits_per_screen: Option<u64>,
    pub screens: Option<usize>,
    pub seed: Option<u64>,
    pub noise_sigma: Option<f64>,
    pub threshold_fraction: Option<f64>,
    pub receiver_sensitivity: Option<f64>,
    /// Waist of both modes, in mm.
    pub waist_mm: Option<f64>,
    pub grid_samples: Option<usize>,
    /// Grid extent in mm; defaults to ten widest beam diameters.
    pub grid_extent_mm: Option<f64>,
    pub subharmonics: Option<u32>,
    pub outer_scale_m: Option<f64>,
    pub r0_sweep_mm: Option<Vec<f64>>,
    pub strehl_diameter_mm: Option<f64>,
    pub combining: Option<String>,
    pub detection: Option<String>,
    pub threads: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl PlanConfig {
    pub fn builtin(name: &str) -> Self {
        Self {
            plan: name.to_string(),
            ..Self::default()
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    /// A built-in plan name, or a path to a plan file.
    pub fn resolve(plan_or_path: &str) -> Result<Self> {
        if BUILTIN_PLANS.contains(&plan_or_path) {
            return Ok(Self::builtin(plan_or_path));
        }
        let path = Path::new(plan_or_path);
        if path.is_file() {
            return Self::read(path);
        }
        Err(Error::UnknownPlan(plan_or_path.to_string()))
    }

    /// Builds the plan. The output directory comes from `output_dir_override`
    /// if given, else the file, else `results/`.
    pub fn build(&self, output_dir_override: Option<PathBuf>) -> Result<ExperimentPlan> {
        let mut plan = ExperimentPlan::builtin(&self.plan, self.full_scale)?;
        if let Some(name) = &self.name {
            plan.name = name.clone();
        }
        if let Some(w) = self.waist_mm {
            let w = w * 1e-3;
            let (a, b) = plan.mode_pair;
            plan.mode_pair = (ModeSpec::new(a.kind, w)?, ModeSpec::new(b.kind, w)?);
        }
        let samples = self
            .grid_samples
            .unwrap_or(plan.link.turbulence.grid.samples_per_axis());
        let grid = match self.grid_extent_mm {
            Some(mm) => GridSpec::new(samples, mm * 1e-3)?,
            None => default_grid(&plan.mode_pair, samples)?,
        };
        let link = &mut plan.link;
        link.arms = vec![
            Arm { mode: plan.mode_pair.0, weight: 0.5 },
            Arm { mode: plan.mode_pair.1, weight: 0.5 },
        ];
        link.turbulence.grid = grid;
        if let Some(v) = self.subharmonics {
            link.turbulence = link.turbulence.with_subharmonics(v);
        }
        if let Some(l0) = self.outer_scale_m {
            link.turbulence.outer_scale = Some(l0);
        }
        if let Some(v) = self.bits_per_screen {
            link.bits_per_screen = v;
        }
        if let Some(v) = self.screens {
            link.n_screens = v;
        }
        if let Some(v) = self.seed {
            link.master_seed = v;
        }
        if let Some(v) = self.noise_sigma {
            link.noise_sigma = v;
        }
        if let Some(v) = self.threshold_fraction {
            link.threshold_fraction = v;
        }
        if let Some(v) = self.receiver_sensitivity {
            link.receiver_sensitivity = v;
        }
        if let Some(s) = &self.combining {
            link.combining = parse_combining(s)?;
        }
        if let Some(s) = &self.detection {
            link.detection = parse_detection(s)?;
        }
        if self.threads.is_some() {
            link.threads = self.threads;
        }
        if let Some(sweep) = &self.r0_sweep_mm {
            plan.r0_sweep = sweep.iter().map(|mm| mm * 1e-3).collect();
        }
        if let Some(mm) = self.strehl_diameter_mm {
            plan.strehl_diameter = mm * 1e-3;
        }
        plan.output_dir = Some(
            output_dir_override
                .or_else(|| self.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        );
        Ok(plan)
    }
}

/// Output directory from the environment, if set and non-empty.
pub fn output_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}
