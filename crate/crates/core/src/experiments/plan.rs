use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::{inner_product, GridSpec};
use crate::link::{simulate_point, Combining, DiversityDetection, LinkConfig};
use crate::modes::ModeSpec;
use crate::turbulence::TurbulenceParams;

use super::curve::{diversity_label, BerCurve};

pub const BUILTIN_PLANS: [&str; 2] = ["paper-n4", "paper-n8"];

/// Fried parameters of the built-in sweep, in millimeters.
pub const DESK_SWEEP_MM: [f64; 12] = [0.5, 1.0, 1.4, 2.0, 3.0, 4.5, 6.0, 8.0, 10.0, 12.0, 14.0, 17.0];
/// Extra strong-turbulence point added at full scale.
pub const FULL_SCALE_EXTRA_MM: f64 = 0.1;

pub const MIN_SWEEP_R0: f64 = 1e-4;
pub const MAX_SWEEP_R0: f64 = 5e-2;
pub const MAX_PAIR_OVERLAP: f64 = 1e-6;

/// Beam diameter of the order-4 modes; also the Strehl reference diameter.
pub const REFERENCE_BEAM_DIAMETER: f64 = 2.8e-3;
pub const DEFAULT_GRID_SAMPLES: usize = 256;
/// Grid extent as a multiple of the widest beam diameter.
pub const GRID_EXTENT_FACTOR: f64 = 10.0;

pub const DESK_BITS_PER_SCREEN: u64 = 10_000;
pub const DESK_SCREENS: usize = 256;
/// About one million bits over 1024 screens.
pub const FULL_BITS_PER_SCREEN: u64 = 977;
pub const FULL_SCREENS: usize = 1024;
pub const DEFAULT_SEED: u64 = 1;

/// Waist giving the order-4 modes a second-moment diameter of 2.8 mm.
pub fn reference_waist() -> f64 {
    REFERENCE_BEAM_DIAMETER / (2.0 * 5f64.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub name: String,
    pub mode_pair: (ModeSpec, ModeSpec),
    /// Fried parameters in meters, strictly increasing.
    pub r0_sweep: Vec<f64>,
    /// Template link; its turbulence r0 is replaced at each sweep point.
    pub link: LinkConfig,
    pub strehl_diameter: f64,
    /// Directory receiving the artifacts; `None` keeps results in memory.
    pub output_dir: Option<PathBuf>,
}

impl ExperimentPlan {
    /// `paper-n4` (HG22 + LG21) or `paper-n8` (HG44 + LG61).
    pub fn builtin(name: &str, full_scale: bool) -> Result<Self> {
        let waist = reference_waist();
        let pair = builtin_pair(name, waist)?;
        let mut sweep_mm: Vec<f64> = DESK_SWEEP_MM.to_vec();
        if full_scale {
            sweep_mm.insert(0, FULL_SCALE_EXTRA_MM);
        }
        let grid = default_grid(&pair, DEFAULT_GRID_SAMPLES)?;
        let turbulence = TurbulenceParams::new(sweep_mm[0] * 1e-3, grid)?;
        let mut link = LinkConfig::equal_split(&[pair.0, pair.1], turbulence)?;
        link.master_seed = DEFAULT_SEED;
        if full_scale {
            link.bits_per_screen = FULL_BITS_PER_SCREEN;
            link.n_screens = FULL_SCREENS;
        } else {
            link.bits_per_screen = DESK_BITS_PER_SCREEN;
            link.n_screens = DESK_SCREENS;
        }
        Ok(Self {
            name: name.to_string(),
            mode_pair: pair,
            r0_sweep: sweep_mm.iter().map(|mm| mm * 1e-3).collect(),
            link,
            strehl_diameter: REFERENCE_BEAM_DIAMETER,
            output_dir: None,
        })
    }

    pub fn arm_labels(&self) -> Vec<String> {
        vec![self.mode_pair.0.short_label(), self.mode_pair.1.short_label()]
    }

    pub fn ber_csv_path(&self) -> Option<PathBuf> {
        self.output_dir.as_ref().map(|d| d.join(format!("{}_ber.csv", self.name)))
    }

    pub fn plot_stem(&self) -> Option<PathBuf> {
        self.output_dir.as_ref().map(|d| d.join(format!("{}_plot", self.name)))
    }

    pub fn crosstalk_path(&self, r0: f64) -> Option<PathBuf> {
        self.output_dir.as_ref().map(|d| {
            d.join(format!("{}_crosstalk_r0_{}mm.csv", self.name, super::curve::format_mm(r0)))
        })
    }

    /// Every file `run` writes.
    pub fn outputs(&self) -> Vec<PathBuf> {
        let mut out = Vec::new();
        out.extend(self.ber_csv_path());
        if let Some(stem) = self.plot_stem() {
            out.push(stem.with_extension("csv"));
            out.push(stem.with_extension("py"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(msg));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return fail(format!("plan name `{}` is not a valid file stem", self.name));
        }
        if self.r0_sweep.is_empty() {
            return fail("r0 sweep is empty".into());
        }
        for &r0 in &self.r0_sweep {
            if !(MIN_SWEEP_R0..=MAX_SWEEP_R0).contains(&r0) {
                return fail(format!(
                    "r0 {r0:e} m outside [{MIN_SWEEP_R0:e}, {MAX_SWEEP_R0:e}] m"
                ));
            }
        }
        if self.r0_sweep.windows(2).any(|w| w[1] <= w[0]) {
            return fail("r0 sweep must be strictly increasing".into());
        }
        if !(self.strehl_diameter > 0.0 && self.strehl_diameter.is_finite()) {
            return fail("Strehl diameter must be positive".into());
        }
        let (a, b) = self.mode_pair;
        if a.waist != b.waist {
            return fail("mode pair must share a waist".into());
        }
        let arms: Vec<ModeSpec> = self.link.arms.iter().map(|arm| arm.mode).collect();
        if arms != [a, b] {
            return fail("link arms must be the plan's mode pair".into());
        }
        self.link.validate().map_err(|e| Error::Validation(e.to_string()))?;
        let grid = self.link.turbulence.grid;
        let fa = a.evaluate(&grid).map_err(|e| Error::Validation(e.to_string()))?;
        let fb = b.evaluate(&grid).map_err(|e| Error::Validation(e.to_string()))?;
        let overlap = inner_product(&fa, &fb)?.norm();
        if overlap >= MAX_PAIR_OVERLAP {
            return fail(format!(
                "{} and {} are not orthogonal: |overlap| = {overlap:.3e}",
                a.label(),
                b.label()
            ));
        }
        Ok(())
    }

    /// Link template specialised to one sweep point.
    pub fn link_at(&self, r0: f64) -> Result<LinkConfig> {
        let mut link = self.link.clone();
        link.turbulence = link.turbulence.with_r0(r0)?;
        Ok(link)
    }
}

fn builtin_pair(name: &str, waist: f64) -> Result<(ModeSpec, ModeSpec)> {
    match name {
        "paper-n4" => Ok((ModeSpec::hg(2, 2, waist)?, ModeSpec::lg(2, 1, waist)?)),
        "paper-n8" => Ok((ModeSpec::hg(4, 4, waist)?, ModeSpec::lg(6, 1, waist)?)),
        other => Err(Error::UnknownPlan(other.to_string())),
    }
}

/// Square grid `GRID_EXTENT_FACTOR` times wider than the widest mode.
pub fn default_grid(pair: &(ModeSpec, ModeSpec), samples: usize) -> Result<GridSpec> {
    let d = pair.0.second_moment_diameter().max(pair.1.second_moment_diameter());
    GridSpec::new(samples, GRID_EXTENT_FACTOR * d)
}

/// Runs every sweep point in r0 order and writes the BER CSV when the plan
/// has an output directory. All points reuse the plan's master seed.
pub fn run_sweep(plan: &ExperimentPlan) -> Result<BerCurve> {
    plan.validate()?;
    let points = plan
        .r0_sweep
        .iter()
        .map(|&r0| simulate_point(&plan.link_at(r0)?))
        .collect::<Result<Vec<_>>>()?;
    let arm_labels = plan.arm_labels();
    let curve = BerCurve {
        diversity_label: diversity_label(&arm_labels),
        arm_labels,
        strehl_diameter: plan.strehl_diameter,
        points,
    };
    if let Some(path) = plan.ber_csv_path() {
        ensure_dir(path.parent().unwrap_or(Path::new(".")))?;
        curve.write_csv(&path)?;
    }
    Ok(curve)
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub(crate) fn parse_combining(s: &str) -> Result<Combining> {
    match s.to_ascii_lowercase().as_str() {
        "incoherent" => Ok(Combining::Incoherent),
        "coherent" => Ok(Combining::Coherent),
        _ => Err(Error::Parse(format!("combining must be incoherent or coherent, got `{s}`"))),
    }
}

pub(crate) fn parse_detection(s: &str) -> Result<DiversityDetection> {
    match s.to_ascii_lowercase().as_str() {
        "matched" | "matched-per-arm" => Ok(DiversityDetection::MatchedPerArm),
        "superposition" => Ok(DiversityDetection::Superposition),
        _ => Err(Error::Parse(format!(
            "detection must be matched or superposition, got `{s}`"
        ))),
    }
}
