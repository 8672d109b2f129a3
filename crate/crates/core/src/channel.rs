//! Thin-screen fading channel and modal receiver.
//!
//! The receiver (decomposition hologram, pinhole, photodiode) is modelled as
//! a projection onto the detection mode: the on-axis Fourier-plane amplitude
//! behind a matched hologram equals the overlap integral.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ComplexField2D, GridSpec};
use crate::modes::ModeSpec;
use crate::turbulence::{derive_seed, PhaseScreen, ScreenGenerator, Stream, TurbulenceParams};

/// Multiplies `f` pixel by pixel by `exp(i φ)`.
pub fn apply_screen(f: &ComplexField2D, s: &PhaseScreen) -> Result<ComplexField2D> {
    f.grid().ensure_same(s.grid())?;
    let samples = f
        .samples()
        .iter()
        .zip(s.phase())
        .map(|(a, &p)| a * Complex64::from_polar(1.0, p))
        .collect();
    ComplexField2D::new(*f.grid(), samples)
}

/// `⟨detect, e^{iφ} launch⟩` without materialising the distorted field.
pub fn projected_gain(
    detect: &ComplexField2D,
    launch: &ComplexField2D,
    screen: &PhaseScreen,
) -> Result<Complex64> {
    detect.grid().ensure_same(launch.grid())?;
    detect.grid().ensure_same(screen.grid())?;
    let sum: Complex64 = detect
        .samples()
        .iter()
        .zip(launch.samples())
        .zip(screen.phase())
        .map(|((d, l), &p)| d.conj() * l * Complex64::from_polar(1.0, p))
        .sum();
    Ok(sum * detect.grid().pixel_area())
}

/// Complex coupling `h` of `launch` onto `detect` through `screen`.
pub fn coupling_gain(
    launch: &ModeSpec,
    detect: &ModeSpec,
    screen: &PhaseScreen,
    grid: &GridSpec,
) -> Result<Complex64> {
    let l = launch.evaluate(grid)?;
    let d = detect.evaluate(grid)?;
    projected_gain(&d, &l, screen)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGainSample {
    pub launch: ModeSpec,
    pub detect: ModeSpec,
    pub screen_seed: u64,
    pub gain: Complex64,
}

impl ChannelGainSample {
    pub fn power(&self) -> f64 {
        self.gain.norm_sqr()
    }
}

/// Draws the screen for `screen_seed` and records the coupling through it.
pub fn sample_gain(
    launch: &ModeSpec,
    detect: &ModeSpec,
    params: &TurbulenceParams,
    screen_seed: u64,
) -> Result<ChannelGainSample> {
    let screen = ScreenGenerator::new(*params)?.generate(screen_seed);
    let gain = coupling_gain(launch, detect, &screen, &params.grid)?;
    Ok(ChannelGainSample {
        launch: *launch,
        detect: *detect,
        screen_seed,
        gain,
    })
}

/// Ensemble-mean `|h|²` for every (launch, detect) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosstalkMatrix {
    pub labels: Vec<String>,
    pub r0: f64,
    pub n_screens: usize,
    /// `values[i][j]`: launch `i`, detect `j`.
    pub values: Vec<Vec<f64>>,
}

impl CrosstalkMatrix {
    pub fn row_sums(&self) -> Vec<f64> {
        self.values.iter().map(|r| r.iter().sum()).collect()
    }

    /// CSV with the mode labels as header row and first column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("launch\\detect");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.values) {
            out.push_str(label);
            for v in row {
                let _ = write!(out, ",{v:.9e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

pub fn crosstalk_matrix(
    modes: &[ModeSpec],
    params: &TurbulenceParams,
    n_screens: usize,
    master_seed: u64,
) -> Result<CrosstalkMatrix> {
    if modes.is_empty() {
        return Err(Error::InvalidParameter("crosstalk needs at least one mode".into()));
    }
    if n_screens == 0 {
        return Err(Error::InvalidParameter("crosstalk needs at least one screen".into()));
    }
    let grid = params.grid;
    let fields = modes
        .iter()
        .map(|m| m.evaluate(&grid))
        .collect::<Result<Vec<_>>>()?;
    let generator = ScreenGenerator::new(*params)?;
    let k = modes.len();

    let per_screen: Vec<Vec<f64>> = (0..n_screens as u64)
        .into_par_iter()
        .map(|s| {
            let screen = generator.generate(derive_seed(master_seed, Stream::Screen, s));
            let mut powers = vec![0.0; k * k];
            for (i, launch) in fields.iter().enumerate() {
                for (j, detect) in fields.iter().enumerate() {
                    powers[i * k + j] = projected_gain(detect, launch, &screen)?.norm_sqr();
                }
            }
            Ok(powers)
        })
        .collect::<Result<_>>()?;

    let mut sums = vec![0.0; k * k];
    for powers in &per_screen {
        for (acc, p) in sums.iter_mut().zip(powers) {
            *acc += p;
        }
    }
    let values = sums
        .chunks(k)
        .map(|row| row.iter().map(|v| v / n_screens as f64).collect())
        .collect();
    Ok(CrosstalkMatrix {
        labels: modes.iter().map(ModeSpec::label).collect(),
        r0: params.r0,
        n_screens,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::total_power;
    use crate::turbulence::generate_screen;

    const W0: f64 = 0.626e-3;

    fn grid() -> GridSpec {
        GridSpec::new(128, 10.0 * 2.0 * W0 * 5f64.sqrt()).unwrap()
    }

    #[test]
    fn flat_screen_leaves_field_unchanged() {
        let g = grid();
        let f = ModeSpec::lg(2, 1, W0).unwrap().evaluate(&g).unwrap();
        let out = apply_screen(&f, &PhaseScreen::flat(g, 0.0)).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn constant_screen_is_global_phase() {
        let g = grid();
        let f = ModeSpec::hg(2, 2, W0).unwrap().evaluate(&g).unwrap();
        let out = apply_screen(&f, &PhaseScreen::flat(g, 0.7)).unwrap();
        let expect = f.scaled(Complex64::from_polar(1.0, 0.7));
        assert!(out.max_abs_diff(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn screen_preserves_power() {
        let g = grid();
        let f = ModeSpec::hg(2, 2, W0).unwrap().evaluate(&g).unwrap();
        let params = TurbulenceParams::new(1e-3, g).unwrap();
        for seed in 0..4 {
            let s = generate_screen(&params, seed).unwrap();
            let out = apply_screen(&f, &s).unwrap();
            assert!((total_power(&out) - total_power(&f)).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_screen_grid_rejected() {
        let g = grid();
        let f = ModeSpec::hg(0, 0, W0).unwrap().evaluate(&g).unwrap();
        let other = GridSpec::new(64, g.physical_extent()).unwrap();
        assert!(apply_screen(&f, &PhaseScreen::flat(other, 0.0)).is_err());
    }

    #[test]
    fn self_and_cross_coupling_without_turbulence() {
        let g = grid();
        let hg = ModeSpec::hg(2, 2, W0).unwrap();
        let lg = ModeSpec::lg(2, 1, W0).unwrap();
        let flat = PhaseScreen::flat(g, 0.0);
        let h = coupling_gain(&hg, &hg, &flat, &g).unwrap();
        assert!((h.norm_sqr() - 1.0).abs() < 1e-6);
        let x = coupling_gain(&hg, &lg, &flat, &g).unwrap();
        assert!(x.norm_sqr() < 1e-6);
    }

    #[test]
    fn crosstalk_identity_without_turbulence() {
        let g = grid();
        let modes = [ModeSpec::hg(2, 2, W0).unwrap(), ModeSpec::lg(2, 1, W0).unwrap()];
        let params = TurbulenceParams::new(f64::INFINITY, g).unwrap();
        let m = crosstalk_matrix(&modes, &params, 3, 1).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((m.values[i][j] - e).abs() < 1e-6);
            }
        }
        let csv = m.to_csv();
        assert!(csv.starts_with("launch\\detect,HG_2_2,LG_2_1\nHG_2_2,"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn crosstalk_rejects_empty_inputs() {
        let params = TurbulenceParams::new(0.01, grid()).unwrap();
        assert!(crosstalk_matrix(&[], &params, 1, 0).is_err());
        let modes = [ModeSpec::hg(0, 0, W0).unwrap()];
        assert!(crosstalk_matrix(&modes, &params, 0, 0).is_err());
    }
}
