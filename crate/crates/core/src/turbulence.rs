//! Kolmogorov phase screens and the Fried-parameter calculus.
//!
//! Screens are synthesised with the FFT spectral method: complex white
//! Gaussian noise is shaped by the square root of the phase power spectral
//! density `0.023 r0^(-5/3) f^(-11/3)` (spatial frequency `f` in cycles per
//! meter) and inverse transformed. Because a periodic FFT grid cannot hold
//! scales larger than the window, three levels of 3x3 subharmonics are added
//! by default to restore tip/tilt. Each subharmonic carries the PSD integrated
//! over its frequency cell rather than the PSD at the cell centre; near the
//! origin the `f^(-11/3)` spectrum varies too fast for midpoint sampling.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{read_matrix, write_matrix, GridSpec};

/// Phase PSD prefactor for `f` in cycles per meter.
pub const KOLMOGOROV_PSD_COEFFICIENT: f64 = 0.023;
/// Coefficient of the Kolmogorov phase structure function `D(r) = 6.88 (r/r0)^(5/3)`.
pub const STRUCTURE_FUNCTION_COEFFICIENT: f64 = 6.88;
/// Plane-wave Fried parameter prefactor in `r0 = 0.185 (λ² / (Cn² z))^(3/5)`.
pub const FRIED_PREFACTOR: f64 = 0.185;
/// Extended Maréchal coefficient in `SR = exp(-1.03 (D/r0)^(5/3))`.
pub const STREHL_COEFFICIENT: f64 = 1.03;

const DEFAULT_SUBHARMONIC_LEVELS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceParams {
    /// Fried parameter in meters. `f64::INFINITY` means no turbulence.
    pub r0: f64,
    pub grid: GridSpec,
    pub subharmonic_levels: u32,
    /// Optional von Kármán outer scale in meters; `None` is pure Kolmogorov.
    pub outer_scale: Option<f64>,
}

impl TurbulenceParams {
    pub fn new(r0: f64, grid: GridSpec) -> Result<Self> {
        let params = Self {
            r0,
            grid,
            subharmonic_levels: DEFAULT_SUBHARMONIC_LEVELS,
            outer_scale: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_subharmonics(mut self, levels: u32) -> Self {
        self.subharmonic_levels = levels;
        self
    }

    pub fn with_r0(mut self, r0: f64) -> Result<Self> {
        self.r0 = r0;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0) {
            return Err(Error::InvalidParameter(format!("r0 must be positive, got {}", self.r0)));
        }
        if let Some(l0) = self.outer_scale {
            if !(l0.is_finite() && l0 > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "outer scale must be positive, got {l0}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_turbulent(&self) -> bool {
        self.r0.is_finite()
    }

    /// Phase PSD at spatial frequency `f` (cycles/m), rad² m².
    pub fn psd(&self, f: f64) -> f64 {
        if !self.is_turbulent() {
            return 0.0;
        }
        let f0_sq = self.outer_scale.map_or(0.0, |l0| 1.0 / (l0 * l0));
        KOLMOGOROV_PSD_COEFFICIENT * self.r0.powf(-5.0 / 3.0) * (f * f + f0_sq).powf(-11.0 / 6.0)
    }
}

/// Real phase sample on a grid, radians.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScreen {
    grid: GridSpec,
    phase: Vec<f64>,
}

impl PhaseScreen {
    pub fn new(grid: GridSpec, phase: Vec<f64>) -> Result<Self> {
        if phase.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: phase.len(),
            });
        }
        if let Some(index) = phase.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, phase })
    }

    pub fn flat(grid: GridSpec, value: f64) -> Self {
        Self {
            grid,
            phase: vec![value; grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.phase[iy * self.grid.samples_per_axis() + ix]
    }

    pub fn offset(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            phase: self.phase.iter().map(|p| p + c).collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.phase.iter().sum::<f64>() / self.phase.len() as f64
    }

    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let n = self.grid.samples_per_axis();
        write_matrix(path.as_ref(), &self.grid, |w| {
            use std::io::Write;
            for row in self.phase.chunks(n) {
                let line: Vec<String> = row.iter().map(|p| format!("{p:e}")).collect();
                writeln!(w, "{}", line.join(" "))?;
            }
            Ok(())
        })
    }

    pub fn read_text(path: impl AsRef<Path>) -> Result<Self> {
        let (grid, values) = read_matrix(path.as_ref())?;
        Self::new(grid, values)
    }
}

/// SplitMix64 finaliser.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent random streams used by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Screen = 0x5C4E,
    Bits = 0xB175,
}

/// Seed for item `index` of `stream`:
/// `splitmix64(splitmix64(master ^ stream) ^ index)`.
///
/// Depends only on its arguments, so serial and parallel runs draw the
/// same ensemble.
pub fn derive_seed(master_seed: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(master_seed ^ stream as u64) ^ index)
}

struct Subharmonic {
    amplitude: f64,
    ex: Vec<Complex64>,
    ey: Vec<Complex64>,
}

/// Reusable screen synthesiser for one set of parameters.
pub struct ScreenGenerator {
    params: TurbulenceParams,
    amplitude: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    subharmonics: Vec<Subharmonic>,
}

impl ScreenGenerator {
    pub fn new(params: TurbulenceParams) -> Result<Self> {
        params.validate()?;
        let grid = params.grid;
        let n = grid.samples_per_axis();
        let extent = grid.physical_extent();
        let df = 1.0 / extent;
        let freq = |k: usize| -> f64 {
            let k = k as f64;
            let n = n as f64;
            if k < n / 2.0 {
                k * df
            } else {
                (k - n) * df
            }
        };
        let mut amplitude = vec![0.0; n * n];
        for ky in 0..n {
            for kx in 0..n {
                if kx == 0 && ky == 0 {
                    continue;
                }
                let f = freq(kx).hypot(freq(ky));
                amplitude[ky * n + kx] = params.psd(f).sqrt() * df;
            }
        }

        let coords = grid.coordinates();
        let mut subharmonics = Vec::new();
        for level in 1..=params.subharmonic_levels {
            let dfp = df / 3f64.powi(level as i32);
            for jy in -1i32..=1 {
                for jx in -1i32..=1 {
                    if jx == 0 && jy == 0 {
                        continue;
                    }
                    let fx = f64::from(jx) * dfp;
                    let fy = f64::from(jy) * dfp;
                    let amplitude = cell_integrated_psd(&params, fx, fy, dfp).sqrt();
                    let phasor = |f: f64| -> Vec<Complex64> {
                        coords
                            .iter()
                            .map(|&x| Complex64::from_polar(1.0, 2.0 * PI * f * x))
                            .collect()
                    };
                    subharmonics.push(Subharmonic {
                        amplitude,
                        ex: phasor(fx),
                        ey: phasor(fy),
                    });
                }
            }
        }

        let fft = FftPlanner::new().plan_fft_inverse(n);
        Ok(Self {
            params,
            amplitude,
            fft,
            subharmonics,
        })
    }

    pub fn params(&self) -> &TurbulenceParams {
        &self.params
    }

    pub fn generate(&self, seed: u64) -> PhaseScreen {
        let grid = self.params.grid;
        let n = grid.samples_per_axis();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

        let mut spectrum: Vec<Complex64> = self
            .amplitude
            .iter()
            .map(|&a| {
                let re = normal();
                let im = normal();
                Complex64::new(re, im) * a
            })
            .collect();
        inverse_fft_2d(&*self.fft, &mut spectrum, n);
        let mut phase: Vec<f64> = spectrum.iter().map(|c| c.re).collect();

        for sh in &self.subharmonics {
            let re = normal();
            let im = normal();
            let c = Complex64::new(re, im) * sh.amplitude;
            for (iy, row) in phase.chunks_mut(n).enumerate() {
                let cy = c * sh.ey[iy];
                for (ix, p) in row.iter_mut().enumerate() {
                    *p += (cy * sh.ex[ix]).re;
                }
            }
        }

        let mean = phase.iter().sum::<f64>() / phase.len() as f64;
        phase.iter_mut().for_each(|p| *p -= mean);
        PhaseScreen { grid, phase }
    }
}

const GAUSS_LEGENDRE_8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

/// `∫ PSD` over the square cell of side `width` centred on `(fx, fy)`.
fn cell_integrated_psd(params: &TurbulenceParams, fx: f64, fy: f64, width: f64) -> f64 {
    let nodes: Vec<(f64, f64)> = GAUSS_LEGENDRE_8
        .iter()
        .flat_map(|&(x, w)| [(x, w), (-x, w)])
        .collect();
    let half = 0.5 * width;
    let mut sum = 0.0;
    for &(a, wa) in &nodes {
        for &(b, wb) in &nodes {
            sum += wa * wb * params.psd((fx + a * half).hypot(fy + b * half));
        }
    }
    // Weights sum to 2 per axis on [-1, 1].
    sum * half * half
}

fn inverse_fft_2d(fft: &dyn Fft<f64>, data: &mut [Complex64], n: usize) {
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in data.chunks_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for ix in 0..n {
        for iy in 0..n {
            column[iy] = data[iy * n + ix];
        }
        fft.process_with_scratch(&mut column, &mut scratch);
        for iy in 0..n {
            data[iy * n + ix] = column[iy];
        }
    }
}

fn forward_fft_2d(data: &mut [Complex64], n: usize) {
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in data.chunks_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for ix in 0..n {
        for iy in 0..n {
            column[iy] = data[iy * n + ix];
        }
        fft.process_with_scratch(&mut column, &mut scratch);
        for iy in 0..n {
            data[iy * n + ix] = column[iy];
        }
    }
}

/// Draws one screen. Deterministic in `(params, seed)`.
pub fn generate_screen(params: &TurbulenceParams, seed: u64) -> Result<PhaseScreen> {
    Ok(ScreenGenerator::new(*params)?.generate(seed))
}

/// Ensemble phase structure function `⟨[φ(x + r) − φ(x)]²⟩`, averaged over
/// screens, positions, and both grid axes.
pub fn structure_function(screens: &[PhaseScreen], separation: f64) -> Result<f64> {
    if screens.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "structure function needs at least 2 screens, got {}",
            screens.len()
        )));
    }
    let grid = *screens[0].grid();
    for s in &screens[1..] {
        grid.ensure_same(s.grid())?;
    }
    let pitch = grid.pitch();
    let steps = separation / pitch;
    let shift = steps.round();
    if !(separation >= 0.0) || (steps - shift).abs() > 1e-6 {
        return Err(Error::Separation {
            separation,
            pitch,
            reason: "not a non-negative multiple of the pixel pitch",
        });
    }
    if separation >= grid.physical_extent() / 2.0 {
        return Err(Error::Separation {
            separation,
            pitch,
            reason: "must be below half the grid extent",
        });
    }
    let shift = shift as usize;
    let n = grid.samples_per_axis();
    let mut sum = 0.0;
    let mut count = 0usize;
    for s in screens {
        for iy in 0..n {
            for ix in 0..n - shift {
                let d = s.at(ix + shift, iy) - s.at(ix, iy);
                sum += d * d;
            }
        }
        for iy in 0..n - shift {
            for ix in 0..n {
                let d = s.at(ix, iy + shift) - s.at(ix, iy);
                sum += d * d;
            }
        }
        count += 2 * n * (n - shift);
    }
    Ok(sum / count as f64)
}

/// Kolmogorov model structure function `6.88 (r/r0)^(5/3)`.
pub fn kolmogorov_structure_function(separation: f64, r0: f64) -> f64 {
    STRUCTURE_FUNCTION_COEFFICIENT * (separation / r0).powf(5.0 / 3.0)
}

/// Azimuthally averaged power spectrum of Hann-windowed screens.
///
/// Returns `(f, P(f))` pairs for integer radial bins `1..n/2`, with `f` in
/// cycles per meter. The window suppresses leakage from the non-periodic
/// low-order content the subharmonics add.
pub fn radial_power_spectrum(screens: &[PhaseScreen]) -> Result<Vec<(f64, f64)>> {
    let first = screens
        .first()
        .ok_or_else(|| Error::InvalidParameter("no screens".into()))?;
    let grid = *first.grid();
    for s in screens {
        grid.ensure_same(s.grid())?;
    }
    let n = grid.samples_per_axis();
    let hann: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * (i as f64 + 0.5) / n as f64).cos())
        .collect();
    let half = n / 2;
    let mut power = vec![0.0; half];
    let mut counts = vec![0usize; half];
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
    for s in screens {
        let mean = s.mean();
        for iy in 0..n {
            for ix in 0..n {
                buf[iy * n + ix] = Complex64::new((s.at(ix, iy) - mean) * hann[ix] * hann[iy], 0.0);
            }
        }
        forward_fft_2d(&mut buf, n);
        for ky in 0..n {
            let fy = if ky < half { ky as f64 } else { ky as f64 - n as f64 };
            for kx in 0..n {
                let fx = if kx < half { kx as f64 } else { kx as f64 - n as f64 };
                let bin = fx.hypot(fy).round() as usize;
                if bin >= 1 && bin < half {
                    power[bin] += buf[ky * n + kx].norm_sqr();
                    counts[bin] += 1;
                }
            }
        }
    }
    let df = 1.0 / grid.physical_extent();
    Ok((1..half)
        .map(|b| (b as f64 * df, power[b] / counts[b] as f64))
        .collect())
}

/// Least-squares slope of `ln P` against `ln f` over `[f_lo, f_hi]`.
pub fn spectral_slope(spectrum: &[(f64, f64)], f_lo: f64, f_hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = spectrum
        .iter()
        .filter(|(f, p)| *f >= f_lo && *f <= f_hi && *p > 0.0)
        .map(|(f, p)| (f.ln(), p.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 spectral bins in [{f_lo}, {f_hi}]"
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Path-integrated turbulence for the r0 ↔ distance relations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphereModel {
    /// Refractive-index structure parameter, m^(-2/3).
    pub cn2: f64,
    /// Wavelength, m.
    pub wavelength: f64,
}

impl AtmosphereModel {
    pub fn new(cn2: f64, wavelength: f64) -> Result<Self> {
        if !(cn2.is_finite() && cn2 > 0.0) {
            return Err(Error::InvalidParameter(format!("Cn² must be positive, got {cn2}")));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        Ok(Self { cn2, wavelength })
    }
}

/// `0.185^(5/3)` ≈ 0.0600647.
pub fn distance_prefactor() -> f64 {
    FRIED_PREFACTOR.powf(5.0 / 3.0)
}

/// Plane-wave Fried parameter after a path of length `z` meters.
pub fn r0_from_path(atmosphere: &AtmosphereModel, z: f64) -> f64 {
    let l2 = atmosphere.wavelength * atmosphere.wavelength;
    FRIED_PREFACTOR * (l2 / (atmosphere.cn2 * z)).powf(3.0 / 5.0)
}

/// Path length at which the Fried parameter falls to `r0`.
pub fn z_from_r0(atmosphere: &AtmosphereModel, r0: f64) -> f64 {
    let l2 = atmosphere.wavelength * atmosphere.wavelength;
    distance_prefactor() * l2 / (atmosphere.cn2 * r0.powf(5.0 / 3.0))
}

/// Fractional increase in path length when the tolerable Fried parameter
/// drops from `r0_reference` to `r0_improved`: `(r0_ref / r0_imp)^(5/3) − 1`.
///
/// Independent of wavelength and Cn² since `z ∝ r0^(-5/3)`.
pub fn distance_gain(r0_reference: f64, r0_improved: f64) -> f64 {
    (r0_reference / r0_improved).powf(5.0 / 3.0) - 1.0
}

/// `exp(−1.03 (D/r0)^(5/3))`. Used for reporting only.
pub fn strehl_estimate(beam_diameter: f64, r0: f64) -> f64 {
    (-STREHL_COEFFICIENT * (beam_diameter / r0).powf(5.0 / 3.0)).exp()
}
