//! Scalar optical fields sampled on a uniform square grid.
//!
//! Every field lives at the waist plane (z = 0). Inner products are
//! pixel-area weighted so that results do not depend on the sampling
//! density once the modes are resolved.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square sampling window shared by fields and phase screens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    samples_per_axis: usize,
    physical_extent: f64,
}

impl GridSpec {
    pub fn new(samples_per_axis: usize, physical_extent: f64) -> Result<Self> {
        if samples_per_axis < 2 || samples_per_axis % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "samples_per_axis must be even and >= 2, got {samples_per_axis}"
            )));
        }
        if !(physical_extent.is_finite() && physical_extent > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "physical_extent must be positive and finite, got {physical_extent}"
            )));
        }
        Ok(Self {
            samples_per_axis,
            physical_extent,
        })
    }

    pub fn samples_per_axis(&self) -> usize {
        self.samples_per_axis
    }

    pub fn physical_extent(&self) -> f64 {
        self.physical_extent
    }

    pub fn len(&self) -> usize {
        self.samples_per_axis * self.samples_per_axis
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pitch(&self) -> f64 {
        self.physical_extent / self.samples_per_axis as f64
    }

    pub fn pixel_area(&self) -> f64 {
        let p = self.pitch();
        p * p
    }

    /// Physical coordinate of sample `i` along either axis.
    ///
    /// Samples sit at half-pixel offsets so the grid is mirror symmetric:
    /// sample `i` and sample `n - 1 - i` have opposite coordinates.
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 + 0.5 - self.samples_per_axis as f64 / 2.0) * self.pitch()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.samples_per_axis).map(|i| self.coordinate(i)).collect()
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{} over {:e} m",
            self.samples_per_axis, self.samples_per_axis, self.physical_extent
        )
    }
}

/// Complex amplitude samples, row-major with rows along y.
///
/// `samples[iy * n + ix]` holds the value at `(coordinate(ix), coordinate(iy))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    grid: GridSpec,
    samples: Vec<Complex64>,
}

impl ComplexField2D {
    pub fn new(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        if let Some(index) = samples.iter().position(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f(x, y)` at every pixel centre.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, f64) -> Complex64) -> Result<Self> {
        let coords = grid.coordinates();
        let mut samples = Vec::with_capacity(grid.len());
        for &y in &coords {
            for &x in &coords {
                samples.push(f(x, y));
            }
        }
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.samples[iy * self.grid.samples_per_axis + ix]
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s * factor).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: Complex64, other: &ComplexField2D) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + factor * b)
            .collect();
        Ok(Self {
            grid: self.grid,
            samples,
        })
    }

    pub fn max_abs_diff(&self, other: &ComplexField2D) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let n = self.grid.samples_per_axis;
        write_matrix(path.as_ref(), &self.grid, |w| {
            for row in self.samples.chunks(n) {
                let line: Vec<String> = row.iter().map(|s| format!("{:e} {:e}", s.re, s.im)).collect();
                writeln!(w, "{}", line.join(" "))?;
            }
            Ok(())
        })
    }

    pub fn read_text(path: impl AsRef<Path>) -> Result<Self> {
        let (grid, values) = read_matrix(path.as_ref())?;
        if values.len() != 2 * grid.len() {
            return Err(Error::Parse(format!(
                "expected {} (re, im) pairs, found {} numbers",
                grid.len(),
                values.len()
            )));
        }
        let samples = values.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Self::new(grid, samples)
    }
}

/// Discrete overlap `Σ conj(a)·b·dA`.
pub fn inner_product(a: &ComplexField2D, b: &ComplexField2D) -> Result<Complex64> {
    a.grid.ensure_same(&b.grid)?;
    let sum: Complex64 = a.samples.iter().zip(&b.samples).map(|(x, y)| x.conj() * y).sum();
    Ok(sum * a.grid.pixel_area())
}

pub fn total_power(f: &ComplexField2D) -> f64 {
    f.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * f.grid.pixel_area()
}

pub fn normalize(f: &ComplexField2D) -> Result<ComplexField2D> {
    let power = total_power(f);
    if !(power > 0.0) {
        return Err(Error::ZeroPower);
    }
    Ok(f.scaled(Complex64::new(power.sqrt().recip(), 0.0)))
}

const HEADER_PREFIX: &str = "samples_per_axis=";

pub(crate) fn write_matrix(
    path: &Path,
    grid: &GridSpec,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let run = |w: &mut BufWriter<fs::File>| -> std::io::Result<()> {
        writeln!(
            w,
            "{HEADER_PREFIX}{} physical_extent={:e}",
            grid.samples_per_axis, grid.physical_extent
        )?;
        body(w)?;
        w.flush()
    };
    run(&mut w).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_matrix(path: &Path) -> Result<(GridSpec, Vec<f64>)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?
        .map_err(|e| Error::io(path, e))?;
    let grid = parse_header(&header)?;
    let mut values = Vec::with_capacity(2 * grid.len());
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        for tok in line.split_whitespace() {
            values.push(
                tok.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad number `{tok}`: {e}")))?,
            );
        }
    }
    Ok((grid, values))
}

fn parse_header(header: &str) -> Result<GridSpec> {
    let mut samples = None;
    let mut extent = None;
    for part in header.split_whitespace() {
        match part.split_once('=') {
            Some(("samples_per_axis", v)) => samples = v.parse::<usize>().ok(),
            Some(("physical_extent", v)) => extent = v.parse::<f64>().ok(),
            _ => {}
        }
    }
    match (samples, extent) {
        (Some(n), Some(e)) => GridSpec::new(n, e),
        _ => Err(Error::Parse(format!("malformed matrix header `{header}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: GridSpec, w: f64) -> ComplexField2D {
        ComplexField2D::from_fn(grid, |x, y| Complex64::new((-(x * x + y * y) / (w * w)).exp(), 0.0))
            .unwrap()
    }

    #[test]
    fn grid_rejects_odd_or_tiny() {
        assert!(GridSpec::new(1, 1.0).is_err());
        assert!(GridSpec::new(3, 1.0).is_err());
        assert!(GridSpec::new(4, 0.0).is_err());
        assert!(GridSpec::new(4, f64::NAN).is_err());
        let g = GridSpec::new(256, 0.01).unwrap();
        assert!((g.pitch() - 0.01 / 256.0).abs() < 1e-18);
    }

    #[test]
    fn coordinates_are_mirror_symmetric() {
        let g = GridSpec::new(8, 1.0).unwrap();
        for i in 0..8 {
            assert_eq!(g.coordinate(i), -g.coordinate(7 - i));
        }
    }

    #[test]
    fn zero_field_power() {
        let g = GridSpec::new(16, 1.0).unwrap();
        assert_eq!(total_power(&ComplexField2D::zeros(g)), 0.0);
    }

    #[test]
    fn normalize_zero_power_errors() {
        let g = GridSpec::new(16, 1.0).unwrap();
        assert!(matches!(normalize(&ComplexField2D::zeros(g)), Err(Error::ZeroPower)));
    }

    #[test]
    fn normalize_power_four_halves_field() {
        let g = GridSpec::new(64, 1.0).unwrap();
        let unit = normalize(&gaussian(g, 0.1)).unwrap();
        let doubled = unit.scaled(Complex64::new(2.0, 0.0));
        assert!((total_power(&doubled) - 4.0).abs() < 1e-12);
        let back = normalize(&doubled).unwrap();
        assert!(back.max_abs_diff(&unit).unwrap() < 1e-12);
    }

    #[test]
    fn normalize_is_idempotent() {
        let g = GridSpec::new(64, 1.0).unwrap();
        let once = normalize(&gaussian(g, 0.13)).unwrap();
        let twice = normalize(&once).unwrap();
        assert!((total_power(&once) - 1.0).abs() < 1e-12);
        assert!(twice.max_abs_diff(&once).unwrap() < 1e-12);
        assert!((inner_product(&once, &once).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = ComplexField2D::zeros(GridSpec::new(16, 1.0).unwrap());
        let b = ComplexField2D::zeros(GridSpec::new(16, 2.0).unwrap());
        let err = inner_product(&a, &b).unwrap_err();
        assert!(err.to_string().contains("grid mismatch"));
    }

    #[test]
    fn non_finite_samples_rejected() {
        let g = GridSpec::new(2, 1.0).unwrap();
        let mut s = vec![Complex64::new(0.0, 0.0); 4];
        s[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(ComplexField2D::new(g, s), Err(Error::NonFinite { index: 3 })));
    }

    #[test]
    fn text_dump_round_trips() {
        let g = GridSpec::new(8, 0.5).unwrap();
        let f = ComplexField2D::from_fn(g, |x, y| Complex64::new(x * 3.0 + y, x - y * 0.25)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.txt");
        f.write_text(&path).unwrap();
        let first = std::fs::read_to_string(&path).unwrap();
        assert!(first.starts_with("samples_per_axis=8 physical_extent=5e-1\n"));
        assert_eq!(ComplexField2D::read_text(&path).unwrap(), f);
    }
}
