//! Python bindings: `import modal_diversity`.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use modal_diversity::channel;
use modal_diversity::experiments::{self, PlanConfig};
use modal_diversity::field;
use modal_diversity::link;
use modal_diversity::modes::{self, ModeKind};
use modal_diversity::turbulence::{self, AtmosphereModel, TurbulenceParams};
use modal_diversity::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait OrPyErr<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPyErr<T> for modal_diversity::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn rows<T: Copy>(values: &[T], n: usize) -> Vec<Vec<T>> {
    values.chunks(n).map(<[T]>::to_vec).collect()
}

#[pyclass(name = "GridSpec", frozen)]
#[derive(Clone, Copy)]
struct PyGridSpec(field::GridSpec);

#[pymethods]
impl PyGridSpec {
    #[new]
    fn new(samples_per_axis: usize, physical_extent: f64) -> PyResult<Self> {
        field::GridSpec::new(samples_per_axis, physical_extent).py().map(Self)
    }

    #[getter]
    fn samples_per_axis(&self) -> usize {
        self.0.samples_per_axis()
    }

    #[getter]
    fn physical_extent(&self) -> f64 {
        self.0.physical_extent()
    }

    #[getter]
    fn pitch(&self) -> f64 {
        self.0.pitch()
    }

    fn coordinates(&self) -> Vec<f64> {
        self.0.coordinates()
    }

    fn __repr__(&self) -> String {
        format!("GridSpec({}, {:e})", self.0.samples_per_axis(), self.0.physical_extent())
    }
}

/// Sampled complex field; `samples()` returns rows along y.
#[pyclass(name = "ComplexField2D", frozen)]
#[derive(Clone)]
struct PyField(field::ComplexField2D);

#[pymethods]
impl PyField {
    #[new]
    fn new(grid: PyGridSpec, samples: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let flat: Vec<Complex64> = samples.into_iter().flatten().collect();
        field::ComplexField2D::new(grid.0, flat).py().map(Self)
    }

    #[getter]
    fn grid(&self) -> PyGridSpec {
        PyGridSpec(*self.0.grid())
    }

    fn samples(&self) -> Vec<Vec<Complex64>> {
        rows(self.0.samples(), self.0.grid().samples_per_axis())
    }

    fn at(&self, ix: usize, iy: usize) -> PyResult<Complex64> {
        let n = self.0.grid().samples_per_axis();
        if ix >= n || iy >= n {
            return Err(PyValueError::new_err(format!("index ({ix}, {iy}) outside {n}x{n} grid")));
        }
        Ok(self.0.at(ix, iy))
    }

    fn total_power(&self) -> f64 {
        field::total_power(&self.0)
    }

    fn normalized(&self) -> PyResult<Self> {
        field::normalize(&self.0).py().map(Self)
    }

    fn max_abs_diff(&self, other: &PyField) -> PyResult<f64> {
        self.0.max_abs_diff(&other.0).py()
    }
}

#[pyclass(name = "ModeSpec", frozen)]
#[derive(Clone, Copy)]
struct PyModeSpec(modes::ModeSpec);

#[pymethods]
impl PyModeSpec {
    /// `ModeSpec("HG_2_2", waist)` or `ModeSpec("LG_2_1", waist)`.
    #[new]
    fn new(kind: &str, waist: f64) -> PyResult<Self> {
        let kind: ModeKind = kind.parse().py()?;
        modes::ModeSpec::new(kind, waist).py().map(Self)
    }

    #[staticmethod]
    fn hg(n: u32, m: u32, waist: f64) -> PyResult<Self> {
        modes::ModeSpec::hg(n, m, waist).py().map(Self)
    }

    #[staticmethod]
    fn lg(l: i32, p: u32, waist: f64) -> PyResult<Self> {
        modes::ModeSpec::lg(l, p, waist).py().map(Self)
    }

    #[getter]
    fn waist(&self) -> f64 {
        self.0.waist
    }

    #[getter]
    fn order(&self) -> u32 {
        self.0.order()
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label()
    }

    #[getter]
    fn short_label(&self) -> String {
        self.0.short_label()
    }

    #[getter]
    fn second_moment_diameter(&self) -> f64 {
        self.0.second_moment_diameter()
    }

    fn evaluate(&self, grid: PyGridSpec) -> PyResult<PyField> {
        self.0.evaluate(&grid.0).py().map(PyField)
    }

    fn __repr__(&self) -> String {
        format!("ModeSpec({:?}, {:e})", self.0.label(), self.0.waist)
    }
}

#[pyclass(name = "PhaseScreen", frozen)]
#[derive(Clone)]
struct PyPhaseScreen(turbulence::PhaseScreen);

#[pymethods]
impl PyPhaseScreen {
    #[getter]
    fn grid(&self) -> PyGridSpec {
        PyGridSpec(*self.0.grid())
    }

    fn phase(&self) -> Vec<Vec<f64>> {
        rows(self.0.phase(), self.0.grid().samples_per_axis())
    }

    fn mean(&self) -> f64 {
        self.0.mean()
    }
}

/// Mode order of a label such as `"HG_2_2"` or `"LG_6_1"`.
#[pyfunction]
fn mode_order(kind: &str) -> PyResult<u32> {
    let kind: ModeKind = kind.parse().py()?;
    Ok(modes::mode_order(&kind))
}

#[pyfunction]
fn lg_to_hg_indices(l: i32, p: u32) -> (u32, u32) {
    modes::lg_to_hg_indices(l, p)
}

#[pyfunction]
fn transform_coefficient(n: u32, m: u32, k: u32) -> PyResult<f64> {
    modes::transform_coefficient(n, m, k).py()
}

/// Weights of `HG(N-k, k)`, k = 0..N, in the expansion of `LG(l, p)`.
#[pyfunction]
fn lg_as_hg_superposition(l: i32, p: u32) -> Vec<Complex64> {
    modes::lg_as_hg_superposition(l, p).coefficients
}

#[pyfunction]
fn evaluate_hg(n: u32, m: u32, waist: f64, grid: PyGridSpec) -> PyResult<PyField> {
    modes::evaluate_hg(n, m, waist, &grid.0).py().map(PyField)
}

#[pyfunction]
fn evaluate_lg(l: i32, p: u32, waist: f64, grid: PyGridSpec) -> PyResult<PyField> {
    modes::evaluate_lg(l, p, waist, &grid.0).py().map(PyField)
}

/// `Σ conj(a)·b·dA`.
#[pyfunction]
fn inner_product(a: &PyField, b: &PyField) -> PyResult<Complex64> {
    field::inner_product(&a.0, &b.0).py()
}

fn turbulence_params(r0: f64, grid: PyGridSpec, subharmonics: u32) -> PyResult<TurbulenceParams> {
    Ok(TurbulenceParams::new(r0, grid.0).py()?.with_subharmonics(subharmonics))
}

#[pyfunction]
#[pyo3(signature = (r0, grid, seed, subharmonics = 3))]
fn generate_screen(r0: f64, grid: PyGridSpec, seed: u64, subharmonics: u32) -> PyResult<PyPhaseScreen> {
    let params = turbulence_params(r0, grid, subharmonics)?;
    turbulence::generate_screen(&params, seed).py().map(PyPhaseScreen)
}

#[pyfunction]
fn apply_screen(field: &PyField, screen: &PyPhaseScreen) -> PyResult<PyField> {
    channel::apply_screen(&field.0, &screen.0).py().map(PyField)
}

/// Complex coupling of `launch` onto `detect` through `screen`.
#[pyfunction]
fn coupling_gain(launch: PyModeSpec, detect: PyModeSpec, screen: &PyPhaseScreen) -> PyResult<Complex64> {
    let grid = *screen.0.grid();
    channel::coupling_gain(&launch.0, &detect.0, &screen.0, &grid).py()
}

/// Mean structure function of `screens` at `separation` meters.
#[pyfunction]
fn structure_function(screens: Vec<PyPhaseScreen>, separation: f64) -> PyResult<f64> {
    let screens: Vec<_> = screens.into_iter().map(|s| s.0).collect();
    turbulence::structure_function(&screens, separation).py()
}

#[pyfunction]
fn r0_from_path(cn2: f64, wavelength: f64, z: f64) -> PyResult<f64> {
    let atm = AtmosphereModel::new(cn2, wavelength).py()?;
    Ok(turbulence::r0_from_path(&atm, z))
}

#[pyfunction]
fn z_from_r0(cn2: f64, wavelength: f64, r0: f64) -> PyResult<f64> {
    let atm = AtmosphereModel::new(cn2, wavelength).py()?;
    Ok(turbulence::z_from_r0(&atm, r0))
}

#[pyfunction]
fn distance_gain(r0_reference: f64, r0_improved: f64) -> f64 {
    turbulence::distance_gain(r0_reference, r0_improved)
}

#[pyfunction]
fn strehl_estimate(beam_diameter: f64, r0: f64) -> f64 {
    turbulence::strehl_estimate(beam_diameter, r0)
}

#[pyfunction]
fn diversity_error_product(pe: Vec<f64>) -> PyResult<f64> {
    link::diversity_error_product(&pe).py()
}

/// Ensemble-mean `|h|²`, rows = launch mode, columns = detect mode.
#[pyfunction]
#[pyo3(signature = (modes, r0, grid, n_screens, seed = 0))]
fn crosstalk_matrix(
    py: Python<'_>,
    modes: Vec<PyModeSpec>,
    r0: f64,
    grid: PyGridSpec,
    n_screens: usize,
    seed: u64,
) -> PyResult<Vec<Vec<f64>>> {
    let modes: Vec<_> = modes.into_iter().map(|m| m.0).collect();
    let params = TurbulenceParams::new(r0, grid.0).py()?;
    py.allow_threads(|| channel::crosstalk_matrix(&modes, &params, n_screens, seed))
        .py()
        .map(|m| m.values)
}

fn load_plan(plan: &str, output_dir: Option<PathBuf>) -> PyResult<experiments::ExperimentPlan> {
    let cfg = PlanConfig::resolve(plan).py()?;
    let plan = cfg.build(output_dir).py()?;
    plan.validate().py()?;
    Ok(plan)
}

/// Raises `ValueError` if the plan (built-in name or plan file) is invalid.
#[pyfunction]
fn validate_plan(plan: &str) -> PyResult<()> {
    load_plan(plan, None).map(|_| ())
}

/// Runs a plan and returns `{"csv": text, "r0": [...], <label>: [...]}`
/// with BERs per series (zero-error points given as their `1/bits` bound).
/// Files are written only when `output_dir` is given.
#[pyfunction]
#[pyo3(signature = (plan, output_dir = None, overrides = None))]
fn run_plan<'py>(
    py: Python<'py>,
    plan: &str,
    output_dir: Option<PathBuf>,
    overrides: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut p = load_plan(plan, output_dir.clone())?;
    if output_dir.is_none() {
        p.output_dir = None;
    }
    if let Some(o) = overrides {
        for (k, v) in o.iter() {
            let key: String = k.extract()?;
            match key.as_str() {
                "bits_per_screen" => p.link.bits_per_screen = v.extract()?,
                "screens" => p.link.n_screens = v.extract()?,
                "seed" => p.link.master_seed = v.extract()?,
                "noise_sigma" => p.link.noise_sigma = v.extract()?,
                "threshold_fraction" => p.link.threshold_fraction = v.extract()?,
                "threads" => p.link.threads = Some(v.extract()?),
                "r0_sweep_mm" => {
                    let mm: Vec<f64> = v.extract()?;
                    p.r0_sweep = mm.iter().map(|x| x * 1e-3).collect();
                }
                other => return Err(PyValueError::new_err(format!("unknown override `{other}`"))),
            }
        }
    }
    let curve = py.allow_threads(|| -> modal_diversity::Result<_> {
        let curve = experiments::run_sweep(&p)?;
        if let Some(stem) = p.plot_stem() {
            experiments::render_plot_data(&curve, stem)?;
        }
        Ok(curve)
    });
    let curve = curve.py()?;
    let out = PyDict::new_bound(py);
    out.set_item("csv", curve.to_csv())?;
    out.set_item("r0", curve.points.iter().map(|pt| pt.r0).collect::<Vec<_>>())?;
    for label in curve.labels() {
        let s = curve.series(&label).expect("label from curve");
        out.set_item(label, s.ber.iter().map(|b| b.value()).collect::<Vec<_>>())?;
    }
    Ok(out)
}

#[pymodule]
#[pyo3(name = "modal_diversity")]
fn modal_diversity_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGridSpec>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyModeSpec>()?;
    m.add_class::<PyPhaseScreen>()?;
    m.add_function(wrap_pyfunction!(mode_order, m)?)?;
    m.add_function(wrap_pyfunction!(lg_to_hg_indices, m)?)?;
    m.add_function(wrap_pyfunction!(transform_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(lg_as_hg_superposition, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_hg, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_lg, m)?)?;
    m.add_function(wrap_pyfunction!(inner_product, m)?)?;
    m.add_function(wrap_pyfunction!(generate_screen, m)?)?;
    m.add_function(wrap_pyfunction!(apply_screen, m)?)?;
    m.add_function(wrap_pyfunction!(coupling_gain, m)?)?;
    m.add_function(wrap_pyfunction!(structure_function, m)?)?;
    m.add_function(wrap_pyfunction!(r0_from_path, m)?)?;
    m.add_function(wrap_pyfunction!(z_from_r0, m)?)?;
    m.add_function(wrap_pyfunction!(distance_gain, m)?)?;
    m.add_function(wrap_pyfunction!(strehl_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(diversity_error_product, m)?)?;
    m.add_function(wrap_pyfunction!(crosstalk_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(validate_plan, m)?)?;
    m.add_function(wrap_pyfunction!(run_plan, m)?)?;
    Ok(())
}
