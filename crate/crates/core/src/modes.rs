//! Hermite-Gauss and Laguerre-Gauss modes at the waist plane, and the
//! unitary change of basis that writes an LG mode as a superposition of
//! same-order HG modes.
//!
//! Index conventions:
//!
//! * `HG(n, m)` has `n` nodal lines along x and `m` along y.
//! * `LG(l, p)` has azimuthal index `l` and radial index `p`; its HG-style
//!   indices are `n - m = l`, `min(n, m) = p`.
//! * The order is `N = n + m = 2p + |l|`.
//!
//! The LG profile is fixed so that
//! `LG(l, p) = Σ_k i^k b(n, m, k) HG(N - k, k)` holds exactly, with no extra
//! global phase. In the right-handed (x, y) frame this makes the azimuthal
//! factor `exp(-i l φ)`, and the profile carries a sign `(-1)^p` relative to
//! the usual positive-at-leading-order Laguerre normalisation.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{normalize, ComplexField2D, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Hg { n: u32, m: u32 },
    Lg { l: i32, p: u32 },
}

/// A spatial mode together with its waist radius in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub kind: ModeKind,
    pub waist: f64,
}

impl ModeSpec {
    pub fn hg(n: u32, m: u32, waist: f64) -> Result<Self> {
        Self::new(ModeKind::Hg { n, m }, waist)
    }

    pub fn lg(l: i32, p: u32, waist: f64) -> Result<Self> {
        Self::new(ModeKind::Lg { l, p }, waist)
    }

    pub fn new(kind: ModeKind, waist: f64) -> Result<Self> {
        if !(waist.is_finite() && waist > 0.0) {
            return Err(Error::InvalidMode(format!("waist must be positive, got {waist}")));
        }
        if let ModeKind::Lg { l, .. } = kind {
            if l == i32::MIN {
                return Err(Error::InvalidMode("azimuthal index out of range".into()));
            }
        }
        Ok(Self { kind, waist })
    }

    pub fn order(&self) -> u32 {
        mode_order(&self.kind)
    }

    /// `w0·sqrt(N + 1)`: the radius with `2⟨r²⟩ = W²` for any mode of order N.
    pub fn second_moment_radius(&self) -> f64 {
        self.waist * f64::from(self.order() + 1).sqrt()
    }

    pub fn second_moment_diameter(&self) -> f64 {
        2.0 * self.second_moment_radius()
    }

    /// Label used in crosstalk tables, e.g. `HG_2_2` or `LG_2_1`.
    pub fn label(&self) -> String {
        self.kind.to_string()
    }

    /// Compact label used as a BER column name, e.g. `HG22` or `LG21`.
    pub fn short_label(&self) -> String {
        match self.kind {
            ModeKind::Hg { n, m } => format!("HG{n}{m}"),
            ModeKind::Lg { l, p } => format!("LG{l}{p}"),
        }
    }

    pub fn evaluate(&self, grid: &GridSpec) -> Result<ComplexField2D> {
        match self.kind {
            ModeKind::Hg { n, m } => evaluate_hg(n, m, self.waist, grid),
            ModeKind::Lg { l, p } => evaluate_lg(l, p, self.waist, grid),
        }
    }
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeKind::Hg { n, m } => write!(f, "HG_{n}_{m}"),
            ModeKind::Lg { l, p } => write!(f, "LG_{l}_{p}"),
        }
    }
}

impl FromStr for ModeKind {
    type Err = Error;

    /// Parses `HG_n_m` / `LG_l_p` (case-insensitive family prefix).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("mode label `{s}` is not of the form HG_n_m or LG_l_p"));
        let mut parts = s.trim().split('_');
        let family = parts.next().ok_or_else(bad)?.to_ascii_uppercase();
        let a = parts.next().ok_or_else(bad)?;
        let b = parts.next().ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        match family.as_str() {
            "HG" => Ok(ModeKind::Hg {
                n: a.parse().map_err(|_| bad())?,
                m: b.parse().map_err(|_| bad())?,
            }),
            "LG" => Ok(ModeKind::Lg {
                l: a.parse().map_err(|_| bad())?,
                p: b.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

pub fn mode_order(kind: &ModeKind) -> u32 {
    match *kind {
        ModeKind::Hg { n, m } => n + m,
        ModeKind::Lg { l, p } => 2 * p + l.unsigned_abs(),
    }
}

/// The unique `(n, m)` with `n - m = l` and `min(n, m) = p`.
pub fn lg_to_hg_indices(l: i32, p: u32) -> (u32, u32) {
    let a = l.unsigned_abs();
    if l >= 0 {
        (p + a, p)
    } else {
        (p, p + a)
    }
}

/// LG mode written in the same-order HG basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HgExpansion {
    pub order: u32,
    /// `coefficients[k]` multiplies `HG(order - k, k)`.
    pub coefficients: Vec<Complex64>,
}

impl HgExpansion {
    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Coefficient of `HG(n, m)`, zero if the mode has a different order.
    pub fn weight_of(&self, n: u32, m: u32) -> Complex64 {
        if n + m != self.order {
            return Complex64::new(0.0, 0.0);
        }
        self.coefficients[m as usize]
    }

    /// Sums the grid-evaluated HG modes with the expansion weights.
    pub fn synthesize(&self, waist: f64, grid: &GridSpec) -> Result<ComplexField2D> {
        let mut acc = ComplexField2D::zeros(*grid);
        for (k, c) in self.coefficients.iter().enumerate() {
            let k = k as u32;
            let hg = evaluate_hg(self.order - k, k, waist, grid)?;
            acc = acc.add_scaled(*c, &hg)?;
        }
        Ok(acc)
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| f64::from(i).ln()).sum()
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Coefficients of `t^k` in `(1 - t)^n (1 + t)^m`, for `k = 0..=n+m`.
fn mixed_binomial_coefficients(n: u32, m: u32) -> Vec<f64> {
    (0..=n + m)
        .map(|k| {
            let lo = k.saturating_sub(m);
            let hi = k.min(n);
            (lo..=hi)
                .map(|j| {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    sign * binomial(n, j) * binomial(m, k - j)
                })
                .sum()
        })
        .collect()
}

/// Real basis-change coefficient `b(n, m, k)`.
///
/// `b = sqrt[(N-k)! k! / (2^N n! m!)] · [t^k] (1 - t)^n (1 + t)^m`, the
/// bracket being the Taylor coefficient `f^(k)(0) / k!`.
pub fn transform_coefficient(n: u32, m: u32, k: u32) -> Result<f64> {
    let order = n + m;
    if k > order {
        return Err(Error::IndexOutOfRange { k, order });
    }
    let taylor = mixed_binomial_coefficients(n, m)[k as usize];
    Ok(taylor * prefactor(n, m, k))
}

fn prefactor(n: u32, m: u32, k: u32) -> f64 {
    let order = n + m;
    let ln = ln_factorial(order - k) + ln_factorial(k)
        - f64::from(order) * std::f64::consts::LN_2
        - ln_factorial(n)
        - ln_factorial(m);
    (0.5 * ln).exp()
}

pub fn lg_as_hg_superposition(l: i32, p: u32) -> HgExpansion {
    let (n, m) = lg_to_hg_indices(l, p);
    let order = n + m;
    let taylor = mixed_binomial_coefficients(n, m);
    let coefficients = (0..=order)
        .map(|k| {
            let b = taylor[k as usize] * prefactor(n, m, k);
            i_pow(k) * b
        })
        .collect();
    HgExpansion {
        order,
        coefficients,
    }
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Normalised 1-D Hermite-Gauss profiles `u_0..=u_max` at `x` for waist `w0`.
///
/// Built from the orthonormal Hermite functions by the three-term
/// recurrence, so no factorials or large Hermite values appear.
fn hermite_gauss_1d(max: u32, x: f64, w0: f64) -> Vec<f64> {
    let xi = SQRT_2 * x / w0;
    let scale = (SQRT_2 / w0).sqrt();
    let mut out = Vec::with_capacity(max as usize + 1);
    let psi0 = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    out.push(psi0);
    if max >= 1 {
        out.push(SQRT_2 * xi * psi0);
    }
    for j in 1..max {
        let jf = f64::from(j);
        let next = (2.0 / (jf + 1.0)).sqrt() * xi * out[j as usize]
            - (jf / (jf + 1.0)).sqrt() * out[j as usize - 1];
        out.push(next);
    }
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

/// Generalised Laguerre polynomial `L_p^a(x)` by upward recurrence.
fn laguerre(p: u32, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..p {
        let kf = f64::from(k);
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn check_fits(kind: ModeKind, waist: f64, grid: &GridSpec) -> Result<()> {
    let spec = ModeSpec::new(kind, waist)?;
    let diameter = spec.second_moment_diameter();
    let required_extent = 3.0 * diameter;
    if required_extent > grid.physical_extent() {
        return Err(Error::ModeTooLarge {
            mode: spec.label(),
            diameter,
            required_extent,
        });
    }
    Ok(())
}

/// `HG(n, m)` at the waist, normalised on the grid.
pub fn evaluate_hg(n: u32, m: u32, w0: f64, grid: &GridSpec) -> Result<ComplexField2D> {
    check_fits(ModeKind::Hg { n, m }, w0, grid)?;
    let coords = grid.coordinates();
    let ux: Vec<f64> = coords.iter().map(|&x| hermite_gauss_1d(n, x, w0)[n as usize]).collect();
    let uy: Vec<f64> = coords.iter().map(|&y| hermite_gauss_1d(m, y, w0)[m as usize]).collect();
    let mut samples = Vec::with_capacity(grid.len());
    for &vy in &uy {
        for &vx in &ux {
            samples.push(Complex64::new(vx * vy, 0.0));
        }
    }
    normalize(&ComplexField2D::new(*grid, samples)?)
}

/// `LG(l, p)` at the waist, normalised on the grid; see the module docs for
/// the phase convention.
pub fn evaluate_lg(l: i32, p: u32, w0: f64, grid: &GridSpec) -> Result<ComplexField2D> {
    check_fits(ModeKind::Lg { l, p }, w0, grid)?;
    let a = l.unsigned_abs();
    let ln_norm = 0.5 * (std::f64::consts::LN_2 + ln_factorial(p) - PI.ln() - ln_factorial(p + a));
    let amp = ln_norm.exp() / w0;
    let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
    let scale = SQRT_2 / w0;
    // (ξ ∓ iη)^|l| carries ρ^|l| e^{-ilφ} without a branch cut at the origin.
    let helicity = if l >= 0 { -1.0 } else { 1.0 };
    let field = ComplexField2D::from_fn(*grid, |x, y| {
        let xi = scale * x;
        let eta = scale * y;
        let rho2 = xi * xi + eta * eta;
        let radial = laguerre(p, f64::from(a), rho2) * (-0.5 * rho2).exp();
        let vortex = Complex64::new(xi, helicity * eta).powu(a);
        vortex * (sign * amp * radial)
    })?;
    normalize(&field)
}

/// Net phase winding (in turns) of `field` around the circle of `radius`
/// centred on the optical axis, measured counter-clockwise in the (x, y)
/// frame. Samples are bilinearly interpolated.
pub fn phase_winding(field: &ComplexField2D, radius: f64, points: usize) -> f64 {
    let grid = field.grid();
    let n = grid.samples_per_axis();
    let pitch = grid.pitch();
    let sample = |x: f64, y: f64| -> Complex64 {
        let fx = x / pitch + n as f64 / 2.0 - 0.5;
        let fy = y / pitch + n as f64 / 2.0 - 0.5;
        let ix = (fx.floor() as isize).clamp(0, n as isize - 2) as usize;
        let iy = (fy.floor() as isize).clamp(0, n as isize - 2) as usize;
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        field.at(ix, iy) * ((1.0 - tx) * (1.0 - ty))
            + field.at(ix + 1, iy) * (tx * (1.0 - ty))
            + field.at(ix, iy + 1) * ((1.0 - tx) * ty)
            + field.at(ix + 1, iy + 1) * (tx * ty)
    };
    let mut total = 0.0;
    let mut prev = sample(radius, 0.0).arg();
    for j in 1..=points {
        let theta = 2.0 * PI * j as f64 / points as f64;
        let cur = sample(radius * theta.cos(), radius * theta.sin()).arg();
        let mut d = cur - prev;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        total += d;
        prev = cur;
    }
    total / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{inner_product, total_power};
    use std::f64::consts::FRAC_1_SQRT_2 as INV_SQRT_2;

    const W0: f64 = 1.0e-3;

    fn grid_for(order: u32) -> GridSpec {
        GridSpec::new(256, 10.0 * W0 * f64::from(order + 1).sqrt()).unwrap()
    }

    #[test]
    fn orders() {
        assert_eq!(mode_order(&ModeKind::Hg { n: 2, m: 2 }), 4);
        assert_eq!(mode_order(&ModeKind::Lg { l: 6, p: 1 }), 8);
        assert_eq!(mode_order(&ModeKind::Lg { l: 0, p: 0 }), 0);
        assert_eq!(mode_order(&ModeKind::Lg { l: -3, p: 2 }), 7);
    }

    #[test]
    fn index_conversion() {
        assert_eq!(lg_to_hg_indices(2, 1), (3, 1));
        assert_eq!(lg_to_hg_indices(0, 0), (0, 0));
        assert_eq!(lg_to_hg_indices(-2, 1), (1, 3));
        assert_eq!(lg_to_hg_indices(6, 1), (7, 1));
    }

    #[test]
    fn coefficients_match_lg21_expansion() {
        let expected = [0.5, -0.5, 0.0, 0.5, -0.5];
        for (k, e) in expected.iter().enumerate() {
            let b = transform_coefficient(3, 1, k as u32).unwrap();
            assert!((b - e).abs() < 1e-12, "b(3,1,{k}) = {b}");
        }
    }

    #[test]
    fn trivial_and_vanishing_coefficients() {
        assert!((transform_coefficient(0, 0, 0).unwrap() - 1.0).abs() < 1e-15);
        // [t^4] (1-t)^7 (1+t) = C(7,4) - C(7,3) = 0
        assert_eq!(transform_coefficient(7, 1, 4).unwrap(), 0.0);
        assert!(matches!(
            transform_coefficient(3, 1, 5),
            Err(Error::IndexOutOfRange { k: 5, order: 4 })
        ));
    }

    #[test]
    fn lg10_expansion() {
        let e = lg_as_hg_superposition(1, 0);
        assert_eq!(e.order, 1);
        assert!((e.coefficients[0] - Complex64::new(INV_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((e.coefficients[1] - Complex64::new(0.0, -INV_SQRT_2)).norm() < 1e-15);
        assert_eq!(lg_as_hg_superposition(0, 0).coefficients, vec![Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn lg10_expansion_matches_grid_overlaps() {
        let g = grid_for(1);
        let lg = evaluate_lg(1, 0, W0, &g).unwrap();
        let hg10 = evaluate_hg(1, 0, W0, &g).unwrap();
        let hg01 = evaluate_hg(0, 1, W0, &g).unwrap();
        let c0 = inner_product(&hg10, &lg).unwrap();
        let c1 = inner_product(&hg01, &lg).unwrap();
        assert!((c0 - Complex64::new(INV_SQRT_2, 0.0)).norm() < 1e-10);
        assert!((c1 - Complex64::new(0.0, -INV_SQRT_2)).norm() < 1e-10);
    }

    #[test]
    fn fundamental_modes_agree() {
        let g = grid_for(0);
        let hg = evaluate_hg(0, 0, W0, &g).unwrap();
        let lg = evaluate_lg(0, 0, W0, &g).unwrap();
        assert!(hg.max_abs_diff(&lg).unwrap() < 1e-10);
        assert!((total_power(&hg) - 1.0).abs() < 1e-12);
        let n = g.samples_per_axis();
        let peak = hg.at(n / 2, n / 2).norm();
        assert!(hg.samples().iter().all(|s| s.norm() <= peak + 1e-12));
    }

    #[test]
    fn hg_parity() {
        let g = grid_for(3);
        let n = g.samples_per_axis();
        let f = evaluate_hg(1, 2, W0, &g).unwrap();
        for iy in (0..n).step_by(7) {
            for ix in (0..n).step_by(5) {
                let v = f.at(ix, iy);
                let mx = f.at(n - 1 - ix, iy);
                let my = f.at(ix, n - 1 - iy);
                assert!((v + mx).norm() < 1e-12, "odd in x");
                assert!((v - my).norm() < 1e-12, "even in y");
                assert!(v.im == 0.0);
            }
        }
    }

    #[test]
    fn lg_intensity_is_rotationally_symmetric() {
        let g = grid_for(4);
        let n = g.samples_per_axis();
        let f = evaluate_lg(2, 1, W0, &g).unwrap();
        // 90° rotation maps (ix, iy) -> (n-1-iy, ix) on the half-offset grid.
        for iy in (0..n).step_by(9) {
            for ix in (0..n).step_by(11) {
                let a = f.at(ix, iy).norm_sqr();
                let b = f.at(n - 1 - iy, ix).norm_sqr();
                assert!((a - b).abs() < 1e-9 * (1.0 + a));
            }
        }
    }

    #[test]
    fn winding_of_lg61_outer_ring() {
        let g = grid_for(8);
        let f = evaluate_lg(6, 1, W0, &g).unwrap();
        // Intensity ∝ ρ^12 (7 - ρ²)² e^{-ρ²}; the outer maximum solves
        // ρ⁴ - 15ρ² + 42 = 0, i.e. ρ² = (15 + sqrt(57)) / 2.
        let rho2 = (15.0 + 57f64.sqrt()) / 2.0;
        let r = rho2.sqrt() * W0 / SQRT_2;
        let w = phase_winding(&f, r, 720);
        assert!((w + 6.0).abs() < 1e-6, "winding {w}");
        let neg = evaluate_lg(-6, 1, W0, &g).unwrap();
        assert!((phase_winding(&neg, r, 720) - 6.0).abs() < 1e-6);
    }

    #[test]
    fn too_small_grid_reports_required_extent() {
        let g = GridSpec::new(64, 2.0 * W0).unwrap();
        let err = evaluate_hg(2, 2, W0, &g).unwrap_err();
        match err {
            Error::ModeTooLarge { required_extent, .. } => {
                assert!((required_extent - 6.0 * W0 * 5f64.sqrt()).abs() < 1e-15)
            }
            other => panic!("unexpected {other}"),
        }
        assert!(err_message_names_extent(&evaluate_lg(2, 1, W0, &g).unwrap_err()));
    }

    fn err_message_names_extent(e: &Error) -> bool {
        e.to_string().contains("extent must be at least")
    }

    #[test]
    fn labels_round_trip() {
        for label in ["HG_2_2", "LG_2_1", "LG_-3_0", "HG_0_7"] {
            let kind: ModeKind = label.parse().unwrap();
            assert_eq!(kind.to_string(), label);
        }
        assert!("XG_1_1".parse::<ModeKind>().is_err());
        assert!("HG_1".parse::<ModeKind>().is_err());
        assert!("HG_-1_1".parse::<ModeKind>().is_err());
        let m = ModeSpec::hg(2, 2, W0).unwrap();
        assert_eq!(m.short_label(), "HG22");
        assert_eq!(ModeSpec::lg(6, 1, W0).unwrap().short_label(), "LG61");
    }

    #[test]
    fn laguerre_matches_closed_forms() {
        for &x in &[0.0, 0.3, 1.7, 5.0] {
            assert!((laguerre(1, 2.0, x) - (3.0 - x)).abs() < 1e-12);
            let l2 = 0.5 * (x * x - 2.0 * (2.0 + 2.0) * x + (2.0 + 1.0) * (2.0 + 2.0));
            assert!((laguerre(2, 2.0, x) - l2).abs() < 1e-12);
        }
    }
}
