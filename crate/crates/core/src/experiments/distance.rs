use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::turbulence::{distance_gain, z_from_r0, AtmosphereModel};

use super::curve::{BerSeries, BerValue};

/// r0 at which a receiver reaches one target BER.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing {
    At { r0: f64, z: f64 },
    NotAchievable,
}

impl Crossing {
    pub fn r0(&self) -> Option<f64> {
        match *self {
            Crossing::At { r0, .. } => Some(r0),
            Crossing::NotAchievable => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRow {
    pub target_ber: f64,
    pub siso: Crossing,
    pub diversity: Crossing,
    /// `(z_div / z_siso − 1)·100`, when both crossings exist.
    pub gain_percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    pub siso_label: String,
    pub diversity_label: String,
    pub atmosphere: AtmosphereModel,
    pub rows: Vec<DistanceRow>,
}

/// Distance gain in percent between the r0 the SISO link needs and the
/// smaller r0 the diversity link tolerates.
pub fn distance_gain_percent(r0_siso: f64, r0_diversity: f64) -> f64 {
    100.0 * distance_gain(r0_siso, r0_diversity)
}

/// First r0 at which the curve falls to `target`, interpolating linearly in
/// (ln BER, r0) between the bracketing samples. Upper-bound samples (no
/// errors observed) only bracket targets at or above their bound.
pub fn crossing_r0(series: &BerSeries, target: f64) -> Option<f64> {
    if !(target > 0.0 && target.is_finite()) {
        return None;
    }
    let pts: Vec<(f64, BerValue)> = series.r0.iter().copied().zip(series.ber.iter().copied()).collect();
    if let Some(&(r0, v)) = pts.first() {
        if matches!(v, BerValue::Measured(b) if b == target) {
            return Some(r0);
        }
    }
    for w in pts.windows(2) {
        let (r_a, a) = w[0];
        let (r_b, b) = w[1];
        let (ba, bb) = (a.value(), b.value());
        if !(ba > 0.0 && bb > 0.0) || matches!(a, BerValue::Below(_)) {
            continue;
        }
        if !(ba >= target && bb <= target) {
            continue;
        }
        if ba == bb {
            return Some(r_a);
        }
        let t = (target.ln() - ba.ln()) / (bb.ln() - ba.ln());
        return Some(r_a + t * (r_b - r_a));
    }
    None
}

pub fn distance_gain_table(
    siso: &BerSeries,
    diversity: &BerSeries,
    target_bers: &[f64],
    atmosphere: &AtmosphereModel,
) -> Result<DistanceTable> {
    if target_bers.is_empty() {
        return Err(Error::InvalidParameter("no target BERs given".into()));
    }
    if let Some(&t) = target_bers.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(Error::InvalidParameter(format!("target BER {t} outside (0, 1)")));
    }
    let crossing = |s: &BerSeries, t: f64| match crossing_r0(s, t) {
        Some(r0) => Crossing::At {
            r0,
            z: z_from_r0(atmosphere, r0),
        },
        None => Crossing::NotAchievable,
    };
    let rows = target_bers
        .iter()
        .map(|&t| {
            let s = crossing(siso, t);
            let d = crossing(diversity, t);
            let gain_percent = match (s.r0(), d.r0()) {
                (Some(rs), Some(rd)) => Some(distance_gain_percent(rs, rd)),
                _ => None,
            };
            DistanceRow {
                target_ber: t,
                siso: s,
                diversity: d,
                gain_percent,
            }
        })
        .collect();
    Ok(DistanceTable {
        siso_label: siso.label.clone(),
        diversity_label: diversity.label.clone(),
        atmosphere: *atmosphere,
        rows,
    })
}

impl DistanceTable {
    /// `target_ber,r0_<siso>_mm,z_<siso>_km,r0_<div>_mm,z_<div>_km,gain_percent`;
    /// unreachable targets are written as `NA`.
    pub fn to_csv(&self) -> String {
        let (s, d) = (&self.siso_label, &self.diversity_label);
        let mut out = format!("target_ber,r0_{s}_mm,z_{s}_km,r0_{d}_mm,z_{d}_km,gain_percent\n");
        let cells = |c: &Crossing| match *c {
            Crossing::At { r0, z } => format!("{:.4},{:.4}", r0 * 1e3, z * 1e-3),
            Crossing::NotAchievable => "NA,NA".to_string(),
        };
        for row in &self.rows {
            let gain = row.gain_percent.map_or("NA".to_string(), |g| format!("{g:.1}"));
            let _ = writeln!(
                out,
                "{:e},{},{},{gain}",
                row.target_ber,
                cells(&row.siso),
                cells(&row.diversity)
            );
        }
        out
    }
}
