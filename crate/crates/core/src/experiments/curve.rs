use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::link::{BerEstimate, BerResult};
use crate::turbulence::strehl_estimate;

/// A BER as written to disk: zero-error estimates are reported only as an
/// upper bound `< 1/bits`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BerValue {
    Measured(f64),
    Below(f64),
}

impl BerValue {
    pub fn from_estimate(e: &BerEstimate) -> Self {
        if e.errors == 0 {
            BerValue::Below(e.resolution())
        } else {
            BerValue::Measured(e.ber)
        }
    }

    /// Value used for interpolation: the measurement, or the bound.
    pub fn value(&self) -> f64 {
        match *self {
            BerValue::Measured(v) | BerValue::Below(v) => v,
        }
    }
}

impl fmt::Display for BerValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BerValue::Measured(v) => write!(f, "{v:.6e}"),
            BerValue::Below(v) => write!(f, "<{v:.6e}"),
        }
    }
}

impl std::str::FromStr for BerValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            t.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad BER value `{s}`: {e}")))
        };
        match s.strip_prefix('<') {
            Some(rest) => Ok(BerValue::Below(parse(rest)?)),
            None => Ok(BerValue::Measured(parse(s)?)),
        }
    }
}

/// BER against r0 for one receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct BerSeries {
    pub label: String,
    /// Fried parameter in meters, increasing.
    pub r0: Vec<f64>,
    pub ber: Vec<BerValue>,
}

/// Results of a sweep: one [`BerResult`] per r0, in increasing r0 order.
#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub arm_labels: Vec<String>,
    pub diversity_label: String,
    /// Beam diameter used for the reported Strehl column.
    pub strehl_diameter: f64,
    pub points: Vec<BerResult>,
}

/// Column name of the combined receiver, e.g. `EGC2221` for HG22 + LG21.
pub fn diversity_label(arm_labels: &[String]) -> String {
    let digits: String = arm_labels
        .iter()
        .map(|l| l.trim_start_matches(|c: char| c.is_ascii_alphabetic()))
        .collect();
    format!("EGC{digits}")
}

pub(crate) fn format_mm(r0: f64) -> String {
    if !r0.is_finite() {
        return "inf".into();
    }
    let mm = (r0 * 1e3 * 1e9).round() / 1e9;
    format!("{mm}")
}

impl BerCurve {
    pub fn labels(&self) -> Vec<String> {
        let mut all = self.arm_labels.clone();
        all.push(self.diversity_label.clone());
        all
    }

    pub fn series(&self, label: &str) -> Option<BerSeries> {
        let pick: Box<dyn Fn(&BerResult) -> &BerEstimate> = if label == self.diversity_label {
            Box::new(|p| &p.diversity)
        } else {
            let i = self.arm_labels.iter().position(|l| l == label)?;
            Box::new(move |p| &p.per_arm[i])
        };
        Some(BerSeries {
            label: label.to_string(),
            r0: self.points.iter().map(|p| p.r0).collect(),
            ber: self.points.iter().map(|p| BerValue::from_estimate(pick(p))).collect(),
        })
    }

    /// `r0,SR,<arms>,<EGC>,bits,screens,<arm>_se...,<EGC>_se` with r0 in mm.
    pub fn to_csv(&self) -> String {
        let labels = self.labels();
        let mut out = format!("r0,SR,{},bits,screens", labels.join(","));
        for l in &labels {
            out.push_str(&format!(",{l}_se"));
        }
        out.push('\n');
        for p in &self.points {
            let estimates: Vec<&BerEstimate> = p.per_arm.iter().chain(std::iter::once(&p.diversity)).collect();
            let sr = strehl_estimate(self.strehl_diameter, p.r0);
            out.push_str(&format!("{},{sr:.4}", format_mm(p.r0)));
            for e in &estimates {
                out.push_str(&format!(",{}", BerValue::from_estimate(e)));
            }
            out.push_str(&format!(",{},{}", p.bits_tested, p.screens_used));
            for e in &estimates {
                out.push_str(&format!(",{:.3e}", e.std_error));
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

/// A BER CSV read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct BerTable {
    pub labels: Vec<String>,
    pub r0: Vec<f64>,
    pub values: Vec<Vec<BerValue>>,
}

impl BerTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::Parse("empty BER table".into()))?
            .split(',')
            .map(str::trim)
            .collect();
        if header.first() != Some(&"r0") {
            return Err(Error::Parse("BER table must start with an r0 column".into()));
        }
        let series_cols: Vec<usize> = header
            .iter()
            .enumerate()
            .filter(|(_, h)| !matches!(**h, "r0" | "SR" | "bits" | "screens") && !h.ends_with("_se"))
            .map(|(i, _)| i)
            .collect();
        let labels = series_cols.iter().map(|&i| header[i].to_string()).collect();
        let mut r0 = Vec::new();
        let mut values = Vec::new();
        for line in lines {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(Error::Parse(format!("row `{line}` has {} cells, expected {}", cells.len(), header.len())));
            }
            let mm: f64 = cells[0]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad r0 `{}`: {e}", cells[0])))?;
            r0.push(mm * 1e-3);
            values.push(
                series_cols
                    .iter()
                    .map(|&i| cells[i].parse())
                    .collect::<Result<Vec<BerValue>>>()?,
            );
        }
        Ok(Self { labels, r0, values })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn series(&self, label: &str) -> Option<BerSeries> {
        let i = self.labels.iter().position(|l| l == label)?;
        Some(BerSeries {
            label: label.to_string(),
            r0: self.r0.clone(),
            ber: self.values.iter().map(|row| row[i]).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn estimate(errors: u64, bits: u64) -> BerEstimate {
        BerEstimate {
            ber: errors as f64 / bits as f64,
            std_error: 1e-3,
            errors,
            bits,
            screens: 4,
        }
    }

    fn curve() -> BerCurve {
        let point = |r0: f64, e: [u64; 3]| BerResult {
            r0,
            per_arm: vec![estimate(e[0], 1000), estimate(e[1], 1000)],
            diversity: estimate(e[2], 1000),
            bits_tested: 1000,
            screens_used: 4,
        };
        BerCurve {
            arm_labels: vec!["HG22".into(), "LG21".into()],
            diversity_label: diversity_label(&["HG22".into(), "LG21".into()]),
            strehl_diameter: 2.8e-3,
            points: vec![point(1e-3, [400, 420, 380]), point(4.5e-3, [100, 120, 90]), point(17e-3, [3, 5, 0])],
        }
    }

    #[test]
    fn egc_label_concatenates_indices() {
        assert_eq!(diversity_label(&["HG22".into(), "LG21".into()]), "EGC2221");
        assert_eq!(diversity_label(&["HG44".into(), "LG61".into()]), "EGC4461");
    }

    #[test]
    fn csv_layout() {
        let csv = curve().to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "r0,SR,HG22,LG21,EGC2221,bits,screens,HG22_se,LG21_se,EGC2221_se"
        );
        let second = lines.nth(1).unwrap();
        assert!(second.starts_with("4.5,"), "{second}");
        let last = lines.next().unwrap();
        assert!(last.starts_with("17,0.9503,3.000000e-3,5.000000e-3,<1.000000e-3,1000,4"), "{last}");
    }

    #[test]
    fn csv_reads_back() {
        let c = curve();
        let table = BerTable::parse(&c.to_csv()).unwrap();
        assert_eq!(table.labels, vec!["HG22", "LG21", "EGC2221"]);
        for label in table.labels.clone() {
            let a = c.series(&label).unwrap();
            let b = table.series(&label).unwrap();
            assert_eq!(a.ber, b.ber);
            for (x, y) in a.r0.iter().zip(&b.r0) {
                assert!((x - y).abs() < 1e-15);
            }
        }
        assert!(BerTable::parse("x,y\n1,2").is_err());
        assert!(BerTable::parse("r0,A\n1,abc").is_err());
    }
}
