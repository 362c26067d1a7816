//! Linear penetration-loss models `PL(f) = k·f + b`, the built-in model
//! catalog, and difference/RMSE comparison.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep_io::{write_json, BandPlan, PenetrationLossSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelSource {
    #[serde(rename = "fitted")]
    Fitted,
    #[serde(rename = "tr38901")]
    Tr38901,
}

/// Loss in dB that grows linearly with frequency in GHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearLossModel {
    pub name: String,
    /// dB/GHz.
    #[serde(rename = "slope_db_per_ghz")]
    pub slope_k: f64,
    /// dB.
    #[serde(rename = "intercept_db")]
    pub intercept_b: f64,
    /// GHz, `lo < hi`.
    #[serde(rename = "valid_range_ghz")]
    pub valid_range: (f64, f64),
    pub source: ModelSource,
}

/// A model value together with whether `f` was inside the validity range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value_db: f64,
    pub in_range: bool,
}

impl LinearLossModel {
    pub fn new(
        name: impl Into<String>,
        slope_k: f64,
        intercept_b: f64,
        valid_range: (f64, f64),
        source: ModelSource,
    ) -> Result<Self> {
        let m = LinearLossModel {
            name: name.into(),
            slope_k,
            intercept_b,
            valid_range,
            source,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slope_k.is_finite() && self.intercept_b.is_finite()) {
            return Err(Error::InvalidField {
                field: "model",
                msg: format!("{}: non-finite parameters", self.name),
            });
        }
        let (lo, hi) = self.valid_range;
        if !(lo < hi) {
            return Err(Error::InvalidField {
                field: "valid_range_ghz",
                msg: format!("{}: [{lo}, {hi}] is empty", self.name),
            });
        }
        Ok(())
    }

    /// `k·f + b`, flagged when `f_ghz` lies outside the validity range.
    /// Out-of-range values are still computed.
    pub fn evaluate(&self, f_ghz: f64) -> Evaluation {
        Evaluation {
            value_db: self.value_at(f_ghz),
            in_range: self.in_range(f_ghz),
        }
    }

    /// `k·f + b` without the range flag.
    pub fn value_at(&self, f_ghz: f64) -> f64 {
        self.slope_k * f_ghz + self.intercept_b
    }

    pub fn in_range(&self, f_ghz: f64) -> bool {
        let (lo, hi) = self.valid_range;
        f_ghz >= lo && f_ghz <= hi
    }

    /// Slope and intercept rounded to two decimals, the precision used for
    /// reporting.
    pub fn rounded(&self) -> (f64, f64) {
        (round2(self.slope_k), round2(self.intercept_b))
    }
}

pub(crate) fn round2(x: f64) -> f64 {
    let r = (x * 100.0).round() / 100.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Fitted models are quoted over the measurement centers.
pub const FITTED_RANGE_GHZ: (f64, f64) = (4.5, 15.5);
/// Frequency range of the TR 38.901 material penetration-loss formulas.
pub const TR38901_RANGE_GHZ: (f64, f64) = (0.5, 100.0);

const CATALOG: [(&str, f64, f64, ModelSource); 12] = [
    ("Wooden Board 1", 0.23, 1.75, ModelSource::Fitted),
    ("Wooden Board 2", 0.23, 1.52, ModelSource::Fitted),
    ("Wooden Board 3", 0.07, 3.55, ModelSource::Fitted),
    ("TR 38.901 Wood Model", 0.12, 4.85, ModelSource::Tr38901),
    ("Double-Layer Glass", 0.30, 2.30, ModelSource::Fitted),
    ("Frosted Glass", -0.06, 3.94, ModelSource::Fitted),
    ("TR 38.901 Glass Model", 0.20, 2.0, ModelSource::Tr38901),
    ("Foam Board 1", -0.01, 1.84, ModelSource::Fitted),
    ("Foam Board 2", -0.05, 1.97, ModelSource::Fitted),
    ("Foam Board 3", -0.01, 1.44, ModelSource::Fitted),
    ("Concrete Slab", 0.95, 9.83, ModelSource::Fitted),
    ("TR 38.901 Concrete Model", 4.00, 5.00, ModelSource::Tr38901),
];

/// Measured fits and their TR 38.901 counterparts, two-decimal parameters.
pub fn catalog() -> Vec<LinearLossModel> {
    CATALOG
        .iter()
        .map(|&(name, k, b, source)| LinearLossModel {
            name: name.to_string(),
            slope_k: k,
            intercept_b: b,
            valid_range: match source {
                ModelSource::Fitted => FITTED_RANGE_GHZ,
                ModelSource::Tr38901 => TR38901_RANGE_GHZ,
            },
            source,
        })
        .collect()
}

/// Case-insensitive catalog lookup. A few common aliases are accepted
/// ("Frost Glass", "Wood Board 1", ...).
pub fn lookup(name: &str) -> Result<LinearLossModel> {
    let key = normalize(name);
    catalog()
        .into_iter()
        .find(|m| normalize(&m.name) == key)
        .ok_or_else(|| Error::UnknownModel(name.to_string()))
}

fn normalize(name: &str) -> String {
    let lower = name.trim().to_lowercase().replace(['-', '_'], " ");
    lower
        .split_whitespace()
        .map(|w| match w {
            "frost" => "frosted",
            "wooden" => "wood",
            _ => w,
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Per-point differences `a(f) − b(f)` and their RMSE.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelComparison {
    /// GHz.
    pub grid: Vec<f64>,
    /// dB.
    pub differences: Vec<f64>,
    /// dB.
    pub rmse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub rmse_db: f64,
    pub min_diff_db: f64,
    pub max_diff_db: f64,
}

impl ModelComparison {
    fn from_differences(grid: Vec<f64>, differences: Vec<f64>) -> Self {
        let rmse = rmse(&differences);
        ModelComparison {
            grid,
            differences,
            rmse,
        }
    }

    pub fn min_difference(&self) -> f64 {
        self.differences.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_difference(&self) -> f64 {
        self.differences
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean_difference(&self) -> f64 {
        self.differences.iter().sum::<f64>() / self.differences.len() as f64
    }

    pub fn summary(&self) -> ComparisonSummary {
        ComparisonSummary {
            rmse_db: self.rmse,
            min_diff_db: self.min_difference(),
            max_diff_db: self.max_difference(),
        }
    }

    /// CSV `freq_ghz,diff_db`, full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_ghz,diff_db\n");
        for (f, d) in self.grid.iter().zip(&self.differences) {
            let _ = writeln!(out, "{f},{d}");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn write_summary(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(&self.summary(), path.as_ref())
    }
}

/// `sqrt(Σ e² / n)`.
pub fn rmse(differences: &[f64]) -> f64 {
    if differences.is_empty() {
        return 0.0;
    }
    (differences.iter().map(|e| e * e).sum::<f64>() / differences.len() as f64).sqrt()
}

/// Left-hand operand of a comparison.
#[derive(Debug, Clone, Copy)]
pub enum Subject<'a> {
    Model(&'a LinearLossModel),
    Series(&'a PenetrationLossSeries),
}

impl<'a> From<&'a LinearLossModel> for Subject<'a> {
    fn from(m: &'a LinearLossModel) -> Self {
        Subject::Model(m)
    }
}

impl<'a> From<&'a PenetrationLossSeries> for Subject<'a> {
    fn from(s: &'a PenetrationLossSeries) -> Self {
        Subject::Series(s)
    }
}

/// Differences `e_i = a(f_i) − b(f_i)` over `grid` and their RMSE.
///
/// For a model subject the grid defaults to the measurement centers of the
/// default band plan; for a series it defaults to the series' own
/// frequencies, and an explicit grid must be a subset of them.
pub fn compare<'a>(
    a: impl Into<Subject<'a>>,
    b: &LinearLossModel,
    grid: Option<&[f64]>,
) -> Result<ModelComparison> {
    match a.into() {
        Subject::Model(m) => {
            let grid = match grid {
                Some(g) => g.to_vec(),
                None => BandPlan::default().center_frequencies,
            };
            if grid.is_empty() {
                return Err(Error::EmptyGrid);
            }
            let diffs = grid.iter().map(|&f| m.value_at(f) - b.value_at(f)).collect();
            Ok(ModelComparison::from_differences(grid, diffs))
        }
        Subject::Series(s) => {
            let points: Vec<_> = match grid {
                None => s.points.clone(),
                Some(g) => g
                    .iter()
                    .map(|&f| {
                        s.points
                            .iter()
                            .find(|p| (p.center_ghz - f).abs() <= 1e-9 * f.abs().max(1.0))
                            .copied()
                            .ok_or(Error::GridNotInSeries(f))
                    })
                    .collect::<Result<_>>()?,
            };
            if points.is_empty() {
                return Err(Error::EmptyGrid);
            }
            let grid = points.iter().map(|p| p.center_ghz).collect();
            let diffs = points
                .iter()
                .map(|p| p.loss_db - b.value_at(p.center_ghz))
                .collect();
            Ok(ModelComparison::from_differences(grid, diffs))
        }
    }
}

/// `b(f) − a(f)`: how much the standard model `b` exceeds the fitted model `a`.
pub fn difference_at(a: &LinearLossModel, b: &LinearLossModel, f_ghz: f64) -> f64 {
    b.value_at(f_ghz) - a.value_at(f_ghz)
}
