//! Ordinary least-squares fit of `PL = k·f + b` to a loss series.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::models::{compare, LinearLossModel, ModelComparison, ModelSource};
use crate::sweep_io::PenetrationLossSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: LinearLossModel,
    /// The data the model was fitted to.
    pub series: PenetrationLossSeries,
    /// `PL_i − (k·f_i + b)`, dB.
    pub residuals: Vec<f64>,
    /// dB.
    pub residual_rms: f64,
    /// `None` when the losses have zero variance.
    pub r_squared: Option<f64>,
}

impl FitResult {
    pub fn sum_squared_residuals(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum()
    }

    /// CSV `freq_ghz,residual_db`.
    pub fn residuals_csv(&self) -> String {
        let mut out = String::from("freq_ghz,residual_db\n");
        for (p, r) in self.series.points.iter().zip(&self.residuals) {
            let _ = writeln!(out, "{},{}", p.center_ghz, r);
        }
        out
    }

    pub fn write_residuals(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.residuals_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Closed-form OLS on mean-centered frequencies.
pub fn fit_linear(series: &PenetrationLossSeries) -> Result<FitResult> {
    let n = series.points.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let f = series.frequencies();
    let y = series.losses();
    let nf = n as f64;
    let f_mean = f.iter().sum::<f64>() / nf;
    let y_mean = y.iter().sum::<f64>() / nf;

    let sff: f64 = f.iter().map(|fi| (fi - f_mean).powi(2)).sum();
    if sff <= f64::EPSILON * f_mean.abs().max(1.0) * nf {
        return Err(Error::SingularFit);
    }
    let sfy: f64 = f
        .iter()
        .zip(&y)
        .map(|(fi, yi)| (fi - f_mean) * (yi - y_mean))
        .sum();
    let k = sfy / sff;
    let b = y_mean - k * f_mean;

    let residuals: Vec<f64> = f.iter().zip(&y).map(|(fi, yi)| yi - (k * fi + b)).collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let syy: f64 = y.iter().map(|yi| (yi - y_mean).powi(2)).sum();
    let r_squared = if syy > 0.0 {
        Some((1.0 - ssr / syy).clamp(0.0, 1.0))
    } else {
        None
    };

    let model = LinearLossModel::new(
        series.material_name.clone(),
        k,
        b,
        (f[0], f[n - 1]),
        ModelSource::Fitted,
    )?;
    Ok(FitResult {
        model,
        series: series.clone(),
        residual_rms: (ssr / nf).sqrt(),
        residuals,
        r_squared,
    })
}

/// Compares the fitted data against `reference` on the series' frequencies.
pub fn fit_report(result: &FitResult, reference: &LinearLossModel) -> Result<ModelComparison> {
    compare(&result.series, reference, None)
}
