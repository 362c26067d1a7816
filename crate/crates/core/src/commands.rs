//! The `process`, `fit`, `compare`, `synth` and `report` commands as library
//! calls. The `penloss` binary is a thin argument parser over these.
//!
//! Console text uses two-decimal dB; files keep full precision.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::cir::{process_manifest, GateConfig, Window};
use crate::error::{Error, Result};
use crate::fitting::{fit_linear, FitResult};
use crate::models::{compare as compare_subjects, lookup, round2, LinearLossModel, ModelComparison, Subject};
use crate::slab::{read_synth_config, synthesize_manifest};
use crate::sweep_io::{
    format_loss_series, read_loss_series, read_manifest, read_model, write_model,
    MaterialCategory, MeasurementManifest, PenetrationLossSeries,
};

pub const LOSS_FILE: &str = "loss.csv";
pub const MODEL_FILE: &str = "model.json";
pub const RESIDUALS_FILE: &str = "residuals.csv";
pub const DIFF_FILE: &str = "diff.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_MD: &str = "summary.md";

/// Two-decimal formatting that never prints `-0.00`.
pub fn fmt2(x: f64) -> String {
    format!("{:.2}", round2(x))
}

/// Parses `lo:step:hi` (inclusive) into a list of frequencies.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::InvalidField {
        field: "grid",
        msg: format!("{spec:?}: {msg}"),
    };
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("expected lo:step:hi"))?;
    let [lo, step, hi] = parts[..] else {
        return Err(bad("expected lo:step:hi"));
    };
    if !(step > 0.0) {
        return Err(bad("step must be positive"));
    }
    if hi < lo {
        return Err(Error::EmptyGrid);
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| lo + i as f64 * step).collect())
}

/// Runs the pipeline on a manifest and writes the loss-series CSV.
pub fn process(
    manifest_path: &Path,
    gate: &GateConfig,
    window: Window,
    out: &Path,
) -> Result<PenetrationLossSeries> {
    let manifest = read_manifest(manifest_path)?;
    let series = process_manifest(&manifest, gate, window)?;
    write_text(out, &format_loss_series(&series))?;
    Ok(series)
}

/// Fits a loss-series CSV and writes the model JSON. Returns the fit and the
/// console line `k=… b=…`.
pub fn fit(series_path: &Path, out_model: &Path) -> Result<(FitResult, String)> {
    let series = read_loss_series(series_path)?;
    let result = fit_linear(&series)?;
    write_model(&result.model, out_model)?;
    let line = format!(
        "k={} b={}",
        fmt2(result.model.slope_k),
        fmt2(result.model.intercept_b)
    );
    Ok((result, line))
}

/// A comparison operand given on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Model(LinearLossModel),
    Series(PenetrationLossSeries),
}

impl Operand {
    /// An existing `.csv` file is a loss series, any other existing file a
    /// model JSON; otherwise the text is a catalog name.
    pub fn resolve(text: &str) -> Result<Self> {
        let path = Path::new(text);
        if path.is_file() {
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                return Ok(Operand::Series(read_loss_series(path)?));
            }
            return Ok(Operand::Model(read_model(path)?));
        }
        Ok(Operand::Model(lookup(text)?))
    }

    fn subject(&self) -> Subject<'_> {
        match self {
            Operand::Model(m) => Subject::Model(m),
            Operand::Series(s) => Subject::Series(s),
        }
    }
}

/// Compares `a` against model `b`, writes `diff.csv` and `summary.json` into
/// `out_dir`, and returns the console line `RMSE … dB`.
pub fn compare(
    a: &Operand,
    b: &Operand,
    grid: Option<&[f64]>,
    out_dir: &Path,
) -> Result<(ModelComparison, String)> {
    let Operand::Model(reference) = b else {
        return Err(Error::InvalidField {
            field: "reference",
            msg: "the second operand must be a model".into(),
        });
    };
    let cmp = compare_subjects(a.subject(), reference, grid)?;
    write_comparison(&cmp, out_dir)?;
    let line = format!("RMSE {} dB", fmt2(cmp.rmse));
    Ok((cmp, line))
}

fn write_comparison(cmp: &ModelComparison, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    cmp.write_csv(out_dir.join(DIFF_FILE))?;
    cmp.write_summary(out_dir.join(SUMMARY_JSON))
}

/// Generates a synthetic campaign from a JSON config.
pub fn synth(config_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<MeasurementManifest> {
    let mut cfg = read_synth_config(config_path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    synthesize_manifest(&cfg, out_dir)
}

#[derive(Debug, Clone)]
pub struct Report {
    pub series: PenetrationLossSeries,
    pub fit: FitResult,
    pub reference: LinearLossModel,
    pub comparison: ModelComparison,
    pub markdown: String,
}

/// `process` → `fit` → `compare` against a catalog reference. Writes
/// `loss.csv`, `model.json`, `residuals.csv`, `diff.csv`, `summary.json` and
/// `summary.md` into `out_dir`; each file is identical to what the
/// standalone command would write.
pub fn report(
    manifest_path: &Path,
    reference: &str,
    gate: &GateConfig,
    window: Window,
    out_dir: &Path,
) -> Result<Report> {
    let reference = lookup(reference).map_err(|e| e.in_stage("compare"))?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let manifest = read_manifest(manifest_path).map_err(|e| e.in_stage("process"))?;
    let loss_path = out_dir.join(LOSS_FILE);
    let series = process(manifest_path, gate, window, &loss_path).map_err(|e| e.in_stage("process"))?;

    let (fit_result, _) =
        fit(&loss_path, &out_dir.join(MODEL_FILE)).map_err(|e| e.in_stage("fit"))?;
    fit_result
        .write_residuals(out_dir.join(RESIDUALS_FILE))
        .map_err(|e| e.in_stage("fit"))?;

    let (comparison, _) = compare(
        &Operand::Series(fit_result.series.clone()),
        &Operand::Model(reference.clone()),
        None,
        out_dir,
    )
    .map_err(|e| e.in_stage("compare"))?;

    let markdown = summary_markdown(&manifest, &fit_result, &reference, &comparison);
    write_text(&out_dir.join(SUMMARY_MD), &markdown)?;

    Ok(Report {
        series,
        fit: fit_result,
        reference,
        comparison,
        markdown,
    })
}

fn category_label(c: MaterialCategory) -> &'static str {
    match c {
        MaterialCategory::Wood => "Wood",
        MaterialCategory::Glass => "Glass",
        MaterialCategory::Foam => "Foam",
        MaterialCategory::Concrete => "Concrete",
        MaterialCategory::Other => "Other",
    }
}

fn summary_markdown(
    manifest: &MeasurementManifest,
    fit: &FitResult,
    reference: &LinearLossModel,
    cmp: &ModelComparison,
) -> String {
    let cat = category_label(manifest.material_category);
    let mut md = String::new();
    let _ = writeln!(md, "# Penetration loss: {}\n", manifest.material_name);
    let _ = writeln!(
        md,
        "Thickness {} cm, {} × {} cm, {} repeats, {} centers.\n",
        manifest.thickness,
        manifest.width,
        manifest.height,
        manifest.repeats,
        manifest.plan.center_frequencies.len()
    );
    let _ = writeln!(
        md,
        "| Category | Name | Slope (k) | Intercept (b) | RMSE vs reference (dB) |"
    );
    let _ = writeln!(md, "|---|---|---|---|---|");
    let _ = writeln!(
        md,
        "| {cat} | {} | {} | {} | {} |",
        manifest.material_name,
        fmt2(fit.model.slope_k),
        fmt2(fit.model.intercept_b),
        fmt2(cmp.rmse)
    );
    let _ = writeln!(
        md,
        "| {cat} | {} | {} | {} | - |",
        reference.name,
        fmt2(reference.slope_k),
        fmt2(reference.intercept_b)
    );
    let _ = writeln!(
        md,
        "\nDifferences (measured − reference) span {} to {} dB. Fit residual RMS {} dB.",
        fmt2(cmp.min_difference()),
        fmt2(cmp.max_difference()),
        fmt2(fit.residual_rms)
    );
    md
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(PathBuf::from(path), e))
}
