//! On-disk data model: sweep segments, measurement manifests, loss series and
//! model files.
//!
//! Formats:
//!
//! * segment CSV, header `freq_hz,s21_re,s21_im`, one complex S21 sample per row;
//! * manifest JSON, material metadata plus a list of segment files;
//! * loss-series CSV, header `center_freq_ghz,pl_db`, 6-decimal fixed precision;
//! * model JSON, see [`LinearLossModel`].
//!
//! Every reader validates fully before returning; nothing partially built
//! escapes on error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::LinearLossModel;

pub const SEGMENT_HEADER: &str = "freq_hz,s21_re,s21_im";
pub const SERIES_HEADER: &str = "center_freq_ghz,pl_db";

const GHZ: f64 = 1e9;
/// Relative tolerance for grid uniformity and span checks.
const GRID_RTOL: f64 = 1e-6;

/// Center frequencies and per-segment sampling of a measurement campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPlan {
    #[serde(rename = "centers_ghz")]
    pub center_frequencies: Vec<f64>,
    #[serde(rename = "bandwidth_ghz")]
    pub segment_bandwidth: f64,
    #[serde(rename = "points")]
    pub points_per_segment: usize,
}

impl Default for BandPlan {
    /// Twelve 1 GHz bands centered at 4.5, 5.5, ..., 15.5 GHz, 256 points each.
    fn default() -> Self {
        BandPlan {
            center_frequencies: (0..12).map(|i| 4.5 + i as f64).collect(),
            segment_bandwidth: 1.0,
            points_per_segment: 256,
        }
    }
}

impl BandPlan {
    pub fn new(centers_ghz: Vec<f64>, bandwidth_ghz: f64, points: usize) -> Result<Self> {
        let plan = BandPlan {
            center_frequencies: centers_ghz,
            segment_bandwidth: bandwidth_ghz,
            points_per_segment: points,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Uniform plan from `lo` to `hi` inclusive in steps of `step` GHz.
    pub fn uniform(lo: f64, step: f64, hi: f64, bandwidth_ghz: f64, points: usize) -> Result<Self> {
        if !(step > 0.0) || !(hi >= lo) {
            return Err(Error::InvalidPlan(format!("bad range {lo}:{step}:{hi}")));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Self::new(
            (0..n).map(|i| lo + i as f64 * step).collect(),
            bandwidth_ghz,
            points,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.center_frequencies;
        if c.is_empty() {
            return Err(Error::InvalidPlan("no center frequencies".into()));
        }
        if !(self.segment_bandwidth > 0.0 && self.segment_bandwidth.is_finite()) {
            return Err(Error::InvalidPlan(format!(
                "bandwidth {} GHz must be positive",
                self.segment_bandwidth
            )));
        }
        if self.points_per_segment < 2 {
            return Err(Error::InvalidPlan(format!(
                "{} points per segment, need at least 2",
                self.points_per_segment
            )));
        }
        if c.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::InvalidPlan("center frequencies must be positive".into()));
        }
        if c.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPlan(
                "center frequencies must be strictly increasing".into(),
            ));
        }
        if c.len() > 2 {
            let step = c[1] - c[0];
            if c
                .windows(2)
                .any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * c[c.len() - 1])
            {
                return Err(Error::InvalidPlan(
                    "center frequencies must be uniformly spaced".into(),
                ));
            }
        }
        Ok(())
    }

    /// Frequency step inside a segment, Hz. The grid covers the bandwidth as
    /// `points` bins of equal width, so the delay resolution is exactly
    /// `1 / bandwidth`.
    pub fn grid_step_hz(&self) -> f64 {
        self.segment_bandwidth * GHZ / self.points_per_segment as f64
    }

    /// Absolute sample frequencies (Hz) of the segment centered at `center_ghz`.
    pub fn segment_grid_hz(&self, center_ghz: f64) -> Vec<f64> {
        let start = (center_ghz - self.segment_bandwidth / 2.0) * GHZ;
        let step = self.grid_step_hz();
        (0..self.points_per_segment)
            .map(|k| start + k as f64 * step)
            .collect()
    }

    /// Plan center within `tol_ghz` of `f_ghz`, if any.
    pub fn find_center(&self, f_ghz: f64, tol_ghz: f64) -> Option<f64> {
        self.center_frequencies
            .iter()
            .copied()
            .filter(|c| (c - f_ghz).abs() <= tol_ghz)
            .min_by(|a, b| (a - f_ghz).abs().total_cmp(&(b - f_ghz).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "LOS")]
    Los,
    #[serde(rename = "NLOS")]
    Nlos,
}

impl Scenario {
    pub const BOTH: [Scenario; 2] = [Scenario::Los, Scenario::Nlos];
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scenario::Los => "LOS",
            Scenario::Nlos => "NLOS",
        })
    }
}

/// Which acquisition a segment came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repeat {
    Index(u32),
    /// Mean over several repeats.
    Aggregate,
}

/// One band of complex S21 samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSegment {
    /// GHz.
    pub center_frequency: f64,
    /// Hz, uniform and ascending.
    pub frequency_grid: Vec<f64>,
    pub s21: Vec<Complex64>,
    pub repeat: Repeat,
}

impl SweepSegment {
    /// Builds a segment on the plan grid for `center_ghz`.
    pub fn on_plan(plan: &BandPlan, center_ghz: f64, s21: Vec<Complex64>, repeat: Repeat) -> Self {
        debug_assert_eq!(s21.len(), plan.points_per_segment);
        SweepSegment {
            center_frequency: center_ghz,
            frequency_grid: plan.segment_grid_hz(center_ghz),
            s21,
            repeat,
        }
    }

    pub fn len(&self) -> usize {
        self.s21.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s21.is_empty()
    }

    /// Grid step in Hz.
    pub fn step_hz(&self) -> f64 {
        let n = self.frequency_grid.len();
        if n < 2 {
            return 0.0;
        }
        (self.frequency_grid[n - 1] - self.frequency_grid[0]) / (n - 1) as f64
    }
}

/// Reads and validates a segment CSV against `plan`.
pub fn read_sweep_segment(path: impl AsRef<Path>, plan: &BandPlan) -> Result<SweepSegment> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = parse_csv(path, &text, SEGMENT_HEADER, 3)?;

    if rows.len() != plan.points_per_segment {
        return Err(Error::PointCount {
            path: path.into(),
            found: rows.len(),
            expected: plan.points_per_segment,
        });
    }
    // (row number, values); keep the row number for diagnostics after sorting
    rows.sort_by(|a, b| a.1[0].total_cmp(&b.1[0]));

    let n = rows.len();
    let first = rows[0].1[0];
    let last = rows[n - 1].1[0];
    let step = (last - first) / (n - 1) as f64;
    if !(step > 0.0) {
        return Err(Error::NonUniformGrid {
            path: path.into(),
            row: rows[1].0,
        });
    }
    for w in rows.windows(2) {
        let d = w[1].1[0] - w[0].1[0];
        if (d - step).abs() > GRID_RTOL * step {
            return Err(Error::NonUniformGrid {
                path: path.into(),
                row: w[1].0,
            });
        }
    }

    let bw_hz = plan.segment_bandwidth * GHZ;
    let span_bins = n as f64 * step;
    let span_inclusive = (n - 1) as f64 * step;
    if (span_bins - bw_hz).abs() > GRID_RTOL * bw_hz
        && (span_inclusive - bw_hz).abs() > GRID_RTOL * bw_hz
    {
        return Err(Error::GridPlanMismatch {
            path: path.into(),
            msg: format!(
                "grid spans {} GHz, plan bandwidth is {} GHz",
                span_bins / GHZ,
                plan.segment_bandwidth
            ),
        });
    }

    let mid_ghz = (first + last) / 2.0 / GHZ;
    let center = plan.find_center(mid_ghz, step / GHZ).ok_or_else(|| Error::GridPlanMismatch {
        path: path.into(),
        msg: format!("grid midpoint {mid_ghz} GHz is not within one step of a plan center"),
    })?;

    Ok(SweepSegment {
        center_frequency: center,
        frequency_grid: rows.iter().map(|r| r.1[0]).collect(),
        s21: rows.iter().map(|r| Complex64::new(r.1[1], r.1[2])).collect(),
        repeat: Repeat::Index(0),
    })
}

/// Writes a segment CSV. Values use Rust's shortest round-trip decimal form,
/// so reading the file back reproduces the segment bit for bit.
pub fn write_sweep_segment(segment: &SweepSegment, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(48 * segment.len() + 32);
    out.push_str(SEGMENT_HEADER);
    out.push('\n');
    for (f, z) in segment.frequency_grid.iter().zip(&segment.s21) {
        let _ = writeln!(out, "{},{},{}", f, z.re, z.im);
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaterialCategory {
    Wood,
    Glass,
    Foam,
    Concrete,
    Other,
}

/// One segment file referenced from a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRef {
    pub center_ghz: f64,
    pub repeat: u32,
    pub scenario: Scenario,
    /// Relative paths resolve against the manifest's directory.
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementManifest {
    pub material_name: String,
    #[serde(rename = "category")]
    pub material_category: MaterialCategory,
    #[serde(rename = "thickness_cm")]
    pub thickness: f64,
    #[serde(rename = "width_cm")]
    pub width: f64,
    #[serde(rename = "height_cm")]
    pub height: f64,
    pub repeats: u32,
    pub plan: BandPlan,
    #[serde(rename = "segments")]
    pub segment_files: Vec<SegmentRef>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl MeasurementManifest {
    pub fn resolve(&self, seg: &SegmentRef) -> PathBuf {
        if seg.path.is_absolute() {
            seg.path.clone()
        } else {
            self.base_dir.join(&seg.path)
        }
    }

    /// Segment references for one center and scenario, ordered by repeat index.
    pub fn segments_for(&self, center_ghz: f64, scenario: Scenario) -> Vec<&SegmentRef> {
        let tol = 1e-6 * center_ghz.abs().max(1.0);
        let mut refs: Vec<_> = self
            .segment_files
            .iter()
            .filter(|s| s.scenario == scenario && (s.center_ghz - center_ghz).abs() <= tol)
            .collect();
        refs.sort_by_key(|s| s.repeat);
        refs
    }

    /// Checks metadata, plan coverage, and (when `check_files`) that every
    /// referenced segment file exists.
    pub fn validate(&self, check_files: bool) -> Result<()> {
        for (field, v) in [
            ("thickness_cm", self.thickness),
            ("width_cm", self.width),
            ("height_cm", self.height),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidField {
                    field,
                    msg: format!("{v} must be strictly positive"),
                });
            }
        }
        if self.repeats < 1 {
            return Err(Error::InvalidField {
                field: "repeats",
                msg: format!("{} must be at least 1", self.repeats),
            });
        }
        self.plan.validate()?;

        let tol = 1e-6 * self.plan.center_frequencies[self.plan.center_frequencies.len() - 1];
        for seg in &self.segment_files {
            if self.plan.find_center(seg.center_ghz, tol).is_none() {
                return Err(Error::InvalidField {
                    field: "segments",
                    msg: format!("{} GHz is not a plan center", seg.center_ghz),
                });
            }
        }
        for scenario in Scenario::BOTH {
            let missing: Vec<f64> = self
                .plan
                .center_frequencies
                .iter()
                .copied()
                .filter(|&c| self.segments_for(c, scenario).is_empty())
                .collect();
            if !missing.is_empty() {
                return Err(Error::MissingCenters {
                    scenario: scenario.to_string(),
                    centers: missing,
                });
            }
        }
        if check_files {
            for seg in &self.segment_files {
                let p = self.resolve(seg);
                if !p.is_file() {
                    return Err(Error::MissingSegmentFile { path: p });
                }
            }
        }
        Ok(())
    }

    /// Loads and validates every segment file for one center and scenario,
    /// ordered by repeat index.
    pub fn load_segments(&self, center_ghz: f64, scenario: Scenario) -> Result<Vec<SweepSegment>> {
        self.segments_for(center_ghz, scenario)
            .into_iter()
            .map(|r| {
                let mut seg = read_sweep_segment(self.resolve(r), &self.plan)?;
                if (seg.center_frequency - center_ghz).abs() > 1e-9 {
                    return Err(Error::GridPlanMismatch {
                        path: self.resolve(r),
                        msg: format!(
                            "file is centered at {} GHz, manifest says {} GHz",
                            seg.center_frequency, center_ghz
                        ),
                    });
                }
                seg.repeat = Repeat::Index(r.repeat);
                Ok(seg)
            })
            .collect()
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<MeasurementManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut manifest: MeasurementManifest =
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.into(),
            source,
        })?;
    manifest.base_dir = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    manifest.validate(true)?;
    Ok(manifest)
}

pub fn write_manifest(manifest: &MeasurementManifest, path: impl AsRef<Path>) -> Result<()> {
    write_json(manifest, path.as_ref())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossPoint {
    pub center_ghz: f64,
    pub loss_db: f64,
}

/// Penetration loss per band center.
#[derive(Debug, Clone, PartialEq)]
pub struct PenetrationLossSeries {
    pub material_name: String,
    pub points: Vec<LossPoint>,
}

impl PenetrationLossSeries {
    pub fn new(material_name: impl Into<String>, points: Vec<LossPoint>) -> Result<Self> {
        let s = PenetrationLossSeries {
            material_name: material_name.into(),
            points,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_pairs(
        material_name: impl Into<String>,
        pairs: impl IntoIterator<Item = (f64, f64)>,
    ) -> Result<Self> {
        Self::new(
            material_name,
            pairs
                .into_iter()
                .map(|(center_ghz, loss_db)| LossPoint {
                    center_ghz,
                    loss_db,
                })
                .collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(p) = self
            .points
            .iter()
            .find(|p| !p.loss_db.is_finite() || !p.center_ghz.is_finite())
        {
            return Err(Error::InvalidField {
                field: "points",
                msg: format!("non-finite point ({}, {})", p.center_ghz, p.loss_db),
            });
        }
        if self.points.windows(2).any(|w| w[1].center_ghz <= w[0].center_ghz) {
            return Err(Error::InvalidField {
                field: "points",
                msg: "frequencies must be strictly ascending".into(),
            });
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.center_ghz).collect()
    }

    pub fn losses(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.loss_db).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when there is exactly one point per plan center.
    pub fn matches_plan(&self, plan: &BandPlan) -> bool {
        self.points.len() == plan.center_frequencies.len()
            && self
                .points
                .iter()
                .zip(&plan.center_frequencies)
                .all(|(p, c)| (p.center_ghz - c).abs() <= 1e-9 * c.abs().max(1.0))
    }
}

pub fn write_loss_series(series: &PenetrationLossSeries, path: impl AsRef<Path>) -> Result<()> {
    series.validate()?;
    let path = path.as_ref();
    fs::write(path, format_loss_series(series)).map_err(|e| Error::io(path, e))
}

pub(crate) fn format_loss_series(series: &PenetrationLossSeries) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for p in &series.points {
        let _ = writeln!(out, "{:.6},{:.6}", p.center_ghz, p.loss_db);
    }
    out
}

/// Reads a loss-series CSV. The material name is taken from the file stem.
pub fn read_loss_series(path: impl AsRef<Path>) -> Result<PenetrationLossSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows = parse_csv(path, &text, SERIES_HEADER, 2)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    PenetrationLossSeries::from_pairs(name, rows.into_iter().map(|(_, v)| (v[0], v[1])))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<LinearLossModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let model: LinearLossModel = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    model.validate()?;
    Ok(model)
}

pub fn write_model(model: &LinearLossModel, path: impl AsRef<Path>) -> Result<()> {
    write_json(model, path.as_ref())
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses a headed numeric CSV into `(row number, values)`. Row numbers are
/// 1-based file lines, so the header is line 1.
fn parse_csv(
    path: &Path,
    text: &str,
    header: &'static str,
    columns: usize,
) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let found = reader
        .headers()
        .map_err(|e| Error::MalformedRow {
            path: path.into(),
            row: 1,
            msg: e.to_string(),
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if found != header {
        return Err(Error::Header {
            path: path.into(),
            found,
            expected: header,
        });
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::MalformedRow {
            path: path.into(),
            row,
            msg: e.to_string(),
        })?;
        if record.len() != columns {
            return Err(Error::MalformedRow {
                path: path.into(),
                row,
                msg: format!("expected {columns} fields, found {}", record.len()),
            });
        }
        let values = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::MalformedRow {
                        path: path.into(),
                        row,
                        msg: format!("invalid number {field:?}"),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((row, values));
    }
    Ok(rows)
}
