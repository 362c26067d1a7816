//! Normal-incidence transmission through layered lossy dielectrics, and a
//! synthetic sweep generator built on it.
//!
//! Each layer is a two-port with transfer matrix
//!
//! ```text
//! | cosh(γd)        z·sinh(γd) |      γ = j·(2πf/c)·sqrt(εc)
//! | sinh(γd)/z      cosh(γd)   |      z = 1/sqrt(εc)   (impedance relative to air)
//! ```
//!
//! with `εc = ε′·(1 − j·tanδ)`. For the cascaded matrix `[A B; C D]` between
//! air half-spaces, `t = 2/(A + B + C + D)` and `r = (A + B − C − D)/(A + B + C + D)`.
//!
//! [`transmission`] reports `t` relative to an air path of the same total
//! thickness, which is what a LOS/NLOS insertion measurement sees: an air
//! layer transmits exactly 1 and a dielectric layer only shows its excess
//! phase delay.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{lookup, LinearLossModel};
use crate::sweep_io::{
    write_manifest, write_sweep_segment, BandPlan, LossPoint, MaterialCategory,
    MeasurementManifest, PenetrationLossSeries, Repeat, Scenario, SegmentRef, SweepSegment,
};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub rel_permittivity: f64,
    pub loss_tangent: f64,
    #[serde(rename = "thickness_m")]
    pub thickness: f64,
}

impl Layer {
    pub fn new(rel_permittivity: f64, loss_tangent: f64, thickness: f64) -> Result<Self> {
        let l = Layer {
            rel_permittivity,
            loss_tangent,
            thickness,
        };
        l.validate()?;
        Ok(l)
    }

    pub fn air(thickness: f64) -> Self {
        Layer {
            rel_permittivity: 1.0,
            loss_tangent: 0.0,
            thickness,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_permittivity >= 1.0 && self.rel_permittivity.is_finite()) {
            return Err(Error::InvalidField {
                field: "rel_permittivity",
                msg: format!("{} must be at least 1", self.rel_permittivity),
            });
        }
        if !(self.loss_tangent >= 0.0 && self.loss_tangent.is_finite()) {
            return Err(Error::InvalidField {
                field: "loss_tangent",
                msg: format!("{} must be non-negative", self.loss_tangent),
            });
        }
        if !(self.thickness > 0.0 && self.thickness.is_finite()) {
            return Err(Error::InvalidField {
                field: "thickness_m",
                msg: format!("{} must be positive", self.thickness),
            });
        }
        Ok(())
    }

    pub fn complex_permittivity(&self) -> Complex64 {
        Complex64::new(self.rel_permittivity, -self.rel_permittivity * self.loss_tangent)
    }

    fn matrix(&self, f_hz: f64) -> [[Complex64; 2]; 2] {
        let n = self.complex_permittivity().sqrt();
        let gd = Complex64::i() * (2.0 * PI * f_hz / SPEED_OF_LIGHT) * n * self.thickness;
        let z = n.inv();
        let (ch, sh) = (gd.cosh(), gd.sinh());
        [[ch, z * sh], [sh / z, ch]]
    }
}

/// Fixture material constants. These are convenient defaults, not measured
/// values for any particular specimen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Wood,
    Glass,
    Concrete,
    Foam,
}

impl Preset {
    /// `(ε′, tanδ)`.
    pub fn constants(self) -> (f64, f64) {
        match self {
            Preset::Wood => (2.0, 0.05),
            Preset::Glass => (6.0, 0.02),
            Preset::Concrete => (5.3, 0.15),
            Preset::Foam => (1.1, 0.002),
        }
    }

    pub fn layer(self, thickness: f64) -> Layer {
        let (eps, tan) = self.constants();
        Layer {
            rel_permittivity: eps,
            loss_tangent: tan,
            thickness,
        }
    }
}

/// Layers in propagation order, with air on both sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabStack {
    pub layers: Vec<Layer>,
}

impl SlabStack {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let s = SlabStack { layers };
        s.validate()?;
        Ok(s)
    }

    pub fn single(layer: Layer) -> Self {
        SlabStack {
            layers: vec![layer],
        }
    }

    /// Two panes separated by an air gap.
    pub fn double_glazing(pane: Layer, gap: f64) -> Self {
        SlabStack {
            layers: vec![pane, Layer::air(gap), pane],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidField {
                field: "layers",
                msg: "stack has no layers".into(),
            });
        }
        self.layers.iter().try_for_each(Layer::validate)
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    pub fn reversed(&self) -> Self {
        SlabStack {
            layers: self.layers.iter().rev().copied().collect(),
        }
    }
}

/// Reflection and transmission coefficients of a stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scattering {
    pub r: Complex64,
    /// Raw transmission, including the phase of the path through the stack.
    pub t: Complex64,
}

pub fn scattering(stack: &SlabStack, f_hz: f64) -> Scattering {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut m = [[one, zero], [zero, one]];
    for layer in &stack.layers {
        let l = layer.matrix(f_hz);
        m = [
            [
                m[0][0] * l[0][0] + m[0][1] * l[1][0],
                m[0][0] * l[0][1] + m[0][1] * l[1][1],
            ],
            [
                m[1][0] * l[0][0] + m[1][1] * l[1][0],
                m[1][0] * l[0][1] + m[1][1] * l[1][1],
            ],
        ];
    }
    let [[a, b], [c, d]] = m;
    let den = a + b + c + d;
    Scattering {
        r: (a + b - c - d) / den,
        t: 2.0 / den,
    }
}

/// Insertion transmission coefficient: `t` relative to air of the same
/// total thickness.
pub fn transmission(stack: &SlabStack, f_hz: f64) -> Complex64 {
    let air_phase = 2.0 * PI * f_hz / SPEED_OF_LIGHT * stack.total_thickness();
    scattering(stack, f_hz).t * Complex64::from_polar(1.0, air_phase)
}

/// Material loss `−20·log10|t|` in dB.
pub fn loss_db(stack: &SlabStack, f_hz: f64) -> f64 {
    -20.0 * transmission(stack, f_hz).norm().log10()
}

/// Loss at each plan center.
pub fn loss_spectrum(stack: &SlabStack, plan: &BandPlan) -> PenetrationLossSeries {
    PenetrationLossSeries {
        material_name: "slab".into(),
        points: plan
            .center_frequencies
            .iter()
            .map(|&c| LossPoint {
                center_ghz: c,
                loss_db: loss_db(stack, c * 1e9),
            })
            .collect(),
    }
}

/// What the material does to the NLOS sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthTarget {
    /// Multiply each sample by the stack's insertion transmission.
    Stack(SlabStack),
    /// Attenuate each band by the model loss at its center frequency.
    Model(LinearLossModel),
    /// Same as `Model`, looked up by catalog name.
    Catalog(String),
}

impl SynthTarget {
    fn resolve(&self) -> Result<ResolvedTarget> {
        Ok(match self {
            SynthTarget::Stack(s) => {
                s.validate()?;
                ResolvedTarget::Stack(s.clone())
            }
            SynthTarget::Model(m) => {
                m.validate()?;
                ResolvedTarget::Model(m.clone())
            }
            SynthTarget::Catalog(name) => ResolvedTarget::Model(lookup(name)?),
        })
    }
}

enum ResolvedTarget {
    Stack(SlabStack),
    Model(LinearLossModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraPath {
    pub delay_ns: f64,
    /// Relative to the LOS path.
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialInfo {
    pub name: String,
    pub category: MaterialCategory,
    pub thickness_cm: f64,
    pub width_cm: f64,
    pub height_cm: f64,
}

fn default_los_delay() -> f64 {
    16.0
}

fn default_amplitude() -> f64 {
    1.0
}

fn default_repeats() -> u32 {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub target: SynthTarget,
    /// Defaults to metadata derived from the target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<MaterialInfo>,
    #[serde(default)]
    pub plan: BandPlan,
    #[serde(default = "default_los_delay", rename = "los_delay_ns")]
    pub los_delay: f64,
    #[serde(default = "default_amplitude")]
    pub los_amplitude: f64,
    #[serde(default)]
    pub extra_paths: Vec<ExtraPath>,
    /// Per-sample SNR against the LOS sample power; `None` is noiseless.
    #[serde(default, rename = "snr_db")]
    pub snr: Option<f64>,
    #[serde(default = "default_repeats")]
    pub repeats: u32,
    #[serde(default)]
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(target: SynthTarget) -> Self {
        SynthConfig {
            target,
            material: None,
            plan: BandPlan::default(),
            los_delay: default_los_delay(),
            los_amplitude: default_amplitude(),
            extra_paths: Vec::new(),
            snr: None,
            repeats: default_repeats(),
            seed: 0,
        }
    }

    pub fn from_catalog(name: &str) -> Self {
        Self::new(SynthTarget::Catalog(name.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        let range = 1.0 / self.plan.segment_bandwidth;
        let span = range * self.plan.points_per_segment as f64;
        if !(self.los_delay >= 0.0 && self.los_delay < span) {
            return Err(Error::InvalidSynth(format!(
                "LOS delay {} ns outside [0, {span}) ns",
                self.los_delay
            )));
        }
        if !(self.los_amplitude > 0.0 && self.los_amplitude.is_finite()) {
            return Err(Error::InvalidSynth("LOS amplitude must be positive".into()));
        }
        for p in &self.extra_paths {
            if !(p.delay_ns >= 0.0 && p.delay_ns < span) {
                return Err(Error::InvalidSynth(format!(
                    "extra path delay {} ns outside [0, {span}) ns",
                    p.delay_ns
                )));
            }
            if !(p.amplitude.abs() < 1.0) {
                return Err(Error::InvalidSynth(format!(
                    "extra path amplitude {} must be below 1",
                    p.amplitude
                )));
            }
        }
        if self.repeats < 1 {
            return Err(Error::InvalidSynth("repeats must be at least 1".into()));
        }
        if let Some(snr) = self.snr {
            if !snr.is_finite() {
                return Err(Error::InvalidSynth(format!("SNR {snr} dB is not finite")));
            }
        }
        Ok(())
    }

    fn material(&self, target: &ResolvedTarget) -> MaterialInfo {
        if let Some(m) = &self.material {
            return m.clone();
        }
        match target {
            ResolvedTarget::Stack(s) => MaterialInfo {
                name: "slab".into(),
                category: MaterialCategory::Other,
                thickness_cm: s.total_thickness() * 100.0,
                width_cm: 100.0,
                height_cm: 100.0,
            },
            ResolvedTarget::Model(m) => MaterialInfo {
                name: m.name.clone(),
                category: category_of(&m.name),
                thickness_cm: 1.0,
                width_cm: 100.0,
                height_cm: 100.0,
            },
        }
    }
}

fn category_of(name: &str) -> MaterialCategory {
    let lower = name.to_lowercase();
    if lower.contains("wood") {
        MaterialCategory::Wood
    } else if lower.contains("glass") {
        MaterialCategory::Glass
    } else if lower.contains("foam") {
        MaterialCategory::Foam
    } else if lower.contains("concrete") {
        MaterialCategory::Concrete
    } else {
        MaterialCategory::Other
    }
}

pub fn read_synth_config(path: impl AsRef<Path>) -> Result<SynthConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg: SynthConfig = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Noise-free LOS sweep: direct path plus configured echoes.
fn clean_los(cfg: &SynthConfig, grid: &[f64]) -> Vec<Complex64> {
    grid.iter()
        .map(|&f| {
            let path = |a: f64, tau_ns: f64| Complex64::from_polar(a, -2.0 * PI * f * tau_ns * 1e-9);
            let mut z = path(cfg.los_amplitude, cfg.los_delay);
            for p in &cfg.extra_paths {
                z += path(cfg.los_amplitude * p.amplitude, p.delay_ns);
            }
            z
        })
        .collect()
}

fn segment_file_name(scenario: Scenario, center_ghz: f64, repeat: u32) -> String {
    let tag = match scenario {
        Scenario::Los => "los",
        Scenario::Nlos => "nlos",
    };
    format!("{tag}_{center_ghz:05.2}ghz_r{repeat:02}.csv")
}

/// Independent noise stream per (center, repeat, scenario).
fn noise_rng(seed: u64, center_index: usize, repeats: u32, repeat: u32, scenario: Scenario) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sc = match scenario {
        Scenario::Los => 0,
        Scenario::Nlos => 1,
    };
    rng.set_stream((center_index as u64 * repeats as u64 + repeat as u64) * 2 + sc);
    rng
}

/// Generates LOS/NLOS sweeps for every plan center and repeat, writes them
/// and a manifest (`manifest.json`) into `out_dir`. Output is a pure
/// function of the config.
pub fn synthesize_manifest(cfg: &SynthConfig, out_dir: impl AsRef<Path>) -> Result<MeasurementManifest> {
    cfg.validate()?;
    let target = cfg.target.resolve()?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let plan = &cfg.plan;
    let sigma = cfg
        .snr
        .map(|snr| cfg.los_amplitude * 10f64.powf(-snr / 20.0) / 2f64.sqrt());
    let noise = sigma
        .map(|s| Normal::new(0.0, s).map_err(|e| Error::InvalidSynth(e.to_string())))
        .transpose()?;

    let mut segments = Vec::new();
    for (ci, &center) in plan.center_frequencies.iter().enumerate() {
        let grid = plan.segment_grid_hz(center);
        let los = clean_los(cfg, &grid);
        let nlos: Vec<Complex64> = match &target {
            ResolvedTarget::Stack(stack) => los
                .iter()
                .zip(&grid)
                .map(|(z, &f)| z * transmission(stack, f))
                .collect(),
            ResolvedTarget::Model(m) => {
                let g = 10f64.powf(-m.value_at(center) / 20.0);
                los.iter().map(|z| z * g).collect()
            }
        };

        for repeat in 0..cfg.repeats {
            for (scenario, clean) in [(Scenario::Los, &los), (Scenario::Nlos, &nlos)] {
                let s21 = match &noise {
                    Some(dist) => {
                        let mut rng = noise_rng(cfg.seed, ci, cfg.repeats, repeat, scenario);
                        clean
                            .iter()
                            .map(|z| z + Complex64::new(dist.sample(&mut rng), dist.sample(&mut rng)))
                            .collect()
                    }
                    None => clean.clone(),
                };
                let name = segment_file_name(scenario, center, repeat);
                let seg = SweepSegment {
                    center_frequency: center,
                    frequency_grid: grid.clone(),
                    s21,
                    repeat: Repeat::Index(repeat),
                };
                write_sweep_segment(&seg, out_dir.join(&name))?;
                segments.push(SegmentRef {
                    center_ghz: center,
                    repeat,
                    scenario,
                    path: PathBuf::from(name),
                });
            }
        }
    }

    let material = cfg.material(&target);
    let manifest = MeasurementManifest {
        material_name: material.name,
        material_category: material.category,
        thickness: material.thickness_cm,
        width: material.width_cm,
        height: material.height_cm,
        repeats: cfg.repeats,
        plan: plan.clone(),
        segment_files: segments,
        base_dir: out_dir.to_path_buf(),
    };
    manifest.validate(true)?;
    write_manifest(&manifest, out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

pub const MANIFEST_FILE: &str = "manifest.json";
