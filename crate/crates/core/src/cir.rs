//! Frequency sweep → channel impulse response → first arrival → penetration
//! loss.
//!
//! The impulse response is the normalized inverse DFT of the (optionally
//! windowed) S21 samples,
//!
//! ```text
//! h[m] = 1/N · Σ_k w_k · D_k · exp(+j2π·k·m/N)
//! ```
//!
//! so a flat unit spectrum gives a unit tap at zero delay. Tap `m` sits at
//! delay `m / (N·Δf)`, i.e. 1 ns steps for a 1 GHz band.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sweep_io::{
    LossPoint, MeasurementManifest, PenetrationLossSeries, Repeat, Scenario, SweepSegment,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    /// Rectangular.
    #[default]
    None,
    /// Periodic Hann.
    Hann,
}

impl Window {
    /// Window weights scaled to unit mean, so an on-bin path keeps its peak
    /// tap level whatever the window.
    pub fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::None => vec![1.0; n],
            Window::Hann => {
                let raw: Vec<f64> = (0..n)
                    .map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / n as f64).cos()))
                    .collect();
                let mean = raw.iter().sum::<f64>() / n as f64;
                raw.into_iter().map(|w| w / mean).collect()
            }
        }
    }
}

impl std::str::FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "rect" | "rectangular" => Ok(Window::None),
            "hann" | "hanning" => Ok(Window::Hann),
            other => Err(format!("unknown window {other:?} (expected none or hann)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelImpulseResponse {
    /// ns, uniform from 0.
    pub delay_grid: Vec<f64>,
    pub taps: Vec<Complex64>,
    /// ns.
    pub delay_resolution: f64,
    /// ns.
    pub unambiguous_range: f64,
}

impl ChannelImpulseResponse {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Tap powers in dB (`20·log10|h|`).
    pub fn power_db(&self) -> Vec<f64> {
        self.taps.iter().map(|t| amplitude_db(t.norm())).collect()
    }

    /// Forward DFT of the taps: recovers the windowed spectrum fed to
    /// [`to_cir`].
    pub fn to_spectrum(&self) -> Vec<Complex64> {
        let mut buf = self.taps.clone();
        FftPlanner::new()
            .plan_fft_forward(buf.len())
            .process(&mut buf);
        buf
    }
}

pub(crate) fn amplitude_db(mag: f64) -> f64 {
    20.0 * mag.log10()
}

/// Coherent (complex) mean of repeated sweeps of the same band.
///
/// Segments are summed in repeat-index order so the result does not depend
/// on the order they were listed in.
pub fn average_repeats(segments: &[SweepSegment]) -> Result<SweepSegment> {
    let first = segments.first().ok_or(Error::NoSegments)?;
    for s in &segments[1..] {
        if s.center_frequency != first.center_frequency {
            return Err(Error::MismatchedSegments(format!(
                "centers {} and {} GHz",
                first.center_frequency, s.center_frequency
            )));
        }
        if s.frequency_grid.len() != first.frequency_grid.len()
            || s.s21.len() != first.s21.len()
        {
            return Err(Error::MismatchedSegments(format!(
                "{} and {} points",
                first.s21.len(),
                s.s21.len()
            )));
        }
        let step = first.step_hz().abs().max(f64::MIN_POSITIVE);
        if s
            .frequency_grid
            .iter()
            .zip(&first.frequency_grid)
            .any(|(a, b)| (a - b).abs() > 1e-6 * step)
        {
            return Err(Error::MismatchedSegments("frequency grids differ".into()));
        }
    }

    let mut ordered: Vec<&SweepSegment> = segments.iter().collect();
    ordered.sort_by_key(|s| match s.repeat {
        Repeat::Index(i) => (0, i),
        Repeat::Aggregate => (1, 0),
    });

    let n = segments.len() as f64;
    let mut sum = vec![Complex64::new(0.0, 0.0); first.s21.len()];
    for s in ordered {
        for (acc, z) in sum.iter_mut().zip(&s.s21) {
            *acc += z;
        }
    }
    Ok(SweepSegment {
        center_frequency: first.center_frequency,
        frequency_grid: first.frequency_grid.clone(),
        s21: sum.into_iter().map(|z| z / n).collect(),
        repeat: Repeat::Aggregate,
    })
}

/// Normalized inverse DFT of the segment, see the module docs.
pub fn to_cir(segment: &SweepSegment, window: Window) -> ChannelImpulseResponse {
    let n = segment.s21.len();
    let weights = window.weights(n);
    let mut buf: Vec<Complex64> = segment
        .s21
        .iter()
        .zip(&weights)
        .map(|(z, w)| z * *w)
        .collect();
    if n > 0 {
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    }
    let scale = 1.0 / n.max(1) as f64;
    buf.iter_mut().for_each(|z| *z *= scale);

    let step_hz = segment.step_hz();
    let resolution = if step_hz > 0.0 {
        1e9 / (n as f64 * step_hz)
    } else {
        0.0
    };
    ChannelImpulseResponse {
        delay_grid: (0..n).map(|m| m as f64 * resolution).collect(),
        taps: buf,
        delay_resolution: resolution,
        unambiguous_range: n as f64 * resolution,
    }
}

/// Detection rule for the first arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateConfig {
    /// dB above the noise floor a tap must exceed.
    pub threshold_above_noise: f64,
    /// Fraction of the latest-delay taps averaged for the noise floor.
    pub noise_estimation_fraction: f64,
    /// Inclusive delay window (ns) searched for the arrival.
    pub search_window: (f64, f64),
    /// The noise floor is never taken lower than this many dB below the
    /// strongest tap, which keeps round-off residue in noiseless data from
    /// being detected.
    pub dynamic_range: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            threshold_above_noise: 12.0,
            noise_estimation_fraction: 0.25,
            search_window: (5.0, 100.0),
            dynamic_range: 120.0,
        }
    }
}

impl GateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_above_noise > 0.0) {
            return Err(Error::InvalidGate(format!(
                "threshold {} dB must be positive",
                self.threshold_above_noise
            )));
        }
        if !(self.noise_estimation_fraction > 0.0 && self.noise_estimation_fraction < 0.5) {
            return Err(Error::InvalidGate(format!(
                "noise fraction {} must lie in (0, 0.5)",
                self.noise_estimation_fraction
            )));
        }
        let (lo, hi) = self.search_window;
        if !(lo >= 0.0 && lo < hi) {
            return Err(Error::InvalidGate(format!(
                "search window [{lo}, {hi}] ns is empty or negative"
            )));
        }
        if !(self.dynamic_range > self.threshold_above_noise) {
            return Err(Error::InvalidGate(format!(
                "dynamic range {} dB must exceed the threshold",
                self.dynamic_range
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstArrival {
    /// ns.
    pub delay: f64,
    /// `20·log10|h|`.
    pub power_db: f64,
    pub tap_index: usize,
    /// Noise floor the detection was made against, dB.
    pub noise_floor_db: f64,
}

/// Noise floor in dB: mean tap power over the latest-delay fraction of the
/// response.
pub fn noise_floor_db(cir: &ChannelImpulseResponse, fraction: f64) -> f64 {
    let n = cir.taps.len();
    let count = ((n as f64 * fraction).ceil() as usize).clamp(1, n);
    let mean = cir.taps[n - count..].iter().map(|t| t.norm_sqr()).sum::<f64>() / count as f64;
    10.0 * mean.log10()
}

/// Smallest-delay tap inside the search window that exceeds the noise floor
/// by the threshold and is a local maximum of the magnitude.
///
/// The local-maximum condition rejects the leakage skirt in front of a path,
/// whose taps all exceed the floor but decrease monotonically away from it.
pub fn first_arrival(cir: &ChannelImpulseResponse, gate: &GateConfig) -> Result<FirstArrival> {
    gate.validate()?;
    if cir.is_empty() {
        return Err(Error::NoDetectableArrival {
            noise_floor_db: f64::NEG_INFINITY,
        });
    }
    if gate.search_window.1 > cir.unambiguous_range + 1e-9 {
        return Err(Error::InvalidGate(format!(
            "search window ends at {} ns beyond the {} ns unambiguous range",
            gate.search_window.1, cir.unambiguous_range
        )));
    }

    let mags: Vec<f64> = cir.taps.iter().map(|t| t.norm()).collect();
    let peak_db = amplitude_db(mags.iter().copied().fold(0.0, f64::max));
    let floor = noise_floor_db(cir, gate.noise_estimation_fraction).max(peak_db - gate.dynamic_range);
    let level = floor + gate.threshold_above_noise;

    let (lo, hi) = gate.search_window;
    let n = mags.len();
    let found = (0..n)
        .filter(|&m| cir.delay_grid[m] >= lo - 1e-9 && cir.delay_grid[m] <= hi + 1e-9)
        .find(|&m| {
            let local_max =
                (m == 0 || mags[m] >= mags[m - 1]) && (m + 1 == n || mags[m] >= mags[m + 1]);
            local_max && amplitude_db(mags[m]) > level
        });

    match found {
        Some(m) => Ok(FirstArrival {
            delay: cir.delay_grid[m],
            power_db: amplitude_db(mags[m]),
            tap_index: m,
            noise_floor_db: floor,
        }),
        None => Err(Error::NoDetectableArrival {
            noise_floor_db: floor,
        }),
    }
}

/// `S_LOS − S_NLOS` in dB.
pub fn penetration_loss(los: &FirstArrival, nlos: &FirstArrival) -> f64 {
    los.power_db - nlos.power_db
}

/// Penetration loss for one band from its LOS and NLOS repeats.
pub fn band_loss(
    los: &[SweepSegment],
    nlos: &[SweepSegment],
    gate: &GateConfig,
    window: Window,
) -> Result<f64> {
    let los = first_arrival(&to_cir(&average_repeats(los)?, window), gate)?;
    let nlos = first_arrival(&to_cir(&average_repeats(nlos)?, window), gate)?;
    Ok(penetration_loss(&los, &nlos))
}

/// Runs the full pipeline for every plan center, in plan order.
pub fn process_manifest(
    manifest: &MeasurementManifest,
    gate: &GateConfig,
    window: Window,
) -> Result<PenetrationLossSeries> {
    gate.validate()?;
    let points = manifest
        .plan
        .center_frequencies
        .iter()
        .map(|&c| {
            let loss = (|| {
                let los = manifest.load_segments(c, Scenario::Los)?;
                let nlos = manifest.load_segments(c, Scenario::Nlos)?;
                band_loss(&los, &nlos, gate, window)
            })()
            .map_err(|e| e.at_center(c))?;
            Ok(LossPoint {
                center_ghz: c,
                loss_db: loss,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PenetrationLossSeries::new(manifest.material_name.clone(), points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep_io::BandPlan;
    use proptest::prelude::*;

    /// Direct O(N²) inverse DFT, independent of the FFT path.
    fn idft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|m| {
                x.iter()
                    .enumerate()
                    .map(|(k, z)| z * Complex64::from_polar(1.0, 2.0 * PI * (k * m) as f64 / n as f64))
                    .sum::<Complex64>()
                    / n as f64
            })
            .collect()
    }

    fn path_spectrum(plan: &BandPlan, center: f64, paths: &[(f64, f64)]) -> SweepSegment {
        let grid = plan.segment_grid_hz(center);
        let s21 = grid
            .iter()
            .map(|&f| {
                paths
                    .iter()
                    .map(|&(a, tau_ns)| Complex64::from_polar(a, -2.0 * PI * f * tau_ns * 1e-9))
                    .sum()
            })
            .collect();
        SweepSegment {
            center_frequency: center,
            frequency_grid: grid,
            s21,
            repeat: Repeat::Index(0),
        }
    }

    fn sparse_cir(taps: &[(usize, f64)]) -> ChannelImpulseResponse {
        let mut t = vec![Complex64::new(0.0, 0.0); 256];
        for &(i, db) in taps {
            t[i] = Complex64::new(10f64.powf(db / 20.0), 0.0);
        }
        ChannelImpulseResponse {
            delay_grid: (0..256).map(|m| m as f64).collect(),
            taps: t,
            delay_resolution: 1.0,
            unambiguous_range: 256.0,
        }
    }

    #[test]
    fn flat_spectrum_gives_unit_tap_at_zero() {
        let plan = BandPlan::default();
        let seg = SweepSegment::on_plan(&plan, 4.5, vec![Complex64::new(1.0, 0.0); 256], Repeat::Index(0));
        let cir = to_cir(&seg, Window::None);
        assert_eq!(cir.len(), 256);
        assert!((cir.taps[0].norm() - 1.0).abs() < 1e-12);
        assert!(cir.taps[1..].iter().all(|t| t.norm() <= 1e-12));
        assert!((cir.delay_resolution - 1.0).abs() < 1e-12);
        assert!((cir.unambiguous_range - 256.0).abs() < 1e-9);
    }

    #[test]
    fn on_bin_delay_lands_on_its_tap() {
        let plan = BandPlan::default();
        let cir = to_cir(&path_spectrum(&plan, 9.5, &[(1.0, 17.0)]), Window::None);
        let peak = (0..256).max_by(|&a, &b| cir.taps[a].norm().total_cmp(&cir.taps[b].norm())).unwrap();
        assert_eq!(peak, 17);
        assert!((cir.taps[17].norm() - 1.0).abs() < 1e-12);
        assert!((cir.delay_grid[17] - 17.0).abs() < 1e-9);
    }

    #[test]
    fn two_path_matches_direct_idft() {
        let plan = BandPlan::default();
        let seg = path_spectrum(&plan, 12.5, &[(1.0, 16.0), (0.3, 40.0)]);
        let oracle = idft(&seg.s21);
        let cir = to_cir(&seg, Window::None);
        for (a, b) in cir.taps.iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((oracle[16].norm() - 1.0).abs() < 1e-12);
        assert!((oracle[40].norm() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn hann_keeps_on_bin_peak_level() {
        let plan = BandPlan::default();
        let seg = path_spectrum(&plan, 6.5, &[(0.5, 30.0)]);
        let rect = to_cir(&seg, Window::None).taps[30].norm();
        let hann = to_cir(&seg, Window::Hann).taps[30].norm();
        assert!((amplitude_db(rect) - amplitude_db(hann)).abs() < 0.1);
    }

    #[test]
    fn spectrum_round_trip() {
        let plan = BandPlan::default();
        let seg = path_spectrum(&plan, 7.5, &[(1.0, 16.2), (0.2, 33.7)]);
        for window in [Window::None, Window::Hann] {
            let w = window.weights(256);
            let back = to_cir(&seg, window).to_spectrum();
            let num: f64 = back.iter().zip(&seg.s21).zip(&w).map(|((b, z), w)| (b - z * w).norm_sqr()).sum();
            let den: f64 = seg.s21.iter().zip(&w).map(|(z, w)| (z * w).norm_sqr()).sum();
            assert!((num / den).sqrt() < 1e-10);
        }
    }

    #[test]
    fn average_examples() {
        let plan = BandPlan::default();
        let seg = path_spectrum(&plan, 4.5, &[(1.0, 16.0)]);
        let ten: Vec<_> = (0..10).map(|i| SweepSegment { repeat: Repeat::Index(i), ..seg.clone() }).collect();
        let avg = average_repeats(&ten).unwrap();
        assert_eq!(avg.repeat, Repeat::Aggregate);
        for (a, b) in avg.s21.iter().zip(&seg.s21) {
            assert!((a - b).norm() < 1e-15);
        }
        let neg = SweepSegment { s21: seg.s21.iter().map(|z| -z).collect(), ..seg.clone() };
        let zero = average_repeats(&[seg.clone(), neg]).unwrap();
        assert!(zero.s21.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn average_errors() {
        assert!(matches!(average_repeats(&[]), Err(Error::NoSegments)));
        let plan = BandPlan::default();
        let a = path_spectrum(&plan, 4.5, &[(1.0, 16.0)]);
        let b = path_spectrum(&plan, 5.5, &[(1.0, 16.0)]);
        assert!(matches!(average_repeats(&[a.clone(), b]), Err(Error::MismatchedSegments(_))));
        let mut c = a.clone();
        c.frequency_grid[3] += 1e6;
        assert!(matches!(average_repeats(&[a, c]), Err(Error::MismatchedSegments(_))));
    }

    #[test]
    fn lone_peak_detected() {
        let gate = GateConfig { threshold_above_noise: 6.0, ..GateConfig::default() };
        let fa = first_arrival(&sparse_cir(&[(16, 0.0)]), &gate).unwrap();
        assert_eq!(fa.tap_index, 16);
        assert_eq!(fa.delay, 16.0);
        assert!(fa.power_db.abs() < 1e-12);
    }

    #[test]
    fn earliest_tap_above_gate_wins() {
        let mut cir = sparse_cir(&[(16, 0.0), (12, -50.0)]);
        // -80 dB noise floor in the late taps
        for t in &mut cir.taps[192..] {
            *t = Complex64::new(1e-4, 0.0);
        }
        let gate = GateConfig { threshold_above_noise: 6.0, ..GateConfig::default() };
        let fa = first_arrival(&cir, &gate).unwrap();
        assert!((fa.noise_floor_db + 80.0).abs() < 1e-9);
        assert_eq!(fa.delay, 12.0);
        assert!((fa.power_db + 50.0).abs() < 1e-9);
    }

    #[test]
    fn nothing_above_gate_is_an_error() {
        let mut cir = sparse_cir(&[]);
        for t in &mut cir.taps {
            *t = Complex64::new(1e-3, 0.0);
        }
        match first_arrival(&cir, &GateConfig::default()) {
            Err(Error::NoDetectableArrival { noise_floor_db }) => {
                assert!((noise_floor_db + 60.0).abs() < 1e-9)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gate_validation() {
        let cir = sparse_cir(&[(16, 0.0)]);
        for bad in [
            GateConfig { threshold_above_noise: 0.0, ..GateConfig::default() },
            GateConfig { noise_estimation_fraction: 0.5, ..GateConfig::default() },
            GateConfig { search_window: (50.0, 10.0), ..GateConfig::default() },
            GateConfig { search_window: (5.0, 300.0), ..GateConfig::default() },
        ] {
            assert!(matches!(first_arrival(&cir, &bad), Err(Error::InvalidGate(_))));
        }
    }

    #[test]
    fn off_bin_leakage_skirt_is_not_detected() {
        let plan = BandPlan::default();
        let seg = path_spectrum(&plan, 10.5, &[(1.0, 16.4)]);
        let fa = first_arrival(&to_cir(&seg, Window::None), &GateConfig::default()).unwrap();
        assert_eq!(fa.tap_index, 16);
    }

    #[test]
    fn scaled_nlos_gives_six_db() {
        let plan = BandPlan::default();
        let los = path_spectrum(&plan, 8.5, &[(1.0, 16.0), (0.2, 60.0)]);
        let g = 10f64.powf(-6.0 / 20.0);
        let nlos = SweepSegment { s21: los.s21.iter().map(|z| z * g).collect(), ..los.clone() };
        let gate = GateConfig::default();
        let pl = band_loss(std::slice::from_ref(&los), &[nlos], &gate, Window::None).unwrap();
        assert!((pl - 6.0).abs() < 1e-9);
        let same = band_loss(std::slice::from_ref(&los), std::slice::from_ref(&los), &gate, Window::None).unwrap();
        assert_eq!(same, 0.0);
    }

    proptest! {
        #[test]
        fn delay_shift_equivariance(base in 8usize..40, shift in 1usize..40) {
            let plan = BandPlan::default();
            let gate = GateConfig::default();
            let a = path_spectrum(&plan, 11.5, &[(1.0, base as f64), (0.4, base as f64 + 20.0)]);
            let b = SweepSegment {
                s21: a.s21.iter().zip(&a.frequency_grid)
                    .map(|(z, f)| z * Complex64::from_polar(1.0, -2.0 * PI * f * shift as f64 * 1e-9))
                    .collect(),
                ..a.clone()
            };
            let fa = first_arrival(&to_cir(&a, Window::None), &gate).unwrap();
            let fb = first_arrival(&to_cir(&b, Window::None), &gate).unwrap();
            prop_assert_eq!(fb.tap_index, fa.tap_index + shift);
        }

        #[test]
        fn scale_equivariance_and_antisymmetry(g in 0.01..1.0f64) {
            let plan = BandPlan::default();
            let gate = GateConfig::default();
            let los = path_spectrum(&plan, 13.5, &[(1.0, 16.0)]);
            let nlos = SweepSegment { s21: los.s21.iter().map(|z| z * g).collect(), ..los.clone() };
            let fl = first_arrival(&to_cir(&los, Window::None), &gate).unwrap();
            let fn_ = first_arrival(&to_cir(&nlos, Window::None), &gate).unwrap();
            let pl = penetration_loss(&fl, &fn_);
            prop_assert!((pl + 20.0 * g.log10()).abs() < 1e-9);
            prop_assert_eq!(penetration_loss(&fn_, &fl), -pl);
        }
    }
}
