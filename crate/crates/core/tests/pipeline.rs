use std::f64::consts::PI;

use num_complex::Complex64;
use penloss::cir::{average_repeats, band_loss, process_manifest, GateConfig, Window};
use penloss::fitting::fit_linear;
use penloss::models::lookup;
use penloss::slab::{
    loss_spectrum, synthesize_manifest, ExtraPath, Layer, Preset, SlabStack, SynthConfig,
    SynthTarget,
};
use penloss::sweep_io::{read_manifest, BandPlan, Scenario, SweepSegment};
use tempfile::tempdir;

fn clean_los(plan: &BandPlan, center: f64, delay_ns: f64) -> Vec<Complex64> {
    plan.segment_grid_hz(center)
        .iter()
        .map(|f| Complex64::from_polar(1.0, -2.0 * PI * f * delay_ns * 1e-9))
        .collect()
}

#[test]
fn averaging_ten_repeats_shrinks_noise_by_sqrt_ten() {
    let dir = tempdir().unwrap();
    let mut cfg = SynthConfig::from_catalog("Wooden Board 1");
    cfg.snr = Some(20.0);
    cfg.seed = 11;
    let m = synthesize_manifest(&cfg, dir.path()).unwrap();
    let sigma = 10f64.powf(-20.0 / 20.0);

    let mut single = Vec::new();
    let mut averaged = Vec::new();
    for &c in &m.plan.center_frequencies {
        let clean = clean_los(&m.plan, c, 16.0);
        let segs = m.load_segments(c, Scenario::Los).unwrap();
        let avg = average_repeats(&segs).unwrap();
        single.extend(segs[0].s21.iter().zip(&clean).map(|(z, c)| (z - c).norm_sqr()));
        averaged.extend(avg.s21.iter().zip(&clean).map(|(z, c)| (z - c).norm_sqr()));
    }
    let rms = |v: &[f64]| (v.iter().sum::<f64>() / v.len() as f64).sqrt();
    // 3072 complex samples: the estimate is good to a few percent
    assert!((rms(&single) / sigma - 1.0).abs() < 0.05, "{}", rms(&single));
    assert!(
        (rms(&averaged) / (sigma / 10f64.sqrt()) - 1.0).abs() < 0.05,
        "{}",
        rms(&averaged)
    );
}

#[test]
fn air_slab_gives_zero_loss() {
    let dir = tempdir().unwrap();
    let cfg = SynthConfig::new(SynthTarget::Stack(SlabStack::single(Layer::air(0.02))));
    let m = synthesize_manifest(&cfg, dir.path()).unwrap();
    let s = process_manifest(&m, &GateConfig::default(), Window::None).unwrap();
    assert_eq!(s.len(), 12);
    assert!(s.losses().iter().all(|l| l.abs() < 1e-9), "{:?}", s.losses());
}

#[test]
fn wood_line_at_30_db_snr_stays_close() {
    let dir = tempdir().unwrap();
    let mut cfg = SynthConfig::from_catalog("Wooden Board 1");
    cfg.snr = Some(30.0);
    cfg.seed = 3;
    let m = synthesize_manifest(&cfg, dir.path()).unwrap();
    let s = process_manifest(&m, &GateConfig::default(), Window::None).unwrap();
    let line = lookup("Wooden Board 1").unwrap();
    for p in &s.points {
        assert!((p.loss_db - line.value_at(p.center_ghz)).abs() < 0.3, "{p:?}");
    }
}

#[test]
fn thin_slabs_round_trip_to_oracle_loss() {
    // Slabs whose excess delay is a small fraction of a tap: the first-arrival
    // tap tracks the slab loss at the band center.
    let stacks = [
        SlabStack::single(Preset::Wood.layer(0.010)),
        SlabStack::single(Preset::Wood.layer(0.014)),
        SlabStack::single(Preset::Foam.layer(0.010)),
    ];
    for stack in stacks {
        let dir = tempdir().unwrap();
        let cfg = SynthConfig::new(SynthTarget::Stack(stack.clone()));
        let m = synthesize_manifest(&cfg, dir.path()).unwrap();
        let got = process_manifest(&m, &GateConfig::default(), Window::None).unwrap();
        let want = loss_spectrum(&stack, &m.plan);
        for (g, w) in got.points.iter().zip(&want.points) {
            assert!((g.loss_db - w.loss_db).abs() < 0.05, "{g:?} vs {w:?}");
        }
    }
}

#[test]
fn extra_paths_do_not_move_the_first_arrival() {
    let dir = tempdir().unwrap();
    let mut cfg = SynthConfig::from_catalog("Double-Layer Glass");
    cfg.extra_paths = vec![
        ExtraPath { delay_ns: 31.0, amplitude: 0.5 },
        ExtraPath { delay_ns: 58.0, amplitude: 0.3 },
    ];
    let m = synthesize_manifest(&cfg, dir.path()).unwrap();
    let s = process_manifest(&m, &GateConfig::default(), Window::Hann).unwrap();
    let line = lookup("Double-Layer Glass").unwrap();
    for p in &s.points {
        assert!((p.loss_db - line.value_at(p.center_ghz)).abs() < 1e-9);
    }
}

#[test]
fn repeat_order_does_not_matter() {
    let dir = tempdir().unwrap();
    let mut cfg = SynthConfig::from_catalog("Concrete Slab");
    cfg.snr = Some(25.0);
    cfg.repeats = 4;
    let mut m = synthesize_manifest(&cfg, dir.path()).unwrap();
    let a = process_manifest(&m, &GateConfig::default(), Window::None).unwrap();
    m.segment_files.reverse();
    let b = process_manifest(&m, &GateConfig::default(), Window::None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn failures_carry_the_center_frequency() {
    let dir = tempdir().unwrap();
    let cfg = SynthConfig::from_catalog("Foam Board 1");
    synthesize_manifest(&cfg, dir.path()).unwrap();
    let nlos = dir.path().join("nlos_09.50ghz_r03.csv");
    let text = std::fs::read_to_string(&nlos).unwrap();
    let zeroed: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                format!("{l}\n")
            } else {
                format!("{},0,0\n", l.split(',').next().unwrap())
            }
        })
        .collect();
    // all ten NLOS repeats silent at 9.5 GHz
    for r in 0..10 {
        std::fs::write(dir.path().join(format!("nlos_09.50ghz_r{r:02}.csv")), &zeroed).unwrap();
    }
    let m = read_manifest(dir.path().join("manifest.json")).unwrap();
    let err = process_manifest(&m, &GateConfig::default(), Window::None).unwrap_err();
    let msg = err.to_string();
    assert!(msg.starts_with("at 9.5 GHz"), "{msg}");
    assert!(msg.contains("no detectable arrival"), "{msg}");
}

#[test]
fn scaled_sweep_through_band_loss() {
    let plan = BandPlan::default();
    let los = SweepSegment::on_plan(
        &plan,
        5.5,
        clean_los(&plan, 5.5, 16.0),
        penloss::sweep_io::Repeat::Index(0),
    );
    let g = 10f64.powf(-6.0 / 20.0);
    let nlos = SweepSegment {
        s21: los.s21.iter().map(|z| z * g).collect(),
        ..los.clone()
    };
    let pl = band_loss(&[los], &[nlos], &GateConfig::default(), Window::None).unwrap();
    assert!((pl - 6.0).abs() < 1e-9);
}

#[test]
fn fitting_noisy_wood_over_seeds() {
    // 100 seeded campaigns at 30 dB SNR: the mean recovered line sits on the
    // injected one.
    let line = lookup("Wooden Board 1").unwrap();
    let (mut ks, mut bs) = (0.0, 0.0);
    let trials = 100;
    for seed in 0..trials {
        let dir = tempdir().unwrap();
        let mut cfg = SynthConfig::from_catalog("Wooden Board 1");
        cfg.snr = Some(30.0);
        cfg.seed = seed;
        let m = synthesize_manifest(&cfg, dir.path()).unwrap();
        let s = process_manifest(&m, &GateConfig::default(), Window::None).unwrap();
        let fit = fit_linear(&s).unwrap();
        ks += fit.model.slope_k;
        bs += fit.model.intercept_b;
    }
    let (k, b) = (ks / trials as f64, bs / trials as f64);
    assert!((k - line.slope_k).abs() < 0.02, "{k}");
    assert!((b - line.intercept_b).abs() < 0.2, "{b}");
}
