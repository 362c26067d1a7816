//! End to end on synthetic data: generate a noisy campaign from a catalog
//! model, then process, fit and report against the TR 38.901 reference.
//!
//!     cargo run --example synthetic_campaign [catalog-name] [reference]

use penloss::cir::{GateConfig, Window};
use penloss::commands;
use penloss::slab::{synthesize_manifest, SynthConfig, MANIFEST_FILE};

fn main() -> penloss::Result<()> {
    let mut args = std::env::args().skip(1);
    let material = args.next().unwrap_or_else(|| "Wooden Board 1".into());
    let reference = args.next().unwrap_or_else(|| "TR 38.901 Wood Model".into());

    let dir = tempfile::tempdir().expect("temp dir");
    let mut cfg = SynthConfig::from_catalog(&material);
    cfg.snr = Some(30.0);
    cfg.seed = 1;
    let manifest = synthesize_manifest(&cfg, dir.path().join("campaign"))?;
    println!(
        "{} segment files for {:?} in {}",
        manifest.segment_files.len(),
        manifest.material_name,
        manifest.base_dir.display()
    );

    let report = commands::report(
        &manifest.base_dir.join(MANIFEST_FILE),
        &reference,
        &GateConfig::default(),
        Window::None,
        &dir.path().join("report"),
    )?;
    for p in &report.series.points {
        println!("{:>5.1} GHz {:>7.3} dB", p.center_ghz, p.loss_db);
    }
    println!("\n{}", report.markdown);
    Ok(())
}
