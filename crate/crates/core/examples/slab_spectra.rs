//! Transfer-matrix loss spectra: double glazing oscillates with frequency,
//! a lossy board grows with frequency, foam stays near zero.
//!
//!     cargo run --example slab_spectra

use penloss::slab::{loss_spectrum, Preset, SlabStack};
use penloss::BandPlan;

fn main() -> penloss::Result<()> {
    let plan = BandPlan::uniform(4.0, 0.5, 16.0, 1.0, 256)?;
    let stacks = [
        ("double glazing 4/10/4 mm", SlabStack::double_glazing(Preset::Glass.layer(0.004), 0.010)),
        ("wood 1.0 cm", SlabStack::single(Preset::Wood.layer(0.010))),
        ("wood 1.4 cm", SlabStack::single(Preset::Wood.layer(0.014))),
        ("concrete 4 cm", SlabStack::single(Preset::Concrete.layer(0.04))),
        ("foam 1.0 cm", SlabStack::single(Preset::Foam.layer(0.010))),
    ];

    print!("{:>6}", "GHz");
    for (name, _) in &stacks {
        print!(" {:>26}", name);
    }
    println!();
    let spectra: Vec<_> = stacks.iter().map(|(_, s)| loss_spectrum(s, &plan)).collect();
    for (i, f) in plan.center_frequencies.iter().enumerate() {
        print!("{f:>6.1}");
        for s in &spectra {
            print!(" {:>26.2}", s.points[i].loss_db);
        }
        println!();
    }
    Ok(())
}
