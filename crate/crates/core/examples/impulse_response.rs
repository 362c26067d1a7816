//! Builds a two-path sweep, transforms it to an impulse response and picks
//! the first arrival, with and without a Hann window.
//!
//!     cargo run --example impulse_response

use std::f64::consts::PI;

use num_complex::Complex64;
use penloss::cir::{first_arrival, to_cir, GateConfig, Window};
use penloss::sweep_io::{BandPlan, Repeat, SweepSegment};

fn main() -> penloss::Result<()> {
    let plan = BandPlan::default();
    let center = 9.5;
    // direct path at 16.3 ns (off-bin), a reflection at 40 ns
    let paths = [(1.0, 16.3), (0.3, 40.0)];
    let s21 = plan
        .segment_grid_hz(center)
        .iter()
        .map(|&f| {
            paths
                .iter()
                .map(|&(a, tau)| Complex64::from_polar(a, -2.0 * PI * f * tau * 1e-9))
                .sum()
        })
        .collect();
    let seg = SweepSegment::on_plan(&plan, center, s21, Repeat::Index(0));

    for window in [Window::None, Window::Hann] {
        let cir = to_cir(&seg, window);
        let fa = first_arrival(&cir, &GateConfig::default())?;
        println!(
            "{window:?}: resolution {} ns, range {} ns, first arrival {} ns at {:.2} dB (floor {:.1} dB)",
            cir.delay_resolution, cir.unambiguous_range, fa.delay, fa.power_db, fa.noise_floor_db
        );
        let power = cir.power_db();
        for (delay, p) in cir.delay_grid.iter().zip(&power).skip(12).take(9) {
            println!("  {delay:>5.1} ns {p:>8.2} dB");
        }
    }
    Ok(())
}
