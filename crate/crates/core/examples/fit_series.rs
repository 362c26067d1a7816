//! Fits `PL = k·f + b` to a loss-series CSV (or a built-in example series)
//! and prints residuals.
//!
//!     cargo run --example fit_series [series.csv]

use penloss::fitting::{fit_linear, fit_report};
use penloss::models::lookup;
use penloss::sweep_io::{read_loss_series, PenetrationLossSeries};

fn main() -> penloss::Result<()> {
    let series = match std::env::args().nth(1) {
        Some(path) => read_loss_series(path)?,
        // a wavy glass-like series: linear fits leave structured residuals
        None => PenetrationLossSeries::from_pairs(
            "glass-like",
            [3.1, 1.9, 1.2, 2.4, 4.0, 5.6, 6.9, 7.6, 7.8, 6.0, 4.3, 3.5]
                .iter()
                .enumerate()
                .map(|(i, &pl)| (4.5 + i as f64, pl)),
        )?,
    };

    let fit = fit_linear(&series)?;
    let (k, b) = fit.model.rounded();
    println!("{}: k={k:.2} dB/GHz b={b:.2} dB", series.material_name);
    match fit.r_squared {
        Some(r2) => println!("residual RMS {:.3} dB, R² {r2:.3}", fit.residual_rms),
        None => println!("residual RMS {:.3} dB, constant data", fit.residual_rms),
    }
    for (p, r) in series.points.iter().zip(&fit.residuals) {
        println!("  {:>5.1} GHz {:>+7.3} dB", p.center_ghz, r);
    }

    let glass = lookup("TR 38.901 Glass Model")?;
    let cmp = fit_report(&fit, &glass)?;
    println!("vs {}: RMSE {:.2} dB", glass.name, cmp.rmse);
    Ok(())
}
