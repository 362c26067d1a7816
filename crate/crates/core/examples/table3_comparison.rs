//! Compares every fitted catalog model with its TR 38.901 counterpart on the
//! twelve measurement centers.
//!
//!     cargo run --example table3_comparison

use penloss::models::{catalog, compare, difference_at, lookup, ModelSource};

fn main() -> penloss::Result<()> {
    let reference_for = |name: &str| -> Option<&'static str> {
        let n = name.to_lowercase();
        if n.contains("wood") {
            Some("TR 38.901 Wood Model")
        } else if n.contains("glass") {
            Some("TR 38.901 Glass Model")
        } else if n.contains("concrete") {
            Some("TR 38.901 Concrete Model")
        } else {
            None
        }
    };

    println!("{:<22} {:>6} {:>6}  {:>9}  {:>18}", "model", "k", "b", "RMSE dB", "diff range dB");
    for model in catalog().into_iter().filter(|m| m.source == ModelSource::Fitted) {
        let Some(reference) = reference_for(&model.name) else {
            println!("{:<22} {:>6.2} {:>6.2}  {:>9}", model.name, model.slope_k, model.intercept_b, "-");
            continue;
        };
        let cmp = compare(&model, &lookup(reference)?, None)?;
        println!(
            "{:<22} {:>6.2} {:>6.2}  {:>9.2}  [{:>7.2}, {:>6.2}]",
            model.name,
            model.slope_k,
            model.intercept_b,
            cmp.rmse,
            cmp.min_difference(),
            cmp.max_difference()
        );
    }

    let fitted = lookup("Concrete Slab")?;
    let standard = lookup("TR 38.901 Concrete Model")?;
    println!(
        "\nconcrete at 15.5 GHz: standard exceeds fitted by {:.2} dB",
        difference_at(&fitted, &standard, 15.5)
    );
    Ok(())
}
