//! Material penetration-loss analysis for frequency-domain channel sounding.
//!
//! The pipeline takes LOS and NLOS S21 sweeps (one per 1 GHz band), turns
//! each into an impulse response, picks the first arrival, and reports the
//! level difference as penetration loss. Loss series are fitted with
//! `PL = k·f + b` and compared with the TR 38.901 material models. A
//! transfer-matrix slab model generates synthetic campaigns with known
//! ground truth.
//!
//! ```
//! use penloss::models::{compare, lookup};
//!
//! let fitted = lookup("Concrete Slab").unwrap();
//! let standard = lookup("TR 38.901 Concrete Model").unwrap();
//! let cmp = compare(&fitted, &standard, None).unwrap();
//! assert!((cmp.rmse - 27.75).abs() < 0.01);
//! ```

pub mod cir;
pub mod commands;
pub mod error;
pub mod fitting;
pub mod models;
pub mod slab;
pub mod sweep_io;

pub use cir::{
    average_repeats, first_arrival, penetration_loss, process_manifest, to_cir,
    ChannelImpulseResponse, FirstArrival, GateConfig, Window,
};
pub use error::{Error, Result};
pub use fitting::{fit_linear, fit_report, FitResult};
pub use models::{catalog, compare, difference_at, lookup, LinearLossModel, ModelComparison, ModelSource};
pub use slab::{loss_spectrum, synthesize_manifest, transmission, Layer, SlabStack, SynthConfig};
pub use sweep_io::{
    read_manifest, read_sweep_segment, write_loss_series, BandPlan, MeasurementManifest,
    PenetrationLossSeries, SweepSegment,
};
