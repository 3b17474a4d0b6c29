//! File formats, experiment sweeps, SVG charts and bound reports on top of
//! `interactionkit-core`.

pub mod bounds;
pub mod formats;
pub mod source;
pub mod svg;
pub mod sweep;

pub use source::GameSource;
pub use sweep::{run_sweep, Method, SweepConfig, SweepRecord};
