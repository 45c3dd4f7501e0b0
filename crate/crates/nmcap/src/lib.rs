//! File formats, the end-to-end link runner and parameter sweeps for the
//! `nmcap-core` modem. The `nmcap` binary is a thin front end over this
//! library.

pub mod formats;
pub mod run;
mod seed;
pub mod sweep;

pub use run::{
    build_channel, run_detailed, run_single, run_with, ChannelSpec, ReceiverOptions, RunArtifacts,
};
pub use seed::derive_seed;
pub use sweep::{run_sweep, SweepPlan};
