//! Multi-band carrier-less amplitude and phase modulation (m-CAP) and its
//! non-orthogonal, bandwidth-compressed variant (NM-CAP).
//!
//! The crate is `no_std` with `alloc`. Everything here is a pure function of
//! its inputs: configuration and derived quantities ([`config`]), the SRRC
//! Hilbert-pair filter banks ([`filters`]), the transmit and receive chains
//! ([`txrx`]), the LED link model ([`channel`]) and error/quality metrics
//! ([`metrics`]). File formats, the simulation runner and the CLI live in the
//! companion `nmcap` crate.
//!
//! The `std` feature (on by default) adds the averaged-periodogram spectrum
//! estimate, which needs an FFT.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod channel;
pub mod config;
mod error;
pub mod filters;
pub mod metrics;
pub mod txrx;

pub use channel::{apply_channel, resample, ChannelModel, LedResponse, NoiseSpec};
pub use config::{
    carrier_frequency, relative_gain, samples_per_symbol, sampling_frequency, spectral_efficiency,
    ConfigBuilder, ModemConfig,
};
pub use error::{Error, Result};
pub use filters::{
    build_rx_bank, build_tx_bank, ici_matrix, srrc_prototype, FilterBank, FilterPair, IciMatrix,
    ImpulseResponse,
};
pub use metrics::{ber, evm, fec_verdict, FecVerdict, RunReport, SubcarrierResult};
pub use txrx::{
    demodulate, modulate, prbs, qam_demap, qam_map, BitStream, Constellation, Prbs15, SymbolFrame,
    Waveform,
};

/// Complex sample type used for constellation symbols.
pub type Complex = num_complex::Complex64;
