use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nmcap_core::channel::{
    DEFAULT_CHANNEL_TAPS, DEFAULT_EQUALIZER_TAPS, LED_CUT_OFF_HZ, LED_CUT_ON_HZ,
};
use nmcap_core::metrics::bit_errors;
use nmcap_core::txrx::generate_payload;
use nmcap_core::{
    build_rx_bank, build_tx_bank, demodulate, evm, modulate, qam_demap, resample, ChannelModel,
    ModemConfig, NoiseSpec, RunReport, SubcarrierResult, SymbolFrame, Waveform,
};

use crate::formats::{measured_response_from_csv, FormatError};
use crate::seed::{derive_seed, NOISE_STREAM};

/// Channel selection as given on the command line: `ideal`, `led` or
/// `csv:<path>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChannelSpec {
    Ideal,
    Led,
    Csv(PathBuf),
}

impl FromStr for ChannelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ideal" => Ok(Self::Ideal),
            "led" => Ok(Self::Led),
            _ => match s.strip_prefix("csv:") {
                Some(path) if !path.is_empty() => Ok(Self::Csv(PathBuf::from(path))),
                _ => Err(format!(
                    "unknown channel `{s}` (expected ideal, led or csv:<path>)"
                )),
            },
        }
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ideal => f.write_str("ideal"),
            Self::Led => f.write_str("led"),
            Self::Csv(p) => write!(f, "csv:{}", p.display()),
        }
    }
}

/// Builds the channel for `config`. The channel runs at `rate_hz` when given,
/// otherwise at the modem sampling rate. A finite `snr_db` adds white noise
/// whose power is referenced to the occupied signal band; its generator is
/// seeded from the configuration seed.
pub fn build_channel(
    spec: &ChannelSpec,
    config: &ModemConfig,
    snr_db: Option<f64>,
    rate_hz: Option<f64>,
) -> Result<ChannelModel, FormatError> {
    let fs = rate_hz.unwrap_or_else(|| config.sampling_frequency());
    let model = match spec {
        ChannelSpec::Ideal => ChannelModel::ideal(fs)?,
        ChannelSpec::Led => {
            ChannelModel::parametric_led(LED_CUT_ON_HZ, LED_CUT_OFF_HZ, fs, DEFAULT_CHANNEL_TAPS)?
        }
        ChannelSpec::Csv(path) => measured_response_from_csv(path, fs, DEFAULT_CHANNEL_TAPS)?,
    };
    match snr_db {
        Some(snr) if snr.is_finite() => Ok(model.with_noise(NoiseSpec {
            snr_db: snr,
            seed: derive_seed(config.seed(), NOISE_STREAM),
            band_hz: Some(config.occupied_band()),
        })?),
        _ => Ok(model),
    }
}

/// Everything a run produces, for callers that dump intermediate artifacts.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report: RunReport,
    /// Transmitted waveform at the modem sampling rate.
    pub transmitted: Waveform,
    /// Received symbols before the decision.
    pub received: SymbolFrame,
}

/// Receiver settings beyond the matched filter bank.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct ReceiverOptions {
    /// Known-channel zero-forcing equalization with this gain cap in dB,
    /// applied to the received signal at the channel rate. Off when `None`.
    pub equalizer_max_gain_db: Option<f64>,
}

/// One end-to-end transmission of `bits_per_subcarrier` bits on every
/// subcarrier with the plain matched-filter receiver. `bits_per_subcarrier`
/// must be a multiple of log2 M.
pub fn run_single(
    config: &ModemConfig,
    channel: &ChannelModel,
    bits_per_subcarrier: usize,
) -> Result<RunReport, FormatError> {
    run_with(
        config,
        channel,
        bits_per_subcarrier,
        &ReceiverOptions::default(),
    )
}

pub fn run_with(
    config: &ModemConfig,
    channel: &ChannelModel,
    bits_per_subcarrier: usize,
    receiver: &ReceiverOptions,
) -> Result<RunReport, FormatError> {
    Ok(run_detailed(config, channel, bits_per_subcarrier, receiver)?.report)
}

pub fn run_detailed(
    config: &ModemConfig,
    channel: &ChannelModel,
    bits_per_subcarrier: usize,
    receiver: &ReceiverOptions,
) -> Result<RunArtifacts, FormatError> {
    let payload = generate_payload(config, bits_per_subcarrier)?;
    let tx = build_tx_bank(config)?;
    let transmitted = modulate(&payload.frame, &tx)?;
    let fs = transmitted.sample_rate_hz();

    let through_channel = |w: &Waveform| -> Result<Waveform, FormatError> {
        let out = channel.apply(w)?;
        Ok(match receiver.equalizer_max_gain_db {
            Some(cap) => {
                let eq = channel.zero_forcing_equalizer(cap, DEFAULT_EQUALIZER_TAPS)?;
                ChannelModel::from_response(eq).filter(&out)?
            }
            None => out,
        })
    };
    let rx_wave = if channel.sample_rate_hz() == fs {
        through_channel(&transmitted)?
    } else {
        let at_channel = resample(&transmitted, channel.sample_rate_hz())?;
        let back = resample(&through_channel(&at_channel)?, fs)?;
        let mut samples = back.into_samples();
        samples.resize(transmitted.len(), 0.0);
        Waveform::new(samples, fs)?
    };

    let symbols = payload.frame.symbols_per_subcarrier();
    let received = demodulate(&rx_wave, &build_rx_bank(&tx), symbols)?;
    let mut results = Vec::with_capacity(config.m());
    for ((sent_bits, sent), got) in payload
        .bits
        .iter()
        .zip(payload.frame.subcarriers())
        .zip(received.subcarriers())
    {
        let decided = qam_demap(got, config.qam_order())?;
        results.push(SubcarrierResult {
            bit_errors: bit_errors(sent_bits, &decided)?,
            bits: sent_bits.len(),
            evm_pct: evm(sent, got)?,
        });
    }
    let snr = channel.noise().map(|n| n.snr_db);
    Ok(RunArtifacts {
        report: RunReport::new(*config, snr, results),
        transmitted,
        received,
    })
}
