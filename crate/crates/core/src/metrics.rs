//! Bit error rate, EVM, FEC verdicts and spectrum estimates.

use alloc::vec::Vec;

use crate::config::ModemConfig;
use crate::error::{Error, Result};
use crate::txrx::BitStream;
use crate::Complex;

/// BER threshold of the 7%-overhead hard-decision FEC.
pub const FEC_LIMIT: f64 = 3.8e-3;
/// Reporting floor: error-free runs are shown as "below 10⁻⁴".
pub const BER_FLOOR: f64 = 1e-4;

/// Number of positions where the two streams differ.
pub fn bit_errors(tx: &BitStream, rx: &BitStream) -> Result<usize> {
    if tx.len() != rx.len() {
        return Err(Error::Length {
            expected: tx.len(),
            actual: rx.len(),
        });
    }
    Ok(tx
        .as_slice()
        .iter()
        .zip(rx.as_slice())
        .filter(|(a, b)| a != b)
        .count())
}

/// Bit-by-bit error ratio.
pub fn ber(tx: &BitStream, rx: &BitStream) -> Result<f64> {
    if tx.is_empty() {
        return Err(Error::Empty);
    }
    Ok(bit_errors(tx, rx)? as f64 / tx.len() as f64)
}

/// RMS error vector magnitude, as a percentage of the RMS reference
/// magnitude.
pub fn evm(reference: &[Complex], received: &[Complex]) -> Result<f64> {
    if reference.len() != received.len() {
        return Err(Error::Length {
            expected: reference.len(),
            actual: received.len(),
        });
    }
    if reference.is_empty() {
        return Err(Error::Empty);
    }
    let err: f64 = reference
        .iter()
        .zip(received)
        .map(|(r, x)| (x - r).norm_sqr())
        .sum();
    let power: f64 = reference.iter().map(Complex::norm_sqr).sum();
    if power == 0.0 {
        return Err(Error::Domain {
            name: "reference power",
            value: 0.0,
        });
    }
    Ok(100.0 * libm::sqrt(err / power))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FecVerdict {
    /// BER strictly below [`FEC_LIMIT`].
    pub pass: bool,
    /// No errors observed; present as `< 10⁻⁴` rather than zero.
    pub floor: bool,
}

pub fn fec_verdict(ber: f64, bits_tested: usize) -> FecVerdict {
    FecVerdict {
        pass: ber < FEC_LIMIT,
        floor: ber == 0.0 && bits_tested > 0,
    }
}

/// Error counts and EVM for one subcarrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubcarrierResult {
    pub bit_errors: usize,
    pub bits: usize,
    pub evm_pct: f64,
}

impl SubcarrierResult {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    pub fn verdict(&self) -> FecVerdict {
        fec_verdict(self.ber(), self.bits)
    }
}

/// Outcome of one end-to-end run. True error counts are kept; the BER floor
/// is a presentation concern (see [`RunReport::display_ber`]).
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    config: ModemConfig,
    snr_db: Option<f64>,
    subcarriers: Vec<SubcarrierResult>,
}

impl RunReport {
    pub fn new(
        config: ModemConfig,
        snr_db: Option<f64>,
        subcarriers: Vec<SubcarrierResult>,
    ) -> Self {
        Self {
            config,
            snr_db,
            subcarriers,
        }
    }

    pub fn config(&self) -> &ModemConfig {
        &self.config
    }

    /// `None` for a noiseless channel.
    pub fn snr_db(&self) -> Option<f64> {
        self.snr_db
    }

    pub fn subcarriers(&self) -> &[SubcarrierResult] {
        &self.subcarriers
    }

    pub fn per_subcarrier_ber(&self) -> Vec<f64> {
        self.subcarriers.iter().map(SubcarrierResult::ber).collect()
    }

    pub fn per_subcarrier_evm(&self) -> Vec<f64> {
        self.subcarriers.iter().map(|s| s.evm_pct).collect()
    }

    pub fn total_errors(&self) -> usize {
        self.subcarriers.iter().map(|s| s.bit_errors).sum()
    }

    pub fn bits_tested(&self) -> usize {
        self.subcarriers.iter().map(|s| s.bits).sum()
    }

    pub fn aggregate_ber(&self) -> f64 {
        let bits = self.bits_tested();
        if bits == 0 {
            0.0
        } else {
            self.total_errors() as f64 / bits as f64
        }
    }

    pub fn fec_verdicts(&self) -> Vec<FecVerdict> {
        self.subcarriers
            .iter()
            .map(SubcarrierResult::verdict)
            .collect()
    }

    pub fn floor_flags(&self) -> Vec<bool> {
        self.subcarriers.iter().map(|s| s.verdict().floor).collect()
    }

    pub fn spectral_efficiency(&self) -> f64 {
        self.config.spectral_efficiency()
    }

    /// True when every subcarrier is below the FEC limit.
    pub fn all_pass(&self) -> bool {
        self.subcarriers.iter().all(|s| s.verdict().pass)
    }

    /// BER as presented: the floor value for error-free results.
    pub fn display_ber(ber: f64, floor: bool) -> f64 {
        if floor {
            BER_FLOOR
        } else {
            ber
        }
    }
}

#[cfg(feature = "std")]
pub use spectrum::{spectrum_estimate, SPECTRUM_FLOOR_DB};

#[cfg(feature = "std")]
mod spectrum {
    use std::vec::Vec;

    use core::f64::consts::PI;
    use rustfft::num_complex::Complex64;
    use rustfft::FftPlanner;

    use crate::error::{Error, Result};
    use crate::txrx::Waveform;

    /// Shortest segment accepted by [`spectrum_estimate`].
    const MIN_SEGMENT: usize = 16;
    /// Value reported for bins with no power.
    pub const SPECTRUM_FLOOR_DB: f64 = -300.0;

    /// Welch power spectral density estimate: the waveform is cut into
    /// Hann-windowed segments of `len / segments` samples with 50% overlap,
    /// and their periodograms averaged. Returns one-sided `(freq_hz,
    /// power_db)` pairs normalized so the strongest bin is 0 dB.
    pub fn spectrum_estimate(w: &Waveform, segments: usize) -> Result<Vec<(f64, f64)>> {
        if segments == 0 {
            return Err(Error::Domain {
                name: "segments",
                value: 0.0,
            });
        }
        let seg_len = w.len() / segments;
        if seg_len < MIN_SEGMENT {
            return Err(Error::InsufficientLength {
                needed: segments * MIN_SEGMENT,
                available: w.len(),
            });
        }
        let hop = seg_len / 2;
        let window: Vec<f64> = (0..seg_len)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg_len as f64).cos())
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(seg_len);
        let bins = seg_len / 2 + 1;
        let mut acc = vec![0.0; bins];
        let mut buf = vec![Complex64::new(0.0, 0.0); seg_len];
        let x = w.samples();
        let mut start = 0;
        while start + seg_len <= x.len() {
            for ((b, s), win) in buf.iter_mut().zip(&x[start..start + seg_len]).zip(&window) {
                *b = Complex64::new(s * win, 0.0);
            }
            fft.process(&mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b.norm_sqr();
            }
            start += hop;
        }
        let peak = acc.iter().copied().fold(0.0, f64::max);
        let fs = w.sample_rate_hz();
        Ok(acc
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let db = if peak > 0.0 && *p > 0.0 {
                    (10.0 * (p / peak).log10()).max(SPECTRUM_FLOOR_DB)
                } else {
                    SPECTRUM_FLOOR_DB
                };
                (k as f64 * fs / seg_len as f64, db)
            })
            .collect())
    }
}
