//! SRRC Hilbert-pair filter banks.
//!
//! Every subcarrier `n` gets an in-phase response `p(t)·cos(2π f_cⁿ t)` and a
//! quadrature response `p(t)·sin(2π f_cⁿ t)`, where `p` is the square-root
//! raised-cosine prototype and `t = 0` sits on the center tap. The in-phase
//! response is therefore even and the quadrature response odd. Each response
//! is scaled to unit energy.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::config::ModemConfig;
use crate::error::{domain, Error, Result};

/// Relative distance from `|t| = 1/(4β)` inside which the closed-form limit
/// is used instead of the general expression.
const SINGULARITY_TOL: f64 = 1e-9;

/// A finite impulse response with its sampling rate and group delay.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    taps: Vec<f64>,
    sample_rate_hz: f64,
    delay_samples: usize,
}

impl ImpulseResponse {
    /// Linear-phase response centered on its middle tap. `taps` must have odd
    /// length.
    pub fn centered(taps: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if taps.is_empty() || taps.len().is_multiple_of(2) {
            return Err(Error::Dimension {
                what: "tap count must be odd",
                expected: taps.len() | 1,
                actual: taps.len(),
            });
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(domain("sample_rate_hz", sample_rate_hz));
        }
        if let Some(bad) = taps.iter().find(|t| !t.is_finite()) {
            return Err(domain("tap", *bad));
        }
        let delay_samples = (taps.len() - 1) / 2;
        Ok(Self {
            taps,
            sample_rate_hz,
            delay_samples,
        })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn delay_samples(&self) -> usize {
        self.delay_samples
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum()
    }

    /// Sample-reversed copy. The delay is unchanged because the tap count is
    /// odd.
    pub fn reversed(&self) -> Self {
        let mut taps = self.taps.clone();
        taps.reverse();
        Self { taps, ..*self }
    }

    fn normalized(mut self) -> Self {
        let norm = libm::sqrt(self.energy());
        if norm > 0.0 {
            self.taps.iter_mut().for_each(|t| *t /= norm);
        }
        self
    }
}

/// SRRC value at `t` measured in symbol durations (`T_s = 1`), unit peak
/// convention: `p(0) = 1 − β + 4β/π`.
pub fn srrc_value(beta: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let x = 4.0 * beta * t;
    if libm::fabs(libm::fabs(x) - 1.0) < SINGULARITY_TOL {
        let arg = PI / (4.0 * beta);
        return beta
            * FRAC_1_SQRT_2
            * ((1.0 + 2.0 / PI) * libm::sin(arg) + (1.0 - 2.0 / PI) * libm::cos(arg));
    }
    let num = libm::sin(PI * t * (1.0 - beta)) + x * libm::cos(PI * t * (1.0 + beta));
    num / (PI * t * (1.0 - x * x))
}

/// The SRRC prototype sampled at `samples_per_symbol` points per symbol over
/// `±span_symbols` symbols. Unit-peak convention, not energy normalized. The
/// returned `sample_rate_hz` is `samples_per_symbol`, i.e. one symbol per
/// second.
pub fn srrc_prototype(
    beta: f64,
    samples_per_symbol: usize,
    span_symbols: usize,
) -> Result<ImpulseResponse> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(domain("beta", beta));
    }
    if samples_per_symbol < 2 {
        return Err(domain("samples_per_symbol", samples_per_symbol as f64));
    }
    if span_symbols == 0 {
        return Err(domain("span_symbols", 0.0));
    }
    let delay = span_symbols * samples_per_symbol;
    let taps = (0..=2 * delay)
        .map(|k| {
            let offset = k as f64 - delay as f64;
            srrc_value(beta, offset / samples_per_symbol as f64)
        })
        .collect();
    ImpulseResponse::centered(taps, samples_per_symbol as f64)
}

/// In-phase and quadrature responses of one subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    pub in_phase: ImpulseResponse,
    pub quadrature: ImpulseResponse,
}

/// One response pair per subcarrier, plus the configuration that built it.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pairs: Vec<FilterPair>,
    config: ModemConfig,
    matched: bool,
}

impl FilterBank {
    pub fn config(&self) -> &ModemConfig {
        &self.config
    }

    pub fn pairs(&self) -> &[FilterPair] {
        &self.pairs
    }

    /// Pair for subcarrier `n`, 1-based.
    pub fn pair(&self, n: usize) -> Result<&FilterPair> {
        if n == 0 || n > self.pairs.len() {
            return Err(Error::Index {
                index: n,
                count: self.pairs.len(),
            });
        }
        Ok(&self.pairs[n - 1])
    }

    pub fn subcarriers(&self) -> usize {
        self.pairs.len()
    }

    /// Total impulse responses held: two per subcarrier.
    pub fn response_count(&self) -> usize {
        2 * self.pairs.len()
    }

    /// True for a bank built by [`build_rx_bank`].
    pub fn is_matched(&self) -> bool {
        self.matched
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.config.sampling_frequency()
    }

    pub fn tap_count(&self) -> usize {
        self.pairs[0].in_phase.len()
    }

    pub fn delay_samples(&self) -> usize {
        self.pairs[0].in_phase.delay_samples()
    }
}

/// Transmit bank at the configured carrier grid (including compression).
pub fn build_tx_bank(config: &ModemConfig) -> Result<FilterBank> {
    let sps = config.samples_per_symbol();
    let fs = config.sampling_frequency();
    let prototype = srrc_prototype(config.beta(), sps, config.span_symbols())?;
    let delay = prototype.delay_samples() as f64;

    let pairs = (1..=config.m())
        .map(|n| {
            let fc = config.carrier_frequency(n)?;
            let (i_taps, q_taps): (Vec<f64>, Vec<f64>) = prototype
                .taps()
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let phase = 2.0 * PI * fc * (k as f64 - delay) / fs;
                    (p * libm::cos(phase), p * libm::sin(phase))
                })
                .unzip();
            Ok(FilterPair {
                in_phase: ImpulseResponse::centered(i_taps, fs)?.normalized(),
                quadrature: ImpulseResponse::centered(q_taps, fs)?.normalized(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(FilterBank {
        pairs,
        config: *config,
        matched: false,
    })
}

/// Matched receive bank: every response time-reversed.
pub fn build_rx_bank(tx: &FilterBank) -> FilterBank {
    let pairs = tx
        .pairs
        .iter()
        .map(|p| FilterPair {
            in_phase: p.in_phase.reversed(),
            quadrature: p.quadrature.reversed(),
        })
        .collect();
    FilterBank {
        pairs,
        config: tx.config,
        matched: true,
    }
}

/// Crosstalk gains between subcarriers.
///
/// Entry `(i, j)` is the largest magnitude, over symbol-spaced lags and over
/// the four I/Q path combinations, of the cascade "transmit filter of `j` →
/// matched receive filter of `i`". With unit-energy responses the diagonal is
/// the zero-lag autocorrelation, i.e. 1.
#[derive(Debug, Clone, PartialEq)]
pub struct IciMatrix {
    m: usize,
    entries: Vec<f64>,
}

impl IciMatrix {
    pub fn size(&self) -> usize {
        self.m
    }

    /// Linear gain for receiver `i`, transmitter `j`, both 1-based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!((1..=self.m).contains(&i) && (1..=self.m).contains(&j));
        self.entries[(i - 1) * self.m + (j - 1)]
    }

    pub fn get_db(&self, i: usize, j: usize) -> f64 {
        20.0 * libm::log10(self.get(i, j))
    }

    /// Largest off-diagonal entry, in dB.
    pub fn max_off_diagonal_db(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 1..=self.m {
            for j in (1..=self.m).filter(|&j| j != i) {
                worst = worst.max(self.get(i, j));
            }
        }
        20.0 * libm::log10(worst)
    }

    /// Transmitters (1-based) whose gain into receiver `row` lies within
    /// `within_db` of that row's strongest interferer.
    pub fn dominant_interferers(&self, row: usize, within_db: f64) -> Vec<usize> {
        let strongest = (1..=self.m)
            .filter(|&j| j != row)
            .map(|j| self.get(row, j))
            .fold(0.0f64, f64::max);
        if strongest == 0.0 {
            return Vec::new();
        }
        let floor = strongest * libm::pow(10.0, -within_db / 20.0);
        (1..=self.m)
            .filter(|&j| j != row && self.get(row, j) >= floor)
            .collect()
    }
}

/// Computes the [`IciMatrix`] of a transmit bank against its matched bank.
pub fn ici_matrix(tx: &FilterBank) -> IciMatrix {
    let rx = build_rx_bank(tx);
    let m = tx.subcarriers();
    let sps = tx.config.samples_per_symbol() as isize;
    let len = tx.tap_count() as isize;
    let peak = len - 1;
    let max_lag = (len - 1) / sps;

    let mut entries = Vec::with_capacity(m * m);
    for rx_pair in rx.pairs() {
        for tx_pair in tx.pairs() {
            let mut worst = 0.0f64;
            for sent in [&tx_pair.in_phase, &tx_pair.quadrature] {
                for recv in [&rx_pair.in_phase, &rx_pair.quadrature] {
                    for lag in -max_lag..=max_lag {
                        let at = peak + lag * sps;
                        let v = cascade_at(sent.taps(), recv.taps(), at);
                        worst = worst.max(libm::fabs(v));
                    }
                }
            }
            entries.push(worst);
        }
    }
    IciMatrix { m, entries }
}

/// Sample `at` of the full convolution `a ⊗ b`.
fn cascade_at(a: &[f64], b: &[f64], at: isize) -> f64 {
    let lo = (at - b.len() as isize + 1).max(0) as usize;
    let hi = (at.min(a.len() as isize - 1)) as usize;
    if at < 0 || lo > hi {
        return 0.0;
    }
    (lo..=hi).map(|t| a[t] * b[at as usize - t]).sum()
}
