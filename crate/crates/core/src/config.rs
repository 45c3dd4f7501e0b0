//! Modem configuration and the closed-form relations derived from it.
//!
//! A configuration is bandwidth-driven: the total signal bandwidth `B` and
//! the roll-off `β` fix the aggregate baud rate `R_s = B / (1 + β)`. The
//! per-subcarrier symbol rate is `R_s / m`, every subcarrier occupies `B / m`
//! of spectrum when uncompressed, and the carrier grid is squeezed towards
//! DC by `(1 − α)`.

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};

/// Values this close to an integer are treated as that integer before
/// rounding up, so `2·10·1.1` gives 22 rather than 23.
const CEIL_SLACK: f64 = 1e-9;

/// Bandwidth used throughout the reference experiments.
pub const DEFAULT_BANDWIDTH_HZ: f64 = 3.0e6;

/// Default SRRC truncation, in symbol durations on each side of the center.
pub const DEFAULT_SPAN_SYMBOLS: usize = 10;

/// `n_s = ⌈2m(1+β)⌉`, the number of samples per subcarrier symbol.
pub fn samples_per_symbol(m: usize, beta: f64) -> Result<usize> {
    if m == 0 {
        return Err(domain("m", 0.0));
    }
    check_beta(beta)?;
    let exact = 2.0 * m as f64 * (1.0 + beta);
    Ok(libm::ceil(exact - CEIL_SLACK) as usize)
}

/// Carrier frequency of subcarrier `n` (1-based): `((2n−1)/(2m))·B·(1−α)`.
pub fn carrier_frequency(n: usize, m: usize, bandwidth_hz: f64, alpha: f64) -> Result<f64> {
    if m == 0 {
        return Err(domain("m", 0.0));
    }
    if n == 0 || n > m {
        return Err(Error::Index { index: n, count: m });
    }
    check_bandwidth(bandwidth_hz)?;
    check_alpha(alpha)?;
    Ok((2 * n - 1) as f64 / (2 * m) as f64 * bandwidth_hz * (1.0 - alpha))
}

/// Sampling frequency `f_s = R_s·n_s/m`, with `R_s` the aggregate baud rate.
pub fn sampling_frequency(baud_rate: f64, samples_per_symbol: usize, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(domain("m", 0.0));
    }
    if samples_per_symbol == 0 {
        return Err(domain("samples_per_symbol", 0.0));
    }
    if !(baud_rate > 0.0 && baud_rate.is_finite()) {
        return Err(domain("baud_rate", baud_rate));
    }
    Ok(baud_rate * samples_per_symbol as f64 / m as f64)
}

/// Spectral efficiency in b/s/Hz: `log2(M) / ((1+β)(1−α))`.
pub fn spectral_efficiency(qam_order: u32, beta: f64, alpha: f64) -> Result<f64> {
    if qam_order < 2 || !qam_order.is_power_of_two() {
        return Err(domain("qam_order", qam_order as f64));
    }
    check_beta(beta)?;
    check_alpha(alpha)?;
    let bits = qam_order.trailing_zeros() as f64;
    Ok(bits / ((1.0 + beta) * (1.0 - alpha)))
}

/// Relative spectral-efficiency gain of compression `α` over the orthogonal
/// system at the same `M` and `β`: `1/(1−α) − 1`.
pub fn relative_gain(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(1.0 / (1.0 - alpha) - 1.0)
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(domain("beta", beta))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(domain("alpha", alpha))
    }
}

fn check_bandwidth(bandwidth_hz: f64) -> Result<()> {
    if bandwidth_hz > 0.0 && bandwidth_hz.is_finite() {
        Ok(())
    } else {
        Err(domain("bandwidth_hz", bandwidth_hz))
    }
}

/// Validated modem parameter set. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModemConfig {
    m: usize,
    qam_order: u32,
    beta: f64,
    alpha: f64,
    bandwidth_hz: f64,
    baud_rate: f64,
    span_symbols: usize,
    seed: u64,
}

impl ModemConfig {
    pub fn builder() -> ConfigBuilder {
        ConfigBuilder::default()
    }

    /// Bandwidth-driven construction: `R_s = B/(1+β)`.
    pub fn from_bandwidth(m: usize, beta: f64, alpha: f64, bandwidth_hz: f64) -> Result<Self> {
        Self::builder()
            .m(m)
            .beta(beta)
            .alpha(alpha)
            .bandwidth_hz(bandwidth_hz)
            .build()
    }

    /// Baud-driven construction: `B = R_s(1+β)`.
    pub fn from_baud_rate(m: usize, beta: f64, alpha: f64, baud_rate: f64) -> Result<Self> {
        Self::builder()
            .m(m)
            .beta(beta)
            .alpha(alpha)
            .baud_rate(baud_rate)
            .build()
    }

    /// Subcarrier count.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn qam_order(&self) -> u32 {
        self.qam_order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.qam_order.trailing_zeros() as usize
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    /// Aggregate baud rate over all subcarriers.
    pub fn baud_rate(&self) -> f64 {
        self.baud_rate
    }

    pub fn subcarrier_symbol_rate(&self) -> f64 {
        self.baud_rate / self.m as f64
    }

    pub fn span_symbols(&self) -> usize {
        self.span_symbols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn samples_per_symbol(&self) -> usize {
        samples_per_symbol(self.m, self.beta).expect("validated config")
    }

    pub fn sampling_frequency(&self) -> f64 {
        self.baud_rate * self.samples_per_symbol() as f64 / self.m as f64
    }

    /// Carrier of subcarrier `n`, 1-based.
    pub fn carrier_frequency(&self, n: usize) -> Result<f64> {
        carrier_frequency(n, self.m, self.bandwidth_hz, self.alpha)
    }

    /// All carriers in subcarrier order.
    pub fn carrier_frequencies(&self) -> Vec<f64> {
        (1..=self.m)
            .map(|n| self.carrier_frequency(n).expect("validated config"))
            .collect()
    }

    pub fn spectral_efficiency(&self) -> f64 {
        spectral_efficiency(self.qam_order, self.beta, self.alpha).expect("validated config")
    }

    /// Occupied band `[f_c¹ − B/2m, f_cᵐ + B/2m]`, clamped at DC.
    pub fn occupied_band(&self) -> (f64, f64) {
        let half = self.bandwidth_hz / (2 * self.m) as f64;
        let carriers = self.carrier_frequencies();
        let lo = (carriers[0] - half).max(0.0);
        let hi = carriers[self.m - 1] + half;
        (lo, hi)
    }

    /// Same parameters with a different compression factor.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha, ..*self })
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }
}

impl Default for ModemConfig {
    fn default() -> Self {
        ConfigBuilder::default()
            .build()
            .expect("defaults are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rate {
    Bandwidth(f64),
    Baud(f64),
}

/// Builder for [`ModemConfig`]. Defaults: `m = 10`, 4-QAM, `β = 0.1`,
/// `α = 0`, `B = 3 MHz`, span 10, seed 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigBuilder {
    m: usize,
    qam_order: u32,
    beta: f64,
    alpha: f64,
    rate: Rate,
    span_symbols: usize,
    seed: u64,
}

impl Default for ConfigBuilder {
    fn default() -> Self {
        Self {
            m: 10,
            qam_order: 4,
            beta: 0.1,
            alpha: 0.0,
            rate: Rate::Bandwidth(DEFAULT_BANDWIDTH_HZ),
            span_symbols: DEFAULT_SPAN_SYMBOLS,
            seed: 1,
        }
    }
}

impl ConfigBuilder {
    pub fn m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn qam_order(mut self, qam_order: u32) -> Self {
        self.qam_order = qam_order;
        self
    }

    pub fn beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn bandwidth_hz(mut self, bandwidth_hz: f64) -> Self {
        self.rate = Rate::Bandwidth(bandwidth_hz);
        self
    }

    pub fn baud_rate(mut self, baud_rate: f64) -> Self {
        self.rate = Rate::Baud(baud_rate);
        self
    }

    pub fn span_symbols(mut self, span_symbols: usize) -> Self {
        self.span_symbols = span_symbols;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn build(self) -> Result<ModemConfig> {
        if self.m == 0 {
            return Err(domain("m", 0.0));
        }
        if !matches!(self.qam_order, 4 | 16 | 64) {
            return Err(domain("qam_order", self.qam_order as f64));
        }
        check_beta(self.beta)?;
        check_alpha(self.alpha)?;
        if self.span_symbols == 0 {
            return Err(domain("span_symbols", 0.0));
        }
        let (bandwidth_hz, baud_rate) = match self.rate {
            Rate::Bandwidth(b) => {
                check_bandwidth(b)?;
                (b, b / (1.0 + self.beta))
            }
            Rate::Baud(r) => {
                if !(r > 0.0 && r.is_finite()) {
                    return Err(domain("baud_rate", r));
                }
                (r * (1.0 + self.beta), r)
            }
        };
        Ok(ModemConfig {
            m: self.m,
            qam_order: self.qam_order,
            beta: self.beta,
            alpha: self.alpha,
            bandwidth_hz,
            baud_rate,
            span_symbols: self.span_symbols,
            seed: self.seed,
        })
    }
}
