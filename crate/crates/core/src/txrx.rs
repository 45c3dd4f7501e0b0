//! Transmit and receive chains.
//!
//! Transmit: PRBS → Gray-mapped M-QAM → zero-stuffing by `n_s` → SRRC
//! Hilbert-pair filtering → `√2 Σ (I ⊗ f_I − Q ⊗ f_Q)`.
//! Receive: matched filtering → sampling every `n_s` samples at the known
//! cascade delay → symbol decisions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::config::ModemConfig;
use crate::error::{domain, Error, Result};
use crate::filters::FilterBank;
use crate::Complex;

/// Ordered bits, each 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitStream(Vec<u8>);

impl BitStream {
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        Self(bits.into_iter().map(u8::from).collect())
    }

    /// Wraps raw bytes; any nonzero value is rejected.
    pub fn from_bytes(bits: Vec<u8>) -> Result<Self> {
        match bits.iter().find(|b| **b > 1) {
            Some(b) => Err(domain("bit", *b as f64)),
            None => Ok(Self(bits)),
        }
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.0.iter().filter(|b| **b == 1).count()
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }
}

/// Fibonacci LFSR with characteristic polynomial `x¹⁵ + x¹⁴ + 1`, emitting
/// the maximal-length sequence of period 32767.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prbs15 {
    state: u16,
}

impl Prbs15 {
    pub const PERIOD: usize = (1 << 15) - 1;
    const MASK: u16 = 0x7fff;

    /// `seed` is the initial register contents; only its low 15 bits count.
    pub fn new(seed: u16) -> Result<Self> {
        let state = seed & Self::MASK;
        if state == 0 {
            return Err(Error::ZeroSeed);
        }
        Ok(Self { state })
    }

    /// Register state derived from a master seed and a stream index, so each
    /// subcarrier starts at its own offset into the sequence.
    pub fn for_stream(master_seed: u64, stream: u64) -> Self {
        let mut x = master_seed ^ stream.wrapping_mul(0xd1b5_4a32_d192_ed03);
        loop {
            let state = (splitmix64(&mut x) as u16) & Self::MASK;
            if state != 0 {
                return Self { state };
            }
        }
    }

    pub fn state(&self) -> u16 {
        self.state
    }
}

impl Iterator for Prbs15 {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        let bit = ((self.state >> 14) ^ (self.state >> 13)) & 1;
        self.state = ((self.state << 1) | bit) & Self::MASK;
        Some(bit as u8)
    }
}

pub(crate) fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `count` bits of the PRBS15 sequence starting from register state `seed`.
pub fn prbs(count: usize, seed: u16) -> Result<BitStream> {
    Ok(BitStream(Prbs15::new(seed)?.take(count).collect()))
}

/// Square Gray-coded M-QAM with unit average symbol energy.
///
/// A label of `log2(M)` bits is split in half: the leading half selects the
/// in-phase level, the trailing half the quadrature level, each through a
/// reflected binary Gray code over the PAM levels `−(L−1), …, L−1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constellation {
    order: u32,
    bits_per_axis: usize,
    levels: usize,
    scale: f64,
}

impl Constellation {
    pub fn new(order: u32) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64) {
            return Err(domain("qam_order", order as f64));
        }
        let bits_per_axis = order.trailing_zeros() as usize / 2;
        let levels = 1usize << bits_per_axis;
        let scale = 1.0 / libm::sqrt(2.0 * (order as f64 - 1.0) / 3.0);
        Ok(Self {
            order,
            bits_per_axis,
            levels,
            scale,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis
    }

    /// Smallest distance between two constellation points.
    pub fn min_distance(&self) -> f64 {
        2.0 * self.scale
    }

    /// Point carrying `label`.
    pub fn point(&self, label: u32) -> Complex {
        let axis_mask = (1u32 << self.bits_per_axis) - 1;
        let i_gray = label >> self.bits_per_axis;
        let q_gray = label & axis_mask;
        Complex::new(self.level(i_gray), self.level(q_gray))
    }

    /// All points, indexed by label.
    pub fn points(&self) -> Vec<Complex> {
        (0..self.order).map(|l| self.point(l)).collect()
    }

    /// Minimum-distance decision. Points exactly on a decision boundary go to
    /// the candidate with the smaller Gray label.
    pub fn decide(&self, z: Complex) -> u32 {
        (self.decide_axis(z.re) << self.bits_per_axis) | self.decide_axis(z.im)
    }

    pub fn map(&self, bits: &BitStream) -> Result<Vec<Complex>> {
        let k = self.bits_per_symbol();
        if !bits.len().is_multiple_of(k) {
            return Err(Error::Length {
                expected: bits.len().div_ceil(k) * k,
                actual: bits.len(),
            });
        }
        Ok(bits
            .as_slice()
            .chunks_exact(k)
            .map(|chunk| {
                let label = chunk.iter().fold(0u32, |acc, b| (acc << 1) | *b as u32);
                self.point(label)
            })
            .collect())
    }

    pub fn demap(&self, symbols: &[Complex]) -> BitStream {
        let k = self.bits_per_symbol();
        let mut bits = Vec::with_capacity(symbols.len() * k);
        for z in symbols {
            let label = self.decide(*z);
            bits.extend((0..k).rev().map(|s| ((label >> s) & 1) as u8));
        }
        BitStream(bits)
    }

    fn level(&self, gray: u32) -> f64 {
        let index = gray_to_binary(gray) as f64;
        (2.0 * index - (self.levels as f64 - 1.0)) * self.scale
    }

    fn decide_axis(&self, x: f64) -> u32 {
        let top = (self.levels - 1) as f64;
        let t = (x / self.scale + top) / 2.0;
        if t.is_nan() || t <= 0.0 {
            return 0;
        }
        if t >= top {
            return binary_to_gray(self.levels as u32 - 1);
        }
        let below = libm::floor(t);
        let frac = t - below;
        let below = below as u32;
        if frac < 0.5 {
            binary_to_gray(below)
        } else if frac > 0.5 {
            binary_to_gray(below + 1)
        } else {
            binary_to_gray(below).min(binary_to_gray(below + 1))
        }
    }
}

fn binary_to_gray(b: u32) -> u32 {
    b ^ (b >> 1)
}

fn gray_to_binary(mut g: u32) -> u32 {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

/// Maps bits onto unit-energy Gray-coded `M`-QAM symbols.
pub fn qam_map(bits: &BitStream, qam_order: u32) -> Result<Vec<Complex>> {
    Constellation::new(qam_order)?.map(bits)
}

/// Hard-decision demapping back to bits.
pub fn qam_demap(symbols: &[Complex], qam_order: u32) -> Result<BitStream> {
    Ok(Constellation::new(qam_order)?.demap(symbols))
}

/// Per-subcarrier symbol sequences of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    subcarriers: Vec<Vec<Complex>>,
}

impl SymbolFrame {
    pub fn new(subcarriers: Vec<Vec<Complex>>) -> Result<Self> {
        let Some(first) = subcarriers.first() else {
            return Err(Error::Empty);
        };
        let n = first.len();
        if let Some(bad) = subcarriers.iter().find(|s| s.len() != n) {
            return Err(Error::Length {
                expected: n,
                actual: bad.len(),
            });
        }
        Ok(Self { subcarriers })
    }

    pub fn zeros(m: usize, symbols_per_subcarrier: usize) -> Self {
        Self {
            subcarriers: vec![vec![Complex::new(0.0, 0.0); symbols_per_subcarrier]; m],
        }
    }

    pub fn subcarriers(&self) -> &[Vec<Complex>] {
        &self.subcarriers
    }

    pub fn subcarrier_count(&self) -> usize {
        self.subcarriers.len()
    }

    pub fn symbols_per_subcarrier(&self) -> usize {
        self.subcarriers.first().map_or(0, Vec::len)
    }

    pub fn into_inner(self) -> Vec<Vec<Complex>> {
        self.subcarriers
    }
}

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(domain("sample_rate_hz", sample_rate_hz));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite()) {
            return Err(domain("sample", *bad));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of the squared samples; zero for an empty waveform.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }
}

pub(crate) fn same_rate(a: f64, b: f64) -> bool {
    libm::fabs(a - b) <= 1e-9 * a.abs().max(b.abs())
}

/// Synthesizes the NM-CAP waveform for `frame` through transmit bank `bank`.
///
/// Symbol `k` of every subcarrier lands at sample `k·n_s`; the output holds
/// the full convolution, `N·n_s + L − 1` samples for `N` symbols and `L`
/// taps, at the bank's sampling frequency.
pub fn modulate(frame: &SymbolFrame, bank: &FilterBank) -> Result<Waveform> {
    if frame.subcarrier_count() != bank.subcarriers() {
        return Err(Error::Dimension {
            what: "frame subcarriers vs filter bank",
            expected: bank.subcarriers(),
            actual: frame.subcarrier_count(),
        });
    }
    let fs = bank.sample_rate_hz();
    let n = frame.symbols_per_subcarrier();
    if n == 0 {
        return Waveform::new(Vec::new(), fs);
    }
    let sps = bank.config().samples_per_symbol();
    let taps = bank.tap_count();
    let mut out = vec![0.0; n * sps + taps - 1];

    for (pair, symbols) in bank.pairs().iter().zip(frame.subcarriers()) {
        let fi = pair.in_phase.taps();
        let fq = pair.quadrature.taps();
        for (k, s) in symbols.iter().enumerate() {
            let a = SQRT_2 * s.re;
            let b = -SQRT_2 * s.im;
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let seg = &mut out[k * sps..k * sps + taps];
            for ((o, i), q) in seg.iter_mut().zip(fi).zip(fq) {
                *o += a * i + b * q;
            }
        }
    }
    Waveform::new(out, fs)
}

/// Matched-filter receiver.
///
/// Symbol `k` is read at sample `k·n_s + D_tx + D_rx` of the matched-filter
/// output. The quadrature branch is negated to undo the subtraction in
/// [`modulate`], and both branches are divided by `√2`.
pub fn demodulate(w: &Waveform, rx_bank: &FilterBank, symbol_count: usize) -> Result<SymbolFrame> {
    let fs = rx_bank.sample_rate_hz();
    if !same_rate(fs, w.sample_rate_hz()) {
        return Err(Error::RateMismatch {
            expected: fs,
            actual: w.sample_rate_hz(),
        });
    }
    let m = rx_bank.subcarriers();
    if symbol_count == 0 {
        return Ok(SymbolFrame::zeros(m, 0));
    }
    let sps = rx_bank.config().samples_per_symbol();
    let taps = rx_bank.tap_count();
    let needed = (symbol_count - 1) * sps + taps;
    if w.len() < needed {
        return Err(Error::InsufficientLength {
            needed,
            available: w.len(),
        });
    }

    let samples = w.samples();
    let subcarriers = rx_bank
        .pairs()
        .iter()
        .map(|pair| {
            // Reading the matched taps backwards turns the convolution at the
            // decision instant into a plain dot product over the window.
            let gi: Vec<f64> = pair.in_phase.taps().iter().rev().copied().collect();
            let gq: Vec<f64> = pair.quadrature.taps().iter().rev().copied().collect();
            (0..symbol_count)
                .map(|k| {
                    let window = &samples[k * sps..k * sps + taps];
                    let (yi, yq) = window
                        .iter()
                        .zip(&gi)
                        .zip(&gq)
                        .fold((0.0, 0.0), |(ai, aq), ((x, i), q)| (ai + x * i, aq + x * q));
                    Complex::new(yi * FRAC_1_SQRT_2, -yq * FRAC_1_SQRT_2)
                })
                .collect()
        })
        .collect();
    Ok(SymbolFrame { subcarriers })
}

/// Bits and symbols for one transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct Payload {
    pub bits: Vec<BitStream>,
    pub frame: SymbolFrame,
}

/// Draws `bits_per_subcarrier` PRBS bits for every subcarrier, each from its
/// own offset derived from the configuration seed, and maps them to symbols.
pub fn generate_payload(config: &ModemConfig, bits_per_subcarrier: usize) -> Result<Payload> {
    let constellation = Constellation::new(config.qam_order())?;
    let mut bits = Vec::with_capacity(config.m());
    let mut symbols = Vec::with_capacity(config.m());
    for n in 0..config.m() {
        let stream = BitStream(
            Prbs15::for_stream(config.seed(), n as u64)
                .take(bits_per_subcarrier)
                .collect(),
        );
        symbols.push(constellation.map(&stream)?);
        bits.push(stream);
    }
    Ok(Payload {
        bits,
        frame: SymbolFrame::new(symbols)?,
    })
}
