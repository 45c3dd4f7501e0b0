//! Link impairments: an LTI response standing in for the LED and receiver
//! front end, white Gaussian noise at a target in-band SNR, and rational
//! resampling between the synthesis rate and a capture rate.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Error, Result};
use crate::filters::ImpulseResponse;
use crate::txrx::{same_rate, Waveform};

/// Corner frequencies of the bias-tee cut-on and the LED cut-off.
pub const LED_CUT_ON_HZ: f64 = 250e3;
pub const LED_CUT_OFF_HZ: f64 = 1.25e6;
/// Default FIR length for synthesized channel responses.
pub const DEFAULT_CHANNEL_TAPS: usize = 255;

/// Default gain cap of [`ChannelModel::zero_forcing_equalizer`].
pub const DEFAULT_EQUALIZER_MAX_GAIN_DB: f64 = 30.0;

/// Default tap count of the zero-forcing equalizer.
pub const DEFAULT_EQUALIZER_TAPS: usize = 511;

/// Band-pass magnitude model: a first-order high-pass (pole `hp_pole_hz`)
/// cascaded with a first-order low-pass (pole `lp_pole_hz`), scaled to unit
/// peak gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedResponse {
    hp_pole_hz: f64,
    lp_pole_hz: f64,
    peak: f64,
}

impl LedResponse {
    /// Places the two poles so the half-power points relative to the peak
    /// fall as close as possible to `cut_on_hz` and `cut_off_hz`.
    ///
    /// The shape is symmetric in log-frequency about `√(cut_on·cut_off)`.
    /// Two real poles cannot produce a half-power bandwidth ratio below
    /// `(√2+1)/(√2−1) ≈ 5.83`; for narrower requests (the 250 kHz / 1.25 MHz
    /// pair is 5:1) both poles sit at the geometric center, which minimizes
    /// the worst-case corner error.
    pub fn from_corners(cut_on_hz: f64, cut_off_hz: f64) -> Result<Self> {
        if !(cut_on_hz > 0.0 && cut_on_hz.is_finite()) {
            return Err(domain("cut_on_hz", cut_on_hz));
        }
        if !(cut_off_hz > cut_on_hz && cut_off_hz.is_finite()) {
            return Err(domain("cut_off_hz", cut_off_hz));
        }
        let center = libm::sqrt(cut_on_hz * cut_off_hz);
        let at_corner = |k: f64| {
            let r = Self::with_poles(center / k, center * k);
            let g = r.magnitude(cut_on_hz);
            g * g
        };
        let mut k = 1.0;
        if at_corner(1.0) < 0.5 {
            let (mut lo, mut hi) = (1.0, 2.0);
            while at_corner(hi) < 0.5 {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if at_corner(mid) < 0.5 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            k = 0.5 * (lo + hi);
        }
        Ok(Self::with_poles(center / k, center * k))
    }

    fn with_poles(hp_pole_hz: f64, lp_pole_hz: f64) -> Self {
        let raw = Self {
            hp_pole_hz,
            lp_pole_hz,
            peak: 1.0,
        };
        let peak = raw.magnitude(libm::sqrt(hp_pole_hz * lp_pole_hz));
        Self { peak, ..raw }
    }

    pub fn hp_pole_hz(&self) -> f64 {
        self.hp_pole_hz
    }

    pub fn lp_pole_hz(&self) -> f64 {
        self.lp_pole_hz
    }

    /// Linear magnitude at `f_hz`, unit at the peak.
    pub fn magnitude(&self, f_hz: f64) -> f64 {
        let u = f_hz / self.hp_pole_hz;
        let v = f_hz / self.lp_pole_hz;
        libm::fabs(u) / libm::sqrt((1.0 + u * u) * (1.0 + v * v)) / self.peak
    }

    pub fn magnitude_db(&self, f_hz: f64) -> f64 {
        20.0 * libm::log10(self.magnitude(f_hz))
    }
}

/// Linear-phase FIR of odd length `taps` whose magnitude matches
/// `magnitude(f)` at the `taps` uniformly spaced frequencies `k·fs/taps`.
pub fn fir_from_magnitude<F>(
    magnitude: F,
    sample_rate_hz: f64,
    taps: usize,
) -> Result<ImpulseResponse>
where
    F: Fn(f64) -> f64,
{
    if taps == 0 || taps.is_multiple_of(2) {
        return Err(Error::Dimension {
            what: "channel tap count must be odd",
            expected: taps | 1,
            actual: taps,
        });
    }
    if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
        return Err(domain("sample_rate_hz", sample_rate_hz));
    }
    let n = taps as f64;
    let delay = (taps - 1) / 2;
    let amps: Vec<f64> = (0..=delay)
        .map(|k| magnitude(k as f64 * sample_rate_hz / n))
        .collect();
    if let Some(bad) = amps.iter().find(|a| !a.is_finite() || **a < 0.0) {
        return Err(domain("magnitude", *bad));
    }
    let h = (0..taps)
        .map(|i| {
            let offset = i as f64 - delay as f64;
            let tail: f64 = amps
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a * libm::cos(2.0 * PI * k as f64 * offset / n))
                .sum();
            (amps[0] + 2.0 * tail) / n
        })
        .collect();
    ImpulseResponse::centered(h, sample_rate_hz)
}

/// Noise settings for [`ChannelModel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Ratio of signal power to noise power inside `band_hz`, in dB.
    pub snr_db: f64,
    pub seed: u64,
    /// Band over which the SNR is defined; the full Nyquist band when `None`.
    pub band_hz: Option<(f64, f64)>,
}

/// Linear time-invariant response plus optional additive white Gaussian
/// noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    response: ImpulseResponse,
    noise: Option<NoiseSpec>,
}

impl ChannelModel {
    /// Single unit tap, noiseless.
    pub fn ideal(sample_rate_hz: f64) -> Result<Self> {
        Ok(Self {
            response: ImpulseResponse::centered(vec![1.0], sample_rate_hz)?,
            noise: None,
        })
    }

    pub fn from_response(response: ImpulseResponse) -> Self {
        Self {
            response,
            noise: None,
        }
    }

    /// Band-pass LED model realized as a linear-phase FIR by frequency
    /// sampling.
    pub fn parametric_led(
        cut_on_hz: f64,
        cut_off_hz: f64,
        sample_rate_hz: f64,
        taps: usize,
    ) -> Result<Self> {
        let led = LedResponse::from_corners(cut_on_hz, cut_off_hz)?;
        if cut_off_hz >= sample_rate_hz / 2.0 {
            return Err(domain("cut_off_hz", cut_off_hz));
        }
        let response = fir_from_magnitude(|f| led.magnitude(f), sample_rate_hz, taps)?;
        Ok(Self::from_response(response))
    }

    /// Linear-phase FIR from `(frequency Hz, magnitude dB)` points,
    /// interpolated linearly in dB and held constant outside the given range.
    pub fn from_magnitude_points(
        points: &[(f64, f64)],
        sample_rate_hz: f64,
        taps: usize,
    ) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Response("need at least two points"));
        }
        let nyquist = sample_rate_hz / 2.0;
        for (i, (f, db)) in points.iter().enumerate() {
            if !f.is_finite() || !db.is_finite() || *f < 0.0 {
                return Err(Error::Response("non-finite or negative entry"));
            }
            if *f > nyquist * (1.0 + 1e-9) {
                return Err(Error::Response("frequency beyond Nyquist"));
            }
            if i > 0 && *f <= points[i - 1].0 {
                return Err(Error::Response("frequencies must increase strictly"));
            }
        }
        let interp = |f: f64| {
            let db = interpolate_db(points, f);
            libm::pow(10.0, db / 20.0)
        };
        let response = fir_from_magnitude(interp, sample_rate_hz, taps)?;
        Ok(Self::from_response(response))
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Result<Self> {
        if !noise.snr_db.is_finite() {
            return Err(domain("snr_db", noise.snr_db));
        }
        if let Some((lo, hi)) = noise.band_hz {
            if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
                return Err(domain("band_hz", hi - lo));
            }
        }
        self.noise = Some(noise);
        Ok(self)
    }

    pub fn response(&self) -> &ImpulseResponse {
        &self.response
    }

    pub fn noise(&self) -> Option<&NoiseSpec> {
        self.noise.as_ref()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.response.sample_rate_hz()
    }

    /// Noiseless part of the channel: convolution with the response, with
    /// its group delay removed so the output aligns with the input.
    pub fn filter(&self, w: &Waveform) -> Result<Waveform> {
        self.check_rate(w)?;
        let h = self.response.taps();
        if h.len() == 1 {
            let g = h[0];
            return Waveform::new(
                w.samples().iter().map(|x| g * x).collect(),
                w.sample_rate_hz(),
            );
        }
        let x = w.samples();
        let delay = self.response.delay_samples();
        let out = (0..x.len())
            .map(|n| {
                // y[n] = Σ_k h[k]·x[n + D − k]
                let top = n + delay;
                let k_lo = top.saturating_sub(x.len() - 1);
                let k_hi = top.min(h.len() - 1);
                (k_lo..=k_hi).map(|k| h[k] * x[top - k]).sum()
            })
            .collect();
        Waveform::new(out, w.sample_rate_hz())
    }

    /// Standard deviation of the white noise that sets the configured SNR for
    /// an already-filtered signal. Zero when noiseless or the signal is zero.
    pub fn noise_sigma(&self, filtered: &Waveform) -> f64 {
        let Some(noise) = self.noise else {
            return 0.0;
        };
        let nyquist = filtered.sample_rate_hz() / 2.0;
        let band_fraction = match noise.band_hz {
            Some((lo, hi)) => ((hi.min(nyquist) - lo) / nyquist).clamp(1e-12, 1.0),
            None => 1.0,
        };
        let snr = libm::pow(10.0, noise.snr_db / 10.0);
        // The signal lives inside the band; white noise of variance σ² puts
        // σ²·band_fraction of its power there.
        libm::sqrt(filtered.mean_power() / (snr * band_fraction))
    }

    /// Filters `w` and adds the configured noise.
    pub fn apply(&self, w: &Waveform) -> Result<Waveform> {
        let filtered = self.filter(w)?;
        let Some(noise) = self.noise else {
            return Ok(filtered);
        };
        let sigma = self.noise_sigma(&filtered);
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        let samples = filtered
            .into_samples()
            .into_iter()
            .map(|x| {
                let z: f64 = rng.sample(StandardNormal);
                x + sigma * z
            })
            .collect();
        Waveform::new(samples, w.sample_rate_hz())
    }

    /// Magnitude of the response at `f_hz`.
    pub fn magnitude(&self, f_hz: f64) -> f64 {
        let fs = self.sample_rate_hz();
        let d = self.response.delay_samples() as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (k, h) in self.response.taps().iter().enumerate() {
            let phase = 2.0 * PI * f_hz * (k as f64 - d) / fs;
            re += h * libm::cos(phase);
            im -= h * libm::sin(phase);
        }
        libm::hypot(re, im)
    }

    /// Linear-phase zero-forcing equalizer for this response: the inverse
    /// magnitude normalized to unit gain at the response peak, with the gain
    /// capped at `max_gain_db` where the response is weak.
    pub fn zero_forcing_equalizer(&self, max_gain_db: f64, taps: usize) -> Result<ImpulseResponse> {
        if !(max_gain_db >= 0.0 && max_gain_db.is_finite()) {
            return Err(domain("max_gain_db", max_gain_db));
        }
        let fs = self.sample_rate_hz();
        let grid = 4 * taps.max(self.response.len());
        let peak = (0..=grid / 2)
            .map(|k| self.magnitude(k as f64 * fs / grid as f64))
            .fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(Error::Response("response is identically zero"));
        }
        let floor = peak * libm::pow(10.0, -max_gain_db / 20.0);
        fir_from_magnitude(|f| peak / self.magnitude(f).max(floor), fs, taps)
    }

    fn check_rate(&self, w: &Waveform) -> Result<()> {
        if same_rate(self.sample_rate_hz(), w.sample_rate_hz()) {
            Ok(())
        } else {
            Err(Error::RateMismatch {
                expected: self.sample_rate_hz(),
                actual: w.sample_rate_hz(),
            })
        }
    }
}

fn interpolate_db(points: &[(f64, f64)], f: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if f <= first.0 {
        return first.1;
    }
    if f >= last.0 {
        return last.1;
    }
    let i = points.partition_point(|p| p.0 <= f);
    let (f0, d0) = points[i - 1];
    let (f1, d1) = points[i];
    d0 + (d1 - d0) * (f - f0) / (f1 - f0)
}

/// Filters `w` through `model` and adds its noise.
pub fn apply_channel(w: &Waveform, model: &ChannelModel) -> Result<Waveform> {
    model.apply(w)
}

/// Largest denominator accepted when matching a resampling ratio.
const MAX_DENOMINATOR: u64 = 1_000;
/// Zero crossings of the anti-alias sinc on each side of its center.
const RESAMPLER_ZERO_CROSSINGS: usize = 32;

/// Rational approximation `p/q` of `x` within relative tolerance `tol`.
pub fn rational_ratio(x: f64, tol: f64) -> Option<(u64, u64)> {
    if !(x > 0.0 && x.is_finite()) {
        return None;
    }
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = libm::floor(r);
        if a > u64::MAX as f64 / 2.0 {
            return None;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > MAX_DENOMINATOR {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if libm::fabs(h1 as f64 / k1 as f64 - x) <= tol * x {
            return Some((h1, k1));
        }
        let frac = r - a as f64;
        if frac <= 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

/// Rational-ratio resampling: upsample by `p`, low-pass at the lower of the
/// two Nyquist frequencies, downsample by `q`. The anti-alias filter is a
/// Blackman-windowed sinc centered on the output instants, so the result has
/// no net delay: output sample `j` sits at time `j / target_rate_hz`.
pub fn resample(w: &Waveform, target_rate_hz: f64) -> Result<Waveform> {
    let source = w.sample_rate_hz();
    if !(target_rate_hz > 0.0 && target_rate_hz.is_finite()) {
        return Err(domain("target_rate_hz", target_rate_hz));
    }
    if same_rate(source, target_rate_hz) {
        return Ok(w.clone());
    }
    let ratio = target_rate_hz / source;
    let (p, q) = rational_ratio(ratio, 1e-9).ok_or(Error::IrrationalRatio(ratio))?;
    let (p, q) = (p as usize, q as usize);

    let stretch = p.max(q);
    let half = RESAMPLER_ZERO_CROSSINGS * stretch;
    let len = 2 * half + 1;
    let cutoff = 0.5 / stretch as f64;
    let h: Vec<f64> = (0..len)
        .map(|i| {
            let t = i as f64 - half as f64;
            let sinc = if t == 0.0 {
                2.0 * cutoff
            } else {
                libm::sin(2.0 * PI * cutoff * t) / (PI * t)
            };
            let x = i as f64 / (len - 1) as f64;
            let window = 0.42 - 0.5 * libm::cos(2.0 * PI * x) + 0.08 * libm::cos(4.0 * PI * x);
            p as f64 * sinc * window
        })
        .collect();

    let x = w.samples();
    let out_len = (x.len() * p).div_ceil(q);
    let out = (0..out_len)
        .map(|j| {
            // y[j] = Σ_i x[i]·h[j·q − i·p + half]
            let pos = j * q + half;
            let i_hi = (pos / p).min(x.len().saturating_sub(1));
            let i_lo = (j * q).saturating_sub(half).div_ceil(p);
            if x.is_empty() || i_lo > i_hi {
                return 0.0;
            }
            (i_lo..=i_hi).map(|i| x[i] * h[pos - i * p]).sum()
        })
        .collect();
    Waveform::new(out, target_rate_hz)
}
