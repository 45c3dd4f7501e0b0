use std::f64::consts::PI;

use nmcap_core::channel::{LED_CUT_OFF_HZ, LED_CUT_ON_HZ};
use nmcap_core::metrics::spectrum_estimate;
use nmcap_core::txrx::generate_payload;
use nmcap_core::{
    apply_channel, build_tx_bank, modulate, resample, ChannelModel, ImpulseResponse, LedResponse,
    ModemConfig, NoiseSpec, Waveform,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

fn dtft_db(h: &ImpulseResponse, f: f64) -> f64 {
    let fs = h.sample_rate_hz();
    let z: Complex64 = h
        .taps()
        .iter()
        .enumerate()
        .map(|(n, t)| Complex64::from_polar(*t, -2.0 * PI * f * n as f64 / fs))
        .sum();
    20.0 * z.norm().log10()
}

fn led(fs: f64) -> ChannelModel {
    ChannelModel::parametric_led(LED_CUT_ON_HZ, LED_CUT_OFF_HZ, fs, 255).unwrap()
}

/// Peak of the FIR magnitude on a fine grid.
fn fir_peak_db(h: &ImpulseResponse) -> f64 {
    (1..600)
        .map(|k| dtft_db(h, k as f64 * 5e3))
        .fold(f64::MIN, f64::max)
}

#[test]
fn led_fir_half_power_corners() {
    let ch = led(6e6);
    let peak = fir_peak_db(ch.response());
    for f in [250e3, 1.25e6] {
        let rel = dtft_db(ch.response(), f) - peak;
        assert!((rel + 3.0).abs() <= 0.5, "{f} Hz: {rel:.3} dB");
    }
    assert!(dtft_db(ch.response(), 0.0) - peak < -20.0);
}

#[test]
fn led_attenuates_top_carrier_more_than_bottom() {
    for m in 2..=10 {
        for beta in [0.1, 0.3, 0.5] {
            let cfg = ModemConfig::from_bandwidth(m, beta, 0.0, 3e6).unwrap();
            let ch = led(cfg.sampling_frequency());
            let bottom = dtft_db(ch.response(), cfg.carrier_frequency(1).unwrap());
            let top = dtft_db(ch.response(), cfg.carrier_frequency(m).unwrap());
            assert!(top < bottom, "m {m} β {beta}: {top} vs {bottom}");
        }
    }
}

#[test]
fn second_band_attenuated_on_two_band_signal() {
    let cfg = ModemConfig::from_bandwidth(2, 0.1, 0.0, 3e6).unwrap();
    let payload = generate_payload(&cfg, 40_000).unwrap();
    let w = modulate(&payload.frame, &build_tx_bank(&cfg).unwrap()).unwrap();
    let band_power = |spec: &[(f64, f64)], lo: f64, hi: f64| {
        let lin: f64 = spec
            .iter()
            .filter(|(f, _)| *f >= lo && *f <= hi)
            .map(|(_, db)| 10f64.powf(db / 10.0))
            .sum();
        10.0 * lin.log10()
    };
    let before = spectrum_estimate(&w, 32).unwrap();
    let sent_gap = band_power(&before, 1.6e6, 2.9e6) - band_power(&before, 0.1e6, 1.4e6);
    assert!(
        sent_gap.abs() < 1.0,
        "bands leave the modulator level: {sent_gap}"
    );

    let y = apply_channel(&w, &led(cfg.sampling_frequency())).unwrap();
    let after = spectrum_estimate(&y, 32).unwrap();
    let received_gap = band_power(&after, 1.6e6, 2.9e6) - band_power(&after, 0.1e6, 1.4e6);
    assert!(
        received_gap < -3.0,
        "second band should drop: {received_gap}"
    );
}

#[test]
fn flat_response_is_passthrough() {
    let ch = ChannelModel::from_magnitude_points(&[(0.0, 0.0), (3e6, 0.0)], 6e6, 127).unwrap();
    let taps = ch.response().taps();
    for (k, t) in taps.iter().enumerate() {
        let want = if k == 63 { 1.0 } else { 0.0 };
        assert!((t - want).abs() < 1e-3);
    }
}

#[test]
fn traced_curve_matches_parametric_model() {
    let fs = 6e6;
    let model = LedResponse::from_corners(LED_CUT_ON_HZ, LED_CUT_OFF_HZ).unwrap();
    let points: Vec<(f64, f64)> = (0..=300)
        .map(|k| {
            let f = k as f64 * 10e3;
            (f, model.magnitude_db(f).max(-80.0))
        })
        .collect();
    let traced = ChannelModel::from_magnitude_points(&points, fs, 255).unwrap();
    let parametric = led(fs);
    for k in 10..=300 {
        let f = k as f64 * 10e3;
        let a = dtft_db(traced.response(), f);
        let b = dtft_db(parametric.response(), f);
        assert!((a - b).abs() < 0.5, "{f}: {a} vs {b}");
    }
}

#[test]
fn two_point_ramp_rises_monotonically() {
    let fs = 6e6;
    let ch = ChannelModel::from_magnitude_points(&[(0.0, -40.0), (3e6, 0.0)], fs, 127).unwrap();
    let mut buf: Vec<Complex64> = ch
        .response()
        .taps()
        .iter()
        .map(|t| Complex64::new(*t, 0.0))
        .collect();
    buf.resize(4096, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(4096).process(&mut buf);
    let mags: Vec<f64> = buf[..=2048].iter().map(|c| c.norm()).collect();
    // Sample the zero-padded spectrum at a coarse stride so frequency
    // sampling ripple between design points does not register.
    let coarse: Vec<f64> = mags.iter().step_by(64).copied().collect();
    for w in coarse.windows(2) {
        assert!(w[1] > w[0], "{coarse:?}");
    }
}

#[test]
fn in_band_snr_matches_target() {
    let fs = 6e6;
    let n = 1 << 20;
    let band = (0.5e6, 2.0e6);
    // Band-limited test signal: a comb of tones inside the band.
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            (0..15)
                .map(|k| (2.0 * PI * (0.55e6 + k as f64 * 0.1e6) * t + k as f64).cos())
                .sum()
        })
        .collect();
    let w = Waveform::new(samples, fs).unwrap();
    let ch = ChannelModel::ideal(fs)
        .unwrap()
        .with_noise(NoiseSpec {
            snr_db: 20.0,
            seed: 42,
            band_hz: Some(band),
        })
        .unwrap();
    let y = apply_channel(&w, &ch).unwrap();
    let noise: Vec<f64> = y
        .samples()
        .iter()
        .zip(w.samples())
        .map(|(a, b)| a - b)
        .collect();

    // Oracle: integrate both periodograms over the band.
    let band_energy = |x: &[f64]| {
        let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let lo = (band.0 / fs * n as f64).ceil() as usize;
        let hi = (band.1 / fs * n as f64).floor() as usize;
        buf[lo..=hi].iter().map(|c| c.norm_sqr()).sum::<f64>()
    };
    let snr = 10.0 * (band_energy(w.samples()) / band_energy(&noise)).log10();
    assert!((snr - 20.0).abs() < 0.1, "measured {snr}");
}

#[test]
fn noise_is_deterministic_per_seed() {
    let w = Waveform::new((0..5000).map(|i| (i as f64 * 0.1).sin()).collect(), 1e6).unwrap();
    let spec = |seed| NoiseSpec {
        snr_db: 10.0,
        seed,
        band_hz: None,
    };
    let ch = ChannelModel::ideal(1e6).unwrap();
    let a = apply_channel(&w, &ch.clone().with_noise(spec(5)).unwrap()).unwrap();
    let b = apply_channel(&w, &ch.clone().with_noise(spec(5)).unwrap()).unwrap();
    let c = apply_channel(&w, &ch.with_noise(spec(6)).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn channel_is_linear_for_a_fixed_noise_realization() {
    let fs = 6e6;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w1: Vec<f64> = (0..4000).map(|_| rng.random_range(-1.0..1.0)).collect();
    let w2: Vec<f64> = (0..4000).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sum: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
    let (w1, w2, sum) = (
        Waveform::new(w1, fs).unwrap(),
        Waveform::new(w2, fs).unwrap(),
        Waveform::new(sum, fs).unwrap(),
    );
    let ch = led(fs)
        .with_noise(NoiseSpec {
            snr_db: 15.0,
            seed: 9,
            band_hz: Some((0.0, 3e6)),
        })
        .unwrap();
    let noisy = apply_channel(&sum, &ch).unwrap();
    let noise: Vec<f64> = noisy
        .samples()
        .iter()
        .zip(ch.filter(&sum).unwrap().samples())
        .map(|(a, b)| a - b)
        .collect();
    let f1 = ch.filter(&w1).unwrap();
    let f2 = ch.filter(&w2).unwrap();
    for (k, y) in noisy.samples().iter().enumerate() {
        let want = f1.samples()[k] + f2.samples()[k] + noise[k];
        assert!((y - want).abs() < 1e-9);
    }
}

fn tone(freq: f64, fs: f64, n: usize) -> Waveform {
    Waveform::new(
        (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / fs).sin())
            .collect(),
        fs,
    )
    .unwrap()
}

fn dominant_frequency(w: &Waveform) -> f64 {
    let n = w.len();
    let mut buf: Vec<Complex64> = w
        .samples()
        .iter()
        .map(|v| Complex64::new(*v, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let k = (0..n / 2)
        .max_by(|a, b| buf[*a].norm().total_cmp(&buf[*b].norm()))
        .unwrap();
    k as f64 * w.sample_rate_hz() / n as f64
}

#[test]
fn capture_rate_tone_survives_resampling() {
    let w = tone(1e6, 50e6, 50_000);
    let r = resample(&w, 6e6).unwrap();
    assert_eq!(r.sample_rate_hz(), 6e6);
    assert_eq!(r.len(), 6000);
    let bin = r.sample_rate_hz() / r.len() as f64;
    assert!((dominant_frequency(&r) - 1e6).abs() <= bin);
}

#[test]
fn up_then_down_round_trip() {
    let fs = 1e6;
    let n = 20_000;
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            (2.0 * PI * 37e3 * t).sin() + 0.5 * (2.0 * PI * 151e3 * t + 1.0).cos()
        })
        .collect();
    let w = Waveform::new(x, fs).unwrap();
    let back = resample(&resample(&w, 2e6).unwrap(), 1e6).unwrap();
    assert_eq!(back.len(), n);
    let edge = 200;
    let err: f64 = w.samples()[edge..n - edge]
        .iter()
        .zip(&back.samples()[edge..n - edge])
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / (n - 2 * edge) as f64;
    assert!(err.sqrt() < 1e-3, "rms {}", err.sqrt());
}

#[test]
fn spectrum_of_tone_peaks_at_tone() {
    let fs = 6e6;
    let w = tone(750e3, fs, 1 << 16);
    let spec = spectrum_estimate(&w, 16).unwrap();
    let (f, db) = spec
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let bin = spec[1].0 - spec[0].0;
    assert_eq!(db, 0.0);
    assert!((f - 750e3).abs() <= bin);
    // Nothing far from the tone comes close to it.
    assert!(spec
        .iter()
        .filter(|(g, _)| (g - 750e3).abs() > 10.0 * bin)
        .all(|(_, d)| *d < -40.0));
}

#[test]
fn white_noise_spectrum_is_flat() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let x: Vec<f64> = (0..1_000_000)
        .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    let w = Waveform::new(x, 6e6).unwrap();
    let spec = spectrum_estimate(&w, 64).unwrap();
    let inner = &spec[1..spec.len() - 1];
    let mean = inner.iter().map(|(_, d)| d).sum::<f64>() / inner.len() as f64;
    for (f, d) in inner {
        assert!((d - mean).abs() <= 3.0, "{f}: {d} vs mean {mean}");
    }
}

#[test]
fn zero_input_spectrum_sits_on_floor() {
    let w = Waveform::new(vec![0.0; 4096], 1e6).unwrap();
    let spec = spectrum_estimate(&w, 8).unwrap();
    assert!(spec
        .iter()
        .all(|(_, d)| *d == nmcap_core::metrics::SPECTRUM_FLOOR_DB));
    assert!(spectrum_estimate(&w, 1000).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn filtering_preserves_length_and_rate(len in 1usize..400, taps in (0usize..20).prop_map(|k| 2 * k + 1)) {
        let w = Waveform::new((0..len).map(|i| (i as f64).cos()).collect(), 1e5).unwrap();
        let h = ImpulseResponse::centered(vec![0.1; taps], 1e5).unwrap();
        let y = ChannelModel::from_response(h).filter(&w).unwrap();
        prop_assert_eq!(y.len(), len);
        prop_assert_eq!(y.sample_rate_hz(), 1e5);
    }
}
