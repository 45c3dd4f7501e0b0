use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nmcap::formats::{
    write_constellation, write_filter_bank, write_report, write_spectrum, write_waveform,
    ConfigFile,
};
use nmcap::sweep::run_sweep;
use nmcap::{build_channel, run_detailed, ChannelSpec, ReceiverOptions, SweepPlan};
use nmcap_core::channel::DEFAULT_EQUALIZER_MAX_GAIN_DB;
use nmcap_core::metrics::spectrum_estimate;
use nmcap_core::txrx::generate_payload;
use nmcap_core::{build_tx_bank, modulate, ModemConfig};

#[derive(Parser)]
#[command(name = "nmcap", version, about = "m-CAP / NM-CAP link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and write the per-subcarrier report.
    Run(RunArgs),
    /// Simulate a cartesian grid of configurations.
    Sweep(SweepArgs),
    /// Filter-bank artifacts.
    Filters {
        #[command(subcommand)]
        action: FiltersAction,
    },
    /// Power spectrum of the transmitted or received signal.
    Spectrum(SpectrumArgs),
}

#[derive(Subcommand)]
enum FiltersAction {
    /// Write every transmit impulse response as CSV.
    Dump {
        #[command(flatten)]
        modem: ModemArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Modem parameters. Flags override values loaded with `--config`.
#[derive(Args, Clone)]
struct ModemArgs {
    /// key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    qam_order: Option<u32>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    bandwidth_hz: Option<f64>,
    #[arg(long)]
    span_symbols: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ModemArgs {
    fn file(&self) -> Result<ConfigFile> {
        match &self.config {
            Some(path) => {
                ConfigFile::load(path).with_context(|| format!("reading {}", path.display()))
            }
            None => Ok(ConfigFile::default()),
        }
    }

    fn overrides(&self) -> ConfigFile {
        ConfigFile {
            m: self.m,
            qam_order: self.qam_order,
            beta: self.beta,
            alpha: self.alpha,
            bandwidth_hz: self.bandwidth_hz,
            span_symbols: self.span_symbols,
            seed: self.seed,
        }
    }

    fn resolve(&self) -> Result<ModemConfig> {
        let builder = self
            .overrides()
            .apply(self.file()?.apply(ModemConfig::builder()));
        Ok(builder.build()?)
    }
}

#[derive(Args)]
struct LinkArgs {
    /// Signal-to-noise ratio over the occupied band; omit or `inf` for none.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Bits per subcarrier.
    #[arg(long, default_value_t = 100_000)]
    bits: usize,
    /// ideal, led or csv:<path>.
    #[arg(long, default_value = "ideal")]
    channel: ChannelSpec,
    /// Channel sampling rate; the signal is resampled when it differs from
    /// the modem rate.
    #[arg(long)]
    channel_rate_hz: Option<f64>,
    #[command(flatten)]
    receiver: ReceiverArgs,
}

#[derive(Args)]
struct ReceiverArgs {
    /// Zero-forcing equalization of the known channel response.
    #[arg(long)]
    equalize: bool,
    /// Gain cap of the equalizer.
    #[arg(long, default_value_t = DEFAULT_EQUALIZER_MAX_GAIN_DB, requires = "equalize")]
    equalizer_max_gain_db: f64,
}

impl ReceiverArgs {
    fn options(&self) -> ReceiverOptions {
        ReceiverOptions {
            equalizer_max_gain_db: self.equalize.then_some(self.equalizer_max_gain_db),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    modem: ModemArgs,
    #[command(flatten)]
    link: LinkArgs,
    /// Report CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Binary dump of the transmitted waveform.
    #[arg(long)]
    dump_waveform: Option<PathBuf>,
    /// CSV of the received symbols.
    #[arg(long)]
    dump_constellation: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Base file for qam_order, bandwidth_hz, span_symbols and seed.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 10])]
    m: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5])]
    beta: Vec<f64>,
    /// Defaults to 0 to 0.5 in steps of 0.05.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_values_t = [f64::INFINITY])]
    snr_db: Vec<f64>,
    #[arg(long)]
    qam_order: Option<u32>,
    #[arg(long)]
    bandwidth_hz: Option<f64>,
    #[arg(long)]
    span_symbols: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Bits per subcarrier at every point.
    #[arg(long, default_value_t = 100_000)]
    bits: usize,
    #[arg(long, default_value = "ideal")]
    channel: ChannelSpec,
    #[arg(long)]
    channel_rate_hz: Option<f64>,
    #[command(flatten)]
    receiver: ReceiverArgs,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    workers: Option<usize>,
    /// Sweep CSV; standard output when omitted (no sidecar is written then).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    modem: ModemArgs,
    /// Measure after the channel instead of at the transmitter.
    #[arg(long)]
    received: bool,
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long, default_value_t = 20_000)]
    bits: usize,
    #[arg(long, default_value = "ideal")]
    channel: ChannelSpec,
    /// Averaged segments.
    #[arg(long, default_value_t = 16)]
    segments: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finite(snr: Option<f64>) -> Option<f64> {
    snr.filter(|s| s.is_finite())
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let config = args.modem.resolve()?;
    let snr = finite(args.link.snr_db);
    let channel = build_channel(&args.link.channel, &config, snr, args.link.channel_rate_hz)?;
    let run = run_detailed(
        &config,
        &channel,
        args.link.bits,
        &args.link.receiver.options(),
    )?;
    let r = &run.report;
    eprintln!(
        "m={} beta={} alpha={} snr_db={} channel={}: ber={:.3e} errors={} bits={} spec_eff={:.3} fec={}",
        config.m(),
        config.beta(),
        config.alpha(),
        snr.map_or("inf".into(), |s| s.to_string()),
        args.link.channel,
        r.aggregate_ber(),
        r.total_errors(),
        r.bits_tested(),
        r.spectral_efficiency(),
        if r.all_pass() { "pass" } else { "fail" },
    );
    let mut out = open_out(args.out.as_deref())?;
    write_report(r, &mut out)?;
    out.flush()?;
    if let Some(path) = &args.dump_waveform {
        write_waveform(&run.transmitted, BufWriter::new(File::create(path)?))?;
    }
    if let Some(path) = &args.dump_constellation {
        write_constellation(&run.received, BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<bool> {
    let base = match &args.config {
        Some(p) => ConfigFile::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => ConfigFile::default(),
    }
    .to_config()?;
    let alpha = args
        .alpha
        .unwrap_or_else(|| (0..=10).map(|i| i as f64 * 0.05).collect());
    let mut plan = SweepPlan::new(args.m, args.beta, alpha, args.snr_db);
    plan.bits_per_subcarrier = args.bits;
    plan.seed = args.seed.unwrap_or(base.seed());
    plan.channel = args.channel;
    plan.channel_rate_hz = args.channel_rate_hz;
    plan.receiver = args.receiver.options();
    plan.qam_order = args.qam_order.unwrap_or(base.qam_order());
    plan.bandwidth_hz = args.bandwidth_hz.unwrap_or(base.bandwidth_hz());
    plan.span_symbols = args.span_symbols.unwrap_or(base.span_symbols());
    plan.output = args.out;
    plan.validate()?;
    let workers = args.workers.unwrap_or_else(rayon::current_num_threads);
    eprintln!("{} points, {} workers", plan.point_count(), workers);

    let summary = run_sweep(&plan, workers)?;
    for o in &summary.outcomes {
        eprintln!("{}", o.summary());
    }
    if plan.output.is_none() {
        let mut out = io::stdout().lock();
        out.write_all(summary.csv.as_bytes())?;
        out.flush()?;
    }
    let failed = summary.failed();
    if failed > 0 {
        eprintln!("{failed} of {} points failed", summary.outcomes.len());
    }
    Ok(failed == 0)
}

fn cmd_filters_dump(modem: ModemArgs, out: Option<PathBuf>) -> Result<()> {
    let config = modem.resolve()?;
    let bank = build_tx_bank(&config)?;
    eprintln!(
        "m={} beta={} alpha={}: {} responses of {} taps at {} Hz",
        config.m(),
        config.beta(),
        config.alpha(),
        bank.response_count(),
        bank.tap_count(),
        bank.sample_rate_hz()
    );
    let mut w = open_out(out.as_deref())?;
    write_filter_bank(&bank, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<()> {
    let config = args.modem.resolve()?;
    let wave = if args.received {
        let snr = finite(args.snr_db);
        let channel = build_channel(&args.channel, &config, snr, None)?;
        let payload = generate_payload(&config, args.bits)?;
        let tx = modulate(&payload.frame, &build_tx_bank(&config)?)?;
        channel.apply(&tx)?
    } else {
        if args.snr_db.is_some() {
            bail!("--snr-db needs --received");
        }
        let ideal = build_channel(&ChannelSpec::Ideal, &config, None, None)?;
        run_detailed(&config, &ideal, args.bits, &ReceiverOptions::default())?.transmitted
    };
    let spectrum = spectrum_estimate(&wave, args.segments)?;
    eprintln!(
        "m={} beta={} alpha={}: {} samples, {} bins",
        config.m(),
        config.beta(),
        config.alpha(),
        wave.len(),
        spectrum.len()
    );
    let mut w = open_out(args.out.as_deref())?;
    write_spectrum(&spectrum, &mut w)?;
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Filters {
            action: FiltersAction::Dump { modem, out },
        } => cmd_filters_dump(modem, out).map(|_| true),
        Command::Spectrum(a) => cmd_spectrum(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
