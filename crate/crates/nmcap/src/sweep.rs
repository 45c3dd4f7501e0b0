use std::path::{Path, PathBuf};

use nmcap_core::{ModemConfig, RunReport};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::formats::{format_float, report::report_rows, FormatError, REPORT_HEADER};
use crate::run::{build_channel, run_with, ChannelSpec, ReceiverOptions};
use crate::seed::derive_seed;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("sweep list `{0}` is empty")]
    EmptyList(&'static str),
    #[error("bits per subcarrier must be positive")]
    NoBits,
    #[error("worker count must be positive")]
    NoWorkers,
}

/// Cartesian parameter grid. Points are ordered by m, then β, then α, then
/// SNR; an infinite SNR means a noiseless channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPlan {
    pub m_values: Vec<usize>,
    pub beta_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub snr_db_values: Vec<f64>,
    pub bits_per_subcarrier: usize,
    pub seed: u64,
    #[serde(serialize_with = "as_display")]
    pub channel: ChannelSpec,
    pub channel_rate_hz: Option<f64>,
    pub qam_order: u32,
    pub bandwidth_hz: f64,
    pub span_symbols: usize,
    pub receiver: ReceiverOptions,
    pub output: Option<PathBuf>,
}

fn as_display<S: serde::Serializer>(c: &ChannelSpec, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(c)
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub m: usize,
    pub beta: f64,
    pub alpha: f64,
    pub snr_db: f64,
}

impl SweepPlan {
    /// Plan over the given grid with the remaining settings at their defaults.
    pub fn new(m: Vec<usize>, beta: Vec<f64>, alpha: Vec<f64>, snr_db: Vec<f64>) -> Self {
        let base = ModemConfig::default();
        Self {
            m_values: m,
            beta_values: beta,
            alpha_values: alpha,
            snr_db_values: snr_db,
            bits_per_subcarrier: 100_000,
            seed: base.seed(),
            channel: ChannelSpec::Ideal,
            channel_rate_hz: None,
            qam_order: base.qam_order(),
            bandwidth_hz: base.bandwidth_hz(),
            span_symbols: base.span_symbols(),
            receiver: ReceiverOptions::default(),
            output: None,
        }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        for (name, empty) in [
            ("m", self.m_values.is_empty()),
            ("beta", self.beta_values.is_empty()),
            ("alpha", self.alpha_values.is_empty()),
            ("snr_db", self.snr_db_values.is_empty()),
        ] {
            if empty {
                return Err(PlanError::EmptyList(name));
            }
        }
        if self.bits_per_subcarrier == 0 {
            return Err(PlanError::NoBits);
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.m_values.len()
            * self.beta_values.len()
            * self.alpha_values.len()
            * self.snr_db_values.len()
    }

    /// Subcarrier rows a fully successful sweep writes.
    pub fn row_count(&self) -> usize {
        self.points().iter().map(|p| p.m).sum()
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::with_capacity(self.point_count());
        for &m in &self.m_values {
            for &beta in &self.beta_values {
                for &alpha in &self.alpha_values {
                    for &snr_db in &self.snr_db_values {
                        out.push(SweepPoint {
                            index: out.len(),
                            m,
                            beta,
                            alpha,
                            snr_db,
                        });
                    }
                }
            }
        }
        out
    }

    /// Configuration of one point; its seed derives from the master seed and
    /// the point index only.
    pub fn config_for(&self, p: &SweepPoint) -> nmcap_core::Result<ModemConfig> {
        ModemConfig::builder()
            .m(p.m)
            .qam_order(self.qam_order)
            .beta(p.beta)
            .alpha(p.alpha)
            .bandwidth_hz(self.bandwidth_hz)
            .span_symbols(self.span_symbols)
            .seed(derive_seed(self.seed, p.index as u64))
            .build()
    }

    fn run_point(&self, p: &SweepPoint) -> Result<RunReport, FormatError> {
        let config = self.config_for(p)?;
        let channel = build_channel(&self.channel, &config, Some(p.snr_db), self.channel_rate_hz)?;
        run_with(&config, &channel, self.bits_per_subcarrier, &self.receiver)
    }
}

/// Result of one grid point.
#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub point: SweepPoint,
    pub result: Result<RunReport, String>,
}

impl PointOutcome {
    /// One-line human summary.
    pub fn summary(&self) -> String {
        let p = &self.point;
        let head = format!(
            "point {} m={} beta={} alpha={} snr_db={}",
            p.index,
            p.m,
            format_float(p.beta),
            format_float(p.alpha),
            format_float(p.snr_db)
        );
        match &self.result {
            Ok(r) => format!(
                "{head}: ber={:.3e} errors={} bits={} fec={}",
                r.aggregate_ber(),
                r.total_errors(),
                r.bits_tested(),
                if r.all_pass() { "pass" } else { "fail" }
            ),
            Err(e) => format!("{head}: error: {e}"),
        }
    }
}

/// Header of the sweep CSV: the report columns between a leading point
/// index and a trailing error marker.
pub fn sweep_header() -> String {
    format!("point,{REPORT_HEADER},error")
}

fn sanitize(msg: &str) -> String {
    msg.chars()
        .map(|c| match c {
            ',' => ';',
            '\n' | '\r' => ' ',
            c => c,
        })
        .collect()
}

/// Executes every point on a pool of `workers` threads. Outcomes are in
/// point order regardless of scheduling.
pub fn execute(plan: &SweepPlan, workers: usize) -> Result<Vec<PointOutcome>, PlanError> {
    plan.validate()?;
    if workers == 0 {
        return Err(PlanError::NoWorkers);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    let points = plan.points();
    Ok(pool.install(|| {
        points
            .par_iter()
            .map(|p| PointOutcome {
                point: *p,
                result: plan.run_point(p).map_err(|e| e.to_string()),
            })
            .collect()
    }))
}

/// Renders outcomes as the sweep CSV. Failed points produce a single row
/// with the grid coordinates, empty measurement columns and the error.
pub fn render_csv(plan: &SweepPlan, outcomes: &[PointOutcome]) -> String {
    let mut text = sweep_header();
    text.push('\n');
    for o in outcomes {
        let p = &o.point;
        match &o.result {
            Ok(report) => {
                for row in report_rows(report) {
                    text.push_str(&format!("{},{row},\n", p.index));
                }
            }
            Err(e) => text.push_str(&format!(
                "{},{},{},{},{},{},,,,,,,,{}\n",
                p.index,
                p.m,
                plan.qam_order,
                format_float(p.beta),
                format_float(p.alpha),
                format_float(p.snr_db),
                sanitize(e)
            )),
        }
    }
    text
}

#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    generated_unix_s: u64,
    workers: usize,
    points: usize,
    failed_points: Vec<usize>,
    plan: &'a SweepPlan,
}

/// Summary of a completed sweep.
#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub outcomes: Vec<PointOutcome>,
    pub csv: String,
}

impl SweepSummary {
    pub fn failed(&self) -> usize {
        self.outcomes.iter().filter(|o| o.result.is_err()).count()
    }
}

/// Runs the sweep and writes the CSV to `plan.output` together with a
/// `<output>.meta.json` sidecar holding the plan and run metadata.
pub fn run_sweep(plan: &SweepPlan, workers: usize) -> anyhow::Result<SweepSummary> {
    let outcomes = execute(plan, workers)?;
    let csv = render_csv(plan, &outcomes);
    if let Some(path) = &plan.output {
        std::fs::write(path, &csv)?;
        let sidecar = Sidecar {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            generated_unix_s: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            workers,
            points: outcomes.len(),
            failed_points: outcomes
                .iter()
                .filter(|o| o.result.is_err())
                .map(|o| o.point.index)
                .collect(),
            plan,
        };
        std::fs::write(
            sidecar_path(path),
            serde_json::to_string_pretty(&sidecar)? + "\n",
        )?;
    }
    Ok(SweepSummary { outcomes, csv })
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}
