use std::path::Path;

use nmcap_core::ChannelModel;

use super::{syntax, FormatError, Result};

const HEADER: &str = "freq_hz,mag_db";

/// Parses a `freq_hz,mag_db` frequency-response table.
pub fn parse_response_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| syntax(1, e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != ["freq_hz", "mag_db"] {
        return Err(syntax(1, format!("expected header `{HEADER}`")));
    }
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for record in reader.deserialize::<(f64, f64)>() {
        let (f, db) = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            syntax(line, e.to_string())
        })?;
        let line = rows.len() + 2;
        if !f.is_finite() || !db.is_finite() {
            return Err(syntax(line, "non-finite value"));
        }
        if rows.last().is_some_and(|(prev, _)| f <= *prev) {
            return Err(syntax(line, "frequencies must be strictly ascending"));
        }
        rows.push((f, db));
    }
    if rows.len() < 2 {
        return Err(syntax(1, "need at least two rows"));
    }
    Ok(rows)
}

/// Channel model from a measured magnitude response, assuming linear phase.
pub fn measured_response_from_csv(
    path: &Path,
    sample_rate_hz: f64,
    taps: usize,
) -> Result<ChannelModel> {
    let rows = parse_response_csv(&std::fs::read_to_string(path)?)?;
    ChannelModel::from_magnitude_points(&rows, sample_rate_hz, taps).map_err(FormatError::from)
}
