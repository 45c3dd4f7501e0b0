use std::io::Write;

use nmcap_core::{Complex, FilterBank, RunReport, SymbolFrame};

use super::Result;

/// Column order of the per-subcarrier report.
pub const REPORT_HEADER: &str =
    "m,qam_order,beta,alpha,snr_db,subcarrier,ber,floor_flag,evm_pct,spec_eff,fec_pass,bits_tested";

/// Shortest representation that round-trips; `inf`/`-inf`/`nan` for
/// non-finite values.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x}")
    }
}

fn flag(b: bool) -> u8 {
    u8::from(b)
}

/// One CSV line (without newline) per subcarrier. The `ber` column carries
/// the presented value: the floor when `floor_flag` is 1, which only happens
/// for an error-free subcarrier.
pub(crate) fn report_rows(report: &RunReport) -> Vec<String> {
    let c = report.config();
    let snr = report
        .snr_db()
        .map_or_else(|| "inf".to_string(), format_float);
    let spec_eff = format_float(report.spectral_efficiency());
    report
        .subcarriers()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let v = s.verdict();
            format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                c.m(),
                c.qam_order(),
                format_float(c.beta()),
                format_float(c.alpha()),
                snr,
                i + 1,
                format_float(RunReport::display_ber(s.ber(), v.floor)),
                flag(v.floor),
                format_float(s.evm_pct),
                spec_eff,
                flag(v.pass),
                s.bits,
            )
        })
        .collect()
}

pub fn write_report<W: Write>(report: &RunReport, mut out: W) -> Result<()> {
    let mut text = String::from(REPORT_HEADER);
    text.push('\n');
    for row in report_rows(report) {
        text.push_str(&row);
        text.push('\n');
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// Every tap of every response as `subcarrier,branch,sample_index,amplitude`.
pub fn write_filter_bank<W: Write>(bank: &FilterBank, mut out: W) -> Result<()> {
    let mut text = String::from("subcarrier,branch,sample_index,amplitude\n");
    for (n, pair) in bank.pairs().iter().enumerate() {
        for (branch, resp) in [("I", &pair.in_phase), ("Q", &pair.quadrature)] {
            for (k, a) in resp.taps().iter().enumerate() {
                text.push_str(&format!("{},{branch},{k},{}\n", n + 1, format_float(*a)));
            }
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// Raw received symbols as `subcarrier,real,imag`.
pub fn write_constellation<W: Write>(frame: &SymbolFrame, mut out: W) -> Result<()> {
    let mut text = String::from("subcarrier,real,imag\n");
    for (n, symbols) in frame.subcarriers().iter().enumerate() {
        for z in symbols {
            let Complex { re, im } = *z;
            text.push_str(&format!(
                "{},{},{}\n",
                n + 1,
                format_float(re),
                format_float(im)
            ));
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn write_spectrum<W: Write>(spectrum: &[(f64, f64)], mut out: W) -> Result<()> {
    let mut text = String::from("freq_hz,power_db\n");
    for (f, p) in spectrum {
        text.push_str(&format!("{},{}\n", format_float(*f), format_float(*p)));
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}
