//! On-disk formats: the key=value modem configuration, measured frequency
//! responses, binary waveform dumps, and the CSV reports.

mod config_file;
pub(crate) mod report;
mod response;
mod waveform;

pub use config_file::ConfigFile;
pub use report::{
    format_float, write_constellation, write_filter_bank, write_report, write_spectrum,
    REPORT_HEADER,
};
pub use response::{measured_response_from_csv, parse_response_csv};
pub use waveform::{read_waveform, write_waveform, WAVEFORM_MAGIC};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("not a waveform dump (bad magic)")]
    BadMagic,

    #[error(transparent)]
    Modem(#[from] nmcap_core::Error),
}

pub type Result<T> = std::result::Result<T, FormatError>;

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}
