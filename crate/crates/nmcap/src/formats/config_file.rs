use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use nmcap_core::{ConfigBuilder, ModemConfig};

use super::{syntax, FormatError, Result};

/// Contents of a `key=value` configuration file. Every key is optional; the
/// file only overrides what it names.
///
/// ```text
/// # 10-band NM-CAP at 10% compression
/// m = 10
/// qam_order = 4
/// beta = 0.1
/// alpha = 0.1
/// bandwidth_hz = 3e6
/// span_symbols = 10
/// seed = 1
/// ```
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub m: Option<usize>,
    pub qam_order: Option<u32>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub span_symbols: Option<usize>,
    pub seed: Option<u64>,
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| syntax(line, format!("invalid value `{value}` for `{key}`")))
}

fn set<T>(slot: &mut Option<T>, line: usize, key: &str, value: T) -> Result<()> {
    if slot.is_some() {
        return Err(syntax(line, format!("duplicate key `{key}`")));
    }
    *slot = Some(value);
    Ok(())
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| syntax(line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "m" => set(&mut cfg.m, line, key, parse_value(line, key, value)?)?,
                "qam_order" => set(
                    &mut cfg.qam_order,
                    line,
                    key,
                    parse_value(line, key, value)?,
                )?,
                "beta" => set(&mut cfg.beta, line, key, parse_value(line, key, value)?)?,
                "alpha" => set(&mut cfg.alpha, line, key, parse_value(line, key, value)?)?,
                "bandwidth_hz" => set(
                    &mut cfg.bandwidth_hz,
                    line,
                    key,
                    parse_value(line, key, value)?,
                )?,
                "span_symbols" => set(
                    &mut cfg.span_symbols,
                    line,
                    key,
                    parse_value(line, key, value)?,
                )?,
                "seed" => set(&mut cfg.seed, line, key, parse_value(line, key, value)?)?,
                other => return Err(syntax(line, format!("unknown key `{other}`"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies the keys present in the file on top of `builder`.
    pub fn apply(&self, mut builder: ConfigBuilder) -> ConfigBuilder {
        if let Some(v) = self.m {
            builder = builder.m(v);
        }
        if let Some(v) = self.qam_order {
            builder = builder.qam_order(v);
        }
        if let Some(v) = self.beta {
            builder = builder.beta(v);
        }
        if let Some(v) = self.alpha {
            builder = builder.alpha(v);
        }
        if let Some(v) = self.bandwidth_hz {
            builder = builder.bandwidth_hz(v);
        }
        if let Some(v) = self.span_symbols {
            builder = builder.span_symbols(v);
        }
        if let Some(v) = self.seed {
            builder = builder.seed(v);
        }
        builder
    }

    /// Builds a configuration from the file alone, defaults filling the gaps.
    pub fn to_config(&self) -> std::result::Result<ModemConfig, FormatError> {
        Ok(self.apply(ModemConfig::builder()).build()?)
    }

    /// Serializes every key of `config`.
    pub fn render(config: &ModemConfig) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "m = {}", config.m());
        let _ = writeln!(out, "qam_order = {}", config.qam_order());
        let _ = writeln!(out, "beta = {}", config.beta());
        let _ = writeln!(out, "alpha = {}", config.alpha());
        let _ = writeln!(out, "bandwidth_hz = {}", config.bandwidth_hz());
        let _ = writeln!(out, "span_symbols = {}", config.span_symbols());
        let _ = writeln!(out, "seed = {}", config.seed());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys_with_comments() {
        let text = "# header\nm = 2\nqam_order=16 # trailing\n\nbeta = 0.3\nalpha = 0.2\nbandwidth_hz = 3e6\nspan_symbols = 8\nseed = 42\n";
        let f = ConfigFile::parse(text).unwrap();
        let c = f.to_config().unwrap();
        assert_eq!(c.m(), 2);
        assert_eq!(c.qam_order(), 16);
        assert_eq!(c.beta(), 0.3);
        assert_eq!(c.alpha(), 0.2);
        assert_eq!(c.bandwidth_hz(), 3e6);
        assert_eq!(c.span_symbols(), 8);
        assert_eq!(c.seed(), 42);
    }

    #[test]
    fn render_round_trips() {
        let c = ModemConfig::builder()
            .m(3)
            .beta(0.5)
            .alpha(0.25)
            .seed(9)
            .build()
            .unwrap();
        let back = ConfigFile::parse(&ConfigFile::render(&c))
            .unwrap()
            .to_config()
            .unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(ConfigFile::parse("m 10").is_err());
        assert!(ConfigFile::parse("gamma = 1").is_err());
        assert!(ConfigFile::parse("m = ten").is_err());
        assert!(ConfigFile::parse("m = 1\nm = 2").is_err());
        let err = ConfigFile::parse("\n\nbeta = x").unwrap_err();
        assert!(err.to_string().starts_with("line 3"));
    }

    #[test]
    fn invalid_values_fail_at_build() {
        let f = ConfigFile::parse("alpha = 1.5").unwrap();
        assert!(f.to_config().is_err());
    }
}
