//! TOML scenario files.
//!
//! ```toml
//! modulation = "bpsk"          # or "qpsk"; optional, defaults to bpsk
//!
//! [power]
//! rho_t_db = 20.0              # total transmit SNR P_T/N0 in dB
//! alpha = 0.2                  # power allocation, (0, 0.5)
//! beta = 0.5                   # power sharing, (0, 1)
//!
//! [channel.sr]
//! m = 1.0
//! omega = 2.0
//! [channel.sd]
//! m = 1.0
//! omega = 1.0
//! [channel.rd]
//! m = 1.0
//! omega = 2.0
//!
//! # optional: an externally supplied (alpha, beta) operating point used by
//! # comparison sweeps
//! [comparison]
//! alpha = 0.1
//! beta = 0.5
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelParams, Modulation, PowerConfig};

/// A fixed `(alpha, beta)` pair supplied from outside the optimiser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitPoint {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub modulation: Modulation,
    pub power: PowerConfig,
    pub channel: ChannelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<SplitPoint>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(cmp) = cfg.comparison {
            // same validity box as the power configuration itself
            cfg.power
                .with_split(cmp.alpha, cmp.beta)
                .map_err(|e| Error::Config(format!("[comparison]: {e}")))?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always representable in TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
modulation = "qpsk"

[power]
rho_t_db = 20.0
alpha = 0.2
beta = 0.5

[channel.sr]
m = 1.0
omega = 2.0
[channel.sd]
m = 1.5
omega = 1.0
[channel.rd]
m = 2
omega = 2.0
"#;

    #[test]
    fn parses_documented_schema() {
        let cfg = ScenarioConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.modulation, Modulation::Qpsk);
        assert_eq!(cfg.channel.sd.m(), 1.5);
        assert_eq!(cfg.channel.rd.m(), 2.0);
        assert_eq!(cfg.power.beta(), 0.5);
        assert!(cfg.comparison.is_none());
        let again = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn reports_offending_field() {
        let bad = SAMPLE.replace("alpha = 0.2", "alpha = 0.7");
        let err = ScenarioConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(err.contains("alpha"), "{err}");
        let bad = SAMPLE.replace("m = 1.5", "m = 0.2");
        let err = ScenarioConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(err.contains("shape"), "{err}");
        let bad = SAMPLE.replace("[power]", "[power]\nextra = 1");
        assert!(ScenarioConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn comparison_point_is_validated() {
        let ok = format!("{SAMPLE}\n[comparison]\nalpha = 0.1\nbeta = 0.5\n");
        assert_eq!(
            ScenarioConfig::from_toml_str(&ok).unwrap().comparison,
            Some(SplitPoint { alpha: 0.1, beta: 0.5 })
        );
        let bad = format!("{SAMPLE}\n[comparison]\nalpha = 0.6\nbeta = 0.5\n");
        assert!(ScenarioConfig::from_toml_str(&bad).is_err());
    }
}
