//! Domain value objects: link fading, channel set, power split and results.
//!
//! Every constructor validates its fields, so a value that exists is in range.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three links of the relaying topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkId {
    /// source → relay
    Sr,
    /// source → destination
    Sd,
    /// relay → destination
    Rd,
}

impl LinkId {
    pub const ALL: [LinkId; 3] = [LinkId::Sr, LinkId::Sd, LinkId::Rd];

    pub fn name(self) -> &'static str {
        match self {
            LinkId::Sr => "sr",
            LinkId::Sd => "sd",
            LinkId::Rd => "rd",
        }
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Nakagami-m parameters of one link: shape `m ≥ 0.5` and spread `Ω = E[|h|²] > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkFading {
    m: f64,
    omega: f64,
}

impl LinkFading {
    pub fn new(m: f64, omega: f64) -> Result<Self> {
        if !(m >= 0.5 && m.is_finite()) {
            return Err(Error::validation("m", format!("shape must be >= 0.5, got {m}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::validation("omega", format!("spread must be > 0, got {omega}")));
        }
        Ok(Self { m, omega })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

impl<'de> Deserialize<'de> for LinkFading {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            m: f64,
            omega: f64,
        }
        let raw = Raw::deserialize(d)?;
        LinkFading::new(raw.m, raw.omega).map_err(serde::de::Error::custom)
    }
}

/// Fading parameters of all three links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub sr: LinkFading,
    pub sd: LinkFading,
    pub rd: LinkFading,
}

impl ChannelParams {
    pub fn new(sr: LinkFading, sd: LinkFading, rd: LinkFading) -> Self {
        Self { sr, sd, rd }
    }

    /// Builds from `(m, Ω)` triples ordered sr, sd, rd.
    pub fn from_arrays(m: [f64; 3], omega: [f64; 3]) -> Result<Self> {
        Ok(Self {
            sr: LinkFading::new(m[0], omega[0])?,
            sd: LinkFading::new(m[1], omega[1])?,
            rd: LinkFading::new(m[2], omega[2])?,
        })
    }

    /// Same shape and spread on every link.
    pub fn uniform(m: f64, omega: f64) -> Result<Self> {
        Self::from_arrays([m; 3], [omega; 3])
    }

    pub fn link(&self, id: LinkId) -> LinkFading {
        match id {
            LinkId::Sr => self.sr,
            LinkId::Sd => self.sd,
            LinkId::Rd => self.rd,
        }
    }

    pub fn shapes(&self) -> [f64; 3] {
        [self.sr.m, self.sd.m, self.rd.m]
    }

    pub fn spreads(&self) -> [f64; 3] {
        [self.sr.omega, self.sd.omega, self.rd.omega]
    }
}

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Total SNR plus the power-sharing (`beta`) and power-allocation (`alpha`) split.
///
/// `alpha` is the share of source power on the weak symbol `x₁` and must lie in
/// `(0, 0.5)`; `beta` is the share of the total budget spent at the source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerConfig {
    rho_t_db: f64,
    alpha: f64,
    beta: f64,
}

impl PowerConfig {
    pub fn new(rho_t_db: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !rho_t_db.is_finite() {
            return Err(Error::validation("rho_t_db", format!("must be finite, got {rho_t_db}")));
        }
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(Error::validation("alpha", format!("must lie in (0, 0.5), got {alpha}")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::validation("beta", format!("must lie in (0, 1), got {beta}")));
        }
        let cfg = Self {
            rho_t_db,
            alpha,
            beta,
        };
        let (rho_s, rho_r) = cfg.link_snrs();
        if !(rho_s > 0.0 && rho_r > 0.0 && rho_s.is_finite() && rho_r.is_finite()) {
            return Err(Error::validation(
                "rho_t_db",
                format!("derived link SNRs must be positive and finite, got ({rho_s}, {rho_r})"),
            ));
        }
        Ok(cfg)
    }

    pub fn rho_t_db(&self) -> f64 {
        self.rho_t_db
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rho_t_linear(&self) -> f64 {
        db_to_linear(self.rho_t_db)
    }

    /// `(ρ_s, ρ_r) = (β·ρ_T, (1 − β)·ρ_T)` in linear units.
    pub fn link_snrs(&self) -> (f64, f64) {
        let total = self.rho_t_linear();
        (self.beta * total, (1.0 - self.beta) * total)
    }

    pub fn with_split(&self, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(self.rho_t_db, alpha, beta)
    }

    pub fn with_rho(&self, rho_t_db: f64) -> Result<Self> {
        Self::new(rho_t_db, self.alpha, self.beta)
    }
}

impl<'de> Deserialize<'de> for PowerConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            rho_t_db: f64,
            alpha: f64,
            beta: f64,
        }
        let raw = Raw::deserialize(d)?;
        PowerConfig::new(raw.rho_t_db, raw.alpha, raw.beta).map_err(serde::de::Error::custom)
    }
}

/// Link SNRs derived from a power configuration.
pub fn derive_link_snrs(p: &PowerConfig) -> (f64, f64) {
    p.link_snrs()
}

/// Constellation used for both superimposed symbols.
///
/// Only BPSK has a closed-form error analysis; QPSK is simulation-only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    #[default]
    Bpsk,
    Qpsk,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> u64 {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qpsk => "qpsk",
        })
    }
}

/// Component and end-to-end bit error probabilities of one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BepReport {
    /// strong symbol `x₂` at the destination (direct link)
    pub p_x2: f64,
    /// weak symbol `x₁` at the relay after SIC
    pub p_x1_sr: f64,
    /// relay → destination hop for `x₁`
    pub p_x1_rd: f64,
    /// `x₁` end to end
    pub p_x1: f64,
    pub abep: f64,
}

/// Monte Carlo error-rate estimate with a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerEstimate {
    pub ber: f64,
    /// transmitted bits of the stream
    pub trials: u64,
    pub ci95_halfwidth: f64,
    pub seed: u64,
}

impl BerEstimate {
    pub fn new(ber: f64, trials: u64, seed: u64) -> Self {
        let ci95_halfwidth = if trials == 0 {
            f64::INFINITY
        } else {
            1.96 * (ber * (1.0 - ber) / trials as f64).sqrt()
        };
        Self {
            ber,
            trials,
            ci95_halfwidth,
            seed,
        }
    }

    pub fn from_counts(errors: u64, trials: u64, seed: u64) -> Self {
        let ber = if trials == 0 {
            0.0
        } else {
            errors as f64 / trials as f64
        };
        Self::new(ber, trials, seed)
    }
}
