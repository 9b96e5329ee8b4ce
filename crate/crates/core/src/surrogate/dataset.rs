//! Labelled training data: channel profiles paired with their full-search optimum.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::ChannelParams;
use crate::optimizer::{grid_search_analytic, GridSpec};

/// CSV header of dataset files.
pub const DATASET_HEADER: &str = "m_sr,m_sd,m_rd,omega_sr,omega_sd,omega_rd,rho_t_db,alpha_star,beta_star";

/// Which features the network sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InputMode {
    /// the six fading parameters; one model per total SNR
    #[serde(rename = "6in")]
    Channel,
    /// the fading parameters plus the total SNR in dB
    #[serde(rename = "7in")]
    ChannelAndSnr,
}

impl InputMode {
    pub fn n_inputs(self) -> usize {
        match self {
            InputMode::Channel => 6,
            InputMode::ChannelAndSnr => 7,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InputMode::Channel => "6in",
            InputMode::ChannelAndSnr => "7in",
        }
    }
}

impl fmt::Display for InputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InputMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "6in" => Ok(InputMode::Channel),
            "7in" => Ok(InputMode::ChannelAndSnr),
            other => Err(Error::validation("mode", format!("expected 6in or 7in, got {other:?}"))),
        }
    }
}

/// Feature vector of a channel profile, in file column order.
pub fn features(ch: &ChannelParams, rho_t_db: Option<f64>) -> Vec<f64> {
    let mut f = Vec::with_capacity(7);
    f.extend(ch.shapes());
    f.extend(ch.spreads());
    f.extend(rho_t_db);
    f
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetRecord {
    pub channel: ChannelParams,
    pub rho_t_db: f64,
    pub alpha_star: f64,
    pub beta_star: f64,
}

impl DatasetRecord {
    pub fn features(&self, mode: InputMode) -> Vec<f64> {
        match mode {
            InputMode::Channel => features(&self.channel, None),
            InputMode::ChannelAndSnr => features(&self.channel, Some(self.rho_t_db)),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    m_sr: f64,
    m_sd: f64,
    m_rd: f64,
    omega_sr: f64,
    omega_sd: f64,
    omega_rd: f64,
    rho_t_db: f64,
    alpha_star: f64,
    beta_star: f64,
}

impl From<&DatasetRecord> for CsvRow {
    fn from(r: &DatasetRecord) -> Self {
        let [m_sr, m_sd, m_rd] = r.channel.shapes();
        let [omega_sr, omega_sd, omega_rd] = r.channel.spreads();
        Self {
            m_sr,
            m_sd,
            m_rd,
            omega_sr,
            omega_sd,
            omega_rd,
            rho_t_db: r.rho_t_db,
            alpha_star: r.alpha_star,
            beta_star: r.beta_star,
        }
    }
}

impl CsvRow {
    fn into_record(self) -> Result<DatasetRecord> {
        let channel = ChannelParams::from_arrays(
            [self.m_sr, self.m_sd, self.m_rd],
            [self.omega_sr, self.omega_sd, self.omega_rd],
        )?;
        if !(self.alpha_star > 0.0 && self.alpha_star < 0.5 && self.beta_star > 0.0 && self.beta_star < 1.0) {
            return Err(Error::Dataset(format!(
                "label ({}, {}) outside the valid power split",
                self.alpha_star, self.beta_star
            )));
        }
        Ok(DatasetRecord {
            channel,
            rho_t_db: self.rho_t_db,
            alpha_star: self.alpha_star,
            beta_star: self.beta_star,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub records: Vec<DatasetRecord>,
}

impl Dataset {
    pub fn new(records: Vec<DatasetRecord>) -> Self {
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records whose total SNR equals `rho_t_db`.
    pub fn at_snr(&self, rho_t_db: f64) -> Dataset {
        Dataset::new(self.records.iter().filter(|r| r.rho_t_db == rho_t_db).copied().collect())
    }

    /// Distinct total SNR values in order of first appearance.
    pub fn snr_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.rho_t_db) {
                out.push(r.rho_t_db);
            }
        }
        out
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.records.is_empty() {
            w.write_record(DATASET_HEADER.split(','))
                .map_err(|e| Error::Dataset(e.to_string()))?;
        }
        for r in &self.records {
            w.serialize(CsvRow::from(r)).map_err(|e| Error::Dataset(e.to_string()))?;
        }
        w.into_inner().map_err(|e| Error::Dataset(e.to_string()))
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::Dataset(e.to_string()))?;
        if header.iter().collect::<Vec<_>>().join(",") != DATASET_HEADER {
            return Err(Error::Dataset(format!("expected header {DATASET_HEADER}")));
        }
        let mut records = Vec::new();
        for (line, row) in rdr.deserialize::<CsvRow>().enumerate() {
            let row = row.map_err(|e| Error::Dataset(format!("row {}: {e}", line + 1)))?;
            records.push(row.into_record().map_err(|e| Error::Dataset(format!("row {}: {e}", line + 1)))?);
        }
        Ok(Self { records })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    /// SHA-256 of the CSV serialization, hex encoded.
    pub fn content_hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_csv_bytes()?)))
    }
}

/// Parameter grid swept when labelling a dataset.
///
/// Every link takes every value of `shapes` and `spreads` independently, so
/// the full grid holds `|shapes|³·|spreads|³·|rho_t_db|` points. With
/// `max_records` set, a seeded uniform subset of that size is labelled instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelGrid {
    pub shapes: Vec<f64>,
    pub spreads: Vec<f64>,
    pub rho_t_db: Vec<f64>,
    pub max_records: Option<usize>,
    pub seed: u64,
}

impl Default for ChannelGrid {
    /// m ∈ {0.5, 1, …, 4}, Ω ∈ {1, …, 10}, ρ_T ∈ {0, 5, …, 20} dB.
    fn default() -> Self {
        Self {
            shapes: (1..=8).map(|k| 0.5 * k as f64).collect(),
            spreads: (1..=10).map(f64::from).collect(),
            rho_t_db: (0..=4).map(|k| 5.0 * k as f64).collect(),
            max_records: None,
            seed: 0,
        }
    }
}

impl ChannelGrid {
    pub fn size(&self) -> usize {
        self.shapes.len().pow(3) * self.spreads.len().pow(3) * self.rho_t_db.len()
    }

    pub fn with_max_records(mut self, n: usize, seed: u64) -> Self {
        self.max_records = Some(n);
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.size() == 0 {
            return Err(Error::domain("generate_dataset", "channel grid is empty"));
        }
        if self.max_records == Some(0) {
            return Err(Error::domain("generate_dataset", "max_records must be at least 1"));
        }
        if let Some(&bad) = self.spreads.iter().find(|&&o| !(o > 0.0 && o.is_finite())) {
            return Err(Error::domain("generate_dataset", format!("spread values must be > 0, got {bad}")));
        }
        if let Some(&bad) = self.shapes.iter().find(|&&m| !(m >= 0.5 && m.is_finite())) {
            return Err(Error::domain("generate_dataset", format!("shape values must be >= 0.5, got {bad}")));
        }
        if let Some(&bad) = self.rho_t_db.iter().find(|r| !r.is_finite()) {
            return Err(Error::domain("generate_dataset", format!("SNR values must be finite, got {bad}")));
        }
        Ok(())
    }

    /// Grid point by flat index; SNR varies slowest, then shapes, then spreads.
    fn point(&self, mut idx: usize) -> Result<(ChannelParams, f64)> {
        let mut digit = |n: usize| {
            let d = idx % n;
            idx /= n;
            d
        };
        let (ns, no) = (self.shapes.len(), self.spreads.len());
        let o_rd = self.spreads[digit(no)];
        let o_sd = self.spreads[digit(no)];
        let o_sr = self.spreads[digit(no)];
        let m_rd = self.shapes[digit(ns)];
        let m_sd = self.shapes[digit(ns)];
        let m_sr = self.shapes[digit(ns)];
        let rho = self.rho_t_db[digit(self.rho_t_db.len())];
        Ok((ChannelParams::from_arrays([m_sr, m_sd, m_rd], [o_sr, o_sd, o_rd])?, rho))
    }

    /// Flat indices that will be labelled, ascending.
    fn selected(&self) -> Vec<usize> {
        let n = self.size();
        match self.max_records {
            Some(k) if k < n => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut idx = rand::seq::index::sample(&mut rng, n, k).into_vec();
                idx.sort_unstable();
                idx
            }
            _ => (0..n).collect(),
        }
    }
}

/// Labels every selected grid point with its full-search optimum.
pub fn generate_dataset(grid: &ChannelGrid, opt_grid: &GridSpec) -> Result<Dataset> {
    grid.validate()?;
    let records = grid
        .selected()
        .into_par_iter()
        .map(|idx| {
            let (channel, rho_t_db) = grid.point(idx)?;
            let best = grid_search_analytic(&channel, rho_t_db, opt_grid)?;
            Ok(DatasetRecord {
                channel,
                rho_t_db,
                alpha_star: best.alpha_star,
                beta_star: best.beta_star,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { records })
}

/// Seeded shuffle into 90% training and 10% test records.
pub fn split_dataset(ds: &Dataset, seed: u64) -> Result<(Dataset, Dataset)> {
    let n = ds.len();
    if n < 10 {
        return Err(Error::domain("split_dataset", format!("need at least 10 records, got {n}")));
    }
    let n_test = ((n as f64) * 0.1).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |ix: &[usize]| Dataset::new(ix.iter().map(|&i| ds.records[i]).collect());
    Ok((pick(&order[n_test..]), pick(&order[..n_test])))
}
