use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use noma_crs::analytic::BepEvaluator;
use noma_crs::config::ScenarioConfig;
use noma_crs::model::{Modulation, PowerConfig};
use noma_crs::optimizer::{analytic_surface, grid_search_analytic, grid_search_mc, mc_surface, write_surface_csv, GridSpec, OptResult};
use noma_crs::sim::{run_ber, SimSpec};
use noma_crs::surrogate::{generate_dataset, train_models, ChannelGrid, Dataset, ModelSet, TrainConfig};
use noma_crs::Error;

use crate::{AnalyzeArgs, DatasetArgs, Engine, OptimizeArgs, PredictArgs, RhoRange, SimulateArgs, TrainArgs};

pub(crate) const ANALYZE_HEADER: [&str; 6] = ["rho_db", "p_x2", "p_x1_sr", "p_x1_rd", "p_x1", "abep"];
pub(crate) const SIMULATE_HEADER: [&str; 9] =
    ["rho_db", "ber_mc", "ci95", "ber_x1", "ber_x2", "ber_x1_relay", "trials", "seed", "abep"];
pub(crate) const OPTIMIZE_HEADER: [&str; 6] = ["rho_db", "alpha_star", "beta_star", "ber_star", "evaluations", "warning"];
pub(crate) const PREDICT_HEADER: [&str; 8] =
    ["rho_db", "alpha_hat", "beta_hat", "model_rho_db", "weight_mults", "bias_adds", "activations", "total_ops"];
pub(crate) const TRAIN_HEADER: [&str; 10] = [
    "model_file",
    "mode",
    "rho_t_db",
    "train_records",
    "test_records",
    "train_mse",
    "test_mse",
    "regression_r",
    "epochs",
    "stop_reason",
];

pub(crate) fn create_file(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io { path: path.to_path_buf(), source }.into())
}

/// CSV sink writing to a file or stdout.
pub(crate) struct CsvOut {
    w: csv::Writer<Box<dyn Write>>,
    path: Option<PathBuf>,
}

impl CsvOut {
    pub(crate) fn create(path: Option<&Path>, header: &[&str]) -> Result<Self> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(create_file(p)?)),
            None => Box::new(io::stdout().lock()),
        };
        let mut out = Self { w: csv::Writer::from_writer(sink), path: path.map(Path::to_path_buf) };
        out.row(header.iter().map(|s| s.to_string()))?;
        Ok(out)
    }

    pub(crate) fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) -> Result<()> {
        self.w.write_record(fields).with_context(|| self.describe())
    }

    pub(crate) fn finish(mut self) -> Result<()> {
        self.w.flush().with_context(|| self.describe())
    }

    fn describe(&self) -> String {
        match &self.path {
            Some(p) => format!("writing {}", p.display()),
            None => "writing stdout".into(),
        }
    }
}

pub(crate) fn num(v: f64) -> String {
    v.to_string()
}

pub(crate) fn load_config(path: &Path) -> Result<ScenarioConfig> {
    Ok(ScenarioConfig::load(path)?)
}

pub(crate) fn require_bpsk(cfg: &ScenarioConfig, what: &str) -> Result<()> {
    if cfg.modulation != Modulation::Bpsk {
        return Err(Error::Config(format!("{what} needs modulation = \"bpsk\"; QPSK has no closed form")).into());
    }
    Ok(())
}

pub(crate) fn analyze(a: &AnalyzeArgs) -> Result<()> {
    let cfg = load_config(&a.common.config)?;
    require_bpsk(&cfg, "analyze")?;
    let eval = BepEvaluator::new(&cfg.channel)?;
    let mut out = CsvOut::create(a.common.out.as_deref(), &ANALYZE_HEADER)?;
    for rho in a.rho_db.values() {
        let pw = cfg.power.with_rho(rho)?;
        let r = eval.report(&pw)?;
        out.row([rho, r.p_x2, r.p_x1_sr, r.p_x1_rd, r.p_x1, r.abep].map(num))?;
    }
    out.finish()
}

pub(crate) fn simulate(a: &SimulateArgs) -> Result<()> {
    let cfg = load_config(&a.common.config)?;
    let eval = BepEvaluator::new(&cfg.channel)?;
    let mut out = CsvOut::create(a.common.out.as_deref(), &SIMULATE_HEADER)?;
    for rho in a.rho_db.values() {
        let pw = cfg.power.with_rho(rho)?;
        let r = run_ber(&SimSpec::new(cfg.channel, pw, cfg.modulation, a.trials, a.seed)?)?;
        let analytic = match cfg.modulation {
            Modulation::Bpsk => num(eval.report(&pw)?.abep),
            Modulation::Qpsk => String::new(),
        };
        out.row([
            num(rho),
            num(r.e2e.ber),
            num(r.e2e.ci95_halfwidth),
            num(r.x1.ber),
            num(r.x2.ber),
            num(r.x1_relay.ber),
            r.e2e.trials.to_string(),
            a.seed.to_string(),
            analytic,
        ])?;
    }
    out.finish()
}

fn snr_points(given: Option<RhoRange>, cfg: &ScenarioConfig) -> Vec<f64> {
    given.unwrap_or(RhoRange::single(cfg.power.rho_t_db())).values()
}

pub(crate) fn optimize(a: &OptimizeArgs) -> Result<()> {
    let cfg = load_config(&a.common.config)?;
    if a.engine == Engine::Analytic {
        require_bpsk(&cfg, "the analytic engine")?;
    }
    let grid = GridSpec::new(a.grid)?;
    let rhos = snr_points(a.rho_db, &cfg);
    if let Some(path) = &a.surface {
        let [rho] = rhos.as_slice() else {
            bail!(Error::Config("--surface needs exactly one SNR point".into()));
        };
        let surface = match a.engine {
            Engine::Analytic => analytic_surface(&cfg.channel, *rho, &grid)?,
            Engine::Mc => mc_surface(&cfg.channel, *rho, cfg.modulation, &grid, a.trials, a.seed)?,
        };
        let mut w = BufWriter::new(create_file(path)?);
        write_surface_csv(&mut w, &surface)
            .and_then(|_| w.flush())
            .map_err(|source| Error::Io { path: path.clone(), source })?;
    }
    let mut out = CsvOut::create(a.common.out.as_deref(), &OPTIMIZE_HEADER)?;
    for rho in rhos {
        let r: OptResult = match a.engine {
            Engine::Analytic => grid_search_analytic(&cfg.channel, rho, &grid)?,
            Engine::Mc => grid_search_mc(&cfg.channel, rho, cfg.modulation, &grid, a.trials, a.seed)?,
        };
        out.row([
            num(rho),
            num(r.alpha_star),
            num(r.beta_star),
            num(r.ber_star),
            r.evaluations.to_string(),
            r.warning.unwrap_or_default(),
        ])?;
    }
    out.finish()
}

pub(crate) fn dataset(a: &DatasetArgs) -> Result<()> {
    let grid = ChannelGrid {
        shapes: a.m_values.values(),
        spreads: a.omega_values.values(),
        rho_t_db: a.rho_db.values(),
        max_records: a.records,
        seed: a.seed,
    };
    let ds = generate_dataset(&grid, &GridSpec::new(a.grid)?)?;
    ds.write_csv(&a.out)?;
    eprintln!(
        "labelled {} of {} grid points, sha256 {}",
        ds.len(),
        grid.size(),
        ds.content_hash()?
    );
    Ok(())
}

pub(crate) fn train(a: &TrainArgs) -> Result<()> {
    let ds = Dataset::read_csv(&a.data)?;
    let cfg = TrainConfig { seed: a.seed, max_epochs: a.max_epochs, ..TrainConfig::default() };
    let models = train_models(&ds, a.mode.into(), &cfg)?;
    std::fs::create_dir_all(&a.out).map_err(|source| Error::Io { path: a.out.clone(), source })?;
    let mut out = CsvOut::create(None, &TRAIN_HEADER)?;
    for m in &models {
        let path = a.out.join(m.file_name());
        m.save(&path)?;
        let md = &m.metadata;
        out.row([
            path.display().to_string(),
            m.mode().to_string(),
            m.rho_t_db().map(num).unwrap_or_default(),
            md.train_records.to_string(),
            md.test_records.to_string(),
            num(md.train_mse),
            num(md.test_mse),
            num(md.regression_r),
            md.epochs.to_string(),
            md.stop_reason.clone(),
        ])?;
    }
    out.finish()
}

pub(crate) fn load_models(path: &Path) -> Result<ModelSet> {
    ModelSet::load(path).with_context(|| format!("loading surrogate model from {}", path.display()))
}

pub(crate) fn predict(a: &PredictArgs) -> Result<()> {
    let cfg = load_config(&a.common.config)?;
    let set = load_models(&a.model)?;
    let mut out = CsvOut::create(a.common.out.as_deref(), &PREDICT_HEADER)?;
    for rho in snr_points(a.rho_db, &cfg) {
        let p = set.predict(&cfg.channel, rho)?;
        let model = set.select(rho);
        let ops = model.op_count();
        out.row([
            num(rho),
            num(p.alpha),
            num(p.beta),
            model.rho_t_db().map(num).unwrap_or_default(),
            ops.weight_mults.to_string(),
            ops.bias_adds.to_string(),
            ops.activations.to_string(),
            ops.total.to_string(),
        ])?;
    }
    out.finish()
}

/// Fixed split used by earlier NOMA relaying work as a baseline.
pub(crate) fn fixed_split(rho: f64) -> Result<PowerConfig> {
    Ok(PowerConfig::new(rho, 0.2, 0.5)?)
}
