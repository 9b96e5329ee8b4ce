//! Levenberg–Marquardt training of the surrogate network.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{split_dataset, Dataset, InputMode};
use super::model::{scale_labels, ModelMetadata, Normalizer, SurrogateModel};
use super::network::{Mlp, N_OUT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub hidden: usize,
    /// stop once the MSE gradient norm falls below this
    pub min_gradient: f64,
    pub mu_init: f64,
    pub mu_decrease: f64,
    pub mu_increase: f64,
    pub mu_max: f64,
    /// an epoch improving the training MSE by less than this counts as stalled
    pub stop_mse_delta: f64,
    /// consecutive stalled epochs that end training
    pub stall_epochs: usize,
    pub max_epochs: usize,
    /// fresh initialisations tried until one reaches `target_test_mse`
    pub restarts: usize,
    pub target_test_mse: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: 10,
            min_gradient: 1e-7,
            mu_init: 1e-3,
            mu_decrease: 0.1,
            mu_increase: 10.0,
            mu_max: 1e10,
            stop_mse_delta: 1e-5,
            stall_epochs: 2,
            max_epochs: 1000,
            restarts: 3,
            target_test_mse: 5e-3,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("min_gradient", self.min_gradient),
            ("mu_init", self.mu_init),
            ("mu_decrease", self.mu_decrease),
            ("mu_increase", self.mu_increase),
            ("mu_max", self.mu_max),
            ("stop_mse_delta", self.stop_mse_delta),
            ("target_test_mse", self.target_test_mse),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(field, format!("must be positive, got {v}")));
            }
        }
        if self.mu_decrease >= 1.0 || self.mu_increase <= 1.0 {
            return Err(Error::validation("mu_decrease", "need mu_decrease < 1 < mu_increase"));
        }
        for (field, v) in [("hidden", self.hidden), ("stall_epochs", self.stall_epochs), ("max_epochs", self.max_epochs), ("restarts", self.restarts)] {
            if v == 0 {
                return Err(Error::validation(field, "must be at least 1"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MinGradient,
    MuCeiling,
    MaxEpochs,
    Stalled,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::MinGradient => "min_gradient",
            StopReason::MuCeiling => "mu_ceiling",
            StopReason::MaxEpochs => "max_epochs",
            StopReason::Stalled => "stalled",
        }
    }
}

/// Normalised inputs with targets in network output units.
struct Problem {
    xs: Vec<Vec<f64>>,
    ts: Vec<[f64; N_OUT]>,
}

impl Problem {
    fn new(ds: &Dataset, mode: InputMode, norm: &Normalizer) -> Self {
        Self {
            xs: ds.records.iter().map(|r| norm.apply(&r.features(mode))).collect(),
            ts: ds.records.iter().map(|r| scale_labels(r.alpha_star, r.beta_star)).collect(),
        }
    }

    fn n_residuals(&self) -> usize {
        self.ts.len() * N_OUT
    }
}

/// Mean squared error over both outputs.
fn mse(net: &Mlp, p: &Problem) -> f64 {
    let sse: f64 = p
        .xs
        .iter()
        .zip(&p.ts)
        .map(|(x, t)| {
            let o = net.forward(x);
            (0..N_OUT).map(|k| (t[k] - o[k]).powi(2)).sum::<f64>()
        })
        .sum();
    sse / p.n_residuals() as f64
}

/// Pearson correlation of predictions and targets, both outputs pooled.
fn regression_r(net: &Mlp, p: &Problem) -> f64 {
    let pairs: Vec<(f64, f64)> = p
        .xs
        .iter()
        .zip(&p.ts)
        .flat_map(|(x, t)| {
            let o = net.forward(x);
            (0..N_OUT).map(move |k| (o[k], t[k]))
        })
        .collect();
    pearson(&pairs)
}

pub(crate) fn pearson(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (mx, my) = pairs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return f64::NAN;
    }
    sxy / (sxx * syy).sqrt()
}

/// Jacobian of the outputs (`∂o/∂w`, one row per residual) and the residuals `t − o`.
fn linearize(net: &Mlp, p: &Problem) -> (DMatrix<f64>, DVector<f64>) {
    let rows = p.n_residuals();
    let mut jac = DMatrix::zeros(rows, net.n_params());
    let mut res = DVector::zeros(rows);
    let mut buf = [Vec::new(), Vec::new()];
    for (s, (x, t)) in p.xs.iter().zip(&p.ts).enumerate() {
        let o = net.forward_with_jacobian(x, &mut buf);
        for k in 0..N_OUT {
            let r = s * N_OUT + k;
            res[r] = t[k] - o[k];
            for (c, v) in buf[k].iter().enumerate() {
                jac[(r, c)] = *v;
            }
        }
    }
    (jac, res)
}

struct Fit {
    net: Mlp,
    epochs: usize,
    stop: StopReason,
}

/// Damped Gauss–Newton iterations on the training MSE.
///
/// Each epoch solves `(JᵀJ + μI)Δ = Jᵀr` and only accepts a step that lowers
/// the MSE; rejected steps raise μ and retry.
fn fit(mut net: Mlp, p: &Problem, cfg: &TrainConfig) -> Fit {
    let mut mu = cfg.mu_init;
    let mut current = mse(&net, p);
    let mut stalled = 0;
    let n_params = net.n_params();
    for epoch in 1..=cfg.max_epochs {
        let (jac, res) = linearize(&net, p);
        let jtr = jac.tr_mul(&res);
        let grad_norm = 2.0 * jtr.norm() / p.n_residuals() as f64;
        if grad_norm < cfg.min_gradient {
            return Fit { net, epochs: epoch - 1, stop: StopReason::MinGradient };
        }
        let jtj = jac.tr_mul(&jac);
        let accepted = loop {
            let damped = &jtj + DMatrix::<f64>::identity(n_params, n_params) * mu;
            if let Some(chol) = damped.cholesky() {
                let delta = chol.solve(&jtr);
                let mut cand = net.clone();
                cand.params_mut().iter_mut().zip(delta.iter()).for_each(|(w, d)| *w += d);
                let trial = mse(&cand, p);
                if trial < current {
                    mu = (mu * cfg.mu_decrease).max(f64::MIN_POSITIVE);
                    break Some((cand, trial));
                }
            }
            mu *= cfg.mu_increase;
            if mu > cfg.mu_max {
                break None;
            }
        };
        let Some((cand, trial)) = accepted else {
            return Fit { net, epochs: epoch, stop: StopReason::MuCeiling };
        };
        let gain = current - trial;
        net = cand;
        current = trial;
        stalled = if gain < cfg.stop_mse_delta { stalled + 1 } else { 0 };
        if stalled >= cfg.stall_epochs {
            return Fit { net, epochs: epoch, stop: StopReason::Stalled };
        }
    }
    Fit { net, epochs: cfg.max_epochs, stop: StopReason::MaxEpochs }
}

/// Trains one model; a `6in` model needs every record at the same SNR.
pub fn train(train: &Dataset, test: &Dataset, mode: InputMode, cfg: &TrainConfig) -> Result<SurrogateModel> {
    cfg.validate()?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::domain("train", "training and test splits must be non-empty"));
    }
    let rho_t_db = match mode {
        InputMode::Channel => {
            let snrs: Vec<f64> = train.snr_values().into_iter().chain(test.snr_values()).collect();
            if snrs.iter().any(|&s| s != snrs[0]) {
                return Err(Error::domain("train", "6in model needs all records at one SNR"));
            }
            Some(snrs[0])
        }
        InputMode::ChannelAndSnr => None,
    };
    let feats: Vec<Vec<f64>> = train.records.iter().map(|r| r.features(mode)).collect();
    let norm = Normalizer::fit(feats.iter().map(Vec::as_slice))?;
    let p_train = Problem::new(train, mode, &norm);
    let p_test = Problem::new(test, mode, &norm);

    let mut best: Option<(Fit, f64)> = None;
    for attempt in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(attempt as u64));
        let init = Mlp::init_uniform(mode.n_inputs(), cfg.hidden, &mut rng)?;
        let run = fit(init, &p_train, cfg);
        let test_mse = mse(&run.net, &p_test);
        if best.as_ref().is_none_or(|(_, b)| test_mse < *b) {
            best = Some((run, test_mse));
        }
        if test_mse <= cfg.target_test_mse {
            break;
        }
    }
    let (run, test_mse) = best.expect("restarts >= 1");
    let mut all = train.clone();
    all.records.extend_from_slice(&test.records);
    let metadata = ModelMetadata {
        train_mse: mse(&run.net, &p_train),
        test_mse,
        regression_r: regression_r(&run.net, &p_test),
        dataset_hash: all.content_hash()?,
        train_records: train.len(),
        test_records: test.len(),
        epochs: run.epochs,
        stop_reason: run.stop.as_str().into(),
    };
    SurrogateModel::new(run.net, mode, rho_t_db, norm, metadata)
}

/// Splits and trains: one model per SNR in `6in` mode, a single model in `7in` mode.
pub fn train_models(ds: &Dataset, mode: InputMode, cfg: &TrainConfig) -> Result<Vec<SurrogateModel>> {
    let groups = match mode {
        InputMode::Channel => ds.snr_values().into_iter().map(|s| ds.at_snr(s)).collect(),
        InputMode::ChannelAndSnr => vec![ds.clone()],
    };
    groups
        .iter()
        .map(|g| {
            let (tr, te) = split_dataset(g, cfg.seed)?;
            train(&tr, &te, mode, cfg)
        })
        .collect()
}
