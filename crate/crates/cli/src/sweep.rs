//! Figure-class experiments. Each plan writes one CSV; plotting is left to the user.

use std::io::{BufWriter, Write};

use anyhow::Result;
use clap::ValueEnum;
use noma_crs::analytic::{abep_e2e, BepEvaluator};
use noma_crs::config::{ScenarioConfig, SplitPoint};
use noma_crs::model::{ChannelParams, Modulation, PowerConfig};
use noma_crs::optimizer::{analytic_surface, grid_search_analytic, mc_surface, write_surface_csv, GridSpec};
use noma_crs::sim::{run_ber, SimSpec};
use noma_crs::surrogate::ModelSet;
use noma_crs::Error;

use crate::commands::{create_file, fixed_split, load_config, load_models, num, require_bpsk, CsvOut};
use crate::{RhoRange, SweepArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepId {
    /// BER vs SNR, equal shape on every link
    Fig1a,
    /// BER vs SNR, unequal shapes
    Fig1b,
    /// fixed vs full-search vs surrogate split, BPSK
    Fig1c,
    /// optimum split vs relay position
    Fig2,
    /// proposed split vs a comparison split from the config
    Fig3a,
    /// BER surface over (alpha, beta)
    Fig3b,
    /// fixed vs full-search vs surrogate split, QPSK by simulation
    Fig4,
}

pub(crate) const PROFILE_HEADER: [&str; 8] = ["profile", "rho_db", "split", "alpha", "beta", "abep", "ber_mc", "ci95"];
pub(crate) const COMPARE_HEADER: [&str; 8] =
    ["rho_db", "ber_fixed", "ber_full_search", "ber_surrogate", "alpha_star", "beta_star", "alpha_hat", "beta_hat"];
pub(crate) const FIG2_HEADER: [&str; 10] = [
    "rho_db",
    "m_sr",
    "m_sd",
    "m_rd",
    "omega_sr",
    "omega_rd",
    "alpha_star",
    "beta_star",
    "alpha_hat",
    "beta_hat",
];
pub(crate) const FIG3A_HEADER: [&str; 8] = [
    "rho_db",
    "split",
    "alpha_proposed",
    "beta_proposed",
    "ber_proposed",
    "alpha_comparison",
    "beta_comparison",
    "ber_comparison",
];
pub(crate) const FIG4_HEADER: [&str; 12] = [
    "rho_db",
    "ber_fixed",
    "ber_full_search",
    "ber_surrogate",
    "ci95_fixed",
    "ci95_full_search",
    "ci95_surrogate",
    "alpha_star",
    "beta_star",
    "alpha_hat",
    "beta_hat",
    "warning",
];

/// How a plan picks its operating point.
enum Chooser {
    FullSearch(GridSpec),
    Surrogate(ModelSet),
}

impl Chooser {
    fn name(&self) -> &'static str {
        match self {
            Chooser::FullSearch(_) => "full_search",
            Chooser::Surrogate(_) => "surrogate",
        }
    }

    fn choose(&self, ch: &ChannelParams, rho: f64) -> Result<SplitPoint> {
        Ok(match self {
            Chooser::FullSearch(grid) => {
                let r = grid_search_analytic(ch, rho, grid)?;
                SplitPoint { alpha: r.alpha_star, beta: r.beta_star }
            }
            Chooser::Surrogate(set) => set.predict(ch, rho)?,
        })
    }
}

struct Ctx<'a> {
    args: &'a SweepArgs,
    cfg: Option<ScenarioConfig>,
}

impl SweepId {
    pub fn name(self) -> &'static str {
        match self {
            SweepId::Fig1a => "fig1a",
            SweepId::Fig1b => "fig1b",
            SweepId::Fig1c => "fig1c",
            SweepId::Fig2 => "fig2",
            SweepId::Fig3a => "fig3a",
            SweepId::Fig3b => "fig3b",
            SweepId::Fig4 => "fig4",
        }
    }
}

impl Ctx<'_> {
    fn rhos(&self, default: &str) -> Vec<f64> {
        self.args.rho_db.unwrap_or_else(|| default.parse::<RhoRange>().expect("valid default range")).values()
    }

    fn grid(&self, default: usize) -> Result<GridSpec> {
        Ok(GridSpec::new(self.args.grid.unwrap_or(default))?)
    }

    fn channel(&self, default: ChannelParams) -> ChannelParams {
        self.cfg.as_ref().map_or(default, |c| c.channel)
    }

    fn spreads(&self, default: [f64; 3]) -> [f64; 3] {
        self.cfg.as_ref().map_or(default, |c| c.channel.spreads())
    }

    fn models(&self) -> Result<ModelSet> {
        match &self.args.model {
            Some(path) => load_models(path),
            None => Err(Error::Config(format!("plan {} needs --model <path> for its surrogate column", self.args.plan.name())).into()),
        }
    }

    fn chooser(&self) -> Result<Chooser> {
        match &self.args.model {
            Some(_) => Ok(Chooser::Surrogate(self.models()?)),
            None => Ok(Chooser::FullSearch(self.grid(100)?)),
        }
    }

    fn out(&self, header: &[&str]) -> Result<CsvOut> {
        CsvOut::create(self.args.out.as_deref(), header)
    }

    fn require_bpsk(&self) -> Result<()> {
        match &self.cfg {
            Some(c) => require_bpsk(c, &format!("plan {}", self.args.plan.name())),
            None => Ok(()),
        }
    }
}

fn profile_name(ch: &ChannelParams) -> String {
    let [a, b, c] = ch.shapes();
    let [x, y, z] = ch.spreads();
    format!("m={a}/{b}/{c} omega={x}/{y}/{z}")
}

pub(crate) fn run(args: &SweepArgs) -> Result<()> {
    let cfg = args.config.as_deref().map(load_config).transpose()?;
    let ctx = Ctx { args, cfg };
    match args.plan {
        SweepId::Fig1a => {
            let shapes = [[0.5; 3], [1.0; 3], [2.0; 3], [3.0; 3]];
            profiles(&ctx, &shapes)
        }
        SweepId::Fig1b => {
            let shapes = [[2.0; 3], [4.0, 4.0, 2.0], [2.0, 4.0, 4.0], [4.0; 3]];
            profiles(&ctx, &shapes)
        }
        SweepId::Fig1c => compare_bpsk(&ctx),
        SweepId::Fig2 => relay_position(&ctx),
        SweepId::Fig3a => against_comparison(&ctx),
        SweepId::Fig3b => surface(&ctx),
        SweepId::Fig4 => compare_qpsk(&ctx),
    }
}

/// BER vs SNR for several shape profiles, with optional simulation overlay.
fn profiles(ctx: &Ctx, shapes: &[[f64; 3]]) -> Result<()> {
    ctx.require_bpsk()?;
    let spreads = ctx.spreads([2.0, 1.0, 2.0]);
    let chooser = ctx.chooser()?;
    let trials = ctx.args.trials.unwrap_or(0);
    let mut out = ctx.out(&PROFILE_HEADER)?;
    for m in shapes {
        let ch = ChannelParams::from_arrays(*m, spreads)?;
        let eval = BepEvaluator::new(&ch)?;
        for rho in ctx.rhos("0:5:40") {
            let sp = chooser.choose(&ch, rho)?;
            let pw = PowerConfig::new(rho, sp.alpha, sp.beta)?;
            let abep = eval.report(&pw)?.abep;
            let (ber, ci) = if trials > 0 {
                let r = run_ber(&SimSpec::new(ch, pw, Modulation::Bpsk, trials, ctx.args.seed)?)?;
                (num(r.e2e.ber), num(r.e2e.ci95_halfwidth))
            } else {
                (String::new(), String::new())
            };
            out.row([profile_name(&ch), num(rho), chooser.name().into(), num(sp.alpha), num(sp.beta), num(abep), ber, ci])?;
        }
    }
    out.finish()
}

fn compare_bpsk(ctx: &Ctx) -> Result<()> {
    ctx.require_bpsk()?;
    let ch = ctx.channel(ChannelParams::from_arrays([1.0; 3], [2.0, 1.0, 2.0])?);
    let set = ctx.models()?;
    let grid = ctx.grid(100)?;
    let mut out = ctx.out(&COMPARE_HEADER)?;
    for rho in ctx.rhos("0:5:30") {
        let best = grid_search_analytic(&ch, rho, &grid)?;
        let hat = set.predict(&ch, rho)?;
        let fixed = abep_e2e(&ch, &fixed_split(rho)?)?.abep;
        let sur = abep_e2e(&ch, &PowerConfig::new(rho, hat.alpha, hat.beta)?)?.abep;
        out.row([rho, fixed, best.ber_star, sur, best.alpha_star, best.beta_star, hat.alpha, hat.beta].map(num))?;
    }
    out.finish()
}

/// Optimum split along `Ω_rd = 10 − Ω_sr`.
fn relay_position(ctx: &Ctx) -> Result<()> {
    ctx.require_bpsk()?;
    let set = ctx.models()?;
    let grid = ctx.grid(100)?;
    let shape_sets: Vec<[f64; 3]> = match &ctx.cfg {
        Some(c) => vec![c.channel.shapes()],
        None => vec![[1.0; 3], [2.0; 3]],
    };
    let omega_sd = ctx.spreads([2.0, 2.0, 2.0])[1];
    let mut out = ctx.out(&FIG2_HEADER)?;
    for rho in ctx.rhos("10:10:20") {
        for m in &shape_sets {
            for omega_sr in 2..=8 {
                let omega_sr = f64::from(omega_sr);
                let ch = ChannelParams::from_arrays(*m, [omega_sr, omega_sd, 10.0 - omega_sr])?;
                let best = grid_search_analytic(&ch, rho, &grid)?;
                let hat = set.predict(&ch, rho)?;
                out.row(
                    [rho, m[0], m[1], m[2], omega_sr, 10.0 - omega_sr, best.alpha_star, best.beta_star, hat.alpha, hat.beta]
                        .map(num),
                )?;
            }
        }
    }
    out.finish()
}

fn against_comparison(ctx: &Ctx) -> Result<()> {
    let Some(cfg) = &ctx.cfg else {
        return Err(Error::Config("plan fig3a needs --config with a [comparison] table".into()).into());
    };
    require_bpsk(cfg, "plan fig3a")?;
    let Some(cmp) = cfg.comparison else {
        return Err(Error::Config("plan fig3a needs a [comparison] table with alpha and beta".into()).into());
    };
    let chooser = ctx.chooser()?;
    let eval = BepEvaluator::new(&cfg.channel)?;
    let mut out = ctx.out(&FIG3A_HEADER)?;
    for rho in ctx.rhos("0:5:40") {
        let sp = chooser.choose(&cfg.channel, rho)?;
        let ours = eval.report(&PowerConfig::new(rho, sp.alpha, sp.beta)?)?.abep;
        let theirs = eval.report(&PowerConfig::new(rho, cmp.alpha, cmp.beta)?)?.abep;
        out.row([
            num(rho),
            chooser.name().into(),
            num(sp.alpha),
            num(sp.beta),
            num(ours),
            num(cmp.alpha),
            num(cmp.beta),
            num(theirs),
        ])?;
    }
    out.finish()
}

fn surface(ctx: &Ctx) -> Result<()> {
    let ch = ctx.channel(ChannelParams::from_arrays([1.0; 3], [10.0, 2.0, 10.0])?);
    let rhos = ctx.rhos("30");
    let [rho] = rhos.as_slice() else {
        return Err(Error::Config("plan fig3b takes a single SNR value".into()).into());
    };
    let grid = ctx.grid(100)?;
    let modulation = ctx.cfg.as_ref().map_or(Modulation::Bpsk, |c| c.modulation);
    let points = match modulation {
        Modulation::Bpsk => analytic_surface(&ch, *rho, &grid)?,
        Modulation::Qpsk => mc_surface(&ch, *rho, modulation, &grid, ctx.args.trials.unwrap_or(100_000), ctx.args.seed)?,
    };
    let write = |w: &mut dyn Write| write_surface_csv(&mut *w, &points).and_then(|_| w.flush());
    match &ctx.args.out {
        Some(path) => write(&mut BufWriter::new(create_file(path)?))
            .map_err(|source| Error::Io { path: path.clone(), source })?,
        None => write(&mut std::io::stdout().lock())?,
    }
    Ok(())
}

/// QPSK has no closed form: the full search and every column are simulated
/// with the same seed and frame count, so the columns share random numbers.
fn compare_qpsk(ctx: &Ctx) -> Result<()> {
    let ch = ctx.channel(ChannelParams::from_arrays([1.0; 3], [2.0, 1.0, 2.0])?);
    let set = ctx.models()?;
    let grid = ctx.grid(20)?;
    let trials = ctx.args.trials.unwrap_or(100_000);
    let seed = ctx.args.seed;
    let mut out = ctx.out(&FIG4_HEADER)?;
    for rho in ctx.rhos("0:5:20") {
        let best = noma_crs::optimizer::grid_search_mc(&ch, rho, Modulation::Qpsk, &grid, trials, seed)?;
        let hat = set.predict(&ch, rho)?;
        let sim = |pw: PowerConfig| -> Result<_> { Ok(run_ber(&SimSpec::new(ch, pw, Modulation::Qpsk, trials, seed)?)?.e2e) };
        let fixed = sim(fixed_split(rho)?)?;
        let full = sim(PowerConfig::new(rho, best.alpha_star, best.beta_star)?)?;
        let sur = sim(PowerConfig::new(rho, hat.alpha, hat.beta)?)?;
        out.row([
            num(rho),
            num(fixed.ber),
            num(full.ber),
            num(sur.ber),
            num(fixed.ci95_halfwidth),
            num(full.ci95_halfwidth),
            num(sur.ci95_halfwidth),
            num(best.alpha_star),
            num(best.beta_star),
            num(hat.alpha),
            num(hat.beta),
            best.warning.unwrap_or_default(),
        ])?;
    }
    out.finish()
}
