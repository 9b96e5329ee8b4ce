//! Exhaustive joint power-sharing / power-allocation search.
//!
//! The objective is evaluated on an `M × M` grid over `(alpha, beta)`; the
//! grid minimum is returned with a lexicographic `(alpha, beta)` tie-break.
//! Rows are evaluated in parallel and reduced in row order, so results do
//! not depend on the worker count.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{is_integer_shape, BepEvaluator};
use crate::error::{Error, Result};
use crate::model::{db_to_linear, ChannelParams, Modulation, PowerConfig};
use crate::sim::{run_ber, SimSpec};

/// Search grid over the open validity box of `(alpha, beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    m_points: usize,
    alpha_range: (f64, f64),
    beta_range: (f64, f64),
}

pub const DEFAULT_ALPHA_RANGE: (f64, f64) = (0.005, 0.495);
pub const DEFAULT_BETA_RANGE: (f64, f64) = (0.01, 0.99);

impl GridSpec {
    pub fn new(m_points: usize) -> Result<Self> {
        Self::with_ranges(m_points, DEFAULT_ALPHA_RANGE, DEFAULT_BETA_RANGE)
    }

    pub fn with_ranges(m_points: usize, alpha_range: (f64, f64), beta_range: (f64, f64)) -> Result<Self> {
        if m_points < 2 {
            return Err(Error::validation("m_points", format!("need at least 2, got {m_points}")));
        }
        let (a0, a1) = alpha_range;
        if !(a0 > 0.0 && a0 < a1 && a1 < 0.5) {
            return Err(Error::validation("alpha_range", format!("must satisfy 0 < lo < hi < 0.5, got {alpha_range:?}")));
        }
        let (b0, b1) = beta_range;
        if !(b0 > 0.0 && b0 < b1 && b1 < 1.0) {
            return Err(Error::validation("beta_range", format!("must satisfy 0 < lo < hi < 1, got {beta_range:?}")));
        }
        Ok(Self {
            m_points,
            alpha_range,
            beta_range,
        })
    }

    pub fn m_points(&self) -> usize {
        self.m_points
    }

    pub fn alpha_range(&self) -> (f64, f64) {
        self.alpha_range
    }

    pub fn beta_range(&self) -> (f64, f64) {
        self.beta_range
    }

    fn axis(&self, (lo, hi): (f64, f64), i: usize) -> f64 {
        if i + 1 == self.m_points {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (self.m_points - 1) as f64
        }
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.axis(self.alpha_range, i)
    }

    pub fn beta(&self, j: usize) -> f64 {
        self.axis(self.beta_range, j)
    }

    pub fn alphas(&self) -> Vec<f64> {
        (0..self.m_points).map(|i| self.alpha(i)).collect()
    }

    pub fn betas(&self) -> Vec<f64> {
        (0..self.m_points).map(|j| self.beta(j)).collect()
    }

    pub fn alpha_step(&self) -> f64 {
        (self.alpha_range.1 - self.alpha_range.0) / (self.m_points - 1) as f64
    }

    pub fn beta_step(&self) -> f64 {
        (self.beta_range.1 - self.beta_range.0) / (self.m_points - 1) as f64
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            m_points: 100,
            alpha_range: DEFAULT_ALPHA_RANGE,
            beta_range: DEFAULT_BETA_RANGE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub alpha_star: f64,
    pub beta_star: f64,
    pub ber_star: f64,
    pub evaluations: usize,
    /// Set when the minimum is not statistically resolved (Monte Carlo search).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub alpha: f64,
    pub beta: f64,
    pub ber: f64,
    /// 95% half-width for Monte Carlo surfaces, zero for closed-form ones.
    pub ci95: f64,
}

/// Evaluates `objective(alpha, beta)` on every grid point, row-major in `alpha`.
fn evaluate_grid<F>(grid: &GridSpec, objective: F) -> Result<Vec<SurfacePoint>>
where
    F: Fn(f64, f64) -> Result<(f64, f64)> + Sync,
{
    let rows: Vec<Result<Vec<SurfacePoint>>> = (0..grid.m_points())
        .into_par_iter()
        .map(|i| {
            let alpha = grid.alpha(i);
            (0..grid.m_points())
                .map(|j| {
                    let beta = grid.beta(j);
                    let (ber, ci95) = objective(alpha, beta).map_err(|e| Error::GridPoint {
                        alpha,
                        beta,
                        source: Box::new(e),
                    })?;
                    Ok(SurfacePoint { alpha, beta, ber, ci95 })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(grid.m_points() * grid.m_points());
    for row in rows {
        out.extend(row?);
    }
    Ok(out)
}

/// Index of the minimum; strict comparison keeps the first (smallest alpha, then beta).
fn argmin(points: &[SurfacePoint]) -> usize {
    let mut best = 0;
    for (k, p) in points.iter().enumerate().skip(1) {
        if p.ber < points[best].ber {
            best = k;
        }
    }
    best
}

/// Closed-form BER surface over the grid.
pub fn analytic_surface(ch: &ChannelParams, rho_t_db: f64, grid: &GridSpec) -> Result<Vec<SurfacePoint>> {
    let eval = BepEvaluator::new(ch)?;
    let rho_t = db_to_linear(rho_t_db);
    PowerConfig::new(rho_t_db, 0.25, 0.5)?;
    evaluate_grid(grid, |alpha, beta| Ok((eval.report_at(rho_t, alpha, beta)?.abep, 0.0)))
}

/// Full search of the closed-form end-to-end error probability.
pub fn grid_search_analytic(ch: &ChannelParams, rho_t_db: f64, grid: &GridSpec) -> Result<OptResult> {
    let surface = analytic_surface(ch, rho_t_db, grid)?;
    let best = surface[argmin(&surface)];
    Ok(OptResult {
        alpha_star: best.alpha,
        beta_star: best.beta,
        ber_star: best.ber,
        evaluations: surface.len(),
        warning: None,
    })
}

/// Simulated BER surface; every grid point reuses `seed` (common random numbers).
pub fn mc_surface(
    ch: &ChannelParams,
    rho_t_db: f64,
    modulation: Modulation,
    grid: &GridSpec,
    trials: u64,
    seed: u64,
) -> Result<Vec<SurfacePoint>> {
    // Grid rows already run in parallel; keep each simulation on its worker.
    evaluate_grid(grid, |alpha, beta| {
        let pw = PowerConfig::new(rho_t_db, alpha, beta)?;
        let spec = SimSpec::new(*ch, pw, modulation, trials, seed)?.serial();
        let r = run_ber(&spec)?;
        Ok((r.e2e.ber, r.e2e.ci95_halfwidth))
    })
}

/// Full search of the simulated end-to-end BER.
pub fn grid_search_mc(
    ch: &ChannelParams,
    rho_t_db: f64,
    modulation: Modulation,
    grid: &GridSpec,
    trials: u64,
    seed: u64,
) -> Result<OptResult> {
    let surface = mc_surface(ch, rho_t_db, modulation, grid, trials, seed)?;
    let k = argmin(&surface);
    let best = surface[k];
    // Any other point whose interval overlaps the winner's makes the argmin unresolved.
    let contenders = surface
        .iter()
        .enumerate()
        .filter(|&(i, p)| i != k && p.ber - p.ci95 <= best.ber + best.ci95)
        .count();
    let warning = (contenders > 0).then(|| {
        format!(
            "{contenders} grid points are within the 95% interval of the minimum; \
             increase trials to resolve the argmin"
        )
    });
    Ok(OptResult {
        alpha_star: best.alpha,
        beta_star: best.beta,
        ber_star: best.ber,
        evaluations: surface.len(),
        warning,
    })
}

/// Operation count of one exhaustive search, using the published per-point
/// cost model: `M²(2m_sd + 5m_sr + m_rd + 96) + 1` in general and
/// `2M²(2m_sd + 5m_sr + m_rd + 9) + 1` when every shape is an integer.
pub fn full_search_cost(m_points: usize, ch: &ChannelParams) -> f64 {
    let m2 = (m_points * m_points) as f64;
    let weight = 2.0 * ch.sd.m() + 5.0 * ch.sr.m() + ch.rd.m();
    if ch.shapes().iter().all(|&m| is_integer_shape(m)) {
        2.0 * m2 * (weight + 9.0) + 1.0
    } else {
        m2 * (weight + 96.0) + 1.0
    }
}

/// Writes a surface as `alpha,beta,ber` rows.
pub fn write_surface_csv<W: Write>(mut out: W, surface: &[SurfacePoint]) -> std::io::Result<()> {
    writeln!(out, "alpha,beta,ber")?;
    for p in surface {
        writeln!(out, "{},{},{:e}", p.alpha, p.beta, p.ber)?;
    }
    Ok(())
}
