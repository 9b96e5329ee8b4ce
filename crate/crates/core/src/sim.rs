//! Monte Carlo link-level simulator of the two-phase NOMA relaying scheme.
//!
//! Per frame the source superimposes `x₁` (power share `alpha`) on `x₂`,
//! the destination detects `x₂` on the direct link, the relay detects `x₂`,
//! cancels its *estimate* and detects `x₁`, then forwards the hard decision
//! on `x₁` to the destination. Noise is `N(0, ½)` per real dimension, so the
//! conditional error of a decision at squared distance `d²` is
//! `Q(√(2·d²·ρ·γ))`.
//!
//! Frames are processed in fixed blocks. Block `k` draws from a ChaCha8
//! generator seeded with `seed` on stream `k`, so the counters depend only on
//! `(seed, trials)` and not on how blocks are spread over workers. The number
//! of random draws per frame does not depend on `alpha` or `beta`, which makes
//! runs with the same seed at different power splits use common random numbers.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BerEstimate, ChannelParams, LinkFading, Modulation, PowerConfig};

/// Frames per RNG block.
pub const BLOCK_FRAMES: u64 = 4096;

/// How the relay cancels `x₂` before detecting `x₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SicMode {
    /// Subtract the relay's own decision on `x₂`.
    #[default]
    Imperfect,
    /// Subtract the transmitted `x₂`; only meaningful as a reference.
    Genie,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub ch: ChannelParams,
    pub pw: PowerConfig,
    pub modulation: Modulation,
    /// number of frames; one frame carries one `(x₁, x₂)` symbol pair
    pub trials: u64,
    pub seed: u64,
    pub sic: SicMode,
    /// Channel power gains `(γ_sr, γ_sd, γ_rd)` held fixed instead of drawn.
    pub fixed_gains: Option<[f64; 3]>,
    pub parallel: bool,
}

impl SimSpec {
    pub fn new(ch: ChannelParams, pw: PowerConfig, modulation: Modulation, trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::domain("simulate", "trials must be at least 1"));
        }
        Ok(Self {
            ch,
            pw,
            modulation,
            trials,
            seed,
            sic: SicMode::Imperfect,
            fixed_gains: None,
            parallel: true,
        })
    }

    pub fn with_sic(mut self, sic: SicMode) -> Self {
        self.sic = sic;
        self
    }

    pub fn with_fixed_gains(mut self, gains: [f64; 3]) -> Self {
        self.fixed_gains = Some(gains);
        self
    }

    /// Runs every block on the calling thread.
    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }
}

/// Raw error counts of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ErrorCounters {
    pub frames: u64,
    /// bits carried per stream (`frames × bits_per_symbol`)
    pub bits: u64,
    /// `x₁` decided wrongly at the relay
    pub x1_relay: u64,
    /// `x₁` decided wrongly at the destination
    pub x1: u64,
    /// `x₂` decided wrongly at the destination
    pub x2: u64,
}

impl ErrorCounters {
    fn merge(mut self, other: Self) -> Self {
        self.frames += other.frames;
        self.bits += other.bits;
        self.x1_relay += other.x1_relay;
        self.x1 += other.x1;
        self.x2 += other.x2;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub counters: ErrorCounters,
    pub x1_relay: BerEstimate,
    pub x1: BerEstimate,
    pub x2: BerEstimate,
    /// mean of the `x₁` and `x₂` error rates
    pub e2e: BerEstimate,
}

impl SimReport {
    fn from_counters(c: ErrorCounters, seed: u64) -> Self {
        let e2e = (c.x1 + c.x2) as f64 / (2 * c.bits) as f64;
        Self {
            counters: c,
            x1_relay: BerEstimate::from_counts(c.x1_relay, c.bits, seed),
            x1: BerEstimate::from_counts(c.x1, c.bits, seed),
            x2: BerEstimate::from_counts(c.x2, c.bits, seed),
            e2e: BerEstimate::new(e2e, c.bits, seed),
        }
    }
}

/// Sampler of the channel power gain `γ = |h|² ~ Gamma(m, Ω/m)`.
#[derive(Debug, Clone, Copy)]
pub struct ChannelGain {
    dist: Gamma<f64>,
}

impl ChannelGain {
    pub fn new(link: LinkFading) -> Result<Self> {
        let dist = Gamma::new(link.m(), link.omega() / link.m())
            .map_err(|e| Error::domain("sample_channel_gain", e.to_string()))?;
        Ok(Self { dist })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dist.sample(rng)
    }
}

/// One draw of the power gain of a Nakagami-m link.
pub fn sample_channel_gain<R: Rng + ?Sized>(m: f64, omega: f64, rng: &mut R) -> Result<f64> {
    Ok(ChannelGain::new(LinkFading::new(m, omega)?)?.sample(rng))
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

#[inline]
fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn noise<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let n: f64 = StandardNormal.sample(rng);
    n * FRAC_1_SQRT_2
}

/// Per-run constants shared by every frame.
struct Link {
    gains: [ChannelGain; 3],
    fixed: Option<[f64; 3]>,
    /// √(ρ_s·α), √(ρ_s·(1-α)), √ρ_r
    amp_x1: f64,
    amp_x2: f64,
    amp_relay: f64,
    sic: SicMode,
}

impl Link {
    fn new(spec: &SimSpec) -> Result<Self> {
        let (rho_s, rho_r) = spec.pw.link_snrs();
        let alpha = spec.pw.alpha();
        Ok(Self {
            gains: [
                ChannelGain::new(spec.ch.sr)?,
                ChannelGain::new(spec.ch.sd)?,
                ChannelGain::new(spec.ch.rd)?,
            ],
            fixed: spec.fixed_gains,
            amp_x1: (rho_s * alpha).sqrt(),
            amp_x2: (rho_s * (1.0 - alpha)).sqrt(),
            amp_relay: rho_r.sqrt(),
            sic: spec.sic,
        })
    }

    #[inline]
    fn draw_gains<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 3] {
        match self.fixed {
            Some(g) => g,
            None => [
                self.gains[0].sample(rng),
                self.gains[1].sample(rng),
                self.gains[2].sample(rng),
            ],
        }
    }

    fn bpsk_block(&self, rng: &mut ChaCha8Rng, frames: u64) -> ErrorCounters {
        let mut c = ErrorCounters {
            frames,
            bits: frames,
            ..Default::default()
        };
        for _ in 0..frames {
            let bits: u32 = rng.random();
            let x1 = if bits & 1 == 1 { 1.0 } else { -1.0 };
            let x2 = if bits & 2 == 2 { 1.0 } else { -1.0 };
            let [g_sr, g_sd, g_rd] = self.draw_gains(rng);
            let (n_sr, n_sd, n_rd) = (noise(rng), noise(rng), noise(rng));
            let (h_sr, h_sd, h_rd) = (g_sr.sqrt(), g_sd.sqrt(), g_rd.sqrt());
            let s = self.amp_x1 * x1 + self.amp_x2 * x2;

            // phase 1, destination: x₂ with x₁ as interference
            let x2_dest = sign(h_sd * s + n_sd);

            // phase 1, relay: x₂ decision, cancellation, x₁ decision
            let y_sr = h_sr * s + n_sr;
            let x2_relay = match self.sic {
                SicMode::Imperfect => sign(y_sr),
                SicMode::Genie => x2,
            };
            let x1_relay = sign(y_sr - self.amp_x2 * x2_relay * h_sr);

            // phase 2: forward the hard decision
            let x1_dest = sign(h_rd * self.amp_relay * x1_relay + n_rd);

            c.x2 += u64::from(x2_dest != x2);
            c.x1_relay += u64::from(x1_relay != x1);
            c.x1 += u64::from(x1_dest != x1);
        }
        c
    }

    fn qpsk_block(&self, rng: &mut ChaCha8Rng, frames: u64) -> ErrorCounters {
        let mut c = ErrorCounters {
            frames,
            bits: 2 * frames,
            ..Default::default()
        };
        let bit = |b: u32| if b == 1 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
        let decide = |z: Complex64| Complex64::new(sign(z.re) * FRAC_1_SQRT_2, sign(z.im) * FRAC_1_SQRT_2);
        let bit_errors = |a: Complex64, b: Complex64| u64::from(a.re != b.re) + u64::from(a.im != b.im);
        for _ in 0..frames {
            let bits: u32 = rng.random();
            // Gray mapping: one bit per rail
            let x1 = Complex64::new(bit(bits & 1), bit((bits >> 1) & 1));
            let x2 = Complex64::new(bit((bits >> 2) & 1), bit((bits >> 3) & 1));
            let g = self.draw_gains(rng);
            let theta: [f64; 3] = [rng.random(), rng.random(), rng.random()];
            let mut n = [Complex64::new(0.0, 0.0); 3];
            for v in n.iter_mut() {
                *v = Complex64::new(noise(rng), noise(rng));
            }
            let h: [Complex64; 3] = std::array::from_fn(|k| Complex64::from_polar(g[k].sqrt(), TAU * theta[k]));
            // coherent detection: remove the channel phase
            let derotate = |y: Complex64, h: Complex64| y * h.conj() / h.norm();
            let s = x1 * self.amp_x1 + x2 * self.amp_x2;

            let x2_dest = decide(derotate(h[1] * s + n[1], h[1]));

            let y_sr = h[0] * s + n[0];
            let x2_relay = match self.sic {
                SicMode::Imperfect => decide(derotate(y_sr, h[0])),
                SicMode::Genie => x2,
            };
            let x1_relay = decide(derotate(y_sr - h[0] * x2_relay * self.amp_x2, h[0]));

            let y_rd = h[2] * x1_relay * self.amp_relay + n[2];
            let x1_dest = decide(derotate(y_rd, h[2]));

            c.x2 += bit_errors(x2_dest, x2);
            c.x1_relay += bit_errors(x1_relay, x1);
            c.x1 += bit_errors(x1_dest, x1);
        }
        c
    }
}

fn run_blocks(spec: &SimSpec) -> Result<SimReport> {
    let link = Link::new(spec)?;
    let blocks = spec.trials.div_ceil(BLOCK_FRAMES);
    let block = |k: u64| {
        let frames = BLOCK_FRAMES.min(spec.trials - k * BLOCK_FRAMES);
        let mut rng = block_rng(spec.seed, k);
        match spec.modulation {
            Modulation::Bpsk => link.bpsk_block(&mut rng, frames),
            Modulation::Qpsk => link.qpsk_block(&mut rng, frames),
        }
    };
    let counters = if spec.parallel {
        let per_block: Vec<ErrorCounters> = (0..blocks).into_par_iter().map(block).collect();
        per_block.into_iter().fold(ErrorCounters::default(), ErrorCounters::merge)
    } else {
        (0..blocks).map(block).fold(ErrorCounters::default(), ErrorCounters::merge)
    };
    Ok(SimReport::from_counters(counters, spec.seed))
}

/// Simulates a BPSK run.
pub fn run_ber_bpsk(spec: &SimSpec) -> Result<SimReport> {
    if spec.modulation != Modulation::Bpsk {
        return Err(Error::domain("run_ber_bpsk", format!("spec uses {}", spec.modulation)));
    }
    run_blocks(spec)
}

/// Simulates a Gray-mapped QPSK run.
pub fn run_ber_qpsk(spec: &SimSpec) -> Result<SimReport> {
    if spec.modulation != Modulation::Qpsk {
        return Err(Error::domain("run_ber_qpsk", format!("spec uses {}", spec.modulation)));
    }
    run_blocks(spec)
}

/// Simulates with whichever modulation the spec names.
pub fn run_ber(spec: &SimSpec) -> Result<SimReport> {
    run_blocks(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{abep_e2e, nakagami_bpsk_kernel};
    use crate::specfun::q_func;

    fn fig1a() -> ChannelParams {
        ChannelParams::from_arrays([1.0; 3], [2.0, 1.0, 2.0]).unwrap()
    }

    fn within(mc: &BerEstimate, analytic: f64, k: f64) -> bool {
        (mc.ber - analytic).abs() <= (k * mc.ci95_halfwidth).max(1e-5)
    }

    #[test]
    fn gain_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = ChannelGain::new(LinkFading::new(2.0, 3.0).unwrap()).unwrap();
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| g.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 3.0).abs() < 0.01, "mean {mean}");
        assert!((var - 4.5).abs() < 0.05, "var {var}");
    }

    #[test]
    fn unit_shape_gain_is_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20_000;
        let omega = 1.7;
        let mut draws: Vec<f64> = (0..n).map(|_| sample_channel_gain(1.0, omega, &mut rng).unwrap()).collect();
        draws.sort_by(f64::total_cmp);
        let ks = draws
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = 1.0 - (-x / omega).exp();
                let lo = i as f64 / n as f64;
                let hi = (i + 1) as f64 / n as f64;
                (cdf - lo).abs().max((hi - cdf).abs())
            })
            .fold(0.0, f64::max);
        // 1% critical value of the one-sample KS statistic
        assert!(ks < 1.628 / (n as f64).sqrt(), "KS statistic {ks}");
    }

    #[test]
    fn zero_trials_rejected() {
        let pw = PowerConfig::new(10.0, 0.2, 0.5).unwrap();
        assert!(SimSpec::new(fig1a(), pw, Modulation::Bpsk, 0, 1).is_err());
    }

    #[test]
    fn modulation_mismatch_rejected() {
        let pw = PowerConfig::new(10.0, 0.2, 0.5).unwrap();
        let spec = SimSpec::new(fig1a(), pw, Modulation::Qpsk, 10, 1).unwrap();
        assert!(run_ber_bpsk(&spec).is_err());
        assert!(run_ber_qpsk(&spec).is_ok());
    }

    #[test]
    fn zero_snr_is_a_coin_flip() {
        let pw = PowerConfig::new(-40.0, 0.2, 0.5).unwrap();
        for modulation in [Modulation::Bpsk, Modulation::Qpsk] {
            let r = run_ber(&SimSpec::new(fig1a(), pw, modulation, 200_000, 3).unwrap()).unwrap();
            for est in [r.x1_relay, r.x1, r.x2, r.e2e] {
                assert!((est.ber - 0.5).abs() <= 3.0 * est.ci95_halfwidth + 2e-3, "{modulation}: {est:?}");
            }
        }
    }

    #[test]
    fn seeded_runs_are_reproducible_and_worker_independent() {
        let pw = PowerConfig::new(12.0, 0.2, 0.6).unwrap();
        for modulation in [Modulation::Bpsk, Modulation::Qpsk] {
            let spec = SimSpec::new(fig1a(), pw, modulation, 50_000, 99).unwrap();
            let a = run_ber(&spec).unwrap();
            let b = run_ber(&spec).unwrap();
            let c = run_ber(&spec.clone().serial()).unwrap();
            let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
            let d = pool.install(|| run_ber(&spec)).unwrap();
            assert_eq!(a.counters, b.counters);
            assert_eq!(a.counters, c.counters);
            assert_eq!(a.counters, d.counters);
            let other = run_ber(&SimSpec::new(fig1a(), pw, modulation, 50_000, 100).unwrap()).unwrap();
            assert_ne!(a.counters, other.counters);
        }
    }

    #[test]
    fn e2e_is_mean_of_streams() {
        let pw = PowerConfig::new(8.0, 0.3, 0.5).unwrap();
        let r = run_ber(&SimSpec::new(fig1a(), pw, Modulation::Bpsk, 30_000, 4).unwrap()).unwrap();
        assert_eq!(r.e2e.ber, (r.counters.x1 + r.counters.x2) as f64 / (2 * r.counters.bits) as f64);
        assert!((r.e2e.ber - (r.x1.ber + r.x2.ber) / 2.0).abs() < 1e-15);
        assert!(r.counters.x1 <= r.counters.bits && r.counters.x2 <= r.counters.bits);
    }

    #[test]
    fn conditional_error_at_frozen_gain() {
        // γ_sd = 1: x₂ error equals Σ ½·Q(√(2ν_i ρ_s))
        let pw = PowerConfig::new(6.0, 0.2, 0.5).unwrap();
        let spec = SimSpec::new(fig1a(), pw, Modulation::Bpsk, 2_000_000, 8)
            .unwrap()
            .with_fixed_gains([1.0, 1.0, 1.0]);
        let r = run_ber(&spec).unwrap();
        let (rho_s, _) = pw.link_snrs();
        let c = crate::analytic::far_coeffs(0.2).unwrap();
        let expect: f64 = (0..2)
            .map(|i| c.sigma[i] * q_func((2.0 * c.nu[i] * rho_s).sqrt()).unwrap())
            .sum();
        assert!(within(&r.x2, expect, 3.0), "{} vs {expect}", r.x2.ber);
    }

    #[test]
    fn genie_cancellation_changes_relay_errors() {
        let pw = PowerConfig::new(5.0, 0.3, 0.5).unwrap();
        let base = SimSpec::new(fig1a(), pw, Modulation::Bpsk, 400_000, 21).unwrap();
        let real = run_ber(&base).unwrap();
        let genie = run_ber(&base.clone().with_sic(SicMode::Genie)).unwrap();
        let gap = real.x1_relay.ber - genie.x1_relay.ber;
        assert!(gap > 3.0 * (real.x1_relay.ci95_halfwidth + genie.x1_relay.ci95_halfwidth), "gap {gap}");
        // the x₂ path is untouched by the cancellation mode
        assert_eq!(real.counters.x2, genie.counters.x2);
    }

    #[test]
    fn fig1a_point_matches_closed_form() {
        let pw = PowerConfig::new(20.0, 0.2, 0.5).unwrap();
        let r = run_ber(&SimSpec::new(fig1a(), pw, Modulation::Bpsk, 2_000_000, 2024).unwrap()).unwrap();
        let a = abep_e2e(&fig1a(), &pw).unwrap();
        assert!(within(&r.e2e, a.abep, 3.0), "{} vs {}", r.e2e.ber, a.abep);
        assert!(within(&r.x1_relay, a.p_x1_sr, 3.0));
        assert!(within(&r.x2, a.p_x2, 3.0));
    }

    #[test]
    fn qpsk_single_stream_matches_bpsk_per_bit() {
        // alpha → 0: x₂ over the direct link is plain Gray QPSK, whose per-bit
        // error equals BPSK at half the symbol SNR.
        let pw = PowerConfig::new(12.0, 1e-9, 0.5).unwrap();
        let r = run_ber(&SimSpec::new(fig1a(), pw, Modulation::Qpsk, 1_000_000, 6).unwrap()).unwrap();
        let (rho_s, _) = pw.link_snrs();
        let sd = fig1a().sd;
        let expect = nakagami_bpsk_kernel(rho_s / 2.0 * sd.omega() / sd.m(), sd.m()).unwrap();
        assert!(within(&r.x2, expect, 3.0), "{} vs {expect}", r.x2.ber);
    }
}
