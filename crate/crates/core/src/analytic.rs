//! Closed-form bit error probabilities of the two-phase NOMA relaying link
//! with BPSK on both superimposed symbols.
//!
//! Every component reduces to a weighted sum of one averaged kernel,
//!
//! ```text
//! I(b, m) = E[ Q(√(2·b·G)) ],   G ~ Gamma(m, 1)
//! ```
//!
//! evaluated in closed form: a finite sum for integer `m` and a
//! hypergeometric form otherwise. The conditional error probabilities
//! come from the superimposed-constellation geometry:
//!
//! * `x₂` (strong symbol, detected directly): weights `½, ½` at squared
//!   distances `1 ∓ 2√(α − α²)`;
//! * `x₁` at the relay after SIC with error propagation: five weighted
//!   terms whose squared distances are the remaining-signal energies after
//!   correct and erroneous cancellation.
//!
//! The end-to-end figure is the mean of the two symbol streams, with the
//! `x₁` stream combining the two independent hops.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BepReport, ChannelParams, LinkFading, PowerConfig};
use crate::specfun::{central_binom, mu_ratio, EvalTolerance, Gauss2F1};

/// Shapes closer than this to an integer use the finite-sum branch.
pub const INTEGER_SHAPE_TOL: f64 = 1e-9;

/// Slack allowed on the `[0, 0.5]` bound before a result is treated as a coefficient bug.
const BOUND_SLACK: f64 = 1e-9;

fn check_alpha(op: &'static str, alpha: f64, hi: f64, closed: bool) -> Result<()> {
    let ok = if closed {
        (0.0..=hi).contains(&alpha)
    } else {
        alpha > 0.0 && alpha < hi
    };
    if ok {
        Ok(())
    } else {
        Err(Error::domain(op, format!("alpha out of range: {alpha}")))
    }
}

/// Conditional-error coefficients of the strong symbol `x₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FarCoeffs {
    pub nu: [f64; 2],
    pub sigma: [f64; 2],
}

impl FarCoeffs {
    /// Coefficients for an operational `alpha ∈ (0, 0.5)`.
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha("far_coeffs", alpha, 0.5, false)?;
        Ok(Self::raw(alpha))
    }

    /// Accepts the closed range `[0, 1]` so limiting cases can be checked.
    pub fn limit(alpha: f64) -> Result<Self> {
        check_alpha("far_coeffs", alpha, 1.0, true)?;
        Ok(Self::raw(alpha))
    }

    fn raw(alpha: f64) -> Self {
        // (√α ± √(1-α))² = 1 ± 2√(α - α²)
        let cross = 2.0 * (alpha - alpha * alpha).max(0.0).sqrt();
        Self {
            nu: [1.0 - cross, 1.0 + cross],
            sigma: [0.5, 0.5],
        }
    }
}

pub fn far_coeffs(alpha: f64) -> Result<FarCoeffs> {
    FarCoeffs::new(alpha)
}

/// Conditional-error coefficients of the weak symbol `x₁` at the relay,
/// including error propagation from an incorrect SIC decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearCoeffs {
    pub eta: [f64; 5],
    pub theta: [f64; 5],
}

impl NearCoeffs {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha("near_coeffs", alpha, 0.5, false)?;
        Ok(Self::raw(alpha))
    }

    /// Accepts the closed range `[0, 1]` so limiting cases can be checked.
    pub fn limit(alpha: f64) -> Result<Self> {
        check_alpha("near_coeffs", alpha, 1.0, true)?;
        Ok(Self::raw(alpha))
    }

    fn raw(alpha: f64) -> Self {
        let r = (alpha - alpha * alpha).max(0.0).sqrt();
        Self {
            eta: [1.0, -0.5, 0.5, 0.5, -0.5],
            theta: [
                alpha,
                1.0 + 2.0 * r,
                1.0 - 2.0 * r,
                4.0 - 3.0 * alpha + 4.0 * r,
                // clamp: rounding can leave -1e-16 at alpha = 0.5
                (4.0 - 3.0 * alpha - 4.0 * r).max(0.0),
            ],
        }
    }
}

pub fn near_coeffs(alpha: f64) -> Result<NearCoeffs> {
    NearCoeffs::new(alpha)
}

/// Which closed form of the averaged kernel to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelBranch {
    /// Finite sum for integer shapes, hypergeometric otherwise.
    #[default]
    Auto,
    /// Finite sum; requires an integer shape.
    Integer,
    /// Hypergeometric form; valid for every shape.
    Hypergeometric,
}

#[derive(Debug, Clone)]
enum KernelForm {
    Finite { terms: u32 },
    Hypergeometric { f21: Gauss2F1, prefactor: f64 },
}

/// `E[Q(√(2bG))]` with `G ~ Gamma(m, 1)`, prepared for one shape `m`.
#[derive(Debug, Clone)]
pub struct NakagamiKernel {
    m: f64,
    form: KernelForm,
}

pub fn is_integer_shape(m: f64) -> bool {
    (m - m.round()).abs() < INTEGER_SHAPE_TOL
}

impl NakagamiKernel {
    pub fn new(m: f64) -> Result<Self> {
        Self::with_branch(m, KernelBranch::Auto)
    }

    pub fn with_branch(m: f64, branch: KernelBranch) -> Result<Self> {
        if !(m >= 0.5 && m.is_finite()) {
            return Err(Error::domain("nakagami_bpsk_kernel", format!("shape must be >= 0.5, got {m}")));
        }
        let integer = is_integer_shape(m);
        let form = match branch {
            KernelBranch::Integer if !integer => {
                return Err(Error::domain(
                    "nakagami_bpsk_kernel",
                    format!("finite-sum branch needs an integer shape, got {m}"),
                ))
            }
            KernelBranch::Integer => KernelForm::Finite {
                terms: m.round() as u32,
            },
            KernelBranch::Auto if integer => KernelForm::Finite {
                terms: m.round() as u32,
            },
            KernelBranch::Auto | KernelBranch::Hypergeometric => {
                let f21 = Gauss2F1::new(1.0, m + 0.5, m + 1.0, EvalTolerance::default())?;
                let gamma_ratio = (libm::lgamma(m + 0.5) - libm::lgamma(m + 1.0)).exp();
                KernelForm::Hypergeometric {
                    f21,
                    prefactor: gamma_ratio / (2.0 * PI.sqrt()),
                }
            }
        };
        Ok(Self { m, form })
    }

    pub fn shape(&self) -> f64 {
        self.m
    }

    /// Evaluates at effective average SNR `b ≥ 0` (the kernel is ½ at `b = 0`).
    pub fn eval(&self, b: f64) -> Result<f64> {
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::domain("nakagami_bpsk_kernel", format!("invalid SNR argument {b}")));
        }
        if b == 0.0 {
            return Ok(0.5);
        }
        let value = match &self.form {
            KernelForm::Finite { terms } => {
                let mu = mu_ratio(b)?;
                // (1 - μ²)/4 = 1 / (4(1 + b))
                let x = 0.25 / (1.0 + b);
                let mut pow = 1.0;
                let mut sum = 0.0;
                for l in 0..*terms {
                    sum += central_binom(l) * pow;
                    pow *= x;
                }
                0.5 * (1.0 - mu * sum)
            }
            KernelForm::Hypergeometric { f21, prefactor } => {
                let z = 1.0 / (1.0 + b);
                let w = b / (1.0 + b);
                let f = f21.eval_split(z, w)?;
                prefactor * b.sqrt() * (1.0 + b).powf(-(self.m + 0.5)) * f
            }
        };
        Ok(value.clamp(0.0, 0.5))
    }
}

/// Averaged BPSK error probability over Nakagami-m fading at effective SNR `b`.
pub fn nakagami_bpsk_kernel(b: f64, m: f64) -> Result<f64> {
    NakagamiKernel::new(m)?.eval(b)
}

/// Neumaier-compensated sum, largest magnitudes first.
fn compensated_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

fn check_probability(op: &'static str, p: f64) -> Result<f64> {
    if !(-BOUND_SLACK..=0.5 + BOUND_SLACK).contains(&p) {
        return Err(Error::Consistency {
            op,
            reason: format!("probability {p} outside [0, 0.5]"),
        });
    }
    Ok(p.clamp(0.0, 0.5))
}

fn far_sum(kernel: &NakagamiKernel, snr: f64, c: &FarCoeffs) -> Result<f64> {
    let mut acc = 0.0;
    for (nu, sigma) in c.nu.iter().zip(c.sigma) {
        acc += sigma * kernel.eval(nu * snr)?;
    }
    check_probability("bep_x2", acc)
}

fn near_sum(kernel: &NakagamiKernel, snr: f64, c: &NearCoeffs) -> Result<f64> {
    let mut terms = Vec::with_capacity(5);
    for (eta, theta) in c.eta.iter().zip(c.theta) {
        terms.push(eta * kernel.eval(theta * snr)?);
    }
    check_probability("bep_x1_sr", compensated_sum(terms))
}

/// Strong-symbol error probability over the direct link, with explicit coefficients.
pub fn bep_x2_with(sd: LinkFading, rho_s: f64, coeffs: &FarCoeffs) -> Result<f64> {
    let kernel = NakagamiKernel::new(sd.m())?;
    far_sum(&kernel, rho_s * sd.omega() / sd.m(), coeffs)
}

/// `P_x2`: error probability of `x₂` at the destination.
pub fn bep_x2(ch: &ChannelParams, rho_s: f64, alpha: f64) -> Result<f64> {
    bep_x2_with(ch.sd, rho_s, &FarCoeffs::new(alpha)?)
}

/// `P_x1^(rd)`: interference-free second hop.
pub fn bep_x1_rd(ch: &ChannelParams, rho_r: f64) -> Result<f64> {
    nakagami_bpsk_kernel(rho_r * ch.rd.omega() / ch.rd.m(), ch.rd.m())
}

/// Weak-symbol error probability at the relay, with explicit coefficients.
pub fn bep_x1_sr_with(sr: LinkFading, rho_s: f64, coeffs: &NearCoeffs) -> Result<f64> {
    let kernel = NakagamiKernel::new(sr.m())?;
    near_sum(&kernel, rho_s * sr.omega() / sr.m(), coeffs)
}

/// `P_x1^(sr)`: error probability of `x₁` at the relay after imperfect SIC.
pub fn bep_x1_sr(ch: &ChannelParams, rho_s: f64, alpha: f64) -> Result<f64> {
    bep_x1_sr_with(ch.sr, rho_s, &NearCoeffs::new(alpha)?)
}

/// Error probability after two independent binary hops.
pub fn combine_two_hop(p_sr: f64, p_rd: f64) -> Result<f64> {
    for p in [p_sr, p_rd] {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::domain("combine_two_hop", format!("probability {p} outside [0, 0.5]")));
        }
    }
    // p_sr(1 - p_rd) + (1 - p_sr)p_rd, arranged so p_sr = ½ and p_rd = 0 are exact
    Ok(p_sr + p_rd * (1.0 - 2.0 * p_sr))
}

/// Closed-form evaluator with per-link kernels prepared once for a channel.
#[derive(Debug, Clone)]
pub struct BepEvaluator {
    ch: ChannelParams,
    sr: NakagamiKernel,
    sd: NakagamiKernel,
    rd: NakagamiKernel,
}

impl BepEvaluator {
    pub fn new(ch: &ChannelParams) -> Result<Self> {
        Ok(Self {
            ch: *ch,
            sr: NakagamiKernel::new(ch.sr.m())?,
            sd: NakagamiKernel::new(ch.sd.m())?,
            rd: NakagamiKernel::new(ch.rd.m())?,
        })
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.ch
    }

    pub fn report(&self, pw: &PowerConfig) -> Result<BepReport> {
        self.report_at(pw.rho_t_linear(), pw.alpha(), pw.beta())
    }

    /// Same as [`report`](Self::report) with the total SNR already linear.
    pub fn report_at(&self, rho_t: f64, alpha: f64, beta: f64) -> Result<BepReport> {
        let rho_s = beta * rho_t;
        let rho_r = (1.0 - beta) * rho_t;
        let far = FarCoeffs::new(alpha)?;
        let near = NearCoeffs::new(alpha)?;
        let (sr, sd, rd) = (self.ch.sr, self.ch.sd, self.ch.rd);
        let p_x2 = far_sum(&self.sd, rho_s * sd.omega() / sd.m(), &far)?;
        let p_x1_sr = near_sum(&self.sr, rho_s * sr.omega() / sr.m(), &near)?;
        let p_x1_rd = self.rd.eval(rho_r * rd.omega() / rd.m())?;
        let p_x1 = combine_two_hop(p_x1_sr, p_x1_rd)?;
        Ok(BepReport {
            p_x2,
            p_x1_sr,
            p_x1_rd,
            p_x1,
            abep: (p_x1 + p_x2) / 2.0,
        })
    }
}

/// End-to-end average bit error probability and its components.
pub fn abep_e2e(ch: &ChannelParams, pw: &PowerConfig) -> Result<BepReport> {
    BepEvaluator::new(ch)?.report(pw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rayleigh(b: f64) -> f64 {
        0.5 * (1.0 - (b / (1.0 + b)).sqrt())
    }

    /// Stable finite form for integer m: ((1-μ)/2)^m Σ_k C(m-1+k, k) ((1+μ)/2)^k.
    fn integer_shape_oracle(b: f64, m: u32) -> f64 {
        let mu = (b / (1.0 + b)).sqrt();
        let one_minus_mu = 1.0 / ((1.0 + b) * (1.0 + mu));
        let mut binom = 1.0;
        let mut sum = 0.0;
        for k in 0..m {
            if k > 0 {
                binom *= f64::from(m - 1 + k) / f64::from(k);
            }
            sum += binom * ((1.0 + mu) / 2.0).powi(k as i32);
        }
        (one_minus_mu / 2.0).powi(m as i32) * sum
    }

    /// Quadrature of E[Q(√(2bG))], G ~ Gamma(m,1). With G = t² the integrand
    /// is smooth at t = 0 for half-integer m, so Simpson converges quickly.
    fn quadrature_oracle(b: f64, m: f64) -> f64 {
        let upper = (60.0 + 4.0 * m).sqrt() + 4.0;
        let n = 40_000;
        let h = upper / n as f64;
        let ln_norm = libm::lgamma(m);
        let f = |t: f64| {
            if t == 0.0 {
                return if m == 0.5 { 2.0 / PI.sqrt() * 0.5 } else { 0.0 };
            }
            let dens = (2.0f64.ln() + (2.0 * m - 1.0) * t.ln() - t * t - ln_norm).exp();
            dens * 0.5 * libm::erfc((b * t * t).sqrt())
        };
        let mut acc = f(0.0) + f(upper);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn far_coeff_values() {
        let c = far_coeffs(0.2).unwrap();
        assert!((c.nu[0] - 0.2).abs() < 1e-15 && (c.nu[1] - 1.8).abs() < 1e-15);
        let c = far_coeffs(0.1).unwrap();
        assert!((c.nu[0] - 0.4).abs() < 1e-15 && (c.nu[1] - 1.6).abs() < 1e-15);
        assert_eq!(c.sigma, [0.5, 0.5]);
        let c = FarCoeffs::limit(0.0).unwrap();
        assert_eq!(c.nu, [1.0, 1.0]);
        assert!(far_coeffs(0.0).is_err());
        assert!(far_coeffs(0.5).is_err());
    }

    #[test]
    fn near_coeff_values() {
        let c = near_coeffs(0.2).unwrap();
        let expect = [0.2, 1.8, 0.2, 5.0, 1.8];
        for (a, b) in c.theta.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14, "{:?}", c.theta);
        }
        assert_eq!(c.eta.iter().sum::<f64>(), 1.0);
        let c = near_coeffs(0.1).unwrap();
        for (a, b) in c.theta.iter().zip([0.1, 1.6, 0.4, 4.9, 2.5]) {
            assert!((a - b).abs() < 1e-14, "{:?}", c.theta);
        }
        let c = NearCoeffs::limit(1.0).unwrap();
        assert_eq!(c.theta, [1.0; 5]);
        assert!(near_coeffs(0.6).is_err());
        assert!(NearCoeffs::limit(1.2).is_err());
    }

    #[test]
    fn kernel_matches_rayleigh_closed_form() {
        let v = nakagami_bpsk_kernel(10.0, 1.0).unwrap();
        assert!((v - rayleigh(10.0)).abs() < 1e-15);
        assert!((v - 0.023_268_7).abs() < 1e-7);
        let h = NakagamiKernel::with_branch(1.0, KernelBranch::Hypergeometric).unwrap();
        assert!((h.eval(10.0).unwrap() - v).abs() < 1e-9);
    }

    #[test]
    fn kernel_zero_snr_limit() {
        for m in [0.5, 1.0, 1.5, 2.0, 3.7] {
            assert_eq!(nakagami_bpsk_kernel(0.0, m).unwrap(), 0.5);
            let v = nakagami_bpsk_kernel(1e-12, m).unwrap();
            assert!((v - 0.5).abs() < 1e-5, "m={m}: {v}");
        }
    }

    #[test]
    fn kernel_integer_branch_matches_stable_form() {
        for m in 1..=6u32 {
            for b in [1e-2, 0.3, 1.0, 7.5, 100.0, 1e3] {
                let got = nakagami_bpsk_kernel(b, f64::from(m)).unwrap();
                let oracle = integer_shape_oracle(b, m);
                assert!((got - oracle).abs() < 1e-13, "m={m} b={b}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn kernel_matches_quadrature() {
        for m in [0.5, 1.5, 2.5, 3.5] {
            for b in [0.05, 0.7, 4.0, 30.0, 300.0] {
                let got = nakagami_bpsk_kernel(b, m).unwrap();
                let oracle = quadrature_oracle(b, m);
                assert!((got - oracle).abs() < 1e-9, "m={m} b={b}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn kernel_rejects_bad_arguments() {
        assert!(nakagami_bpsk_kernel(-1.0, 1.0).is_err());
        assert!(nakagami_bpsk_kernel(f64::NAN, 1.0).is_err());
        assert!(nakagami_bpsk_kernel(1.0, 0.3).is_err());
        assert!(NakagamiKernel::with_branch(1.5, KernelBranch::Integer).is_err());
    }

    #[test]
    fn component_limits() {
        let ch = ChannelParams::from_arrays([1.0, 1.0, 1.0], [2.0, 1.0, 2.0]).unwrap();
        // interference-free direct link
        let sd10 = ChannelParams::from_arrays([1.0, 1.0, 1.0], [2.0, 10.0, 2.0]).unwrap();
        let p = bep_x2_with(sd10.sd, 1.0, &FarCoeffs::limit(0.0).unwrap()).unwrap();
        assert!((p - 0.023_268_7).abs() < 1e-7);
        assert!((bep_x2(&ch, 1e-14, 0.2).unwrap() - 0.5).abs() < 1e-6);
        assert!((bep_x1_sr(&ch, 1e-14, 0.2).unwrap() - 0.5).abs() < 1e-6);
        assert!((bep_x1_rd(&ch, 1e-14).unwrap() - 0.5).abs() < 1e-6);
        let rd = ChannelParams::from_arrays([1.0, 1.0, 1.0], [2.0, 1.0, 5.0]).unwrap();
        assert!((bep_x1_rd(&rd, 2.0).unwrap() - rayleigh(10.0)).abs() < 1e-15);
        // single-user limit of the SIC expression
        let sr = ChannelParams::from_arrays([2.5, 1.0, 1.0], [2.0, 1.0, 2.0]).unwrap();
        let p = bep_x1_sr_with(sr.sr, 30.0, &NearCoeffs::limit(1.0).unwrap()).unwrap();
        let single = nakagami_bpsk_kernel(30.0 * 2.0 / 2.5, 2.5).unwrap();
        assert!((p - single).abs() < 1e-10);
    }

    #[test]
    fn rd_integer_branches_agree_for_m2() {
        let h = NakagamiKernel::with_branch(2.0, KernelBranch::Hypergeometric).unwrap();
        let ch = ChannelParams::from_arrays([1.0, 1.0, 2.0], [1.0, 1.0, 1.0]).unwrap();
        let p = bep_x1_rd(&ch, 10.0).unwrap();
        assert!((h.eval(5.0).unwrap() - p).abs() < 1e-9);
        assert!((integer_shape_oracle(5.0, 2) - p).abs() < 1e-14);
    }

    #[test]
    fn combine_two_hop_cases() {
        assert!((combine_two_hop(0.1, 0.2).unwrap() - 0.26).abs() < 1e-15);
        assert_eq!(combine_two_hop(0.137, 0.0).unwrap(), 0.137);
        for q in [0.0, 0.01, 0.3, 0.5] {
            assert_eq!(combine_two_hop(0.5, q).unwrap(), 0.5);
        }
        assert!(combine_two_hop(0.6, 0.1).is_err());
        assert!(combine_two_hop(0.1, -0.1).is_err());
    }

    #[test]
    fn report_identities_hold() {
        let ch = ChannelParams::from_arrays([1.0, 1.5, 0.5], [2.0, 1.0, 2.0]).unwrap();
        let pw = PowerConfig::new(15.0, 0.2, 0.6).unwrap();
        let r = abep_e2e(&ch, &pw).unwrap();
        assert_eq!(r.abep, (r.p_x1 + r.p_x2) / 2.0);
        let direct = r.p_x1_sr + r.p_x1_rd - 2.0 * r.p_x1_sr * r.p_x1_rd;
        assert!((r.p_x1 - direct).abs() <= 2.0 * f64::EPSILON * r.p_x1);
        for p in [r.p_x2, r.p_x1_sr, r.p_x1_rd, r.p_x1, r.abep] {
            assert!((0.0..=0.5).contains(&p));
        }
        let (rho_s, rho_r) = pw.link_snrs();
        assert_eq!(r.p_x2, bep_x2(&ch, rho_s, 0.2).unwrap());
        assert_eq!(r.p_x1_sr, bep_x1_sr(&ch, rho_s, 0.2).unwrap());
        assert_eq!(r.p_x1_rd, bep_x1_rd(&ch, rho_r).unwrap());
    }

    #[test]
    fn abep_saturates_at_low_snr() {
        let ch = ChannelParams::from_arrays([1.0, 2.0, 0.5], [2.0, 1.0, 2.0]).unwrap();
        let r = abep_e2e(&ch, &PowerConfig::new(-80.0, 0.2, 0.5).unwrap()).unwrap();
        assert!((r.abep - 0.5).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn abep_decreases_with_snr() {
        let ch = ChannelParams::from_arrays([1.5, 1.0, 2.0], [2.0, 1.0, 2.0]).unwrap();
        let eval = BepEvaluator::new(&ch).unwrap();
        let mut prev = 0.5;
        for i in 0..=80 {
            let db = 0.5 * f64::from(i);
            let r = eval.report(&PowerConfig::new(db, 0.2, 0.5).unwrap()).unwrap();
            assert!(r.abep < prev, "{db} dB: {} !< {prev}", r.abep);
            prev = r.abep;
        }
        assert!(prev < 1e-3);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sic_probability_stays_in_range(
                alpha in 0.005f64..0.495, snr in 1e-3f64..1e5, m in 0.5f64..5.0
            ) {
                let link = LinkFading::new(m, 1.0).unwrap();
                let p = bep_x1_sr_with(link, snr, &NearCoeffs::new(alpha).unwrap()).unwrap();
                prop_assert!(p > 0.0 && p < 0.5, "p={}", p);
            }
        }
    }
}
