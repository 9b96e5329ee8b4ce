//! Scalar special functions used by the closed-form error probabilities.
//!
//! * [`q_func`] – Gaussian tail probability, `Q(x) = ½·erfc(x/√2)`.
//! * [`ln_gamma`] – log-Gamma for positive arguments.
//! * [`gauss_2f1`] / [`Gauss2F1`] – Gauss hypergeometric function on `0 ≤ z < 1`.
//! * [`mu_ratio`], [`central_binom`] – small helpers of the Nakagami-m closed forms.
//!
//! `erfc` and `lgamma` come from `libm` (FreeBSD msun ports, < 1 ulp in the
//! ranges used here). The hypergeometric evaluation is local: the direct
//! power series is used for `z ≤ 0.5`, and the `z → 1 − z` connection
//! formulas (including the logarithmic cases where `c − a − b` is an
//! integer) take over above that so the series ratio never exceeds one half.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Stopping rule for series evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalTolerance {
    abs_tol: f64,
    max_terms: usize,
}

impl EvalTolerance {
    pub fn new(abs_tol: f64, max_terms: usize) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol.is_finite()) {
            return Err(Error::validation("abs_tol", format!("must be > 0, got {abs_tol}")));
        }
        if max_terms == 0 {
            return Err(Error::validation("max_terms", "must be at least 1"));
        }
        Ok(Self { abs_tol, max_terms })
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

impl Default for EvalTolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_terms: 10_000,
        }
    }
}

/// Gaussian Q-function, `P(N(0,1) > x)`.
pub fn q_func(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("q_func", format!("argument must be finite, got {x}")));
    }
    Ok(0.5 * libm::erfc(x * FRAC_1_SQRT_2))
}

/// Natural logarithm of Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain("ln_gamma", format!("argument must be positive, got {x}")));
    }
    Ok(libm::lgamma_r(x).0)
}

/// `μ(z) = √(z / (1 + z))`, the recurring ratio in the Nakagami-m closed forms.
pub fn mu_ratio(z: f64) -> Result<f64> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::domain("mu_ratio", format!("argument must be >= 0, got {z}")));
    }
    if z.is_infinite() {
        return Ok(1.0);
    }
    Ok((z / (1.0 + z)).sqrt())
}

/// Central binomial coefficient `C(2l, l)` as a float.
///
/// Exact by the multiplicative recurrence up to `l = 30`; log-space beyond.
pub fn central_binom(l: u32) -> f64 {
    if l <= 30 {
        // C(2k, k) = C(2k-2, k-1) * 2(2k-1)/k, exact in u64 up to k = 30.
        let mut c: u64 = 1;
        for k in 1..=u64::from(l) {
            c = c * 2 * (2 * k - 1) / k;
        }
        c as f64
    } else {
        let n = f64::from(l);
        let lg = libm::lgamma_r(2.0 * n + 1.0).0 - 2.0 * libm::lgamma_r(n + 1.0).0;
        lg.exp()
    }
}

/// Digamma function ψ(x) for real `x` that is not a non-positive integer.
pub(crate) fn digamma(x: f64) -> f64 {
    if x <= 0.0 {
        if x == x.floor() {
            return f64::NAN;
        }
        // Reflection: ψ(x) = ψ(1 - x) - π cot(πx)
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 16.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    acc + y.ln() - 0.5 / y - tail
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `Π Γ(num_i) / Π Γ(den_j)` evaluated through signed log-Gamma.
///
/// A non-positive integer in the denominator makes the ratio zero.
fn gamma_ratio(num: &[f64], den: &[f64]) -> f64 {
    if den.iter().any(|&d| is_nonpositive_integer(d)) {
        return 0.0;
    }
    let mut log = 0.0;
    let mut sign = 1i32;
    for &x in num {
        let (lg, s) = libm::lgamma_r(x);
        log += lg;
        sign *= s;
    }
    for &x in den {
        let (lg, s) = libm::lgamma_r(x);
        log -= lg;
        sign *= s;
    }
    f64::from(sign) * log.exp()
}

/// Above this argument the connection formulas about `z = 1` are used.
const SERIES_SWITCH: f64 = 0.5;

/// How close `c - a - b` must be to an integer to take the logarithmic route.
const INTEGER_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
enum Route {
    /// Terminating or plain power series for every `z`.
    Polynomial,
    /// Non-integer `s = c - a - b`; `F = A·F(a,b;1-s;w) + B·w^s·F(c-a,c-b;1+s;w)`.
    Connection { s: f64, coef_a: f64, coef_b: f64 },
    /// Integer `s = n`: logarithmic connection formulas.
    Logarithmic { n: i64 },
}

/// Gauss hypergeometric function `₂F₁(a, b; c; ·)` with its parameters fixed.
///
/// Preparing once and evaluating at many arguments amortises the Gamma
/// factors of the connection formulas, which matters for grid sweeps.
#[derive(Debug, Clone)]
pub struct Gauss2F1 {
    a: f64,
    b: f64,
    c: f64,
    tol: EvalTolerance,
    route: Route,
}

impl Gauss2F1 {
    pub fn new(a: f64, b: f64, c: f64, tol: EvalTolerance) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::domain("gauss_2f1", "parameters must be finite"));
        }
        if c <= 0.0 {
            return Err(Error::domain("gauss_2f1", format!("c must be > 0, got {c}")));
        }
        let route = if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
            Route::Polynomial
        } else {
            let s = c - a - b;
            let n = s.round();
            if (s - n).abs() < INTEGER_GAP {
                Route::Logarithmic { n: n as i64 }
            } else {
                Route::Connection {
                    s,
                    coef_a: gamma_ratio(&[c, s], &[c - a, c - b]),
                    coef_b: gamma_ratio(&[c, -s], &[a, b]),
                }
            }
        };
        Ok(Self { a, b, c, tol, route })
    }

    /// Evaluates at `z ∈ [0, 1)`.
    pub fn eval(&self, z: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&z) {
            return Err(Error::domain("gauss_2f1", format!("z must lie in [0, 1), got {z}")));
        }
        self.eval_split(z, 1.0 - z)
    }

    /// Evaluates with the complement `w = 1 - z` supplied by the caller,
    /// which keeps full relative precision in `w` as `z → 1`.
    pub(crate) fn eval_split(&self, z: f64, w: f64) -> Result<f64> {
        if z == 0.0 {
            return Ok(1.0);
        }
        if z <= SERIES_SWITCH {
            return self.series(self.a, self.b, self.c, z);
        }
        match self.route {
            Route::Polynomial => self.series(self.a, self.b, self.c, z),
            Route::Connection { s, coef_a, coef_b } => {
                let mut total = 0.0;
                if coef_a != 0.0 {
                    total += coef_a * self.series(self.a, self.b, 1.0 - s, w)?;
                }
                if coef_b != 0.0 {
                    total += coef_b
                        * w.powf(s)
                        * self.series(self.c - self.a, self.c - self.b, 1.0 + s, w)?;
                }
                Ok(total)
            }
            Route::Logarithmic { n } => self.logarithmic(n, w),
        }
    }

    /// Plain power series `Σ (a)_k (b)_k / (c)_k · x^k / k!`.
    ///
    /// Terms eventually decay like `x^k`, so the remainder after a term `t`
    /// is bounded by roughly `t / (1 - x)`; that bound is what gets compared
    /// with the tolerance.
    fn series(&self, a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
        let tail_factor = 1.0 / (1.0 - x);
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut small = 0;
        for k in 0..self.tol.max_terms() {
            let kf = k as f64;
            term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
            sum += term;
            if term == 0.0 {
                return Ok(sum);
            }
            if term.abs() * tail_factor <= self.tol.abs_tol() * sum.abs().max(1.0) {
                small += 1;
                if small == 2 {
                    return Ok(sum);
                }
            } else {
                small = 0;
            }
        }
        Err(Error::NonConvergence {
            op: "gauss_2f1",
            terms: self.tol.max_terms(),
            partial: sum,
        })
    }

    /// Connection formulas about `z = 1` when `c - a - b = n` is an integer.
    fn logarithmic(&self, n: i64, w: f64) -> Result<f64> {
        let (a, b, c) = (self.a, self.b, self.c);
        let ln_w = w.ln();
        let tail_factor = 1.0 / (1.0 - w);
        let m = n.unsigned_abs() as usize;
        let mf = m as f64;

        // Finite part: Σ_{k<m} (p)_k (q)_k / (k! (1-m)_k) w^k
        let finite = |p: f64, q: f64| {
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 0..m.saturating_sub(1) {
                let kf = k as f64;
                term *= (p + kf) * (q + kf) / ((kf + 1.0) * (1.0 - mf + kf)) * w;
                sum += term;
            }
            sum
        };

        // Logarithmic tail: Σ_k (p)_k (q)_k / (k! (k+m)!) w^k [ln w - ψ(k+1) - ψ(k+m+1) + ψ(p+k) + ψ(q+k)]
        let tail = |p: f64, q: f64| -> Result<f64> {
            let mut coef = 1.0 / gamma_ratio(&[mf + 1.0], &[]);
            let mut sum = 0.0;
            let mut small = 0;
            for k in 0..self.tol.max_terms() {
                let kf = k as f64;
                let bracket = ln_w - digamma(kf + 1.0) - digamma(kf + mf + 1.0)
                    + digamma(p + kf)
                    + digamma(q + kf);
                let term = coef * bracket;
                sum += term;
                if coef == 0.0
                    || term.abs() * tail_factor <= self.tol.abs_tol() * sum.abs().max(1.0)
                {
                    small += 1;
                    if small == 2 {
                        return Ok(sum);
                    }
                } else {
                    small = 0;
                }
                coef *= (p + kf) * (q + kf) / ((kf + 1.0) * (kf + mf + 1.0)) * w;
            }
            Err(Error::NonConvergence {
                op: "gauss_2f1",
                terms: self.tol.max_terms(),
                partial: sum,
            })
        };

        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        if n >= 0 {
            // c = a + b + m
            let head = if m == 0 {
                0.0
            } else {
                gamma_ratio(&[mf, c], &[a + mf, b + mf]) * finite(a, b)
            };
            let log_part = gamma_ratio(&[c], &[a, b]) * tail(a + mf, b + mf)?;
            Ok(head - sign * w.powi(m as i32) * log_part)
        } else {
            // c = a + b - m
            let head = gamma_ratio(&[mf, c], &[a, b]) * w.powi(-(m as i32)) * finite(a - mf, b - mf);
            let coef = gamma_ratio(&[c], &[a - mf, b - mf]);
            let log_part = if coef == 0.0 { 0.0 } else { coef * tail(a, b)? };
            Ok(head - sign * log_part)
        }
    }
}

/// `₂F₁(a, b; c; z)` for `0 ≤ z < 1`, `c > 0`, using the default tolerance.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    gauss_2f1_with(a, b, c, z, EvalTolerance::default())
}

pub fn gauss_2f1_with(a: f64, b: f64, c: f64, z: f64, tol: EvalTolerance) -> Result<f64> {
    Gauss2F1::new(a, b, c, tol)?.eval(z)
}
