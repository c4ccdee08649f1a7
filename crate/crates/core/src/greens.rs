//! Free Green's function of K_α P^α + κ² on the line and its κ-derivative.
//!
//! Three independent evaluation routes are provided:
//!
//! * [`greens_oracle`]: the momentum integral (1/π)∫₀^∞ cos(pr)/(K p^α + κ²) dp,
//!   integrated half-period by half-period with Wynn-epsilon acceleration of
//!   the alternating tail;
//! * [`greens_series_small`]: the convergent residue series in the scaled
//!   distance z = (|r|^α κ²/K)^{1/α} (integer powers z^{2m} plus the
//!   non-analytic powers z^{αm-1});
//! * [`greens_series_large`]: the asymptotic expansion in z^{-(mα+1)},
//!   optimally truncated. [`greens_large`] adds the exact remainder of the
//!   truncated expansion, written as a Laplace integral along the imaginary
//!   momentum axis.
//!
//! [`greens_eval`] dispatches between them. All routes work in the scaled
//! variable q = p (K/κ²)^{1/α}, in which G = P/π · ∫₀^∞ cos(zq)/(1+q^α) dq with
//! P = K^{-1/α} κ^{2/α-2}.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{Adaptive, WynnEpsilon};
use crate::special::{
    cos_pi, gamma, ln_gamma_pos, resonance_check, sin_pi, CompensatedSum, FractionalIndex,
    RESONANCE_M_MAX, RESONANCE_THRESHOLD,
};

/// Series truncation cap.
pub const SERIES_M_MAX: usize = 40;
/// Relative size of the next term at which a convergent series is truncated.
const SERIES_STOP: f64 = 1e-14;
/// Relative size of the last term above which the tail counts as unconverged.
const SERIES_TAIL_FAIL: f64 = 1e-12;
/// Largest acceptable Σ|term| / |Σ term| for the residue series.
const SERIES_MAX_CONDITION: f64 = 1e12;
/// Default accuracy requested from the oracle inside [`greens_eval`].
pub const ORACLE_TOL: f64 = 1e-12;
const ORACLE_BUDGET: usize = 1_000_000;

/// Scaled distances at which [`greens_eval`] switches evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossover {
    /// Small-z series for z <= small_max.
    pub small_max: f64,
    /// Large-z expansion for z >= large_min; the oracle covers the gap.
    pub large_min: f64,
}

impl Default for Crossover {
    fn default() -> Self {
        Self {
            small_max: 2.0,
            large_min: 8.0,
        }
    }
}

/// Log-magnitude and sign of one series coefficient.
#[derive(Debug, Clone, Copy)]
struct Coef {
    ln_abs: f64,
    negative: bool,
}

impl Coef {
    fn new(value_sign: f64, ln_abs: f64) -> Self {
        Self {
            ln_abs,
            negative: value_sign < 0.0,
        }
    }

    #[inline]
    fn term(self, ln_power: f64) -> f64 {
        let mag = (self.ln_abs + ln_power).exp();
        if self.negative {
            -mag
        } else {
            mag
        }
    }
}

/// Coefficients of both small-z series, depending on α only.
#[derive(Debug)]
struct SeriesTable {
    /// (-1)^m / (Γ(2m+1) sin((2m+1)π/α)), m = 0..=M
    odd: Vec<Coef>,
    /// (α/2)(-1)^{m+1} / (Γ(αm) cos(mαπ/2)), index m = 0..=M (entry 0 unused)
    alpha: Vec<Coef>,
}

impl SeriesTable {
    fn new(alpha: FractionalIndex, m_max: usize) -> Self {
        let a = alpha.value();
        let odd = (0..=m_max)
            .map(|m| {
                let d = alpha.odd_denominator(m);
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 } * d.signum();
                Coef::new(sign, -ln_gamma_pos((2 * m + 1) as f64) - d.abs().ln())
            })
            .collect();
        let alpha_coefs = (0..=m_max)
            .map(|m| {
                if m == 0 {
                    return Coef::new(0.0, f64::NEG_INFINITY);
                }
                let d = alpha.alpha_denominator(m);
                let sign = if m % 2 == 1 { 1.0 } else { -1.0 } * d.signum();
                Coef::new(
                    sign,
                    (0.5 * a).ln() - ln_gamma_pos(a * m as f64) - d.abs().ln(),
                )
            })
            .collect();
        Self {
            odd,
            alpha: alpha_coefs,
        }
    }
}

/// (α, K_α, κ) with cached series coefficients.
#[derive(Debug, Clone)]
pub struct GreensContext {
    alpha: FractionalIndex,
    k_alpha: f64,
    kappa: f64,
    crossover: Crossover,
    resonant: bool,
    table: Arc<SeriesTable>,
}

impl GreensContext {
    pub fn new(alpha: FractionalIndex, k_alpha: f64, kappa: f64) -> Result<Self> {
        if !(k_alpha > 0.0) || !k_alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("K_alpha must be > 0, got {k_alpha}")));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be > 0, got {kappa}")));
        }
        Ok(Self {
            alpha,
            k_alpha,
            kappa,
            crossover: Crossover::default(),
            resonant: resonance_check(alpha, RESONANCE_M_MAX, RESONANCE_THRESHOLD),
            table: Arc::new(SeriesTable::new(alpha, SERIES_M_MAX)),
        })
    }

    /// Same α and K at a different κ, sharing the coefficient table.
    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be > 0, got {kappa}")));
        }
        Ok(Self {
            kappa,
            ..self.clone()
        })
    }

    pub fn with_crossover(mut self, crossover: Crossover) -> Self {
        self.crossover = crossover;
        self
    }

    pub fn alpha(&self) -> FractionalIndex {
        self.alpha
    }

    pub fn k_alpha(&self) -> f64 {
        self.k_alpha
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn crossover(&self) -> Crossover {
        self.crossover
    }

    /// Whether the residue series are refused for this α.
    pub fn is_resonant(&self) -> bool {
        self.resonant
    }

    /// Inverse momentum scale (κ²/K)^{1/α}.
    pub fn momentum_scale(&self) -> f64 {
        (self.kappa * self.kappa / self.k_alpha).powf(1.0 / self.alpha.value())
    }

    /// z = (|r|^α κ² / K)^{1/α}.
    pub fn z(&self, r: f64) -> f64 {
        r.abs() * self.momentum_scale()
    }

    /// Distance corresponding to a scaled distance z.
    pub fn r_of_z(&self, z: f64) -> f64 {
        z / self.momentum_scale()
    }

    /// K^{-1/α} κ^{2/α - 2}; G = scale/π · ∫cos(zq)/(1+q^α) dq.
    fn scale(&self) -> f64 {
        let a = self.alpha.value();
        self.k_alpha.powf(-1.0 / a) * self.kappa.powf(2.0 / a - 2.0)
    }

    /// 1 / (α K^{1/α} κ^{2(1-1/α)}), the prefactor of the residue series.
    pub fn prefactor(&self) -> f64 {
        self.scale() / self.alpha.value()
    }

    /// G_sing = κ^{2(1/α-1)} / (α K^{1/α} sin(π/α)), the κ-divergent term
    /// and the exact value of G at r = 0.
    pub fn singular(&self) -> f64 {
        self.prefactor() / sin_pi(1.0 / self.alpha.value())
    }

    /// |r|^{α-1} / (2 K Γ(α) cos(απ/2)), the κ-independent term.
    pub fn constant_term(&self, r: f64) -> f64 {
        let a = self.alpha.value();
        if r == 0.0 {
            return 0.0;
        }
        r.abs().powf(a - 1.0) / (2.0 * self.k_alpha * gamma(a) * cos_pi(a / 2.0))
    }

    fn check_series(&self, m_max: usize) -> Result<()> {
        if self.resonant || resonance_check(self.alpha, m_max.max(1), RESONANCE_THRESHOLD) {
            return Err(Error::ResonantAlpha {
                alpha: self.alpha.value(),
                margin: self.alpha.resonance_margin(m_max.max(1)),
            });
        }
        Ok(())
    }
}

/// Which evaluator produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// α = 2: both residue series summed in closed form.
    Closed,
    Small,
    Large,
    Oracle,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Closed => "closed",
            Branch::Small => "small",
            Branch::Large => "large",
            Branch::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreensValue {
    pub value: f64,
    pub branch: Branch,
}

/// Singular / constant / regular split of the small-z series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreensDecomposition {
    pub singular: f64,
    pub constant: f64,
    pub regular: f64,
}

impl GreensDecomposition {
    pub fn total(&self) -> f64 {
        self.singular + self.constant + self.regular
    }
}

// ---------------------------------------------------------------------------
// oracle

/// ∫₀^∞ cos(zq) / (1 + q^α) dq to absolute accuracy `abs_tol`.
pub fn scaled_cosine_integral(z: f64, alpha: f64, abs_tol: f64) -> Result<(f64, f64)> {
    let f = |q: f64| 1.0 / (1.0 + q.powf(alpha));
    let quad = Adaptive::new(0.1 * abs_tol, 1e-14).with_max_panels(4000);
    if z == 0.0 {
        let head = quad.integrate(f, 0.0, 1.0)?;
        // ∫₁^∞ dq/(1+q^α) with q = s^{-m}
        let m = (2.0 / (alpha - 1.0)).ceil();
        let tail = quad.integrate(
            |s: f64| {
                if s == 0.0 {
                    return 0.0;
                }
                m * s.powf(m * (alpha - 1.0) - 1.0) / (1.0 + s.powf(m * alpha))
            },
            0.0,
            1.0,
        )?;
        return Ok((head.value + tail.value, head.error + tail.error));
    }

    let g = |q: f64| (z * q).cos() * f(q);
    let half = PI / z;
    let k0 = ((4.0 * z / PI - 0.5).ceil()).max(0.0) as usize;
    let q0 = (k0 as f64 + 0.5) * half;
    let mut breaks: Vec<f64> = (0..k0.min(4000)).map(|k| (k as f64 + 0.5) * half).collect();
    let mut b = 1.0;
    while b < q0 {
        breaks.push(b);
        b *= 2.0;
    }
    let head = quad.integrate_with_breaks(g, 0.0, q0, &breaks)?;
    let mut evaluations = head.evaluations;
    let mut sum = head.value;
    let mut panel_err = head.error;
    let mut eps = WynnEpsilon::new();
    eps.push(sum);
    let mut lo = q0;
    let cycle_quad = Adaptive::new(0.01 * abs_tol, 1e-15).with_max_panels(50);
    let mut last = (sum, f64::INFINITY);
    let mut prev = sum;
    for k in 0..4000 {
        let hi = lo + half;
        let c = cycle_quad.integrate(g, lo, hi)?;
        evaluations += c.evaluations;
        prev = sum;
        sum += c.value;
        panel_err += c.error;
        lo = hi;
        eps.push(sum);
        last = eps.extrapolate();
        if k >= 4 && last.1 + panel_err < abs_tol {
            return Ok((last.0, last.1 + panel_err));
        }
        if evaluations > ORACLE_BUDGET {
            break;
        }
    }
    Err(Error::QuadratureNotConverged {
        estimate: last.0,
        error: last.1 + panel_err,
        // consecutive partial sums of the alternating tail bracket the limit
        lo: sum.min(prev),
        hi: sum.max(prev),
    })
}

/// (1/π)∫₀^∞ cos(pr)/(K p^α + κ²) dp with absolute error ≲ tol·(1 + |G|).
pub fn greens_oracle(r: f64, ctx: &GreensContext, tol: f64) -> Result<f64> {
    if !(tol > 1e-13 && tol < 1e-4) {
        return Err(Error::InvalidParameter(format!(
            "oracle tolerance must lie in (1e-13, 1e-4), got {tol}"
        )));
    }
    if !r.is_finite() {
        return Err(Error::NonFinite(format!("r = {r}")));
    }
    let scale = ctx.scale() / PI;
    let abs_tol = tol / scale;
    let (value, _) = scaled_cosine_integral(ctx.z(r), ctx.alpha.value(), abs_tol)?;
    Ok(scale * value)
}

// ---------------------------------------------------------------------------
// small-z series

/// Sums the residue series. `odd_factor(m)` and `alpha_factor(m)` scale the
/// m-th coefficient; the α-series starts at `alpha_start`.
fn small_series_sum(
    z: f64,
    ctx: &GreensContext,
    m_max: usize,
    odd_start: usize,
    alpha_start: usize,
    odd_factor: impl Fn(usize) -> f64,
    alpha_factor: impl Fn(usize) -> f64,
) -> Result<f64> {
    ctx.check_series(m_max)?;
    let table = &ctx.table;
    let m_max = m_max.min(SERIES_M_MAX);
    let a = ctx.alpha.value();
    let mut acc = CompensatedSum::new();
    if z == 0.0 {
        if odd_start == 0 {
            acc.add(table.odd[0].term(0.0) * odd_factor(0));
        }
        return Ok(acc.value());
    }
    let lz = z.ln();
    let mut last = 0.0;
    let mut converged = false;
    for m in 0..=m_max {
        let mut step = 0.0;
        if m >= odd_start {
            let t = table.odd[m].term(2.0 * m as f64 * lz) * odd_factor(m);
            acc.add(t);
            step += t.abs();
        }
        if m >= alpha_start && m >= 1 {
            let t = table.alpha[m].term((a * m as f64 - 1.0) * lz) * alpha_factor(m);
            acc.add(t);
            step += t.abs();
        }
        last = step;
        let started = m >= odd_start.max(alpha_start).max(1);
        if started && step <= SERIES_STOP * acc.value().abs() {
            converged = true;
            break;
        }
    }
    let value = acc.value();
    if !converged && last > SERIES_TAIL_FAIL * value.abs() {
        return Err(Error::TailNotConverged {
            terms: m_max + 1,
            ratio: last / value.abs(),
        });
    }
    let condition = acc.condition();
    if condition > SERIES_MAX_CONDITION {
        return Err(Error::IllConditionedSeries { condition });
    }
    Ok(value)
}

/// Small-z residue series for G, truncated at `m_max` terms.
pub fn greens_series_small(r: f64, ctx: &GreensContext, m_max: usize) -> Result<f64> {
    let s = small_series_sum(ctx.z(r), ctx, m_max, 0, 1, |_| 1.0, |_| 1.0)?;
    Ok(ctx.prefactor() * s)
}

/// Singular, constant and regular parts of the small-z series.
pub fn greens_decompose(r: f64, ctx: &GreensContext, m_max: usize) -> Result<GreensDecomposition> {
    ctx.check_series(m_max)?;
    let regular = ctx.prefactor() * small_series_sum(ctx.z(r), ctx, m_max, 1, 2, |_| 1.0, |_| 1.0)?;
    Ok(GreensDecomposition {
        singular: ctx.singular(),
        constant: ctx.constant_term(r),
        regular,
    })
}

/// ∂G/∂κ from the differentiated residue series (the m = 1 α-term drops out).
pub fn dgreens_series(r: f64, ctx: &GreensContext, m_max: usize) -> Result<f64> {
    let a = ctx.alpha.value();
    let s = small_series_sum(
        ctx.z(r),
        ctx,
        m_max,
        0,
        2,
        |m| 1.0 - (2 * m + 1) as f64 / a,
        |m| 1.0 - m as f64,
    )?;
    let pref = -2.0 / (a * ctx.k_alpha.powf(1.0 / a) * ctx.kappa.powf(3.0 - 2.0 / a));
    Ok(pref * s)
}

/// Closed-form ∂G/∂κ at r = 0: -2(1-1/α) / (α K^{1/α} κ^{3-2/α} sin(π/α)).
pub fn dgreens_singular(ctx: &GreensContext) -> f64 {
    let a = ctx.alpha.value();
    -2.0 * (1.0 - 1.0 / a) / (a * ctx.k_alpha.powf(1.0 / a) * ctx.kappa.powf(3.0 - 2.0 / a))
        / sin_pi(1.0 / a)
}

// ---------------------------------------------------------------------------
// large-z expansion

/// Number of terms kept by the smallest-term rule.
fn optimal_terms(z: f64, a: f64, m_max: usize) -> Result<usize> {
    let env = |m: usize| ln_gamma_pos(1.0 + m as f64 * a) - (m as f64 * a + 1.0) * z.ln();
    if env(2) >= env(1) {
        return Err(Error::AsymptoticRange { z });
    }
    let mut m = 1;
    while m < m_max && env(m + 1) < env(m) {
        m += 1;
    }
    // m is the smallest term
    Ok(m)
}

fn large_series_scaled(z: f64, a: f64, terms: usize) -> f64 {
    let lz = z.ln();
    let mut acc = CompensatedSum::new();
    for m in 1..=terms {
        let s = sin_pi(m as f64 * a / 2.0);
        if s == 0.0 {
            continue;
        }
        let mag = (ln_gamma_pos(1.0 + m as f64 * a) - (m as f64 * a + 1.0) * lz).exp();
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        acc.add(sign * s * mag);
    }
    acc.value()
}

/// Asymptotic large-z series truncated at its smallest term (or at
/// `m_max`). Its error is of the order of the omitted smallest term.
pub fn greens_series_large(r: f64, ctx: &GreensContext, m_max: usize) -> Result<f64> {
    let z = ctx.z(r);
    if !(z > 0.0) {
        return Err(Error::AsymptoticRange { z });
    }
    ctx.check_series(m_max)?;
    let a = ctx.alpha.value();
    if ctx.alpha.is_two() {
        return Ok(0.0);
    }
    let terms = optimal_terms(z, a, m_max)?;
    Ok(ctx.scale() / PI * large_series_scaled(z, a, terms))
}

/// Remainder of the large-z expansion after `terms` terms, in scaled units:
/// Re[i ∫₀^∞ e^{-zt} (-w)^{N+1} / (1+w) dt] with w = e^{iπα/2} t^α.
fn large_remainder_scaled(z: f64, a: f64, terms: usize) -> Result<f64> {
    let theta = PI * a / 2.0;
    let power = (terms + 1) as f64;
    let phase = Complex64::from_polar(1.0, power * theta) * if terms.is_multiple_of(2) { -1.0 } else { 1.0 };
    let e_theta = Complex64::from_polar(1.0, theta);
    let integrand = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        let t = u / z;
        let rho = t.powf(a);
        let log_mag = -u + power * a * t.ln();
        let x = phase / (1.0 + rho * e_theta);
        -x.im * log_mag.exp()
    };
    let peak = power * a;
    let upper = peak + 60.0 + 10.0 * peak.sqrt();
    let mut breaks = vec![peak];
    let c = cos_pi(a / 2.0);
    if c < 0.0 {
        breaks.push(z * (-c).powf(1.0 / a));
    }
    let scale = (-peak + peak * (peak / z).ln()).exp().max(1e-300);
    let est = Adaptive::new(1e-14 * scale, 1e-11)
        .with_max_panels(2000)
        .integrate_with_breaks(integrand, 0.0, upper, &breaks)?;
    Ok(est.value / z)
}

/// Large-z evaluator: the truncated asymptotic series plus its exact
/// remainder integral. Valid for every z > 0; efficient once z is a few units.
pub fn greens_large(r: f64, ctx: &GreensContext, m_max: usize) -> Result<f64> {
    let z = ctx.z(r);
    if !(z > 0.0) {
        return Err(Error::AsymptoticRange { z });
    }
    let a = ctx.alpha.value();
    if ctx.alpha.is_two() {
        return Err(Error::InvalidParameter(
            "alpha = 2 has no algebraic tail; use the closed form".into(),
        ));
    }
    // the remainder is exact for any truncation, so fall back to one term
    // where the series has no decreasing start
    let terms = optimal_terms(z, a, m_max).unwrap_or(1);
    let series = large_series_scaled(z, a, terms);
    let rem = large_remainder_scaled(z, a, terms)?;
    Ok(ctx.scale() / PI * (series + rem))
}

// ---------------------------------------------------------------------------
// dispatcher

fn closed_form_two(r: f64, ctx: &GreensContext) -> f64 {
    (-ctx.z(r)).exp() / (2.0 * ctx.k_alpha.sqrt() * ctx.kappa)
}

/// G(r; κ), choosing the evaluator by the scaled distance.
pub fn greens_eval(r: f64, ctx: &GreensContext) -> Result<GreensValue> {
    if !r.is_finite() {
        return Err(Error::NonFinite(format!("r = {r}")));
    }
    if ctx.alpha.is_two() {
        return Ok(GreensValue {
            value: closed_form_two(r, ctx),
            branch: Branch::Closed,
        });
    }
    let z = ctx.z(r);
    if !ctx.resonant {
        if z <= ctx.crossover.small_max {
            if let Ok(v) = greens_series_small(r, ctx, SERIES_M_MAX) {
                return Ok(GreensValue {
                    value: v,
                    branch: Branch::Small,
                });
            }
        } else if z >= ctx.crossover.large_min {
            if let Ok(v) = greens_large(r, ctx, SERIES_M_MAX) {
                return Ok(GreensValue {
                    value: v,
                    branch: Branch::Large,
                });
            }
        }
    }
    let value = greens_oracle(r, ctx, ORACLE_TOL)?;
    Ok(GreensValue {
        value,
        branch: Branch::Oracle,
    })
}

/// G(r; κ) without the branch tag.
pub fn greens(r: f64, ctx: &GreensContext) -> Result<f64> {
    greens_eval(r, ctx).map(|v| v.value)
}

/// G(r; κ) - G_sing(κ), the kernel of the finite part, computed without
/// cancellation on the small-z branch.
pub fn greens_finite(r: f64, ctx: &GreensContext) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    if ctx.alpha.is_two() {
        return Ok((-ctx.z(r)).exp_m1() / (2.0 * ctx.k_alpha.sqrt() * ctx.kappa));
    }
    if !ctx.resonant && ctx.z(r) <= ctx.crossover.small_max {
        if let Ok(d) = greens_decompose(r, ctx, SERIES_M_MAX) {
            return Ok(d.constant + d.regular);
        }
    }
    Ok(greens(r, ctx)? - ctx.singular())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ctx(alpha: f64, k: f64, kappa: f64) -> GreensContext {
        GreensContext::new(FractionalIndex::new(alpha).unwrap(), k, kappa).unwrap()
    }

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn context_validation() {
        let a = FractionalIndex::new(1.5).unwrap();
        assert!(GreensContext::new(a, 1.0, 0.0).is_err());
        assert!(GreensContext::new(a, -1.0, 1.0).is_err());
        let c = ctx(SQRT2, 2.0, 0.7);
        assert_eq!(c.z(0.0), 0.0);
        assert_relative_eq!(c.z(-1.3), (1.3f64.powf(SQRT2) * 0.49 / 2.0).powf(1.0 / SQRT2));
        assert_relative_eq!(c.r_of_z(c.z(2.5)), 2.5, max_relative = 1e-14);
    }

    #[test]
    fn oracle_alpha_two_matches_exponential() {
        let c = ctx(2.0, 1.0, 1.0);
        assert!((greens_oracle(0.0, &c, 1e-12).unwrap() - 0.5).abs() < 1e-11);
        for r in [0.1, 1.0, 3.0, 7.5] {
            let g = greens_oracle(r, &c, 1e-12).unwrap();
            assert!((g - (-r).exp() / 2.0).abs() < 1e-11, "r={r} g={g}");
        }
    }

    #[test]
    fn oracle_at_origin_matches_closed_integral() {
        for (a, k, kappa) in [(SQRT2, 1.0, 1.0), (1.2, 2.0, 0.3), (1.9, 0.5, 3.0), (1.05, 1.0, 1.0)] {
            let c = ctx(a, k, kappa);
            let g = greens_oracle(0.0, &c, 1e-12).unwrap();
            assert_relative_eq!(g, c.singular(), max_relative = 1e-11);
        }
    }

    #[test]
    fn oracle_matches_frozen_reference() {
        // from python/reference_values.py (rotated-contour integral, 40 digits)
        let c = ctx(SQRT2, 1.0, 0.5);
        assert_relative_eq!(
            greens_oracle(1.0, &c, 1e-12).unwrap(),
            0.478_560_831_742_690_790_3,
            max_relative = 1e-12
        );
        let unit = ctx(SQRT2, 1.0, 1.0);
        for (z, v) in [
            (0.3, 0.359_764_995_889_048_118_89),
            (1.0, 0.144_406_601_498_820_452_76),
            (3.0, 0.026_644_890_223_400_025_018),
            (6.0, 0.005_377_473_802_717_787_403_7),
            (12.0, 0.000_899_328_754_280_350_582_84),
            (30.0, 0.000_089_607_414_916_516_368_71),
        ] {
            let g = greens_oracle(z, &unit, 1e-13 * 1.01).unwrap();
            assert!((g - v).abs() < 2e-13 * (1.0 + v), "z={z}: {g} vs {v}");
        }
        let a19 = ctx(1.9 + 5f64.sqrt() * 1e-4, 1.0, 1.0);
        assert_relative_eq!(
            greens_oracle(30.0, &a19, 1e-13 * 1.01).unwrap(),
            4.872_623_753_214_556_621_6e-6,
            max_relative = 1e-7
        );
    }

    #[test]
    fn oracle_rejects_bad_tolerance() {
        let c = ctx(SQRT2, 1.0, 1.0);
        assert!(greens_oracle(1.0, &c, 1e-3).is_err());
        assert!(greens_oracle(1.0, &c, 1e-14).is_err());
    }

    #[test]
    fn small_series_examples() {
        let c = ctx(SQRT2, 1.3, 0.8);
        assert_relative_eq!(greens_series_small(0.0, &c, 40).unwrap(), c.singular(), max_relative = 1e-15);
        let two = ctx(2.0, 1.0, 1.0);
        assert!((greens_series_small(1.0, &two, 30).unwrap() - 0.183_939_720_585_721_2).abs() < 1e-10);
        let c = ctx(SQRT2, 1.0, 0.5);
        let s = greens_series_small(1.0, &c, 40).unwrap();
        let o = greens_oracle(1.0, &c, 1e-13 * 1.01).unwrap();
        assert_relative_eq!(s, o, max_relative = 1e-8);
    }

    #[test]
    fn small_series_refuses_resonant_alpha() {
        let c = ctx(1.5, 1.0, 1.0);
        assert!(c.is_resonant());
        assert!(matches!(
            greens_series_small(0.5, &c, 40),
            Err(Error::ResonantAlpha { .. })
        ));
        assert!(matches!(
            greens_decompose(0.5, &c, 40),
            Err(Error::ResonantAlpha { .. })
        ));
        // dispatcher falls back to the oracle
        let v = greens_eval(0.5, &c).unwrap();
        assert_eq!(v.branch, Branch::Oracle);
    }

    #[test]
    fn small_series_reports_unconverged_tail() {
        let c = ctx(SQRT2, 1.0, 1.0);
        assert!(matches!(
            greens_series_small(6.0, &c, 3),
            Err(Error::TailNotConverged { .. })
        ));
    }

    #[test]
    fn large_series_examples() {
        let two = ctx(2.0, 1.0, 1.0);
        for r in [5.0, 20.0, 100.0] {
            assert_eq!(greens_series_large(r, &two, 40).unwrap(), 0.0);
        }
        let c = ctx(SQRT2, 1.0, 1.0);
        // leading term is positive and dominates at large z
        let z: f64 = 200.0;
        let lead = c.prefactor() * SQRT2 / PI * gamma(1.0 + SQRT2) * sin_pi(SQRT2 / 2.0)
            * z.powf(-(SQRT2 + 1.0));
        assert!(lead > 0.0);
        assert_relative_eq!(greens_series_large(z, &c, 40).unwrap(), lead, max_relative = 0.05);
        assert!(matches!(
            greens_series_large(0.5, &c, 40),
            Err(Error::AsymptoticRange { .. })
        ));
        // z = 40: optimally truncated series alone is already at ~1e-12
        let o = greens_oracle(40.0, &c, 1e-13 * 1.01).unwrap();
        assert_relative_eq!(greens_series_large(40.0, &c, 40).unwrap(), o, max_relative = 1e-10);
    }

    #[test]
    fn large_series_error_floor_is_exponentially_small() {
        // At z = 20 the smallest-term rule leaves a relative error of
        // 1.05e-6 (40-digit reference); the remainder integral removes it.
        let c = ctx(SQRT2, 1.0, 1.0);
        let o = greens_oracle(20.0, &c, 1e-13 * 1.01).unwrap();
        let pure = greens_series_large(20.0, &c, 40).unwrap();
        let rel = (pure / o - 1.0).abs();
        assert!(rel > 1.0e-6 && rel < 1.1e-6, "rel = {rel}");
        let full = greens_large(20.0, &c, 40).unwrap();
        assert_relative_eq!(full, o, max_relative = 1e-9);
    }

    #[test]
    fn large_with_remainder_matches_oracle_from_z_three() {
        for a in [SQRT2, 1.2 + 3f64.sqrt() * 1e-3, 1.9 + 5f64.sqrt() * 1e-4, 1.05] {
            let c = ctx(a, 1.0, 1.0);
            for z in [3.0, 5.0, 8.0, 10.0, 15.0] {
                let o = greens_oracle(z, &c, 1e-13 * 1.01).unwrap();
                let l = greens_large(z, &c, 40).unwrap();
                assert_relative_eq!(l, o, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn eval_alpha_two_closed_form() {
        for (k, kappa) in [(1.0, 0.1), (2.0, 1.0), (0.5, 10.0)] {
            let c = ctx(2.0, k, kappa);
            for r in [0.0, 0.5, 3.0, 10.0] {
                let g = greens_eval(r, &c).unwrap();
                let want = (-r * kappa / f64::sqrt(k)).exp() / (2.0 * f64::sqrt(k) * kappa);
                assert_relative_eq!(g.value, want, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn eval_is_even_and_continuous() {
        let c = ctx(SQRT2, 1.0, 1.0);
        for r in [0.3, 1.7, 5.0, 12.0] {
            assert_eq!(greens(r, &c).unwrap(), greens(-r, &c).unwrap());
        }
        for zc in [c.crossover().small_max, c.crossover().large_min] {
            let r = c.r_of_z(zc);
            let below = greens_eval(r * (1.0 - 1e-12), &c).unwrap();
            let above = greens_eval(r * (1.0 + 1e-12), &c).unwrap();
            assert_ne!(below.branch, above.branch);
            assert_relative_eq!(below.value, above.value, max_relative = 1e-8);
        }
    }

    #[test]
    fn decomposition_examples() {
        let c = ctx(SQRT2, 1.0, 0.5);
        let d = greens_decompose(0.7, &c, 40).unwrap();
        assert!(d.constant < 0.0);
        assert_relative_eq!(d.total(), greens_series_small(0.7, &c, 40).unwrap(), max_relative = 1e-12);
        // α -> 2: constant -> -|r|/2
        let near_two = ctx(2.0 - 1e-7, 1.0, 1.0);
        let d = greens_decompose(0.8, &near_two, 40).unwrap();
        assert_relative_eq!(d.constant, -0.4, max_relative = 1e-5);
    }

    #[test]
    fn finite_part_consistent_with_full() {
        let c = ctx(SQRT2, 1.0, 0.3);
        for r in [1e-4, 0.2, 3.0, 9.0, 40.0] {
            let f = greens_finite(r, &c).unwrap();
            let g = greens(r, &c).unwrap();
            assert!((f + c.singular() - g).abs() < 1e-12 * c.singular());
        }
        assert_eq!(greens_finite(0.0, &c).unwrap(), 0.0);
    }

    #[test]
    fn derivative_series_examples() {
        let c = ctx(SQRT2, 1.0, 1.0);
        assert_relative_eq!(dgreens_series(0.0, &c, 40).unwrap(), dgreens_singular(&c), max_relative = 1e-14);
        // frozen 40-digit central difference of the momentum integral
        assert_relative_eq!(dgreens_series(1.0, &c, 40).unwrap(), -0.307_151_746_179_377, max_relative = 1e-11);
        let two = ctx(2.0, 1.0, 0.8);
        for r in [0.0, 0.5, 1.5] {
            let want = -(-r * 0.8f64).exp() * (1.0 + r * 0.8) / (2.0 * 0.64);
            assert_relative_eq!(dgreens_series(r, &two, 40).unwrap(), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn kappa_scaling_at_origin() {
        let a = FractionalIndex::new(SQRT2).unwrap();
        let c1 = GreensContext::new(a, 1.0, 0.4).unwrap();
        let c2 = c1.with_kappa(1.6).unwrap();
        let ratio = greens(0.0, &c2).unwrap() / greens(0.0, &c1).unwrap();
        assert_relative_eq!(ratio, 4f64.powf(2.0 * (1.0 / SQRT2 - 1.0)), max_relative = 1e-12);
    }

    #[test]
    fn decay_rate_at_large_distance() {
        for a in [SQRT2, 1.2 + 3f64.sqrt() * 1e-3, 1.9 + 5f64.sqrt() * 1e-4] {
            let c = ctx(a, 1.0, 1.0);
            let zs: Vec<f64> = (0..=10).map(|i| 20.0 * 10f64.powf(i as f64 / 10.0)).collect();
            let lx: Vec<f64> = zs.iter().map(|z| z.ln()).collect();
            let ly: Vec<f64> = zs.iter().map(|&z| greens(c.r_of_z(z), &c).unwrap().ln()).collect();
            let n = lx.len() as f64;
            let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
            let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
            let slope = sxy / sxx;
            assert!((slope / -(a + 1.0) - 1.0).abs() < 0.05, "alpha {a}: slope {slope}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn positive_and_decreasing(alpha in 1.05f64..1.999, kappa in 0.05f64..5.0, k in 0.2f64..5.0) {
            let c = ctx(alpha, k, kappa);
            let mut prev = f64::INFINITY;
            for i in 0..40 {
                let r = c.r_of_z(0.5 * i as f64);
                let g = greens(r, &c).unwrap();
                prop_assert!(g > 0.0);
                prop_assert!(g <= prev * (1.0 + 1e-12));
                prev = g;
            }
        }

        #[test]
        fn origin_scales_with_kappa(alpha in 1.05f64..=2.0, kappa in 1e-3f64..10.0, t in 0.1f64..10.0) {
            let c = ctx(alpha, 1.0, kappa);
            let ratio = greens(0.0, &c.with_kappa(t * kappa).unwrap()).unwrap() / greens(0.0, &c).unwrap();
            prop_assert!((ratio / t.powf(2.0 * (1.0 / alpha - 1.0)) - 1.0).abs() < 1e-10);
        }
    }

}
