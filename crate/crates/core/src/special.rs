//! Series machinery shared by the evaluators: log-gamma, digamma, exact
//! trigonometric helpers, pole bookkeeping of the Mellin–Barnes integrand,
//! resonance detection and the exponential inversion series.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default threshold below which a series denominator counts as resonant.
pub const RESONANCE_THRESHOLD: f64 = 1e-8;
/// Default number of terms inspected by the resonance guard.
pub const RESONANCE_M_MAX: usize = 40;
/// Absolute distance at which two poles are considered to collide.
pub const POLE_COLLISION_TOL: f64 = 1e-9;

#[cfg(test)]
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Γ(x) for x > 0, through the log.
pub fn gamma(x: f64) -> f64 {
    ln_gamma_pos(x).exp()
}

/// Σ_{n≥n0} n^{-s} for s > 1 and n0 ≥ 1 (Euler–Maclaurin after ten explicit terms).
pub fn zeta_tail(s: f64, n0: u64) -> f64 {
    debug_assert!(s > 1.0 && n0 >= 1);
    // B_2j / (2j)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
    ];
    let m = n0 + 10;
    let mut sum = CompensatedSum::new();
    for n in n0..m {
        sum.add((n as f64).powf(-s));
    }
    let mf = m as f64;
    sum.add(mf.powf(1.0 - s) / (s - 1.0));
    sum.add(0.5 * mf.powf(-s));
    let mut rising = s;
    let mut power = mf.powf(-s - 1.0);
    for (j, b) in B.iter().enumerate() {
        sum.add(b * rising * power);
        let a = s + (2 * j + 1) as f64;
        rising *= a * (a + 1.0);
        power /= mf * mf;
    }
    sum.value()
}

/// Σ_{n≥1} 1 / (n^α + y) for α > 1, y ≥ 0.
pub fn shifted_power_sum(alpha: f64, y: f64) -> f64 {
    let n0 = 20 + (2.0 * y.powf(1.0 / alpha)).ceil() as u64;
    let mut acc = CompensatedSum::new();
    for n in 1..n0 {
        acc.add(1.0 / ((n as f64).powf(alpha) + y));
    }
    // tail: Σ_m (-y)^m Σ_{n≥n0} n^{-α(m+1)}, |y| n0^{-α} < 2^{-α}
    let mut coef = 1.0;
    for m in 0..200 {
        let t = coef * zeta_tail(alpha * (m + 1) as f64, n0);
        acc.add(t);
        if t.abs() < 1e-18 * acc.value().abs() {
            break;
        }
        coef *= -y;
    }
    acc.value()
}

/// Digamma ψ(x) = d ln Γ / dx for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma requires x > 0, got {x}")));
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 20.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // B_2k / (2k)
    let series = inv2
        * (1.0 / 12.0
            - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    Ok(acc + x.ln() - 0.5 / x - series)
}

/// sin(πx), exactly zero at integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round(); // r in [-1, 1]
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    let (sign, r) = if r < 0.0 { (-1.0, -r) } else { (1.0, r) };
    let r = if r > 0.5 { 1.0 - r } else { r };
    sign * (PI * r).sin()
}

/// cos(πx), exactly zero at half-integers.
pub fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// Neumaier-compensated sum that also tracks Σ|term| for a condition number.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs += x.abs();
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn abs_total(&self) -> f64 {
        self.abs
    }

    /// Σ|term| / |Σ term|; infinite for an exactly cancelling sum.
    pub fn condition(&self) -> f64 {
        let v = self.value().abs();
        if v == 0.0 {
            if self.abs == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.abs / v
        }
    }
}

/// A validated fractional index α ∈ (1, 2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionalIndex(f64);

impl FractionalIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 1.0 && alpha <= 2.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidParameter(format!(
                "alpha must lie in (1, 2], got {alpha}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_two(self) -> bool {
        self.0 == 2.0
    }

    /// Exponent 2(1 - 1/α) of κ in the bound-state equation.
    pub fn kappa_exponent(self) -> f64 {
        2.0 * (1.0 - 1.0 / self.0)
    }

    /// sin((2m+1)π/α), the denominators of the integer-power series.
    pub fn odd_denominator(self, m: usize) -> f64 {
        sin_pi((2 * m + 1) as f64 / self.0)
    }

    /// cos(mαπ/2), the denominators of the α-power series.
    pub fn alpha_denominator(self, m: usize) -> f64 {
        cos_pi(m as f64 * self.0 / 2.0)
    }

    /// Smallest |denominator| over both families up to `m_max`.
    pub fn resonance_margin(self, m_max: usize) -> f64 {
        let odd = (0..=m_max).map(|m| self.odd_denominator(m).abs());
        let alpha = (1..=m_max).map(|m| self.alpha_denominator(m).abs());
        odd.chain(alpha).fold(f64::INFINITY, f64::min)
    }

    /// M(α) = 1 / (2 K Γ(α) |cos(απ/2)|), the finite-kernel constant.
    pub fn finite_kernel_constant(self, k_alpha: f64) -> f64 {
        1.0 / (2.0 * k_alpha * gamma(self.0) * cos_pi(self.0 / 2.0).abs())
    }
}

/// Positive-axis poles of the Mellin–Barnes integrand after cancellation of
/// the even poles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleSet {
    pub odd_poles: Vec<f64>,
    pub alpha_poles: Vec<f64>,
    pub m_max: usize,
    /// Pairs (odd pole, alpha pole) closer than [`POLE_COLLISION_TOL`].
    pub collisions: Vec<(f64, f64)>,
}

impl PoleSet {
    pub fn has_collision(&self) -> bool {
        !self.collisions.is_empty()
    }

    pub fn contains_even_integer(&self) -> bool {
        self.odd_poles
            .iter()
            .any(|&s| s.fract() == 0.0 && (s as i64) % 2 == 0)
    }
}

/// {2n+1 : n = 0..m_max} ∪ {mα : m = 1..m_max} with collisions flagged.
pub fn reduced_pole_set(alpha: FractionalIndex, m_max: usize) -> Result<PoleSet> {
    if m_max < 1 {
        return Err(Error::InvalidParameter("m_max must be >= 1".into()));
    }
    let odd_poles: Vec<f64> = (0..=m_max).map(|n| (2 * n + 1) as f64).collect();
    let alpha_poles: Vec<f64> = (1..=m_max).map(|m| m as f64 * alpha.value()).collect();
    let mut collisions = Vec::new();
    for &o in &odd_poles {
        for &a in &alpha_poles {
            if (o - a).abs() < POLE_COLLISION_TOL {
                collisions.push((o, a));
            }
        }
    }
    Ok(PoleSet {
        odd_poles,
        alpha_poles,
        m_max,
        collisions,
    })
}

/// True when the residue series must not be used for this α.
pub fn resonance_check(alpha: FractionalIndex, m_max: usize, threshold: f64) -> bool {
    let m_max = m_max.max(1);
    if alpha.resonance_margin(m_max) < threshold {
        return true;
    }
    reduced_pole_set(alpha, m_max)
        .map(|p| p.has_collision())
        .unwrap_or(true)
}

/// Σ_{j=0}^{N} (-1)^j u^{αj} / Γ(1+j), the residue sum that inverts the
/// Mellin transform of e^{-u^α}.
pub fn mellin_exp_partial_sum(u: f64, alpha: FractionalIndex, n_terms: usize) -> Result<f64> {
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::Domain(format!("u must be >= 0, got {u}")));
    }
    if u == 0.0 {
        return Ok(1.0);
    }
    // the recurrence t_j = -t_{j-1} w / j rounds far less than exp(j ln w - ln j!)
    let w = u.powf(alpha.value());
    let mut acc = CompensatedSum::new();
    let mut term = 1.0;
    for j in 0..=n_terms {
        if j > 0 {
            term *= -w / j as f64;
        }
        acc.add(term);
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn log_gamma_known_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        assert_relative_eq!(
            log_gamma(0.5).unwrap(),
            0.572_364_942_924_700_1,
            max_relative = 1e-15
        );
        // ln Γ(10) = ln 362880
        assert_relative_eq!(log_gamma(10.0).unwrap(), 362_880f64.ln(), max_relative = 1e-14);
        // Γ(1e-3) = 999.4237724845955 (mpmath)
        assert_relative_eq!(
            log_gamma(1e-3).unwrap(),
            999.423_772_484_595_5f64.ln(),
            max_relative = 1e-14
        );
        // ln Γ(300) = 1409.2020674704118 (mpmath)
        assert_relative_eq!(
            log_gamma(300.0).unwrap(),
            1_409.202_067_470_411_8,
            max_relative = 1e-14
        );
        // ln Γ(1.5) = ln(√π/2)
        assert_relative_eq!(
            log_gamma(1.5).unwrap(),
            (PI.sqrt() / 2.0).ln(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(-1.5), Err(Error::Domain(_))));
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn log_gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for n in 1..40 {
            fact *= n as f64;
            assert_relative_eq!(
                log_gamma(n as f64 + 1.0).unwrap(),
                fact.ln(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn zeta_tail_values() {
        assert_relative_eq!(zeta_tail(2.0, 1), PI * PI / 6.0, max_relative = 1e-14);
        assert_relative_eq!(zeta_tail(4.0, 1), PI.powi(4) / 90.0, max_relative = 1e-14);
        // ζ(√2) (mpmath)
        assert_relative_eq!(zeta_tail(2f64.sqrt(), 1), 3.020_737_679_486_031_9, max_relative = 1e-13);
        assert_relative_eq!(
            zeta_tail(3.0, 5),
            1.202_056_903_159_594_3 - (1.0 + 1.0 / 8.0 + 1.0 / 27.0 + 1.0 / 64.0),
            max_relative = 1e-13
        );
    }

    #[test]
    fn shifted_power_sum_matches_direct() {
        assert_relative_eq!(shifted_power_sum(2.0, 0.0), PI * PI / 6.0, max_relative = 1e-14);
        // Σ 1/(n²+1) = (π coth π - 1)/2
        let want = (PI / PI.tanh() - 1.0) / 2.0;
        assert_relative_eq!(shifted_power_sum(2.0, 1.0), want, max_relative = 1e-13);
        let want = (5.0 * PI / (5.0 * PI).tanh() - 1.0) / 50.0;
        assert_relative_eq!(shifted_power_sum(2.0, 25.0), want, max_relative = 1e-13);
    }

    #[test]
    fn digamma_values() {
        assert_relative_eq!(digamma(1.0).unwrap(), -EULER_GAMMA, max_relative = 1e-14);
        // ψ(n+1) = -γ + H_n
        let h5 = 1.0 + 0.5 + 1.0 / 3.0 + 0.25 + 0.2;
        assert_relative_eq!(digamma(6.0).unwrap(), -EULER_GAMMA + h5, max_relative = 1e-14);
        assert_relative_eq!(
            digamma(0.5).unwrap(),
            -EULER_GAMMA - 2.0 * 2f64.ln(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn sin_pi_exact_zeros() {
        for k in -20..20 {
            assert_eq!(sin_pi(k as f64), 0.0);
            assert_eq!(cos_pi(k as f64 + 0.5), 0.0);
        }
        assert_relative_eq!(sin_pi(0.25), (PI / 4.0).sin(), max_relative = 1e-15);
        assert_relative_eq!(sin_pi(-3.7), (-3.7 * PI).sin(), max_relative = 1e-13);
        assert_relative_eq!(cos_pi(1.3), (1.3 * PI).cos(), max_relative = 1e-13);
    }

    #[test]
    fn fractional_index_validation() {
        assert!(FractionalIndex::new(1.0).is_err());
        assert!(FractionalIndex::new(2.0001).is_err());
        assert!(FractionalIndex::new(f64::NAN).is_err());
        assert!(FractionalIndex::new(2.0).is_ok());
        assert!(FractionalIndex::new(1.0 + 1e-12).is_ok());
    }

    #[test]
    fn alpha_two_margin_is_one() {
        let a = FractionalIndex::new(2.0).unwrap();
        for m in [1, 5, 40] {
            assert_eq!(a.resonance_margin(m), 1.0);
        }
    }

    #[test]
    fn pole_sets() {
        let a = FractionalIndex::new(2f64.sqrt()).unwrap();
        let p = reduced_pole_set(a, 2).unwrap();
        assert_eq!(p.odd_poles, vec![1.0, 3.0, 5.0]);
        assert_relative_eq!(p.alpha_poles[0], 2f64.sqrt());
        assert_relative_eq!(p.alpha_poles[1], 2.0 * 2f64.sqrt());
        assert!(!p.has_collision());

        let two = FractionalIndex::new(2.0).unwrap();
        let p = reduced_pole_set(two, 2).unwrap();
        assert_eq!(p.alpha_poles, vec![2.0, 4.0]);
        assert!(!p.has_collision());
        assert!(!p.contains_even_integer());

        let five_thirds = FractionalIndex::new(5.0 / 3.0).unwrap();
        let p = reduced_pole_set(five_thirds, 3).unwrap();
        assert!(p.has_collision());
        assert_eq!(p.collisions[0].0, 5.0);

        assert!(reduced_pole_set(a, 0).is_err());
    }

    #[test]
    fn resonance_examples() {
        let sqrt2 = FractionalIndex::new(2f64.sqrt()).unwrap();
        assert!(!resonance_check(sqrt2, 40, 1e-8));
        // frozen by scanning both denominator families in 40-digit arithmetic
        assert_relative_eq!(sqrt2.resonance_margin(40), 0.019_152_033_683_3, max_relative = 1e-9);
        let a15 = FractionalIndex::new(1.5).unwrap();
        assert!(resonance_check(a15, 40, 1e-8));
        let two = FractionalIndex::new(2.0).unwrap();
        assert!(!resonance_check(two, 40, 1e-8));
        let a19 = FractionalIndex::new(1.9 + 5f64.sqrt() * 1e-4).unwrap();
        assert_relative_eq!(a19.resonance_margin(40), 0.003_512_400_143_43, max_relative = 1e-8);
        let a12 = FractionalIndex::new(1.2 + 3f64.sqrt() * 1e-3).unwrap();
        assert_relative_eq!(a12.resonance_margin(40), 0.206_554_303_804, max_relative = 1e-8);
    }

    #[test]
    fn mellin_examples() {
        let sqrt2 = FractionalIndex::new(2f64.sqrt()).unwrap();
        let two = FractionalIndex::new(2.0).unwrap();
        assert_eq!(mellin_exp_partial_sum(0.0, sqrt2, 0).unwrap(), 1.0);
        assert!((mellin_exp_partial_sum(1.0, two, 30).unwrap() - (-1f64).exp()).abs() < 1e-12);
        let direct = (-(2f64.powf(2f64.sqrt()))).exp();
        assert!((mellin_exp_partial_sum(2.0, sqrt2, 60).unwrap() - direct).abs() < 1e-12);
        assert!(mellin_exp_partial_sum(-1.0, two, 3).is_err());
    }

    #[test]
    fn compensated_sum_condition() {
        let mut s = CompensatedSum::new();
        for x in [1e16, 1.0, -1e16] {
            s.add(x);
        }
        assert_eq!(s.value(), 1.0);
        assert!(s.condition() > 1e16);
    }

    proptest! {
        #[test]
        fn margin_nonincreasing(alpha in 1.0001f64..2.0, m in 1usize..40) {
            let a = FractionalIndex::new(alpha).unwrap();
            prop_assert!(a.resonance_margin(m + 1) <= a.resonance_margin(m));
        }

        #[test]
        fn pole_set_has_no_even_integers(alpha in 1.0001f64..=2.0, m in 1usize..40) {
            let a = FractionalIndex::new(alpha).unwrap();
            let p = reduced_pole_set(a, m).unwrap();
            prop_assert!(!p.contains_even_integer());
            prop_assert!(p.odd_poles.iter().all(|s| (*s as i64) % 2 == 1));
        }

        #[test]
        fn non_resonant_denominators_exceed_threshold(alpha in 1.0001f64..=2.0) {
            let a = FractionalIndex::new(alpha).unwrap();
            if !resonance_check(a, RESONANCE_M_MAX, RESONANCE_THRESHOLD) {
                for m in 0..=RESONANCE_M_MAX {
                    prop_assert!(a.odd_denominator(m).abs() >= RESONANCE_THRESHOLD);
                }
                for m in 1..=RESONANCE_M_MAX {
                    prop_assert!(a.alpha_denominator(m).abs() >= RESONANCE_THRESHOLD);
                }
            }
        }

        #[test]
        fn mellin_tail_envelope(u in 0.0f64..3.0, alpha in 1.01f64..=2.0) {
            let a = FractionalIndex::new(alpha).unwrap();
            let exact = (-u.powf(alpha)).exp();
            let w = u.powf(alpha);
            let n0 = (2.0 * w).ceil() as usize + 1;
            let mut prev = f64::INFINITY;
            for n in n0..n0 + 20 {
                let err = (mellin_exp_partial_sum(u, a, n).unwrap() - exact).abs();
                // alternating-series bound: error below the first omitted term
                let bound = ((n + 1) as f64 * w.ln() - ln_gamma_pos(n as f64 + 2.0)).exp();
                prop_assert!(err <= bound + 1e-13);
                prop_assert!(bound <= prev);
                prev = bound;
            }
        }
    }
}
