//! The weak-coupling bound state of K_α|P|^α - g|V|.
//!
//! Splitting the Birman–Schwinger operator into its rank-one singular part
//! A κ^{-β} |u⟩⟨u| (β = 2(1-1/α), A = 1/(α K^{1/α} sin(π/α))) and the finite
//! part F, the condition g·λ_max = 1 becomes the scalar fixed point
//!
//!   κ^β = g A H(g, κ),   H(g, κ) = ⟨u, (1 - g F)^{-1} u⟩.
//!
//! F here is the kernel G - G_sing itself, which is ≤ 0 at leading order;
//! writing D_fin = -F gives the equivalent form ⟨u, (1 + g D_fin)^{-1} u⟩.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::birman_schwinger::{assemble, rule_for, top_eigenpair_of, BSKernel, RuleKind};
use crate::error::{Error, Result};
use crate::greens::GreensContext;
use crate::potentials::{pair_integral, Potential};
use crate::quadrature::QuadratureRule;
use crate::special::{cos_pi, gamma, sin_pi, FractionalIndex};

/// Lower end of the κ bracket.
pub const KAPPA_MIN: f64 = 1e-8;
/// Largest condition number accepted for 1 - gF.
pub const MAX_CONDITION: f64 = 1e12;
const KAPPA_REL_TOL: f64 = 1e-14;

/// A = 1/(α K^{1/α} sin(π/α)), the coefficient of the singular part.
pub fn singular_coefficient(alpha: FractionalIndex, k_alpha: f64) -> f64 {
    let a = alpha.value();
    1.0 / (a * k_alpha.powf(1.0 / a) * sin_pi(1.0 / a))
}

/// g and g² terms predicting κ*^{2(1-1/α)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expansion {
    pub first_order: f64,
    pub second_order: f64,
    pub value: f64,
}

/// g ‖√|V|‖² A + g² ∬|V||x-y|^{α-1}|V| / (2 K^{1+1/α} Γ(1+α) sin(π/α) cos(απ/2)).
pub fn weak_coupling_expansion(g: f64, v: &Potential, alpha: FractionalIndex, k_alpha: f64) -> Result<Expansion> {
    let a = alpha.value();
    let first_order = g * v.integral_abs() * singular_coefficient(alpha, k_alpha);
    let denom = 2.0 * k_alpha.powf(1.0 + 1.0 / a) * gamma(1.0 + a) * sin_pi(1.0 / a) * cos_pi(a / 2.0);
    let second_order = g * g * pair_integral(v, alpha)? / denom;
    Ok(Expansion {
        first_order,
        second_order,
        value: first_order + second_order,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub g: f64,
    pub kappa_range: (f64, f64),
    pub samples: usize,
    pub sign_changes: usize,
    /// max - min of H(g, κ) over the samples
    pub h_variation: f64,
    /// max - min of g A H(g, κ), the right-hand side of the fixed point
    pub rhs_variation: f64,
    /// max |ΔH| / |Δ ln κ| between neighbouring samples
    pub modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundStateSolution {
    pub g: f64,
    pub alpha: f64,
    #[serde(rename = "K")]
    pub k_alpha: f64,
    pub kappa_star: f64,
    /// Binding energy κ*².
    #[serde(rename = "E")]
    pub energy: f64,
    /// κ*^{2(1-1/α)}.
    pub kappa_pow: f64,
    /// g + g² prediction for `kappa_pow`.
    pub expansion: f64,
    /// kappa_pow - expansion
    pub expansion_discrepancy: f64,
    pub h_value: f64,
    pub iterations: usize,
    /// κ*^β - g A H at the returned κ*, relative to κ*^β.
    pub residual: f64,
    /// g λ_max(κ*) - 1 on the full kernel.
    pub full_kernel_check: f64,
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
}

/// A potential, index and quadrature rule, ready to solve for κ*.
#[derive(Debug, Clone)]
pub struct GroundStateSolver {
    potential: Potential,
    context: GreensContext,
    rule: QuadratureRule,
}

impl GroundStateSolver {
    /// `n`-node rule of the given kind on the support of V (capped at `max_half_width`).
    pub fn new(
        potential: Potential,
        alpha: FractionalIndex,
        k_alpha: f64,
        n: usize,
        kind: RuleKind,
        max_half_width: f64,
    ) -> Result<Self> {
        let rule = rule_for(&potential, n, kind, max_half_width)?;
        Self::with_rule(potential, alpha, k_alpha, rule)
    }

    pub fn with_rule(potential: Potential, alpha: FractionalIndex, k_alpha: f64, rule: QuadratureRule) -> Result<Self> {
        if !potential.admissible(alpha) {
            return Err(Error::Divergent(format!("{potential} fails the moment condition at alpha = {}", alpha.value())));
        }
        let context = GreensContext::new(alpha, k_alpha, 1.0)?;
        if context.is_resonant() {
            return Err(Error::ResonantAlpha {
                alpha: alpha.value(),
                margin: alpha.resonance_margin(crate::special::RESONANCE_M_MAX),
            });
        }
        Ok(Self {
            potential,
            context,
            rule,
        })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn alpha(&self) -> FractionalIndex {
        self.context.alpha()
    }

    pub fn k_alpha(&self) -> f64 {
        self.context.k_alpha()
    }

    fn half_width(&self) -> f64 {
        let x = &self.rule.nodes;
        0.5 * (x[x.len() - 1] - x[0])
    }

    pub fn kernel(&self, kappa: f64) -> Result<BSKernel> {
        assemble(&self.potential, &self.rule, &self.context.with_kappa(kappa)?)
    }

    fn beta(&self) -> f64 {
        self.alpha().kappa_exponent()
    }

    fn coefficient(&self) -> f64 {
        singular_coefficient(self.alpha(), self.k_alpha())
    }

    /// H(g, κ) = ⟨u, (1 - g F)^{-1} u⟩ by a direct solve.
    pub fn h_function(&self, g: f64, kappa: f64) -> Result<f64> {
        let kernel = self.kernel(kappa)?;
        h_of_kernel(g, &kernel)
    }

    /// κ^β - g A H(g, κ): negative below κ*, positive above.
    pub fn residual(&self, g: f64, kappa: f64) -> Result<f64> {
        Ok(kappa.powf(self.beta()) - g * self.coefficient() * self.h_function(g, kappa)?)
    }

    fn check_g(g: f64) -> Result<()> {
        if !(g > 0.0 && g <= 1.0) {
            return Err(Error::InvalidParameter(format!("g must lie in (0, 1], got {g}")));
        }
        Ok(())
    }

    /// Bisection in ln κ on `f`, which must be negative at `lo` and positive
    /// above the root; the upper end doubles from `start` until `f` > 0.
    fn bisect(&self, start: f64, f: impl Fn(f64) -> Result<f64>) -> Result<(f64, usize)> {
        let mut lo = KAPPA_MIN;
        if f(lo)? >= 0.0 {
            return Err(Error::NoBracket { lo, hi: lo });
        }
        let mut hi = start.max(2.0 * lo);
        let mut iterations = 0;
        while f(hi)? <= 0.0 {
            lo = lo.max(hi);
            hi *= 2.0;
            iterations += 1;
            if hi > 1e8 {
                return Err(Error::NoBracket { lo: KAPPA_MIN, hi });
            }
        }
        while hi - lo > KAPPA_REL_TOL * hi {
            let mid = (lo * hi).sqrt();
            if f(mid)? > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            iterations += 1;
        }
        Ok((0.5 * (lo + hi), iterations))
    }

    fn leading_kappa(&self, g: f64) -> f64 {
        (g * self.coefficient() * self.potential.integral_abs()).powf(1.0 / self.beta())
    }

    /// κ* from the scalar fixed point, cross-checked against g λ_max(κ*) = 1.
    pub fn solve_kappa(&self, g: f64) -> Result<GroundStateSolution> {
        Self::check_g(g)?;
        let beta = self.beta();
        let (kappa, iterations) = self.bisect(0.5 * self.leading_kappa(g), |k| self.residual(g, k))?;
        let kernel = self.kernel(kappa)?;
        let h = h_of_kernel(g, &kernel)?;
        let kappa_pow = kappa.powf(beta);
        let residual = (kappa_pow - g * self.coefficient() * h) / kappa_pow;
        let (lambda, _) = top_eigenpair_of(kernel.full_operator())?;
        let expansion = weak_coupling_expansion(g, &self.potential, self.alpha(), self.k_alpha())?.value;
        Ok(GroundStateSolution {
            g,
            alpha: self.alpha().value(),
            k_alpha: self.k_alpha(),
            kappa_star: kappa,
            energy: kappa * kappa,
            kappa_pow,
            expansion,
            expansion_discrepancy: kappa_pow - expansion,
            h_value: h,
            iterations,
            residual,
            full_kernel_check: g * lambda - 1.0,
            n: self.rule.len(),
            half_width: self.half_width(),
        })
    }

    /// κ solving g λ_max(κ) = 1 on the full kernel, without the split.
    pub fn kappa_full_kernel(&self, g: f64) -> Result<f64> {
        Self::check_g(g)?;
        let excess = |kappa: f64| -> Result<f64> {
            let (lambda, _) = top_eigenpair_of(self.kernel(kappa)?.full_operator())?;
            Ok(1.0 - g * lambda)
        };
        Ok(self.bisect(0.5 * self.leading_kappa(g), excess)?.0)
    }

    /// Samples H and the residual on `samples` log-spaced κ in `range`.
    pub fn uniqueness_certificate(&self, g: f64, range: (f64, f64), samples: usize) -> Result<UniquenessReport> {
        let (lo, hi) = range;
        if !(lo > 0.0 && hi > lo) || samples < 2 {
            return Err(Error::InvalidParameter(format!("bad kappa range [{lo}, {hi}] / {samples} samples")));
        }
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::InvalidParameter(format!("g must lie in [0, 1], got {g}")));
        }
        let step = (hi / lo).ln() / (samples - 1) as f64;
        let kappas: Vec<f64> = (0..samples).map(|i| lo * (step * i as f64).exp()).collect();
        let hs: Vec<f64> = kappas.iter().map(|&k| self.h_function(g, k)).collect::<Result<_>>()?;
        let a = self.coefficient();
        let beta = self.beta();
        let residuals: Vec<f64> = kappas.iter().zip(&hs).map(|(k, h)| k.powf(beta) - g * a * h).collect();
        let sign_changes = residuals.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
        let spread = |xs: &mut dyn Iterator<Item = f64>| {
            let (mn, mx) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), x| (mn.min(x), mx.max(x)));
            mx - mn
        };
        let h_variation = spread(&mut hs.iter().copied());
        let rhs_variation = spread(&mut hs.iter().map(|h| g * a * h));
        let modulus = hs.windows(2).map(|w| (w[1] - w[0]).abs() / step).fold(0.0, f64::max);
        let report = UniquenessReport {
            g,
            kappa_range: range,
            samples,
            sign_changes,
            h_variation,
            rhs_variation,
            modulus,
        };
        match sign_changes {
            1 => Ok(report),
            0 if g == 0.0 => Ok(report),
            0 => Err(Error::NoBracket { lo, hi }),
            k => Err(Error::MultipleRoots(k)),
        }
    }
}

/// ⟨u, (1 - g F)^{-1} u⟩ for an assembled kernel.
pub fn h_of_kernel(g: f64, kernel: &BSKernel) -> Result<f64> {
    let u = DVector::from_column_slice(kernel.weighted_root());
    if g == 0.0 {
        return Ok(u.norm_squared());
    }
    let f = kernel.fin_operator();
    let hs = g * f.norm();
    if hs >= 1.0 {
        return Err(Error::WeakCouplingViolated(hs));
    }
    // ‖gF‖₂ ≤ ‖gF‖_HS < 1, so 1 - gF is positive definite
    let condition = (1.0 + hs) / (1.0 - hs);
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned(condition));
    }
    let n = u.len();
    let m = DMatrix::identity(n, n) - f * g;
    let chol = m.cholesky().ok_or(Error::IllConditioned(f64::INFINITY))?;
    Ok(u.dot(&chol.solve(&u)))
}

/// Σ_{k=0}^{k_max} g^k ⟨u, F^k u⟩, the truncated Neumann series of H.
pub fn neumann_partial_sum(g: f64, kernel: &BSKernel, k_max: usize) -> f64 {
    let f = kernel.fin_operator();
    let u = DVector::from_column_slice(kernel.weighted_root());
    let mut v = u.clone();
    let mut total = 0.0;
    let mut gk = 1.0;
    for _ in 0..=k_max {
        total += gk * u.dot(&v);
        v = &f * v;
        gk *= g;
    }
    total
}
