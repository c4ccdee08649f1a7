//! Nyström discretization of √|V| (K_α P^α + κ²)^{-1} √|V| with its
//! rank-one singular part split off.
//!
//! Matrix entries are √(w_i w_j) √|V(x_i)| G(x_i - x_j) √|V(x_j)|, so the
//! matrix is symmetric and its eigenvalues approximate those of the integral
//! operator. On equispaced rules the pointwise matrices are complemented by a
//! diagonal correction for the |r|^{α-1} kink of G (see [`aliasing_correction`]),
//! which lifts the rule from O(h^α) to O(h^{α+2}); solvers use the corrected
//! operator, the pointwise checks use the raw entries.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::greens::{greens_finite, GreensContext};
use crate::potentials::{hs_bound_integral, Potential};
use crate::quadrature::QuadratureRule;
use crate::special::shifted_power_sum;

/// Which discretization [`rule_for`] builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Equispaced nodes with the kink correction.
    Trapezoid,
    /// Order-8 Gauss–Legendre panels.
    GaussLegendre,
}

/// |V| below this fraction of V0 is dropped from the support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// |V| at the rule's edge above this fraction of V0 triggers a warning.
pub const EDGE_WARNING: f64 = 1e-10;

/// An `n`-node rule on [-L_eff, L_eff] with L_eff the half-width where |V|
/// drops below 1e-12·V0, capped at `max_half_width`.
pub fn rule_for(v: &Potential, n: usize, kind: RuleKind, max_half_width: f64) -> Result<QuadratureRule> {
    let l = v.support_half_width(SUPPORT_CUTOFF).min(max_half_width);
    if !(l > 0.0) {
        return Err(Error::InvalidParameter(format!("empty support for {v}")));
    }
    match kind {
        RuleKind::Trapezoid => QuadratureRule::trapezoid(-l, l, n),
        RuleKind::GaussLegendre => QuadratureRule::gauss_legendre_with_nodes(-l, l, n),
    }
}

/// -2 Σ_{n≥1} 1/(K(2πn/h)^α + κ²): trapezoid sums of a convolution with G
/// alias the symbol at the nonzero multiples of 2π/h; subtracting this value
/// times f(x_i) cancels the leading error.
pub fn aliasing_correction(ctx: &GreensContext, spacing: f64) -> f64 {
    let a = ctx.alpha().value();
    let k = ctx.k_alpha();
    let t = (spacing / (2.0 * std::f64::consts::PI)).powf(a);
    let y = ctx.kappa() * ctx.kappa() * t / k;
    -2.0 * t / k * shifted_power_sum(a, y)
}

#[derive(Debug, Clone)]
pub struct BSKernel {
    context: GreensContext,
    rule: QuadratureRule,
    /// √(w_i |V(x_i)|)
    weighted_root: Vec<f64>,
    /// |V(x_i)|
    abs_v: Vec<f64>,
    pub full: DMatrix<f64>,
    pub sing: DMatrix<f64>,
    pub fin: DMatrix<f64>,
    /// Added to the diagonal of `full` and `fin` by the solvers.
    pub diagonal_correction: Vec<f64>,
    /// Set when |V| at the rule's edge exceeds 1e-10·V0.
    pub edge_warning: Option<String>,
}

/// Assembles the kernel matrices for `v` on `rule` at the context's κ.
pub fn assemble(v: &Potential, rule: &QuadratureRule, ctx: &GreensContext) -> Result<BSKernel> {
    let n = rule.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty quadrature rule".into()));
    }
    if ctx.is_resonant() {
        // the dispatcher would fall back to the oracle; the kernel requires
        // the series split, so refuse like the series do
        crate::greens::greens_decompose(0.0, ctx, crate::greens::SERIES_M_MAX)?;
    }
    let abs_v: Vec<f64> = rule.nodes.iter().map(|&x| v.abs(x)).collect();
    let weighted_root: Vec<f64> = abs_v
        .iter()
        .zip(&rule.weights)
        .map(|(a, w)| (a * w).sqrt())
        .collect();
    let edge = abs_v[0].max(abs_v[n - 1]);
    let edge_warning = (edge > EDGE_WARNING * v.depth()).then(|| {
        format!(
            "|V| at the rule edge is {:.3e} V0; the support may be truncated",
            edge / v.depth()
        )
    });

    let fin_values: Vec<f64> = match rule.spacing {
        // Toeplitz: G depends on |i - j| only
        Some(h) => (0..n)
            .into_par_iter()
            .map(|d| greens_finite(d as f64 * h, ctx))
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let g = match rule.spacing {
                        Some(_) => fin_values[i.abs_diff(j)],
                        None if i == j => 0.0,
                        None => greens_finite(rule.nodes[i] - rule.nodes[j], ctx)?,
                    };
                    Ok(weighted_root[i] * g * weighted_root[j])
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut fin = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    // exact symmetry
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (fin[(i, j)] + fin[(j, i)]);
            fin[(i, j)] = s;
            fin[(j, i)] = s;
        }
    }
    let root = DVector::from_column_slice(&weighted_root);
    let sing = &root * root.transpose() * ctx.singular();
    let full = &sing + &fin;
    let diagonal_correction = match rule.spacing {
        Some(h) => {
            let c = aliasing_correction(ctx, h);
            abs_v.iter().map(|a| c * a).collect()
        }
        None => vec![0.0; n],
    };
    Ok(BSKernel {
        context: ctx.clone(),
        rule: rule.clone(),
        weighted_root,
        abs_v,
        full,
        sing,
        fin,
        diagonal_correction,
        edge_warning,
    })
}

impl BSKernel {
    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    pub fn context(&self) -> &GreensContext {
        &self.context
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// u_i = √(w_i |V(x_i)|); the singular part is G_sing · u uᵀ.
    pub fn weighted_root(&self) -> &[f64] {
        &self.weighted_root
    }

    fn corrected(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = m.clone();
        for (i, c) in self.diagonal_correction.iter().enumerate() {
            out[(i, i)] += c;
        }
        out
    }

    /// The discretized operator D used by the solvers.
    pub fn full_operator(&self) -> DMatrix<f64> {
        self.corrected(&self.full)
    }

    /// The discretized finite part used by the solvers.
    pub fn fin_operator(&self) -> DMatrix<f64> {
        self.corrected(&self.fin)
    }

    /// Writes one matrix as CSV: a `# n=..,alpha=..,kappa=..,K=..` header,
    /// then n rows of n values.
    pub fn write_csv(&self, matrix: &DMatrix<f64>, mut out: impl Write) -> std::io::Result<()> {
        let ctx = &self.context;
        writeln!(
            out,
            "# n={},alpha={:.16e},kappa={:.16e},K={:.16e}",
            self.len(),
            ctx.alpha().value(),
            ctx.kappa(),
            ctx.k_alpha()
        )?;
        for i in 0..matrix.nrows() {
            let row: Vec<String> = (0..matrix.ncols())
                .map(|j| format!("{:.16e}", matrix[(i, j)]))
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Outcome of [`finite_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    /// max over i ≠ j of |fin(x_i - x_j)| / (M |x_i - x_j|^{α-1})
    pub max_ratio: f64,
    pub argmax: (usize, usize),
    /// max |fin(0)|, zero up to round-off
    pub diagonal_max: f64,
    pub constant: f64,
}

/// Checks |fin(x, y)| ≤ M(α) √|V(x)| |x - y|^{α-1} √|V(y)| at every node pair.
pub fn finite_bound_check(kernel: &BSKernel, tol: f64) -> Result<BoundReport> {
    let ctx = &kernel.context;
    let alpha = ctx.alpha();
    let m = alpha.finite_kernel_constant(ctx.k_alpha());
    let n = kernel.len();
    let x = &kernel.rule.nodes;
    let u = &kernel.weighted_root;
    let e = alpha.value() - 1.0;
    let mut report = BoundReport {
        max_ratio: 0.0,
        argmax: (0, 0),
        diagonal_max: 0.0,
        constant: m,
    };
    for i in 0..n {
        report.diagonal_max = report.diagonal_max.max(kernel.fin[(i, i)].abs());
        for j in 0..n {
            if i == j || u[i] == 0.0 || u[j] == 0.0 {
                continue;
            }
            let pointwise = kernel.fin[(i, j)].abs() / (u[i] * u[j]);
            let bound = m * (x[i] - x[j]).abs().powf(e);
            let ratio = pointwise / bound;
            if ratio > report.max_ratio {
                report.max_ratio = ratio;
                report.argmax = (i, j);
            }
            if pointwise > bound * (1.0 + tol) {
                let w = (kernel.rule.weights[i] * kernel.rule.weights[j]).sqrt();
                return Err(Error::BoundViolated {
                    i,
                    j,
                    value: kernel.fin[(i, j)].abs() / w,
                    bound: bound * (kernel.abs_v[i] * kernel.abs_v[j]).sqrt(),
                });
            }
        }
    }
    if report.diagonal_max > 1e-10 {
        return Err(Error::BoundViolated {
            i: 0,
            j: 0,
            value: report.diagonal_max,
            bound: 0.0,
        });
    }
    Ok(report)
}

/// Frobenius norm of the pointwise finite part.
pub fn hs_norm(kernel: &BSKernel) -> f64 {
    kernel.fin.norm()
}

/// M(α)² ∬|V(x)| (|x|+|y|)^{2(α-1)} |V(y)| dx dy, the a-priori bound on hs_norm².
pub fn hs_bound(v: &Potential, ctx: &GreensContext) -> Result<f64> {
    let m = ctx.alpha().finite_kernel_constant(ctx.k_alpha());
    Ok(m * m * hs_bound_integral(v, ctx.alpha())?)
}

/// Σ_i full_ii = G(0; κ) Σ_i w_i |V(x_i)|.
pub fn trace_abs(kernel: &BSKernel) -> f64 {
    kernel.full.diagonal().sum()
}

/// Largest eigenvalue of a symmetric matrix and its unit eigenvector, signed
/// so that its components sum to a nonnegative value.
pub fn top_eigenpair_of(m: DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 100_000).ok_or(Error::EigenNotConverged)?;
    let (k, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::EigenNotConverged)?;
    let mut v = eig.eigenvectors.column(k).into_owned();
    if v.sum() < 0.0 {
        v.neg_mut();
    }
    Ok((lambda, v))
}

/// (λ_max, φ) of the discretized operator.
pub fn top_eigenpair(kernel: &BSKernel) -> Result<(f64, DVector<f64>)> {
    top_eigenpair_of(kernel.full_operator())
}

/// Singular values of the discretized operator, descending.
pub fn singular_values(kernel: &BSKernel) -> Vec<f64> {
    let mut s: Vec<f64> = kernel.full_operator().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// λ_max of nested rules with n0, 2n0-1, 4n0-3, ... nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub nodes: Vec<usize>,
    pub lambdas: Vec<f64>,
    /// log2 of successive difference ratios
    pub orders: Vec<f64>,
}

/// Refines the rule `levels` times and reports the observed order of λ_max.
pub fn convergence_study(
    v: &Potential,
    ctx: &GreensContext,
    kind: RuleKind,
    n0: usize,
    levels: usize,
    max_half_width: f64,
) -> Result<ConvergenceReport> {
    let nodes: Vec<usize> = (0..levels).map(|k| (n0 - 1) * (1 << k) + 1).collect();
    let lambdas: Vec<f64> = nodes
        .iter()
        .map(|&n| {
            let rule = rule_for(v, n, kind, max_half_width)?;
            Ok(top_eigenpair(&assemble(v, &rule, ctx)?)?.0)
        })
        .collect::<Result<_>>()?;
    let diffs: Vec<f64> = lambdas.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let orders = diffs.windows(2).map(|d| (d[0] / d[1]).log2()).collect();
    Ok(ConvergenceReport {
        nodes,
        lambdas,
        orders,
    })
}
