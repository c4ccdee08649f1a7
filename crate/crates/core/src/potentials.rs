//! Attractive wells V < 0 and the integrals of |V| the kernels need.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Adaptive;
use crate::special::{gamma, ln_gamma_pos, FractionalIndex};

/// Shape of a well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PotentialKind {
    /// -V0 exp(-(x/a)²)
    Gaussian,
    /// -V0 / (1 + (x/a)²)^s
    Lorentzian { s: f64 },
    /// -V0 sech²(x/a)
    Sech2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    #[serde(flatten)]
    kind: PotentialKind,
    depth: f64,
    scale: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
    }
}

impl Potential {
    pub fn gaussian(depth: f64, scale: f64) -> Result<Self> {
        Self::new(PotentialKind::Gaussian, depth, scale)
    }

    pub fn lorentzian(depth: f64, scale: f64, s: f64) -> Result<Self> {
        Self::new(PotentialKind::Lorentzian { s }, depth, scale)
    }

    pub fn sech2(depth: f64, scale: f64) -> Result<Self> {
        Self::new(PotentialKind::Sech2, depth, scale)
    }

    pub fn new(kind: PotentialKind, depth: f64, scale: f64) -> Result<Self> {
        check_positive("V0", depth)?;
        check_positive("a", scale)?;
        if let PotentialKind::Lorentzian { s } = kind {
            // s > 1/2 keeps ∫|V| finite
            if !(s > 0.5) || !s.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "lorentzian tail power must exceed 1/2, got {s}"
                )));
            }
        }
        Ok(Self { kind, depth, scale })
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same shape with depth c·V0.
    pub fn with_depth(&self, depth: f64) -> Result<Self> {
        Self::new(self.kind, depth, self.scale)
    }

    /// |V(x)| / V0.
    fn profile(&self, x: f64) -> f64 {
        let t = x / self.scale;
        match self.kind {
            PotentialKind::Gaussian => (-t * t).exp(),
            PotentialKind::Lorentzian { s } => (1.0 + t * t).powf(-s),
            PotentialKind::Sech2 => {
                let c = t.abs().min(350.0).cosh();
                1.0 / (c * c)
            }
        }
    }

    /// V(x) < 0.
    pub fn value(&self, x: f64) -> f64 {
        -self.abs(x)
    }

    pub fn abs(&self, x: f64) -> f64 {
        self.depth * self.profile(x)
    }

    /// √|V(x)|.
    pub fn sqrt_abs(&self, x: f64) -> f64 {
        self.abs(x).sqrt()
    }

    /// V^{1/2}(x) = -√|V(x)|, so that V^{1/2} · √|V| = V.
    pub fn signed_sqrt(&self, x: f64) -> f64 {
        -self.sqrt_abs(x)
    }

    /// ∫|V| dx in closed form.
    pub fn integral_abs(&self) -> f64 {
        let base = self.depth * self.scale;
        match self.kind {
            PotentialKind::Gaussian => base * PI.sqrt(),
            PotentialKind::Lorentzian { s } => {
                base * PI.sqrt() * (ln_gamma_pos(s - 0.5) - ln_gamma_pos(s)).exp()
            }
            PotentialKind::Sech2 => 2.0 * base,
        }
    }

    /// Half-width beyond which |V| < rel·V0.
    pub fn support_half_width(&self, rel: f64) -> f64 {
        let a = self.scale;
        match self.kind {
            PotentialKind::Gaussian => a * (1.0 / rel).ln().max(0.0).sqrt(),
            PotentialKind::Lorentzian { s } => a * (rel.powf(-1.0 / s) - 1.0).max(0.0).sqrt(),
            PotentialKind::Sech2 => a * (1.0 / rel).sqrt().acosh(),
        }
    }

    /// Algebraic decay rate d of |V| ~ |x|^{-d}; `None` for exponential decay.
    pub fn decay_power(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::Lorentzian { s } => Some(2.0 * s),
            _ => None,
        }
    }

    /// Whether ∫(1+|x|)^{2(α-1)}|V| converges: always for exponential
    /// wells, s > α - 1/2 for the Lorentzian family.
    pub fn admissible(&self, alpha: FractionalIndex) -> bool {
        match self.kind {
            PotentialKind::Lorentzian { s } => s > alpha.value() - 0.5,
            _ => true,
        }
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PotentialKind::Gaussian => write!(f, "gaussian:{}:{}", self.depth, self.scale),
            PotentialKind::Lorentzian { s } => {
                write!(f, "lorentzian:{}:{}:{}", self.depth, self.scale, s)
            }
            PotentialKind::Sech2 => write!(f, "sech2:{}:{}", self.depth, self.scale),
        }
    }
}

/// Parses `kind:V0:a[:s]`.
impl FromStr for Potential {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::InvalidParameter(format!("potential '{spec}': missing field {i}")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("potential '{spec}': {e}")))
        };
        let kind = parts[0].trim().to_ascii_lowercase();
        let expected = if kind == "lorentzian" { 4 } else { 3 };
        if parts.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "potential '{spec}': expected {expected} fields for {kind}"
            )));
        }
        match kind.as_str() {
            "gaussian" => Self::gaussian(num(1)?, num(2)?),
            "lorentzian" => Self::lorentzian(num(1)?, num(2)?, num(3)?),
            "sech2" => Self::sech2(num(1)?, num(2)?),
            other => Err(Error::InvalidParameter(format!("unknown potential kind '{other}'"))),
        }
    }
}

/// ∫(1+|x|)^{2(α-1)}|V(x)| dx with its quadrature error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentCertificate {
    pub alpha: f64,
    pub value: f64,
    pub error: f64,
}

const LINE_TOL: f64 = 1e-13;

/// ∫₀^∞ f with the tail [a, ∞) mapped by x = a/τ^m. `tail_power` q is the
/// algebraic decay rate of f (None: faster than any power); m is chosen so
/// the mapped integrand vanishes at τ = 0.
fn half_line(f: impl Fn(f64) -> f64, a: f64, tail_power: Option<f64>, tol: f64) -> Result<(f64, f64)> {
    let quad = Adaptive::new(tol * 1e-3, tol).with_max_panels(5000);
    let head = quad.integrate(&f, 0.0, a)?;
    let m = match tail_power {
        Some(q) if q <= 1.0 => {
            return Err(Error::Divergent(format!("integrand decays like |x|^-{q}")))
        }
        Some(q) => (2.0 / (q - 1.0)).ceil().clamp(1.0, 400.0),
        None => 1.0,
    };
    let g = |tau: f64| {
        if tau <= 0.0 {
            return 0.0;
        }
        let t = tau.powf(m);
        let x = a / t;
        let v = f(x) * a * m / (t * tau);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let tail = quad.integrate(g, 0.0, 1.0)?;
    Ok((head.value + tail.value, head.error + tail.error))
}

/// ∫_{-∞}^{∞} f for f whose features sit within a few `a` of `center`.
fn whole_line(
    f: impl Fn(f64) -> f64,
    center: f64,
    a: f64,
    tail_power: Option<f64>,
    tol: f64,
) -> Result<(f64, f64)> {
    let right = half_line(|u| f(center + u), a, tail_power, tol)?;
    let left = half_line(|u| f(center - u), a, tail_power, tol)?;
    Ok((right.0 + left.0, right.1 + left.1))
}

/// Certified ∫(1+|x|)^{2(α-1)}|V(x)| dx.
pub fn moment_norm(v: &Potential, alpha: FractionalIndex) -> Result<MomentCertificate> {
    let e = 2.0 * (alpha.value() - 1.0);
    if !v.admissible(alpha) {
        return Err(Error::Divergent(format!(
            "moment of order {e} diverges for {v} (needs s > alpha - 1/2)"
        )));
    }
    let f = |x: f64| (1.0 + x.abs()).powf(e) * v.abs(x);
    let tail = v.decay_power().map(|d| d - e);
    let (value, error) = whole_line(f, 0.0, v.scale() * 4.0, tail, LINE_TOL)?;
    Ok(MomentCertificate {
        alpha: alpha.value(),
        value,
        error,
    })
}

/// ∬|V(x)| |x-y|^{α-1} |V(y)| dx dy.
pub fn pair_integral(v: &Potential, alpha: FractionalIndex) -> Result<f64> {
    let e = alpha.value() - 1.0;
    let a = v.scale() * 4.0;
    let tail = v.decay_power().map(|d| d - e);
    let inner = |x: f64| -> Result<f64> {
        // split at the kink y = x and at the centre of the well
        let f = |y: f64| (x - y).abs().powf(e) * v.abs(y);
        let (lo, hi) = (x.min(0.0), x.max(0.0));
        let (right, _) = half_line(|u| f(hi + u), a, tail, LINE_TOL)?;
        let (left, _) = half_line(|u| f(lo - u), a, tail, LINE_TOL)?;
        let middle = if hi > lo {
            Adaptive::new(LINE_TOL * 1e-3, LINE_TOL)
                .with_max_panels(5000)
                .integrate(f, lo, hi)?
                .value
        } else {
            0.0
        };
        Ok(left + middle + right)
    };
    outer_integral(v, a, tail, inner)
}

/// ∬|V(x)| (|x|+|y|)^{2(α-1)} |V(y)| dx dy.
pub fn hs_bound_integral(v: &Potential, alpha: FractionalIndex) -> Result<f64> {
    let e = 2.0 * (alpha.value() - 1.0);
    let a = v.scale() * 4.0;
    let tail = v.decay_power().map(|d| d - e);
    let inner = |x: f64| -> Result<f64> {
        let (val, _) = whole_line(|y| (x.abs() + y.abs()).powf(e) * v.abs(y), 0.0, a, tail, LINE_TOL)?;
        Ok(val)
    };
    outer_integral(v, a, tail, inner)
}

fn outer_integral(
    v: &Potential,
    a: f64,
    tail: Option<f64>,
    inner: impl Fn(f64) -> Result<f64>,
) -> Result<f64> {
    let failure = std::cell::Cell::new(None);
    let f = |x: f64| {
        let w = v.abs(x);
        if w == 0.0 {
            return 0.0;
        }
        match inner(x) {
            Ok(i) => w * i,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        }
    };
    let (val, _) = whole_line(f, 0.0, a, tail, 1e-12)?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(val),
    }
}

/// Closed form of the Gaussian pair integral for V0 = a = 1:
/// √(2π) 2^{α/2-1} Γ(α/2).
pub fn gaussian_pair_closed_form(alpha: f64) -> f64 {
    (2.0 * PI).sqrt() * 2f64.powf(alpha / 2.0 - 1.0) * gamma(alpha / 2.0)
}
