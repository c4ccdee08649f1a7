//! Quadrature primitives: adaptive Gauss–Kronrod (21 points), the Wynn
//! epsilon extrapolation used on alternating tails, Gauss–Legendre nodes and
//! the composite rules that back the Nyström discretization.

use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};

// 21-point Kronrod abscissae (descending, positive half) and weights, with the
// embedded 10-point Gauss weights on the odd-indexed abscissae.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_626_402_500,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Integral estimate with its error estimate and evaluation count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// One 21-point Gauss–Kronrod panel on [a, b]; returns (value, error).
pub fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (v, e, _) = gk21(f, a, b);
    (v, e)
}

/// As [`gauss_kronrod_21`], also returning the roundoff floor of the panel.
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut resabs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = kronrod * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (result, err, floor)
}

#[derive(Debug, PartialEq)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    floor: f64,
    exhausted: bool,
}

impl Panel {
    fn new(a: f64, b: f64, (value, error, floor): (f64, f64, f64)) -> Self {
        Self {
            a,
            b,
            value,
            error,
            floor,
            exhausted: false,
        }
    }

    fn priority(&self) -> f64 {
        if self.exhausted {
            f64::NEG_INFINITY
        } else {
            self.error
        }
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.priority().total_cmp(&other.priority())
    }
}

/// Adaptive Gauss–Kronrod integration over [a, b] split at `breaks`.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol·|I|)`
/// or when `max_panels` bisections have been spent; in the latter case the
/// best estimate is returned together with `QuadratureNotConverged`.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_panels: 2000,
        }
    }
}

impl Adaptive {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_max_panels(mut self, n: usize) -> Self {
        self.max_panels = n;
        self
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        self.integrate_with_breaks(f, a, b, &[])
    }

    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> Result<Estimate> {
        let mut points: Vec<f64> = std::iter::once(a)
            .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
            .chain(std::iter::once(b))
            .collect();
        points.sort_by(f64::total_cmp);
        points.dedup();

        let mut heap = BinaryHeap::new();
        let mut total = 0.0;
        let mut total_err = 0.0;
        // error held by panels that cannot be refined below roundoff
        let mut stuck_err = 0.0;
        let mut evaluations = 0;
        for w in points.windows(2) {
            let p = Panel::new(w[0], w[1], gk21(&f, w[0], w[1]));
            evaluations += 21;
            total += p.value;
            total_err += p.error;
            heap.push(p);
        }
        let mut panels = heap.len();
        loop {
            let target = self.abs_tol.max(self.rel_tol * total.abs());
            if total_err - stuck_err <= target {
                break;
            }
            if panels >= self.max_panels {
                return Err(Error::QuadratureNotConverged {
                    estimate: total,
                    error: total_err,
                    lo: total - total_err,
                    hi: total + total_err,
                });
            }
            let worst = match heap.pop() {
                Some(p) if !p.exhausted => p,
                Some(p) => {
                    heap.push(p);
                    break;
                }
                None => break,
            };
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b || worst.error <= 2.0 * worst.floor {
                stuck_err += worst.error;
                heap.push(Panel {
                    exhausted: true,
                    ..worst
                });
                continue;
            }
            let left = Panel::new(worst.a, mid, gk21(&f, worst.a, mid));
            let right = Panel::new(mid, worst.b, gk21(&f, mid, worst.b));
            evaluations += 42;
            total += left.value + right.value - worst.value;
            total_err += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            panels += 1;
        }
        // re-sum to drop the drift of the running total
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        Ok(Estimate {
            value,
            error,
            evaluations,
        })
    }

    /// ∫_a^∞ f via x = a + t/(1-t).
    pub fn integrate_to_infinity<F: Fn(f64) -> f64>(&self, f: F, a: f64) -> Result<Estimate> {
        let g = |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(a + t / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        self.integrate(g, 0.0, 1.0)
    }
}

/// Wynn's epsilon algorithm over a growing sequence of partial sums.
#[derive(Debug, Clone, Default)]
pub struct WynnEpsilon {
    sums: Vec<f64>,
    last_estimates: Vec<f64>,
}

impl WynnEpsilon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, partial_sum: f64) {
        self.sums.push(partial_sum);
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    /// Extrapolated limit and an error estimate from the last three
    /// extrapolations. Uses at most the 50 most recent partial sums.
    pub fn extrapolate(&mut self) -> (f64, f64) {
        let n = self.sums.len();
        if n < 3 {
            let v = *self.sums.last().unwrap_or(&0.0);
            return (v, f64::INFINITY);
        }
        let start = n.saturating_sub(50);
        let seq = &self.sums[start..];
        // columns e_{-1} = 0, e_0 = seq
        let mut prev: Vec<f64> = vec![0.0; seq.len() + 1];
        let mut cur: Vec<f64> = seq.to_vec();
        let mut best = *seq.last().unwrap();
        let mut col = 0;
        while cur.len() > 1 {
            let mut next = Vec::with_capacity(cur.len() - 1);
            for i in 0..cur.len() - 1 {
                let diff = cur[i + 1] - cur[i];
                let v = if diff == 0.0 || !diff.is_finite() {
                    f64::INFINITY
                } else {
                    prev[i + 1] + 1.0 / diff
                };
                next.push(v);
            }
            col += 1;
            if col % 2 == 0 {
                if let Some(&v) = next.last() {
                    if v.is_finite() {
                        best = v;
                    }
                }
            }
            if next.iter().any(|v| !v.is_finite()) {
                break;
            }
            prev = cur;
            cur = next;
        }
        self.last_estimates.push(best);
        let k = self.last_estimates.len();
        let err = if k >= 3 {
            let e = &self.last_estimates[k - 3..];
            (e[2] - e[1]).abs() + (e[1] - e[0]).abs()
        } else {
            f64::INFINITY
        };
        (best, err.max(5.0 * f64::EPSILON * best.abs()))
    }
}

/// n-point Gauss–Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = z;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Nodes and positive weights of a one-dimensional quadrature rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Node spacing of equispaced (trapezoid) rules.
    pub spacing: Option<f64>,
}

impl QuadratureRule {
    /// `panels` equal Gauss–Legendre panels of `order` points on [a, b].
    pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> Result<Self> {
        if !(b > a) || panels == 0 || order == 0 {
            return Err(Error::InvalidParameter(format!(
                "invalid composite rule on [{a}, {b}] with {panels}x{order}"
            )));
        }
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (xi + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        Ok(Self {
            nodes,
            weights,
            spacing: None,
        })
    }

    /// Composite Gauss–Legendre with `n` total nodes (order 8 panels when `n`
    /// is a multiple of 8, otherwise the largest order <= 8 dividing `n`).
    pub fn gauss_legendre_with_nodes(a: f64, b: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("rule needs at least one node".into()));
        }
        let order = (1..=8).rev().find(|&o| n.is_multiple_of(o)).unwrap_or(1);
        Self::composite_gauss_legendre(a, b, n / order, order)
    }

    /// Trapezoid rule with `n >= 2` equispaced nodes.
    pub fn trapezoid(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(b > a) || n < 2 {
            return Err(Error::InvalidParameter("trapezoid needs b > a and n >= 2".into()));
        }
        let h = (b - a) / (n - 1) as f64;
        let nodes = (0..n).map(|i| a + i as f64 * h).collect();
        let mut weights = vec![h; n];
        weights[0] *= 0.5;
        weights[n - 1] *= 0.5;
        Ok(Self {
            nodes,
            weights,
            spacing: Some(h),
        })
    }

    /// A single node with the given weight.
    pub fn single(x: f64, w: f64) -> Self {
        Self {
            nodes: vec![x],
            weights: vec![w],
            spacing: None,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}
