//! The Weyl operator K_α|P|^α as a Fourier multiplier on a periodic grid,
//! and the grid Hamiltonian K_α|P|^α - g|V|.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::Potential;
use crate::special::FractionalIndex;

/// N equispaced nodes x_j = -L + j·2L/N on the period-2L box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralGrid {
    half_width: f64,
    n: usize,
}

impl SpectralGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidParameter(format!("L must be > 0, got {half_width}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid size must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Self { half_width, n })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Momentum of FFT bin k: 2πk/(2L) for k ≤ N/2, negative above.
    /// Bin N/2 is the Nyquist frequency, taken positive.
    pub fn momentum(&self, k: usize) -> f64 {
        let n = self.n as i64;
        let k = k as i64;
        let signed = if k <= n / 2 { k } else { k - n };
        PI * signed as f64 / self.half_width
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.momentum(k)).collect()
    }
}

/// Complex samples on the nodes of a [`SpectralGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self {
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn sample(grid: &SpectralGrid, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            values: grid.nodes().into_iter().map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Σ conj(f_j) g_j · h.
    pub fn inner(&self, other: &GridFunction, spacing: f64) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * spacing
    }
}

/// |p|^α.
pub fn symbol(p: f64, alpha: FractionalIndex) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p.abs().powf(alpha.value())
    }
}

/// Multiplies the discrete transform of `values` by `multiplier(p_k)` in place.
fn apply_multiplier(values: &mut [Complex64], grid: &SpectralGrid, multiplier: impl Fn(f64) -> f64) {
    let n = grid.len();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(values);
    for (k, v) in values.iter_mut().enumerate() {
        *v *= multiplier(grid.momentum(k)) / n as f64;
    }
    planner.plan_fft_inverse(n).process(values);
}

/// K_α |P|^α f on the periodic grid.
pub fn apply_weyl(
    f: &GridFunction,
    grid: &SpectralGrid,
    alpha: FractionalIndex,
    k_alpha: f64,
) -> Result<GridFunction> {
    if f.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: f.len(),
        });
    }
    if f.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite("grid function".into()));
    }
    let mut values = f.values.clone();
    apply_multiplier(&mut values, grid, |p| k_alpha * symbol(p, alpha));
    Ok(GridFunction { values })
}

/// First column of the circulant matrix of `multiplier(P)`:
/// c_j = (1/N) Σ_k multiplier(p_k) e^{i p_k x_j'} with x_j' = j h.
fn circulant_column(grid: &SpectralGrid, multiplier: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = grid.len();
    let mut values: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(multiplier(grid.momentum(k)), 0.0))
        .collect();
    FftPlanner::<f64>::new().plan_fft_inverse(n).process(&mut values);
    values.iter().map(|v| v.re / n as f64).collect()
}

fn check_coupling(g: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::InvalidParameter(format!("g must lie in [0, 1], got {g}")));
    }
    Ok(())
}

fn sampled_abs(v: &Potential, grid: &SpectralGrid) -> Result<Vec<f64>> {
    let w: Vec<f64> = grid.nodes().iter().map(|&x| v.abs(x)).collect();
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("potential samples".into()));
    }
    Ok(w)
}

/// Dense N×N matrix of K_α|P|^α - g|V| in the nodal basis.
pub fn hamiltonian_matrix(
    v: &Potential,
    g: f64,
    grid: &SpectralGrid,
    alpha: FractionalIndex,
    k_alpha: f64,
) -> Result<DMatrix<f64>> {
    check_coupling(g)?;
    let n = grid.len();
    let col = circulant_column(grid, |p| k_alpha * symbol(p, alpha));
    let w = sampled_abs(v, grid)?;
    let mut h = DMatrix::from_fn(n, n, |a, b| col[(a + n - b) % n]);
    for a in 0..n {
        h[(a, a)] -= g * w[a];
    }
    // symmetrize away FFT round-off
    let t = h.transpose();
    h += t;
    h *= 0.5;
    Ok(h)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn lowest_eigenvalue(h: &DMatrix<f64>) -> Result<f64> {
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenNotConverged)?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

const DENSE_EIGEN_MAX: usize = 64;

// beyond this many support nodes the matrix is applied by FFT instead of stored
const DENSE_SUPPORT_MAX: usize = 2048;

fn largest_dense(m: DMatrix<f64>) -> Result<f64> {
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 10_000).ok_or(Error::EigenNotConverged)?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Largest eigenvalue of the symmetric operator `apply` on R^n by Lanczos
/// with full reorthogonalisation, started from `start`.
fn lanczos_top(n: usize, apply: impl Fn(&DVector<f64>) -> DVector<f64>, start: &[f64]) -> Result<f64> {
    let mut q = DVector::from_column_slice(start);
    let norm = q.norm();
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter("Lanczos start vector is zero".into()));
    }
    q /= norm;
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let (mut diag, mut off) = (Vec::new(), Vec::new());
    for step in 0..n {
        let mut w = apply(&q);
        diag.push(q.dot(&w));
        basis.push(q);
        for b in &basis {
            let c = b.dot(&w);
            w.axpy(-c, b, 1.0);
        }
        let beta = w.norm();
        let k = diag.len();
        let t = DMatrix::from_fn(k, k, |i, j| match i.abs_diff(j) {
            0 => diag[i],
            1 => off[i.min(j)],
            _ => 0.0,
        });
        let ritz = SymmetricEigen::try_new(t, f64::EPSILON, 10_000).ok_or(Error::EigenNotConverged)?;
        let top = ritz.eigenvalues.imax();
        let value = ritz.eigenvalues[top];
        // residual norm of the top Ritz pair
        let residual = beta * ritz.eigenvectors[(k - 1, top)].abs();
        if residual <= 1e-13 * value.abs() || step + 1 == n {
            return Ok(value);
        }
        off.push(beta);
        q = w / beta;
    }
    Err(Error::EigenNotConverged)
}

/// Ground state of the grid Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridGroundState {
    /// Binding energy E > 0; the lowest eigenvalue is -E.
    pub energy: f64,
    /// Nodes where |V| is retained.
    pub support: usize,
    pub iterations: usize,
}

/// W^{1/2} (T + E)^{-1} W^{1/2} restricted to the nodes where |V| > 1e-18·V0.
struct ReducedResolvent<'a> {
    grid: &'a SpectralGrid,
    alpha: FractionalIndex,
    k_alpha: f64,
    support: Vec<usize>,
    root_w: Vec<f64>,
}

impl<'a> ReducedResolvent<'a> {
    fn new(v: &Potential, grid: &'a SpectralGrid, alpha: FractionalIndex, k_alpha: f64) -> Result<Self> {
        let w = sampled_abs(v, grid)?;
        let cut = 1e-18 * v.depth();
        let support: Vec<usize> = (0..grid.len()).filter(|&j| w[j] > cut).collect();
        let root_w = support.iter().map(|&j| w[j].sqrt()).collect();
        Ok(Self {
            grid,
            alpha,
            k_alpha,
            support,
            root_w,
        })
    }

    fn top_eigenvalue(&self, e: f64) -> Result<f64> {
        let n = self.grid.len();
        let multiplier = |p: f64| 1.0 / (self.k_alpha * symbol(p, self.alpha) + e);
        let m = self.support.len();
        if m > DENSE_SUPPORT_MAX {
            let apply = |x: &DVector<f64>| {
                let mut full = vec![Complex64::new(0.0, 0.0); n];
                for ((&j, &r), &v) in self.support.iter().zip(&self.root_w).zip(x.iter()) {
                    full[j] = Complex64::new(r * v, 0.0);
                }
                apply_multiplier(&mut full, self.grid, multiplier);
                DVector::from_iterator(m, self.support.iter().zip(&self.root_w).map(|(&j, &r)| r * full[j].re))
            };
            return lanczos_top(m, apply, &self.root_w);
        }
        let col = circulant_column(self.grid, multiplier);
        let s = DMatrix::from_fn(m, m, |a, b| {
            let d = (self.support[a] + n - self.support[b]) % n;
            // circulant of an even multiplier is symmetric
            let c = 0.5 * (col[d] + col[(n - d) % n]);
            self.root_w[a] * c * self.root_w[b]
        });
        if m <= DENSE_EIGEN_MAX {
            return largest_dense(s);
        }
        lanczos_top(m, |x| &s * x, &self.root_w)
    }
}

/// Largest eigenvalue of √|V| (K_α|P|^α + E)^{-1} √|V| on the periodic grid,
/// the grid counterpart of the Birman–Schwinger operator at κ² = E.
pub fn grid_birman_schwinger_top(
    v: &Potential,
    grid: &SpectralGrid,
    alpha: FractionalIndex,
    k_alpha: f64,
    energy: f64,
) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(Error::InvalidParameter(format!("energy must be > 0, got {energy}")));
    }
    ReducedResolvent::new(v, grid, alpha, k_alpha)?.top_eigenvalue(energy)
}

/// Lowest eigenvalue of [`hamiltonian_matrix`] without forming it.
///
/// -E is an eigenvalue iff 1 is an eigenvalue of g W^{1/2} (T + E)^{-1} W^{1/2}
/// with T the circulant multiplier and W = diag|V|; only nodes where |V|
/// exceeds 1e-18·V0 enter, and the largest such eigenvalue decreases
/// strictly in E, so E is found by bisection.
pub fn grid_ground_energy(
    v: &Potential,
    g: f64,
    grid: &SpectralGrid,
    alpha: FractionalIndex,
    k_alpha: f64,
) -> Result<GridGroundState> {
    check_coupling(g)?;
    if g == 0.0 {
        return Err(Error::InvalidParameter("no bound state at g = 0".into()));
    }
    let w = sampled_abs(v, grid)?;
    let reduced = ReducedResolvent::new(v, grid, alpha, k_alpha)?;
    let m = reduced.support.len();
    let excess = |e: f64| -> Result<f64> { Ok(g * reduced.top_eigenvalue(e)? - 1.0) };
    let mut hi = g * w.iter().copied().fold(0.0, f64::max);
    let mut lo = hi * 1e-3;
    let mut iterations = 0;
    while excess(lo)? <= 0.0 {
        hi = lo;
        lo *= 1e-3;
        iterations += 1;
        if lo < 1e-300 {
            return Err(Error::NoBracket { lo, hi });
        }
    }
    while (hi - lo) > 1e-13 * hi {
        let mid = (lo * hi).sqrt();
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(GridGroundState {
        energy: 0.5 * (lo + hi),
        support: m,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn alpha(a: f64) -> FractionalIndex {
        FractionalIndex::new(a).unwrap()
    }

    #[test]
    fn lanczos_matches_dense_top_eigenvalue() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let b = DMatrix::from_fn(150, 150, |_, _| rng.random_range(-1.0..1.0));
        let m = &b * b.transpose();
        let start = vec![1.0; 150];
        let lanczos = lanczos_top(150, |x| &m * x, &start).unwrap();
        assert_relative_eq!(lanczos, largest_dense(m).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn fft_path_matches_stored_matrix() {
        let v = Potential::sech2(1.0, 3.0).unwrap();
        let grid = SpectralGrid::new(80.0, 4096).unwrap();
        let reduced = ReducedResolvent::new(&v, &grid, alpha(SQRT2), 1.0).unwrap();
        let m = reduced.support.len();
        assert!(m > DENSE_SUPPORT_MAX);
        let col = circulant_column(&grid, |p| 1.0 / (symbol(p, alpha(SQRT2)) + 0.01));
        let s = DMatrix::from_fn(m, m, |a, b| {
            let d = (reduced.support[a] + 4096 - reduced.support[b]) % 4096;
            reduced.root_w[a] * col[d] * reduced.root_w[b]
        });
        let stored = lanczos_top(m, |x| &s * x, &reduced.root_w).unwrap();
        assert_relative_eq!(reduced.top_eigenvalue(0.01).unwrap(), stored, max_relative = 1e-12);
    }

    #[test]
    fn symbol_examples() {
        assert_eq!(symbol(0.0, alpha(1.3)), 0.0);
        assert_eq!(symbol(3.0, alpha(2.0)), 9.0);
        assert_relative_eq!(symbol(-2.0, alpha(SQRT2)), 2.665_144_142_690_225, max_relative = 1e-14);
    }

    #[test]
    fn grid_validation_and_momenta() {
        assert!(SpectralGrid::new(1.0, 12).is_err());
        assert!(SpectralGrid::new(1.0, 4).is_err());
        assert!(SpectralGrid::new(0.0, 16).is_err());
        let grid = SpectralGrid::new(PI, 8).unwrap();
        assert_eq!(grid.momenta(), vec![0.0, 1.0, 2.0, 3.0, 4.0, -3.0, -2.0, -1.0]);
        assert_relative_eq!(grid.spacing(), PI / 4.0);
    }

    #[test]
    fn constant_maps_to_zero() {
        let grid = SpectralGrid::new(5.0, 64).unwrap();
        let f = GridFunction::from_real(&[1.0; 64]);
        let out = apply_weyl(&f, &grid, alpha(SQRT2), 2.0).unwrap();
        assert!(out.values.iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn length_mismatch_rejected() {
        let grid = SpectralGrid::new(5.0, 64).unwrap();
        let f = GridFunction::from_real(&[1.0; 32]);
        assert!(matches!(
            apply_weyl(&f, &grid, alpha(1.5), 1.0),
            Err(Error::LengthMismatch { expected: 64, got: 32 })
        ));
    }

    #[test]
    fn plane_waves_are_eigenfunctions() {
        let grid = SpectralGrid::new(7.0, 256).unwrap();
        let a = alpha(SQRT2);
        for k in [1usize, 5, 40, 127, 128, 200] {
            let p = grid.momentum(k);
            let f = GridFunction::sample(&grid, |x| Complex64::from_polar(1.0, p * x));
            let out = apply_weyl(&f, &grid, a, 1.7).unwrap();
            let lam = 1.7 * symbol(p, a);
            for (o, i) in out.values.iter().zip(&f.values) {
                assert!((o - lam * i).norm() <= 1e-10 * lam, "k = {k}");
            }
        }
    }

    #[test]
    fn laplacian_of_sine() {
        let grid = SpectralGrid::new(3.0, 64).unwrap();
        let p1 = grid.momentum(1);
        let f = GridFunction::sample(&grid, |x| Complex64::new((p1 * x).sin(), 0.0));
        let out = apply_weyl(&f, &grid, alpha(2.0), 0.5).unwrap();
        for (o, i) in out.values.iter().zip(&f.values) {
            assert!((o - 0.5 * p1 * p1 * i).norm() < 1e-13);
        }
    }

    #[test]
    fn weyl_is_symmetric_on_random_pairs() {
        let grid = SpectralGrid::new(10.0, 128).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let f: Vec<f64> = (0..128).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g: Vec<f64> = (0..128).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (f, g) = (GridFunction::from_real(&f), GridFunction::from_real(&g));
            let a = alpha(SQRT2);
            let lhs = apply_weyl(&f, &grid, a, 1.0).unwrap().inner(&g, grid.spacing());
            let rhs = f.inner(&apply_weyl(&g, &grid, a, 1.0).unwrap(), grid.spacing());
            assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm());
        }
    }

    #[test]
    fn free_spectrum_is_the_symbol() {
        let grid = SpectralGrid::new(4.0, 32).unwrap();
        let v = Potential::gaussian(1.0, 1.0).unwrap();
        let a = alpha(1.7);
        let h = hamiltonian_matrix(&v, 0.0, &grid, a, 1.3).unwrap();
        let mut got: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        let mut want: Vec<f64> = grid.momenta().iter().map(|&p| 1.3 * symbol(p, a)).collect();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-11 * (1.0 + w));
        }
        assert!(got[0] > -1e-12);
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let grid = SpectralGrid::new(6.0, 64).unwrap();
        let v = Potential::sech2(1.0, 1.0).unwrap();
        let h = hamiltonian_matrix(&v, 0.4, &grid, alpha(SQRT2), 1.0).unwrap();
        assert!((&h - h.transpose()).amax() <= 1e-12);
    }

    #[test]
    fn reduction_matches_dense_eigensolve() {
        for (a, g) in [(SQRT2, 0.3), (2.0, 0.5), (1.2, 0.8)] {
            let grid = SpectralGrid::new(12.0, 256).unwrap();
            let v = Potential::gaussian(1.0, 1.0).unwrap();
            let dense = lowest_eigenvalue(&hamiltonian_matrix(&v, g, &grid, alpha(a), 1.0).unwrap()).unwrap();
            let reduced = grid_ground_energy(&v, g, &grid, alpha(a), 1.0).unwrap();
            assert!(reduced.support < 256);
            assert_relative_eq!(-reduced.energy, dense, max_relative = 1e-10);
        }
    }

    #[test]
    fn weak_coupling_eigenvalue_tends_to_zero() {
        let grid = SpectralGrid::new(20.0, 256).unwrap();
        let v = Potential::gaussian(1.0, 1.0).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for g in [0.5, 0.1, 0.02, 0.004] {
            let e = lowest_eigenvalue(&hamiltonian_matrix(&v, g, &grid, alpha(SQRT2), 1.0).unwrap()).unwrap();
            assert!(e < 0.0 && e > prev);
            prev = e;
        }
        assert!(prev > -1e-3);
    }

    #[test]
    fn sqrt2_gaussian_binds_at_small_coupling() {
        let grid = SpectralGrid::new(400.0, 1 << 14).unwrap();
        let v = Potential::gaussian(1.0, 1.0).unwrap();
        let e = grid_ground_energy(&v, 0.1, &grid, alpha(SQRT2), 1.0).unwrap();
        assert!(e.energy > 0.0);
    }

    /// Second-order finite differences of -K ψ'' - g|V| ψ on [-L, L] with
    /// Dirichlet ends; lowest eigenvalue by Sturm-sequence bisection.
    fn finite_difference_ground(v: &Potential, g: f64, k: f64, l: f64, n: usize) -> f64 {
        let h = 2.0 * l / n as f64;
        let diag: Vec<f64> = (1..n).map(|j| 2.0 * k / (h * h) - g * v.abs(-l + j as f64 * h)).collect();
        let off = -k / (h * h);
        let count_below = |x: f64| {
            let mut count = 0;
            let mut q = 1.0;
            for (i, d) in diag.iter().enumerate() {
                q = d - x - if i == 0 { 0.0 } else { off * off / q };
                if q == 0.0 {
                    q = 1e-300;
                }
                if q < 0.0 {
                    count += 1;
                }
            }
            count
        };
        let (mut lo, mut hi) = (-g * v.depth(), 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn alpha_two_matches_finite_differences() {
        let v = Potential::gaussian(1.0, 1.0).unwrap();
        let grid = SpectralGrid::new(40.0, 4096).unwrap();
        let spectral = -grid_ground_energy(&v, 0.5, &grid, alpha(2.0), 1.0).unwrap().energy;
        // Richardson extrapolation of h², h⁴ errors
        let e: Vec<f64> = [8000, 16000, 32000]
            .iter()
            .map(|&n| finite_difference_ground(&v, 0.5, 1.0, 40.0, n))
            .collect();
        let r1 = (4.0 * e[1] - e[0]) / 3.0;
        let r2 = (4.0 * e[2] - e[1]) / 3.0;
        let fd = (16.0 * r2 - r1) / 15.0;
        assert!((spectral - fd).abs() < 1e-6, "spectral {spectral} fd {fd}");
    }

    proptest! {
        #[test]
        fn symbol_even_and_increasing(p in 0.0f64..100.0, dp in 1e-6f64..10.0, a in 1.0001f64..2.0) {
            let a = alpha(a);
            prop_assert_eq!(symbol(p, a), symbol(-p, a));
            prop_assert!(symbol(p + dp, a) > symbol(p, a));
        }

        #[test]
        fn weyl_is_linear(c in -3.0f64..3.0, seed in 0u64..1000) {
            let grid = SpectralGrid::new(5.0, 64).unwrap();
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let f: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mix: Vec<f64> = f.iter().zip(&g).map(|(a, b)| c * a + b).collect();
            let a = alpha(1.6);
            let lf = apply_weyl(&GridFunction::from_real(&f), &grid, a, 1.0).unwrap();
            let lg = apply_weyl(&GridFunction::from_real(&g), &grid, a, 1.0).unwrap();
            let lm = apply_weyl(&GridFunction::from_real(&mix), &grid, a, 1.0).unwrap();
            for j in 0..64 {
                let want = c * lf.values[j] + lg.values[j];
                prop_assert!((lm.values[j] - want).norm() < 1e-11);
                // real even input → real output
                prop_assert!(lf.values[j].im.abs() < 1e-12);
            }
        }
    }
}
