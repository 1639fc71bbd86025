//! Periodic position grid, discretized wavefunctions, Gaussian pointer states
//! and the overcomplete frames they form.
//!
//! A pointer state centered at `x` is the wrapped Gaussian
//! `psi_x(x') ∝ Σ_m exp(-a² (x' - x - mL)²)` sampled on the grid and scaled
//! to unit L² norm, so two states a periodic distance `d` apart overlap by
//! `exp(-a² d² / 2)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::spectra;

/// Image terms smaller than this are dropped from the wrapped Gaussian sum.
const IMAGE_CUTOFF: f64 = 1e-16;
const MAX_IMAGES: i64 = 10_000;

/// Uniform periodic 1-D lattice `x_k = k * length / n_points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_points: usize,
    length: f64,
}

impl Grid {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < 2 {
            return Err(invalid(format!("grid needs at least 2 points, got {n_points}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(invalid(format!("grid length must be positive and finite, got {length}")));
        }
        Ok(Self { n_points, length })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        k as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.point(k)).collect()
    }

    /// `min(|x - y|, L - |x - y|)` after reducing both coordinates mod L.
    pub fn periodic_distance(&self, x: f64, y: f64) -> f64 {
        periodic_distance(x, y, self.length)
    }

    /// Signed displacement `x - y` folded into `[-L/2, L/2)`.
    pub fn wrap_displacement(&self, x: f64, y: f64) -> f64 {
        wrap_displacement(x - y, self.length)
    }
}

/// Same as [`Grid::new`].
pub fn make_grid(n_points: usize, length: f64) -> Result<Grid> {
    Grid::new(n_points, length)
}

pub(crate) fn wrap_displacement(d: f64, length: f64) -> f64 {
    let r = d.rem_euclid(length);
    if r >= 0.5 * length {
        r - length
    } else {
        r
    }
}

pub fn periodic_distance(x: f64, y: f64, length: f64) -> f64 {
    let r = (x - y).rem_euclid(length);
    r.min(length - r)
}

/// Complex amplitudes on a [`Grid`]; the continuum norm is
/// `spacing * Σ |psi_k|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(invalid(format!(
                "{} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.n_points()
            )));
        }
        if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(invalid("amplitudes must be finite"));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.spacing() * self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::DegenerateInput("cannot normalize the zero wavefunction".into()));
        }
        for z in &mut self.amplitudes {
            *z /= norm;
        }
        Ok(self)
    }

    /// The state as an ℓ²-unit vector, `sqrt(spacing) * psi / ||psi||`.
    pub fn unit_vector(&self) -> DVector<Complex64> {
        let norm = self.norm_sqr().sqrt();
        let scale = self.grid.spacing().sqrt() / norm;
        DVector::from_iterator(self.amplitudes.len(), self.amplitudes.iter().map(|z| z * scale))
    }

    /// Inverse participation ratio of the grid vector.
    pub fn ipr(&self) -> f64 {
        spectra::ipr(self.unit_vector().as_slice())
    }
}

/// Center and inverse width `a` of a Gaussian pointer state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub center: f64,
    pub width_a: f64,
}

impl GaussianParams {
    pub fn new(center: f64, width_a: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(invalid(format!("center must be finite, got {center}")));
        }
        if !(width_a.is_finite() && width_a > 0.0) {
            return Err(invalid(format!("width_a must be positive, got {width_a}")));
        }
        Ok(Self { center, width_a })
    }

    fn check_fits(&self, grid: &Grid) -> Result<()> {
        if 1.0 / self.width_a > grid.length() / 10.0 {
            return Err(Error::PreconditionViolation(format!(
                "packet support 1/a = {} exceeds L/10 = {}",
                1.0 / self.width_a,
                grid.length() / 10.0
            )));
        }
        Ok(())
    }
}

/// Unnormalized wrapped Gaussian `Σ_m exp(-a² (d + mL)²)` with `d` already
/// folded into `[-L/2, L/2)`.
fn wrapped_gaussian(d: f64, a_sq: f64, length: f64) -> f64 {
    let mut sum = (-a_sq * d * d).exp();
    for m in 1..=MAX_IMAGES {
        let shift = m as f64 * length;
        let plus = (-a_sq * (d + shift).powi(2)).exp();
        let minus = (-a_sq * (d - shift).powi(2)).exp();
        sum += plus + minus;
        if plus < IMAGE_CUTOFF && minus < IMAGE_CUTOFF {
            break;
        }
    }
    sum
}

/// Normalized Gaussian pointer state on `grid`.
pub fn gaussian_state(grid: &Grid, params: &GaussianParams) -> Result<WaveFunction> {
    params.check_fits(grid)?;
    let a_sq = params.width_a * params.width_a;
    let amplitudes = (0..grid.n_points())
        .map(|k| {
            let d = grid.wrap_displacement(grid.point(k), params.center);
            Complex64::new(wrapped_gaussian(d, a_sq, grid.length()), 0.0)
        })
        .collect();
    WaveFunction::new(*grid, amplitudes)?.normalized()
}

/// `spacing * Σ conj(f_k) g_k`.
pub fn inner_product(f: &WaveFunction, g: &WaveFunction) -> Result<Complex64> {
    if f.grid != g.grid {
        return Err(invalid("inner product of wavefunctions on different grids"));
    }
    let sum: Complex64 = f
        .amplitudes
        .iter()
        .zip(&g.amplitudes)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(sum * f.grid.spacing())
}

/// Closed-form overlap `exp(-a² d(x, y)² / 2)` of two normalized pointer
/// states, `d` being the periodic distance on a ring of circumference `length`.
pub fn analytic_overlap(x: f64, y: f64, width_a: f64, length: f64) -> f64 {
    let d = periodic_distance(x, y, length);
    (-0.5 * width_a * width_a * d * d).exp()
}

/// A finite sample of the pointer-state continuum, all members sharing one
/// width.
#[derive(Debug, Clone)]
pub struct PointerFrame {
    grid: Grid,
    members: Vec<GaussianParams>,
    states: Vec<WaveFunction>,
}

impl PointerFrame {
    pub fn new(grid: &Grid, centers: &[f64], width_a: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(invalid("a frame needs at least one member"));
        }
        let members = centers
            .iter()
            .map(|&c| GaussianParams::new(c, width_a))
            .collect::<Result<Vec<_>>>()?;
        let states = members
            .iter()
            .map(|p| gaussian_state(grid, p))
            .collect::<Result<Vec<_>>>()?;
        let frame = Self { grid: *grid, members, states };

        let gram = frame.gram();
        for i in 0..gram.nrows() {
            for j in (i + 1)..gram.ncols() {
                if gram[(i, j)] <= 0.0 {
                    return Err(Error::PreconditionViolation(format!(
                        "members {i} and {j} have non-positive overlap {}",
                        gram[(i, j)]
                    )));
                }
            }
        }
        Ok(frame)
    }

    /// `k` members starting at `start`, spaced `delta` apart.
    pub fn evenly_spaced(grid: &Grid, start: f64, delta: f64, k: usize, width_a: f64) -> Result<Self> {
        let centers: Vec<f64> = (0..k).map(|i| start + i as f64 * delta).collect();
        Self::new(grid, &centers, width_a)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn width_a(&self) -> f64 {
        self.members[0].width_a
    }

    pub fn members(&self) -> &[GaussianParams] {
        &self.members
    }

    pub fn states(&self) -> &[WaveFunction] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn gram(&self) -> DMatrix<f64> {
        let k = self.states.len();
        let mut g = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                // same grid by construction
                let s = inner_product(&self.states[i], &self.states[j])
                    .expect("frame states share a grid")
                    .re;
                g[(i, j)] = s;
                g[(j, i)] = s;
            }
        }
        g
    }
}

/// Real symmetric overlap matrix `G_ij = <psi_i|psi_j>` of a frame.
pub fn gram_matrix(frame: &PointerFrame) -> DMatrix<f64> {
    frame.gram()
}

fn check_symmetric(g: &DMatrix<f64>) -> Result<()> {
    if !g.is_square() {
        return Err(invalid(format!("expected a square matrix, got {}x{}", g.nrows(), g.ncols())));
    }
    let scale = g.amax().max(1.0);
    for i in 0..g.nrows() {
        for j in (i + 1)..g.ncols() {
            if (g[(i, j)] - g[(j, i)]).abs() > 1e-10 * scale {
                return Err(invalid(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Singular values of a symmetric matrix, descending.
pub fn singular_values(g: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(g)?;
    let spectrum = spectra::eigh_real(g)?;
    let mut sv: Vec<f64> = spectrum.eigenvalues.iter().map(|l| l.abs()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Number of singular values at or above `tol` times the largest one.
pub fn effective_rank(g: &DMatrix<f64>, tol: f64) -> Result<usize> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let sv = singular_values(g)?;
    let largest = sv.first().copied().unwrap_or(0.0);
    if largest == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s >= tol * largest).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_examples() {
        let g = make_grid(4, 4.0).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.points(), vec![0.0, 1.0, 2.0, 3.0]);

        let g = make_grid(2, 1.0).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.points(), vec![0.0, 0.5]);

        assert_eq!(make_grid(256, 40.0).unwrap().spacing(), 0.15625);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(make_grid(1, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_grid(0, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_grid(8, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_grid(8, -3.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn periodic_distance_is_bounded() {
        let g = make_grid(16, 10.0).unwrap();
        assert_abs_diff_eq!(g.periodic_distance(1.0, 9.0), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.periodic_distance(9.0, 1.0), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.periodic_distance(0.0, 5.0), 5.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.periodic_distance(-3.0, 23.0), 4.0, epsilon = 1e-13);
    }

    #[test]
    fn narrow_packet_collapses_onto_one_point() {
        let g = make_grid(64, 40.0).unwrap();
        let psi = gaussian_state(&g, &GaussianParams::new(0.0, 50.0).unwrap()).unwrap();
        assert!(psi.ipr() > 1.0 - 1e-12);
        assert!(psi.amplitudes()[0].norm() > 0.0);
    }

    #[test]
    fn packet_at_midpoint_is_reflection_symmetric() {
        let g = make_grid(128, 40.0).unwrap();
        let psi = gaussian_state(&g, &GaussianParams::new(20.0, 1.3).unwrap()).unwrap();
        let amp = psi.amplitudes();
        // reflection about index 64 maps k -> 128 - k
        for k in 1..64 {
            assert_abs_diff_eq!(amp[64 + k].re, amp[64 - k].re, epsilon = 1e-15);
        }
    }

    #[test]
    fn overlap_of_unit_spaced_packets() {
        let g = make_grid(512, 40.0).unwrap();
        let f = gaussian_state(&g, &GaussianParams::new(0.0, 1.0).unwrap()).unwrap();
        let h = gaussian_state(&g, &GaussianParams::new(1.0, 1.0).unwrap()).unwrap();
        let s = inner_product(&f, &h).unwrap();
        assert_abs_diff_eq!(s.re, (-0.5f64).exp(), epsilon = 1e-6);
        assert_abs_diff_eq!(s.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn too_wide_packet_is_rejected() {
        let g = make_grid(64, 5.0).unwrap();
        let err = gaussian_state(&g, &GaussianParams::new(0.0, 1.0).unwrap());
        assert!(matches!(err, Err(Error::PreconditionViolation(_))));
    }

    #[test]
    fn inner_product_basics() {
        let g = make_grid(8, 8.0).unwrap();
        let mut a = vec![Complex64::new(0.0, 0.0); 8];
        let mut b = a.clone();
        a[0] = Complex64::new(1.0, 0.5);
        a[1] = Complex64::new(-0.3, 0.2);
        b[4] = Complex64::new(0.7, -1.0);
        b[5] = Complex64::new(0.1, 0.0);
        let f = WaveFunction::new(g, a).unwrap().normalized().unwrap();
        let h = WaveFunction::new(g, b).unwrap().normalized().unwrap();
        assert_abs_diff_eq!(inner_product(&f, &f).unwrap().re, 1.0, epsilon = 1e-12);
        assert_eq!(inner_product(&f, &h).unwrap(), Complex64::new(0.0, 0.0));

        let other = make_grid(8, 4.0).unwrap();
        let k = WaveFunction::new(other, vec![Complex64::new(1.0, 0.0); 8]).unwrap();
        assert!(matches!(inner_product(&f, &k), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn analytic_overlap_examples() {
        assert_eq!(analytic_overlap(3.0, 3.0, 2.0, 40.0), 1.0);
        assert_abs_diff_eq!(analytic_overlap(0.0, 1.0, 1.0, 40.0), 0.606_530_659_712_633_4, epsilon = 1e-15);
        let far = analytic_overlap(0.0, 5.0, 1.0, 1e6);
        assert!(far > 0.0 && far < 1e-5);
        // wraps around the ring
        assert_abs_diff_eq!(
            analytic_overlap(0.5, 39.5, 1.0, 40.0),
            analytic_overlap(0.0, 1.0, 1.0, 40.0),
            epsilon = 1e-14
        );
    }

    #[test]
    fn gram_examples() {
        let g = make_grid(512, 40.0).unwrap();
        let single = PointerFrame::new(&g, &[7.0], 1.0).unwrap();
        let gm = gram_matrix(&single);
        assert_eq!(gm.shape(), (1, 1));
        assert_abs_diff_eq!(gm[(0, 0)], 1.0, epsilon = 1e-12);

        let pair = PointerFrame::new(&g, &[10.0, 11.5], 1.0).unwrap();
        let gm = gram_matrix(&pair);
        assert_abs_diff_eq!(gm[(0, 1)], analytic_overlap(10.0, 11.5, 1.0, 40.0), epsilon = 1e-6);

        let triple = PointerFrame::evenly_spaced(&g, 5.0, 0.8, 3, 1.0).unwrap();
        let gm = gram_matrix(&triple);
        assert_abs_diff_eq!(gm[(0, 1)], gm[(1, 2)], epsilon = 1e-10);
        assert_eq!(gm[(0, 2)], gm[(2, 0)]);
    }

    #[test]
    fn effective_rank_of_identity() {
        for k in 1..6 {
            let id = DMatrix::<f64>::identity(k, k);
            assert_eq!(effective_rank(&id, 0.5).unwrap(), k);
            assert_eq!(effective_rank(&id, 1e-12).unwrap(), k);
        }
    }

    #[test]
    fn effective_rank_rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(effective_rank(&m, 1e-8), Err(Error::InvalidArgument(_))));
        assert!(matches!(effective_rank(&DMatrix::<f64>::identity(2, 2), 0.0), Err(Error::InvalidArgument(_))));
    }
}
