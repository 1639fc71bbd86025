//! Density matrices on the position grid and the Gaussian dephasing kernel
//! that suppresses their off-diagonal coherences.
//!
//! Matrices are stored in the discrete normalization `M_jk = h ρ(x_j, x_k)`
//! (`h` the grid spacing), so the matrix trace is the physical trace and its
//! eigenvalues are the occupation probabilities.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid_states::{Grid, PointerFrame};
use crate::spectra::{self, SpectralResult};

pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const PSD_TOLERANCE: f64 = 1e-10;

const IMAGE_CUTOFF: f64 = 1e-17;
const MAX_IMAGES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    PositionGrid(Grid),
    AbstractIndex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
    basis: Basis,
}

impl DensityMatrix {
    /// Validates squareness, Hermiticity and a real positive trace. Positive
    /// semidefiniteness is not checked here; see [`DensityMatrix::check_psd`].
    pub fn new(entries: DMatrix<Complex64>, basis: Basis) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(invalid(format!(
                "density matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if let Basis::PositionGrid(g) = basis {
            if g.n_points() != entries.nrows() {
                return Err(invalid(format!(
                    "grid has {} points but matrix dimension is {}",
                    g.n_points(),
                    entries.nrows()
                )));
            }
        }
        let scale = spectra::max_abs(&entries).max(1.0);
        let herm = spectra::hermiticity_error(&entries);
        if herm > HERMITIAN_TOLERANCE * scale {
            return Err(invalid(format!("density matrix is not Hermitian (error {herm:e})")));
        }
        let trace = entries.trace();
        if !(trace.re > 0.0) || trace.im.abs() > HERMITIAN_TOLERANCE * scale {
            return Err(invalid(format!("trace must be real and positive, got {trace}")));
        }
        Ok(Self { entries, basis })
    }

    /// Record-model style input: a real symmetric matrix on abstract indices,
    /// accepted only if positive semidefinite within [`PSD_TOLERANCE`].
    pub fn from_real_psd(m: &DMatrix<f64>) -> Result<Self> {
        let rho = Self::new(spectra::to_complex(m), Basis::AbstractIndex)?;
        rho.check_psd()?;
        Ok(rho)
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn normalized(mut self) -> Self {
        let t = self.trace().re;
        self.entries /= Complex64::new(t, 0.0);
        self
    }

    pub fn spectrum(&self) -> Result<SpectralResult> {
        spectra::eigh(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*self.spectrum()?.eigenvalues.last().expect("non-empty matrix"))
    }

    pub fn check_psd(&self) -> Result<()> {
        let min = self.min_eigenvalue()?;
        if min < -PSD_TOLERANCE {
            return Err(Error::PreconditionViolation(format!(
                "density matrix is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(())
    }
}

/// `ρ = Σ_i w_i |ψ_i><ψ_i|` over the members of a pointer frame.
pub fn density_from_mixture(frame: &PointerFrame, weights: &[f64]) -> Result<DensityMatrix> {
    if weights.len() != frame.len() {
        return Err(invalid(format!("{} weights for {} frame members", weights.len(), frame.len())));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(invalid(format!("weights must be non-negative, got {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("weights must sum to 1, got {total}")));
    }
    let n = frame.grid().n_points();
    let mut rho = DMatrix::<Complex64>::zeros(n, n);
    for (state, &w) in frame.states().iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let u = state.unit_vector();
        rho += &u * u.adjoint() * Complex64::new(w, 0.0);
    }
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::new(rho, Basis::PositionGrid(*frame.grid()))
}

/// Uniform density `ρ(x', x'') = const`, scaled to unit trace.
pub fn constant_rho(grid: &Grid) -> DensityMatrix {
    let n = grid.n_points();
    let entries = DMatrix::from_element(n, n, Complex64::new(1.0 / n as f64, 0.0));
    DensityMatrix { entries, basis: Basis::PositionGrid(*grid) }
}

/// Entrywise factor `K(x', x'') = θ(x' - x'') / θ(0)`, where
/// `θ(d) = Σ_m exp(-λ (d + mL)²)` is the Gaussian wrapped onto the ring.
///
/// `K` has unit diagonal and is positive semidefinite because the wrapped
/// Gaussian has strictly positive Fourier coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingKernel {
    strength_lambda: f64,
    grid: Grid,
}

impl DephasingKernel {
    /// Matches the constant-ρ example, where `λ = a²/2` with `a = 1`.
    pub const DEFAULT_STRENGTH: f64 = 0.5;

    pub fn new(grid: &Grid, strength_lambda: f64) -> Result<Self> {
        if !(strength_lambda.is_finite() && strength_lambda >= 0.0) {
            return Err(invalid(format!("dephasing strength must be >= 0, got {strength_lambda}")));
        }
        Ok(Self { strength_lambda, grid: *grid })
    }

    /// Kernel induced by pointer states of inverse width `a` (`λ = a²/2`).
    pub fn from_width(grid: &Grid, width_a: f64) -> Result<Self> {
        Self::new(grid, 0.5 * width_a * width_a)
    }

    pub fn strength(&self) -> f64 {
        self.strength_lambda
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn theta(&self, d: f64) -> f64 {
        let (lambda, length) = (self.strength_lambda, self.grid.length());
        let mut sum = (-lambda * d * d).exp();
        for m in 1..=MAX_IMAGES {
            let shift = m as f64 * length;
            let plus = (-lambda * (d + shift).powi(2)).exp();
            let minus = (-lambda * (d - shift).powi(2)).exp();
            sum += plus + minus;
            if plus < IMAGE_CUTOFF * sum && minus < IMAGE_CUTOFF * sum {
                break;
            }
        }
        sum
    }

    /// `K` as a function of the index offset `(i - j) mod n`.
    pub fn row(&self) -> Vec<f64> {
        let n = self.grid.n_points();
        if self.strength_lambda == 0.0 {
            return vec![1.0; n];
        }
        let h = self.grid.spacing();
        let origin = self.theta(0.0);
        let half: Vec<f64> = (0..=n / 2).map(|k| self.theta(k as f64 * h) / origin).collect();
        (0..n).map(|k| half[k.min(n - k)]).collect()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.grid.n_points();
        let row = self.row();
        DMatrix::from_fn(n, n, |i, j| row[(i + n - j) % n])
    }
}

/// `ρ_r(x', x'') = K(x', x'') ρ(x', x'')`.
pub fn dephase(rho: &DensityMatrix, kernel: &DephasingKernel) -> Result<DensityMatrix> {
    match rho.basis {
        Basis::PositionGrid(g) if g == kernel.grid => {}
        Basis::PositionGrid(_) => return Err(invalid("density matrix and kernel live on different grids")),
        Basis::AbstractIndex => return Err(invalid("dephasing needs a density matrix on a position grid")),
    }
    let n = rho.dim();
    let row = kernel.row();
    let entries = DMatrix::from_fn(n, n, |i, j| rho.entries[(i, j)] * row[(i + n - j) % n]);
    Ok(DensityMatrix { entries, basis: rho.basis })
}
