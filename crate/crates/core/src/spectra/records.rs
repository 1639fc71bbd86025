//! Small record-state models with closed-form spectra, and random matrices
//! with the reflection symmetry `M_ij = M_{-i,-j}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{canonicalize_phases, SpectralResult};
use crate::error::{invalid, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two-well record: `[[1 + b, a], [a, 1 - b]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordModel2 {
    pub a: f64,
    pub b: f64,
}

impl RecordModel2 {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0 + self.b, self.a, self.a, 1.0 - self.b])
    }

    /// Mixing angle `θ = atan2(a, b) / 2` of the upper eigenvector.
    pub fn mixing_angle(&self) -> f64 {
        0.5 * self.a.atan2(self.b)
    }
}

/// Three-site chain `[[1, a, 0], [a, c, a], [0, a, 1 + ε]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordModel3 {
    pub a: f64,
    pub c: f64,
    pub epsilon: f64,
}

impl RecordModel3 {
    pub fn new(a: f64, c: f64, epsilon: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid(format!("coupling a must be positive, got {a}")));
        }
        if !(c.is_finite() && epsilon.is_finite()) {
            return Err(invalid("c and epsilon must be finite"));
        }
        Ok(Self { a, c, epsilon })
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let (a, c) = (self.a, self.c);
        DMatrix::from_row_slice(3, 3, &[1.0, a, 0.0, a, c, a, 0.0, a, 1.0 + self.epsilon])
    }
}

fn from_real_pairs(pairs: Vec<(f64, Vec<f64>)>) -> SpectralResult {
    let n = pairs.len();
    let mut eigenvectors = DMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (i, (val, vec)) in pairs.into_iter().enumerate() {
        let norm = vec.iter().map(|x| x * x).sum::<f64>().sqrt();
        eigenvalues.push(val);
        eigenvectors.set_column(i, &DVector::from_iterator(n, vec.iter().map(|x| Complex64::new(x / norm, 0.0))));
    }
    canonicalize_phases(&mut eigenvectors);
    SpectralResult { eigenvalues, eigenvectors }
}

/// Exact eigenpairs of the two-well record matrix: `1 ± sqrt(a² + b²)` with
/// eigenvectors `(cos θ, sin θ)` and `(-sin θ, cos θ)`.
pub fn oracle_2x2(model: &RecordModel2) -> Result<SpectralResult> {
    let RecordModel2 { a, b } = *model;
    if a == 0.0 && b == 0.0 {
        return Err(Error::DegenerateInput("a = b = 0 leaves the eigenbasis undetermined".into()));
    }
    let radius = a.hypot(b);
    let (sin, cos) = model.mixing_angle().sin_cos();
    Ok(from_real_pairs(vec![
        (1.0 + radius, vec![cos, sin]),
        (1.0 - radius, vec![-sin, cos]),
    ]))
}

/// Exact eigenpairs of the symmetric three-site chain (`ε = 0`).
///
/// Eigenvalues `(1 + c + r)/2 ≥ 1 ≥ (1 + c - r)/2` with
/// `r = sqrt((1 - c)² + 8a²)`; eigenvectors `(1, s+, 1)`, `(1, 0, -1)` and
/// `(1, s-, 1)` with `s± = 4a / (1 - c ± r)`.
pub fn oracle_3x3(a: f64, c: f64) -> Result<SpectralResult> {
    if !(a.is_finite() && a > 0.0) {
        return Err(invalid(format!("coupling a must be positive, got {a}")));
    }
    if !c.is_finite() {
        return Err(invalid("c must be finite"));
    }
    let r = ((1.0 - c).powi(2) + 8.0 * a * a).sqrt();
    let s_plus = 4.0 * a / (1.0 - c + r);
    let s_minus = 4.0 * a / (1.0 - c - r);
    Ok(from_real_pairs(vec![
        (0.5 * (1.0 + c + r), vec![1.0, s_plus, 1.0]),
        (1.0, vec![1.0, 0.0, -1.0]),
        (0.5 * (1.0 + c - r), vec![1.0, s_minus, 1.0]),
    ]))
}

/// `(s+, s-)` middle components of the symmetric eigenvectors of
/// [`oracle_3x3`] before normalization.
pub fn oracle_3x3_middle_components(a: f64, c: f64) -> (f64, f64) {
    let r = ((1.0 - c).powi(2) + 8.0 * a * a).sqrt();
    (4.0 * a / (1.0 - c + r), 4.0 * a / (1.0 - c - r))
}

/// Exchange parity `<v, Sv> / <v, v>` of a two-well state, `S` swapping the
/// wells.
pub fn swap_parity(v: &[Complex64]) -> Result<f64> {
    if v.len() != 2 {
        return Err(invalid(format!("swap parity applies to two-well states, got dimension {}", v.len())));
    }
    let overlap = v[0].conj() * v[1] + v[1].conj() * v[0];
    Ok(overlap.re / (v[0].norm_sqr() + v[1].norm_sqr()))
}

/// Random real symmetric matrix with `M_ij = M_{R i, R j}`, `R i = dim-1-i`.
///
/// One uniform(-1, 1) draw per orbit of `{transpose, reflection}`, visited in
/// row-major order over the upper triangle; exact zeros are redrawn.
pub fn random_reflection_symmetric(dim: usize, seed: u64) -> Result<DMatrix<f64>> {
    if dim.is_multiple_of(2) || dim < 3 {
        return Err(invalid(format!("reflection-symmetric matrices need odd dim >= 3, got {dim}")));
    }
    let reflect = |i: usize| dim - 1 - i;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let (ri, rj) = (reflect(i), reflect(j));
            let image = (ri.min(rj), ri.max(rj));
            if image < (i, j) {
                // orbit already drawn
                m[(i, j)] = m[image];
            } else {
                let mut x = 0.0;
                while x == 0.0 {
                    x = rng.gen_range(-1.0..1.0);
                }
                m[(i, j)] = x;
            }
            m[(j, i)] = m[(i, j)];
        }
    }
    Ok(m)
}
