//! Hermitian eigendecomposition plus the localization and parity diagnostics
//! applied to the resulting eigenvectors.
//!
//! Real symmetric input goes straight to the cyclic Jacobi solver. Complex
//! Hermitian `A = X + iY` is diagonalized through its real embedding
//! `[[X, -Y], [Y, X]]`, whose spectrum is that of `A` with every eigenvalue
//! doubled; each doubled cluster is folded back into complex eigenvectors.

mod diagnostics;
mod jacobi;
mod records;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Result};

pub use diagnostics::{
    circular_stddev, ipr, localization, parity_score, plane_wave_spectrum, top_plane_wave_weight,
    LocalizationReport, PlaneWaveWeight,
};
pub use jacobi::OFF_DIAGONAL_TOLERANCE;
pub use records::{
    oracle_2x2, oracle_3x3, oracle_3x3_middle_components, random_reflection_symmetric, swap_parity,
    RecordModel2, RecordModel3,
};

/// Entrywise tolerance (relative to the largest entry, floored at 1) for
/// accepting a matrix as Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Eigenvalues sorted descending, with unit eigenvectors in matching columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl SpectralResult {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, i: usize) -> DVector<Complex64> {
        self.eigenvectors.column(i).into_owned()
    }

    /// Real parts of eigenvector `i`; exact for real symmetric input.
    pub fn real_vector(&self, i: usize) -> DVector<f64> {
        self.eigenvectors.column(i).map(|z| z.re)
    }

    /// `max_i ||A v_i - λ_i v_i||`.
    pub fn max_residual(&self, a: &DMatrix<Complex64>) -> f64 {
        (0..self.dim())
            .map(|i| {
                let v = self.vector(i);
                (a * &v - v * Complex64::new(self.eigenvalues[i], 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max_ij |<v_i, v_j> - δ_ij|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        let n = gram.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest `|A_ij - conj(A_ji)|`.
pub fn hermiticity_error(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_hermitian(m: &DMatrix<Complex64>) -> Result<()> {
    if !m.is_square() {
        return Err(invalid(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(invalid("matrix has non-finite entries"));
    }
    let err = hermiticity_error(m);
    if err > HERMITIAN_TOLERANCE * max_abs(m).max(1.0) {
        return Err(invalid(format!("matrix is not Hermitian (max |A - A†| = {err:e})")));
    }
    Ok(())
}

/// Rotates every column so its largest-magnitude entry is real and positive.
/// Ties within a relative 1e-10 go to the lowest index.
fn canonicalize_phases(vectors: &mut DMatrix<Complex64>) {
    for mut col in vectors.column_iter_mut() {
        let biggest = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if biggest == 0.0 {
            continue;
        }
        let pivot = col
            .iter()
            .position(|z| z.norm() >= biggest * (1.0 - 1e-10))
            .unwrap_or(0);
        let phase = col[pivot].conj() / col[pivot].norm();
        for z in col.iter_mut() {
            *z *= phase;
        }
        col[pivot] = Complex64::new(col[pivot].norm(), 0.0);
    }
}

fn assemble(mut pairs: Vec<(f64, DVector<Complex64>)>) -> SpectralResult {
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let n = pairs.first().map_or(0, |p| p.1.len());
    let mut eigenvectors = DMatrix::zeros(n, pairs.len());
    let mut eigenvalues = Vec::with_capacity(pairs.len());
    for (i, (val, vec)) in pairs.into_iter().enumerate() {
        eigenvalues.push(val);
        eigenvectors.set_column(i, &vec);
    }
    canonicalize_phases(&mut eigenvectors);
    SpectralResult { eigenvalues, eigenvectors }
}

/// Diagonalizes a real symmetric matrix.
pub fn eigh_real(a: &DMatrix<f64>) -> Result<SpectralResult> {
    check_hermitian(&to_complex(a))?;
    let (vals, vecs) = jacobi::jacobi_eigen(a)?;
    let pairs = vals
        .into_iter()
        .enumerate()
        .map(|(i, val)| (val, vecs.column(i).map(|x| Complex64::new(x, 0.0))))
        .collect();
    Ok(assemble(pairs))
}

/// Diagonalizes a Hermitian matrix.
///
/// Output is deterministic: eigenvalues descending, each eigenvector with its
/// largest component real-positive.
pub fn eigh(a: &DMatrix<Complex64>) -> Result<SpectralResult> {
    check_hermitian(a)?;
    if a.iter().all(|z| z.im == 0.0) {
        return eigh_real(&a.map(|z| z.re));
    }

    let n = a.nrows();
    let mut embedded = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for i in 0..n {
            // symmetrize so the embedding is exactly symmetric
            let z = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            embedded[(i, j)] = z.re;
            embedded[(i + n, j + n)] = z.re;
            embedded[(i + n, j)] = z.im;
            embedded[(i, j + n)] = -z.im;
        }
    }
    let (vals, vecs) = jacobi::jacobi_eigen(&embedded)?;
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&x, &y| vals[y].total_cmp(&vals[x]));

    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let cluster_gap = 1e-12 * scale;

    let mut pairs = Vec::with_capacity(n);
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && vals[order[end - 1]] - vals[order[end]] <= cluster_gap {
            end += 1;
        }
        let candidates: Vec<DVector<Complex64>> = order[start..end]
            .iter()
            .map(|&c| {
                DVector::from_iterator(
                    n,
                    (0..n).map(|k| Complex64::new(vecs[(k, c)], vecs[(k + n, c)])),
                )
            })
            .collect();
        let wanted = (end - start).div_ceil(2);
        for z in pivoted_gram_schmidt(candidates, wanted) {
            let lambda = (z.adjoint() * a * &z)[(0, 0)].re;
            pairs.push((lambda, z));
        }
        start = end;
    }
    pairs.truncate(n);
    Ok(assemble(pairs))
}

/// Picks `count` orthonormal vectors from `candidates`, always taking the
/// candidate with the largest component outside the span chosen so far.
fn pivoted_gram_schmidt(mut candidates: Vec<DVector<Complex64>>, count: usize) -> Vec<DVector<Complex64>> {
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(count);
    while basis.len() < count && !candidates.is_empty() {
        let (best, _) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        let mut v = candidates.swap_remove(best);
        let norm = v.norm();
        if norm == 0.0 {
            break;
        }
        v /= Complex64::new(norm, 0.0);
        for c in candidates.iter_mut() {
            // two passes keep the projection clean
            for _ in 0..2 {
                let coeff = v.dotc(c);
                *c -= &v * coeff;
            }
        }
        basis.push(v);
    }
    basis
}

/// Re-diagonalizes every cluster of near-equal eigenvalues using a Hermitian
/// `observable` that commutes with `a`.
///
/// Eigenvalues closer than `relative_gap` times the largest `|λ|` form one
/// cluster. Inside a cluster any orthonormal basis is an equally valid
/// eigenbasis of `a`, so the choice is fixed by the eigenvectors of the
/// observable restricted to that subspace. Reported eigenvalues are the
/// Rayleigh quotients of `a` on the new vectors.
pub fn resolve_clusters(
    spectrum: &SpectralResult,
    a: &DMatrix<Complex64>,
    observable: &DMatrix<Complex64>,
    relative_gap: f64,
) -> Result<SpectralResult> {
    check_hermitian(observable)?;
    let n = spectrum.dim();
    if observable.nrows() != n || a.nrows() != n {
        return Err(invalid("observable, matrix and spectrum dimensions differ"));
    }
    let scale = spectrum
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let gap = relative_gap * scale;

    let mut pairs = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && spectrum.eigenvalues[end - 1] - spectrum.eigenvalues[end] <= gap {
            end += 1;
        }
        if end - start == 1 {
            pairs.push((spectrum.eigenvalues[start], spectrum.vector(start)));
        } else {
            let block = spectrum.eigenvectors.columns(start, end - start).into_owned();
            let restricted = block.adjoint() * observable * &block;
            let restricted = (&restricted + restricted.adjoint()) * Complex64::new(0.5, 0.0);
            let inner = eigh(&restricted)?;
            let rotated = &block * &inner.eigenvectors;
            for col in rotated.column_iter() {
                let mut v = col.into_owned();
                let norm = v.norm();
                v /= Complex64::new(norm, 0.0);
                let lambda = (v.adjoint() * a * &v)[(0, 0)].re;
                pairs.push((lambda, v));
            }
        }
        start = end;
    }
    Ok(assemble(pairs))
}

/// Hermitian `e^{iφ} T + e^{-iφ} T†` built from the cyclic shift
/// `(T v)_k = v_{k-1}` with `φ = π / (2n)`.
///
/// Every discrete Fourier mode `e^{2πipk/n}` is an eigenvector, with
/// eigenvalue `2 cos(2π(p - 1/4)/n)`; these are distinct for all `p`, so the
/// observable singles out one Fourier mode inside any cluster of a circulant
/// matrix.
pub fn twisted_shift_observable(n: usize) -> DMatrix<Complex64> {
    let phi = std::f64::consts::PI / (2.0 * n as f64);
    let forward = Complex64::from_polar(1.0, phi);
    let mut h = DMatrix::zeros(n, n);
    for k in 0..n {
        let next = (k + 1) % n;
        h[(next, k)] += forward;
        h[(k, next)] += forward.conj();
    }
    h
}
