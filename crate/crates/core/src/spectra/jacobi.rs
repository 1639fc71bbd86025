//! Jacobi eigensolver for dense real symmetric matrices.
//!
//! Rotations are scheduled in round-robin order: each round applies `n/2`
//! rotations on disjoint index pairs, first to the columns and then to every
//! column's rows. With column-major storage both passes touch memory
//! contiguously and parallelize without changing the arithmetic, so results
//! do not depend on the thread count.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Sweep until the off-diagonal Frobenius norm drops below this fraction of
/// the full Frobenius norm.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;
/// Below this dimension a round is too cheap to be worth splitting.
const PARALLEL_MIN_DIM: usize = 192;
const MIN_COLUMNS_PER_TASK: usize = 32;

fn parallel(n: usize) -> bool {
    n >= PARALLEL_MIN_DIM && rayon::current_num_threads() > 1
}

#[derive(Clone, Copy)]
struct Rotation {
    p: usize,
    q: usize,
    c: f64,
    s: f64,
    /// Exact new diagonal entries `(A_pp, A_qq)`.
    diag: (f64, f64),
}

/// Round-robin schedule: every unordered pair appears in exactly one round.
fn rounds(n: usize) -> Vec<Vec<(usize, usize)>> {
    let m = n + n % 2;
    let mut players: Vec<usize> = (0..m).collect();
    let mut out = Vec::with_capacity(m - 1);
    for _ in 0..m - 1 {
        let round = (0..m / 2)
            .map(|i| (players[i], players[m - 1 - i]))
            .filter(|&(x, y)| x < n && y < n)
            .map(|(x, y)| (x.min(y), x.max(y)))
            .collect();
        out.push(round);
        players[1..].rotate_right(1);
    }
    out
}

fn rotation(a: &[f64], n: usize, p: usize, q: usize) -> Option<Rotation> {
    let apq = a[p + q * n];
    let (app, aqq) = (a[p + p * n], a[q + q * n]);
    // entries already negligible against both diagonals are left alone
    if apq == 0.0 || apq.abs() < 1e-3 * f64::EPSILON * app.abs().min(aqq.abs()) {
        return None;
    }
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    Some(Rotation { p, q, c, s: t * c, diag: (app - t * apq, aqq + t * apq) })
}

/// `M <- M J`: rotates column pairs.
fn rotate_columns(m: &mut [f64], n: usize, rotations: &[Rotation]) {
    let mut columns: Vec<Option<&mut [f64]>> = m.chunks_mut(n).map(Some).collect();
    let mut jobs = Vec::with_capacity(rotations.len());
    for r in rotations {
        let cp = columns[r.p].take().expect("disjoint pairs");
        let cq = columns[r.q].take().expect("disjoint pairs");
        jobs.push((cp, cq, r.c, r.s));
    }
    let apply = |(cp, cq, c, s): &mut (&mut [f64], &mut [f64], f64, f64)| {
        for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
            let (u, w) = (*x, *y);
            *x = *c * u - *s * w;
            *y = *s * u + *c * w;
        }
    };
    if parallel(n) {
        jobs.par_iter_mut().with_min_len(MIN_COLUMNS_PER_TASK / 2).for_each(apply);
    } else {
        jobs.iter_mut().for_each(apply);
    }
}

/// `M <- Jᵀ M`: rotates row pairs inside every column.
fn rotate_rows(m: &mut [f64], n: usize, rotations: &[Rotation]) {
    let apply = |col: &mut [f64]| {
        for r in rotations {
            let (u, w) = (col[r.p], col[r.q]);
            col[r.p] = r.c * u - r.s * w;
            col[r.q] = r.s * u + r.c * w;
        }
    };
    if parallel(n) {
        m.par_chunks_mut(n).with_min_len(MIN_COLUMNS_PER_TASK).for_each(apply);
    } else {
        m.chunks_mut(n).for_each(apply);
    }
}

fn off_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[i + j * n] * a[i + j * n];
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues (unsorted) and column eigenvectors of a symmetric matrix.
///
/// Only the lower triangle is trusted; the input is symmetrized before
/// rotating.
pub(crate) fn jacobi_eigen(input: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = input.nrows();
    debug_assert_eq!(n, input.ncols());

    // column-major working copy: a[i + j * n] = A_ij
    let mut a = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            a[i + j * n] = if i >= j { input[(i, j)] } else { input[(j, i)] };
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i + i * n] = 1.0;
    }

    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || n < 2 {
        let diag = (0..n).map(|i| a[i + i * n]).collect();
        return Ok((diag, DMatrix::from_vec(n, n, v)));
    }
    let target = OFF_DIAGONAL_TOLERANCE * norm;
    let schedule = rounds(n);

    let mut off = off_norm(&a, n);
    let mut sweeps = 0;
    while off > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_norm: off });
        }
        sweeps += 1;

        for pairs in &schedule {
            let rotations: Vec<Rotation> = pairs.iter().filter_map(|&(p, q)| rotation(&a, n, p, q)).collect();
            if rotations.is_empty() {
                continue;
            }
            rotate_columns(&mut a, n, &rotations);
            rotate_rows(&mut a, n, &rotations);
            for r in &rotations {
                a[r.p + r.p * n] = r.diag.0;
                a[r.q + r.q * n] = r.diag.1;
                a[r.p + r.q * n] = 0.0;
                a[r.q + r.p * n] = 0.0;
            }
            rotate_columns(&mut v, n, &rotations);
        }

        let next = off_norm(&a, n);
        // rounding floor: a sweep that cannot halve an already tiny residual is done
        if next > 0.5 * off && next < 1e3 * f64::EPSILON * norm {
            break;
        }
        off = next;
    }

    let diag = (0..n).map(|i| a[i + i * n]).collect();
    Ok((diag, DMatrix::from_vec(n, n, v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_rotation() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (vals, vecs) = jacobi_eigen(&m).unwrap();
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[0] - 1.0).abs() < 1e-15);
        assert!((sorted[1] - 3.0).abs() < 1e-15);
        let recon = &vecs * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vals)) * vecs.transpose();
        assert!((recon - m).amax() < 1e-14);
    }

    #[test]
    fn diagonal_input_needs_no_sweeps() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0]));
        let (vals, vecs) = jacobi_eigen(&m).unwrap();
        assert_eq!(vals, vec![3.0, -1.0, 2.0]);
        assert_eq!(vecs, DMatrix::identity(3, 3));
    }

    #[test]
    fn schedule_covers_every_pair_once() {
        for n in [2usize, 3, 6, 7] {
            let mut seen = std::collections::BTreeSet::new();
            for round in rounds(n) {
                let mut used = std::collections::BTreeSet::new();
                for (p, q) in round {
                    assert!(p < q && q < n);
                    assert!(used.insert(p) && used.insert(q), "round reuses an index");
                    assert!(seen.insert((p, q)), "pair repeated");
                }
            }
            assert_eq!(seen.len(), n * (n - 1) / 2);
        }
    }

    #[test]
    fn zero_matrix() {
        let (vals, _) = jacobi_eigen(&DMatrix::zeros(4, 4)).unwrap();
        assert!(vals.iter().all(|&x| x == 0.0));
    }
}
