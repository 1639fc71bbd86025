use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::grid_states::Grid;

/// How localized a unit vector is, and whether it has definite parity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationReport {
    /// `Σ |v_k|⁴`, between `1/dim` (uniform modulus) and 1 (one site).
    pub ipr: f64,
    /// Weight on the best pair of Fourier modes `{+p, -p}`.
    pub top_plane_wave_weight: f64,
    /// The `|p|` achieving `top_plane_wave_weight`.
    pub dominant_frequency: usize,
    /// `<v, Rv>` under index reflection; `None` for even dimension.
    pub parity_score: Option<f64>,
    /// Circular standard deviation of `|v_k|²` around the ring, in grid
    /// length units when a grid is supplied and in index units otherwise.
    pub spatial_stddev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveWeight {
    pub weight: f64,
    pub frequency: usize,
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Inverse participation ratio of `v` after normalization.
pub fn ipr(v: &[Complex64]) -> f64 {
    let total = norm_sqr(v);
    v.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() / (total * total)
}

/// `|<e_p, v>|²` for every unitary DFT mode `e_p(k) = e^{2πipk/n}/√n`,
/// normalized to sum to 1.
pub fn plane_wave_spectrum(v: &[Complex64]) -> Vec<f64> {
    let n = v.len();
    let mut buf = v.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let total = norm_sqr(v) * n as f64;
    buf.iter().map(|z| z.norm_sqr() / total).collect()
}

/// Largest combined weight on a frequency pair `{p, n - p}`.
pub fn top_plane_wave_weight(v: &[Complex64]) -> PlaneWaveWeight {
    let n = v.len();
    let spectrum = plane_wave_spectrum(v);
    let mut best = PlaneWaveWeight { weight: -1.0, frequency: 0 };
    for p in 0..=n / 2 {
        let mirror = (n - p) % n;
        let weight = if mirror == p { spectrum[p] } else { spectrum[p] + spectrum[mirror] };
        if weight > best.weight {
            best = PlaneWaveWeight { weight, frequency: p };
        }
    }
    best
}

/// `<v, Rv> / <v, v>` with `R` reversing the index order.
///
/// Only odd dimensions have a middle index to reflect about.
pub fn parity_score(v: &[Complex64]) -> Result<f64> {
    let n = v.len();
    if n.is_multiple_of(2) {
        return Err(invalid(format!("parity needs an odd dimension, got {n}")));
    }
    let overlap: Complex64 = v.iter().zip(v.iter().rev()).map(|(a, b)| a.conj() * b).sum();
    Ok(overlap.re / norm_sqr(v))
}

/// Circular standard deviation `sqrt(-2 ln R) * n / 2π` in index units, with
/// `R = |Σ |v_k|² e^{2πik/n}|`.
pub fn circular_stddev(v: &[Complex64]) -> f64 {
    let n = v.len();
    let total = norm_sqr(v);
    let resultant: Complex64 = v
        .iter()
        .enumerate()
        .map(|(k, z)| Complex64::from_polar(z.norm_sqr() / total, 2.0 * PI * k as f64 / n as f64))
        .sum();
    let r = resultant.norm().clamp(f64::MIN_POSITIVE, 1.0);
    (-2.0 * r.ln()).sqrt() * n as f64 / (2.0 * PI)
}

pub fn localization(v: &[Complex64], grid: Option<&Grid>) -> LocalizationReport {
    let plane = top_plane_wave_weight(v);
    let scale = grid.map_or(1.0, |g| g.spacing());
    LocalizationReport {
        ipr: ipr(v),
        top_plane_wave_weight: plane.weight,
        dominant_frequency: plane.frequency,
        parity_score: parity_score(v).ok(),
        spatial_stddev: circular_stddev(v) * scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn basis_vector_has_unit_ipr() {
        let mut e = vec![0.0; 9];
        e[4] = 1.0;
        let report = localization(&real(&e), None);
        assert_eq!(report.ipr, 1.0);
        assert_eq!(report.parity_score, Some(1.0));
        assert!(report.spatial_stddev < 1e-6);
    }

    #[test]
    fn complex_plane_wave_has_ipr_one_over_n() {
        let n = 32;
        let p = 5;
        let v: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(1.0 / (n as f64).sqrt(), 2.0 * PI * (p * k) as f64 / n as f64))
            .collect();
        assert!((ipr(&v) - 1.0 / n as f64).abs() < 1e-15);
        let w = top_plane_wave_weight(&v);
        assert_eq!(w.frequency, p);
        assert!((w.weight - 1.0).abs() < 1e-13);
    }

    #[test]
    fn real_cosine_mode_ipr() {
        // Σ cos⁴ = 3n/8 for 0 < p < n/2, p ≠ n/4
        let n = 64;
        for p in [1usize, 3, 7, 20, 31] {
            let v: Vec<f64> = (0..n)
                .map(|k| (2.0 / n as f64).sqrt() * (2.0 * PI * (p * k) as f64 / n as f64).cos())
                .collect();
            let v = real(&v);
            assert!((ipr(&v) - 3.0 / (2.0 * n as f64)).abs() < 1e-14, "p={p}");
            let w = top_plane_wave_weight(&v);
            assert_eq!(w.frequency, p);
            assert!((w.weight - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn parity_examples() {
        let s = 0.5f64.sqrt();
        assert_eq!(parity_score(&real(&[s, 0.0, -s])).unwrap(), -1.0);
        for sv in [0.0f64, 0.196, -10.2, 3.0] {
            let norm = (2.0 + sv * sv).sqrt();
            let v = real(&[1.0 / norm, sv / norm, 1.0 / norm]);
            assert!((parity_score(&v).unwrap() - 1.0).abs() < 1e-15);
        }
        assert_eq!(parity_score(&real(&[1.0, 0.0, 0.0])).unwrap(), 0.0);
        assert!(parity_score(&real(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn stddev_grows_with_spread() {
        let narrow = real(&[0.0, 0.0, 0.6, 0.8, 0.0, 0.0, 0.0, 0.0]);
        let wide = real(&[0.35; 8]);
        assert!(circular_stddev(&narrow) < circular_stddev(&wide));
    }
}
