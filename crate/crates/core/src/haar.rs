//! Ginibre and Haar-unitary sampling.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::rng::RngStream;

/// Unitarity tolerance per unit of dimension, on `‖M M† − I‖_F`.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;
/// Tolerance on `| |det M| − 1 |`.
pub const DETERMINANT_TOLERANCE: f64 = 1e-8;

const RANK_FLOOR: f64 = 1e-300;
const MAX_ATTEMPTS: usize = 3;

/// A complex matrix certified unitary at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
    unitarity_defect: f64,
    provenance: Option<RngStream>,
}

impl UnitaryMatrix {
    /// Certifies `matrix`, refusing it if `‖M M† − I‖_F > 1e-10 n` or
    /// `|det M|` is off the unit circle by more than `1e-8`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n = matrix.dim() as f64;
        let tolerance = UNITARITY_TOLERANCE * n;
        let defect = matrix.unitarity_defect();
        if !(defect <= tolerance) {
            return Err(Error::NotUnitary { defect, tolerance });
        }
        let det_defect = (matrix.determinant().norm() - 1.0).abs();
        if !(det_defect <= DETERMINANT_TOLERANCE) {
            return Err(Error::NotUnitary {
                defect: det_defect,
                tolerance: DETERMINANT_TOLERANCE,
            });
        }
        Ok(Self {
            matrix,
            unitarity_defect: defect,
            provenance: None,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(n)?)
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_diagonal(diag)?)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.unitarity_defect
    }

    /// The stream this matrix was drawn from, if it was sampled.
    pub fn provenance(&self) -> Option<RngStream> {
        self.provenance
    }

    /// Product of two unitaries, re-certified.
    pub fn compose(&self, rhs: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        UnitaryMatrix::new(self.matrix.matmul(&rhs.matrix))
    }
}

fn draw_ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let entries = (0..n * n)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            Complex64::new(x * FRAC_1_SQRT_2, y * FRAC_1_SQRT_2)
        })
        .collect();
    ComplexMatrix::from_entries_unchecked(n, entries)
}

/// An `n x n` matrix of independent complex Gaussians with real and
/// imaginary parts each `N(0, 1/2)`.
pub fn sample_ginibre(n: usize, stream: RngStream) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    Ok(draw_ginibre(n, &mut stream.rng()))
}

/// Haar-distributed unitary via Householder QR of a Ginibre sample, with the
/// columns of `Q` rotated by the phases of `diag(R)`.
pub fn haar_unitary(n: usize, stream: RngStream) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let mut rng = stream.rng();
    for _ in 0..MAX_ATTEMPTS {
        let g = draw_ginibre(n, &mut rng);
        if let Some(q) = phase_corrected_q(g) {
            let mut u = UnitaryMatrix::new(q)?;
            u.provenance = Some(stream);
            return Ok(u);
        }
    }
    Err(Error::RankDeficient {
        attempts: MAX_ATTEMPTS,
    })
}

/// Returns `Q Λ` for `A = Q R`, `Λ = diag(R_jj / |R_jj|)`, or `None` when
/// some `|R_jj|` falls below the rank floor.
fn phase_corrected_q(a: ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.dim();
    let mut a = a;
    let mut reflectors: Vec<(Vec<Complex64>, f64)> = Vec::with_capacity(n);
    let mut phases = Vec::with_capacity(n);

    for k in 0..n {
        let norm = (k..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm < RANK_FLOOR {
            return None;
        }
        let x0 = a[(k, k)];
        let unit = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -unit * norm;
        let mut v: Vec<Complex64> = (k..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();

        a[(k, k)] = alpha;
        for i in k + 1..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
        for j in k + 1..n {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * a[(k + i, j)])
                .sum();
            let scale = s * (2.0 / vnorm2);
            for (i, vi) in v.iter().enumerate() {
                a[(k + i, j)] -= scale * vi;
            }
        }
        phases.push(alpha / norm);
        reflectors.push((v, vnorm2));
    }

    // Q = H_0 H_1 ... H_{n-1}, accumulated right to left.
    let mut q = ComplexMatrix::identity(n).ok()?;
    for (k, (v, vnorm2)) in reflectors.iter().enumerate().rev() {
        for j in k..n {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * q[(k + i, j)])
                .sum();
            let scale = s * (2.0 / vnorm2);
            for (i, vi) in v.iter().enumerate() {
                q[(k + i, j)] -= scale * vi;
            }
        }
    }
    for i in 0..n {
        for (j, phase) in phases.iter().enumerate() {
            q[(i, j)] *= phase;
        }
    }
    Some(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dimension_rejected() {
        assert_eq!(
            sample_ginibre(0, RngStream::new(1, 0)),
            Err(Error::InvalidDimension(0))
        );
        assert_eq!(
            haar_unitary(0, RngStream::new(1, 0)),
            Err(Error::InvalidDimension(0))
        );
    }

    #[test]
    fn ginibre_second_moment() {
        let draws = 100_000;
        let values: Vec<f64> = (0..draws)
            .map(|i| sample_ginibre(1, RngStream::new(11, i)).unwrap()[(0, 0)].norm_sqr())
            .collect();
        let mean = values.iter().sum::<f64>() / draws as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        assert!(
            (mean - 1.0).abs() <= 4.0 * se,
            "mean |z|^2 = {mean}, se = {se}"
        );
    }

    #[test]
    fn ginibre_is_deterministic_per_stream() {
        let a = sample_ginibre(3, RngStream::new(5, 0)).unwrap();
        let b = sample_ginibre(3, RngStream::new(5, 0)).unwrap();
        assert_eq!(a, b);
        let c = sample_ginibre(2, RngStream::new(5, 0)).unwrap();
        let d = sample_ginibre(2, RngStream::new(5, 1)).unwrap();
        assert_ne!(c, d);
    }

    #[test]
    fn one_by_one_is_on_circle() {
        for i in 0..200 {
            let u = haar_unitary(1, RngStream::new(3, i)).unwrap();
            assert!((u.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let m = ComplexMatrix::from_diagonal(&[Complex64::new(1.0, 0.0), Complex64::new(1.1, 0.0)])
            .unwrap();
        assert!(matches!(
            UnitaryMatrix::new(m),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn sampled_matrices_are_unitary_and_tagged() {
        for n in [2, 5, 17] {
            let u = haar_unitary(n, RngStream::new(9, n as u64)).unwrap();
            assert!(u.unitarity_defect() <= 1e-10 * n as f64);
            assert!((u.matrix().determinant().norm() - 1.0).abs() < 1e-8);
            assert_eq!(u.provenance(), Some(RngStream::new(9, n as u64)));
        }
    }

    #[test]
    fn qr_reproduces_input() {
        // Q Λ times Λ^{-1} R must rebuild the Ginibre sample: check via
        // (QΛ)† A being upper triangular with positive real diagonal.
        let g = sample_ginibre(6, RngStream::new(21, 0)).unwrap();
        let q = phase_corrected_q(g.clone()).unwrap();
        let r = q.adjoint().matmul(&g);
        for i in 0..6 {
            assert!(r[(i, i)].re > 0.0);
            assert!(r[(i, i)].im.abs() < 1e-12);
            for j in 0..i {
                assert!(r[(i, j)].norm() < 1e-12, "r[{i},{j}] = {}", r[(i, j)]);
            }
        }
    }
}
