//! Eigenvalues of unitary matrices.
//!
//! Householder reduction to upper Hessenberg form followed by single-shift
//! complex QR iteration with Wilkinson shifts. Unitary matrices are normal,
//! so the converged triangular factor is diagonal up to roundoff and only
//! the active window needs updating.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::haar::UnitaryMatrix;
use crate::matrix::ComplexMatrix;

/// Total QR sweeps allowed per unit of dimension.
pub const SWEEPS_PER_DIM: usize = 50;
/// Subdiagonal entries below this multiple of `‖M‖_F` are deflated.
pub const DEFLATION_THRESHOLD: f64 = 1e-13;
/// Allowed deviation of a computed eigenvalue's modulus from 1.
pub const MODULUS_TOLERANCE: f64 = 1e-8;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Reduces `a` to upper Hessenberg form by unitary similarity.
pub(crate) fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let unit = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -unit * norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;

        // Left: rows k+1.., columns k..
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
        for j in k + 1..n {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(l, vl)| vl.conj() * h[(k + 1 + l, j)])
                .sum();
            let scale = s * tau;
            for (l, vl) in v.iter().enumerate() {
                h[(k + 1 + l, j)] -= scale * vl;
            }
        }
        // Right: all rows, columns k+1..
        for i in 0..n {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(l, vl)| h[(i, k + 1 + l)] * vl)
                .sum();
            let scale = s * tau;
            for (l, vl) in v.iter().enumerate() {
                h[(i, k + 1 + l)] -= scale * vl.conj();
            }
        }
    }
    h
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit shifted QR sweep on the window `lo..=hi` of Hessenberg `h`.
fn qr_sweep(h: &mut ComplexMatrix, lo: usize, hi: usize, shift: Complex64) {
    for k in lo..=hi {
        h[(k, k)] -= shift;
    }
    let mut rotations: Vec<(Complex64, Complex64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = a.norm().hypot(b.norm());
        let (c, s) = if r == 0.0 {
            (Complex64::new(1.0, 0.0), ZERO)
        } else {
            (a / r, b / r)
        };
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = c.conj() * x + s.conj() * y;
            h[(k + 1, j)] = -s * x + c * y;
        }
        h[(k + 1, k)] = ZERO;
        rotations.push((c, s));
    }
    for (offset, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + offset;
        for i in lo..=(k + 1).min(hi) {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s;
            h[(i, k + 1)] = -x * s.conj() + y * c.conj();
        }
    }
    for k in lo..=hi {
        h[(k, k)] += shift;
    }
}

/// Eigenvalues of a general square matrix from its Schur diagonal, in
/// deflation order.
pub fn schur_eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = a.dim();
    let mut h = hessenberg(a);
    let threshold = DEFLATION_THRESHOLD * a.frobenius_norm();
    let cap = SWEEPS_PER_DIM * n;
    let mut sweeps = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;

    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            if h[(lo, lo - 1)].norm() <= threshold {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if sweeps >= cap {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        since_deflation += 1;
        let shift = if since_deflation.is_multiple_of(10) {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        qr_sweep(&mut h, lo, hi, shift);
    }
    Ok((0..n).map(|i| h[(i, i)]).collect())
}

/// Eigenvalues of a unitary matrix, each checked to lie on the unit circle.
pub fn eigenvalues(m: &UnitaryMatrix) -> Result<Vec<Complex64>> {
    let values = schur_eigenvalues(m.matrix())?;
    if let Some(bad) = values
        .iter()
        .find(|z| (z.norm() - 1.0).abs() > MODULUS_TOLERANCE)
    {
        return Err(Error::OffUnitCircle {
            modulus: bad.norm(),
            tolerance: MODULUS_TOLERANCE,
        });
    }
    Ok(values)
}

/// Maps an angle to `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Eigenphases of `m` in `[0, 2π)`, ascending.
pub fn eigenphases(m: &UnitaryMatrix) -> Result<Vec<f64>> {
    let mut phases: Vec<f64> = eigenvalues(m)?
        .iter()
        .map(|z| wrap_angle(z.arg()))
        .collect();
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::haar_unitary;
    use crate::rng::RngStream;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn diagonal_phases() {
        let m = UnitaryMatrix::from_diagonal(&[
            Complex64::from_polar(1.0, FRAC_PI_2),
            Complex64::new(-1.0, 0.0),
        ])
        .unwrap();
        let p = eigenphases(&m).unwrap();
        assert!((p[0] - FRAC_PI_2).abs() < 1e-15);
        assert!((p[1] - PI).abs() < 1e-15);
    }

    #[test]
    fn identity_phases() {
        let p = eigenphases(&UnitaryMatrix::identity(3).unwrap()).unwrap();
        assert_eq!(p, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn hessenberg_preserves_similarity() {
        let u = haar_unitary(7, RngStream::new(4, 0)).unwrap();
        let h = hessenberg(u.matrix());
        for i in 0..7usize {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(h[(i, j)], ZERO);
            }
        }
        assert!((h.trace() - u.matrix().trace()).norm() < 1e-12);
        assert!((h.frobenius_norm() - u.matrix().frobenius_norm()).abs() < 1e-12);
    }

    #[test]
    fn non_normal_matrix_eigenvalues() {
        // Upper triangular with known diagonal, scrambled by a unitary similarity.
        let u = haar_unitary(4, RngStream::new(8, 0)).unwrap();
        let mut t = ComplexMatrix::identity(4).unwrap();
        let diag = [1.0, -2.0, 3.0, 0.5];
        for i in 0..4 {
            t[(i, i)] = Complex64::new(diag[i], 0.0);
            for j in i + 1..4 {
                t[(i, j)] = Complex64::new(0.3 * (i + j) as f64, 0.1);
            }
        }
        let a = u.matrix().matmul(&t).matmul(&u.matrix().adjoint());
        let mut ev: Vec<f64> = schur_eigenvalues(&a)
            .unwrap()
            .iter()
            .map(|z| z.re)
            .collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([-2.0, 0.5, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_angle(-0.0), 0.0);
        assert!((wrap_angle(-FRAC_PI_2) - 1.5 * PI).abs() < 1e-15);
        assert!(wrap_angle(TAU) < TAU);
        assert!(wrap_angle(-1e-18) < TAU);
    }
}
