//! Dense square complex matrices.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A dense `n x n` complex matrix stored row-major, with all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if entries.len() != dim * dim {
            return Err(Error::NotSquare {
                rows: dim,
                cols: entries.len() / dim,
            });
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::NotSquare {
                rows: dim,
                cols: bad.len(),
            });
        }
        Self::new(dim, rows.concat())
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_diagonal(&vec![Complex64::new(1.0, 0.0); dim])
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Result<Self> {
        let dim = diag.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * dim + i] = d;
        }
        Self::new(dim, entries)
    }

    pub(crate) fn zeros_unchecked(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub(crate) fn from_entries_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros_unchecked(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.entries[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Self::from_entries_unchecked(n, out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖M M† − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            let ri = self.row(i);
            for j in 0..n {
                let rj = self.row(j);
                let mut dot: Complex64 = ri.iter().zip(rj).map(|(a, b)| a * b.conj()).sum();
                if i == j {
                    dot -= 1.0;
                }
                acc += dot.norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Determinant by LU factorization with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
                .expect("nonempty pivot range");
            let p = a[pivot * n + col];
            if p.norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                }
                det = -det;
            }
            det *= p;
            for row in col + 1..n {
                let factor = a[row * n + col] / p;
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                for k in col..n {
                    let v = a[col * n + k];
                    a[row * n + k] -= factor * v;
                }
            }
        }
        det
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            ComplexMatrix::new(0, vec![]),
            Err(Error::InvalidDimension(0))
        );
        assert!(matches!(
            ComplexMatrix::new(2, vec![c(0.0, 0.0); 3]),
            Err(Error::NotSquare { .. })
        ));
        assert_eq!(
            ComplexMatrix::new(1, vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn product_and_trace() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 1.0)],
            vec![c(2.0, 0.0), c(1.0, -1.0)],
        ])
        .unwrap();
        let i2 = ComplexMatrix::identity(2).unwrap();
        assert_eq!(a.matmul(&i2), a);
        let sq = a.matmul(&a);
        // [[1, i],[2, 1-i]]^2 = [[1+2i, i+i(1-i)], [2+2(1-i), 2i+(1-i)^2]]
        assert_eq!(sq[(0, 0)], c(1.0, 2.0));
        assert_eq!(sq[(0, 1)], c(1.0, 2.0));
        assert_eq!(sq[(1, 0)], c(4.0, -2.0));
        assert_eq!(sq[(1, 1)], c(0.0, 0.0));
        assert_eq!(a.trace(), c(2.0, -1.0));
    }

    #[test]
    fn determinant_small() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 3.0)],
        ])
        .unwrap();
        let d = a.determinant();
        assert!((d - c(0.0, -6.0)).norm() < 1e-14);
        let diag = ComplexMatrix::from_diagonal(&[c(0.0, 1.0), c(-1.0, 0.0)]).unwrap();
        assert!((diag.determinant() - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_is_unitary() {
        let i = ComplexMatrix::identity(5).unwrap();
        assert_eq!(i.unitarity_defect(), 0.0);
        let two = ComplexMatrix::from_diagonal(&[c(2.0, 0.0)]).unwrap();
        assert!((two.unitarity_defect() - 3.0).abs() < 1e-15);
    }
}
