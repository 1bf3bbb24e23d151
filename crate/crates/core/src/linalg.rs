//! Small dense complex helpers for cut-rate evaluation.

use num_complex::Complex64;

/// Dense complex matrix in row-major storage.
#[derive(Clone, Debug)]
pub(crate) struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    /// Forms `I + G G^H`, which is Hermitian positive definite.
    pub fn gram_plus_identity(&self) -> CMatrix {
        let n = self.rows;
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.cols {
                    acc += self.at(i, k) * self.at(j, k).conj();
                }
                if i == j {
                    // exact real diagonal
                    acc = Complex64::new(1.0 + acc.re, 0.0);
                }
                out.set(i, j, acc);
                out.set(j, i, acc.conj());
            }
        }
        out
    }
}

/// log2 det of a Hermitian positive definite matrix through its Cholesky
/// factor: `det = prod |L_ii|^2`. Returns `None` if a pivot is not positive.
pub(crate) fn hermitian_log2_det(m: &CMatrix) -> Option<f64> {
    let n = m.rows;
    debug_assert_eq!(n, m.cols);
    let mut l = CMatrix::zeros(n, n);
    let mut log_det = 0.0;
    for j in 0..n {
        let mut d = m.at(j, j).re;
        for k in 0..j {
            d -= l.at(j, k).norm_sqr();
        }
        if !d.is_finite() || d <= 0.0 {
            return None;
        }
        let ljj = d.sqrt();
        l.set(j, j, Complex64::new(ljj, 0.0));
        log_det += d.log2();
        for i in (j + 1)..n {
            let mut s = m.at(i, j);
            for k in 0..j {
                s -= l.at(i, k) * l.at(j, k).conj();
            }
            l.set(i, j, s / ljj);
        }
    }
    Some(log_det)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn empty_matrix_has_zero_log_det() {
        let g = CMatrix::zeros(0, 3);
        assert_eq!(hermitian_log2_det(&g.gram_plus_identity()), Some(0.0));
    }

    #[test]
    fn scalar_channel() {
        let mut g = CMatrix::zeros(1, 2);
        g.set(0, 0, c(0.0, 1.0));
        g.set(0, 1, c(1.0, 1.0));
        // 1 + |i|^2 + |1+i|^2 = 4
        let v = hermitian_log2_det(&g.gram_plus_identity()).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_matches_closed_form() {
        let mut g = CMatrix::zeros(2, 2);
        g.set(0, 0, c(0.3, -0.2));
        g.set(0, 1, c(1.1, 0.4));
        g.set(1, 0, c(-0.7, 0.5));
        g.set(1, 1, c(0.2, 0.9));
        let m = g.gram_plus_identity();
        let det = (m.at(0, 0) * m.at(1, 1) - m.at(0, 1) * m.at(1, 0)).re;
        let v = hermitian_log2_det(&m).unwrap();
        assert!((v - det.log2()).abs() < 1e-13);
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut m = CMatrix::zeros(2, 2);
        m.set(0, 0, c(1.0, 0.0));
        m.set(0, 1, c(2.0, 0.0));
        m.set(1, 0, c(2.0, 0.0));
        m.set(1, 1, c(1.0, 0.0));
        assert!(hermitian_log2_det(&m).is_none());
    }
}
