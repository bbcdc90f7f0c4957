//! Matrix-free Hermitian operator interface and the small complex-vector
//! kernels shared by the eigensolver and the time propagator.

use num_complex::Complex64;

/// Hermitian linear operator acting on complex vectors.
///
/// Implementations must be reentrant: `apply_into` may be called from many
/// threads concurrently on distinct vectors.
pub trait HermitianOp: Sync {
    fn dim(&self) -> usize;

    /// Writes `H v` into `out`. Both slices have length [`Self::dim`].
    fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]);

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::ZERO; self.dim()];
        self.apply_into(v, &mut out);
        out
    }
}

/// <x|y> with the conjugate on the left argument.
pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// y += alpha x
pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [Complex64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

/// Assembles the dense matrix of an operator column by column.
pub fn dense_matrix(op: &dyn HermitianOp) -> faer::Mat<Complex64> {
    let n = op.dim();
    let mut mat = faer::Mat::zeros(n, n);
    let mut e = vec![Complex64::ZERO; n];
    let mut col = vec![Complex64::ZERO; n];
    for j in 0..n {
        e[j] = Complex64::ONE;
        op.apply_into(&e, &mut col);
        e[j] = Complex64::ZERO;
        for i in 0..n {
            mat[(i, j)] = col[i];
        }
    }
    mat
}

/// Hermiticity defect `max_ij |A_ij - conj(A_ji)|` of an assembled matrix.
pub fn hermiticity_defect(mat: &faer::Mat<Complex64>) -> f64 {
    let n = mat.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    struct Diag(Vec<f64>);
    impl HermitianOp for Diag {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
            for ((o, d), x) in out.iter_mut().zip(&self.0).zip(v) {
                *o = d * x;
            }
        }
    }

    #[test]
    fn dense_assembly_reproduces_diagonal() {
        let op = Diag(vec![1.0, 2.0, 3.0]);
        let m = dense_matrix(&op);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { (i + 1) as f64 } else { 0.0 };
                assert_abs_diff_eq!(m[(i, j)].re, expect);
                assert_abs_diff_eq!(m[(i, j)].im, 0.0);
            }
        }
        assert_abs_diff_eq!(hermiticity_defect(&m), 0.0);
    }

    #[test]
    fn dot_conjugates_left() {
        let x = vec![Complex64::new(0.0, 1.0)];
        let y = vec![Complex64::new(0.0, 1.0)];
        assert_abs_diff_eq!(dot(&x, &y).re, 1.0);
        assert_abs_diff_eq!(dot(&x, &y).im, 0.0);
    }
}
