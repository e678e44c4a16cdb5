use nalgebra::DMatrix;

use crate::C64;

/// Compressed-row view of an operator for the inner loops of the
/// integrators. Dense matrices referenced here are column-major with
/// square dimension `dim`, matching `nalgebra` storage.
#[derive(Debug, Clone)]
pub struct SparseOp {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOp {
    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_zero(&self) -> bool {
        self.vals.is_empty()
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    /// `y += c · S x`.
    pub fn mul_vec_acc(&self, c: C64, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim) {
            let mut acc = C64::new(0.0, 0.0);
            for (k, s) in self.row(i) {
                acc += s * x[k];
            }
            *yi += c * acc;
        }
    }

    /// `out += c · S ρ`.
    pub fn mul_left_acc(&self, c: C64, rho: &[C64], out: &mut [C64]) {
        let n = self.dim;
        for j in 0..n {
            let col = &rho[j * n..(j + 1) * n];
            let oc = &mut out[j * n..(j + 1) * n];
            for (i, o) in oc.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (k, s) in self.row(i) {
                    acc += s * col[k];
                }
                *o += c * acc;
            }
        }
    }

    /// `out += c · ρ S†`.
    pub fn mul_right_adjoint_acc(&self, c: C64, rho: &[C64], out: &mut [C64]) {
        let n = self.dim;
        for j in 0..n {
            for (k, s) in self.row(j) {
                let f = c * s.conj();
                let src = &rho[k * n..(k + 1) * n];
                let dst = &mut out[j * n..(j + 1) * n];
                for (d, r) in dst.iter_mut().zip(src) {
                    *d += f * r;
                }
            }
        }
    }
}
