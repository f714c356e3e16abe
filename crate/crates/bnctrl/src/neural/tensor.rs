//! Dense 2-D tensors (row-major, f64) and the handful of matrix products the
//! network needs. Heavy products go through ndarray's gemm.

use ndarray::{ArrayView2, ArrayViewMut2};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer does not match shape");
        Tensor { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn view(&self) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((self.rows, self.cols), &self.data).expect("shape is consistent")
    }

    pub(crate) fn view_mut(&mut self) -> ArrayViewMut2<'_, f64> {
        ArrayViewMut2::from_shape((self.rows, self.cols), &mut self.data)
            .expect("shape is consistent")
    }
}

pub(crate) fn view2(rows: usize, cols: usize, data: &[f64]) -> ArrayView2<'_, f64> {
    ArrayView2::from_shape((rows, cols), data).expect("slice matches shape")
}

pub(crate) fn view2_mut(rows: usize, cols: usize, data: &mut [f64]) -> ArrayViewMut2<'_, f64> {
    ArrayViewMut2::from_shape((rows, cols), data).expect("slice matches shape")
}

/// out = x · wᵀ, with x of shape [B×in] and w of shape [out×in].
pub(crate) fn matmul_xwt(x: &Tensor, w: ArrayView2<'_, f64>, out: &mut Tensor) {
    ndarray::linalg::general_mat_mul(1.0, &x.view(), &w.t(), 0.0, &mut out.view_mut());
}

/// dw += dyᵀ · x, accumulating into a [out×in] gradient view.
pub(crate) fn accum_dw(dy: &Tensor, x: &Tensor, mut dw: ArrayViewMut2<'_, f64>) {
    ndarray::linalg::general_mat_mul(1.0, &dy.view().t(), &x.view(), 1.0, &mut dw);
}

/// dx = dy · w, with dy of shape [B×out] and w of shape [out×in].
pub(crate) fn matmul_dyw(dy: &Tensor, w: ArrayView2<'_, f64>, dx: &mut Tensor) {
    ndarray::linalg::general_mat_mul(1.0, &dy.view(), &w, 0.0, &mut dx.view_mut());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_match_hand_arithmetic() {
        // x = [[1,2],[3,4]], w = [[1,0],[0,1],[1,1]] (3 outs, 2 ins)
        let x = Tensor::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let w = vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let mut y = Tensor::zeros(2, 3);
        matmul_xwt(&x, view2(3, 2, &w), &mut y);
        assert_eq!(y.data(), &[1.0, 2.0, 3.0, 3.0, 4.0, 7.0]);

        let mut dw = vec![0.0; 6];
        accum_dw(&y, &x, view2_mut(3, 2, &mut dw));
        // dw[0] = y[:,0]·x[:,0] = 1*1 + 3*3 = 10
        assert_eq!(dw[0], 10.0);

        let mut dx = Tensor::zeros(2, 2);
        matmul_dyw(&y, view2(3, 2, &w), &mut dx);
        // dx[0,0] = 1*1 + 2*0 + 3*1 = 4
        assert_eq!(dx.at(0, 0), 4.0);
    }

    #[test]
    #[should_panic]
    fn shape_mismatch_panics() {
        Tensor::from_vec(2, 3, vec![0.0; 5]);
    }

    #[test]
    fn finiteness_scan() {
        let mut t = Tensor::zeros(1, 2);
        assert!(t.is_finite());
        *t.at_mut(0, 1) = f64::NAN;
        assert!(!t.is_finite());
    }
}
