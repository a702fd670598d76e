use std::sync::Arc;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Centred 2-D DFT on square `n×n` arrays whose origin sits at index `n/2`.
///
/// `forward` computes `F[q] = Σ_p f[p] e^{−2πi (p−n/2)(q−n/2)/n}`; `inverse` is the exact
/// inverse including the `1/n²` factor.
#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&self, data: &mut Array2<Complex64>) {
        self.transform(data, &self.forward, 1.0);
    }

    pub fn inverse(&self, data: &mut Array2<Complex64>) {
        let scale = 1.0 / (self.n * self.n) as f64;
        self.transform(data, &self.inverse, scale);
    }

    fn transform(&self, data: &mut Array2<Complex64>, plan: &Arc<dyn Fft<f64>>, scale: f64) {
        assert_eq!(data.dim(), (self.n, self.n), "Fft2 size mismatch");
        // For even n, fftshift and ifftshift are the same half-length roll.
        roll_half(data);
        self.rows(data, plan);
        let mut t = data.t().as_standard_layout().into_owned();
        self.rows(&mut t, plan);
        data.assign(&t.t());
        roll_half(data);
        if scale != 1.0 {
            data.mapv_inplace(|c| c * scale);
        }
    }

    fn rows(&self, data: &mut Array2<Complex64>, plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let slice = data.as_slice_mut().expect("standard layout");
        slice.par_chunks_mut(n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()],
            |scratch, row| plan.process_with_scratch(row, scratch),
        );
    }
}

fn roll_half(data: &mut Array2<Complex64>) {
    let h = data.nrows() / 2;
    for mut row in data.axis_iter_mut(Axis(0)) {
        row.as_slice_mut().expect("contiguous row").rotate_left(h);
    }
    let n = data.nrows();
    for iy in 0..h {
        for ix in 0..n {
            let tmp = data[[iy, ix]];
            data[[iy, ix]] = data[[iy + h, ix]];
            data[[iy + h, ix]] = tmp;
        }
    }
}
