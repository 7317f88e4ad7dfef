//! Diagonalisation of circulant operators on the periodic grid.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Applies a circulant operator given by its eigenvalues (one per discrete
/// Fourier mode) to a real periodic field.
pub struct CirculantOperator {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    symbol: Vec<f64>,
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl CirculantOperator {
    /// `symbol[k]` is the eigenvalue on mode `k` (in FFT ordering).
    pub fn new(symbol: Vec<f64>) -> Self {
        let n = symbol.len();
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            symbol,
            buffer: vec![Complex64::new(0.0, 0.0); n],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn len(&self) -> usize {
        self.symbol.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbol.is_empty()
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// In-place application: `field ← F⁻¹ diag(symbol) F field`.
    pub fn apply(&mut self, field: &mut [f64]) {
        debug_assert_eq!(field.len(), self.symbol.len());
        for (b, &v) in self.buffer.iter_mut().zip(field.iter()) {
            *b = Complex64::new(v, 0.0);
        }
        self.forward
            .process_with_scratch(&mut self.buffer, &mut self.scratch);
        for (b, &s) in self.buffer.iter_mut().zip(&self.symbol) {
            *b *= s;
        }
        self.inverse
            .process_with_scratch(&mut self.buffer, &mut self.scratch);
        let scale = 1.0 / field.len() as f64;
        for (v, b) in field.iter_mut().zip(&self.buffer) {
            *v = b.re * scale;
        }
    }
}

/// Signed wavenumber of FFT index `k` on an `n`-point grid.
pub fn wavenumber(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Eigenvalues of the periodic second-difference operator
/// `(u_{j+1} − 2u_j + u_{j−1}) / Δx²`: `−(4/Δx²) sin²(πk/n)`.
pub fn second_difference_symbol(n: usize) -> Vec<f64> {
    let dx = 1.0 / n as f64;
    (0..n)
        .map(|k| {
            let s = (std::f64::consts::PI * k as f64 / n as f64).sin();
            -4.0 / (dx * dx) * s * s
        })
        .collect()
}
