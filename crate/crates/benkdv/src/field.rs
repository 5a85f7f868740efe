use crate::grid::Grid;
use crate::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        fft.process(buf);
    });
}

/// One real-valued function stored as complex Fourier coefficients.
///
/// Coefficients are plane-wave amplitudes: u(x) = Σ_j c_j e^{i ξ_j x} with
/// ξ_j = 2π j / L, stored in FFT order (see [`Grid`]). For a real u they
/// satisfy c_{-j} = conj(c_j), and Parseval reads ∫ u² dx = L Σ |c_j|².
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// The zero field.
    pub fn zero(grid: Arc<Grid>) -> Self {
        let n = grid.n();
        SpectralField { grid, coeffs: vec![Complex64::ZERO; n] }
    }

    /// Wraps an existing coefficient array (must match the grid size).
    pub fn from_coeffs(grid: Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::SizeMismatch { expected: grid.n(), got: coeffs.len() });
        }
        Ok(SpectralField { grid, coeffs })
    }

    /// Amplitude of the mean mode ξ = 0.
    pub fn mean_coefficient(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// L² norm sqrt(L Σ |c_j|²) = ||u||_{L²} by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Squared L² norm, L Σ |c_j|².
    pub fn norm_sq(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        self.grid.length() * sum
    }

    /// L² distance to another field on the same grid.
    pub fn l2_distance(&self, other: &SpectralField) -> f64 {
        assert!(Arc::ptr_eq(&self.grid, &other.grid) || self.grid.n() == other.grid.n());
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (self.grid.length() * sum).sqrt()
    }

    /// Largest deviation from Hermitian symmetry c_{-j} = conj(c_j),
    /// including the imaginary parts of the self-paired modes 0 and -n/2.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = self.coeffs[0].im.abs().max(self.coeffs[n / 2].im.abs());
        for k in 1..n / 2 {
            let d = (self.coeffs[k].conj() - self.coeffs[n - k]).norm();
            worst = worst.max(d);
        }
        worst
    }

    /// True when the field represents a real function within `tol` relative
    /// to its largest coefficient magnitude (scale floor 1).
    pub fn is_real_within(&self, tol: f64) -> bool {
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(1.0_f64, f64::max);
        self.hermitian_defect() <= tol * scale
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Applies a wavenumber symbol in place and zeroes the unpaired Nyquist
    /// mode, which otherwise breaks real-valuedness under odd symbols.
    pub fn apply_symbol<F>(&mut self, symbol: F)
    where
        F: Fn(f64) -> Complex64,
    {
        for (c, &xi) in self.coeffs.iter_mut().zip(self.grid.wavenumbers()) {
            *c *= symbol(xi);
        }
        self.coeffs[self.grid.nyquist_slot()] = Complex64::ZERO;
    }

    /// Same as [`apply_symbol`](Self::apply_symbol) but returning a new field.
    pub fn mapped<F>(&self, symbol: F) -> SpectralField
    where
        F: Fn(f64) -> Complex64,
    {
        let mut out = self.clone();
        out.apply_symbol(symbol);
        out
    }

    /// Multiplies by a precomputed per-slot factor array and zeroes Nyquist.
    pub fn apply_factors(&mut self, factors: &[Complex64]) {
        assert_eq!(factors.len(), self.coeffs.len());
        for (c, f) in self.coeffs.iter_mut().zip(factors) {
            *c *= f;
        }
        self.coeffs[self.grid.nyquist_slot()] = Complex64::ZERO;
    }

    /// In-place self += scale * other.
    pub fn add_scaled(&mut self, scale: Complex64, other: &SpectralField) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.coeffs {
            *c *= factor;
        }
    }
}

/// Forward transform of physical samples on the grid nodes.
///
/// With nodes x_m = -L/2 + m L/n the plane-wave amplitude works out to
/// c_j = (-1)^j F_j / n where F is the unnormalized DFT; since n is even the
/// sign depends only on the storage slot.
pub fn transform(samples: &[f64], grid: &Arc<Grid>) -> Result<SpectralField> {
    if samples.len() != grid.n() {
        return Err(Error::SizeMismatch { expected: grid.n(), got: samples.len() });
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    fft_in_place(&mut buf, false);
    let inv_n = 1.0 / grid.n() as f64;
    for (k, c) in buf.iter_mut().enumerate() {
        let sign = if k % 2 == 0 { inv_n } else { -inv_n };
        *c *= sign;
    }
    Ok(SpectralField { grid: Arc::clone(grid), coeffs: buf })
}

/// Inverse transform back to physical samples at the grid nodes.
pub fn inverse_transform(field: &SpectralField) -> Vec<f64> {
    let mut buf: Vec<Complex64> = field
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 0 { *c } else { -c })
        .collect();
    fft_in_place(&mut buf, true);
    buf.iter().map(|c| c.re).collect()
}
