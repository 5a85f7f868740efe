use crate::{Error, Result};
use std::f64::consts::TAU;
use std::sync::Arc;

/// Uniform periodic grid on [-L/2, L/2).
///
/// Coefficient storage follows FFT order: slot k holds the signed mode
/// j = k for k < n/2 and j = k - n otherwise, so slot n/2 is the unpaired
/// Nyquist mode -n/2.
#[derive(Debug, Clone)]
pub struct Grid {
    length: f64,
    n: usize,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
}

impl Grid {
    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Domain length L.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Node spacing L/n.
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Physical coordinates x_m = -L/2 + m L/n.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Wavenumbers ξ_j = 2π j / L in FFT storage order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Signed mode index stored in slot k.
    pub fn signed_index(&self, k: usize) -> i64 {
        debug_assert!(k < self.n);
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Storage slot of the unpaired Nyquist mode j = -n/2.
    pub fn nyquist_slot(&self) -> usize {
        self.n / 2
    }

    /// Storage slot of signed mode j (requires -n/2 <= j < n/2).
    pub fn slot_of(&self, j: i64) -> usize {
        let half = self.n as i64 / 2;
        debug_assert!(-half <= j && j < half, "mode {j} outside grid");
        j.rem_euclid(self.n as i64) as usize
    }

    /// Largest lattice wavenumber magnitude, |ξ_{-n/2}| = π n / L.
    pub fn max_wavenumber(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / self.length
    }

    /// Constructor without the power-of-two restriction, for internal
    /// padded-product scratch grids. Requires even n >= 2.
    pub(crate) fn new_even(length: f64, n: usize) -> Arc<Grid> {
        assert!(n >= 2 && n % 2 == 0, "scratch grid size must be even");
        assert!(length > 0.0);
        Arc::new(Grid::build(length, n))
    }

    fn build(length: f64, n: usize) -> Grid {
        let h = length / n as f64;
        let nodes = (0..n).map(|m| m as f64 * h - 0.5 * length).collect();
        let wavenumbers = (0..n)
            .map(|k| {
                let j = if k < n / 2 { k as i64 } else { k as i64 - n as i64 };
                TAU * j as f64 / length
            })
            .collect();
        Grid { length, n, nodes, wavenumbers }
    }
}

/// Builds the periodic grid; n must be a power of two with n >= 8 and the
/// length positive and finite.
pub fn make_grid(length: f64, n: usize) -> Result<Arc<Grid>> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
    }
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(format!("n must be a power of two >= 8, got {n}")));
    }
    Ok(Arc::new(Grid::build(length, n)))
}
