use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Form of the nonlocal dispersive term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DispersionMode {
    /// γ ℋ ∂_x², the Benjamin-type term.
    Hilbert,
    /// γ ∂_x |D|^β with β in (0,2).
    Fractional { beta: f64 },
}

/// Coefficients selecting one member of the equation family
///
///   u_t + γ ℋ u_xx + (-1)^{N+1} ∂_x^{2N+1} u + Σ_{k<N} a_k ∂_x^{2k+1} u
///       + Σ_{k<=M} b_k u^k u_x = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Order index N of the leading dispersive term ∂_x^{2N+1}.
    #[serde(rename = "N")]
    pub n: u32,
    /// Highest nonlinearity degree M.
    #[serde(rename = "M")]
    pub m: u32,
    pub gamma: f64,
    /// Lower-order odd-derivative coefficients a_1..a_{N-1}.
    #[serde(default)]
    pub a: Vec<f64>,
    /// Nonlinearity coefficients b_1..b_M.
    pub b: Vec<f64>,
    #[serde(default = "default_mode")]
    pub dispersion_mode: DispersionMode,
}

fn default_mode() -> DispersionMode {
    DispersionMode::Hilbert
}

impl ModelParams {
    /// Validated constructor; M is the length of `b`.
    pub fn new(
        n: u32,
        gamma: f64,
        a: Vec<f64>,
        b: Vec<f64>,
        dispersion_mode: DispersionMode,
    ) -> Result<Self> {
        let m = b.len() as u32;
        let params = ModelParams { n, m, gamma, a, b, dispersion_mode };
        params.validate()?;
        Ok(params)
    }

    /// KdV-type shorthand: N = 1, γ = 0, single nonlinearity b u u_x.
    pub fn kdv(b: f64) -> Self {
        ModelParams::new(1, 0.0, vec![], vec![b], DispersionMode::Hilbert)
            .expect("KdV parameters are always valid")
    }

    /// All terms linear (every b_k = 0).
    pub fn is_linear(&self) -> bool {
        self.b.iter().all(|&bk| bk == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParams("N must be a positive integer".into()));
        }
        if self.m < 1 {
            return Err(Error::InvalidParams("M must be a positive integer".into()));
        }
        if self.b.len() != self.m as usize {
            return Err(Error::InvalidParams(format!(
                "b must have length M = {}, got {}",
                self.m,
                self.b.len()
            )));
        }
        // b_M != 0 pins down M; the all-zero vector is additionally allowed so
        // that the b = 0 linear-reference runs used throughout the tests are
        // expressible.
        if !self.is_linear() && *self.b.last().unwrap() == 0.0 {
            return Err(Error::InvalidParams("b_M must be nonzero".into()));
        }
        if self.a.len() != (self.n - 1) as usize {
            return Err(Error::InvalidParams(format!(
                "a must have length N-1 = {}, got {}",
                self.n - 1,
                self.a.len()
            )));
        }
        if !self.gamma.is_finite()
            || self.a.iter().any(|x| !x.is_finite())
            || self.b.iter().any(|x| !x.is_finite())
        {
            return Err(Error::InvalidParams("coefficients must be finite".into()));
        }
        if let DispersionMode::Fractional { beta } = self.dispersion_mode {
            if !(beta > 0.0 && beta < 2.0) {
                return Err(Error::InvalidParams(format!("beta must lie in (0,2), got {beta}")));
            }
        }
        Ok(())
    }
}
