//! Fourier multiplier operators: Bessel and Riesz potentials, the Hilbert
//! transform, the mixed operators A^r, the dispersion symbol ω(ξ), and the
//! free propagator S(t).
//!
//! Every application zeroes the unpaired Nyquist mode -n/2: odd symbols have
//! no Hermitian partner there, and keeping it would silently break
//! real-valuedness.

use crate::field::SpectralField;
use crate::grid::Grid;
use crate::params::{DispersionMode, ModelParams};
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

/// Relative tolerance for the mean-zero precondition of negative-order
/// Riesz potentials.
const MEAN_ZERO_TOL: f64 = 1e-12;

/// A sampled wavenumber symbol with its claimed pseudo-differential order.
#[derive(Debug, Clone)]
pub struct MultiplierSymbol {
    /// One value per storage slot, aligned with `grid.wavenumbers()`.
    pub values: Vec<Complex64>,
    /// Claimed order m, for diagnostics.
    pub order: f64,
}

impl MultiplierSymbol {
    /// Largest violation of values(-ξ) = conj(values(ξ)); zero for symbols of
    /// real operators.
    pub fn hermitian_defect(&self, grid: &Grid) -> f64 {
        let n = grid.n();
        let mut worst = self.values[0].im.abs();
        for k in 1..n / 2 {
            worst = worst.max((self.values[k].conj() - self.values[n - k]).norm());
        }
        worst
    }
}

/// Bessel potential J^s: multiplication by ⟨ξ⟩^s = (1+ξ²)^{s/2}.
pub fn bessel(field: &SpectralField, s: f64) -> SpectralField {
    field.mapped(|xi| Complex64::new(bessel_weight(xi, s), 0.0))
}

#[inline]
pub(crate) fn bessel_weight(xi: f64, s: f64) -> f64 {
    (1.0 + xi * xi).powf(0.5 * s)
}

/// Riesz potential |D|^s: multiplication by |ξ|^s with 0^s := 0 for s > 0 and
/// 0^0 := 1. For s < 0 the input must be mean-zero; the ξ = 0 output is then
/// set to 0, completing the distributional definition.
pub fn riesz(field: &SpectralField, s: f64) -> Result<SpectralField> {
    if s < 0.0 {
        let scale = field.coeffs().iter().map(|c| c.norm()).fold(1.0_f64, f64::max);
        if field.mean_coefficient().norm() > MEAN_ZERO_TOL * scale {
            return Err(Error::NonMeanZero);
        }
    }
    Ok(field.mapped(|xi| Complex64::new(riesz_weight(xi, s), 0.0)))
}

#[inline]
pub(crate) fn riesz_weight(xi: f64, s: f64) -> f64 {
    if xi == 0.0 {
        if s == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        xi.abs().powf(s)
    }
}

/// Hilbert transform, symbol -i sgn(ξ), fixed by requiring ℋ∂_x² = ∂_x|D| at
/// the symbol level. Implemented as an exact component swap so that ℋ∘ℋ = -I
/// holds bit-for-bit on mean-zero, Nyquist-free fields.
pub fn hilbert(field: &SpectralField) -> SpectralField {
    let mut out = field.clone();
    let grid = Arc::clone(field.grid());
    for (c, &xi) in out.coeffs_mut().iter_mut().zip(grid.wavenumbers()) {
        *c = if xi > 0.0 {
            Complex64::new(c.im, -c.re) // multiply by -i
        } else if xi < 0.0 {
            Complex64::new(-c.im, c.re) // multiply by +i
        } else {
            Complex64::ZERO
        };
    }
    let nyq = grid.nyquist_slot();
    out.coeffs_mut()[nyq] = Complex64::ZERO;
    out
}

/// k-th derivative ∂_x^k, symbol (iξ)^k.
pub fn derivative(field: &SpectralField, k: u32) -> SpectralField {
    field.mapped(|xi| i_pow_times(k, xi))
}

/// (iξ)^k with the integer power of i applied exactly.
#[inline]
fn i_pow_times(k: u32, xi: f64) -> Complex64 {
    let mag = xi.powi(k as i32);
    match k % 4 {
        0 => Complex64::new(mag, 0.0),
        1 => Complex64::new(0.0, mag),
        2 => Complex64::new(-mag, 0.0),
        _ => Complex64::new(0.0, -mag),
    }
}

/// Operator family appearing in the smoothing functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// Bessel potential J^r.
    J,
    /// Riesz potential |D|^r.
    AbsD,
    /// ∂_x^{⌊r⌋} |D|^{{r}}.
    Mixed,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 3] = [OperatorKind::J, OperatorKind::AbsD, OperatorKind::Mixed];

    pub fn label(self) -> &'static str {
        match self {
            OperatorKind::J => "J",
            OperatorKind::AbsD => "absD",
            OperatorKind::Mixed => "mixed",
        }
    }
}

/// A^r: one of J^r, |D|^r, or ∂_x^{⌊r⌋}|D|^{{r}} as a single multiplier.
pub fn fractional_a(field: &SpectralField, r: f64, kind: OperatorKind) -> Result<SpectralField> {
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!("fractional_a requires r >= 0, got {r}")));
    }
    Ok(match kind {
        OperatorKind::J => bessel(field, r),
        OperatorKind::AbsD => field.mapped(|xi| Complex64::new(riesz_weight(xi, r), 0.0)),
        OperatorKind::Mixed => {
            let int_part = r.floor();
            let frac_part = r - int_part;
            let k = int_part as u32;
            field.mapped(|xi| i_pow_times(k, xi) * riesz_weight(xi, frac_part))
        }
    })
}

/// Dispersion relation of the linearized equation,
/// ω(ξ) = -γ ξ|ξ| + ξ^{2N+1} - Σ_{k=1}^{N-1} (-1)^k a_k ξ^{2k+1},
/// with -γ ξ|ξ|^β replacing the first term in fractional mode. Each monomial
/// is odd in ξ with sign-symmetric floating-point evaluation, so
/// ω(-ξ) = -ω(ξ) holds exactly on the lattice.
pub fn omega(xi: f64, params: &ModelParams) -> f64 {
    let nonlocal = match params.dispersion_mode {
        DispersionMode::Hilbert => -params.gamma * xi * xi.abs(),
        DispersionMode::Fractional { beta } => -params.gamma * xi * xi.abs().powf(beta),
    };
    let mut w = nonlocal + xi.powi(2 * params.n as i32 + 1);
    for (idx, &ak) in params.a.iter().enumerate() {
        let k = idx as i32 + 1;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 }; // -(-1)^k
        w += sign * ak * xi.powi(2 * k + 1);
    }
    w
}

/// Samples ω over the grid lattice; order 2N+1.
pub fn dispersion_symbol(params: &ModelParams, grid: &Grid) -> MultiplierSymbol {
    let values = grid
        .wavenumbers()
        .iter()
        .map(|&xi| Complex64::new(omega(xi, params), 0.0))
        .collect();
    MultiplierSymbol { values, order: (2 * params.n + 1) as f64 }
}

/// Per-slot phases e^{i t ω(ξ)} of the free propagator S(t).
pub fn propagator_factors(grid: &Grid, t: f64, params: &ModelParams) -> Vec<Complex64> {
    grid.wavenumbers()
        .iter()
        .map(|&xi| Complex64::cis(t * omega(xi, params)))
        .collect()
}

/// Free propagator S(t) = (e^{itω(ξ)} ·)^∨; unitary on L², preserves
/// real-valuedness because ω is odd.
pub fn linear_propagator(field: &SpectralField, t: f64, params: &ModelParams) -> SpectralField {
    let mut out = field.clone();
    let factors = propagator_factors(field.grid(), t, params);
    out.apply_factors(&factors);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::transform;
    use crate::grid::make_grid;
    use crate::rng::Rng;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    /// Seeded random real field with zero mean and Nyquist slots, the class
    /// on which the exact operator identities are stated.
    fn random_field(seed: u64, n: usize, length: f64) -> SpectralField {
        let grid = make_grid(length, n).unwrap();
        let mut rng = Rng::new(seed);
        let samples: Vec<f64> = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let mut f = transform(&samples, &grid).unwrap();
        f.coeffs_mut()[0] = Complex64::ZERO;
        let nyq = grid.nyquist_slot();
        f.coeffs_mut()[nyq] = Complex64::ZERO;
        f
    }

    fn plane_wave(k: i64, n: usize, length: f64) -> SpectralField {
        let grid = make_grid(length, n).unwrap();
        let samples: Vec<f64> =
            grid.nodes().iter().map(|&x| (TAU * k as f64 / length * x).cos()).collect();
        transform(&samples, &grid).unwrap()
    }

    #[test]
    fn bessel_doubles_unit_mode_at_s_two() {
        // ⟨1⟩² = 2
        let f = plane_wave(1, 64, TAU);
        let g = bessel(&f, 2.0);
        let grid = f.grid();
        for k in 0..64 {
            let expected = match grid.signed_index(k) {
                1 | -1 => 1.0, // 0.5 * 2
                _ => 0.0,
            };
            assert!((g.coeffs()[k].re - expected).abs() < 1e-13);
            assert!(g.coeffs()[k].im.abs() < 1e-13);
        }
    }

    #[test]
    fn bessel_semigroup_law() {
        let f = random_field(11, 128, 15.0);
        let lhs = bessel(&bessel(&f, 0.7), -1.9);
        let rhs = bessel(&f, 0.7 - 1.9);
        assert!(lhs.l2_distance(&rhs) < 1e-12 * rhs.l2_norm().max(1.0));
    }

    #[test]
    fn bessel_zero_order_is_identity_off_nyquist() {
        let f = random_field(3, 64, 8.0);
        let g = bessel(&f, 0.0);
        assert_eq!(f.coeffs(), g.coeffs());
    }

    #[test]
    fn riesz_scales_cos_two_x_by_two() {
        let f = plane_wave(2, 64, TAU);
        let g = riesz(&f, 1.0).unwrap();
        let expected: Vec<f64> = f.grid().nodes().iter().map(|&x| 2.0 * (2.0 * x).cos()).collect();
        let got = crate::field::inverse_transform(&g);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn riesz_zero_order_keeps_mean() {
        let grid = make_grid(TAU, 32).unwrap();
        let samples: Vec<f64> = grid.nodes().iter().map(|&x| 3.0 + x.sin()).collect();
        let f = transform(&samples, &grid).unwrap();
        let g = riesz(&f, 0.0).unwrap();
        assert!((g.mean_coefficient().re - 3.0).abs() < 1e-13);
    }

    #[test]
    fn riesz_rejects_negative_order_with_mean() {
        let grid = make_grid(TAU, 32).unwrap();
        let samples: Vec<f64> = grid.nodes().iter().map(|&x| 1.0 + x.cos()).collect();
        let f = transform(&samples, &grid).unwrap();
        assert!(matches!(riesz(&f, -1.0), Err(Error::NonMeanZero)));
        // mean-zero input passes
        let samples: Vec<f64> = grid.nodes().iter().map(|&x| x.cos()).collect();
        let f = transform(&samples, &grid).unwrap();
        assert!(riesz(&f, -1.0).is_ok());
    }

    #[test]
    fn hilbert_maps_cos_to_sin() {
        let grid = make_grid(TAU, 64).unwrap();
        let f = transform(&grid.nodes().iter().map(|&x| x.cos()).collect::<Vec<_>>(), &grid)
            .unwrap();
        let h = hilbert(&f);
        let got = crate::field::inverse_transform(&h);
        for (y, &x) in got.iter().zip(grid.nodes()) {
            assert!((y - x.sin()).abs() < 1e-13, "Hcos(x) != sin(x) at x = {x}");
        }
    }

    #[test]
    fn hilbert_annihilates_constants() {
        let grid = make_grid(TAU, 16).unwrap();
        let f = transform(&vec![2.5; 16], &grid).unwrap();
        let h = hilbert(&f);
        assert!(h.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn hilbert_squares_to_exact_negation() {
        let f = random_field(99, 128, 30.0);
        let hh = hilbert(&hilbert(&f));
        for (a, b) in hh.coeffs().iter().zip(f.coeffs()) {
            assert_eq!(*a, -b, "component swap must make HH = -I exact");
        }
    }

    #[test]
    fn hilbert_dxx_equals_dx_absd() {
        // the sign convention is pinned by ℋ∂_x² = ∂_x|D|
        let f = random_field(5, 64, 9.0);
        let lhs = hilbert(&derivative(&f, 2));
        let rhs = derivative(&riesz(&f, 1.0).unwrap(), 1);
        assert!(lhs.l2_distance(&rhs) < 1e-12 * rhs.l2_norm().max(1.0));
    }

    #[test]
    fn fractional_a_mixed_at_r_one_is_derivative() {
        let f = plane_wave(1, 64, TAU);
        let g = fractional_a(&f, 1.0, OperatorKind::Mixed).unwrap();
        let got = crate::field::inverse_transform(&g);
        for (y, &x) in got.iter().zip(f.grid().nodes()) {
            assert!((y + x.sin()).abs() < 1e-13, "∂_x cos != -sin at {x}");
        }
    }

    #[test]
    fn fractional_a_zero_order_is_identity() {
        let f = random_field(8, 64, 12.0);
        for kind in OperatorKind::ALL {
            let g = fractional_a(&f, 0.0, kind).unwrap();
            assert!(g.l2_distance(&f) < 1e-13 * f.l2_norm());
        }
    }

    #[test]
    fn fractional_a_absd_hand_value() {
        let f = plane_wave(2, 64, TAU);
        let g = fractional_a(&f, 1.5, OperatorKind::AbsD).unwrap();
        let amp = 2.0_f64.powf(1.5);
        let got = crate::field::inverse_transform(&g);
        for (y, &x) in got.iter().zip(f.grid().nodes()) {
            assert!((y - amp * (2.0 * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn fractional_a_integer_j_matches_repeated_bessel() {
        let f = random_field(21, 128, 20.0);
        let direct = fractional_a(&f, 3.0, OperatorKind::J).unwrap();
        let mut iterated = f.clone();
        for _ in 0..3 {
            iterated = bessel(&iterated, 1.0);
        }
        assert!(direct.l2_distance(&iterated) < 1e-12 * direct.l2_norm());
    }

    #[test]
    fn fractional_a_rejects_negative_order() {
        let f = random_field(1, 32, 5.0);
        assert!(fractional_a(&f, -0.5, OperatorKind::J).is_err());
    }

    #[test]
    fn dispersion_values_match_hand_evaluation() {
        // KdV: ω(ξ) = ξ³
        let kdv = ModelParams::kdv(6.0);
        assert_eq!(omega(2.0, &kdv), 8.0);
        // Benjamin: ω(-2) = -γ(-2)(2) + (-2)³ = 4 - 8 = -4 at γ = 1
        let benjamin =
            ModelParams::new(1, 1.0, vec![], vec![1.0], DispersionMode::Hilbert).unwrap();
        assert_eq!(omega(-2.0, &benjamin), -4.0);
    }

    #[test]
    fn dispersion_symbol_is_exactly_odd() {
        let grid = make_grid(17.0, 64).unwrap();
        let mut rng = Rng::new(404);
        for _ in 0..20 {
            let n = 1 + (rng.next_u64() % 3) as u32;
            let a: Vec<f64> = (1..n).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
            let params = ModelParams::new(
                n,
                rng.uniform_in(-2.0, 2.0),
                a,
                vec![1.0],
                DispersionMode::Hilbert,
            )
            .unwrap();
            let sym = dispersion_symbol(&params, &grid);
            for k in 1..32usize {
                let plus = sym.values[k].re;
                let minus = sym.values[64 - k].re;
                assert_eq!(plus + minus, 0.0, "ω not exactly odd at slot {k}");
            }
            assert_eq!(sym.order, (2 * n + 1) as f64);
            // Oddness of ω makes the propagator phases a Hermitian symbol.
            let phases =
                MultiplierSymbol { values: propagator_factors(&grid, 0.37, &params), order: 0.0 };
            assert_eq!(phases.hermitian_defect(&grid), 0.0);
        }
    }

    #[test]
    fn propagator_at_zero_time_is_identity() {
        let f = random_field(2, 64, 10.0);
        let g = linear_propagator(&f, 0.0, &ModelParams::kdv(1.0));
        assert!(g.l2_distance(&f) == 0.0);
    }

    #[test]
    fn propagator_flips_unit_mode_after_pi() {
        // ω(1) = 1 for KdV, so S(π) multiplies the ξ=1 amplitude by e^{iπ}.
        let f = plane_wave(1, 32, TAU);
        let g = linear_propagator(&f, std::f64::consts::PI, &ModelParams::kdv(1.0));
        let slot = f.grid().slot_of(1);
        let c = g.coeffs()[slot];
        assert!((c.re + 0.5).abs() < 1e-13 && c.im.abs() < 1e-12);
    }

    #[test]
    fn propagator_group_law_and_unitarity() {
        // dyadic times so t1 + t2 is exact; |t ω| stays small enough that the
        // rounding of the phase product is far below the 1e-12 budget
        let params =
            ModelParams::new(1, 1.3, vec![], vec![1.0], DispersionMode::Hilbert).unwrap();
        let f = random_field(77, 64, TAU);
        let (t1, t2) = (0.00390625, -0.001953125);
        let one = linear_propagator(&linear_propagator(&f, t1, &params), t2, &params);
        let two = linear_propagator(&f, t1 + t2, &params);
        assert!(one.l2_distance(&two) < 1e-12 * f.l2_norm());
        assert!((two.l2_norm() - f.l2_norm()).abs() < 1e-13 * f.l2_norm());
    }

    proptest! {
        #[test]
        fn multipliers_preserve_hermitian_symmetry(
            seed in 0u64..1_000_000,
            s in -2.0f64..4.0,
            r in 0.0f64..4.0,
            t in -1.0f64..1.0,
        ) {
            let f = random_field(seed, 64, 25.0);
            prop_assert!(bessel(&f, s).is_real_within(1e-12));
            prop_assert!(hilbert(&f).is_real_within(1e-12));
            prop_assert!(riesz(&f, s.abs()).unwrap().is_real_within(1e-12));
            for kind in OperatorKind::ALL {
                prop_assert!(fractional_a(&f, r, kind).unwrap().is_real_within(1e-12));
            }
            let params = ModelParams::new(1, 0.8, vec![], vec![1.0], DispersionMode::Fractional { beta: 1.1 }).unwrap();
            let moved = linear_propagator(&f, t, &params);
            prop_assert!(moved.is_real_within(1e-12));
            prop_assert!((moved.l2_norm() - f.l2_norm()).abs() <= 1e-13 * f.l2_norm().max(1.0));
        }
    }
}
