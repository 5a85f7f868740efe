//! Time integration: dealiased nonlinearity evaluation, an integrating-factor
//! RK4 stepper on the exact free propagator, and a Duhamel-Picard iterator.

use crate::exec;
use crate::field::{inverse_transform, transform, SpectralField};
use crate::grid::Grid;
use crate::ops::propagator_factors;
use crate::params::ModelParams;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Guard added to the denominator of the CFL-style bound so that the zero
/// field still gets a finite suggestion.
const EPS_GUARD: f64 = 1e-12;

/// Hard cap on relative H^N norm growth; beyond this a run is reported as a
/// blowup event rather than integrated further.
const HN_GROWTH_CAP: f64 = 1e8;

/// Dealiasing rule for physical-space products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Dealias {
    /// Zero all modes |j| > n/3 before and after multiplying.
    TwoThirds,
    /// Evaluate products on a grid enlarged by `factor`; exact for the
    /// degree-(M+1) nonlinearity when factor >= (M+2)/2.
    Pad { factor: f64 },
}

impl Dealias {
    /// Padding factor that makes the degree-(M+1) product alias-free.
    pub fn exact_for(m: u32) -> Dealias {
        Dealias::Pad { factor: (m as f64 + 2.0) / 2.0 }
    }

    pub(crate) fn validate(self) -> Result<()> {
        if let Dealias::Pad { factor } = self {
            if !(factor >= 1.0 && factor.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "pad factor must be >= 1, got {factor}"
                )));
            }
        }
        Ok(())
    }
}

/// Stepping parameters for [`evolve`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    pub dealias: Dealias,
    /// Steps between stored snapshots.
    pub output_every: usize,
    /// Abort when the outer 10% of the domain holds more than this fraction
    /// of the total L² mass; 1.0 disables the check.
    pub boundary_mass_threshold: f64,
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.dt > self.t_end {
            return Err(Error::InvalidArgument(format!(
                "dt = {} exceeds t_end = {}",
                self.dt, self.t_end
            )));
        }
        if self.output_every == 0 {
            return Err(Error::InvalidArgument("output_every must be positive".into()));
        }
        if !(self.boundary_mass_threshold > 0.0) {
            return Err(Error::InvalidArgument(
                "boundary_mass_threshold must be positive".into(),
            ));
        }
        self.dealias.validate()
    }
}

/// Discrete-time solution record; snapshots share one grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<SpectralField>,
    pub params: ModelParams,
}

impl Trajectory {
    pub fn grid(&self) -> &Arc<Grid> {
        self.snapshots[0].grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_field(&self) -> &SpectralField {
        self.snapshots.last().expect("trajectory holds at least the initial field")
    }
}

/// Σ_k b_k u^k evaluated pointwise by Horner's rule.
fn coefficient_polynomial(samples: &[f64], b: &[f64]) -> Vec<f64> {
    let last = *b.last().expect("b is nonempty");
    samples
        .iter()
        .map(|&u| {
            let mut acc = last;
            for &bk in b[..b.len() - 1].iter().rev() {
                acc = acc * u + bk;
            }
            acc * u
        })
        .collect()
}

fn two_thirds_mask(field: &SpectralField) -> SpectralField {
    let cutoff = field.grid().n() as i64 / 3;
    let grid = Arc::clone(field.grid());
    let mut out = field.clone();
    for (k, c) in out.coeffs_mut().iter_mut().enumerate() {
        if grid.signed_index(k).abs() > cutoff {
            *c = Complex64::ZERO;
        }
    }
    out
}

/// Spreads coefficients onto a finer grid of the same length (spectral
/// interpolation); `fine` must have at least as many nodes.
fn upsample(field: &SpectralField, fine: &Arc<Grid>) -> SpectralField {
    let coarse = field.grid();
    let mut out = SpectralField::zero(Arc::clone(fine));
    let half = coarse.n() as i64 / 2;
    for j in -(half - 1)..half {
        out.coeffs_mut()[fine.slot_of(j)] = field.coeffs()[coarse.slot_of(j)];
    }
    out
}

/// Keeps only the modes representable on `coarse`, dropping its Nyquist slot.
fn downsample(field: &SpectralField, coarse: &Arc<Grid>) -> SpectralField {
    let fine = field.grid();
    let mut out = SpectralField::zero(Arc::clone(coarse));
    let half = coarse.n() as i64 / 2;
    for j in -(half - 1)..half {
        out.coeffs_mut()[coarse.slot_of(j)] = field.coeffs()[fine.slot_of(j)];
    }
    out
}

/// Evaluates 𝒩(u) = Σ_k b_k u^k ∂_x u with physical-space products under the
/// selected dealiasing rule.
pub fn nonlinearity(field: &SpectralField, params: &ModelParams, dealias: Dealias) -> SpectralField {
    if params.is_linear() {
        return SpectralField::zero(Arc::clone(field.grid()));
    }
    match dealias {
        Dealias::TwoThirds => {
            let truncated = two_thirds_mask(field);
            let ux = truncated.mapped(|xi| Complex64::new(0.0, xi));
            let u_phys = inverse_transform(&truncated);
            let ux_phys = inverse_transform(&ux);
            let poly = coefficient_polynomial(&u_phys, &params.b);
            let product: Vec<f64> =
                poly.iter().zip(&ux_phys).map(|(p, du)| p * du).collect();
            let spectral = transform(&product, field.grid())
                .expect("product sample count matches the grid");
            two_thirds_mask(&spectral)
        }
        Dealias::Pad { factor } => {
            let n = field.grid().n();
            let mut m = (factor * n as f64).ceil() as usize;
            if m % 2 == 1 {
                m += 1;
            }
            m = m.max(n);
            let fine = Grid::new_even(field.grid().length(), m);
            let up = upsample(field, &fine);
            let ux = up.mapped(|xi| Complex64::new(0.0, xi));
            let u_phys = inverse_transform(&up);
            let ux_phys = inverse_transform(&ux);
            let poly = coefficient_polynomial(&u_phys, &params.b);
            let product: Vec<f64> =
                poly.iter().zip(&ux_phys).map(|(p, du)| p * du).collect();
            let spectral =
                transform(&product, &fine).expect("product sample count matches the fine grid");
            downsample(&spectral, field.grid())
        }
    }
}

/// Suggested stable step for the integrating-factor scheme; only the
/// nonlinear term constrains dt, through the advection speed max|u|^M.
pub fn suggest_dt(field: &SpectralField, params: &ModelParams, safety: f64) -> f64 {
    assert!(safety > 0.0 && safety <= 1.0, "safety must lie in (0,1]");
    let samples = inverse_transform(field);
    let umax = samples.iter().fold(0.0_f64, |m, &u| m.max(u.abs()));
    let bmax = params.b.iter().fold(0.0_f64, |m, &b| m.max(b.abs()));
    let speed = umax.powi(params.m as i32)
        * field.grid().max_wavenumber()
        * bmax
        * params.m as f64;
    safety / (speed + EPS_GUARD)
}

/// One integrating-factor RK4 step, phases precomputed for a fixed dt.
///
/// In the transformed variable v(t) = S(-t)u(t) the stages reduce to
/// multiplier applications of E = S(dt/2) and E² = S(dt) around plain
/// nonlinearity evaluations; with b = 0 the step collapses to S(dt) exactly.
pub struct IfRk4 {
    params: ModelParams,
    dealias: Dealias,
    dt: f64,
    e_half: Vec<Complex64>,
    e_full: Vec<Complex64>,
}

impl IfRk4 {
    pub fn new(grid: &Grid, params: &ModelParams, dt: f64, dealias: Dealias) -> Self {
        IfRk4 {
            params: params.clone(),
            dealias,
            dt,
            e_half: propagator_factors(grid, 0.5 * dt, params),
            e_full: propagator_factors(grid, dt, params),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, u: &SpectralField) -> SpectralField {
        if self.params.is_linear() {
            let mut out = u.clone();
            out.apply_factors(&self.e_full);
            return out;
        }
        let h = self.dt;
        let nl = |f: &SpectralField| nonlinearity(f, &self.params, self.dealias);

        let k1 = nl(u);

        let mut b2 = u.clone();
        b2.add_scaled(Complex64::new(-0.5 * h, 0.0), &k1);
        b2.apply_factors(&self.e_half);
        let k2 = nl(&b2);

        let mut b3 = u.clone();
        b3.apply_factors(&self.e_half);
        b3.add_scaled(Complex64::new(-0.5 * h, 0.0), &k2);
        let k3 = nl(&b3);

        let mut b4 = u.clone();
        b4.apply_factors(&self.e_full);
        let mut k3_moved = k3.clone();
        k3_moved.apply_factors(&self.e_half);
        b4.add_scaled(Complex64::new(-h, 0.0), &k3_moved);
        let k4 = nl(&b4);

        // u' = E² u - h/6 (E² k1 + 2E(k2 + k3) + k4)
        let mut out = u.clone();
        out.add_scaled(Complex64::new(-h / 6.0, 0.0), &k1);
        out.apply_factors(&self.e_full);
        let mut mid = k2;
        mid.add_scaled(Complex64::new(1.0, 0.0), &k3);
        mid.apply_factors(&self.e_half);
        out.add_scaled(Complex64::new(-h / 3.0, 0.0), &mid);
        out.add_scaled(Complex64::new(-h / 6.0, 0.0), &k4);
        out
    }
}

/// Single integrating-factor RK4 step; errors on non-finite output.
pub fn step_ifrk4(
    field: &SpectralField,
    dt: f64,
    params: &ModelParams,
    dealias: Dealias,
) -> Result<SpectralField> {
    let stepper = IfRk4::new(field.grid(), params, dt, dealias);
    let out = stepper.step(field);
    if !out.is_finite() {
        return Err(Error::Instability { t: dt });
    }
    Ok(out)
}

fn hn_norm(field: &SpectralField, n_order: u32) -> f64 {
    let s = n_order as f64;
    let sum: f64 = field
        .coeffs()
        .iter()
        .zip(field.grid().wavenumbers())
        .map(|(c, &xi)| (1.0 + xi * xi).powf(s) * c.norm_sqr())
        .sum();
    (field.grid().length() * sum).sqrt()
}

/// Fraction of L² mass held by nodes in the outer 10% of the domain.
fn boundary_mass_fraction(field: &SpectralField) -> f64 {
    let samples = inverse_transform(field);
    let edge = 0.45 * field.grid().length();
    let mut outer = 0.0;
    let mut total = 0.0;
    for (&x, &u) in field.grid().nodes().iter().zip(&samples) {
        let m = u * u;
        total += m;
        if x.abs() >= edge {
            outer += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outer / total
    }
}

/// Integrates u0 to t_end with IFRK4, storing a snapshot every
/// `output_every` steps plus the initial and final states. Aborts on
/// non-finite coefficients, on H^N growth past the blowup cap, and on
/// boundary contamination.
pub fn evolve(u0: &SpectralField, config: &EvolveConfig, params: &ModelParams) -> Result<Trajectory> {
    config.validate()?;
    params.validate()?;
    if !u0.is_real_within(1e-12) {
        return Err(Error::InvalidArgument(
            "initial data must represent a real-valued function".into(),
        ));
    }

    let n_full = (config.t_end / config.dt).floor() as usize;
    let remainder = config.t_end - n_full as f64 * config.dt;
    let has_tail = remainder > 1e-9 * config.dt;
    let total_steps = n_full + usize::from(has_tail);

    let stepper = IfRk4::new(u0.grid(), params, config.dt, config.dealias);
    let tail_stepper =
        has_tail.then(|| IfRk4::new(u0.grid(), params, remainder, config.dealias));

    let hn0 = hn_norm(u0, params.n).max(f64::MIN_POSITIVE);
    let check_boundary = config.boundary_mass_threshold < 1.0;

    let mut times = vec![0.0];
    let mut snapshots = vec![u0.clone()];
    let mut u = u0.clone();

    for step in 1..=total_steps {
        let (t, next) = if step <= n_full {
            (step as f64 * config.dt, stepper.step(&u))
        } else {
            (config.t_end, tail_stepper.as_ref().expect("tail stepper exists").step(&u))
        };
        u = next;

        if !u.is_finite() || hn_norm(&u, params.n) > HN_GROWTH_CAP * hn0 {
            return Err(Error::Instability { t });
        }
        if check_boundary {
            let fraction = boundary_mass_fraction(&u);
            if fraction > config.boundary_mass_threshold {
                return Err(Error::BoundaryContamination { t, fraction });
            }
        }
        if step % config.output_every == 0 || step == total_steps {
            times.push(t);
            snapshots.push(u.clone());
        }
    }

    Ok(Trajectory { times, snapshots, params: params.clone() })
}

/// Duhamel-Picard iteration on quad_nodes equispaced time nodes:
/// u^{(j+1)}(t) = S(t)u0 - ∫_0^t S(t-τ) 𝒩(u^{(j)})(τ) dτ with composite
/// trapezoid quadrature, iterated until the sup-in-time L² increment drops
/// below tol. Nonlinearity uses the two-thirds rule.
pub fn picard_solve(
    u0: &SpectralField,
    t_end: f64,
    params: &ModelParams,
    tol: f64,
    max_iter: usize,
    quad_nodes: usize,
) -> Result<Trajectory> {
    params.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    if quad_nodes < 2 {
        return Err(Error::InvalidArgument("quad_nodes must be at least 2".into()));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidArgument("tol must be positive and max_iter >= 1".into()));
    }

    let q = quad_nodes;
    let grid = u0.grid();
    let dtau = t_end / (q - 1) as f64;
    let times: Vec<f64> = (0..q)
        .map(|i| if i == q - 1 { t_end } else { i as f64 * dtau })
        .collect();

    // S(k Δτ) per slot, k = 0..q-1; covers every t_i - τ_l difference.
    let prop: Vec<Vec<Complex64>> = (0..q)
        .map(|k| propagator_factors(grid, k as f64 * dtau, params))
        .collect();

    let free: Vec<SpectralField> = (0..q)
        .map(|i| {
            let mut f = u0.clone();
            f.apply_factors(&prop[i]);
            f
        })
        .collect();

    let mut current = free.clone();
    let mut last_delta = f64::INFINITY;

    for _ in 0..max_iter {
        let forcing: Vec<SpectralField> = exec::map_indexed(q, |l| {
            nonlinearity(&current[l], params, Dealias::TwoThirds)
        });

        let next: Vec<SpectralField> = exec::map_indexed(q, |i| {
            let mut out = free[i].clone();
            if i > 0 {
                for l in 0..=i {
                    // trapezoid: half weight at both endpoints of [0, t_i]
                    let w = if l == 0 || l == i { 0.5 * dtau } else { dtau };
                    let phase = &prop[i - l];
                    let g = forcing[l].coeffs();
                    for (k, c) in out.coeffs_mut().iter_mut().enumerate() {
                        *c -= w * phase[k] * g[k];
                    }
                }
                let nyq = grid.nyquist_slot();
                out.coeffs_mut()[nyq] = Complex64::ZERO;
            }
            out
        });

        last_delta = next
            .iter()
            .zip(&current)
            .map(|(a, b)| a.l2_distance(b))
            .fold(0.0, f64::max);
        current = next;
        if !last_delta.is_finite() {
            break;
        }
        if last_delta < tol {
            return Ok(Trajectory { times, snapshots: current, params: params.clone() });
        }
    }
    Err(Error::PicardDiverged { iterations: max_iter, last_delta })
}
