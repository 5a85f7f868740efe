//! Weight constructions: the χ_{ε,b} ramp family, partitions of unity, the
//! θ/η plateau cutoffs, and the ψ_ℓ sequence, all built from one mollified
//! ramp primitive with analytic derivatives.

use crate::{Error, Result};
use std::sync::{Arc, OnceLock};

/// Reference lattice size for the mollifier tables.
const TABLE_LEN: usize = (1 << 16) + 1;

/// Radicand values at or below this are treated as the zero set of the k-th
/// root partition; derivative queries there return the one-sided limit 0.
const RADICAND_FLOOR: f64 = 1e-12;

fn exp_bump(y: f64) -> f64 {
    if y * y >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - y * y)).exp()
    }
}

/// Cumulative integral on a uniform lattice: composite Simpson at even
/// indices, the half-panel Newton–Cotes rule at odd ones, both O(h⁴).
fn cumulative(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for i in (2..values.len()).step_by(2) {
        out[i] = out[i - 2] + h / 3.0 * (values[i - 2] + 4.0 * values[i - 1] + values[i]);
    }
    for i in (1..values.len()).step_by(2) {
        out[i] = out[i - 1] + h / 12.0 * (5.0 * values[i - 1] + 8.0 * values[i] - values[i + 1]);
    }
    out
}

/// Tables on [-1, 1]: the unit mollifier φ₁, its primitive Φ₁, the smoothed
/// ramp corner g₁ = ∫Φ₁ (equal to y for y ≥ 1), and g₂ = ∫g₁.
struct Tables {
    phi: Vec<f64>,
    cdf: Vec<f64>,
    g1: Vec<f64>,
    g2: Vec<f64>,
    g2_end: f64,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let h = 2.0 / (TABLE_LEN - 1) as f64;
        let raw: Vec<f64> = (0..TABLE_LEN).map(|i| exp_bump(-1.0 + i as f64 * h)).collect();
        let raw_cdf = cumulative(&raw, h);
        let total = *raw_cdf.last().unwrap();
        let phi: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let cdf: Vec<f64> = raw_cdf.iter().map(|v| v / total).collect();
        let g1 = cumulative(&cdf, h);
        let g2 = cumulative(&g1, h);
        let g2_end = *g2.last().unwrap();
        Tables { phi, cdf, g1, g2, g2_end }
    })
}

/// Four-point Lagrange interpolation on the uniform table lattice; callers
/// guarantee |y| < 1.
fn interp(table: &[f64], y: f64) -> f64 {
    let h = 2.0 / (TABLE_LEN - 1) as f64;
    let pos = (y + 1.0) / h;
    let center = (pos.floor() as usize).clamp(1, TABLE_LEN - 3);
    let base = center - 1;
    let t = pos - base as f64;
    let w0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    let w1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    let w2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    let w3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    w0 * table[base] + w1 * table[base + 1] + w2 * table[base + 2] + w3 * table[base + 3]
}

/// Monotone C∞ ramp: the piecewise-linear ramp through [lo, hi] convolved
/// with a mollifier of half-width `delta`, so the transition keeps the exact
/// constant slope on [lo + 2δ, hi - 2δ] and the value clamps are exact.
#[derive(Debug, Clone, Copy)]
struct SmoothRamp {
    lo: f64,
    hi: f64,
    delta: f64,
    slope: f64,
}

impl SmoothRamp {
    fn new(lo: f64, hi: f64, delta: f64) -> SmoothRamp {
        debug_assert!(hi - lo >= 4.0 * delta && delta > 0.0);
        SmoothRamp { lo, hi, delta, slope: 1.0 / (hi - lo - 2.0 * delta) }
    }

    /// Ramp with the caller's slope expression stored verbatim; the geometry
    /// must satisfy slope·(hi - lo - 2δ) = 1.
    fn with_slope(lo: f64, hi: f64, delta: f64, slope: f64) -> SmoothRamp {
        debug_assert!(hi - lo >= 4.0 * delta && delta > 0.0);
        SmoothRamp { lo, hi, delta, slope }
    }

    fn spanning(lo: f64, hi: f64) -> SmoothRamp {
        SmoothRamp::new(lo, hi, 0.25 * (hi - lo))
    }

    /// Mollified hinge ∫_{-∞}^y Φ_δ; equals y exactly past the transition.
    fn hinge(self, y: f64) -> f64 {
        let d = self.delta;
        if y <= -d {
            0.0
        } else if y >= d {
            y
        } else {
            d * interp(&tables().g1, y / d).max(0.0)
        }
    }

    fn cdf(self, y: f64) -> f64 {
        let d = self.delta;
        if y <= -d {
            0.0
        } else if y >= d {
            1.0
        } else {
            interp(&tables().cdf, y / d).clamp(0.0, 1.0)
        }
    }

    fn density(self, y: f64) -> f64 {
        let d = self.delta;
        if y.abs() >= d {
            0.0
        } else {
            interp(&tables().phi, y / d).max(0.0) / d
        }
    }

    /// Antiderivative of `hinge`, with the closed quadratic branch past the
    /// transition.
    fn hinge_anti(self, y: f64) -> f64 {
        let d = self.delta;
        let t = tables();
        if y <= -d {
            0.0
        } else if y >= d {
            d * d * t.g2_end + 0.5 * (y * y - d * d)
        } else {
            d * d * interp(&t.g2, y / d).max(0.0)
        }
    }

    fn value(self, x: f64) -> f64 {
        if x <= self.lo {
            0.0
        } else if x >= self.hi {
            1.0
        } else {
            let a = self.lo + self.delta;
            let b = self.hi - self.delta;
            (self.slope * (self.hinge(x - a) - self.hinge(x - b))).clamp(0.0, 1.0)
        }
    }

    fn deriv(self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            0.0
        } else {
            let a = self.lo + self.delta;
            let b = self.hi - self.delta;
            self.slope * (self.cdf(x - a) - self.cdf(x - b))
        }
    }

    fn deriv2(self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            0.0
        } else {
            let a = self.lo + self.delta;
            let b = self.hi - self.delta;
            self.slope * (self.density(x - a) - self.density(x - b))
        }
    }

    /// ∫_{-∞}^x value.
    fn antideriv(self, x: f64) -> f64 {
        let a = self.lo + self.delta;
        let b = self.hi - self.delta;
        self.slope * (self.hinge_anti(x - a) - self.hinge_anti(x - b))
    }
}

/// Compactly supported plateau: `rise` minus `fall`, both ramps, with
/// rise.hi ≤ fall.lo so the plateau value is exactly 1.
#[derive(Debug, Clone, Copy)]
struct PlateauBump {
    rise: SmoothRamp,
    fall: SmoothRamp,
}

impl PlateauBump {
    fn value(self, x: f64) -> f64 {
        self.rise.value(x) - self.fall.value(x)
    }

    fn deriv(self, x: f64) -> f64 {
        self.rise.deriv(x) - self.fall.deriv(x)
    }

    fn deriv2(self, x: f64) -> f64 {
        self.rise.deriv2(x) - self.fall.deriv2(x)
    }

    fn antideriv(self, x: f64) -> f64 {
        self.rise.antideriv(x) - self.fall.antideriv(x)
    }
}

type WeightClosure = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A weight with analytic derivatives and the support hull of the first
/// derivative; immutable and cheap to clone.
#[derive(Clone)]
pub struct WeightFn {
    evaluate: WeightClosure,
    derivative: WeightClosure,
    second_derivative: WeightClosure,
    support_lo: f64,
    support_hi: f64,
}

impl std::fmt::Debug for WeightFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightFn")
            .field("support_lo", &self.support_lo)
            .field("support_hi", &self.support_hi)
            .finish_non_exhaustive()
    }
}

impl WeightFn {
    /// Constant weight; its derivative support is empty.
    pub fn constant(value: f64) -> WeightFn {
        WeightFn {
            evaluate: Arc::new(move |_| value),
            derivative: Arc::new(|_| 0.0),
            second_derivative: Arc::new(|_| 0.0),
            support_lo: 0.0,
            support_hi: 0.0,
        }
    }

    fn from_closures(
        evaluate: WeightClosure,
        derivative: WeightClosure,
        second_derivative: WeightClosure,
        support_lo: f64,
        support_hi: f64,
    ) -> WeightFn {
        WeightFn { evaluate, derivative, second_derivative, support_lo, support_hi }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        (self.evaluate)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        (self.second_derivative)(x)
    }

    /// Lower end of the derivative's support.
    pub fn support_lo(&self) -> f64 {
        self.support_lo
    }

    /// Upper end of the derivative's support.
    pub fn support_hi(&self) -> f64 {
        self.support_hi
    }
}

fn weight_from_ramp(ramp: SmoothRamp) -> WeightFn {
    WeightFn::from_closures(
        Arc::new(move |x| ramp.value(x)),
        Arc::new(move |x| ramp.deriv(x)),
        Arc::new(move |x| ramp.deriv2(x)),
        ramp.lo,
        ramp.hi,
    )
}

/// Bare monotone 0 -> 1 step across [lo, hi], mollified at a quarter of its
/// width; used by the initial-data module to cut rough fields off smoothly.
pub(crate) fn smooth_step(lo: f64, hi: f64) -> Result<WeightFn> {
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidWeight(format!("step needs lo < hi, got [{lo}, {hi}]")));
    }
    Ok(weight_from_ramp(SmoothRamp::spanning(lo, hi)))
}

fn validate_chi_geometry(eps: f64, b: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite() && b.is_finite()) {
        return Err(Error::InvalidWeight(format!("eps must be positive and finite, got {eps}")));
    }
    if b < 5.0 * eps {
        return Err(Error::InvalidWeight(format!("b = {b} violates b >= 5·eps = {}", 5.0 * eps)));
    }
    Ok(())
}

fn chi_ramp(eps: f64, b: f64) -> SmoothRamp {
    // Mollifier width eps/4 (half-width eps/8). The prescribed lower bound
    // 1/(b - 3eps) is stored as the plateau slope itself, attained exactly
    // on [eps + eps/4, b - 2eps] which contains [3eps, b - 2eps].
    let delta = eps / 8.0;
    SmoothRamp::with_slope(eps, b - 2.0 * eps + 2.0 * delta, delta, 1.0 / (b - 3.0 * eps))
}

/// Smooth monotone ramp χ_{ε,b}: zero up to ε, one from b - 7ε/4 onward,
/// with χ' ≥ 1/(b - 3ε) on [3ε, b - 2ε] and χ' supported in [ε, b].
pub fn build_chi(eps: f64, b: f64) -> Result<WeightFn> {
    validate_chi_geometry(eps, b)?;
    Ok(weight_from_ramp(chi_ramp(eps, b)))
}

fn short_ramp(eps: f64) -> SmoothRamp {
    // rises across [eps/4, eps/2]; 1 - this ramp is ψ_ε
    SmoothRamp::new(eps / 4.0, eps / 2.0, eps / 32.0)
}

/// Partition of unity χ + φ + ψ = 1 with supp(ψ) ⊆ (−∞, ε/2],
/// supp(φ) ⊆ [ε/4, b], and φ ≡ 1 on [ε/2, ε].
pub fn build_partition(eps: f64, b: f64) -> Result<(WeightFn, WeightFn, WeightFn)> {
    validate_chi_geometry(eps, b)?;
    let chi = chi_ramp(eps, b);
    let rho = short_ramp(eps);

    let phi = WeightFn::from_closures(
        Arc::new(move |x| rho.value(x) - chi.value(x)),
        Arc::new(move |x| rho.deriv(x) - chi.deriv(x)),
        Arc::new(move |x| rho.deriv2(x) - chi.deriv2(x)),
        rho.lo,
        chi.hi,
    );
    let psi = WeightFn::from_closures(
        Arc::new(move |x| 1.0 - rho.value(x)),
        Arc::new(move |x| -rho.deriv(x)),
        Arc::new(move |x| -rho.deriv2(x)),
        rho.lo,
        rho.hi,
    );
    Ok((weight_from_ramp(chi), phi, psi))
}

/// Power partition χ^k + φ̃^k + ψ = 1; φ̃ is the k-th root of the radicand
/// 1 - χ^k - ψ, with derivative queries on the radicand's zero set answered
/// by the one-sided limit 0.
pub fn build_power_partition(eps: f64, b: f64, k: u32) -> Result<(WeightFn, WeightFn, WeightFn)> {
    validate_chi_geometry(eps, b)?;
    if k < 2 {
        return Err(Error::InvalidWeight(format!("power partition needs k >= 2, got {k}")));
    }
    let chi = chi_ramp(eps, b);
    let rho = short_ramp(eps);
    let ki = k as i32;
    let kf = k as f64;

    let radicand = move |x: f64| {
        // 1 - χ^k - ψ = ρ - χ^k
        (rho.value(x) - chi.value(x).powi(ki)).max(0.0)
    };
    let radicand_d1 = move |x: f64| rho.deriv(x) - kf * chi.value(x).powi(ki - 1) * chi.deriv(x);
    let radicand_d2 = move |x: f64| {
        rho.deriv2(x)
            - kf * (kf - 1.0) * chi.value(x).powi(ki - 2) * chi.deriv(x) * chi.deriv(x)
            - kf * chi.value(x).powi(ki - 1) * chi.deriv2(x)
    };

    let phi_tilde = WeightFn::from_closures(
        Arc::new(move |x| radicand(x).powf(1.0 / kf)),
        Arc::new(move |x| {
            let r = radicand(x);
            if r <= RADICAND_FLOOR {
                0.0
            } else {
                r.powf(1.0 / kf - 1.0) * radicand_d1(x) / kf
            }
        }),
        Arc::new(move |x| {
            let r = radicand(x);
            if r <= RADICAND_FLOOR {
                0.0
            } else {
                let d1 = radicand_d1(x);
                (1.0 / kf) * (1.0 / kf - 1.0) * r.powf(1.0 / kf - 2.0) * d1 * d1
                    + (1.0 / kf) * r.powf(1.0 / kf - 1.0) * radicand_d2(x)
            }
        }),
        rho.lo,
        chi.hi,
    );
    let psi = WeightFn::from_closures(
        Arc::new(move |x| 1.0 - rho.value(x)),
        Arc::new(move |x| -rho.deriv(x)),
        Arc::new(move |x| -rho.deriv2(x)),
        rho.lo,
        rho.hi,
    );
    Ok((weight_from_ramp(chi), phi_tilde, psi))
}

fn weight_from_bump(bump: PlateauBump) -> WeightFn {
    WeightFn::from_closures(
        Arc::new(move |x| bump.value(x)),
        Arc::new(move |x| bump.deriv(x)),
        Arc::new(move |x| bump.deriv2(x)),
        bump.rise.lo,
        bump.fall.hi,
    )
}

/// Plateau cutoffs: θ ≡ 1 on [ε/5, b + ε/4] with support in [ε/6, b + ε/2],
/// and η ≡ 1 on [ε/7, b + 3ε/4] with support in [ε/8, b + ε], so that
/// η ≡ 1 on supp(θ) and θ ≡ 1 on supp((χ²)').
pub fn build_theta_eta(eps: f64, b: f64) -> Result<(WeightFn, WeightFn)> {
    validate_chi_geometry(eps, b)?;
    let theta = PlateauBump {
        rise: SmoothRamp::spanning(eps / 6.0, eps / 5.0),
        fall: SmoothRamp::new(b + eps / 4.0, b + eps / 2.0, eps / 20.0),
    };
    let eta = PlateauBump {
        rise: SmoothRamp::spanning(eps / 8.0, eps / 7.0),
        fall: SmoothRamp::new(b + 3.0 * eps / 4.0, b + eps, eps / 20.0),
    };
    Ok((weight_from_bump(theta), weight_from_bump(eta)))
}

/// Compactly supported plateau: mollified 0 → 1 rise across [rise_lo,
/// rise_hi], identically 1 up to fall_lo, mollified fall back to 0 by
/// fall_hi. The version of the one-sided ramps that is smooth on a periodic
/// domain, since the value returns to 0 before the wrap point.
pub fn build_plateau(
    rise_lo: f64,
    rise_hi: f64,
    fall_lo: f64,
    fall_hi: f64,
) -> Result<WeightFn> {
    let all_finite = [rise_lo, rise_hi, fall_lo, fall_hi].iter().all(|v| v.is_finite());
    if !all_finite || !(rise_lo < rise_hi && rise_hi <= fall_lo && fall_lo < fall_hi) {
        return Err(Error::InvalidWeight(format!(
            "plateau needs rise_lo < rise_hi <= fall_lo < fall_hi, got \
             [{rise_lo}, {rise_hi}] and [{fall_lo}, {fall_hi}]"
        )));
    }
    let bump = PlateauBump {
        rise: SmoothRamp::spanning(rise_lo, rise_hi),
        fall: SmoothRamp::spanning(fall_lo, fall_hi),
    };
    Ok(weight_from_bump(bump))
}

/// ψ_ℓ: the antiderivative, vanishing at -∞, of a plateau bump with
/// ψ_ℓ' ≡ 1 on [−2^{−ℓ}A, 2^{−ℓ}A] and supp(ψ_ℓ') ⊆ ±2^{−(ℓ−1/2)}A.
pub fn build_psi_sequence(a: f64, ell: u32) -> Result<WeightFn> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidWeight(format!("A must be positive, got {a}")));
    }
    if ell < 1 {
        return Err(Error::InvalidWeight("ell must be at least 1".into()));
    }
    let r_in = 0.5_f64.powi(ell as i32) * a;
    let r_out = r_in * std::f64::consts::SQRT_2;
    let bump = PlateauBump {
        rise: SmoothRamp::spanning(-r_out, -r_in),
        fall: SmoothRamp::spanning(r_in, r_out),
    };
    Ok(WeightFn::from_closures(
        Arc::new(move |x| bump.antideriv(x)),
        Arc::new(move |x| bump.value(x)),
        Arc::new(move |x| bump.deriv(x)),
        -r_out,
        r_out,
    ))
}

/// Weight acting at a moving position: value and derivatives composed with
/// x ↦ x + shift, support bounds moved by −shift.
pub fn translate(w: &WeightFn, shift: f64) -> WeightFn {
    let (e, d, d2) = (w.evaluate.clone(), w.derivative.clone(), w.second_derivative.clone());
    WeightFn {
        evaluate: Arc::new(move |x| e(x + shift)),
        derivative: Arc::new(move |x| d(x + shift)),
        second_derivative: Arc::new(move |x| d2(x + shift)),
        support_lo: w.support_lo - shift,
        support_hi: w.support_hi - shift,
    }
}
