//! Measured functionals: conserved quantities, Sobolev norms, and the
//! localized smoothing/propagation integrals the theorems bound.

use crate::evolve::Trajectory;
use crate::field::{inverse_transform, SpectralField};
use crate::ops::{bessel, derivative, fractional_a, riesz, OperatorKind};
use crate::params::ModelParams;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// ∫ u² dx via Parseval.
pub fn mass(field: &SpectralField) -> f64 {
    field.norm_sq()
}

/// E[u] = ½‖∂ₓᴺu‖² − (γ/2)‖|D|^{1/2}u‖² − ½Σₖ(−1)ᵏaₖ‖∂ₓᵏu‖²
///        − Σₖ bₖ/((k+1)(k+2)) ∫u^{k+2}.
pub fn energy(field: &SpectralField, params: &ModelParams) -> f64 {
    let mut e = 0.5 * derivative(field, params.n).norm_sq();
    if params.gamma != 0.0 {
        let half_d = riesz(field, 0.5).expect("riesz with s = 1/2 needs no mean-zero gate");
        e -= 0.5 * params.gamma * half_d.norm_sq();
    }
    for (idx, &ak) in params.a.iter().enumerate() {
        let k = (idx + 1) as u32;
        if ak != 0.0 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            e += 0.5 * sign * ak * derivative(field, k).norm_sq();
        }
    }
    if !params.is_linear() {
        let h = field.grid().spacing();
        let samples = inverse_transform(field);
        for (idx, &bk) in params.b.iter().enumerate() {
            let k = (idx + 1) as i32;
            if bk != 0.0 {
                let moment: f64 = samples.iter().map(|&u| u.powi(k + 2)).sum::<f64>() * h;
                e -= bk / ((k + 1) as f64 * (k + 2) as f64) * moment;
            }
        }
    }
    e
}

/// I[u] = ∫ u dx, read off the ξ = 0 coefficient.
pub fn integral_i(field: &SpectralField) -> f64 {
    field.grid().length() * field.mean_coefficient().re
}

/// ‖J^s u‖_{L²} via Parseval.
pub fn sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    let sum: f64 = field
        .coeffs()
        .iter()
        .zip(field.grid().wavenumbers())
        .map(|(c, &xi)| (1.0 + xi * xi).powf(s) * c.norm_sqr())
        .sum();
    (field.grid().length() * sum).sqrt()
}

fn require_nonempty(traj: &Trajectory) -> Result<()> {
    if traj.is_empty() {
        return Err(Error::InvalidArgument("trajectory holds no snapshots".into()));
    }
    Ok(())
}

/// Raised-cosine closure of the top half-band, applied to every lifted
/// snapshot before a spatial restriction. The windowed functionals lift by
/// more than the data's regularity, so the band-edge slots carry growing
/// random-phase mass; truncating them sharply at the Nyquist slot smears
/// that mass into a domain-wide 1/x floor that any window then reads as
/// local. Slots with |ξ| ≤ ξ_max/2 pass unchanged, so the tapered
/// functional converges to the same continuum value under refinement.
fn taper_band_edge(field: &SpectralField) -> SpectralField {
    let grid = field.grid();
    let nyquist = std::f64::consts::PI * grid.n() as f64 / grid.length();
    let coeffs = field
        .coeffs()
        .iter()
        .zip(grid.wavenumbers())
        .map(|(c, &xi)| {
            let t = xi.abs() / nyquist;
            if t <= 0.5 {
                *c
            } else {
                let w = (std::f64::consts::PI * (t - 0.5)).cos();
                c * (w * w)
            }
        })
        .collect();
    SpectralField::from_coeffs(grid.clone(), coeffs)
        .expect("an even real multiplier keeps the coefficient layout valid")
}

/// h·Σ over grid nodes passing the indicator; the sharp-interval surrogate
/// for ∫ w² over the window.
fn restricted_mass(field: &SpectralField, indicator: impl Fn(f64) -> bool) -> f64 {
    let samples = inverse_transform(field);
    let h = field.grid().spacing();
    field
        .grid()
        .nodes()
        .iter()
        .zip(&samples)
        .filter(|(&x, _)| indicator(x))
        .map(|(_, &u)| u * u)
        .sum::<f64>()
        * h
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (v[0] + v[1]) * (t[1] - t[0]))
        .sum()
}

fn prefix_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..values.len() {
        acc += 0.5 * (values[i - 1] + values[i]) * (times[i] - times[i - 1]);
        out.push(acc);
    }
    out
}

fn check_cut(traj: &Trajectory, t: f64, cut: f64) -> Result<()> {
    let half = 0.5 * traj.grid().length();
    if !(-half..=half).contains(&cut) {
        return Err(Error::WindowExitsDomain { t, cut });
    }
    Ok(())
}

/// ∫₀ᵀ∫_{−R}^{R} (Aʳu)² dx dt: snapshot-wise symbol application, sharp
/// restriction to [−R, R], trapezoid in t over the snapshot times.
pub fn kato_functional(traj: &Trajectory, r: f64, big_r: f64, kind: OperatorKind) -> Result<f64> {
    let values = kato_window_values(traj, r, big_r, kind)?;
    Ok(trapezoid(&traj.times, &values))
}

fn kato_window_values(
    traj: &Trajectory,
    r: f64,
    big_r: f64,
    kind: OperatorKind,
) -> Result<Vec<f64>> {
    require_nonempty(traj)?;
    if r < 0.0 {
        return Err(Error::InvalidArgument(format!("kato functional needs r >= 0, got {r}")));
    }
    if !(big_r > 0.0 && big_r < 0.5 * traj.grid().length()) {
        return Err(Error::InvalidArgument(format!(
            "window radius R = {big_r} must lie in (0, L/2)"
        )));
    }
    traj.snapshots
        .iter()
        .map(|snap| {
            let w = taper_band_edge(&fractional_a(snap, r, kind)?);
            Ok(restricted_mass(&w, |x| x.abs() <= big_r))
        })
        .collect()
}

/// sup over snapshot times of ∫_{x0+ε−vt}^{∞} (Jʳu)² dx.
pub fn propagation_functional(
    traj: &Trajectory,
    r: f64,
    x0: f64,
    eps: f64,
    v: f64,
) -> Result<f64> {
    let values = propagation_values(traj, r, x0, eps, v, false)?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// sup over snapshot times of the mirrored window ∫_{−∞}^{x0−ε+vt} (Jʳu)² dx,
/// tracking the left half-line the propagation window vacates.
pub fn mirror_propagation_functional(
    traj: &Trajectory,
    r: f64,
    x0: f64,
    eps: f64,
    v: f64,
) -> Result<f64> {
    let values = propagation_values(traj, r, x0, eps, v, true)?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

fn propagation_values(
    traj: &Trajectory,
    r: f64,
    x0: f64,
    eps: f64,
    v: f64,
    mirrored: bool,
) -> Result<Vec<f64>> {
    require_nonempty(traj)?;
    if !(eps > 0.0 && v > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "propagation window needs eps > 0 and v > 0, got eps = {eps}, v = {v}"
        )));
    }
    traj.times
        .iter()
        .zip(&traj.snapshots)
        .map(|(&t, snap)| {
            let cut = if mirrored { x0 - eps + v * t } else { x0 + eps - v * t };
            check_cut(traj, t, cut)?;
            let w = taper_band_edge(&bessel(snap, r));
            Ok(restricted_mass(&w, |x| if mirrored { x <= cut } else { x >= cut }))
        })
        .collect()
}

/// ∫₀ᵀ ∫_{x0+ε−vt}^{x0+R−vt} (J^{m+N}u)² dx dt over the moving window.
pub fn window_smoothing_functional(
    traj: &Trajectory,
    m: f64,
    x0: f64,
    eps: f64,
    big_r: f64,
    v: f64,
) -> Result<f64> {
    let values = window_smoothing_values(traj, m, x0, eps, big_r, v)?;
    Ok(trapezoid(&traj.times, &values))
}

fn window_smoothing_values(
    traj: &Trajectory,
    m: f64,
    x0: f64,
    eps: f64,
    big_r: f64,
    v: f64,
) -> Result<Vec<f64>> {
    require_nonempty(traj)?;
    if !(eps > 0.0 && v > 0.0 && big_r > eps) {
        return Err(Error::InvalidArgument(format!(
            "smoothing window needs eps > 0, v > 0 and R > eps; got eps = {eps}, R = {big_r}, v = {v}"
        )));
    }
    let order = m + traj.params.n as f64;
    traj.times
        .iter()
        .zip(&traj.snapshots)
        .map(|(&t, snap)| {
            let lo = x0 + eps - v * t;
            let hi = x0 + big_r - v * t;
            check_cut(traj, t, lo)?;
            check_cut(traj, t, hi)?;
            let w = taper_band_edge(&bessel(snap, order));
            Ok(restricted_mass(&w, |x| (lo..=hi).contains(&x)))
        })
        .collect()
}

fn decay_weighted_value(field: &SpectralField, r: f64, s: f64, delta: f64) -> f64 {
    let power = (r - s).floor() + 1.0 + delta;
    let w = taper_band_edge(&bessel(field, r));
    let samples = inverse_transform(&w);
    let h = field.grid().spacing();
    field
        .grid()
        .nodes()
        .iter()
        .zip(&samples)
        .map(|(&x, &u)| {
            let xm = (-x).max(0.0);
            u * u * (1.0 + xm * xm).powf(-0.5 * power)
        })
        .sum::<f64>()
        * h
}

/// ∫ ⟨x₋⟩^{−(⌊r−s⌋+1+δ)} (Jʳu)² dx with x₋ = max{0, −x}; multiply by t to
/// test the C/t decay bound.
pub fn decay_weighted_functional(field: &SpectralField, r: f64, s: f64, delta: f64, t: f64) -> f64 {
    assert!(delta > 0.0, "delta must be positive");
    assert!(r > s, "decay weight needs r > s");
    assert!(t > 0.0, "decay bound is stated for t > 0");
    decay_weighted_value(field, r, s, delta)
}

/// One named functional with its parameters, as requested in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalSpec {
    Mass,
    Energy,
    IntegralI,
    Sobolev { s: f64 },
    Kato {
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
        kind: OperatorKind,
    },
    Propagation { r: f64, x0: f64, eps: f64, v: f64 },
    MirrorPropagation { r: f64, x0: f64, eps: f64, v: f64 },
    WindowSmoothing {
        m: f64,
        x0: f64,
        eps: f64,
        #[serde(rename = "R")]
        big_r: f64,
        v: f64,
    },
    DecayWeighted { r: f64, s: f64, delta: f64 },
}

impl FunctionalSpec {
    /// Column label; parameters are embedded so sweeps over them stay
    /// distinguishable in one table.
    pub fn name(&self) -> String {
        match self {
            FunctionalSpec::Mass => "mass".into(),
            FunctionalSpec::Energy => "energy".into(),
            FunctionalSpec::IntegralI => "I".into(),
            FunctionalSpec::Sobolev { s } => format!("sobolev[s={s}]"),
            FunctionalSpec::Kato { r, big_r, kind } => {
                format!("kato[kind={} r={r} R={big_r}]", kind.label())
            }
            FunctionalSpec::Propagation { r, x0, eps, v } => {
                format!("prop[r={r} x0={x0} eps={eps} v={v}]")
            }
            FunctionalSpec::MirrorPropagation { r, x0, eps, v } => {
                format!("mirror[r={r} x0={x0} eps={eps} v={v}]")
            }
            FunctionalSpec::WindowSmoothing { m, x0, eps, big_r, v } => {
                format!("window[m={m} x0={x0} eps={eps} R={big_r} v={v}]")
            }
            FunctionalSpec::DecayWeighted { r, s, delta } => {
                format!("decay[r={r} s={s} delta={delta}]")
            }
        }
    }

    /// Whether the column carries a running time integral (final row is the
    /// headline value) rather than per-snapshot readings.
    pub fn is_cumulative(&self) -> bool {
        matches!(self, FunctionalSpec::Kato { .. } | FunctionalSpec::WindowSmoothing { .. })
    }

    fn column(&self, traj: &Trajectory) -> Result<Vec<f64>> {
        let per_snapshot = |f: &dyn Fn(&SpectralField) -> f64| {
            traj.snapshots.iter().map(|s| f(s)).collect::<Vec<f64>>()
        };
        Ok(match self {
            FunctionalSpec::Mass => per_snapshot(&mass),
            FunctionalSpec::Energy => per_snapshot(&|f| energy(f, &traj.params)),
            FunctionalSpec::IntegralI => per_snapshot(&integral_i),
            FunctionalSpec::Sobolev { s } => per_snapshot(&|f| sobolev_norm(f, *s)),
            FunctionalSpec::Kato { r, big_r, kind } => {
                let values = kato_window_values(traj, *r, *big_r, *kind)?;
                prefix_trapezoid(&traj.times, &values)
            }
            FunctionalSpec::Propagation { r, x0, eps, v } => {
                propagation_values(traj, *r, *x0, *eps, *v, false)?
            }
            FunctionalSpec::MirrorPropagation { r, x0, eps, v } => {
                propagation_values(traj, *r, *x0, *eps, *v, true)?
            }
            FunctionalSpec::WindowSmoothing { m, x0, eps, big_r, v } => {
                let values = window_smoothing_values(traj, *m, *x0, *eps, *big_r, *v)?;
                prefix_trapezoid(&traj.times, &values)
            }
            FunctionalSpec::DecayWeighted { r, s, delta } => {
                per_snapshot(&|f| decay_weighted_value(f, *r, *s, *delta))
            }
        })
    }
}

/// Run context carried with a series so its CSV is self-describing.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesMeta {
    pub params: ModelParams,
    pub length: f64,
    pub n: usize,
    pub specs: Vec<FunctionalSpec>,
}

/// Functional values tabulated against snapshot times, one column per spec.
#[derive(Debug, Clone)]
pub struct DiagnosticSeries {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// rows[i][j] = functional j evaluated at times[i]
    pub rows: Vec<Vec<f64>>,
    pub meta: SeriesMeta,
}

impl DiagnosticSeries {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|row| row[j]).collect()
    }
}

/// Evaluates every requested functional along the trajectory.
pub fn collect(traj: &Trajectory, specs: &[FunctionalSpec]) -> Result<DiagnosticSeries> {
    require_nonempty(traj)?;
    let mut columns = Vec::with_capacity(specs.len());
    for spec in specs {
        let col = spec.column(traj)?;
        if let Some(bad) = col.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "functional {} produced a non-finite value {bad}",
                spec.name()
            )));
        }
        columns.push(col);
    }
    let rows: Vec<Vec<f64>> = (0..traj.times.len())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    Ok(DiagnosticSeries {
        times: traj.times.clone(),
        names: specs.iter().map(|s| s.name()).collect(),
        rows,
        meta: SeriesMeta {
            params: traj.params.clone(),
            length: traj.grid().length(),
            n: traj.grid().n(),
            specs: specs.to_vec(),
        },
    })
}
