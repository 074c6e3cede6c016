//! Decay analyzers on cones: Fourier-Lebesgue seminorms, λ-fits for the Roumieu and
//! Beurling scales, the cut-off sequence test for quasianalytic classes, and the
//! assembly of wave front set estimates over seed points and direction grids.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{direction_grid, direction_grid_gap, require_separation, Cone, Lattice};
use crate::localize::{CutoffFamily, LocalizedSpectrum, Spectrum, TensorTaper, TestDistribution, Window};
use crate::numerics::{composite_rule, least_squares, log_sum_exp, norm, GaussLegendre};
use crate::weights::{ModerateFit, WeightFunction, WeightKind, WeightSequence};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct Radii {
    pub r_min: f64,
    pub r_max: f64,
    /// Geometric sub-shells per octave used by the λ-fits.
    pub shells_per_octave: usize,
}

impl Default for Radii {
    fn default() -> Self {
        Self { r_min: 8.0, r_max: 128.0, shells_per_octave: 3 }
    }
}

impl Radii {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_max >= 2.0 * self.r_min && self.r_max.is_finite()) {
            return Err(Error::Invalid(format!(
                "radii need 0 < r_min and r_max >= 2 r_min, got {} and {}",
                self.r_min, self.r_max
            )));
        }
        if self.shells_per_octave == 0 {
            return Err(Error::Invalid("shells_per_octave must be positive".into()));
        }
        Ok(())
    }

    pub fn octaves(&self) -> usize {
        ((self.r_max / self.r_min).log2() - 1e-12).ceil().max(1.0) as usize
    }

    pub fn sub_shells(&self) -> usize {
        ((self.r_max / self.r_min).log2() * self.shells_per_octave as f64 - 1e-9).ceil().max(1.0) as usize
    }

    fn in_range(&self, r: f64) -> bool {
        r >= self.r_min && r <= self.r_max * (1.0 + 1e-12)
    }

    /// Octave index k with r in [2^k r_min, 2^{k+1} r_min); the outermost shell is closed.
    pub fn octave(&self, r: f64) -> usize {
        let k = (r / self.r_min).log2().floor().max(0.0) as usize;
        k.min(self.octaves() - 1)
    }

    pub fn sub_shell(&self, r: f64) -> usize {
        let k = ((r / self.r_min).log2() * self.shells_per_octave as f64).floor().max(0.0) as usize;
        k.min(self.sub_shells() - 1)
    }

    fn sub_shell_bounds(&self, j: usize) -> (f64, f64) {
        let s = self.shells_per_octave as f64;
        let lo = self.r_min * 2f64.powf(j as f64 / s);
        let hi = (self.r_min * 2f64.powf((j + 1) as f64 / s)).min(self.r_max);
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub lambda_min: f64,
    /// Relative band around the window floor slope inside which a fit counts as floor-bound.
    pub floor_band: f64,
    /// C_cap as a multiple of the median Ĉ_p over p in [4, p_max].
    pub c_cap_factor: f64,
    /// Shell-max increase of at least this times p·log 2 counts as geometric growth.
    pub geometric: f64,
    /// Seminorm verdicts: Regular when the outer-shell share stays below this.
    pub tail_ratio: f64,
    /// Relative growth per octave of the local slopes required by the Beurling trend.
    pub beurling_growth: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            lambda_min: 0.05,
            floor_band: 0.2,
            c_cap_factor: 10.0,
            geometric: 0.5,
            tail_ratio: 0.25,
            beurling_growth: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularityVerdict {
    Regular,
    Singular,
    Indeterminate,
}

/// One sampled value |φf^(μ)| stored as its logarithm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySample {
    pub point: Vec<f64>,
    pub norm: f64,
    pub log_modulus: f64,
    /// floor(log2(|μ| / r_min)); negative inside the inner radius.
    pub shell: i64,
}

impl DecaySample {
    pub fn new(point: Vec<f64>, value: Complex64, r_min: f64) -> Self {
        let n = norm(&point);
        Self { shell: (n / r_min).log2().floor() as i64, norm: n, log_modulus: value.norm().ln(), point }
    }
}

/// What a verdict was measured against. `q: None` stands for q = ∞.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnalysisMode {
    FourierLebesgue { q: Option<f64>, v: String },
    Roumieu { omega: String },
    Beurling { omega: String },
    Quasianalytic { sequence: String },
    SupFamily,
    InfFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MicroRegularityVerdict {
    pub mode: AnalysisMode,
    pub verdict: RegularityVerdict,
    /// λ̂, sup Ĉ_p or the seminorm value, depending on the mode.
    pub estimate: Option<f64>,
    pub band: Option<f64>,
    /// Slope of the window alone on the same samples.
    pub floor: Option<f64>,
    pub floor_bound: bool,
    pub truncation_radius: f64,
    pub residual_rms: Option<f64>,
    pub tail_ratio: Option<f64>,
}

impl MicroRegularityVerdict {
    fn bare(mode: AnalysisMode, verdict: RegularityVerdict, r: f64) -> Self {
        Self {
            mode,
            verdict,
            estimate: None,
            band: None,
            floor: None,
            floor_bound: false,
            truncation_radius: r,
            residual_rms: None,
            tail_ratio: None,
        }
    }
}

pub fn weight_label(w: &WeightFunction) -> String {
    match &w.kind {
        WeightKind::Log => "log".into(),
        WeightKind::Gevrey { s } => format!("gevrey({s})"),
        WeightKind::Tabulated { radii, .. } => format!("tabulated({} rows)", radii.len()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModerateSpec {
    One,
    /// (1 + |ξ|)^s
    Polynomial { s: f64 },
    /// e^{λ ω(ξ)}
    ExpOmega { lambda: f64 },
}

/// An ω-moderate weight v with the constants of v(ξ+η) ≤ C v(ξ) e^{λ ω(η)}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModerateWeight {
    pub spec: ModerateSpec,
    pub omega: WeightFunction,
    pub constants: ModerateFit,
}

impl ModerateWeight {
    pub fn one() -> Self {
        Self { spec: ModerateSpec::One, omega: WeightFunction::log(), constants: ModerateFit { c: 1.0, lambda: 0.0 } }
    }

    /// Constants follow from subadditivity of ω and the lower bound ω ≥ a + C log(1+|ξ|).
    pub fn new(spec: ModerateSpec, omega: WeightFunction) -> Result<Self> {
        let constants = match &spec {
            ModerateSpec::One => ModerateFit { c: 1.0, lambda: 0.0 },
            ModerateSpec::ExpOmega { lambda } => {
                if !lambda.is_finite() {
                    return Err(Error::NotModerate(format!("lambda = {lambda}")));
                }
                ModerateFit { c: 1.0, lambda: lambda.abs() }
            }
            ModerateSpec::Polynomial { s } => {
                let (a, c) = omega.gamma;
                if !(c > 0.0) || !s.is_finite() {
                    return Err(Error::NotModerate(format!(
                        "(1+|xi|)^{s} needs omega >= a + C log(1+|xi|) with C > 0"
                    )));
                }
                let lambda = s.abs() / c;
                ModerateFit { c: (-a * lambda).exp().max(1.0), lambda }
            }
        };
        Ok(Self { spec, omega, constants })
    }

    pub fn log_value(&self, xi: &[f64]) -> Result<f64> {
        Ok(match &self.spec {
            ModerateSpec::One => 0.0,
            ModerateSpec::Polynomial { s } => s * norm(xi).ln_1p(),
            ModerateSpec::ExpOmega { lambda } => lambda * self.omega.eval(xi)?,
        })
    }

    pub fn label(&self) -> String {
        match &self.spec {
            ModerateSpec::One => "1".into(),
            ModerateSpec::Polynomial { s } => format!("(1+|xi|)^{s}"),
            ModerateSpec::ExpOmega { lambda } => format!("exp({lambda} {})", weight_label(&self.omega)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Seminorm {
    pub value: f64,
    pub log_value: f64,
    /// Share of the outermost shell [R/2, R] in the q-th power of the norm.
    pub tail_ratio: f64,
    pub count: usize,
}

/// Terms are (|ξ|, log of the integrand, log of the quadrature weight).
fn combine(terms: &[(f64, f64, f64)], q: Option<f64>, r: f64) -> Seminorm {
    let outer = |t: &&(f64, f64, f64)| t.0 >= 0.5 * r;
    match q {
        None => {
            let all = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
            let last = terms.iter().filter(outer).map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
            let tail = if all.is_finite() { (last - all).exp() } else { 0.0 };
            Seminorm { value: all.exp(), log_value: all, tail_ratio: tail, count: terms.len() }
        }
        Some(q) => {
            let all: Vec<f64> = terms.iter().map(|t| q * t.1 + t.2).collect();
            let last: Vec<f64> = terms.iter().filter(outer).map(|t| q * t.1 + t.2).collect();
            let la = log_sum_exp(&all);
            let ll = log_sum_exp(&last);
            let tail = if la.is_finite() { (ll - la).exp() } else { 0.0 };
            Seminorm { value: (la / q).exp(), log_value: la / q, tail_ratio: tail, count: terms.len() }
        }
    }
}

fn check_q(q: Option<f64>) -> Result<()> {
    match q {
        Some(q) if !(q >= 1.0 && q.is_finite()) => Err(Error::Invalid(format!("q must be >= 1 or infinite, got {q}"))),
        _ => Ok(()),
    }
}

/// ‖(v(μ) φf^(μ))_{μ ∈ Γ∩Λ, |μ| ≤ R}‖_{l^q}.
pub fn fl_seminorm_lattice(
    ls: &dyn Spectrum,
    cone: &Cone,
    lattice: &Lattice,
    v: &ModerateWeight,
    q: Option<f64>,
    r: f64,
) -> Result<Seminorm> {
    check_q(q)?;
    let pts = lattice.enumerate_in_cone(cone, 0.0, r)?;
    if pts.is_empty() {
        return Err(Error::EmptyCone { r_min: 0.0, r_max: r });
    }
    let xs: Vec<Vec<f64>> = pts.iter().map(|p| p.x.clone()).collect();
    let vals = ls.eval_many(&xs)?;
    let terms = pts
        .iter()
        .zip(&vals)
        .map(|(p, c)| Ok((p.norm, v.log_value(&p.x)? + c.norm().ln(), 0.0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(&terms, q, r))
}

/// ‖v ĝ‖_{L^q(Γ ∩ B_R)} by radial Gauss–Legendre panels times an angular rule (d ≤ 2).
pub fn fl_seminorm_continuous(
    ls: &dyn Spectrum,
    cone: &Cone,
    v: &ModerateWeight,
    q: Option<f64>,
    r: f64,
) -> Result<Seminorm> {
    check_q(q)?;
    if !(r > 0.0) {
        return Err(Error::Invalid(format!("radius must be positive, got {r}")));
    }
    let d = cone.dim();
    let gl = GaussLegendre::new(8);
    // split at R/2 so every node sits on one side of the tail boundary
    let panels = (r / 2.0).ceil().max(1.0) as usize;
    let (mut rs, mut rw) = composite_rule(0.0, 0.5 * r, panels, &gl);
    let (rs2, rw2) = composite_rule(0.5 * r, r, panels, &gl);
    rs.extend(rs2);
    rw.extend(rw2);
    let mut nodes: Vec<(Vec<f64>, f64, f64)> = Vec::new();
    match d {
        1 => {
            let s = cone.axis[0].signum();
            for (&x, &w) in rs.iter().zip(&rw) {
                nodes.push((vec![s * x], x, w));
            }
        }
        2 => {
            let th = cone.half_angle;
            let base = cone.axis[1].atan2(cone.axis[0]);
            let ap = (2.0 * th / (PI / 32.0)).ceil().max(1.0) as usize;
            let (ang, aw) = composite_rule(-th, th, ap, &gl);
            for (&x, &w) in rs.iter().zip(&rw) {
                for (&a, &wa) in ang.iter().zip(&aw) {
                    let t = base + a;
                    nodes.push((vec![x * t.cos(), x * t.sin()], x, w * wa * x));
                }
            }
        }
        _ => return Err(Error::Unsupported { dim: d, cap: 2 }),
    }
    let xs: Vec<Vec<f64>> = nodes.iter().map(|n| n.0.clone()).collect();
    let vals = ls.eval_many(&xs)?;
    let terms = nodes
        .iter()
        .zip(&vals)
        .map(|((x, rad, w), c)| Ok((*rad, v.log_value(x)? + c.norm().ln(), w.ln())))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(&terms, q, r))
}

/// Where the λ-fits draw their samples from.
#[derive(Debug, Clone)]
pub enum Sampling {
    Lattice(Lattice),
    /// Radial lines at midpoint angles across the cone (d ≤ 2).
    Continuous { radial_step: f64, angles: usize },
}

impl Sampling {
    pub fn continuous() -> Self {
        Sampling::Continuous { radial_step: 0.25, angles: 33 }
    }

    pub fn points(&self, cone: &Cone, r_min: f64, r_max: f64) -> Result<Vec<Vec<f64>>> {
        let pts: Vec<Vec<f64>> = match self {
            Sampling::Lattice(l) => l.enumerate_in_cone(cone, r_min, r_max)?.into_iter().map(|p| p.x).collect(),
            Sampling::Continuous { radial_step, angles } => {
                if !(*radial_step > 0.0) || *angles == 0 {
                    return Err(Error::Invalid("continuous sampling needs a positive step and angle count".into()));
                }
                let n = ((r_max - r_min) / radial_step).floor() as usize;
                let radii: Vec<f64> = (0..=n).map(|i| r_min + i as f64 * radial_step).collect();
                match cone.dim() {
                    1 => radii.iter().map(|&r| vec![r * cone.axis[0].signum()]).collect(),
                    2 => {
                        let base = cone.axis[1].atan2(cone.axis[0]);
                        let th = cone.half_angle;
                        let mut out = Vec::with_capacity(radii.len() * angles);
                        for &r in &radii {
                            for j in 0..*angles {
                                let a = base + th * (-1.0 + (2 * j + 1) as f64 / *angles as f64);
                                out.push(vec![r * a.cos(), r * a.sin()]);
                            }
                        }
                        out
                    }
                    d => return Err(Error::Unsupported { dim: d, cap: 2 }),
                }
            }
        };
        if pts.is_empty() {
            return Err(Error::EmptyCone { r_min, r_max });
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellMax {
    pub index: usize,
    pub r_lo: f64,
    pub r_hi: f64,
    /// |μ| at the maximizer.
    pub r: f64,
    pub log_max: f64,
}

/// Maxima of log-moduli over the sub-shells of [r_min, r_max]; empty or vanishing shells are skipped.
pub fn shell_maxima(samples: &[(f64, f64)], radii: &Radii) -> Vec<ShellMax> {
    let n = radii.sub_shells();
    let mut best: Vec<Option<(f64, f64)>> = vec![None; n];
    for &(r, lm) in samples {
        if !radii.in_range(r) || !(lm > f64::NEG_INFINITY) {
            continue;
        }
        let j = radii.sub_shell(r);
        // ties go to the smaller radius
        let better = match best[j] {
            None => true,
            Some((br, bl)) => lm > bl || (lm == bl && r < br),
        };
        if better {
            best[j] = Some((r, lm));
        }
    }
    best.iter()
        .enumerate()
        .filter_map(|(j, b)| {
            b.map(|(r, lm)| {
                let (lo, hi) = radii.sub_shell_bounds(j);
                ShellMax { index: j, r_lo: lo, r_hi: hi, r, log_max: lm }
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaFit {
    pub lambda: f64,
    /// Two standard errors of λ̂.
    pub band: f64,
    pub intercept: f64,
    /// Coefficient of −log(1+|ξ|) when the three-parameter model is used.
    pub kappa: Option<f64>,
    pub residuals: Vec<f64>,
    pub residual_rms: f64,
}

/// log m ≈ a − λ ω(r) − κ log(1+r) with λ, κ ≥ 0; κ is dropped when ω is logarithmic.
/// A negative exponent in the free fit is pinned to zero and the rest refitted.
pub fn fit_lambda(shells: &[ShellMax], omega: &WeightFunction) -> Result<LambdaFit> {
    if shells.len() < 3 {
        return Err(Error::InsufficientData(format!("{} nonzero shells, need at least 3", shells.len())));
    }
    let om = shells.iter().map(|s| omega.radial(s.r)).collect::<Result<Vec<f64>>>()?;
    let y: Vec<f64> = shells.iter().map(|s| s.log_max).collect();
    let solve = |use_l: bool, use_k: bool| -> Result<(f64, f64, f64, f64, crate::numerics::LeastSquares)> {
        let rows: Vec<Vec<f64>> = shells
            .iter()
            .zip(&om)
            .map(|(s, &w)| {
                let mut row = vec![1.0];
                if use_l {
                    row.push(-w);
                }
                if use_k {
                    row.push(-s.r.ln_1p());
                }
                row
            })
            .collect();
        let ls = least_squares(&rows, &y).ok_or_else(|| Error::InsufficientData("degenerate shell radii".into()))?;
        let (l, band) = if use_l { (ls.coef[1], 2.0 * ls.std_err[1]) } else { (0.0, 0.0) };
        let k = if use_k { ls.coef[if use_l { 2 } else { 1 }] } else { 0.0 };
        Ok((ls.coef[0], l, k, band, ls))
    };
    let three = !omega.is_logarithmic() && shells.len() >= 4;
    let mut fit = solve(true, three)?;
    if three && fit.2 < 0.0 {
        fit = solve(true, false)?;
    }
    if fit.1 < 0.0 {
        fit = solve(false, three)?;
        if fit.2 < 0.0 {
            fit = solve(false, false)?;
        }
    }
    let (intercept, lambda, kappa, band, ls) = fit;
    Ok(LambdaFit {
        lambda,
        band,
        intercept,
        kappa: three.then_some(kappa),
        residuals: ls.residuals,
        residual_rms: ls.rms,
    })
}

/// −Δ log m / Δ ω between every pair of shells one octave apart inside the top `octaves`
/// octaves, as (r at the inner shell, slope).
pub fn octave_slopes(
    shells: &[ShellMax],
    radii: &Radii,
    omega: &WeightFunction,
    octaves: usize,
) -> Result<Vec<(f64, f64)>> {
    let spo = radii.shells_per_octave;
    let n = radii.sub_shells();
    let first = n.saturating_sub(1 + octaves * spo);
    let at = |j: usize| shells.iter().find(|s| s.index == j);
    let mut out = Vec::new();
    for j in first..n.saturating_sub(spo) {
        if let (Some(a), Some(b)) = (at(j), at(j + spo)) {
            out.push((a.r, -(b.log_max - a.log_max) / (omega.radial(b.r)? - omega.radial(a.r)?)));
        }
    }
    Ok(out)
}

/// Relative growth per octave of the octave slopes, from a line fit against log2 r.
pub fn slope_trend(slopes: &[(f64, f64)]) -> Option<(f64, f64)> {
    if slopes.len() < 3 {
        return None;
    }
    let rows: Vec<Vec<f64>> = slopes.iter().map(|(r, _)| vec![1.0, r.log2()]).collect();
    let y: Vec<f64> = slopes.iter().map(|s| s.1).collect();
    let fit = least_squares(&rows, &y)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    Some((mean, fit.coef[1] / mean.abs().max(1e-300)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaAnalysis {
    pub fit: Option<LambdaFit>,
    pub floor_fit: Option<LambdaFit>,
    pub local_slopes: Vec<(f64, f64)>,
    pub floor_slopes: Vec<(f64, f64)>,
    pub roumieu: MicroRegularityVerdict,
    pub beurling: MicroRegularityVerdict,
    pub shells: Vec<ShellMax>,
}

/// Slopes still rising: the decay outruns every fixed e^{−λω} seen so far.
fn increasing(slopes: &[(f64, f64)], th: &Thresholds) -> Option<bool> {
    slope_trend(slopes).map(|(mean, growth)| mean > th.lambda_min && growth >= th.beurling_growth)
}

/// Roumieu and Beurling decisions from sampled log-moduli and, optionally, the window's own.
pub fn decide_lambda(
    samples: &[(f64, f64)],
    floor: Option<&[(f64, f64)]>,
    omega: &WeightFunction,
    radii: &Radii,
    th: &Thresholds,
) -> Result<LambdaAnalysis> {
    let label = weight_label(omega);
    let r = radii.r_max;
    let tail = outer_share(samples, radii);
    let shells = shell_maxima(samples, radii);
    if shells.is_empty() {
        // identically zero in the cone: nothing to be singular about
        let mut ro = MicroRegularityVerdict::bare(AnalysisMode::Roumieu { omega: label.clone() }, RegularityVerdict::Regular, r);
        ro.tail_ratio = Some(0.0);
        let mut be = ro.clone();
        be.mode = AnalysisMode::Beurling { omega: label };
        return Ok(LambdaAnalysis {
            fit: None,
            floor_fit: None,
            local_slopes: vec![],
            floor_slopes: vec![],
            roumieu: ro,
            beurling: be,
            shells,
        });
    }
    let fit = fit_lambda(&shells, omega)?;
    let slopes = octave_slopes(&shells, radii, omega, 3)?;
    let (floor_fit, floor_slopes) = match floor {
        Some(f) => {
            let fs = shell_maxima(f, radii);
            (Some(fit_lambda(&fs, omega)?), octave_slopes(&fs, radii, omega, 3)?)
        }
        None => (None, vec![]),
    };
    let lam = fit.lambda;
    let floor_lambda = floor_fit.as_ref().map(|f| f.lambda);
    let floor_bound = floor_lambda.is_some_and(|fl| fl > 0.0 && lam >= (1.0 - th.floor_band) * fl);

    let roumieu = if floor_bound {
        // the fit only sees the window; it certifies at most the floor slope
        if floor_lambda.unwrap() >= 2.0 * th.lambda_min {
            RegularityVerdict::Regular
        } else {
            RegularityVerdict::Indeterminate
        }
    } else if lam < th.lambda_min {
        RegularityVerdict::Singular
    } else if lam >= 2.0 * th.lambda_min {
        RegularityVerdict::Regular
    } else {
        RegularityVerdict::Indeterminate
    };

    let beurling = if lam < th.lambda_min && !floor_bound {
        RegularityVerdict::Singular
    } else {
        match (increasing(&slopes, th), floor_bound) {
            (Some(true), _) => RegularityVerdict::Regular,
            (_, true) => match increasing(&floor_slopes, th) {
                Some(true) => RegularityVerdict::Regular,
                _ => RegularityVerdict::Indeterminate,
            },
            // slopes settle: decay like e^{−λω} for bounded λ only
            (Some(false), false) => RegularityVerdict::Singular,
            (None, false) => RegularityVerdict::Indeterminate,
        }
    };

    let make = |mode: AnalysisMode, verdict| MicroRegularityVerdict {
        mode,
        verdict,
        estimate: Some(lam),
        band: Some(fit.band),
        floor: floor_lambda,
        floor_bound,
        truncation_radius: r,
        residual_rms: Some(fit.residual_rms),
        tail_ratio: Some(tail),
    };
    Ok(LambdaAnalysis {
        roumieu: make(AnalysisMode::Roumieu { omega: label.clone() }, roumieu),
        beurling: make(AnalysisMode::Beurling { omega: label }, beurling),
        fit: Some(fit),
        floor_fit,
        local_slopes: slopes,
        floor_slopes,
        shells,
    })
}

/// max over the outermost octave divided by the max over [r_min, r_max].
fn outer_share(samples: &[(f64, f64)], radii: &Radii) -> f64 {
    let mut all = f64::NEG_INFINITY;
    let mut last = f64::NEG_INFINITY;
    for &(r, lm) in samples {
        if !radii.in_range(r) {
            continue;
        }
        all = all.max(lm);
        if r >= 0.5 * radii.r_max {
            last = last.max(lm);
        }
    }
    if all.is_finite() {
        (last - all).exp()
    } else {
        0.0
    }
}

/// λ̂ from the shell maxima of |φf^| on Γ; `floor` is the window whose own decay caps the fit.
pub fn lambda_fit(
    ls: &dyn Spectrum,
    cone: &Cone,
    sampling: &Sampling,
    omega: &WeightFunction,
    radii: &Radii,
    th: &Thresholds,
    floor: Option<&TensorTaper>,
) -> Result<LambdaAnalysis> {
    radii.validate()?;
    let pts = sampling.points(cone, radii.r_min, radii.r_max)?;
    let vals = ls.eval_many(&pts)?;
    let samples: Vec<(f64, f64)> = pts.iter().zip(&vals).map(|(p, c)| (norm(p), c.norm().ln())).collect();
    let floor_samples: Option<Vec<(f64, f64)>> =
        floor.map(|t| pts.iter().map(|p| (norm(p), t.spectrum(p).abs().ln())).collect());
    decide_lambda(&samples, floor_samples.as_deref(), omega, radii, th)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiAnalysis {
    pub verdict: MicroRegularityVerdict,
    /// Ĉ_p for p = 1..=p_max.
    pub c_hat: Vec<f64>,
    /// m_p(k) for p = 1..=p_max over the octaves of [r_min, r_max].
    pub shell_maxima: Vec<Vec<f64>>,
    /// m_p(K−1) − m_p(K−2) per p.
    pub growth: Vec<f64>,
    pub c_cap: f64,
}

/// Verdict from per-p samples (|μ|, log|f̂_p(μ)|), p = 1..=p_max.
pub fn decide_quasianalytic(
    per_p: &[Vec<(f64, f64)>],
    n: &WeightSequence,
    radii: &Radii,
    th: &Thresholds,
) -> Result<QuasiAnalysis> {
    let p_max = per_p.len();
    if p_max < 4 {
        return Err(Error::Invalid(format!("p_max must be at least 4, got {p_max}")));
    }
    if n.depth() < p_max {
        return Err(Error::Depth { depth: n.depth(), index: p_max });
    }
    let k_count = radii.octaves();
    if k_count < 2 {
        return Err(Error::InsufficientData("the quasianalytic test needs two octaves".into()));
    }
    let mode = AnalysisMode::Quasianalytic { sequence: n.name.clone() };
    let mut m = vec![vec![f64::NEG_INFINITY; k_count]; p_max];
    for (i, samples) in per_p.iter().enumerate() {
        let p = (i + 1) as f64;
        for &(r, lm) in samples {
            if radii.in_range(r) && lm > f64::NEG_INFINITY {
                let k = radii.octave(r);
                m[i][k] = m[i][k].max(lm + p * r.ln());
            }
        }
    }
    if m.iter().all(|row| row.iter().all(|v| *v == f64::NEG_INFINITY)) {
        let mut v = MicroRegularityVerdict::bare(mode, RegularityVerdict::Regular, radii.r_max);
        v.tail_ratio = Some(0.0);
        return Ok(QuasiAnalysis {
            verdict: v,
            c_hat: vec![0.0; p_max],
            shell_maxima: m,
            growth: vec![f64::NEG_INFINITY; p_max],
            c_cap: 0.0,
        });
    }
    let mut c_hat = Vec::with_capacity(p_max);
    let mut growth = Vec::with_capacity(p_max);
    for (i, row) in m.iter().enumerate() {
        let p = i + 1;
        let s = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        c_hat.push(((s - n.log(p)?) / p as f64).exp());
        let g = row[k_count - 1] - row[k_count - 2];
        growth.push(if g.is_nan() { f64::NEG_INFINITY } else { g });
    }
    let lo = p_max.div_ceil(2);
    let geometric: Vec<bool> =
        (lo..=p_max).map(|p| growth[p - 1] >= th.geometric * p as f64 * LN_2).collect();
    let mut mid: Vec<f64> = c_hat[3..].to_vec();
    mid.sort_by(|a, b| a.total_cmp(b));
    let median = if mid.len() % 2 == 1 {
        mid[mid.len() / 2]
    } else {
        0.5 * (mid[mid.len() / 2 - 1] + mid[mid.len() / 2])
    };
    let c_cap = th.c_cap_factor * median;
    let sup = c_hat[3..].iter().cloned().fold(0.0, f64::max);
    let verdict = if geometric.iter().all(|&g| g) {
        RegularityVerdict::Singular
    } else if geometric.iter().all(|&g| !g) && sup <= c_cap {
        RegularityVerdict::Regular
    } else {
        RegularityVerdict::Indeterminate
    };
    let top = &m[p_max - 1];
    let all = top.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(QuasiAnalysis {
        verdict: MicroRegularityVerdict {
            mode,
            verdict,
            estimate: Some(sup),
            band: None,
            floor: None,
            floor_bound: false,
            truncation_radius: radii.r_max,
            residual_rms: None,
            tail_ratio: Some(if all.is_finite() { (top[k_count - 1] - all).exp() } else { 0.0 }),
        },
        c_hat,
        shell_maxima: m,
        growth,
        c_cap,
    })
}

fn check_family(n: &WeightSequence, family: &CutoffFamily, p_max: usize) -> Result<()> {
    if family.max_index < p_max {
        return Err(Error::Depth { depth: family.max_index, index: p_max });
    }
    if n.depth() < p_max {
        return Err(Error::Depth { depth: n.depth(), index: p_max });
    }
    Ok(())
}

/// sup_{μ ∈ Γ∩Λ} |(χ_p f)^(μ)| |μ|^p against A C^p N_p for p ≤ p_max, with χ_p centered at x₀.
#[allow(clippy::too_many_arguments)]
pub fn quasianalytic_test(
    f: &TestDistribution,
    x0: &[f64],
    cone: &Cone,
    lattice: &Lattice,
    n: &WeightSequence,
    family: &CutoffFamily,
    p_max: usize,
    radii: &Radii,
    th: &Thresholds,
) -> Result<QuasiAnalysis> {
    radii.validate()?;
    check_family(n, family, p_max)?;
    require_separation(lattice, family.support_radius())?;
    let pts = lattice.enumerate_in_cone(cone, radii.r_min, radii.r_max)?;
    if pts.is_empty() {
        return Err(Error::EmptyCone { r_min: radii.r_min, r_max: radii.r_max });
    }
    let xs: Vec<Vec<f64>> = pts.iter().map(|p| p.x.clone()).collect();
    let per_p = (1..=p_max)
        .map(|p| {
            let ls = LocalizedSpectrum::new(f, family.taper(p)?, x0)?;
            let vals = ls.eval_many(&xs)?;
            Ok(pts.iter().zip(&vals).map(|(q, c)| (q.norm, c.norm().ln())).collect())
        })
        .collect::<Result<Vec<Vec<(f64, f64)>>>>()?;
    decide_quasianalytic(&per_p, n, radii, th)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyMode {
    Inf,
    Sup,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyMember {
    pub weight: ModerateWeight,
    pub q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyVerdict {
    pub verdict: MicroRegularityVerdict,
    /// per_cone[c][j]: verdict of member j on cone c.
    pub per_cone: Vec<Vec<RegularityVerdict>>,
    pub tail_ratios: Vec<Vec<f64>>,
}

/// Single-weight seminorm verdict: a bounded outer share reads as convergence.
pub fn seminorm_verdict(s: &Seminorm, th: &Thresholds) -> RegularityVerdict {
    if s.tail_ratio <= th.tail_ratio {
        RegularityVerdict::Regular
    } else {
        RegularityVerdict::Singular
    }
}

/// Sup- or inf-type verdict of a family of weighted Fourier-Lebesgue conditions over candidate cones.
pub fn wf_family(
    ls: &dyn Spectrum,
    mode: FamilyMode,
    family: &[FamilyMember],
    cones: &[Cone],
    lattice: &Lattice,
    r: f64,
    th: &Thresholds,
) -> Result<FamilyVerdict> {
    if family.is_empty() || cones.is_empty() {
        return Err(Error::Invalid("family and cone list must be nonempty".into()));
    }
    let mut per_cone = Vec::with_capacity(cones.len());
    let mut tails = Vec::with_capacity(cones.len());
    for cone in cones {
        let mut row = Vec::with_capacity(family.len());
        let mut trow = Vec::with_capacity(family.len());
        for m in family {
            let s = fl_seminorm_lattice(ls, cone, lattice, &m.weight, m.q, r)?;
            row.push(seminorm_verdict(&s, th));
            trow.push(s.tail_ratio);
        }
        per_cone.push(row);
        tails.push(trow);
    }
    let regular = match mode {
        FamilyMode::Inf => per_cone.iter().any(|row| row.contains(&RegularityVerdict::Regular)),
        FamilyMode::Sup => per_cone.iter().any(|row| row.iter().all(|v| *v == RegularityVerdict::Regular)),
    };
    let label = match mode {
        FamilyMode::Inf => AnalysisMode::InfFamily,
        FamilyMode::Sup => AnalysisMode::SupFamily,
    };
    let mut verdict = MicroRegularityVerdict::bare(
        label,
        if regular { RegularityVerdict::Regular } else { RegularityVerdict::Singular },
        r,
    );
    verdict.tail_ratio = tails.iter().flatten().cloned().reduce(f64::min);
    Ok(FamilyVerdict { verdict, per_cone, tail_ratios: tails })
}

#[derive(Debug, Clone)]
pub enum Analyzer {
    Roumieu(WeightFunction),
    Beurling(WeightFunction),
    FourierLebesgue { weight: ModerateWeight, q: Option<f64> },
    Quasianalytic { sequence: WeightSequence, family: Arc<CutoffFamily>, p_max: usize },
}

#[derive(Debug, Clone)]
pub struct AnalyzerConfig {
    pub analyzer: Analyzer,
    pub half_angle: f64,
    pub radii: Radii,
    pub thresholds: Thresholds,
    /// Analysis domain Ω as a box; seeds outside are rejected.
    pub domain: Option<Vec<(f64, f64)>>,
    pub keep_samples: bool,
}

impl AnalyzerConfig {
    pub fn new(analyzer: Analyzer) -> Self {
        Self {
            analyzer,
            half_angle: 15f64.to_radians(),
            radii: Radii::default(),
            thresholds: Thresholds::default(),
            domain: None,
            keep_samples: false,
        }
    }

    /// Radius of the ball U that has to avoid Λ* \ {0}.
    pub fn support_radius(&self, window: &Window) -> f64 {
        match &self.analyzer {
            Analyzer::Quasianalytic { family, .. } => family.support_radius(),
            _ => window.support_radius(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairVerdict {
    pub seed: usize,
    pub x0: Vec<f64>,
    pub direction: Vec<f64>,
    /// Polar angle of the direction in [0, 2π) for d = 2; angle to e₁ otherwise.
    pub theta: f64,
    #[serde(flatten)]
    pub result: MicroRegularityVerdict,
    #[serde(skip)]
    pub samples: Vec<DecaySample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveFrontEstimate {
    pub seeds: Vec<Vec<f64>>,
    pub directions: Vec<Vec<f64>>,
    pub max_gap: f64,
    pub half_angle: f64,
    pub radii: Radii,
    pub pairs: Vec<PairVerdict>,
}

impl WaveFrontEstimate {
    pub fn singular(&self) -> impl Iterator<Item = &PairVerdict> {
        self.pairs.iter().filter(|p| p.result.verdict == RegularityVerdict::Singular)
    }

    pub fn count(&self, v: RegularityVerdict) -> usize {
        self.pairs.iter().filter(|p| p.result.verdict == v).count()
    }
}

pub fn direction_angle(dir: &[f64]) -> f64 {
    if dir.len() == 2 {
        dir[1].atan2(dir[0]).rem_euclid(2.0 * PI)
    } else {
        (dir[0] / norm(dir)).clamp(-1.0, 1.0).acos()
    }
}

fn check_domain(cfg: &AnalyzerConfig, x0: &[f64]) -> Result<()> {
    if let Some(dom) = &cfg.domain {
        let inside = dom.len() == x0.len() && x0.iter().zip(dom).all(|(x, (lo, hi))| x > lo && x < hi);
        if !inside {
            return Err(Error::Domain { point: x0.to_vec() });
        }
    }
    Ok(())
}

fn samples_for(points: &[Vec<f64>], norms: &[f64], vals: &[f64], cone: &Cone) -> (Vec<usize>, Vec<(f64, f64)>) {
    let idx: Vec<usize> = (0..points.len()).filter(|&i| cone.contains(&points[i])).collect();
    let s = idx.iter().map(|&i| (norms[i], vals[i])).collect();
    (idx, s)
}

/// Verdicts at one seed for each direction of `dirs`.
pub fn analyze_seed(
    f: &TestDistribution,
    seed: usize,
    x0: &[f64],
    dirs: &[Vec<f64>],
    cfg: &AnalyzerConfig,
    lattice: &Lattice,
    window: &Window,
) -> Result<Vec<PairVerdict>> {
    check_domain(cfg, x0)?;
    let radii = &cfg.radii;
    let th = &cfg.thresholds;
    let r_lo = match cfg.analyzer {
        Analyzer::FourierLebesgue { .. } => 0.0,
        _ => radii.r_min,
    };
    let pts = lattice.enumerate_points(radii.r_max, r_lo)?;
    let xs: Vec<Vec<f64>> = pts.iter().map(|p| p.x.clone()).collect();
    let norms: Vec<f64> = pts.iter().map(|p| p.norm).collect();
    let cones = dirs.iter().map(|d| Cone::new(d, cfg.half_angle)).collect::<Result<Vec<_>>>()?;
    let pair = |i: usize, result: MicroRegularityVerdict, samples: Vec<DecaySample>| PairVerdict {
        seed,
        x0: x0.to_vec(),
        direction: dirs[i].clone(),
        theta: direction_angle(&dirs[i]),
        result,
        samples,
    };
    let keep = |idx: &[usize], logs: &[f64]| -> Vec<DecaySample> {
        if !cfg.keep_samples {
            return vec![];
        }
        idx.iter()
            .map(|&i| DecaySample {
                point: xs[i].clone(),
                norm: norms[i],
                log_modulus: logs[i],
                shell: (norms[i] / radii.r_min).log2().floor() as i64,
            })
            .collect()
    };
    let empty = |idx: &[usize]| -> Result<()> {
        if idx.is_empty() {
            Err(Error::EmptyCone { r_min: r_lo, r_max: radii.r_max })
        } else {
            Ok(())
        }
    };
    match &cfg.analyzer {
        Analyzer::Roumieu(omega) | Analyzer::Beurling(omega) => {
            let ls = LocalizedSpectrum::new(f, &window.taper, x0)?;
            let logs: Vec<f64> = ls.eval_many(&xs)?.iter().map(|c| c.norm().ln()).collect();
            let floor: Vec<f64> = xs.iter().map(|x| window.taper.spectrum(x).abs().ln()).collect();
            let roumieu = matches!(cfg.analyzer, Analyzer::Roumieu(_));
            cones
                .iter()
                .enumerate()
                .map(|(i, cone)| {
                    let (idx, s) = samples_for(&xs, &norms, &logs, cone);
                    empty(&idx)?;
                    let fl: Vec<(f64, f64)> = idx.iter().map(|&j| (norms[j], floor[j])).collect();
                    let a = decide_lambda(&s, Some(&fl), omega, radii, th)?;
                    let v = if roumieu { a.roumieu } else { a.beurling };
                    Ok(pair(i, v, keep(&idx, &logs)))
                })
                .collect()
        }
        Analyzer::FourierLebesgue { weight, q } => {
            check_q(*q)?;
            let ls = LocalizedSpectrum::new(f, &window.taper, x0)?;
            let logs: Vec<f64> = ls.eval_many(&xs)?.iter().map(|c| c.norm().ln()).collect();
            let lv = xs.iter().map(|x| weight.log_value(x)).collect::<Result<Vec<f64>>>()?;
            cones
                .iter()
                .enumerate()
                .map(|(i, cone)| {
                    let (idx, _) = samples_for(&xs, &norms, &logs, cone);
                    empty(&idx)?;
                    let terms: Vec<(f64, f64, f64)> = idx.iter().map(|&j| (norms[j], lv[j] + logs[j], 0.0)).collect();
                    let s = combine(&terms, *q, radii.r_max);
                    let mut v = MicroRegularityVerdict::bare(
                        AnalysisMode::FourierLebesgue { q: *q, v: weight.label() },
                        seminorm_verdict(&s, th),
                        radii.r_max,
                    );
                    v.estimate = Some(s.value);
                    v.tail_ratio = Some(s.tail_ratio);
                    Ok(pair(i, v, keep(&idx, &logs)))
                })
                .collect()
        }
        Analyzer::Quasianalytic { sequence, family, p_max } => {
            check_family(sequence, family, *p_max)?;
            let per_p = (1..=*p_max)
                .map(|p| {
                    let ls = LocalizedSpectrum::new(f, family.taper(p)?, x0)?;
                    Ok(ls.eval_many(&xs)?.iter().map(|c| c.norm().ln()).collect())
                })
                .collect::<Result<Vec<Vec<f64>>>>()?;
            cones
                .iter()
                .enumerate()
                .map(|(i, cone)| {
                    let (idx, _) = samples_for(&xs, &norms, &per_p[0], cone);
                    empty(&idx)?;
                    let cone_p: Vec<Vec<(f64, f64)>> =
                        per_p.iter().map(|row| idx.iter().map(|&j| (norms[j], row[j])).collect()).collect();
                    let qa = decide_quasianalytic(&cone_p, sequence, radii, th)?;
                    Ok(pair(i, qa.verdict, keep(&idx, &per_p[*p_max - 1])))
                })
                .collect()
        }
    }
}

/// Runs the configured analyzer on every (seed, direction) pair of a planar or Fibonacci direction grid.
pub fn estimate_wavefront(
    f: &TestDistribution,
    seeds: &[Vec<f64>],
    direction_count: usize,
    cfg: &AnalyzerConfig,
    lattice: &Lattice,
    window: &Window,
) -> Result<WaveFrontEstimate> {
    let d = lattice.dim();
    if f.dim() != d || window.dim() != d {
        return Err(Error::Invalid("source, lattice and window dimensions differ".into()));
    }
    if seeds.is_empty() {
        return Err(Error::Invalid("no seed points".into()));
    }
    if d >= 2 && direction_count < 2 {
        return Err(Error::Invalid("need at least two directions".into()));
    }
    cfg.radii.validate()?;
    for s in seeds {
        if s.len() != d {
            return Err(Error::Invalid(format!("seed {s:?} has the wrong dimension")));
        }
        check_domain(cfg, s)?;
    }
    require_separation(lattice, cfg.support_radius(window))?;
    let dirs = direction_grid(d, direction_count);
    let per_seed = seeds
        .par_iter()
        .enumerate()
        .map(|(i, x0)| analyze_seed(f, i, x0, &dirs, cfg, lattice, window))
        .collect::<Result<Vec<_>>>()?;
    Ok(WaveFrontEstimate {
        seeds: seeds.to_vec(),
        max_gap: direction_grid_gap(d, dirs.len()),
        directions: dirs,
        half_angle: cfg.half_angle,
        radii: cfg.radii,
        pairs: per_seed.into_iter().flatten().collect(),
    })
}
