//! Windows, analytic cut-off families, the test-distribution catalog and windowed spectra
//! (φ(· − x₀) f)^(ξ) with F φ(ξ) = ∫ φ(x) e^{−2πiξ·x} dx.

use crate::error::{Error, Result};
use crate::numerics::{
    adaptive_gk, cis_neg, composite_rule, dot, least_squares, norm, sinc, sum_complex, ChebTable,
    GaussLegendre,
};
use crate::weights::WeightSequence;
use num_complex::Complex64;
use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

const PROFILE_PANELS: usize = 64;
const PROFILE_ORDER: usize = 24;
const PROFILE_TAIL: f64 = 1e-16;
const JUMP_REL_TOL: f64 = 1e-12;

/// One axis of a tensor taper: a unit-peak plateau box of half-width L (optional)
/// convolved with unit-mass boxes of widths a_j.
#[derive(Debug, Clone)]
pub struct AxisProduct {
    pub plateau: f64,
    pub widths: Vec<f64>,
    half: f64,
    xi_max: f64,
    table: ChebTable,
}

impl AxisProduct {
    pub fn new(plateau: f64, widths: Vec<f64>) -> Result<Self> {
        if !(plateau >= 0.0) || widths.iter().any(|a| !(*a > 0.0)) || widths.is_empty() {
            return Err(Error::Invalid("axis product needs positive box widths".into()));
        }
        let half = plateau + widths.iter().sum::<f64>() / 2.0;
        let mut p = Self { plateau, widths, half, xi_max: 0.0, table: ChebTable::from_values(0.0, 1.0, 1, 1, vec![0.0]) };
        p.xi_max = p.tail_cutoff();
        p.table = p.tabulate();
        Ok(p)
    }

    pub fn half_width(&self) -> f64 {
        self.half
    }

    pub fn spectrum(&self, xi: f64) -> f64 {
        let mut v = if self.plateau > 0.0 { 2.0 * self.plateau * sinc(2.0 * self.plateau * xi) } else { 1.0 };
        for a in &self.widths {
            v *= sinc(a * xi);
        }
        v
    }

    /// Smooth upper bound for |spectrum|.
    pub fn envelope(&self, xi: f64) -> f64 {
        let x = xi.abs();
        let mut v = if self.plateau > 0.0 { (2.0 * self.plateau).min(1.0 / (PI * x)) } else { 1.0 };
        for a in &self.widths {
            v *= (1.0 / (PI * a * x)).min(1.0);
        }
        v
    }

    fn tail_cutoff(&self) -> f64 {
        let mut x = 1.0;
        while self.envelope(x) * x > PROFILE_TAIL && x < 1e7 {
            x *= 1.25;
        }
        x
    }

    fn tabulate(&self) -> ChebTable {
        let panel = (0.5 / self.half).min(0.5 / self.widths.iter().cloned().fold(0.0, f64::max).max(self.plateau));
        let panels = (self.xi_max / panel).ceil() as usize;
        let (xs, ws) = composite_rule(0.0, self.xi_max, panels, &GaussLegendre::new(12));
        let sw: Vec<f64> = xs.iter().zip(&ws).map(|(x, w)| 2.0 * w * self.spectrum(*x)).collect();
        let nodes = ChebTable::nodes_for(-self.half, self.half, PROFILE_PANELS, PROFILE_ORDER);
        let vals: Vec<f64> = nodes
            .par_iter()
            .map(|&y| {
                let mut s = crate::numerics::Neumaier::default();
                for (x, w) in xs.iter().zip(&sw) {
                    s.add(w * crate::numerics::cos_pi(2.0 * x * y));
                }
                s.value()
            })
            .collect();
        ChebTable::from_values(-self.half, self.half, PROFILE_PANELS, PROFILE_ORDER, vals)
    }

    pub fn profile(&self, y: f64) -> f64 {
        if y.abs() >= self.half {
            0.0
        } else {
            self.table.eval(y)
        }
    }
}

/// Per-axis taper shape.
#[derive(Debug, Clone)]
pub enum AxisTaper {
    Product(AxisProduct),
    /// k-fold box convolution of total width 2h, closed-form in x.
    BSpline { order: usize, half: f64 },
}

fn cardinal_bspline(k: usize, t: f64) -> f64 {
    if t <= 0.0 || t >= k as f64 {
        return 0.0;
    }
    let t = t.min(k as f64 - t);
    let mut binom = 1.0;
    let mut s = 0.0;
    let mut fact = 1.0;
    for i in 1..k {
        fact *= i as f64;
    }
    for j in 0..=k {
        if t > j as f64 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binom * (t - j as f64).powi(k as i32 - 1);
        }
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    s / fact
}

impl AxisTaper {
    pub fn half_width(&self) -> f64 {
        match self {
            AxisTaper::Product(p) => p.half_width(),
            AxisTaper::BSpline { half, .. } => *half,
        }
    }

    pub fn spectrum(&self, xi: f64) -> f64 {
        match self {
            AxisTaper::Product(p) => p.spectrum(xi),
            AxisTaper::BSpline { order, half } => sinc(2.0 * half / *order as f64 * xi).powi(*order as i32),
        }
    }

    pub fn envelope(&self, xi: f64) -> f64 {
        match self {
            AxisTaper::Product(p) => p.envelope(xi),
            AxisTaper::BSpline { order, half } => {
                let w = 2.0 * half / *order as f64;
                (1.0 / (PI * w * xi.abs())).min(1.0).powi(*order as i32)
            }
        }
    }

    pub fn profile(&self, y: f64) -> f64 {
        match self {
            AxisTaper::Product(p) => p.profile(y),
            AxisTaper::BSpline { order, half } => {
                let w = 2.0 * half / *order as f64;
                cardinal_bspline(*order, (y + half) / w) / w
            }
        }
    }
}

/// φ(x) = scale · ∏ φ_i(x_i).
#[derive(Debug, Clone)]
pub struct TensorTaper {
    pub axes: Vec<Arc<AxisTaper>>,
    pub scale: f64,
}

impl TensorTaper {
    pub fn isotropic(axis: AxisTaper, dim: usize) -> Self {
        let a = Arc::new(axis);
        Self { axes: vec![a; dim], scale: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn spectrum(&self, xi: &[f64]) -> f64 {
        self.scale * self.axes.iter().zip(xi).map(|(a, x)| a.spectrum(*x)).product::<f64>()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.scale * self.axes.iter().zip(x).map(|(a, y)| a.profile(*y)).product::<f64>()
    }

    pub fn envelope(&self, xi: &[f64]) -> f64 {
        self.scale.abs() * self.axes.iter().zip(xi).map(|(a, x)| a.envelope(*x)).product::<f64>()
    }

    /// Per-axis half-width of the support cube.
    pub fn half_width(&self) -> f64 {
        self.axes.iter().map(|a| a.half_width()).fold(0.0, f64::max)
    }

    /// Radius of the smallest centered ball containing the support.
    pub fn support_radius(&self) -> f64 {
        self.axes.iter().map(|a| a.half_width().powi(2)).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Unit mass, φ(x₀) ≠ 0.
    #[default]
    Centered,
    /// Unit peak with φ ≡ 1 near x₀.
    Plateau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WindowSpec {
    GevreyProduct {
        s0: f64,
        terms: usize,
        radius: f64,
        #[serde(default)]
        placement: Placement,
    },
    BSpline {
        order: usize,
        radius: f64,
    },
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec::GevreyProduct { s0: 1.5, terms: 24, radius: 0.5, placement: Placement::Centered }
    }
}

/// Box widths a_j ∝ j^{−s₀} with Σ a_j = total.
pub fn gevrey_widths(s0: f64, terms: usize, total: f64) -> Vec<f64> {
    let z: f64 = (1..=terms).map(|j| (j as f64).powf(-s0)).sum();
    (1..=terms).map(|j| total * (j as f64).powf(-s0) / z).collect()
}

/// Plateau half-width as a fraction of the per-axis half-width for plateau windows.
pub const PLATEAU_FRACTION: f64 = 0.6;

#[derive(Debug, Clone)]
pub struct Window {
    pub spec: WindowSpec,
    pub taper: TensorTaper,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FloorFit {
    /// c_w in −log|φ̂| ≈ c_w r^{1/ŝ} (Gevrey) or the power k̂ in (1+r)^{−k̂} (B-spline).
    pub c: f64,
    pub exponent: f64,
}

impl Window {
    pub fn new(spec: WindowSpec, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("window dimension must be positive".into()));
        }
        let axis = match &spec {
            WindowSpec::GevreyProduct { s0, terms, radius, placement } => {
                if !(*s0 > 1.0) || *terms < 2 || !(*radius > 0.0) {
                    return Err(Error::Invalid("gevrey-product window needs s0 > 1, terms >= 2, radius > 0".into()));
                }
                let h = radius / (dim as f64).sqrt();
                match placement {
                    Placement::Centered => AxisProduct::new(0.0, gevrey_widths(*s0, *terms, 2.0 * h))?,
                    Placement::Plateau => {
                        let l = PLATEAU_FRACTION * h;
                        AxisProduct::new(l, gevrey_widths(*s0, *terms, 2.0 * (h - l)))?
                    }
                }
            }
            WindowSpec::BSpline { order, radius } => {
                if *order < 2 || *order > 16 || !(*radius > 0.0) {
                    return Err(Error::Invalid("b-spline window needs 2 <= order <= 16 and radius > 0".into()));
                }
                return Ok(Self {
                    taper: TensorTaper::isotropic(
                        AxisTaper::BSpline { order: *order, half: radius / (dim as f64).sqrt() },
                        dim,
                    ),
                    spec,
                });
            }
        };
        Ok(Self { taper: TensorTaper::isotropic(AxisTaper::Product(axis), dim), spec })
    }

    pub fn dim(&self) -> usize {
        self.taper.dim()
    }

    pub fn spectrum(&self, xi: &[f64]) -> f64 {
        self.taper.spectrum(xi)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.taper.value(x)
    }

    pub fn support_radius(&self) -> f64 {
        self.taper.support_radius()
    }

    /// Rescale so that ∫φ = mass.
    pub fn with_mass(&self, mass: f64) -> Self {
        let mut w = self.clone();
        let m0 = self.spectrum(&vec![0.0; self.dim()]) / self.taper.scale;
        w.taper.scale = mass / m0;
        w
    }

    /// Fit of the decay floor along a coordinate axis on a geometric grid [r_lo, r_hi].
    pub fn floor_fit(&self, r_lo: f64, r_hi: f64) -> Result<FloorFit> {
        let rs = crate::weights::geometric_grid(r_lo, r_hi, 64);
        let axis = &self.taper.axes[0];
        match &self.spec {
            WindowSpec::GevreyProduct { .. } => {
                let rows: Vec<Vec<f64>> = rs.iter().map(|r| vec![1.0, r.ln()]).collect();
                let y: Vec<f64> = rs.iter().map(|&r| (-(axis.envelope(r) / axis.envelope(0.0)).ln()).max(1e-300).ln()).collect();
                let f = least_squares(&rows, &y).ok_or_else(|| Error::InsufficientData("floor fit".into()))?;
                Ok(FloorFit { c: f.coef[0].exp(), exponent: 1.0 / f.coef[1] })
            }
            WindowSpec::BSpline { .. } => {
                let rows: Vec<Vec<f64>> = rs.iter().map(|r| vec![1.0, -r.ln_1p()]).collect();
                let y: Vec<f64> = rs.iter().map(|&r| axis.envelope(r).ln()).collect();
                let f = least_squares(&rows, &y).ok_or_else(|| Error::InsufficientData("floor fit".into()))?;
                Ok(FloorFit { c: f.coef[0].exp(), exponent: f.coef[1] })
            }
        }
    }
}

/// Cut-offs χ_p for the cube K = c + [−r_K, r_K]^d inside W = c + [−r_W, r_W]^d.
#[derive(Debug, Clone)]
pub struct CutoffFamily {
    pub center: Vec<f64>,
    pub r_k: f64,
    pub r_w: f64,
    pub eps: f64,
    pub max_index: usize,
    pub sequence: String,
    tapers: Vec<TensorTaper>,
}

/// Terms and exponent of the smoothing window φ_g inside every χ_p.
pub const CUTOFF_SMOOTHING: (f64, usize) = (1.5, 24);

impl CutoffFamily {
    pub fn new(center: &[f64], r_k: f64, r_w: f64, max_index: usize, m: &WeightSequence) -> Result<Self> {
        if !(r_k >= 0.0) || !(r_w > r_k) {
            return Err(Error::Geometry(format!("W must contain K with positive margin (r_K = {r_k}, r_W = {r_w})")));
        }
        if max_index == 0 {
            return Err(Error::Invalid("cut-off family needs max_index >= 1".into()));
        }
        let d = center.len();
        let eps = (r_w - r_k) / 4.0;
        let (s0, terms) = CUTOFF_SMOOTHING;
        let g = gevrey_widths(s0, terms, eps);
        let tapers = (1..=max_index)
            .into_par_iter()
            .map(|p| {
                let mut widths = vec![eps / p as f64; p];
                widths.extend_from_slice(&g);
                AxisProduct::new(r_k + 2.0 * eps, widths).map(|a| TensorTaper::isotropic(AxisTaper::Product(a), d))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { center: center.to_vec(), r_k, r_w, eps, max_index, sequence: m.name.clone(), tapers })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn taper(&self, p: usize) -> Result<&TensorTaper> {
        if p == 0 || p > self.max_index {
            return Err(Error::Depth { depth: self.max_index, index: p });
        }
        Ok(&self.tapers[p - 1])
    }

    /// χ_p(x).
    pub fn chi(&self, p: usize, x: &[f64]) -> Result<f64> {
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        Ok(self.taper(p)?.value(&y))
    }

    /// χ̂_p(ξ).
    pub fn chi_hat(&self, p: usize, xi: &[f64]) -> Result<Complex64> {
        Ok(self.taper(p)?.spectrum(xi) * cis_neg(dot(xi, &self.center)))
    }

    /// Per-axis half-width where χ_p ≡ 1.
    pub fn plateau_half_width(&self) -> f64 {
        self.r_k + self.eps
    }

    /// Per-axis half-width of every support.
    pub fn support_half_width(&self) -> f64 {
        self.r_k + 3.0 * self.eps
    }

    pub fn support_radius(&self) -> f64 {
        (self.dim() as f64).sqrt() * self.support_half_width()
    }

    /// (∫|ξ|^p |χ̂_p^{(1)}(ξ)| dξ)^{1/p} / p on one axis, for condition (b).
    pub fn moment_ratio(&self, p: usize) -> Result<f64> {
        let axis = match self.taper(p)?.axes[0].as_ref() {
            AxisTaper::Product(a) => a.clone(),
            AxisTaper::BSpline { .. } => unreachable!(),
        };
        let top = axis.xi_max * 4.0;
        let panels = (top / 0.25).ceil() as usize;
        let (xs, ws) = composite_rule(0.0, top, panels, &GaussLegendre::new(12));
        let log_terms: Vec<f64> = xs
            .iter()
            .zip(&ws)
            .filter_map(|(x, w)| {
                let s = axis.spectrum(*x).abs();
                (s > 0.0 && *x > 0.0).then(|| w.ln() + p as f64 * x.ln() + s.ln())
            })
            .collect();
        let log_int = std::f64::consts::LN_2 + crate::numerics::log_sum_exp(&log_terms);
        Ok((log_int / p as f64).exp() / p as f64)
    }
}

/// D' = sup_{p ≤ P, ξ} |χ̂_p(ξ)| e^{−M(|ξ|/h)} over radial samples along axes and diagonals.
pub fn bounded_family_norms(family: &CutoffFamily, m: &WeightSequence, h: f64, radii: &[f64]) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Invalid("h must be positive".into()));
    }
    let d = family.dim();
    let dirs: Vec<Vec<f64>> = vec![
        { let mut v = vec![0.0; d]; v[0] = 1.0; v },
        vec![1.0 / (d as f64).sqrt(); d],
    ];
    let mut best = 0.0f64;
    for p in 1..=family.max_index {
        let t = family.taper(p)?;
        for dir in &dirs {
            for &r in radii {
                let xi: Vec<f64> = dir.iter().map(|v| v * r).collect();
                let s = t.spectrum(&xi).abs();
                let mt = if r == 0.0 { 0.0 } else { m.associated(r / h)?.0 };
                best = best.max(s * (-mt).exp());
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SyntheticSpectrum {
    /// e^{−rate |ξ|^power}
    RadialExp { rate: f64, power: f64 },
    /// (1 + |ξ|)^{−exponent}
    PowerLaw { exponent: f64 },
}

impl SyntheticSpectrum {
    pub fn eval(&self, xi: &[f64]) -> f64 {
        let r = norm(xi);
        match self {
            SyntheticSpectrum::RadialExp { rate, power } => (-rate * r.powf(*power)).exp(),
            SyntheticSpectrum::PowerLaw { exponent } => (1.0 + r).powf(-exponent),
        }
    }
}

/// Samples on a uniform grid, row-major with the last index fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridData {
    pub shape: Vec<usize>,
    pub spacing: f64,
    pub origin: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default = "default_oversampling")]
    pub oversampling: usize,
}

fn default_oversampling() -> usize {
    4
}

const GRID_MAGIC: &[u8; 8] = b"WFGRID1\n";

impl GridData {
    pub fn validate(&self) -> Result<()> {
        if self.shape.is_empty() || self.shape.len() != self.origin.len() {
            return Err(Error::Invalid("grid shape and origin must have the same positive length".into()));
        }
        if self.shape.iter().product::<usize>() != self.values.len() {
            return Err(Error::Invalid("grid value count does not match the shape".into()));
        }
        if !(self.spacing > 0.0) {
            return Err(Error::Invalid("grid spacing must be positive".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("grid values must be finite".into()));
        }
        if self.oversampling < 4 {
            return Err(Error::Invalid("grid oversampling factor must be >= 4".into()));
        }
        Ok(())
    }

    /// Text format: `d`, then the shape, the spacing, the origin, then the values.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut tok = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ','))
            .filter(|s| !s.is_empty());
        let bad = |what: &str| Error::Invalid(format!("grid file: bad {what}"));
        let d: usize = tok.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("dimension"))?;
        let shape = (0..d)
            .map(|_| tok.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("shape")))
            .collect::<Result<Vec<usize>>>()?;
        let spacing: f64 = tok.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("spacing"))?;
        let origin = (0..d)
            .map(|_| tok.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("origin")))
            .collect::<Result<Vec<f64>>>()?;
        let values = tok.map(|s| s.parse::<f64>().map_err(|_| bad("value"))).collect::<Result<Vec<_>>>()?;
        let g = Self { shape, spacing, origin, values, oversampling: 4 };
        g.validate()?;
        Ok(g)
    }

    /// Binary format: magic, u64 d, u64 shape[d], f64 spacing, f64 origin[d], f64 values (little endian).
    pub fn parse_binary(bytes: &[u8]) -> Result<Self> {
        let bad = || Error::Invalid("grid file: truncated binary data".into());
        if bytes.len() < 16 || &bytes[..8] != GRID_MAGIC {
            return Err(Error::Invalid("grid file: bad magic".into()));
        }
        let mut pos = 8;
        let mut next8 = || -> Result<[u8; 8]> {
            let b: [u8; 8] = bytes.get(pos..pos + 8).ok_or_else(bad)?.try_into().unwrap();
            pos += 8;
            Ok(b)
        };
        let d = u64::from_le_bytes(next8()?) as usize;
        if d == 0 || d > 8 {
            return Err(Error::Invalid("grid file: unsupported dimension".into()));
        }
        let shape = (0..d).map(|_| next8().map(|b| u64::from_le_bytes(b) as usize)).collect::<Result<Vec<_>>>()?;
        let spacing = f64::from_le_bytes(next8()?);
        let origin = (0..d).map(|_| next8().map(f64::from_le_bytes)).collect::<Result<Vec<_>>>()?;
        let n: usize = shape.iter().product();
        let values = (0..n).map(|_| next8().map(f64::from_le_bytes)).collect::<Result<Vec<_>>>()?;
        let g = Self { shape, spacing, origin, values, oversampling: 4 };
        g.validate()?;
        Ok(g)
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = GRID_MAGIC.to_vec();
        out.extend((self.shape.len() as u64).to_le_bytes());
        for s in &self.shape {
            out.extend((*s as u64).to_le_bytes());
        }
        out.extend(self.spacing.to_le_bytes());
        for o in &self.origin {
            out.extend(o.to_le_bytes());
        }
        for v in &self.values {
            out.extend(v.to_le_bytes());
        }
        out
    }

    fn taper_weight(&self, idx: &[usize]) -> f64 {
        idx.iter()
            .zip(&self.shape)
            .map(|(&i, &n)| {
                if n < 2 {
                    return 1.0;
                }
                let u = i as f64 / (n - 1) as f64;
                let e = u.min(1.0 - u);
                if e >= 0.1 {
                    1.0
                } else {
                    0.5 * (1.0 - crate::numerics::cos_pi(e / 0.1))
                }
            })
            .product()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestDistribution {
    Delta {
        center: Vec<f64>,
    },
    /// H(n·x − offset).
    PlaneJump {
        normal: Vec<f64>,
        offset: f64,
    },
    /// e^{−π|x − center|²/width²}.
    Gaussian {
        center: Vec<f64>,
        width: f64,
    },
    /// Closed-form localized spectrum, independent of window and point.
    Synthetic {
        dim: usize,
        spectrum: SyntheticSpectrum,
        #[serde(default)]
        nominal_singular: bool,
    },
    GridSamples(GridData),
}

impl TestDistribution {
    pub fn dim(&self) -> usize {
        match self {
            TestDistribution::Delta { center } => center.len(),
            TestDistribution::PlaneJump { normal, .. } => normal.len(),
            TestDistribution::Gaussian { center, .. } => center.len(),
            TestDistribution::Synthetic { dim, .. } => *dim,
            TestDistribution::GridSamples(g) => g.shape.len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestDistribution::Delta { .. } => "delta",
            TestDistribution::PlaneJump { .. } => "plane-jump",
            TestDistribution::Gaussian { .. } => "gaussian",
            TestDistribution::Synthetic { .. } => "synthetic",
            TestDistribution::GridSamples(_) => "grid-samples",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::Invalid("distribution dimension must be positive".into()));
        }
        match self {
            TestDistribution::PlaneJump { normal, offset } => {
                if (norm(normal) - 1.0).abs() > 1e-12 || !offset.is_finite() {
                    return Err(Error::Invalid("plane-jump normal must be a unit vector".into()));
                }
            }
            TestDistribution::Gaussian { width, center } => {
                if !(*width > 0.0) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Invalid("gaussian width must be positive".into()));
                }
            }
            TestDistribution::Synthetic { spectrum, .. } => match spectrum {
                SyntheticSpectrum::RadialExp { rate, power } if !(*rate >= 0.0 && *power > 0.0) => {
                    return Err(Error::Invalid("radial-exp needs rate >= 0 and power > 0".into()))
                }
                SyntheticSpectrum::PowerLaw { exponent } if !(*exponent >= 0.0) => {
                    return Err(Error::Invalid("power-law exponent must be >= 0".into()))
                }
                _ => {}
            },
            TestDistribution::GridSamples(g) => g.validate()?,
            TestDistribution::Delta { center } => {
                if center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Invalid("delta center must be finite".into()));
                }
            }
        }
        Ok(())
    }

    /// f(c·x) up to a positive factor.
    pub fn dilate(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Invalid("dilation factor must be positive".into()));
        }
        Ok(match self {
            TestDistribution::Delta { center } => TestDistribution::Delta { center: center.iter().map(|x| x / c).collect() },
            TestDistribution::PlaneJump { normal, offset } => {
                TestDistribution::PlaneJump { normal: normal.clone(), offset: offset / c }
            }
            TestDistribution::Gaussian { center, width } => {
                TestDistribution::Gaussian { center: center.iter().map(|x| x / c).collect(), width: width / c }
            }
            TestDistribution::GridSamples(g) => TestDistribution::GridSamples(GridData {
                spacing: g.spacing / c,
                origin: g.origin.iter().map(|x| x / c).collect(),
                ..g.clone()
            }),
            TestDistribution::Synthetic { .. } => {
                return Err(Error::Invalid("synthetic spectra carry no spatial variable to dilate".into()))
            }
        })
    }

    /// Ground truth where the catalog knows it: Some(true) for a singular pair.
    pub fn nominal_singular(&self, x0: &[f64], dir: &[f64], angle_tol: f64, point_tol: f64) -> Option<bool> {
        match self {
            TestDistribution::Delta { center } => {
                let d: Vec<f64> = x0.iter().zip(center).map(|(a, b)| a - b).collect();
                Some(norm(&d) <= point_tol)
            }
            TestDistribution::PlaneJump { normal, offset } => {
                let on = (dot(normal, x0) - offset).abs() <= point_tol;
                let c = (dot(normal, dir) / norm(dir)).abs().min(1.0);
                Some(on && c.acos() <= angle_tol)
            }
            TestDistribution::Gaussian { .. } => Some(false),
            TestDistribution::Synthetic { nominal_singular, .. } => Some(*nominal_singular),
            TestDistribution::GridSamples(_) => None,
        }
    }
}

/// Anything that can be evaluated on the Fourier side.
pub trait Spectrum: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, xi: &[f64]) -> Result<Complex64>;
    fn eval_many(&self, xis: &[Vec<f64>]) -> Result<Vec<Complex64>> {
        xis.par_iter().map(|x| self.eval(x)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalRoute {
    ClosedForm,
    Quadrature1D,
    NestedQuadrature,
    FourierConvolution,
    DirectDft,
}

#[derive(Debug, Clone)]
enum AxisFactor {
    Taper,
    Gaussian { eta: Arc<Vec<f64>>, coef: Vec<Complex64> },
    Jump { lo: f64, hi: f64 },
}

#[derive(Debug, Clone)]
enum Route {
    Zero,
    Delta { amp: f64, center: Vec<f64> },
    Separable(Vec<AxisFactor>),
    JumpGeneral { normal: Vec<f64>, c: f64 },
    Synthetic(SyntheticSpectrum),
    Grid { points: Vec<(Vec<f64>, f64)> },
}

/// (φ(· − x₀) f)^ for a catalog distribution f and a tensor taper φ.
#[derive(Debug, Clone)]
pub struct LocalizedSpectrum {
    pub source: TestDistribution,
    pub taper: TensorTaper,
    pub x0: Vec<f64>,
    route: Route,
}

fn gaussian_nodes(width: f64, b: f64, half_support: f64) -> (Arc<Vec<f64>>, Vec<Complex64>) {
    let top = 5.05 / width;
    let panel = 0.5 / (1.0 + b.abs() + half_support);
    let panels = (2.0 * top / panel).ceil() as usize;
    let (xs, ws) = composite_rule(-top, top, panels, &GaussLegendre::new(12));
    let coef = xs
        .iter()
        .zip(&ws)
        .map(|(&eta, &w)| w * width * (-PI * (width * eta).powi(2)).exp() * cis_neg(eta * b))
        .collect();
    (Arc::new(xs), coef)
}

impl LocalizedSpectrum {
    pub fn new(source: &TestDistribution, taper: &TensorTaper, x0: &[f64]) -> Result<Self> {
        source.validate()?;
        let d = taper.dim();
        if source.dim() != d || x0.len() != d {
            return Err(Error::Invalid(format!(
                "dimension mismatch: source {}, window {}, point {}",
                source.dim(),
                d,
                x0.len()
            )));
        }
        let h = taper.half_width();
        let route = match source {
            TestDistribution::Delta { center } => {
                let y: Vec<f64> = center.iter().zip(x0).map(|(c, x)| c - x).collect();
                Route::Delta { amp: taper.value(&y), center: center.clone() }
            }
            TestDistribution::Gaussian { center, width } => Route::Separable(
                (0..d)
                    .map(|i| {
                        let (eta, coef) = gaussian_nodes(*width, center[i] - x0[i], h);
                        AxisFactor::Gaussian { eta, coef }
                    })
                    .collect(),
            ),
            TestDistribution::PlaneJump { normal, offset } => {
                let c = offset - dot(normal, x0);
                let nz: Vec<usize> = (0..d).filter(|&i| normal[i] != 0.0).collect();
                if nz.len() == 1 {
                    let k = nz[0];
                    let hk = taper.axes[k].half_width();
                    let (lo, hi) = if normal[k] > 0.0 { (c, hk) } else { (-hk, -c) };
                    let (lo, hi) = (lo.max(-hk), hi.min(hk));
                    if lo >= hi {
                        Route::Zero
                    } else {
                        let mut f = vec![AxisFactor::Taper; d];
                        if lo > -hk || hi < hk {
                            f[k] = AxisFactor::Jump { lo, hi };
                        }
                        Route::Separable(f)
                    }
                } else if d == 2 {
                    Route::JumpGeneral { normal: normal.clone(), c }
                } else {
                    return Err(Error::Unsupported { dim: d, cap: 2 });
                }
            }
            TestDistribution::Synthetic { spectrum, .. } => Route::Synthetic(spectrum.clone()),
            TestDistribution::GridSamples(g) => {
                let n: usize = g.values.len();
                let mut points = Vec::new();
                let mut idx = vec![0usize; d];
                for flat in 0..n {
                    let mut rem = flat;
                    for i in (0..d).rev() {
                        idx[i] = rem % g.shape[i];
                        rem /= g.shape[i];
                    }
                    let x: Vec<f64> = (0..d).map(|i| g.origin[i] + g.spacing * idx[i] as f64).collect();
                    let y: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
                    let w = taper.value(&y);
                    if w != 0.0 && g.values[flat] != 0.0 {
                        let wt = g.spacing.powi(d as i32) * g.values[flat] * g.taper_weight(&idx) * w;
                        points.push((x, wt));
                    }
                }
                Route::Grid { points }
            }
        };
        Ok(Self { source: source.clone(), taper: taper.clone(), x0: x0.to_vec(), route })
    }

    pub fn route(&self) -> EvalRoute {
        match &self.route {
            Route::Zero | Route::Delta { .. } | Route::Synthetic(_) => EvalRoute::ClosedForm,
            Route::Separable(f) => {
                if f.iter().any(|a| matches!(a, AxisFactor::Jump { .. })) {
                    EvalRoute::Quadrature1D
                } else if f.iter().any(|a| matches!(a, AxisFactor::Gaussian { .. })) {
                    EvalRoute::FourierConvolution
                } else {
                    EvalRoute::ClosedForm
                }
            }
            Route::JumpGeneral { .. } => EvalRoute::NestedQuadrature,
            Route::Grid { .. } => EvalRoute::DirectDft,
        }
    }

    fn axis_factor(&self, i: usize, f: &AxisFactor, z: f64) -> Result<Complex64> {
        let axis = &self.taper.axes[i];
        let phase = cis_neg(z * self.x0[i]);
        let v = match f {
            AxisFactor::Taper => Complex64::new(axis.spectrum(z), 0.0),
            AxisFactor::Gaussian { eta, coef } => {
                sum_complex(eta.iter().zip(coef).map(|(e, c)| c * axis.spectrum(z - e)))
            }
            AxisFactor::Jump { lo, hi } => partial_transform(axis, *lo, *hi, z)?,
        };
        Ok(v * phase)
    }

    fn eval_general_jump(&self, normal: &[f64], c: f64, xi: &[f64]) -> Result<Complex64> {
        // inner integral along the axis with the larger normal component
        let (i, o) = if normal[1].abs() >= normal[0].abs() { (1, 0) } else { (0, 1) };
        let (ai, ao) = (&self.taper.axes[i], &self.taper.axes[o]);
        let (hi_, ho) = (ai.half_width(), ao.half_width());
        let (ni, no) = (normal[i], normal[o]);
        let mut err = None;
        let outer = adaptive_gk(
            |yo| {
                let t = (c - no * yo) / ni;
                let (lo, hi) = if ni > 0.0 { (t.max(-hi_), hi_) } else { (-hi_, t.min(hi_)) };
                if lo >= hi {
                    return Complex64::new(0.0, 0.0);
                }
                match partial_transform(ai, lo, hi, xi[i]) {
                    Ok(v) => v * ao.profile(yo) * cis_neg(xi[o] * yo),
                    Err(e) => {
                        err.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                }
            },
            -ho,
            ho,
            1e-10,
            2000,
        );
        if let Some(e) = err {
            return Err(e);
        }
        let v = outer.map_err(|f| Error::Quadrature { achieved: f.achieved, requested: 1e-10 })?;
        Ok(self.taper.scale * v * cis_neg(dot(xi, &self.x0)))
    }
}

/// ∫_lo^hi φ_axis(y) e^{−2πiζy} dy by adaptive Gauss–Kronrod.
pub fn partial_transform(axis: &AxisTaper, lo: f64, hi: f64, z: f64) -> Result<Complex64> {
    let mass = GaussLegendre::new(24).integrate(lo, hi, |y| axis.profile(y).abs());
    let tol = (JUMP_REL_TOL * mass).clamp(1e-300, 1e-10);
    adaptive_gk(|y| axis.profile(y) * cis_neg(z * y), lo, hi, tol, 4000)
        .map_err(|f| Error::Quadrature { achieved: f.achieved, requested: tol })
}

impl Spectrum for LocalizedSpectrum {
    fn dim(&self) -> usize {
        self.taper.dim()
    }

    fn eval(&self, xi: &[f64]) -> Result<Complex64> {
        if xi.len() != self.dim() || xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("frequency must be finite with the spectrum's dimension".into()));
        }
        match &self.route {
            Route::Zero => Ok(Complex64::new(0.0, 0.0)),
            Route::Delta { amp, center } => Ok(*amp * cis_neg(dot(xi, center))),
            Route::Synthetic(s) => Ok(Complex64::new(s.eval(xi), 0.0)),
            Route::Separable(f) => {
                let mut v = Complex64::new(self.taper.scale, 0.0);
                for (i, a) in f.iter().enumerate() {
                    v *= self.axis_factor(i, a, xi[i])?;
                }
                Ok(v)
            }
            Route::JumpGeneral { normal, c } => self.eval_general_jump(normal, *c, xi),
            Route::Grid { points } => Ok(sum_complex(points.iter().map(|(x, w)| *w * cis_neg(dot(xi, x))))),
        }
    }

    /// Separable sources share per-axis factor values across all requested points.
    fn eval_many(&self, xis: &[Vec<f64>]) -> Result<Vec<Complex64>> {
        let Route::Separable(f) = &self.route else {
            return xis.par_iter().map(|x| self.eval(x)).collect();
        };
        let d = self.dim();
        let mut tables = Vec::with_capacity(d);
        for (i, a) in f.iter().enumerate() {
            let mut zs: Vec<f64> = xis.iter().map(|x| x[i]).collect();
            zs.sort_by(|a, b| a.total_cmp(b));
            zs.dedup();
            let vals = zs.par_iter().map(|&z| self.axis_factor(i, a, z)).collect::<Result<Vec<_>>>()?;
            tables.push((zs, vals));
        }
        Ok(xis
            .iter()
            .map(|x| {
                let mut v = Complex64::new(self.taper.scale, 0.0);
                for (i, (zs, vals)) in tables.iter().enumerate() {
                    let j = zs.binary_search_by(|z| z.total_cmp(&x[i])).expect("coordinate cached");
                    v *= vals[j];
                }
                v
            })
            .collect())
    }
}

/// Spectrum of e_{−t}·g: ξ ↦ ĝ(ξ + t).
pub struct Modulated<'a, S: Spectrum> {
    pub inner: &'a S,
    pub t: Vec<f64>,
}

impl<S: Spectrum> Spectrum for Modulated<'_, S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, xi: &[f64]) -> Result<Complex64> {
        let s: Vec<f64> = xi.iter().zip(&self.t).map(|(a, b)| a + b).collect();
        self.inner.eval(&s)
    }
}

/// Windowed spectrum of f at x₀.
pub fn window_fourier(f: &TestDistribution, w: &Window, x0: &[f64], xi: &[f64]) -> Result<Complex64> {
    LocalizedSpectrum::new(f, &w.taper, x0)?.eval(xi)
}

/// (χ_p f)^(ξ).
pub fn apply_cutoff(family: &CutoffFamily, f: &TestDistribution, p: usize, xi: &[f64]) -> Result<Complex64> {
    LocalizedSpectrum::new(f, family.taper(p)?, &family.center)?.eval(xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn default_window(d: usize) -> Window {
        Window::new(WindowSpec::default(), d).unwrap()
    }

    #[test]
    fn window_normalized_and_supported() {
        let w = default_window(2);
        assert!((w.spectrum(&[0.0, 0.0]) - 1.0).abs() < 1e-12);
        let axis = &w.taper.axes[0];
        let h = axis.half_width();
        let mass = GaussLegendre::new(64).integrate(-h, h, |y| axis.profile(y));
        assert!((mass - 1.0).abs() < 1e-10, "mass {mass}");
        // direct transform of the profile reproduces the spectrum
        let direct = GaussLegendre::new(96).integrate(-h, h, |y| axis.profile(y) * (2.0 * PI * 3.7 * y).cos());
        assert!((direct - axis.spectrum(3.7)).abs() < 1e-10);
    }

    #[test]
    fn profile_vanishes_outside_support() {
        let w = default_window(1);
        let axis = &w.taper.axes[0];
        let h = axis.half_width();
        // FT tabulation leaves no mass beyond h
        let outside = match axis.as_ref() {
            AxisTaper::Product(p) => {
                let (xs, ws) = composite_rule(0.0, p.xi_max, 400, &GaussLegendre::new(12));
                GaussLegendre::new(32).integrate(h, 2.0 * h, |y| {
                    xs.iter().zip(&ws).map(|(x, wt)| 2.0 * wt * p.spectrum(*x) * (2.0 * PI * x * y).cos()).sum::<f64>().abs()
                })
            }
            _ => unreachable!(),
        };
        assert!(outside < 1e-8, "{outside}");
    }

    #[test]
    fn bspline_matches_transform() {
        let w = Window::new(WindowSpec::BSpline { order: 4, radius: 0.5 }, 1).unwrap();
        let axis = &w.taper.axes[0];
        let v = GaussLegendre::new(64).integrate(-0.5, 0.5, |y| axis.profile(y) * (2.0 * PI * 2.3 * y).cos());
        // piecewise cubic: integrate panel by panel
        let mut s = 0.0;
        for k in 0..4 {
            let a = -0.5 + 0.25 * k as f64;
            s += GaussLegendre::new(16).integrate(a, a + 0.25, |y| axis.profile(y) * (2.0 * PI * 2.3 * y).cos());
        }
        assert!((s - axis.spectrum(2.3)).abs() < 1e-13, "{s} {}", axis.spectrum(2.3));
        assert!((v - s).abs() < 1e-3);
    }

    #[test]
    fn delta_at_center_has_unit_modulus() {
        let w = Window::new(
            WindowSpec::GevreyProduct { s0: 1.5, terms: 24, radius: 0.5, placement: Placement::Plateau },
            2,
        )
        .unwrap();
        assert!((w.value(&[0.0, 0.0]) - 1.0).abs() < 1e-9);
        let f = TestDistribution::Delta { center: vec![0.3, -0.2] };
        let ls = LocalizedSpectrum::new(&f, &w.taper, &[0.3, -0.2]).unwrap();
        for xi in [[0.0, 0.0], [10.0, -3.0], [77.5, 120.0]] {
            assert!((ls.eval(&xi).unwrap().norm() - 1.0).abs() < 1e-9);
        }
        let far = LocalizedSpectrum::new(&f, &w.taper, &[2.0, 2.0]).unwrap();
        assert_eq!(far.eval(&[1.0, 2.0]).unwrap().norm(), 0.0);
    }

    #[test]
    fn gaussian_matches_tensor_quadrature() {
        let w = default_window(2);
        let f = TestDistribution::Gaussian { center: vec![0.1, -0.05], width: 0.3 };
        let x0 = [0.05, 0.02];
        let ls = LocalizedSpectrum::new(&f, &w.taper, &x0).unwrap();
        let h = w.taper.half_width();
        let xi = [10.0, 0.0];
        let gl = GaussLegendre::new(200);
        let mut oracle = Complex64::new(0.0, 0.0);
        for (y0, w0) in gl.mapped(-h, h) {
            for (y1, w1) in gl.mapped(-h, h) {
                let x = [y0 + x0[0], y1 + x0[1]];
                let g = (-PI * ((x[0] - 0.1).powi(2) + (x[1] + 0.05).powi(2)) / 0.09).exp();
                oracle += w0 * w1 * w.value(&[y0, y1]) * g * cis_neg(xi[0] * x[0] + xi[1] * x[1]);
            }
        }
        let v = ls.eval(&xi).unwrap();
        assert!((v.norm() - oracle.norm()).abs() < 1e-8, "{} {}", v.norm(), oracle.norm());
        assert!((v - oracle).norm() < 1e-8);
    }

    #[test]
    fn jump_matches_general_route() {
        let w = default_window(2);
        let f = TestDistribution::PlaneJump { normal: vec![1.0, 0.0], offset: 0.1 };
        let ls = LocalizedSpectrum::new(&f, &w.taper, &[0.0, 0.0]).unwrap();
        assert_eq!(ls.route(), EvalRoute::Quadrature1D);
        let mut g = ls.clone();
        g.route = Route::JumpGeneral { normal: vec![1.0, 0.0], c: 0.1 };
        for xi in [[7.0, 0.0], [5.0, 2.5]] {
            let a = ls.eval(&xi).unwrap();
            let b = g.eval(&xi).unwrap();
            assert!((a - b).norm() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn cutoff_plateau_and_support() {
        let m = WeightSequence::gevrey(1.0, 40).unwrap();
        let fam = CutoffFamily::new(&[0.0, 0.0], 0.1, 0.5, 4, &m).unwrap();
        for p in 1..=4 {
            assert!((fam.chi(p, &[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-6);
            assert!((fam.chi(p, &[0.2, -0.2]).unwrap() - 1.0).abs() < 1e-6);
            assert!(fam.chi(p, &[0.45, 0.0]).unwrap().abs() < 1e-8);
        }
        assert!(matches!(CutoffFamily::new(&[0.0], 0.5, 0.5, 2, &m), Err(Error::Geometry(_))));
    }

    #[test]
    fn grid_binary_round_trip() {
        let g = GridData { shape: vec![2, 3], spacing: 0.1, origin: vec![0.0, 1.0], values: (0..6).map(|v| v as f64).collect(), oversampling: 4 };
        assert_eq!(GridData::parse_binary(&g.to_binary()).unwrap(), g);
        let t = GridData::parse_text("2\n2 3\n0.1\n0 1\n0 1 2\n3 4 5\n").unwrap();
        assert_eq!(t, g);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn hermitian_symmetry(xi0 in -60.0f64..60.0, xi1 in -60.0f64..60.0, which in 0usize..4) {
            let w = default_window(2);
            let f = match which {
                0 => TestDistribution::Delta { center: vec![0.1, 0.05] },
                1 => TestDistribution::Gaussian { center: vec![0.1, 0.0], width: 0.25 },
                2 => TestDistribution::PlaneJump { normal: vec![0.0, -1.0], offset: 0.05 },
                _ => TestDistribution::GridSamples(GridData {
                    shape: vec![9, 9], spacing: 0.1, origin: vec![-0.4, -0.4],
                    values: (0..81).map(|i| ((i * 7) % 5) as f64).collect(), oversampling: 4 }),
            };
            let ls = LocalizedSpectrum::new(&f, &w.taper, &[0.0, 0.0]).unwrap();
            let a = ls.eval(&[xi0, xi1]).unwrap();
            let b = ls.eval(&[-xi0, -xi1]).unwrap();
            prop_assert!((a - b.conj()).norm() <= 1e-10);
        }

        #[test]
        fn modulation_shifts(t0 in -5.0f64..5.0, t1 in -5.0f64..5.0, x in -20.0f64..20.0) {
            let w = default_window(2);
            let f = TestDistribution::Gaussian { center: vec![0.0, 0.1], width: 0.4 };
            let ls = LocalizedSpectrum::new(&f, &w.taper, &[0.0, 0.0]).unwrap();
            let m = Modulated { inner: &ls, t: vec![t0, t1] };
            prop_assert_eq!(m.eval(&[x, 1.0]).unwrap(), ls.eval(&[x + t0, 1.0 + t1]).unwrap());
        }

        #[test]
        fn eval_many_matches_eval(xs in proptest::collection::vec((-40i32..40, -40i32..40), 1..20)) {
            let w = default_window(2);
            let f = TestDistribution::PlaneJump { normal: vec![1.0, 0.0], offset: 0.0 };
            let ls = LocalizedSpectrum::new(&f, &w.taper, &[0.0, 0.1]).unwrap();
            let pts: Vec<Vec<f64>> = xs.iter().map(|(a, b)| vec![*a as f64, *b as f64]).collect();
            let many = ls.eval_many(&pts).unwrap();
            for (p, v) in pts.iter().zip(many) {
                prop_assert!((ls.eval(p).unwrap() - v).norm() <= 1e-15 * (1.0 + v.norm()));
            }
        }
    }
}
