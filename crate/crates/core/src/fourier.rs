//! Fourier series of Λ-periodic functions: coefficients over a fundamental region and from
//! closed-form spectra, synthesis, the partition of unity η, Poisson summation and growth fits.

use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticePoint};
use crate::localize::{TensorTaper, Window};
use crate::numerics::{cis_neg, dot, least_squares, norm, sin_pi, sinc, sum_complex, GaussLegendre, Neumaier};
use crate::weights::WeightFunction;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// g(x) = φ(x − center) e^{2πi ν·x} for a tensor taper φ.
#[derive(Debug, Clone)]
pub struct CompactSource {
    pub taper: TensorTaper,
    pub center: Vec<f64>,
    pub modulation: Vec<f64>,
}

impl CompactSource {
    pub fn new(taper: TensorTaper, center: Vec<f64>, modulation: Option<Vec<f64>>) -> Result<Self> {
        let d = taper.dim();
        let modulation = modulation.unwrap_or_else(|| vec![0.0; d]);
        if center.len() != d || modulation.len() != d {
            return Err(Error::Invalid("compact source dimensions disagree".into()));
        }
        Ok(Self { taper, center, modulation })
    }

    pub fn value(&self, x: &[f64]) -> Complex64 {
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let v = self.taper.value(&y);
        if v == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        v * cis_neg(-dot(&self.modulation, x))
    }

    pub fn spectrum(&self, xi: &[f64]) -> Complex64 {
        let s: Vec<f64> = xi.iter().zip(&self.modulation).map(|(a, b)| a - b).collect();
        self.taper.spectrum(&s) * cis_neg(dot(&s, &self.center))
    }

    pub fn support_radius(&self) -> f64 {
        self.taper.support_radius()
    }

    pub fn is_real(&self) -> bool {
        self.modulation.iter().all(|&v| v == 0.0)
    }
}

/// Λ-periodic sources.
#[derive(Debug, Clone)]
pub enum PeriodicSource {
    Constant(f64),
    /// e^{2πi ν·x} with ν ∈ Λ*.
    Harmonic { nu: Vec<f64> },
    /// Σ_μ e^{−π|x + μ − c|²/w²}.
    PeriodizedGaussian { center: Vec<f64>, width: f64 },
    Periodized(CompactSource),
    /// Σ_μ δ(x + μ − c).
    PeriodizedDelta { center: Vec<f64> },
}

impl PeriodicSource {
    pub fn dim(&self) -> Option<usize> {
        match self {
            PeriodicSource::Constant(_) => None,
            PeriodicSource::Harmonic { nu } => Some(nu.len()),
            PeriodicSource::PeriodizedGaussian { center, .. } => Some(center.len()),
            PeriodicSource::Periodized(s) => Some(s.center.len()),
            PeriodicSource::PeriodizedDelta { center } => Some(center.len()),
        }
    }

    fn is_real(&self) -> bool {
        match self {
            PeriodicSource::Constant(_) | PeriodicSource::PeriodizedGaussian { .. } => true,
            PeriodicSource::Harmonic { nu } => nu.iter().all(|&v| v == 0.0),
            PeriodicSource::Periodized(s) => s.is_real(),
            PeriodicSource::PeriodizedDelta { .. } => true,
        }
    }
}

/// Pointwise evaluator for a periodic source on a given lattice.
pub struct PeriodicEvaluator<'a> {
    source: &'a PeriodicSource,
    lattice: &'a Lattice,
    shifts: Vec<Vec<f64>>,
}

impl<'a> PeriodicEvaluator<'a> {
    /// Shifts cover every x in the ball of radius `reach` about the origin.
    pub fn new(source: &'a PeriodicSource, lattice: &'a Lattice, reach: f64) -> Result<Self> {
        if let Some(d) = source.dim() {
            if d != lattice.dim() {
                return Err(Error::Invalid("source and lattice dimensions differ".into()));
            }
        }
        let shifts = match source {
            PeriodicSource::PeriodizedGaussian { center, width } => {
                let r = reach + norm(center) + 8.0 * width;
                lattice.enumerate_points(r, 0.0)?.into_iter().map(|p| p.x).collect()
            }
            PeriodicSource::Periodized(s) => {
                let r = reach + norm(&s.center) + s.support_radius();
                lattice.enumerate_points(r, 0.0)?.into_iter().map(|p| p.x).collect()
            }
            _ => Vec::new(),
        };
        Ok(Self { source, lattice, shifts })
    }

    pub fn value(&self, x: &[f64]) -> Result<Complex64> {
        let _ = self.lattice;
        Ok(match self.source {
            PeriodicSource::Constant(c) => Complex64::new(*c, 0.0),
            PeriodicSource::Harmonic { nu } => cis_neg(-dot(nu, x)),
            PeriodicSource::PeriodizedGaussian { center, width } => {
                let mut s = Neumaier::default();
                for m in &self.shifts {
                    let r2: f64 = x.iter().zip(m).zip(center).map(|((a, b), c)| (a + b - c).powi(2)).sum();
                    s.add((-PI * r2 / (width * width)).exp());
                }
                Complex64::new(s.value(), 0.0)
            }
            PeriodicSource::Periodized(src) => sum_complex(self.shifts.iter().map(|m| {
                let y: Vec<f64> = x.iter().zip(m).map(|(a, b)| a + b).collect();
                src.value(&y)
            })),
            PeriodicSource::PeriodizedDelta { .. } => {
                return Err(Error::Invalid("a delta comb has no pointwise values".into()))
            }
        })
    }
}

/// Coefficients c_{μ*} indexed by Λ*-points, lexicographic in the dual index.
#[derive(Debug, Clone, Serialize)]
pub struct FourierCoefficients {
    #[serde(skip)]
    pub lattice: Lattice,
    pub radius: f64,
    pub points: Vec<LatticePoint>,
    pub values: Vec<Complex64>,
    pub quadrature_error: Option<f64>,
}

impl FourierCoefficients {
    /// Coefficients from a closure of the dual point.
    pub fn from_fn<F: Fn(&[f64]) -> Complex64>(lattice: &Lattice, radius: f64, f: F) -> Result<Self> {
        let points = lattice.dual().enumerate_points(radius, 0.0)?;
        let values = points.iter().map(|p| f(&p.x)).collect();
        Ok(Self { lattice: lattice.clone(), radius, points, values, quadrature_error: None })
    }

    pub fn get(&self, k: &[i64]) -> Option<Complex64> {
        self.points.iter().position(|p| p.k == k).map(|i| self.values[i])
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Rows (index vector, modulus, phase).
    pub fn to_csv(&self) -> String {
        let d = self.lattice.dim();
        let mut out = String::new();
        let head: Vec<String> = (0..d).map(|i| format!("k{i}")).collect();
        out.push_str(&format!("{},modulus,phase\n", head.join(",")));
        for (p, v) in self.points.iter().zip(&self.values) {
            let ks: Vec<String> = p.k.iter().map(|k| k.to_string()).collect();
            out.push_str(&format!("{},{:.17e},{:.17e}\n", ks.join(","), v.norm(), v.arg()));
        }
        out
    }
}

/// Tensor Gauss–Legendre over the region T·([0,1)^d + shift).
#[derive(Debug, Clone, Serialize)]
pub struct RegionQuadrature {
    pub order: usize,
    /// Equal panels per axis, each with `order` nodes.
    pub panels: usize,
    pub shift: Vec<f64>,
    /// Error estimate tolerance relative to max |c|.
    pub tolerance: f64,
}

impl RegionQuadrature {
    pub fn new(order: usize, d: usize) -> Self {
        Self { order, panels: 4, shift: vec![0.0; d], tolerance: 1e-6 }
    }
}

fn region_coefficients_at_order(
    ev: &PeriodicEvaluator,
    lattice: &Lattice,
    points: &[LatticePoint],
    order: usize,
    panels: usize,
    shift: &[f64],
) -> Result<Vec<Complex64>> {
    let d = lattice.dim();
    let gl = GaussLegendre::new(order);
    let nodes: Vec<Vec<(f64, f64)>> = (0..d)
        .map(|i| {
            let (xs, ws) = crate::numerics::composite_rule(shift[i], shift[i] + 1.0, panels, &gl);
            xs.into_iter().zip(ws).collect()
        })
        .collect();
    let order = order * panels;
    let total = order.pow(d as u32);
    // sample g(Tu) on the tensor grid, flat index with the last axis fastest
    let samples = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut u = vec![0.0; d];
            let mut w = 1.0;
            for i in (0..d).rev() {
                let (x, wt) = nodes[i][rem % order];
                u[i] = x;
                w *= wt;
                rem /= order;
            }
            let x: Vec<f64> =
                (0..d).map(|i| (0..d).map(|j| lattice.generator()[(i, j)] * u[j]).sum()).collect();
            ev.value(&x).map(|v| (u, w * v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(points
        .par_iter()
        .map(|p| {
            // c_k = ∫_{[0,1)^d} g(Tu) e^{−2πi k·u} du
            let kf: Vec<f64> = p.k.iter().map(|&k| k as f64).collect();
            sum_complex(samples.iter().map(|(u, v)| v * cis_neg(dot(&kf, u))))
        })
        .collect())
}

/// c_{μ*} = (1/|Λ|) ∫_{I_Λ} g e_{−μ*}.
pub fn coefficients_by_region(
    source: &PeriodicSource,
    lattice: &Lattice,
    radius: f64,
    quad: &RegionQuadrature,
) -> Result<FourierCoefficients> {
    let d = lattice.dim();
    if quad.order < 2 || quad.panels == 0 || quad.shift.len() != d {
        return Err(Error::Invalid("quadrature order must be >= 2 and shift must match the dimension".into()));
    }
    let points = lattice.dual().enumerate_points(radius, 0.0)?;
    let reach = crate::lattice::FundamentalRegion::new(lattice.clone(), false).diameter_bound()
        + norm(&lattice.point(&quad.shift.iter().map(|s| s.floor() as i64).collect::<Vec<_>>()))
        + norm(&quad.shift) * lattice.generator().norm();
    let ev = PeriodicEvaluator::new(source, lattice, reach)?;
    let hi = region_coefficients_at_order(&ev, lattice, &points, quad.order, quad.panels, &quad.shift)?;
    let lo = region_coefficients_at_order(&ev, lattice, &points, quad.order.saturating_sub(8).max(2), quad.panels, &quad.shift)?;
    let scale = hi.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let err = hi.iter().zip(&lo).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if err > quad.tolerance * scale {
        return Err(Error::Quadrature { achieved: err / scale, requested: quad.tolerance });
    }
    let mut values = hi;
    if source.is_real() {
        // exact Hermitian symmetry for real sources
        enforce_hermitian(&points, &mut values);
    }
    Ok(FourierCoefficients { lattice: lattice.clone(), radius, points, values, quadrature_error: Some(err) })
}

fn enforce_hermitian(points: &[LatticePoint], values: &mut [Complex64]) {
    let n = points.len();
    for i in 0..n {
        let neg: Vec<i64> = points[i].k.iter().map(|k| -k).collect();
        if let Ok(j) = points.binary_search_by(|p| p.k.cmp(&neg)) {
            if j > i {
                let avg = 0.5 * (values[i] + values[j].conj());
                values[i] = avg;
                values[j] = avg.conj();
            } else if j == i {
                values[i] = Complex64::new(values[i].re, 0.0);
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParsevalReport {
    pub coefficient_sum: f64,
    pub mean_square: f64,
    pub relative: f64,
}

/// Σ|c_{μ*}|² against (1/|Λ|)∫_{I_Λ} |g|², the latter on the tensor rule of `quad`.
pub fn parseval_check(
    source: &PeriodicSource,
    coeffs: &FourierCoefficients,
    quad: &RegionQuadrature,
) -> Result<ParsevalReport> {
    let lattice = &coeffs.lattice;
    let d = lattice.dim();
    if quad.order < 2 || quad.panels == 0 || quad.shift.len() != d {
        return Err(Error::Invalid("quadrature order must be >= 2 and shift must match the dimension".into()));
    }
    let reach = crate::lattice::FundamentalRegion::new(lattice.clone(), false).diameter_bound();
    let ev = PeriodicEvaluator::new(source, lattice, reach)?;
    let gl = GaussLegendre::new(quad.order);
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..d)
        .map(|i| crate::numerics::composite_rule(quad.shift[i], quad.shift[i] + 1.0, quad.panels, &gl))
        .collect();
    let n = quad.order * quad.panels;
    let terms = (0..n.pow(d as u32))
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut u = vec![0.0; d];
            let mut w = 1.0;
            for i in (0..d).rev() {
                u[i] = axes[i].0[rem % n];
                w *= axes[i].1[rem % n];
                rem /= n;
            }
            let x: Vec<f64> =
                (0..d).map(|i| (0..d).map(|j| lattice.generator()[(i, j)] * u[j]).sum()).collect();
            ev.value(&x).map(|v| w * v.norm_sqr())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean_square = crate::numerics::sum_real(terms);
    let coefficient_sum = crate::numerics::sum_real(coeffs.values.iter().map(|c| c.norm_sqr()));
    Ok(ParsevalReport {
        coefficient_sum,
        mean_square,
        relative: (coefficient_sum - mean_square).abs() / mean_square.abs().max(f64::MIN_POSITIVE),
    })
}

/// (ŝupp − supp) ∩ Λ = {0}: the periodization does not overlap itself.
pub fn check_support(source: &CompactSource, lattice: &Lattice) -> Result<()> {
    let halves: Vec<f64> = source.taper.axes.iter().map(|a| a.half_width()).collect();
    let reach = 2.0 * norm(&halves);
    for p in lattice.enumerate_points(reach, 0.0)? {
        if p.k.iter().all(|&k| k == 0) {
            continue;
        }
        if p.x.iter().zip(&halves).all(|(x, h)| x.abs() < 2.0 * h) {
            return Err(Error::Support(format!(
                "support overlaps its translate by lattice vector {:?}",
                p.x
            )));
        }
    }
    Ok(())
}

/// c_{μ*} = ĝ(μ*)/|Λ| for the periodization of a compactly supported g.
pub fn coefficients_by_window(source: &PeriodicSource, lattice: &Lattice, radius: f64) -> Result<FourierCoefficients> {
    let cov = lattice.covolume();
    match source {
        PeriodicSource::Periodized(s) => {
            if s.center.len() != lattice.dim() {
                return Err(Error::Invalid("source and lattice dimensions differ".into()));
            }
            check_support(s, lattice)?;
            FourierCoefficients::from_fn(lattice, radius, |xi| s.spectrum(xi) / cov)
        }
        PeriodicSource::PeriodizedDelta { center } => {
            FourierCoefficients::from_fn(lattice, radius, |xi| cis_neg(dot(xi, center)) / cov)
        }
        _ => Err(Error::Support("source is not the periodization of a compactly supported function".into())),
    }
}

/// Σ c_{μ*} e^{2πiμ*·x} in stored order.
pub fn synthesize(coeffs: &FourierCoefficients, x: &[f64]) -> Complex64 {
    sum_complex(coeffs.points.iter().zip(&coeffs.values).map(|(p, c)| {
        // phase through the integer index so that periodicity is exact up to rounding of T^{-1}x
        let u = coeffs.lattice.coordinates(x);
        let t: f64 = p.k.iter().zip(&u).map(|(&k, u)| k as f64 * (u - u.floor())).sum();
        c * cis_neg(-t)
    }))
}

/// η with η̂(ξ) = φ̂(ξ) ∏_j sinc(2ξ·μ_j) and Σ_μ η(· + μ) = 1.
pub struct PartitionOfUnity {
    pub lattice: Lattice,
    pub window: Window,
    period: f64,
    zeta_max: f64,
    grid: OnceLock<Vec<Complex64>>,
    n: usize,
}

/// Period (in lattice coordinates) and frequency extent of the inverse-transform grid.
pub const ETA_PERIOD: f64 = 4.0;
pub const ETA_ZETA_MAX: f64 = 96.0;

pub fn build_partition_of_unity(lattice: &Lattice, seed: &Window) -> Result<PartitionOfUnity> {
    if seed.dim() != lattice.dim() {
        return Err(Error::Invalid("window and lattice dimensions differ".into()));
    }
    for c in lattice.basis() {
        if !(norm(&c) > 0.0) {
            return Err(Error::Geometry("degenerate generator column".into()));
        }
    }
    let window = seed.with_mass(lattice.covolume());
    let reach = lattice.coordinates(&vec![window.support_radius(); lattice.dim()]);
    let ti = lattice.generator_inverse();
    let row_max = (0..ti.nrows()).map(|i| ti.row(i).norm()).fold(0.0, f64::max);
    let u_extent = 1.0 + window.support_radius() * row_max;
    if 2.0 * u_extent >= ETA_PERIOD || reach.iter().any(|v| !v.is_finite()) {
        return Err(Error::Geometry("window too wide for the inverse-transform period".into()));
    }
    let n = (2.0 * ETA_ZETA_MAX * ETA_PERIOD).round() as usize;
    Ok(PartitionOfUnity { lattice: lattice.clone(), window, period: ETA_PERIOD, zeta_max: ETA_ZETA_MAX, grid: OnceLock::new(), n })
}

impl PartitionOfUnity {
    /// η̂ at ξ given in dual coordinates ζ = T^⊤ξ.
    pub fn eta_hat_dual(&self, zeta: &[f64]) -> f64 {
        let d = self.lattice.dim();
        let xi: Vec<f64> = (0..d)
            .map(|i| (0..d).map(|j| self.lattice.generator_inverse()[(j, i)] * zeta[j]).sum())
            .collect();
        let mut v = self.window.spectrum(&xi);
        for z in zeta {
            v *= if *z == 0.0 { 1.0 } else { sin_pi(2.0 * z) / (2.0 * PI * z) };
        }
        v
    }

    /// η̂(ξ).
    pub fn eta_hat(&self, xi: &[f64]) -> f64 {
        let mut v = self.window.spectrum(xi);
        for mu in self.lattice.basis() {
            v *= sinc(2.0 * dot(xi, &mu));
        }
        v
    }

    fn grid(&self) -> &Vec<Complex64> {
        self.grid.get_or_init(|| {
            let d = self.lattice.dim();
            let n = self.n;
            let dz = 1.0 / self.period;
            let total = n.pow(d as u32);
            let cov = self.lattice.covolume();
            let mut data: Vec<Complex64> = (0..total)
                .into_par_iter()
                .map(|flat| {
                    let mut rem = flat;
                    let mut zeta = vec![0.0; d];
                    for i in (0..d).rev() {
                        let m = (rem % n) as i64;
                        let m = if m >= (n / 2) as i64 { m - n as i64 } else { m };
                        zeta[i] = m as f64 * dz;
                        rem /= n;
                    }
                    Complex64::new(self.eta_hat_dual(&zeta) * dz.powi(d as i32) / cov, 0.0)
                })
                .collect();
            fft_nd(&mut data, n, d, true);
            data
        })
    }

    /// η(x) on the grid u = T^{-1}x ∈ (period/n)·ℤ^d.
    pub fn grid_spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    fn grid_value(&self, j: &[i64]) -> f64 {
        let n = self.n as i64;
        let mut flat = 0usize;
        for &ji in j {
            flat = flat * self.n + ji.rem_euclid(n) as usize;
        }
        self.grid()[flat].re
    }

    /// η(x) by direct Riemann summation of the inverse transform.
    pub fn eta(&self, x: &[f64]) -> f64 {
        let u = self.lattice.coordinates(x);
        if u.iter().any(|v| v.abs() >= self.period / 2.0) {
            return 0.0;
        }
        let d = self.lattice.dim();
        let n = self.n;
        let dz = 1.0 / self.period;
        let cov = self.lattice.covolume();
        let total = n.pow(d as u32);
        let s: f64 = (0..total)
            .into_par_iter()
            .map(|flat| {
                let mut rem = flat;
                let mut zeta = vec![0.0; d];
                for i in (0..d).rev() {
                    zeta[i] = ((rem % n) as f64 - (n / 2) as f64) * dz;
                    rem /= n;
                }
                self.eta_hat_dual(&zeta) * crate::numerics::cos_pi(2.0 * dot(&zeta, &u))
            })
            .collect::<Vec<f64>>()
            .into_iter()
            .sum();
        s * dz.powi(d as i32) / cov
    }

    /// max |Σ_{|μ| ≤ radius} η(x + μ) − 1| over an m^d grid of the fundamental cell.
    pub fn partition_error(&self, m: usize, radius: f64) -> Result<f64> {
        let steps = self.n as f64 / self.period;
        if (steps / m as f64).fract() != 0.0 {
            return Err(Error::Invalid(format!("grid size {m} does not divide {steps}")));
        }
        let stride = (steps as usize) / m;
        let d = self.lattice.dim();
        let shifts: Vec<LatticePoint> = self.lattice.enumerate_points(radius, 0.0)?;
        let total = m.pow(d as u32);
        let errs: Vec<f64> = (0..total)
            .into_par_iter()
            .map(|flat| {
                let mut rem = flat;
                let mut j = vec![0i64; d];
                for i in (0..d).rev() {
                    j[i] = ((rem % m) * stride) as i64;
                    rem /= m;
                }
                let mut s = Neumaier::default();
                for p in &shifts {
                    let jj: Vec<i64> = j.iter().zip(&p.k).map(|(a, k)| a + k * steps as i64).collect();
                    if jj.iter().all(|v| (v.abs() as f64) < self.n as f64 / 2.0) {
                        s.add(self.grid_value(&jj));
                    }
                }
                (s.value() - 1.0).abs()
            })
            .collect();
        Ok(errs.into_iter().fold(0.0, f64::max))
    }

    /// Relative |η̂(μ*)|/η̂(0) at the `count` nearest nonzero dual points.
    pub fn dual_zero_residuals(&self, count: usize) -> Result<Vec<(Vec<i64>, f64)>> {
        let dual = self.lattice.dual();
        let mut r = 1.0;
        let pts = loop {
            let p = dual.enumerate_points(r, 0.0)?;
            if p.len() > count {
                break p;
            }
            r *= 1.5;
        };
        let mut pts: Vec<LatticePoint> = pts.into_iter().filter(|p| p.k.iter().any(|&k| k != 0)).collect();
        pts.sort_by(|a, b| a.norm.total_cmp(&b.norm).then(a.k.cmp(&b.k)));
        let e0 = self.eta_hat(&vec![0.0; self.lattice.dim()]);
        Ok(pts.into_iter().take(count).map(|p| {
            let v = self.eta_hat(&p.x).abs() / e0;
            (p.k, v)
        }).collect())
    }

    pub fn zeta_max(&self) -> f64 {
        self.zeta_max
    }
}

/// In-place d-dimensional FFT on an n^d array (last axis fastest); `inverse` uses e^{+2πi}.
pub fn fft_nd(data: &mut [Complex64], n: usize, d: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let total = data.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        for start in 0..total {
            if !(start / stride).is_multiple_of(n) {
                continue;
            }
            for k in 0..n {
                buf[k] = data[start + k * stride];
            }
            fft.process(&mut buf);
            for k in 0..n {
                data[start + k * stride] = buf[k];
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PoissonReport {
    pub max_discrepancy: f64,
    pub lhs_tail: f64,
    pub rhs_tail: f64,
    pub lhs_terms: usize,
    pub rhs_terms: usize,
}

/// max_x |Σ_μ g(x+μ) − (1/|Λ|)Σ_{μ*} ĝ(μ*) e^{2πiμ*·x}| with both sums truncated at radius n_trunc.
pub fn poisson_check<G, H>(g: G, g_hat: H, lattice: &Lattice, x_grid: &[Vec<f64>], n_trunc: f64) -> Result<PoissonReport>
where
    G: Fn(&[f64]) -> f64 + Sync,
    H: Fn(&[f64]) -> Complex64 + Sync,
{
    let prim = lattice.enumerate_points(n_trunc, 0.0)?;
    let dual = lattice.dual().enumerate_points(n_trunc, 0.0)?;
    let cov = lattice.covolume();
    let hat: Vec<Complex64> = dual.iter().map(|p| g_hat(&p.x)).collect();
    let disc: Vec<f64> = x_grid
        .par_iter()
        .map(|x| {
            let mut l = Neumaier::default();
            for p in &prim {
                let y: Vec<f64> = x.iter().zip(&p.x).map(|(a, b)| a + b).collect();
                l.add(g(&y));
            }
            let r = sum_complex(dual.iter().zip(&hat).map(|(p, h)| h * cis_neg(-dot(&p.x, x)))) / cov;
            (Complex64::new(l.value(), 0.0) - r).norm()
        })
        .collect();
    let lhs_tail = prim.iter().filter(|p| p.norm > n_trunc - 1.0).map(|p| g(&p.x).abs()).fold(0.0, f64::max);
    let rhs_tail = dual.iter().zip(&hat).filter(|(p, _)| p.norm > n_trunc - 1.0).map(|(_, h)| h.norm()).fold(0.0, f64::max);
    Ok(PoissonReport {
        max_discrepancy: disc.into_iter().fold(0.0, f64::max),
        lhs_tail,
        rhs_tail,
        lhs_terms: prim.len(),
        rhs_terms: dual.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", content = "lambda", rename_all = "kebab-case")]
pub enum GrowthVerdict {
    RapidDecay(f64),
    ModerateGrowth(f64),
    Indeterminate,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthClass {
    pub verdict: GrowthVerdict,
    pub slope: f64,
    pub intercept: f64,
    pub shell_maxima: Vec<(f64, f64)>,
    pub residual_rms: f64,
}

/// Thresholds for `classify_growth`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthThresholds {
    pub b_min: f64,
    pub b_max: f64,
    pub max_rms: f64,
}

impl Default for GrowthThresholds {
    fn default() -> Self {
        Self { b_min: 0.05, b_max: 50.0, max_rms: 1.0 }
    }
}

/// Fit log|c| ≈ a + b ω(μ*) on dyadic shell maxima.
pub fn classify_growth(coeffs: &FourierCoefficients, w: &WeightFunction, th: GrowthThresholds) -> Result<GrowthClass> {
    let mut shells: Vec<(f64, f64, f64)> = Vec::new(); // (ω at argmax, log max, radius)
    let mut lo = 1.0;
    while lo < coeffs.radius {
        let hi = 2.0 * lo;
        let mut best: Option<(f64, f64)> = None;
        for (p, v) in coeffs.points.iter().zip(&coeffs.values) {
            if p.norm >= lo && p.norm < hi && v.norm() > 1e-300 {
                let lv = v.norm().ln();
                if best.is_none_or(|b| lv > b.1) {
                    best = Some((p.norm, lv));
                }
            }
        }
        if let Some((r, lv)) = best {
            shells.push((w.radial(r)?, lv, r));
        }
        lo = hi;
    }
    if shells.len() < 3 {
        return Err(Error::InsufficientData(format!("{} nonzero shell maxima, need 3", shells.len())));
    }
    let rows: Vec<Vec<f64>> = shells.iter().map(|s| vec![1.0, s.0]).collect();
    let ys: Vec<f64> = shells.iter().map(|s| s.1).collect();
    let fit = least_squares(&rows, &ys).ok_or_else(|| Error::InsufficientData("degenerate shell fit".into()))?;
    let b = fit.coef[1];
    let verdict = if fit.rms > th.max_rms {
        GrowthVerdict::Indeterminate
    } else if b < -th.b_min {
        GrowthVerdict::RapidDecay(-b)
    } else if b <= th.b_max {
        GrowthVerdict::ModerateGrowth(b)
    } else {
        GrowthVerdict::Indeterminate
    };
    Ok(GrowthClass {
        verdict,
        slope: b,
        intercept: fit.coef[0],
        shell_maxima: shells.iter().map(|s| (s.2, s.1)).collect(),
        residual_rms: fit.rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localize::WindowSpec;

    fn bump(radius: f64, d: usize) -> TensorTaper {
        Window::new(WindowSpec::GevreyProduct { s0: 1.5, terms: 24, radius, placement: Default::default() }, d)
            .unwrap()
            .taper
    }

    #[test]
    fn constant_and_harmonic() {
        let l = Lattice::integer(2);
        let q = RegionQuadrature::new(64, 2);
        let c = coefficients_by_region(&PeriodicSource::Constant(1.0), &l, 3.0, &q).unwrap();
        for (p, v) in c.points.iter().zip(&c.values) {
            let want = if p.k == vec![0, 0] { 1.0 } else { 0.0 };
            assert!((v - want).norm() < 1e-12);
        }
        let h = Lattice::hexagonal();
        let nu = h.dual().point(&[1, -2]);
        let c = coefficients_by_region(&PeriodicSource::Harmonic { nu }, &h, 4.0, &RegionQuadrature::new(64, 2)).unwrap();
        for (p, v) in c.points.iter().zip(&c.values) {
            let want = if p.k == vec![1, -2] { 1.0 } else { 0.0 };
            assert!((v - want).norm() < 1e-12, "{:?} {v}", p.k);
        }
    }

    #[test]
    fn periodized_gaussian_on_z() {
        let l = Lattice::integer(1);
        let src = PeriodicSource::PeriodizedGaussian { center: vec![0.0], width: 1.0 };
        let c = coefficients_by_region(&src, &l, 4.0, &RegionQuadrature::new(64, 1)).unwrap();
        for (p, v) in c.points.iter().zip(&c.values) {
            let n = p.k[0] as f64;
            assert!((v - (-PI * n * n).exp()).norm() < 1e-10);
        }
    }

    #[test]
    fn delta_comb_window_route() {
        let l = Lattice::integer(2);
        let c = coefficients_by_window(&PeriodicSource::PeriodizedDelta { center: vec![0.25, 0.5] }, &l, 2.0).unwrap();
        for (p, v) in c.points.iter().zip(&c.values) {
            assert!((v - cis_neg(0.25 * p.x[0] + 0.5 * p.x[1])).norm() < 1e-15);
        }
    }

    #[test]
    fn support_check_rejects_overlap() {
        let src = CompactSource::new(bump(1.2, 2), vec![0.0, 0.0], None).unwrap();
        assert!(matches!(
            coefficients_by_window(&PeriodicSource::Periodized(src), &Lattice::integer(2), 3.0),
            Err(Error::Support(_))
        ));
    }

    #[test]
    fn routes_agree_for_bump() {
        let l = Lattice::integer(2);
        let src = PeriodicSource::Periodized(CompactSource::new(bump(0.4, 2), vec![0.1, 0.2], None).unwrap());
        let a = coefficients_by_region(&src, &l, 10.0, &RegionQuadrature::new(64, 2)).unwrap();
        let b = coefficients_by_window(&src, &l, 10.0).unwrap();
        let scale = b.max_modulus();
        let worst = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale;
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn synthesis_is_periodic() {
        let l = Lattice::hexagonal();
        let src = PeriodicSource::PeriodizedGaussian { center: vec![0.1, 0.0], width: 0.4 };
        let c = coefficients_by_region(&src, &l, 6.0, &RegionQuadrature::new(48, 2)).unwrap();
        let x = [0.31, -0.17];
        let mu = l.point(&[2, -1]);
        let y = [x[0] + mu[0], x[1] + mu[1]];
        assert!((synthesize(&c, &x) - synthesize(&c, &y)).norm() < 1e-12);
    }

    #[test]
    fn growth_examples() {
        let l = Lattice::integer(2);
        let w1 = WeightFunction::gevrey(1.0).unwrap();
        let c = FourierCoefficients::from_fn(&l, 40.0, |x| Complex64::new((-norm(x)).exp(), 0.0)).unwrap();
        match classify_growth(&c, &w1, Default::default()).unwrap().verdict {
            GrowthVerdict::RapidDecay(l) => assert!((l - 1.0).abs() < 0.05),
            v => panic!("{v:?}"),
        }
        let ones = FourierCoefficients::from_fn(&l, 40.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        match classify_growth(&ones, &w1, Default::default()).unwrap().verdict {
            GrowthVerdict::ModerateGrowth(b) => assert!(b.abs() < 1e-9),
            v => panic!("{v:?}"),
        }
        let wl = WeightFunction::log();
        let up = FourierCoefficients::from_fn(&l, 40.0, |x| Complex64::new((0.3 * norm(x).ln_1p()).exp(), 0.0)).unwrap();
        match classify_growth(&up, &wl, Default::default()).unwrap().verdict {
            GrowthVerdict::ModerateGrowth(b) => assert!((b - 0.3).abs() < 1e-9),
            v => panic!("{v:?}"),
        }
        let few = FourierCoefficients::from_fn(&l, 3.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(classify_growth(&few, &w1, Default::default()), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn partition_sums_to_one() {
        for l in [Lattice::integer(2), Lattice::hexagonal()] {
            let w = Window::new(WindowSpec::default(), 2).unwrap();
            let pu = build_partition_of_unity(&l, &w).unwrap();
            assert!((pu.eta_hat(&[0.0, 0.0]) - l.covolume()).abs() < 1e-12);
            let e = pu.partition_error(32, 20.0).unwrap();
            assert!(e < 1e-6, "{e}");
            for (_, r) in pu.dual_zero_residuals(24).unwrap() {
                assert!(r <= 1e-14, "{r}");
            }
            // direct Riemann sum agrees with the FFT grid
            let x = l.point(&[0, 0]);
            let g = pu.grid_value(&[0, 0]);
            assert!((pu.eta(&x) - g).abs() < 1e-10);
        }
    }

    #[test]
    fn poisson_gaussian() {
        for c in [1.0, 0.7] {
            let l = Lattice::integer(1).scaled(c).unwrap();
            let xs: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64 / 100.0 * c]).collect();
            let r = poisson_check(
                |x| (-PI * x[0] * x[0]).exp(),
                |xi| Complex64::new((-PI * xi[0] * xi[0]).exp(), 0.0),
                &l,
                &xs,
                20.0,
            )
            .unwrap();
            assert!(r.max_discrepancy < 1e-10, "{c} {}", r.max_discrepancy);
        }
    }
}
