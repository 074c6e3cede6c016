//! Weight functions ω, weight sequences (M_p), associated functions and condition diagnostics.

use crate::error::{Error, Result};
use crate::numerics::{least_squares, norm, sum_real, GaussLegendre};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Finite-depth diagnostic outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "at", rename_all = "kebab-case")]
pub enum Verdict {
    HoldsToDepth,
    FailsAtP(usize),
    ConvergentDiagnostic,
    DivergentDiagnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightKind {
    Log,
    Gevrey { s: f64 },
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

/// Radial weight ω(ξ) = ω₀(|ξ|).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightFunction {
    pub kind: WeightKind,
    /// (a, C) with ω ≥ a + C log(1+|ξ|) on the fitting range.
    pub gamma: (f64, f64),
}

impl WeightFunction {
    pub fn log() -> Self {
        Self { kind: WeightKind::Log, gamma: (0.0, 1.0) }
    }

    /// ω(ξ) = |ξ|^{1/s}. s = 1 is accepted for diagnostics of the analytic scale.
    pub fn gevrey(s: f64) -> Result<Self> {
        if !(s >= 1.0) || !s.is_finite() {
            return Err(Error::Invalid(format!("Gevrey index must be >= 1, got {s}")));
        }
        let mut w = Self { kind: WeightKind::Gevrey { s }, gamma: (0.0, 1.0) };
        w.gamma = w.fit_gamma(1e6);
        Ok(w)
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(Error::Invalid("tabulated weight needs >= 2 (radius, value) rows".into()));
        }
        if radii[0] != 0.0 || values[0] != 0.0 {
            return Err(Error::Invalid("tabulated weight must start at (0, 0)".into()));
        }
        for i in 1..radii.len() {
            if !(radii[i] > radii[i - 1]) {
                return Err(Error::Invalid(format!("radii not strictly increasing at row {i}")));
            }
            if !(values[i] >= values[i - 1]) || !values[i].is_finite() {
                return Err(Error::Invalid(format!("profile not nondecreasing at row {i}")));
            }
        }
        let rmax = *radii.last().unwrap();
        let mut w = Self { kind: WeightKind::Tabulated { radii, values }, gamma: (0.0, 1.0) };
        w.gamma = w.fit_gamma(rmax);
        Ok(w)
    }

    /// Parse a two-column (radius, value) text table.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::Invalid(format!("line {}: expected two columns", i + 1)));
            }
            let r: f64 = cols[0].parse().map_err(|_| Error::Invalid(format!("line {}: bad radius", i + 1)))?;
            let v: f64 = cols[1].parse().map_err(|_| Error::Invalid(format!("line {}: bad value", i + 1)))?;
            radii.push(r);
            values.push(v);
        }
        Self::tabulated(radii, values)
    }

    pub fn max_radius(&self) -> f64 {
        match &self.kind {
            WeightKind::Tabulated { radii, .. } => *radii.last().unwrap(),
            _ => f64::INFINITY,
        }
    }

    /// ω₀(r).
    pub fn radial(&self, r: f64) -> Result<f64> {
        let r = r.abs();
        match &self.kind {
            WeightKind::Log => Ok(r.ln_1p()),
            WeightKind::Gevrey { s } => Ok(if r == 0.0 { 0.0 } else { r.powf(1.0 / s) }),
            WeightKind::Tabulated { radii, values } => {
                let max = *radii.last().unwrap();
                if r > max {
                    return Err(Error::Extrapolation { radius: r, max });
                }
                let i = radii.partition_point(|&x| x <= r).min(radii.len() - 1).max(1);
                let (r0, r1) = (radii[i - 1], radii[i]);
                let t = (r - r0) / (r1 - r0);
                Ok(values[i - 1] + t * (values[i] - values[i - 1]))
            }
        }
    }

    pub fn eval(&self, xi: &[f64]) -> Result<f64> {
        self.radial(norm(xi))
    }

    /// True when ω is a multiple of log(1+r), so ω and the polynomial scale coincide.
    pub fn is_logarithmic(&self) -> bool {
        matches!(self.kind, WeightKind::Log)
    }

    fn fit_gamma(&self, rmax: f64) -> (f64, f64) {
        let n = 200;
        let rs: Vec<f64> = (0..n).map(|i| (rmax.ln_1p() * i as f64 / (n - 1) as f64).exp_m1()).collect();
        let ws: Vec<f64> = rs.iter().map(|&r| self.radial(r).unwrap_or(0.0)).collect();
        let rows: Vec<Vec<f64>> = rs.iter().map(|r| vec![1.0, r.ln_1p()]).collect();
        let c = least_squares(&rows, &ws).map(|f| f.coef[1]).unwrap_or(1.0).max(1e-12);
        let a = rs
            .iter()
            .zip(&ws)
            .map(|(r, w)| w - c * r.ln_1p())
            .fold(f64::INFINITY, f64::min);
        (a, c)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShellIntegral {
    pub r_lo: f64,
    pub r_hi: f64,
    pub value: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightConditionReport {
    pub dimension: usize,
    pub sample_radius: f64,
    pub pairs: usize,
    pub subadditivity_max_violation: f64,
    pub subadditivity: Verdict,
    pub beta_shells: Vec<ShellIntegral>,
    pub beta_ratios: Vec<f64>,
    pub beta_tail_estimate: Option<f64>,
    pub beta: Verdict,
    pub gamma_a: f64,
    pub gamma_c: f64,
    pub gamma: Verdict,
    pub gamma0_ratios: Vec<(f64, f64)>,
    pub gamma0: Verdict,
}

/// Dyadic-shell ratio test: convergent when the last three shell ratios stay below `threshold`.
pub fn ratio_test(blocks: &[f64], threshold: f64) -> (Vec<f64>, Verdict, Option<f64>) {
    let ratios: Vec<f64> = blocks.windows(2).map(|w| w[1] / w[0]).collect();
    if ratios.len() < 3 {
        return (ratios, Verdict::DivergentDiagnostic, None);
    }
    let tail = &ratios[ratios.len() - 3..];
    let worst = tail.iter().cloned().fold(0.0, f64::max);
    if worst < threshold {
        let last = *blocks.last().unwrap();
        (ratios, Verdict::ConvergentDiagnostic, Some(last * worst / (1.0 - worst)))
    } else {
        (ratios, Verdict::DivergentDiagnostic, None)
    }
}

fn sphere_area(d: usize) -> f64 {
    // |S^{d-1}| = 2 π^{d/2} / Γ(d/2)
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        _ => {
            let half = d as f64 / 2.0;
            2.0 * PI.powf(half) / gamma_fn(half)
        }
    }
}

fn gamma_fn(x: f64) -> f64 {
    // Γ on half integers, enough for sphere areas.
    if (x - x.round()).abs() < 1e-12 {
        (1..x.round() as usize).map(|k| k as f64).product()
    } else {
        let mut v = PI.sqrt();
        let mut y = 0.5;
        while y < x - 1e-12 {
            v *= y;
            y += 1.0;
        }
        v
    }
}

fn random_in_ball(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if norm(&v) <= 1.0 {
            return v.into_iter().map(|x| x * r).collect();
        }
    }
}

/// Finite-sample diagnostics for (α), (β), (γ), (γ₀).
pub fn check_weight_conditions(
    w: &WeightFunction,
    dimension: usize,
    sample_radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<WeightConditionReport> {
    if n_samples < 2 {
        return Err(Error::Invalid("n_samples must be >= 2".into()));
    }
    if dimension == 0 {
        return Err(Error::Invalid("dimension must be positive".into()));
    }
    if !(sample_radius >= 16.0) {
        return Err(Error::Invalid("sample_radius must be >= 16 for the dyadic diagnostics".into()));
    }
    let radius = sample_radius.min(w.max_radius());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut first_fail = None;
    let tol = 1e-9;
    for i in 0..n_samples {
        let a = random_in_ball(&mut rng, dimension, radius / 2.0);
        let b = if i % 4 == 3 {
            // colinear adversarial pair (ξ, kξ)
            let k = rng.gen_range(0.1..1.0);
            a.iter().map(|x| k * x).collect()
        } else {
            random_in_ball(&mut rng, dimension, radius / 2.0)
        };
        let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let lhs = w.eval(&s)?;
        let rhs = w.eval(&a)? + w.eval(&b)?;
        let v = lhs - rhs;
        if v > worst {
            worst = v;
        }
        if v > tol * (1.0 + rhs) && first_fail.is_none() {
            first_fail = Some(i);
        }
    }
    let subadditivity = match first_fail {
        Some(i) => Verdict::FailsAtP(i),
        None => Verdict::HoldsToDepth,
    };

    let gl = GaussLegendre::new(32);
    let area = sphere_area(dimension);
    let mut shells = Vec::new();
    let mut cumulative = 0.0;
    let mut lo = 1.0;
    while 2.0 * lo <= radius * (1.0 + 1e-12) {
        let hi = 2.0 * lo;
        let mut err = None;
        let v = area
            * gl.integrate(lo, hi, |r| match w.radial(r) {
                Ok(x) => x / (r * r),
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            });
        if let Some(e) = err {
            return Err(e);
        }
        cumulative += v;
        shells.push(ShellIntegral { r_lo: lo, r_hi: hi, value: v, cumulative });
        lo = hi;
    }
    let blocks: Vec<f64> = shells.iter().map(|s| s.value).collect();
    let (beta_ratios, beta, beta_tail_estimate) = ratio_test(&blocks, 0.9);

    let (ga, gc) = {
        let n = n_samples.max(16);
        let rs: Vec<f64> = (0..n).map(|i| (radius.ln_1p() * i as f64 / (n - 1) as f64).exp_m1()).collect();
        let mut ws = Vec::with_capacity(n);
        for &r in &rs {
            ws.push(w.radial(r)?);
        }
        let rows: Vec<Vec<f64>> = rs.iter().map(|r| vec![1.0, r.ln_1p()]).collect();
        let c = least_squares(&rows, &ws).map(|f| f.coef[1]).unwrap_or(0.0);
        let a = rs
            .iter()
            .zip(&ws)
            .map(|(r, w)| w - c * r.ln_1p())
            .fold(f64::INFINITY, f64::min);
        (a, c)
    };
    let gamma = if gc > 0.0 { Verdict::HoldsToDepth } else { Verdict::FailsAtP(0) };

    let mut gamma0_ratios = Vec::new();
    let mut r = 2.0;
    while r <= radius * (1.0 + 1e-12) {
        gamma0_ratios.push((r, w.radial(r)? / r.ln_1p()));
        r *= 2.0;
    }
    let gamma0 = {
        let n = gamma0_ratios.len();
        if n < 4 {
            Verdict::FailsAtP(n)
        } else {
            let growing = (n - 3..n).all(|i| gamma0_ratios[i].1 > 1.02 * gamma0_ratios[i - 1].1);
            if growing {
                Verdict::HoldsToDepth
            } else {
                let at = (1..n).find(|&i| gamma0_ratios[i].1 <= 1.02 * gamma0_ratios[i - 1].1).unwrap_or(n - 1);
                Verdict::FailsAtP(at)
            }
        }
    };

    Ok(WeightConditionReport {
        dimension,
        sample_radius: radius,
        pairs: n_samples,
        subadditivity_max_violation: worst,
        subadditivity,
        beta_shells: shells,
        beta_ratios,
        beta_tail_estimate,
        beta,
        gamma_a: ga,
        gamma_c: gc,
        gamma,
        gamma0_ratios,
        gamma0,
    })
}

type LogGenerator = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Weight sequence stored as log M_p for p = 0..=depth, with its lower convex hull.
#[derive(Clone)]
pub struct WeightSequence {
    pub name: String,
    log_m: Arc<Vec<f64>>,
    hull: Arc<Vec<usize>>,
    generator: Option<LogGenerator>,
}

impl std::fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightSequence").field("name", &self.name).field("depth", &self.depth()).finish()
    }
}

/// log p! for p = 0..=depth by compensated cumulative sums.
pub fn log_factorials(depth: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(depth + 1);
    let mut s = crate::numerics::Neumaier::default();
    out.push(0.0);
    for p in 1..=depth {
        s.add((p as f64).ln());
        out.push(s.value());
    }
    out
}

impl WeightSequence {
    /// Build from a log-domain generator p ↦ log M_p cached to `depth`.
    pub fn from_log_fn<F>(name: &str, depth: usize, f: F) -> Result<Self>
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        let gen: LogGenerator = Arc::new(f);
        let vals: Vec<f64> = (0..=depth).map(|p| gen(p)).collect();
        let mut s = Self::from_log_values(name, vals)?;
        s.generator = Some(gen);
        Ok(s)
    }

    pub fn from_log_values(name: &str, log_m: Vec<f64>) -> Result<Self> {
        if log_m.is_empty() {
            return Err(Error::Invalid("empty weight sequence".into()));
        }
        if log_m[0] != 0.0 {
            return Err(Error::Invalid(format!("{name}: M_0 must be 1")));
        }
        if let Some(p) = log_m.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("{name}: log M_{p} is not finite")));
        }
        let hull = lower_hull(&log_m);
        Ok(Self { name: name.to_string(), log_m: Arc::new(log_m), hull: Arc::new(hull), generator: None })
    }

    /// M_p = (p!)^s.
    pub fn gevrey(s: f64, depth: usize) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::Invalid("Gevrey sequence exponent must be positive".into()));
        }
        let lf = log_factorials(depth);
        let vals = lf.iter().map(|v| s * v).collect();
        let mut seq = Self::from_log_values(&format!("(p!)^{s}"), vals)?;
        seq.generator = Some(Arc::new(move |p: usize| s * log_factorials(p)[p]));
        Ok(seq)
    }

    /// Same generator cached to a new depth.
    pub fn with_depth(&self, depth: usize) -> Result<Self> {
        if depth <= self.depth() {
            return Self::from_log_values(&self.name, self.log_m[..=depth].to_vec()).map(|mut s| {
                s.generator = self.generator.clone();
                s
            });
        }
        match &self.generator {
            Some(g) => {
                let mut vals = self.log_m.to_vec();
                vals.extend((self.depth() + 1..=depth).map(|p| g(p)));
                let mut s = Self::from_log_values(&self.name, vals)?;
                s.generator = Some(g.clone());
                Ok(s)
            }
            None => Err(Error::Depth { depth: self.depth(), index: depth }),
        }
    }

    pub fn depth(&self) -> usize {
        self.log_m.len() - 1
    }

    pub fn log(&self, p: usize) -> Result<f64> {
        self.log_m.get(p).copied().ok_or(Error::Depth { depth: self.depth(), index: p })
    }

    pub fn logs(&self) -> &[f64] {
        &self.log_m
    }

    /// M(t) = sup_p (p log t − log M_p) over the cached range, with the smallest maximizing p.
    pub fn associated(&self, t: f64) -> Result<(f64, usize)> {
        if !(t > 0.0) {
            return Err(Error::Invalid(format!("associated function needs t > 0, got {t}")));
        }
        let lt = t.ln();
        let h = &self.hull;
        let lm = &self.log_m;
        let slope = |i: usize| (lm[h[i + 1]] - lm[h[i]]) / (h[i + 1] - h[i]) as f64;
        // first hull vertex whose outgoing slope is >= log t
        let (mut lo, mut hi) = (0usize, h.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if slope(mid) >= lt {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let p = h[lo];
        if p == self.depth() {
            return Err(Error::Truncation { depth: p });
        }
        Ok((p as f64 * lt - lm[p], p))
    }
}

fn lower_hull(y: &[f64]) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        while h.len() >= 2 {
            let a = h[h.len() - 2];
            let b = h[h.len() - 1];
            // drop b if it is on or above the chord a -> i
            let cross = (y[b] - y[a]) * (i - a) as f64 - (y[i] - y[a]) * (b - a) as f64;
            if cross >= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(i);
    }
    h
}

/// `associated_function` as a free function.
pub fn associated_function(m: &WeightSequence, t: f64) -> Result<(f64, usize)> {
    m.associated(t)
}

/// Geometric grid of n points on [lo, hi].
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp()).collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Regularized {
    pub log_value: f64,
    pub value: f64,
    pub t: f64,
}

/// M_p^c = sup_t t^p e^{−M(t)} over a grid; errors if the sup sits only at a grid end.
pub fn log_convex_regularization(m: &WeightSequence, p: usize, t_grid: &[f64]) -> Result<Regularized> {
    if t_grid.len() < 3 {
        return Err(Error::Invalid("t grid needs at least 3 points".into()));
    }
    let mut g = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let (mt, _) = m.associated(t)?;
        g.push(p as f64 * t.ln() - mt);
    }
    let best = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * (1.0 + best.abs());
    let last = g.len() - 1;
    let idx = (1..last).find(|&i| g[i] >= best - tol);
    match idx {
        Some(i) => Ok(Regularized { log_value: g[i], value: g[i].exp(), t: t_grid[i] }),
        None => Err(Error::Truncation { depth: if g[0] >= best - tol { 0 } else { last } }),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantFit {
    pub a: f64,
    pub h: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceReport {
    pub name: String,
    pub depth: usize,
    pub m1: Verdict,
    pub m2_prime: ConstantFit,
    pub m2: ConstantFit,
    pub m3_prime_partial_sums: Vec<(usize, f64)>,
    pub m3_prime_sum: f64,
    pub m3_prime_ratios: Vec<f64>,
    pub m3_prime_tail_estimate: Option<f64>,
    pub m3_prime: Verdict,
    pub m5_ratio_constant: f64,
    pub m5: Verdict,
}

fn fit_geometric_bound(y: &[f64]) -> ConstantFit {
    // y_p <= log A + p log H
    let n = y.len();
    let rows: Vec<Vec<f64>> = (0..n).map(|p| vec![1.0, p as f64]).collect();
    let log_h = least_squares(&rows, y).map(|f| f.coef[1]).unwrap_or(0.0).max(0.0);
    let excess: Vec<f64> = y.iter().enumerate().map(|(p, v)| v - p as f64 * log_h).collect();
    let log_a = excess.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cut = (3 * n) / 4;
    let early = excess[..cut.max(1)].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let verdict = match (cut..n).find(|&p| excess[p] > early + 1.0) {
        Some(p) => Verdict::FailsAtP(p),
        None => Verdict::HoldsToDepth,
    };
    ConstantFit { a: log_a.exp(), h: log_h.exp(), verdict }
}

/// Diagnostics for (M.1), (M.2)', (M.2), (M.3)', (M.5) up to `depth`.
pub fn check_sequence_conditions(m: &WeightSequence, depth: usize) -> Result<SequenceReport> {
    if depth < 3 {
        return Err(Error::Invalid("depth must be >= 3".into()));
    }
    let m = if depth + 1 > m.depth() { m.with_depth(depth + 1)? } else { m.clone() };
    let lm = m.logs();
    let tol = 1e-9;
    let m1 = match (1..depth).find(|&p| 2.0 * lm[p] > lm[p - 1] + lm[p + 1] + tol * (1.0 + lm[p].abs())) {
        Some(p) => Verdict::FailsAtP(p),
        None => Verdict::HoldsToDepth,
    };
    let y: Vec<f64> = (0..depth).map(|p| lm[p + 1] - lm[p]).collect();
    let m2_prime = fit_geometric_bound(&y);
    let z: Vec<f64> = (0..=depth)
        .map(|p| {
            let mn = (0..=p).map(|q| lm[q] + lm[p - q]).fold(f64::INFINITY, f64::min);
            lm[p] - mn
        })
        .collect();
    let m2 = fit_geometric_bound(&z);

    let terms: Vec<f64> = (1..=depth).map(|p| (lm[p - 1] - lm[p]).exp()).collect();
    let mut partial = Vec::new();
    let mut acc = crate::numerics::Neumaier::default();
    let mut next = 1;
    for (i, t) in terms.iter().enumerate() {
        acc.add(*t);
        let p = i + 1;
        if p == next || p == depth {
            partial.push((p, acc.value()));
            next *= 2;
        }
    }
    let mut blocks = Vec::new();
    let mut lo = 1;
    while 2 * lo - 1 <= depth {
        blocks.push(sum_real((lo..2 * lo).map(|p| terms[p - 1])));
        lo *= 2;
    }
    let (m3_prime_ratios, m3_prime, m3_prime_tail_estimate) = ratio_test(&blocks, 0.9);

    let lf = log_factorials(depth);
    let r: Vec<f64> = (1..=depth).map(|p| (lm[p] - lf[p]) / p as f64).collect();
    let rmin = r.iter().cloned().fold(f64::INFINITY, f64::min);
    let m5 = if r[depth - 1] >= r[depth / 2 - 1] - 1e-9 {
        Verdict::HoldsToDepth
    } else {
        let at = (depth / 2..depth).find(|&i| r[i] < r[depth / 2 - 1] - 1e-9).unwrap_or(depth - 1) + 1;
        Verdict::FailsAtP(at)
    };

    Ok(SequenceReport {
        name: m.name.clone(),
        depth,
        m1,
        m2_prime,
        m2,
        m3_prime_partial_sums: partial,
        m3_prime_sum: acc.value(),
        m3_prime_ratios,
        m3_prime_tail_estimate,
        m3_prime,
        m5_ratio_constant: rmin.exp(),
        m5,
    })
}

/// Q_p = min_q M_q N_{p−q} in log form, with the minimizing q.
pub fn auxiliary_sequence(m: &WeightSequence, n: &WeightSequence, p: usize) -> Result<(f64, usize)> {
    if p > m.depth() || p > n.depth() {
        return Err(Error::Depth { depth: m.depth().min(n.depth()), index: p });
    }
    let (lm, ln) = (m.logs(), n.logs());
    let mut best = (f64::INFINITY, 0);
    for q in 0..=p {
        let v = lm[q] + ln[p - q];
        if v < best.0 {
            best = (v, q);
        }
    }
    Ok(best)
}

/// The whole sequence (Q_p) up to the common depth.
pub fn auxiliary(m: &WeightSequence, n: &WeightSequence) -> Result<WeightSequence> {
    let depth = m.depth().min(n.depth());
    let vals = (0..=depth).map(|p| auxiliary_sequence(m, n, p).map(|x| x.0)).collect::<Result<Vec<_>>>()?;
    WeightSequence::from_log_values(&format!("Q[{}, {}]", m.name, n.name), vals)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModerateFit {
    pub c: f64,
    pub lambda: f64,
}

/// Fit v(ξ₁+ξ₂) ≤ C v(ξ₁) e^{λ ω(ξ₂)} on random pairs in a ball.
pub fn is_moderate<V>(
    v: V,
    w: &WeightFunction,
    dimension: usize,
    pair_samples: usize,
    radius: f64,
    seed: u64,
    lambda_cap: f64,
) -> Result<ModerateFit>
where
    V: Fn(&[f64]) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(pair_samples);
    for i in 0..pair_samples.max(16) {
        let a = random_in_ball(&mut rng, dimension, radius / 2.0);
        let b = if i % 4 == 3 {
            let k = rng.gen_range(0.1..1.0);
            a.iter().map(|x| k * x).collect()
        } else {
            random_in_ball(&mut rng, dimension, radius / 2.0)
        };
        let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (va, vs) = (v(&a), v(&s));
        if !(va > 0.0 && vs > 0.0) {
            return Err(Error::Invalid("moderate weight must be strictly positive on samples".into()));
        }
        pts.push((w.eval(&b)?, vs.ln() - va.ln()));
    }
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let bins = 8;
    let per = pts.len() / bins;
    let env: Vec<(f64, f64)> = (0..bins)
        .map(|b| {
            let chunk = &pts[b * per..if b == bins - 1 { pts.len() } else { (b + 1) * per }];
            let x = chunk.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            let y = chunk.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            (x, y)
        })
        .collect();
    let slope_of = |e: &[(f64, f64)]| {
        let rows: Vec<Vec<f64>> = e.iter().map(|p| vec![1.0, p.0]).collect();
        let ys: Vec<f64> = e.iter().map(|p| p.1).collect();
        least_squares(&rows, &ys).map(|f| f.coef[1]).unwrap_or(0.0)
    };
    let lower = slope_of(&env[..bins / 2 + 1]);
    let upper = slope_of(&env[bins / 2 - 1..]);
    let lambda = slope_of(&env).max(0.0);
    if upper > 2.0 * lower.max(0.0) + 0.5 || lambda > lambda_cap {
        return Err(Error::NotModerate(format!(
            "envelope slope grows from {lower:.3} to {upper:.3} (fit {lambda:.3})"
        )));
    }
    let log_c = pts.iter().map(|(x, y)| y - lambda * x).fold(0.0, f64::max);
    Ok(ModerateFit { c: log_c.exp(), lambda })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(WeightFunction::gevrey(2.0).unwrap().eval(&[0.0, 0.0]).unwrap(), 0.0);
        assert!((WeightFunction::log().eval(&[3.0, 4.0]).unwrap() - 6f64.ln()).abs() < 1e-15);
        assert_eq!(WeightFunction::gevrey(2.0).unwrap().eval(&[16.0, 0.0]).unwrap(), 4.0);
    }

    #[test]
    fn tabulated_extrapolation() {
        let w = WeightFunction::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 1.5]).unwrap();
        assert!((w.radial(1.5).unwrap() - 1.25).abs() < 1e-15);
        assert!(matches!(w.radial(2.5), Err(Error::Extrapolation { .. })));
        assert!(WeightFunction::tabulated(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn hull_picks_smallest_argmax() {
        let m = WeightSequence::gevrey(1.0, 50).unwrap();
        assert_eq!(m.associated(1.0).unwrap(), (0.0, 0));
    }

    #[test]
    fn auxiliary_small() {
        let m = WeightSequence::gevrey(1.0, 10).unwrap();
        let (lq, _) = auxiliary_sequence(&m, &m, 4).unwrap();
        assert!((lq.exp() - 4.0).abs() < 1e-12);
        assert_eq!(auxiliary_sequence(&m, &m, 0).unwrap().0, 0.0);
    }
}
