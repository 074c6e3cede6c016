//! Quadrature rules, compensated sums and small least-squares fits.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mut s = Neumaier::default();
        for (x, w) in self.mapped(a, b) {
            s.add(w * f(x));
        }
        s.value()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre nodes and weights on [a, b] with `panels` equal panels.
pub fn composite_rule(a: f64, b: f64, panels: usize, rule: &GaussLegendre) -> (Vec<f64>, Vec<f64>) {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * rule.order());
    let mut ws = Vec::with_capacity(panels * rule.order());
    for k in 0..panels {
        let lo = a + h * k as f64;
        for (x, w) in rule.mapped(lo, lo + h) {
            xs.push(x);
            ws.push(w);
        }
    }
    (xs, ws)
}

// Gauss–Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).norm())
}

/// Outcome of an adaptive integration that did not reach its tolerance.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureFailure {
    pub estimate: Complex64,
    pub achieved: f64,
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature with an absolute tolerance.
pub fn adaptive_gk<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Complex64, QuadratureFailure> {
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut parts: Vec<(f64, f64, Complex64, f64)> = vec![(a, b, v, e)];
    loop {
        let total_err: f64 = parts.iter().map(|p| p.3).sum();
        if total_err <= abs_tol {
            break;
        }
        if parts.len() >= max_intervals {
            let est = sum_complex(parts.iter().map(|p| p.2));
            return Err(QuadratureFailure { estimate: est, achieved: total_err });
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(sum_complex(parts.iter().map(|p| p.2)))
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn sum_real<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = Neumaier::default();
    for x in it {
        s.add(x);
    }
    s.value()
}

pub fn sum_complex<I: IntoIterator<Item = Complex64>>(it: I) -> Complex64 {
    let mut re = Neumaier::default();
    let mut im = Neumaier::default();
    for z in it {
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.value(), im.value())
}

/// sin(pi x), exactly zero at integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    // r in [-1, 1]
    if r.abs() <= 0.25 {
        (PI * r).sin()
    } else if r > 0.75 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.75 {
        -(PI * (1.0 + r)).sin()
    } else if r > 0.0 {
        (PI * (0.5 - r)).cos()
    } else {
        -(PI * (0.5 + r)).cos()
    }
}

/// cos(pi x).
pub fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// Normalized sinc, sin(pi x)/(pi x).
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - (PI * x).powi(2) / 6.0
    } else {
        sin_pi(x) / (PI * x)
    }
}

/// e^{-2 pi i t} with argument reduction.
pub fn cis_neg(t: f64) -> Complex64 {
    let r = t - t.round();
    Complex64::new(cos_pi(2.0 * r), -sin_pi(2.0 * r))
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + sum_real(xs.iter().map(|x| (x - m).exp())).ln()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Ordinary least squares result.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coef: Vec<f64>,
    pub std_err: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rms: f64,
}

/// Least squares for `rows * coef ≈ y` via SVD.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Option<LeastSquares> {
    let n = rows.len();
    if n == 0 {
        return None;
    }
    let k = rows[0].len();
    if n < k {
        return None;
    }
    let a = nalgebra::DMatrix::from_fn(n, k, |i, j| rows[i][j]);
    let b = nalgebra::DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 || svd.singular_values.min() <= smax * 1e-13 {
        return None;
    }
    let x = svd.solve(&b, smax * 1e-13).ok()?;
    let r = &b - &a * &x;
    let residuals: Vec<f64> = r.iter().cloned().collect();
    let ss: f64 = residuals.iter().map(|v| v * v).sum();
    let dof = (n - k).max(1) as f64;
    let sigma2 = ss / dof;
    let ata = a.transpose() * &a;
    let inv = ata.try_inverse()?;
    let std_err = (0..k).map(|j| (sigma2 * inv[(j, j)]).max(0.0).sqrt()).collect();
    Some(LeastSquares {
        coef: x.iter().cloned().collect(),
        std_err,
        residuals,
        rms: (ss / n as f64).sqrt(),
    })
}

/// Piecewise Chebyshev interpolant of a function on [a, b].
#[derive(Debug, Clone)]
pub struct ChebTable {
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
    values: Vec<f64>,
    nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl ChebTable {
    pub fn nodes_for(a: f64, b: f64, panels: usize, order: usize) -> Vec<f64> {
        let h = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + h * p as f64;
            for k in 0..order {
                let t = (PI * (2 * k + 1) as f64 / (2 * order) as f64).cos();
                out.push(lo + 0.5 * h * (1.0 - t));
            }
        }
        out
    }

    /// Build from values at `nodes_for(a, b, panels, order)`.
    pub fn from_values(a: f64, b: f64, panels: usize, order: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), panels * order);
        let nodes = (0..order)
            .map(|k| -(PI * (2 * k + 1) as f64 / (2 * order) as f64).cos())
            .collect();
        let bary = (0..order)
            .map(|k| {
                let s = (PI * (2 * k + 1) as f64 / (2 * order) as f64).sin();
                // node order is reversed relative to the classical formula, sign flips uniformly
                if k % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        Self { a, b, panels, order, values, nodes, bary }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return 0.0;
        }
        let h = (self.b - self.a) / self.panels as f64;
        let p = (((x - self.a) / h) as usize).min(self.panels - 1);
        let lo = self.a + h * p as f64;
        let t = 2.0 * (x - lo) / h - 1.0;
        let vals = &self.values[p * self.order..(p + 1) * self.order];
        let mut num = 0.0;
        let mut den = 0.0;
        for ((node, b), v) in self.nodes.iter().zip(&self.bary).zip(vals) {
            let d = t - node;
            if d == 0.0 {
                return *v;
            }
            let w = b / d;
            num += w * v;
            den += w;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let g = GaussLegendre::new(10);
        let v = g.integrate(0.0, 2.0, |x| x.powi(19));
        assert!((v - 2f64.powi(20) / 20.0).abs() < 1e-9 * 2f64.powi(20));
        let w: f64 = g.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_high_order_matches_exp() {
        let g = GaussLegendre::new(64);
        let v = g.integrate(-1.0, 3.0, f64::exp);
        assert!((v - (3f64.exp() - (-1f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn kronrod_oscillatory() {
        let v = adaptive_gk(|x| Complex64::new((40.0 * x).cos(), 0.0), 0.0, 1.0, 1e-13, 500).unwrap();
        assert!((v.re - (40f64).sin() / 40.0).abs() < 1e-12);
    }

    #[test]
    fn sin_pi_exact_zeros() {
        for k in -50..50 {
            assert_eq!(sin_pi(k as f64), 0.0);
        }
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
        assert!((sin_pi(1.3) - (PI * 1.3).sin()).abs() < 1e-14);
        assert!((cos_pi(0.3) - (PI * 0.3).cos()).abs() < 1e-15);
    }

    #[test]
    fn cheb_table_reproduces_smooth_function() {
        let nodes = ChebTable::nodes_for(-1.0, 2.0, 8, 16);
        let vals = nodes.iter().map(|x| (3.0 * x).sin()).collect();
        let t = ChebTable::from_values(-1.0, 2.0, 8, 16, vals);
        for i in 0..100 {
            let x = -1.0 + 3.0 * i as f64 / 99.0;
            assert!((t.eval(x) - (3.0 * x).sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn least_squares_recovers_line() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 2.0 - 0.5 * i as f64).collect();
        let fit = least_squares(&rows, &y).unwrap();
        assert!((fit.coef[0] - 2.0).abs() < 1e-12 && (fit.coef[1] + 0.5).abs() < 1e-12);
    }
}
