//! Lattices Λ = T(ℤ^d), duals, fundamental regions, point enumeration, cones and the
//! separation test U ∩ Λ* = {0} for Euclidean balls U.

use crate::error::{Error, Result};
use crate::numerics::{dot, norm};
use nalgebra::DMatrix;
use serde::Serialize;

pub const DEFAULT_POINT_CAP: usize = 20_000_000;
pub const SVP_DIMENSION_CAP: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    t: DMatrix<f64>,
    t_inv: DMatrix<f64>,
    covolume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticePoint {
    pub k: Vec<i64>,
    pub x: Vec<f64>,
    pub norm: f64,
}

impl Lattice {
    /// Columns of `t` generate Λ.
    pub fn new(t: DMatrix<f64>) -> Result<Self> {
        if t.nrows() != t.ncols() || t.nrows() == 0 {
            return Err(Error::Invalid(format!("generator must be square, got {}x{}", t.nrows(), t.ncols())));
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("generator has non-finite entries".into()));
        }
        let det = t.determinant();
        let scale: f64 = t.column_iter().map(|c| c.norm()).product();
        if !(det.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::SingularGenerator { det });
        }
        let t_inv = t.clone().try_inverse().ok_or(Error::SingularGenerator { det })?;
        Ok(Self { t, t_inv, covolume: det.abs() })
    }

    /// Row-major generator, as written in config files.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::Invalid("generator rows must form a square matrix".into()));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn integer(d: usize) -> Self {
        Self::new(DMatrix::identity(d, d)).expect("identity is invertible")
    }

    pub fn hexagonal() -> Self {
        Self::from_rows(&[vec![1.0, 0.5], vec![0.0, 3f64.sqrt() / 2.0]]).expect("hexagonal generator")
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(&self.t * c)
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn covolume(&self) -> f64 {
        self.covolume
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn generator_inverse(&self) -> &DMatrix<f64> {
        &self.t_inv
    }

    pub fn generator_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.t.row(i).iter().copied().collect()).collect()
    }

    /// Generator columns μ_1..μ_d.
    pub fn basis(&self) -> Vec<Vec<f64>> {
        self.t.column_iter().map(|c| c.iter().copied().collect()).collect()
    }

    /// Λ* generated by T^{-⊤}.
    pub fn dual(&self) -> Lattice {
        Lattice { t: self.t_inv.transpose(), t_inv: self.t.transpose(), covolume: 1.0 / self.covolume }
    }

    pub fn point(&self, k: &[i64]) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.t[(i, j)] * k[j] as f64).sum()).collect()
    }

    /// T^{-1} x.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.t_inv[(i, j)] * x[j]).sum()).collect()
    }

    /// True when x ∈ Λ up to a relative tolerance.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.coordinates(x).iter().all(|y| (y - y.round()).abs() <= tol * (1.0 + y.abs()))
    }

    fn box_bounds(&self, r: f64) -> Vec<i64> {
        (0..self.dim())
            .map(|i| {
                let row = self.t_inv.row(i).norm();
                (r * row * (1.0 + 1e-12)).floor() as i64
            })
            .collect()
    }

    /// Λ-points with annulus_min ≤ |μ| ≤ r, lexicographic in k.
    pub fn enumerate_points(&self, r: f64, annulus_min: f64) -> Result<Vec<LatticePoint>> {
        self.enumerate_points_capped(r, annulus_min, DEFAULT_POINT_CAP)
    }

    pub fn enumerate_points_capped(&self, r: f64, annulus_min: f64, cap: usize) -> Result<Vec<LatticePoint>> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Invalid(format!("enumeration radius must be positive, got {r}")));
        }
        let bounds = self.box_bounds(r);
        let estimate: f64 = bounds.iter().map(|b| (2 * b + 1) as f64).product();
        if estimate > cap as f64 {
            return Err(Error::TooManyPoints { estimate, cap });
        }
        let d = self.dim();
        let mut out = Vec::new();
        let mut k: Vec<i64> = bounds.iter().map(|b| -b).collect();
        loop {
            let x = self.point(&k);
            let n = norm(&x);
            if n <= r && n >= annulus_min {
                out.push(LatticePoint { k: k.clone(), x, norm: n });
            }
            // odometer, last index fastest
            let mut i = d;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                if k[i] < bounds[i] {
                    k[i] += 1;
                    break;
                }
                k[i] = -bounds[i];
            }
        }
    }

    /// Γ ∩ Λ with r_min ≤ |μ| ≤ r_max; never contains 0.
    pub fn enumerate_in_cone(&self, cone: &Cone, r_min: f64, r_max: f64) -> Result<Vec<LatticePoint>> {
        if !(r_min >= 0.0 && r_min < r_max) {
            return Err(Error::Invalid(format!("need 0 <= r_min < r_max, got {r_min}, {r_max}")));
        }
        if cone.dim() != self.dim() {
            return Err(Error::Invalid("cone and lattice dimensions differ".into()));
        }
        Ok(self
            .enumerate_points(r_max, r_min)?
            .into_iter()
            .filter(|p| cone.contains(&p.x))
            .collect())
    }
}

/// Open cone {ξ ≠ 0 : angle(ξ, axis) < θ}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cone {
    pub axis: Vec<f64>,
    pub half_angle: f64,
}

pub const CONE_BOUNDARY_TOL: f64 = 1e-12;

impl Cone {
    /// θ in (0, π/2]; θ = π/2 gives the open half-space.
    pub fn new(axis: &[f64], half_angle: f64) -> Result<Self> {
        let n = norm(axis);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Invalid("cone axis must be a nonzero finite vector".into()));
        }
        if !(half_angle > 0.0 && half_angle <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::Invalid(format!("cone half-angle must lie in (0, pi/2], got {half_angle}")));
        }
        Ok(Self { axis: axis.iter().map(|v| v / n).collect(), half_angle })
    }

    pub fn dim(&self) -> usize {
        self.axis.len()
    }

    pub fn angle(&self, xi: &[f64]) -> f64 {
        let along = dot(xi, &self.axis);
        let perp: Vec<f64> = xi.iter().zip(&self.axis).map(|(x, a)| x - along * a).collect();
        norm(&perp).atan2(along)
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        xi.iter().any(|&v| v != 0.0) && self.angle(xi) < self.half_angle - CONE_BOUNDARY_TOL
    }

    /// Γ₁ ⊂ Γ with the half-angle reduced by `margin`.
    pub fn inner(&self, margin: f64) -> Result<Self> {
        Self::new(&self.axis, self.half_angle - margin)
    }
}

/// Unit directions at equal angles in the plane, or a Fibonacci set in higher dimension.
pub fn direction_grid(d: usize, count: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            // golden-angle spiral on S^2, padded with zeros for d > 3
            let ga = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let mut v = vec![0.0; d];
                    v[0] = r * (ga * k as f64).cos();
                    v[1] = r * (ga * k as f64).sin();
                    v[2] = z;
                    v
                })
                .collect()
        }
    }
}

/// Largest angular distance from any unit vector to the nearest grid direction (planar grids).
pub fn direction_grid_gap(d: usize, count: usize) -> f64 {
    match d {
        1 => 0.0,
        2 => std::f64::consts::PI / count as f64,
        _ => (4.0 / count as f64).sqrt() * 2.0,
    }
}

/// Half-open parallelepiped T·[0,1)^d or the centered T·[−1/2,1/2)^d.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalRegion {
    pub lattice: Lattice,
    pub centered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reduced {
    pub t: Vec<f64>,
    pub mu: Vec<f64>,
    pub k: Vec<i64>,
}

impl FundamentalRegion {
    pub fn new(lattice: Lattice, centered: bool) -> Self {
        Self { lattice, centered }
    }

    pub fn lower_corner(&self) -> f64 {
        if self.centered {
            -0.5
        } else {
            0.0
        }
    }

    /// x = t + μ with t ∈ I_Λ, μ ∈ Λ.
    pub fn reduce(&self, x: &[f64]) -> Reduced {
        let y = self.lattice.coordinates(x);
        let shift = if self.centered { 0.5 } else { 0.0 };
        let k: Vec<i64> = y
            .iter()
            .map(|&v| {
                let v = v + shift;
                (v + 1e-13 * (1.0 + v.abs())).floor() as i64
            })
            .collect();
        let mu = self.lattice.point(&k);
        let t = x.iter().zip(&mu).map(|(a, b)| a - b).collect();
        Reduced { t, mu, k }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let lo = self.lower_corner();
        self.lattice.coordinates(x).iter().all(|&y| y >= lo - 1e-13 && y < lo + 1.0 - 1e-13)
    }

    /// D = sup_{t ∈ I_Λ} |t|, attained at a vertex.
    pub fn diameter_bound(&self) -> f64 {
        let d = self.lattice.dim();
        let lo = self.lower_corner();
        (0..1usize << d)
            .map(|mask| {
                let c: Vec<f64> = (0..d).map(|i| lo + ((mask >> i) & 1) as f64).collect();
                let d = self.lattice.dim();
                let x: Vec<f64> =
                    (0..d).map(|i| (0..d).map(|j| self.lattice.generator()[(i, j)] * c[j]).sum()).collect();
                norm(&x)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationCheck {
    pub separated: bool,
    pub rho: f64,
    pub witness: Vec<f64>,
    pub witness_index: Vec<i64>,
    pub shortest_norm: f64,
}

/// Shortest nonzero vector of `l` by exhaustion; ties go to the lexicographically largest index.
pub fn shortest_vector(l: &Lattice) -> Result<LatticePoint> {
    if l.dim() > SVP_DIMENSION_CAP {
        return Err(Error::Unsupported { dim: l.dim(), cap: SVP_DIMENSION_CAP });
    }
    let r0 = l.basis().iter().map(|c| norm(c)).fold(f64::INFINITY, f64::min);
    let pts = l.enumerate_points(r0 * (1.0 + 1e-9), 0.0)?;
    let mut best: Option<LatticePoint> = None;
    for p in pts {
        if p.k.iter().all(|&v| v == 0) {
            continue;
        }
        best = match best {
            None => Some(p),
            Some(b) => {
                let tie = (p.norm - b.norm).abs() <= 1e-12 * b.norm;
                if p.norm < b.norm && !tie || tie && p.k > b.k {
                    Some(p)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.ok_or_else(|| Error::Invalid("lattice has no nonzero vector in search ball".into()))
}

/// U ∩ Λ* = {0} for the open ball U of radius ρ.
pub fn check_separation(l: &Lattice, rho: f64) -> Result<SeparationCheck> {
    if !(rho > 0.0) {
        return Err(Error::Invalid(format!("separation radius must be positive, got {rho}")));
    }
    let s = shortest_vector(&l.dual())?;
    Ok(SeparationCheck { separated: s.norm >= rho, rho, witness: s.x, witness_index: s.k, shortest_norm: s.norm })
}

/// `check_separation` turned into an error when it fails.
pub fn require_separation(l: &Lattice, rho: f64) -> Result<SeparationCheck> {
    let s = check_separation(l, rho)?;
    if s.separated {
        Ok(s)
    } else {
        Err(Error::Separation { witness: s.witness, norm: s.shortest_norm, rho })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(l: &Lattice, r: f64, rmin: f64) -> Vec<Vec<i64>> {
        let d = l.dim();
        let b = l.box_bounds(r).iter().max().copied().unwrap() * 2 + 2;
        let mut out = Vec::new();
        let total = (2 * b + 1).pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut k = vec![0i64; d];
            for i in (0..d).rev() {
                k[i] = (rem % (2 * b + 1)) - b;
                rem /= 2 * b + 1;
            }
            let x: Vec<f64> =
                (0..d).map(|i| (0..d).map(|j| l.generator()[(i, j)] * k[j] as f64).sum()).collect();
            let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n <= r && n >= rmin {
                out.push(k);
            }
        }
        out
    }

    #[test]
    fn examples() {
        let z = Lattice::integer(2);
        assert_eq!(z.covolume(), 1.0);
        assert_eq!(z.dual().generator(), &DMatrix::identity(2, 2));
        let d = Lattice::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(d.covolume(), 2.0);
        assert_eq!(d.dual().generator()[(0, 0)], 0.5);
        assert!((Lattice::hexagonal().covolume() - 0.8660254037844386).abs() < 1e-15);
        assert_eq!(z.enumerate_points(1.5, 0.0).unwrap().len(), 9);
        assert_eq!(z.enumerate_points(0.5, 0.0).unwrap().len(), 1);
        let ks: Vec<_> = d.enumerate_points(1.5, 0.5).unwrap().into_iter().map(|p| p.k).collect();
        assert_eq!(ks, vec![vec![0, -1], vec![0, 1]]);
        assert!(matches!(
            Lattice::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]),
            Err(Error::SingularGenerator { .. })
        ));
    }

    #[test]
    fn cone_examples() {
        let z = Lattice::integer(2);
        let c = Cone::new(&[1.0, 0.0], 10f64.to_radians()).unwrap();
        let ks: Vec<_> = z.enumerate_in_cone(&c, 0.0, 3.0).unwrap().into_iter().map(|p| p.k).collect();
        assert_eq!(ks, vec![vec![1, 0], vec![2, 0], vec![3, 0]]);
        let c30 = Cone::new(&[1.0, 0.0], 30f64.to_radians()).unwrap();
        let pts = z.enumerate_in_cone(&c30, 0.0, 3.0).unwrap();
        assert!(pts.iter().any(|p| p.k == vec![2, 1]) && pts.iter().any(|p| p.k == vec![2, -1]));
        let far: Vec<_> = z.enumerate_in_cone(&c, 1.5, 3.0).unwrap().into_iter().map(|p| p.k).collect();
        assert_eq!(far, vec![vec![2, 0], vec![3, 0]]);
    }

    #[test]
    fn reduce_examples() {
        let f = FundamentalRegion::new(Lattice::integer(2), false);
        let r = f.reduce(&[2.25, -0.5]);
        assert_eq!(r.t, vec![0.25, 0.5]);
        assert_eq!(r.mu, vec![2.0, -1.0]);
        let h = FundamentalRegion::new(Lattice::hexagonal(), false);
        let col = h.lattice.basis()[0].clone();
        let r = h.reduce(&col);
        assert!(norm(&r.t) < 1e-15);
        assert_eq!(r.k, vec![1, 0]);
    }

    #[test]
    fn separation_examples() {
        let z = Lattice::integer(2);
        assert!(check_separation(&z, 1.0).unwrap().separated);
        let s = check_separation(&z, 1.1).unwrap();
        assert!(!s.separated);
        assert_eq!(s.witness, vec![1.0, 0.0]);
        let d = Lattice::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let s = check_separation(&d, 0.6).unwrap();
        assert!(!s.separated);
        assert_eq!(s.witness, vec![0.5, 0.0]);
        assert!(matches!(shortest_vector(&Lattice::integer(5)), Err(Error::Unsupported { .. })));
    }

    fn gen_lattice(d: usize) -> impl Strategy<Value = Lattice> {
        proptest::collection::vec(-1.0f64..1.0, d * d).prop_filter_map("singular", move |v| {
            let m = DMatrix::from_fn(d, d, |i, j| v[i * d + j] * 0.6 + if i == j { 1.0 } else { 0.0 });
            Lattice::new(m).ok()
        })
    }

    proptest! {
        #[test]
        fn enumeration_matches_brute_force(l in (1usize..=3).prop_flat_map(gen_lattice), r in 0.5f64..6.0, frac in 0.0f64..0.9) {
            let got: Vec<_> = l.enumerate_points(r, frac * r).unwrap().into_iter().map(|p| p.k).collect();
            let mut want = brute(&l, r, frac * r);
            want.sort();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn covolume_duality(l in (1usize..=4).prop_flat_map(gen_lattice)) {
            prop_assert!((l.covolume() * l.dual().covolume() - 1.0).abs() < 1e-12);
            let dd = l.dual().dual();
            for c in l.basis() { prop_assert!(dd.contains(&c, 1e-9)); }
        }

        #[test]
        fn reduce_reassembles(l in gen_lattice(2), x in proptest::collection::vec(-50.0f64..50.0, 2), centered: bool, shift in proptest::collection::vec(-5i64..5, 2)) {
            let f = FundamentalRegion::new(l.clone(), centered);
            let r = f.reduce(&x);
            let err: f64 = norm(&x.iter().zip(&r.t).zip(&r.mu).map(|((a, b), c)| a - b - c).collect::<Vec<_>>());
            prop_assert!(err <= 1e-12 * (1.0 + norm(&x)));
            prop_assert!(f.contains(&r.t));
            let again = f.reduce(&r.t);
            prop_assert!(again.k.iter().all(|&k| k == 0));
            let xs: Vec<f64> = x.iter().zip(l.point(&shift)).map(|(a, b)| a + b).collect();
            let rs = f.reduce(&xs);
            prop_assert!(norm(&rs.t.iter().zip(&r.t).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-9);
        }

        #[test]
        fn cone_scale_invariant(x in proptest::collection::vec(-10.0f64..10.0, 2), c in 0.01f64..100.0, th in 0.05f64..1.5) {
            let cone = Cone::new(&[0.3, 0.8], th).unwrap();
            let y: Vec<f64> = x.iter().map(|v| v * c).collect();
            let (a, b) = (cone.angle(&x), cone.angle(&y));
            if (a - th).abs() > 1e-9 { prop_assert_eq!(cone.contains(&x), cone.contains(&y)); }
            prop_assert!((a - b).abs() < 1e-12 || norm(&x) == 0.0);
        }

        #[test]
        fn separation_monotone(l in gen_lattice(2), rho in 0.05f64..2.0, f in 0.0f64..1.0) {
            if check_separation(&l, rho).unwrap().separated {
                prop_assert!(check_separation(&l, rho * f + 1e-6).unwrap().separated);
            }
        }

        #[test]
        fn cone_subset(th in 0.1f64..1.5, ax in -3.0f64..3.0) {
            let z = Lattice::hexagonal();
            let cone = Cone::new(&[ax.cos(), ax.sin()], th).unwrap();
            let all = z.enumerate_points(6.0, 0.0).unwrap();
            for p in z.enumerate_in_cone(&cone, 0.0, 6.0).unwrap() {
                prop_assert!(cone.contains(&p.x));
                prop_assert!(all.contains(&p));
            }
        }
    }
}
