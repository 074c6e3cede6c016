#![allow(dead_code)]

use wfsample::lattice::Lattice;
use wfsample::localize::{SyntheticSpectrum, TestDistribution, Window, WindowSpec};

pub fn window() -> Window {
    Window::new(WindowSpec::default(), 2).unwrap()
}

pub fn gaussian() -> TestDistribution {
    TestDistribution::Gaussian { center: vec![0.0, 0.0], width: 0.3 }
}

pub fn jump() -> TestDistribution {
    TestDistribution::PlaneJump { normal: vec![1.0, 0.0], offset: 0.0 }
}

pub fn delta() -> TestDistribution {
    TestDistribution::Delta { center: vec![0.0, 0.0] }
}

/// |f̂_loc(ξ)| = e^{−rate |ξ|^power}.
pub fn synthetic(rate: f64, power: f64) -> TestDistribution {
    TestDistribution::Synthetic { dim: 2, spectrum: SyntheticSpectrum::RadialExp { rate, power }, nominal_singular: false }
}

pub fn catalog() -> Vec<(&'static str, TestDistribution)> {
    vec![("gaussian", gaussian()), ("jump", jump()), ("delta", delta())]
}

pub fn lattices() -> Vec<(&'static str, Lattice)> {
    vec![
        ("Z2", Lattice::integer(2)),
        ("0.7Z2", Lattice::integer(2).scaled(0.7).unwrap()),
        ("hex", Lattice::hexagonal()),
    ]
}

/// Seeds on the jump line and at the delta, one on the line away from it, one off everything.
pub fn seeds() -> Vec<Vec<f64>> {
    vec![vec![0.0, 0.0], vec![0.0, 0.3], vec![0.6, 0.3]]
}

pub fn cone_at(deg: f64, half_deg: f64) -> wfsample::lattice::Cone {
    let a = deg.to_radians();
    wfsample::lattice::Cone::new(&[a.cos(), a.sin()], half_deg.to_radians()).unwrap()
}
