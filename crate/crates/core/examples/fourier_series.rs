//! Fourier coefficients of lattice-periodic functions by the two routes.
//!
//! `cargo run --example fourier_series`

use std::f64::consts::PI;

use wfsample::fourier::{
    classify_growth, coefficients_by_region, coefficients_by_window, parseval_check, synthesize, CompactSource,
    PeriodicSource, RegionQuadrature,
};
use wfsample::lattice::Lattice;
use wfsample::localize::{Placement, Window, WindowSpec};
use wfsample::weights::WeightFunction;

fn main() -> wfsample::Result<()> {
    // periodized Gaussian on Z: c_n = e^{-pi n^2}
    let z = Lattice::integer(1);
    let g = PeriodicSource::PeriodizedGaussian { center: vec![0.0], width: 1.0 };
    let c = coefficients_by_region(&g, &z, 4.0, &RegionQuadrature::new(32, 1))?;
    for (p, v) in c.points.iter().zip(&c.values).filter(|(p, _)| p.k[0] >= 0) {
        println!("n={}  c_n {:.3e}  exact {:.3e}", p.k[0], v.re, (-PI * (p.k[0] * p.k[0]) as f64).exp());
    }

    // a compactly supported bump on the hexagonal lattice: region quadrature vs closed form
    let hex = Lattice::hexagonal();
    let bump = Window::new(WindowSpec::GevreyProduct { s0: 1.5, terms: 24, radius: 0.4, placement: Placement::Centered }, 2)?;
    let src = PeriodicSource::Periodized(CompactSource::new(bump.taper, vec![0.1, -0.05], None)?);
    let quad = RegionQuadrature::new(64, 2);
    let a = coefficients_by_region(&src, &hex, 10.0, &quad)?;
    let b = coefficients_by_window(&src, &hex, 10.0)?;
    let worst = a
        .points
        .iter()
        .zip(&a.values)
        .filter_map(|(p, v)| b.get(&p.k).map(|w| (v - w).norm()))
        .fold(0.0, f64::max)
        / b.max_modulus();
    println!("hexagonal bump: {} coefficients, relative route difference {worst:.2e}", a.points.len());

    let wide = coefficients_by_window(&src, &hex, 40.0)?;
    let pr = parseval_check(&src, &wide, &quad)?;
    println!("Parseval: sum |c|^2 {:.12}  mean |g|^2 {:.12}  rel {:.1e}", pr.coefficient_sum, pr.mean_square, pr.relative);

    let x = [0.1, -0.05];
    println!("synthesized at the bump center {:.6}", synthesize(&wide, &x).re);

    let growth = classify_growth(&wide, &WeightFunction::gevrey(1.5)?, Default::default())?;
    println!("growth class against |xi|^(2/3): {:?}", growth.verdict);
    Ok(())
}
