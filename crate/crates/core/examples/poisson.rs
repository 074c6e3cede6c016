//! Poisson summation for a Gaussian on scaled integer lattices.
//!
//! `cargo run --example poisson`

use std::f64::consts::PI;

use num_complex::Complex64;
use wfsample::fourier::poisson_check;
use wfsample::lattice::Lattice;

fn main() -> wfsample::Result<()> {
    for c in [1.0, 0.7, 1.5] {
        let l = Lattice::integer(1).scaled(c)?;
        let xs: Vec<Vec<f64>> = (0..100).map(|i| vec![c * i as f64 / 100.0]).collect();
        let r = poisson_check(
            |x| (-PI * x[0] * x[0]).exp(),
            |xi| Complex64::new((-PI * xi[0] * xi[0]).exp(), 0.0),
            &l,
            &xs,
            20.0,
        )?;
        println!(
            "{c} Z: max discrepancy {:.2e} ({} lattice terms, {} dual terms)",
            r.max_discrepancy, r.lhs_terms, r.rhs_terms
        );
    }

    let hex = Lattice::hexagonal();
    let xs: Vec<Vec<f64>> = (0..10).flat_map(|i| (0..10).map(move |j| vec![0.1 * i as f64, 0.1 * j as f64])).collect();
    let r = poisson_check(
        |x| (-PI * (x[0] * x[0] + x[1] * x[1])).exp(),
        |xi| Complex64::new((-PI * (xi[0] * xi[0] + xi[1] * xi[1])).exp(), 0.0),
        &hex,
        &xs,
        8.0,
    )?;
    println!("hexagonal: max discrepancy {:.2e}", r.max_discrepancy);
    Ok(())
}
