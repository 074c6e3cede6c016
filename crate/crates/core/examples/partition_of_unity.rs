//! A lattice partition of unity built from a Gevrey window.
//!
//! `cargo run --example partition_of_unity`

use wfsample::fourier::build_partition_of_unity;
use wfsample::lattice::Lattice;
use wfsample::localize::{Window, WindowSpec};

fn main() -> wfsample::Result<()> {
    let seed = Window::new(WindowSpec::default(), 2)?;
    for (name, l) in [("Z^2", Lattice::integer(2)), ("hexagonal", Lattice::hexagonal()), ("0.7 Z^2", Lattice::integer(2).scaled(0.7)?)] {
        let pu = build_partition_of_unity(&l, &seed)?;
        let err = pu.partition_error(32, 20.0)?;
        let zeros = pu.dual_zero_residuals(24)?;
        let worst = zeros.iter().map(|z| z.1).fold(0.0, f64::max);
        println!(
            "{name:<10} eta_hat(0) {:.6} (covolume {:.6})  max |sum eta - 1| {err:.2e}  max |eta_hat| at dual points {worst:.1e}",
            pu.eta_hat(&[0.0, 0.0]),
            l.covolume()
        );
        println!("           eta at the origin {:.6}", pu.eta(&[0.0, 0.0]));
    }
    Ok(())
}
