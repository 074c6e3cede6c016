//! Decay fit for one (x0, direction) pair, with the window floor alongside.
//!
//! `cargo run --example analyze_pair`

use wfsample::lattice::{Cone, Lattice};
use wfsample::localize::{LocalizedSpectrum, TestDistribution, Window, WindowSpec};
use wfsample::microlocal::{lambda_fit, Radii, Sampling, Thresholds};
use wfsample::weights::WeightFunction;

fn main() -> wfsample::Result<()> {
    let window = Window::new(WindowSpec::default(), 2)?;
    let jump = TestDistribution::PlaneJump { normal: vec![1.0, 0.0], offset: 0.0 };
    let ls = LocalizedSpectrum::new(&jump, &window.taper, &[0.0, 0.0])?;
    let sampling = Sampling::Lattice(Lattice::integer(2));
    let radii = Radii::default();
    let th = Thresholds::default();

    for omega in [WeightFunction::log(), WeightFunction::gevrey(2.0)?] {
        for deg in [0.0f64, 45.0, 90.0] {
            let a = deg.to_radians();
            let cone = Cone::new(&[a.cos(), a.sin()], 15f64.to_radians())?;
            let r = lambda_fit(&ls, &cone, &sampling, &omega, &radii, &th, Some(&window.taper))?;
            println!(
                "{:<14} {deg:>4} deg  lambda {:>7.3} +- {:.3}  floor {:>7.3}  roumieu {:?}  beurling {:?}",
                format!("{:?}", omega.kind),
                r.fit.as_ref().map_or(f64::NAN, |f| f.lambda),
                r.fit.as_ref().map_or(f64::NAN, |f| f.band),
                r.floor_fit.as_ref().map_or(f64::NAN, |f| f.lambda),
                r.roumieu.verdict,
                r.beurling.verdict
            );
        }
    }
    Ok(())
}
