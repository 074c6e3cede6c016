//! Lattice samples against continuous cone samples: the fitted decay rates agree.
//!
//! `cargo run --example equivalence`

use wfsample::lattice::{Cone, Lattice};
use wfsample::localize::{LocalizedSpectrum, SyntheticSpectrum, TestDistribution, Window, WindowSpec};
use wfsample::microlocal::{lambda_fit, Radii, Sampling, Thresholds};
use wfsample::weights::WeightFunction;

fn main() -> wfsample::Result<()> {
    let window = Window::new(WindowSpec::default(), 2)?;
    let sources = [
        ("jump", TestDistribution::PlaneJump { normal: vec![1.0, 0.0], offset: 0.0 }),
        (
            "synthetic",
            TestDistribution::Synthetic {
                dim: 2,
                spectrum: SyntheticSpectrum::RadialExp { rate: 1.0, power: 0.5 },
                nominal_singular: false,
            },
        ),
    ];
    let cone = Cone::new(&[1.0, 0.0], 15f64.to_radians())?;
    let (radii, th) = (Radii::default(), Thresholds::default());
    let samplings = [
        ("Z^2", Sampling::Lattice(Lattice::integer(2))),
        ("hexagonal", Sampling::Lattice(Lattice::hexagonal())),
        ("continuous", Sampling::continuous()),
    ];
    for (name, f) in &sources {
        let ls = LocalizedSpectrum::new(f, &window.taper, &[0.0, 0.0])?;
        for omega in [WeightFunction::log(), WeightFunction::gevrey(2.0)?] {
            let mut line = format!("{name:<10} {:<14}", format!("{:?}", omega.kind));
            for (sn, s) in &samplings {
                let r = lambda_fit(&ls, &cone, s, &omega, &radii, &th, None)?;
                line.push_str(&format!("  {sn} {:.4}", r.fit.map_or(f64::NAN, |f| f.lambda)));
            }
            println!("{line}");
        }
    }
    Ok(())
}
