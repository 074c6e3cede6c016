//! Cut-off family test against N_p = p!, and the seminorm families.
//!
//! `cargo run --example quasianalytic`

use std::sync::Arc;

use wfsample::lattice::{Cone, Lattice};
use wfsample::localize::{CutoffFamily, LocalizedSpectrum, TestDistribution, Window, WindowSpec};
use wfsample::microlocal::{
    quasianalytic_test, wf_family, FamilyMember, FamilyMode, ModerateSpec, ModerateWeight, Radii, Thresholds,
};
use wfsample::weights::{WeightFunction, WeightSequence};

fn main() -> wfsample::Result<()> {
    let lattice = Lattice::integer(2);
    let (radii, th) = (Radii::default(), Thresholds::default());
    let n = WeightSequence::gevrey(1.0, 64)?;
    let x0 = [0.0, 0.0];
    let family = Arc::new(CutoffFamily::new(&x0, 0.1, 0.5, 12, &n)?);
    let sources = [
        ("gaussian", TestDistribution::Gaussian { center: vec![0.0, 0.0], width: 0.3 }),
        ("jump", TestDistribution::PlaneJump { normal: vec![1.0, 0.0], offset: 0.0 }),
        ("delta", TestDistribution::Delta { center: vec![0.0, 0.0] }),
    ];
    for (name, f) in &sources {
        for deg in [0.0f64, 90.0] {
            let a = deg.to_radians();
            let cone = Cone::new(&[a.cos(), a.sin()], 15f64.to_radians())?;
            let q = quasianalytic_test(f, &x0, &cone, &lattice, &n, &family, 12, &radii, &th)?;
            let sup = q.c_hat.iter().skip(3).cloned().fold(0.0, f64::max);
            println!("{name:<9} {deg:>4} deg  {:?}  sup C_p {sup:.3}  cap {:.3}", q.verdict.verdict, q.c_cap);
        }
    }

    // l^q seminorms weighted by (1+|xi|)^s: inf and sup over s in {0, 2}
    let window = Window::new(WindowSpec::default(), 2)?;
    let omega = WeightFunction::log();
    let members: Vec<FamilyMember> = [0.0, 2.0]
        .into_iter()
        .map(|s| Ok(FamilyMember { weight: ModerateWeight::new(ModerateSpec::Polynomial { s }, omega.clone())?, q: Some(2.0) }))
        .collect::<wfsample::Result<_>>()?;
    let cones = vec![Cone::new(&[1.0, 0.0], 15f64.to_radians())?];
    let jump = LocalizedSpectrum::new(&sources[1].1, &window.taper, &x0)?;
    for mode in [FamilyMode::Inf, FamilyMode::Sup] {
        let v = wf_family(&jump, mode, &members, &cones, &lattice, 128.0, &th)?;
        println!("jump normal cone, {mode:?}: {:?}  per member {:?}", v.verdict.verdict, v.per_cone[0]);
    }
    Ok(())
}
