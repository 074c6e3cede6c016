//! Gevrey-2 wave front estimates for the catalog sources on three lattices.
//!
//! `cargo run --example wavefront`

use wfsample::lattice::Lattice;
use wfsample::localize::{TestDistribution, Window, WindowSpec};
use wfsample::microlocal::{estimate_wavefront, Analyzer, AnalyzerConfig, RegularityVerdict};
use wfsample::weights::WeightFunction;

fn main() -> wfsample::Result<()> {
    let window = Window::new(WindowSpec::default(), 2)?;
    let cfg = AnalyzerConfig::new(Analyzer::Roumieu(WeightFunction::gevrey(2.0)?));
    let sources = [
        ("gaussian", TestDistribution::Gaussian { center: vec![0.0, 0.0], width: 0.3 }, vec![vec![0.0, 0.0]]),
        ("jump", TestDistribution::PlaneJump { normal: vec![1.0, 0.0], offset: 0.0 }, vec![vec![0.0, 0.0], vec![0.0, 0.3]]),
        ("delta", TestDistribution::Delta { center: vec![0.0, 0.0] }, vec![vec![0.0, 0.0], vec![0.6, 0.3]]),
    ];
    let lattices = [("Z^2", Lattice::integer(2)), ("0.7 Z^2", Lattice::integer(2).scaled(0.7)?), ("hexagonal", Lattice::hexagonal())];
    for (ln, l) in &lattices {
        for (name, f, seeds) in &sources {
            let est = estimate_wavefront(f, seeds, 16, &cfg, l, &window)?;
            // one character per direction, seeds separated by a space
            let mut map = String::new();
            for (i, p) in est.pairs.iter().enumerate() {
                if i > 0 && i % est.directions.len() == 0 {
                    map.push(' ');
                }
                map.push(match p.result.verdict {
                    RegularityVerdict::Regular => '.',
                    RegularityVerdict::Singular => 'S',
                    RegularityVerdict::Indeterminate => '?',
                });
            }
            println!("{ln:<10} {name:<9} {map}  ({} singular)", est.count(RegularityVerdict::Singular));
        }
    }
    Ok(())
}
