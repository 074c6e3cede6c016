mod common;

use common::*;
use wfsample::lattice::Lattice;
use wfsample::localize::{CutoffFamily, LocalizedSpectrum, TestDistribution};
use wfsample::microlocal::*;
use wfsample::weights::{WeightFunction, WeightSequence};

fn roumieu(omega: WeightFunction) -> AnalyzerConfig {
    AnalyzerConfig::new(Analyzer::Roumieu(omega))
}

fn singular_set(est: &WaveFrontEstimate) -> Vec<(usize, usize)> {
    let nd = est.directions.len();
    est.pairs
        .iter()
        .enumerate()
        .filter(|(_, p)| p.result.verdict == RegularityVerdict::Singular)
        .map(|(i, p)| (p.seed, i % nd))
        .collect()
}

#[test]
fn scaling_moves_singularities_to_x0_over_c() {
    let c = 2.0;
    let w = window();
    let cfg = roumieu(WeightFunction::gevrey(2.0).unwrap());
    let l = Lattice::integer(2);
    let sources = [
        TestDistribution::Delta { center: vec![1.2, 0.0] },
        TestDistribution::PlaneJump { normal: vec![1.0, 0.0], offset: 1.2 },
    ];
    for f in sources {
        let g = f.dilate(c).unwrap();
        let seeds = vec![vec![1.2, 0.0], vec![0.6, 0.0]];
        let a = estimate_wavefront(&f, &seeds, 16, &cfg, &l, &w).unwrap();
        let b = estimate_wavefront(&g, &seeds, 16, &cfg, &l, &w).unwrap();
        let sa = singular_set(&a);
        let sb = singular_set(&b);
        assert!(!sa.is_empty());
        assert!(sa.iter().all(|(s, _)| *s == 0), "{sa:?}");
        // same directions, seed moved from x0 to x0/c
        let moved: Vec<(usize, usize)> = sa.iter().map(|(_, d)| (1, *d)).collect();
        assert_eq!(sb, moved);
    }
}

#[test]
fn shrinking_the_cone_never_creates_singularities() {
    let w = window();
    let l = Lattice::integer(2);
    for omega in [WeightFunction::log(), WeightFunction::gevrey(2.0).unwrap()] {
        for (name, f) in catalog() {
            let mut prev: Option<WaveFrontEstimate> = None;
            for half in [15.0f64, 10.0, 5.0] {
                let mut cfg = roumieu(omega.clone());
                cfg.half_angle = half.to_radians();
                let est = estimate_wavefront(&f, &seeds(), 16, &cfg, &l, &w).unwrap();
                if let Some(p) = &prev {
                    for (x, y) in p.pairs.iter().zip(&est.pairs) {
                        assert!(
                            !(x.result.verdict == RegularityVerdict::Regular && y.result.verdict == RegularityVerdict::Singular),
                            "{name} {half} seed {} theta {}",
                            x.seed,
                            x.theta
                        );
                    }
                }
                prev = Some(est);
            }
        }
    }
}

#[test]
fn gevrey_singular_implies_quasianalytic_singular() {
    let w = window();
    let l = Lattice::integer(2);
    let (radii, th) = (Radii::default(), Thresholds::default());
    let x0 = [0.0, 0.0];
    for s in [1.0, 2.0] {
        let omega = WeightFunction::gevrey(s).unwrap();
        let n = WeightSequence::gevrey(s, 64).unwrap();
        let fam = CutoffFamily::new(&x0, 0.1, 0.5, 12, &n).unwrap();
        let mut checked = 0;
        for (name, f) in catalog() {
            let ls = LocalizedSpectrum::new(&f, &w.taper, &x0).unwrap();
            for k in 0..8 {
                let cone = cone_at(45.0 * k as f64, 15.0);
                let r = lambda_fit(&ls, &cone, &Sampling::Lattice(l.clone()), &omega, &radii, &th, Some(&w.taper)).unwrap();
                if r.roumieu.verdict == RegularityVerdict::Singular {
                    let q = quasianalytic_test(&f, &x0, &cone, &l, &n, &fam, 12, &radii, &th).unwrap();
                    assert_eq!(q.verdict.verdict, RegularityVerdict::Singular, "{name} s={s} k={k}");
                    checked += 1;
                }
            }
        }
        assert!(checked >= 10);
    }
}

#[test]
fn lattice_and_continuous_rates_agree_for_gevrey4() {
    let w = window();
    let (radii, th) = (Radii::default(), Thresholds::default());
    let g4 = WeightFunction::gevrey(4.0).unwrap();
    let mut sources = catalog();
    sources.push(("synthetic", synthetic(1.0, 0.5)));
    for (name, f) in &sources {
        let ls = LocalizedSpectrum::new(f, &w.taper, &[0.0, 0.0]).unwrap();
        let cone = cone_at(0.0, 15.0);
        let cont = lambda_fit(&ls, &cone, &Sampling::continuous(), &g4, &radii, &th, None).unwrap();
        let y = cont.fit.unwrap().lambda;
        for l in [Lattice::integer(2), Lattice::hexagonal()] {
            let lat = lambda_fit(&ls, &cone, &Sampling::Lattice(l), &g4, &radii, &th, None).unwrap();
            let x = lat.fit.unwrap().lambda;
            assert!((x - y).abs() <= 0.1 * y.max(0.2), "{name}: {x} vs {y}");
        }
    }
}
