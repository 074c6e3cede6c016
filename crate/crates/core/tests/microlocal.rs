mod common;

use common::*;
use wfsample::lattice::{Cone, Lattice};
use wfsample::localize::{LocalizedSpectrum, TestDistribution};
use wfsample::microlocal::*;
use wfsample::weights::WeightFunction;

fn ls(f: &TestDistribution, x0: &[f64]) -> LocalizedSpectrum {
    LocalizedSpectrum::new(f, &window().taper, x0).unwrap()
}

#[test]
fn delta_sup_norm_is_window_value() {
    let w = window();
    let x0 = [0.1, -0.05];
    let s = ls(&delta(), &x0);
    let cone = cone_at(30.0, 15.0);
    let sn = fl_seminorm_lattice(&s, &cone, &Lattice::integer(2), &ModerateWeight::one(), None, 64.0).unwrap();
    let want = w.value(&[-0.1, 0.05]).abs();
    assert!((sn.value - want).abs() <= 1e-12 * want, "{} {want}", sn.value);
    assert!(sn.tail_ratio > 0.99);
}

#[test]
fn doubling_radius() {
    let one = ModerateWeight::one();
    let l = Lattice::integer(2);
    let cone = cone_at(0.0, 15.0);
    let s = ls(&synthetic(1.0, 1.0), &[0.0, 0.0]);
    let a = fl_seminorm_lattice(&s, &cone, &l, &one, Some(1.0), 30.0).unwrap();
    let b = fl_seminorm_lattice(&s, &cone, &l, &one, Some(1.0), 60.0).unwrap();
    assert!((b.value / a.value - 1.0).abs() < 1e-3);

    // a half-line of Z: the l^1 sum of a constant modulus doubles
    let d1 = TestDistribution::Delta { center: vec![0.0] };
    let w1 = wfsample::localize::Window::new(Default::default(), 1).unwrap();
    let s1 = LocalizedSpectrum::new(&d1, &w1.taper, &[0.0]).unwrap();
    let half = Cone::new(&[1.0], std::f64::consts::FRAC_PI_2).unwrap();
    let z = Lattice::integer(1);
    let a = fl_seminorm_lattice(&s1, &half, &z, &one, Some(1.0), 30.0).unwrap();
    let b = fl_seminorm_lattice(&s1, &half, &z, &one, Some(1.0), 60.0).unwrap();
    let r = b.value / a.value;
    assert!((1.9..2.1).contains(&r), "{r}");

    // in the plane the count of cone points grows like R^2
    let s2 = ls(&delta(), &[0.0, 0.0]);
    let a = fl_seminorm_lattice(&s2, &cone, &l, &one, Some(1.0), 30.0).unwrap();
    let b = fl_seminorm_lattice(&s2, &cone, &l, &one, Some(1.0), 60.0).unwrap();
    assert!(b.value / a.value > 1.9);
}

#[test]
fn sup_norm_lattice_and_continuous() {
    let one = ModerateWeight::one();
    for (_, f) in catalog() {
        let s = ls(&f, &[0.0, 0.0]);
        for deg in [0.0, 45.0, 90.0] {
            let cone = cone_at(deg, 15.0);
            let lat = fl_seminorm_lattice(&s, &cone, &Lattice::integer(2).scaled(0.25).unwrap(), &one, None, 16.0).unwrap();
            let cont = fl_seminorm_continuous(&s, &cone, &one, None, 16.0).unwrap();
            // both are sups over finite subsets of the cone; a dense lattice gets close
            assert!((lat.log_value - cont.log_value).abs() < 0.1, "{deg} {} {}", lat.log_value, cont.log_value);
        }
    }
}

#[test]
fn exp_omega_weight_needs_slope_above_one() {
    let om = WeightFunction::gevrey(2.0).unwrap();
    let v = ModerateWeight::new(ModerateSpec::ExpOmega { lambda: 1.0 }, om).unwrap();
    let cone = cone_at(0.0, 15.0);
    let th = Thresholds::default();
    let mut got = vec![];
    for rate in [0.5, 1.5] {
        let s = ls(&synthetic(rate, 0.5), &[0.0, 0.0]);
        let c = fl_seminorm_continuous(&s, &cone, &v, Some(1.0), 2048.0).unwrap();
        let l = fl_seminorm_lattice(&s, &cone, &Lattice::integer(2), &v, Some(1.0), 2048.0).unwrap();
        assert_eq!(seminorm_verdict(&c, &th), seminorm_verdict(&l, &th));
        got.push(seminorm_verdict(&c, &th));
    }
    assert_eq!(got, vec![RegularityVerdict::Singular, RegularityVerdict::Regular]);
}

#[test]
fn lambda_fit_examples() {
    let w = window();
    let (radii, th) = (Radii::default(), Thresholds::default());
    let z2 = Sampling::Lattice(Lattice::integer(2));
    let g2 = WeightFunction::gevrey(2.0).unwrap();
    let lam = |f: &TestDistribution, deg: f64, om: &WeightFunction| {
        lambda_fit(&ls(f, &[0.0, 0.0]), &cone_at(deg, 15.0), &z2, om, &radii, &th, Some(&w.taper)).unwrap()
    };
    for deg in [0.0, 45.0, 90.0, 200.0] {
        for om in [WeightFunction::log(), g2.clone()] {
            let r = lam(&delta(), deg, &om);
            assert!(r.fit.as_ref().unwrap().lambda.abs() <= 0.02);
            assert_eq!(r.roumieu.verdict, RegularityVerdict::Singular);
            assert_eq!(r.beurling.verdict, RegularityVerdict::Singular);
        }
    }
    let r = lam(&synthetic(1.0, 0.5), 0.0, &g2);
    assert!((r.fit.unwrap().lambda - 1.0).abs() <= 0.05);

    let r = lam(&jump(), 0.0, &WeightFunction::log());
    assert!((r.fit.unwrap().lambda - 1.0).abs() < 0.1);
    assert_eq!(r.roumieu.verdict, RegularityVerdict::Regular);
    for s in [2.0, 4.0] {
        let r = lam(&jump(), 0.0, &WeightFunction::gevrey(s).unwrap());
        assert!(r.fit.unwrap().lambda < 0.05);
        assert_eq!(r.roumieu.verdict, RegularityVerdict::Singular);
    }
}

#[test]
fn gaussian_is_floor_bound() {
    let w = window();
    let r = lambda_fit(
        &ls(&gaussian(), &[0.0, 0.0]),
        &cone_at(0.0, 15.0),
        &Sampling::Lattice(Lattice::integer(2)),
        &WeightFunction::gevrey(2.0).unwrap(),
        &Radii::default(),
        &Thresholds::default(),
        Some(&w.taper),
    )
    .unwrap();
    assert!(r.roumieu.floor_bound);
    assert_eq!(r.roumieu.verdict, RegularityVerdict::Regular);
}

#[test]
fn families_of_one_reduce_to_the_member() {
    let th = Thresholds::default();
    let l = Lattice::integer(2);
    let cones = vec![cone_at(0.0, 15.0)];
    for (_, f) in catalog() {
        let s = ls(&f, &[0.0, 0.0]);
        for q in [Some(1.0), Some(2.0), None] {
            let m = FamilyMember { weight: ModerateWeight::one(), q };
            let single = seminorm_verdict(&fl_seminorm_lattice(&s, &cones[0], &l, &m.weight, q, 128.0).unwrap(), &th);
            for mode in [FamilyMode::Inf, FamilyMode::Sup] {
                let v = wf_family(&s, mode, std::slice::from_ref(&m), &cones, &l, 128.0, &th).unwrap();
                assert_eq!(v.verdict.verdict, single);
            }
        }
    }
}

#[test]
fn beurling_agrees_with_sup_family() {
    // sup over v_λ = e^{λω}, λ on a grid, against the trend-based Beurling verdict
    let w = window();
    let om = WeightFunction::gevrey(2.0).unwrap();
    let fam: Vec<FamilyMember> = [0.5, 1.0, 2.0]
        .into_iter()
        .map(|l| FamilyMember { weight: ModerateWeight::new(ModerateSpec::ExpOmega { lambda: l }, om.clone()).unwrap(), q: None })
        .collect();
    let (radii, th) = (Radii::default(), Thresholds::default());
    let l = Lattice::integer(2);
    let mut sources = catalog();
    sources.push(("slow", synthetic(1.0, 0.5)));
    for (name, f) in &sources {
        let s = ls(f, &[0.0, 0.0]);
        for deg in [0.0, 90.0, 135.0] {
            let cone = cone_at(deg, 15.0);
            let b = lambda_fit(&s, &cone, &Sampling::Lattice(l.clone()), &om, &radii, &th, Some(&w.taper)).unwrap();
            let sup = wf_family(&s, FamilyMode::Sup, &fam, std::slice::from_ref(&cone), &l, radii.r_max, &th).unwrap();
            assert_eq!(b.beurling.verdict, sup.verdict.verdict, "{name} {deg}");
        }
    }
}

#[test]
fn delta_shell_maxima_grow_geometrically() {
    let n = wfsample::weights::WeightSequence::gevrey(1.0, 40).unwrap();
    let fam = wfsample::localize::CutoffFamily::new(&[0.0, 0.0], 0.1, 0.5, 12, &n).unwrap();
    let radii = Radii::default();
    let q = quasianalytic_test(&delta(), &[0.0, 0.0], &cone_at(0.0, 15.0), &Lattice::integer(2), &n, &fam, 12, &radii, &Thresholds::default()).unwrap();
    assert_eq!(q.verdict.verdict, RegularityVerdict::Singular);
    let ln2 = std::f64::consts::LN_2;
    for (i, g) in q.growth.iter().enumerate() {
        let p = (i + 1) as f64;
        // |f̂_p| is constant, so each octave adds p log 2 up to lattice discreteness
        assert!((g - p * ln2).abs() < 0.1 * p * ln2 + 0.05, "p={p} growth {g}");
    }
}
