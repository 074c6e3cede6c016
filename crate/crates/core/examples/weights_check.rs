//! Weight-function and weight-sequence diagnostics.
//!
//! `cargo run --example weights_check`

use wfsample::weights::{
    auxiliary, check_sequence_conditions, check_weight_conditions, geometric_grid, log_convex_regularization,
    WeightFunction, WeightSequence,
};

fn main() -> wfsample::Result<()> {
    for w in [WeightFunction::log(), WeightFunction::gevrey(2.0)?, WeightFunction::gevrey(1.0)?] {
        let r = check_weight_conditions(&w, 2, 1024.0, 2000, 7)?;
        println!(
            "{:<12} alpha {:?}  beta {:?}  gamma {:?}  gamma0 {:?}",
            format!("{:?}", w.kind),
            r.subadditivity,
            r.beta,
            r.gamma,
            r.gamma0
        );
    }

    let fact = WeightSequence::gevrey(1.0, 1000)?;
    let g2 = WeightSequence::gevrey(2.0, 1000)?;
    for m in [&fact, &g2] {
        let r = check_sequence_conditions(m, 1000)?;
        println!(
            "{:<10} M1 {:?}  M2' H={:.3}  M3' {:?} (partial sum {:.4})",
            m.name, r.m1, r.m2_prime.h, r.m3_prime, r.m3_prime_sum
        );
    }

    // log-convex regularization leaves a log-convex sequence unchanged
    let grid = geometric_grid(1e-2, 1e4, 4000);
    for p in [5, 10, 20] {
        let c = log_convex_regularization(&g2, p, &grid)?;
        println!("p={p:>2}  log M_p {:.6}  log M_p^c {:.6}", g2.log(p)?, c.log_value);
    }

    let q = auxiliary(&fact, &g2)?;
    println!("{}: log Q_10 = {:.6}", q.name, q.log(10)?);
    Ok(())
}
