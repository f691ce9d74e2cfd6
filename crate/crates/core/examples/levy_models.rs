//! Characteristic exponents of the three model families, the martingale
//! drift and an Esscher change of measure.
//!
//! Run with: cargo run --example levy_models

use levy_exotic::levy::{esscher_calibrate, LevyModel, ModelKind};
use num_complex::Complex64;

fn main() {
    let r = 0.05;
    let models = [
        ("gaussian", LevyModel::gaussian(0.2, r).unwrap()),
        ("nig", LevyModel::nig(8.0, -2.0, 0.3, r).unwrap()),
        ("cgmy", LevyModel::cgmy(1.0, 5.0, 10.0, 0.5, r).unwrap()),
    ];

    println!("{:<9} {:>18} {:>12} {:>12} {:>10}", "model", "strip", "mu", "variance", "r+psi(-i)");
    for (name, m) in &models {
        println!(
            "{:<9} ({:>7.2}, {:>7.2}) {:>12.6} {:>12.6} {:>10.1e}",
            name,
            m.strip.0,
            m.strip.1.min(999.0),
            m.mu,
            m.variance(),
            m.emm_residual()
        );
    }

    println!("\nRe psi(xi) along the real axis");
    print!("{:>8}", "xi");
    for (name, _) in &models {
        print!("{name:>14}");
    }
    println!();
    for xi in [0.0, 1.0, 10.0, 100.0, 1000.0] {
        print!("{xi:>8}");
        for (_, m) in &models {
            print!("{:>14.6}", m.psi(Complex64::new(xi, 0.0)).unwrap().re);
        }
        println!();
    }

    // a historic NIG with a 12% drift, moved to the risk-neutral measure
    let kind = ModelKind::Nig { alpha: 8.0, beta: -2.0, delta: 0.3 };
    let historic = LevyModel::with_drift(kind, 0.12, r).unwrap();
    let q = esscher_calibrate(&historic, r).unwrap();
    println!("\nEsscher parameter h = {:.6}", q.h);
    println!("risk-neutral model: {:?}", q.model.kind);
    println!("martingale residual: {:.1e}", q.model.emm_residual());
}
