//! Put-call parity for compound options: call-on-X minus put-on-X equals X
//! minus the discounted first strike.
//!
//! Run with: cargo run --release --example compound_parity

use levy_exotic::contracts::{compound_parity_check, solve_compound_thresholds, CompoundLeg, ContractSpec};
use levy_exotic::levy::LevyModel;

fn main() {
    let r = 0.05;
    let models = [
        ("gaussian", LevyModel::gaussian(0.2, r).unwrap()),
        ("nig", LevyModel::nig(8.0, -2.0, 0.3, r).unwrap()),
        ("cgmy", LevyModel::cgmy(1.0, 5.0, 10.0, 0.5, r).unwrap()),
    ];
    for (name, m) in &models {
        let c = ContractSpec::Compound {
            legs: vec![
                CompoundLeg { expiry: 0.5, strike: 5.0, w: 1.0 },
                CompoundLeg { expiry: 1.0, strike: 100.0, w: 1.0 },
            ],
        };
        let s1 = solve_compound_thresholds(&c, m).unwrap();
        println!("{name:<9} critical price at T1 = {:.6}", s1[0]);
        for w2 in [1.0, -1.0] {
            let residual = compound_parity_check(m, 5.0, 0.5, 100.0, 1.0, w2, 100.0).unwrap();
            let inner = if w2 > 0.0 { "call" } else { "put" };
            println!("          parity residual on a {inner}: {residual:.2e}");
        }
    }
}
