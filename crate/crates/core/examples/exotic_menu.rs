//! Every contract type under the three model families.
//!
//! Run with: cargo run --release --example exotic_menu

use std::time::Instant;

use levy_exotic::contracts::{price_contract, CompoundLeg, ContractSpec};
use levy_exotic::digital::{MonitoringSchedule, PayoffParameterSet};
use levy_exotic::levy::LevyModel;

fn main() {
    let r = 0.05;
    let spot = 100.0;
    let models = [
        ("gaussian", LevyModel::gaussian(0.2, r).unwrap()),
        ("nig", LevyModel::nig(8.0, -2.0, 0.3, r).unwrap()),
        ("cgmy", LevyModel::cgmy(1.0, 5.0, 10.0, 0.5, r).unwrap()),
    ];
    let quarterly = MonitoringSchedule::uniform(0.0, 1.0, 4).unwrap();
    let thirds = MonitoringSchedule::uniform(0.0, 1.0, 3).unwrap();
    let contracts = [
        (
            "digital",
            ContractSpec::Digital {
                schedule: MonitoringSchedule::new(0.0, vec![1.0]).unwrap(),
                payoff: PayoffParameterSet::single(0.0, 1.0, 1.0, 100f64.ln()).unwrap(),
            },
        ),
        ("forward start", ContractSpec::ForwardStart { t1: 0.5, t2: 1.0, w: 1.0 }),
        (
            "asian (4 dates)",
            ContractSpec::AsianGeometric { schedule: quarterly, strike: 100.0, w: 1.0, weights: vec![] },
        ),
        ("asian (cont.)", ContractSpec::AsianContinuous { t_start: 0.0, t_end: 1.0, strike: 100.0, w: 1.0 }),
        ("chooser", ContractSpec::Chooser { t1: 0.5, t_expiry: 1.0, strike: 100.0 }),
        (
            "call on call",
            ContractSpec::Compound {
                legs: vec![
                    CompoundLeg { expiry: 0.5, strike: 5.0, w: 1.0 },
                    CompoundLeg { expiry: 1.0, strike: 100.0, w: 1.0 },
                ],
            },
        ),
        (
            "barrier (3 dates)",
            ContractSpec::BarrierDownOutCall { schedule: thirds.clone(), barrier: 90.0, strike: 100.0 },
        ),
        ("lookback (3)", ContractSpec::LookbackFixed { schedule: thirds, strike: 100.0, w: 1.0 }),
    ];

    print!("{:<18}", "");
    for (name, _) in &models {
        print!("{name:>22}");
    }
    println!();
    for (label, c) in &contracts {
        print!("{label:<18}");
        for (_, m) in &models {
            let t = Instant::now();
            match price_contract(c, m, spot, None) {
                Ok(p) => print!("{:>13.6} {:>6.2}s ", p.value, t.elapsed().as_secs_f64()),
                Err(e) => print!("{:>22}", e.name()),
            }
        }
        println!();
    }
}
