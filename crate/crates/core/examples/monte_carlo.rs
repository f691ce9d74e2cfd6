//! Fourier prices against Monte Carlo estimates with exact increments.
//!
//! Run with: cargo run --release --example monte_carlo

use levy_exotic::contracts::{price_contract, ContractSpec};
use levy_exotic::digital::MonitoringSchedule;
use levy_exotic::levy::LevyModel;
use levy_exotic::mc::mc_price;

fn main() {
    let model = LevyModel::nig(8.0, -2.0, 0.3, 0.05).unwrap();
    let thirds = MonitoringSchedule::uniform(0.0, 1.0, 3).unwrap();
    let contracts = [
        ("forward start", ContractSpec::ForwardStart { t1: 0.5, t2: 1.0, w: 1.0 }),
        ("chooser", ContractSpec::Chooser { t1: 0.5, t_expiry: 1.0, strike: 100.0 }),
        ("barrier", ContractSpec::BarrierDownOutCall { schedule: thirds.clone(), barrier: 90.0, strike: 100.0 }),
        ("lookback", ContractSpec::LookbackFixed { schedule: thirds, strike: 100.0, w: 1.0 }),
    ];
    println!("{:<14} {:>12} {:>12} {:>10} {:>8}", "contract", "fourier", "mc", "stderr", "z");
    for (name, c) in &contracts {
        let f = price_contract(c, &model, 100.0, None).unwrap().value;
        let mc = mc_price(c, &model, 100.0, 400_000, 11).unwrap();
        let z = (f - mc.estimate) / mc.stderr;
        println!("{name:<14} {f:>12.6} {:>12.6} {:>10.6} {z:>8.2}", mc.estimate, mc.stderr);
    }
}
