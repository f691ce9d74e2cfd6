//! Discretely monitored geometric Asians approach the continuously monitored
//! one as the number of dates grows.
//!
//! Run with: cargo run --release --example asian_limit

use levy_exotic::levy::LevyModel;
use levy_exotic::validate::asian_gaps;

fn main() {
    let r = 0.05;
    for (name, m) in [
        ("gaussian", LevyModel::gaussian(0.2, r).unwrap()),
        ("nig", LevyModel::nig(8.0, -2.0, 0.3, r).unwrap()),
    ] {
        let (gaps, limit) = asian_gaps(&m, 100.0, 100.0).unwrap();
        println!("{name}: continuous price {limit:.8}");
        for (dates, gap) in [4, 8, 16, 32].iter().zip(&gaps) {
            println!("  M = {dates:>2}  |F_M - F| = {gap:.3e}");
        }
    }
}
