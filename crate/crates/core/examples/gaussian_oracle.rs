//! Under Brownian motion every contract has a closed form; the Fourier engine
//! must reproduce it.
//!
//! Run with: cargo run --release --example gaussian_oracle

use levy_exotic::contracts::price_contract;
use levy_exotic::gaussian::closed_form_price;
use levy_exotic::levy::LevyModel;
use levy_exotic::validate::gaussian_grid_contracts;

fn main() {
    let (sigma, r, spot) = (0.2, 0.05, 100.0);
    let model = LevyModel::gaussian(sigma, r).unwrap();
    println!("{:<28} {:>16} {:>16} {:>9}", "contract", "fourier", "closed form", "rel gap");
    for (name, c, _) in gaussian_grid_contracts(sigma, r, 1.0).unwrap() {
        let fourier = price_contract(&c, &model, spot, None).unwrap().value;
        let exact = closed_form_price(&c, sigma, r, spot).unwrap();
        let gap = (fourier - exact).abs() / exact.abs().max(1e-300);
        println!("{name:<28} {fourier:>16.10} {exact:>16.10} {gap:>9.1e}");
    }
}
