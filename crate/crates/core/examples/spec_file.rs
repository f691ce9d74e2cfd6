//! Prices the JSON spec files shipped next to the examples, the same way the
//! `levy-exotic price` command does.
//!
//! Run with: cargo run --release --example spec_file [-- path/to/spec.json]

use std::path::Path;

use levy_exotic::app::{load_spec, price_report, PriceOverrides};

fn main() {
    let paths: Vec<String> = match std::env::args().nth(1) {
        Some(p) => vec![p],
        None => {
            let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/specs");
            let mut v: Vec<String> = std::fs::read_dir(dir)
                .unwrap()
                .map(|e| e.unwrap().path().to_string_lossy().into_owned())
                .collect();
            v.sort();
            v
        }
    };
    for path in paths {
        let name = Path::new(&path).file_name().unwrap().to_string_lossy().into_owned();
        let (spec, model) = match load_spec(&path, PriceOverrides::default()) {
            Ok(x) => x,
            Err(o) => {
                print!("{name:<28} {}", o.stderr);
                continue;
            }
        };
        match price_report(&spec, &model) {
            Ok(report) => println!("{name:<28} {:>7} {:>14.8}", report["method"].as_str().unwrap(), report["price"].as_f64().unwrap()),
            Err(e) => println!("{name:<28} {}", e.name()),
        }
    }
}
