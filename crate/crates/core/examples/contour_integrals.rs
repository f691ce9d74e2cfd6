//! Multidimensional contour integrals of Gaussian integrands against the
//! multivariate normal distribution they reduce to.
//!
//! Run with: cargo run --example contour_integrals

use levy_exotic::gaussian::lemma1_contour_side;
use levy_exotic::gaussian::mvn::{mvn_cdf, CorrelationMatrix};

fn main() {
    let cases: Vec<(Vec<f64>, Vec<Vec<f64>>, Vec<f64>)> = vec![
        (vec![0.3], vec![vec![1.0]], vec![1.0]),
        (vec![0.5, -0.2], vec![vec![1.0, 0.6], vec![0.6, 1.0]], vec![1.0, -1.0]),
        (
            vec![0.1, 0.4, -0.7],
            vec![vec![1.0, 0.5, 0.2], vec![0.5, 1.0, -0.3], vec![0.2, -0.3, 1.0]],
            vec![-1.0, 1.0, 1.0],
        ),
    ];
    println!("{:>3} {:>18} {:>18} {:>10}", "N", "contour", "sign * MVN", "gap");
    for (d, rows, w) in cases {
        let c = CorrelationMatrix::new(rows).unwrap();
        // any offsets in the right half-line work; the value must not move
        for omega in [0.5, 1.5] {
            let om = vec![omega; d.len()];
            let contour = lemma1_contour_side(&d, &c, &w, &om).unwrap();
            let sign: f64 = w.iter().product();
            let wd: Vec<f64> = d.iter().zip(&w).map(|(x, s)| x * s).collect();
            let exact = sign * mvn_cdf(&wd, &c.signed(&w)).unwrap();
            println!("{:>3} {:>18.12} {:>18.12} {:>10.1e}", d.len(), contour, exact, (contour - exact).abs());
        }
    }
}
