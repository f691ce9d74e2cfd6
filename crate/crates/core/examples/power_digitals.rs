//! Multi-period power digitals: a two-date digital, the effect of the contour
//! offsets, and the spot delta.
//!
//! Run with: cargo run --example power_digitals

use levy_exotic::digital::{
    default_offsets, delta, feasible_interval, price_digital, ContourOffsets, MonitoringSchedule, PayoffParameterSet,
};
use levy_exotic::levy::LevyModel;

fn main() {
    let model = LevyModel::nig(8.0, -2.0, 0.3, 0.05).unwrap();
    let spot = 100.0;
    let sched = MonitoringSchedule::new(0.0, vec![0.5, 1.0]).unwrap();

    // S_{T2} paid if S_{T1} > 95 and S_{T2} > S_{T1}
    let p = PayoffParameterSet::new(
        vec![0.0, 1.0],
        vec![95f64.ln(), 0.0],
        vec![1.0, 1.0],
        vec![vec![1.0, 0.0], vec![-1.0, 1.0]],
    )
    .unwrap();

    let r = price_digital(&model, &sched, &p, spot, None, None).unwrap();
    println!("price      {:.10}", r.value);
    println!("error      {:.1e}", r.quadrature_error);
    println!("offsets    {:?}", r.offsets_used.omega);
    println!("grid       {} evaluations", r.evaluations);

    let (lo, hi) = feasible_interval(&model, &sched, &p).unwrap();
    println!("\nfeasible equal offsets: ({lo:.3}, {hi:.3})");
    println!("{:>8} {:>16} {:>10}", "omega", "price", "error");
    for frac in [0.2, 0.4, 0.6, 0.8] {
        let om = lo + frac * (hi.min(lo + 10.0) - lo);
        let o = ContourOffsets::uniform(om, 2);
        let q = price_digital(&model, &sched, &p, spot, Some(&o), Some(1e-8)).unwrap();
        println!("{om:>8.3} {:>16.10} {:>10.1e}", q.value, q.quadrature_error);
    }

    let d = delta(&model, &sched, &p, spot, None).unwrap();
    let bump = 1e-3 * spot;
    let up = price_digital(&model, &sched, &p, spot + bump, None, Some(1e-10)).unwrap().value;
    let dn = price_digital(&model, &sched, &p, spot - bump, None, Some(1e-10)).unwrap().value;
    println!("\ndelta      {d:.8}");
    println!("bumped     {:.8}", (up - dn) / (2.0 * bump));
    println!("chosen offsets {:?}", default_offsets(&model, &sched, &p, spot).unwrap().omega);
}
