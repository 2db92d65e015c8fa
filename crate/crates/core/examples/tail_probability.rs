//! Estimate `P(|S(t)f^w(x) - f^w(x)| > alpha)` and fit the Gaussian-tail bound.
//!
//! Run with `cargo run --release --example tail_probability`.

use probconv::tailprob::{self, theoretical_bound, TailExperimentConfig};
use probconv::{Field, FlowKind, GridSpec};

fn main() -> probconv::Result<()> {
    let spec = GridSpec::new(1, 256, 40.0)?;
    let f = Field::from_real_fn(spec, |x| (-0.5 * x[0] * x[0]).exp());
    let flow = FlowKind::Kdv;
    let x = spec.origin();
    let times = [0.1, 0.05, 0.02];

    let cal = tailprob::calibrate(&flow, &f, &times, x, 5000, 11)?;
    let (c, c1) = (cal.params.c, cal.params.c1);
    println!("fit over {} pilot cells: C = {c:.4}, C1 = {c1:.4}, R^2 = {:.4}", cal.fit.cells, cal.fit.r_squared);

    let rms = tailprob::deviation_second_moment(&flow, &f, times[0], x)?.sqrt();
    let report = tailprob::estimate_tail(&TailExperimentConfig {
        flow,
        data: f,
        times: times.to_vec(),
        thresholds: [1.0, 2.0, 3.0].iter().map(|q: &f64| rms * q.sqrt()).collect(),
        observation_points: vec![x],
        ensemble_size: 10_000,
        seed: 1,
    })?;
    // The pilot fit is an estimate; lift C1 so the bound also covers the
    // main cells that saw exceedances.
    let informative: Vec<_> = report.estimates.iter().filter(|e| e.exceed_count > 0).cloned().collect();
    let lifted = tailprob::dominate(&cal.params, &informative);
    println!("C1 lifted from {c1:.4} to {:.4} to cover the main ensemble", lifted.c1);
    println!("{:>6} {:>10} {:>8} {:>10} {:>10} {:>10}", "t", "alpha", "count", "ci_high", "pilot", "lifted");
    for e in &report.estimates {
        let pilot = theoretical_bound(&cal.params, e.alpha, e.t.abs());
        let bound = theoretical_bound(&lifted, e.alpha, e.t.abs());
        println!(
            "{:>6} {:>10.4e} {:>8} {:>10.4e} {:>10.4e} {:>10.4e}",
            e.t, e.alpha, e.exceed_count, e.ci_high, pilot, bound
        );
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
