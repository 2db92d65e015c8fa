//! Follow the threshold schedule `alpha(eps)` as `eps` shrinks and watch the
//! exceedance probability stay below `eps`.
//!
//! Run with `cargo run --release --example convergence_curve`.

use probconv::tailprob::{self, Ensemble};
use probconv::{Field, FlowKind, GridSpec};

fn main() -> probconv::Result<()> {
    let spec = GridSpec::new(1, 256, 40.0)?;
    // A datum with a corner at the origin, so it is not smooth.
    let f = Field::from_real_fn(spec, |x| (-x[0].abs()).exp());
    let flow = FlowKind::Kdv;
    let x = spec.origin();
    let epsilons = [0.4, 0.2, 0.1, 0.05];
    let times: Vec<f64> = epsilons.iter().map(|e| 0.5 * e).collect();

    let cal = tailprob::calibrate(&flow, &f, &times, x, 4000, 3)?;
    let rows = tailprob::convergence_curve(&flow, &f, &epsilons, &cal.params, x, Ensemble { samples: 10_000, seed: 4 })?;
    println!("{:>6} {:>8} {:>10} {:>10} {:>10} {:>10}", "eps", "t", "alpha", "prob", "ci_high", "||h||");
    for r in rows {
        println!(
            "{:>6} {:>8} {:>10.4e} {:>10.4e} {:>10.4e} {:>10.4e}",
            r.epsilon, r.t, r.alpha, r.estimate.probability, r.estimate.ci_high, r.h_norm
        );
    }
    Ok(())
}
