//! Probability that randomized data lands close to a smooth function:
//! `||h^w|| <= lambda` and the seminorms of `g^w` stay within a factor of `g`'s.
//!
//! Run with `cargo run --release --example density_theorem`.

use probconv::experiments::config::default_indices;
use probconv::tailprob::{calibrate_density, density_event_probability, Ensemble};
use probconv::{Field, GridSpec};

fn main() -> probconv::Result<()> {
    let spec = GridSpec::new(1, 256, 40.0)?;
    let f = Field::from_real_fn(spec, |x| (-0.5 * x[0] * x[0]).exp() / (1.0 + x[0] * x[0]));
    let pairs = default_indices(1);
    for eps in [0.4, 0.2, 0.1] {
        let cal = calibrate_density(&f, eps, &pairs, Ensemble { samples: 2000, seed: 5 })?;
        let rep = density_event_probability(&f, eps, &pairs, &cal.constants, Ensemble { samples: 4000, seed: 6 })?;
        println!(
            "eps={eps:<4} lambda={:.4} level={:.3} P(joint)={:.4} (target >= {:.2}); P(h event)={:.4}, P(g event)={:.4}",
            rep.lambda,
            rep.level,
            rep.estimate.probability,
            1.0 - 2.0 * eps,
            rep.h_event,
            rep.g_event
        );
    }
    Ok(())
}
