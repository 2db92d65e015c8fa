//! Split rough data into a smooth decaying part plus a small remainder and
//! print the decay seminorms of the smooth part.
//!
//! Run with `cargo run --release --example schwartz_split`.

use probconv::decompose::{multi_indices, schwartz_split};
use probconv::{Field, GridSpec};

fn main() -> probconv::Result<()> {
    let spec = GridSpec::new(1, 2048, 16.0)?;
    let f = Field::from_real_fn(spec, |x| if x[0].abs() <= 1.0 { 1.0 } else { 0.0 });
    for eps in [0.3, 0.2, 0.1] {
        let split = schwartz_split(&f, eps)?;
        let p = &split.params;
        println!(
            "eps={eps:<5} ||h||={:.4} sigma={:.4} R={:.2} after {} steps",
            split.h_norm, p.sigma, p.radius, p.iterations
        );
        let worst = split.decay_report;
        println!("           largest seminorm sup|x^a d^b g| over |a|,|b| <= 2: {worst:.3}");
    }
    println!("multi-indices of order <= 2 in 2D: {}", multi_indices(2, 2).len());
    Ok(())
}
