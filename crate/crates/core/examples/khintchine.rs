//! Moments of Gaussian random series against the sub-Gaussian Khintchine
//! bound `||sum g_k c_k||_p <= C sqrt(p) ||c||`.
//!
//! Run with `cargo run --release --example khintchine`.

use probconv::randomize::khintchine_moment;
use probconv::Complex64;

fn main() -> probconv::Result<()> {
    let vectors: [(&str, Vec<Complex64>); 3] = [
        ("single spike", vec![Complex64::new(1.0, 0.0)]),
        ("flat, 32 terms", vec![Complex64::new(32f64.sqrt().recip(), 0.0); 32]),
        (
            "decaying",
            (1..=32).map(|k| Complex64::from_polar(1.0 / k as f64, k as f64)).collect(),
        ),
    ];
    println!("{:<16} {:>4} {:>10} {:>10}", "vector", "p", "moment", "ratio");
    for (name, c) in &vectors {
        let norm = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for p in [2.0, 4.0, 8.0, 16.0] {
            let m = khintchine_moment(c, p, 20_000, 7)?;
            println!("{name:<16} {p:>4} {m:>10.4} {:>10.4}", m / (p.sqrt() * norm));
        }
    }
    Ok(())
}
