//! Split a field into unit-scale frequency pieces and rebuild it.
//!
//! Run with `cargo run --example wiener_partition`.

use probconv::grid::l2_norm;
use probconv::wiener::{partition_sum, projections, square_function};
use probconv::{Field, GridSpec, UnitLattice};

fn main() -> probconv::Result<()> {
    println!("partition of unity at a few frequencies:");
    for xi in [-2.7, -0.5, 0.0, 0.31, 4.99] {
        println!("  sum_k psi({xi} - k) = {:.15}", partition_sum(&[xi]));
    }

    let spec = GridSpec::new(1, 256, 40.0)?;
    let f = Field::from_real_fn(spec, |x| (-0.5 * x[0] * x[0]).exp() * (1.0 + x[0]).cos());
    let lattice = UnitLattice::new(spec);
    let pieces = projections(&f, &lattice)?;
    let mut rebuilt = Field::zeros(spec);
    for p in &pieces {
        rebuilt = rebuilt.zip_with(p, |a, b| a + b)?;
    }
    let err = l2_norm(&rebuilt.zip_with(&f, |a, b| a - b)?);
    println!("{} lattice cells, reconstruction error {err:.2e}", lattice.len());

    let sf = square_function(&f);
    let peak = sf.values().iter().map(|v| v.re).fold(0.0, f64::max);
    println!("max square function {peak:.4} <= ||f|| = {:.4}", l2_norm(&f));
    Ok(())
}
