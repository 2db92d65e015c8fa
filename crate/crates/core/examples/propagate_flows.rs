//! Evolve Gaussian data under each free flow and check unitarity.
//!
//! Run with `cargo run --example propagate_flows`.

use probconv::grid::l2_norm;
use probconv::propagators::{evolve, fractional_multiplier};
use probconv::{Field, FlowKind, GridSpec, MultiplierKind};

fn main() -> probconv::Result<()> {
    let line = GridSpec::new(1, 256, 40.0)?;
    let plane = GridSpec::new(2, 64, 32.0)?;
    let cases = [
        (line, FlowKind::Kdv),
        (plane, FlowKind::WavePlus),
        (plane, FlowKind::WaveHalfSum),
        (plane, "schrodinger:++".parse()?),
        (plane, "schrodinger:+-".parse()?),
    ];
    for (spec, flow) in cases {
        let dim = spec.dim();
        let f = Field::from_real_fn(spec, |x| (-0.5 * x[..dim].iter().map(|v| v * v).sum::<f64>()).exp());
        print!("{flow:<16}");
        for t in [0.01, 0.1, 1.0] {
            let u = evolve(&f, &flow, t)?;
            let moved = l2_norm(&u.zip_with(&f, |a, b| a - b)?);
            print!("  t={t:<5} ||S(t)f - f|| = {moved:.3e}, norm ratio {:.12}", l2_norm(&u) / l2_norm(&f));
        }
        println!();
    }

    let f = Field::from_real_fn(line, |x| (-0.5 * x[0] * x[0]).exp());
    let d = fractional_multiplier(&f, 1.0 / 3.0, &MultiplierKind::TimeKdv)?;
    println!("||D_t^(1/3) f|| for KdV = ||D_x f|| = {:.6}", l2_norm(&d));
    Ok(())
}
