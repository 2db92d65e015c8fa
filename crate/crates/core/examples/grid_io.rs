//! Save a field in the binary and CSV grid formats and load it back.
//!
//! Run with `cargo run --example grid_io`.

use probconv::grid::forward_transform;
use probconv::grid::io::{read_path, GridData};
use probconv::{Field, GridSpec};

fn main() -> probconv::Result<()> {
    let spec = GridSpec::new(2, 32, 16.0)?;
    let f = Field::from_real_fn(spec, |x| (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp());
    let dir = std::env::temp_dir().join("probconv-grid-io");
    std::fs::create_dir_all(&dir)?;

    let physical = GridData::Physical(f.clone());
    let bin = dir.join("gaussian.bin");
    physical.write_binary(std::fs::File::create(&bin)?)?;
    let spectral = GridData::Spectral(forward_transform(&f));
    let csv = dir.join("gaussian_spectrum.csv");
    spectral.write_csv(std::fs::File::create(&csv)?)?;

    println!("binary round trip exact: {}", read_path(&bin)? == physical);
    println!("csv round trip exact: {}", read_path(&csv)? == spectral);
    println!("files in {}", dir.display());
    Ok(())
}
