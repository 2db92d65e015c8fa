//! Drive a batch run from a TOML configuration and read the results back.
//!
//! Run with `cargo run --release --example config_run`.

use probconv::experiments::output::read_csv;
use probconv::experiments::runs::TailRow;
use probconv::experiments::{self, Command, RunConfig};

fn main() -> probconv::Result<()> {
    let dir = std::env::temp_dir().join("probconv-config-run");
    let config = RunConfig::from_toml(
        r#"
        seed = "0x2a"
        flows = ["kdv"]
        times = [0.1, 0.05]
        ensemble_size = 2000
        observation_points = [[128], [140]]

        [grid]
        dim = 1
        samples_per_axis = 256
        extent = 40.0
        "#,
    )?;
    let outcome = experiments::run(Command::Tails, &RunConfig { output_dir: dir.clone(), ..config }, &dir)?;
    for line in &outcome.lines {
        println!("{line}");
    }
    let table = read_csv::<TailRow>(&dir.join("tails.csv"))?;
    let covered = table.rows.iter().filter(|r| r.ci_high <= r.bound || r.exceed_count == 0).count();
    println!("config hash {}: {covered} of {} cells under the bound", table.hash.unwrap_or_default(), table.rows.len());
    Ok(())
}
