//! Runs every experiment at desk scale (`Pr = kappa_a = 1`, aspect ratio 4)
//! and writes CSV series, plot scripts and JSON manifests to `out/suite`.
//!
//! ```text
//! cargo run --release --example verification_suite [-- kind ...]
//! ```

use anyhow::Result;
use thermoflow::harness::{run_experiment, write_outputs, ExperimentKind, ExperimentSpec};
use thermoflow::DimensionlessParams;

fn main() -> Result<()> {
    let params = DimensionlessParams::new(1.0, 1.0, 1.0, 4.0)?;
    let kinds: Vec<ExperimentKind> = match std::env::args().skip(1).collect::<Vec<_>>() {
        names if names.is_empty() => ExperimentKind::ALL.to_vec(),
        names => names.iter().map(|n| n.parse()).collect::<Result<_, _>>()?,
    };
    let mut all_pass = true;
    for kind in kinds {
        let report = run_experiment(&ExperimentSpec::for_kind(kind, params))?;
        let manifest = write_outputs(&report, "out/suite")?;
        print!("{}", report.summary());
        println!("  manifest: {}", manifest.display());
        all_pass &= report.pass;
    }
    println!(
        "{}",
        if all_pass {
            "all experiments passed"
        } else {
            "some experiments failed"
        }
    );
    Ok(())
}
