//! Growth rates of the low modes at a chosen fraction of the critical
//! Rayleigh number, the exchange-of-stabilities check, and a cross-check of
//! one wavenumber against the dense Galerkin eigenvalues.
//!
//! ```text
//! cargo run --example spectrum_table [-- R/R_c]
//! ```

use anyhow::Result;
use thermoflow::spectrum::{
    critical_search, dense_oracle_spectrum, exchange_of_stabilities_report, spectrum_table, write_spectrum_csv,
};
use thermoflow::DimensionlessParams;

fn main() -> Result<()> {
    let factor: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1.0);
    let d = DimensionlessParams::new(1.0, 1.0, 1.0, 4.0)?;
    let r = factor * critical_search(&d, 64)?.r_c;

    let rows = spectrum_table(r, &d, 4, 3)?;
    write_spectrum_csv(&rows, std::io::stdout().lock())?;

    let report = exchange_of_stabilities_report(r, &d, 16, 4)?;
    println!(
        "\nR = {r:.6}: leading rate {:.3e} at {:?}",
        report.leading.beta, report.leading.mode
    );
    println!(
        "{} growing, {} neutral; verdict {:?}",
        report.positive.len(),
        report.neutral.len(),
        report.verdict
    );

    let dense = dense_oracle_spectrum(r, &d, 2, 6)?;
    let closed = rows
        .iter()
        .find(|e| e.mode.m == 2 && e.mode.n == 1)
        .map(|e| e.beta_plus);
    println!(
        "m = 2: dense leading {:.12}, closed form {:.12}",
        dense[0].re,
        closed.unwrap_or(f64::NAN)
    );
    Ok(())
}
