//! The thirteen closed-form equilibrium moments against direct quadrature.
use relkin::cli::moment_table;

fn main() -> relkin::Result<()> {
    let table = moment_table(0.4, 0.8, 1.0, true)?;
    for r in &table.rows {
        println!(
            "{:<10} {:>14.8} {:>14.8} {:>10.2e}",
            r.kind,
            r.closed_form,
            r.quadrature.unwrap_or(f64::NAN),
            r.rel_err.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
