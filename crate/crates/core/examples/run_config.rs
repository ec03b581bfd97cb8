//! Load a TOML run configuration (or the defaults), solve, and print the
//! summary and the effective configuration that reproduces the run.
use relkin::cli::run_solve;
use relkin::config::RunConfig;

fn main() -> relkin::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => RunConfig::load(path.as_ref())?,
        None => RunConfig::from_toml_str("[grid]\nper_axis = 6\np_max = 8.0\nstretch = 2.0\nnx = 24\n")?,
    };
    let outcome = run_solve(&cfg, 0)?;
    println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
    println!("{}", outcome.effective.to_toml_string()?);
    Ok(())
}
