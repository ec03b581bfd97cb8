//! Eigenvalues of the macroscopic flux matrix and the number of positive
//! ones as the far-field Mach number sweeps through the sonic points.
use relkin::macro5::{classify, sound_speed};

fn main() -> relkin::Result<()> {
    let (t, c) = (1.0, 1.0);
    let cs = sound_speed(t, c)?.c_inf;
    for mach in [-3.0, -2.0, -1.01, -0.99, -0.5, 0.5, 0.99, 1.01, 2.0] {
        let r = classify(mach * cs, t, c)?;
        let lambda: Vec<String> = r.lambda.iter().map(|l| format!("{l:+.4}")).collect();
        println!("M = {mach:+.2}  n+ = {}  lambda = [{}]", r.n_plus, lambda.join(", "));
    }
    Ok(())
}
