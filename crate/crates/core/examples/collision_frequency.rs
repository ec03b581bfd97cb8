//! Collision frequency of a hard-potential kernel: large-momentum growth
//! and the boost identity between the moving and resting far field.
use relkin::collision::{collision_frequency, frequency_rule, KernelParams};
use relkin::halfspace::linear_slope;
use relkin::juttner::MaxwellianParams;
use relkin::lorentz::energy;
use relkin::verify::frequency_boost_defect;

fn main() -> relkin::Result<()> {
    let kernel = KernelParams::power_law(1.0, 1.0, 0.0);
    let far = MaxwellianParams::far_field(0.5, 1.0, 1.0)?;
    let mut pts = Vec::new();
    for k in 0..=8 {
        let p = [10f64.powf(1.0 + 0.25 * k as f64), 0.0, 0.0];
        let nu = collision_frequency(&kernel, &far, p, &frequency_rule(&far, p, 8, 16));
        let p0 = energy(p, far.c);
        println!("p0 = {p0:>10.3}  nu = {nu:.6}");
        pts.push((p0.ln(), nu.ln()));
    }
    println!("log-log slope = {:.4} (a/2 = 0.5)", linear_slope(&pts).unwrap_or(f64::NAN));
    println!("boost identity defect = {:.2e}", frequency_boost_defect(&kernel, &far, [0.7, -0.3, 0.2], 8, 16)?);
    Ok(())
}
