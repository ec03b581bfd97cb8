//! Post-collision momenta for a sweep of scattering directions and the
//! conservation defects of each.
use relkin::collision::post_collision;
use relkin::lorentz::FourVector;

fn main() -> relkin::Result<()> {
    let c = 1.0;
    let p = FourVector::on_shell([1.5, 0.2, -0.7], c);
    let q = FourVector::on_shell([-0.3, 0.9, 0.4], c);
    for k in 0..6 {
        let phi = k as f64 * std::f64::consts::PI / 3.0;
        let omega = [0.6 * phi.cos(), 0.6 * phi.sin(), 0.8];
        let pair = post_collision(&p, &q, omega, c)?;
        let before = p + q;
        let after = pair.p_post + pair.q_post;
        let defect = (before.t_component - after.t_component)
            .abs()
            .max((0..3).map(|i| (before.spatial[i] - after.spatial[i]).abs()).fold(0.0, f64::max));
        println!("phi = {phi:.3}  cos(theta) = {:+.6}  v = {:.6}  conservation defect = {defect:.1e}", pair.cos_theta, pair.moller);
    }
    Ok(())
}
