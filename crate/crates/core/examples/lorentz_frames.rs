//! Rest-frame boost of a pair of momenta and the centre-of-momentum data.
use relkin::lorentz::{com_reduce, lorentz_dot, FourVector};

fn main() -> relkin::Result<()> {
    let c = 1.0;
    let p = FourVector::on_shell([2.0, -0.5, 0.3], c);
    let q = FourVector::on_shell([-0.4, 1.2, 0.0], c);
    let frame = com_reduce(&p, &q, c)?;
    let total = frame.boost.apply(&(p + q));
    println!("s = {:.12}, g = {:.12}", frame.s, frame.g);
    println!("boosted total = ({:.6}, {:.2e}, {:.2e}, {:.2e})", total.t_component, total.spatial[0], total.spatial[1], total.spatial[2]);
    println!("sqrt(s) = {:.12}", frame.s.sqrt());
    println!("metric defect of the boost = {:.2e}", frame.boost.metric_defect());
    let bp = frame.boost.apply(&p);
    println!("P.P before {:.12}, after {:.12}", lorentz_dot(&p, &p), lorentz_dot(&bp, &bp));
    Ok(())
}
