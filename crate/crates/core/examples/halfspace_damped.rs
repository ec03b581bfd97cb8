//! A small damped half-space solve at subsonic inflow: the boundary-layer
//! profile and the decay of the damped trace.
use relkin::halfspace::{BoundaryFamily, HalfSpace, SolverConfig};
use relkin::verify::desk_operator;

fn main() -> relkin::Result<()> {
    let op = desk_operator(-0.5, 6)?;
    let hs = HalfSpace::new(op, SolverConfig { nx: 32, ..Default::default() })?;
    let a0 = BoundaryFamily::MaxwellianBump { amplitude: 1e-3 }.evaluate(&hs.op)?;
    let sol = hs.solve_nonlinear_damped(&a0)?;
    let report = hs.damping_decay_check(&sol.f);
    println!("tau = {:.4}, gamma = {:.4}, outer iterations = {}", hs.tau, hs.gamma, sol.history.len());
    println!("{:>8} {:>12} {:>12} {:>12}", "x", "|h|_beta", "rho coeff", "damped trace");
    for ix in (0..hs.grid.nx1()).step_by(4) {
        let chi = hs.macro_coefficients(&sol.h, ix);
        println!(
            "{:>8.3} {:>12.4e} {:>12.4e} {:>12.4e}",
            hs.grid.x_nodes[ix],
            sol.h.sup_p_weighted(&hs.grid, ix, hs.config.beta),
            chi[0],
            report.trace[ix].first().copied().unwrap_or(0.0)
        );
    }
    println!("fitted gamma = {:?}, solvability residual = {:?}", report.gamma_fit, hs.solvability_residual(&sol.f));
    Ok(())
}
