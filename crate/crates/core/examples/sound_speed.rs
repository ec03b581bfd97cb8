//! Far-field sound speed across temperatures, with both limits.
use relkin::macro5::{sound_speed, sound_speed_factor};

fn main() -> relkin::Result<()> {
    let c = 1.0;
    println!("{:>10} {:>14} {:>14} {:>14}", "T", "c_inf", "c_hat_inf", "c_inf^2/T");
    for k in -4..=4 {
        let t = 10f64.powi(k);
        let s = sound_speed(t, c)?;
        println!("{t:>10.0e} {:>14.6e} {:>14.6e} {:>14.6}", s.c_inf, s.c_hat_inf, s.c_inf * s.c_inf / t);
    }
    println!("classical limit 5/3          : {:.6}", sound_speed_factor(1e4)?);
    println!("ultrarelativistic 1/sqrt(3)  : {:.6}", sound_speed(1e3, c)?.c_hat_inf);
    Ok(())
}
