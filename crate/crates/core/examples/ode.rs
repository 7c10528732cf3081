//! Two-agent linear exchange and its continuous-time approximation.

use kinex::exchange::exchange_general;
use kinex::ode::{decay_rate, discrete_decay_rate, fit_two_points, k_positive_for_half, map_random_saving, GeneralParams};

fn main() -> kinex::error::Result<()> {
    let p = GeneralParams { eps1: 0.9, eps2: 0.05 };
    let k = decay_rate(p);
    let kd = discrete_decay_rate(p).unwrap();
    println!("k = {k:.4}, exact per-step rate = {kd:.4}");

    let (mut wi, mut wj) = (2.0, 0.0);
    let mut traj = vec![wi];
    for _ in 0..30 {
        (wi, wj) = exchange_general(wi, wj, p.eps1, p.eps2);
        traj.push(wi);
    }
    let sol = fit_two_points(traj[0], traj[1], kd, 0.0).unwrap();
    for t in [0usize, 5, 10, 20, 30] {
        println!("t = {t:>2}  w_i = {:.6}  a + b e^(-k't) = {:.6}", traj[t], sol.eval(t as f64));
    }

    let m = map_random_saving(0.3, 0.8, 0.5)?;
    println!("random saving (0.3, 0.8) at eps 1/2 -> eps1 {:.3}, eps2 {:.3}, k {:.3}", m.eps1, m.eps2, decay_rate(m));
    for w in [(0.0, 1.0), (0.5, 1.0), (0.7, 1.0)] {
        println!("window {w:?}: k > 0 for every pair? {}", k_positive_for_half(w)?);
    }
    Ok(())
}
