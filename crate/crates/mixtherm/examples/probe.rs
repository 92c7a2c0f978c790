use mixtherm::kernels::{self, KernelParams};
use mixtherm::types::Statistics;
fn main() {
    let sup = kernels::bose_g0_sup();
    let mut worst = 0.0f64; let mut worst_d = 0.0;
    for i in 0..4000 {
        let d = 4.0e-7f64 + 2.0e-7 * i as f64 / 3999.0;
        let y = sup * (1.0 - d / sup);
        match kernels::invert_density(y, Statistics::Bose) {
            Ok(a) => {
                let back = kernels::g_integral(KernelParams::new(0, a, Statistics::Bose).unwrap()).unwrap();
                let r = ((back - y) / y).abs();
                if r > worst { worst = r; worst_d = d; println!("d={d:.6e} alpha={a:.6e} resid={r:.3e}"); }
            }
            Err(e) => println!("d={d:.3e} ERR {e}"),
        }
    }
    println!("worst {worst:.3e} at {worst_d:.3e}");
}
