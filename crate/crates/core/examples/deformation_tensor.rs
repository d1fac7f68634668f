//! The infinitesimal Einstein deformation o of the Calabi metric: pointwise
//! norms against the closed form, its L² norm, and the decay of Ω.

use std::sync::Arc;

use calabi_gluing::calabi::{calabi_cartesian_chart, CalabiParams};
use calabi_gluing::deform_ops::{deformation_tensor, o_l2_norm_sq, sample_points, verify_deformation};
use calabi_gluing::obstruction::sphere_volume;
use calabi_gluing::tensor_core::inner;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in [2usize, 3, 4] {
        let params = CalabiParams::new(n)?;
        let chart = Arc::new(calabi_cartesian_chart(&params, 0.1, 50.0)?);
        println!("n = {n}");
        for x in sample_points(2 * n, 3, 0.5, 4.0, 5) {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let o = deformation_tensor(&x, n)?;
            let got = inner(&chart, &x, &o, &o)?;
            let want = 2.0 * (n * (n - 1)) as f64 / (1.0 + r2.powi(n as i32)).powi(2);
            println!("  r = {:.3}: <o,o> = {got:.12}  closed form {want:.12}", r2.sqrt());
        }
        let l2 = o_l2_norm_sq(&params)?;
        let closed = (n as f64 - 1.0) * sphere_volume(2 * n)? / n as f64;
        println!("  |o|^2_L2 = {l2:.10}  closed form {closed:.10}");
        let rep = verify_deformation(&params, &sample_points(2 * n, 4, 0.5, 5.0, 9))?;
        println!(
            "  trace {:.1e}  div {:.1e}  P {:.1e}",
            rep.max_trace, rep.max_divergence_relative, rep.max_p_relative
        );
    }
    Ok(())
}
