//! Indicial roots of P0, P1, P2 and P for m = 4, 6, 8, 10, with the exact
//! radial ODE residual of e^{−δr} as r grows.

use calabi_gluing::indicial::{indicial_table, model_ode_residual, OdeMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for m in [4, 6, 8, 10] {
        println!("m = {m}");
        for row in indicial_table(m)? {
            let far = model_ode_residual(row.operator, row.branch, row.roots.delta_plus, 12.0, m, OdeMode::ExactCoth)?;
            println!(
                "  {:<3}{:<11} c = {:>3}   δ+ = {:>9.5}  δ− = {:>9.5}   coth residual at r=12: {far:.1e}",
                row.operator.name(),
                row.branch.name(),
                row.quadratic.c,
                row.roots.delta_plus,
                row.roots.delta_minus
            );
        }
    }
    Ok(())
}
