//! Residual of the glued metric against t at a fixed damage-zone position,
//! with and without the tλχ_t o counterterm.

use calabi_gluing::fit::logspace;
use calabi_gluing::gluing::residual_sweep;
use calabi_gluing::obstruction::CurvatureData;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ts = logspace(10f64.powf(-4.5), 1e-3, 6);
    let models = [
        ("constant-curvature n=3", CurvatureData::constant_curvature(1.0, 3)?),
        ("kahler-einstein n=2", CurvatureData::kahler_einstein(2.0, 2)?),
        ("flat n=2", CurvatureData::flat(2)?),
    ];
    for (name, d) in models {
        for counterterm in [true, false] {
            let rep = residual_sweep(&d, &ts, 1.0, counterterm)?;
            println!(
                "{name}, counterterm {counterterm}: slope {:?} (predicted {})",
                rep.fit.slope(),
                rep.predicted_slope
            );
            for r in &rep.rows {
                println!(
                    "  t = {:.3e}  r = {:6.3}  residual {:.4e}  floor {:.1e}",
                    r.t, r.r, r.sup_residual, r.noise_floor
                );
            }
        }
    }
    Ok(())
}
