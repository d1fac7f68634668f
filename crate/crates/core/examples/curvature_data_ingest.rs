//! Reading curvature data from TOML, the validation diagnostics, and a
//! round trip through the writer.

use std::path::Path;

use calabi_gluing::obstruction::{obstruction_lambda_closed, CurvatureData};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for file in ["round_sphere_n2.toml", "random_einstein_n2.toml", "broken_bianchi_n2.toml"] {
        match CurvatureData::from_path(&dir.join(file)) {
            Ok(d) => {
                let s = d.summary();
                println!(
                    "{file}: n = {}, Λ = {}, scalar = {:.6}, <R(ω),ω> = {:.6}",
                    d.n,
                    d.lambda,
                    d.scalar(),
                    d.r_omega_omega()
                );
                println!("  validation: {s:?}");
                println!("  closed obstruction value {:.8}", obstruction_lambda_closed(&d)?.value);
            }
            Err(e) => println!("{file}: rejected: {e}"),
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = CurvatureData::random_einstein(2, -1.5, 1.0, &mut rng)?;
    let text = d.to_toml_string();
    let back = CurvatureData::from_toml_str(&text)?;
    let diff = d.riemann().iter().zip(back.riemann()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("round trip of a random Einstein datum: max component change {diff:.1e}");
    Ok(())
}
