//! Closed-form obstruction, surface-integral oracle and wall classification
//! for the built-in orbifold models.

use calabi_gluing::obstruction::{
    classify_wall, obstruction_lambda_bruteforce, obstruction_lambda_closed, CurvatureData, Quadrature,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:<22} {:>3} {:>12} {:>12} {:>12} {:>10}  class", "model", "n", "closed", "oracle", "lambda_pde", "wall");
    for n in [2, 3, 4] {
        let models = [
            ("flat", CurvatureData::flat(n)?),
            ("football", CurvatureData::football(n)?),
            ("hyperbolic", CurvatureData::hyperbolic(n)?),
            ("constant-curvature:2", CurvatureData::constant_curvature(2.0, n)?),
            ("kahler-einstein:1", CurvatureData::kahler_einstein(1.0, n)?),
        ];
        for (name, d) in models {
            let c = obstruction_lambda_closed(&d)?;
            let b = obstruction_lambda_bruteforce(&d, 1.0, Quadrature::GaussHermite)?;
            let w = classify_wall(&d);
            println!(
                "{name:<22} {n:>3} {:>12.6} {:>12.6} {:>12.6} {:>10.3}  {}",
                c.value, b.value, c.lambda_pde, w.value, w.classification
            );
        }
    }
    Ok(())
}
