//! Writes a random Einstein curvature datum (with Weyl part) in the TOML
//! ingestion format to standard output.
//!
//! Usage: cargo run --example write_random_data -- <n> <lambda> <seed>

use calabi_gluing::obstruction::CurvatureData;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(2), |s| s.parse())?;
    let lambda: f64 = args.get(1).map_or(Ok(1.0), |s| s.parse())?;
    let seed: u64 = args.get(2).map_or(Ok(0), |s| s.parse())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    print!("{}", CurvatureData::random_einstein(n, lambda, 1.0, &mut rng)?.to_toml_string());
    Ok(())
}
