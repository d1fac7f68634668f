//! The Calabi-metric suite for n = 2 and 3: Monge–Ampère identity,
//! Ricci-flatness, ALE decay rate, and the o and Ω checks.

use calabi_gluing::suites::{calabi_suite, CalabiSampling, CalabiTolerances};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in [2, 3] {
        let suite = calabi_suite(n, &CalabiTolerances::default(), &CalabiSampling::default())?;
        println!("n = {n}  (ALE slope {:?}, expected {})", suite.ale_fit.slope(), -2 * n as i64);
        for c in &suite.checks {
            println!("  {} {:<24} {:.3e}", c.status.label(), c.name, c.measured);
        }
        println!("  naive F' + uF'' sum would give {:.3e}", suite.monge_ampere_naive);
    }
    Ok(())
}
