//! Check suites shared by the command-line front end, the examples and the
//! acceptance harness. Each suite returns named [`Check`]s plus reported
//! values; none of them decides exit codes.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calabi::{
    ale_decay_fit, monge_ampere_residual, monge_ampere_residual_naive, ricci_flatness_ratio, CalabiParams,
};
use crate::deform_ops::{sample_points, verify_deformation, verify_omega_harmonic, verify_omega_harmonic_with};
use crate::error::{GeomError, Result};
use crate::fit::{logspace, FitOutcome};
use crate::gluing::{residual_sweep, SweepReport};
use crate::indicial::{
    eigenbundle_constants, indicial_quadratic, indicial_table, model_ode_residual, Branch, IndicialRow, OdeMode,
    OperatorKind,
};
use crate::obstruction::{
    assemble_from_ledger, bianchi_cyclic_j_identity, classify_wall, closed_bracket, conformal_killing_quadratic,
    contraction_ledger, gauge_tensor_h, ledger_closed_forms, ledger_tensors, moment_checks,
    obstruction_lambda_bruteforce, obstruction_lambda_closed, obstruction_scale, sigma2_tensor,
    wall_to_lambda_constant, BruteForce, Classification, ClosedObstruction, ContractionLedger, CurvatureData,
    Quadrature, WallVerdict,
};
use crate::report::Check;

/// `diff / scale`, or `diff` itself when the scale vanishes.
fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

// ---------------------------------------------------------------- Calabi

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalabiTolerances {
    pub monge_ampere: f64,
    pub ricci: f64,
    pub ale_slope: f64,
    pub o_trace: f64,
    pub o_divergence: f64,
    pub o_p: f64,
    pub omega_d: f64,
    pub omega_delta: f64,
    /// Orders of magnitude by which the corrupted Ω must miss `omega_d`/`omega_delta`.
    pub control_orders: f64,
}

impl Default for CalabiTolerances {
    fn default() -> Self {
        CalabiTolerances {
            monge_ampere: 1e-10,
            ricci: 1e-5,
            ale_slope: 0.2,
            o_trace: 1e-12,
            o_divergence: 1e-5,
            o_p: 1e-4,
            omega_d: 1e-6,
            omega_delta: 1e-6,
            control_orders: 4.0,
        }
    }
}

/// Sample sizes for the Calabi suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalabiSampling {
    pub ricci_points: usize,
    pub deformation_points: usize,
    pub seed: u64,
}

impl Default for CalabiSampling {
    fn default() -> Self {
        CalabiSampling { ricci_points: 30, deformation_points: 8, seed: 11 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CalabiSuite {
    pub checks: Vec<Check>,
    pub ale_fit: FitOutcome,
    pub omega_decay: FitOutcome,
    /// Monge–Ampère residual with F' + uF'' summed directly (cancellation-limited).
    pub monge_ampere_naive: f64,
}

/// Monge–Ampère identity, Ricci-flatness, ALE decay, and the o/Ω suites
/// for complex dimension n.
pub fn calabi_suite(n: usize, tol: &CalabiTolerances, sampling: &CalabiSampling) -> Result<CalabiSuite> {
    let params = CalabiParams::new(n)?;
    let m = 2 * n;
    let mut checks = Vec::new();

    let ma = logspace(1e-3, 1e3, 1000)
        .into_iter()
        .map(|u| monge_ampere_residual(u, &params))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::at_most("monge_ampere", ma, tol.monge_ampere));
    let monge_ampere_naive = logspace(1e-3, 1e3, 1000)
        .into_iter()
        .map(|u| monge_ampere_residual_naive(u, &params))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let mut ricci: f64 = 0.0;
    for r in logspace(0.5, 5.0, sampling.ricci_points) {
        let dir: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        ricci = ricci.max(ricci_flatness_ratio(&params, r, &dir)?);
    }
    checks.push(Check::at_most("ricci_flat", ricci, tol.ricci));

    let ale = ale_decay_fit(&params, &logspace(2.0, 64.0, 12))?;
    let slope_err = ale.outcome.slope().map_or(f64::INFINITY, |s| (s + m as f64).abs());
    checks.push(Check::at_most("ale_decay_slope", slope_err, tol.ale_slope));

    let pts = sample_points(m, sampling.deformation_points, 0.5, 5.0, sampling.seed + 1);
    let d = verify_deformation(&params, &pts)?;
    checks.push(Check::at_most("o_trace", d.max_trace, tol.o_trace));
    checks.push(Check::at_most("o_divergence", d.max_divergence_relative, tol.o_divergence));
    checks.push(Check::at_most("o_lichnerowicz", d.max_p_relative, tol.o_p));

    let w = verify_omega_harmonic(&params, &pts)?;
    checks.push(Check::at_most("omega_closed", w.max_d_relative, tol.omega_d));
    checks.push(Check::at_most("omega_coclosed", w.max_delta_relative, tol.omega_delta));

    // Control: the dr̄∧θ̄ coefficient 2 in place of 1−n.
    let bad = verify_omega_harmonic_with(&params, &pts, 2.0)?;
    let miss = (bad.max_d_relative / tol.omega_d).max(bad.max_delta_relative / tol.omega_delta);
    checks.push(Check::at_least("omega_corrupted_control", miss.log10(), tol.control_orders));

    Ok(CalabiSuite { checks, ale_fit: ale.outcome, omega_decay: w.decay, monge_ampere_naive })
}

// ---------------------------------------------------------- obstruction

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObstructionTolerances {
    pub gauge: f64,
    pub ledger: f64,
    pub moment_sigmas: f64,
    pub algebra: f64,
    pub bruteforce: f64,
    pub wall: f64,
}

impl Default for ObstructionTolerances {
    fn default() -> Self {
        ObstructionTolerances {
            gauge: 1e-12,
            ledger: 1e-10,
            moment_sigmas: 3.0,
            algebra: 1e-10,
            bruteforce: 5e-3,
            wall: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObstructionOptions {
    pub nodes: usize,
    pub seed: u64,
    /// Number of random matrices a for the σ₂/K algebra.
    pub algebra_samples: usize,
}

impl Default for ObstructionOptions {
    fn default() -> Self {
        ObstructionOptions { nodes: 1_000_000, seed: 7, algebra_samples: 50 }
    }
}

/// Known outcome for a built-in model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Expectation {
    /// Wall value zero.
    Unobstructed,
    Obstructed,
    /// Obstructed with wall value 4(n−1)R.
    KahlerEinstein {
        scalar: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ObstructionSuite {
    pub checks: Vec<Check>,
    pub closed: ClosedObstruction,
    pub gauss_hermite: BruteForce,
    pub monte_carlo: BruteForce,
    pub ledger: ContractionLedger,
    pub wall: WallVerdict,
}

/// Largest |B_euc(H)| and |H_iikl + Λδ_kl|, relative to the curvature size.
pub fn gauge_residuals(data: &CurvatureData) -> (f64, f64) {
    let h = gauge_tensor_h(data);
    let m = data.m();
    let scale = data.riemann().iter().fold(data.lambda.abs(), |a, v| a.max(v.abs()));
    let b = h.bianchi_euc().abs().max();
    let t = (h.position_trace() + DMatrix::<f64>::identity(m, m) * data.lambda).abs().max();
    (relative(b, scale), relative(t, scale))
}

/// Worst relative error of the six ledger scalars against their closed forms.
pub fn ledger_error(data: &CurvatureData) -> f64 {
    let got = contraction_ledger(data).as_array();
    let rww = data.r_omega_omega();
    let scale = data.lambda.abs() + rww.abs();
    ledger_closed_forms(data.n)
        .iter()
        .zip(got)
        .map(|(f, g)| relative((f.eval(data.lambda, rww) - g).abs(), scale))
        .fold(0.0, f64::max)
}

/// Coefficient-wise mismatch between the assembled ledger and the closed
/// bracket (2−n)/2 Λ − ⅛⟨R(ω),ω⟩.
pub fn assembly_coefficient_error(n: usize) -> f64 {
    let forms = ledger_closed_forms(n);
    let lam = assemble_from_ledger(n, &forms.map(|f| f.lambda_coeff));
    let rww = assemble_from_ledger(n, &forms.map(|f| f.rww_coeff));
    (lam - closed_bracket(n, 1.0, 0.0)).abs().max((rww - closed_bracket(n, 0.0, 1.0)).abs())
}

/// Largest defect over the σ₂/K identities with `samples` random a.
/// Returns (σ₂ vanishing, K contractions).
pub fn sigma2_k_algebra(n: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let m = 2 * n;
    let mf = m as f64;
    let s2 = sigma2_tensor(n);
    let j = crate::calabi::complex_structure(n);
    let (p, q, a) = ledger_tensors(&j);
    let mut vanish = s2.trace_euc().abs().max().max(s2.bianchi_euc().abs().max());
    let mut contr: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let am = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
        let k = conformal_killing_quadratic(&am);
        let tr = am.trace();
        let scale = 1.0 + k.max_abs();
        vanish = vanish.max(s2.contract(&k).abs() / scale);
        contr = contr
            .max((q.contract(&k) - (2.0 - mf * mf - mf) / 2.0 * tr).abs() / scale)
            .max((a.contract(&k) - (mf + 2.0) / 2.0 * tr).abs() / scale)
            .max(p.contract(&k).abs() / scale);
    }
    if !vanish.is_finite() || !contr.is_finite() {
        return Err(GeomError::InvalidConfig("non-finite algebra defect".into()));
    }
    Ok((vanish, contr))
}

pub fn obstruction_suite(
    data: &CurvatureData,
    opts: &ObstructionOptions,
    tol: &ObstructionTolerances,
    expect: Option<Expectation>,
) -> Result<ObstructionSuite> {
    data.validate()?;
    let n = data.n;
    let mut checks = Vec::new();

    let (b, t) = gauge_residuals(data);
    checks.push(Check::at_most("gauge_bianchi_free", b, tol.gauge));
    checks.push(Check::at_most("gauge_position_trace", t, tol.gauge));

    checks.push(Check::at_most("ledger_closed_forms", ledger_error(data), tol.ledger));
    let ledger = contraction_ledger(data);
    let assembled = assemble_from_ledger(n, &ledger.as_array());
    let bracket = closed_bracket(n, data.lambda, data.r_omega_omega());
    let scale = data.lambda.abs() + data.r_omega_omega().abs();
    let assembly = relative((assembled - bracket).abs(), scale).max(assembly_coefficient_error(n));
    checks.push(Check::at_most("ledger_assembly", assembly, tol.ledger));
    checks.push(Check::at_most("cyclic_j_identity", relative(bianchi_cyclic_j_identity(data), scale), tol.ledger));

    let moments = moment_checks(2 * n, opts.nodes, opts.seed)?;
    let worst = moments.iter().map(|c| c.sigmas()).fold(0.0, f64::max);
    checks.push(Check::at_most("sphere_moments_sigmas", worst, tol.moment_sigmas));

    let (vanish, contr) = sigma2_k_algebra(n, opts.algebra_samples, opts.seed)?;
    checks.push(Check::at_most("sigma2_vanishing", vanish, tol.algebra));
    checks.push(Check::at_most("k_contractions", contr, tol.algebra));

    let closed = obstruction_lambda_closed(data)?;
    let oscale = obstruction_scale(data)?;
    let gh = obstruction_lambda_bruteforce(data, 1.0, Quadrature::GaussHermite)?;
    checks.push(Check::at_most(
        "bruteforce_gauss_hermite",
        relative((gh.value - closed.value).abs(), oscale),
        tol.bruteforce,
    ));
    let mc = obstruction_lambda_bruteforce(data, 1.0, Quadrature::MonteCarlo { nodes: opts.nodes, seed: opts.seed })?;
    let mag = mc.magnitude.unwrap_or(0.0);
    checks.push(Check::at_most(
        "bruteforce_monte_carlo",
        relative((mc.value - closed.value).abs(), mag),
        tol.bruteforce,
    ));

    let wall = classify_wall(data);
    let k = wall_to_lambda_constant(n)?;
    checks.push(Check::at_most(
        "wall_matches_closed_value",
        relative((closed.value - k * wall.value).abs(), oscale),
        tol.wall,
    ));

    match expect {
        None => {}
        Some(Expectation::Unobstructed) => {
            checks.push(Check::at_most(
                "expected_classification",
                (wall.classification != Classification::Unobstructed) as u8 as f64,
                0.0,
            ));
        }
        Some(Expectation::Obstructed) => {
            checks.push(Check::at_most(
                "expected_classification",
                (wall.classification != Classification::Obstructed) as u8 as f64,
                0.0,
            ));
        }
        Some(Expectation::KahlerEinstein { scalar }) => {
            let want = 4.0 * (n as f64 - 1.0) * scalar;
            let miss = if wall.classification == Classification::Obstructed {
                relative((wall.value - want).abs(), want.abs())
            } else {
                f64::INFINITY
            };
            checks.push(Check::at_most("expected_classification", miss, tol.wall));
        }
    }

    Ok(ObstructionSuite { checks, closed, gauss_hermite: gh, monte_carlo: mc, ledger, wall })
}

// -------------------------------------------------------------- indicial

#[derive(Debug, Clone, Serialize)]
pub struct IndicialSuite {
    pub rows: Vec<IndicialRow>,
    pub checks: Vec<Check>,
    pub coincidences: Vec<String>,
}

/// Pairs of branches that share an indicial quadratic.
const COINCIDENCES: [((OperatorKind, Branch), (OperatorKind, Branch)); 4] = [
    ((OperatorKind::P0, Branch::Single), (OperatorKind::P1, Branch::Normal)),
    ((OperatorKind::P0, Branch::Single), (OperatorKind::P, Branch::V2)),
    ((OperatorKind::P1, Branch::Tangential), (OperatorKind::P2, Branch::Mixed)),
    ((OperatorKind::P1, Branch::Tangential), (OperatorKind::P, Branch::V1)),
];

/// Root table for dimension m, optionally restricted to one operator.
pub fn indicial_suite(m: usize, only: Option<OperatorKind>) -> Result<IndicialSuite> {
    let rows: Vec<IndicialRow> =
        indicial_table(m)?.into_iter().filter(|r| only.is_none_or(|k| r.operator == k)).collect();
    let mf = m as f64;
    let mut checks = Vec::new();

    let sum = rows.iter().map(|r| (r.roots.delta_plus + r.roots.delta_minus - (mf - 1.0)).abs()).fold(0.0, f64::max);
    checks.push(Check::at_most("root_sum", sum, 1e-12));

    let at_roots =
        rows.iter().map(|r| r.limiting_residual_plus.abs().max(r.limiting_residual_minus.abs())).fold(0.0, f64::max);
    checks.push(Check::at_most("residual_at_roots", at_roots, 1e-10 * mf * mf));

    let mut off: f64 = f64::INFINITY;
    for r in &rows {
        for d in [r.roots.delta_plus + 0.5, r.roots.delta_minus - 0.5, 0.5 * (r.roots.delta_plus + r.roots.delta_minus)]
        {
            off = off.min(model_ode_residual(r.operator, r.branch, d, 1.0, m, OdeMode::Limiting)?.abs());
        }
    }
    checks.push(Check::at_least("residual_off_root_control", off, 0.1));

    let mut coincidences = Vec::new();
    if only.is_none() {
        let mut mismatches = 0.0;
        for ((k1, b1), (k2, b2)) in COINCIDENCES {
            if indicial_quadratic(k1, b1, m)? == indicial_quadratic(k2, b2, m)? {
                coincidences.push(format!("{} {} = {} {}", k1.name(), b1.name(), k2.name(), b2.name()));
            } else {
                mismatches += 1.0;
            }
        }
        for e in eigenbundle_constants(OperatorKind::P, m)? {
            if e.ode_constant as f64 != 2.0 * e.eigenvalue {
                mismatches += 1.0;
            }
        }
        checks.push(Check::at_most("coincidence_relations", mismatches, 0.0));
    }
    Ok(IndicialSuite { rows, checks, coincidences })
}

// ---------------------------------------------------------------- gluing

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlueTolerances {
    pub slope: f64,
    /// Allowed ratio of the flat-model residual to the finite-difference floor.
    pub noise_factor: f64,
}

impl Default for GlueTolerances {
    fn default() -> Self {
        GlueTolerances { slope: 0.25, noise_factor: 10.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GlueSuite {
    pub sweep: SweepReport,
    pub checks: Vec<Check>,
    /// Largest residual/floor ratio over the sweep.
    pub floor_ratio: f64,
}

/// Largest ratio of residual to its finite-difference floor over the sweep.
pub fn floor_ratio(sweep: &SweepReport) -> f64 {
    sweep.rows.iter().map(|r| r.sup_residual / r.noise_floor).fold(0.0, f64::max)
}

/// Sweep plus the slope check. For the flat model the predicted term
/// vanishes, so no slope check is emitted and the caller reports the model
/// as degenerate.
pub fn glue_suite(data: &CurvatureData, ts: &[f64], position: f64, tol: &GlueTolerances) -> Result<GlueSuite> {
    let sweep = residual_sweep(data, ts, position, true)?;
    let mut checks = Vec::new();
    if !sweep.flat_model {
        let err = sweep.slope_error().unwrap_or(f64::INFINITY);
        checks.push(Check::at_most("sweep_slope", err, tol.slope));
    }
    let floor_ratio = floor_ratio(&sweep);
    Ok(GlueSuite { sweep, checks, floor_ratio })
}

/// The flat-model check: residual within `noise_factor` of the floor.
pub fn flat_noise_check(suite: &GlueSuite, tol: &GlueTolerances) -> Check {
    Check::at_most("flat_noise_floor", suite.floor_ratio, tol.noise_factor)
}
