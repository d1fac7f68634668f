//! Indicial roots of P₀, P₁, P₂ and P on asymptotically hyperbolic space.
//!
//! Every branch reduces, for radial profiles e^{−δr}, to the quadratic
//! −δ² + (m−1)δ + c = 0 with an integer constant c. Roots are taken from
//! these exact coefficients. The radial ODE residual is a cross-check.
//!
//! Branch pairing for P₁: the tangential branch carries c = m (roots m, −1)
//! and the normal branch c = 2(m−1).

use serde::Serialize;

use crate::error::{GeomError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum OperatorKind {
    P0,
    P1,
    P2,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    Single,
    Tangential,
    Normal,
    Mixed,
    V0,
    V1,
    V2,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 4] = [OperatorKind::P0, OperatorKind::P1, OperatorKind::P2, OperatorKind::P];

    pub fn branches(self) -> &'static [Branch] {
        match self {
            OperatorKind::P0 => &[Branch::Single],
            OperatorKind::P1 => &[Branch::Tangential, Branch::Normal],
            OperatorKind::P2 => &[Branch::Tangential, Branch::Mixed],
            OperatorKind::P => &[Branch::V0, Branch::V1, Branch::V2],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::P0 => "P0",
            OperatorKind::P1 => "P1",
            OperatorKind::P2 => "P2",
            OperatorKind::P => "P",
        }
    }
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Single => "single",
            Branch::Tangential => "tangential",
            Branch::Normal => "normal",
            Branch::Mixed => "mixed",
            Branch::V0 => "V0",
            Branch::V1 => "V1",
            Branch::V2 => "V2",
        }
    }
}

/// Coefficients of a·δ² + b·δ + c = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Quadratic {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Quadratic {
    pub fn eval(&self, d: f64) -> f64 {
        self.a as f64 * d * d + self.b as f64 * d + self.c as f64
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootPair {
    pub delta_plus: f64,
    pub delta_minus: f64,
}

fn check_m(m: usize) -> Result<()> {
    if m < 3 {
        return Err(GeomError::DimensionTooSmall(m));
    }
    Ok(())
}

fn invalid(kind: OperatorKind, branch: Branch) -> GeomError {
    GeomError::InvalidBranch { operator: kind.name().into(), branch: branch.name().into() }
}

/// The constant c of the indicial quadratic for a kind/branch.
pub fn ode_constant(kind: OperatorKind, branch: Branch, m: usize) -> Result<i64> {
    check_m(m)?;
    let m = m as i64;
    use Branch::*;
    use OperatorKind::*;
    match (kind, branch) {
        (P0, Single) | (P1, Normal) | (P, V2) => Ok(2 * (m - 1)),
        (P1, Tangential) | (P2, Mixed) | (P, V1) => Ok(m),
        (P2, Tangential) => Ok(4),
        (P, V0) => Ok(0),
        _ => Err(invalid(kind, branch)),
    }
}

/// −δ² + (m−1)δ + c.
pub fn indicial_quadratic(kind: OperatorKind, branch: Branch, m: usize) -> Result<Quadratic> {
    let c = ode_constant(kind, branch, m)?;
    Ok(Quadratic { a: -1, b: m as i64 - 1, c })
}

pub fn indicial_roots(kind: OperatorKind, branch: Branch, m: usize) -> Result<RootPair> {
    let q = indicial_quadratic(kind, branch, m)?;
    let disc = q.discriminant();
    // disc ≥ (m−1)² > 0 since c ≥ 0.
    let sq = (disc as f64).sqrt();
    let isq = (disc as f64).sqrt().round() as i64;
    let b = q.b as f64;
    // Exact when the discriminant is a perfect square.
    let (plus, minus) = if isq * isq == disc {
        ((q.b + isq) as f64 / 2.0, (q.b - isq) as f64 / 2.0)
    } else {
        ((b + sq) / 2.0, (b - sq) / 2.0)
    };
    Ok(RootPair { delta_plus: plus, delta_minus: minus })
}

/// Eigenvalue of the zeroth-order part on a boundary eigenbundle and the
/// resulting ODE constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenbundleConstant {
    pub branch: Branch,
    pub eigenvalue: f64,
    pub ode_constant: i64,
}

/// For P the zeroth-order operator has eigenvalues 0, m/2, m−1 on V0, V1, V2
/// and P carries a factor ½ in front of its Laplacian, so c = 2μ. For the
/// other kinds the eigenvalue is reported as the constant itself.
pub fn eigenbundle_constants(kind: OperatorKind, m: usize) -> Result<Vec<EigenbundleConstant>> {
    check_m(m)?;
    let mf = m as f64;
    kind.branches()
        .iter()
        .map(|&b| {
            let c = ode_constant(kind, b, m)?;
            let eigenvalue = match (kind, b) {
                (OperatorKind::P, Branch::V0) => 0.0,
                (OperatorKind::P, Branch::V1) => mf / 2.0,
                (OperatorKind::P, Branch::V2) => mf - 1.0,
                _ => c as f64,
            };
            Ok(EigenbundleConstant { branch: b, eigenvalue, ode_constant: c })
        })
        .collect()
}

/// f'' + (m−1) coth(r) f' by a five-point stencil.
pub fn hyperbolic_radial_laplacian(f: impl Fn(f64) -> f64, r: f64, m: usize) -> Result<f64> {
    if !(r > 0.0) {
        return Err(GeomError::NonPositiveRadius(r));
    }
    let h = 1e-3 * r.min(1.0);
    let f2 = f(r + 2.0 * h);
    let f1 = f(r + h);
    let f0 = f(r);
    let fm1 = f(r - h);
    let fm2 = f(r - 2.0 * h);
    let d1 = (-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / (12.0 * h);
    let d2 = (-f2 + 16.0 * f1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
    Ok(d2 + (m as f64 - 1.0) / r.tanh() * d1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OdeMode {
    /// coth(r) replaced by 1.
    Limiting,
    /// The exact radial operator.
    ExactCoth,
}

/// Residual of f = e^{−δr} in the radial ODE, divided by f:
/// −δ² + (m−1)δ·k(r) + c with k = 1 (limiting) or coth r (exact).
pub fn model_ode_residual(
    kind: OperatorKind,
    branch: Branch,
    delta: f64,
    r: f64,
    m: usize,
    mode: OdeMode,
) -> Result<f64> {
    let c = ode_constant(kind, branch, m)? as f64;
    if !(r > 0.0) {
        return Err(GeomError::NonPositiveRadius(r));
    }
    let k = match mode {
        OdeMode::Limiting => 1.0,
        OdeMode::ExactCoth => 1.0 / r.tanh(),
    };
    Ok(-delta * delta + (m as f64 - 1.0) * delta * k + c)
}

/// One row of the indicial table.
#[derive(Debug, Clone, Serialize)]
pub struct IndicialRow {
    pub operator: OperatorKind,
    pub branch: Branch,
    pub m: usize,
    pub quadratic: Quadratic,
    pub roots: RootPair,
    pub limiting_residual_plus: f64,
    pub limiting_residual_minus: f64,
}

pub fn indicial_table(m: usize) -> Result<Vec<IndicialRow>> {
    let mut rows = Vec::new();
    for kind in OperatorKind::ALL {
        for &b in kind.branches() {
            let roots = indicial_roots(kind, b, m)?;
            rows.push(IndicialRow {
                operator: kind,
                branch: b,
                m,
                quadratic: indicial_quadratic(kind, b, m)?,
                roots,
                limiting_residual_plus: model_ode_residual(kind, b, roots.delta_plus, 1.0, m, OdeMode::Limiting)?,
                limiting_residual_minus: model_ode_residual(kind, b, roots.delta_minus, 1.0, m, OdeMode::Limiting)?,
            });
        }
    }
    Ok(rows)
}
