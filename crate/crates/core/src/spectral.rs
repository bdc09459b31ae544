//! Eigen-data of the collocation operator, the parabolic-branch
//! eigenfunction family, and the operator-level inducing identity.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::maps::{BranchId, MapSpec};
use crate::operator::{apply_qw, collocation_matrix, CollocationOperator};
use crate::potential::PotentialSpec;

/// Eigenvalues of the collocation matrix, descending in modulus.
pub fn spectrum(op: &CollocationOperator, top: usize) -> Result<Vec<Complex64>> {
    let dim = op.dim();
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        nalgebra::Complex::new(op.matrix[i][j].re, op.matrix[i][j].im)
    });
    let schur = m.schur();
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::NoConvergence {
            context: "dense Schur eigensolver".into(),
            lo: 0.0,
            hi: dim as f64,
        })?;
    let mut vals: Vec<Complex64> = eig.iter().map(|c| Complex64::new(c.re, c.im)).collect();
    vals.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    vals.truncate(top);
    Ok(vals)
}

/// Spectrum with a stability report from an `n + 6` comparison run.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    /// Per-eigenvalue movement between the two node counts.
    pub instability: Vec<f64>,
    pub n_nodes: usize,
    pub branch_cutoff: usize,
}

pub fn spectrum_with_stability(
    map: &MapSpec,
    pot: &PotentialSpec,
    z: Complex64,
    n_nodes: usize,
    branch_cutoff: usize,
    top: usize,
) -> Result<SpectrumReport> {
    let op = collocation_matrix(map, pot, z, n_nodes, branch_cutoff)?;
    let base = spectrum(&op, top)?;
    let op2 = collocation_matrix(map, pot, z, n_nodes + 6, branch_cutoff)?;
    let refined = spectrum(&op2, top)?;
    let instability = base
        .iter()
        .zip(&refined)
        .map(|(a, b)| (a - b).norm())
        .collect();
    Ok(SpectrumReport {
        eigenvalues: base,
        instability,
        n_nodes,
        branch_cutoff,
    })
}

/// The cubic-flat bump `(x - a)^3 (1 - x)^3`, normalized to unit maximum,
/// supported on `[a, 1]`: value and first two derivatives vanish at both
/// endpoints, as the eigenfunction construction requires.
#[derive(Debug, Clone)]
pub struct BumpFunction {
    a: f64,
    scale: f64,
}

impl BumpFunction {
    pub fn new(a: f64) -> Result<Self> {
        if !(0.0 < a && a < 1.0) {
            return Err(Error::Domain(format!("bump support point a = {a}")));
        }
        let half = 0.5 * (1.0 - a);
        Ok(BumpFunction {
            a,
            scale: 1.0 / half.powi(6),
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.a || x >= 1.0 {
            0.0
        } else {
            self.scale * (x - self.a).powi(3) * (1.0 - x).powi(3)
        }
    }
}

/// Evaluate the parabolic-branch eigenfunction `F_lambda` at `x`.
///
/// `F_lambda(x) = lambda^{tau(x)} h(T^{tau(x)} x)` with `h` a bump on
/// `[a, 1]`; each point receives the single term of its level, and
/// `F_lambda(psi_0 x) = lambda F_lambda(x)` holds identically.
pub fn l0_eigenfunction_at(
    map: &MapSpec,
    lambda: Complex64,
    bump: &dyn Fn(f64) -> f64,
    x: f64,
) -> Result<Complex64> {
    if x == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if !(0.0 < x && x < 1.0) {
        return Err(Error::Domain(format!("x = {x} outside (0,1)")));
    }
    // forward iterate the parabolic branch until entering (a, 1); this is
    // stable (the branch expands away from 0)
    let a = map.partition_point();
    let mut y = x;
    let mut tau = 0usize;
    while y < a {
        y = map.eval_branch(BranchId::Parabolic, y)?;
        tau += 1;
        if tau > 100_000_000 {
            return Err(Error::Domain(format!("first passage from {x} too deep")));
        }
    }
    if (y - a).abs() < 1e-13 {
        return Err(Error::Boundary(format!("x = {x} is on a marker orbit")));
    }
    Ok(lambda.powi(tau as i32) * bump(y))
}

/// Samples of `F_lambda` on a grid.
pub fn l0_eigenfunction(
    map: &MapSpec,
    lambda: Complex64,
    bump: &dyn Fn(f64) -> f64,
    grid: &[f64],
) -> Result<Vec<Complex64>> {
    grid.iter()
        .map(|&x| l0_eigenfunction_at(map, lambda, bump, x))
        .collect()
}

/// Supremum of `|F_lambda(psi_0 x) - lambda F_lambda(x)|` over the grid:
/// the functional-equation residual of the eigenfunction family.
pub fn l0_functional_residual(
    map: &MapSpec,
    lambda: Complex64,
    bump: &dyn Fn(f64) -> f64,
    grid: &[f64],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &x in grid {
        let fx = l0_eigenfunction_at(map, lambda, bump, x)?;
        let x0 = map.inverse_branch(BranchId::Parabolic, x, crate::induced::WALK_TOL)?;
        let f0 = l0_eigenfunction_at(map, lambda, bump, x0)?;
        worst = worst.max((f0 - lambda * fx).norm());
    }
    Ok(worst)
}

/// Max-residual of the operator inducing identity
/// `(1 - Q_w(z)) (1 - z L_{0,v}) f = (1 - z L_v) f` over the grid.
pub fn inducing_identity_residual(
    map: &MapSpec,
    pot: &PotentialSpec,
    z: Complex64,
    f: &(dyn Fn(f64) -> f64 + Sync),
    grid: &[f64],
    branch_cutoff: usize,
) -> Result<f64> {
    let tol = crate::induced::WALK_TOL;
    // (1 - z L_{0,v}) f
    let g = |x: f64| -> Complex64 {
        let x0 = map
            .inverse_branch(BranchId::Parabolic, x, tol)
            .expect("psi_0 on [0,1]");
        let v0 = pot
            .value(map, BranchId::Parabolic, x0)
            .expect("potential on closed branch");
        Complex64::new(f(x), 0.0) - z * v0.exp() * f(x0)
    };
    let mut worst = 0.0f64;
    for &x in grid {
        let qg = apply_qw(map, pot, z, g, x, branch_cutoff)?;
        let lhs = g(x) - qg.value;
        let x0 = map.inverse_branch(BranchId::Parabolic, x, tol)?;
        let x1 = map.inverse_branch(BranchId::Expanding, x, tol)?;
        let v0 = pot.value(map, BranchId::Parabolic, x0)?;
        let v1 = pot.value(map, BranchId::Expanding, x1)?;
        let rhs = Complex64::new(f(x), 0.0) - z * (v0.exp() * f(x0) + v1.exp() * f(x1));
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}
