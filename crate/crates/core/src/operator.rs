//! Direct application and collocation discretization of the weighted
//! transfer operator of the induced map.
//!
//! `(Q_w(z) f)(x) = sum_n z^n e^{w(phi_n(x))} f(phi_n(x))` is evaluated by
//! walking branches until the geometric envelope dies out. On the critical
//! line (`|z| e^{v(0)}` close to 1, e.g. the Perron–Frobenius potential at
//! z = 1) the branch weights decay only polynomially; the discarded
//! branches are then completed by power-law tail models paired with a
//! second-order expansion of the integrand around the parabolic point,
//! which for the collocation matrix is a rank-three correction through the
//! differentiation matrix at the node x = 0.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cheb;
use crate::error::{Error, Result};
use crate::induced::LevelWalk;
use crate::maps::MapSpec;
use crate::potential::PotentialSpec;
use crate::tails::{KahanComplex, ShellModel};

/// Hard cap applied when a caller requests an enormous branch cutoff.
pub const MAX_BRANCH_CUTOFF: usize = 2_000_000;

/// Result of a branch-summed operator application.
#[derive(Debug, Clone)]
pub struct ApplyResult {
    pub value: Complex64,
    /// Uncertainty of the modeled branch tail (absolute).
    pub tail: f64,
    /// Branches actually computed.
    pub branches_used: usize,
}

/// Apply `Q_w(z)` to a scalar function given as a closure.
///
/// The tail beyond the computed branches is completed through a power-law
/// model of the weights combined with `f` frozen at its value near 0
/// (first-order); adequate when the geometric envelope has not died out
/// only marginally.
pub fn apply_qw<F>(
    map: &MapSpec,
    pot: &PotentialSpec,
    z: Complex64,
    f: F,
    x: f64,
    branch_cutoff: usize,
) -> Result<ApplyResult>
where
    F: Fn(f64) -> Complex64,
{
    let cutoff = branch_cutoff.clamp(8, MAX_BRANCH_CUTOFF);
    let mut walk = LevelWalk::start(map, Some(pot), x)?;
    let mut acc = KahanComplex::default();
    let mut zpow = z;
    let mut mag = 0.0f64;
    let mut small_streak = 0usize;
    let mut weights = Vec::new();
    let mut positions = Vec::new();
    let mut used = cutoff;
    for n in 1..=cutoff {
        if n > 1 {
            walk.advance()?;
            zpow *= z;
        }
        let u = walk.weight().exp();
        let p = walk.point();
        weights.push(u);
        positions.push(p);
        let term = zpow * u * f(p);
        acc.add(term);
        mag += term.norm();
        if zpow.norm() * u < 1e-18 * (1.0 + mag) {
            small_streak += 1;
            if small_streak >= 3 {
                used = n;
                break;
            }
        } else {
            small_streak = 0;
        }
    }
    if used == cutoff && weights.len() == cutoff {
        // tail completion: model u_n and u_n * p_n
        let window = (cutoff / 2).max(8).min(cutoff - 1);
        let w0: Vec<f64> = weights[cutoff - window..].to_vec();
        let w1: Vec<f64> = weights[cutoff - window..]
            .iter()
            .zip(&positions[cutoff - window..])
            .map(|(u, p)| u * p)
            .collect();
        let f0 = f(0.0);
        let f_eps = f(1e-6);
        let fd0 = (f_eps - f0) * 1e6;
        let mut tail_val = Complex64::new(0.0, 0.0);
        let mut tail_unc = 0.0;
        if let Some(m0) = ShellModel::fit(&w0, cutoff - window + 1, window) {
            let (s0, u0) = m0.tail_sum(z);
            tail_val += s0 * f0;
            tail_unc += u0 * f0.norm();
        }
        if let Some(m1) = ShellModel::fit(&w1, cutoff - window + 1, window) {
            let (s1, u1) = m1.tail_sum(z);
            tail_val += s1 * fd0;
            tail_unc += u1 * fd0.norm() + s1.norm() * fd0.norm() * 0.5;
        }
        return Ok(ApplyResult {
            value: acc.value() + tail_val,
            tail: tail_unc,
            branches_used: used,
        });
    }
    Ok(ApplyResult {
        value: acc.value(),
        tail: zpow.norm() * weights.last().copied().unwrap_or(0.0),
        branches_used: used,
    })
}

/// Collocation discretization of `Q_w(z)` on Chebyshev–Lobatto nodes.
#[derive(Debug, Clone)]
pub struct CollocationOperator {
    /// Ascending nodes in `[0,1]`; `nodes[0] = 0`.
    pub nodes: Vec<f64>,
    /// Barycentric weights of the nodes.
    pub bary: Vec<f64>,
    /// Dense matrix `M[i][j] ~ (Q L_j)(x_i)`, row-major.
    pub matrix: Vec<Vec<Complex64>>,
    pub z: Complex64,
    pub branch_cutoff: usize,
    /// Largest per-row tail uncertainty (absolute).
    pub tail_bound: f64,
    /// Set when a tail model was non-monotone or out of its regime.
    pub flagged: bool,
}

impl CollocationOperator {
    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// Apply the matrix to node samples.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.matrix
            .iter()
            .map(|row| {
                let mut acc = KahanComplex::default();
                for (m, x) in row.iter().zip(v) {
                    acc.add(m * x);
                }
                acc.value()
            })
            .collect()
    }
}

/// Assemble the collocation matrix with branch-tail completion.
pub fn collocation_matrix(
    map: &MapSpec,
    pot: &PotentialSpec,
    z: Complex64,
    n_nodes: usize,
    branch_cutoff: usize,
) -> Result<CollocationOperator> {
    if n_nodes < 1 {
        return Err(Error::Domain("need at least one node interval".into()));
    }
    let cutoff = branch_cutoff.clamp(16, MAX_BRANCH_CUTOFF);
    let n = n_nodes; // polynomial degree; n+1 nodes
    let nodes = cheb::lobatto_nodes(n);
    let bary = cheb::lobatto_weights(n);
    let d1 = cheb::diff_matrix(&nodes, &bary);
    let d2 = cheb::mat_mul(&d1, &d1);

    let rows: Result<Vec<(Vec<Complex64>, f64, bool)>> = nodes
        .par_iter()
        .map(|&xi| assemble_row(map, pot, z, xi, cutoff, &nodes, &bary, &d1, &d2))
        .collect();
    let rows = rows?;
    let tail_bound = rows.iter().map(|r| r.1).fold(0.0f64, f64::max);
    let flagged = rows.iter().any(|r| r.2);
    Ok(CollocationOperator {
        nodes,
        bary,
        matrix: rows.into_iter().map(|r| r.0).collect(),
        z,
        branch_cutoff: cutoff,
        tail_bound,
        flagged,
    })
}

#[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
fn assemble_row(
    map: &MapSpec,
    pot: &PotentialSpec,
    z: Complex64,
    xi: f64,
    cutoff: usize,
    nodes: &[f64],
    bary: &[f64],
    d1: &[Vec<f64>],
    d2: &[Vec<f64>],
) -> Result<(Vec<Complex64>, f64, bool)> {
    let dim = nodes.len();
    let mut row = vec![Complex64::new(0.0, 0.0); dim];
    let mut cardinal = vec![0.0f64; dim];
    let mut walk = LevelWalk::start(map, Some(pot), xi)?;
    let mut zpow = z;
    let mut mag = 0.0f64;
    let mut small_streak = 0usize;
    let mut weights = Vec::with_capacity(cutoff.min(1 << 16));
    let mut positions = Vec::with_capacity(cutoff.min(1 << 16));
    let mut truncated_geometrically = false;
    let mut used = cutoff;
    for level in 1..=cutoff {
        if level > 1 {
            walk.advance()?;
            zpow *= z;
        }
        let u = walk.weight().exp();
        let p = walk.point();
        weights.push(u);
        positions.push(p);
        cheb::cardinal_row(nodes, bary, p, &mut cardinal);
        let zu = zpow * u;
        for (r, &c) in row.iter_mut().zip(cardinal.iter()) {
            *r += zu * c;
        }
        mag += zu.norm();
        if zu.norm() < 1e-18 * (1.0 + mag) {
            small_streak += 1;
            if small_streak >= 3 {
                truncated_geometrically = true;
                used = level;
                break;
            }
        } else {
            small_streak = 0;
        }
    }
    if truncated_geometrically || used < 24 {
        return Ok((row, 0.0, false));
    }
    // power-law completion: sum_{n > cutoff} z^n u_n L_j(p_n), with the
    // cardinal value expanded to second order around the parabolic point
    let window = (used / 2).max(12).min(used - 1);
    let first_t = used - window + 1;
    let mut unc = 0.0f64;
    let mut flagged = false;
    let factorial = [1.0, 1.0, 2.0];
    for r in 0..3usize {
        let series: Vec<f64> = weights[used - window..]
            .iter()
            .zip(&positions[used - window..])
            .map(|(u, p)| u * p.powi(r as i32))
            .collect();
        let model = match ShellModel::fit(&series, first_t, window) {
            Some(m) => m,
            None => continue,
        };
        let (s_r, u_r) = model.tail_sum(z);
        flagged |= model.flagged || !u_r.is_finite();
        if !u_r.is_finite() {
            continue;
        }
        // derivative of the cardinal basis at the node x = 0 (index 0)
        let mut corr_scale = 0.0f64;
        for j in 0..dim {
            let lr0 = match r {
                0 => {
                    if j == 0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                1 => d1[0][j],
                _ => d2[0][j],
            };
            row[j] += s_r * (lr0 / factorial[r]);
            corr_scale = corr_scale.max(lr0.abs() / factorial[r]);
        }
        unc += u_r * corr_scale;
    }
    Ok((row, unc, flagged))
}

/// Supremum of `(Q_{w}(|z|)^m 1)` over a fine grid, with tail diagnostics:
/// the word-sum quantity controlling growth and the leading eigenvalue.
pub fn positive_power_sup(
    map: &MapSpec,
    pot: &PotentialSpec,
    z_abs: f64,
    m: usize,
    n_nodes: usize,
    branch_cutoff: usize,
    fine_grid: usize,
) -> Result<(f64, f64)> {
    if z_abs < 0.0 {
        return Err(Error::Domain("lambda estimates use |z| >= 0".into()));
    }
    if z_abs == 0.0 {
        return Ok((0.0, 0.0));
    }
    let op = collocation_matrix(map, pot, Complex64::new(z_abs, 0.0), n_nodes, branch_cutoff)?;
    let dim = op.dim();
    let mut v = vec![Complex64::new(1.0, 0.0); dim];
    for _ in 0..m {
        v = op.apply(&v);
    }
    let samples: Vec<f64> = v.iter().map(|c| c.re).collect();
    let mut sup = 0.0f64;
    for i in 0..=fine_grid {
        let y = i as f64 / fine_grid as f64;
        let val = cheb::interpolate(&op.nodes, &op.bary, &samples, y);
        sup = sup.max(val);
    }
    // tail uncertainty accumulates roughly linearly over applications
    let tail = m as f64 * op.tail_bound * sup.max(1.0);
    Ok((sup, tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_potential_geometric_closed_form() {
        // (Q 1)(x) = sum z^n e^{n v0} = z e^{v0} / (1 - z e^{v0})
        let map = MapSpec::farey();
        let pot = PotentialSpec::constant(-1.0);
        let z = Complex64::new(0.5, 0.2);
        let ze = z * (-1.0f64).exp();
        let expect = ze / (Complex64::new(1.0, 0.0) - ze);
        let got = apply_qw(&map, &pot, z, |_| Complex64::new(1.0, 0.0), 0.37, 4000).unwrap();
        assert!((got.value - expect).norm() < 1e-12);
    }

    #[test]
    fn collocation_applied_to_ones_matches_direct_apply() {
        let map = MapSpec::farey();
        let pot = PotentialSpec::log_deriv(1.0);
        let z = Complex64::new(0.6, 0.0);
        let op = collocation_matrix(&map, &pot, z, 24, 4000).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); op.dim()];
        let applied = op.apply(&ones);
        for (i, &xi) in op.nodes.iter().enumerate() {
            let direct = apply_qw(&map, &pot, z, |_| Complex64::new(1.0, 0.0), xi, 60_000).unwrap();
            assert!(
                (applied[i] - direct.value).norm() < 1e-10,
                "node {xi}: {} vs {}",
                applied[i],
                direct.value
            );
        }
    }

    #[test]
    fn gauss_invariant_density_is_reproduced() {
        // density 1/((1+x) ln 2) is fixed by the Perron-Frobenius operator
        let map = MapSpec::farey();
        let pot = PotentialSpec::log_deriv(1.0);
        let op = collocation_matrix(&map, &pot, Complex64::new(1.0, 0.0), 30, 20_000).unwrap();
        let dens: Vec<Complex64> = op
            .nodes
            .iter()
            .map(|&x| Complex64::new(1.0 / ((1.0 + x) * 2f64.ln()), 0.0))
            .collect();
        let out = op.apply(&dens);
        for (i, (&d, o)) in dens.iter().zip(&out).enumerate() {
            assert!(
                (o - d).norm() < 1e-8,
                "node {i}: {} vs {}",
                o,
                d
            );
        }
    }

    #[test]
    fn lambda_constant_potential_closed_form() {
        // Lambda_m = (|z| e^{v0} / (1 - |z| e^{v0}))^m for constant v0
        let map = MapSpec::farey();
        let pot = PotentialSpec::constant(-1.0);
        let zabs = 0.8;
        let geo = zabs * (-1.0f64).exp();
        let expect = (geo / (1.0 - geo)).powi(3);
        let (got, _) = positive_power_sup(&map, &pot, zabs, 3, 24, 4000, 200).unwrap();
        assert_relative_eq!(got, expect, max_relative = 1e-9);
    }
}
