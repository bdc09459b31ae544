//! Parabolic full-branch interval maps and their local inverses.
//!
//! A map here has two monotone branches over the partition `(0,a) | (a,1)`,
//! full images, an indifferent fixed point at 0 with `T'(x) - 1 ~ c x^alpha`,
//! and uniform expansion away from a neighbourhood of the origin. Built-in
//! families: Farey, Liverani–Saussol–Vaienti, Pomeau–Manneville; arbitrary
//! branch pairs can be supplied as closures returning jets.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::solve::{monotone_root, monotone_root_seeded};

/// Which branch of the map: 0 carries the indifferent fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchId {
    /// Branch on `(0, a)`, fixing 0 with derivative 1.
    Parabolic,
    /// Branch on `(a, 1)`, uniformly expanding.
    Expanding,
}

impl BranchId {
    pub fn index(self) -> usize {
        match self {
            BranchId::Parabolic => 0,
            BranchId::Expanding => 1,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(BranchId::Parabolic),
            1 => Ok(BranchId::Expanding),
            _ => Err(Error::Domain(format!("branch id {i} not in {{0,1}}"))),
        }
    }
}

/// Branch evaluator for user-supplied maps: `(x, order) -> jet of T_i at x`.
pub type BranchFn = Arc<dyn Fn(f64, usize) -> Result<Jet> + Send + Sync>;

#[derive(Clone)]
pub enum MapFamily {
    Farey,
    Lsv { alpha: f64 },
    PomeauManneville { alpha: f64 },
    Custom { t0: BranchFn, t1: BranchFn },
}

impl fmt::Debug for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapFamily::Farey => write!(f, "Farey"),
            MapFamily::Lsv { alpha } => write!(f, "Lsv {{ alpha: {alpha} }}"),
            MapFamily::PomeauManneville { alpha } => {
                write!(f, "PomeauManneville {{ alpha: {alpha} }}")
            }
            MapFamily::Custom { .. } => write!(f, "Custom {{ .. }}"),
        }
    }
}

/// Declared smoothness class of the branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothness {
    Finite(usize),
    Infinite,
}

impl Smoothness {
    pub fn allows(self, order: usize) -> bool {
        match self {
            Smoothness::Finite(r) => order < r,
            Smoothness::Infinite => true,
        }
    }
}

/// A parabolic full-branch map with its analytic metadata.
///
/// Immutable after construction; cheap to clone and safe to share across
/// worker threads.
#[derive(Debug, Clone)]
pub struct MapSpec {
    family: MapFamily,
    alpha: f64,
    a: f64,
    rho: f64,
    epsilon: f64,
    smoothness: Smoothness,
}

impl MapSpec {
    /// The Farey map: `x/(1-x)` and `(1-x)/x` over the partition at `1/2`.
    ///
    /// The expansion bound degenerates at the right endpoint (|T'(1)| = 1),
    /// so the declared `rho` is a grid-level bound valid away from 1; the
    /// induced map restores uniform expansion at word length 2.
    pub fn farey() -> Self {
        MapSpec {
            family: MapFamily::Farey,
            alpha: 1.0,
            a: 0.5,
            rho: 1.01,
            epsilon: 0.25,
            smoothness: Smoothness::Infinite,
        }
    }

    /// Liverani–Saussol–Vaienti map `x(1 + 2^alpha x^alpha)` / `2x - 1`.
    pub fn lsv(alpha: f64) -> Result<Self> {
        if alpha <= 0.0 {
            return Err(Error::Config(format!("lsv alpha must be positive, got {alpha}")));
        }
        let rho = 1.5;
        let epsilon = ((rho - 1.0) / (2f64.powf(alpha) * (1.0 + alpha))).powf(1.0 / alpha);
        Ok(MapSpec {
            family: MapFamily::Lsv { alpha },
            alpha,
            a: 0.5,
            rho,
            epsilon: epsilon.min(0.49),
            smoothness: Smoothness::Infinite,
        })
    }

    /// Pomeau–Manneville map `x + x^{1+alpha} (mod 1)`.
    ///
    /// The partition point solves `a + a^{1+alpha} = 1`, computed once at
    /// construction by bracketing to 1e-15.
    pub fn pomeau_manneville(alpha: f64) -> Result<Self> {
        if alpha <= 0.0 {
            return Err(Error::Config(format!("pm alpha must be positive, got {alpha}")));
        }
        let a = monotone_root(
            |x| (x + x.powf(1.0 + alpha), 1.0 + (1.0 + alpha) * x.powf(alpha)),
            0.0,
            1.0,
            1.0,
            1e-15,
        )?;
        let rho = 1.5;
        let epsilon = ((rho - 1.0) / (1.0 + alpha)).powf(1.0 / alpha);
        Ok(MapSpec {
            family: MapFamily::PomeauManneville { alpha },
            alpha,
            a,
            rho,
            epsilon: epsilon.min(0.98 * a),
            smoothness: Smoothness::Infinite,
        })
    }

    /// A map supplied as a pair of branch jets with declared metadata.
    ///
    /// No symbolic validation of the standing assumptions is attempted
    /// beyond the numeric invariant suite.
    pub fn custom(
        t0: BranchFn,
        t1: BranchFn,
        alpha: f64,
        a: f64,
        rho: f64,
        epsilon: f64,
        smoothness: Smoothness,
    ) -> Result<Self> {
        if !(0.0 < a && a < 1.0) || rho <= 1.0 || !(0.0 < epsilon && epsilon < a) || alpha <= 0.0 {
            return Err(Error::Config(
                "custom map needs 0<a<1, rho>1, 0<epsilon<a, alpha>0".into(),
            ));
        }
        Ok(MapSpec {
            family: MapFamily::Custom { t0, t1 },
            alpha,
            a,
            rho,
            epsilon,
            smoothness,
        })
    }

    pub fn family(&self) -> &MapFamily {
        &self.family
    }

    /// Partition point `a`.
    pub fn partition_point(&self) -> f64 {
        self.a
    }

    /// Parabolic exponent `alpha`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Declared expansion lower bound on `[epsilon, a) ∪ (a, 1)`.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Left edge of the region where the expansion bound is declared.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    fn branch_domain(&self, branch: BranchId) -> (f64, f64) {
        match branch {
            BranchId::Parabolic => (0.0, self.a),
            BranchId::Expanding => (self.a, 1.0),
        }
    }

    /// `T(x)` with the branch that contains `x`.
    ///
    /// The partition point itself is a domain error; the closed branch
    /// extensions are reachable through [`MapSpec::eval_branch`].
    pub fn eval(&self, x: f64) -> Result<(f64, BranchId)> {
        if !(0.0 < x && x < 1.0) {
            return Err(Error::Domain(format!("x = {x} outside (0,1)")));
        }
        if x == self.a {
            return Err(Error::Domain(format!("x = partition point {}", self.a)));
        }
        let branch = if x < self.a {
            BranchId::Parabolic
        } else {
            BranchId::Expanding
        };
        Ok((self.eval_branch(branch, x)?, branch))
    }

    /// Branch value on the closed extension of its domain.
    pub fn eval_branch(&self, branch: BranchId, x: f64) -> Result<f64> {
        Ok(self.branch_jet(branch, x, 0)?.value())
    }

    /// Jet of `T_branch` at `x` (closed branch domains allowed).
    pub fn branch_jet(&self, branch: BranchId, x: f64, order: usize) -> Result<Jet> {
        let (lo, hi) = self.branch_domain(branch);
        if !(lo..=hi).contains(&x) {
            return Err(Error::Domain(format!(
                "x = {x} outside branch domain [{lo}, {hi}]"
            )));
        }
        if !self.smoothness.allows(order) {
            let available = match self.smoothness {
                Smoothness::Finite(r) => r,
                Smoothness::Infinite => usize::MAX,
            };
            return Err(Error::UnsupportedOrder {
                requested: order,
                available,
            });
        }
        match &self.family {
            MapFamily::Farey => {
                let v = Jet::variable(x, order);
                Ok(match branch {
                    // x/(1-x) on [0, 1/2]
                    BranchId::Parabolic => v.div(&Jet::constant(1.0, order).sub(&v)),
                    // (1-x)/x on [1/2, 1]
                    BranchId::Expanding => Jet::constant(1.0, order).sub(&v).div(&v),
                })
            }
            MapFamily::Lsv { alpha } => match branch {
                BranchId::Parabolic => {
                    power_term_jet(x, *alpha, 2f64.powf(*alpha), order).map_err(|e| match e {
                        Error::UnsupportedOrder { requested, .. } => Error::UnsupportedOrder {
                            requested,
                            available: alpha.floor() as usize + 1,
                        },
                        other => other,
                    })
                }
                BranchId::Expanding => {
                    let v = Jet::variable(x, order);
                    Ok(v.scale(2.0).add_scalar(-1.0))
                }
            },
            MapFamily::PomeauManneville { alpha } => {
                let base = power_term_jet(x, *alpha, 1.0, order)?;
                Ok(match branch {
                    BranchId::Parabolic => base,
                    BranchId::Expanding => base.add_scalar(-1.0),
                })
            }
            MapFamily::Custom { t0, t1 } => match branch {
                BranchId::Parabolic => t0(x, order),
                BranchId::Expanding => t1(x, order),
            },
        }
    }

    /// Branch value and first derivative without jet allocation.
    ///
    /// This is the hot path for backward-orbit walks; the built-in
    /// families use closed forms.
    #[inline]
    pub fn branch_value_deriv(&self, branch: BranchId, x: f64) -> Result<(f64, f64)> {
        match &self.family {
            MapFamily::Farey => Ok(match branch {
                BranchId::Parabolic => {
                    let d = 1.0 - x;
                    (x / d, 1.0 / (d * d))
                }
                BranchId::Expanding => ((1.0 - x) / x, -1.0 / (x * x)),
            }),
            MapFamily::Lsv { alpha } => Ok(match branch {
                BranchId::Parabolic => {
                    let c = 2f64.powf(*alpha);
                    let xa = x.powf(*alpha);
                    (x * (1.0 + c * xa), 1.0 + c * (1.0 + alpha) * xa)
                }
                BranchId::Expanding => (2.0 * x - 1.0, 2.0),
            }),
            MapFamily::PomeauManneville { alpha } => {
                let xa = x.powf(*alpha);
                let v = x + x * xa;
                let d = 1.0 + (1.0 + alpha) * xa;
                Ok(match branch {
                    BranchId::Parabolic => (v, d),
                    BranchId::Expanding => (v - 1.0, d),
                })
            }
            MapFamily::Custom { .. } => {
                let j = self.branch_jet(branch, x, 1)?;
                Ok((j.value(), j.deriv(1)))
            }
        }
    }

    /// Local inverse `psi_branch(y)` with residual tolerance `tol`.
    ///
    /// Closed-form inverses are used where the family provides one;
    /// otherwise safeguarded bracketing with Newton polish.
    pub fn inverse_branch(&self, branch: BranchId, y: f64, tol: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::Domain(format!("y = {y} outside [0,1]")));
        }
        match (&self.family, branch) {
            (MapFamily::Farey, BranchId::Parabolic) => Ok(y / (1.0 + y)),
            (MapFamily::Farey, BranchId::Expanding) => Ok(1.0 / (1.0 + y)),
            (MapFamily::Lsv { .. }, BranchId::Expanding) => Ok(0.5 * (y + 1.0)),
            _ => {
                let (lo, hi) = self.branch_domain(branch);
                monotone_root(
                    |x| {
                        self.branch_value_deriv(branch, x)
                            .expect("value inside branch domain")
                    },
                    lo,
                    hi,
                    y,
                    tol,
                )
            }
        }
    }

    /// Inverse branch value and derivative `(psi(y), psi'(y))`.
    #[inline]
    pub fn inverse_value_deriv(&self, branch: BranchId, y: f64, tol: f64) -> Result<(f64, f64)> {
        let x = self.inverse_branch(branch, y, tol)?;
        let (_, dt) = self.branch_value_deriv(branch, x)?;
        Ok((x, 1.0 / dt))
    }

    /// Jet of the local inverse `psi_branch` at `y`.
    pub fn inverse_branch_jet(&self, branch: BranchId, y: f64, order: usize, tol: f64) -> Result<Jet> {
        let x = self.inverse_branch(branch, y, tol)?;
        let forward = self.branch_jet(branch, x, order)?;
        Ok(forward.invert(x))
    }

    /// Markers `a_0 = 1, a_1 = a, a_l = psi_0(a_{l-1})`, length `levels + 1`.
    pub fn markers(&self, levels: usize) -> Result<Vec<f64>> {
        if levels == 0 {
            return Err(Error::Domain("need at least one level".into()));
        }
        let mut out = Vec::with_capacity(levels + 1);
        out.push(1.0);
        out.push(self.a);
        for l in 2..=levels {
            let prev = out[l - 1];
            let next = match (&self.family, BranchId::Parabolic) {
                (MapFamily::Farey, _) => prev / (1.0 + prev),
                _ => monotone_root_seeded(
                    |x| {
                        let j = self
                            .branch_jet(BranchId::Parabolic, x, 1)
                            .expect("order-1 jet inside branch domain");
                        (j.value(), j.deriv(1))
                    },
                    0.0,
                    prev,
                    prev,
                    1e-15,
                    prev * prev / out[l - 2],
                )?,
            };
            out.push(next);
        }
        Ok(out)
    }

    /// Level index `l >= 1` with `x` strictly inside `(a_l, a_{l-1})`.
    ///
    /// Equivalently the first passage time is `l - 1`.
    pub fn level_of(&self, markers: &[f64], x: f64) -> Result<usize> {
        if !(0.0 < x && x < 1.0) {
            return Err(Error::Domain(format!("x = {x} outside (0,1)")));
        }
        let boundary_tol = 1e-13;
        if let Some(last) = markers.last() {
            if x < *last {
                return Err(Error::Domain(format!(
                    "x = {x} below deepest computed marker {last}; increase depth"
                )));
            }
        }
        // markers are strictly decreasing; find l with a_l < x < a_{l-1}
        let mut lo = 0usize;
        let mut hi = markers.len() - 1;
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if x < markers[mid] {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let level = hi;
        if (x - markers[level]).abs() < boundary_tol || (x - markers[level - 1]).abs() < boundary_tol
        {
            return Err(Error::Boundary(format!("x = {x} within {boundary_tol} of a marker")));
        }
        Ok(level)
    }
}

/// Jet of `x + c x^{1+alpha}` at `x`, handling the endpoint `x = 0` where
/// only finitely many derivatives exist for non-integer `alpha`.
fn power_term_jet(x: f64, alpha: f64, c: f64, order: usize) -> Result<Jet> {
    let is_integer = alpha.fract() == 0.0 && alpha <= 12.0;
    if x == 0.0 && !is_integer {
        let available = alpha.floor() as usize + 1;
        if order > available {
            return Err(Error::UnsupportedOrder {
                requested: order,
                available,
            });
        }
        let mut coeffs = vec![0.0; order + 1];
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        // derivatives of x^{1+alpha} at 0 vanish up to the available order
        return Ok(Jet::new(coeffs));
    }
    let v = Jet::variable(x, order);
    let power = if is_integer {
        let mut p = v.clone();
        for _ in 0..(alpha as usize) {
            p = p.mul(&v);
        }
        p
    } else {
        v.powf(1.0 + alpha)
    };
    Ok(v.add(&power.scale(c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn farey_eval_branches() {
        let m = MapSpec::farey();
        let (v, b) = m.eval(0.25).unwrap();
        assert_relative_eq!(v, 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(b, BranchId::Parabolic);
        let (v, b) = m.eval(0.75).unwrap();
        assert_relative_eq!(v, 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(b, BranchId::Expanding);
    }

    #[test]
    fn partition_point_is_domain_error_but_closure_evaluates() {
        let m = MapSpec::farey();
        assert!(m.eval(0.5).is_err());
        // closed extension: T_0(1/2) = 1
        assert_relative_eq!(m.eval_branch(BranchId::Parabolic, 0.5).unwrap(), 1.0);
        assert_relative_eq!(m.eval_branch(BranchId::Expanding, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn lsv_parabolic_value() {
        let m = MapSpec::lsv(1.0).unwrap();
        let (v, b) = m.eval(0.25).unwrap();
        assert_relative_eq!(v, 0.375, max_relative = 1e-15);
        assert_eq!(b, BranchId::Parabolic);
    }

    #[test]
    fn farey_branch_jets_at_endpoints() {
        let m = MapSpec::farey();
        let j = m.branch_jet(BranchId::Parabolic, 0.0, 2).unwrap();
        assert_eq!(j.value(), 0.0);
        assert_relative_eq!(j.deriv(1), 1.0);
        assert_relative_eq!(j.deriv(2), 2.0);
        let j = m.branch_jet(BranchId::Expanding, 1.0, 1).unwrap();
        assert_relative_eq!(j.value(), 0.0);
        assert_relative_eq!(j.deriv(1), -1.0);
    }

    #[test]
    fn branch_jets_match_finite_differences() {
        // central differences across a 50-point grid on both branches
        let h = 1e-5;
        for m in [
            MapSpec::farey(),
            MapSpec::lsv(0.7).unwrap(),
            MapSpec::pomeau_manneville(1.3).unwrap(),
        ] {
            let a = m.partition_point();
            for i in 0..50 {
                let frac = (i as f64 + 0.5) / 50.0;
                for (branch, x) in [
                    (BranchId::Parabolic, 2.0 * h + (a - 4.0 * h) * frac),
                    (BranchId::Expanding, a + 2.0 * h + (1.0 - a - 4.0 * h) * frac),
                ] {
                    let j = m.branch_jet(branch, x, 2).unwrap();
                    let f = |t: f64| m.eval_branch(branch, t).unwrap();
                    let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
                    let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
                    assert_relative_eq!(j.deriv(1), d1, max_relative = 1e-6);
                    assert_relative_eq!(j.deriv(2), d2, max_relative = 1e-4, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn farey_inverses_closed_form() {
        let m = MapSpec::farey();
        assert_relative_eq!(
            m.inverse_branch(BranchId::Parabolic, 0.5, 1e-15).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            m.inverse_branch(BranchId::Expanding, 0.5, 1e-15).unwrap(),
            2.0 / 3.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn lsv_inverse_residual() {
        let m = MapSpec::lsv(0.5).unwrap();
        let x = m.inverse_branch(BranchId::Parabolic, 0.9, 1e-14).unwrap();
        let t = m.eval_branch(BranchId::Parabolic, x).unwrap();
        assert!((t - 0.9).abs() <= 1e-14);
    }

    #[test]
    fn inverse_round_trip_grid() {
        for m in [
            MapSpec::farey(),
            MapSpec::lsv(1.0).unwrap(),
            MapSpec::pomeau_manneville(0.8).unwrap(),
        ] {
            for i in 1..40 {
                let y = i as f64 / 40.0;
                for branch in [BranchId::Parabolic, BranchId::Expanding] {
                    let x = m.inverse_branch(branch, y, 1e-14).unwrap();
                    let t = m.eval_branch(branch, x).unwrap();
                    assert!((t - y).abs() <= 1e-12, "roundtrip {t} vs {y}");
                }
            }
        }
    }

    #[test]
    fn farey_markers_are_harmonic() {
        let m = MapSpec::farey();
        let a = m.markers(3).unwrap();
        let expect = [1.0, 0.5, 1.0 / 3.0, 0.25];
        for (got, want) in a.iter().zip(expect) {
            assert_relative_eq!(*got, want, max_relative = 1e-14);
        }
    }

    #[test]
    fn markers_strictly_decreasing() {
        for m in [
            MapSpec::lsv(0.5).unwrap(),
            MapSpec::pomeau_manneville(1.0).unwrap(),
        ] {
            let a = m.markers(200).unwrap();
            for w in a.windows(2) {
                assert!(w[1] < w[0] && w[1] > 0.0);
            }
        }
    }

    #[test]
    fn level_of_farey_examples() {
        let m = MapSpec::farey();
        let markers = m.markers(10).unwrap();
        assert_eq!(m.level_of(&markers, 0.7).unwrap(), 1);
        assert_eq!(m.level_of(&markers, 0.4).unwrap(), 2);
        assert_eq!(m.level_of(&markers, 0.26).unwrap(), 3);
        assert!(m.level_of(&markers, 0.5).is_err()); // marker hit
    }

    #[test]
    fn indifferent_fixed_point() {
        for m in [
            MapSpec::farey(),
            MapSpec::lsv(0.5).unwrap(),
            MapSpec::lsv(1.0).unwrap(),
            MapSpec::pomeau_manneville(0.5).unwrap(),
        ] {
            let j = m.branch_jet(BranchId::Parabolic, 0.0, 1).unwrap();
            assert_eq!(j.value(), 0.0);
            assert_eq!(j.deriv(1), 1.0);
        }
    }

    #[test]
    fn parabolic_normal_form_constant() {
        // (T'(x) - 1) / x^alpha approaches a positive constant for LSV/PM.
        for (m, expect) in [
            (MapSpec::lsv(0.5).unwrap(), 2f64.sqrt() * 1.5),
            (MapSpec::pomeau_manneville(1.0).unwrap(), 2.0),
        ] {
            let alpha = m.alpha();
            let c1 = (m.branch_jet(BranchId::Parabolic, 1e-6, 1).unwrap().deriv(1) - 1.0)
                / 1e-6f64.powf(alpha);
            assert_relative_eq!(c1, expect, max_relative = 1e-4);
        }
    }

    #[test]
    fn expansion_bound_on_grid() {
        for m in [
            MapSpec::farey(),
            MapSpec::lsv(0.5).unwrap(),
            MapSpec::lsv(1.0).unwrap(),
            MapSpec::pomeau_manneville(1.0).unwrap(),
        ] {
            let mut min_abs = f64::INFINITY;
            let (eps, a) = (m.epsilon(), m.partition_point());
            for i in 0..50 {
                let x = eps + (a - eps) * (i as f64 + 0.5) / 50.0;
                let d = m.branch_jet(BranchId::Parabolic, x, 1).unwrap().deriv(1);
                min_abs = min_abs.min(d.abs());
            }
            for i in 0..50 {
                let x = a + (1.0 - a) * (i as f64 + 0.5) / 50.0;
                let d = m.branch_jet(BranchId::Expanding, x, 1).unwrap().deriv(1);
                min_abs = min_abs.min(d.abs());
            }
            assert!(
                min_abs >= m.rho() - 1e-9,
                "family {:?}: grid min |T'| = {min_abs} < rho = {}",
                m.family(),
                m.rho()
            );
        }
    }

    #[test]
    fn lsv_jet_at_zero_order_limit() {
        let m = MapSpec::lsv(0.5).unwrap();
        assert!(m.branch_jet(BranchId::Parabolic, 0.0, 1).is_ok());
        assert!(matches!(
            m.branch_jet(BranchId::Parabolic, 0.0, 2),
            Err(Error::UnsupportedOrder { .. })
        ));
        // away from zero all orders exist
        assert!(m.branch_jet(BranchId::Parabolic, 0.1, 4).is_ok());
    }

    #[test]
    fn pm_partition_point_solves_mod_one() {
        let m = MapSpec::pomeau_manneville(1.0).unwrap();
        let a = m.partition_point();
        assert!((a + a * a - 1.0).abs() < 1e-14);
        // golden-ratio related: a = (sqrt(5)-1)/2
        assert_relative_eq!(a, (5f64.sqrt() - 1.0) / 2.0, max_relative = 1e-13);
    }

    #[test]
    fn inverse_branch_jet_matches_closed_form() {
        let m = MapSpec::farey();
        // psi_0(y) = y/(1+y): psi'(y) = (1+y)^-2
        let j = m
            .inverse_branch_jet(BranchId::Parabolic, 0.5, 2, 1e-14)
            .unwrap();
        assert_relative_eq!(j.value(), 1.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(j.deriv(1), 1.0 / 2.25, max_relative = 1e-12);
        assert_relative_eq!(j.deriv(2), -2.0 / 3.375, max_relative = 1e-11);
    }
}
