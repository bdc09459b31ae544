//! Potentials on the interval and their induced counterparts.
//!
//! A potential `v` is piecewise `C^k` over the two closed branches. The
//! log-derivative family `v = -q log|T'| + shift` covers the
//! Perron–Frobenius case (`q = 1`, shift 0) and the shifted variants used
//! for continuation experiments; `v(0)` is cached because the induced
//! weights behave like `n * v(0)` at level `n`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::maps::{BranchId, MapSpec};

/// Evaluator for user-supplied potentials: `(branch, x, order) -> jet of v`.
pub type PotentialFn = Arc<dyn Fn(BranchId, f64, usize) -> Result<Jet> + Send + Sync>;

#[derive(Clone)]
pub enum PotentialKind {
    /// `v ≡ v0`.
    Constant { v0: f64 },
    /// `v = -q log|T'| + shift`; the Perron–Frobenius potential for
    /// `q = 1, shift = 0`.
    LogDeriv { q: f64, shift: f64 },
    /// Arbitrary branchwise-smooth potential with declared `v(0)`.
    Custom { eval: PotentialFn, v_at_zero: f64 },
}

impl fmt::Debug for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialKind::Constant { v0 } => write!(f, "Constant {{ v0: {v0} }}"),
            PotentialKind::LogDeriv { q, shift } => {
                write!(f, "LogDeriv {{ q: {q}, shift: {shift} }}")
            }
            PotentialKind::Custom { v_at_zero, .. } => {
                write!(f, "Custom {{ v_at_zero: {v_at_zero}, .. }}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PotentialSpec {
    kind: PotentialKind,
    smoothness_k: usize,
}

impl PotentialSpec {
    pub fn constant(v0: f64) -> Self {
        PotentialSpec {
            kind: PotentialKind::Constant { v0 },
            smoothness_k: usize::MAX,
        }
    }

    /// `v = -q log|T'|`.
    pub fn log_deriv(q: f64) -> Self {
        PotentialSpec {
            kind: PotentialKind::LogDeriv { q, shift: 0.0 },
            smoothness_k: usize::MAX,
        }
    }

    /// `v = -q log|T'| + shift`, so `v(0) = shift`.
    pub fn log_deriv_shifted(q: f64, shift: f64) -> Self {
        PotentialSpec {
            kind: PotentialKind::LogDeriv { q, shift },
            smoothness_k: usize::MAX,
        }
    }

    pub fn custom(eval: PotentialFn, v_at_zero: f64, smoothness_k: usize) -> Self {
        PotentialSpec {
            kind: PotentialKind::Custom { eval, v_at_zero },
            smoothness_k,
        }
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn smoothness_k(&self) -> usize {
        self.smoothness_k
    }

    /// `v(0)`, the value at the indifferent fixed point.
    pub fn v_at_zero(&self) -> f64 {
        match &self.kind {
            PotentialKind::Constant { v0 } => *v0,
            // T'(0) = 1, so only the shift survives at the origin.
            PotentialKind::LogDeriv { shift, .. } => *shift,
            PotentialKind::Custom { v_at_zero, .. } => *v_at_zero,
        }
    }

    /// Value of `v` at `x` on the closed extension of the given branch.
    pub fn value(&self, map: &MapSpec, branch: BranchId, x: f64) -> Result<f64> {
        match &self.kind {
            PotentialKind::Constant { v0 } => Ok(*v0),
            PotentialKind::LogDeriv { q, shift } => {
                let (_, dt) = map.branch_value_deriv(branch, x)?;
                if dt == 0.0 {
                    return Err(Error::Domain(format!("|T'| vanishes at x = {x}")));
                }
                Ok(-q * dt.abs().ln() + shift)
            }
            PotentialKind::Custom { eval, .. } => Ok(eval(branch, x, 0)?.value()),
        }
    }

    /// Jet of `v` at `x` along the given branch.
    pub fn jet(&self, map: &MapSpec, branch: BranchId, x: f64, order: usize) -> Result<Jet> {
        match &self.kind {
            PotentialKind::Constant { v0 } => Ok(Jet::constant(*v0, order)),
            PotentialKind::LogDeriv { q, shift } => {
                let dt = map.branch_jet(branch, x, order + 1)?.derivative();
                Ok(dt.ln_abs().scale(-q).add_scalar(*shift))
            }
            PotentialKind::Custom { eval, .. } => eval(branch, x, order),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_deriv_on_farey() {
        let m = MapSpec::farey();
        let p = PotentialSpec::log_deriv(1.0);
        // T_1 = (1-x)/x: |T'| = 1/x^2 -> v(x) = 2 ln x
        let x = 0.7;
        assert_relative_eq!(
            p.value(&m, BranchId::Expanding, x).unwrap(),
            2.0 * x.ln(),
            max_relative = 1e-13
        );
        assert_eq!(p.v_at_zero(), 0.0);
    }

    #[test]
    fn shifted_log_deriv_v0() {
        let p = PotentialSpec::log_deriv_shifted(1.0, -1.0);
        assert_eq!(p.v_at_zero(), -1.0);
    }

    #[test]
    fn potential_jet_matches_finite_difference() {
        let m = MapSpec::farey();
        let p = PotentialSpec::log_deriv(0.7);
        let x = 0.3;
        let j = p.jet(&m, BranchId::Parabolic, x, 1).unwrap();
        let h = 1e-6;
        let f = |t: f64| p.value(&m, BranchId::Parabolic, t).unwrap();
        assert_relative_eq!(j.deriv(1), (f(x + h) - f(x - h)) / (2.0 * h), max_relative = 1e-8);
    }
}
