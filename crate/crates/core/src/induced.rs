//! The jump transformation and its countable family of inverse branches.
//!
//! For `x` at level `l` (first passage time `l - 1`), the jump
//! transformation is `G(x) = T^{1+tau(x)}(x)`; its inverse branches are
//! `phi_l = psi_0^{l-1} ∘ psi_1 : (0,1) -> A_l`. All level-`l` data —
//! branch values, derivatives, induced weights — are generated by walking
//! the backward `psi_0`-orbit of `psi_1(x)`, never by forward iteration
//! through the parabolic region, which would lose precision near 0.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::maps::{BranchId, MapFamily, MapSpec};
use crate::potential::PotentialSpec;

/// Default residual tolerance for the inner inverse-branch solves.
pub const WALK_TOL: f64 = 1e-15;

/// Incremental generator of `(phi_l(x), phi_l'(x), w(phi_l(x)))` over `l`.
///
/// Each `advance` applies one more `psi_0`, updating the chain-rule
/// derivative product and the weight sum `w(phi_l(x)) = sum_i v(phi_i(x))`.
pub struct LevelWalk<'a> {
    map: &'a MapSpec,
    pot: Option<&'a PotentialSpec>,
    level: usize,
    point: f64,
    prev_point: f64,
    deriv: f64,
    weight: f64,
}

impl<'a> LevelWalk<'a> {
    /// Start at level 1: `phi_1 = psi_1`.
    pub fn start(map: &'a MapSpec, pot: Option<&'a PotentialSpec>, x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0,1]")));
        }
        let point = map.inverse_branch(BranchId::Expanding, x, WALK_TOL)?;
        let (_, dt) = map.branch_value_deriv(BranchId::Expanding, point)?;
        let deriv = 1.0 / dt;
        let weight = match pot {
            Some(p) => p.value(map, BranchId::Expanding, point)?,
            None => 0.0,
        };
        Ok(LevelWalk {
            map,
            pot,
            level: 1,
            point,
            prev_point: x,
            deriv,
            weight,
        })
    }

    /// Move from level `l` to `l + 1` by one `psi_0` application.
    pub fn advance(&mut self) -> Result<()> {
        let s = self.point;
        let next = match self.map.family() {
            MapFamily::Farey => s / (1.0 + s),
            _ => {
                // seed from the local geometric trend of the orbit
                let seed = if self.level >= 2 && self.prev_point > 0.0 {
                    s * (s / self.prev_point)
                } else {
                    s
                };
                crate::solve::monotone_root_seeded(
                    |t| {
                        self.map
                            .branch_value_deriv(BranchId::Parabolic, t)
                            .expect("value inside branch domain")
                    },
                    0.0,
                    self.map.partition_point(),
                    s,
                    WALK_TOL,
                    seed,
                )?
            }
        };
        let (_, dt) = self.map.branch_value_deriv(BranchId::Parabolic, next)?;
        self.deriv /= dt;
        if let Some(p) = self.pot {
            self.weight += p.value(self.map, BranchId::Parabolic, next)?;
        }
        self.prev_point = s;
        self.point = next;
        self.level += 1;
        Ok(())
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `phi_l(x)`.
    pub fn point(&self) -> f64 {
        self.point
    }

    /// `phi_l'(x)` (signed).
    pub fn deriv(&self) -> f64 {
        self.deriv
    }

    /// Induced weight `w(phi_l(x))`.
    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// `phi_l(x)` without weights.
pub fn phi_point(map: &MapSpec, level: usize, x: f64) -> Result<f64> {
    let (v, _) = phi_value_deriv(map, level, x)?;
    Ok(v)
}

/// `(phi_l(x), phi_l'(x))`.
pub fn phi_value_deriv(map: &MapSpec, level: usize, x: f64) -> Result<(f64, f64)> {
    if level == 0 {
        return Err(Error::Domain("levels start at 1".into()));
    }
    let mut walk = LevelWalk::start(map, None, x)?;
    for _ in 1..level {
        walk.advance()?;
    }
    Ok((walk.point(), walk.deriv()))
}

/// Jet of the inverse branch `phi_l` at `x`.
pub fn phi_jet(map: &MapSpec, level: usize, x: f64, order: usize) -> Result<Jet> {
    if level == 0 {
        return Err(Error::Domain("levels start at 1".into()));
    }
    let mut jet = map.inverse_branch_jet(BranchId::Expanding, x, order, WALK_TOL)?;
    for _ in 1..level {
        let step = map.inverse_branch_jet(BranchId::Parabolic, jet.value(), order, WALK_TOL)?;
        jet = step.compose(&jet);
    }
    Ok(jet)
}

/// `G(x) = T^{1 + tau(x)}(x)` together with the first passage time.
pub fn g_with_tau(map: &MapSpec, x: f64) -> Result<(f64, usize)> {
    if !(0.0 < x && x < 1.0) {
        return Err(Error::Domain(format!("x = {x} outside (0,1)")));
    }
    let a = map.partition_point();
    let boundary_tol = 1e-14;
    let mut y = x;
    let mut tau = 0usize;
    let cap = 100_000_000;
    while y < a {
        y = map.eval_branch(BranchId::Parabolic, y)?;
        tau += 1;
        if tau > cap {
            return Err(Error::Domain(format!(
                "first passage from x = {x} exceeds {cap} steps"
            )));
        }
    }
    if (y - a).abs() < boundary_tol {
        return Err(Error::Boundary(format!(
            "orbit of x = {x} hits the partition point after {tau} steps"
        )));
    }
    Ok((map.eval_branch(BranchId::Expanding, y)?, tau))
}

/// `G(x)`, erroring on marker points.
pub fn g_eval(map: &MapSpec, x: f64) -> Result<f64> {
    g_with_tau(map, x).map(|(v, _)| v)
}

/// Induced weight `w(phi_l(x)) = sum_{i=1..l} v(phi_i(x))`, accumulated
/// along the backward orbit.
pub fn induced_weight(map: &MapSpec, pot: &PotentialSpec, level: usize, x: f64) -> Result<f64> {
    if level == 0 {
        return Err(Error::Domain("levels start at 1".into()));
    }
    let mut walk = LevelWalk::start(map, Some(pot), x)?;
    for _ in 1..level {
        walk.advance()?;
    }
    Ok(walk.weight())
}

/// One application of a word letter: value, signed derivative factor and
/// induced weight of `phi_letter` at `x`.
pub fn letter_apply(
    map: &MapSpec,
    pot: Option<&PotentialSpec>,
    letter: usize,
    x: f64,
) -> Result<(f64, f64, f64)> {
    let mut walk = LevelWalk::start(map, pot, x)?;
    for _ in 1..letter {
        walk.advance()?;
    }
    Ok((walk.point(), walk.deriv(), walk.weight()))
}

/// Apply a composed word branch `phi_beta = phi_{b1} ∘ ... ∘ phi_{bm}`.
///
/// Returns `(phi_beta(x), phi_beta'(x), log W_beta(x))`, the weight being
/// the suffix sum `sum_j w(phi_{b_j..b_m}(x))` accumulated right to left.
pub fn word_apply(
    map: &MapSpec,
    pot: Option<&PotentialSpec>,
    entries: &[usize],
    x: f64,
) -> Result<(f64, f64, f64)> {
    let mut point = x;
    let mut deriv = 1.0;
    let mut logw = 0.0;
    for &letter in entries.iter().rev() {
        let (p, d, w) = letter_apply(map, pot, letter, point)?;
        point = p;
        deriv *= d;
        logw += w;
    }
    Ok((point, deriv, logw))
}

/// Jet of the composed word branch together with `log W_beta(x)`.
pub fn word_weight(
    map: &MapSpec,
    pot: &PotentialSpec,
    entries: &[usize],
    x: f64,
    order: usize,
) -> Result<(Jet, f64)> {
    let mut jet = Jet::variable(x, order);
    let mut logw = 0.0;
    for &letter in entries.iter().rev() {
        let step = phi_jet(map, letter, jet.value(), order)?;
        logw += induced_weight(map, pot, letter, jet.value())?;
        jet = step.compose(&jet);
    }
    Ok((jet, logw))
}

/// Empirical summability report for the standing assumption (H7).
#[derive(Debug, Clone)]
pub struct H7Report {
    /// Partial sum `sum_{n<=N} max_{h<=k} ||e^{w∘phi_n}||_h (1 + ||phi_n||_h^h)`.
    pub c_k_estimate: f64,
    /// Fitted geometric ratio of the last terms; `< 1` signals validity.
    pub tail_ratio: f64,
    /// Fitted power-law exponent of the last terms (for ratio -> 1 cases).
    pub tail_exponent: f64,
    /// Whether the geometric ratio stayed below 1.
    pub summable: bool,
    /// The per-level terms entering the sum.
    pub terms: Vec<f64>,
}

/// Estimate the (H7) constant `c_k` by grid suprema of jet data.
///
/// Norms are Chebyshev-grid suprema of jet coefficients — estimates, not
/// certified bounds. `tail_ratio >= 1` is reported, not raised.
pub fn h7_estimate(
    map: &MapSpec,
    pot: &PotentialSpec,
    k: usize,
    n_terms: usize,
    grid_points: usize,
) -> Result<H7Report> {
    if n_terms < 10 {
        return Err(Error::Domain("need at least 10 terms for the tail fit".into()));
    }
    let grid = chebyshev_grid(grid_points.max(5));
    let mut terms = vec![0.0f64; n_terms];
    // per grid point, walk levels once, accumulating both jets
    for &x in &grid {
        let mut jet = map.inverse_branch_jet(BranchId::Expanding, x, k, WALK_TOL)?;
        let mut wjet = pot
            .jet(map, BranchId::Expanding, jet.value(), k)?
            .compose(&jet);
        for (n, term) in terms.iter_mut().enumerate() {
            if n > 0 {
                let step = map.inverse_branch_jet(BranchId::Parabolic, jet.value(), k, WALK_TOL)?;
                jet = step.compose(&jet);
                let vj = pot.jet(map, BranchId::Parabolic, jet.value(), k)?;
                wjet = wjet.add(&vj.compose(&jet));
            }
            let ew = wjet.exp();
            let mut best = 0.0f64;
            let mut norm_ew_h = 0.0f64;
            let mut norm_phi_h = 0.0f64;
            for h in 0..=k {
                norm_ew_h = norm_ew_h.max(ew.deriv(h).abs());
                norm_phi_h = norm_phi_h.max(jet.deriv(h).abs());
                best = best.max(norm_ew_h * (1.0 + norm_phi_h.powi(h as i32)));
            }
            *term = term.max(best);
        }
    }
    let partial: f64 = terms.iter().sum();
    let fit_len = 10.min(n_terms / 2);
    let last = &terms[n_terms - fit_len..];
    let tail_ratio = (last[fit_len - 1] / last[0]).powf(1.0 / (fit_len as f64 - 1.0));
    let n0 = (n_terms - fit_len + 1) as f64;
    let n1 = n_terms as f64;
    let tail_exponent = -(last[fit_len - 1] / last[0]).ln() / (n1 / n0).ln();
    // Geometric decay certifies the sum outright; in the borderline regime
    // (ratio -> 1 from below) only a power-law exponent above 1 does.
    let summable = tail_ratio < 0.97 || (tail_ratio < 1.0 && tail_exponent > 1.0);
    Ok(H7Report {
        c_k_estimate: partial,
        tail_ratio,
        tail_exponent,
        summable,
        terms: terms.to_vec(),
    })
}

/// Chebyshev points mapped to `(0,1)`, endpoints excluded.
pub fn chebyshev_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::PI * (2.0 * i as f64 + 1.0) / (2.0 * n as f64)).cos())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::MapSpec;
    use approx::assert_relative_eq;

    #[test]
    fn farey_induces_gauss_branches() {
        let m = MapSpec::farey();
        for l in 1..=40 {
            for i in 0..20 {
                let x = (i as f64 + 0.5) / 20.0;
                let v = phi_point(&m, l, x).unwrap();
                assert!(
                    (v - 1.0 / (l as f64 + x)).abs() <= 1e-12,
                    "phi_{l}({x}) = {v}"
                );
            }
        }
    }

    #[test]
    fn phi_examples() {
        let m = MapSpec::farey();
        assert_relative_eq!(phi_point(&m, 3, 0.5).unwrap(), 1.0 / 3.5, max_relative = 1e-13);
        assert_relative_eq!(phi_point(&m, 1, 0.0).unwrap(), 1.0, max_relative = 1e-14);
        let j = phi_jet(&m, 2, 0.5, 1).unwrap();
        assert_relative_eq!(j.deriv(1), -0.16, max_relative = 1e-12);
    }

    #[test]
    fn gauss_map_values() {
        let m = MapSpec::farey();
        assert_relative_eq!(g_eval(&m, 0.7).unwrap(), 3.0 / 7.0, max_relative = 1e-13);
        assert_relative_eq!(g_eval(&m, 0.4).unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn g_inverts_phi() {
        for m in [MapSpec::farey(), MapSpec::lsv(0.8).unwrap()] {
            for l in 1..=30 {
                for i in 0..10 {
                    let y = (i as f64 + 0.5) / 10.0;
                    let x = phi_point(&m, l, y).unwrap();
                    let back = g_eval(&m, x).unwrap();
                    assert!((back - y).abs() <= 1e-10, "G(phi_{l}({y})) = {back}");
                }
            }
        }
    }

    #[test]
    fn constant_potential_weight_is_linear() {
        let m = MapSpec::lsv(1.0).unwrap();
        let p = PotentialSpec::constant(-0.7);
        for l in [1usize, 5, 17] {
            let w = induced_weight(&m, &p, l, 0.3).unwrap();
            assert_relative_eq!(w, -0.7 * l as f64, max_relative = 1e-13);
        }
    }

    #[test]
    fn log_deriv_weight_equals_log_branch_derivative() {
        // e^{w(phi_n(x))} = |phi_n'(x)| for q = 1
        let m = MapSpec::farey();
        let p = PotentialSpec::log_deriv(1.0);
        let x = 0.5;
        for l in [1usize, 2, 7] {
            let w = induced_weight(&m, &p, l, x).unwrap();
            let (_, d) = phi_value_deriv(&m, l, x).unwrap();
            assert_relative_eq!(w.exp(), d.abs(), max_relative = 1e-12);
        }
        // spot value: e^w = |phi_1'(0.5)| = 1/2.25
        let w = induced_weight(&m, &p, 1, 0.5).unwrap();
        assert_relative_eq!(w.exp(), 1.0 / 2.25, max_relative = 1e-12);
    }

    #[test]
    fn weight_drift_approaches_v_at_zero() {
        let m = MapSpec::farey();
        let p = PotentialSpec::log_deriv(1.0);
        // v(0) = 0: w(phi_n(x))/n -> 0; closed form is -2 ln(n + x)/n
        let w200 = induced_weight(&m, &p, 200, 0.3).unwrap() / 200.0;
        let w400 = induced_weight(&m, &p, 400, 0.3).unwrap() / 400.0;
        assert!(w400.abs() < w200.abs(), "rate must approach v(0) = 0");
        assert!((w400 - w200).abs() < 0.025, "drift {w200} -> {w400}");
        // and a constant potential gives the rate exactly
        let pc = PotentialSpec::constant(-0.4);
        let w = induced_weight(&m, &pc, 300, 0.3).unwrap() / 300.0;
        assert_relative_eq!(w, -0.4, max_relative = 1e-12);
    }

    #[test]
    fn word_weight_gauss_pair() {
        // beta = (1,1) at x = 0: phi = (1+x)/(2+x) -> 0.5, W = |phi'(0)| = 1/4
        let m = MapSpec::farey();
        let p = PotentialSpec::log_deriv(1.0);
        let (jet, logw) = word_weight(&m, &p, &[1, 1], 0.0, 1).unwrap();
        assert_relative_eq!(jet.value(), 0.5, max_relative = 1e-13);
        assert_relative_eq!(logw.exp(), 0.25, max_relative = 1e-12);
        let (v, d, lw) = word_apply(&m, Some(&p), &[1, 1], 0.0).unwrap();
        assert_relative_eq!(v, 0.5, max_relative = 1e-13);
        assert_relative_eq!(d, 0.25, max_relative = 1e-12);
        assert_relative_eq!(lw, logw, max_relative = 1e-12);
    }

    #[test]
    fn suffix_recursion_of_word_weights() {
        let m = MapSpec::farey();
        let p = PotentialSpec::log_deriv(1.0);
        let beta = [3usize, 1, 2];
        let x = 0.37;
        let (_, _, lw_full) = word_apply(&m, Some(&p), &beta, x).unwrap();
        let (_, _, lw_tailw) = word_apply(&m, Some(&p), &beta[1..], x).unwrap();
        let (p_tail, _, _) = word_apply(&m, None, &beta[1..], x).unwrap();
        let head = induced_weight(&m, &p, beta[0], p_tail).unwrap();
        assert!((lw_full - (head + lw_tailw)).abs() <= 1e-12);
    }

    #[test]
    fn word_contraction_bound() {
        let m = MapSpec::farey();
        let words: [&[usize]; 4] = [&[1], &[2, 1], &[1, 1, 1], &[4, 2, 1, 1]];
        for entries in words {
            for i in 0..20 {
                let x = (i as f64 + 0.5) / 20.0;
                let (_, d, _) = word_apply(&m, None, entries, x).unwrap();
                assert!(
                    d.abs() <= m.rho().powi(-(entries.len() as i32)),
                    "word {entries:?}: |phi'| = {}",
                    d.abs()
                );
            }
        }
    }

    #[test]
    fn level_containment() {
        let m = MapSpec::lsv(0.9).unwrap();
        let markers = m.markers(12).unwrap();
        for entries in [[2usize, 5], [7, 1], [3, 3]] {
            let (v, _, _) = word_apply(&m, None, &entries, 0.41).unwrap();
            assert_eq!(m.level_of(&markers, v).unwrap(), entries[0]);
        }
    }

    #[test]
    fn deep_words_stay_in_log_domain() {
        // |beta| = 10^4 with a strongly negative potential: the weight
        // underflows e^x but its log stays finite
        let m = MapSpec::farey();
        let p = PotentialSpec::constant(-1.0);
        let (v, d, lw) = word_apply(&m, Some(&p), &[5000, 5000], 0.5).unwrap();
        assert!(v.is_finite() && d.is_finite());
        assert!(lw.is_finite());
        assert_relative_eq!(lw, -10_000.0, max_relative = 1e-12);
    }

    #[test]
    fn h7_constant_potential_ratio() {
        let m = MapSpec::farey();
        let p = PotentialSpec::constant(-1.0);
        let rep = h7_estimate(&m, &p, 1, 50, 31).unwrap();
        assert!(rep.summable);
        assert!(rep.c_k_estimate.is_finite());
        // terms decay like e^{-n} * poly
        assert_relative_eq!(rep.tail_ratio, (-1.0f64).exp(), max_relative = 0.15);
    }

    #[test]
    fn h7_gauss_borderline() {
        let m = MapSpec::farey();
        // q = 1: terms ~ n^{-2}: ratio -> 1 from below, exponent ~ 2
        let rep = h7_estimate(&m, &PotentialSpec::log_deriv(1.0), 1, 60, 21).unwrap();
        assert!(rep.tail_ratio < 1.0);
        assert!(rep.tail_ratio > 0.9);
        assert!((rep.tail_exponent - 2.0).abs() < 0.5);
        // q = 0.3 with alpha = 1 sits below the summability threshold 1/2
        let rep = h7_estimate(&m, &PotentialSpec::log_deriv(0.3), 1, 60, 21).unwrap();
        assert!(!rep.summable, "q = 0.3 sits below the summability threshold");
        assert!(rep.tail_exponent < 1.0, "exponent {}", rep.tail_exponent);
    }
}
