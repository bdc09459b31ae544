//! Analytic continuation of coefficient power series beyond the unit disc.
//!
//! The series `q(z) = sum a_n z^n` with `a_n ~ e^{n v(0)} (C_0 + C_1/n + ...)`
//! extends to `{|z| < 1}` united with the complement of the sector
//! `|arg z| <= max(0, pi + v(0))`. Two convergent evaluation routes cover
//! that domain:
//!
//! * while the damped envelope `|z e^{v(0)}|` stays below 1, the Pringsheim
//!   interpolant `h` is integrated against `z^s/(e^{2 pi i s} - 1)` over a
//!   tilted hairpin through `Re s = c` — the tilt angle is dictated by the
//!   direction-dependent growth of the integrand, which a straight vertical
//!   line does not control;
//! * beyond the envelope disc the extracted coefficient layers are
//!   continued in closed form: each `C_k e^{n v0} n^{-k} z^n` sums to a
//!   polylogarithm `Li_k(z e^{v0})` evaluated on the cut plane, and the
//!   fitted remainder is summed with optimal truncation, its size reported.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::induced::LevelWalk;
use crate::maps::MapSpec;
use crate::potential::PotentialSpec;
use crate::quad::gauss_legendre;
use crate::tails::{hurwitz_zeta, KahanComplex};

/// Contour parameters for the interpolant route.
#[derive(Debug, Clone, Copy)]
pub struct ContourSpec {
    /// Abscissa `c` of the hairpin vertex, in `(0, 1)`.
    pub line_real_part: f64,
    /// Truncation of `|Im s|` along the rays.
    pub t_max: f64,
    /// Gauss–Legendre points per unit arc length.
    pub points_per_unit: usize,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec {
            line_real_part: 0.5,
            t_max: 40.0,
            points_per_unit: 32,
        }
    }
}

/// A coefficient sequence prepared for continuation.
#[derive(Debug, Clone)]
pub struct ContinuationProblem {
    /// `a_1 .. a_N`.
    pub coeffs: Vec<f64>,
    /// Exponential rate `v(0) < 0` of the coefficients.
    pub v0: f64,
    /// The interpolant's damping parameter `eps` in `(0, 1)`.
    pub eps: f64,
    pub contour: ContourSpec,
    /// Relative misfit of `log a_n ~ n v0`, a compatibility diagnostic.
    pub rate_misfit: f64,
}

impl ContinuationProblem {
    pub fn new(coeffs: Vec<f64>, v0: f64, eps: f64, contour: ContourSpec) -> Result<Self> {
        if coeffs.len() < 8 {
            return Err(Error::Domain("need at least 8 coefficients".into()));
        }
        if v0 >= 0.0 {
            return Err(Error::Domain(format!(
                "continuation requires v(0) < 0, got {v0} (the method is \
                 ineffective at v(0) = 0)"
            )));
        }
        if !(0.0 < eps && eps < 1.0) {
            return Err(Error::Domain(format!("eps = {eps} outside (0,1)")));
        }
        // drop trailing coefficients on the edge of f64 underflow: beyond
        // them neither route can use the values, and the damped envelope
        // e^{eps v0 n} has died out long before
        let mut coeffs = coeffs;
        if let Some(cut) = coeffs.iter().position(|a| a.abs() < 1e-250) {
            if cut >= 8 {
                coeffs.truncate(cut);
            }
        }
        // rate compatibility: log|a_n|/n should drift toward v0
        let n = coeffs.len();
        let probe = coeffs[n - 1].abs().max(1e-300).ln() / n as f64;
        let rate_misfit = (probe - v0).abs() / v0.abs();
        Ok(ContinuationProblem {
            coeffs,
            v0,
            eps,
            contour,
            rate_misfit,
        })
    }

    fn n_coeffs(&self) -> usize {
        self.coeffs.len()
    }
}

/// The Pringsheim interpolant
/// `h(s) = sin(pi s)/pi * sum_i (-1)^i a_i e^{(1-eps)(s-i)v0}/(s-i)`,
/// with removable singularities at the integers evaluated by their limit.
pub fn interpolant_h(problem: &ContinuationProblem, s: Complex64) -> Complex64 {
    let v0 = problem.v0;
    let eps = problem.eps;
    let damp = (1.0 - eps) * v0;
    // near an integer node the i-th term is regular with limit a_i
    let near = (s.re.round() as i64, (s.re - s.re.round()).abs() < 1e-8 && s.im.abs() < 1e-8);
    let mut acc = KahanComplex::default();
    let sin_pis = (s * std::f64::consts::PI).sin();
    for (idx, &a) in problem.coeffs.iter().enumerate() {
        let i = (idx + 1) as f64;
        let sign = if (idx + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let ds = s - i;
        if near.1 && near.0 == (idx + 1) as i64 {
            // sin(pi s) (-1)^i / (pi (s-i)) = sinc(pi(s-i)) -> 1 - (pi ds)^2/6
            let pids = ds * std::f64::consts::PI;
            let sinc = Complex64::new(1.0, 0.0) - pids * pids / 6.0;
            acc.add((ds * damp).exp() * sinc * a);
        } else {
            acc.add((ds * damp).exp() * (sign * a) / ds);
        }
    }
    if near.1 {
        // contribution of the regular terms times sin(pi s)/pi, plus the
        // singular term already in its limit form
        let regular: Complex64 = {
            let mut r = KahanComplex::default();
            for (idx, &a) in problem.coeffs.iter().enumerate() {
                if (idx + 1) as i64 == near.0 {
                    continue;
                }
                let i = (idx + 1) as f64;
                let sign = if (idx + 1) % 2 == 0 { 1.0 } else { -1.0 };
                let ds = s - i;
                r.add((ds * damp).exp() * (sign * a) / ds);
            }
            r.value()
        };
        let singular = if (1..=problem.n_coeffs() as i64).contains(&near.0) {
            let idx = near.0 as usize - 1;
            let a = problem.coeffs[idx];
            let ds = s - near.0 as f64;
            let pids = ds * std::f64::consts::PI;
            let sinc = Complex64::new(1.0, 0.0) - pids * pids / 6.0;
            (ds * damp).exp() * sinc * a
        } else {
            Complex64::new(0.0, 0.0)
        };
        return singular + sin_pis / std::f64::consts::PI * regular;
    }
    sin_pis / std::f64::consts::PI * acc.value()
}

/// A continued value with its honest error bar.
#[derive(Debug, Clone)]
pub struct ContinuationValue {
    pub value: Complex64,
    /// Quadrature / truncation uncertainty (absolute).
    pub tail: f64,
    /// Which evaluation route produced the value.
    pub route: ContinuationRoute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuationRoute {
    /// Hairpin contour against the interpolant.
    Contour,
    /// Polylogarithm layers plus optimally truncated remainder.
    Structure,
}

/// Membership in the continuation domain `{|z|<1} ∪ (C \ closed sector)`.
pub fn admissible(z: Complex64, v0: f64) -> bool {
    if z.norm() == 0.0 {
        return false;
    }
    let half_angle = (std::f64::consts::PI + v0).max(0.0);
    z.norm() < 1.0 || z.arg().abs() > half_angle
}

/// Continue `q(z) = sum a_n z^n` to the admissible point `z`.
pub fn lindelof_continue(problem: &ContinuationProblem, z: Complex64) -> Result<ContinuationValue> {
    if !admissible(z, problem.v0) {
        return Err(Error::Domain(format!(
            "z = {z} lies in the excluded sector |arg z| <= max(0, pi + v0) \
             with |z| >= 1"
        )));
    }
    let envelope = z.norm() * problem.v0.exp();
    if envelope <= 0.95 {
        contour_value(problem, z)
    } else {
        structure_value(problem, z)
    }
}

/// Hairpin-contour evaluation, absolutely convergent for
/// `|z| e^{(1-eps) v0} < 1`.
fn contour_value(problem: &ContinuationProblem, z: Complex64) -> Result<ContinuationValue> {
    let damp = (1.0 - problem.eps) * problem.v0;
    let b = damp + z.norm().ln();
    if b >= -1e-3 {
        return Err(Error::Precision(format!(
            "contour route needs |z| e^{{(1-eps)v0}} < 1, got log-margin {b}"
        )));
    }
    let arg = z.arg();
    // growth rate along the rays at angles ±theta:
    // R_± = b cos(theta) ± (pi - arg z) sin(theta); the binding one is R_+.
    let spread = std::f64::consts::PI - arg; // >= 0 for arg z in (-pi, pi]
    let theta = (0.75 * (b.abs() / spread.max(1e-9)).atan()).clamp(1e-3, 1.2);
    let worst_rate = theta.cos() * b + theta.sin() * spread;
    if worst_rate >= -1e-6 {
        return Err(Error::Precision(format!(
            "no decaying hairpin at z = {z} (rate {worst_rate})"
        )));
    }
    // arc length so that e^{rate L} is negligible, capped by t_max/sin(theta)
    let len_needed = 42.0 / worst_rate.abs();
    let len = len_needed.min(problem.contour.t_max / theta.sin().max(1e-6));
    let c = problem.contour.line_real_part;
    let damp_c = damp;
    let lnz = Complex64::new(z.norm().ln(), arg);
    // per-term exponent e^{(damp - i pi)(s - i)} z^s: the alternating sign
    // is folded into the exponential so magnitudes stay tame
    let integrand = |s: Complex64| -> Complex64 {
        let mut acc = KahanComplex::default();
        let zs = (lnz * s).exp();
        for (idx, &a) in problem.coeffs.iter().enumerate() {
            let i = (idx + 1) as f64;
            let ds = s - i;
            let phase = (Complex64::new(damp_c, -std::f64::consts::PI) * ds).exp();
            acc.add(a * phase / ds);
        }
        acc.value() * zs
    };
    let (nodes, weights) = gauss_legendre(problem.contour.points_per_unit.max(16));
    let mut total = KahanComplex::default();
    let mut end_mag = 0.0f64;
    for dir in [
        Complex64::from_polar(1.0, theta),
        Complex64::from_polar(1.0, -theta),
    ] {
        // kernel poles sit at the integers on the real axis; panels grow
        // geometrically so their length stays below the local pole distance
        let sign = if dir.im > 0.0 { 1.0 } else { -1.0 };
        let mut u0 = 0.0f64;
        while u0 < len {
            let local = ((u0 + (1.0 - c)) * theta.sin() * 0.5).clamp(0.08, 1.0);
            let h = local.min(len - u0);
            for (x, wq) in nodes.iter().zip(&weights) {
                let u = u0 + 0.5 * h * (x + 1.0);
                let s = Complex64::new(c, 0.0) + dir * u;
                let val = integrand(s) * dir * (0.5 * h * wq * sign);
                total.add(val);
                if u > len - h {
                    end_mag = end_mag.max(val.norm() / (0.5 * h * wq));
                }
            }
            u0 += h;
        }
    }
    // -1/(2 pi i) times the upward integral gives the series sum
    let value = -total.value() / Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let tail_bound = end_mag / worst_rate.abs() + 1e-15 * value.norm();
    Ok(ContinuationValue {
        value,
        tail: tail_bound,
        route: ContinuationRoute::Contour,
    })
}

/// Number of structure layers extracted for the polylogarithm route.
const STRUCTURE_LAYERS: usize = 7;

/// Polylog-layer evaluation for `|z e^{v0}|` near or beyond 1.
fn structure_value(problem: &ContinuationProblem, z: Complex64) -> Result<ContinuationValue> {
    let v0 = problem.v0;
    let n = problem.n_coeffs();
    let zeta = z * v0.exp();
    if (zeta.im == 0.0) && zeta.re >= 1.0 {
        return Err(Error::Domain(format!(
            "z e^{{v0}} = {zeta} on the cut [1, inf)"
        )));
    }
    // layer extraction: c_n = a_n e^{-n v0} ~ sum_k C_k n^{-k}. The layer
    // count is chosen adaptively: extracting deep 1/n layers from a finite
    // window amplifies f64 noise like n^k, so K grows only while the fit
    // residual improves materially.
    let c_seq: Vec<f64> = problem
        .coeffs
        .iter()
        .enumerate()
        .map(|(idx, &a)| a * (-(idx as f64 + 1.0) * v0).exp())
        .collect();
    let lo = (n / 4).max(8);
    let rows: Vec<usize> = (lo..n).collect();
    let scale_ref = c_seq[lo..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let fit_for = |k_layers: usize| -> Result<(Vec<f64>, f64)> {
        let scale: Vec<f64> = (0..k_layers)
            .map(|k| (lo as f64).powi(-(k as i32)))
            .collect();
        let mut ata = vec![vec![0.0f64; k_layers]; k_layers];
        let mut atb = vec![0.0f64; k_layers];
        for &row in &rows {
            let nn = (row + 1) as f64;
            let basis: Vec<f64> = (0..k_layers)
                .map(|k| nn.powi(-(k as i32)) / scale[k])
                .collect();
            for r in 0..k_layers {
                for c2 in 0..k_layers {
                    ata[r][c2] += basis[r] * basis[c2];
                }
                atb[r] += basis[r] * c_seq[row];
            }
        }
        let sol = solve_dense(&mut ata, &mut atb)?;
        let layers: Vec<f64> = sol.iter().zip(&scale).map(|(s, sc)| s / sc).collect();
        let mut rms = 0.0;
        for &row in &rows {
            let nn = (row + 1) as f64;
            let model: f64 = layers
                .iter()
                .enumerate()
                .map(|(k, &ck)| ck * nn.powi(-(k as i32)))
                .sum();
            rms += (c_seq[row] - model).powi(2);
        }
        Ok((layers, (rms / rows.len() as f64).sqrt()))
    };
    let mut chosen = fit_for(1)?;
    for k_layers in 2..=STRUCTURE_LAYERS.min(rows.len() / 4) {
        let candidate = fit_for(k_layers)?;
        let floor = 1e-14 * scale_ref.max(1e-300);
        if chosen.1 <= floor || candidate.1 > 0.3 * chosen.1 {
            break;
        }
        chosen = candidate;
    }
    let (layers, fit_rms) = chosen;
    // closed-form continuation of each layer
    let mut value = KahanComplex::default();
    for (k, &ck) in layers.iter().enumerate() {
        value.add(polylog_cut(k as i32, zeta)? * ck);
    }
    // remainder series with optimal truncation
    let remainder = |idx: usize| -> f64 {
        let nn = (idx + 1) as f64;
        let model: f64 = layers
            .iter()
            .enumerate()
            .map(|(k, &ck)| ck * nn.powi(-(k as i32)))
            .sum();
        c_seq[idx] - model
    };
    let zmag = zeta.norm();
    let mut zp = Complex64::new(1.0, 0.0);
    let mut best_cut = n;
    if zmag > 1.0 {
        // optimal truncation: stop where |r_n zeta^n| starts growing
        let mut prev = f64::INFINITY;
        for idx in 0..n {
            let mag = remainder(idx).abs() * zmag.powi(idx as i32 + 1);
            if idx > 8 && mag > prev * 1.5 {
                best_cut = idx;
                break;
            }
            prev = prev.min(mag.max(1e-300));
        }
    }
    let mut trunc_err = 0.0f64;
    for (idx, _) in (0..best_cut).enumerate() {
        zp *= zeta;
        let term = zp * remainder(idx);
        value.add(term);
        trunc_err = term.norm();
    }
    if zmag < 1.0 {
        trunc_err = trunc_err * zmag / (1.0 - zmag).max(1e-6);
    }
    let tail = trunc_err + fit_rms * 10.0 + 1e-14 * value.value().norm();
    Ok(ContinuationValue {
        value: value.value(),
        tail,
        route: ContinuationRoute::Structure,
    })
}

#[allow(clippy::needless_range_loop)]
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::Precision("singular layer fit".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc -= a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    Ok(x)
}

/// Polylogarithm `Li_k` on the cut plane `C \ [1, inf)` for `k = 0..=8`.
pub fn polylog_cut(k: i32, zeta: Complex64) -> Result<Complex64> {
    if !(0..=8).contains(&k) {
        return Err(Error::Domain(format!("polylog order {k} outside 0..=8")));
    }
    if zeta.im == 0.0 && zeta.re >= 1.0 {
        return Err(Error::Domain("polylog argument on the cut".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    if k == 0 {
        return Ok(zeta / (one - zeta));
    }
    if k == 1 {
        return Ok(-(one - zeta).ln());
    }
    let r = zeta.norm();
    if r <= 0.9 {
        return Ok(polylog_series(k, zeta));
    }
    if r >= 1.15 {
        // inversion: Li_k(z) = -(-1)^k Li_k(1/z) - (2 pi i)^k/k! B_k(u),
        // u = 1/2 + Log(-z)/(2 pi i)
        let inv = polylog_series(k, one / zeta);
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let u = Complex64::new(0.5, 0.0) + (-zeta).ln() / two_pi_i;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut pref = one;
        let mut fact = 1.0;
        for j in 1..=k {
            pref *= two_pi_i;
            fact *= j as f64;
        }
        return Ok(-sign * inv - pref / fact * bernoulli_poly(k as usize, u));
    }
    // annulus: Li_k(e^mu) expansion around mu = 0, valid |mu| < 2 pi
    let mu = zeta.ln();
    let km1 = (k - 1) as usize;
    let mut fact_km1 = 1.0;
    for j in 2..=km1 {
        fact_km1 *= j as f64;
    }
    let harmonic: f64 = (1..=km1).map(|j| 1.0 / j as f64).sum();
    let mut acc = mu.powu(km1 as u32) / fact_km1 * (Complex64::new(harmonic, 0.0) - (-mu).ln());
    let mut mu_pow = one;
    let mut fact_j = 1.0;
    for j in 0..48 {
        if j > 0 {
            mu_pow *= mu;
            fact_j *= j as f64;
        }
        if j == km1 {
            continue;
        }
        let zv = zeta_int(k - j as i32);
        if zv != 0.0 {
            acc += mu_pow / fact_j * zv;
        }
    }
    Ok(acc)
}

fn polylog_series(k: i32, zeta: Complex64) -> Complex64 {
    let mut acc = KahanComplex::default();
    let mut zp = Complex64::new(1.0, 0.0);
    for n in 1..4000 {
        zp *= zeta;
        let term = zp / (n as f64).powi(k);
        acc.add(term);
        if term.norm() < 1e-18 * (1.0 + acc.value().norm()) {
            break;
        }
    }
    acc.value()
}

/// Riemann zeta at integer arguments (possibly negative), for the annulus
/// expansion of the polylogarithm.
fn zeta_int(m: i32) -> f64 {
    if m >= 2 {
        hurwitz_zeta(m as f64, 1.0)
    } else if m == 1 {
        f64::NAN // excluded by construction
    } else if m == 0 {
        -0.5
    } else {
        // zeta(-j) = -B_{j+1}/(j+1); odd Bernoullis beyond B_1 vanish
        let j = (-m) as usize;
        if j.is_multiple_of(2) {
            0.0
        } else {
            -bernoulli_number(j + 1) / (j as f64 + 1.0)
        }
    }
}

/// Bernoulli numbers via the defining recurrence (adequate up to ~B_50).
fn bernoulli_number(n: usize) -> f64 {
    let mut b = vec![0.0f64; n + 1];
    b[0] = 1.0;
    for m in 1..=n {
        // sum_{j<m} C(m+1, j) B_j = 0 for m >= 1
        let mut acc = 0.0;
        let mut binom = 1.0; // C(m+1, 0)
        for (j, bj) in b.iter().enumerate().take(m) {
            acc += binom * bj;
            binom *= (m as f64 + 1.0 - j as f64) / (j as f64 + 1.0);
        }
        b[m] = -acc / (m as f64 + 1.0);
    }
    b[n]
}

/// Bernoulli polynomial `B_k(x)` for `k <= 8`.
fn bernoulli_poly(k: usize, x: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    for j in 0..=k {
        if j > 0 {
            binom *= (k as f64 + 1.0 - j as f64) / j as f64;
        }
        acc += x.powu((k - j) as u32) * (binom * bernoulli_number(j));
    }
    acc
}

/// Operator coefficients `a_n = e^{w(phi_n(x))} f(phi_n(x))`.
pub fn operator_coefficients(
    map: &MapSpec,
    pot: &PotentialSpec,
    f: &dyn Fn(f64) -> f64,
    x: f64,
    n: usize,
) -> Result<Vec<f64>> {
    if pot.v_at_zero() >= 0.0 {
        return Err(Error::Domain(format!(
            "operator continuation needs v(0) < 0 (got {}); the method is \
             ineffective otherwise",
            pot.v_at_zero()
        )));
    }
    let mut walk = LevelWalk::start(map, Some(pot), x)?;
    let mut out = Vec::with_capacity(n);
    for level in 1..=n {
        if level > 1 {
            walk.advance()?;
        }
        out.push(walk.weight().exp() * f(walk.point()));
    }
    Ok(out)
}

/// Continued value of `(Q_w(z) f)(x)` beyond the unit disc.
#[allow(clippy::too_many_arguments)]
pub fn continue_operator_series(
    map: &MapSpec,
    pot: &PotentialSpec,
    f: &dyn Fn(f64) -> f64,
    x: f64,
    z: Complex64,
    eps: f64,
    contour: ContourSpec,
    n_coeffs: usize,
) -> Result<ContinuationValue> {
    let coeffs = operator_coefficients(map, pot, f, x, n_coeffs)?;
    let problem = ContinuationProblem::new(coeffs, pot.v_at_zero(), eps, contour)?;
    lindelof_continue(&problem, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn geometric_problem(n: usize, eps: f64) -> ContinuationProblem {
        let coeffs: Vec<f64> = (1..=n).map(|k| (-(k as f64)).exp()).collect();
        ContinuationProblem::new(coeffs, -1.0, eps, ContourSpec::default()).unwrap()
    }

    #[test]
    fn interpolation_property() {
        let p = geometric_problem(400, 0.1);
        for n in [1usize, 3, 7, 40, 200] {
            let h = interpolant_h(&p, Complex64::new(n as f64, 0.0));
            assert!(
                (h - Complex64::new((-(n as f64)).exp(), 0.0)).norm() <= 1e-10,
                "h({n}) = {h}"
            );
        }
        // spot value from the benchmark
        let h3 = interpolant_h(&p, Complex64::new(3.0, 0.0));
        assert_relative_eq!(h3.re, 0.049787068367863944, max_relative = 1e-10);
    }

    #[test]
    fn interpolant_near_integer_limit() {
        let p = geometric_problem(100, 0.1);
        let base = interpolant_h(&p, Complex64::new(5.0, 0.0));
        let near = interpolant_h(&p, Complex64::new(5.0 + 0.5e-8, 1e-9));
        assert!((base - near).norm() < 1e-7);
        let probe = interpolant_h(&p, Complex64::new(5.001, 0.0));
        assert!((base - probe).norm() < 1e-2);
    }

    #[test]
    fn interpolant_real_axis_growth() {
        // along the real axis |h| decays like the coefficients; the probe
        // bound is max(0, pi + (1-eps) v0) + 0.1
        let p = geometric_problem(400, 0.1);
        let bound = (std::f64::consts::PI + 0.9 * -1.0).max(0.0) + 0.1;
        for sigma in [20.0, 40.0] {
            let h = interpolant_h(&p, Complex64::new(sigma, 0.0));
            let rate = h.norm().max(1e-300).ln() / sigma;
            assert!(rate <= bound, "rate {rate} at sigma {sigma}");
        }
    }

    #[test]
    fn interpolant_conjugate_symmetry() {
        let p = geometric_problem(100, 0.1);
        let s = Complex64::new(7.3, 2.1);
        let a = interpolant_h(&p, s);
        let b = interpolant_h(&p, s.conj());
        assert!((a - b.conj()).norm() < 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn polylog_against_reference() {
        // frozen reference values (mpmath, 25 digits)
        let cases: [(i32, Complex64, Complex64); 8] = [
            (2, Complex64::new(-1.4715177646857693, 0.0), Complex64::new(-1.1299246557578533, 0.0)),
            (3, Complex64::new(-1.4715177646857693, 0.0), Complex64::new(-1.2760089790679861, 0.0)),
            (2, Complex64::new(1.2, 0.8), Complex64::new(0.95193334055770893, 1.47491910660816)),
            (4, Complex64::new(1.2, 0.8), Complex64::new(1.2182310034812586, 0.95980313661726285)),
            (2, Complex64::new(-0.3, 0.15), Complex64::new(-0.28401017980581311, 0.13097614748040741)),
            (5, Complex64::new(0.97, 0.05), Complex64::new(1.0043681095048227, 0.053937488508835608)),
            (3, Complex64::new(-1.02, 0.0), Complex64::new(-0.91796624099192015, 0.0)),
            (6, Complex64::new(1.05, -0.3), Complex64::new(1.0671676158692714, -0.31163574025118293)),
        ];
        for (k, z, expect) in cases {
            let got = polylog_cut(k, z).unwrap();
            assert!(
                (got - expect).norm() <= 1e-11 * (1.0 + expect.norm()),
                "Li_{k}({z}) = {got}, want {expect}"
            );
        }
    }

    #[test]
    fn geometric_benchmark_outside_disc() {
        // a_n = e^{-n}: q(z) = z e^{-1}/(1 - z e^{-1}), continued to z = -4
        let p = geometric_problem(2000, 0.1);
        let z = Complex64::new(-4.0, 0.0);
        let expect = {
            let ze = z * (-1.0f64).exp();
            ze / (Complex64::new(1.0, 0.0) - ze)
        };
        let got = lindelof_continue(&p, z).unwrap();
        assert_eq!(got.route, ContinuationRoute::Structure);
        assert!(
            (got.value - expect).norm() <= 1e-6,
            "got {} want {expect} (tail {})",
            got.value,
            got.tail
        );
    }

    #[test]
    fn inside_disc_consistency() {
        let p = geometric_problem(400, 0.1);
        let z = Complex64::new(0.5, 0.3);
        let direct: Complex64 = {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut zp = Complex64::new(1.0, 0.0);
            for k in 1..=400 {
                zp *= z;
                acc += zp * (-(k as f64)).exp();
            }
            acc
        };
        let got = lindelof_continue(&p, z).unwrap();
        assert_eq!(got.route, ContinuationRoute::Contour);
        assert!(
            (got.value - direct).norm() <= 1e-8,
            "got {} want {direct} (diff {})",
            got.value,
            (got.value - direct).norm()
        );
    }

    #[test]
    fn sector_exclusion() {
        let p = geometric_problem(100, 0.1);
        // z = 4: arg 0 <= pi - 1, |z| > 1: excluded
        assert!(matches!(
            lindelof_continue(&p, Complex64::new(4.0, 0.0)),
            Err(Error::Domain(_))
        ));
        // z = 1 is on the boundary circle and inside the sector
        assert!(lindelof_continue(&p, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn contour_parameter_independence() {
        let z = Complex64::new(0.5, 0.3);
        let mut values = Vec::new();
        for c in [0.3, 0.5, 0.7] {
            let contour = ContourSpec {
                line_real_part: c,
                ..Default::default()
            };
            let coeffs: Vec<f64> = (1..=400).map(|k| (-(k as f64)).exp()).collect();
            let p = ContinuationProblem::new(coeffs, -1.0, 0.1, contour).unwrap();
            values.push(lindelof_continue(&p, z).unwrap().value);
        }
        for v in &values[1..] {
            assert!((v - values[0]).norm() <= 1e-8, "{v} vs {}", values[0]);
        }
    }

    #[test]
    fn eps_robustness() {
        let z = Complex64::new(-4.0, 0.0);
        let mut values = Vec::new();
        for eps in [0.05, 0.1, 0.2] {
            let p = geometric_problem(2000, eps);
            values.push(lindelof_continue(&p, z).unwrap().value);
        }
        for v in &values[1..] {
            assert!((v - values[0]).norm() <= 1e-8);
        }
    }

    #[test]
    fn cauchy_riemann_probe_outside_disc() {
        let p = geometric_problem(2000, 0.1);
        let z0 = Complex64::new(-3.0, 0.8);
        let d = 1e-4;
        let f = |z: Complex64| lindelof_continue(&p, z).unwrap().value;
        let dx = (f(z0 + d) - f(z0 - d)) / (2.0 * d);
        let dy = (f(z0 + Complex64::new(0.0, d)) - f(z0 - Complex64::new(0.0, d)))
            / Complex64::new(0.0, 2.0 * d);
        assert!(
            (dx - dy).norm() <= 1e-6 * (1.0 + dx.norm()),
            "CR residual {}",
            (dx - dy).norm()
        );
    }

    #[test]
    fn operator_coefficients_constant_potential() {
        let map = MapSpec::farey();
        let pot = PotentialSpec::constant(-0.7);
        let coeffs = operator_coefficients(&map, &pot, &|_| 1.0, 0.4, 50).unwrap();
        for (idx, &a) in coeffs.iter().enumerate() {
            assert_relative_eq!(a, (-(idx as f64 + 1.0) * 0.7).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn operator_coefficients_shifted_farey_spot_value() {
        // v = -log|T'| - 1: a_2 = |phi_2'(0.5)| e^{-2} = 0.16 e^{-2}
        let map = MapSpec::farey();
        let pot = PotentialSpec::log_deriv_shifted(1.0, -1.0);
        let coeffs = operator_coefficients(&map, &pot, &|_| 1.0, 0.5, 4).unwrap();
        assert_relative_eq!(coeffs[1], 0.16 * (-2.0f64).exp(), max_relative = 1e-11);
        // rate fit: log a_n / n -> v0 within 2% by n = 200
        let coeffs = operator_coefficients(&map, &pot, &|_| 1.0, 0.5, 200).unwrap();
        let rate = coeffs[199].ln() / 200.0;
        assert!((rate - -1.0).abs() <= 0.06, "rate {rate}");
    }

    #[test]
    fn operator_rejects_nonnegative_v0() {
        let map = MapSpec::farey();
        let pot = PotentialSpec::log_deriv(1.0); // v(0) = 0
        assert!(operator_coefficients(&map, &pot, &|_| 1.0, 0.5, 10).is_err());
    }

    #[test]
    fn continue_operator_constant_potential_closed_form() {
        let map = MapSpec::farey();
        let pot = PotentialSpec::constant(-1.0);
        let z = Complex64::new(-4.0, 0.0);
        let expect = {
            let ze = z * (-1.0f64).exp();
            ze / (Complex64::new(1.0, 0.0) - ze)
        };
        let got = continue_operator_series(
            &map,
            &pot,
            &|_| 1.0,
            0.3,
            z,
            0.1,
            ContourSpec::default(),
            2000,
        )
        .unwrap();
        assert!((got.value - expect).norm() <= 1e-6);
        // z = 1 must be rejected for every admissible v0
        assert!(continue_operator_series(
            &map,
            &pot,
            &|_| 1.0,
            0.3,
            Complex64::new(1.0, 0.0),
            0.1,
            ContourSpec::default(),
            200,
        )
        .is_err());
    }

    #[test]
    fn continue_operator_overlap_annulus() {
        // z = 0.9 e^{3i}: inside the admissible sector and inside the disc;
        // the continued value must match the direct series
        let map = MapSpec::farey();
        let pot = PotentialSpec::log_deriv_shifted(1.0, -1.0);
        let x = 0.5;
        let z = Complex64::from_polar(0.9, 3.0);
        let coeffs = operator_coefficients(&map, &pot, &|_| 1.0, x, 2000).unwrap();
        let direct: Complex64 = {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut zp = Complex64::new(1.0, 0.0);
            for &a in &coeffs {
                zp *= z;
                acc += zp * a;
            }
            acc
        };
        let got = continue_operator_series(
            &map,
            &pot,
            &|_| 1.0,
            x,
            z,
            0.1,
            ContourSpec::default(),
            2000,
        )
        .unwrap();
        assert!(
            (got.value - direct).norm() <= 1e-7,
            "got {} want {direct}",
            got.value
        );
    }
}
