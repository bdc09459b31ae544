//! Flat traces, flat determinants, two-variable zeta functions, pressure
//! and the growth quantities `Lambda_m`.
//!
//! Trace and zeta sums run over word shells of fixed total `|beta|`. The
//! shell values are exact periodic-orbit sums; the discarded shells are
//! completed by the fitted tail models of [`crate::tails`], and the model
//! uncertainty travels with every value. Shell sums are evaluated in a
//! fixed order (parallel map, ordered reduce), so results do not depend on
//! the number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::induced::word_apply;
use crate::maps::MapSpec;
use crate::potential::PotentialSpec;
use crate::tails::{Kahan, KahanComplex, ShellModel};
use crate::words::{fixed_point_data, t_periodic_points, CompositionIter};

/// Which periodic-orbit functional a shell sum evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordTerm {
    /// `W_beta(x_beta) / (1 - phi_beta'(x_beta))`: flat trace of `Q_w^m`.
    Trace,
    /// The same multiplied by `phi_beta'(x_beta)`: flat trace of the
    /// log-derivative-twisted operator `Q_{w - log G'}^m`.
    TwistedTrace,
    /// `W_beta(x_beta)` alone: plain zeta / pressure sums.
    Weight,
}

/// A truncated series value with its honest error bar.
#[derive(Debug, Clone)]
pub struct SeriesValue {
    /// Partial sum plus the modeled tail.
    pub value: Complex64,
    /// Uncertainty of the modeled tail (absolute).
    pub tail: f64,
    /// Partial sum over the computed shells only.
    pub raw_partial: Complex64,
    /// Largest word total included exactly.
    pub shells_used: usize,
    /// Tail exceeded 10% of the value, or the tail model was out of its
    /// regime; treat the value as indicative only.
    pub flagged: bool,
    /// Power-law exponent of the shell decay fitted on the way out, when
    /// the critical-line model was engaged.
    pub fitted_exponent: Option<f64>,
}

/// Exact shell sum `sum_{|beta| = total, beta in N^m} term(beta)`, z-free.
fn shell_sum(
    map: &MapSpec,
    pot: &PotentialSpec,
    m: usize,
    total: usize,
    kind: WordTerm,
    tol: f64,
) -> Result<f64> {
    const CHUNK: usize = 32_768;
    let mut iter = CompositionIter::new(m, total);
    let mut acc = Kahan::default();
    let mut chunk: Vec<Vec<usize>> = Vec::with_capacity(CHUNK.min(1024));
    loop {
        chunk.clear();
        for entries in iter.by_ref().take(CHUNK) {
            chunk.push(entries);
        }
        if chunk.is_empty() {
            break;
        }
        let terms: Result<Vec<f64>> = chunk
            .par_iter()
            .map(|entries| {
                let (_, d, lw) = fixed_point_data(map, pot, entries, tol)?;
                Ok(match kind {
                    WordTerm::Trace => lw.exp() / (1.0 - d),
                    WordTerm::TwistedTrace => lw.exp() * d / (1.0 - d),
                    WordTerm::Weight => lw.exp(),
                })
            })
            .collect();
        for t in terms? {
            acc.add(t);
        }
    }
    Ok(acc.value())
}

/// Truncation policy for shell-indexed series.
#[derive(Debug, Clone, Copy)]
pub struct ShellPolicy {
    /// Hard cap on the word total.
    pub max_total: usize,
    /// Stop early once the estimated remaining mass falls below this
    /// fraction of the partial sum.
    pub rel_target: f64,
    /// Fixed-point tolerance for the orbit solves.
    pub fp_tol: f64,
}

impl Default for ShellPolicy {
    fn default() -> Self {
        ShellPolicy {
            max_total: 10_000,
            rel_target: 1e-9,
            fp_tol: 1e-13,
        }
    }
}

impl ShellPolicy {
    pub fn with_cap(max_total: usize) -> Self {
        ShellPolicy {
            max_total,
            ..Default::default()
        }
    }
}

/// Default trace cutoffs balancing the polynomial shell decay at the
/// critical line against the combinatorial growth of `N^m` words.
pub fn default_trace_cutoff(m: usize) -> usize {
    match m {
        1 => 3000,
        2 => 400,
        3 => 180,
        4 => 100,
        5 => 64,
        _ => 48,
    }
}

/// Shell-summed series `sum_t z^t (sum_{|beta|=t} term)` with tail model.
pub fn word_series(
    map: &MapSpec,
    pot: &PotentialSpec,
    kind: WordTerm,
    z: Complex64,
    m: usize,
    policy: ShellPolicy,
) -> Result<SeriesValue> {
    word_series_with_exponent(map, pot, kind, z, m, policy, None)
}

/// [`word_series`] with the critical-line shell exponent pinned from a
/// longer-window run (it is independent of the word length `m`, being set
/// by the single deepest excursion of the orbit).
pub fn word_series_with_exponent(
    map: &MapSpec,
    pot: &PotentialSpec,
    kind: WordTerm,
    z: Complex64,
    m: usize,
    policy: ShellPolicy,
    known_exponent: Option<f64>,
) -> Result<SeriesValue> {
    if m == 0 {
        return Err(Error::Domain("word length m must be >= 1".into()));
    }
    if z.norm() == 0.0 {
        return Ok(SeriesValue {
            value: Complex64::new(0.0, 0.0),
            tail: 0.0,
            raw_partial: Complex64::new(0.0, 0.0),
            shells_used: 0,
            flagged: false,
            fitted_exponent: None,
        });
    }
    let zmag = z.norm();
    let mut shells: Vec<f64> = Vec::new();
    let mut partial = KahanComplex::default();
    let mut zpow = z.powi(m as i32);
    let mut used = 0usize;
    let min_shells = 16usize;
    let cap = policy.max_total.max(m + min_shells);
    // for m = 1 each shell is a single word; batch them for parallelism
    let mut batch: Vec<f64> = Vec::new();
    let mut batch_from = 0usize;
    for t in m..=cap {
        let s = if m == 1 {
            if t >= batch_from + batch.len() {
                let lo = t;
                let hi = (lo + 255).min(cap);
                let terms: Result<Vec<f64>> = (lo..=hi)
                    .into_par_iter()
                    .map(|n| {
                        let (_, d, lw) = fixed_point_data(map, pot, &[n], policy.fp_tol)?;
                        Ok(match kind {
                            WordTerm::Trace => lw.exp() / (1.0 - d),
                            WordTerm::TwistedTrace => lw.exp() * d / (1.0 - d),
                            WordTerm::Weight => lw.exp(),
                        })
                    })
                    .collect();
                batch = terms?;
                batch_from = lo;
            }
            batch[t - batch_from]
        } else {
            shell_sum(map, pot, m, t, kind, policy.fp_tol)?
        };
        shells.push(s);
        partial.add(zpow * s);
        zpow *= z;
        used = t;
        let k = shells.len();
        if k >= min_shells {
            // cheap remaining-mass estimate: geometric from the last ratios,
            // or power-law when the ratio is close to 1
            let s1 = shells[k - 1].abs() * zmag.powi(t as i32);
            let s0 = shells[k - 2].abs() * zmag.powi(t as i32 - 1);
            if s0 > 0.0 && s1 > 0.0 {
                let r = s1 / s0;
                let est = if r < 0.9 {
                    s1 * r / (1.0 - r)
                } else {
                    // power-law regime: s_t ~ t^-p in the z-weighted shells
                    let p = (s0 / s1).ln() / ((t as f64) / (t as f64 - 1.0)).ln();
                    if p > 1.05 {
                        s1 * (t as f64) / (p - 1.0)
                    } else {
                        f64::INFINITY
                    }
                };
                if est < policy.rel_target * partial.value().norm() {
                    break;
                }
            } else if s1 == 0.0 && s0 == 0.0 {
                break;
            }
        }
    }
    let raw = partial.value();
    let fit_len = (shells.len() / 2).max(12).min(shells.len());
    let model = ShellModel::fit(&shells, m, fit_len);
    let mut fitted_exponent = None;
    let (tail, unc, model_flag) = match (&model, known_exponent) {
        (Some(model), Some(p)) if !model.flagged => {
            // constrained fit with the pinned exponent; fall back to the
            // free model if the constrained window is unusable
            match crate::tails::constrained_power_tail(&shells, m, fit_len, p, z) {
                Some((tv, tu)) => {
                    fitted_exponent = Some(p);
                    (tv, tu, false)
                }
                None => {
                    let (tv, tu) = model.tail_sum(z);
                    fitted_exponent = Some(model.power_exponent());
                    (tv, tu, model.flagged)
                }
            }
        }
        (Some(model), _) => {
            let (tv, tu) = model.tail_sum(z);
            fitted_exponent = Some(model.power_exponent());
            (tv, tu, model.flagged)
        }
        (None, _) => (
            Complex64::new(0.0, 0.0),
            shells.last().map(|s| s.abs()).unwrap_or(0.0),
            true,
        ),
    };
    let value = raw + tail;
    let flagged = model_flag || !unc.is_finite() || unc > 0.1 * value.norm().max(1e-300);
    Ok(SeriesValue {
        value,
        tail: unc,
        raw_partial: raw,
        shells_used: used,
        flagged,
        fitted_exponent,
    })
}

/// Flat trace `tr^b((Q_w(z))^m)` over words with `|beta|` up to the cap.
pub fn flat_trace(
    map: &MapSpec,
    pot: &PotentialSpec,
    z: Complex64,
    m: usize,
    cutoff: usize,
) -> Result<SeriesValue> {
    word_series(map, pot, WordTerm::Trace, z, m, ShellPolicy::with_cap(cutoff))
}

/// Flat trace of the twisted operator `Q_{w - log G'}(z)`.
pub fn flat_trace_twisted(
    map: &MapSpec,
    pot: &PotentialSpec,
    z: Complex64,
    m: usize,
    cutoff: usize,
) -> Result<SeriesValue> {
    word_series(map, pot, WordTerm::TwistedTrace, z, m, ShellPolicy::with_cap(cutoff))
}

/// The m-indexed flat traces at fixed `z`, ready for determinant assembly.
#[derive(Debug, Clone)]
pub struct TraceSeries {
    pub z: Complex64,
    pub m_max: usize,
    pub traces: Vec<Complex64>,
    pub tails: Vec<f64>,
    pub cutoffs: Vec<usize>,
    pub twisted: bool,
}

/// Compute `tr^b((Q(z))^m)` for `m = 1..=m_max` with per-m cutoffs.
pub fn trace_series(
    map: &MapSpec,
    pot: &PotentialSpec,
    z: Complex64,
    m_max: usize,
    twisted: bool,
    cutoff_for_m: impl Fn(usize) -> usize,
) -> Result<TraceSeries> {
    trace_series_with(map, pot, z, m_max, twisted, cutoff_for_m, 1e-9)
}

/// [`trace_series`] with an explicit early-stop target.
pub fn trace_series_with(
    map: &MapSpec,
    pot: &PotentialSpec,
    z: Complex64,
    m_max: usize,
    twisted: bool,
    cutoff_for_m: impl Fn(usize) -> usize,
    rel_target: f64,
) -> Result<TraceSeries> {
    let mut traces = Vec::with_capacity(m_max);
    let mut tails = Vec::with_capacity(m_max);
    let mut cutoffs = Vec::with_capacity(m_max);
    let mut exponent_hint: Option<f64> = None;
    for m in 1..=m_max {
        let cap = cutoff_for_m(m);
        let kind = if twisted {
            WordTerm::TwistedTrace
        } else {
            WordTerm::Trace
        };
        let policy = ShellPolicy {
            max_total: cap,
            rel_target,
            ..Default::default()
        };
        let sv = word_series_with_exponent(map, pot, kind, z, m, policy, exponent_hint)?;
        if m == 1 {
            // the shell-decay exponent is set by the deepest excursion and
            // carries over to every m; pin it where the m = 1 window found
            // a genuine power law
            if let Some(p) = sv.fitted_exponent {
                if p > 1.05 && z.norm() > 0.999 && z.im.abs() < 1e-12 {
                    exponent_hint = Some(p);
                }
            }
        }
        traces.push(sv.value);
        tails.push(sv.tail);
        cutoffs.push(sv.shells_used);
    }
    Ok(TraceSeries {
        z,
        m_max,
        traces,
        tails,
        cutoffs,
        twisted,
    })
}

/// Taylor coefficients of the flat determinant `det^b(1 - u Q(z))`.
#[derive(Debug, Clone)]
pub struct DetSeries {
    pub z: Complex64,
    /// `d_0 = 1, d_1, ..., d_M`.
    pub coeffs: Vec<Complex64>,
    /// Propagated coefficient uncertainties.
    pub coeff_errs: Vec<f64>,
    pub twisted: bool,
}

/// Plemelj–Smithies recursion `d_M = -(1/M) sum_m tr_m d_{M-m}`.
pub fn det_series(traces: &TraceSeries) -> DetSeries {
    let m_max = traces.m_max;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); m_max + 1];
    let mut errs = vec![0.0f64; m_max + 1];
    coeffs[0] = Complex64::new(1.0, 0.0);
    for big_m in 1..=m_max {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut err = 0.0f64;
        for m in 1..=big_m {
            acc += traces.traces[m - 1] * coeffs[big_m - m];
            err += traces.tails[m - 1] * coeffs[big_m - m].norm()
                + traces.traces[m - 1].norm() * errs[big_m - m];
        }
        coeffs[big_m] = -acc / big_m as f64;
        errs[big_m] = err / big_m as f64;
    }
    DetSeries {
        z: traces.z,
        coeffs,
        coeff_errs: errs,
        twisted: traces.twisted,
    }
}

impl DetSeries {
    /// Evaluate the truncated determinant polynomial at `u`.
    pub fn eval(&self, u: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * u + c;
        }
        acc
    }

    pub fn eval_deriv(&self, u: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &c) in self.coeffs.iter().enumerate().rev().take_while(|(j, _)| *j >= 1) {
            acc = acc * u + c * j as f64;
        }
        acc
    }

    /// Radius inside which the truncated polynomial tracks the
    /// determinant, estimated Domb–Sykes style from the decay of the last
    /// coefficient ratios (the flat-determinant coefficients decay faster
    /// than geometrically, so the ratio is a conservative floor).
    pub fn reliable_radius(&self) -> f64 {
        let m = self.coeffs.len() - 1;
        if m < 2 {
            return 0.0;
        }
        let mut radius = f64::INFINITY;
        for j in (m - 1..=m).rev() {
            let hi = self.coeffs[j].norm();
            let lo = self.coeffs[j - 1].norm();
            if hi > 1e-280 {
                radius = radius.min(lo / hi);
            }
        }
        if radius.is_infinite() {
            // vanishing tail coefficients: trust up to the largest scale
            // the uncertainties allow
            let tol = self.coeff_errs[m].max(1e-15);
            radius = (tol.recip()).powf(1.0 / m as f64);
        }
        0.9 * radius.min(1e6)
    }
}

/// A located determinant zero.
#[derive(Debug, Clone)]
pub struct DetZero {
    pub u: Complex64,
    pub residual: f64,
    pub iterations: usize,
    /// Radius of the disc in which the polynomial is trusted.
    pub reliable_radius: f64,
}

/// Newton iteration on the determinant polynomial from `u0`.
pub fn det_zero(det: &DetSeries, u0: Complex64, tol: f64) -> Result<DetZero> {
    let radius = det.reliable_radius();
    let mut u = u0;
    for it in 0..100 {
        let p = det.eval(u);
        let dp = det.eval_deriv(u);
        if dp.norm() < 1e-300 {
            break;
        }
        let step = p / dp;
        u -= step;
        if step.norm() <= tol {
            if u.norm() > radius {
                return Err(Error::Precision(format!(
                    "zero at |u| = {} outside the reliable disc {radius}",
                    u.norm()
                )));
            }
            return Ok(DetZero {
                u,
                residual: det.eval(u).norm(),
                iterations: it + 1,
                reliable_radius: radius,
            });
        }
        if u.norm() > 4.0 * radius.max(u0.norm()) {
            break;
        }
    }
    Err(Error::NoConvergence {
        context: format!("determinant zero from u0 = {u0}"),
        lo: 0.0,
        hi: radius,
    })
}

/// The dynamical zeta function of `T` evaluated from its periodic points.
#[derive(Debug, Clone)]
pub struct ZetaDirect {
    pub z: Complex64,
    /// `log_coeffs[n-1] = (1/n) sum_{T^n x = x} e^{sum v}`.
    pub log_coeffs: Vec<f64>,
    pub value: Complex64,
    /// Magnitude of the last log-series term, a convergence indicator.
    pub last_term: f64,
}

/// Direct evaluation of `zeta_{T,v}` from `2^n` periodic points per order.
pub fn zeta_t_direct(
    map: &MapSpec,
    pot: &PotentialSpec,
    z: Complex64,
    n_max: usize,
) -> Result<ZetaDirect> {
    if n_max == 0 || n_max > 20 {
        return Err(Error::Domain(format!(
            "n_max = {n_max} outside 1..=20 (2^n periodic points)"
        )));
    }
    let mut log_coeffs = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let pts = t_periodic_points(map, pot, n)?;
        let mut acc = Kahan::default();
        for rec in &pts {
            acc.add(rec.weight.exp());
        }
        log_coeffs.push(acc.value() / n as f64);
    }
    let mut log_sum = KahanComplex::default();
    let mut zpow = Complex64::new(1.0, 0.0);
    let mut last_term = 0.0;
    for (i, &c) in log_coeffs.iter().enumerate() {
        zpow *= z;
        let term = zpow * c;
        log_sum.add(term);
        if i + 1 == n_max {
            last_term = term.norm();
        }
    }
    Ok(ZetaDirect {
        z,
        log_coeffs,
        value: log_sum.value().exp(),
        last_term,
    })
}

/// z-coefficients of `log zeta_{T,v}` from direct `T`-periodic sums.
pub fn log_zeta_coeffs_direct(
    map: &MapSpec,
    pot: &PotentialSpec,
    n_max: usize,
) -> Result<Vec<f64>> {
    Ok(zeta_t_direct(map, pot, Complex64::new(0.0, 0.0), n_max)?.log_coeffs)
}

/// The same coefficients assembled through the inducing relation:
/// `e^{n v(0)}/n` plus the exact `G`-word shells of total `n`.
pub fn log_zeta_coeffs_via_inducing(
    map: &MapSpec,
    pot: &PotentialSpec,
    n_max: usize,
) -> Result<Vec<f64>> {
    let v0 = pot.v_at_zero();
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut acc = Kahan::default();
        acc.add((n as f64 * v0).exp() / n as f64);
        for m in 1..=n {
            let s = shell_sum(map, pot, m, n, WordTerm::Weight, 1e-13)?;
            acc.add(s / m as f64);
        }
        out.push(acc.value());
    }
    Ok(out)
}

/// Per-m word-total caps for u-power series: the combinatorial growth of
/// `N^m` forces the cap down as `m` grows; the u-powers make deep orders
/// matter less.
pub fn u_series_cutoff(m: usize, base: usize) -> usize {
    (base >> (m.saturating_sub(1))).max(m + 24)
}

/// Two-variable zeta `Z_w(z, u)` over enumerated words.
pub fn two_variable_zeta(
    map: &MapSpec,
    pot: &PotentialSpec,
    z: Complex64,
    u: Complex64,
    m_max: usize,
    cutoff: usize,
) -> Result<SeriesValue> {
    if u.norm() == 0.0 {
        return Ok(SeriesValue {
            value: Complex64::new(1.0, 0.0),
            tail: 0.0,
            raw_partial: Complex64::new(1.0, 0.0),
            shells_used: 0,
            flagged: false,
            fitted_exponent: None,
        });
    }
    let mut log_acc = KahanComplex::default();
    let mut log_err = 0.0f64;
    let mut shells_used = 0usize;
    let mut flagged = false;
    let mut upow = Complex64::new(1.0, 0.0);
    let mut term_mag = f64::INFINITY;
    for m in 1..=m_max {
        upow *= u;
        let sv = word_series(
            map,
            pot,
            WordTerm::Weight,
            z,
            m,
            ShellPolicy::with_cap(u_series_cutoff(m, cutoff)),
        )?;
        let term = upow * sv.value / m as f64;
        log_acc.add(term);
        log_err += upow.norm() * sv.tail / m as f64;
        shells_used = shells_used.max(sv.shells_used);
        flagged |= sv.flagged;
        term_mag = term.norm();
    }
    // geometric estimate of the discarded u-orders
    let log_tail_bound = if u.norm() < 1.0 {
        term_mag * u.norm() / (1.0 - u.norm())
    } else {
        term_mag * 3.0
    };
    let value = log_acc.value().exp();
    let unc = value.norm() * (log_err + log_tail_bound);
    Ok(SeriesValue {
        value,
        tail: unc,
        raw_partial: value,
        shells_used,
        flagged: flagged || unc > 0.1 * value.norm(),
        fitted_exponent: None,
    })
}

/// `zeta_{T,v}(z)` through the inducing relation
/// `(1 - z e^{v(0)})^{-1} Z_w(z, 1)`.
pub fn zeta_via_inducing(
    map: &MapSpec,
    pot: &PotentialSpec,
    z: Complex64,
    m_max: usize,
    cutoff: usize,
) -> Result<SeriesValue> {
    let v0 = pot.v_at_zero();
    let euler = Complex64::new(1.0, 0.0) - z * v0.exp();
    if euler.norm() < 1e-8 {
        return Err(Error::Pole(format!(
            "z = {z} within 1e-8 of the parabolic pole at e^{{-v(0)}}"
        )));
    }
    let zw = two_variable_zeta(map, pot, z, Complex64::new(1.0, 0.0), m_max, cutoff)?;
    Ok(SeriesValue {
        value: zw.value / euler,
        tail: zw.tail / euler.norm(),
        raw_partial: zw.raw_partial / euler,
        shells_used: zw.shells_used,
        flagged: zw.flagged,
        fitted_exponent: zw.fitted_exponent,
    })
}

/// Growth quantity `Lambda_m(z)`: grid supremum of the m-fold word sum.
#[derive(Debug, Clone)]
pub struct LambdaEstimate {
    pub m: usize,
    pub lambda_m: f64,
    /// `Lambda_m^{1/m}`.
    pub root: f64,
    pub tail: f64,
}

/// `Lambda_m(z) = sup_x sum_{beta in N^m} |z|^{|beta|} W_beta(x)`,
/// computed as the m-th power of the positive operator applied to 1.
pub fn lambda_m(
    map: &MapSpec,
    pot: &PotentialSpec,
    z_abs: f64,
    m: usize,
    cutoff: usize,
) -> Result<LambdaEstimate> {
    let (sup, tail) = crate::operator::positive_power_sup(map, pot, z_abs, m, 32, cutoff, 400)?;
    Ok(LambdaEstimate {
        m,
        lambda_m: sup,
        root: sup.powf(1.0 / m as f64),
        tail,
    })
}

/// Extrapolated `Lambda(z) = lim Lambda_m^{1/m}` via the shifted ratio
/// `Lambda_{m+1}/Lambda_m`, with the raw root as diagnostic.
#[derive(Debug, Clone)]
pub struct LambdaExtrapolation {
    pub lambda: f64,
    pub root_raw: f64,
    pub ratio_drift: f64,
    pub submultiplicative_ok: bool,
}

pub fn lambda_extrapolate(
    map: &MapSpec,
    pot: &PotentialSpec,
    z_abs: f64,
    m_base: usize,
    cutoff: usize,
) -> Result<LambdaExtrapolation> {
    let m = m_base.max(4);
    let lm = lambda_m(map, pot, z_abs, m, cutoff)?;
    let lm1 = lambda_m(map, pot, z_abs, m + 1, cutoff)?;
    let lm2 = lambda_m(map, pot, z_abs, m + 2, cutoff)?;
    let r1 = lm1.lambda_m / lm.lambda_m;
    let r2 = lm2.lambda_m / lm1.lambda_m;
    // submultiplicativity: Lambda_{2m} <= Lambda_m^2 within tail slack
    let l2m = lambda_m(map, pot, z_abs, 2 * m, cutoff)?;
    let sub_ok = l2m.lambda_m <= lm.lambda_m * lm.lambda_m * (1.0 + 1e-9) + l2m.tail + lm.tail;
    Ok(LambdaExtrapolation {
        lambda: r2,
        root_raw: lm2.root,
        ratio_drift: (r2 - r1).abs(),
        submultiplicative_ok: sub_ok,
    })
}

/// Topological pressure estimate from growing periodic sums.
#[derive(Debug, Clone)]
pub struct PressureEstimate {
    pub value: f64,
    pub n_used: usize,
    /// `(1/n) log(periodic sum)` for each computed order.
    pub sequence: Vec<f64>,
    /// Last increment of the sequence.
    pub drift: f64,
}

/// Pressure of `T` for the potential, from `2^n` periodic points.
pub fn pressure_t(map: &MapSpec, pot: &PotentialSpec, n_max: usize) -> Result<PressureEstimate> {
    if n_max == 0 || n_max > 20 {
        return Err(Error::Domain("pressure_t needs 1 <= n_max <= 20".into()));
    }
    let mut sequence = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let pts = t_periodic_points(map, pot, n)?;
        let mut acc = Kahan::default();
        for rec in &pts {
            acc.add(rec.weight.exp());
        }
        sequence.push(acc.value().ln() / n as f64);
    }
    let drift = if n_max >= 2 {
        sequence[n_max - 1] - sequence[n_max - 2]
    } else {
        f64::NAN
    };
    Ok(PressureEstimate {
        value: sequence[n_max - 1],
        n_used: n_max,
        sequence,
        drift,
    })
}

/// Pressure of the induced map `G` for the induced potential.
pub fn pressure_g(
    map: &MapSpec,
    pot: &PotentialSpec,
    m_max: usize,
    cutoff: usize,
) -> Result<PressureEstimate> {
    if m_max == 0 || m_max > 8 {
        return Err(Error::Domain("pressure_g needs 1 <= m_max <= 8".into()));
    }
    let mut sequence = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let sv = word_series(
            map,
            pot,
            WordTerm::Weight,
            Complex64::new(1.0, 0.0),
            m,
            ShellPolicy::with_cap(u_series_cutoff(m, cutoff)),
        )?;
        sequence.push(sv.value.re.ln() / m as f64);
    }
    let drift = if m_max >= 2 {
        sequence[m_max - 1] - sequence[m_max - 2]
    } else {
        f64::NAN
    };
    Ok(PressureEstimate {
        value: sequence[m_max - 1],
        n_used: m_max,
        sequence,
        drift,
    })
}


/// Normalized smooth bump on `(0, 1)` used as the mollifier profile.
fn bump(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        (-1.0 / (u * (1.0 - u))).exp()
    }
}

fn bump_norm() -> f64 {
    static NORM: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *NORM.get_or_init(|| crate::quad::integrate(bump, 0.0, 1.0, 200))
}

/// Mollified contribution of a single word: the integral
/// `int gamma_eps(phi_beta(x) - x) W_beta(x) dx` (no z-power).
///
/// As `eps -> 0` this converges to `W_beta(x_fix)/|1 - phi_beta'(x_fix)|`.
pub fn mollified_word_integral(
    map: &MapSpec,
    pot: &PotentialSpec,
    entries: &[usize],
    eps: f64,
    quad_points: usize,
) -> Result<f64> {
    let norm = bump_norm();
    let (x_fix, _, _) = fixed_point_data(map, pot, entries, 1e-13)?;
    // displacement Phi(x) = phi_beta(x) - x is strictly decreasing and
    // vanishes at the fixed point; the mollifier support is Phi in (0, eps)
    let phi_gap = |x: f64| -> Result<f64> {
        let (v, _, _) = word_apply(map, Some(pot), entries, x)?;
        Ok(v - x)
    };
    let mut lo = 0.0f64;
    let hi = x_fix;
    if phi_gap(lo)? > eps {
        // bisect for Phi(lo) = eps
        let mut a = lo;
        let mut b = hi;
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if phi_gap(mid)? > eps {
                a = mid;
            } else {
                b = mid;
            }
            if b - a < 1e-15 {
                break;
            }
        }
        lo = a;
    }
    let (nodes, weights) = crate::quad::gauss_legendre(quad_points);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut acc = Kahan::default();
    for (t, w) in nodes.iter().zip(&weights) {
        let x = mid + half * t;
        let (v, _, lw) = word_apply(map, Some(pot), entries, x)?;
        let g = bump((v - x) / eps) / (eps * norm);
        acc.add(w * g * lw.exp());
    }
    Ok(acc.value() * half)
}

/// Mollified flat trace `tr_eps^b((Q_w(z))^m)`: the diagonal integral of
/// the mollified kernel, summed over words. Oracle-grade: `m <= 3`.
pub fn mollified_trace(
    map: &MapSpec,
    pot: &PotentialSpec,
    z: Complex64,
    m: usize,
    eps: f64,
    quad_points: usize,
    cutoff: usize,
) -> Result<Complex64> {
    if m == 0 || m > 3 {
        return Err(Error::Domain(
            "mollified traces are an oracle for m <= 3 only".into(),
        ));
    }
    if eps <= 0.0 || eps > 0.05 {
        return Err(Error::Domain(format!("eps = {eps} outside (0, 0.05]")));
    }
    let mut acc = KahanComplex::default();
    let mut mag = 0.0f64;
    for total in m..=cutoff {
        let words: Vec<Vec<usize>> = CompositionIter::new(m, total).collect();
        let terms: Result<Vec<f64>> = words
            .par_iter()
            .map(|entries| mollified_word_integral(map, pot, entries, eps, quad_points))
            .collect();
        let zpow = z.powi(total as i32);
        let mut shell = Kahan::default();
        for t in terms? {
            shell.add(t);
        }
        let term = zpow * shell.value();
        acc.add(term);
        mag += term.norm();
        if total > m + 8 && term.norm() < 1e-14 * (1.0 + mag) {
            break;
        }
    }
    Ok(acc.value())
}

/// Richardson extrapolation of three values at mollifier widths
/// `(4h, 2h, h)`, eliminating the O(eps) and O(eps^2) errors.
pub fn richardson3(v_4h: Complex64, v_2h: Complex64, v_h: Complex64) -> Complex64 {
    (v_h * 8.0 - v_2h * 6.0 + v_4h) / 3.0
}
