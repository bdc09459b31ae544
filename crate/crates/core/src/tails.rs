//! Truncation-tail models for shell-indexed series.
//!
//! Every infinite sum in this crate is organized in shells (by branch index
//! or by word total). The computed shells are summed exactly; the discarded
//! shells are modeled by a log-linear fit `log s_t = c0 + g t - p ln t + c2/t`,
//! which covers geometric decay (`g < 0`), the critical power-law regime
//! (`g ~ 0`, e.g. the Perron-Frobenius potential at z = 1), and mixtures.
//! Tail sums against `z^t` are evaluated by Hurwitz zeta values at `z = 1`
//! and by model extension otherwise. Fits are estimates, not certificates;
//! every consumer carries the reported uncertainty alongside the value.

use num_complex::Complex64;

/// Compensated (Kahan) summation; the accumulation order is fixed by the
/// caller so results are independent of thread count.
#[derive(Debug, Clone, Default)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Kahan summation for complex values.
#[derive(Debug, Clone, Default)]
pub struct KahanComplex {
    re: Kahan,
    im: Kahan,
}

impl KahanComplex {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Hurwitz zeta `sum_{k>=0} (a+k)^{-s}` for `s > 1`, `a > 0`,
/// by Euler–Maclaurin with three Bernoulli corrections.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta needs s > 1, a > 0");
    let cut = 18.0f64.max(s);
    let m = if a >= cut { 0 } else { (cut - a).ceil() as usize };
    let mut head = Kahan::default();
    for k in 0..m {
        head.add((a + k as f64).powf(-s));
    }
    let b = a + m as f64;
    let mut tail = b.powf(1.0 - s) / (s - 1.0) + 0.5 * b.powf(-s);
    // Bernoulli terms B2/2! s b^{-s-1} + B4/4! s(s+1)(s+2) b^{-s-3} + ...
    let mut rising = s;
    tail += (1.0 / 12.0) * rising * b.powf(-s - 1.0);
    rising *= (s + 1.0) * (s + 2.0);
    tail += (-1.0 / 720.0) * rising * b.powf(-s - 3.0);
    rising *= (s + 3.0) * (s + 4.0);
    tail += (1.0 / 30240.0) * rising * b.powf(-s - 5.0);
    head.value() + tail
}

/// Fitted model for positive decreasing shells.
///
/// Two fits are kept: the general model with a geometric regressor, and a
/// pure power-law model used on the critical line `|z| e^{v(0)} = 1` where
/// the geometric part is absent by construction. Each carries a
/// self-calibrated extrapolation error (full- vs half-window fit
/// disagreement probed beyond the data).
#[derive(Debug, Clone)]
pub struct ShellModel {
    geom: FitParams,
    pow: FitParams,
    geom_extrap: f64,
    pow_extrap: f64,
    /// Sign carried by all fitted shells.
    pub sign: f64,
    /// Set when shells were non-monotone or mixed-sign; the model then
    /// only bounds magnitudes.
    pub flagged: bool,
    /// Last shell index used in the fit.
    pub t_hi: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct FitParams {
    c0: f64,
    g: f64,
    p: f64,
    c2: f64,
    residual: f64,
}

impl FitParams {
    fn eval_log(&self, t: f64) -> f64 {
        self.c0 + self.g * t - self.p * t.ln() + self.c2 / t
    }
}

/// Least squares of `log|s_t|` on `[1, t, ln t, 1/t]`; the geometric
/// regressor is included only when `with_g` is set.
fn fit_window(window: &[f64], first_t: usize, with_g: bool) -> Option<FitParams> {
    let use_len = window.len();
    if use_len < 4 {
        return None;
    }
    let use_c2 = use_len >= 8;
    let cols: &[usize] = match (with_g, use_c2) {
        (true, true) => &[0, 1, 2, 3],
        (true, false) => &[0, 1, 2],
        (false, true) => &[0, 2, 3],
        (false, false) => &[0, 2],
    };
    let dim = cols.len();
    let mut ata = [[0.0f64; 4]; 4];
    let mut atb = [0.0f64; 4];
    for (i, &s) in window.iter().enumerate() {
        let t = (first_t + i) as f64;
        let y = s.abs().ln();
        let full_row = [1.0, t, t.ln(), 1.0 / t];
        for r in 0..dim {
            for c in 0..dim {
                ata[r][c] += full_row[cols[r]] * full_row[cols[c]];
            }
            atb[r] += full_row[cols[r]] * y;
        }
    }
    let sol = solve_small(&mut ata, &mut atb, dim)?;
    let mut packed = [0.0f64; 4];
    for (r, &c) in cols.iter().enumerate() {
        packed[c] = sol[r];
    }
    let params = FitParams {
        c0: packed[0],
        g: packed[1],
        p: -packed[2],
        c2: packed[3],
        residual: 0.0,
    };
    let mut resid = 0.0;
    for (i, &s) in window.iter().enumerate() {
        let t = (first_t + i) as f64;
        resid += (s.abs().ln() - params.eval_log(t)).powi(2);
    }
    Some(FitParams {
        residual: (resid / use_len as f64).sqrt(),
        ..params
    })
}

fn extrapolation_spread(window: &[f64], first_t: usize, t_hi: usize, with_g: bool) -> f64 {
    let use_len = window.len();
    if use_len < 8 {
        return 0.1;
    }
    let full = match fit_window(window, first_t, with_g) {
        Some(f) => f,
        None => return 0.1,
    };
    let half_len = use_len / 2;
    let half =
        match fit_window(&window[use_len - half_len..], first_t + use_len - half_len, with_g) {
            Some(f) => f,
            None => return 0.1,
        };
    let mut worst = 0.0f64;
    for factor in [1.25, 2.0, 4.0] {
        let t = t_hi as f64 * factor;
        let d = (full.eval_log(t) - half.eval_log(t)).abs();
        worst = worst.max(d.exp_m1().abs());
    }
    worst
}

impl ShellModel {
    /// Modeled shell magnitude at continuous index `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.geom.eval_log(t).exp()
    }

    /// Fitted geometric rate `e^g` of the general model.
    pub fn geometric_rate(&self) -> f64 {
        self.geom.g.exp()
    }

    /// Fitted power-law exponent of the critical-line model.
    pub fn power_exponent(&self) -> f64 {
        self.pow.p
    }

    /// Fit the last `use_len` entries of `shells`, which start at index
    /// `t_start`. Returns `None` when fewer than 4 usable shells exist.
    pub fn fit(shells: &[f64], t_start: usize, use_len: usize) -> Option<ShellModel> {
        let n = shells.len();
        let use_len = use_len.min(n);
        if use_len < 4 {
            return None;
        }
        let window = &shells[n - use_len..];
        let first_t = t_start + n - use_len;
        let t_hi = t_start + n - 1;
        let sign = window[use_len - 1].signum();
        if window.iter().any(|&s| s == 0.0 || s.signum() != sign) {
            return Some(ShellModel {
                geom: FitParams::default(),
                pow: FitParams::default(),
                geom_extrap: f64::INFINITY,
                pow_extrap: f64::INFINITY,
                sign,
                flagged: true,
                t_hi,
            });
        }
        let mut non_monotone = false;
        for w in window.windows(2) {
            if w[1].abs() > w[0].abs() * 1.2 {
                non_monotone = true;
            }
        }
        let geom = fit_window(window, first_t, true)?;
        let pow = fit_window(window, first_t, false)?;
        Some(ShellModel {
            geom,
            pow,
            geom_extrap: extrapolation_spread(window, first_t, t_hi, true),
            pow_extrap: extrapolation_spread(window, first_t, t_hi, false),
            sign,
            flagged: non_monotone,
            t_hi,
        })
    }

    /// Modeled tail `sum_{t > t_hi} s_t z^t` with an uncertainty estimate.
    ///
    /// At `z = 1` with a negligible geometric part the sum reduces to
    /// Hurwitz zeta values of the power-law fit; otherwise the general
    /// model is extended term by term until the geometric factor has died
    /// out.
    pub fn tail_sum(&self, z: Complex64) -> (Complex64, f64) {
        if self.flagged {
            // magnitude-only geometric bound from the last fitted value
            let s_last = self.eval(self.t_hi as f64);
            let r = (self.eval((self.t_hi + 1) as f64) / s_last).min(0.99);
            let zr = z.norm() * r;
            let bound = if zr < 1.0 {
                s_last * z.norm().powi(self.t_hi as i32 + 1) * r / (1.0 - zr)
            } else {
                f64::INFINITY
            };
            return (Complex64::new(0.0, 0.0), bound);
        }
        let t0 = self.t_hi + 1;
        let on_critical_line = (z.re - 1.0).abs() < 1e-12
            && z.im.abs() < 1e-12
            && self.geom.g.abs() * (t0 as f64) < 0.05;
        if on_critical_line {
            if self.pow.p <= 1.0 + 1e-9 {
                return (Complex64::new(0.0, 0.0), f64::INFINITY);
            }
            let a = t0 as f64;
            let amp = self.pow.c0.exp();
            let z0 = hurwitz_zeta(self.pow.p, a);
            let z1 = hurwitz_zeta(self.pow.p + 1.0, a);
            let z2 = hurwitz_zeta(self.pow.p + 2.0, a);
            let sum = amp * (z0 + self.pow.c2 * z1 + 0.5 * self.pow.c2 * self.pow.c2 * z2);
            let value = self.sign * sum;
            let unc = sum * (2.0 * self.pow.residual + 2.0 * self.pow_extrap + 2.0 / (a * a));
            return (Complex64::new(value, 0.0), unc.abs());
        }
        let zeff = z.norm() * self.geom.g.exp();
        if zeff >= 0.9995 {
            // no absolutely controlled extension; report a magnitude bound
            let bound = self.eval(t0 as f64) * 2000.0;
            return (Complex64::new(0.0, 0.0), bound);
        }
        // model extension: terms decay at least like zeff^t
        let mut acc = KahanComplex::default();
        let mut mag = 0.0f64;
        let mut zpow = z.powi(t0 as i32);
        for t in t0..t0 + 4_000_000 {
            let st = self.sign * self.eval(t as f64);
            let term = zpow * st;
            acc.add(term);
            mag += term.norm();
            zpow *= z;
            if term.norm() < 1e-18 * (1.0 + mag) {
                break;
            }
        }
        let unc = mag
            * (2.0 * self.geom.residual
                + 2.0 * self.geom_extrap
                + 2.0 / (self.t_hi as f64).powi(2))
            + 1e-17 * mag;
        (acc.value(), unc)
    }
}

/// Solve a small symmetric positive system in place (Gaussian elimination
/// with partial pivoting). Returns `None` on numerical singularity.
#[allow(clippy::needless_range_loop)]
fn solve_small(a: &mut [[f64; 4]; 4], b: &mut [f64; 4], dim: usize) -> Option<[f64; 4]> {
    for col in 0..dim {
        let mut piv = col;
        for r in col + 1..dim {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-13 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..dim {
            let f = a[r][col] / a[col][col];
            for c in col..dim {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 4];
    for r in (0..dim).rev() {
        let mut acc = b[r];
        for c in r + 1..dim {
            acc -= a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    Some(x)
}


/// Tail of `sum_{t > t_hi} s_t z^t` with a KNOWN power-law exponent.
///
/// Fits `s_t t^p = A (1 + b/t + c/t^2)` over the window by linear least
/// squares; with the exponent pinned the fit is stable on short windows,
/// which the unconstrained model is not. Returns `(tail, uncertainty)`.
pub fn constrained_power_tail(
    shells: &[f64],
    t_start: usize,
    use_len: usize,
    p: f64,
    z: Complex64,
) -> Option<(Complex64, f64)> {
    let n = shells.len();
    let use_len = use_len.min(n);
    if use_len < 6 || p <= 1.0 {
        return None;
    }
    let window = &shells[n - use_len..];
    let first_t = t_start + n - use_len;
    let sign = window[use_len - 1].signum();
    if window.iter().any(|&s| s == 0.0 || s.signum() != sign) {
        return None;
    }
    let fit = |w: &[f64], ft: usize| -> Option<[f64; 3]> {
        let mut ata = [[0.0f64; 4]; 4];
        let mut atb = [0.0f64; 4];
        for (i, &s) in w.iter().enumerate() {
            let t = (ft + i) as f64;
            let y = s.abs() * t.powf(p);
            let row = [1.0, 1.0 / t, 1.0 / (t * t), 0.0];
            for r in 0..3 {
                for c in 0..3 {
                    ata[r][c] += row[r] * row[c];
                }
                atb[r] += row[r] * y;
            }
        }
        solve_small(&mut ata, &mut atb, 3).map(|x| [x[0], x[1], x[2]])
    };
    let full = fit(window, first_t)?;
    let half_len = use_len / 2;
    let half = fit(&window[use_len - half_len..], first_t + use_len - half_len)?;
    let a = (t_start + n) as f64;
    let tail_of = |coef: &[f64; 3]| -> f64 {
        coef[0] * hurwitz_zeta(p, a)
            + coef[1] * hurwitz_zeta(p + 1.0, a)
            + coef[2] * hurwitz_zeta(p + 2.0, a)
    };
    if (z.re - 1.0).abs() < 1e-12 && z.im.abs() < 1e-12 {
        let t_full = tail_of(&full);
        let t_half = tail_of(&half);
        let unc = 2.0 * (t_full - t_half).abs() + t_full.abs() * 2.0 / (a * a);
        return Some((Complex64::new(sign * t_full, 0.0), unc));
    }
    // |z| < 1: extend the fitted model termwise
    if z.norm() >= 1.0 {
        return None;
    }
    let model = |t: f64, coef: &[f64; 3]| -> f64 {
        (coef[0] + coef[1] / t + coef[2] / (t * t)) * t.powf(-p)
    };
    let mut acc = KahanComplex::default();
    let mut acc_half = KahanComplex::default();
    let mut zp = z.powi((t_start + n) as i32);
    let mut mag = 0.0;
    for ti in (t_start + n)..(t_start + n + 2_000_000) {
        let t = ti as f64;
        let term = zp * (sign * model(t, &full));
        acc.add(term);
        acc_half.add(zp * (sign * model(t, &half)));
        mag += term.norm();
        zp *= z;
        if term.norm() < 1e-18 * (1.0 + mag) {
            break;
        }
    }
    let unc = 2.0 * (acc.value() - acc_half.value()).norm() + mag * 2.0 / (a * a);
    Some((acc.value(), unc))
}
