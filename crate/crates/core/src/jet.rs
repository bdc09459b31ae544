//! Truncated Taylor data of scalar functions.
//!
//! A [`Jet`] stores the value and the first `K` derivatives of a function
//! at a point. Products follow Leibniz' rule, compositions follow Faà di
//! Bruno's rule; both are implemented through the normalized Taylor
//! coefficients `f^(k)/k!`, which keeps the recursions short and stable.
//! Deep compositions of inverse branches stay exact to roundoff, which is
//! what trace denominators and induced weights require.

/// Value plus derivatives up to order `K` at an (implicit) base point.
///
/// `coeffs[k]` is the k-th derivative; `coeffs[0]` the value.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    /// Jet with the given derivatives `(value, f', f'', ...)`.
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least a value");
        Jet { coeffs }
    }

    /// Constant function: value `c`, all derivatives zero.
    pub fn constant(c: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        Jet { coeffs }
    }

    /// The identity `x ↦ x` at base point `x`.
    pub fn variable(x: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = x;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Jet { coeffs }
    }

    /// Truncation order `K` (number of stored derivatives).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// k-th derivative; panics if `k` exceeds the order.
    pub fn deriv(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Truncate or zero-extend to the given order.
    pub fn resized(&self, order: usize) -> Jet {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, 0.0);
        Jet { coeffs }
    }

    /// Normalized Taylor coefficients `f^(k)/k!`.
    fn taylor(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    fact *= k as f64;
                }
                c / fact
            })
            .collect()
    }

    fn from_taylor(taylor: Vec<f64>) -> Jet {
        let mut fact = 1.0;
        let coeffs = taylor
            .into_iter()
            .enumerate()
            .map(|(k, t)| {
                if k > 0 {
                    fact *= k as f64;
                }
                t * fact
            })
            .collect();
        Jet { coeffs }
    }

    fn common_order(&self, other: &Jet) -> usize {
        self.order().min(other.order())
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let n = self.common_order(other);
        Jet::new((0..=n).map(|k| self.coeffs[k] + other.coeffs[k]).collect())
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let n = self.common_order(other);
        Jet::new((0..=n).map(|k| self.coeffs[k] - other.coeffs[k]).collect())
    }

    pub fn neg(&self) -> Jet {
        Jet::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet::new(self.coeffs.iter().map(|c| s * c).collect())
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += s;
        Jet { coeffs }
    }

    /// Leibniz product.
    #[allow(clippy::needless_range_loop)]
    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.common_order(other);
        let mut out = vec![0.0; n + 1];
        let mut binom = vec![vec![0.0f64; n + 1]; n + 1];
        for j in 0..=n {
            binom[j][0] = 1.0;
            for i in 1..=j {
                binom[j][i] = binom[j - 1][i - 1] + if i < j { binom[j - 1][i] } else { 0.0 };
            }
        }
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..=j {
                acc += binom[j][i] * self.coeffs[i] * other.coeffs[j - i];
            }
            *o = acc;
        }
        Jet { coeffs: out }
    }

    /// Reciprocal `1/f`; requires a nonzero value.
    pub fn reciprocal(&self) -> Jet {
        let f = self.taylor();
        let n = self.order();
        let mut r = vec![0.0; n + 1];
        r[0] = 1.0 / f[0];
        for k in 1..=n {
            let mut acc = 0.0;
            for i in 1..=k {
                acc += f[i] * r[k - i];
            }
            r[k] = -acc / f[0];
        }
        Jet::from_taylor(r)
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self.mul(&other.reciprocal())
    }

    /// Faà di Bruno composition: jet of `f ∘ g` at `g`'s base point.
    ///
    /// `self` must be the jet of `f` at the point `g.value()`.
    pub fn compose(&self, inner: &Jet) -> Jet {
        let n = self.common_order(inner);
        let f = self.resized(n).taylor();
        let mut g = inner.resized(n).taylor();
        g[0] = 0.0; // expand around the inner value
        // Horner on truncated power series.
        let mut h = vec![0.0; n + 1];
        h[0] = f[n];
        for j in (0..n).rev() {
            h = series_mul(&h, &g, n);
            h[0] += f[j];
        }
        Jet::from_taylor(h)
    }

    /// Exponential of a jet.
    pub fn exp(&self) -> Jet {
        let f = self.taylor();
        let n = self.order();
        let mut e = vec![0.0; n + 1];
        e[0] = f[0].exp();
        for k in 1..=n {
            let mut acc = 0.0;
            for i in 1..=k {
                acc += (i as f64) * f[i] * e[k - i];
            }
            e[k] = acc / k as f64;
        }
        Jet::from_taylor(e)
    }

    /// `ln|f|`; the derivative recursion is insensitive to the sign of `f`.
    pub fn ln_abs(&self) -> Jet {
        let f = self.taylor();
        let n = self.order();
        let mut l = vec![0.0; n + 1];
        l[0] = f[0].abs().ln();
        for k in 1..=n {
            let mut acc = (k as f64) * f[k];
            for i in 1..k {
                acc -= (i as f64) * l[i] * f[k - i];
            }
            l[k] = acc / (k as f64 * f[0]);
        }
        Jet::from_taylor(l)
    }

    /// Real power `f^alpha` for positive values.
    pub fn powf(&self, alpha: f64) -> Jet {
        self.ln_abs().scale(alpha).exp()
    }

    /// Jet of the derivative function `f'`, one order lower.
    pub fn derivative(&self) -> Jet {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        Jet::new(self.coeffs[1..].to_vec())
    }

    /// Compositional inverse: jet of `f^{-1}` at `f.value()`.
    ///
    /// Requires `f'(x0) != 0`. The inverse's base point is `y0 = f(x0)`
    /// and its value is the original base point `x0`, supplied by the
    /// caller since jets do not carry their base point.
    pub fn invert(&self, x0: f64) -> Jet {
        let n = self.order();
        assert!(n >= 1 && self.coeffs[1] != 0.0, "inverse needs f' != 0");
        let mut c = self.taylor();
        c[0] = 0.0;
        let mut d = vec![0.0; n + 1];
        d[1] = 1.0 / c[1];
        for k in 2..=n {
            // composition C(D(t)) truncated at k with current partial D
            let mut h = vec![0.0; k + 1];
            h[0] = c[n.min(k)];
            let dk = &d[..=k];
            for j in (0..n.min(k)).rev() {
                h = series_mul(&h, dk, k);
                h[0] += c[j];
            }
            d[k] = -h[k] / c[1];
        }
        d[0] = x0;
        Jet::from_taylor(d)
    }
}

fn series_mul(a: &[f64], b: &[f64], order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    for (i, ai) in a.iter().enumerate().take(order + 1) {
        if *ai == 0.0 {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}
