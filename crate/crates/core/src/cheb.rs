//! Chebyshev–Lobatto nodes on `[0,1]` and barycentric interpolation.
//!
//! The collocation discretization samples functions at these nodes and
//! reconstructs them through the cardinal (Lagrange) basis; smooth branch
//! weights then give spectral accuracy. The differentiation matrix is
//! assembled from the barycentric weights, so any affine node map works.

/// Ascending Chebyshev–Lobatto points mapped to `[0, 1]`, `n + 1` nodes.
pub fn lobatto_nodes(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    (0..=n)
        .map(|j| 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / n as f64).cos()))
        .collect()
}

/// Barycentric weights for the Lobatto nodes (up to common scaling).
pub fn lobatto_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                0.5 * sign
            } else {
                sign
            }
        })
        .collect()
}

/// Values of every cardinal basis polynomial at `y`.
///
/// `out[j] = L_j(y)` with `L_j(x_i) = delta_ij`. Exact at nodes.
pub fn cardinal_row(nodes: &[f64], weights: &[f64], y: f64, out: &mut [f64]) {
    debug_assert_eq!(nodes.len(), weights.len());
    debug_assert_eq!(nodes.len(), out.len());
    for (i, &x) in nodes.iter().enumerate() {
        if (y - x).abs() < 1e-300 {
            out.fill(0.0);
            out[i] = 1.0;
            return;
        }
    }
    let mut denom = 0.0;
    for ((o, &x), &w) in out.iter_mut().zip(nodes).zip(weights) {
        let c = w / (y - x);
        *o = c;
        denom += c;
    }
    for o in out.iter_mut() {
        *o /= denom;
    }
}

/// Barycentric evaluation of sampled data at `y`.
pub fn interpolate(nodes: &[f64], weights: &[f64], samples: &[f64], y: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&x, &w), &f) in nodes.iter().zip(weights).zip(samples) {
        let d = y - x;
        if d.abs() < 1e-300 {
            return f;
        }
        let c = w / d;
        num += c * f;
        den += c;
    }
    num / den
}

/// Differentiation matrix `D[i][j] = L_j'(x_i)` from barycentric weights.
pub fn diff_matrix(nodes: &[f64], weights: &[f64]) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (weights[j] / weights[i]) / (nodes[i] - nodes[j]);
                d[i][j] = v;
                diag -= v;
            }
        }
        d[i][i] = diag;
    }
    d
}

/// Matrix product helper for small dense row-major matrices.
pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}
