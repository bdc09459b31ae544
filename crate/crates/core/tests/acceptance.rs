//! Acceptance suite: literature-anchored constants and cross-route
//! identities, one criterion per test, each printing a PASS line with its
//! measured numbers (run with `--nocapture` to see them).
//!
//! Two checks assert accuracy targets that exact enumeration cannot
//! certify at desk scale; they fail with full diagnostics rather than run
//! with loosened bounds. See `ulam_cross_method_note` and
//! `determinant_zero_note` below for the measured limits.

use num_complex::Complex64;
use parazeta::continuation::{lindelof_continue, ContinuationProblem, ContourSpec};
use parazeta::induced::{chebyshev_grid, phi_point};
use parazeta::operator::collocation_matrix;
use parazeta::spectral::{
    inducing_identity_residual, l0_functional_residual, spectrum, BumpFunction,
};
use parazeta::traces::{
    det_series, det_zero, flat_trace, lambda_extrapolate, lambda_m, log_zeta_coeffs_direct,
    log_zeta_coeffs_via_inducing, mollified_trace, pressure_t, richardson3, trace_series_with,
};
use parazeta::ulam::gkw_ulam_oracle;
use parazeta::words::{fixed_point, Word};
use parazeta::{MapSpec, PotentialSpec};

const GKW: f64 = 0.3036630029;

fn farey_pf() -> (MapSpec, PotentialSpec) {
    (MapSpec::farey(), PotentialSpec::log_deriv(1.0))
}

#[test]
fn criterion_01_farey_induces_gauss_branches() {
    let t0 = std::time::Instant::now();
    let map = MapSpec::farey();
    let mut worst = 0.0f64;
    for level in 1..=40 {
        for i in 0..20 {
            let x = (i as f64 + 0.5) / 20.0;
            let v = phi_point(&map, level, x).unwrap();
            worst = worst.max((v - 1.0 / (level as f64 + x)).abs());
        }
    }
    println!(
        "criterion 01 branch identity: PASS  max|phi_l(x) - 1/(l+x)| = {worst:.2e} \
         (bound 1e-12), {} ms",
        t0.elapsed().as_millis()
    );
    assert!(worst <= 1e-12);
}

#[test]
fn criterion_02_golden_silver_fixed_points() {
    let t0 = std::time::Instant::now();
    let (map, pot) = farey_pf();
    let cases: [(&[usize], f64); 3] = [
        (&[1], (5f64.sqrt() - 1.0) / 2.0),
        (&[2], 2f64.sqrt() - 1.0),
        (&[1, 2], 3f64.sqrt() - 1.0),
    ];
    let mut worst = 0.0f64;
    for (entries, oracle) in cases {
        let rec = fixed_point(&map, &pot, &Word::new(entries.to_vec()).unwrap(), 1e-13).unwrap();
        worst = worst.max((rec.x_fix - oracle).abs());
    }
    println!(
        "criterion 02 quadratic fixed points: PASS  max deviation {worst:.2e} \
         (bound 1e-10), {} ms",
        t0.elapsed().as_millis()
    );
    assert!(worst <= 1e-10);
}

#[test]
fn criterion_03a_gauss_collocation_eigenvalues() {
    let t0 = std::time::Instant::now();
    let (map, pot) = farey_pf();
    let op = collocation_matrix(&map, &pot, Complex64::new(1.0, 0.0), 30, 20_000).unwrap();
    let eig = spectrum(&op, 2).unwrap();
    let e1 = (eig[0] - Complex64::new(1.0, 0.0)).norm();
    let e2 = (eig[1].re - -GKW).abs();
    println!(
        "criterion 03a collocation benchmark: PASS  |lambda1 - 1| = {e1:.2e} (bound 1e-8), \
         |lambda2 + {GKW}| = {e2:.2e} (bound 1e-3), {} ms",
        t0.elapsed().as_millis()
    );
    assert!(e1 <= 1e-8);
    assert!(e2 <= 1e-3);
}

/// Measured limit (see the repository notes): the subleading eigenvalue of
/// piecewise-constant Ulam matrices carries noise at the 1e-4..1e-3 scale
/// in this resolution range (intruding discretization eigenvalues), so
/// 1e-6 cross-method agreement is not certifiable at dense-matrix scale.
/// The assert keeps the stated bound; the printed numbers document the gap.
#[test]
fn criterion_03b_ulam_cross_method() {
    let t0 = std::time::Instant::now();
    let (map, pot) = farey_pf();
    let op = collocation_matrix(&map, &pot, Complex64::new(1.0, 0.0), 30, 20_000).unwrap();
    let eig = spectrum(&op, 2).unwrap();
    let oracle = gkw_ulam_oracle(4096).unwrap();
    let gap = (eig[1].re - oracle.lambda2).abs();
    let status = if gap <= 1e-6 { "PASS" } else { "FAIL" };
    println!(
        "criterion 03b ulam cross-method: {status}  |colloc - ulam| = {gap:.2e} (bound 1e-6); \
         ulam lambda2 = {:.8} with cross-resolution spread {:.2e}; {} ms",
        oracle.lambda2,
        oracle.spread,
        t0.elapsed().as_millis()
    );
    assert!(
        gap <= 1e-6,
        "cross-method gap {gap:.3e} exceeds 1e-6: the Ulam subleading eigenvalue \
         carries O(1e-4) discretization noise (spread {:.2e} across resolutions \
         {:?}); the 1e-3 anchor in criterion 03a is the certifiable form",
        oracle.spread,
        oracle.by_resolution
    );
}

/// Measured limit: the u = 1 determinant zero lands within ~1e-5..1e-4 and
/// the second zero within a few 1e-2 of 1/lambda_2 with exact word sums
/// capped at desk scale; the stated 1e-6 / 1e-2 bounds are asserted
/// unchanged and the diagnostics document the achieved accuracy.
#[test]
fn criterion_03c_determinant_zeros() {
    let t0 = std::time::Instant::now();
    let (map, pot) = farey_pf();
    let cutoffs = [2000usize, 300, 150, 100, 68];
    let ts = trace_series_with(
        &map,
        &pot,
        Complex64::new(1.0, 0.0),
        5,
        false,
        |m| cutoffs[m - 1],
        1e-10,
    )
    .unwrap();
    let det = det_series(&ts);
    let z1 = det_zero(&det, Complex64::new(0.9, 0.0), 1e-12).unwrap();
    let e1 = (z1.u - Complex64::new(1.0, 0.0)).norm();
    let z2 = det_zero(&det, Complex64::new(3.2, 0.0), 1e-12);
    let elapsed = t0.elapsed().as_millis();
    let (e2, z2_str) = match &z2 {
        Ok(zr) => ((zr.u.re - 1.0 / GKW).abs(), format!("{:.6}", zr.u.re)),
        Err(e) => (f64::INFINITY, format!("not found: {e}")),
    };
    let status = if e1 <= 1e-6 && e2 <= 1e-2 { "PASS" } else { "FAIL" };
    println!(
        "criterion 03c determinant zeros: {status}  |u1 - 1| = {e1:.2e} (bound 1e-6), \
         second zero {z2_str} vs {:.4} -> {e2:.2e} (bound 1e-2); {elapsed} ms \
         (runtime bound 30 s)",
        1.0 / GKW
    );
    assert!(
        e1 <= 1e-6,
        "u = 1 zero off by {e1:.3e}: trace shells at the critical line decay like \
         t^-2, so the m = 4, 5 trace tails limit the zero to ~2e-4 at word-total \
         caps {cutoffs:?} ({elapsed} ms wall) and to ~1.9e-4 at caps \
         [3000,400,200,130,90] (221 s wall, 7x the stated 30 s budget); the \
         1e-6 target is out of reach for exact enumeration at desk scale"
    );
    assert!(e2 <= 1e-2, "second determinant zero off by {e2:.3e}");
}

#[test]
fn criterion_04_flat_trace_equivalence() {
    let t0 = std::time::Instant::now();
    let (map, pot) = farey_pf();
    let mut worst = 0.0f64;
    for z in [
        Complex64::new(0.5, 0.0),
        Complex64::new(0.8, 0.0),
        Complex64::new(0.5, 0.3),
    ] {
        for m in [1usize, 2] {
            let direct = flat_trace(&map, &pot, z, m, 400).unwrap();
            let vals: Vec<Complex64> = [4e-3, 2e-3, 1e-3]
                .iter()
                .map(|&e| mollified_trace(&map, &pot, z, m, e, 64, 80).unwrap())
                .collect();
            let extr = richardson3(vals[0], vals[1], vals[2]);
            worst = worst.max((extr - direct.value).norm() / direct.value.norm());
        }
    }
    println!(
        "criterion 04 trace vs mollified: PASS  worst relative difference {worst:.2e} \
         (bound 1e-4), {} ms",
        t0.elapsed().as_millis()
    );
    assert!(worst <= 1e-4);
}

#[test]
fn criterion_05_coefficient_level_inducing_identity() {
    let t0 = std::time::Instant::now();
    let map = MapSpec::farey();
    let mut worst = 0.0f64;
    for pot in [PotentialSpec::constant(-1.0), PotentialSpec::log_deriv(1.0)] {
        let direct = log_zeta_coeffs_direct(&map, &pot, 6).unwrap();
        let induced = log_zeta_coeffs_via_inducing(&map, &pot, 6).unwrap();
        for n in 0..6 {
            worst = worst.max((direct[n] - induced[n]).abs() / direct[n].abs());
        }
    }
    println!(
        "criterion 05 inducing identity (coefficients): PASS  worst relative \
         difference {worst:.2e} (bound 1e-8), {} ms",
        t0.elapsed().as_millis()
    );
    assert!(worst <= 1e-8);
}

#[test]
fn criterion_06_operator_inducing_identity() {
    let t0 = std::time::Instant::now();
    let map = MapSpec::farey();
    let pot = PotentialSpec::constant(-1.0);
    let grid = chebyshev_grid(101);
    let f = |x: f64| x * (1.0 - x);
    let r =
        inducing_identity_residual(&map, &pot, Complex64::new(0.5, 0.0), &f, &grid, 4000).unwrap();
    println!(
        "criterion 06 operator identity: PASS  residual {r:.2e} (bound 1e-9), {} ms",
        t0.elapsed().as_millis()
    );
    assert!(r <= 1e-9);
}

#[test]
fn criterion_07_parabolic_eigenfunction_family() {
    let t0 = std::time::Instant::now();
    let map = MapSpec::farey();
    let bump = BumpFunction::new(map.partition_point()).unwrap();
    let f = |x: f64| bump.eval(x);
    let grid = chebyshev_grid(101);
    let mut worst = 0.0f64;
    // 16 sample points on the disc |lambda| <= 0.9: two rings of eight
    for ring in [0.45, 0.9] {
        for k in 0..8 {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / 8.0;
            let lambda = Complex64::from_polar(ring, angle);
            let r = l0_functional_residual(&map, lambda, &f, &grid).unwrap();
            worst = worst.max(r);
        }
    }
    println!(
        "criterion 07 eigenfunction family: PASS  worst functional residual {worst:.2e} \
         (bound 1e-6), {} ms",
        t0.elapsed().as_millis()
    );
    assert!(worst <= 1e-6);
}

#[test]
fn criterion_08_lindelof_continuation() {
    let t0 = std::time::Instant::now();
    let coeffs: Vec<f64> = (1..=2000).map(|k| (-(k as f64)).exp()).collect();
    let problem = ContinuationProblem::new(coeffs, -1.0, 0.1, ContourSpec::default()).unwrap();
    // outside the disc: closed form z e^{-1} / (1 - z e^{-1}) at z = -4
    let z_out = Complex64::new(-4.0, 0.0);
    let expect = {
        let ze = z_out * (-1.0f64).exp();
        ze / (Complex64::new(1.0, 0.0) - ze)
    };
    let got_out = lindelof_continue(&problem, z_out).unwrap();
    let e_out = (got_out.value - expect).norm();
    // inside the disc: direct series at z = 0.5 + 0.3i
    let z_in = Complex64::new(0.5, 0.3);
    let direct: Complex64 = {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut zp = Complex64::new(1.0, 0.0);
        for k in 1..=2000 {
            zp *= z_in;
            acc += zp * (-(k as f64)).exp();
        }
        acc
    };
    let got_in = lindelof_continue(&problem, z_in).unwrap();
    let e_in = (got_in.value - direct).norm();
    // sector exclusion
    let excluded = lindelof_continue(&problem, Complex64::new(4.0, 0.0));
    println!(
        "criterion 08 continuation: PASS  |q(-4) - closed form| = {e_out:.2e} (bound 1e-6), \
         inside-disc difference {e_in:.2e} (bound 1e-8), z = 4 rejected: {}, {} ms",
        excluded.is_err(),
        t0.elapsed().as_millis()
    );
    assert!(e_out <= 1e-6);
    assert!(e_in <= 1e-8);
    assert!(excluded.is_err());
}

#[test]
fn criterion_09_lambda_eigenvalue_link() {
    let t0 = std::time::Instant::now();
    let (map, pot) = farey_pf();
    let mut worst = 0.0f64;
    for zr in [0.3, 0.7, 1.0] {
        let op = collocation_matrix(&map, &pot, Complex64::new(zr, 0.0), 28, 20_000).unwrap();
        let leading = spectrum(&op, 1).unwrap()[0].re;
        let extr = lambda_extrapolate(&map, &pot, zr, 8, 20_000).unwrap();
        let rel = (extr.lambda - leading).abs() / leading;
        worst = worst.max(rel);
        assert!(
            extr.submultiplicative_ok,
            "submultiplicativity violated at z = {zr}"
        );
    }
    // submultiplicativity in the stated form: Lambda_4 <= Lambda_2^2
    let l2 = lambda_m(&map, &pot, 0.7, 2, 20_000).unwrap();
    let l4 = lambda_m(&map, &pot, 0.7, 4, 20_000).unwrap();
    let sub_ok = l4.lambda_m <= l2.lambda_m * l2.lambda_m + l4.tail + l2.tail + 1e-12;
    println!(
        "criterion 09 growth/eigenvalue link: PASS  worst relative gap {worst:.2e} \
         (bound 2e-2), Lambda_4 <= Lambda_2^2: {sub_ok}, {} ms",
        t0.elapsed().as_millis()
    );
    assert!(worst <= 2e-2);
    assert!(sub_ok);
}

#[test]
fn criterion_10_marker_asymptotics() {
    let t0 = std::time::Instant::now();
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0] {
        let map = MapSpec::lsv(alpha).unwrap();
        let markers = map.markers(20_000).unwrap();
        let scaled = |l: usize| markers[l] * (l as f64).powf(1.0 / alpha);
        let drift = (scaled(10_000) / scaled(20_000) - 1.0).abs();
        worst = worst.max(drift);
    }
    println!(
        "criterion 10 marker asymptotics: PASS  worst relative drift {worst:.2e} \
         (bound 1e-2), {} ms",
        t0.elapsed().as_millis()
    );
    assert!(worst <= 1e-2);
}

#[test]
fn criterion_11_pressure_sanity() {
    let t0 = std::time::Instant::now();
    let map = MapSpec::farey();
    let p_pf = pressure_t(&map, &PotentialSpec::log_deriv(1.0), 14).unwrap();
    let p_ent = pressure_t(&map, &PotentialSpec::constant(0.0), 14).unwrap();
    let e_pf = p_pf.value.abs();
    let e_ent = (p_ent.value - 2f64.ln()).abs();
    println!(
        "criterion 11 pressure: PASS  |P(-log|T'|)| = {e_pf:.3} (bound 0.05), \
         |P(0) - log 2| = {e_ent:.2e} (bound 0.02), {} ms",
        t0.elapsed().as_millis()
    );
    assert!(e_pf <= 0.05);
    assert!(e_ent <= 0.02);
}
