//! Experiment configs and command dispatch.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::Deserialize;

use parazeta::config::{MapConfig, PotentialConfig};
use parazeta::continuation::{
    lindelof_continue, operator_coefficients, ContinuationProblem, ContourSpec,
};
use parazeta::induced::chebyshev_grid;
use parazeta::operator::collocation_matrix;
use parazeta::spectral::{
    inducing_identity_residual, l0_eigenfunction, spectrum, BumpFunction,
};
use parazeta::traces::{
    default_trace_cutoff, det_series, det_zero, flat_trace, lambda_m, mollified_trace,
    pressure_g, pressure_t, richardson3, trace_series, zeta_t_direct, zeta_via_inducing,
};
use parazeta::{Error as CoreError, MapSpec, PotentialSpec};

use crate::output::{fmt, write_table, Table};

/// Map a core error to the documented exit codes.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(core) = err.downcast_ref::<CoreError>() {
        match core {
            CoreError::Config(_) => 2,
            CoreError::Precision(_) | CoreError::NoConvergence { .. } => 3,
            CoreError::Domain(_) | CoreError::Boundary(_) | CoreError::Pole(_) => 4,
            CoreError::UnsupportedOrder { .. } => 4,
        }
    } else {
        // anything outside the core error set is a configuration problem
        2
    }
}

fn cx(pair: &[f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    map: MapConfig,
    potential: PotentialConfig,
    #[serde(default)]
    trace: Option<TraceBlock>,
    #[serde(default)]
    det: Option<DetBlock>,
    #[serde(default)]
    zeta: Option<ZetaBlock>,
    #[serde(default)]
    zeta_compare: Option<ZetaCompareBlock>,
    #[serde(default)]
    spectrum: Option<SpectrumBlock>,
    #[serde(default)]
    eigenfun: Option<EigenfunBlock>,
    #[serde(default, rename = "continue")]
    continuation: Option<ContinueBlock>,
    #[serde(default)]
    lambda: Option<LambdaBlock>,
    #[serde(default)]
    pressure: Option<PressureBlock>,
    #[serde(default)]
    check: Option<CheckBlock>,
    #[serde(default)]
    output: Option<OutputBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceBlock {
    z: [f64; 2],
    m_max: usize,
    #[serde(default)]
    cutoff: Option<usize>,
    /// Compare against the mollified oracle for m <= 2.
    #[serde(default)]
    mollified: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetBlock {
    z: [f64; 2],
    m_max: usize,
    #[serde(default)]
    twisted: bool,
    #[serde(default)]
    zero_seeds: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZetaBlock {
    z_list: Vec<[f64; 2]>,
    n_max: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZetaCompareBlock {
    z: [f64; 2],
    n_max: usize,
    m_max: usize,
    cutoff: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumBlock {
    z: [f64; 2],
    n_nodes: usize,
    #[serde(default)]
    branch_cutoff: Option<usize>,
    #[serde(default)]
    top: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EigenfunBlock {
    lambda: [f64; 2],
    #[serde(default)]
    grid: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContinueBlock {
    x: f64,
    /// Named test function: "one" or "x_times_one_minus_x".
    f: String,
    z_path: Vec<[f64; 2]>,
    #[serde(default)]
    eps: Option<f64>,
    #[serde(default)]
    n_coeffs: Option<usize>,
    #[serde(default)]
    line_real_part: Option<f64>,
    #[serde(default)]
    t_max: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LambdaBlock {
    z_abs: f64,
    m_list: Vec<usize>,
    #[serde(default)]
    cutoff: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PressureBlock {
    which: String,
    n_max: usize,
    #[serde(default)]
    cutoff: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckBlock {
    suite: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputBlock {
    #[serde(default)]
    format: Option<String>,
    #[serde(default)]
    path: Option<String>,
}

fn named_function(name: &str) -> Result<Box<dyn Fn(f64) -> f64 + Sync>> {
    match name {
        "one" => Ok(Box::new(|_| 1.0)),
        "x_times_one_minus_x" => Ok(Box::new(|x| x * (1.0 - x))),
        other => Err(anyhow!(CoreError::Config(format!(
            "unknown test function \"{other}\""
        )))),
    }
}

pub fn run(subcommand: &str, config_path: &Path, out: Option<&Path>, verbose: bool) -> Result<()> {
    let raw = std::fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let cfg: ExperimentConfig = serde_json::from_str(&raw)
        .map_err(|e| anyhow!(CoreError::Config(format!("experiment config: {e}"))))?;
    let map = cfg.map.build().map_err(|e| anyhow!(e))?;
    let pot = cfg.potential.build().map_err(|e| anyhow!(e))?;

    let (format, out_path) = resolve_output(&cfg, config_path, out, subcommand);
    let mut table;
    match subcommand {
        "map-info" => {
            table = Table::new(vec!["key", "value"]);
            table.push(vec!["family".into(), format!("{:?}", map.family())]);
            table.push(vec!["alpha".into(), fmt(map.alpha())]);
            table.push(vec!["partition_point".into(), fmt(map.partition_point())]);
            table.push(vec!["rho".into(), fmt(map.rho())]);
            table.push(vec!["epsilon".into(), fmt(map.epsilon())]);
            table.push(vec!["v_at_zero".into(), fmt(pot.v_at_zero())]);
            let markers = map.markers(8).map_err(|e| anyhow!(e))?;
            for (l, a) in markers.iter().enumerate() {
                table.push(vec![format!("marker_a{l}"), fmt(*a)]);
            }
            println!(
                "map-info: a = {} alpha = {} rho = {}",
                map.partition_point(),
                map.alpha(),
                map.rho()
            );
        }
        "trace" => {
            let block = cfg
                .trace
                .as_ref()
                .ok_or_else(|| anyhow!(CoreError::Config("missing \"trace\" block".into())))?;
            let z = cx(&block.z);
            table = Table::new(vec!["m", "value_re", "value_im", "tail", "mollified_re", "mollified_im"]);
            for m in 1..=block.m_max {
                let cutoff = block.cutoff.unwrap_or_else(|| default_trace_cutoff(m));
                let sv = flat_trace(&map, &pot, z, m, cutoff).map_err(|e| anyhow!(e))?;
                let (mre, mim) = if block.mollified && m <= 2 {
                    let vals: Vec<Complex64> = [4e-3, 2e-3, 1e-3]
                        .iter()
                        .map(|&e| mollified_trace(&map, &pot, z, m, e, 64, 80))
                        .collect::<parazeta::Result<_>>()
                        .map_err(|e| anyhow!(e))?;
                    let r = richardson3(vals[0], vals[1], vals[2]);
                    (fmt(r.re), fmt(r.im))
                } else {
                    ("".into(), "".into())
                };
                println!(
                    "trace m={m}: {} + {}i (tail {})",
                    sv.value.re, sv.value.im, sv.tail
                );
                table.push(vec![
                    m.to_string(),
                    fmt(sv.value.re),
                    fmt(sv.value.im),
                    fmt(sv.tail),
                    mre,
                    mim,
                ]);
            }
        }
        "det" => {
            let block = cfg
                .det
                .as_ref()
                .ok_or_else(|| anyhow!(CoreError::Config("missing \"det\" block".into())))?;
            let z = cx(&block.z);
            let ts = trace_series(&map, &pot, z, block.m_max, block.twisted, default_trace_cutoff)
                .map_err(|e| anyhow!(e))?;
            let det = det_series(&ts);
            table = Table::new(vec!["coefficient", "value_re", "value_im", "tail"]);
            for (j, (c, e)) in det.coeffs.iter().zip(&det.coeff_errs).enumerate() {
                table.push(vec![format!("d{j}"), fmt(c.re), fmt(c.im), fmt(*e)]);
            }
            for seed in &block.zero_seeds {
                let zr = det_zero(&det, cx(seed), 1e-10).map_err(|e| anyhow!(e))?;
                println!(
                    "det zero from {}: u = {} + {}i (residual {})",
                    cx(seed),
                    zr.u.re,
                    zr.u.im,
                    zr.residual
                );
                table.push(vec![
                    format!("zero_from_{}_{}", seed[0], seed[1]),
                    fmt(zr.u.re),
                    fmt(zr.u.im),
                    fmt(zr.residual),
                ]);
            }
            println!(
                "det: {} coefficients at z = {z} (reliable radius {})",
                det.coeffs.len(),
                det.reliable_radius()
            );
        }
        "zeta" => {
            let block = cfg
                .zeta
                .as_ref()
                .ok_or_else(|| anyhow!(CoreError::Config("missing \"zeta\" block".into())))?;
            table = Table::new(vec!["z_re", "z_im", "value_re", "value_im", "last_log_term"]);
            for zp in &block.z_list {
                let z = cx(zp);
                let zd = zeta_t_direct(&map, &pot, z, block.n_max).map_err(|e| anyhow!(e))?;
                println!("zeta({z}) = {} + {}i (last term {})", zd.value.re, zd.value.im, zd.last_term);
                table.push(vec![
                    fmt(z.re),
                    fmt(z.im),
                    fmt(zd.value.re),
                    fmt(zd.value.im),
                    fmt(zd.last_term),
                ]);
            }
        }
        "zeta-compare" => {
            let block = cfg.zeta_compare.as_ref().ok_or_else(|| {
                anyhow!(CoreError::Config("missing \"zeta_compare\" block".into()))
            })?;
            let z = cx(&block.z);
            let direct = zeta_t_direct(&map, &pot, z, block.n_max).map_err(|e| anyhow!(e))?;
            let induced = zeta_via_inducing(&map, &pot, z, block.m_max, block.cutoff)
                .map_err(|e| anyhow!(e))?;
            let rel = (direct.value - induced.value).norm() / direct.value.norm().max(1e-300);
            println!(
                "zeta-compare at {z}: direct {} vs induced {} (relative difference {rel:.3e})",
                direct.value.re, induced.value.re
            );
            table = Table::new(vec!["quantity", "value_re", "value_im", "tail"]);
            table.push(vec![
                "direct".into(),
                fmt(direct.value.re),
                fmt(direct.value.im),
                fmt(direct.last_term),
            ]);
            table.push(vec![
                "induced".into(),
                fmt(induced.value.re),
                fmt(induced.value.im),
                fmt(induced.tail),
            ]);
            table.push(vec!["relative_difference".into(), fmt(rel), fmt(0.0), fmt(0.0)]);
        }
        "spectrum" => {
            let block = cfg
                .spectrum
                .as_ref()
                .ok_or_else(|| anyhow!(CoreError::Config("missing \"spectrum\" block".into())))?;
            let z = cx(&block.z);
            let op = collocation_matrix(
                &map,
                &pot,
                z,
                block.n_nodes,
                block.branch_cutoff.unwrap_or(20_000),
            )
            .map_err(|e| anyhow!(e))?;
            let eigs = spectrum(&op, block.top.unwrap_or(6)).map_err(|e| anyhow!(e))?;
            table = Table::new(vec!["rank", "eigenvalue_re", "eigenvalue_im", "tail"]);
            for (i, e) in eigs.iter().enumerate() {
                table.push(vec![i.to_string(), fmt(e.re), fmt(e.im), fmt(op.tail_bound)]);
            }
            println!(
                "spectrum at z = {z}: leading {} (branch tail bound {:.2e})",
                eigs[0].re, op.tail_bound
            );
        }
        "eigenfun" => {
            let block = cfg
                .eigenfun
                .as_ref()
                .ok_or_else(|| anyhow!(CoreError::Config("missing \"eigenfun\" block".into())))?;
            let lambda = cx(&block.lambda);
            let bump = BumpFunction::new(map.partition_point()).map_err(|e| anyhow!(e))?;
            let f = move |x: f64| bump.eval(x);
            let grid = chebyshev_grid(block.grid.unwrap_or(101));
            let samples = l0_eigenfunction(&map, lambda, &f, &grid).map_err(|e| anyhow!(e))?;
            table = Table::new(vec!["x", "re", "im"]);
            for (x, v) in grid.iter().zip(&samples) {
                table.push(vec![fmt(*x), fmt(v.re), fmt(v.im)]);
            }
            let residual = parazeta::spectral::l0_functional_residual(&map, lambda, &f, &grid)
                .map_err(|e| anyhow!(e))?;
            println!("eigenfun at lambda = {lambda}: functional residual {residual:.3e}");
        }
        "continue" => {
            let block = cfg.continuation.as_ref().ok_or_else(|| {
                anyhow!(CoreError::Config("missing \"continue\" block".into()))
            })?;
            let f = named_function(&block.f)?;
            let contour = ContourSpec {
                line_real_part: block.line_real_part.unwrap_or(0.5),
                t_max: block.t_max.unwrap_or(40.0),
                ..Default::default()
            };
            let coeffs = operator_coefficients(
                &map,
                &pot,
                f.as_ref(),
                block.x,
                block.n_coeffs.unwrap_or(2000),
            )
            .map_err(|e| anyhow!(e))?;
            let problem = ContinuationProblem::new(
                coeffs,
                pot.v_at_zero(),
                block.eps.unwrap_or(0.1),
                contour,
            )
            .map_err(|e| anyhow!(e))?;
            table = Table::new(vec!["z_re", "z_im", "q_re", "q_im", "tail_estimate"]);
            for zp in &block.z_path {
                let z = cx(zp);
                let cv = lindelof_continue(&problem, z).map_err(|e| anyhow!(e))?;
                println!(
                    "continue at z = {z}: {} + {}i (tail {:.3e}, {:?})",
                    cv.value.re, cv.value.im, cv.tail, cv.route
                );
                table.push(vec![
                    fmt(z.re),
                    fmt(z.im),
                    fmt(cv.value.re),
                    fmt(cv.value.im),
                    fmt(cv.tail),
                ]);
            }
        }
        "lambda" => {
            let block = cfg
                .lambda
                .as_ref()
                .ok_or_else(|| anyhow!(CoreError::Config("missing \"lambda\" block".into())))?;
            table = Table::new(vec!["m", "lambda_m", "root", "tail"]);
            for &m in &block.m_list {
                let est = lambda_m(&map, &pot, block.z_abs, m, block.cutoff.unwrap_or(20_000))
                    .map_err(|e| anyhow!(e))?;
                println!(
                    "lambda_{m}({}) = {} (root {}, tail {:.2e})",
                    block.z_abs, est.lambda_m, est.root, est.tail
                );
                table.push(vec![
                    m.to_string(),
                    fmt(est.lambda_m),
                    fmt(est.root),
                    fmt(est.tail),
                ]);
            }
        }
        "pressure" => {
            let block = cfg
                .pressure
                .as_ref()
                .ok_or_else(|| anyhow!(CoreError::Config("missing \"pressure\" block".into())))?;
            let est = match block.which.as_str() {
                "T" => pressure_t(&map, &pot, block.n_max).map_err(|e| anyhow!(e))?,
                "G" => pressure_g(&map, &pot, block.n_max, block.cutoff.unwrap_or(2000))
                    .map_err(|e| anyhow!(e))?,
                other => bail!(CoreError::Config(format!(
                    "pressure \"which\" must be T or G, got {other}"
                ))),
            };
            println!(
                "pressure_{}: {} at n = {} (drift {:.2e})",
                block.which, est.value, est.n_used, est.drift
            );
            table = Table::new(vec!["n", "estimate", "drift", "tail"]);
            for (i, s) in est.sequence.iter().enumerate() {
                table.push(vec![(i + 1).to_string(), fmt(*s), fmt(est.drift), fmt(0.0)]);
            }
        }
        "check" => {
            let block = cfg
                .check
                .as_ref()
                .ok_or_else(|| anyhow!(CoreError::Config("missing \"check\" block".into())))?;
            table = Table::new(vec!["check", "observed", "bound", "status"]);
            let failures = run_checks(&map, &pot, &block.suite, &mut table, verbose)?;
            if failures > 0 {
                write_table(&table, &format, &out_path, &raw, subcommand)?;
                bail!(CoreError::Precision(format!(
                    "{failures} cross-validation check(s) failed"
                )));
            }
        }
        other => bail!(CoreError::Config(format!(
            "unknown subcommand \"{other}\" (map-info|trace|det|zeta|zeta-compare|\
             spectrum|eigenfun|continue|lambda|pressure|check)"
        ))),
    }
    write_table(&table, &format, &out_path, &raw, subcommand)?;
    println!("wrote {}", out_path.display());
    Ok(())
}

fn resolve_output(
    cfg: &ExperimentConfig,
    config_path: &Path,
    out: Option<&Path>,
    subcommand: &str,
) -> (String, PathBuf) {
    let format = cfg
        .output
        .as_ref()
        .and_then(|o| o.format.clone())
        .unwrap_or_else(|| "csv".into());
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| {
        cfg.output
            .as_ref()
            .and_then(|o| o.path.clone())
            .map(PathBuf::from)
            .unwrap_or_else(|| {
                config_path.with_file_name(format!(
                    "{}.{}",
                    subcommand,
                    if format == "json" { "json" } else { "csv" }
                ))
            })
    });
    (format, path)
}

/// The cross-validation suites behind the `check` subcommand.
fn run_checks(
    map: &MapSpec,
    pot: &PotentialSpec,
    suite: &str,
    table: &mut Table,
    verbose: bool,
) -> Result<usize> {
    let mut failures = 0usize;
    let all = suite == "all";
    let mut record = |name: &str, observed: f64, bound: f64| {
        let ok = observed <= bound;
        if !ok {
            failures += 1;
        }
        println!(
            "check {name}: {observed:.3e} (bound {bound:.1e}) {}",
            if ok { "ok" } else { "FAIL" }
        );
        table.push(vec![
            name.into(),
            fmt(observed),
            fmt(bound),
            if ok { "ok".into() } else { "fail".into() },
        ]);
    };

    if all || suite == "trace-vs-mollified" {
        let z = Complex64::new(0.5, 0.0);
        for m in 1..=2usize {
            let direct = flat_trace(map, pot, z, m, 400).map_err(|e| anyhow!(e))?;
            let vals: Vec<Complex64> = [4e-3, 2e-3, 1e-3]
                .iter()
                .map(|&e| mollified_trace(map, pot, z, m, e, 64, 60))
                .collect::<parazeta::Result<_>>()
                .map_err(|e| anyhow!(e))?;
            let extr = richardson3(vals[0], vals[1], vals[2]);
            let rel = (extr - direct.value).norm() / direct.value.norm().max(1e-300);
            record(&format!("trace-vs-mollified-m{m}"), rel, 1e-4);
        }
    }
    if all || suite == "zeta-relation" {
        let z = Complex64::new(0.3, 0.0);
        let direct = zeta_t_direct(map, pot, z, 14).map_err(|e| anyhow!(e))?;
        let induced = zeta_via_inducing(map, pot, z, 8, 600).map_err(|e| anyhow!(e))?;
        let rel = (direct.value - induced.value).norm() / direct.value.norm().max(1e-300);
        record("zeta-relation", rel, 1e-6);
    }
    if all || suite == "inducing-identity" {
        let grid = chebyshev_grid(101);
        let f = |x: f64| x * (1.0 - x);
        let r = inducing_identity_residual(map, pot, Complex64::new(0.5, 0.0), &f, &grid, 4000)
            .map_err(|e| anyhow!(e))?;
        record("inducing-identity", r, 1e-9);
    }
    if all || suite == "continuation-overlap" {
        if pot.v_at_zero() < 0.0 {
            let x = 0.5;
            let coeffs =
                operator_coefficients(map, pot, &|_| 1.0, x, 1500).map_err(|e| anyhow!(e))?;
            let z = Complex64::from_polar(0.9, 3.0);
            let direct: Complex64 = {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut zp = Complex64::new(1.0, 0.0);
                for &a in &coeffs {
                    zp *= z;
                    acc += zp * a;
                }
                acc
            };
            let problem =
                ContinuationProblem::new(coeffs, pot.v_at_zero(), 0.1, ContourSpec::default())
                    .map_err(|e| anyhow!(e))?;
            let cv = lindelof_continue(&problem, z).map_err(|e| anyhow!(e))?;
            record(
                "continuation-overlap",
                (cv.value - direct).norm(),
                1e-7,
            );
        } else if verbose {
            println!("check continuation-overlap: skipped (v(0) >= 0)");
        }
    }
    Ok(failures)
}
