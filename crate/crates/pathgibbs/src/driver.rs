//! Orchestration behind the `pathgibbs` binary: one function per
//! subcommand, each emitting CSV artifacts plus a manifest into an output
//! directory and returning the written paths.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::configuration::MarkedPoint;
use crate::constants::{self, CProvenance, ModelConstants};
use crate::csvio::{self, fmt_f64};
use crate::error::{Error, Result};
use crate::ks::{self, NeumannCorrelations, NeumannSolver};
use crate::langevin;
use crate::report;
use crate::rngutil::stream_rng;
use crate::runconfig::{CSource, RunConfig};
use crate::sampler;

/// Resolve the regularity constant per the config: a user value or the
/// estimator (empirical sup vs analytic bound, stricter wins).
pub fn resolve_constants(cfg: &RunConfig) -> Result<ModelConstants> {
    let phi = cfg.pair_potential()?;
    let psi = cfg.self_potential();
    let b_phi = cfg.resolve_b_phi()?;
    let (c_beta, provenance) = match cfg.c_source {
        CSource::Value(v) => (v, CProvenance::UserSupplied),
        CSource::Estimate => {
            let report = constants::regularity_constant(
                &phi,
                &psi,
                cfg.beta,
                &cfg.mark_sampler(),
                cfg.delta,
                64,
                4096,
                cfg.seed ^ 0xc0ffee,
                false,
            )?;
            let prov = if report
                .analytic_bound
                .map_or(false, |b| b >= report.empirical.value)
            {
                CProvenance::AnalyticBound
            } else {
                CProvenance::McEstimated
            };
            (report.used, prov)
        }
    };
    let mc = ModelConstants {
        beta: cfg.beta,
        b_phi,
        bbar_phi: cfg.bbar_phi,
        c_beta,
        c_provenance: provenance,
        d: cfg.dimension,
        delta: cfg.delta,
    };
    mc.validate()?;
    Ok(mc)
}

/// `simulate-paths`: draw marks, export them and a moment check.
pub fn simulate_paths(cfg: &RunConfig, out: &Path, n_paths: usize) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let spec = cfg.langevin_spec();
    spec.validate()?;
    let mut files = Vec::new();

    let path = out.join("paths.csv");
    let mut w = fs::File::create(&path)?;
    let d = spec.dim;
    let header: Vec<String> = ["path_id".to_string(), "s".to_string()]
        .into_iter()
        .chain((1..=d).map(|i| format!("m{i}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for p in 0..n_paths {
        let mut rng = stream_rng(cfg.seed, p as u64);
        let mark = langevin::simulate_mark(&spec, &mut rng)?;
        for (k, node) in mark.nodes().enumerate() {
            let mut row = vec![p.to_string(), fmt_f64(k as f64 / spec.n_steps as f64)];
            row.extend(node.iter().map(|v| fmt_f64(*v)));
            writeln!(w, "{}", row.join(","))?;
        }
    }
    files.push(path);

    let exponent = d as f64 + 2.0 * cfg.delta;
    let mut rng = stream_rng(cfg.seed, n_paths as u64 + 1);
    let moment = langevin::exp_moment_estimate(&spec, exponent, 2000.max(n_paths), &mut rng)?;
    let path = out.join("moment_check.csv");
    let mut w = fs::File::create(&path)?;
    writeln!(w, "exponent,estimate,stderr,flagged,hypothesis_checked")?;
    writeln!(
        w,
        "{},{},{},{},{}",
        fmt_f64(exponent),
        fmt_f64(moment.estimate),
        fmt_f64(moment.stderr),
        moment.flagged,
        moment.hypothesis_checked
    )?;
    files.push(path);

    files.push(report::run_manifest(out, cfg, &files)?);
    Ok(files)
}

/// `thresholds`: threshold curve and summary for explicit `(beta, B, C)` or
/// with `C` estimated from the configured model.
pub fn thresholds(
    cfg: &RunConfig,
    out: &Path,
    beta: Option<f64>,
    b_phi: Option<f64>,
    c_beta: Option<f64>,
    estimate_c: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let beta = beta.unwrap_or(cfg.beta);
    let b = match b_phi {
        Some(b) => b,
        None => cfg.resolve_b_phi()?,
    };
    let (c, c_note) = if estimate_c {
        let rep = constants::regularity_constant(
            &cfg.pair_potential()?,
            &cfg.self_potential(),
            beta,
            &cfg.mark_sampler(),
            cfg.delta,
            64,
            4096,
            cfg.seed ^ 0xc0ffee,
            false,
        )?;
        (
            rep.used,
            format!(
                "C estimated: empirical sup {} (se {}), analytic bound {}",
                fmt_f64(rep.empirical.value),
                fmt_f64(rep.empirical.stderr),
                rep.analytic_bound.map_or("n/a".into(), fmt_f64)
            ),
        )
    } else {
        let c = c_beta.or(match cfg.c_source {
            CSource::Value(v) => Some(v),
            CSource::Estimate => None,
        });
        let c = c.ok_or_else(|| Error::InvalidSpec("pass --c VALUE or --estimate-c".into()))?;
        (c, format!("C supplied: {}", fmt_f64(c)))
    };
    let report = constants::z_crit(c, b, beta, 2048, 1e-8)?;

    let mut files = Vec::new();
    let path = out.join("threshold_curve.csv");
    let rows: Vec<Vec<f64>> = report.curve.iter().map(|p| vec![p.z, p.c_z, p.f]).collect();
    csvio::write_table(&mut fs::File::create(&path)?, &["z", "c_z", "f"], &rows)?;
    files.push(path);

    let path = out.join("threshold_summary.txt");
    let mut w = fs::File::create(&path)?;
    writeln!(w, "beta = {}", fmt_f64(beta))?;
    writeln!(w, "B_phi = {}", fmt_f64(b))?;
    writeln!(w, "C_beta = {}", fmt_f64(c))?;
    writeln!(w, "z_ru = {}", fmt_f64(report.z_ru))?;
    writeln!(w, "z_crit = {}", fmt_f64(report.z_crit))?;
    writeln!(
        w,
        "uniform_rb_threshold = {}",
        fmt_f64(constants::uniform_rb_threshold(c, b, beta))
    )?;
    writeln!(w, "note: {c_note}")?;
    for note in &report.notes {
        writeln!(w, "note: {note}")?;
    }
    files.push(path);

    files.push(report::run_manifest(out, cfg, &files)?);
    Ok(files)
}

/// `cluster-eval`: Ursell function/kernel and Q for the configuration in a
/// CSV file, split into `gamma` (first `split` points) and `xi` (the rest).
pub fn cluster_eval(
    cfg: &RunConfig,
    out: &Path,
    points: &Path,
    split: usize,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let whole = csvio::read_configuration(std::io::BufReader::new(fs::File::open(points)?))?;
    if split == 0 || split > whole.len() {
        return Err(Error::InvalidSpec(format!(
            "--split must select 1..={} leading points as gamma",
            whole.len()
        )));
    }
    let phi = cfg.pair_potential()?;
    let beta = cfg.beta;
    let b_phi = cfg.resolve_b_phi()?;
    let gamma: crate::configuration::Configuration =
        whole.points()[..split].iter().cloned().collect();
    let xi: crate::configuration::Configuration = whole.points()[split..].iter().cloned().collect();

    let k = crate::cluster::ursell_function(&whole, &phi, beta)?;
    let kbar = crate::cluster::ursell_kernel(&gamma, &xi, &phi, beta)?;
    let q = crate::cluster::q_full(&gamma, &xi, &phi, beta, b_phi)?;

    let path = out.join("cluster.csv");
    let mut w = fs::File::create(&path)?;
    writeln!(w, "n_gamma,n_xi,k,k_terms,kbar,kbar_terms,q,q_terms")?;
    writeln!(
        w,
        "{},{},{},{},{},{},{},{}",
        gamma.len(),
        xi.len(),
        fmt_f64(k.value),
        k.terms_evaluated,
        fmt_f64(kbar.value),
        kbar.terms_evaluated,
        fmt_f64(q.value),
        q.terms_evaluated
    )?;
    let mut files = vec![path];
    files.push(report::run_manifest(out, cfg, &files)?);
    Ok(files)
}

/// `ks-eval`: truncated fixed-point estimates and residuals at the prefix
/// tuples of the points file.
#[allow(clippy::too_many_arguments)]
pub fn ks_eval(
    cfg: &RunConfig,
    out: &Path,
    z: Option<f64>,
    beta: Option<f64>,
    depth: Option<usize>,
    budget: Option<usize>,
    points: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let z = z.unwrap_or(cfg.z);
    let beta = beta.unwrap_or(cfg.beta);
    let depth = depth.unwrap_or(cfg.ks_depth);
    let budget = budget.unwrap_or(cfg.ks_budget).max(8);
    let tuple = csvio::read_configuration(std::io::BufReader::new(fs::File::open(points)?))?;
    if tuple.is_empty() {
        return Err(Error::InvalidSpec(
            "points file holds no marked points".into(),
        ));
    }
    let phi = cfg.pair_potential()?;
    let sigma = cfg.sigma_sampler(false)?;

    // Contraction check: resolve the constants (estimating C if the config
    // asks for that) and warn when the requested activity has no guarantee.
    let mut warning = None;
    match resolve_constants(cfg) {
        Ok(mc) => {
            let crit = constants::z_crit(mc.c_beta, mc.b_phi, beta, 2048, 1e-8)?.z_crit;
            if z >= crit {
                warning = Some(format!(
                    "z = {} is not below z_crit = {}; the fixed point has no contraction guarantee",
                    fmt_f64(z),
                    fmt_f64(crit)
                ));
            }
        }
        Err(Error::NotRegular(msg)) => {
            warning = Some(format!("no contraction threshold available: {msg}"));
        }
        Err(e) => return Err(e),
    }

    let path = out.join("ks_eval.csv");
    let mut w = fs::File::create(&path)?;
    writeln!(w, "tuple_id,n,estimate,stderr,residual,residual_stderr")?;
    for n in 1..=tuple.len() {
        let args: Vec<MarkedPoint> = tuple.points()[..n].to_vec();
        let mut rng = stream_rng(cfg.seed, n as u64);
        let solver = NeumannSolver::new(&phi, &sigma, z, beta, depth, budget);
        let mut solver = solver;
        solver.k_max = cfg.ks_k_max.max(1);
        let estimate = solver.eval(&args, depth, &mut rng)?;
        let corr = NeumannCorrelations { solver };
        let params = ks::KsParams {
            z,
            beta,
            k_max: cfg.ks_k_max.max(1),
            budget,
        };
        let residual = ks::ks_residual(&corr, &args, &phi, &sigma, &params, &mut rng)?;
        writeln!(
            w,
            "{},{},{},{},{},{}",
            n - 1,
            n,
            fmt_f64(estimate.value),
            fmt_f64(estimate.stderr),
            fmt_f64(residual.value),
            fmt_f64(residual.stderr)
        )?;
    }
    let mut files = vec![path];

    if let Some(warning) = warning {
        let path = out.join("ks_warnings.txt");
        fs::write(&path, format!("{warning}\n"))?;
        files.push(path);
    }
    files.push(report::run_manifest(out, cfg, &files)?);
    Ok(files)
}

/// `sample`: run the chain, export thinned configurations, the summary and
/// the estimator tables. Returns the files and whether diagnostics passed.
pub fn sample(cfg: &RunConfig, out: &Path) -> Result<(Vec<PathBuf>, bool)> {
    fs::create_dir_all(out)?;
    let phi = cfg.pair_potential()?;
    let psi = cfg.self_potential();
    let marks = cfg.mark_sampler();
    let sampler_cfg = cfg.sampler_config()?;
    let (samples, summary) = sampler::mcmc_run(&sampler_cfg, &phi, &psi, &marks)?;
    let mut files = Vec::new();

    // Thinned configurations, tagged by sample id.
    let path = out.join("samples.csv");
    let mut w = fs::File::create(&path)?;
    let n_nodes = marks.n_steps() + 1;
    let d = cfg.dimension;
    let mut header = vec!["sample_id".to_string(), "point_id".to_string()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    for k in 0..n_nodes {
        header.extend((1..=d).map(move |i| format!("m{k}_{i}")));
    }
    writeln!(w, "{}", header.join(","))?;
    for (s, gamma) in samples.iter().enumerate() {
        for (id, p) in gamma.points().iter().enumerate() {
            let mut row = vec![s.to_string(), id.to_string()];
            row.extend(p.x.iter().map(|v| fmt_f64(*v)));
            row.extend(p.mark.values().iter().map(|v| fmt_f64(*v)));
            writeln!(w, "{}", row.join(","))?;
        }
    }
    files.push(path);

    let path = out.join("chain_summary.csv");
    let mut w = fs::File::create(&path)?;
    writeln!(
        w,
        "kept,acc_birth,acc_death,acc_translate,acc_mark,mean_count,autocorr_time"
    )?;
    writeln!(
        w,
        "{},{},{},{},{},{},{}",
        summary.kept,
        fmt_f64(summary.acceptance_rate(sampler::MoveKind::Birth)),
        fmt_f64(summary.acceptance_rate(sampler::MoveKind::Death)),
        fmt_f64(summary.acceptance_rate(sampler::MoveKind::Translate)),
        fmt_f64(summary.acceptance_rate(sampler::MoveKind::MarkResample)),
        fmt_f64(summary.mean_count),
        fmt_f64(summary.autocorr_time_count)
    )?;
    files.push(path);

    // Estimators: averaged intensity plus the GNZ suite.
    let sim_box = cfg.sim_box()?;
    let sigma_l = sampler::sigma_volume(&sim_box, &psi, &marks, 4096, cfg.seed ^ 0x51)?;
    let rho = sampler::estimate_intensity(&samples, cfg.z, sigma_l)?;
    let tests = sampler::gnz_test_suite(phi.scalar.hard_core_r.max(0.5));
    let gnz = sampler::gnz_residual(
        &samples,
        &tests,
        cfg.z,
        cfg.beta,
        &phi,
        &psi,
        &marks,
        &sim_box,
        4,
        cfg.seed ^ 0x9a,
    )?;
    let path = out.join("estimators.csv");
    let mut w = fs::File::create(&path)?;
    writeln!(w, "estimator,value,stderr")?;
    writeln!(w, "rho1_avg,{},{}", fmt_f64(rho.value), fmt_f64(rho.stderr))?;
    let mut diagnostics_ok = true;
    for (test, rep) in tests.iter().zip(&gnz) {
        writeln!(
            w,
            "gnz_lhs_{},{},{}",
            test.name,
            fmt_f64(rep.lhs.value),
            fmt_f64(rep.lhs.stderr)
        )?;
        writeln!(
            w,
            "gnz_rhs_{},{},{}",
            test.name,
            fmt_f64(rep.rhs.value),
            fmt_f64(rep.rhs.stderr)
        )?;
        writeln!(
            w,
            "gnz_residual_{},{},{}",
            test.name,
            fmt_f64(rep.residual.value),
            fmt_f64(rep.residual.stderr)
        )?;
        if rep.residual.value.abs() > 3.0 * rep.residual.stderr.max(1e-12) {
            diagnostics_ok = false;
        }
    }
    files.push(path);

    files.push(report::run_manifest(out, cfg, &files)?);
    Ok((files, diagnostics_ok))
}

/// `reproduce-figures`.
pub fn reproduce_figures(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let mut files = report::reproduce_figures(out)?;
    files.push(report::run_manifest(out, cfg, &files)?);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.n_sweeps = 4000;
        cfg.burn_in = 500;
        cfg.zero_marks = true;
        cfg.n_steps = 4;
        cfg.box_bounds = vec![0.0, 4.0];
        cfg.z = 0.3;
        cfg
    }

    #[test]
    fn simulate_paths_emits_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = quick_cfg();
        let files = simulate_paths(&cfg, dir.path(), 3).unwrap();
        assert!(files.iter().all(|f| f.exists()));
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert!(text.starts_with("path_id,s,m1"));
    }

    #[test]
    fn sample_and_manifest_deterministic() {
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let cfg = quick_cfg();
        let (files1, ok1) = sample(&cfg, dir1.path()).unwrap();
        let (_, ok2) = sample(&cfg, dir2.path()).unwrap();
        assert_eq!(ok1, ok2);
        for f in &files1 {
            let name = f.file_name().unwrap();
            let a = std::fs::read(f).unwrap();
            let b = std::fs::read(dir2.path().join(name)).unwrap();
            assert_eq!(a, b, "file {name:?} differs between identical runs");
        }
        // Changing the seed changes the sampler CSV.
        let mut cfg2 = quick_cfg();
        cfg2.seed = 1234;
        let dir3 = tempfile::tempdir().unwrap();
        let (files3, _) = sample(&cfg2, dir3.path()).unwrap();
        let a = std::fs::read(&files1[0]).unwrap();
        let b = std::fs::read(&files3[0]).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn thresholds_with_supplied_c() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = quick_cfg();
        let files = thresholds(&cfg, dir.path(), Some(1.0), Some(0.0), Some(1.0), false).unwrap();
        let summary = std::fs::read_to_string(&files[1]).unwrap();
        assert!(summary.contains("z_crit"));
    }

    #[test]
    fn cluster_eval_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = quick_cfg();
        let gamma = crate::configuration::Configuration::new(
            [0.0, 1.5, 3.0]
                .iter()
                .map(|&x| MarkedPoint::with_zero_mark(vec![x], 4))
                .collect(),
        )
        .unwrap();
        let points = dir.path().join("points.csv");
        csvio::write_configuration(&mut fs::File::create(&points).unwrap(), &gamma).unwrap();
        let files = cluster_eval(&cfg, dir.path(), &points, 1).unwrap();
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert!(text.starts_with("n_gamma,n_xi,k"));
        assert!(text.lines().nth(1).unwrap().starts_with("1,2,"));
    }

    #[test]
    fn ks_eval_emits_rows_per_prefix() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = quick_cfg();
        cfg.ks_depth = 2;
        cfg.ks_budget = 16;
        let gamma = crate::configuration::Configuration::new(
            [0.5, 2.0]
                .iter()
                .map(|&x| MarkedPoint::with_zero_mark(vec![x], 4))
                .collect(),
        )
        .unwrap();
        let points = dir.path().join("points.csv");
        csvio::write_configuration(&mut fs::File::create(&points).unwrap(), &gamma).unwrap();
        let files = ks_eval(&cfg, dir.path(), Some(0.05), None, None, None, &points).unwrap();
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(text.lines().count(), 3);
    }
}
