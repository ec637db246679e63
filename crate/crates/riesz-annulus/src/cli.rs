//! Command-line surface: compute minimizers, trace the balayage iteration,
//! scan F, emit figure-ready data, and run the particle oracle.
//!
//! Output conventions: scalar results go to JSON, curves to CSV with a
//! header row.  Every run writes a `manifest.json` recording the command,
//! the fully resolved parameters, the library version, a timestamp and the
//! SHA-256 of each output file.  Exit codes: 0 success, 1 verification
//! failure, 2 usage error.

use crate::balayage::{min_smooth_factor, solve_mu_lambda, SolveConfig};
use crate::error::{Error, Result};
use crate::iba::{
    assemble_minimizer, f_of_lambda_with, find_lambda_star, run_iba, verify_euler_lagrange,
};
use crate::particles::{descend, discrete_energy, ParticleSystem};
use crate::{pool, RieszParams};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Tolerance gates applied by `solve` before exiting 0.
pub const GATE_EL_RESIDUAL: f64 = 1e-5;
pub const GATE_OFF_SUPPORT: f64 = -1e-7;

#[derive(Parser, Debug)]
#[command(name = "riesz-annulus", version, about = "Two-interval minimizers of -|x|^b/b + x^4/4 interaction energies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Clone, Default)]
pub struct CommonOpts {
    /// Nodes per interval for the collocation solves.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Residual tolerance for the solves.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap (balayage steps, or descent steps for `particles`).
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// RNG seed for jittered particle initialization.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Optional key = value config file; flags override its entries.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute the two-interval minimizer for an exponent b in (1, 2).
    Solve {
        #[arg(long)]
        b: f64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Trace the iterated balayage sequence for a Riesz exponent s in (0, 1).
    Iba {
        #[arg(long)]
        s: f64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Scan F over a lambda grid, marking lambda_inf and lambda_star.
    ScanF {
        #[arg(long)]
        s: f64,
        /// Grid as a:b:n (n points from a to b inclusive).
        #[arg(long, value_name = "A:B:N")]
        grid: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Emit figure-ready datasets.
    Figures {
        /// Which dataset: fig1 or fig2.
        #[arg(long, value_parser = ["fig1", "fig2"])]
        which: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the N-particle descent oracle.
    Particles {
        #[arg(long)]
        b: f64,
        /// Particle count.
        #[arg(long)]
        n: usize,
        /// Uniform jitter amplitude applied to the equispaced start.
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        #[command(flatten)]
        common: CommonOpts,
    },
}

/// Resolved run parameters after merging defaults, config file and flags.
#[derive(Debug, Clone, Serialize)]
struct ResolvedOpts {
    nodes: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
    out: PathBuf,
}

fn parse_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Domain(format!(
                "config line {} is not `key = value`: {raw}",
                lineno + 1
            )));
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn resolve(common: &CommonOpts, default_max_iter: usize) -> Result<ResolvedOpts> {
    let cfgmap = match &common.config {
        Some(p) => parse_config(p)?,
        None => BTreeMap::new(),
    };
    let get = |k: &str| cfgmap.get(k).cloned();
    let parse_err = |k: &str, v: &str| Error::Domain(format!("config key {k} has bad value {v}"));

    let nodes = match (common.nodes, get("nodes")) {
        (Some(n), _) => n,
        (None, Some(v)) => v.parse().map_err(|_| parse_err("nodes", &v))?,
        (None, None) => SolveConfig::default().n_nodes,
    };
    let tol = match (common.tol, get("tol")) {
        (Some(t), _) => t,
        (None, Some(v)) => v.parse().map_err(|_| parse_err("tol", &v))?,
        (None, None) => SolveConfig::default().linear_tol,
    };
    let max_iter = match (common.max_iter, get("max-iter")) {
        (Some(m), _) => m,
        (None, Some(v)) => v.parse().map_err(|_| parse_err("max-iter", &v))?,
        (None, None) => default_max_iter,
    };
    let seed = match (common.seed, get("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => v.parse().map_err(|_| parse_err("seed", &v))?,
        (None, None) => 0,
    };
    let out = match (&common.out, get("out")) {
        (Some(p), _) => p.clone(),
        (None, Some(v)) => PathBuf::from(v),
        (None, None) => PathBuf::from("out"),
    };
    Ok(ResolvedOpts { nodes, tol, max_iter, seed, out })
}

fn solve_config(opts: &ResolvedOpts) -> SolveConfig {
    SolveConfig {
        n_nodes: opts.nodes,
        colloc_count: opts.nodes,
        linear_tol: opts.tol,
        ..Default::default()
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

struct OutputSet {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl OutputSet {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputSet { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        let mut f = std::fs::File::create(&path)?;
        f.write_all(contents.as_bytes())?;
        self.files.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    fn finish(self, command: &str, parameters: serde_json::Value) -> Result<()> {
        #[derive(Serialize)]
        struct OutputEntry {
            file: String,
            sha256: String,
        }
        #[derive(Serialize)]
        struct Manifest {
            command: String,
            parameters: serde_json::Value,
            library_version: String,
            timestamp_utc: String,
            outputs: Vec<OutputEntry>,
        }
        let mut outputs = Vec::new();
        for path in &self.files {
            let bytes = std::fs::read(path)?;
            let mut h = Sha256::new();
            h.update(&bytes);
            outputs.push(OutputEntry {
                file: path.file_name().unwrap().to_string_lossy().into_owned(),
                sha256: format!("{:x}", h.finalize()),
            });
        }
        let manifest = Manifest {
            command: command.to_string(),
            parameters,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_utc: chrono::Utc::now().to_rfc3339(),
            outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(self.dir.join("manifest.json"), text)?;
        Ok(())
    }
}

/// Run a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve { b, common } => cmd_solve(b, &common),
        Command::Iba { s, common } => cmd_iba(s, &common),
        Command::ScanF { s, grid, common } => cmd_scan_f(s, grid.as_deref(), &common),
        Command::Figures { which, common } => cmd_figures(&which, &common),
        Command::Particles { b, n, jitter, common } => cmd_particles(b, n, jitter, &common),
    }
}

#[derive(Serialize)]
struct SolveId {
    b: f64,
    #[serde(flatten)]
    opts: ResolvedOpts,
}

fn cmd_solve(b: f64, common: &CommonOpts) -> Result<i32> {
    let opts = resolve(common, 200)?;
    let cfg = solve_config(&opts);
    let res = assemble_minimizer(b, &cfg)?;
    let report = verify_euler_lagrange(&res, 2000)?;
    let passed = report.support_residual_max <= GATE_EL_RESIDUAL
        && report.off_support_min >= GATE_OFF_SUPPORT
        && (res.diagnostics.mass - 1.0).abs() <= 1e-8
        && res.diagnostics.min_smooth_factor >= -1e-10;

    let mut out = OutputSet::new(&opts.out)?;

    #[derive(Serialize)]
    struct Verification {
        support_residual_max: f64,
        off_support_min: f64,
        gap_field_at_zero: f64,
        gap_sign_changes: usize,
        gap_sign_change_at: Option<f64>,
        asymmetry: f64,
        passed: bool,
    }
    #[derive(Serialize)]
    struct Diag {
        el_residual_support: f64,
        off_support_min: f64,
        min_smooth_factor: f64,
        c0_spread: f64,
        f_at_root: f64,
        iba_iterations: usize,
        lambda_inf: f64,
        mass: f64,
    }
    #[derive(Serialize)]
    struct ResultFile {
        b: f64,
        s: f64,
        lambda_star: f64,
        r1: f64,
        r2: f64,
        c0: f64,
        diagnostics: Diag,
        verification: Verification,
        manifest: String,
    }
    let d = &res.diagnostics;
    out.write_json(
        "result.json",
        &ResultFile {
            b: res.b,
            s: res.s,
            lambda_star: res.lambda_star,
            r1: res.r1,
            r2: res.r2,
            c0: res.c0,
            diagnostics: Diag {
                el_residual_support: d.el_residual_support,
                off_support_min: d.off_support_min,
                min_smooth_factor: d.min_smooth_factor,
                c0_spread: d.c0_spread,
                f_at_root: d.f_at_root,
                iba_iterations: d.iba_iterations,
                lambda_inf: d.lambda_inf,
                mass: d.mass,
            },
            verification: Verification {
                support_residual_max: report.support_residual_max,
                off_support_min: report.off_support_min,
                gap_field_at_zero: report.gap_field_at_zero,
                gap_sign_changes: report.gap_sign_changes,
                gap_sign_change_at: report.gap_sign_change_at,
                asymmetry: report.asymmetry,
                passed,
            },
            manifest: "manifest.json".into(),
        },
    )?;

    let mut csv = String::from("x,rho,smooth_factor,field_original,field_V\n");
    let mut rows: Vec<(f64, String)> = Vec::new();
    for piece in res.rho.pieces() {
        let iv = piece.interval();
        for k in 0..200 {
            let x = iv.a() + (k as f64 + 0.5) / 200.0 * iv.length();
            let rho = res.rho.density_at(x)?;
            let row = format!(
                "{},{},{},{},{}",
                fmt(x),
                fmt(rho),
                fmt(piece.smooth_at(x)),
                fmt(res.rho.original_potential(x)?),
                fmt(res.rho.field_v(x)?)
            );
            rows.push((x, row));
        }
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (_, row) in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    out.write("density.csv", &csv)?;
    out.finish("solve", serde_json::to_value(SolveId { b, opts: opts.clone() })?)?;

    if passed {
        Ok(0)
    } else {
        eprintln!(
            "verification failed: support residual {:.3e} (allowed {GATE_EL_RESIDUAL:.0e}), \
             off-support min {:.3e} (allowed {GATE_OFF_SUPPORT:.0e})",
            report.support_residual_max, report.off_support_min
        );
        Ok(1)
    }
}

#[derive(Serialize)]
struct IbaId {
    s: f64,
    #[serde(flatten)]
    opts: ResolvedOpts,
}

fn cmd_iba(s: f64, common: &CommonOpts) -> Result<i32> {
    let opts = resolve(common, 200)?;
    let cfg = solve_config(&opts);
    let params = RieszParams::from_s(s)?;
    let trace = run_iba(&params, &cfg, opts.max_iter, 1e-10)?;

    let mut out = OutputSet::new(&opts.out)?;
    let mut csv = String::from("j,lambda,min_smooth_factor,residual\n");
    for st in &trace.steps {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            st.j,
            fmt(st.lambda),
            fmt(st.min_smooth_factor),
            fmt(st.residual)
        ));
    }
    out.write("iba_trace.csv", &csv)?;

    #[derive(Serialize)]
    struct Summary {
        s: f64,
        lambda_inf: f64,
        lambda_inf_iterates: f64,
        edge_value: f64,
        iterations: usize,
    }
    out.write_json(
        "iba_summary.json",
        &Summary {
            s,
            lambda_inf: trace.lambda_inf,
            lambda_inf_iterates: trace.lambda_inf_iterates,
            edge_value: trace.edge_value,
            iterations: trace.lambdas.len() - 1,
        },
    )?;
    out.finish("iba", serde_json::to_value(IbaId { s, opts })?)?;
    Ok(0)
}

fn parse_grid(spec: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Domain(format!("grid must be a:b:n, got {spec}")));
    }
    let a: f64 = parts[0].parse().map_err(|_| Error::Domain(format!("bad grid start {}", parts[0])))?;
    let b: f64 = parts[1].parse().map_err(|_| Error::Domain(format!("bad grid end {}", parts[1])))?;
    let n: usize = parts[2].parse().map_err(|_| Error::Domain(format!("bad grid count {}", parts[2])))?;
    if !(a < b) || n < 2 {
        return Err(Error::Domain(format!("grid needs a < b and n >= 2, got {spec}")));
    }
    Ok((a, b, n))
}

#[derive(Serialize)]
struct ScanId {
    s: f64,
    grid: String,
    #[serde(flatten)]
    opts: ResolvedOpts,
}

fn cmd_scan_f(s: f64, grid: Option<&str>, common: &CommonOpts) -> Result<i32> {
    let opts = resolve(common, 200)?;
    let cfg = solve_config(&opts);
    let params = RieszParams::from_s(s)?;
    let grid_spec = grid.unwrap_or("0.2:0.99:9").to_string();
    let (a, b, n) = parse_grid(&grid_spec)?;

    let trace = run_iba(&params, &cfg, opts.max_iter, 1e-10)?;
    let lambda_star = find_lambda_star(&params, &cfg, &trace)?;

    let mut lambdas: Vec<(f64, &str)> = (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64, ""))
        .collect();
    lambdas.push((trace.lambda_inf, "lambda_inf"));
    lambdas.push((lambda_star, "lambda_star"));
    lambdas.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());

    let rows: Vec<Result<String>> = pool::install(|| {
        lambdas
            .par_iter()
            .map(|&(lam, marker)| -> Result<String> {
                let mu = solve_mu_lambda(lam, &params, &cfg)?;
                let f = f_of_lambda_with(&mu, lam, &params, &cfg)?;
                let (min_sf, _) = min_smooth_factor(&mu);
                Ok(format!(
                    "{},{},{},{},{marker}",
                    fmt(lam),
                    fmt(f),
                    fmt(mu.total_mass()),
                    fmt(min_sf)
                ))
            })
            .collect()
    });
    let mut csv = String::from("lambda,F,mass,min_smooth_factor,marker\n");
    for row in rows {
        csv.push_str(&row?);
        csv.push('\n');
    }
    let mut out = OutputSet::new(&opts.out)?;
    out.write("F_scan.csv", &csv)?;
    out.finish("scan-f", serde_json::to_value(ScanId { s, grid: grid_spec, opts })?)?;
    Ok(0)
}

#[derive(Serialize)]
struct FiguresId {
    which: String,
    #[serde(flatten)]
    opts: ResolvedOpts,
}

fn cmd_figures(which: &str, common: &CommonOpts) -> Result<i32> {
    let opts = resolve(common, 200)?;
    let cfg = solve_config(&opts);
    let mut out = OutputSet::new(&opts.out)?;
    match which {
        "fig1" => {
            // density and the adjusted potential 50 (field + 0.6) on x > 0
            let res = assemble_minimizer(1.3, &cfg)?;
            let mut csv = String::from("x,rho,adjusted_potential\n");
            let m = 480;
            for k in 0..=m {
                let x = k as f64 / m as f64 * 1.2 * res.r2;
                let rho = if x > res.r1 && x < res.r2 {
                    fmt(res.rho.density_at(x)?)
                } else {
                    String::new()
                };
                let adj = 50.0 * (res.rho.original_potential(x)? + 0.6);
                csv.push_str(&format!("{},{rho},{}\n", fmt(x), fmt(adj)));
            }
            out.write("fig1.csv", &csv)?;
            #[derive(Serialize)]
            struct Markers {
                b: f64,
                r1: f64,
                r2: f64,
                c0: f64,
            }
            out.write_json(
                "fig1_markers.json",
                &Markers { b: res.b, r1: res.r1, r2: res.r2, c0: res.c0 },
            )?;
        }
        "fig2" => {
            // mu_lambda and V[mu_lambda] for both s rows at lambda in
            // {0.2, lambda_inf, lambda_star}; the s = 0.3 row plots mu / 10
            let mut csv = String::from("s,lambda,scale,x,mu_plot,V\n");
            for &(s, scale) in &[(0.7, 1.0), (0.3, 0.1)] {
                let params = RieszParams::from_s(s)?;
                let trace = run_iba(&params, &cfg, opts.max_iter, 1e-10)?;
                let lambda_star = find_lambda_star(&params, &cfg, &trace)?;
                for lam in [0.2, trace.lambda_inf, lambda_star] {
                    let mu = solve_mu_lambda(lam, &params, &cfg)?;
                    let m = 420;
                    for k in 0..=m {
                        let x = -1.05 + 2.1 * k as f64 / m as f64;
                        let on_support =
                            mu.pieces().iter().any(|p| x > p.interval().a() && x < p.interval().b());
                        let mu_col = if on_support {
                            fmt(scale * mu.density_at(x)?)
                        } else {
                            String::new()
                        };
                        let v = mu.field_v(x)?;
                        csv.push_str(&format!(
                            "{},{},{},{},{mu_col},{}\n",
                            fmt(s),
                            fmt(lam),
                            fmt(scale),
                            fmt(x),
                            fmt(v)
                        ));
                    }
                }
            }
            out.write("fig2.csv", &csv)?;
        }
        other => return Err(Error::Domain(format!("unknown figure {other}"))),
    }
    out.finish("figures", serde_json::to_value(FiguresId { which: which.into(), opts })?)?;
    Ok(0)
}

#[derive(Serialize)]
struct ParticlesId {
    b: f64,
    n: usize,
    jitter: f64,
    #[serde(flatten)]
    opts: ResolvedOpts,
}

fn cmd_particles(b: f64, n: usize, jitter: f64, common: &CommonOpts) -> Result<i32> {
    let opts = resolve(common, 4000)?;
    let ps = if jitter > 0.0 {
        ParticleSystem::equispaced_with_jitter(n, b, jitter, opts.seed)?
    } else {
        ParticleSystem::equispaced(n, b)?
    };
    let done = descend(&ps, opts.max_iter);
    let (inner, outer) = done.support_endpoints();
    let energy = discrete_energy(&done);

    let mut out = OutputSet::new(&opts.out)?;
    let mut csv = String::from("position\n");
    let mut sorted = done.positions().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for x in &sorted {
        csv.push_str(&fmt(*x));
        csv.push('\n');
    }
    out.write("particles.csv", &csv)?;

    #[derive(Serialize)]
    struct Summary {
        b: f64,
        n: usize,
        iterations: usize,
        seed: Option<u64>,
        energy: f64,
        support_inner: f64,
        support_outer: f64,
    }
    out.write_json(
        "particles_summary.json",
        &Summary {
            b,
            n,
            iterations: done.iterations(),
            seed: done.seed(),
            energy,
            support_inner: inner,
            support_outer: outer,
        },
    )?;
    out.finish("particles", serde_json::to_value(ParticlesId { b, n, jitter, opts })?)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.2:0.9:8").unwrap(), (0.2, 0.9, 8));
        assert!(parse_grid("0.9:0.2:8").is_err());
        assert!(parse_grid("0.2:0.9").is_err());
        assert!(parse_grid("a:b:c").is_err());
    }

    #[test]
    fn config_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# comment\nnodes = 48\ntol = 1e-7\nmax-iter = 5\n").unwrap();
        let common = CommonOpts { config: Some(path), ..Default::default() };
        let opts = resolve(&common, 200).unwrap();
        assert_eq!(opts.nodes, 48);
        assert_eq!(opts.max_iter, 5);
        assert!((opts.tol - 1e-7).abs() < 1e-20);
        // flags win over config
        let common2 = CommonOpts {
            nodes: Some(32),
            config: common.config.clone(),
            ..Default::default()
        };
        assert_eq!(resolve(&common2, 200).unwrap().nodes, 32);
    }

    #[test]
    fn config_rejects_malformed_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        std::fs::write(&path, "nodes 48\n").unwrap();
        let common = CommonOpts { config: Some(path), ..Default::default() };
        assert!(resolve(&common, 200).is_err());
    }
}
