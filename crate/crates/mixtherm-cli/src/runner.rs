//! Command dispatch: each subcommand reads the resolved config, runs
//! the owning library module and emits CSV.

use crate::config::{self, Resolved};
use crate::output::{fmt_f64, write_atomic, CsvTable};
use crate::{Cli, CliError, Command};
use mixtherm::kernels::{self, KernelParams};
use mixtherm::ns::{self, NsFamily};
use mixtherm::thermo::{self, DomainSpec};
use mixtherm::validator::{self, ClassicalAnsatz2, Grid1D};
use mixtherm::{
    parallel, MultiIndex, PairPotential, PotentialForm, SpeciesSpec, Statistics, UnitSystem,
};
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the raw config bytes.
    pub config_digest: String,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
}

pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let threads = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var("MIXTHERM_THREADS") {
            Ok(v) => Some(v.parse::<usize>().map_err(|_| {
                CliError::config("MIXTHERM_THREADS", "must be a positive integer")
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::config("--threads", "must be ≥ 1"));
        }
        // A failure here means a pool already exists (same process);
        // the run proceeds on the existing pool.
        let _ = parallel::configure_threads(n);
    }

    let raw = std::fs::read(&cli.config).map_err(|e| {
        CliError::config("/", format!("cannot read {}: {e}", cli.config.display()))
    })?;
    let digest = hex::encode(Sha256::digest(&raw));
    let resolved = config::load(&cli.config)?;
    let out_dir = cli
        .out
        .clone()
        .unwrap_or_else(|| resolved.base_dir.clone());

    let mut warnings = Vec::new();
    let outputs = match cli.command {
        Command::IdealTau => ideal_tau(&resolved, &out_dir)?,
        Command::Thermo => thermo_cmd(&resolved, &out_dir)?,
        Command::TauField => tau_field(&resolved, &out_dir)?,
        Command::CondensateScan => condensate_scan(cli, &resolved, &out_dir, &mut warnings)?,
        Command::NsCheck => ns_check(&resolved, &out_dir)?,
        Command::Gk => gk(&resolved, &out_dir)?,
        Command::Validate => validate(&resolved, &out_dir)?,
    };

    let report = RunReport {
        command: cli.command.name().to_string(),
        config_digest: digest,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        wall_time_s: start.elapsed().as_secs_f64(),
        warnings,
    };
    write_atomic(
        &out_dir.join("report.json"),
        &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
    )?;
    Ok(report)
}

fn units() -> UnitSystem {
    UnitSystem::natural()
}

/// θ values for list-driven commands: `thetas`, else `theta_grid`,
/// else the scalar `theta`.
fn theta_list(r: &Resolved) -> Result<Vec<f64>, CliError> {
    if let Some(list) = &r.config.thetas {
        if list.is_empty() {
            return Err(CliError::config("/thetas", "must be non-empty"));
        }
        return Ok(list.clone());
    }
    if let Some(grid) = &r.config.theta_grid {
        return grid.linear("/theta_grid");
    }
    if let Some(theta) = r.config.theta {
        return Ok(vec![theta]);
    }
    Err(CliError::config(
        "/thetas",
        "one of `thetas`, `theta_grid` or `theta` is required",
    ))
}

fn total_rho(r: &Resolved) -> f64 {
    r.config
        .rho
        .unwrap_or_else(|| r.species.iter().map(|s| s.density).sum())
}

fn ideal_tau(r: &Resolved, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let thetas = theta_list(r)?;
    let rho = total_rho(r);
    let mut header = vec!["theta".to_string(), "rho".to_string()];
    header.extend(r.species.iter().map(|s| format!("alpha_{}", s.label)));
    header.push("tau".to_string());
    header.push("tau_over_theta".to_string());
    let mut table = CsvTable::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    let rows = parallel::map(&thetas, |&theta| {
        let mix = thermo::mixture_at(&r.species, theta, rho);
        thermo::solve_ideal(&mix, &r.species, &units())
    });
    for (theta, sol) in thetas.iter().zip(rows) {
        let sol = sol?;
        let mut row = vec![fmt_f64(*theta), fmt_f64(rho)];
        row.extend(sol.alphas.iter().map(|&a| fmt_f64(a)));
        row.push(fmt_f64(sol.tau));
        row.push(fmt_f64(sol.tau / theta));
        table.push(row);
    }
    let path = out.join("ideal_tau.csv");
    write_atomic(&path, &table.body())?;
    Ok(vec![path])
}

fn thermo_cmd(r: &Resolved, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let thetas = theta_list(r)?;
    let rho = total_rho(r);
    let mut table = CsvTable::new(&[
        "theta",
        "rho",
        "tau",
        "kinetic_energy",
        "energy",
        "pressure",
    ]);
    let rows = parallel::map(&thetas, |&theta| -> Result<_, mixtherm::Error> {
        let mix = thermo::mixture_at(&r.species, theta, rho);
        let sol = thermo::solve_ideal(&mix, &r.species, &units())?;
        thermo::thermo_point(&mix, &r.species, sol.tau, &r.potentials, &r.correlations)
    });
    for (theta, point) in thetas.iter().zip(rows) {
        let p = point?;
        table.push(vec![
            fmt_f64(*theta),
            fmt_f64(rho),
            fmt_f64(p.tau),
            fmt_f64(p.kinetic_energy),
            fmt_f64(p.energy),
            fmt_f64(p.pressure),
        ]);
    }
    let path = out.join("thermo.csv");
    write_atomic(&path, &table.body())?;
    Ok(vec![path])
}

fn tau_field(r: &Resolved, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let theta_grid = r
        .config
        .theta_grid
        .as_ref()
        .ok_or_else(|| CliError::config("/theta_grid", "required for tau-field"))?
        .linear("/theta_grid")?;
    let rho_grid = r
        .config
        .rho_grid
        .as_ref()
        .ok_or_else(|| CliError::config("/rho_grid", "required for tau-field"))?
        .linear("/rho_grid")?;
    let domain = DomainSpec {
        thetas: theta_grid,
        rhos: rho_grid,
    };
    let total: f64 = r.species.iter().map(|s| s.density).sum();
    let fractions: Vec<f64> = r.species.iter().map(|s| s.density / total).collect();
    let potentials = &r.potentials;
    let correlations = &r.correlations;
    let f = move |theta: f64, rho: f64| {
        thermo::rhs_f(theta, rho, &fractions, potentials, correlations)
    };
    let field = thermo::solve_tau_field_with_tol(
        &domain,
        &r.species,
        &units(),
        &f,
        r.config.tolerances.characteristic_rtol,
    )?;
    let mut table = CsvTable::new(&["theta", "rho", "tau"]);
    for (i, &theta) in field.thetas.iter().enumerate() {
        for (j, &rho) in field.rhos.iter().enumerate() {
            table.push(vec![fmt_f64(theta), fmt_f64(rho), fmt_f64(field.value(i, j))]);
        }
    }
    let path = out.join("tau_field.csv");
    write_atomic(&path, &table.body())?;
    Ok(vec![path])
}

fn condensate_scan(
    cli: &Cli,
    r: &Resolved,
    out: &Path,
    warnings: &mut Vec<String>,
) -> Result<Vec<PathBuf>, CliError> {
    if !cli.allow_experimental {
        return Err(CliError::Experimental {
            message: "condensate-scan is EXPERIMENTAL; rerun with --allow-experimental"
                .to_string(),
        });
    }
    warnings.push(
        "EXPERIMENTAL: onset detects saturation of the Bose density branch; \
         no quantitative fidelity claimed"
            .to_string(),
    );
    let mut thetas = theta_list(r)?;
    // Accept either ordering in config; the scan wants descending.
    thetas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thetas.dedup();
    let scan = thermo::condensate_scan(&r.species, &thetas, &units())?;
    let mut table = CsvTable::new(&["theta", "tau", "saturated"]);
    for (theta, tau) in &scan.points {
        table.push(vec![
            fmt_f64(*theta),
            tau.map(fmt_f64).unwrap_or_default(),
            (if tau.is_none() { "1" } else { "0" }).to_string(),
        ]);
    }
    let path = out.join("condensate_scan.csv");
    write_atomic(&path, &table.body())?;
    match scan.onset {
        Some(onset) => warnings.push(format!("onset estimate: theta = {}", fmt_f64(onset))),
        None => warnings.push("no saturation inside the scanned range".to_string()),
    }
    Ok(vec![path])
}

fn ns_check(r: &Resolved, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let cfg = r
        .config
        .ns
        .as_ref()
        .ok_or_else(|| CliError::config("/ns", "required for ns-check"))?;
    if cfg.cases.is_empty() {
        return Err(CliError::config("/ns/cases", "must be non-empty"));
    }
    let family = NsFamily::new(&r.species, cfg.tau, cfg.dim, &units())?;
    let z_grid = ns::default_z_grid(cfg.tau);
    let mut table = CsvTable::new(&["s", "kind", "max_rel_residual"]);
    for (i, counts) in cfg.cases.iter().enumerate() {
        let path = format!("/ns/cases/{i}");
        if counts.len() != r.species.len() {
            return Err(CliError::config(
                path,
                format!("expected {} per-kind counts", r.species.len()),
            ));
        }
        if counts.iter().sum::<usize>() == 0 {
            return Err(CliError::config(path, "order must be ≥ 1"));
        }
        let s = MultiIndex::new(counts.clone());
        let s_label = counts
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join("+");
        for (a, &count) in counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let report = ns::check_reduction(&family, &r.species, &s, a, &z_grid, &units())?;
            table.push(vec![
                s_label.clone(),
                r.species[a].label.clone(),
                fmt_f64(report.max_rel_residual),
            ]);
        }
    }
    let path = out.join("ns_check.csv");
    write_atomic(&path, &table.body())?;
    Ok(vec![path])
}

fn gk(r: &Resolved, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let cases = r
        .config
        .gk
        .as_ref()
        .ok_or_else(|| CliError::config("/gk", "required for gk"))?;
    if cases.is_empty() {
        return Err(CliError::config("/gk", "must be non-empty"));
    }
    let mut table = CsvTable::new(&["k", "alpha", "statistics", "value"]);
    for (i, c) in cases.iter().enumerate() {
        let stat = config::parse_statistics(&c.statistics, &format!("/gk/{i}/statistics"))?;
        let params = KernelParams::new(c.k, c.alpha, stat)?;
        let value = kernels::g_integral(params)?;
        table.push(vec![
            c.k.to_string(),
            fmt_f64(c.alpha),
            c.statistics.clone(),
            fmt_f64(value),
        ]);
    }
    let path = out.join("gk.csv");
    write_atomic(&path, &table.body())?;
    Ok(vec![path])
}

/// One row of the validation table: a named residual, its threshold,
/// and the comparison direction ("below" for agreement checks, "above"
/// for discriminators that must visibly fail).
struct SuiteRow {
    name: &'static str,
    residual: f64,
    threshold: f64,
    above: bool,
}

fn validate(r: &Resolved, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let u = units();
    let mut rows: Vec<SuiteRow> = Vec::new();

    // Resolvent: free lattice exactness and spectral-oracle agreement.
    let grid = Grid1D::new(64, 2.0 * PI)?;
    let zero = vec![0.0; 64];
    let z = Complex64::new(0.9, 1.1);
    let mut dev: f64 = 0.0;
    for p in [0.0f64, 1.0, 3.0] {
        let field = validator::resolvent_solve(&grid, &zero, p, z, 1.0, &u)?;
        let expect = validator::free_resolvent(p, z, 1.0)?;
        for v in &field.values {
            dev = dev.max((v - expect).norm());
        }
    }
    rows.push(SuiteRow {
        name: "resolvent_free_lattice",
        residual: dev,
        threshold: 1e-9,
        above: false,
    });

    let pts = grid.points();
    let pot_samples: Vec<f64> = pts.iter().map(|&x| 0.5 * x.sin() + 0.3 * (2.0 * x).cos()).collect();
    let lu = validator::resolvent_solve(&grid, &pot_samples, 0.7, z, 1.0, &u)?;
    let sp = validator::resolvent_spectral(&grid, &pot_samples, 0.7, z, 1.0, &u)?;
    let dev = lu
        .values
        .iter()
        .zip(&sp)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    rows.push(SuiteRow {
        name: "resolvent_lu_vs_spectral",
        residual: dev,
        threshold: 1e-8,
        above: false,
    });

    let small = Grid1D::new(16, 2.0 * PI)?;
    let small_pot: Vec<f64> = small.points().iter().map(|&x| 0.4 * x.sin() + 0.4).collect();
    let contour = validator::contour_vs_residue(&small, &small_pot, 1.0, 4.0, 1.0, &u)?;
    rows.push(SuiteRow {
        name: "contour_vs_residue",
        residual: contour.max_abs_diff,
        threshold: 1e-8,
        above: false,
    });

    let pair_pot = PairPotential::new(0, 0, PotentialForm::Gaussian { k0: 0.6, r0: 0.8 });
    let dev = validator::pair_interchange_deviation(
        &small,
        &pair_pot,
        0.7,
        -1.1,
        1.0,
        Complex64::new(1.0, 1.5),
        &u,
    )?;
    rows.push(SuiteRow {
        name: "pair_interchange",
        residual: dev,
        threshold: 1e-12,
        above: false,
    });

    // Contour density against the independent pair-correlation path,
    // plus normalization, for both statistics.
    let mut pc_dev: f64 = 0.0;
    let mut norm_dev: f64 = 0.0;
    for stat in [Statistics::Fermi, Statistics::Bose] {
        let sp = SpeciesSpec::new("v", 1.2, 2, stat, 0.4).map_err(CliError::from)?;
        let species = vec![sp];
        let tau = 0.9;
        let s2 = MultiIndex::two(0, 1).map_err(CliError::from)?;
        for i in 0..50 {
            let rr = 0.05 * i as f64;
            let rho2 = validator::density_from_contour(&s2, &species, tau, rr, &u)?;
            let g = mixtherm::exchange::ideal_pair_correlation(rr, &species[0], tau, &u)?;
            pc_dev = pc_dev.max((rho2 - 0.4 * 0.4 * g).abs());
        }
        let s1 = MultiIndex::one(0, 1).map_err(CliError::from)?;
        let rho1 = validator::density_from_contour(&s1, &species, tau, 0.0, &u)?;
        norm_dev = norm_dev.max((rho1 / 0.4 - 1.0).abs());
    }
    rows.push(SuiteRow {
        name: "pair_correlation_match",
        residual: pc_dev,
        threshold: 1e-8,
        above: false,
    });
    rows.push(SuiteRow {
        name: "normalization",
        residual: norm_dev,
        threshold: 1e-10,
        above: false,
    });

    // Classical BBGKY: isotropic, closure, and the wrong-sign
    // discriminator.
    let bb_pot = PairPotential::new(0, 0, PotentialForm::Gaussian { k0: 0.5, r0: 0.5 });
    let g64 = Grid1D::new(64, 2.0 * PI)?;
    let two = ClassicalAnsatz2::pair_closure(&g64, 1.0, 0.3, &|_| 0.0, &bb_pot)?;
    let one = two.marginal(1.0);
    let res = validator::bbgky_residual_s1(&one, &two, &|_| 0.0, &bb_pot)?;
    rows.push(SuiteRow {
        name: "bbgky_isotropic",
        residual: res,
        threshold: 1e-12,
        above: false,
    });

    let g256 = Grid1D::new(256, 2.0 * PI)?;
    let v_ext = |x: f64| 0.4 * x.sin();
    let dv_ext = |x: f64| 0.4 * x.cos();
    let two = ClassicalAnsatz2::pair_closure(&g256, 1.0, 0.3, &v_ext, &bb_pot)?;
    let one = two.marginal(1.0);
    let res = validator::bbgky_residual_s1(&one, &two, &dv_ext, &bb_pot)?;
    rows.push(SuiteRow {
        name: "bbgky_closure",
        residual: res,
        threshold: 1e-6,
        above: false,
    });

    let flipped = PairPotential::new(0, 0, PotentialForm::Gaussian { k0: -0.5, r0: 0.5 });
    let two = ClassicalAnsatz2::pair_closure(&g256, 1.0, 0.3, &v_ext, &flipped)?;
    let one = two.marginal(1.0);
    let res = validator::bbgky_residual_s1(&one, &two, &dv_ext, &bb_pot)?;
    rows.push(SuiteRow {
        name: "bbgky_wrong_sign_discriminator",
        residual: res,
        threshold: 1e-2,
        above: true,
    });

    let mut table = CsvTable::new(&["suite", "residual", "threshold", "direction", "pass"]);
    let mut failed = Vec::new();
    for row in &rows {
        let pass = if row.above {
            row.residual > row.threshold
        } else {
            row.residual <= row.threshold
        };
        if !pass {
            failed.push(row.name);
        }
        table.push(vec![
            row.name.to_string(),
            fmt_f64(row.residual),
            fmt_f64(row.threshold),
            (if row.above { "above" } else { "below" }).to_string(),
            (if pass { "1" } else { "0" }).to_string(),
        ]);
    }
    let path = out.join("validate.csv");
    write_atomic(&path, &table.body())?;
    if !failed.is_empty() {
        return Err(CliError::Numeric {
            message: format!("validation suites failed: {}", failed.join(", ")),
        });
    }
    let _ = &r.label_index; // species config is accepted but not needed here
    Ok(vec![path])
}
