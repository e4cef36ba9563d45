//! Command-line front end: configuration, dispatch and result files.

pub mod config;
pub mod output;
pub mod selftest;

use std::path::PathBuf;

use rfi_qsdc::{evaluate_point, max_attenuation, optimize_mu, scan, Cutoff, Error, PointResult};

use config::{MuMode, RunConfig};
use output::Summary;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Scan,
    Point,
    Cutoff,
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Scan => "scan",
            Command::Point => "point",
            Command::Cutoff => "cutoff",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verbosity {
    Quiet,
    Normal,
    Verbose,
}

#[derive(Debug, Clone)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub verbosity: Verbosity,
}

#[derive(Debug, Default)]
struct Results {
    points: Vec<PointResult>,
    cutoffs: Vec<Cutoff>,
    selftest: Option<Vec<selftest::GroupReport>>,
}

fn compute(command: Command, cfg: &RunConfig, out: &Outputs) -> rfi_qsdc::Result<Results> {
    let mut res = Results::default();
    match command {
        Command::Scan => res.points = scan(&cfg.scan_config())?,
        Command::Point => {
            for beta in cfg.betas_rad() {
                match cfg.mu_mode {
                    MuMode::Fixed => {
                        for &mu in &cfg.mus {
                            res.points
                                .push(evaluate_point(&cfg.channel, cfg.attenuation_db, beta, mu, &cfg.options)?);
                        }
                    }
                    MuMode::Optimized => res.points.push(optimize_mu(
                        &cfg.channel,
                        cfg.attenuation_db,
                        beta,
                        &cfg.mu_search,
                        &cfg.options,
                    )?),
                }
            }
        }
        Command::Cutoff => {
            for (beta, deg) in cfg.betas_rad().into_iter().zip(&cfg.betas_deg) {
                match max_attenuation(&cfg.channel, beta, &cfg.mu_search, &cfg.options, cfg.cutoff_hi_db) {
                    Ok(c) => {
                        if out.verbosity >= Verbosity::Normal {
                            println!(
                                "A_max = {:.2} dB, L_max = {:.3} km (beta = {deg} deg, mu = {:.6e}){}",
                                c.a_max_db,
                                c.l_max_km,
                                c.point.mu,
                                if c.bracket_limited { ", bracket limited" } else { "" }
                            );
                        }
                        res.points.push(c.point.clone());
                        res.cutoffs.push(c);
                    }
                    Err(Error::AlwaysInsecure { lo_db, hi_db }) => {
                        if out.verbosity >= Verbosity::Normal {
                            println!("always insecure on [{lo_db}, {hi_db}] dB (beta = {deg} deg)");
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        Command::Selftest => res.selftest = Some(selftest::run(cfg.selftest_seed)),
    }
    Ok(res)
}

fn report_points(points: &[PointResult], verbosity: Verbosity) {
    if verbosity < Verbosity::Normal {
        return;
    }
    for p in points {
        let flags: Vec<&str> = p.flags.iter().map(|f| f.as_str()).collect();
        println!(
            "A = {} dB, beta = {} deg, mu = {:.6e}, C_s = {:.6e} bit/pulse{}",
            p.attenuation_db,
            p.beta_deg,
            p.mu,
            p.capacity,
            if flags.is_empty() { String::new() } else { format!(" [{}]", flags.join(";")) }
        );
    }
}

/// Executes one command and writes its outputs; returns the process exit code.
pub fn run(command: Command, cfg: &RunConfig, out: &Outputs) -> i32 {
    if out.verbosity >= Verbosity::Normal {
        eprint!("# resolved configuration\n{cfg}");
    }
    let res = match compute(command, cfg, out) {
        Ok(r) => r,
        Err(Error::InvalidParameter { name, reason }) => {
            eprintln!("error: key `{name}`: {reason}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("internal error: {e}");
            return EXIT_INTERNAL;
        }
    };

    let mut code = EXIT_OK;
    if let Some(groups) = &res.selftest {
        for g in groups {
            if out.verbosity >= Verbosity::Normal || !g.passed {
                println!(
                    "{}: {} ({} cases, worst {:.3e}, tolerance {:.0e})",
                    g.name,
                    if g.passed { "pass" } else { "FAIL" },
                    g.cases,
                    g.worst,
                    g.tolerance
                );
            }
        }
        if groups.iter().any(|g| !g.passed) {
            code = EXIT_INTERNAL;
        }
    }

    let io_result = (|| -> std::io::Result<()> {
        match (&out.csv, command) {
            (Some(path), _) => output::write_csv_file(path, &res.points)?,
            (None, Command::Scan) => output::write_csv(std::io::stdout().lock(), &res.points)?,
            (None, Command::Point) => report_points(&res.points, out.verbosity),
            _ => {}
        }
        if let Some(path) = &out.summary {
            output::write_json(
                path,
                &Summary {
                    command: command.name(),
                    config: cfg.resolved(),
                    points: &res.points,
                    cutoffs: &res.cutoffs,
                    flagged_points: res.points.iter().filter(|p| !p.is_healthy()).count(),
                    selftest: res.selftest.as_deref(),
                },
            )?;
        }
        Ok(())
    })();
    if let Err(e) = io_result {
        eprintln!("internal error: writing output: {e}");
        return EXIT_INTERNAL;
    }

    let flagged = res.points.iter().filter(|p| !p.is_healthy()).count();
    if flagged > 0 && out.verbosity >= Verbosity::Normal {
        eprintln!("# summary: {} points, {flagged} flagged", res.points.len());
        let mut counts = std::collections::BTreeMap::new();
        for f in res.points.iter().flat_map(|p| &p.flags) {
            *counts.entry(f.as_str()).or_insert(0usize) += 1;
        }
        for (f, n) in counts {
            eprintln!("#   {f}: {n}");
        }
    }
    code
}
