use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swipt_core::channel::{draw_realization, linear_to_db, watts_to_dbm};
use swipt_core::config::ConfigFile;
use swipt_core::engine::format_history;
use swipt_core::harness::{run_sweep_with, write_outputs, SweepResult};
use swipt_core::hermitian::{eigenvalues, vec_norm};
use swipt_core::model::write_dump;
use swipt_core::pipeline::{solve_realization, verify_saved, CheckTolerances, PipelineOutput, SavedSolution};
use swipt_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_ALL_FAILED: u8 = 3;
const EXIT_CHECK_FAILED: u8 = 1;

#[derive(Parser)]
#[command(
    name = "swipt",
    version,
    about = "Secure beamforming with artificial noise for wireless power transfer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one channel realization and print the policy and its metrics.
    Solve {
        /// Scenario file (TOML).
        config: PathBuf,
        /// Realization seed; overrides `seed` in the file.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the relaxed program in the plain-text dump format.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Save the solution as JSON for `swipt check`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the solver iteration log to this file.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Print the solver iteration log to stderr.
        #[arg(short, long)]
        verbose: bool,
    },
    /// Run a Monte Carlo sweep and write per-trial and summary CSV files.
    Sweep {
        /// Sweep file (TOML).
        config: PathBuf,
        /// Per-trial CSV; overrides `sweep.csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Aggregate CSV; overrides `sweep.summary`.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Number of trials per grid point; overrides `sweep.n_trials`.
        #[arg(long)]
        trials: Option<usize>,
        /// Master seed; overrides `sweep.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// No progress output.
        #[arg(short, long)]
        quiet: bool,
    },
    /// Re-verify a saved solution: KKT residuals, constraints and the
    /// rank-one certificate.
    Check {
        /// Solution file written by `swipt solve --out`.
        solution: PathBuf,
    },
}

enum Failure {
    Config(String),
    AllFailed(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            config,
            seed,
            dump,
            out,
            log,
            verbose,
        } => cmd_solve(&config, seed, dump.as_deref(), out.as_deref(), log.as_deref(), verbose),
        Command::Sweep {
            config,
            csv,
            summary,
            trials,
            seed,
            quiet,
        } => cmd_sweep(&config, csv, summary, trials, seed, quiet),
        Command::Check { solution } => cmd_check(&solution),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::AllFailed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_ALL_FAILED)
        }
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
    }
}

fn cmd_solve(
    path: &Path,
    seed: Option<u64>,
    dump: Option<&Path>,
    out: Option<&Path>,
    log: Option<&Path>,
    verbose: bool,
) -> Result<(), Failure> {
    let file = ConfigFile::load(path)?;
    let params = file.scenario.to_params()?;
    let mut solver = file.solver.solver()?;
    solver.verbose |= verbose;
    let restore = file.solver.restore()?;
    let seed = seed.unwrap_or(file.seed);
    let (channels, seed) = match file.channels()? {
        Some(ch) => {
            ch.check_dims(&params).map_err(|e| Failure::Config(e.to_string()))?;
            (ch, None)
        }
        None => (draw_realization(&params, seed)?, Some(seed)),
    };
    let result = solve_realization(&channels, &params, &solver, &restore)?;
    if let Some(p) = dump {
        write_file(p, &write_dump(&result.problem))?;
    }
    if let Some(p) = log {
        write_file(p, &format_history(&result.solution.history, result.solution.status))?;
    }
    if let Some(p) = out {
        write_file(p, &SavedSolution::new(&params, &channels, seed, &result).to_json())?;
    }
    print!("{}", describe(&result, &params.cap_limit));
    match &result.failure {
        None => Ok(()),
        Some(e) => Err(Failure::AllFailed(e.to_string())),
    }
}

fn describe(result: &PipelineOutput, cap_limit: &[Vec<f64>]) -> String {
    let sol = &result.solution;
    let mut s = String::new();
    let _ = writeln!(s, "status      {}", sol.status.as_str());
    let _ = writeln!(s, "iterations  {}", sol.iterations);
    let _ = writeln!(
        s,
        "tau         {:.9e} W ({:.4} dBm)",
        sol.primal.tau,
        watts_to_dbm(sol.primal.tau)
    );
    let _ = writeln!(s, "dual bound  {:.9e} W", sol.dual_objective);
    let (Some((policy, cert)), Some(rep)) = (&result.policy, &result.report) else {
        if let Some(e) = &result.failure {
            let _ = writeln!(s, "no policy: {e}");
        }
        return s;
    };
    let _ = writeln!(s, "\nbeams");
    for (k, b) in policy.beams.iter().enumerate() {
        let entries: Vec<String> = b.iter().map(|z| format!("{:+.4e}{:+.4e}i", z.re, z.im)).collect();
        let _ = writeln!(
            s,
            "  w{}  power {:.6e} W  relaxed rank {}  [{}]",
            k + 1,
            vec_norm(b).powi(2),
            cert.beams[k].rank_of_w,
            entries.join(", ")
        );
    }
    let ev = eigenvalues(&policy.noise_cov);
    let top = ev.iter().copied().fold(0.0, f64::max);
    let rank = ev.iter().filter(|&&e| e > 1e-9 * top).count();
    let _ = writeln!(s, "  noise power {:.6e} W  rank {rank}", policy.noise_cov.trace());
    let _ = writeln!(s, "  total power {:.6e} W", policy.total_power());
    let _ = writeln!(s, "\nenergy receivers");
    for (j, p) in rep.harvested_w.iter().enumerate() {
        let _ = writeln!(s, "  ER{}  harvested {:.6e} W ({:.4} dBm)", j + 1, p, watts_to_dbm(*p));
    }
    let _ = writeln!(s, "\ninformation receivers");
    for k in 0..rep.sinr.len() {
        let worst = rep.eaves_cap.iter().map(|row| row[k]).fold(0.0, f64::max);
        let _ = writeln!(
            s,
            "  IR{}  SINR {:.4} dB  secrecy {:.4} bit/s/Hz  worst eavesdropper {:.4} bit/s/Hz",
            k + 1,
            linear_to_db(rep.sinr[k]),
            rep.secrecy_cap[k],
            worst
        );
    }
    let _ = writeln!(
        s,
        "  largest capacity excess {:.3e} bit/s/Hz",
        rep.max_c2_excess(cap_limit).max(0.0)
    );
    s
}

fn cmd_sweep(
    path: &Path,
    csv: Option<PathBuf>,
    summary: Option<PathBuf>,
    trials: Option<usize>,
    seed: Option<u64>,
    quiet: bool,
) -> Result<(), Failure> {
    let file = ConfigFile::load(path)?;
    let mut config = file.sweep_config()?;
    if csv.is_some() {
        config.csv_path = csv;
    }
    if summary.is_some() {
        config.summary_path = summary;
    }
    if let Some(n) = trials {
        config.n_trials = n;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    let result = run_sweep_with(&config, |done, total| {
        if !quiet {
            eprintln!("grid point {done}/{total}");
        }
    })?;
    write_outputs(&config, &result)?;
    print!("{}", summary_table(&result));
    if result.all_failed() {
        return Err(Failure::AllFailed("no scheme solved any trial".into()));
    }
    Ok(())
}

fn summary_table(result: &SweepResult) -> String {
    let mut s = format!(
        "{:>6} {:>4} {:>10} {:>6} {:>6} {:>12} {:>10} {:>8} {:>8}\n",
        "gamma", "n_tx", "scheme", "used", "excl", "harv_dBm", "secrecy", "infeas", "c2_viol"
    );
    for p in &result.summaries {
        let _ = writeln!(
            s,
            "{:>6} {:>4} {:>10} {:>6} {:>6} {:>12.4} {:>10.4} {:>8.3} {:>8.3}",
            p.gamma_db,
            p.n_tx,
            p.scheme.as_str(),
            p.n_included,
            p.n_excluded,
            p.mean_harvested_dbm,
            p.mean_secrecy,
            p.infeasible_rate,
            p.c2_violation_rate
        );
    }
    s
}

fn cmd_check(path: &Path) -> Result<(), Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let saved = SavedSolution::from_json(&text)?;
    let rep = verify_saved(&saved, &CheckTolerances::default())?;
    println!("status              {}", rep.status.as_str());
    println!("tau                 {:.9e} W", rep.tau);
    println!("duality gap         {:.3e}", rep.kkt.gap);
    for f in &rep.kkt.primal {
        println!("{:<19} {:.3e} (relative)", format!("{} residual", f.family), f.rel);
    }
    println!("primal cone         {:.3e}", rep.kkt.primal_cone);
    println!("dual cone           {:.3e}", rep.kkt.dual_cone);
    println!("stationarity        {:.3e}", rep.kkt.max_stationarity());
    println!("complementarity     {:.3e}", rep.kkt.complementarity_rel);
    match &rep.policy {
        Ok(r) => println!(
            "policy              feasible, min harvested {:.6e} W",
            r.min_harvested_w
        ),
        Err(e) => println!("policy              {e}"),
    }
    match &rep.certificate {
        Ok(c) => {
            let ranks: Vec<String> = c.beams.iter().map(|b| b.rank_of_w.to_string()).collect();
            println!("rank-one recovery   ok (relaxed ranks {})", ranks.join(" "));
        }
        Err(e) => println!("rank-one recovery   {e}"),
    }
    if rep.passed() {
        println!("result              pass");
        Ok(())
    } else {
        println!("result              fail");
        Err(Failure::Check(rep.failures.join("; ")))
    }
}
