use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use khier::commands::{self, parse_list, parse_scales};
use khier::io::{certificate_json, instance_to_string, parse_instance, to_canonical_string};
use khier::{read_file, write_file, CliError};
use khier_core::reduce::DEFAULT_TOL;
use khier_core::scalar::{format_rational, parse_rational};
use khier_core::verify::SLOPE_TOL;

#[derive(Parser)]
#[command(name = "khier", version, about = "Exponent hierarchies of SDP feasibility systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance of a built-in family as JSON.
    Generate {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 4)]
        size: usize,
        /// Polynomial coefficients a_0,...,a_2n (polyopt only).
        #[arg(long)]
        coeffs: Option<String>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report blocks, tail indices, quadratics and exponents of a regular system.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Run facial reduction first when the system is not regular.
        #[arg(long)]
        reduce: bool,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Reformulate a system into regular form by facial reduction.
    Reduce {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Certificate path; defaults to `<out>.cert.json`.
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Sweep strictly feasible points over scales and fit exponents.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// `lo:hi:count` (log-spaced) or a comma-separated list.
        #[arg(long, default_value = "1e2:1e5:8")]
        scales: String,
        /// Per-scale points as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-pair verdicts as CSV.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Exponents to test against instead of the computed hierarchy.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value_t = SLOPE_TOL)]
        tol: f64,
    },
    /// Exponent hierarchy for a tail index vector.
    Exponents {
        /// Tail indices t_2,...,t_k.
        #[arg(long)]
        tails: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        json: bool,
    },
}

fn verdict(pass: bool) -> String {
    let word = if pass { "PASS" } else { "FAIL" };
    if std::env::var_os("NO_COLOR").is_some() || !std::io::stdout().is_terminal() {
        word.to_string()
    } else if pass {
        format!("\x1b[32m{word}\x1b[0m")
    } else {
        format!("\x1b[31m{word}\x1b[0m")
    }
}

fn fmt_alpha(a: &[khier_core::scalar::Rational]) -> String {
    a.iter().map(format_rational).collect::<Vec<_>>().join(", ")
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { family, size, coeffs, out } => {
            let spec = commands::family_spec(&family, size, coeffs.as_deref())?;
            let text = commands::cmd_generate(&spec)?;
            match out {
                Some(p) => write_file(&p, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Analyze { input, json, reduce, tol } => {
            let sys = parse_instance(&read_file(&input)?)?;
            let report = commands::cmd_analyze(&sys, reduce, tol)?;
            print!("{}", report.to_text());
            if let Some(p) = json {
                write_file(&p, &to_canonical_string(&report.to_json()))?;
            }
        }
        Command::Reduce { input, out, cert, tol } => {
            let sys = parse_instance(&read_file(&input)?)?;
            let res = commands::cmd_reduce(&sys, tol)?;
            write_file(&out, &instance_to_string(&res.output))?;
            let cert_path = cert.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".cert.json");
                p.into()
            });
            write_file(&cert_path, &to_canonical_string(&certificate_json(&res.certificate, Some(res.round_trip_error))))?;
            let c = &res.certificate;
            println!("k = {}", c.k);
            println!("r = ({})", c.r.iter().map(usize::to_string).collect::<Vec<_>>().join(", "));
            println!("round-trip error = {:.3e}", res.round_trip_error);
            if c.heuristic {
                println!("warning: heuristic reduction, maximal rank not certified at some step");
            }
            if c.residual_pd_witness.is_some() {
                println!("warning: degenerate partition, the last step is positive definite");
            }
        }
        Command::Verify { input, scales, out, summary, alpha, tol } => {
            let sys = parse_instance(&read_file(&input)?)?;
            let scales = parse_scales(&scales)?;
            let alpha = alpha.map(|a| parse_list(&a, "exponent", parse_rational)).transpose()?;
            let res = commands::cmd_verify(&sys, &scales, alpha, tol)?;
            if let Some(p) = out {
                let f = std::fs::File::create(&p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                commands::write_sweep_csv(&res.sweep, f)?;
            }
            match summary {
                Some(p) => {
                    let f = std::fs::File::create(&p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                    commands::write_summary_csv(&res.report, f)?;
                }
                None => commands::write_summary_csv(&res.report, std::io::stdout())?,
            }
            println!("predicted alpha: ({})", fmt_alpha(&res.alpha));
            for p in &res.report.pairs {
                println!(
                    "pair ({}, {}): slope {:.4} vs {} residual {:.2e} {}",
                    p.j,
                    p.j + 1,
                    p.slope,
                    format_rational(&p.predicted),
                    p.residual,
                    verdict(p.pass)
                );
            }
            for (idx, j) in &res.quadratic_failures {
                println!("p{j} not strictly positive at scale #{}", idx + 1);
            }
            println!("overall: {}", verdict(res.pass()));
            if !res.pass() {
                return Err(CliError::VerifyFailed("fitted exponents do not match the hierarchy".into()));
            }
        }
        Command::Exponents { tails, k, json } => {
            let t = parse_list(&tails, "tail index", |s| s.parse::<usize>().ok())?;
            let res = commands::cmd_exponents(&t, k)?;
            if json {
                let v = serde_json::json!({
                    "tails": t,
                    "recursion": khier::io::hierarchy_json(&res.recursion),
                    "fourier_motzkin": khier::io::hierarchy_json(&res.fourier_motzkin),
                    "match": res.recursion.alpha() == res.fourier_motzkin.alpha(),
                    "magnitude_gap": format_rational(&res.gap),
                });
                print!("{}", to_canonical_string(&v));
            } else {
                println!("{}", fmt_alpha(res.recursion.alpha()));
                println!("fourier-motzkin: {}", fmt_alpha(res.fourier_motzkin.alpha()));
                println!("magnitude gap: {}", format_rational(&res.gap));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
