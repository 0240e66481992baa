//! Command-line front end over `ired-core`.
//!
//! Exit codes: 0 for affirmative answers and successful output, 1 for
//! negative answers (not bisimilar, invalid certificate, pair absent),
//! 2 for usage, parse, and IO errors.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ired_core::{
    certificate_to_json, check_certificate, close_universe, compress_prefix, gfp_relation,
    is_normal_form, lfp_ired, parse_certificate, parse_term, parse_term_lines, parse_trs,
    root_step_relation, step_at, CanonicalTerm, Certificate, CompressError, EscapeReport,
    IredAnalysis, Mode, Position, Relation, Signature, SymbolPolicy, Trs, Universe, Verdict,
};

#[derive(Parser)]
#[command(
    name = "ired",
    version,
    about = "Infinitary rewriting over rational terms"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide whether two rational terms denote the same infinite tree.
    Bisim {
        a: String,
        b: String,
        /// Comma-separated variable names occurring in the terms.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// Apply one rule of the system at one position.
    Step {
        /// Rewrite system file.
        #[arg(long)]
        trs: PathBuf,
        /// Subject term.
        #[arg(long)]
        term: String,
        /// Dot-separated 1-based indices; empty or ε for the root.
        #[arg(long, default_value = "")]
        pos: String,
        /// Rule index in file order, counting from 0.
        #[arg(long)]
        rule: usize,
        /// Extra variable names beyond those the system declares.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// Report whether a term has any redex at all.
    Nf {
        #[arg(long)]
        trs: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// Check a certificate file against a rewrite system.
    Check {
        cert: PathBuf,
        #[arg(long)]
        trs: PathBuf,
    },
    /// Compute a reachability relation over a finite universe of terms.
    Fixpoint {
        #[arg(long)]
        trs: PathBuf,
        /// File with one closed term per line.
        #[arg(long)]
        universe: PathBuf,
        /// One of: ired, biinf, eqinf.
        #[arg(long)]
        relation: String,
    },
    /// Produce a certificate for one pair of the reduction relation.
    Extract {
        #[arg(long)]
        trs: PathBuf,
        #[arg(long)]
        universe: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Flatten a reduction certificate into a finite rewrite prefix.
    Compress {
        cert: PathBuf,
        #[arg(long)]
        trs: PathBuf,
        /// Depth to which the prefix result must agree with the target.
        #[arg(long)]
        depth: usize,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Exit status for a negative answer, as opposed to an error.
fn negative() -> ExitCode {
    ExitCode::from(1)
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Bisim { a, b, vars } => {
            let vars: BTreeSet<String> = vars.into_iter().collect();
            let mut sig = Signature::new();
            let ta = parse_term(&a, &vars, SymbolPolicy::Extend(&mut sig))
                .map_err(|e| format!("first term: {e}"))?;
            let tb = parse_term(&b, &vars, SymbolPolicy::Extend(&mut sig))
                .map_err(|e| format!("second term: {e}"))?;
            if ta.bisimilar(&tb) {
                println!("bisimilar");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("not bisimilar");
                Ok(negative())
            }
        }
        Cmd::Step {
            trs,
            term,
            pos,
            rule,
            vars,
        } => {
            let trs = load_trs(&trs)?;
            let term = parse_in_system(&term, &trs, &vars)?;
            let pos: Position = pos.parse().map_err(|e| format!("{e}"))?;
            let out = step_at(&term, &pos, &trs, rule).map_err(|e| format!("{e}"))?;
            println!("{out}");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Nf { trs, term, vars } => {
            let trs = load_trs(&trs)?;
            let term = parse_in_system(&term, &trs, &vars)?;
            if is_normal_form(&term, &trs) {
                println!("normal form");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("reducible");
                Ok(negative())
            }
        }
        Cmd::Check { cert, trs } => {
            let trs = load_trs(&trs)?;
            let cert = load_cert(&cert, &trs)?;
            match check_certificate(&cert, &trs) {
                Verdict::Valid => {
                    println!("valid");
                    Ok(ExitCode::SUCCESS)
                }
                Verdict::Invalid(inv) => {
                    println!("invalid: {inv}");
                    Ok(negative())
                }
            }
        }
        Cmd::Fixpoint {
            trs,
            universe,
            relation,
        } => {
            let trs = load_trs(&trs)?;
            let u = load_universe(&universe, &trs)?;
            let (_, escapes) = root_step_relation(&u, &trs);
            warn_escapes(&escapes);
            let rel: Relation = match relation.as_str() {
                "ired" => lfp_ired(&u, &trs),
                "biinf" => gfp_relation(&u, &trs, Mode::BiInf),
                "eqinf" => gfp_relation(&u, &trs, Mode::EqInf),
                other => {
                    return Err(format!(
                        "unknown relation '{other}' (expected ired, biinf, or eqinf)"
                    ))
                }
            };
            for (i, j) in rel.pairs() {
                println!("{}  ~>  {}", u.term(i), u.term(j));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Extract {
            trs,
            universe,
            from,
            to,
        } => {
            let trs = load_trs(&trs)?;
            let u = load_universe(&universe, &trs)?;
            let from = parse_in_system(&from, &trs, &[])?;
            let to = parse_in_system(&to, &trs, &[])?;
            let analysis = IredAnalysis::new(&u, &trs);
            warn_escapes(analysis.escapes());
            match analysis.extract(&from, &to) {
                Ok(cert) => {
                    println!("{}", certificate_to_json(&cert));
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("{e}");
                    Ok(negative())
                }
            }
        }
        Cmd::Compress { cert, trs, depth } => {
            let trs = load_trs(&trs)?;
            let cert = load_cert(&cert, &trs)?;
            match compress_prefix(&cert, &trs, depth) {
                Ok(out) => {
                    for step in &out.steps {
                        println!("{}\t{}", step.position, step.rule_index);
                    }
                    println!("result: {}", out.result);
                    Ok(ExitCode::SUCCESS)
                }
                Err(CompressError::InvalidCertificate(inv)) => {
                    println!("invalid: {inv}");
                    Ok(negative())
                }
                Err(e) => Err(format!("{e}")),
            }
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_trs(path: &Path) -> Result<Trs, String> {
    parse_trs(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_cert(path: &Path, trs: &Trs) -> Result<Certificate, String> {
    parse_certificate(&read(path)?, trs).map_err(|e| format!("{}: {e}", path.display()))
}

/// Parse a term against the system's signature, with its declared variables
/// plus any extra names from the command line.
fn parse_in_system(src: &str, trs: &Trs, extra: &[String]) -> Result<CanonicalTerm, String> {
    let mut vars = trs.declared_vars().clone();
    vars.extend(extra.iter().cloned());
    let mut sig = trs.signature().clone();
    parse_term(src, &vars, SymbolPolicy::Extend(&mut sig)).map_err(|e| format!("{e}"))
}

fn load_universe(path: &Path, trs: &Trs) -> Result<Universe, String> {
    let mut sig = trs.signature().clone();
    let terms = parse_term_lines(&read(path)?, trs.declared_vars(), &mut sig)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    if terms.is_empty() {
        return Err(format!("{}: empty universe", path.display()));
    }
    Ok(close_universe(&terms))
}

/// Root steps that leave the universe make the printed relation an
/// underapproximation; say so on stderr without failing.
fn warn_escapes(escapes: &EscapeReport) {
    for esc in escapes {
        eprintln!(
            "warning: {} steps outside the universe to {} (rule {})",
            esc.source, esc.result, esc.rule
        );
    }
}
