use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mcg_core::catalog::full_presentation;
use mcg_core::delta::{check_derivations, epsilon_table, tail_mismatches, Source};
use mcg_core::extension::extend;
use mcg_core::homology::verify_presentation;
use mcg_core::serial::{self, Format};
use mcg_core::subgroup::basis_report;
use mcg_core::Error;

#[derive(Parser, Debug)]
#[command(name = "mcgn", version, about = "Presentations of mapping class groups of nonorientable surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Genus (number of crosscaps), at least 1.
    #[arg(long, global = true, default_value_t = 1, allow_negative_numbers = true)]
    g: i64,
    /// Number of boundary components.
    #[arg(long, global = true, default_value_t = 0, allow_negative_numbers = true)]
    n: i64,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Human)]
    format: OutFormat,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Print the presentation of M(N_{g,n}).
    Present,
    /// Check every relator in the Z/2 homology representation.
    Verify,
    /// Compare the Reidemeister-Schreier generators with the named basis.
    SubgroupBasis,
    /// Rebuild M(N_{g,n}) from M(N_{g,n-1}) and compare with the catalog.
    Extend,
    /// Replay the lantern-calculus derivations and build the exponent table.
    CheckDerivations,
    /// Abelian invariants, and their stability under seeded Tietze moves.
    Abelianize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum OutFormat {
    Structured,
    AlgebraText,
    Human,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Structured => Format::Structured,
            OutFormat::AlgebraText => Format::AlgebraText,
            OutFormat::Human => Format::Human,
        }
    }
}

/// A finished command: its output and whether every check passed.
struct Outcome {
    text: String,
    passed: bool,
}

enum Failure {
    Usage(String),
    Module(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::InvalidSurface { .. } => Failure::Usage(e.to_string()),
            other => Failure::Module(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Failure {
        Failure::Module(e)
    }
}

fn surface(cli: &Cli, min_n: i64) -> Result<(u16, u16), Failure> {
    if cli.g < 1 || cli.n < 0 || cli.g > 64 || cli.n > 64 {
        return Err(Failure::Usage(format!("invalid surface parameters g={}, n={}", cli.g, cli.n)));
    }
    if cli.n < min_n {
        return Err(Failure::Usage(format!("this command needs n >= {min_n}, got n={}", cli.n)));
    }
    Ok((cli.g as u16, cli.n as u16))
}

/// Reports are JSON or text; `run` rejects algebra-text for them.
fn structured(cli: &Cli) -> bool {
    cli.format == OutFormat::Structured
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn present(cli: &Cli) -> Result<Outcome, Failure> {
    let (g, n) = surface(cli, 0)?;
    let p = full_presentation(g, n)?;
    Ok(Outcome { text: serial::render(&p, cli.format.into()), passed: true })
}

fn verify(cli: &Cli) -> Result<Outcome, Failure> {
    let (g, n) = surface(cli, 0)?;
    let structured = structured(cli);
    let r = verify_presentation(g, n)?;
    let text = if structured {
        let fams: serde_json::Map<String, Value> = r
            .families
            .iter()
            .map(|(k, f)| {
                let v = json!({
                    "emitted": f.emitted,
                    "verified": f.verified,
                    "failed": f.failed,
                    "first_witness": f.first_witness,
                });
                (k.clone(), v)
            })
            .collect();
        pretty(&json!({
            "surface": { "genus": g, "boundary": n },
            "families": fams,
            "forms_preserved": r.forms_preserved,
            "flagged": r.flagged,
            "failures": r.failures(),
        }))
    } else {
        let mut s = format!("verify N_{{{g},{n}}}\n");
        for (k, f) in &r.families {
            let _ = write!(s, "  {k:<6} {:>5} emitted {:>5} verified {:>3} failed", f.emitted, f.verified, f.failed);
            if let Some(w) = &f.first_witness {
                let _ = write!(s, "  first: {w}");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "  forms preserved: {}", r.forms_preserved);
        for f in &r.flagged {
            let _ = writeln!(s, "  flagged: {f}");
        }
        let _ = writeln!(s, "{} failure(s)", r.failures());
        s
    };
    Ok(Outcome { text, passed: r.passed() })
}

fn subgroup(cli: &Cli) -> Result<Outcome, Failure> {
    let (g, n) = surface(cli, 2)?;
    let structured = structured(cli);
    let r = basis_report(g, n)?;
    let text = if structured {
        pretty(&json!({
            "surface": { "genus": g, "boundary": n },
            "schreier_rank": r.schreier_rank,
            "basis_rank": r.basis_rank,
            "expected_rank": r.expected_rank,
            "isomorphic": r.isomorphic,
            "rewrites": r.rewrites,
        }))
    } else {
        format!(
            "orientation kernel of pi_1(N_{{{g},{}}})\n  Schreier rank {}  basis rank {}  expected {}\n  folded graphs isomorphic: {}\n  basis rewrites: {}\n",
            n - 1,
            r.schreier_rank,
            r.basis_rank,
            r.expected_rank,
            r.isomorphic,
            r.rewrites
        )
    };
    Ok(Outcome { text, passed: r.holds() })
}

fn extend_cmd(cli: &Cli) -> Result<Outcome, Failure> {
    let (g, n) = surface(cli, 2)?;
    let structured = structured(cli);
    let table = epsilon_table(g, n)?;
    let r = extend(g, n, &table.values)?;
    let c = &r.comparison;
    let text = if structured {
        pretty(&json!({
            "surface": { "genus": g, "boundary": n },
            "only_assembled": c.only_left,
            "only_catalog": c.only_right,
            "warnings": table.warnings,
        }))
    } else {
        let mut s = format!(
            "extension N_{{{g},{}}} -> N_{{{g},{n}}}: {} generators, {} relators\n",
            n - 1,
            r.assembled.alphabet.len(),
            r.assembled.relators.len()
        );
        for l in &c.only_left {
            let _ = writeln!(s, "  only assembled: {l}");
        }
        for l in &c.only_right {
            let _ = writeln!(s, "  only catalog: {l}");
        }
        for w in &table.warnings {
            let _ = writeln!(s, "  warning: {w}");
        }
        let _ = writeln!(s, "{}", if c.is_empty() { "no differences" } else { "presentations differ" });
        s
    };
    Ok(Outcome { text, passed: c.is_empty() })
}

fn derivations(cli: &Cli) -> Result<Outcome, Failure> {
    let (g, n) = surface(cli, 2)?;
    let structured = structured(cli);
    let reports = check_derivations(g, n)?;
    let table = epsilon_table(g, n)?;
    let tails = tail_mismatches(&table);
    let passed = reports.iter().all(|r| r.holds()) && tails.is_empty();
    let source = |s: Source| match s {
        Source::Derivation => "derivation",
        Source::Summary => "summary",
        Source::Default => "default",
    };
    let text = if structured {
        let reps: Vec<Value> = reports
            .iter()
            .map(|r| {
                json!({
                    "name": r.name,
                    "family": r.key.0,
                    "branch": r.key.1,
                    "epsilon": r.epsilon,
                    "stated": r.stated,
                    "instances": r.instances.len(),
                    "holds": r.holds(),
                    "first_failure": r.first_failure(),
                })
            })
            .collect();
        let eps: Vec<Value> = table
            .values
            .iter()
            .map(|(k, v)| json!({ "family": k.0, "branch": k.1, "epsilon": v, "source": source(table.sources[k]) }))
            .collect();
        let tails: Vec<Value> = tails
            .iter()
            .map(|(f, b, e, t)| json!({ "family": f, "branch": b, "epsilon": e, "tail": t }))
            .collect();
        pretty(&json!({
            "surface": { "genus": g, "boundary": n },
            "derivations": reps,
            "epsilon": eps,
            "tail_mismatches": tails,
            "warnings": table.warnings,
        }))
    } else {
        let mut s = format!("derivations on N_{{{g},{n}}}\n");
        for r in &reports {
            let status = if r.instances.is_empty() {
                "no instance".to_string()
            } else if r.holds() {
                format!("ok ({} instance(s))", r.instances.len())
            } else {
                format!("FAILED: {}", r.first_failure().unwrap_or_default())
            };
            let _ = writeln!(s, "  {:<20} {} {:<8} eps {:>2}  {status}", r.name, r.key.0, r.key.1, r.epsilon);
        }
        let nonzero: Vec<String> = table
            .values
            .iter()
            .filter(|(_, v)| **v != 0)
            .map(|(k, v)| format!("{} {} = {v} [{}]", k.0, k.1, source(table.sources[k])))
            .collect();
        let _ = writeln!(s, "  nonzero exponents: {}", if nonzero.is_empty() { "none".into() } else { nonzero.join("; ") });
        for (f, b, e, t) in &tails {
            let _ = writeln!(s, "  tail mismatch: {f} {b}: epsilon {e}, printed tail {t}");
        }
        for w in &table.warnings {
            let _ = writeln!(s, "  warning: {w}");
        }
        s
    };
    Ok(Outcome { text, passed })
}

fn abelianize(cli: &Cli) -> Result<Outcome, Failure> {
    let (g, n) = surface(cli, 0)?;
    let structured = structured(cli);
    let p = full_presentation(g, n)?;
    let inv = p.abelianization()?;
    let moved = p.random_tietze(cli.seed, 16)?.abelianization()?;
    let torsion: Vec<String> = inv.torsion.iter().map(|t| t.to_string()).collect();
    let text = if structured {
        pretty(&json!({
            "surface": { "genus": g, "boundary": n },
            "torsion": torsion,
            "free_rank": inv.free_rank,
            "tietze_seed": cli.seed,
            "tietze_invariant": moved == inv,
        }))
    } else {
        format!(
            "H_1(M(N_{{{g},{n}}})): torsion [{}], free rank {}\n  invariant under seeded Tietze moves (seed {}): {}\n",
            torsion.join(", "),
            inv.free_rank,
            cli.seed,
            moved == inv
        )
    };
    Ok(Outcome { text, passed: moved == inv })
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    if cli.command != Command::Present && cli.format == OutFormat::AlgebraText {
        return Err(Failure::Usage("algebra-text applies to `present` only".into()));
    }
    match cli.command {
        Command::Present => present(cli),
        Command::Verify => verify(cli),
        Command::SubgroupBasis => subgroup(cli),
        Command::Extend => extend_cmd(cli),
        Command::CheckDerivations => derivations(cli),
        Command::Abelianize => abelianize(cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &out.text).with_context(|| format!("writing {}", path.display())),
                None => {
                    print!("{}", out.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(3);
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Module(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
