//! `formclass`: level-N form class groups of imaginary quadratic
//! discriminants, congruence-group actions, and the finite adelic
//! model, from the command line.
//!
//! Exit codes: 0 success, 1 usage or environment error, 2 a checked
//! identity failed, 3 an oracle seed bound was too small.

mod cache;
mod cases;
mod checks;
mod config;
mod errors;
mod report;

use checks::Filter;
use clap::{Parser, Subcommand};
use config::SweepConfig;
use errors::CliError;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "formclass",
    version = formclass::VERSION,
    about = "Form class groups with level structure: classes, group actions, and the finite adelic model",
    disable_help_subcommand = true
)]
struct Cli {
    /// Cache directory for single-case results (otherwise
    /// FORMCLASS_CACHE_DIR, then .formclass-cache)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Compute fresh without reading or writing the cache
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduced forms and the class number of a discriminant
    Forms {
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
    },
    /// Class representatives at a level under a congruence group
    Classgroup {
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
        #[arg(long)]
        level: u64,
        /// Group description: sl2:N, gamma1:N, gamma0:M@N,
        /// gammaG:N:t1,..., or gens:N:[[q,r,s,t],...]
        #[arg(long)]
        group: String,
    },
    /// Whether the group action preserves the level-N forms
    Acts {
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
        #[arg(long)]
        level: u64,
        #[arg(long)]
        group: String,
    },
    /// Whether the group induces a class group on its classes
    Induces {
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
        #[arg(long)]
        level: u64,
        #[arg(long)]
        group: String,
    },
    /// The mod-N model of the adelic group and its checks
    Adelic {
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
        #[arg(long)]
        level: u64,
        #[arg(long)]
        group: String,
    },
    /// Run grid cases and print the records as JSON
    Sweep {
        /// `default` or a path to a key-value config file
        #[arg(long, default_value = "default")]
        config: String,
        /// Keep only these discriminants (repeatable)
        #[arg(long, allow_negative_numbers = true)]
        disc: Vec<i64>,
        /// Keep only these levels (repeatable)
        #[arg(long)]
        level: Vec<u64>,
        /// Keep only these exact group descriptions (repeatable)
        #[arg(long)]
        group: Vec<String>,
        /// Keep only these checks (repeatable)
        #[arg(long)]
        check: Vec<String>,
        /// Worker threads (0 = automatic)
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Replay every check over the configured grid and write reports
    VerifyAll {
        /// `default` or a path to a key-value config file
        #[arg(long, default_value = "default")]
        config: String,
        /// Worker threads (0 = automatic)
        #[arg(long)]
        jobs: Option<usize>,
        /// Where to write report.json and report.md
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    std::process::exit(0);
                }
                _ => {
                    eprint!("{e}");
                    std::process::exit(1);
                }
            }
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            let diag = serde_json::json!({
                "error": err.kind(),
                "message": err.message(),
            });
            eprintln!("{diag}");
            std::process::exit(err.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Forms { disc } => single_case(
            &cli,
            "forms",
            &format!("disc={disc}"),
            "forms.v1",
            || cases::run_forms(*disc),
        ),
        Command::Classgroup { disc, level, group } => single_case(
            &cli,
            "classgroup",
            &format!("disc={disc},level={level},group={group}"),
            "classgroup.v1",
            || cases::run_classgroup(*disc, *level, group),
        ),
        Command::Acts { disc, level, group } => single_case(
            &cli,
            "acts",
            &format!("disc={disc},level={level},group={group}"),
            "verdict.v1",
            || cases::run_acts(*disc, *level, group),
        ),
        Command::Induces { disc, level, group } => single_case(
            &cli,
            "induces",
            &format!("disc={disc},level={level},group={group}"),
            "verdict.v1",
            || cases::run_induces(*disc, *level, group),
        ),
        Command::Adelic { disc, level, group } => single_case(
            &cli,
            "adelic",
            &format!("disc={disc},level={level},group={group}"),
            "adelic.v1",
            || cases::run_adelic(*disc, *level, group),
        ),
        Command::Sweep {
            config,
            disc,
            level,
            group,
            check,
            jobs,
        } => {
            let cfg = SweepConfig::load(config)?;
            let filter = Filter {
                discs: disc.clone(),
                levels: level.clone(),
                groups: group.clone(),
                checks: check.clone(),
            };
            let records = checks::run_grid(&cfg, &filter, jobs.unwrap_or(cfg.jobs))?;
            print!("{}", report::cases_json(&records));
            let summary = report::summarize(&records);
            Ok(if summary.fail > 0 { 2 } else { 0 })
        }
        Command::VerifyAll {
            config,
            jobs,
            output_dir,
        } => {
            let cfg = SweepConfig::load(config)?;
            let out_dir = output_dir.clone().unwrap_or_else(|| cfg.output_dir.clone());
            let started = Instant::now();
            let records = checks::run_grid(&cfg, &Filter::default(), jobs.unwrap_or(cfg.jobs))?;
            let elapsed = started.elapsed();
            let hash = cfg.hash();
            std::fs::create_dir_all(&out_dir).map_err(|e| {
                CliError::Io(format!("cannot create {}: {e}", out_dir.display()))
            })?;
            let json_path = out_dir.join("report.json");
            let md_path = out_dir.join("report.md");
            std::fs::write(&json_path, report::report_json(&hash, &records))
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", json_path.display())))?;
            std::fs::write(
                &md_path,
                report::report_markdown(&cfg, &hash, &records, elapsed),
            )
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", md_path.display())))?;
            let s = report::summarize(&records);
            println!(
                "verify-all: {} cases, {} pass, {} fail, {} not applicable -> {}",
                s.total,
                s.pass,
                s.fail,
                s.not_applicable,
                json_path.display()
            );
            Ok(if s.fail > 0 { 2 } else { 0 })
        }
    }
}

/// Runs one single-case subcommand through the cache, prints its
/// JSON, and maps an embedded failed cross-check to the violation
/// exit code.
fn single_case<F>(
    cli: &Cli,
    op: &str,
    params: &str,
    schema: &str,
    compute: F,
) -> Result<i32, CliError>
where
    F: FnOnce() -> Result<String, CliError>,
{
    let bytes = if cli.no_cache {
        compute()?
    } else {
        let dir = cache::resolve_dir(cli.cache_dir.as_deref());
        cache::fetch_or_compute(&dir, op, params, schema, compute)?.0
    };
    print!("{bytes}");
    let doc: serde_json::Value = serde_json::from_str(&bytes)
        .map_err(|e| CliError::Internal(format!("malformed output document: {e}")))?;
    if doc.get("consistent").and_then(|v| v.as_bool()) == Some(false) {
        return Err(CliError::Violation(format!(
            "{op} cross-check failed for {params}"
        )));
    }
    Ok(0)
}
