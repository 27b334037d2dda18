//! The `treedim` command line.
//!
//! Exit codes: 0 on success (including a negative membership answer), 1 when
//! `verify` finds a violation, 2 on usage, configuration or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{load_family, ConfigError, FamilyDoc, GaleDoc};
use crate::gales::{
    cut_point, supergale_check, vf_value, witness_exponents, write_witness_csv, DEFAULT_PRECISION,
};
use crate::rat::{format_rat, parse_nat, parse_rat, Rat};
use crate::structure::{write_table_csv, write_table_json, ExponentFn};
use crate::treefam::{TreeFamily, Word};
use crate::verify::{run_suite, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "treedim", version, about = "Tree families with prescribed prefix densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Jsonlike,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive the per-level parameters and write them as a family document.
    Derive {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the structure exponent and density for lengths 1..=max-len.
    Structure {
        #[arg(long)]
        config: PathBuf,
        /// Decimal, any size.
        #[arg(long)]
        max_len: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a word is a prefix of the family and list its successors.
    Member {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
    },
    /// Evaluate the martingale and, optionally, the sigma-gale at a word.
    Martingale {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long)]
        sigma: Option<String>,
    },
    /// Run the invariant suite; exit 1 on any violation.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        depth: usize,
        /// Most words a single walk visits.
        #[arg(long, default_value_t = 50_000)]
        budget: u64,
        /// Largest language enumerated explicitly.
        #[arg(long, default_value_t = crate::oracle::DEFAULT_CAP)]
        cap: u64,
    },
    /// Density estimates over the first levels and, given sigma and
    /// alpha-hat, the witness exponents.
    Dimension {
        #[arg(long)]
        config: PathBuf,
        /// Use levels 0..=N.
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        alpha_hat: Option<String>,
    },
    /// Cut point of a gale table.
    Cutpoint {
        #[arg(long)]
        gale: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: usize,
    },
}

/// Failure of a command, mapped to an exit code.
enum Failure {
    /// Bad input of any kind: exit 2.
    Usage(String),
    /// A check found violations: exit 1.
    Violations,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out) {
        Ok(()) => 0,
        Err(Failure::Violations) => 1,
        Err(Failure::Usage(msg)) => {
            let _ = out.flush();
            eprintln!("error: {msg}");
            2
        }
    }
}

fn family_from(path: &Path) -> Result<TreeFamily, Failure> {
    Ok(load_family(path)?.family()?)
}

fn parse_sigma(s: &str, name: &str) -> Result<Rat, Failure> {
    parse_rat(s).map_err(|e| Failure::Usage(format!("--{name}: {e}")))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => out.write_all(bytes).map_err(usage),
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Derive { config, out: path } => {
            let doc = FamilyDoc::load(&config)?;
            let fam = doc.interpret()?.family()?;
            let text = doc.with_levels(&fam).to_toml();
            emit(out, path.as_deref(), text.as_bytes())
        }
        Command::Structure {
            config,
            max_len,
            format,
            out: path,
        } => {
            let fam = family_from(&config)?;
            let max_len = parse_nat(&max_len).map_err(|e| usage(format!("--max-len: {e}")))?;
            let ef = ExponentFn::new(&fam);
            let rows = ef.table(&max_len).map_err(usage)?;
            let mut buf = Vec::new();
            match format {
                TableFormat::Csv => write_table_csv(&rows, &mut buf),
                TableFormat::Jsonlike => write_table_json(&rows, &mut buf),
            }
            .map_err(usage)?;
            emit(out, path.as_deref(), &buf)
        }
        Command::Member { config, word } => {
            let fam = family_from(&config)?;
            let w = Word::parse(&word, fam.alphabet_size()).map_err(usage)?;
            let member = fam.member_pref(&w).map_err(usage)?;
            writeln!(out, "word: {}", w.render(fam.alphabet_size())).map_err(usage)?;
            writeln!(out, "member: {member}").map_err(usage)?;
            if member && num_bigint::BigUint::from(w.len()) < *fam.ell_last() {
                let succ = fam.successors(&w).map_err(usage)?;
                let letters: Vec<String> = succ.iter().map(|x| x.to_string()).collect();
                writeln!(out, "successors: {{{}}}", letters.join(",")).map_err(usage)?;
            }
            Ok(())
        }
        Command::Martingale {
            config,
            word,
            sigma,
        } => {
            let fam = family_from(&config)?;
            let w = Word::parse(&word, fam.alphabet_size()).map_err(usage)?;
            let ef = ExponentFn::new(&fam);
            let v = vf_value(&ef, &w).map_err(usage)?;
            writeln!(out, "word: {}", w.render(fam.alphabet_size())).map_err(usage)?;
            match v.exponent() {
                None => writeln!(out, "V: 0").map_err(usage)?,
                Some(e) => {
                    let value = v.as_rational(fam.alphabet_size()).expect("integral exponent");
                    writeln!(out, "V: {} = X^{}", format_rat(&value), format_rat(e))
                        .map_err(usage)?;
                }
            }
            if let Some(s) = sigma {
                let s = parse_sigma(&s, "sigma")?;
                if s < Rat::from_integer(0.into()) || s > Rat::from_integer(1.into()) {
                    return Err(usage("--sigma must lie in [0,1]"));
                }
                let len = Rat::from_integer(w.len().into());
                let d = v.shift(&-((Rat::from_integer(1.into()) - &s) * len));
                match d.exponent() {
                    None => writeln!(out, "gale(sigma={}): 0", format_rat(&s)),
                    Some(e) => {
                        writeln!(out, "gale(sigma={}): X^{}", format_rat(&s), format_rat(e))
                    }
                }
                .map_err(usage)?;
            }
            Ok(())
        }
        Command::Verify {
            config,
            depth,
            budget,
            cap,
        } => {
            let loaded = load_family(&config)?;
            let opts = VerifyOptions {
                depth,
                cap,
                node_budget: budget,
            };
            let report = run_suite(&loaded, &opts);
            writeln!(out, "{report}").map_err(usage)?;
            if report.passed() {
                Ok(())
            } else {
                for c in report.checks.iter().filter(|c| !c.passed()) {
                    eprintln!("{}: {} violation(s)", c.name, c.violations.len());
                }
                Err(Failure::Violations)
            }
        }
        Command::Dimension {
            config,
            levels,
            sigma,
            alpha_hat,
        } => {
            let fam = family_from(&config)?;
            if levels > fam.last_level() {
                return Err(usage(format!(
                    "--levels {levels}: only levels 0..={} are materialized",
                    fam.last_level()
                )));
            }
            let fam = fam.truncated(levels).map_err(usage)?;
            let ef = ExponentFn::new(&fam);
            if levels >= 1 {
                let est = ef.dim_estimate(fam.ell_last()).map_err(usage)?;
                writeln!(out, "up_to: {}", fam.ell_last()).map_err(usage)?;
                writeln!(
                    out,
                    "empirical_min_density: {}",
                    format_rat(&est.empirical_min_density)
                )
                .map_err(usage)?;
                writeln!(out, "certified_lower: {}", format_rat(&est.certified_lower))
                    .map_err(usage)?;
                writeln!(out, "max_length_ratio: {}", format_rat(&est.max_length_ratio))
                    .map_err(usage)?;
            } else {
                let d = ef.density(fam.ell_last()).map_err(usage)?;
                writeln!(out, "up_to: {}", fam.ell_last()).map_err(usage)?;
                writeln!(out, "empirical_min_density: {}", format_rat(&d)).map_err(usage)?;
            }
            match (sigma, alpha_hat) {
                (Some(s), Some(a)) => {
                    let s = parse_sigma(&s, "sigma")?;
                    let a = parse_sigma(&a, "alpha-hat")?;
                    let recs = witness_exponents(&ef, &s, &a, 0..=levels).map_err(usage)?;
                    let mut buf = Vec::new();
                    write_witness_csv(&recs, &mut buf).map_err(usage)?;
                    out.write_all(&buf).map_err(usage)?;
                    for r in recs.iter().filter(|r| r.scan_flag) {
                        let verdict = if r.bound_holds == Some(true) {
                            "holds"
                        } else {
                            "fails"
                        };
                        writeln!(out, "level {}: exponent >= ell/i {verdict}", r.level)
                            .map_err(usage)?;
                    }
                }
                (None, None) => {}
                _ => return Err(usage("--sigma and --alpha-hat go together")),
            }
            Ok(())
        }
        Command::Cutpoint { gale, precision } => {
            let table = GaleDoc::load(&gale)?.to_table()?;
            let cp = cut_point(&table, precision).map_err(usage)?;
            writeln!(out, "cut_point: {cp}").map_err(usage)?;
            if table.sigma().is_some() {
                let r = supergale_check(&table).map_err(usage)?;
                for m in &r.missing_children {
                    eprintln!("warning: {m} missing from the table, taken as 0");
                }
                writeln!(out, "supergale_violations: {}", r.violations.len()).map_err(usage)?;
                for v in &r.violations {
                    writeln!(out, "  {v}").map_err(usage)?;
                }
            }
            Ok(())
        }
    }
}
