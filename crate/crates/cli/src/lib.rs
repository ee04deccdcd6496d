//! Command-line front end for `qsing-core`.
//!
//! [`run_cli`] parses arguments, dispatches a subcommand and writes its output;
//! the binary is a thin wrapper. Job files are described in [`job`], report
//! layouts in [`report`].

pub mod job;
pub mod report;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qsing_core::diffops::{diff_plus_ideal, log_diff_plus_ideal, LogContext};
use qsing_core::geom::{a_transform_module, blowup_chart, total_transform_module};
use qsing_core::qdiff::run_sequence;
use qsing_core::qmod::{eta_at, is_permissible_center, max_a_for_center, q_order_at, sing_test, QModule};
use qsing_core::{parse_poly, Error, ErrorCategory, ExpVec, PointSpec, Polynomial, Ring, RingRef};
use thiserror::Error as ThisError;

use crate::job::{parse_job, parse_var_list, split_list, OutputFormat};
use crate::report::{render_json, render_text, Verbosity};

pub const VERBOSITY_ENV: &str = "QSING_VERBOSITY";
pub const DEFAULT_SEED: u64 = 20261017;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn category(&self) -> ErrorCategory {
        match self {
            CliError::Usage(_) => ErrorCategory::Usage,
            CliError::Core(e) => e.category(),
            CliError::Io(_) => ErrorCategory::Domain,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            ErrorCategory::Usage => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "qsing", version, about = "Singularity invariants of O^q-modules over F_p")]
struct Cli {
    /// Report detail; defaults to $QSING_VERBOSITY, then `full`.
    #[arg(long, global = true)]
    verbosity: Option<Verbosity>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RingArgs {
    /// Characteristic.
    #[arg(long)]
    p: u64,
    /// q = p^e.
    #[arg(long, default_value_t = 1)]
    e: u32,
    /// `x1..x5` or a comma list.
    #[arg(long)]
    vars: String,
    /// Module generator; repeat for several.
    #[arg(long = "gen", required = true)]
    gens: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the q-expansion of each generator.
    Qexpand {
        #[command(flatten)]
        ring: RingArgs,
    },
    /// Print the q-order of the module at a point.
    Qorder {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long, default_value = "origin")]
        at: String,
    },
    /// Print eta of the module at a point.
    Eta {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long, default_value = "origin")]
        at: String,
    },
    /// Print Diff^i_+ of the module, logarithmic when --lambda or --L is given.
    Diff {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        i: u64,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long = "L")]
        l: Option<String>,
    },
    /// Decide whether a point lies in Sing(M, a).
    Sing {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        a: u64,
        #[arg(long, default_value = "origin")]
        at: String,
    },
    /// Check a coordinate center; without --a print the largest admissible a.
    Permissible {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        center: String,
        #[arg(long)]
        a: Option<u64>,
    },
    /// Blow up a coordinate center and print transforms on one or all charts.
    Blowup {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        center: String,
        #[arg(long)]
        chart: Option<String>,
        #[arg(long)]
        a: Option<u64>,
    },
    /// Run a job file.
    Run {
        file: PathBuf,
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// Run the randomized verification suites.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

struct Setup {
    ring: RingRef,
    gens: Vec<Polynomial>,
    module: QModule,
}

fn setup(args: &RingArgs) -> CliResult<Setup> {
    let names = parse_var_list(&args.vars).map_err(|m| CliError::Usage(format!("--vars: {m}")))?;
    let ring = Ring::new(args.p, &names)?;
    let gens = args
        .gens
        .iter()
        .map(|g| parse_poly(g, &ring))
        .collect::<qsing_core::Result<Vec<_>>>()?;
    let module = QModule::normal_form(&ring, gens.clone(), args.e)?;
    Ok(Setup { ring, gens, module })
}

fn names_to_set(ring: &RingRef, text: &str, flag: &str) -> CliResult<BTreeSet<usize>> {
    split_list(text)
        .iter()
        .map(|n| {
            ring.index_of(n)
                .ok_or_else(|| CliError::Usage(format!("{flag}: unknown variable `{n}`")))
        })
        .collect()
}

fn point(ring: &RingRef, text: &str) -> CliResult<PointSpec> {
    Ok(PointSpec::parse(text, ring)?)
}

fn cmd_qexpand(args: &RingArgs, out: &mut String) -> CliResult<()> {
    let s = setup(args)?;
    let q = s.ring.p().q(args.e)?;
    out.push_str(&format!("q = {q}\n"));
    for f in &s.gens {
        let x = f.q_expand(args.e)?;
        let (plus, _) = f.strip_q_power(args.e)?;
        out.push_str(&format!("f = {f}\n"));
        for (alpha, c) in x.buckets().iter().rev() {
            let m = Polynomial::monomial(&s.ring, alpha.clone(), 1);
            out.push_str(&format!("  {m} * ({c})^{q}\n"));
        }
        out.push_str(&format!("f+ = {plus}\n"));
    }
    Ok(())
}

fn log_context(ring: &RingRef, lambda: Option<&str>, l: Option<&str>) -> CliResult<LogContext> {
    let lam = match lambda {
        Some(t) => names_to_set(ring, t, "--lambda")?,
        None => BTreeSet::new(),
    };
    let exp = match l {
        Some(src) => {
            let poly = parse_poly(src, ring)?;
            match poly.leading_term() {
                Some((e, _)) if poly.is_monomial() => e.clone(),
                _ => return Err(CliError::Usage(format!("--L: `{src}` must be a single monomial"))),
            }
        }
        None => ExpVec::zero(ring.nvars()),
    };
    Ok(LogContext::new(ring, lam, exp)?)
}

fn cmd_blowup(
    args: &RingArgs,
    center: &str,
    chart: Option<&str>,
    a: Option<u64>,
    out: &mut String,
) -> CliResult<()> {
    let s = setup(args)?;
    let z = names_to_set(&s.ring, center, "--center")?;
    if z.is_empty() {
        return Err(CliError::Usage("--center: empty center".into()));
    }
    let charts: Vec<usize> = match chart {
        Some(name) => vec![s
            .ring
            .index_of(name.trim())
            .ok_or_else(|| CliError::Usage(format!("--chart: unknown variable `{name}`")))?],
        None => z.iter().copied().collect(),
    };
    let a = match a {
        Some(a) => a,
        None => max_a_for_center(&s.module, &z)?,
    };
    for t in charts {
        let c = blowup_chart(&s.ring, &z, t)?;
        let target = c.target();
        let images: Vec<String> = (0..s.ring.nvars())
            .map(|i| format!("{} -> {}", s.ring.display_name(i), c.images()[i]))
            .collect();
        out.push_str(&format!("chart {}\n", s.ring.display_name(t)));
        out.push_str(&format!(
            "  variables: {}\n",
            (0..target.nvars()).map(|i| target.display_name(i)).collect::<Vec<_>>().join(", ")
        ));
        out.push_str(&format!("  images: {}\n", images.join(", ")));
        out.push_str(&format!("  total transform = {}\n", total_transform_module(&s.module, &c)?));
        out.push_str(&format!("  {a}-transform = {}\n", a_transform_module(&s.module, &c, a)?));
    }
    Ok(())
}

fn cmd_run(file: &PathBuf, format: Option<OutputFormat>, v: Verbosity, out: &mut String) -> CliResult<()> {
    let src = std::fs::read_to_string(file)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", file.display())))?;
    let jf = parse_job(&src)?;
    let rep = run_sequence(&jf.job)?;
    match format.unwrap_or(jf.output) {
        OutputFormat::Text => out.push_str(&render_text(&rep, v)),
        OutputFormat::Json => out.push_str(&render_json(&rep)?),
    }
    rep.check()?;
    Ok(())
}

fn cmd_verify(seed: u64, out: &mut String) -> CliResult<()> {
    let reports = qsing_core::verify::run_all(seed);
    out.push_str(&format!("seed {seed}\n"));
    let mut failed = 0;
    for r in &reports {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "{status} {}: {} cases, {} checks, {} failures\n",
            r.name,
            r.cases,
            r.checks,
            r.failures.len()
        ));
        for f in r.failures.iter().take(5) {
            out.push_str(&format!("  {f}\n"));
        }
        failed += usize::from(!r.passed());
    }
    if failed > 0 {
        return Err(Error::Internal(format!("{failed} verification suite(s) failed")).into());
    }
    Ok(())
}

fn dispatch(cli: Cli, v: Verbosity, out: &mut String) -> CliResult<()> {
    match cli.command {
        Command::Qexpand { ring } => cmd_qexpand(&ring, out)?,
        Command::Qorder { ring, at } => {
            let s = setup(&ring)?;
            out.push_str(&format!("{}\n", q_order_at(&s.module, &point(&s.ring, &at)?)?));
        }
        Command::Eta { ring, at } => {
            let s = setup(&ring)?;
            out.push_str(&format!("{}\n", eta_at(&s.module, &point(&s.ring, &at)?)?));
        }
        Command::Diff { ring, i, lambda, l } => {
            let s = setup(&ring)?;
            let ideal = if lambda.is_some() || l.is_some() {
                let ctx = log_context(&s.ring, lambda.as_deref(), l.as_deref())?;
                log_diff_plus_ideal(&s.module, &ctx, i)?
            } else {
                diff_plus_ideal(&s.module, i)?
            };
            out.push_str(&format!("{ideal}\n"));
        }
        Command::Sing { ring, a, at } => {
            let s = setup(&ring)?;
            out.push_str(&format!("{}\n", sing_test(&s.module, a, &point(&s.ring, &at)?)?));
        }
        Command::Permissible { ring, center, a } => {
            let s = setup(&ring)?;
            let z = names_to_set(&s.ring, &center, "--center")?;
            match a {
                Some(a) => out.push_str(&format!("{}\n", is_permissible_center(&s.module, a, &z)?)),
                None => out.push_str(&format!("{}\n", max_a_for_center(&s.module, &z)?)),
            }
        }
        Command::Blowup { ring, center, chart, a } => {
            cmd_blowup(&ring, &center, chart.as_deref(), a, out)?
        }
        Command::Run { file, format } => cmd_run(&file, format, v, out)?,
        Command::Verify { seed } => cmd_verify(seed, out)?,
    }
    Ok(())
}

fn verbosity(flag: Option<Verbosity>) -> CliResult<Verbosity> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match std::env::var(VERBOSITY_ENV) {
        Ok(s) if !s.is_empty() => s.parse().map_err(|m| CliError::Usage(format!("{VERBOSITY_ENV}: {m}"))),
        _ => Ok(Verbosity::default()),
    }
}

fn describe(e: &CliError) -> String {
    let mut msg = format!("error [{}]: {e}", e.category());
    if let CliError::Core(Error::Parse { expected, .. }) = e {
        if !expected.is_empty() {
            msg.push_str(&format!(" (expected one of: {})", expected.join(", ")));
        }
    }
    msg
}

/// Run the CLI on `argv` (including the program name), writing the report to
/// `out` and diagnostics to `err`. Returns the process exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let text = e.render().to_string();
                    let _ = write!(err, "error [usage]: {}", text.trim_start_matches("error: "));
                    2
                }
            };
        }
    };
    let mut text = String::new();
    let result = verbosity(cli.verbosity).and_then(|v| dispatch(cli, v, &mut text));
    let _ = out.write_all(text.as_bytes());
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", describe(&e));
            e.exit_code()
        }
    }
}
