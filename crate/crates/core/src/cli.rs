//! Command-line front end. [`run`] is the whole program minus process exit.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::analysis::{check_static, Checked, StaticDiagnostic, Subject};
use crate::parser::{parse_mission, ParseDiagnostic, ParsedMission, Severity, SourceSpan};
use crate::pddl;
use crate::planfile::{read_plan, write_plan};
use crate::planner::{plan, PlanOutcome, PlannerConfig};
use crate::validator::{validate, violations_to_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;
pub const EXIT_USAGE: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "ortacplus",
    version,
    about = "Check, expand, plan and export ORTAC+ missions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and statically check a mission
    Check { path: PathBuf },
    /// Print the ground constraints, one per line
    Expand { path: PathBuf },
    /// Find a makespan-optimal plan
    Plan {
        path: PathBuf,
        #[arg(long, default_value_t = 64)]
        max_horizon: usize,
        /// Wall-clock limit in seconds (decimals allowed)
        #[arg(long, default_value_t = 60.0, value_parser = parse_seconds)]
        timeout: f64,
        /// Write the plan here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a plan file against a mission
    Validate { mission: PathBuf, plan: PathBuf },
    /// Write <stem>-domain.pddl and <stem>-problem.pddl
    EmitPddl {
        path: PathBuf,
        /// Output prefix; defaults to the mission path without its extension
        #[arg(long)]
        stem: Option<PathBuf>,
    },
}

fn parse_seconds(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .parse()
        .map_err(|_| format!("`{}` is not a number of seconds", s))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!(
            "timeout must be a non-negative number, got `{}`",
            s
        ));
    }
    Ok(v)
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    color: bool,
}

impl Ctx<'_> {
    fn diag(
        &mut self,
        severity: Severity,
        file: &Path,
        span: SourceSpan,
        code: &str,
        message: &str,
    ) {
        let sev = match (self.color, severity) {
            (false, s) => s.to_string(),
            (true, Severity::Error) => format!("\x1b[1;31m{}\x1b[0m", severity),
            (true, Severity::Warning) => format!("\x1b[1;33m{}\x1b[0m", severity),
        };
        let _ = writeln!(
            self.err,
            "{} {}:{}:{} [{}] {}",
            sev,
            file.display(),
            span.line,
            span.column,
            code,
            message
        );
    }

    fn parse_diag(&mut self, file: &Path, d: &ParseDiagnostic) {
        self.diag(d.severity, file, d.span, d.kind.code(), &d.message);
    }

    fn static_diag(&mut self, file: &Path, parsed: &ParsedMission, d: &StaticDiagnostic) {
        let span = match d.subject {
            Some(Subject::Agent(i)) => parsed.source_map.agents.get(i).copied(),
            Some(Subject::Constraint(i)) => parsed.source_map.constraints.get(i).copied(),
            None => None,
        }
        .unwrap_or(SourceSpan::START);
        self.diag(d.severity, file, span, &d.code.to_string(), &d.message);
    }

    fn io_error(&mut self, what: &str, path: &Path, e: std::io::Error) -> i32 {
        let _ = writeln!(self.err, "error: cannot {} {}: {}", what, path.display(), e);
        EXIT_IO
    }

    /// Reads, parses and checks a mission, printing diagnostics.
    fn load(&mut self, path: &Path) -> Result<(ParsedMission, Checked), i32> {
        let text = fs::read_to_string(path).map_err(|e| self.io_error("read", path, e))?;
        let parsed = match parse_mission(&text) {
            Ok(p) => p,
            Err(diags) => {
                for d in &diags {
                    self.parse_diag(path, d);
                }
                return Err(EXIT_DIAGNOSTICS);
            }
        };
        for w in &parsed.warnings {
            self.parse_diag(path, w);
        }
        match check_static(&parsed.mission) {
            Ok(checked) => {
                for w in &checked.warnings {
                    self.static_diag(path, &parsed, w);
                }
                Ok((parsed, checked))
            }
            Err(diags) => {
                for d in &diags {
                    self.static_diag(path, &parsed, d);
                }
                Err(EXIT_DIAGNOSTICS)
            }
        }
    }

    fn check(&mut self, path: &Path) -> i32 {
        match self.load(path) {
            Ok((_, c)) => {
                let g = &c.ground;
                let _ = writeln!(
                    self.out,
                    "ok: {} agents, {} nodes, {} edges, {} ground constraints",
                    g.agents.len(),
                    g.graph.node_count(),
                    g.graph.edge_count(),
                    g.ground.len()
                );
                EXIT_OK
            }
            Err(code) => code,
        }
    }

    fn expand(&mut self, path: &Path) -> i32 {
        match self.load(path) {
            Ok((_, c)) => {
                for g in &c.ground.ground {
                    let _ = writeln!(self.out, "{}", g);
                }
                EXIT_OK
            }
            Err(code) => code,
        }
    }

    fn plan(&mut self, path: &Path, cfg: PlannerConfig, out: Option<&Path>) -> i32 {
        let (_, c) = match self.load(path) {
            Ok(x) => x,
            Err(code) => return code,
        };
        match plan(&c.ground, &cfg) {
            PlanOutcome::Solved(p) => {
                let json = write_plan(&p);
                match out {
                    Some(file) => {
                        if let Err(e) = fs::write(file, json) {
                            return self.io_error("write", file, e);
                        }
                        let _ = writeln!(self.out, "makespan: {}", p.horizon);
                    }
                    None => {
                        // keep standard output pure JSON
                        let _ = self.out.write_all(json.as_bytes());
                        let _ = writeln!(self.err, "makespan: {}", p.horizon);
                    }
                }
                EXIT_OK
            }
            PlanOutcome::InfeasibleUpTo(h) => {
                let _ = writeln!(self.err, "infeasible up to horizon {}", h);
                EXIT_INFEASIBLE
            }
            PlanOutcome::Timeout(_) => {
                let _ = writeln!(
                    self.err,
                    "timeout: no plan found within {} ms",
                    cfg.timeout_ms
                );
                EXIT_TIMEOUT
            }
        }
    }

    fn validate(&mut self, mission: &Path, plan_path: &Path) -> i32 {
        let (_, c) = match self.load(mission) {
            Ok(x) => x,
            Err(code) => return code,
        };
        let text = match fs::read_to_string(plan_path) {
            Ok(t) => t,
            Err(e) => return self.io_error("read", plan_path, e),
        };
        let p = match read_plan(&text) {
            Ok(p) => p,
            Err(e) => {
                let _ = writeln!(self.err, "error: {}: {}", plan_path.display(), e);
                return EXIT_IO;
            }
        };
        let v = validate(&p, &c.ground);
        let _ = writeln!(self.out, "{}", violations_to_json(&v));
        if v.is_empty() {
            EXIT_OK
        } else {
            EXIT_DIAGNOSTICS
        }
    }

    fn emit_pddl(&mut self, path: &Path, stem: Option<&Path>) -> i32 {
        let (_, c) = match self.load(path) {
            Ok(x) => x,
            Err(code) => return code,
        };
        let stem = stem
            .map(Path::to_path_buf)
            .unwrap_or_else(|| path.with_extension(""));
        let pair = pddl::emit(&c.ground);
        let with_suffix = |suffix: &str| {
            let mut s = stem.clone().into_os_string();
            s.push(suffix);
            PathBuf::from(s)
        };
        for (file, text) in [
            (with_suffix("-domain.pddl"), &pair.domain_text),
            (with_suffix("-problem.pddl"), &pair.problem_text),
        ] {
            if let Err(e) = fs::write(&file, text) {
                return self.io_error("write", &file, e);
            }
            let _ = writeln!(self.out, "{}", file.display());
        }
        EXIT_OK
    }
}

/// Runs the program on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e);
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e);
                    EXIT_USAGE
                }
            };
        }
    };
    let mut ctx = Ctx { out, err, color };
    match cli.command {
        Command::Check { path } => ctx.check(&path),
        Command::Expand { path } => ctx.expand(&path),
        Command::Plan {
            path,
            max_horizon,
            timeout,
            out,
            seed,
        } => {
            let cfg = PlannerConfig {
                max_horizon,
                timeout_ms: (timeout * 1000.0).round() as u64,
                seed,
            };
            ctx.plan(&path, cfg, out.as_deref())
        }
        Command::Validate { mission, plan } => ctx.validate(&mission, &plan),
        Command::EmitPddl { path, stem } => ctx.emit_pddl(&path, stem.as_deref()),
    }
}
