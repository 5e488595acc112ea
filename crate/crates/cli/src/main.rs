use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use assess_core::grader::{redact_report, Audience, GradeError, GradeReport, Grader};
use assess_core::question::{parse_question, Question};
use assess_core::sandbox::{Sandbox, SandboxConfig, Toolchain};
use assess_service::{load_questions, ServiceConfig, SessionService};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit statuses shared by every command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Exit {
    Ok = 0,
    Failures = 1,
    Usage = 2,
    Internal = 3,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

#[derive(Parser)]
#[command(
    name = "assess",
    version,
    about = "Grade Python3 and C++14 submissions against question test suites"
)]
struct Cli {
    #[command(flatten)]
    tools: ToolArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ToolArgs {
    /// Python 3 interpreter.
    #[arg(long, global = true, env = "ASSESS_PYTHON")]
    python: Option<PathBuf>,
    /// C++14 compiler.
    #[arg(long, global = true, env = "ASSESS_CXX")]
    cxx: Option<PathBuf>,
}

impl ToolArgs {
    fn apply(&self, toolchain: &mut Toolchain) {
        if let Some(p) = &self.python {
            toolchain.python = p.clone();
        }
        if let Some(c) = &self.cxx {
            toolchain.cxx = c.clone();
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AudienceArg {
    Student,
    Teacher,
}

impl From<AudienceArg> for Audience {
    fn from(a: AudienceArg) -> Self {
        match a {
            AudienceArg::Student => Audience::Student,
            AudienceArg::Teacher => Audience::Teacher,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a question document and run its model answer through the tests.
    Validate {
        #[arg(long)]
        question: PathBuf,
    },
    /// Grade one submission and print the report as JSON.
    Grade {
        #[arg(long)]
        question: PathBuf,
        #[arg(long)]
        submission: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        attempt: u32,
        #[arg(long, value_enum, default_value = "teacher")]
        audience: AudienceArg,
        /// Omit timing fields so output is byte-identical across runs.
        #[arg(long)]
        stable: bool,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        token: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exit = match cli.command {
        Command::Validate { question } => validate(&question, &cli.tools),
        Command::Grade {
            question,
            submission,
            attempt,
            audience,
            stable,
        } => grade(&question, &submission, attempt, audience.into(), stable, &cli.tools),
        Command::Serve {
            config,
            port,
            data_dir,
            token,
        } => serve(config.as_deref(), port, data_dir, token, &cli.tools),
    };
    exit.into()
}

fn read(path: &Path) -> Result<String, Exit> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        Exit::Usage
    })
}

fn grader_for(q: &Question, tools: &ToolArgs) -> Result<Grader, Exit> {
    let mut toolchain = Toolchain::default();
    tools.apply(&mut toolchain);
    if let Err(e) = toolchain.resolve(q.language) {
        eprintln!("error: {e}");
        return Err(Exit::Internal);
    }
    Ok(Grader::new(Sandbox::new(SandboxConfig {
        toolchain,
        ..SandboxConfig::default()
    })))
}

fn print_table(report: &GradeReport) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(
        err,
        "{:<12} {:<14} {:<8} {:>11}  message",
        "test", "kind", "status", "marks"
    );
    for r in &report.results {
        let status = serde_json::to_value(r.status).unwrap();
        let kind = serde_json::to_value(r.kind).unwrap();
        let marks = format!("{}/{}", r.marks_awarded, r.marks_available);
        let message = r.message.lines().next().unwrap_or("");
        let _ = writeln!(
            err,
            "{:<12} {:<14} {:<8} {:>11}  {message}",
            r.test_id,
            kind.as_str().unwrap_or(""),
            status.as_str().unwrap_or(""),
            marks
        );
    }
    if !report.toolchain_diagnostics.is_empty() {
        let _ = writeln!(err, "\ndiagnostics:\n{}", report.toolchain_diagnostics.trim_end());
    }
    let _ = writeln!(
        err,
        "\nraw {}/{}  penalty {}%  final {:.4}",
        report.raw_marks, report.total_marks, report.penalty_pct, report.final_fraction
    );
}

fn validate(path: &Path, tools: &ToolArgs) -> Exit {
    let text = match read(path) {
        Ok(t) => t,
        Err(e) => return e,
    };
    let q = match parse_question(&text) {
        Ok(q) => q,
        Err(e) => {
            eprintln!("invalid question: {e}");
            return Exit::Failures;
        }
    };
    if q.model_answer.is_none() {
        eprintln!(
            "{}: structure ok ({} tests, {} marks); no model answer to run",
            q.id,
            q.tests.len(),
            q.total_marks()
        );
        println!(
            "{}",
            serde_json::json!({"question_id": q.id, "passed": true, "failing": []})
        );
        return Exit::Ok;
    }
    let grader = match grader_for(&q, tools) {
        Ok(g) => g,
        Err(e) => return e,
    };
    match grader.validate_model_answer(&q) {
        Ok(v) => {
            print_table(&v.report);
            let passed = v.passed();
            if passed {
                eprintln!("{}: model answer earns full marks", q.id);
            } else {
                eprintln!("{}: model answer fails {}", q.id, v.failing.join(", "));
            }
            let mut report = v.report;
            report.strip_timing();
            println!(
                "{}",
                serde_json::json!({"question_id": q.id, "passed": passed, "failing": v.failing, "report": report})
            );
            if passed {
                Exit::Ok
            } else {
                Exit::Failures
            }
        }
        Err(GradeError::Adapter(e)) => {
            eprintln!("invalid question: {e}");
            Exit::Failures
        }
        Err(e) => {
            eprintln!("error: {e}");
            Exit::Internal
        }
    }
}

fn grade(question: &Path, submission: &Path, attempt: u32, audience: Audience, stable: bool, tools: &ToolArgs) -> Exit {
    let (text, code) = match (read(question), read(submission)) {
        (Ok(t), Ok(c)) => (t, c),
        _ => return Exit::Usage,
    };
    let q = match parse_question(&text) {
        Ok(q) => q,
        Err(e) => {
            eprintln!("invalid question: {e}");
            return Exit::Usage;
        }
    };
    let grader = match grader_for(&q, tools) {
        Ok(g) => g,
        Err(e) => return e,
    };
    let report = match grader.run_check(&q, &code, attempt) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return Exit::Internal;
        }
    };
    let mut shown = redact_report(&report, &q, audience);
    if stable {
        shown.strip_timing();
    }
    print_table(&shown);
    println!("{}", shown.to_json());
    if report.raw_marks == report.total_marks {
        Exit::Ok
    } else {
        Exit::Failures
    }
}

fn serve(
    config: Option<&Path>,
    port: Option<u16>,
    data_dir: Option<PathBuf>,
    token: Option<String>,
    tools: &ToolArgs,
) -> Exit {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();

    let mut cfg = match config {
        Some(path) => match ServiceConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return Exit::Usage;
            }
        },
        None => ServiceConfig::default(),
    };
    if let Some(p) = port {
        cfg.port = p;
    }
    if let Some(d) = data_dir {
        cfg.data_dir = d;
    }
    if token.is_some() {
        cfg.token = token;
    }
    tools.apply(&mut cfg.toolchain);
    if let Err(e) = cfg.toolchain.validate() {
        eprintln!("error: {e}");
        return Exit::Internal;
    }
    let questions = match load_questions(&cfg.questions_dir) {
        Ok(q) => q,
        Err(e) => {
            eprintln!("error: loading questions from {}: {e}", cfg.questions_dir.display());
            return Exit::Usage;
        }
    };
    let grader = Grader::new(Sandbox::new(cfg.sandbox()));
    let service = match SessionService::new(questions, grader, &cfg.data_dir) {
        Ok(s) => Arc::new(s),
        Err(e) => {
            eprintln!("error: {e}");
            return Exit::Internal;
        }
    };

    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: {e}");
            return Exit::Internal;
        }
    };
    runtime.block_on(async move {
        let listener = match tokio::net::TcpListener::bind(("0.0.0.0", cfg.port)).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("error: cannot listen on port {}: {e}", cfg.port);
                return Exit::Internal;
            }
        };
        let addr = listener.local_addr().map(|a| a.to_string()).unwrap_or_default();
        tracing::info!(%addr, questions = ?service.question_ids(), "listening");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        };
        match assess_service::http::serve(listener, service, cfg.token, shutdown).await {
            Ok(()) => Exit::Ok,
            Err(e) => {
                eprintln!("error: {e}");
                Exit::Internal
            }
        }
    })
}
