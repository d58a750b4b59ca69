use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hcp_core::asp::{self, SolveOutcome};
use hcp_core::benchmarks::{gen_bts, gen_colorball, gen_doors, KITCHEN_LITE, KITCHEN_LITE_LOOKUP};
use hcp_core::lang::{self, render_dot, render_json, ParsedUnit, Severity};
use hcp_core::{verify, Engine, EngineConfig, Feasibility, FeasibilityView, GroundModel, GroundProblem, LookupTable};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    NoPlan = 1,
    Input = 2,
    Verify = 3,
    Internal = 4,
}

#[derive(Debug)]
struct Failure {
    status: Status,
    error: anyhow::Error,
}

trait OrStatus<T> {
    fn or_status(self, status: Status) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrStatus<T> for Result<T, E> {
    fn or_status(self, status: Status) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            status,
            error: e.into(),
        })
    }
}

fn fail<T>(status: Status, error: anyhow::Error) -> Result<T, Failure> {
    Err(Failure { status, error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Parser)]
#[command(name = "hcp", version, about = "Offline hybrid conditional planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Domain file; may also contain the problem.
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Lookup table registering feasibility predicates.
    #[arg(long)]
    lookup: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a conditional plan.
    Plan {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value_t = 40)]
        max_steps: usize,
        #[arg(long, value_enum, default_value = "on")]
        minimize_sensing: Switch,
        #[arg(long, value_enum, default_value = "on")]
        equiv_classes: Switch,
        #[arg(long, value_enum, default_value = "on")]
        deterministic: Switch,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        /// Plan output path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stats JSON output path.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Evaluate every ground feasibility query before planning.
        #[arg(long)]
        precompute: bool,
    },
    /// Replay a JSON plan and check every branch.
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Write a benchmark instance.
    Gen {
        #[command(subcommand)]
        family: Family,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Write the incremental ASP encoding.
    Emit {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 40)]
        step_limit: usize,
        /// Also run an external solver on the program.
        #[arg(long)]
        solve: bool,
        /// Solver binary; defaults to the HCP_SOLVER environment variable.
        #[arg(long)]
        solver: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Family {
    Bts {
        #[arg(long)]
        m: usize,
    },
    Colorball {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        balls: usize,
    },
    Doors {
        #[arg(long)]
        n: usize,
    },
    KitchenLite {
        /// Also write the matching lookup table.
        #[arg(long)]
        lookup_out: Option<PathBuf>,
    },
}

struct Loaded {
    feas: Feasibility,
    model: GroundModel,
    problem: GroundProblem,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .or_status(Status::Input)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("cannot write {}", p.display()))
            .or_status(Status::Internal),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report_diagnostics(diagnostics: &[lang::Diagnostic]) -> Result<(), Failure> {
    for d in diagnostics {
        eprintln!("{d}");
    }
    let errors = diagnostics.iter().filter(|d| d.severity == Severity::Error).count();
    if errors > 0 {
        return fail(Status::Input, anyhow!("{errors} error(s) in input"));
    }
    Ok(())
}

fn parse_input(input: &Input) -> Result<ParsedUnit, Failure> {
    let domain_name = input.domain.display().to_string();
    let domain_text = read(&input.domain)?;
    let mut sources = vec![(domain_name, domain_text)];
    if let Some(p) = &input.problem {
        sources.push((p.display().to_string(), read(p)?));
    }
    let refs: Vec<(&str, &str)> = sources.iter().map(|(n, t)| (n.as_str(), t.as_str())).collect();
    Ok(lang::parse_named(&refs))
}

fn load(input: &Input) -> Result<Loaded, Failure> {
    let unit = parse_input(input)?;
    report_diagnostics(&unit.diagnostics)?;
    let mut feas = Feasibility::new();
    if let Some(grid) = &unit.domain.grid {
        feas.register_grid(grid).or_status(Status::Input)?;
    }
    if let Some(path) = &input.lookup {
        let table = LookupTable::parse(&read(path)?)
            .with_context(|| format!("in {}", path.display()))
            .or_status(Status::Input)?;
        feas.register_table(&table).or_status(Status::Input)?;
    }
    // Parsing already validated everything except predicate registration.
    report_diagnostics(&lang::validate(&unit.domain, &unit.problem, Some(&feas)))?;
    let model = GroundModel::ground(&unit.domain).or_status(Status::Input)?;
    let problem = model.ground_problem(&unit.problem).or_status(Status::Input)?;
    Ok(Loaded { feas, model, problem })
}

fn cmd_plan(
    input: &Input,
    config: EngineConfig,
    format: Format,
    out: Option<&Path>,
    stats_path: Option<&Path>,
    precompute: bool,
) -> Result<(), Failure> {
    let loaded = load(input)?;
    if precompute {
        loaded.feas.precompute(&loaded.model.queries).or_status(Status::Input)?;
        loaded.feas.reset_counters();
    }
    let view = FeasibilityView::new(&loaded.feas, &loaded.model);
    let engine = Engine::new(&loaded.model, &loaded.problem.goal, &view, config);
    let start = Instant::now();
    let (plan, report) = engine.run(&loaded.problem.initial).or_status(Status::NoPlan)?;
    let seconds = start.elapsed().as_secs_f64();
    let text = match format {
        Format::Dot => render_dot(&loaded.model, &plan),
        Format::Json => render_json(&loaded.model, &plan),
    };
    write_output(out, &text)?;
    let s = report.stats;
    let counters = loaded.feas.counters();
    let stats = serde_json::json!({
        "tree_size": s.tree_size,
        "dag_size": s.dag_size,
        "max_depth": s.max_depth,
        "sensing_nodes": s.sensing_nodes,
        "leaves": s.leaves,
        "time_seconds": seconds,
        "cache_hits": report.cache_hits,
        "efficiency": report.efficiency(),
        "tasks": report.tasks,
        "threads": report.threads,
        "feasibility_evaluations": counters.evaluations,
    });
    if let Some(p) = stats_path {
        let body = serde_json::to_string_pretty(&stats).or_status(Status::Internal)? + "\n";
        write_output(Some(p), &body)?;
    }
    eprintln!(
        "plan: tree {} dag {} depth {} sensing {} leaves {} in {:.3}s",
        s.tree_size, s.dag_size, s.max_depth, s.sensing_nodes, s.leaves, seconds
    );
    Ok(())
}

fn cmd_verify(input: &Input, plan_path: &Path) -> Result<(), Failure> {
    let loaded = load(input)?;
    let text = read(plan_path)?;
    let plan = lang::plan_from_json(&loaded.model, &text)
        .with_context(|| format!("in {}", plan_path.display()))
        .or_status(Status::Input)?;
    let view = FeasibilityView::new(&loaded.feas, &loaded.model);
    let report = verify(
        &loaded.model,
        &loaded.problem.goal,
        &loaded.problem.initial,
        &plan,
        &view,
    );
    if report.ok {
        println!("ok: {} branches checked", report.branches_checked);
        return Ok(());
    }
    for v in &report.violations {
        println!("{v}");
    }
    fail(
        Status::Verify,
        anyhow!(
            "{} violation(s) after {} branches",
            report.violations.len(),
            report.branches_checked
        ),
    )
}

fn cmd_gen(family: &Family, out: Option<&Path>) -> Result<(), Failure> {
    let text = match family {
        Family::Bts { m } => gen_bts(*m),
        Family::Colorball { n, balls } => gen_colorball(*n, *balls),
        Family::Doors { n } => gen_doors(*n),
        Family::KitchenLite { lookup_out } => {
            if let Some(p) = lookup_out {
                write_output(Some(p), KITCHEN_LITE_LOOKUP)?;
            }
            Ok(KITCHEN_LITE.to_string())
        }
    }
    .or_status(Status::Input)?;
    write_output(out, &text)
}

fn cmd_emit(
    input: &Input,
    out: Option<&Path>,
    step_limit: usize,
    solve: bool,
    solver: Option<&Path>,
) -> Result<(), Failure> {
    let unit = parse_input(input)?;
    report_diagnostics(&unit.diagnostics)?;
    let program = asp::emit_with_limit(&unit.domain, &unit.problem, step_limit);
    write_output(out, &program.combined)?;
    if !solve {
        return Ok(());
    }
    match asp::run_external(&program, &unit.domain, solver, step_limit) {
        Ok(SolveOutcome::Satisfiable(occ)) => {
            for o in occ {
                eprintln!("{}: {}({})", o.time, o.name, o.args.join(","));
            }
            Ok(())
        }
        Ok(SolveOutcome::Unsatisfiable) => fail(Status::NoPlan, anyhow!("solver reports unsatisfiable")),
        Err(e @ hcp_core::AspError::SolverUnavailable(_)) => {
            eprintln!("skipping solve: {e}");
            Ok(())
        }
        Err(e) => fail(Status::Internal, e.into()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Plan {
            input,
            threads,
            max_steps,
            minimize_sensing,
            equiv_classes,
            deterministic,
            format,
            out,
            stats,
            precompute,
        } => {
            if threads == 0 {
                return fail(Status::Input, anyhow!("--threads must be at least 1"));
            }
            let config = EngineConfig {
                threads,
                max_steps,
                minimize_sensing: minimize_sensing.on(),
                deterministic: deterministic.on(),
                equiv_classes: equiv_classes.on(),
            };
            cmd_plan(&input, config, format, out.as_deref(), stats.as_deref(), precompute)
        }
        Command::Verify { input, plan } => cmd_verify(&input, &plan),
        Command::Gen { family, out } => cmd_gen(&family, out.as_deref()),
        Command::Emit {
            input,
            out,
            step_limit,
            solve,
            solver,
        } => cmd_emit(&input, out.as_deref(), step_limit, solve, solver.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Status::Input as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.status as u8)
        }
    }
}
