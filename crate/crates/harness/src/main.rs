use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use lcgeom_harness::catalog::{BODY_KINDS, FUNCTION_FORMS};
use lcgeom_harness::io::{write_check_table, write_json, write_level_sets, write_plot_table};
use lcgeom_harness::{run_suite, scenario_paths, tally, BodySpec, CheckName, FunctionSpec, Report, Scenario, Tolerances};

#[derive(Parser)]
#[command(name = "lcgeom", version, about = "First variation of log-concave integrals and anisotropic total variation")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed of jittered sample points; overrides scenario seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replace every tolerance by this value.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Depth of the default geometric schedule t_k = 2^{-k}.
    #[arg(long, global = true)]
    schedule_depth: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// Structured records.
    Json,
    /// One row per check.
    Csv,
    /// Curve samples (t_k, q_k) and (s, Per_L(F_s)).
    Plot,
}

/// Functions and bodies are inline TOML tables from the catalog, e.g.
/// `--f '{ form = "gaussian", dim = 2 }'`.
#[derive(Subcommand)]
enum Command {
    /// δ(f,g) by the limit and by the measure formula.
    Delta {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    /// TV_L(f) and the divergence pairing.
    Tv {
        #[arg(long)]
        f: String,
        #[arg(long)]
        l: Option<String>,
    },
    /// TV_L(f) against the level-set integral of a lattice sampling.
    Coarea {
        #[arg(long)]
        f: String,
        #[arg(long)]
        l: String,
        /// Lattice nodes per axis.
        #[arg(long, default_value_t = 257)]
        nodes: usize,
        /// Grid field CSV to use instead of sampling f.
        #[arg(long)]
        field: Option<PathBuf>,
        /// Also write the polygons of these level sets as CSV.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<f64>,
        #[arg(long, requires = "levels")]
        polygons: Option<PathBuf>,
    },
    /// Mixed volumes from the Steiner polynomial |K + tL|.
    Quermass {
        #[arg(long)]
        k: String,
        #[arg(long)]
        l: String,
    },
    /// Moments of μ_f and ν_f and the centering defect.
    Measures {
        #[arg(long)]
        f: String,
    },
    /// Run scenario files (a file or a directory of *.toml).
    Verify { path: PathBuf },
    /// List function forms, body kinds and check names.
    Catalog,
}

fn inline<T: DeserializeOwned>(what: &str, text: &str) -> Result<T, String> {
    #[derive(serde::Deserialize)]
    struct Wrap<T> {
        v: T,
    }
    toml::from_str::<Wrap<T>>(&format!("v = {text}")).map(|w| w.v).map_err(|e| format!("--{what}: {e}"))
}

fn adhoc(id: &str, f: &str, checks: Vec<CheckName>) -> Result<Scenario, String> {
    Ok(Scenario::new(id, inline::<FunctionSpec>("f", f)?, checks))
}

fn apply(global: &Global, s: &mut Scenario) {
    if let Some(seed) = global.seed {
        s.seed = Some(seed);
    }
    if let Some(tol) = global.tol {
        s.tolerances = Tolerances::uniform(tol);
    }
    if let Some(depth) = global.schedule_depth {
        s.schedule.depth = depth;
    }
}

fn emit(global: &Global, reports: &[Report]) -> Result<(), String> {
    let mut buf = Vec::new();
    match global.format {
        Format::Json => write_json(reports, &mut buf)?,
        Format::Csv => write_check_table(reports, &mut buf)?,
        Format::Plot => write_plot_table(reports, &mut buf)?,
    }
    match &global.out {
        Some(p) => std::fs::write(p, buf).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout().write_all(&buf).map_err(|e| e.to_string()),
    }
}

fn scenarios(cli: &Cli) -> Result<(Vec<Scenario>, usize), String> {
    let one = |s: Scenario| Ok((vec![s], 0));
    match &cli.command {
        Command::Delta { f, g: gs } => {
            let mut s = adhoc("delta", f, vec![CheckName::MainTheorem])?;
            s.g = Some(inline("g", gs)?);
            one(s)
        }
        Command::Tv { f, l } => {
            let mut s = adhoc("tv", f, vec![CheckName::DivergencePairing])?;
            s.bodies.l = l.as_deref().map(|l| inline::<BodySpec>("l", l)).transpose()?;
            one(s)
        }
        Command::Coarea { f, l, nodes, field, .. } => {
            let mut s = adhoc("coarea", f, vec![CheckName::Coarea])?;
            s.bodies.l = Some(inline("l", l)?);
            s.options.coarea.nodes = *nodes;
            s.options.coarea.field = field.as_ref().map(|p| p.display().to_string());
            one(s)
        }
        Command::Quermass { k, l } => {
            let k: BodySpec = inline("k", k)?;
            let dim = k.build().map_err(|e| format!("--k: {e}"))?.dim();
            let mut s = Scenario::new("quermass", FunctionSpec::Gaussian { dim }, vec![CheckName::Quermass]);
            s.bodies = lcgeom_harness::scenario::Bodies { k: Some(k), l: Some(inline("l", l)?) };
            one(s)
        }
        Command::Measures { f } => one(adhoc("measures", f, vec![CheckName::Centering])?),
        Command::Verify { path } => {
            let mut out = Vec::new();
            let mut broken = 0;
            for p in scenario_paths(path).map_err(|e| e.to_string())? {
                let shown = p.display().to_string();
                match std::fs::read_to_string(&p)
                    .map_err(|e| format!("{shown}: {e}"))
                    .and_then(|t| Scenario::from_toml(&t, &shown).map_err(|e| e.to_string()))
                {
                    Ok(s) => out.push(s),
                    Err(e) => {
                        eprintln!("error: {e}");
                        broken += 1;
                    }
                }
            }
            Ok((out, broken))
        }
        Command::Catalog => Ok((Vec::new(), 0)),
    }
}

fn catalog() {
    println!("function forms:");
    for (form, params, what) in FUNCTION_FORMS {
        println!("  {form:<18} {params:<22} {what}");
    }
    println!("body kinds:");
    for (kind, params) in BODY_KINDS {
        println!("  {kind:<18} {params}");
    }
    println!("checks:");
    for c in CheckName::ALL {
        println!("  {}", c.as_str());
    }
}

fn polygons(cli: &Cli) -> Result<(), String> {
    let Command::Coarea { f, levels, polygons: Some(path), nodes, field, .. } = &cli.command else {
        return Ok(());
    };
    let field = match field {
        Some(p) => lcgeom_harness::io::read_grid_field(p)?,
        None => {
            let f = inline::<FunctionSpec>("f", f)?.build().map_err(|e| e.to_string())?;
            let n = f.dim();
            lcgeom::tv::GridField::sample(&f, &vec![-20.0; n], &vec![20.0; n], *nodes).map_err(|e| e.to_string())?
        }
    };
    let file = std::fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    write_level_sets(&field, levels, file)
}

fn run(cli: &Cli) -> Result<bool, String> {
    if matches!(cli.command, Command::Catalog) {
        catalog();
        return Ok(true);
    }
    let (mut list, broken) = scenarios(cli)?;
    let mut resolved = Vec::new();
    let mut failed_loads = broken;
    for s in &mut list {
        apply(&cli.global, s);
        match s.resolve() {
            Ok(r) => resolved.push(r),
            Err(e) => {
                eprintln!("error: {e}");
                failed_loads += 1;
            }
        }
    }
    let reports = run_suite(&resolved).map_err(|e| e.to_string())?;
    emit(&cli.global, &reports)?;
    polygons(cli)?;
    let (passed, total) = tally(&reports);
    eprintln!("{passed}/{total} checks passed in {} scenarios", reports.len());
    Ok(failed_loads == 0 && reports.iter().all(Report::passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
