//! Command-line interface: `solve`, `bench`, and `validate` over LibSVM,
//! MatrixMarket, or CSV inputs (or the built-in synthetic generator), with
//! reproducible seeding and CSV outputs.
//!
//! Exit codes: 0 success, 1 parse/validation error, 2 iteration budget
//! exhausted (outputs are still written).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nnlsplus::baselines::{self, BaselineConfig};
use nnlsplus::io::{self, Dataset};
use nnlsplus::model::{self, Mode, ProblemInstance, Solution, SolveStatus};
use nnlsplus::restart::{solve_restarted, solve_restarted_block, RestartConfig};
use nnlsplus::solver::{solve_plain, solve_plain_block, BlockPartition};
use nnlsplus::synth::{self, SynthSpec};
use nnlsplus::RunMetrics;

#[derive(Parser)]
#[command(
    name = "nnlsplus",
    version,
    about = "Nonnegative least squares solver for nonnegative data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load an instance, solve it, and write solution + metrics CSVs.
    Solve(SolveArgs),
    /// Run every solver on one instance and write comparable metrics CSVs.
    Bench(SolveArgs),
    /// Parse and preprocess an input, reporting its shape; no solving.
    Validate(InputArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Libsvm,
    Mtx,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Nonnegative,
    General,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Nonnegative => Mode::Nonnegative,
            ModeArg::General => Mode::General,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Input path; MatrixMarket format takes two values: matrix then labels.
    #[arg(long, num_args = 1..=2)]
    input: Vec<PathBuf>,

    #[arg(long, value_enum, default_value_t = FormatArg::Libsvm)]
    format: FormatArg,

    /// Generate a synthetic instance instead of reading one:
    /// space/comma-separated `m= n= density= cond= seed=` pairs.
    #[arg(long, conflicts_with = "input", allow_hyphen_values = true)]
    synth: Option<String>,

    #[arg(long, value_enum, default_value_t = ModeArg::Nonnegative)]
    mode: ModeArg,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Multiplicative accuracy for the no-restart budget.
    #[arg(long, default_value_t = 1e-2)]
    epsilon: f64,

    /// Natural-residual stopping target for the restarted solver.
    #[arg(long, default_value_t = 1e-6)]
    target_residual: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Iteration budget in epochs (one epoch = n inner iterations).
    #[arg(long, default_value_t = 5000)]
    max_epochs: u64,

    /// Run the plain solver without adaptive restarts.
    #[arg(long)]
    no_restart: bool,

    /// Mini-batch width; 1 means single-coordinate sampling.
    #[arg(long, default_value_t = 1)]
    batch_size: usize,

    #[arg(long, default_value = "solution.csv")]
    out_solution: PathBuf,

    #[arg(long, default_value = "metrics.csv")]
    out_metrics: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Validate(args) => cmd_validate(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn parse_synth(spec: &str) -> Result<SynthSpec, String> {
    let mut out = SynthSpec::default();
    for token in spec.split([' ', ',']).filter(|t| !t.is_empty()) {
        let Some((key, value)) = token.split_once('=') else {
            return Err(format!("synth spec token {token:?} is not key=value"));
        };
        fn bad(key: &str, value: &str) -> String {
            format!("bad synth value for {key}: {value:?}")
        }
        match key {
            "m" => out.m = value.parse().map_err(|_| bad(key, value))?,
            "n" => out.n = value.parse().map_err(|_| bad(key, value))?,
            "density" => out.density = value.parse().map_err(|_| bad(key, value))?,
            "cond" => out.cond = value.parse().map_err(|_| bad(key, value))?,
            "seed" => out.seed = value.parse().map_err(|_| bad(key, value))?,
            other => return Err(format!("unknown synth key {other:?}")),
        }
    }
    if out.m == 0 || out.n == 0 {
        return Err("synth dimensions must be positive".into());
    }
    if out.density.is_nan() || out.density <= 0.0 || out.density > 1.0 {
        return Err("synth density must lie in (0, 1]".into());
    }
    if out.cond.is_nan() || out.cond < 1.0 {
        return Err("synth cond must be >= 1".into());
    }
    Ok(out)
}

fn load(args: &InputArgs) -> Result<Dataset, String> {
    if let Some(spec) = &args.synth {
        return Ok(synth::generate(&parse_synth(spec)?));
    }
    match (args.format, args.input.as_slice()) {
        (_, []) => Err("no --input path and no --synth spec given".into()),
        (FormatArg::Libsvm, [path]) => io::read_libsvm(path, None).map_err(|e| e.to_string()),
        (FormatArg::Csv, [path]) => io::read_csv(path).map_err(|e| e.to_string()),
        (FormatArg::Mtx, [matrix, labels]) => {
            io::read_matrix_market(matrix, labels).map_err(|e| e.to_string())
        }
        (FormatArg::Mtx, _) => {
            Err("mtx format needs two --input values: matrix file then labels file".into())
        }
        (_, _) => Err("this format takes exactly one --input path".into()),
    }
}

/// Validates and preprocesses a dataset, compacting labels when all-zero rows
/// were removed.
fn prepare(dataset: Dataset, mode: Mode) -> Result<ProblemInstance, String> {
    let Dataset { matrix, labels } = dataset;
    let (matrix, kept_rows) = model::validate(matrix, mode).map_err(|e| e.to_string())?;
    let labels = match kept_rows {
        None => labels,
        Some(kept) => kept.into_iter().map(|r| labels[r]).collect(),
    };
    model::preprocess(matrix, &labels, mode).map_err(|e| e.to_string())
}

fn summary_line(prefix: Option<&str>, sol: &Solution, metrics: &RunMetrics) {
    let passes = metrics.records().last().map_or(0.0, |r| r.data_passes);
    let tag = prefix.map(|p| format!("{p}: ")).unwrap_or_default();
    println!(
        "{tag}f_obj={:.12e} residual={:.12e} iters={} restarts={} data_passes={:.3}",
        sol.objective, sol.residual, sol.iterations, sol.restarts, passes
    );
}

fn exit_for(status: SolveStatus) -> ExitCode {
    match status {
        SolveStatus::Converged => ExitCode::SUCCESS,
        SolveStatus::BudgetExhausted => ExitCode::from(2),
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<ExitCode, String> {
    let inst = prepare(load(&args.input)?, args.input.mode.into())?;
    if inst.is_degenerate() {
        println!("trivial solution x = 0: every column has c_j <= 0");
        let sol = Solution::trivial(inst.original_cols());
        io::write_solution(&sol, &args.out_solution).map_err(|e| e.to_string())?;
        io::write_metrics(&RunMetrics::new(), &args.out_metrics).map_err(|e| e.to_string())?;
        return Ok(ExitCode::SUCCESS);
    }
    if args.epsilon.is_nan() || args.epsilon <= 0.0 {
        return Err(format!("epsilon must be positive, got {}", args.epsilon));
    }
    let max_iters = args.max_epochs.saturating_mul(inst.n() as u64);
    let (sol, metrics) = run_solver(&inst, args, max_iters)?;
    io::write_solution(&sol, &args.out_solution).map_err(|e| e.to_string())?;
    io::write_metrics(&metrics, &args.out_metrics).map_err(|e| e.to_string())?;
    summary_line(None, &sol, &metrics);
    Ok(exit_for(sol.status))
}

fn run_solver(
    inst: &ProblemInstance,
    args: &SolveArgs,
    max_iters: u64,
) -> Result<(Solution, RunMetrics), String> {
    let partition = if args.batch_size > 1 {
        Some(BlockPartition::contiguous(inst, args.batch_size, 100).map_err(|e| e.to_string())?)
    } else {
        None
    };
    let result = if args.no_restart {
        match partition {
            None => solve_plain(
                inst,
                &vec![0.0; inst.n()],
                args.epsilon,
                args.seed,
                max_iters,
            ),
            Some(part) => solve_plain_block(
                inst,
                &vec![0.0; inst.n()],
                part,
                args.epsilon,
                args.seed,
                max_iters,
            ),
        }
    } else {
        let cfg = RestartConfig {
            target_residual: args.target_residual,
            max_total_iters: max_iters,
            ..RestartConfig::default()
        };
        match partition {
            None => solve_restarted(inst, &cfg, args.seed),
            Some(part) => solve_restarted_block(inst, part, &cfg, args.seed),
        }
    };
    result.map_err(|e| e.to_string())
}

/// Inserts a solver tag before the file extension: `metrics.csv` ->
/// `metrics.fista.csv`.
fn tagged_path(base: &Path, tag: &str) -> PathBuf {
    let stem = base.file_stem().unwrap_or_default().to_string_lossy();
    let ext = base.extension().map(|e| e.to_string_lossy().into_owned());
    let name = match ext {
        Some(ext) => format!("{stem}.{tag}.{ext}"),
        None => format!("{stem}.{tag}"),
    };
    base.with_file_name(name)
}

fn cmd_bench(args: &SolveArgs) -> Result<ExitCode, String> {
    let inst = prepare(load(&args.input)?, args.input.mode.into())?;
    if inst.is_degenerate() {
        println!("trivial solution x = 0: every column has c_j <= 0");
        return Ok(ExitCode::SUCCESS);
    }
    if args.epsilon.is_nan() || args.epsilon <= 0.0 {
        return Err(format!("epsilon must be positive, got {}", args.epsilon));
    }
    let n = inst.n();
    let max_iters = args.max_epochs.saturating_mul(n as u64);
    let x0 = vec![0.0; n];
    let base_cfg = BaselineConfig {
        max_iters: args.max_epochs,
        tol_residual: args.target_residual,
        ..BaselineConfig::default()
    };
    let restart_cfg = RestartConfig {
        target_residual: args.target_residual,
        max_total_iters: max_iters,
        ..RestartConfig::default()
    };
    let partition = if args.batch_size > 1 {
        Some(BlockPartition::contiguous(&inst, args.batch_size, 100).map_err(|e| e.to_string())?)
    } else {
        None
    };

    // one thread per solver over the shared immutable instance
    let (plain, restarted, fista_run, pgd_run) = std::thread::scope(|scope| {
        let plain = scope.spawn(|| match partition.clone() {
            None => solve_plain(&inst, &x0, args.epsilon, args.seed, max_iters),
            Some(p) => solve_plain_block(&inst, &x0, p, args.epsilon, args.seed, max_iters),
        });
        let restarted = scope.spawn(|| match partition.clone() {
            None => solve_restarted(&inst, &restart_cfg, args.seed),
            Some(p) => solve_restarted_block(&inst, p, &restart_cfg, args.seed),
        });
        let fista_run = scope.spawn(|| baselines::fista(&inst, &x0, &base_cfg));
        let pgd_run = scope.spawn(|| baselines::pgd(&inst, &x0, &base_cfg));
        (
            plain.join().expect("plain solver thread"),
            restarted.join().expect("restarted solver thread"),
            fista_run.join().expect("fista thread"),
            pgd_run.join().expect("pgd thread"),
        )
    });

    let runs: Vec<(&str, (Solution, RunMetrics))> = vec![
        ("sinnls", plain.map_err(|e| e.to_string())?),
        ("sinnls_restart", restarted.map_err(|e| e.to_string())?),
        ("fista", fista_run.map_err(|e| e.to_string())?),
        ("pgd", pgd_run.map_err(|e| e.to_string())?),
    ];

    let mut worst = SolveStatus::Converged;
    for (tag, (sol, metrics)) in &runs {
        io::write_metrics(metrics, tagged_path(&args.out_metrics, tag))
            .map_err(|e| e.to_string())?;
        summary_line(Some(tag), sol, metrics);
        if sol.status == SolveStatus::BudgetExhausted {
            worst = SolveStatus::BudgetExhausted;
        }
    }
    write_combined(&runs, &tagged_path(&args.out_metrics, "combined"))?;

    // the headline solver's solution is the bench artifact
    let (_, (restarted_sol, _)) = &runs[1];
    io::write_solution(restarted_sol, &args.out_solution).map_err(|e| e.to_string())?;
    Ok(exit_for(worst))
}

fn write_combined(runs: &[(&str, (Solution, RunMetrics))], path: &Path) -> Result<(), String> {
    use std::io::Write;
    let file = std::fs::File::create(path).map_err(|e| e.to_string())?;
    let mut out = std::io::BufWriter::new(file);
    let emit = |out: &mut std::io::BufWriter<std::fs::File>| -> std::io::Result<()> {
        writeln!(
            out,
            "solver,iter,data_passes,wall_s,objective,natural_residual,event"
        )?;
        for (tag, (_, metrics)) in runs {
            for r in metrics.records() {
                writeln!(
                    out,
                    "{tag},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                    r.iter,
                    r.data_passes,
                    r.wall_s,
                    r.objective,
                    r.residual,
                    r.event.as_str()
                )?;
            }
        }
        out.flush()
    };
    emit(&mut out).map_err(|e| e.to_string())
}

fn cmd_validate(args: &InputArgs) -> Result<ExitCode, String> {
    let inst = prepare(load(args)?, args.mode.into())?;
    if inst.is_degenerate() {
        println!(
            "m={} n=0 nnz=0 dropped_cols={}",
            inst.m(),
            inst.dropped_cols()
        );
        println!("trivial solution x = 0: every column has c_j <= 0");
        return Ok(ExitCode::SUCCESS);
    }
    let norms: Vec<f64> = inst.lambda().iter().map(|l| l.sqrt()).collect();
    let min_norm = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_norm = norms.iter().cloned().fold(0.0f64, f64::max);
    println!(
        "m={} n={} nnz={} dropped_cols={} col_norm_min={:.6e} col_norm_max={:.6e}",
        inst.m(),
        inst.n(),
        inst.nnz(),
        inst.dropped_cols(),
        min_norm,
        max_norm
    );
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synth_spec_parses_keys_and_defaults() {
        let spec = parse_synth("m=50 n=100,density=0.3 cond=1e4 seed=7").unwrap();
        assert_eq!(spec.m, 50);
        assert_eq!(spec.n, 100);
        assert_eq!(spec.density, 0.3);
        assert_eq!(spec.cond, 1e4);
        assert_eq!(spec.seed, 7);
        // partial spec keeps defaults elsewhere
        let partial = parse_synth("cond=1e4").unwrap();
        assert_eq!(partial.m, SynthSpec::default().m);
        assert_eq!(partial.cond, 1e4);
    }

    #[test]
    fn synth_spec_rejects_bad_tokens() {
        assert!(parse_synth("m").is_err());
        assert!(parse_synth("q=3").is_err());
        assert!(parse_synth("m=zero").is_err());
        assert!(parse_synth("density=1.5").is_err());
    }

    #[test]
    fn tagged_path_inserts_before_extension() {
        assert_eq!(
            tagged_path(Path::new("out/metrics.csv"), "fista"),
            PathBuf::from("out/metrics.fista.csv")
        );
        assert_eq!(
            tagged_path(Path::new("metrics"), "pgd"),
            PathBuf::from("metrics.pgd")
        );
    }
}
