use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use benchnet::arch::{enumerate_layer_shapes, ArchSpec};
use benchnet::data::{run_pipeline, CleanDataset, PipelineConfig, RawTable};
use benchnet::harness::{
    enumerate_grid, epoch_trace_svg, export_epoch_trace, export_residual_diagnostics,
    prepare_split, rank_results, read_results_csv, results_csv, run_baselines, run_grid,
    seeds_from_master, BaselineKind, GridDocument, ResultRow, DEFAULT_SEED_COUNT,
};
use benchnet::Error;
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

/// Benchmark-score regression: data cleaning, network grid search and baselines.
#[derive(Debug, Parser)]
#[command(name = "benchnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean a raw results CSV into a numeric training table.
    Clean {
        /// Raw results CSV.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Train every configuration of a grid and rank the results.
    Search {
        /// Cleaned CSV written by `clean`.
        #[arg(long)]
        input: PathBuf,
        /// TOML grid document.
        #[arg(long)]
        grid: PathBuf,
        #[command(flatten)]
        out: OutArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Number of worker threads.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Fit LR, RF and SVR and merge their rows into the results tables.
    Baseline {
        /// Cleaned CSV written by `clean`.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Number of seeds, counted up from `--seed`.
        #[arg(long, default_value_t = DEFAULT_SEED_COUNT)]
        seeds: usize,
    },
    /// Print the layer shapes of a TOML architecture document.
    Describe {
        /// Architecture document.
        #[arg(long)]
        input: PathBuf,
        /// Number of input features.
        #[arg(long, default_value_t = benchnet::arch::DEFAULT_INPUT_WIDTH)]
        width: usize,
    },
    /// Re-rank an existing results CSV.
    Report {
        /// Results CSV written by `search` or `baseline`.
        #[arg(long)]
        input: PathBuf,
        /// Also write re-ranked tables here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output directory, created if absent.
    #[arg(long)]
    out: PathBuf,
    /// Overwrite existing outputs.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Z-score features with training-split statistics.
    #[arg(long)]
    standardize: bool,
    /// Also render SVG plots.
    #[arg(long)]
    svg: bool,
    /// Fill the `seconds` column (makes output run-dependent).
    #[arg(long)]
    timings: bool,
}

const BY_R2: &str = "results_by_r2.csv";
const BY_MSE: &str = "results_by_mse.csv";

/// Failure carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Clean { input, out } => cmd_clean(&input, &out),
        Command::Search {
            input,
            grid,
            out,
            run,
            workers,
        } => cmd_search(&input, &grid, &out, &run, workers),
        Command::Baseline {
            input,
            out,
            run,
            seeds,
        } => cmd_baseline(&input, &out, &run, seeds),
        Command::Describe { input, width } => cmd_describe(&input, width),
        Command::Report { input, out, force } => cmd_report(&input, out.as_deref(), force),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

/// Refuses to clobber an input file, or any existing file without `force`.
fn check_writable(path: &Path, inputs: &[&Path], force: bool) -> CliResult<()> {
    if let Ok(target) = path.canonicalize() {
        if inputs
            .iter()
            .any(|i| i.canonicalize().ok().as_ref() == Some(&target))
        {
            return Err(Failure {
                code: 2,
                message: format!(
                    "{} is an input file; refusing to overwrite it",
                    path.display()
                ),
            });
        }
        if !force {
            return Err(Failure {
                code: 2,
                message: format!("{} exists; pass --force to overwrite", path.display()),
            });
        }
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn cmd_clean(input: &Path, out: &OutArgs) -> CliResult<()> {
    let table = RawTable::read_csv(input)?;
    let output = run_pipeline(&table, &PipelineConfig::default())?;
    create_dir(&out.out)?;
    let files = [
        out.out.join("cleaned.csv"),
        out.out.join("cleaning_report.json"),
        out.out.join("vocabularies.json"),
    ];
    for f in &files {
        check_writable(f, &[input], out.force)?;
    }
    write(&files[0], &output.dataset.to_csv_string())?;
    write(&files[1], &output.report.to_json())?;
    write(&files[2], &output.vocabularies.to_json())?;
    for line in output.report.summary() {
        info!("{line}");
    }
    info!(
        "{} rows x {} features written to {}",
        output.dataset.n_rows(),
        output.dataset.n_features(),
        files[0].display()
    );
    Ok(())
}

fn write_tables(dir: &Path, rows: &[ResultRow], timings: bool) -> CliResult<()> {
    let ranked = rank_results(rows);
    write(&dir.join(BY_R2), &results_csv(&ranked.by_r2, timings))?;
    write(&dir.join(BY_MSE), &results_csv(&ranked.by_mse, timings))
}

fn cmd_search(
    input: &Path,
    grid: &Path,
    out: &OutArgs,
    run: &RunArgs,
    workers: usize,
) -> CliResult<()> {
    let dataset = CleanDataset::read_csv(input)?;
    let mut doc = GridDocument::from_toml(&read_text(grid)?)
        .map_err(|e| Failure::from(Error::Config(format!("{}: {e}", grid.display()))))?;
    doc.standardize |= run.standardize;
    let expansion = enumerate_grid(&doc, run.seed, dataset.n_features())?;
    for ex in &expansion.exclusions {
        warn!("excluded {}: {}", ex.label, ex.reason);
    }
    if expansion.configs.is_empty() {
        return Err(Error::Config("no feasible configurations in grid".into()).into());
    }
    create_dir(&out.out)?;
    for name in [BY_R2, BY_MSE] {
        check_writable(&out.out.join(name), &[input, grid], out.force)?;
    }
    info!(
        "running {} configurations x {} seeds on {} workers",
        expansion.configs.len(),
        doc.seeds,
        workers
    );
    let records = run_grid(&expansion.configs, &dataset, workers, &|p| {
        info!(
            "[{}/{}] {} done{}",
            p.completed,
            p.total,
            p.label,
            if p.failures > 0 {
                format!(" ({} seeds failed)", p.failures)
            } else {
                String::new()
            }
        );
    })?;

    let traces = out.out.join("traces");
    create_dir(&traces)?;
    let mut index = String::from("trace,label\n");
    for (i, rec) in records.iter().enumerate() {
        for failure in &rec.failures {
            warn!("{}: {failure}", rec.identity.label());
        }
        let stem = format!("trace_{:03}", i + 1);
        index.push_str(&format!("{stem}.csv,{}\n", rec.identity.label()));
        write(
            &traces.join(format!("{stem}.csv")),
            &export_epoch_trace(&rec.trace),
        )?;
        if run.svg {
            write(
                &traces.join(format!("{stem}.svg")),
                &epoch_trace_svg(&rec.identity.label(), &rec.trace),
            )?;
        }
    }
    write(&traces.join("index.csv"), &index)?;

    let rows: Vec<ResultRow> = records.iter().map(ResultRow::from).collect();
    write_tables(&out.out, &rows, run.timings)?;
    info!("results written to {}", out.out.display());
    if records.iter().all(|r| r.is_failed()) {
        return Err(Failure {
            code: 4,
            message: "every experiment failed".into(),
        });
    }
    Ok(())
}

fn cmd_baseline(input: &Path, out: &OutArgs, run: &RunArgs, seeds: usize) -> CliResult<()> {
    if seeds == 0 {
        return Err(Error::Config("--seeds must be positive".into()).into());
    }
    let dataset = CleanDataset::read_csv(input)?;
    let seeds = seeds_from_master(run.seed, seeds);
    create_dir(&out.out)?;

    let records = run_baselines(&dataset, &seeds, true, run.standardize)?;
    let first_split = prepare_split(&dataset, seeds[0], run.standardize)?;
    for (kind, rec) in BaselineKind::ALL.iter().zip(&records) {
        let tag = kind.tag();
        for failure in &rec.failures {
            warn!("{}: {failure}", kind.label());
        }
        match &rec.mean {
            Some(m) => info!(
                "{}: r2 {} mae {} mse {}",
                kind.label(),
                m.r2.map_or("undefined".to_string(), |r| r.to_string()),
                m.mae,
                m.mse
            ),
            None => warn!("{}: every seed failed", kind.label()),
        }
        let diag = export_residual_diagnostics(tag, &rec.test_predictions, &rec.test_truth)?;
        diag.write_to(&out.out)?;
        if run.svg {
            write(&out.out.join(format!("qq_{tag}.svg")), &diag.qq_svg())?;
        }
        let model = kind.fit(&first_split.train, seeds[0])?;
        write(&out.out.join(format!("model_{tag}.json")), &model.to_json())?;
    }

    // merge with existing results, replacing earlier baseline rows
    let existing = out.out.join(BY_R2);
    let mut rows = if existing.exists() {
        let file = fs::File::open(&existing).map_err(|e| io_failure(&existing, e))?;
        read_results_csv(file)?
    } else {
        Vec::new()
    };
    let labels: Vec<&str> = BaselineKind::ALL.iter().map(|k| k.label()).collect();
    rows.retain(|r| {
        !(labels.contains(&r.identity.architecture.as_str()) && r.identity.loss.is_empty())
    });
    rows.extend(records.iter().map(ResultRow::from));
    if !run.timings {
        rows.iter_mut().for_each(|r| r.seconds = None);
    }
    write_tables(&out.out, &rows, run.timings)?;
    info!("baseline rows merged into {}", existing.display());
    Ok(())
}

fn cmd_describe(input: &Path, width: usize) -> CliResult<()> {
    let spec = ArchSpec::from_toml(&read_text(input)?)?;
    let stack = spec.build(width)?;
    let shapes = enumerate_layer_shapes(&stack, stack.input_shape())?;
    let mut stdout = std::io::stdout().lock();
    let label_width = shapes
        .iter()
        .map(|s| s.label.len())
        .max()
        .unwrap_or(5)
        .max(5);
    let mut lines = vec![format!("{:<label_width$}  shape", "layer")];
    for s in &shapes {
        let dims: Vec<String> = s.shape.iter().map(usize::to_string).collect();
        lines.push(format!("{:<label_width$}  ({})", s.label, dims.join(", ")));
    }
    for line in lines {
        writeln!(stdout, "{line}").map_err(|e| io_failure(Path::new("stdout"), e))?;
    }
    Ok(())
}

fn cmd_report(input: &Path, out: Option<&Path>, force: bool) -> CliResult<()> {
    let file = fs::File::open(input).map_err(|e| io_failure(input, e))?;
    let rows = read_results_csv(file)?;
    let ranked = rank_results(&rows);
    let timings = rows.iter().any(|r| r.seconds.is_some());
    print!("{}", results_csv(&ranked.by_r2, timings));
    if let Some(dir) = out {
        create_dir(dir)?;
        for name in [BY_R2, BY_MSE] {
            check_writable(&dir.join(name), &[input], force)?;
        }
        write_tables(dir, &rows, timings)?;
    }
    Ok(())
}
