//! Experiment runner for the randcca toolkit.
//!
//! One subcommand per experiment step: `ingest` (load or synthesize a
//! dataset, optionally materializing it as dense CSV), `rcca` (randomized
//! few-pass solver), `horst` (iterative baseline, optionally warm-started
//! from a stored model), `oracle` (exact dense reference), `spectrum`
//! (two-pass singular value estimates of the cross matrix) and `eval`
//! (objective and residuals of a stored model on a dataset). Every run
//! writes one JSON [`report::Report`].

pub mod modelfile;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use randcca::horst::{horst_iterate, HorstConfig, HorstInit};
use randcca::oracle::{exact_cca, DenseTwoView};
use randcca::rcca::{
    estimate_spectrum, feasibility_residuals, randomized_cca, CcaConfig, CcaModel, Regularization,
};
use randcca::rng::RNG_DESCRIPTION;
use randcca::synth::PowerLawSpec;
use randcca::twoview::{
    ingest_dense_csv, ingest_parallel_text, ingest_sparse_auto, TwoViewDataset, View,
};

use modelfile::StoredModel;
use report::{ConfigEcho, Report, FORMAT_VERSION};

#[derive(Parser)]
#[command(name = "randcca", version, about = "Randomized CCA experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load (or synthesize) a two-view dataset and report its shape
    Ingest(IngestArgs),
    /// Fit CCA with the randomized few-pass solver
    Rcca(RccaArgs),
    /// Fit CCA with Horst iteration (optionally warm-started)
    Horst(HorstArgs),
    /// Exact dense CCA reference (desk scale only)
    Oracle(OracleArgs),
    /// Two-pass randomized estimate of the cross-matrix spectrum
    Spectrum(SpectrumArgs),
    /// Evaluate a stored model on a dataset
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Line-aligned parallel text, feature-hashed bag of words
    Text,
    /// Per-view `idx:val` rows
    Sparse,
    /// Per-view dense CSV rows
    Dense,
    /// Seeded synthetic generator (see --spec)
    Synthetic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CenterOpt {
    On,
    Off,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// View A input path
    #[arg(long)]
    ka: Option<PathBuf>,
    /// View B input path
    #[arg(long)]
    kb: Option<PathBuf>,
    /// Input format
    #[arg(long, value_enum, default_value_t = Format::Dense)]
    format: Format,
    /// Hash width for text ingestion; dimensions become 2^bits
    #[arg(long, default_value_t = 19)]
    hash_bits: u32,
    /// View A dimension for sparse input (inferred when omitted)
    #[arg(long)]
    da: Option<usize>,
    /// View B dimension for sparse input (inferred when omitted)
    #[arg(long)]
    db: Option<usize>,
    /// Synthetic dataset spec, e.g. power-law:n=2000,da=40,db=40,rank=20
    #[arg(long)]
    spec: Option<String>,
    /// Mean centering (default: on for text, off otherwise)
    #[arg(long, value_enum)]
    center: Option<CenterOpt>,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// PRNG seed; doubles as the hash seed for text ingestion
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Train fraction; the remainder becomes the held-out test split
    #[arg(long, default_value_t = 0.9)]
    split: f64,
    /// Report path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct RegArgs {
    /// Scale-free regularization: λ = ν·Tr(Gram)/d
    #[arg(long, default_value_t = 0.01)]
    nu: f64,
    /// Explicit view-A ridge, overrides --nu (requires --lambda-b)
    #[arg(long)]
    lambda_a: Option<f64>,
    /// Explicit view-B ridge, overrides --nu (requires --lambda-a)
    #[arg(long)]
    lambda_b: Option<f64>,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Write the dataset as `<prefix>.a.csv` / `<prefix>.b.csv`
    #[arg(long)]
    data_out: Option<PathBuf>,
}

#[derive(Args)]
struct RccaArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    reg: RegArgs,
    /// Embedding dimension
    #[arg(long)]
    k: usize,
    /// Oversampling (sketch width is k+p); default max(10k, 100)
    #[arg(long)]
    p: Option<usize>,
    /// Power-iteration passes
    #[arg(long, default_value_t = 1)]
    q: usize,
    /// Persist the fitted model
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args)]
struct HorstArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    reg: RegArgs,
    /// Embedding dimension
    #[arg(long)]
    k: usize,
    /// CG iterations per least-squares solve (one data pass each)
    #[arg(long, default_value_t = 3)]
    inner_steps: usize,
    #[arg(long, default_value_t = 300)]
    max_sweeps: usize,
    /// Relative objective change for convergence
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// `random` or `model:<path>` (warm start)
    #[arg(long, default_value = "random", value_parser = parse_init)]
    init: InitArg,
    /// Persist the fitted model
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    reg: RegArgs,
    /// Embedding dimension
    #[arg(long)]
    k: usize,
    /// Persist the fitted model
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Sketch width: number of singular values to estimate
    #[arg(long, default_value_t = 20)]
    ell: usize,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    reg: RegArgs,
    /// Stored model to evaluate
    #[arg(long)]
    model_in: PathBuf,
    /// PRNG seed; reproduces the training run's split
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// When < 1, evaluate on the held-out part of the seeded split
    #[arg(long, default_value_t = 1.0)]
    split: f64,
    /// Report path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
enum InitArg {
    Random,
    Model(PathBuf),
}

impl std::fmt::Display for InitArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitArg::Random => write!(f, "random"),
            InitArg::Model(p) => write!(f, "model:{}", p.display()),
        }
    }
}

fn parse_init(s: &str) -> std::result::Result<InitArg, String> {
    if s == "random" {
        Ok(InitArg::Random)
    } else if let Some(path) = s.strip_prefix("model:") {
        Ok(InitArg::Model(PathBuf::from(path)))
    } else {
        Err(format!("expected 'random' or 'model:<path>', got '{s}'"))
    }
}

/// Parses argv and runs one subcommand. Returns the process exit code:
/// 0 on success, 1 on a runtime error, 2 on a usage error.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let start = Instant::now();
    match cli.command {
        Command::Ingest(args) => cmd_ingest(args, start),
        Command::Rcca(args) => cmd_rcca(args, start),
        Command::Horst(args) => cmd_horst(args, start),
        Command::Oracle(args) => cmd_oracle(args, start),
        Command::Spectrum(args) => cmd_spectrum(args, start),
        Command::Eval(args) => cmd_eval(args, start),
    }
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Text => "text",
        Format::Sparse => "sparse",
        Format::Dense => "dense",
        Format::Synthetic => "synthetic",
    }
}

fn load_dataset(data: &DataArgs, seed: u64) -> Result<TwoViewDataset> {
    let paths = || -> Result<(&Path, &Path)> {
        match (&data.ka, &data.kb) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => bail!(
                "--ka and --kb are required for --format {}",
                format_name(data.format)
            ),
        }
    };
    let ds = match data.format {
        Format::Text => {
            let (a, b) = paths()?;
            ingest_parallel_text(a, b, data.hash_bits, seed)?
        }
        Format::Sparse => {
            let (a, b) = paths()?;
            ingest_sparse_auto(a, b, data.da, data.db)?
        }
        Format::Dense => {
            let (a, b) = paths()?;
            ingest_dense_csv(a, b)?
        }
        Format::Synthetic => {
            let spec = match &data.spec {
                Some(s) => PowerLawSpec::parse(s)?,
                None => PowerLawSpec::default(),
            };
            spec.generate()?
        }
    };
    Ok(ds)
}

fn resolve_centered(data: &DataArgs) -> bool {
    match data.center {
        Some(CenterOpt::On) => true,
        Some(CenterOpt::Off) => false,
        None => data.format == Format::Text,
    }
}

fn resolve_reg(reg: &RegArgs) -> Result<Regularization> {
    match (reg.lambda_a, reg.lambda_b) {
        (Some(lambda_a), Some(lambda_b)) => {
            if lambda_a < 0.0 || lambda_b < 0.0 {
                bail!("--lambda-a and --lambda-b must be ≥ 0");
            }
            Ok(Regularization::Explicit { lambda_a, lambda_b })
        }
        (None, None) => {
            if reg.nu.is_nan() || reg.nu < 0.0 {
                bail!("--nu must be ≥ 0, got {}", reg.nu);
            }
            Ok(Regularization::ScaleFree { nu: reg.nu })
        }
        _ => bail!("--lambda-a and --lambda-b must be given together"),
    }
}

fn split_train_test(
    ds: TwoViewDataset,
    split: f64,
    seed: u64,
) -> Result<(TwoViewDataset, Option<TwoViewDataset>)> {
    if split == 1.0 {
        Ok((ds, None))
    } else {
        let (train, test) = ds.split(split, seed)?;
        let test = (test.n() > 0).then_some(test);
        Ok((train, test))
    }
}

fn base_echo(data: &DataArgs, ds: &TwoViewDataset, split: f64, centered: bool) -> ConfigEcho {
    ConfigEcho {
        format: format_name(data.format).to_string(),
        ka: data.ka.clone(),
        kb: data.kb.clone(),
        spec: if data.format == Format::Synthetic {
            Some(
                data.spec
                    .clone()
                    .unwrap_or_else(|| "power-law:(defaults)".to_string()),
            )
        } else {
            None
        },
        hash_bits: (data.format == Format::Text).then_some(data.hash_bits),
        d_a: ds.dim(View::A),
        d_b: ds.dim(View::B),
        split,
        centered,
        rng: RNG_DESCRIPTION.to_string(),
        ..Default::default()
    }
}

fn echo_reg(echo: &mut ConfigEcho, reg: &Regularization, lambda_a: f64, lambda_b: f64) {
    if let Regularization::ScaleFree { nu } = reg {
        echo.nu = Some(*nu);
    }
    echo.lambda_a = Some(lambda_a);
    echo.lambda_b = Some(lambda_b);
}

/// Shared tail for the three solver subcommands: objectives, residuals,
/// optional model persistence, report emission.
#[allow(clippy::too_many_arguments)]
fn finish_model_report(
    train: &TwoViewDataset,
    test: Option<&TwoViewDataset>,
    model: &CcaModel,
    solver: &str,
    mut echo: ConfigEcho,
    seed: u64,
    model_out: Option<&Path>,
    hash: Option<(u32, u64)>,
    out: Option<&Path>,
    start: Instant,
) -> Result<()> {
    let centered = model.config.centered;
    let objective_train = train.objective(&model.x_a, &model.x_b, centered)?;
    let objective_test = match test {
        Some(t) => Some(t.objective(&model.x_a, &model.x_b, centered)?),
        None => None,
    };
    let resid = feasibility_residuals(train, model)?;

    if let Some(path) = model_out {
        modelfile::save(
            path,
            &StoredModel {
                d_a: model.x_a.rows(),
                d_b: model.x_b.rows(),
                k: model.x_a.cols(),
                hash,
                x_a: model.x_a.clone(),
                x_b: model.x_b.clone(),
                correlations: model.correlations.clone(),
            },
        )?;
        echo.model_out = Some(path.to_path_buf());
    }
    echo_reg(&mut echo, &model.config.reg, model.lambda_a, model.lambda_b);

    let report = Report {
        config: echo,
        objective_train,
        objective_test,
        correlations: model.correlations.clone(),
        feasibility_residual_a: resid.whitening_a,
        feasibility_residual_b: resid.whitening_b,
        cross_offdiag_residual: resid.cross_offdiag_rel,
        passes_used: model.passes_used,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        seed,
        solver: solver.to_string(),
        format_version: FORMAT_VERSION,
    };
    report.write(out)
}

fn hash_config(data: &DataArgs, seed: u64) -> Option<(u32, u64)> {
    (data.format == Format::Text).then_some((data.hash_bits, seed))
}

fn cmd_rcca(args: RccaArgs, start: Instant) -> Result<()> {
    let ds = load_dataset(&args.data, args.common.seed)?;
    let centered = resolve_centered(&args.data);
    let (train, test) = split_train_test(ds, args.common.split, args.common.seed)?;
    let reg = resolve_reg(&args.reg)?;
    let p = args.p.unwrap_or_else(|| (10 * args.k).max(100));
    let cfg = CcaConfig {
        k: args.k,
        p,
        q: args.q,
        reg,
        seed: args.common.seed,
        centered,
    };
    let model = randomized_cca(&train, &cfg)?;

    let mut echo = base_echo(&args.data, &train, args.common.split, centered);
    echo.k = Some(args.k);
    echo.p = Some(p);
    echo.q = Some(args.q);
    finish_model_report(
        &train,
        test.as_ref(),
        &model,
        "rcca",
        echo,
        args.common.seed,
        args.model_out.as_deref(),
        hash_config(&args.data, args.common.seed),
        args.common.out.as_deref(),
        start,
    )
}

fn cmd_horst(args: HorstArgs, start: Instant) -> Result<()> {
    let ds = load_dataset(&args.data, args.common.seed)?;
    let centered = resolve_centered(&args.data);
    let (train, test) = split_train_test(ds, args.common.split, args.common.seed)?;
    let reg = resolve_reg(&args.reg)?;
    let init = match &args.init {
        InitArg::Random => HorstInit::Random,
        InitArg::Model(path) => {
            let stored = modelfile::load(path)?;
            HorstInit::Warm(Box::new(stored_to_model(stored, centered)))
        }
    };
    let cfg = HorstConfig {
        k: args.k,
        reg,
        max_sweeps: args.max_sweeps,
        inner_steps: args.inner_steps,
        tol: args.tol,
        seed: args.common.seed,
        init,
        centered,
    };
    let (model, trace) = horst_iterate(&train, &cfg)?;
    log::info!(
        "horst: {} sweeps, {} passes, objective {:.6}",
        trace.sweeps(),
        model.passes_used,
        model.objective()
    );

    let mut echo = base_echo(&args.data, &train, args.common.split, centered);
    echo.k = Some(args.k);
    echo.inner_steps = Some(args.inner_steps);
    echo.max_sweeps = Some(args.max_sweeps);
    echo.tol = Some(args.tol);
    echo.init = Some(args.init.to_string());
    finish_model_report(
        &train,
        test.as_ref(),
        &model,
        "horst",
        echo,
        args.common.seed,
        args.model_out.as_deref(),
        hash_config(&args.data, args.common.seed),
        args.common.out.as_deref(),
        start,
    )
}

fn cmd_oracle(args: OracleArgs, start: Instant) -> Result<()> {
    let ds = load_dataset(&args.data, args.common.seed)?;
    let centered = resolve_centered(&args.data);
    let (train, test) = split_train_test(ds, args.common.split, args.common.seed)?;
    let reg = resolve_reg(&args.reg)?;
    let (lambda_a, lambda_b) = reg.resolve(train.stats(), train.dim(View::A), train.dim(View::B));
    let dv = DenseTwoView::from_dataset(&train)?;
    let mut model = exact_cca(&dv, lambda_a, lambda_b, args.k, centered)?;
    model.config.reg = reg;

    let mut echo = base_echo(&args.data, &train, args.common.split, centered);
    echo.k = Some(args.k);
    finish_model_report(
        &train,
        test.as_ref(),
        &model,
        "oracle",
        echo,
        args.common.seed,
        args.model_out.as_deref(),
        hash_config(&args.data, args.common.seed),
        args.common.out.as_deref(),
        start,
    )
}

fn cmd_spectrum(args: SpectrumArgs, start: Instant) -> Result<()> {
    let ds = load_dataset(&args.data, args.common.seed)?;
    let centered = resolve_centered(&args.data);
    let (train, _) = split_train_test(ds, args.common.split, args.common.seed)?;
    let before = train.passes();
    let estimate = estimate_spectrum(&train, args.ell, args.common.seed, centered)?;
    if estimate.rank_collapsed() {
        log::warn!(
            "spectrum rank collapsed: {} of {} values",
            estimate.values.len(),
            args.ell
        );
    }

    let mut echo = base_echo(&args.data, &train, args.common.split, centered);
    echo.ell = Some(args.ell);
    let report = Report {
        config: echo,
        objective_train: 0.0,
        objective_test: None,
        // the estimated singular values of (1/n)ĀᵀB̄, descending
        correlations: estimate.values.clone(),
        feasibility_residual_a: 0.0,
        feasibility_residual_b: 0.0,
        cross_offdiag_residual: 0.0,
        passes_used: train.passes() - before,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        seed: args.common.seed,
        solver: "spectrum".to_string(),
        format_version: FORMAT_VERSION,
    };
    report.write(args.common.out.as_deref())
}

fn cmd_ingest(args: IngestArgs, start: Instant) -> Result<()> {
    let ds = load_dataset(&args.data, args.common.seed)?;
    let centered = resolve_centered(&args.data);

    let mut echo = base_echo(&args.data, &ds, args.common.split, centered);
    if let Some(prefix) = &args.data_out {
        let max_dim = ds.dim(View::A).max(ds.dim(View::B));
        if max_dim > 10_000 {
            bail!("refusing to write dense CSV for dimension {max_dim} (> 10000)");
        }
        let path_a = with_suffix(prefix, ".a.csv");
        let path_b = with_suffix(prefix, ".b.csv");
        write_dense_csv(&ds, View::A, &path_a)?;
        write_dense_csv(&ds, View::B, &path_b)?;
        echo.data_out = Some(prefix.clone());
    }

    let report = Report {
        config: echo,
        objective_train: 0.0,
        objective_test: None,
        correlations: Vec::new(),
        feasibility_residual_a: 0.0,
        feasibility_residual_b: 0.0,
        cross_offdiag_residual: 0.0,
        // ingestion-time statistics cost zero data passes
        passes_used: ds.passes(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        seed: args.common.seed,
        solver: "ingest".to_string(),
        format_version: FORMAT_VERSION,
    };
    report.write(args.common.out.as_deref())
}

fn cmd_eval(args: EvalArgs, start: Instant) -> Result<()> {
    let ds = load_dataset(&args.data, args.seed)?;
    let centered = resolve_centered(&args.data);
    let eval_ds = if args.split == 1.0 {
        ds
    } else {
        let (_, test) = ds.split(args.split, args.seed)?;
        if test.n() == 0 {
            bail!(
                "--split {} leaves no held-out rows to evaluate on",
                args.split
            );
        }
        test
    };

    let stored = modelfile::load(&args.model_in)?;
    let (d_a, d_b) = (eval_ds.dim(View::A), eval_ds.dim(View::B));
    if stored.d_a != d_a || stored.d_b != d_b {
        bail!(
            "dimension mismatch: model has d_a={}, d_b={}, k={}; dataset has d_a={d_a}, d_b={d_b}",
            stored.d_a,
            stored.d_b,
            stored.k
        );
    }
    if let Some((bits, seed)) = stored.hash {
        if args.data.format == Format::Text && (bits, seed) != (args.data.hash_bits, args.seed) {
            log::warn!(
                "model was hashed with bits={bits}, seed={seed}; this run uses bits={}, seed={} — \
                 feature spaces will not line up",
                args.data.hash_bits,
                args.seed
            );
        }
    }

    let reg = resolve_reg(&args.reg)?;
    let (lambda_a, lambda_b) = reg.resolve(eval_ds.stats(), d_a, d_b);
    let model = stored_model_with(stored, reg.clone(), lambda_a, lambda_b, centered, &eval_ds);

    let before = eval_ds.passes();
    let objective = eval_ds.objective(&model.x_a, &model.x_b, centered)?;
    let resid = feasibility_residuals(&eval_ds, &model)?;
    let passes_used = eval_ds.passes() - before;

    let mut echo = base_echo(&args.data, &eval_ds, args.split, centered);
    echo.k = Some(model.x_a.cols());
    echo.model_in = Some(args.model_in.clone());
    echo_reg(&mut echo, &reg, lambda_a, lambda_b);

    let report = Report {
        config: echo,
        objective_train: objective,
        objective_test: None,
        correlations: model.correlations.clone(),
        feasibility_residual_a: resid.whitening_a,
        feasibility_residual_b: resid.whitening_b,
        cross_offdiag_residual: resid.cross_offdiag_rel,
        passes_used,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        seed: args.seed,
        solver: "eval".to_string(),
        format_version: FORMAT_VERSION,
    };
    report.write(args.out.as_deref())
}

/// Minimal CcaModel wrapper for a warm start: Horst re-whitens the block,
/// so the placeholder regularization here never reaches the solve.
fn stored_to_model(stored: StoredModel, centered: bool) -> CcaModel {
    let k = stored.k;
    CcaModel {
        x_a: stored.x_a,
        x_b: stored.x_b,
        correlations: stored.correlations,
        lambda_a: 0.0,
        lambda_b: 0.0,
        n_train: 0,
        passes_used: 0,
        config: CcaConfig {
            k,
            p: 0,
            q: 0,
            reg: Regularization::Explicit {
                lambda_a: 0.0,
                lambda_b: 0.0,
            },
            seed: 0,
            centered,
        },
    }
}

fn stored_model_with(
    stored: StoredModel,
    reg: Regularization,
    lambda_a: f64,
    lambda_b: f64,
    centered: bool,
    ds: &TwoViewDataset,
) -> CcaModel {
    let k = stored.k;
    CcaModel {
        x_a: stored.x_a,
        x_b: stored.x_b,
        correlations: stored.correlations,
        lambda_a,
        lambda_b,
        n_train: ds.n(),
        passes_used: 0,
        config: CcaConfig {
            k,
            p: 0,
            q: 0,
            reg,
            seed: 0,
            centered,
        },
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_dense_csv(ds: &TwoViewDataset, view: View, path: &Path) -> Result<()> {
    let file =
        File::create(path).with_context(|| format!("failed to create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    let d = ds.dim(view);
    let mut buf = vec![0.0f64; d];
    for row in ds.rows(view) {
        buf.fill(0.0);
        for (i, v) in row.iter() {
            buf[i as usize] = v;
        }
        let line = buf
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}
