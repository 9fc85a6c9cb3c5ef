//! Command-line interface.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use copgauss::evaluate::{kld_vs_standard_normal, royston_mvn_test, shapiro_wilk, DEFAULT_KLD_BOX, DEFAULT_KLD_POINTS};
use copgauss::model_io::{model_from_json, model_to_json};
use copgauss::ng::{default_delta_candidates, fit_ng, ng_forward, ng_inverse_training, select_delta};
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::experiments::{
    diagonal_csv, run_fig1, run_fig2, run_simulation, run_synth, sup_gap, synthetic_blobs, ExperimentConfig, Method,
};
use crate::io::{
    default_header, ensure_dir, fmt_f64, read_matrix_csv_file, read_pgm_dir, read_text, write_json,
    write_matrix_csv_file, write_pgm_dir, write_text,
};

#[derive(Debug, Parser)]
#[command(name = "copgauss", version, about = "Copula-based Gaussianization toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the simulation study (cases x sample sizes x methods x replications).
    Simulate(SimulateArgs),
    /// Empirical versus true Gaussian-copula diagonal.
    Fig1(Fig1Args),
    /// Round trip of the toy distribution through the transform.
    Fig2(Fig2Args),
    /// Fit a model to a CSV file and write the Gaussianized data.
    Transform(TransformArgs),
    /// Map Gaussianized training data back through a saved model.
    Inverse(InverseArgs),
    /// Synthesize images from a directory of PGM frames or a generated corpus.
    Synth(SynthArgs),
    /// Normality test of a CSV file (Royston for p >= 2, Shapiro-Wilk for p = 1).
    Test(TestArgs),
    /// KL divergence from N(0, I) to the kernel density estimate of a CSV file.
    Kld(KldArgs),
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: HarnessError| e.to_string())
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Comma-separated case ids (1..4).
    #[arg(long, default_value = "1,2,3,4", value_delimiter = ',')]
    pub cases: Vec<u8>,
    /// Comma-separated sample sizes.
    #[arg(long = "n", default_value = "1000,1500,2000", value_delimiter = ',')]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    /// Comma-separated subset of ng, rbig, bcg, rg.
    #[arg(long, default_value = "ng,rbig,bcg,rg", value_delimiter = ',', value_parser = parse_method)]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_KLD_POINTS)]
    pub kld_points: usize,
    #[arg(long, default_value_t = DEFAULT_KLD_BOX)]
    pub kld_box: f64,
    #[arg(long, default_value_t = copgauss::baselines::DEFAULT_BCG_SWEEPS)]
    pub bcg_sweeps: usize,
    #[arg(long, default_value_t = copgauss::baselines::DEFAULT_RBIG_ITERS)]
    pub rbig_iters: usize,
    /// Select NG offsets by Royston p-value.
    #[arg(long)]
    pub select_delta: bool,
    #[arg(long, default_value_t = copgauss::sampling::DEFAULT_T_COPULA_DOF)]
    pub t_copula_dof: f64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct Fig1Args {
    #[arg(long = "n", default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct Fig2Args {
    #[arg(long = "n", default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TransformArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Where to save the fitted model (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated offsets, first must be 0 (default: all zeros).
    #[arg(long, value_delimiter = ',', conflicts_with = "select_delta")]
    pub deltas: Option<Vec<usize>>,
    #[arg(long)]
    pub select_delta: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct InverseArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Directory of equally sized binary PGM frames.
    #[arg(long, conflicts_with = "blobs")]
    pub input_dir: Option<PathBuf>,
    /// Generate this many synthetic blob frames instead of reading files.
    #[arg(long)]
    pub blobs: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub height: usize,
    #[arg(long, default_value_t = 8)]
    pub width: usize,
    /// Number of frames to synthesize.
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TestArgs {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct KldArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_KLD_POINTS)]
    pub points: usize,
    #[arg(long = "box", default_value_t = DEFAULT_KLD_BOX)]
    pub half_width: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn echo_config<T: Serialize>(dir: &Path, command: &str, args: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Echo<'a, T> {
        command: &'a str,
        version: &'a str,
        args: &'a T,
    }
    write_json(&dir.join("config.json"), &Echo { command, version: env!("CARGO_PKG_VERSION"), args })
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let config = ExperimentConfig {
        cases: args.cases.clone(),
        n_list: args.n_list.clone(),
        p: args.p,
        reps: args.reps,
        methods: args.methods.clone(),
        master_seed: args.seed,
        kld_points: args.kld_points,
        kld_box: args.kld_box,
        bcg_sweeps: args.bcg_sweeps,
        rbig_iters: args.rbig_iters,
        select_delta: args.select_delta,
        t_copula_dof: args.t_copula_dof,
    };
    config.validate()?;
    ensure_dir(&args.out)?;
    echo_config(&args.out, "simulate", args)?;
    let results = if args.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
            .map_err(|e| HarnessError::Usage(e.to_string()))?
            .install(|| run_simulation(&config))?
    } else {
        run_simulation(&config)?
    };
    write_text(&args.out.join("replicates.csv"), &results.replicates_csv()?)?;
    let summary = results.summary_csv()?;
    write_text(&args.out.join("summary.csv"), &summary)?;
    write_text(&args.out.join("timing.csv"), &results.timing_csv()?)?;
    print!("{summary}");
    Ok(())
}

fn fig1(args: &Fig1Args) -> Result<()> {
    let points = run_fig1(args.n, args.seed, args.grid)?;
    ensure_dir(&args.out)?;
    echo_config(&args.out, "fig1", args)?;
    write_text(&args.out.join("fig1.csv"), &diagonal_csv(&points)?)?;
    println!("sup_gap,{}", fmt_f64(sup_gap(&points)));
    Ok(())
}

fn fig2(args: &Fig2Args) -> Result<()> {
    let report = run_fig2(args.n, args.seed)?;
    ensure_dir(&args.out)?;
    echo_config(&args.out, "fig2", args)?;
    let h = default_header(2);
    write_matrix_csv_file(&args.out.join("training.csv"), &h, &report.training)?;
    write_matrix_csv_file(&args.out.join("forward.csv"), &h, &report.forward)?;
    write_matrix_csv_file(&args.out.join("fresh_gaussian.csv"), &h, &report.fresh_gaussian)?;
    write_matrix_csv_file(&args.out.join("synthesized.csv"), &h, &report.synthesized)?;
    #[derive(Serialize)]
    struct Summary {
        royston_h: f64,
        pvalue: f64,
        roundtrip_max_abs_error: f64,
        grid_exact: bool,
    }
    write_json(
        &args.out.join("report.json"),
        &Summary {
            royston_h: report.royston.statistic,
            pvalue: report.royston.pvalue,
            roundtrip_max_abs_error: report.roundtrip_max_abs_error,
            grid_exact: report.grid_exact,
        },
    )?;
    println!(
        "royston_h,{}\npvalue,{}\nroundtrip_max_abs_error,{}",
        fmt_f64(report.royston.statistic),
        fmt_f64(report.royston.pvalue),
        fmt_f64(report.roundtrip_max_abs_error)
    );
    Ok(())
}

fn transform(args: &TransformArgs) -> Result<()> {
    let (header, data) = read_matrix_csv_file(&args.input)?;
    let deltas = match (&args.deltas, args.select_delta) {
        (Some(d), _) => d.clone(),
        (None, true) => select_delta(&data, &default_delta_candidates(data.nrows(), data.ncols()))?,
        (None, false) => vec![0; data.ncols()],
    };
    let model = fit_ng(&data, Some(&deltas))?;
    let z = ng_forward(&model, &data)?;
    write_text(&args.model, &model_to_json(&model)?)?;
    write_matrix_csv_file(&args.output, &header, &z)
}

fn inverse(args: &InverseArgs) -> Result<()> {
    let model = model_from_json(&read_text(&args.model)?)?;
    let (header, z) = read_matrix_csv_file(&args.input)?;
    let x = ng_inverse_training(&model, &z)?;
    write_matrix_csv_file(&args.output, &header, &x)
}

fn synth(args: &SynthArgs) -> Result<()> {
    let images = match (&args.input_dir, args.blobs) {
        (Some(dir), _) => read_pgm_dir(dir)?,
        (None, Some(m)) => synthetic_blobs(m, args.height, args.width, args.seed)?,
        (None, None) => return Err(HarnessError::Usage("synth needs --input-dir or --blobs".into())),
    };
    let out = run_synth(&images, args.count, args.seed)?;
    ensure_dir(&args.out)?;
    echo_config(&args.out, "synth", args)?;
    if args.blobs.is_some() {
        write_pgm_dir(&args.out.join("training"), "train", &images)?;
    }
    write_pgm_dir(&args.out, "synth", &out)?;
    println!("frames,{}\nheight,{}\nwidth,{}", out.len(), out.height(), out.width());
    Ok(())
}

fn test(args: &TestArgs) -> Result<()> {
    let (_, data) = read_matrix_csv_file(&args.input)?;
    let (name, t) = if data.ncols() == 1 {
        ("shapiro_wilk", shapiro_wilk(data.column(0))?)
    } else {
        ("royston", royston_mvn_test(&data)?)
    };
    println!("test,statistic,pvalue\n{name},{},{}", fmt_f64(t.statistic), fmt_f64(t.pvalue));
    Ok(())
}

fn kld(args: &KldArgs) -> Result<()> {
    let (_, data) = read_matrix_csv_file(&args.input)?;
    let v = kld_vs_standard_normal(&data, args.points, args.half_width, args.seed)?;
    println!("kld,{}", fmt_f64(v));
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fig1(a) => fig1(a),
        Command::Fig2(a) => fig2(a),
        Command::Transform(a) => transform(a),
        Command::Inverse(a) => inverse(a),
        Command::Synth(a) => synth(a),
        Command::Test(a) => test(a),
        Command::Kld(a) => kld(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
