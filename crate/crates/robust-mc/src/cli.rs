//! The `rmc` experiment harness: generate fixtures, solve, filter,
//! sweep phase diagrams, cluster, and benchmark, writing CSV/PGM/text
//! files. Every subcommand is deterministic for a fixed `--seed`.

use crate::admm::{self, AdmmConfig};
use crate::basis::{BasisKind, ColumnLocalBasis, ObservedCoefficients};
use crate::cluster;
use crate::error::{Error, Result};
use crate::filter::{self, FilterConfig};
use crate::io;
use crate::mat::{skinny_svd, DenseMatrix};
use crate::metrics::{clustering_accuracy, subspace_distance, support_hamming, SupportSet};
use crate::rng::Rng;
use crate::synth::{self, SyntheticSpec};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "rmc", version, about = "Robust matrix completion experiment harness")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key=value config file; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for trial/grid parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic fixture: matrix, mask, and true support.
    Gen(GenArgs),
    /// Solve instances with the convex program and report recovery.
    Solve(SolveArgs),
    /// Run the l2,1 filtering accelerator, optionally racing full ADMM.
    Filter(FilterArgs),
    /// Sweep a (rank fraction, outlier fraction) phase diagram.
    Phase(PhaseArgs),
    /// Cluster a union-of-subspaces fixture end to end.
    Cluster(ClusterArgs),
    /// Wall-clock scaling benchmark of the filtering pipeline.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct ProblemArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    /// Column corruption probability.
    #[arg(long)]
    a: Option<f64>,
    /// Per-coefficient observation probability.
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    noise_variance: Option<f64>,
    /// identity | dct | shared-random | per-column-random
    #[arg(long)]
    basis: Option<BasisKind>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// "spike" writes the adversarial row-spike fixture instead.
    #[arg(long)]
    preset: Option<String>,
    /// Spike magnitude for the adversarial preset.
    #[arg(long)]
    spike: Option<f64>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Solve a fixture from files instead of generating one.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    mask: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FilterArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Target rank; omit (or 0) for automatic estimation.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    oversample: Option<f64>,
    /// Also run the full convex solve on the same fixture.
    #[arg(long)]
    compare_admm: bool,
}

#[derive(Args, Debug)]
struct PhaseArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Grid points per axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    frac_min: Option<f64>,
    #[arg(long)]
    frac_max: Option<f64>,
    /// Comma-separated observation probabilities, one sweep each.
    #[arg(long)]
    p0: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated subspace dimensions, e.g. "4,4,4".
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    p0: Option<f64>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated problem sizes.
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    p0: Option<f64>,
    /// Also time the full convex solve at each size.
    #[arg(long)]
    full: bool,
}

/// Flat key=value settings loaded from `--config`; CLI flags win.
struct Settings {
    map: HashMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            for (ln, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(Error::Parse {
                        path: path.display().to_string(),
                        msg: format!("line {}: expected key=value", ln + 1),
                    });
                };
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Settings { map })
    }

    /// Flag value if given, else config value, else default.
    fn get<T: FromStr + Clone>(&self, key: &str, flag: &Option<T>, default: T) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v.clone());
        }
        match self.map.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|_| Error::invalid(format!("config key `{key}`: bad value `{raw}`"))),
            None => Ok(default),
        }
    }
}

/// Parse argv and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version through this path too.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    let seed = settings.get("seed", &cli.seed, 0u64)?;
    let out = match &cli.out {
        Some(p) => p.clone(),
        None => PathBuf::from(settings.map.get("out").cloned().unwrap_or_else(|| ".".into())),
    };
    let threads = settings.get("threads", &cli.threads, 0usize)?;
    if threads > 0 {
        // Ignore the error if a global pool already exists (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match cli.command {
        Command::Gen(a) => cmd_gen(&a, &settings, seed, &out),
        Command::Solve(a) => cmd_solve(&a, &settings, seed, &out),
        Command::Filter(a) => cmd_filter(&a, &settings, seed, &out),
        Command::Phase(a) => cmd_phase(&a, &settings, seed, &out),
        Command::Cluster(a) => cmd_cluster(&a, &settings, seed, &out),
        Command::Bench(a) => cmd_bench(&a, &settings, seed, &out),
    }
}

fn problem_spec(args: &ProblemArgs, s: &Settings, seed: u64) -> Result<SyntheticSpec> {
    let n = s.get("n", &args.n, 100)?;
    let spec = SyntheticSpec {
        m: s.get("m", &args.m, n)?,
        n,
        r: s.get("r", &args.r, (n / 20).max(1))?,
        a: s.get("a", &args.a, 0.1)?,
        p0: s.get("p0", &args.p0, 0.8)?,
        noise_variance: s.get("noise_variance", &args.noise_variance, 1.0)?,
        basis: s.get("basis", &args.basis, BasisKind::Identity)?,
        seed,
    };
    spec.validate()?;
    Ok(spec)
}

/// Subspace distance between the spans of a recovered and a true
/// low-rank matrix, via their skinny SVDs.
fn recovered_distance(l_star: &DenseMatrix, l0: &DenseMatrix) -> Result<f64> {
    let f0 = skinny_svd(l0, 1e-8)?;
    let f1 = skinny_svd(l_star, 1e-6)?;
    let u0 = DenseMatrix::from_na(f0.u.columns(0, f0.rank()).into_owned());
    let u1 = DenseMatrix::from_na(f1.u.columns(0, f1.rank()).into_owned());
    match (u0, u1) {
        (Ok(a), Ok(b)) => subspace_distance(&a, &b),
        // One side is the zero matrix: distance is sqrt(r0 + r1).
        _ => Ok(((f0.rank() + f1.rank()) as f64).sqrt()),
    }
}

fn support_of_sparse(s: &DenseMatrix, observed: &ObservedCoefficients) -> SupportSet {
    admm::recovered_support(s, observed, admm::SUPPORT_REL_TOL)
}

fn cmd_gen(args: &GenArgs, s: &Settings, seed: u64, out: &Path) -> Result<()> {
    let preset = match &args.preset {
        Some(p) => Some(p.clone()),
        None => s.map.get("preset").cloned(),
    };
    let problem = match preset.as_deref() {
        Some("spike") => {
            let n = s.get("n", &args.problem.n, 1000)?;
            let r = s.get("r", &args.problem.r, n / 10)?;
            let a = s.get("a", &args.problem.a, 10.0 / n as f64)?;
            let spike = s.get("spike", &args.spike, 10.0)?;
            let mut rng = Rng::new(seed);
            synth::gen_adversarial_row_spike(n, r, a, spike, &mut rng)?
        }
        Some(other) => return Err(Error::invalid(format!("unknown preset `{other}`"))),
        None => synth::generate(&problem_spec(&args.problem, s, seed)?)?,
    };
    let m_full = DenseMatrix::from_na(problem.l0.as_na() + problem.s0.as_na())?;
    io::write_matrix(&out.join("matrix.txt"), &m_full)?;
    io::write_matrix(&out.join("lowrank.txt"), &problem.l0)?;
    let mask: Vec<(usize, usize)> = problem
        .observed
        .triples()
        .map(|(i, j, _)| (i, j))
        .collect();
    io::write_mask(&out.join("mask.txt"), &mask)?;
    let support: Vec<String> = problem
        .outlier_support
        .iter()
        .map(|j| j.to_string())
        .collect();
    io::write_atomic(&out.join("support.txt"), &(support.join("\n") + "\n"))?;
    println!(
        "wrote fixture: {}x{} rank {} outliers {} observed {}",
        problem.spec.m,
        problem.spec.n,
        problem.spec.r,
        problem.outlier_support.len(),
        problem.observed.len()
    );
    Ok(())
}

fn admm_config(args: &SolveArgs, s: &Settings) -> Result<AdmmConfig> {
    let mut config = AdmmConfig::default();
    let lambda = s.get("lambda", &args.lambda, 0.0)?;
    if lambda > 0.0 {
        config.lambda = Some(lambda);
    }
    config.tol = s.get("tol", &args.tol, config.tol)?;
    config.max_iter = s.get("max_iter", &args.max_iter, config.max_iter)?;
    Ok(config)
}

fn cmd_solve(args: &SolveArgs, s: &Settings, seed: u64, out: &Path) -> Result<()> {
    let config = admm_config(args, s)?;
    let mut rows: Vec<Vec<String>> = Vec::new();

    if let Some(matrix_path) = &args.matrix {
        let mask_path = args
            .mask
            .as_ref()
            .ok_or_else(|| Error::invalid("--matrix requires --mask"))?;
        let x = io::read_matrix(matrix_path)?;
        let mask = io::read_mask(mask_path)?;
        let basis = ColumnLocalBasis::identity(x.rows(), x.cols());
        let observed = ObservedCoefficients::from_matrix(&x, &basis, &mask)?;
        let t = Instant::now();
        let res = admm::solve(&observed, &basis, &config)?;
        let secs = t.elapsed().as_secs_f64();
        io::write_matrix(&out.join("l_star.txt"), &res.l_star)?;
        io::write_matrix(&out.join("s_star.txt"), &res.s_star)?;
        rows.push(vec![
            x.cols().to_string(),
            "0".into(),
            String::new(),
            String::new(),
            res.iterations.to_string(),
            format!("{secs:.3}"),
        ]);
    } else {
        let trials = s.get("trials", &args.trials, 1usize)?;
        for t_idx in 0..trials {
            let spec = problem_spec(&args.problem, s, seed.wrapping_add(t_idx as u64))?;
            let problem = synth::generate(&spec)?;
            let t = Instant::now();
            let res = admm::solve(&problem.observed, &problem.basis, &config)?;
            let secs = t.elapsed().as_secs_f64();
            let dist = recovered_distance(&res.l_star, &problem.l0)?;
            let found = support_of_sparse(&res.s_star, &problem.observed);
            let truth = SupportSet::new(problem.outlier_support.iter().copied());
            let hamming = support_hamming(&found, &truth, spec.n)?;
            io::write_matrix(&out.join(format!("l_star_{t_idx}.txt")), &res.l_star)?;
            io::write_matrix(&out.join(format!("s_star_{t_idx}.txt")), &res.s_star)?;
            rows.push(vec![
                spec.n.to_string(),
                t_idx.to_string(),
                format!("{dist:.6e}"),
                hamming.to_string(),
                res.iterations.to_string(),
                format!("{secs:.3}"),
            ]);
        }
    }
    io::write_csv(
        &out.join("solve.csv"),
        &["n", "trial", "dist", "hamming", "iterations", "seconds"],
        &rows,
    )?;
    for row in &rows {
        println!(
            "n={} trial={} dist={} hamming={} iters={} secs={}",
            row[0], row[1], row[2], row[3], row[4], row[5]
        );
    }
    Ok(())
}

fn cmd_filter(args: &FilterArgs, s: &Settings, seed: u64, out: &Path) -> Result<()> {
    let spec = problem_spec(&args.problem, s, seed)?;
    let problem = synth::generate(&spec)?;
    let rank = s.get("rank", &args.rank, 0usize)?;
    let mut config = FilterConfig {
        rank_estimate: if rank == 0 { None } else { Some(rank) },
        seed: seed ^ 0xF1172,
        ..FilterConfig::default()
    };
    config.oversample_const = s.get("oversample", &args.oversample, config.oversample_const)?;

    let truth = SupportSet::new(problem.outlier_support.iter().copied());
    let t = Instant::now();
    let fr = filter::run(&problem.observed, &problem.basis, &config)?;
    let filter_secs = t.elapsed().as_secs_f64();
    let f_found = SupportSet::new(
        fr.outlier_flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(j, _)| j),
    );
    let f_ham = support_hamming(&f_found, &truth, spec.n)?;
    let f_dist = recovered_distance(&fr.completed, &problem.l0)?;

    let mut rows = vec![vec![
        "filter".to_string(),
        spec.n.to_string(),
        fr.rank_used.to_string(),
        format!("{f_dist:.6e}"),
        f_ham.to_string(),
        format!("{filter_secs:.3}"),
    ]];

    let compare = args.compare_admm || s.map.get("compare_admm").is_some_and(|v| v == "true");
    if compare {
        let t = Instant::now();
        let res = admm::solve(&problem.observed, &problem.basis, &AdmmConfig::default())?;
        let secs = t.elapsed().as_secs_f64();
        let found = support_of_sparse(&res.s_star, &problem.observed);
        let ham = support_hamming(&found, &truth, spec.n)?;
        let dist = recovered_distance(&res.l_star, &problem.l0)?;
        rows.push(vec![
            "admm".to_string(),
            spec.n.to_string(),
            spec.r.to_string(),
            format!("{dist:.6e}"),
            ham.to_string(),
            format!("{secs:.3}"),
        ]);
        println!("speedup: {:.2}x", secs / filter_secs.max(1e-9));
    }
    io::write_csv(
        &out.join("filter.csv"),
        &["method", "n", "rank", "dist", "hamming", "seconds"],
        &rows,
    )?;

    let col_rows: Vec<Vec<String>> = (0..spec.n)
        .map(|j| {
            vec![
                j.to_string(),
                fr.residuals[j].map_or(String::new(), |r| format!("{r:.6e}")),
                (fr.outlier_flags[j] as u8).to_string(),
            ]
        })
        .collect();
    io::write_csv(
        &out.join("columns.csv"),
        &["column", "residual", "flag"],
        &col_rows,
    )?;
    println!("filter: hamming={f_ham} dist={f_dist:.2e} secs={filter_secs:.2}");
    Ok(())
}

/// One phase-diagram success count: how many of `trials` seeded runs
/// exactly recover (hamming 0, dist below threshold).
fn phase_cell(n: usize, r: usize, a: f64, p0: f64, trials: usize, seed: u64) -> usize {
    (0..trials)
        .filter(|&t| {
            let spec = SyntheticSpec {
                m: n,
                n,
                r,
                a,
                p0,
                noise_variance: 1.0,
                basis: BasisKind::Identity,
                seed: seed
                    .wrapping_mul(0x100000001B3)
                    .wrapping_add((t as u64) << 32)
                    .wrapping_add((r as u64) << 8)
                    .wrapping_add((a * 1e6) as u64),
            };
            let Ok(problem) = synth::generate(&spec) else {
                return false;
            };
            let Ok(res) = admm::solve(&problem.observed, &problem.basis, &AdmmConfig::default())
            else {
                return false;
            };
            let found = support_of_sparse(&res.s_star, &problem.observed);
            let truth = SupportSet::new(problem.outlier_support.iter().copied());
            let Ok(ham) = support_hamming(&found, &truth, n) else {
                return false;
            };
            let Ok(dist) = recovered_distance(&res.l_star, &problem.l0) else {
                return false;
            };
            ham == 0 && dist < 1e-6
        })
        .count()
}

/// Run one full sweep; returns `grid x grid` success counts with rank
/// fraction increasing down the rows and outlier fraction across the
/// columns.
pub fn phase_grid(
    n: usize,
    grid: usize,
    frac_min: f64,
    frac_max: f64,
    p0: f64,
    trials: usize,
    seed: u64,
) -> Vec<Vec<usize>> {
    let fracs: Vec<f64> = (0..grid)
        .map(|i| frac_min + (frac_max - frac_min) * i as f64 / (grid - 1).max(1) as f64)
        .collect();
    let cells: Vec<(usize, usize)> = (0..grid)
        .flat_map(|i| (0..grid).map(move |j| (i, j)))
        .collect();
    let counts: Vec<((usize, usize), usize)> = cells
        .into_par_iter()
        .map(|(i, j)| {
            let r = ((fracs[i] * n as f64).round() as usize).max(1);
            let a = fracs[j];
            ((i, j), phase_cell(n, r, a, p0, trials, seed))
        })
        .collect();
    let mut out = vec![vec![0usize; grid]; grid];
    for ((i, j), c) in counts {
        out[i][j] = c;
    }
    out
}

fn cmd_phase(args: &PhaseArgs, s: &Settings, seed: u64, out: &Path) -> Result<()> {
    let n = s.get("n", &args.n, 150usize)?;
    let grid = s.get("grid", &args.grid, 8usize)?;
    let frac_min = s.get("frac_min", &args.frac_min, 0.02)?;
    let frac_max = s.get("frac_max", &args.frac_max, 0.4)?;
    let trials = s.get("trials", &args.trials, 5usize)?;
    let p0_list = s.get("p0", &args.p0, "1.0,0.5".to_string())?;
    if grid < 2 {
        return Err(Error::invalid("grid must have at least 2 points per axis"));
    }
    for tok in p0_list.split(',') {
        let p0: f64 = tok
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad p0 value `{tok}`")))?;
        let counts = phase_grid(n, grid, frac_min, frac_max, p0, trials, seed);
        let tag = format!("{p0}").replace('.', "_");

        let mut rows = Vec::new();
        for (i, row) in counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                let rf = frac_min + (frac_max - frac_min) * i as f64 / (grid - 1) as f64;
                let af = frac_min + (frac_max - frac_min) * j as f64 / (grid - 1) as f64;
                rows.push(vec![
                    format!("{rf:.4}"),
                    format!("{af:.4}"),
                    c.to_string(),
                    trials.to_string(),
                ]);
            }
        }
        io::write_csv(
            &out.join(format!("phase_p0_{tag}.csv")),
            &["rank_fraction", "outlier_fraction", "successes", "trials"],
            &rows,
        )?;
        let image: Vec<Vec<f64>> = counts
            .iter()
            .map(|row| row.iter().map(|&c| c as f64 / trials as f64).collect())
            .collect();
        io::write_pgm(&out.join(format!("phase_p0_{tag}.pgm")), &image)?;
        println!(
            "p0={p0}: corner low/low {}/{trials}, high/high {}/{trials}",
            counts[0][0],
            counts[grid - 1][grid - 1]
        );
    }
    Ok(())
}

fn cmd_cluster(args: &ClusterArgs, s: &Settings, seed: u64, out: &Path) -> Result<()> {
    let m = s.get("m", &args.m, 60usize)?;
    let dims_raw = s.get("dims", &args.dims, "4,4,4".to_string())?;
    let dims: Vec<usize> = dims_raw
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad dimension `{t}`")))
        })
        .collect::<Result<_>>()?;
    let points = s.get("points", &args.points, 60usize)?;
    let a = s.get("a", &args.a, 0.05)?;
    let p0 = s.get("p0", &args.p0, 0.95)?;

    let mut rng = Rng::new(seed);
    let (problem, truth) = synth::gen_union_of_subspaces(m, &dims, points, a, p0, &mut rng)?;
    let labels = cluster::cluster_with_missing(
        &problem.observed,
        &problem.basis,
        dims.len(),
        &AdmmConfig::default(),
        None,
        seed,
    )?;
    let acc = clustering_accuracy(&labels, &truth)?;

    let rows: Vec<Vec<String>> = labels
        .iter()
        .zip(&truth)
        .enumerate()
        .map(|(j, (&l, &t))| vec![j.to_string(), l.to_string(), t.to_string()])
        .collect();
    io::write_csv(&out.join("labels.csv"), &["column", "label", "truth"], &rows)?;
    io::write_csv(
        &out.join("cluster.csv"),
        &["clusters", "columns", "accuracy"],
        &[vec![
            dims.len().to_string(),
            truth.len().to_string(),
            format!("{acc:.4}"),
        ]],
    )?;
    println!("clustering accuracy: {acc:.4}");
    Ok(())
}

fn cmd_bench(args: &BenchArgs, s: &Settings, seed: u64, out: &Path) -> Result<()> {
    let sizes_raw = s.get("sizes", &args.sizes, "500,1000,2000".to_string())?;
    let sizes: Vec<usize> = sizes_raw
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad size `{t}`")))
        })
        .collect::<Result<_>>()?;
    let r = s.get("r", &args.r, 5usize)?;
    let a = s.get("a", &args.a, 0.1)?;
    let p0 = s.get("p0", &args.p0, 0.95)?;
    let full = args.full || s.map.get("full").is_some_and(|v| v == "true");

    let mut rows = Vec::new();
    for &n in &sizes {
        let spec = SyntheticSpec {
            m: n,
            n,
            r,
            a,
            p0,
            noise_variance: 1.0,
            basis: BasisKind::Identity,
            seed: seed.wrapping_add(n as u64),
        };
        let problem = synth::generate(&spec)?;
        let config = FilterConfig {
            rank_estimate: Some(r),
            seed,
            ..FilterConfig::default()
        };
        let t = Instant::now();
        let fr = filter::run(&problem.observed, &problem.basis, &config)?;
        let filter_secs = t.elapsed().as_secs_f64();
        let truth = SupportSet::new(problem.outlier_support.iter().copied());
        let found = SupportSet::new(
            fr.outlier_flags
                .iter()
                .enumerate()
                .filter(|(_, &f)| f)
                .map(|(j, _)| j),
        );
        let ham = support_hamming(&found, &truth, n)?;
        let admm_secs = if full {
            let t = Instant::now();
            let _ = admm::solve(&problem.observed, &problem.basis, &AdmmConfig::default())?;
            format!("{:.3}", t.elapsed().as_secs_f64())
        } else {
            String::new()
        };
        println!("n={n}: filter {filter_secs:.2}s hamming {ham}");
        rows.push(vec![
            n.to_string(),
            ham.to_string(),
            format!("{filter_secs:.3}"),
            admm_secs,
        ]);
    }
    io::write_csv(
        &out.join("bench.csv"),
        &["n", "hamming", "filter_seconds", "admm_seconds"],
        &rows,
    )?;
    Ok(())
}
