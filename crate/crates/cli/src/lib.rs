//! Command-line driver: parses arguments, runs one experiment and writes
//! its table as CSV.
//!
//! Exit codes: 0 on success, 1 on invalid arguments or any runtime error,
//! 2 when a `check` suite fails.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use planar_walk::beurling::{
    default_slit_dt, fit_exponent, mc_bm_slit, mc_walk_beurling, slit_disk_exit_exact,
    DiscreteObstacle,
};
use planar_walk::coupling::{coupling_sup, embed, tail_curve};
use planar_walk::dirichlet::{
    oracle_hitting_mc, oracle_linear_solve, solve, RectangleSpec, STRIP_CHECK_COLUMNS,
};
use planar_walk::exactdist::{lclt_error_profile, TailConvention};
use planar_walk::experiments::{
    check_rw_tails, run_suite, SuiteConfig, BASE_SAMPLES, DEFAULT_SEED,
};
use planar_walk::paths::{compose, decompose, gen_walk_2d, Dim, DumpCsv, LatticePath};
use planar_walk::rng::{make_stream, par_replicates, StreamKey};
use planar_walk::table::{Cell, Table};

/// Version tag written into every CSV header.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "planar-walk",
    version,
    about = "Exact laws, Dirichlet solvers, Beurling estimates and couplings for planar random walk",
    arg_required_else_help = true
)]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Monte Carlo sample count (replicates for `coupling`).
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads. Changes scheduling only, never results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// `key = value` file mirroring the long flags; flags on the command
    /// line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Discrete Dirichlet problem on a rectangle or half-infinite strip.
    Dirichlet(DirichletArgs),
    /// Local CLT relative-error profile.
    Lclt(LcltArgs),
    /// Exact walk tail probabilities against the Gaussian bound.
    Tails(TailsArgs),
    /// Slit-disk and discrete Beurling escape probabilities.
    Beurling(BeurlingArgs),
    /// Skorokhod embedding coupling errors.
    Coupling(CouplingArgs),
    /// Diagonal decomposition of a random planar walk.
    Decompose(DecomposeArgs),
    /// Runs a named verification suite.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Oracle {
    Linear,
    Mc,
    Both,
}

#[derive(Args, Debug)]
struct DirichletArgs {
    /// Rectangle width; omit for the half-infinite strip.
    #[arg(long)]
    l: Option<usize>,
    /// Height.
    #[arg(long)]
    n: usize,
    /// `one` for constant data, otherwise a file of n-1 values.
    #[arg(long, default_value = "one")]
    phi: String,
    /// Restrict output to one interior point `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    point: Option<[i64; 2]>,
    #[arg(long, value_enum, default_value_t = Oracle::Linear)]
    oracle: Oracle,
    /// Far column of the truncated strip solve (default max(4n, 40)).
    #[arg(long)]
    truncation: Option<usize>,
}

#[derive(Args, Debug)]
struct LcltArgs {
    /// Comma-separated half-lengths `n` (the walk has 2n steps).
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    /// Largest `k`; defaults to floor(n^exponent).
    #[arg(long)]
    k_max: Option<u64>,
    #[arg(long, default_value_t = 0.6)]
    exponent: f64,
    /// Truncation order N.
    #[arg(long, default_value_t = 2)]
    order: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Convention {
    /// `2n` steps, threshold `r sqrt(n)`.
    Doubled,
    /// `n` steps, threshold `r sqrt(n)`.
    Same,
}

#[derive(Args, Debug)]
struct TailsArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    dim: u32,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    r: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Convention::Doubled)]
    convention: Convention,
    /// Allowed relative growth of the constant from half grid to full grid.
    #[arg(long, default_value_t = 0.2)]
    tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Bm,
    Walk,
}

#[derive(Args, Debug)]
struct BeurlingArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Slit distances (exact and bm modes).
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    /// Escape radii (walk mode).
    #[arg(long = "R", value_delimiter = ',')]
    radius: Vec<f64>,
    /// `halfline` or a file of lattice points `x y`.
    #[arg(long, default_value = "halfline")]
    obstacle: String,
    /// Brownian time step (default 1e-5 eps).
    #[arg(long)]
    dt: Option<f64>,
    /// Walk start `x,y`.
    #[arg(long, value_parser = parse_point, default_value = "-1,0", allow_hyphen_values = true)]
    start: [i64; 2],
}

#[derive(Args, Debug)]
struct CouplingArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    dim: u32,
    /// Walk horizon.
    #[arg(long)]
    n: usize,
    /// Brownian grid step.
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    /// When given, emit `P(sup >= n^{1/4} g)` per `g` instead of samples.
    #[arg(long, value_delimiter = ',')]
    g_grid: Vec<f64>,
    /// Write the Brownian path and walk of replicate 0 to this file.
    #[arg(long)]
    dump_paths: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    /// Walk length.
    #[arg(long)]
    n: usize,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Statement id, for example 6.2.
    #[arg(long)]
    lemma: String,
}

fn parse_point(s: &str) -> Result<[i64; 2], String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}"));
    Ok([p(a)?, p(b)?])
}

/// Failure of one run, mapped to an exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(String),
}

impl From<planar_walk::Error> for Failure {
    fn from(e: planar_walk::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

/// A finished run: the table, its header comments and whether a suite
/// passed.
struct Output {
    meta: Vec<String>,
    table: Table,
    pass: bool,
}

/// Writes the header comments, the column row and the data rows.
pub fn emit_csv<W: Write>(table: &Table, meta: &[String], out: &mut W) -> io::Result<()> {
    for m in meta {
        writeln!(out, "# {m}")?;
    }
    writeln!(out, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(csv_cell).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        other => other.to_string(),
    }
}

/// Reads `key = value` lines; `#` starts a comment.
fn read_config(path: &Path) -> Result<Vec<(String, String)>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Failure::Usage(format!("config line {}: expected key = value", i + 1))
        })?;
        pairs.push((
            k.trim().trim_start_matches("--").to_string(),
            v.trim().to_string(),
        ));
    }
    Ok(pairs)
}

fn has_flag(argv: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    argv.iter()
        .any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
}

/// Appends config entries whose flags are absent from `argv`.
fn merge_config(argv: Vec<String>) -> Result<Vec<String>, Failure> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let mut merged = argv.clone();
    for (k, v) in read_config(Path::new(&path))? {
        if k == "config" || has_flag(&argv, &k) {
            continue;
        }
        merged.push(format!("--{k}"));
        merged.push(v);
    }
    Ok(merged)
}

/// Parses `argv` (without the program name), runs the command and writes
/// CSV to `--out` or `stdout`. Diagnostics go to `stderr`.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let argv: Vec<String> = argv
        .into_iter()
        .map(|s| s.into().to_string_lossy().into_owned())
        .collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(Failure::Usage(m) | Failure::Run(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(std::iter::once("planar-walk".to_string()).chain(argv)) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match execute_with_threads(&cli) {
        Ok(output) => {
            let mut buf = Vec::new();
            emit_csv(&output.table, &output.meta, &mut buf).expect("write to memory");
            let written = match &cli.out {
                Some(p) => {
                    fs::write(p, &buf).map_err(|e| format!("cannot write {}: {e}", p.display()))
                }
                None => stdout.write_all(&buf).map_err(|e| e.to_string()),
            };
            if let Err(m) = written {
                let _ = writeln!(stderr, "error: {m}");
                return 1;
            }
            if output.pass {
                0
            } else {
                let _ = writeln!(stderr, "suite failed");
                2
            }
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(
                stderr,
                "error: {m}\n\n{}",
                Cli::try_parse_from(["planar-walk", "--help"])
                    .err()
                    .map(|e| e.render().to_string())
                    .unwrap_or_default()
            );
            1
        }
        Err(Failure::Run(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            1
        }
    }
}

fn execute_with_threads(cli: &Cli) -> Result<Output, Failure> {
    match cli.threads {
        None => execute(cli),
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Failure::Run(e.to_string()))?;
            pool.install(|| execute(cli))
        }
    }
}

fn header(cli: &Cli, command: &str, params: String) -> Vec<String> {
    let samples = cli
        .samples
        .map(|s| s.to_string())
        .unwrap_or_else(|| "default".into());
    vec![
        format!(
            "planar-walk {} format={FORMAT_VERSION}",
            env!("CARGO_PKG_VERSION")
        ),
        format!("command={command} seed={} samples={samples}", cli.seed),
        format!("params: {params}"),
    ]
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn dim_of(d: u32) -> Dim {
    if d == 1 {
        Dim::One
    } else {
        Dim::Two
    }
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    match &cli.cmd {
        Command::Dirichlet(a) => dirichlet(cli, a),
        Command::Lclt(a) => lclt(cli, a),
        Command::Tails(a) => tails(cli, a),
        Command::Beurling(a) => beurling(cli, a),
        Command::Coupling(a) => coupling(cli, a),
        Command::Decompose(a) => decompose_cmd(cli, a),
        Command::Check(a) => check(cli, a),
    }
}

fn read_phi(spec: &str, n: usize) -> Result<Vec<f64>, Failure> {
    if spec == "one" {
        return Ok(vec![1.0; n.saturating_sub(1)]);
    }
    let text = fs::read_to_string(spec)
        .map_err(|e| Failure::Usage(format!("cannot read boundary data {spec}: {e}")))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Failure::Usage(format!("boundary value {t:?}: {e}")))
        })
        .collect()
}

fn dirichlet(cli: &Cli, a: &DirichletArgs) -> Result<Output, Failure> {
    let phi = read_phi(&a.phi, a.n)?;
    let spec = match a.l {
        Some(l) => RectangleSpec::rectangle(l, a.n, phi)?,
        None => RectangleSpec::strip(a.n, phi)?,
    };
    let sol = solve(&spec)?;
    let truncation = a.truncation.unwrap_or((4 * a.n).max(40));
    let x_last = match a.l {
        Some(l) => l - 1,
        None => STRIP_CHECK_COLUMNS.min(truncation / 2).max(1),
    };
    let points: Vec<[i64; 2]> = match a.point {
        Some(p) => {
            if !spec.is_interior(p[0], p[1]) || (a.l.is_none() && p[0] as usize > truncation / 2) {
                return Err(Failure::Usage(format!(
                    "point {},{} is not an interior point of the output range",
                    p[0], p[1]
                )));
            }
            vec![p]
        }
        None => (1..=x_last as i64)
            .flat_map(|x| (1..a.n as i64).map(move |y| [x, y]))
            .collect(),
    };
    let need_linear = a.oracle != Oracle::Mc;
    let need_mc = a.oracle != Oracle::Linear;
    let linear = if need_linear {
        Some(oracle_linear_solve(
            &spec,
            a.l.is_none().then_some(truncation),
        )?)
    } else {
        None
    };
    let samples = cli.samples.unwrap_or(10_000);
    let key = StreamKey::new(cli.seed, 0);
    let mc = if need_mc {
        points
            .iter()
            .enumerate()
            .map(|(i, &p)| oracle_hitting_mc(&spec, p, key.block(i as u32), samples))
            .collect::<planar_walk::Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let mut values = Vec::with_capacity(points.len());
    for (i, &[x, y]) in points.iter().enumerate() {
        let s = sol.value(x as usize, y as usize)?;
        let o = match &linear {
            Some(g) => g.get(x as usize, y as usize),
            None => mc[i].estimate.mean,
        };
        values.push((x, y, s, o, (s - o).abs()));
    }
    let max_diff = values.iter().map(|v| v.4).fold(0.0f64, f64::max);
    let mut cols = vec!["x", "y", "spectral", "oracle", "diff", "max_abs_diff"];
    match a.oracle {
        Oracle::Linear => {}
        Oracle::Mc => cols.extend(["oracle_ci_lo", "oracle_ci_hi"]),
        Oracle::Both => cols.extend(["mc", "mc_ci_lo", "mc_ci_hi"]),
    }
    let mut table = Table::new(&cols);
    for (i, &(x, y, s, o, d)) in values.iter().enumerate() {
        let mut row: Vec<Cell> = planar_walk::row![x, y, s, o, d, max_diff];
        match a.oracle {
            Oracle::Linear => {}
            Oracle::Mc => row.extend(planar_walk::row![
                mc[i].estimate.ci_lo,
                mc[i].estimate.ci_hi
            ]),
            Oracle::Both => {
                let e = mc[i].estimate;
                row.extend(planar_walk::row![e.mean, e.ci_lo, e.ci_hi]);
            }
        }
        table.push(row);
    }
    let region = match a.l {
        Some(l) => format!("rectangle l={l}"),
        None => format!("strip truncation={truncation}"),
    };
    let mut meta = header(
        cli,
        "dirichlet",
        format!("{region} n={} phi={} oracle={:?}", a.n, a.phi, a.oracle).to_lowercase(),
    );
    meta.push(format!(
        "max_abs_diff={}",
        planar_walk::table::format_real(max_diff)
    ));
    if need_mc {
        let capped: u64 = mc.iter().map(|m| m.capped).sum();
        meta.push(format!("mc_samples_per_point={samples} capped={capped}"));
    }
    Ok(Output {
        meta,
        table,
        pass: true,
    })
}

fn lclt(cli: &Cli, a: &LcltArgs) -> Result<Output, Failure> {
    let mut table = Table::new(&["n", "k", "exact", "approx", "rel_error"]);
    for &n in &a.n {
        let k_max = a
            .k_max
            .unwrap_or_else(|| (n as f64).powf(a.exponent).floor() as u64);
        let prof = lclt_error_profile(n, k_max, a.order)?;
        for r in &prof.rows {
            table.push(planar_walk::row![r.n, r.k, r.exact, r.approx, r.rel_error]);
        }
    }
    let k = a
        .k_max
        .map(|k| k.to_string())
        .unwrap_or_else(|| format!("n^{}", a.exponent));
    Ok(Output {
        meta: header(
            cli,
            "lclt",
            format!("n={} k_max={k} order={}", join(&a.n), a.order),
        ),
        table,
        pass: true,
    })
}

fn tails(cli: &Cli, a: &TailsArgs) -> Result<Output, Failure> {
    let conv = match a.convention {
        Convention::Doubled => TailConvention::Doubled,
        Convention::Same => TailConvention::Same,
    };
    let c = check_rw_tails(dim_of(a.dim), conv, &a.n, &a.r, a.tolerance)?;
    let mut table = Table::new(&["n", "r", "exact_tail", "bound", "ratio"]);
    for r in &c.rows {
        table.push(planar_walk::row![r.n, r.param, r.lhs, r.rhs, r.ratio]);
    }
    let mut meta = header(
        cli,
        "tails",
        format!(
            "dim={} n={} r={} convention={:?} tolerance={}",
            a.dim,
            join(&a.n),
            join(&a.r),
            a.convention,
            a.tolerance
        )
        .to_lowercase(),
    );
    meta.push(format!(
        "half_grid_constant={} full_grid_constant={} within_tolerance={}",
        planar_walk::table::format_real(c.constant),
        planar_walk::table::format_real(c.full_constant),
        c.pass
    ));
    Ok(Output {
        meta,
        table,
        pass: true,
    })
}

fn beurling(cli: &Cli, a: &BeurlingArgs) -> Result<Output, Failure> {
    let samples = cli.samples.unwrap_or(BASE_SAMPLES);
    let key = StreamKey::new(cli.seed, 0);
    let mut table = Table::new(&["ratio", "prob", "ci_lo", "ci_hi"]);
    let mut pairs = Vec::new();
    let params;
    match a.mode {
        Mode::Exact | Mode::Bm => {
            if a.eps.is_empty() {
                return Err(Failure::Usage("--eps is required in this mode".into()));
            }
            for (i, &eps) in a.eps.iter().enumerate() {
                if a.mode == Mode::Exact {
                    let p = slit_disk_exit_exact(eps)?;
                    table.push(planar_walk::row![eps, p, p, p]);
                    pairs.push((eps, p));
                } else {
                    let dt = a.dt.unwrap_or_else(|| default_slit_dt(eps));
                    let r = mc_bm_slit(eps, dt, samples, key.block(i as u32))?;
                    let e = r.estimate;
                    table.push(planar_walk::row![eps, e.p_hat, e.ci_lo, e.ci_hi]);
                    pairs.push((eps, e.p_hat));
                }
            }
            let dt = match (a.mode, a.dt) {
                (Mode::Exact, _) => String::new(),
                (_, Some(dt)) => format!(" dt={dt}"),
                (_, None) => " dt=1e-5*eps".into(),
            };
            params = format!("mode={:?} eps={}{dt}", a.mode, join(&a.eps)).to_lowercase();
        }
        Mode::Walk => {
            if a.radius.is_empty() {
                return Err(Failure::Usage("--R is required in walk mode".into()));
            }
            let dist = (a.start[0] as f64).hypot(a.start[1] as f64);
            for (i, &r) in a.radius.iter().enumerate() {
                let obs = if a.obstacle == "halfline" {
                    DiscreteObstacle::half_line(r)?
                } else {
                    DiscreteObstacle::from_file(Path::new(&a.obstacle), r)?
                };
                let res = mc_walk_beurling(a.start, &obs, samples, key.block(i as u32))?;
                let e = res.estimate;
                table.push(planar_walk::row![dist / r, e.p_hat, e.ci_lo, e.ci_hi]);
                pairs.push((dist / r, e.p_hat));
            }
            params = format!(
                "mode=walk R={} obstacle={} start={},{}",
                join(&a.radius),
                a.obstacle,
                a.start[0],
                a.start[1]
            );
        }
    }
    let mut meta = header(cli, "beurling", params);
    if pairs.len() >= 3 {
        if let Ok(f) = fit_exponent(&pairs) {
            meta.push(format!(
                "exponent={} stderr={} used={}",
                planar_walk::table::format_real(f.slope),
                planar_walk::table::format_real(f.stderr),
                f.used
            ));
        }
    }
    Ok(Output {
        meta,
        table,
        pass: true,
    })
}

fn coupling(cli: &Cli, a: &CouplingArgs) -> Result<Output, Failure> {
    let reps = cli.samples.unwrap_or(200);
    let dim = dim_of(a.dim);
    let key = StreamKey::new(cli.seed, 0);
    let stats = par_replicates(key, reps, |gen, _| {
        embed(gen, a.n, a.dt, dim).and_then(|rec| coupling_sup(&rec, a.n))
    })
    .into_iter()
    .collect::<planar_walk::Result<Vec<_>>>()?;
    if let Some(path) = &a.dump_paths {
        let mut gen = make_stream(key.offset(0));
        let rec = embed(&mut gen, a.n, a.dt, dim)?;
        let mut buf = Vec::new();
        writeln!(buf, "# brownian path")?;
        rec.wiener.dump_csv(&mut buf)?;
        writeln!(buf, "# embedded walk")?;
        match &rec.walk {
            LatticePath::One(w) => w.dump_csv(&mut buf)?,
            LatticePath::Two(w) => w.dump_csv(&mut buf)?,
        }
        fs::write(path, buf)
            .map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display())))?;
    }
    let params = format!("dim={} n={} dt={}", a.dim, a.n, a.dt);
    let mut meta = header(cli, "coupling", params);
    meta.push(format!("dt={}", a.dt));
    let table = if a.g_grid.is_empty() {
        let mut t = Table::new(&["n", "sample_id", "sup_distance", "max_time_dev"]);
        for (i, s) in stats.iter().enumerate() {
            t.push(planar_walk::row![
                s.n,
                i,
                s.sup_distance,
                s.max_time_deviation
            ]);
        }
        t
    } else {
        let curve = tail_curve(&stats, &a.g_grid)?;
        let mut t = Table::new(&["n", "g", "threshold", "prob", "ci_lo", "ci_hi"]);
        for p in &curve.points {
            let e = p.estimate;
            t.push(planar_walk::row![
                curve.n,
                p.g,
                p.threshold,
                e.p_hat,
                e.ci_lo,
                e.ci_hi
            ]);
        }
        if let (Some(rate), Some(r2)) = (curve.decay_rate, curve.r2) {
            meta.push(format!(
                "log_decay_rate={} r2={}",
                planar_walk::table::format_real(rate),
                planar_walk::table::format_real(r2)
            ));
        }
        t
    };
    Ok(Output {
        meta,
        table,
        pass: true,
    })
}

fn decompose_cmd(cli: &Cli, a: &DecomposeArgs) -> Result<Output, Failure> {
    let mut gen = make_stream(StreamKey::new(cli.seed, 0));
    let walk = gen_walk_2d(&mut gen, a.n);
    let pair = decompose(&walk);
    let back = compose(&pair)?;
    let mut table = Table::new(&["k", "x", "y", "diag1", "diag2"]);
    for (k, (p, (u, v))) in walk
        .positions()
        .iter()
        .zip(pair.comp1.iter().zip(&pair.comp2))
        .enumerate()
    {
        table.push(planar_walk::row![k, p[0], p[1], *u, *v]);
    }
    let mut meta = header(cli, "decompose", format!("n={}", a.n));
    meta.push(format!("roundtrip={}", back == walk));
    Ok(Output {
        meta,
        table,
        pass: true,
    })
}

fn check(cli: &Cli, a: &CheckArgs) -> Result<Output, Failure> {
    let cfg = SuiteConfig {
        seed: cli.seed,
        samples: cli.samples,
    };
    let rep = run_suite(&a.lemma, &cfg).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut meta = header(cli, "check", format!("lemma={}", a.lemma));
    meta.push(format!("seed_used={} retried={}", rep.seed, rep.retried));
    for c in &rep.checks {
        let status = match (c.pass, c.gating) {
            (true, _) => "pass",
            (false, true) => "FAIL",
            (false, false) => "note",
        };
        meta.push(format!("check {} {status}: {}", c.name, c.detail));
    }
    meta.push(format!("suite {}", if rep.pass { "pass" } else { "FAIL" }));
    Ok(Output {
        meta,
        table: rep.table,
        pass: rep.pass,
    })
}
