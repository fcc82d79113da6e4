//! Benchmark harness CLI: noise injection, denoising runs, parameter
//! sweeps, Sinkhorn demonstrations, and icosphere generation.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors
//! (unreadable or malformed inputs, numeric failures).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use meshdn::bench::{
    report_to_csv, report_to_json, run_sweep, time_method, MethodGrid, SweepReport,
};
use meshdn::denoise::{
    filter_denoise, heat_denoise, FilterParams, HeatParams, SobolevParams, SobolevSolver,
};
use meshdn::graph::mesh_operators;
use meshdn::icosphere::icosphere;
use meshdn::io::{read_mesh_file, write_mesh_file};
use meshdn::mesh::{vertex_normals, Mesh};
use meshdn::noise::{add_normal_noise, snr, NoiseParams};
use meshdn::transport::{
    gibbs_kernel, marginal_residuals, monge_bruteforce, sinkhorn_log, transport_cost, CostMatrix,
    Histogram, Matrix,
};

#[derive(Parser)]
#[command(name = "meshdn", version, about = "Graph-based mesh denoising benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Displace vertices along their normals with seeded Gaussian noise.
    Noise(NoiseArgs),
    /// Denoise a mesh with one method and fixed parameters.
    Denoise(DenoiseArgs),
    /// Sweep method parameters, reporting SNR and timing per configuration.
    Sweep(SweepArgs),
    /// Run Sinkhorn on a random transport instance and report convergence.
    SinkhornDemo(SinkhornDemoArgs),
    /// Generate a unit icosphere mesh.
    Icosphere(IcosphereArgs),
}

#[derive(Args)]
struct NoiseArgs {
    /// Input mesh (.off or .obj).
    #[arg(long)]
    input: PathBuf,
    /// Noise amplitude in model units.
    #[arg(long)]
    rho: f64,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output mesh path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DenoiseArgs {
    /// Noisy input mesh.
    #[arg(long)]
    input: PathBuf,
    /// Original mesh used as the SNR reference.
    #[arg(long)]
    reference: PathBuf,
    /// Denoising method: filter, heat, or sobolev.
    #[arg(long)]
    method: String,
    /// Iteration count (filter and heat).
    #[arg(long)]
    iters: Option<String>,
    /// Heat time step.
    #[arg(long)]
    tau: Option<String>,
    /// Sobolev regularization weight.
    #[arg(long)]
    mu: Option<String>,
    /// Timing repeats (median is reported).
    #[arg(long, default_value_t = 11)]
    repeats: usize,
    /// Output mesh path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Original (clean) mesh; noise is injected before sweeping.
    #[arg(long)]
    input: PathBuf,
    /// Noise amplitude in model units.
    #[arg(long)]
    rho: f64,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Methods to sweep (comma separated); defaults to all three.
    #[arg(long, default_value = "filter,heat,sobolev")]
    method: String,
    /// Iteration grid for filter and heat, e.g. `0..60` or `0,10,20`.
    #[arg(long, default_value = "0..60")]
    iters: String,
    /// Tau grid for heat.
    #[arg(long, default_value = "0.25,0.5,0.75,1")]
    tau: String,
    /// Mu grid for sobolev.
    #[arg(long, default_value = "0.25,0.5,1,2,4,8,16,32,64")]
    mu: String,
    /// Timing repeats per configuration (median is reported).
    #[arg(long, default_value_t = 11)]
    repeats: usize,
    /// Report output path.
    #[arg(long)]
    out: PathBuf,
    /// Report format.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
}

#[derive(Args)]
struct SinkhornDemoArgs {
    /// Number of source and target points.
    #[arg(long, default_value_t = 7)]
    size: usize,
    /// Generator seed for the random costs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Regularization values as multiples of the maximum cost.
    #[arg(long, default_value = "1,0.1,0.01")]
    epsilon: String,
    /// Convergence tolerance on both L1 marginal residuals.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
}

#[derive(Args)]
struct IcosphereArgs {
    /// Subdivision level (0 is the icosahedron; 4 has 2562 vertices).
    #[arg(long)]
    subdivisions: u32,
    /// Output mesh path.
    #[arg(long)]
    out: PathBuf,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::Noise(args) => cmd_noise(args),
        Command::Denoise(args) => cmd_denoise(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::SinkhornDemo(args) => cmd_sinkhorn_demo(args),
        Command::Icosphere(args) => cmd_icosphere(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Parses `a..b` (inclusive), plain integers, and comma-separated mixes.
fn parse_usize_list(text: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        if let Some((a, b)) = item.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| usage(format!("invalid range `{item}`")))?;
            let b: usize = b.trim().parse().map_err(|_| usage(format!("invalid range `{item}`")))?;
            if b < a {
                return Err(usage(format!("empty range `{item}`")));
            }
            out.extend(a..=b);
        } else {
            out.push(item.parse().map_err(|_| usage(format!("invalid integer `{item}`")))?);
        }
    }
    if out.is_empty() {
        return Err(usage("empty list"));
    }
    Ok(out)
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        out.push(item.parse().map_err(|_| usage(format!("invalid number `{item}`")))?);
    }
    if out.is_empty() {
        return Err(usage("empty list"));
    }
    Ok(out)
}

fn format_snr(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        "inf".to_string()
    }
}

fn load_mesh(path: &PathBuf) -> Result<Mesh, CliError> {
    read_mesh_file(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn cmd_noise(args: NoiseArgs) -> Result<(), CliError> {
    if args.rho < 0.0 || !args.rho.is_finite() {
        return Err(usage("--rho must be finite and nonnegative"));
    }
    let mesh = load_mesh(&args.input)?;
    let normals = vertex_normals(&mesh);
    let noisy = add_normal_noise(&mesh, &normals, &NoiseParams::new(args.rho, args.seed));
    write_mesh_file(&args.out, &noisy)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;
    let snr_db = snr(noisy.vertices(), mesh.vertices())?;
    println!("snr_db={}", format_snr(snr_db));
    Ok(())
}

fn parse_single(name: &str, value: &Option<String>) -> Result<f64, CliError> {
    let text = value
        .as_ref()
        .ok_or_else(|| usage(format!("--{name} is required for this method")))?;
    let list = parse_f64_list(text)?;
    if list.len() != 1 {
        return Err(usage(format!("--{name} must hold a single value here")));
    }
    Ok(list[0])
}

fn cmd_denoise(args: DenoiseArgs) -> Result<(), CliError> {
    let noisy = load_mesh(&args.input)?;
    let reference = load_mesh(&args.reference)?;
    if noisy.n_vertices() != reference.n_vertices() {
        return Err(CliError::Data(format!(
            "vertex counts differ: {} vs {}",
            noisy.n_vertices(),
            reference.n_vertices()
        )));
    }
    if args.repeats == 0 {
        return Err(usage("--repeats must be at least 1"));
    }
    let ops = mesh_operators(&noisy);
    let x = noisy.vertices();

    let (denoised, timing, params_text) = match args.method.as_str() {
        "filter" => {
            let iters = parse_single("iters", &args.iters)? as usize;
            let params = FilterParams { iterations: iters };
            let out = filter_denoise(x, &ops.normalized_adjacency, &params);
            let timing = time_method(
                || {
                    std::hint::black_box(filter_denoise(x, &ops.normalized_adjacency, &params));
                },
                args.repeats,
            );
            (out, timing, format!("iters={iters}"))
        }
        "heat" => {
            let iters = parse_single("iters", &args.iters)? as usize;
            let tau = parse_single("tau", &args.tau)?;
            let params = HeatParams::new(tau, iters);
            if params.stability_warning() {
                eprintln!("warning: tau={tau} lies outside the stable range [0, 1]");
            }
            let out = heat_denoise(x, &ops.normalized_adjacency, &params);
            let timing = time_method(
                || {
                    std::hint::black_box(heat_denoise(x, &ops.normalized_adjacency, &params));
                },
                args.repeats,
            );
            (out, timing, format!("tau={tau} iters={iters}"))
        }
        "sobolev" => {
            let mu = parse_single("mu", &args.mu)?;
            if mu < 0.0 {
                return Err(usage("--mu must be nonnegative"));
            }
            let solver = SobolevSolver::new(&ops.laplacian, &SobolevParams::new(mu))?;
            let out = solver.solve(x);
            let timing = time_method(
                || {
                    std::hint::black_box(solver.solve(x));
                },
                args.repeats,
            );
            (out, timing, format!("mu={mu}"))
        }
        other => return Err(usage(format!("unknown method `{other}`"))),
    };

    let mesh_out = noisy.with_vertices(denoised);
    write_mesh_file(&args.out, &mesh_out)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;
    let snr_db = snr(mesh_out.vertices(), reference.vertices())?;
    println!(
        "method={} {} snr_db={} time_ms={:.4} (min {:.4}, max {:.4}, median of {})",
        args.method,
        params_text,
        format_snr(snr_db),
        timing.median_ms,
        timing.min_ms,
        timing.max_ms,
        args.repeats,
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    if args.rho < 0.0 || !args.rho.is_finite() {
        return Err(usage("--rho must be finite and nonnegative"));
    }
    if args.repeats == 0 {
        return Err(usage("--repeats must be at least 1"));
    }
    let mesh = load_mesh(&args.input)?;
    let normals = vertex_normals(&mesh);
    let noisy = add_normal_noise(&mesh, &normals, &NoiseParams::new(args.rho, args.seed));

    let iters = parse_usize_list(&args.iters)?;
    let taus = parse_f64_list(&args.tau)?;
    let mus = parse_f64_list(&args.mu)?;
    if mus.iter().any(|&m| m < 0.0 || !m.is_finite()) {
        return Err(usage("--mu values must be finite and nonnegative"));
    }
    if taus.iter().any(|&t| !t.is_finite()) {
        return Err(usage("--tau values must be finite"));
    }
    for &t in &taus {
        if HeatParams::new(t, 1).stability_warning() {
            eprintln!("warning: tau={t} lies outside the stable range [0, 1]");
        }
    }

    let mut grids = Vec::new();
    for method in args.method.split(',').map(str::trim) {
        match method {
            "filter" => grids.push(MethodGrid::Filter { iterations: iters.clone() }),
            "heat" => grids.push(MethodGrid::Heat { taus: taus.clone(), iterations: iters.clone() }),
            "sobolev" => grids.push(MethodGrid::Sobolev { mus: mus.clone() }),
            other => return Err(usage(format!("unknown method `{other}`"))),
        }
    }
    if grids.is_empty() {
        return Err(usage("no methods selected"));
    }

    let ops = mesh_operators(&mesh);
    let report = run_sweep(
        mesh.vertices(),
        noisy.vertices(),
        &ops.normalized_adjacency,
        &ops.laplacian,
        &grids,
        args.repeats,
    );

    let rendered = match args.format.as_str() {
        "json" => report_to_json(&report),
        _ => report_to_csv(&report),
    };
    std::fs::write(&args.out, rendered)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;

    print_best(&report);
    println!("report written to {}", args.out.display());
    Ok(())
}

fn print_best(report: &SweepReport) {
    println!("# {}", report.snr_reference);
    for b in &report.best {
        let mut params = format!("{}={}", b.param_name, b.param_value);
        if let (Some(n2), Some(v2)) = (&b.param2_name, b.param2_value) {
            params.push_str(&format!(" {n2}={v2}"));
        }
        println!(
            "best {}: {} snr_db={} time_ms={:.4}",
            b.method,
            params,
            format_snr(b.snr_db),
            b.time_ms
        );
    }
}

fn cmd_sinkhorn_demo(args: SinkhornDemoArgs) -> Result<(), CliError> {
    if args.size == 0 {
        return Err(usage("--size must be at least 1"));
    }
    if !(args.tol > 0.0) {
        return Err(usage("--tol must be positive"));
    }
    if args.max_iters == 0 {
        return Err(usage("--max-iters must be at least 1"));
    }
    let scales = parse_f64_list(&args.epsilon)?;
    if scales.iter().any(|&s| !(s > 0.0)) {
        return Err(usage("--epsilon values must be positive"));
    }

    // Uniform random costs from a splitmix-style generator.
    let n = args.size;
    let mut state = args.seed;
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut cost = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            cost.set(i, j, next());
        }
    }
    let cost = CostMatrix::new(cost)?;
    let max_cost = cost.max_entry().max(f64::MIN_POSITIVE);
    let h = Histogram::uniform(n);

    let exact = if n <= 9 {
        let (perm, total) = monge_bruteforce(&cost)?;
        let per_mass = total / n as f64;
        println!("monge optimum: cost={per_mass:.6} assignment={perm:?}");
        Some(per_mass)
    } else {
        println!("monge optimum: skipped (size {n} exceeds the enumeration bound)");
        None
    };

    for &scale in &scales {
        let epsilon = scale * max_cost;
        let (state, plan) = sinkhorn_log(&h, &h, &cost, epsilon, args.max_iters, args.tol)?;
        let (r, c) = marginal_residuals(&plan, &h, &h);
        let cost_value = transport_cost(&plan, &cost);
        let underflow = gibbs_kernel(&cost, epsilon)?.has_underflow();
        print!(
            "epsilon={epsilon:.6} ({scale} x max cost): iters={} residuals=({r:.3e}, {c:.3e}) cost={cost_value:.6}",
            state.iterations_run
        );
        if let Some(exact) = exact {
            print!(" (monge {exact:.6})");
        }
        if underflow {
            print!(" [plain kernel underflows at this epsilon; log-domain used]");
        }
        println!();
    }
    Ok(())
}

fn cmd_icosphere(args: IcosphereArgs) -> Result<(), CliError> {
    if args.subdivisions > 8 {
        return Err(usage("--subdivisions above 8 would exceed 2.6M vertices"));
    }
    let mesh = icosphere(args.subdivisions);
    write_mesh_file(&args.out, &mesh)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;
    println!(
        "icosphere level {}: {} vertices, {} faces -> {}",
        args.subdivisions,
        mesh.n_vertices(),
        mesh.n_faces(),
        args.out.display()
    );
    Ok(())
}
