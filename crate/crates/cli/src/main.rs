mod expr;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use spin_wigner::phase_space::{
    kernel_slice, negativity_of, q_values, site_domain, slice_quadrature, wigner_values,
};
use spin_wigner::state::write_state_file;
use spin_wigner::{
    build_quadrature, dual_kernel, integrate, make_kernel, make_kernel_with_cap,
    monte_carlo_quadrature, oat_hamiltonian, rotated_kernel, sw_report, DensityOperator, Error,
    HalfInteger, Kernel, KernelSpec, PhasePoint, Quadrature, QuadratureOrder, StateSpec,
};

#[derive(Parser)]
#[command(
    name = "spin-wigner",
    version,
    about = "Wigner and Q functions of spin systems"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Wigner function on a grid, as CSV.
    Wigner(FieldArgs),
    /// Husimi Q function on a grid, as CSV.
    Qfunc(FieldArgs),
    /// Check the kernel's correspondence conditions and write a JSON report.
    Verify(VerifyArgs),
    /// One-axis twisting of k qubits, then Wigner and Q slices.
    Evolve(EvolveArgs),
    /// State to Wigner values to state, through the dual frame.
    Reconstruct(ReconstructArgs),
    Kernels {
        #[command(subcommand)]
        action: ListAction,
    },
    States {
        #[command(subcommand)]
        action: ListAction,
    },
}

#[derive(Subcommand)]
enum ListAction {
    List,
}

#[derive(Args)]
struct KernelArgs {
    /// qubit | spinj | multiqubit | tensorqubit | sun
    #[arg(long, default_value = "qubit")]
    kernel: String,
    /// Spin for `spinj`, e.g. `3/2`.
    #[arg(long)]
    j: Option<String>,
    /// Number of sites.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Qudit dimension for `sun`.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct GridArgs {
    /// Rows x columns, e.g. `91x181`.
    #[arg(long)]
    grid: Option<String>,
    /// `collective`: all sites share (theta, phi).
    #[arg(long)]
    slice: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    thetarange: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    phirange: Option<String>,
}

#[derive(Args)]
struct FieldArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long)]
    state: String,
    #[command(flatten)]
    grid: GridArgs,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long, requires = "out")]
    gnuplot: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    /// `exact:P` or `mc:SAMPLES`.
    #[arg(long)]
    quad: Option<String>,
    /// Random pure probe states (the maximally mixed state is always added).
    #[arg(long, default_value_t = 5)]
    probes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long)]
    k: usize,
    /// Initial state (default `plus:K`).
    #[arg(long)]
    state: Option<String>,
    /// Evolution time, e.g. `pi/125`.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    time: String,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long)]
    state: String,
    #[arg(long)]
    quad: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reconstructed state file.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Verify(String),
    Invalid(String),
    Io(String),
    Resource(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verify(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Io(_) => 3,
            Failure::Resource(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verify(m) | Failure::Invalid(m) | Failure::Io(m) | Failure::Resource(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io(_) => Failure::Io(msg),
            Error::Resource(_) => Failure::Resource(msg),
            Error::NumericContract(_) | Error::SingularFrame { .. } => Failure::Verify(msg),
            _ => Failure::Invalid(msg),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

fn write_out(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes") + "\n"
}

fn build_kernel(args: &KernelArgs) -> Result<Kernel, Failure> {
    let spec = match args.kernel.as_str() {
        "qubit" => KernelSpec::Qubit,
        "spinj" => {
            let j = args
                .j
                .as_deref()
                .ok_or_else(|| invalid("--kernel spinj needs --j"))?;
            KernelSpec::SpinJ(j.parse::<HalfInteger>()?)
        }
        "multiqubit" => KernelSpec::Multiqubit(args.k),
        "tensorqubit" => {
            let k = args.k;
            if k == 0 {
                return Err(invalid("--k must be at least 1"));
            }
            return Ok(Kernel::tensor_qubits(k)?);
        }
        "sun" => KernelSpec::QuditSun {
            n: args.n.ok_or_else(|| invalid("--kernel sun needs --n"))?,
            k: args.k,
        },
        other => return Err(Error::UnknownFamily(other.to_string()).into()),
    };
    Ok(make_kernel(&spec)?)
}

fn load_state(spec: &str) -> Result<DensityOperator, Failure> {
    let spec: StateSpec = spec.parse()?;
    Ok(spin_wigner::make_state(&spec)?)
}

fn parse_grid(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || invalid(format!("--grid expects RxC with R, C >= 2, got `{text}`"));
    let (r, c) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let r: usize = r.trim().parse().map_err(|_| bad())?;
    let c: usize = c.trim().parse().map_err(|_| bad())?;
    if r < 2 || c < 2 {
        return Err(bad());
    }
    Ok((r, c))
}

fn parse_range(text: &str, flag: &str) -> Result<(f64, f64), Failure> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| invalid(format!("{flag} expects `lo,hi`, got `{text}`")))?;
    let lo = expr::eval(a).map_err(|e| invalid(format!("{flag}: {e}")))?;
    let hi = expr::eval(b).map_err(|e| invalid(format!("{flag}: {e}")))?;
    if hi <= lo {
        return Err(invalid(format!("{flag}: empty range `{text}`")));
    }
    Ok((lo, hi))
}

struct Grid {
    points: Vec<PhasePoint>,
    rows: usize,
    cols: usize,
    theta: (f64, f64),
    phi: (f64, f64),
}

fn grid_points(kernel: &Kernel, args: &GridArgs, default_res: &str) -> Result<Grid, Failure> {
    let (rows, cols) = parse_grid(args.grid.as_deref().unwrap_or(default_res))?;
    let sites = kernel.sites();
    let planar = sites.len() == 1 && sites[0].angle_count() == 1;
    match args.slice.as_deref() {
        None if !planar => {
            return Err(invalid(format!(
                "kernel `{}` has more than two phase-space coordinates; pass --slice collective",
                kernel.label()
            )))
        }
        None | Some("collective") => {}
        Some(other) => return Err(invalid(format!("unknown slice `{other}`"))),
    }
    let dom = site_domain(&sites[0]);
    let theta = match &args.thetarange {
        Some(t) => parse_range(t, "--thetarange")?,
        None => dom.theta[0],
    };
    let phi = match &args.phirange {
        Some(t) => parse_range(t, "--phirange")?,
        None => (0.0, dom.phi_period[0]),
    };
    Ok(Grid {
        points: kernel_slice(kernel, theta, phi, (rows, cols)),
        rows,
        cols,
        theta,
        phi,
    })
}

fn parse_quad(text: Option<&str>, kernel: &Kernel, seed: u64) -> Result<Quadrature, Failure> {
    let default = format!("exact:{}", (2 * kernel.harmonic_degree()).max(4));
    let text = text.unwrap_or(&default);
    let bad = || {
        invalid(format!(
            "--quad expects exact:P or mc:SAMPLES, got `{text}`"
        ))
    };
    let (tag, n) = text.split_once(':').ok_or_else(bad)?;
    let n: usize = n.parse().map_err(|_| bad())?;
    Ok(match tag {
        "exact" => build_quadrature(kernel, QuadratureOrder::Exact(n))?,
        "mc" => monte_carlo_quadrature(kernel, n, seed)?,
        _ => return Err(bad()),
    })
}

fn gnuplot_path(csv: &Path) -> PathBuf {
    csv.with_extension("gp")
}

fn cmd_field(args: &FieldArgs, q: bool) -> CmdResult {
    let kernel = build_kernel(&args.kernel)?;
    let rho = load_state(&args.state)?;
    let grid = grid_points(&kernel, &args.grid, "91x181")?;
    let values = if q {
        q_values(&rho, &kernel, &grid.points)?
    } else {
        wigner_values(&rho, &kernel, &grid.points)?
    };
    write_out(
        args.out.as_deref(),
        &output::field_csv(&grid.points, &values),
    )?;
    if args.gnuplot {
        let csv = args.out.as_deref().expect("clap requires --out");
        let title = format!(
            "{} of {} ({})",
            if q { "Q" } else { "W" },
            args.state,
            kernel.label()
        );
        let script = output::gnuplot_script(csv, &title, grid.cols, &values);
        write_out(Some(&gnuplot_path(csv)), &script)?;
    }
    Ok(())
}

const ASSERTED_TOL: f64 = 1e-10;
const SELF_DUAL_TOL: f64 = 1e-9;

/// False for NaN.
fn within(value: f64, tol: f64) -> bool {
    value <= tol
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let kernel = build_kernel(&args.kernel)?;
    let quad = parse_quad(args.quad.as_deref(), &kernel, args.seed)?;
    let report = sw_report(&kernel, &quad, args.probes, args.seed)?;
    write_out(args.out.as_deref(), &to_json(&report))?;

    let mut failed = Vec::new();
    for (name, value) in [
        ("hermiticity", report.hermiticity_residual),
        ("reality", report.reality_residual),
        ("normalization", report.normalization_residual),
        ("standardization", report.standardization_residual),
    ] {
        if !within(value, ASSERTED_TOL) {
            failed.push(format!("{name} residual {value:e} > {ASSERTED_TOL:e}"));
        }
    }
    if !report.is_complete() {
        failed.push(format!(
            "frame not informationally complete (min eigenvalue {:e})",
            report.min_frame_eigenvalue
        ));
    }
    if kernel.family().is_documented_self_dual()
        && !within(report.self_duality_residual, SELF_DUAL_TOL)
    {
        failed.push(format!(
            "self-duality residual {:e} > {SELF_DUAL_TOL:e}",
            report.self_duality_residual
        ));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(failed.join("; ")))
    }
}

#[derive(Serialize)]
struct EvolveSummary {
    k: usize,
    state: String,
    time: f64,
    grid: String,
    theta_range: [f64; 2],
    phi_range: [f64; 2],
    purity: f64,
    /// Slice-quadrature integral of W.
    normalization: f64,
    negativity_volume: f64,
    min_w: f64,
    max_w: f64,
    min_q: f64,
    /// `max |Tr[VρV† Δ] - Tr[ρ V†ΔV]|` over the audit points.
    identity_residual: f64,
    audit_points: usize,
}

const AUDIT_POINTS: usize = 50;
const MAX_EVOLVE_DIM: usize = 1 << spin_wigner::state::MAX_OAT_QUBITS;

fn cmd_evolve(args: &EvolveArgs) -> CmdResult {
    let time = expr::eval(&args.time).map_err(|e| invalid(format!("--time: {e}")))?;
    let state = args
        .state
        .clone()
        .unwrap_or_else(|| format!("plus:{}", args.k));
    let h = oat_hamiltonian(args.k)?;
    let kernel = make_kernel_with_cap(&KernelSpec::Multiqubit(args.k), MAX_EVOLVE_DIM)?;
    let rho = load_state(&state)?;
    if rho.dim() != kernel.dim() {
        return Err(invalid(format!(
            "state `{state}` has dimension {}, {} qubits need {}",
            rho.dim(),
            args.k,
            kernel.dim()
        )));
    }
    let evolved = spin_wigner::evolve(&rho, &h, time)?;

    let mut grid_args = GridArgs {
        grid: args.grid.grid.clone(),
        slice: Some("collective".into()),
        thetarange: args.grid.thetarange.clone(),
        phirange: args.grid.phirange.clone(),
    };
    if grid_args.thetarange.is_none() {
        grid_args.thetarange = Some("0,pi/2".into());
    }
    if grid_args.phirange.is_none() {
        grid_args.phirange = Some("0,pi".into());
    }
    let grid = grid_points(&kernel, &grid_args, "101x101")?;
    let w = wigner_values(&evolved, &kernel, &grid.points)?;
    let q = q_values(&evolved, &kernel, &grid.points)?;
    let sq = slice_quadrature(&kernel, grid.theta, grid.phi, (grid.rows, grid.cols))?;

    // Both sides of the rotated-kernel identity; dense on the right when affordable.
    let v = spin_wigner::algebra::expi_hermitian(&h, -time)?;
    let rotated = rotated_kernel(&kernel, &v)?;
    let audit = monte_carlo_quadrature(&kernel, AUDIT_POINTS, args.seed)?.points;
    let lhs = wigner_values(&evolved, &kernel, &audit)?;
    let rhs: Vec<f64> = if kernel.dim() <= 256 {
        audit
            .iter()
            .map(|p| -> Result<f64, Error> {
                Ok(spin_wigner::algebra::frobenius(&rotated.evaluate(p)?, rho.matrix())?.re)
            })
            .collect::<Result<_, _>>()?
    } else {
        wigner_values(&rho, &rotated, &audit)?
    };
    let identity_residual = lhs
        .iter()
        .zip(&rhs)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    let fold = |xs: &[f64], f: fn(f64, f64) -> f64, init: f64| xs.iter().copied().fold(init, f);
    let summary = EvolveSummary {
        k: args.k,
        state,
        time,
        grid: format!("{}x{}", grid.rows, grid.cols),
        theta_range: [grid.theta.0, grid.theta.1],
        phi_range: [grid.phi.0, grid.phi.1],
        purity: evolved.purity(),
        normalization: integrate(&w, &sq)?,
        negativity_volume: negativity_of(&w, &sq)?,
        min_w: fold(&w, f64::min, f64::INFINITY),
        max_w: fold(&w, f64::max, f64::NEG_INFINITY),
        min_q: fold(&q, f64::min, f64::INFINITY),
        identity_residual,
        audit_points: AUDIT_POINTS,
    };

    fs::create_dir_all(&args.out)
        .map_err(|e| Failure::Io(format!("{}: {e}", args.out.display())))?;
    for (name, values, label) in [("wigner.csv", &w, "W"), ("qfunc.csv", &q, "Q")] {
        let path = args.out.join(name);
        write_out(Some(&path), &output::field_csv(&grid.points, values))?;
        if args.gnuplot {
            let title = format!("{label}, {} qubits, t = {time}", args.k);
            let script = output::gnuplot_script(&path, &title, grid.cols, values);
            write_out(Some(&gnuplot_path(&path)), &script)?;
        }
    }
    write_out(Some(&args.out.join("summary.json")), &to_json(&summary))?;
    eprintln!("identity residual {identity_residual:.3e} over {AUDIT_POINTS} points");
    Ok(())
}

#[derive(Serialize)]
struct ReconstructSummary {
    kernel: String,
    quadrature: String,
    max_abs_error: f64,
    purity: f64,
}

const RECONSTRUCT_TOL: f64 = 1e-8;

fn cmd_reconstruct(args: &ReconstructArgs) -> CmdResult {
    let kernel = build_kernel(&args.kernel)?;
    let rho = load_state(&args.state)?;
    let quad = parse_quad(args.quad.as_deref(), &kernel, args.seed)?;
    let w = wigner_values(&rho, &kernel, &quad.points)?;
    let rec = dual_kernel(&kernel, &quad)?.reconstruct(&w, &quad)?;
    let err = spin_wigner::algebra::max_abs(&(rec.matrix() - rho.matrix()));
    if let Some(path) = &args.out {
        write_state_file(path, rec.matrix())?;
    }
    let summary = ReconstructSummary {
        kernel: kernel.label().to_string(),
        quadrature: quad.description.clone(),
        max_abs_error: err,
        purity: rec.purity(),
    };
    print!("{}", to_json(&summary));
    if err <= RECONSTRUCT_TOL {
        Ok(())
    } else {
        Err(Failure::Verify(format!(
            "round-trip error {err:e} > {RECONSTRUCT_TOL:e}"
        )))
    }
}

const KERNELS: &str = "\
qubit        --kernel qubit                   one qubit, D = 2
spinj        --kernel spinj --j J             spin j, D = 2j+1
multiqubit   --kernel multiqubit --k K        K qubits, global parity, D = 2^K
tensorqubit  --kernel tensorqubit --k K       K qubits, product of qubit kernels, D = 2^K
sun          --kernel sun --n N [--k K]       K SU(N) qudits, global parity, D = N^K
";

const STATES: &str = "\
basis:j=J,m=M     |j, m>, basis ordered m = j first
cat:j=J           (|j, j> + |j, -j>)/sqrt(2)
plus:K            |+> on K qubits
bell:LABEL        phi+, phi-, psi+, psi-
ghz:K             (|0...0> + |1...1>)/sqrt(2)
mixed:D           I/D
file:PATH         JSON with `real` and `imag` D x D arrays
";

fn run(cli: Cli) -> CmdResult {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(invalid("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| invalid(e.to_string()))?;
    }
    match &cli.command {
        Command::Wigner(a) => cmd_field(a, false),
        Command::Qfunc(a) => cmd_field(a, true),
        Command::Verify(a) => cmd_verify(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Kernels {
            action: ListAction::List,
        } => write_out(None, KERNELS),
        Command::States {
            action: ListAction::List,
        } => write_out(None, STATES),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_and_range_parsing() {
        assert_eq!(parse_grid("181x361").ok(), Some((181, 361)));
        assert!(parse_grid("1x5").is_err());
        assert!(parse_grid("abc").is_err());
        let (lo, hi) = parse_range("-1.25,1.25", "--phirange").ok().unwrap();
        assert_eq!((lo, hi), (-1.25, 1.25));
        let (lo, hi) = parse_range("0,pi/2", "--thetarange").ok().unwrap();
        assert_eq!((lo, hi), (0.0, PI / 2.0));
        assert!(parse_range("1,0", "--x").is_err());
    }
}
