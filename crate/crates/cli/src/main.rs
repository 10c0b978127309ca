//! `gmedet`: detect genuine multipartite entanglement from truncated moments
//! of positive maps, sweep noise parameters for detection thresholds, verify
//! the multi-copy operator realization, estimate map constants, and simulate
//! finite-shot estimation.

mod config;
mod report;
mod spec;
mod sweep;

use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gmedet::gme::{estimate_nu, min_eig_detect};
use gmedet::maps::SingleSiteMap;
use gmedet::moments::{compute_moments, hankel_report};
use gmedet::qcore::SystemShape;
use gmedet::realization::{
    build_term_observable, expectation_complex, hermitian_part, sample_expectation_of,
    second_moment_via_operators, swap_op, third_moment_via_operators, MultiCopyObservable,
    TermIndexString,
};
use gmedet::states;
use gmedet::threshold::GridSpec;

use config::FileConfig;
use report::{fmt_sig, DetectReport};
use spec::{parse_c, parse_map, parse_state, StateSpec, OBSERVABLE_CATALOG};
use sweep::{parse_detectors, run_sweep, write_outcome, SweepConfig};

#[derive(Parser)]
#[command(name = "gmedet", version, about = "GME detection via moments of positive maps")]
struct Cli {
    /// Flat `key = value` config file; command-line flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-state detection report (min eigenvalue, moments, Hankel verdicts)
    Detect(DetectArgs),
    /// Parameter sweep with CSV output and bisected detection thresholds
    Sweep(SweepArgs),
    /// Cross-check moments against multi-copy operator expectations
    #[command(name = "verify-realization")]
    VerifyRealization(VerifyArgs),
    /// Estimate the most negative output eigenvalue of 1 (x) map
    Nu(NuArgs),
    /// Finite-shot expectation of a named multi-copy observable
    Sample(SampleArgs),
}

#[derive(Args, Default)]
struct MapFlags {
    /// Base map: transposition | reduction | lindblad:g1,g2,g3
    #[arg(long)]
    map: Option<String>,
    /// Compose a local unitary after the base map (supported: sx)
    #[arg(long)]
    modify: Option<String>,
    /// Number of sites (defaults to the state's site count)
    #[arg(long)]
    n: Option<usize>,
    /// Map constant: auto (the (2^(N-1)-2) nu bound) or a number
    #[arg(long)]
    c: Option<String>,
}

impl MapFlags {
    fn merged(&self, cfg: &FileConfig) -> Result<Self> {
        Ok(Self {
            map: self.map.clone().or_else(|| cfg.get("map")),
            modify: self.modify.clone().or_else(|| cfg.get("modify")),
            n: match self.n {
                Some(n) => Some(n),
                None => cfg.get_parsed("n")?,
            },
            c: self.c.clone().or_else(|| cfg.get("c")),
        })
    }

    fn base_map(&self) -> Result<SingleSiteMap> {
        let map = self
            .map
            .as_deref()
            .ok_or_else(|| anyhow!("--map is required"))?;
        parse_map(map, self.modify.as_deref())
    }
}

#[derive(Args)]
struct DetectArgs {
    /// State label, e.g. ghz3, w3, noisy-ghz3:0.8
    #[arg(long)]
    state: Option<String>,
    #[command(flatten)]
    map_flags: MapFlags,
    /// Maximum Hankel order L (moments up to s_{2L+1})
    #[arg(long)]
    orders: Option<usize>,
    /// Verdict tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Output format: text | json
    #[arg(long)]
    format: Option<String>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// State family label, e.g. noisy-ghz3, ghz-w-mix, werner
    #[arg(long)]
    state: Option<String>,
    #[command(flatten)]
    map_flags: MapFlags,
    /// Detectors to evaluate, e.g. map-eig,H1,H2,H3
    #[arg(long)]
    detectors: Option<String>,
    /// Grid as min,max,points
    #[arg(long)]
    grid: Option<String>,
    /// Threshold bisection tolerance
    #[arg(long)]
    bisect_tol: Option<f64>,
    /// Verdict tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Seed recorded with the sweep
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Number of random states for the equivalence checks
    #[arg(long)]
    states: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct NuArgs {
    #[command(flatten)]
    map_flags: MapFlags,
    /// Number of random starting states
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SampleArgs {
    /// Observable label, e.g. swap-triple, cross:1,2, term:112
    #[arg(long)]
    observable: Option<String>,
    /// State label (fixed states only)
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Detect(args) => cmd_detect(args, &cfg),
        Command::Sweep(args) => cmd_sweep(args, &cfg),
        Command::VerifyRealization(args) => cmd_verify(args, &cfg),
        Command::Nu(args) => cmd_nu(args, &cfg),
        Command::Sample(args) => cmd_sample(args, &cfg),
    }
}

fn resolve_sites(spec: &StateSpec, n_flag: Option<usize>) -> Result<usize> {
    let n = spec.n_sites();
    if let Some(flag) = n_flag {
        if flag != n {
            bail!("--n {flag} conflicts with state `{}` on {n} sites", spec.label());
        }
    }
    Ok(n)
}

fn cmd_detect(args: DetectArgs, cfg: &FileConfig) -> Result<()> {
    let state_spec = args
        .state
        .or_else(|| cfg.get("state"))
        .ok_or_else(|| anyhow!("--state is required"))?;
    let map_flags = args.map_flags.merged(cfg)?;
    let orders = match args.orders {
        Some(v) => v,
        None => cfg.get_parsed("orders")?.unwrap_or(3),
    };
    let tol = match args.tol {
        Some(v) => Some(v),
        None => cfg.get_parsed("tol")?,
    };
    let format = args
        .format
        .or_else(|| cfg.get("format"))
        .unwrap_or_else(|| "text".into());
    let out = args.out.or_else(|| cfg.get("out").map(PathBuf::from));

    let spec = parse_state(&state_spec)?;
    let n = resolve_sites(&spec, map_flags.n)?;
    let (state_label, rho) = spec.fixed()?;
    let g = spec::build_gme_map(n, map_flags.base_map()?, parse_c(map_flags.c.as_deref())?)?;

    let detection = min_eig_detect(&g, &rho, tol)?;
    let moments = compute_moments(&g, &rho, 2 * orders + 1)?;
    let hankel = hankel_report(&moments, orders, tol)?;
    let report = DetectReport {
        state_label,
        map_label: g.label(),
        min_eig: detection.min_eigenvalue,
        map_detected: detection.detected,
        moments,
        hankel,
    };
    let rendered = match format.as_str() {
        "text" => report.text(),
        "json" => format!("{:#}\n", report.json()),
        other => bail!("unknown format `{other}`; use text or json"),
    };
    emit(&rendered, out.as_deref())
}

fn parse_grid(spec: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 3 {
        bail!("grid must be min,max,points, got `{spec}`");
    }
    let lo: f64 = parts[0].trim().parse().context("grid min")?;
    let hi: f64 = parts[1].trim().parse().context("grid max")?;
    let points: usize = parts[2].trim().parse().context("grid points")?;
    if points < 2 {
        bail!("grid needs at least 2 points");
    }
    if hi <= lo {
        bail!("grid range must be increasing");
    }
    Ok(GridSpec::new(lo, hi, points))
}

fn cmd_sweep(args: SweepArgs, cfg: &FileConfig) -> Result<()> {
    let state_spec = args
        .state
        .or_else(|| cfg.get("state"))
        .ok_or_else(|| anyhow!("--state is required"))?;
    let map_flags = args.map_flags.merged(cfg)?;
    let detectors = parse_detectors(
        &args
            .detectors
            .or_else(|| cfg.get("detectors"))
            .unwrap_or_else(|| "map-eig,H1,H2,H3".into()),
    )?;
    let grid = parse_grid(
        &args
            .grid
            .or_else(|| cfg.get("grid"))
            .unwrap_or_else(|| "0,1,101".into()),
    )?;
    let bisect_tol = match args.bisect_tol {
        Some(v) => v,
        None => cfg.get_parsed("bisect-tol")?.unwrap_or(5e-4),
    };
    let tol = match args.tol {
        Some(v) => v,
        None => cfg.get_parsed("tol")?.unwrap_or(1e-9),
    };
    let seed = match args.seed {
        Some(v) => v,
        None => cfg.get_parsed("seed")?.unwrap_or(0),
    };
    let out = args
        .out
        .or_else(|| cfg.get("out").map(PathBuf::from))
        .ok_or_else(|| anyhow!("--out is required for sweep"))?;

    let spec = parse_state(&state_spec)?;
    let n = resolve_sites(&spec, map_flags.n)?;
    let family = spec.family()?;
    let map = spec::build_gme_map(n, map_flags.base_map()?, parse_c(map_flags.c.as_deref())?)?;

    let sweep_cfg = SweepConfig {
        family,
        map,
        detectors,
        grid,
        bisect_tol,
        tol,
        seed,
    };
    let outcome = run_sweep(&sweep_cfg)?;
    let summary = write_outcome(&outcome, &out, grid.points, sweep_cfg.seed)?;
    print!("{summary}");
    Ok(())
}

fn cmd_verify(args: VerifyArgs, cfg: &FileConfig) -> Result<()> {
    let n_states = match args.states {
        Some(v) => v,
        None => cfg.get_parsed("states")?.unwrap_or(20),
    };
    let seed = match args.seed {
        Some(v) => v,
        None => cfg.get_parsed("seed")?.unwrap_or(7),
    };
    let g = spec::build_gme_map(3, SingleSiteMap::transposition(2), None)?;
    let t = SingleSiteMap::transposition(2);

    let mut worst_s2 = 0.0_f64;
    let mut worst_s3 = 0.0_f64;
    for k in 0..n_states as u64 {
        let rho = states::random_density(SystemShape::qubits(3), seed.wrapping_add(k))?;
        let direct = compute_moments(&g, &rho, 3)?;
        worst_s2 = worst_s2.max((second_moment_via_operators(&rho, &g)? - direct.s(2)).abs());
        worst_s3 = worst_s3.max((third_moment_via_operators(&rho, &g)? - direct.s(3)).abs());
    }

    let mut worst_term = 0.0_f64;
    for k in 0..5u64 {
        let rho = states::random_density(SystemShape::qubits(3), seed.wrapping_add(1000 + k))?;
        let phis: Vec<_> = (0..3)
            .map(|s| Ok(t.apply_on_sites(&[s], &rho)?.matrix().clone()))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..3usize {
            for j in 0..3usize {
                for l in 0..3usize {
                    let obs = build_term_observable(&TermIndexString(vec![i, j, l]), &g)?;
                    let via_ops = expectation_complex(&obs, &rho)?;
                    let direct: gmedet::Complex64 =
                        (&phis[i] * &phis[j] * &phis[l]).diagonal().iter().sum();
                    worst_term = worst_term.max((via_ops - direct).norm());
                }
            }
        }
    }

    let s2_ok = worst_s2 < 1e-9;
    let s3_ok = worst_s3 < 1e-8;
    let term_ok = worst_term < 1e-9;
    println!("verify-realization: states={n_states} seed={seed}");
    println!(
        "max |s2(operators) - s2(direct)| = {:.3e}  (tolerance 1e-9)  {}",
        worst_s2,
        pass_str(s2_ok)
    );
    println!(
        "max |s3(operators) - s3(direct)| = {:.3e}  (tolerance 1e-8)  {}",
        worst_s3,
        pass_str(s3_ok)
    );
    println!(
        "max term deviation over 27 strings x 5 states = {:.3e}  (tolerance 1e-9)  {}",
        worst_term,
        pass_str(term_ok)
    );
    println!("overall: {}", pass_str(s2_ok && s3_ok && term_ok));
    Ok(())
}

fn pass_str(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_nu(args: NuArgs, cfg: &FileConfig) -> Result<()> {
    let map_flags = args.map_flags.merged(cfg)?;
    let trials = match args.trials {
        Some(v) => v,
        None => cfg.get_parsed("trials")?.unwrap_or(500),
    };
    let seed = match args.seed {
        Some(v) => v,
        None => cfg.get_parsed("seed")?.unwrap_or(11),
    };
    let base = map_flags.base_map()?;
    let estimate = estimate_nu(&base, trials, seed);
    println!("map: {}", base.label());
    println!(
        "nu = {}  trials = {}  refined = {}",
        fmt_sig(estimate.value),
        estimate.trials,
        estimate.refined
    );
    Ok(())
}

fn parse_observable(
    spec: &str,
    n_parties: usize,
) -> Result<(String, MultiCopyObservable)> {
    if spec == "swap-triple" {
        let obs = MultiCopyObservable::new(2, 2, vec![swap_op(2); n_parties])?;
        return Ok((spec.to_string(), obs));
    }
    if let Some(pair) = spec.strip_prefix("cross:") {
        let parts: Vec<&str> = pair.split(',').collect();
        if parts.len() != 2 {
            bail!("cross observable needs two party indices, got `{pair}`");
        }
        let i: usize = parts[0].trim().parse().context("party index")?;
        let j: usize = parts[1].trim().parse().context("party index")?;
        if i == 0 || j == 0 || i > n_parties || j > n_parties || i == j {
            bail!("cross parties must be distinct and within 1..={n_parties}");
        }
        let factors = (1..=n_parties)
            .map(|u| {
                if u == i || u == j {
                    gmedet::realization::phi_hat(2)
                } else {
                    Ok(swap_op(2))
                }
            })
            .collect::<gmedet::Result<Vec<_>>>()?;
        return Ok((spec.to_string(), MultiCopyObservable::new(2, 2, factors)?));
    }
    if let Some(digits) = spec.strip_prefix("term:") {
        let g = spec::build_gme_map(n_parties, SingleSiteMap::transposition(2), None)?;
        let string: Vec<usize> = digits
            .chars()
            .map(|ch| {
                ch.to_digit(10)
                    .and_then(|d| (d as usize).checked_sub(1))
                    .ok_or_else(|| anyhow!("term digits are 1-based bipartition indices"))
            })
            .collect::<Result<_>>()?;
        let obs = build_term_observable(&TermIndexString(string), &g)?;
        return Ok((spec.to_string(), obs));
    }
    let mut msg = format!("unknown observable `{spec}`; known observables:\n");
    for entry in OBSERVABLE_CATALOG {
        msg.push_str("  ");
        msg.push_str(entry);
        msg.push('\n');
    }
    Err(anyhow!(msg))
}

fn cmd_sample(args: SampleArgs, cfg: &FileConfig) -> Result<()> {
    let observable = args
        .observable
        .or_else(|| cfg.get("observable"))
        .ok_or_else(|| anyhow!("--observable is required"))?;
    let state_spec = args
        .state
        .or_else(|| cfg.get("state"))
        .ok_or_else(|| anyhow!("--state is required"))?;
    let shots = match args.shots {
        Some(v) => v,
        None => cfg.get_parsed("shots")?.unwrap_or(100_000),
    };
    let seed = match args.seed {
        Some(v) => v,
        None => cfg.get_parsed("seed")?.unwrap_or(1),
    };

    let (state_label, rho) = parse_state(&state_spec)?.fixed()?;
    let n = rho.shape().num_sites();
    let (obs_label, obs) = parse_observable(&observable, n)?;
    let exact = expectation_complex(&obs, &rho)?;
    // non-Hermitian term observables are sampled through their Hermitian
    // part, whose expectation is the real part of the original
    let assembled = hermitian_part(&obs.assembled());
    let estimate = sample_expectation_of(&assembled, obs.copies(), &rho, shots, seed)?;
    println!("observable: {obs_label}  state: {state_label}");
    println!("exact expectation: {}", fmt_sig(exact.re));
    println!(
        "estimate: {}  stderr: {}  shots: {}",
        fmt_sig(estimate.mean),
        fmt_sig(estimate.std_error),
        estimate.shots
    );
    Ok(())
}

fn emit(text: &str, out: Option<&std::path::Path>) -> Result<()> {
    match out {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .with_context(|| format!("creating output file {}", path.display()))?;
            file.write_all(text.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
