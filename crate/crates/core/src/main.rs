use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use isospec::cocycle::{free_laplacian_le, lyapunov, Classification};
use isospec::config::{solvable_family, ExperimentConfig, SolvableFamily};
use isospec::kam::{reduce, schrodinger_embedding, trace_residual};
use isospec::output::{le_profile, profile_csv, spectrum_csv, trace_json_lines};
use isospec::spectral::{amo_shift_le_reference, sarnak_le_reference, sarnak_spectrum_reference, spectrum_scan};
use isospec::verify::run_suite;
use isospec::{Error, Result};

#[derive(Parser)]
#[command(name = "isospec", version, about = "Lyapunov exponents and KAM traces for complex quasi-periodic Schrodinger cocycles")]
struct Cli {
    /// TOML experiment configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 gives byte-reproducible output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Energy as `re,im`.
    #[arg(long = "E", global = true, default_value = "0,0", allow_hyphen_values = true)]
    energy: String,
    /// Phase shift into the strip.
    #[arg(long, global = true, default_value_t = 0.0, allow_hyphen_values = true)]
    eps: f64,
    /// Override the coupling constant.
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lyapunov exponent at one energy, with a closed-form reference when available.
    Lyapunov,
    /// L(E, eps) over the configured range of shifts, as CSV.
    LeProfile {
        #[arg(long, allow_hyphen_values = true)]
        eps_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        eps_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Classify a grid of energies, as CSV.
    Spectrum,
    /// Run the reducibility iteration at one energy, as JSON lines.
    Kam,
    /// Run an acceptance suite: sarnak, cone, kam, amo, determinism or all.
    Verify { suite: String },
}

fn parse_energy(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| Error::Config(format!("bad energy component `{p}` in `{s}`")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(Error::Config(format!("energy must be `re,im`, got `{s}`"))),
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.engine.seed = seed;
    }
    if let Some(lambda) = cli.lambda {
        cfg.potential.coupling = lambda;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_lyapunov(cli: &Cli, cfg: &ExperimentConfig) -> Result<String> {
    let energy = parse_energy(&cli.energy)?;
    let spec = cfg.cocycle(energy, cli.eps)?;
    let opts = cfg.lyapunov_options();
    let est = lyapunov(&spec, &opts)?;
    let mut out = format!(
        "energy={},{} eps={} lyapunov={:.6} std_error={:.2e}\n",
        energy.re, energy.im, cli.eps, est.value, est.std_error
    );
    let potential = &spec.potential;
    // Shifting e^{ix} by i eps rescales the coupling by e^{-eps}.
    let reference = match solvable_family(potential) {
        Some(SolvableFamily::Free) => Some(("free", free_laplacian_le(energy))),
        Some(SolvableFamily::Sarnak) => {
            Some(("sarnak", sarnak_le_reference(potential.coupling * (-cli.eps).exp(), energy)?))
        }
        Some(SolvableFamily::AlmostMathieu) if cli.eps != 0.0 => {
            let unshifted = lyapunov(&cfg.cocycle(energy, 0.0)?, &opts)?.value;
            Some(("almost-mathieu-shift", amo_shift_le_reference(potential.coupling, cli.eps, unshifted)))
        }
        _ => None,
    };
    if let Some((family, value)) = reference {
        out.push_str(&format!("reference[{family}]={value:.6} deviation={:.2e}\n", (est.value - value).abs()));
    }
    Ok(out)
}

fn cmd_le_profile(
    cli: &Cli,
    cfg: &ExperimentConfig,
    eps_min: Option<f64>,
    eps_max: Option<f64>,
    steps: Option<usize>,
) -> Result<String> {
    let mut cfg = cfg.clone();
    cfg.profile.eps_min = eps_min.unwrap_or(cfg.profile.eps_min);
    cfg.profile.eps_max = eps_max.unwrap_or(cfg.profile.eps_max);
    cfg.profile.steps = steps.unwrap_or(cfg.profile.steps);
    cfg.validate()?;
    let spec = cfg.cocycle(parse_energy(&cli.energy)?, 0.0)?;
    let p = &cfg.profile;
    let rows = le_profile(&spec, p.eps_min, p.eps_max, p.steps, &cfg.lyapunov_options())?;
    Ok(profile_csv(&cfg.digest()?, &rows))
}

fn cmd_spectrum(cli: &Cli, cfg: &ExperimentConfig) -> Result<String> {
    let spec = cfg.cocycle(Complex64::new(0.0, 0.0), cli.eps)?;
    let region = cfg.region();
    let scan = spectrum_scan(&spec, &region, &cfg.lyapunov_options(), &cfg.uh_options())?;
    let mut extra = Vec::new();
    // Free operator: the segment [-2, 2], the same set as the weak-coupling reference.
    let coupling = match solvable_family(&spec.potential) {
        Some(SolvableFamily::Sarnak) => Some(spec.potential.coupling * (-cli.eps).exp()),
        Some(SolvableFamily::Free) => Some(1.0),
        _ => None,
    };
    if let Some(lambda) = coupling {
        let tol = region.cell();
        let (mut compared, mut agreeing) = (0usize, 0usize);
        for v in &scan.verdicts {
            if v.classification == Classification::Undecided {
                continue;
            }
            let r = sarnak_spectrum_reference(lambda, Complex64::new(v.energy[0], v.energy[1]), tol)?;
            if r.distance <= tol {
                continue;
            }
            compared += 1;
            agreeing += usize::from(r.on_spectrum == (v.classification == Classification::NotUh));
        }
        extra.push(("reference".to_string(), format!("closed-form coupling={lambda}")));
        extra.push(("reference_agreement".to_string(), format!("{agreeing}/{compared}")));
    }
    Ok(spectrum_csv(&cfg.digest()?, &scan, &extra))
}

fn cmd_kam(cli: &Cli, cfg: &ExperimentConfig) -> Result<String> {
    let spec = cfg.cocycle(parse_energy(&cli.energy)?, cli.eps)?;
    let embedding = schrodinger_embedding(&spec, cfg.kam.aperture)?;
    let opts = cfg.kam_options();
    let trace = reduce(&embedding.problem, &opts)?;
    let residual = trace_residual(&trace, &embedding.problem, &opts.step);
    trace_json_lines(&trace, residual)
}

fn run(cli: &Cli) -> Result<(String, bool)> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot configure {n} threads: {e}")))?;
    }
    if let Command::Verify { suite } = &cli.command {
        let results = run_suite(suite)?;
        let passed = results.iter().filter(|r| r.passed).count();
        let mut out: String = results.iter().map(|r| r.line() + "\n").collect();
        out.push_str(&format!("{passed}/{} passed\n", results.len()));
        return Ok((out, passed == results.len()));
    }
    let cfg = load_config(cli)?;
    let out = match &cli.command {
        Command::Lyapunov => cmd_lyapunov(cli, &cfg)?,
        Command::LeProfile { eps_min, eps_max, steps } => cmd_le_profile(cli, &cfg, *eps_min, *eps_max, *steps)?,
        Command::Spectrum => cmd_spectrum(cli, &cfg)?,
        Command::Kam => cmd_kam(cli, &cfg)?,
        Command::Verify { .. } => unreachable!(),
    };
    Ok((out, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, ok)) => {
            let written = match &cli.out {
                Some(path) => fs::write(path, &text),
                None => std::io::stdout().lock().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
