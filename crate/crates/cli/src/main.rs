use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use conetorsion::config::{build_cross_section, parse_mu_grid, MuGridSpec, OutputFormat, RunConfig};
use conetorsion::olverpoly;
use conetorsion::report::{to_csv, to_json};
use conetorsion::spectra::{betti_numbers, coclosed_spectrum, CrossSection, EigenLevel, Family};
use conetorsion::torsion::{
    all_slices, difference_from_slices, log_torsion_cone, log_torsion_truncated, report_from_slices, res_term,
    tors_scaling_profile, DifferenceTerms, TorsionOptions,
};
use conetorsion::verify::{self, Check};
use conetorsion::zeta::{zeta_eval, ZetaEval};
use conetorsion::Error;

#[derive(Parser, Debug)]
#[command(name = "conetorsion", version, about = "Analytic torsion of bounded cones over flat tori")]
struct Cli {
    /// JSON run configuration (schema 1); defaults to the unit square torus.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Target for the automatic spectral cutoff.
    #[arg(long, global = true, conflicts_with = "cutoff")]
    tolerance: Option<f64>,
    /// Fixed spectral cutoff Λ.
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    /// Truncation parameter ε in (0,1).
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Scaling grid: `a,b,c` or `a..b` (doubling from a up to b).
    #[arg(long, global = true)]
    mu: Option<String>,
    /// Record wall time in reports (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Top + Tors + Res for the cone.
    Torsion,
    /// Truncated-cone torsion and the difference formula.
    Truncated,
    /// Anomaly integral rank·∫B₁ from residues.
    Anomaly,
    /// Tors under rescaling of the cross-section metric.
    Scaling,
    /// Coclosed spectra and heat coefficients per degree.
    DumpSpectrum,
    /// Zeta continuation data per degree.
    DumpZeta,
    /// Olver, D and M polynomial tables as exact rationals.
    DumpOlver {
        #[arg(long, default_value_t = 6)]
        max_order: usize,
    },
    /// Identity and oracle suite; exit 1 on any failure.
    Verify {
        #[command(subcommand)]
        suite: Option<VerifySuite>,
    },
}

#[derive(Subcommand, Debug)]
enum VerifySuite {
    #[command(hide = true)]
    Bessel,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. }
            | Error::Parse(_)
            | Error::InvalidCrossSection(_)
            | Error::InvalidArgument(_)
            | Error::DegreeOutOfRange { .. }
            | Error::ExperimentalUnsupported(_)
            | Error::OrderTooLarge { .. } => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(c) = cli.cutoff {
        cfg.cutoff = Some(c);
        cfg.tolerance = None;
    }
    if let Some(t) = cli.tolerance {
        cfg.tolerance = Some(t);
        cfg.cutoff = None;
    }
    if let Some(e) = cli.epsilon {
        cfg.epsilon = Some(e);
    }
    if let Some(m) = &cli.mu {
        cfg.mu_grid = Some(MuGridSpec::Text(m.clone()));
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Output {
    path: Option<PathBuf>,
    format: Option<OutputFormat>,
}

impl Output {
    fn from(cli: &Cli, cfg: &RunConfig) -> Self {
        let cfg_out = cfg.output.as_ref();
        Output {
            path: cli.out.clone().or_else(|| cfg_out.and_then(|o| o.path.clone()).map(PathBuf::from)),
            format: match cli.format {
                Some(Format::Json) => Some(OutputFormat::Json),
                Some(Format::Csv) => Some(OutputFormat::Csv),
                None => cfg_out.map(|o| o.format),
            },
        }
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.path {
            Some(p) => {
                std::fs::write(p, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display())))
            }
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    /// Fail before any computation if the report could not be written.
    fn check_writable(&self) -> Result<(), Failure> {
        let Some(p) = &self.path else { return Ok(()) };
        if p.is_dir() {
            return Err(Failure::Config(format!("output path {} is a directory", p.display())));
        }
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(std::path::Path::new("."));
        if !parent.is_dir() {
            return Err(Failure::Config(format!("output directory {} does not exist", parent.display())));
        }
        Ok(())
    }

    fn json_only(&self, what: &str) -> Result<(), Failure> {
        if self.format == Some(OutputFormat::Csv) {
            return Err(Failure::Config(format!("{what} has no CSV form; use --format json")));
        }
        Ok(())
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    let cs = build_cross_section(&cfg.cross_section)?;
    let opts = cfg.torsion_options();
    let out = Output::from(cli, &cfg);
    out.check_writable()?;
    let start = Instant::now();
    match &cli.command {
        Command::Torsion => {
            out.json_only("torsion")?;
            let mut rep = log_torsion_cone(&cs, &opts)?;
            if cli.timing {
                rep.provenance.wall_time_s = Some(start.elapsed().as_secs_f64());
            }
            out.emit(&to_json(&rep)?)
        }
        Command::Truncated => {
            out.json_only("truncated")?;
            let eps = cfg.epsilon.unwrap_or(0.25);
            out.emit(&to_json(&truncated(&cs, &opts, eps)?)?)
        }
        Command::Anomaly => {
            out.json_only("anomaly")?;
            let (res, anomaly) = res_term(&cs)?;
            let closed = (cs.is_torus() && cs.dim() == 2)
                .then(|| -(cs.bundle_rank() as f64) * cs.volume() / (8.0 * std::f64::consts::PI));
            let rep = AnomalyReport {
                anomaly_integral: anomaly,
                res,
                flat_2_torus_closed_form: closed,
                relative_error: closed.map(|c| (anomaly / c - 1.0).abs()),
                wall_time_s: cli.timing.then(|| start.elapsed().as_secs_f64()),
            };
            out.emit(&to_json(&rep)?)
        }
        Command::Scaling => {
            let mus = match cfg.mu_values()? {
                Some(m) => m,
                None => parse_mu_grid("2..64")?,
            };
            let prof = tors_scaling_profile(&cs, &mus, &opts)?;
            if cli.timing {
                eprintln!("wall time {:.3} s", start.elapsed().as_secs_f64());
            }
            match out.format {
                Some(OutputFormat::Json) => out.emit(&to_json(&prof)?),
                _ => {
                    let rows: Vec<Vec<Option<f64>>> =
                        prof.rows.iter().map(|r| vec![Some(r.mu), Some(r.tors), r.bound_ratio]).collect();
                    out.emit(&to_csv(&["mu", "tors", "abs_tors_mu_over_log_mu"], &rows))
                }
            }
        }
        Command::DumpSpectrum => {
            let slices = dump_spectrum(&cs, &opts)?;
            match out.format {
                Some(OutputFormat::Csv) => {
                    let mut rows = Vec::new();
                    for s in &slices.slices {
                        for l in &s.levels {
                            rows.push(vec![Some(s.k as f64), Some(l.eta), Some(l.mult as f64)]);
                        }
                    }
                    out.emit(&to_csv(&["k", "eta", "mult"], &rows))
                }
                _ => out.emit(&to_json(&slices)?),
            }
        }
        Command::DumpZeta => {
            out.json_only("dump-zeta")?;
            let evals: Vec<ZetaEval> = (0..cs.dim())
                .map(|k| {
                    let slice = coclosed_spectrum(&cs, k, opts.cutoff_for(&cs, k)?)?;
                    zeta_eval(&slice, opts.k_tol)
                })
                .collect::<Result<_, Error>>()?;
            out.emit(&to_json(&evals)?)
        }
        Command::DumpOlver { max_order } => {
            out.json_only("dump-olver")?;
            out.emit(&to_json(&olverpoly::dump_tables(*max_order)?)?)
        }
        Command::Verify { suite } => {
            let checks = match suite {
                Some(VerifySuite::Bessel) => verify::bessel_suite(),
                None => verify::full_suite(&cs, &opts),
            };
            report_checks(&checks, &out)
        }
    }
}

#[derive(Serialize)]
struct AnomalyReport {
    anomaly_integral: f64,
    res: f64,
    flat_2_torus_closed_form: Option<f64>,
    relative_error: Option<f64>,
    wall_time_s: Option<f64>,
}

#[derive(Serialize)]
struct TruncatedReport {
    epsilon: f64,
    #[serde(rename = "log_T_truncated")]
    log_t_truncated: f64,
    #[serde(rename = "log_T_cone")]
    log_t_cone: f64,
    difference: DifferenceTerms,
    /// difference.total − (log_T_truncated − log_T_cone)
    consistency_residual: f64,
}

fn truncated(cs: &CrossSection, opts: &TorsionOptions, eps: f64) -> Result<TruncatedReport, Error> {
    let slices = all_slices(cs, opts, 1.0)?;
    let cone = report_from_slices(cs, opts, &slices)?;
    let tr = log_torsion_truncated(cs, eps)?;
    let diff = difference_from_slices(cs, eps, &slices)?;
    Ok(TruncatedReport {
        epsilon: eps,
        log_t_truncated: tr,
        log_t_cone: cone.log_t,
        difference: diff,
        consistency_residual: diff.total - (tr - cone.log_t),
    })
}

#[derive(Serialize)]
struct SpectrumDump {
    family: Family,
    dim_n: usize,
    volume: f64,
    bundle_rank: u32,
    betti: Vec<u64>,
    euler: i64,
    slices: Vec<SliceDump>,
}

#[derive(Serialize)]
struct SliceDump {
    k: usize,
    alpha: f64,
    cutoff: f64,
    betti_k: u64,
    level_count: usize,
    /// (count, Weyl prediction, bound on their difference) at the cutoff.
    weyl_check: Option<(f64, f64, f64)>,
    heat_coeffs: Vec<f64>,
    levels: Vec<EigenLevel>,
}

fn dump_spectrum(cs: &CrossSection, opts: &TorsionOptions) -> Result<SpectrumDump, Error> {
    let topo = betti_numbers(cs);
    let mut slices = Vec::new();
    for k in 0..cs.dim() {
        let cutoff = if cs.is_torus() { opts.cutoff_for(cs, k)? } else { opts.cutoff.unwrap_or(f64::MAX) };
        let s = coclosed_spectrum(cs, k, cutoff)?;
        slices.push(SliceDump {
            k,
            alpha: s.alpha,
            cutoff,
            betti_k: s.betti_k,
            level_count: s.levels.len(),
            weyl_check: s.weyl_check(cutoff).ok(),
            heat_coeffs: s.heat.coeffs.clone(),
            levels: s.levels,
        });
    }
    Ok(SpectrumDump {
        family: cs.family(),
        dim_n: cs.dim(),
        volume: cs.volume(),
        bundle_rank: cs.bundle_rank(),
        betti: topo.betti,
        euler: topo.euler,
        slices,
    })
}

fn report_checks(checks: &[Check], out: &Output) -> Result<(), Failure> {
    for c in checks {
        println!(
            "{} {:<36} worst={:.3e} tol={:.1e}  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.worst,
            c.tolerance,
            c.detail
        );
    }
    if out.path.is_some() {
        out.emit(&to_json(checks)?)?;
    }
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    match failed.iter().max_by(|a, b| {
        (a.worst / a.tolerance.max(f64::MIN_POSITIVE)).total_cmp(&(b.worst / b.tolerance.max(f64::MIN_POSITIVE)))
    }) {
        None => Ok(()),
        Some(w) => Err(Failure::Numerical(format!(
            "{} of {} checks failed; worst offender: {} (error {:.3e}, tolerance {:.1e}): {}",
            failed.len(),
            checks.len(),
            w.name,
            w.worst,
            w.tolerance,
            w.detail
        ))),
    }
}
