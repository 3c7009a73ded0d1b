//! Command-line front end for the three-zone limit-cycle toolkit.
//!
//! Exit codes: 0 success, 1 I/O or config parse failure, 2 domain or
//! hypothesis violation, 3 numerical failure. Errors are mirrored as a
//! JSON object on stderr.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use threezone::analysis::{
    design_perturbation, find_zeros, wronskian_with_method, WronskianMethod, ZeroScan,
};
use threezone::integrator::{locate_limit_cycles, CycleSearch};
use threezone::melnikov::{eval_melnikov, melnikov_coefficients, melnikov_oracle};
use threezone::model::{check_hypotheses, classify_system, classify_zone, Side};
use threezone::normal_form::to_normal_form;
use threezone::scenarios;
use threezone::unperturbed::{annulus_interval, orbit_arcs};
use threezone::{Error, Perturbation64, System64, Zone64};

/// Analyze three-zone piecewise-linear Hamiltonian systems: Melnikov
/// functions, zero placement, and limit-cycle validation.
#[derive(Parser)]
#[command(name = "threezone", version, about, after_help = "Built-in scenarios: \
scs-a, scs-b, ccs-c, ccs-d, ccc-a, ccc-b, ccc-c.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SystemSource {
    /// One of the built-in scenarios.
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// Path to a JSON system configuration.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct OutputTarget {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the system and report the annulus interval.
    Classify {
        #[command(flatten)]
        source: SystemSource,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[command(flatten)]
        output: OutputTarget,
    },
    /// Tabulate the Melnikov function on an h-grid (CSV).
    Melnikov {
        #[command(flatten)]
        source: SystemSource,
        #[arg(long)]
        h_min: f64,
        #[arg(long)]
        h_max: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// Also tabulate the quadrature oracle next to the closed form.
        #[arg(long)]
        with_oracle: bool,
        /// Absolute tolerance of the oracle quadrature.
        #[arg(long, default_value_t = 1e-10)]
        quad_tol: f64,
        #[command(flatten)]
        output: OutputTarget,
    },
    /// Isolate the zeros of the Melnikov function (JSON).
    Zeros {
        #[command(flatten)]
        source: SystemSource,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Scan cap for unbounded (CCC) domains.
        #[arg(long)]
        h_max: Option<f64>,
        #[command(flatten)]
        output: OutputTarget,
    },
    /// Design a perturbation with prescribed Melnikov zeros (JSON).
    Design {
        #[command(flatten)]
        source: SystemSource,
        /// Comma-separated target zeros, e.g. 0.2,0.5,0.8.
        #[arg(long, value_delimiter = ',')]
        targets: Vec<f64>,
        #[command(flatten)]
        output: OutputTarget,
    },
    /// End-to-end check: design, isolate zeros, locate limit cycles.
    Validate {
        #[command(flatten)]
        source: SystemSource,
        /// Comma-separated target zeros; defaults to the scenario's table.
        #[arg(long, value_delimiter = ',')]
        targets: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[command(flatten)]
        output: OutputTarget,
    },
    /// Evaluate the Wronskian of the scenario's basis functions.
    Wronskian {
        #[command(flatten)]
        source: SystemSource,
        #[arg(long)]
        h: f64,
        /// Use Richardson finite differences instead of the analytic
        /// derivative cascades.
        #[arg(long)]
        fd: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[command(flatten)]
        output: OutputTarget,
    },
    /// Sample the unperturbed orbit arcs through (1, h) as CSV.
    Portrait {
        #[command(flatten)]
        source: SystemSource,
        #[arg(long)]
        h: f64,
        /// Samples per arc.
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[command(flatten)]
        output: OutputTarget,
    },
}

// ---------------------------------------------------------------- config

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ZoneConfig {
    a: f64,
    b: f64,
    c: f64,
    alpha: f64,
    beta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PerturbationConfig {
    p: f64,
    q: f64,
    r: f64,
    s: f64,
    u: f64,
    v: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ZonesConfig {
    left: ZoneConfig,
    center: ZoneConfig,
    right: ZoneConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PerturbationsConfig {
    left: PerturbationConfig,
    center: PerturbationConfig,
    right: PerturbationConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemConfig {
    schema_version: u32,
    #[serde(default)]
    name: Option<String>,
    zones: ZonesConfig,
    #[serde(default)]
    perturbation: Option<PerturbationsConfig>,
    #[serde(default)]
    epsilon: f64,
}

// ----------------------------------------------------------- error paths

struct CliError {
    code: u8,
    kind: &'static str,
    message: String,
}

impl CliError {
    fn io(message: String) -> Self {
        CliError { code: 1, kind: "io", message }
    }

    fn parse(message: String) -> Self {
        CliError { code: 1, kind: "parse", message }
    }

    fn usage(message: String) -> Self {
        CliError { code: 1, kind: "usage", message }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::DegenerateZone { .. } => (2, "degenerate-zone"),
            Error::HypothesisViolation { .. } => (2, "hypothesis-violation"),
            Error::OutOfAnnulus { .. } => (2, "out-of-annulus"),
            Error::NotASaddle { .. } => (2, "not-a-saddle"),
            Error::Domain(_) => (2, "domain"),
            Error::InvalidTargets(_) => (2, "invalid-targets"),
            Error::InvalidInput(_) => (2, "invalid-input"),
            Error::SlidingDetected { .. } => (2, "sliding-detected"),
            Error::IllConditioned(_) => (3, "ill-conditioned"),
            Error::SingularDesign => (3, "singular-design"),
            Error::NonInvertibleConvention => (3, "non-invertible-convention"),
            Error::QuadratureFailure { .. } => (3, "quadrature-failure"),
            Error::StepFailure { .. } => (3, "step-failure"),
            Error::OrbitEscaped => (3, "orbit-escaped"),
        };
        CliError { code, kind, message: e.to_string() }
    }
}

// ----------------------------------------------------------- formatting

/// Fixed 12-significant-digit scientific formatting for CSV cells.
fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.11e}")
}

fn load_system(source: &SystemSource) -> Result<(System64, String), CliError> {
    match (&source.scenario, &source.config) {
        (Some(name), None) => {
            let sys = scenarios::builtin(name)
                .ok_or_else(|| CliError::usage(format!("unknown scenario '{name}'")))?;
            Ok((sys, name.clone()))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            let cfg: SystemConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
            if cfg.schema_version != 1 {
                return Err(CliError::parse(format!(
                    "unsupported schema_version {}",
                    cfg.schema_version
                )));
            }
            let zone = |z: &ZoneConfig| Zone64::new(z.a, z.b, z.c, z.alpha, z.beta);
            let pert = |p: &PerturbationConfig| Perturbation64::new(p.p, p.q, p.r, p.s, p.u, p.v);
            let (pl, pc, pr) = match &cfg.perturbation {
                Some(w) => (pert(&w.left), pert(&w.center), pert(&w.right)),
                None => (
                    Perturbation64::zero(),
                    Perturbation64::zero(),
                    Perturbation64::zero(),
                ),
            };
            let sys = System64::new(
                zone(&cfg.zones.left),
                zone(&cfg.zones.center),
                zone(&cfg.zones.right),
                pl,
                pc,
                pr,
                cfg.epsilon,
            )?;
            Ok((sys, cfg.name.unwrap_or_else(|| "custom".into())))
        }
        _ => Err(CliError::usage(
            "exactly one of --scenario or --config is required".into(),
        )),
    }
}

fn emit(output: &OutputTarget, content: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

// ------------------------------------------------------- JSON structures

#[derive(Serialize)]
struct IntervalJson {
    lower: f64,
    upper: Option<f64>,
    boundary: &'static str,
    tangencies_at_zero: u8,
}

fn interval_json(j: &threezone::AnnulusInterval64) -> IntervalJson {
    IntervalJson {
        lower: j.lower,
        upper: j.upper.is_finite().then_some(j.upper),
        boundary: j.boundary.name(),
        tangencies_at_zero: j.tangency_count_at_zero,
    }
}

#[derive(Serialize)]
struct ZeroJson {
    h: f64,
    residual: f64,
    derivative: f64,
    simple: bool,
}

#[derive(Serialize)]
struct CoefficientJson {
    label: &'static str,
    value: f64,
}

#[derive(Serialize)]
struct PerturbationJson {
    p: f64,
    q: f64,
    r: f64,
    s: f64,
    u: f64,
    v: f64,
}

fn pert_json(w: &Perturbation64) -> PerturbationJson {
    PerturbationJson { p: w.p, q: w.q, r: w.r, s: w.s, u: w.u, v: w.v }
}

#[derive(Serialize)]
struct WitnessJson {
    h: f64,
    value: f64,
    order: usize,
    method: &'static str,
}

// ------------------------------------------------------------- commands

fn cmd_classify(source: SystemSource, format: Format, output: OutputTarget) -> Result<(), CliError> {
    let (sys, name) = load_system(&source)?;
    let report = check_hypotheses(&sys);
    if !report.all() {
        let mut text = String::new();
        let _ = writeln!(text, "name: {name}");
        let _ = writeln!(
            text,
            "hypotheses: h1={} h2={} h3={}",
            report.h1, report.h2, report.h3
        );
        for d in &report.details {
            let _ = writeln!(text, "detail: {d}");
        }
        emit(&output, &text)?;
        return Err(CliError::from(Error::HypothesisViolation {
            which: threezone::error::Hypothesis::H1,
            detail: report.details.join("; "),
        }));
    }
    let class = classify_system(&sys)?;
    let nf = to_normal_form(&sys)?;
    let interval = annulus_interval(&nf.system)?;
    let zones: Vec<String> = [Side::Left, Side::Center, Side::Right]
        .iter()
        .map(|&side| {
            let k = classify_zone(sys.zone(side), side).unwrap();
            format!(
                "{}={:?}/{:?}",
                side.name(),
                k.kind,
                k.location
            )
            .to_lowercase()
        })
        .collect();

    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct ClassifyJson {
                name: String,
                class: &'static str,
                reflected: bool,
                hypotheses: [bool; 3],
                interval: IntervalJson,
                time_scale: f64,
                zones: Vec<String>,
            }
            let doc = ClassifyJson {
                name,
                class: class.kind.name(),
                reflected: class.reflected,
                hypotheses: [report.h1, report.h2, report.h3],
                interval: interval_json(&interval),
                time_scale: nf.time_scale,
                zones,
            };
            emit(&output, &(serde_json::to_string_pretty(&doc).unwrap() + "\n"))
        }
        _ => {
            let upper = if interval.upper.is_finite() {
                sig12(interval.upper)
            } else {
                "inf".into()
            };
            let mut text = String::new();
            let _ = writeln!(text, "name: {name}");
            let _ = writeln!(text, "class: {} (reflected: {})", class.kind.name(), class.reflected);
            let _ = writeln!(text, "zones: {}", zones.join(" "));
            let _ = writeln!(
                text,
                "hypotheses: h1={} h2={} h3={}",
                report.h1, report.h2, report.h3
            );
            let _ = writeln!(text, "interval: (0, {upper}) {}", interval.boundary.name());
            let _ = writeln!(text, "tangencies_at_zero: {}", interval.tangency_count_at_zero);
            let _ = writeln!(text, "time_scale: {}", sig12(nf.time_scale));
            emit(&output, &text)
        }
    }
}

fn cmd_melnikov(
    source: SystemSource,
    h_min: f64,
    h_max: f64,
    samples: usize,
    with_oracle: bool,
    quad_tol: f64,
    output: OutputTarget,
) -> Result<(), CliError> {
    let (sys, _) = load_system(&source)?;
    let nf = to_normal_form(&sys)?;
    let form = melnikov_coefficients(&nf.system)?;
    if samples < 2 {
        return Err(CliError::usage("need at least 2 samples".into()));
    }
    if !(form.domain.contains(h_min) && form.domain.contains(h_max) && h_min < h_max) {
        return Err(CliError::from(Error::Domain(format!(
            "[{h_min}, {h_max}] is not inside the annulus interval (0, {})",
            form.domain.upper
        ))));
    }
    let mut csv = String::new();
    csv.push_str(if with_oracle { "h,m_closed,m_oracle\n" } else { "h,m_closed\n" });
    for k in 0..samples {
        let h = h_min + (h_max - h_min) * (k as f64) / ((samples - 1) as f64);
        let m = eval_melnikov(&form, h)?;
        if with_oracle {
            let o = melnikov_oracle(&nf.system, h, quad_tol)?;
            let _ = writeln!(csv, "{},{},{}", sig12(h), sig12(m), sig12(o));
        } else {
            let _ = writeln!(csv, "{},{}", sig12(h), sig12(m));
        }
    }
    emit(&output, &csv)
}

fn cmd_zeros(
    source: SystemSource,
    grid: usize,
    h_max: Option<f64>,
    output: OutputTarget,
) -> Result<(), CliError> {
    let (sys, name) = load_system(&source)?;
    let class = classify_system(&sys)?;
    let nf = to_normal_form(&sys)?;
    let form = melnikov_coefficients(&nf.system)?;
    let zeros = find_zeros(&form, ZeroScan { grid, cap: h_max })?;

    #[derive(Serialize)]
    struct ZerosJson {
        name: String,
        class: &'static str,
        interval: IntervalJson,
        zeros: Vec<ZeroJson>,
        advisories: Vec<String>,
    }
    let doc = ZerosJson {
        name,
        class: class.kind.name(),
        interval: interval_json(&form.domain),
        zeros: zeros
            .zeros
            .iter()
            .map(|z| ZeroJson {
                h: z.h,
                residual: z.residual,
                derivative: z.derivative,
                simple: z.simple,
            })
            .collect(),
        advisories: zeros.advisories.clone(),
    };
    emit(&output, &(serde_json::to_string_pretty(&doc).unwrap() + "\n"))
}

#[derive(Serialize)]
struct DesignJson {
    convention: &'static str,
    parameters: [f64; 4],
    coefficients: Vec<CoefficientJson>,
    perturbation_left: PerturbationJson,
    perturbation_center: PerturbationJson,
    perturbation_right: PerturbationJson,
}

fn design_json(design: &threezone::analysis::Design<f64>) -> DesignJson {
    DesignJson {
        convention: match design.convention {
            threezone::analysis::DesignConvention::FreeRl => "free-rl",
            threezone::analysis::DesignConvention::FreeRr => "free-rr",
        },
        parameters: design.parameters,
        coefficients: design
            .form
            .basis
            .iter()
            .zip(design.form.coeffs.iter())
            .map(|(b, &k)| CoefficientJson { label: b.label(), value: k })
            .collect(),
        perturbation_left: pert_json(&design.left),
        perturbation_center: pert_json(&design.center),
        perturbation_right: pert_json(&design.right),
    }
}

fn cmd_design(source: SystemSource, targets: Vec<f64>, output: OutputTarget) -> Result<(), CliError> {
    let (sys, name) = load_system(&source)?;
    let class = classify_system(&sys)?;
    let nf = to_normal_form(&sys)?;
    if targets.is_empty() {
        return Err(CliError::usage("--targets requires at least one value".into()));
    }
    let design = design_perturbation(&nf.system, &targets)?;
    let (found, witness) = threezone::analysis::independence_certificate(
        &design.form.basis,
        design.form.domain.lower,
        if design.form.domain.upper.is_finite() {
            design.form.domain.upper
        } else {
            targets.iter().fold(10.0f64, |m, &t| m.max(2.0 * t))
        },
        64,
    );
    let zeros = find_zeros(
        &design.form,
        ZeroScan {
            grid: 512,
            cap: Some(targets.iter().fold(10.0f64, |m, &t| m.max(2.0 * t))),
        },
    )?;

    #[derive(Serialize)]
    struct ReportJson {
        name: String,
        class: &'static str,
        interval: IntervalJson,
        wronskian_witness: Option<WitnessJson>,
        independent: bool,
        design: DesignJson,
        zeros: Vec<ZeroJson>,
    }
    let doc = ReportJson {
        name,
        class: class.kind.name(),
        interval: interval_json(&design.form.domain),
        wronskian_witness: witness.map(|w| WitnessJson {
            h: w.h,
            value: w.value,
            order: w.order,
            method: "analytic",
        }),
        independent: found,
        design: design_json(&design),
        zeros: zeros
            .zeros
            .iter()
            .map(|z| ZeroJson {
                h: z.h,
                residual: z.residual,
                derivative: z.derivative,
                simple: z.simple,
            })
            .collect(),
    };
    emit(&output, &(serde_json::to_string_pretty(&doc).unwrap() + "\n"))
}

fn cmd_validate(
    source: SystemSource,
    targets: Option<Vec<f64>>,
    epsilon: f64,
    output: OutputTarget,
) -> Result<(), CliError> {
    let (sys, name) = load_system(&source)?;
    let nf = to_normal_form(&sys)?;
    let targets = match targets {
        Some(t) if !t.is_empty() => t,
        _ => scenarios::default_targets(&name)
            .ok_or_else(|| CliError::usage("--targets required for custom configs".into()))?,
    };
    let design = design_perturbation(&nf.system, &targets)?;
    let cap = targets.iter().fold(10.0f64, |m, &t| m.max(2.0 * t));
    let zeros = find_zeros(&design.form, ZeroScan { grid: 512, cap: Some(cap) })?;
    let designed = nf.system.with_perturbation(design.left, design.center, design.right, 0.0);
    let hs: Vec<f64> = zeros.zeros.iter().map(|z| z.h).collect();
    let searches = locate_limit_cycles(&designed, epsilon, &hs, &design.form)?;

    #[derive(Serialize)]
    struct CertificateJson {
        h_star: f64,
        predicted_h: f64,
        fixed_point_residual: f64,
        multiplier_estimate: f64,
        epsilon: f64,
    }
    #[derive(Serialize)]
    struct MissJson {
        predicted_h: f64,
        reason: String,
    }
    #[derive(Serialize)]
    struct ValidateJson {
        name: String,
        expected_cycles: usize,
        zeros: Vec<ZeroJson>,
        certificates: Vec<CertificateJson>,
        missed: Vec<MissJson>,
        design: DesignJson,
        ok: bool,
    }

    let mut certificates = Vec::new();
    let mut missed = Vec::new();
    for s in &searches {
        match s {
            CycleSearch::Found(c) => certificates.push(CertificateJson {
                h_star: c.h_star,
                predicted_h: c.predicted_h,
                fixed_point_residual: c.fixed_point_residual,
                multiplier_estimate: c.multiplier_estimate,
                epsilon: c.epsilon,
            }),
            CycleSearch::NotFound { predicted_h, reason } => missed.push(MissJson {
                predicted_h: *predicted_h,
                reason: reason.clone(),
            }),
        }
    }
    let ok = certificates.len() == targets.len() && missed.is_empty();
    let doc = ValidateJson {
        name,
        expected_cycles: targets.len(),
        zeros: zeros
            .zeros
            .iter()
            .map(|z| ZeroJson {
                h: z.h,
                residual: z.residual,
                derivative: z.derivative,
                simple: z.simple,
            })
            .collect(),
        certificates,
        missed,
        design: design_json(&design),
        ok,
    };
    emit(&output, &(serde_json::to_string_pretty(&doc).unwrap() + "\n"))?;
    if ok {
        Ok(())
    } else {
        Err(CliError {
            code: 3,
            kind: "cycles-not-found",
            message: "not every predicted cycle was certified".into(),
        })
    }
}

fn cmd_wronskian(
    source: SystemSource,
    h: f64,
    fd: bool,
    format: Format,
    output: OutputTarget,
) -> Result<(), CliError> {
    let (sys, name) = load_system(&source)?;
    // scenarios evaluate their published fixture basis; custom configs use
    // the basis of their own Melnikov decomposition
    let basis = match scenarios::paper_wronskian(&name) {
        Some(fixture) => fixture.basis,
        None => {
            let nf = to_normal_form(&sys)?;
            melnikov_coefficients(&nf.system)?.basis
        }
    };
    let method = if fd {
        WronskianMethod::FiniteDifference
    } else {
        WronskianMethod::AnalyticDerivatives
    };
    let report = wronskian_with_method(&basis, h, method)?;
    let method_name = if fd { "finite-difference" } else { "analytic" };
    match format {
        Format::Json => {
            let doc = WitnessJson {
                h: report.h,
                value: report.value,
                order: report.order,
                method: method_name,
            };
            emit(&output, &(serde_json::to_string_pretty(&doc).unwrap() + "\n"))
        }
        _ => emit(
            &output,
            &format!(
                "W({}) = {} order={} method={}\n",
                sig12(h),
                sig12(report.value),
                report.order,
                method_name
            ),
        ),
    }
}

fn cmd_portrait(
    source: SystemSource,
    h: f64,
    samples: usize,
    output: OutputTarget,
) -> Result<(), CliError> {
    let (sys, _) = load_system(&source)?;
    let nf = to_normal_form(&sys)?;
    let arcs = orbit_arcs(&nf.system, h)?;
    let mut csv = String::from("zone,t,x,y\n");
    let mut t_offset = 0.0;
    for arc in arcs {
        for (t, p) in arc.sample(samples.max(2)) {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                arc.zone.name(),
                sig12(t_offset + t),
                sig12(p.x),
                sig12(p.y)
            );
        }
        t_offset += arc.flight_time;
    }
    emit(&output, &csv)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Classify { source, format, output } => cmd_classify(source, format, output),
        Command::Melnikov {
            source,
            h_min,
            h_max,
            samples,
            with_oracle,
            quad_tol,
            output,
        } => cmd_melnikov(source, h_min, h_max, samples, with_oracle, quad_tol, output),
        Command::Zeros { source, grid, h_max, output } => cmd_zeros(source, grid, h_max, output),
        Command::Design { source, targets, output } => cmd_design(source, targets, output),
        Command::Validate { source, targets, epsilon, output } => {
            cmd_validate(source, targets, epsilon, output)
        }
        Command::Wronskian { source, h, fd, format, output } => {
            cmd_wronskian(source, h, fd, format, output)
        }
        Command::Portrait { source, h, samples, output } => {
            cmd_portrait(source, h, samples, output)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let doc = serde_json::json!({
                "error": { "kind": e.kind, "message": e.message }
            });
            eprintln!("{doc}");
            ExitCode::from(e.code)
        }
    }
}
