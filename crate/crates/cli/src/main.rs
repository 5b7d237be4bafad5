//! `polydisc`: classification, normal forms, Valiron/Abel functions and
//! orbit statistics for automorphisms and self-maps of the poly-halfplane.

mod input;

use std::f64::consts::PI;
use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use polydisc::dynamics::{
    builtin_intro_example, builtin_remark5_example, classify_selfmap, orbit_stats, ClassifyOptions,
    HoloSelfMap, DEFAULT_EPS_FIX,
};
use polydisc::funceq::{
    abel_for_auto_with, check_valiron_conditions, surjectivity_witness, target_grid,
    valiron_for_auto_with, verify_abel, verify_semimodel, verify_valiron, AbelFunction,
    SamplingOptions, SemiModelTriple, ValironFunction, VerificationReport,
};
use polydisc::geometry::{dist_poly, PolyPoint};
use polydisc::normalform::normal_form_auto_with;
use polydisc::polyauto::{PolydiscAuto, Space};

use input::{AbelInput, DistanceInput, SemiModelInput, ValironInput};

#[derive(Debug, Error)]
enum CliError {
    #[error("malformed input: {0}")]
    Input(String),
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    Residual { residual: f64, tol: f64 },
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Domain(_) | CliError::Residual { .. } => 2,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "UPPER")]
enum SpaceArg {
    H,
    D,
}

impl From<SpaceArg> for Space {
    fn from(s: SpaceArg) -> Space {
        match s {
            SpaceArg::H => Space::H,
            SpaceArg::D => Space::D,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BuiltinMap {
    Intro,
    Remark5,
    Lft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Identity {
    Valiron,
    Abel,
    Semimodel,
}

/// Dynamics of automorphisms and self-maps of the poly-halfplane ℍ^q.
#[derive(Debug, Parser)]
#[command(name = "polydisc", version)]
struct RunConfig {
    #[command(subcommand)]
    command: Command,
    /// Coordinates of the input; `D` inputs are Cayley-converted to ℍ.
    #[arg(long, value_enum, ignore_case = true, global = true)]
    space: Option<SpaceArg>,
    /// Trace tolerance separating elliptic, parabolic and hyperbolic maps.
    #[arg(long, default_value_t = 1e-9, global = true)]
    eps_cls: f64,
    /// Divergence-rate threshold for black-box classification.
    #[arg(long, default_value_t = 1e-2, global = true)]
    eps_c: f64,
    /// Largest accepted verification residual.
    #[arg(long, default_value_t = 1e-9, global = true)]
    residual_tol: f64,
    #[arg(long, default_value_t = 100, global = true)]
    samples: usize,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify an automorphism.
    Classify {
        /// JSON file, inline JSON, or `-` for standard input.
        input: String,
    },
    /// Decompose an automorphism into cycle automorphisms.
    Cycles { input: String },
    /// Normal form of every cycle, with the hyperbolic split.
    Normalform { input: String },
    /// Construct and verify a Valiron function of a hyperbolic automorphism.
    Valiron { input: String },
    /// Construct and verify an Abel function of a parabolic automorphism.
    Abel { input: String },
    /// Distances between pairs of points.
    Distance { input: String },
    /// Orbit statistics and heuristic classification of a self-map.
    Estimate {
        #[arg(long, value_enum)]
        map: BuiltinMap,
        /// Map specification for `--map lft`.
        input: Option<String>,
        /// Argument of λ for the intro map, e.g. `0.5pi` or `1.5708`.
        #[arg(long, default_value = "0.5pi")]
        lambda_arg: String,
        /// Parameter of the remark5 map.
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        /// Base point as JSON `[[re, im], …]`, in `--space` coordinates.
        #[arg(long)]
        base: Option<String>,
        /// Orbit length.
        #[arg(long, default_value_t = 10_000)]
        m: usize,
    },
    /// Check a Valiron, Abel or semi-model identity.
    Verify {
        #[arg(value_enum)]
        identity: Identity,
        input: String,
    },
}

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(msg) = cfg.validate() {
        eprintln!("polydisc: {msg}");
        return ExitCode::from(1);
    }
    match run(&cfg) {
        Ok(out) => {
            write_stdout(&out);
            ExitCode::SUCCESS
        }
        Err((out, e)) => {
            if let Some(out) = out {
                write_stdout(&out);
            }
            eprintln!("polydisc: {e}");
            ExitCode::from(e.code())
        }
    }
}

/// A closed pipe downstream is not an error of ours.
fn write_stdout(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

impl RunConfig {
    fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("eps-cls", self.eps_cls),
            ("eps-c", self.eps_c),
            ("residual-tol", self.residual_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("--{name} must be positive, got {v}"));
            }
        }
        if self.samples == 0 {
            return Err("--samples must be positive".into());
        }
        Ok(())
    }

    fn sampling(&self) -> SamplingOptions {
        SamplingOptions {
            samples: self.samples,
            seed: self.seed,
            ..Default::default()
        }
    }

    fn auto(&self, raw: &str) -> Result<PolydiscAuto, CliError> {
        input::auto(&input::load(raw)?, self.space.map(Space::from))
    }
}

/// Output produced before a failure is printed too.
type Failure = (Option<String>, CliError);

fn run(cfg: &RunConfig) -> Result<String, Failure> {
    let fail = |e: CliError| (None, e);
    match &cfg.command {
        Command::Classify { input } => {
            let tau = cfg.auto(input).map_err(fail)?;
            emit(cfg, &tau.classify_with(cfg.eps_cls)).map_err(fail)
        }
        Command::Cycles { input } => {
            let tau = cfg.auto(input).map_err(fail)?;
            emit(cfg, &tau.cycle_decompose()).map_err(fail)
        }
        Command::Normalform { input } => {
            let tau = cfg.auto(input).map_err(fail)?;
            let nf = normal_form_auto_with(&tau, cfg.eps_cls);
            let out = emit(cfg, &nf).map_err(fail)?;
            let residual = nf
                .verify(cfg.samples, cfg.seed)
                .map_err(|e| fail(domain(e)))?;
            gate(out, residual, cfg.residual_tol)
        }
        Command::Valiron { input } => {
            let tau = cfg.auto(input).map_err(fail)?;
            let v = valiron_for_auto_with(&tau, cfg.eps_cls).map_err(|e| fail(domain(e)))?;
            let report = valiron_report(cfg, &v, &tau).map_err(fail)?;
            let out = emit(cfg, &json!({ "function": v, "report": report })).map_err(fail)?;
            gate(out, report.residual, cfg.residual_tol)
        }
        Command::Abel { input } => {
            let tau = cfg.auto(input).map_err(fail)?;
            let a = abel_for_auto_with(&tau, cfg.eps_cls).map_err(|e| fail(domain(e)))?;
            let report = abel_report(cfg, &a, &tau).map_err(fail)?;
            let out = emit(cfg, &json!({ "function": a, "report": report })).map_err(fail)?;
            gate(out, report.residual, cfg.residual_tol)
        }
        Command::Distance { input } => distance(cfg, input).map_err(fail),
        Command::Estimate {
            map,
            input,
            lambda_arg,
            alpha,
            base,
            m,
        } => estimate(
            cfg,
            *map,
            input.as_deref(),
            lambda_arg,
            *alpha,
            base.as_deref(),
            *m,
        )
        .map_err(fail),
        Command::Verify { identity, input } => verify(cfg, *identity, input),
    }
}

fn gate(out: String, residual: f64, tol: f64) -> Result<String, Failure> {
    if residual > tol || residual.is_nan() {
        Err((Some(out), CliError::Residual { residual, tol }))
    } else {
        Ok(out)
    }
}

fn emit<T: Serialize>(cfg: &RunConfig, value: &T) -> Result<String, CliError> {
    let text = match cfg.format {
        Format::Json => serde_json::to_string(value),
        Format::Pretty => serde_json::to_string_pretty(value),
        Format::Csv => {
            return Err(CliError::Input(
                "CSV output is available for `distance` and `estimate` only".into(),
            ))
        }
    };
    text.map(|s| s + "\n")
        .map_err(|e| CliError::Input(e.to_string()))
}

fn valiron_report(
    cfg: &RunConfig,
    v: &ValironFunction,
    tau: &PolydiscAuto,
) -> Result<VerificationReport, CliError> {
    let f = HoloSelfMap::from_auto(tau);
    verify_valiron(&|z| v.eval(z), &f, v.lambda, &cfg.sampling()).map_err(domain)
}

fn abel_report(
    cfg: &RunConfig,
    a: &AbelFunction,
    tau: &PolydiscAuto,
) -> Result<VerificationReport, CliError> {
    let f = HoloSelfMap::from_auto(tau);
    verify_abel(&|z| a.eval(z), &f, a.alpha as f64, &cfg.sampling()).map_err(domain)
}

fn distance(cfg: &RunConfig, raw: &str) -> Result<String, CliError> {
    let req: DistanceInput = input::parse(&input::load(raw)?)?;
    let space = cfg.space.map(Space::from).unwrap_or(req.space);
    let distances = req
        .pairs
        .iter()
        .map(|[z, w]| {
            let z = input::point(z, space)?;
            let w = input::point(w, space)?;
            dist_poly(&z, &w).map_err(domain)
        })
        .collect::<Result<Vec<f64>, _>>()?;
    match cfg.format {
        Format::Csv => {
            let mut out = String::from("index,distance\n");
            for (i, d) in distances.iter().enumerate() {
                out += &format!("{i},{d}\n");
            }
            Ok(out)
        }
        _ => emit(cfg, &json!({ "distances": distances })),
    }
}

/// Parses `0.5pi`, `pi/2`, `pi` or a plain number of radians.
fn parse_angle(s: &str) -> Result<f64, CliError> {
    let bad = || CliError::Input(format!("cannot read angle `{s}`"));
    let t = s.trim().to_ascii_lowercase().replace('π', "pi");
    if let Some(rest) = t.strip_prefix("pi/") {
        return rest.parse::<f64>().map(|d| PI / d).map_err(|_| bad());
    }
    if let Some(coef) = t.strip_suffix("pi") {
        let coef = coef.trim_end_matches('*');
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        return Ok(c * PI);
    }
    t.parse::<f64>().map_err(|_| bad())
}

fn estimate(
    cfg: &RunConfig,
    map: BuiltinMap,
    raw: Option<&str>,
    lambda_arg: &str,
    alpha: f64,
    base: Option<&str>,
    m: usize,
) -> Result<String, CliError> {
    let f = match map {
        BuiltinMap::Intro => {
            let theta = parse_angle(lambda_arg)?;
            builtin_intro_example(Complex64::from_polar(1.0, theta)).map_err(domain)?
        }
        BuiltinMap::Remark5 => {
            builtin_remark5_example(alpha).map_err(|e| CliError::Input(e.to_string()))?
        }
        BuiltinMap::Lft => {
            let raw =
                raw.ok_or_else(|| CliError::Input("`--map lft` needs a map specification".into()))?;
            HoloSelfMap::from_auto(&cfg.auto(raw)?)
        }
    };
    let x = match base {
        Some(b) => {
            let coords: Vec<[f64; 2]> = input::parse(&input::load(b)?)?;
            input::point(&coords, cfg.space.map(Space::from).unwrap_or_default())?
        }
        None => PolyPoint::center(f.dim()),
    };
    if x.dim() != f.dim() {
        return Err(CliError::Input(format!(
            "base point has {} coordinates, the map acts on dimension {}",
            x.dim(),
            f.dim()
        )));
    }
    let stats = orbit_stats(&f, &x, m).map_err(domain)?;
    if cfg.format == Format::Csv {
        return stats.to_csv().map_err(|e| CliError::Input(e.to_string()));
    }
    let opts = ClassifyOptions {
        x: Some(x),
        m,
        eps_c: cfg.eps_c,
        eps_fix: DEFAULT_EPS_FIX,
    };
    let classification = classify_selfmap(&f, &opts).map_err(domain)?;
    emit(
        cfg,
        &json!({
            "map": f.description(),
            "classification": classification,
            "stats": stats,
        }),
    )
}

fn verify(cfg: &RunConfig, identity: Identity, raw: &str) -> Result<String, Failure> {
    let fail = |e: CliError| (None, e);
    let value = input::load(raw).map_err(fail)?;
    let space = cfg.space.map(Space::from);
    let (out, residual) = match identity {
        Identity::Valiron => {
            let req: ValironInput = input::parse(&value).map_err(fail)?;
            let tau = input::auto(&req.auto, space).map_err(fail)?;
            let v = match req.function {
                Some(v) => v,
                None => valiron_for_auto_with(&tau, cfg.eps_cls).map_err(|e| fail(domain(e)))?,
            };
            if v.q != tau.dim() {
                return Err(fail(CliError::Input(format!(
                    "function on H^{} for an automorphism of H^{}",
                    v.q,
                    tau.dim()
                ))));
            }
            let report = valiron_report(cfg, &v, &tau).map_err(fail)?;
            let eval = |z: &PolyPoint| v.eval(z);
            let conditions = check_valiron_conditions(&eval, &tau, cfg.samples, cfg.seed).ok();
            let surjectivity = surjectivity_witness(&v, &tau, &target_grid()).ok();
            let out = emit(
                cfg,
                &json!({ "report": report, "conditions": conditions, "surjectivity": surjectivity }),
            )
            .map_err(fail)?;
            (out, report.residual)
        }
        Identity::Abel => {
            let req: AbelInput = input::parse(&value).map_err(fail)?;
            let tau = input::auto(&req.auto, space).map_err(fail)?;
            let a = match req.function {
                Some(a) => a,
                None => abel_for_auto_with(&tau, cfg.eps_cls).map_err(|e| fail(domain(e)))?,
            };
            if a.q != tau.dim() {
                return Err(fail(CliError::Input(format!(
                    "function on H^{} for an automorphism of H^{}",
                    a.q,
                    tau.dim()
                ))));
            }
            let report = abel_report(cfg, &a, &tau).map_err(fail)?;
            (
                emit(cfg, &json!({ "report": report })).map_err(fail)?,
                report.residual,
            )
        }
        Identity::Semimodel => {
            let req: SemiModelInput = input::parse(&value).map_err(fail)?;
            let tau = input::auto(&req.map, space).map_err(fail)?;
            let base = input::auto(&req.base, space).map_err(fail)?;
            let coords = req.projection(tau.dim()).map_err(fail)?;
            if coords.len() != base.dim() {
                return Err(fail(CliError::Input(format!(
                    "projection onto {} coordinates but the base acts on H^{}",
                    coords.len(),
                    base.dim()
                ))));
            }
            let sm = SemiModelTriple::new(
                move |z: &PolyPoint| PolyPoint::new(coords.iter().map(|&j| *z.coord(j)).collect()),
                base,
            );
            let f = HoloSelfMap::from_auto(&tau);
            let report = verify_semimodel(&sm, &f, &cfg.sampling()).map_err(|e| fail(domain(e)))?;
            (
                emit(cfg, &json!({ "report": report })).map_err(fail)?,
                report.residual,
            )
        }
    };
    gate(out, residual, cfg.residual_tol)
}
