//! Command-line front end.
//!
//! ```text
//! lightcone simulate <scenario> [--frame-velocity V] [--format json|csv|table]
//! lightcone check-invariance <scenario> [--tolerance T]
//! lightcone check-no-signaling <scenario> [--target ID] [--trials N] [--seed S]
//! lightcone check-povm <scenario>
//! lightcone demo <name>
//! ```
//!
//! `<scenario>` is a path to a scenario file or one of the built-in names
//! listed by [`BUILTINS`]. Exit status is 0 iff every executed check passed,
//! 1 if a check failed, 2 on input or validation errors.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::json;
use thiserror::Error;

use crate::certify::{check_no_signaling, check_order_invariance, record_spread, NoSignalingReport};
use crate::complexmat::GATE_TOL;
use crate::experiment::{EvaluationResult, ExperimentError, Scenario};
use crate::intervention::{random_intervention, Intervention, LocalIntervention};
use crate::random;
use crate::scenarios;
use crate::schema::{parse_scenario, ParseError};
use crate::spacetime::{classify, frame_ordering, Frame, FrameOrdering, IntervalKind, SpacetimeError};

/// Built-in scenarios accepted in place of a file path.
pub const BUILTINS: [&str; 4] = ["eprb", "counterexample", "dimension-change", "teleported-eprb"];

/// Demos runnable with `demo <name>`.
pub const DEMOS: [&str; 6] = [
    "eprb",
    "chsh",
    "frame-flip",
    "counterexample",
    "dimension-change",
    "no-signaling",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Spacetime(#[from] SpacetimeError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Enumerate record probabilities in one frame's chronological order.
    Simulate { scenario: String },
    /// Compare record probabilities across every admissible chronological order.
    CheckInvariance { scenario: String },
    /// Vary each spacelike station's intervention and compare the others' marginals.
    CheckNoSignaling {
        scenario: String,
        /// Only check this station's marginal.
        #[arg(long)]
        target: Option<String>,
    },
    /// Report completeness of every intervention's POVM.
    CheckPovm { scenario: String },
    /// Run a built-in demonstration.
    Demo {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(DEMOS))]
        name: String,
    },
}

/// Parsed invocation.
#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "lightcone", version, about = "Kraus interventions at spacetime events")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Boost velocity of the evaluation frame, |v| < 1.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub frame_velocity: Option<f64>,
    #[arg(long, global = true, default_value_t = GATE_TOL)]
    pub tolerance: f64,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Random alternatives per varied station in no-signaling sweeps.
    #[arg(long, global = true, default_value_t = 4)]
    pub trials: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(v) = self.frame_velocity {
            Frame::new(v)?;
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(CliError::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }

    fn frame(&self) -> Result<Frame, CliError> {
        Ok(Frame::new(self.frame_velocity.unwrap_or(0.0))?)
    }
}

/// Resolve a scenario argument: an existing file, else a built-in name.
pub fn load_scenario(arg: &str) -> Result<Scenario, CliError> {
    let path = Path::new(arg);
    if path.exists() {
        let bytes = std::fs::read(path).map_err(|source| CliError::Io {
            path: arg.to_owned(),
            source,
        })?;
        return Ok(parse_scenario(&bytes)?);
    }
    builtin(arg).ok_or_else(|| {
        CliError::Config(format!(
            "`{arg}` is neither a readable file nor a built-in scenario ({})",
            BUILTINS.join(", ")
        ))
    })
}

pub fn builtin(name: &str) -> Option<Scenario> {
    Some(match name {
        "eprb" => {
            scenarios::eprb(0.0, std::f64::consts::FRAC_PI_3, scenarios::standard_layout()).expect("spacelike layout")
        }
        "counterexample" => scenarios::noncommuting_counterexample(),
        "dimension-change" => scenarios::dimension_change_scenario(),
        "teleported-eprb" => scenarios::teleported_eprb(0.0, std::f64::consts::FRAC_PI_3),
        _ => return None,
    })
}

/// Execute `cfg`, writing the report to `out`. Returns the process exit status.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> i32 {
    match execute(cfg, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            2
        }
    }
}

/// Like [`run`], but errors are returned rather than printed.
pub fn execute(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    cfg.validate()?;
    match &cfg.command {
        Command::Simulate { scenario } => simulate(cfg, &load_scenario(scenario)?, out),
        Command::CheckInvariance { scenario } => invariance(cfg, &load_scenario(scenario)?, out),
        Command::CheckNoSignaling { scenario, target } => {
            no_signaling(cfg, &load_scenario(scenario)?, target.as_deref(), out)
        }
        Command::CheckPovm { scenario } => povm(cfg, &load_scenario(scenario)?, out),
        Command::Demo { name } => demo(cfg, name, out),
    }
}

fn simulate(cfg: &RunConfig, s: &Scenario, out: &mut dyn Write) -> Result<bool, CliError> {
    let frame = cfg.frame()?;
    match frame_ordering(&s.events(), frame) {
        FrameOrdering::Total(order) => {
            let r = s.evaluate_in_order(&order)?;
            write_result(cfg.format, &r, out)?;
            Ok(true)
        }
        FrameOrdering::Tie(report) => {
            let results = report
                .resolutions()
                .into_iter()
                .filter(|o| s.causal_order().admits(o))
                .map(|o| s.evaluate_in_order(&o))
                .collect::<Result<Vec<_>, _>>()?;
            let worst = results
                .iter()
                .flat_map(|a| results.iter().map(move |b| record_spread(a, b)))
                .fold(0.0, f64::max);
            let ok = worst <= cfg.tolerance;
            match cfg.format {
                Format::Json => {
                    let v = json!({
                        "tie": report,
                        "resolutions": results.iter().map(EvaluationResult::to_json).collect::<Vec<_>>(),
                        "worst": worst,
                        "ok": ok,
                    });
                    writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"))?;
                }
                _ => {
                    let tied: Vec<String> = report.tied().map(|g| g.join(" = ")).collect();
                    writeln!(out, "tie at v = {}: {}", report.velocity, tied.join(", "))?;
                    for r in &results {
                        write_result(cfg.format, r, out)?;
                    }
                    writeln!(out, "resolutions agree within {worst:.3e}: {}", pass(ok))?;
                }
            }
            Ok(ok)
        }
    }
}

fn write_result(format: Format, r: &EvaluationResult, out: &mut dyn Write) -> Result<(), CliError> {
    match format {
        Format::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(&r.to_json()).expect("json"))?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header: Vec<&str> = r.ordering.iter().map(String::as_str).collect();
            header.push("probability");
            w.write_record(&header)?;
            for rec in &r.records {
                let mut row: Vec<String> = r.ordering.iter().map(|id| rec.outcomes[id].clone()).collect();
                row.push(format!("{}", rec.probability));
                w.write_record(&row)?;
            }
            out.write_all(&w.into_inner().map_err(|e| e.into_error())?)?;
        }
        Format::Table => {
            writeln!(out, "ordering: {}", r.ordering.join(" -> "))?;
            let width = r
                .ordering
                .iter()
                .map(|id| id.len())
                .chain(r.records.iter().flat_map(|x| x.outcomes.values().map(String::len)))
                .max()
                .unwrap_or(1)
                .max(4);
            let mut line = String::new();
            for id in &r.ordering {
                line.push_str(&format!("{id:>width$}  "));
            }
            writeln!(out, "{line}probability")?;
            for rec in &r.records {
                let mut line = String::new();
                for id in &r.ordering {
                    line.push_str(&format!("{:>width$}  ", rec.outcomes[id]));
                }
                writeln!(out, "{line}{:.12}", rec.probability)?;
            }
            writeln!(out, "total probability: {:.12}", r.total_probability())?;
        }
    }
    Ok(())
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn invariance(cfg: &RunConfig, s: &Scenario, out: &mut dyn Write) -> Result<bool, CliError> {
    let report = check_order_invariance(s, cfg.tolerance)?;
    match cfg.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("json"))?,
        Format::Csv => {
            writeln!(out, "ok,worst,orders_checked")?;
            writeln!(out, "{},{},{}", report.ok, report.worst, report.orders_checked)?;
        }
        Format::Table => {
            writeln!(
                out,
                "order invariance over {} admissible orders: worst spread {:.3e} (tolerance {:.1e}) {}",
                report.orders_checked,
                report.worst,
                cfg.tolerance,
                pass(report.ok)
            )?;
            if let Some(w) = &report.witness {
                let rec: Vec<String> = w.record.iter().map(|(k, v)| format!("{k}={v}")).collect();
                writeln!(out, "  record {}", rec.join(" "))?;
                writeln!(out, "  p = {:.12} in order {}", w.high, w.high_order.join(" -> "))?;
                writeln!(out, "  p = {:.12} in order {}", w.low, w.low_order.join(" -> "))?;
            }
        }
    }
    Ok(report.ok)
}

/// Random complete alternatives for a station: same subsystem, input dimension
/// and output dimensions, so stations later on the same factor still fit.
pub fn random_alternatives(local: &LocalIntervention, trials: usize, seed: u64) -> Vec<LocalIntervention> {
    let mut rng = random::rng(seed);
    let d = local.local.d_in();
    let out_dims: Vec<usize> = local.local.outcomes().iter().map(|o| o.d_out()).collect();
    let mut alts = Vec::with_capacity(trials + 1);
    if out_dims.iter().all(|&o| o == d) {
        alts.push(LocalIntervention::new(
            local.subsystem,
            Intervention::identity(d, "idle"),
        ));
    }
    for _ in 0..trials {
        let n = rng.random_range(1..=3);
        let dims: Vec<usize> = (0..n).map(|_| out_dims[rng.random_range(0..out_dims.len())]).collect();
        alts.push(LocalIntervention::new(
            local.subsystem,
            random_intervention(d, &dims, rng.random()),
        ));
    }
    alts
}

fn no_signaling(cfg: &RunConfig, s: &Scenario, target: Option<&str>, out: &mut dyn Write) -> Result<bool, CliError> {
    if let Some(t) = target {
        s.station(t)?;
    }
    let seed = cfg.seed.unwrap_or(0);
    let mut reports: Vec<NoSignalingReport> = Vec::new();
    for (ti, t) in s.stations().iter().enumerate() {
        if target.is_some_and(|x| x != t.id()) {
            continue;
        }
        for (vi, v) in s.stations().iter().enumerate() {
            if ti == vi || classify(&t.event, &v.event) != IntervalKind::Spacelike {
                continue;
            }
            let alts = random_alternatives(&v.local, cfg.trials, seed.wrapping_add((ti * 64 + vi) as u64));
            reports.push(check_no_signaling(s, t.id(), v.id(), &alts, cfg.tolerance)?);
        }
    }
    let ok = reports.iter().all(|r| r.ok);
    match cfg.format {
        Format::Json => {
            let v = json!({"ok": ok, "worst": reports.iter().map(|r| r.worst).fold(0.0, f64::max), "checks": reports});
            writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"))?;
        }
        Format::Csv => {
            writeln!(out, "target,varied,alternatives,worst,ok")?;
            for r in &reports {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.target,
                    r.varied,
                    r.marginals.len() - 1,
                    r.worst,
                    r.ok
                )?;
            }
        }
        Format::Table => {
            if reports.is_empty() {
                writeln!(out, "no spacelike station pairs to check")?;
            }
            for r in &reports {
                writeln!(
                    out,
                    "marginal of {} under {} alternatives at {}: spread {:.3e} {}",
                    r.target,
                    r.marginals.len() - 1,
                    r.varied,
                    r.worst,
                    pass(r.ok)
                )?;
            }
        }
    }
    Ok(ok)
}

fn povm(cfg: &RunConfig, s: &Scenario, out: &mut dyn Write) -> Result<bool, CliError> {
    let mut rows = Vec::new();
    for st in s.stations() {
        let mut ivs = vec![("default".to_owned(), &st.local)];
        for (i, c) in st.conditional.iter().enumerate() {
            ivs.push((format!("conditional[{i}]"), &c.local));
        }
        for (which, liv) in ivs {
            let defect = liv.local.completeness_defect();
            let herm = liv
                .local
                .povm_elements()
                .iter()
                .map(|(_, e)| e.hermiticity_defect())
                .fold(0.0, f64::max);
            rows.push((st.id().to_owned(), which, defect, herm, defect <= cfg.tolerance));
        }
    }
    let ok = rows.iter().all(|r| r.4);
    match cfg.format {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|(id, which, d, h, ok)| {
                    json!({"station": id, "intervention": which, "completeness_defect": d, "hermiticity_defect": h, "ok": ok})
                })
                .collect();
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&json!({"ok": ok, "checks": v})).expect("json")
            )?;
        }
        Format::Csv => {
            writeln!(out, "station,intervention,completeness_defect,hermiticity_defect,ok")?;
            for (id, which, d, h, ok) in &rows {
                writeln!(out, "{id},{which},{d},{h},{ok}")?;
            }
        }
        Format::Table => {
            for (id, which, d, h, ok) in &rows {
                writeln!(
                    out,
                    "{id} ({which}): |sum E - I| = {d:.3e}, hermiticity {h:.1e} {}",
                    pass(*ok)
                )?;
            }
        }
    }
    Ok(ok)
}

fn demo(cfg: &RunConfig, name: &str, out: &mut dyn Write) -> Result<bool, CliError> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, SQRT_2};
    let tol = cfg.tolerance;
    match name {
        "eprb" => {
            let s = scenarios::eprb(0.0, FRAC_PI_3, scenarios::standard_layout())?;
            let r = s.evaluate_in_order(&s.rest_order())?;
            write_result(Format::Table, &r, out)?;
            let p = r.probability_of(&[("A", "+"), ("B", "+")]);
            let expected = (1.0 - FRAC_PI_3.cos()) / 4.0;
            writeln!(
                out,
                "singlet, analyzers 60 degrees apart: p(+,+) = {p:.12}, (1 - cos 60)/4 = {expected}"
            )?;
            let m = r.marginal("B")?;
            writeln!(out, "Bob's marginal: {m:?}")?;
            Ok((p - expected).abs() <= tol)
        }
        "chsh" => {
            let s = scenarios::chsh((0.0, FRAC_PI_2), (FRAC_PI_4, -FRAC_PI_4));
            writeln!(out, "CHSH at a = (0, pi/2), b = (pi/4, -pi/4): S = {s:.12}")?;
            writeln!(
                out,
                "local hidden variables allow S <= 2; quantum maximum 2 sqrt 2 = {:.12}",
                2.0 * SQRT_2
            )?;
            Ok((s - 2.0 * SQRT_2).abs() <= tol)
        }
        "frame-flip" => {
            let s = scenarios::eprb(0.3, 1.4, scenarios::standard_layout())?;
            let rest = s.evaluate_in_frame(Frame::REST)?;
            let moving = s.evaluate_in_frame(Frame::new(-0.6)?)?;
            writeln!(out, "frame v = 0:    {}", rest.ordering.join(" then "))?;
            writeln!(out, "frame v = -0.6: {}", moving.ordering.join(" then "))?;
            let spread = record_spread(&rest, &moving);
            writeln!(
                out,
                "largest record-probability difference between the two frames: {spread:.3e}"
            )?;
            Ok(rest.ordering != moving.ordering && spread <= tol)
        }
        "counterexample" => {
            let s = scenarios::noncommuting_counterexample();
            let report = check_order_invariance(&s, tol)?;
            let zx = s.evaluate_in_order(&["A".into(), "B".into()])?;
            let xz = s.evaluate_in_order(&["B".into(), "A".into()])?;
            let rec = [("A", "+"), ("B", "+")];
            writeln!(
                out,
                "sigma_z and sigma_x on the same qubit at spacelike events, rho0 = |0><0|"
            )?;
            writeln!(out, "z first: p(+,+) = {:.12}", zx.probability_of(&rec))?;
            writeln!(out, "x first: p(+,+) = {:.12}", xz.probability_of(&rec))?;
            writeln!(
                out,
                "order-invariance check: worst spread {:.3e}, flagged = {}",
                report.worst, !report.ok
            )?;
            Ok(!report.ok && report.worst >= 0.25 - tol)
        }
        "dimension-change" => {
            let s = scenarios::dimension_change_scenario();
            let ab = s.evaluate_in_order(&["A".into(), "B".into()])?;
            let ba = s.evaluate_in_order(&["B".into(), "A".into()])?;
            let chain = |r: &EvaluationResult| r.records[0].chain_dims.clone();
            writeln!(out, "A first: state dimensions {:?}", chain(&ab))?;
            writeln!(out, "B first: state dimensions {:?}", chain(&ba))?;
            let (v, residual) = scenarios::summed_channel_isometry(&scenarios::teleport_intervention(3));
            writeln!(out, "A's summed channel is V rho V^dagger with |V^dagger V - I| = {:.3e} (rank-one residual {residual:.1e})", v.isometry_defect())?;
            let spread = record_spread(&ab, &ba);
            writeln!(out, "record probabilities agree across orders within {spread:.3e}")?;
            let dims_ok = ab.records.iter().all(|r| r.chain_dims == [4, 6, 15])
                && ba.records.iter().all(|r| r.chain_dims == [4, 10, 15]);
            Ok(dims_ok && spread <= tol && v.isometry_defect() <= tol)
        }
        "no-signaling" => {
            let s = scenarios::eprb(0.0, 0.0, scenarios::standard_layout())?;
            let alts: Vec<LocalIntervention> = [FRAC_PI_2, FRAC_PI_4]
                .iter()
                .map(|&a| LocalIntervention::new(0, scenarios::AnalyzerDirection::new(a).measurement()))
                .chain(std::iter::once(LocalIntervention::new(
                    0,
                    Intervention::identity(2, "idle"),
                )))
                .collect();
            let r = check_no_signaling(&s, "B", "A", &alts, tol)?;
            let names = ["sigma_z", "sigma_x", "45 degrees", "no measurement"];
            for (name, m) in names.iter().zip(&r.marginals) {
                let m: BTreeMap<_, _> = m.iter().map(|(k, v)| (k.clone(), format!("{v:.12}"))).collect();
                writeln!(out, "Alice {name:>14}: Bob sees {m:?}")?;
            }
            writeln!(out, "spread {:.3e} {}", r.worst, pass(r.ok))?;
            Ok(r.ok)
        }
        other => Err(CliError::Config(format!(
            "unknown demo `{other}` (try {})",
            DEMOS.join(", ")
        ))),
    }
}
