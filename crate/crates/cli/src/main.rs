//! `nearfar` command-line front end.
//!
//! Exit status: 0 on success, 1 when a numerical boundary did not converge
//! (results are still printed) or a run failed, 2 on invalid arguments.

mod args;
mod render;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nearfar::analysis::{
    capacity, capacity_error_of, covariance, db_to_linear, edof, edof_ratio_of,
    hermitian_eigenvalues,
};
use nearfar::boundary::{
    bjornson, capacity_threshold, closed_form_ebd, critical_distance, effective_rayleigh,
    eigen_threshold, equi_power, mimo_ard, projected_aperture, rayleigh, solve_numerical,
    uniform_power_distance, BoundaryCriterion, BoundaryResult, Objective,
};
use nearfar::channel::{composite_channel, los_channel_pwm, WavefrontModel};
use nearfar::experiments::{linspace, resolved_config, run, ExperimentConfig};
use nearfar::geometry::{ArraySpec, LinkScene, SceneKind};
use nearfar::Error;
use serde_json::{Map, Value};

use args::{
    BoundaryArgs, CapacityArgs, Cli, Command, CriterionChoice, ExperimentArgs, Format, PointArgs,
    SweepArgs,
};
use render::{num, Table};

enum Failure {
    Usage(String),
    Runtime(String),
    /// The reader of standard output went away; nothing left to report.
    BrokenPipe,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGeometry(_)
            | Error::InvalidParameter(_)
            | Error::InvalidBracket { .. }
            | Error::CoincidentElements { .. } => Failure::Usage(e.to_string()),
            Error::Io(io) if io.kind() == io::ErrorKind::BrokenPipe => Failure::BrokenPipe,
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Failure::BrokenPipe;
        }
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

/// Default parameters of every experiment, for `experiment --help`.
pub(crate) fn experiment_defaults() -> String {
    let mut text = String::from("Defaults (override with --config or --set):\n");
    for id in nearfar::experiments::ExperimentId::ALL {
        let resolved = resolved_config(&ExperimentConfig::new(id)).expect("defaults resolve");
        text.push_str(&format!("\n  {id}: {resolved}\n"));
    }
    text
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Boundary(a) => boundary(&a),
        Command::Edof(a) => edof_cmd(&a),
        Command::Capacity(a) => capacity_cmd(&a),
        Command::Sweep(a) => sweep(&a),
        Command::Experiment(a) => experiment(&a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("nearfar: at least one boundary did not converge");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("nearfar: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("nearfar: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::BrokenPipe) => ExitCode::SUCCESS,
    }
}

/// Transmit extent and element spacing seen by the product-form criteria,
/// plus the off-broadside angles at each end.
fn product_geometry(scene: &LinkScene) -> (f64, f64, f64, f64) {
    match (&scene.tx, scene.kind) {
        (ArraySpec::Ula { elements, length }, SceneKind::UlaToUla { alpha, beta }) => (
            *length,
            length / (*elements as f64 - 1.0),
            alpha,
            alpha + beta,
        ),
        (
            ArraySpec::Ura {
                elements_z,
                length_x,
                length_z,
                ..
            },
            SceneKind::UraToUla { theta },
        ) => (
            projected_aperture(*length_x, *length_z, theta),
            length_z / (*elements_z as f64 - 1.0),
            0.0,
            0.0,
        ),
        (tx, _) => (tx.aperture(), 0.0, 0.0, 0.0),
    }
}

fn boundary_results(a: &BoundaryArgs) -> Result<Vec<BoundaryResult>, Failure> {
    let scene = a.scene.scene(1.0)?;
    let lambda = scene.wavelength;
    let d = a.aperture.unwrap_or_else(|| scene.tx.aperture());
    let dr = scene.rx.aperture();
    let (dt, tx_spacing, th_t, th_r) = product_geometry(&scene);
    let rx_spacing = match scene.rx {
        ArraySpec::Ula { elements, length } => length / (elements as f64 - 1.0),
        ArraySpec::Ura { .. } => unreachable!("user arrays are ULAs"),
    };
    let bracket = a.lo.zip(a.hi);
    let numerical = |objective: Objective| solve_numerical(&scene, objective, bracket);
    let closed = BoundaryResult::closed;
    let all = a.criterion == CriterionChoice::All;
    let wants = |c: CriterionChoice| all || a.criterion == c;

    let mut out = Vec::new();
    if wants(CriterionChoice::Rayleigh) {
        out.push(closed(
            BoundaryCriterion::Rayleigh {
                point_to_array: true,
            },
            rayleigh(0.0, d, lambda, true),
        ));
    }
    if wants(CriterionChoice::RayleighArray) {
        out.push(closed(
            BoundaryCriterion::Rayleigh {
                point_to_array: false,
            },
            rayleigh(scene.tx.aperture(), dr, lambda, false),
        ));
    }
    if wants(CriterionChoice::MimoArd) {
        out.push(closed(BoundaryCriterion::MimoArd, mimo_ard(dt, dr, lambda)));
    }
    if wants(CriterionChoice::Critical) {
        out.push(closed(BoundaryCriterion::Critical, critical_distance(d)));
    }
    if wants(CriterionChoice::UniformPower) {
        if !(a.gamma_th > 0.0 && a.gamma_th < 1.0) {
            return Err(Failure::Usage(format!(
                "--gamma-th must lie in (0, 1), got {}",
                a.gamma_th
            )));
        }
        out.push(closed(
            BoundaryCriterion::UniformPower {
                gamma_th: a.gamma_th,
            },
            uniform_power_distance(a.gamma_th, d),
        ));
    }
    if wants(CriterionChoice::EffectiveRayleigh) {
        let phi = a.phi_deg.to_radians();
        out.push(closed(
            BoundaryCriterion::EffectiveRayleigh { phi },
            effective_rayleigh(phi, d, lambda),
        ));
    }
    if wants(CriterionChoice::Bjornson) {
        let l = a
            .element_diagonal
            .unwrap_or(std::f64::consts::SQRT_2 * lambda / 2.0);
        let n = a.n_antennas.unwrap_or_else(|| scene.tx.element_count());
        out.push(closed(
            BoundaryCriterion::Bjornson {
                element_diagonal: l,
                n_antennas: n,
            },
            bjornson(l, n),
        ));
    }
    if wants(CriterionChoice::EquiPower) {
        let planar = !scene.tx.is_ula();
        out.push(closed(
            BoundaryCriterion::EquiPower { planar },
            equi_power(d, planar),
        ));
    }
    if wants(CriterionChoice::EigenThreshold) {
        out.push(closed(
            BoundaryCriterion::EigenThreshold { tau_g: a.tau_g },
            eigen_threshold(a.tau_g, tx_spacing, rx_spacing, th_t, th_r, lambda),
        ));
    }
    if wants(CriterionChoice::CapacityThreshold) {
        out.push(closed(
            BoundaryCriterion::CapacityThreshold { epsilon: a.epsilon },
            capacity_threshold(a.epsilon, dt, dr, th_t, th_r, lambda),
        ));
    }
    if wants(CriterionChoice::Ebd) {
        out.push(numerical(Objective::EdofRatio {
            threshold: a.threshold,
        })?);
    }
    if wants(CriterionChoice::EbdClosedForm) {
        match a.aux {
            Some(aux) => out.push(closed(
                BoundaryCriterion::EbdClosedForm { aux },
                closed_form_ebd(&scene, aux)?,
            )),
            None if !all => {
                return Err(Failure::Usage(
                    "--aux is required for ebd-closed-form".into(),
                ))
            }
            None => {}
        }
    }
    if wants(CriterionChoice::Emd) {
        out.push(numerical(Objective::EigenRatio {
            db: a.eigenratio_db,
            m: a.m,
        })?);
    }
    if wants(CriterionChoice::CapacityRatio) {
        out.push(numerical(Objective::CapacityRatio {
            factor: a.factor,
            snr: db_to_linear(a.snr_db),
        })?);
    }
    Ok(out)
}

fn boundary(a: &BoundaryArgs) -> Outcome {
    let results = boundary_results(a)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if a.format == Format::Json {
        let json =
            serde_json::to_string_pretty(&results).map_err(|e| Failure::Runtime(e.to_string()))?;
        writeln!(out, "{json}")?;
    } else {
        let mut t = Table::new(vec!["criterion", "distance_m", "converged", "residual"]);
        for r in &results {
            t.push(vec![
                Value::from(r.criterion.label()),
                num(r.distance),
                Value::from(r.converged),
                num(r.residual),
            ]);
        }
        t.write(a.format, &mut out)?;
    }
    Ok(results.iter().all(|r| r.converged))
}

fn edof_cmd(a: &PointArgs) -> Outcome {
    let scene = a.scene.scene(a.distance)?;
    let swm = composite_channel(&scene, WavefrontModel::Spherical)?;
    let pwm = los_channel_pwm(&scene)?;
    let rs = edof(&swm)?;
    let rp = edof(&pwm)?;
    let mut t = Table::new(vec![
        "distance_m",
        "edof_swm",
        "edof_pwm",
        "edof_ratio",
        "rank_swm",
        "eigenvalues_swm",
    ]);
    let eig = hermitian_eigenvalues(&covariance(&swm))
        .iter()
        .map(|v| format!("{v:e}"))
        .collect::<Vec<_>>()
        .join(";");
    t.push(vec![
        num(a.distance),
        num(rs.edof),
        num(rp.edof),
        num(edof_ratio_of(&swm, &pwm)?),
        Value::from(rs.numerical_rank),
        Value::from(eig),
    ]);
    t.write(a.format, io::stdout().lock())?;
    Ok(true)
}

fn capacity_cmd(a: &CapacityArgs) -> Outcome {
    let p = &a.point;
    let scene = p.scene.scene(p.distance)?;
    let swm = composite_channel(&scene, WavefrontModel::Spherical)?;
    let pwm = los_channel_pwm(&scene)?;
    let mut t = Table::new(vec![
        "distance_m",
        "snr_db",
        "capacity_swm",
        "capacity_pwm",
        "capacity_error",
    ]);
    for &snr_db in &a.snr_db {
        let snr = db_to_linear(snr_db);
        t.push(vec![
            num(p.distance),
            num(snr_db),
            num(capacity(&swm, snr)?),
            num(capacity(&pwm, snr)?),
            num(capacity_error_of(&swm, &pwm, snr)?),
        ]);
    }
    t.write(p.format, io::stdout().lock())?;
    Ok(true)
}

fn sweep(a: &SweepArgs) -> Outcome {
    if !(a.from > 0.0 && a.to > a.from && a.points >= 2) {
        return Err(Failure::Usage(
            "sweep needs 0 < --from < --to and --points ≥ 2".into(),
        ));
    }
    let distances = if a.linear {
        linspace(a.from, a.to, a.points)
    } else {
        let ratio = a.to / a.from;
        let n = a.points - 1;
        (0..=n)
            .map(|i| match i {
                0 => a.from,
                i if i == n => a.to,
                i => a.from * ratio.powf(i as f64 / n as f64),
            })
            .collect()
    };
    let base = a.scene.scene(a.from)?;
    let snr = db_to_linear(a.snr_db);
    let mut t = Table::new(vec![
        "distance_m",
        "edof_swm",
        "edof_pwm",
        "edof_ratio",
        "capacity_swm",
        "capacity_pwm",
        "capacity_error",
    ]);
    for d in distances {
        let scene = base.with_distance(d)?;
        let swm = composite_channel(&scene, WavefrontModel::Spherical)?;
        let pwm = los_channel_pwm(&scene)?;
        t.push(vec![
            num(d),
            num(edof(&swm)?.edof),
            num(edof(&pwm)?.edof),
            num(edof_ratio_of(&swm, &pwm)?),
            num(capacity(&swm, snr)?),
            num(capacity(&pwm, snr)?),
            num(capacity_error_of(&swm, &pwm, snr)?),
        ]);
    }
    t.write(a.format, io::stdout().lock())?;
    Ok(true)
}

fn parse_overrides(a: &ExperimentArgs) -> Result<Map<String, Value>, Failure> {
    let mut map = Map::new();
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        match serde_json::from_str::<Value>(&text) {
            Ok(Value::Object(m)) => map.extend(m),
            Ok(_) => return Err(Failure::Usage("--config must hold a JSON object".into())),
            Err(e) => return Err(Failure::Usage(format!("{}: {e}", path.display()))),
        }
    }
    for kv in &a.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=JSON, got '{kv}'")))?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::from(v));
        map.insert(k.to_string(), value);
    }
    Ok(map)
}

fn experiment(a: &ExperimentArgs) -> Outcome {
    let mut config = ExperimentConfig::new(a.id)
        .with_seed(a.seed)
        .with_overrides(parse_overrides(a)?);
    let resolved = resolved_config(&config).map_err(|e| Failure::Usage(e.to_string()))?;
    if a.show_config {
        println!("{resolved}");
        return Ok(true);
    }
    let target: Option<PathBuf> = match (&a.out, &a.out_dir) {
        (Some(p), _) if p.as_os_str() == "-" => None,
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            std::fs::create_dir_all(dir)?;
            Some(dir.join(format!("{}.csv", a.id)))
        }
        (None, None) => None,
    };
    config.output_path = target.clone();
    let output = run(&config)?;
    match &target {
        Some(path) => eprintln!(
            "nearfar: wrote {} rows to {}",
            output.rows.len(),
            path.display()
        ),
        None => output.write_csv(io::stdout().lock())?,
    }
    let flags: Vec<usize> = output
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.ends_with("converged"))
        .map(|(i, _)| i)
        .collect();
    Ok(output
        .rows
        .iter()
        .all(|r| flags.iter().all(|&i| r[i] != "false")))
}
