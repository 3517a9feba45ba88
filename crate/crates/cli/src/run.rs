//! Experiment runners.

use std::time::Instant;

use emskin::constants::PhysicalConstants;
use emskin::field::{evaluate, oracle_cut, prediction_error_map, ObservationSet, Predictor};
use emskin::geometry::{build_lattice, region_boundaries, ApertureLattice, RegionBoundaries, SphericalPoint};
use emskin::incident::{illuminate, IncidentFieldGrid, Illumination, PlaneWave, SourcePlacement};
use emskin::meta_atom::{currents_for_layout, surrogate_table, EMSLayout, MetaAtomTable, SurfaceCurrentGrid};
use emskin::pso::SwarmConfig;
use emskin::synthesis::{
    dbi_to_linear, ideal_currents, received_power, run_sbd_synthesis, target_phase, watts_to_dbm, Method,
    SynthesisResult, SynthesisScenario, TargetPhaseGrid,
};
use num_complex::Complex64;

use crate::bundle::{Metadata, ResultBundle, Table, REFERENCE_NOTE};
use crate::config::{LayoutConfig, ObservationConfig, ScenarioConfig, SweepAxis, SweepLevel, TxConfig};
use crate::emit::read_csv_table;
use crate::error::CliError;

/// Everything derived from a config before any experiment runs.
pub struct Scene {
    pub constants: PhysicalConstants,
    pub lattice: ApertureLattice,
    pub bounds: RegionBoundaries,
    pub table: MetaAtomTable,
    pub incident: IncidentFieldGrid,
}

pub fn illumination(cfg: &ScenarioConfig) -> Result<Illumination, CliError> {
    Ok(match &cfg.tx {
        TxConfig::Horn { horn, position, power_dbm, polarization } => Illumination::Horn {
            placement: SourcePlacement {
                position: position.to_point()?,
                tx_power_dbm: *power_dbm,
                polarization: *polarization,
            },
            horn: horn.descriptor(),
        },
        TxConfig::PlaneWave { theta_deg, phi_deg, amplitude, polarization } => Illumination::PlaneWave(PlaneWave {
            theta: theta_deg.to_radians(),
            phi: phi_deg.to_radians(),
            amplitude: Complex64::new(*amplitude, 0.0),
            polarization: *polarization,
        }),
    })
}

pub fn load_table(cfg: &ScenarioConfig) -> Result<MetaAtomTable, CliError> {
    match &cfg.ems.table {
        Some(path) => {
            let t = MetaAtomTable::read_csv(path)?;
            let f = t.metadata.frequency;
            if (f - cfg.frequency).abs() > 1e-9 * cfg.frequency {
                return Err(CliError::Config {
                    field: "ems.table".into(),
                    message: format!("table is for {f} Hz, scenario runs at {} Hz", cfg.frequency),
                });
            }
            Ok(t)
        }
        None => Ok(surrogate_table(&cfg.ems.surrogate.params(cfg.frequency))?),
    }
}

impl Scene {
    pub fn build(cfg: &ScenarioConfig) -> Result<Self, CliError> {
        let constants = PhysicalConstants::at_frequency(cfg.frequency)?;
        let lattice = build_lattice(cfg.ems.m, cfg.ems.n, cfg.ems.dx, cfg.ems.dy)?;
        let bounds = region_boundaries(&lattice, constants.lambda0);
        let table = load_table(cfg)?;
        let incident = illuminate(&illumination(cfg)?, &lattice, cfg.quad_order, &constants)?;
        Ok(Self { constants, lattice, bounds, table, incident })
    }

    fn scenario(&self, rx: SphericalPoint, gain_dbi: f64) -> SynthesisScenario {
        SynthesisScenario { constants: self.constants, incident: self.incident.clone(), rx, g_rx: dbi_to_linear(gain_dbi) }
    }
}

fn receiver(cfg: &ScenarioConfig) -> Result<(SphericalPoint, f64), CliError> {
    let rx = cfg.rx.as_ref().ok_or_else(|| CliError::Config {
        field: "rx".into(),
        message: "this command needs a receiver block".into(),
    })?;
    Ok((rx.position.to_point()?, rx.gain_dbi))
}

fn swarm(cfg: &ScenarioConfig) -> SwarmConfig {
    SwarmConfig { seed: cfg.run.seed, ..cfg.run.swarm }
}

fn metadata(cfg: &ScenarioConfig, command: &str, started: Instant, notes: Vec<String>) -> Metadata {
    Metadata {
        run: cfg.name.clone(),
        command: command.into(),
        config_hash: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.run.seed,
        wall_time_s: started.elapsed().as_secs_f64(),
        reference: REFERENCE_NOTE.into(),
        notes,
    }
}

fn observation_set(o: &ObservationConfig, bounds: &RegionBoundaries) -> Result<ObservationSet, CliError> {
    Ok(match o {
        ObservationConfig::Cut { r, r_over_rnf, r_over_rff, phi_deg, theta_max_deg, points, .. } => {
            let radius = match (r, r_over_rnf, r_over_rff) {
                (Some(r), _, _) => *r,
                (_, Some(k), _) => k * bounds.r_nf,
                (_, _, Some(k)) => k * bounds.r_ff,
                _ => unreachable!("validated"),
            };
            ObservationSet::theta_cut(radius, phi_deg.to_radians(), theta_max_deg.to_radians(), *points)?
        }
        ObservationConfig::Plane { center, width, points, .. } => {
            ObservationSet::plane(&center.to_point()?, *width, *points)?
        }
    })
}

/// Reads a layout CSV with a `g` column in lattice order.
pub fn read_layout(path: &std::path::Path, lattice: &ApertureLattice) -> Result<EMSLayout, CliError> {
    let t = read_csv_table(path, "layout")?;
    let g = t.column("g").ok_or_else(|| CliError::Config {
        field: "ems.layout.path".into(),
        message: format!("{} has no `g` column", path.display()),
    })?;
    if g.len() != lattice.cell_count() {
        return Err(CliError::Config {
            field: "ems.layout.path".into(),
            message: format!("{} holds {} cells, lattice has {}", path.display(), g.len(), lattice.cell_count()),
        });
    }
    Ok(EMSLayout { m_count: lattice.m_count, n_count: lattice.n_count, g })
}

fn layout_table(name: &str, lattice: &ApertureLattice, layout: &EMSLayout) -> Table {
    let mut t = Table::new(name, &["m", "n", "x", "y", "g"]);
    for m in 0..lattice.m_count {
        for n in 0..lattice.n_count {
            let i = lattice.index(m, n);
            let (x, y) = lattice.center(i);
            t.push(vec![(m + 1) as f64, (n + 1) as f64, x, y, layout.g[i]]);
        }
    }
    t
}

/// Phase of the strongest current component of every cell.
fn dominant_phase(j: &SurfaceCurrentGrid) -> Vec<f64> {
    let comps = j.components();
    (0..j.lattice.cell_count())
        .map(|i| {
            let best = comps.iter().map(|c| c[i]).fold(Complex64::new(0.0, 0.0), |a, b| if b.norm() > a.norm() { b } else { a });
            best.arg()
        })
        .collect()
}

fn phase_table(name: &str, lattice: &ApertureLattice, target: &TargetPhaseGrid, j: &SurfaceCurrentGrid) -> Table {
    let achieved = dominant_phase(j);
    let mut t = Table::new(name, &["m", "n", "x", "y", "target", "achieved", "error"]);
    for m in 0..lattice.m_count {
        for n in 0..lattice.n_count {
            let i = lattice.index(m, n);
            let (x, y) = lattice.center(i);
            let err = emskin::synthesis::wrap_phase(target.phase[i] - achieved[i]);
            t.push(vec![(m + 1) as f64, (n + 1) as f64, x, y, target.phase[i], achieved[i], err]);
        }
    }
    t
}

fn field_columns(first: &str, second: &str) -> Vec<String> {
    let mut c = vec![first.to_string(), second.to_string()];
    c.extend(
        [
            "r",
            "theta_deg",
            "phi_deg",
            "gen_theta_abs",
            "gen_phi_abs",
            "ff_theta_abs",
            "ff_phi_abs",
            "ref_theta_abs",
            "ref_phi_abs",
            "below_fresnel",
        ]
        .map(String::from),
    );
    c
}

/// Labels of an observation set as table columns, in output units.
fn labels(o: &ObservationConfig, set: &ObservationSet) -> (&'static str, &'static str, Vec<(f64, f64)>) {
    match o {
        ObservationConfig::Cut { phi_deg, .. } => {
            ("theta_signed_deg", "phi_cut_deg", set.labels.iter().map(|(t, _)| (t.to_degrees(), *phi_deg)).collect())
        }
        ObservationConfig::Plane { .. } => ("s", "t", set.labels.clone()),
    }
}

/// Closed-form and far-field predictions against the dipole reference on
/// every observation set.
pub fn run_analyze(cfg: &ScenarioConfig) -> Result<ResultBundle, CliError> {
    let started = Instant::now();
    if cfg.observation.is_empty() {
        return Err(CliError::Config { field: "observation".into(), message: "analysis needs at least one observation set".into() });
    }
    let scene = Scene::build(cfg)?;
    let mut notes = Vec::new();
    let layout = match &cfg.ems.layout {
        LayoutConfig::Uniform { g } => {
            let (lo, hi) = scene.table.range();
            EMSLayout::uniform(scene.lattice.m_count, scene.lattice.n_count, g.unwrap_or(0.5 * (lo + hi)))
        }
        LayoutConfig::File { path } => read_layout(path, &scene.lattice)?,
        LayoutConfig::Synthesized { method } => {
            let (rx, gain) = receiver(cfg)?;
            let target = target_phase(*method, &scene.lattice, &rx, scene.constants.lambda0);
            let res = run_sbd_synthesis(&scene.scenario(rx, gain), &scene.table, &target, &swarm(cfg))?;
            notes.push(format!("layout synthesized with {} in {} iterations", method.name(), res.iterations));
            res.layout
        }
    };
    layout.validate(&scene.table)?;
    let currents = currents_for_layout(&layout, &scene.table, &scene.incident, &scene.constants)?;

    let mut tables = vec![layout_table("layout", &scene.lattice, &layout)];
    let mut summary = Table::new("analysis_summary", &["observation", "points", "max_error_gen", "max_error_ff", "reference_order"]);
    for (k, o) in cfg.observation.iter().enumerate() {
        let set = observation_set(o, &scene.bounds)?;
        let gen = evaluate(&currents, &set, Predictor::Fresnel, &scene.constants);
        let ff = evaluate(&currents, &set, Predictor::FarField, &scene.constants);
        let (reference, order) = oracle_cut(&currents, &set, cfg.run.oracle_tolerance, &scene.constants)?;
        let err_gen = prediction_error_map(&gen, &reference)?;
        let err_ff = prediction_error_map(&ff, &reference)?;
        let (la, lb, lab) = labels(o, &set);

        let mut field = Table::with_columns(format!("{}_field", o.name()), field_columns(la, lb));
        let mut errors = Table::new(format!("{}_error", o.name()), &[la, lb, "error_gen", "error_ff"]);
        for i in 0..set.len() {
            let p = set.points[i];
            field.push(vec![
                lab[i].0,
                lab[i].1,
                p.r,
                p.theta.to_degrees(),
                p.phi.to_degrees(),
                gen[i].f_theta.norm(),
                gen[i].f_phi.norm(),
                ff[i].f_theta.norm(),
                ff[i].f_phi.norm(),
                reference[i].f_theta.norm(),
                reference[i].f_phi.norm(),
                f64::from(u8::from(gen[i].below_fresnel)),
            ]);
            errors.push(vec![lab[i].0, lab[i].1, err_gen.values[i], err_ff.values[i]]);
        }
        summary.push(vec![k as f64, set.len() as f64, err_gen.max(), err_ff.max(), order as f64]);
        tables.push(field);
        tables.push(errors);
    }
    tables.push(summary);
    tables.push(regions_table(cfg, &scene.lattice, &scene.bounds, scene.constants.lambda0));
    Ok(ResultBundle { metadata: metadata(cfg, "analyze", started, notes), tables })
}

struct MethodRun {
    method: Method,
    target: TargetPhaseGrid,
    result: SynthesisResult,
    currents: SurfaceCurrentGrid,
}

fn synthesize_methods(cfg: &ScenarioConfig, scene: &Scene, rx: SphericalPoint, gain: f64) -> Result<Vec<MethodRun>, CliError> {
    let scenario = scene.scenario(rx, gain);
    cfg.run
        .method
        .methods()
        .into_iter()
        .map(|method| {
            let target = target_phase(method, &scene.lattice, &rx, scene.constants.lambda0);
            let result = run_sbd_synthesis(&scenario, &scene.table, &target, &swarm(cfg))?;
            let currents = scenario.currents(&result.layout, &scene.table)?;
            Ok(MethodRun { method, target, result, currents })
        })
        .collect()
}

/// Layout search for each configured method, with the received power.
pub fn run_synthesize(cfg: &ScenarioConfig) -> Result<ResultBundle, CliError> {
    let started = Instant::now();
    let (rx, gain) = receiver(cfg)?;
    let scene = Scene::build(cfg)?;
    let runs = synthesize_methods(cfg, &scene, rx, gain)?;

    let width = if cfg.run.rx_map_width > 0.0 { cfg.run.rx_map_width } else { 10.0 * scene.constants.lambda0 };
    let map_set = ObservationSet::plane(&rx, width, cfg.run.rx_map_points)?;
    let g_rx = dbi_to_linear(gain);
    let (lambda0, eta0) = (scene.constants.lambda0, scene.constants.eta0);

    let mut tables = Vec::new();
    let mut columns = vec!["r_nf".to_string(), "r_ff".to_string(), "r_rx".to_string()];
    let mut values = vec![scene.bounds.r_nf, scene.bounds.r_ff, rx.r];
    for run in &runs {
        let tag = run.method.name();
        tables.push(layout_table(&format!("{tag}_layout"), &scene.lattice, &run.result.layout));
        tables.push(phase_table(&format!("{tag}_phase"), &scene.lattice, &run.target, &run.currents));
        let mut trace = Table::new(format!("{tag}_trace"), &["iteration", "cost"]);
        for (i, c) in run.result.cost_trace.iter().enumerate() {
            trace.push(vec![i as f64, *c]);
        }
        tables.push(trace);
        let field = evaluate(&run.currents, &map_set, Predictor::Fresnel, &scene.constants);
        let mut map = Table::new(format!("{tag}_rx_map"), &["s", "t", "field_abs", "power_dbm"]);
        for (f, (s, t)) in field.iter().zip(&map_set.labels) {
            let p = received_power(f.f_theta, f.f_phi, g_rx, lambda0, eta0);
            map.push(vec![*s, *t, f.magnitude(), watts_to_dbm(p)]);
        }
        tables.push(map);
        for (name, v) in [
            ("psi_rx_dbm", run.result.psi_rx_dbm),
            ("cost", run.result.cost),
            ("iterations", run.result.iterations as f64),
        ] {
            columns.push(format!("{name}_{tag}"));
            values.push(v);
        }
    }
    if runs.len() == 2 {
        columns.push("delta_psi_db".into());
        values.push(runs[0].result.psi_rx_dbm - runs[1].result.psi_rx_dbm);
    }
    let mut summary = Table::with_columns("summary", columns);
    summary.push(values);
    tables.push(summary);
    Ok(ResultBundle { metadata: metadata(cfg, "synthesize", started, Vec::new()), tables })
}

/// Received power for one method, either after a layout search or with
/// exact target phases on the ideal current magnitudes.
fn sweep_point(cfg: &ScenarioConfig, level: SweepLevel) -> Result<(Vec<(Method, f64)>, RegionBoundaries, f64), CliError> {
    let (rx, gain) = receiver(cfg)?;
    let scene = Scene::build(cfg)?;
    let out = match level {
        SweepLevel::Swarm => synthesize_methods(cfg, &scene, rx, gain)?
            .into_iter()
            .map(|r| (r.method, r.result.psi_rx_dbm))
            .collect(),
        SweepLevel::Ideal => {
            let scenario = scene.scenario(rx, gain);
            cfg.run
                .method
                .methods()
                .into_iter()
                .map(|method| {
                    let target = target_phase(method, &scene.lattice, &rx, scene.constants.lambda0);
                    let j = ideal_currents(&scene.incident, &target, &scene.constants)?;
                    Ok((method, scenario.received_dbm(&j)))
                })
                .collect::<Result<_, CliError>>()?
        }
    };
    Ok((out, scene.bounds, rx.r))
}

fn with_value(cfg: &ScenarioConfig, axis: SweepAxis, v: f64) -> Result<ScenarioConfig, CliError> {
    let mut c = cfg.clone();
    let rx = c.rx.as_mut().ok_or_else(|| CliError::Config { field: "rx".into(), message: "sweeps need a receiver block".into() })?;
    match axis {
        SweepAxis::RRx => rx.position.r = v,
        SweepAxis::ThetaRx => rx.position.theta_deg = v,
        SweepAxis::RTx => match &mut c.tx {
            TxConfig::Horn { position, .. } => position.r = v,
            TxConfig::PlaneWave { .. } => {
                return Err(CliError::Config { field: "sweep.axis".into(), message: "r_tx needs a horn source".into() })
            }
        },
        SweepAxis::Aperture => {
            c.ems.m = v as usize;
            c.ems.n = v as usize;
        }
    }
    Ok(c)
}

/// One synthesis per sweep value and method. Failed points are recorded
/// with `status` 0 and the sweep carries on.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<ResultBundle, CliError> {
    let started = Instant::now();
    let sweep = cfg.sweep.as_ref().ok_or_else(|| CliError::Config { field: "sweep".into(), message: "missing sweep block".into() })?;
    receiver(cfg)?;
    let methods = cfg.run.method.methods();
    let mut columns = vec!["value".to_string(), "r_nf".into(), "r_ff".into(), "below_fresnel".into()];
    for m in &methods {
        columns.push(format!("psi_rx_dbm_{}", m.name()));
    }
    if methods.len() == 2 {
        columns.push("delta_psi_db".into());
    }
    columns.push("status".into());
    let width = columns.len();
    let mut table = Table::with_columns("sweep", columns);
    let mut notes = Vec::new();
    for &v in &sweep.values {
        let point = with_value(cfg, sweep.axis, v).and_then(|c| sweep_point(&c, sweep.level));
        let mut row = vec![v];
        match point {
            Ok((psi, bounds, r_rx)) => {
                row.extend([bounds.r_nf, bounds.r_ff, f64::from(u8::from(r_rx < bounds.r_nf))]);
                row.extend(psi.iter().map(|(_, p)| *p));
                if psi.len() == 2 {
                    row.push(psi[0].1 - psi[1].1);
                }
                row.push(1.0);
            }
            Err(e) => {
                notes.push(format!("value {v}: {e}"));
                row.extend(std::iter::repeat_n(f64::NAN, width - 2));
                row.push(0.0);
            }
        }
        table.push(row);
    }
    Ok(ResultBundle { metadata: metadata(cfg, "sweep", started, notes), tables: vec![table] })
}

fn regions_table(cfg: &ScenarioConfig, lattice: &ApertureLattice, b: &RegionBoundaries, lambda0: f64) -> Table {
    let mut t = Table::new("regions", &["m", "n", "dx", "dy", "diameter", "lambda0", "r_nf", "r_ff"]);
    t.push(vec![cfg.ems.m as f64, cfg.ems.n as f64, cfg.ems.dx, cfg.ems.dy, lattice.diameter, lambda0, b.r_nf, b.r_ff]);
    t
}

/// Region boundaries of the configured aperture.
pub fn run_regions(cfg: &ScenarioConfig) -> Result<ResultBundle, CliError> {
    let started = Instant::now();
    let constants = PhysicalConstants::at_frequency(cfg.frequency)?;
    let lattice = build_lattice(cfg.ems.m, cfg.ems.n, cfg.ems.dx, cfg.ems.dy)?;
    let b = region_boundaries(&lattice, constants.lambda0);
    let tables = vec![regions_table(cfg, &lattice, &b, constants.lambda0)];
    Ok(ResultBundle { metadata: metadata(cfg, "regions", started, Vec::new()), tables })
}
