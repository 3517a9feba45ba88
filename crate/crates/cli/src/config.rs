//! Scenario files.
//!
//! A scenario is a TOML document. Angles are given in degrees, lengths in
//! meters, powers in dBm and gains in dBi. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use emskin::geometry::SphericalPoint;
use emskin::incident::{HornDescriptor, Polarization};
use emskin::meta_atom::SurrogateParams;
use emskin::pso::SwarmConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Prefix of every output file.
    #[serde(default = "default_name")]
    pub name: String,
    pub frequency: f64,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    pub tx: TxConfig,
    pub ems: EmsConfig,
    #[serde(default)]
    pub rx: Option<RxConfig>,
    #[serde(default)]
    pub observation: Vec<ObservationConfig>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn default_name() -> String {
    "run".into()
}

fn default_quad_order() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Position {
    pub r: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
}

impl Position {
    pub fn to_point(self) -> emskin::Result<SphericalPoint> {
        SphericalPoint::new(self.r, self.theta_deg.to_radians(), self.phi_deg.to_radians())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum TxConfig {
    Horn {
        #[serde(default)]
        horn: HornConfig,
        position: Position,
        power_dbm: f64,
        polarization: Polarization,
    },
    PlaneWave {
        theta_deg: f64,
        phi_deg: f64,
        /// Peak field in V/m.
        #[serde(default = "unit")]
        amplitude: f64,
        polarization: Polarization,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HornPreset {
    LowGain,
    #[default]
    HighGain,
}

/// A preset horn with optional per-field overrides.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HornConfig {
    #[serde(default)]
    pub preset: HornPreset,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub beta: Option<f64>,
    pub rho_e: Option<f64>,
    pub rho_h: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub g_max_dbi: Option<f64>,
    pub frequency: Option<f64>,
}

impl HornConfig {
    pub fn descriptor(&self) -> HornDescriptor {
        let mut h = match self.preset {
            HornPreset::LowGain => HornDescriptor::low_gain(),
            HornPreset::HighGain => HornDescriptor::high_gain(),
        };
        let fields = [
            (&mut h.c1, self.c1),
            (&mut h.c2, self.c2),
            (&mut h.beta, self.beta),
            (&mut h.rho_e, self.rho_e),
            (&mut h.rho_h, self.rho_h),
            (&mut h.b1, self.b1),
            (&mut h.b2, self.b2),
            (&mut h.g_max_dbi, self.g_max_dbi),
            (&mut h.frequency, self.frequency),
        ];
        for (slot, v) in fields {
            if let Some(v) = v {
                *slot = v;
            }
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmsConfig {
    pub m: usize,
    pub n: usize,
    pub dx: f64,
    pub dy: f64,
    /// Meta-atom table file. When absent the analytic surrogate is used.
    #[serde(default)]
    pub table: Option<PathBuf>,
    #[serde(default)]
    pub surrogate: SurrogateConfig,
    #[serde(default)]
    pub layout: LayoutConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateConfig {
    #[serde(default = "sd::g_min")]
    pub g_min: f64,
    #[serde(default = "sd::g_max")]
    pub g_max: f64,
    #[serde(default = "sd::entries")]
    pub entries: usize,
    #[serde(default = "sd::resonance_center")]
    pub resonance_center: f64,
    #[serde(default = "sd::q_factor")]
    pub q_factor: f64,
    #[serde(default)]
    pub normal_ratio: f64,
    /// Defaults to the scenario frequency.
    #[serde(default)]
    pub frequency: Option<f64>,
}

mod sd {
    use super::SurrogateParams;
    pub fn g_min() -> f64 {
        SurrogateParams::default().g_min
    }
    pub fn g_max() -> f64 {
        SurrogateParams::default().g_max
    }
    pub fn entries() -> usize {
        SurrogateParams::default().entries
    }
    pub fn resonance_center() -> f64 {
        SurrogateParams::default().resonance_center
    }
    pub fn q_factor() -> f64 {
        SurrogateParams::default().q_factor
    }
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        let d = SurrogateParams::default();
        Self {
            g_min: d.g_min,
            g_max: d.g_max,
            entries: d.entries,
            resonance_center: d.resonance_center,
            q_factor: d.q_factor,
            normal_ratio: d.normal_ratio,
            frequency: None,
        }
    }
}

impl SurrogateConfig {
    pub fn params(&self, scenario_frequency: f64) -> SurrogateParams {
        SurrogateParams {
            g_min: self.g_min,
            g_max: self.g_max,
            entries: self.entries,
            resonance_center: self.resonance_center,
            q_factor: self.q_factor,
            normal_ratio: self.normal_ratio,
            frequency: self.frequency.unwrap_or(scenario_frequency),
        }
    }
}

/// Layout analysed by `analyze`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayoutConfig {
    /// Every cell at `g`, or at the middle of the table range when omitted.
    Uniform {
        #[serde(default)]
        g: Option<f64>,
    },
    /// A layout CSV as written by `synthesize`.
    File { path: PathBuf },
    /// Synthesized for the receiver before analysis.
    Synthesized { method: emskin::synthesis::Method },
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig::Uniform { g: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RxConfig {
    #[serde(default)]
    pub gain_dbi: f64,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservationConfig {
    /// Signed θ from −theta_max to theta_max in the plane `phi_deg`. The
    /// radius is given by exactly one of `r` (meters), `r_over_rnf` or
    /// `r_over_rff`.
    Cut {
        name: String,
        #[serde(default)]
        r: Option<f64>,
        #[serde(default)]
        r_over_rnf: Option<f64>,
        #[serde(default)]
        r_over_rff: Option<f64>,
        #[serde(default)]
        phi_deg: f64,
        #[serde(default = "right_angle")]
        theta_max_deg: f64,
        points: usize,
    },
    /// Square patch of side `width` centered on a point, `points` per side.
    Plane {
        name: String,
        center: Position,
        width: f64,
        points: usize,
    },
}

fn right_angle() -> f64 {
    90.0
}

impl ObservationConfig {
    pub fn name(&self) -> &str {
        match self {
            ObservationConfig::Cut { name, .. } | ObservationConfig::Plane { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Usm,
    Ffm,
    #[default]
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<emskin::synthesis::Method> {
        use emskin::synthesis::Method;
        match self {
            MethodChoice::Usm => vec![Method::Usm],
            MethodChoice::Ffm => vec![Method::Ffm],
            MethodChoice::Both => vec![Method::Usm, Method::Ffm],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default)]
    pub swarm: SwarmConfig,
    /// Relative self-convergence tolerance of the reference field.
    #[serde(default = "default_oracle_tol")]
    pub oracle_tolerance: f64,
    /// Points per side of the field map around the receiver.
    #[serde(default = "default_map_points")]
    pub rx_map_points: usize,
    /// Side of that map in meters; zero picks ten wavelengths.
    #[serde(default)]
    pub rx_map_width: f64,
}

fn default_oracle_tol() -> f64 {
    1e-4
}

fn default_map_points() -> usize {
    21
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            method: MethodChoice::Both,
            swarm: SwarmConfig::default(),
            oracle_tolerance: default_oracle_tol(),
            rx_map_points: default_map_points(),
            rx_map_width: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Receiver distance in meters.
    RRx,
    /// Receiver elevation in degrees.
    ThetaRx,
    /// Source distance in meters.
    RTx,
    /// Cells per side of a square aperture.
    Aperture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepLevel {
    /// Full layout search with the swarm.
    #[default]
    Swarm,
    /// Exact target phases on the ideal current magnitudes.
    Ideal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default)]
    pub level: SweepLevel,
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config { field: field.into(), message: message.into() }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite, got {v}")))
    }
}

fn check_position(field: &str, p: &Position) -> Result<(), CliError> {
    positive(&format!("{field}.r"), p.r)?;
    finite(&format!("{field}.theta_deg"), p.theta_deg)?;
    finite(&format!("{field}.phi_deg"), p.phi_deg)?;
    if !(0.0..=180.0).contains(&p.theta_deg) {
        return Err(invalid(&format!("{field}.theta_deg"), format!("must lie in [0, 180], got {}", p.theta_deg)));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        Ok(cfg)
    }

    /// Checks ranges and cross-field consistency. Paths are checked by [`load_config`].
    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name.contains("__") {
            return Err(invalid("name", "must be non-empty and contain no path separators or `__`"));
        }
        positive("frequency", self.frequency)?;
        if self.quad_order == 0 {
            return Err(invalid("quad_order", "must be at least 1"));
        }
        match &self.tx {
            TxConfig::Horn { horn, position, power_dbm, .. } => {
                check_position("tx.position", position)?;
                finite("tx.power_dbm", *power_dbm)?;
                horn.descriptor().validate().map_err(|e| invalid("tx.horn", e.to_string()))?;
            }
            TxConfig::PlaneWave { theta_deg, phi_deg, amplitude, .. } => {
                finite("tx.theta_deg", *theta_deg)?;
                finite("tx.phi_deg", *phi_deg)?;
                if !(0.0..90.0).contains(theta_deg) {
                    return Err(invalid("tx.theta_deg", format!("must lie in [0, 90), got {theta_deg}")));
                }
                positive("tx.amplitude", *amplitude)?;
            }
        }
        let e = &self.ems;
        if e.m == 0 {
            return Err(invalid("ems.m", "must be at least 1"));
        }
        if e.n == 0 {
            return Err(invalid("ems.n", "must be at least 1"));
        }
        positive("ems.dx", e.dx)?;
        positive("ems.dy", e.dy)?;
        if e.table.is_none() {
            let s = &e.surrogate;
            positive("ems.surrogate.g_min", s.g_min)?;
            positive("ems.surrogate.g_max", s.g_max)?;
            positive("ems.surrogate.q_factor", s.q_factor)?;
            finite("ems.surrogate.normal_ratio", s.normal_ratio)?;
            if let Some(f) = s.frequency {
                positive("ems.surrogate.frequency", f)?;
            }
            if !(s.g_min < s.resonance_center && s.resonance_center < s.g_max) {
                return Err(invalid("ems.surrogate.resonance_center", "must lie strictly inside (g_min, g_max)"));
            }
            if s.entries < 16 {
                return Err(invalid("ems.surrogate.entries", format!("must be at least 16, got {}", s.entries)));
            }
        }
        if let LayoutConfig::Uniform { g: Some(g) } = e.layout {
            positive("ems.layout.g", g)?;
        }
        if let Some(rx) = &self.rx {
            finite("rx.gain_dbi", rx.gain_dbi)?;
            check_position("rx.position", &rx.position)?;
        }
        let mut names = std::collections::HashSet::new();
        for (i, o) in self.observation.iter().enumerate() {
            let field = format!("observation[{i}]");
            if o.name().is_empty() || o.name().contains(['/', '\\']) || o.name().contains("__") {
                return Err(invalid(&format!("{field}.name"), "must be non-empty and contain no path separators or `__`"));
            }
            if !names.insert(o.name().to_string()) {
                return Err(invalid(&format!("{field}.name"), format!("duplicate name `{}`", o.name())));
            }
            match o {
                ObservationConfig::Cut { r, r_over_rnf, r_over_rff, phi_deg, theta_max_deg, points, .. } => {
                    let set = [("r", *r), ("r_over_rnf", *r_over_rnf), ("r_over_rff", *r_over_rff)];
                    let given: Vec<_> = set.iter().filter(|(_, v)| v.is_some()).collect();
                    if given.len() != 1 {
                        return Err(invalid(&format!("{field}.r"), "give exactly one of r, r_over_rnf, r_over_rff"));
                    }
                    let (key, v) = given[0];
                    positive(&format!("{field}.{key}"), v.unwrap())?;
                    finite(&format!("{field}.phi_deg"), *phi_deg)?;
                    if !(*theta_max_deg > 0.0 && *theta_max_deg < 90.0 + 1e-9) {
                        return Err(invalid(&format!("{field}.theta_max_deg"), format!("must lie in (0, 90], got {theta_max_deg}")));
                    }
                    if *points < 2 {
                        return Err(invalid(&format!("{field}.points"), format!("must be at least 2, got {points}")));
                    }
                }
                ObservationConfig::Plane { center, width, points, .. } => {
                    check_position(&format!("{field}.center"), center)?;
                    positive(&format!("{field}.width"), *width)?;
                    if *points < 2 {
                        return Err(invalid(&format!("{field}.points"), format!("must be at least 2, got {points}")));
                    }
                }
            }
        }
        self.run.swarm.validate().map_err(|e| invalid("run.swarm", e.to_string()))?;
        positive("run.oracle_tolerance", self.run.oracle_tolerance)?;
        if self.run.rx_map_points < 2 {
            return Err(invalid("run.rx_map_points", "must be at least 2"));
        }
        if !(self.run.rx_map_width.is_finite() && self.run.rx_map_width >= 0.0) {
            return Err(invalid("run.rx_map_width", "must be non-negative"));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(invalid("sweep.values", "must not be empty"));
            }
            for v in &s.values {
                let ok = match s.axis {
                    SweepAxis::ThetaRx => (0.0..=90.0).contains(v),
                    SweepAxis::Aperture => *v >= 1.0 && v.fract() == 0.0,
                    SweepAxis::RRx | SweepAxis::RTx => v.is_finite() && *v > 0.0,
                };
                if !ok {
                    return Err(invalid("sweep.values", format!("{v} is not a valid value for this axis")));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Reads, validates and resolves a scenario file.
///
/// Relative table and layout paths are taken relative to the file's
/// directory and must exist.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let mut cfg = ScenarioConfig::parse(&text).map_err(|e| match e {
        CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    if let Some(t) = &cfg.ems.table {
        let resolved = base.join(t);
        if !resolved.is_file() {
            return Err(CliError::MissingFile { field: "ems.table".into(), path: resolved });
        }
        cfg.ems.table = Some(resolved);
    }
    if let LayoutConfig::File { path: p } = &cfg.ems.layout {
        let resolved = base.join(p);
        if !resolved.is_file() {
            return Err(CliError::MissingFile { field: "ems.layout.path".into(), path: resolved });
        }
        cfg.ems.layout = LayoutConfig::File { path: resolved };
    }
    cfg.validate()?;
    Ok(cfg)
}
