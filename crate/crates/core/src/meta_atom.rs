//! Meta-atom response tables, polarization densities and sheet currents.
//!
//! Susceptibilities carry units of meters for both the electric and the
//! magnetic tensor, so that `P^e = ε0 ψ^e E` (C/m) and `P^h = ψ^h H` (A).

use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::constants::PhysicalConstants;
use crate::geometry::ApertureLattice;
use crate::vector::CVec3;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Diagonal electric and magnetic surface susceptibilities, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SusceptibilityTensors {
    pub psi_e_xx: Complex64,
    pub psi_e_yy: Complex64,
    pub psi_e_zz: Complex64,
    pub psi_h_xx: Complex64,
    pub psi_h_yy: Complex64,
    pub psi_h_zz: Complex64,
}

impl SusceptibilityTensors {
    fn as_array(&self) -> [Complex64; 6] {
        [self.psi_e_xx, self.psi_e_yy, self.psi_e_zz, self.psi_h_xx, self.psi_h_yy, self.psi_h_zz]
    }

    fn from_array(a: [Complex64; 6]) -> Self {
        Self {
            psi_e_xx: a[0],
            psi_e_yy: a[1],
            psi_e_zz: a[2],
            psi_h_xx: a[3],
            psi_h_yy: a[4],
            psi_h_zz: a[5],
        }
    }
}

/// Local reflection operator in the (⊥, ∥) basis.
///
/// `gamma_ps` couples the incident ∥ component into the reflected ⊥ one,
/// `gamma_sp` the incident ⊥ into the reflected ∥.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionTensor {
    pub gamma_pp: Complex64,
    pub gamma_ps: Complex64,
    pub gamma_sp: Complex64,
    pub gamma_ss: Complex64,
}

impl ReflectionTensor {
    pub fn isotropic(g: Complex64) -> Self {
        Self { gamma_pp: g, gamma_ps: ZERO, gamma_sp: ZERO, gamma_ss: g }
    }

    fn as_array(&self) -> [Complex64; 4] {
        [self.gamma_pp, self.gamma_ps, self.gamma_sp, self.gamma_ss]
    }

    fn from_array(a: [Complex64; 4]) -> Self {
        Self { gamma_pp: a[0], gamma_ps: a[1], gamma_sp: a[2], gamma_ss: a[3] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableMetadata {
    pub substrate: String,
    /// Substrate thickness in meters.
    pub thickness: f64,
    pub frequency: f64,
}

impl Default for TableMetadata {
    fn default() -> Self {
        Self { substrate: "Rogers RO4350".into(), thickness: 7.62e-4, frequency: 17.5e9 }
    }
}

/// Response of the meta-atom versus its descriptor (patch side, meters).
#[derive(Debug, Clone, PartialEq)]
pub struct MetaAtomTable {
    g: Vec<f64>,
    psi: Vec<SusceptibilityTensors>,
    gamma: Vec<ReflectionTensor>,
    pub metadata: TableMetadata,
}

pub const TABLE_HEADER: [&str; 21] = [
    "g",
    "re_psi_e_xx", "im_psi_e_xx", "re_psi_e_yy", "im_psi_e_yy", "re_psi_e_zz", "im_psi_e_zz",
    "re_psi_h_xx", "im_psi_h_xx", "re_psi_h_yy", "im_psi_h_yy", "re_psi_h_zz", "im_psi_h_zz",
    "re_gamma_pp", "im_gamma_pp", "re_gamma_ps", "im_gamma_ps",
    "re_gamma_sp", "im_gamma_sp", "re_gamma_ss", "im_gamma_ss",
];

impl MetaAtomTable {
    pub fn new(
        g: Vec<f64>,
        psi: Vec<SusceptibilityTensors>,
        gamma: Vec<ReflectionTensor>,
        metadata: TableMetadata,
    ) -> Result<Self> {
        if g.len() < 2 {
            return Err(Error::Table(format!("need at least 2 entries, got {}", g.len())));
        }
        if psi.len() != g.len() || gamma.len() != g.len() {
            return Err(Error::Table("column lengths differ".into()));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Table("descriptor values must be finite".into()));
        }
        if let Some(i) = g.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Table(format!(
                "descriptor not strictly increasing at row {} ({} after {})",
                i + 2,
                g[i + 1],
                g[i]
            )));
        }
        let finite = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
        if !psi.iter().all(|p| p.as_array().iter().all(finite))
            || !gamma.iter().all(|r| r.as_array().iter().all(finite))
        {
            return Err(Error::Table("non-finite tensor entry".into()));
        }
        Ok(Self { g, psi, gamma, metadata })
    }

    pub fn descriptors(&self) -> &[f64] {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.g[0], self.g[self.g.len() - 1])
    }

    pub fn entry(&self, i: usize) -> (SusceptibilityTensors, ReflectionTensor) {
        (self.psi[i], self.gamma[i])
    }

    /// Bracketing interval and fractional position of `g`.
    fn locate(&self, g: f64) -> Result<(usize, f64)> {
        let (lo, hi) = self.range();
        if !(g >= lo && g <= hi) {
            return Err(Error::OutOfRange { what: "descriptor g", value: g, min: lo, max: hi });
        }
        let i = self.g.partition_point(|&v| v <= g).clamp(1, self.g.len() - 1) - 1;
        let t = (g - self.g[i]) / (self.g[i + 1] - self.g[i]);
        Ok((i, t))
    }

    pub fn lookup_response(&self, g: f64) -> Result<(SusceptibilityTensors, ReflectionTensor)> {
        let (i, t) = self.locate(g)?;
        if t == 0.0 {
            return Ok(self.entry(i));
        }
        if t == 1.0 {
            return Ok(self.entry(i + 1));
        }
        let lerp = |a: Complex64, b: Complex64| a + (b - a) * t;
        let (pa, pb) = (self.psi[i].as_array(), self.psi[i + 1].as_array());
        let (ga, gb) = (self.gamma[i].as_array(), self.gamma[i + 1].as_array());
        Ok((
            SusceptibilityTensors::from_array(std::array::from_fn(|k| lerp(pa[k], pb[k]))),
            ReflectionTensor::from_array(std::array::from_fn(|k| lerp(ga[k], gb[k]))),
        ))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_reader(std::io::BufReader::new(file))
            .map_err(|e| match e {
                Error::Table(msg) => Error::Table(format!("{}: {msg}", path.display())),
                Error::Csv { source, .. } => Error::Csv { path: path.to_path_buf(), source },
                other => other,
            })
    }

    /// Parses the table format: optional `# key=value` lines, then a CSV
    /// header and one row per descriptor.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut metadata = TableMetadata::default();
        let mut body = String::new();
        let mut in_header = true;
        for line in reader.lines() {
            let line = line.map_err(|source| Error::Io { path: "<table>".into(), source })?;
            if in_header {
                if let Some(meta) = line.trim_start().strip_prefix('#') {
                    if let Some((k, v)) = meta.split_once('=') {
                        let v = v.trim();
                        let num = || {
                            v.parse::<f64>()
                                .map_err(|_| Error::Table(format!("bad metadata value {v:?} for {}", k.trim())))
                        };
                        match k.trim() {
                            "substrate" => metadata.substrate = v.to_string(),
                            "thickness" => metadata.thickness = num()?,
                            "frequency" => metadata.frequency = num()?,
                            _ => {}
                        }
                    }
                    continue;
                }
                in_header = false;
            }
            body.push_str(&line);
            body.push('\n');
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
        let header = rdr
            .headers()
            .map_err(|source| Error::Csv { path: "<table>".into(), source })?
            .clone();
        if header.len() != TABLE_HEADER.len() || header.iter().zip(TABLE_HEADER).any(|(a, b)| a != b) {
            return Err(Error::Table(format!(
                "unexpected header; expected {}",
                TABLE_HEADER.join(",")
            )));
        }
        let (mut g, mut psi, mut gamma) = (Vec::new(), Vec::new(), Vec::new());
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|source| Error::Csv { path: "<table>".into(), source })?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Table(format!("row {}: {e}", row + 2)))?;
            let c = |k: usize| Complex64::new(vals[k], vals[k + 1]);
            g.push(vals[0]);
            psi.push(SusceptibilityTensors::from_array(std::array::from_fn(|k| c(1 + 2 * k))));
            gamma.push(ReflectionTensor::from_array(std::array::from_fn(|k| c(13 + 2 * k))));
        }
        Self::new(g, psi, gamma, metadata)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io { path: path.to_path_buf(), source };
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        self.to_writer(&mut f).map_err(io)?;
        f.flush().map_err(io)
    }

    pub fn to_writer<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "# substrate={}", self.metadata.substrate)?;
        writeln!(w, "# thickness={}", self.metadata.thickness)?;
        writeln!(w, "# frequency={}", self.metadata.frequency)?;
        writeln!(w, "{}", TABLE_HEADER.join(","))?;
        for i in 0..self.g.len() {
            let mut row = vec![self.g[i].to_string()];
            for c in self.psi[i].as_array().iter().chain(self.gamma[i].as_array().iter()) {
                row.push(c.re.to_string());
                row.push(c.im.to_string());
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Parameters of the analytic single-resonance table.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateParams {
    pub g_min: f64,
    pub g_max: f64,
    pub entries: usize,
    pub resonance_center: f64,
    pub q_factor: f64,
    /// ψ_zz as a multiple of the transverse electric susceptibility.
    pub normal_ratio: f64,
    pub frequency: f64,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        Self {
            g_min: 1e-3,
            g_max: 8e-3,
            entries: 128,
            resonance_center: 4.5e-3,
            q_factor: 8.0,
            normal_ratio: 0.0,
            frequency: 17.5e9,
        }
    }
}

/// Lossless reflection `Γ = -(1 + jx)/(1 - jx)` with `x = Q (g - g0)/g0`.
///
/// The phase runs through π at `g0`. The electric susceptibility
/// `ψ = -j(1 + Γ)/k0` makes a uniform sheet carry `J^e = (1 + Γ)² E / 2η0`,
/// whose phase is that of `Γ E`.
pub fn surrogate_table(p: &SurrogateParams) -> Result<MetaAtomTable> {
    if !(p.g_min.is_finite() && p.g_max.is_finite() && p.g_min > 0.0 && p.g_min < p.resonance_center && p.resonance_center < p.g_max) {
        return Err(Error::InvalidArgument(format!(
            "surrogate range needs 0 < g_min < resonance_center < g_max, got {} / {} / {}",
            p.g_min, p.resonance_center, p.g_max
        )));
    }
    if p.entries < 16 {
        return Err(Error::InvalidArgument(format!("surrogate needs at least 16 entries, got {}", p.entries)));
    }
    if !(p.q_factor.is_finite() && p.q_factor > 0.0) {
        return Err(Error::InvalidArgument(format!("q_factor must be positive, got {}", p.q_factor)));
    }
    if !p.normal_ratio.is_finite() {
        return Err(Error::InvalidArgument("normal_ratio must be finite".into()));
    }
    let consts = PhysicalConstants::at_frequency(p.frequency)?;
    let n = p.entries;
    let g: Vec<f64> = (0..n)
        .map(|i| p.g_min + (p.g_max - p.g_min) * i as f64 / (n - 1) as f64)
        .collect();
    let mut psi = Vec::with_capacity(n);
    let mut gamma = Vec::with_capacity(n);
    for &gi in &g {
        let x = p.q_factor * (gi - p.resonance_center) / p.resonance_center;
        let jx = Complex64::new(0.0, x);
        let refl = -(1.0 + jx) / (1.0 - jx);
        let t = Complex64::new(0.0, -1.0) * (1.0 + refl) / consts.k0;
        psi.push(SusceptibilityTensors {
            psi_e_xx: t,
            psi_e_yy: t,
            psi_e_zz: t * p.normal_ratio,
            ..Default::default()
        });
        gamma.push(ReflectionTensor::isotropic(refl));
    }
    MetaAtomTable::new(
        g,
        psi,
        gamma,
        TableMetadata { frequency: p.frequency, ..Default::default() },
    )
}

/// Descriptor value per cell, flat in lattice order.
#[derive(Debug, Clone, PartialEq)]
pub struct EMSLayout {
    pub m_count: usize,
    pub n_count: usize,
    pub g: Vec<f64>,
}

impl EMSLayout {
    pub fn uniform(m_count: usize, n_count: usize, g: f64) -> Self {
        Self { m_count, n_count, g: vec![g; m_count * n_count] }
    }

    pub fn validate(&self, table: &MetaAtomTable) -> Result<()> {
        if self.g.len() != self.m_count * self.n_count {
            return Err(Error::ShapeMismatch(format!(
                "layout holds {} values for {}x{} cells",
                self.g.len(),
                self.m_count,
                self.n_count
            )));
        }
        let (lo, hi) = table.range();
        match self.g.iter().find(|v| !(**v >= lo && **v <= hi)) {
            Some(&v) => Err(Error::OutOfRange { what: "layout descriptor", value: v, min: lo, max: hi }),
            None => Ok(()),
        }
    }

    pub fn matches(&self, lattice: &ApertureLattice) -> bool {
        self.m_count == lattice.m_count && self.n_count == lattice.n_count && self.g.len() == lattice.cell_count()
    }
}

/// Per-cell coefficients of the electric (A/m) and magnetic (V/m) sheet currents.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCurrentGrid {
    pub lattice: ApertureLattice,
    pub je_x: Vec<Complex64>,
    pub je_y: Vec<Complex64>,
    pub jh_x: Vec<Complex64>,
    pub jh_y: Vec<Complex64>,
}

impl SurfaceCurrentGrid {
    pub fn zeros(lattice: &ApertureLattice) -> Self {
        let z = vec![ZERO; lattice.cell_count()];
        Self { lattice: lattice.clone(), je_x: z.clone(), je_y: z.clone(), jh_x: z.clone(), jh_y: z }
    }

    pub fn components(&self) -> [&[Complex64]; 4] {
        [&self.je_x, &self.je_y, &self.jh_x, &self.jh_y]
    }

    pub fn components_mut(&mut self) -> [&mut Vec<Complex64>; 4] {
        [&mut self.je_x, &mut self.je_y, &mut self.jh_x, &mut self.jh_y]
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.components_mut() {
            c.iter_mut().for_each(|v| *v *= alpha);
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let n = self.lattice.cell_count();
        if self.components().iter().any(|c| c.len() != n) {
            return Err(Error::ShapeMismatch(format!("current grid does not hold {n} cells per component")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationDensities {
    pub p_e: Vec<CVec3>,
    pub p_h: Vec<CVec3>,
}

pub fn polarization_densities(
    layout: &EMSLayout,
    table: &MetaAtomTable,
    e_avg: &[CVec3],
    h_avg: &[CVec3],
    eps0: f64,
) -> Result<PolarizationDensities> {
    let n = layout.g.len();
    if e_avg.len() != n || h_avg.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "layout has {n} cells, averaged fields {} / {}",
            e_avg.len(),
            h_avg.len()
        )));
    }
    let mut p_e = Vec::with_capacity(n);
    let mut p_h = Vec::with_capacity(n);
    for i in 0..n {
        let (s, _) = table.lookup_response(layout.g[i])?;
        p_e.push(apply_diag(s.psi_e_xx, s.psi_e_yy, s.psi_e_zz, &e_avg[i]) * Complex64::from(eps0));
        p_h.push(apply_diag(s.psi_h_xx, s.psi_h_yy, s.psi_h_zz, &h_avg[i]));
    }
    Ok(PolarizationDensities { p_e, p_h })
}

pub(crate) fn apply_diag(a: Complex64, b: Complex64, c: Complex64, f: &CVec3) -> CVec3 {
    CVec3::new(a * f[0], b * f[1], c * f[2])
}

/// Derivative along one lattice axis: central inside, second-order one-sided at the ends.
fn axis_derivative(values: &[Complex64], count: usize, stride: usize, h: f64, out: &mut [Complex64]) {
    let at = |i: usize| values[i * stride];
    for i in 0..count {
        out[i] = match count {
            1 => ZERO,
            2 => (at(1) - at(0)) / h,
            _ if i == 0 => (at(1) * 4.0 - at(0) * 3.0 - at(2)) / (2.0 * h),
            _ if i == count - 1 => (at(i) * 3.0 - at(i - 1) * 4.0 + at(i - 2)) / (2.0 * h),
            _ => (at(i + 1) - at(i - 1)) / (2.0 * h),
        };
    }
}

/// Finite-difference gradient (∂x, ∂y) of a cell-centered scalar field.
pub fn transverse_gradient(f: &[Complex64], lattice: &ApertureLattice) -> (Vec<Complex64>, Vec<Complex64>) {
    let (m, n) = (lattice.m_count, lattice.n_count);
    let mut gx = vec![ZERO; m * n];
    let mut gy = vec![ZERO; m * n];
    let mut buf = vec![ZERO; m.max(n)];
    for col in 0..n {
        axis_derivative(&f[col..], m, n, lattice.dx, &mut buf[..m]);
        for row in 0..m {
            gx[row * n + col] = buf[row];
        }
    }
    for row in 0..m {
        axis_derivative(&f[row * n..], n, 1, lattice.dy, &mut buf[..n]);
        gy[row * n..(row + 1) * n].copy_from_slice(&buf[..n]);
    }
    (gx, gy)
}

pub fn gstc_currents(
    p: &PolarizationDensities,
    lattice: &ApertureLattice,
    constants: &PhysicalConstants,
) -> Result<SurfaceCurrentGrid> {
    let n = lattice.cell_count();
    if p.p_e.len() != n || p.p_h.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "lattice has {n} cells, densities {} / {}",
            p.p_e.len(),
            p.p_h.len()
        )));
    }
    let jw = Complex64::new(0.0, constants.omega);
    let pe_z: Vec<Complex64> = p.p_e.iter().map(|v| v[2]).collect();
    let ph_z: Vec<Complex64> = p.p_h.iter().map(|v| v[2]).collect();
    let mut out = SurfaceCurrentGrid::zeros(lattice);
    for i in 0..n {
        out.je_x[i] = jw * p.p_e[i][0];
        out.je_y[i] = jw * p.p_e[i][1];
        out.jh_x[i] = jw * constants.mu0 * p.p_h[i][0];
        out.jh_y[i] = jw * constants.mu0 * p.p_h[i][1];
    }
    // ẑ × ∇f = (-∂y f, ∂x f)
    if ph_z.iter().any(|v| *v != ZERO) {
        let (gx, gy) = transverse_gradient(&ph_z, lattice);
        for i in 0..n {
            out.je_x[i] += gy[i];
            out.je_y[i] -= gx[i];
        }
    }
    if pe_z.iter().any(|v| *v != ZERO) {
        let (gx, gy) = transverse_gradient(&pe_z, lattice);
        let inv_eps = 1.0 / constants.eps0;
        for i in 0..n {
            out.jh_x[i] -= gy[i] * inv_eps;
            out.jh_y[i] += gx[i] * inv_eps;
        }
    }
    Ok(out)
}

/// Full chain from layout to sheet currents under a given illumination.
pub fn currents_for_layout(
    layout: &EMSLayout,
    table: &MetaAtomTable,
    incident: &crate::incident::IncidentFieldGrid,
    constants: &PhysicalConstants,
) -> Result<SurfaceCurrentGrid> {
    if !layout.matches(&incident.lattice) {
        return Err(Error::ShapeMismatch(format!(
            "layout {}x{} on lattice {}x{}",
            layout.m_count, layout.n_count, incident.lattice.m_count, incident.lattice.n_count
        )));
    }
    let gammas = layout
        .g
        .iter()
        .map(|&g| table.lookup_response(g).map(|r| r.1))
        .collect::<Result<Vec<_>>>()?;
    let (e_avg, h_avg) = crate::incident::surface_averaged_field(incident, &gammas)?;
    let p = polarization_densities(layout, table, &e_avg, &h_avg, constants.eps0)?;
    gstc_currents(&p, &incident.lattice, constants)
}

/// Unwrapped reflection phase (degrees) of the ∥∥ entry across the table.
pub fn reflection_phase_sweep(table: &MetaAtomTable) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(table.len());
    for i in 0..table.len() {
        let ph = table.entry(i).1.gamma_ss.arg();
        let v = match out.last() {
            None => ph,
            Some(&prev) => prev + (ph - prev + PI).rem_euclid(2.0 * PI) - PI,
        };
        out.push(v);
    }
    out.into_iter().map(f64::to_degrees).collect()
}
