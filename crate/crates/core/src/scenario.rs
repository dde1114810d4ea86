//! Scenario files.
//!
//! A scenario is a TOML document whose keys carry their units
//! (`frequency_ghz`, `sides_m`, `theta_rad`, ...). Unknown keys are errors, and
//! everything that can be checked without running a computation is checked
//! when the file is parsed.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cavity::{CavityGeometry, ModeIndex};
use crate::error::{Error, Result};
use crate::fock::{
    evolve, ConservationDrift, DynamicsParams, ModeInit, ObservableSeries, SectorState, DEFAULT_MAX_SECTOR_DIM,
};
use crate::gw::{overlap_integral, Drive, GwMode, Polarization};
use crate::quadrature::QuadratureSpec;
use crate::resonance::{
    bright_dark_decomposition, degenerate_groups, find_resonant_pairs, BrightDecomposition, DEFAULT_INDEX_CAP,
    EXACT_RESONANCE_TOL,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub geometry: GeometrySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gw: Option<GwSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<ModesSpec>,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub dynamics: DynamicsSpec,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

/// Exactly one of the three forms must be given.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sides_m: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cubic_side_m: Option<f64>,
    /// Cube sized so that `ω₁₁₁ + ω₂₁₁` equals this frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cubic_resonant_ghz: Option<f64>,
}

impl GeometrySpec {
    pub fn build(&self) -> Result<CavityGeometry> {
        match (self.sides_m, self.cubic_side_m, self.cubic_resonant_ghz) {
            (Some([x, y, z]), None, None) => CavityGeometry::new(x, y, z),
            (None, Some(l), None) => CavityGeometry::cubic(l),
            (None, None, Some(f)) => CavityGeometry::cubic_resonant(f * 1e9),
            _ => Err(Error::config("geometry needs exactly one of sides_m, cubic_side_m, cubic_resonant_ghz")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GwSpec {
    pub frequency_ghz: f64,
    pub theta_rad: f64,
    pub phi_rad: f64,
    #[serde(default = "default_polarization")]
    pub polarization: Polarization,
    /// Classical strain `h₊`; used for the graviton-number estimate only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strain: Option<f64>,
}

fn default_polarization() -> Polarization {
    Polarization::Plus
}

impl GwSpec {
    pub fn build(&self) -> Result<GwMode> {
        GwMode::from_frequency_hz(
            self.theta_rad,
            self.phi_rad,
            self.frequency_ghz * 1e9,
            self.polarization,
            Drive::Strain(self.strain.unwrap_or(0.0)),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSelection {
    /// The degenerate group of the best resonant pair.
    AutoResonant,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesSpec {
    pub selection: ModeSelection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<ModeIndex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<ModeIndex>>,
    #[serde(default = "default_index_cap")]
    pub index_cap: u32,
    #[serde(default = "default_tolerance")]
    pub tolerance_rel: f64,
    /// Member overlaps `A_i`. When absent they are computed by quadrature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlaps: Option<Vec<f64>>,
}

fn default_index_cap() -> u32 {
    DEFAULT_INDEX_CAP
}

fn default_tolerance() -> f64 {
    EXACT_RESONANCE_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default = "vacuum")]
    pub graviton: ModeInit,
    #[serde(default = "vacuum")]
    pub alpha: ModeInit,
    /// The collective (bright) partner mode.
    #[serde(default = "vacuum")]
    pub collective: ModeInit,
}

fn vacuum() -> ModeInit {
    ModeInit::Vacuum
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self { graviton: vacuum(), alpha: vacuum(), collective: vacuum() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
    /// `|g|`. Without it times are measured in units of `1/g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_rad_per_s: Option<f64>,
    #[serde(default)]
    pub detuning_rad_per_s: f64,
    #[serde(default = "default_max_sector_dim")]
    pub max_sector_dim: usize,
}

fn default_max_sector_dim() -> usize {
    DEFAULT_MAX_SECTOR_DIM
}

impl Default for DynamicsSpec {
    fn default() -> Self {
        Self { coupling_rad_per_s: None, detuning_rad_per_s: 0.0, max_sector_dim: DEFAULT_MAX_SECTOR_DIM }
    }
}

impl DynamicsSpec {
    pub fn coupling(&self) -> f64 {
        self.coupling_rad_per_s.unwrap_or(1.0)
    }
}

/// Uniform grid of `points` values over `[0, tau_max]` unless `tau` lists the
/// values explicitly. `τ = g t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<f64>>,
}

fn default_tau_max() -> f64 {
    3.0
}

fn default_points() -> usize {
    400
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self { tau_max: default_tau_max(), points: default_points(), tau: None }
    }
}

impl TimeSpec {
    pub fn grid(&self) -> Vec<f64> {
        match &self.tau {
            Some(list) => list.clone(),
            None if self.points == 1 => vec![0.0],
            None => (0..self.points).map(|i| self.tau_max * i as f64 / (self.points - 1) as f64).collect(),
        }
    }
}

/// Modes taking part in the dynamics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedModes {
    pub alpha: ModeIndex,
    pub betas: Vec<ModeIndex>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveSummary {
    pub scenario: String,
    pub coupling_rad_per_s: f64,
    pub detuning_rad_per_s: f64,
    pub initial_graviton_mean: f64,
    pub sectors: usize,
    pub largest_sector: usize,
    pub points: usize,
    pub drift: ConservationDrift,
    pub peak_n_c: f64,
    pub first_peak_tau: Option<f64>,
    pub first_peak_n_c: Option<f64>,
    pub min_purity: f64,
    pub member_overlaps: Option<Vec<f64>>,
    pub overlap_norm: Option<f64>,
}

pub struct EvolveReport {
    pub series: ObservableSeries,
    pub decomposition: Option<BrightDecomposition>,
    pub summary: EvolveSummary,
}

impl Scenario {
    /// Parse and validate.
    pub fn parse(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Read, parse and validate; also returns the raw text for hashing.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        Ok((Self::parse(&text)?, text))
    }

    /// Parse after replacing the value at each dotted key path, in order
    /// (tables are created as needed).
    pub fn parse_with_overrides(text: &str, overrides: &[(String, toml::Value)]) -> Result<Self> {
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        for (key, value) in overrides {
            set_dotted(&mut doc, key, value.clone())?;
        }
        let scenario: Scenario = doc.try_into().map_err(|e: toml::de::Error| Error::config(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.build()?;
        if let Some(gw) = &self.gw {
            gw.build()?;
        }
        if let Some(m) = &self.modes {
            match m.selection {
                ModeSelection::Explicit => {
                    let betas = m.betas.as_ref().filter(|b| !b.is_empty());
                    if m.alpha.is_none() || betas.is_none() {
                        return Err(Error::config("explicit mode selection needs alpha and a non-empty betas list"));
                    }
                }
                ModeSelection::AutoResonant => {
                    if self.gw.is_none() {
                        return Err(Error::config("auto_resonant mode selection needs a [gw] section"));
                    }
                    if m.alpha.is_some() || m.betas.is_some() {
                        return Err(Error::config("alpha/betas are only allowed with explicit selection"));
                    }
                    if m.index_cap < 1 {
                        return Err(Error::config("modes.index_cap must be at least 1"));
                    }
                }
            }
            if !(m.tolerance_rel.is_finite() && m.tolerance_rel >= 0.0) {
                return Err(Error::config("modes.tolerance_rel must be a non-negative number"));
            }
            if let (Some(ov), Some(b)) = (&m.overlaps, &m.betas) {
                if ov.len() != b.len() {
                    return Err(Error::config(format!(
                        "modes.overlaps has {} entries for {} betas",
                        ov.len(),
                        b.len()
                    )));
                }
            }
            if let Some(ov) = &m.overlaps {
                if ov.iter().all(|a| *a == 0.0) || ov.iter().any(|a| !a.is_finite()) {
                    return Err(Error::config("modes.overlaps must be finite and not all zero"));
                }
            }
        }
        for init in [self.initial.graviton, self.initial.alpha, self.initial.collective] {
            init.amplitudes()?;
        }
        let d = &self.dynamics;
        if !(d.coupling().is_finite() && d.coupling() >= 0.0) {
            return Err(Error::config("dynamics.coupling_rad_per_s must be non-negative"));
        }
        if d.coupling() == 0.0 {
            return Err(Error::config("dynamics.coupling_rad_per_s = 0 leaves τ = g t undefined"));
        }
        if !d.detuning_rad_per_s.is_finite() {
            return Err(Error::config("dynamics.detuning_rad_per_s must be finite"));
        }
        let t = &self.time;
        match &t.tau {
            Some(list) => {
                if list.is_empty() || list.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(Error::config("time.tau must be a non-empty list of non-negative values"));
                }
            }
            None => {
                if t.points == 0 || !(t.tau_max.is_finite() && t.tau_max >= 0.0) {
                    return Err(Error::config("time needs points ≥ 1 and a non-negative tau_max"));
                }
            }
        }
        if self.quadrature.order < 2 {
            return Err(Error::config("quadrature.order must be at least 2"));
        }
        Ok(())
    }

    pub fn geometry(&self) -> CavityGeometry {
        self.geometry.build().expect("validated")
    }

    pub fn gw_mode(&self) -> Result<GwMode> {
        self.gw.as_ref().ok_or_else(|| Error::config("scenario has no [gw] section"))?.build()
    }

    pub fn resolve_modes(&self) -> Result<Option<ResolvedModes>> {
        let Some(m) = &self.modes else { return Ok(None) };
        match m.selection {
            ModeSelection::Explicit => Ok(Some(ResolvedModes {
                alpha: m.alpha.expect("validated"),
                betas: m.betas.clone().expect("validated"),
            })),
            ModeSelection::AutoResonant => {
                let geom = self.geometry();
                let gw = self.gw_mode()?;
                let pairs = find_resonant_pairs(&geom, gw.omega, m.index_cap, m.tolerance_rel)?;
                let best = pairs.first().ok_or_else(|| {
                    Error::config(format!(
                        "no resonant pair within relative tolerance {} up to index {}",
                        m.tolerance_rel, m.index_cap
                    ))
                })?;
                let group = degenerate_groups(&pairs, 1e-12)
                    .into_iter()
                    .find(|g| g.iter().any(|p| p == best))
                    .expect("best pair belongs to a group");
                Ok(Some(ResolvedModes { alpha: best.alpha, betas: group.iter().map(|p| p.beta).collect() }))
            }
        }
    }

    /// Member overlaps `|A_i|`, from the file or by quadrature.
    pub fn member_overlaps(&self, modes: &ResolvedModes) -> Result<Vec<f64>> {
        if let Some(ov) = self.modes.as_ref().and_then(|m| m.overlaps.clone()) {
            if ov.len() != modes.betas.len() {
                return Err(Error::config(format!(
                    "modes.overlaps has {} entries but {} partner modes were selected",
                    ov.len(),
                    modes.betas.len()
                )));
            }
            return Ok(ov);
        }
        let geom = self.geometry();
        let gw = self.gw_mode()?;
        modes
            .betas
            .iter()
            .map(|&b| overlap_integral(&geom, modes.alpha, b, &gw, &self.quadrature).map(|o| o.magnitude()))
            .collect()
    }

    pub fn initial_state(&self) -> Result<SectorState> {
        let i = &self.initial;
        SectorState::product(&i.graviton.amplitudes()?, &i.alpha.amplitudes()?, &i.collective.amplitudes()?)
    }

    pub fn dynamics_params(&self) -> DynamicsParams {
        DynamicsParams {
            coupling: self.dynamics.coupling(),
            detuning: self.dynamics.detuning_rad_per_s,
            max_sector_dim: self.dynamics.max_sector_dim,
        }
    }

    /// Times in seconds for the configured `τ` grid.
    pub fn times(&self) -> Vec<f64> {
        let g = self.dynamics.coupling();
        self.time.grid().into_iter().map(|tau| tau / g).collect()
    }

    pub fn run_evolve(&self) -> Result<EvolveReport> {
        let decomposition = match self.resolve_modes()? {
            Some(modes) => Some(bright_dark_decomposition(&self.member_overlaps(&modes)?)?),
            None => None,
        };
        let initial = self.initial_state()?;
        let params = self.dynamics_params();
        let ev = evolve(&initial, &params, &self.times(), decomposition.as_ref())?;
        let series = ev.series;
        let peak = series.first_peak();
        let summary = EvolveSummary {
            scenario: self.name.clone(),
            coupling_rad_per_s: params.coupling,
            detuning_rad_per_s: params.detuning,
            initial_graviton_mean: initial.occupations().n_b,
            sectors: initial.blocks().len(),
            largest_sector: initial.blocks().iter().map(|b| b.sector.dim()).max().unwrap_or(0),
            points: series.points.len(),
            drift: series.drift(),
            peak_n_c: series.peak_n_c(),
            first_peak_tau: peak.map(|p| p.0),
            first_peak_n_c: peak.map(|p| p.1),
            min_purity: series.min_purity(),
            member_overlaps: decomposition.as_ref().map(|d| d.overlaps.clone()),
            overlap_norm: decomposition.as_ref().map(|d| d.norm),
        };
        Ok(EvolveReport { series, decomposition, summary })
    }
}

fn set_dotted(doc: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    let (last, path) =
        parts.split_last().filter(|(l, _)| !l.is_empty()).ok_or_else(|| Error::config("empty override key"))?;
    let mut table = doc;
    for part in path {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table =
            entry.as_table_mut().ok_or_else(|| Error::config(format!("override path {key}: {part} is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

/// Parse a command-line value as a TOML value; bare words become strings.
pub fn parse_value(text: &str) -> Result<toml::Value> {
    let doc: std::result::Result<toml::Table, _> = toml::from_str(&format!("v = {text}"));
    match doc {
        Ok(mut t) => Ok(t.remove("v").expect("single key")),
        Err(_) if !text.is_empty() && text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') => {
            Ok(toml::Value::String(text.to_string()))
        }
        Err(e) => Err(Error::config(format!("cannot parse value {text:?}: {e}"))),
    }
}

/// Hex SHA-256 of a scenario's source text.
pub fn source_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"
[geometry]
cubic_side_m = 0.2
"#;

    const SEC4: &str = r#"
name = "sec4"
[geometry]
cubic_resonant_ghz = 3.9
[gw]
frequency_ghz = 3.9
theta_rad = 1.5707963267948966
phi_rad = 0.5235987755982988
[modes]
selection = "auto_resonant"
overlaps = [1.75, 2.23, 1.44]
[initial]
graviton = { kind = "coherent", re = 2.0, cutoff = 40 }
[time]
tau_max = 1.0
points = 11
"#;

    #[test]
    fn minimal_defaults() {
        let s = Scenario::parse(MINIMAL).unwrap();
        assert_eq!(s.time.grid().len(), 400);
        assert_eq!(s.time.grid()[399], 3.0);
        assert_eq!(s.initial, InitialSpec::default());
        assert_eq!(s.dynamics.coupling(), 1.0);
        assert!(s.resolve_modes().unwrap().is_none());
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = MINIMAL.replace("cubic_side_m", "cubic_side");
        assert!(matches!(Scenario::parse(&bad), Err(Error::Config(_))));
        let extra = format!("{MINIMAL}[time]\ntau_maximum = 2.0\n");
        assert!(matches!(Scenario::parse(&extra), Err(Error::Config(_))));
    }

    #[test]
    fn geometry_forms_are_exclusive() {
        let both = MINIMAL.replace("cubic_side_m = 0.2", "cubic_side_m = 0.2\nsides_m = [0.1, 0.2, 0.3]");
        assert!(Scenario::parse(&both).is_err());
        let neg = MINIMAL.replace("0.2", "-0.2");
        assert!(matches!(Scenario::parse(&neg), Err(Error::Domain(_))));
    }

    #[test]
    fn insufficient_cutoff_reported_at_parse_time() {
        let text =
            format!("{MINIMAL}[initial]\ngraviton = {{ kind = \"coherent\", re = 7.0710678118654755, cutoff = 60 }}\n");
        match Scenario::parse(&text) {
            Err(Error::CutoffTooSmall { given: 60, required }) => assert_eq!(required, 93),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn auto_resonant_selects_triplet() {
        let s = Scenario::parse(SEC4).unwrap();
        let m = s.resolve_modes().unwrap().unwrap();
        assert_eq!(m.alpha, ModeIndex::new(1, 1, 1).unwrap());
        let betas: Vec<[u32; 3]> = m.betas.iter().map(|b| b.components()).collect();
        assert_eq!(betas, vec![[1, 1, 2], [1, 2, 1], [2, 1, 1]]);
        let r = s.run_evolve().unwrap();
        assert_eq!(r.series.points.len(), 11);
        assert_eq!(r.decomposition.unwrap().overlaps, vec![1.75, 2.23, 1.44]);
    }

    #[test]
    fn explicit_selection_needs_modes() {
        let text = SEC4.replace("selection = \"auto_resonant\"", "selection = \"explicit\"");
        assert!(Scenario::parse(&text).is_err());
        let text = SEC4.replace(
            "selection = \"auto_resonant\"",
            "selection = \"explicit\"\nalpha = [1, 1, 1]\nbetas = [[2, 1, 1]]",
        );
        assert!(Scenario::parse(&text).is_err(), "three overlaps for one beta");
        let text = text.replace("[1.75, 2.23, 1.44]", "[1.0]");
        assert!(Scenario::parse(&text).is_ok());
        let bad_index = text.replace("[2, 1, 1]", "[2, 0, 0]");
        assert!(Scenario::parse(&bad_index).is_err());
    }

    #[test]
    fn override_replaces_nested_value() {
        let text = format!("{MINIMAL}[initial]\nalpha = {{ kind = \"fock\", n = 0 }}\n");
        let set = |k: &str, v: &str| vec![(k.to_string(), parse_value(v).unwrap())];
        let s = Scenario::parse_with_overrides(&text, &set("initial.alpha.n", "3")).unwrap();
        assert_eq!(s.initial.alpha, ModeInit::Fock { n: 3 });
        let s = Scenario::parse_with_overrides(MINIMAL, &set("time.points", "5")).unwrap();
        assert_eq!(s.time.grid(), vec![0.0, 0.75, 1.5, 2.25, 3.0]);
        assert!(Scenario::parse_with_overrides(MINIMAL, &set("time.bogus", "5")).is_err());
        assert!(Scenario::parse_with_overrides(MINIMAL, &set("name.x", "5")).is_err());
        let s = Scenario::parse_with_overrides(MINIMAL, &set("geometry", "{ sides_m = [0.1, 0.2, 0.3] }")).unwrap();
        assert_eq!(s.geometry().sides(), [0.1, 0.2, 0.3]);
    }

    #[test]
    fn command_line_values() {
        assert_eq!(parse_value("3").unwrap(), toml::Value::Integer(3));
        assert_eq!(parse_value("2.5").unwrap(), toml::Value::Float(2.5));
        assert_eq!(parse_value("cross").unwrap(), toml::Value::String("cross".into()));
        assert!(parse_value("[1, 2").is_err());
    }

    #[test]
    fn coupling_sets_time_unit() {
        let text = format!("{MINIMAL}[dynamics]\ncoupling_rad_per_s = 4.0\n[time]\ntau_max = 2.0\npoints = 3\n");
        let s = Scenario::parse(&text).unwrap();
        assert_eq!(s.times(), vec![0.0, 0.25, 0.5]);
    }

    #[test]
    fn hash_depends_on_text() {
        assert_eq!(source_hash(MINIMAL), source_hash(MINIMAL));
        assert_ne!(source_hash(MINIMAL), source_hash(SEC4));
    }
}
