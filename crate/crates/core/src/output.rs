//! CSV and JSON writers. Every file starts with `# ` comment lines naming the
//! tool version, the scenario hash and the constants-table hash; floats are
//! printed with 12 significant digits so identical inputs give identical
//! bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::analytics::SemiclassicalPrediction;
use crate::cavity::{mode_frequency, CavityGeometry, ModeIndex};
use crate::constants::table_hash;
use crate::fock::ObservableSeries;
use crate::gw::CouplingResult;
use crate::quadrature::Origin;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub tool_version: String,
    /// SHA-256 of the scenario text, or of the command-line inputs when no
    /// scenario file was used.
    pub scenario_sha256: String,
    pub constants_sha256: String,
}

impl Provenance {
    pub fn new(scenario_sha256: impl Into<String>) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            scenario_sha256: scenario_sha256.into(),
            constants_sha256: table_hash(),
        }
    }

    fn header(&self) -> String {
        format!(
            "# gwcavity {}\n# scenario_sha256 {}\n# constants_sha256 {}\n",
            self.tool_version, self.scenario_sha256, self.constants_sha256
        )
    }
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

fn push_row(out: &mut String, fields: impl IntoIterator<Item = String>) {
    let row: Vec<String> = fields.into_iter().collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

/// Columns of the observable table; at least three partner-mode columns.
pub fn observable_columns(members: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["tau", "n_b", "n_alpha", "n_c"].map(String::from).to_vec();
    cols.extend((1..=members.max(3)).map(|i| format!("n_beta{i}")));
    cols.extend(["purity", "entropy", "n_c_semiclassical"].map(String::from));
    cols
}

fn member_count(series: &ObservableSeries) -> usize {
    series.points.iter().map(|p| p.members.len()).max().unwrap_or(0)
}

fn observable_fields(p: &crate::fock::ObservablePoint, members: usize) -> Vec<String> {
    let mut f = vec![fmt_float(p.tau), fmt_float(p.n_b), fmt_float(p.n_alpha), fmt_float(p.n_c)];
    f.extend((0..members.max(3)).map(|i| fmt_float(p.members.get(i).copied().unwrap_or(0.0))));
    f.extend([fmt_float(p.purity), fmt_float(p.entropy), fmt_float(p.n_c_semiclassical)]);
    f
}

pub fn observables_csv(prov: &Provenance, series: &ObservableSeries) -> String {
    let members = member_count(series);
    let mut out = prov.header();
    push_row(&mut out, observable_columns(members));
    for p in &series.points {
        push_row(&mut out, observable_fields(p, members));
    }
    out
}

/// Long-format table: one block of observable rows per swept value, in the
/// order given.
pub fn sweep_csv(prov: &Provenance, axis: &str, runs: &[(String, ObservableSeries)]) -> String {
    let members = runs.iter().map(|(_, s)| member_count(s)).max().unwrap_or(0);
    let mut out = prov.header();
    let _ = writeln!(out, "# sweep_axis {axis}");
    push_row(&mut out, std::iter::once(axis.to_string()).chain(observable_columns(members)));
    for (value, series) in runs {
        for p in &series.points {
            push_row(&mut out, std::iter::once(value.clone()).chain(observable_fields(p, members)));
        }
    }
    out
}

/// Every mode with indices up to `cap`, ascending in frequency (ties by
/// index).
pub fn modes_csv(prov: &Provenance, geom: &CavityGeometry, cap: u32) -> String {
    let mut modes: Vec<(f64, ModeIndex)> =
        ModeIndex::enumerate(cap).into_iter().map(|i| (mode_frequency(geom, i), i)).collect();
    modes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out = prov.header();
    out.push_str("m,n,p,frequency_ghz\n");
    for (w, i) in modes {
        let [m, n, p] = i.components();
        let _ = writeln!(out, "{m},{n},{p},{}", fmt_float(w / (2.0 * std::f64::consts::PI) / 1e9));
    }
    out
}

/// Resonant pairs with `|A|` and `g`.
pub fn resonance_csv(prov: &Provenance, rows: &[(f64, CouplingResult)]) -> String {
    let mut out = prov.header();
    out.push_str("m,n,p,m',n',p',omega_alpha,omega_beta,delta,A,g\n");
    for (delta, c) in rows {
        let [m, n, p] = c.alpha.components();
        let [m2, n2, p2] = c.beta.components();
        let _ = writeln!(
            out,
            "{m},{n},{p},{m2},{n2},{p2},{},{},{},{},{}",
            fmt_float(c.omega_alpha),
            fmt_float(c.omega_beta),
            fmt_float(*delta),
            fmt_float(c.overlap.magnitude()),
            fmt_float(c.g)
        );
    }
    out
}

/// Overlaps for each origin convention. `bright_coefficient` is `|A_i|/|A|`
/// within the rows of the same origin.
pub fn overlap_csv(prov: &Provenance, rows: &[CouplingResult]) -> String {
    let mut out = prov.header();
    out.push_str("m,n,p,m',n',p',origin,order,re,im,abs,bright_coefficient,g,mismatch_score\n");
    for origin in [Origin::Corner, Origin::Center] {
        let subset: Vec<&CouplingResult> = rows.iter().filter(|c| c.overlap.origin == origin).collect();
        let norm = subset.iter().map(|c| c.overlap.magnitude().powi(2)).sum::<f64>().sqrt();
        for c in subset {
            let [m, n, p] = c.alpha.components();
            let [m2, n2, p2] = c.beta.components();
            let ratio = if norm > 0.0 { c.overlap.magnitude() / norm } else { 0.0 };
            let _ = writeln!(
                out,
                "{m},{n},{p},{m2},{n2},{p2},{},{},{},{},{},{},{},{}",
                origin.name(),
                c.overlap.order,
                fmt_float(c.overlap.re),
                fmt_float(c.overlap.im),
                fmt_float(c.overlap.magnitude()),
                fmt_float(ratio),
                fmt_float(c.g),
                fmt_float(c.mismatch.score)
            );
        }
    }
    out
}

pub fn semiclassical_csv(prov: &Provenance, coupling: f64, rows: &[SemiclassicalPrediction]) -> String {
    let mut out = prov.header();
    out.push_str("tau,t,r,n_total,n_per_mode,valid\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_float(coupling * r.t),
            fmt_float(r.t),
            fmt_float(r.r),
            fmt_float(r.n_total),
            fmt_float(r.n_per_mode),
            u8::from(r.valid)
        );
    }
    out
}

#[derive(Serialize)]
struct WithProvenance<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty-printed JSON object with a `provenance` member added.
pub fn json_document<T: Serialize>(prov: &Provenance, body: &T) -> String {
    let mut s =
        serde_json::to_string_pretty(&WithProvenance { provenance: prov, body }).expect("summary types serialize");
    s.push('\n');
    s
}
