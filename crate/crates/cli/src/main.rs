use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gwcavity::analytics::{semiclassical_series, squeezing_amplitude};
use gwcavity::gw::{coupling_strength, graviton_number, CouplingResult};
use gwcavity::output::{
    json_document, modes_csv, observables_csv, overlap_csv, resonance_csv, semiclassical_csv, sweep_csv, Provenance,
};
use gwcavity::quadrature::Origin;
use gwcavity::resonance::find_resonant_pairs;
use gwcavity::scenario::{parse_value, source_hash, EvolveSummary, ModeSelection, ModesSpec, Scenario};
use gwcavity::{Error, Result};
use rayon::prelude::*;
use serde_json::json;

mod bundled;

#[derive(Parser)]
#[command(name = "gwcavity", version, about = "Graviton-photon three-wave mixing in a rectangular cavity")]
struct Cli {
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Initial Gauss-Legendre order per axis for overlap integrals.
    #[arg(long, global = true)]
    quad_order: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List TE mode frequencies.
    Modes {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Largest index per axis.
        #[arg(long, default_value_t = 8)]
        max_index: u32,
    },
    /// Find resonant mode pairs for the GW and compute |A| and g for each.
    Resonance {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[command(flatten)]
        gw: GwArgs,
        /// Relative tolerance on Ω − ω_α − ω_β.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_index: Option<u32>,
    },
    /// Overlap integrals of the selected partner modes, for both origins.
    Overlap {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[command(flatten)]
        gw: GwArgs,
    },
    /// Exact dynamics of the scenario's initial state.
    Evolve,
    /// Evolve once per value of one scenario key.
    Sweep {
        /// `key=v1,v2,...` with a dotted scenario key, e.g. `initial.alpha.n=0,1,3,8`.
        #[arg(long)]
        axis: String,
    },
    /// Undepleted-pump predictions on the scenario's time grid.
    Semiclassical,
}

#[derive(Args)]
struct GeometryArgs {
    /// Cube side, m.
    #[arg(long, conflicts_with_all = ["sides_m", "cubic_resonant_ghz"])]
    cubic_side_m: Option<f64>,
    /// Side lengths `Lx,Ly,Lz`, m.
    #[arg(long, value_delimiter = ',', num_args = 3, conflicts_with = "cubic_resonant_ghz")]
    sides_m: Option<Vec<f64>>,
    /// Cube sized so that ω₁₁₁ + ω₂₁₁ equals this frequency.
    #[arg(long)]
    cubic_resonant_ghz: Option<f64>,
}

#[derive(Args)]
struct GwArgs {
    #[arg(long)]
    frequency_ghz: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta_rad: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi_rad: Option<f64>,
}

type Overrides = Vec<(String, toml::Value)>;

impl GeometryArgs {
    fn overrides(&self, out: &mut Overrides) {
        let table = if let Some(l) = self.cubic_side_m {
            format!("{{ cubic_side_m = {l:?} }}")
        } else if let Some(s) = &self.sides_m {
            format!("{{ sides_m = [{:?}, {:?}, {:?}] }}", s[0], s[1], s[2])
        } else if let Some(f) = self.cubic_resonant_ghz {
            format!("{{ cubic_resonant_ghz = {f:?} }}")
        } else {
            return;
        };
        out.push(("geometry".into(), parse_value(&table).expect("well-formed inline table")));
    }
}

impl GwArgs {
    fn overrides(&self, out: &mut Overrides) {
        for (key, v) in
            [("frequency_ghz", self.frequency_ghz), ("theta_rad", self.theta_rad), ("phi_rad", self.phi_rad)]
        {
            if let Some(v) = v {
                out.push((format!("gw.{key}"), toml::Value::Float(v)));
            }
        }
    }
}

/// Scenario text plus command-line overrides; the provenance hash covers both.
struct Inputs {
    scenario: Scenario,
    text: String,
    overrides: Overrides,
}

impl Inputs {
    fn load(cli: &Cli, mut overrides: Overrides) -> Result<Self> {
        let text = match &cli.scenario {
            Some(s) => read_scenario(s)?,
            None => "name = \"cli\"\n".to_string(),
        };
        if let Some(order) = cli.quad_order {
            overrides.push(("quadrature.order".into(), toml::Value::Integer(order as i64)));
        }
        let scenario = Scenario::parse_with_overrides(&text, &overrides)?;
        Ok(Self { scenario, text, overrides })
    }

    fn with(&self, extra: (String, toml::Value)) -> Result<Scenario> {
        let mut all = self.overrides.clone();
        all.push(extra);
        Scenario::parse_with_overrides(&self.text, &all)
    }

    fn provenance(&self, extra: &str) -> Provenance {
        let mut text = self.text.clone();
        for (k, v) in &self.overrides {
            text.push_str(&format!("# override {k} = {v}\n"));
        }
        text.push_str(extra);
        Provenance::new(source_hash(&text))
    }
}

fn read_scenario(name: &str) -> Result<String> {
    let path = Path::new(name);
    if path.exists() {
        return Ok(fs::read_to_string(path)?);
    }
    bundled::lookup(name).map(str::to_string).ok_or_else(|| {
        Error::Config(format!(
            "scenario {name:?} is neither a file nor a bundled scenario ({})",
            bundled::NAMES.join(", ")
        ))
    })
}

fn write(out: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(out)?;
    let path = out.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn report(path: &Path) {
    println!("wrote {}", path.display());
}

fn cmd_modes(cli: &Cli, geometry: &GeometryArgs, max_index: u32) -> Result<()> {
    let mut ov = Vec::new();
    geometry.overrides(&mut ov);
    let inputs = Inputs::load(cli, ov)?;
    let prov = inputs.provenance(&format!("# modes max_index {max_index}\n"));
    let csv = modes_csv(&prov, &inputs.scenario.geometry(), max_index);
    report(&write(&cli.out, &format!("{}_modes.csv", inputs.scenario.name), &csv)?);
    Ok(())
}

fn cmd_resonance(cli: &Cli, geometry: &GeometryArgs, gw: &GwArgs, tol: Option<f64>, cap: Option<u32>) -> Result<()> {
    let mut ov = Vec::new();
    geometry.overrides(&mut ov);
    gw.overrides(&mut ov);
    let inputs = Inputs::load(cli, ov)?;
    let s = &inputs.scenario;
    let modes = s.modes.clone();
    let tol = tol.or(modes.as_ref().map(|m| m.tolerance_rel)).unwrap_or(gwcavity::resonance::EXACT_RESONANCE_TOL);
    let cap = cap.or(modes.as_ref().map(|m| m.index_cap)).unwrap_or(gwcavity::resonance::DEFAULT_INDEX_CAP);
    let geom = s.geometry();
    let wave = s.gw_mode()?;
    let pairs = find_resonant_pairs(&geom, wave.omega, cap, tol)?;
    let rows: Vec<(f64, CouplingResult)> = pairs
        .par_iter()
        .map(|p| coupling_strength(&geom, p.alpha, p.beta, &wave, &s.quadrature).map(|c| (p.detuning, c)))
        .collect::<Result<_>>()?;
    let prov = inputs.provenance(&format!("# resonance tol {tol:e} max_index {cap}\n"));
    report(&write(&cli.out, &format!("{}_resonance.csv", s.name), &resonance_csv(&prov, &rows))?);
    println!("{} resonant pair(s)", rows.len());
    Ok(())
}

fn cmd_overlap(cli: &Cli, geometry: &GeometryArgs, gw: &GwArgs) -> Result<()> {
    let mut ov = Vec::new();
    geometry.overrides(&mut ov);
    gw.overrides(&mut ov);
    let inputs = Inputs::load(cli, ov)?;
    let mut s = inputs.scenario.clone();
    if s.modes.is_none() {
        s.modes = Some(ModesSpec {
            selection: ModeSelection::AutoResonant,
            alpha: None,
            betas: None,
            index_cap: gwcavity::resonance::DEFAULT_INDEX_CAP,
            tolerance_rel: gwcavity::resonance::EXACT_RESONANCE_TOL,
            overlaps: None,
        });
        s.validate()?;
    }
    let modes = s.resolve_modes()?.expect("modes present");
    let geom = s.geometry();
    let wave = s.gw_mode()?;
    let started = Instant::now();
    let jobs: Vec<(Origin, gwcavity::cavity::ModeIndex)> =
        [Origin::Corner, Origin::Center].into_iter().flat_map(|o| modes.betas.iter().map(move |&b| (o, b))).collect();
    let rows: Vec<CouplingResult> = jobs
        .par_iter()
        .map(|&(origin, beta)| {
            let quad = gwcavity::quadrature::QuadratureSpec { origin, ..s.quadrature };
            coupling_strength(&geom, modes.alpha, beta, &wave, &quad)
        })
        .collect::<Result<_>>()?;
    let elapsed = started.elapsed().as_secs_f64();

    let prov = inputs.provenance("# overlap\n");
    report(&write(&cli.out, &format!("{}_overlap.csv", s.name), &overlap_csv(&prov, &rows))?);
    let per_origin = |o: Origin| {
        let mags: Vec<f64> = rows.iter().filter(|c| c.overlap.origin == o).map(|c| c.overlap.magnitude()).collect();
        let re: Vec<f64> = rows.iter().filter(|c| c.overlap.origin == o).map(|c| c.overlap.re).collect();
        let im: Vec<f64> = rows.iter().filter(|c| c.overlap.origin == o).map(|c| c.overlap.im).collect();
        let norm = mags.iter().map(|a| a * a).sum::<f64>().sqrt();
        let coefficients: Vec<f64> = mags.iter().map(|a| if norm > 0.0 { a / norm } else { 0.0 }).collect();
        json!({ "abs": mags, "re": re, "im": im, "norm": norm, "bright_coefficients": coefficients })
    };
    let strain = s.gw.and_then(|g| g.strain);
    let mut body = json!({
        "alpha": modes.alpha,
        "betas": modes.betas,
        "corner": per_origin(Origin::Corner),
        "center": per_origin(Origin::Center),
        "elapsed_s": elapsed,
    });
    if let Some(h) = strain {
        // undepleted-pump squeezing after 2 s using the bright-mode coupling
        let n_g = graviton_number(h, wave.omega / (2.0 * std::f64::consts::PI));
        let g_bright =
            rows.iter().filter(|c| c.overlap.origin == Origin::Corner).map(|c| c.g * c.g).sum::<f64>().sqrt();
        body["graviton_number"] = json!(n_g);
        body["bright_coupling_rad_per_s"] = json!(g_bright);
        body["squeezing_after_2s"] = json!(squeezing_amplitude(g_bright, n_g, 2.0));
    }
    report(&write(&cli.out, &format!("{}_overlap.json", s.name), &json_document(&prov, &body))?);
    Ok(())
}

fn cmd_evolve(cli: &Cli) -> Result<()> {
    let inputs = Inputs::load(cli, Vec::new())?;
    let s = &inputs.scenario;
    let r = s.run_evolve()?;
    let prov = inputs.provenance("");
    report(&write(&cli.out, &format!("{}_observables.csv", s.name), &observables_csv(&prov, &r.series))?);
    report(&write(&cli.out, &format!("{}_summary.json", s.name), &json_document(&prov, &r.summary))?);
    Ok(())
}

fn cmd_sweep(cli: &Cli, axis: &str) -> Result<()> {
    let (key, values) =
        axis.split_once('=').ok_or_else(|| Error::Config(format!("axis {axis:?} must look like key=v1,v2,...")))?;
    let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if key.is_empty() || values.is_empty() {
        return Err(Error::Config(format!("axis {axis:?} needs a key and at least one value")));
    }
    let inputs = Inputs::load(cli, Vec::new())?;
    let scenarios: Vec<Scenario> =
        values.iter().map(|v| inputs.with((key.to_string(), parse_value(v)?))).collect::<Result<_>>()?;
    let runs: Vec<(String, gwcavity::scenario::EvolveReport)> = scenarios
        .par_iter()
        .zip(values.par_iter())
        .map(|(s, v)| s.run_evolve().map(|r| (v.to_string(), r)))
        .collect::<Result<_>>()?;
    let name = &inputs.scenario.name;
    let prov = inputs.provenance(&format!("# sweep {axis}\n"));
    let summaries: Vec<serde_json::Value> = runs
        .iter()
        .map(|(v, r)| {
            let summary: &EvolveSummary = &r.summary;
            json!({ "value": v, "summary": summary })
        })
        .collect();
    let series: Vec<(String, gwcavity::fock::ObservableSeries)> =
        runs.into_iter().map(|(v, r)| (v, r.series)).collect();
    report(&write(&cli.out, &format!("{name}_sweep.csv"), &sweep_csv(&prov, key, &series))?);
    let body = json!({ "axis": key, "runs": summaries });
    report(&write(&cli.out, &format!("{name}_sweep.json"), &json_document(&prov, &body))?);
    Ok(())
}

fn cmd_semiclassical(cli: &Cli) -> Result<()> {
    let inputs = Inputs::load(cli, Vec::new())?;
    let s = &inputs.scenario;
    let n_g = s.initial.graviton.mean_occupation();
    let g = s.dynamics.coupling();
    let rows = semiclassical_series(g, n_g, &s.times());
    let prov = inputs.provenance("# semiclassical\n");
    report(&write(&cli.out, &format!("{}_semiclassical.csv", s.name), &semiclassical_csv(&prov, g, &rows))?);
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
    }
    match &cli.command {
        Command::Modes { geometry, max_index } => cmd_modes(cli, geometry, *max_index),
        Command::Resonance { geometry, gw, tol, max_index } => cmd_resonance(cli, geometry, gw, *tol, *max_index),
        Command::Overlap { geometry, gw } => cmd_overlap(cli, geometry, gw),
        Command::Evolve => cmd_evolve(cli),
        Command::Sweep { axis } => cmd_sweep(cli, axis),
        Command::Semiclassical => cmd_semiclassical(cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
