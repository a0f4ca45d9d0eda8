use clap::ValueEnum;
use kpo_core::classical::{classical_otoc_modes, mpmp_points, sensitivity_distance, sos_crossings};
use kpo_core::model::{build_hamiltonian, find_potential_minimum, potential, Quadrant};
use kpo_core::quantum::{quantum_mpmp_grids, quantum_sos_grids, Grid2D, GridSpec};
use kpo_core::spectral::{
    brody_cumulative, brody_fit, cumulative_counts, eigendecompose, even_energies, otoc_initial_state, parity_split,
    repair_parity, select_spacings, OtocEvaluator,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{real, Csv, RunOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Potential,
    ClassicalSos,
    ClassicalMpmp,
    Sensitivity,
    ClassicalOtoc,
    QuantumSos,
    QuantumMpmp,
    Otoc,
    Spectrum,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Potential => "potential",
            Experiment::ClassicalSos => "classical-sos",
            Experiment::ClassicalMpmp => "classical-mpmp",
            Experiment::Sensitivity => "sensitivity",
            Experiment::ClassicalOtoc => "classical-otoc",
            Experiment::QuantumSos => "quantum-sos",
            Experiment::QuantumMpmp => "quantum-mpmp",
            Experiment::Otoc => "otoc",
            Experiment::Spectrum => "spectrum",
        }
    }

    /// Seed of the random stream feeding this experiment, if it uses one.
    pub fn seed(self, c: &ExperimentConfig) -> Option<u64> {
        match self {
            Experiment::ClassicalSos => Some(c.sos.seed),
            Experiment::ClassicalMpmp => Some(c.mpmp.seed),
            Experiment::ClassicalOtoc => Some(c.otoc.ensemble.seed),
            Experiment::Otoc if c.otoc.with_classical => Some(c.otoc.ensemble.seed),
            _ => None,
        }
    }

    pub fn run(self, c: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
        match self {
            Experiment::Potential => run_potential(c, out),
            Experiment::ClassicalSos => run_classical_sos(c, out),
            Experiment::ClassicalMpmp => run_classical_mpmp(c, out),
            Experiment::Sensitivity => run_sensitivity(c, out),
            Experiment::ClassicalOtoc => run_classical_otoc(c, out, "classical_otoc"),
            Experiment::QuantumSos => run_quantum_sos(c, out),
            Experiment::QuantumMpmp => run_quantum_mpmp(c, out),
            Experiment::Otoc => run_otoc(c, out),
            Experiment::Spectrum => run_spectrum(c, out),
        }
    }
}

fn series_csv(times: &[f64], values: &[f64], column: &str) -> Csv {
    let mut csv = Csv::new(&["t", column]);
    for (t, v) in times.iter().zip(values) {
        csv.row(&[real(*t), real(*v)]);
    }
    csv
}

fn grid_csv(spec: &GridSpec, labels: [&str; 3], f: impl Fn(f64, f64) -> f64) -> Csv {
    let mut csv = Csv::new(&labels);
    for x in spec.x.points() {
        for y in spec.y.points() {
            csv.row(&[real(x), real(y), real(f(x, y))]);
        }
    }
    csv
}

fn run_potential(c: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let p = &c.model;
    out.write_csv(
        "potential.csv",
        grid_csv(&c.potential.grid, ["x1", "x2", "V"], |x1, x2| potential(x1, x2, p)),
    )?;

    let mut minima = Csv::new(&["sign1", "sign2", "x1", "x2", "V"]);
    for (s1, s2) in [(1, 1), (-1, 1), (-1, -1), (1, -1)] {
        match find_potential_minimum(p, Quadrant::new(s1, s2)) {
            Ok(m) => minima.row(&[
                s1.to_string(),
                s2.to_string(),
                real(m.x1),
                real(m.x2),
                real(potential(m.x1, m.x2, p)),
            ]),
            Err(e) => log::warn!("no minimum in quadrant ({s1}, {s2}): {e}"),
        }
    }
    out.write_csv("potential_minima.csv", minima)?;
    Ok(())
}

fn run_classical_sos(c: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let crossings = sos_crossings(&c.model, &c.sos_config())?;
    log::info!("{} crossings", crossings.len());
    let mut csv = Csv::new(&["member", "t", "x1", "y1"]);
    for k in &crossings {
        csv.row(&[k.member.to_string(), real(k.t), real(k.x1), real(k.y1)]);
    }
    out.write_csv("classical_sos.csv", csv)?;
    Ok(())
}

fn run_classical_mpmp(c: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let minimum = find_potential_minimum(&c.model, c.quadrant())?;
    let points = mpmp_points(&c.model, &c.mpmp_config(), &minimum)?;
    log::info!("{} points near ({:.4}, {:.4})", points.len(), minimum.x1, minimum.x2);
    let mut csv = Csv::new(&["member", "t", "y1", "y2"]);
    for p in &points {
        csv.row(&[p.member.to_string(), real(p.t), real(p.y1), real(p.y2)]);
    }
    out.write_csv("classical_mpmp.csv", csv)?;
    out.write_json(
        "classical_mpmp.json",
        &json!({ "minimum": minimum, "points": points.len() }),
    )?;
    Ok(())
}

fn run_sensitivity(c: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let series = sensitivity_distance(&c.model, &c.sensitivity_config())?;
    out.write_csv("sensitivity.csv", series_csv(&series.times, &series.values, "distance"))?;
    Ok(())
}

/// Whether `C_{i,1}` is emitted; the decoupled `C_{2,1}` vanishes identically.
fn emits_mode(c: &ExperimentConfig, i: usize) -> bool {
    c.otoc.modes.contains(&i) && !(i == 2 && c.model.xi0 == 0.0 && !c.otoc.zero_coupling_c21)
}

fn run_classical_otoc(c: &ExperimentConfig, out: &mut RunOutput, stem: &str) -> Result<(), CliError> {
    let times = c.otoc.times();
    let series = classical_otoc_modes(&c.model, &c.ensemble_config(), &times)?;
    for s in series.iter().filter(|s| emits_mode(c, s.i)) {
        let name = format!("{stem}_c{}{}.csv", s.i, s.j);
        out.write_csv(&name, series_csv(&s.series.times, &s.series.values, "value"))?;
    }
    Ok(())
}

fn run_otoc(c: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let dim = c.fock()?;
    c.model.validate()?;
    let h = build_hamiltonian(&c.model, dim);
    let eig = eigendecompose(&h)?;
    let evaluator = OtocEvaluator::new(&eig);
    let psi0 = otoc_initial_state(dim, c.otoc.radius, c.otoc.angle);
    let times = c.otoc.times();

    let mut residues = serde_json::Map::new();
    for i in [1, 2] {
        if !emits_mode(c, i) {
            if c.otoc.modes.contains(&i) {
                log::info!("C_{i},1 is identically zero without coupling; skipped");
            }
            continue;
        }
        let r = evaluator.evaluate(&psi0, i, 1, &times, c.otoc.check_reality)?;
        out.write_csv(&format!("otoc_c{i}1.csv"), series_csv(&r.times, &r.values, "value"))?;
        residues.insert(format!("c{i}1"), json!(r.max_imaginary));
    }
    if c.otoc.with_classical {
        run_classical_otoc(c, out, "classical_otoc")?;
    }
    out.write_json(
        "otoc.json",
        &json!({
            "n_max": dim.n_max(),
            "initial": { "radius": c.otoc.radius, "angle": c.otoc.angle },
            "max_imaginary": residues,
        }),
    )?;
    Ok(())
}

fn write_grids(out: &mut RunOutput, stem: &str, grids: &[Grid2D]) -> Result<(), CliError> {
    for g in grids {
        let kind = g.metadata.kind.name();
        let mut bytes = Vec::new();
        g.write_csv(&mut bytes)?;
        out.write(&format!("{stem}_{kind}.csv"), &bytes)?;
        out.write_json(
            &format!("{stem}_{kind}.json"),
            &json!({
                "grid": g.spec(),
                "metadata": g.metadata,
                "seed": null,
                "min": g.min_value(),
                "max": g.max_value(),
                "integral": g.integral(),
            }),
        )?;
    }
    Ok(())
}

fn run_quantum_sos(c: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let grids = quantum_sos_grids(&c.model, c.fock()?, &c.evolution(), &c.quasi.sos_grid, &c.quasi.kinds)?;
    write_grids(out, "quantum_sos", &grids)
}

fn run_quantum_mpmp(c: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let minimum = find_potential_minimum(&c.model, c.quadrant())?;
    let grids = quantum_mpmp_grids(
        &c.model,
        c.fock()?,
        &c.evolution(),
        &minimum,
        &c.quasi.mpmp_grid,
        &c.quasi.kinds,
    )?;
    write_grids(out, "quantum_mpmp", &grids)
}

fn run_spectrum(c: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let dim = c.fock()?;
    c.model.validate()?;
    let h = build_hamiltonian(&c.model, dim);
    let mut eig = eigendecompose(&h)?;
    let repaired = repair_parity(&mut eig)?;
    let split = parity_split(&eig)?;
    let even = even_energies(&eig, &split);

    let mut spectrum = Csv::new(&["k", "energy", "parity"]);
    for (k, e) in eig.energies().iter().enumerate() {
        let parity = if split.even.binary_search(&k).is_ok() {
            "even"
        } else {
            "odd"
        };
        spectrum.row(&[k.to_string(), real(*e), parity.to_string()]);
    }
    out.write_csv("spectrum.csv", spectrum)?;

    let spacings = select_spacings(&even, c.spectrum.count, c.spectrum.selection)?;
    let fit = brody_fit(&spacings)?;
    log::info!(
        "Brody fit: omega = {:.4}, A = {:.3}, beta = {:.4}",
        fit.omega,
        fit.amplitude,
        fit.beta
    );

    let mut cumulative = Csv::new(&["spacing", "count", "fit"]);
    for (d, n) in cumulative_counts(&spacings) {
        cumulative.row(&[
            real(d),
            real(n),
            real(brody_cumulative(d, fit.amplitude, fit.beta, fit.omega)),
        ]);
    }
    out.write_csv("spacings.csv", cumulative)?;

    let mut report = Csv::new(&["omega", "amplitude", "beta", "rss", "converged", "count"]);
    report.row(&[
        real(fit.omega),
        real(fit.amplitude),
        real(fit.beta),
        real(fit.rss),
        fit.converged.to_string(),
        spacings.len().to_string(),
    ]);
    out.write_csv("spacing_fit.csv", report)?;
    out.write_json(
        "spectrum.json",
        &json!({
            "n_max": dim.n_max(),
            "levels": eig.len(),
            "even_levels": split.even.len(),
            "odd_levels": split.odd.len(),
            "repaired_clusters": repaired,
            "selection": c.spectrum.selection,
            "fit": {
                "omega": fit.omega,
                "amplitude": fit.amplitude,
                "beta": fit.beta,
                "rss": fit.rss,
                "converged": fit.converged,
            },
        }),
    )?;
    Ok(())
}
