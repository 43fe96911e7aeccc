use std::f64::consts::{LN_2, PI};
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use blockade::construction::DesignOptions;
use blockade::entanglement::{entropy_sweep, median_entropy, sweep_csv, SweepRow};
use blockade::floquet::{floquet_operator_with, write_matrix, FloquetOperator};
use blockade::hamiltonian::parse_drive_config;
use blockade::oracle::oracle_table_csv;
use blockade::stats::{
    coe_density, histogram_csv, spacing_histogram, spectral_report, HISTOGRAM_BIN_WIDTH, HISTOGRAM_MAX,
};
use blockade::{
    bloch_oscillation_probe, build_hamming_graph, build_walk_hamiltonian, circle_spacings, design_pipeline,
    enumerate_solutions_with, is_median_graph_with, quasi_spectrum, ConstraintSet, DesignOutcome, DetuningSign,
    DriveProtocol, Error, MedianVerdict, QuasiSpectrum, SparsityPattern,
};

use crate::args::{
    BlochArgs, ConstructArgs, DriveArgs, HamiltonianArgs, OracleArgs, PropagationArgs, Sign, SpaceArgs, SpectrumArgs,
    SweepArgs,
};
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::Outputs;
use crate::svg::Plot;

/// What a finished command reports on stdout.
pub type Summary = String;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))
}

/// Every input that shaped the run: command arguments and effective config.
fn params(args: &impl Serialize, cfg: &Config) -> serde_json::Value {
    json!({ "args": args, "config": cfg })
}

#[derive(Serialize)]
struct SpaceReport {
    num_vars: usize,
    state_count: usize,
    edge_count: usize,
    connected: bool,
    median: Option<MedianVerdict>,
}

pub fn space(args: &SpaceArgs, cfg: &Config, out: &Path, force: bool) -> CliResult<Summary> {
    let constraints = ConstraintSet::parse(&read_text(&args.constraints)?)?;
    let space = enumerate_solutions_with(&constraints, cfg.limits())?;
    let graph = build_hamming_graph(&space);
    let (connected, median) = match is_median_graph_with(&graph, cfg.median()) {
        Ok(v) => (true, Some(v)),
        Err(Error::Disconnected { .. }) => (false, None),
        Err(e) => return Err(e.into()),
    };
    let is_median = median.as_ref().is_some_and(|v| v.is_median);
    let report = SpaceReport {
        num_vars: space.num_vars(),
        state_count: space.len(),
        edge_count: graph.edges().len(),
        connected,
        median,
    };
    let mut o = Outputs::open(out, "space", &["states.txt", "edges.txt", "space.json"], force)?;
    o.write("states.txt", graph.labels_text())?;
    o.write("edges.txt", graph.edges_text())?;
    o.write_json("space.json", &report)?;
    o.finish(params(args, cfg), None)?;
    let summary = format!(
        "{} states, {} edges, connected={connected}, median={is_median}",
        report.state_count, report.edge_count
    );
    if is_median {
        Ok(summary)
    } else {
        Err(CliError::Rejected(summary))
    }
}

fn drive(args: &DriveArgs) -> CliResult<DriveProtocol> {
    if let Some(path) = &args.drive_file {
        return Ok(parse_drive_config(&read_text(path)?)?);
    }
    Ok(if args.constant_drive {
        DriveProtocol::constant(args.omega, args.j, args.a, args.phi)
    } else {
        DriveProtocol::standard(args.omega)
    })
}

/// Folds propagation flags into the config so the manifest records the
/// effective values.
pub fn apply_propagation(cfg: &mut Config, p: &PropagationArgs) -> CliResult<()> {
    if let Some(steps) = p.steps {
        cfg.steps = steps;
        cfg.max_steps = cfg.max_steps.max(steps);
    }
    if let Some(name) = &p.integrator {
        cfg.integrator = name.clone();
    }
    cfg.converge |= p.converge;
    cfg.validate()
}

fn propagate(n: usize, d: &DriveArgs, cfg: &Config) -> CliResult<(FloquetOperator, QuasiSpectrum)> {
    let fop = floquet_operator_with(n, &drive(d)?, &cfg.propagator()?)?;
    let spec = quasi_spectrum(&fop)?;
    let residual = spec.max_residual();
    if residual.is_nan() || residual > cfg.eigen_residual_tolerance {
        return Err(Error::Numerical {
            what: "Floquet eigenpair residual",
            residual,
            tolerance: cfg.eigen_residual_tolerance,
        }
        .into());
    }
    Ok((fop, spec))
}

pub fn spectrum(args: &SpectrumArgs, cfg: &Config, out: &Path, force: bool) -> CliResult<Summary> {
    if args.n < 3 {
        return Err(CliError::Usage("spectrum needs N >= 3 for the spacing ratio".into()));
    }
    let mut files = vec!["quasi_spectrum.csv", "histogram.csv", "histogram.svg", "stats.json"];
    if args.save_operator {
        files.extend(["floquet_operator.bin", "eigenvectors.bin"]);
    }
    let mut o = Outputs::open(out, "spectrum", &files, force)?;
    let (fop, spec) = propagate(args.n, &args.drive, cfg)?;
    let report = spectral_report(&spec.phases)?;
    let bins = spacing_histogram(&circle_spacings(&spec.phases)?);

    let peak = bins.iter().map(|b| b.empirical.max(b.coe)).fold(0.0, f64::max);
    let mut plot = Plot::new(
        &format!("Quasi-energy spacings, N = {}", args.n),
        "s",
        "P(s)",
        (0.0, HISTOGRAM_MAX),
        (0.0, 1.1 * peak),
    );
    plot.bars(
        &bins.iter().map(|b| (b.center, b.empirical)).collect::<Vec<_>>(),
        HISTOGRAM_BIN_WIDTH,
        "#9ab",
    );
    let curve: Vec<(f64, f64)> = (0..=400)
        .map(|i| i as f64 * HISTOGRAM_MAX / 400.0)
        .map(|s| (s, coe_density(s)))
        .collect();
    plot.line(&curve, "#c33");

    o.write("quasi_spectrum.csv", spec.to_csv())?;
    o.write("histogram.csv", histogram_csv(&bins))?;
    o.write("histogram.svg", plot.render())?;
    o.write_json("stats.json", &report)?;
    if args.save_operator {
        let mut buf = Vec::new();
        write_matrix(&fop.unitary, &mut buf).map_err(|e| CliError::io("floquet_operator.bin", e))?;
        o.write("floquet_operator.bin", &buf)?;
        buf.clear();
        spec.write_eigenvectors(&mut buf)
            .map_err(|e| CliError::io("eigenvectors.bin", e))?;
        o.write("eigenvectors.bin", &buf)?;
    }
    o.finish(params(args, cfg), Some(fop.steps_used))?;
    Ok(format!(
        "{} phases, KS={:.4}, mean-r={:.4}, steps={}",
        report.count, report.ks, report.mean_r, fop.steps_used
    ))
}

#[derive(Serialize)]
struct SweepSummary {
    count: usize,
    site: usize,
    max_entropy: f64,
    median_entropy: Option<f64>,
    mean_abs_x: f64,
    max_abs_x: f64,
}

fn sweep_plots(rows: &[SweepRow], n: usize, site: usize) -> (String, String) {
    let max_s = rows.iter().map(|r| r.entropy).fold(LN_2, f64::max);
    let mut entropy = Plot::new(
        &format!("Floquet eigenstate entropy, N = {n}"),
        "quasi-energy",
        "S",
        (-PI, PI),
        (0.0, 1.1 * max_s),
    );
    entropy.points(
        &rows.iter().map(|r| (r.quasi_phase, r.entropy)).collect::<Vec<_>>(),
        "#236",
    );
    entropy.hline(LN_2, "#c33", "ln 2");
    let mut local = Plot::new(
        &format!("<X> at site {site}, N = {n}"),
        "quasi-energy",
        "<X>",
        (-PI, PI),
        (-1.0, 1.0),
    );
    local.points(
        &rows
            .iter()
            .map(|r| (r.quasi_phase, r.x_expectation))
            .collect::<Vec<_>>(),
        "#236",
    );
    local.hline(0.0, "#888", "0");
    (entropy.render(), local.render())
}

pub fn entropy_sweep_cmd(args: &SweepArgs, cfg: &Config, out: &Path, force: bool) -> CliResult<Summary> {
    if args.n < 2 || !args.n.is_multiple_of(2) {
        return Err(CliError::Usage(format!(
            "entropy-sweep needs an even N >= 2, got {}",
            args.n
        )));
    }
    let site = args.site.unwrap_or((args.n / 4).max(1));
    let mut o = Outputs::open(
        out,
        "entropy-sweep",
        &["sweep.csv", "entropy.svg", "locality.svg", "sweep.json"],
        force,
    )?;
    let (fop, spec) = propagate(args.n, &args.drive, cfg)?;
    let rows = entropy_sweep(&spec, site)?;
    let max_entropy = rows.iter().map(|r| r.entropy).fold(0.0, f64::max);
    let bound = LN_2 + cfg.entropy_slack;
    if max_entropy.is_nan() || max_entropy > bound {
        return Err(Error::Numerical {
            what: "eigenstate entropy above ln 2",
            residual: max_entropy - LN_2,
            tolerance: cfg.entropy_slack,
        }
        .into());
    }
    let abs_x: Vec<f64> = rows.iter().map(|r| r.x_expectation.abs()).collect();
    let summary = SweepSummary {
        count: rows.len(),
        site,
        max_entropy,
        median_entropy: median_entropy(&rows),
        mean_abs_x: abs_x.iter().sum::<f64>() / abs_x.len() as f64,
        max_abs_x: abs_x.iter().copied().fold(0.0, f64::max),
    };
    let (entropy_svg, locality_svg) = sweep_plots(&rows, args.n, site);
    o.write("sweep.csv", sweep_csv(&rows))?;
    o.write("entropy.svg", entropy_svg)?;
    o.write("locality.svg", locality_svg)?;
    o.write_json("sweep.json", &summary)?;
    o.finish(params(args, cfg), Some(fop.steps_used))?;
    Ok(format!(
        "{} eigenstates, max S={:.12}, median S={:.6}, mean |<X_{site}>|={:.3e}",
        summary.count,
        summary.max_entropy,
        summary.median_entropy.unwrap_or(f64::NAN),
        summary.mean_abs_x
    ))
}

pub fn construct(args: &ConstructArgs, cfg: &Config, out: &Path, force: bool) -> CliResult<Summary> {
    let pattern = SparsityPattern::parse(&read_text(&args.pattern)?)?;
    let options = DesignOptions {
        median: cfg.median(),
        ..DesignOptions::default()
    };
    let mut o = Outputs::open(out, "construct", &["design.json", "constraints.txt"], force)?;
    let outcome = design_pipeline(&pattern, args.n, &options)?;
    o.write_json("design.json", &outcome)?;
    let result = match &outcome {
        DesignOutcome::Accepted {
            constraints,
            certificate,
        } => {
            o.write("constraints.txt", constraints)?;
            Ok(format!(
                "accepted: {} states, {} clauses, rank bound {}, entropy bound {:.6}, max entropy {:.6}",
                certificate.state_count,
                certificate.clauses.len(),
                certificate.rank_bound,
                certificate.entropy_bound,
                certificate.max_entropy
            ))
        }
        DesignOutcome::Rejected { rejection } => Err(CliError::Rejected(rejection.to_string())),
    };
    o.finish(params(args, cfg), None)?;
    result
}

pub fn oracle(args: &OracleArgs, cfg: &Config, out: &Path, force: bool) -> CliResult<Summary> {
    let mut o = Outputs::open(out, "oracle", &["oracle.csv"], force)?;
    o.write("oracle.csv", oracle_table_csv(args.n)?)?;
    o.finish(params(args, cfg), None)?;
    Ok(format!("{} exact eigenpairs", args.n + 1))
}

#[derive(Serialize)]
struct BlochSummary {
    predicted_period: f64,
    fitted_revival_time: Option<f64>,
    edge_contact: bool,
}

pub fn bloch(args: &BlochArgs, cfg: &Config, out: &Path, force: bool) -> CliResult<Summary> {
    let t_max = args
        .t_max
        .unwrap_or(if args.a == 0.0 { 20.0 } else { 2.0 * PI / args.a.abs() });
    let mut o = Outputs::open(out, "bloch", &["bloch.csv", "bloch.svg", "bloch.json"], force)?;
    let series = bloch_oscillation_probe(args.n, args.a, t_max, args.samples)?;
    let summary = BlochSummary {
        predicted_period: series.predicted_period,
        fitted_revival_time: series.fitted_revival_time(),
        edge_contact: series.edge_contact,
    };
    let mut plot = Plot::new(
        &format!("Return fidelity, N = {}, A = {}", args.n, args.a),
        "t",
        "|<psi(0)|psi(t)>|",
        (0.0, t_max),
        (0.0, 1.0),
    );
    plot.line(
        &series.samples.iter().map(|s| (s.t, s.fidelity)).collect::<Vec<_>>(),
        "#236",
    );
    o.write("bloch.csv", series.to_csv())?;
    o.write("bloch.svg", plot.render())?;
    o.write_json("bloch.json", &summary)?;
    o.finish(params(args, cfg), None)?;
    Ok(match summary.fitted_revival_time {
        Some(t) => format!("revival at t={t:.6} (predicted {:.6})", summary.predicted_period),
        None => "no revival in the sampled window".into(),
    })
}

pub fn hamiltonian(args: &HamiltonianArgs, cfg: &Config, out: &Path, force: bool) -> CliResult<Summary> {
    let constraints = ConstraintSet::parse(&read_text(&args.constraints)?)?;
    let space = enumerate_solutions_with(&constraints, cfg.limits())?;
    let sign = match args.sign {
        Sign::Positive => DetuningSign::Positive,
        Sign::Negative => DetuningSign::Negative,
    };
    let mut o = Outputs::open(out, "hamiltonian", &["hamiltonian.csv", "states.txt"], force)?;
    let walk = build_walk_hamiltonian(&space, args.rabi, args.delta, sign);
    o.write("hamiltonian.csv", walk.to_csv())?;
    o.write("states.txt", build_hamming_graph(&space).labels_text())?;
    o.finish(params(args, cfg), None)?;
    Ok(format!("{0}x{0} walk Hamiltonian", walk.dim()))
}
