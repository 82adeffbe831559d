use std::io::Write;
use std::path::Path;
use std::time::Instant;

use semnet::bounds::{gen_slow_consistent, gen_slow_lossy, q_bound, BoundInput, Formula};
use semnet::classifier::condense_consistent;
use semnet::geometry::{density_constant, doubling_constant, extract_net, packing_number_exact, radius, DimensionMode, EXACT_THRESHOLD};
use semnet::space::{build_equidistant_space, build_no_packing_space, triangle_violations};
use semnet::srm::srm_select;
use semnet::{BoundReport, CoverMode, DimensionReport, DistanceSpec, Label};

use crate::error::CliError;
use crate::experiment::{rows_to_csv, run_lower_bound};
use crate::format::sig6;
use crate::io::{read_table, table_matrix, table_sample, write_matrix};
use crate::model::ModelFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrmMode {
    Exact,
    Greedy2,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fixture {
    NoPacking { n: usize, phi: f64 },
    Equidistant { k: usize, seed: u64 },
}

fn bound_lines(out: &mut dyn Write, b: &BoundReport) -> std::io::Result<()> {
    writeln!(out, "formula: {}", b.formula.name())?;
    writeln!(out, "value: {}", sig6(b.value))?;
    writeln!(out, "unclamped: {}", sig6(b.unclamped))?;
    writeln!(out, "vacuous: {}", b.vacuous)?;
    let i = &b.inputs;
    writeln!(out, "inputs: n={} d={} eps={} delta={}", i.n, i.d, sig6(i.eps), sig6(i.delta))?;
    for c in &b.components {
        writeln!(out, "  {}: {}", c.name, sig6(c.value))?;
    }
    Ok(())
}

/// Lossless bound of a consistent model, vacuous when the model keeps every point.
fn consistent_bound(n: usize, d: usize, delta: f64) -> Result<BoundReport, CliError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CliError::Validation(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(q_bound(n, d, 0.0, delta).unwrap_or_else(|_| {
        BoundReport::trivial(Formula::Fast, BoundInput { n, d, eps: 0.0, delta, k: Some(0), gamma: None })
    }))
}

pub fn train(
    input: &Path,
    spec: DistanceSpec,
    delta: f64,
    srm: SrmMode,
    model_out: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let started = Instant::now();
    let table = read_table(input)?;
    let sample = table_sample(&table, &spec)?;
    let n = sample.len();
    let single_class = sample.positives().is_empty() || sample.negatives().is_empty();
    if single_class {
        writeln!(err, "warning: single-class input, training a constant classifier")?;
    }
    let (model, bound, k, gamma) = match srm {
        SrmMode::Exact | SrmMode::Greedy2 if !single_class => {
            let mode = if srm == SrmMode::Exact { CoverMode::Exact } else { CoverMode::Greedy2 };
            let sol = srm_select(&sample, delta, mode)?;
            if sol.fallback {
                writeln!(err, "warning: no removal count is in the fast-rate regime; using the consistent model")?;
            }
            (sol.model, sol.bound, sol.k_star, sol.gamma_star)
        }
        _ => {
            let model = condense_consistent(&sample);
            let bound = consistent_bound(n, model.prototypes.len(), delta)?;
            let gamma = model.margin_used;
            (model, bound, 0, gamma)
        }
    };
    let file = ModelFile::from_model(&model, spec, &table.rows, Some(bound.clone()));
    file.save(model_out)?;

    writeln!(out, "samples: {n}")?;
    writeln!(out, "k_star: {k}")?;
    writeln!(out, "gamma_star: {}", sig6(gamma))?;
    writeln!(out, "margin: {}", sig6(model.margin_used))?;
    writeln!(out, "prototypes: {}", model.prototypes.len())?;
    writeln!(out, "bound: {}", sig6(bound.value))?;
    writeln!(out, "bound_formula: {}", bound.formula.name())?;
    writeln!(out, "bound_vacuous: {}", bound.vacuous)?;
    writeln!(err, "wall time: {} s", sig6(started.elapsed().as_secs_f64()))?;
    Ok(())
}

pub fn eval(model_path: &Path, queries: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let model = ModelFile::load(model_path)?;
    let table = read_table(queries)?;
    let predictions: Vec<Label> = table.rows.iter().map(|q| model.classify(q)).collect::<Result<_, _>>()?;
    writeln!(out, "prediction")?;
    for p in &predictions {
        writeln!(out, "{}", p.sign())?;
    }
    if let Some(labels) = &table.labels {
        let wrong = predictions.iter().zip(labels).filter(|(p, l)| p != l).count();
        writeln!(out, "# error rate: {}", sig6(wrong as f64 / labels.len() as f64))?;
    }
    Ok(())
}

pub fn bound(formula: Formula, n: usize, d: usize, eps: f64, delta: f64, out: &mut dyn Write) -> Result<(), CliError> {
    let report = match formula {
        Formula::SlowConsistent => gen_slow_consistent(n, d, delta)?,
        Formula::SlowLossy => gen_slow_lossy(n, d, eps, delta)?,
        Formula::Fast | Formula::Margin => q_bound(n, d, eps, delta)?,
    };
    bound_lines(out, &report)?;
    Ok(())
}

fn dimension_line(out: &mut dyn Write, name: &str, r: &DimensionReport) -> std::io::Result<()> {
    let mode = match r.mode {
        semnet::geometry::ReportMode::Exact => "exact",
        semnet::geometry::ReportMode::GreedyBound => "greedy bound",
    };
    writeln!(
        out,
        "{name}: constant={} dimension={} mode={mode} center={} radius={}",
        r.constant,
        sig6(r.dimension),
        r.witness.center,
        sig6(r.witness.radius)
    )
}

pub fn dims(input: &Path, spec: DistanceSpec, mode: DimensionMode, out: &mut dyn Write) -> Result<(), CliError> {
    let m = table_matrix(&read_table(input)?, &spec)?;
    let all: Vec<usize> = (0..m.n()).collect();
    let mu = density_constant(&m, &all, mode)?;
    let lambda = doubling_constant(&m, &all, mode)?;
    let (rad, center) = radius(&m, &all)?;
    writeln!(out, "points: {}", m.n())?;
    writeln!(out, "radius: {} (center {center})", sig6(rad))?;
    dimension_line(out, "density", &mu)?;
    dimension_line(out, "doubling", &lambda)?;
    if rad > 0.0 {
        let (packing, how) = if mode == DimensionMode::Exact && m.n() <= EXACT_THRESHOLD {
            (packing_number_exact(&m, &all, rad)?, "exact")
        } else {
            (extract_net(&m, &all, rad)?.members.len(), "greedy bound")
        };
        writeln!(out, "packing at radius: {packing} ({how})")?;
    }
    Ok(())
}

pub fn gen(fixture: Fixture, target: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let m = match fixture {
        Fixture::NoPacking { n, phi } => build_no_packing_space(n, phi),
        Fixture::Equidistant { k, seed } => build_equidistant_space(k, seed),
    }
    .map_err(|e| CliError::Parse(e.to_string()))?;
    let text = write_matrix(&m);
    match target {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn validate(input: &Path, spec: DistanceSpec, out: &mut dyn Write) -> Result<(), CliError> {
    let m = table_matrix(&read_table(input)?, &spec)?;
    let violations = triangle_violations(&m);
    writeln!(out, "valid semimetric: n={}", m.n())?;
    writeln!(out, "triangle violations: {}", violations.len())?;
    if let Some(worst) = violations.iter().max_by(|a, b| a.excess.total_cmp(&b.excess)) {
        writeln!(
            out,
            "worst: d({},{}) exceeds d({},{}) + d({},{}) by {}",
            worst.i,
            worst.j,
            worst.i,
            worst.k,
            worst.k,
            worst.j,
            sig6(worst.excess)
        )?;
    }
    Ok(())
}

pub fn experiment_lb(ks: &[usize], ns: &[usize], trials: usize, seed: u64, eps: f64, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = run_lower_bound(ks, ns, trials, seed, eps)?;
    out.write_all(rows_to_csv(&rows).as_bytes())?;
    Ok(())
}
