//! Running experiment specs end to end: building the pulse program,
//! integrating, scoring against the ideal circuit, and writing the trace
//! CSV and summary JSON.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentSpec;
use crate::dynamics::{self, PulseSequence, Simulator, StateVector, TimeSeries};
use crate::error::{Error, Result};
use crate::metrics::RunSummary;
use crate::model::EnergyTable;

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub series: TimeSeries,
    pub final_state: StateVector,
}

/// Planned pulse program for a spec.
pub fn build_sequence(spec: &ExperimentSpec, table: &EnergyTable) -> Result<PulseSequence> {
    let pulses = spec
        .pulses
        .iter()
        .map(|p| dynamics::plan_pulse(&spec.register, table, p.i, p.j, p.multiple))
        .collect::<Result<Vec<_>>>()?;
    Ok(PulseSequence::new(pulses, spec.stride))
}

/// The spec's step, or the default rule for its pulse program.
pub fn resolve_step(spec: &ExperimentSpec, table: &EnergyTable, seq: &PulseSequence) -> f64 {
    spec.step
        .unwrap_or_else(|| dynamics::default_step(table, seq.max_drive(), spec.register.rabi()))
}

/// Runs the spec at its own (or the default) step.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunOutput> {
    run_with_step(spec, None)
}

fn run_with_step(spec: &ExperimentSpec, step: Option<f64>) -> Result<RunOutput> {
    let mut spec = spec.clone();
    spec.validate()?;
    let table = EnergyTable::new(&spec.register);
    let seq = build_sequence(&spec, &table)?;
    let h = step.unwrap_or_else(|| resolve_step(&spec, &table, &seq));
    let initial = StateVector::new(spec.initial_amps(), 0.0)?;
    let mut sim = Simulator::new(&spec.register, &table, h)?.with_phase_mode(spec.phase_mode);
    let (final_state, series) = sim.run_sequence(&initial, &seq)?;
    let ideal = spec.ideal_populations()?;
    let summary = RunSummary::from_run(
        spec.n(),
        final_state.populations(),
        &series,
        ideal.as_deref(),
        h,
        seq.pulses.clone(),
        seq.sample_stride,
    )?;
    Ok(RunOutput { summary, series, final_state })
}

/// CSV trace with header `tau,p1,...,p{2^n},total,entropy`, every value to
/// 12 significant digits.
pub fn write_trace<W: Write>(mut out: W, series: &TimeSeries) -> std::io::Result<()> {
    let dim = series.probs.first().map_or(0, Vec::len);
    let mut header = String::from("tau");
    for k in 1..=dim {
        header.push_str(&format!(",p{k}"));
    }
    header.push_str(",total,entropy");
    writeln!(out, "{header}")?;
    for (row, probs) in series.probs.iter().enumerate() {
        write!(out, "{:.11e}", series.taus[row])?;
        for p in probs {
            write!(out, ",{p:.11e}")?;
        }
        writeln!(out, ",{:.11e},{:.11e}", series.total[row], series.entropy[row])?;
    }
    Ok(())
}

pub fn write_trace_file(path: &Path, series: &TimeSeries) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_trace(&mut w, series).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn summary_json(summary: &RunSummary) -> String {
    serde_json::to_string_pretty(summary).expect("summary is plain data")
}

pub fn write_summary_file(path: &Path, summary: &RunSummary) -> Result<()> {
    let mut text = summary_json(summary);
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub step: f64,
    pub final_populations: Option<Vec<f64>>,
    /// Failure of this row's run, if any.
    pub error: Option<String>,
    /// `max |D(h) - D(2h)|` over final amplitudes, against the previous row.
    pub delta: Option<f64>,
    /// `max |p(h) - p(2h)|` over final populations.
    pub population_delta: Option<f64>,
    /// Previous row's delta over this row's.
    pub ratio: Option<f64>,
    /// `log2(ratio)`.
    pub order: Option<f64>,
}

fn max_abs_diff<T: Copy>(a: &[T], b: &[T], norm: impl Fn(T, T) -> f64) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| norm(x, y)).fold(0.0, f64::max)
}

/// Reruns the spec at `h, h/2, ..., h/2^halvings` (in parallel) and
/// estimates the convergence order from successive differences of the final
/// amplitudes. Populations alone hide the leading phase error, so they are
/// reported but not used for the order.
/// A failed row is reported in place and does not abort the others.
pub fn convergence_report(spec: &ExperimentSpec, halvings: usize) -> Result<Vec<ConvergenceRow>> {
    if halvings < 2 {
        return Err(Error::validation("halvings", format!("need at least 2, got {halvings}")));
    }
    let mut checked = spec.clone();
    checked.validate()?;
    let table = EnergyTable::new(&checked.register);
    let h0 = resolve_step(&checked, &table, &build_sequence(&checked, &table)?);
    let steps: Vec<f64> = (0..=halvings).map(|k| h0 / f64::powi(2.0, k as i32)).collect();

    let runs: Vec<Result<StateVector>> = steps
        .par_iter()
        .map(|&h| run_with_step(&checked, Some(h)).map(|out| out.final_state))
        .collect();

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(runs.len());
    let mut prev: Option<StateVector> = None;
    for (step, run) in steps.into_iter().zip(runs) {
        let (state, error) = match run {
            Ok(s) => (Some(s), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let (delta, population_delta) = match (&prev, &state) {
            (Some(a), Some(b)) => (
                Some(max_abs_diff(a.amps(), b.amps(), |x, y| (x - y).norm())),
                Some(max_abs_diff(&a.populations(), &b.populations(), |x, y| (x - y).abs())),
            ),
            _ => (None, None),
        };
        let ratio = match (rows.last().and_then(|r| r.delta), delta) {
            (Some(d0), Some(d1)) if d1 > 0.0 => Some(d0 / d1),
            _ => None,
        };
        rows.push(ConvergenceRow {
            step,
            final_populations: state.as_ref().map(StateVector::populations),
            error,
            delta,
            population_delta,
            ratio,
            order: ratio.map(f64::log2),
        });
        prev = state;
    }
    Ok(rows)
}
