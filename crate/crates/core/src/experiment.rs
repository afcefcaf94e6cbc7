//! Experiment configs, discord time series and sweeps, CSV emission, and
//! plateau detection on the resulting series.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discord::renyi_discord;
use crate::dynamics::{BathParams, DimerParams, SectorPropagator};
use crate::entropy::RenyiOrder;
use crate::error::{Error, Result};
use crate::optimize::OptimizerSettings;
use crate::states::StateSpec;

pub const TIMESERIES_HEADER: [&str; 5] = ["t", "D_alpha", "theta_opt", "phi_opt", "converged"];
pub const SWEEP_HEADER: [&str; 3] = ["sweep_value", "t", "D_alpha"];

/// A full experiment: dynamics, initial state, Rényi order, time grid and
/// optional parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimer: DimerParams,
    pub bath: BathParams,
    pub initial_state: StateSpec,
    pub renyi_alpha: f64,
    pub time_grid: TimeGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    #[serde(default)]
    pub plateau: PlateauSettings,
}

/// `n_points` equally spaced times from `t_start` to `t_end`, both included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        let last = (self.n_points.max(2) - 1) as f64;
        (0..self.n_points)
            .map(|k| {
                if k + 1 == self.n_points {
                    self.t_end
                } else {
                    self.t_start + (self.t_end - self.t_start) * k as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "q")]
    Q,
    #[serde(rename = "T")]
    T,
    #[serde(rename = "alpha")]
    Alpha,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlateauSettings {
    pub abs_tol: f64,
    pub min_points: usize,
}

impl Default for PlateauSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-3,
            min_points: 10,
        }
    }
}

impl PlateauSettings {
    pub fn check(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Config(format!(
                "plateau.abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.min_points == 0 {
            return Err(Error::Config(
                "plateau.min_points must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every field, including each swept variant and the initial state.
    pub fn validate(&self) -> Result<()> {
        let grid = &self.time_grid;
        if grid.n_points < 2 {
            return Err(Error::Config(format!(
                "time_grid.n_points must be at least 2, got {}",
                grid.n_points
            )));
        }
        if !grid.t_start.is_finite() || !grid.t_end.is_finite() || grid.t_end <= grid.t_start {
            return Err(Error::Config(format!(
                "time_grid needs finite t_start < t_end, got [{}, {}]",
                grid.t_start, grid.t_end
            )));
        }
        self.optimizer.check()?;
        self.plateau.check()?;
        self.initial_state.build()?;
        match &self.sweep {
            None => self.check_point(),
            Some(sweep) => {
                if sweep.values.is_empty() {
                    return Err(Error::Config("sweep.values must not be empty".into()));
                }
                sweep
                    .values
                    .iter()
                    .try_for_each(|&v| self.at_sweep_value(sweep.axis, v).check_point())
            }
        }
    }

    fn check_point(&self) -> Result<()> {
        self.dimer.check()?;
        self.bath.check()?;
        RenyiOrder::for_discord(self.renyi_alpha)?;
        Ok(())
    }

    /// The same experiment with one swept parameter fixed and no sweep.
    pub fn at_sweep_value(&self, axis: SweepAxis, value: f64) -> ExperimentConfig {
        let mut cfg = self.clone();
        cfg.sweep = None;
        match axis {
            SweepAxis::Q => cfg.bath.q = value,
            SweepAxis::T => cfg.bath.temperature = value,
            SweepAxis::Alpha => cfg.renyi_alpha = value,
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeseriesRow {
    pub t: f64,
    pub d_alpha: f64,
    pub theta_opt: f64,
    pub phi_opt: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub t: f64,
    pub d_alpha: f64,
}

fn at_time(err: Error, t: f64) -> Error {
    match err {
        Error::Numerical { stage, detail } => Error::Numerical {
            stage,
            detail: format!("t = {t}: {detail}"),
        },
        other => Error::Numerical {
            stage: "discord at time point",
            detail: format!("t = {t}: {other}"),
        },
    }
}

/// Evolves the initial state over the time grid and evaluates `D_α` at each
/// point. Time points run in parallel; rows come back ordered by `t`.
pub fn run_timeseries(cfg: &ExperimentConfig) -> Result<Vec<TimeseriesRow>> {
    if cfg.sweep.is_some() {
        return Err(Error::Config(
            "config has a sweep section; run it as a sweep".into(),
        ));
    }
    cfg.validate()?;
    timeseries_unchecked(cfg)
}

fn timeseries_unchecked(cfg: &ExperimentConfig) -> Result<Vec<TimeseriesRow>> {
    let rho0 = cfg.initial_state.build()?;
    let order = RenyiOrder::for_discord(cfg.renyi_alpha)?;
    let propagator = SectorPropagator::new(&cfg.dimer, &cfg.bath)?;
    let results: Vec<Result<TimeseriesRow>> = cfg
        .time_grid
        .times()
        .into_par_iter()
        .map(|t| {
            // Discord is defined with A = dimer 1, which is the second factor
            // of the dynamics basis.
            let rho_t = propagator
                .evolve(&rho0, t)
                .and_then(|rho| rho.swap_qubits())
                .map_err(|e| at_time(e.at_stage("evolve"), t))?;
            let result = renyi_discord(&rho_t, order, &cfg.optimizer).map_err(|e| at_time(e, t))?;
            Ok(TimeseriesRow {
                t,
                d_alpha: result.value,
                theta_opt: result.argmin.theta,
                phi_opt: result.argmin.phi,
                converged: result.converged,
            })
        })
        .collect();
    results.into_iter().collect()
}

/// One time series per sweep value, stacked in the order the values appear.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let Some(sweep) = &cfg.sweep else {
        return Err(Error::Config("sweep section is missing".into()));
    };
    cfg.validate()?;
    let series: Vec<Result<Vec<SweepRow>>> = sweep
        .values
        .par_iter()
        .map(|&value| {
            let rows = timeseries_unchecked(&cfg.at_sweep_value(sweep.axis, value))?;
            Ok(rows
                .into_iter()
                .map(|r| SweepRow {
                    sweep_value: value,
                    t: r.t,
                    d_alpha: r.d_alpha,
                })
                .collect())
        })
        .collect();
    let mut rows = Vec::with_capacity(sweep.values.len() * cfg.time_grid.n_points);
    for block in series {
        rows.extend(block?);
    }
    Ok(rows)
}

/// 17 significant digits, so values round-trip exactly.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

pub fn write_timeseries_csv<W: Write>(rows: &[TimeseriesRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TIMESERIES_HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            fmt_float(r.t),
            fmt_float(r.d_alpha),
            fmt_float(r.theta_opt),
            fmt_float(r.phi_opt),
            r.converged.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            fmt_float(r.sweep_value),
            fmt_float(r.t),
            fmt_float(r.d_alpha),
        ])
        .map_err(csv_error)?;
    }
    w.flush()
}

/// A `(t, D_alpha)` series read back from CSV, tagged with its sweep value
/// when the file came from a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub sweep_value: Option<f64>,
    pub points: Vec<(f64, f64)>,
}

/// Reads a timeseries or sweep CSV. Sweep files are split into one series
/// per consecutive block of equal `sweep_value`.
pub fn read_series_csv<R: Read>(input: R) -> Result<Vec<Series>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::Config(format!("CSV header: {e}")))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (Some(t_col), Some(d_col)) = (column("t"), column("D_alpha")) else {
        return Err(Error::Config("CSV needs columns `t` and `D_alpha`".into()));
    };
    let sweep_col = column("sweep_value");

    let mut series: Vec<Series> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Config(format!("CSV row {}: {e}", line + 2)))?;
        let field = |col: usize| -> Result<f64> {
            let raw = record.get(col).unwrap_or("").trim();
            raw.parse().map_err(|_| {
                Error::Config(format!(
                    "CSV row {}: cannot parse `{raw}` as a number",
                    line + 2
                ))
            })
        };
        let key = sweep_col.map(field).transpose()?;
        let point = (field(t_col)?, field(d_col)?);
        match series.last_mut() {
            Some(s) if s.sweep_value == key => s.points.push(point),
            _ => series.push(Series {
                sweep_value: key,
                points: vec![point],
            }),
        }
    }
    Ok(series)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlateauInterval {
    pub t_begin: f64,
    pub t_end: f64,
    pub mean_value: f64,
    /// Index of the first sample and number of samples in the run.
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlateauReport {
    pub intervals: Vec<PlateauInterval>,
    /// Largest value in the series; NaN for an empty series.
    pub series_max: f64,
}

/// Maximal runs of consecutive samples whose spread `max - min` stays within
/// `abs_tol` and that contain at least `min_points` samples.
///
/// Scans left to right: from each start the run is extended as far as the
/// spread allows; long enough runs are recorded and scanning resumes after
/// them, otherwise the start advances by one.
pub fn detect_plateau(
    series: &[(f64, f64)],
    abs_tol: f64,
    min_points: usize,
) -> Result<PlateauReport> {
    PlateauSettings {
        abs_tol,
        min_points,
    }
    .check()
    .map_err(|e| Error::Parameter(e.to_string()))?;
    if series.windows(2).any(|w| !(w[0].0 <= w[1].0)) {
        return Err(Error::Parameter(
            "plateau series must be sorted by t".into(),
        ));
    }
    let values: Vec<f64> = series.iter().map(|p| p.1).collect();
    let series_max = values.iter().copied().fold(f64::NAN, f64::max);
    let mut intervals = Vec::new();
    if values.len() < min_points {
        return Ok(PlateauReport {
            intervals,
            series_max,
        });
    }

    let mut start = 0;
    while start + min_points <= values.len() {
        let (mut lo, mut hi) = (values[start], values[start]);
        let mut end = start + 1;
        while end < values.len() {
            let v = values[end];
            let (nlo, nhi) = (lo.min(v), hi.max(v));
            if nhi - nlo > abs_tol {
                break;
            }
            (lo, hi) = (nlo, nhi);
            end += 1;
        }
        let len = end - start;
        if len >= min_points {
            intervals.push(PlateauInterval {
                t_begin: series[start].0,
                t_end: series[end - 1].0,
                mean_value: values[start..end].iter().sum::<f64>() / len as f64,
                start,
                len,
            });
            start = end;
        } else {
            start += 1;
        }
    }
    Ok(PlateauReport {
        intervals,
        series_max,
    })
}
