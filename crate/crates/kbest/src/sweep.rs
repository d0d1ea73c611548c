//! Parameter sweeps producing figure-style data tables.
//!
//! A sweep varies one of {N, M, Q} over a grid and evaluates throughput by
//! any subset of {asymptotic, quadrature, montecarlo} for each requested rank
//! and delay exponent. Output is a flat table: one row per x-value, one
//! column per (method, A, k) combination, plus a CI column for Monte Carlo.

use crate::channel::ChannelParams;
use crate::montecarlo::{simulate_avg, simulate_eff, SimulationConfig};
use crate::order_stats::SelectionSpec;
use crate::throughput::{
    asymptotic_eff, exact_eff_quadrature, Method, QosSpec, ThroughputEstimate,
};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep values must be nonempty and strictly increasing")]
    BadValues,
    #[error("rank k={rank} exceeds the smallest swept user count N={n_min}")]
    RankExceedsUsers { rank: u32, n_min: u32 },
    #[error("asymptotic method needs N >= 2, got N={0}")]
    TooFewUsers(u32),
    #[error("{variable} values must be positive integers, got {value}")]
    NonIntegerValue { variable: &'static str, value: f64 },
    #[error("evaluation failed at x={x}, column {column}: {source}")]
    Point {
        x: f64,
        column: String,
        source: Box<dyn std::error::Error + Send + Sync>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    NUsers,
    MAntennas,
    QInterferenceDb,
}

impl std::fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepVariable::NUsers => "n_users",
            SweepVariable::MAntennas => "m_antennas",
            SweepVariable::QInterferenceDb => "q_db",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub channel: ChannelParams,
    /// Fixed N when the variable is not `NUsers`.
    pub n_users: u32,
    pub ranks: Vec<u32>,
    /// Delay exponents; 0 means average throughput.
    pub a_exponents: Vec<f64>,
    pub methods: Vec<Method>,
    pub trials: u64,
    pub seed: u64,
    /// Noise level in dB for Q sweeps (ρ = N₀/Q in linear scale).
    pub n0_db: f64,
}

impl SweepSpec {
    fn validate(&self) -> Result<(), SweepError> {
        if self.values.is_empty() || self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SweepError::BadValues);
        }
        let n_min = match self.variable {
            SweepVariable::NUsers => {
                for &v in &self.values {
                    if v < 1.0 || v.fract() != 0.0 {
                        return Err(SweepError::NonIntegerValue {
                            variable: "n_users",
                            value: v,
                        });
                    }
                }
                self.values[0] as u32
            }
            SweepVariable::MAntennas => {
                for &v in &self.values {
                    if v < 1.0 || v.fract() != 0.0 {
                        return Err(SweepError::NonIntegerValue {
                            variable: "m_antennas",
                            value: v,
                        });
                    }
                }
                self.n_users
            }
            SweepVariable::QInterferenceDb => self.n_users,
        };
        if let Some(&rank) = self.ranks.iter().max() {
            if rank > n_min {
                return Err(SweepError::RankExceedsUsers { rank, n_min });
            }
        }
        if self.methods.contains(&Method::Asymptotic) && n_min < 2 {
            return Err(SweepError::TooFewUsers(n_min));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Cell {
    pub value: f64,
    pub ci_halfwidth: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub x: f64,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub seed: u64,
    pub trials: u64,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

fn column_name(method: Method, a: f64, k: u32, multi_a: bool) -> String {
    if multi_a {
        format!("{method}_A{a}_k{k}")
    } else {
        format!("{method}_k{k}")
    }
}

fn eval_point(
    method: Method,
    sel: SelectionSpec,
    qos: QosSpec,
    p: &ChannelParams,
    trials: u64,
    seed: u64,
) -> Result<ThroughputEstimate, Box<dyn std::error::Error + Send + Sync>> {
    Ok(match method {
        Method::Asymptotic => asymptotic_eff(sel, qos, p)?,
        Method::Quadrature => exact_eff_quadrature(sel, qos, p)?,
        Method::Montecarlo => {
            let cfg = SimulationConfig::new(trials, seed)?;
            if qos.is_unconstrained() {
                simulate_avg(sel, p, &cfg)?
            } else {
                simulate_eff(sel, qos, p, &cfg)?
            }
        }
    })
}

/// Run a sweep, producing one row per x-value with columns in a fixed
/// method-major, exponent-then-rank order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable, SweepError> {
    spec.validate()?;
    let a_list = if spec.a_exponents.is_empty() {
        vec![0.0]
    } else {
        spec.a_exponents.clone()
    };
    let multi_a = a_list.len() > 1 || a_list[0] != 0.0;

    let mut columns = Vec::new();
    for &method in &spec.methods {
        for &a in &a_list {
            for &k in &spec.ranks {
                columns.push(column_name(method, a, k, multi_a));
            }
        }
    }

    let mut rows = Vec::with_capacity(spec.values.len());
    for &x in &spec.values {
        let (p, n) = match spec.variable {
            SweepVariable::NUsers => (spec.channel, x as u32),
            SweepVariable::MAntennas => (
                spec.channel
                    .with_antennas(x as u32)
                    .expect("validated positive"),
                spec.n_users,
            ),
            SweepVariable::QInterferenceDb => {
                let rho = 10f64.powf(spec.n0_db / 10.0) / 10f64.powf(x / 10.0);
                (spec.channel.with_rho(rho).expect("rho > 0"), spec.n_users)
            }
        };
        let mut cells = Vec::with_capacity(columns.len());
        let mut col_idx = 0usize;
        for &method in &spec.methods {
            for &a in &a_list {
                for &k in &spec.ranks {
                    let sel = SelectionSpec::new(n, k).map_err(|e| SweepError::Point {
                        x,
                        column: columns[col_idx].clone(),
                        source: Box::new(e),
                    })?;
                    let qos = QosSpec::new(a).map_err(|e| SweepError::Point {
                        x,
                        column: columns[col_idx].clone(),
                        source: Box::new(e),
                    })?;
                    let est = eval_point(method, sel, qos, &p, spec.trials, spec.seed).map_err(
                        |source| SweepError::Point {
                            x,
                            column: columns[col_idx].clone(),
                            source,
                        },
                    )?;
                    cells.push(Cell {
                        value: est.value,
                        ci_halfwidth: est.ci_halfwidth,
                    });
                    col_idx += 1;
                }
            }
        }
        rows.push(SweepRow { x, cells });
    }
    Ok(SweepTable {
        variable: spec.variable,
        seed: spec.seed,
        trials: spec.trials,
        columns,
        rows,
    })
}

/// Built-in figure presets over the default channel parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    AvgVsUsers,     // figure 1
    AvgVsAntennas,  // figure 2
    EffVsUsers,     // figure 3
    EffVsCap,       // figure 4
}

impl Figure {
    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(Figure::AvgVsUsers),
            2 => Some(Figure::AvgVsAntennas),
            3 => Some(Figure::EffVsUsers),
            4 => Some(Figure::EffVsCap),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FigureOverrides {
    pub values: Option<Vec<f64>>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub methods: Option<Vec<Method>>,
    pub ranks: Option<Vec<u32>>,
}

/// Default channel parameters shared by all figure captions:
/// λ = 2, η = 1/3, ρ = 1.
pub fn default_channel(m: u32) -> ChannelParams {
    ChannelParams::new(2.0, 1.0 / 3.0, 1.0, m).expect("defaults valid")
}

/// Build the sweep behind one of the four figures, honoring overrides for
/// grids, trial counts, methods, ranks, and seed. The swept variable itself
/// is fixed by the figure.
pub fn figure_spec(fig: Figure, ov: &FigureOverrides) -> SweepSpec {
    let trials = ov.trials.unwrap_or(1_000_000);
    let seed = ov.seed.unwrap_or(0);
    let methods = ov
        .methods
        .clone()
        .unwrap_or_else(|| vec![Method::Asymptotic, Method::Montecarlo]);
    let base = match fig {
        Figure::AvgVsUsers => SweepSpec {
            variable: SweepVariable::NUsers,
            values: (1..=10).map(|i| (5 * i) as f64).collect(),
            channel: default_channel(2),
            n_users: 0,
            ranks: ov.ranks.clone().unwrap_or_else(|| vec![1, 2, 3]),
            a_exponents: vec![],
            methods,
            trials,
            seed,
            n0_db: 0.0,
        },
        Figure::AvgVsAntennas => SweepSpec {
            variable: SweepVariable::MAntennas,
            values: (1..=8).map(f64::from).collect(),
            channel: default_channel(1),
            n_users: 20,
            ranks: ov.ranks.clone().unwrap_or_else(|| vec![1, 2, 3]),
            a_exponents: vec![],
            methods,
            trials,
            seed,
            n0_db: 0.0,
        },
        Figure::EffVsUsers => SweepSpec {
            variable: SweepVariable::NUsers,
            values: (1..=10).map(|i| (5 * i) as f64).collect(),
            channel: default_channel(1),
            n_users: 0,
            ranks: ov.ranks.clone().unwrap_or_else(|| vec![1, 2]),
            a_exponents: vec![0.1, 2.0],
            methods,
            trials,
            seed,
            n0_db: 0.0,
        },
        Figure::EffVsCap => SweepSpec {
            variable: SweepVariable::QInterferenceDb,
            values: (0..10).map(|i| (2 * i) as f64).collect(),
            channel: default_channel(3),
            n_users: 50,
            ranks: ov.ranks.clone().unwrap_or_else(|| vec![1, 2]),
            a_exponents: vec![0.0, 1.0],
            methods,
            trials,
            seed,
            n0_db: 0.0,
        },
    };
    SweepSpec {
        values: ov.values.clone().unwrap_or(base.values),
        ..base
    }
}

pub fn run_figure(fig: Figure, ov: &FigureOverrides) -> Result<SweepTable, SweepError> {
    run_sweep(&figure_spec(fig, ov))
}

/// Render the table as CSV: header `x,<columns...>` with `<col>_ci` inserted
/// after every column that carries a confidence interval.
pub fn to_csv(table: &SweepTable) -> String {
    let has_ci: Vec<bool> = (0..table.columns.len())
        .map(|j| table.rows.iter().any(|r| r.cells[j].ci_halfwidth.is_some()))
        .collect();
    let mut out = String::from("x");
    for (j, col) in table.columns.iter().enumerate() {
        out.push(',');
        out.push_str(col);
        if has_ci[j] {
            out.push(',');
            out.push_str(col);
            out.push_str("_ci");
        }
    }
    out.push('\n');
    for row in &table.rows {
        out.push_str(&format!("{}", row.x));
        for (j, cell) in row.cells.iter().enumerate() {
            out.push_str(&format!(",{}", cell.value));
            if has_ci[j] {
                match cell.ci_halfwidth {
                    Some(hw) => out.push_str(&format!(",{hw}")),
                    None => out.push(','),
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Render the table as JSON (see `schemas/sweep.schema.json`).
pub fn to_json(table: &SweepTable) -> String {
    let mut s = serde_json::to_string_pretty(table).expect("table serializes");
    s.push('\n');
    s
}
