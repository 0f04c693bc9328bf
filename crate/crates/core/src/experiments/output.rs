//! CSV and JSON serialization of regret traces.
//!
//! CSV files hold one row per round under the header
//! `round,inner_product_gw,cum_regret_<id>…,bound_l2,bound_fullmatrix,bound_adagrad`
//! followed by `#` trailer lines with the learner, comparators, gradients and
//! the bound report, so a trace can be re-evaluated from the file alone. Floats
//! are written with 17 significant digits, which round-trips exactly.

use std::fmt::Write as _;

use crate::baselines::{self, BoundReport};
use crate::error::{Error, Result};
use crate::linalg::DenseVector;

use super::config::OutputFormat;
use super::harness::{Comparator, RegretTrace, TraceRow};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_num(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("invalid number `{s}` in trace")))
}

pub fn format_report(r: &BoundReport) -> String {
    format!(
        "l2_bound={} fullmatrix_bound={} adagrad_bound={} rank={} trace_root={} oracle_eta={} t_eff={} lambda_max={} r_eff={}",
        num(r.l2_bound),
        num(r.fullmatrix_bound),
        num(r.adagrad_bound),
        r.rank,
        num(r.trace_root),
        num(r.oracle_eta),
        num(r.t_eff),
        num(r.lambda_max),
        num(r.r_eff),
    )
}

pub fn parse_report(s: &str) -> Result<BoundReport> {
    let mut r = BoundReport {
        l2_bound: f64::NAN,
        fullmatrix_bound: f64::NAN,
        adagrad_bound: f64::NAN,
        rank: usize::MAX,
        trace_root: f64::NAN,
        oracle_eta: f64::NAN,
        t_eff: f64::NAN,
        lambda_max: f64::NAN,
        r_eff: f64::NAN,
    };
    for field in s.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("invalid report field `{field}`")))?;
        let slot = match key {
            "l2_bound" => &mut r.l2_bound,
            "fullmatrix_bound" => &mut r.fullmatrix_bound,
            "adagrad_bound" => &mut r.adagrad_bound,
            "trace_root" => &mut r.trace_root,
            "oracle_eta" => &mut r.oracle_eta,
            "t_eff" => &mut r.t_eff,
            "lambda_max" => &mut r.lambda_max,
            "r_eff" => &mut r.r_eff,
            "rank" => {
                r.rank = value
                    .parse()
                    .map_err(|_| Error::Config(format!("invalid rank `{value}`")))?;
                continue;
            }
            _ => return Err(Error::Config(format!("unknown report field `{key}`"))),
        };
        *slot = parse_num(value)?;
    }
    let floats = [
        r.l2_bound,
        r.fullmatrix_bound,
        r.adagrad_bound,
        r.trace_root,
        r.oracle_eta,
        r.t_eff,
        r.lambda_max,
        r.r_eff,
    ];
    if floats.iter().any(|x| x.is_nan()) || r.rank == usize::MAX {
        return Err(Error::Config("incomplete bound report in trace".into()));
    }
    Ok(r)
}

pub fn header(trace: &RegretTrace) -> String {
    let mut h = String::from("round,inner_product_gw");
    for c in &trace.comparators {
        write!(h, ",cum_regret_{}", c.id).expect("writing to a String");
    }
    h.push_str(",bound_l2,bound_fullmatrix,bound_adagrad");
    h
}

fn vector_line(prefix: &str, v: &[f64]) -> String {
    let mut line = String::from(prefix);
    for x in v {
        line.push(' ');
        line.push_str(&num(*x));
    }
    line
}

pub fn to_csv(trace: &RegretTrace) -> String {
    let mut out = header(trace);
    out.push('\n');
    for row in &trace.rows {
        write!(out, "{},{}", row.round, num(row.inner_product_gw)).expect("writing to a String");
        for c in &row.cum_regret {
            write!(out, ",{}", num(*c)).expect("writing to a String");
        }
        writeln!(
            out,
            ",{},{},{}",
            num(row.bound_l2),
            num(row.bound_fullmatrix),
            num(row.bound_adagrad)
        )
        .expect("writing to a String");
    }
    writeln!(out, "# learner {}", trace.learner).expect("writing to a String");
    writeln!(out, "# dim {}", trace.dim).expect("writing to a String");
    for c in &trace.comparators {
        out.push_str(&vector_line(&format!("# comparator {}", c.id), &c.point));
        out.push('\n');
    }
    for g in &trace.gradients {
        out.push_str(&vector_line("# gradient", g));
        out.push('\n');
    }
    writeln!(out, "# report {}", format_report(&trace.report)).expect("writing to a String");
    out
}

pub fn to_json(trace: &RegretTrace) -> Result<String> {
    let mut s = serde_json::to_string_pretty(trace)
        .map_err(|e| Error::Config(format!("cannot serialize trace: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn render(trace: &RegretTrace, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => Ok(to_csv(trace)),
        OutputFormat::Json => to_json(trace),
    }
}

/// Parses a trace written by [`to_csv`] or [`to_json`].
pub fn read_trace(text: &str) -> Result<RegretTrace> {
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("invalid JSON trace: {e}")));
    }
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty trace".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    let ids: Vec<String> = columns
        .iter()
        .filter_map(|c| c.strip_prefix("cum_regret_"))
        .map(str::to_string)
        .collect();
    if columns.len() != ids.len() + 5 || columns[0] != "round" {
        return Err(Error::Config(format!("unexpected trace header `{header}`")));
    }

    let mut rows = Vec::new();
    let mut learner = None;
    let mut dim = None;
    let mut comparators = Vec::new();
    let mut gradients = Vec::new();
    let mut report = None;
    let numbers = |s: &str| {
        s.split_whitespace()
            .map(parse_num)
            .collect::<Result<Vec<_>>>()
    };
    for line in lines {
        if let Some(rest) = line.strip_prefix("# ") {
            let (tag, body) = rest.split_once(' ').unwrap_or((rest, ""));
            match tag {
                "learner" => learner = Some(body.to_string()),
                "dim" => {
                    dim = Some(
                        body.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::Config(format!("invalid dim `{body}`")))?,
                    )
                }
                "comparator" => {
                    let (id, values) = body.split_once(' ').unwrap_or((body, ""));
                    comparators.push(Comparator {
                        id: id.to_string(),
                        point: numbers(values)?,
                    });
                }
                "gradient" => gradients.push(numbers(body)?),
                "report" => report = Some(parse_report(body)?),
                _ => return Err(Error::Config(format!("unknown trailer line `{line}`"))),
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != columns.len() {
            return Err(Error::Config(format!("malformed trace row `{line}`")));
        }
        let k = ids.len();
        rows.push(TraceRow {
            round: cells[0]
                .parse()
                .map_err(|_| Error::Config(format!("invalid round `{}`", cells[0])))?,
            inner_product_gw: parse_num(cells[1])?,
            inner_product_fw: None,
            cum_regret: cells[2..2 + k]
                .iter()
                .map(|c| parse_num(c))
                .collect::<Result<_>>()?,
            bound_l2: parse_num(cells[2 + k])?,
            bound_fullmatrix: parse_num(cells[3 + k])?,
            bound_adagrad: parse_num(cells[4 + k])?,
        });
    }
    let missing = |what: &str| Error::Config(format!("trace trailer lacks the {what}"));
    let trace = RegretTrace {
        learner: learner.ok_or_else(|| missing("learner"))?,
        dim: dim.ok_or_else(|| missing("dimension"))?,
        comparators,
        rows,
        gradients,
        report: report.ok_or_else(|| missing("bound report"))?,
    };
    if trace.comparators.iter().map(|c| &c.id).ne(ids.iter()) {
        return Err(Error::Config(
            "trailer comparators do not match the header".into(),
        ));
    }
    Ok(trace)
}

/// Recomputes the bound report of a trace from its stored gradients and
/// designated comparator.
pub fn recompute_report(trace: &RegretTrace) -> Result<BoundReport> {
    let comparator = trace
        .comparators
        .first()
        .ok_or_else(|| Error::Config("trace has no comparator".into()))?;
    let comparator = DenseVector::new(comparator.point.clone())?;
    let gradients = trace
        .gradients
        .iter()
        .map(|g| DenseVector::new(g.clone()))
        .collect::<Result<Vec<_>>>()?;
    baselines::bound_report(&gradients, &comparator)
}
