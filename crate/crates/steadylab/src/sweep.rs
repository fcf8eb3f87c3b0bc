//! Coefficient sweeps: `name=start:stop:count`, `name=v1|v2|...` or
//! `name=value`, comma separated; the cartesian product is visited with the
//! last name varying fastest.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::value::RawValue;
use steadylab_core::io::{format_f64, to_json_compact};

use crate::commands::{Context, Outcome, Verdict};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

fn bad(msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("--sweep: {msg}"))
}

fn number(s: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| bad(format!("'{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(bad(format!("'{s}' is not finite")));
    }
    Ok(v)
}

pub fn parse(spec: &str) -> Result<Vec<Axis>, CliError> {
    let mut axes: Vec<Axis> = Vec::new();
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        let (name, rhs) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("'{part}' is not name=values")))?;
        let name = name.trim().to_string();
        if axes.iter().any(|a| a.name == name) {
            return Err(bad(format!("'{name}' given twice")));
        }
        let pieces: Vec<&str> = rhs.split(':').collect();
        let values = match pieces.as_slice() {
            [a, b, n] => {
                let (a, b) = (number(a)?, number(b)?);
                let n: usize = n
                    .trim()
                    .parse()
                    .ok()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| bad(format!("count '{n}' must be a positive integer")))?;
                if n == 1 {
                    vec![a]
                } else {
                    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
                }
            }
            [list] => list.split('|').map(number).collect::<Result<_, _>>()?,
            _ => return Err(bad(format!("'{rhs}' is neither start:stop:count nor a list"))),
        };
        axes.push(Axis { name, values });
    }
    if axes.is_empty() {
        return Err(bad("empty grid"));
    }
    Ok(axes)
}

pub fn cells(axes: &[Axis]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for a in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                a.values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    out
}

#[derive(Serialize)]
struct Row {
    index: usize,
    values: Vec<f64>,
    verdict: Option<&'static str>,
    error: Option<String>,
    exit_code: i32,
    result: Option<Box<RawValue>>,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    command: &'a str,
    verdict: Option<&'a str>,
    config: Box<RawValue>,
    axes: &'a [Axis],
    rows: Vec<Row>,
}

/// Pulls the `result` member out of a per-cell report.
fn result_of(report: &str) -> Option<Box<RawValue>> {
    #[derive(serde::Deserialize)]
    struct Partial {
        result: Box<RawValue>,
    }
    serde_json::from_str::<Partial>(report).ok().map(|p| p.result)
}

pub fn run(
    ctx: &Context,
    command: &'static str,
    spec: &str,
    workers: usize,
    f: fn(&Context) -> Result<Outcome, CliError>,
) -> Result<Outcome, CliError> {
    let axes = parse(spec)?;
    let grid = cells(&axes);
    // reject unknown names before fanning out
    let mut probe = ctx.cfg.clone();
    for a in &axes {
        probe.set_coefficient(&a.name, a.values[0])?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| bad(format!("thread pool: {e}")))?;
    let rows: Vec<Row> = pool.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(index, values)| {
                let mut cfg = ctx.cfg.clone();
                let outcome = axes
                    .iter()
                    .zip(values)
                    .try_for_each(|(a, v)| cfg.set_coefficient(&a.name, *v))
                    .and_then(|_| cfg.validate())
                    .and_then(|_| {
                        f(&Context {
                            cfg,
                            base: ctx.base.clone(),
                        })
                    });
                match outcome {
                    Ok(o) => Row {
                        index,
                        values: values.clone(),
                        verdict: o.verdict.map(Verdict::name),
                        error: None,
                        exit_code: 0,
                        result: result_of(&o.report),
                    },
                    Err(e) => Row {
                        index,
                        values: values.clone(),
                        verdict: None,
                        error: Some(e.to_string()),
                        exit_code: e.exit_code(),
                        result: None,
                    },
                }
            })
            .collect()
    });
    let all = rows.iter().all(|r| r.verdict == Some("satisfied"));
    let verdict = Verdict::from_bool(all);
    let mut csv = axes.iter().map(|a| a.name.as_str()).collect::<Vec<_>>().join(",");
    csv.push_str(",verdict,exit_code\n");
    for r in &rows {
        let vals: Vec<String> = r.values.iter().map(|v| format_f64(*v)).collect();
        csv.push_str(&format!(
            "{},{},{}\n",
            vals.join(","),
            r.verdict.unwrap_or("error"),
            r.exit_code
        ));
    }
    let mut report = to_json_compact(&SweepReport {
        command,
        verdict: Some(verdict.name()),
        config: RawValue::from_string(to_json_compact(&ctx.cfg)).expect("valid JSON"),
        axes: &axes,
        rows,
    });
    report.push('\n');
    Ok(Outcome {
        name: "sweep",
        report,
        verdict: Some(verdict),
        files: vec![("sweep.csv".into(), csv)],
        plots: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs() {
        let a = parse("b1=-1:1:3, b2=0.5|2,b10=1").unwrap();
        assert_eq!(a[0].values, vec![-1.0, 0.0, 1.0]);
        assert_eq!(a[1].values, vec![0.5, 2.0]);
        assert_eq!(a[2].values, vec![1.0]);
        let c = cells(&a);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec![-1.0, 0.5, 1.0]);
        assert_eq!(c[1], vec![-1.0, 2.0, 1.0]);
        assert!(parse("b1").is_err());
        assert!(parse("b1=1:2").is_err());
        assert!(parse("b1=1:2:0").is_err());
        assert!(parse("b1=x").is_err());
        assert!(parse("b1=1,b1=2").is_err());
    }
}
