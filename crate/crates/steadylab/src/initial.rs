//! Initial data as a function on the whole line (periodic with the domain).

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steadylab_core::{Field, Grid, Trajectory};

use crate::config::{InitialData, PresetName};
use crate::error::CliError;

pub enum InitialProfile {
    Closed(Box<dyn Fn(f64) -> f64 + Send + Sync>),
    Sampled(Field),
}

impl InitialProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Closed(f) => f(x),
            Self::Sampled(f) => f.eval_at(x),
        }
    }

    pub fn field(&self, grid: Grid) -> Result<Field, CliError> {
        match self {
            Self::Closed(f) => Ok(Field::from_fn(grid, 0.0, f)?),
            Self::Sampled(f) if *f.grid() == grid => Ok(f.clone()),
            Self::Sampled(f) => Ok(Field::from_fn(grid, 0.0, |x| f.eval_at(x))?),
        }
    }
}

fn sech2(x: f64) -> f64 {
    let c = x.cosh();
    1.0 / (c * c)
}

/// Offset of `x` from `c` folded into `[-L/2, L/2)`.
fn periodic_offset(x: f64, c: f64, l: f64) -> f64 {
    (x - c + 0.5 * l).rem_euclid(l) - 0.5 * l
}

pub fn build(
    data: &InitialData,
    grid: Grid,
    seed: u64,
    base: &Path,
) -> Result<InitialProfile, CliError> {
    let l = grid.domain_length();
    match data {
        InitialData::Preset {
            name,
            amplitude,
            center,
            width,
            c3,
            c4,
            omega,
            modes,
        } => {
            let amp = amplitude.unwrap_or(1.0);
            let c = center.unwrap_or(0.5 * l);
            let w = width.unwrap_or(1.0);
            let f: Box<dyn Fn(f64) -> f64 + Send + Sync> = match name {
                PresetName::Zero => Box::new(|_| 0.0),
                PresetName::Sech2 => Box::new(move |x| amp * sech2(periodic_offset(x, c, l) / w)),
                PresetName::Gaussian => Box::new(move |x| {
                    let d = periodic_offset(x, c, l) / w;
                    amp * (-d * d).exp()
                }),
                PresetName::Trig => {
                    let (p, q) = (c3.unwrap_or(1.0), c4.unwrap_or(0.0));
                    let om = omega.unwrap_or(2.0 * PI / l);
                    let c0 = center.unwrap_or(0.0);
                    Box::new(move |x| {
                        let y = om * (x - c0);
                        p * y.cos() + q * y.sin()
                    })
                }
                PresetName::RandomSymmetric => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let coeffs: Vec<f64> = (0..modes.unwrap_or(4))
                        .map(|_| amp * rng.gen_range(-1.0..1.0))
                        .collect();
                    Box::new(move |x| {
                        coeffs
                            .iter()
                            .enumerate()
                            .map(|(k, a)| a * (2.0 * PI * (k + 1) as f64 * (x - c) / l).cos())
                            .sum()
                    })
                }
            };
            Ok(InitialProfile::Closed(f))
        }
        InitialData::Samples { values } => Ok(InitialProfile::Sampled(Field::new(grid, values.clone(), 0.0)?)),
        InitialData::File { path } => {
            let full = base.join(path);
            let text = std::fs::read_to_string(&full).map_err(|source| CliError::Io {
                path: full.display().to_string(),
                source,
            })?;
            let field = if full.extension().is_some_and(|e| e == "json") {
                Trajectory::from_json(&text)
                    .map_err(|e| CliError::Validation(format!("initial_data.path: {e}")))?
                    .last()
                    .with_time(0.0)
            } else {
                let values = parse_column(&text)
                    .map_err(|e| CliError::Validation(format!("initial_data.path: {e}")))?;
                let g = Grid::new(l, values.len())
                    .map_err(|e| CliError::Validation(format!("initial_data.path: {e}")))?;
                Field::new(g, values, 0.0)?
            };
            Ok(InitialProfile::Sampled(field))
        }
    }
}

/// Last number on each nonblank, non-`#` line.
fn parse_column(text: &str) -> Result<Vec<f64>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            let tok = l.split_whitespace().last().expect("nonblank line");
            tok.parse::<f64>()
                .map_err(|e| format!("line {}: '{tok}': {e}", i + 1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preset(name: PresetName) -> InitialData {
        InitialData::Preset {
            name,
            amplitude: Some(2.0),
            center: Some(1.0),
            width: Some(0.5),
            c3: None,
            c4: None,
            omega: None,
            modes: Some(3),
        }
    }

    #[test]
    fn presets_are_periodic() {
        let g = Grid::new(8.0, 64).unwrap();
        for name in [PresetName::Sech2, PresetName::Gaussian, PresetName::Trig, PresetName::RandomSymmetric] {
            let p = build(&preset(name), g, 3, Path::new(".")).unwrap();
            for x in [0.1, 2.5, 7.3] {
                assert!((p.eval(x) - p.eval(x + 8.0)).abs() < 1e-12, "{name:?}");
            }
        }
        let p = build(&preset(PresetName::Sech2), g, 0, Path::new(".")).unwrap();
        assert_eq!(p.eval(1.0), 2.0);
    }

    #[test]
    fn random_symmetric_is_seeded_and_even() {
        let g = Grid::new(8.0, 64).unwrap();
        let a = build(&preset(PresetName::RandomSymmetric), g, 5, Path::new(".")).unwrap();
        let b = build(&preset(PresetName::RandomSymmetric), g, 5, Path::new(".")).unwrap();
        let c = build(&preset(PresetName::RandomSymmetric), g, 6, Path::new(".")).unwrap();
        assert_eq!(a.eval(0.7), b.eval(0.7));
        assert_ne!(a.eval(0.7), c.eval(0.7));
        assert!((a.eval(1.0 + 0.3) - a.eval(1.0 - 0.3)).abs() < 1e-12);
    }

    #[test]
    fn column_files() {
        assert_eq!(parse_column("# x v\n0 1.5\n1 2.5\n\n").unwrap(), vec![1.5, 2.5]);
        assert!(parse_column("0 x\n").unwrap_err().contains("line 1"));
    }
}
