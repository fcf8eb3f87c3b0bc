//! Time-stamped snapshot sequences and their CSV / JSON forms.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::io::{format_f64, to_json_compact};
use crate::perturbed::PerturbedParams;
use crate::rkrlw::GrkrlwParams;
use crate::spectral::{Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "equation", rename_all = "snake_case")]
pub enum ModelParams {
    Rkrlw(GrkrlwParams),
    Perturbed(PerturbedParams),
}

/// Snapshots on one grid with strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: Grid,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    params: Option<ModelParams>,
    dt: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "N")]
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryJson {
    grid: GridJson,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(snapshots: Vec<Field>) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| invalid("trajectory needs at least one snapshot"))?;
        let mut t = Self {
            grid: *first.grid(),
            times: Vec::with_capacity(snapshots.len()),
            values: Vec::with_capacity(snapshots.len()),
            params: None,
            dt: None,
        };
        for f in snapshots {
            t.push(f)?;
        }
        Ok(t)
    }

    pub fn from_parts(grid: Grid, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(invalid(format!(
                "{} times but {} snapshots",
                times.len(),
                values.len()
            )));
        }
        let fields = times
            .into_iter()
            .zip(values)
            .map(|(t, v)| Field::new(grid, v, t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(fields)
    }

    pub fn push(&mut self, f: Field) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(invalid("all snapshots must share one grid"));
        }
        if let Some(&last) = self.times.last() {
            if f.time().is_nan() || f.time() <= last {
                return Err(invalid(format!(
                    "snapshot times must increase strictly: {} after {last}",
                    f.time()
                )));
            }
        }
        if !f.is_finite() {
            return Err(invalid(format!("snapshot at t = {} is not finite", f.time())));
        }
        self.times.push(f.time());
        self.values.push(f.into_values());
        Ok(())
    }

    pub fn with_params(mut self, params: ModelParams) -> Self {
        self.params = Some(params);
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn params(&self) -> Option<&ModelParams> {
        self.params.as_ref()
    }

    pub fn dt(&self) -> Option<f64> {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn snapshot(&self, i: usize) -> Field {
        Field::from_raw(self.grid, self.values[i].clone(), self.times[i])
    }

    pub fn snapshots(&self) -> impl Iterator<Item = Field> + '_ {
        (0..self.len()).map(|i| self.snapshot(i))
    }

    pub fn first(&self) -> Field {
        self.snapshot(0)
    }

    pub fn last(&self) -> Field {
        self.snapshot(self.len() - 1)
    }

    /// Translates every snapshot by `s`.
    pub fn shift(&self, s: f64) -> Self {
        let mut out = self.clone();
        for (i, v) in out.values.iter_mut().enumerate() {
            *v = self.snapshot(i).shift(s).into_values();
        }
        out
    }

    /// Header `t,x,v`, one row per node, snapshot-major.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,v\n");
        for (t, vals) in self.times.iter().zip(&self.values) {
            for (j, v) in vals.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{}\n",
                    format_f64(*t),
                    format_f64(self.grid.node(j)),
                    format_f64(*v)
                ));
            }
        }
        s
    }

    /// `{"grid":{"L":..,"N":..},"times":[..],"values":[[..],..]}`.
    pub fn to_json(&self) -> String {
        to_json_compact(&TrajectoryJson {
            grid: GridJson {
                l: self.grid.domain_length(),
                n: self.grid.num_points(),
            },
            times: self.times.clone(),
            values: self.values.clone(),
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: TrajectoryJson =
            serde_json::from_str(s).map_err(|e| invalid(format!("trajectory JSON: {e}")))?;
        Self::from_parts(Grid::new(j.grid.l, j.grid.n)?, j.times, j.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trajectory {
        let g = Grid::new(std::f64::consts::PI, 16).unwrap();
        let a = Field::from_fn(g, 0.0, |x| (x * 1.1).sin() / 3.0).unwrap();
        let b = Field::from_fn(g, 0.1, |x| (x * 1.3).cos() * 1e-7).unwrap();
        Trajectory::new(vec![a, b]).unwrap()
    }

    #[test]
    fn rejects_non_increasing_times_and_mixed_grids() {
        let g = Grid::new(1.0, 16).unwrap();
        let h = Grid::new(2.0, 16).unwrap();
        let a = Field::zeros(g, 0.0);
        assert!(Trajectory::new(vec![a.clone(), a.clone()]).is_err());
        assert!(Trajectory::new(vec![a.clone(), Field::zeros(h, 1.0)]).is_err());
        assert!(Trajectory::new(vec![]).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let t = sample();
        let back = Trajectory::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        assert!(t.to_json().starts_with("{\"grid\":{\"L\":"));
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x,v");
        assert_eq!(lines.len(), 1 + 2 * 16);
        assert!(lines[17].starts_with("1.0000000000000001e-1,0.0000000000000000e0,"));
    }
}
