use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snu::{GaussianStateSpec, SqueezingPuritySpec};

use super::smax::{smax_analytic_with, SmaxOptions, SmaxStatus};
use super::{witness_analytic, CenterPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub distance: f64,
    pub lhs: f64,
    pub violated: bool,
}

/// Analytic witness `lhs` at each distance of `grid`.
pub fn theory_curve(state: &GaussianStateSpec, grid: &[f64], center: CenterPolicy) -> Result<Vec<CurvePoint>> {
    if let Some(&bad) = grid.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(Error::param("S grid", format!("distances must be >= 0, got {bad}")));
    }
    grid.iter()
        .map(|&s| {
            let w = witness_analytic(state, s, center)?;
            Ok(CurvePoint {
                distance: s,
                lhs: w.lhs,
                violated: w.violated,
            })
        })
        .collect()
}

/// Evenly spaced closed range; a single point sits at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRange {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl GridRange {
    pub fn new(start: f64, end: f64, count: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || start > end {
            return Err(Error::param("range", format!("expected start <= end, got {start}..{end}")));
        }
        if count == 0 {
            return Err(Error::param("resolution", "must be at least 1"));
        }
        Ok(GridRange { start, end, count })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == self.count - 1 {
                    self.end
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

/// `S_max` over a (squeezing, purity) grid. Rows are squeezing levels,
/// columns purities; `s_max[i * purity.len() + j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourGrid {
    pub squeezing_db: Vec<f64>,
    pub purity: Vec<f64>,
    pub s_max: Vec<f64>,
    pub status: Vec<SmaxStatus>,
}

impl ContourGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.s_max[i * self.purity.len() + j]
    }

    /// Bilinear interpolation inside the grid.
    pub fn interpolate(&self, squeezing_db: f64, purity: f64) -> Option<f64> {
        fn locate(axis: &[f64], v: f64) -> Option<(usize, f64)> {
            if axis.len() == 1 {
                return (axis[0] == v).then_some((0, 0.0));
            }
            if v < axis[0] || v > axis[axis.len() - 1] {
                return None;
            }
            let k = axis.partition_point(|&a| a <= v).clamp(1, axis.len() - 1) - 1;
            Some((k, (v - axis[k]) / (axis[k + 1] - axis[k])))
        }
        let (i, u) = locate(&self.squeezing_db, squeezing_db)?;
        let (j, t) = locate(&self.purity, purity)?;
        let i1 = (i + 1).min(self.squeezing_db.len() - 1);
        let j1 = (j + 1).min(self.purity.len() - 1);
        Some(
            (1.0 - u) * (1.0 - t) * self.get(i, j)
                + (1.0 - u) * t * self.get(i, j1)
                + u * (1.0 - t) * self.get(i1, j)
                + u * t * self.get(i1, j1),
        )
    }
}

pub fn contour_grid(squeezing_db: GridRange, purity: GridRange, opts: &SmaxOptions) -> Result<ContourGrid> {
    if squeezing_db.end > 0.0 {
        return Err(Error::param("squeezing range", "must lie in (-inf, 0] dB"));
    }
    if purity.start <= 0.0 || purity.end > 1.0 {
        return Err(Error::param("purity range", "must lie in (0, 1]"));
    }
    let dbs = squeezing_db.values();
    let purities = purity.values();
    let nodes: Vec<(f64, f64)> = dbs
        .iter()
        .flat_map(|&d| purities.iter().map(move |&p| (d, p)))
        .collect();
    let results: Vec<(f64, SmaxStatus)> = nodes
        .par_iter()
        .map(|&(db, p)| {
            let state = SqueezingPuritySpec::new(db, p)?.to_state()?;
            let r = smax_analytic_with(&state, opts)?;
            Ok((r.s_max, r.status))
        })
        .collect::<Result<_>>()?;
    let (s_max, status) = results.into_iter().unzip();
    Ok(ContourGrid {
        squeezing_db: dbs,
        purity: purities,
        s_max,
        status,
    })
}
