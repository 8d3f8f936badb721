//! Two-dimensional membership rasters of the shape at fixed subject-speed
//! bands.
//!
//! A cell is a member when it holds a witness of the shape inside the band:
//! either its centre, completed with the band midpoint and the median of the
//! band's safe states on every other axis, or a safe state of the band
//! itself.

use rayon::prelude::*;
use safeset_core::analysis::AnalysisOutcome;
use safeset_core::oss::{Interval, OssKind, OssSpec};
use safeset_core::GeometryError;
use serde::{Deserialize, Serialize};

use crate::config::SliceConfig;

/// Axis holding the subject speed in every state space.
const BAND_AXIS: usize = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicePlan {
    pub x_axis: usize,
    pub y_axis: usize,
    pub band_axis: usize,
    pub band: Interval,
    pub file_name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceRaster {
    pub plan: SlicePlan,
    pub x_name: String,
    pub y_name: String,
    pub x_range: Interval,
    pub y_range: Interval,
    pub resolution: usize,
    /// Row-major over `y`, then `x`.
    pub member: Vec<bool>,
    /// Safe states of the band falling in each cell.
    pub ds_count: Vec<u32>,
}

impl SliceRaster {
    pub fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        (cell(x, self.x_range, self.resolution), cell(y, self.y_range, self.resolution))
    }

    pub fn is_member(&self, ix: usize, iy: usize) -> bool {
        self.member[iy * self.resolution + ix]
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["ix", "iy", &self.x_name, &self.y_name, "member", "ds_points"])?;
        let n = self.resolution;
        for iy in 0..n {
            for ix in 0..n {
                let k = iy * n + ix;
                w.write_record([
                    ix.to_string(),
                    iy.to_string(),
                    centre(ix, self.x_range, n).to_string(),
                    centre(iy, self.y_range, n).to_string(),
                    u8::from(self.member[k]).to_string(),
                    self.ds_count[k].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn cell(v: f64, r: Interval, n: usize) -> usize {
    let t = ((v - r.lo) / r.len() * n as f64).floor();
    (t.max(0.0) as usize).min(n - 1)
}

fn centre(i: usize, r: Interval, n: usize) -> f64 {
    r.lo + (i as f64 + 0.5) * r.len() / n as f64
}

fn axis_pairs(kind: OssKind) -> Vec<(usize, usize)> {
    let multi = (0..6).map(|r| (1 + 2 * r, 2 + 2 * r));
    match kind {
        OssKind::LeadFollowing => vec![(1, 2)],
        OssKind::MultiVehicle => multi.collect(),
        OssKind::VehiclePedestrian => vec![(1, 2), (3, 4)],
        OssKind::Combined => multi.chain([(13, 14), (15, 16)]).collect(),
    }
}

fn in_band(p: &[f64], band: Interval) -> bool {
    band.contains(p[BAND_AXIS])
}

/// Picks the busiest subject-speed bands and the axis pairs to slice.
pub fn plan_slices(spec: &OssSpec, ds: &[Vec<f64>], cfg: &SliceConfig) -> Vec<SlicePlan> {
    if ds.is_empty() {
        return Vec::new();
    }
    let bounds = spec.dimension_bounds();
    let names = spec.dimension_names();
    let range = bounds[BAND_AXIS];
    let n_bands = ((range.len() / cfg.band_width).ceil() as usize).max(1);
    let mut counts = vec![0usize; n_bands];
    for p in ds {
        let b = ((p[BAND_AXIS] - range.lo) / cfg.band_width).floor().max(0.0) as usize;
        counts[b.min(n_bands - 1)] += 1;
    }
    let mut order: Vec<usize> = (0..n_bands).filter(|&b| counts[b] > 0).collect();
    order.sort_by(|a, b| counts[*b].cmp(&counts[*a]).then(a.cmp(b)));
    let keep = if spec.kind == OssKind::LeadFollowing { cfg.max_bands.max(1) } else { 1 };
    order.truncate(keep);
    order.sort_unstable();
    let mut plans = Vec::new();
    for b in order {
        let lo = range.lo + b as f64 * cfg.band_width;
        let band = Interval::new(lo, (lo + cfg.band_width).min(range.hi));
        for (x, y) in axis_pairs(spec.kind) {
            let file_name = format!(
                "slice_{}-{}_{}-{}-{}.csv",
                names[x], names[y], names[BAND_AXIS], band.lo, band.hi
            );
            plans.push(SlicePlan { x_axis: x, y_axis: y, band_axis: BAND_AXIS, band, file_name });
        }
    }
    plans
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Rasterizes one slice of the analysed shape.
pub fn rasterize(outcome: &AnalysisOutcome, spec: &OssSpec, plan: &SlicePlan, resolution: usize) -> Result<SliceRaster, GeometryError> {
    let bounds = spec.dimension_bounds();
    let names = spec.dimension_names();
    let (xr, yr) = (bounds[plan.x_axis], bounds[plan.y_axis]);
    let n = resolution;
    let band_pts: Vec<&Vec<f64>> = outcome.safe_states.points().iter().filter(|p| in_band(p, plan.band)).collect();
    let dim = bounds.len();
    let anchor: Vec<f64> = (0..dim)
        .map(|c| {
            if c == plan.band_axis {
                0.5 * (plan.band.lo + plan.band.hi)
            } else if band_pts.is_empty() {
                0.5 * (bounds[c].lo + bounds[c].hi)
            } else {
                median(band_pts.iter().map(|p| p[c]).collect())
            }
        })
        .collect();
    let member: Vec<bool> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let mut q = anchor.clone();
            q[plan.x_axis] = centre(k % n, xr, n);
            q[plan.y_axis] = centre(k / n, yr, n);
            outcome.contains(&q)
        })
        .collect::<Result<_, _>>()?;
    let mut raster = SliceRaster {
        plan: plan.clone(),
        x_name: names[plan.x_axis].clone(),
        y_name: names[plan.y_axis].clone(),
        x_range: xr,
        y_range: yr,
        resolution: n,
        member,
        ds_count: vec![0; n * n],
    };
    for p in band_pts {
        let (ix, iy) = raster.cell_of(p[plan.x_axis], p[plan.y_axis]);
        raster.ds_count[iy * n + ix] += 1;
        raster.member[iy * n + ix] = true;
    }
    Ok(raster)
}
