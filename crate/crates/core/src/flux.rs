//! Helicity flux through a plane from footpoint motions.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Vec2, Vec3};
use crate::grid::{slice_at, VectorField3, DEFAULT_EPS_BZ};
use crate::header;
use crate::helicity::{pair_sums, HelicityReport, PlaneCells, Quadrature, QuadratureMeta, ReportKind};
use crate::labeling::RegionMask;
use crate::sum::ExactSum;

/// A uniform grid of nodes on a horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub origin: Vec2,
}

impl PlaneGrid {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, origin: Vec2) -> Result<Self> {
        let p = Self { nx, ny, dx, dy, origin };
        p.validate()?;
        Ok(p)
    }

    pub fn spanning(n: [usize; 2], lo: Vec2, hi: Vec2) -> Result<Self> {
        if n[0] < 2 || n[1] < 2 {
            return Err(Error::InvalidGrid("a plane needs at least 2 samples per axis".into()));
        }
        Self::new(
            n[0],
            n[1],
            (hi[0] - lo[0]) / (n[0] - 1) as f64,
            (hi[1] - lo[1]) / (n[1] - 1) as f64,
            lo,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidGrid("a plane needs at least 2 samples per axis".into()));
        }
        if !(self.dx > 0.0 && self.dy > 0.0 && self.dx.is_finite() && self.dy.is_finite()) {
            return Err(Error::InvalidGrid("plane spacing must be positive".into()));
        }
        if !self.origin.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGrid("plane origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn position(&self, idx: usize) -> Vec2 {
        [
            self.origin[0] + (idx % self.nx) as f64 * self.dx,
            self.origin[1] + (idx / self.nx) as f64 * self.dy,
        ]
    }

    pub fn center(&self) -> Vec2 {
        [
            self.origin[0] + 0.5 * (self.nx - 1) as f64 * self.dx,
            self.origin[1] + 0.5 * (self.ny - 1) as f64 * self.dy,
        ]
    }
}

/// `B_z` and footpoint velocity on the plane at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarFrame {
    pub bz: Vec<f64>,
    /// `None` where the footpoint velocity is undefined.
    pub w: Vec<Option<Vec2>>,
}

/// A time series of planar frames with optional per-frame labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarSeries {
    pub plane: PlaneGrid,
    pub times: Vec<f64>,
    pub frames: Vec<PlanarFrame>,
    pub labels: Option<Vec<Vec<i32>>>,
}

impl PlanarSeries {
    pub fn new(
        plane: PlaneGrid,
        times: Vec<f64>,
        frames: Vec<PlanarFrame>,
        labels: Option<Vec<Vec<i32>>>,
    ) -> Result<Self> {
        plane.validate()?;
        if times.is_empty() || times.len() != frames.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} times for {} frames",
                times.len(),
                frames.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("times must be finite and strictly increasing".into()));
        }
        let n = plane.len();
        for (k, f) in frames.iter().enumerate() {
            if f.bz.len() != n || f.w.len() != n {
                return Err(Error::ShapeMismatch(format!("frame {k} does not match the plane")));
            }
            if let Some(i) = f.bz.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { component: "Bz".into(), index: k * n + i });
            }
            if let Some(i) = f.w.iter().position(|w| w.is_some_and(|w| !(w[0].is_finite() && w[1].is_finite()))) {
                return Err(Error::NonFinite { component: "w".into(), index: k * n + i });
            }
        }
        if let Some(l) = &labels {
            if l.len() != frames.len() || l.iter().any(|m| m.len() != n) {
                return Err(Error::ShapeMismatch("labels do not match the series".into()));
            }
        }
        Ok(Self { plane, times, frames, labels })
    }

    /// Slices of a static field read as a time series with `t = z`, and
    /// footpoint velocity `w = B_perp / B_z`.
    pub fn from_field_slices(field: &VectorField3, eps_bz: f64) -> Result<Self> {
        let g = &field.grid;
        let plane = PlaneGrid::new(g.nx, g.ny, g.dx, g.dy, [g.origin[0], g.origin[1]])?;
        let mut frames = Vec::with_capacity(g.nz);
        for k in 0..g.nz {
            let s = slice_at(field, k, eps_bz)?;
            frames.push(PlanarFrame { bz: s.bz, w: s.slope });
        }
        let times = (0..g.nz).map(|k| g.z_at(k)).collect();
        Self::new(plane, times, frames, None)
    }

    /// Frames in reverse order with negated velocities, on the reflected
    /// time axis `t' = t_0 + t_M - t`.
    pub fn time_reversed(&self) -> Self {
        let (t0, tm) = (self.times[0], self.times[self.times.len() - 1]);
        let times = self.times.iter().rev().map(|&t| t0 + tm - t).collect();
        let frames = self
            .frames
            .iter()
            .rev()
            .map(|f| PlanarFrame {
                bz: f.bz.clone(),
                w: f.w.iter().map(|w| w.map(|v| [-v[0], -v[1]])).collect(),
            })
            .collect();
        let labels = self.labels.as_ref().map(|l| l.iter().rev().cloned().collect());
        Self { plane: self.plane, times, frames, labels }
    }

    /// Trapezoid weights in time; a single frame gets weight zero.
    pub fn time_weights(&self) -> Vec<f64> {
        let t = &self.times;
        let m = t.len();
        (0..m)
            .map(|k| {
                let left = if k > 0 { t[k] - t[k - 1] } else { 0.0 };
                let right = if k + 1 < m { t[k + 1] - t[k] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    }

    /// Attach per-frame labels from a mask stack with one z-plane per frame.
    pub fn with_label_stack(mut self, stack: &RegionMask) -> Result<Self> {
        let g = &stack.grid;
        if g.nx != self.plane.nx || g.ny != self.plane.ny || g.nz != self.frames.len() {
            return Err(Error::ShapeMismatch(format!(
                "label stack is {}x{}x{}, series is {}x{}x{}",
                g.nx,
                g.ny,
                g.nz,
                self.plane.nx,
                self.plane.ny,
                self.frames.len()
            )));
        }
        let n = self.plane.len();
        self.labels = Some(stack.labels.chunks(n).map(|c| c.to_vec()).collect());
        Ok(self)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesHeader {
    format: String,
    version: u32,
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    origin: Vec2,
    times: Vec<f64>,
    layout: Vec<String>,
}

const SERIES_LAYOUT: [&str; 3] = ["Bz", "wx", "wy"];

/// Read a WHPS v1 file. Undefined velocities are stored as NaN.
pub fn load_series(path: impl AsRef<Path>) -> Result<PlanarSeries> {
    let (h, payload): (SeriesHeader, _) = header::read(path.as_ref())?;
    header::check_format(&h.format, "WHPS", h.version)?;
    if h.layout != SERIES_LAYOUT {
        return Err(Error::Header(format!("layout must be {SERIES_LAYOUT:?}, got {:?}", h.layout)));
    }
    let plane = PlaneGrid::new(h.nx, h.ny, h.dx, h.dy, h.origin)?;
    let n = plane.len();
    header::check_payload(3 * n * h.times.len() * 8, payload.len())?;
    let values = header::le_to_f64s(&payload);
    let frames = values
        .chunks_exact(3 * n)
        .map(|c| {
            let (bz, w) = c.split_at(n);
            let (wx, wy) = w.split_at(n);
            PlanarFrame {
                bz: bz.to_vec(),
                w: wx
                    .iter()
                    .zip(wy)
                    .map(|(&a, &b)| (!a.is_nan() && !b.is_nan()).then_some([a, b]))
                    .collect(),
            }
        })
        .collect();
    PlanarSeries::new(plane, h.times, frames, None)
}

/// Write a WHPS v1 file.
pub fn save_series(series: &PlanarSeries, path: impl AsRef<Path>) -> Result<()> {
    let p = &series.plane;
    let h = SeriesHeader {
        format: "WHPS".into(),
        version: 1,
        nx: p.nx,
        ny: p.ny,
        dx: p.dx,
        dy: p.dy,
        origin: p.origin,
        times: series.times.clone(),
        layout: SERIES_LAYOUT.iter().map(|s| s.to_string()).collect(),
    };
    let mut payload = Vec::with_capacity(3 * p.len() * series.frames.len() * 8);
    for f in &series.frames {
        header::f64s_to_le(&f.bz, &mut payload);
        let wx: Vec<f64> = f.w.iter().map(|w| w.map_or(f64::NAN, |v| v[0])).collect();
        let wy: Vec<f64> = f.w.iter().map(|w| w.map_or(f64::NAN, |v| v[1])).collect();
        header::f64s_to_le(&wx, &mut payload);
        header::f64s_to_le(&wy, &mut payload);
    }
    header::write(path.as_ref(), &h, &payload)
}

/// `w = u_perp - (u_z / B_z) B_perp` where `|B_z| > eps_bz * max|B_z|`.
pub fn footpoint_velocity(u: &[Vec3], b: &[Vec3], eps_bz: f64) -> Result<Vec<Option<Vec2>>> {
    if u.len() != b.len() {
        return Err(Error::ShapeMismatch("velocity and field maps differ in size".into()));
    }
    let bz_max = b.iter().fold(0.0_f64, |m, v| m.max(v[2].abs()));
    let cut = eps_bz * bz_max;
    Ok(u.iter()
        .zip(b)
        .map(|(u, b)| {
            (bz_max > 0.0 && b[2].abs() > cut).then(|| {
                let r = u[2] / b[2];
                [u[0] - r * b[0], u[1] - r * b[1]]
            })
        })
        .collect())
}

/// Space-time field `C = E x e_t + B_z e_t` on one plane.
#[derive(Debug, Clone, PartialEq)]
pub struct CFieldSlice {
    pub cx: Vec<f64>,
    pub cy: Vec<f64>,
    pub ct: Vec<f64>,
    /// Max interior `|dCx/dx + dCy/dy + dBz/dt|`; absent without a time
    /// stencil.
    pub div_residual: Option<f64>,
}

/// `B_z` one step before and after the frame, for the divergence check.
#[derive(Debug, Clone, Copy)]
pub struct TimeStencil<'a> {
    pub bz_before: &'a [f64],
    pub bz_after: &'a [f64],
    pub dt: f64,
}

/// `E = -u x B`, `C = (E_y, -E_x, B_z)`.
pub fn c_field(plane: &PlaneGrid, u: &[Vec3], b: &[Vec3], stencil: Option<TimeStencil>) -> Result<CFieldSlice> {
    let n = plane.len();
    if u.len() != n || b.len() != n {
        return Err(Error::ShapeMismatch("maps do not match the plane".into()));
    }
    let mut cx = Vec::with_capacity(n);
    let mut cy = Vec::with_capacity(n);
    let mut ct = Vec::with_capacity(n);
    for (u, b) in u.iter().zip(b) {
        let e = [
            -(u[1] * b[2] - u[2] * b[1]),
            -(u[2] * b[0] - u[0] * b[2]),
            -(u[0] * b[1] - u[1] * b[0]),
        ];
        cx.push(e[1]);
        cy.push(-e[0]);
        ct.push(b[2]);
    }
    if cx.iter().chain(&cy).chain(&ct).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { component: "C".into(), index: 0 });
    }
    let div_residual = match stencil {
        None => None,
        Some(s) => {
            if s.bz_before.len() != n || s.bz_after.len() != n || !(s.dt > 0.0) {
                return Err(Error::ShapeMismatch("time stencil does not match the plane".into()));
            }
            let mut worst = 0.0_f64;
            for j in 1..plane.ny - 1 {
                for i in 1..plane.nx - 1 {
                    let c = j * plane.nx + i;
                    let d = (cx[c + 1] - cx[c - 1]) / (2.0 * plane.dx)
                        + (cy[c + plane.nx] - cy[c - plane.nx]) / (2.0 * plane.dy)
                        + (s.bz_after[c] - s.bz_before[c]) / (2.0 * s.dt);
                    worst = worst.max(d.abs());
                }
            }
            Some(worst)
        }
    };
    Ok(CFieldSlice { cx, cy, ct, div_residual })
}

struct FrameSums {
    buckets: Vec<f64>,
    total: f64,
    magnitude: f64,
    excluded: f64,
    excluded_weight: f64,
}

fn frame_sums(series: &PlanarSeries, k: usize, nlabels: Option<usize>) -> FrameSums {
    let f = &series.frames[k];
    let nl = nlabels.unwrap_or(1);
    let labels = nlabels.and_then(|_| series.labels.as_ref().map(|l| &l[k]));
    let mut cells = PlaneCells::default();
    let mut ex_weight = 0.0;
    for c in 0..series.plane.len() {
        let bz = f.bz[c];
        if bz == 0.0 {
            continue;
        }
        let slot = match labels {
            None => 0,
            Some(l) if l[c] < 0 || l[c] as usize >= nl => nl,
            Some(l) => l[c] as usize,
        };
        match f.w[c] {
            None => ex_weight += bz.abs(),
            Some(w) => {
                if slot == nl {
                    ex_weight += bz.abs();
                }
                cells.push(series.plane.position(c), [w[0] * bz, w[1] * bz], bz, slot);
            }
        }
    }
    let s = pair_sums(&cells, nl);
    FrameSums {
        buckets: s.buckets,
        total: s.total,
        magnitude: s.magnitude,
        excluded: s.excluded,
        excluded_weight: ex_weight * series.plane.cell_area(),
    }
}

/// Time-integrated helicity flux, with the leading minus sign:
/// `-(1/2 pi) sum_t dt sum_{x != y} dtheta/dt B_z(x) B_z(y) dA^2`.
///
/// Cells with undefined footpoint velocity are skipped.
pub fn flux_total(series: &PlanarSeries) -> Quadrature {
    let wt = series.time_weights();
    let da2 = series.plane.cell_area().powi(2);
    let (mut value, mut magnitude) = (ExactSum::new(), ExactSum::new());
    for k in 0..series.frames.len() {
        if wt[k] == 0.0 {
            continue;
        }
        let s = frame_sums(series, k, None);
        let w = wt[k] * da2 / (2.0 * PI);
        value.add(-s.total * w);
        magnitude.add(s.magnitude * w);
    }
    Quadrature { value: value.value(), magnitude: magnitude.value() }
}

/// Self/mutual split of [`flux_total`] by per-frame labels.
pub fn flux_decompose(series: &PlanarSeries) -> Result<HelicityReport> {
    let labels = series
        .labels
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("flux decomposition needs per-frame labels".into()))?;
    let counts: Vec<usize> = labels
        .iter()
        .map(|l| l.iter().copied().max().map_or(0, |m| (m + 1).max(0) as usize))
        .collect();
    let nl = counts.iter().copied().max().unwrap_or(0).max(1);
    if counts.windows(2).any(|w| w[0] != w[1]) {
        log::warn!("label count changes across frames");
    }
    let wt = series.time_weights();
    let da2 = series.plane.cell_area().powi(2);
    let mut buckets: Vec<ExactSum> = (0..nl * nl).map(|_| ExactSum::new()).collect();
    let (mut total, mut magnitude, mut excluded, mut ex_weight) =
        (ExactSum::new(), ExactSum::new(), ExactSum::new(), ExactSum::new());
    for k in 0..series.frames.len() {
        if wt[k] == 0.0 {
            continue;
        }
        let s = frame_sums(series, k, Some(nl));
        let w = wt[k] * da2 / (2.0 * PI);
        for (b, v) in buckets.iter_mut().zip(&s.buckets) {
            b.add(-v * w);
        }
        total.add(-s.total * w);
        magnitude.add(s.magnitude * w);
        excluded.add(s.excluded * w);
        ex_weight.add(s.excluded_weight * wt[k]);
    }
    Ok(HelicityReport::from_buckets(
        ReportKind::Flux,
        nl,
        &buckets,
        total.value(),
        magnitude.value(),
        excluded.value(),
        ex_weight.value(),
        QuadratureMeta::new(
            ReportKind::Flux,
            [series.plane.nx, series.plane.ny, series.frames.len()],
            Some(DEFAULT_EPS_BZ),
        ),
    ))
}
