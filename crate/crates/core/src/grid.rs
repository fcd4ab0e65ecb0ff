//! Uniform Cartesian grids and sampled vector fields between two horizontal
//! planes.
//!
//! Samples are indexed `(i, j, k)` along `(x, y, z)`; flat storage puts `i`
//! fastest, then `j`, then `k`. The bottom plane is `k = 0`, the top plane
//! `k = nz - 1`, and the height is `h = (nz - 1) * dz`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{norm3, Vec2, Vec3};
use crate::header;

/// Default relative threshold on `|B_z|` below which slopes are undefined.
pub const DEFAULT_EPS_BZ: f64 = 1e-8;

/// Advisory threshold for [`divergence_max`].
pub const DIVERGENCE_WARN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub origin: Vec3,
}

impl Grid3 {
    pub fn new(nx: usize, ny: usize, nz: usize, spacing: Vec3, origin: Vec3) -> Result<Self> {
        let g = Grid3 {
            nx,
            ny,
            nz,
            dx: spacing[0],
            dy: spacing[1],
            dz: spacing[2],
            origin,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid with `n` samples per axis spanning `[lo, hi]` on each axis.
    pub fn spanning(n: [usize; 3], lo: Vec3, hi: Vec3) -> Result<Self> {
        let mut spacing = [0.0; 3];
        for a in 0..3 {
            if n[a] < 2 {
                return Err(Error::InvalidGrid(format!("axis {a} needs at least 2 samples")));
            }
            spacing[a] = (hi[a] - lo[a]) / (n[a] - 1) as f64;
        }
        Self::new(n[0], n[1], n[2], spacing, lo)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 || self.nz < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 samples per axis, got {}x{}x{}",
                self.nx, self.ny, self.nz
            )));
        }
        for (name, d) in [("dx", self.dx), ("dy", self.dy), ("dz", self.dz)] {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} must be positive, got {d}")));
            }
        }
        if !self.origin.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slice_len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn height(&self) -> f64 {
        (self.nz - 1) as f64 * self.dz
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn min_spacing(&self) -> f64 {
        self.dx.min(self.dy).min(self.dz)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> (usize, usize, usize) {
        let i = idx % self.nx;
        let j = (idx / self.nx) % self.ny;
        let k = idx / (self.nx * self.ny);
        (i, j, k)
    }

    #[inline]
    pub fn position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        [
            self.origin[0] + i as f64 * self.dx,
            self.origin[1] + j as f64 * self.dy,
            self.origin[2] + k as f64 * self.dz,
        ]
    }

    pub fn z_at(&self, k: usize) -> f64 {
        self.origin[2] + k as f64 * self.dz
    }

    pub fn upper(&self) -> Vec3 {
        self.position(self.nx - 1, self.ny - 1, self.nz - 1)
    }

    /// Inclusive bounding-box test with a rounding allowance of 1e-12 cells.
    pub fn contains(&self, p: Vec3) -> bool {
        let hi = self.upper();
        let d = [self.dx, self.dy, self.dz];
        (0..3).all(|a| {
            let slack = 1e-12 * d[a];
            p[a] >= self.origin[a] - slack && p[a] <= hi[a] + slack
        })
    }

    /// Trapezoidal weights in z (half weight on the two bounding planes).
    pub fn z_weights(&self) -> Vec<f64> {
        (0..self.nz)
            .map(|k| {
                if k == 0 || k == self.nz - 1 {
                    0.5 * self.dz
                } else {
                    self.dz
                }
            })
            .collect()
    }

    pub fn same_shape(&self, other: &Grid3) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.nz == other.nz
    }
}

/// A vector field sampled on every node of a [`Grid3`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    pub grid: Grid3,
    pub bx: Vec<f64>,
    pub by: Vec<f64>,
    pub bz: Vec<f64>,
}

impl VectorField3 {
    pub fn new(grid: Grid3, bx: Vec<f64>, by: Vec<f64>, bz: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        let n = grid.len();
        for (c, arr) in [&bx, &by, &bz].into_iter().enumerate() {
            if arr.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "component {c} has {} values, grid has {n}",
                    arr.len()
                )));
            }
            if let Some(index) = arr.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { component: ["Bx", "By", "Bz"][c].into(), index });
            }
        }
        Ok(Self { grid, bx, by, bz })
    }

    pub fn zeros(grid: Grid3) -> Self {
        let n = grid.len();
        Self {
            grid,
            bx: vec![0.0; n],
            by: vec![0.0; n],
            bz: vec![0.0; n],
        }
    }

    /// Evaluate `f` at every grid node.
    pub fn from_fn(grid: Grid3, f: impl Fn(Vec3) -> Vec3) -> Self {
        let mut field = Self::zeros(grid);
        for k in 0..grid.nz {
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    let idx = grid.index(i, j, k);
                    let b = f(grid.position(i, j, k));
                    field.bx[idx] = b[0];
                    field.by[idx] = b[1];
                    field.bz[idx] = b[2];
                }
            }
        }
        field
    }

    #[inline]
    pub fn at(&self, idx: usize) -> Vec3 {
        [self.bx[idx], self.by[idx], self.bz[idx]]
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| norm3(self.at(i)))
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let f = |v: &Vec<f64>| v.iter().map(|x| x * s).collect();
        Self {
            grid: self.grid,
            bx: f(&self.bx),
            by: f(&self.by),
            bz: f(&self.bz),
        }
    }

    /// Component-wise sum; both fields must share a grid shape.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if !self.grid.same_shape(&other.grid) {
            return Err(Error::ShapeMismatch("fields live on different grids".into()));
        }
        let f = |a: &Vec<f64>, b: &Vec<f64>| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(Self {
            grid: self.grid,
            bx: f(&self.bx, &other.bx),
            by: f(&self.by, &other.by),
            bz: f(&self.bz, &other.bz),
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldHeader {
    format: String,
    version: u32,
    nx: usize,
    ny: usize,
    nz: usize,
    dx: f64,
    dy: f64,
    dz: f64,
    origin: Vec3,
    components: Vec<String>,
}

const FIELD_COMPONENTS: [&str; 3] = ["Bx", "By", "Bz"];

/// Read a WH3D v1 file.
pub fn load_field(path: impl AsRef<Path>) -> Result<VectorField3> {
    let (h, payload): (FieldHeader, _) = header::read(path.as_ref())?;
    header::check_format(&h.format, "WH3D", h.version)?;
    if h.components != FIELD_COMPONENTS {
        return Err(Error::Header(format!(
            "components must be {FIELD_COMPONENTS:?}, got {:?}",
            h.components
        )));
    }
    let grid = Grid3::new(h.nx, h.ny, h.nz, [h.dx, h.dy, h.dz], h.origin)?;
    let n = grid.len();
    header::check_payload(3 * n * 8, payload.len())?;
    let mut values = header::le_to_f64s(&payload);
    let bz = values.split_off(2 * n);
    let by = values.split_off(n);
    VectorField3::new(grid, values, by, bz)
}

/// Write a WH3D v1 file.
pub fn save_field(field: &VectorField3, path: impl AsRef<Path>) -> Result<()> {
    let g = &field.grid;
    let h = FieldHeader {
        format: "WH3D".into(),
        version: 1,
        nx: g.nx,
        ny: g.ny,
        nz: g.nz,
        dx: g.dx,
        dy: g.dy,
        dz: g.dz,
        origin: g.origin,
        components: FIELD_COMPONENTS.iter().map(|s| s.to_string()).collect(),
    };
    let mut payload = Vec::with_capacity(3 * g.len() * 8);
    for comp in [&field.bx, &field.by, &field.bz] {
        header::f64s_to_le(comp, &mut payload);
    }
    header::write(path.as_ref(), &h, &payload)
}

/// Trilinear interpolation of all three components at `p`.
///
/// Exact at nodes and for globally affine fields. Points outside the
/// (inclusive) bounding box return [`Error::OutOfDomain`].
pub fn sample(field: &VectorField3, p: Vec3) -> Result<Vec3> {
    let g = &field.grid;
    if !p.iter().all(|v| v.is_finite()) || !g.contains(p) {
        return Err(Error::OutOfDomain(p));
    }
    let locate = |a: usize, n: usize, d: f64| {
        let t = (p[a] - g.origin[a]) / d;
        let i0 = (t.floor().max(0.0) as usize).min(n - 2);
        (i0, (t - i0 as f64).clamp(0.0, 1.0))
    };
    let (i0, fx) = locate(0, g.nx, g.dx);
    let (j0, fy) = locate(1, g.ny, g.dy);
    let (k0, fz) = locate(2, g.nz, g.dz);

    let mut out = [0.0; 3];
    for (dk, wz) in [(0, 1.0 - fz), (1, fz)] {
        for (dj, wy) in [(0, 1.0 - fy), (1, fy)] {
            for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
                let w = wx * wy * wz;
                if w == 0.0 {
                    continue;
                }
                let idx = g.index(i0 + di, j0 + dj, k0 + dk);
                out[0] += w * field.bx[idx];
                out[1] += w * field.by[idx];
                out[2] += w * field.bz[idx];
            }
        }
    }
    Ok(out)
}

/// Largest dimensionless centered-difference divergence over interior
/// samples.
///
/// At each interior sample the centered divergence is divided by the local
/// flux scale `sum_a (|B_a(+a)| + |B_a(-a)|) / (2 d_a)`, i.e. the magnitude
/// of `B` over the grid spacing. The ratio lies in `[0, 1]`: it is 0 for a
/// perfectly balanced stencil and 1 when every face flux has the same sign.
/// Only samples whose whole 7-point stencil carries field
/// (`|B| > 1e-10 max|B|`) are scored, so the hard edges of compactly
/// supported fields are not mistaken for sources.
///
/// For `B = (x, 0, 0)` on a grid with samples at `x = ±dx/2` the value is 1.
pub fn divergence_max(field: &VectorField3) -> f64 {
    let g = &field.grid;
    let floor = 1e-10 * field.max_norm();
    if floor == 0.0 {
        return 0.0;
    }
    let active = |idx: usize| norm3(field.at(idx)) > floor;
    let mut worst = 0.0_f64;
    for k in 1..g.nz - 1 {
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let c = g.index(i, j, k);
                let xp = g.index(i + 1, j, k);
                let xm = g.index(i - 1, j, k);
                let yp = g.index(i, j + 1, k);
                let ym = g.index(i, j - 1, k);
                let zp = g.index(i, j, k + 1);
                let zm = g.index(i, j, k - 1);
                if ![c, xp, xm, yp, ym, zp, zm].into_iter().all(active) {
                    continue;
                }
                let div = (field.bx[xp] - field.bx[xm]) / (2.0 * g.dx)
                    + (field.by[yp] - field.by[ym]) / (2.0 * g.dy)
                    + (field.bz[zp] - field.bz[zm]) / (2.0 * g.dz);
                let scale = (field.bx[xp].abs() + field.bx[xm].abs()) / (2.0 * g.dx)
                    + (field.by[yp].abs() + field.by[ym].abs()) / (2.0 * g.dy)
                    + (field.bz[zp].abs() + field.bz[zm].abs()) / (2.0 * g.dz);
                if scale > 0.0 {
                    worst = worst.max(div.abs() / scale);
                }
            }
        }
    }
    worst
}

/// One horizontal plane of a field, with slopes `B_perp / B_z` where defined.
#[derive(Debug, Clone)]
pub struct SliceField {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub origin: Vec2,
    pub z: f64,
    pub bx: Vec<f64>,
    pub by: Vec<f64>,
    pub bz: Vec<f64>,
    /// `Some((B_x/B_z, B_y/B_z))` where `|B_z| > eps_bz * max|B_z|`.
    pub slope: Vec<Option<Vec2>>,
}

impl SliceField {
    #[inline]
    pub fn position(&self, idx: usize) -> Vec2 {
        [
            self.origin[0] + (idx % self.nx) as f64 * self.dx,
            self.origin[1] + (idx / self.nx) as f64 * self.dy,
        ]
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

    /// Index of the cell whose footprint contains `p`, if any.
    pub fn cell_of(&self, p: Vec2) -> Option<usize> {
        let i = ((p[0] - self.origin[0]) / self.dx).round();
        let j = ((p[1] - self.origin[1]) / self.dy).round();
        if i < 0.0 || j < 0.0 || i >= self.nx as f64 || j >= self.ny as f64 {
            return None;
        }
        Some(j as usize * self.nx + i as usize)
    }

    /// Number of cells with defined slope.
    pub fn defined_count(&self) -> usize {
        self.slope.iter().filter(|s| s.is_some()).count()
    }
}

/// Extract plane `k` without resampling.
pub fn slice_at(field: &VectorField3, k: usize, eps_bz: f64) -> Result<SliceField> {
    let g = &field.grid;
    if k >= g.nz {
        return Err(Error::InvalidInput(format!("slice {k} out of range 0..{}", g.nz)));
    }
    let n = g.slice_len();
    let range = k * n..(k + 1) * n;
    let bx = field.bx[range.clone()].to_vec();
    let by = field.by[range.clone()].to_vec();
    let bz = field.bz[range].to_vec();
    let bz_max = bz.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cutoff = eps_bz * bz_max;
    let slope = (0..n)
        .map(|c| {
            if bz_max > 0.0 && bz[c].abs() > cutoff {
                Some([bx[c] / bz[c], by[c] / bz[c]])
            } else {
                None
            }
        })
        .collect();
    Ok(SliceField {
        nx: g.nx,
        ny: g.ny,
        dx: g.dx,
        dy: g.dy,
        origin: [g.origin[0], g.origin[1]],
        z: g.z_at(k),
        bx,
        by,
        bz,
        slope,
    })
}
