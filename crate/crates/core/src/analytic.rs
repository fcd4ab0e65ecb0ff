//! Closed-form test fields, curves and planar series with known helicities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldline::Polyline3;
use crate::flux::{PlanarFrame, PlanarSeries, PlaneGrid};
use crate::geom::{norm2, rotate_about, sub2, Vec2, Vec3};
use crate::grid::{Grid3, VectorField3};

/// Sub-cell samples per axis for [`EdgeProfile::CellAverage`].
const SUPERSAMPLE: usize = 32;

/// Treatment of a disk boundary on the sampling grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeProfile {
    /// Indicator of the closed disk at the node.
    #[default]
    Hard,
    /// Raised-cosine ramp one cell wide, centred on the radius.
    Cosine,
    /// Fraction of the node's cell covered by the disk.
    CellAverage,
}

impl EdgeProfile {
    /// Extra reach beyond the radius where the profile is non-zero.
    fn reach(self, cell: Vec2) -> f64 {
        match self {
            EdgeProfile::Hard => 0.0,
            EdgeProfile::Cosine => 0.5 * cell[0].max(cell[1]),
            EdgeProfile::CellAverage => 0.5 * cell[0].hypot(cell[1]),
        }
    }
}

/// Disk weight in `[0, 1]` at node `p`.
pub fn coverage(p: Vec2, center: Vec2, radius: f64, cell: Vec2, profile: EdgeProfile) -> f64 {
    let r = norm2(sub2(p, center));
    match profile {
        EdgeProfile::Hard => {
            if r <= radius {
                1.0
            } else {
                0.0
            }
        }
        EdgeProfile::Cosine => {
            let w = cell[0].max(cell[1]);
            let s = (r - radius) / w + 0.5;
            if s <= 0.0 {
                1.0
            } else if s >= 1.0 {
                0.0
            } else {
                0.5 * (1.0 + (PI * s).cos())
            }
        }
        EdgeProfile::CellAverage => {
            let half_diag = 0.5 * cell[0].hypot(cell[1]);
            if r + half_diag <= radius {
                return 1.0;
            }
            if r - half_diag >= radius {
                return 0.0;
            }
            let n = SUPERSAMPLE;
            let r2 = radius * radius;
            let mut inside = 0usize;
            for a in 0..n {
                let x = p[0] - center[0] + cell[0] * ((a as f64 + 0.5) / n as f64 - 0.5);
                for b in 0..n {
                    let y = p[1] - center[1] + cell[1] * ((b as f64 + 0.5) / n as f64 - 0.5);
                    if x * x + y * y <= r2 {
                        inside += 1;
                    }
                }
            }
            inside as f64 / (n * n) as f64
        }
    }
}

/// `B = (0, 0, b0)` everywhere.
pub fn uniform_vertical(grid: Grid3, b0: f64) -> VectorField3 {
    VectorField3::from_fn(grid, |_| [0.0, 0.0, b0])
}

/// A straight cylindrical flux tube with uniform internal twist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeSpec {
    /// Axis position at the bottom plane.
    pub center: Vec2,
    pub radius: f64,
    /// Axial field strength.
    pub b0: f64,
    /// Rotation rate of field lines about the axis, radians per unit height.
    pub twist: f64,
    #[serde(default)]
    pub profile: EdgeProfile,
}

impl TubeSpec {
    pub fn new(center: Vec2, radius: f64, b0: f64, twist: f64) -> Self {
        Self { center, radius, b0, twist, profile: EdgeProfile::Hard }
    }

    /// Tube of unit flux.
    pub fn unit_flux(center: Vec2, twist: f64) -> Self {
        Self::new(center, 1.0 / PI.sqrt(), 1.0, twist)
    }

    pub fn with_profile(mut self, profile: EdgeProfile) -> Self {
        self.profile = profile;
        self
    }

    /// `b0 * pi * R^2`.
    pub fn flux(&self) -> f64 {
        self.b0 * PI * self.radius * self.radius
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidInput(format!("tube radius must be positive, got {}", self.radius)));
        }
        if !(self.b0.is_finite() && self.twist.is_finite()) {
            return Err(Error::InvalidInput("tube field and twist must be finite".into()));
        }
        Ok(())
    }
}

/// Disk of radius `reach` about `center` must sit inside the footprint with
/// one cell to spare.
fn check_footprint(grid: &Grid3, center: Vec2, reach: f64) -> Result<()> {
    let hi = grid.upper();
    let ok = center[0] - reach - grid.dx >= grid.origin[0] - 1e-12 * grid.dx
        && center[0] + reach + grid.dx <= hi[0] + 1e-12 * grid.dx
        && center[1] - reach - grid.dy >= grid.origin[1] - 1e-12 * grid.dy
        && center[1] + reach + grid.dy <= hi[1] + 1e-12 * grid.dy;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "tube of reach {reach} about {center:?} does not fit inside the grid footprint"
        )))
    }
}

/// Rigid-rotor tube: `B = f (-tau (y - yc) b0, tau (x - xc) b0, b0)`.
pub fn twisted_tube(grid: Grid3, spec: &TubeSpec) -> Result<VectorField3> {
    spec.validate()?;
    let cell = [grid.dx, grid.dy];
    check_footprint(&grid, spec.center, spec.radius + spec.profile.reach(cell))?;
    let s = *spec;
    Ok(VectorField3::from_fn(grid, move |p| {
        let f = coverage([p[0], p[1]], s.center, s.radius, cell, s.profile);
        if f == 0.0 {
            return [0.0; 3];
        }
        let b = f * s.b0;
        [-s.twist * (p[1] - s.center[1]) * b, s.twist * (p[0] - s.center[0]) * b, b]
    }))
}

/// Two tubes whose axes co-rotate `turns` times about their midpoint between
/// the bottom and top planes.
///
/// Tube cross-sections translate without spinning, so the only internal
/// twist is the one set in each [`TubeSpec`].
pub fn double_helix_pair(grid: Grid3, a: &TubeSpec, b: &TubeSpec, turns: f64) -> Result<VectorField3> {
    a.validate()?;
    b.validate()?;
    if !turns.is_finite() {
        return Err(Error::InvalidInput("turn count must be finite".into()));
    }
    let cell = [grid.dx, grid.dy];
    let pivot = [0.5 * (a.center[0] + b.center[0]), 0.5 * (a.center[1] + b.center[1])];
    let (ra, rb) = (a.radius + a.profile.reach(cell), b.radius + b.profile.reach(cell));
    if norm2(sub2(a.center, b.center)) <= ra + rb {
        return Err(Error::InvalidInput("tubes overlap".into()));
    }
    check_footprint(&grid, pivot, norm2(sub2(a.center, pivot)) + ra)?;
    check_footprint(&grid, pivot, norm2(sub2(b.center, pivot)) + rb)?;
    let rate = 2.0 * PI * turns / grid.height();
    let z0 = grid.origin[2];
    let (a, b) = (*a, *b);
    Ok(VectorField3::from_fn(grid, move |p| {
        let phi = rate * (p[2] - z0);
        let mut out = [0.0; 3];
        for t in [&a, &b] {
            let c = rotate_about(t.center, pivot, phi);
            let f = coverage([p[0], p[1]], c, t.radius, cell, t.profile);
            if f == 0.0 {
                continue;
            }
            let bz = f * t.b0;
            // axis velocity dc/dz plus internal rigid rotation
            let (dx, dy) = (c[0] - pivot[0], c[1] - pivot[1]);
            let (rx, ry) = (p[0] - c[0], p[1] - c[1]);
            out[0] += bz * (-rate * dy - t.twist * ry);
            out[1] += bz * (rate * dx + t.twist * rx);
            out[2] += bz;
        }
        out
    }))
}

/// One semicircular arch tube on the bottom plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchSpec {
    pub footpoint_pos: Vec2,
    pub footpoint_neg: Vec2,
    /// Apex height; half the footpoint separation when absent.
    pub apex_height: Option<f64>,
    pub flux: f64,
}

impl ArchSpec {
    pub fn new(footpoint_pos: Vec2, footpoint_neg: Vec2, flux: f64) -> Self {
        Self { footpoint_pos, footpoint_neg, apex_height: None, flux }
    }

    pub fn height(&self) -> f64 {
        self.apex_height
            .unwrap_or_else(|| 0.5 * norm2(sub2(self.footpoint_neg, self.footpoint_pos)))
    }

    /// The arch axis from the positive to the negative footpoint.
    pub fn curve(&self, samples: usize) -> Result<Polyline3> {
        if samples < 16 {
            return Err(Error::InvalidInput(format!("arch needs at least 16 samples, got {samples}")));
        }
        if self.footpoint_pos == self.footpoint_neg {
            return Err(Error::InvalidInput("arch footpoints coincide".into()));
        }
        let h = self.height();
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput("arch apex height must be positive".into()));
        }
        let (p, q) = (self.footpoint_pos, self.footpoint_neg);
        let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        let u = sub2(p, mid);
        let last = samples - 1;
        let v = (0..samples)
            .map(|k| {
                if k == 0 {
                    return [p[0], p[1], 0.0];
                }
                if k == last {
                    return [q[0], q[1], 0.0];
                }
                let t = PI * k as f64 / last as f64;
                let c = t.cos();
                [mid[0] + u[0] * c, mid[1] + u[1] * c, h * t.sin()]
            })
            .collect();
        Polyline3::new(v)
    }
}

/// Axes of two arches, each running from its positive footpoint to its
/// negative one.
pub fn arch_pair_curves(a: &ArchSpec, b: &ArchSpec, samples: usize) -> Result<(Polyline3, Polyline3)> {
    Ok((a.curve(samples)?, b.curve(samples)?))
}

/// Azimuthal twist of a dome, `phi(rho) = amplitude * exp(-rho^2 / width^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomeTwist {
    pub amplitude: f64,
    pub width: f64,
}

impl DomeTwist {
    /// Footpoint rotation angle at horizontal distance `rho` from the axis.
    pub fn angle(&self, rho: f64) -> f64 {
        self.amplitude * (-(rho * rho) / (self.width * self.width)).exp()
    }
}

/// A buried point sink of strength `strength < 0` at depth `depth` below
/// the bottom plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dome {
    pub position: Vec2,
    pub depth: f64,
    pub strength: f64,
    #[serde(default)]
    pub twist: Option<DomeTwist>,
}

/// Vertical background field plus buried point sinks.
///
/// Each sink with `strength < -background * depth^2` caps a dome of
/// closed field lines under a null at height
/// `sqrt(-strength / background) - depth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomeField {
    pub background: f64,
    pub domes: Vec<Dome>,
}

impl DomeField {
    pub fn single(background: f64, strength: f64, depth: f64) -> Self {
        Self {
            background,
            domes: vec![Dome { position: [0.0, 0.0], depth, strength, twist: None }],
        }
    }

    /// Three equal domes at 120 degree spacing on a circle.
    pub fn three(background: f64, strength: f64, depth: f64, ring: f64) -> Self {
        let domes = (0..3)
            .map(|k| {
                let a = PI / 2.0 + 2.0 * PI * k as f64 / 3.0;
                Dome { position: [ring * a.cos(), ring * a.sin()], depth, strength, twist: None }
            })
            .collect();
        Self { background, domes }
    }

    pub fn with_twist(mut self, twist: Option<DomeTwist>) -> Self {
        for d in &mut self.domes {
            d.twist = twist;
        }
        self
    }

    /// Height of the null above sink `k`, if it caps a dome.
    pub fn null_height(&self, k: usize) -> Option<f64> {
        let d = self.domes.get(k)?;
        let z = (-d.strength / self.background).sqrt() - d.depth;
        (z > 0.0).then_some(z)
    }

    pub fn eval(&self, p: Vec3) -> Vec3 {
        let mut b = [0.0, 0.0, self.background];
        for d in &self.domes {
            let r = [p[0] - d.position[0], p[1] - d.position[1], p[2] + d.depth];
            let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
            let s = d.strength / (r2 * r2.sqrt());
            b[0] += s * r[0];
            b[1] += s * r[1];
            b[2] += s * r[2];
            if let Some(t) = d.twist {
                // B_phi = rho * B_rho * dphi/drho from this dome's own
                // axisymmetric field; divergence-free for any profile
                let rho2 = r[0] * r[0] + r[1] * r[1];
                let w2 = t.width * t.width;
                let dphi_over_rho = -2.0 * t.amplitude / w2 * (-rho2 / w2).exp();
                let b_rho_over_rho = s;
                let g = rho2 * b_rho_over_rho * dphi_over_rho;
                b[0] -= g * r[1];
                b[1] += g * r[0];
            }
        }
        b
    }
}

pub fn dome_field(grid: Grid3, spec: &DomeField) -> Result<VectorField3> {
    if spec.domes.iter().any(|d| !(d.depth > 0.0)) {
        return Err(Error::InvalidInput("sinks must lie below the bottom plane".into()));
    }
    if grid.origin[2] < 0.0 {
        return Err(Error::InvalidInput("dome grids must start at or above z = 0".into()));
    }
    Ok(VectorField3::from_fn(grid, |p| spec.eval(p)))
}

/// Radial profile of a planar flux patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatchProfile {
    /// Uniform `B_z` over the disk.
    TopHat(EdgeProfile),
    /// `B_z` proportional to `exp(-r^2 / radius^2)`.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    /// Centre at `t = 0`.
    pub center: Vec2,
    pub flux: f64,
    pub radius: f64,
}

/// Flux patches on a plane rotating rigidly about `pivot` at rate `omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatingPatches {
    pub plane: PlaneGrid,
    pub patches: Vec<Patch>,
    pub pivot: Vec2,
    pub omega: f64,
    pub profile: PatchProfile,
}

impl RotatingPatches {
    pub fn new(
        plane: PlaneGrid,
        patches: Vec<Patch>,
        pivot: Vec2,
        omega: f64,
        profile: PatchProfile,
    ) -> Result<Self> {
        let cell = [plane.dx, plane.dy];
        let reach = |p: &Patch| match profile {
            PatchProfile::TopHat(e) => p.radius + e.reach(cell),
            PatchProfile::Gaussian => p.radius,
        };
        for (i, p) in patches.iter().enumerate() {
            if !(p.radius > 0.0) {
                return Err(Error::InvalidInput("patch radius must be positive".into()));
            }
            for q in &patches[i + 1..] {
                if norm2(sub2(p.center, q.center)) <= reach(p) + reach(q) {
                    return Err(Error::InvalidInput("patches overlap".into()));
                }
            }
        }
        Ok(Self { plane, patches, pivot, omega, profile })
    }

    pub fn center_at(&self, k: usize, t: f64) -> Vec2 {
        rotate_about(self.patches[k].center, self.pivot, self.omega * t)
    }

    fn patch_value(&self, k: usize, p: Vec2, t: f64) -> f64 {
        let patch = &self.patches[k];
        let c = self.center_at(k, t);
        let amp = patch.flux / (PI * patch.radius * patch.radius);
        match self.profile {
            PatchProfile::TopHat(e) => {
                amp * coverage(p, c, patch.radius, [self.plane.dx, self.plane.dy], e)
            }
            PatchProfile::Gaussian => {
                let r = sub2(p, c);
                amp * (-(r[0] * r[0] + r[1] * r[1]) / (patch.radius * patch.radius)).exp()
            }
        }
    }

    pub fn bz_map(&self, t: f64) -> Vec<f64> {
        (0..self.plane.len())
            .map(|c| {
                let p = self.plane.position(c);
                (0..self.patches.len()).map(|k| self.patch_value(k, p, t)).sum()
            })
            .collect()
    }

    /// Rigid-rotation velocity.
    pub fn velocity(&self, p: Vec2) -> Vec2 {
        [-self.omega * (p[1] - self.pivot[1]), self.omega * (p[0] - self.pivot[0])]
    }

    /// Index of the patch covering each cell, or -1.
    pub fn labels(&self, t: f64) -> Vec<i32> {
        (0..self.plane.len())
            .map(|c| {
                let p = self.plane.position(c);
                (0..self.patches.len())
                    .find(|&k| self.patch_value(k, p, t) != 0.0)
                    .map_or(-1, |k| k as i32)
            })
            .collect()
    }

    pub fn frame(&self, t: f64) -> PlanarFrame {
        let bz = self.bz_map(t);
        let w = (0..self.plane.len())
            .map(|c| (bz[c] != 0.0).then(|| self.velocity(self.plane.position(c))))
            .collect();
        PlanarFrame { bz, w }
    }

    /// Plane maps of velocity `u` and field `B` at time `t`; `B` is vertical.
    pub fn plane_fields(&self, t: f64) -> (Vec<Vec3>, Vec<Vec3>) {
        let bz = self.bz_map(t);
        let u = (0..self.plane.len())
            .map(|c| {
                let v = self.velocity(self.plane.position(c));
                [v[0], v[1], 0.0]
            })
            .collect();
        let b = bz.into_iter().map(|z| [0.0, 0.0, z]).collect();
        (u, b)
    }

    /// Frames at `t_k = duration * k / steps`, with patch labels.
    pub fn series(&self, duration: f64, steps: usize) -> Result<PlanarSeries> {
        if steps == 0 || !(duration > 0.0) {
            return Err(Error::InvalidInput("series needs positive duration and steps".into()));
        }
        let times: Vec<f64> = (0..=steps).map(|k| duration * k as f64 / steps as f64).collect();
        let frames = times.iter().map(|&t| self.frame(t)).collect();
        let labels = times.iter().map(|&t| self.labels(t)).collect();
        PlanarSeries::new(self.plane, times, frames, Some(labels))
    }
}

/// Two top-hat patches of radius `0.3 d`, a distance `d` apart, rotating
/// about their midpoint at the plane centre.
#[allow(clippy::too_many_arguments)]
pub fn rotating_patch_series(
    flux_i: f64,
    flux_j: f64,
    separation: f64,
    omega: f64,
    duration: f64,
    steps: usize,
    plane: PlaneGrid,
    edge: EdgeProfile,
) -> Result<PlanarSeries> {
    if !(separation > 0.0) {
        return Err(Error::InvalidInput("patch separation must be positive".into()));
    }
    let pivot = plane.center();
    let radius = 0.3 * separation;
    let patches = vec![
        Patch { center: [pivot[0] - 0.5 * separation, pivot[1]], flux: flux_i, radius },
        Patch { center: [pivot[0] + 0.5 * separation, pivot[1]], flux: flux_j, radius },
    ];
    RotatingPatches::new(plane, patches, pivot, omega, PatchProfile::TopHat(edge))?
        .series(duration, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::divergence_max;

    fn box_grid(n: usize, half: f64, h: f64) -> Grid3 {
        Grid3::spanning([n, n, n], [-half, -half, 0.0], [half, half, h]).unwrap()
    }

    #[test]
    fn uniform_field_values() {
        let f = uniform_vertical(box_grid(3, 1.0, 1.0), -3.0);
        assert!(f.bz.iter().all(|&v| v == -3.0));
        assert!(f.bx.iter().chain(&f.by).all(|&v| v == 0.0));
    }

    #[test]
    fn cell_average_flux_is_close_to_exact() {
        let g = box_grid(65, 0.7, 1.0);
        let spec = TubeSpec::unit_flux([0.0, 0.0], 0.0).with_profile(EdgeProfile::CellAverage);
        let f = twisted_tube(g, &spec).unwrap();
        let phi: f64 = f.bz[..g.slice_len()].iter().sum::<f64>() * g.cell_area();
        assert!((phi - 1.0).abs() < 1e-4, "{phi}");
    }

    #[test]
    fn tube_must_fit() {
        let g = box_grid(9, 0.5, 1.0);
        assert!(twisted_tube(g, &TubeSpec::new([0.0, 0.0], 0.5, 1.0, 0.0)).is_err());
        assert!(twisted_tube(g, &TubeSpec::new([0.0, 0.0], 0.3, 1.0, 0.0)).is_ok());
    }

    #[test]
    fn tube_field_is_rigid_rotation() {
        let g = box_grid(9, 1.0, 1.0);
        let f = twisted_tube(g, &TubeSpec::new([0.0, 0.0], 0.6, 2.0, 3.0)).unwrap();
        let i = g.index(5, 4, 2);
        let p = g.position(5, 4, 2);
        assert_eq!(f.at(i), [-3.0 * p[1] * 2.0, 3.0 * p[0] * 2.0, 2.0]);
    }

    #[test]
    fn helix_axes_complete_the_turns() {
        let g = box_grid(33, 1.4, 1.0);
        let a = TubeSpec::new([-0.75, 0.0], 0.4, 1.0, 0.0);
        let b = TubeSpec::new([0.75, 0.0], 0.4, 1.0, 0.0);
        let f = double_helix_pair(g, &a, &b, 1.0).unwrap();
        let top = g.index(6, 16, 32);
        assert!(f.bz[top] > 0.0);
        assert!(double_helix_pair(g, &a, &TubeSpec::new([0.0, 0.0], 0.4, 1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn twisted_dome_divergence_converges() {
        let spec = DomeField::single(1.0, -0.3, 0.3)
            .with_twist(Some(DomeTwist { amplitude: 1.0, width: 0.4 }));
        let div = |n| divergence_max(&dome_field(box_grid(n, 0.6, 0.5), &spec).unwrap());
        let (coarse, fine) = (div(17), div(33));
        assert!(fine < 1e-2, "{fine}");
        assert!((coarse / fine).log2() > 1.8, "{coarse} {fine}");
    }

    #[test]
    fn dome_null_height() {
        let d = DomeField::single(1.0, -0.3, 0.3);
        let z = d.null_height(0).unwrap();
        let b = d.eval([0.0, 0.0, z]);
        assert!(b.iter().all(|v| v.abs() < 1e-12), "{b:?}");
        assert!(DomeField::single(1.0, -0.01, 0.3).null_height(0).is_none());
    }

    #[test]
    fn arch_geometry() {
        let a = ArchSpec::new([0.0, 0.0], [2.0, 0.0], 1.0);
        let c = a.curve(17).unwrap();
        assert_eq!(c.first(), [0.0, 0.0, 0.0]);
        assert_eq!(c.last(), [2.0, 0.0, 0.0]);
        let apex = c.vertices()[8];
        assert!((apex[0] - 1.0).abs() < 1e-15 && (apex[2] - 1.0).abs() < 1e-15);
        let fine = a.curve(4096).unwrap();
        assert_eq!((fine.first(), fine.last()), (c.first(), c.last()));
        assert!(1.0 - fine.max_z() < PI / 4095.0);
        assert!(a.curve(15).is_err());
    }

    #[test]
    fn patch_series_labels_and_velocity() {
        let plane = PlaneGrid::spanning([33, 33], [-1.0, -1.0], [1.0, 1.0]).unwrap();
        let s = rotating_patch_series(1.0, -1.0, 1.0, 2.0 * PI, 1.0, 4, plane, EdgeProfile::Hard)
            .unwrap();
        assert_eq!(s.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let labels = s.labels.as_ref().unwrap();
        assert!(labels[0].contains(&0) && labels[0].contains(&1));
        for (c, w) in s.frames[0].w.iter().enumerate() {
            assert_eq!(w.is_some(), s.frames[0].bz[c] != 0.0);
        }
        assert!(rotating_patch_series(1.0, 1.0, 0.1, 1.0, 1.0, 2, plane, EdgeProfile::Cosine).is_err());
    }
}
