//! Pairwise winding of curves, with and without turning points.
//!
//! Angles are measured for the horizontal vector `x - y`, `x` on the first
//! curve and `y` on the second, at equal height. For curves with turning
//! points each pair of z-monotone segments contributes its sweep over the
//! common z-range weighted by the product of the two orientations. Where a
//! curve leaves a segment's slab through one boundary plane and comes back
//! through the same plane, the horizontal chord closing that excursion is
//! added as a jump term; for complete curves these terms cancel in pairs,
//! and for curves that end inside the other's slab they supply the
//! endpoint jump.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fieldline::{partition_monotone, MonotoneSegment, Polyline3};
use crate::geom::{Vec2, Vec3};
use crate::sum::exact_sum;

/// A polar angle in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct AngleValue(f64);

impl AngleValue {
    pub fn from_vector(v: Vec2) -> Result<Self> {
        if v[0] == 0.0 && v[1] == 0.0 {
            return Err(Error::CoincidentPoints(
                "angle of a zero horizontal separation".into(),
            ));
        }
        let a = v[1].atan2(v[0]);
        Ok(AngleValue(if a == -PI { PI } else { a }))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Principal representative of an angle difference, in `(-pi, pi]`.
pub fn wrap_angle(d: f64) -> f64 {
    let mut w = d - 2.0 * PI * (d / (2.0 * PI)).round();
    if w <= -PI {
        w += 2.0 * PI;
    } else if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Polar angle of the horizontal projection of `x - y`.
pub fn polar_angle(x: Vec3, y: Vec3) -> Result<AngleValue> {
    AngleValue::from_vector([x[0] - y[0], x[1] - y[1]]).map_err(|_| {
        Error::CoincidentPoints(format!("points {x:?} and {y:?} share a vertical line"))
    })
}

/// Continuous unwrapping of a sampled angle series.
///
/// Consecutive samples must differ by less than `pi` modulo `2 pi`.
pub fn unwrap(series: &[AngleValue]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(series.len());
    let Some(first) = series.first() else {
        return Ok(out);
    };
    out.push(first.0);
    for (i, w) in series.windows(2).enumerate() {
        let d = wrap_angle(w[1].0 - w[0].0);
        if d.abs() >= PI {
            return Err(Error::Undersampled { index: i + 1, jump: d });
        }
        let prev = out[i];
        out.push(prev + d);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingOptions {
    /// Sub-sample an interval when its principal sweep exceeds this.
    pub max_step: f64,
    /// Sub-stations per refinement.
    pub refine: usize,
    /// Refinement depth limit.
    pub max_depth: usize,
}

impl Default for WindingOptions {
    fn default() -> Self {
        Self { max_step: PI / 2.0, refine: 8, max_depth: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ContributionKind {
    /// Overlap of segment `first` of curve 1 with segment `second` of curve 2.
    Pair { first: usize, second: usize },
    /// Chord of `curve` (1 or 2) across the slab boundary `height` of the
    /// other curve's `segment`.
    Jump { curve: u8, segment: usize, height: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contribution {
    pub kind: ContributionKind,
    pub sigma_product: i8,
    /// Unweighted sweep in radians.
    pub angle: f64,
    /// `sigma_product * angle`.
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindingResult {
    /// Winding number `L`.
    pub value: f64,
    /// `2 pi L` is the exact sum of the `weighted` fields.
    pub contributions: Vec<Contribution>,
}

impl WindingResult {
    fn from_contributions(contributions: Vec<Contribution>) -> Self {
        let value = exact_sum(contributions.iter().map(|c| c.weighted)) / (2.0 * PI);
        Self { value, contributions }
    }

    /// Nearest whole number of turns.
    pub fn full_turns(&self) -> i64 {
        self.value.round() as i64
    }
}

/// One monotone segment with its vertices ordered by increasing z.
struct Piece<'a> {
    seg: MonotoneSegment,
    verts: &'a [Vec3],
    lo: f64,
    hi: f64,
}

impl<'a> Piece<'a> {
    fn new(curve: &'a Polyline3, seg: MonotoneSegment) -> Self {
        let verts = &curve.vertices()[seg.start..=seg.end];
        let (lo, hi) = if seg.sigma >= 0 {
            (verts[0][2], verts[verts.len() - 1][2])
        } else {
            (verts[verts.len() - 1][2], verts[0][2])
        };
        Self { seg, verts, lo, hi }
    }

    fn sigma(&self) -> i8 {
        self.seg.sigma
    }

    /// Vertex at ascending position `k`.
    fn vertex(&self, k: usize) -> Vec3 {
        if self.seg.sigma >= 0 {
            self.verts[k]
        } else {
            self.verts[self.verts.len() - 1 - k]
        }
    }

    /// Position at height `z` in `[lo, hi]` by linear interpolation.
    fn at(&self, z: f64) -> Vec3 {
        let n = self.verts.len();
        // first ascending vertex with height >= z
        let (mut a, mut b) = (0usize, n - 1);
        if z <= self.vertex(0)[2] {
            return self.vertex(0);
        }
        if z >= self.vertex(n - 1)[2] {
            return self.vertex(n - 1);
        }
        while b - a > 1 {
            let m = (a + b) / 2;
            if self.vertex(m)[2] < z {
                a = m;
            } else {
                b = m;
            }
        }
        let (p, q) = (self.vertex(a), self.vertex(b));
        let t = (z - p[2]) / (q[2] - p[2]);
        [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), z]
    }

    fn heights_within(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        out.extend(self.verts.iter().map(|v| v[2]).filter(|&z| z > lo && z < hi));
    }
}

fn pieces(curve: &Polyline3) -> Vec<Piece<'_>> {
    partition_monotone(curve).into_iter().map(|s| Piece::new(curve, s)).collect()
}

/// Sweep of `theta(a(z) - b(z))` from `lo` to `hi`.
fn sweep(a: &Piece, b: &Piece, lo: f64, hi: f64, opts: &WindingOptions) -> Result<f64> {
    let mut stations = vec![lo, hi];
    a.heights_within(lo, hi, &mut stations);
    b.heights_within(lo, hi, &mut stations);
    stations.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    stations.dedup();

    let angle = |z: f64| polar_angle(a.at(z), b.at(z));
    let mut series = Vec::with_capacity(stations.len());
    series.push(angle(stations[0])?);
    for w in stations.windows(2) {
        refine_into(&angle, w[0], w[1], *series.last().unwrap(), opts, 0, &mut series)?;
    }
    let u = unwrap(&series)?;
    Ok(u[u.len() - 1] - u[0])
}

/// Append samples on `(z0, z1]`, subdividing intervals with large sweep.
fn refine_into(
    angle: &dyn Fn(f64) -> Result<AngleValue>,
    z0: f64,
    z1: f64,
    a0: AngleValue,
    opts: &WindingOptions,
    depth: usize,
    out: &mut Vec<AngleValue>,
) -> Result<()> {
    let a1 = angle(z1)?;
    let d = wrap_angle(a1.0 - a0.0).abs();
    if d <= opts.max_step || depth >= opts.max_depth || opts.refine < 2 {
        out.push(a1);
        return Ok(());
    }
    let n = opts.refine;
    let (mut prev_z, mut prev) = (z0, a0);
    for k in 1..=n {
        let z = if k == n { z1 } else { z0 + (z1 - z0) * k as f64 / n as f64 };
        refine_into(angle, prev_z, z, prev, opts, depth + 1, out)?;
        prev = out[out.len() - 1];
        prev_z = z;
    }
    Ok(())
}

struct Crossing {
    entry_z: f64,
    entry: Vec3,
    exit_z: f64,
    exit: Vec3,
}

/// In-slab parts of `curve` for the slab `[a, b]`, in traversal order.
fn crossings(curve: &[Piece], a: f64, b: f64) -> Vec<Crossing> {
    let mut out = Vec::new();
    for p in curve {
        if p.sigma() == 0 {
            continue;
        }
        let (lo, hi) = (a.max(p.lo), b.min(p.hi));
        if lo >= hi {
            continue;
        }
        let (ez, xz) = if p.sigma() > 0 { (lo, hi) } else { (hi, lo) };
        out.push(Crossing { entry_z: ez, entry: p.at(ez), exit_z: xz, exit: p.at(xz) });
    }
    out
}

/// Chord terms of `moving` around each segment of `fixed`.
///
/// `moving_is_first` selects the sign convention of `x - y`.
fn jump_terms(
    fixed: &[Piece],
    moving: &[Piece],
    moving_is_first: bool,
    out: &mut Vec<Contribution>,
) -> Result<()> {
    for (si, s) in fixed.iter().enumerate() {
        if s.sigma() == 0 {
            continue;
        }
        let cs = crossings(moving, s.lo, s.hi);
        for w in cs.windows(2) {
            let (p, q) = (&w[0], &w[1]);
            if p.exit_z != q.entry_z || p.exit == q.entry {
                continue;
            }
            if p.exit_z != s.lo && p.exit_z != s.hi {
                continue;
            }
            let z = p.exit_z;
            let c = s.at(z);
            let (t0, t1) = if moving_is_first {
                (polar_angle(p.exit, c)?, polar_angle(q.entry, c)?)
            } else {
                (polar_angle(c, p.exit)?, polar_angle(c, q.entry)?)
            };
            let d = wrap_angle(t1.0 - t0.0);
            if d.abs() >= PI {
                return Err(Error::CoincidentPoints(format!(
                    "chord at height {z} passes through the other curve"
                )));
            }
            let sigma = s.sigma();
            out.push(Contribution {
                kind: ContributionKind::Jump {
                    curve: if moving_is_first { 1 } else { 2 },
                    segment: si,
                    height: z,
                },
                sigma_product: sigma,
                angle: d,
                weighted: sigma as f64 * d,
            });
        }
    }
    Ok(())
}

/// Smallest gap between distinct vertex heights of two curves.
fn height_gap(c1: &Polyline3, c2: &Polyline3) -> Option<(f64, f64)> {
    let mut z: Vec<f64> = c1.vertices().iter().chain(c2.vertices()).map(|v| v[2]).collect();
    z.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    z.dedup();
    let gap = z.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let top = z.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    gap.is_finite().then_some((gap, top))
}

/// Tilt every run of level edges by `delta` so that it continues the
/// neighbouring monotone piece. The curve's first and last vertices stay
/// put.
fn tilt_level_runs(curve: &Polyline3, delta: f64) -> Option<Polyline3> {
    let v = curve.vertices();
    let dz: Vec<f64> = v.windows(2).map(|w| w[1][2] - w[0][2]).collect();
    if !dz.contains(&0.0) {
        return None;
    }
    let mut out = v.to_vec();
    let mut e = 0;
    while e < dz.len() {
        if dz[e] != 0.0 {
            e += 1;
            continue;
        }
        let a = e;
        while e < dz.len() && dz[e] == 0.0 {
            e += 1;
        }
        // level edges a..e join vertices a..=e
        let prev = (a > 0).then(|| dz[a - 1].signum());
        let next = (e < dz.len()).then(|| dz[e].signum());
        let Some(d) = prev.or(next) else { continue };
        let z = v[a][2];
        let m = (e - a) as f64;
        for k in a..=e {
            let f = (k - a) as f64 / m;
            out[k][2] = if e == dz.len() { z - d * delta * (1.0 - f) } else { z + d * delta * f };
        }
    }
    Polyline3::new(out).ok()
}

fn lexicographic(a: &Polyline3, b: &Polyline3) -> Ordering {
    for (u, v) in a.vertices().iter().zip(b.vertices()) {
        for k in 0..3 {
            match u[k].partial_cmp(&v[k]) {
                Some(Ordering::Equal) | None => {}
                Some(o) => return o,
            }
        }
    }
    a.len().cmp(&b.len())
}

/// Winding number of two arbitrary polylines.
///
/// Symmetric in its arguments, odd under reversal of either curve and
/// unchanged by inserting vertices along an edge. Identical or
/// intersecting curves are rejected.
pub fn winding_general(c1: &Polyline3, c2: &Polyline3, opts: &WindingOptions) -> Result<WindingResult> {
    if lexicographic(c1, c2) == Ordering::Greater {
        return winding_general(c2, c1, opts);
    }
    if c1 == c2 {
        return Err(Error::CoincidentPoints("the two curves are identical".into()));
    }
    // level edges are tilted far below any height gap; the winding is
    // unchanged and every piece is strictly monotone
    let (t1, t2) = match height_gap(c1, c2) {
        Some((gap, top)) => {
            let delta = (1e-6 * gap).min(0.25 * gap).max(8.0 * f64::EPSILON * top);
            (tilt_level_runs(c1, delta), tilt_level_runs(c2, delta))
        }
        None => (None, None),
    };
    let (c1, c2) = (t1.as_ref().unwrap_or(c1), t2.as_ref().unwrap_or(c2));
    let p1 = pieces(c1);
    let p2 = pieces(c2);
    let mut contributions = Vec::new();
    for (i, a) in p1.iter().enumerate() {
        if a.sigma() == 0 {
            continue;
        }
        for (j, b) in p2.iter().enumerate() {
            if b.sigma() == 0 {
                continue;
            }
            let (lo, hi) = (a.lo.max(b.lo), a.hi.min(b.hi));
            if lo >= hi {
                continue;
            }
            let angle = sweep(a, b, lo, hi, opts)?;
            let sp = a.sigma() * b.sigma();
            contributions.push(Contribution {
                kind: ContributionKind::Pair { first: i, second: j },
                sigma_product: sp,
                angle,
                weighted: sp as f64 * angle,
            });
        }
    }
    jump_terms(&p1, &p2, false, &mut contributions)?;
    jump_terms(&p2, &p1, true, &mut contributions)?;
    Ok(WindingResult::from_contributions(contributions))
}

/// Winding of two curves that are each strictly monotone in z.
///
/// Both curves are taken bottom to top; the result is the net rotation over
/// their common z-range.
pub fn winding_monotone(c1: &Polyline3, c2: &Polyline3, opts: &WindingOptions) -> Result<WindingResult> {
    let single = |c: &Polyline3| -> Result<Polyline3> {
        let segs = partition_monotone(c);
        match segs.as_slice() {
            [s] if s.sigma > 0 => Ok(c.clone()),
            [s] if s.sigma < 0 => Ok(c.reversed()),
            _ => Err(Error::Regime("curve is not strictly monotone in z".into())),
        }
    };
    let (a, b) = (single(c1)?, single(c2)?);
    let (pa, pb) = (pieces(&a), pieces(&b));
    let (lo, hi) = (pa[0].lo.max(pb[0].lo), pa[0].hi.min(pb[0].hi));
    let mut contributions = Vec::new();
    if lo < hi {
        let angle = sweep(&pa[0], &pb[0], lo, hi, opts)?;
        contributions.push(Contribution {
            kind: ContributionKind::Pair { first: 0, second: 0 },
            sigma_product: 1,
            angle,
            weighted: angle,
        });
    }
    Ok(WindingResult::from_contributions(contributions))
}

/// Winding of `curve` with the vertical segment over `footpoint` from
/// `z = 0` to `height`, oriented upward for `sigma > 0`.
pub fn footpoint_winding(
    curve: &Polyline3,
    footpoint: Vec2,
    height: f64,
    sigma: i8,
    opts: &WindingOptions,
) -> Result<WindingResult> {
    if !(height > 0.0) || sigma == 0 {
        return Err(Error::InvalidInput("footpoint segment needs positive height and sigma".into()));
    }
    let lo = [footpoint[0], footpoint[1], 0.0];
    let hi = [footpoint[0], footpoint[1], height];
    let v = if sigma > 0 { vec![lo, hi] } else { vec![hi, lo] };
    winding_general(&Polyline3::new(v)?, curve, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn helix(center: Vec2, r: f64, turns: f64, h: f64, n: usize, phase: f64) -> Polyline3 {
        Polyline3::new(
            (0..=n)
                .map(|k| {
                    let s = k as f64 / n as f64;
                    let a = phase + 2.0 * PI * turns * s;
                    [center[0] + r * a.cos(), center[1] + r * a.sin(), h * s]
                })
                .collect(),
        )
        .unwrap()
    }

    fn vertical(p: Vec2, z0: f64, z1: f64) -> Polyline3 {
        Polyline3::new(vec![[p[0], p[1], z0], [p[0], p[1], z1]]).unwrap()
    }

    #[test]
    fn unwrap_examples() {
        let a = |v: f64| AngleValue(v);
        let u = unwrap(&[a(0.0), a(PI / 2.0), a(PI), a(-PI / 2.0)]).unwrap();
        assert_eq!(u, vec![0.0, PI / 2.0, PI, 3.0 * PI / 2.0]);
        assert!(matches!(unwrap(&[a(0.0), a(PI)]), Err(Error::Undersampled { .. })));
    }

    #[test]
    fn angle_range_is_half_open() {
        assert_eq!(AngleValue::from_vector([-1.0, -0.0]).unwrap().radians(), PI);
        assert_eq!(AngleValue::from_vector([-1.0, 0.0]).unwrap().radians(), PI);
        assert!(polar_angle([1.0, 2.0, 0.0], [1.0, 2.0, 5.0]).is_err());
    }

    #[test]
    fn helix_around_axis_winds_its_turn_count() {
        let o = WindingOptions::default();
        let h = helix([0.0, 0.0], 1.0, 3.0, 2.0, 64, 0.0);
        let axis = vertical([0.0, 0.0], 0.0, 2.0);
        let l = winding_monotone(&h, &axis, &o).unwrap().value;
        assert!((l - 3.0).abs() < 1e-12, "{l}");
        let g = winding_general(&h, &axis, &o).unwrap().value;
        assert!((g - 3.0).abs() < 1e-12, "{g}");
        assert_eq!(winding_general(&h, &axis, &o).unwrap().full_turns(), 3);
    }

    #[test]
    fn reversal_of_both_curves_is_invariant_and_one_flips_sign() {
        let o = WindingOptions::default();
        let h = helix([0.0, 0.0], 1.0, 1.25, 1.0, 40, 0.3);
        let v = vertical([0.0, 0.0], -0.5, 1.5);
        let l = winding_general(&h, &v, &o).unwrap().value;
        let rr = winding_general(&h.reversed(), &v.reversed(), &o).unwrap().value;
        let r1 = winding_general(&h.reversed(), &v, &o).unwrap().value;
        assert!((l - rr).abs() < 1e-12);
        assert!((l + r1).abs() < 1e-12);
        assert!((l - 1.25).abs() < 1e-12, "{l}");
    }

    #[test]
    fn identical_curves_are_rejected() {
        let v = vertical([0.0, 0.0], 0.0, 1.0);
        assert!(winding_general(&v, &v.clone(), &WindingOptions::default()).is_err());
    }

    #[test]
    fn monotone_rejects_turning_curves() {
        let c = Polyline3::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 1.0], [2.0, 0.0, 0.0]]).unwrap();
        let v = vertical([5.0, 0.0], 0.0, 1.0);
        assert!(matches!(
            winding_monotone(&c, &v, &WindingOptions::default()),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn contributions_sum_to_two_pi_l() {
        let o = WindingOptions::default();
        let arch = Polyline3::new(
            (0..=32)
                .map(|k| {
                    let t = PI * k as f64 / 32.0;
                    [1.0 - t.cos(), 0.0, t.sin()]
                })
                .collect(),
        )
        .unwrap();
        let v = vertical([1.0, 0.5], 0.0, 0.6);
        let r = winding_general(&arch, &v, &o).unwrap();
        let s = exact_sum(r.contributions.iter().map(|c| c.weighted));
        assert_eq!(s / (2.0 * PI), r.value);
        assert!(r.contributions.iter().any(|c| matches!(c.kind, ContributionKind::Jump { .. })));
    }

    #[test]
    fn level_run_inside_the_slab_counts_its_sweep() {
        let o = WindingOptions::default();
        let v = vertical([0.0, 0.0], 0.0, 2.0);
        let flat = Polyline3::new(vec![[1.0, 0.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, 1.0, 0.0]]).unwrap();
        let tilted =
            Polyline3::new(vec![[1.0, 0.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0 + 1e-9], [0.0, 1.0, 0.0]]).unwrap();
        let a = winding_general(&v, &flat, &o).unwrap().value;
        let b = winding_general(&v, &tilted, &o).unwrap().value;
        assert!((a.abs() - 0.25).abs() < 1e-15, "{a}");
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}
