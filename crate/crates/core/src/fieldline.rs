//! Field-line tracing, z-monotone partitioning and connectivity classes.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{norm3, Vec3};
use crate::grid::{sample, VectorField3};

/// Default relative null threshold on `|B|`.
pub const DEFAULT_EPS_NULL: f64 = 1e-10;

/// An oriented piecewise-linear curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline3 {
    vertices: Vec<Vec3>,
}

impl Polyline3 {
    /// At least two vertices, no two consecutive vertices equal.
    pub fn new(vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidInput("a polyline needs at least 2 vertices".into()));
        }
        if let Some(i) = vertices.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!(
                "polyline vertices {i} and {} coincide",
                i + 1
            )));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("polyline has non-finite vertices".into()));
        }
        Ok(Self { vertices })
    }

    /// Build from raw vertices, dropping consecutive duplicates.
    pub fn from_points(points: impl IntoIterator<Item = Vec3>) -> Result<Self> {
        let mut vertices: Vec<Vec3> = Vec::new();
        for p in points {
            if vertices.last() != Some(&p) {
                vertices.push(p);
            }
        }
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn first(&self) -> Vec3 {
        self.vertices[0]
    }

    pub fn last(&self) -> Vec3 {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self { vertices: v }
    }

    pub fn max_z(&self) -> f64 {
        self.vertices.iter().map(|v| v[2]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn arc_length(&self) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| norm3(crate::geom::sub3(w[1], w[0])))
            .sum()
    }
}

/// A maximal run of vertices over which z moves in one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneSegment {
    /// First vertex index.
    pub start: usize,
    /// Last vertex index (inclusive; shared with the next segment).
    pub end: usize,
    /// +1 rising, -1 falling, 0 horizontal.
    pub sigma: i8,
    /// Segment z-range with turning heights refined between vertices.
    pub z_min: f64,
    pub z_max: f64,
}

impl MonotoneSegment {
    pub fn vertex_count(&self) -> usize {
        self.end - self.start + 1
    }
}

fn dz_sign(a: Vec3, b: Vec3) -> i8 {
    let dz = b[2] - a[2];
    if dz > 0.0 {
        1
    } else if dz < 0.0 {
        -1
    } else {
        0
    }
}

/// Extremal z of the parabola through three consecutive vertices,
/// parametrized by chord length. Falls back to the middle vertex when the
/// fit is degenerate.
fn refined_turning_height(p0: Vec3, p1: Vec3, p2: Vec3) -> f64 {
    let s1 = norm3(crate::geom::sub3(p1, p0));
    let s2 = s1 + norm3(crate::geom::sub3(p2, p1));
    let (z0, z1, z2) = (p0[2], p1[2], p2[2]);
    // divided differences of z(s)
    let d01 = (z1 - z0) / s1;
    let d12 = (z2 - z1) / (s2 - s1);
    let a = (d12 - d01) / s2;
    if a == 0.0 || !a.is_finite() {
        return z1;
    }
    // z(s) = z0 + d01 s + a s (s - s1)
    let s_star = (a * s1 - d01) / (2.0 * a);
    if !(0.0..=s2).contains(&s_star) {
        return z1;
    }
    let z = z0 + d01 * s_star + a * s_star * (s_star - s1);
    let is_max = d01 > 0.0;
    if is_max {
        z.max(z1)
    } else {
        z.min(z1)
    }
}

/// Split a curve into z-monotone segments.
///
/// Turning points sit at vertices where the sign of the vertex-to-vertex
/// z step changes; where the sign flips directly between +1 and -1 the
/// turning height is refined with a quadratic through the three bracketing
/// vertices. Adjacent segments share their turning vertex.
pub fn partition_monotone(curve: &Polyline3) -> Vec<MonotoneSegment> {
    let v = curve.vertices();
    let signs: Vec<i8> = v.windows(2).map(|w| dz_sign(w[0], w[1])).collect();
    let mut segments = Vec::new();
    let mut start = 0;
    for e in 1..=signs.len() {
        if e == signs.len() || signs[e] != signs[start] {
            let sigma = signs[start];
            let (za, zb) = (v[start][2], v[e][2]);
            segments.push(MonotoneSegment {
                start,
                end: e,
                sigma,
                z_min: za.min(zb),
                z_max: za.max(zb),
            });
            start = e;
        }
    }
    for s in 0..segments.len().saturating_sub(1) {
        let (a, b) = (segments[s], segments[s + 1]);
        if a.sigma * b.sigma != -1 {
            continue;
        }
        let t = a.end;
        let z = refined_turning_height(v[t - 1], v[t], v[t + 1]);
        if a.sigma > 0 {
            segments[s].z_max = z;
            segments[s + 1].z_max = z;
        } else {
            segments[s].z_min = z;
            segments[s + 1].z_min = z;
        }
    }
    segments
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ExitTop,
    ExitBottom,
    ExitSide,
    ClosedLoop,
    MaxSteps,
    Null,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::ExitTop => "exit-top",
            Termination::ExitBottom => "exit-bottom",
            Termination::ExitSide => "exit-side",
            Termination::ClosedLoop => "closed-loop",
            Termination::MaxSteps => "max-steps",
            Termination::Null => "null",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Arclength step.
    pub step: f64,
    pub max_steps: usize,
    /// Null threshold relative to the field's max `|B|`.
    pub eps_null: f64,
    /// +1 follows `B`, -1 follows `-B`.
    pub direction: f64,
}

impl TraceOptions {
    pub fn new(step: f64, max_steps: usize) -> Self {
        Self {
            step,
            max_steps,
            eps_null: DEFAULT_EPS_NULL,
            direction: 1.0,
        }
    }

    pub fn backward(mut self) -> Self {
        self.direction = -self.direction;
        self
    }
}

/// Raw trace output; may hold a single vertex if the seed exits at once.
#[derive(Debug, Clone)]
pub struct Trace {
    pub vertices: Vec<Vec3>,
    pub reason: Termination,
}

impl Trace {
    pub fn polyline(&self) -> Result<Polyline3> {
        Polyline3::from_points(self.vertices.iter().copied())
    }
}

/// Integrates `dx/ds = B/|B|` from `seed` with classical RK4 at fixed
/// arclength step.
pub struct Tracer<'a> {
    field: &'a VectorField3,
    null_floor: f64,
    lo: Vec3,
    hi: Vec3,
}

enum Stage {
    Dir(Vec3),
    Outside,
    Null,
}

impl<'a> Tracer<'a> {
    pub fn new(field: &'a VectorField3, eps_null: f64) -> Self {
        Self {
            field,
            null_floor: eps_null * field.max_norm(),
            lo: field.grid.origin,
            hi: field.grid.upper(),
        }
    }

    fn direction(&self, p: Vec3, sign: f64) -> Stage {
        match sample(self.field, p) {
            Err(_) => Stage::Outside,
            Ok(b) => {
                let n = norm3(b);
                if n <= self.null_floor || n == 0.0 {
                    Stage::Null
                } else {
                    let s = sign / n;
                    Stage::Dir([b[0] * s, b[1] * s, b[2] * s])
                }
            }
        }
    }

    /// Largest `t` in `[0, tmax]` keeping `p + t d` inside the box.
    fn exit_fraction(&self, p: Vec3, d: Vec3, tmax: f64) -> f64 {
        let mut t = tmax;
        for a in 0..3 {
            if d[a] > 0.0 {
                t = t.min((self.hi[a] - p[a]) / d[a]);
            } else if d[a] < 0.0 {
                t = t.min((self.lo[a] - p[a]) / d[a]);
            }
        }
        t.max(0.0)
    }

    fn snap(&self, mut p: Vec3) -> Vec3 {
        for a in 0..3 {
            p[a] = p[a].clamp(self.lo[a], self.hi[a]);
        }
        p
    }

    fn exit_reason(&self, p: Vec3) -> Termination {
        let tol = 1e-9 * self.field.grid.dz;
        if p[2] >= self.hi[2] - tol {
            Termination::ExitTop
        } else if p[2] <= self.lo[2] + tol {
            Termination::ExitBottom
        } else {
            Termination::ExitSide
        }
    }

    pub fn trace(&self, seed: Vec3, opts: &TraceOptions) -> Result<Trace> {
        if !(opts.step > 0.0) {
            return Err(Error::InvalidInput("trace step must be positive".into()));
        }
        if !self.field.grid.contains(seed) {
            return Err(Error::OutOfDomain(seed));
        }
        let seed = self.snap(seed);
        let h = opts.step;
        let sign = opts.direction.signum();
        let mut verts = vec![seed];
        let mut x = seed;
        for step in 0..opts.max_steps {
            let k1 = match self.direction(x, sign) {
                Stage::Dir(d) => d,
                Stage::Null => {
                    if step == 0 {
                        return Err(Error::InvalidInput(format!(
                            "field vanishes at seed {seed:?}"
                        )));
                    }
                    return Ok(Trace { vertices: verts, reason: Termination::Null });
                }
                Stage::Outside => unreachable!("current point is always inside"),
            };
            let add = |p: Vec3, d: Vec3, t: f64| [p[0] + t * d[0], p[1] + t * d[1], p[2] + t * d[2]];

            let stages = (|| {
                let k2 = match self.direction(add(x, k1, 0.5 * h), sign) {
                    Stage::Dir(d) => d,
                    other => return Err(other),
                };
                let k3 = match self.direction(add(x, k2, 0.5 * h), sign) {
                    Stage::Dir(d) => d,
                    other => return Err(other),
                };
                let k4 = match self.direction(add(x, k3, h), sign) {
                    Stage::Dir(d) => d,
                    other => return Err(other),
                };
                Ok((k2, k3, k4))
            })();

            let next = match stages {
                Ok((k2, k3, k4)) => {
                    let mut n = x;
                    for a in 0..3 {
                        n[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
                    }
                    n
                }
                Err(Stage::Null) => {
                    return Ok(Trace { vertices: verts, reason: Termination::Null });
                }
                Err(_) => {
                    // a stage left the box: finish with an Euler step onto the face
                    let t = self.exit_fraction(x, k1, h);
                    let p = self.snap(add(x, k1, t));
                    if p != x {
                        verts.push(p);
                    }
                    let reason = self.exit_reason(p);
                    return Ok(Trace { vertices: verts, reason });
                }
            };

            if !self.field.grid.contains(next) {
                let d = crate::geom::sub3(next, x);
                let t = self.exit_fraction(x, d, 1.0);
                let p = self.snap(add(x, d, t));
                if p != x {
                    verts.push(p);
                }
                let reason = self.exit_reason(p);
                return Ok(Trace { vertices: verts, reason });
            }

            verts.push(next);
            x = next;
            if step >= 2 && norm3(crate::geom::sub3(x, seed)) < 0.5 * h {
                return Ok(Trace { vertices: verts, reason: Termination::ClosedLoop });
            }
        }
        Ok(Trace { vertices: verts, reason: Termination::MaxSteps })
    }
}

/// Trace one field line from `seed`.
pub fn trace(field: &VectorField3, seed: Vec3, opts: &TraceOptions) -> Result<Trace> {
    Tracer::new(field, opts.eps_null).trace(seed, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    Open,
    Closed,
    Undetermined,
}

/// Classify the field line rooted at a bottom-plane seed.
///
/// Positive-`B_z` seeds are traced along `B`, negative ones against it.
pub fn classify_connectivity(
    field: &VectorField3,
    seed: Vec3,
    opts: &TraceOptions,
) -> Result<Connectivity> {
    let b = sample(field, seed)?;
    if b[2] == 0.0 {
        return Ok(Connectivity::Undetermined);
    }
    let mut o = *opts;
    o.direction = b[2].signum();
    let t = match trace(field, seed, &o) {
        Ok(t) => t,
        Err(Error::InvalidInput(_)) => return Ok(Connectivity::Undetermined),
        Err(e) => return Err(e),
    };
    Ok(match t.reason {
        Termination::ExitTop => Connectivity::Open,
        Termination::ExitBottom if t.vertices.len() > 1 => Connectivity::Closed,
        _ => Connectivity::Undetermined,
    })
}

/// Write curves in the WHCRV v1 text format.
pub fn write_curves(path: impl AsRef<Path>, curves: &[(String, Polyline3)]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (id, c) in curves {
        writeln!(out, "# curve {id}").unwrap();
        for v in c.vertices() {
            writeln!(out, "{:?} {:?} {:?}", v[0], v[1], v[2]).unwrap();
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read a WHCRV v1 file. Blank lines are ignored.
pub fn read_curves(path: impl AsRef<Path>) -> Result<Vec<(String, Polyline3)>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut curves: Vec<(String, Vec<Vec3>)> = Vec::new();
    for (n, line) in std::io::BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(id) = line.strip_prefix("# curve") {
            curves.push((id.trim().to_string(), Vec::new()));
            continue;
        }
        let Some((_, pts)) = curves.last_mut() else {
            return Err(Error::Header(format!("line {}: vertex before '# curve' header", n + 1)));
        };
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Header(format!("line {}: {e}", n + 1)))?;
        if vals.len() != 3 {
            return Err(Error::Header(format!("line {}: expected 'x y z'", n + 1)));
        }
        pts.push([vals[0], vals[1], vals[2]]);
    }
    curves
        .into_iter()
        .map(|(id, pts)| Ok((id, Polyline3::new(pts)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid3;

    fn poly(z: &[f64]) -> Polyline3 {
        Polyline3::new(z.iter().enumerate().map(|(i, &z)| [i as f64, 0.0, z]).collect()).unwrap()
    }

    #[test]
    fn vertical_line_is_one_rising_segment() {
        let s = partition_monotone(&poly(&[0.0, 0.5, 1.0]));
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].sigma, s[0].start, s[0].end), (1, 0, 2));
    }

    #[test]
    fn w_shape_has_four_segments() {
        let s = partition_monotone(&poly(&[0.0, 1.0, 0.2, 0.9, 0.1]));
        let sig: Vec<i8> = s.iter().map(|s| s.sigma).collect();
        assert_eq!(sig, vec![1, -1, 1, -1]);
        assert_eq!(s.len() - 1, 3);
        for w in s.windows(2) {
            assert_eq!(w[0].end, w[1].start);
        }
    }

    #[test]
    fn semicircle_turning_height_is_refined() {
        // 16 vertices: the apex falls between two vertices
        let n = 16;
        let c = Polyline3::new(
            (0..n)
                .map(|k| {
                    let t = std::f64::consts::PI * k as f64 / (n - 1) as f64;
                    [1.0 - t.cos(), 0.0, t.sin()]
                })
                .collect(),
        )
        .unwrap();
        let s = partition_monotone(&c);
        assert_eq!(s.iter().map(|s| s.sigma).collect::<Vec<_>>(), vec![1, -1]);
        assert_eq!(s[0].z_max, s[1].z_max);
        assert!((s[0].z_max - 1.0).abs() < 2e-4, "{}", s[0].z_max);
        assert!(s[0].z_max > c.max_z());
    }

    #[test]
    fn horizontal_run_gets_zero_sigma() {
        let s = partition_monotone(&poly(&[0.0, 1.0, 1.0, 2.0]));
        assert_eq!(s.iter().map(|s| s.sigma).collect::<Vec<_>>(), vec![1, 0, 1]);
    }

    #[test]
    fn polyline_rejects_repeated_vertices() {
        assert!(Polyline3::new(vec![[0.0; 3], [0.0; 3]]).is_err());
        assert!(Polyline3::new(vec![[0.0; 3]]).is_err());
    }

    #[test]
    fn uniform_field_trace_exits_top() {
        let g = Grid3::spanning([5, 5, 9], [0.0, 0.0, 0.0], [1.0, 1.0, 2.0]).unwrap();
        let f = VectorField3::from_fn(g, |_| [0.0, 0.0, 1.0]);
        let t = trace(&f, [0.0, 0.0, 0.0], &TraceOptions::new(0.3, 100)).unwrap();
        assert_eq!(t.reason, Termination::ExitTop);
        let last = *t.vertices.last().unwrap();
        assert!((last[2] - 2.0).abs() < 1e-12 && last[0] == 0.0 && last[1] == 0.0);
        let back = trace(&f, [0.5, 0.5, 1.0], &TraceOptions::new(0.3, 100).backward()).unwrap();
        assert_eq!(back.reason, Termination::ExitBottom);
    }

    #[test]
    fn trace_reports_null_and_seed_errors() {
        let g = Grid3::spanning([3, 3, 3], [0.0; 3], [1.0; 3]).unwrap();
        let f = VectorField3::from_fn(g, |p| [0.0, 0.0, 1.0 - p[2] / 0.5]);
        let t = trace(&f, [0.5, 0.5, 0.0], &TraceOptions::new(0.1, 100)).unwrap();
        assert_eq!(t.reason, Termination::Null);
        assert!(trace(&f, [2.0, 0.5, 0.0], &TraceOptions::new(0.1, 100)).is_err());
        assert!(trace(&f, [0.5, 0.5, 0.5], &TraceOptions::new(0.1, 100)).is_err());
    }

    #[test]
    fn curve_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.whcrv");
        let a = poly(&[0.1, 0.7, 0.3]);
        let b = Polyline3::new(vec![[0.1, 1e-17, 3.0], [-2.5, 0.3333333333333333, 4.0]]).unwrap();
        write_curves(&p, &[("a".into(), a.clone()), ("b 2".into(), b.clone())]).unwrap();
        let back = read_curves(&p).unwrap();
        assert_eq!(back, vec![("a".into(), a), ("b 2".into(), b)]);
    }
}
