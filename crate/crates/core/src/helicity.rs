//! Winding gauge, winding helicity and its self/mutual decomposition.
//!
//! Every quadrature here is a midpoint sum over the cells of each
//! horizontal slice, with the coincident cell omitted, and a trapezoid sum
//! over slices. Reductions use exact summation of per-row partial sums, so
//! results do not depend on thread count or scheduling.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Vec2, Vec3};
use crate::grid::{slice_at, SliceField, VectorField3};
use crate::labeling::RegionMask;
use crate::sum::ExactSum;

/// Relative tolerance for the boundary `B_z` agreement of a reference field.
pub const REFERENCE_BZ_TOL: f64 = 1e-8;

/// Active cells of one plane in structure-of-arrays form.
///
/// The pair kernel is
/// `K = [r1 (vy(x) s(y) - s(x) vy(y)) - r2 (vx(x) s(y) - s(x) vx(y))] / |r|^2`
/// with `r = x - y`. With `v = B_perp` and `s = B_z` this is
/// `B(x) . B(y) x r / |r|^2`.
#[derive(Debug, Clone, Default)]
pub(crate) struct PlaneCells {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub vx: Vec<f64>,
    pub vy: Vec<f64>,
    pub s: Vec<f64>,
    /// Label slot per cell; the excluded slot is `nlabels`.
    pub slot: Vec<usize>,
}

impl PlaneCells {
    pub fn push(&mut self, p: Vec2, v: Vec2, s: f64, slot: usize) {
        self.x.push(p[0]);
        self.y.push(p[1]);
        self.vx.push(v[0]);
        self.vy.push(v[1]);
        self.s.push(s);
        self.slot.push(slot);
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }
}

/// Unordered-pair sums of one plane, already doubled to ordered pairs.
#[derive(Debug, Clone)]
pub(crate) struct PairSums {
    /// Row-major `nlabels x nlabels`; entry `(i, j)` with `i <= j` holds the
    /// sum over unordered pairs with labels `{i, j}`.
    pub buckets: Vec<f64>,
    /// Sum over all pairs with both labels valid.
    pub total: f64,
    /// Sum of `|K|` over all pairs.
    pub magnitude: f64,
    /// Sum of `|K|` over pairs touching the excluded slot.
    pub excluded: f64,
}

pub(crate) fn pair_sums(cells: &PlaneCells, nlabels: usize) -> PairSums {
    let m = cells.len();
    let ex = nlabels;
    let rows: Vec<(Vec<f64>, f64, f64)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let (xi, yi, vxi, vyi, si) = (cells.x[i], cells.y[i], cells.vx[i], cells.vy[i], cells.s[i]);
            let mut acc = vec![0.0; nlabels + 1];
            let mut mass = 0.0;
            for j in i + 1..m {
                let r1 = xi - cells.x[j];
                let r2 = yi - cells.y[j];
                let sj = cells.s[j];
                let num = r1 * (vyi * sj - si * cells.vy[j]) - r2 * (vxi * sj - si * cells.vx[j]);
                let k = num / (r1 * r1 + r2 * r2);
                acc[cells.slot[j]] += k;
                mass += k.abs();
            }
            let mut abs_ex = 0.0;
            if cells.slot[i] == ex {
                abs_ex = mass;
            } else {
                // |K| of pairs with excluded partner
                for j in i + 1..m {
                    if cells.slot[j] == ex {
                        let r1 = xi - cells.x[j];
                        let r2 = yi - cells.y[j];
                        let sj = cells.s[j];
                        let num = r1 * (vyi * sj - si * cells.vy[j]) - r2 * (vxi * sj - si * cells.vx[j]);
                        abs_ex += (num / (r1 * r1 + r2 * r2)).abs();
                    }
                }
            }
            (acc, mass, abs_ex)
        })
        .collect();

    let mut buckets: Vec<ExactSum> = (0..nlabels * nlabels).map(|_| ExactSum::new()).collect();
    let (mut total, mut magnitude, mut excluded) = (ExactSum::new(), ExactSum::new(), ExactSum::new());
    for (i, (acc, mass, abs_ex)) in rows.iter().enumerate() {
        magnitude.add(*mass);
        excluded.add(*abs_ex);
        let a = cells.slot[i];
        if a == ex {
            continue;
        }
        for (b, &v) in acc[..nlabels].iter().enumerate() {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            buckets[lo * nlabels + hi].add(v);
            total.add(v);
        }
    }
    PairSums {
        buckets: buckets.iter().map(|b| 2.0 * b.value()).collect(),
        total: 2.0 * total.value(),
        magnitude: 2.0 * magnitude.value(),
        excluded: 2.0 * excluded.value(),
    }
}

fn is_active(b: Vec3) -> bool {
    b[0] != 0.0 || b[1] != 0.0 || b[2] != 0.0
}

fn volume_cells(field: &VectorField3, k: usize, labels: Option<&[i32]>, nlabels: usize) -> PlaneCells {
    let g = &field.grid;
    let n = g.slice_len();
    let mut cells = PlaneCells::default();
    for c in 0..n {
        let idx = k * n + c;
        let b = field.at(idx);
        if !is_active(b) {
            continue;
        }
        let slot = match labels {
            None => 0,
            Some(l) if l[idx] < 0 => nlabels,
            Some(l) => l[idx] as usize,
        };
        let p = [g.origin[0] + (c % g.nx) as f64 * g.dx, g.origin[1] + (c / g.nx) as f64 * g.dy];
        cells.push(p, [b[0], b[1]], b[2], slot);
    }
    cells
}

/// A quadrature value with the absolute mass of its summands.
///
/// `magnitude` is the same sum taken over `|K|`; it bounds the value and
/// sets the scale of its rounding error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    pub magnitude: f64,
}

impl Quadrature {
    /// `|a - b| / max(|a|, |b|, magnitude)`.
    pub fn relative_difference(&self, other: f64) -> f64 {
        let scale = self.value.abs().max(other.abs()).max(self.magnitude);
        if scale == 0.0 {
            0.0
        } else {
            (self.value - other).abs() / scale
        }
    }
}

/// The winding gauge `A^W` at each target of one slice.
///
/// Targets must lie inside the slice footprint; the cell whose node is
/// nearest a target is left out of its sum.
pub fn winding_gauge_slice(slice: &SliceField, targets: &[Vec2]) -> Result<Vec<Vec3>> {
    let sources: Vec<usize> = (0..slice.len())
        .filter(|&c| is_active([slice.bx[c], slice.by[c], slice.bz[c]]))
        .collect();
    let da = slice.cell_area();
    targets
        .par_iter()
        .map(|&t| {
            let own = slice.cell_of(t).ok_or_else(|| Error::OutOfDomain([t[0], t[1], slice.z]))?;
            Ok(gauge_at(slice, &sources, t, own, da))
        })
        .collect()
}

fn gauge_at(slice: &SliceField, sources: &[usize], t: Vec2, skip: usize, da: f64) -> Vec3 {
    let mut a = [0.0; 3];
    for &c in sources {
        if c == skip {
            continue;
        }
        let p = slice.position(c);
        let (r1, r2) = (t[0] - p[0], t[1] - p[1]);
        let q = 1.0 / (r1 * r1 + r2 * r2);
        let s = slice.bz[c];
        a[0] -= s * r2 * q;
        a[1] += s * r1 * q;
        a[2] += (slice.bx[c] * r2 - slice.by[c] * r1) * q;
    }
    let f = da / (2.0 * PI);
    [a[0] * f, a[1] * f, a[2] * f]
}

/// `sum_slices w_k dA sum_x A^W[b1](x) . b2(x)`, with the same magnitude
/// convention as [`Quadrature`].
pub fn gauge_bilinear(b1: &VectorField3, b2: &VectorField3) -> Result<Quadrature> {
    if b1.grid != b2.grid {
        return Err(Error::ShapeMismatch("fields are on different grids".into()));
    }
    let g = &b1.grid;
    let weights = g.z_weights();
    let da = g.cell_area();
    let mut value = ExactSum::new();
    let mut magnitude = ExactSum::new();
    for k in 0..g.nz {
        let s1 = slice_at(b1, k, 0.0)?;
        let s2 = slice_at(b2, k, 0.0)?;
        let sources: Vec<usize> = (0..s1.len())
            .filter(|&c| is_active([s1.bx[c], s1.by[c], s1.bz[c]]))
            .collect();
        let targets: Vec<usize> = (0..s2.len())
            .filter(|&c| is_active([s2.bx[c], s2.by[c], s2.bz[c]]))
            .collect();
        let rows: Vec<(f64, f64)> = targets
            .par_iter()
            .map(|&c| {
                let x = s1.position(c);
                let a = gauge_at(&s1, &sources, x, c, 1.0);
                let b = [s2.bx[c], s2.by[c], s2.bz[c]];
                let mut mass = 0.0;
                for &y in &sources {
                    if y == c {
                        continue;
                    }
                    let p = s1.position(y);
                    let (r1, r2) = (x[0] - p[0], x[1] - p[1]);
                    let t = (-b[0] * s1.bz[y] * r2 + b[1] * s1.bz[y] * r1
                        + b[2] * (s1.bx[y] * r2 - s1.by[y] * r1))
                        / (r1 * r1 + r2 * r2);
                    mass += t.abs();
                }
                (a[0] * b[0] + a[1] * b[1] + a[2] * b[2], mass / (2.0 * PI))
            })
            .collect();
        let scale = weights[k] * da * da;
        for (v, m) in rows {
            value.add(v * scale);
            magnitude.add(m * scale);
        }
    }
    Ok(Quadrature { value: value.value(), magnitude: magnitude.value() })
}

/// `sum A^W . B dV`: the gauge contraction.
pub fn helicity_gauge_form(field: &VectorField3) -> f64 {
    let g = &field.grid;
    let weights = g.z_weights();
    let da = g.cell_area();
    let mut total = ExactSum::new();
    for k in 0..g.nz {
        let slice = slice_at(field, k, 0.0).expect("slice index in range");
        let active: Vec<usize> = (0..slice.len())
            .filter(|&c| is_active([slice.bx[c], slice.by[c], slice.bz[c]]))
            .collect();
        let rows: Vec<f64> = active
            .par_iter()
            .map(|&c| {
                let a = gauge_at(&slice, &active, slice.position(c), c, da);
                a[0] * slice.bx[c] + a[1] * slice.by[c] + a[2] * slice.bz[c]
            })
            .collect();
        for v in rows {
            total.add(v * weights[k] * da);
        }
    }
    total.value()
}

/// The pairwise double sum of the winding-rate kernel.
pub fn helicity_pairwise_form(field: &VectorField3) -> Quadrature {
    let g = &field.grid;
    let weights = g.z_weights();
    let da2 = g.cell_area() * g.cell_area();
    let (mut value, mut magnitude) = (ExactSum::new(), ExactSum::new());
    for k in 0..g.nz {
        let sums = pair_sums(&volume_cells(field, k, None, 1), 1);
        let w = weights[k] * da2 / (2.0 * PI);
        value.add(sums.total * w);
        magnitude.add(sums.magnitude * w);
    }
    Quadrature { value: value.value(), magnitude: magnitude.value() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    /// Winding helicity of a volume.
    Volume,
    /// Time-integrated helicity flux through a plane.
    Flux,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMeta {
    /// `[nx, ny, nz]` for volumes, `[nx, ny, frames]` for series.
    pub dims: [usize; 3],
    /// `B_z` threshold used to define slopes or footpoint velocities.
    pub eps_bz: Option<f64>,
    pub rule: String,
    pub diagonal: String,
}

impl QuadratureMeta {
    pub(crate) fn new(kind: ReportKind, dims: [usize; 3], eps_bz: Option<f64>) -> Self {
        let rule = match kind {
            ReportKind::Volume => "midpoint in-plane, trapezoid in z",
            ReportKind::Flux => "midpoint in-plane, trapezoid in t",
        };
        Self {
            dims,
            eps_bz,
            rule: rule.into(),
            diagonal: "coincident cell pairs excluded".into(),
        }
    }
}

/// Self/mutual split of a helicity quadrature over labeled subdomains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelicityReport {
    pub kind: ReportKind,
    pub total: f64,
    /// Self helicity per label.
    #[serde(rename = "self")]
    pub self_helicity: Vec<f64>,
    /// `mutual[i][j]` for ordered pairs; symmetric, diagonal zero.
    pub mutual: Vec<Vec<f64>>,
    /// `|B_z|`-weighted measure of excluded cells.
    pub excluded_weight: f64,
    /// Kernel mass of pairs touching excluded cells, same units as `total`.
    pub excluded_pair_mass: f64,
    /// Kernel mass of all pairs, same units as `total`.
    pub magnitude: f64,
    pub metadata: QuadratureMeta,
}

impl HelicityReport {
    pub fn label_count(&self) -> usize {
        self.self_helicity.len()
    }

    /// `sum self + sum_{i != j} mutual`.
    pub fn reconstruction(&self) -> f64 {
        let mut s = ExactSum::new();
        for (i, row) in self.mutual.iter().enumerate() {
            s.add(self.self_helicity[i]);
            for (j, &v) in row.iter().enumerate() {
                if i != j {
                    s.add(v);
                }
            }
        }
        s.value()
    }

    /// Relative reconstruction error against `max(|total|, magnitude)`.
    pub fn reconstruction_error(&self) -> f64 {
        Quadrature { value: self.total, magnitude: self.magnitude }
            .relative_difference(self.reconstruction())
    }

    /// Total mutual helicity between two labels, `H_ij + H_ji`.
    pub fn mutual_total(&self, i: usize, j: usize) -> f64 {
        self.mutual[i][j] + self.mutual[j][i]
    }

    pub(crate) fn from_buckets(
        kind: ReportKind,
        nlabels: usize,
        buckets: &[ExactSum],
        total: f64,
        magnitude: f64,
        excluded_pair_mass: f64,
        excluded_weight: f64,
        metadata: QuadratureMeta,
    ) -> Self {
        let mut self_helicity = vec![0.0; nlabels];
        let mut mutual = vec![vec![0.0; nlabels]; nlabels];
        for i in 0..nlabels {
            self_helicity[i] = buckets[i * nlabels + i].value();
            for j in i + 1..nlabels {
                // each unordered bucket is one ordered-pair sum
                let v = 0.5 * buckets[i * nlabels + j].value();
                mutual[i][j] = v;
                mutual[j][i] = v;
            }
        }
        Self {
            kind,
            total,
            self_helicity,
            mutual,
            excluded_weight,
            excluded_pair_mass,
            magnitude,
            metadata,
        }
    }
}

/// Route the pairwise kernel by the labels of both cells.
pub fn decompose(field: &VectorField3, mask: &RegionMask) -> Result<HelicityReport> {
    let g = &field.grid;
    if !g.same_shape(&mask.grid) {
        return Err(Error::ShapeMismatch(format!(
            "mask is {}x{}x{}, field is {}x{}x{}",
            mask.grid.nx, mask.grid.ny, mask.grid.nz, g.nx, g.ny, g.nz
        )));
    }
    let nl = mask.label_count();
    let weights = g.z_weights();
    let da = g.cell_area();
    let mut buckets: Vec<ExactSum> = (0..nl * nl).map(|_| ExactSum::new()).collect();
    let (mut total, mut magnitude, mut excluded, mut ex_weight) =
        (ExactSum::new(), ExactSum::new(), ExactSum::new(), ExactSum::new());
    let n = g.slice_len();
    for k in 0..g.nz {
        let sums = pair_sums(&volume_cells(field, k, Some(&mask.labels), nl), nl);
        let w = weights[k] * da * da / (2.0 * PI);
        for (b, v) in buckets.iter_mut().zip(&sums.buckets) {
            b.add(v * w);
        }
        total.add(sums.total * w);
        magnitude.add(sums.magnitude * w);
        excluded.add(sums.excluded * w);
        for c in 0..n {
            if mask.labels[k * n + c] < 0 {
                ex_weight.add(field.bz[k * n + c].abs() * da * weights[k]);
            }
        }
    }
    Ok(HelicityReport::from_buckets(
        ReportKind::Volume,
        nl,
        &buckets,
        total.value(),
        magnitude.value(),
        excluded.value(),
        ex_weight.value(),
        QuadratureMeta::new(ReportKind::Volume, [g.nx, g.ny, g.nz], None),
    ))
}

/// Winding helicity of `field` minus that of `reference`.
///
/// Warns when the two disagree in `B_z` on the bottom or top plane.
pub fn relative_helicity(field: &VectorField3, reference: &VectorField3) -> Result<f64> {
    if field.grid != reference.grid {
        return Err(Error::ShapeMismatch("field and reference grids differ".into()));
    }
    let g = &field.grid;
    let n = g.slice_len();
    let scale = field.bz.iter().chain(&reference.bz).fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0_f64;
    for k in [0, g.nz - 1] {
        for c in k * n..(k + 1) * n {
            worst = worst.max((field.bz[c] - reference.bz[c]).abs());
        }
    }
    if worst > REFERENCE_BZ_TOL * scale {
        log::warn!(
            "reference boundary B_z differs by {worst:e} (relative {:e})",
            if scale > 0.0 { worst / scale } else { 0.0 }
        );
    }
    Ok(helicity_pairwise_form(field).value - helicity_pairwise_form(reference).value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{twisted_tube, uniform_vertical, TubeSpec};
    use crate::grid::Grid3;

    fn small() -> Grid3 {
        Grid3::spanning([12, 12, 5], [-1.0, -1.0, 0.0], [1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn uniform_field_has_zero_helicity() {
        let f = uniform_vertical(small(), 2.0);
        assert_eq!(helicity_pairwise_form(&f).value, 0.0);
        assert_eq!(helicity_gauge_form(&f), 0.0);
    }

    #[test]
    fn zero_slice_gives_zero_gauge() {
        let f = uniform_vertical(small(), 0.0);
        let s = slice_at(&f, 0, 0.0).unwrap();
        let a = winding_gauge_slice(&s, &[[0.0, 0.0], [0.5, -0.5]]).unwrap();
        assert!(a.iter().flatten().all(|&v| v == 0.0));
        assert!(winding_gauge_slice(&s, &[[3.0, 0.0]]).is_err());
    }

    #[test]
    fn forms_agree_and_are_even_in_b() {
        let g = small();
        let f = twisted_tube(g, &TubeSpec::new([0.0, 0.0], 0.6, 1.0, 2.0)).unwrap();
        let p = helicity_pairwise_form(&f);
        let q = helicity_gauge_form(&f);
        assert!(p.relative_difference(q) < 1e-13, "{p:?} {q}");
        let neg = helicity_pairwise_form(&f.scaled(-1.0));
        assert_eq!(neg.value, p.value);
        assert!(p.value > 0.0);
    }

    #[test]
    fn single_label_regroups_exactly() {
        let g = small();
        let f = twisted_tube(g, &TubeSpec::new([0.0, 0.0], 0.6, 1.0, 2.0)).unwrap();
        let mask = RegionMask::new(g, vec![0; g.len()]).unwrap();
        let r = decompose(&f, &mask).unwrap();
        assert_eq!(r.self_helicity[0], r.total);
        assert_eq!(r.total, helicity_pairwise_form(&f).value);
    }

    #[test]
    fn relative_helicity_is_antisymmetric() {
        let g = small();
        let a = twisted_tube(g, &TubeSpec::new([0.0, 0.0], 0.6, 1.0, 2.0)).unwrap();
        let b = twisted_tube(g, &TubeSpec::new([0.1, 0.0], 0.6, 1.0, -1.0)).unwrap();
        assert_eq!(relative_helicity(&a, &a).unwrap(), 0.0);
        assert_eq!(relative_helicity(&a, &b).unwrap(), -relative_helicity(&b, &a).unwrap());
    }
}
