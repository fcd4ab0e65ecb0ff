//! Subdomain masks: open/closed classification and the WHMSK format.

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldline::{Connectivity, Termination, TraceOptions, Tracer, DEFAULT_EPS_NULL};
use crate::geom::Vec3;
use crate::grid::{Grid3, VectorField3};
use crate::header;

/// Label for cells excluded from every subdomain.
pub const EXCLUDED: i32 = -1;

/// One label per grid sample: `0..K` for subdomains, `-1` for excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    pub grid: Grid3,
    pub labels: Vec<i32>,
    count: usize,
}

impl RegionMask {
    /// Checks length and that the non-negative labels are exactly `0..K`.
    pub fn new(grid: Grid3, labels: Vec<i32>) -> Result<Self> {
        grid.validate()?;
        if labels.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for a grid of {} samples",
                labels.len(),
                grid.len()
            )));
        }
        let set: BTreeSet<i32> = labels.iter().copied().collect();
        if let Some(&bad) = set.iter().find(|&&l| l < EXCLUDED) {
            return Err(Error::InvalidInput(format!("label {bad} is below -1")));
        }
        let ids: Vec<i32> = set.into_iter().filter(|&l| l >= 0).collect();
        if ids.iter().enumerate().any(|(i, &l)| l != i as i32) {
            return Err(Error::NonContiguousLabels(format!("{ids:?}")));
        }
        Ok(Self { grid, labels, count: ids.len() })
    }

    /// Number of subdomains `K`.
    pub fn label_count(&self) -> usize {
        self.count
    }

    pub fn cells_with(&self, label: i32) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Fraction of samples labelled `-1`.
    pub fn excluded_fraction(&self) -> f64 {
        self.cells_with(EXCLUDED) as f64 / self.labels.len() as f64
    }

    /// Trapezoid-in-z volume of one label.
    pub fn volume(&self, label: i32) -> f64 {
        let g = &self.grid;
        let w = g.z_weights();
        let n = g.slice_len();
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| w[i / n] * g.cell_area())
            .sum()
    }

    pub fn check_shape(&self, grid: &Grid3) -> Result<()> {
        if self.grid.same_shape(grid) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "mask is {}x{}x{}, field is {}x{}x{}",
                self.grid.nx, self.grid.ny, self.grid.nz, grid.nx, grid.ny, grid.nz
            )))
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaskHeader {
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

/// Read a WHMSK v1 file.
pub fn load_mask(path: impl AsRef<Path>) -> Result<RegionMask> {
    let (h, payload): (MaskHeader, _) = header::read(path.as_ref())?;
    header::check_format(&h.format, "WHMSK", h.version)?;
    if h.components != ["label"] {
        return Err(Error::Header(format!("components must be [\"label\"], got {:?}", h.components)));
    }
    let grid = Grid3::new(h.nx, h.ny, h.nz, [h.dx, h.dy, h.dz], h.origin)?;
    header::check_payload(grid.len() * 4, payload.len())?;
    let labels = payload
        .chunks_exact(4)
        .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    RegionMask::new(grid, labels)
}

/// Write a WHMSK v1 file.
pub fn save_mask(mask: &RegionMask, path: impl AsRef<Path>) -> Result<()> {
    let g = &mask.grid;
    let h = MaskHeader {
        format: "WHMSK".into(),
        version: 1,
        nx: g.nx,
        ny: g.ny,
        nz: g.nz,
        dx: g.dx,
        dy: g.dy,
        dz: g.dz,
        origin: g.origin,
        components: vec!["label".into()],
    };
    let mut payload = Vec::with_capacity(mask.labels.len() * 4);
    for l in &mask.labels {
        payload.extend_from_slice(&l.to_le_bytes());
    }
    header::write(path.as_ref(), &h, &payload)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelOptions {
    /// Seeds traced per sample; extra seeds are jittered within a quarter cell.
    pub seeds_per_cell: usize,
    /// Trace step as a fraction of the smallest grid spacing.
    pub step_fraction: f64,
    /// Trace length limit as a multiple of the box perimeter sum.
    pub length_factor: f64,
    pub eps_null: f64,
}

impl Default for LabelOptions {
    fn default() -> Self {
        Self { seeds_per_cell: 1, step_fraction: 1.0, length_factor: 4.0, eps_null: DEFAULT_EPS_NULL }
    }
}

#[derive(Debug, Clone)]
pub struct LabelOutcome {
    pub mask: RegionMask,
    /// Number of closed connected components.
    pub closed_regions: usize,
    pub undetermined_fraction: f64,
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Connectivity of the field line through `p`, from both of its ends.
pub fn classify_point(tracer: &Tracer, p: Vec3, opts: &TraceOptions) -> Connectivity {
    let fwd = tracer.trace(p, opts);
    let bwd = tracer.trace(p, &opts.backward());
    let (Ok(f), Ok(b)) = (fwd, bwd) else {
        return Connectivity::Undetermined;
    };
    match (f.reason, b.reason) {
        (Termination::ExitTop, _) | (_, Termination::ExitTop) => Connectivity::Open,
        (Termination::ExitBottom, Termination::ExitBottom) => Connectivity::Closed,
        _ => Connectivity::Undetermined,
    }
}

/// Label every sample as open (reaches the top plane), a closed component
/// (both ends on the bottom plane) or undetermined.
///
/// Open samples get label 0 and closed components `1..`, numbered in
/// sample order; with no open samples the closed components start at 0.
pub fn label_open_closed(field: &VectorField3, opts: &LabelOptions) -> Result<LabelOutcome> {
    let g = field.grid;
    if opts.seeds_per_cell == 0 || !(opts.step_fraction > 0.0) {
        return Err(Error::InvalidInput("need at least one seed and a positive step".into()));
    }
    let step = opts.step_fraction * g.min_spacing();
    let extent = (g.nx - 1) as f64 * g.dx + (g.ny - 1) as f64 * g.dy + g.height();
    let max_steps = (opts.length_factor * extent / step).ceil() as usize;
    let mut topts = TraceOptions::new(step, max_steps);
    topts.eps_null = opts.eps_null;
    let tracer = Tracer::new(field, opts.eps_null);
    let lo = g.origin;
    let hi = g.upper();

    let class: Vec<Connectivity> = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j, k) = g.unindex(idx);
            let p = g.position(i, j, k);
            let mut c = classify_point(&tracer, p, &topts);
            for s in 1..opts.seeds_per_cell {
                if c == Connectivity::Undetermined {
                    break;
                }
                let off = [
                    (radical_inverse(s, 2) - 0.5) * 0.5 * g.dx,
                    (radical_inverse(s, 3) - 0.5) * 0.5 * g.dy,
                    (radical_inverse(s, 5) - 0.5) * 0.5 * g.dz,
                ];
                let mut q = p;
                for a in 0..3 {
                    q[a] = (q[a] + off[a]).clamp(lo[a], hi[a]);
                }
                if classify_point(&tracer, q, &topts) != c {
                    c = Connectivity::Undetermined;
                }
            }
            c
        })
        .collect();

    let any_open = class.contains(&Connectivity::Open);
    let first_closed = if any_open { 1 } else { 0 };
    let mut labels: Vec<i32> = class
        .iter()
        .map(|c| match c {
            Connectivity::Open => 0,
            _ => EXCLUDED,
        })
        .collect();
    let mut next = first_closed;
    let mut queue = VecDeque::new();
    for start in 0..g.len() {
        if class[start] != Connectivity::Closed || labels[start] != EXCLUDED {
            continue;
        }
        labels[start] = next;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            let (i, j, k) = g.unindex(idx);
            let mut visit = |n: usize| {
                if class[n] == Connectivity::Closed && labels[n] == EXCLUDED {
                    labels[n] = next;
                    queue.push_back(n);
                }
            };
            if i > 0 {
                visit(g.index(i - 1, j, k));
            }
            if i + 1 < g.nx {
                visit(g.index(i + 1, j, k));
            }
            if j > 0 {
                visit(g.index(i, j - 1, k));
            }
            if j + 1 < g.ny {
                visit(g.index(i, j + 1, k));
            }
            if k > 0 {
                visit(g.index(i, j, k - 1));
            }
            if k + 1 < g.nz {
                visit(g.index(i, j, k + 1));
            }
        }
        next += 1;
    }
    let closed_regions = (next - first_closed) as usize;
    let undetermined = class.iter().filter(|&&c| c == Connectivity::Undetermined).count();
    if undetermined > 0 {
        log::info!("{undetermined} of {} samples undetermined", g.len());
    }
    Ok(LabelOutcome {
        mask: RegionMask::new(g, labels)?,
        closed_regions,
        undetermined_fraction: undetermined as f64 / g.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::uniform_vertical;

    fn grid() -> Grid3 {
        Grid3::spanning([4, 3, 5], [0.0; 3], [1.0, 1.0, 2.0]).unwrap()
    }

    #[test]
    fn uniform_field_is_all_open() {
        let out = label_open_closed(&uniform_vertical(grid(), 1.0), &LabelOptions::default()).unwrap();
        assert!(out.mask.labels.iter().all(|&l| l == 0));
        assert_eq!(out.mask.label_count(), 1);
        assert_eq!(out.closed_regions, 0);
        assert_eq!(out.undetermined_fraction, 0.0);
    }

    #[test]
    fn non_contiguous_labels_are_rejected() {
        let g = grid();
        let mut l = vec![0; g.len()];
        l[3] = 2;
        let e = RegionMask::new(g, l).unwrap_err();
        assert!(e.to_string().contains("non-contiguous labels"));
        assert!(RegionMask::new(g, vec![0; 5]).is_err());
    }

    #[test]
    fn mask_round_trip() {
        let g = grid();
        let labels: Vec<i32> = (0..g.len()).map(|i| (i % 3) as i32 - 1).collect();
        let m = RegionMask::new(g, labels).unwrap();
        assert_eq!(m.label_count(), 2);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.whmsk");
        save_mask(&m, &p).unwrap();
        assert_eq!(load_mask(&p).unwrap(), m);
    }

    #[test]
    fn volume_uses_trapezoid_weights() {
        let g = grid();
        let m = RegionMask::new(g, vec![0; g.len()]).unwrap();
        assert!((m.volume(0) - 12.0 * (1.0 / 3.0) * 0.5 * 2.0).abs() < 1e-12);
    }
}
