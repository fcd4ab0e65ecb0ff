#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use winding_helicity::grid::{Grid3, VectorField3};
use winding_helicity::labeling::RegionMask;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cube(n: usize, half: f64, h: f64) -> Grid3 {
    Grid3::spanning([n, n, n], [-half, -half, 0.0], [half, half, h]).unwrap()
}

/// Curl of a random sum of Fourier modes of a vector potential; solenoidal
/// by construction. A mean vertical field keeps `B_z` mostly nonzero.
pub fn random_solenoidal(grid: Grid3, rng: &mut impl Rng, modes: usize, mean_bz: f64) -> VectorField3 {
    let span = grid.upper();
    let size = [
        span[0] - grid.origin[0],
        span[1] - grid.origin[1],
        span[2] - grid.origin[2],
    ];
    let mut terms = Vec::with_capacity(modes);
    for _ in 0..modes {
        let k = [
            2.0 * PI * rng.gen_range(-2i32..=2) as f64 / size[0],
            2.0 * PI * rng.gen_range(-2i32..=2) as f64 / size[1],
            2.0 * PI * rng.gen_range(0i32..=2) as f64 / size[2],
        ];
        let a = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let phase = rng.gen_range(0.0..2.0 * PI);
        // curl(a sin(k.x + phase)) = (k x a) cos(k.x + phase)
        let c = [k[1] * a[2] - k[2] * a[1], k[2] * a[0] - k[0] * a[2], k[0] * a[1] - k[1] * a[0]];
        terms.push((k, c, phase));
    }
    VectorField3::from_fn(grid, move |p| {
        let mut b = [0.0, 0.0, mean_bz];
        for (k, c, phase) in &terms {
            let arg = k[0] * p[0] + k[1] * p[1] + k[2] * p[2] + phase;
            let cs = arg.cos();
            for i in 0..3 {
                b[i] += 0.2 * c[i] * cs;
            }
        }
        b
    })
}

/// Every sample gets one of `0..count`, with each label used at least once.
pub fn random_mask(grid: Grid3, rng: &mut impl Rng, count: i32) -> RegionMask {
    let mut labels: Vec<i32> = (0..grid.len()).map(|_| rng.gen_range(0..count)).collect();
    for l in 0..count {
        labels[l as usize] = l;
    }
    RegionMask::new(grid, labels).unwrap()
}

/// Naive all-pairs sum of `B(x) . (B(y) x r) / |r|^2` over one slice,
/// split by label, with plain `f64` accumulation.
pub fn slice_pairs_by_label(
    pts: &[[f64; 2]],
    b: &[[f64; 3]],
    labels: &[i32],
    count: usize,
) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; count]; count];
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            if i == j || labels[i] < 0 || labels[j] < 0 {
                continue;
            }
            let r = [pts[i][0] - pts[j][0], pts[i][1] - pts[j][1], 0.0];
            let by = b[j];
            let c = [by[1] * r[2] - by[2] * r[1], by[2] * r[0] - by[0] * r[2], by[0] * r[1] - by[1] * r[0]];
            let k = (b[i][0] * c[0] + b[i][1] * c[1] + b[i][2] * c[2]) / (r[0] * r[0] + r[1] * r[1]);
            out[labels[i] as usize][labels[j] as usize] += k;
        }
    }
    out
}
