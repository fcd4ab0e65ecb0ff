mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use winding_helicity::fieldline::Polyline3;
use winding_helicity::flux::{flux_decompose, flux_total, PlanarFrame, PlanarSeries, PlaneGrid};
use winding_helicity::grid::VectorField3;
use winding_helicity::helicity::{decompose, helicity_gauge_form, helicity_pairwise_form};
use winding_helicity::labeling::RegionMask;
use winding_helicity::winding::{winding_general, WindingOptions};

use common::{cube, random_mask, random_solenoidal, rng};

fn polyline() -> impl Strategy<Value = Polyline3> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.0f64..1.0), 2..8)
        .prop_filter_map("degenerate", |v| Polyline3::from_points(v.into_iter().map(|(x, y, z)| [x, y, z])).ok())
}

fn moved(c: &Polyline3, angle: f64, shift: [f64; 3]) -> Polyline3 {
    let (s, co) = angle.sin_cos();
    Polyline3::from_points(
        c.vertices()
            .iter()
            .map(|p| [co * p[0] - s * p[1] + shift[0], s * p[0] + co * p[1] + shift[1], p[2] + shift[2]]),
    )
    .unwrap()
}

fn field(seed: u64, n: usize) -> VectorField3 {
    random_solenoidal(cube(n, 1.0, 1.0), &mut rng(seed), 4, 1.0)
}

/// Same samples re-indexed under `(x, y) -> (-y, x)` on a centered square grid.
fn quarter_turn(f: &VectorField3) -> VectorField3 {
    let g = f.grid;
    let mut out = VectorField3::zeros(g);
    for k in 0..g.nz {
        for j in 0..g.ny {
            for i in 0..g.nx {
                let src = g.index(i, j, k);
                let dst = g.index(g.nx - 1 - j, i, k);
                out.bx[dst] = -f.by[src];
                out.by[dst] = f.bx[src];
                out.bz[dst] = f.bz[src];
            }
        }
    }
    out
}

/// Same samples under `x -> -x`.
fn mirrored(f: &VectorField3) -> VectorField3 {
    let g = f.grid;
    let mut out = VectorField3::zeros(g);
    for k in 0..g.nz {
        for j in 0..g.ny {
            for i in 0..g.nx {
                let src = g.index(i, j, k);
                let dst = g.index(g.nx - 1 - i, j, k);
                out.bx[dst] = -f.bx[src];
                out.by[dst] = f.by[src];
                out.bz[dst] = f.bz[src];
            }
        }
    }
    out
}

fn series(seed: u64) -> PlanarSeries {
    use rand::Rng;
    let mut r = rng(seed);
    let plane = PlaneGrid::spanning([6, 5], [-1.0, -1.0], [1.0, 1.0]).unwrap();
    let n = plane.len();
    let frames: Vec<PlanarFrame> = (0..4)
        .map(|_| PlanarFrame {
            bz: (0..n).map(|_| r.gen_range(-1.0..1.0)).collect(),
            w: (0..n)
                .map(|_| r.gen_bool(0.9).then(|| [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)]))
                .collect(),
        })
        .collect();
    let labels = (0..4).map(|_| (0..n).map(|c| (c % 4) as i32 - 1).collect()).collect();
    PlanarSeries::new(plane, vec![0.0, 0.25, 0.625, 1.0], frames, Some(labels)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn winding_is_invariant_under_rigid_horizontal_motion(
        a in polyline(),
        b in polyline(),
        angle in -PI..PI,
        dx in -3.0f64..3.0,
        dy in -3.0f64..3.0,
        dz in -0.5f64..0.5,
    ) {
        let opts = WindingOptions::default();
        let Ok(l) = winding_general(&a, &b, &opts) else { return Ok(()) };
        let shift = [dx, dy, dz];
        let m = winding_general(&moved(&a, angle, shift), &moved(&b, angle, shift), &opts).unwrap();
        prop_assert!((m.value - l.value).abs() <= 1e-9 * (1.0 + l.value.abs()), "{} vs {}", m.value, l.value);
    }

    #[test]
    fn winding_with_a_distant_copy_stays_below_half_a_turn(
        a in polyline(),
        dx in 5.0f64..10.0,
    ) {
        // the separation keeps the horizontal offset in one half-plane
        let b = moved(&a, 0.0, [dx, 0.0, 0.0]);
        let l = winding_general(&a, &b, &WindingOptions::default()).unwrap();
        prop_assert!(l.value.abs() < 0.5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn helicity_is_quadratic_in_the_field(seed in any::<u64>(), c in 0.1f64..4.0) {
        let f = field(seed, 8);
        let h = helicity_pairwise_form(&f);
        prop_assert_eq!(helicity_pairwise_form(&f.scaled(-1.0)).value, h.value);
        let hc = helicity_pairwise_form(&f.scaled(c));
        prop_assert!((hc.value - c * c * h.value).abs() <= 1e-12 * c * c * h.magnitude);
    }

    #[test]
    fn helicity_forms_agree_on_random_fields(seed in any::<u64>()) {
        let f = field(seed, 8);
        let pw = helicity_pairwise_form(&f);
        prop_assert!(pw.relative_difference(helicity_gauge_form(&f)) <= 1e-12);
    }

    #[test]
    fn helicity_is_rotation_invariant_and_mirror_odd(seed in any::<u64>()) {
        let f = field(seed, 8);
        let h = helicity_pairwise_form(&f);
        let r = helicity_pairwise_form(&quarter_turn(&f));
        prop_assert!(h.relative_difference(r.value) <= 1e-13);
        let m = helicity_pairwise_form(&mirrored(&f));
        prop_assert!(h.relative_difference(-m.value) <= 1e-13);
    }

    #[test]
    fn relabeling_permutes_the_decomposition(seed in any::<u64>()) {
        let f = field(seed, 8);
        let mask = random_mask(f.grid, &mut rng(seed ^ 1), 3);
        let rep = decompose(&f, &mask).unwrap();
        let perm = [2, 0, 1];
        let relabeled = RegionMask::new(f.grid, mask.labels.iter().map(|&l| perm[l as usize]).collect()).unwrap();
        let p = decompose(&f, &relabeled).unwrap();
        prop_assert_eq!(p.total, rep.total);
        for i in 0..3 {
            prop_assert_eq!(p.self_helicity[perm[i] as usize], rep.self_helicity[i]);
            for j in 0..3 {
                prop_assert_eq!(p.mutual[perm[i] as usize][perm[j] as usize], rep.mutual[i][j]);
            }
        }
    }

    #[test]
    fn merging_labels_folds_mutual_into_self(seed in any::<u64>()) {
        let f = field(seed, 8);
        let mask = random_mask(f.grid, &mut rng(seed ^ 2), 3);
        let rep = decompose(&f, &mask).unwrap();
        let merged = RegionMask::new(f.grid, mask.labels.iter().map(|&l| l.min(1)).collect()).unwrap();
        let m = decompose(&f, &merged).unwrap();
        let tol = 1e-12 * rep.magnitude;
        let folded = rep.self_helicity[1] + rep.self_helicity[2] + rep.mutual_total(1, 2);
        prop_assert!((m.self_helicity[1] - folded).abs() <= tol);
        prop_assert!((m.mutual_total(0, 1) - rep.mutual_total(0, 1) - rep.mutual_total(0, 2)).abs() <= tol);
        prop_assert!((m.self_helicity[0] - rep.self_helicity[0]).abs() <= tol);
    }

    #[test]
    fn flux_is_odd_under_time_reversal(seed in any::<u64>()) {
        let s = series(seed);
        let rep = flux_decompose(&s).unwrap();
        let rev = flux_decompose(&s.time_reversed()).unwrap();
        prop_assert_eq!(rev.total, -rep.total);
        prop_assert_eq!(flux_total(&s.time_reversed()).value, -flux_total(&s).value);
        prop_assert!(rep.reconstruction_error() <= 1e-12);
    }

    #[test]
    fn flux_is_even_in_the_normal_field(seed in any::<u64>()) {
        let s = series(seed);
        let mut flipped = s.clone();
        for f in &mut flipped.frames {
            f.bz.iter_mut().for_each(|b| *b = -*b);
        }
        prop_assert_eq!(flux_total(&flipped).value, flux_total(&s).value);
    }
}
