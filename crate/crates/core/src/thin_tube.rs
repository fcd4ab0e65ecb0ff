//! Thin-tube closed forms: self helicity, mutual helicity and the arch
//! footpoint-angle formula.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fieldline::{partition_monotone, Polyline3};
use crate::geom::{cross2, sub2, Vec2};
use crate::winding::{wrap_angle, winding_general, AngleValue, WindingOptions, WindingResult};

#[derive(Debug, Clone, PartialEq)]
pub struct ThinTube {
    pub axis: Polyline3,
    pub flux: f64,
    /// Internal rotation rate of field lines about the axis, radians per
    /// unit height.
    pub twist: f64,
}

impl ThinTube {
    pub fn new(axis: Polyline3, flux: f64) -> Result<Self> {
        if !flux.is_finite() {
            return Err(Error::InvalidInput("tube flux must be finite".into()));
        }
        Ok(Self { axis, flux, twist: 0.0 })
    }

    pub fn with_twist(mut self, twist: f64) -> Self {
        self.twist = twist;
        self
    }
}

/// `L_self * flux^2` with `L_self = twist * dz / 2 pi`.
///
/// Axis writhe is not included, so this is exact only for straight axes.
pub fn self_helicity_thin(tube: &ThinTube) -> Result<f64> {
    let segs = partition_monotone(&tube.axis);
    let [s] = segs.as_slice() else {
        return Err(Error::Regime(
            "axis is not monotone in z; use the gridded decomposition instead".into(),
        ));
    };
    if s.sigma == 0 {
        return Err(Error::Regime("axis is horizontal".into()));
    }
    let dz = s.z_max - s.z_min;
    Ok(tube.twist * dz / (2.0 * PI) * tube.flux * tube.flux)
}

/// `L * flux_i * flux_j` with `L` the generalized winding of the axes.
pub fn mutual_helicity_thin(a: &ThinTube, b: &ThinTube) -> Result<(f64, WindingResult)> {
    let w = winding_general(&a.axis, &b.axis, &WindingOptions::default())?;
    Ok((w.value * a.flux * b.flux, w))
}

/// Footpoint angles of a pair of arches.
///
/// `nu` is the signed sweep, seen from the positive footpoint of `a`,
/// traced by the footprint of `b` as it runs from its positive to its
/// negative footpoint, with sign reversed; `rho` is the same seen from the
/// negative footpoint of `a`. For arches that do not cross in projection
/// the mutual helicity is `(rho - nu) flux_a flux_b / 2 pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArchAngles {
    pub nu: f64,
    pub rho: f64,
}

fn segments_touch(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = cross2(sub2(q2, q1), sub2(p1, q1));
    let d2 = cross2(sub2(q2, q1), sub2(p2, q1));
    let d3 = cross2(sub2(p2, p1), sub2(q1, p1));
    let d4 = cross2(sub2(p2, p1), sub2(q2, p1));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Vec2, b: Vec2, p: Vec2, d: f64| {
        d == 0.0
            && p[0] >= a[0].min(b[0])
            && p[0] <= a[0].max(b[0])
            && p[1] >= a[1].min(b[1])
            && p[1] <= a[1].max(b[1])
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn sweep_from(center: Vec2, from: Vec2, to: Vec2) -> Result<f64> {
    let a = AngleValue::from_vector(sub2(from, center))?;
    let b = AngleValue::from_vector(sub2(to, center))?;
    Ok(wrap_angle(b.radians() - a.radians()))
}

pub fn arch_angles(a_plus: Vec2, a_minus: Vec2, b_plus: Vec2, b_minus: Vec2) -> Result<ArchAngles> {
    let pts = [a_plus, a_minus, b_plus, b_minus];
    for i in 0..4 {
        for j in i + 1..4 {
            if pts[i] == pts[j] {
                return Err(Error::CoincidentPoints(format!("footpoints {i} and {j} coincide")));
            }
        }
    }
    if segments_touch(a_plus, a_minus, b_plus, b_minus) {
        return Err(Error::Regime("arches cross in projection".into()));
    }
    Ok(ArchAngles {
        nu: -sweep_from(a_plus, b_plus, b_minus)?,
        rho: -sweep_from(a_minus, b_plus, b_minus)?,
    })
}

/// `(rho - nu) flux_i flux_j / 2 pi`.
pub fn arch_mutual_helicity(angles: &ArchAngles, flux_i: f64, flux_j: f64) -> f64 {
    (angles.rho - angles.nu) * flux_i * flux_j / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vertical(p: Vec2, h: f64) -> Polyline3 {
        Polyline3::new(vec![[p[0], p[1], 0.0], [p[0], p[1], h]]).unwrap()
    }

    #[test]
    fn self_helicity_examples() {
        let t = ThinTube::new(vertical([0.0, 0.0], 1.0), 1.0).unwrap();
        assert_eq!(self_helicity_thin(&t).unwrap(), 0.0);
        let t = t.with_twist(2.0 * PI);
        assert!((self_helicity_thin(&t).unwrap() - 1.0).abs() < 1e-15);
        let t2 = ThinTube { flux: 2.0, ..t };
        assert!((self_helicity_thin(&t2).unwrap() - 4.0).abs() < 1e-14);
        let bent = Polyline3::new(vec![[0.0; 3], [1.0, 0.0, 1.0], [2.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(self_helicity_thin(&ThinTube::new(bent, 1.0).unwrap()), Err(Error::Regime(_))));
    }

    #[test]
    fn parallel_axes_do_not_wind() {
        let a = ThinTube::new(vertical([0.0, 0.0], 1.0), 1.0).unwrap();
        let b = ThinTube::new(vertical([1.0, 0.0], 1.0), 3.0).unwrap();
        assert_eq!(mutual_helicity_thin(&a, &b).unwrap().0, 0.0);
    }

    #[test]
    fn worked_arch_example() {
        let ang = arch_angles([0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 1.0]).unwrap();
        assert!((ang.nu + (1.0f64).atan2(3.0)).abs() < 1e-15);
        assert!((ang.rho + (1.0f64).atan2(2.0)).abs() < 1e-15);
        let h = arch_mutual_helicity(&ang, 1.0, 1.0);
        assert!((h - ((1.0f64).atan2(3.0) - (1.0f64).atan2(2.0)) / (2.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn collinear_arches_have_zero_angles() {
        let ang = arch_angles([0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]).unwrap();
        assert_eq!((ang.nu, ang.rho), (0.0, 0.0));
        assert_eq!(arch_mutual_helicity(&ang, 1.0, 1.0), 0.0);
    }

    #[test]
    fn crossing_and_degenerate_arches_are_rejected() {
        assert!(matches!(
            arch_angles([0.0, 0.0], [2.0, 0.0], [1.0, 1.0], [1.0, -1.0]),
            Err(Error::Regime(_))
        ));
        assert!(arch_angles([0.0, 0.0], [2.0, 0.0], [1.0, 0.0], [1.0, 1.0]).is_err());
        assert!(arch_angles([0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [2.0, 1.0]).is_err());
    }

    #[test]
    fn direct_formula() {
        let h = arch_mutual_helicity(&ArchAngles { nu: 0.0, rho: PI }, 1.0, 1.0);
        assert!((h - 0.5).abs() < 1e-16);
    }
}
