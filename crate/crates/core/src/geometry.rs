//! Spatial domains: intervals and axis-aligned rectangles.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// A point of the plane. One-dimensional problems only use the first entry.
pub type Point = [f64; 2];

/// Classification of a lattice node relative to the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Interior,
    BoundaryTrace,
    Exterior,
}

/// Which end of an axis a face sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Lower,
    Upper,
}

/// A face of the box: the set `{x_axis = lower_axis}` or `{x_axis = upper_axis}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Face {
    pub axis: usize,
    pub side: Side,
}

impl Face {
    /// Unit normal pointing into the domain.
    pub fn inward_normal(&self) -> Point {
        let mut n = [0.0; 2];
        n[self.axis] = match self.side {
            Side::Lower => 1.0,
            Side::Upper => -1.0,
        };
        n
    }

    pub fn label(&self) -> &'static str {
        match (self.axis, self.side) {
            (0, Side::Lower) => "x_lower",
            (0, Side::Upper) => "x_upper",
            (_, Side::Lower) => "y_lower",
            (_, Side::Upper) => "y_upper",
        }
    }
}

/// Open interval or open axis-aligned rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    dim: usize,
    lower: Point,
    upper: Point,
    collar: f64,
    corner_radius: f64,
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(1, [a, 0.0], [b, 0.0])
    }

    pub fn rectangle(lower: Point, upper: Point) -> Result<Self> {
        Self::new(2, lower, upper)
    }

    /// Builds a domain with the default collar (a quarter of the smallest side)
    /// and no corner exclusion zone.
    pub fn new(dim: usize, lower: Point, upper: Point) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidDomain(format!("dimension must be 1 or 2, got {dim}")));
        }
        for i in 0..dim {
            if !(lower[i].is_finite() && upper[i].is_finite()) {
                return Err(Error::InvalidDomain(format!("non-finite corner on axis {i}")));
            }
            if lower[i] >= upper[i] {
                return Err(Error::InvalidDomain(format!(
                    "lower corner {} not below upper corner {} on axis {i}",
                    lower[i], upper[i]
                )));
            }
        }
        let mut d = Domain { dim, lower, upper, collar: 0.0, corner_radius: 0.0 };
        d.collar = 0.25 * d.min_side();
        Ok(d)
    }

    /// Sets the width of the collar `{|d| < delta0}` where `d` is smooth.
    pub fn with_collar(mut self, collar: f64) -> Result<Self> {
        if !(collar > 0.0 && collar <= 0.5 * self.min_side()) {
            return Err(Error::InvalidDomain(format!(
                "collar {collar} must lie in (0, {}]",
                0.5 * self.min_side()
            )));
        }
        self.collar = collar;
        Ok(self)
    }

    /// Radius around each corner (2-D only) where `Dd` is not evaluated.
    pub fn with_corner_radius(mut self, radius: f64) -> Self {
        self.corner_radius = radius.max(0.0);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> Point {
        self.lower
    }

    pub fn upper(&self) -> Point {
        self.upper
    }

    pub fn collar(&self) -> f64 {
        self.collar
    }

    pub fn corner_radius(&self) -> f64 {
        self.corner_radius
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn min_side(&self) -> f64 {
        (0..self.dim).map(|i| self.side(i)).fold(f64::INFINITY, f64::min)
    }

    pub fn diameter(&self) -> f64 {
        math::sqrt((0..self.dim).map(|i| self.side(i) * self.side(i)).sum())
    }

    pub fn center(&self) -> Point {
        let mut c = [0.0; 2];
        for i in 0..self.dim {
            c[i] = 0.5 * (self.lower[i] + self.upper[i]);
        }
        c
    }

    pub fn faces(&self) -> Vec<Face> {
        let mut faces = Vec::with_capacity(2 * self.dim);
        for axis in 0..self.dim {
            faces.push(Face { axis, side: Side::Lower });
            faces.push(Face { axis, side: Side::Upper });
        }
        faces
    }

    /// Midpoint of a face.
    pub fn face_midpoint(&self, face: Face) -> Point {
        let mut p = self.center();
        p[face.axis] = match face.side {
            Side::Lower => self.lower[face.axis],
            Side::Upper => self.upper[face.axis],
        };
        p
    }

    /// Membership in the open set.
    pub fn contains(&self, x: &Point) -> bool {
        (0..self.dim).all(|i| x[i] > self.lower[i] && x[i] < self.upper[i])
    }

    /// Signed distance to the boundary, nonnegative inside.
    pub fn signed_distance(&self, x: &Point) -> f64 {
        let mut outside = 0.0;
        let mut inside = f64::INFINITY;
        for i in 0..self.dim {
            let below = self.lower[i] - x[i];
            let above = x[i] - self.upper[i];
            let excess = below.max(above).max(0.0);
            outside += excess * excess;
            inside = inside.min(-below).min(-above);
        }
        if outside > 0.0 {
            -math::sqrt(outside)
        } else {
            inside
        }
    }

    /// Distance from `x` to the nearest corner of the rectangle (infinite in 1-D).
    pub fn corner_distance(&self, x: &Point) -> f64 {
        if self.dim < 2 {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        for cx in [self.lower[0], self.upper[0]] {
            for cy in [self.lower[1], self.upper[1]] {
                let dx = x[0] - cx;
                let dy = x[1] - cy;
                best = best.min(math::sqrt(dx * dx + dy * dy));
            }
        }
        best
    }

    /// True when `x` falls inside a corner exclusion zone.
    pub fn in_corner_zone(&self, x: &Point) -> bool {
        self.dim == 2 && self.corner_distance(x) < self.corner_radius
    }

    /// Gradient of the signed distance: the inward unit normal of the nearest face.
    ///
    /// Meaningful for `0 < |d(x)| < delta0` and on the boundary away from corners.
    pub fn distance_gradient(&self, x: &Point) -> Result<Point> {
        if self.in_corner_zone(x) {
            return Err(Error::CornerAmbiguity);
        }
        let scale = 1.0 + (0..self.dim).map(|i| self.side(i)).fold(0.0, f64::max);
        let tol = 1e-12 * scale;
        // Signed distances to each face's supporting hyperplane, positive inside.
        let mut best: Option<(f64, Face)> = None;
        let mut second = f64::INFINITY;
        let mut violated: Option<Face> = None;
        let mut violations = 0;
        for face in self.faces() {
            let s = match face.side {
                Side::Lower => x[face.axis] - self.lower[face.axis],
                Side::Upper => self.upper[face.axis] - x[face.axis],
            };
            if s < 0.0 {
                violations += 1;
                violated = Some(face);
            }
            match best {
                Some((b, _)) if s >= b => second = second.min(s),
                Some((b, _)) => {
                    second = b;
                    best = Some((s, face));
                }
                None => best = Some((s, face)),
            }
        }
        if violations > 1 {
            return Err(Error::CornerAmbiguity);
        }
        if let Some(face) = violated {
            return Ok(face.inward_normal());
        }
        let (b, face) = best.expect("a domain has at least two faces");
        if second - b <= tol {
            return Err(Error::CornerAmbiguity);
        }
        Ok(face.inward_normal())
    }

    /// True iff `x + z` lies outside the open domain, i.e. `z` belongs to `Omega^c - x`.
    pub fn shifted_complement_indicator(&self, x: &Point, z: &Point) -> bool {
        let y = [x[0] + z[0], x[1] + z[1]];
        !self.contains(&y)
    }

    /// Node classification with grid tolerance `h / 2`.
    pub fn classify(&self, x: &Point, h: f64) -> NodeClass {
        let d = self.signed_distance(x);
        let tol = 0.5 * h;
        if d.abs() < tol {
            NodeClass::BoundaryTrace
        } else if d > 0.0 {
            NodeClass::Interior
        } else {
            NodeClass::Exterior
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> Domain {
        Domain::interval(-1.0, 1.0).unwrap()
    }

    fn square() -> Domain {
        Domain::rectangle([-1.0, -1.0], [1.0, 1.0]).unwrap()
    }

    #[test]
    fn signed_distance_examples() {
        assert_eq!(unit().signed_distance(&[0.0, 0.0]), 1.0);
        assert_eq!(unit().signed_distance(&[1.0, 0.0]), 0.0);
        assert!((square().signed_distance(&[0.5, 0.9]) - 0.1).abs() < 1e-15);
        assert!((unit().signed_distance(&[1.5, 0.0]) + 0.5).abs() < 1e-15);
        let outside_corner = square().signed_distance(&[2.0, 2.0]);
        assert!((outside_corner + 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn distance_gradient_examples() {
        assert_eq!(unit().distance_gradient(&[0.9, 0.0]).unwrap(), [-1.0, 0.0]);
        assert_eq!(unit().distance_gradient(&[-0.9, 0.0]).unwrap(), [1.0, 0.0]);
        assert_eq!(square().distance_gradient(&[0.0, 0.95]).unwrap(), [0.0, -1.0]);
        assert_eq!(unit().distance_gradient(&[1.0, 0.0]).unwrap(), [-1.0, 0.0]);
        assert_eq!(unit().distance_gradient(&[1.05, 0.0]).unwrap(), [-1.0, 0.0]);
    }

    #[test]
    fn distance_gradient_rejects_ties_and_corners() {
        assert_eq!(unit().distance_gradient(&[0.0, 0.0]), Err(Error::CornerAmbiguity));
        assert_eq!(square().distance_gradient(&[0.9, 0.9]), Err(Error::CornerAmbiguity));
        let guarded = square().with_corner_radius(0.2);
        assert_eq!(guarded.distance_gradient(&[0.95, 0.9]), Err(Error::CornerAmbiguity));
        assert_eq!(square().distance_gradient(&[0.95, 0.9]).unwrap(), [-1.0, 0.0]);
        assert_eq!(square().distance_gradient(&[1.1, 1.2]), Err(Error::CornerAmbiguity));
    }

    #[test]
    fn shifted_complement_examples() {
        let d = unit();
        assert!(d.shifted_complement_indicator(&[0.0, 0.0], &[2.0, 0.0]));
        assert!(!d.shifted_complement_indicator(&[0.0, 0.0], &[0.5, 0.0]));
        assert!(d.shifted_complement_indicator(&[0.9, 0.0], &[0.2, 0.0]));
    }

    #[test]
    fn invalid_domains() {
        assert!(Domain::interval(1.0, -1.0).is_err());
        assert!(Domain::new(3, [0.0; 2], [1.0; 2]).is_err());
        assert!(unit().with_collar(1.5).is_err());
        assert_eq!(unit().collar(), 0.5);
    }

    #[test]
    fn classification_uses_half_spacing() {
        let d = unit();
        let h = 0.1;
        assert_eq!(d.classify(&[0.0, 0.0], h), NodeClass::Interior);
        assert_eq!(d.classify(&[1.0, 0.0], h), NodeClass::BoundaryTrace);
        assert_eq!(d.classify(&[1.0 + 1e-9, 0.0], h), NodeClass::BoundaryTrace);
        assert_eq!(d.classify(&[1.1, 0.0], h), NodeClass::Exterior);
    }

    proptest! {
        #[test]
        fn signed_distance_is_one_lipschitz(
            x in -3.0f64..3.0, y in -3.0f64..3.0, u in -3.0f64..3.0, v in -3.0f64..3.0,
        ) {
            let d = Domain::rectangle([-1.0, -0.5], [1.0, 0.5]).unwrap();
            let a = d.signed_distance(&[x, y]);
            let b = d.signed_distance(&[u, v]);
            let dist = ((x - u).powi(2) + (y - v).powi(2)).sqrt();
            prop_assert!((a - b).abs() <= dist + 1e-12);
        }

        #[test]
        fn signed_distance_is_reflection_symmetric(x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let d = square();
            prop_assert_eq!(d.signed_distance(&[x, y]), d.signed_distance(&[-x, -y]));
            let i = unit();
            prop_assert_eq!(i.signed_distance(&[x, 0.0]), i.signed_distance(&[-x, 0.0]));
        }

        #[test]
        fn gradient_is_unit_and_matches_finite_differences(
            t in 0.02f64..0.45, s in -0.5f64..0.5, face in 0usize..4,
        ) {
            let d = square();
            // points in the collar, away from the corners
            let x = match face {
                0 => [-1.0 + t, s],
                1 => [1.0 - t, s],
                2 => [s, -1.0 + t],
                _ => [s, 1.0 - t],
            };
            let g = d.distance_gradient(&x).unwrap();
            prop_assert!(((g[0] * g[0] + g[1] * g[1]).sqrt() - 1.0).abs() < 1e-15);
            let h = 1e-4;
            for a in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[a] += h;
                xm[a] -= h;
                let fd = (d.signed_distance(&xp) - d.signed_distance(&xm)) / (2.0 * h);
                prop_assert!((fd - g[a]).abs() < 1e-6);
            }
        }
    }
}
