//! Uniform lattice covering the closed domain plus an exterior halo.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Face, NodeClass, Point};
use crate::math;

/// Node lattice aligned with the domain faces.
///
/// Nodes are stored row-major (`x` fastest). The halo extends `halo` cells
/// beyond every face, so jumps of length up to `halo * h` from any node of
/// the closed domain land on a stored node.
#[derive(Debug, Clone)]
pub struct Lattice {
    domain: Domain,
    h: f64,
    halo: usize,
    origin: Point,
    shape: [usize; 2],
    classes: Vec<NodeClass>,
    active: Vec<usize>,
    active_lo: [usize; 2],
    active_hi: [usize; 2],
}

impl Lattice {
    /// `halo_radius` is rounded up to a whole number of cells (at least one).
    pub fn new(domain: &Domain, h: f64, halo_radius: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidResolution(format!("spacing must be positive, got {h}")));
        }
        let dim = domain.dim();
        let mut cells = [0usize; 2];
        for (axis, c) in cells.iter_mut().enumerate().take(dim) {
            let ratio = domain.side(axis) / h;
            let n = math::round(ratio);
            if n < 2.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
                return Err(Error::InvalidResolution(format!(
                    "side {} on axis {axis} is not a multiple of h = {h} (need at least 2 cells)",
                    domain.side(axis)
                )));
            }
            *c = n as usize;
        }
        let halo = (-math::floor(-(halo_radius / h - 1e-9))).max(1.0) as usize;
        let mut shape = [1usize; 2];
        let mut origin = [0.0; 2];
        let mut active_lo = [0usize; 2];
        let mut active_hi = [0usize; 2];
        for axis in 0..dim {
            shape[axis] = cells[axis] + 1 + 2 * halo;
            origin[axis] = domain.lower()[axis] - halo as f64 * h;
            active_lo[axis] = halo;
            active_hi[axis] = halo + cells[axis];
        }
        let mut lattice = Lattice {
            domain: domain.clone(),
            h,
            halo,
            origin,
            shape,
            classes: Vec::new(),
            active: Vec::new(),
            active_lo,
            active_hi,
        };
        let n = shape[0] * shape[1];
        let mut classes = Vec::with_capacity(n);
        let mut active = Vec::new();
        for idx in 0..n {
            let [i, j] = lattice.multi_index(idx);
            let inside_box = (0..dim).all(|a| {
                let k = if a == 0 { i } else { j };
                k >= active_lo[a] && k <= active_hi[a]
            });
            let on_face = (0..dim).any(|a| {
                let k = if a == 0 { i } else { j };
                k == active_lo[a] || k == active_hi[a]
            });
            let class = if !inside_box {
                NodeClass::Exterior
            } else if on_face {
                NodeClass::BoundaryTrace
            } else {
                NodeClass::Interior
            };
            if class != NodeClass::Exterior {
                active.push(idx);
            }
            classes.push(class);
        }
        lattice.classes = classes;
        lattice.active = active;
        Ok(lattice)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Halo width in cells.
    pub fn halo(&self) -> usize {
        self.halo
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        [idx % self.shape[0], idx / self.shape[0]]
    }

    pub fn index(&self, ij: [usize; 2]) -> usize {
        ij[0] + self.shape[0] * ij[1]
    }

    pub fn node(&self, idx: usize) -> Point {
        let [i, j] = self.multi_index(idx);
        let mut p = [self.origin[0] + i as f64 * self.h, 0.0];
        if self.dim() == 2 {
            p[1] = self.origin[1] + j as f64 * self.h;
        }
        p
    }

    pub fn class(&self, idx: usize) -> NodeClass {
        self.classes[idx]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.classes
    }

    /// Nodes of the closed domain (interior and boundary), in storage order.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Inclusive index box of the active nodes.
    pub fn active_box(&self) -> ([usize; 2], [usize; 2]) {
        (self.active_lo, self.active_hi)
    }

    /// Neighbor of `idx` displaced by `d` cells, if it is stored.
    #[inline]
    pub fn offset(&self, idx: usize, d: [isize; 2]) -> Option<usize> {
        let [i, j] = self.multi_index(idx);
        let ni = i as isize + d[0];
        let nj = j as isize + d[1];
        if ni < 0 || nj < 0 || ni >= self.shape[0] as isize || nj >= self.shape[1] as isize {
            return None;
        }
        Some(self.index([ni as usize, nj as usize]))
    }

    /// Index of the node at `x`, if `x` is a lattice node (to 1e-9 h).
    pub fn locate(&self, x: &Point) -> Option<usize> {
        let mut ij = [0usize; 2];
        for axis in 0..self.dim() {
            let r = (x[axis] - self.origin[axis]) / self.h;
            let k = math::round(r);
            if (r - k).abs() > 1e-9 || k < 0.0 || k >= self.shape[axis] as f64 {
                return None;
            }
            ij[axis] = k as usize;
        }
        Some(self.index(ij))
    }

    /// Lattice node at the midpoint of a face (rounded down to a node in 2-D).
    pub fn face_node(&self, face: Face) -> usize {
        let mut ij = [0usize; 2];
        for axis in 0..self.dim() {
            ij[axis] = if axis == face.axis {
                match face.side {
                    crate::geometry::Side::Lower => self.active_lo[axis],
                    crate::geometry::Side::Upper => self.active_hi[axis],
                }
            } else {
                (self.active_lo[axis] + self.active_hi[axis]) / 2
            };
        }
        self.index(ij)
    }

    /// Outermost halo nodes: the samples whose values stand in for the
    /// exterior datum beyond the truncation radius.
    pub fn far_samples(&self) -> Vec<usize> {
        if self.dim() == 1 {
            return alloc::vec![0, self.shape[0] - 1];
        }
        let (nx, ny) = (self.shape[0], self.shape[1]);
        let mut out = Vec::new();
        for idx in 0..self.len() {
            let [i, j] = self.multi_index(idx);
            if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
                out.push(idx);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_lattice_layout() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let l = Lattice::new(&d, 0.25, 0.5).unwrap();
        assert_eq!(l.halo(), 2);
        assert_eq!(l.shape(), [13, 1]);
        assert_eq!(l.active().len(), 9);
        assert_eq!(l.node(0), [-1.5, 0.0]);
        assert_eq!(l.class(2), NodeClass::BoundaryTrace);
        assert_eq!(l.class(3), NodeClass::Interior);
        assert_eq!(l.class(1), NodeClass::Exterior);
        assert_eq!(l.class(10), NodeClass::BoundaryTrace);
        assert_eq!(l.locate(&[0.0, 0.0]), Some(6));
        assert_eq!(l.locate(&[0.1, 0.0]), None);
        assert_eq!(l.far_samples(), alloc::vec![0, 12]);
    }

    #[test]
    fn classes_agree_with_signed_distance() {
        let d = Domain::rectangle([-1.0, 0.0], [1.0, 1.0]).unwrap();
        let h = 0.125;
        let l = Lattice::new(&d, h, 0.3).unwrap();
        for idx in 0..l.len() {
            assert_eq!(l.class(idx), d.classify(&l.node(idx), h), "node {:?}", l.node(idx));
        }
        assert_eq!(l.active().len(), 17 * 9);
    }

    #[test]
    fn rejects_misaligned_spacing() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        assert!(Lattice::new(&d, 0.3, 1.0).is_err());
        assert!(Lattice::new(&d, 0.0, 1.0).is_err());
        assert!(Lattice::new(&d, 0.6, 1.0).is_err());
    }

    #[test]
    fn halo_covers_the_radius() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        let l = Lattice::new(&d, 0.1, 0.35).unwrap();
        assert_eq!(l.halo(), 4);
        let l = Lattice::new(&d, 0.1, 0.4).unwrap();
        assert_eq!(l.halo(), 4);
    }
}
