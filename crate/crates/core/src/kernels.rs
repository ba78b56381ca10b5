//! Jump kernels `K(z) |z|^{-(n + alpha)}` and their lattice quadrature.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::geometry::{Domain, NodeClass, Point};
use crate::math::{self, GL4_NODES, GL4_WEIGHTS, GL8_NODES, GL8_WEIGHTS};

pub type DensityFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// The bounded factor `K` of the jump density.
#[derive(Clone)]
pub enum Profile {
    Constant(f64),
    /// `value` on the closed ball of the given radius, zero outside.
    Indicator { radius: f64, value: f64 },
    /// Radial profile tabulated at increasing radii, linearly interpolated and
    /// extended by the end values.
    Radial { radii: Vec<f64>, values: Vec<f64> },
    Custom(DensityFn),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Profile::Indicator { radius, value } => f
                .debug_struct("Indicator")
                .field("radius", radius)
                .field("value", value)
                .finish(),
            Profile::Radial { radii, .. } => {
                f.debug_struct("Radial").field("samples", &radii.len()).finish()
            }
            Profile::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Kernel {
    order: f64,
    dim: usize,
    profile: Profile,
    k_max: f64,
    ellipticity: Option<(f64, f64)>,
    symmetric: bool,
}

fn check_order_dim(order: f64, dim: usize) -> Result<()> {
    if !(order > 0.0 && order < 2.0) {
        return Err(Error::InvalidKernel(format!("order must lie in (0, 2), got {order}")));
    }
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidKernel(format!("dimension must be 1 or 2, got {dim}")));
    }
    Ok(())
}

impl Kernel {
    /// `K` identically equal to one (the fractional Laplacian up to its
    /// normalising constant).
    pub fn fractional_laplacian(dim: usize, order: f64) -> Result<Self> {
        Self::constant(dim, order, 1.0)
    }

    pub fn constant(dim: usize, order: f64, value: f64) -> Result<Self> {
        check_order_dim(order, dim)?;
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidKernel(format!("constant must be nonnegative, got {value}")));
        }
        Ok(Kernel {
            order,
            dim,
            profile: Profile::Constant(value),
            k_max: value,
            ellipticity: None,
            symmetric: true,
        })
    }

    /// `K = 1` on the ball of radius `radius`.
    pub fn indicator(dim: usize, order: f64, radius: f64) -> Result<Self> {
        check_order_dim(order, dim)?;
        if !(radius > 0.0) {
            return Err(Error::InvalidKernel(format!("indicator radius must be positive, got {radius}")));
        }
        Ok(Kernel {
            order,
            dim,
            profile: Profile::Indicator { radius, value: 1.0 },
            k_max: 1.0,
            ellipticity: None,
            symmetric: true,
        })
    }

    pub fn radial(dim: usize, order: f64, radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_order_dim(order, dim)?;
        if radii.is_empty() || radii.len() != values.len() {
            return Err(Error::InvalidKernel("radial profile needs matching, nonempty columns".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] < 0.0 {
            return Err(Error::InvalidKernel("radial profile radii must increase from >= 0".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidKernel("radial profile values must be finite and >= 0".into()));
        }
        let k_max = values.iter().cloned().fold(0.0, f64::max);
        Ok(Kernel {
            order,
            dim,
            profile: Profile::Radial { radii, values },
            k_max,
            ellipticity: None,
            symmetric: true,
        })
    }

    /// Arbitrary bounded density; `k_max` must bound it and `symmetric`
    /// records whether `K(z) = K(-z)`.
    pub fn custom(dim: usize, order: f64, density: DensityFn, k_max: f64, symmetric: bool) -> Result<Self> {
        check_order_dim(order, dim)?;
        if !(k_max >= 0.0 && k_max.is_finite()) {
            return Err(Error::InvalidKernel(format!("bound must be finite and >= 0, got {k_max}")));
        }
        Ok(Kernel { order, dim, profile: Profile::Custom(density), k_max, ellipticity: None, symmetric })
    }

    /// Declares constants `c1, c2 > 0` with `K(z) >= c2` for `|z| <= c1`.
    pub fn with_ellipticity(mut self, c1: f64, c2: f64) -> Self {
        self.ellipticity = Some((c1, c2));
        self
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn ellipticity(&self) -> Option<(f64, f64)> {
        self.ellipticity
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_zero(&self) -> bool {
        self.k_max == 0.0
    }

    /// The bounded factor `K(z)`.
    pub fn profile_value(&self, z: &Point) -> f64 {
        match &self.profile {
            Profile::Constant(c) => *c,
            Profile::Indicator { radius, value } => {
                if norm(z, self.dim) <= *radius {
                    *value
                } else {
                    0.0
                }
            }
            Profile::Radial { radii, values } => interpolate(radii, values, norm(z, self.dim)),
            Profile::Custom(f) => f(z),
        }
    }

    /// `K(z) |z|^{-(n + alpha)}` for `z != 0`.
    pub fn density(&self, z: &Point) -> Result<f64> {
        let r = norm(z, self.dim);
        if r == 0.0 {
            return Err(Error::OriginSingularity);
        }
        Ok(self.profile_value(z) * math::powf(r, -(self.dim as f64 + self.order)))
    }

    fn sphere_area(&self) -> f64 {
        if self.dim == 1 {
            2.0
        } else {
            2.0 * PI
        }
    }

    /// Upper bound for `int_{|z| > radius} K^alpha(z) dz`.
    pub fn tail_bound(&self, radius: f64) -> f64 {
        let a = self.order;
        let base = self.sphere_area() * math::powf(radius, -a) / a;
        match &self.profile {
            Profile::Constant(c) => c * base,
            Profile::Indicator { radius: rho, value } => {
                if *rho <= radius {
                    0.0
                } else {
                    value * self.sphere_area() * (math::powf(radius, -a) - math::powf(*rho, -a)) / a
                }
            }
            Profile::Radial { radii, values } => {
                let mut sup = interpolate(radii, values, radius);
                for (r, v) in radii.iter().zip(values) {
                    if *r >= radius {
                        sup = sup.max(*v);
                    }
                }
                sup * base
            }
            Profile::Custom(_) => self.k_max * base,
        }
    }

    /// Checks the lower bound `K >= c2` on the ball of radius `c1` by sampling.
    pub fn check_ellipticity(&self) -> Certificate {
        let Some((c1, c2)) = self.ellipticity else {
            return Certificate::new("UE", 0.0, false, "no ellipticity constants declared");
        };
        if !(c1 > 0.0 && c2 > 0.0) {
            return Certificate::new("UE", 0.0, false, "ellipticity constants must be positive");
        }
        let mut min = f64::INFINITY;
        let n_r = 64;
        let n_theta = if self.dim == 1 { 2 } else { 32 };
        for i in 1..=n_r {
            let r = c1 * i as f64 / n_r as f64;
            for k in 0..n_theta {
                let z = if self.dim == 1 {
                    [if k == 0 { r } else { -r }, 0.0]
                } else {
                    let th = 2.0 * PI * k as f64 / n_theta as f64;
                    [r * math::cos(th), r * math::sin(th)]
                };
                min = min.min(self.profile_value(&z));
            }
        }
        Certificate::new(
            "UE",
            min,
            min >= c2,
            format!("min K on |z| <= {c1} is {min:.6e}, required {c2:.6e}"),
        )
    }

    /// Spot-checks `K(z) = K(-z)` on a sample set.
    pub fn symmetric_on_samples(&self) -> bool {
        let n = 200;
        (1..=n).all(|i| {
            let r = 4.0 * i as f64 / n as f64;
            let th = 0.731 * i as f64;
            let z = if self.dim == 1 {
                [r, 0.0]
            } else {
                [r * math::cos(th), r * math::sin(th)]
            };
            let mz = [-z[0], -z[1]];
            self.profile_value(&z) == self.profile_value(&mz)
        })
    }

    /// Representative of the symmetry class of a 2-D offset, so that weights
    /// inherit the kernel's symmetries exactly.
    fn canonical_offset(&self, jx: isize, jy: isize) -> (isize, isize) {
        match self.profile {
            Profile::Custom(_) => {
                if self.symmetric && (jx < 0 || (jx == 0 && jy < 0)) {
                    (-jx, -jy)
                } else {
                    (jx, jy)
                }
            }
            _ => {
                let (a, b) = (jx.abs(), jy.abs());
                (a.max(b), a.min(b))
            }
        }
    }

    /// `int_a^b r^{e} k(r) dr` style cell integral in 1-D, for the cell
    /// `[a, b]` on the side given by `sign`.
    fn cell_integral_1d(&self, a: f64, b: f64, sign: f64, moment: bool) -> f64 {
        let e = if moment { 1.0 - self.order } else { -1.0 - self.order };
        match &self.profile {
            Profile::Constant(c) => c * power_integral(a, b, e),
            Profile::Indicator { radius, value } => {
                let top = b.min(*radius);
                if top <= a {
                    0.0
                } else {
                    value * power_integral(a, top, e)
                }
            }
            _ => {
                let mid = 0.5 * (a + b);
                (b - a) * self.profile_value(&[sign * mid, 0.0]) * math::powf(mid, e)
            }
        }
    }

    /// Tensor Gauss-Legendre integral of `K(z) |z|^{e}` over the square
    /// cell centred at `center` with side `h`.
    fn cell_integral_2d(&self, center: Point, h: f64, e: f64, subdivisions: usize) -> f64 {
        let sub = h / subdivisions as f64;
        let x0 = center[0] - 0.5 * h;
        let y0 = center[1] - 0.5 * h;
        let mut total = 0.0;
        for si in 0..subdivisions {
            for sj in 0..subdivisions {
                let ax = x0 + si as f64 * sub;
                let ay = y0 + sj as f64 * sub;
                for (nx, wx) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
                    for (ny, wy) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
                        let z = [ax + nx * sub, ay + ny * sub];
                        let r = norm(&z, 2);
                        total += wx * wy * self.profile_value(&z) * math::powf(r, e);
                    }
                }
            }
        }
        total * sub * sub
    }

    /// `(1 / 2n) int_{origin cell} |z|^2 K^alpha(z) dz` for the cell `[-h/2, h/2]^n`.
    fn near_moment(&self, h: f64) -> f64 {
        let a = 0.5 * h;
        let q = 2.0 - self.order;
        if self.dim == 1 {
            let side = |sign: f64| -> f64 {
                match &self.profile {
                    Profile::Constant(c) => c * math::powf(a, q) / q,
                    Profile::Indicator { radius, value } => value * math::powf(a.min(*radius), q) / q,
                    _ => {
                        let mut s = 0.0;
                        for (n, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
                            let r = a * math::powf(*n, 1.0 / q);
                            s += w * self.profile_value(&[sign * r, 0.0]);
                        }
                        s * math::powf(a, q) / q
                    }
                }
            };
            0.5 * (side(1.0) + side(-1.0))
        } else {
            // polar coordinates over the eight octants of the square
            let mut total = 0.0;
            for octant in 0..8 {
                let th0 = octant as f64 * PI / 4.0;
                for (nt, wt) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
                    let th = th0 + nt * PI / 4.0;
                    let (c, s) = (math::cos(th), math::sin(th));
                    let reach = a / c.abs().max(s.abs());
                    let mut radial = 0.0;
                    for (nr, wr) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
                        let r = reach * math::powf(*nr, 1.0 / q);
                        radial += wr * self.profile_value(&[r * c, r * s]);
                    }
                    total += wt * (PI / 4.0) * radial * math::powf(reach, q) / q;
                }
            }
            total / 4.0
        }
    }
}

/// Lattice quadrature of the jump measure.
///
/// Offsets `z_j = j h` with `0 < |z_j| <= r_max` carry nonnegative weights.
/// For order below one a weight is the kernel mass of the lattice cell
/// around `z_j` and the origin cell is dropped. For order one and above the
/// weight is the cell's second moment divided by `|z_j|^2`, and the origin
/// cell enters through a second difference with coefficient `near_moment`.
#[derive(Debug, Clone)]
pub struct QuadratureTable {
    dim: usize,
    h: f64,
    r_max: f64,
    order: f64,
    half_width: usize,
    weights: Vec<f64>,
    offsets: Vec<([isize; 2], f64)>,
    near_moment: f64,
    tail_mass: f64,
    tail_radius: f64,
    compensator: Point,
    weight_sum: f64,
}

impl QuadratureTable {
    pub fn build(kernel: &Kernel, h: f64, r_max: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidResolution(format!("spacing must be positive, got {h}")));
        }
        if !(r_max >= 10.0 * h * (1.0 - 1e-12)) {
            return Err(Error::InvalidResolution(format!(
                "truncation radius {r_max} is below 10 h = {}",
                10.0 * h
            )));
        }
        let dim = kernel.dim();
        let order = kernel.order();
        let moment = order >= 1.0;
        let half_width = math::floor(r_max / h + 1e-9) as usize;
        let jw = half_width as isize;
        let side = 2 * half_width + 1;
        let mut weights = alloc::vec![0.0; if dim == 1 { side } else { side * side }];
        let mut offsets = Vec::new();
        if dim == 1 {
            for j in -jw..=jw {
                if j == 0 {
                    continue;
                }
                let aj = j.unsigned_abs() as f64;
                let a = (aj - 0.5) * h;
                let b = (aj + 0.5) * h;
                let sign = if j > 0 { 1.0 } else { -1.0 };
                let mut w = kernel.cell_integral_1d(a, b, sign, moment);
                if moment {
                    w /= (aj * h) * (aj * h);
                }
                weights[(j + jw) as usize] = w;
                if w > 0.0 {
                    offsets.push(([j, 0], w));
                }
            }
        } else {
            let lim = r_max / h + 1e-9;
            let e = if moment { -order } else { -2.0 - order };
            for jy in -jw..=jw {
                for jx in -jw..=jw {
                    if jx == 0 && jy == 0 {
                        continue;
                    }
                    let rr = math::sqrt((jx * jx + jy * jy) as f64);
                    if rr > lim {
                        continue;
                    }
                    let ring = jx.unsigned_abs().max(jy.unsigned_abs());
                    let subdivisions = if ring <= 2 {
                        8
                    } else if ring <= 8 {
                        2
                    } else {
                        1
                    };
                    let (cx, cy) = kernel.canonical_offset(jx, jy);
                    let center = [cx as f64 * h, cy as f64 * h];
                    let mut w = kernel.cell_integral_2d(center, h, e, subdivisions);
                    if moment {
                        w /= rr * rr * h * h;
                    }
                    weights[(jx + jw) as usize + side * (jy + jw) as usize] = w;
                    if w > 0.0 {
                        offsets.push(([jx, jy], w));
                    }
                }
            }
        }
        let tail_radius = if dim == 1 {
            (half_width as f64 + 0.5) * h
        } else {
            r_max - h * core::f64::consts::FRAC_1_SQRT_2
        };
        let tail_mass = kernel.tail_bound(tail_radius);
        let near_moment = if moment { kernel.near_moment(h) } else { 0.0 };
        let mut compensator = [0.0; 2];
        if moment {
            // pairwise so that symmetric weights cancel exactly
            for &(d, w) in &offsets {
                let z = [d[0] as f64 * h, d[1] as f64 * h];
                if norm(&z, dim) > 1.0 {
                    continue;
                }
                let wm = weights[index_of([-d[0], -d[1]], jw, side, dim)];
                if d[0] > 0 || (d[0] == 0 && d[1] > 0) {
                    compensator[0] += (w - wm) * z[0];
                    compensator[1] += (w - wm) * z[1];
                } else if wm == 0.0 {
                    compensator[0] += w * z[0];
                    compensator[1] += w * z[1];
                }
            }
        }
        let weight_sum = offsets.iter().map(|(_, w)| w).sum();
        Ok(QuadratureTable {
            dim,
            h,
            r_max,
            order,
            half_width,
            weights,
            offsets,
            near_moment,
            tail_mass,
            tail_radius,
            compensator,
            weight_sum,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    /// Largest offset index along an axis.
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Offsets with positive weight.
    pub fn offsets(&self) -> &[([isize; 2], f64)] {
        &self.offsets
    }

    #[inline]
    pub fn weight(&self, d: [isize; 2]) -> f64 {
        let jw = self.half_width as isize;
        if d[0].abs() > jw || d[1].abs() > jw || (self.dim == 1 && d[1] != 0) {
            return 0.0;
        }
        self.weights[index_of(d, jw, 2 * self.half_width + 1, self.dim)]
    }

    /// Dense weights for offsets `-J..=J` (1-D only).
    pub fn weights_1d(&self) -> Option<&[f64]> {
        (self.dim == 1).then_some(self.weights.as_slice())
    }

    /// Second-difference coefficient of the origin cell (zero for order < 1).
    pub fn near_moment(&self) -> f64 {
        self.near_moment
    }

    /// Over-estimate of the kernel mass beyond the tabulated offsets.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn tail_radius(&self) -> f64 {
        self.tail_radius
    }

    /// `sum_{|z_j| <= 1} w_j z_j`, the drift produced by the compensator.
    pub fn compensator(&self) -> Point {
        self.compensator
    }

    pub fn uses_compensator(&self) -> bool {
        self.order >= 1.0
    }

    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    /// Diagonal mass of the discrete operator: tabulated weights, tail, and
    /// the near-field second difference.
    pub fn diagonal_mass(&self) -> f64 {
        self.weight_sum + self.tail_mass + 2.0 * self.dim as f64 * self.near_moment / (self.h * self.h)
    }

    /// `sum_{|z_j| >= radius} w_j` (tail excluded).
    pub fn mass_beyond(&self, radius: f64) -> f64 {
        self.offsets
            .iter()
            .filter(|(d, _)| {
                let z = [d[0] as f64 * self.h, d[1] as f64 * self.h];
                norm(&z, self.dim) >= radius
            })
            .map(|(_, w)| w)
            .sum()
    }
}

/// Quadrature estimate of `int_{Omega^c - x} K^alpha(z) dz`: weights of offsets
/// landing on exterior nodes plus the tail over-estimate.
pub fn exterior_mass(domain: &Domain, x: &Point, qt: &QuadratureTable) -> f64 {
    let h = qt.spacing();
    let mut m = 0.0;
    for &(d, w) in qt.offsets() {
        let y = [x[0] + d[0] as f64 * h, x[1] + d[1] as f64 * h];
        if domain.classify(&y, h) == NodeClass::Exterior {
            m += w;
        }
    }
    m + qt.tail_mass()
}

#[inline]
fn index_of(d: [isize; 2], jw: isize, side: usize, dim: usize) -> usize {
    if dim == 1 {
        (d[0] + jw) as usize
    } else {
        (d[0] + jw) as usize + side * (d[1] + jw) as usize
    }
}

pub(crate) fn norm(z: &Point, dim: usize) -> f64 {
    if dim == 1 {
        z[0].abs()
    } else {
        math::sqrt(z[0] * z[0] + z[1] * z[1])
    }
}

/// `int_a^b z^e dz` for `0 < a < b`.
fn power_integral(a: f64, b: f64, e: f64) -> f64 {
    let p = e + 1.0;
    if p.abs() < 1e-14 {
        math::ln(b / a)
    } else {
        (math::powf(b, p) - math::powf(a, p)) / p
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let k = xs.partition_point(|v| *v <= x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let t = (x - x0) / (x1 - x0);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frac(order: f64) -> Kernel {
        Kernel::fractional_laplacian(1, order).unwrap()
    }

    #[test]
    fn density_examples() {
        assert_eq!(frac(0.5).density(&[1.0, 0.0]).unwrap(), 1.0);
        assert!((frac(0.5).density(&[4.0, 0.0]).unwrap() - 0.125).abs() < 1e-15);
        // direct power evaluation: 0.5^{-2.5} = 2^{2.5}
        let oracle = 2f64.powf(2.5);
        assert!((frac(1.5).density(&[0.5, 0.0]).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 5.656854249492381).abs() < 1e-12);
        assert_eq!(frac(0.5).density(&[0.0, 0.0]), Err(Error::OriginSingularity));
    }

    #[test]
    fn far_mass_converges_to_closed_form() {
        // cells centred at |z| >= 1 start at 1 - h/2: 2 int_{1-h/2}^inf z^{-1-alpha} dz
        for order in [0.5, 1.5] {
            let k = frac(order);
            let mut prev = f64::INFINITY;
            for p in [6, 7, 8] {
                let h = 0.5f64.powi(p);
                let exact = 2.0 * (1.0 - 0.5 * h).powf(-order) / order;
                let qt = QuadratureTable::build(&k, h, 8.0).unwrap();
                let err = (qt.mass_beyond(1.0) + qt.tail_mass() - exact).abs() / exact;
                if order < 1.0 {
                    assert!(err < 1e-12, "cell masses are exact below order one");
                } else {
                    assert!(err < prev, "error must shrink with h");
                }
                prev = err;
            }
            assert!(prev < 1e-4, "order {order}: relative error {prev}");
        }
    }

    #[test]
    fn tail_is_exact_for_constant_kernel_in_one_dimension() {
        let k = frac(0.5);
        let qt = QuadratureTable::build(&k, 0.25, 4.0).unwrap();
        // tabulated cells reach 4.125, the tail covers the rest
        assert!((qt.tail_radius() - 4.125).abs() < 1e-15);
        assert!((qt.tail_mass() - 2.0 * 2.0 / 4.125f64.sqrt()).abs() < 1e-14);
        let total_exact = 2.0 * 2.0 / (0.125f64).sqrt();
        assert!((qt.weight_sum() + qt.tail_mass() - total_exact).abs() < 1e-12);
    }

    #[test]
    fn tail_bound_dominates_true_tail() {
        let k = Kernel::indicator(1, 0.5, 2.0).unwrap();
        assert_eq!(k.tail_bound(3.0), 0.0);
        let exact = 2.0 * (1.0 / 1.0f64.sqrt() - 1.0 / 2.0f64.sqrt()) / 0.5;
        assert!((k.tail_bound(1.0) - exact).abs() < 1e-14);
        let radial = Kernel::radial(1, 0.5, alloc::vec![0.0, 1.0, 2.0], alloc::vec![1.0, 0.5, 0.25]).unwrap();
        // the true tail with K <= 0.5 beyond r = 1 is at most 0.5 * 4
        assert!(radial.tail_bound(1.0) >= 0.5 * 4.0 - 1e-12);
    }

    #[test]
    fn resolution_is_validated() {
        assert!(matches!(
            QuadratureTable::build(&frac(0.5), 0.25, 2.0),
            Err(Error::InvalidResolution(_))
        ));
        assert!(QuadratureTable::build(&frac(0.5), 0.25, 2.5).is_ok());
    }

    #[test]
    fn exterior_mass_at_center_is_four() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let qt = QuadratureTable::build(&frac(0.5), 1.0 / 256.0, 8.0).unwrap();
        let m = exterior_mass(&d, &[0.0, 0.0], &qt);
        assert!((m - 4.0).abs() / 4.0 < 5e-3, "{m}");
        let zero = Kernel::constant(1, 0.5, 0.0).unwrap();
        let qt0 = QuadratureTable::build(&zero, 1.0 / 64.0, 8.0).unwrap();
        assert_eq!(exterior_mass(&d, &[0.0, 0.0], &qt0), 0.0);
    }

    #[test]
    fn exterior_mass_grows_toward_the_boundary() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let h = 1.0 / 64.0;
        let qt = QuadratureTable::build(&frac(0.5), h, 8.0).unwrap();
        let mut prev = 0.0;
        for k in 0..=64 {
            let x = k as f64 * h;
            let m = exterior_mass(&d, &[x, 0.0], &qt);
            assert!(m > prev, "mass must increase as d(x) decreases");
            prev = m;
        }
    }

    #[test]
    fn two_dimensional_weights_are_symmetric_and_convergent() {
        let k = Kernel::fractional_laplacian(2, 0.5).unwrap();
        let qt = QuadratureTable::build(&k, 1.0 / 16.0, 3.0).unwrap();
        for &(d, w) in qt.offsets() {
            assert_eq!(w, qt.weight([-d[0], -d[1]]));
            assert_eq!(w, qt.weight([d[1], d[0]]));
        }
        // int_{|z| >= 1} |z|^{-2.5} dz over the plane = 2 pi / 0.5
        let beyond = qt.mass_beyond(1.0) + qt.tail_mass();
        let exact = 2.0 * PI / 0.5;
        assert!(beyond >= exact * 0.97 && beyond <= exact * 1.1, "{beyond} vs {exact}");
    }

    #[test]
    fn compensator_vanishes_for_symmetric_kernels() {
        let qt = QuadratureTable::build(&frac(1.5), 1.0 / 32.0, 4.0).unwrap();
        assert_eq!(qt.compensator(), [0.0, 0.0]);
        assert!(qt.near_moment() > 0.0);
        let lopsided = Kernel::custom(
            1,
            1.5,
            Arc::new(|z: &Point| if z[0] > 0.0 { 2.0 } else { 1.0 }),
            2.0,
            false,
        )
        .unwrap();
        let qt = QuadratureTable::build(&lopsided, 1.0 / 32.0, 4.0).unwrap();
        assert!(qt.compensator()[0] > 0.0);
        assert!(!lopsided.symmetric_on_samples());
    }

    #[test]
    fn near_moment_matches_closed_form() {
        // (1/2) int_{-h/2}^{h/2} |z|^{2 - 1 - alpha} dz = (h/2)^{2-alpha} / (2 - alpha)
        let h = 0.1;
        let qt = QuadratureTable::build(&frac(1.5), h, 1.0).unwrap();
        let exact = (0.5f64 * h).powf(0.5) / 0.5;
        assert!((qt.near_moment() - exact).abs() < 1e-14);
        let radial = Kernel::radial(1, 1.5, alloc::vec![0.0, 10.0], alloc::vec![1.0, 1.0]).unwrap();
        let qt = QuadratureTable::build(&radial, h, 1.0).unwrap();
        assert!((qt.near_moment() - exact).abs() < 1e-13);
        // 2-D: (1/4) int_{[-a,a]^2} |z|^{-alpha} dz; the radial integral is done by
        // hand, leaving 2 int_0^{pi/4} 2 (a / cos t)^{1/2} dt for Simpson's rule
        let k2 = Kernel::fractional_laplacian(2, 1.5).unwrap();
        let qt2 = QuadratureTable::build(&k2, h, 1.0).unwrap();
        let a = 0.5 * h;
        let n = 2000;
        let g = |t: f64| 2.0 * (a / t.cos()).sqrt();
        let dt = PI / 4.0 / n as f64;
        let mut s = g(0.0) + g(PI / 4.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * dt);
        }
        let exact = 2.0 * s * dt / 3.0;
        assert!((qt2.near_moment() - exact).abs() < 1e-10, "{} vs {exact}", qt2.near_moment());
    }

    #[test]
    fn ellipticity_certificate() {
        let k = Kernel::indicator(1, 0.5, 0.5).unwrap().with_ellipticity(0.5, 1.0);
        assert!(k.check_ellipticity().pass);
        let k = Kernel::indicator(1, 0.5, 0.5).unwrap().with_ellipticity(0.6, 1.0);
        assert!(!k.check_ellipticity().pass);
        assert!(!frac(0.5).check_ellipticity().pass);
        assert!(Kernel::constant(1, 0.5, 0.0).unwrap().with_ellipticity(1.0, 0.5).check_ellipticity().pass == false);
    }

    proptest! {
        #[test]
        fn weights_are_nonnegative_and_mirror_symmetric(
            order in 0.1f64..1.9, p in 3u32..6, r in 10.0f64..20.0, kind in 0usize..3,
        ) {
            let h = 0.5f64.powi(p as i32);
            let k = match kind {
                0 => frac(order),
                1 => Kernel::indicator(1, order, 0.3).unwrap(),
                _ => Kernel::radial(1, order, alloc::vec![0.0, 1.0], alloc::vec![2.0, 0.5]).unwrap(),
            };
            let qt = QuadratureTable::build(&k, h, r * h).unwrap();
            let jw = qt.half_width() as isize;
            for j in 1..=jw {
                prop_assert!(qt.weight([j, 0]) >= 0.0);
                prop_assert_eq!(qt.weight([j, 0]), qt.weight([-j, 0]));
            }
            prop_assert!(qt.tail_mass() >= 0.0);
        }
    }
}
