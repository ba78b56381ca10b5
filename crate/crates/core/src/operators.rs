//! Discrete nonlocal operator: full, truncated and censored forms.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{NodeClass, Point};
use crate::grid::Lattice;
use crate::hamiltonians::{eval_hamiltonian, HamiltonianSpec};
use crate::kernels::{norm, QuadratureTable};

/// Which one-sided extension a field exposes on boundary nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TracePolicy {
    /// `max(u, phi)`: the view used for subsolutions.
    UpperExtension,
    /// `min(u, phi)`: the view used for supersolutions.
    LowerExtension,
}

/// Grid function on the whole lattice together with the exterior datum.
///
/// `values` holds `u` on active nodes and `phi` on exterior nodes; `datum`
/// holds `phi` everywhere. Boundary nodes expose `max(u, phi)` or
/// `min(u, phi)` through [`Field::extended`] according to the policy when
/// seen from another node; the operator's centre value is always `u` itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    datum: Vec<f64>,
    t: f64,
    policy: TracePolicy,
}

impl Field {
    pub fn from_fns(
        lattice: &Lattice,
        u: &dyn Fn(&Point) -> f64,
        phi: &dyn Fn(&Point, f64) -> f64,
        t: f64,
        policy: TracePolicy,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(lattice.len());
        let mut datum = Vec::with_capacity(lattice.len());
        for idx in 0..lattice.len() {
            let x = lattice.node(idx);
            let p = phi(&x, t);
            datum.push(p);
            values.push(if lattice.class(idx) == NodeClass::Exterior { p } else { u(&x) });
        }
        Self::from_values(lattice, values, datum, t, policy)
    }

    /// Exterior entries of `values` are overwritten by the datum.
    pub fn from_values(
        lattice: &Lattice,
        mut values: Vec<f64>,
        datum: Vec<f64>,
        t: f64,
        policy: TracePolicy,
    ) -> Result<Self> {
        if values.len() != lattice.len() || datum.len() != lattice.len() {
            return Err(Error::Precondition(format!(
                "field needs {} values, got {} and {}",
                lattice.len(),
                values.len(),
                datum.len()
            )));
        }
        for idx in 0..values.len() {
            if lattice.class(idx) == NodeClass::Exterior {
                values[idx] = datum[idx];
            }
        }
        if let Some(i) = values.iter().chain(&datum).position(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!("non-finite field entry at position {i}")));
        }
        Ok(Field { values, datum, t, policy })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn policy(&self) -> TracePolicy {
        self.policy
    }

    pub fn with_policy(mut self, policy: TracePolicy) -> Self {
        self.policy = policy;
        self
    }

    /// `u` on active nodes, `phi` on exterior nodes.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn datum(&self) -> &[f64] {
        &self.datum
    }

    #[inline]
    pub fn raw(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    #[inline]
    pub fn extended(&self, lattice: &Lattice, idx: usize) -> f64 {
        let u = self.values[idx];
        if lattice.class(idx) != NodeClass::BoundaryTrace {
            return u;
        }
        match self.policy {
            TracePolicy::UpperExtension => u.max(self.datum[idx]),
            TracePolicy::LowerExtension => u.min(self.datum[idx]),
        }
    }

    pub fn extended_values(&self, lattice: &Lattice) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.extended(lattice, i)).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup norm over active nodes only.
    pub fn active_sup_norm(&self, lattice: &Lattice) -> f64 {
        lattice.active().iter().fold(0.0, |m, &i| m.max(self.values[i].abs()))
    }

    /// Replaces active values; exterior entries keep the datum.
    pub(crate) fn set_active(&mut self, lattice: &Lattice, active: &[f64]) {
        for (k, &idx) in lattice.active().iter().enumerate() {
            self.values[idx] = active[k];
        }
    }

    /// Re-samples the datum at time `t` and resets exterior nodes to it.
    pub fn refresh_datum(&mut self, lattice: &Lattice, phi: &dyn Fn(&Point, f64) -> f64, t: f64) {
        for idx in 0..self.values.len() {
            let p = phi(&lattice.node(idx), t);
            self.datum[idx] = p;
            if lattice.class(idx) == NodeClass::Exterior {
                self.values[idx] = p;
            }
        }
        self.t = t;
    }

    pub(crate) fn set_time(&mut self, t: f64) {
        self.t = t;
    }
}

/// Offset set of a truncated evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    All,
    /// `|z| < delta`, near field included.
    Ball(f64),
    /// `|z| >= delta`, tail included.
    BallComplement(f64),
    /// Jumps landing in the closed domain.
    Censored,
}

/// Neighbor of `idx` by `d`, continued by the nearest stored node.
#[inline]
pub(crate) fn clamped_offset(lattice: &Lattice, idx: usize, d: [isize; 2]) -> usize {
    let [i, j] = lattice.multi_index(idx);
    let [nx, ny] = lattice.shape();
    let ci = (i as isize + d[0]).clamp(0, nx as isize - 1) as usize;
    let cj = (j as isize + d[1]).clamp(0, ny as isize - 1) as usize;
    lattice.index([ci, cj])
}

/// Mean of the extended field over the far samples standing in for the datum
/// beyond the tabulated offsets.
fn far_mean(f: &Field, lattice: &Lattice) -> f64 {
    let far = lattice.far_samples();
    far.iter().map(|&i| f.extended(lattice, i)).sum::<f64>() / far.len() as f64
}

fn near_field(f: &Field, lattice: &Lattice, idx: usize, qt: &QuadratureTable, fx: f64) -> f64 {
    if qt.near_moment() == 0.0 {
        return 0.0;
    }
    let h = qt.spacing();
    let mut s = 0.0;
    for a in 0..lattice.dim() {
        let mut e = [0isize; 2];
        e[a] = 1;
        let up = f.extended(lattice, clamped_offset(lattice, idx, e));
        e[a] = -1;
        let down = f.extended(lattice, clamped_offset(lattice, idx, e));
        s += up + down - 2.0 * fx;
    }
    qt.near_moment() * s / (h * h)
}

/// `sum_{z_j in region} w_j [f(x + z_j) - f(x) - 1_{|z_j| <= 1} <p, z_j>]`
/// plus the near-field and tail contributions the region contains. The
/// compensator only enters for order >= 1.
pub fn eval_operator(
    f: &Field,
    lattice: &Lattice,
    idx: usize,
    p: &Point,
    qt: &QuadratureTable,
    region: Region,
) -> Result<f64> {
    if idx >= lattice.len() {
        return Err(Error::NodeOutsideGrid(idx));
    }
    if region == Region::Censored {
        return eval_censored(f, lattice, idx, qt);
    }
    let h = qt.spacing();
    let dim = lattice.dim();
    let fx = f.raw(idx);
    let comp = qt.uses_compensator();
    let mut sum = 0.0;
    let mut drift = [0.0; 2];
    for &(d, w) in qt.offsets() {
        let z = [d[0] as f64 * h, d[1] as f64 * h];
        let r = norm(&z, dim);
        let inside = match region {
            Region::All => true,
            Region::Ball(delta) => r < delta,
            Region::BallComplement(delta) => r >= delta,
            Region::Censored => unreachable!(),
        };
        if !inside {
            continue;
        }
        let y = clamped_offset(lattice, idx, d);
        sum += w * (f.extended(lattice, y) - fx);
        if comp && region != Region::All && r <= 1.0 && (d[0] > 0 || (d[0] == 0 && d[1] > 0)) {
            // pairwise so that symmetric weights cancel exactly
            let wm = qt.weight([-d[0], -d[1]]);
            drift[0] += (w - wm) * z[0];
            drift[1] += (w - wm) * z[1];
        } else if comp && region != Region::All && r <= 1.0 && qt.weight([-d[0], -d[1]]) == 0.0 {
            drift[0] += w * z[0];
            drift[1] += w * z[1];
        }
    }
    if comp {
        if region == Region::All {
            drift = qt.compensator();
        }
        sum -= p[0] * drift[0] + if dim == 2 { p[1] * drift[1] } else { 0.0 };
    }
    if matches!(region, Region::All | Region::Ball(_)) {
        sum += near_field(f, lattice, idx, qt, fx);
    }
    if matches!(region, Region::All | Region::BallComplement(_)) {
        sum += qt.tail_mass() * (far_mean(f, lattice) - fx);
    }
    Ok(sum)
}

/// Censored operator: only jumps landing in the closed domain, order < 1.
pub fn eval_censored(f: &Field, lattice: &Lattice, idx: usize, qt: &QuadratureTable) -> Result<f64> {
    if qt.order() >= 1.0 {
        return Err(Error::UnsupportedOrder(qt.order()));
    }
    if idx >= lattice.len() {
        return Err(Error::NodeOutsideGrid(idx));
    }
    if lattice.class(idx) == NodeClass::Exterior {
        return Err(Error::Precondition("censored operator needs a node of the closed domain".into()));
    }
    let fx = f.raw(idx);
    let mut sum = 0.0;
    for &(d, w) in qt.offsets() {
        if let Some(y) = lattice.offset(idx, d) {
            if lattice.class(y) != NodeClass::Exterior {
                sum += w * (f.extended(lattice, y) - fx);
            }
        }
    }
    Ok(sum)
}

/// The jumps leaving the closed domain, tail included (order < 1).
pub fn eval_exterior_part(f: &Field, lattice: &Lattice, idx: usize, qt: &QuadratureTable) -> Result<f64> {
    if idx >= lattice.len() {
        return Err(Error::NodeOutsideGrid(idx));
    }
    let fx = f.raw(idx);
    let mut sum = 0.0;
    for &(d, w) in qt.offsets() {
        let exterior = match lattice.offset(idx, d) {
            Some(y) => lattice.class(y) == NodeClass::Exterior,
            None => true,
        };
        if exterior {
            sum += w * (f.extended(lattice, clamped_offset(lattice, idx, d)) - fx);
        }
    }
    Ok(sum + qt.tail_mass() * (far_mean(f, lattice) - fx))
}

/// `dt_slot - I[B_delta] - I[B_delta^c] + H(x, t, u(x), p)`. Both parts share
/// one quadrature, so the split radius only has to be admissible.
#[allow(clippy::too_many_arguments)]
pub fn scheme_evaluation(
    f: &Field,
    lattice: &Lattice,
    idx: usize,
    t: f64,
    dt_slot: f64,
    p: &Point,
    spec: &HamiltonianSpec,
    qt: &QuadratureTable,
    delta: f64,
) -> Result<f64> {
    if !(delta >= qt.spacing()) {
        return Err(Error::Precondition(format!("split radius {delta} is below the spacing {}", qt.spacing())));
    }
    let inner = eval_operator(f, lattice, idx, p, qt, Region::Ball(delta))?;
    let outer = eval_operator(f, lattice, idx, p, qt, Region::BallComplement(delta))?;
    let x = lattice.node(idx);
    Ok(dt_slot - inner - outer + eval_hamiltonian(spec, &x, t, f.raw(idx), p, lattice.dim()))
}

/// Operator restricted to the active nodes, with the exterior contribution
/// folded into per-node terms:
///
/// `I_i = sum_{k active} w_{k-i} (g_k - g_i) + E_i - m_i g_i + near + comp`,
///
/// where `E_i` is the weighted exterior datum (tail included, see
/// [`SplitOperator::exterior_sums`]) and `m_i` the exterior mass.
#[derive(Debug, Clone)]
pub struct SplitOperator {
    dim: usize,
    h: f64,
    half_width: isize,
    lo: [usize; 2],
    hi: [usize; 2],
    weights: Vec<f64>,
    exterior_mass: Vec<f64>,
    tail: f64,
    near: f64,
    compensator: Option<Point>,
}

impl SplitOperator {
    pub fn new(lattice: &Lattice, qt: &QuadratureTable) -> Self {
        let jw = qt.half_width() as isize;
        let side = (2 * jw + 1) as usize;
        let mut weights = alloc::vec![0.0; if lattice.dim() == 1 { side } else { side * side }];
        for &(d, w) in qt.offsets() {
            let k = (d[0] + jw) as usize + if lattice.dim() == 2 { side * (d[1] + jw) as usize } else { 0 };
            weights[k] = w;
        }
        let (lo, hi) = lattice.active_box();
        let exterior_mass = crate::hamiltonians::exterior_masses(lattice, qt);
        SplitOperator {
            dim: lattice.dim(),
            h: qt.spacing(),
            half_width: jw,
            lo,
            hi,
            weights,
            exterior_mass,
            tail: qt.tail_mass(),
            near: qt.near_moment(),
            compensator: qt.uses_compensator().then(|| qt.compensator()),
        }
    }

    /// `E_i` for the field's current exterior datum, per active node.
    pub fn exterior_sums(&self, lattice: &Lattice, qt: &QuadratureTable, field: &Field) -> Vec<f64> {
        let far = far_mean(field, lattice);
        lattice
            .active()
            .iter()
            .map(|&idx| {
                let mut e = 0.0;
                for &(d, w) in qt.offsets() {
                    let exterior = match lattice.offset(idx, d) {
                        Some(y) => lattice.class(y) == NodeClass::Exterior,
                        None => true,
                    };
                    if exterior {
                        e += w * field.raw(clamped_offset(lattice, idx, d));
                    }
                }
                e + self.tail * far
            })
            .collect()
    }

    /// Exterior mass per active node.
    pub fn exterior_mass(&self) -> &[f64] {
        &self.exterior_mass
    }

    /// Writes `I_i` for every active node into `out` (active order). `g` is
    /// the extended field on the whole lattice, `u` the raw values used at the
    /// centre, `pbar` the centered gradient
    /// per active node (read only with a compensator) and `ext` the output
    /// of [`SplitOperator::exterior_sums`].
    pub fn apply(&self, lattice: &Lattice, g: &[f64], u: &[f64], pbar: &[Point], ext: &[f64], out: &mut [f64]) {
        let h2 = self.h * self.h;
        let jw = self.half_width;
        let side = (2 * jw + 1) as usize;
        for (k, &idx) in lattice.active().iter().enumerate() {
            let [i, j] = lattice.multi_index(idx);
            let gi = u[idx];
            let mut s = 0.0;
            let xa = (self.lo[0] as isize).max(i as isize - jw) as usize;
            let xb = (self.hi[0] as isize).min(i as isize + jw) as usize;
            if self.dim == 1 {
                let base = jw - i as isize;
                let w = &self.weights[(xa as isize + base) as usize..=(xb as isize + base) as usize];
                for (w, gq) in w.iter().zip(&g[xa..=xb]) {
                    s += w * (gq - gi);
                }
            } else {
                let ya = (self.lo[1] as isize).max(j as isize - jw) as usize;
                let yb = (self.hi[1] as isize).min(j as isize + jw) as usize;
                for qy in ya..=yb {
                    let row = side * (qy as isize - j as isize + jw) as usize;
                    let grow = lattice.index([0, qy]);
                    for qx in xa..=xb {
                        let w = self.weights[row + (qx as isize - i as isize + jw) as usize];
                        s += w * (g[grow + qx] - gi);
                    }
                }
            }
            s += ext[k] - self.exterior_mass[k] * gi;
            if self.near != 0.0 {
                let mut lap = 0.0;
                for a in 0..self.dim {
                    let mut e = [0isize; 2];
                    e[a] = 1;
                    let up = g[clamped_offset(lattice, idx, e)];
                    e[a] = -1;
                    let down = g[clamped_offset(lattice, idx, e)];
                    lap += up + down - 2.0 * gi;
                }
                s += self.near * lap / h2;
            }
            if let Some(c) = self.compensator {
                let p = pbar[k];
                s -= p[0] * c[0] + if self.dim == 2 { p[1] * c[1] } else { 0.0 };
            }
            out[k] = s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::hamiltonians::CoerciveSpec;
    use crate::kernels::Kernel;
    use proptest::prelude::*;

    fn setup(order: f64, h: f64) -> (Lattice, QuadratureTable) {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let r = 4.0 * d.diameter();
        let k = Kernel::fractional_laplacian(1, order).unwrap();
        (Lattice::new(&d, h, r).unwrap(), QuadratureTable::build(&k, h, r).unwrap())
    }

    fn bump(x: &Point) -> f64 {
        (1.0 - x[0] * x[0]).max(0.0)
    }

    fn field(l: &Lattice, u: &dyn Fn(&Point) -> f64) -> Field {
        Field::from_fns(l, u, &|x, _| u(x), 0.0, TracePolicy::UpperExtension).unwrap()
    }

    #[test]
    fn constants_are_annihilated() {
        for order in [0.5, 1.5] {
            let (l, qt) = setup(order, 1.0 / 32.0);
            let f = field(&l, &|_| 3.25);
            for &idx in l.active() {
                for region in [Region::All, Region::Ball(0.3), Region::BallComplement(0.3)] {
                    assert_eq!(eval_operator(&f, &l, idx, &[0.7, 0.0], &qt, region).unwrap(), 0.0);
                }
            }
            if order < 1.0 {
                assert_eq!(eval_censored(&f, &l, l.active()[3], &qt).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn affine_fields_vanish_with_compensator() {
        let (l, qt) = setup(1.5, 1.0 / 32.0);
        let f = field(&l, &|x| 2.0 * x[0] - 1.0);
        // symmetric offsets from the centre stay on the lattice
        let idx = l.locate(&[0.0, 0.0]).unwrap();
        let v = eval_operator(&f, &l, idx, &[2.0, 0.0], &qt, Region::All).unwrap();
        assert!(v.abs() < 1e-9, "{v}");
    }

    #[test]
    fn gradient_is_ignored_below_order_one() {
        let (l, qt) = setup(0.5, 1.0 / 32.0);
        let f = field(&l, &bump);
        let idx = l.locate(&[0.25, 0.0]).unwrap();
        let a = eval_operator(&f, &l, idx, &[0.0, 0.0], &qt, Region::All).unwrap();
        let b = eval_operator(&f, &l, idx, &[17.0, 0.0], &qt, Region::All).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bump_matches_closed_form() {
        // int (f(z) - f(0)) |z|^{-1-alpha} dz = -16/3 for alpha = 0.5 and 1.5
        for order in [0.5, 1.5] {
            let (l, qt) = setup(order, 1.0 / 256.0);
            let f = field(&l, &bump);
            let idx = l.locate(&[0.0, 0.0]).unwrap();
            let v = eval_operator(&f, &l, idx, &[0.0, 0.0], &qt, Region::All).unwrap();
            assert!((v + 16.0 / 3.0).abs() / (16.0 / 3.0) < 1e-2, "order {order}: {v}");
        }
    }

    #[test]
    fn ball_split_recovers_the_full_operator() {
        let (l, qt) = setup(1.5, 1.0 / 64.0);
        let f = field(&l, &|x| (3.0 * x[0]).sin());
        let idx = l.locate(&[0.5, 0.0]).unwrap();
        let p = [3.0 * 1.5f64.cos(), 0.0];
        let all = eval_operator(&f, &l, idx, &p, &qt, Region::All).unwrap();
        let inner = eval_operator(&f, &l, idx, &p, &qt, Region::Ball(0.1)).unwrap();
        let outer = eval_operator(&f, &l, idx, &p, &qt, Region::BallComplement(0.1)).unwrap();
        assert!((all - inner - outer).abs() < 1e-9 * (1.0 + all.abs()));
        let spec = HamiltonianSpec::Coercive(CoerciveSpec::new(1.0));
        let r = scheme_evaluation(&f, &l, idx, 0.0, 0.0, &p, &spec, &qt, 0.1).unwrap();
        assert!((r - (-all + p[0].abs())).abs() < 1e-9 * (1.0 + r.abs()));
        assert!(scheme_evaluation(&f, &l, idx, 0.0, 0.0, &p, &spec, &qt, 1e-4).is_err());
    }

    #[test]
    fn scheme_evaluation_trivial_cases() {
        let (l, qt) = setup(0.5, 1.0 / 16.0);
        let f = field(&l, &|_| 0.0);
        let idx = l.locate(&[0.0, 0.0]).unwrap();
        let lin = HamiltonianSpec::Coercive(CoerciveSpec::new(1.0).with_a1(1.0, 1.0).with_lambda(1.0));
        let v = scheme_evaluation(&f, &l, idx, 0.0, 0.0, &[0.0, 0.0], &lin, &qt, 0.1).unwrap();
        assert_eq!(v, 0.0);
        let v = scheme_evaluation(&f, &l, idx, 0.0, 1.0, &[0.0, 0.0], &lin, &qt, 0.1).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn censored_near_the_boundary() {
        // x = 0.99, f(y) = y: int_{-1.99}^{0.01} z |z|^{-3/2} dz = 2 sqrt(0.01) - 2 sqrt(1.99)
        let (l, qt) = setup(0.5, 1.0 / 800.0);
        let f = field(&l, &|x| x[0]);
        let idx = l.locate(&[0.99, 0.0]).unwrap();
        let v = eval_censored(&f, &l, idx, &qt).unwrap();
        let exact = 0.2 - 2.0 * 1.99f64.sqrt();
        assert!((v - exact).abs() / exact.abs() < 1e-2, "{v} vs {exact}");
        let (l15, qt15) = setup(1.5, 1.0 / 16.0);
        let f15 = field(&l15, &|x| x[0]);
        assert_eq!(eval_censored(&f15, &l15, 8, &qt15), Err(Error::UnsupportedOrder(1.5)));
    }

    #[test]
    fn censored_plus_exterior_is_full() {
        let (l, qt) = setup(0.5, 1.0 / 64.0);
        let f = Field::from_fns(&l, &bump, &|x, _| 0.5 + x[0], 0.0, TracePolicy::UpperExtension).unwrap();
        for &idx in l.active() {
            let all = eval_operator(&f, &l, idx, &[0.0, 0.0], &qt, Region::All).unwrap();
            let cens = eval_censored(&f, &l, idx, &qt).unwrap();
            let ext = eval_exterior_part(&f, &l, idx, &qt).unwrap();
            assert!((all - cens - ext).abs() < 1e-10 * (1.0 + all.abs()));
        }
    }

    #[test]
    fn node_outside_grid() {
        let (l, qt) = setup(0.5, 1.0 / 16.0);
        let f = field(&l, &bump);
        assert_eq!(eval_operator(&f, &l, l.len(), &[0.0, 0.0], &qt, Region::All), Err(Error::NodeOutsideGrid(l.len())));
    }

    #[test]
    fn trace_policies() {
        let (l, _) = setup(0.5, 0.25);
        let f = Field::from_fns(&l, &|_| 1.0, &|_, _| 2.0, 0.0, TracePolicy::UpperExtension).unwrap();
        let b = l.active()[0];
        assert_eq!(f.extended(&l, b), 2.0);
        assert_eq!(f.clone().with_policy(TracePolicy::LowerExtension).extended(&l, b), 1.0);
        assert_eq!(f.extended(&l, l.active()[1]), 1.0);
        assert_eq!(f.extended(&l, 0), 2.0);
    }

    fn check_split(l: &Lattice, qt: &QuadratureTable, f: &Field) {
        let op = SplitOperator::new(l, qt);
        let ext = op.exterior_sums(l, qt, f);
        let g = f.extended_values(l);
        let pbar = alloc::vec![[0.3, -0.2]; l.active().len()];
        let mut out = alloc::vec![0.0; l.active().len()];
        op.apply(l, &g, f.values(), &pbar, &ext, &mut out);
        for (k, &idx) in l.active().iter().enumerate() {
            let direct = eval_operator(f, l, idx, &pbar[k], qt, Region::All).unwrap();
            assert!((out[k] - direct).abs() < 1e-9 * (1.0 + direct.abs()), "{} vs {direct}", out[k]);
        }
    }

    #[test]
    fn split_operator_agrees_with_direct_sum() {
        for order in [0.5, 1.5] {
            let (l, qt) = setup(order, 1.0 / 32.0);
            let f = Field::from_fns(&l, &bump, &|x, _| 1.0 + x[0].abs(), 0.0, TracePolicy::UpperExtension).unwrap();
            check_split(&l, &qt, &f);
        }
        let d = Domain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        for order in [0.5, 1.5] {
            let k = Kernel::fractional_laplacian(2, order).unwrap();
            let (h, r) = (0.125, 1.5);
            let l = Lattice::new(&d, h, r).unwrap();
            let qt = QuadratureTable::build(&k, h, r).unwrap();
            let f = Field::from_fns(&l, &|x| x[0] * x[1], &|x, _| x[0] - x[1], 0.0, TracePolicy::LowerExtension).unwrap();
            check_split(&l, &qt, &f);
        }
    }

    proptest! {
        #[test]
        fn operator_is_monotone(
            order in prop_oneof![Just(0.5f64), Just(1.5f64)],
            node in 0usize..33,
            bumps in proptest::collection::vec(0.0f64..1.0, 1..8),
            seed in 0usize..1000,
        ) {
            let (l, qt) = setup(order, 1.0 / 16.0);
            let base = field(&l, &bump);
            let idx = l.active()[node];
            let mut vals = base.values().to_vec();
            let mut datum = base.datum().to_vec();
            for (k, b) in bumps.iter().enumerate() {
                let j = (seed * 31 + k * 97) % l.len();
                if j != idx {
                    vals[j] += b;
                    datum[j] += b;
                }
            }
            let raised = Field::from_values(&l, vals, datum, 0.0, TracePolicy::UpperExtension).unwrap();
            let p = [0.4, 0.0];
            let lo = eval_operator(&base, &l, idx, &p, &qt, Region::All).unwrap();
            let hi = eval_operator(&raised, &l, idx, &p, &qt, Region::All).unwrap();
            prop_assert!(hi >= lo);
        }
    }
}
