//! Reference values computed without the lattice: adaptive Gauss-Kronrod
//! quadrature of the one-dimensional operator and exterior mass, and a
//! direct upwind step for pure transport.

use nlhj_core::{Kernel, Point};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Kronrod estimate and `|Kronrod - Gauss|` on `[a, b]`.
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let d = r * XGK[j];
        let s = f(c - d) + f(c + d);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * r, ((k - g) * r).abs())
}

/// Globally adaptive: the piece with the largest error estimate is bisected
/// until the summed estimate falls below `tol` or 4000 pieces exist.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (v, e) = gk15(f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    while pieces.len() < 4000 {
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= tol {
            break;
        }
        let (k, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one piece");
        let (lo, hi, _, _) = pieces.swap_remove(k);
        let m = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, m);
        let (v2, e2) = gk15(f, m, hi);
        pieces.push((lo, m, v1, e1));
        pieces.push((m, hi, v2, e2));
    }
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    pieces.iter().map(|p| p.2).sum()
}

/// `I[f](x)` in one dimension with the compensator `-1_{|z|<=1} p z`:
/// `int (f(x+z) - f(x) - 1_{|z|<=1} p z) K(z) |z|^{-1-alpha} dz`.
///
/// The part `|z| <= 1` uses `z = s^{1/(2 - alpha)}`, which turns the second
/// order cancellation into a bounded integrand; the part `|z| > 1` uses
/// `z = s^{-1/alpha}`, which makes the tail density constant. Below
/// `|z| = 1e-3` the paired difference is taken as quadratic in `z` (exact
/// up to `O(1e-6)` for smooth `f`), since evaluating it there cancels.
pub fn operator_1d(f: &dyn Fn(f64) -> f64, x: f64, p: f64, kernel: &Kernel, tol: f64) -> f64 {
    let a = kernel.order();
    let fx = f(x);
    let k = |z: f64| kernel.profile_value(&[z, 0.0]);
    let paired = |z: f64, near: bool| {
        let mut v = k(z) * (f(x + z) - fx) + k(-z) * (f(x - z) - fx);
        if near {
            v -= p * z * (k(z) - k(-z));
        }
        v
    };
    let q = 1.0 / (2.0 - a);
    let near = |s: f64| {
        let z = s.powf(q);
        paired(z, true) * q * s.powf(-q * a - 1.0)
    };
    let far = |s: f64| paired(s.powf(-1.0 / a), false) / a;
    let z0: f64 = 1e-3;
    let s0 = z0.powf(2.0 - a);
    let inner = paired(z0, true) / (z0 * z0) * s0 / (2.0 - a);
    inner + integrate(&near, s0, 1.0, tol) + integrate(&far, 0.0, 1.0, tol)
}

/// `int_{x + z outside (lo, hi)} K(z) |z|^{-1-alpha} dz`.
pub fn exterior_mass_1d(lo: f64, hi: f64, x: f64, kernel: &Kernel, tol: f64) -> f64 {
    let a = kernel.order();
    // int_d^inf K(+-z) z^{-1-a} dz = d^{-a}/a int_0^1 K(+-d s^{-1/a}) ds
    let side = |d: f64, sign: f64| {
        let g = |s: f64| kernel.profile_value(&[sign * d * s.powf(-1.0 / a), 0.0]);
        d.powf(-a) / a * integrate(&g, 0.0, 1.0, tol)
    };
    side(hi - x, 1.0) + side(x - lo, -1.0)
}

/// One explicit step of `u_t = c u_x` (`c > 0`): forward differences, the
/// value beyond the right end taken from `right`.
pub fn advection_step(u: &[f64], c: f64, h: f64, dt: f64, right: f64) -> Vec<f64> {
    (0..u.len())
        .map(|i| {
            let up = if i + 1 < u.len() { u[i + 1] } else { right };
            u[i] + dt * (c * ((up - u[i]) / h))
        })
        .collect()
}

/// `f` extended by `phi` outside `(lo, hi)`.
pub fn extended(u: impl Fn(&Point) -> f64, phi: impl Fn(&Point) -> f64, lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    move |y: f64| {
        let p = [y, 0.0];
        if (lo..=hi).contains(&y) {
            u(&p)
        } else {
            phi(&p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_is_exact_on_polynomials() {
        let v = integrate(&|x: f64| x.powi(20), -1.0, 1.0, 1e-15);
        assert!((v - 2.0 / 21.0).abs() < 1e-15);
        assert!((integrate(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-13) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn bump_closed_form() {
        // for K = 1 both orders give -2 (1/(2 - a) + 1/a) = -16/3
        let bump = |y: f64| (1.0 - y * y).max(0.0);
        for a in [0.5, 1.5] {
            let k = Kernel::fractional_laplacian(1, a).unwrap();
            let v = operator_1d(&bump, 0.0, 0.0, &k, 1e-12);
            assert!((v + 16.0 / 3.0).abs() < 1e-9, "alpha = {a}: {v}");
        }
    }

    #[test]
    fn quadratic_closed_form_off_centre() {
        // f = y^2 on |y| < 2, else 4; at x = 0.5 with alpha = 0.5
        let f = |y: f64| if y.abs() < 2.0 { y * y } else { 4.0 };
        let k = Kernel::fractional_laplacian(1, 0.5).unwrap();
        let v = operator_1d(&f, 0.5, 1.0, &k, 1e-12);
        // right: int_0^1.5 (z + z^2) z^-1.5 + int_1.5^inf 3.75 z^-1.5
        // left:  int_0^2.5 (-z + z^2) z^-1.5 + int_2.5^inf 3.75 z^-1.5
        let s = |d: f64| 2.0 * d.sqrt() + (2.0 / 3.0) * d.powf(1.5);
        let t = |d: f64| 3.75 * 2.0 / d.sqrt();
        let exact = s(1.5) + t(1.5) + (-2.0 * 2.5f64.sqrt() + (2.0 / 3.0) * 2.5f64.powf(1.5)) + t(2.5);
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
    }

    #[test]
    fn exterior_mass_closed_form() {
        let k = Kernel::fractional_laplacian(1, 0.5).unwrap();
        assert!((exterior_mass_1d(-1.0, 1.0, 0.0, &k, 1e-13) - 4.0).abs() < 1e-11);
        let ind = Kernel::indicator(1, 0.5, 3.0).unwrap();
        // int_1^3 z^-1.5 on each side
        let exact = 2.0 * 2.0 * (1.0 - 1.0 / 3f64.sqrt());
        assert!((exterior_mass_1d(-1.0, 1.0, 0.0, &ind, 1e-13) - exact).abs() < 1e-10);
    }

    #[test]
    fn advection_step_matches_hand_computation() {
        let u = [1.0, 2.0, 4.0];
        assert_eq!(advection_step(&u, 2.0, 0.5, 0.1, 0.0), vec![1.4, 2.8, 2.4]);
    }
}
