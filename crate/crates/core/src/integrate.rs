//! Adaptive integration of a solution pair of `y'' + q(x) y = 0`.
//!
//! Both solutions are advanced together as one 4-dimensional system
//! `(y1, y1', y2, y2')` by the Dormand–Prince 5(4) pair, so they share a
//! single step sequence. Between mesh nodes each component is reconstructed
//! by quintic Hermite interpolation from its value and first two derivatives,
//! all of which are exact at the nodes because `y'' = -q y` and
//! `y''' = -q' y - q y'`.

use crate::error::{Error, Result};
use crate::qfunc::EquationModel;
use crate::real::Real;

/// `(y1, y1', y2, y2')`.
pub type State<T> = [T; 4];

/// Initial data `(y(x0), y'(x0))` of one solution.
pub type Initial<T> = (T, T);

pub const MAX_STEPS: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    pub rtol: T,
    pub atol: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-12),
        }
    }
}

impl<T: Real> Tolerances<T> {
    pub fn new(rtol: T, atol: T) -> Self {
        Tolerances { rtol, atol }
    }
}

/// `y1 y2' - y1' y2`.
#[inline]
pub fn wronskian<T: Real>(s: &State<T>) -> T {
    s[0] * s[3] - s[1] * s[2]
}

/// Dense record of two solutions on `[t0, tN]`.
#[derive(Clone, Debug)]
pub struct PairTrajectory<T> {
    model: EquationModel<T>,
    mesh: Vec<T>,
    states: Vec<State<T>>,
    // q and q' at each node, for the Hermite data.
    coeffs: Vec<(T, T)>,
    w: T,
    tol: Tolerances<T>,
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Rhs<'a, T> {
    model: &'a EquationModel<T>,
}

impl<T: Real> Rhs<'_, T> {
    fn eval(&self, x: T, s: &State<T>) -> Result<State<T>> {
        let q = self.model.q(x)?;
        Ok([s[1], -q * s[0], s[3], -q * s[2]])
    }
}

fn axpy<T: Real>(y: &State<T>, h: T, terms: &[(f64, &State<T>)]) -> State<T> {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        for (c, k) in terms {
            acc = acc + T::lit(*c) * k[i];
        }
        *o = *o + h * acc;
    }
    out
}

/// Integrates the pair with initial data `ic1`, `ic2` at `model.x0()` up to
/// `xmax`.
pub fn integrate_pair<T: Real>(
    model: &EquationModel<T>,
    ic1: Initial<T>,
    ic2: Initial<T>,
    xmax: T,
    tol: Tolerances<T>,
) -> Result<PairTrajectory<T>> {
    integrate_pair_with_limit(model, ic1, ic2, xmax, tol, MAX_STEPS)
}

pub fn integrate_pair_with_limit<T: Real>(
    model: &EquationModel<T>,
    ic1: Initial<T>,
    ic2: Initial<T>,
    xmax: T,
    tol: Tolerances<T>,
    max_steps: usize,
) -> Result<PairTrajectory<T>> {
    let x0 = model.x0();
    if !(xmax > x0) || !xmax.is_finite() {
        return Err(Error::InvalidInterval {
            lo: x0.as_f64(),
            hi: xmax.as_f64(),
        });
    }
    if !(tol.rtol >= T::lit(1e-13) && tol.rtol <= T::lit(1e-3)) {
        return Err(Error::Tolerance(tol.rtol.as_f64()));
    }
    if !(tol.atol > T::zero()) {
        return Err(Error::InvalidArgument(format!("atol = {} must be positive", tol.atol)));
    }
    let y0: State<T> = [ic1.0, ic1.1, ic2.0, ic2.1];
    let w = wronskian(&y0);
    let scale = (ic1.0.abs() + ic1.1.abs()) * (ic2.0.abs() + ic2.1.abs());
    if !(w.abs() > T::lit(1e-14) * scale) {
        return Err(Error::DependentInitialConditions(w.as_f64()));
    }

    let rhs = Rhs { model };
    let node_coeffs = |x: T| -> Result<(T, T)> {
        let v = model.eval(x)?;
        Ok((v.q, v.dq))
    };

    let mut mesh = vec![x0];
    let mut states = vec![y0];
    let mut coeffs = vec![node_coeffs(x0)?];

    let mut x = x0;
    let mut y = y0;
    let mut k1 = rhs.eval(x, &y)?;
    let mut h = initial_step(&rhs, x, &y, &k1, tol, xmax - x0)?;
    let err_of = |y: &State<T>, y_new: &State<T>, e: &State<T>| -> T {
        let mut sum = T::zero();
        for i in 0..4 {
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            let r = e[i] / sc;
            sum = sum + r * r;
        }
        (sum / T::lit(4.0)).sqrt()
    };

    let safety = T::lit(0.9);
    let min_factor = T::lit(0.2);
    let max_factor = T::lit(5.0);
    let mut err_prev = T::lit(1e-4);
    let mut rejected = false;
    let mut steps = 0usize;

    while x < xmax {
        if steps >= max_steps {
            return Err(Error::TooManySteps {
                x: x.as_f64(),
                limit: max_steps,
            });
        }
        steps += 1;
        let mut last = false;
        if x + h >= xmax || x + h * T::lit(1.01) >= xmax {
            h = xmax - x;
            last = true;
        }
        if h <= T::lit(16.0) * T::epsilon() * x.abs().max(T::one()) {
            return Err(Error::StepUnderflow(x.as_f64()));
        }

        let k2 = rhs.eval(x + T::lit(C2) * h, &axpy(&y, h, &[(A21, &k1)]))?;
        let k3 = rhs.eval(x + T::lit(C3) * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = rhs.eval(x + T::lit(C4) * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = rhs.eval(
            x + T::lit(C5) * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let x_new = if last { xmax } else { x + h };
        let k6 = rhs.eval(
            x_new,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = rhs.eval(x_new, &y_new)?;
        let e = axpy(
            &[T::zero(); 4],
            h,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        let err = err_of(&y, &y_new, &e);
        if !err.is_finite() {
            h = h * min_factor;
            rejected = true;
            continue;
        }

        if err <= T::one() {
            // PI controller (Gustafsson), exponents as in Hairer's dopri5.
            let fac = if err == T::zero() {
                max_factor
            } else {
                safety * err.powf(T::lit(-0.17)) * err_prev.powf(T::lit(0.04))
            };
            let mut fac = fac.min(max_factor).max(min_factor);
            if rejected {
                fac = fac.min(T::one());
            }
            err_prev = err.max(T::lit(1e-4));
            x = x_new;
            y = project_wronskian(y_new, w);
            k1 = if y == y_new { k7 } else { rhs.eval(x, &y)? };
            mesh.push(x);
            states.push(y);
            coeffs.push(node_coeffs(x)?);
            h = h * fac;
            rejected = false;
        } else {
            let fac = (safety * err.powf(T::lit(-0.2))).max(min_factor);
            h = h * fac;
            rejected = true;
        }
    }

    Ok(PairTrajectory {
        model: model.clone(),
        mesh,
        states,
        coeffs,
        w,
        tol,
    })
}

/// Moves `s` along the gradient of the Wronskian so that it equals `w`
/// again. The correction is of the size of the local error; Abel's identity
/// then holds to rounding over arbitrarily many steps.
fn project_wronskian<T: Real>(s: State<T>, w: T) -> State<T> {
    let g = [s[3], -s[2], -s[1], s[0]];
    let norm2 = g.iter().fold(T::zero(), |acc, &v| acc + v * v);
    if norm2 == T::zero() {
        return s;
    }
    let lambda = (w - wronskian(&s)) / norm2;
    [
        s[0] + lambda * g[0],
        s[1] + lambda * g[1],
        s[2] + lambda * g[2],
        s[3] + lambda * g[3],
    ]
}

fn initial_step<T: Real>(
    rhs: &Rhs<'_, T>,
    x: T,
    y: &State<T>,
    f0: &State<T>,
    tol: Tolerances<T>,
    span: T,
) -> Result<T> {
    let norm = |v: &State<T>| -> T {
        let mut s = T::zero();
        for i in 0..4 {
            let sc = tol.atol + tol.rtol * y[i].abs();
            s = s + (v[i] / sc) * (v[i] / sc);
        }
        (s / T::lit(4.0)).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let mut h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    h0 = h0.min(span);
    let y1 = axpy(y, h0, &[(1.0, f0)]);
    let f1 = rhs.eval(x + h0, &y1)?;
    let mut diff = [T::zero(); 4];
    for i in 0..4 {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
    };
    Ok((T::lit(100.0) * h0).min(h1).min(span))
}

// Quintic Hermite basis on [0, 1] and its derivative.
#[inline]
fn hermite5<T: Real>(t: T) -> ([T; 6], [T; 6]) {
    let l = T::lit;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let basis = [
        T::one() - l(10.0) * t3 + l(15.0) * t4 - l(6.0) * t5,
        t - l(6.0) * t3 + l(8.0) * t4 - l(3.0) * t5,
        l(0.5) * (t2 - l(3.0) * t3 + l(3.0) * t4 - t5),
        l(10.0) * t3 - l(15.0) * t4 + l(6.0) * t5,
        -l(4.0) * t3 + l(7.0) * t4 - l(3.0) * t5,
        l(0.5) * (t3 - l(2.0) * t4 + t5),
    ];
    let slope = [
        -l(30.0) * t2 + l(60.0) * t3 - l(30.0) * t4,
        T::one() - l(18.0) * t2 + l(32.0) * t3 - l(15.0) * t4,
        l(0.5) * (l(2.0) * t - l(9.0) * t2 + l(12.0) * t3 - l(5.0) * t4),
        l(30.0) * t2 - l(60.0) * t3 + l(30.0) * t4,
        -l(12.0) * t2 + l(28.0) * t3 - l(15.0) * t4,
        l(0.5) * (l(3.0) * t2 - l(8.0) * t3 + l(5.0) * t4),
    ];
    (basis, slope)
}

impl<T: Real> PairTrajectory<T> {
    pub fn model(&self) -> &EquationModel<T> {
        &self.model
    }

    pub fn mesh(&self) -> &[T] {
        &self.mesh
    }

    pub fn states(&self) -> &[State<T>] {
        &self.states
    }

    /// Wronskian recorded at `t0`.
    pub fn w(&self) -> T {
        self.w
    }

    pub fn tolerances(&self) -> Tolerances<T> {
        self.tol
    }

    pub fn t0(&self) -> T {
        self.mesh[0]
    }

    pub fn t_end(&self) -> T {
        *self.mesh.last().expect("mesh has at least two nodes")
    }

    pub fn len(&self) -> usize {
        self.mesh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    /// True when `|w| = 1` up to rounding.
    pub fn is_unit(&self) -> bool {
        (self.w.abs() - T::one()).abs() <= T::lit(1e-12)
    }

    /// Largest `|w(t_i) - w(t0)|` over the mesh.
    pub fn max_wronskian_drift(&self) -> T {
        self.states
            .iter()
            .map(|s| (wronskian(s) - self.w).abs())
            .fold(T::zero(), T::max)
    }

    /// Index `i` with `mesh[i] <= x <= mesh[i+1]`.
    fn interval(&self, x: T) -> Result<usize> {
        let (lo, hi) = (self.t0(), self.t_end());
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfSpan {
                x: x.as_f64(),
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        let idx = self.mesh.partition_point(|&t| t <= x);
        Ok(idx.saturating_sub(1).min(self.mesh.len() - 2))
    }

    /// Hermite data `(f, f', f'')` for component `c` at node `i`.
    fn jets(&self, i: usize, c: usize) -> (T, T, T) {
        let s = &self.states[i];
        let (q, dq) = self.coeffs[i];
        let base = c & !1;
        let (y, yp) = (s[base], s[base + 1]);
        if c.is_multiple_of(2) {
            (y, yp, -q * y)
        } else {
            (yp, -q * y, -dq * y - q * yp)
        }
    }

    /// Interpolated state at `x`; exact at mesh nodes.
    pub fn sample(&self, x: T) -> Result<State<T>> {
        Ok(self.sample_with_slope(x)?.0)
    }

    /// Interpolated state and the derivative of each interpolant.
    pub fn sample_with_slope(&self, x: T) -> Result<(State<T>, State<T>)> {
        let i = self.interval(x)?;
        let (a, b) = (self.mesh[i], self.mesh[i + 1]);
        if x == a || x == b {
            let j = if x == a { i } else { i + 1 };
            let mut slope = [T::zero(); 4];
            for (c, d) in slope.iter_mut().enumerate() {
                *d = self.jets(j, c).1;
            }
            return Ok((self.states[j], slope));
        }
        let h = b - a;
        let t = (x - a) / h;
        let (basis, dbasis) = hermite5(t);
        let mut value = [T::zero(); 4];
        let mut slope = [T::zero(); 4];
        for c in 0..4 {
            let (f0, d0, s0) = self.jets(i, c);
            let (f1, d1, s1) = self.jets(i + 1, c);
            let data = [f0, d0 * h, s0 * h * h, f1, d1 * h, s1 * h * h];
            let mut v = T::zero();
            let mut dv = T::zero();
            for k in 0..6 {
                v = v + basis[k] * data[k];
                dv = dv + dbasis[k] * data[k];
            }
            value[c] = v;
            slope[c] = dv / h;
        }
        Ok((value, slope))
    }

    /// Scales both solutions by `|w|^(-1/2)` so the Wronskian becomes `±1`.
    pub fn normalize_unit_wronskian(&self) -> PairTrajectory<T> {
        let f = self.w.abs().sqrt().recip();
        let mut out = self.clone();
        for s in out.states.iter_mut() {
            for v in s.iter_mut() {
                *v = *v * f;
            }
        }
        out.w = self.w * f * f;
        if (out.w.abs() - T::one()).abs() <= T::lit(8.0) * T::epsilon() {
            out.w = out.w.signum();
        }
        out
    }

    /// Replaces `(y1, y2)` by `(a y1 + b y2, c y1 + d y2)` node by node.
    pub(crate) fn combine(&self, a: T, b: T, c: T, d: T) -> PairTrajectory<T> {
        let mut out = self.clone();
        for s in out.states.iter_mut() {
            let [y1, p1, y2, p2] = *s;
            *s = [a * y1 + b * y2, a * p1 + b * p2, c * y1 + d * y2, c * p1 + d * p2];
        }
        let det = a * d - b * c;
        out.w = self.w * det;
        if (out.w.abs() - T::one()).abs() <= T::lit(64.0) * T::epsilon() {
            out.w = out.w.signum();
        }
        out
    }

    /// Largest interpolation residual `|(y')' + q y|` at interval midpoints,
    /// over both solutions, relative to `max(|y|, |y'|, |q y|, √|q| |y'|)`.
    /// The last two terms put the scale in the units of `y''` where `q` is
    /// large.
    pub fn midpoint_residual(&self) -> Result<T> {
        let mut worst = T::zero();
        for i in 0..self.mesh.len() - 1 {
            let xm = (self.mesh[i] + self.mesh[i + 1]) * T::lit(0.5);
            let (s, d) = self.sample_with_slope(xm)?;
            let q = self.model.q(xm)?;
            let root = q.abs().sqrt();
            for base in [0, 2] {
                let (y, yp) = (s[base].abs(), s[base + 1].abs());
                let scale = y.max(yp).max(q.abs() * y).max(root * yp);
                if scale > T::zero() {
                    worst = worst.max((d[base + 1] + q * s[base]).abs() / scale);
                }
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_constant(xmax: f64, rtol: f64) -> PairTrajectory<f64> {
        let m = EquationModel::<f64>::catalog_get("constant", &[("c", 1.0)]).unwrap();
        integrate_pair(&m, (0.0, 1.0), (1.0, 0.0), xmax, Tolerances::new(rtol, 1e-12)).unwrap()
    }

    #[test]
    fn harmonic_pair() {
        let tr = unit_constant(std::f64::consts::PI, 1e-10);
        let s = tr.sample(std::f64::consts::FRAC_PI_2).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-9);
        assert!(s[2].abs() < 1e-9);
        let s = tr.sample(1.0).unwrap();
        let expect = [1f64.sin(), 1f64.cos(), 1f64.cos(), -1f64.sin()];
        for k in 0..4 {
            assert!((s[k] - expect[k]).abs() < 1e-9);
        }
        assert_eq!(tr.w(), -1.0);
    }

    #[test]
    fn nodes_are_reproduced_exactly() {
        let tr = unit_constant(10.0, 1e-8);
        for (i, &x) in tr.mesh().iter().enumerate() {
            assert_eq!(tr.sample(x).unwrap(), tr.states()[i]);
        }
        assert!(tr.sample(10.0 + 1e-9).is_err());
        assert!(tr.sample(-1e-9).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        let m = EquationModel::<f64>::catalog_get("constant", &[("c", 1.0)]).unwrap();
        let tol = Tolerances::default();
        assert!(matches!(
            integrate_pair(&m, (1.0, 2.0), (2.0, 4.0), 1.0, tol),
            Err(Error::DependentInitialConditions(_))
        ));
        assert!(matches!(
            integrate_pair(&m, (0.0, 1.0), (1.0, 0.0), 0.0, tol),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(matches!(
            integrate_pair(&m, (0.0, 1.0), (1.0, 0.0), 1.0, Tolerances::new(1e-2, 1e-12)),
            Err(Error::Tolerance(_))
        ));
    }

    #[test]
    fn singular_coefficient_underflows() {
        // q = 1/(1-x)^4 blows up at x = 1.
        let m = EquationModel::<f64>::parse_q("(1 - x)^-4", &[]).unwrap();
        let r = integrate_pair_with_limit(&m, (0.0, 1.0), (1.0, 0.0), 2.0, Tolerances::default(), 200_000);
        assert!(
            matches!(r, Err(Error::StepUnderflow(x)) if (x - 1.0).abs() < 1e-2)
                || matches!(r, Err(Error::TooManySteps { .. }))
                || matches!(r, Err(Error::Evaluation { .. })),
            "{r:?}"
        );
    }

    #[test]
    fn normalization_and_combination() {
        let tr = unit_constant(5.0, 1e-10);
        let doubled = tr.combine(2.0, 0.0, 0.0, 1.0);
        assert_eq!(doubled.w(), -2.0);
        let unit = doubled.normalize_unit_wronskian();
        assert_eq!(unit.w(), -1.0);
        let s = unit.sample(1.0).unwrap();
        assert!((s[0] - 2f64.sqrt() * 1f64.sin()).abs() < 1e-9);
        assert!((s[2] - 1f64.cos() / 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(tr.normalize_unit_wronskian().w(), -1.0);
    }

    #[test]
    fn cauchy_euler_closed_form() {
        let m = EquationModel::<f64>::catalog_get("cauchy-euler", &[("gamma", 1.0)]).unwrap();
        let s = m.param("s").unwrap();
        let tr = integrate_pair(&m, (0.0, s), (1.0, 0.5), 50.0, Tolerances::default()).unwrap();
        let x = (std::f64::consts::PI / (2.0 * s)).exp();
        let exact = x.sqrt() * (s * x.ln()).sin();
        let got = tr.sample(x).unwrap()[0];
        assert!((got - exact).abs() <= 1e-7 * exact.abs(), "{got} vs {exact}");
        for i in 0..40 {
            let x = 1.0 + 49.0 * i as f64 / 39.0;
            let st = tr.sample(x).unwrap();
            let (sl, r) = ((s * x.ln()), x.sqrt());
            assert!((st[0] - r * sl.sin()).abs() <= 1e-7 * r);
            assert!((st[2] - r * sl.cos()).abs() <= 1e-7 * r);
        }
    }

    #[test]
    fn wronskian_is_conserved_on_long_runs() {
        let m = EquationModel::<f64>::catalog_get("gen-airy", &[("nu", 1.0 / 3.0)]).unwrap();
        let tr = integrate_pair(&m, (0.3, -1.0), (2.0, 0.5), 200.0, Tolerances::default()).unwrap();
        assert!(tr.max_wronskian_drift() <= 1e-8);
        assert!(tr.max_wronskian_drift() <= 100.0 * 1e-10 * (1.0 + tr.w().abs()));
        assert!(tr.midpoint_residual().unwrap() <= 10.0 * 1e-10);
    }

    fn max_closed_form_error(rtol: f64) -> f64 {
        let tr = unit_constant(20.0, rtol);
        (0..=400)
            .map(|i| {
                let x = 20.0 * i as f64 / 400.0;
                let s = tr.sample(x).unwrap();
                (s[0] - x.sin()).abs().max((s[2] - x.cos()).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn error_shrinks_with_tolerance() {
        for rtol in [1e-6, 1e-7, 1e-8, 1e-9] {
            let coarse = max_closed_form_error(rtol);
            let fine = max_closed_form_error(rtol / 2.0);
            assert!(fine * 2.0 <= coarse, "rtol {rtol}: {coarse} -> {fine}");
        }
    }

    #[test]
    fn time_reversal_recovers_initial_data() {
        // q constant and even in x: running the end state forward with the
        // velocity flipped retraces the trajectory.
        let rtol = 1e-10;
        let m = EquationModel::<f64>::catalog_get("constant", &[("c", 1.0)])
            .unwrap()
            .with_x0(1.0)
            .unwrap();
        let ic1 = (0.4, -0.7);
        let ic2 = (1.1, 0.2);
        let fwd = integrate_pair(&m, ic1, ic2, 10.0, Tolerances::new(rtol, 1e-12)).unwrap();
        let end = *fwd.states().last().unwrap();
        let back = integrate_pair(
            &m,
            (end[0], -end[1]),
            (end[2], -end[3]),
            10.0,
            Tolerances::new(rtol, 1e-12),
        )
        .unwrap();
        let got = *back.states().last().unwrap();
        let expect = [ic1.0, -ic1.1, ic2.0, -ic2.1];
        for k in 0..4 {
            assert!(
                (got[k] - expect[k]).abs() <= 100.0 * rtol,
                "{k}: {} vs {}",
                got[k],
                expect[k]
            );
        }
    }

    #[test]
    fn midpoint_residual_is_small() {
        let tr = unit_constant(20.0, 1e-10);
        assert!(tr.midpoint_residual().unwrap() <= 1e-9);
    }
}
