//! Bessel functions of non-integer order `0 < ν < 1` and the modulus
//! `t (J_ν² + Y_ν²)`.
//!
//! Small arguments use the ascending series; for `t > 2` the functions are
//! carried by integrating `u'' + (1 - (ν² - 1/4)/t²) u = 0`, which
//! `√t J_ν(t)` and `√t Y_ν(t)` satisfy, from series data at `t = 2`.

use crate::error::{Error, Result};
use crate::integrate::{integrate_pair, PairTrajectory, Tolerances};
use crate::qfunc::EquationModel;
use crate::real::Real;

/// Argument at which evaluation switches from series to propagation.
pub const SERIES_LIMIT: f64 = 2.0;
const PROPAGATION_RTOL: f64 = 1e-12;
const PROPAGATION_ATOL: f64 = 1e-15;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Γ(x)` for real `x > 0`: Lanczos approximation on `[1, 2]`, moved there
/// with `Γ(z + 1) = z Γ(z)`.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma of {x}")));
    }
    let mut z = x.as_f64();
    let mut factor = 1.0f64;
    while z < 1.0 {
        factor /= z;
        z += 1.0;
    }
    while z > 2.0 {
        z -= 1.0;
        factor *= z;
    }
    let zm = z - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (zm + i as f64);
    }
    let t = zm + LANCZOS_G + 0.5;
    let g = (2.0 * std::f64::consts::PI).sqrt() * t.powf(zm + 0.5) * (-t).exp() * acc;
    Ok(T::lit(g * factor))
}

/// How a [`BesselValue`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Series,
    Propagated,
}

/// `J_ν(t)` and `Y_ν(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselValue<T> {
    pub nu: T,
    pub t: T,
    pub j: T,
    pub y: T,
    pub method: Method,
    pub(crate) dj: T,
    pub(crate) dy: T,
}

impl<T: Real> BesselValue<T> {
    /// `t (J² + Y²)`.
    pub fn modulus(&self) -> T {
        self.t * (self.j * self.j + self.y * self.y)
    }

    /// Relative error of `J Y' - J' Y = 2/(π t)`.
    pub fn wronskian_error(&self) -> T {
        let exact = T::lit(2.0) / (T::PI() * self.t);
        ((self.j * self.dy - self.dj * self.y) - exact).abs() / exact
    }
}

fn check_order<T: Real>(nu: T) -> Result<()> {
    if nu > T::zero() && nu < T::one() {
        Ok(())
    } else {
        Err(Error::ParameterRange {
            name: "nu".into(),
            value: nu.as_f64(),
            expected: "0 < nu < 1",
        })
    }
}

fn check_argument<T: Real>(t: T) -> Result<()> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("Bessel argument {t} must be positive")))
    }
}

/// `(J_μ(t), J_μ'(t))` from the ascending series, for `μ > -1`.
fn series_j<T: Real>(mu: T, t: T) -> Result<(T, T)> {
    let half = t * T::lit(0.5);
    let x2 = half * half;
    let mut term = half.powf(mu) / gamma(mu + T::one())?;
    let mut sum = term;
    let mut dsum = term * mu;
    for k in 1..400 {
        let kk = T::from_usize(k).unwrap();
        term = -term * x2 / (kk * (kk + mu));
        sum = sum + term;
        dsum = dsum + term * (T::lit(2.0) * kk + mu);
        if term.abs() < T::lit(1e-17) * sum.abs() {
            break;
        }
    }
    Ok((sum, dsum / t))
}

/// Series evaluation with the connection formula for `Y_ν`.
fn series<T: Real>(nu: T, t: T) -> Result<BesselValue<T>> {
    let (j, dj) = series_j(nu, t)?;
    let (jm, djm) = series_j(-nu, t)?;
    let (s, c) = (nu * T::PI()).sin_cos();
    Ok(BesselValue {
        nu,
        t,
        j,
        y: (j * c - jm) / s,
        method: Method::Series,
        dj,
        dy: (dj * c - djm) / s,
    })
}

/// `√t J` and `√t Y` with their derivatives from `J`, `J'`, `Y`, `Y'`.
fn normal_form_data<T: Real>(b: &BesselValue<T>) -> ((T, T), (T, T)) {
    let r = b.t.sqrt();
    let lift = |f: T, df: T| (r * f, f / (T::lit(2.0) * r) + r * df);
    (lift(b.j, b.dj), lift(b.y, b.dy))
}

/// Inverse of [`normal_form_data`] at `t`.
fn from_normal_form<T: Real>(nu: T, t: T, s: [T; 4]) -> BesselValue<T> {
    let r = t.sqrt();
    let drop = |u: T, du: T| (u / r, (du - u / (T::lit(2.0) * t)) / r);
    let (j, dj) = drop(s[0], s[1]);
    let (y, dy) = drop(s[2], s[3]);
    BesselValue {
        nu,
        t,
        j,
        y,
        method: Method::Propagated,
        dj,
        dy,
    }
}

fn propagate<T: Real>(nu: T, start: T, tmax: T) -> Result<PairTrajectory<T>> {
    let seed = series(nu, start)?;
    let (uj, uy) = normal_form_data(&seed);
    let model = EquationModel::bessel_normal(nu).with_x0(start)?;
    integrate_pair(
        &model,
        uj,
        uy,
        tmax,
        Tolerances::new(T::lit(PROPAGATION_RTOL), T::lit(PROPAGATION_ATOL)),
    )
}

/// `J_ν(t)` and `Y_ν(t)` for `0 < ν < 1`, `t > 0`.
pub fn bessel_jy<T: Real>(nu: T, t: T) -> Result<BesselValue<T>> {
    check_order(nu)?;
    check_argument(t)?;
    let limit = T::lit(SERIES_LIMIT);
    if t <= limit {
        return series(nu, t);
    }
    let traj = propagate(nu, limit, t)?;
    Ok(from_normal_form(nu, t, traj.sample(t)?))
}

/// `t (J_ν² + Y_ν²)`.
pub fn modulus<T: Real>(nu: T, t: T) -> Result<T> {
    Ok(bessel_jy(nu, t)?.modulus())
}

/// `x (J_ν² + Y_ν²)(2ν x^(1/(2ν)))`, the amplitude of the Bessel pair of the
/// generalized Airy equation, for `0 < ν ≤ 1/2`.
pub fn example1_v<T: Real>(nu: T, x: T) -> Result<T> {
    if !(nu > T::zero() && nu <= T::lit(0.5)) {
        return Err(Error::ParameterRange {
            name: "nu".into(),
            value: nu.as_f64(),
            expected: "0 < nu <= 1/2",
        });
    }
    check_argument(x)?;
    let t = T::lit(2.0) * nu * x.powf((T::lit(2.0) * nu).recip());
    Ok(x * modulus(nu, t)?.max(T::zero()) / t)
}

/// Evaluates `J_ν`, `Y_ν` at many arguments with one propagation.
pub struct BesselTable<T> {
    nu: T,
    traj: Option<PairTrajectory<T>>,
}

impl<T: Real> BesselTable<T> {
    /// Prepares evaluation for `0 < t ≤ tmax`.
    pub fn new(nu: T, tmax: T) -> Result<Self> {
        check_order(nu)?;
        check_argument(tmax)?;
        let limit = T::lit(SERIES_LIMIT);
        let traj = if tmax > limit {
            Some(propagate(nu, limit, tmax)?)
        } else {
            None
        };
        Ok(BesselTable { nu, traj })
    }

    pub fn eval(&self, t: T) -> Result<BesselValue<T>> {
        check_argument(t)?;
        match &self.traj {
            Some(traj) if t > T::lit(SERIES_LIMIT) => Ok(from_normal_form(self.nu, t, traj.sample(t)?)),
            _ => series(self.nu, t),
        }
    }

    pub fn modulus(&self, t: T) -> Result<T> {
        Ok(self.eval(t)?.modulus())
    }

    /// [`example1_v`] at `x`.
    pub fn example1_v(&self, x: T) -> Result<T> {
        let t = T::lit(2.0) * self.nu * x.powf((T::lit(2.0) * self.nu).recip());
        Ok(x * self.modulus(t)? / t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_2_PI, PI};

    #[test]
    fn gamma_values() {
        assert!((gamma(0.5f64).unwrap() - PI.sqrt()).abs() < 1e-12 * PI.sqrt());
        assert!((gamma(1.5f64).unwrap() - PI.sqrt() / 2.0).abs() < 1e-13);
        assert!((gamma(5.0f64).unwrap() - 24.0).abs() < 1e-11);
        assert!((gamma(10.5f64).unwrap() - 1133278.3889487856).abs() < 1e-12 * 1133278.4);
        assert!(gamma(0.0f64).is_err());
    }

    #[test]
    fn half_order_closed_forms() {
        let b = bessel_jy(0.5f64, PI / 2.0).unwrap();
        assert!((b.j - FRAC_2_PI).abs() < 1e-13);
        assert_eq!(b.method, Method::Series);
        let b = bessel_jy(0.5f64, PI).unwrap();
        assert!((b.y - 2f64.sqrt() / PI).abs() < 1e-10);
        assert_eq!(b.method, Method::Propagated);
        for t in [0.3, 1.0, 2.0, 7.5, 40.0] {
            assert!((modulus(0.5f64, t).unwrap() - FRAC_2_PI).abs() < 1e-10, "{t}");
        }
        for x in [0.5, 3.0, 20.0] {
            assert!((example1_v(0.5f64, x).unwrap() - FRAC_2_PI).abs() < 1e-10);
        }
    }

    #[test]
    fn series_and_propagation_agree_at_switch() {
        for nu in [0.1f64, 1.0 / 3.0, 0.45, 0.8] {
            let traj = propagate(nu, 1.0, 2.0).unwrap();
            let p = from_normal_form(nu, 2.0, traj.sample(2.0).unwrap());
            let s = series(nu, 2.0).unwrap();
            assert!((p.j - s.j).abs() < 1e-10 && (p.y - s.y).abs() < 1e-10, "{nu}");
        }
    }

    #[test]
    fn wronskian_relation() {
        for nu in [0.2f64, 1.0 / 3.0, 0.7] {
            let table = BesselTable::new(nu, 100.0).unwrap();
            for t in crate::grid::logspace(0.05, 100.0, 20) {
                let b = table.eval(t).unwrap();
                assert!(b.wronskian_error() < 1e-9, "{nu} {t}: {}", b.wronskian_error());
            }
        }
    }

    #[test]
    fn modulus_increases_towards_two_over_pi() {
        let table = BesselTable::new(1.0f64 / 3.0, 64.0).unwrap();
        let values: Vec<f64> = (0..7).map(|k| table.modulus(2f64.powi(k)).unwrap()).collect();
        assert!(values.windows(2).all(|p| p[1] > p[0]));
        assert!((values[6] - FRAC_2_PI).abs() < 0.01 * FRAC_2_PI);
        assert!(values[6] < FRAC_2_PI && FRAC_2_PI - values[6] <= 1.0 / (4.0 * 64.0 * 64.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bessel_jy(1.0f64, 1.0).is_err());
        assert!(bessel_jy(0.0f64, 1.0).is_err());
        assert!(bessel_jy(0.3f64, 0.0).is_err());
        assert!(example1_v(0.6f64, 1.0).is_err());
    }
}
