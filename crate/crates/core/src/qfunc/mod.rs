//! Coefficient functions `q(x)` of `y'' + q(x) y = 0`.
//!
//! A model is either an entry of the built-in catalog or a parsed
//! expression. Both expose `q`, `q'` and `q''` exactly: closed forms for the
//! catalog, differentiated expression trees for parsed input.

mod expr;

pub use expr::{Expression, Func, Node};

use crate::error::{Error, Result};
use crate::real::Real;

/// `q`, `q'` and `q''` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QValues<T> {
    pub q: T,
    pub dq: T,
    pub d2q: T,
}

/// Closed-form coefficient families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family<T> {
    /// `q = c`.
    Constant { c: T },
    /// `q = x^(1/ν - 2)`, the generalized Airy equation, solved by
    /// `√x J_ν(2ν x^(1/(2ν)))` and `√x Y_ν(2ν x^(1/(2ν)))`. `ν = 1/3` is the
    /// Airy equation `y'' + x y = 0`.
    GenAiry { nu: T },
    /// `q = 1/x`.
    InverseX,
    /// `q = γ²/x²`.
    CauchyEuler { gamma: T },
    /// `q = 1 - (ν² - 1/4)/t²`, the normal form satisfied by `√t J_ν(t)`.
    BesselNormal { nu: T },
}

impl<T: Real> Family<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Constant { .. } => "constant",
            Family::GenAiry { .. } => "gen-airy",
            Family::InverseX => "inverse-x",
            Family::CauchyEuler { .. } => "cauchy-euler",
            Family::BesselNormal { .. } => "bessel-normal",
        }
    }

    fn singular_at_origin(&self) -> bool {
        !matches!(self, Family::Constant { .. })
    }

    fn eval(&self, x: T) -> QValues<T> {
        let two = T::lit(2.0);
        match *self {
            Family::Constant { c } => QValues {
                q: c,
                dq: T::zero(),
                d2q: T::zero(),
            },
            Family::GenAiry { nu } => {
                let p = nu.recip() - two;
                if p == T::zero() {
                    return QValues {
                        q: T::one(),
                        dq: T::zero(),
                        d2q: T::zero(),
                    };
                }
                let xp = x.powf(p);
                QValues {
                    q: xp,
                    dq: p * xp / x,
                    d2q: p * (p - T::one()) * xp / (x * x),
                }
            }
            Family::InverseX => {
                let r = x.recip();
                QValues {
                    q: r,
                    dq: -r * r,
                    d2q: two * r * r * r,
                }
            }
            Family::CauchyEuler { gamma } => {
                let g2 = gamma * gamma;
                let r = x.recip();
                let r2 = r * r;
                QValues {
                    q: g2 * r2,
                    dq: -two * g2 * r2 * r,
                    d2q: T::lit(6.0) * g2 * r2 * r2,
                }
            }
            Family::BesselNormal { nu } => {
                let k = nu * nu - T::lit(0.25);
                let r = x.recip();
                let r2 = r * r;
                QValues {
                    q: T::one() - k * r2,
                    dq: two * k * r2 * r,
                    d2q: -T::lit(6.0) * k * r2 * r2,
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Source<T> {
    Catalog(Family<T>),
    Expression(Expression<T>),
}

/// The coefficient `q` of `y'' + q(x) y = 0` with exact `q'` and `q''`, its
/// parameters, and the left endpoint `x0` of the interval of interest.
///
/// Immutable once built; evaluation takes `&self` and is thread-safe.
#[derive(Clone, Debug)]
pub struct EquationModel<T> {
    source: Source<T>,
    x0: T,
    params: Vec<(String, T)>,
}

fn lookup<T: Real>(params: &[(&str, T)], names: &[&str]) -> Option<T> {
    params.iter().find(|(k, _)| names.contains(k)).map(|(_, v)| *v)
}

fn require<T: Real>(params: &[(&str, T)], names: &[&str]) -> Result<T> {
    lookup(params, names).ok_or_else(|| Error::MissingParameter(names[0].to_string()))
}

impl<T: Real> EquationModel<T> {
    /// Looks up a catalog equation by name.
    ///
    /// | name | parameter | range |
    /// |---|---|---|
    /// | `constant` | `c` | `c > 0` |
    /// | `gen-airy` | `nu` | `0 < ν ≤ 1/2` |
    /// | `inverse-x` | | |
    /// | `cauchy-euler` | `gamma` | `γ² > 1/4` |
    ///
    /// `constant` starts at `x0 = 0`, the others at `x0 = 1`. For
    /// `cauchy-euler` the derived `s = √(γ² - 1/4)` is stored as parameter `s`.
    pub fn catalog_get(name: &str, params: &[(&str, T)]) -> Result<Self> {
        let out_of_range = |name: &str, value: T, expected| Error::ParameterRange {
            name: name.to_string(),
            value: value.as_f64(),
            expected,
        };
        let (family, stored) = match name {
            "constant" => {
                let c = lookup(params, &["c"]).unwrap_or_else(T::one);
                if !(c > T::zero()) {
                    return Err(out_of_range("c", c, "c > 0"));
                }
                (Family::Constant { c }, vec![("c".to_string(), c)])
            }
            "gen-airy" => {
                let nu = require(params, &["nu", "ν"])?;
                if !(nu > T::zero() && nu <= T::lit(0.5)) {
                    return Err(out_of_range("nu", nu, "0 < nu <= 1/2"));
                }
                (Family::GenAiry { nu }, vec![("nu".to_string(), nu)])
            }
            "inverse-x" => (Family::InverseX, Vec::new()),
            "cauchy-euler" => {
                let gamma = require(params, &["gamma", "γ"])?;
                let excess = gamma * gamma - T::lit(0.25);
                if !(excess > T::zero()) {
                    return Err(out_of_range("gamma", gamma, "gamma^2 > 1/4"));
                }
                (
                    Family::CauchyEuler { gamma },
                    vec![("gamma".to_string(), gamma), ("s".to_string(), excess.sqrt())],
                )
            }
            other => return Err(Error::UnknownEquation(other.to_string())),
        };
        let x0 = if family.singular_at_origin() {
            T::one()
        } else {
            T::zero()
        };
        Ok(EquationModel {
            source: Source::Catalog(family),
            x0,
            params: stored,
        })
    }

    /// Parses an arithmetic expression in `x` (see [`Expression::parse`]).
    /// The model starts at `x0 = 0`; use [`EquationModel::with_x0`] to move it.
    pub fn parse_q(text: &str, params: &[(&str, T)]) -> Result<Self> {
        let owned: Vec<(String, T)> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let expression = Expression::parse(text, &owned)?;
        Ok(EquationModel {
            source: Source::Expression(expression),
            x0: T::zero(),
            params: owned,
        })
    }

    /// Normal form of Bessel's equation, solved by `√t J_ν(t)` and `√t Y_ν(t)`.
    pub fn bessel_normal(nu: T) -> Self {
        EquationModel {
            source: Source::Catalog(Family::BesselNormal { nu }),
            x0: T::one(),
            params: vec![("nu".to_string(), nu)],
        }
    }

    /// Moves the left endpoint. Families singular at the origin need `x0 > 0`.
    pub fn with_x0(mut self, x0: T) -> Result<Self> {
        let singular = matches!(&self.source, Source::Catalog(f) if f.singular_at_origin());
        if !x0.is_finite() || (singular && !(x0 > T::zero())) {
            return Err(Error::InvalidArgument(format!("x0 = {x0} invalid for {}", self.name())));
        }
        self.x0 = x0;
        Ok(self)
    }

    pub fn x0(&self) -> T {
        self.x0
    }

    pub fn source(&self) -> &Source<T> {
        &self.source
    }

    pub fn family(&self) -> Option<&Family<T>> {
        match &self.source {
            Source::Catalog(f) => Some(f),
            Source::Expression(_) => None,
        }
    }

    /// Catalog name, or the expression text.
    pub fn name(&self) -> &str {
        match &self.source {
            Source::Catalog(f) => f.name(),
            Source::Expression(e) => e.text(),
        }
    }

    pub fn params(&self) -> &[(String, T)] {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<T> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// `q(x)` alone, the only quantity the integrator needs.
    pub fn q(&self, x: T) -> Result<T> {
        match &self.source {
            Source::Catalog(f) => Ok(f.eval(x).q),
            Source::Expression(e) => e.q(x),
        }
    }

    pub fn eval(&self, x: T) -> Result<QValues<T>> {
        let values = match &self.source {
            Source::Catalog(f) => f.eval(x),
            Source::Expression(e) => {
                let (q, dq, d2q) = e.eval(x)?;
                QValues { q, dq, d2q }
            }
        };
        if values.q.is_finite() && values.dq.is_finite() && values.d2q.is_finite() {
            Ok(values)
        } else {
            Err(Error::Evaluation {
                x: x.as_f64(),
                message: "non-finite coefficient".into(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = EquationModel<f64>;

    fn fd_check(model: &EquationModel<f64>, lo: f64, hi: f64) {
        for i in 0..64 {
            let x = lo * (hi / lo).powf(i as f64 / 63.0);
            let h = 1e-5 * (1.0 + x.abs());
            let v = model.eval(x).unwrap();
            let plus = model.eval(x + h).unwrap();
            let minus = model.eval(x - h).unwrap();
            let d1 = (plus.q - minus.q) / (2.0 * h);
            let d2 = (plus.dq - minus.dq) / (2.0 * h);
            assert!(
                (d1 - v.dq).abs() <= 1e-6 * (1.0 + v.dq.abs()),
                "{}: q' at {x}: fd {d1} vs {}",
                model.name(),
                v.dq
            );
            assert!(
                (d2 - v.d2q).abs() <= 1e-6 * (1.0 + v.d2q.abs()),
                "{}: q'' at {x}: fd {d2} vs {}",
                model.name(),
                v.d2q
            );
        }
    }

    fn catalog() -> Vec<EquationModel<f64>> {
        vec![
            M::catalog_get("constant", &[("c", 2.0)]).unwrap(),
            M::catalog_get("gen-airy", &[("nu", 1.0 / 3.0)]).unwrap(),
            M::catalog_get("gen-airy", &[("nu", 0.4)]).unwrap(),
            M::catalog_get("inverse-x", &[]).unwrap(),
            M::catalog_get("cauchy-euler", &[("gamma", 1.0)]).unwrap(),
        ]
    }

    #[test]
    fn catalog_values() {
        let m = M::catalog_get("gen-airy", &[("nu", 1.0 / 3.0)]).unwrap();
        let v = m.eval(4.0).unwrap();
        assert!((v.q - 4.0).abs() < 1e-13);
        assert!((v.dq - 1.0).abs() < 1e-14);
        assert!(v.d2q.abs() < 1e-14);

        let m = M::catalog_get("gen-airy", &[("nu", 0.5)]).unwrap();
        for x in [0.5, 3.0, 100.0] {
            assert_eq!(
                m.eval(x).unwrap(),
                QValues {
                    q: 1.0,
                    dq: 0.0,
                    d2q: 0.0
                }
            );
        }

        let m = M::catalog_get("cauchy-euler", &[("gamma", 1.0)]).unwrap();
        assert_eq!(m.q(2.0).unwrap(), 0.25);
        assert!((m.param("s").unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(m.x0(), 1.0);
        let c = M::catalog_get("constant", &[]).unwrap();
        assert_eq!(c.x0(), 0.0);
    }

    #[test]
    fn catalog_rejects_non_oscillatory_parameters() {
        assert!(matches!(M::catalog_get("airy", &[]), Err(Error::UnknownEquation(_))));
        assert!(matches!(
            M::catalog_get("cauchy-euler", &[("gamma", 0.5)]),
            Err(Error::ParameterRange { .. })
        ));
        assert!(M::catalog_get("cauchy-euler", &[("gamma", 0.51)]).is_ok());
        assert!(M::catalog_get("gen-airy", &[("nu", 0.0)]).is_err());
        assert!(M::catalog_get("gen-airy", &[("nu", 0.6)]).is_err());
        assert!(M::catalog_get("constant", &[("c", -1.0)]).is_err());
        assert!(matches!(
            M::catalog_get("gen-airy", &[]),
            Err(Error::MissingParameter(_))
        ));
        let m = M::catalog_get("inverse-x", &[]).unwrap();
        assert!(m.clone().with_x0(0.0).is_err());
        assert_eq!(m.with_x0(2.0).unwrap().x0(), 2.0);
    }

    #[test]
    fn derivatives_pass_finite_difference_check() {
        for m in catalog() {
            let lo = if m.x0() > 0.0 { m.x0() } else { 1.0 };
            fd_check(&m, lo, 1e3 * lo);
        }
        let parsed = M::parse_q("x + sin(x)/x + exp(-x)", &[]).unwrap();
        fd_check(&parsed, 1.0, 1e3);
    }

    #[test]
    fn parsed_examples() {
        let m = M::parse_q("x", &[]).unwrap();
        assert_eq!(
            m.eval(2.0).unwrap(),
            QValues {
                q: 2.0,
                dq: 1.0,
                d2q: 0.0
            }
        );
        let m = M::parse_q("g^2/x^2", &[("g", 1.0)]).unwrap();
        let v = m.eval(2.0).unwrap();
        assert!((v.q - 0.25).abs() < 1e-15);
        assert!((v.dq + 0.25).abs() < 1e-15);
        assert!((v.d2q - 0.375).abs() < 1e-15);
        assert!(matches!(M::parse_q("x +", &[]), Err(Error::Syntax { offset: 3, .. })));
    }

    #[test]
    fn parsed_catalog_formulas_agree() {
        let pairs = [
            ("constant", vec![("c", 2.0)], "c", vec![("c", 2.0)]),
            (
                "gen-airy",
                vec![("nu", 1.0 / 3.0)],
                "x^(1/nu - 2)",
                vec![("nu", 1.0 / 3.0)],
            ),
            ("gen-airy", vec![("nu", 0.3)], "x^(1/nu - 2)", vec![("nu", 0.3)]),
            ("inverse-x", vec![], "x^-1", vec![]),
            (
                "cauchy-euler",
                vec![("gamma", 1.3)],
                "gamma^2/x^2",
                vec![("gamma", 1.3)],
            ),
        ];
        for (name, cp, text, pp) in pairs {
            let a = M::catalog_get(name, &cp).unwrap();
            let b = M::parse_q(text, &pp).unwrap();
            for i in 0..50 {
                let x = 1.0 + 0.37 * i as f64;
                let (va, vb) = (a.eval(x).unwrap(), b.eval(x).unwrap());
                for (p, q) in [(va.q, vb.q), (va.dq, vb.dq), (va.d2q, vb.d2q)] {
                    assert!(
                        (p - q).abs() <= 1e-12 * p.abs().max(1e-300),
                        "{name} at {x}: {p} vs {q}"
                    );
                }
            }
        }
    }

    #[test]
    fn gen_airy_half_matches_unit_constant() {
        let a = M::catalog_get("gen-airy", &[("nu", 0.5)]).unwrap();
        let c = M::catalog_get("constant", &[("c", 1.0)]).unwrap();
        for i in 0..100 {
            let x = 0.5 + i as f64 * 0.995;
            assert_eq!(a.eval(x).unwrap(), c.eval(x).unwrap());
        }
    }

    #[test]
    fn single_precision_models() {
        let m = EquationModel::<f32>::catalog_get("gen-airy", &[("nu", 0.5)]).unwrap();
        assert_eq!(m.q(3.0).unwrap(), 1.0f32);
        let p = EquationModel::<f32>::parse_q("2*x^2", &[]).unwrap();
        assert_eq!(p.eval(1.5).unwrap().dq, 6.0f32);
    }
}
