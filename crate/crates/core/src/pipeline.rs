//! End-to-end analysis of one equation: integrate the default pair, find
//! the principal pair, classify it, and check the hypotheses and the
//! Appell identity.

use crate::error::{Error, Result};
use crate::grid::linspace;
use crate::integrate::{integrate_pair, PairTrajectory, Tolerances};
use crate::phasekit::{appell_residual, ResidualStats};
use crate::principal::{
    fit_principal, sufficient_conditions, tail_window, FinderOptions, PrincipalFit, SufficientConditions,
};
use crate::qfunc::EquationModel;
use crate::real::Real;
use crate::zeros::{gap_table, ZeroGapTable};

/// Catalog names accepted as equation selectors.
pub const CATALOG: [&str; 4] = ["constant", "gen-airy", "inverse-x", "cauchy-euler"];

/// Attached to every report.
pub const NORMALIZATION_NOTE: &str = "Amplitudes are those of the unit-Wronskian pair (|w| = 1). \
For cauchy-euler this gives v(x) = x/s and v'(x) = 1/s with s = sqrt(gamma^2 - 1/4), \
i.e. K = 2/sqrt(3) at gamma = 1; the unnormalized pair sqrt(x) sin(s ln x), sqrt(x) cos(s ln x) \
has w = -s and v(x) = x, v'(x) = 1.";

const CONDITION_GRID: usize = 64;
const APPELL_GRID: usize = 200;

/// Everything needed to run one analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig<T> {
    /// Catalog name or expression text in `x`.
    pub equation: String,
    pub params: Vec<(String, T)>,
    /// Left endpoint; the equation's default when `None`.
    pub x0: Option<T>,
    pub xmax: T,
    pub rtol: T,
    pub atol: T,
    /// Fraction of the span used as the fitting window, in `(0, 0.5]`.
    pub window_fraction: T,
    pub seed: u64,
}

impl<T: Real> RunConfig<T> {
    /// Defaults: the span used in the examples of each catalog equation
    /// (`[x0, 50]` for expressions), tolerances `1e-10`/`1e-12`, window
    /// fraction `1/4`, seed 0.
    pub fn new(equation: &str, params: &[(&str, T)]) -> Self {
        let xmax = match equation {
            "gen-airy" => 200.0,
            "inverse-x" => 400.0,
            "cauchy-euler" => 500.0,
            _ => 50.0,
        };
        let tol = Tolerances::<T>::default();
        RunConfig {
            equation: equation.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            x0: None,
            xmax: T::lit(xmax),
            rtol: tol.rtol,
            atol: tol.atol,
            window_fraction: T::lit(0.25),
            seed: 0,
        }
    }

    pub fn is_catalog(&self) -> bool {
        CATALOG.contains(&self.equation.as_str())
    }

    /// Builds the model and checks the config invariants.
    pub fn model(&self) -> Result<EquationModel<T>> {
        let params: Vec<(&str, T)> = self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let mut model = if self.is_catalog() {
            EquationModel::catalog_get(&self.equation, &params)?
        } else {
            EquationModel::parse_q(&self.equation, &params).map_err(|e| match e {
                // a lone unknown name was meant as a catalog entry
                Error::UnboundIdentifier { name, .. } if name == self.equation.trim() => Error::UnknownEquation(name),
                other => other,
            })?
        };
        if let Some(x0) = self.x0 {
            model = model.with_x0(x0)?;
        }
        if !(self.xmax > model.x0()) {
            return Err(Error::InvalidInterval {
                lo: model.x0().as_f64(),
                hi: self.xmax.as_f64(),
            });
        }
        if !(self.window_fraction > T::zero() && self.window_fraction <= T::lit(0.5)) {
            return Err(Error::InvalidArgument(format!(
                "window fraction {} outside (0, 0.5]",
                self.window_fraction
            )));
        }
        Ok(model)
    }

    /// Widens the default span of `cauchy-euler` for gap tables: its zeros
    /// are spaced by `π/s` in `ln x`, so `[1, 500]` holds only two. The
    /// span is stretched to `ln xmax = 6π/s + π` (about `e^25` at `γ = 1`).
    pub fn widen_for_zeros(mut self) -> Self {
        if self.equation == "cauchy-euler" {
            if let Ok(model) = self.model() {
                if let Some(s) = model.param("s") {
                    let pi = T::lit(std::f64::consts::PI);
                    let wide = (T::lit(6.0) * pi / s + pi).exp();
                    if wide > self.xmax && wide.is_finite() {
                        self.xmax = wide;
                    }
                }
            }
        }
        self
    }

    pub fn tolerances(&self) -> Tolerances<T> {
        Tolerances::new(self.rtol, self.atol)
    }
}

/// Results of [`analyze`].
#[derive(Clone, Debug)]
pub struct Analysis<T> {
    pub config: RunConfig<T>,
    pub model: EquationModel<T>,
    /// Wronskian of the default pair before normalization.
    pub wronskian: T,
    /// Default pair, unit-normalized.
    pub pair: PairTrajectory<T>,
    pub fit: PrincipalFit<T>,
    pub conditions: SufficientConditions<T>,
    pub appell: ResidualStats<T>,
}

impl<T: Real> Analysis<T> {
    pub fn span(&self) -> (T, T) {
        (self.model.x0(), self.config.xmax)
    }
}

/// Integrates the pair with initial data `(0, 1)` and `(1, 0)` at `x0` and
/// normalizes it to unit Wronskian.
pub fn default_pair<T: Real>(model: &EquationModel<T>, xmax: T, tol: Tolerances<T>) -> Result<(PairTrajectory<T>, T)> {
    let raw = integrate_pair(model, (T::zero(), T::one()), (T::one(), T::zero()), xmax, tol)?;
    let w = raw.w();
    Ok((raw.normalize_unit_wronskian(), w))
}

pub fn analyze<T: Real>(config: &RunConfig<T>) -> Result<Analysis<T>> {
    let model = config.model()?;
    let (pair, wronskian) = default_pair(&model, config.xmax, config.tolerances())?;
    let window = tail_window(&pair, config.window_fraction);
    let fit = fit_principal(&pair, window, &FinderOptions::default())?;
    let span = (model.x0(), config.xmax);
    let conditions = sufficient_conditions(&model, span, CONDITION_GRID)?;
    let appell = appell_residual(&pair, &fit.report.coeffs, &linspace(span.0, span.1, APPELL_GRID))?;
    Ok(Analysis {
        config: config.clone(),
        model,
        wronskian,
        pair,
        fit,
        conditions,
        appell,
    })
}

/// [`analyze`] followed by the gap table of the principal pair over the
/// whole span.
pub fn analyze_zeros<T: Real>(config: &RunConfig<T>) -> Result<(Analysis<T>, ZeroGapTable<T>)> {
    let analysis = analyze(config)?;
    let table = gap_table(&analysis.fit.pair, &analysis.fit.phase, analysis.span())?;
    Ok((analysis, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::principal::Classification;
    use std::f64::consts::PI;

    #[test]
    fn unknown_names_and_expressions() {
        let c = RunConfig::<f64>::new("airy", &[]);
        assert!(matches!(c.model(), Err(Error::UnknownEquation(n)) if n == "airy"));
        let c = RunConfig::<f64>::new("x + k", &[]);
        assert!(matches!(c.model(), Err(Error::UnboundIdentifier { .. })));
        assert!(RunConfig::<f64>::new("x + 1", &[]).model().is_ok());
    }

    #[test]
    fn zeros_span_for_cauchy_euler() {
        let c = RunConfig::<f64>::new("cauchy-euler", &[("gamma", 1.0)]).widen_for_zeros();
        assert!((c.xmax.ln() - (6.0 * PI / 0.75f64.sqrt() + PI)).abs() < 1e-9);
        let g = RunConfig::<f64>::new("gen-airy", &[("nu", 0.25)]).widen_for_zeros();
        assert_eq!(g.xmax, 200.0);
    }

    #[test]
    fn constant_run() {
        let a = analyze(&RunConfig::<f64>::new("constant", &[("c", 1.0)])).unwrap();
        assert_eq!(a.wronskian, -1.0);
        match a.fit.report.classification {
            Classification::LFinite { l } => assert!((l - 1.0).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
        assert!(a.appell.max < 1e-5);
    }

    #[test]
    fn expression_run_matches_catalog() {
        let mut cfg = RunConfig::<f64>::new("1/x", &[]);
        cfg.x0 = Some(1.0);
        cfg.xmax = 400.0;
        let a = analyze(&cfg).unwrap();
        let b = analyze(&RunConfig::<f64>::new("inverse-x", &[])).unwrap();
        assert_eq!(a.fit.report.classification.tag(), "L-infinite");
        let (ka, kb) = (a.fit.report.k.unwrap(), b.fit.report.k.unwrap());
        assert!((ka - kb).abs() < 1e-6);
    }

    #[test]
    fn config_errors() {
        let mut cfg = RunConfig::<f64>::new("constant", &[("c", 1.0)]);
        cfg.xmax = -1.0;
        assert!(matches!(analyze(&cfg), Err(Error::InvalidInterval { .. })));
        let mut cfg = RunConfig::<f64>::new("constant", &[("c", 1.0)]);
        cfg.window_fraction = 0.7;
        assert!(analyze(&cfg).unwrap_err().is_config());
        assert!(analyze(&RunConfig::<f64>::new("x +", &[])).unwrap_err().is_config());
    }
}
