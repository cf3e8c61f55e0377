//! Self-checks of the whole toolkit: module invariants and the end-to-end
//! properties the analysis is expected to show on the catalog equations.
//! Every check reports a measured value against a bound; computation errors
//! become failing checks.

use std::f64::consts::{FRAC_2_PI, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{linspace, logspace};
use crate::integrate::{PairTrajectory, Tolerances};
use crate::phasekit::{
    appell_residual, is_strictly_monotone, phase_identity_residual, phase_unwrap, representation_residual,
};
use crate::pipeline::{analyze, default_pair, Analysis, RunConfig};
use crate::principal::{
    find_principal, fit_principal, tail_window, transform_pair, Classification, CombinationCoefficients, FinderOptions,
    PairMatrix, PredicateStatus,
};
use crate::qfunc::EquationModel;
use crate::specfun::{example1_v, gamma, BesselTable};
use crate::zeros::{gap_table, rotated_tail_gaps, zeros_of, Target};

/// One measured quantity against its bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `value <= bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            value,
            bound,
            pass: value <= bound,
            detail: String::new(),
        }
    }

    /// Boolean outcome recorded as value 1 (true) or 0 against bound 1.
    pub fn holds(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: 1.0,
            pass: ok,
            detail: detail.into(),
        }
    }

    fn failed(name: impl Into<String>, detail: String) -> Check {
        Check {
            name: name.into(),
            value: f64::NAN,
            bound: f64::NAN,
            pass: false,
            detail,
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Check {
        self.detail = detail.into();
        self
    }
}

/// Which checks to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Three scrambles per equation in the recovery check.
    Fast,
    /// Ten scrambles per equation.
    All,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub seed: u64,
    /// Forces this relative tolerance on every pipeline integration.
    pub rtol: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            suite: Suite::Fast,
            seed: 0,
            rtol: None,
        }
    }
}

/// The four catalog equations with the spans used throughout.
pub fn catalog_cases() -> Vec<RunConfig<f64>> {
    vec![
        RunConfig::new("constant", &[("c", 1.0)]),
        RunConfig::new("gen-airy", &[("nu", 1.0 / 3.0)]),
        RunConfig::new("inverse-x", &[]),
        RunConfig::new("cauchy-euler", &[("gamma", 1.0)]),
    ]
}

fn configure(mut cfg: RunConfig<f64>, opts: &VerifyOptions) -> RunConfig<f64> {
    if let Some(rtol) = opts.rtol {
        cfg.rtol = rtol;
    }
    cfg.seed = opts.seed;
    cfg
}

fn label(cfg: &RunConfig<f64>) -> String {
    let params: Vec<String> = cfg.params.iter().map(|(k, v)| format!("{k}={v:.6}")).collect();
    if params.is_empty() {
        cfg.equation.clone()
    } else {
        format!("{}({})", cfg.equation, params.join(","))
    }
}

/// Determinant `±1` matrix: rotation, diagonal stretch, shear, and a
/// reflection with probability 1/2.
pub fn random_unimodular<R: Rng>(rng: &mut R) -> PairMatrix<f64> {
    let theta = rng.gen_range(0.0..2.0 * PI);
    let stretch = rng.gen_range(-1.0f64..1.0).exp();
    let shear = rng.gen_range(-1.0..1.0);
    let (s, c) = theta.sin_cos();
    // R(θ) · diag(e, 1/e) · [[1, shear], [0, 1]]
    let (a, b) = (c * stretch, c * stretch * shear - s / stretch);
    let (cc, d) = (s * stretch, s * stretch * shear + c / stretch);
    if rng.gen_bool(0.5) {
        [a, b, cc, d]
    } else {
        [b, a, d, cc]
    }
}

/// Principal amplitude of the known closed forms, when there is one.
fn known_principal_v(cfg: &RunConfig<f64>, table: Option<&BesselTable<f64>>, x: f64) -> Option<f64> {
    match cfg.equation.as_str() {
        "constant" => Some(1.0 / cfg.params[0].1.sqrt()),
        "cauchy-euler" => {
            let g = cfg.params[0].1;
            Some(x / (g * g - 0.25).sqrt())
        }
        "gen-airy" => {
            let nu = cfg.params[0].1;
            table.and_then(|t| t.example1_v(x).ok()).map(|v| v * nu * PI)
        }
        _ => None,
    }
}

fn amplitude(traj: &PairTrajectory<f64>, coeffs: &CombinationCoefficients<f64>, x: f64) -> Result<f64> {
    Ok(coeffs.eval(&traj.sample(x)?).0)
}

/// Recovery of the principal amplitude from scrambled default pairs.
pub fn scramble_recovery(opts: &VerifyOptions, scrambles: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();
    for cfg in catalog_cases() {
        let cfg = configure(cfg, opts);
        let name = label(&cfg);
        let result = (|| -> Result<(f64, f64, f64)> {
            let model = cfg.model()?;
            let (base, _) = default_pair(&model, cfg.xmax, cfg.tolerances())?;
            let window = tail_window(&base, cfg.window_fraction);
            let reference = fit_principal(&base, window, &FinderOptions::default())?;
            let samples = linspace(reference.report.window.0, reference.report.window.1, 101);
            let table = match cfg.equation.as_str() {
                "gen-airy" => {
                    let nu = cfg.params[0].1;
                    Some(BesselTable::new(nu, 2.0 * nu * cfg.xmax.powf(0.5 / nu))?)
                }
                _ => None,
            };
            let v_ref: Vec<f64> = samples
                .iter()
                .map(|&x| amplitude(&base, &reference.report.coeffs, x))
                .collect::<Result<_>>()?;
            let mut closed = 0.0f64;
            for (&x, &v) in samples.iter().zip(&v_ref) {
                if let Some(exact) = known_principal_v(&cfg, table.as_ref(), x) {
                    closed = closed.max((v - exact).abs() / exact);
                }
            }
            let (mut worst_v, mut worst_k) = (0.0f64, 0.0f64);
            for _ in 0..scrambles {
                let m = random_unimodular(&mut rng);
                let scrambled = transform_pair(&base, m)?;
                let w = tail_window(&scrambled, cfg.window_fraction);
                let rep = find_principal(&scrambled, w, &FinderOptions::default())?;
                for (&x, &v) in samples.iter().zip(&v_ref) {
                    let vbar = amplitude(&scrambled, &rep.coeffs, x)?;
                    worst_v = worst_v.max((vbar - v).abs() / v.abs());
                }
                worst_k = worst_k.max(rep.k1_est.abs()).max(rep.k2_est.abs());
            }
            Ok((worst_v, worst_k, closed))
        })();
        match result {
            Ok((v, k, closed)) => {
                checks.push(Check::at_most(format!("scramble recovery v: {name}"), v, 1e-5));
                checks.push(Check::at_most(format!("scramble recovery k1,k2: {name}"), k, 1e-5));
                if cfg.equation != "inverse-x" {
                    checks.push(Check::at_most(
                        format!("principal v vs closed form: {name}"),
                        closed,
                        1e-5,
                    ));
                }
            }
            Err(e) => checks.push(Check::failed(format!("scramble recovery: {name}"), e.to_string())),
        }
    }
    checks
}

fn run_analysis(cfg: RunConfig<f64>, opts: &VerifyOptions) -> (String, Result<Analysis<f64>>) {
    let cfg = configure(cfg, opts);
    (label(&cfg), analyze(&cfg))
}

fn v_at(a: &Analysis<f64>, x: f64) -> Result<f64> {
    let s = a.fit.pair.sample(x)?;
    Ok(s[0] * s[0] + s[2] * s[2])
}

/// Generalized Airy `ν = 1/3`: the amplitude in the Bessel-pair
/// normalization (`w = 1/(νπ)`) against `3/π · x^(-1/2)` and against the
/// Bessel evaluation.
pub fn airy_asymptotics(opts: &VerifyOptions) -> Vec<Check> {
    let nu = 1.0 / 3.0;
    let (name, a) = run_analysis(RunConfig::new("gen-airy", &[("nu", nu)]), opts);
    let result = (|| -> Result<Vec<Check>> {
        let a = a?;
        let to_bessel = 1.0 / (nu * PI);
        let scaled = v_at(&a, 100.0)? * to_bessel * 10.0;
        let mut checks = vec![Check::at_most(
            format!("v(100)·√100 vs 3/π: {name}"),
            (scaled / (3.0 / PI) - 1.0).abs(),
            0.01,
        )
        .with_detail(format!("v·x^(1/2) = {scaled:.9}"))];
        let mut worst = 0.0f64;
        for x in [10.0, 50.0, 100.0] {
            let pipeline = v_at(&a, x)? * to_bessel;
            let bessel = example1_v(nu, x)?;
            worst = worst.max((pipeline - bessel).abs() / bessel);
        }
        checks.push(Check::at_most(
            format!("Bessel amplitude vs pipeline: {name}"),
            worst,
            1e-4,
        ));
        Ok(checks)
    })();
    result.unwrap_or_else(|e| vec![Check::failed(format!("airy asymptotics: {name}"), e.to_string())])
}

fn classification_checks(name: &str, a: &Analysis<f64>, tag: &str, k: f64, k_tol: f64) -> Vec<Check> {
    let r = &a.fit.report;
    vec![
        Check::holds(
            format!("classification {tag}: {name}"),
            r.classification.tag() == tag,
            format!("got {}", r.classification.tag()),
        ),
        match r.k {
            Some(kk) => {
                Check::at_most(format!("K = {k:.6}: {name}"), (kk - k).abs(), k_tol).with_detail(format!("K = {kk:.9}"))
            }
            None => Check::failed(format!("K = {k:.6}: {name}"), "no K reported".into()),
        },
    ]
}

/// `q = 1/x`: growing amplitude with vanishing slope; `v/√x → 1/π` in the
/// Bessel-pair normalization (`w = 1/π`).
pub fn inverse_x_limits(opts: &VerifyOptions) -> Vec<Check> {
    let (name, a) = run_analysis(RunConfig::new("inverse-x", &[]), opts);
    let result = (|| -> Result<Vec<Check>> {
        let a = a?;
        let mut checks = classification_checks(&name, &a, "L-infinite", 0.0, 1e-3);
        let ratio = v_at(&a, 400.0)? / PI / 400f64.sqrt();
        checks.push(
            Check::at_most(format!("v(400)/√400 vs 1/π: {name}"), (ratio * PI - 1.0).abs(), 0.01)
                .with_detail(format!("v/√x = {ratio:.9}")),
        );
        Ok(checks)
    })();
    result.unwrap_or_else(|e| vec![Check::failed(format!("inverse-x limits: {name}"), e.to_string())])
}

/// Cauchy–Euler `γ = 1`: linear amplitude, `K = 2/√3`.
pub fn cauchy_euler_limits(opts: &VerifyOptions) -> Vec<Check> {
    let (name, a) = run_analysis(RunConfig::new("cauchy-euler", &[("gamma", 1.0)]), opts);
    match a {
        Ok(a) => classification_checks(&name, &a, "L-infinite", 2.0 / 3f64.sqrt(), 1e-3),
        Err(e) => vec![Check::failed(format!("cauchy-euler limits: {name}"), e.to_string())],
    }
}

/// Gap table of the Airy principal pair, and the rotated competitors.
pub fn airy_gap_table(opts: &VerifyOptions) -> Vec<Check> {
    let (name, a) = run_analysis(RunConfig::new("gen-airy", &[("nu", 1.0 / 3.0)]), opts);
    let result = (|| -> Result<Vec<Check>> {
        let a = a?;
        let span = a.span();
        let t = gap_table(&a.fit.pair, &a.fit.phase, span)?;
        let (first, last) = (t.d_first().unwrap(), t.d_last().unwrap());
        let gaps = rotated_tail_gaps(&a.fit.pair, span, 12, 10)?;
        let best = gaps
            .iter()
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .map(|g| g.0)
            .unwrap();
        Ok(vec![
            Check::holds(
                format!("gap table rows >= 30: {name}"),
                t.rows.len() >= 30,
                format!("{} rows", t.rows.len()),
            ),
            Check::holds(
                format!("gap tail decreasing (10 rows): {name}"),
                t.tail_decreasing(10),
                "",
            ),
            Check::at_most(format!("d_last: {name}"), last, 1e-4),
            Check::at_most(format!("d_last / d_first: {name}"), last / first, 0.1),
            Check::holds(
                format!("rotation k = 6 minimizes tail gap: {name}"),
                best == 6,
                format!("minimum at k = {best}"),
            ),
        ])
    })();
    result.unwrap_or_else(|e| vec![Check::failed(format!("airy gap table: {name}"), e.to_string())])
}

/// Cauchy–Euler phase gaps settle at π/6 rather than 0.
pub fn cauchy_euler_offset(opts: &VerifyOptions) -> Vec<Check> {
    let mut cfg = RunConfig::new("cauchy-euler", &[("gamma", 1.0)]);
    cfg.xmax = 22f64.exp();
    let (name, a) = run_analysis(cfg, opts);
    let result = (|| -> Result<Vec<Check>> {
        let a = a?;
        let t = gap_table(&a.fit.pair, &a.fit.phase, a.span())?;
        let delta = t.delta_last().unwrap();
        Ok(vec![Check::at_most(
            format!("phase gap vs π/6: {name}"),
            (delta - PI / 6.0).abs(),
            1e-4,
        )
        .with_detail(format!("δ_last = {delta:.12}, {} rows", t.rows.len()))])
    })();
    result.unwrap_or_else(|e| vec![Check::failed(format!("cauchy-euler offset: {name}"), e.to_string())])
}

/// Appell residual for `y1²`, `y2²`, `y1 y2` and random unit-determinant
/// combinations.
pub fn appell_identity(opts: &VerifyOptions) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
    let mut checks = Vec::new();
    for cfg in catalog_cases() {
        let cfg = configure(cfg, opts);
        let name = label(&cfg);
        let mut sets = vec![
            CombinationCoefficients::new(1.0, 0.0, 0.0),
            CombinationCoefficients::new(0.0, 1.0, 0.0),
            CombinationCoefficients::new(0.0, 0.0, 0.5),
        ];
        for _ in 0..5 {
            sets.push(CombinationCoefficients::from_matrix(random_unimodular(&mut rng)));
        }
        let result = (|| -> Result<f64> {
            let model = cfg.model()?;
            let (pair, _) = default_pair(&model, cfg.xmax, cfg.tolerances())?;
            let grid = linspace(model.x0(), cfg.xmax, 200);
            let mut worst = 0.0f64;
            for c in &sets {
                worst = worst.max(appell_residual(&pair, c, &grid)?.max);
            }
            Ok(worst)
        })();
        checks.push(match result {
            Ok(v) => Check::at_most(format!("Appell residual: {name}"), v, 1e-5),
            Err(e) => Check::failed(format!("Appell residual: {name}"), e.to_string()),
        });
    }
    checks
}

/// `v α' = -w`, the sine/cosine representation, and monotone phase for the
/// default and the principal pair of each catalog equation.
pub fn phase_identities(opts: &VerifyOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    for cfg in catalog_cases() {
        let (name, a) = run_analysis(cfg, opts);
        let result = (|| -> Result<(f64, f64, bool)> {
            let a = a?;
            let grid = linspace(a.model.x0(), a.config.xmax, 400);
            let (mut ident, mut repr, mut mono) = (0.0f64, 0.0f64, true);
            for traj in [&a.pair, &a.fit.pair] {
                let ph = phase_unwrap(traj, &grid)?;
                ident = ident.max(phase_identity_residual(&ph));
                repr = repr.max(representation_residual(traj, &ph)?);
                mono &= is_strictly_monotone(&ph);
            }
            Ok((ident, repr, mono))
        })();
        match result {
            Ok((i, r, m)) => {
                checks.push(Check::at_most(format!("v·α' = -w: {name}"), i, 1e-9));
                checks.push(Check::at_most(format!("representation residual / √v: {name}"), r, 1e-7));
                checks.push(Check::holds(format!("α strictly monotone: {name}"), m, ""));
            }
            Err(e) => checks.push(Check::failed(format!("phase identities: {name}"), e.to_string())),
        }
    }
    checks
}

fn status_detail(s: &PredicateStatus<f64>) -> String {
    match s {
        PredicateStatus::Holds => "holds".into(),
        PredicateStatus::Fails { at, violations, reason } => format!("fails at {at:?} ({violations} points): {reason}"),
        PredicateStatus::NotDecidable(r) => format!("not decidable: {r}"),
    }
}

/// Hypotheses and conclusions of the two existence results.
pub fn corollaries(opts: &VerifyOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    let (name, a) = run_analysis(RunConfig::new("gen-airy", &[("nu", 1.0 / 3.0)]), opts);
    let r = (|| -> Result<Vec<Check>> {
        let a = a?;
        let c1 = &a.conditions.corollary1;
        let ph = &a.fit.phase;
        let idx: Vec<usize> = (0..64).map(|i| i * (ph.grid.len() - 1) / 63).collect();
        let positive = idx.iter().all(|&i| ph.v[i] > 0.0);
        let decreasing = idx.windows(2).all(|p| ph.v[p[1]] < ph.v[p[0]]);
        let slope = idx.iter().map(|&i| ph.v_prime[i]).fold(f64::NEG_INFINITY, f64::max);
        let k = a.fit.report.k.unwrap_or(f64::NAN);
        Ok(vec![
            Check::holds(format!("corollary 1 hypotheses: {name}"), c1.holds(), status_detail(c1)),
            Check::holds(format!("v > 0 and decreasing: {name}"), positive && decreasing, ""),
            Check::at_most(format!("max v' (slack 1e-8): {name}"), slope, 1e-8),
            Check::at_most(format!("|lim v'|: {name}"), k.abs(), 1e-4),
        ])
    })();
    checks.extend(r.unwrap_or_else(|e| vec![Check::failed(format!("corollary 1: {name}"), e.to_string())]));

    let (name, a) = run_analysis(RunConfig::new("constant", &[("c", 1.0)]), opts);
    let r = (|| -> Result<Vec<Check>> {
        let a = a?;
        let c2 = &a.conditions.corollary2;
        let finite = matches!(a.fit.report.classification, Classification::LFinite { .. });
        Ok(vec![
            Check::holds(format!("corollary 2 hypotheses: {name}"), c2.holds(), status_detail(c2)),
            Check::holds(
                format!("v tends to a finite limit: {name}"),
                finite,
                a.fit.report.classification.tag(),
            ),
        ])
    })();
    checks.extend(r.unwrap_or_else(|e| vec![Check::failed(format!("corollary 2: {name}"), e.to_string())]));

    let (name, a) = run_analysis(RunConfig::new("cauchy-euler", &[("gamma", 1.0)]), opts);
    let r = (|| -> Result<Vec<Check>> {
        let a = a?;
        let c2 = &a.conditions.corollary2;
        let everywhere = matches!(c2, PredicateStatus::Fails { violations, .. } if *violations == a.conditions.checked);
        Ok(vec![Check::holds(
            format!("corollary 2 inequality fails at every grid point: {name}"),
            everywhere,
            status_detail(c2),
        )])
    })();
    checks.extend(r.unwrap_or_else(|e| vec![Check::failed(format!("corollary 2 negative: {name}"), e.to_string())]));
    checks
}

/// Monotonicity and bound of `t (J_ν² + Y_ν²)` and the signs of the
/// generalized Airy amplitude and its derivatives for `ν = 0.4`.
pub fn bessel_modulus(opts: &VerifyOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    let grid = logspace(0.1, 100.0, 200);
    for nu in [0.1, 0.25, 1.0 / 3.0, 0.45] {
        let r = (|| -> Result<(bool, f64)> {
            let table = BesselTable::new(nu, 100.0)?;
            let m: Vec<f64> = grid.iter().map(|&t| table.modulus(t)).collect::<Result<_>>()?;
            let increasing = m.windows(2).all(|p| p[1] > p[0]);
            let top = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok((increasing, top))
        })();
        match r {
            Ok((inc, top)) => {
                checks.push(Check::holds(format!("modulus increasing: nu={nu:.4}"), inc, ""));
                checks.push(Check::holds(
                    format!("modulus < 2/π: nu={nu:.4}"),
                    top < FRAC_2_PI,
                    format!("max {top:.12}"),
                ));
            }
            Err(e) => checks.push(Check::failed(format!("modulus: nu={nu:.4}"), e.to_string())),
        }
    }
    let half = (|| -> Result<f64> {
        let table = BesselTable::new(0.5, 100.0)?;
        let mut worst = 0.0f64;
        for &t in &grid {
            worst = worst.max((table.modulus(t)? - FRAC_2_PI).abs());
        }
        Ok(worst)
    })();
    checks.push(match half {
        Ok(v) => Check::at_most("modulus ≡ 2/π: nu=0.5", v, 1e-10),
        Err(e) => Check::failed("modulus ≡ 2/π: nu=0.5", e.to_string()),
    });
    let signs = (|| -> Result<(bool, String)> {
        let cfg = configure(RunConfig::new("gen-airy", &[("nu", 0.4)]), opts);
        let a = analyze(&cfg)?;
        let pts = logspace(2.0, 200.0, 50);
        let ph = phase_unwrap(&a.fit.pair, &pts)?;
        let ok = (0..pts.len()).all(|i| ph.v[i] > 0.0 && ph.v_prime[i] < 0.0 && ph.v_second[i] > 0.0);
        let bad = (0..pts.len())
            .find(|&i| !(ph.v[i] > 0.0 && ph.v_prime[i] < 0.0 && ph.v_second[i] > 0.0))
            .map(|i| format!("first violation at x = {}", pts[i]))
            .unwrap_or_default();
        Ok((ok, bad))
    })();
    checks.push(match signs {
        Ok((ok, d)) => Check::holds("v > 0, v' < 0, v'' > 0: gen-airy(nu=0.4)", ok, d),
        Err(e) => Check::failed("v > 0, v' < 0, v'' > 0: gen-airy(nu=0.4)", e.to_string()),
    });
    checks
}

/// Invariants of the individual modules on the catalog runs.
pub fn module_invariants(opts: &VerifyOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    let g = gamma(0.5f64).map(|g| (g - PI.sqrt()).abs() / PI.sqrt());
    checks.push(match g {
        Ok(v) => Check::at_most("Γ(1/2) = √π", v, 1e-12),
        Err(e) => Check::failed("Γ(1/2) = √π", e.to_string()),
    });
    let bw = (|| -> Result<f64> {
        let table = BesselTable::new(1.0 / 3.0, 100.0)?;
        let mut worst = 0.0f64;
        for t in logspace(0.05, 100.0, 20) {
            worst = worst.max(table.eval(t)?.wronskian_error());
        }
        Ok(worst)
    })();
    checks.push(match bw {
        Ok(v) => Check::at_most("Bessel Wronskian 2/(πt)", v, 1e-9),
        Err(e) => Check::failed("Bessel Wronskian 2/(πt)", e.to_string()),
    });
    for cfg in catalog_cases() {
        let cfg = configure(cfg, opts);
        let name = label(&cfg);
        let r = (|| -> Result<Vec<Check>> {
            let model: EquationModel<f64> = cfg.model()?;
            let (pair, _) = default_pair(&model, cfg.xmax, cfg.tolerances())?;
            let tol = Tolerances::new(cfg.rtol, cfg.atol);
            let drift = pair.max_wronskian_drift();
            let span = (model.x0(), cfg.xmax);
            let z1 = zeros_of(&pair, Target::Y1, span)?;
            let z2 = zeros_of(&pair, Target::Y2, span)?;
            let interlaced = z1
                .windows(2)
                .all(|p| z2.iter().filter(|&&z| z > p[0] && z < p[1]).count() == 1);
            let ph = phase_unwrap(&pair, &[span.0, span.1])?;
            let turns = ((ph.alpha[1] - ph.alpha[0]).abs() / PI).floor();
            let counted = (z1.len() as f64 - turns).abs() <= 1.0;
            Ok(vec![
                Check::at_most(format!("Wronskian drift: {name}"), drift, (100.0 * tol.rtol).max(1e-8)),
                Check::at_most(format!("midpoint residual: {name}"), pair.midpoint_residual()?, 1e-6),
                Check::holds(format!("zeros interlace: {name}"), interlaced, ""),
                Check::holds(
                    format!("zero count matches phase advance: {name}"),
                    counted,
                    format!("{} zeros, ⌊Δα/π⌋ = {turns}", z1.len()),
                ),
            ])
        })();
        checks.extend(r.unwrap_or_else(|e| vec![Check::failed(format!("module invariants: {name}"), e.to_string())]));
    }
    checks
}

/// Runs the whole suite. Each group is preceded by its wall-clock time in
/// the `detail` of its first check.
pub fn run(opts: &VerifyOptions) -> Vec<Check> {
    let scrambles = match opts.suite {
        Suite::Fast => 3,
        Suite::All => 10,
    };
    type Group = Box<dyn Fn(&VerifyOptions) -> Vec<Check>>;
    let groups: Vec<Group> = vec![
        Box::new(module_invariants),
        Box::new(move |o| scramble_recovery(o, scrambles)),
        Box::new(airy_asymptotics),
        Box::new(inverse_x_limits),
        Box::new(cauchy_euler_limits),
        Box::new(airy_gap_table),
        Box::new(cauchy_euler_offset),
        Box::new(appell_identity),
        Box::new(phase_identities),
        Box::new(corollaries),
        Box::new(bessel_modulus),
    ];
    let mut out = Vec::new();
    for g in groups {
        let start = Instant::now();
        let mut checks = g(opts);
        if let Some(first) = checks.first_mut() {
            let t = format!("group time {:.2} s", start.elapsed().as_secs_f64());
            first.detail = if first.detail.is_empty() {
                t
            } else {
                format!("{}; {t}", first.detail)
            };
        }
        out.extend(checks);
    }
    out
}
