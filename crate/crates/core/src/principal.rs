//! Principal pairs: the quadratic-form action of unimodular changes of pair,
//! the oscillation decomposition of `v̄'`, the finder, the `(L, K)`
//! classifier and the hypothesis checks for the two existence results.
//!
//! A change of pair `ȳ1 = a y1 + b y2`, `ȳ2 = c y1 + d y2` acts on the
//! amplitude only through `A = a² + c²`, `B = b² + d²`, `C = ab + cd`:
//!
//! ```text
//! v̄ = A y1² + B y2² + 2C y1 y2 = v ((A+B)/2 - (K1/2) cos 2α + (K2/2) sin 2α)
//! ```
//!
//! with `K1 = A - B`, `K2 = 2C`. Differentiating with `v α' = -w = σ`,
//!
//! ```text
//! v̄' = v' (A+B)/2 + cos 2α (σ K2 - v' K1/2) + sin 2α (σ K1 + v' K2/2)
//! ```
//!
//! so a pair whose `v̄'` has no oscillating part has `K1 = K2 = 0`.

use crate::error::{Error, Result};
use crate::grid::{linspace, refined_nodes};
use crate::integrate::{PairTrajectory, State};
use crate::linalg;
use crate::phasekit::{phase_unwrap, PhaseData};
use crate::qfunc::EquationModel;
use crate::real::Real;

/// Entries `[a, b, c, d]` of `ȳ1 = a y1 + b y2`, `ȳ2 = c y1 + d y2`.
pub type PairMatrix<T> = [T; 4];

/// Coefficients of `v̄ = A y1² + B y2² + 2C y1 y2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CombinationCoefficients<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> CombinationCoefficients<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        CombinationCoefficients { a, b, c }
    }

    /// `(1, 1, 0)`: `v̄ = v`.
    pub fn identity() -> Self {
        Self::new(T::one(), T::one(), T::zero())
    }

    /// `(a² + c², b² + d², ab + cd)`.
    pub fn from_matrix(m: PairMatrix<T>) -> Self {
        let [a, b, c, d] = m;
        Self::new(a * a + c * c, b * b + d * d, a * b + c * d)
    }

    /// Point `(p, m) ↦ (p, (1 + m²)/p, m)` of the surface `AB - C² = 1`.
    pub fn from_chart(p: T, m: T) -> Self {
        Self::new(p, (T::one() + m * m) / p, m)
    }

    pub fn determinant(&self) -> T {
        self.a * self.b - self.c * self.c
    }

    pub fn is_unit_determinant(&self) -> bool {
        (self.determinant() - T::one()).abs() <= T::lit(1e-9)
    }

    pub fn k1(&self) -> T {
        self.a - self.b
    }

    pub fn k2(&self) -> T {
        T::lit(2.0) * self.c
    }

    /// `(v̄, v̄')` at a state.
    pub fn eval(&self, s: &State<T>) -> (T, T) {
        let two = T::lit(2.0);
        let [y1, p1, y2, p2] = *s;
        let value = self.a * y1 * y1 + self.b * y2 * y2 + two * self.c * y1 * y2;
        let slope = two * (self.a * y1 * p1 + self.b * y2 * p2 + self.c * (p1 * y2 + y1 * p2));
        (value, slope)
    }

    /// Coefficients, relative to the original pair, of the form with these
    /// coefficients on the pair transformed by `m` (`Mᵀ Q M`).
    pub fn pullback(&self, m: PairMatrix<T>) -> Self {
        let [a, b, c, d] = m;
        let two = T::lit(2.0);
        Self::new(
            self.a * a * a + two * self.c * a * c + self.b * c * c,
            self.a * b * b + two * self.c * b * d + self.b * d * d,
            self.a * a * b + self.c * (a * d + b * c) + self.b * c * d,
        )
    }

    /// A determinant-one matrix realizing these coefficients
    /// (`[√A, C/√A, 0, 1/√A]`). Requires `A > 0` and `AB - C² = 1`.
    pub fn unit_matrix(&self) -> PairMatrix<T> {
        let r = self.a.sqrt();
        [r, self.c / r, T::zero(), r.recip()]
    }
}

/// Applies `m` to both solutions node by node.
pub fn transform_pair<T: Real>(traj: &PairTrajectory<T>, m: PairMatrix<T>) -> Result<PairTrajectory<T>> {
    let [a, b, c, d] = m;
    let det = a * d - b * c;
    let scale = (a.abs() + b.abs()).max(c.abs() + d.abs());
    if !(det.abs() > T::lit(1e-14) * scale * scale) {
        return Err(Error::SingularMatrix(det.as_f64()));
    }
    Ok(traj.combine(a, b, c, d))
}

/// Least-squares split of `v̄'` over a window into a smooth trend and the
/// `sin 2α`, `cos 2α` terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decomposition<T> {
    /// Estimate of `(A + B)/2` from the trend, when the reference `v'` is
    /// not negligible on the window.
    pub mean_coeff: Option<T>,
    pub k1: T,
    pub k2: T,
    /// Condition number of the scaled normal equations.
    pub condition: T,
    /// Phase advance over the window divided by π.
    pub periods: T,
    pub samples: usize,
}

const TREND_DEGREE: usize = 3;
const MAX_CONDITION: f64 = 1e8;

/// Legendre polynomials of degree ≤ 3 in `x` scaled to `[-1, 1]`.
fn trend_basis<T: Real>(x: T, lo: T, hi: T) -> [T; TREND_DEGREE + 1] {
    let t = (T::lit(2.0) * x - lo - hi) / (hi - lo);
    let half = T::lit(0.5);
    [
        T::one(),
        t,
        (T::lit(3.0) * t * t - T::one()) * half,
        (T::lit(5.0) * t * t - T::lit(3.0)) * t * half,
    ]
}

/// Fits `v̄'` of the combination `coeffs` on the window `[lo, hi]`.
///
/// The trend is a cubic in `x` rather than the single column `v'`; in
/// the window the two coincide to within the higher derivatives of `v'`, and the
/// cubic keeps the fit well posed when `v' ≡ 0`. With `m` the window
/// mean of the reference `v'` and `σ = -w`, the fitted sine and cosine
/// coefficients `s`, `c` give `K1`, `K2` from
/// `[[σ, m/2], [-m/2, σ]] (K1, K2) = (s, c)`.
pub fn decompose_oscillation<T: Real>(
    traj: &PairTrajectory<T>,
    phase: &PhaseData<T>,
    coeffs: &CombinationCoefficients<T>,
    window: (T, T),
) -> Result<Decomposition<T>> {
    decompose_with_guard(traj, phase, coeffs, window, T::lit(3.0))
}

pub(crate) fn decompose_with_guard<T: Real>(
    traj: &PairTrajectory<T>,
    phase: &PhaseData<T>,
    coeffs: &CombinationCoefficients<T>,
    window: (T, T),
    min_periods: T,
) -> Result<Decomposition<T>> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::InvalidInterval {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let range = phase.window(lo, hi);
    if range.len() < 8 {
        return Err(Error::GridTooCoarse(format!(
            "{} phase samples in the window",
            range.len()
        )));
    }
    let (first, last) = (range.start, range.end - 1);
    let periods = (phase.alpha[last] - phase.alpha[first]).abs() / T::PI();
    if periods < min_periods {
        return Err(Error::WindowTooShort {
            periods: periods.as_f64(),
            required: min_periods.as_f64(),
        });
    }

    const N: usize = TREND_DEGREE + 3;
    let mut gram = vec![vec![T::zero(); N]; N];
    let mut rhs = [T::zero(); N];
    let mut mean_vp = T::zero();
    for i in range.clone() {
        let x = phase.grid[i];
        let (_, target) = coeffs.eval(&traj.sample(x)?);
        let trend = trend_basis(x, phase.grid[first], phase.grid[last]);
        let (s2, c2) = (T::lit(2.0) * phase.alpha[i]).sin_cos();
        let mut row = [T::zero(); N];
        row[..=TREND_DEGREE].copy_from_slice(&trend);
        row[N - 2] = s2;
        row[N - 1] = c2;
        for j in 0..N {
            for k in 0..N {
                gram[j][k] = gram[j][k] + row[j] * row[k];
            }
            rhs[j] = rhs[j] + row[j] * target;
        }
        mean_vp = mean_vp + phase.v_prime[i];
    }
    let n = T::from_usize(range.len()).unwrap();
    mean_vp = mean_vp / n;

    let diag: Vec<T> = (0..N).map(|j| gram[j][j].sqrt()).collect();
    let scaled: Vec<Vec<T>> = (0..N)
        .map(|j| (0..N).map(|k| gram[j][k] / (diag[j] * diag[k])).collect())
        .collect();
    let condition = linalg::condition_number(&scaled);
    if !(condition <= T::lit(MAX_CONDITION)) {
        return Err(Error::IllConditioned(condition.as_f64()));
    }
    let scaled_rhs: Vec<T> = (0..N).map(|j| rhs[j] / diag[j]).collect();
    let z = linalg::solve(scaled, scaled_rhs).ok_or(Error::IllConditioned(f64::INFINITY))?;
    let beta: Vec<T> = (0..N).map(|j| z[j] / diag[j]).collect();

    let sigma = -phase.w.signum();
    let half_m = mean_vp * T::lit(0.5);
    let (s, c) = (beta[N - 2], beta[N - 1]);
    // [[σ, m/2], [-m/2, σ]]⁻¹ = [[σ, -m/2], [m/2, σ]] / (1 + m²/4)
    let det = T::one() + half_m * half_m;
    let k1 = (sigma * s - half_m * c) / det;
    let k2 = (half_m * s + sigma * c) / det;

    let trend_mean = beta[0];
    let vp_scale = phase.v_prime[range.clone()]
        .iter()
        .fold(T::zero(), |a, &b| a.max(b.abs()))
        .max(T::min_positive_value());
    let mean_coeff = if mean_vp.abs() > T::lit(1e-6) * vp_scale.max(T::one()) {
        Some(trend_mean / mean_vp)
    } else {
        None
    };
    Ok(Decomposition {
        mean_coeff,
        k1,
        k2,
        condition,
        periods,
        samples: range.len(),
    })
}

/// Limit behaviour of the amplitude of a candidate principal pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Classification<T> {
    /// `v → L` with `0 < L < ∞`.
    LFinite {
        l: T,
    },
    /// `v → 0`; `k` is the extrapolated limit of `v'`.
    LZero {
        k: T,
    },
    /// `v → ∞` while `v' → k` finite.
    LInfinite {
        k: T,
    },
    Undetermined,
}

impl<T: Real> Classification<T> {
    pub fn tag(&self) -> &'static str {
        match self {
            Classification::LFinite { .. } => "L-finite",
            Classification::LZero { .. } => "L-zero",
            Classification::LInfinite { .. } => "L-infinite",
            Classification::Undetermined => "undetermined",
        }
    }

    pub fn l(&self) -> Option<T> {
        match *self {
            Classification::LFinite { l } => Some(l),
            Classification::LZero { .. } => Some(T::zero()),
            _ => None,
        }
    }

    pub fn k(&self) -> Option<T> {
        match *self {
            Classification::LZero { k } | Classification::LInfinite { k } => Some(k),
            _ => None,
        }
    }
}

/// Outcome of [`classify`] with the window statistics it used.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyReport<T> {
    pub classification: Classification<T>,
    /// Windows from the last one backwards.
    pub windows: [(T, T); 3],
    /// Mean of `v` over each window.
    pub v_means: [T; 3],
    /// Mean of `v'` over each window, `Δv/Δx`.
    pub dv_means: [T; 3],
    pub diagnostics: Vec<String>,
}

/// Ratio of successive log-mean differences above which `v` is read as a
/// power law rather than as converging to a positive limit.
const POWER_LAW_RATIO: f64 = 0.9;

/// Aitken extrapolation of a sequence given newest first. `None` when the
/// differences do not shrink geometrically.
fn aitken<T: Real>(s: [T; 3]) -> Option<T> {
    let d1 = s[0] - s[1];
    let d2 = s[1] - s[2];
    if d2 == T::zero() {
        return if d1 == T::zero() { Some(s[0]) } else { None };
    }
    let r = d1 / d2;
    if r > T::zero() && r < T::lit(0.95) {
        Some(s[0] + d1 * r / (T::one() - r))
    } else {
        None
    }
}

/// Classifies the amplitude of a candidate principal pair from three
/// successively halved windows ending at the right end of `span`:
/// `[m1, hi]`, `[m2, m1]`, `[m3, m2]` with `m_k = lo + (hi - lo)/2^k`.
///
/// The window means of `v` decide between a finite limit (means agree
/// within `tol` relative, or their logarithms converge geometrically), and
/// power-law decay or growth (log means in arithmetic progression). `v'`
/// means are exact difference quotients of `v`; their Aitken limit is `K`.
pub fn classify<T: Real>(phase: &PhaseData<T>, span: (T, T), tol: T) -> ClassifyReport<T> {
    let (lo, hi) = span;
    let len = hi - lo;
    let half = T::lit(0.5);
    let m1 = lo + len * half;
    let m2 = lo + len * half * half;
    let m3 = lo + len * half * half * half;
    let windows = [(m1, hi), (m2, m1), (m3, m2)];
    let mut v_means = [T::nan(); 3];
    let mut dv_means = [T::nan(); 3];
    let mut diagnostics = Vec::new();
    for (k, &(a, b)) in windows.iter().enumerate() {
        let r = phase.window(a, b);
        if r.len() < 2 {
            diagnostics.push(format!("window [{a}, {b}] holds fewer than 2 phase samples"));
            return ClassifyReport {
                classification: Classification::Undetermined,
                windows,
                v_means,
                dv_means,
                diagnostics,
            };
        }
        let (i, j) = (r.start, r.end - 1);
        let mut area = T::zero();
        for t in i..j {
            area = area + (phase.grid[t + 1] - phase.grid[t]) * (phase.v[t] + phase.v[t + 1]) * half;
        }
        let dx = phase.grid[j] - phase.grid[i];
        v_means[k] = area / dx;
        dv_means[k] = (phase.v[j] - phase.v[i]) / dx;
    }

    let v_scale = v_means.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let dv_scale = dv_means.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let k_limit = || -> Option<T> {
        if (dv_means[0] - dv_means[1]).abs() <= tol * dv_scale {
            Some(dv_means[0])
        } else {
            aitken(dv_means)
        }
    };
    let k_floor = tol * dv_scale.max(T::one());
    let clamp_k = |k: T| if k < T::zero() && k >= -k_floor { T::zero() } else { k };

    let growth_k = |diagnostics: &mut Vec<String>| match k_limit() {
        Some(k) if k >= -k_floor => Classification::LInfinite { k: clamp_k(k) },
        Some(k) => {
            diagnostics.push(format!("v grows but v' tends to {k} < 0"));
            Classification::Undetermined
        }
        None => {
            diagnostics.push("v grows but v' does not settle to a finite value".into());
            Classification::Undetermined
        }
    };
    let classification = if v_means.iter().any(|&m| !(m > T::zero())) {
        diagnostics.push("non-positive amplitude mean".into());
        Classification::Undetermined
    } else if (v_means[0] - v_means[1]).abs() <= tol * v_scale {
        Classification::LFinite { l: v_means[0] }
    } else {
        // On log means a power law is an arithmetic sequence (ratio of
        // successive differences near 1), a finite limit a geometrically
        // converging one.
        let logs = v_means.map(|m| m.ln());
        let (e1, e2) = (logs[0] - logs[1], logs[1] - logs[2]);
        let r = if e2 != T::zero() { e1 / e2 } else { T::infinity() };
        if r > T::zero() && r < T::lit(POWER_LAW_RATIO) {
            let limit = logs[0] + e1 * r / (T::one() - r);
            Classification::LFinite { l: limit.exp() }
        } else if r >= T::lit(POWER_LAW_RATIO) && e1 < T::zero() {
            match k_limit() {
                Some(k) => Classification::LZero { k: clamp_k(k) },
                None => {
                    diagnostics.push("v tends to 0 but v' does not settle".into());
                    Classification::Undetermined
                }
            }
        } else if r >= T::lit(POWER_LAW_RATIO) && e1 > T::zero() {
            growth_k(&mut diagnostics)
        } else {
            diagnostics.push("v window means oscillate; no limit can be read off".into());
            Classification::Undetermined
        }
    };
    ClassifyReport {
        classification,
        windows,
        v_means,
        dv_means,
        diagnostics,
    }
}

/// Settings for [`find_principal`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FinderOptions<T> {
    /// Largest accepted `max(|k1|, |k2|)` of the optimum.
    pub residual_tol: T,
    /// Relative tolerance handed to [`classify`].
    pub classify_tol: T,
    /// Relative tolerance of the simplex descent.
    pub simplex_rtol: T,
    /// Required phase advance over the window, in units of π.
    pub min_periods: T,
}

impl<T: Real> Default for FinderOptions<T> {
    fn default() -> Self {
        FinderOptions {
            residual_tol: T::lit(1e-5),
            classify_tol: T::lit(1e-3),
            simplex_rtol: T::lit(1e-10),
            min_periods: T::lit(3.0),
        }
    }
}

/// Result of the principal-pair search.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalReport<T> {
    pub coeffs: CombinationCoefficients<T>,
    pub classification: Classification<T>,
    pub l: Option<T>,
    pub k: Option<T>,
    pub k1_est: T,
    pub k2_est: T,
    /// Detrended variance of `v̄'` over the window at the optimum.
    pub objective: T,
    /// Window the coefficients were fitted on.
    pub window: (T, T),
    pub classify: ClassifyReport<T>,
    pub diagnostics: Vec<String>,
}

/// The principal pair itself, with its phase over the whole trajectory.
#[derive(Clone, Debug)]
pub struct PrincipalFit<T> {
    pub report: PrincipalReport<T>,
    pub pair: PairTrajectory<T>,
    pub phase: PhaseData<T>,
}

/// The objective `J(A, B, C) = θᵀ G θ`, with `G` the covariance of the
/// detrended features `2 y1 y1'`, `2 y2 y2'`, `2 (y1' y2 + y1 y2')`.
pub struct Objective<T> {
    gram: [[T; 3]; 3],
    scale: T,
}

impl<T: Real> Objective<T> {
    /// Builds `G` from the trajectory at `samples` (sorted, inside the span).
    pub fn new(traj: &PairTrajectory<T>, samples: &[T]) -> Result<Self> {
        let n = samples.len();
        if n < 8 {
            return Err(Error::GridTooCoarse(format!("{n} samples in the window")));
        }
        let (lo, hi) = (samples[0], samples[n - 1]);
        let two = T::lit(2.0);
        let mut features = Vec::with_capacity(n);
        let mut trends = Vec::with_capacity(n);
        for &x in samples {
            let [y1, p1, y2, p2] = traj.sample(x)?;
            features.push([two * y1 * p1, two * y2 * p2, two * (p1 * y2 + y1 * p2)]);
            trends.push(trend_basis(x, lo, hi));
        }
        // Orthonormalize the trend columns (modified Gram-Schmidt) and
        // project them out of each feature.
        let mut basis: Vec<Vec<T>> = Vec::new();
        for k in 0..=TREND_DEGREE {
            let mut col: Vec<T> = trends.iter().map(|t| t[k]).collect();
            for e in &basis {
                let dot = col.iter().zip(e).fold(T::zero(), |a, (&u, &v)| a + u * v);
                for (c, &v) in col.iter_mut().zip(e) {
                    *c = *c - dot * v;
                }
            }
            let norm = col.iter().fold(T::zero(), |a, &u| a + u * u).sqrt();
            if norm > T::zero() {
                basis.push(col.into_iter().map(|u| u / norm).collect());
            }
        }
        for f in 0..3 {
            for e in &basis {
                let dot = features.iter().zip(e).fold(T::zero(), |a, (u, &v)| a + u[f] * v);
                for (u, &v) in features.iter_mut().zip(e) {
                    u[f] = u[f] - dot * v;
                }
            }
        }
        let mut gram = [[T::zero(); 3]; 3];
        let nn = T::from_usize(n).unwrap();
        for u in &features {
            for i in 0..3 {
                for j in 0..3 {
                    gram[i][j] = gram[i][j] + u[i] * u[j] / nn;
                }
            }
        }
        let scale = gram[0][0] + gram[1][1] + gram[2][2];
        Ok(Objective { gram, scale })
    }

    pub fn value(&self, c: &CombinationCoefficients<T>) -> T {
        let th = [c.a, c.b, c.c];
        let mut acc = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc = acc + th[i] * self.gram[i][j] * th[j];
            }
        }
        acc.max(T::zero())
    }

    /// Trace of `G`; the objective at `(1, 1, 0)`-like points is of this size.
    pub fn scale(&self) -> T {
        self.scale
    }
}

/// Nelder–Mead descent in two variables. Returns the best vertex and value.
fn nelder_mead<T: Real, F: Fn([T; 2]) -> T>(f: &F, start: [T; 2], step: [T; 2], rtol: T) -> ([T; 2], T) {
    let mut pts = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut vals = pts.map(f);
    let half = T::lit(0.5);
    for _ in 0..20_000 {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap_or(std::cmp::Ordering::Equal));
        pts = idx.map(|i| pts[i]);
        vals = idx.map(|i| vals[i]);
        let size = (1..3)
            .map(|k| (pts[k][0] - pts[0][0]).abs().max((pts[k][1] - pts[0][1]).abs()))
            .fold(T::zero(), T::max);
        let spread = vals[2] - vals[0];
        let reference = T::one() + pts[0][0].abs().max(pts[0][1].abs());
        if size <= rtol * reference && spread <= rtol * vals[0].abs() + T::min_positive_value() {
            break;
        }
        if size <= T::epsilon() * reference {
            break;
        }
        let centroid = [(pts[0][0] + pts[1][0]) * half, (pts[0][1] + pts[1][1]) * half];
        let along = |t: T| {
            [
                centroid[0] + t * (pts[2][0] - centroid[0]),
                centroid[1] + t * (pts[2][1] - centroid[1]),
            ]
        };
        let reflected = along(-T::one());
        let fr = f(reflected);
        if fr < vals[0] {
            let expanded = along(-T::lit(2.0));
            let fe = f(expanded);
            if fe < fr {
                pts[2] = expanded;
                vals[2] = fe;
            } else {
                pts[2] = reflected;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            pts[2] = reflected;
            vals[2] = fr;
        } else {
            let (contracted, fc) = if fr < vals[2] {
                let p = along(-half);
                (p, f(p))
            } else {
                let p = along(half);
                (p, f(p))
            };
            if fc < vals[2].min(fr) {
                pts[2] = contracted;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    pts[k] = [
                        pts[0][0] + (pts[k][0] - pts[0][0]) * half,
                        pts[0][1] + (pts[k][1] - pts[0][1]) * half,
                    ];
                    vals[k] = f(pts[k]);
                }
            }
        }
    }
    let best = (0..3)
        .min_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    (pts[best], vals[best])
}

/// Newton iteration on the stationarity conditions of `θᵀGθ` restricted to
/// `AB - C² = 1`. The simplex stops where the objective is flat to its
/// tolerance, which leaves `θ` accurate only to about the square root of
/// it; a few Lagrange-Newton steps from there reach the stationary point.
fn lagrange_polish<T: Real>(
    obj: &Objective<T>,
    start: CombinationCoefficients<T>,
) -> Option<(CombinationCoefficients<T>, T)> {
    let g = &obj.gram;
    let two = T::lit(2.0);
    let mut th = [start.a, start.b, start.c];
    let grad_g = |t: &[T; 3]| [t[1], t[0], -two * t[2]];
    let g_times = |t: &[T; 3]| {
        let mut out = [T::zero(); 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i] = out[i] + g[i][j] * t[j];
            }
        }
        out
    };
    let dg = grad_g(&th);
    let gt = g_times(&th);
    let norm2 = dg.iter().fold(T::zero(), |a, &u| a + u * u);
    let mut lambda = two * (0..3).fold(T::zero(), |a, i| a + dg[i] * gt[i]) / norm2;
    let hess = [
        [T::zero(), T::one(), T::zero()],
        [T::one(), T::zero(), T::zero()],
        [T::zero(), T::zero(), -two],
    ];
    for _ in 0..8 {
        let dg = grad_g(&th);
        let gt = g_times(&th);
        let mut m = vec![vec![T::zero(); 4]; 4];
        let mut rhs = vec![T::zero(); 4];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = two * g[i][j] - lambda * hess[i][j];
            }
            m[i][3] = -dg[i];
            m[3][i] = dg[i];
            rhs[i] = -(two * gt[i] - lambda * dg[i]);
        }
        rhs[3] = -(th[0] * th[1] - th[2] * th[2] - T::one());
        let step = linalg::solve(m, rhs)?;
        for i in 0..3 {
            th[i] = th[i] + step[i];
        }
        lambda = lambda + step[3];
        if step[..3]
            .iter()
            .all(|d| d.abs() <= T::epsilon() * T::lit(4.0) * (T::one() + th[0].abs() + th[1].abs()))
        {
            break;
        }
    }
    let det = th[0] * th[1] - th[2] * th[2];
    if !(det > T::zero() && th[0] > T::zero()) || !th.iter().all(|t| t.is_finite()) {
        return None;
    }
    let r = det.sqrt().recip();
    let c = CombinationCoefficients::new(th[0] * r, th[1] * r, th[2] * r);
    Some((c, obj.value(&c)))
}

/// Minimizes `J` over `AB - C² = 1`, `A > 0`. Multistart over
/// `p = 2^k (k = -6..6)`, `m ∈ [-4, 4]` step `0.5`, each start polished by
/// a simplex in `(ln p, m)`.
pub fn minimize_objective<T: Real>(obj: &Objective<T>, rtol: T) -> Result<(CombinationCoefficients<T>, T)> {
    let f = |z: [T; 2]| obj.value(&CombinationCoefficients::from_chart(z[0].exp(), z[1]));
    let mut starts = Vec::new();
    for k in -6..=6 {
        for j in 0..=16 {
            let u = T::lit(k as f64) * T::LN_2();
            let m = T::lit(-4.0 + 0.5 * j as f64);
            starts.push([u, m]);
        }
    }
    let start_vals: Vec<T> = starts.iter().map(|&z| f(z)).collect();
    let hi = start_vals.iter().copied().fold(T::zero(), T::max);
    let lo = start_vals.iter().copied().fold(T::infinity(), T::min);
    if !(hi > T::zero()) || hi - lo <= T::lit(1e-12) * hi {
        return Err(Error::FlatObjective);
    }
    let mut minima: Vec<(CombinationCoefficients<T>, T)> = starts
        .iter()
        .map(|&z| {
            let (p, v) = nelder_mead(&f, z, [T::lit(0.25), T::lit(0.25)], rtol);
            let c = CombinationCoefficients::from_chart(p[0].exp(), p[1]);
            lagrange_polish(obj, c).filter(|q| q.1 <= v).unwrap_or((c, v))
        })
        .collect();
    let best = minima.iter().map(|m| m.1).fold(T::infinity(), T::min);
    let tie = T::lit(1e-12) * (best + T::lit(1e-12) * obj.scale());
    minima.retain(|m| m.1 - best <= tie);
    minima.sort_by(|x, y| {
        let key = |c: &CombinationCoefficients<T>| (c.c.abs(), (c.a - c.b).abs());
        let (kx, ky) = (key(&x.0), key(&y.0));
        kx.partial_cmp(&ky).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(minima[0])
}

/// Fitting window: `window` itself when the phase advances by at least
/// `min_periods · π` across it, otherwise extended to the left until it
/// does. If even the whole span falls short but covers at least π, the whole
/// span is used, the returned flag is set, and later fits on this window
/// only require one period.
pub fn select_window<T: Real>(
    phase: &PhaseData<T>,
    window: (T, T),
    min_periods: T,
) -> Result<((T, T), bool, Vec<String>)> {
    let (lo, hi) = window;
    let n = phase.grid.len();
    let first = phase.grid[0];
    let end = phase.window(first, hi);
    if end.is_empty() {
        return Err(Error::InvalidInterval {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let last = end.end - 1;
    let a_hi = phase.alpha[last];
    let needed = min_periods * T::PI();
    let advance = |i: usize| (a_hi - phase.alpha[i]).abs();
    let start = phase.grid.partition_point(|&g| g < lo).min(n - 1);
    if advance(start) >= needed {
        return Ok(((lo, hi), false, Vec::new()));
    }
    let mut diagnostics = Vec::new();
    if let Some(i) = (0..start).rev().find(|&i| advance(i) >= needed) {
        diagnostics.push(format!(
            "window extended from [{lo}, {hi}] to [{}, {hi}] to cover {} phase periods",
            phase.grid[i], min_periods
        ));
        return Ok(((phase.grid[i], hi), false, diagnostics));
    }
    let total = advance(0) / T::PI();
    if total >= T::one() {
        diagnostics.push(format!(
            "whole span advances the phase by only {:.3} periods of 2α; fitted on the full span",
            total.as_f64()
        ));
        return Ok(((first, hi), true, diagnostics));
    }
    Err(Error::WindowTooShort {
        periods: total.as_f64(),
        required: min_periods.as_f64(),
    })
}

/// Tail window holding the last `fraction` of the trajectory span.
pub fn tail_window<T: Real>(traj: &PairTrajectory<T>, fraction: T) -> (T, T) {
    let (lo, hi) = (traj.t0(), traj.t_end());
    (hi - fraction * (hi - lo), hi)
}

/// Phase of `traj` on its mesh nodes and interval midpoints.
pub fn full_phase<T: Real>(traj: &PairTrajectory<T>) -> Result<PhaseData<T>> {
    phase_unwrap(traj, &refined_nodes(traj.mesh(), traj.t0(), traj.t_end()))
}

/// Finds the principal combination of a unit-Wronskian pair.
pub fn find_principal<T: Real>(
    traj: &PairTrajectory<T>,
    window: (T, T),
    opts: &FinderOptions<T>,
) -> Result<PrincipalReport<T>> {
    Ok(fit_principal(traj, window, opts)?.report)
}

/// [`find_principal`], also returning the principal pair and its phase.
pub fn fit_principal<T: Real>(
    traj: &PairTrajectory<T>,
    window: (T, T),
    opts: &FinderOptions<T>,
) -> Result<PrincipalFit<T>> {
    if !traj.is_unit() {
        return Err(Error::NonUnitWronskian(traj.w().as_f64()));
    }
    let phase = full_phase(traj)?;
    let (window, relaxed, mut diagnostics) = select_window(&phase, window, opts.min_periods)?;
    let guard = if relaxed { T::one() } else { opts.min_periods };
    let samples = refined_nodes(traj.mesh(), window.0, window.1);
    let objective = Objective::new(traj, &samples)?;
    let (coeffs, value) = minimize_objective(&objective, opts.simplex_rtol)?;

    let [a, b, c, d] = coeffs.unit_matrix();
    let pair = traj.combine(a, b, c, d);
    let pair_phase = full_phase(&pair)?;
    let decomposition = decompose_with_guard(&pair, &pair_phase, &CombinationCoefficients::identity(), window, guard)?;
    let mut classify_report = classify(&pair_phase, (traj.t0(), traj.t_end()), opts.classify_tol);
    diagnostics.extend(classify_report.diagnostics.iter().cloned());
    let residual = decomposition.k1.abs().max(decomposition.k2.abs());
    if !(residual <= opts.residual_tol) {
        diagnostics.push(format!(
            "oscillation residual {} exceeds {}; classification withheld",
            residual, opts.residual_tol
        ));
        classify_report.classification = Classification::Undetermined;
    }
    let classification = classify_report.classification;
    let report = PrincipalReport {
        coeffs,
        classification,
        l: classification.l(),
        k: classification.k(),
        k1_est: decomposition.k1,
        k2_est: decomposition.k2,
        objective: value,
        window,
        classify: classify_report,
        diagnostics,
    };
    Ok(PrincipalFit {
        report,
        pair,
        phase: pair_phase,
    })
}

/// Limit of `q` read from the last dyadic windows of the span.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QLimit<T> {
    Finite(T),
    Zero,
    Infinite,
    Unknown,
}

/// Outcome of one hypothesis check.
#[derive(Clone, Debug, PartialEq)]
pub enum PredicateStatus<T> {
    Holds,
    /// `at` is the first grid point violating an inequality, `None` when
    /// only the limit requirement fails.
    Fails {
        at: Option<T>,
        violations: usize,
        reason: String,
    },
    NotDecidable(String),
}

impl<T> PredicateStatus<T> {
    pub fn holds(&self) -> bool {
        matches!(self, PredicateStatus::Holds)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SufficientConditions<T> {
    /// `q' ≥ 0`, `q'' ≤ 0`, `q → ∞`.
    pub corollary1: PredicateStatus<T>,
    /// `q' ≤ 0`, `q q'' - 3 q'² ≥ 0`.
    pub corollary2: PredicateStatus<T>,
    /// `q' ≥ 0`, `q'' ≤ 0`, `0 < q(∞) < ∞`.
    pub remark_finite_q: PredicateStatus<T>,
    pub q_limit: QLimit<T>,
    pub checked: usize,
}

fn q_limit<T: Real>(model: &EquationModel<T>, lo: T, hi: T) -> Result<QLimit<T>> {
    let len = hi - lo;
    let half = T::lit(0.5);
    let q0 = model.q(hi)?;
    let q1 = model.q(lo + len * half)?;
    let q2 = model.q(lo + len * half * half)?;
    let (d1, d2) = (q0 - q1, q1 - q2);
    let size = q0.abs().max(q1.abs()).max(q2.abs());
    if d1.abs() <= T::lit(1e-12) * size {
        return Ok(if q0.abs() <= T::lit(1e-12) * size.max(T::one()) {
            QLimit::Zero
        } else {
            QLimit::Finite(q0)
        });
    }
    if d2 == T::zero() {
        return Ok(QLimit::Unknown);
    }
    let r = d1 / d2;
    if r > T::zero() && r < T::lit(0.95) {
        let limit = q0 + d1 * r / (T::one() - r);
        return Ok(if limit.abs() <= T::lit(1e-2) * q0.abs() {
            QLimit::Zero
        } else {
            QLimit::Finite(limit)
        });
    }
    if r >= T::lit(0.95) && d1 > T::zero() {
        return Ok(QLimit::Infinite);
    }
    Ok(QLimit::Unknown)
}

/// Checks the hypotheses of the two existence results and of the finite-`q`
/// remark on a log-spaced grid of `grid_n` points over `span`.
pub fn sufficient_conditions<T: Real>(
    model: &EquationModel<T>,
    span: (T, T),
    grid_n: usize,
) -> Result<SufficientConditions<T>> {
    if grid_n < 16 {
        return Err(Error::InvalidArgument(format!("grid_n = {grid_n}, need at least 16")));
    }
    let (lo, hi) = span;
    if !(hi > lo) {
        return Err(Error::InvalidInterval {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    // log-spaced in (x - lo + 1), so spans starting at 0 work too
    let grid: Vec<T> = linspace(T::zero(), (hi - lo + T::one()).ln(), grid_n)
        .into_iter()
        .map(|u| lo + u.exp() - T::one())
        .collect();
    let slack = T::lit(1e-10);
    let mut inc_fail: Option<(T, usize)> = None; // q' ≥ 0 and q'' ≤ 0
    let mut dec_fail: Option<(T, usize)> = None; // q' ≤ 0 and q q'' - 3q'² ≥ 0
    let bump = |slot: &mut Option<(T, usize)>, x: T| match slot {
        Some((_, n)) => *n += 1,
        None => *slot = Some((x, 1)),
    };
    for &x in &grid {
        let v = model.eval(x)?;
        let size = v.q.abs() + v.dq.abs() + v.d2q.abs();
        let concave_up = v.dq < -slack * size || v.d2q > slack * size;
        if concave_up {
            bump(&mut inc_fail, x);
        }
        let hartman = v.q * v.d2q - T::lit(3.0) * v.dq * v.dq;
        let hartman_scale = (v.q * v.d2q).abs() + T::lit(3.0) * v.dq * v.dq;
        if v.dq > slack * size || hartman < -slack * hartman_scale {
            bump(&mut dec_fail, x);
        }
    }
    let limit = q_limit(model, lo, hi)?;
    let fails_at = |slot: Option<(T, usize)>, reason: &str| -> Option<PredicateStatus<T>> {
        slot.map(|(x, n)| PredicateStatus::Fails {
            at: Some(x),
            violations: n,
            reason: reason.to_string(),
        })
    };
    let limit_fail = |reason: &str| PredicateStatus::Fails {
        at: None,
        violations: 0,
        reason: reason.to_string(),
    };
    let corollary1 = fails_at(inc_fail, "q' >= 0 and q'' <= 0 violated").unwrap_or(match limit {
        QLimit::Infinite => PredicateStatus::Holds,
        QLimit::Unknown => PredicateStatus::NotDecidable("limit of q not determined".into()),
        _ => limit_fail("q tends to a finite limit"),
    });
    let corollary2 = fails_at(dec_fail, "q' <= 0 and q q'' - 3 q'^2 >= 0 violated").unwrap_or(PredicateStatus::Holds);
    let remark_finite_q = fails_at(inc_fail, "q' >= 0 and q'' <= 0 violated").unwrap_or(match limit {
        QLimit::Finite(l) if l > T::zero() => PredicateStatus::Holds,
        QLimit::Unknown => PredicateStatus::NotDecidable("limit of q not determined".into()),
        _ => limit_fail("q does not tend to a positive finite limit"),
    });
    Ok(SufficientConditions {
        corollary1,
        corollary2,
        remark_finite_q,
        q_limit: limit,
        checked: grid_n,
    })
}
