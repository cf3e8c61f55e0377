//! Phase, amplitude and polar coordinates of a solution pair.
//!
//! For a pair with Wronskian `w`, the amplitude `v = y1² + y2²` and the
//! phase `α` (continuous, `tan α = y1/y2`) satisfy `v α' = -w`, and
//! `y1 = √v sin α`, `y2 = √v cos α`. Everything here is evaluated from the
//! trajectory's states and the model's exact `q`, `q'`; numerical
//! differentiation appears only in the independent residual checks.

use crate::error::{Error, Result};
use crate::integrate::{PairTrajectory, State};
use crate::principal::CombinationCoefficients;
use crate::real::Real;

/// `y1 y2' - y1' y2` of a sampled state.
pub fn wronskian<T: Real>(state: &State<T>) -> T {
    crate::integrate::wronskian(state)
}

/// Amplitude `v` and its first two derivatives on a grid.
#[derive(Clone, Debug)]
pub struct Amplitude<T> {
    pub grid: Vec<T>,
    pub v: Vec<T>,
    pub v_prime: Vec<T>,
    pub v_second: Vec<T>,
}

/// Phase and amplitude of a unit-Wronskian pair on a grid.
#[derive(Clone, Debug)]
pub struct PhaseData<T> {
    pub grid: Vec<T>,
    /// Continuous phase, strictly monotone.
    pub alpha: Vec<T>,
    /// `-w / v`.
    pub alpha_prime: Vec<T>,
    pub v: Vec<T>,
    pub v_prime: Vec<T>,
    pub v_second: Vec<T>,
    pub w: T,
    /// Sign `ε` in `y1 = ε √v sin α`; always `+1` with `α(t0)` from `atan2(y1, y2)`.
    pub eps_sign: i8,
    /// Largest distance, modulo 2π, between the quadrature phase and
    /// `atan2(y1, y2)` over the grid.
    pub branch_mismatch: T,
}

impl<T: Real> PhaseData<T> {
    /// `α'' = w v' / v²`, from differentiating `v α' = -w`.
    pub fn alpha_second(&self, i: usize) -> T {
        self.w * self.v_prime[i] / (self.v[i] * self.v[i])
    }

    /// Phase at `x` by linear interpolation in the grid, then corrected with
    /// the exact `α'` at the nearer node. Intended for fine grids.
    pub fn alpha_at(&self, x: T) -> T {
        let i = self.grid.partition_point(|&g| g <= x);
        let j = if i == 0 {
            0
        } else if i >= self.grid.len() {
            self.grid.len() - 1
        } else if (x - self.grid[i - 1]) <= (self.grid[i] - x) {
            i - 1
        } else {
            i
        };
        self.alpha[j] + self.alpha_prime[j] * (x - self.grid[j])
    }

    /// Index range of grid points inside `[lo, hi]`.
    pub fn window(&self, lo: T, hi: T) -> std::ops::Range<usize> {
        let a = self.grid.partition_point(|&g| g < lo);
        let b = self.grid.partition_point(|&g| g <= hi);
        a..b.max(a)
    }
}

/// Polar coordinates `y = ρ sin φ`, `y' = ρ cos φ` of one solution.
#[derive(Clone, Debug)]
pub struct PruferPolar<T> {
    pub grid: Vec<T>,
    pub rho: Vec<T>,
    pub phi: Vec<T>,
}

/// Maximum and root-mean-square of a normalized residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualStats<T> {
    pub max: T,
    pub rms: T,
    pub points: usize,
}

impl<T: Real> ResidualStats<T> {
    fn from_values(values: &[T]) -> Self {
        let n = values.len();
        let max = values.iter().copied().fold(T::zero(), T::max);
        let ss = values.iter().fold(T::zero(), |acc, &r| acc + r * r);
        ResidualStats {
            max,
            rms: (ss / T::from_usize(n.max(1)).unwrap()).sqrt(),
            points: n,
        }
    }
}

fn require_unit<T: Real>(traj: &PairTrajectory<T>) -> Result<()> {
    if traj.is_unit() {
        Ok(())
    } else {
        Err(Error::NonUnitWronskian(traj.w().as_f64()))
    }
}

fn check_grid<T: Real>(traj: &PairTrajectory<T>, grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::GridTooCoarse("empty grid".into()));
    }
    if grid.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    let (lo, hi) = (traj.t0(), traj.t_end());
    for &x in [grid[0], grid[grid.len() - 1]].iter() {
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfSpan {
                x: x.as_f64(),
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
    }
    Ok(())
}

/// `v = y1² + y2²`, `v' = 2(y1 y1' + y2 y2')`, `v'' = 2(y1'² + y2'²) - 2 q v`.
pub fn amplitude_series<T: Real>(traj: &PairTrajectory<T>, grid: &[T]) -> Result<Amplitude<T>> {
    require_unit(traj)?;
    check_grid(traj, grid)?;
    let two = T::lit(2.0);
    let n = grid.len();
    let mut out = Amplitude {
        grid: grid.to_vec(),
        v: Vec::with_capacity(n),
        v_prime: Vec::with_capacity(n),
        v_second: Vec::with_capacity(n),
    };
    for &x in grid {
        let [y1, p1, y2, p2] = traj.sample(x)?;
        let q = traj.model().q(x)?;
        let v = y1 * y1 + y2 * y2;
        out.v.push(v);
        out.v_prime.push(two * (y1 * p1 + y2 * p2));
        out.v_second.push(two * (p1 * p1 + p2 * p2) - two * q * v);
    }
    Ok(out)
}

fn amplitude_at<T: Real>(traj: &PairTrajectory<T>, x: T) -> Result<T> {
    let s = traj.sample(x)?;
    let v = s[0] * s[0] + s[2] * s[2];
    if v > T::zero() {
        Ok(v)
    } else {
        Err(Error::VanishingAmplitude(x.as_f64()))
    }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub(crate) fn adaptive_simpson<T, F>(f: &F, a: T, b: T, tol: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> Result<T>,
{
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T, F>(f: &F, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> Result<T>
where
    T: Real,
    F: Fn(T) -> Result<T>,
{
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let (lm, rm) = ((a + m) * half, (m + b) * half);
    let (flm, frm) = (f(lm)?, f(rm)?);
    let six = T::lit(6.0);
    let four = T::lit(4.0);
    let left = (m - a) / six * (fa + four * flm + fm);
    let right = (b - m) / six * (fm + four * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol || (b - a) <= T::epsilon() * m.abs() {
        return Ok(left + right + delta / T::lit(15.0));
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, tol * half, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, tol * half, depth - 1)?)
}

/// Absolute quadrature tolerance per unit length.
const PHASE_QUAD_TOL: f64 = 1e-10;
/// Beyond this the grid is considered too coarse.
const PHASE_MISMATCH_LIMIT: f64 = 1e-4;

fn wrap_pi<T: Real>(d: T) -> T {
    let two_pi = T::TAU();
    d - two_pi * (d / two_pi).round()
}

/// Phase `α` with `α(t0) = atan2(y1, y2)` extended by quadrature of the
/// exact `α' = -w/v`. The quadrature breaks at every mesh node, where the
/// trajectory is exact.
pub fn phase_unwrap<T: Real>(traj: &PairTrajectory<T>, grid: &[T]) -> Result<PhaseData<T>> {
    let amp = amplitude_series(traj, grid)?;
    let w = traj.w();
    let integrand = |x: T| -> Result<T> { Ok(-w / amplitude_at(traj, x)?) };

    let mesh = traj.mesh();
    let t0 = traj.t0();
    let s0 = traj.sample(t0)?;
    let mut alpha_here = s0[0].atan2(s0[2]);
    let mut here = t0;
    let mut k = 1usize; // next mesh node index beyond `here`
    let tol = T::lit(PHASE_QUAD_TOL);

    let n = grid.len();
    let mut alpha = Vec::with_capacity(n);
    let mut alpha_prime = Vec::with_capacity(n);
    let mut mismatch = T::zero();
    for (i, &x) in grid.iter().enumerate() {
        while k < mesh.len() && mesh[k] < x {
            let next = mesh[k];
            if next > here {
                alpha_here = alpha_here + adaptive_simpson(&integrand, here, next, tol * (next - here))?;
                here = next;
            }
            k += 1;
        }
        if x > here {
            alpha_here = alpha_here + adaptive_simpson(&integrand, here, x, tol * (x - here))?;
            here = x;
        }
        let v = amp.v[i];
        if !(v > T::zero()) {
            return Err(Error::VanishingAmplitude(x.as_f64()));
        }
        let s = traj.sample(x)?;
        let d = wrap_pi(alpha_here - s[0].atan2(s[2])).abs();
        if d > T::lit(PHASE_MISMATCH_LIMIT) {
            return Err(Error::PhaseMismatch {
                x: x.as_f64(),
                mismatch: d.as_f64(),
            });
        }
        mismatch = mismatch.max(d);
        alpha.push(alpha_here);
        alpha_prime.push(-w / v);
    }

    Ok(PhaseData {
        grid: amp.grid,
        alpha,
        alpha_prime,
        v: amp.v,
        v_prime: amp.v_prime,
        v_second: amp.v_second,
        w,
        eps_sign: 1,
        branch_mismatch: mismatch,
    })
}

/// Largest `|y1 - ε√v sin α| / √v` and `|y2 - ε√v cos α| / √v` over the grid.
pub fn representation_residual<T: Real>(traj: &PairTrajectory<T>, phase: &PhaseData<T>) -> Result<T> {
    let eps = if phase.eps_sign < 0 { -T::one() } else { T::one() };
    let mut worst = T::zero();
    for (i, &x) in phase.grid.iter().enumerate() {
        let s = traj.sample(x)?;
        let r = phase.v[i].sqrt();
        let (sin, cos) = phase.alpha[i].sin_cos();
        worst = worst
            .max((s[0] - eps * r * sin).abs() / r)
            .max((s[2] - eps * r * cos).abs() / r);
    }
    Ok(worst)
}

/// Largest `|v α' + w| / |w|` over the grid.
pub fn phase_identity_residual<T: Real>(phase: &PhaseData<T>) -> T {
    phase
        .v
        .iter()
        .zip(&phase.alpha_prime)
        .map(|(&v, &ap)| (v * ap + phase.w).abs() / phase.w.abs())
        .fold(T::zero(), T::max)
}

/// True if `α` is strictly monotone on the grid with `α'` of one sign.
pub fn is_strictly_monotone<T: Real>(phase: &PhaseData<T>) -> bool {
    let up = phase.w < T::zero();
    let derivative_ok = phase
        .alpha_prime
        .iter()
        .all(|&a| if up { a > T::zero() } else { a < T::zero() });
    let values_ok = phase
        .alpha
        .windows(2)
        .all(|p| if up { p[1] > p[0] } else { p[1] < p[0] });
    derivative_ok && values_ok
}

/// Local angular frequency scale of `v̄`, used both to pick finite-difference
/// steps and to normalize residuals.
fn local_frequency<T: Real>(q: T, x: T) -> T {
    T::lit(2.0) * q.abs().sqrt() + (T::one() + x.abs()).recip()
}

/// Checks the Appell equation `v''' + 4 q v' + 2 q' v = 0` for
/// `v̄ = A y1² + B y2² + 2C y1 y2`.
///
/// At each grid point `v̄'''` is formed twice: analytically as
/// `-4 q v̄' - 2 q' v̄`, and by the 5-point central difference
/// `(f(x+2h) - 2f(x+h) + 2f(x-h) - f(x-2h)) / 2h³` of the interpolated `v̄`,
/// Richardson-extrapolated over `h` and `2h`. The difference is divided by
/// `Ω³ (y1² + y2²)(|A| + |B| + 2|C|)` with `Ω = 2√|q| + 1/(1+|x|)`, which
/// bounds the natural size of `v̄'''`. Grid points whose stencil leaves the
/// trajectory are skipped.
pub fn appell_residual<T: Real>(
    traj: &PairTrajectory<T>,
    coeffs: &CombinationCoefficients<T>,
    grid: &[T],
) -> Result<ResidualStats<T>> {
    require_unit(traj)?;
    if grid.len() < 5 {
        return Err(Error::GridTooCoarse(format!(
            "{} points; the difference stencil needs at least 5",
            grid.len()
        )));
    }
    check_grid(traj, grid)?;
    let model = traj.model();
    let (lo, hi) = (traj.t0(), traj.t_end());
    let two = T::lit(2.0);
    let weight = coeffs.a.abs() + coeffs.b.abs() + two * coeffs.c.abs();
    let vbar = |x: T| -> Result<T> { Ok(coeffs.eval(&traj.sample(x)?).0) };
    let third = |x: T, h: T| -> Result<T> {
        let (f2, f1) = (vbar(x + two * h)?, vbar(x + h)?);
        let (m1, m2) = (vbar(x - h)?, vbar(x - two * h)?);
        Ok((f2 - two * f1 + two * m1 - m2) / (two * h * h * h))
    };

    let mut values = Vec::with_capacity(grid.len());
    for &x in grid {
        let qv = model.eval(x)?;
        let omega = local_frequency(qv.q, x);
        let h = T::lit(0.02) / omega;
        if x - T::lit(4.0) * h < lo || x + T::lit(4.0) * h > hi {
            continue;
        }
        let s = traj.sample(x)?;
        let (value, slope) = coeffs.eval(&s);
        let analytic = -T::lit(4.0) * qv.q * slope - two * qv.dq * value;
        let fd = (T::lit(4.0) * third(x, h)? - third(x, two * h)?) / T::lit(3.0);
        let envelope = s[0] * s[0] + s[2] * s[2];
        let scale = omega * omega * omega * envelope * weight;
        values.push((fd - analytic).abs() / scale);
    }
    if values.len() < 5 {
        return Err(Error::GridTooCoarse(format!(
            "only {} grid points leave room for the stencil",
            values.len()
        )));
    }
    Ok(ResidualStats::from_values(&values))
}

/// Prüfer coordinates of solution `which` (0 for `y1`, 1 for `y2`):
/// `ρ = √(y² + y'²)` and continuous `φ` with `tan φ = y/y'`, starting from
/// `atan2(y, y')` at `t0`. The angle is unwrapped through every mesh node.
pub fn prufer_polar<T: Real>(traj: &PairTrajectory<T>, which: usize, grid: &[T]) -> Result<PruferPolar<T>> {
    if which > 1 {
        return Err(Error::InvalidArgument(format!(
            "solution index {which} not in {{0, 1}}"
        )));
    }
    check_grid(traj, grid)?;
    let base = 2 * which;
    let angle = |s: &State<T>| s[base].atan2(s[base + 1]);
    let s0 = traj.sample(traj.t0())?;
    if s0[base] == T::zero() && s0[base + 1] == T::zero() {
        return Err(Error::InvalidArgument("solution is identically zero".into()));
    }
    let mesh = traj.mesh();
    let mut phi = angle(&s0);
    let mut raw = phi;
    let mut k = 1usize;
    let mut out = PruferPolar {
        grid: grid.to_vec(),
        rho: Vec::with_capacity(grid.len()),
        phi: Vec::with_capacity(grid.len()),
    };
    let advance = |s: &State<T>, phi: &mut T, raw: &mut T| {
        let a = angle(s);
        *phi = *phi + wrap_pi(a - *raw);
        *raw = a;
    };
    for &x in grid {
        while k < mesh.len() && mesh[k] < x {
            advance(&traj.states()[k], &mut phi, &mut raw);
            k += 1;
        }
        let s = traj.sample(x)?;
        advance(&s, &mut phi, &mut raw);
        out.rho.push((s[base] * s[base] + s[base + 1] * s[base + 1]).sqrt());
        out.phi.push(phi);
    }
    Ok(out)
}
