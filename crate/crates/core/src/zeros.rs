//! Zeros of solutions and of their derivatives, and the table matching
//! critical points of `y1` to zeros of `y2`.

use crate::error::{Error, Result};
use crate::fmt::sig17;
use crate::grid::refined_nodes;
use crate::integrate::{PairTrajectory, State};
use crate::phasekit::PhaseData;
use crate::real::Real;

/// Component whose zeros are sought.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Y1,
    Y2,
    DY1,
    DY2,
}

impl Target {
    fn index(self) -> usize {
        match self {
            Target::Y1 => 0,
            Target::DY1 => 1,
            Target::Y2 => 2,
            Target::DY2 => 3,
        }
    }
}

const NEWTON_ITERATIONS: usize = 8;

fn value_and_slope<T: Real>(traj: &PairTrajectory<T>, target: Target, x: T) -> Result<(T, T)> {
    let s: State<T> = traj.sample(x)?;
    let i = target.index();
    if i.is_multiple_of(2) {
        Ok((s[i], s[i + 1]))
    } else {
        Ok((s[i], -traj.model().q(x)? * s[i - 1]))
    }
}

/// Root in `[a, b]` where `f(a)`, `f(b)` have opposite signs: safeguarded
/// Newton with the exact derivative, then bisection to full width.
fn polish<T: Real>(traj: &PairTrajectory<T>, target: Target, mut a: T, mut b: T, fa: T) -> Result<T> {
    let tol = |x: T| (T::lit(1e-13) * x.abs()).max(T::lit(1e-14));
    let negative_left = fa < T::zero();
    let mut x = (a + b) * T::lit(0.5);
    for _ in 0..NEWTON_ITERATIONS {
        let (f, df) = value_and_slope(traj, target, x)?;
        if f == T::zero() {
            return Ok(x);
        }
        if (f < T::zero()) == negative_left {
            a = x;
        } else {
            b = x;
        }
        let step = if df != T::zero() { f / df } else { T::infinity() };
        let next = x - step;
        if next > a && next < b && step.is_finite() {
            x = next;
            if step.abs() <= tol(x) {
                return Ok(x);
            }
        } else {
            x = (a + b) * T::lit(0.5);
        }
    }
    while b - a > tol(a) {
        let m = (a + b) * T::lit(0.5);
        if m <= a || m >= b {
            break;
        }
        let (f, _) = value_and_slope(traj, target, m)?;
        if f == T::zero() {
            return Ok(m);
        }
        if (f < T::zero()) == negative_left {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((a + b) * T::lit(0.5))
}

/// Sorted zeros of `target` in `span`. Sign changes are located on the mesh
/// nodes and interval midpoints, then polished.
pub fn zeros_of<T: Real>(traj: &PairTrajectory<T>, target: Target, span: (T, T)) -> Result<Vec<T>> {
    let (lo, hi) = span;
    if !(hi > lo) {
        return Err(Error::InvalidInterval {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    for x in [lo, hi] {
        if x < traj.t0() || x > traj.t_end() {
            return Err(Error::OutOfSpan {
                x: x.as_f64(),
                lo: traj.t0().as_f64(),
                hi: traj.t_end().as_f64(),
            });
        }
    }
    let mut points = vec![lo];
    points.extend(
        refined_nodes(traj.mesh(), lo, hi)
            .into_iter()
            .filter(|&x| x > lo && x < hi),
    );
    points.push(hi);
    let mut out = Vec::new();
    let (mut xa, mut fa) = (lo, value_and_slope(traj, target, lo)?.0);
    if fa == T::zero() {
        out.push(lo);
    }
    for &xb in &points[1..] {
        let fb = value_and_slope(traj, target, xb)?.0;
        if fb == T::zero() {
            out.push(xb);
        } else if fa != T::zero() && (fa < T::zero()) != (fb < T::zero()) {
            out.push(polish(traj, target, xa, xb, fa)?);
        }
        xa = xb;
        fa = fb;
    }
    Ok(out)
}

/// One matched pair of a critical point of `y1` and a zero of `y2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapRow<T> {
    pub j: usize,
    pub x_crit: T,
    pub x_zero: T,
    pub gap: T,
    /// `|α(x_crit) - α(x_zero)|` reduced mod π to `[0, π/2]`.
    pub phase_gap: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroGapTable<T> {
    pub rows: Vec<GapRow<T>>,
    /// Name of the solution whose critical points were used.
    pub y1_label: String,
}

impl<T: Real> ZeroGapTable<T> {
    pub fn d_first(&self) -> Option<T> {
        self.rows.first().map(|r| r.gap)
    }

    pub fn d_last(&self) -> Option<T> {
        self.rows.last().map(|r| r.gap)
    }

    pub fn delta_last(&self) -> Option<T> {
        self.rows.last().map(|r| r.phase_gap)
    }

    /// True if the gaps of the last `n` rows strictly decrease.
    pub fn tail_decreasing(&self, n: usize) -> bool {
        let k = self.rows.len();
        k >= n && self.rows[k - n..].windows(2).all(|p| p[1].gap < p[0].gap)
    }

    /// CSV with header `j,x_crit,x_zero,gap,phase_gap`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,x_crit,x_zero,gap,phase_gap\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.j,
                sig17(r.x_crit.as_f64()),
                sig17(r.x_zero.as_f64()),
                sig17(r.gap.as_f64()),
                sig17(r.phase_gap.as_f64())
            ));
        }
        s
    }
}

/// Phase at `x` on the branch of `phase`: the arctangent of `(y1, y2)`
/// shifted by the multiple of 2π nearest to the interpolated phase.
pub fn phase_at<T: Real>(traj: &PairTrajectory<T>, phase: &PhaseData<T>, x: T) -> Result<T> {
    let s = traj.sample(x)?;
    let raw = s[0].atan2(s[2]);
    let approx = phase.alpha_at(x);
    let turns = ((approx - raw) / T::TAU()).round();
    Ok(raw + turns * T::TAU())
}

fn reduce_half_pi<T: Real>(d: T) -> T {
    let r = d.abs() % T::PI();
    r.min(T::PI() - r)
}

/// Index of the zero nearest to `x`, ties to the left.
fn nearest<T: Real>(zeros: &[T], x: T) -> Option<usize> {
    if zeros.is_empty() {
        return None;
    }
    let i = zeros.partition_point(|&z| z < x);
    let candidates = [i.checked_sub(1), (i < zeros.len()).then_some(i)];
    match candidates {
        [Some(l), Some(r)] => Some(if x - zeros[l] <= zeros[r] - x { l } else { r }),
        [Some(l), None] => Some(l),
        [None, Some(r)] => Some(r),
        [None, None] => None,
    }
}

/// Matches each critical point to its nearest zero. Points whose nearest
/// partner could lie outside `span` (closer to the span edge than to the
/// first or last zero) are dropped.
pub fn match_nearest<T: Real>(crit: &[T], zeros: &[T], span: (T, T)) -> Vec<(T, T)> {
    let mut out = Vec::new();
    let (Some(&first), Some(&last)) = (zeros.first(), zeros.last()) else {
        return out;
    };
    for &x in crit {
        if x < first && x - span.0 < first - x {
            continue;
        }
        if x > last && span.1 - x < x - last {
            continue;
        }
        if let Some(i) = nearest(zeros, x) {
            out.push((x, zeros[i]));
        }
    }
    out
}

/// Minimum number of zeros of each kind a table needs.
pub const MIN_ZEROS: usize = 5;

/// Matches zeros of `y1'` to the nearest zeros of `y2` over `span`.
pub fn gap_table<T: Real>(traj: &PairTrajectory<T>, phase: &PhaseData<T>, span: (T, T)) -> Result<ZeroGapTable<T>> {
    let crit = zeros_of(traj, Target::DY1, span)?;
    let zeros = zeros_of(traj, Target::Y2, span)?;
    let found = crit.len().min(zeros.len());
    if found < MIN_ZEROS {
        return Err(Error::TooFewZeros {
            found,
            required: MIN_ZEROS,
        });
    }
    let mut rows = Vec::new();
    for (x_crit, x_zero) in match_nearest(&crit, &zeros, span) {
        let d_alpha = phase_at(traj, phase, x_crit)? - phase_at(traj, phase, x_zero)?;
        rows.push(GapRow {
            j: rows.len() + 1,
            x_crit,
            x_zero,
            gap: (x_crit - x_zero).abs(),
            phase_gap: reduce_half_pi(d_alpha),
        });
    }
    Ok(ZeroGapTable {
        rows,
        y1_label: "y1".into(),
    })
}

/// Mean gap over the last `tail` critical points of `y1` when matched to
/// the zeros of `y(x; θ) = cos θ · y1 + sin θ · y2`, for `θ = kπ/n`,
/// `k = 0..n`.
pub fn rotated_tail_gaps<T: Real>(
    traj: &PairTrajectory<T>,
    span: (T, T),
    n: usize,
    tail: usize,
) -> Result<Vec<(usize, T)>> {
    let crit = zeros_of(traj, Target::DY1, span)?;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let theta = T::PI() * T::from_usize(k).unwrap() / T::from_usize(n).unwrap();
        let (s, c) = theta.sin_cos();
        let rotated = traj.combine(c, s, -s, c);
        let zeros = zeros_of(&rotated, Target::Y1, span)?;
        let pairs = match_nearest(&crit, &zeros, span);
        if pairs.len() < tail.max(1) {
            return Err(Error::TooFewZeros {
                found: pairs.len(),
                required: tail.max(1),
            });
        }
        let last = &pairs[pairs.len() - tail..];
        let mean = last.iter().fold(T::zero(), |a, &(x, z)| a + (x - z).abs()) / T::from_usize(tail).unwrap();
        out.push((k, mean));
    }
    Ok(out)
}

/// Agreement of `cot α(x_j)` with `α''/(2α'²) = v'/(2w)` at critical points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalResidual<T> {
    pub max: T,
    pub points: usize,
}

/// Evaluates both sides of the critical-point relation at each `x_j`, using
/// `α' = -w/v` and `α'' = w v'/v²`.
pub fn critical_point_residual<T: Real>(
    traj: &PairTrajectory<T>,
    phase: &PhaseData<T>,
    x_crit: &[T],
) -> Result<CriticalResidual<T>> {
    let two = T::lit(2.0);
    let mut worst = T::zero();
    for &x in x_crit {
        let alpha = phase_at(traj, phase, x)?;
        let (sin, cos) = alpha.sin_cos();
        if sin.abs() < T::lit(1e-12) {
            return Err(Error::SingularCotangent(x.as_f64()));
        }
        let s = traj.sample(x)?;
        let v = s[0] * s[0] + s[2] * s[2];
        let dv = two * (s[0] * s[1] + s[2] * s[3]);
        let w = phase.w;
        let ap = -w / v;
        let app = w * dv / (v * v);
        let rhs = app / (two * ap * ap);
        worst = worst.max((cos / sin - rhs).abs());
    }
    Ok(CriticalResidual {
        max: worst,
        points: x_crit.len(),
    })
}
