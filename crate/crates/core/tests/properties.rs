use std::sync::OnceLock;

use phasepair::grid::linspace;
use phasepair::integrate::{integrate_pair, PairTrajectory, Tolerances};
use phasepair::phasekit::{amplitude_series, phase_unwrap, prufer_polar};
use phasepair::principal::{classify, transform_pair, CombinationCoefficients, Objective};
use phasepair::qfunc::EquationModel;
use phasepair::zeros::{zeros_of, Target};
use phasepair::{EquationModelF32, PairTrajectoryF64};
use proptest::prelude::*;

fn unit_pair(name: &str, params: &[(&str, f64)], xmax: f64) -> PairTrajectoryF64 {
    let m = EquationModel::catalog_get(name, params).unwrap();
    integrate_pair(&m, (0.0, 1.0), (1.0, 0.0), xmax, Tolerances::default())
        .unwrap()
        .normalize_unit_wronskian()
}

fn airy() -> &'static PairTrajectoryF64 {
    static P: OnceLock<PairTrajectoryF64> = OnceLock::new();
    P.get_or_init(|| unit_pair("gen-airy", &[("nu", 1.0 / 3.0)], 60.0))
}

fn cauchy() -> &'static PairTrajectoryF64 {
    static P: OnceLock<PairTrajectoryF64> = OnceLock::new();
    P.get_or_init(|| unit_pair("cauchy-euler", &[("gamma", 1.0)], 500.0))
}

fn unimodular() -> impl Strategy<Value = [f64; 4]> {
    (0.0..std::f64::consts::TAU, -1.0f64..1.0, -1.0f64..1.0, any::<bool>()).prop_map(|(th, s, sh, flip)| {
        let (sn, cs) = th.sin_cos();
        let e = s.exp();
        let m = [cs * e, cs * e * sh - sn / e, sn * e, sn * e * sh + cs / e];
        if flip {
            [m[1], m[0], m[3], m[2]]
        } else {
            m
        }
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wronskian_is_conserved(nu in 0.2f64..0.5, y0 in -2.0f64..2.0, p0 in -2.0f64..2.0) {
        prop_assume!((y0 * 1.0 - p0 * 0.3).abs() > 0.1);
        let m = EquationModel::catalog_get("gen-airy", &[("nu", nu)]).unwrap();
        let t = integrate_pair(&m, (y0, p0), (0.3, 1.0), 40.0, Tolerances::default()).unwrap();
        prop_assert!(t.max_wronskian_drift() <= 1e-9 * t.w().abs().max(1.0));
    }

    #[test]
    fn combination_acts_through_pullback(m in unimodular(), a in 0.2f64..3.0, c in -2.0f64..2.0) {
        let base = airy();
        let moved = transform_pair(base, m).unwrap();
        let coeffs = CombinationCoefficients::new(a, (1.0 + c * c) / a, c);
        let back = coeffs.pullback(m);
        for x in [2.0, 17.5, 33.0, 59.0] {
            let lhs = coeffs.eval(&moved.sample(x).unwrap());
            let rhs = back.eval(&base.sample(x).unwrap());
            prop_assert!(rel(lhs.0, rhs.0) < 1e-9);
            prop_assert!((lhs.1 - rhs.1).abs() < 1e-9 * (1.0 + rhs.1.abs()) * (a + (1.0 + c * c) / a));
        }
        let samples = linspace(40.0, 60.0, 200);
        let j_moved = Objective::new(&moved, &samples).unwrap().value(&coeffs);
        let j_base = Objective::new(base, &samples).unwrap().value(&back);
        prop_assert!((j_moved - j_base).abs() <= 1e-8 * j_base.max(1e-12));
    }

    #[test]
    fn unit_determinant_preserved(m in unimodular()) {
        let c = CombinationCoefficients::from_matrix(m);
        prop_assert!((c.determinant() - 1.0).abs() < 1e-10);
        let back = CombinationCoefficients::from_matrix(c.unit_matrix());
        prop_assert!(rel(back.a, c.a) < 1e-12 && rel(back.b, c.b) < 1e-12);
        prop_assert!((back.c - c.c).abs() < 1e-12 * (1.0 + c.c.abs()));
    }

    #[test]
    fn classification_is_rotation_invariant(theta in 0.0f64..std::f64::consts::TAU) {
        let base = cauchy();
        let (s, c) = theta.sin_cos();
        let rotated = transform_pair(base, [c, s, -s, c]).unwrap();
        let grid = linspace(1.0, 500.0, 400);
        let (pa, pb) = (phase_unwrap(base, &grid).unwrap(), phase_unwrap(&rotated, &grid).unwrap());
        for i in 0..grid.len() {
            prop_assert!(rel(pa.v[i], pb.v[i]) < 1e-11);
        }
        let shift = pb.alpha[0] - pa.alpha[0];
        for i in 0..grid.len() {
            prop_assert!((pb.alpha[i] - pa.alpha[i] - shift).abs() < 1e-8);
        }
        let (ca, cb) = (classify(&pa, (1.0, 500.0), 1e-3), classify(&pb, (1.0, 500.0), 1e-3));
        prop_assert_eq!(ca.classification.tag(), cb.classification.tag());
        match (ca.classification.k(), cb.classification.k()) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-9),
            (x, y) => prop_assert_eq!(x, y),
        }
    }

    #[test]
    fn zeros_interlace(c in 0.5f64..4.0) {
        let t = unit_pair("constant", &[("c", c)], 30.0);
        let z1 = zeros_of(&t, Target::Y1, (0.0, 30.0)).unwrap();
        let z2 = zeros_of(&t, Target::Y2, (0.0, 30.0)).unwrap();
        let k = c.sqrt();
        // y1 ∝ sin(kx), y2 ∝ cos(kx)
        let step = std::f64::consts::PI / k;
        for z in &z1 {
            prop_assert!((z - (z / step).round() * step).abs() < 1e-9);
        }
        prop_assert!(z1.len() + 1 >= (30.0 / step) as usize);
        for p in z1.windows(2) {
            prop_assert_eq!(z2.iter().filter(|&&z| z > p[0] && z < p[1]).count(), 1);
        }
    }
}

#[test]
fn amplitude_derivatives_match_differences() {
    let t = airy();
    let h = 1e-4;
    let grid: Vec<f64> = (0..40)
        .flat_map(|i| {
            let x = 2.0 + 1.4 * i as f64;
            [x - h, x, x + h]
        })
        .collect();
    let a = amplitude_series(t, &grid).unwrap();
    for i in (0..grid.len()).step_by(3) {
        let fd1 = (a.v[i + 2] - a.v[i]) / (2.0 * h);
        let fd2 = (a.v_prime[i + 2] - a.v_prime[i]) / (2.0 * h);
        assert!(
            (fd1 - a.v_prime[i + 1]).abs() < 1e-6 * (1.0 + a.v_prime[i + 1].abs()),
            "v' at {}",
            grid[i + 1]
        );
        assert!(
            (fd2 - a.v_second[i + 1]).abs() < 1e-5 * (1.0 + a.v_second[i + 1].abs()),
            "v'' at {}",
            grid[i + 1]
        );
    }
}

#[test]
fn prufer_angle_solves_its_equation() {
    // φ' = cos²φ + q sin²φ for y = ρ sin φ, y' = ρ cos φ
    let t = airy();
    let h = 1e-5;
    let mut grid = Vec::new();
    for i in 0..30 {
        let x = 1.5 + 1.9 * i as f64;
        grid.extend([x - h, x, x + h]);
    }
    for which in [0, 1] {
        let p = prufer_polar(t, which, &grid).unwrap();
        for i in (0..grid.len()).step_by(3) {
            let x = grid[i + 1];
            let fd = (p.phi[i + 2] - p.phi[i]) / (2.0 * h);
            let (s, c) = p.phi[i + 1].sin_cos();
            let exact = c * c + x * s * s;
            assert!((fd - exact).abs() < 1e-5 * (1.0 + exact), "φ' at {x}: {fd} vs {exact}");
            assert!(p.rho[i + 1] > 0.0);
        }
        assert!(p.phi.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn single_precision_pipeline() {
    let m = EquationModelF32::catalog_get("constant", &[("c", 4.0)]).unwrap();
    let tol = Tolerances::new(1e-5f32, 1e-7);
    let t: PairTrajectory<f32> = integrate_pair(&m, (0.0, 1.0), (1.0, 0.0), 10.0, tol).unwrap();
    let s = t.sample(1.0).unwrap();
    assert!((s[0] - 2f32.sin() / 2.0).abs() < 1e-4);
    assert!((s[2] - 2f32.cos()).abs() < 1e-4);
    let z = zeros_of(&t, Target::Y1, (0.1, 10.0)).unwrap();
    assert!((z[0] - std::f32::consts::FRAC_PI_2).abs() < 1e-4);
}
