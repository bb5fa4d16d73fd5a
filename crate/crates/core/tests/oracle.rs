mod common;

use indeptest::oracle::{
    mao_centered_moment, mao_second_moment_correction, mao_variance, schott_centered_moments, sphere_r2_moments,
    verify_moment_by_simulation, Identity, MomentCase, Tolerance,
};
use num_rational::Ratio;
use num_traits::ToPrimitive;

type Q = Ratio<i128>;

fn as_f64(q: &Q) -> f64 {
    q.to_f64().unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn parse_fraction(s: &str) -> Q {
    let (a, b) = s.split_once('/').unwrap();
    Q::new(a.parse().unwrap(), b.parse().unwrap())
}

const NS: [usize; 5] = [11, 12, 20, 50, 100];

#[test]
fn float_matches_exact_rational() {
    for n in NS {
        for case in [MomentCase::AllEqual, MomentCase::TwoPairs, MomentCase::Otherwise] {
            let f = mao_centered_moment::<f64>(case, n).unwrap();
            let q = mao_centered_moment::<Q>(case, n).unwrap();
            assert!(rel(f, as_f64(&q)) < 1e-12, "{case:?} n={n}");
        }
        assert!(rel(mao_variance::<f64>(n).unwrap(), as_f64(&mao_variance::<Q>(n).unwrap())) < 1e-12);
        let cf = sphere_r2_moments::<f64>(n).unwrap();
        let cq = sphere_r2_moments::<Q>(n).unwrap();
        for (a, b) in cf.iter().zip(&cq) {
            assert!(rel(*a, as_f64(b)) < 1e-12);
        }
        let df = schott_centered_moments::<f64>(n).unwrap();
        let dq = schott_centered_moments::<Q>(n).unwrap();
        for (a, b) in df.iter().zip(&dq) {
            assert!(rel(*a, as_f64(b)) < 1e-12, "n={n}: {a} vs {b}");
        }
        for p in [2usize, 3, 10] {
            let f = mao_second_moment_correction::<f64>(n, p).unwrap();
            let q = mao_second_moment_correction::<Q>(n, p).unwrap();
            assert!(rel(f, as_f64(&q)) < 1e-12);
        }
    }
}

#[test]
fn exact_values_match_independent_fixture() {
    let fixture = common::reference_values();
    for n in NS {
        let fourth = parse_fraction(fixture["moments"][format!("mao_fourth_central_n{n}")].as_str().unwrap());
        let var = parse_fraction(fixture["moments"][format!("mao_variance_n{n}")].as_str().unwrap());
        assert_eq!(mao_centered_moment::<Q>(MomentCase::AllEqual, n).unwrap(), fourth, "n={n}");
        assert_eq!(mao_variance::<Q>(n).unwrap(), var, "n={n}");
        assert_eq!(mao_centered_moment::<Q>(MomentCase::TwoPairs, n).unwrap(), var * var);
    }
    assert_eq!(mao_centered_moment::<Q>(MomentCase::AllEqual, 12).unwrap(), Q::new(981, 4096));
}

#[test]
fn unnormalized_forms_differ_by_square_of_n_minus_four() {
    // 15.328125 and 0.140625 are the n = 12 values without the (n-4)^2 factor.
    let scale = Q::from_integer(64);
    assert_eq!(mao_centered_moment::<Q>(MomentCase::AllEqual, 12).unwrap() * scale, Q::new(15_328_125, 1_000_000));
    assert_eq!(mao_centered_moment::<Q>(MomentCase::TwoPairs, 12).unwrap() * scale, Q::new(140_625, 1_000_000));
}

#[test]
fn d1_vanishes_and_d2_is_closed_form() {
    for n in 3..=100usize {
        let [c1, ..] = sphere_r2_moments::<Q>(n).unwrap();
        assert_eq!(c1 - Q::new(1, n as i128 - 1), Q::from_integer(0));
        let [d2, _, _] = schott_centered_moments::<Q>(n).unwrap();
        let m = n as i128;
        assert_eq!(d2, Q::new(2 * (m - 2), (m - 1) * (m - 1) * (m + 1)));
    }
    assert_eq!(schott_centered_moments::<Q>(10).unwrap()[0], Q::new(16, 891));
}

#[test]
fn too_few_replications_is_an_error() {
    assert!(verify_moment_by_simulation(Identity::SphereMoment(1), 10, 1, 1, Tolerance::Relative(0.01)).is_err());
}

#[test]
fn first_moment_by_simulation() {
    let check = verify_moment_by_simulation(Identity::SphereMoment(1), 10, 100_000, 3, Tolerance::Relative(0.01)).unwrap();
    assert!(check.passed, "{check:?}");
    assert_eq!(check.analytic, 1.0 / 9.0);
}

#[test]
fn simulation_is_reproducible() {
    let id = Identity::MaoFourth(MomentCase::TwoPairs);
    let a = verify_moment_by_simulation(id, 20, 20_000, 8, Tolerance::Relative(0.1)).unwrap();
    let b = verify_moment_by_simulation(id, 20, 20_000, 8, Tolerance::Relative(0.1)).unwrap();
    assert_eq!(a, b);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = one.install(|| verify_moment_by_simulation(id, 20, 20_000, 8, Tolerance::Relative(0.1)).unwrap());
    assert_eq!(a, c);
}
