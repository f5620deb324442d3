use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotacover::fourier::{
    build_restriction_measure, check_goodness_criterion, delta_threshold, ft_sup_on_annulus, measure_ft,
    smooth_step, std_bump, Bump, CircleMeasure, GoodnessOpts, GoodnessVerdict, MollifierPair, Profile,
};
use rotacover::{CircleArc, Lattice, Vec2};
use std::f64::consts::TAU;

/// Midpoint rule for `∫ e^{-2πi ξ·u(θ)} f(θ) dθ` over an arc. The integrands vanish to
/// all orders at the arc ends, so the rule converges faster than any power of `n`.
fn riemann(arc: &CircleArc, n: usize, xi: &Vec2, f: impl Fn(f64) -> f64) -> Complex64 {
    let h = arc.length / n as f64;
    (0..n)
        .map(|k| {
            let s = (k as f64 + 0.5) * h;
            let t = arc.start + s;
            let phase = -TAU * (xi.x * t.cos() + xi.y * t.sin());
            Complex64::from_polar(f(s) * h, phase)
        })
        .sum()
}

fn riemann_oracle(sigma: &CircleMeasure, xi: &Vec2) -> Complex64 {
    let CircleMeasure::BumpDensity { bumps } = sigma else { unreachable!() };
    bumps
        .iter()
        .map(|b| {
            let len = b.arc.length;
            let n = 40_000;
            match b.profile {
                Profile::Standard => {
                    let hw = 0.5 * len;
                    riemann(&b.arc, n, xi, |s| b.mass * std_bump((s - hw) / hw) / hw)
                }
                Profile::Plateau { ramp } => riemann(&b.arc, n, xi, |s| {
                    b.mass * smooth_step(s / ramp) * smooth_step((len - s) / ramp) / (len - ramp)
                }),
            }
        })
        .sum()
}

fn random_bumps(rng: &mut ChaCha8Rng) -> CircleMeasure {
    let k = rng.gen_range(1..=4);
    let mut start = rng.gen_range(0.0..TAU);
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let bumps = weights
        .iter()
        .map(|w| {
            let len = rng.gen_range(0.05..1.2);
            let arc = CircleArc::new(start, len).unwrap();
            start += len + 0.1;
            let profile = if rng.gen_bool(0.5) {
                Profile::Standard
            } else {
                Profile::Plateau { ramp: len * rng.gen_range(0.05..0.45) }
            };
            Bump { arc, profile, mass: w / total }
        })
        .collect();
    let m = CircleMeasure::BumpDensity { bumps };
    m.validate().unwrap();
    m
}

#[test]
fn bump_densities_match_riemann_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..4 {
        let sigma = random_bumps(&mut rng);
        for _ in 0..20 {
            let r = rng.gen_range(0.0..150.0);
            let a = rng.gen_range(0.0..TAU);
            let xi = Vec2::new(r * a.cos(), r * a.sin());
            let got = measure_ft(&sigma, &xi).unwrap();
            let want = riemann_oracle(&sigma, &xi);
            assert!((got - want).norm() < 1e-6, "ξ = {xi:?}: {got} vs {want}");
        }
    }
}

fn measure_strategy() -> impl Strategy<Value = CircleMeasure> {
    prop_oneof![
        prop::collection::vec((0.0f64..TAU, 0.01f64..1.0), 1..6).prop_map(|v| {
            let total: f64 = v.iter().map(|p| p.1).sum();
            let atoms: Vec<(f64, f64)> = v.iter().map(|&(a, w)| (a, w / total)).collect();
            CircleMeasure::atomic(&atoms).unwrap()
        }),
        (0.0f64..TAU, 0.01f64..TAU).prop_map(|(s, l)| CircleMeasure::uniform_arc(CircleArc::new(s, l).unwrap())),
        (0.0f64..TAU, 0.01f64..3.0).prop_map(|(s, l)| CircleMeasure::bump(CircleArc::new(s, l).unwrap())),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn transform_is_hermitian_and_bounded(
        sigma in measure_strategy(),
        r in 0.0f64..300.0,
        a in 0.0f64..TAU,
    ) {
        let xi = Vec2::new(r * a.cos(), r * a.sin());
        let p = measure_ft(&sigma, &xi).unwrap();
        let m = measure_ft(&sigma, &-xi).unwrap();
        prop_assert!((p - m.conj()).norm() < 1e-9);
        prop_assert!(p.norm() <= 1.0 + 1e-9);
    }

    #[test]
    fn delta_is_invariant_under_amplitude(eps in 0.05f64..2.0, skew in 0.0f64..0.5) {
        let l = Lattice::from_columns([1.0, 0.0], [skew, 1.1]).unwrap();
        let base = delta_threshold(&l, eps, &MollifierPair::standard()).unwrap();
        prop_assert!(base > 0.0 && base <= 1.0);
        for c in [0.5, 2.0] {
            let d = delta_threshold(&l, eps, &MollifierPair::with_amplitude(c)).unwrap();
            prop_assert!((d - base).abs() <= 1e-12 * base, "c = {c}: {d} vs {base}");
        }
    }
}

#[test]
fn atomic_measures_recur() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let k = rng.gen_range(1..=4);
        let raw: Vec<(f64, f64)> = (0..k).map(|_| (rng.gen_range(0.0..TAU), rng.gen_range(0.1..1.0))).collect();
        let total: f64 = raw.iter().map(|p| p.1).sum();
        let atoms: Vec<(f64, f64)> = raw.iter().map(|&(a, w)| (a, w / total)).collect();
        let wmax = atoms.iter().map(|p| p.1).fold(0.0, f64::max);
        let sigma = CircleMeasure::atomic(&atoms).unwrap();
        let mut best = 0.0f64;
        let mut r = 1.0;
        while r <= 1000.0 {
            best = best.max(ft_sup_on_annulus(&sigma, r, 2.0 * r, 48).unwrap());
            r *= 2.0;
        }
        assert!(best >= wmax - 0.05, "{atoms:?}: {best}");
    }
}

#[test]
fn full_circle_decays_like_bessel() {
    let full = CircleMeasure::uniform_arc(CircleArc::full());
    let sup = ft_sup_on_annulus(&full, 50.0, 100.0, 64).unwrap();
    assert!(sup <= 0.06, "{sup}");
    // |J₀(2πr)| ≤ (π²r)^{-1/2} for large r
    assert!(sup <= (std::f64::consts::PI.powi(2) * 50.0).powf(-0.5) * 1.01);
}

#[test]
fn arc_sups_shrink_with_inner_radius() {
    for len in [0.2, 0.5, 1.5] {
        let sigma = CircleMeasure::uniform_arc(CircleArc::new(0.3, len).unwrap());
        let sups: Vec<f64> = [10.0, 40.0, 160.0]
            .iter()
            .map(|&lo| ft_sup_on_annulus(&sigma, lo, 400.0, 64).unwrap())
            .collect();
        assert!(sups[0] >= sups[1] && sups[1] >= sups[2], "{len}: {sups:?}");
    }
}

#[test]
fn criterion_separates_arcs_from_atoms() {
    let z = Lattice::integer();
    let annuli: Vec<(f64, f64)> = (3..10).map(|k| (2f64.powi(k), 2f64.powi(k + 1))).collect();
    let arc = CircleMeasure::uniform_arc(CircleArc::new(0.0, 0.5).unwrap());
    let rep = check_goodness_criterion(&arc, &z, 0.35, &annuli, &GoodnessOpts::default()).unwrap();
    assert_eq!(rep.verdict, GoodnessVerdict::Passes, "{rep:?}");
    let atoms = CircleMeasure::atomic(&[(0.0, 0.5), (1.0, 0.5)]).unwrap();
    let rep = check_goodness_criterion(&atoms, &z, 0.35, &annuli, &GoodnessOpts::default()).unwrap();
    assert_eq!(rep.verdict, GoodnessVerdict::Fails);
    assert!(rep.probes.iter().all(|p| p.sup > 0.9));
}

#[test]
fn strict_epsilon_lowers_the_threshold() {
    let z = Lattice::integer();
    let arc = CircleMeasure::uniform_arc(CircleArc::new(0.0, 0.5).unwrap());
    let annuli = [(256.0, 512.0), (512.0, 1024.0)];
    let loose = check_goodness_criterion(&arc, &z, 0.35, &annuli, &GoodnessOpts::default()).unwrap();
    let strict = GoodnessOpts { strict_epsilon: true, ..GoodnessOpts::default() };
    let tight = check_goodness_criterion(&arc, &z, 0.35, &annuli, &strict).unwrap();
    assert!(tight.delta.delta < loose.delta.delta);
    assert!((tight.delta.epsilon - 0.035).abs() < 1e-15);
}

#[test]
fn restriction_surrogate_is_close() {
    let theta = [
        CircleArc::new(0.0, 0.2).unwrap(),
        CircleArc::new(0.21, 0.2).unwrap(),
        CircleArc::new(2.0, 0.7).unwrap(),
    ];
    for d in [0.1, 0.5, 1.0] {
        let r = build_restriction_measure(&theta, d).unwrap();
        assert!(r.density > 1.0 - d / 10.0);
        assert!(r.l1_distance <= d / 2.0, "{d}: {}", r.l1_distance);
        assert!(r.cutoff_loss <= d * r.window.length / 10.0);
        r.measure.validate().unwrap();
        r.surrogate.validate().unwrap();
    }
}
