use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotacover::angle::circ_dist;
use rotacover::constructions::{
    build_bad_perfect_set, build_bad_sequence, build_good_sequence, build_very_good_sequence, dilate_cover,
    elementary_t0, torus_segment_density, BadOpts, ScheduleTerm, ShellOpts,
};
use rotacover::coverage::{recheck_hole, AngleSet};
use rotacover::{CircleArc, Lattice, PolarBox, Vec2};

fn segment_dist(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let d = b - a;
    let t = ((p - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// Exact torus distance from `p` to the segment `{(x, s·x) : 0 ≤ x ≤ h}`.
fn torus_dist(p: &Vec2, s: f64, h: f64) -> f64 {
    let a = Vec2::zeros();
    let b = Vec2::new(h, s * h);
    let (ylo, yhi) = (b.y.min(0.0).floor() as i64 - 1, b.y.max(0.0).ceil() as i64 + 1);
    let mut best = f64::INFINITY;
    for i in -1..=(h.ceil() as i64 + 1) {
        for j in ylo..=yhi {
            best = best.min(segment_dist(&(p + Vec2::new(i as f64, j as f64)), &a, &b));
        }
    }
    best
}

#[test]
fn torus_density_against_grid() {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    for (slope, delta) in [(golden, 0.05), (1.0 + 2f64.sqrt(), 0.08), (-0.4142135623730951, 0.06)] {
        let d = torus_segment_density(slope, delta).unwrap();
        for i in 0..100 {
            for j in 0..100 {
                let p = Vec2::new((i as f64 + 0.5) * 0.01, (j as f64 + 0.5) * 0.01);
                let dist = torus_dist(&p, slope, d.h);
                assert!(dist < delta, "slope {slope}: {p:?} at {dist}");
            }
        }
    }
}

#[test]
fn elementary_radius_holds_on_random_annulus_arcs() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let z = Lattice::integer();
    for (eps, theta0) in [(0.8, 1.0), (0.6, 0.5)] {
        let t0 = elementary_t0(eps, theta0, None).unwrap().t0;
        assert!(t0.is_finite() && t0 > 0.0);
        for _ in 0..100 {
            let t = rng.gen_range(t0..2.0 * t0);
            let g = rng.gen_range(0.0..std::f64::consts::TAU);
            let pbox = PolarBox::new(t, t + eps, g, g + 2.0 * theta0).unwrap();
            assert!(!z.points_in_polar_box(&pbox).unwrap().is_empty(), "t = {t}, γ = {g}");
        }
    }
}

#[test]
fn elementary_radius_is_monotone() {
    let narrow = elementary_t0(0.5, 0.1, None).unwrap().t0;
    let wide = elementary_t0(0.5, std::f64::consts::PI, None).unwrap().t0;
    assert!(wide < narrow);
    let dirs = rotacover::constructions::default_directions(0.5);
    let a = elementary_t0(0.3, 0.5, Some(&dirs)).unwrap().t0;
    let b = elementary_t0(0.6, 0.5, Some(&dirs)).unwrap().t0;
    assert!(b <= a);
    assert!(elementary_t0(0.3, 0.5, Some(&[0.0, 1.0])).is_err());
}

#[test]
fn good_sequence_reverifies() {
    let z = Lattice::integer();
    let arc = CircleArc::new(0.0, 1.0).unwrap();
    let opts = ShellOpts::default();
    let res = build_good_sequence(&z, 0.3, &arc, 10.0, 5, &opts).unwrap();
    assert_eq!(res.shells.len(), 5);
    assert!(res.reverify(&z, opts.max_depth).unwrap());
    assert!(res.angles.iter().all(|&a| arc.contains(a)));
    assert!(arc.contains(res.limit));
    for w in res.angles.windows(2) {
        assert!(circ_dist(w[1], res.limit) <= circ_dist(w[0], res.limit));
    }
    for w in res.shells.windows(2) {
        assert!((w[1].r_lo - w[0].r_hi).abs() < 1e-12);
        assert!(w[0].arc.contains_arc(&w[1].arc));
    }
    res.angle_set().unwrap();
}

#[test]
fn very_good_sequence_accumulates_at_zero() {
    let z = Lattice::integer();
    let schedule = ScheduleTerm::default_schedule(3);
    let res = build_very_good_sequence(&z, &schedule, 10.0, 1, &ShellOpts::default()).unwrap();
    assert_eq!(res.shells.len(), 3);
    assert!(res.reverify(&z, 30).unwrap());
    assert!(res.angles.iter().all(|&a| a > 0.0 && a < schedule[0].a));
    for (shell, term) in res.shells.iter().zip(&schedule) {
        assert_eq!(shell.epsilon, term.epsilon);
        assert!(shell.angles.iter().all(|&a| a < term.a), "{:?} vs {}", shell.angles, term.a);
    }
}

#[test]
fn bad_sequence_invariants() {
    let z = Lattice::integer();
    let res = build_bad_sequence(&z, 0.3, 4, &BadOpts::default()).unwrap();
    assert_eq!(res.angles.len(), 4);
    let set = AngleSet::finite(&res.angles).unwrap();
    for (j, h) in res.holes.iter().enumerate() {
        assert!(h.center.norm() >= (j + 1) as f64);
        assert!(recheck_hole(h, &set, &z, 0.3).unwrap() > 0.0);
        for g in &res.holes[..j] {
            assert!((g.center - h.center).norm() > g.radius + h.radius);
        }
    }
    // each new angle costs every earlier hole at most half its clearance
    for n in 1..res.clearances.len() {
        for (j, c) in res.clearances[n].iter().enumerate().take(n) {
            assert!(*c >= 0.5 * res.clearances[n - 1][j] - 1e-12);
        }
    }
}

#[test]
fn perfect_set_invariants() {
    let z = Lattice::integer();
    let res = build_bad_perfect_set(&z, 0.3, 3, &BadOpts::default()).unwrap();
    assert_eq!(res.levels.len(), 4);
    for (n, level) in res.levels.iter().enumerate() {
        assert_eq!(level.len(), 1 << n);
    }
    let set = res.angle_set().unwrap();
    for h in &res.holes {
        assert!(recheck_hole(h, &set, &z, 0.3).unwrap() > 0.0);
    }
    for (n, h) in res.holes.iter().enumerate() {
        assert!(h.center.norm() >= (n + 1) as f64);
    }
}

#[test]
fn dilates_cover_the_line() {
    for eps in [0.3, 0.1, 0.05, 0.49] {
        let d = dilate_cover(eps).unwrap();
        assert_eq!(d.factors.len() as u64, (1.0 / eps).ceil() as u64);
        assert!((d.worst.0 as f64) < eps * d.worst.1 as f64);
        // dense check of min_k dist(kx, Z) < ε with the minimal prefix
        for i in 0..20_000 {
            let x = i as f64 / 20_000.0;
            let m = (1..=d.minimal_prefix)
                .map(|k| {
                    let y = k as f64 * x;
                    (y - y.round()).abs()
                })
                .fold(1.0, f64::min);
            assert!(m < eps, "ε = {eps}, x = {x}");
        }
    }
    assert_eq!(dilate_cover(0.3).unwrap().factors, vec![1, 2, 3, 4]);
    assert!(dilate_cover(0.5).is_err());
}
