use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotacover::angle::rotate;
use rotacover::coverage::{
    covers_point, empirical_t0, find_hole_beyond, recheck_hole, verify_region, AngleSet, HoleSearch, Verdict,
};
use rotacover::{CircleArc, Lattice, PolarBox, Vec2};
use std::f64::consts::{PI, TAU};

fn sampled_min_dist(x: &Vec2, arc: &CircleArc, lattice: &Lattice, n: usize) -> f64 {
    (0..n)
        .map(|k| {
            let t = arc.start + arc.length * (k as f64 + 0.5) / n as f64;
            lattice.dist_to_lattice(&rotate(x, -t))
        })
        .fold(f64::INFINITY, f64::min)
}

fn point_strategy() -> impl Strategy<Value = Vec2> {
    (0.5f64..60.0, 0.0f64..TAU).prop_map(|(r, a)| Vec2::new(r * a.cos(), r * a.sin()))
}

fn angle_set_strategy() -> impl Strategy<Value = AngleSet> {
    prop_oneof![
        prop::collection::vec(0.0f64..TAU, 1..6).prop_map(|v| AngleSet::finite(&v).unwrap()),
        (0.0f64..TAU, 0.001f64..1.0).prop_map(|(s, l)| AngleSet::arc(s, l).unwrap()),
        (0.0f64..TAU, 0.001f64..0.3, 0.4f64..2.0, 0.001f64..0.3).prop_map(|(s, l1, gap, l2)| {
            AngleSet::arc_union(vec![
                CircleArc::new(s, l1).unwrap(),
                CircleArc::new(s + l1 + gap, l2).unwrap(),
            ])
            .unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rotation_equivariance(
        x in point_strategy(),
        theta in angle_set_strategy(),
        phi in 0.0f64..TAU,
        eps in 0.05f64..0.45,
    ) {
        let z = Lattice::integer();
        let a = covers_point(&x, &theta, &z, eps).unwrap();
        let b = covers_point(&rotate(&x, phi), &theta.rotated(phi), &z, eps).unwrap();
        if a != Verdict::Ambiguous && b != Verdict::Ambiguous {
            prop_assert_eq!(a, b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn monotone_in_theta_and_epsilon(
        x in point_strategy(),
        start in 0.0f64..TAU,
        len in 0.01f64..1.0,
        grow in 0.0f64..1.0,
        eps in 0.05f64..0.4,
        deps in 0.0f64..0.1,
    ) {
        let z = Lattice::integer();
        let small = AngleSet::arc(start, len).unwrap();
        let big = AngleSet::arc(start - grow, len + 2.0 * grow).unwrap();
        let inner = AngleSet::finite(&[start, start + 0.5 * len]).unwrap();
        let v_inner = covers_point(&x, &inner, &z, eps).unwrap();
        let v_small = covers_point(&x, &small, &z, eps).unwrap();
        let v_big = covers_point(&x, &big, &z, eps).unwrap();
        if v_inner == Verdict::Covered {
            prop_assert_ne!(v_small, Verdict::Uncovered);
        }
        if v_small == Verdict::Covered {
            prop_assert_ne!(v_big, Verdict::Uncovered);
        }
        if v_small == Verdict::Covered {
            prop_assert_ne!(covers_point(&x, &small, &z, eps + deps).unwrap(), Verdict::Uncovered);
        }
    }

    #[test]
    fn adding_the_limit_never_uncovers(
        x in point_strategy(),
        limit in 0.0f64..TAU,
        first in 0.05f64..0.5,
        eps in 0.05f64..0.4,
    ) {
        let z = Lattice::integer();
        let prefix: Vec<f64> = (0..8).map(|k| limit + first * 0.5f64.powi(k)).collect();
        let without = AngleSet::finite(&prefix).unwrap();
        let with = AngleSet::sequence(prefix.clone(), limit).unwrap();
        if covers_point(&x, &without, &z, eps).unwrap() == Verdict::Covered {
            prop_assert_ne!(covers_point(&x, &with, &z, eps).unwrap(), Verdict::Uncovered);
        }
    }
}

#[test]
fn arc_membership_against_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lattices = [
        Lattice::integer(),
        Lattice::from_columns([1.0, 0.0], [0.37, 1.21]).unwrap(),
    ];
    let mut ambiguous = 0;
    let trials = 400;
    for t in 0..trials {
        let l = &lattices[t % 2];
        let arc = CircleArc::new(rng.gen_range(0.0..TAU), rng.gen_range(0.001..1.5)).unwrap();
        let eps = rng.gen_range(0.05..0.4);
        let r = rng.gen_range(0.5..80.0);
        let a = rng.gen_range(0.0..TAU);
        let x = Vec2::new(r * a.cos(), r * a.sin());
        let exact = covers_point(&x, &AngleSet::Arc { arc }, l, eps).unwrap();
        let sampled = sampled_min_dist(&x, &arc, l, 10_000);
        match exact {
            Verdict::Uncovered => assert!(sampled >= eps, "sampling covers {x:?} that the exact test rejects"),
            Verdict::Covered => {}
            Verdict::Ambiguous => ambiguous += 1,
        }
        // Sampling can only over-estimate the true minimum distance, up to the step r·Δθ/2.
        if exact == Verdict::Covered {
            assert!(sampled < eps + 0.5 * r * arc.length / 10_000.0 + 1e-9);
        }
    }
    assert!(ambiguous <= 2, "{ambiguous} ambiguous verdicts");
}

#[test]
fn certified_cells_agree_with_point_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let z = Lattice::integer();
    let cases = [
        (AngleSet::finite(&[0.0, 0.7, 2.1]).unwrap(), 0.3, PolarBox::new(20.0, 21.0, 0.2, 0.5).unwrap()),
        (AngleSet::arc(0.0, 0.05).unwrap(), 0.2, PolarBox::new(30.0, 31.0, 1.0, 1.2).unwrap()),
        (AngleSet::arc(1.0, 0.3).unwrap(), 0.25, PolarBox::new(8.0, 9.0, 0.0, TAU).unwrap()),
    ];
    for (theta, eps, region) in cases {
        let rep = verify_region(&theta, &z, eps, &region, 16).unwrap();
        let total: f64 = rep.cells.iter().map(|c| c.cell.area()).sum();
        assert!((total - region.area()).abs() < 1e-9 * region.area());
        let mut checked = 0;
        for _ in 0..10_000 {
            let cell = &rep.cells[rng.gen_range(0..rep.cells.len())];
            if cell.verdict == Verdict::Ambiguous {
                continue;
            }
            let b = cell.cell;
            let r = rng.gen_range(b.r_lo..b.r_hi);
            let a = rng.gen_range(b.phi_lo..b.phi_hi);
            let x = Vec2::new(r * a.cos(), r * a.sin());
            let v = covers_point(&x, &theta, &z, eps).unwrap();
            assert_ne!(v, cell.verdict.opposite(), "cell {b:?} is {:?} but {x:?} is {v:?}", cell.verdict);
            checked += 1;
        }
        assert!(checked > 1000);
    }
}

trait Opposite {
    fn opposite(self) -> Self;
}

impl Opposite for Verdict {
    fn opposite(self) -> Self {
        match self {
            Verdict::Covered => Verdict::Uncovered,
            Verdict::Uncovered => Verdict::Covered,
            Verdict::Ambiguous => Verdict::Ambiguous,
        }
    }
}

#[test]
fn full_rotation_annulus_matches_monte_carlo() {
    let z = Lattice::integer();
    let full = AngleSet::arc(0.0, TAU).unwrap();
    let rep = verify_region(&full, &z, 0.2, &PolarBox::annulus(10.0, 11.0).unwrap(), 24).unwrap();
    assert!(rep.all_covered());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100_000 {
        let r = rng.gen_range(10.0..11.0);
        // |x| = r is covered iff some lattice point has norm within 0.2 of r
        let near = z
            .points_in_polar_box(&PolarBox::annulus((r - 0.2f64).max(0.0), r + 0.2).unwrap())
            .unwrap()
            .iter()
            .any(|p| (p.norm() - r).abs() < 0.2);
        assert!(near, "radius {r}");
    }
}

#[test]
fn holes_pass_the_independent_recheck() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z = Lattice::integer();
    for _ in 0..5 {
        let k = rng.gen_range(1..=4);
        let angles: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..TAU)).collect();
        let theta = AngleSet::finite(&angles).unwrap();
        let hole = find_hole_beyond(&theta, &z, 0.3, 30.0, 0.05, &HoleSearch::default()).unwrap();
        assert!(hole.center.norm() >= 30.0);
        let c = recheck_hole(&hole, &theta, &z, 0.3).unwrap();
        assert!(c > 0.0 && (c - hole.clearance).abs() < 1e-9, "{c} vs {}", hole.clearance);
        for &t in &angles {
            assert!(z.dist_to_lattice(&rotate(&hole.center, -t)) >= 0.3 + hole.radius);
        }
    }
}

#[test]
fn symmetric_sets_share_the_deep_hole() {
    let z = Lattice::integer();
    let theta = AngleSet::finite(&[0.0, PI / 2.0]).unwrap();
    let hole = find_hole_beyond(&theta, &z, 0.3, 100.0, 0.35, &HoleSearch::default()).unwrap();
    let frac = |v: f64| (v - v.floor() - 0.5).abs();
    assert!(frac(hole.center.x) < 0.05 && frac(hole.center.y) < 0.05, "{:?}", hole.center);
}

#[test]
fn short_arc_has_finite_t0() {
    let z = Lattice::integer();
    let theta = AngleSet::arc(0.0, 0.3).unwrap();
    let t0 = empirical_t0(&theta, &z, 0.25, 1.0, 120.0, 30).unwrap();
    let t0 = t0.expect("finite t0");
    assert!(t0 < 120.0);
    let rep = verify_region(&theta, &z, 0.25, &PolarBox::annulus(t0 + 1.0, t0 + 2.0).unwrap(), 30).unwrap();
    assert!(rep.all_covered());
}
