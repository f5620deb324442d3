use proptest::prelude::*;
use rotacover::angle::{normalize, polar_angle};
use rotacover::{Lattice, PolarBox, Vec2};
use std::f64::consts::{PI, TAU};

fn brute_shortest(l: &Lattice, range: i64) -> f64 {
    let mut best = f64::INFINITY;
    for i in -range..=range {
        for j in -range..=range {
            if (i, j) != (0, 0) {
                best = best.min(l.point(i, j).norm());
            }
        }
    }
    best
}

/// Columns with moderate skew so that `[-5, 5]²` around the input basis still contains the
/// shortest vector.
fn lattice_strategy() -> impl Strategy<Value = Lattice> {
    (0.3f64..3.0, 0.0f64..TAU, 0.3f64..3.0, 0.3f64..(PI - 0.3)).prop_map(|(a, t, b, gap)| {
        let u = [a * t.cos(), a * t.sin()];
        let v = [b * (t + gap).cos(), b * (t + gap).sin()];
        Lattice::from_columns(u, v).unwrap()
    })
}

fn integer_combination(m: &rotacover::Mat2, target: &Vec2) -> bool {
    let c = m.try_inverse().unwrap() * target;
    (c.x - c.x.round()).abs() < 1e-9 && (c.y - c.y.round()).abs() < 1e-9
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn shortest_vector_is_brute_force_minimum(l in lattice_strategy()) {
        let s = l.shortest_len();
        prop_assert!((s - brute_shortest(&l, 5)).abs() < 1e-12);
        prop_assert!((l.shortest_vector().norm() - s).abs() < 1e-12);
    }

    #[test]
    fn reduced_basis_generates_same_lattice(l in lattice_strategy()) {
        let (a, r) = (l.basis(), l.reduced_basis());
        for c in 0..2 {
            prop_assert!(integer_combination(a, &r.column(c).into_owned()));
            prop_assert!(integer_combination(r, &a.column(c).into_owned()));
        }
        let b1 = r.column(0).into_owned();
        let b2 = r.column(1).into_owned();
        prop_assert!(b1.norm() <= b2.norm() + 1e-12);
        prop_assert!((b1.dot(&b2) / b1.norm_squared()).abs() <= 0.5 + 1e-12);
    }

    #[test]
    fn dual_is_an_involution(l in lattice_strategy()) {
        let d = l.dual();
        prop_assert!((d.density() - l.det_abs()).abs() < 1e-9 * l.det_abs());
        let dd = d.dual();
        for c in 0..2 {
            prop_assert!(integer_combination(l.basis(), &dd.basis().column(c).into_owned()));
        }
        // ⟨λ, λ*⟩ ∈ Z
        for (i, j) in [(1, 0), (0, 1), (2, -3)] {
            for (p, q) in [(1, 0), (0, 1), (-1, 4)] {
                let x = l.point(i, j).dot(&d.point(p, q));
                prop_assert!((x - x.round()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn polar_box_agrees_with_filtered_disk(
        l in lattice_strategy(),
        r_lo in 0.0f64..6.0,
        width in 0.05f64..3.0,
        phi_lo in -PI..PI,
        span in 0.01f64..TAU,
    ) {
        let pbox = PolarBox::new(r_lo, r_lo + width, phi_lo, phi_lo + span).unwrap();
        let mut from_box: Vec<(i64, i64)> = l
            .points_in_polar_box(&pbox)
            .unwrap()
            .iter()
            .map(|p| key(&l, p))
            .collect();
        let mut from_disk: Vec<(i64, i64)> = l
            .points_in_disk(&Vec2::zeros(), r_lo + width)
            .unwrap()
            .iter()
            .filter(|p| pbox.contains(p))
            .map(|p| key(&l, p))
            .collect();
        from_box.sort();
        from_disk.sort();
        prop_assert_eq!(from_box, from_disk);
    }

    #[test]
    fn disk_count_close_to_area(l in lattice_strategy(), r in 5.0f64..40.0) {
        let n = l.points_in_disk(&Vec2::zeros(), r).unwrap().len() as f64;
        let expected = PI * r * r * l.density();
        prop_assert!((n - expected).abs() <= 10.0 * (r + 1.0) * l.density().max(1.0), "{n} vs {expected}");
    }
}

fn key(l: &Lattice, p: &Vec2) -> (i64, i64) {
    let c = l.basis().try_inverse().unwrap() * p;
    (c.x.round() as i64, c.y.round() as i64)
}

#[test]
fn disk_points_are_exactly_those_within_radius() {
    let l = Lattice::from_columns([2.0, 0.0], [1.0, 2.0]).unwrap();
    let c = Vec2::new(0.3, -0.7);
    let pts = l.points_in_disk(&c, 7.5).unwrap();
    let mut brute = 0;
    for i in -20..=20 {
        for j in -20..=20 {
            if (l.point(i, j) - c).norm() <= 7.5 {
                brute += 1;
            }
        }
    }
    assert_eq!(pts.len(), brute);
    assert!(pts.iter().all(|p| (p - c).norm() <= 7.5));
}

#[test]
fn disk_order_is_by_angle_then_norm() {
    let z = Lattice::integer();
    let pts = z.points_in_disk(&Vec2::zeros(), 3.0).unwrap();
    let keyed: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.norm() > 0.0)
        .map(|p| (normalize(polar_angle(p)), p.norm()))
        .collect();
    for w in keyed.windows(2) {
        assert!(w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 <= w[1].1), "{w:?}");
    }
}

#[test]
fn unit_annulus_on_integers() {
    let z = Lattice::integer();
    let pts = z.points_in_polar_box(&PolarBox::annulus(0.9, 1.1).unwrap()).unwrap();
    assert_eq!(pts.len(), 4);
    let empty = z.points_in_polar_box(&PolarBox::new(1.1, 1.3, 0.05, 0.35).unwrap()).unwrap();
    assert!(empty.is_empty());
}
