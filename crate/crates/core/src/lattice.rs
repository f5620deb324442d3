//! Planar lattices `Λ = A·Z²`: Lagrange–Gauss reduction, invariants and enumeration.
//!
//! Enumeration works row by row in the reduced basis `(u, v)`: a lattice point is
//! `i·u + j·v`, the index `j` is a linear functional of the point (its coordinate along
//! the Gram–Schmidt vector `v*`), and for fixed `j` every constraint of a disk or polar box
//! cuts an interval of `i`. Nothing is ever scanned over a bounding square.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::angle::{normalize, polar_angle};
use crate::{Error, Mat2, Result, Vec2, DEFAULT_ENUMERATION_CAP, ETA};

/// Lagrange–Gauss reduction of the basis given by the columns of `basis`.
///
/// The first column of the result is a shortest nonzero vector and the projection
/// coefficient of the second column onto the first is at most 1/2 in absolute value.
pub fn reduce_basis(basis: &Mat2) -> Result<Mat2> {
    let mut u: Vec2 = basis.column(0).into();
    let mut v: Vec2 = basis.column(1).into();
    let det = u.x * v.y - u.y * v.x;
    if !det.is_finite() || det.abs() <= 1e-12 * u.norm() * v.norm() || det == 0.0 {
        return Err(Error::DegenerateLattice);
    }
    if u.norm_squared() > v.norm_squared() {
        std::mem::swap(&mut u, &mut v);
    }
    loop {
        let mu = (u.dot(&v) / u.norm_squared()).round();
        v -= mu * u;
        if v.norm_squared() >= u.norm_squared() {
            break;
        }
        std::mem::swap(&mut u, &mut v);
    }
    Ok(Mat2::from_columns(&[u, v]))
}

/// A full-rank lattice in the plane together with its derived invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    basis: Mat2,
    reduced: Mat2,
    det_abs: f64,
    shortest: Vec2,
    cap: usize,
}

impl Lattice {
    pub fn new(basis: Mat2) -> Result<Self> {
        let reduced = reduce_basis(&basis)?;
        let det_abs = basis.determinant().abs();
        let u: Vec2 = reduced.column(0).into();
        let v: Vec2 = reduced.column(1).into();
        // After reduction the minimum is attained by u; collect every vector of the same
        // length among the short candidates and break ties lexicographically.
        let min = u.norm();
        let tol = 1e-12 * min;
        let shortest = [u, -u, v, -v, u + v, -(u + v), u - v, v - u]
            .into_iter()
            .filter(|c| (c.norm() - min).abs() <= tol)
            .max_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)))
            .unwrap_or(u);
        Ok(Self {
            basis,
            reduced,
            det_abs,
            shortest,
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    /// Lattice generated by the columns `(a, b)`.
    pub fn from_columns(a: [f64; 2], b: [f64; 2]) -> Result<Self> {
        Self::new(Mat2::new(a[0], b[0], a[1], b[1]))
    }

    /// The integer lattice `Z²`.
    pub fn integer() -> Self {
        Self::new(Mat2::identity()).expect("identity basis is nonsingular")
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Ok(Self::new(self.basis * c)?.with_enumeration_cap(self.cap))
    }

    pub fn with_enumeration_cap(mut self, cap: usize) -> Self {
        self.cap = cap.max(1);
        self
    }

    pub fn enumeration_cap(&self) -> usize {
        self.cap
    }

    pub fn basis(&self) -> &Mat2 {
        &self.basis
    }

    pub fn reduced_basis(&self) -> &Mat2 {
        &self.reduced
    }

    /// Area of a fundamental domain, `|det A|`.
    pub fn det_abs(&self) -> f64 {
        self.det_abs
    }

    /// Points per unit area.
    pub fn density(&self) -> f64 {
        1.0 / self.det_abs
    }

    /// A nonzero lattice vector of minimal norm. Ties are broken towards the
    /// lexicographically greatest coordinates, so `Z²` yields `(1, 0)`.
    pub fn shortest_vector(&self) -> Vec2 {
        self.shortest
    }

    /// `s(Λ)`.
    pub fn shortest_len(&self) -> f64 {
        self.shortest.norm()
    }

    /// The dual lattice with basis `A^{-T}`.
    pub fn dual(&self) -> Lattice {
        let inv_t = self
            .basis
            .try_inverse()
            .expect("nonsingular by construction")
            .transpose();
        Lattice::new(inv_t)
            .expect("inverse of a nonsingular basis is nonsingular")
            .with_enumeration_cap(self.cap)
    }

    fn u(&self) -> Vec2 {
        self.reduced.column(0).into()
    }

    fn v(&self) -> Vec2 {
        self.reduced.column(1).into()
    }

    /// Coordinates of `x` in the reduced basis.
    pub fn reduced_coords(&self, x: &Vec2) -> Vec2 {
        let (u, v) = (self.u(), self.v());
        let det = u.x * v.y - u.y * v.x;
        Vec2::new((x.x * v.y - x.y * v.x) / det, (u.x * x.y - u.y * x.x) / det)
    }

    pub fn point(&self, i: i64, j: i64) -> Vec2 {
        self.u() * i as f64 + self.v() * j as f64
    }

    /// Distance from `x` to the nearest lattice point: round in reduced coordinates and
    /// check every integer offset in `[-2, 2]²` around the rounded point.
    pub fn dist_to_lattice(&self, x: &Vec2) -> f64 {
        self.nearest_point(x).1
    }

    pub fn nearest_point(&self, x: &Vec2) -> (Vec2, f64) {
        let c = self.reduced_coords(x);
        let (i0, j0) = (c.x.round() as i64, c.y.round() as i64);
        let mut best = (Vec2::zeros(), f64::INFINITY);
        for di in -2..=2 {
            for dj in -2..=2 {
                let p = self.point(i0 + di, j0 + dj);
                let d = (x - p).norm_squared();
                if d < best.1 {
                    best = (p, d);
                }
            }
        }
        (best.0, best.1.sqrt())
    }

    /// A deep hole near the centre of the reduced fundamental domain, found by local
    /// maximisation of the distance to the lattice.
    pub fn deep_hole(&self) -> Vec2 {
        let mut x = 0.5 * (self.u() + self.v());
        let mut best = self.dist_to_lattice(&x);
        let mut h = 0.25 * self.shortest_len();
        while h > 1e-12 {
            let mut moved = false;
            for k in 0..8 {
                let dir = crate::angle::unit(k as f64 * PI / 4.0);
                let y = x + dir * h;
                let d = self.dist_to_lattice(&y);
                if d > best {
                    best = d;
                    x = y;
                    moved = true;
                }
            }
            if !moved {
                h *= 0.5;
            }
        }
        x
    }

    /// Every lattice point `λ` with `|λ - center| ≤ radius`, sorted by polar angle then norm.
    pub fn points_in_disk(&self, center: &Vec2, radius: f64) -> Result<Vec<Vec2>> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidArgument(format!("radius must be ≥ 0, got {radius}")));
        }
        let (u, v) = (self.u(), self.v());
        let vs = self.gs_vstar();
        let vs_len = vs.norm();
        let jc = center.dot(&vs) / vs.norm_squared();
        let slack = ETA * (1.0 + radius);
        let reach = (radius + slack) / vs_len;
        let (j_lo, j_hi) = ((jc - reach).ceil() as i64, (jc + reach).floor() as i64);
        let mut out = Vec::new();
        let uu = u.norm_squared();
        let r2 = radius * radius;
        for j in j_lo..=j_hi {
            let w = v * j as f64 - center;
            let Some((a, b)) = quad_interval(uu, u.dot(&w), w.norm_squared(), radius + slack) else {
                continue;
            };
            for i in a.ceil() as i64..=b.floor() as i64 {
                let p = u * i as f64 + v * j as f64;
                if (p - center).norm_squared() <= r2 {
                    out.push(p);
                    if out.len() > self.cap {
                        return Err(Error::EnumerationBudget { cap: self.cap });
                    }
                }
            }
        }
        sort_polar(&mut out);
        Ok(out)
    }

    /// Every lattice point inside the polar box (see [`PolarBox::contains`]), sorted by
    /// polar angle then norm.
    pub fn points_in_polar_box(&self, pbox: &PolarBox) -> Result<Vec<Vec2>> {
        let mut out = Vec::new();
        self.visit_polar_box(pbox, |p| out.push(p))?;
        sort_polar(&mut out);
        Ok(out)
    }

    /// Calls `f` on every lattice point of the polar box, in row order.
    pub fn visit_polar_box<F: FnMut(Vec2)>(&self, pbox: &PolarBox, mut f: F) -> Result<()> {
        let mut count = 0usize;
        let parts = pbox.split_at_half_turn();
        for (k, part) in parts.iter().enumerate() {
            let earlier = &parts[..k];
            self.visit_convex_sector(part, pbox, &mut |p| {
                let phi = polar_angle(&p);
                if part.contains_angle(phi) && !earlier.iter().any(|e| e.contains_angle(phi)) {
                    count += 1;
                    f(p);
                }
            })?;
            if count > self.cap {
                return Err(Error::EnumerationBudget { cap: self.cap });
            }
        }
        Ok(())
    }

    fn gs_vstar(&self) -> Vec2 {
        let (u, v) = (self.u(), self.v());
        v - u * (u.dot(&v) / u.norm_squared())
    }

    /// Enumerates a box of angular span at most π. Candidates are generated with loosened
    /// constraints and filtered by the exact membership test of `owner`.
    fn visit_convex_sector<F: FnMut(Vec2)>(
        &self,
        part: &PolarBox,
        owner: &PolarBox,
        f: &mut F,
    ) -> Result<()> {
        let (u, v) = (self.u(), self.v());
        let vs = self.gs_vstar();
        let vs2 = vs.norm_squared();
        let (jl, jh) = part.functional_range(&(vs / vs2));
        let tol = ETA * (1.0 + part.r_hi);
        let jt = tol / vs2.sqrt();
        let (j_lo, j_hi) = ((jl - jt).ceil() as i64, (jh + jt).floor() as i64);
        let uu = u.norm_squared();
        let full = part.span() >= TAU;
        let (e_lo, e_hi) = (crate::angle::unit(part.phi_lo), crate::angle::unit(part.phi_hi));
        let mut count = 0usize;
        for j in j_lo..=j_hi {
            let w = v * j as f64;
            let Some((mut a, mut b)) = quad_interval(uu, u.dot(&w), w.norm_squared(), part.r_hi + tol)
            else {
                continue;
            };
            if !full {
                // cross(e_lo, w + i u) ≥ -tol and cross(w + i u, e_hi) ≥ -tol
                for (c0, c1) in [
                    (cross(&e_lo, &w), cross(&e_lo, &u)),
                    (-cross(&e_hi, &w), -cross(&e_hi, &u)),
                ] {
                    // c0 + c1 i ≥ -tol
                    if c1.abs() < 1e-300 {
                        if c0 < -tol {
                            a = f64::INFINITY;
                        }
                    } else if c1 > 0.0 {
                        a = a.max((-tol - c0) / c1);
                    } else {
                        b = b.min((-tol - c0) / c1);
                    }
                }
            }
            if a > b {
                continue;
            }
            let inner = if part.r_lo > 0.0 {
                quad_interval(uu, u.dot(&w), w.norm_squared(), (part.r_lo - tol).max(0.0))
            } else {
                None
            };
            let mut emit = |lo: f64, hi: f64| -> Result<()> {
                if lo > hi {
                    return Ok(());
                }
                for i in lo.ceil() as i64..=hi.floor() as i64 {
                    let p = u * i as f64 + w;
                    if owner.contains(&p) {
                        count += 1;
                        if count > self.cap {
                            return Err(Error::EnumerationBudget { cap: self.cap });
                        }
                        f(p);
                    }
                }
                Ok(())
            };
            match inner {
                Some((ia, ib)) => {
                    emit(a, b.min(ia))?;
                    emit(a.max(ib), b)?;
                }
                None => emit(a, b)?,
            }
        }
        Ok(())
    }
}

fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Interval of real `i` with `uu·i² + 2·uw·i + ww ≤ r²`.
fn quad_interval(uu: f64, uw: f64, ww: f64, r: f64) -> Option<(f64, f64)> {
    let disc = uw * uw - uu * (ww - r * r);
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some(((-uw - s) / uu, (-uw + s) / uu))
}

fn sort_polar(points: &mut [Vec2]) {
    points.sort_by(|a, b| {
        polar_angle(a)
            .total_cmp(&polar_angle(b))
            .then(a.norm_squared().total_cmp(&b.norm_squared()))
    });
}

/// Polar region `{(r, φ) : r_lo < r < r_hi, φ ∈ [phi_lo, phi_hi] mod 2π}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarBox {
    pub r_lo: f64,
    pub r_hi: f64,
    pub phi_lo: f64,
    pub phi_hi: f64,
}

impl PolarBox {
    pub fn new(r_lo: f64, r_hi: f64, phi_lo: f64, phi_hi: f64) -> Result<Self> {
        let span = phi_hi - phi_lo;
        if !(r_lo >= 0.0 && r_lo < r_hi && r_hi.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "polar box needs 0 ≤ r_lo < r_hi, got [{r_lo}, {r_hi}]"
            )));
        }
        if !(span > 0.0 && span <= TAU + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "polar box angular span must be in (0, 2π], got {span}"
            )));
        }
        Ok(Self {
            r_lo,
            r_hi,
            phi_lo,
            phi_hi: phi_lo + span.min(TAU),
        })
    }

    /// Full annulus `r_lo < r < r_hi`.
    pub fn annulus(r_lo: f64, r_hi: f64) -> Result<Self> {
        Self::new(r_lo, r_hi, 0.0, TAU)
    }

    pub fn span(&self) -> f64 {
        self.phi_hi - self.phi_lo
    }

    pub fn area(&self) -> f64 {
        0.5 * self.span() * (self.r_hi * self.r_hi - self.r_lo * self.r_lo)
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        let r = p.norm();
        if !(r > self.r_lo && r < self.r_hi) {
            return false;
        }
        self.contains_angle(polar_angle(p))
    }

    pub fn contains_angle(&self, phi: f64) -> bool {
        self.span() >= TAU || normalize(phi - self.phi_lo) <= self.span()
    }

    pub fn center(&self) -> Vec2 {
        let r = 0.5 * (self.r_lo + self.r_hi);
        crate::angle::unit(self.phi_lo + 0.5 * self.span()) * r
    }

    /// Upper bound on `|p - center|` over the box.
    pub fn center_radius(&self) -> f64 {
        let hr = 0.5 * (self.r_hi - self.r_lo);
        let rc = 0.5 * (self.r_lo + self.r_hi);
        let hphi = 0.5 * self.span();
        hr + (rc * hphi).min(2.0 * rc)
    }

    fn split_at_half_turn(&self) -> Vec<PolarBox> {
        if self.span() <= PI {
            vec![*self]
        } else {
            let mid = self.phi_lo + 0.5 * self.span();
            vec![
                PolarBox { phi_hi: mid, ..*self },
                PolarBox { phi_lo: mid, ..*self },
            ]
        }
    }

    /// Range of the linear functional `p ↦ p·g` over a box of span ≤ π.
    fn functional_range(&self, g: &Vec2) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut take = |x: f64| {
            lo = lo.min(x);
            hi = hi.max(x);
        };
        for phi in [self.phi_lo, self.phi_hi] {
            let e = crate::angle::unit(phi);
            take(self.r_lo * e.dot(g));
            take(self.r_hi * e.dot(g));
        }
        let gn = g.norm();
        let ga = polar_angle(g);
        if self.contains_angle(ga) {
            take(self.r_hi * gn);
            take(self.r_lo * gn);
        }
        if self.contains_angle(ga + PI) {
            take(-self.r_hi * gn);
            take(-self.r_lo * gn);
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_shortest(basis: &Mat2, k: i64) -> f64 {
        let mut best = f64::INFINITY;
        for i in -k..=k {
            for j in -k..=k {
                if i == 0 && j == 0 {
                    continue;
                }
                let p = basis * Vec2::new(i as f64, j as f64);
                best = best.min(p.norm());
            }
        }
        best
    }

    #[test]
    fn identity_is_reduced() {
        assert_eq!(reduce_basis(&Mat2::identity()).unwrap(), Mat2::identity());
    }

    #[test]
    fn reduction_examples() {
        let b = Mat2::new(2.0, 1.0, 0.0, 2.0);
        let r = reduce_basis(&b).unwrap();
        assert!((r.column(0).norm() - brute_shortest(&b, 3)).abs() < 1e-12);
        assert!((r.column(0).norm() - 2.0).abs() < 1e-12);
        let b = Mat2::new(1.0, 100.0, 0.0, 1.0);
        let r = reduce_basis(&b).unwrap();
        assert!((r.column(0).norm() - 1.0).abs() < 1e-12);
        assert!((r.column(1).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_basis_rejected() {
        let b = Mat2::new(1.0, 2.0, 1.0, 2.0);
        assert_eq!(reduce_basis(&b), Err(Error::DegenerateLattice));
        assert!(Lattice::new(Mat2::zeros()).is_err());
    }

    #[test]
    fn shortest_vectors() {
        assert_eq!(Lattice::integer().shortest_vector(), Vec2::new(1.0, 0.0));
        let l = Lattice::new(Mat2::new(2.0, 0.0, 0.0, 3.0)).unwrap();
        assert!((l.shortest_len() - 2.0).abs() < 1e-15);
        let l = Lattice::from_columns([2.0, 0.0], [1.0, 2.0]).unwrap();
        assert!((l.shortest_len() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dual_examples() {
        let z = Lattice::integer();
        assert_eq!(z.dual().basis(), &Mat2::identity());
        let l = Lattice::new(Mat2::new(2.0, 0.0, 0.0, 0.5)).unwrap();
        assert_eq!(l.dual().basis(), &Mat2::new(0.5, 0.0, 0.0, 2.0));
        assert!((l.dual().density() - l.det_abs()).abs() < 1e-15);
    }

    #[test]
    fn disk_counts() {
        let z = Lattice::integer();
        assert_eq!(z.points_in_disk(&Vec2::zeros(), 1.5).unwrap().len(), 9);
        assert_eq!(z.points_in_disk(&Vec2::zeros(), 0.5).unwrap(), vec![Vec2::zeros()]);
        assert!(z.points_in_disk(&Vec2::new(0.5, 0.25), 0.0).unwrap().is_empty());
        assert!(z.points_in_disk(&Vec2::zeros(), -1.0).is_err());
    }

    #[test]
    fn disk_budget() {
        let z = Lattice::integer().with_enumeration_cap(100);
        assert_eq!(
            z.points_in_disk(&Vec2::zeros(), 20.0),
            Err(Error::EnumerationBudget { cap: 100 })
        );
    }

    #[test]
    fn polar_box_examples() {
        let z = Lattice::integer();
        let b = PolarBox::new(0.9, 1.1, -0.1, 0.1).unwrap();
        assert!(z.points_in_polar_box(&b).unwrap().contains(&Vec2::new(1.0, 0.0)));
        let b = PolarBox::new(1.1, 1.3, 0.05, 0.35).unwrap();
        assert!(z.points_in_polar_box(&b).unwrap().is_empty());
        let b = PolarBox::annulus(0.9, 1.1).unwrap();
        let pts = z.points_in_polar_box(&b).unwrap();
        assert_eq!(
            pts,
            vec![
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
                Vec2::new(-1.0, 0.0),
                Vec2::new(0.0, -1.0)
            ]
        );
    }

    #[test]
    fn deep_hole_of_z2() {
        let h = Lattice::integer().deep_hole();
        assert!((Lattice::integer().dist_to_lattice(&h) - 0.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn dist_examples() {
        let z = Lattice::integer();
        assert!((z.dist_to_lattice(&Vec2::new(0.5, 0.5)) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(z.dist_to_lattice(&Vec2::new(1.0, 0.0)), 0.0);
        let l = Lattice::from_columns([2.0, 0.0], [1.0, 2.0]).unwrap();
        assert!((l.dist_to_lattice(&Vec2::new(1.0, 1.0)) - 1.0).abs() < 1e-12);
    }
}
