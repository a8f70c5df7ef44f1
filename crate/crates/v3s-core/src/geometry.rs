//! Projective transformations determined by four point correspondences.
//!
//! A homography is stored as the eight coefficients `m0..m7` of the 3x3
//! matrix whose last entry is fixed at 1. Solving for the coefficients
//! sets up one 8x8 linear system from the four corner correspondences and
//! runs Gaussian elimination with partial pivoting.

use crate::error::{Error, Result};

/// Pivots and determinants with magnitude below this are treated as degenerate.
pub const DEGENERACY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Four corners in fixed order: top-left, bottom-left, bottom-right, top-right.
///
/// Every caller in the crate relies on this ordering; a frame rectangle is
/// `(0,0), (0,H), (W,H), (W,0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub corners: [Point2; 4],
}

impl Quad {
    pub const fn new(corners: [Point2; 4]) -> Self {
        Quad { corners }
    }

    /// The axis-aligned rectangle spanning `[0,width] x [0,height]`.
    pub fn rect(width: f64, height: f64) -> Self {
        Quad::new([
            Point2::new(0.0, 0.0),
            Point2::new(0.0, height),
            Point2::new(width, height),
            Point2::new(width, 0.0),
        ])
    }

    /// Axis-aligned bounding box as (max_x, max_y); min is clamped at 0.
    pub fn upper_bounds(&self) -> (f64, f64) {
        let mut mx = 0.0f64;
        let mut my = 0.0f64;
        for c in &self.corners {
            mx = mx.max(c.x);
            my = my.max(c.y);
        }
        (mx, my)
    }
}

/// Plane projective map; `m` holds `m0..m7`, the ninth matrix entry is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: [f64; 8],
}

impl Homography {
    pub const IDENTITY: Homography = Homography {
        m: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    };

    /// Builds from raw coefficients, rejecting non-finite or singular maps.
    pub fn from_coefficients(m: [f64; 8]) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem);
        }
        let h = Homography { m };
        if h.det3().abs() < DEGENERACY_EPS {
            return Err(Error::SingularSystem);
        }
        Ok(h)
    }

    /// Axis-aligned scaling by `(a, b)`.
    pub fn scale(a: f64, b: f64) -> Self {
        Homography {
            m: [a, 0.0, 0.0, 0.0, b, 0.0, 0.0, 0.0],
        }
    }

    pub fn coefficients(&self) -> [f64; 8] {
        self.m
    }

    /// Determinant of the implied 3x3 matrix.
    fn det3(&self) -> f64 {
        let m = &self.m;
        m[0] * (m[4] - m[5] * m[7]) - m[1] * (m[3] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6])
    }

    /// Maps `(x, y)` to `(u, v)` through the two rational forms
    /// `u = (m0*x + m1*y + m2) / (m6*x + m7*y + 1)` and
    /// `v = (m3*x + m4*y + m5) / (m6*x + m7*y + 1)`.
    pub fn map_point(&self, p: Point2) -> Result<Point2> {
        let m = &self.m;
        let den = m[6] * p.x + m[7] * p.y + 1.0;
        if den.abs() < DEGENERACY_EPS {
            return Err(Error::DegenerateDenominator { x: p.x, y: p.y });
        }
        Ok(Point2::new(
            (m[0] * p.x + m[1] * p.y + m[2]) / den,
            (m[3] * p.x + m[4] * p.y + m[5]) / den,
        ))
    }

    /// Inverse map, renormalized so the last matrix entry is 1 again.
    pub fn invert(&self) -> Result<Homography> {
        let m = &self.m;
        let det = self.det3();
        if det.abs() < DEGENERACY_EPS {
            return Err(Error::SingularSystem);
        }
        // Adjugate of [m0 m1 m2; m3 m4 m5; m6 m7 1].
        let adj = [
            m[4] - m[5] * m[7],
            m[2] * m[7] - m[1],
            m[1] * m[5] - m[2] * m[4],
            m[5] * m[6] - m[3],
            m[0] - m[2] * m[6],
            m[2] * m[3] - m[0] * m[5],
            m[3] * m[7] - m[4] * m[6],
            m[1] * m[6] - m[0] * m[7],
            m[0] * m[4] - m[1] * m[3],
        ];
        let last = adj[8];
        if last.abs() < DEGENERACY_EPS {
            return Err(Error::SingularSystem);
        }
        let mut out = [0.0f64; 8];
        for (o, a) in out.iter_mut().zip(adj.iter()) {
            *o = a / last;
        }
        Ok(Homography { m: out })
    }
}

/// Solves for the homography sending each `src` corner to the matching `dst`
/// corner.
///
/// The 8x8 system has, for each correspondence i, the row pair
/// `[x y 1 0 0 0 -x*u -y*u] = u` and `[0 0 0 x y 1 -x*v -y*v] = v`,
/// u-rows first. Degenerate correspondences (repeated or collinear corners)
/// surface as a small pivot.
pub fn solve_homography(src: &Quad, dst: &Quad) -> Result<Homography> {
    let mut a = [[0.0f64; 9]; 8];
    for i in 0..4 {
        let (x, y) = (src.corners[i].x, src.corners[i].y);
        let (u, v) = (dst.corners[i].x, dst.corners[i].y);
        a[i] = [x, y, 1.0, 0.0, 0.0, 0.0, -x * u, -y * u, u];
        a[i + 4] = [0.0, 0.0, 0.0, x, y, 1.0, -x * v, -y * v, v];
    }

    for col in 0..8 {
        let mut pivot = col;
        for row in col + 1..8 {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < DEGENERACY_EPS {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot);
        for row in col + 1..8 {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for c in col..9 {
                    a[row][c] -= factor * a[col][c];
                }
            }
        }
    }

    let mut m = [0.0f64; 8];
    for row in (0..8).rev() {
        let mut acc = a[row][8];
        for c in row + 1..8 {
            acc -= a[row][c] * m[c];
        }
        m[row] = acc / a[row][row];
    }
    Ok(Homography { m })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Quad {
        Quad::rect(1.0, 1.0)
    }

    #[test]
    fn identity_correspondence_yields_identity_map() {
        let h = solve_homography(&unit_square(), &unit_square()).unwrap();
        let expected = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        for (got, want) in h.coefficients().iter().zip(expected.iter()) {
            assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
        }
    }

    #[test]
    fn pure_scale_correspondence() {
        let src = Quad::rect(100.0, 100.0);
        let dst = Quad::new([
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 30.0),
            Point2::new(100.0, 30.0),
            Point2::new(100.0, 0.0),
        ]);
        let h = solve_homography(&src, &dst).unwrap();
        let m = h.coefficients();
        assert!((m[0] - 1.0).abs() < 1e-12);
        assert!((m[4] - 0.3).abs() < 1e-12);
        for idx in [1, 2, 3, 5, 6, 7] {
            assert!(m[idx].abs() < 1e-12, "m{idx} = {}", m[idx]);
        }
    }

    #[test]
    fn trapezoid_solution_matches_least_squares_oracle() {
        use nalgebra::{DMatrix, DVector};

        // Right-side trapezoid with c = 0.5 on the unit square.
        let src = unit_square();
        let dst = Quad::new([
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 0.75),
            Point2::new(1.0, 0.25),
        ]);
        let h = solve_homography(&src, &dst).unwrap();
        assert!(
            h.coefficients()[6].abs() > 1e-6,
            "expected genuine perspective (m6 != 0)"
        );

        let mut rows = Vec::with_capacity(72);
        let mut rhs = Vec::with_capacity(8);
        for i in 0..4 {
            let (x, y) = (src.corners[i].x, src.corners[i].y);
            let u = dst.corners[i].x;
            rows.extend_from_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -x * u, -y * u]);
            rhs.push(u);
        }
        for i in 0..4 {
            let (x, y) = (src.corners[i].x, src.corners[i].y);
            let v = dst.corners[i].y;
            rows.extend_from_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -x * v, -y * v]);
            rhs.push(v);
        }
        let a = DMatrix::from_row_slice(8, 8, &rows);
        let b = DVector::from_vec(rhs);
        let solved = a.svd(true, true).solve(&b, 1e-14).unwrap();
        for (i, (got, want)) in h.coefficients().iter().zip(solved.iter()).enumerate() {
            assert!(
                (got - want).abs() < 1e-9,
                "m{i}: elimination {got} vs least-squares {want}"
            );
        }

        // Round-trip the corners too.
        for i in 0..4 {
            let mapped = h.map_point(src.corners[i]).unwrap();
            assert!((mapped.x - dst.corners[i].x).abs() < 1e-9);
            assert!((mapped.y - dst.corners[i].y).abs() < 1e-9);
        }
    }

    #[test]
    fn map_point_identity() {
        let p = Homography::IDENTITY
            .map_point(Point2::new(13.5, 2.0))
            .unwrap();
        assert_eq!(p, Point2::new(13.5, 2.0));
    }

    #[test]
    fn map_point_pure_scale() {
        let h = Homography::scale(1.0, 0.3);
        let p = h.map_point(Point2::new(100.0, 100.0)).unwrap();
        assert!((p.x - 100.0).abs() < 1e-12);
        assert!((p.y - 30.0).abs() < 1e-12);
    }

    #[test]
    fn map_point_matches_direct_formula_evaluation() {
        let src = unit_square();
        let dst = Quad::new([
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 0.75),
            Point2::new(1.0, 0.25),
        ]);
        let h = solve_homography(&src, &dst).unwrap();
        let m = h.coefficients();
        let (x, y) = (0.5, 0.5);
        let den = m[6] * x + m[7] * y + 1.0;
        let u = (m[0] * x + m[1] * y + m[2]) / den;
        let v = (m[3] * x + m[4] * y + m[5]) / den;
        let p = h.map_point(Point2::new(x, y)).unwrap();
        assert!((p.x - u).abs() < 1e-15);
        assert!((p.y - v).abs() < 1e-15);
    }

    #[test]
    fn map_point_degenerate_denominator() {
        let h = Homography::from_coefficients([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0]).unwrap();
        let err = h.map_point(Point2::new(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateDenominator { .. }));
    }

    #[test]
    fn invert_identity_and_pure_scale() {
        let inv = Homography::IDENTITY.invert().unwrap();
        assert_eq!(inv.coefficients(), Homography::IDENTITY.coefficients());

        let inv = Homography::scale(2.0, 0.5).invert().unwrap();
        let m = inv.coefficients();
        assert!((m[0] - 0.5).abs() < 1e-12);
        assert!((m[4] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn solve_rejects_degenerate_correspondence() {
        let mut dst = unit_square();
        dst.corners[2] = dst.corners[1]; // repeated corner
        let err = solve_homography(&unit_square(), &dst).unwrap_err();
        assert!(matches!(err, Error::SingularSystem));
    }

    #[test]
    fn solve_is_bit_deterministic() {
        let src = Quad::rect(64.0, 48.0);
        let dst = Quad::new([
            Point2::new(1.0, 2.0),
            Point2::new(-0.5, 47.0),
            Point2::new(66.0, 50.0),
            Point2::new(63.0, -1.0),
        ]);
        let a = solve_homography(&src, &dst).unwrap();
        let b = solve_homography(&src, &dst).unwrap();
        for (x, y) in a.coefficients().iter().zip(b.coefficients().iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Jittered rectangle corners: always convex, never close to degenerate.
        fn arb_quad() -> impl Strategy<Value = Quad> {
            (
                20.0f64..200.0,
                20.0f64..200.0,
                proptest::array::uniform8(-0.15f64..0.15),
            )
                .prop_map(|(w, h, jitter)| {
                    let base = Quad::rect(w, h);
                    let mut corners = base.corners;
                    for (i, c) in corners.iter_mut().enumerate() {
                        c.x += jitter[2 * i] * w;
                        c.y += jitter[2 * i + 1] * h;
                    }
                    Quad::new(corners)
                })
        }

        proptest! {
            #[test]
            fn corners_reproduced_after_solve(src in arb_quad(), dst in arb_quad()) {
                let h = solve_homography(&src, &dst).unwrap();
                for i in 0..4 {
                    let mapped = h.map_point(src.corners[i]).unwrap();
                    prop_assert!((mapped.x - dst.corners[i].x).abs() < 1e-9);
                    prop_assert!((mapped.y - dst.corners[i].y).abs() < 1e-9);
                }
            }

            #[test]
            fn invert_round_trips_a_grid(dst in arb_quad()) {
                let src = Quad::rect(100.0, 100.0);
                let h = solve_homography(&src, &dst).unwrap();
                let inv = h.invert().unwrap();
                for gy in 0..10 {
                    for gx in 0..10 {
                        let p = Point2::new(gx as f64 * 100.0 / 9.0, gy as f64 * 100.0 / 9.0);
                        let q = h.map_point(p).unwrap();
                        let back = inv.map_point(q).unwrap();
                        prop_assert!((back.x - p.x).abs() < 1e-6);
                        prop_assert!((back.y - p.y).abs() < 1e-6);
                    }
                }
            }

            #[test]
            fn axis_aligned_destinations_are_affine(
                w in 20.0f64..200.0,
                h in 20.0f64..200.0,
                a in 0.2f64..3.0,
                b in 0.2f64..3.0,
            ) {
                let src = Quad::rect(w, h);
                let dst = Quad::rect(a * w, b * h);
                let solved = solve_homography(&src, &dst).unwrap();
                let m = solved.coefficients();
                prop_assert!(m[6].abs() <= 1e-9);
                prop_assert!(m[7].abs() <= 1e-9);
            }
        }
    }
}
