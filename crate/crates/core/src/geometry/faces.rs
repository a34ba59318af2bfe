//! Face combinatorics of polytopes: the `ch` operator and its iterate.
//!
//! For `x, xi` on the boundary, `x ∈ ch(xi)` means the segment `[x, xi]` lies
//! in the boundary. On a polytope that happens exactly when some facet
//! contains both points. `ch(ch(xi))` asks for an intermediate boundary point
//! `eta` with `eta ∈ ch(xi)` and `x ∈ ch(eta)`; such an `eta` exists exactly
//! when a facet through `x` and a facet through `xi` intersect.

use serde::{Deserialize, Serialize};

use super::body::{ConvexBody, Location, Shape};
use super::{lp, GeometryError, Vector};

/// Sample count for the segment test on non-polytopal bodies.
pub const DEFAULT_CH_SAMPLES: usize = 64;

/// Sorted facet indices of an H-polytope.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceSet {
    pub facet_indices: Vec<usize>,
}

impl FaceSet {
    pub fn contains(&self, i: usize) -> bool {
        self.facet_indices.binary_search(&i).is_ok()
    }

    pub fn intersects(&self, other: &FaceSet) -> bool {
        self.facet_indices.iter().any(|i| other.contains(*i))
    }
}

impl ConvexBody {
    /// Facets containing the boundary point `p`:
    /// `|a_i p - b_i| <= face_tol (1 + |b_i|)`.
    pub fn active_facets(&self, p: &Vector, face_tol: f64) -> Result<FaceSet, GeometryError> {
        self.check_dim(p)?;
        let Shape::Polytope { b, .. } = self.shape() else {
            return Err(GeometryError::NotPolytope);
        };
        let s = self.slacks(p).expect("polytope");
        let mut facet_indices = Vec::new();
        for i in 0..s.len() {
            let t = face_tol * (1.0 + b[i].abs());
            if s[i] < -t {
                return Err(GeometryError::NotOnBoundary);
            }
            if s[i] <= t {
                facet_indices.push(i);
            }
        }
        if facet_indices.is_empty() {
            return Err(GeometryError::NotOnBoundary);
        }
        Ok(FaceSet { facet_indices })
    }

    /// `x ∈ ch(xi)` on a polytope: the two points share a facet.
    pub fn in_ch(&self, x: &Vector, xi: &Vector, face_tol: f64) -> Result<bool, GeometryError> {
        let fx = self.active_facets(x, face_tol)?;
        let fxi = self.active_facets(xi, face_tol)?;
        Ok(fx.intersects(&fxi))
    }

    /// `x ∈ ch(ch(xi))` on a polytope: some facet through `x` meets some facet
    /// through `xi` inside the closed body.
    pub fn ch_of_ch_membership(&self, x: &Vector, xi: &Vector, face_tol: f64) -> Result<bool, GeometryError> {
        let fx = self.active_facets(x, face_tol)?;
        let fxi = self.active_facets(xi, face_tol)?;
        if fx.intersects(&fxi) {
            return Ok(true);
        }
        let Shape::Polytope { a, b } = self.shape() else {
            return Err(GeometryError::NotPolytope);
        };
        for &i in &fx.facet_indices {
            for &j in &fxi.facet_indices {
                if lp::faces_intersect(a, b, &[i, j], face_tol) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Whether `[x, y]` lies in the boundary. Exact shared-facet test on
    /// polytopes; on quadrics, every sample `s x + (1 - s) y` with
    /// `s = k / samples` must classify as boundary.
    pub fn segment_on_boundary(&self, x: &Vector, y: &Vector, samples: usize) -> Result<bool, GeometryError> {
        if self.classify(x)? != Location::Boundary || self.classify(y)? != Location::Boundary {
            return Err(GeometryError::NotOnBoundary);
        }
        if self.is_polytope() {
            return self.in_ch(x, y, super::DEFAULT_FACE_TOL);
        }
        let samples = samples.max(1);
        for k in 0..=samples {
            let s = k as f64 / samples as f64;
            let p = x * s + y * (1.0 - s);
            if self.classify(&p)? != Location::Boundary {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `ch(xi)` membership for any body: the polytope test where available,
    /// the sampled segment test otherwise.
    pub fn in_ch_any(&self, x: &Vector, xi: &Vector, face_tol: f64) -> Result<bool, GeometryError> {
        if self.is_polytope() {
            self.in_ch(x, xi, face_tol)
        } else {
            self.segment_on_boundary(x, xi, DEFAULT_CH_SAMPLES)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{vector, DEFAULT_FACE_TOL as TOL};
    use super::*;
    use nalgebra::DMatrix;

    const RIGHT: usize = 0;
    const LEFT: usize = 1;
    const TOP: usize = 2;
    const BOTTOM: usize = 3;

    fn square() -> ConvexBody {
        ConvexBody::cube(2).unwrap()
    }

    #[test]
    fn active_facets_square() {
        let sq = square();
        assert_eq!(sq.active_facets(&vector(&[1.0, 0.0]), TOL).unwrap().facet_indices, vec![RIGHT]);
        assert_eq!(sq.active_facets(&vector(&[1.0, 1.0]), TOL).unwrap().facet_indices, vec![RIGHT, TOP]);
        assert_eq!(sq.active_facets(&vector(&[0.0, 0.0]), TOL).unwrap_err(), GeometryError::NotOnBoundary);
        let _ = (LEFT, BOTTOM);
    }

    #[test]
    fn active_facets_simplex_hypotenuse() {
        let s = ConvexBody::simplex(2).unwrap();
        assert_eq!(s.active_facets(&vector(&[0.5, 0.5]), TOL).unwrap().facet_indices, vec![2]);
    }

    #[test]
    fn in_ch_square() {
        let sq = square();
        assert!(sq.in_ch(&vector(&[1.0, 0.5]), &vector(&[1.0, 0.0]), TOL).unwrap());
        assert!(!sq.in_ch(&vector(&[-1.0, 0.0]), &vector(&[1.0, 0.0]), TOL).unwrap());
        let x = vector(&[0.3, -1.0]);
        assert!(sq.in_ch(&x, &x, TOL).unwrap());
    }

    #[test]
    fn ch_of_ch_square() {
        let sq = square();
        let xi = vector(&[1.0, 0.0]);
        assert!(sq.ch_of_ch_membership(&vector(&[0.0, 1.0]), &xi, TOL).unwrap());
        assert!(!sq.ch_of_ch_membership(&vector(&[-1.0, 0.5]), &xi, TOL).unwrap());
        assert!(sq.ch_of_ch_membership(&xi, &xi, TOL).unwrap());
        assert!(sq.ch_of_ch_membership(&vector(&[-1.0, 1.0]), &xi, TOL).unwrap());
    }

    #[test]
    fn segment_on_boundary_cases() {
        let sq = square();
        assert!(sq.segment_on_boundary(&vector(&[1.0, -1.0]), &vector(&[1.0, 1.0]), 64).unwrap());
        assert!(!sq.segment_on_boundary(&vector(&[1.0, 0.0]), &vector(&[-1.0, 0.0]), 64).unwrap());
        let e = ConvexBody::ellipsoid(vector(&[0.0, 0.0]), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]))
            .unwrap();
        let x = vector(&[1.0, 0.0]);
        let y = vector(&[0.0, 0.5]);
        assert!(!e.segment_on_boundary(&x, &y, 64).unwrap());
        assert!(e.segment_on_boundary(&x, &x, 64).unwrap());
        assert_eq!(e.segment_on_boundary(&x, &vector(&[0.0, 0.0]), 64).unwrap_err(), GeometryError::NotOnBoundary);
    }
}
