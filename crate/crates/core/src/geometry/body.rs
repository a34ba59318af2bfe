use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_finite, lp, GeometryError, Vector};

/// Relative tolerance for boundary classification.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-10;
/// Relative tolerance for deciding which facets contain a boundary point.
pub const DEFAULT_FACE_TOL: f64 = 1e-8;

const COINCIDENT_TOL: f64 = 1e-12;
const MAX_VERTEX_SUBSETS: usize = 200_000;
const MAX_REJECTION_TRIES: usize = 10_000_000;

/// Serializable description of a body, as read from a body description file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BodyDescriptor {
    Hpolytope { a: Vec<Vec<f64>>, b: Vec<f64> },
    Ellipsoid { center: Vec<f64>, shape: Vec<Vec<f64>> },
    Ball { center: Vec<f64>, radius: f64 },
    Simplex {
        #[serde(alias = "dim")]
        dimension: usize,
    },
    Cube {
        #[serde(alias = "dim")]
        dimension: usize,
    },
    Interval { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// `{x : a x < b}` with unit-norm rows.
    Polytope { a: DMatrix<f64>, b: DVector<f64> },
    /// `{x : (x - center)^T shape (x - center) < 1}`.
    Quadric { center: Vector, shape: DMatrix<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Location {
    Interior,
    Boundary,
    Exterior,
}

/// Boundary chord through two interior points `x != y`:
/// `a = x + t_lo (y - x)`, `b = x + t_hi (y - x)`, `t_lo < 0 < 1 < t_hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Chord {
    pub a: Vector,
    pub b: Vector,
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Chord ratios `|x - a| / |y - x|` and `|y - b| / |y - x|`, each computed
/// from the slack at its own end point so that they keep full relative
/// precision close to the boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChordFactors {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diameter {
    pub value: f64,
    /// False when only an upper bound (bounding-box diagonal) is known.
    pub exact: bool,
}

/// A validated bounded convex domain with nonempty interior.
#[derive(Clone, Debug)]
pub struct ConvexBody {
    descriptor: BodyDescriptor,
    shape: Shape,
    boundary_tol: f64,
    center: Vector,
    inradius: f64,
    bbox_lo: Vector,
    bbox_hi: Vector,
}

fn rows_to_matrix(rows: &[Vec<f64>], ncols: Option<usize>) -> Result<DMatrix<f64>, GeometryError> {
    let m = rows.len();
    let n = ncols.or_else(|| rows.first().map(Vec::len)).unwrap_or(0);
    if m == 0 || n == 0 {
        return Err(GeometryError::InvalidBody("empty matrix".into()));
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(GeometryError::InvalidBody("ragged matrix rows".into()));
    }
    let data: Vec<f64> = rows.iter().flatten().copied().collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    Ok(DMatrix::from_row_slice(m, n, &data))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl ConvexBody {
    pub fn from_descriptor(desc: &BodyDescriptor) -> Result<Self, GeometryError> {
        match desc {
            BodyDescriptor::Hpolytope { a, b } => {
                let a = rows_to_matrix(a, None)?;
                if b.len() != a.nrows() {
                    return Err(GeometryError::DimensionMismatch { expected: a.nrows(), got: b.len() });
                }
                Self::hpolytope(a, DVector::from_column_slice(b))
            }
            BodyDescriptor::Ellipsoid { center, shape } => {
                let c = super::vector(center);
                let s = rows_to_matrix(shape, Some(center.len()))?;
                Self::ellipsoid(c, s)
            }
            BodyDescriptor::Ball { center, radius } => Self::ball(super::vector(center), *radius),
            BodyDescriptor::Simplex { dimension } => Self::simplex(*dimension),
            BodyDescriptor::Cube { dimension } => Self::cube(*dimension),
            BodyDescriptor::Interval { lo, hi } => Self::interval(*lo, *hi),
        }
    }

    /// `{x : a x < b}`. Rows are normalised to unit length; facet indices
    /// follow the row order of `a`.
    pub fn hpolytope(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self, GeometryError> {
        let descriptor = BodyDescriptor::Hpolytope { a: matrix_to_rows(&a), b: b.iter().copied().collect() };
        Self::polytope_with_descriptor(a, b, descriptor)
    }

    fn polytope_with_descriptor(
        a: DMatrix<f64>,
        b: DVector<f64>,
        descriptor: BodyDescriptor,
    ) -> Result<Self, GeometryError> {
        if a.nrows() != b.len() {
            return Err(GeometryError::DimensionMismatch { expected: a.nrows(), got: b.len() });
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut a = a;
        let mut b = b;
        for i in 0..a.nrows() {
            let norm = a.row(i).norm();
            if norm == 0.0 {
                return Err(GeometryError::InvalidBody(format!("facet row {i} is zero")));
            }
            a.row_mut(i).scale_mut(1.0 / norm);
            b[i] /= norm;
        }
        let n = a.ncols();
        let mut lo = DVector::zeros(n);
        let mut hi = DVector::zeros(n);
        for j in 0..n {
            let (l, h) = lp::coordinate_range(&a, &b, j)?;
            lo[j] = l;
            hi[j] = h;
        }
        let (center, radius) = lp::chebyshev_center(&a, &b)?;
        let scale = 1.0 + (&hi - &lo).amax();
        if radius <= 1e-12 * scale {
            return Err(GeometryError::EmptyInterior);
        }
        Ok(Self {
            descriptor,
            shape: Shape::Polytope { a, b },
            boundary_tol: DEFAULT_BOUNDARY_TOL,
            center,
            inradius: radius,
            bbox_lo: lo,
            bbox_hi: hi,
        })
    }

    /// `{x : (x - center)^T shape (x - center) < 1}` for symmetric positive
    /// definite `shape`.
    pub fn ellipsoid(center: Vector, shape: DMatrix<f64>) -> Result<Self, GeometryError> {
        let descriptor = BodyDescriptor::Ellipsoid {
            center: center.iter().copied().collect(),
            shape: matrix_to_rows(&shape),
        };
        Self::quadric_with_descriptor(center, shape, descriptor)
    }

    fn quadric_with_descriptor(
        center: Vector,
        shape: DMatrix<f64>,
        descriptor: BodyDescriptor,
    ) -> Result<Self, GeometryError> {
        let n = center.len();
        if n == 0 {
            return Err(GeometryError::InvalidBody("zero-dimensional ellipsoid".into()));
        }
        check_finite(&center)?;
        if shape.nrows() != n || shape.ncols() != n {
            return Err(GeometryError::DimensionMismatch { expected: n, got: shape.nrows() });
        }
        if shape.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let asym = (&shape - shape.transpose()).amax();
        if asym > 1e-12 * (1.0 + shape.amax()) {
            return Err(GeometryError::InvalidBody("shape matrix is not symmetric".into()));
        }
        let chol = shape
            .clone()
            .cholesky()
            .ok_or_else(|| GeometryError::InvalidBody("shape matrix is not positive definite".into()))?;
        let inv = chol.inverse();
        let half_widths = DVector::from_iterator(n, (0..n).map(|j| inv[(j, j)].sqrt()));
        let lambda_max = shape.clone().symmetric_eigenvalues().max();
        Ok(Self {
            descriptor,
            inradius: 1.0 / lambda_max.sqrt(),
            bbox_lo: &center - &half_widths,
            bbox_hi: &center + &half_widths,
            shape: Shape::Quadric { center: center.clone(), shape },
            boundary_tol: DEFAULT_BOUNDARY_TOL,
            center,
        })
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self, GeometryError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GeometryError::InvalidBody(format!("ball radius {radius}")));
        }
        let n = center.len();
        let descriptor = BodyDescriptor::Ball { center: center.iter().copied().collect(), radius };
        let shape = DMatrix::identity(n, n) / (radius * radius);
        Self::quadric_with_descriptor(center, shape, descriptor)
    }

    /// The open corner simplex `{x : x_i > 0, sum x_i < 1}`. Facet `i < n` is
    /// `x_i = 0`; facet `n` is `sum x_i = 1`.
    pub fn simplex(n: usize) -> Result<Self, GeometryError> {
        if n == 0 {
            return Err(GeometryError::InvalidBody("simplex dimension must be >= 1".into()));
        }
        let mut a = DMatrix::zeros(n + 1, n);
        for i in 0..n {
            a[(i, i)] = -1.0;
            a[(n, i)] = 1.0;
        }
        let mut b = DVector::zeros(n + 1);
        b[n] = 1.0;
        Self::polytope_with_descriptor(a, b, BodyDescriptor::Simplex { dimension: n })
    }

    /// The cube `(-1, 1)^n`. Facet `2j` is `x_j = 1`, facet `2j + 1` is
    /// `x_j = -1`; for the square that is right, left, top, bottom.
    pub fn cube(n: usize) -> Result<Self, GeometryError> {
        let mut a = DMatrix::zeros(2 * n, n);
        for j in 0..n {
            a[(2 * j, j)] = 1.0;
            a[(2 * j + 1, j)] = -1.0;
        }
        Self::hpolytope(a, DVector::from_element(2 * n, 1.0))
    }

    /// The open interval `(lo, hi)` as a one-dimensional polytope.
    pub fn interval(lo: f64, hi: f64) -> Result<Self, GeometryError> {
        Self::hpolytope(DMatrix::from_row_slice(2, 1, &[1.0, -1.0]), super::vector(&[hi, -lo]))
    }

    pub fn with_boundary_tol(mut self, tol: f64) -> Self {
        self.boundary_tol = tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn descriptor(&self) -> &BodyDescriptor {
        &self.descriptor
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn boundary_tol(&self) -> f64 {
        self.boundary_tol
    }

    pub fn is_polytope(&self) -> bool {
        matches!(self.shape, Shape::Polytope { .. })
    }

    /// A deep interior point (Chebyshev center for polytopes).
    pub fn interior_point(&self) -> &Vector {
        &self.center
    }

    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    pub fn bounding_box(&self) -> (&Vector, &Vector) {
        (&self.bbox_lo, &self.bbox_hi)
    }

    pub(crate) fn check_dim(&self, x: &Vector) -> Result<(), GeometryError> {
        if x.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        check_finite(x)
    }

    /// Signed facet slacks `b_i - a_i x` (Euclidean distances to the facet
    /// hyperplanes, positive inside). `None` for quadrics.
    pub fn slacks(&self, x: &Vector) -> Option<DVector<f64>> {
        match &self.shape {
            Shape::Polytope { a, b } => Some(b - a * x),
            Shape::Quadric { .. } => None,
        }
    }

    fn quadratic_form(&self, x: &Vector) -> f64 {
        match &self.shape {
            Shape::Quadric { center, shape } => {
                let d = x - center;
                d.dot(&(shape * &d))
            }
            Shape::Polytope { .. } => unreachable!("quadratic form of a polytope"),
        }
    }

    pub fn classify(&self, x: &Vector) -> Result<Location, GeometryError> {
        self.check_dim(x)?;
        let tol = self.boundary_tol;
        Ok(match &self.shape {
            Shape::Polytope { b, .. } => {
                let s = self.slacks(x).expect("polytope");
                let mut on_boundary = false;
                for (si, bi) in s.iter().zip(b.iter()) {
                    let t = tol * (1.0 + bi.abs());
                    if *si < -t {
                        return Ok(Location::Exterior);
                    }
                    if *si <= t {
                        on_boundary = true;
                    }
                }
                if on_boundary {
                    Location::Boundary
                } else {
                    Location::Interior
                }
            }
            Shape::Quadric { .. } => {
                let rho = self.quadratic_form(x).sqrt();
                if rho > 1.0 + tol {
                    Location::Exterior
                } else if rho >= 1.0 - tol {
                    Location::Boundary
                } else {
                    Location::Interior
                }
            }
        })
    }

    /// Strictly inside the open body, with no tolerance. Points closer to the
    /// boundary than `boundary_tol` still qualify.
    pub fn contains_open(&self, x: &Vector) -> Result<bool, GeometryError> {
        self.check_dim(x)?;
        Ok(match &self.shape {
            Shape::Polytope { .. } => self.slacks(x).expect("polytope").iter().all(|s| *s > 0.0),
            Shape::Quadric { .. } => self.quadratic_form(x) < 1.0,
        })
    }

    /// Chord ratios for two points of the open body. Used by the Hilbert
    /// metric; no tolerance is applied to the interior test.
    pub fn chord_factors(&self, x: &Vector, y: &Vector) -> Result<ChordFactors, GeometryError> {
        if !self.contains_open(x)? || !self.contains_open(y)? {
            return Err(GeometryError::NotInterior);
        }
        let u = y - x;
        let len = u.norm();
        if len <= COINCIDENT_TOL {
            return Err(GeometryError::CoincidentPoints(COINCIDENT_TOL));
        }
        match &self.shape {
            Shape::Polytope { a, b } => {
                let au = a * &u;
                let sx = b - a * x;
                let sy = b - a * y;
                let mut alpha = f64::INFINITY;
                let mut beta = f64::INFINITY;
                for i in 0..au.len() {
                    if au[i] > 0.0 {
                        beta = beta.min(sy[i] / au[i]);
                    } else if au[i] < 0.0 {
                        alpha = alpha.min(sx[i] / -au[i]);
                    }
                }
                if !alpha.is_finite() || !beta.is_finite() {
                    return Err(GeometryError::Internal("no facet bounds the line".into()));
                }
                Ok(ChordFactors { alpha, beta })
            }
            Shape::Quadric { center, shape } => {
                let w = shape * &u;
                let quad = u.dot(&w);
                let beta = positive_root(quad, w.dot(&(y - center)), self.quadratic_form(y) - 1.0);
                let alpha = positive_root(quad, -w.dot(&(x - center)), self.quadratic_form(x) - 1.0);
                Ok(ChordFactors { alpha, beta })
            }
        }
    }

    /// Boundary endpoints of the line through interior points `x` and `y`.
    pub fn chord_endpoints(&self, x: &Vector, y: &Vector) -> Result<Chord, GeometryError> {
        if self.classify(x)? != Location::Interior || self.classify(y)? != Location::Interior {
            return Err(GeometryError::NotInterior);
        }
        let f = self.chord_factors(x, y)?;
        let u = y - x;
        let t_lo = -f.alpha;
        let t_hi = 1.0 + f.beta;
        Ok(Chord { a: x + &u * t_lo, b: x + &u * t_hi, t_lo, t_hi })
    }

    /// Largest `t` with `p + t d` in the closed body, for `p` in the open body.
    pub fn ray_exit(&self, p: &Vector, d: &Vector) -> Result<f64, GeometryError> {
        self.check_dim(p)?;
        self.check_dim(d)?;
        match &self.shape {
            Shape::Polytope { a, .. } => {
                let ad = a * d;
                let s = self.slacks(p).expect("polytope");
                let t = (0..ad.len())
                    .filter(|&i| ad[i] > 0.0)
                    .map(|i| s[i] / ad[i])
                    .fold(f64::INFINITY, f64::min);
                if t.is_finite() {
                    Ok(t.max(0.0))
                } else {
                    Err(GeometryError::Internal("ray does not leave the body".into()))
                }
            }
            Shape::Quadric { center, shape } => {
                let w = shape * d;
                let quad = d.dot(&w);
                if quad <= 0.0 {
                    return Err(GeometryError::Internal("zero direction".into()));
                }
                Ok(positive_root(quad, w.dot(&(p - center)), self.quadratic_form(p) - 1.0))
            }
        }
    }

    /// Norm diameter; exact for quadrics and for polytopes small enough for
    /// vertex enumeration, otherwise the bounding-box diagonal.
    pub fn diameter(&self) -> Diameter {
        match &self.shape {
            Shape::Quadric { shape, .. } => {
                let lambda_min = shape.clone().symmetric_eigenvalues().min();
                Diameter { value: 2.0 / lambda_min.sqrt(), exact: true }
            }
            Shape::Polytope { .. } => match self.vertices() {
                Some(v) => {
                    let mut best = 0.0f64;
                    for (p, q) in v.iter().tuple_combinations() {
                        best = best.max((p - q).norm());
                    }
                    Diameter { value: best, exact: true }
                }
                None => Diameter { value: (&self.bbox_hi - &self.bbox_lo).norm(), exact: false },
            },
        }
    }

    /// Vertices of a polytope by enumerating `n`-subsets of facets. `None`
    /// for quadrics or when there are too many subsets.
    pub fn vertices(&self) -> Option<Vec<Vector>> {
        let Shape::Polytope { a, b } = &self.shape else {
            return None;
        };
        let (m, n) = (a.nrows(), a.ncols());
        if binomial(m, n) > MAX_VERTEX_SUBSETS {
            return None;
        }
        let mut out: Vec<Vector> = Vec::new();
        for subset in (0..m).combinations(n) {
            let sub_a = DMatrix::from_fn(n, n, |i, j| a[(subset[i], j)]);
            let sub_b = DVector::from_fn(n, |i, _| b[subset[i]]);
            let Some(v) = sub_a.lu().solve(&sub_b) else { continue };
            let s = b - a * &v;
            let feasible = s.iter().zip(b.iter()).all(|(si, bi)| *si >= -1e-9 * (1.0 + bi.abs()));
            if feasible && !out.iter().any(|w| (w - &v).norm() <= 1e-9) {
                out.push(v);
            }
        }
        Some(out)
    }

    /// Uniform point of the interior by rejection from the bounding box,
    /// reproducible from `seed`.
    pub fn sample_interior(&self, seed: u64) -> Vector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_interior_with(&mut rng)
    }

    pub fn sample_interior_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let n = self.dim();
        for _ in 0..MAX_REJECTION_TRIES {
            let x = DVector::from_fn(n, |j, _| {
                let u: f64 = rng.random();
                self.bbox_lo[j] + u * (self.bbox_hi[j] - self.bbox_lo[j])
            });
            if matches!(self.classify(&x), Ok(Location::Interior)) {
                return x;
            }
        }
        // Rejection never failing this often for a validated desk-scale body.
        self.center.clone()
    }

    /// Boundary point hit by a uniformly random direction from the interior
    /// point.
    pub fn sample_boundary_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let d = random_direction(self.dim(), rng);
        let t = self.ray_exit(&self.center, &d).expect("validated body");
        &self.center + d * t
    }

    /// Closest point of the boundary, snapping to the lowest-dimensional face
    /// whose facets are within `snap_tol` (relative) of `x`.
    pub fn nearest_boundary_point(&self, x: &Vector, snap_tol: f64) -> Result<Vector, GeometryError> {
        self.check_dim(x)?;
        match &self.shape {
            Shape::Quadric { center, .. } => {
                let q = self.quadratic_form(x);
                if q <= 0.0 {
                    let d = DVector::from_fn(self.dim(), |j, _| if j == 0 { 1.0 } else { 0.0 });
                    let t = self.ray_exit(center, &d)?;
                    return Ok(center + d * t);
                }
                Ok(center + (x - center) / q.sqrt())
            }
            Shape::Polytope { a, b } => {
                let s = b - a * x;
                let mut active: Vec<usize> =
                    (0..s.len()).filter(|&i| s[i] <= snap_tol * (1.0 + b[i].abs())).collect();
                let argmin = (0..s.len()).min_by(|&i, &j| s[i].total_cmp(&s[j])).expect("nonempty");
                if active.is_empty() {
                    active.push(argmin);
                }
                let project = |rows: &[usize]| -> Option<Vector> {
                    let sub_a = DMatrix::from_fn(rows.len(), self.dim(), |i, j| a[(rows[i], j)]);
                    let resid = DVector::from_fn(rows.len(), |i, _| -s[rows[i]]);
                    let gram = &sub_a * sub_a.transpose();
                    let pinv = gram.pseudo_inverse(1e-12).ok()?;
                    Some(x - sub_a.transpose() * (pinv * resid))
                };
                if let Some(p) = project(&active) {
                    if self.classify(&p)? == Location::Boundary {
                        return Ok(p);
                    }
                }
                project(&[argmin]).ok_or_else(|| GeometryError::Internal("facet projection failed".into()))
            }
        }
    }

    /// Boundary points obtained by projecting a `per_axis` grid on the
    /// bounding-box surface radially from the interior point.
    pub fn boundary_grid(&self, per_axis: usize) -> Vec<Vector> {
        let n = self.dim();
        let per_axis = per_axis.max(2);
        let mut out = Vec::new();
        for j in 0..n {
            for side in [self.bbox_lo[j], self.bbox_hi[j]] {
                let others: Vec<usize> = (0..n).filter(|&k| k != j).collect();
                let total = per_axis.pow(others.len() as u32);
                for idx in 0..total {
                    let mut p = DVector::zeros(n);
                    p[j] = side;
                    let mut rem = idx;
                    for &k in &others {
                        let step = rem % per_axis;
                        rem /= per_axis;
                        let frac = step as f64 / (per_axis - 1) as f64;
                        p[k] = self.bbox_lo[k] + frac * (self.bbox_hi[k] - self.bbox_lo[k]);
                    }
                    let d = &p - &self.center;
                    if d.norm() == 0.0 {
                        continue;
                    }
                    if let Ok(t) = self.ray_exit(&self.center, &d) {
                        out.push(&self.center + d * t);
                    }
                }
            }
        }
        out
    }

    /// Interior points of a `per_axis`-cell grid over the bounding box (cell
    /// centers).
    pub fn interior_grid(&self, per_axis: usize) -> Vec<Vector> {
        let n = self.dim();
        let per_axis = per_axis.max(1);
        let total = per_axis.pow(n as u32);
        (0..total)
            .filter_map(|idx| {
                let mut rem = idx;
                let p = DVector::from_fn(n, |k, _| {
                    let step = rem % per_axis;
                    rem /= per_axis;
                    let frac = (step as f64 + 0.5) / per_axis as f64;
                    self.bbox_lo[k] + frac * (self.bbox_hi[k] - self.bbox_lo[k])
                });
                matches!(self.classify(&p), Ok(Location::Interior)).then_some(p)
            })
            .collect()
    }
}

/// Positive root of `q s^2 + 2 h s + g = 0` for `q > 0`, `g <= 0`, in the
/// cancellation-free form.
fn positive_root(q: f64, h: f64, g: f64) -> f64 {
    let disc = (h * h - q * g).max(0.0).sqrt();
    if h > 0.0 {
        -g / (h + disc)
    } else {
        (disc - h) / q
    }
}

pub(crate) fn random_direction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    loop {
        let d = DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let norm = d.norm();
        if norm > 1e-3 && norm <= 1.0 {
            return d / norm;
        }
    }
}

fn binomial(m: usize, k: usize) -> usize {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(m - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::super::vector;
    use super::*;
    use approx::assert_abs_diff_eq;

    fn square() -> ConvexBody {
        ConvexBody::cube(2).unwrap()
    }

    #[test]
    fn classify_square() {
        let sq = square();
        assert_eq!(sq.classify(&vector(&[0.0, 0.0])).unwrap(), Location::Interior);
        assert_eq!(sq.classify(&vector(&[1.0, 0.0])).unwrap(), Location::Boundary);
        assert_eq!(sq.classify(&vector(&[2.0, 0.0])).unwrap(), Location::Exterior);
    }

    #[test]
    fn classify_dimension_mismatch() {
        let err = square().classify(&vector(&[0.0])).unwrap_err();
        assert_eq!(err, GeometryError::DimensionMismatch { expected: 2, got: 1 });
        assert_eq!(square().classify(&vector(&[f64::NAN, 0.0])).unwrap_err(), GeometryError::NonFinite);
    }

    #[test]
    fn chord_interval() {
        let iv = ConvexBody::interval(-1.0, 1.0).unwrap();
        let c = iv.chord_endpoints(&vector(&[0.0]), &vector(&[0.5])).unwrap();
        assert_abs_diff_eq!(c.a[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.b[0], 1.0, epsilon = 1e-15);
        assert!(c.t_lo < 0.0 && c.t_hi > 1.0);
    }

    #[test]
    fn chord_square_axis() {
        let c = square().chord_endpoints(&vector(&[0.0, 0.0]), &vector(&[0.5, 0.0])).unwrap();
        assert_abs_diff_eq!((c.a - vector(&[-1.0, 0.0])).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((c.b - vector(&[1.0, 0.0])).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn chord_simplex() {
        // Facet by facet: x_1 = 0 at t = -1, x_1 + x_2 = 1 at t = 2.
        let s = ConvexBody::simplex(2).unwrap();
        let c = s.chord_endpoints(&vector(&[0.25, 0.25]), &vector(&[0.5, 0.25])).unwrap();
        assert_abs_diff_eq!((c.a - vector(&[0.0, 0.25])).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((c.b - vector(&[0.75, 0.25])).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.t_lo, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.t_hi, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn chord_errors() {
        let sq = square();
        let p = vector(&[0.1, 0.1]);
        assert!(matches!(sq.chord_endpoints(&p, &p), Err(GeometryError::CoincidentPoints(_))));
        assert_eq!(sq.chord_endpoints(&p, &vector(&[1.0, 0.0])).unwrap_err(), GeometryError::NotInterior);
    }

    #[test]
    fn chord_ellipse_matches_quadratic() {
        let e = ConvexBody::ellipsoid(vector(&[0.0, 0.0]), DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 1.0]))
            .unwrap();
        let c = e.chord_endpoints(&vector(&[0.0, 0.0]), &vector(&[1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(c.a[0], -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.b[0], 2.0, epsilon = 1e-14);
        assert_eq!(e.classify(&c.a).unwrap(), Location::Boundary);
    }

    #[test]
    fn degenerate_polytopes_rejected() {
        // Half-plane: unbounded.
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        assert_eq!(ConvexBody::hpolytope(a, vector(&[1.0])).unwrap_err(), GeometryError::Unbounded);
        // x <= 0 and -x <= 0: empty interior.
        let a = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        assert_eq!(ConvexBody::hpolytope(a, vector(&[0.0, 0.0])).unwrap_err(), GeometryError::EmptyInterior);
        // Infeasible.
        let a = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        assert!(ConvexBody::hpolytope(a, vector(&[-1.0, -1.0])).is_err());
    }

    #[test]
    fn diameters() {
        let d = square().diameter();
        assert!(d.exact);
        assert_abs_diff_eq!(d.value, 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(ConvexBody::ball(vector(&[0.0, 0.0]), 1.0).unwrap().diameter().value, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ConvexBody::interval(-1.0, 1.0).unwrap().diameter().value, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ConvexBody::simplex(2).unwrap().diameter().value, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn samples_are_interior_and_reproducible() {
        for body in [square(), ConvexBody::simplex(3).unwrap(), ConvexBody::ball(vector(&[1.0, 2.0]), 0.5).unwrap()] {
            for seed in 0..20 {
                let x = body.sample_interior(seed);
                assert_eq!(body.classify(&x).unwrap(), Location::Interior);
                assert_eq!(x, body.sample_interior(seed));
            }
        }
    }

    #[test]
    fn nearest_boundary_snaps_to_vertex() {
        let s = ConvexBody::simplex(2).unwrap();
        let p = s.nearest_boundary_point(&vector(&[0.9998, 0.0001]), 1e-3).unwrap();
        assert_abs_diff_eq!((p - vector(&[1.0, 0.0])).norm(), 0.0, epsilon = 1e-12);
        let p = s.nearest_boundary_point(&vector(&[0.3, 0.3]), 1e-3).unwrap();
        assert_eq!(s.classify(&p).unwrap(), Location::Boundary);
    }

    #[test]
    fn boundary_grid_on_boundary() {
        let sq = square();
        let g = sq.boundary_grid(5);
        assert_eq!(g.len(), 20);
        assert!(g.iter().all(|p| sq.classify(p).unwrap() == Location::Boundary));
    }

    #[test]
    fn descriptor_json_roundtrip() {
        let json = r#"{"type":"simplex","dimension":2}"#;
        let d: BodyDescriptor = serde_json::from_str(json).unwrap();
        let body = ConvexBody::from_descriptor(&d).unwrap();
        assert_eq!(body.dim(), 2);
        let json = r#"{"type":"hpolytope","a":[[1.0],[-1.0]],"b":[1.0,1.0]}"#;
        let body = ConvexBody::from_descriptor(&serde_json::from_str(json).unwrap()).unwrap();
        assert_eq!(body.classify(&vector(&[0.5])).unwrap(), Location::Interior);
        let json = r#"{"type":"interval","lo":-1.0,"hi":1.0}"#;
        let body = ConvexBody::from_descriptor(&serde_json::from_str(json).unwrap()).unwrap();
        assert_eq!(body.classify(&vector(&[1.0])).unwrap(), Location::Boundary);
        let d: BodyDescriptor = serde_json::from_str(r#"{"type":"cube","dim":3}"#).unwrap();
        assert_eq!(ConvexBody::from_descriptor(&d).unwrap().dim(), 3);
    }
}
