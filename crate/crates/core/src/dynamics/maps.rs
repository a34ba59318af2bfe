use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::expm::{expm_projective, normalize_max, DEFAULT_EXPM_TOL};
use super::DynamicsError;
use crate::geometry::Vector;

/// A self-map of a domain, in the coordinates of the metric it is paired
/// with.
pub trait SelfMap: Sync {
    fn apply(&self, x: &Vector) -> Result<Vector, DynamicsError>;

    /// Images of `x` under `f^(2^k)` for `k = 0..count`, when the map can be
    /// raised to powers without iterating. `None` otherwise.
    fn dyadic_images(&self, _x: &Vector, _count: usize) -> Option<Result<Vec<Vector>, DynamicsError>> {
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapKind {
    /// Returns its argument unchanged.
    Identity,
    /// `x -> A x / sum(A x)` on positive vectors (the simplex in cone
    /// coordinates).
    ProjectiveLinear { matrix: DMatrix<f64> },
    /// `x -> M x + c` in body coordinates.
    AffineContraction { matrix: DMatrix<f64>, offset: Vector },
    /// Applied first to last.
    Composition(Vec<MapSpec>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapSpec {
    pub kind: MapKind,
    pub claimed_nonexpansive: bool,
}

/// Serialized form of a [`MapSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MapDescriptor {
    Identity,
    ProjectiveLinear {
        matrix: Vec<Vec<f64>>,
    },
    AffineContraction {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    Composition {
        maps: Vec<MapDescriptor>,
    },
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, DynamicsError> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if m == 0 || n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(DynamicsError::InvalidMap("matrix must be a nonempty rectangle".into()));
    }
    let data: Vec<f64> = rows.iter().flatten().copied().collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(DynamicsError::InvalidMap("non-finite matrix entry".into()));
    }
    Ok(DMatrix::from_row_slice(m, n, &data))
}

impl MapSpec {
    pub fn identity() -> Self {
        Self { kind: MapKind::Identity, claimed_nonexpansive: true }
    }

    /// Requires a square nonnegative matrix without zero columns.
    pub fn projective_linear(matrix: DMatrix<f64>) -> Result<Self, DynamicsError> {
        if !matrix.is_square() {
            return Err(DynamicsError::InvalidMap("projective-linear matrix must be square".into()));
        }
        if matrix.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(DynamicsError::InvalidMap("projective-linear matrix must be nonnegative".into()));
        }
        if matrix.column_iter().any(|c| c.iter().all(|v| *v == 0.0)) {
            return Err(DynamicsError::InvalidMap("projective-linear matrix has a zero column".into()));
        }
        Ok(Self { kind: MapKind::ProjectiveLinear { matrix }, claimed_nonexpansive: true })
    }

    pub fn affine(matrix: DMatrix<f64>, offset: Vector) -> Result<Self, DynamicsError> {
        if !matrix.is_square() || matrix.nrows() != offset.len() {
            return Err(DynamicsError::InvalidMap("affine map shape mismatch".into()));
        }
        Ok(Self { kind: MapKind::AffineContraction { matrix, offset }, claimed_nonexpansive: true })
    }

    /// `x -> p + lambda (x - p)`, a homothety toward `p`.
    pub fn homothety(p: &Vector, lambda: f64) -> Result<Self, DynamicsError> {
        let n = p.len();
        Self::affine(DMatrix::identity(n, n) * lambda, p * (1.0 - lambda))
    }

    pub fn composition(maps: Vec<MapSpec>) -> Self {
        let claimed = maps.iter().all(|m| m.claimed_nonexpansive);
        Self { kind: MapKind::Composition(maps), claimed_nonexpansive: claimed }
    }

    pub fn from_descriptor(d: &MapDescriptor) -> Result<Self, DynamicsError> {
        match d {
            MapDescriptor::Identity => Ok(Self::identity()),
            MapDescriptor::ProjectiveLinear { matrix } => Self::projective_linear(matrix_from_rows(matrix)?),
            MapDescriptor::AffineContraction { matrix, offset } => {
                Self::affine(matrix_from_rows(matrix)?, DVector::from_column_slice(offset))
            }
            MapDescriptor::Composition { maps } => {
                Ok(Self::composition(maps.iter().map(Self::from_descriptor).collect::<Result<_, _>>()?))
            }
        }
    }

    /// The matrix of a map that is projective-linear as a whole (identity,
    /// projective-linear, or compositions of those) in dimension `n`.
    fn projective_matrix(&self, n: usize) -> Option<DMatrix<f64>> {
        match &self.kind {
            MapKind::Identity => Some(DMatrix::identity(n, n)),
            MapKind::ProjectiveLinear { matrix } => (matrix.nrows() == n).then(|| matrix.clone()),
            MapKind::AffineContraction { .. } => None,
            MapKind::Composition(maps) => {
                let mut acc = DMatrix::identity(n, n);
                for m in maps {
                    acc = m.projective_matrix(n)? * acc;
                    normalize_max(&mut acc);
                }
                Some(acc)
            }
        }
    }
}

fn check_len(expected: usize, x: &Vector) -> Result<(), DynamicsError> {
    if x.len() != expected {
        return Err(DynamicsError::DimensionMismatch { expected, got: x.len() });
    }
    Ok(())
}

/// `m x / sum(m x)`.
pub(crate) fn projective_apply(m: &DMatrix<f64>, x: &Vector) -> Result<Vector, DynamicsError> {
    check_len(m.ncols(), x)?;
    let y = m * x;
    let s = y.sum();
    if !(s > 0.0 && s.is_finite()) {
        return Err(DynamicsError::InvalidMap("image has nonpositive mass".into()));
    }
    Ok(y / s)
}

/// Images under `m^(2^k)`, `k = 0..count`, by repeated squaring.
fn dyadic_projective(m: &DMatrix<f64>, x: &Vector, count: usize) -> Result<Vec<Vector>, DynamicsError> {
    let mut power = m.clone();
    normalize_max(&mut power);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(projective_apply(&power, x)?);
        power = &power * &power;
        normalize_max(&mut power);
    }
    Ok(out)
}

impl SelfMap for MapSpec {
    fn apply(&self, x: &Vector) -> Result<Vector, DynamicsError> {
        match &self.kind {
            MapKind::Identity => Ok(x.clone()),
            MapKind::ProjectiveLinear { matrix } => projective_apply(matrix, x),
            MapKind::AffineContraction { matrix, offset } => {
                check_len(matrix.ncols(), x)?;
                Ok(matrix * x + offset)
            }
            MapKind::Composition(maps) => maps.iter().try_fold(x.clone(), |acc, m| m.apply(&acc)),
        }
    }

    fn dyadic_images(&self, x: &Vector, count: usize) -> Option<Result<Vec<Vector>, DynamicsError>> {
        if matches!(self.kind, MapKind::Identity) {
            return Some(Ok(vec![x.clone(); count]));
        }
        let m = self.projective_matrix(x.len())?;
        Some(dyadic_projective(&m, x, count))
    }
}

/// The flow `f_t(x) = exp(t A) x / sum(exp(t A) x)` on the simplex, for a
/// generator `A` with nonnegative off-diagonal entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupSpec {
    generator: DMatrix<f64>,
    pub expm_tol: f64,
}

impl SemigroupSpec {
    pub fn new(generator: DMatrix<f64>) -> Result<Self, DynamicsError> {
        if !generator.is_square() {
            return Err(DynamicsError::InvalidMap("generator must be square".into()));
        }
        if generator.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::InvalidMap("non-finite generator entry".into()));
        }
        let n = generator.nrows();
        for i in 0..n {
            for j in 0..n {
                if i != j && generator[(i, j)] < 0.0 {
                    return Err(DynamicsError::InvalidMap(format!("generator entry ({i}, {j}) is negative")));
                }
            }
        }
        Ok(Self { generator, expm_tol: DEFAULT_EXPM_TOL })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DynamicsError> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    /// `exp(t A)` up to a positive factor.
    pub fn time_matrix(&self, t: f64) -> DMatrix<f64> {
        expm_projective(&(&self.generator * t), self.expm_tol)
    }

    /// `f_t(x)`; `f_0` returns `x` unchanged.
    pub fn apply_at(&self, t: f64, x: &Vector) -> Result<Vector, DynamicsError> {
        if t < 0.0 || !t.is_finite() {
            return Err(DynamicsError::InvalidMap(format!("time {t} must be finite and >= 0")));
        }
        check_len(self.dim(), x)?;
        if t == 0.0 {
            return Ok(x.clone());
        }
        projective_apply(&self.time_matrix(t), x)
    }

    /// The time-`t0` map `f_{t0}` as a projective-linear map.
    pub fn time_map(&self, t0: f64) -> Result<MapSpec, DynamicsError> {
        let mut m = self.time_matrix(t0);
        // Roundoff can leave -0.0 or tiny negatives where the exact entry is 0.
        m.iter_mut().for_each(|v| *v = v.max(0.0));
        MapSpec::projective_linear(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vector;

    fn close(a: &Vector, b: &Vector, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    #[test]
    fn projective_linear_example() {
        let f = MapSpec::projective_linear(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).unwrap();
        let y = f.apply(&vector(&[0.5, 0.5])).unwrap();
        assert!(close(&y, &vector(&[2.0 / 3.0, 1.0 / 3.0]), 1e-15));
    }

    #[test]
    fn projective_linear_validation() {
        assert!(MapSpec::projective_linear(DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 1.0])).is_err());
        assert!(MapSpec::projective_linear(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn semigroup_nilpotent_example() {
        let sg = SemigroupSpec::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let x = vector(&[0.5, 0.5]);
        assert_eq!(sg.apply_at(0.0, &x).unwrap(), x);
        assert!(close(&sg.apply_at(1.0, &x).unwrap(), &vector(&[2.0 / 3.0, 1.0 / 3.0]), 1e-15));
    }

    #[test]
    fn semigroup_rejects_negative_off_diagonal() {
        assert!(SemigroupSpec::from_rows(&[vec![0.0, -1.0], vec![0.0, 0.0]]).is_err());
    }

    #[test]
    fn dyadic_images_match_iteration() {
        let f = MapSpec::projective_linear(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).unwrap();
        let x = vector(&[0.3, 0.7]);
        let imgs = f.dyadic_images(&x, 5).unwrap().unwrap();
        let mut y = x.clone();
        let mut n = 0;
        for (k, img) in imgs.iter().enumerate() {
            while n < (1usize << k) {
                y = f.apply(&y).unwrap();
                n += 1;
            }
            assert!(close(img, &y, 1e-14), "k = {k}");
        }
    }

    #[test]
    fn composition_applies_in_order() {
        let a = MapSpec::affine(DMatrix::identity(1, 1) * 0.5, vector(&[0.0])).unwrap();
        let b = MapSpec::affine(DMatrix::identity(1, 1), vector(&[0.25])).unwrap();
        let c = MapSpec::composition(vec![a, b]);
        assert_eq!(c.apply(&vector(&[0.5])).unwrap(), vector(&[0.5]));
    }

    #[test]
    fn descriptor_parses() {
        let d: MapDescriptor =
            serde_json::from_str(r#"{"type":"projective-linear","matrix":[[2,1],[1,2]]}"#).unwrap();
        let m = MapSpec::from_descriptor(&d).unwrap();
        assert_eq!(m.apply(&vector(&[0.5, 0.5])).unwrap(), vector(&[0.5, 0.5]));
    }
}
