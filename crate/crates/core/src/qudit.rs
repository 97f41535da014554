//! Complex linear algebra for pure qudit states and unitaries.
//!
//! Amplitude vectors are compared entrywise, so the global phase is part of
//! the state here: `(1, 0)` and `(i, 0)` are at squared error 2.

use std::ops::Index;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Norm tolerance for vectors flagged as physical (normalized) states.
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Max-entry tolerance on `M†M - 1` for a matrix to count as unitary.
pub const UNITARY_TOLERANCE: f64 = 1e-10;
/// Pivot and singular-value floor for orthonormalization and polar projection.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// A length-`d` vector of complex probability amplitudes.
///
/// Both the unknown state and the (possibly unnormalized) CSPSA iterate are
/// stored as `AmplitudeVector`s.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeVector(Vec<Complex64>);

impl AmplitudeVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidData("non-finite amplitude".into()));
        }
        Ok(Self(entries))
    }

    /// Builds a vector from `(re, im)` pairs.
    pub fn from_parts(parts: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            parts
                .iter()
                .map(|&(re, im)| Complex64::new(re, im))
                .collect(),
        )
    }

    /// Canonical basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 || index >= dim {
            return Err(Error::InvalidDimension(dim));
        }
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[index] = Complex64::new(1.0, 0.0);
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * factor).collect())
    }

    /// Inner product `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub(crate) fn from_entries_unchecked(entries: Vec<Complex64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }
}

impl Index<usize> for AmplitudeVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}

/// Rescales `v` to unit norm without touching its global phase.
pub fn normalize(v: &AmplitudeVector) -> Result<AmplitudeVector> {
    let norm = v.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DegenerateVector);
    }
    Ok(AmplitudeVector(v.0.iter().map(|z| z / norm).collect()))
}

/// `Σ_i |z_i - w_i|²`.
pub fn squared_error(z: &AmplitudeVector, w: &AmplitudeVector) -> Result<f64> {
    check_same_dim(z.dim(), w.dim())?;
    Ok(z.0.iter().zip(&w.0).map(|(a, b)| (a - b).norm_sqr()).sum())
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Haar-uniform pure state: normalized vector of i.i.d. complex Gaussians.
pub fn haar_random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<AmplitudeVector> {
    if dim == 0 {
        return Err(Error::InvalidDimension(dim));
    }
    loop {
        let v = AmplitudeVector((0..dim).map(|_| complex_gaussian(rng)).collect());
        // A zero draw has probability zero; redraw rather than fail.
        if let Ok(state) = normalize(&v) {
            return Ok(state);
        }
    }
}

/// A square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidData("non-finite matrix entry".into()));
        }
        Ok(Self(m))
    }

    /// Row-major construction from `(re, im)` pairs.
    pub fn from_row_parts(dim: usize, parts: &[(f64, f64)]) -> Result<Self> {
        check_same_dim(dim * dim, parts.len())?;
        Self::new(DMatrix::from_row_iterator(
            dim,
            dim,
            parts.iter().map(|&(re, im)| Complex64::new(re, im)),
        ))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Stacks `columns` side by side; column `j` becomes `M|j⟩`.
    pub fn from_columns(columns: &[AmplitudeVector]) -> Result<Self> {
        let dim = columns.len();
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        for c in columns {
            check_same_dim(dim, c.dim())?;
        }
        Ok(Self(DMatrix::from_fn(dim, dim, |i, j| columns[j][i])))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn column(&self, j: usize) -> AmplitudeVector {
        AmplitudeVector(self.0.column(j).iter().copied().collect())
    }

    pub fn columns(&self) -> Vec<AmplitudeVector> {
        (0..self.dim()).map(|j| self.column(j)).collect()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    /// `‖M†M − 1‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.0.adjoint() * &self.0;
        let id = DMatrix::<Complex64>::identity(self.dim(), self.dim());
        (gram - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= UNITARY_TOLERANCE
    }
}

/// Haar-distributed unitary from the QR factorization of a complex Ginibre
/// matrix, with `Q` rephased by the phases of `diag(R)`.
pub fn haar_random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension(dim));
    }
    let ginibre = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng) / 2f64.sqrt());
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    Ok(ComplexMatrix(q))
}

/// Modified Gram-Schmidt over the columns in ascending index order.
pub fn gram_schmidt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = m.dim();
    let mut q = m.0.clone();
    for j in 0..dim {
        for i in 0..j {
            let proj: Complex64 = q.column(i).dotc(&q.column(j));
            let qi = q.column(i).into_owned();
            q.column_mut(j).axpy(-proj, &qi, Complex64::new(1.0, 0.0));
        }
        let pivot = q.column(j).norm();
        if pivot < RANK_TOLERANCE {
            return Err(Error::RankDeficient { column: j, pivot });
        }
        q.column_mut(j).unscale_mut(pivot);
    }
    Ok(ComplexMatrix(q))
}

/// Unitary polar factor of `m`, i.e. the unitary closest to `m` in
/// Hilbert-Schmidt distance. For `m = V Σ W†` this is `V W†`.
pub fn closest_unitary(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let svd = m.0.clone().svd(true, true);
    let smallest = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(smallest > RANK_TOLERANCE) {
        return Err(Error::SingularMatrix(smallest));
    }
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(Error::SingularMatrix(smallest));
    };
    Ok(ComplexMatrix(u * v_t))
}

/// `Tr[(U−V)(U−V)†] = Σ_jk |U_jk − V_jk|²`.
pub fn hs_distance(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    check_same_dim(u.dim(), v.dim())?;
    Ok(u.0
        .iter()
        .zip(v.0.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum())
}
