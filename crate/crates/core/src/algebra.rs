//! Dense complex operator algebra.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Vectorization stacks columns,
//! which is also nalgebra's storage order, so [`vectorize`] is a copy of the
//! backing slice.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn diagonal(entries: &[f64]) -> ComplexMatrix {
    let v = ComplexVector::from_iterator(entries.len(), entries.iter().map(|&x| re(x)));
    ComplexMatrix::from_diagonal(&v)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[re(0.0), c(0.0, -1.0), c(0.0, 1.0), re(0.0)])
}

pub fn pauli_z() -> ComplexMatrix {
    diagonal(&[1.0, -1.0])
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |A - A†|`.
pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `max |U†U - I|`.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

fn require_square(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Argument(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// An ordered basis of `D² - 1` Hermitian traceless generators of su(D).
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl OperatorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The last diagonal generator, `Λ_{D²-1}`.
    pub fn last(&self) -> &ComplexMatrix {
        self.elements.last().expect("basis has D^2-1 >= 3 elements")
    }
}

/// Symmetric generator `|j⟩⟨k| + |k⟩⟨j|` for `j < k`.
pub fn gell_mann_symmetric(dim: usize, j: usize, k: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    m[(j, k)] = re(1.0);
    m[(k, j)] = re(1.0);
    m
}

/// Antisymmetric generator `-i|j⟩⟨k| + i|k⟩⟨j|` for `j < k`; equals σ_y for `D = 2`.
pub fn gell_mann_antisymmetric(dim: usize, j: usize, k: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    m[(j, k)] = c(0.0, -1.0);
    m[(k, j)] = c(0.0, 1.0);
    m
}

/// Diagonal entries of the `l`-th diagonal generator (`1 <= l <= D-1`):
/// `sqrt(2/(l(l+1))) * diag(1, …, 1, -l, 0, …, 0)` with `l` leading ones.
pub fn gell_mann_diagonal_entries(dim: usize, l: usize) -> Vec<f64> {
    debug_assert!(l >= 1 && l < dim);
    let scale = (2.0 / (l as f64 * (l as f64 + 1.0))).sqrt();
    (0..dim)
        .map(|i| match i.cmp(&l) {
            std::cmp::Ordering::Less => scale,
            std::cmp::Ordering::Equal => -(l as f64) * scale,
            std::cmp::Ordering::Greater => 0.0,
        })
        .collect()
}

/// Generalized Gell-Mann matrices: symmetric pairs, antisymmetric pairs, then
/// the `D - 1` diagonal generators, each group in ascending index order.
pub fn gell_mann_basis(dim: usize) -> Result<OperatorBasis> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let pairs: Vec<(usize, usize)> = (0..dim)
        .flat_map(|j| (j + 1..dim).map(move |k| (j, k)))
        .collect();
    let mut elements = Vec::with_capacity(dim * dim - 1);
    elements.extend(pairs.iter().map(|&(j, k)| gell_mann_symmetric(dim, j, k)));
    elements.extend(
        pairs
            .iter()
            .map(|&(j, k)| gell_mann_antisymmetric(dim, j, k)),
    );
    elements.extend((1..dim).map(|l| diagonal(&gell_mann_diagonal_entries(dim, l))));
    Ok(OperatorBasis { dim, elements })
}

/// Diagonal of `Λ_{D²-1}`: `D-1` entries `sqrt(2/(D(D-1)))`, then `-sqrt(2(D-1)/D)`.
pub fn lambda_last_entries(dim: usize) -> Result<Vec<f64>> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let d = dim as f64;
    let mut entries = vec![(2.0 / (d * (d - 1.0))).sqrt(); dim];
    entries[dim - 1] = -(2.0 * (d - 1.0) / d).sqrt();
    Ok(entries)
}

pub fn lambda_last(dim: usize) -> Result<ComplexMatrix> {
    Ok(diagonal(&lambda_last_entries(dim)?))
}

/// A non-negative half-integer, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInteger(u32);

impl HalfInteger {
    pub const fn from_twice(twice: u32) -> Self {
        HalfInteger(twice)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// `2j + 1`.
    pub fn multiplicity(self) -> usize {
        self.0 as usize + 1
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        let twice = 2.0 * x;
        if !x.is_finite() || x < 0.0 || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::InvalidSpin(format!(
                "{x} is not a non-negative half-integer"
            )));
        }
        Ok(HalfInteger(twice.round() as u32))
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInteger {
    type Err = Error;

    /// Accepts `7/2`, `3`, or `3.5`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidSpin(format!("cannot parse `{s}` as a half-integer"));
        if let Some((num, den)) = s.split_once('/') {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0.0 {
                return Err(bad());
            }
            HalfInteger::from_f64(num / den)
        } else {
            HalfInteger::from_f64(s.parse().map_err(|_| bad())?)
        }
    }
}

/// Angular momentum matrices in the `|j, m⟩` basis ordered `m = j, j-1, …, -j`.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub j: HalfInteger,
    pub j1: ComplexMatrix,
    pub j2: ComplexMatrix,
    pub j3: ComplexMatrix,
}

impl SpinOperators {
    pub fn dim(&self) -> usize {
        self.j.multiplicity()
    }

    /// `J1² + J2² + J3²`.
    pub fn casimir(&self) -> ComplexMatrix {
        &self.j1 * &self.j1 + &self.j2 * &self.j2 + &self.j3 * &self.j3
    }

    /// Diagonal of `J3`.
    pub fn m_values(&self) -> Vec<f64> {
        let j = self.j.value();
        (0..self.dim()).map(|i| j - i as f64).collect()
    }
}

pub fn spin_operators(j: HalfInteger) -> SpinOperators {
    let dim = j.multiplicity();
    let jv = j.value();
    let m = |i: usize| jv - i as f64;
    // Raising operator: J+|m⟩ = sqrt(j(j+1) - m(m+1)) |m+1⟩, and |m+1⟩ sits one row up.
    let mut raise = ComplexMatrix::zeros(dim, dim);
    for i in 1..dim {
        let mi = m(i);
        raise[(i - 1, i)] = re((jv * (jv + 1.0) - mi * (mi + 1.0)).sqrt());
    }
    let lower = raise.adjoint();
    let j1 = (&raise + &lower).scale(0.5);
    let j2 = (&raise - &lower) * c(0.0, -0.5);
    let j3 = diagonal(&(0..dim).map(m).collect::<Vec<_>>());
    SpinOperators { j, j1, j2, j3 }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Tensor product in list order.
pub fn kron_all<'a, I>(factors: I) -> Result<ComplexMatrix>
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    let mut iter = factors.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Argument("kron_all needs at least one factor".into()))?;
    Ok(iter.fold(first.clone(), |acc, f| acc.kronecker(f)))
}

pub fn kron_vectors(factors: &[ComplexVector]) -> ComplexVector {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

/// Eigendecomposition of a Hermitian matrix, kept around so that `exp(i s H)`
/// can be evaluated for many `s` at the cost of two matrix products each.
#[derive(Debug, Clone)]
pub struct HermitianExp {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl HermitianExp {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        require_square(h, "exponent")?;
        let residual = hermiticity_residual(h);
        if residual > HERMITIAN_TOL {
            return Err(Error::ContractViolation(format!(
                "exponent is not Hermitian (residual {residual:e})"
            )));
        }
        let eig = SymmetricEigen::new(h.clone());
        Ok(HermitianExp {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `exp(i s H)`.
    pub fn at(&self, s: f64) -> ComplexMatrix {
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::from_polar(1.0, s * l))
            .collect();
        let mut scaled = self.eigenvectors.clone();
        for (mut col, ph) in scaled.column_iter_mut().zip(&phases) {
            col *= *ph;
        }
        scaled * self.eigenvectors.adjoint()
    }
}

/// `exp(i s H)` for Hermitian `H`.
pub fn expi_hermitian(h: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
    Ok(HermitianExp::new(h)?.at(s))
}

/// `Tr[A† B]`.
pub fn frobenius(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if a.shape() != b.shape() {
        return Err(Error::Argument(format!(
            "shape mismatch {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// `Tr[A B]` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Column-stacked vector of a square matrix.
pub fn vectorize(a: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &ComplexVector) -> Result<ComplexMatrix> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() {
        return Err(Error::Argument(format!(
            "vector of length {} is not a square matrix",
            v.len()
        )));
    }
    Ok(ComplexMatrix::from_column_slice(n, n, v.as_slice()))
}
