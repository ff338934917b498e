//! Density operators, the benchmark state factory and one-axis twisting.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    c, expi_hermitian, hermiticity_residual, re, trace, ComplexMatrix, ComplexVector, HalfInteger,
};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::rotations::PhasePoint;

/// Validation tolerances for [`DensityOperator::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Tolerance for states read from files or reconstructed numerically.
pub const LOAD_TOL: f64 = 1e-8;

pub const MAX_OAT_QUBITS: usize = 10;

/// Hermitian, positive semidefinite, trace-one operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates against the strict tolerances and hermitizes.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        validate(&matrix, HERMITIAN_TOL, TRACE_TOL, POSITIVITY_TOL)?;
        Ok(DensityOperator {
            matrix: hermitize(&matrix),
        })
    }

    /// Accepts violations up to `tol` and projects onto the set of density
    /// operators: hermitize, clip negative eigenvalues, renormalize.
    pub fn projected(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        validate(&matrix, tol, tol, tol)?;
        let h = hermitize(&matrix);
        let eig = SymmetricEigen::new(h);
        let vals: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = vals.iter().sum();
        let mut v = eig.eigenvectors.clone();
        for (mut col, l) in v.column_iter_mut().zip(&vals) {
            col *= re((l / total).sqrt());
        }
        Ok(DensityOperator {
            matrix: hermitize(&(&v * v.adjoint())),
        })
    }

    pub fn from_pure(psi: &ComplexVector) -> Result<Self> {
        let norm = psi.norm();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("state vector has zero norm".into()));
        }
        let psi = psi.unscale(norm);
        Ok(DensityOperator {
            matrix: hermitize(&(&psi * psi.adjoint())),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator {
            matrix: ComplexMatrix::identity(dim, dim).unscale(dim as f64),
        }
    }

    /// Haar-random pure state.
    pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let v = ComplexVector::from_fn(dim, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        DensityOperator::from_pure(&v).expect("gaussian vector is nonzero")
    }

    /// Full-rank random mixed state `G G† / Tr[G G†]` with Ginibre `G`.
    pub fn random_mixed<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let m = &g * g.adjoint();
        let t = trace(&m).re;
        DensityOperator {
            matrix: hermitize(&m.unscale(t)),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn purity(&self) -> f64 {
        purity(self)
    }

    /// Reduced state of `keep` for a system with the given site dimensions.
    pub fn partial_trace(&self, dims: &[usize], keep: usize) -> Result<DensityOperator> {
        if dims.iter().product::<usize>() != self.dim() || keep >= dims.len() {
            return Err(Error::Argument(
                "site dimensions do not match the state".into(),
            ));
        }
        let dk = dims[keep];
        let right: usize = dims[keep + 1..].iter().product();
        let left: usize = dims[..keep].iter().product();
        let mut out = ComplexMatrix::zeros(dk, dk);
        for a in 0..dk {
            for b in 0..dk {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..left {
                    for r in 0..right {
                        let i = (l * dk + a) * right + r;
                        let j = (l * dk + b) * right + r;
                        acc += self.matrix[(i, j)];
                    }
                }
                out[(a, b)] = acc;
            }
        }
        DensityOperator::new(out)
    }
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn validate(m: &ComplexMatrix, herm_tol: f64, trace_tol: f64, pos_tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidState(format!(
            "density matrix must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidState("non-finite entries".into()));
    }
    let h = hermiticity_residual(m);
    if h > herm_tol {
        return Err(Error::InvalidState(format!(
            "not Hermitian (residual {h:e})"
        )));
    }
    let t = trace(m);
    if (t - re(1.0)).norm() > trace_tol {
        return Err(Error::InvalidState(format!("trace is {t}, expected 1")));
    }
    let min = SymmetricEigen::new(hermitize(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -pos_tol {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityOperator) -> f64 {
    rho.matrix.iter().map(|z| z.norm_sqr()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl FromStr for BellLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "phi+" => BellLabel::PhiPlus,
            "phi-" => BellLabel::PhiMinus,
            "psi+" => BellLabel::PsiPlus,
            "psi-" => BellLabel::PsiMinus,
            _ => return Err(Error::InvalidState(format!("unknown Bell state `{s}`"))),
        })
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        })
    }
}

/// A named state. The string form is the CLI mini-language:
/// `cat:j=7/2`, `plus:6`, `bell:phi+`, `ghz:3`, `basis:j=1,m=0`,
/// `mixed:4`, `file:PATH`.
#[derive(Debug, Clone)]
pub enum StateSpec {
    /// `|j, m⟩`.
    Basis {
        j: HalfInteger,
        m: f64,
    },
    /// Normalized `|j, j⟩ + |j, -j⟩`.
    Cat(HalfInteger),
    /// `|+⟩^{⊗k}`.
    Plus(usize),
    Bell(BellLabel),
    /// `(|0…0⟩ + |1…1⟩)/√2` on `k` qubits.
    Ghz(usize),
    MaximallyMixed(usize),
    /// `𝕌(Ω)|fiducial⟩` of the given kernel.
    Coherent {
        kernel: Box<Kernel>,
        point: PhasePoint,
    },
    File(PathBuf),
}

fn parse_fraction(s: &str) -> Result<f64> {
    let bad = || Error::InvalidState(format!("cannot parse `{s}` as a number"));
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0.0 {
                return Err(bad());
            }
            Ok(a / b)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

fn parse_count(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidState(format!("cannot parse `{s}` as a count")))
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidState(format!("state spec `{s}` has no `tag:` prefix")))?;
        let keyed = |key: &str| -> Result<&str> {
            rest.split(',')
                .filter_map(|kv| kv.split_once('='))
                .find(|(k, _)| k.trim() == key)
                .map(|(_, v)| v)
                .ok_or_else(|| Error::InvalidState(format!("state spec `{s}` is missing `{key}=`")))
        };
        match tag {
            "cat" => Ok(StateSpec::Cat(keyed("j")?.parse()?)),
            "basis" => Ok(StateSpec::Basis {
                j: keyed("j")?.parse()?,
                m: parse_fraction(keyed("m")?)?,
            }),
            "plus" => Ok(StateSpec::Plus(parse_count(rest)?)),
            "ghz" => Ok(StateSpec::Ghz(parse_count(rest)?)),
            "bell" => Ok(StateSpec::Bell(rest.parse()?)),
            "mixed" => Ok(StateSpec::MaximallyMixed(parse_count(rest)?)),
            "file" => Ok(StateSpec::File(PathBuf::from(rest))),
            _ => Err(Error::InvalidState(format!("unknown state tag `{tag}`"))),
        }
    }
}

fn basis_vector(dim: usize, index: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(dim);
    v[index] = re(1.0);
    v
}

fn qubit_register(k: usize) -> Result<usize> {
    if k == 0 || k > MAX_OAT_QUBITS {
        return Err(Error::InvalidState(format!(
            "qubit count {k} outside 1..={MAX_OAT_QUBITS}"
        )));
    }
    Ok(1 << k)
}

pub fn make_state(spec: &StateSpec) -> Result<DensityOperator> {
    match spec {
        StateSpec::Basis { j, m } => {
            let jv = j.value();
            let idx = jv - m;
            if idx < -1e-9 || idx > 2.0 * jv + 1e-9 || (idx - idx.round()).abs() > 1e-9 {
                return Err(Error::InvalidState(format!(
                    "m = {m} is not valid for j = {j}"
                )));
            }
            DensityOperator::from_pure(&basis_vector(j.multiplicity(), idx.round() as usize))
        }
        StateSpec::Cat(j) => {
            if j.twice() == 0 {
                return Err(Error::InvalidState("cat state needs j > 0".into()));
            }
            let d = j.multiplicity();
            DensityOperator::from_pure(&(basis_vector(d, 0) + basis_vector(d, d - 1)))
        }
        StateSpec::Plus(k) => {
            let d = qubit_register(*k)?;
            DensityOperator::from_pure(&ComplexVector::from_element(d, re(1.0)))
        }
        StateSpec::Ghz(k) => {
            let d = qubit_register(*k)?;
            DensityOperator::from_pure(&(basis_vector(d, 0) + basis_vector(d, d - 1)))
        }
        StateSpec::Bell(label) => {
            let (a, b, sign) = match label {
                BellLabel::PhiPlus => (0, 3, 1.0),
                BellLabel::PhiMinus => (0, 3, -1.0),
                BellLabel::PsiPlus => (1, 2, 1.0),
                BellLabel::PsiMinus => (1, 2, -1.0),
            };
            DensityOperator::from_pure(&(basis_vector(4, a) + basis_vector(4, b).scale(sign)))
        }
        StateSpec::MaximallyMixed(d) => {
            if *d == 0 {
                return Err(Error::InvalidState("dimension must be positive".into()));
            }
            Ok(DensityOperator::maximally_mixed(*d))
        }
        StateSpec::Coherent { kernel, point } => {
            DensityOperator::from_pure(&kernel.coherent_state(point)?)
        }
        StateSpec::File(path) => read_state_file(path),
    }
}

/// On-disk form: separate real and imaginary `D×D` arrays, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|cc| f(&m[(r, cc)])).collect())
                .collect()
        };
        StateFile {
            real: rows(|z| z.re),
            imag: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let d = self.real.len();
        let square = |a: &Vec<Vec<f64>>| a.len() == d && a.iter().all(|r| r.len() == d);
        if d == 0 || !square(&self.real) || !square(&self.imag) {
            return Err(Error::InvalidState(
                "state file needs matching square `real` and `imag` arrays".into(),
            ));
        }
        Ok(ComplexMatrix::from_fn(d, d, |r, cc| {
            c(self.real[r][cc], self.imag[r][cc])
        }))
    }
}

pub fn read_state_file(path: &Path) -> Result<DensityOperator> {
    let text = std::fs::read_to_string(path)?;
    let file: StateFile = serde_json::from_str(&text)?;
    DensityOperator::projected(file.to_matrix()?, LOAD_TOL)
}

pub fn write_state_file(path: &Path, rho: &ComplexMatrix) -> Result<()> {
    let text = serde_json::to_string_pretty(&StateFile::from_matrix(rho))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// `(Σᵢ σ_z⁽ⁱ⁾)²` on `k` qubits; basis state bit 0 is σ_z = +1.
pub fn oat_hamiltonian(k: usize) -> Result<ComplexMatrix> {
    let d = qubit_register(k).map_err(|_| {
        Error::Resource(format!(
            "one-axis twisting supports 1..={MAX_OAT_QUBITS} qubits, got {k}"
        ))
    })?;
    let entries: Vec<f64> = (0..d)
        .map(|i| {
            let ones = (i as u32).count_ones() as f64;
            let jz = k as f64 - 2.0 * ones;
            jz * jz
        })
        .collect();
    Ok(crate::algebra::diagonal(&entries))
}

/// `V ρ V†` with `V = exp(-i H t)`.
pub fn evolve(rho: &DensityOperator, h: &ComplexMatrix, t: f64) -> Result<DensityOperator> {
    if h.nrows() != rho.dim() || h.ncols() != rho.dim() {
        return Err(Error::Argument(format!(
            "Hamiltonian is {}x{}, state dimension is {}",
            h.nrows(),
            h.ncols(),
            rho.dim()
        )));
    }
    let v = expi_hermitian(h, -t)?;
    Ok(DensityOperator {
        matrix: hermitize(&(&v * rho.matrix() * v.adjoint())),
    })
}
