//! Parity operators and displaced-parity kernels `Δ(Ω) = 𝕌(Ω) Π 𝕌†(Ω) / D`.

use std::fmt;

use crate::algebra::{
    diagonal, identity, lambda_last_entries, unitarity_residual, ComplexMatrix, ComplexVector,
    HalfInteger,
};
use crate::error::{Error, Result};
use crate::rotations::{PhasePoint, RotationFamily, Site};

pub const DEFAULT_DIMENSION_CAP: usize = 256;

/// The symmetry decomposition: one `(n_i, d_i)` pair per site, SU(n_i) acting
/// in a `d_i`-dimensional representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetrySpec {
    sites: Vec<(usize, usize)>,
}

impl SymmetrySpec {
    pub fn new(sites: Vec<(usize, usize)>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Argument("symmetry needs at least one site".into()));
        }
        if let Some(&(n, d)) = sites.iter().find(|(n, d)| *n < 2 || *d < 2) {
            return Err(Error::InvalidDimension(n.min(d)));
        }
        Ok(SymmetrySpec { sites })
    }

    pub fn sites(&self) -> &[(usize, usize)] {
        &self.sites
    }

    /// Site count `k`.
    pub fn k(&self) -> usize {
        self.sites.len()
    }

    /// Hilbert dimension `D = Π d_i`.
    pub fn dim(&self) -> usize {
        self.sites.iter().map(|s| s.1).product()
    }

    /// Group dimension `Π n_i`.
    pub fn group_dim(&self) -> usize {
        self.sites.iter().map(|s| s.0).product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Qubit,
    SpinJ,
    MultiqubitGlobal,
    QuditSun,
    TensorProduct,
}

impl Family {
    /// Families whose frame is expected to be tight (`S = I`).
    pub fn is_documented_self_dual(self) -> bool {
        matches!(self, Family::Qubit | Family::TensorProduct)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Qubit => "qubit",
            Family::SpinJ => "spin-j",
            Family::MultiqubitGlobal => "multiqubit-global",
            Family::QuditSun => "qudit-sun",
            Family::TensorProduct => "tensor-product",
        })
    }
}

/// Parameters accepted by [`make_kernel`].
#[derive(Debug, Clone)]
pub enum KernelSpec {
    Qubit,
    SpinJ(HalfInteger),
    /// `k` qubits, local rotations, global parity in dimension `2^k`.
    Multiqubit(usize),
    /// `k` SU(N) qudits, local rotations, global parity in dimension `N^k`.
    QuditSun {
        n: usize,
        k: usize,
    },
    /// `Δ₁ ⊗ … ⊗ Δ_k`.
    TensorProduct(Vec<Kernel>),
}

/// `N(D) = sqrt((D+1) D (D-1) / 2)`.
pub fn norm_constant(dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let d = dim as f64;
    Ok(((d + 1.0) * d * (d - 1.0) / 2.0).sqrt())
}

/// Diagonal of `Π = I - N(D) Λ_{D²-1}`.
pub fn parity_entries(dim: usize) -> Result<Vec<f64>> {
    let n = norm_constant(dim)?;
    Ok(lambda_last_entries(dim)?
        .into_iter()
        .map(|l| 1.0 - n * l)
        .collect())
}

pub fn parity_operator(dim: usize) -> Result<ComplexMatrix> {
    Ok(diagonal(&parity_entries(dim)?))
}

/// A displaced-parity kernel. The parity is diagonal for every family, so it
/// is stored as its diagonal.
#[derive(Debug, Clone)]
pub struct Kernel {
    family: Family,
    label: String,
    rotation: RotationFamily,
    parity: Vec<f64>,
    /// `V` of a rotated kernel `V† Δ V`.
    frame: Option<ComplexMatrix>,
}

pub fn make_kernel(spec: &KernelSpec) -> Result<Kernel> {
    make_kernel_with_cap(spec, DEFAULT_DIMENSION_CAP)
}

pub fn make_kernel_with_cap(spec: &KernelSpec, cap: usize) -> Result<Kernel> {
    let check_cap = |dim: usize| {
        if dim > cap {
            Err(Error::Resource(format!(
                "Hilbert dimension {dim} exceeds the cap of {cap}"
            )))
        } else {
            Ok(())
        }
    };
    match spec {
        KernelSpec::Qubit => Ok(Kernel::global(
            Family::Qubit,
            "qubit".into(),
            vec![Site::Qubit],
        )?),
        KernelSpec::SpinJ(j) => {
            check_cap(j.multiplicity())?;
            Kernel::global(
                Family::SpinJ,
                format!("spinj(j={j})"),
                vec![Site::spin(*j)?],
            )
        }
        KernelSpec::Multiqubit(k) => {
            if *k == 0 {
                return Err(Error::Argument("multiqubit kernel needs k >= 1".into()));
            }
            check_cap(checked_pow(2, *k).unwrap_or(usize::MAX))?;
            Kernel::global(
                Family::MultiqubitGlobal,
                format!("multiqubit(k={k})"),
                vec![Site::Qubit; *k],
            )
        }
        KernelSpec::QuditSun { n, k } => {
            if *k == 0 {
                return Err(Error::Argument("qudit kernel needs k >= 1".into()));
            }
            let site = Site::sun(*n)?;
            check_cap(checked_pow(*n, *k).unwrap_or(usize::MAX))?;
            Kernel::global(
                Family::QuditSun,
                format!("sun(n={n},k={k})"),
                vec![site; *k],
            )
        }
        KernelSpec::TensorProduct(parts) => {
            if parts.is_empty() {
                return Err(Error::Argument(
                    "tensor-product kernel needs components".into(),
                ));
            }
            let dim: usize = parts.iter().map(Kernel::dim).product();
            check_cap(dim)?;
            let sites = parts
                .iter()
                .flat_map(|p| p.rotation.sites().iter().cloned())
                .collect();
            let parity = parts
                .iter()
                .skip(1)
                .fold(parts[0].parity.clone(), |acc, p| {
                    acc.iter()
                        .flat_map(|a| p.parity.iter().map(move |b| a * b))
                        .collect()
                });
            let frame = if parts.iter().any(|p| p.frame.is_some()) {
                let fs: Vec<ComplexMatrix> = parts
                    .iter()
                    .map(|p| p.frame.clone().unwrap_or_else(|| identity(p.dim())))
                    .collect();
                Some(crate::algebra::kron_all(&fs)?)
            } else {
                None
            };
            let label = format!(
                "tensor[{}]",
                parts
                    .iter()
                    .map(|p| p.label.as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            );
            Ok(Kernel {
                family: Family::TensorProduct,
                label,
                rotation: RotationFamily::new(sites),
                parity,
                frame,
            })
        }
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    u32::try_from(exp).ok().and_then(|e| base.checked_pow(e))
}

impl Kernel {
    fn global(family: Family, label: String, sites: Vec<Site>) -> Result<Self> {
        let rotation = RotationFamily::new(sites);
        let parity = parity_entries(rotation.dim())?;
        Ok(Kernel {
            family,
            label,
            rotation,
            parity,
            frame: None,
        })
    }

    pub fn qubit() -> Self {
        make_kernel(&KernelSpec::Qubit).expect("qubit kernel is always valid")
    }

    pub fn spin_j(j: HalfInteger) -> Result<Self> {
        make_kernel(&KernelSpec::SpinJ(j))
    }

    pub fn multiqubit(k: usize) -> Result<Self> {
        make_kernel(&KernelSpec::Multiqubit(k))
    }

    pub fn qudit_sun(n: usize, k: usize) -> Result<Self> {
        make_kernel(&KernelSpec::QuditSun { n, k })
    }

    pub fn tensor(parts: Vec<Kernel>) -> Result<Self> {
        make_kernel(&KernelSpec::TensorProduct(parts))
    }

    /// `k` qubit kernels tensored together.
    pub fn tensor_qubits(k: usize) -> Result<Self> {
        Kernel::tensor(vec![Kernel::qubit(); k])
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.parity.len()
    }

    pub fn sites(&self) -> &[Site] {
        self.rotation.sites()
    }

    pub fn rotation(&self) -> &RotationFamily {
        &self.rotation
    }

    pub fn spec(&self) -> SymmetrySpec {
        SymmetrySpec {
            sites: self.sites().iter().map(|s| (s.group(), s.dim())).collect(),
        }
    }

    pub fn parity_diagonal(&self) -> &[f64] {
        &self.parity
    }

    pub fn parity(&self) -> ComplexMatrix {
        diagonal(&self.parity)
    }

    pub fn frame_rotation(&self) -> Option<&ComplexMatrix> {
        self.frame.as_ref()
    }

    /// Maximum per-site harmonic degree of the kernel's matrix elements.
    pub fn harmonic_degree(&self) -> usize {
        self.sites()
            .iter()
            .map(Site::harmonic_degree)
            .max()
            .unwrap_or(1)
    }

    /// `Δ(Ω)`, or `V† Δ(Ω) V` for a rotated kernel.
    pub fn evaluate(&self, point: &PhasePoint) -> Result<ComplexMatrix> {
        let u = self.rotation.evaluate(point)?;
        let d = self.dim() as f64;
        let mut scaled = u.clone();
        for (mut col, p) in scaled.column_iter_mut().zip(&self.parity) {
            col *= crate::algebra::re(p / d);
        }
        let delta = scaled * u.adjoint();
        Ok(match &self.frame {
            Some(v) => v.adjoint() * delta * v,
            None => delta,
        })
    }

    /// `𝕌(Ω)|fiducial⟩`, pulled back by `V†` for a rotated kernel.
    pub fn coherent_state(&self, point: &PhasePoint) -> Result<ComplexVector> {
        let psi = self.rotation.coherent_state(point)?;
        Ok(match &self.frame {
            Some(v) => v.adjoint() * psi,
            None => psi,
        })
    }

    /// The kernel `V† Δ(Ω) V`.
    pub fn rotated(&self, v: &ComplexMatrix) -> Result<Kernel> {
        rotated_kernel(self, v)
    }
}

/// Rotated kernel `Δ̃(Ω) = V† Δ(Ω) V`, so that
/// `Tr[V A₀ V† Δ(Ω)] = Tr[A₀ Δ̃(Ω)]`.
pub fn rotated_kernel(kernel: &Kernel, v: &ComplexMatrix) -> Result<Kernel> {
    let d = kernel.dim();
    if v.nrows() != d || v.ncols() != d {
        return Err(Error::Argument(format!(
            "rotation is {}x{}, kernel dimension is {d}",
            v.nrows(),
            v.ncols()
        )));
    }
    let residual = unitarity_residual(v);
    if residual > 1e-10 {
        return Err(Error::ContractViolation(format!(
            "kernel rotation is not unitary (residual {residual:e})"
        )));
    }
    let frame = match &kernel.frame {
        // V₂† (V₁† Δ V₁) V₂ = (V₁V₂)† Δ (V₁V₂)
        Some(v1) => v1 * v,
        None => v.clone(),
    };
    Ok(Kernel {
        family: kernel.family,
        label: format!("{}~rotated", kernel.label),
        rotation: kernel.rotation.clone(),
        parity: kernel.parity.clone(),
        frame: Some(frame),
    })
}
