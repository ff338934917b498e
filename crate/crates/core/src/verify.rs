//! Frame-operator checks of the five correspondence conditions and
//! dual-frame reconstruction.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    expi_hermitian, frobenius, hermiticity_residual, identity, kron_all, max_abs, unvectorize,
    vectorize, ComplexMatrix, ComplexVector,
};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::phase_space::{integrate, monte_carlo_quadrature, wigner_values, Quadrature};
use crate::rotations::PhasePoint;
use crate::state::DensityOperator;

/// Largest operator-space dimension `D²` for which a frame is assembled.
pub const MAX_FRAME_SIZE: usize = 4096;
/// Frame eigenvalues at or below this are treated as zero.
pub const COMPLETENESS_CUTOFF: f64 = 1e-8;

const CHUNK: usize = 128;

fn check_frame_size(kernel: &Kernel) -> Result<usize> {
    let d2 = kernel.dim() * kernel.dim();
    if d2 > MAX_FRAME_SIZE {
        return Err(Error::Resource(format!(
            "frame operator would be {d2}x{d2}; the cap is D^2 <= {MAX_FRAME_SIZE}"
        )));
    }
    Ok(d2)
}

/// Columns `vec(Δ(Ωᵢ))` for a run of points.
fn kernel_columns(kernel: &Kernel, points: &[PhasePoint]) -> Result<ComplexMatrix> {
    let cols: Vec<ComplexVector> = points
        .par_iter()
        .map(|p| kernel.evaluate(p).map(|m| vectorize(&m)))
        .collect::<Result<_>>()?;
    Ok(ComplexMatrix::from_columns(&cols))
}

/// `S = Σᵢ wᵢ vec(Δ(Ωᵢ)) vec(Δ(Ωᵢ))†`, accumulated over fixed-size chunks in
/// point order.
pub fn frame_superoperator(kernel: &Kernel, quadrature: &Quadrature) -> Result<ComplexMatrix> {
    let d2 = check_frame_size(kernel)?;
    let mut s = ComplexMatrix::zeros(d2, d2);
    for (pts, ws) in quadrature
        .points
        .chunks(CHUNK)
        .zip(quadrature.weights.chunks(CHUNK))
    {
        let b = kernel_columns(kernel, pts)?;
        let mut bw = b.clone();
        for (mut col, w) in bw.column_iter_mut().zip(ws) {
            col.scale_mut(*w);
        }
        s.gemm(
            Complex64::new(1.0, 0.0),
            &bw,
            &b.adjoint(),
            Complex64::new(1.0, 0.0),
        );
    }
    // Exact Hermiticity so the eigensolver sees a Hermitian input.
    Ok((&s + s.adjoint()).unscale(2.0))
}

/// Eigen-decomposed frame operator.
#[derive(Debug, Clone)]
pub struct FrameSpectrum {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl FrameSpectrum {
    pub fn of(s: &ComplexMatrix) -> Self {
        let eig = SymmetricEigen::new(s.clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let cols: Vec<ComplexVector> = order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect();
        FrameSpectrum {
            values,
            vectors: ComplexMatrix::from_columns(&cols),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `max |λ - 1|`.
    pub fn self_duality_residual(&self) -> f64 {
        self.values
            .iter()
            .map(|l| (l - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_complete(&self) -> bool {
        self.min() > COMPLETENESS_CUTOFF
    }

    /// `S⁻¹` from the eigendecomposition.
    pub fn inverse(&self) -> Result<ComplexMatrix> {
        if !self.is_complete() {
            return Err(Error::SingularFrame {
                min_eigenvalue: self.min(),
            });
        }
        let mut scaled = self.vectors.clone();
        for (mut col, l) in scaled.column_iter_mut().zip(&self.values) {
            col.unscale_mut(*l);
        }
        Ok(scaled * self.vectors.adjoint())
    }
}

/// Canonical dual frame `Δ̃(Ω) = unvec(S⁻¹ vec(Δ(Ω)))` of a kernel under a
/// quadrature.
#[derive(Debug, Clone)]
pub struct DualKernel {
    kernel: Kernel,
    inverse: ComplexMatrix,
    spectrum: FrameSpectrum,
}

impl DualKernel {
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn spectrum(&self) -> &FrameSpectrum {
        &self.spectrum
    }

    pub fn frame_inverse(&self) -> &ComplexMatrix {
        &self.inverse
    }

    pub fn evaluate(&self, point: &PhasePoint) -> Result<ComplexMatrix> {
        let v = vectorize(&self.kernel.evaluate(point)?);
        unvectorize(&(&self.inverse * v))
    }

    /// `ρ = Σᵢ wᵢ W(Ωᵢ) Δ̃(Ωᵢ)`, computed as `S⁻¹` applied to `Σᵢ wᵢ W(Ωᵢ) Δ(Ωᵢ)`.
    pub fn reconstruct(&self, values: &[f64], quadrature: &Quadrature) -> Result<DensityOperator> {
        if values.len() != quadrature.len() {
            return Err(Error::Argument(format!(
                "{} values for {} quadrature points",
                values.len(),
                quadrature.len()
            )));
        }
        let d = self.kernel.dim();
        let mut acc = ComplexVector::zeros(d * d);
        for ((pts, ws), vs) in quadrature
            .points
            .chunks(CHUNK)
            .zip(quadrature.weights.chunks(CHUNK))
            .zip(values.chunks(CHUNK))
        {
            let b = kernel_columns(&self.kernel, pts)?;
            let coef = ComplexVector::from_iterator(
                ws.len(),
                ws.iter().zip(vs).map(|(w, v)| Complex64::new(w * v, 0.0)),
            );
            acc.gemv(
                Complex64::new(1.0, 0.0),
                &b,
                &coef,
                Complex64::new(1.0, 0.0),
            );
        }
        let m = unvectorize(&(&self.inverse * acc))?;
        DensityOperator::projected(m, crate::state::LOAD_TOL)
    }
}

pub fn dual_kernel(kernel: &Kernel, quadrature: &Quadrature) -> Result<DualKernel> {
    let s = frame_superoperator(kernel, quadrature)?;
    let spectrum = FrameSpectrum::of(&s);
    Ok(DualKernel {
        kernel: kernel.clone(),
        inverse: spectrum.inverse()?,
        spectrum,
    })
}

/// Inverse Wigner map through the dual frame.
pub fn reconstruct(
    values: &[f64],
    kernel: &Kernel,
    quadrature: &Quadrature,
) -> Result<DensityOperator> {
    dual_kernel(kernel, quadrature)?.reconstruct(values, quadrature)
}

/// `max ‖Σᵢ wᵢ vec(Δ̃ᵢ) vec(Δᵢ)† - I‖`.
pub fn biorthogonality_residual(dual: &DualKernel, quadrature: &Quadrature) -> Result<f64> {
    let d2 = dual.kernel.dim().pow(2);
    let mut acc = ComplexMatrix::zeros(d2, d2);
    for (pts, ws) in quadrature
        .points
        .chunks(CHUNK)
        .zip(quadrature.weights.chunks(CHUNK))
    {
        let b = kernel_columns(&dual.kernel, pts)?;
        let mut bw = &dual.inverse * &b;
        for (mut col, w) in bw.column_iter_mut().zip(ws) {
            col.scale_mut(*w);
        }
        acc.gemm(
            Complex64::new(1.0, 0.0),
            &bw,
            &b.adjoint(),
            Complex64::new(1.0, 0.0),
        );
    }
    Ok(max_abs(&(acc - identity(d2))))
}

/// Verification summary. Serialized with string and float fields only.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FrameReport {
    pub kernel: String,
    pub quadrature: String,
    pub hermiticity_residual: f64,
    pub reality_residual: f64,
    pub normalization_residual: f64,
    pub standardization_residual: f64,
    pub frame_spectrum: Vec<f64>,
    pub frame_trace: f64,
    pub self_duality_residual: f64,
    pub covariance_residual: f64,
    pub min_frame_eigenvalue: f64,
    /// `"true"` or `"false"`.
    pub completeness: String,
    /// Absent when the frame is singular.
    pub reconstruction_error: Option<f64>,
}

impl FrameReport {
    pub fn is_complete(&self) -> bool {
        self.completeness == "true"
    }
}

/// Probe states: `probes` fixed-seed Haar-random pure states, then `I/D`.
pub fn probe_states(dim: usize, probes: usize, seed: u64) -> Vec<DensityOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<DensityOperator> = (0..probes)
        .map(|_| DensityOperator::random_pure(dim, &mut rng))
        .collect();
    out.push(DensityOperator::maximally_mixed(dim));
    out
}

/// `max |W_{gρg†}(Ω) - W_ρ(g⁻¹·Ω)|` over random collective φ translations
/// and θ translations at φ = 0.
pub fn covariance_residual(
    kernel: &Kernel,
    states: &[DensityOperator],
    shifts: usize,
    points: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
    let sample = monte_carlo_quadrature(kernel, points, seed.wrapping_add(1))?.points;
    let frame = kernel.frame_rotation();
    let lift = |g: ComplexMatrix| match frame {
        Some(v) => v.adjoint() * g * v,
        None => g,
    };
    let mut worst = 0.0f64;
    for _ in 0..shifts {
        let delta: f64 = rng.random_range(-1.0..1.0);
        for tilt in [false, true] {
            let gens: Vec<ComplexMatrix> = kernel
                .sites()
                .iter()
                .map(|s| {
                    let h = if tilt {
                        s.tilt_generator()
                    } else {
                        s.phase_generator()
                    };
                    expi_hermitian(&h, delta)
                })
                .collect::<Result<_>>()?;
            let g = lift(kron_all(&gens)?);
            let base: Vec<PhasePoint> = sample
                .iter()
                .map(|p| {
                    let mut p = p.clone();
                    if tilt {
                        p.sites
                            .iter_mut()
                            .for_each(|s| s.phi.iter_mut().for_each(|f| *f = 0.0));
                    }
                    p
                })
                .collect();
            let moved: Vec<PhasePoint> = base
                .iter()
                .map(|p| {
                    let mut p = p.clone();
                    for s in &mut p.sites {
                        if tilt {
                            s.theta[0] -= delta;
                        } else {
                            s.phi[0] -= delta;
                        }
                    }
                    p
                })
                .collect();
            for rho in states {
                let conj = DensityOperator::projected(&g * rho.matrix() * g.adjoint(), 1e-10)?;
                let lhs = wigner_values(&conj, kernel, &base)?;
                let rhs = wigner_values(rho, kernel, &moved)?;
                for (a, b) in lhs.iter().zip(&rhs) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Fills every [`FrameReport`] field.
pub fn sw_report(
    kernel: &Kernel,
    quadrature: &Quadrature,
    probes: usize,
    seed: u64,
) -> Result<FrameReport> {
    check_frame_size(kernel)?;
    let d = kernel.dim();
    let mut herm = 0.0f64;
    let mut standard = ComplexMatrix::zeros(d, d);
    for (p, w) in quadrature.points.iter().zip(&quadrature.weights) {
        let delta = kernel.evaluate(p)?;
        herm = herm.max(hermiticity_residual(&delta));
        standard += delta.scale(*w);
    }
    let standardization = max_abs(&(standard - identity(d)));

    let s = frame_superoperator(kernel, quadrature)?;
    let frame_trace = crate::algebra::trace(&s).re;
    let spectrum = FrameSpectrum::of(&s);
    let states = probe_states(d, probes, seed);

    // Dense reality check on a bounded subset of points.
    let stride = (quadrature.len() / 200).max(1);
    let mut reality = 0.0f64;
    for p in quadrature.points.iter().step_by(stride) {
        let delta = kernel.evaluate(p)?;
        for rho in &states {
            reality = reality.max(frobenius(rho.matrix(), &delta)?.im.abs());
        }
    }

    let mut normalization = 0.0f64;
    let mut fields = Vec::with_capacity(states.len());
    for rho in &states {
        let w = wigner_values(rho, kernel, &quadrature.points)?;
        normalization = normalization.max((integrate(&w, quadrature)? - 1.0).abs());
        fields.push(w);
    }

    let covariance = covariance_residual(kernel, &states, 3, 20, seed)?;

    let reconstruction_error = match spectrum.inverse() {
        Ok(inverse) => {
            let dual = DualKernel {
                kernel: kernel.clone(),
                inverse,
                spectrum: spectrum.clone(),
            };
            let mut err = 0.0f64;
            for (rho, w) in states.iter().zip(&fields) {
                let rec = dual.reconstruct(w, quadrature)?;
                err = err.max(max_abs(&(rec.matrix() - rho.matrix())));
            }
            Some(err)
        }
        Err(Error::SingularFrame { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(FrameReport {
        kernel: kernel.label().to_string(),
        quadrature: quadrature.description.clone(),
        hermiticity_residual: herm,
        reality_residual: reality,
        normalization_residual: normalization,
        standardization_residual: standardization,
        frame_trace,
        self_duality_residual: spectrum.self_duality_residual(),
        covariance_residual: covariance,
        min_frame_eigenvalue: spectrum.min(),
        completeness: spectrum.is_complete().to_string(),
        frame_spectrum: spectrum.values,
        reconstruction_error,
    })
}

/// Exact frame eigenvalues next to independent Monte Carlo estimates
/// `λᵢ ≈ D · mean |⟨vᵢ, vec Δ(Ω)⟩|²`.
#[derive(Debug, Clone)]
pub struct SpectrumComparison {
    pub exact: Vec<f64>,
    pub estimate: Vec<f64>,
    pub std_error: Vec<f64>,
}

impl SpectrumComparison {
    /// Largest `|exact - estimate| / max(σ·SE, floor)`; at most 1 means agreement.
    pub fn worst_ratio(&self, sigmas: f64, floor: f64) -> f64 {
        self.exact
            .iter()
            .zip(&self.estimate)
            .zip(&self.std_error)
            .map(|((e, m), se)| (e - m).abs() / (sigmas * se).max(floor))
            .fold(0.0, f64::max)
    }
}

pub fn monte_carlo_spectrum(
    kernel: &Kernel,
    spectrum: &FrameSpectrum,
    samples: usize,
    seed: u64,
) -> Result<SpectrumComparison> {
    let mc = monte_carlo_quadrature(kernel, samples, seed)?;
    let d = kernel.dim() as f64;
    let n = spectrum.values.len();
    let vh = spectrum.vectors.adjoint();
    // Per-chunk sums of x and x², combined in chunk order.
    let partials: Vec<(Vec<f64>, Vec<f64>)> = mc
        .points
        .par_chunks(1024)
        .map(|pts| -> Result<(Vec<f64>, Vec<f64>)> {
            let b = kernel_columns(kernel, pts)?;
            let proj = &vh * b;
            let mut s1 = vec![0.0; n];
            let mut s2 = vec![0.0; n];
            for col in proj.column_iter() {
                for (i, z) in col.iter().enumerate() {
                    let x = d * z.norm_sqr();
                    s1[i] += x;
                    s2[i] += x * x;
                }
            }
            Ok((s1, s2))
        })
        .collect::<Result<_>>()?;
    let mut s1 = vec![0.0; n];
    let mut s2 = vec![0.0; n];
    for (a, b) in &partials {
        for i in 0..n {
            s1[i] += a[i];
            s2[i] += b[i];
        }
    }
    let m = samples as f64;
    let estimate: Vec<f64> = s1.iter().map(|s| s / m).collect();
    let std_error = s2
        .iter()
        .zip(&estimate)
        .map(|(s, mean)| {
            let var = (s / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
            (var / m).sqrt()
        })
        .collect();
    Ok(SpectrumComparison {
        exact: spectrum.values.clone(),
        estimate,
        std_error,
    })
}
