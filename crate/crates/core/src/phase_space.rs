//! Measures, quadrature and Wigner/Q fields over the kernel phase spaces.
//!
//! The measure on every site is normalized so that its total equals the site
//! dimension; the product measure then integrates to `D`, which is what
//! `∫ Δ dμ = I` requires given `Tr Δ = 1`.
//!
//! | site   | coordinates                        | density                            |
//! |--------|------------------------------------|------------------------------------|
//! | qubit  | θ ∈ [0, π/2], φ ∈ [0, π)           | `(2/π) sin 2θ`                     |
//! | spin-j | θ ∈ [0, π], φ ∈ [0, 2π)            | `((2j+1)/4π) sin θ`                |
//! | SU(N)  | θ_l ∈ [0, π/2], φ_l ∈ [0, T_l)     | `∝ Π_l sin 2θ_l sin^{2(l-1)} θ_l`  |
//!
//! The SU(N) density is the Fubini-Study volume of the coherent-state
//! manifold in these coordinates.

use std::f64::consts::PI;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::algebra::{kron_all, ComplexMatrix};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::rotations::{sun_phi_multiplier, sun_phi_period, PhasePoint, Site, SiteAngles};
use crate::state::DensityOperator;

pub const DEFAULT_POINT_CAP: usize = 10_000_000;
pub const MAX_TENSOR_SITES: usize = 3;
/// Largest accepted imaginary part of `Tr[ρ Δ]`.
pub const REALITY_TOL: f64 = 1e-10;

const DOMAIN_SLACK: f64 = 1e-12;

/// Coordinate box of one site.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteDomain {
    /// Closed θ interval per component.
    pub theta: Vec<(f64, f64)>,
    /// Half-open φ interval `[0, period)` per component.
    pub phi_period: Vec<f64>,
}

pub fn site_domain(site: &Site) -> SiteDomain {
    match site {
        Site::Qubit => SiteDomain {
            theta: vec![(0.0, PI / 2.0)],
            phi_period: vec![PI],
        },
        Site::Spin(_) => SiteDomain {
            theta: vec![(0.0, PI)],
            phi_period: vec![2.0 * PI],
        },
        Site::Sun(n) => SiteDomain {
            theta: vec![(0.0, PI / 2.0); n - 1],
            phi_period: (1..*n).map(|l| sun_phi_period(*n, l)).collect(),
        },
    }
}

fn sun_density_constant(n: usize) -> f64 {
    // ∫ sin2θ sin^{2(l-1)}θ dθ over [0, π/2] is 1/l.
    let volume: f64 = (1..n).map(|l| sun_phi_period(n, l) / l as f64).product();
    n as f64 / volume
}

/// Density of one site's measure, without a domain check.
pub fn site_density(site: &Site, angles: &SiteAngles) -> f64 {
    match site {
        Site::Qubit => 2.0 / PI * (2.0 * angles.theta[0]).sin(),
        Site::Spin(g) => g.j.multiplicity() as f64 / (4.0 * PI) * angles.theta[0].sin(),
        Site::Sun(n) => {
            let shape: f64 = angles
                .theta
                .iter()
                .enumerate()
                .map(|(i, t)| (2.0 * t).sin() * t.sin().powi(2 * i as i32))
                .product();
            sun_density_constant(*n) * shape
        }
    }
}

fn check_in_domain(site: &Site, angles: &SiteAngles) -> Result<()> {
    site.check(angles)?;
    let dom = site_domain(site);
    for (t, (lo, hi)) in angles.theta.iter().zip(&dom.theta) {
        if *t < lo - DOMAIN_SLACK || *t > hi + DOMAIN_SLACK {
            return Err(Error::Domain(format!("theta = {t} outside [{lo}, {hi}]")));
        }
    }
    for (p, period) in angles.phi.iter().zip(&dom.phi_period) {
        if *p < -DOMAIN_SLACK || *p >= period + DOMAIN_SLACK {
            return Err(Error::Domain(format!("phi = {p} outside [0, {period})")));
        }
    }
    Ok(())
}

/// Product of per-site densities at a point of the fundamental domain.
pub fn measure_density(kernel: &Kernel, point: &PhasePoint) -> Result<f64> {
    kernel.rotation().check(point)?;
    kernel
        .sites()
        .iter()
        .zip(&point.sites)
        .map(|(s, a)| check_in_domain(s, a).map(|_| site_density(s, a)))
        .product()
}

/// Node counts for [`build_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureOrder {
    /// Enough nodes that every integrand of trigonometric degree `<= p` per
    /// site is integrated exactly.
    Exact(usize),
    /// Fixed node counts for every cosine-type and every φ axis.
    PerAxis { cosine: usize, phi: usize },
}

/// Weighted node set. Weights include the measure density and sum to `D`.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub points: Vec<PhasePoint>,
    pub weights: Vec<f64>,
    /// Highest per-site degree integrated exactly, if known.
    pub exactness: Option<usize>,
    pub description: String,
    pub dim: usize,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }
}

/// `(abscissa, weight)`.
type Node = (f64, f64);

/// Gauss-Legendre nodes on `[0, 1]` with an extra `x^power` weight folded in.
fn gauss_unit(n: usize, power: usize) -> Vec<Node> {
    let rule = GaussLegendre::new(n.max(2)).expect("at least two nodes");
    let mut pairs: Vec<(f64, f64)> = rule
        .into_node_weight_pairs()
        .into_iter()
        .map(|(x, w)| {
            let t = 0.5 * (x + 1.0);
            (t, 0.5 * w * t.powi(power as i32))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

fn uniform(m: usize, period: f64) -> Vec<f64> {
    (0..m).map(|i| period * i as f64 / m as f64).collect()
}

fn ceil_half(x: usize) -> usize {
    x.div_ceil(2)
}

/// Per-site tensor rule, weights including the site density.
fn site_rule(site: &Site, order: QuadratureOrder) -> Result<Vec<(SiteAngles, f64)>> {
    let cos_n = |extra: usize| match order {
        QuadratureOrder::Exact(p) => ceil_half(p + 1 + extra).max(2),
        QuadratureOrder::PerAxis { cosine, .. } => cosine,
    };
    let phi_m = |mult: usize| match order {
        QuadratureOrder::Exact(p) => (p * mult + 1).max(2),
        QuadratureOrder::PerAxis { phi, .. } => phi,
    };
    if let QuadratureOrder::PerAxis { cosine, phi } = order {
        if cosine < 2 || phi < 2 {
            return Err(Error::Argument(format!(
                "quadrature needs at least 2 nodes per axis, got {cosine} and {phi}"
            )));
        }
    }
    match site {
        Site::Qubit | Site::Spin(_) => {
            let (n, m) = (cos_n(0), phi_m(1));
            let period = site_domain(site).phi_period[0];
            let total = site.dim() as f64;
            // u = cos 2θ (qubit) or cos θ (spin-j) is uniformly distributed.
            let half_angle = matches!(site, Site::Qubit);
            let mut out = Vec::with_capacity(n * m);
            for (x, w) in gauss_unit(n, 0) {
                let u = 2.0 * x - 1.0;
                let theta = if half_angle { u.acos() / 2.0 } else { u.acos() };
                for phi in uniform(m, period) {
                    out.push((SiteAngles::new(theta, phi), total * w / m as f64));
                }
            }
            Ok(out)
        }
        Site::Sun(nn) => {
            let nn = *nn;
            // Per l: p_l = sin²θ_l with weight p^{l-1} dp on [0, 1].
            let axes: Vec<(Vec<Node>, Vec<f64>)> = (1..nn)
                .map(|l| {
                    (
                        gauss_unit(cos_n(l - 1), l - 1),
                        uniform(phi_m(sun_phi_multiplier(nn, l)), sun_phi_period(nn, l)),
                    )
                })
                .collect();
            let mut out: Vec<(SiteAngles, f64)> = vec![(SiteAngles::multi(vec![], vec![]), 1.0)];
            for (gauss, phis) in &axes {
                let mut next = Vec::with_capacity(out.len() * gauss.len() * phis.len());
                for (angles, w) in &out {
                    for (p, wp) in gauss {
                        let theta = p.sqrt().asin();
                        for phi in phis {
                            let mut a = angles.clone();
                            a.theta.push(theta);
                            a.phi.push(*phi);
                            next.push((a, w * wp / phis.len() as f64));
                        }
                    }
                }
                out = next;
            }
            let total = pairwise_sum(&out.iter().map(|x| x.1).collect::<Vec<_>>());
            let scale = nn as f64 / total;
            Ok(out.into_iter().map(|(a, w)| (a, w * scale)).collect())
        }
    }
}

fn rule_size(site: &Site, order: QuadratureOrder) -> usize {
    let n = site.angle_count();
    match order {
        QuadratureOrder::PerAxis { cosine, phi } => (cosine * phi).saturating_pow(n as u32),
        QuadratureOrder::Exact(p) => match site {
            Site::Qubit | Site::Spin(_) => ceil_half(p + 1).max(2) * (p + 1).max(2),
            Site::Sun(nn) => (1..*nn)
                .map(|l| ceil_half(p + l).max(2) * (p * sun_phi_multiplier(*nn, l) + 1).max(2))
                .fold(1usize, |a, b| a.saturating_mul(b)),
        },
    }
}

pub fn build_quadrature(kernel: &Kernel, order: QuadratureOrder) -> Result<Quadrature> {
    build_quadrature_with_cap(kernel, order, DEFAULT_POINT_CAP)
}

/// Tensor-product quadrature over all sites.
pub fn build_quadrature_with_cap(
    kernel: &Kernel,
    order: QuadratureOrder,
    point_cap: usize,
) -> Result<Quadrature> {
    let sites = kernel.sites();
    if sites.len() > MAX_TENSOR_SITES {
        return Err(Error::Resource(format!(
            "tensor quadrature supports at most {MAX_TENSOR_SITES} sites, kernel has {}; \
             use Monte Carlo quadrature or a slice",
            sites.len()
        )));
    }
    let size = sites
        .iter()
        .map(|s| rule_size(s, order))
        .fold(1usize, |a, b| a.saturating_mul(b));
    if size > point_cap {
        return Err(Error::Resource(format!(
            "tensor quadrature would need {size} points (cap {point_cap}); use Monte Carlo quadrature"
        )));
    }
    let rules: Vec<Vec<(SiteAngles, f64)>> = sites
        .iter()
        .map(|s| site_rule(s, order))
        .collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(size);
    let mut weights = Vec::with_capacity(size);
    let mut idx = vec![0usize; rules.len()];
    'outer: loop {
        let mut w = 1.0;
        let mut angles = Vec::with_capacity(rules.len());
        for (r, &i) in rules.iter().zip(&idx) {
            angles.push(r[i].0.clone());
            w *= r[i].1;
        }
        points.push(PhasePoint::new(angles));
        weights.push(w);
        for pos in (0..idx.len()).rev() {
            idx[pos] += 1;
            if idx[pos] < rules[pos].len() {
                continue 'outer;
            }
            idx[pos] = 0;
        }
        break;
    }
    let (exactness, description) = match order {
        QuadratureOrder::Exact(p) => (Some(p), format!("exact({p})")),
        QuadratureOrder::PerAxis { cosine, phi } => (None, format!("grid({cosine}x{phi})")),
    };
    Ok(Quadrature {
        points,
        weights,
        exactness,
        description,
        dim: kernel.dim(),
    })
}

fn sample_site<R: Rng + ?Sized>(site: &Site, rng: &mut R) -> SiteAngles {
    let dom = site_domain(site);
    match site {
        Site::Qubit => {
            let u: f64 = 2.0 * rng.random::<f64>() - 1.0;
            SiteAngles::new(u.acos() / 2.0, rng.random::<f64>() * dom.phi_period[0])
        }
        Site::Spin(_) => {
            let u: f64 = 2.0 * rng.random::<f64>() - 1.0;
            SiteAngles::new(u.acos(), rng.random::<f64>() * dom.phi_period[0])
        }
        Site::Sun(n) => {
            let mut theta = Vec::with_capacity(n - 1);
            let mut phi = Vec::with_capacity(n - 1);
            for l in 1..*n {
                // p = sin²θ has density ∝ p^{l-1} on [0, 1].
                let p = rng.random::<f64>().powf(1.0 / l as f64);
                theta.push(p.sqrt().asin());
                phi.push(rng.random::<f64>() * dom.phi_period[l - 1]);
            }
            SiteAngles::multi(theta, phi)
        }
    }
}

/// I.i.d. points from the normalized measure with equal weights `D / samples`.
pub fn monte_carlo_quadrature(kernel: &Kernel, samples: usize, seed: u64) -> Result<Quadrature> {
    if samples == 0 {
        return Err(Error::Argument(
            "Monte Carlo quadrature needs samples >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<PhasePoint> = (0..samples)
        .map(|_| {
            PhasePoint::new(
                kernel
                    .sites()
                    .iter()
                    .map(|s| sample_site(s, &mut rng))
                    .collect(),
            )
        })
        .collect();
    Ok(Quadrature {
        points,
        weights: vec![kernel.dim() as f64 / samples as f64; samples],
        exactness: None,
        description: format!("mc({samples},seed={seed})"),
        dim: kernel.dim(),
    })
}

/// Real-valued field sampled at a list of phase points.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub points: Vec<PhasePoint>,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `M ← M (I ⊗ u ⊗ I)` with `u` acting on `site`.
fn apply_right_local(
    m: &ComplexMatrix,
    dims: &[usize],
    site: usize,
    u: &ComplexMatrix,
) -> ComplexMatrix {
    let rows = m.nrows();
    let d = dims[site];
    let inner: usize = dims[site + 1..].iter().product();
    let outer: usize = dims[..site].iter().product();
    let src = m.as_slice();
    let mut out = ComplexMatrix::zeros(rows, m.ncols());
    let dst = out.as_mut_slice();
    for l in 0..outer {
        for r in 0..inner {
            for b in 0..d {
                let col_out = (l * d + b) * inner + r;
                let out_col = &mut dst[col_out * rows..(col_out + 1) * rows];
                for a in 0..d {
                    let coef = u[(a, b)];
                    if coef == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let col_in = (l * d + a) * inner + r;
                    let in_col = &src[col_in * rows..(col_in + 1) * rows];
                    for (o, x) in out_col.iter_mut().zip(in_col) {
                        *o += coef * x;
                    }
                }
            }
        }
    }
    out
}

/// `Tr[ρ' Δ(Ω)]` for the unrotated kernel, where `ρ'` is already conjugated
/// into the kernel frame. Uses the tensor structure of `𝕌(Ω)` and the
/// diagonal parity: `Tr[ρ' 𝕌 Π 𝕌†] = Σᵢ πᵢ (𝕌† ρ' 𝕌)ᵢᵢ`.
fn weyl_value(rho: &ComplexMatrix, kernel: &Kernel, point: &PhasePoint) -> Result<Complex64> {
    let us = kernel.rotation().site_unitaries(point)?;
    let dims = kernel.rotation().site_dims();
    let mut m = rho.clone();
    for (s, u) in us.iter().enumerate() {
        m = apply_right_local(&m, &dims, s, u);
    }
    let u = kron_all(&us)?;
    let d = kernel.dim();
    let parity = kernel.parity_diagonal();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, p) in parity.iter().enumerate() {
        let mc = m.column(i);
        let uc = u.column(i);
        let diag: Complex64 = mc.iter().zip(uc.iter()).map(|(x, y)| x.conj() * y).sum();
        acc += diag * p;
    }
    Ok(acc / d as f64)
}

fn check_dims(rho: &DensityOperator, kernel: &Kernel) -> Result<()> {
    if rho.dim() != kernel.dim() {
        return Err(Error::Argument(format!(
            "state dimension {} does not match kernel dimension {}",
            rho.dim(),
            kernel.dim()
        )));
    }
    Ok(())
}

fn in_kernel_frame(rho: &DensityOperator, kernel: &Kernel) -> ComplexMatrix {
    match kernel.frame_rotation() {
        Some(v) => v * rho.matrix() * v.adjoint(),
        None => rho.matrix().clone(),
    }
}

/// Wigner values `Tr[ρ Δ(Ω)]` without the [`ScalarField`] wrapper.
pub fn wigner_values(
    rho: &DensityOperator,
    kernel: &Kernel,
    points: &[PhasePoint],
) -> Result<Vec<f64>> {
    check_dims(rho, kernel)?;
    let frame = in_kernel_frame(rho, kernel);
    points
        .par_iter()
        .map(|p| {
            let w = weyl_value(&frame, kernel, p)?;
            if w.im.abs() > REALITY_TOL {
                return Err(Error::NumericContract(format!(
                    "Tr[rho Delta] has imaginary part {:e}",
                    w.im
                )));
            }
            Ok(w.re)
        })
        .collect()
}

/// `W(Ω) = Tr[ρ Δ(Ω)]`.
pub fn wigner(
    rho: &DensityOperator,
    kernel: &Kernel,
    points: &[PhasePoint],
) -> Result<ScalarField> {
    Ok(ScalarField {
        values: wigner_values(rho, kernel, points)?,
        points: points.to_vec(),
    })
}

/// Husimi values `⟨Ω|ρ|Ω⟩` with `|Ω⟩ = 𝕌(Ω)|fiducial⟩`.
pub fn q_values(rho: &DensityOperator, kernel: &Kernel, points: &[PhasePoint]) -> Result<Vec<f64>> {
    check_dims(rho, kernel)?;
    points
        .par_iter()
        .map(|p| {
            let psi = kernel.coherent_state(p)?;
            Ok((psi.adjoint() * rho.matrix() * &psi)[(0, 0)].re)
        })
        .collect()
}

pub fn q_function(
    rho: &DensityOperator,
    kernel: &Kernel,
    points: &[PhasePoint],
) -> Result<ScalarField> {
    Ok(ScalarField {
        values: q_values(rho, kernel, points)?,
        points: points.to_vec(),
    })
}

/// Pairwise summation with a fixed split, independent of thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `Σᵢ wᵢ fᵢ`.
pub fn integrate(values: &[f64], quadrature: &Quadrature) -> Result<f64> {
    if values.len() != quadrature.len() {
        return Err(Error::Argument(format!(
            "{} values for {} quadrature points",
            values.len(),
            quadrature.len()
        )));
    }
    let terms: Vec<f64> = values
        .iter()
        .zip(&quadrature.weights)
        .map(|(f, w)| f * w)
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `∫ W_{ρ'} W_{ρ''} dμ`.
pub fn overlap(
    rho_a: &DensityOperator,
    rho_b: &DensityOperator,
    kernel: &Kernel,
    quadrature: &Quadrature,
) -> Result<f64> {
    let wa = wigner_values(rho_a, kernel, &quadrature.points)?;
    let wb = wigner_values(rho_b, kernel, &quadrature.points)?;
    let prod: Vec<f64> = wa.iter().zip(&wb).map(|(a, b)| a * b).collect();
    integrate(&prod, quadrature)
}

/// `∫ (|W| - W) dμ / 2`.
pub fn negativity_volume(
    rho: &DensityOperator,
    kernel: &Kernel,
    quadrature: &Quadrature,
) -> Result<f64> {
    let w = wigner_values(rho, kernel, &quadrature.points)?;
    negativity_of(&w, quadrature)
}

pub fn negativity_of(values: &[f64], quadrature: &Quadrature) -> Result<f64> {
    let neg: Vec<f64> = values.iter().map(|w| (w.abs() - w) / 2.0).collect();
    integrate(&neg, quadrature)
}

/// Evenly spaced nodes including both endpoints.
pub fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.0];
    }
    (0..n)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Row-major `(θ, φ)` grid on which all `k` single-angle sites share the
/// same angles.
pub fn collective_slice(
    k: usize,
    theta_range: (f64, f64),
    phi_range: (f64, f64),
    resolution: (usize, usize),
) -> Vec<PhasePoint> {
    let phis = linspace(phi_range, resolution.1);
    linspace(theta_range, resolution.0)
        .into_iter()
        .flat_map(|t| phis.iter().map(move |&p| PhasePoint::collective(k, t, p)))
        .collect()
}

/// Collective slice for any kernel: every θ component of every site is set
/// to θ and every φ component to φ.
pub fn kernel_slice(
    kernel: &Kernel,
    theta_range: (f64, f64),
    phi_range: (f64, f64),
    resolution: (usize, usize),
) -> Vec<PhasePoint> {
    let phis = linspace(phi_range, resolution.1);
    linspace(theta_range, resolution.0)
        .into_iter()
        .flat_map(|t| {
            phis.iter().map(move |&p| {
                PhasePoint::new(
                    kernel
                        .sites()
                        .iter()
                        .map(|s| {
                            let n = s.angle_count();
                            SiteAngles::multi(vec![t; n], vec![p; n])
                        })
                        .collect(),
                )
            })
        })
        .collect()
}

fn trapezoid(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|i| if i == 0 || i + 1 == n { h / 2.0 } else { h })
        .collect()
}

/// Two-dimensional quadrature on a collective slice: trapezoid weights in θ
/// and φ times the first site's density.
pub fn slice_quadrature(
    kernel: &Kernel,
    theta_range: (f64, f64),
    phi_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<Quadrature> {
    let (rows, cols) = resolution;
    if rows < 2 || cols < 2 {
        return Err(Error::Argument(
            "slice resolution must be at least 2x2".into(),
        ));
    }
    let points = kernel_slice(kernel, theta_range, phi_range, resolution);
    let wt = trapezoid(rows, (theta_range.1 - theta_range.0) / (rows - 1) as f64);
    let wp = trapezoid(cols, (phi_range.1 - phi_range.0) / (cols - 1) as f64);
    let site = &kernel.sites()[0];
    let weights = points
        .iter()
        .enumerate()
        .map(|(i, p)| wt[i / cols] * wp[i % cols] * site_density(site, &p.sites[0]).abs())
        .collect();
    Ok(Quadrature {
        points,
        weights,
        exactness: None,
        description: format!("slice({rows}x{cols})"),
        dim: kernel.dim(),
    })
}

/// DFT magnitudes of samples taken on a uniform periodic grid.
pub fn harmonic_spectrum(values: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    let n = values.len() as f64;
    buf.iter().map(|z| z.norm() / n).collect()
}

/// Index of the largest nonzero harmonic (`1..=len/2`) of uniformly sampled
/// periodic data.
pub fn dominant_harmonic(values: &[f64]) -> usize {
    let spec = harmonic_spectrum(values);
    (1..=values.len() / 2)
        .max_by(|&a, &b| spec[a].total_cmp(&spec[b]))
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{frobenius, identity, max_abs, HalfInteger};
    use approx::assert_abs_diff_eq;

    fn j(twice: u32) -> HalfInteger {
        HalfInteger::from_twice(twice)
    }

    #[test]
    fn qubit_density_values() {
        let k = Kernel::qubit();
        assert_abs_diff_eq!(
            measure_density(&k, &PhasePoint::single(PI / 4.0, 0.3)).unwrap(),
            2.0 / PI,
            epsilon = 1e-15
        );
        assert_eq!(
            measure_density(&k, &PhasePoint::single(0.0, 0.0)).unwrap(),
            0.0
        );
        assert!(matches!(
            measure_density(&k, &PhasePoint::single(2.0, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            measure_density(&k, &PhasePoint::single(0.5, 3.5)),
            Err(Error::Domain(_))
        ));
        let s = Kernel::spin_j(j(3)).unwrap();
        assert_eq!(
            measure_density(&s, &PhasePoint::single(0.0, 1.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn quadrature_weight_sums() {
        let q = build_quadrature(&Kernel::qubit(), QuadratureOrder::Exact(4)).unwrap();
        assert_abs_diff_eq!(q.total_weight(), 2.0, epsilon = 1e-12);
        assert!(q.weights.iter().all(|w| *w > 0.0));
        let q =
            build_quadrature(&Kernel::multiqubit(2).unwrap(), QuadratureOrder::Exact(4)).unwrap();
        assert_abs_diff_eq!(q.total_weight(), 4.0, epsilon = 1e-12);
        let q =
            build_quadrature(&Kernel::qudit_sun(4, 1).unwrap(), QuadratureOrder::Exact(2)).unwrap();
        assert_abs_diff_eq!(q.total_weight(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_total_measure() {
        // ((2j+1)/4π) ∫ sinθ dθ dφ = 2j+1, checked by a fine midpoint rule.
        for twice in [1u32, 2, 7] {
            let site = Site::spin(j(twice)).unwrap();
            let n = 2000;
            let h = PI / n as f64;
            let total: f64 = (0..n)
                .map(|i| site_density(&site, &SiteAngles::new((i as f64 + 0.5) * h, 0.0)) * h)
                .sum::<f64>()
                * 2.0
                * PI;
            assert_abs_diff_eq!(total, twice as f64 + 1.0, epsilon = 1e-5);
        }
    }

    #[test]
    fn standardization_spin_three_halves() {
        let k = Kernel::spin_j(j(3)).unwrap();
        let q = build_quadrature(&k, QuadratureOrder::Exact(8)).unwrap();
        let mut acc = ComplexMatrix::zeros(4, 4);
        for (p, w) in q.points.iter().zip(&q.weights) {
            acc += k.evaluate(p).unwrap().scale(*w);
        }
        assert!(max_abs(&(acc - identity(4))) < 1e-10);
    }

    #[test]
    fn sun_density_is_fubini_study_volume() {
        // Oracle: sqrt(det g) of the pulled-back Fubini-Study metric by
        // central finite differences; its ratio to the closed form must be
        // constant over the domain.
        let n = 3;
        let site = Site::Sun(n);
        let psi = |x: &[f64]| {
            let a = SiteAngles::multi(x[..n - 1].to_vec(), x[n - 1..].to_vec());
            site.rotation(&a).unwrap() * site.fiducial()
        };
        let volume = |x: &[f64]| {
            let dimp = x.len();
            let h = 1e-5;
            let v0 = psi(x);
            let derivs: Vec<_> = (0..dimp)
                .map(|a| {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[a] += h;
                    xm[a] -= h;
                    (psi(&xp) - psi(&xm)).unscale(2.0 * h)
                })
                .collect();
            let g = nalgebra::DMatrix::<f64>::from_fn(dimp, dimp, |a, b| {
                let da = &derivs[a];
                let db = &derivs[b];
                (da.dotc(db) - da.dotc(&v0) * v0.dotc(db)).re
            });
            g.determinant().abs().sqrt()
        };
        let samples = [
            [0.3, 0.9, 0.2, 1.0],
            [1.1, 0.4, 2.0, 0.3],
            [0.7, 1.3, 5.0, 2.5],
        ];
        let ratios: Vec<f64> = samples
            .iter()
            .map(|x| {
                let a = SiteAngles::multi(x[..2].to_vec(), x[2..].to_vec());
                site_density(&site, &a) / volume(x)
            })
            .collect();
        for r in &ratios {
            assert_abs_diff_eq!(*r / ratios[0], 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn monte_carlo_properties() {
        let k = Kernel::multiqubit(2).unwrap();
        let a = monte_carlo_quadrature(&k, 1000, 42).unwrap();
        let b = monte_carlo_quadrature(&k, 1000, 42).unwrap();
        assert_eq!(a.points, b.points);
        assert_abs_diff_eq!(a.total_weight(), 4.0, epsilon = 1e-12);
        for p in &a.points {
            assert!(measure_density(&k, p).is_ok());
        }
        assert!(monte_carlo_quadrature(&k, 0, 1).is_err());
    }

    #[test]
    fn quadrature_resource_errors() {
        let k = Kernel::multiqubit(4).unwrap();
        assert!(matches!(
            build_quadrature(&k, QuadratureOrder::Exact(2)),
            Err(Error::Resource(_))
        ));
        let k = Kernel::multiqubit(3).unwrap();
        assert!(matches!(
            build_quadrature_with_cap(&k, QuadratureOrder::Exact(4), 100),
            Err(Error::Resource(_))
        ));
        assert!(build_quadrature(
            &Kernel::qubit(),
            QuadratureOrder::PerAxis { cosine: 1, phi: 4 }
        )
        .is_err());
    }

    #[test]
    fn rule_size_matches_built_size() {
        let kernels = [
            Kernel::qubit(),
            Kernel::spin_j(j(5)).unwrap(),
            Kernel::qudit_sun(3, 1).unwrap(),
            Kernel::tensor_qubits(2).unwrap(),
        ];
        for k in &kernels {
            for order in [QuadratureOrder::Exact(2), QuadratureOrder::Exact(5)] {
                let q = build_quadrature(k, order).unwrap();
                let want: usize = k.sites().iter().map(|s| rule_size(s, order)).product();
                assert_eq!(q.len(), want);
            }
        }
    }

    #[test]
    fn wigner_examples() {
        let k = Kernel::qubit();
        let zero = DensityOperator::from_pure(&crate::algebra::ComplexVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]))
        .unwrap();
        let w = wigner(&zero, &k, &[PhasePoint::single(0.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(w.values[0], (1.0 - 3f64.sqrt()) / 2.0, epsilon = 1e-15);

        // |+⟩: Bloch vector x̂, and U σ_z U† has x-component -sin2θ cos2φ.
        let plus = crate::state::make_state(&crate::state::StateSpec::Plus(1)).unwrap();
        let pts = collective_slice(1, (0.0, PI / 2.0), (0.0, PI), (7, 9));
        let w = wigner(&plus, &k, &pts).unwrap();
        for (p, v) in pts.iter().zip(&w.values) {
            let (t, f) = (p.sites[0].theta[0], p.sites[0].phi[0]);
            let want = 0.5 * (1.0 + 3f64.sqrt() * (2.0 * t).sin() * (2.0 * f).cos());
            assert_abs_diff_eq!(*v, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn fast_wigner_matches_dense_trace() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let kernels = [
            Kernel::multiqubit(3).unwrap(),
            Kernel::qudit_sun(3, 2).unwrap(),
            Kernel::tensor(vec![Kernel::spin_j(j(3)).unwrap(), Kernel::qubit()]).unwrap(),
        ];
        for k in &kernels {
            let rho = DensityOperator::random_mixed(k.dim(), &mut rng);
            let q = monte_carlo_quadrature(k, 10, 3).unwrap();
            let w = wigner_values(&rho, k, &q.points).unwrap();
            for (p, v) in q.points.iter().zip(&w) {
                let dense = frobenius(&k.evaluate(p).unwrap(), rho.matrix()).unwrap();
                assert_abs_diff_eq!(*v, dense.re, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn maximally_mixed_fields() {
        let k = Kernel::spin_j(j(4)).unwrap();
        let rho = DensityOperator::maximally_mixed(5);
        let q = monte_carlo_quadrature(&k, 50, 1).unwrap();
        for v in wigner_values(&rho, &k, &q.points).unwrap() {
            assert_abs_diff_eq!(v, 0.2, epsilon = 1e-14);
        }
        for v in q_values(&rho, &k, &q.points).unwrap() {
            assert_abs_diff_eq!(v, 0.2, epsilon = 1e-14);
        }
        assert!(wigner_values(&DensityOperator::maximally_mixed(4), &k, &q.points).is_err());
    }

    #[test]
    fn q_of_coherent_state_is_one() {
        let k = Kernel::multiqubit(2).unwrap();
        let p0 = PhasePoint::new(vec![SiteAngles::new(0.4, 0.1), SiteAngles::new(1.0, 2.0)]);
        let rho = DensityOperator::from_pure(&k.coherent_state(&p0).unwrap()).unwrap();
        assert_abs_diff_eq!(q_values(&rho, &k, &[p0]).unwrap()[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn integrate_examples() {
        let k = Kernel::qubit();
        let q = build_quadrature(&k, QuadratureOrder::Exact(4)).unwrap();
        let constant = vec![0.5; q.len()];
        assert_abs_diff_eq!(integrate(&constant, &q).unwrap(), 1.0, epsilon = 1e-14);
        assert!(integrate(&constant[1..], &q).is_err());

        // ∫ ¼(1 − √3 cos2θ)² dμ = 1 for |0⟩.
        let zero = crate::state::make_state(&"basis:j=1/2,m=1/2".parse().unwrap()).unwrap();
        assert_abs_diff_eq!(overlap(&zero, &zero, &k, &q).unwrap(), 1.0, epsilon = 1e-12);
        let mixed = DensityOperator::maximally_mixed(2);
        assert_abs_diff_eq!(
            overlap(&mixed, &mixed, &k, &q).unwrap(),
            0.5,
            epsilon = 1e-14
        );
    }

    #[test]
    fn negativity_examples() {
        let k = Kernel::qubit();
        let q = build_quadrature(
            &k,
            QuadratureOrder::PerAxis {
                cosine: 400,
                phi: 4,
            },
        )
        .unwrap();
        let zero = crate::state::make_state(&"basis:j=1/2,m=1/2".parse().unwrap()).unwrap();
        // W = ½(1 − √3 u) with u = cos2θ uniform on [-1, 1] under dμ = du dφ / π.
        // Negative for u > 1/√3: ∫ (√3u − 1)/2 du / 2 * 2 over [1/√3, 1].
        let a = 1.0 / 3f64.sqrt();
        let exact = 0.5 * (3f64.sqrt() / 2.0 * (1.0 - a * a) - (1.0 - a));
        let got = negativity_volume(&zero, &k, &q).unwrap();
        assert!(got > 0.0);
        assert_abs_diff_eq!(got, exact, epsilon = 1e-4);
        let mixed = DensityOperator::maximally_mixed(2);
        assert_eq!(negativity_volume(&mixed, &k, &q).unwrap(), 0.0);
    }

    #[test]
    fn slices() {
        let pts = collective_slice(3, (0.0, PI / 2.0), (0.0, PI), (2, 2));
        assert_eq!(pts.len(), 4);
        for p in &pts {
            assert_eq!(p.sites.len(), 3);
            assert!(p.sites.iter().all(|s| s == &p.sites[0]));
        }
        assert_eq!(pts[1].sites[0].phi[0], PI);
        assert_eq!(pts[2].sites[0].theta[0], PI / 2.0);
        let single = collective_slice(1, (0.0, 1.0), (0.0, 1.0), (3, 4));
        assert_eq!(single.len(), 12);
        assert_eq!(single[0].sites.len(), 1);
    }

    #[test]
    fn harmonic_detection() {
        let n = 32;
        let v: Vec<f64> = (0..n)
            .map(|i| 0.3 + (5.0 * 2.0 * PI * i as f64 / n as f64).cos())
            .collect();
        assert_eq!(dominant_harmonic(&v), 5);
    }

    #[test]
    fn pairwise_sum_is_exactish() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let seq: f64 = xs.iter().sum();
        assert_abs_diff_eq!(pairwise_sum(&xs), seq, epsilon = 1e-12);
    }
}
