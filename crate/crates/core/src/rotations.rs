//! Parametrized unitary families: the "displacement" part of each kernel.
//!
//! All exponentials carry the `e^{+i…}` sign. Qubit sites exponentiate full
//! Pauli matrices, so conjugation turns the Bloch vector through `2θ` and `2φ`;
//! spin-j sites exponentiate the angular momentum generators and turn it
//! through `θ` and `φ`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{
    gell_mann_diagonal_entries, kron_all, kron_vectors, re, spin_operators, ComplexMatrix,
    ComplexVector, HalfInteger, HermitianExp,
};
use crate::error::{Error, Result};

/// Angles of one site. Qubit and spin-j sites use one `theta`, one `phi` and
/// the third Euler angle `gamma`; SU(N) sites use `N-1` of each of `theta` and
/// `phi` and no `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteAngles {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub gamma: f64,
}

impl SiteAngles {
    pub fn new(theta: f64, phi: f64) -> Self {
        SiteAngles {
            theta: vec![theta],
            phi: vec![phi],
            gamma: 0.0,
        }
    }

    pub fn with_gamma(theta: f64, phi: f64, gamma: f64) -> Self {
        SiteAngles {
            theta: vec![theta],
            phi: vec![phi],
            gamma,
        }
    }

    pub fn multi(theta: Vec<f64>, phi: Vec<f64>) -> Self {
        SiteAngles {
            theta,
            phi,
            gamma: 0.0,
        }
    }
}

/// A point Ω of a (possibly multi-site) phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub sites: Vec<SiteAngles>,
}

impl PhasePoint {
    pub fn new(sites: Vec<SiteAngles>) -> Self {
        PhasePoint { sites }
    }

    /// Single site, `(θ, φ)`.
    pub fn single(theta: f64, phi: f64) -> Self {
        PhasePoint {
            sites: vec![SiteAngles::new(theta, phi)],
        }
    }

    /// `k` single-angle sites all at `(θ, φ)`.
    pub fn collective(k: usize, theta: f64, phi: f64) -> Self {
        PhasePoint {
            sites: vec![SiteAngles::new(theta, phi); k],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.sites.iter().all(|s| {
            s.gamma.is_finite()
                && s.theta.iter().all(|x| x.is_finite())
                && s.phi.iter().all(|x| x.is_finite())
        })
    }
}

/// Cached spin-j generators: `J2` diagonalized once, `J3` diagonal.
#[derive(Debug)]
pub struct SpinGenerators {
    pub j: HalfInteger,
    pub j2_exp: HermitianExp,
    pub j2: ComplexMatrix,
    pub j3: ComplexMatrix,
    pub m_values: Vec<f64>,
}

impl SpinGenerators {
    pub fn new(j: HalfInteger) -> Result<Self> {
        let ops = spin_operators(j);
        Ok(SpinGenerators {
            j,
            j2_exp: HermitianExp::new(&ops.j2)?,
            m_values: ops.m_values(),
            j2: ops.j2,
            j3: ops.j3,
        })
    }

    fn j3_phase(&self, angle: f64) -> Vec<Complex64> {
        self.m_values
            .iter()
            .map(|&m| Complex64::from_polar(1.0, m * angle))
            .collect()
    }
}

/// The per-site rotation group and representation.
#[derive(Debug, Clone)]
pub enum Site {
    /// SU(2) defining representation with Pauli exponents.
    Qubit,
    /// SU(2) spin-j representation with `J` exponents.
    Spin(Arc<SpinGenerators>),
    /// SU(N) defining representation, coherent-state parametrization with
    /// `2(N-1)` angles.
    Sun(usize),
}

impl Site {
    pub fn spin(j: HalfInteger) -> Result<Self> {
        if j.twice() == 0 {
            return Err(Error::InvalidSpin("spin 0 has no phase space".into()));
        }
        Ok(Site::Spin(Arc::new(SpinGenerators::new(j)?)))
    }

    pub fn sun(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        Ok(Site::Sun(n))
    }

    /// Representation dimension `d`.
    pub fn dim(&self) -> usize {
        match self {
            Site::Qubit => 2,
            Site::Spin(g) => g.j.multiplicity(),
            Site::Sun(n) => *n,
        }
    }

    /// Group rank `n` of SU(n).
    pub fn group(&self) -> usize {
        match self {
            Site::Qubit | Site::Spin(_) => 2,
            Site::Sun(n) => *n,
        }
    }

    /// Number of θ (and of φ) components.
    pub fn angle_count(&self) -> usize {
        match self {
            Site::Qubit | Site::Spin(_) => 1,
            Site::Sun(n) => n - 1,
        }
    }

    pub fn check(&self, angles: &SiteAngles) -> Result<()> {
        let want = self.angle_count();
        if angles.theta.len() != want || angles.phi.len() != want {
            return Err(Error::Argument(format!(
                "site expects {want} theta and {want} phi components, got {} and {}",
                angles.theta.len(),
                angles.phi.len()
            )));
        }
        if matches!(self, Site::Sun(_)) && angles.gamma != 0.0 {
            return Err(Error::Argument(
                "SU(N) sites take no third Euler angle".into(),
            ));
        }
        Ok(())
    }

    pub fn rotation(&self, angles: &SiteAngles) -> Result<ComplexMatrix> {
        self.check(angles)?;
        Ok(match self {
            Site::Qubit => qubit_rotation(angles.theta[0], angles.phi[0], angles.gamma),
            Site::Spin(g) => spin_rotation_cached(g, angles.theta[0], angles.phi[0], angles.gamma),
            Site::Sun(n) => sun_rotation_unchecked(*n, &angles.theta, &angles.phi),
        })
    }

    /// The extremal fiducial state: the last basis vector, i.e. the
    /// negative-eigenvalue eigenvector of `Λ_{d²-1}`.
    pub fn fiducial(&self) -> ComplexVector {
        let d = self.dim();
        let mut v = ComplexVector::zeros(d);
        v[d - 1] = re(1.0);
        v
    }

    /// Generator whose exponential translates the leftmost φ component:
    /// `U(…, φ₁ + δ, …) = exp(i δ G) U(…, φ₁, …)`.
    pub fn phase_generator(&self) -> ComplexMatrix {
        match self {
            Site::Qubit => crate::algebra::pauli_z(),
            Site::Spin(g) => g.j3.clone(),
            Site::Sun(n) => crate::algebra::diagonal(&gell_mann_diagonal_entries(*n, 1)),
        }
    }

    /// Generator whose exponential translates the leftmost θ component when
    /// the leftmost φ component is zero.
    pub fn tilt_generator(&self) -> ComplexMatrix {
        match self {
            Site::Qubit => crate::algebra::pauli_y(),
            Site::Spin(g) => g.j2.clone(),
            Site::Sun(n) => crate::algebra::gell_mann_antisymmetric(*n, 0, 1),
        }
    }

    /// Highest trigonometric degree of the kernel's matrix elements in this
    /// site's cosine variable and φ harmonics.
    pub fn harmonic_degree(&self) -> usize {
        match self {
            Site::Qubit | Site::Sun(_) => 1,
            Site::Spin(g) => g.j.twice() as usize,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Site::Qubit => "qubit".into(),
            Site::Spin(g) => format!("spin-{}", g.j),
            Site::Sun(n) => format!("su{n}"),
        }
    }
}

/// `exp(i σ_z φ) exp(i σ_y θ) exp(i σ_z Φ)`.
pub fn qubit_rotation(theta: f64, phi: f64, gamma: f64) -> ComplexMatrix {
    let (s, co) = theta.sin_cos();
    let a = Complex64::from_polar(1.0, phi);
    let b = Complex64::from_polar(1.0, gamma);
    // exp(iσ_yθ) = [[cos, sin], [-sin, cos]]
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            a * b * co,
            a * b.conj() * s,
            -a.conj() * b * s,
            a.conj() * b.conj() * co,
        ],
    )
}

fn spin_rotation_cached(g: &SpinGenerators, theta: f64, phi: f64, gamma: f64) -> ComplexMatrix {
    let mut u = g.j2_exp.at(theta);
    let left = g.j3_phase(phi);
    let right = g.j3_phase(gamma);
    for (col, rph) in right.iter().enumerate() {
        for (row, lph) in left.iter().enumerate() {
            u[(row, col)] *= lph * rph;
        }
    }
    u
}

/// `exp(i J_3 φ) exp(i J_2 θ) exp(i J_3 Φ)` in dimension `2j+1`.
pub fn spinj_rotation(j: HalfInteger, theta: f64, phi: f64, gamma: f64) -> Result<ComplexMatrix> {
    let g = SpinGenerators::new(j)?;
    Ok(spin_rotation_cached(&g, theta, phi, gamma))
}

/// Normalization `c_l` of the `l`-th diagonal Gell-Mann generator.
fn diagonal_scale(l: usize) -> f64 {
    (2.0 / (l as f64 * (l as f64 + 1.0))).sqrt()
}

/// Length of the φ_l interval on which SU(N) kernel elements are periodic.
pub fn sun_phi_period(n: usize, l: usize) -> f64 {
    let c_l = diagonal_scale(l);
    if l == n - 1 {
        2.0 * PI / (n as f64 * c_l)
    } else {
        2.0 * PI / c_l
    }
}

/// Largest φ_l frequency, in units of `2π / period`, carried by one factor
/// `ψ_a ψ_b*` of the coherent state.
pub fn sun_phi_multiplier(n: usize, l: usize) -> usize {
    if l == n - 1 {
        1
    } else {
        l + 1
    }
}

fn sun_rotation_unchecked(n: usize, theta: &[f64], phi: &[f64]) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(n, n);
    for l in 1..n {
        // Diagonal phase exp(i Λ_diag(l) φ_l): scales column k of u.
        let diag = gell_mann_diagonal_entries(n, l);
        for (k, d) in diag.iter().enumerate() {
            if *d != 0.0 {
                let ph = Complex64::from_polar(1.0, d * phi[l - 1]);
                for r in 0..n {
                    u[(r, k)] *= ph;
                }
            }
        }
        // exp(i λ_anti(l-1, l) θ_l) acts on columns (a, b) = (l-1, l) as
        // [[cos, sin], [-sin, cos]].
        let (s, co) = theta[l - 1].sin_cos();
        let (a, b) = (l - 1, l);
        for r in 0..n {
            let ua = u[(r, a)];
            let ub = u[(r, b)];
            u[(r, a)] = ua * co - ub * s;
            u[(r, b)] = ua * s + ub * co;
        }
    }
    u
}

/// Coherent-state family of SU(N): the ordered product, left to right over
/// `l = 1 … N-1`, of `exp(i Λ_diag(l) φ_l) exp(i λ_anti(l, l+1) θ_l)`.
/// Acting on the last basis state, the right-most factors act first.
pub fn sun_rotation(n: usize, theta: &[f64], phi: &[f64]) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    if theta.len() != n - 1 || phi.len() != n - 1 {
        return Err(Error::Argument(format!(
            "SU({n}) rotation needs {} theta and phi angles, got {} and {}",
            n - 1,
            theta.len(),
            phi.len()
        )));
    }
    Ok(sun_rotation_unchecked(n, theta, phi))
}

/// `𝕌(Ω) = ⊗ᵢ U_i(Ωᵢ)` over an ordered list of sites.
#[derive(Debug, Clone)]
pub struct RotationFamily {
    sites: Vec<Site>,
}

impl RotationFamily {
    pub fn new(sites: Vec<Site>) -> Self {
        RotationFamily { sites }
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn dim(&self) -> usize {
        self.sites.iter().map(Site::dim).product()
    }

    pub fn site_dims(&self) -> Vec<usize> {
        self.sites.iter().map(Site::dim).collect()
    }

    pub fn check(&self, point: &PhasePoint) -> Result<()> {
        if point.sites.len() != self.sites.len() {
            return Err(Error::Argument(format!(
                "phase point has {} sites, kernel has {}",
                point.sites.len(),
                self.sites.len()
            )));
        }
        if !point.is_finite() {
            return Err(Error::Argument("phase point has non-finite angles".into()));
        }
        self.sites
            .iter()
            .zip(&point.sites)
            .try_for_each(|(s, a)| s.check(a))
    }

    pub fn site_unitaries(&self, point: &PhasePoint) -> Result<Vec<ComplexMatrix>> {
        self.check(point)?;
        self.sites
            .iter()
            .zip(&point.sites)
            .map(|(s, a)| s.rotation(a))
            .collect()
    }

    pub fn evaluate(&self, point: &PhasePoint) -> Result<ComplexMatrix> {
        kron_all(&self.site_unitaries(point)?)
    }

    /// `𝕌(Ω)|fiducial⟩` as a product vector.
    pub fn coherent_state(&self, point: &PhasePoint) -> Result<ComplexVector> {
        let us = self.site_unitaries(point)?;
        let vs: Vec<ComplexVector> = us
            .iter()
            .zip(&self.sites)
            .map(|(u, s)| u * s.fiducial())
            .collect();
        Ok(kron_vectors(&vs))
    }
}

/// `⊗ᵢ U_i` for the given sites, in site order.
pub fn product_rotation(family: &RotationFamily, point: &PhasePoint) -> Result<ComplexMatrix> {
    family.evaluate(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{
        expi_hermitian, identity, max_abs, pauli_x, pauli_y, pauli_z, unitarity_residual,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn qubit_rotation_identity_and_quarter_turn() {
        assert!(max_abs(&(qubit_rotation(0.0, 0.0, 0.0) - identity(2))) < 1e-15);
        let u = qubit_rotation(PI / 2.0, 0.0, 0.0);
        let oracle = expi_hermitian(&pauli_y(), PI / 2.0).unwrap();
        assert!(max_abs(&(u - oracle)) < 1e-15);
    }

    #[test]
    fn qubit_rotation_matches_exponential_product() {
        let mut r = rng();
        for _ in 0..50 {
            let (t, p, g) = (
                r.random::<f64>() * 3.0,
                r.random::<f64>() * 6.0,
                r.random::<f64>() * 6.0,
            );
            let oracle = expi_hermitian(&pauli_z(), p).unwrap()
                * expi_hermitian(&pauli_y(), t).unwrap()
                * expi_hermitian(&pauli_z(), g).unwrap();
            assert!(max_abs(&(qubit_rotation(t, p, g) - oracle)) < 1e-13);
        }
    }

    #[test]
    fn qubit_conjugation_of_sigma_z() {
        let mut r = rng();
        for _ in 0..50 {
            let (t, p) = (r.random::<f64>() * 3.0, r.random::<f64>() * 6.0);
            let u = qubit_rotation(t, p, 0.0);
            let got = &u * pauli_z() * u.adjoint();
            let want = pauli_z().scale((2.0 * t).cos())
                - (pauli_x().scale((2.0 * p).cos()) - pauli_y().scale((2.0 * p).sin()))
                    .scale((2.0 * t).sin());
            assert!(max_abs(&(got - want)) < 1e-13);
        }
    }

    #[test]
    fn spinj_rotation_examples() {
        for twice in 1..=7 {
            let j = HalfInteger::from_twice(twice);
            let u = spinj_rotation(j, 0.0, 0.0, 0.0).unwrap();
            assert!(max_abs(&(u - identity(twice as usize + 1))) < 1e-13);
        }
        let mut r = rng();
        let half = HalfInteger::from_twice(1);
        for _ in 0..20 {
            let (t, p, g) = (
                r.random::<f64>() * 3.0,
                r.random::<f64>() * 6.0,
                r.random::<f64>(),
            );
            let a = spinj_rotation(half, t, p, g).unwrap();
            let b = qubit_rotation(t / 2.0, p / 2.0, g / 2.0);
            assert!(max_abs(&(a - b)) < 1e-13);
        }
        let one = HalfInteger::from_twice(2);
        let u = spinj_rotation(one, PI, 0.0, 0.0).unwrap();
        let j3 = spin_operators(one).j3;
        let rotated = &u * j3 * u.adjoint();
        assert!((rotated[(0, 0)].re + 1.0).abs() < 1e-13);
    }

    #[test]
    fn product_rotation_examples() {
        let fam = RotationFamily::new(vec![Site::Qubit, Site::Qubit]);
        let zero = PhasePoint::collective(2, 0.0, 0.0);
        assert!(max_abs(&(fam.evaluate(&zero).unwrap() - identity(4))) < 1e-15);

        let p = PhasePoint::new(vec![SiteAngles::new(0.3, 1.1), SiteAngles::new(0.0, 0.0)]);
        let want = qubit_rotation(0.3, 1.1, 0.0).kronecker(&identity(2));
        assert!(max_abs(&(fam.evaluate(&p).unwrap() - want)) < 1e-15);

        let swap = ComplexMatrix::from_fn(4, 4, |r, cc| {
            let (a, b) = (r / 2, r % 2);
            if cc == b * 2 + a {
                re(1.0)
            } else {
                re(0.0)
            }
        });
        let u = fam.evaluate(&PhasePoint::collective(2, 0.7, 0.4)).unwrap();
        assert!(max_abs(&(&u * &swap - &swap * &u)) < 1e-14);

        let bad = PhasePoint::collective(3, 0.0, 0.0);
        assert!(fam.evaluate(&bad).is_err());
    }

    #[test]
    fn sun_rotation_reduces_to_qubit() {
        let mut r = rng();
        for _ in 0..20 {
            let (t, p) = (r.random::<f64>() * 3.0, r.random::<f64>() * 6.0);
            let a = sun_rotation(2, &[t], &[p]).unwrap();
            assert!(max_abs(&(a - qubit_rotation(t, p, 0.0))) < 1e-14);
        }
        assert!(max_abs(&(sun_rotation(4, &[0.0; 3], &[0.0; 3]).unwrap() - identity(4))) < 1e-15);
        assert!(sun_rotation(3, &[0.1], &[0.2, 0.3]).is_err());
    }

    #[test]
    fn sun_rotation_matches_generator_product() {
        // Oracle: multiply the 2(N-1) exponentials of Gell-Mann generators directly.
        let mut r = rng();
        for n in 2..=5 {
            let theta: Vec<f64> = (1..n).map(|_| r.random::<f64>() * 3.0).collect();
            let phi: Vec<f64> = (1..n).map(|_| r.random::<f64>() * 6.0).collect();
            let mut oracle = identity(n);
            for l in 1..n {
                let dg = crate::algebra::diagonal(&gell_mann_diagonal_entries(n, l));
                let an = crate::algebra::gell_mann_antisymmetric(n, l - 1, l);
                oracle = oracle
                    * expi_hermitian(&dg, phi[l - 1]).unwrap()
                    * expi_hermitian(&an, theta[l - 1]).unwrap();
            }
            let u = sun_rotation(n, &theta, &phi).unwrap();
            assert!(max_abs(&(u - oracle)) < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn sun_fiducial_image_generic_support() {
        let site = Site::Sun(3);
        let u = site
            .rotation(&SiteAngles::multi(vec![0.4, 0.9], vec![1.3, 2.2]))
            .unwrap();
        let v = u * site.fiducial();
        assert!((v.norm() - 1.0).abs() < 1e-14);
        assert!(v.iter().all(|z| z.norm() > 1e-3));
    }

    #[test]
    fn unitarity_and_phi_composition() {
        let mut r = rng();
        let sites = [
            Site::Qubit,
            Site::spin(HalfInteger::from_twice(5)).unwrap(),
            Site::Sun(4),
        ];
        for site in &sites {
            let n = site.angle_count();
            for _ in 0..10 {
                let a = SiteAngles {
                    theta: (0..n).map(|_| r.random::<f64>() * 3.0).collect(),
                    phi: (0..n).map(|_| r.random::<f64>() * 6.0).collect(),
                    gamma: if n == 1 { r.random::<f64>() } else { 0.0 },
                };
                assert!(unitarity_residual(&site.rotation(&a).unwrap()) <= 1e-12);
            }
            let at = |phi1: f64| {
                let mut phi = vec![0.0; n];
                phi[0] = phi1;
                site.rotation(&SiteAngles::multi(vec![0.0; n], phi))
                    .unwrap()
            };
            assert!(max_abs(&(at(0.4) * at(0.9) - at(1.3))) < 1e-13);
        }
    }

    #[test]
    fn phase_and_tilt_generators_translate() {
        let sites = [
            Site::Qubit,
            Site::spin(HalfInteger::from_twice(3)).unwrap(),
            Site::Sun(3),
        ];
        for site in &sites {
            let n = site.angle_count();
            let mut theta: Vec<f64> = (0..n).map(|i| 0.3 + 0.2 * i as f64).collect();
            let mut phi: Vec<f64> = (0..n).map(|i| 0.5 + 0.1 * i as f64).collect();
            let base = site
                .rotation(&SiteAngles::multi(theta.clone(), phi.clone()))
                .unwrap();
            phi[0] += 0.25;
            let shifted = site
                .rotation(&SiteAngles::multi(theta.clone(), phi.clone()))
                .unwrap();
            let g = expi_hermitian(&site.phase_generator(), 0.25).unwrap();
            assert!(max_abs(&(shifted - g * &base)) < 1e-12);

            phi[0] = 0.0;
            let base = site
                .rotation(&SiteAngles::multi(theta.clone(), phi.clone()))
                .unwrap();
            theta[0] += 0.4;
            let tilted = site
                .rotation(&SiteAngles::multi(theta.clone(), phi.clone()))
                .unwrap();
            let g = expi_hermitian(&site.tilt_generator(), 0.4).unwrap();
            assert!(max_abs(&(tilted - g * base)) < 1e-12);
        }
    }

    #[test]
    fn spin_zero_rejected() {
        assert!(matches!(
            Site::spin(HalfInteger::from_twice(0)),
            Err(Error::InvalidSpin(_))
        ));
    }
}
