//! Two-photon polarization states and their measurement statistics.
//!
//! Basis order is `|HH⟩, |HV⟩, |VH⟩, |VV⟩`. An analyzer at angle `θ` is a
//! polarizing beam splitter preceded by a rotator: the transmitted port
//! projects onto `cos θ |H⟩ + sin θ |V⟩`, the reflected port onto the
//! orthogonal state at `θ + π/2`.
//!
//! The source is taken to emit `|Φ+⟩ = (|HH⟩ + |VV⟩)/√2` mixed with white
//! noise. With that state, both parties see the same port whenever their
//! analyzers are parallel, so "same port" means "same bit" and no bit flip is
//! needed after sifting.

use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand::Rng;

use crate::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-10;

/// Largest CHSH value quantum mechanics allows, `2√2`.
pub const TSIRELSON_BOUND: f64 = 2.0 * core::f64::consts::SQRT_2;

/// Canonical CHSH analyzer settings `(a, a', b, b')` that reach the Tsirelson
/// bound on `|Φ+⟩`.
pub const CHSH_ANGLES: [AnalyzerAngle; 4] =
    [AnalyzerAngle(0.0), AnalyzerAngle(FRAC_PI_4), AnalyzerAngle(FRAC_PI_8), AnalyzerAngle(3.0 * FRAC_PI_8)];

/// A validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    matrix: Matrix4<Complex64>,
}

/// Linear-polarization analysis angle in radians. Physics is periodic in π.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct AnalyzerAngle(f64);

/// Which output of a polarizing beam splitter fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    Transmitted,
    Reflected,
}

impl Port {
    pub const ALL: [Port; 2] = [Port::Transmitted, Port::Reflected];

    /// Key-bit convention: transmitted is 0, reflected is 1.
    pub fn bit(self) -> bool {
        matches!(self, Port::Reflected)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl AnalyzerAngle {
    pub fn new(radians: f64) -> Result<Self> {
        if radians.is_finite() {
            Ok(AnalyzerAngle(radians))
        } else {
            Err(Error::Domain("analyzer angle must be finite"))
        }
    }

    pub const fn from_radians_unchecked(radians: f64) -> Self {
        AnalyzerAngle(radians)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// The angle this port projects onto.
    pub fn for_port(self, port: Port) -> f64 {
        match port {
            Port::Transmitted => self.0,
            Port::Reflected => self.0 + FRAC_PI_2,
        }
    }
}

impl TwoQubitState {
    /// Validates and wraps a density matrix.
    pub fn new(matrix: Matrix4<Complex64>) -> Result<Self> {
        let adjoint = matrix.adjoint();
        let max_dev = (matrix - adjoint).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max_dev > HERMITIAN_TOL {
            return Err(Error::InvalidState("matrix is not Hermitian"));
        }
        if (matrix.trace() - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState("trace differs from 1"));
        }
        let eigen = matrix.symmetric_eigenvalues();
        if eigen.iter().any(|&l| l < PSD_TOL) {
            return Err(Error::InvalidState("matrix has a negative eigenvalue"));
        }
        Ok(TwoQubitState { matrix })
    }

    /// `|Φ+⟩⟨Φ+|`.
    pub fn phi_plus() -> Self {
        werner_state(1.0).expect("unit visibility is in range")
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.matrix
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let ev = self.matrix.symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(|a, b| a.total_cmp(b));
        out
    }

    /// `⟨ψ|ρ|ψ⟩` for a real product vector.
    fn expectation(&self, psi: &Vector4<f64>) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                acc += self.matrix[(i, j)] * (psi[i] * psi[j]);
            }
        }
        acc.re
    }
}

/// Isotropic Werner mixture `V |Φ+⟩⟨Φ+| + (1 − V) I/4`.
pub fn werner_state(visibility: f64) -> Result<TwoQubitState> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::Domain("visibility must lie in [0, 1]"));
    }
    let noise = (1.0 - visibility) / 4.0;
    let bell = 0.5 * visibility;
    let mut m = Matrix4::from_diagonal_element(Complex64::new(noise, 0.0));
    for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
        m[(i, j)] += Complex64::new(bell, 0.0);
    }
    TwoQubitState::new(m)
}

fn product_vector(theta_a: f64, theta_b: f64) -> Vector4<f64> {
    let (sa, ca) = libm::sincos(theta_a);
    let (sb, cb) = libm::sincos(theta_b);
    Vector4::new(ca * cb, ca * sb, sa * cb, sa * sb)
}

/// `Tr[ρ (Π_A ⊗ Π_B)]` for the given analyzer angles and ports.
pub fn outcome_probability(
    state: &TwoQubitState,
    theta_a: AnalyzerAngle,
    theta_b: AnalyzerAngle,
    port_a: Port,
    port_b: Port,
) -> f64 {
    let psi = product_vector(theta_a.for_port(port_a), theta_b.for_port(port_b));
    state.expectation(&psi).clamp(0.0, 1.0)
}

/// `E = P(TT) + P(RR) − P(TR) − P(RT)`.
pub fn correlation(state: &TwoQubitState, theta_a: AnalyzerAngle, theta_b: AnalyzerAngle) -> f64 {
    let d = OutcomeDistribution::new(state, theta_a, theta_b);
    d.correlation()
}

/// CHSH combination `E(a,b) − E(a,b') + E(a',b) + E(a',b')`.
pub fn chsh_value(
    state: &TwoQubitState,
    a: AnalyzerAngle,
    a_prime: AnalyzerAngle,
    b: AnalyzerAngle,
    b_prime: AnalyzerAngle,
) -> f64 {
    let s = correlation(state, a, b) - correlation(state, a, b_prime)
        + correlation(state, a_prime, b)
        + correlation(state, a_prime, b_prime);
    assert!(s.abs() <= TSIRELSON_BOUND + 1e-10, "CHSH value {s} exceeds the Tsirelson bound");
    s
}

/// Probability that both parties' bits disagree when both analyze at
/// `basis`.
pub fn qber_in_basis(state: &TwoQubitState, basis: AnalyzerAngle) -> f64 {
    let d = OutcomeDistribution::new(state, basis, basis);
    d.probability(Port::Transmitted, Port::Reflected) + d.probability(Port::Reflected, Port::Transmitted)
}

/// Draws one joint outcome at the given analyzer angles.
pub fn sample_outcome<R: Rng + ?Sized>(
    state: &TwoQubitState,
    theta_a: AnalyzerAngle,
    theta_b: AnalyzerAngle,
    rng: &mut R,
) -> (Port, Port) {
    OutcomeDistribution::new(state, theta_a, theta_b).sample(rng)
}

/// The four joint-outcome probabilities for a fixed pair of settings, ready
/// for repeated sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDistribution {
    /// Indexed `[port_a][port_b]`.
    probs: [[f64; 2]; 2],
}

impl OutcomeDistribution {
    pub fn new(state: &TwoQubitState, theta_a: AnalyzerAngle, theta_b: AnalyzerAngle) -> Self {
        let mut probs = [[0.0; 2]; 2];
        for pa in Port::ALL {
            for pb in Port::ALL {
                probs[pa.index()][pb.index()] = outcome_probability(state, theta_a, theta_b, pa, pb);
            }
        }
        OutcomeDistribution { probs }
    }

    pub fn probability(&self, port_a: Port, port_b: Port) -> f64 {
        self.probs[port_a.index()][port_b.index()]
    }

    pub fn correlation(&self) -> f64 {
        self.probs[0][0] + self.probs[1][1] - self.probs[0][1] - self.probs[1][0]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Port, Port) {
        let total = self.probs[0][0] + self.probs[0][1] + self.probs[1][0] + self.probs[1][1];
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = self.probs[0][0];
        if u < acc {
            return (Port::Transmitted, Port::Transmitted);
        }
        acc += self.probs[0][1];
        if u < acc {
            return (Port::Transmitted, Port::Reflected);
        }
        acc += self.probs[1][0];
        if u < acc {
            return (Port::Reflected, Port::Transmitted);
        }
        (Port::Reflected, Port::Reflected)
    }
}

/// Maps any angle into `[0, π)`.
pub fn normalize_half_turn(theta: f64) -> f64 {
    crate::math::rem_euclid(theta, PI)
}
