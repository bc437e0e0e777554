//! Truncated Fock-space operators and Hamiltonian assembly.
//!
//! Composite spaces are ordered cavity ⊗ qubit, so the basis state
//! |n_a, n_b⟩ has index `n_a * dim_qubit + n_b`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;

#[allow(unused_imports)] // inherent f64 math is only present with std
use num_traits::Float;
use crate::device::SystemModel;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::units::hz_to_sim;

/// Default cap on the dimension of a tensor product.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;

/// Square operator on a truncated Fock space together with the truncation
/// of each subsystem it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: CMatrix,
    subsystems: Vec<usize>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::InvalidDimension(dim))
    } else {
        Ok(())
    }
}

impl FockOperator {
    /// Wraps a matrix acting on a single subsystem.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        check_dim(matrix.dim())?;
        let d = matrix.dim();
        Ok(Self { matrix, subsystems: vec![d] })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { matrix: CMatrix::identity(dim), subsystems: vec![dim] })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { matrix: CMatrix::zeros(dim), subsystems: vec![dim] })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Truncation of each tensor factor, outermost first.
    pub fn subsystems(&self) -> &[usize] {
        &self.subsystems
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), subsystems: self.subsystems.clone() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { matrix: self.matrix.scale_real(s), subsystems: self.subsystems.clone() }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { matrix: self.matrix.commutator(&other.matrix), subsystems: self.subsystems.clone() })
    }

    /// Relative Frobenius deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        self.matrix.hermiticity_defect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.hermitian_eigenvalues()
    }

    /// ⟨ψ|A|ψ⟩-style expectation Tr(ρA) for a density matrix ρ.
    pub fn expectation(&self, rho: &CMatrix) -> Result<Complex64> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch(rho.dim(), self.dim()));
        }
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += rho[(i, k)] * self.matrix[(k, i)];
            }
        }
        Ok(acc)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            Err(Error::DimensionMismatch(self.dim(), other.dim()))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { matrix: &self.matrix + &other.matrix, subsystems: self.subsystems.clone() })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { matrix: &self.matrix * &other.matrix, subsystems: self.subsystems.clone() })
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;

    /// Panics on mismatched dimensions; use [`FockOperator::try_add`] otherwise.
    fn add(self, rhs: &FockOperator) -> FockOperator {
        self.try_add(rhs).expect("operator dimensions differ")
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;

    fn sub(self, rhs: &FockOperator) -> FockOperator {
        self.check_same(rhs).expect("operator dimensions differ");
        FockOperator { matrix: &self.matrix - &rhs.matrix, subsystems: self.subsystems.clone() }
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;

    fn mul(self, rhs: &FockOperator) -> FockOperator {
        self.try_mul(rhs).expect("operator dimensions differ")
    }
}

/// Ladder operator with entries (i, i+1) = √(i+1).
pub fn annihilation(dim: usize) -> Result<FockOperator> {
    check_dim(dim)?;
    let mut m = CMatrix::zeros(dim);
    for i in 0..dim - 1 {
        m[(i, i + 1)] = Complex64::new(((i + 1) as f64).sqrt(), 0.0);
    }
    Ok(FockOperator { matrix: m, subsystems: vec![dim] })
}

pub fn creation(dim: usize) -> Result<FockOperator> {
    Ok(annihilation(dim)?.adjoint())
}

/// a†a, diagonal (0, 1, …, dim−1).
pub fn number_operator(dim: usize) -> Result<FockOperator> {
    check_dim(dim)?;
    let diag: Vec<f64> = (0..dim).map(|n| n as f64).collect();
    Ok(FockOperator { matrix: CMatrix::from_real_diagonal(&diag), subsystems: vec![dim] })
}

/// a†²a², diagonal n(n−1).
pub fn pair_number_operator(dim: usize) -> Result<FockOperator> {
    check_dim(dim)?;
    let diag: Vec<f64> = (0..dim).map(|n| (n * n.saturating_sub(1)) as f64).collect();
    Ok(FockOperator { matrix: CMatrix::from_real_diagonal(&diag), subsystems: vec![dim] })
}

/// |n⟩⟨n| on a single subsystem.
pub fn projector(dim: usize, level: usize) -> Result<FockOperator> {
    check_dim(dim)?;
    if level >= dim {
        return Err(Error::InvalidParameter { name: "level", reason: "projector level beyond truncation" });
    }
    let mut m = CMatrix::zeros(dim);
    m[(level, level)] = Complex64::new(1.0, 0.0);
    Ok(FockOperator { matrix: m, subsystems: vec![dim] })
}

/// Kronecker product with the default dimension cap.
pub fn tensor_product(a: &FockOperator, b: &FockOperator) -> Result<FockOperator> {
    tensor_product_capped(a, b, DEFAULT_DIMENSION_CAP)
}

pub fn tensor_product_capped(a: &FockOperator, b: &FockOperator, cap: usize) -> Result<FockOperator> {
    let requested = a.dim().saturating_mul(b.dim());
    if requested > cap {
        return Err(Error::Capacity { requested, cap });
    }
    let mut subsystems = a.subsystems.clone();
    subsystems.extend_from_slice(&b.subsystems);
    Ok(FockOperator { matrix: a.matrix.kron(&b.matrix), subsystems })
}

/// Dressed dispersive Hamiltonian of one cavity mode and the qubit,
/// H = (ω_r + χ b†b) a†a + (K_a/2) a†²a² + ω_q b†b + (K_b/2) b†²b²,
/// in simulation units on the cavity ⊗ qubit space.
pub fn hamiltonian_dispersive(
    system: &SystemModel,
    mode_index: usize,
    dim_cavity: usize,
    dim_qubit: usize,
) -> Result<FockOperator> {
    check_dim(dim_cavity)?;
    check_dim(dim_qubit)?;
    let mode = system.mode(mode_index)?;
    let kerr = system.kerr(mode_index)?;
    let omega_r = hz_to_sim(mode.frequency);
    let omega_q = hz_to_sim(system.qubit.frequency);
    let chi = hz_to_sim(kerr.cross_kerr);
    let ka = hz_to_sim(kerr.self_kerr_cavity);
    let kb = hz_to_sim(kerr.self_kerr_qubit);

    // Diagonal in the Fock basis, so assemble the spectrum directly and
    // check it against the operator algebra in tests.
    let mut diag = Vec::with_capacity(dim_cavity * dim_qubit);
    for na in 0..dim_cavity {
        for nb in 0..dim_qubit {
            let (na_f, nb_f) = (na as f64, nb as f64);
            diag.push(
                (omega_r + chi * nb_f) * na_f
                    + 0.5 * ka * na_f * (na_f - 1.0)
                    + omega_q * nb_f
                    + 0.5 * kb * nb_f * (nb_f - 1.0),
            );
        }
    }
    Ok(FockOperator { matrix: CMatrix::from_real_diagonal(&diag), subsystems: vec![dim_cavity, dim_qubit] })
}

/// Resonantly driven qubit in the frame of the drive,
/// H = (K_b/2) b†²b² + g√n_eff (b† + b). Frequencies in Hz.
pub fn hamiltonian_driven_qubit(kerr_hz: f64, coupling_hz: f64, n_eff: f64, dim: usize) -> Result<FockOperator> {
    hamiltonian_driven_qubit_detuned(kerr_hz, coupling_hz, n_eff, 0.0, dim)
}

/// As [`hamiltonian_driven_qubit`] with an explicit (ω_q − ω_d) b†b term
/// for an off-resonant drive.
pub fn hamiltonian_driven_qubit_detuned(
    kerr_hz: f64,
    coupling_hz: f64,
    n_eff: f64,
    qubit_minus_drive_hz: f64,
    dim: usize,
) -> Result<FockOperator> {
    check_dim(dim)?;
    if !(n_eff >= 0.0) {
        return Err(Error::InvalidParameter { name: "n_eff", reason: "must be non-negative" });
    }
    let b = annihilation(dim)?;
    let drive = hz_to_sim(coupling_hz) * n_eff.sqrt();
    let x = &b + &b.adjoint();
    let h = &pair_number_operator(dim)?.scale(0.5 * hz_to_sim(kerr_hz)) + &x.scale(drive);
    Ok(&h + &number_operator(dim)?.scale(hz_to_sim(qubit_minus_drive_hz)))
}
