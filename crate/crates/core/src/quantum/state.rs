use nalgebra::{DMatrix, DVector};

use super::basis::{ProductSpace, Space};
use super::distribution::{thermal_distribution, FockDistribution};
use super::operator::Operator;
use crate::error::{Error, Result};
use crate::C64;

/// Acceptance thresholds for a physical density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub trace: f64,
    /// Most negative eigenvalue accepted.
    pub psd: f64,
}

impl Tolerances {
    /// Thresholds for freshly constructed states.
    pub const STRICT: Tolerances = Tolerances {
        hermitian: 1e-10,
        trace: 1e-9,
        psd: 1e-9,
    };

    /// Thresholds for integrator output.
    pub const EVOLVED: Tolerances = Tolerances {
        hermitian: 1e-10,
        trace: 1e-8,
        psd: 1e-7,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::STRICT
    }
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    space: Space,
    vector: DVector<C64>,
}

impl Ket {
    pub fn new(space: impl Into<Space>, vector: DVector<C64>) -> Result<Self> {
        let space = space.into();
        if vector.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: vector.len(),
            });
        }
        let norm = vector.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("ket norm {norm} is not 1")));
        }
        Ok(Self { space, vector })
    }

    pub fn basis_state(space: impl Into<Space>, index: usize) -> Result<Self> {
        let space = space.into();
        if index >= space.dim() {
            return Err(Error::param("index", format!("{index} outside dimension {}", space.dim())));
        }
        let mut v = DVector::zeros(space.dim());
        v[index] = C64::new(1.0, 0.0);
        Ok(Self { space, vector: v })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.vector
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: Space,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(space: impl Into<Space>, matrix: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerances(space, matrix, Tolerances::STRICT)
    }

    pub fn with_tolerances(space: impl Into<Space>, matrix: DMatrix<C64>, tol: Tolerances) -> Result<Self> {
        let space = space.into();
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.nrows(),
            });
        }
        let rho = Self { space, matrix };
        rho.validate(tol)?;
        Ok(rho)
    }

    /// Validate Hermiticity, trace and positivity against `tol`.
    pub fn validate(&self, tol: Tolerances) -> Result<()> {
        let herm = Operator::new(self.space.clone(), self.matrix.clone())?.hermiticity_defect();
        if herm > tol.hermitian {
            return Err(Error::InvalidState(format!("not Hermitian: defect {herm:.3e}")));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue();
        if min < -tol.psd {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigen().eigenvalues.iter().fold(f64::INFINITY, |m, &e| m.min(e))
    }

    pub fn from_ket(ket: &Ket) -> Self {
        let v = ket.vector();
        Self {
            space: ket.space().clone(),
            matrix: v * v.adjoint(),
        }
    }

    /// `|s⟩⟨s| ⊗ Σ p_n |n⟩⟨n|`.
    pub fn spin_times_fock(space: &ProductSpace, spin: usize, dist: &FockDistribution) -> Result<Self> {
        if dist.n_max() != space.fock.n_max() {
            return Err(Error::DimensionMismatch {
                expected: space.fock.dim(),
                got: dist.n_max() + 1,
            });
        }
        if spin >= space.spin.dim() {
            return Err(Error::param("spin", format!("index {spin} outside spin basis")));
        }
        let d = space.dim();
        let mut m = DMatrix::zeros(d, d);
        for (n, &p) in dist.populations().iter().enumerate() {
            let i = space.index(spin, n);
            m[(i, i)] = C64::new(p, 0.0);
        }
        Self::new(space.clone(), m)
    }

    /// Build from integrator output: Hermitian part is kept and checked
    /// against [`Tolerances::EVOLVED`].
    pub(crate) fn from_evolved(space: Space, matrix: DMatrix<C64>) -> Result<Self> {
        let defect = Operator::new(space.clone(), matrix.clone())?.hermiticity_defect();
        if defect > 1e-6 {
            return Err(Error::InvalidState(format!("evolved state lost Hermiticity ({defect:.3e})")));
        }
        let h = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        Self::with_tolerances(space, h, Tolerances::EVOLVED)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Diagonal of the motional reduced state. A pure spin space has no
    /// motion and reports `[1.0]`.
    pub fn fock_diagonal(&self) -> Vec<f64> {
        match &self.space {
            Space::Product(p) => {
                let nf = p.fock.dim();
                let mut out = vec![0.0; nf];
                for s in 0..p.spin.dim() {
                    for (n, o) in out.iter_mut().enumerate() {
                        *o += self.matrix[(p.index(s, n), p.index(s, n))].re;
                    }
                }
                out
            }
            Space::Fock(_) => self.matrix.diagonal().iter().map(|z| z.re).collect(),
            Space::Spin(_) | Space::Generic(_) => vec![1.0],
        }
    }

    pub fn fock_populations(&self) -> Result<FockDistribution> {
        let mut p = self.fock_diagonal();
        for x in &mut p {
            // integrator round-off
            if *x < 0.0 && *x > -1e-9 {
                *x = 0.0;
            }
        }
        FockDistribution::new(p)
    }

    /// Population of spin level `label` (requires a spin or product space).
    pub fn level_population(&self, label: &str) -> Result<f64> {
        match &self.space {
            Space::Product(p) => {
                let s = p.spin.index_of(label)?;
                Ok((0..p.fock.dim())
                    .map(|n| self.matrix[(p.index(s, n), p.index(s, n))].re)
                    .sum())
            }
            Space::Spin(s) => {
                let i = s.index_of(label)?;
                Ok(self.matrix[(i, i)].re)
            }
            _ => Err(Error::param("label", "state has no spin factor")),
        }
    }

    /// Trace over the spin factor.
    pub fn motional_reduced(&self) -> Result<DMatrix<C64>> {
        let p = self
            .space
            .as_product()
            .ok_or_else(|| Error::param("space", "partial trace needs a product space"))?;
        let nf = p.fock.dim();
        let mut m = DMatrix::zeros(nf, nf);
        for s in 0..p.spin.dim() {
            for i in 0..nf {
                for j in 0..nf {
                    m[(i, j)] += self.matrix[(p.index(s, i), p.index(s, j))];
                }
            }
        }
        Ok(m)
    }

    /// Trace over the Fock factor.
    pub fn spin_reduced(&self) -> Result<DMatrix<C64>> {
        let p = self
            .space
            .as_product()
            .ok_or_else(|| Error::param("space", "partial trace needs a product space"))?;
        let ns = p.spin.dim();
        let mut m = DMatrix::zeros(ns, ns);
        for a in 0..ns {
            for b in 0..ns {
                m[(a, b)] = (0..p.fock.dim())
                    .map(|n| self.matrix[(p.index(a, n), p.index(b, n))])
                    .sum();
            }
        }
        Ok(m)
    }

    /// Ideal internal-state reset: `|s⟩⟨s| ⊗ Tr_spin ρ`.
    pub fn reset_spin(&self, label: &str) -> Result<Self> {
        let p = self
            .space
            .as_product()
            .ok_or_else(|| Error::param("space", "spin reset needs a product space"))?;
        let s = p.spin.index_of(label)?;
        let motion = self.motional_reduced()?;
        let d = p.dim();
        let nf = p.fock.dim();
        let mut m = DMatrix::zeros(d, d);
        for i in 0..nf {
            for j in 0..nf {
                m[(p.index(s, i), p.index(s, j))] = motion[(i, j)];
            }
        }
        Self::from_evolved(self.space.clone(), m)
    }
}

/// `|0'⟩⟨0'| ⊗ ρ_th(n̄)`: thermal motion with the ion prepared in `0'`.
pub fn thermal_density(n_bar: f64, space: &ProductSpace) -> Result<DensityMatrix> {
    let dist = thermal_distribution(n_bar, space.fock.n_max())?;
    let s = space.spin.index_of("0'")?;
    DensityMatrix::spin_times_fock(space, s, &dist)
}

/// States that can report `⟨A⟩`.
pub trait QuantumState {
    fn expectation(&self, op: &Operator) -> Result<C64>;
}

impl QuantumState for Ket {
    fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.dim() != self.vector.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vector.len(),
                got: op.dim(),
            });
        }
        Ok(self.vector.dotc(&(op.matrix() * &self.vector)))
    }
}

impl QuantumState for DensityMatrix {
    fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: op.dim(),
            });
        }
        // tr(Aρ) without forming the product
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += op.matrix()[(i, k)] * self.matrix[(k, i)];
            }
        }
        Ok(acc)
    }
}

pub fn expectation(op: &Operator, state: &impl QuantumState) -> Result<C64> {
    state.expectation(op)
}
