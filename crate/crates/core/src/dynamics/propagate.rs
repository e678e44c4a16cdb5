use nalgebra::{DMatrix, DVector};

use super::integrator::{integrate, IntegratorConfig, OdeSystem};
use crate::error::{Error, Result};
use crate::ion::Hamiltonian;
use crate::quantum::{Ket, Operator, Space, SparseOp};
use crate::C64;

/// `exp(−iHt)` for Hermitian `H` (rad/s) via eigendecomposition.
pub fn unitary_propagator(h: &Operator, t: f64) -> DMatrix<C64> {
    let eig = h.matrix().clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&e| C64::from_polar(1.0, -e * t)),
    );
    v * DMatrix::from_diagonal(&phases) * v.adjoint()
}

struct Block {
    indices: Vec<usize>,
    vectors: DMatrix<C64>,
    energies: Vec<f64>,
}

/// Eigendecomposition of a static Hamiltonian, split into the connected
/// components of its coupling graph so that block-diagonal (RWA) models
/// stay cheap.
pub struct EigenPropagator {
    dim: usize,
    block_of: Vec<usize>,
    blocks: Vec<Block>,
}

impl EigenPropagator {
    pub fn new(h: &Operator) -> Self {
        let m = h.matrix();
        let d = m.nrows();
        let zero = C64::new(0.0, 0.0);
        let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); d];
        for j in 0..d {
            for i in 0..d {
                if i != j && (m[(i, j)] != zero || m[(j, i)] != zero) {
                    neighbours[j].push(i);
                }
            }
        }
        let mut block_of = vec![usize::MAX; d];
        let mut blocks = Vec::new();
        for seed in 0..d {
            if block_of[seed] != usize::MAX {
                continue;
            }
            let id = blocks.len();
            let mut indices = vec![seed];
            block_of[seed] = id;
            let mut head = 0;
            while head < indices.len() {
                let i = indices[head];
                head += 1;
                for &j in &neighbours[i] {
                    if block_of[j] == usize::MAX {
                        block_of[j] = id;
                        indices.push(j);
                    }
                }
            }
            indices.sort_unstable();
            let sub = DMatrix::from_fn(indices.len(), indices.len(), |r, c| m[(indices[r], indices[c])]);
            let eig = sub.symmetric_eigen();
            blocks.push(Block {
                indices,
                vectors: eig.eigenvectors,
                energies: eig.eigenvalues.iter().copied().collect(),
            });
        }
        Self { dim: d, block_of, blocks }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Amplitudes of `exp(−iHt)|start⟩` as (flat index, amplitude) pairs
    /// over the component containing `start`.
    pub fn evolve_basis_state(&self, start: usize, t: f64) -> Vec<(usize, C64)> {
        let b = &self.blocks[self.block_of[start]];
        let local = b.indices.binary_search(&start).expect("start in its own block");
        let n = b.indices.len();
        let coeffs: Vec<C64> = (0..n)
            .map(|k| b.vectors[(local, k)].conj() * C64::from_polar(1.0, -b.energies[k] * t))
            .collect();
        (0..n)
            .map(|r| {
                let amp: C64 = (0..n).map(|k| b.vectors[(r, k)] * coeffs[k]).sum();
                (b.indices[r], amp)
            })
            .collect()
    }
}

struct PureRhs {
    h0: SparseOp,
    drives: Vec<(SparseOp, SparseOp, f64)>,
}

impl OdeSystem for PureRhs {
    fn dim(&self) -> usize {
        self.h0.dim()
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let mi = C64::new(0.0, -1.0);
        self.h0.mul_vec_acc(mi, y, dy);
        for (v, vd, w) in &self.drives {
            let c = C64::from_polar(1.0, -w * t);
            v.mul_vec_acc(mi * c, y, dy);
            vd.mul_vec_acc(mi * c.conj(), y, dy);
        }
    }

    fn drift(&self, y: &[C64]) -> f64 {
        (y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs()
    }
}

/// Schrödinger evolution of `psi0`; eigendecomposition when `H` is static,
/// otherwise the ODE integrator.
pub fn evolve_pure(h: &Hamiltonian, psi0: &Ket, times: &[f64], cfg: &IntegratorConfig) -> Result<Vec<Ket>> {
    let d = h.dim();
    if psi0.vector().len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: psi0.vector().len(),
        });
    }
    let space = Space::Product(h.space().clone());
    let raw: Vec<Vec<C64>> = if h.is_time_independent() {
        super::integrator::check_times(times)?;
        let u = EigenPropagator::new(h.static_part());
        times
            .iter()
            .map(|&t| {
                let mut out = vec![C64::new(0.0, 0.0); d];
                for (i, &c) in psi0.vector().iter().enumerate() {
                    if c.norm() == 0.0 {
                        continue;
                    }
                    for (j, a) in u.evolve_basis_state(i, t) {
                        out[j] += c * a;
                    }
                }
                out
            })
            .collect()
    } else {
        integrate(&pure_rhs(h), psi0.vector().as_slice(), times, cfg)?
    };
    raw.into_iter()
        .zip(times)
        .map(|(v, &t)| {
            let mut v = DVector::from_vec(v);
            let norm = v.norm();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(Error::Integration {
                    t,
                    reason: "norm not conserved".into(),
                    trace_drift: norm - 1.0,
                });
            }
            v /= C64::new(norm, 0.0);
            Ket::new(space.clone(), v)
        })
        .collect()
}

fn pure_rhs(h: &Hamiltonian) -> PureRhs {
    PureRhs {
        h0: SparseOp::from_dense(h.static_part().matrix()),
        drives: h
            .oscillating()
            .iter()
            .map(|o| {
                (
                    SparseOp::from_dense(o.op.matrix()),
                    SparseOp::from_dense(&o.op.matrix().adjoint()),
                    o.angular_freq,
                )
            })
            .collect(),
    }
}

/// `Σ_j w_j |⟨j|U(t)|start⟩|²` for every start state, output time and
/// weight vector, indexed `[start][time][weight]`.
pub(crate) fn basis_state_readout(
    h: &Hamiltonian,
    starts: &[usize],
    weights: &[&[f64]],
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<Vec<Vec<f64>>>> {
    super::integrator::check_times(times)?;
    if let Some(w) = weights.iter().find(|w| w.len() != h.dim()) {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: w.len(),
        });
    }
    let readout = |probs: &mut dyn Iterator<Item = (usize, f64)>| {
        let mut acc = vec![0.0; weights.len()];
        for (j, p) in probs {
            for (a, w) in acc.iter_mut().zip(weights) {
                *a += w[j] * p;
            }
        }
        acc
    };
    if h.is_time_independent() {
        let u = EigenPropagator::new(h.static_part());
        Ok(starts
            .iter()
            .map(|&s| {
                times
                    .iter()
                    .map(|&t| readout(&mut u.evolve_basis_state(s, t).into_iter().map(|(j, a)| (j, a.norm_sqr()))))
                    .collect()
            })
            .collect())
    } else {
        let rhs = pure_rhs(h);
        starts
            .iter()
            .map(|&s| {
                let mut y0 = vec![C64::new(0.0, 0.0); h.dim()];
                y0[s] = C64::new(1.0, 0.0);
                let out = integrate(&rhs, &y0, times, cfg)?;
                Ok(out
                    .iter()
                    .map(|y| {
                        let norm: f64 = y.iter().map(|z| z.norm_sqr()).sum();
                        readout(&mut y.iter().map(|a| a.norm_sqr() / norm).enumerate())
                    })
                    .collect())
            })
            .collect()
    }
}
