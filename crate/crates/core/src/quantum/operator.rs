use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use super::basis::{FockBasis, ProductSpace, Space, SpinBasis};
use crate::error::{Error, Result};
use crate::C64;

/// Dense operator on a named space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: Space,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(space: impl Into<Space>, matrix: DMatrix<C64>) -> Result<Self> {
        let space = space.into();
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: if matrix.nrows() != d { matrix.nrows() } else { matrix.ncols() },
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: impl Into<Space>) -> Self {
        let space = space.into();
        let d = space.dim();
        Self {
            space,
            matrix: DMatrix::zeros(d, d),
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        let c = c.into();
        Self {
            space: self.space.clone(),
            matrix: &self.matrix * c,
        }
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max |A - A†|` over entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Hermitian relative to the operator's own scale.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_defect() <= rel_tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        self.check_same(rhs)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: sparse_aware_product(&self.matrix, &rhs.matrix),
        })
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    fn check_same(&self, rhs: &Operator) -> Result<()> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rhs.dim(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, rhs: &Operator) -> Result<Operator> {
        self.check_same(rhs)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix + &rhs.matrix,
        })
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operator dimension mismatch in `+`")
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        &self + &rhs
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self + &(-rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.compose(rhs).expect("operator dimension mismatch in `*`")
    }
}

/// Dense product that skips structural zeros; model operators are mostly
/// empty, which makes this far cheaper than a full matrix multiply.
fn sparse_aware_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let d = a.nrows();
    let zero = C64::new(0.0, 0.0);
    let a_cols: Vec<Vec<(usize, C64)>> = (0..a.ncols())
        .map(|k| (0..d).filter(|&i| a[(i, k)] != zero).map(|i| (i, a[(i, k)])).collect())
        .collect();
    let mut out = DMatrix::zeros(d, b.ncols());
    for j in 0..b.ncols() {
        for (k, col) in a_cols.iter().enumerate() {
            let bkj = b[(k, j)];
            if bkj == zero {
                continue;
            }
            for &(i, aik) in col {
                out[(i, j)] += aik * bkj;
            }
        }
    }
    out
}

/// Annihilation operator `a` with `⟨n-1|a|n⟩ = √n`.
pub fn lowering_op(fock: FockBasis) -> Operator {
    let d = fock.dim();
    let mut m = DMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator {
        space: Space::Fock(fock),
        matrix: m,
    }
}

/// Creation operator `a†` (truncated: `a†|n_max⟩ = 0`).
pub fn raising_op(fock: FockBasis) -> Operator {
    lowering_op(fock).adjoint()
}

/// Number operator `a†a`, built directly so the diagonal is exact.
pub fn number_op(fock: FockBasis) -> Operator {
    let d = fock.dim();
    let m = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(i as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Operator {
        space: Space::Fock(fock),
        matrix: m,
    }
}

pub fn identity(space: impl Into<Space>) -> Operator {
    let space = space.into();
    let d = space.dim();
    Operator {
        space,
        matrix: DMatrix::identity(d, d),
    }
}

/// `|to⟩⟨from|` on a spin basis.
pub fn spin_transition(spin: &SpinBasis, to: &str, from: &str) -> Result<Operator> {
    let (i, j) = (spin.index_of(to)?, spin.index_of(from)?);
    let d = spin.dim();
    let mut m = DMatrix::zeros(d, d);
    m[(i, j)] = C64::new(1.0, 0.0);
    Ok(Operator {
        space: Space::Spin(spin.clone()),
        matrix: m,
    })
}

/// `|s⟩⟨s|` on a spin basis.
pub fn projector(spin: &SpinBasis, label: &str) -> Result<Operator> {
    spin_transition(spin, label, label)
}

/// Kronecker product `a ⊗ b`. A spin operator tensored with a Fock operator
/// lands in the corresponding [`ProductSpace`].
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    let space = match (&a.space, &b.space) {
        (Space::Spin(s), Space::Fock(f)) => Space::Product(ProductSpace::new(s.clone(), *f)),
        _ => Space::Generic(a.dim() * b.dim()),
    };
    Operator {
        space,
        matrix: a.matrix.kronecker(&b.matrix),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fock(n: usize) -> FockBasis {
        FockBasis::new(n).unwrap()
    }

    #[test]
    fn lowering_single_quantum() {
        let a = lowering_op(fock(1));
        assert_eq!(a.get(0, 1), C64::new(1.0, 0.0));
        assert_eq!(a.get(1, 0), C64::new(0.0, 0.0));
    }

    #[test]
    fn lowering_superdiagonal() {
        let a = lowering_op(fock(4));
        assert_relative_eq!(a.get(2, 3).re, 1.7320508075688772, epsilon = 1e-15);
        for r in 0..5 {
            assert_eq!(a.get(r, 0), C64::new(0.0, 0.0), "a|0> must vanish");
        }
        for r in 0..5 {
            for c in 0..5 {
                if c != r + 1 {
                    assert_eq!(a.get(r, c).norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn number_eigenvalues_exact() {
        let f = fock(12);
        let a = lowering_op(f);
        let n = &a.adjoint() * &a;
        let exact = number_op(f);
        for k in 0..=12 {
            assert_eq!(exact.get(k, k).re, k as f64);
            assert_relative_eq!(n.get(k, k).re, k as f64, epsilon = 1e-14);
        }
        let eig = n.matrix().clone().symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (k, e) in ev.iter().enumerate() {
            assert_relative_eq!(*e, k as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_tensor_identity() {
        let s = SpinBasis::new(["g", "e"]).unwrap();
        let f = fock(3);
        let t = tensor(&identity(s.clone()), &identity(f));
        assert_eq!(t.dim(), 8);
        assert_eq!(t, identity(ProductSpace::new(s, f)));
    }

    #[test]
    fn tensor_dimension_is_product() {
        let s = SpinBasis::new(["a", "b", "c"]).unwrap();
        let t = tensor(&projector(&s, "b").unwrap(), &lowering_op(fock(5)));
        assert_eq!(t.dim(), 18);
        assert!(matches!(t.space(), Space::Product(_)));
        let g = tensor(&t, &identity(Space::Generic(2)));
        assert_eq!(g.dim(), 36);
    }

    #[test]
    fn new_rejects_non_square() {
        let m = DMatrix::<C64>::zeros(3, 4);
        assert!(Operator::new(Space::Generic(3), m).is_err());
    }
}
