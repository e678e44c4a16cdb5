use crate::error::{Error, Result};

/// Truncated Fock space `|0⟩ … |n_max⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockBasis {
    n_max: usize,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::param("n_max", "must be at least 1"));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

/// Ordered set of internal levels, identified by label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinBasis {
    labels: Vec<String>,
}

impl SpinBasis {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::param("labels", "spin basis needs at least one level"));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::param("labels", format!("duplicate level `{l}`")));
            }
        }
        Ok(Self { labels })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::param("label", format!("unknown level `{label}`")))
    }
}

/// Spin ⊗ Fock, spin-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductSpace {
    pub spin: SpinBasis,
    pub fock: FockBasis,
}

impl ProductSpace {
    pub fn new(spin: SpinBasis, fock: FockBasis) -> Self {
        Self { spin, fock }
    }

    pub fn dim(&self) -> usize {
        self.spin.dim() * self.fock.dim()
    }

    /// Flat index of `|s, n⟩`.
    pub fn index(&self, spin: usize, n: usize) -> usize {
        debug_assert!(spin < self.spin.dim() && n < self.fock.dim());
        spin * self.fock.dim() + n
    }

    /// Inverse of [`ProductSpace::index`].
    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.fock.dim(), index % self.fock.dim())
    }

    pub fn index_of(&self, label: &str, n: usize) -> Result<usize> {
        if n > self.fock.n_max() {
            return Err(Error::param("n", format!("{n} exceeds n_max {}", self.fock.n_max())));
        }
        Ok(self.index(self.spin.index_of(label)?, n))
    }
}

/// The Hilbert space an operator or state acts on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Space {
    Spin(SpinBasis),
    Fock(FockBasis),
    Product(ProductSpace),
    /// Anonymous space of the given dimension (e.g. a tensor of two products).
    Generic(usize),
}

impl Space {
    pub fn dim(&self) -> usize {
        match self {
            Space::Spin(s) => s.dim(),
            Space::Fock(f) => f.dim(),
            Space::Product(p) => p.dim(),
            Space::Generic(d) => *d,
        }
    }

    pub fn as_product(&self) -> Option<&ProductSpace> {
        match self {
            Space::Product(p) => Some(p),
            _ => None,
        }
    }
}

impl From<SpinBasis> for Space {
    fn from(s: SpinBasis) -> Self {
        Space::Spin(s)
    }
}

impl From<FockBasis> for Space {
    fn from(f: FockBasis) -> Self {
        Space::Fock(f)
    }
}

impl From<ProductSpace> for Space {
    fn from(p: ProductSpace) -> Self {
        Space::Product(p)
    }
}
