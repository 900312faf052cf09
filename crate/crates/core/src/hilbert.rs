//! Labeled bases and pure quantum states.
//!
//! Every operator and state in this crate carries an ordered list of named
//! basis kets, so that protocol code can address levels as `"0b"`, `"1g"`,
//! `"Phi0"` and so on instead of raw indices.

use std::sync::Arc;

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance on the norm of a state after construction and after every
/// propagation step.
pub const NORM_TOL: f64 = 1e-9;

/// A single named ket in an ordered basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisLabel {
    pub name: String,
    pub index: usize,
}

/// An ordered basis: indices form the contiguous range `0..dim()` and names
/// are unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    labels: Vec<BasisLabel>,
}

impl Basis {
    pub fn new<I, S>(names: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<BasisLabel> = names
            .into_iter()
            .enumerate()
            .map(|(index, name)| BasisLabel { name: name.into(), index })
            .collect();
        if labels.is_empty() {
            return Err(Error::InvalidBasis("basis must be non-empty".into()));
        }
        for (i, a) in labels.iter().enumerate() {
            for b in labels.iter().skip(i + 1) {
                if a.name == b.name {
                    return Err(Error::InvalidBasis(format!(
                        "duplicate label `{}`",
                        a.name
                    )));
                }
            }
        }
        Ok(Arc::new(Self { labels }))
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn name(&self, index: usize) -> &str {
        &self.labels[index].name
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| Error::UnknownLabel(name.into()))
    }
}

/// Check that two bases describe the same ordered set of kets.
pub fn same_basis(a: &Arc<Basis>, b: &Arc<Basis>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A normalized pure state over a labeled basis.
#[derive(Debug, Clone)]
pub struct QuantumState {
    basis: Arc<Basis>,
    amplitudes: Array1<C64>,
}

impl QuantumState {
    /// Build a state from raw amplitudes, enforcing unit norm within
    /// [`NORM_TOL`].
    pub fn new(basis: Arc<Basis>, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::BasisMismatch(format!(
                "amplitude vector length {} vs basis dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NormViolation { norm, tol: NORM_TOL });
        }
        Ok(Self { basis, amplitudes })
    }

    /// Build a state from amplitudes of arbitrary non-zero norm, rescaling to
    /// unit norm.
    pub fn normalized(basis: Arc<Basis>, amplitudes: Array1<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("cannot normalize the zero vector".into()));
        }
        Self::new(basis, amplitudes.mapv(|a| a / norm))
    }

    /// The basis ket named `name`.
    pub fn ket(basis: Arc<Basis>, name: &str) -> Result<Self> {
        let i = basis.index_of(name)?;
        let mut amplitudes = Array1::zeros(basis.dim());
        amplitudes[i] = C64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// |<name|psi>|^2
    pub fn population(&self, name: &str) -> Result<f64> {
        Ok(self.amplitudes[self.basis.index_of(name)?].norm_sqr())
    }

    pub fn populations(&self) -> Array1<f64> {
        self.amplitudes.mapv(|a| a.norm_sqr())
    }

    /// <other|self>
    pub fn overlap(&self, other: &Self) -> C64 {
        other
            .amplitudes
            .iter()
            .zip(self.amplitudes.iter())
            .map(|(o, s)| o.conj() * s)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_indices_are_contiguous_and_named() {
        let b = Basis::new(["0", "1", "2"]).unwrap();
        assert_eq!(b.dim(), 3);
        assert_eq!(b.index_of("1").unwrap(), 1);
        assert_eq!(b.labels()[2].index, 2);
        assert_eq!(b.name(0), "0");
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(Basis::new(["a", "a"]).is_err());
    }

    #[test]
    fn ket_is_normalized() {
        let b = Basis::new(["g", "e"]).unwrap();
        let s = QuantumState::ket(b, "e").unwrap();
        assert_eq!(s.population("e").unwrap(), 1.0);
        assert_eq!(s.population("g").unwrap(), 0.0);
    }

    #[test]
    fn non_normalized_rejected() {
        let b = Basis::new(["g", "e"]).unwrap();
        let amps = Array1::from(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(QuantumState::new(b.clone(), amps.clone()).is_err());
        let s = QuantumState::normalized(b, amps).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_label_errors() {
        let b = Basis::new(["g"]).unwrap();
        assert!(matches!(
            QuantumState::ket(b, "x"),
            Err(Error::UnknownLabel(_))
        ));
    }
}
