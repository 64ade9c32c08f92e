//! Hypercubic lattices in one to three dimensions.
//!
//! Sites are numbered in row-major order, last axis fastest, so site `i` of a
//! lattice is also qubit `i` of every circuit and state built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::DEFAULT_QUBIT_CAP;

/// An unordered nearest-neighbour bond `(a, b)` with `a < b`.
pub type Edge = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    dims: Vec<usize>,
    periodic: bool,
}

impl LatticeSpec {
    /// Validates `dims` against the default qubit cap.
    pub fn new(dims: &[usize], periodic: bool) -> Result<Self> {
        Self::with_cap(dims, periodic, DEFAULT_QUBIT_CAP)
    }

    pub fn with_cap(dims: &[usize], periodic: bool, qubit_cap: usize) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::InvalidLattice(format!(
                "expected 1 to 3 dimensions, got {}",
                dims.len()
            )));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidLattice(format!(
                "every extent must be at least 2, got {d}"
            )));
        }
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .unwrap_or(usize::MAX);
        if n > qubit_cap {
            return Err(Error::QubitCount { n, cap: qubit_cap });
        }
        Ok(Self {
            dims: dims.to_vec(),
            periodic,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn n_dims(&self) -> usize {
        self.dims.len()
    }

    pub fn n_sites(&self) -> usize {
        self.dims.iter().product()
    }

    /// True when some extent equals 2, in which case the wrap bond along that
    /// axis coincides with the direct bond and is only counted once.
    pub fn has_collapsed_wrap(&self) -> bool {
        self.periodic && self.dims.contains(&2)
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut coords = vec![0; self.dims.len()];
        let mut rest = site;
        for (c, &d) in coords.iter_mut().zip(&self.dims).rev() {
            *c = rest % d;
            rest /= d;
        }
        coords
    }

    pub fn site(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&c, &d)| acc * d + c)
    }

    /// Nearest-neighbour bonds: every site paired with its `+1` neighbour along
    /// each axis (wrapping when periodic), duplicates removed. Order is site
    /// major, axis minor.
    pub fn edges(&self) -> Vec<Edge> {
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::new();
        for site in 0..self.n_sites() {
            let coords = self.coords(site);
            for axis in 0..self.dims.len() {
                let d = self.dims[axis];
                if !self.periodic && coords[axis] + 1 == d {
                    continue;
                }
                let mut nb = coords.clone();
                nb[axis] = (coords[axis] + 1) % d;
                let other = self.site(&nb);
                let e = (site.min(other), site.max(other));
                if seen.insert(e) {
                    edges.push(e);
                }
            }
        }
        edges
    }

    /// Pairs every site with its torus antipode (half shift along every axis).
    /// In one dimension this is `(i, i + N/2)`.
    pub fn antipodal_pairs(&self) -> Result<Vec<Edge>> {
        if self.dims.iter().any(|d| d % 2 != 0) {
            return Err(Error::OddDimension);
        }
        let mut pairs = Vec::with_capacity(self.n_sites() / 2);
        for site in 0..self.n_sites() {
            let shifted: Vec<usize> = self
                .coords(site)
                .iter()
                .zip(&self.dims)
                .map(|(&c, &d)| (c + d / 2) % d)
                .collect();
            let other = self.site(&shifted);
            if site < other {
                pairs.push((site, other));
            }
        }
        Ok(pairs)
    }
}
