use std::fmt;
use std::ops::{Deref, DerefMut};

use serde::{Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A point of `R^d`. Up to four coordinates are stored inline.
#[derive(Clone, PartialEq, Default)]
pub struct Point(SmallVec<[f64; 4]>);

impl Point {
    /// Checked constructor; every coordinate must be finite.
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parameter(format!("non-finite coordinates {coords:?}")));
        }
        Ok(Self(SmallVec::from_slice(coords)))
    }

    pub fn zeros(d: usize) -> Self {
        Self(SmallVec::from_elem(0.0, d))
    }

    /// `t · e_axis`.
    pub fn axis(d: usize, axis: usize, t: f64) -> Self {
        let mut p = Self::zeros(d);
        p.0[axis] = t;
        p
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dist(&self, other: &[f64]) -> f64 {
        dist(&self.0, other)
    }

    pub fn add(&self, other: &[f64]) -> Self {
        Self(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &[f64]) -> Self {
        Self(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|a| a * s).collect())
    }

    /// `self + s · v`.
    pub fn offset(&self, s: f64, v: &[f64]) -> Self {
        Self(self.0.iter().zip(v).map(|(a, b)| a + s * b).collect())
    }

    /// First `d − 1` coordinates.
    pub fn tilde(&self) -> &[f64] {
        &self.0[..self.0.len() - 1]
    }

    /// Last coordinate.
    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.to_vec()
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Point {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Self(SmallVec::from_slice(v))
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Self(SmallVec::from_vec(v))
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Self {
        Self(SmallVec::from_slice(&v))
    }
}

impl FromIterator<f64> for Point {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(s)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
