//! Small dense rank-3 and rank-4 arrays, stored flat in row-major order.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

/// Dense `n x n x n` array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tens3 {
    dim: usize,
    data: Vec<f64>,
}

/// Dense `n x n x n x n` array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tens4 {
    dim: usize,
    data: Vec<f64>,
}

macro_rules! dense_common {
    ($ty:ident, $rank:literal) => {
        impl $ty {
            pub fn zeros(dim: usize) -> Self {
                $ty { dim, data: vec![0.0; dim.pow($rank)] }
            }

            pub fn from_flat(dim: usize, data: Vec<f64>) -> Self {
                assert_eq!(data.len(), dim.pow($rank), "flat length does not match dimension");
                $ty { dim, data }
            }

            pub fn from_fn(dim: usize, mut f: impl FnMut([usize; $rank]) -> f64) -> Self {
                let mut out = Self::zeros(dim);
                for flat in 0..out.data.len() {
                    let idx = Self::unflatten(dim, flat);
                    out.data[flat] = f(idx);
                }
                out
            }

            fn unflatten(dim: usize, mut flat: usize) -> [usize; $rank] {
                let mut idx = [0usize; $rank];
                for slot in (0..$rank).rev() {
                    idx[slot] = flat % dim;
                    flat /= dim;
                }
                idx
            }

            fn flatten(&self, idx: [usize; $rank]) -> usize {
                idx.iter().fold(0, |acc, &i| acc * self.dim + i)
            }

            pub fn dim(&self) -> usize {
                self.dim
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.data
            }

            /// All `(index, value)` pairs in row-major order.
            pub fn iter(&self) -> impl Iterator<Item = ([usize; $rank], f64)> + '_ {
                let dim = self.dim;
                self.data.iter().enumerate().map(move |(flat, &v)| (Self::unflatten(dim, flat), v))
            }

            pub fn max_abs(&self) -> f64 {
                self.data.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
            }

            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                assert_eq!(self.dim, other.dim);
                self.data.iter().zip(&other.data).fold(0.0, |acc: f64, (a, b)| acc.max((a - b).abs()))
            }

            pub fn scale(&self, factor: f64) -> Self {
                $ty { dim: self.dim, data: self.data.iter().map(|v| v * factor).collect() }
            }

            pub fn add_scaled(&mut self, other: &Self, factor: f64) {
                assert_eq!(self.dim, other.dim);
                for (a, b) in self.data.iter_mut().zip(&other.data) {
                    *a += factor * b;
                }
            }

            /// Largest deviation of `self` from its image under an index permutation.
            pub fn asymmetry(&self, perm: [usize; $rank]) -> f64 {
                self.iter()
                    .map(|(idx, v)| {
                        let mut permuted = [0usize; $rank];
                        for slot in 0..$rank {
                            permuted[slot] = idx[perm[slot]];
                        }
                        (v - self[permuted]).abs()
                    })
                    .fold(0.0, f64::max)
            }

            /// Contract the last slot with `v`, giving a flat array of one rank lower.
            pub fn contract_last(&self, v: &[f64]) -> Vec<f64> {
                assert_eq!(v.len(), self.dim);
                self.data.chunks(self.dim).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
            }
        }

        impl Index<[usize; $rank]> for $ty {
            type Output = f64;

            fn index(&self, idx: [usize; $rank]) -> &f64 {
                &self.data[self.flatten(idx)]
            }
        }

        impl IndexMut<[usize; $rank]> for $ty {
            fn index_mut(&mut self, idx: [usize; $rank]) -> &mut f64 {
                let flat = self.flatten(idx);
                &mut self.data[flat]
            }
        }
    };
}

dense_common!(Tens3, 3);
dense_common!(Tens4, 4);

impl Tens4 {
    /// Every permutation of four slots.
    pub fn max_asymmetry_all(&self) -> f64 {
        [[1, 0, 2, 3], [0, 2, 1, 3], [0, 1, 3, 2], [3, 1, 2, 0]]
            .into_iter()
            .map(|perm| self.asymmetry(perm))
            .fold(0.0, f64::max)
    }

    /// `X^{hijk} - X^{hikj}`, the alternating sum over the last two slots.
    pub fn alternate_jk(&self) -> Tens4 {
        Tens4::from_fn(self.dim, |[h, i, j, k]| self[[h, i, j, k]] - self[[h, i, k, j]])
    }
}

impl Tens3 {
    /// Largest deviation from full symmetry (adjacent transpositions generate S3).
    pub fn max_asymmetry_all(&self) -> f64 {
        self.asymmetry([1, 0, 2]).max(self.asymmetry([0, 2, 1]))
    }
}

/// Largest absolute entry of a slice.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

/// Largest componentwise absolute difference of two slices.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |acc: f64, (x, y)| acc.max((x - y).abs()))
}

/// `max|a - b| / max|b|`, falling back to the absolute difference when `b` vanishes.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = max_abs(b);
    let diff = max_abs_diff(a, b);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_layout() {
        let t = Tens3::from_fn(2, |[i, j, k]| (100 * i + 10 * j + k) as f64);
        assert_eq!(t.as_slice()[5], 101.0);
        assert_eq!(t[[1, 0, 1]], 101.0);
        assert_eq!(t.contract_last(&[1.0, 2.0])[1], 10.0 + 2.0 * 11.0);
    }

    #[test]
    fn asymmetry_detects_non_symmetric() {
        let sym = Tens4::from_fn(3, |[h, i, j, k]| (h + i + j + k) as f64);
        assert_eq!(sym.max_asymmetry_all(), 0.0);
        let not = Tens4::from_fn(3, |[h, i, j, k]| (h + 2 * i + j * k) as f64);
        assert!(not.max_asymmetry_all() > 0.0);
        let alt = not.alternate_jk();
        assert_eq!(alt.asymmetry([0, 1, 3, 2]), 2.0 * alt.max_abs());
    }
}
