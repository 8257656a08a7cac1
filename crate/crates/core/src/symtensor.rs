//! Fully symmetric contravariant coefficient tensors in compressed storage.
//!
//! Each unordered multi-index is stored once under its ascending-sorted form and
//! the stored value is the component `a^{i1...im}` itself, shared by every
//! permutation of the index. Indices are 0-based in the Rust API and 1-based in
//! the JSON file format.

use std::collections::BTreeMap;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CartanError, Result};

/// Largest supported dimension `n`.
pub const MAX_DIM: usize = 8;
/// Largest supported rank `m`.
pub const MAX_RANK: usize = 8;

/// A covector of momenta `p_i`, the evaluation point of every geometric object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Momentum(Vec<f64>);

impl Momentum {
    pub fn new(components: Vec<f64>) -> Self {
        Momentum(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn scaled(&self, factor: f64) -> Momentum {
        Momentum(self.0.iter().map(|x| x * factor).collect())
    }

    /// Copy of `self` with `delta` added to component `axis`.
    pub fn shifted(&self, axis: usize, delta: f64) -> Momentum {
        let mut v = self.0.clone();
        v[axis] += delta;
        Momentum(v)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Parse a comma-separated list of reals, e.g. `1,2.5,-3`.
    pub fn parse_csv(text: &str) -> Result<Momentum> {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| CartanError::InvalidArgument(format!("bad momentum component {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .and_then(|v| {
                if v.iter().all(|x| x.is_finite()) {
                    Ok(Momentum(v))
                } else {
                    Err(CartanError::InvalidArgument("momentum components must be finite".into()))
                }
            })
    }
}

impl Deref for Momentum {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Momentum {
    fn from(v: Vec<f64>) -> Self {
        Momentum(v)
    }
}

/// Fully symmetric rank-`m` contravariant tensor over dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    dim: usize,
    rank: usize,
    coeffs: BTreeMap<Vec<usize>, f64>,
}

impl SymTensor {
    /// Build a coefficient tensor from `(multi-index, value)` pairs.
    ///
    /// Indices are 0-based and may be given in any order; they are sorted on
    /// insertion. Two entries that sort to the same key are rejected.
    pub fn new<I>(dim: usize, rank: usize, entries: I) -> Result<SymTensor>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        if rank < 3 {
            return Err(CartanError::RankTooSmall(rank));
        }
        if dim < 2 {
            return Err(CartanError::DimTooSmall { dim, min: 2 });
        }
        if dim > MAX_DIM {
            return Err(CartanError::CapExceeded { what: "dimension", value: dim, max: MAX_DIM });
        }
        if rank > MAX_RANK {
            return Err(CartanError::CapExceeded { what: "rank", value: rank, max: MAX_RANK });
        }
        let mut coeffs = BTreeMap::new();
        for (mut index, value) in entries {
            if index.len() != rank {
                let len = index.len();
                return Err(CartanError::IndexLength { index, len, rank });
            }
            if let Some(&bad) = index.iter().find(|&&i| i >= dim) {
                return Err(CartanError::IndexOutOfRange { index: bad, dim });
            }
            index.sort_unstable();
            if coeffs.contains_key(&index) {
                return Err(CartanError::DuplicateIndex(index));
            }
            coeffs.insert(index, value);
        }
        Ok(SymTensor { dim, rank, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Stored `(sorted index, value)` pairs.
    pub fn entries(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.coeffs.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn num_stored(&self) -> usize {
        self.coeffs.len()
    }

    /// Component lookup for an index in any order; absent indices read as zero.
    pub fn get(&self, index: &[usize]) -> f64 {
        if index.len() != self.rank {
            return 0.0;
        }
        let mut key = index.to_vec();
        key.sort_unstable();
        self.coeffs.get(&key).copied().unwrap_or(0.0)
    }

    /// Value of a rank-0 tensor (a full contraction).
    pub fn scalar(&self) -> f64 {
        debug_assert_eq!(self.rank, 0);
        self.coeffs.get(&Vec::new()).copied().unwrap_or(0.0)
    }

    /// Tensor whose coefficients are the absolute values of these.
    pub fn abs(&self) -> SymTensor {
        SymTensor {
            dim: self.dim,
            rank: self.rank,
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v.abs())).collect(),
        }
    }

    /// Contract `k` slots with the momentum `p`.
    ///
    /// The component of the result at free index `J` is the sum over all ordered
    /// bound tuples `b` of `a^{J b} p_{b1}...p_{bk}`. Each stored index is split
    /// into every distinct (free, bound) sub-multiset pair and weighted by the
    /// number of ordered arrangements of the bound part.
    pub fn contract(&self, p: &[f64], k: usize) -> Result<SymTensor> {
        if p.len() != self.dim {
            return Err(CartanError::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        if k > self.rank {
            return Err(CartanError::ContractionOrder { k, rank: self.rank });
        }
        if k == 0 {
            return Ok(self.clone());
        }
        let mut out: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (index, &value) in &self.coeffs {
            let groups = run_lengths(index);
            let mut bound = vec![0usize; groups.len()];
            for_each_split(&groups, k, 0, &mut bound, &mut |bound| {
                let mut arrangements = factorial(k);
                let mut monomial = 1.0;
                let mut free = Vec::with_capacity(self.rank - k);
                for (&(v, count), &b) in groups.iter().zip(bound) {
                    arrangements /= factorial(b);
                    monomial *= p[v].powi(b as i32);
                    free.extend(std::iter::repeat_n(v, count - b));
                }
                *out.entry(free).or_insert(0.0) += arrangements as f64 * monomial * value;
            });
        }
        Ok(SymTensor { dim: self.dim, rank: self.rank - k, coeffs: out })
    }

    /// Row-major dense expansion (`n^rank` entries). Intended for rank <= 4.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let total = n.pow(self.rank as u32);
        let mut idx = vec![0usize; self.rank];
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            for slot in (0..self.rank).rev() {
                idx[slot] = rem % n;
                rem /= n;
            }
            out.push(self.get(&idx));
        }
        out
    }

    pub fn from_json_str(text: &str) -> Result<SymTensor> {
        let file: TensorFile = serde_json::from_str(text)?;
        file.into_tensor()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TensorFile::from(self))?)
    }

    pub fn load(path: &Path) -> Result<SymTensor> {
        SymTensor::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json_string()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Number of distinct permutations of a sorted multi-index: `m! / (k1! k2! ...)`.
pub fn multiplicity(sorted_index: &[usize]) -> u64 {
    let mut result = factorial(sorted_index.len());
    for (_, count) in run_lengths(sorted_index) {
        result /= factorial(count);
    }
    result
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// `(value, repetition count)` for each run of a sorted index.
fn run_lengths(sorted: &[usize]) -> Vec<(usize, usize)> {
    let mut groups: Vec<(usize, usize)> = Vec::new();
    for &i in sorted {
        match groups.last_mut() {
            Some((v, c)) if *v == i => *c += 1,
            _ => groups.push((i, 1)),
        }
    }
    groups
}

fn for_each_split<F: FnMut(&[usize])>(
    groups: &[(usize, usize)],
    remaining: usize,
    pos: usize,
    bound: &mut Vec<usize>,
    visit: &mut F,
) {
    if pos == groups.len() {
        if remaining == 0 {
            visit(bound);
        }
        return;
    }
    let available: usize = groups[pos..].iter().map(|g| g.1).sum();
    if available < remaining {
        return;
    }
    for b in 0..=groups[pos].1.min(remaining) {
        bound[pos] = b;
        for_each_split(groups, remaining - b, pos + 1, bound, visit);
    }
    bound[pos] = 0;
}

/// On-disk JSON tensor format with 1-based indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorFile {
    pub dim: usize,
    pub rank: usize,
    pub coeffs: Vec<CoeffEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub index: Vec<usize>,
    pub value: f64,
}

impl TensorFile {
    pub fn into_tensor(self) -> Result<SymTensor> {
        let dim = self.dim;
        let mut entries = Vec::with_capacity(self.coeffs.len());
        for entry in self.coeffs {
            let mut index = Vec::with_capacity(entry.index.len());
            for i in entry.index {
                if i == 0 || i > dim {
                    return Err(CartanError::IndexOutOfRange { index: i, dim });
                }
                index.push(i - 1);
            }
            entries.push((index, entry.value));
        }
        SymTensor::new(dim, self.rank, entries)
    }
}

impl From<&SymTensor> for TensorFile {
    fn from(t: &SymTensor) -> Self {
        TensorFile {
            dim: t.dim,
            rank: t.rank,
            coeffs: t
                .entries()
                .map(|(idx, value)| CoeffEntry { index: idx.iter().map(|i| i + 1).collect(), value })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diagonal_cubic() -> SymTensor {
        SymTensor::new(4, 3, (0..4).map(|i| (vec![i, i, i], 1.0))).unwrap()
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity(&[1, 2, 3, 4]), 24);
        assert_eq!(multiplicity(&[1, 1, 2]), 3);
        assert_eq!(multiplicity(&[2, 2, 2]), 1);
        assert_eq!(multiplicity(&[]), 1);
    }

    #[test]
    fn unsorted_entries_are_sorted_and_symmetric() {
        let t = SymTensor::new(3, 3, vec![(vec![2, 0, 1], 5.0)]).unwrap();
        assert_eq!(t.entries().next().unwrap().0, &[0, 1, 2]);
        for idx in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            assert_eq!(t.get(&idx), 5.0);
        }
        assert_eq!(t.get(&[0, 0, 1]), 0.0);
    }

    #[test]
    fn build_errors() {
        assert!(matches!(
            SymTensor::new(2, 3, vec![(vec![0, 2, 1], 5.0)]),
            Err(CartanError::IndexOutOfRange { index: 2, dim: 2 })
        ));
        assert!(matches!(
            SymTensor::new(3, 3, vec![(vec![0, 1, 2], 1.0), (vec![2, 1, 0], 2.0)]),
            Err(CartanError::DuplicateIndex(_))
        ));
        assert!(matches!(SymTensor::new(3, 2, vec![]), Err(CartanError::RankTooSmall(2))));
        assert!(matches!(SymTensor::new(1, 3, vec![]), Err(CartanError::DimTooSmall { .. })));
        assert!(matches!(SymTensor::new(9, 3, vec![]), Err(CartanError::CapExceeded { .. })));
        assert!(matches!(SymTensor::new(3, 3, vec![(vec![0, 1], 1.0)]), Err(CartanError::IndexLength { .. })));
    }

    #[test]
    fn contraction_examples() {
        let t = diagonal_cubic();
        let full = t.contract(&[1.0; 4], 3).unwrap();
        assert_eq!(full.rank(), 0);
        assert_eq!(full.scalar(), 4.0);
        assert_eq!(t.contract(&[1.0; 4], 0).unwrap(), t);

        let bm = SymTensor::new(4, 4, vec![(vec![0, 1, 2, 3], 1.0 / 24.0)]).unwrap();
        assert!((bm.contract(&[1.0; 4], 4).unwrap().scalar() - 1.0).abs() < 1e-15);
        assert!((bm.contract(&[1.0, 2.0, 3.0, 4.0], 4).unwrap().scalar() - 24.0).abs() < 1e-13);
    }

    #[test]
    fn contraction_rejects_bad_input() {
        let t = diagonal_cubic();
        assert!(matches!(t.contract(&[1.0; 3], 1), Err(CartanError::DimensionMismatch { .. })));
        assert!(matches!(t.contract(&[1.0; 4], 4), Err(CartanError::ContractionOrder { .. })));
    }

    #[test]
    fn json_uses_one_based_indices() {
        let text = r#"{"dim": 2, "rank": 3, "coeffs": [{"index": [2, 1, 1], "value": 0.5}]}"#;
        let t = SymTensor::from_json_str(text).unwrap();
        assert_eq!(t.get(&[0, 0, 1]), 0.5);
        let back = SymTensor::from_json_str(&t.to_json_string().unwrap()).unwrap();
        assert_eq!(back, t);

        let zero = r#"{"dim": 2, "rank": 3, "coeffs": [{"index": [0, 1, 1], "value": 0.5}]}"#;
        assert!(matches!(SymTensor::from_json_str(zero), Err(CartanError::IndexOutOfRange { .. })));
        let dup =
            r#"{"dim": 2, "rank": 3, "coeffs": [{"index": [1,1,2], "value": 1}, {"index": [2,1,1], "value": 2}]}"#;
        assert!(matches!(SymTensor::from_json_str(dup), Err(CartanError::DuplicateIndex(_))));
    }

    #[test]
    fn momentum_csv() {
        assert_eq!(&*Momentum::parse_csv("1, -1,2.5").unwrap(), &[1.0, -1.0, 2.5]);
        assert!(Momentum::parse_csv("1,x").is_err());
        assert!(Momentum::parse_csv("1,inf").is_err());
    }
}
