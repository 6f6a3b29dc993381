//! Multilinear forms on (ℝⁿ)^m and blocked-index power sums.
//!
//! A form is described by its coefficient tensor `T(e_{j₁},…,e_{j_m})`. The
//! tensor is either stored densely in row-major order or produced by a rule
//! (sparse map, diagonal, lift of a lower-degree form), so that witness
//! families with small support never materialise all `n^m` entries.
//!
//! All indices in this API are 0-based; the JSON form files use 1-based
//! indices (see [`crate::io`]).

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest number of entries a dense coefficient tensor may hold.
pub const MAX_DENSE_ENTRIES: usize = 100_000_000;

/// A partition `(n₁,…,n_k)` of the `m` argument slots into consecutive blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockPattern {
    blocks: Vec<usize>,
    degree: usize,
}

impl BlockPattern {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::domain("block pattern needs at least one block"));
        }
        if blocks.contains(&0) {
            return Err(Error::domain(format!(
                "block sizes must be positive: {blocks:?}"
            )));
        }
        let degree = blocks.iter().sum();
        Ok(BlockPattern { blocks, degree })
    }

    /// `(1,…,1)`: every slot is its own block, so blocked sums are full sums.
    pub fn all_ones(m: usize) -> Result<Self> {
        Self::new(vec![1; m])
    }

    /// The single block `(m)`: only the joint diagonal is summed.
    pub fn single(m: usize) -> Result<Self> {
        Self::new(vec![m])
    }

    /// Every ordered composition of `m`.
    pub fn compositions(m: usize) -> Vec<BlockPattern> {
        fn rec(rest: usize, cur: &mut Vec<usize>, out: &mut Vec<BlockPattern>) {
            if rest == 0 {
                out.push(BlockPattern::new(cur.clone()).expect("nonempty composition"));
                return;
            }
            for b in 1..=rest {
                cur.push(b);
                rec(rest - b, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if m > 0 {
            rec(m, &mut Vec::new(), &mut out);
        }
        out
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    /// Number of blocks.
    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    /// Total degree `n₁+⋯+n_k`.
    pub fn m(&self) -> usize {
        self.degree
    }

    /// Writes the m-index that repeats `idx[l]` exactly `n_l` times, block by block.
    pub fn expand_into(&self, idx: &[usize], out: &mut Vec<usize>) {
        out.clear();
        for (&i, &b) in idx.iter().zip(&self.blocks) {
            out.extend(std::iter::repeat_n(i, b));
        }
    }

    pub fn expand(&self, idx: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.degree);
        self.expand_into(idx, &mut out);
        out
    }

    /// Inverse of [`expand`](Self::expand): `Some(block representatives)` when
    /// every block of `full` is constant.
    pub fn collapse_into(&self, full: &[usize], out: &mut Vec<usize>) -> bool {
        out.clear();
        let mut pos = 0;
        for &b in &self.blocks {
            let head = full[pos];
            if full[pos..pos + b].iter().any(|&j| j != head) {
                return false;
            }
            out.push(head);
            pos += b;
        }
        true
    }
}

impl std::fmt::Display for BlockPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Debug)]
enum Source {
    Dense(Arc<[f64]>),
    Sparse(Arc<BTreeMap<Vec<usize>, f64>>),
    /// Coefficient 1 on the joint diagonal `j₁=⋯=j_m`, 0 elsewhere.
    Diagonal,
    /// Block-constant indices read the base form, everything else is 0.
    Lifted {
        base: Arc<MultilinearForm>,
        pattern: BlockPattern,
    },
}

/// An m-linear form on (ℝⁿ)^m, immutable after construction.
#[derive(Clone, Debug)]
pub struct MultilinearForm {
    degree: usize,
    dim: usize,
    source: Source,
}

fn checked_entries(m: usize, n: usize) -> Option<usize> {
    let mut total: usize = 1;
    for _ in 0..m {
        total = total.checked_mul(n)?;
    }
    Some(total)
}

fn dense_guard(m: usize, n: usize) -> Result<usize> {
    match checked_entries(m, n) {
        Some(len) if len <= MAX_DENSE_ENTRIES => Ok(len),
        _ => Err(Error::Resource(format!(
            "dense form with n={n}, m={m} exceeds {MAX_DENSE_ENTRIES} coefficients"
        ))),
    }
}

fn check_shape(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::domain(format!(
            "degree and dimension must be positive (m={m}, n={n})"
        )));
    }
    Ok(())
}

/// Advances a little-endian-last (row-major) multi-index; false on wrap-around.
pub(crate) fn next_index(idx: &mut [usize], n: usize) -> bool {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < n {
            return true;
        }
        *slot = 0;
    }
    false
}

impl MultilinearForm {
    /// Dense form from row-major coefficients (`coeffs.len() == n^m`).
    pub fn dense(m: usize, n: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_shape(m, n)?;
        let len = dense_guard(m, n)?;
        if coeffs.len() != len {
            return Err(Error::domain(format!(
                "dense form needs n^m = {len} coefficients, got {}",
                coeffs.len()
            )));
        }
        if let Some(pos) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::domain(format!("coefficient #{pos} is not finite")));
        }
        Ok(MultilinearForm {
            degree: m,
            dim: n,
            source: Source::Dense(coeffs.into()),
        })
    }

    /// Dense form whose coefficient at each multi-index is `f(idx)`.
    pub fn from_fn(m: usize, n: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        check_shape(m, n)?;
        let len = dense_guard(m, n)?;
        let mut coeffs = Vec::with_capacity(len);
        let mut idx = vec![0; m];
        loop {
            coeffs.push(f(&idx));
            if !next_index(&mut idx, n) {
                break;
            }
        }
        Self::dense(m, n, coeffs)
    }

    /// Form given by its nonzero entries; unspecified entries are 0.
    pub fn sparse(
        m: usize,
        n: usize,
        entries: impl IntoIterator<Item = (Vec<usize>, f64)>,
    ) -> Result<Self> {
        check_shape(m, n)?;
        let mut map = BTreeMap::new();
        for (idx, value) in entries {
            if idx.len() != m {
                return Err(Error::domain(format!(
                    "entry index {idx:?} does not have length {m}"
                )));
            }
            if idx.iter().any(|&j| j >= n) {
                return Err(Error::domain(format!(
                    "entry index {idx:?} out of range for n={n}"
                )));
            }
            if !value.is_finite() {
                return Err(Error::domain(format!("entry at {idx:?} is not finite")));
            }
            if map.insert(idx.clone(), value).is_some() {
                return Err(Error::domain(format!("duplicate entry at {idx:?}")));
            }
        }
        map.retain(|_, v| *v != 0.0);
        Ok(MultilinearForm {
            degree: m,
            dim: n,
            source: Source::Sparse(Arc::new(map)),
        })
    }

    pub(crate) fn diagonal(k: usize, n: usize) -> Result<Self> {
        check_shape(k, n)?;
        Ok(MultilinearForm {
            degree: k,
            dim: n,
            source: Source::Diagonal,
        })
    }

    pub(crate) fn lifted(base: MultilinearForm, pattern: BlockPattern) -> Result<Self> {
        if base.degree != pattern.k() {
            return Err(Error::domain(format!(
                "cannot lift a degree-{} form along pattern {pattern} with {} blocks",
                base.degree,
                pattern.k()
            )));
        }
        Ok(MultilinearForm {
            degree: pattern.m(),
            dim: base.dim,
            source: Source::Lifted {
                base: Arc::new(base),
                pattern,
            },
        })
    }

    /// Number of arguments `m`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Dimension `n` of each argument.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.source, Source::Dense(_))
    }

    /// Row-major coefficients when the form is stored densely.
    pub fn dense_coefficients(&self) -> Option<&[f64]> {
        match &self.source {
            Source::Dense(c) => Some(c),
            _ => None,
        }
    }

    /// `T(e_{j₁},…,e_{j_m})`.
    pub fn coefficient(&self, idx: &[usize]) -> Result<f64> {
        if idx.len() != self.degree {
            return Err(Error::domain(format!(
                "index {idx:?} has length {}, form has degree {}",
                idx.len(),
                self.degree
            )));
        }
        if let Some(&j) = idx.iter().find(|&&j| j >= self.dim) {
            return Err(Error::domain(format!(
                "index component {j} out of range 0..{}",
                self.dim
            )));
        }
        Ok(self.coeff(idx))
    }

    /// Coefficient lookup without range checks.
    pub(crate) fn coeff(&self, idx: &[usize]) -> f64 {
        match &self.source {
            Source::Dense(c) => {
                let flat = idx.iter().fold(0usize, |acc, &j| acc * self.dim + j);
                c[flat]
            }
            Source::Sparse(map) => map.get(idx).copied().unwrap_or(0.0),
            Source::Diagonal => {
                if idx.iter().all(|&j| j == idx[0]) {
                    1.0
                } else {
                    0.0
                }
            }
            Source::Lifted { base, pattern } => {
                let mut reps = Vec::with_capacity(pattern.k());
                if pattern.collapse_into(idx, &mut reps) {
                    base.coeff(&reps)
                } else {
                    0.0
                }
            }
        }
    }

    /// Visits every entry that may be nonzero, in row-major order for dense
    /// and sparse storage.
    pub fn for_each_nonzero(&self, f: &mut dyn FnMut(&[usize], f64)) {
        match &self.source {
            Source::Dense(c) => {
                let mut idx = vec![0; self.degree];
                for &v in c.iter() {
                    if v != 0.0 {
                        f(&idx, v);
                    }
                    next_index(&mut idx, self.dim);
                }
            }
            Source::Sparse(map) => {
                for (idx, &v) in map.iter() {
                    f(idx, v);
                }
            }
            Source::Diagonal => {
                let mut idx = vec![0; self.degree];
                for i in 0..self.dim {
                    idx.fill(i);
                    f(&idx, 1.0);
                }
            }
            Source::Lifted { base, pattern } => {
                let mut full = Vec::with_capacity(self.degree);
                base.for_each_nonzero(&mut |reps, v| {
                    pattern.expand_into(reps, &mut full);
                    f(&full, v);
                });
            }
        }
    }

    /// Nonzero entries sorted lexicographically by index.
    pub fn nonzero_entries(&self) -> Vec<(Vec<usize>, f64)> {
        let mut out = Vec::new();
        self.for_each_nonzero(&mut |idx, v| out.push((idx.to_vec(), v)));
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    pub fn is_zero(&self) -> bool {
        let mut any = false;
        self.for_each_nonzero(&mut |_, v| any |= v != 0.0);
        !any
    }

    /// Materialises the coefficient tensor densely.
    pub fn to_dense(&self) -> Result<MultilinearForm> {
        if self.is_dense() {
            return Ok(self.clone());
        }
        let len = dense_guard(self.degree, self.dim)?;
        let mut coeffs = vec![0.0; len];
        let n = self.dim;
        self.for_each_nonzero(&mut |idx, v| {
            let flat = idx.iter().fold(0usize, |acc, &j| acc * n + j);
            coeffs[flat] = v;
        });
        Self::dense(self.degree, self.dim, coeffs)
    }

    /// `c·T`.
    pub fn scaled(&self, c: f64) -> Result<MultilinearForm> {
        if !c.is_finite() {
            return Err(Error::domain("scale factor must be finite"));
        }
        let source = match &self.source {
            Source::Dense(data) => Source::Dense(data.iter().map(|v| c * v).collect()),
            Source::Lifted { base, pattern } => Source::Lifted {
                base: Arc::new(base.scaled(c)?),
                pattern: pattern.clone(),
            },
            _ => {
                let mut map = BTreeMap::new();
                self.for_each_nonzero(&mut |idx, v| {
                    map.insert(idx.to_vec(), c * v);
                });
                Source::Sparse(Arc::new(map))
            }
        };
        Ok(MultilinearForm {
            degree: self.degree,
            dim: self.dim,
            source,
        })
    }

    fn check_vectors(&self, vecs: &[&[f64]], expected: usize) -> Result<()> {
        if vecs.len() != expected {
            return Err(Error::domain(format!(
                "expected {expected} argument vectors, got {}",
                vecs.len()
            )));
        }
        if let Some(v) = vecs.iter().find(|v| v.len() != self.dim) {
            return Err(Error::domain(format!(
                "argument vector has length {}, form dimension is {}",
                v.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// `T(x⁽¹⁾,…,x⁽ᵐ⁾)`.
    pub fn evaluate(&self, args: &[&[f64]]) -> Result<f64> {
        self.check_vectors(args, self.degree)?;
        let last = self.degree - 1;
        let c = self.slice_unchecked(last, &args[..last]);
        Ok(c.iter().zip(args[last]).map(|(a, b)| a * b).sum())
    }

    /// The linear functional left after fixing every argument except `position`:
    /// `c_i = T(…, e_i at position, …)`, so `T(args) = ⟨c, x_position⟩`.
    ///
    /// `fixed` holds the other `m−1` vectors in slot order.
    pub fn slice_vector(&self, position: usize, fixed: &[&[f64]]) -> Result<Vec<f64>> {
        if position >= self.degree {
            return Err(Error::domain(format!(
                "position {position} out of range for degree {}",
                self.degree
            )));
        }
        self.check_vectors(fixed, self.degree - 1)?;
        Ok(self.slice_unchecked(position, fixed))
    }

    pub(crate) fn slice_unchecked(&self, position: usize, fixed: &[&[f64]]) -> Vec<f64> {
        let n = self.dim;
        let vec_for = |axis: usize| -> &[f64] {
            if axis < position {
                fixed[axis]
            } else {
                fixed[axis - 1]
            }
        };
        match &self.source {
            Source::Dense(data) => {
                let mut cur: Cow<[f64]> = Cow::Borrowed(data);
                for axis in (position + 1..self.degree).rev() {
                    cur = Cow::Owned(contract_last(&cur, n, vec_for(axis)));
                }
                for axis in 0..position {
                    cur = Cow::Owned(contract_first(&cur, n, vec_for(axis)));
                }
                cur.into_owned()
            }
            _ => {
                let mut out = vec![0.0; n];
                self.for_each_nonzero(&mut |idx, v| {
                    let mut prod = v;
                    for (axis, &j) in idx.iter().enumerate() {
                        if axis != position {
                            prod *= vec_for(axis)[j];
                        }
                    }
                    out[idx[position]] += prod;
                });
                out
            }
        }
    }

    /// `T(e_{i₁}^{n₁},…,e_{i_k}^{n_k})`: index `i_l` repeated across block `l`.
    pub fn blocked_coefficient(&self, pattern: &BlockPattern, idx: &[usize]) -> Result<f64> {
        self.check_pattern(pattern)?;
        if idx.len() != pattern.k() {
            return Err(Error::domain(format!(
                "blocked index {idx:?} needs {} components",
                pattern.k()
            )));
        }
        self.coefficient(&pattern.expand(idx))
    }

    fn check_pattern(&self, pattern: &BlockPattern) -> Result<()> {
        if pattern.m() != self.degree {
            return Err(Error::domain(format!(
                "pattern {pattern} has total degree {}, form has degree {}",
                pattern.m(),
                self.degree
            )));
        }
        Ok(())
    }

    /// `(Σ_{i₁,…,i_k} |T(e_{i₁}^{n₁},…,e_{i_k}^{n_k})|^r)^{1/r}` over `{0..n}^k`.
    pub fn blocked_power_sum(&self, pattern: &BlockPattern, r: f64) -> Result<f64> {
        self.check_pattern(pattern)?;
        check_power(r)?;
        let k = pattern.k();
        let mut acc = CompensatedSum::default();
        let mut idx = vec![0; k];
        let mut full = Vec::with_capacity(self.degree);
        loop {
            pattern.expand_into(&idx, &mut full);
            acc.add(abs_pow(self.coeff(&full), r));
            if !next_index(&mut idx, self.dim) {
                break;
            }
        }
        Ok(root(acc.total(), r))
    }

    /// `(Σ_{j₁,…,j_m} |T(e_{j₁},…,e_{j_m})|^r)^{1/r}`, read straight from storage.
    pub fn power_sum(&self, r: f64) -> Result<f64> {
        check_power(r)?;
        let mut acc = CompensatedSum::default();
        match &self.source {
            Source::Dense(data) => data.iter().for_each(|&v| acc.add(abs_pow(v, r))),
            _ => {
                let mut idx = vec![0; self.degree];
                loop {
                    acc.add(abs_pow(self.coeff(&idx), r));
                    if !next_index(&mut idx, self.dim) {
                        break;
                    }
                }
            }
        }
        Ok(root(acc.total(), r))
    }
}

fn check_power(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!(
            "power-sum exponent must be positive and finite, got {r}"
        )));
    }
    Ok(())
}

fn abs_pow(v: f64, r: f64) -> f64 {
    if r == 1.0 {
        v.abs()
    } else if r == 2.0 {
        v * v
    } else {
        v.abs().powf(r)
    }
}

fn root(s: f64, r: f64) -> f64 {
    if r == 1.0 {
        s
    } else if r == 2.0 {
        s.sqrt()
    } else {
        s.powf(r.recip())
    }
}

fn contract_last(data: &[f64], n: usize, v: &[f64]) -> Vec<f64> {
    data.chunks_exact(n)
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn contract_first(data: &[f64], n: usize, v: &[f64]) -> Vec<f64> {
    let stride = data.len() / n;
    let mut out = vec![0.0; stride];
    for (block, &w) in data.chunks_exact(stride).zip(v) {
        if w != 0.0 {
            out.iter_mut().zip(block).for_each(|(o, b)| *o += w * b);
        }
    }
    out
}

/// Kahan–Babuška (Neumaier) running sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[[f64; 2]; 2]) -> MultilinearForm {
        MultilinearForm::dense(2, 2, rows.iter().flatten().copied().collect()).unwrap()
    }

    #[test]
    fn pattern_invariants() {
        assert!(BlockPattern::new(vec![]).is_err());
        assert!(BlockPattern::new(vec![2, 0]).is_err());
        let p = BlockPattern::new(vec![2, 1]).unwrap();
        assert_eq!((p.k(), p.m()), (2, 3));
        assert_eq!(p.expand(&[4, 7]), vec![4, 4, 7]);
        let mut reps = Vec::new();
        assert!(p.collapse_into(&[4, 4, 7], &mut reps));
        assert_eq!(reps, vec![4, 7]);
        assert!(!p.collapse_into(&[4, 5, 7], &mut reps));
        // 2^(m-1) compositions
        assert_eq!(BlockPattern::compositions(4).len(), 8);
        assert!(BlockPattern::compositions(4)
            .iter()
            .all(|p| p.m() == 4 && p.k() <= 4));
    }

    #[test]
    fn coefficient_reads() {
        let t = mat(&[[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(t.coefficient(&[0, 1]).unwrap(), 2.0);
        assert!(matches!(t.coefficient(&[0, 2]), Err(Error::Domain(_))));
        assert!(t.coefficient(&[0]).is_err());
        let s = MultilinearForm::diagonal(3, 4).unwrap();
        assert_eq!(s.coefficient(&[0, 0, 0]).unwrap(), 1.0);
        assert_eq!(s.coefficient(&[0, 1, 0]).unwrap(), 0.0);
    }

    #[test]
    fn dense_rejects_bad_input() {
        assert!(MultilinearForm::dense(2, 2, vec![1.0; 3]).is_err());
        assert!(MultilinearForm::dense(2, 2, vec![1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(matches!(
            MultilinearForm::dense(9, 10, vec![]),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            MultilinearForm::from_fn(30, 100, |_| 0.0),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn evaluate_examples() {
        let id = mat(&[[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(id.evaluate(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap(), 0.0);
        assert_eq!(id.evaluate(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap(), 2.0);
        let t = mat(&[[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(t.evaluate(&[&[0.0, 0.0], &[5.0, -1.0]]).unwrap(), 0.0);
        assert!(t.evaluate(&[&[1.0], &[1.0, 1.0]]).is_err());
    }

    #[test]
    fn slice_examples() {
        let t = mat(&[[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(t.slice_vector(1, &[&[1.0, 0.0]]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(t.slice_vector(0, &[&[1.0, 1.0]]).unwrap(), vec![3.0, 7.0]);
        assert_eq!(t.slice_vector(0, &[&[0.0, 0.0]]).unwrap(), vec![0.0, 0.0]);
        assert!(t.slice_vector(2, &[&[1.0, 1.0]]).is_err());
    }

    #[test]
    fn dense_and_rule_sources_agree() {
        let s = MultilinearForm::diagonal(3, 3).unwrap();
        let d = s.to_dense().unwrap();
        let x = [0.5, -1.0, 2.0];
        let y = [1.5, 0.25, -3.0];
        let z = [2.0, 1.0, 0.5];
        for pos in 0..3 {
            let fixed: Vec<&[f64]> = [&x[..], &y[..], &z[..]]
                .iter()
                .enumerate()
                .filter(|(a, _)| *a != pos)
                .map(|(_, v)| *v)
                .collect();
            assert_eq!(
                s.slice_vector(pos, &fixed).unwrap(),
                d.slice_vector(pos, &fixed).unwrap()
            );
        }
        let mut idx = vec![0; 3];
        loop {
            assert_eq!(s.coeff(&idx), d.coeff(&idx));
            if !next_index(&mut idx, 3) {
                break;
            }
        }
    }

    #[test]
    fn blocked_examples() {
        let t = mat(&[[1.0, 2.0], [3.0, 4.0]]);
        let single = BlockPattern::single(2).unwrap();
        let ones = BlockPattern::all_ones(2).unwrap();
        assert_eq!(t.blocked_coefficient(&single, &[1]).unwrap(), 4.0);
        assert_eq!(t.blocked_power_sum(&ones, 2.0).unwrap(), 30f64.sqrt());
        assert_eq!(t.blocked_power_sum(&single, 1.0).unwrap(), 5.0);
        assert!(t.blocked_power_sum(&single, 0.0).is_err());
        assert!(t.blocked_power_sum(&single, -1.0).is_err());
        let three = BlockPattern::all_ones(3).unwrap();
        assert!(t.blocked_power_sum(&three, 1.0).is_err());
        assert!(t.blocked_coefficient(&ones, &[0]).is_err());
    }

    #[test]
    fn sparse_storage() {
        let t = MultilinearForm::sparse(2, 3, [(vec![0, 2], 1.5), (vec![2, 2], 0.0)]).unwrap();
        assert_eq!(t.coefficient(&[0, 2]).unwrap(), 1.5);
        assert_eq!(t.nonzero_entries(), vec![(vec![0, 2], 1.5)]);
        assert!(MultilinearForm::sparse(2, 3, [(vec![0, 3], 1.0)]).is_err());
        assert!(MultilinearForm::sparse(2, 3, [(vec![0, 1], 1.0), (vec![0, 1], 2.0)]).is_err());
        assert!(MultilinearForm::sparse(2, 3, [(vec![0, 1], f64::INFINITY)]).is_err());
        assert!(MultilinearForm::sparse(2, 3, Vec::new()).unwrap().is_zero());
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = CompensatedSum::default();
        acc.add(1.0);
        for _ in 0..10 {
            acc.add(1e-16);
        }
        assert!((acc.total() - (1.0 + 1e-15)).abs() < 3e-16);
        let naive = (0..10).fold(1.0, |s, _| s + 1e-16);
        assert_eq!(naive, 1.0);
    }
}
