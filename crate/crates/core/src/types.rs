//! Domain types shared by every module: the design matrix and its signed
//! expansion `(X0, -X0)`, signed models, solver output and asymptotic
//! parameters.
//!
//! Signed indices are 0-based internally: variable `j` with a positive sign
//! maps to index `j`, a negative sign to `j + p`. The JSON model format and
//! all human-facing messages number variables from 1.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest instance for which [`DesignMatrix::is_general_position`] runs its
/// exhaustive subset check.
pub const GENERAL_POSITION_MAX_N: usize = 4;
pub const GENERAL_POSITION_MAX_COLUMNS: usize = 14;

/// Dense `n x p` design matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    pub fn from_column_major(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidDims(format!("design must be at least 1x1, got {n}x{p}")));
        }
        if data.len() != n * p {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {n}x{p} design, got {}",
                n * p,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { n, p, data })
    }

    /// Builds a design from observation rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::DimensionMismatch(format!(
                "row {} has {} entries, expected {p}",
                bad + 1,
                rows[bad].len()
            )));
        }
        let mut data = Vec::with_capacity(n * p);
        for j in 0..p {
            data.extend(rows.iter().map(|r| r[j]));
        }
        Self::from_column_major(n, p, data)
    }

    /// Builds a design from variable columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let p = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::DimensionMismatch("columns have unequal lengths".into()));
        }
        Self::from_column_major(n, p, columns.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.n + row]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.p).map(|j| self.get(i, j)).collect()).collect()
    }

    /// `X0 beta0` for a signed coefficient vector of length `p`.
    pub fn mul_vec(&self, beta0: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (j, &b) in beta0.iter().enumerate() {
            if b != 0.0 {
                axpy(b, self.column(j), &mut out);
            }
        }
        out
    }

    /// `X0^T v`.
    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.p).map(|j| dot(self.column(j), v)).collect()
    }

    pub fn column_norms_sq(&self) -> Vec<f64> {
        (0..self.p).map(|j| dot(self.column(j), self.column(j))).collect()
    }

    /// Rescales every nonzero column to unit Euclidean norm.
    pub fn normalize_columns(&mut self) {
        let n = self.n;
        for col in self.data.chunks_mut(n) {
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                col.iter_mut().for_each(|v| *v /= norm);
            }
        }
    }

    pub fn expanded(&self) -> ExpandedDesign<'_> {
        ExpandedDesign { base: self }
    }

    /// `||X0^T y||_inf`, the smallest lambda at which the lasso returns zero.
    pub fn lambda_max(&self, y: &[f64]) -> f64 {
        self.t_mul_vec(y).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Checks that every antipode-free set of at most `n + 1` expanded
    /// columns is affinely independent.
    ///
    /// Returns `None` when the instance exceeds `n <= 4`, `2p <= 14`; the
    /// assumption is left unchecked there.
    pub fn is_general_position(&self) -> Option<bool> {
        if self.n > GENERAL_POSITION_MAX_N || 2 * self.p > GENERAL_POSITION_MAX_COLUMNS {
            return None;
        }
        let x = self.expanded();
        let size = (self.n + 1).min(self.p);
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        let mut ok = true;
        for_each_signed_subset(self.p, size, &mut |subset| {
            let base = x.column_vec(subset[0]);
            let diffs: Vec<Vec<f64>> = subset[1..]
                .iter()
                .map(|&j| {
                    let c = x.column_vec(j);
                    c.iter().zip(&base).map(|(a, b)| a - b).collect()
                })
                .collect();
            if matrix_rank(&diffs, self.n, 1e-10 * scale) < subset.len() - 1 {
                ok = false;
            }
            ok
        });
        Some(ok)
    }
}

/// Visits every antipode-free signed subset of the given size (0-based
/// indices into `0..2p`) until the callback returns `false`.
pub(crate) fn for_each_signed_subset(p: usize, size: usize, f: &mut dyn FnMut(&[usize]) -> bool) {
    if size > p {
        return;
    }
    let mut vars: Vec<usize> = (0..size).collect();
    let mut subset = vec![0usize; size];
    loop {
        for mask in 0u64..(1u64 << size) {
            for (slot, &v) in vars.iter().enumerate() {
                subset[slot] = if mask >> slot & 1 == 1 { v + p } else { v };
            }
            let mut sorted = subset.clone();
            sorted.sort_unstable();
            if !f(&sorted) {
                return;
            }
        }
        // next combination of variables
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if vars[i] != i + p - size {
                vars[i] += 1;
                for k in i + 1..size {
                    vars[k] = vars[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Row-echelon rank of a set of vectors of length `dim`.
pub(crate) fn matrix_rank(vectors: &[Vec<f64>], dim: usize, tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = vectors.to_vec();
    let mut rank = 0;
    for col in 0..dim {
        let pivot = (rank..m.len()).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()));
        let Some(pivot) = pivot else { break };
        if m[pivot][col].abs() <= tol {
            continue;
        }
        m.swap(rank, pivot);
        for r in rank + 1..m.len() {
            let factor = m[r][col] / m[rank][col];
            for c in col..dim {
                m[r][c] -= factor * m[rank][c];
            }
        }
        rank += 1;
    }
    rank
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Virtual view of `X = (X0, -X0)` with `2p` columns. The negated half is
/// never materialized, so `column(j + p) = -column(j)` holds bit for bit.
#[derive(Debug, Clone, Copy)]
pub struct ExpandedDesign<'a> {
    base: &'a DesignMatrix,
}

impl<'a> ExpandedDesign<'a> {
    pub fn base(&self) -> &'a DesignMatrix {
        self.base
    }

    pub fn n(&self) -> usize {
        self.base.n
    }

    pub fn p(&self) -> usize {
        self.base.p
    }

    pub fn num_columns(&self) -> usize {
        2 * self.base.p
    }

    /// Underlying variable and sign multiplier of expanded column `j`.
    pub fn split(&self, j: usize) -> (usize, f64) {
        let p = self.base.p;
        if j < p {
            (j, 1.0)
        } else {
            (j - p, -1.0)
        }
    }

    pub fn column_vec(&self, j: usize) -> Vec<f64> {
        let (var, sign) = self.split(j);
        self.base.column(var).iter().map(|v| if sign > 0.0 { *v } else { -v }).collect()
    }

    /// `X_j^T v`.
    pub fn dot(&self, j: usize, v: &[f64]) -> f64 {
        let (var, sign) = self.split(j);
        let d = dot(self.base.column(var), v);
        if sign > 0.0 {
            d
        } else {
            -d
        }
    }

    /// `out += alpha * X_j`.
    pub fn axpy(&self, j: usize, alpha: f64, out: &mut [f64]) {
        let (var, sign) = self.split(j);
        axpy(alpha * sign, self.base.column(var), out);
    }

    /// `X beta` for a nonnegative expanded coefficient vector of length `2p`.
    pub fn mul_vec(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                self.axpy(j, b, &mut out);
            }
        }
        out
    }

    /// `X^T v` over all `2p` columns.
    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let half = self.base.t_mul_vec(v);
        let mut out = half.clone();
        out.extend(half.iter().map(|c| -c));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Sign {
    pub fn as_char(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

/// Maps variable `var` (0-based) with a sign to its expanded index.
pub fn encode_signed(var: usize, sign: Sign, p: usize) -> usize {
    match sign {
        Sign::Positive => var,
        Sign::Negative => var + p,
    }
}

/// Inverse of [`encode_signed`].
pub fn decode_signed(index: usize, p: usize) -> (usize, Sign) {
    if index < p {
        (index, Sign::Positive)
    } else {
        (index - p, Sign::Negative)
    }
}

/// Checks that all indices lie in `0..2p` and that no variable appears with
/// both signs.
pub fn validate_signed_model(indices: &[usize], p: usize) -> Result<()> {
    let mut seen = vec![false; p];
    for &idx in indices {
        if idx >= 2 * p {
            return Err(Error::IndexOutOfRange { index: idx, p });
        }
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    for &idx in &sorted {
        let (var, _) = decode_signed(idx, p);
        if seen[var] {
            return Err(Error::AntipodalPair(var));
        }
        seen[var] = true;
    }
    Ok(())
}

/// A signed model: a set of expanded column indices with no antipodal pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedModel {
    p: usize,
    indices: Vec<usize>,
}

impl SignedModel {
    pub fn new(p: usize, mut indices: Vec<usize>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidDims("p must be at least 1".into()));
        }
        indices.sort_unstable();
        indices.dedup();
        validate_signed_model(&indices, p)?;
        Ok(Self { p, indices })
    }

    pub fn empty(p: usize) -> Self {
        Self { p, indices: Vec::new() }
    }

    /// Builds a model from `(variable, sign)` pairs with 0-based variables.
    pub fn from_signed(p: usize, pairs: &[(usize, Sign)]) -> Result<Self> {
        if let Some(&(var, _)) = pairs.iter().find(|(v, _)| *v >= p) {
            return Err(Error::IndexOutOfRange { index: var, p });
        }
        Self::new(p, pairs.iter().map(|&(v, s)| encode_signed(v, s, p)).collect())
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn signed(&self) -> Vec<(usize, Sign)> {
        self.indices.iter().map(|&i| decode_signed(i, self.p)).collect()
    }

    /// `|self Δ other|` over the signed index space.
    pub fn symmetric_difference_len(&self, other: &SignedModel) -> usize {
        let (mut i, mut j, mut common) = (0, 0, 0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        self.len() + other.len() - 2 * common
    }

    /// Removes one index, returning the smaller model.
    pub fn without(&self, index: usize) -> SignedModel {
        SignedModel { p: self.p, indices: self.indices.iter().copied().filter(|&i| i != index).collect() }
    }

    pub fn to_json(&self) -> SignedModelJson {
        SignedModelJson { p: self.p, signed: self.signed().into_iter().map(|(v, s)| (v + 1, s)).collect() }
    }
}

impl fmt::Display for SignedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (var, sign)) in self.signed().into_iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{}", var + 1, sign.as_char())?;
        }
        write!(f, "}}")
    }
}

/// Wire format `{"p": 3, "signed": [[1, "+"], [3, "-"]]}` with 1-based variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedModelJson {
    pub p: usize,
    pub signed: Vec<(usize, Sign)>,
}

impl TryFrom<SignedModelJson> for SignedModel {
    type Error = Error;

    fn try_from(json: SignedModelJson) -> Result<Self> {
        let mut pairs = Vec::with_capacity(json.signed.len());
        for (var, sign) in json.signed {
            if var == 0 || var > json.p {
                return Err(Error::Parse(format!("variable {var} outside 1..={}", json.p)));
            }
            pairs.push((var - 1, sign));
        }
        SignedModel::from_signed(json.p, &pairs)
    }
}

impl Serialize for SignedModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SignedModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = SignedModelJson::deserialize(d)?;
        SignedModel::try_from(json).map_err(serde::de::Error::custom)
    }
}

/// A lasso solution in the nonnegative expanded form.
#[derive(Debug, Clone, Serialize)]
pub struct LassoSolution {
    /// Nonnegative coefficients of length `2p`.
    pub beta: Vec<f64>,
    pub lambda: f64,
    pub support: SignedModel,
    /// `X beta`.
    pub fit: Vec<f64>,
    pub objective: f64,
    pub sweeps: usize,
}

impl LassoSolution {
    /// Coefficients of the original problem, `beta+ - beta-`.
    pub fn signed_coefficients(&self) -> Vec<f64> {
        let p = self.support.p();
        (0..p).map(|j| self.beta[j] - self.beta[j + p]).collect()
    }
}

/// A point of the region `A_S`: a face point `f` of the null polytope plus
/// positive cone coefficients on the columns of `S`.
#[derive(Debug, Clone, Serialize)]
pub struct RegionWitness {
    pub model: SignedModel,
    pub face_point: Vec<f64>,
    pub cone_coeffs: Vec<f64>,
}

/// Aspect ratios of the proportional regime `p ~ rho n`, `k ~ kappa n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    pub rho: f64,
    pub kappa: f64,
    pub epsilon: f64,
}

impl AsymptoticParams {
    pub fn new(rho: f64, kappa: f64, epsilon: f64) -> Result<Self> {
        if !(rho > 0.0) || !(kappa > 0.0 && kappa < 1.0) || !(epsilon >= 0.0) {
            return Err(Error::DomainError(format!(
                "need rho > 0, 0 < kappa < 1, epsilon >= 0; got rho={rho}, kappa={kappa}, epsilon={epsilon}"
            )));
        }
        Ok(Self { rho, kappa, epsilon })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validates_distinct_variables() {
        // {1, 5} with p = 3 in 1-based notation
        assert!(validate_signed_model(&[0, 4], 3).is_ok());
    }

    #[test]
    fn rejects_antipodal_pair() {
        // {1, 4} with p = 3: 4 = 1 + p
        match validate_signed_model(&[0, 3], 3) {
            Err(Error::AntipodalPair(0)) => {}
            other => panic!("expected AntipodalPair(0), got {other:?}"),
        }
    }

    #[test]
    fn empty_model_is_valid() {
        assert!(validate_signed_model(&[], 3).is_ok());
        assert!(SignedModel::new(3, vec![]).unwrap().is_empty());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(validate_signed_model(&[6], 3), Err(Error::IndexOutOfRange { index: 6, p: 3 })));
    }

    #[test]
    fn json_round_trip() {
        let m = SignedModel::from_signed(3, &[(0, Sign::Positive), (2, Sign::Negative)]).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, r#"{"p":3,"signed":[[1,"+"],[3,"-"]]}"#);
        let back: SignedModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<SignedModel>(r#"{"p":2,"signed":[[1,"+"],[1,"-"]]}"#).is_err());
        assert!(serde_json::from_str::<SignedModel>(r#"{"p":2,"signed":[[3,"+"]]}"#).is_err());
    }

    #[test]
    fn symmetric_difference_counts_sign_flip_twice() {
        let a = SignedModel::from_signed(4, &[(0, Sign::Positive), (1, Sign::Positive)]).unwrap();
        let b = SignedModel::from_signed(4, &[(0, Sign::Negative), (1, Sign::Positive)]).unwrap();
        assert_eq!(a.symmetric_difference_len(&b), 2);
        assert_eq!(a.symmetric_difference_len(&a), 0);
    }

    #[test]
    fn rejects_non_finite_entries() {
        assert!(matches!(
            DesignMatrix::from_column_major(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFiniteInput)
        ));
    }

    #[test]
    fn general_position_detects_duplicate_columns() {
        let good = DesignMatrix::from_columns(&[vec![1.0, 0.2], vec![0.3, 1.0], vec![-0.7, 0.6]]).unwrap();
        assert_eq!(good.is_general_position(), Some(true));
        let dup = DesignMatrix::from_columns(&[vec![1.0, 0.2], vec![1.0, 0.2], vec![-0.7, 0.6]]).unwrap();
        assert_eq!(dup.is_general_position(), Some(false));
        let big = DesignMatrix::from_column_major(5, 1, vec![1.0; 5]).unwrap();
        assert_eq!(big.is_general_position(), None);
    }

    #[test]
    fn signed_subset_enumeration_counts() {
        // antipode-free subsets of size k: C(p, k) 2^k
        let mut count = 0;
        for_each_signed_subset(4, 2, &mut |s| {
            assert!(validate_signed_model(s, 4).is_ok());
            count += 1;
            true
        });
        assert_eq!(count, 6 * 4);
    }

    proptest! {
        #[test]
        fn signed_encoding_round_trips(p in 1usize..50, var_seed in 0usize..1000, neg in any::<bool>()) {
            let var = var_seed % p;
            let sign = if neg { Sign::Negative } else { Sign::Positive };
            let idx = encode_signed(var, sign, p);
            prop_assert!(idx < 2 * p);
            prop_assert_eq!(decode_signed(idx, p), (var, sign));
        }

        #[test]
        fn expanded_columns_negate_exactly(
            n in 1usize..5,
            p in 1usize..5,
            entries in proptest::collection::vec(-1e3f64..1e3, 25),
        ) {
            let x0 = DesignMatrix::from_column_major(n, p, entries[..n * p].to_vec()).unwrap();
            let x = x0.expanded();
            for j in 0..p {
                let pos = x.column_vec(j);
                let neg = x.column_vec(j + p);
                for (a, b) in pos.iter().zip(&neg) {
                    prop_assert_eq!(a + b, 0.0);
                }
            }
        }
    }
}
