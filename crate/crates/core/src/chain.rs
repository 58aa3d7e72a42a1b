//! Truncated non-negatively graded chain complexes.
//!
//! A complex stores degrees `0..=cutoff`. Homology is only asserted through
//! `trusted_upper`: a complex cut out of an unbounded construction cannot see
//! `d_{N+1}`, so its trusted range stops at `N - 1`.

use thiserror::Error;

use crate::linalg::{Field, Matrix};
use crate::verdict::Verdict;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("trusted range is empty")]
    WindowTooSmall,
    #[error("intersection of trusted ranges is empty")]
    EmptyTrustedRange,
    #[error("d^2 != 0 at degree {0}")]
    NotAComplex(usize),
    #[error("complex is not exact at degree {0}")]
    NotExact(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("field mismatch")]
    FieldMismatch,
}

/// Degree bound plus the range in which homology claims are valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruncationWindow {
    pub cutoff: usize,
    /// `None` when no degree is trusted.
    pub trusted_upper: Option<usize>,
}

impl TruncationWindow {
    /// Window for a truncation of an unbounded construction.
    pub fn truncated(cutoff: usize) -> TruncationWindow {
        TruncationWindow { cutoff, trusted_upper: cutoff.checked_sub(1) }
    }

    /// Window for a complex that genuinely vanishes above `cutoff`.
    pub fn bounded(cutoff: usize) -> TruncationWindow {
        TruncationWindow { cutoff, trusted_upper: Some(cutoff) }
    }

    pub fn meet(&self, other: &TruncationWindow) -> TruncationWindow {
        TruncationWindow {
            cutoff: self.cutoff.min(other.cutoff),
            trusted_upper: match (self.trusted_upper, other.trusted_upper) {
                (Some(a), Some(b)) => Some(a.min(b)),
                _ => None,
            },
        }
    }

    /// Lower the trusted bound by `k` degrees.
    pub fn lose(&self, k: usize) -> TruncationWindow {
        TruncationWindow { cutoff: self.cutoff, trusted_upper: self.trusted_upper.and_then(|t| t.checked_sub(k)) }
    }

    pub fn with_cutoff(&self, cutoff: usize) -> TruncationWindow {
        TruncationWindow { cutoff, trusted_upper: self.trusted_upper.map(|t| t.min(cutoff)) }
    }

    /// Clamp the trusted bound to `bound` (`None` trusts nothing).
    pub fn lose_to(&self, bound: Option<usize>) -> TruncationWindow {
        let trusted_upper = match (self.trusted_upper, bound) {
            (Some(t), Some(b)) => Some(t.min(b)),
            _ => None,
        };
        TruncationWindow { cutoff: self.cutoff, trusted_upper }
    }

    pub fn trusts(&self, degree: usize) -> bool {
        self.trusted_upper.is_some_and(|t| degree <= t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainComplex {
    field: Field,
    window: TruncationWindow,
    dims: Vec<usize>,
    /// `diffs[k - 1]` is `d_k : C_k -> C_{k-1}`.
    diffs: Vec<Matrix>,
}

impl ChainComplex {
    /// Validates shapes and `d^2 = 0`.
    pub fn new(field: Field, window: TruncationWindow, dims: Vec<usize>, diffs: Vec<Matrix>) -> Result<ChainComplex, ChainError> {
        let c = ChainComplex::new_unchecked(field, window, dims, diffs)?;
        c.verify()?;
        Ok(c)
    }

    /// Validates shapes only.
    pub fn new_unchecked(field: Field, window: TruncationWindow, dims: Vec<usize>, diffs: Vec<Matrix>) -> Result<ChainComplex, ChainError> {
        if dims.len() != window.cutoff + 1 || diffs.len() != window.cutoff {
            return Err(ChainError::ShapeMismatch(format!(
                "{} dims and {} differentials for cutoff {}",
                dims.len(),
                diffs.len(),
                window.cutoff
            )));
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.field() != field {
                return Err(ChainError::FieldMismatch);
            }
            if d.shape() != (dims[k], dims[k + 1]) {
                return Err(ChainError::ShapeMismatch(format!(
                    "d_{} is {}x{}, expected {}x{}",
                    k + 1,
                    d.rows(),
                    d.cols(),
                    dims[k],
                    dims[k + 1]
                )));
            }
        }
        Ok(ChainComplex { field, window, dims, diffs })
    }

    pub fn verify(&self) -> Result<(), ChainError> {
        for k in 2..=self.window.cutoff {
            if !self.d(k - 1).mul(self.d(k)).is_zero() {
                return Err(ChainError::NotAComplex(k));
            }
        }
        Ok(())
    }

    pub fn zero(field: Field, window: TruncationWindow) -> ChainComplex {
        ChainComplex::concentrated(field, window, 0, 0)
    }

    /// `dim`-dimensional space in a single degree.
    pub fn concentrated(field: Field, window: TruncationWindow, degree: usize, dim: usize) -> ChainComplex {
        let mut dims = vec![0; window.cutoff + 1];
        if degree <= window.cutoff {
            dims[degree] = dim;
        }
        ChainComplex::with_zero_differentials(field, window, dims)
    }

    pub fn with_zero_differentials(field: Field, window: TruncationWindow, dims: Vec<usize>) -> ChainComplex {
        let diffs = (1..dims.len()).map(|k| Matrix::zeros(field, dims[k - 1], dims[k])).collect();
        ChainComplex { field, window, dims, diffs }
    }

    pub fn field(&self) -> Field {
        self.field
    }
    pub fn window(&self) -> TruncationWindow {
        self.window
    }
    pub fn cutoff(&self) -> usize {
        self.window.cutoff
    }
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Dimension in degree `k`, zero outside the stored range.
    pub fn dim(&self, k: usize) -> usize {
        self.dims.get(k).copied().unwrap_or(0)
    }

    /// `d_k`, for `1 <= k <= cutoff`.
    pub fn d(&self, k: usize) -> &Matrix {
        &self.diffs[k - 1]
    }

    /// `d_k` with zero maps outside the stored range.
    pub fn d_or_zero(&self, k: usize) -> Matrix {
        if k >= 1 && k <= self.window.cutoff {
            self.diffs[k - 1].clone()
        } else {
            Matrix::zeros(self.field, if k == 0 { 0 } else { self.dim(k - 1) }, self.dim(k))
        }
    }

    pub fn diffs(&self) -> &[Matrix] {
        &self.diffs
    }

    pub fn with_window(&self, window: TruncationWindow) -> ChainComplex {
        let mut c = self.truncate(window.cutoff);
        c.window = window;
        c
    }

    /// Drop degrees above `cutoff`. `H_cutoff` stays trusted only when the
    /// dropped degree `cutoff + 1` is zero.
    pub fn truncate(&self, cutoff: usize) -> ChainComplex {
        assert!(cutoff <= self.window.cutoff, "cannot extend a truncated complex");
        let mut window = self.window.with_cutoff(cutoff);
        if cutoff < self.window.cutoff && self.dims[cutoff + 1] > 0 {
            window = window.with_cutoff(cutoff).lose_to(cutoff.checked_sub(1));
        }
        ChainComplex {
            field: self.field,
            window,
            dims: self.dims[..=cutoff].to_vec(),
            diffs: self.diffs[..cutoff].to_vec(),
        }
    }

    pub fn is_zero_object(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    /// `H_k` for every stored degree, treating `d_{N+1}` as zero.
    pub fn raw_homology(&self) -> Vec<usize> {
        let ranks: Vec<usize> = self.diffs.iter().map(Matrix::rank).collect();
        (0..=self.window.cutoff)
            .map(|k| {
                let into = if k < self.window.cutoff { ranks[k] } else { 0 };
                let out = if k >= 1 { ranks[k - 1] } else { 0 };
                self.dims[k] - out - into
            })
            .collect()
    }

    /// `H_k` for `k` in the trusted range.
    pub fn homology_dims(&self) -> Result<Vec<usize>, ChainError> {
        let t = self.window.trusted_upper.ok_or(ChainError::WindowTooSmall)?;
        let mut h = self.truncate_for_homology(t).raw_homology();
        h.truncate(t + 1);
        Ok(h)
    }

    fn truncate_for_homology(&self, t: usize) -> ChainComplex {
        // H_t needs d_{t+1}; keep one degree beyond when stored.
        self.truncate((t + 1).min(self.window.cutoff))
    }

    pub fn is_exact_in_window(&self) -> Result<bool, ChainError> {
        Ok(self.homology_dims()?.iter().all(|&h| h == 0))
    }

    /// Shift by `k`: `(C[k])_n = C_{n-k}`, differentials signed by `(-1)^k`.
    pub fn shift(&self, k: usize) -> ChainComplex {
        let cutoff = self.window.cutoff + k;
        let mut dims = vec![0; k];
        dims.extend_from_slice(&self.dims);
        let sign = if k.is_multiple_of(2) { 1 } else { -1 };
        let diffs = (1..=cutoff)
            .map(|n| if n > k { self.d(n - k).scale(sign) } else { Matrix::zeros(self.field, dims[n - 1], dims[n]) })
            .collect();
        let window = TruncationWindow { cutoff, trusted_upper: self.window.trusted_upper.map(|t| t + k) };
        ChainComplex { field: self.field, window, dims, diffs }
    }
}

/// Degreewise block-diagonal sum; the window is the meet.
pub fn direct_sum(c: &ChainComplex, d: &ChainComplex) -> ChainComplex {
    direct_sum_all(c.field, &[c, d]).expect("fields agree")
}

pub fn direct_sum_all(field: Field, parts: &[&ChainComplex]) -> Result<ChainComplex, ChainError> {
    if parts.iter().any(|p| p.field != field) {
        return Err(ChainError::FieldMismatch);
    }
    let Some(window) = parts.iter().map(|p| p.window).reduce(|a, b| a.meet(&b)) else {
        return Err(ChainError::ShapeMismatch("empty direct sum".into()));
    };
    let n = window.cutoff;
    let dims = (0..=n).map(|k| parts.iter().map(|p| p.dim(k)).sum()).collect();
    let diffs = (1..=n)
        .map(|k| {
            let blocks: Vec<&Matrix> = parts.iter().map(|p| p.d(k)).collect();
            Matrix::block_diag(field, &blocks)
        })
        .collect();
    Ok(ChainComplex { field, window, dims, diffs })
}

/// Graded tensor product with `d(a (x) b) = da (x) b + (-1)^|a| a (x) db`.
/// Degree `n` lists the blocks `A_i (x) B_{n-i}` with `i` ascending.
///
/// The result is cut at the smaller cutoff `N`; `H_N` is trusted only if both
/// factors are bounded and the product vanishes in degree `N + 1`.
pub fn tensor_product(a: &ChainComplex, b: &ChainComplex) -> ChainComplex {
    assert_eq!(a.field, b.field, "tensor_product: field mismatch");
    let field = a.field;
    let mut window = a.window.meet(&b.window);
    let n = window.cutoff;
    let bounded = |c: &ChainComplex| c.window.trusted_upper == Some(c.window.cutoff);
    let beyond: usize = (0..=n + 1).map(|i| a.dim(i) * b.dim(n + 1 - i)).sum();
    if !(bounded(a) && bounded(b) && beyond == 0) {
        window = window.lose_to(n.checked_sub(1));
    }
    let block_dims = |deg: usize| -> Vec<usize> { (0..=deg).map(|i| a.dim(i) * b.dim(deg - i)).collect() };
    let dims = (0..=n).map(|k| block_dims(k).iter().sum()).collect();
    let diffs = (1..=n)
        .map(|k| {
            let rows = block_dims(k - 1);
            let cols = block_dims(k);
            Matrix::from_blocks(field, &rows, &cols, |ri, ci| {
                // source A_ci (x) B_{k-ci}, target A_ri (x) B_{k-1-ri}
                if ri + 1 == ci {
                    Some(a.d(ci).kron(&Matrix::identity(field, b.dim(k - ci))))
                } else if ri == ci && ci < k {
                    let sign = if ci % 2 == 0 { 1 } else { -1 };
                    Some(Matrix::identity(field, a.dim(ci)).kron(b.d(k - ci)).scale(sign))
                } else {
                    None
                }
            })
        })
        .collect();
    ChainComplex { field, window, dims, diffs }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainMap {
    pub source: ChainComplex,
    pub target: ChainComplex,
    /// `f_k` for `k` in the common window.
    pub components: Vec<Matrix>,
}

impl ChainMap {
    pub fn new(source: ChainComplex, target: ChainComplex, components: Vec<Matrix>) -> Result<ChainMap, ChainError> {
        let n = source.cutoff().min(target.cutoff());
        if components.len() != n + 1 {
            return Err(ChainError::ShapeMismatch(format!("{} components for common cutoff {n}", components.len())));
        }
        for (k, f) in components.iter().enumerate() {
            if f.shape() != (target.dim(k), source.dim(k)) {
                return Err(ChainError::ShapeMismatch(format!("component {k} has shape {:?}", f.shape())));
            }
        }
        Ok(ChainMap { source, target, components })
    }

    pub fn identity(c: &ChainComplex) -> ChainMap {
        let comps = (0..=c.cutoff()).map(|k| Matrix::identity(c.field, c.dim(k))).collect();
        ChainMap { source: c.clone(), target: c.clone(), components: comps }
    }

    pub fn zero(source: &ChainComplex, target: &ChainComplex) -> ChainMap {
        let n = source.cutoff().min(target.cutoff());
        let comps = (0..=n).map(|k| Matrix::zeros(source.field, target.dim(k), source.dim(k))).collect();
        ChainMap { source: source.clone(), target: target.clone(), components: comps }
    }

    pub fn common_cutoff(&self) -> usize {
        self.components.len() - 1
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &ChainMap) -> ChainMap {
        let n = self.common_cutoff().min(other.common_cutoff());
        let comps = (0..=n).map(|k| self.components[k].mul(&other.components[k])).collect();
        ChainMap { source: other.source.clone(), target: self.target.clone(), components: comps }
    }

    pub fn sub(&self, other: &ChainMap) -> ChainMap {
        let comps = self.components.iter().zip(&other.components).map(|(a, b)| a.sub(b)).collect();
        ChainMap { source: self.source.clone(), target: self.target.clone(), components: comps }
    }

    /// Every component is invertible.
    pub fn is_isomorphism(&self) -> bool {
        self.components.iter().all(|f| f.is_square() && f.inverse().is_ok())
    }

    /// Rank of the induced map on `H_k`.
    pub fn induced_rank(&self, k: usize) -> usize {
        let z = self.source.d_or_zero(k).kernel_basis();
        let fz = self.components[k].mul(&z);
        let boundaries = if k < self.target.cutoff() { self.target.d(k + 1).clone() } else { Matrix::zeros(self.target.field, self.target.dim(k), 0) };
        let both = Matrix::hstack(self.target.field, &[&fz, &boundaries]);
        both.rank() - boundaries.rank()
    }
}

pub fn check_chain_map(f: &ChainMap) -> Verdict {
    for k in 1..=f.common_cutoff() {
        let lhs = f.components[k - 1].mul(f.source.d(k));
        let rhs = f.target.d(k).mul(&f.components[k]);
        if lhs != rhs {
            return Verdict::Fail(format!("chain map square fails at degree {k}"));
        }
    }
    Verdict::Pass
}

/// Homology equivalence over the trusted range of both ends.
pub fn check_quasi_iso(f: &ChainMap) -> Verdict {
    let window = f.source.window().meet(&f.target.window());
    let Some(t) = window.trusted_upper else {
        return Verdict::Skipped("empty trusted range".into());
    };
    if let v @ Verdict::Fail(_) = check_chain_map(f) {
        return v;
    }
    let hs = f.source.homology_dims().unwrap_or_default();
    let ht = f.target.homology_dims().unwrap_or_default();
    for k in 0..=t.min(f.common_cutoff()) {
        let r = f.induced_rank(k);
        if hs[k] != ht[k] || r != hs[k] {
            return Verdict::Fail(format!("degree {k}: H source {} target {} induced rank {r}", hs[k], ht[k]));
        }
    }
    Verdict::Pass
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainHomotopy {
    pub f: ChainMap,
    pub g: ChainMap,
    /// `s_k : C_k -> D_{k+1}` for `k < cutoff`.
    pub components: Vec<Matrix>,
}

/// Verify `d s + s d = f - g` in every degree `k` with `k + 1 <= cutoff`.
pub fn check_homotopy(h: &ChainHomotopy) -> Verdict {
    let n = h.f.common_cutoff().min(h.g.common_cutoff());
    let src = &h.f.source;
    let tgt = &h.f.target;
    for k in 0..n {
        let Some(s_k) = h.components.get(k) else {
            return Verdict::Fail(format!("missing homotopy component s_{k}"));
        };
        let mut lhs = tgt.d(k + 1).mul(s_k);
        if k >= 1 {
            lhs = lhs.add(&h.components[k - 1].mul(src.d(k)));
        }
        let rhs = h.f.components[k].sub(&h.g.components[k]);
        if lhs != rhs {
            return Verdict::Fail(format!("ds + sd != f - g at degree {k}"));
        }
    }
    Verdict::Pass
}

/// `s` contracts `c`: `ds + sd = 1` in degrees below the cutoff.
pub fn check_contraction(c: &ChainComplex, s: &[Matrix]) -> Verdict {
    let h = ChainHomotopy { f: ChainMap::identity(c), g: ChainMap::zero(c, c), components: s.to_vec() };
    check_homotopy(&h)
}

/// An explicit contraction of a complex that is exact below its cutoff,
/// with `s_k : C_k -> C_{k+1}` for `k < cutoff`.
pub fn contraction(c: &ChainComplex) -> Result<Vec<Matrix>, ChainError> {
    let n = c.cutoff();
    let field = c.field;
    let cycles: Vec<Matrix> = (0..=n).map(|k| c.d_or_zero(k).kernel_basis()).collect();
    let compl: Vec<Matrix> = cycles.iter().map(Matrix::complement_basis).collect();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let z = &cycles[k];
        let w_next = &compl[k + 1];
        let dw = c.d(k + 1).mul(w_next);
        if dw.rank() != z.cols() {
            return Err(ChainError::NotExact(k));
        }
        let m = z.solve(&dw).expect("boundaries are cycles");
        let m_inv = m.inverse().expect("restricted differential is an isomorphism");
        let basis = Matrix::hstack(field, &[z, &compl[k]]);
        let coords = basis.inverse().expect("cycles plus complement span");
        let z_coords = coords.block(0, 0, z.cols(), c.dim(k));
        out.push(w_next.mul(&m_inv).mul(&z_coords));
    }
    Ok(out)
}

/// Equal-or-unequal over the common trusted range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologyComparison {
    pub equal: bool,
    pub lhs: Vec<usize>,
    pub rhs: Vec<usize>,
    /// Highest compared degree.
    pub upto: usize,
}

impl HomologyComparison {
    pub fn verdict(&self) -> Verdict {
        Verdict::from_bool(self.equal, || {
            let k = self.lhs.iter().zip(&self.rhs).position(|(a, b)| a != b).unwrap_or(0);
            format!("homology differs at degree {k}: {:?} vs {:?}", self.lhs, self.rhs)
        })
    }
}

pub fn compare_homology(c: &ChainComplex, d: &ChainComplex) -> Result<HomologyComparison, ChainError> {
    if c.field != d.field {
        return Err(ChainError::FieldMismatch);
    }
    let t = c.window.meet(&d.window).trusted_upper.ok_or(ChainError::EmptyTrustedRange)?;
    let mut lhs = c.homology_dims()?;
    let mut rhs = d.homology_dims()?;
    lhs.truncate(t + 1);
    rhs.truncate(t + 1);
    Ok(HomologyComparison { equal: lhs == rhs, lhs, rhs, upto: t })
}

#[cfg(test)]
mod tests {
    use super::*;

    const F2: Field = Field::F2;

    fn iso_pair(field: Field) -> ChainComplex {
        // 0 -> k --id--> k -> 0 in degrees 1, 0
        ChainComplex::new(field, TruncationWindow::bounded(1), vec![1, 1], vec![Matrix::identity(field, 1)]).unwrap()
    }

    #[test]
    fn identity_complex_is_acyclic() {
        assert_eq!(iso_pair(F2).homology_dims().unwrap(), vec![0, 0]);
    }

    #[test]
    fn zero_differentials_give_dims() {
        let c = ChainComplex::with_zero_differentials(Field::Rational, TruncationWindow::bounded(2), vec![2, 0, 3]);
        assert_eq!(c.homology_dims().unwrap(), vec![2, 0, 3]);
    }

    #[test]
    fn hand_elimination_example() {
        let d1 = Matrix::from_rows(F2, &[vec![1, 0], vec![1, 0]]);
        let d2 = Matrix::from_rows(F2, &[vec![0], vec![1]]);
        let c = ChainComplex::new(F2, TruncationWindow::bounded(2), vec![2, 2, 1], vec![d1, d2]).unwrap();
        assert_eq!(c.homology_dims().unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn rejects_non_complex() {
        let id = Matrix::identity(F2, 1);
        let err = ChainComplex::new(F2, TruncationWindow::bounded(2), vec![1, 1, 1], vec![id.clone(), id]).unwrap_err();
        assert_eq!(err, ChainError::NotAComplex(2));
    }

    #[test]
    fn truncated_window_hides_top_degree() {
        let c = ChainComplex::concentrated(F2, TruncationWindow::truncated(3), 3, 2);
        assert_eq!(c.homology_dims().unwrap(), vec![0, 0, 0]);
        let empty = ChainComplex::zero(F2, TruncationWindow::truncated(0));
        assert_eq!(empty.homology_dims(), Err(ChainError::WindowTooSmall));
    }

    #[test]
    fn compare_with_contractible_summand() {
        let c = ChainComplex::with_zero_differentials(F2, TruncationWindow::bounded(1), vec![1, 2]);
        let sum = direct_sum(&c, &iso_pair(F2));
        assert!(compare_homology(&c, &sum).unwrap().equal);
        assert!(compare_homology(&c, &c).unwrap().equal);
        let a = ChainComplex::zero(F2, TruncationWindow::truncated(0));
        assert_eq!(compare_homology(&a, &c), Err(ChainError::EmptyTrustedRange));
    }

    #[test]
    fn chain_map_checks() {
        let c = iso_pair(Field::Rational);
        assert!(check_chain_map(&ChainMap::identity(&c)).is_pass());
        assert!(check_chain_map(&ChainMap::zero(&c, &c)).is_pass());
        let mut bad = ChainMap::identity(&c);
        bad.components[1] = Matrix::zeros(Field::Rational, 1, 1);
        assert_eq!(check_chain_map(&bad), Verdict::Fail("chain map square fails at degree 1".into()));
    }

    #[test]
    fn homotopy_checks() {
        let c = iso_pair(F2);
        let id = ChainMap::identity(&c);
        let h = ChainHomotopy { f: id.clone(), g: id, components: vec![Matrix::zeros(F2, 1, 1)] };
        assert!(check_homotopy(&h).is_pass());
        assert!(check_contraction(&c, &[Matrix::identity(F2, 1)]).is_pass());
        assert!(check_contraction(&c, &[Matrix::zeros(F2, 1, 1)]).is_fail());
    }

    #[test]
    fn computed_contraction_verifies() {
        // 0 <- k^2 <- k^3 <- k <- 0, exact: d1 = [[1,0,1],[0,1,1]], d2 = (1,1,1)^T
        let field = Field::Rational;
        let d1 = Matrix::from_rows(field, &[vec![1, 0, 1], vec![0, 1, 1]]);
        let d2 = Matrix::from_rows(field, &[vec![-1], vec![-1], vec![1]]);
        let c = ChainComplex::new(field, TruncationWindow::bounded(2), vec![2, 3, 1], vec![d1, d2]).unwrap();
        let s = contraction(&c).unwrap();
        assert!(check_contraction(&c, &s).is_pass());
        let not_exact = ChainComplex::concentrated(field, TruncationWindow::bounded(1), 0, 1);
        assert_eq!(contraction(&not_exact), Err(ChainError::NotExact(0)));
    }

    #[test]
    fn tensor_product_kunneth() {
        let field = Field::Rational;
        let a = ChainComplex::with_zero_differentials(field, TruncationWindow::bounded(2), vec![1, 2, 0]);
        let b = ChainComplex::new(field, TruncationWindow::bounded(2), vec![1, 1, 1], vec![Matrix::identity(field, 1), Matrix::zeros(field, 1, 1)]).unwrap();
        let t = tensor_product(&a, &b);
        t.verify().unwrap();
        // H(b) = (0,0,1); Kunneth gives H(t)_2 = 1, but A_1 (x) B_2 sits in the
        // dropped degree 3, so only degrees <= 1 are trusted.
        assert_eq!(t.homology_dims().unwrap(), vec![0, 0]);
        assert_eq!(t.raw_homology()[2], 1);
        let short = ChainComplex::with_zero_differentials(field, TruncationWindow::bounded(2), vec![1, 0, 0]);
        assert_eq!(tensor_product(&short, &b).homology_dims().unwrap(), vec![0, 0, 1]);
    }

    #[test]
    fn quasi_iso_detects_rank() {
        let field = F2;
        let c = ChainComplex::concentrated(field, TruncationWindow::bounded(0), 0, 2);
        let id = ChainMap::identity(&c);
        assert!(check_quasi_iso(&id).is_pass());
        assert!(check_quasi_iso(&ChainMap::zero(&c, &c)).is_fail());
    }

    #[test]
    fn shift_moves_homology() {
        let c = ChainComplex::concentrated(F2, TruncationWindow::bounded(1), 0, 1);
        assert_eq!(c.shift(2).homology_dims().unwrap(), vec![0, 0, 1, 0]);
    }
}
