//! Polynomial approximation, linearization and directional derivatives.
//!
//! All constructions act on [`ChainFunctor`]s in normal form. Slot layout:
//!
//! * `∇H` for `H` of arity `m` has arity `2m`: slots `0..m` are the base
//!   point `X`, slot `m + i` is the direction paired with base slot `i`.
//! * `∇^n F`, `Δ_n F` and the Faà di Bruno sum take slot `0` for `X` and slot
//!   `i` for `V_i`.
//! * `∇^{×n} F` and `T^n F` are indexed by bitmasks `S ⊆ {0..n-1}`; bit `n-1`
//!   marks the direction introduced by the last application.

use std::collections::BTreeMap;
use std::rc::Rc;

use thiserror::Error;

use crate::chain::{ChainComplex, ChainError, TruncationWindow};
use crate::chain_functor::{merge_resolutions, resolve_detailed, ChainFunctor, ChainFunctorError, ChainNat, ResolutionMode, Word};
use crate::functor::{ComonadTower, Functor1, FunctorError, FunctorExpr, Reduced, SharedFunctor, Unary};
use crate::linalg::{Field, Matrix};
use crate::verdict::Verdict;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalculusError {
    #[error("invalid partition profile: {0}")]
    InvalidProfile(String),
    #[error("slot {0} out of range")]
    SlotOutOfRange(usize),
    #[error("expected arity {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error(transparent)]
    ChainFunctor(#[from] ChainFunctorError),
    #[error(transparent)]
    Functor(#[from] FunctorError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

pub type Result<T> = std::result::Result<T, CalculusError>;

/// Blocks above this many basis vectors are resolved by their contraction.
pub const DEFAULT_BUDGET: usize = 4096;

/// The budget over `Q`, where an entry is a pair of big integers.
pub const RATIONAL_BUDGET: usize = 256;

/// Truncation and resolution policy shared by the constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Settings {
    pub cutoff: usize,
    pub mode: ResolutionMode,
}

impl Settings {
    pub fn new(cutoff: usize) -> Settings {
        Settings { cutoff, mode: ResolutionMode::Auto { budget: DEFAULT_BUDGET } }
    }

    /// [`Settings::new`] with the budget scaled to the cost of `field`'s entries.
    pub fn for_field(cutoff: usize, field: Field) -> Settings {
        let budget = if field == Field::Rational { RATIONAL_BUDGET } else { DEFAULT_BUDGET };
        Settings { cutoff, mode: ResolutionMode::Auto { budget } }
    }

    pub fn literal(cutoff: usize) -> Settings {
        Settings { cutoff, mode: ResolutionMode::Literal }
    }

    pub fn with_mode(self, mode: ResolutionMode) -> Settings {
        Settings { mode, ..self }
    }
}

fn all_slots(f: &ChainFunctor) -> Vec<usize> {
    (0..f.arity()).collect()
}

fn require_arity(f: &ChainFunctor, arity: usize) -> Result<()> {
    if f.arity() != arity {
        return Err(CalculusError::ArityMismatch { expected: arity, got: f.arity() });
    }
    Ok(())
}

/// Degree-0 functor `X ↦ X_slot` of the given arity.
pub fn projection(field: Field, arity: usize, slot: usize, cutoff: usize) -> Result<ChainFunctor> {
    if slot >= arity {
        return Err(CalculusError::SlotOutOfRange(slot));
    }
    let window = TruncationWindow::bounded(cutoff);
    let k = ChainComplex::concentrated(field, window, 0, 1);
    Ok(ChainFunctor::from_blocks(field, arity, window, [(vec![slot as u8], k)])?)
}

fn sum_of_slots(field: Field, arity: usize, slots: &[usize], cutoff: usize) -> Result<ChainFunctor> {
    let parts: Vec<ChainFunctor> = slots.iter().map(|&s| projection(field, arity, s, cutoff)).collect::<Result<_>>()?;
    Ok(ChainFunctor::direct_sum_all(&parts)?)
}

/// `F` viewed as a functor of `new_arity` variables through its first slots.
pub fn extend(f: &ChainFunctor, new_arity: usize) -> Result<ChainFunctor> {
    let map: Vec<usize> = all_slots(f);
    Ok(f.reindex(&map, new_arity)?)
}

// ---------------------------------------------------------------------------
// Homology bookkeeping.

/// Per-word homology of a chain functor, evaluated on many tuples cheaply.
#[derive(Debug, Clone)]
pub struct HomologyTable {
    arity: usize,
    trusted: Option<usize>,
    blocks: Vec<(Word, Vec<usize>)>,
}

impl HomologyTable {
    pub fn new(f: &ChainFunctor) -> Result<HomologyTable> {
        let window = f.window();
        let mut blocks = Vec::with_capacity(f.blocks().len());
        if window.trusted_upper.is_some() {
            for (w, k) in f.blocks() {
                blocks.push((w.clone(), k.with_window(window).homology_dims()?));
            }
        }
        Ok(HomologyTable { arity: f.arity(), trusted: window.trusted_upper, blocks })
    }

    pub fn trusted(&self) -> Option<usize> {
        self.trusted
    }

    /// Homology dimensions in degrees `0..=upto` (default: the trusted range).
    pub fn at(&self, dims: &[usize], upto: Option<usize>) -> Result<Vec<usize>> {
        if dims.len() != self.arity {
            return Err(CalculusError::ArityMismatch { expected: self.arity, got: dims.len() });
        }
        let t = upto.or(self.trusted).ok_or(ChainError::EmptyTrustedRange)?;
        let mut out = vec![0; t + 1];
        for (w, h) in &self.blocks {
            let m: usize = w.iter().map(|&l| dims[l as usize]).product();
            for (deg, x) in h.iter().enumerate().take(t + 1) {
                out[deg] += x * m;
            }
        }
        Ok(out)
    }
}

/// All tuples of the given arity with entries in `0..=max_dim`.
pub fn grid(arity: usize, max_dim: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out.into_iter().flat_map(|t| (0..=max_dim).map(move |d| [t.clone(), vec![d]].concat())).collect();
    }
    out
}

/// One homology comparison between two functors over a grid of tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub verdict: Verdict,
    /// At the first failing tuple, otherwise summed over the grid.
    pub homology_lhs: Vec<usize>,
    pub homology_rhs: Vec<usize>,
    /// Degrees compared: `0..degrees`.
    pub degrees: usize,
}

impl Comparison {
    pub fn skipped(reason: impl Into<String>) -> Comparison {
        Comparison { verdict: Verdict::Skipped(reason.into()), homology_lhs: Vec::new(), homology_rhs: Vec::new(), degrees: 0 }
    }

    pub fn exact(ok: bool, locus: impl FnOnce() -> String) -> Comparison {
        Comparison { verdict: Verdict::from_bool(ok, locus), homology_lhs: Vec::new(), homology_rhs: Vec::new(), degrees: 0 }
    }

    /// Combine as conjunction, keeping the first non-pass record.
    pub fn and(self, other: Comparison) -> Comparison {
        if !self.verdict.is_pass() {
            return self;
        }
        if !other.verdict.is_pass() {
            return other;
        }
        let add = |a: &[usize], b: &[usize]| -> Vec<usize> { (0..a.len().max(b.len())).map(|i| a.get(i).unwrap_or(&0) + b.get(i).unwrap_or(&0)).collect() };
        Comparison {
            verdict: Verdict::Pass,
            homology_lhs: add(&self.homology_lhs, &other.homology_lhs),
            homology_rhs: add(&self.homology_rhs, &other.homology_rhs),
            degrees: self.degrees.max(other.degrees),
        }
    }
}

/// Compare `H_*(lhs(t))` with `H_*(rhs(t))` for every tuple `t` in `tuples`,
/// over the common trusted range. `lhs` and `rhs` may have different arities
/// once `rhs_args` maps each tuple to the arguments of `rhs`.
pub fn compare_on(lhs: &ChainFunctor, rhs: &ChainFunctor, tuples: &[Vec<usize>], rhs_args: impl Fn(&[usize]) -> Vec<usize>) -> Result<Comparison> {
    let (a, b) = (HomologyTable::new(lhs)?, HomologyTable::new(rhs)?);
    let t = match (a.trusted(), b.trusted()) {
        (Some(x), Some(y)) => x.min(y),
        _ => return Ok(Comparison::skipped("empty trusted range")),
    };
    let mut sum_l = vec![0; t + 1];
    let mut sum_r = vec![0; t + 1];
    for tuple in tuples {
        let hl = a.at(tuple, Some(t))?;
        let hr = b.at(&rhs_args(tuple), Some(t))?;
        if hl != hr {
            let k = hl.iter().zip(&hr).position(|(x, y)| x != y).unwrap_or(0);
            return Ok(Comparison { verdict: Verdict::Fail(format!("at {tuple:?}, degree {k}")), homology_lhs: hl, homology_rhs: hr, degrees: t + 1 });
        }
        for i in 0..=t {
            sum_l[i] += hl[i];
            sum_r[i] += hr[i];
        }
    }
    Ok(Comparison { verdict: Verdict::Pass, homology_lhs: sum_l, homology_rhs: sum_r, degrees: t + 1 })
}

pub fn compare(lhs: &ChainFunctor, rhs: &ChainFunctor, tuples: &[Vec<usize>]) -> Result<Comparison> {
    compare_on(lhs, rhs, tuples, |t| t.to_vec())
}

/// Check that the homology at each tuple matches `expected(t)` in the trusted range.
pub fn expect_homology(f: &ChainFunctor, tuples: &[Vec<usize>], expected: impl Fn(&[usize]) -> Vec<usize>) -> Result<Comparison> {
    let table = HomologyTable::new(f)?;
    let Some(t) = table.trusted() else {
        return Ok(Comparison::skipped("empty trusted range"));
    };
    let mut sum_l = vec![0; t + 1];
    let mut sum_r = vec![0; t + 1];
    for tuple in tuples {
        let h = table.at(tuple, Some(t))?;
        let mut e = expected(tuple);
        e.resize(t + 1, 0);
        if h != e {
            return Ok(Comparison { verdict: Verdict::Fail(format!("at {tuple:?}")), homology_lhs: h, homology_rhs: e, degrees: t + 1 });
        }
        for i in 0..=t {
            sum_l[i] += h[i];
            sum_r[i] += e[i];
        }
    }
    Ok(Comparison { verdict: Verdict::Pass, homology_lhs: sum_l, homology_rhs: sum_r, degrees: t + 1 })
}

/// Equal dimensions and equal differentials.
pub fn same_complex(a: &ChainComplex, b: &ChainComplex) -> bool {
    let n = a.cutoff().min(b.cutoff());
    (0..=n).all(|k| a.dim(k) == b.dim(k)) && (1..=n).all(|k| a.d_or_zero(k) == b.d_or_zero(k))
}

// ---------------------------------------------------------------------------
// Polynomial approximation.

/// `P_n F` with `p_n : F -> P_n F` and, for `n >= 1`, `q_n : P_n F -> P_{n-1} F`.
#[derive(Debug, Clone)]
pub struct PolyApprox {
    pub value: ChainFunctor,
    pub p: ChainNat,
    pub q: Option<ChainNat>,
}

fn identity_nat(source: &ChainFunctor, target: &ChainFunctor, words: impl Fn(&Word) -> bool) -> ChainNat {
    let field = source.field();
    let n = source.window().cutoff.min(target.window().cutoff);
    let blocks = source
        .blocks()
        .iter()
        .filter(|(w, _)| words(w) && target.block(w).is_some())
        .map(|(w, k)| (w.clone(), (0..=n).map(|deg| Matrix::identity(field, k.dim(deg))).collect()))
        .collect();
    ChainNat { source: source.clone(), target: target.clone(), blocks }
}

/// Degree-`n` approximation in the grouped variable, with literal bar
/// resolutions so that `p_n` and `q_n` are explicit. For `n = 0` the model is
/// `F(0)` in degree 0, to which `P_0 F` contracts.
pub fn poly_approx(f: &ChainFunctor, n: usize, cutoff: usize) -> Result<PolyApprox> {
    let slots = all_slots(f);
    if n == 0 {
        let value = f.at_zero(&slots)?;
        let p = identity_nat(f, &value, |w| w.is_empty());
        return Ok(PolyApprox { value, p, q: None });
    }
    let value = resolve_detailed(f, &slots, n + 1, cutoff)?.value;
    let field = f.field();
    let blocks = f
        .blocks()
        .iter()
        .filter_map(|(w, k)| {
            let t = value.block(w)?;
            // K_q sits in the last block of Tot_q, at bar degree 0
            let comps = (0..=cutoff)
                .map(|q| {
                    let (rows, cols) = (t.dim(q), k.dim(q));
                    let mut m = Matrix::zeros(field, rows, cols);
                    m.paste(rows - cols, 0, &Matrix::identity(field, cols));
                    m
                })
                .collect();
            Some((w.clone(), comps))
        })
        .collect();
    let p = ChainNat { source: f.with_window(value.window()), target: value.clone(), blocks };
    let q = if n == 1 {
        let target = f.at_zero(&slots)?.with_window(value.window());
        Some(identity_nat(&value, &target, |w| w.is_empty()))
    } else {
        Some(merge_resolutions(f, &slots, n + 1, cutoff)?)
    };
    Ok(PolyApprox { value, p, q })
}

/// `P_n F` alone, honouring the resolution mode.
pub fn poly_value(f: &ChainFunctor, n: usize, s: Settings) -> Result<ChainFunctor> {
    if n == 0 {
        return Ok(f.at_zero(&all_slots(f))?);
    }
    Ok(f.resolve(&all_slots(f), n + 1, s.cutoff, s.mode)?)
}

/// `F` has degree `<= n` on the samples: `cr_{n+1} F` is acyclic in the
/// trusted range at every sample tuple (of length `n + 1`).
pub fn check_degree_n(f: &ChainFunctor, n: usize, samples: &[Vec<usize>]) -> Result<Verdict> {
    require_arity(f, 1)?;
    let cr = f.cross_effect(0, n + 1)?;
    let c = expect_homology(&cr, samples, |_| Vec::new())?;
    Ok(c.verdict)
}

// ---------------------------------------------------------------------------
// Linearization.

/// `D_1 F` in the grouped variable.
pub fn linearize_d1(f: &ChainFunctor, s: Settings) -> Result<ChainFunctor> {
    Ok(f.linearize(&all_slots(f), s.cutoff, s.mode)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Multilinearization {
    /// `D_1^i`.
    Partial(usize),
    /// `D_1^{i_1 × .. × i_k}`.
    Simultaneous(Vec<usize>),
    /// `D_1^{i_k} .. D_1^{i_1}`, applied in the listed order.
    Sequential(Vec<usize>),
}

pub fn multilinearize(f: &ChainFunctor, how: &Multilinearization, s: Settings) -> Result<ChainFunctor> {
    let slots = match how {
        Multilinearization::Partial(i) => std::slice::from_ref(i),
        Multilinearization::Simultaneous(v) | Multilinearization::Sequential(v) => v.as_slice(),
    };
    if let Some(&bad) = slots.iter().find(|&&i| i >= f.arity()) {
        return Err(CalculusError::SlotOutOfRange(bad));
    }
    Ok(match how {
        Multilinearization::Partial(i) => f.linearize(&[*i], s.cutoff, s.mode)?,
        Multilinearization::Simultaneous(v) => f.linearize(v, s.cutoff, s.mode)?,
        Multilinearization::Sequential(v) => {
            let mut g = f.clone();
            for &i in v {
                g = g.linearize(&[i], s.cutoff, s.mode)?;
            }
            g
        }
    })
}

/// `D_1 F ∘ D_1 G ⊕ D_1 cr_2 F(G(0), cr_1 G)` for `F` of arity 1.
pub fn d1_chain_rule_rhs(f: &ChainFunctor, g: &ChainFunctor, s: Settings) -> Result<ChainFunctor> {
    require_arity(f, 1)?;
    let slots = all_slots(g);
    let main = linearize_d1(f, s)?.substitute(&[linearize_d1(g, s)?])?;
    let correction = f.cross_effect(0, 2)?.substitute(&[g.at_zero(&slots)?, g.reduce(&slots)?])?;
    Ok(main.direct_sum(&correction.linearize(&slots, s.cutoff, s.mode)?)?)
}

// ---------------------------------------------------------------------------
// Directional derivative.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NablaDefinition {
    /// `D_1 F(X ⊕ -)(V)`.
    ViaSum,
    /// `D_1^V ker(F(X ⊕ V) -> F(X))`.
    ViaKernel,
    /// `D_1 F(V) ⊕ D_1^V cr_2 F(X, V)`; arity 1 only.
    Decomposition,
}

/// `F(X ⊕ V)` with directions in slots `m..2m`.
fn translate(f: &ChainFunctor, cutoff: usize) -> Result<ChainFunctor> {
    let m = f.arity();
    let args: Vec<ChainFunctor> = (0..m).map(|i| sum_of_slots(f.field(), 2 * m, &[i, m + i], cutoff)).collect::<Result<_>>()?;
    Ok(f.substitute(&args)?)
}

/// The split complement of the section `F(X) -> F(X ⊕ V)`: words of
/// `F(X ⊕ V)` hit by the projection `F(X ⊕ V) -> F(X)` are exactly the image
/// of the section, so the kernel keeps the rest.
fn kernel_of_projection(translated: &ChainFunctor, m: usize) -> Result<ChainFunctor> {
    let dirs: Vec<usize> = (m..2 * m).collect();
    let image = translated.at_zero(&dirs)?;
    let blocks = translated.blocks().iter().filter(|(w, _)| image.block(w).is_none()).map(|(w, k)| (w.clone(), k.clone()));
    Ok(ChainFunctor::from_blocks(translated.field(), 2 * m, translated.window(), blocks)?)
}

/// `∇F(V; X)`: base slots `0..m`, directions `m..2m`.
pub fn nabla(f: &ChainFunctor, defn: NablaDefinition, s: Settings) -> Result<ChainFunctor> {
    let m = f.arity();
    let dirs: Vec<usize> = (m..2 * m).collect();
    match defn {
        NablaDefinition::ViaSum => Ok(translate(f, s.cutoff)?.linearize(&dirs, s.cutoff, s.mode)?),
        NablaDefinition::ViaKernel => {
            let ker = kernel_of_projection(&translate(f, s.cutoff)?, m)?;
            Ok(ker.resolve(&dirs, 2, s.cutoff, s.mode)?)
        }
        NablaDefinition::Decomposition => {
            require_arity(f, 1)?;
            let linear = linearize_d1(f, s)?.reindex(&[1], 2)?;
            let cross = f.cross_effect(0, 2)?.linearize(&[1], s.cutoff, s.mode)?;
            Ok(linear.direct_sum(&cross)?)
        }
    }
}

/// `∇` in one slot only, the new direction appended as the last slot.
pub fn partial_nabla(g: &ChainFunctor, slot: usize, s: Settings) -> Result<ChainFunctor> {
    let a = g.arity();
    if slot >= a {
        return Err(CalculusError::SlotOutOfRange(slot));
    }
    let args: Vec<ChainFunctor> =
        (0..a).map(|j| if j == slot { sum_of_slots(g.field(), a + 1, &[j, a], s.cutoff) } else { projection(g.field(), a + 1, j, s.cutoff) }).collect::<Result<_>>()?;
    Ok(g.substitute(&args)?.linearize(&[a], s.cutoff, s.mode)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IteratedForm {
    /// `∇(∇^{n-1} F(V_{n-1}..V_1; -))(V_n; X)`.
    Recursive,
    /// `D_1^{(n)}(cr_{n+1} F(V_n..V_1, X) ⊕ cr_n F(V_n..V_1))`.
    ClosedForm,
}

/// `∇^n F(V_n..V_1; X)` for `F` of arity 1; slot 0 is `X`, slot `i` is `V_i`.
pub fn nabla_iterated(f: &ChainFunctor, n: usize, form: IteratedForm, s: Settings) -> Result<ChainFunctor> {
    require_arity(f, 1)?;
    if n == 0 {
        return Ok(f.clone());
    }
    match form {
        IteratedForm::Recursive => {
            let mut g = f.clone();
            for _ in 0..n {
                g = partial_nabla(&g, 0, s)?;
            }
            Ok(g)
        }
        IteratedForm::ClosedForm => {
            let top = f.cross_effect(0, n + 1)?;
            let shifted: Vec<usize> = (1..=n).collect();
            let lower = f.cross_effect(0, n)?.reindex(&shifted, n + 1)?;
            multilinearize(&top.direct_sum(&lower)?, &Multilinearization::Sequential(shifted), s)
        }
    }
}

/// `∇^{×n} F = ∇(∇(..∇F))`, of arity `2^n · m`.
pub fn nabla_full(f: &ChainFunctor, n: usize, s: Settings) -> Result<ChainFunctor> {
    let mut g = f.clone();
    for _ in 0..n {
        g = nabla(&g, NablaDefinition::ViaSum, s)?;
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaRoute {
    /// `Δ_n = L_n^* ∇ Δ_{n-1}`.
    Recursive,
    /// `Δ_n = (d_n^*)^* ∇^{×n}`.
    Projection,
}

/// `Δ_n F(V_n..V_1; X)` for `F` of arity 1.
pub fn delta_n(f: &ChainFunctor, n: usize, route: DeltaRoute, s: Settings) -> Result<ChainFunctor> {
    require_arity(f, 1)?;
    match route {
        DeltaRoute::Recursive => {
            let mut d = f.clone();
            for k in 1..=n {
                let h = nabla(&d, NablaDefinition::ViaSum, s)?;
                d = h.reindex(&l_map(k), k + 1)?;
            }
            Ok(d)
        }
        DeltaRoute::Projection => Ok(nabla_full(f, n, s)?.reindex(&d_map(n), n + 1)?),
    }
}

/// `L_k : (V_k..V_1, X) ↦ ((V_k..V_1), (V_{k-1}..V_1, X))` as a slot map on
/// `∇Δ_{k-1}`: base slot `j` stays, the direction of slot `j` becomes `V_{j+1}`.
fn l_map(k: usize) -> Vec<usize> {
    let m = k;
    (0..2 * m).map(|i| if i < m { i } else { i - m + 1 }).collect()
}

/// `d_n(S) = |S|` on bitmask slots.
pub fn d_map(n: usize) -> Vec<usize> {
    (0..1usize << n).map(|s| s.count_ones() as usize).collect()
}

/// `a_n : 2 × (n) -> n + 1`, `(b, j) ↦ b + j`, flattened as `b · n + j`.
pub fn a_map(n: usize) -> Vec<usize> {
    (0..2 * n).map(|i| i / n + i % n).collect()
}

/// `d_n = a_n ∘ (1 × d_{n-1})` under `2^n ≅ 2 × 2^{n-1}` (top bit first).
pub fn check_commuting_projections(n: usize) -> bool {
    if n == 0 {
        return true;
    }
    let (d, d_prev, a) = (d_map(n), d_map(n - 1), a_map(n));
    (0..1usize << n).all(|s| {
        let b = s >> (n - 1);
        let rest = s & ((1 << (n - 1)) - 1);
        d[s] == a[b * n + d_prev[rest]]
    })
}

// ---------------------------------------------------------------------------
// Faà di Bruno.

/// Set partitions of `{1..n}`, blocks in order of their least element.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for x in 1..=n {
        let mut next = Vec::new();
        for p in &out {
            for i in 0..p.len() {
                let mut q = p.clone();
                q[i].push(x);
                next.push(q);
            }
            let mut q = p.clone();
            q.push(vec![x]);
            next.push(q);
        }
        out = next;
    }
    out
}

/// `⊕_π ∇^{|π|} F(V_{|S_1|}, .., V_{|S_k|}; X)` over set partitions of `{1..n}`.
pub fn faa_di_bruno_rhs(f: &ChainFunctor, n: usize, s: Settings) -> Result<ChainFunctor> {
    require_arity(f, 1)?;
    let mut cache: BTreeMap<usize, ChainFunctor> = BTreeMap::new();
    let mut parts = Vec::new();
    for p in set_partitions(n) {
        let k = p.len();
        if let std::collections::btree_map::Entry::Vacant(e) = cache.entry(k) {
            e.insert(nabla_iterated(f, k, IteratedForm::Recursive, s)?);
        }
        let map: Vec<usize> = std::iter::once(0).chain(p.iter().map(Vec::len)).collect();
        parts.push(cache[&k].reindex(&map, n + 1)?);
    }
    if parts.is_empty() {
        return Ok(f.clone());
    }
    Ok(ChainFunctor::direct_sum_all(&parts)?)
}

/// `k_i` = number of blocks of size `i`, for a partition of `n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PartitionProfile {
    n: usize,
    counts: Vec<usize>,
}

impl PartitionProfile {
    /// `counts[i - 1] = k_i`; requires `Σ i k_i = n`.
    pub fn new(n: usize, counts: Vec<usize>) -> Result<PartitionProfile> {
        let total: usize = counts.iter().enumerate().map(|(i, k)| (i + 1) * k).sum();
        if total != n {
            return Err(CalculusError::InvalidProfile(format!("block sizes sum to {total}, expected {n}")));
        }
        if n > 30 {
            return Err(CalculusError::InvalidProfile(format!("n = {n} too large")));
        }
        let mut counts = counts;
        while counts.last() == Some(&0) {
            counts.pop();
        }
        Ok(PartitionProfile { n, counts })
    }

    pub fn of(blocks: &[Vec<usize>]) -> PartitionProfile {
        let n = blocks.iter().map(Vec::len).sum();
        let mut counts = vec![0; n];
        for b in blocks {
            counts[b.len() - 1] += 1;
        }
        PartitionProfile::new(n, counts).expect("sizes sum to n")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// `n! / (∏ k_i! ∏ (i!)^{k_i})`.
pub fn partition_multiplicity(profile: &PartitionProfile) -> u128 {
    let denom: u128 = profile.counts.iter().enumerate().map(|(i, &k)| factorial(k) * factorial(i + 1).pow(k as u32)).product();
    factorial(profile.n) / denom
}

/// Profiles of set partitions of `{1..n}` counted by enumeration.
pub fn profile_counts(n: usize) -> BTreeMap<PartitionProfile, u128> {
    let mut out = BTreeMap::new();
    for p in set_partitions(n) {
        *out.entry(PartitionProfile::of(&p)).or_insert(0) += 1;
    }
    out
}

// ---------------------------------------------------------------------------
// Tangent functor and reindexing.

/// `T⟨F_s⟩ = ⟨F_s ∘ π_R, ∇F_s⟩`: component `s` is the base part, `s + r` the derivative.
pub fn tangent(fs: &[ChainFunctor], s: Settings) -> Result<Vec<ChainFunctor>> {
    let mut base = Vec::with_capacity(fs.len());
    let mut deriv = Vec::with_capacity(fs.len());
    for f in fs {
        base.push(extend(f, 2 * f.arity())?);
        deriv.push(nabla(f, NablaDefinition::ViaSum, s)?);
    }
    base.extend(deriv);
    Ok(base)
}

/// `T^n F` for `F` of arity 1, `2^n` components of arity `2^n`.
pub fn tangent_power(f: &ChainFunctor, n: usize, s: Settings) -> Result<Vec<ChainFunctor>> {
    let mut fs = vec![f.clone()];
    for _ in 0..n {
        fs = tangent(&fs, s)?;
    }
    Ok(fs)
}

/// `ι_S : P(|S|) -> P(n)`: bit `b` of the small mask goes to the `b`-th smallest element of `S`.
pub fn iota_map(subset: usize) -> Vec<usize> {
    let elems: Vec<usize> = (0..usize::BITS as usize).filter(|b| subset >> b & 1 == 1).collect();
    (0..1usize << elems.len()).map(|t| elems.iter().enumerate().filter(|(b, _)| t >> b & 1 == 1).map(|(_, &e)| 1 << e).sum()).collect()
}

/// `∇^{×|S|} F ∘ ι_S^*`, the predicted component `(T^n F)_S`.
pub fn tangent_component(f: &ChainFunctor, n: usize, subset: usize, s: Settings) -> Result<ChainFunctor> {
    require_arity(f, 1)?;
    let k = subset.count_ones() as usize;
    Ok(nabla_full(f, k, s)?.reindex(&iota_map(subset), 1 << n)?)
}

/// `c^* = ⟨π_{c(0)}, .., π_{c(m-1)}⟩ : B^k -> B^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reindexer {
    pub map: Vec<usize>,
    pub target: usize,
}

impl Reindexer {
    pub fn new(map: Vec<usize>, target: usize) -> Result<Reindexer> {
        if let Some(&bad) = map.iter().find(|&&c| c >= target) {
            return Err(CalculusError::SlotOutOfRange(bad));
        }
        Ok(Reindexer { map, target })
    }

    pub fn d(n: usize) -> Reindexer {
        Reindexer { map: d_map(n), target: n + 1 }
    }

    /// `F ∘ c^*`.
    pub fn pull(&self, f: &ChainFunctor) -> Result<ChainFunctor> {
        Ok(f.reindex(&self.map, self.target)?)
    }

    /// `c^* ∘ ⟨G_j⟩`: component `i` of the result is `G_{c(i)}`.
    pub fn push(&self, gs: &[ChainFunctor]) -> Result<Vec<ChainFunctor>> {
        if gs.len() != self.target {
            return Err(CalculusError::ArityMismatch { expected: self.target, got: gs.len() });
        }
        Ok(self.map.iter().map(|&c| gs[c].clone()).collect())
    }
}

/// `K_n G = (Δ_n G, Δ_{n-1} G ∘ π_R, .., G ∘ π_R)`, listed by slot: entry `j`
/// is `Δ_j G` on the slots `X, V_1..V_j` of `n + 1`.
pub fn k_n(g: &ChainFunctor, n: usize, s: Settings) -> Result<Vec<ChainFunctor>> {
    (0..=n).map(|j| extend(&delta_n(g, j, DeltaRoute::Recursive, s)?, n + 1)).collect()
}

/// `Δ_n F ∘ K_n G`.
pub fn higher_chain_rule_rhs(f: &ChainFunctor, g: &ChainFunctor, n: usize, s: Settings) -> Result<ChainFunctor> {
    Ok(delta_n(f, n, DeltaRoute::Recursive, s)?.substitute(&k_n(g, n, s)?)?)
}

/// Set the given slots to the unit object and drop them: each letter in a
/// fixed slot contributes a factor of dimension one.
pub fn fix_to_unit(f: &ChainFunctor, slots: &[usize]) -> Result<ChainFunctor> {
    if let Some(&bad) = slots.iter().find(|&&i| i >= f.arity()) {
        return Err(CalculusError::SlotOutOfRange(bad));
    }
    let kept: Vec<usize> = (0..f.arity()).filter(|i| !slots.contains(i)).collect();
    let blocks = f.blocks().iter().map(|(w, k)| {
        let word: Word = w.iter().filter(|&&l| !slots.contains(&(l as usize))).map(|&l| kept.iter().position(|&i| i == l as usize).expect("kept slot") as u8).collect();
        (word, k.clone())
    });
    Ok(ChainFunctor::from_blocks(f.field(), kept.len(), f.window(), blocks)?)
}

/// `X ↦ d^n/dR^n F(X) = ∇^n F(R, .., R; X)`, a functor of one variable.
pub fn derivative_functor(f: &ChainFunctor, n: usize, s: Settings) -> Result<ChainFunctor> {
    let d = nabla_iterated(f, n, IteratedForm::Recursive, s)?;
    let dirs: Vec<usize> = (1..=n).collect();
    fix_to_unit(&d, &dirs)
}

/// `d^n/dR^n F(X)` at `dim X = x`.
pub fn derivative_dr(f: &ChainFunctor, n: usize, x: usize, s: Settings) -> Result<ChainComplex> {
    Ok(derivative_functor(f, n, s)?.eval_obj(&[x])?)
}

/// `Δ_n F(d^n/dR^n G, .., d/dR G; G)`, the right side of the chain rule for derivatives.
pub fn derivative_chain_rule_rhs(outer: &ChainFunctor, g: &ChainFunctor, n: usize, s: Settings) -> Result<ChainFunctor> {
    let args: Vec<ChainFunctor> = (0..=n).map(|j| derivative_functor(g, j, s)).collect::<Result<_>>()?;
    Ok(outer.substitute(&args)?)
}

/// `⟨F_0, .., F_{r-1}⟩` encoded as one functor with `r` tag slots in front:
/// evaluating the tags at the `i`-th unit vector recovers `F_i`.
pub fn pairing(fs: &[ChainFunctor]) -> Result<ChainFunctor> {
    let first = fs.first().ok_or(CalculusError::ArityMismatch { expected: 1, got: 0 })?;
    let (r, m) = (fs.len(), first.arity());
    let mut parts = Vec::with_capacity(r);
    for (i, f) in fs.iter().enumerate() {
        require_arity(f, m)?;
        let shift: Vec<usize> = (r..r + m).collect();
        let moved = f.reindex(&shift, r + m)?;
        let blocks = moved.blocks().iter().map(|(w, k)| ([vec![i as u8], w.clone()].concat(), k.clone()));
        parts.push(ChainFunctor::from_blocks(f.field(), r + m, f.window(), blocks)?);
    }
    Ok(ChainFunctor::direct_sum_all(&parts)?)
}

/// `∇` of a pairing, differentiating only the non-tag slots.
pub fn nabla_pairing(paired: &ChainFunctor, tags: usize, s: Settings) -> Result<ChainFunctor> {
    let a = paired.arity();
    let m = a - tags;
    let args: Vec<ChainFunctor> = (0..a)
        .map(|j| if j < tags { projection(paired.field(), a + m, j, s.cutoff) } else { sum_of_slots(paired.field(), a + m, &[j, j + m], s.cutoff) })
        .collect::<Result<_>>()?;
    let dirs: Vec<usize> = (a..a + m).collect();
    Ok(paired.substitute(&args)?.linearize(&dirs, s.cutoff, s.mode)?)
}

// ---------------------------------------------------------------------------
// Concrete oracle.

/// `V ↦ F(X ⊕ V)` at a fixed `dim X`.
struct Translated {
    base: SharedFunctor,
    x: usize,
}

impl Functor1 for Translated {
    fn field(&self) -> Field {
        self.base.field()
    }

    fn obj(&self, dim: usize) -> usize {
        self.base.obj(self.x + dim)
    }

    fn mor(&self, map: &Matrix) -> Matrix {
        let field = self.base.field();
        self.base.mor(&Matrix::block_diag(field, &[&Matrix::identity(field, self.x), map]))
    }
}

/// `∇F(V; X)` computed from the explicit `C_2` tower of `cr_1 F(X ⊕ -)`,
/// without normal forms. Only small heights are practical.
pub fn nabla_concrete(expr: &FunctorExpr, field: Field, x: usize, v: usize, height: usize) -> Result<ChainComplex> {
    let base = Unary::shared(expr, field)?;
    let translated: SharedFunctor = Rc::new(Translated { base, x });
    let tower = ComonadTower::new(Reduced::shared(translated), 2, height);
    Ok(tower.resolution(v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::compare_homology;
    use crate::functor::Term;

    const F2: Field = Field::F2;

    fn cf(expr: &FunctorExpr, cutoff: usize) -> ChainFunctor {
        ChainFunctor::from_expr(expr, F2, cutoff).unwrap()
    }

    fn sq(cutoff: usize) -> ChainFunctor {
        cf(&FunctorExpr::tensor_power(2), cutoff)
    }

    fn add_const(cutoff: usize) -> ChainFunctor {
        cf(&FunctorExpr::shifted_identity(2), cutoff)
    }

    fn id(cutoff: usize) -> ChainFunctor {
        cf(&FunctorExpr::identity(), cutoff)
    }

    fn h(f: &ChainFunctor, dims: &[usize]) -> Vec<usize> {
        f.homology(dims).unwrap()
    }

    #[test]
    fn poly_approx_of_add_constant() {
        let f = add_const(4);
        for n in 1..=3 {
            let p = poly_approx(&f, n, 4).unwrap();
            assert_eq!(p.value.blocks().len(), 2);
            assert!(p.value.blocks().values().all(|k| k.dims()[1..].iter().all(|&d| d == 0)));
            assert!(p.p.check().is_pass());
            assert!(p.q.as_ref().unwrap().check().is_pass());
        }
        let p0 = poly_approx(&f, 0, 4).unwrap();
        for d in 0..3 {
            assert_eq!(h(&p0.value, &[d]), vec![2, 0, 0, 0, 0]);
        }
        // q_1 is the projection onto A in degree 0
        let q1 = poly_approx(&f, 1, 4).unwrap().q.unwrap();
        let m = q1.at(&[3]).unwrap();
        assert_eq!((m.components[0].rows(), m.components[0].cols()), (2, 5));
        assert!(q1.check().is_pass());
    }

    #[test]
    fn p1_of_identity_is_an_equivalence() {
        let p = poly_approx(&id(4), 1, 4).unwrap();
        for d in 0..3 {
            let m = p.p.at(&[d]).unwrap();
            assert!(crate::chain::check_quasi_iso(&m).is_pass());
        }
    }

    #[test]
    fn polynomial_degree_checks() {
        let samples = grid(2, 2);
        let p1 = poly_approx(&sq(6), 1, 6).unwrap();
        assert!(p1.p.check().is_pass());
        assert!(check_degree_n(&p1.value, 1, &samples).unwrap().is_pass());
        assert!(check_degree_n(&sq(6), 1, &samples).unwrap().is_fail());
        assert!(check_degree_n(&sq(6), 2, &grid(3, 1)).unwrap().is_pass());
        assert!(check_degree_n(&cf(&FunctorExpr::constant(3), 6), 0, &grid(1, 2)).unwrap().is_pass());
        // C_2 P_1 of the square
        let c2 = p1.value.comonad(0, 2).unwrap();
        assert!(expect_homology(&c2, &grid(1, 2), |_| vec![]).unwrap().verdict.is_pass());
        // P_2 -> P_1 is a chain map
        let p2 = poly_approx(&sq(4), 2, 4).unwrap();
        assert!(p2.q.unwrap().check().is_pass());
    }

    #[test]
    fn p1_matches_concrete_tower() {
        let p1 = poly_approx(&sq(3), 1, 3).unwrap().value;
        let base = Unary::shared(&FunctorExpr::tensor_power(2), F2).unwrap();
        let tower = ComonadTower::new(base, 2, 3);
        for d in 0..=2 {
            let c = tower.resolution(d).unwrap();
            let cmp = compare_homology(&p1.eval_obj(&[d]).unwrap(), &c).unwrap();
            assert!(cmp.equal, "{cmp:?}");
        }
    }

    #[test]
    fn linearization_examples() {
        let s = Settings::new(6);
        assert_eq!(h(&linearize_d1(&add_const(6), s).unwrap(), &[3]), vec![3, 0, 0, 0, 0, 0]);
        assert!(linearize_d1(&cf(&FunctorExpr::constant(2), 6), s).unwrap().is_zero());
        let lit = linearize_d1(&sq(5), Settings::literal(5)).unwrap();
        let k = &lit.blocks()[&vec![0u8, 0]];
        assert_eq!(k.dims(), &[1, 2, 4, 8, 16, 32]);
        assert_eq!(h(&lit, &[2]), vec![0; 5]);
        assert!(linearize_d1(&sq(6), Settings::new(6).with_mode(ResolutionMode::Contracted)).unwrap().is_zero());
    }

    #[test]
    fn multilinearization_rules() {
        let s = Settings::literal(4);
        let cr2 = sq(4).cross_effect(0, 2).unwrap();
        let simultaneous = multilinearize(&cr2, &Multilinearization::Simultaneous(vec![0, 1]), s).unwrap();
        assert!(expect_homology(&simultaneous, &grid(2, 2), |_| vec![]).unwrap().verdict.is_pass());
        let seq = multilinearize(&cr2, &Multilinearization::Sequential(vec![0, 1]), s).unwrap();
        let rev = multilinearize(&cr2, &Multilinearization::Sequential(vec![1, 0]), s).unwrap();
        assert!(compare(&seq, &rev, &grid(2, 2)).unwrap().verdict.is_pass());
        assert_eq!(h(&seq, &[2, 2]), vec![8, 0, 0, 0]);
        let pi = projection(F2, 2, 0, 4).unwrap();
        let lin = multilinearize(&pi, &Multilinearization::Simultaneous(vec![0, 1]), s).unwrap();
        assert_eq!(lin, pi.with_window(lin.window()));
        assert!(matches!(multilinearize(&pi, &Multilinearization::Partial(2), s), Err(CalculusError::SlotOutOfRange(2))));
    }

    #[test]
    fn d1_chain_rule() {
        let s = Settings::new(5);
        let grid1 = grid(1, 2);
        for (f, g) in [(sq(5), sq(5)), (sq(5), add_const(5)), (add_const(5), sq(5))] {
            let lhs = linearize_d1(&f.substitute(std::slice::from_ref(&g)).unwrap(), s).unwrap();
            let rhs = d1_chain_rule_rhs(&f, &g, s).unwrap();
            assert!(compare(&lhs, &rhs, &grid1).unwrap().verdict.is_pass());
        }
        // without the correction the unreduced case fails
        let (f, g) = (sq(5), add_const(5));
        let lhs = linearize_d1(&f.substitute(std::slice::from_ref(&g)).unwrap(), s).unwrap();
        let bare = linearize_d1(&f, s).unwrap().substitute(&[linearize_d1(&g, s).unwrap()]).unwrap();
        assert!(compare(&lhs, &bare, &grid1).unwrap().verdict.is_fail());
    }

    #[test]
    fn nabla_definitions_agree() {
        let s = Settings::new(6);
        let g = grid(2, 2);
        for f in [id(6), add_const(6), sq(6), cf(&FunctorExpr::tensor_power(3), 6)] {
            let a = nabla(&f, NablaDefinition::ViaSum, s).unwrap();
            let b = nabla(&f, NablaDefinition::ViaKernel, s).unwrap();
            let c = nabla(&f, NablaDefinition::Decomposition, s).unwrap();
            assert!(compare(&a, &b, &g).unwrap().verdict.is_pass());
            assert!(compare(&a, &c, &g).unwrap().verdict.is_pass());
        }
        // ∇Id ≃ V and ∇(A ⊕ X) ≃ V
        for f in [id(6), add_const(6)] {
            let n = nabla(&f, NablaDefinition::ViaSum, s).unwrap();
            assert!(expect_homology(&n, &g, |t| vec![t[1]]).unwrap().verdict.is_pass());
        }
        // ∇(X ⊗ X) ≃ X ⊗ V ⊕ V ⊗ X
        let n = nabla(&sq(6), NablaDefinition::ViaSum, s).unwrap();
        assert!(expect_homology(&n, &g, |t| vec![2 * t[0] * t[1]]).unwrap().verdict.is_pass());
        for x in 0..3 {
            assert!(n.eval_obj(&[x, 0]).unwrap().is_zero_object());
        }
    }

    #[test]
    fn nabla_matches_concrete_tower() {
        let s = Settings::literal(3);
        for expr in [FunctorExpr::tensor_power(2), FunctorExpr::shifted_identity(1)] {
            let n = nabla(&cf(&expr, 3), NablaDefinition::ViaSum, s).unwrap();
            for (x, v) in [(0, 1), (1, 1), (2, 1), (1, 2)] {
                let concrete = nabla_concrete(&expr, F2, x, v, 3).unwrap();
                let cmp = compare_homology(&n.eval_obj(&[x, v]).unwrap(), &concrete).unwrap();
                assert!(cmp.equal, "{expr:?} at ({x}, {v}): {cmp:?}");
            }
        }
    }

    #[test]
    fn iterated_forms_agree_and_are_symmetric() {
        let s = Settings::new(5);
        for f in [sq(5), cf(&FunctorExpr::tensor_power(3), 5)] {
            for n in 1..=3 {
                let a = nabla_iterated(&f, n, IteratedForm::Recursive, s).unwrap();
                let b = nabla_iterated(&f, n, IteratedForm::ClosedForm, s).unwrap();
                let tuples = grid(n + 1, 1);
                assert!(compare(&a, &b, &tuples).unwrap().verdict.is_pass(), "n = {n}");
                if n >= 2 {
                    let swapped: Vec<usize> = [0, 2, 1].into_iter().chain(3..=n).collect();
                    let c = compare_on(&a, &a, &tuples, |t| swapped.iter().map(|&i| t[i]).collect()).unwrap();
                    assert!(c.verdict.is_pass());
                }
            }
        }
    }

    #[test]
    fn delta_routes_and_examples() {
        let s = Settings::new(5);
        let f = sq(5);
        let d1 = delta_n(&f, 1, DeltaRoute::Recursive, s).unwrap();
        assert_eq!(d1, nabla(&f, NablaDefinition::ViaSum, s).unwrap());
        for n in 1..=3 {
            let a = delta_n(&f, n, DeltaRoute::Recursive, s).unwrap();
            let b = delta_n(&f, n, DeltaRoute::Projection, s).unwrap();
            assert!(compare(&a, &b, &grid(n + 1, 1)).unwrap().verdict.is_pass());
            // Δ_n F(0, .., 0, R; X) = ∇^n F(R, .., R; X)
            let it = nabla_iterated(&f, n, IteratedForm::Recursive, s).unwrap();
            for x in 0..3 {
                let mut at = vec![0; n + 1];
                at[0] = x;
                at[1] = 1;
                let mut ones = vec![1; n + 1];
                ones[0] = x;
                assert_eq!(h(&a, &at), h(&it, &ones));
            }
        }
        // Δ_2 F(V_2, V_1; X) ≃ ∇F(V_2; X) ⊕ ∇^2 F(V_1, V_1; X)
        let d2 = delta_n(&f, 2, DeltaRoute::Recursive, s).unwrap();
        let rhs = nabla(&f, NablaDefinition::ViaSum, s).unwrap().reindex(&[0, 2], 3).unwrap().direct_sum(&nabla_iterated(&f, 2, IteratedForm::Recursive, s).unwrap().reindex(&[0, 1, 1], 3).unwrap()).unwrap();
        assert!(compare(&d2, &rhs, &grid(3, 2)).unwrap().verdict.is_pass());
    }

    #[test]
    fn faa_di_bruno_and_partitions() {
        let s = Settings::new(5);
        assert_eq!(set_partitions(3).len(), 5);
        assert_eq!(set_partitions(7).len(), 877);
        for n in 1..=7 {
            for (profile, count) in profile_counts(n) {
                assert_eq!(partition_multiplicity(&profile), count);
            }
        }
        assert!(matches!(PartitionProfile::new(3, vec![1]), Err(CalculusError::InvalidProfile(_))));
        for f in [sq(5), cf(&FunctorExpr::tensor_power(3), 5)] {
            for n in 1..=3 {
                let lhs = delta_n(&f, n, DeltaRoute::Recursive, s).unwrap();
                let rhs = faa_di_bruno_rhs(&f, n, s).unwrap();
                assert!(compare(&lhs, &rhs, &grid(n + 1, 1)).unwrap().verdict.is_pass(), "n = {n}");
            }
        }
    }

    #[test]
    fn tangent_components_and_projections() {
        let s = Settings::new(4);
        let f = sq(4);
        let t2 = tangent_power(&f, 2, s).unwrap();
        assert_eq!(t2.len(), 4);
        for subset in 0..4 {
            let predicted = tangent_component(&f, 2, subset, s).unwrap();
            assert!(compare(&t2[subset], &predicted, &grid(4, 1)).unwrap().verdict.is_pass(), "S = {subset}");
        }
        assert_eq!(iota_map(0b101), vec![0, 1, 4, 5]);
        for n in 0..6 {
            assert!(check_commuting_projections(n));
        }
        // d_n^* K_n G ≃ T^n G d_n^*
        let g = sq(4);
        for n in 1..=2 {
            let kn = k_n(&g, n, s).unwrap();
            let pushed = Reindexer::d(n).push(&kn).unwrap();
            let tn = tangent_power(&g, n, s).unwrap();
            for subset in 0..1usize << n {
                let rhs = Reindexer::d(n).pull(&tn[subset]).unwrap();
                assert!(compare(&pushed[subset], &rhs, &grid(n + 1, 1)).unwrap().verdict.is_pass());
            }
        }
        // T(F ∘ G) ≃ TF ∘ TG
        let (f, g) = (sq(4), add_const(4));
        let lhs = tangent(&[f.substitute(std::slice::from_ref(&g)).unwrap()], s).unwrap();
        let tg = tangent(&[g], s).unwrap();
        let tf = tangent(&[f], s).unwrap();
        for i in 0..2 {
            let rhs = tf[i].substitute(&tg).unwrap();
            assert!(compare(&lhs[i], &rhs, &grid(2, 2)).unwrap().verdict.is_pass());
        }
    }

    #[test]
    fn higher_chain_rule() {
        let s = Settings::new(5);
        for (f, g) in [(sq(5), sq(5)), (add_const(5), sq(5)), (sq(5), add_const(5))] {
            for n in 1..=2 {
                let lhs = delta_n(&f.substitute(std::slice::from_ref(&g)).unwrap(), n, DeltaRoute::Recursive, s).unwrap();
                let rhs = higher_chain_rule_rhs(&f, &g, n, s).unwrap();
                assert!(compare(&lhs, &rhs, &grid(n + 1, 1)).unwrap().verdict.is_pass(), "n = {n}");
            }
        }
    }

    #[test]
    fn cdc_axioms() {
        let s = Settings::new(5);
        let nab = |f: &ChainFunctor| nabla(f, NablaDefinition::ViaSum, s).unwrap();
        let (f, g) = (sq(5), add_const(5));
        let g2 = grid(2, 2);
        // (i)
        assert!(compare(&nab(&f.direct_sum(&g).unwrap()), &nab(&f).direct_sum(&nab(&g)).unwrap(), &g2).unwrap().verdict.is_pass());
        // (ii)
        let nf = nab(&f);
        let a = HomologyTable::new(&nf).unwrap();
        for t in grid(3, 2) {
            let lhs = a.at(&[t[0], t[1] + t[2]], None).unwrap();
            let r1 = a.at(&[t[0], t[1]], None).unwrap();
            let r2 = a.at(&[t[0], t[2]], None).unwrap();
            assert_eq!(lhs, r1.iter().zip(&r2).map(|(x, y)| x + y).collect::<Vec<_>>());
        }
        // (iii)
        assert!(expect_homology(&nab(&id(5)), &g2, |t| vec![t[1]]).unwrap().verdict.is_pass());
        // (iv) exactly
        let paired = pairing(&[f.clone(), g.clone()]).unwrap();
        let np = nabla_pairing(&paired, 2, s).unwrap();
        for t in &g2 {
            assert!(same_complex(&np.eval_obj(&[1, 0, t[0], t[1]]).unwrap(), &nab(&f).eval_obj(t).unwrap()));
            assert!(same_complex(&np.eval_obj(&[0, 1, t[0], t[1]]).unwrap(), &nab(&g).eval_obj(t).unwrap()));
        }
        // (v)
        let lhs = nab(&f.substitute(std::slice::from_ref(&g)).unwrap());
        let rhs = nab(&f).substitute(&[extend(&g, 2).unwrap(), nab(&g)]).unwrap();
        assert!(compare(&lhs, &rhs, &g2).unwrap().verdict.is_pass());
        // (vi), (vii) on ∇∇F with slots (X, V, W, Z)
        let nn = nab(&nab(&f));
        let vi = compare_on(&nn, &nf, &grid(4, 2), |t| vec![t[0], t[3]]).unwrap();
        let restricted: Vec<Vec<usize>> = grid(4, 2).into_iter().filter(|t| t[1] == 0 && t[2] == 0).collect();
        assert!(compare_on(&nn, &nf, &restricted, |t| vec![t[0], t[3]]).unwrap().verdict.is_pass());
        let secondary: Vec<Vec<usize>> = grid(4, 2).into_iter().filter(|t| t[2] == 0).collect();
        assert!(compare_on(&nn, &nf, &secondary, |t| vec![t[0], t[3]]).unwrap().verdict.is_pass());
        assert!(vi.verdict.is_fail());
        assert!(compare_on(&nn, &nn, &grid(4, 2), |t| vec![t[0], t[2], t[1], t[3]]).unwrap().verdict.is_pass());
    }

    #[test]
    fn derivative_along_r() {
        let s = Settings::new(5);
        assert_eq!(derivative_dr(&id(5), 1, 2, s).unwrap().homology_dims().unwrap(), vec![1, 0, 0, 0, 0]);
        for d in 0..3 {
            assert_eq!(derivative_dr(&sq(5), 1, d, s).unwrap().homology_dims().unwrap(), vec![2 * d, 0, 0, 0, 0]);
        }
        assert!(derivative_dr(&cf(&FunctorExpr::constant(4), 5), 1, 2, s).unwrap().is_zero_object());
        assert_eq!(derivative_dr(&sq(5), 2, 1, s).unwrap().homology_dims().unwrap(), vec![2, 0, 0, 0, 0]);
        // d^n/dR^n (F ∘ G) ≃ Δ_n F(d^n G, .., dG; G), and the partition form
        let (f, g) = (sq(5), sq(5));
        for n in 1..=2 {
            let lhs = derivative_functor(&f.substitute(std::slice::from_ref(&g)).unwrap(), n, s).unwrap();
            let rhs = derivative_chain_rule_rhs(&delta_n(&f, n, DeltaRoute::Recursive, s).unwrap(), &g, n, s).unwrap();
            let faa = derivative_chain_rule_rhs(&faa_di_bruno_rhs(&f, n, s).unwrap(), &g, n, s).unwrap();
            assert!(compare(&lhs, &rhs, &grid(1, 2)).unwrap().verdict.is_pass(), "n = {n}");
            assert!(compare(&lhs, &faa, &grid(1, 2)).unwrap().verdict.is_pass(), "n = {n}");
        }
    }

    #[cfg(feature = "quotient-atoms")]
    #[test]
    fn quotient_atoms_have_no_normal_form() {
        let e = FunctorExpr::infer(Term::ext2(Term::var(0))).unwrap();
        assert!(matches!(ChainFunctor::from_expr(&e, F2, 3), Err(ChainFunctorError::NotPolynomial(_))));
    }
}
