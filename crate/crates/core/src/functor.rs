//! Functor expressions, cross effects, and the comonads `C_n`.
//!
//! Objects of the base category are dimensions and morphisms are matrices
//! (`target_dim x source_dim`). An expression of arity `m` is a functor out of
//! the `m`-fold product, so `Var(i)` is the `i`th projection.
//!
//! The second half of the module evaluates the comonad machinery concretely at
//! a point: cross effects by recursive idempotent splitting, `C_n F`, its
//! counit, iterates `C_n^k F`, the bar resolution, and the unit-induced
//! contracting homotopies.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::chain::{ChainComplex, ChainError, TruncationWindow};
use crate::linalg::{Field, Matrix, SplitSummand};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunctorError {
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("variable {index} out of range for arity {arity}")]
    VarOutOfRange { index: usize, arity: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("{atom} is not available in characteristic {characteristic}")]
    UnsupportedCharacteristic { atom: &'static str, characteristic: u32 },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    Const(usize),
    Sum(Box<Term>, Box<Term>),
    Tensor(Box<Term>, Box<Term>),
    /// `head(args[0], .., args[k-1])`; `Var(i)` inside `head` refers to `args[i]`.
    Compose(Box<Term>, Vec<Term>),
    #[cfg(feature = "quotient-atoms")]
    Sym2(Box<Term>),
    #[cfg(feature = "quotient-atoms")]
    Ext2(Box<Term>),
}

impl Term {
    pub fn var(i: usize) -> Term {
        Term::Var(i)
    }
    pub fn constant(d: usize) -> Term {
        Term::Const(d)
    }
    pub fn sum(a: Term, b: Term) -> Term {
        Term::Sum(Box::new(a), Box::new(b))
    }
    pub fn tensor(a: Term, b: Term) -> Term {
        Term::Tensor(Box::new(a), Box::new(b))
    }
    pub fn compose(head: Term, args: Vec<Term>) -> Term {
        Term::Compose(Box::new(head), args)
    }
    #[cfg(feature = "quotient-atoms")]
    pub fn sym2(a: Term) -> Term {
        Term::Sym2(Box::new(a))
    }
    #[cfg(feature = "quotient-atoms")]
    pub fn ext2(a: Term) -> Term {
        Term::Ext2(Box::new(a))
    }

    /// `1 + max var index`, or 0 for a closed term.
    pub fn min_arity(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::Const(_) => 0,
            Term::Sum(a, b) | Term::Tensor(a, b) => a.min_arity().max(b.min_arity()),
            Term::Compose(_, args) => args.iter().map(Term::min_arity).max().unwrap_or(0),
            #[cfg(feature = "quotient-atoms")]
            Term::Sym2(a) | Term::Ext2(a) => a.min_arity(),
        }
    }

    fn check(&self, arity: usize) -> Result<(), FunctorError> {
        match self {
            Term::Var(i) if *i >= arity => Err(FunctorError::VarOutOfRange { index: *i, arity }),
            Term::Var(_) | Term::Const(_) => Ok(()),
            Term::Sum(a, b) | Term::Tensor(a, b) => {
                a.check(arity)?;
                b.check(arity)
            }
            Term::Compose(head, args) => {
                if args.is_empty() {
                    return Err(FunctorError::ArityMismatch { expected: head.min_arity().max(1), got: 0 });
                }
                head.check(args.len())?;
                args.iter().try_for_each(|a| a.check(arity))
            }
            #[cfg(feature = "quotient-atoms")]
            Term::Sym2(a) | Term::Ext2(a) => a.check(arity),
        }
    }

    fn uses_quotients(&self) -> bool {
        match self {
            Term::Var(_) | Term::Const(_) => false,
            Term::Sum(a, b) | Term::Tensor(a, b) => a.uses_quotients() || b.uses_quotients(),
            Term::Compose(h, args) => h.uses_quotients() || args.iter().any(Term::uses_quotients),
            #[cfg(feature = "quotient-atoms")]
            Term::Sym2(_) | Term::Ext2(_) => true,
        }
    }

    fn obj(&self, args: &[usize]) -> usize {
        match self {
            Term::Var(i) => args[*i],
            Term::Const(d) => *d,
            Term::Sum(a, b) => a.obj(args) + b.obj(args),
            Term::Tensor(a, b) => a.obj(args) * b.obj(args),
            Term::Compose(h, inner) => {
                let vals: Vec<usize> = inner.iter().map(|t| t.obj(args)).collect();
                h.obj(&vals)
            }
            #[cfg(feature = "quotient-atoms")]
            Term::Sym2(a) => {
                let n = a.obj(args);
                n * (n + 1) / 2
            }
            #[cfg(feature = "quotient-atoms")]
            Term::Ext2(a) => {
                let n = a.obj(args);
                n * n.saturating_sub(1) / 2
            }
        }
    }

    fn mor(&self, field: Field, args: &[Matrix]) -> Matrix {
        match self {
            Term::Var(i) => args[*i].clone(),
            Term::Const(d) => Matrix::identity(field, *d),
            Term::Sum(a, b) => Matrix::block_diag(field, &[&a.mor(field, args), &b.mor(field, args)]),
            Term::Tensor(a, b) => a.mor(field, args).kron(&b.mor(field, args)),
            Term::Compose(h, inner) => {
                let vals: Vec<Matrix> = inner.iter().map(|t| t.mor(field, args)).collect();
                h.mor(field, &vals)
            }
            #[cfg(feature = "quotient-atoms")]
            Term::Sym2(a) => quotient_square(&a.mor(field, args), false),
            #[cfg(feature = "quotient-atoms")]
            Term::Ext2(a) => quotient_square(&a.mor(field, args), true),
        }
    }
}

/// `Sym^2` or `Λ^2` of a map, as `P (g ⊗ g) I` where `I` picks the
/// representative `e_i ⊗ e_j` (`i <= j`, resp. `i < j`) and `P` is the quotient.
#[cfg(feature = "quotient-atoms")]
fn quotient_square(g: &Matrix, alternating: bool) -> Matrix {
    let field = g.field();
    let pairs = |n: usize| -> Vec<(usize, usize)> {
        (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).filter(|(i, j)| !alternating || i < j).collect()
    };
    let (r, c) = g.shape();
    let src = pairs(c);
    let tgt = pairs(r);
    let mut lift = Matrix::zeros(field, c * c, src.len());
    for (col, (i, j)) in src.iter().enumerate() {
        lift.set_i64(i * c + j, col, 1);
    }
    let mut quot = Matrix::zeros(field, tgt.len(), r * r);
    let index: HashMap<(usize, usize), usize> = tgt.iter().enumerate().map(|(n, p)| (*p, n)).collect();
    for k in 0..r {
        for l in 0..r {
            let key = (k.min(l), k.max(l));
            if let Some(&row) = index.get(&key) {
                let sign = if alternating && k > l { -1 } else { 1 };
                quot.set_i64(row, k * r + l, sign);
            }
        }
    }
    quot.mul(&g.kron(g)).mul(&lift)
}

/// A closed functor term together with its arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctorExpr {
    arity: usize,
    body: Term,
}

impl FunctorExpr {
    pub fn new(arity: usize, body: Term) -> Result<FunctorExpr, FunctorError> {
        if arity == 0 {
            return Err(FunctorError::ArityMismatch { expected: 1, got: 0 });
        }
        body.check(arity)?;
        Ok(FunctorExpr { arity, body })
    }

    /// Arity inferred as `1 + max var index` (at least 1).
    pub fn infer(body: Term) -> Result<FunctorExpr, FunctorError> {
        FunctorExpr::new(body.min_arity().max(1), body)
    }

    pub fn identity() -> FunctorExpr {
        FunctorExpr { arity: 1, body: Term::Var(0) }
    }

    pub fn constant(d: usize) -> FunctorExpr {
        FunctorExpr { arity: 1, body: Term::Const(d) }
    }

    /// `X ↦ A ⊕ X` with `dim A = a`.
    pub fn shifted_identity(a: usize) -> FunctorExpr {
        FunctorExpr { arity: 1, body: Term::sum(Term::Const(a), Term::Var(0)) }
    }

    /// `X ↦ X^{⊗k}`; `k = 0` gives the unit `Const(1)`.
    pub fn tensor_power(k: usize) -> FunctorExpr {
        let body = (1..k).fold(if k == 0 { Term::Const(1) } else { Term::Var(0) }, |acc, _| Term::tensor(acc, Term::Var(0)));
        FunctorExpr { arity: 1, body }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn body(&self) -> &Term {
        &self.body
    }

    /// `self ∘ (args...)`; arity of the result is the common arity of `args`.
    pub fn compose(&self, args: &[FunctorExpr]) -> Result<FunctorExpr, FunctorError> {
        if args.len() != self.arity {
            return Err(FunctorError::ArityMismatch { expected: self.arity, got: args.len() });
        }
        let arity = args.iter().map(|a| a.arity).max().unwrap_or(1);
        FunctorExpr::new(arity, Term::compose(self.body.clone(), args.iter().map(|a| a.body.clone()).collect()))
    }

    pub fn sum(&self, other: &FunctorExpr) -> Result<FunctorExpr, FunctorError> {
        FunctorExpr::new(self.arity.max(other.arity), Term::sum(self.body.clone(), other.body.clone()))
    }

    pub fn tensor(&self, other: &FunctorExpr) -> Result<FunctorExpr, FunctorError> {
        FunctorExpr::new(self.arity.max(other.arity), Term::tensor(self.body.clone(), other.body.clone()))
    }

    pub fn uses_quotients(&self) -> bool {
        self.body.uses_quotients()
    }

    /// Reject atoms that are not defined over `field`.
    pub fn check_field(&self, field: Field) -> Result<(), FunctorError> {
        #[cfg(feature = "quotient-atoms")]
        {
            fn has_sym(t: &Term) -> bool {
                match t {
                    Term::Var(_) | Term::Const(_) => false,
                    Term::Sum(a, b) | Term::Tensor(a, b) => has_sym(a) || has_sym(b),
                    Term::Compose(h, args) => has_sym(h) || args.iter().any(has_sym),
                    Term::Sym2(_) => true,
                    Term::Ext2(a) => has_sym(a),
                }
            }
            if field.characteristic() == 2 && has_sym(&self.body) {
                return Err(FunctorError::UnsupportedCharacteristic { atom: "sym2", characteristic: 2 });
            }
        }
        let _ = field;
        Ok(())
    }

    pub fn eval_obj(&self, args: &[usize]) -> Result<usize, FunctorError> {
        if args.len() != self.arity {
            return Err(FunctorError::ArityMismatch { expected: self.arity, got: args.len() });
        }
        Ok(self.body.obj(args))
    }

    pub fn eval_mor(&self, args: &[Matrix]) -> Result<Matrix, FunctorError> {
        if args.len() != self.arity {
            return Err(FunctorError::ArityMismatch { expected: self.arity, got: args.len() });
        }
        let field = args[0].field();
        if args.iter().any(|m| m.field() != field) {
            return Err(FunctorError::ShapeMismatch("arguments over different fields".into()));
        }
        self.check_field(field)?;
        Ok(self.body.mor(field, args))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "(var {i})"),
            Term::Const(d) => write!(f, "(const {d})"),
            Term::Sum(a, b) => write!(f, "(sum {a} {b})"),
            Term::Tensor(a, b) => write!(f, "(tensor {a} {b})"),
            Term::Compose(h, args) => {
                write!(f, "(compose {h}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            #[cfg(feature = "quotient-atoms")]
            Term::Sym2(a) => write!(f, "(sym2 {a})"),
            #[cfg(feature = "quotient-atoms")]
            Term::Ext2(a) => write!(f, "(ext2 {a})"),
        }
    }
}

impl fmt::Display for FunctorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}

// ---------------------------------------------------------------------------
// Concrete evaluation of one-variable functors.

/// A one-variable functor evaluated exactly on dimensions and matrices.
pub trait Functor1 {
    fn field(&self) -> Field;
    fn obj(&self, dim: usize) -> usize;
    /// `map` is `target x source`; the result is `obj(target) x obj(source)`.
    fn mor(&self, map: &Matrix) -> Matrix;
}

pub type SharedFunctor = Rc<dyn Functor1>;

/// An arity-1 expression bound to a field.
#[derive(Debug, Clone)]
pub struct Unary {
    expr: FunctorExpr,
    field: Field,
}

impl Unary {
    pub fn new(expr: &FunctorExpr, field: Field) -> Result<Unary, FunctorError> {
        if expr.arity() != 1 {
            return Err(FunctorError::ArityMismatch { expected: 1, got: expr.arity() });
        }
        expr.check_field(field)?;
        Ok(Unary { expr: expr.clone(), field })
    }

    pub fn shared(expr: &FunctorExpr, field: Field) -> Result<SharedFunctor, FunctorError> {
        Ok(Rc::new(Unary::new(expr, field)?))
    }
}

impl Functor1 for Unary {
    fn field(&self) -> Field {
        self.field
    }
    fn obj(&self, dim: usize) -> usize {
        self.expr.body.obj(&[dim])
    }
    fn mor(&self, map: &Matrix) -> Matrix {
        self.expr.body.mor(self.field, std::slice::from_ref(map))
    }
}

/// Block-diagonal map on `⊕ dims` with identity on the kept slots.
fn slot_projector(field: Field, dims: &[usize], keep: impl Fn(usize) -> bool) -> Matrix {
    let total: usize = dims.iter().sum();
    let mut m = Matrix::zeros(field, total, total);
    let mut off = 0;
    for (slot, &d) in dims.iter().enumerate() {
        if keep(slot) {
            for t in 0..d {
                m.set_i64(off + t, off + t, 1);
            }
        }
        off += d;
    }
    m
}

fn offsets(dims: &[usize]) -> Vec<usize> {
    dims.iter().scan(0, |acc, &d| {
        let o = *acc;
        *acc += d;
        Some(o)
    }).collect()
}

/// `cr_n F(X_1, .., X_n)` as a summand of `F(X_1 ⊕ .. ⊕ X_n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossEffect {
    pub dims: Vec<usize>,
    pub summand: SplitSummand,
}

impl CrossEffect {
    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.summand.dim()
    }

    /// `cr_n F(g_1, .., g_n)` into the cross effect `target`.
    pub fn induced(&self, f: &dyn Functor1, maps: &[Matrix], target: &CrossEffect) -> Matrix {
        let refs: Vec<&Matrix> = maps.iter().collect();
        let whole = f.mor(&Matrix::block_diag(f.field(), &refs));
        target.summand.proj.mul(&whole).mul(&self.summand.incl)
    }
}

fn cross_effect_summand(f: &dyn Functor1, dims: &[usize]) -> SplitSummand {
    let field = f.field();
    let total: usize = dims.iter().sum();
    if dims.len() == 1 {
        let amb = f.obj(total);
        let e = Matrix::identity(field, amb).sub(&f.mor(&Matrix::zeros(field, total, total)));
        return e.split_idempotent().expect("F(0) is idempotent");
    }
    let mut merged = vec![dims[0] + dims[1]];
    merged.extend_from_slice(&dims[2..]);
    let outer = cross_effect_summand(f, &merged);
    let keep_first = f.mor(&slot_projector(field, dims, |s| s != 1));
    let keep_second = f.mor(&slot_projector(field, dims, |s| s != 0));
    let e1 = outer.proj.mul(&keep_first).mul(&outer.incl);
    let e2 = outer.proj.mul(&keep_second).mul(&outer.incl);
    let rest = Matrix::identity(field, outer.dim()).sub(&e1).sub(&e2);
    let inner = rest.split_idempotent().expect("complementary cross-effect idempotents");
    outer.refine(&inner)
}

/// The `n`th cross effect, `n = args.len()`, by the recursive splitting
/// `cr_{n-1}F(X_1⊕X_2, ..) = cr_{n-1}F(X_1, ..) ⊕ cr_{n-1}F(X_2, ..) ⊕ cr_nF(X_1, X_2, ..)`.
pub fn cross_effect(f: &dyn Functor1, args: &[usize]) -> Result<CrossEffect, FunctorError> {
    if args.is_empty() {
        return Err(FunctorError::ArityMismatch { expected: 1, got: 0 });
    }
    Ok(CrossEffect { dims: args.to_vec(), summand: cross_effect_summand(f, args) })
}

/// Inclusion-exclusion count `Σ_S (-1)^{n-|S|} dim F(⊕_{i∈S} X_i)`.
pub fn cross_effect_dim_by_inclusion_exclusion(f: &dyn Functor1, args: &[usize]) -> i64 {
    let n = args.len();
    (0..1usize << n)
        .map(|mask| {
            let dim: usize = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| args[i]).sum();
            let sign = if (n - mask.count_ones() as usize).is_multiple_of(2) { 1 } else { -1 };
            sign * f.obj(dim) as i64
        })
        .sum()
}

/// `Σ_{S ⊆ [n]} dim cr_{|S|}F(X_S)`, with `cr_0 F = F(0)`; equals `dim F(⊕ X_i)`.
pub fn decomposition_total(f: &dyn Functor1, args: &[usize]) -> usize {
    let n = args.len();
    (0..1usize << n)
        .map(|mask| {
            let sub: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| args[i]).collect();
            if sub.is_empty() {
                f.obj(0)
            } else {
                cross_effect_summand(f, &sub).dim()
            }
        })
        .sum()
}

/// Block permutation `⊕ X_i -> ⊕ X_{perm[j]}`.
fn shuffle(field: Field, dims: &[usize], perm: &[usize]) -> Matrix {
    let src_off = offsets(dims);
    let permuted: Vec<usize> = perm.iter().map(|&i| dims[i]).collect();
    let tgt_off = offsets(&permuted);
    let total: usize = dims.iter().sum();
    let mut m = Matrix::zeros(field, total, total);
    for (j, &i) in perm.iter().enumerate() {
        for t in 0..dims[i] {
            m.set_i64(tgt_off[j] + t, src_off[i] + t, 1);
        }
    }
    m
}

/// `cr_nF(X_1..X_n) -> cr_nF(X_{perm[0]}, .., X_{perm[n-1]})` induced by the
/// coproduct shuffle.
pub fn cr_symmetry_iso(f: &dyn Functor1, args: &[usize], perm: &[usize]) -> Result<Matrix, FunctorError> {
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if perm.len() != args.len() || sorted.iter().enumerate().any(|(i, &p)| i != p) {
        return Err(FunctorError::ShapeMismatch(format!("{perm:?} is not a permutation of {} slots", args.len())));
    }
    let src = cross_effect(f, args)?;
    let permuted: Vec<usize> = perm.iter().map(|&i| args[i]).collect();
    let tgt = cross_effect(f, &permuted)?;
    let whole = f.mor(&shuffle(f.field(), args, perm));
    Ok(tgt.summand.proj.mul(&whole).mul(&src.summand.incl))
}

/// `[1 1 .. 1]`: the fold map `⊕^n X -> X`.
pub fn fold(field: Field, n: usize, d: usize) -> Matrix {
    let mut m = Matrix::zeros(field, d, n * d);
    for c in 0..n {
        for t in 0..d {
            m.set_i64(t, c * d + t, 1);
        }
    }
    m
}

/// The reduction `cr_1 F`, a summand of `F` at each object.
pub struct Reduced {
    base: SharedFunctor,
    cache: RefCell<HashMap<usize, Rc<SplitSummand>>>,
}

impl Reduced {
    pub fn new(base: SharedFunctor) -> Reduced {
        Reduced { base, cache: RefCell::new(HashMap::new()) }
    }

    pub fn shared(base: SharedFunctor) -> Rc<Reduced> {
        Rc::new(Reduced::new(base))
    }

    pub fn base(&self) -> &SharedFunctor {
        &self.base
    }

    /// `cr_1F(X)` inside `F(X)`.
    pub fn split(&self, d: usize) -> Rc<SplitSummand> {
        if let Some(s) = self.cache.borrow().get(&d) {
            return s.clone();
        }
        let s = Rc::new(cross_effect_summand(self.base.as_ref(), &[d]));
        self.cache.borrow_mut().insert(d, s.clone());
        s
    }
}

impl Functor1 for Reduced {
    fn field(&self) -> Field {
        self.base.field()
    }
    fn obj(&self, dim: usize) -> usize {
        self.split(dim).dim()
    }
    fn mor(&self, map: &Matrix) -> Matrix {
        let (r, c) = map.shape();
        self.split(r).proj.mul(&self.base.mor(map)).mul(&self.split(c).incl)
    }
}

/// `C_n G(X) = cr_n cr_1 G(X, .., X)`, a summand of `G(⊕^n X)`.
pub struct Comonad {
    n: usize,
    base: SharedFunctor,
    reduced: Rc<Reduced>,
    cache: RefCell<HashMap<usize, Rc<SplitSummand>>>,
}

impl Comonad {
    pub fn new(base: SharedFunctor, n: usize) -> Comonad {
        assert!(n >= 1, "C_n needs n >= 1");
        let reduced = Reduced::shared(base.clone());
        Comonad { n, base, reduced, cache: RefCell::new(HashMap::new()) }
    }

    pub fn copies(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &SharedFunctor {
        &self.base
    }

    /// `C_n G(X) ⊆ cr_1 G(⊕^n X) ⊆ G(⊕^n X)`.
    pub fn split(&self, d: usize) -> Rc<SplitSummand> {
        if let Some(s) = self.cache.borrow().get(&d) {
            return s.clone();
        }
        let outer = self.reduced.split(self.n * d);
        let inner = cross_effect_summand(self.reduced.as_ref(), &vec![d; self.n]);
        let s = Rc::new(outer.refine(&inner));
        self.cache.borrow_mut().insert(d, s.clone());
        s
    }

    /// `ε: C_n G(X) -> G(X)`, the fold map on the cross-effect summand.
    pub fn counit(&self, d: usize) -> Matrix {
        let field = self.field();
        self.base.mor(&fold(field, self.n, d)).mul(&self.split(d).incl)
    }
}

impl Functor1 for Comonad {
    fn field(&self) -> Field {
        self.base.field()
    }
    fn obj(&self, dim: usize) -> usize {
        self.split(dim).dim()
    }
    fn mor(&self, map: &Matrix) -> Matrix {
        let (r, c) = map.shape();
        let copies: Vec<&Matrix> = (0..self.n).map(|_| map).collect();
        let whole = self.base.mor(&Matrix::block_diag(self.field(), &copies));
        self.split(r).proj.mul(&whole).mul(&self.split(c).incl)
    }
}

/// `C_nF(X) -> F(X)` for an expression.
pub fn comonad_counit(f: &dyn Functor1, n: usize, d: usize) -> Result<Matrix, FunctorError> {
    if n == 0 {
        return Err(FunctorError::NotApplicable("C_0 is not defined".into()));
    }
    let field = f.field();
    let reduced = cross_effect_summand(f, &[n * d]);
    let copies = ReducedView { base: f, dim: n * d, split: &reduced };
    let inner = cross_effect_summand(&copies, &vec![d; n]);
    let incl = reduced.refine(&inner).incl;
    Ok(f.mor(&fold(field, n, d)).mul(&incl))
}

/// `cr_1F` at a single fixed ambient object, for one-off counit evaluation.
struct ReducedView<'a> {
    base: &'a dyn Functor1,
    dim: usize,
    split: &'a SplitSummand,
}

impl Functor1 for ReducedView<'_> {
    fn field(&self) -> Field {
        self.base.field()
    }
    fn obj(&self, dim: usize) -> usize {
        self.at(dim).dim()
    }
    fn mor(&self, map: &Matrix) -> Matrix {
        let (r, c) = map.shape();
        self.at(r).proj.mul(&self.base.mor(map)).mul(&self.at(c).incl)
    }
}

impl ReducedView<'_> {
    fn at(&self, d: usize) -> SplitSummand {
        if d == self.dim {
            self.split.clone()
        } else {
            cross_effect_summand(self.base, &[d])
        }
    }
}

/// The comparison `cr_n(cr_1 F)(X..) -> cr_n F(X..)` through `F(⊕ X_i)`.
pub fn idempotency_comparison(f: &dyn Functor1, args: &[usize]) -> Result<Matrix, FunctorError> {
    let total: usize = args.iter().sum();
    let direct = cross_effect(f, args)?;
    let reduced = cross_effect_summand(f, &[total]);
    let view = ReducedView { base: f, dim: total, split: &reduced };
    let nested = cross_effect_summand(&view, args);
    Ok(direct.summand.proj.mul(&reduced.incl).mul(&nested.incl))
}

/// Iterates `L_0 = G`, `L_{j+1} = C_n L_j` with their counits.
pub struct ComonadTower {
    n: usize,
    levels: Vec<SharedFunctor>,
    comonads: Vec<Rc<Comonad>>,
}

impl ComonadTower {
    pub fn new(base: SharedFunctor, n: usize, height: usize) -> ComonadTower {
        let mut levels = vec![base];
        let mut comonads = Vec::with_capacity(height);
        for _ in 0..height {
            let c = Rc::new(Comonad::new(levels.last().unwrap().clone(), n));
            comonads.push(c.clone());
            levels.push(c);
        }
        ComonadTower { n, levels, comonads }
    }

    pub fn field(&self) -> Field {
        self.levels[0].field()
    }

    pub fn height(&self) -> usize {
        self.comonads.len()
    }

    pub fn level(&self, j: usize) -> &SharedFunctor {
        &self.levels[j]
    }

    /// `C^i(ε_{L_j}) : L_{j+1+i}(X) -> L_{j+i}(X)`.
    pub fn lifted_counit(&self, i: usize, j: usize, d: usize) -> Matrix {
        if i == 0 {
            return self.comonads[j].counit(d);
        }
        let src = self.comonads[j + i].split(d);
        let tgt = self.comonads[j + i - 1].split(d);
        let inner = self.lifted_counit(i - 1, j, self.n * d);
        tgt.proj.mul(&inner).mul(&src.incl)
    }

    /// `d_k = Σ_{i<k} (-1)^i C^i(ε_{C^{k-1-i}}) : L_k(X) -> L_{k-1}(X)`.
    pub fn differential(&self, k: usize, d: usize) -> Matrix {
        let field = self.field();
        let mut out = Matrix::zeros(field, self.levels[k - 1].obj(d), self.levels[k].obj(d));
        for i in 0..k {
            let term = self.lifted_counit(i, k - 1 - i, d);
            out = if i % 2 == 0 { out.add(&term) } else { out.sub(&term) };
        }
        out
    }

    /// The resolution `L_0(X) <- L_1(X) <- ..` truncated at the tower height.
    pub fn resolution(&self, d: usize) -> Result<ChainComplex, FunctorError> {
        let h = self.height();
        let dims = (0..=h).map(|k| self.levels[k].obj(d)).collect();
        let diffs = (1..=h).map(|k| self.differential(k, d)).collect();
        Ok(ChainComplex::new(self.field(), TruncationWindow::truncated(h), dims, diffs)?)
    }

    /// Degreewise `L_k(g)`.
    pub fn resolution_map(&self, g: &Matrix) -> Vec<Matrix> {
        self.levels.iter().map(|l| l.mor(g)).collect()
    }

    /// The augmented column `cr_n L_0(X..) <- cr_n L_1(X..) <- ..` at `args`
    /// (`args.len()` must equal the number of copies).
    pub fn cross_effect_column(&self, args: &[usize]) -> Result<(ChainComplex, Vec<CrossEffect>), FunctorError> {
        if args.len() != self.n {
            return Err(FunctorError::ArityMismatch { expected: self.n, got: args.len() });
        }
        let total: usize = args.iter().sum();
        let h = self.height();
        let crs: Vec<CrossEffect> = (0..=h).map(|k| cross_effect(self.levels[k].as_ref(), args)).collect::<Result<_, _>>()?;
        let dims = crs.iter().map(CrossEffect::dim).collect();
        let diffs = (1..=h)
            .map(|k| crs[k - 1].summand.proj.mul(&self.differential(k, total)).mul(&crs[k].summand.incl))
            .collect();
        let c = ChainComplex::new(self.field(), TruncationWindow::truncated(h), dims, diffs)?;
        Ok((c, crs))
    }

    /// `s_j = η : cr_n L_j(X..) -> cr_n C_n L_j(X..)` for `j < height`,
    /// induced by `X_i ↦` slot `i` of copy `i` in `⊕^n (⊕ X_i)`.
    pub fn unit_splittings(&self, args: &[usize], crs: &[CrossEffect]) -> Vec<Matrix> {
        let field = self.field();
        let total: usize = args.iter().sum();
        let off = offsets(args);
        let mut inject = Matrix::zeros(field, self.n * total, total);
        for (i, &d) in args.iter().enumerate() {
            for t in 0..d {
                inject.set_i64(i * total + off[i] + t, off[i] + t, 1);
            }
        }
        (0..self.height())
            .map(|j| {
                let ambient = self.levels[j].mor(&inject);
                let into_next = self.comonads[j].split(total).proj.mul(&ambient);
                crs[j + 1].summand.proj.mul(&into_next).mul(&crs[j].summand.incl)
            })
            .collect()
    }
}

/// The splittings `s_0, .., s_{k}` contracting the augmented column
/// `cr_n F ← cr_n C_n F ← cr_n C_n^2 F ← ..` at `args`.
pub fn contraction_splittings(f: SharedFunctor, n: usize, args: &[usize], k: usize) -> Result<Vec<Matrix>, FunctorError> {
    if n == 0 || args.len() != n {
        return Err(FunctorError::NotApplicable(format!("unit of cr_{n} needs {n} arguments, got {}", args.len())));
    }
    let tower = ComonadTower::new(f, n, k + 1);
    let (_, crs) = tower.cross_effect_column(args)?;
    Ok(tower.unit_splittings(args, &crs))
}
