//! Chain-complex-valued functors in tensor normal form.
//!
//! Every functor built from `Var`, `Const`, `Sum`, `Tensor` and `Compose` is
//! naturally isomorphic to `X ↦ ⊕_w K_w ⊗ X_{w_1} ⊗ .. ⊗ X_{w_l}`, a sum over
//! words `w` in the slot indices with coefficient complexes `K_w`. Morphisms
//! act by `1 ⊗ g_{w_1} ⊗ .. ⊗ g_{w_l}`. Cross effects, the comonads `C_n` and
//! their bar resolutions never mix words, so every construction of the
//! calculus reduces to operations on the coefficient complexes.
//!
//! For a word with `l` letters in the resolved slots, `C_c^k` contributes one
//! copy of `K_w` per `k`-tuple of surjections `[l] ↠ [c]`; the counit deletes a
//! layer. This bar complex is contractible as soon as a surjection exists
//! (prepend a fixed one), which [`ResolutionMode::Contracted`] uses to drop
//! such words outright.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bicomplex::{normalize_signs, tot, Bicomplex, BicomplexError, BicomplexMorphism, Convention};
use crate::chain::{direct_sum_all, tensor_product, ChainComplex, ChainError, ChainMap, TruncationWindow};
use crate::functor::{FunctorError, FunctorExpr, Term};
use crate::linalg::{Field, Matrix};
use crate::verdict::Verdict;

/// Slot indices of the tensor factors, in order.
pub type Word = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainFunctorError {
    #[error("{0} has no tensor normal form")]
    NotPolynomial(String),
    #[error("expected {expected} slots, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("slot {0} out of range")]
    SlotOutOfRange(usize),
    #[error("field mismatch")]
    FieldMismatch,
    #[error("window exhausted: {0}")]
    WindowExhausted(String),
    #[error(transparent)]
    Functor(#[from] FunctorError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Bicomplex(#[from] BicomplexError),
}

/// How to treat bar resolutions of words that admit a surjection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolutionMode {
    /// Build the truncated bar complex.
    Literal,
    /// Replace it by the zero complex it contracts onto.
    Contracted,
    /// Literal while the block has at most `budget` basis vectors.
    Auto { budget: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainFunctor {
    field: Field,
    arity: usize,
    window: TruncationWindow,
    blocks: BTreeMap<Word, ChainComplex>,
}

fn expand(t: &Term) -> Result<BTreeMap<Word, usize>, ChainFunctorError> {
    Ok(match t {
        Term::Var(i) => BTreeMap::from([(vec![*i as u8], 1)]),
        Term::Const(d) => {
            if *d == 0 {
                BTreeMap::new()
            } else {
                BTreeMap::from([(Vec::new(), *d)])
            }
        }
        Term::Sum(a, b) => {
            let mut out = expand(a)?;
            for (w, m) in expand(b)? {
                *out.entry(w).or_default() += m;
            }
            out
        }
        Term::Tensor(a, b) => multiply(&expand(a)?, &expand(b)?),
        Term::Compose(head, args) => {
            let inner: Vec<BTreeMap<Word, usize>> = args.iter().map(expand).collect::<Result<_, _>>()?;
            let mut out = BTreeMap::new();
            for (w, m) in expand(head)? {
                let mut acc = BTreeMap::from([(Vec::new(), m)]);
                for &letter in &w {
                    acc = multiply(&acc, &inner[letter as usize]);
                }
                for (u, k) in acc {
                    *out.entry(u).or_default() += k;
                }
            }
            out
        }
        #[allow(unreachable_patterns)]
        other => return Err(ChainFunctorError::NotPolynomial(other.to_string())),
    })
}

fn multiply(a: &BTreeMap<Word, usize>, b: &BTreeMap<Word, usize>) -> BTreeMap<Word, usize> {
    let mut out = BTreeMap::new();
    for (u, m) in a {
        for (v, k) in b {
            let w: Word = u.iter().chain(v).copied().collect();
            *out.entry(w).or_default() += m * k;
        }
    }
    out
}

/// `dim K` spread over `m` copies: `K ⊗ k^m`, `K`-index major.
fn inflate(k: &ChainComplex, m: usize) -> ChainComplex {
    let field = k.field();
    let dims = k.dims().iter().map(|d| d * m).collect();
    let diffs = k.diffs().iter().map(|d| d.kron(&Matrix::identity(field, m))).collect();
    ChainComplex::new_unchecked(field, k.window(), dims, diffs).expect("shapes scale together")
}

/// All surjections `[l] ↠ [c]` in lexicographic order.
pub fn surjections(l: usize, c: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    if c == 0 {
        if l == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let total = c.checked_pow(l as u32).expect("surjection count fits");
    for mut code in 0..total {
        let mut f = vec![0u8; l];
        for slot in (0..l).rev() {
            f[slot] = (code % c) as u8;
            code /= c;
        }
        let mut hit = vec![false; c];
        f.iter().for_each(|&v| hit[v as usize] = true);
        if hit.iter().all(|&h| h) {
            out.push(f);
        }
    }
    out
}

/// The bar complex of one word: degree `k` has a basis of `k`-tuples of
/// surjections (outermost layer first), `d_k = Σ_i (-1)^i δ_i` where `δ_i`
/// deletes layer `i`.
#[derive(Debug, Clone)]
pub struct BarComplex {
    pub surjections: Vec<Vec<u8>>,
    pub complex: ChainComplex,
}

impl BarComplex {
    pub fn new(field: Field, letters: usize, copies: usize, cutoff: usize) -> BarComplex {
        let surj = surjections(letters, copies);
        let s = surj.len();
        let dims: Vec<usize> = (0..=cutoff).map(|k| s.pow(k as u32)).collect();
        let diffs = (1..=cutoff)
            .map(|k| {
                let mut m = Matrix::zeros(field, dims[k - 1], dims[k]);
                for t in 0..dims[k] {
                    for i in 0..k {
                        let row = delete_digit(t, s, k, i);
                        let cur = m.get_i64(row, t).unwrap_or(0);
                        m.set_i64(row, t, cur + if i % 2 == 0 { 1 } else { -1 });
                    }
                }
                m
            })
            .collect();
        let window = if s == 0 { TruncationWindow::bounded(cutoff) } else { TruncationWindow::truncated(cutoff) };
        BarComplex { surjections: surj, complex: ChainComplex::new(field, window, dims, diffs).expect("bar complex squares to zero") }
    }

    pub fn width(&self) -> usize {
        self.surjections.len()
    }

    /// `h(t) = (σ_0, t)`, prepending the first surjection: `dh + hd = 1`.
    pub fn extra_degeneracy(&self) -> Vec<Matrix> {
        let field = self.complex.field();
        let s = self.width();
        let n = self.complex.cutoff();
        (0..n)
            .map(|k| {
                let mut m = Matrix::zeros(field, self.complex.dim(k + 1), self.complex.dim(k));
                if s > 0 {
                    for t in 0..self.complex.dim(k) {
                        m.set_i64(t, t, 1);
                    }
                }
                m
            })
            .collect()
    }

    /// Post-compose every layer with `[c] -> [c-1]` merging copies 0 and 1.
    pub fn merge_map(&self, target: &BarComplex) -> Vec<Matrix> {
        let field = self.complex.field();
        let index: BTreeMap<&Vec<u8>, usize> = target.surjections.iter().enumerate().map(|(i, f)| (f, i)).collect();
        let image: Vec<usize> = self
            .surjections
            .iter()
            .map(|f| {
                let merged: Vec<u8> = f.iter().map(|&v| v.saturating_sub(1)).collect();
                index[&merged]
            })
            .collect();
        let (s, t) = (self.width(), target.width());
        let n = self.complex.cutoff().min(target.complex.cutoff());
        (0..=n)
            .map(|k| {
                let mut m = Matrix::zeros(field, target.complex.dim(k), self.complex.dim(k));
                for src in 0..self.complex.dim(k) {
                    let mut rest = src;
                    let mut dst = 0;
                    let mut scale = 1;
                    for _ in 0..k {
                        dst += image[rest % s] * scale;
                        rest /= s;
                        scale *= t;
                    }
                    m.set_i64(dst, src, 1);
                }
                m
            })
            .collect()
    }
}

/// Index of the tuple `t` (base `s`, `k` digits, most significant first) with
/// digit `i` removed.
fn delete_digit(t: usize, s: usize, k: usize, i: usize) -> usize {
    let place = s.pow((k - 1 - i) as u32);
    let high = t / (place * s);
    let low = t % place;
    high * place + low
}

/// `Tot(B ⊗ K)` as a sign-normalized bicomplex with rows the bar degree.
fn resolved_bicomplex(bar: &ChainComplex, k: &ChainComplex) -> Result<Bicomplex, ChainFunctorError> {
    let field = k.field();
    let window = bar.window().meet(&k.window());
    let b = Bicomplex::from_fn(
        field,
        window,
        Convention::Commuting,
        |p, q| bar.dim(p) * k.dim(q),
        |p, q| Matrix::identity(field, bar.dim(p)).kron(k.d(q)),
        |p, q| bar.d(p).kron(&Matrix::identity(field, k.dim(q))),
    )?;
    Ok(normalize_signs(&b)?)
}

/// `B ⊗ K` totalized, together with its bicomplex.
fn resolve_block(k: &ChainComplex, bar: &BarComplex) -> Result<(ChainComplex, Bicomplex), ChainFunctorError> {
    let b = resolved_bicomplex(&bar.complex, k)?;
    Ok((tot(&b)?, b))
}

impl ChainFunctor {
    pub fn zero(field: Field, arity: usize, window: TruncationWindow) -> ChainFunctor {
        ChainFunctor { field, arity, window, blocks: BTreeMap::new() }
    }

    /// The degree-0 embedding of an expression.
    pub fn from_expr(expr: &FunctorExpr, field: Field, cutoff: usize) -> Result<ChainFunctor, ChainFunctorError> {
        expr.check_field(field)?;
        let window = TruncationWindow::bounded(cutoff);
        let mut out = ChainFunctor::zero(field, expr.arity(), window);
        for (w, m) in expand(expr.body())? {
            out.add_block(w, ChainComplex::concentrated(field, window, 0, m));
        }
        Ok(out)
    }

    /// Assemble from explicit blocks; the window becomes the meet.
    pub fn from_blocks(field: Field, arity: usize, window: TruncationWindow, blocks: impl IntoIterator<Item = (Word, ChainComplex)>) -> Result<ChainFunctor, ChainFunctorError> {
        let blocks: Vec<(Word, ChainComplex)> = blocks.into_iter().collect();
        let mut window = window;
        for (w, k) in &blocks {
            if k.field() != field {
                return Err(ChainFunctorError::FieldMismatch);
            }
            if let Some(&l) = w.iter().find(|&&l| l as usize >= arity) {
                return Err(ChainFunctorError::SlotOutOfRange(l as usize));
            }
            window = window.meet(&k.window());
        }
        let mut out = ChainFunctor::zero(field, arity, window);
        for (w, k) in blocks {
            out.add_block(w, k);
        }
        Ok(out)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn window(&self) -> TruncationWindow {
        self.window
    }

    pub fn blocks(&self) -> &BTreeMap<Word, ChainComplex> {
        &self.blocks
    }

    pub fn block(&self, w: &[u8]) -> Option<&ChainComplex> {
        self.blocks.get(w)
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Total dimension of all coefficient complexes.
    pub fn size(&self) -> usize {
        self.blocks.values().map(|k| k.dims().iter().sum::<usize>()).sum()
    }

    fn add_block(&mut self, w: Word, k: ChainComplex) {
        let k = fit(&k, self.window);
        if k.is_zero_object() {
            return;
        }
        let merged = match self.blocks.remove(&w) {
            Some(old) => direct_sum_all(self.field, &[&old, &k]).expect("same field"),
            None => k,
        };
        self.blocks.insert(w, merged);
    }

    /// Cut every block to `window` (which must not exceed the current cutoff).
    pub fn with_window(&self, window: TruncationWindow) -> ChainFunctor {
        let window = self.window.meet(&window);
        let mut out = ChainFunctor::zero(self.field, self.arity, window);
        for (w, k) in &self.blocks {
            out.add_block(w.clone(), k.clone());
        }
        out.window = out.blocks.values().fold(window, |acc, k| acc.meet(&k.window()));
        out
    }

    fn check_dims<T>(&self, args: &[T]) -> Result<(), ChainFunctorError> {
        if args.len() != self.arity {
            return Err(ChainFunctorError::ArityMismatch { expected: self.arity, got: args.len() });
        }
        Ok(())
    }

    fn check_slots(&self, slots: &[usize]) -> Result<(), ChainFunctorError> {
        match slots.iter().find(|&&s| s >= self.arity) {
            Some(&s) => Err(ChainFunctorError::SlotOutOfRange(s)),
            None => Ok(()),
        }
    }

    fn word_dim(w: &[u8], dims: &[usize]) -> usize {
        w.iter().map(|&l| dims[l as usize]).product()
    }

    pub fn eval_obj(&self, dims: &[usize]) -> Result<ChainComplex, ChainFunctorError> {
        self.check_dims(dims)?;
        let parts: Vec<ChainComplex> = self.blocks.iter().map(|(w, k)| inflate(k, Self::word_dim(w, dims))).collect();
        if parts.is_empty() {
            return Ok(ChainComplex::zero(self.field, self.window));
        }
        let refs: Vec<&ChainComplex> = parts.iter().collect();
        Ok(direct_sum_all(self.field, &refs)?.with_window(self.window))
    }

    /// `maps[i]` is `target_i x source_i`.
    pub fn eval_mor(&self, maps: &[Matrix]) -> Result<ChainMap, ChainFunctorError> {
        self.check_dims(maps)?;
        if maps.iter().any(|m| m.field() != self.field) {
            return Err(ChainFunctorError::FieldMismatch);
        }
        let src_dims: Vec<usize> = maps.iter().map(Matrix::cols).collect();
        let tgt_dims: Vec<usize> = maps.iter().map(Matrix::rows).collect();
        let source = self.eval_obj(&src_dims)?;
        let target = self.eval_obj(&tgt_dims)?;
        let word_maps: Vec<Matrix> = self
            .blocks
            .keys()
            .map(|w| w.iter().fold(Matrix::identity(self.field, 1), |acc, &l| acc.kron(&maps[l as usize])))
            .collect();
        let components = (0..=self.window.cutoff)
            .map(|deg| {
                let parts: Vec<Matrix> = self
                    .blocks
                    .values()
                    .zip(&word_maps)
                    .map(|(k, g)| Matrix::identity(self.field, k.dim(deg)).kron(g))
                    .collect();
                let refs: Vec<&Matrix> = parts.iter().collect();
                Matrix::block_diag(self.field, &refs)
            })
            .collect();
        Ok(ChainMap::new(source, target, components)?)
    }

    /// Homology dimensions at an object tuple, computed per block.
    pub fn homology(&self, dims: &[usize]) -> Result<Vec<usize>, ChainFunctorError> {
        self.check_dims(dims)?;
        let t = self.window.trusted_upper.ok_or(ChainError::WindowTooSmall)?;
        let mut out = vec![0; t + 1];
        for (w, k) in &self.blocks {
            let m = Self::word_dim(w, dims);
            if m == 0 {
                continue;
            }
            for (deg, h) in k.with_window(self.window).homology_dims()?.into_iter().enumerate() {
                out[deg] += h * m;
            }
        }
        Ok(out)
    }

    pub fn direct_sum(&self, other: &ChainFunctor) -> Result<ChainFunctor, ChainFunctorError> {
        if self.field != other.field {
            return Err(ChainFunctorError::FieldMismatch);
        }
        if self.arity != other.arity {
            return Err(ChainFunctorError::ArityMismatch { expected: self.arity, got: other.arity });
        }
        let window = self.window.meet(&other.window);
        let mut out = ChainFunctor::zero(self.field, self.arity, window);
        for (w, k) in self.blocks.iter().chain(&other.blocks) {
            out.add_block(w.clone(), k.clone());
        }
        Ok(out)
    }

    pub fn direct_sum_all(parts: &[ChainFunctor]) -> Result<ChainFunctor, ChainFunctorError> {
        let (first, rest) = parts.split_first().ok_or(ChainFunctorError::ArityMismatch { expected: 1, got: 0 })?;
        rest.iter().try_fold(first.clone(), |acc, p| acc.direct_sum(p))
    }

    /// Kleisli composite `self ∘ (args..)`, using `N(A ⊗ B) ≃ NA ⊗ NB` to
    /// replace the prolongation of a tensor word by the Koszul tensor product.
    pub fn substitute(&self, args: &[ChainFunctor]) -> Result<ChainFunctor, ChainFunctorError> {
        self.check_dims(args)?;
        let arity = match args.first() {
            Some(a) => a.arity,
            None => return Err(ChainFunctorError::ArityMismatch { expected: self.arity, got: 0 }),
        };
        if args.iter().any(|a| a.arity != arity) {
            return Err(ChainFunctorError::ArityMismatch { expected: arity, got: args.iter().map(|a| a.arity).max().unwrap_or(0) });
        }
        if args.iter().any(|a| a.field != self.field) {
            return Err(ChainFunctorError::FieldMismatch);
        }
        let window = args.iter().fold(self.window, |acc, a| acc.meet(&a.window));
        let mut out = ChainFunctor::zero(self.field, arity, window);
        for (w, k) in &self.blocks {
            let mut acc: Vec<(Word, ChainComplex)> = vec![(Vec::new(), fit(k, window))];
            for &letter in w {
                let g = &args[letter as usize];
                let mut next = Vec::with_capacity(acc.len() * g.blocks.len());
                for (u, c) in &acc {
                    for (v, l) in &g.blocks {
                        let word: Word = u.iter().chain(v).copied().collect();
                        next.push((word, tensor_product(c, &fit(l, window))));
                    }
                }
                acc = next;
            }
            for (u, c) in acc {
                out.add_block(u, c);
            }
        }
        out.window = out.blocks.values().fold(window, |acc, k| acc.meet(&k.window()));
        Ok(out)
    }

    /// Precompose with `⟨π_{map[0]}, .., π_{map[m-1]}⟩ : B^new_arity -> B^m`.
    pub fn reindex(&self, map: &[usize], new_arity: usize) -> Result<ChainFunctor, ChainFunctorError> {
        self.check_dims(map)?;
        if let Some(&bad) = map.iter().find(|&&c| c >= new_arity) {
            return Err(ChainFunctorError::SlotOutOfRange(bad));
        }
        let mut out = ChainFunctor::zero(self.field, new_arity, self.window);
        for (w, k) in &self.blocks {
            out.add_block(w.iter().map(|&l| map[l as usize] as u8).collect(), k.clone());
        }
        Ok(out)
    }

    fn letters_in(w: &[u8], slots: &[usize]) -> usize {
        w.iter().filter(|&&l| slots.contains(&(l as usize))).count()
    }

    /// `cr_1` with respect to the slots: drop the words constant in them.
    pub fn reduce(&self, slots: &[usize]) -> Result<ChainFunctor, ChainFunctorError> {
        self.check_slots(slots)?;
        let mut out = ChainFunctor::zero(self.field, self.arity, self.window);
        for (w, k) in &self.blocks {
            if Self::letters_in(w, slots) > 0 {
                out.add_block(w.clone(), k.clone());
            }
        }
        Ok(out)
    }

    /// `F(0)` in the slots: keep only the words constant in them.
    pub fn at_zero(&self, slots: &[usize]) -> Result<ChainFunctor, ChainFunctorError> {
        self.check_slots(slots)?;
        let mut out = ChainFunctor::zero(self.field, self.arity, self.window);
        for (w, k) in &self.blocks {
            if Self::letters_in(w, slots) == 0 {
                out.add_block(w.clone(), k.clone());
            }
        }
        Ok(out)
    }

    /// `cr_n` in one slot: the slot is replaced by `n` consecutive slots and
    /// only words using every copy survive. Later slots shift up by `n - 1`.
    pub fn cross_effect(&self, slot: usize, n: usize) -> Result<ChainFunctor, ChainFunctorError> {
        self.check_slots(&[slot])?;
        if n == 0 {
            return Err(ChainFunctorError::ArityMismatch { expected: 1, got: 0 });
        }
        let shift = |l: u8| -> u8 { if (l as usize) > slot { l + (n as u8 - 1) } else { l } };
        let mut out = ChainFunctor::zero(self.field, self.arity + n - 1, self.window);
        for (w, k) in &self.blocks {
            let positions: Vec<usize> = (0..w.len()).filter(|&i| w[i] as usize == slot).collect();
            for label in surjections(positions.len(), n) {
                let mut word: Word = w.iter().map(|&l| shift(l)).collect();
                for (pos, &c) in positions.iter().zip(&label) {
                    word[*pos] = (slot + c as usize) as u8;
                }
                out.add_block(word, k.clone());
            }
        }
        Ok(out)
    }

    /// `C_n` in one slot: `cr_n cr_1` restricted to the diagonal.
    pub fn comonad(&self, slot: usize, n: usize) -> Result<ChainFunctor, ChainFunctorError> {
        let cr = self.reduce(&[slot])?.cross_effect(slot, n)?;
        let map: Vec<usize> = (0..cr.arity)
            .map(|l| if l < slot { l } else if l < slot + n { slot } else { l - (n - 1) })
            .collect();
        cr.reindex(&map, self.arity)
    }

    /// The bar resolution by `C_copies` in `slots`, truncated at `cutoff`.
    pub fn resolve(&self, slots: &[usize], copies: usize, cutoff: usize, mode: ResolutionMode) -> Result<ChainFunctor, ChainFunctorError> {
        self.check_slots(slots)?;
        if cutoff > self.window.cutoff {
            return Err(ChainFunctorError::WindowExhausted(format!("cutoff {cutoff} exceeds input window {}", self.window.cutoff)));
        }
        let window = self.window.with_cutoff(cutoff).meet(&TruncationWindow::truncated(cutoff));
        let mut out = ChainFunctor::zero(self.field, self.arity, window);
        for (w, k) in &self.blocks {
            let k = k.truncate(cutoff);
            let l = Self::letters_in(w, slots);
            let width = surjections(l, copies).len();
            if width == 0 {
                out.add_block(w.clone(), k);
                continue;
            }
            let literal = match mode {
                ResolutionMode::Literal => true,
                ResolutionMode::Contracted => false,
                ResolutionMode::Auto { budget } => block_size(&k, width) <= budget,
            };
            if literal {
                let bar = BarComplex::new(self.field, l, copies, cutoff);
                out.add_block(w.clone(), resolve_block(&k, &bar)?.0);
            }
        }
        Ok(out)
    }

    /// `D_1` in `slots`: the `C_2` resolution of `cr_1`.
    pub fn linearize(&self, slots: &[usize], cutoff: usize, mode: ResolutionMode) -> Result<ChainFunctor, ChainFunctorError> {
        self.reduce(slots)?.resolve(slots, 2, cutoff, mode)
    }

    /// Replace every coefficient complex by its homology with zero differential.
    pub fn minimize(&self) -> ChainFunctor {
        let mut out = ChainFunctor::zero(self.field, self.arity, self.window);
        for (w, k) in &self.blocks {
            let h = k.raw_homology();
            out.add_block(w.clone(), ChainComplex::with_zero_differentials(self.field, k.window(), h));
        }
        out
    }
}

/// Basis size of `Tot(B ⊗ K)` for a bar complex of the given width.
fn block_size(k: &ChainComplex, width: usize) -> usize {
    let n = k.cutoff();
    (0..=n).map(|p| width.saturating_pow(p as u32).saturating_mul((0..=n - p).map(|q| k.dim(q)).sum())).fold(0, usize::saturating_add)
}

/// Bring a block to `window`: cut or zero-pad to its cutoff, meet the trusted bound.
fn fit(k: &ChainComplex, window: TruncationWindow) -> ChainComplex {
    let c = if k.cutoff() > window.cutoff {
        k.truncate(window.cutoff)
    } else if k.cutoff() < window.cutoff {
        pad(k, window.cutoff)
    } else {
        k.clone()
    };
    let w = c.window().meet(&window);
    c.with_window(w)
}

/// Extend by zero degrees up to `cutoff`; `c` must be bounded for the result
/// to keep its trusted range.
fn pad(c: &ChainComplex, cutoff: usize) -> ChainComplex {
    let field = c.field();
    let mut dims = c.dims().to_vec();
    let mut diffs = c.diffs().to_vec();
    while dims.len() <= cutoff {
        diffs.push(Matrix::zeros(field, *dims.last().unwrap(), 0));
        dims.push(0);
    }
    let bounded = c.window().trusted_upper == Some(c.cutoff());
    let window = if bounded { TruncationWindow::bounded(cutoff) } else { TruncationWindow { cutoff, trusted_upper: c.window().trusted_upper } };
    ChainComplex::new_unchecked(field, window, dims, diffs).expect("zero padding")
}

/// A natural map between chain functors in normal form: one chain map of
/// coefficient complexes per word (identity on the tensor factors).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainNat {
    pub source: ChainFunctor,
    pub target: ChainFunctor,
    pub blocks: BTreeMap<Word, Vec<Matrix>>,
}

impl ChainNat {
    /// The component at `w`, zero where absent.
    pub fn component(&self, w: &[u8], deg: usize) -> Matrix {
        let field = self.source.field;
        let rows = self.target.block(w).map_or(0, |k| k.dim(deg));
        let cols = self.source.block(w).map_or(0, |k| k.dim(deg));
        match self.blocks.get(w) {
            Some(maps) if deg < maps.len() => maps[deg].clone(),
            _ => Matrix::zeros(field, rows, cols),
        }
    }

    /// Every block is a chain map of coefficient complexes.
    pub fn check(&self) -> Verdict {
        let n = self.source.window.cutoff.min(self.target.window.cutoff);
        let words: Vec<&Word> = self.source.blocks.keys().chain(self.target.blocks.keys()).collect();
        Verdict::all(words.into_iter().map(|w| {
            let src = self.source.block(w);
            let tgt = self.target.block(w);
            for deg in 1..=n {
                let ds = src.map_or_else(|| Matrix::zeros(self.source.field, 0, 0), |k| k.d_or_zero(deg));
                let dt = tgt.map_or_else(|| Matrix::zeros(self.source.field, 0, 0), |k| k.d_or_zero(deg));
                let (a, b) = (self.component(w, deg - 1), self.component(w, deg));
                if ds.rows() == a.cols() && dt.cols() == b.rows() && a.mul(&ds) != dt.mul(&b) {
                    return Verdict::Fail(format!("word {w:?} degree {deg}"));
                }
            }
            Verdict::Pass
        }))
    }

    /// The chain map at an object tuple.
    pub fn at(&self, dims: &[usize]) -> Result<ChainMap, ChainFunctorError> {
        let field = self.source.field;
        let source = self.source.eval_obj(dims)?;
        let target = self.target.eval_obj(dims)?;
        let n = source.cutoff().min(target.cutoff());
        let components = (0..=n)
            .map(|deg| {
                let rows: Vec<usize> = self.target.blocks.iter().map(|(w, k)| k.dim(deg) * ChainFunctor::word_dim(w, dims)).collect();
                let cols: Vec<usize> = self.source.blocks.iter().map(|(w, k)| k.dim(deg) * ChainFunctor::word_dim(w, dims)).collect();
                let tw: Vec<&Word> = self.target.blocks.keys().collect();
                let sw: Vec<&Word> = self.source.blocks.keys().collect();
                Matrix::from_blocks(field, &rows, &cols, |i, j| {
                    (tw[i] == sw[j] && self.blocks.contains_key(sw[j])).then(|| {
                        let m = ChainFunctor::word_dim(sw[j], dims);
                        self.component(sw[j], deg).kron(&Matrix::identity(field, m))
                    })
                })
            })
            .collect();
        Ok(ChainMap::new(source.truncate(n), target.truncate(n), components)?)
    }
}

/// `p_n`, `P_n` and `q_n` in normal form.
#[derive(Debug, Clone)]
pub struct Resolution {
    pub value: ChainFunctor,
    /// Per word: the bicomplex before totalization (literal blocks only).
    pub bicomplexes: BTreeMap<Word, Bicomplex>,
}

/// Resolve and keep the bicomplexes, for maps between resolutions.
pub fn resolve_detailed(f: &ChainFunctor, slots: &[usize], copies: usize, cutoff: usize) -> Result<Resolution, ChainFunctorError> {
    f.check_slots(slots)?;
    let window = f.window.with_cutoff(cutoff).meet(&TruncationWindow::truncated(cutoff));
    let mut value = ChainFunctor::zero(f.field, f.arity, window);
    let mut bicomplexes = BTreeMap::new();
    for (w, k) in &f.blocks {
        let k = k.truncate(cutoff);
        let bar = BarComplex::new(f.field, ChainFunctor::letters_in(w, slots), copies, cutoff);
        let (t, b) = resolve_block(&k, &bar)?;
        value.add_block(w.clone(), t);
        bicomplexes.insert(w.clone(), b);
    }
    Ok(Resolution { value, bicomplexes })
}

/// `q : P_{c-1} F -> P_{c-2} F` induced by merging copies, both literal.
pub fn merge_resolutions(f: &ChainFunctor, slots: &[usize], copies: usize, cutoff: usize) -> Result<ChainNat, ChainFunctorError> {
    if copies < 2 {
        return Err(ChainFunctorError::ArityMismatch { expected: 2, got: copies });
    }
    let src = resolve_detailed(f, slots, copies, cutoff)?;
    let tgt = resolve_detailed(f, slots, copies - 1, cutoff)?;
    let mut blocks = BTreeMap::new();
    for (w, k) in &f.blocks {
        let l = ChainFunctor::letters_in(w, slots);
        let from = BarComplex::new(f.field, l, copies, cutoff);
        let to = BarComplex::new(f.field, l, copies - 1, cutoff);
        let merge = from.merge_map(&to);
        let (sb, tb) = (&src.bicomplexes[w], &tgt.bicomplexes[w]);
        let components = (0..=cutoff)
            .map(|p| (0..=cutoff - p).map(|q| merge[p].kron(&Matrix::identity(f.field, k.dim(q)))).collect())
            .collect();
        let m = BicomplexMorphism { source: sb.clone(), target: tb.clone(), components };
        if src.value.block(w).is_some() && tgt.value.block(w).is_some() {
            blocks.insert(w.clone(), m.tot().components);
        }
    }
    Ok(ChainNat { source: src.value, target: tgt.value, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{check_chain_map, check_contraction};
    use crate::functor::{ComonadTower, Reduced, SharedFunctor, Unary};
    use std::rc::Rc;

    const F2: Field = Field::F2;

    fn sq() -> FunctorExpr {
        FunctorExpr::tensor_power(2)
    }

    #[test]
    fn normal_form_of_expressions() {
        let f = ChainFunctor::from_expr(&FunctorExpr::shifted_identity(2), F2, 3).unwrap();
        assert_eq!(f.blocks().len(), 2);
        assert_eq!(f.block(&[]).unwrap().dims(), &[2, 0, 0, 0]);
        let diag = FunctorExpr::infer(Term::compose(Term::tensor(Term::var(0), Term::var(1)), vec![Term::var(0), Term::var(0)])).unwrap();
        assert_eq!(ChainFunctor::from_expr(&diag, F2, 2).unwrap(), ChainFunctor::from_expr(&sq(), F2, 2).unwrap());
        for d in 0..3 {
            let c = ChainFunctor::from_expr(&sq(), F2, 2).unwrap().eval_obj(&[d]).unwrap();
            assert_eq!(c.dim(0), d * d);
        }
    }

    #[cfg(feature = "quotient-atoms")]
    #[test]
    fn quotient_atoms_rejected() {
        let e = FunctorExpr::new(1, Term::ext2(Term::var(0))).unwrap();
        assert!(matches!(ChainFunctor::from_expr(&e, F2, 2), Err(ChainFunctorError::NotPolynomial(_))));
    }

    #[test]
    fn evaluation_is_functorial() {
        let field = Field::Rational;
        let f = ChainFunctor::from_expr(&FunctorExpr::tensor_power(3).sum(&FunctorExpr::shifted_identity(1)).unwrap(), field, 2).unwrap();
        let a = Matrix::from_rows(field, &[vec![1, 2], vec![0, 1], vec![3, 1]]);
        let b = Matrix::from_rows(field, &[vec![1, 0, 2], vec![1, 1, 1]]);
        let fab = f.eval_mor(&[a.mul(&b)]).unwrap();
        let fa_fb = f.eval_mor(std::slice::from_ref(&a)).unwrap().compose(&f.eval_mor(&[b]).unwrap());
        assert_eq!(fab.components, fa_fb.components);
        assert!(f.eval_mor(&[Matrix::identity(field, 2)]).unwrap().components.iter().all(Matrix::is_identity));
    }

    #[test]
    fn cross_effects_match_concrete() {
        let e = FunctorExpr::tensor_power(3).sum(&FunctorExpr::shifted_identity(1)).unwrap();
        let f = ChainFunctor::from_expr(&e, F2, 1).unwrap();
        let concrete = Unary::new(&e, F2).unwrap();
        for args in [vec![1, 1], vec![1, 2], vec![2, 1, 1]] {
            let cr = f.cross_effect(0, args.len()).unwrap();
            let h = cr.homology(&args).unwrap();
            assert_eq!(h[0], crate::functor::cross_effect(&concrete, &args).unwrap().dim(), "{args:?}");
        }
    }

    #[test]
    fn bar_complex_contracts() {
        for (l, c) in [(2, 2), (3, 2), (3, 3), (1, 1)] {
            let bar = BarComplex::new(F2, l, c, 4);
            assert!(check_contraction(&bar.complex, &bar.extra_degeneracy()).is_pass(), "l={l} c={c}");
        }
        let empty = BarComplex::new(F2, 1, 2, 4);
        assert_eq!(empty.complex.dims(), &[1, 0, 0, 0, 0]);
        assert_eq!(empty.complex.homology_dims().unwrap(), vec![1, 0, 0, 0, 0]);
    }

    #[test]
    fn literal_resolution_matches_concrete_tower() {
        let n = 4;
        let f = ChainFunctor::from_expr(&sq(), F2, n).unwrap();
        let lit = f.linearize(&[0], n, ResolutionMode::Literal).unwrap();
        let base: SharedFunctor = Rc::new(Unary::new(&sq(), F2).unwrap());
        let tower = ComonadTower::new(Reduced::shared(base), 2, n);
        for d in 1..=2 {
            let symbolic = lit.eval_obj(&[d]).unwrap();
            let concrete = tower.resolution(d).unwrap();
            assert_eq!(symbolic.dims(), concrete.dims());
            assert_eq!(symbolic.homology_dims().unwrap(), concrete.homology_dims().unwrap());
            assert_eq!(symbolic.dims(), (0..=n).map(|k| (1 << k) * d * d).collect::<Vec<_>>());
        }
        let con = f.linearize(&[0], n, ResolutionMode::Contracted).unwrap();
        assert!(con.is_zero());
        assert_eq!(lit.homology(&[2]).unwrap(), vec![0; n]);
    }

    #[test]
    fn substitution_is_kunneth() {
        let f = ChainFunctor::from_expr(&sq(), F2, 3).unwrap();
        // G has homology k in degree 1 for each letter.
        let k = ChainComplex::new(F2, TruncationWindow::bounded(3), vec![1, 2, 1, 0], vec![Matrix::from_rows(F2, &[vec![1, 0]]), Matrix::zeros(F2, 2, 1), Matrix::zeros(F2, 1, 0)]).unwrap();
        let g = ChainFunctor::from_blocks(F2, 1, TruncationWindow::bounded(3), [(vec![0u8], k)]).unwrap();
        let fg = f.substitute(std::slice::from_ref(&g)).unwrap();
        assert_eq!(fg.blocks().len(), 1);
        // H(K ⊗ K) = k in degree 2 plus two classes in degree 3 (H_1 ⊗ H_2, H_2 ⊗ H_1).
        assert_eq!(fg.minimize().block(&[0, 0]).unwrap().dims()[..3], [0, 0, 1]);
    }

    #[test]
    fn comonad_matches_concrete() {
        let f = ChainFunctor::from_expr(&sq(), F2, 1).unwrap();
        let c2 = f.comonad(0, 2).unwrap();
        assert_eq!(c2.homology(&[2]).unwrap()[0], 8);
    }

    #[test]
    fn merge_map_is_natural_chain_map() {
        let f = ChainFunctor::from_expr(&FunctorExpr::tensor_power(3), F2, 3).unwrap();
        let q = merge_resolutions(&f, &[0], 3, 3).unwrap();
        assert!(q.check().is_pass());
        let at = q.at(&[1]).unwrap();
        assert!(check_chain_map(&at).is_pass());
    }

    #[test]
    fn reindex_and_at_zero() {
        let f = ChainFunctor::from_expr(&FunctorExpr::new(2, Term::sum(Term::Const(1), Term::tensor(Term::var(0), Term::var(1)))).unwrap(), F2, 1).unwrap();
        let diag = f.reindex(&[0, 0], 1).unwrap();
        assert_eq!(diag.homology(&[2]).unwrap()[0], 1 + 4);
        assert_eq!(f.at_zero(&[1]).unwrap().homology(&[3, 3]).unwrap()[0], 1);
    }
}
