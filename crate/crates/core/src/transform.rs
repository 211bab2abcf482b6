//! Generalized Euler transformation of `Σ a_{c,n} b_n`, and the classic
//! alternating-series transformation kept as a cross-check.
//!
//! A transformed series is a finite head plus a lazily generated tail. Tails
//! are only ever summed over whole blocks `n = 1..=c·N`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::diffcore::{coefficient_a, int_pow_neg, power_delta, weight_vector, Modulus, Stencil, WeightVector};
use crate::error::{Error, Result};
use crate::sum::ComplexSum;

/// `Δ b_n` together with an estimate of its absolute rounding error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeltaTerm {
    pub value: Complex64,
    pub round_err: f64,
}

/// Accessor for `b_1, b_2, …`. Implementations must be pure.
pub trait Sequence {
    fn term(&self, n: u64) -> Result<Complex64>;

    /// Largest valid index, if the sequence is finite.
    fn max_index(&self) -> Option<u64> {
        None
    }

    /// `Σ_j w_j b_{n+j}`. The default sums the stencil directly.
    fn delta(&self, stencil: &Stencil, n: u64) -> Result<DeltaTerm> {
        let mut acc = ComplexSum::new();
        let mut mass = 0.0;
        for (j, w) in stencil.iter_f64() {
            if w != 0.0 {
                let t = self.term(n + j)? * w;
                mass += t.norm();
                acc += t;
            }
        }
        Ok(DeltaTerm { value: acc.sum(), round_err: 4.0 * f64::EPSILON * mass })
    }
}

impl<S: Sequence + ?Sized> Sequence for &S {
    fn term(&self, n: u64) -> Result<Complex64> {
        (**self).term(n)
    }

    fn max_index(&self) -> Option<u64> {
        (**self).max_index()
    }

    fn delta(&self, stencil: &Stencil, n: u64) -> Result<DeltaTerm> {
        (**self).delta(stencil, n)
    }
}

/// A sequence backed by a closure, optionally truncated.
pub struct FnSequence<F> {
    f: F,
    max_index: Option<u64>,
}

impl<F> FnSequence<F>
where
    F: Fn(u64) -> Result<Complex64>,
{
    pub fn new(f: F) -> Self {
        FnSequence { f, max_index: None }
    }

    /// Indices above `max_index` are reported as accessor failures.
    pub fn bounded(f: F, max_index: u64) -> Self {
        FnSequence { f, max_index: Some(max_index) }
    }
}

/// Wraps an infallible closure.
pub fn from_fn<G>(g: G) -> FnSequence<impl Fn(u64) -> Result<Complex64>>
where
    G: Fn(u64) -> Complex64,
{
    FnSequence::new(move |n| Ok(g(n)))
}

impl<F> Sequence for FnSequence<F>
where
    F: Fn(u64) -> Result<Complex64>,
{
    fn term(&self, n: u64) -> Result<Complex64> {
        if n == 0 || self.max_index.is_some_and(|m| n > m) {
            return Err(Error::Sequence { index: n, reason: "index outside the sequence domain".into() });
        }
        (self.f)(n)
    }

    fn max_index(&self) -> Option<u64> {
        self.max_index
    }
}

/// `b_n = n^{-s}`.
#[derive(Debug, Clone, Copy)]
pub struct PowerSequence {
    pub s: Complex64,
}

impl Sequence for PowerSequence {
    fn term(&self, n: u64) -> Result<Complex64> {
        Ok(int_pow_neg(n, self.s))
    }

    fn delta(&self, stencil: &Stencil, n: u64) -> Result<DeltaTerm> {
        let pd = power_delta(stencil, n, self.s, false);
        Ok(DeltaTerm { value: pd.value, round_err: pd.value_err })
    }
}

/// `b_n = -n^{-s} log n`, the `s`-derivative of [`PowerSequence`].
#[derive(Debug, Clone, Copy)]
pub struct LogPowerSequence {
    pub s: Complex64,
}

impl Sequence for LogPowerSequence {
    fn term(&self, n: u64) -> Result<Complex64> {
        Ok(-int_pow_neg(n, self.s) * (n as f64).ln())
    }

    fn delta(&self, stencil: &Stencil, n: u64) -> Result<DeltaTerm> {
        let pd = power_delta(stencil, n, self.s, true);
        Ok(DeltaTerm { value: pd.deriv, round_err: pd.deriv_err })
    }
}

/// Which difference operator a transformed series is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    /// `Δ_c`, weights `a_{c,1..=c}` at offsets `1..=c`.
    Generalized(Modulus),
    /// Euler's `Δ b_n = b_n - b_{n+1}` on alternating series.
    Classic,
}

impl Operator {
    /// Block length of the blocked truncation.
    pub fn block_len(self) -> u64 {
        match self {
            Operator::Generalized(c) => c.get() as u64,
            Operator::Classic => 2,
        }
    }

    pub fn modulus(self) -> Modulus {
        match self {
            Operator::Generalized(c) => c,
            Operator::Classic => Modulus::TWO,
        }
    }

    fn stencil(self, k: u32) -> StencilHandle {
        match self {
            Operator::Generalized(c) => StencilHandle::Weights(weight_vector(c, k)),
            Operator::Classic => StencilHandle::Plain(classic_stencil(k)),
        }
    }
}

#[derive(Debug, Clone)]
enum StencilHandle {
    Weights(Arc<WeightVector>),
    Plain(Arc<Stencil>),
}

impl StencilHandle {
    fn get(&self) -> &Stencil {
        match self {
            StencilHandle::Weights(w) => w.stencil(),
            StencilHandle::Plain(s) => s,
        }
    }
}

/// Weights `(-1)^l C(k, l)` at offsets `0..=k`.
fn classic_stencil(k: u32) -> Arc<Stencil> {
    type Cache = RwLock<HashMap<u32, Arc<Stencil>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(st) = cache.read().expect("classic cache poisoned").get(&k) {
        return Arc::clone(st);
    }
    let mut weights = Vec::with_capacity(k as usize + 1);
    let mut binom = BigInt::one();
    for l in 0..=k {
        weights.push(if l % 2 == 0 { binom.clone() } else { -binom.clone() });
        binom = binom * (k - l) / (l + 1);
    }
    let st = Arc::new(Stencil::new(0, weights, k));
    Arc::clone(cache.write().expect("classic cache poisoned").entry(k).or_insert(st))
}

/// Head plus lazily generated tail of a transformed series.
pub struct TransformedSeries<S> {
    operator: Operator,
    k: u32,
    seq: S,
    head: Complex64,
    head_err: f64,
    tail: StencilHandle,
    scale: f64,
}

impl<S: Sequence> TransformedSeries<S> {
    pub fn operator(&self) -> Operator {
        self.operator
    }

    pub fn depth(&self) -> u32 {
        self.k
    }

    pub fn sequence(&self) -> &S {
        &self.seq
    }

    /// The finite double sum in front of the transformed tail.
    pub fn head(&self) -> Complex64 {
        self.head
    }

    pub fn head_round_err(&self) -> f64 {
        self.head_err
    }

    /// Transformed tail term at index `n >= 1`.
    pub fn tail_term(&self, n: u64) -> Result<DeltaTerm> {
        let d = self.seq.delta(self.tail.get(), n)?;
        let factor = match self.operator {
            Operator::Generalized(c) => self.scale * coefficient_a(c, n) as f64,
            Operator::Classic => {
                if n % 2 == 1 {
                    self.scale
                } else {
                    -self.scale
                }
            }
        };
        Ok(DeltaTerm { value: d.value * factor, round_err: d.round_err * factor.abs() })
    }

    /// Tail terms for `n = 1, 2, …`.
    pub fn tail_terms(&self) -> TailTerms<'_, S> {
        TailTerms { series: self, next: 1 }
    }

    /// Head plus the tail summed over `n = 1..=c·blocks`.
    pub fn sum_blocked(&self, blocks: u64) -> Result<BlockedPartialSum> {
        sum_blocked(self, blocks)
    }
}

pub struct TailTerms<'a, S> {
    series: &'a TransformedSeries<S>,
    next: u64,
}

impl<S: Sequence> Iterator for TailTerms<'_, S> {
    type Item = Result<Complex64>;

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.next;
        self.next += 1;
        Some(self.series.tail_term(n).map(|t| t.value))
    }
}

fn check_domain<S: Sequence>(seq: &S, needed: u64) -> Result<()> {
    match seq.max_index() {
        Some(max) if max < needed => Err(Error::Sequence {
            index: needed,
            reason: format!("transformation needs b_1..b_{needed} but the sequence ends at {max}"),
        }),
        _ => Ok(()),
    }
}

/// Generalized transformation at depth `k >= 1`.
pub fn transform<S: Sequence>(c: Modulus, k: u32, seq: S) -> Result<TransformedSeries<S>> {
    if k == 0 {
        return Err(Error::InvalidParameter("transformation depth must be >= 1".into()));
    }
    transform_any_depth(c, k, seq)
}

/// As [`transform`] but also accepts `k = 0`, which is the untransformed
/// series `Σ a_{c,n} b_n` with an empty head.
pub(crate) fn transform_any_depth<S: Sequence>(c: Modulus, k: u32, seq: S) -> Result<TransformedSeries<S>> {
    let cu = c.get() as u64;
    check_domain(&seq, cu * k.max(1) as u64)?;
    let cf = c.as_f64();

    let mut head = ComplexSum::new();
    let mut head_err = 0.0;
    let mut scale = 1.0;
    for j in 0..k {
        scale /= cf;
        let signed = if j % 2 == 0 { scale } else { -scale };
        let handle = Operator::Generalized(c).stencil(j);
        let stencil = handle.get();
        for i in 0..cu - 1 {
            let d = seq.delta(stencil, i + 1)?;
            let w = signed * (cu + i) as f64;
            head += d.value * w;
            head_err += d.round_err * w.abs();
        }
        let d = seq.delta(stencil, cu)?;
        let w = -signed * ((cu - 1) * (cu - 1)) as f64;
        head += d.value * w;
        head_err += d.round_err * w.abs();
    }
    let tail_scale = if k.is_multiple_of(2) { cf.powi(-(k as i32)) } else { -cf.powi(-(k as i32)) };
    Ok(TransformedSeries {
        operator: Operator::Generalized(c),
        k,
        seq,
        head: head.sum(),
        head_err,
        tail: Operator::Generalized(c).stencil(k),
        scale: tail_scale,
    })
}

/// Euler's transformation of `Σ (-1)^{n+1} b_n` at depth `k >= 1`.
pub fn classic_transform<S: Sequence>(k: u32, seq: S) -> Result<TransformedSeries<S>> {
    if k == 0 {
        return Err(Error::InvalidParameter("transformation depth must be >= 1".into()));
    }
    check_domain(&seq, k as u64)?;
    let mut head = ComplexSum::new();
    let mut head_err = 0.0;
    let mut scale = 1.0;
    for j in 0..k {
        scale /= 2.0;
        let d = seq.delta(&classic_stencil(j), 1)?;
        head += d.value * scale;
        head_err += d.round_err * scale;
    }
    Ok(TransformedSeries {
        operator: Operator::Classic,
        k,
        seq,
        head: head.sum(),
        head_err,
        tail: Operator::Classic.stencil(k),
        scale: 0.5f64.powi(k as i32),
    })
}

/// Partial sum of a transformed series truncated after a whole block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockedPartialSum {
    pub c: Modulus,
    pub blocks: u64,
    pub value: Complex64,
    /// Contribution of the final block alone.
    pub last_block_delta: Complex64,
    /// First-order rounding estimate for `value`.
    pub round_err: f64,
    pub terms_used: u64,
}

pub fn sum_blocked<S: Sequence>(ts: &TransformedSeries<S>, blocks: u64) -> Result<BlockedPartialSum> {
    if blocks == 0 {
        return Err(Error::InvalidParameter("block count must be >= 1".into()));
    }
    let len = ts.operator.block_len();
    let mut total = ComplexSum::new();
    total += ts.head;
    let mut round_err = ts.head_err;
    let mut last_block = ComplexSum::new();
    for block in 1..=blocks {
        let mut this_block = ComplexSum::new();
        for n in (block - 1) * len + 1..=block * len {
            let t = ts.tail_term(n)?;
            total += t.value;
            this_block += t.value;
            round_err += t.round_err;
        }
        if block == blocks {
            last_block = this_block;
        }
    }
    Ok(BlockedPartialSum {
        c: ts.operator.modulus(),
        blocks,
        value: total.sum(),
        last_block_delta: last_block.sum(),
        round_err,
        terms_used: blocks * len,
    })
}

/// Both sides of the block telescoping identity
/// `Σ_{n=c+1}^{cN} a_{c,n} Δ_c^k n^{-s} = Σ_{m=2}^{N} Δ_c^{k+1} (cm-c)^{-s}`.
pub fn telescope_check(c: Modulus, k: u32, s: Complex64, blocks: u64) -> Result<(Complex64, Complex64)> {
    if blocks < 2 {
        return Err(Error::InvalidParameter("telescoping needs at least 2 blocks".into()));
    }
    let cu = c.get() as u64;
    let seq = PowerSequence { s };
    let lower = weight_vector(c, k);
    let upper = weight_vector(c, k + 1);

    let mut lhs = ComplexSum::new();
    for n in cu + 1..=cu * blocks {
        lhs += seq.delta(lower.stencil(), n)?.value * coefficient_a(c, n) as f64;
    }
    let mut rhs = ComplexSum::new();
    for m in 2..=blocks {
        rhs += seq.delta(upper.stencil(), cu * (m - 1))?.value;
    }
    Ok((lhs.sum(), rhs.sum()))
}

fn exact_delta<F>(stencil: &Stencil, b: &F, n: u64) -> BigRational
where
    F: Fn(u64) -> BigRational,
{
    let mut acc = BigRational::zero();
    for (j, w) in stencil.iter() {
        if !w.is_zero() {
            acc += b(n + j) * BigRational::from_integer(w.clone());
        }
    }
    acc
}

/// The head of [`transform`] in exact rational arithmetic.
pub fn head_exact<F>(c: Modulus, k: u32, b: F) -> BigRational
where
    F: Fn(u64) -> BigRational,
{
    let cu = c.get() as u64;
    let cb = BigInt::from(cu);
    let mut acc = BigRational::zero();
    let mut denom = BigInt::one();
    for j in 0..k {
        denom *= &cb;
        let wv = weight_vector(c, j);
        let mut inner = BigRational::zero();
        for i in 0..cu - 1 {
            inner += exact_delta(wv.stencil(), &b, i + 1) * BigRational::from_integer(BigInt::from(cu + i));
        }
        inner -= exact_delta(wv.stencil(), &b, cu) * BigRational::from_integer(BigInt::from((cu - 1) * (cu - 1)));
        let term = inner / BigRational::from_integer(denom.clone());
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// The head of [`classic_transform`] in exact rational arithmetic.
pub fn classic_head_exact<F>(k: u32, b: F) -> BigRational
where
    F: Fn(u64) -> BigRational,
{
    let mut acc = BigRational::zero();
    let mut denom = BigInt::one();
    for j in 0..k {
        denom *= 2;
        acc += exact_delta(&classic_stencil(j), &b, 1) / BigRational::from_integer(denom.clone());
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_traits::ToPrimitive;
    use std::f64::consts::{LN_2, PI};

    fn c(c: u32) -> Modulus {
        Modulus::new(c).unwrap()
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn inv_sq(n: u64) -> f64 {
        1.0 / (n * n) as f64
    }

    #[test]
    fn c2_head_and_limit() {
        let ts = transform(c(2), 1, from_fn(|n| re(inv_sq(n)))).unwrap();
        assert_relative_eq!(ts.head().re, 0.875, max_relative = 1e-15);

        // oracle: 10^6 raw alternating terms, error below the next term (1e-12)
        let raw: crate::sum::NeumaierSum =
            (1..=1_000_000u64).map(|n| if n % 2 == 1 { inv_sq(n) } else { -inv_sq(n) }).collect();
        let total = ts.sum_blocked(10_000).unwrap();
        assert!((total.value.re - raw.sum()).abs() < 2e-9);
        assert!((total.value.re - PI * PI / 12.0).abs() < 2e-9);
    }

    #[test]
    fn c3_constant_sequence_has_unit_head_and_zero_tail() {
        let ts = transform(c(3), 1, from_fn(|_| re(1.0))).unwrap();
        assert_relative_eq!(ts.head().re, 1.0, max_relative = 1e-15);
        for t in ts.tail_terms().take(30) {
            assert_eq!(t.unwrap(), Complex64::zero());
        }
        assert_relative_eq!(ts.sum_blocked(10).unwrap().value.re, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn c3_depth_two_head_matches_hand_expansion() {
        let b = inv_sq;
        let d1 = b(2) + b(3) - 2.0 * b(4);
        let d2 = b(3) + b(4) - 2.0 * b(5);
        let d3 = b(4) + b(5) - 2.0 * b(6);
        let oracle = (3.0 * b(1) + 4.0 * b(2) - 4.0 * b(3)) / 3.0 - (3.0 * d1 + 4.0 * d2 - 4.0 * d3) / 9.0;

        let ts = transform(c(3), 2, from_fn(|n| re(inv_sq(n)))).unwrap();
        assert_relative_eq!(ts.head().re, oracle, max_relative = 1e-14);

        let total = ts.sum_blocked(20_000).unwrap();
        assert!((total.value.re - (2.0 / 3.0) * PI * PI / 6.0).abs() < 1e-10);
    }

    #[test]
    fn c3_depth_two_matches_worked_head_coefficients() {
        // (3b_2 + 7b_3 - 6b_4 - 12b_5 + 8b_6) is the j = 1 bracket written out
        let probe = |n: u64| re(((n * 7919) % 101) as f64);
        let ts1 = transform(c(3), 1, from_fn(probe)).unwrap();
        let ts2 = transform(c(3), 2, from_fn(probe)).unwrap();
        let b = |n: u64| probe(n).re;
        let bracket = 3.0 * b(2) + 7.0 * b(3) - 6.0 * b(4) - 12.0 * b(5) + 8.0 * b(6);
        assert_relative_eq!((ts2.head() - ts1.head()).re, -bracket / 9.0, max_relative = 1e-14);
    }

    #[test]
    fn classic_examples() {
        let ts = classic_transform(1, from_fn(|n| re(1.0 / n as f64))).unwrap();
        assert_relative_eq!(ts.head().re, 0.5, max_relative = 1e-15);
        let tail = ts.sum_blocked(200_000).unwrap().value.re - ts.head().re;
        assert!((tail - (LN_2 - 0.5)).abs() < 1e-10);

        let kappa = 3.25;
        let ts = classic_transform(1, from_fn(|_| re(kappa))).unwrap();
        assert_eq!(ts.head().re, kappa / 2.0);
        assert!(ts.tail_terms().take(20).all(|t| t.unwrap() == Complex64::zero()));

        let ts = classic_transform(3, from_fn(|n| re(n as f64))).unwrap();
        assert_relative_eq!(ts.head().re, 0.25, max_relative = 1e-15);
        assert!(ts.tail_terms().take(20).all(|t| t.unwrap() == Complex64::zero()));
    }

    #[test]
    fn classic_operator_differs_from_delta_two() {
        let st = classic_stencil(1);
        let w: Vec<(u64, i64)> = st.iter().map(|(j, w)| (j, w.to_i64().unwrap())).collect();
        assert_eq!(w, vec![(0, 1), (1, -1)]);
        let g: Vec<(u64, i64)> =
            weight_vector(c(2), 1).stencil().iter().map(|(j, w)| (j, w.to_i64().unwrap())).collect();
        assert_eq!(g, vec![(1, 1), (2, -1)]);
    }

    #[test]
    fn single_block_matches_five_term_arithmetic() {
        let ts = transform(c(2), 1, from_fn(|n| re(inv_sq(n)))).unwrap();
        let b = inv_sq;
        let oracle = 0.875 - 0.5 * (b(2) - b(3)) + 0.5 * (b(3) - b(4));
        let one = ts.sum_blocked(1).unwrap();
        assert_relative_eq!(one.value.re, oracle, max_relative = 1e-15);
        assert_eq!(one.terms_used, 2);
        assert_relative_eq!(one.last_block_delta.re, oracle - 0.875, max_relative = 1e-14);
    }

    #[test]
    fn zero_tail_sums_to_head() {
        let ts = transform(c(4), 2, from_fn(|n| re(2.0 * n as f64 - 7.0))).unwrap();
        let total = ts.sum_blocked(10).unwrap();
        assert_eq!(total.value, ts.head());
        assert_eq!(total.last_block_delta, Complex64::zero());
    }

    #[test]
    fn blocked_sum_rejects_zero_blocks() {
        let ts = transform(c(2), 1, from_fn(|_| re(1.0))).unwrap();
        assert!(matches!(ts.sum_blocked(0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn short_sequence_is_a_hard_error() {
        let seq = FnSequence::bounded(|n| Ok(re(n as f64)), 5);
        assert!(matches!(transform(c(3), 2, seq), Err(Error::Sequence { index: 6, .. })));
        let seq = FnSequence::bounded(|n| Ok(re(n as f64)), 6);
        let ts = transform(c(3), 2, seq).unwrap();
        // the tail walks off the end of the data: never silently truncated
        assert!(matches!(ts.sum_blocked(1), Err(Error::Sequence { .. })));
    }

    #[test]
    fn accessor_failure_propagates() {
        let seq = FnSequence::new(|n| if n == 4 { Err(Error::Domain("b_4 unavailable".into())) } else { Ok(re(1.0)) });
        assert_eq!(transform(c(3), 2, seq).err(), Some(Error::Domain("b_4 unavailable".into())));
    }

    #[test]
    fn zero_depth_is_rejected() {
        assert!(transform(c(2), 0, from_fn(|_| re(1.0))).is_err());
        assert!(classic_transform(0, from_fn(|_| re(1.0))).is_err());
    }

    #[test]
    fn telescope_examples() {
        let (a, b) = telescope_check(c(2), 1, re(2.0), 3).unwrap();
        assert!((a - b).norm() <= 1e-12 * a.norm());
        let (a, b) = telescope_check(c(3), 0, re(1.0), 2).unwrap();
        assert!((a - b).norm() <= 1e-15 * a.norm());
        let (a, b) = telescope_check(c(2), 2, re(-1.0), 4).unwrap();
        assert_eq!(a, Complex64::zero());
        assert_eq!(b, Complex64::zero());
        assert!(telescope_check(c(2), 1, re(2.0), 1).is_err());
    }

    #[test]
    fn exact_head_matches_floating_head() {
        for &(cc, k) in &[(2, 1), (3, 2), (4, 3), (5, 4)] {
            let exact = head_exact(c(cc), k, |n| BigRational::new(1.into(), BigInt::from(n * n)));
            let float = transform(c(cc), k, from_fn(|n| re(inv_sq(n)))).unwrap().head();
            assert_relative_eq!(exact.to_f64().unwrap(), float.re, max_relative = 1e-14);
        }
        let exact = classic_head_exact(3, |n| BigRational::from_integer(BigInt::from(n)));
        assert_eq!(exact, BigRational::new(1.into(), 4.into()));
    }
}
