//! Freely reduced words in a free group, stored run-length encoded.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};
use crate::symbol::Generator;

/// A freely reduced word `g_1^{e_1} ... g_r^{e_r}` with `e_p != 0` and
/// `g_p != g_{p+1}`. Every constructor maintains this invariant.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    runs: Vec<(Generator, i32)>,
}

/// A single letter `g^{±1}`.
pub type Letter = (Generator, i8);

impl Word {
    pub fn identity() -> Self {
        Word { runs: Vec::new() }
    }

    pub fn gen(g: Generator) -> Self {
        Word { runs: vec![(g, 1)] }
    }

    pub fn power(g: Generator, e: i32) -> Self {
        let mut w = Word::identity();
        w.push(g, e);
        w
    }

    /// Freely reduces an arbitrary sequence of (symbol, exponent) pairs.
    pub fn reduce<I: IntoIterator<Item = (Generator, i32)>>(runs: I) -> Self {
        let mut w = Word::identity();
        for (g, e) in runs {
            w.push(g, e);
        }
        w
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        Word::reduce(letters.into_iter().map(|(g, s)| (g, s as i32)))
    }

    /// Appends `g^e`, cancelling against the last run.
    pub fn push(&mut self, g: Generator, e: i32) {
        if e == 0 {
            return;
        }
        if let Some(last) = self.runs.last_mut() {
            if last.0 == g {
                last.1 += e;
                if last.1 == 0 {
                    self.runs.pop();
                }
                return;
            }
        }
        self.runs.push((g, e));
    }

    pub fn push_word(&mut self, other: &Word) {
        for &(g, e) in &other.runs {
            self.push(g, e);
        }
    }

    pub fn runs(&self) -> &[(Generator, i32)] {
        &self.runs
    }

    pub fn is_identity(&self) -> bool {
        self.runs.is_empty()
    }

    /// Number of letters.
    pub fn len(&self) -> usize {
        self.runs.iter().map(|r| r.1.unsigned_abs() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { runs: self.runs.iter().rev().map(|&(g, e)| (g, -e)).collect() }
    }

    pub fn pow(&self, k: i32) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out.push_word(&base);
        }
        out
    }

    /// `u w u^{-1}`.
    pub fn conjugate(&self, u: &Word) -> Word {
        let mut out = u.clone();
        out.push_word(self);
        out.push_word(&u.inverse());
        out
    }

    /// `[x, y] = x y x^{-1} y^{-1}`.
    pub fn commutator(x: &Word, y: &Word) -> Word {
        let mut out = x.clone();
        out.push_word(y);
        out.push_word(&x.inverse());
        out.push_word(&y.inverse());
        out
    }

    /// Letters in order, each with sign ±1.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.runs.iter().flat_map(|&(g, e)| {
            let s: i8 = if e > 0 { 1 } else { -1 };
            std::iter::repeat_n((g, s), e.unsigned_abs() as usize)
        })
    }

    pub fn symbols(&self) -> BTreeSet<Generator> {
        self.runs.iter().map(|r| r.0).collect()
    }

    pub fn exponent_sum(&self, g: Generator) -> i64 {
        self.runs.iter().filter(|r| r.0 == g).map(|r| r.1 as i64).sum()
    }

    /// Exponent sums over `alphabet`; fails on a symbol outside it.
    pub fn exponent_vector(&self, alphabet: &[Generator]) -> Result<Vec<i64>> {
        let pos: BTreeMap<Generator, usize> =
            alphabet.iter().enumerate().map(|(p, &g)| (g, p)).collect();
        let mut v = vec![0i64; alphabet.len()];
        for &(g, e) in &self.runs {
            let p = *pos.get(&g).ok_or_else(|| Error::UnknownSymbol(g.to_string()))?;
            v[p] += e as i64;
        }
        Ok(v)
    }

    /// Replaces each symbol for which `f` returns a word; other symbols stay.
    pub fn substitute<F: Fn(Generator) -> Option<Word>>(&self, f: F) -> Word {
        let mut out = Word::identity();
        for &(g, e) in &self.runs {
            match f(g) {
                Some(w) => out.push_word(&w.pow(e)),
                None => out.push(g, e),
            }
        }
        out
    }

    /// Fallible variant of [`Word::substitute`] where every symbol must map.
    pub fn try_map<F: FnMut(Generator) -> Result<Word>>(&self, mut f: F) -> Result<Word> {
        let mut out = Word::identity();
        for &(g, e) in &self.runs {
            out.push_word(&f(g)?.pow(e));
        }
        Ok(out)
    }

    /// Splits off symbols selected by `central`, returning the remaining
    /// reduced word and the exponent sum of each removed symbol. Valid as a
    /// normal form whenever the selected symbols are central.
    pub fn central_split<F: Fn(&Generator) -> bool>(
        &self,
        central: F,
    ) -> (Word, BTreeMap<Generator, i64>) {
        let mut rest = Word::identity();
        let mut exps = BTreeMap::new();
        for &(g, e) in &self.runs {
            if central(&g) {
                *exps.entry(g).or_insert(0) += e as i64;
            } else {
                rest.push(g, e);
            }
        }
        exps.retain(|_, v| *v != 0);
        (rest, exps)
    }

    /// Cyclically reduced form `c` with `self = u c u^{-1}`; returns `(c, u)`.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let letters: Vec<Letter> = self.letters().collect();
        let (mut i, mut j) = (0usize, letters.len());
        while j >= i + 2 {
            let (f, l) = (letters[i], letters[j - 1]);
            if f.0 == l.0 && f.1 == -l.1 {
                i += 1;
                j -= 1;
            } else {
                break;
            }
        }
        (
            Word::from_letters(letters[i..j].iter().copied()),
            Word::from_letters(letters[..i].iter().copied()),
        )
    }

    /// Canonical representative of the conjugacy class of `{w, w^{-1}}`:
    /// the lexicographically least letter-level rotation of the cyclic
    /// reduction of `w` or of `w^{-1}`.
    pub fn canonical_cyclic(&self) -> Vec<Letter> {
        let (c, _) = self.cyclic_reduce();
        let a: Vec<Letter> = c.letters().collect();
        let b: Vec<Letter> = c.inverse().letters().collect();
        let ra = least_rotation(&a);
        let rb = least_rotation(&b);
        ra.min(rb)
    }

    /// Human-readable form, `1` for the identity.
    pub fn display(&self) -> String {
        self.to_string()
    }
}

fn letter_key(l: &Letter) -> (Generator, i8) {
    (l.0, -l.1)
}

/// Least rotation of a cyclic sequence (two-pointer minimum expression).
pub fn least_rotation(s: &[Letter]) -> Vec<Letter> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = letter_key(&s[(i + k) % n]);
        let b = letter_key(&s[(j + k) % n]);
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    let start = i.min(j);
    s[start..].iter().chain(s[..start].iter()).copied().collect()
}

impl Mul for &Word {
    type Output = Word;
    fn mul(self, rhs: &Word) -> Word {
        let mut out = self.clone();
        out.push_word(rhs);
        out
    }
}

impl Mul for Word {
    type Output = Word;
    fn mul(mut self, rhs: Word) -> Word {
        self.push_word(&rhs);
        self
    }
}

impl From<Generator> for Word {
    fn from(g: Generator) -> Word {
        Word::gen(g)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.runs.is_empty() {
            return f.write_str("1");
        }
        for (p, (g, e)) in self.runs.iter().enumerate() {
            if p > 0 {
                f.write_str(" ")?;
            }
            if *e == 1 {
                write!(f, "{g}")?;
            } else {
                write!(f, "{g}^{e}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Generator::{A, B, Free};
    use proptest::prelude::*;

    fn raw_word() -> impl Strategy<Value = Vec<(Generator, i32)>> {
        prop::collection::vec(((1u16..4).prop_map(Free), -3i32..=3), 0..24)
    }

    fn letters_of(raw: &[(Generator, i32)]) -> Vec<Letter> {
        raw.iter()
            .flat_map(|&(g, e)| {
                let s: i8 = if e > 0 { 1 } else { -1 };
                std::iter::repeat_n((g, s), e.unsigned_abs() as usize)
            })
            .collect()
    }

    /// Stack-based free reduction at letter level, used as an oracle.
    fn stack_reduce(letters: &[Letter]) -> Vec<Letter> {
        let mut st: Vec<Letter> = Vec::new();
        for &l in letters {
            if let Some(&top) = st.last() {
                if top.0 == l.0 && top.1 == -l.1 {
                    st.pop();
                    continue;
                }
            }
            st.push(l);
        }
        st
    }

    #[test]
    fn reduce_cancels_adjacent_inverses() {
        let w = Word::reduce([(A(1), 1), (A(2), 1), (A(2), -1), (A(1), -1)]);
        assert!(w.is_identity());
        assert_eq!(w.to_string(), "1");
    }

    #[test]
    fn commutator_has_zero_exponents() {
        let x = Word::gen(A(1));
        let y = Word::gen(B);
        let c = Word::commutator(&x, &y);
        assert_eq!(c.exponent_vector(&[A(1), B]).unwrap(), vec![0, 0]);
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn exponent_vector_rejects_foreign_symbol() {
        let w = Word::gen(A(3));
        assert!(w.exponent_vector(&[A(1)]).is_err());
    }

    #[test]
    fn cyclic_reduction_examples() {
        let w = Word::reduce([(A(1), 1), (A(2), 2), (A(1), -1)]);
        let (c, u) = w.cyclic_reduce();
        assert_eq!(c, Word::power(A(2), 2));
        assert_eq!(c.conjugate(&u), w);
        let w = Word::reduce([(A(1), 2), (A(2), 1), (A(1), 1)]);
        let (c, u) = w.cyclic_reduce();
        assert_eq!(c.len(), 4);
        assert_eq!(c.conjugate(&u), w);
    }

    proptest! {
        #[test]
        fn reduce_matches_stack_oracle(raw in raw_word()) {
            let w = Word::reduce(raw.clone());
            let oracle = stack_reduce(&letters_of(&raw));
            prop_assert_eq!(w.letters().collect::<Vec<_>>(), oracle);
        }

        #[test]
        fn reduce_is_idempotent(raw in raw_word()) {
            let w = Word::reduce(raw);
            prop_assert_eq!(Word::reduce(w.runs().to_vec()), w);
        }

        #[test]
        fn inverse_cancels(raw in raw_word()) {
            let w = Word::reduce(raw);
            prop_assert!((&w * &w.inverse()).is_identity());
            prop_assert_eq!(w.inverse().inverse(), w);
        }

        #[test]
        fn exponent_vector_is_additive(a in raw_word(), b in raw_word()) {
            let alpha = [Free(1), Free(2), Free(3)];
            let x = Word::reduce(a);
            let y = Word::reduce(b);
            let sum: Vec<i64> = x.exponent_vector(&alpha).unwrap().iter()
                .zip(y.exponent_vector(&alpha).unwrap())
                .map(|(p, q)| p + q).collect();
            prop_assert_eq!((&x * &y).exponent_vector(&alpha).unwrap(), sum);
        }

        #[test]
        fn cyclic_reduce_conjugates_back(raw in raw_word()) {
            let w = Word::reduce(raw);
            let (c, u) = w.cyclic_reduce();
            prop_assert_eq!(c.conjugate(&u), w);
            let ls: Vec<Letter> = c.letters().collect();
            if ls.len() > 1 {
                let (f, l) = (ls[0], ls[ls.len() - 1]);
                prop_assert!(!(f.0 == l.0 && f.1 == -l.1));
            }
        }

        #[test]
        fn canonical_cyclic_invariant_under_rotation_and_inverse(raw in raw_word(), r in 0usize..30) {
            let w = Word::reduce(raw);
            let letters: Vec<Letter> = w.letters().collect();
            if !letters.is_empty() {
                let k = r % letters.len();
                let rotated = Word::from_letters(letters[k..].iter().chain(letters[..k].iter()).copied());
                prop_assert_eq!(rotated.canonical_cyclic(), w.canonical_cyclic());
                prop_assert_eq!(w.inverse().canonical_cyclic(), w.canonical_cyclic());
            }
        }
    }
}
