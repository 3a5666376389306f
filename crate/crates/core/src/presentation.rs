//! Finite presentations, Tietze transformations and abelianization.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::snf::{abelian_invariants, AbelianInvariants};
use crate::symbol::Generator;
use crate::word::Word;

/// One relator with its family tag and, for catalog relators, the case
/// branch and index tuple that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relator {
    pub family: String,
    pub branch: String,
    pub indices: Vec<(char, i64)>,
    pub word: Word,
    /// Set when the relator was added without a certificate.
    pub unverified: bool,
}

impl Relator {
    pub fn new(family: &str, word: Word) -> Self {
        Relator {
            family: family.to_string(),
            branch: String::new(),
            indices: Vec::new(),
            word,
            unverified: false,
        }
    }

    pub fn with_branch(mut self, branch: &str, indices: Vec<(char, i64)>) -> Self {
        self.branch = branch.to_string();
        self.indices = indices;
        self
    }

    /// `family[branch](i=..,k=..)`, used in reports.
    pub fn label(&self) -> String {
        let mut s = self.family.clone();
        if !self.branch.is_empty() {
            s.push_str(&format!("[{}]", self.branch));
        }
        if !self.indices.is_empty() {
            let parts: Vec<String> = self.indices.iter().map(|(v, x)| format!("{v}={x}")).collect();
            s.push_str(&format!("({})", parts.join(",")));
        }
        s
    }
}

/// A finite presentation. `surface` records `(g, n)` for catalog output.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Presentation {
    pub surface: Option<(u32, u32)>,
    pub alphabet: Vec<Generator>,
    pub relators: Vec<Relator>,
}

/// Product `Π u_p r_p^{e_p} u_p^{-1}` of conjugated relators.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Certificate {
    pub factors: Vec<(usize, Word, i32)>,
}

impl Certificate {
    pub fn single(index: usize, conj: Word, exp: i32) -> Self {
        Certificate { factors: vec![(index, conj, exp)] }
    }

    pub fn then(mut self, index: usize, conj: Word, exp: i32) -> Self {
        self.factors.push((index, conj, exp));
        self
    }

    /// Evaluates the certificate against a relator list.
    pub fn evaluate(&self, relators: &[Relator]) -> Result<Word> {
        let mut w = Word::identity();
        for (i, u, e) in &self.factors {
            let r = relators
                .get(*i)
                .ok_or_else(|| Error::BadCertificate(format!("relator index {i} out of range")))?;
            w.push_word(&r.word.pow(*e).conjugate(u));
        }
        Ok(w)
    }
}

impl Presentation {
    pub fn new(alphabet: Vec<Generator>) -> Self {
        Presentation { surface: None, alphabet, relators: Vec::new() }
    }

    pub fn free(alphabet: Vec<Generator>) -> Self {
        Self::new(alphabet)
    }

    /// Adds a relator after freely reducing it and checking its symbols.
    pub fn push(&mut self, r: Relator) -> Result<()> {
        self.check_word(&r.word)?;
        self.relators.push(r);
        Ok(())
    }

    pub fn push_word(&mut self, family: &str, w: Word) -> Result<()> {
        self.push(Relator::new(family, w))
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        let set: BTreeSet<&Generator> = self.alphabet.iter().collect();
        for g in w.symbols() {
            if !set.contains(&g) {
                return Err(Error::UnknownSymbol(g.to_string()));
            }
        }
        Ok(())
    }

    pub fn contains_symbol(&self, g: &Generator) -> bool {
        self.alphabet.contains(g)
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.relators.iter().map(|r| &r.word)
    }

    /// Relators counted per family tag, in tag order.
    pub fn family_counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for r in &self.relators {
            *m.entry(r.family.clone()).or_insert(0) += 1;
        }
        m
    }

    /// Integer relation matrix (rows: relators, columns: alphabet).
    pub fn relation_matrix(&self) -> Result<Vec<Vec<i64>>> {
        self.relators.iter().map(|r| r.word.exponent_vector(&self.alphabet)).collect()
    }

    pub fn abelianization(&self) -> Result<AbelianInvariants> {
        Ok(abelian_invariants(&self.relation_matrix()?, self.alphabet.len()))
    }

    /// Adds `sym` together with the defining relator `sym · def^{-1}`.
    pub fn tietze_add_generator(&self, sym: Generator, def: &Word) -> Result<Presentation> {
        if self.contains_symbol(&sym) {
            return Err(Error::NotRemovable(sym.to_string(), "already in the alphabet".into()));
        }
        self.check_word(def)?;
        let mut out = self.clone();
        out.alphabet.push(sym);
        out.relators.push(Relator::new("tietze", &Word::gen(sym) * &def.inverse()));
        Ok(out)
    }

    /// Finds a relator in which `sym` occurs exactly once and solves it for
    /// `sym`. Returns the relator index and the word equal to `sym`.
    pub fn defining_relator(&self, sym: Generator) -> Option<(usize, Word)> {
        self.relators.iter().enumerate().find_map(|(p, r)| solve_for(&r.word, sym).map(|w| (p, w)))
    }

    /// Removes `sym` using relator `index`, which must contain `sym` exactly
    /// once. Every other relator has `sym` replaced by its solved value.
    pub fn tietze_remove_generator(&self, sym: Generator, index: usize) -> Result<Presentation> {
        let r = self
            .relators
            .get(index)
            .ok_or_else(|| Error::NotRemovable(sym.to_string(), format!("no relator {index}")))?;
        let value = solve_for(&r.word, sym).ok_or_else(|| {
            Error::NotRemovable(sym.to_string(), format!("relator {} does not define it", r.label()))
        })?;
        let mut out = Presentation { surface: self.surface, alphabet: Vec::new(), relators: Vec::new() };
        out.alphabet = self.alphabet.iter().copied().filter(|g| *g != sym).collect();
        for (p, rel) in self.relators.iter().enumerate() {
            if p == index {
                continue;
            }
            let w = rel.word.substitute(|g| (g == sym).then(|| value.clone()));
            out.relators.push(Relator { word: w, ..rel.clone() });
        }
        Ok(out)
    }

    /// Removes `sym` using the first relator that defines it.
    pub fn tietze_eliminate(&self, sym: Generator) -> Result<Presentation> {
        let (p, _) = self
            .defining_relator(sym)
            .ok_or_else(|| Error::NotRemovable(sym.to_string(), "no defining relator".into()))?;
        self.tietze_remove_generator(sym, p)
    }

    /// Appends a consequence. With a certificate, the certificate must
    /// multiply out to `w`; without one the relator is flagged unverified.
    pub fn tietze_add_relator(
        &self,
        family: &str,
        w: &Word,
        cert: Option<&Certificate>,
    ) -> Result<Presentation> {
        self.check_word(w)?;
        let mut rel = Relator::new(family, w.clone());
        match cert {
            Some(c) => {
                let got = c.evaluate(&self.relators)?;
                if &got != w {
                    return Err(Error::BadCertificate(format!("expected {w}, got {got}")));
                }
            }
            None => rel.unverified = true,
        }
        let mut out = self.clone();
        out.relators.push(rel);
        Ok(out)
    }

    /// Removes relator `index`, which `cert` must express through the
    /// remaining relators (indices refer to the list after removal).
    pub fn tietze_remove_relator(&self, index: usize, cert: &Certificate) -> Result<Presentation> {
        if index >= self.relators.len() {
            return Err(Error::BadCertificate(format!("relator index {index} out of range")));
        }
        let mut out = self.clone();
        let removed = out.relators.remove(index);
        let got = cert.evaluate(&out.relators)?;
        if got != removed.word {
            return Err(Error::BadCertificate(format!(
                "relator {} not reproduced: got {got}",
                removed.label()
            )));
        }
        Ok(out)
    }

    /// Renames symbols; `map` must be injective on the alphabet.
    pub fn relabel(&self, map: &BTreeMap<Generator, Generator>) -> Result<Presentation> {
        let f = |g: Generator| *map.get(&g).unwrap_or(&g);
        let image: Vec<Generator> = self.alphabet.iter().map(|&g| f(g)).collect();
        let distinct: BTreeSet<&Generator> = image.iter().collect();
        if distinct.len() != image.len() {
            return Err(Error::AlphabetMismatch("relabelling is not injective".into()));
        }
        let relators = self
            .relators
            .iter()
            .map(|r| Relator { word: r.word.substitute(|g| Some(Word::gen(f(g)))), ..r.clone() })
            .collect();
        Ok(Presentation { surface: self.surface, alphabet: image, relators })
    }

    /// Seeded random presentation on `Free(1..=rank)`.
    pub fn random(seed: u64, rank: u16, relators: usize, max_len: usize) -> Presentation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alphabet: Vec<Generator> = (1..=rank).map(Generator::Free).collect();
        let mut p = Presentation::new(alphabet);
        for _ in 0..relators {
            let len = rng.gen_range(1..=max_len);
            let w = Word::reduce((0..len).map(|_| {
                let g = Generator::Free(rng.gen_range(1..=rank));
                (g, if rng.gen_bool(0.5) { 1 } else { -1 })
            }));
            p.relators.push(Relator::new("user", w));
        }
        p
    }

    /// Applies `moves` seeded random Tietze transformations: new generators
    /// defined by random words, certified consequences, and removal of
    /// either again.
    pub fn random_tietze(&self, seed: u64, moves: usize) -> Result<Presentation> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = self.clone();
        let mut next = 1 + p
            .alphabet
            .iter()
            .filter_map(|g| if let Generator::Free(i) = g { Some(*i) } else { None })
            .max()
            .unwrap_or(0)
            .max(1000);
        let mut added: Vec<Generator> = Vec::new();
        // certificate of the last relator while it is an untouched consequence
        let mut pending: Option<Certificate> = None;
        let random_word = |rng: &mut ChaCha8Rng, alphabet: &[Generator]| {
            let len = rng.gen_range(0..=4);
            Word::reduce((0..len).map(|_| {
                (alphabet[rng.gen_range(0..alphabet.len())], if rng.gen_bool(0.5) { 1 } else { -1 })
            }))
        };
        for _ in 0..moves {
            match rng.gen_range(0..4) {
                0 if !p.alphabet.is_empty() => {
                    let def = random_word(&mut rng, &p.alphabet);
                    let sym = Generator::Free(next);
                    next += 1;
                    p = p.tietze_add_generator(sym, &def)?;
                    added.push(sym);
                    pending = None;
                }
                1 if !p.relators.is_empty() && !p.alphabet.is_empty() => {
                    let i = rng.gen_range(0..p.relators.len());
                    let j = rng.gen_range(0..p.relators.len());
                    let cert = Certificate::single(i, random_word(&mut rng, &p.alphabet), 1)
                        .then(j, random_word(&mut rng, &p.alphabet), if rng.gen_bool(0.5) { 1 } else { -1 });
                    let w = cert.evaluate(&p.relators)?;
                    p = p.tietze_add_relator("consequence", &w, Some(&cert))?;
                    pending = Some(cert);
                }
                2 => {
                    if let Some(cert) = pending.take() {
                        p = p.tietze_remove_relator(p.relators.len() - 1, &cert)?;
                    }
                }
                _ => {
                    if let Some(sym) = added.pop() {
                        p = p.tietze_eliminate(sym)?;
                        pending = None;
                    }
                }
            }
        }
        Ok(p)
    }
}

/// Solves `w = 1` for `sym` when `sym` occurs exactly once in `w`.
pub fn solve_for(w: &Word, sym: Generator) -> Option<Word> {
    let letters: Vec<_> = w.letters().collect();
    let pos: Vec<usize> = letters.iter().enumerate().filter(|(_, l)| l.0 == sym).map(|(p, _)| p).collect();
    if pos.len() != 1 {
        return None;
    }
    let p = pos[0];
    // w = u s^e v = 1  =>  s^e = u^{-1} v^{-1}
    let u = Word::from_letters(letters[..p].iter().copied());
    let v = Word::from_letters(letters[p + 1..].iter().copied());
    let rhs = &u.inverse() * &v.inverse();
    Some(if letters[p].1 > 0 { rhs } else { rhs.inverse() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Generator::*;
    use proptest::prelude::*;

    fn klein() -> Presentation {
        let mut p = Presentation::new(vec![A(1), Y]);
        let w = Word::reduce([(Y, 1), (A(1), 1), (Y, -1), (A(1), 1)]);
        p.push_word("B5", w).unwrap();
        p
    }

    #[test]
    fn abelianization_of_klein_bottle_group() {
        let inv = klein().abelianization().unwrap();
        assert_eq!(inv.torsion_u64(), vec![2]);
        assert_eq!(inv.free_rank, 1);
        assert!(Presentation::new(vec![]).abelianization().unwrap().is_trivial());
        assert_eq!(Presentation::free(vec![A(1), A(2), B]).abelianization().unwrap().free_rank, 3);
    }

    #[test]
    fn foreign_symbols_are_rejected() {
        let mut p = Presentation::new(vec![A(1)]);
        assert!(p.push_word("user", Word::gen(B)).is_err());
    }

    #[test]
    fn add_then_remove_generator_is_identity() {
        let p = klein();
        let def = Word::reduce([(A(1), 1), (Y, 1)]);
        let q = p.tietze_add_generator(Free(1), &def).unwrap();
        let back = q.tietze_remove_generator(Free(1), 1).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn basis_change_for_squares() {
        // <x1, x2 | > with z1 = x1^2, w1 = x2 x1; then x2 = w1 x1^{-1}.
        let p = Presentation::free(vec![X(1), X(2)]);
        let q = p.tietze_add_generator(Z(1), &Word::power(X(1), 2)).unwrap();
        let q = q.tietze_add_generator(W(1), &Word::reduce([(X(2), 1), (X(1), 1)])).unwrap();
        let q = q.tietze_eliminate(X(2)).unwrap();
        assert_eq!(q.alphabet, vec![X(1), Z(1), W(1)]);
        assert_eq!(q.relators.len(), 1);
        assert_eq!(q.relators[0].word, Word::reduce([(Z(1), 1), (X(1), -2)]));
        assert_eq!(q.abelianization().unwrap().free_rank, 2);
    }

    #[test]
    fn certificates_are_checked() {
        let p = klein();
        let r = p.relators[0].word.clone();
        let u = Word::gen(A(1));
        let good = Certificate::single(0, u.clone(), -1);
        let q = p.tietze_add_relator("user", &r.inverse().conjugate(&u), Some(&good)).unwrap();
        assert!(!q.relators[1].unverified);
        assert!(p.tietze_add_relator("user", &Word::gen(A(1)), Some(&good)).is_err());
        let q2 = p.tietze_add_relator("user", &Word::gen(A(1)), None).unwrap();
        assert!(q2.relators[1].unverified);
        let back = q.tietze_remove_relator(1, &good).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn relabel_round_trip_and_injectivity() {
        let p = klein();
        let m: BTreeMap<_, _> = [(A(1), Free(1)), (Y, Free(2))].into_iter().collect();
        let inv: BTreeMap<_, _> = m.iter().map(|(a, b)| (*b, *a)).collect();
        assert_eq!(p.relabel(&m).unwrap().relabel(&inv).unwrap(), p);
        assert_eq!(p.relabel(&BTreeMap::new()).unwrap(), p);
        let bad: BTreeMap<_, _> = [(A(1), Y)].into_iter().collect();
        assert!(p.relabel(&bad).is_err());
    }

    #[test]
    fn random_tietze_moves_keep_the_abelianization() {
        let p = klein();
        for seed in 0..20 {
            let q = p.random_tietze(seed, 12).unwrap();
            assert_eq!(q.abelianization().unwrap(), p.abelianization().unwrap(), "seed {seed}");
        }
        assert_ne!(p.random_tietze(3, 12).unwrap(), p.random_tietze(4, 12).unwrap());
    }

    proptest! {
        #[test]
        fn abelianization_ignores_order_inversion_conjugation(seed in 0u64..500) {
            let p = Presentation::random(seed, 3, 3, 8);
            let base = p.abelianization().unwrap();
            let mut q = p.clone();
            q.relators.reverse();
            q.relators[0].word = q.relators[0].word.inverse().conjugate(&Word::gen(Free(2)));
            prop_assert_eq!(q.abelianization().unwrap(), base);
        }

        #[test]
        fn solve_for_is_consistent(seed in 0u64..500) {
            let p = Presentation::random(seed, 3, 1, 10);
            let w = &p.relators[0].word;
            for g in w.symbols() {
                if let Some(v) = solve_for(w, g) {
                    prop_assert!(!v.symbols().contains(&g));
                    // substituting the solution kills the relator
                    prop_assert!(w.substitute(|h| (h == g).then(|| v.clone())).is_identity());
                }
            }
        }
    }
}
