//! Presentations of group extensions `1 -> H -> G -> Q -> 1`.
//!
//! [`assemble_extension`] builds `G` from presentations of `H` and `Q`
//! together with relator lifts and a conjugation table.
//! [`assemble_central_extension`] adds a central infinite cyclic factor.
//! [`extend`] runs the step from `N_{g,n-1}` to `N_{g,n}` and compares the
//! result with the catalog presentation.

use std::collections::{BTreeMap, BTreeSet};

use crate::catalog::{full_presentation, primed_relators};
use crate::error::{Error, Result};
use crate::expr::MacroMode;
use crate::presentation::{Certificate, Presentation, Relator};
use crate::subgroup::{basis_to_mapping_classes, OrientationKernel};
use crate::symbol::Generator;
use crate::word::{Letter, Word};

/// One entry `f x f^{-1} = w` of a conjugation table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjEntry {
    /// Generator of `H`.
    pub x: Generator,
    /// Generator of `Q`.
    pub f: Generator,
    /// Word over `H`.
    pub w: Word,
    pub family: String,
    pub branch: String,
    pub indices: Vec<(char, i64)>,
}

#[derive(Clone, Debug)]
pub struct ExtensionData {
    pub h: Presentation,
    pub q: Presentation,
    /// Symbol used for the lift of each generator of `Q`.
    pub lift: BTreeMap<Generator, Generator>,
    /// `v_s` for each relator `s` of `Q`, in order.
    pub relator_lifts: Vec<Word>,
    pub conjugation: Vec<ConjEntry>,
}

impl ExtensionData {
    fn lift_of(&self, y: Generator) -> Result<Generator> {
        self.lift.get(&y).copied().ok_or_else(|| Error::Extension(format!("no lift for {y}")))
    }

    fn lift_word(&self, w: &Word) -> Result<Word> {
        w.try_map(|g| Ok(Word::gen(self.lift_of(g)?)))
    }

    /// Checks that the tables are total and only use `H`-symbols.
    pub fn validate(&self) -> Result<()> {
        let h: BTreeSet<Generator> = self.h.alphabet.iter().copied().collect();
        let over_h = |w: &Word, what: &str| -> Result<()> {
            match w.symbols().into_iter().find(|g| !h.contains(g)) {
                Some(g) => Err(Error::Extension(format!("{what} uses {g}, which is not in H"))),
                None => Ok(()),
            }
        };
        for &y in &self.q.alphabet {
            let l = self.lift_of(y)?;
            if h.contains(&l) {
                return Err(Error::Extension(format!("lift {l} of {y} collides with H")));
            }
        }
        if self.relator_lifts.len() != self.q.relators.len() {
            return Err(Error::Extension(format!(
                "{} relator lifts for {} relators of Q",
                self.relator_lifts.len(),
                self.q.relators.len()
            )));
        }
        for (v, s) in self.relator_lifts.iter().zip(&self.q.relators) {
            over_h(v, &format!("v for {}", s.label()))?;
        }
        let mut seen = BTreeSet::new();
        for e in &self.conjugation {
            if !h.contains(&e.x) || !self.q.alphabet.contains(&e.f) {
                return Err(Error::Extension(format!("table entry ({}, {}) outside the alphabets", e.x, e.f)));
            }
            if !seen.insert((e.x, e.f)) {
                return Err(Error::Extension(format!("duplicate table entry ({}, {})", e.x, e.f)));
            }
            over_h(&e.w, &format!("w for ({}, {})", e.x, e.f))?;
        }
        for &x in &self.h.alphabet {
            for &f in &self.q.alphabet {
                if !seen.contains(&(x, f)) {
                    return Err(Error::Extension(format!("table gap at ({x}, {f})")));
                }
            }
        }
        Ok(())
    }
}

/// Relators `r~` for `r` in `H`, `s~ v_s^{-1}` for `s` in `Q`, and
/// `f x f^{-1} w_{x,f}^{-1}`, over the lifted `Q`-symbols followed by `H`.
pub fn assemble_extension(e: &ExtensionData) -> Result<Presentation> {
    e.validate()?;
    let mut alphabet: Vec<Generator> = e.q.alphabet.iter().map(|&y| e.lift_of(y)).collect::<Result<_>>()?;
    alphabet.extend(e.h.alphabet.iter().copied());
    let mut out = Presentation::new(alphabet);
    for r in &e.h.relators {
        out.push(r.clone())?;
    }
    for (s, v) in e.q.relators.iter().zip(&e.relator_lifts) {
        let w = &e.lift_word(&s.word)? * &v.inverse();
        out.push(Relator { word: w, ..s.clone() })?;
    }
    for c in &e.conjugation {
        let f = Word::gen(e.lift_of(c.f)?);
        let w = &Word::gen(c.x).conjugate(&f) * &c.w.inverse();
        out.push(Relator::new(&c.family, w).with_branch(&c.branch, c.indices.clone()))?;
    }
    Ok(out)
}

/// A central symbol with one exponent per relator of the presentation it
/// adjusts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentralAdjustment {
    pub central: Generator,
    pub exponents: Vec<i32>,
}

/// Replaces each relator `r` by `r d^{-eps_r}` and adds `[d, x]` for every
/// generator `x`.
pub fn assemble_central_extension(p: &Presentation, adj: &CentralAdjustment) -> Result<Presentation> {
    if adj.exponents.len() != p.relators.len() {
        return Err(Error::Extension(format!(
            "{} exponents for {} relators",
            adj.exponents.len(),
            p.relators.len()
        )));
    }
    if p.contains_symbol(&adj.central) {
        return Err(Error::Extension(format!("{} is already a generator", adj.central)));
    }
    let d = adj.central;
    let mut out = Presentation::new(p.alphabet.iter().copied().chain([d]).collect());
    out.surface = p.surface;
    for (r, &eps) in p.relators.iter().zip(&adj.exponents) {
        let mut w = r.word.clone();
        w.push(d, -eps);
        out.push(Relator { word: w, ..r.clone() })?;
    }
    for &x in &p.alphabet {
        out.push(central_commutator(d, x))?;
    }
    Ok(out)
}

fn central_commutator(d: Generator, x: Generator) -> Relator {
    let (tag, idx) = x.tag();
    let idx: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
    let mut r = Relator::new("D0", Word::commutator(&Word::gen(d), &Word::gen(x)));
    r.branch = format!("{tag}{}", idx.join(","));
    if let Generator::D(j) = d {
        r.indices = vec![('j', j as i64)];
    }
    r
}

/// Extension data of `M^+(N_{g,n-1}, x_0)` over `M(N_{g,n-1})` with kernel
/// the orientation subgroup of the fundamental group, written in the basis
/// symbols `z, w, y, ybar`.
pub fn birman_instance(g: u16, n: u16) -> Result<ExtensionData> {
    let kernel = OrientationKernel::new(g, n)?;
    let h = Presentation::free(kernel.basis());
    let q = full_presentation(g, n - 1)?;
    let lift = q.alphabet.iter().map(|&y| (y, y)).collect();
    let relator_lifts = vec![Word::identity(); q.relators.len()];
    let mut conjugation = Vec::new();
    for (inst, _) in primed_relators(g, n, MacroMode::Basis)? {
        let (f, x, w) = inst.parts(MacroMode::Basis)?;
        let single = |u: &Word, what: &str| -> Result<Generator> {
            match u.runs() {
                [(s, 1)] => Ok(*s),
                _ => Err(Error::Extension(format!("{what} of {} is not a generator", inst.family.tag))),
            }
        };
        conjugation.push(ConjEntry {
            x: single(&x, "conjugated element")?,
            f: single(&f, "conjugator")?,
            w,
            family: format!("{}'", inst.family.tag),
            branch: inst.branch.name.to_string(),
            indices: inst.vars.bindings(),
        });
    }
    Ok(ExtensionData { h, q, lift, relator_lifts, conjugation })
}

/// Key of the boundary-twist exponent table: primed family tag and branch.
pub type EpsilonKey = (String, String);

/// Exponents for the relators of an assembled Birman instance: looked up by
/// `(family, branch)` for conjugation relators, zero for lifted relators.
pub fn birman_adjustment(
    p: &Presentation,
    central: Generator,
    table: &BTreeMap<EpsilonKey, i32>,
) -> CentralAdjustment {
    let exponents = p
        .relators
        .iter()
        .map(|r| {
            if r.family.ends_with('\'') {
                *table.get(&(r.family.clone(), r.branch.clone())).unwrap_or(&0)
            } else {
                0
            }
        })
        .collect();
    CentralAdjustment { central, exponents }
}

/// Multiset difference of two presentations, comparing relators up to free
/// reduction, cyclic rotation and inversion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Comparison {
    pub only_left: Vec<String>,
    pub only_right: Vec<String>,
}

impl Comparison {
    pub fn is_empty(&self) -> bool {
        self.only_left.is_empty() && self.only_right.is_empty()
    }
}

pub fn compare_presentations(p1: &Presentation, p2: &Presentation) -> Result<Comparison> {
    let a: BTreeSet<&Generator> = p1.alphabet.iter().collect();
    let b: BTreeSet<&Generator> = p2.alphabet.iter().collect();
    if a != b {
        let left: Vec<String> = a.difference(&b).map(|g| g.to_string()).collect();
        let right: Vec<String> = b.difference(&a).map(|g| g.to_string()).collect();
        return Err(Error::AlphabetMismatch(format!("only left {left:?}, only right {right:?}")));
    }
    type Key = Vec<Letter>;
    let bag = |p: &Presentation| {
        let mut m: BTreeMap<Key, Vec<String>> = BTreeMap::new();
        for r in &p.relators {
            if !r.word.cyclic_reduce().0.is_identity() {
                m.entry(r.word.canonical_cyclic()).or_default().push(format!("{}: {}", r.label(), r.word));
            }
        }
        m
    };
    let (mut l, mut r) = (bag(p1), bag(p2));
    let mut out = Comparison::default();
    let keys: BTreeSet<Key> = l.keys().chain(r.keys()).cloned().collect();
    for k in keys {
        let ls = l.remove(&k).unwrap_or_default();
        let rs = r.remove(&k).unwrap_or_default();
        if ls.len() > rs.len() {
            out.only_left.extend(ls.into_iter().skip(rs.len()));
        } else {
            out.only_right.extend(rs.into_iter().skip(ls.len()));
        }
    }
    Ok(out)
}

/// Mapping-class word of each basis symbol of the orientation subgroup at
/// level `k`, split as `u · v` with `u` the new generator.
fn basis_split(s: Generator, k: u16) -> Option<(Generator, Option<(Generator, i32)>)> {
    use Generator::*;
    match s {
        Z(i) => Some((RSub(i, k), None)),
        W(i) => Some((ASub(i, k), Some((A(i), -1)))),
        YLoop(l) => Some((S(l, k), Some((D(l), -1)))),
        YBar(l) => Some((SBar(l, k), Some((D(l), -1)))),
        _ => None,
    }
}

fn find_word(p: &Presentation, w: &Word) -> Option<usize> {
    p.relators.iter().position(|r| &r.word == w)
}

/// Rewrites `[c, u v]` as `[c, u]` given a relator `[c, v]` or `[v, c]`,
/// through certified Tietze moves.
fn normalize_commutator(p: &Presentation, idx: usize, c: Generator, u: Generator, v: (Generator, i32)) -> Result<Presentation> {
    let cw = Word::gen(c);
    let uw = Word::gen(u);
    let target = Word::commutator(&cw, &uw);
    if p.relators[idx].word == target {
        return Ok(p.clone());
    }
    let vg = Word::gen(v.0);
    let (cv, sign) = match find_word(p, &Word::commutator(&cw, &vg)) {
        Some(j) => (j, 1),
        None => match find_word(p, &Word::commutator(&vg, &cw)) {
            Some(j) => (j, -1),
            None => {
                return Err(Error::Extension(format!("no relator [{c}, {}] to normalize {}", v.0, p.relators[idx].label())))
            }
        },
    };
    // [c, u v] = [c, u] · u [c, v] u^{-1}; with v = a^{-1},
    // u [c, a^{-1}] u^{-1} = (u a^{-1}) [c, a]^{-1} (u a^{-1})^{-1}.
    let conj = if v.1 < 0 { &uw * &Word::power(v.0, -1) } else { uw.clone() };
    let inner = if v.1 < 0 { -sign } else { sign };
    let conj_back = conj.clone();
    let cert = Certificate::single(idx, Word::identity(), 1).then(cv, conj, -inner);
    let rel = p.relators[idx].clone();
    let mut next = p.tietze_add_relator(&rel.family, &target, Some(&cert))?;
    let last = next.relators.len() - 1;
    next.relators[last] = Relator { word: target.clone(), ..rel };
    // The old relator is the new one times the [c, v] factor.
    let cv_after = if cv > idx { cv - 1 } else { cv };
    let back = Certificate::single(last - 1, Word::identity(), 1).then(cv_after, conj_back, inner);
    let out = next.tietze_remove_relator(idx, &back)?;
    Ok(out)
}

/// Outcome of the step from `N_{g,n-1}` to `N_{g,n}`.
#[derive(Clone, Debug)]
pub struct ExtendReport {
    pub surface: (u16, u16),
    pub assembled: Presentation,
    pub comparison: Comparison,
}

/// Builds `M(N_{g,n})` from `M(N_{g,n-1})` and compares it with the catalog.
pub fn extend(g: u16, n: u16, table: &BTreeMap<EpsilonKey, i32>) -> Result<ExtendReport> {
    let assembled = extension_presentation(g, n, table)?;
    let catalog = full_presentation(g, n)?;
    let comparison = compare_presentations(&assembled, &catalog)?;
    Ok(ExtendReport { surface: (g, n), assembled, comparison })
}

/// The central extension of the Birman instance, with basis symbols traded
/// for the level-`n-1` generators and commutators normalized.
pub fn extension_presentation(g: u16, n: u16, table: &BTreeMap<EpsilonKey, i32>) -> Result<Presentation> {
    let k = n - 1;
    let data = birman_instance(g, n)?;
    let p = assemble_extension(&data)?;
    let adj = birman_adjustment(&p, Generator::D(k), table);
    let mut p = assemble_central_extension(&p, &adj)?;
    for &s in &data.h.alphabet {
        let (u, v) = basis_split(s, k).ok_or_else(|| Error::Extension(format!("unexpected basis symbol {s}")))?;
        let mut def = Word::gen(s);
        if let Some((vg, ve)) = v {
            def.push(vg, -ve);
        }
        p = p.tietze_add_generator(u, &def)?;
        let idx = p.relators.len() - 1;
        p = p.tietze_remove_generator(s, idx)?;
        debug_assert_eq!(basis_to_mapping_classes(&Word::gen(s), k).ok(), Some({
            let mut w = Word::gen(u);
            if let Some((vg, ve)) = v {
                w.push(vg, ve);
            }
            w
        }));
        if let Some(v) = v {
            let targets: Vec<(usize, Generator)> = p
                .relators
                .iter()
                .enumerate()
                .filter(|(_, r)| is_central_family(r))
                .filter_map(|(i, r)| commutator_with(&r.word, u, v).map(|c| (i, c)))
                .collect();
            for (_, c) in targets {
                let idx = p
                    .relators
                    .iter()
                    .position(|r| is_central_family(r) && commutator_with(&r.word, u, v) == Some(c))
                    .expect("relator present");
                p = normalize_commutator(&p, idx, c, u, v)?;
            }
        }
    }
    p.surface = Some((g as u32, n as u32));
    p.alphabet.sort();
    Ok(p)
}

/// Commutators with a boundary twist: `D0` and the `h` families.
fn is_central_family(r: &Relator) -> bool {
    r.family == "D0" || (r.family.starts_with('D') && r.family.ends_with("h'"))
}

/// `Some(c)` when `w = [c, u v]` freely reduced and `c` is a boundary twist.
fn commutator_with(w: &Word, u: Generator, v: (Generator, i32)) -> Option<Generator> {
    let (c @ Generator::D(_), 1) = *w.runs().first()? else { return None };
    let uv = Word::reduce([(u, 1), v]);
    (Word::commutator(&Word::gen(c), &uv) == *w).then_some(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{level_alphabet, primed_relators};
    use Generator::*;

    fn cyclic2(x: Generator) -> Presentation {
        let mut p = Presentation::new(vec![x]);
        p.push_word("user", Word::power(x, 2)).unwrap();
        p
    }

    fn order_two_extension(v: Word) -> ExtensionData {
        let (x, y) = (Free(1), Free(2));
        ExtensionData {
            h: cyclic2(x),
            q: cyclic2(y),
            lift: [(y, y)].into_iter().collect(),
            relator_lifts: vec![v],
            conjugation: vec![ConjEntry {
                x,
                f: y,
                w: Word::gen(x),
                family: "C".into(),
                branch: String::new(),
                indices: vec![],
            }],
        }
    }

    #[test]
    fn klein_four() {
        let p = assemble_extension(&order_two_extension(Word::identity())).unwrap();
        assert_eq!(p.alphabet, vec![Free(2), Free(1)]);
        assert_eq!(p.relators.len(), 3);
        assert_eq!(p.abelianization().unwrap().torsion_u64(), vec![2, 2]);
    }

    #[test]
    fn cyclic_of_order_four() {
        let p = assemble_extension(&order_two_extension(Word::gen(Free(1)))).unwrap();
        let ab = p.abelianization().unwrap();
        assert_eq!(ab.torsion_u64(), vec![4]);
        assert_eq!(ab.free_rank, 0);
    }

    #[test]
    fn table_gaps_are_errors() {
        let mut e = order_two_extension(Word::identity());
        e.conjugation.clear();
        assert!(matches!(assemble_extension(&e), Err(Error::Extension(_))));
        let mut e = order_two_extension(Word::identity());
        e.relator_lifts.clear();
        assert!(assemble_extension(&e).is_err());
        let mut e = order_two_extension(Word::identity());
        e.conjugation[0].w = Word::gen(Free(2));
        assert!(assemble_extension(&e).is_err());
    }

    #[test]
    fn h_relators_survive_unchanged() {
        let e = order_two_extension(Word::gen(Free(1)));
        let p = assemble_extension(&e).unwrap();
        let only_h: Vec<&Relator> =
            p.relators.iter().filter(|r| r.word.symbols().iter().all(|g| e.h.alphabet.contains(g))).collect();
        assert_eq!(only_h.len(), 1);
        assert_eq!(only_h[0].word, Word::power(Free(1), 2));
    }

    #[test]
    fn zero_adjustment_only_adds_commutators() {
        let p = assemble_extension(&order_two_extension(Word::identity())).unwrap();
        let adj = CentralAdjustment { central: Free(9), exponents: vec![0; p.relators.len()] };
        let c = assemble_central_extension(&p, &adj).unwrap();
        assert_eq!(c.relators.len(), p.relators.len() + p.alphabet.len());
        for (a, b) in p.relators.iter().zip(&c.relators) {
            assert_eq!(a.word, b.word);
        }
    }

    #[test]
    fn central_exponent_column() {
        let p = assemble_extension(&order_two_extension(Word::identity())).unwrap();
        let adj = CentralAdjustment { central: Free(9), exponents: vec![3, 0, 0] };
        let c = assemble_central_extension(&p, &adj).unwrap();
        let ab = c.abelianization().unwrap();
        // Z^3 / <(0,2,-3), (2,0,0)>: torsion [2] from the H row plus
        // gcd(2,3) = 1 on the other row, free rank 1.
        assert_eq!(ab.torsion_u64(), vec![2]);
        assert_eq!(ab.free_rank, 1);
        let bad = CentralAdjustment { central: Free(9), exponents: vec![0] };
        assert!(assemble_central_extension(&p, &bad).is_err());
    }

    #[test]
    fn comparison_up_to_rotation_and_inversion() {
        let mut p = Presentation::new(vec![Free(1), Free(2)]);
        p.push_word("u", Word::reduce([(Free(1), 1), (Free(2), 1), (Free(1), -1)])).unwrap();
        let mut q = Presentation::new(vec![Free(2), Free(1)]);
        q.push_word("v", Word::power(Free(2), -1)).unwrap();
        assert!(compare_presentations(&p, &q).unwrap().is_empty());
        assert!(compare_presentations(&p, &p).unwrap().is_empty());
        q.push_word("w", Word::power(Free(1), 2)).unwrap();
        let c = compare_presentations(&p, &q).unwrap();
        assert_eq!((c.only_left.len(), c.only_right.len()), (0, 1));
        let r = Presentation::new(vec![Free(1)]);
        assert!(compare_presentations(&p, &r).is_err());
    }

    #[test]
    fn birman_alphabet_size() {
        for (g, n) in [(1, 2), (3, 2), (4, 3), (5, 4)] {
            let e = birman_instance(g, n).unwrap();
            let x2 = level_alphabet(g, n - 1).len() - 1;
            assert_eq!(e.h.alphabet.len(), x2);
            assert_eq!(e.q.alphabet.len() + e.h.alphabet.len(), crate::catalog::full_alphabet(g, n).len() - 1);
        }
    }

    #[test]
    fn conjugation_family_matches_primed_words() {
        let e = birman_instance(4, 3).unwrap();
        let p = assemble_extension(&e).unwrap();
        let primed = primed_relators(4, 3, MacroMode::Basis).unwrap();
        let c: Vec<&Relator> = p.relators.iter().filter(|r| r.family.ends_with('\'')).collect();
        assert_eq!(c.len(), primed.len());
        for (r, (_, w)) in c.iter().zip(&primed) {
            assert_eq!(&r.word, w);
        }
    }

    fn catalog_tails(g: u16, n: u16) -> BTreeMap<EpsilonKey, i32> {
        crate::catalog::instances(crate::catalog::families(), g, n - 1)
            .into_iter()
            .map(|i| ((format!("{}'", i.family.tag), i.branch.name.to_string()), i.tail()))
            .collect()
    }

    #[test]
    fn round_trip_with_catalog_tails() {
        for (g, n) in [(1, 2), (2, 2), (3, 3), (4, 3), (5, 2)] {
            let r = extend(g, n, &catalog_tails(g, n)).unwrap();
            assert!(r.comparison.is_empty(), "({g},{n}) {:#?}", r.comparison);
        }
    }

    #[test]
    fn a_wrong_exponent_shows_up_in_the_diff() {
        let mut t = catalog_tails(3, 3);
        let key = t.keys().find(|k| k.0 == "D2b'").unwrap().clone();
        *t.get_mut(&key).unwrap() += 1;
        let r = extend(3, 3, &t).unwrap();
        assert!(!r.comparison.is_empty());
    }

    #[test]
    fn normalization_is_certified() {
        let mut p = Presentation::new(vec![D(1), A(1), ASub(1, 2)]);
        let c = Word::gen(D(1));
        p.push_word("D0", Word::commutator(&c, &Word::gen(A(1)))).unwrap();
        let uv = Word::reduce([(ASub(1, 2), 1), (A(1), -1)]);
        p.push_word("D0", Word::commutator(&c, &uv)).unwrap();
        let q = normalize_commutator(&p, 1, D(1), ASub(1, 2), (A(1), -1)).unwrap();
        assert_eq!(q.relators.len(), 2);
        assert_eq!(q.relators[1].word, Word::commutator(&c, &Word::gen(ASub(1, 2))));
        assert!(!q.relators[1].unverified);
    }
}
