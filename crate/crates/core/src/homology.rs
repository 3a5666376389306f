//! The action of `M(N_{g,n})` on `H_1(N_{g,n}; Z/2)`.
//!
//! Basis: crosscap cores `X_1..X_g`, hole loops `H_1..H_{n-1}`. Vectors are
//! bitmasks (bit `i-1` is `X_i`, bit `g+j-1` is `H_j`), so the dimension is
//! capped at 64. The mod-2 intersection form has `<X_i, X_i> = 1` and is zero
//! otherwise. Curve classes come from the ledger in `data/curve_ledger.json`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Deserialize;

use crate::catalog::{flagged_instances, full_presentation};
use crate::error::{Error, Result};
use crate::expr::{IndexExpr, Vars};
use crate::presentation::Presentation;
use crate::symbol::{CurveName, Generator};
use crate::word::Word;

#[derive(Debug, Deserialize)]
struct LedgerFile {
    model: String,
    curves: Vec<LedgerEntry>,
}

/// One ledger row: the mod-2 class of a family of curves.
#[derive(Clone, Debug, Deserialize)]
pub struct LedgerEntry {
    pub curve: String,
    pub params: Vec<String>,
    #[serde(default)]
    pub when: Option<BTreeMap<String, String>>,
    pub class: Vec<String>,
    pub two_sided: bool,
    pub note: String,
}

/// The checked-in curve ledger.
#[derive(Debug)]
pub struct Ledger {
    pub model: String,
    pub entries: Vec<LedgerEntry>,
}

impl Ledger {
    pub fn parse(src: &str) -> Result<Ledger> {
        let f: LedgerFile = serde_json::from_str(src).map_err(|e| Error::Ledger(e.to_string()))?;
        Ok(Ledger { model: f.model, entries: f.curves })
    }

    pub fn builtin() -> &'static Ledger {
        static L: OnceLock<Ledger> = OnceLock::new();
        L.get_or_init(|| {
            Ledger::parse(include_str!("../data/curve_ledger.json")).expect("curve ledger parses")
        })
    }

    fn entry(&self, tag: &str, vars: &Vars) -> Result<&LedgerEntry> {
        for e in self.entries.iter().filter(|e| e.curve == tag) {
            let ok = match &e.when {
                None => true,
                Some(cond) => cond.iter().try_fold(true, |acc, (parity, ex)| {
                    let v = IndexExpr::parse(ex)?.eval(vars)?;
                    Ok::<bool, Error>(acc && (v.rem_euclid(2) == (parity == "odd") as i64))
                })?,
            };
            if ok {
                return Ok(e);
            }
        }
        Err(Error::Ledger(format!("no entry for curve `{tag}` under {:?}", vars.bindings())))
    }
}

/// A square matrix over Z/2; `cols[c]` is the image of basis vector `c`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RepMatrix {
    cols: Vec<u64>,
}

impl fmt::Debug for RepMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| if self.get(r, c) { '1' } else { '0' }).collect())
            .collect();
        write!(f, "[{}]", rows.join(" "))
    }
}

impl RepMatrix {
    pub fn identity(dim: usize) -> Self {
        RepMatrix { cols: (0..dim).map(|c| 1u64 << c).collect() }
    }

    pub fn from_columns(cols: Vec<u64>) -> Self {
        RepMatrix { cols }
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.cols[c] >> r & 1 == 1
    }

    pub fn apply(&self, v: u64) -> u64 {
        let mut out = 0;
        let mut v = v;
        while v != 0 {
            let c = v.trailing_zeros() as usize;
            out ^= self.cols[c];
            v &= v - 1;
        }
        out
    }

    /// `self * rhs`, i.e. apply `rhs` first.
    pub fn mul(&self, rhs: &RepMatrix) -> RepMatrix {
        RepMatrix { cols: rhs.cols.iter().map(|&c| self.apply(c)).collect() }
    }

    pub fn transpose(&self) -> RepMatrix {
        let n = self.dim();
        let mut cols = vec![0u64; n];
        for (c, &col) in self.cols.iter().enumerate() {
            for (r, out) in cols.iter_mut().enumerate() {
                if col >> r & 1 == 1 {
                    *out |= 1 << c;
                }
            }
        }
        RepMatrix { cols }
    }

    pub fn is_identity(&self) -> bool {
        self.cols.iter().enumerate().all(|(c, &v)| v == 1 << c)
    }

    /// First basis vector that is moved, with its image.
    pub fn witness(&self) -> Option<(usize, u64)> {
        self.cols.iter().enumerate().find(|(c, &v)| v != 1 << c).map(|(c, &v)| (c, v))
    }

    /// Inverse by Gauss-Jordan elimination; `None` if singular.
    pub fn inverse(&self) -> Option<RepMatrix> {
        let n = self.dim();
        // Row-reduce [A^T | I] column-wise: work on rows of A stored as bitmasks.
        let t = self.transpose();
        let mut rows: Vec<(u64, u64)> = (0..n).map(|r| (t.cols[r], 1u64 << r)).collect();
        for c in 0..n {
            let p = (c..n).find(|&r| rows[r].0 >> c & 1 == 1)?;
            rows.swap(c, p);
            let pivot = rows[c];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != c && row.0 >> c & 1 == 1 {
                    row.0 ^= pivot.0;
                    row.1 ^= pivot.1;
                }
            }
        }
        // rows[c].1 now holds row c of A^{-1}.
        let inv_t = RepMatrix { cols: rows.into_iter().map(|r| r.1).collect() };
        Some(inv_t.transpose())
    }

    pub fn is_invertible(&self) -> bool {
        self.inverse().is_some()
    }
}

/// Homology model of `N_{g,n}` (with `n = 0` treated as `n = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Model {
    pub g: u16,
    pub n: u16,
}

/// A cataloged curve with its class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CurveRecord {
    pub name: CurveName,
    pub class: u64,
    pub two_sided: bool,
}

impl Model {
    pub fn new(g: u16, n: u16) -> Result<Model> {
        if g < 1 {
            return Err(Error::InvalidSurface { g: g as i64, n: n as i64 });
        }
        let m = Model { g, n: n.max(1) };
        if m.dim() > 64 {
            return Err(Error::Dimension(m.dim()));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.g as usize + self.n as usize - 1
    }

    pub fn x(&self, i: u16) -> u64 {
        debug_assert!((1..=self.g).contains(&i));
        1 << (i - 1)
    }

    pub fn h(&self, j: u16) -> u64 {
        debug_assert!((1..self.n).contains(&j));
        1 << (self.g + j - 1)
    }

    fn x_mask(&self) -> u64 {
        u64::MAX >> (64 - self.g as u32)
    }

    /// Mod-2 intersection pairing.
    pub fn pairing(&self, u: u64, v: u64) -> bool {
        (u & v & self.x_mask()).count_ones() % 2 == 1
    }

    /// Gram matrix of the pairing.
    pub fn gram(&self) -> RepMatrix {
        RepMatrix { cols: (0..self.dim()).map(|c| if c < self.g as usize { 1 << c } else { 0 }).collect() }
    }

    /// `M^T J M = J`.
    pub fn preserves_form(&self, m: &RepMatrix) -> bool {
        let n = self.dim();
        (0..n).all(|a| {
            (0..n).all(|b| self.pairing(m.cols[a], m.cols[b]) == self.pairing(1 << a, 1 << b))
        })
    }

    pub fn format_class(&self, v: u64) -> String {
        let mut parts = Vec::new();
        for i in 1..=self.g {
            if v & self.x(i) != 0 {
                parts.push(format!("X{i}"));
            }
        }
        for j in 1..self.n {
            if v & self.h(j) != 0 {
                parts.push(format!("H{j}"));
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join("+")
        }
    }

    fn term(&self, t: &str, vars: &Vars) -> Result<u64> {
        let bad = || Error::Ledger(format!("bad class term `{t}`"));
        let (kind, range) = t.split_once(':').ok_or_else(bad)?;
        let (lo, hi) = match range.split_once("..") {
            Some((a, b)) => (IndexExpr::parse(a)?.eval(vars)?, IndexExpr::parse(b)?.eval(vars)?),
            None => {
                let v = IndexExpr::parse(range)?.eval(vars)?;
                (v, v)
            }
        };
        let mut out = 0;
        for p in lo..=hi {
            out ^= match kind {
                "X" if (1..=self.g as i64).contains(&p) => self.x(p as u16),
                "H" if (1..self.n as i64).contains(&p) => self.h(p as u16),
                _ => return Err(Error::Ledger(format!("term `{t}` leaves the basis at {p}"))),
            };
        }
        Ok(out)
    }

    /// Looks the curve up in the ledger.
    pub fn curve_class(&self, name: CurveName) -> Result<CurveRecord> {
        let (tag, idx) = name.tag();
        let ledger = Ledger::builtin();
        let mut vars = Vars::new().with('g', self.g as i64).with('n', self.n as i64);
        let candidates: Vec<&LedgerEntry> = ledger.entries.iter().filter(|e| e.curve == tag).collect();
        let first = candidates.first().ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        if first.params.len() != idx.len() {
            return Err(Error::Ledger(format!("arity mismatch for `{tag}`")));
        }
        for (p, &v) in first.params.iter().zip(&idx) {
            let c = p.chars().next().ok_or_else(|| Error::Ledger("empty parameter name".into()))?;
            vars.set(c, v as i64);
        }
        let e = ledger.entry(tag, &vars)?;
        let mut class = 0;
        for t in &e.class {
            class ^= self.term(t, &vars)?;
        }
        Ok(CurveRecord { name, class, two_sided: e.two_sided })
    }

    /// Transvection `x -> x + <x, c> c`.
    pub fn twist_matrix(&self, c: &CurveRecord) -> Result<RepMatrix> {
        if !c.two_sided {
            return Err(Error::OneSided(c.name.to_string()));
        }
        Ok(self.transvection(c.class))
    }

    pub fn transvection(&self, c: u64) -> RepMatrix {
        RepMatrix {
            cols: (0..self.dim()).map(|b| if self.pairing(1 << b, c) { (1 << b) ^ c } else { 1 << b }).collect(),
        }
    }

    /// Curves bounding the neighbourhood used to write `Y_{mu, alpha}` as a
    /// product of twists.
    pub fn slide_boundaries(&self, mu: CurveName, alpha: CurveName) -> Result<(CurveName, CurveName)> {
        use CurveName::*;
        match (mu, alpha) {
            (Mu(i), Nu(a, j)) if a == i && j >= i => Ok((SlideBoundary(i, j, 1), SlideBoundary(i, j, 2))),
            (Mu(i), Alpha(a)) if a == i => Ok((SlideBoundary(i, i + 1, 1), SlideBoundary(i, i + 1, 2))),
            _ => Err(Error::Ledger(format!("no slide decomposition for ({mu}, {alpha})"))),
        }
    }

    /// `t_{delta_1} t_{delta_2}^{-1}` as a matrix.
    pub fn y_matrix(
        &self,
        mu: &CurveRecord,
        _alpha: &CurveRecord,
        delta1: &CurveRecord,
        delta2: &CurveRecord,
    ) -> Result<RepMatrix> {
        if mu.two_sided {
            return Err(Error::Ledger(format!("{} is two-sided", mu.name)));
        }
        let t1 = self.twist_matrix(delta1)?;
        let t2 = self.twist_matrix(delta2)?;
        let t2inv = t2.inverse().expect("transvections are invertible");
        Ok(t1.mul(&t2inv))
    }

    fn slide_matrix(&self, mu: CurveName, alpha: CurveName) -> Result<RepMatrix> {
        let (d1, d2) = self.slide_boundaries(mu, alpha)?;
        self.y_matrix(
            &self.curve_class(mu)?,
            &self.curve_class(alpha)?,
            &self.curve_class(d1)?,
            &self.curve_class(d2)?,
        )
    }

    /// Matrix of a generator symbol.
    pub fn assign(&self, gen: Generator) -> Result<RepMatrix> {
        use CurveName as C;
        use Generator::*;
        let twist = |c: CurveName| self.twist_matrix(&self.curve_class(c)?);
        let in_x = |i: u16| i >= 1 && i <= self.g;
        let in_h = |j: u16| j >= 1 && j < self.n;
        let unassigned = || Err(Error::Unassigned(gen.to_string()));
        match gen {
            A(i) if in_x(i) && i < self.g => twist(C::Alpha(i)),
            B if self.g >= 4 => twist(C::Beta),
            Y if self.g >= 2 => self.slide_matrix(C::Mu(1), C::Alpha(1)),
            D(j) if in_h(j) => twist(C::Hole(j)),
            ASub(i, j) if in_x(i) && i < self.g && in_h(j) => twist(C::AlphaHole(i, j)),
            RSub(i, j) if in_x(i) && in_h(j) => twist(C::Rho(i, j)),
            S(i, j) if i < j && in_h(j) => twist(C::Sigma(i, j)),
            SBar(i, j) if i < j && in_h(j) => twist(C::SigmaBar(i, j)),
            Twist(c, _) => twist(c),
            Slide(m, a, o) => {
                let y = self.slide_matrix(m, a)?;
                Ok(match o {
                    crate::symbol::Orientation::Plus => y,
                    crate::symbol::Orientation::Minus => y.inverse().expect("invertible"),
                })
            }
            _ => unassigned(),
        }
    }

    /// An evaluator with matrices for every symbol of `alphabet`.
    pub fn rep(&self, alphabet: &[Generator]) -> Result<Rep> {
        let mut mats = HashMap::new();
        for &gen in alphabet {
            let m = self.assign(gen)?;
            let inv = m.inverse().ok_or_else(|| Error::Ledger(format!("{gen} is singular")))?;
            mats.insert(gen, (m, inv));
        }
        Ok(Rep { model: *self, mats })
    }
}

/// Cached generator matrices.
#[derive(Clone, Debug)]
pub struct Rep {
    pub model: Model,
    mats: HashMap<Generator, (RepMatrix, RepMatrix)>,
}

impl Rep {
    pub fn matrix(&self, gen: Generator) -> Result<&RepMatrix> {
        self.mats.get(&gen).map(|m| &m.0).ok_or_else(|| Error::Unassigned(gen.to_string()))
    }

    pub fn generators(&self) -> impl Iterator<Item = (&Generator, &RepMatrix)> {
        self.mats.iter().map(|(g, m)| (g, &m.0))
    }

    /// `M(g_1)^{e_1} M(g_2)^{e_2} ...` for `w = g_1^{e_1} g_2^{e_2} ...`.
    pub fn eval(&self, w: &Word) -> Result<RepMatrix> {
        let mut acc = RepMatrix::identity(self.model.dim());
        for &(gen, e) in w.runs() {
            let (m, inv) = self.mats.get(&gen).ok_or_else(|| Error::Unassigned(gen.to_string()))?;
            let f = if e > 0 { m } else { inv };
            for _ in 0..e.unsigned_abs() {
                acc = acc.mul(f);
            }
        }
        Ok(acc)
    }

    pub fn verify(&self, w: &Word) -> Result<Verdict> {
        let m = self.eval(w)?;
        Ok(match m.witness() {
            None => Verdict::Identity,
            Some((c, image)) => Verdict::Moves { basis: c, image },
        })
    }
}

/// Outcome of a relator check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Identity,
    /// Basis vector `basis` is sent to `image`.
    Moves { basis: usize, image: u64 },
}

/// Per-family counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FamilyReport {
    pub emitted: usize,
    pub verified: usize,
    pub failed: usize,
    pub first_witness: Option<String>,
}

/// Result of checking a whole presentation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub surface: (u16, u16),
    pub families: BTreeMap<String, FamilyReport>,
    /// Relator labels affected by documented source ambiguities.
    pub flagged: Vec<String>,
    pub forms_preserved: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.families.values().map(|f| f.failed).sum::<usize>() + (!self.forms_preserved) as usize
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}

/// Checks every relator of `pres` in the representation of `model`.
pub fn verify_relators(model: &Model, pres: &Presentation) -> Result<VerifyReport> {
    let rep = model.rep(&pres.alphabet)?;
    let verdicts: Vec<Verdict> =
        pres.relators.par_iter().map(|r| rep.verify(&r.word)).collect::<Result<_>>()?;
    let mut report = VerifyReport {
        surface: (model.g, model.n),
        forms_preserved: rep
            .generators()
            .all(|(_, m)| model.preserves_form(m) && m.is_invertible()),
        ..Default::default()
    };
    for (r, v) in pres.relators.iter().zip(verdicts) {
        let f = report.families.entry(r.family.clone()).or_default();
        f.emitted += 1;
        match v {
            Verdict::Identity => f.verified += 1,
            Verdict::Moves { basis, image } => {
                f.failed += 1;
                if f.first_witness.is_none() {
                    let b = model.format_class(1 << basis);
                    f.first_witness =
                        Some(format!("{}: {b} -> {}", r.label(), model.format_class(image)));
                }
            }
        }
    }
    Ok(report)
}

/// Checks `full_presentation(g, n)`.
pub fn verify_presentation(g: u16, n: u16) -> Result<VerifyReport> {
    let pres = full_presentation(g, n)?;
    let model = Model::new(g, n)?;
    let mut report = verify_relators(&model, &pres)?;
    report.surface = (g, n);
    report.flagged = flagged_instances(g, n.max(1));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Generator::*;
    use proptest::prelude::*;

    #[test]
    fn ledger_sidedness_matches_pairing() {
        let m = Model::new(6, 4).unwrap();
        use CurveName::*;
        let curves = [
            Alpha(2), Beta, Mu(3), Nu(1, 3), Nu(2, 5), Boundary, Hole(2), AlphaHole(1, 3),
            Rho(2, 1), Sigma(1, 3), SigmaBar(2, 3), SigmaBarTri(1, 2, 3), Zeta1, Zeta2,
            AlphaHoles(1, 1, 2), HoleTriple(1, 2, 3), ChainBoundary(1, 3, 1), ChainBoundary(1, 2, 1),
            SlideBoundary(1, 3, 2), SlideBoundary(2, 3, 1),
        ];
        for c in curves {
            let r = m.curve_class(c).unwrap();
            assert_eq!(r.two_sided, !m.pairing(r.class, r.class), "{c}");
        }
    }

    #[test]
    fn sample_classes() {
        let m = Model::new(4, 3).unwrap();
        assert_eq!(m.curve_class(CurveName::Alpha(1)).unwrap().class, m.x(1) | m.x(2));
        assert_eq!(m.curve_class(CurveName::Hole(2)).unwrap().class, m.h(2));
        let mu = m.curve_class(CurveName::Mu(1)).unwrap();
        assert_eq!(mu.class, m.x(1));
        assert!(!mu.two_sided);
        assert!(matches!(m.twist_matrix(&mu), Err(Error::OneSided(_))));
        assert!(m.curve_class(CurveName::Alpha(4)).is_err());
    }

    #[test]
    fn transvection_examples() {
        let m = Model::new(3, 2).unwrap();
        assert!(m.assign(D(1)).unwrap().is_identity());
        let a1 = m.assign(A(1)).unwrap();
        assert_eq!(a1.apply(m.x(1) | m.x(2)), m.x(1) | m.x(2));
        assert_eq!(a1.apply(m.x(1)), m.x(2));
        assert!(a1.mul(&a1).is_identity());
    }

    #[test]
    fn y_matrix_examples() {
        let m = Model::new(5, 2).unwrap();
        let y = m.assign(Y).unwrap();
        assert!(y.mul(&y).is_identity());
        assert!(m.preserves_form(&y));
        let d = m.curve_class(CurveName::SlideBoundary(1, 3, 1)).unwrap();
        let mu = m.curve_class(CurveName::Mu(1)).unwrap();
        let nu = m.curve_class(CurveName::Nu(1, 3)).unwrap();
        assert!(m.y_matrix(&mu, &nu, &d, &d).unwrap().is_identity());
        let alpha = m.curve_class(CurveName::Alpha(1)).unwrap();
        assert!(m.y_matrix(&alpha, &mu, &d, &d).is_err());
    }

    #[test]
    fn braid_relation_a2() {
        let m = Model::new(4, 1).unwrap();
        let p = crate::catalog::stukow_presentation(4);
        let rep = m.rep(&p.alphabet).unwrap();
        for r in p.relators.iter().filter(|r| r.family == "A2") {
            assert_eq!(rep.verify(&r.word).unwrap(), Verdict::Identity);
        }
        // a braid, not a commutation: [a1, a2] acts nontrivially.
        let c = Word::commutator(&Word::gen(A(1)), &Word::gen(A(2)));
        assert_ne!(rep.verify(&c).unwrap(), Verdict::Identity);
    }

    #[test]
    fn full_grid_small_corner() {
        for (g, n) in [(1, 1), (2, 1), (3, 2), (4, 3), (5, 2)] {
            let r = verify_presentation(g, n).unwrap();
            assert!(r.passed(), "({g},{n}): {:?}", r.families.iter().find(|f| f.1.failed > 0));
        }
    }

    #[test]
    fn wrong_relator_is_caught() {
        let m = Model::new(3, 2).unwrap();
        let rep = m.rep(&crate::catalog::full_alphabet(3, 2)).unwrap();
        let w = Word::reduce([(ASub(1, 1), 1), (A(2), 1), (ASub(1, 1), -1), (A(2), -1)]);
        match rep.verify(&w).unwrap() {
            Verdict::Moves { .. } => {}
            Verdict::Identity => panic!("[a_{{1;1}}, a_2] should move something"),
        }
    }

    fn mat(dim: usize) -> impl Strategy<Value = RepMatrix> {
        prop::collection::vec(any::<u64>(), dim)
            .prop_map(move |v| RepMatrix::from_columns(v.into_iter().map(|c| c & ((1 << dim) - 1)).collect()))
    }

    proptest! {
        #[test]
        fn inverse_is_two_sided(a in mat(6)) {
            if let Some(inv) = a.inverse() {
                prop_assert!(a.mul(&inv).is_identity());
                prop_assert!(inv.mul(&a).is_identity());
            }
        }

        #[test]
        fn transvections_are_form_preserving_involutions(c in 0u64..(1 << 7)) {
            let m = Model::new(4, 4).unwrap();
            if !m.pairing(c, c) {
                let t = m.transvection(c);
                prop_assert!(m.preserves_form(&t));
                prop_assert!(t.mul(&t).is_identity());
                prop_assert_eq!(t.apply(c), c);
            }
        }

        #[test]
        fn product_matches_sequential_application(a in mat(5), b in mat(5), v in 0u64..32) {
            prop_assert_eq!(a.mul(&b).apply(v), a.apply(b.apply(v)));
        }
    }
}
