//! The lantern calculus for boundary-twist exponents.
//!
//! A two-sided loop `γ` based at the forgotten point has a lift
//! `Δ(γ) ∈ M(N_{g,n})`, a twist difference along the two boundary curves of
//! a neighbourhood of `γ`. Products of lifts differ from lifts of products
//! by a power of the new boundary twist `d = d_{n-1}`:
//!
//! * (L+) / (L−): `Δ(α)Δ(β) = Δ(αβ) d^{±1}`,
//! * (L0): `Δ(α)Δ(β) = Δ(αβ)`,
//!
//! and conjugating a lift by the image of a loop `λ` conjugates its loop:
//! `f Δ(γ) f^{-1} = Δ(λ γ λ^{-1})` where `f = push(λ)`. A derivation starts
//! from the right-hand side of a conjugation relator written with lifts of
//! named loops, rewrites it step by step and ends at `f x f^{-1}`; the
//! exponent collected on the way is the boundary exponent of the relator.
//!
//! The sign of each L-step is input data. Everything else is checked: the
//! starting expression must evaluate to the relator body, every
//! conjugation must match its neighbours, the final expression must
//! evaluate to the left-hand side, and every loop-action fact must be
//! compatible with the `Z/2` homology action.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::catalog::{primed_relators, Instance};
use crate::error::{Error, Result};
use crate::expr::{Expr, MacroMode, Std, Vars};
use crate::extension::EpsilonKey;
use crate::homology::Model;
use crate::subgroup::OrientationKernel;
use crate::symbol::Generator;
use crate::word::Word;

/// Named generators of the loop subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopName {
    /// `x_i^2`
    Square(u16),
    /// `x_{i+1} x_i`
    Adjacent(u16),
    /// `y_l`
    Y(u16),
    /// `x_j^{-1} y_l x_j`; `j = 1` is `ybar_l`.
    YBar(u16, u16),
}

impl LoopName {
    pub fn word(self) -> Word {
        use Generator::{X, YLoop};
        match self {
            LoopName::Square(i) => Word::power(X(i), 2),
            LoopName::Adjacent(i) => Word::reduce([(X(i + 1), 1), (X(i), 1)]),
            LoopName::Y(l) => Word::gen(YLoop(l)),
            LoopName::YBar(l, j) => Word::reduce([(X(j), -1), (YLoop(l), 1), (X(j), 1)]),
        }
    }
}

impl fmt::Display for LoopName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LoopName::Square(i) => write!(f, "x_{i}^2"),
            LoopName::Adjacent(i) => write!(f, "x_{}x_{i}", i + 1),
            LoopName::Y(l) => write!(f, "y_{l}"),
            LoopName::YBar(l, 1) => write!(f, "ybar_{l}"),
            LoopName::YBar(l, j) => write!(f, "ybar_{{{l};{j}}}"),
        }
    }
}

/// A loop in `π_1(N_{g,n-1})`, recognised as a named generator (or the
/// inverse of one) when possible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub word: Word,
    pub name: Option<(LoopName, bool)>,
}

impl Loop {
    pub fn new(word: Word) -> Loop {
        let name = classify(&word);
        Loop { word, name }
    }
}

fn classify(w: &Word) -> Option<(LoopName, bool)> {
    named(w).map(|n| (n, false)).or_else(|| named(&w.inverse()).map(|n| (n, true)))
}

fn named(w: &Word) -> Option<LoopName> {
    use Generator::{X, YLoop};
    Some(match *w.runs() {
        [(X(i), 2)] => LoopName::Square(i),
        [(X(a), 1), (X(b), 1)] if a == b + 1 => LoopName::Adjacent(b),
        [(YLoop(l), 1)] => LoopName::Y(l),
        [(X(j), -1), (YLoop(l), 1), (X(j2), 1)] if j == j2 => LoopName::YBar(l, j),
        _ => return None,
    })
}

/// Parity of the `x`-exponent sum; lifts exist only for even loops.
fn is_two_sided(w: &Word) -> bool {
    w.runs().iter().filter(|(g, _)| matches!(g, Generator::X(_))).map(|&(_, e)| e).sum::<i32>() % 2 == 0
}

/// One factor of a lift expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    /// `Δ(γ)`; an inverse `Δ(γ)^{-1}` is stored as `Δ(γ^{-1})`.
    Delta(Word),
    /// A word in the generators of `M(N_{g,n})`.
    Gen(Word),
    /// `d^k` for the new boundary twist.
    Central(i32),
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Delta(w) => write!(f, "D{{{w}}}"),
            Factor::Gen(w) => write!(f, "G{{{w}}}"),
            Factor::Central(k) => write!(f, "d^{k}"),
        }
    }
}

/// A product of factors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeltaExpr {
    pub factors: Vec<Factor>,
}

impl fmt::Display for DeltaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl DeltaExpr {
    /// Parses `G{expr}`, `D{loop}` (each optionally `^-1`) and `d^k`
    /// factors, evaluating the inner expressions under `vars`.
    pub fn parse(src: &str, vars: &Vars) -> Result<DeltaExpr> {
        let gens = Std::GENS;
        let mut factors = Vec::new();
        let s = src.trim();
        let b = s.as_bytes();
        let mut p = 0;
        let err = |m: &str, at: usize| Error::Parse(format!("{m} at byte {at} of `{src}`"));
        while p < b.len() {
            if b[p].is_ascii_whitespace() {
                p += 1;
                continue;
            }
            match b[p] {
                b'd' if b.get(p + 1) == Some(&b'^') => {
                    let start = p + 2;
                    let mut q = start;
                    if b.get(q) == Some(&b'-') {
                        q += 1;
                    }
                    while q < b.len() && b[q].is_ascii_digit() {
                        q += 1;
                    }
                    let k = s[start..q].parse().map_err(|_| err("bad central exponent", start))?;
                    factors.push(Factor::Central(k));
                    p = q;
                }
                tag @ (b'G' | b'D') => {
                    if b.get(p + 1) != Some(&b'{') {
                        return Err(err("expected `{`", p + 1));
                    }
                    let open = p + 1;
                    let mut depth = 0;
                    let mut close = None;
                    for (q, &c) in b.iter().enumerate().skip(open) {
                        match c {
                            b'{' => depth += 1,
                            b'}' => {
                                depth -= 1;
                                if depth == 0 {
                                    close = Some(q);
                                    break;
                                }
                            }
                            _ => {}
                        }
                    }
                    let close = close.ok_or_else(|| err("unbalanced `{`", open))?;
                    let mut w = Expr::parse(&s[open + 1..close])?.eval(vars, &gens)?;
                    p = close + 1;
                    if s[p..].starts_with("^-1") {
                        w = w.inverse();
                        p += 3;
                    }
                    factors.push(if tag == b'G' { Factor::Gen(w) } else { Factor::Delta(w) });
                }
                _ => return Err(err("expected a factor", p)),
            }
        }
        Ok(DeltaExpr { factors })
    }

    /// Total exponent of the `d^k` factors.
    pub fn central_exponent(&self) -> i32 {
        self.factors.iter().map(|f| if let Factor::Central(k) = f { *k } else { 0 }).sum()
    }

    /// The factors other than `d^k`.
    pub fn noncentral(&self) -> Vec<&Factor> {
        self.factors.iter().filter(|f| !matches!(f, Factor::Central(_))).collect()
    }
}

/// Rule of a derivation step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    LPlus,
    LMinus,
    LZero,
    ConjPush,
    SubstGen,
    LedgerAction,
    InsertPair,
}

impl Rule {
    pub fn parse(s: &str) -> Result<Rule> {
        Ok(match s {
            "L_PLUS" => Rule::LPlus,
            "L_MINUS" => Rule::LMinus,
            "L_ZERO" => Rule::LZero,
            "CONJ_PUSH" => Rule::ConjPush,
            "SUBST_GEN" => Rule::SubstGen,
            "LEDGER_ACTION" => Rule::LedgerAction,
            "INSERT_PAIR" => Rule::InsertPair,
            _ => return Err(Error::Parse(format!("unknown rule `{s}`"))),
        })
    }

    pub fn tag(self) -> &'static str {
        match self {
            Rule::LPlus => "L_PLUS",
            Rule::LMinus => "L_MINUS",
            Rule::LZero => "L_ZERO",
            Rule::ConjPush => "CONJ_PUSH",
            Rule::SubstGen => "SUBST_GEN",
            Rule::LedgerAction => "LEDGER_ACTION",
            Rule::InsertPair => "INSERT_PAIR",
        }
    }

    /// Exponent of `d` produced by a merge; zero for every other rule.
    pub fn epsilon(self) -> i32 {
        match self {
            Rule::LPlus => 1,
            Rule::LMinus => -1,
            _ => 0,
        }
    }
}

/// A loop-action fact `map(loop) = image`.
#[derive(Clone, Debug)]
pub struct LoopFact {
    pub key: String,
    pub map: Expr,
    pub loop_: Expr,
    pub image: Expr,
    pub note: String,
}

/// A fact evaluated under concrete indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundFact {
    pub key: String,
    pub map: Word,
    pub loop_: Word,
    pub image: Word,
}

impl LoopFact {
    pub fn bind(&self, vars: &Vars) -> Result<BoundFact> {
        let res = Std::GENS;
        Ok(BoundFact {
            key: self.key.clone(),
            map: self.map.eval(vars, &res)?,
            loop_: self.loop_.eval(vars, &res)?,
            image: self.image.eval(vars, &res)?,
        })
    }
}

/// The loop-action ledger.
#[derive(Clone, Debug, Default)]
pub struct LoopLedger {
    facts: BTreeMap<String, LoopFact>,
}

fn records(src: &str) -> Vec<Vec<(&str, &str)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for line in src.lines() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            continue;
        }
        let (k, v) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        cur.push((k, v.trim()));
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

impl LoopLedger {
    pub fn parse(src: &str) -> Result<LoopLedger> {
        let mut facts = BTreeMap::new();
        for rec in records(src) {
            let get = |k: &str| {
                rec.iter()
                    .find(|(key, _)| *key == k)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| Error::Ledger(format!("record {rec:?} lacks `{k}`")))
            };
            let key = get("key")?.to_string();
            let fact = LoopFact {
                key: key.clone(),
                map: Expr::parse(get("map")?)?,
                loop_: Expr::parse(get("loop")?)?,
                image: Expr::parse(get("image")?)?,
                note: get("note").unwrap_or("").to_string(),
            };
            if facts.insert(key.clone(), fact).is_some() {
                return Err(Error::Ledger(format!("duplicate key `{key}`")));
            }
        }
        Ok(LoopLedger { facts })
    }

    pub fn builtin() -> &'static LoopLedger {
        static L: OnceLock<LoopLedger> = OnceLock::new();
        L.get_or_init(|| {
            LoopLedger::parse(include_str!("../data/loop_actions.txt")).expect("bundled loop ledger parses")
        })
    }

    pub fn get(&self, key: &str) -> Result<&LoopFact> {
        self.facts.get(key).ok_or_else(|| Error::Ledger(format!("no loop fact `{key}`")))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.facts.keys().map(String::as_str)
    }
}

/// A step with its operands evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule: Rule,
    pub pos: usize,
    /// Conjugating loop, inserted loop or substituted loop.
    pub loop_: Option<Word>,
    pub fact: Option<BoundFact>,
}

impl Step {
    pub fn merge(rule: Rule, pos: usize) -> Step {
        Step { rule, pos, loop_: None, fact: None }
    }

    pub fn with_loop(rule: Rule, pos: usize, w: Word) -> Step {
        Step { rule, pos, loop_: Some(w), fact: None }
    }
}

fn is_central(g: &Generator) -> bool {
    matches!(g, Generator::D(_))
}

/// Equality in `M(N_{g,n})` after moving the central boundary twists out.
fn central_eq(a: &Word, b: &Word) -> bool {
    a.central_split(is_central) == b.central_split(is_central)
}

/// Equality of conjugators, where boundary twists act trivially.
fn conj_eq(a: &Word, b: &Word) -> bool {
    a.central_split(is_central).0 == b.central_split(is_central).0
}

/// The calculus on `N_{g,n}`, whose new boundary is `d_{n-1}`.
#[derive(Clone, Debug)]
pub struct Calculus {
    pub g: u16,
    pub n: u16,
    kernel: OrientationKernel,
}

impl Calculus {
    pub fn new(g: u16, n: u16) -> Result<Calculus> {
        Ok(Calculus { g, n, kernel: OrientationKernel::new(g, n)? })
    }

    pub fn central(&self) -> Generator {
        Generator::D(self.n - 1)
    }

    fn check_loop(&self, w: &Word) -> Result<()> {
        for s in w.symbols() {
            let ok = match s {
                Generator::X(i) => (1..=self.g).contains(&i),
                Generator::YLoop(l) => (1..=self.kernel.m).contains(&l),
                _ => false,
            };
            if !ok {
                return Err(Error::UnknownSymbol(format!("{s} in loop {w}")));
            }
        }
        if !is_two_sided(w) {
            return Err(Error::NotInSubgroup(w.to_string()));
        }
        Ok(())
    }

    /// Image of a two-sided loop under the pushing homomorphism.
    pub fn push_word(&self, w: &Word) -> Result<Word> {
        self.check_loop(w)?;
        self.kernel.push(w)
    }

    /// `Δ(γ)` for a named loop (or the inverse of one).
    pub fn delta_assign(&self, l: &Loop) -> Result<Word> {
        if l.name.is_none() {
            return Err(Error::UnnamedLoop(l.word.to_string()));
        }
        self.push_word(&l.word)
    }

    /// Word in `M(N_{g,n})` represented by an expression. Every lift must
    /// be of a named loop.
    pub fn eval(&self, e: &DeltaExpr) -> Result<Word> {
        let mut out = Word::identity();
        for f in &e.factors {
            match f {
                Factor::Delta(w) => out.push_word(&self.delta_assign(&Loop::new(w.clone()))?),
                Factor::Gen(w) => out.push_word(w),
                Factor::Central(k) => out.push(self.central(), *k),
            }
        }
        Ok(out)
    }

    /// Applies one step. Merges append their `d^ε` at the end so that
    /// positions of the remaining factors are unchanged.
    pub fn apply_step(&self, e: &DeltaExpr, s: &Step) -> Result<DeltaExpr> {
        let mut f = e.factors.clone();
        let p = s.pos;
        let at = |q: usize| f.get(q).ok_or_else(|| shape(format!("no factor at position {q}")));
        let delta_at = |q: usize| match at(q)? {
            Factor::Delta(w) => Ok(w.clone()),
            other => Err(shape(format!("factor {q} is {other}, not a lift"))),
        };
        let gen_at = |q: usize| match at(q)? {
            Factor::Gen(w) => Ok(w.clone()),
            other => Err(shape(format!("factor {q} is {other}, not a generator word"))),
        };
        let need_loop = || s.loop_.clone().ok_or_else(|| shape(format!("{} needs a loop", s.rule.tag())));
        match s.rule {
            Rule::LPlus | Rule::LMinus | Rule::LZero => {
                let a = delta_at(p)?;
                let b = delta_at(p + 1)?;
                let ab = &a * &b;
                f.splice(p..p + 2, (!ab.is_identity()).then_some(Factor::Delta(ab)));
                if s.rule != Rule::LZero {
                    f.push(Factor::Central(s.rule.epsilon()));
                }
            }
            Rule::ConjPush => {
                if p == 0 {
                    return Err(shape("conjugation needs a left neighbour".into()));
                }
                let gamma = delta_at(p)?;
                let lambda = match (&f[p - 1], at(p + 1)?) {
                    (Factor::Delta(l), Factor::Delta(r)) => {
                        if *r != l.inverse() {
                            return Err(shape(format!("lifts {l} and {r} are not mutually inverse")));
                        }
                        if let Some(given) = &s.loop_ {
                            if given != l {
                                return Err(shape(format!("stated loop {given} differs from {l}")));
                            }
                        }
                        l.clone()
                    }
                    (Factor::Gen(l), Factor::Gen(r)) => {
                        let lambda = need_loop()?;
                        let pushed = self.push_word(&lambda)?;
                        if !conj_eq(l, &pushed) || !conj_eq(r, &pushed.inverse()) {
                            return Err(shape(format!(
                                "neighbours {l} and {r} are not push({lambda}) = {pushed} and its inverse"
                            )));
                        }
                        lambda
                    }
                    (l, r) => return Err(shape(format!("mismatched neighbours {l} and {r}"))),
                };
                f.splice(p - 1..p + 2, [Factor::Delta(gamma.conjugate(&lambda))]);
            }
            Rule::SubstGen => {
                let w = gen_at(p)?;
                let gamma = need_loop()?;
                let lift = self.delta_assign(&Loop::new(gamma.clone()))?;
                if !central_eq(&w, &lift) {
                    return Err(shape(format!("{w} is not the lift {lift} of {gamma}")));
                }
                f[p] = Factor::Delta(gamma);
            }
            Rule::InsertPair => {
                let gamma = need_loop()?;
                self.check_loop(&gamma)?;
                if p > f.len() {
                    return Err(shape(format!("insertion point {p} past the end")));
                }
                f.splice(p..p, [Factor::Delta(gamma.inverse()), Factor::Delta(gamma)]);
            }
            Rule::LedgerAction => {
                let fact = s.fact.as_ref().ok_or_else(|| shape("ledger step without a fact".into()))?;
                match at(p)? {
                    Factor::Delta(w) if *w == fact.image => {
                        f.splice(
                            p..p + 1,
                            [
                                Factor::Gen(fact.map.clone()),
                                Factor::Delta(fact.loop_.clone()),
                                Factor::Gen(fact.map.inverse()),
                            ],
                        );
                    }
                    Factor::Gen(m)
                        if *m == fact.map
                            && f.get(p + 1) == Some(&Factor::Delta(fact.loop_.clone()))
                            && f.get(p + 2) == Some(&Factor::Gen(fact.map.inverse())) =>
                    {
                        f.splice(p..p + 3, [Factor::Delta(fact.image.clone())]);
                    }
                    other => {
                        return Err(shape(format!(
                            "fact `{}` does not apply to {other}: expected Δ({})",
                            fact.key, fact.image
                        )))
                    }
                }
            }
        }
        Ok(DeltaExpr { factors: f })
    }

    /// Replays `steps` from `start` and compares with `end` factor by factor
    /// and with `claimed_epsilon`, where `f x f^{-1} = body · d^ε` and so
    /// `ε` is minus the collected exponent.
    pub fn check_derivation(
        &self,
        steps: &[Step],
        start: &DeltaExpr,
        end: &DeltaExpr,
        claimed_epsilon: i32,
    ) -> Result<Replay> {
        let mut e = start.clone();
        for (idx, s) in steps.iter().enumerate() {
            e = self.apply_step(&e, s).map_err(|err| Error::Derivation {
                name: format!("step {} ({} {})", idx + 1, s.rule.tag(), s.pos),
                detail: err.to_string(),
            })?;
        }
        let collected = e.central_exponent();
        let matches_end = e.noncentral() == end.noncentral();
        let facts = steps
            .iter()
            .filter_map(|s| s.fact.as_ref())
            .map(|f| self.homology_check(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Replay {
            end: e,
            epsilon: -collected,
            matches_end,
            matches_epsilon: -collected == claimed_epsilon,
            facts,
        })
    }

    /// Class of a loop in `H_1(N_{g,n}; Z/2)`.
    pub fn loop_class(&self, model: &Model, w: &Word) -> Result<u64> {
        let mut v = 0;
        for &(g, e) in w.runs() {
            if e % 2 == 0 {
                continue;
            }
            v ^= match g {
                Generator::X(i) => model.x(i),
                Generator::YLoop(l) => model.h(l),
                other => return Err(Error::UnknownSymbol(other.to_string())),
            };
        }
        Ok(v)
    }

    /// `M(map) · [loop] = [image]` over `Z/2`.
    pub fn homology_check(&self, f: &BoundFact) -> Result<FactCheck> {
        let model = Model::new(self.g, self.n)?;
        let alphabet: Vec<Generator> = f.map.symbols().into_iter().collect();
        let m = model.rep(&alphabet)?.eval(&f.map)?;
        let source = self.loop_class(&model, &f.loop_)?;
        let image = self.loop_class(&model, &f.image)?;
        let moved = m.apply(source);
        Ok(FactCheck { key: f.key.clone(), expected: image, actual: moved, holds: moved == image })
    }
}

fn shape(detail: String) -> Error {
    Error::Derivation { name: "step".into(), detail }
}

/// Outcome of a homology cross-check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactCheck {
    pub key: String,
    pub expected: u64,
    pub actual: u64,
    pub holds: bool,
}

/// Result of replaying one derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    pub end: DeltaExpr,
    pub epsilon: i32,
    pub matches_end: bool,
    pub matches_epsilon: bool,
    pub facts: Vec<FactCheck>,
}

impl Replay {
    pub fn holds(&self) -> bool {
        self.matches_end && self.matches_epsilon && self.facts.iter().all(|f| f.holds)
    }
}

/// A step as written in a derivation file.
#[derive(Clone, Debug)]
pub struct StepSpec {
    pub rule: Rule,
    pub pos: usize,
    pub operand: Option<String>,
}

/// A derivation file: one `(family, branch)` of the conjugation table.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub name: String,
    pub family: String,
    pub branch: String,
    /// Exponent the replay must produce.
    pub epsilon: i32,
    /// Exponent stated in the closing sentence of the worked computation.
    pub stated: i32,
    pub note: String,
    pub start: String,
    pub steps: Vec<StepSpec>,
    pub end: String,
}

impl Derivation {
    pub fn parse(name: &str, src: &str) -> Result<Derivation> {
        let bad = |m: String| Error::Derivation { name: name.to_string(), detail: m };
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        let mut steps = Vec::new();
        for line in src.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let v = v.trim();
            if k == "step" {
                let mut it = v.splitn(3, char::is_whitespace);
                let rule = Rule::parse(it.next().unwrap_or(""))?;
                let pos = it
                    .next()
                    .and_then(|p| p.parse().ok())
                    .ok_or_else(|| bad(format!("step `{v}` lacks a position")))?;
                let operand = it.next().map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
                steps.push(StepSpec { rule, pos, operand });
            } else if fields.insert(k, v).is_some() {
                return Err(bad(format!("duplicate field `{k}`")));
            }
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(format!("missing `{k}`")));
        let int = |k: &str| get(k)?.parse::<i32>().map_err(|_| bad(format!("`{k}` is not an integer")));
        let epsilon = int("epsilon")?;
        Ok(Derivation {
            name: name.to_string(),
            family: get("family")?.to_string(),
            branch: get("branch")?.to_string(),
            epsilon,
            stated: if fields.contains_key("stated") { int("stated")? } else { epsilon },
            note: fields.get("note").copied().unwrap_or("").to_string(),
            start: get("start")?.to_string(),
            steps,
            end: get("end")?.to_string(),
        })
    }

    pub fn key(&self) -> EpsilonKey {
        (self.family.clone(), self.branch.clone())
    }

    /// Evaluates the step operands under `vars`.
    pub fn bind_steps(&self, vars: &Vars, ledger: &LoopLedger) -> Result<Vec<Step>> {
        self.steps
            .iter()
            .map(|s| {
                let mut step = Step::merge(s.rule, s.pos);
                match (s.rule, &s.operand) {
                    (Rule::LedgerAction, Some(key)) => step.fact = Some(ledger.get(key)?.bind(vars)?),
                    (Rule::LedgerAction, None) => {
                        return Err(Error::Ledger(format!("{}: ledger step without key", self.name)))
                    }
                    (_, Some(src)) => step.loop_ = Some(Expr::parse(src)?.eval(vars, &Std::GENS)?),
                    (_, None) => {}
                }
                Ok(step)
            })
            .collect()
    }

    /// Replays the derivation on one instance of its relator family.
    pub fn replay(&self, inst: &Instance, g: u16, n: u16, ledger: &LoopLedger) -> Result<InstanceReplay> {
        let calc = Calculus::new(g, n)?;
        let vars = &inst.vars;
        let ctx = |e: Error| Error::Derivation { name: self.name.clone(), detail: e.to_string() };
        let start = DeltaExpr::parse(&self.start, vars).map_err(ctx)?;
        let end = DeltaExpr::parse(&self.end, vars).map_err(ctx)?;
        let steps = self.bind_steps(vars, ledger).map_err(ctx)?;
        let (f, x, body) = inst.parts(MacroMode::Generators)?;
        let start_ok = central_eq(&calc.eval(&start).map_err(ctx)?, &body);
        let end_ok = central_eq(&calc.eval(&end).map_err(ctx)?, &x.conjugate(&f));
        let replay = calc.check_derivation(&steps, &start, &end, self.epsilon).map_err(ctx)?;
        Ok(InstanceReplay { bindings: vars.bindings(), start_ok, end_ok, replay })
    }
}

/// Replay of a derivation on one index tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceReplay {
    pub bindings: Vec<(char, i64)>,
    /// The start evaluates to the relator body.
    pub start_ok: bool,
    /// The claimed end evaluates to `f x f^{-1}`.
    pub end_ok: bool,
    pub replay: Replay,
}

impl InstanceReplay {
    pub fn holds(&self) -> bool {
        self.start_ok && self.end_ok && self.replay.holds()
    }
}

/// All replays of one derivation on `N_{g,n}`.
#[derive(Clone, Debug)]
pub struct DerivationReport {
    pub name: String,
    pub key: EpsilonKey,
    pub epsilon: i32,
    pub stated: i32,
    pub instances: Vec<std::result::Result<InstanceReplay, String>>,
}

impl DerivationReport {
    pub fn holds(&self) -> bool {
        self.instances.iter().all(|r| matches!(r, Ok(r) if r.holds()))
    }

    /// First failure, if any.
    pub fn first_failure(&self) -> Option<String> {
        self.instances.iter().find_map(|r| match r {
            Err(e) => Some(e.clone()),
            Ok(r) if !r.holds() => Some(format!(
                "{:?}: start {} end {} final {} ε {} facts {:?}",
                r.bindings, r.start_ok, r.end_ok, r.replay.matches_end, r.replay.epsilon, r.replay.facts
            )),
            _ => None,
        })
    }
}

/// The bundled derivations.
pub fn derivations() -> &'static [Derivation] {
    static D: OnceLock<Vec<Derivation>> = OnceLock::new();
    D.get_or_init(|| {
        macro_rules! file {
            ($f:literal) => {
                ($f, include_str!(concat!("../data/derivations/", $f, ".deriv")))
            };
        }
        [
            file!("d1d_m_eq_i_minus_1"),
            file!("d1e_m_eq_i"),
            file!("d1e_m_eq_i_plus_1"),
            file!("d1g_i_eq_1"),
            file!("d2c_i_eq_1"),
            file!("d2c_i_eq_2"),
            file!("d2c_i_eq_3"),
            file!("d2c_i_eq_4"),
            file!("d2d_m_eq_i_minus_1"),
            file!("d2g_i_eq_1"),
        ]
        .into_iter()
        .map(|(name, src)| Derivation::parse(name, src).expect("bundled derivation parses"))
        .collect()
    })
}

/// Replays every bundled derivation on every matching instance of
/// `N_{g,n}`, in parallel. Reports are in file order.
pub fn check_derivations(g: u16, n: u16) -> Result<Vec<DerivationReport>> {
    let table = primed_relators(g, n, MacroMode::Generators)?;
    let ledger = LoopLedger::builtin();
    let reports = derivations()
        .par_iter()
        .map(|d| {
            let instances: Vec<&Instance> = table
                .iter()
                .map(|(i, _)| i)
                .filter(|i| format!("{}'", i.family.tag) == d.family && i.branch.name == d.branch)
                .collect();
            let instances = instances
                .par_iter()
                .map(|i| d.replay(i, g, n, ledger).map_err(|e| e.to_string()))
                .collect();
            DerivationReport { name: d.name.clone(), key: d.key(), epsilon: d.epsilon, stated: d.stated, instances }
        })
        .collect();
    Ok(reports)
}

/// One line of the summary file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SummaryLine {
    Claim { family: String, branch: String, value: i32 },
    Alias { from: EpsilonKey, to: EpsilonKey },
}

/// Exponents listed without a worked computation.
#[derive(Clone, Debug, Default)]
pub struct Summary {
    pub claims: Vec<(EpsilonKey, i32)>,
    pub aliases: BTreeMap<EpsilonKey, EpsilonKey>,
}

impl Summary {
    pub fn parse(src: &str) -> Result<Summary> {
        let mut s = Summary::default();
        for line in src.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let w: Vec<&str> = line.split_whitespace().collect();
            match w.as_slice() {
                ["claim", fam, br, v] => {
                    let v = v.parse().map_err(|_| Error::Parse(format!("bad value in `{line}`")))?;
                    s.claims.push(((fam.to_string(), br.to_string()), v));
                }
                ["alias", f1, b1, "=>", f2, b2] => {
                    s.aliases.insert((f1.to_string(), b1.to_string()), (f2.to_string(), b2.to_string()));
                }
                _ => return Err(Error::Parse(format!("bad summary line `{line}`"))),
            }
        }
        Ok(s)
    }

    pub fn builtin() -> &'static Summary {
        static S: OnceLock<Summary> = OnceLock::new();
        S.get_or_init(|| Summary::parse(include_str!("../data/epsilon_summary.txt")).expect("bundled summary parses"))
    }

    /// Claims with aliases applied, plus one warning per alias used.
    pub fn resolved(&self) -> (BTreeMap<EpsilonKey, i32>, Vec<String>) {
        let mut out = BTreeMap::new();
        let mut warnings = Vec::new();
        for (key, v) in &self.claims {
            let target = match self.aliases.get(key) {
                Some(t) => {
                    warnings.push(format!(
                        "summary lists {} {} = {v}; read as {} {}",
                        key.0, key.1, t.0, t.1
                    ));
                    t.clone()
                }
                None => key.clone(),
            };
            out.insert(target, *v);
        }
        (out, warnings)
    }
}

/// Where an exponent comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Derivation,
    Summary,
    Default,
}

/// Boundary exponents of the conjugation relators of `N_{g,n}`.
#[derive(Clone, Debug, Default)]
pub struct EpsilonTable {
    pub values: BTreeMap<EpsilonKey, i32>,
    pub sources: BTreeMap<EpsilonKey, Source>,
    pub warnings: Vec<String>,
}

/// The exponent of every `(family', branch)` occurring on `N_{g,n}`:
/// a derivation that replays on all its instances wins, then the summary,
/// then zero. Disagreements are reported as warnings.
pub fn epsilon_table(g: u16, n: u16) -> Result<EpsilonTable> {
    let reports = check_derivations(g, n)?;
    let (summary, mut warnings) = Summary::builtin().resolved();
    let mut worked = BTreeMap::new();
    for d in derivations() {
        if d.stated != d.epsilon {
            warnings.push(format!(
                "{} {}: stated exponent {} differs from the replayed {}",
                d.family, d.branch, d.stated, d.epsilon
            ));
        }
        if let Some(&v) = summary.get(&d.key()) {
            if v != d.epsilon {
                warnings.push(format!("{} {}: summary {v} differs from derivation {}", d.family, d.branch, d.epsilon));
            }
        }
    }
    for r in &reports {
        if r.instances.is_empty() {
            continue;
        }
        if r.holds() {
            worked.insert(r.key.clone(), r.epsilon);
        } else {
            warnings.push(format!(
                "{} does not replay on N_{{{g},{n}}}: {}",
                r.name,
                r.first_failure().unwrap_or_default()
            ));
        }
    }
    let mut table = EpsilonTable { warnings, ..Default::default() };
    for (inst, _) in primed_relators(g, n, MacroMode::Generators)? {
        let key = (format!("{}'", inst.family.tag), inst.branch.name.to_string());
        let (v, src) = if let Some(&v) = worked.get(&key) {
            (v, Source::Derivation)
        } else if let Some(&v) = summary.get(&key) {
            (v, Source::Summary)
        } else {
            (0, Source::Default)
        };
        table.values.insert(key.clone(), v);
        table.sources.insert(key, src);
    }
    Ok(table)
}

/// `(family', branch, ε, printed tail)` for every branch where the tail of
/// the unprimed relator is not `d_k^ε`.
pub fn tail_mismatches(table: &EpsilonTable) -> Vec<(String, String, i32, i32)> {
    let mut out = Vec::new();
    for ((fam, br), &eps) in &table.values {
        let Some(f) = crate::catalog::family(fam.trim_end_matches('\'')) else { continue };
        if let Some(b) = f.branch_named(br) {
            if b.tail != eps {
                out.push((fam.clone(), br.clone(), eps, b.tail));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Generator::*;

    fn w(runs: &[(Generator, i32)]) -> Word {
        Word::reduce(runs.iter().copied())
    }

    #[test]
    fn named_loops_are_recognised_with_inverses() {
        assert_eq!(classify(&w(&[(X(3), 2)])), Some((LoopName::Square(3), false)));
        assert_eq!(classify(&w(&[(X(3), -2)])), Some((LoopName::Square(3), true)));
        assert_eq!(classify(&w(&[(X(3), 1), (X(2), 1)])), Some((LoopName::Adjacent(2), false)));
        assert_eq!(classify(&w(&[(X(2), -1), (X(3), -1)])), Some((LoopName::Adjacent(2), true)));
        assert_eq!(classify(&w(&[(YLoop(1), -1)])), Some((LoopName::Y(1), true)));
        let yb = w(&[(X(2), -1), (YLoop(1), 1), (X(2), 1)]);
        assert_eq!(classify(&yb), Some((LoopName::YBar(1, 2), false)));
        assert_eq!(classify(&yb.inverse()), Some((LoopName::YBar(1, 2), true)));
        assert_eq!(classify(&w(&[(X(2), 1), (X(3), 1)])), None);
        for name in [LoopName::Square(2), LoopName::Adjacent(1), LoopName::Y(2), LoopName::YBar(2, 3)] {
            assert_eq!(classify(&name.word()), Some((name, false)));
        }
    }

    #[test]
    fn delta_assign_examples() {
        let c = Calculus::new(3, 4).unwrap();
        let k = 3;
        let sq = c.delta_assign(&Loop::new(w(&[(X(2), 2)]))).unwrap();
        assert_eq!(sq, Word::gen(RSub(2, k)));
        let y = c.delta_assign(&Loop::new(Word::gen(YLoop(1)))).unwrap();
        assert_eq!(y, w(&[(S(1, k), 1), (D(1), -1)]));
        let adj = c.delta_assign(&Loop::new(w(&[(X(3), 1), (X(2), 1)]))).unwrap();
        assert_eq!(adj, w(&[(ASub(2, k), 1), (A(2), -1)]));
        let vars = Vars::new().with('k', k as i64);
        let sbtd = Expr::parse("Sbtd<2;3>").unwrap().eval(&vars, &Std::GENS).unwrap();
        let ybt = c.delta_assign(&Loop::new(LoopName::YBar(2, 3).word())).unwrap();
        assert!(central_eq(&ybt, &sbtd));
        assert!(matches!(
            c.delta_assign(&Loop::new(w(&[(X(1), 1), (X(3), 1)]))),
            Err(Error::UnnamedLoop(_))
        ));
    }

    #[test]
    fn merges_accumulate_central_powers() {
        let c = Calculus::new(3, 3).unwrap();
        let e = DeltaExpr::parse("D{yl<1>} D{x<2> x<1>} D{ybt<1;1>}^-1", &Vars::new()).unwrap();
        let e1 = c.apply_step(&e, &Step::merge(Rule::LPlus, 0)).unwrap();
        let e2 = c.apply_step(&e1, &Step::merge(Rule::LPlus, 0)).unwrap();
        assert_eq!(e2.central_exponent(), 2);
        assert_eq!(e2.noncentral().len(), 1);
    }

    #[test]
    fn inverse_pair_merges_to_nothing() {
        let c = Calculus::new(2, 2).unwrap();
        let e = DeltaExpr::parse("D{x<1>^2} D{x<1>^2}^-1", &Vars::new()).unwrap();
        let e = c.apply_step(&e, &Step::merge(Rule::LZero, 0)).unwrap();
        assert!(e.factors.is_empty());
    }

    #[test]
    fn shape_errors() {
        let c = Calculus::new(2, 2).unwrap();
        let e = DeltaExpr::parse("G{R<1>} D{x<1>^2}", &Vars::new().with('k', 1)).unwrap();
        assert!(c.apply_step(&e, &Step::merge(Rule::LPlus, 0)).is_err());
        assert!(c.apply_step(&e, &Step::merge(Rule::LPlus, 5)).is_err());
        assert!(c.apply_step(&e, &Step::merge(Rule::ConjPush, 1)).is_err());
        let lam = w(&[(X(1), 1)]);
        assert!(c.apply_step(&e, &Step::with_loop(Rule::InsertPair, 0, lam)).is_err());
    }

    #[test]
    fn conjugation_checks_the_pushed_neighbours() {
        let c = Calculus::new(3, 2).unwrap();
        let v = Vars::new().with('k', 1);
        let e = DeltaExpr::parse("G{R<2>^-1} D{x<2> x<1>} G{R<2>}", &v).unwrap();
        let lam = w(&[(X(2), -2)]);
        let out = c.apply_step(&e, &Step::with_loop(Rule::ConjPush, 1, lam.clone())).unwrap();
        assert_eq!(out.factors, vec![Factor::Delta(w(&[(X(2), 1), (X(1), 1)]).conjugate(&lam))]);
        assert!(c.apply_step(&e, &Step::with_loop(Rule::ConjPush, 1, lam.inverse())).is_err());
    }

    #[test]
    fn ledger_parses_and_every_fact_has_a_note_or_formula() {
        let l = LoopLedger::builtin();
        assert!(l.keys().count() >= 10);
        assert!(l.get("b_on_z2").is_ok());
        assert!(l.get("missing").is_err());
        assert!(LoopLedger::parse("key a\nmap b\n").is_err());
    }

    #[test]
    fn derivation_files_parse() {
        let ds = derivations();
        assert_eq!(ds.len(), 10);
        assert!(ds.iter().all(|d| !d.steps.is_empty()));
        assert!(Derivation::parse("x", "family D1a'\n").is_err());
    }

    #[test]
    fn summary_aliases_are_warned() {
        let (claims, warnings) = Summary::builtin().resolved();
        assert_eq!(claims.get(&("D2a'".into(), "m=i-1".into())), Some(&1));
        assert_eq!(claims.get(&("D1d'".into(), "m=i-1".into())), Some(&-1));
        assert_eq!(warnings.len(), 2);
    }

    fn report(name: &str, g: u16, n: u16) -> DerivationReport {
        check_derivations(g, n).unwrap().into_iter().find(|r| r.name == name).unwrap()
    }

    #[test]
    fn d1e_m_eq_i_replays_to_minus_two() {
        let r = report("d1e_m_eq_i", 3, 3);
        assert!(!r.instances.is_empty());
        assert!(r.holds(), "{:?}", r.first_failure());
        assert_eq!(r.epsilon, -2);
    }

    #[test]
    fn every_derivation_replays_somewhere() {
        for (g, n) in [(4, 4), (5, 4)] {
            for r in check_derivations(g, n).unwrap() {
                assert!(!r.instances.is_empty(), "{} has no instance on ({g},{n})", r.name);
                assert!(r.holds(), "{} on ({g},{n}): {:?}", r.name, r.first_failure());
            }
        }
    }

    #[test]
    fn a_wrong_merge_sign_is_caught() {
        let mut d = derivations()[0].clone();
        let s = d.steps.iter_mut().find(|s| s.rule == Rule::LPlus).unwrap();
        s.rule = Rule::LMinus;
        let table = primed_relators(3, 3, MacroMode::Generators).unwrap();
        let inst = table.iter().map(|(i, _)| i).find(|i| i.family.tag == "D1d" && i.branch.name == "m=i-1").unwrap();
        let r = d.replay(inst, 3, 3, LoopLedger::builtin()).unwrap();
        assert!(!r.holds());
        assert!(!r.replay.matches_epsilon);
    }

    #[test]
    fn table_matches_printed_tails() {
        for (g, n) in [(1, 2), (2, 3), (4, 4), (5, 3)] {
            let t = epsilon_table(g, n).unwrap();
            assert!(tail_mismatches(&t).is_empty(), "({g},{n}) {:?}", tail_mismatches(&t));
        }
    }
}
