//! Generator alphabets and relator families for `M(N_{g,n})`.
//!
//! The boundary families `D1a`..`D4g` are stored as a table: each family is
//! a conjugation `f x f^{-1} = body · d_k^{tail}` with one body per case
//! branch. Bodies are written in the expression language of [`crate::expr`];
//! the same table yields the relators of the full presentation (any level
//! `k`, with tails) and the conjugation table of the orientation subgroup
//! (level `k = n-1`, without tails). Boundary-twist tails are collected at
//! the end of each relator, which is legitimate because every `d_k` is
//! central.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::expr::{Expr, MacroMode, Std, Vars};
use crate::presentation::{Presentation, Relator};
use crate::symbol::Generator;
use crate::word::Word;

/// Genus and number of boundary components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SurfaceParams {
    pub g: u16,
    pub n: u16,
}

impl SurfaceParams {
    pub fn new(g: i64, n: i64) -> Result<Self> {
        if g < 1 || n < 0 || g > 64 || n > 64 {
            return Err(Error::InvalidSurface { g, n });
        }
        Ok(SurfaceParams { g: g as u16, n: n as u16 })
    }

    /// Closed surfaces are handled through the one-boundary model.
    pub fn effective(self) -> Self {
        SurfaceParams { g: self.g, n: self.n.max(1) }
    }
}

/// Generators of `M(N_{g,1})`: `a_1..a_{g-1}`, `y` for `g >= 2`, `b` for `g >= 4`.
pub fn stukow_alphabet(g: u16) -> Vec<Generator> {
    let mut v: Vec<Generator> = (1..g).map(Generator::A).collect();
    if g >= 2 {
        v.push(Generator::Y);
    }
    if g >= 4 {
        v.push(Generator::B);
    }
    v
}

/// Generators added for boundary component `k`: `d_k`, `a_{i;k}`, `r_{i;k}`,
/// `s_{i,k}`, `sbar_{i,k}`.
pub fn level_alphabet(g: u16, k: u16) -> Vec<Generator> {
    let mut v = vec![Generator::D(k)];
    v.extend((1..g).map(|i| Generator::ASub(i, k)));
    v.extend((1..=g).map(|i| Generator::RSub(i, k)));
    v.extend((1..k).map(|i| Generator::S(i, k)));
    v.extend((1..k).map(|i| Generator::SBar(i, k)));
    v
}

/// Full alphabet of `M(N_{g,n})`, `n >= 1`.
pub fn full_alphabet(g: u16, n: u16) -> Vec<Generator> {
    let mut v = stukow_alphabet(g);
    for k in 1..n {
        v.extend(level_alphabet(g, k));
    }
    v
}

/// Closed-form generator count
/// `(g-1) + [g>=2] + [g>=4] + (n-1)·2g + (n-1)(n-2)`.
pub fn generator_count(g: u16, n: u16) -> usize {
    let (g, n) = (g as usize, n.max(1) as usize);
    (g - 1) + (g >= 2) as usize + (g >= 4) as usize + (n - 1) * 2 * g + (n - 1) * n.saturating_sub(2)
}

fn parse(src: &str) -> Expr {
    Expr::parse(src).unwrap_or_else(|e| panic!("catalog expression `{src}`: {e}"))
}

fn eval_gens(src: &str, vars: &Vars) -> Word {
    parse(src).eval(vars, &Std::GENS).unwrap_or_else(|e| panic!("catalog expression `{src}`: {e}"))
}

fn rel(family: &str, lhs: &str, rhs: &str, vars: &Vars) -> Relator {
    let w = &eval_gens(lhs, vars) * &eval_gens(rhs, vars).inverse();
    Relator::new(family, w).with_branch("", vars.bindings())
}

/// `b_i` of the recursion `b_0 = a_1`, `b_1 = b`,
/// `b_{i+1} = (b_{i-1} a_{2i} a_{2i+1} a_{2i+2} a_{2i+3} b_i)^5 (b_{i-1} a_{2i} .. a_{2i+3})^{-6}`.
pub fn b_word(i: u16) -> Word {
    let mut prev = Word::gen(Generator::A(1));
    let mut cur = Word::gen(Generator::B);
    if i == 0 {
        return prev;
    }
    for p in 1..i {
        let mut block = prev.clone();
        for q in 0..4 {
            block.push(Generator::A(2 * p + q), 1);
        }
        let next = &(&block * &cur).pow(5) * &block.pow(-6);
        prev = cur;
        cur = next;
    }
    cur
}

/// Relators of `M(N_{g,1})`, families `A1`..`A9b`, `B1`..`B8`.
pub fn stukow_relators(g: u16) -> Vec<Relator> {
    let mut out = Vec::new();
    let v0 = Vars::new();
    if g >= 4 {
        for i in 1..g {
            for j in i + 2..g {
                out.push(rel("A1", "[a<i>, a<j>]", "1", &Vars::new().with('i', i as i64).with('j', j as i64)));
            }
        }
    }
    if g >= 3 {
        for i in 1..=g - 2 {
            out.push(rel("A2", "a<i> a<i+1> a<i>", "a<i+1> a<i> a<i+1>", &Vars::new().with('i', i as i64)));
        }
    }
    if g >= 4 {
        for i in (1..g).filter(|&i| i != 4) {
            out.push(rel("A3", "[a<i>, b]", "1", &Vars::new().with('i', i as i64)));
        }
    }
    if g >= 5 {
        out.push(rel("A4", "a<4> b a<4>", "b a<4> b", &v0));
        out.push(rel("A5", "(a<2> a<3> a<4> b)^10", "(a<1> a<2> a<3> a<4> b)^6", &v0));
    }
    if g >= 7 {
        out.push(rel(
            "A6",
            "(a<2> a<3> a<4> a<5> a<6> b)^12",
            "(a<1> a<2> a<3> a<4> a<5> a<6> b)^9",
            &v0,
        ));
    }
    if g == 6 {
        let w = Word::commutator(&b_word(2), &Word::gen(Generator::B));
        out.push(Relator::new("A9a", w));
    }
    if g >= 8 && g.is_multiple_of(2) {
        let w = Word::commutator(&Word::gen(Generator::A(g - 5)), &b_word((g - 2) / 2));
        out.push(Relator::new("A9b", w));
    }
    const U1: &str = "a<2> a<3> a<1> a<2> y a<2>^-1 a<1>^-1 a<3>^-1 a<2>^-1";
    if g >= 4 {
        out.push(rel("B1", &format!("y ({U1})"), &format!("({U1}) y"), &v0));
    }
    const U2: &str = "a<2> a<1> y^-1 a<2>^-1 y a<1> a<2>";
    if g >= 3 {
        out.push(rel("B2", &format!("y ({U2}) y"), &format!("a<1> ({U2}) a<1>"), &v0));
    }
    if g >= 4 {
        for i in 3..g {
            out.push(rel("B3", "[a<i>, y]", "1", &Vars::new().with('i', i as i64)));
        }
    }
    if g >= 3 {
        out.push(rel("B4", "a<2> (y a<2> y^-1)", "(y a<2> y^-1) a<2>", &v0));
    }
    if g >= 2 {
        out.push(rel("B5", "y a<1>", "a<1>^-1 y", &v0));
    }
    if g >= 4 {
        out.push(rel(
            "B6",
            "b y b y^-1",
            "{a<1> a<2> a<3> (y^-1 a<2> y) a<3>^-1 a<2>^-1 a<1>^-1} {a<2>^-1 a<3>^-1 (y a<2> y^-1) a<3> a<2>}",
            &v0,
        ));
    }
    if g >= 6 {
        out.push(rel(
            "B7",
            "[(a<4> a<5> a<3> a<4> a<2> a<3> a<1> a<2> y a<2>^-1 a<1>^-1 a<3>^-1 a<2>^-1 a<4>^-1 a<3>^-1 a<5>^-1 a<4>^-1), b]",
            "1",
            &v0,
        ));
    }
    if g >= 5 {
        out.push(rel(
            "B8",
            "{(y a<1>^-1 a<2>^-1 a<3>^-1 a<4>^-1) b (a<4> a<3> a<2> a<1> y^-1)} {(a<1>^-1 a<2>^-1 a<3>^-1 a<4>^-1) b^-1 (a<4> a<3> a<2> a<1>)}",
            "{(a<4>^-1 a<3>^-1 a<2>^-1) y (a<2> a<3> a<4>)} {a<3>^-1 a<2>^-1 y^-1 a<2> a<3>} {a<2>^-1 y a<2>} y^-1",
            &v0,
        ));
    }
    for r in &mut out {
        if r.indices.is_empty() {
            r.branch.clear();
        }
    }
    out
}

/// Presentation of `M(N_{g,1})`.
pub fn stukow_presentation(g: u16) -> Presentation {
    Presentation {
        surface: Some((g as u32, 1)),
        alphabet: stukow_alphabet(g),
        relators: stukow_relators(g),
    }
}

/// The element conjugated in a boundary family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XKind {
    /// `a_{i;k} a_i^{-1}`, `1 <= i <= g-1`.
    P,
    /// `r_{i;k}`, `1 <= i <= g`.
    R,
    /// `s_{j,k} d_j^{-1}`, `1 <= j < k`.
    Sd,
    /// `sbar_{j,k} d_j^{-1}`, `1 <= j < k`.
    Sbd,
}

impl XKind {
    fn expr(self) -> &'static str {
        match self {
            XKind::P => "P<i>",
            XKind::R => "R<i>",
            XKind::Sd => "Sd<j>",
            XKind::Sbd => "Sbd<j>",
        }
    }

    fn digit(self) -> char {
        match self {
            XKind::P => '1',
            XKind::R => '2',
            XKind::Sd => '3',
            XKind::Sbd => '4',
        }
    }

    fn var(self) -> char {
        match self {
            XKind::P | XKind::R => 'i',
            XKind::Sd | XKind::Sbd => 'j',
        }
    }

    fn range(self, g: u16, k: u16) -> std::ops::RangeInclusive<i64> {
        match self {
            XKind::P => 1..=g as i64 - 1,
            XKind::R => 1..=g as i64,
            XKind::Sd | XKind::Sbd => 1..=k as i64 - 1,
        }
    }
}

/// The conjugating generator of a boundary family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FKind {
    /// `a_m`
    A,
    /// `y`
    Y,
    /// `b`
    B,
    /// `a_{m;l}`
    ASub,
    /// `r_{m;l}`
    RSub,
    /// `s_{l,t}`
    S,
    /// `sbar_{l,t}`
    SBar,
    /// `d_l` (orientation-subgroup table only)
    D,
}

impl FKind {
    fn letter(self) -> char {
        match self {
            FKind::A => 'a',
            FKind::Y => 'b',
            FKind::B => 'c',
            FKind::ASub => 'd',
            FKind::RSub => 'e',
            FKind::S => 'f',
            FKind::SBar => 'g',
            FKind::D => 'h',
        }
    }

    fn expr(self) -> &'static str {
        match self {
            FKind::A => "a<m>",
            FKind::Y => "y",
            FKind::B => "b",
            FKind::ASub => "A<m;l>",
            FKind::RSub => "r<m;l>",
            FKind::S => "s<l,t>",
            FKind::SBar => "sb<l,t>",
            FKind::D => "d<l>",
        }
    }

    /// All bindings of `m`, `l`, `t` for this kind.
    fn bindings(self, g: u16, k: u16) -> Vec<Vec<(char, i64)>> {
        let (g, k) = (g as i64, k as i64);
        let mut out = Vec::new();
        match self {
            FKind::A => (1..g).for_each(|m| out.push(vec![('m', m)])),
            FKind::Y => {
                if g >= 2 {
                    out.push(vec![]);
                }
            }
            FKind::B => {
                if g >= 4 {
                    out.push(vec![]);
                }
            }
            FKind::ASub => {
                for m in 1..g {
                    for l in 1..k {
                        out.push(vec![('m', m), ('l', l)]);
                    }
                }
            }
            FKind::RSub => {
                for m in 1..=g {
                    for l in 1..k {
                        out.push(vec![('m', m), ('l', l)]);
                    }
                }
            }
            FKind::S | FKind::SBar => {
                for l in 1..k {
                    for t in l + 1..k {
                        out.push(vec![('l', l), ('t', t)]);
                    }
                }
            }
            FKind::D => (1..k).for_each(|l| out.push(vec![('l', l)])),
        }
        out
    }
}

/// Integer index tuple used by branch conditions.
#[derive(Clone, Copy, Debug, Default)]
pub struct Ix {
    pub i: i64,
    pub j: i64,
    pub m: i64,
    pub l: i64,
    pub t: i64,
}

impl Ix {
    fn from_vars(v: &Vars) -> Ix {
        Ix {
            i: v.get('i').unwrap_or(0),
            j: v.get('j').unwrap_or(0),
            m: v.get('m').unwrap_or(0),
            l: v.get('l').unwrap_or(0),
            t: v.get('t').unwrap_or(0),
        }
    }
}

/// One case of a boundary family.
#[derive(Clone, Debug)]
pub struct Branch {
    pub name: &'static str,
    pub cond: fn(&Ix) -> bool,
    pub body: Expr,
    /// Exponent of `d_k` on the right-hand side.
    pub tail: i32,
}

/// A boundary relator family `f x f^{-1} = body · d_k^{tail}`.
#[derive(Clone, Debug)]
pub struct Family {
    pub tag: String,
    pub x: XKind,
    pub f: FKind,
    pub branches: Vec<Branch>,
}

impl Family {
    /// The first branch whose condition holds.
    pub fn branch(&self, ix: &Ix) -> &Branch {
        self.branches
            .iter()
            .find(|b| (b.cond)(ix))
            .unwrap_or_else(|| panic!("family {} has no branch for {ix:?}", self.tag))
    }

    pub fn branch_named(&self, name: &str) -> Option<&Branch> {
        self.branches.iter().find(|b| b.name == name)
    }
}

fn all(_: &Ix) -> bool {
    true
}

/// `{c}^-1 x {c}`
fn cj(c: &str, x: &str) -> String {
    format!("{{{c}}}^-1 {x} {{{c}}}")
}

/// `[a,b]^-1 x [a,b]`
fn cm(a: &str, b: &str, x: &str) -> String {
    format!("[{a}, {b}]^-1 {x} [{a}, {b}]")
}

fn br(name: &'static str, cond: fn(&Ix) -> bool, body: &str, tail: i32) -> Branch {
    Branch { name, cond, body: parse(body), tail }
}

fn fam(x: XKind, f: FKind, branches: Vec<Branch>) -> Family {
    Family { tag: format!("D{}{}", x.digit(), f.letter()), x, f, branches }
}

fn build_families() -> Vec<Family> {
    use FKind as F;
    use XKind as X;
    let q = "[Sbd<l>, Sd<t>^-1] [Sd<l>, R<1> Sbd<t>^-1 R<1>^-1]";
    let p31 = "P<3> P<1>";
    let blk_d = "{Sbtd<l;m>^-1 R<m>^-1 Sbtd<l;m+1>}";
    let blk_e = "{Sbtd<l;m>^-1 R<m>^-1 Sbtd<l;m>}";
    vec![
        fam(X::P, F::A, vec![
            br("m=i-1", |x| x.m == x.i - 1, "P<i> P<i-1>", 0),
            br("m=i+1", |x| x.m == x.i + 1, "P<i+1>^-1 P<i>", 0),
            br("other", all, "P<i>", 0),
        ]),
        fam(X::P, F::Y, vec![
            br("i=1", |x| x.i == 1, "P<1>^-1 R<2> R<1>", -2),
            br("i=2", |x| x.i == 2, "P<2> R<1>", -1),
            br("i>=3", all, "P<i>", 0),
        ]),
        fam(X::P, F::B, vec![
            br("i=1", |x| x.i == 1, &cj(p31, "P<1>"), 0),
            br("i=2", |x| x.i == 2, &cj(p31, "P<2>"), 0),
            br("i=3", |x| x.i == 3, "P<1>^-1 P<3> P<1>", 0),
            br("i=4", |x| x.i == 4, "P<4> P<3> P<1>", -1),
            br("i>=5", all, "P<i>", 0),
        ]),
        fam(X::P, F::ASub, vec![
            br("m<=i-2", |x| x.m <= x.i - 2, &cm("Sd<l>^-1", "P<m>^-1", "P<i>"), 0),
            br("m=i-1", |x| x.m == x.i - 1, "[P<i-1>^-1, Sd<l>^-1] P<i> Sd<l> P<i-1>", -1),
            br("m=i", |x| x.m == x.i, &cj("Sd<l> P<i>", "P<i>"), 0),
            br("m=i+1", |x| x.m == x.i + 1, "P<i+1>^-1 Sd<l>^-1 P<i>", 1),
            br("m>=i+2", all, "P<i>", 0),
        ]),
        fam(X::P, F::RSub, vec![
            br("m<=i-1", |x| x.m < x.i, &cm("Sd<l>^-1", "R<m>^-1", "P<i>"), 0),
            br(
                "m=i",
                |x| x.m == x.i,
                "{R<i>^-1 Sd<l>^-1 R<i>} Sd<l> P<i> Sbtd<l;i>^-1 {R<i>^-1 Sd<l>^-1 R<i>}^-1",
                -2,
            ),
            br("m=i+1", |x| x.m == x.i + 1, "R<i+1>^-1 Sd<l>^-1 R<i+1> Sbtd<l;i+1> P<i>", 2),
            br("m>=i+2", all, "P<i>", 0),
        ]),
        fam(X::P, F::S, vec![br("all", all, "P<i>", 0)]),
        fam(X::P, F::SBar, vec![
            br(
                "i=1",
                |x| x.i == 1,
                "[Sbd<l>^-1, Sd<t>]^-1 Sd<l> P<1> R<1> Sbd<t> R<1>^-1 Sd<l>^-1 R<1> Sbd<t>^-1 R<1>^-1 [Sbd<l>^-1, Sd<t>]",
                0,
            ),
            br("i>=2", all, &format!("{{{q}}} P<i> {{{q}}}^-1"), 0),
        ]),
        fam(X::R, F::A, vec![
            br("m=i-1", |x| x.m == x.i - 1, "R<i> R<i-1> P<i-1>^-1 R<i> P<i-1>", 1),
            br("m=i", |x| x.m == x.i, "P<i>^-1 R<i+1>^-1 P<i>", 0),
            br("other", all, "R<i>", 0),
        ]),
        fam(X::R, F::Y, vec![
            br("i=1", |x| x.i == 1, &cj("P<1>^-1 R<2> R<1>", "R<1>^-1"), 0),
            br("i=2", |x| x.i == 2, "P<1> R<1> P<1>^-1 R<2> R<1>", 1),
            br("i>=3", all, "R<i>", 0),
        ]),
        fam(X::R, F::B, vec![
            br(
                "i=1",
                |x| x.i == 1,
                "P<1>^-1 P<3>^-1 P<2>^-1 R<4>^-1 P<3> R<3>^-1 P<2> R<2>^-1 P<1>",
                0,
            ),
            br(
                "i=2",
                |x| x.i == 2,
                &cj(p31, "P<1> P<3> R<2> R<1> P<1>^-1 R<2> P<2>^-1 R<3> P<3>^-1 R<4> P<2>"),
                0,
            ),
            br(
                "i=3",
                |x| x.i == 3,
                &cj(p31, "R<4>^-1 P<3> R<3>^-1 P<2> R<2>^-1 P<1> R<1>^-1 P<2>^-1 R<3> P<3>^-1 P<1>^-1"),
                0,
            ),
            br(
                "i=4",
                |x| x.i == 4,
                "R<4> P<2> R<1> P<1>^-1 R<2> P<2>^-1 R<3> P<3>^-1 R<4> P<3> P<1>",
                0,
            ),
            br("i>=5", all, "R<i>", 0),
        ]),
        fam(X::R, F::ASub, vec![
            br("m<=i-2", |x| x.m <= x.i - 2, &cm("Sd<l>^-1", "P<m>^-1", "R<i>"), 0),
            br(
                "m=i-1",
                |x| x.m == x.i - 1,
                &cj("Sd<l> P<i-1>", "P<i-1> Sd<l> R<i> R<i-1> P<i-1>^-1 R<i> Sbtd<l;i>"),
                0,
            ),
            br("m=i", |x| x.m == x.i, "P<i>^-1 Sd<l>^-1 R<i+1>^-1 P<i> Sbtd<l;i>^-1", 0),
            br("m>=i+1", all, "R<i>", 0),
        ]),
        fam(X::R, F::RSub, vec![
            br("m<=i-1", |x| x.m < x.i, &cm("Sd<l>^-1", "R<m>^-1", "R<i>"), 0),
            br("m=i", |x| x.m == x.i, &cj("Sd<l> R<i>", "R<i>"), 0),
            br("m>=i+1", all, "R<i>", 0),
        ]),
        fam(X::R, F::S, vec![br("all", all, "R<i>", 0)]),
        fam(X::R, F::SBar, vec![
            br("i=1", |x| x.i == 1, "[Sd<t>, Sbd<l>^-1] [R<1> Sbd<t> R<1>^-1, Sd<l>^-1] R<1>", 0),
            br("i>=2", all, &cj(q, "R<i>"), 0),
        ]),
        fam(X::Sd, F::A, vec![br("all", all, "Sd<j>", 0)]),
        fam(X::Sd, F::Y, vec![br("all", all, "Sd<j>", 0)]),
        fam(X::Sd, F::B, vec![br("all", all, "Sd<j>", 0)]),
        fam(X::Sd, F::ASub, vec![
            br("l>j", |x| x.l > x.j, &cm("Sd<l>^-1", "P<m>^-1", "Sd<j>"), 0),
            br("l=j", |x| x.l == x.j, "P<m>^-1 Sd<j> P<m>", 0),
            br("l<j", all, "Sd<j>", 0),
        ]),
        fam(X::Sd, F::RSub, vec![
            br("l>j", |x| x.l > x.j, &cm("Sd<l>^-1", "R<m>^-1", "Sd<j>"), 0),
            br("l=j", |x| x.l == x.j, "R<m>^-1 Sd<j> R<m>", 0),
            br("l<j", all, "Sd<j>", 0),
        ]),
        fam(X::Sd, F::S, vec![
            br("l=j", |x| x.l == x.j, &cj("Sd<t> Sd<j>", "Sd<j>"), 0),
            br("l<j<t", |x| x.l < x.j && x.j < x.t, &cm("Sd<t>^-1", "Sd<l>^-1", "Sd<j>"), 0),
            br("t=j", |x| x.t == x.j, "Sd<l>^-1 Sd<j> Sd<l>", 0),
            br("other", all, "Sd<j>", 0),
        ]),
        fam(X::Sd, F::SBar, vec![
            br("l>j", |x| x.l > x.j, &cj(q, "Sd<j>"), 0),
            br(
                "l=j",
                |x| x.l == x.j,
                &cj("[Sbd<j>, Sd<t>^-1] Sd<j> R<1> Sbd<t>^-1 R<1>^-1", "Sd<j>"),
                0,
            ),
            br("l<j<t", |x| x.l < x.j && x.j < x.t, &cm("Sbd<l>^-1", "Sd<t>", "Sd<j>"), 0),
            br("t=j", |x| x.t == x.j, &cj("Sbd<l> Sd<j>^-1", "Sd<j>"), 0),
            br("t<j", all, "Sd<j>", 0),
        ]),
        fam(X::Sbd, F::A, vec![
            br("m=1", |x| x.m == 1, &cj("R<1>^-1 R<2>^-1 P<1>", "Sbd<j>"), 0),
            br("m>=2", all, "Sbd<j>", 0),
        ]),
        fam(X::Sbd, F::Y, vec![br("all", all, &cj("R<1>^-1 P<1>^-2 R<2> R<1>", "Sbd<j>"), 0)]),
        fam(X::Sbd, F::B, vec![br(
            "all",
            all,
            &cj("R<1>^-1 P<2>^-1 R<4>^-1 P<3> R<3>^-1 P<2> R<2>^-1 P<1>", "Sbd<j>"),
            0,
        )]),
        fam(X::Sbd, F::ASub, vec![
            br("m=1,l<j", |x| x.m == 1 && x.l < x.j, &cj("R<1>^-1 R<2>^-1 P<1> Sbd<l>^-1", "Sbd<j>"), 0),
            br("m=1,l>j", |x| x.m == 1 && x.l > x.j, &cj("Sbd<l>^-1 R<1>^-1 R<2>^-1 P<1>", "Sbd<j>"), 0),
            br("m>=2,l=j", |x| x.m >= 2 && x.l == x.j, &cj("Blk<m>", "Sbtd<j;m+1>"), 0),
            br(
                "m>=2,l>j",
                |x| x.m >= 2 && x.l > x.j,
                &format!("Blk<m>^-1 {blk_d}^-1 Sbtd<j;m> {blk_d} Blk<m>"),
                0,
            ),
            br("other", all, "Sbd<j>", 0),
        ]),
        fam(X::Sbd, F::RSub, vec![
            br("m=1,l<j", |x| x.m == 1 && x.l < x.j, &cj("R<1>^-1 Sbd<l>^-1 Sd<l> R<1>", "Sbd<j>"), 0),
            br("m=1,l=j", |x| x.m == 1 && x.l == x.j, &cj("Sd<j> R<1>", "Sbd<j>"), 0),
            br("m=1,l>j", |x| x.m == 1 && x.l > x.j, &cj("Sbd<l>^-1 R<1>^-1 Sd<l> R<1>", "Sbd<j>"), 0),
            br("m>=2,l=j", |x| x.m >= 2 && x.l == x.j, &cj("Blk<m>", "Sbtd<j;m>"), 0),
            br(
                "m>=2,l>j",
                |x| x.m >= 2 && x.l > x.j,
                &format!("Blk<m>^-1 {blk_e}^-1 Sbtd<j;m> {blk_e} Blk<m>"),
                0,
            ),
            br("m>=2,l<j", all, "Sbd<j>", 0),
        ]),
        fam(X::Sbd, F::S, vec![
            br("t=j", |x| x.t == x.j, "Sbd<l>^-1 Sbd<j> Sbd<l>", 0),
            br("l<j<t", |x| x.l < x.j && x.j < x.t, &cm("Sbd<t>^-1", "Sbd<l>^-1", "Sbd<j>"), 0),
            br("l=j", |x| x.l == x.j, &cj("Sbd<t> Sbd<j>", "Sbd<j>"), 0),
            br("other", all, "Sbd<j>", 0),
        ]),
        fam(X::Sbd, F::SBar, vec![
            br("t<j", |x| x.t < x.j, &cm("Sbd<t>", "R<1>^-1 Sd<l>^-1 R<1>", "Sbd<j>"), 0),
            br(
                "t=j",
                |x| x.t == x.j,
                "{R<1>^-1 Sd<l>^-1 R<1>} Sbd<j> {R<1>^-1 Sd<l>^-1 R<1>}^-1",
                0,
            ),
            br("l=j", |x| x.l == x.j, "Sd<t> Sbd<j> Sd<t>^-1", 0),
            br("l>j", |x| x.l > x.j, &cm("Sbd<l>^-1", "Sd<t>", "Sbd<j>"), 0),
            br("l<j<t", all, "Sbd<j>", 0),
        ]),
    ]
}

fn build_h_families() -> Vec<Family> {
    [XKind::P, XKind::R, XKind::Sd, XKind::Sbd]
        .into_iter()
        .map(|x| fam(x, FKind::D, vec![br("all", all, x.expr(), 0)]))
        .collect()
}

/// The boundary families `D1a`..`D4g`.
pub fn families() -> &'static [Family] {
    static F: OnceLock<Vec<Family>> = OnceLock::new();
    F.get_or_init(build_families)
}

/// The families `D1h`..`D4h` (conjugation by `d_l`), which only occur in
/// the orientation-subgroup table.
pub fn h_families() -> &'static [Family] {
    static F: OnceLock<Vec<Family>> = OnceLock::new();
    F.get_or_init(build_h_families)
}

pub fn family(tag: &str) -> Option<&'static Family> {
    families().iter().chain(h_families()).find(|f| f.tag == tag)
}

/// One instantiated boundary relation `f x f^{-1} = body · d_k^{tail}`.
#[derive(Clone, Debug)]
pub struct Instance {
    pub family: &'static Family,
    pub branch: &'static Branch,
    pub vars: Vars,
}

impl Instance {
    pub fn tail(&self) -> i32 {
        self.branch.tail
    }

    pub fn k(&self) -> u16 {
        self.vars.get('k').unwrap() as u16
    }

    /// The conjugating generator `f`, the conjugated element `x` and the
    /// right-hand side, in the given macro mode.
    pub fn parts(&self, mode: MacroMode) -> Result<(Word, Word, Word)> {
        let res = Std { mode };
        let f = parse(self.family.f.expr()).eval(&self.vars, &res)?;
        let x = parse(self.family.x.expr()).eval(&self.vars, &res)?;
        let body = self.branch.body.eval(&self.vars, &res)?;
        Ok((f, x, body))
    }

    /// `f x f^{-1} body^{-1}` in the given macro mode, without the tail.
    pub fn core_word(&self, mode: MacroMode) -> Result<Word> {
        let (f, x, body) = self.parts(mode)?;
        Ok(&x.conjugate(&f) * &body.inverse())
    }

    /// The relator of the full presentation, `f x f^{-1} body^{-1} d_k^{-tail}`.
    pub fn relator(&self) -> Result<Relator> {
        let mut w = self.core_word(MacroMode::Generators)?;
        w.push(Generator::D(self.k()), -self.tail());
        Ok(self.tagged(w))
    }

    pub fn tagged(&self, w: Word) -> Relator {
        Relator::new(&self.family.tag, w).with_branch(self.branch.name, self.vars.bindings())
    }
}

/// All instances of `fams` at level `k` of `N_{g,n}` (`1 <= k <= n-1`).
pub fn instances(fams: &'static [Family], g: u16, k: u16) -> Vec<Instance> {
    let mut out = Vec::new();
    for fam in fams {
        for xv in fam.x.range(g, k) {
            for fb in fam.f.bindings(g, k) {
                let mut vars = Vars::new().with('k', k as i64).with(fam.x.var(), xv);
                for (c, v) in fb {
                    vars.set(c, v);
                }
                let branch = fam.branch(&Ix::from_vars(&vars));
                out.push(Instance { family: fam, branch, vars });
            }
        }
    }
    out
}

/// Relators `[d_j, x]` for every non-boundary generator `x` of the
/// alphabet and `[d_j, d_l]` for `l < j`.
pub fn d0_relators(alphabet: &[Generator]) -> Vec<Relator> {
    let mut out = Vec::new();
    for &d in alphabet.iter().filter(|g| g.is_boundary_twist()) {
        let Generator::D(j) = d else { unreachable!() };
        for &x in alphabet {
            let keep = match x {
                Generator::D(l) => l < j,
                _ => true,
            };
            if keep {
                let w = Word::commutator(&Word::gen(d), &Word::gen(x));
                let (tag, idx) = x.tag();
                let idx: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                let mut r = Relator::new("D0", w);
                r.branch = format!("{tag}{}", if idx.is_empty() { String::new() } else { idx.join(",") });
                r.indices = vec![('j', j as i64)];
                out.push(r);
            }
        }
    }
    out
}

/// Relators `D0`..`D4g` of `M(N_{g,n})`.
pub fn boundary_relators(g: u16, n: u16) -> Result<Vec<Relator>> {
    let mut out = d0_relators(&full_alphabet(g, n));
    for k in 1..n {
        for inst in instances(families(), g, k) {
            out.push(inst.relator()?);
        }
    }
    Ok(out)
}

/// `M(N_{g,n})` for `n >= 1`; `n = 0` yields the one-boundary presentation.
pub fn full_presentation(g: u16, n: u16) -> Result<Presentation> {
    let p = SurfaceParams::new(g as i64, n as i64)?.effective();
    let mut pres = Presentation::new(full_alphabet(p.g, p.n));
    pres.surface = Some((g as u32, n as u32));
    pres.relators = stukow_relators(p.g);
    pres.relators.extend(boundary_relators(p.g, p.n)?);
    for r in &pres.relators {
        pres.check_word(&r.word).map_err(|e| Error::Guard {
            family: r.family.clone(),
            branch: r.label(),
            detail: e.to_string(),
        })?;
    }
    Ok(pres)
}

/// The conjugation table of the orientation subgroup of `N_{g,n-1}`:
/// families `D1a'`..`D4h'` at level `n-1`, without boundary-twist tails.
pub fn primed_relators(g: u16, n: u16, mode: MacroMode) -> Result<Vec<(Instance, Word)>> {
    if n < 2 {
        return Err(Error::InvalidSurface { g: g as i64, n: n as i64 });
    }
    let k = n - 1;
    let mut out = Vec::new();
    for fams in [families(), h_families()] {
        for inst in instances(fams, g, k) {
            let w = inst.core_word(mode)?;
            out.push((inst, w));
        }
    }
    Ok(out)
}

/// `sbar_{j,k;i}`: `sbar_{j,k}` conjugated by
/// `{(a_{1;k}a_1^{-1})^{-1} r_{2;k} ... (a_{i-1;k}a_{i-1}^{-1})^{-1} r_{i;k}}`.
pub fn sbar_tri_word(j: u16, k: u16, i: u16, g: u16) -> Result<Word> {
    if i < 2 || i > g || j < 1 || j >= k {
        return Err(Error::Guard {
            family: "sbar_tri".into(),
            branch: format!("j={j},k={k},i={i}"),
            detail: "need 2 <= i <= g and 1 <= j < k".into(),
        });
    }
    let vars = Vars::new().with('j', j as i64).with('k', k as i64).with('i', i as i64);
    Expr::parse("sbt<j,k;i>")?.eval(&vars, &Std::GENS)
}

/// Per-family instance counts of the full presentation, keyed by tag.
/// Every tag of the table that is admissible for `(g, n)` is present.
pub fn coverage(g: u16, n: u16) -> Result<BTreeMap<String, usize>> {
    Ok(full_presentation(g, n)?.family_counts())
}

/// Whether family `tag` has at least one admissible index tuple on
/// `N_{g,n}`, computed by brute-force enumeration of the index ranges.
pub fn family_admissible(tag: &str, g: u16, n: u16) -> bool {
    match tag {
        "A1" => g >= 4,
        "A2" | "B2" | "B4" => g >= 3,
        "A3" | "B1" | "B3" | "B6" => g >= 4,
        "A4" | "A5" | "B8" => g >= 5,
        "A6" => g >= 7,
        "A9a" => g == 6,
        "A9b" => g >= 8 && g.is_multiple_of(2),
        "B7" => g >= 6,
        "B5" => g >= 2,
        "D0" => n >= 2,
        _ => {
            let Some(f) = family(tag) else { return false };
            (1..n).any(|k| !f.x.range(g, k).is_empty() && !f.f.bindings(g, k).is_empty())
        }
    }
}

/// All relator family tags in catalog order.
pub fn family_tags() -> Vec<String> {
    let mut v: Vec<String> = [
        "A1", "A2", "A3", "A4", "A5", "A6", "A9a", "A9b", "B1", "B2", "B3", "B4", "B5", "B6", "B7",
        "B8", "D0",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    v.extend(families().iter().map(|f| f.tag.clone()));
    v
}

/// Instances whose reading is affected by a documented ambiguity of the
/// source formulas: `D1b` `i=1` and `D2b` `i=2` below the top level (tail
/// read as `d_k`), and `D1d` `m=i-1` (tail placement).
pub fn flagged_instances(g: u16, n: u16) -> Vec<String> {
    let mut out = Vec::new();
    for k in 1..n {
        for inst in instances(families(), g, k) {
            let tag = inst.family.tag.as_str();
            let b = inst.branch.name;
            let flagged = (tag == "D1b" && b == "i=1" && k < n - 1)
                || (tag == "D2b" && b == "i=2" && k < n - 1)
                || (tag == "D1d" && b == "m=i-1");
            if flagged {
                out.push(inst.tagged(Word::identity()).label());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Generator::*;

    #[test]
    fn small_stukow_cases() {
        assert!(stukow_presentation(1).alphabet.is_empty());
        assert!(stukow_presentation(1).relators.is_empty());
        let p = stukow_presentation(2);
        assert_eq!(p.relators.len(), 1);
        assert_eq!(p.relators[0].word, Word::reduce([(Y, 1), (A(1), 1), (Y, -1), (A(1), 1)]));
    }

    #[test]
    fn b_recursion() {
        assert_eq!(b_word(0), Word::gen(A(1)));
        assert_eq!(b_word(1), Word::gen(B));
        let b2 = b_word(2);
        let block = Word::reduce([(A(1), 1), (A(2), 1), (A(3), 1), (A(4), 1), (A(5), 1)]);
        assert_eq!(b2, &(&block * &Word::gen(B)).pow(5) * &block.pow(-6));
        let p = stukow_presentation(6);
        let a9 = p.relators.iter().find(|r| r.family == "A9a").unwrap();
        assert!(a9.word.symbols().iter().all(|s| matches!(s, A(1..=5) | B)));
        let p8 = stukow_presentation(8);
        assert!(p8.relators.iter().any(|r| r.family == "A9b"));
    }

    #[test]
    fn generator_counts_match_enumeration() {
        for g in 1..=6 {
            for n in 1..=5 {
                assert_eq!(full_alphabet(g, n).len(), generator_count(g, n), "g={g} n={n}");
            }
        }
        assert_eq!(
            full_alphabet(3, 2),
            vec![A(1), A(2), Y, D(1), ASub(1, 1), ASub(2, 1), RSub(1, 1), RSub(2, 1), RSub(3, 1)]
        );
    }

    #[test]
    fn two_one_reduces_to_stukow() {
        assert_eq!(full_presentation(2, 1).unwrap().relators, stukow_relators(2));
        let closed = full_presentation(2, 0).unwrap();
        assert_eq!(closed.relators, stukow_relators(2));
    }

    #[test]
    fn d0_count_for_two_three() {
        // alphabet of N_{2,3}: a1, y, d1, a_{1;1}, r_{1;1}, r_{2;1}, d2, a_{1;2}, r_{1;2}, r_{2;2}, s_{1,2}, sbar_{1,2}
        let alpha = full_alphabet(2, 3);
        assert_eq!(alpha.len(), 12);
        let d0 = d0_relators(&alpha);
        // each d_j against 10 non-d generators, plus [d2, d1]
        assert_eq!(d0.len(), 2 * 10 + 1);
    }

    #[test]
    fn one_two_has_only_satisfiable_families() {
        let p = full_presentation(1, 2).unwrap();
        let counts = p.family_counts();
        assert!(counts.keys().all(|k| k == "D0"));
        let p = full_presentation(1, 3).unwrap();
        let counts = p.family_counts();
        assert!(counts.contains_key("D2e"));
        assert!(!counts.contains_key("D1a"));
    }

    #[test]
    fn tails_match_branch_table() {
        let p = full_presentation(3, 3).unwrap();
        for r in p.relators.iter().filter(|r| r.family == "D1b" && r.branch == "i=1") {
            let k = r.indices.iter().find(|v| v.0 == 'k').unwrap().1 as u16;
            assert_eq!(r.word.runs().last(), Some(&(D(k), 2)));
        }
    }

    #[test]
    fn primed_equals_unprimed_without_top_tail() {
        for (g, n) in [(3, 3), (4, 3), (5, 4)] {
            let full = full_presentation(g, n).unwrap();
            let top: Vec<&Relator> = full
                .relators
                .iter()
                .filter(|r| r.family.starts_with('D') && r.family != "D0")
                .filter(|r| r.indices.contains(&('k', n as i64 - 1)))
                .collect();
            let primed: Vec<(Instance, Word)> = primed_relators(g, n, MacroMode::Generators)
                .unwrap()
                .into_iter()
                .filter(|(i, _)| i.family.f != FKind::D)
                .collect();
            assert_eq!(top.len(), primed.len());
            for (r, (_, w)) in top.iter().zip(&primed) {
                let stripped = r.word.substitute(|s| (s == D(n - 1)).then(Word::identity));
                let w2 = w.substitute(|s| (s == D(n - 1)).then(Word::identity));
                assert_eq!(stripped, w2, "{}", r.label());
            }
        }
    }

    #[test]
    fn sbar_tri_definition() {
        let w = sbar_tri_word(1, 2, 2, 3).unwrap();
        let c = Word::reduce([(ASub(1, 2), 1), (A(1), -1)]).inverse() * Word::gen(RSub(2, 2));
        assert_eq!(w, Word::gen(SBar(1, 2)).conjugate(&c.inverse()));
        assert_eq!(
            w.exponent_vector(&full_alphabet(3, 3)).unwrap(),
            Word::gen(SBar(1, 2)).exponent_vector(&full_alphabet(3, 3)).unwrap()
        );
        let w3 = sbar_tri_word(1, 2, 3, 3).unwrap();
        assert_eq!(w3.len(), w.len() + 6);
        assert!(sbar_tri_word(1, 2, 1, 3).is_err());
        assert!(sbar_tri_word(2, 2, 2, 3).is_err());
    }

    #[test]
    fn every_admissible_family_is_emitted() {
        for g in 1..=7 {
            for n in 1..=4 {
                let counts = coverage(g, n).unwrap();
                for tag in family_tags() {
                    assert_eq!(
                        counts.contains_key(&tag),
                        family_admissible(&tag, g, n),
                        "{tag} on ({g},{n})"
                    );
                }
            }
        }
    }

    #[test]
    fn relators_are_nonempty() {
        for g in 1..=6 {
            for n in 1..=4 {
                for r in full_presentation(g, n).unwrap().relators {
                    assert!(!r.word.is_identity(), "{} empty on ({g},{n})", r.label());
                }
            }
        }
    }
}
