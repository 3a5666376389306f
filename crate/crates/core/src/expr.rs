//! A small word-expression language with symbolic indices.
//!
//! Relator families, derivation files and loop-action facts are written in
//! this notation and evaluated under a binding of the index variables.
//!
//! ```text
//! expr   := term*
//! term   := primary ('^' int)?
//! primary:= '(' expr ')' | '{' expr '}' | '[' expr ',' expr ']'
//!         | 'conj' '(' expr ',' expr ')' | '1' | ident ('<' idx (sep idx)* '>')?
//! idx    := ('+'|'-')? item (('+'|'-') item)*      item := var | integer
//! ```
//!
//! `[u, v]` is `u v u^-1 v^-1` and `conj(u, v)` is `u v u^-1`.

use crate::error::{Error, Result};
use crate::symbol::Generator;
use crate::word::Word;

/// Binding of single-letter index variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vars {
    vals: [Option<i64>; 26],
}

impl Vars {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, v: char, x: i64) -> Self {
        self.set(v, x);
        self
    }

    pub fn set(&mut self, v: char, x: i64) {
        self.vals[slot(v)] = Some(x);
    }

    pub fn get(&self, v: char) -> Option<i64> {
        self.vals.get(slot(v)).copied().flatten()
    }

    pub fn req(&self, v: char) -> Result<i64> {
        self.get(v).ok_or_else(|| Error::Parse(format!("unbound index variable `{v}`")))
    }

    /// Bound variables in alphabetical order.
    pub fn bindings(&self) -> Vec<(char, i64)> {
        self.vals
            .iter()
            .enumerate()
            .filter_map(|(p, v)| v.map(|x| ((b'a' + p as u8) as char, x)))
            .collect()
    }
}

fn slot(v: char) -> usize {
    assert!(v.is_ascii_lowercase(), "index variables are lowercase letters");
    (v as u8 - b'a') as usize
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Item {
    Var(char),
    Const(i64),
}

/// Linear index expression such as `i+1` or `n-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexExpr {
    terms: Vec<(i64, Item)>,
}

impl IndexExpr {
    pub fn parse(src: &str) -> Result<IndexExpr> {
        let mut p = Parser { s: src.as_bytes(), pos: 0, src };
        let e = p.index()?;
        p.ws();
        if p.pos != p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, vars: &Vars) -> Result<i64> {
        let mut s = 0;
        for (sign, it) in &self.terms {
            s += sign
                * match it {
                    Item::Var(v) => vars.req(*v)?,
                    Item::Const(c) => *c,
                };
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Node {
    Atom(String, Vec<IndexExpr>),
    Seq(Vec<Node>),
    Pow(Box<Node>, i32),
    Comm(Box<Node>, Box<Node>),
    Conj(Box<Node>, Box<Node>),
}

/// A parsed expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    root: Node,
    source: String,
}

/// Maps named atoms to words.
pub trait Resolver {
    fn atom(&self, name: &str, idx: &[i64], vars: &Vars) -> Result<Word>;
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { s: src.as_bytes(), pos: 0, src };
        let root = p.seq()?;
        p.ws();
        if p.pos != p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(Expr { root, source: src.to_string() })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, vars: &Vars, res: &dyn Resolver) -> Result<Word> {
        eval(&self.root, vars, res)
    }
}

fn eval(n: &Node, vars: &Vars, res: &dyn Resolver) -> Result<Word> {
    Ok(match n {
        Node::Atom(name, idx) => {
            let vals = idx.iter().map(|e| e.eval(vars)).collect::<Result<Vec<_>>>()?;
            res.atom(name, &vals, vars)?
        }
        Node::Seq(v) => {
            let mut w = Word::identity();
            for c in v {
                w.push_word(&eval(c, vars, res)?);
            }
            w
        }
        Node::Pow(b, e) => eval(b, vars, res)?.pow(*e),
        Node::Comm(a, b) => Word::commutator(&eval(a, vars, res)?, &eval(b, vars, res)?),
        Node::Conj(a, b) => eval(b, vars, res)?.conjugate(&eval(a, vars, res)?),
    })
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {} in `{}`", self.pos, self.src))
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn seq(&mut self) -> Result<Node> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if matches!(c, b')' | b'}' | b']' | b',') {
                break;
            }
            items.push(self.term()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Node::Seq(items) })
    }

    fn term(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let braced = self.peek() == Some(b'{');
            if braced {
                self.pos += 1;
            }
            let e = self.int()?;
            if braced {
                self.expect(b'}')?;
            }
            let e = i32::try_from(e).map_err(|_| self.err("exponent out of range"))?;
            return Ok(Node::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn int(&mut self) -> Result<i64> {
        self.ws();
        let neg = if self.s.get(self.pos) == Some(&b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let v: i64 = self.src[start..self.pos].parse().map_err(|_| self.err("bad integer"))?;
        Ok(if neg { -v } else { v })
    }

    fn primary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let n = self.seq()?;
                self.expect(b')')?;
                Ok(n)
            }
            Some(b'{') => {
                self.pos += 1;
                let n = self.seq()?;
                self.expect(b'}')?;
                Ok(n)
            }
            Some(b'[') => {
                self.pos += 1;
                let a = self.seq()?;
                self.expect(b',')?;
                let b = self.seq()?;
                self.expect(b']')?;
                Ok(Node::Comm(Box::new(a), Box::new(b)))
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(Node::Seq(Vec::new()))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len()
                    && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = self.src[start..self.pos].to_string();
                if name == "conj" {
                    self.expect(b'(')?;
                    let a = self.seq()?;
                    self.expect(b',')?;
                    let b = self.seq()?;
                    self.expect(b')')?;
                    return Ok(Node::Conj(Box::new(a), Box::new(b)));
                }
                let mut idx = Vec::new();
                if self.s.get(self.pos) == Some(&b'<') {
                    self.pos += 1;
                    loop {
                        idx.push(self.index()?);
                        match self.peek() {
                            Some(b',') | Some(b';') => self.pos += 1,
                            Some(b'>') => {
                                self.pos += 1;
                                break;
                            }
                            _ => return Err(self.err("expected `,`, `;` or `>`")),
                        }
                    }
                }
                Ok(Node::Atom(name, idx))
            }
            _ => Err(self.err("expected a term")),
        }
    }

    fn index(&mut self) -> Result<IndexExpr> {
        let mut terms = Vec::new();
        let mut sign = 1;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1;
                }
                _ => {}
            }
            match self.peek() {
                Some(c) if c.is_ascii_lowercase() => {
                    self.pos += 1;
                    terms.push((sign, Item::Var(c as char)));
                }
                Some(c) if c.is_ascii_digit() => {
                    let v = self.int()?;
                    terms.push((sign, Item::Const(v)));
                }
                _ => return Err(self.err("expected index term")),
            }
            sign = 1;
            match self.peek() {
                Some(b'+') | Some(b'-') => continue,
                _ => break,
            }
        }
        Ok(IndexExpr { terms })
    }
}

/// How the orientation-subgroup macros `P`, `R`, `Sd`, `Sbd`, `Sbtd` and
/// `Blk` are expanded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MacroMode {
    /// Expand into mapping-class generators (`P<i> = a_{i;k} a_i^-1`, ...).
    Generators,
    /// Expand into basis symbols of the orientation subgroup
    /// (`P<i> = w_i`, `R<i> = z_i`, `Sd<l> = y_l`, `Sbd<l> = ybar_l`).
    Basis,
}

/// The standard resolver for every atom name used in data files.
#[derive(Clone, Copy, Debug)]
pub struct Std {
    pub mode: MacroMode,
}

impl Std {
    pub const GENS: Std = Std { mode: MacroMode::Generators };
    pub const BASIS: Std = Std { mode: MacroMode::Basis };
}

fn u(x: i64, name: &str) -> Result<u16> {
    if x >= 1 && x <= u16::MAX as i64 {
        Ok(x as u16)
    } else {
        Err(Error::Parse(format!("index {x} out of range in `{name}`")))
    }
}

impl Std {
    fn p(&self, i: i64, k: u16) -> Result<Word> {
        let i = u(i, "P")?;
        Ok(match self.mode {
            MacroMode::Generators => {
                Word::reduce([(Generator::ASub(i, k), 1), (Generator::A(i), -1)])
            }
            MacroMode::Basis => Word::gen(Generator::W(i)),
        })
    }

    fn r(&self, i: i64, k: u16) -> Result<Word> {
        let i = u(i, "R")?;
        Ok(match self.mode {
            MacroMode::Generators => Word::gen(Generator::RSub(i, k)),
            MacroMode::Basis => Word::gen(Generator::Z(i)),
        })
    }

    /// `(P<1>^-1 R<2>) ... (P<i-1>^-1 R<i>)`.
    fn tri_conjugator(&self, i: i64, k: u16) -> Result<Word> {
        let mut c = Word::identity();
        for p in 2..=i {
            c.push_word(&self.p(p - 1, k)?.inverse());
            c.push_word(&self.r(p, k)?);
        }
        Ok(c)
    }

    fn sbd(&self, l: i64, k: u16) -> Result<Word> {
        let l = u(l, "Sbd")?;
        Ok(match self.mode {
            MacroMode::Generators => {
                Word::reduce([(Generator::SBar(l, k), 1), (Generator::D(l), -1)])
            }
            MacroMode::Basis => Word::gen(Generator::YBar(l)),
        })
    }
}

fn arity(name: &str, idx: &[i64], n: usize) -> Result<()> {
    if idx.len() == n {
        Ok(())
    } else {
        Err(Error::Parse(format!("`{name}` takes {n} indices, got {}", idx.len())))
    }
}

/// Loop `x_j^{-1} y_l x_j` written through the basis conjugator
/// `Π_{p=2..j} (x_p x_{p-1})^{-1} x_p^2`.
pub fn ybar_tri_loop(l: u16, j: u16) -> Word {
    let mut c = Word::identity();
    for p in 2..=j {
        c.push(Generator::X(p - 1), -1);
        c.push(Generator::X(p), -1);
        c.push(Generator::X(p), 2);
    }
    let ybar = Word::reduce([(Generator::X(1), -1), (Generator::YLoop(l), 1), (Generator::X(1), 1)]);
    ybar.conjugate(&c.inverse())
}

impl Resolver for Std {
    fn atom(&self, name: &str, idx: &[i64], vars: &Vars) -> Result<Word> {
        use Generator::*;
        let k = || -> Result<u16> { u(vars.req('k')?, "k") };
        let g1 = |f: fn(u16) -> Generator| -> Result<Word> {
            arity(name, idx, 1)?;
            Ok(Word::gen(f(u(idx[0], name)?)))
        };
        let g2 = |f: fn(u16, u16) -> Generator| -> Result<Word> {
            arity(name, idx, 2)?;
            Ok(Word::gen(f(u(idx[0], name)?, u(idx[1], name)?)))
        };
        match name {
            "a" => g1(A),
            "b" => {
                arity(name, idx, 0)?;
                Ok(Word::gen(B))
            }
            "y" => {
                arity(name, idx, 0)?;
                Ok(Word::gen(Y))
            }
            "d" => g1(D),
            "A" => g2(ASub),
            "r" => g2(RSub),
            "s" => g2(S),
            "sb" => g2(SBar),
            "x" => g1(X),
            "yl" => g1(YLoop),
            "z" => g1(Z),
            "w" => g1(W),
            "ybar" => g1(YBar),
            "f" => g1(Free),
            "yb" => {
                arity(name, idx, 1)?;
                Ok(ybar_tri_loop(u(idx[0], name)?, 1))
            }
            "ybt" => {
                arity(name, idx, 2)?;
                Ok(ybar_tri_loop(u(idx[0], name)?, u(idx[1], name)?))
            }
            "sbt" => {
                // s̄_{j,k;i} = C^{-1} s̄_{j,k} C with C built at level k.
                arity(name, idx, 3)?;
                let (j, kk) = (u(idx[0], name)?, u(idx[1], name)?);
                let c = Std::GENS.tri_conjugator(idx[2], kk)?;
                Ok(Word::gen(SBar(j, kk)).conjugate(&c.inverse()))
            }
            "P" => {
                arity(name, idx, 1)?;
                self.p(idx[0], k()?)
            }
            "R" => {
                arity(name, idx, 1)?;
                self.r(idx[0], k()?)
            }
            "Sd" => {
                arity(name, idx, 1)?;
                let l = u(idx[0], name)?;
                Ok(match self.mode {
                    MacroMode::Generators => Word::reduce([(S(l, k()?), 1), (D(l), -1)]),
                    MacroMode::Basis => Word::gen(YLoop(l)),
                })
            }
            "Sbd" => {
                arity(name, idx, 1)?;
                self.sbd(idx[0], k()?)
            }
            "Sbtd" => {
                // Conjugate of Sbd<l>; equals s̄_{l,k;i} d_l^{-1} since d_l is central.
                arity(name, idx, 2)?;
                let k = k()?;
                let c = self.tri_conjugator(idx[1], k)?;
                Ok(self.sbd(idx[0], k)?.conjugate(&c.inverse()))
            }
            "Blk" => {
                // (P<m-1> R<m-1>^-1) ... (P<2> R<2>^-1) P<1>
                arity(name, idx, 1)?;
                let k = k()?;
                let mut w = Word::identity();
                let mut p = idx[0] - 1;
                while p >= 2 {
                    w.push_word(&self.p(p, k)?);
                    w.push_word(&self.r(p, k)?.inverse());
                    p -= 1;
                }
                w.push_word(&self.p(1, k)?);
                Ok(w)
            }
            _ => Err(Error::Parse(format!("unknown atom `{name}`"))),
        }
    }
}

/// Parses and evaluates in one step.
pub fn eval_str(src: &str, vars: &Vars, res: &dyn Resolver) -> Result<Word> {
    Expr::parse(src)?.eval(vars, res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Generator::*;

    #[test]
    fn parses_powers_and_commutators() {
        let v = Vars::new();
        let w = eval_str("[a<1>, b]^2 a<2>^-1", &v, &Std::GENS).unwrap();
        let c = Word::commutator(&Word::gen(A(1)), &Word::gen(B));
        assert_eq!(w, &c.pow(2) * &Word::power(A(2), -1));
        let w = eval_str("(a<2>a<3>a<4>b)^{10}", &v, &Std::GENS).unwrap();
        assert_eq!(w.len(), 40);
    }

    #[test]
    fn index_arithmetic_uses_bindings() {
        let v = Vars::new().with('i', 3).with('k', 2);
        let w = eval_str("P<i-1> R<i+1>", &v, &Std::GENS).unwrap();
        assert_eq!(w, Word::reduce([(ASub(2, 2), 1), (A(2), -1), (RSub(4, 2), 1)]));
        let w = eval_str("P<i-1> R<i+1>", &v, &Std::BASIS).unwrap();
        assert_eq!(w, Word::reduce([(W(2), 1), (Z(4), 1)]));
    }

    #[test]
    fn conj_and_identity() {
        let v = Vars::new();
        let w = eval_str("conj(a<1>, b) 1", &v, &Std::GENS).unwrap();
        assert_eq!(w, Word::gen(B).conjugate(&Word::gen(A(1))));
    }

    #[test]
    fn ybar_tri_reduces_to_plain_conjugate() {
        for j in 1..6 {
            let w = ybar_tri_loop(2, j);
            let expect = Word::reduce([(X(j), -1), (YLoop(2), 1), (X(j), 1)]);
            assert_eq!(w, expect);
        }
    }

    #[test]
    fn unbound_variable_is_an_error() {
        assert!(eval_str("a<q>", &Vars::new(), &Std::GENS).is_err());
        assert!(eval_str("zz<1>", &Vars::new(), &Std::GENS).is_err());
        assert!(Expr::parse("a<1").is_err());
    }
}
