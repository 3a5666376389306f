//! Text formats for presentations.
//!
//! * `structured`: JSON with one generator list line and one line per
//!   relator; words are lists of `[tag, indices, exponent]`.
//! * `algebra-text`: a GAP script (`FreeGroup` line, one relator per line,
//!   each labelled by a trailing comment).
//! * `human`: aligned listing for reading; output only.
//!
//! The first two parse back to the same [`Presentation`], and rendering
//! the parsed value reproduces the input byte for byte.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::presentation::{Presentation, Relator};
use crate::symbol::Generator;
use crate::word::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Structured,
    AlgebraText,
    Human,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Format> {
        match s {
            "structured" => Ok(Format::Structured),
            "algebra-text" => Ok(Format::AlgebraText),
            "human" => Ok(Format::Human),
            _ => Err(Error::Parse(format!("unknown format `{s}`"))),
        }
    }
}

pub fn render(p: &Presentation, f: Format) -> String {
    match f {
        Format::Structured => to_structured(p),
        Format::AlgebraText => to_algebra_text(p),
        Format::Human => to_human(p),
    }
}

pub fn parse(src: &str, f: Format) -> Result<Presentation> {
    match f {
        Format::Structured => from_structured(src),
        Format::AlgebraText => from_algebra_text(src),
        Format::Human => Err(Error::Parse("the human format is output only".into())),
    }
}

#[derive(Serialize, Deserialize)]
struct Surface {
    genus: u32,
    boundary: u32,
}

type GenTuple = (String, Vec<u16>);
type LetterTuple = (String, Vec<u16>, i32);

#[derive(Serialize, Deserialize)]
struct RelatorRec {
    family: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    branch: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    indices: Vec<(char, i64)>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    unverified: bool,
    word: Vec<LetterTuple>,
}

#[derive(Deserialize)]
struct Doc {
    surface: Option<Surface>,
    generators: Vec<GenTuple>,
    relators: Vec<RelatorRec>,
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

pub fn to_structured(p: &Presentation) -> String {
    let surface = p.surface.map(|(genus, boundary)| Surface { genus, boundary });
    let gens: Vec<GenTuple> = p.alphabet.iter().map(Generator::tag).collect();
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"surface\": {},", json(&surface));
    let _ = writeln!(out, "  \"generators\": {},", json(&gens));
    out.push_str("  \"relators\": [");
    for (i, r) in p.relators.iter().enumerate() {
        let rec = RelatorRec {
            family: r.family.clone(),
            branch: r.branch.clone(),
            indices: r.indices.clone(),
            unverified: r.unverified,
            word: r
                .word
                .runs()
                .iter()
                .map(|&(g, e)| {
                    let (t, idx) = g.tag();
                    (t, idx, e)
                })
                .collect(),
        };
        out.push_str(if i == 0 { "\n    " } else { ",\n    " });
        out.push_str(&json(&rec));
    }
    out.push_str(if p.relators.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
    out
}

pub fn from_structured(src: &str) -> Result<Presentation> {
    let doc: Doc = serde_json::from_str(src).map_err(|e| Error::Parse(e.to_string()))?;
    let alphabet =
        doc.generators.iter().map(|(t, i)| Generator::from_tag(t, i)).collect::<Result<Vec<_>>>()?;
    let mut p = Presentation::new(alphabet);
    p.surface = doc.surface.map(|s| (s.genus, s.boundary));
    for rec in doc.relators {
        let runs = rec
            .word
            .iter()
            .map(|(t, i, e)| Ok((Generator::from_tag(t, i)?, *e)))
            .collect::<Result<Vec<_>>>()?;
        let word = Word::reduce(runs);
        let mut r = Relator::new(&rec.family, word).with_branch(&rec.branch, rec.indices);
        r.unverified = rec.unverified;
        p.push(r)?;
    }
    Ok(p)
}

fn gap_word(w: &Word) -> String {
    if w.is_identity() {
        return "One(F)".into();
    }
    let parts: Vec<String> = w
        .runs()
        .iter()
        .map(|&(g, e)| if e == 1 { g.ident() } else { format!("{}^{e}", g.ident()) })
        .collect();
    parts.join("*")
}

pub fn to_algebra_text(p: &Presentation) -> String {
    let mut out = String::new();
    if let Some((g, n)) = p.surface {
        let _ = writeln!(out, "# M(N_{{{g},{n}}})");
    }
    let names: Vec<String> = p.alphabet.iter().map(|g| format!("\"{}\"", g.ident())).collect();
    let _ = writeln!(out, "F := FreeGroup({});;", names.join(", "));
    for (i, g) in p.alphabet.iter().enumerate() {
        let _ = writeln!(out, "{} := F.{};;", g.ident(), i + 1);
    }
    out.push_str("rels := [\n");
    for (i, r) in p.relators.iter().enumerate() {
        let sep = if i + 1 == p.relators.len() { "" } else { "," };
        let flag = if r.unverified { " unverified" } else { "" };
        let _ = writeln!(out, "  {}{sep} # {}{flag}", gap_word(&r.word), r.label());
    }
    out.push_str("];;\nG := F / rels;;\n");
    out
}

fn parse_label(s: &str) -> Result<Relator> {
    let bad = || Error::Parse(format!("bad relator label `{s}`"));
    let (s, unverified) = match s.strip_suffix(" unverified") {
        Some(rest) => (rest, true),
        None => (s, false),
    };
    let end_family = s.find(['[', '(']).unwrap_or(s.len());
    let family = &s[..end_family];
    let mut rest = &s[end_family..];
    let mut branch = "";
    if let Some(r) = rest.strip_prefix('[') {
        let close = r.find(']').ok_or_else(bad)?;
        branch = &r[..close];
        rest = &r[close + 1..];
    }
    let mut indices = Vec::new();
    if let Some(r) = rest.strip_prefix('(') {
        let inner = r.strip_suffix(')').ok_or_else(bad)?;
        for part in inner.split(',') {
            let (v, x) = part.split_once('=').ok_or_else(bad)?;
            let mut cs = v.chars();
            let (Some(c), None) = (cs.next(), cs.next()) else { return Err(bad()) };
            indices.push((c, x.parse().map_err(|_| bad())?));
        }
    } else if !rest.is_empty() {
        return Err(bad());
    }
    let mut r = Relator::new(family, Word::identity()).with_branch(branch, indices);
    r.unverified = unverified;
    Ok(r)
}

fn parse_gap_word(src: &str, lookup: &dyn Fn(&str) -> Result<Generator>) -> Result<Word> {
    if src == "One(F)" {
        return Ok(Word::identity());
    }
    let runs = src
        .split('*')
        .map(|t| {
            let (name, e) = match t.split_once('^') {
                Some((n, e)) => (n, e.parse().map_err(|_| Error::Parse(format!("bad exponent in `{t}`")))?),
                None => (t, 1),
            };
            Ok((lookup(name)?, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Word::reduce(runs))
}

pub fn from_algebra_text(src: &str) -> Result<Presentation> {
    let mut lines = src.lines().peekable();
    let mut surface = None;
    if let Some(h) = lines.peek().and_then(|l| l.strip_prefix("# M(N_{")) {
        let inner = h.strip_suffix("})").ok_or_else(|| Error::Parse(format!("bad header `{h}`")))?;
        let (g, n) = inner.split_once(',').ok_or_else(|| Error::Parse(format!("bad header `{h}`")))?;
        let num = |s: &str| s.parse::<u32>().map_err(|_| Error::Parse(format!("bad header `{h}`")));
        surface = Some((num(g)?, num(n)?));
        lines.next();
    }
    let ctor = lines.next().ok_or_else(|| Error::Parse("missing FreeGroup line".into()))?;
    let names = ctor
        .strip_prefix("F := FreeGroup(")
        .and_then(|s| s.strip_suffix(");;"))
        .ok_or_else(|| Error::Parse(format!("bad constructor `{ctor}`")))?;
    let names: Vec<&str> =
        if names.is_empty() { Vec::new() } else { names.split(", ").map(|s| s.trim_matches('"')).collect() };
    let alphabet = names.iter().map(|n| from_ident(n)).collect::<Result<Vec<_>>>()?;
    let lookup = |name: &str| {
        alphabet
            .iter()
            .find(|g| g.ident() == name)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    };
    let mut p = Presentation::new(alphabet.clone());
    p.surface = surface;
    for (i, g) in alphabet.iter().enumerate() {
        let want = format!("{} := F.{};;", g.ident(), i + 1);
        if lines.next() != Some(want.as_str()) {
            return Err(Error::Parse(format!("expected `{want}`")));
        }
    }
    if lines.next() != Some("rels := [") {
        return Err(Error::Parse("expected `rels := [`".into()));
    }
    for line in lines.by_ref() {
        if line == "];;" {
            break;
        }
        let body = line.strip_prefix("  ").ok_or_else(|| Error::Parse(format!("bad relator line `{line}`")))?;
        let (word, label) =
            body.split_once(" # ").ok_or_else(|| Error::Parse(format!("unlabelled relator `{line}`")))?;
        let word = word.strip_suffix(',').unwrap_or(word);
        let mut r = parse_label(label)?;
        r.word = parse_gap_word(word, &lookup)?;
        p.push(r)?;
    }
    if lines.next() != Some("G := F / rels;;") {
        return Err(Error::Parse("expected `G := F / rels;;`".into()));
    }
    Ok(p)
}

/// Inverse of [`Generator::ident`] for the non-curve generators.
pub fn from_ident(s: &str) -> Result<Generator> {
    use Generator::*;
    let bad = || Error::Parse(format!("unknown identifier `{s}`"));
    let one = |t: &str| t.parse::<u16>().map_err(|_| bad());
    let two = |t: &str| {
        let (a, b) = t.split_once('_').ok_or_else(bad)?;
        Ok::<_, Error>((one(a)?, one(b)?))
    };
    Ok(match s {
        "y" => Y,
        "b" => B,
        _ if s.starts_with("sch") => {
            let (gen, coset) = two(&s[3..])?;
            Schreier { gen, coset }
        }
        _ if s.starts_with("sb") => {
            let (i, j) = two(&s[2..])?;
            SBar(i, j)
        }
        _ if s.starts_with("yl") => YLoop(one(&s[2..])?),
        _ if s.starts_with("yb") => YBar(one(&s[2..])?),
        _ if s.starts_with('a') && s.contains('_') => {
            let (i, j) = two(&s[1..])?;
            ASub(i, j)
        }
        _ if s.starts_with('r') => {
            let (i, j) = two(&s[1..])?;
            RSub(i, j)
        }
        _ if s.starts_with('s') => {
            let (i, j) = two(&s[1..])?;
            S(i, j)
        }
        _ if s.starts_with('a') => A(one(&s[1..])?),
        _ if s.starts_with('d') => D(one(&s[1..])?),
        _ if s.starts_with('x') => X(one(&s[1..])?),
        _ if s.starts_with('z') => Z(one(&s[1..])?),
        _ if s.starts_with('w') => W(one(&s[1..])?),
        _ if s.starts_with('f') => Free(one(&s[1..])?),
        _ => return Err(bad()),
    })
}

pub fn to_human(p: &Presentation) -> String {
    let mut out = String::new();
    match p.surface {
        Some((g, n)) => {
            let _ = writeln!(out, "M(N_{{{g},{n}}})");
        }
        None => out.push_str("presentation\n"),
    }
    let gens: Vec<String> = p.alphabet.iter().map(|g| g.to_string()).collect();
    let _ = writeln!(out, "generators ({}):{}", gens.len(), gens.iter().map(|g| format!(" {g}")).collect::<String>());
    let _ = writeln!(out, "relators ({}):", p.relators.len());
    let labels: Vec<String> = p.relators.iter().map(Relator::label).collect();
    let width = labels.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    for (r, l) in p.relators.iter().zip(&labels) {
        let mark = if r.unverified { " (unverified)" } else { "" };
        let _ = writeln!(out, "  {l:<width$}  {}{mark}", r.word);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::full_presentation;
    use Generator::*;

    #[test]
    fn idents_invert() {
        let gens = [
            A(3), Y, B, D(2), ASub(1, 2), RSub(3, 1), S(1, 2), SBar(2, 3), X(4), YLoop(2), Z(1), W(5), YBar(2),
            Schreier { gen: 3, coset: 1 }, Free(7),
        ];
        for g in gens {
            assert_eq!(from_ident(&g.ident()).unwrap(), g);
        }
        assert!(from_ident("q1").is_err());
    }

    #[test]
    fn labels_invert() {
        let r = Relator::new("D4d", Word::identity()).with_branch("m>=2,l=j", vec![('i', 2), ('k', 3)]);
        let back = parse_label(&r.label()).unwrap();
        assert_eq!((back.family, back.branch, back.indices), (r.family, r.branch, r.indices));
        let mut u = Relator::new("T", Word::identity());
        u.unverified = true;
        assert!(parse_label(&format!("{} unverified", u.label())).unwrap().unverified);
    }

    #[test]
    fn small_presentations_round_trip() {
        for (g, n) in [(1, 1), (2, 1), (3, 2), (2, 3)] {
            let p = full_presentation(g, n).unwrap();
            for f in [Format::Structured, Format::AlgebraText] {
                let s = render(&p, f);
                let q = parse(&s, f).unwrap();
                assert_eq!(q, p, "{f:?} ({g},{n})");
                assert_eq!(render(&q, f), s);
            }
        }
    }

    #[test]
    fn empty_and_free_presentations() {
        let p = Presentation::free(vec![Free(1), Free(2)]);
        for f in [Format::Structured, Format::AlgebraText] {
            assert_eq!(parse(&render(&p, f), f).unwrap(), p);
        }
        let e = Presentation::new(vec![]);
        assert_eq!(parse(&to_structured(&e), Format::Structured).unwrap(), e);
        assert_eq!(parse(&to_algebra_text(&e), Format::AlgebraText).unwrap(), e);
    }

    #[test]
    fn structured_has_one_relator_per_line() {
        let p = full_presentation(2, 1).unwrap();
        let s = to_structured(&p);
        assert_eq!(s.lines().filter(|l| l.contains("\"family\"")).count(), p.relators.len());
        assert!(s.contains("\"surface\": {\"genus\":2,\"boundary\":1}"));
    }

    #[test]
    fn human_lists_every_relator() {
        let p = full_presentation(2, 2).unwrap();
        let h = to_human(&p);
        assert!(h.starts_with("M(N_{2,2})\n"));
        assert_eq!(h.lines().count(), 3 + p.relators.len());
        assert!(parse(&h, Format::Human).is_err());
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(from_structured("{").is_err());
        assert!(from_algebra_text("F := Group();;").is_err());
        assert!("xml".parse::<Format>().is_err());
    }
}
