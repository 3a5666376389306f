//! Generator symbols shared by every alphabet in the crate.
//!
//! A single enum covers mapping-class generators, fundamental-group loops,
//! basis symbols of the orientation subgroup, Reidemeister-Schreier symbols,
//! twist/slide symbols over named curves, and anonymous generators used by
//! ad hoc presentations.

use std::fmt;

use crate::error::{Error, Result};

/// Orientation label of a Dehn twist symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Plus,
    Minus,
}

/// Named simple closed curves on the model surface.
///
/// Index conventions: `Alpha(i)` runs through crosscaps `i, i+1`; `Hole(j)`
/// is the boundary of the `j`-th removed disk; `AlphaHole(i, j)` encloses
/// `Alpha(i)` together with hole `j`; `Rho(i, j)` encloses crosscap `i` and
/// hole `j`; `Sigma`/`SigmaBar` enclose two holes on either side of the
/// first crosscap; `SigmaBarTri(j, k, i)` is `SigmaBar(j, k)` conjugated
/// across crosscaps `1..i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurveName {
    Alpha(u16),
    Beta,
    Mu(u16),
    /// One-sided curve through crosscaps `i..=j` (odd count).
    Nu(u16, u16),
    /// Outer boundary.
    Boundary,
    Hole(u16),
    AlphaHole(u16, u16),
    Rho(u16, u16),
    Sigma(u16, u16),
    SigmaBar(u16, u16),
    SigmaBarTri(u16, u16, u16),
    Zeta1,
    Zeta2,
    /// Boundary of a neighbourhood of `Alpha(i)` with holes `j` and `k`.
    AlphaHoles(u16, u16, u16),
    /// Curve enclosing holes `j < k < l`.
    HoleTriple(u16, u16, u16),
    /// Boundary of a regular neighbourhood of the chain `Alpha(i..=j)`;
    /// `side` distinguishes the two boundary curves of an odd chain.
    ChainBoundary(u16, u16, u16),
    /// The two boundary curves of a neighbourhood of `Mu(i) ∪ Nu(i, j)`.
    SlideBoundary(u16, u16, u16),
    /// Boundary of a Möbius band around `Mu(i)`.
    MobiusBoundary(u16),
}

impl CurveName {
    /// Tag and index list used by the structured serialisation.
    pub fn tag(&self) -> (&'static str, Vec<u16>) {
        use CurveName::*;
        match *self {
            Alpha(i) => ("alpha", vec![i]),
            Beta => ("beta", vec![]),
            Mu(i) => ("mu", vec![i]),
            Nu(i, j) => ("nu", vec![i, j]),
            Boundary => ("delta", vec![]),
            Hole(j) => ("delta_hole", vec![j]),
            AlphaHole(i, j) => ("alpha_sub", vec![i, j]),
            Rho(i, j) => ("rho", vec![i, j]),
            Sigma(i, j) => ("sigma", vec![i, j]),
            SigmaBar(i, j) => ("sigma_bar", vec![i, j]),
            SigmaBarTri(j, k, i) => ("sigma_bar_tri", vec![j, k, i]),
            Zeta1 => ("zeta1", vec![]),
            Zeta2 => ("zeta2", vec![]),
            AlphaHoles(i, j, k) => ("alpha_holes", vec![i, j, k]),
            HoleTriple(j, k, l) => ("hole_triple", vec![j, k, l]),
            ChainBoundary(i, j, s) => ("chain_boundary", vec![i, j, s]),
            SlideBoundary(i, j, s) => ("slide_boundary", vec![i, j, s]),
            MobiusBoundary(i) => ("mobius_boundary", vec![i]),
        }
    }

    /// Inverse of [`CurveName::tag`].
    pub fn from_tag(tag: &str, idx: &[u16]) -> Result<Self> {
        use CurveName::*;
        let bad = || Error::Parse(format!("bad curve `{tag}` with indices {idx:?}"));
        let need = |n: usize| if idx.len() == n { Ok(()) } else { Err(bad()) };
        Ok(match tag {
            "alpha" => { need(1)?; Alpha(idx[0]) }
            "beta" => { need(0)?; Beta }
            "mu" => { need(1)?; Mu(idx[0]) }
            "nu" => { need(2)?; Nu(idx[0], idx[1]) }
            "delta" => { need(0)?; Boundary }
            "delta_hole" => { need(1)?; Hole(idx[0]) }
            "alpha_sub" => { need(2)?; AlphaHole(idx[0], idx[1]) }
            "rho" => { need(2)?; Rho(idx[0], idx[1]) }
            "sigma" => { need(2)?; Sigma(idx[0], idx[1]) }
            "sigma_bar" => { need(2)?; SigmaBar(idx[0], idx[1]) }
            "sigma_bar_tri" => { need(3)?; SigmaBarTri(idx[0], idx[1], idx[2]) }
            "zeta1" => { need(0)?; Zeta1 }
            "zeta2" => { need(0)?; Zeta2 }
            "alpha_holes" => { need(3)?; AlphaHoles(idx[0], idx[1], idx[2]) }
            "hole_triple" => { need(3)?; HoleTriple(idx[0], idx[1], idx[2]) }
            "chain_boundary" => { need(3)?; ChainBoundary(idx[0], idx[1], idx[2]) }
            "slide_boundary" => { need(3)?; SlideBoundary(idx[0], idx[1], idx[2]) }
            "mobius_boundary" => { need(1)?; MobiusBoundary(idx[0]) }
            _ => return Err(bad()),
        })
    }
}

impl fmt::Display for CurveName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (tag, idx) = self.tag();
        f.write_str(tag)?;
        for (p, i) in idx.iter().enumerate() {
            write!(f, "{}{}", if p == 0 { "" } else { "_" }, i)?;
        }
        Ok(())
    }
}

/// A free generator.
///
/// The derived ordering is the canonical ordering used for sorting
/// alphabets and for minimal cyclic rotations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    /// Dehn twist `a_i` about `Alpha(i)`.
    A(u16),
    /// Crosscap slide `y`.
    Y,
    /// Dehn twist `b` about `Beta`.
    B,
    /// Boundary twist `d_j`.
    D(u16),
    /// `a_{i;j}`.
    ASub(u16, u16),
    /// `r_{i;j}`.
    RSub(u16, u16),
    /// `s_{i,j}`.
    S(u16, u16),
    /// `s̄_{i,j}`.
    SBar(u16, u16),
    /// Loop `x_i` of the fundamental group.
    X(u16),
    /// Loop `y_j` of the fundamental group (also a basis symbol of the
    /// orientation subgroup).
    YLoop(u16),
    /// Orientation-subgroup basis symbol for `x_i^2`.
    Z(u16),
    /// Orientation-subgroup basis symbol for `x_{i+1} x_i`.
    W(u16),
    /// Orientation-subgroup basis symbol for `x_1^{-1} y_j x_1`.
    YBar(u16),
    /// Schreier generator `\overline{x u}^{-1} x u` for the ambient
    /// generator at position `gen` (1-based) and coset representative
    /// `coset` (0 = identity, 1 = the odd representative).
    Schreier { gen: u16, coset: u16 },
    /// Dehn twist about a named curve.
    Twist(CurveName, Orientation),
    /// Crosscap pushing map `Y_{mu, alpha}`; the orientation records
    /// whether `alpha` is traversed forwards or backwards.
    Slide(CurveName, CurveName, Orientation),
    /// Anonymous generator.
    Free(u16),
}

impl Generator {
    /// Family tag and indices for the structured format.
    pub fn tag(&self) -> (String, Vec<u16>) {
        use Generator::*;
        match *self {
            A(i) => ("a".into(), vec![i]),
            Y => ("y".into(), vec![]),
            B => ("b".into(), vec![]),
            D(i) => ("d".into(), vec![i]),
            ASub(i, j) => ("a_sub".into(), vec![i, j]),
            RSub(i, j) => ("r_sub".into(), vec![i, j]),
            S(i, j) => ("s".into(), vec![i, j]),
            SBar(i, j) => ("s_bar".into(), vec![i, j]),
            X(i) => ("x".into(), vec![i]),
            YLoop(i) => ("y_loop".into(), vec![i]),
            Z(i) => ("z".into(), vec![i]),
            W(i) => ("w".into(), vec![i]),
            YBar(i) => ("y_bar".into(), vec![i]),
            Schreier { gen, coset } => ("schreier".into(), vec![gen, coset]),
            Twist(c, o) => {
                let (t, idx) = c.tag();
                let sign = if o == Orientation::Plus { "+" } else { "-" };
                (format!("twist{sign}:{t}"), idx)
            }
            Slide(m, a, o) => {
                let (tm, mut im) = m.tag();
                let (ta, ia) = a.tag();
                im.extend(ia);
                let sign = if o == Orientation::Plus { "+" } else { "-" };
                (format!("slide{sign}:{tm}:{ta}"), im)
            }
            Free(i) => ("free".into(), vec![i]),
        }
    }

    /// Inverse of [`Generator::tag`].
    pub fn from_tag(tag: &str, idx: &[u16]) -> Result<Self> {
        use Generator::*;
        let bad = || Error::Parse(format!("bad generator `{tag}` with indices {idx:?}"));
        let need = |n: usize| if idx.len() == n { Ok(()) } else { Err(bad()) };
        if let Some(rest) = tag.strip_prefix("twist") {
            let (o, curve) = if let Some(c) = rest.strip_prefix("+:") {
                (Orientation::Plus, c)
            } else if let Some(c) = rest.strip_prefix("-:") {
                (Orientation::Minus, c)
            } else {
                return Err(bad());
            };
            return Ok(Twist(CurveName::from_tag(curve, idx)?, o));
        }
        let slide = tag
            .strip_prefix("slide+:")
            .map(|r| (Orientation::Plus, r))
            .or_else(|| tag.strip_prefix("slide-:").map(|r| (Orientation::Minus, r)));
        if let Some((o, rest)) = slide {
            let (tm, ta) = rest.split_once(':').ok_or_else(bad)?;
            for split in 0..=idx.len() {
                if let (Ok(m), Ok(a)) = (
                    CurveName::from_tag(tm, &idx[..split]),
                    CurveName::from_tag(ta, &idx[split..]),
                ) {
                    return Ok(Slide(m, a, o));
                }
            }
            return Err(bad());
        }
        Ok(match tag {
            "a" => { need(1)?; A(idx[0]) }
            "y" => { need(0)?; Y }
            "b" => { need(0)?; B }
            "d" => { need(1)?; D(idx[0]) }
            "a_sub" => { need(2)?; ASub(idx[0], idx[1]) }
            "r_sub" => { need(2)?; RSub(idx[0], idx[1]) }
            "s" => { need(2)?; S(idx[0], idx[1]) }
            "s_bar" => { need(2)?; SBar(idx[0], idx[1]) }
            "x" => { need(1)?; X(idx[0]) }
            "y_loop" => { need(1)?; YLoop(idx[0]) }
            "z" => { need(1)?; Z(idx[0]) }
            "w" => { need(1)?; W(idx[0]) }
            "y_bar" => { need(1)?; YBar(idx[0]) }
            "schreier" => { need(2)?; Schreier { gen: idx[0], coset: idx[1] } }
            "free" => { need(1)?; Free(idx[0]) }
            _ => return Err(bad()),
        })
    }

    /// Identifier usable in computer-algebra scripts.
    pub fn ident(&self) -> String {
        use Generator::*;
        match *self {
            A(i) => format!("a{i}"),
            Y => "y".into(),
            B => "b".into(),
            D(i) => format!("d{i}"),
            ASub(i, j) => format!("a{i}_{j}"),
            RSub(i, j) => format!("r{i}_{j}"),
            S(i, j) => format!("s{i}_{j}"),
            SBar(i, j) => format!("sb{i}_{j}"),
            X(i) => format!("x{i}"),
            YLoop(i) => format!("yl{i}"),
            Z(i) => format!("z{i}"),
            W(i) => format!("w{i}"),
            YBar(i) => format!("yb{i}"),
            Schreier { gen, coset } => format!("sch{gen}_{coset}"),
            Twist(c, o) => format!("t{}_{}", if o == Orientation::Plus { "p" } else { "m" }, c),
            Slide(m, a, o) => {
                format!("Y{}_{m}_{a}", if o == Orientation::Plus { "p" } else { "m" })
            }
            Free(i) => format!("f{i}"),
        }
    }

    /// True for boundary twists `d_j`, which are central in every
    /// presentation built here.
    pub fn is_boundary_twist(&self) -> bool {
        matches!(self, Generator::D(_))
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Generator::*;
        match *self {
            A(i) => write!(f, "a_{i}"),
            Y => write!(f, "y"),
            B => write!(f, "b"),
            D(i) => write!(f, "d_{i}"),
            ASub(i, j) => write!(f, "a_{{{i};{j}}}"),
            RSub(i, j) => write!(f, "r_{{{i};{j}}}"),
            S(i, j) => write!(f, "s_{{{i},{j}}}"),
            SBar(i, j) => write!(f, "sbar_{{{i},{j}}}"),
            X(i) => write!(f, "x_{i}"),
            YLoop(i) => write!(f, "y_{i}"),
            Z(i) => write!(f, "z_{i}"),
            W(i) => write!(f, "w_{i}"),
            YBar(i) => write!(f, "ybar_{i}"),
            Schreier { gen, coset } => write!(f, "B[{gen}|{coset}]"),
            Twist(c, o) => write!(f, "t[{c}]{}", if o == Orientation::Plus { "" } else { "'" }),
            Slide(m, a, o) => {
                write!(f, "Y[{m},{a}{}]", if o == Orientation::Plus { "" } else { "^-1" })
            }
            Free(i) => write!(f, "f_{i}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        let gens = [
            Generator::A(3),
            Generator::Y,
            Generator::B,
            Generator::D(2),
            Generator::ASub(1, 2),
            Generator::RSub(4, 1),
            Generator::S(1, 3),
            Generator::SBar(2, 3),
            Generator::X(5),
            Generator::YLoop(1),
            Generator::Z(2),
            Generator::W(1),
            Generator::YBar(2),
            Generator::Schreier { gen: 2, coset: 1 },
            Generator::Twist(CurveName::SigmaBarTri(1, 2, 3), Orientation::Minus),
            Generator::Slide(CurveName::Mu(1), CurveName::Nu(1, 3), Orientation::Plus),
            Generator::Slide(CurveName::Mu(1), CurveName::Alpha(1), Orientation::Minus),
            Generator::Free(7),
        ];
        for g in gens {
            let (t, i) = g.tag();
            assert_eq!(Generator::from_tag(&t, &i).unwrap(), g);
        }
    }

    #[test]
    fn unknown_tag_is_rejected() {
        assert!(Generator::from_tag("q", &[1]).is_err());
        assert!(Generator::from_tag("a", &[1, 2]).is_err());
    }
}
