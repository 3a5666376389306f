//! Relations of the infinite presentation instantiated on cataloged curves.
//!
//! Every instance is an identity `lhs = rhs` over `Twist`/`Slide` symbols.
//! The curve data is taken on trust; only its shape is validated here.

use std::fmt;

use crate::error::{Error, Result};
use crate::homology::{Model, RepMatrix};
use crate::presentation::Relator;
use crate::symbol::{CurveName, Generator, Orientation};
use crate::word::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Schema {
    /// `t_{c;+} = t_{c;-}^{-1}`.
    TwistInverse,
    /// `Y_{mu,alpha} = Y_{mu,alpha^{-1}}^{-1}`.
    SlideInverse,
    /// `t_c = 1` for `c` bounding a disk or a Möbius band.
    KillTrivial,
    Braid,
    Chain,
    Lantern,
    CrosscapProduct,
    CrosscapToTwists,
}

impl Schema {
    pub const ALL: [Schema; 8] = [
        Schema::TwistInverse,
        Schema::SlideInverse,
        Schema::KillTrivial,
        Schema::Braid,
        Schema::Chain,
        Schema::Lantern,
        Schema::CrosscapProduct,
        Schema::CrosscapToTwists,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Schema::TwistInverse => "twist-inverse",
            Schema::SlideInverse => "slide-inverse",
            Schema::KillTrivial => "kill-trivial",
            Schema::Braid => "braid",
            Schema::Chain => "chain",
            Schema::Lantern => "lantern",
            Schema::CrosscapProduct => "crosscap-product",
            Schema::CrosscapToTwists => "crosscap-to-twists",
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A twist about `curve` raised to `eps = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedTwist {
    pub curve: CurveName,
    pub orientation: Orientation,
    pub eps: i32,
}

impl SignedTwist {
    pub fn plus(curve: CurveName) -> Self {
        SignedTwist { curve, orientation: Orientation::Plus, eps: 1 }
    }

    fn word(&self) -> Word {
        Word::power(Generator::Twist(self.curve, self.orientation), self.eps)
    }

    fn check(&self) -> Result<()> {
        if self.eps.abs() != 1 {
            return Err(Error::Schema(format!("exponent {} on {} is not ±1", self.eps, self.curve)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaInstance {
    pub schema: Schema,
    pub label: String,
    pub lhs: Word,
    pub rhs: Word,
}

impl SchemaInstance {
    /// `lhs · rhs^{-1}`.
    pub fn relator_word(&self) -> Word {
        let mut w = self.lhs.clone();
        w.push_word(&self.rhs.inverse());
        w
    }

    pub fn relator(&self) -> Relator {
        Relator::new("schema-instance", self.relator_word()).with_branch(&format!("{}:{}", self.schema, self.label), Vec::new())
    }

    pub fn symbols(&self) -> Vec<Generator> {
        let mut s = self.lhs.symbols();
        s.extend(self.rhs.symbols());
        s.into_iter().collect()
    }
}

fn product(ts: &[SignedTwist]) -> Word {
    let mut w = Word::identity();
    for t in ts {
        w.push_word(&t.word());
    }
    w
}

pub fn twist_inverse(c: CurveName) -> SchemaInstance {
    SchemaInstance {
        schema: Schema::TwistInverse,
        label: c.to_string(),
        lhs: Word::gen(Generator::Twist(c, Orientation::Plus)),
        rhs: Word::power(Generator::Twist(c, Orientation::Minus), -1),
    }
}

pub fn slide_inverse(mu: CurveName, alpha: CurveName) -> SchemaInstance {
    SchemaInstance {
        schema: Schema::SlideInverse,
        label: format!("{mu},{alpha}"),
        lhs: Word::gen(Generator::Slide(mu, alpha, Orientation::Plus)),
        rhs: Word::power(Generator::Slide(mu, alpha, Orientation::Minus), -1),
    }
}

pub fn kill_trivial(c: CurveName) -> SchemaInstance {
    SchemaInstance {
        schema: Schema::KillTrivial,
        label: c.to_string(),
        lhs: Word::gen(Generator::Twist(c, Orientation::Plus)),
        rhs: Word::identity(),
    }
}

/// `f s f^{-1} = s'^{eps}` where `s'` is the symbol of the image curve.
pub fn braid(f: &Word, s: Generator, image: Generator, eps: i32) -> Result<SchemaInstance> {
    let ok = |g: Generator| matches!(g, Generator::Twist(..) | Generator::Slide(..));
    if !ok(s) || !ok(image) {
        return Err(Error::Schema(format!("braid needs twist or slide symbols, got {s} and {image}")));
    }
    if eps.abs() != 1 {
        return Err(Error::Schema(format!("braid exponent {eps}")));
    }
    Ok(SchemaInstance {
        schema: Schema::Braid,
        label: format!("{} ; {s} -> {image}", f.display()),
        lhs: Word::gen(s).conjugate(f),
        rhs: Word::power(image, eps),
    })
}

/// `(t_{c_1} ... t_{c_k})^{2k+2} = t_delta` for even `k`, and
/// `(t_{c_1} ... t_{c_k})^{k+1} = t_{delta_1} t_{delta_2}` for odd `k`.
pub fn chain(curves: &[SignedTwist], boundary: &[SignedTwist]) -> Result<SchemaInstance> {
    let k = curves.len();
    if k == 0 {
        return Err(Error::Schema("empty chain".into()));
    }
    let want = if k.is_multiple_of(2) { 1 } else { 2 };
    if boundary.len() != want {
        return Err(Error::Schema(format!("a {k}-chain has {want} boundary curve(s), got {}", boundary.len())));
    }
    for t in curves.iter().chain(boundary) {
        t.check()?;
    }
    let power = if k.is_multiple_of(2) { 2 * k + 2 } else { k + 1 };
    let names: Vec<String> = curves.iter().map(|t| t.curve.to_string()).collect();
    Ok(SchemaInstance {
        schema: Schema::Chain,
        label: names.join(","),
        lhs: product(curves).pow(power as i32),
        rhs: product(boundary),
    })
}

/// `t_{12} t_{23} t_{13} = t_1 t_2 t_3 t_4` on a sphere with four holes.
pub fn lantern(inner: [SignedTwist; 3], outer: [SignedTwist; 4]) -> Result<SchemaInstance> {
    for t in inner.iter().chain(&outer) {
        t.check()?;
    }
    let mut seen: Vec<CurveName> = outer.iter().map(|t| t.curve).collect();
    seen.sort();
    seen.dedup();
    if seen.len() != 4 {
        return Err(Error::Schema("lantern boundary curves must be distinct".into()));
    }
    Ok(SchemaInstance {
        schema: Schema::Lantern,
        label: format!("{},{},{}", inner[0].curve, inner[1].curve, inner[2].curve),
        lhs: product(&inner),
        rhs: product(&outer),
    })
}

/// `Y_{mu, alpha beta} = Y_{mu, alpha} Y_{mu, beta}`; `joined` names the
/// product loop.
pub fn crosscap_product(mu: CurveName, alpha: CurveName, beta: CurveName, joined: CurveName) -> SchemaInstance {
    let y = |a| Generator::Slide(mu, a, Orientation::Plus);
    SchemaInstance {
        schema: Schema::CrosscapProduct,
        label: format!("{mu};{alpha}*{beta}"),
        lhs: Word::gen(y(joined)),
        rhs: Word::reduce([(y(alpha), 1), (y(beta), 1)]),
    }
}

/// `Y_{mu, alpha} = t_{delta_1}^{e_1} t_{delta_2}^{-e_2}`.
pub fn crosscap_to_twists(mu: CurveName, alpha: CurveName, d1: SignedTwist, d2: SignedTwist) -> Result<SchemaInstance> {
    d1.check()?;
    d2.check()?;
    let d2inv = SignedTwist { eps: -d2.eps, ..d2 };
    Ok(SchemaInstance {
        schema: Schema::CrosscapToTwists,
        label: format!("{mu},{alpha}"),
        lhs: Word::gen(Generator::Slide(mu, alpha, Orientation::Plus)),
        rhs: product(&[d1, d2inv]),
    })
}

/// Instances over the curves cataloged for `N_{g,n}`.
pub fn standard_instances(g: u16, n: u16) -> Vec<SchemaInstance> {
    use CurveName::*;
    let p = SignedTwist::plus;
    let n = n.max(1);
    let mut out = Vec::new();

    for i in 1..g {
        out.push(twist_inverse(Alpha(i)));
    }
    for j in 1..n {
        out.push(twist_inverse(Hole(j)));
    }
    if g >= 2 {
        out.push(slide_inverse(Mu(1), Alpha(1)));
    }
    for j in (3..=g).step_by(2) {
        out.push(slide_inverse(Mu(1), Nu(1, j)));
    }
    for i in 1..=g {
        out.push(kill_trivial(MobiusBoundary(i)));
    }

    for i in 1..g {
        for j in i + 2..g {
            let f = Word::gen(Generator::Twist(Alpha(i), Orientation::Plus));
            let c = Generator::Twist(Alpha(j), Orientation::Plus);
            out.extend(braid(&f, c, c, 1));
        }
        if i + 1 < g {
            let f = product(&[p(Alpha(i)), p(Alpha(i + 1))]);
            out.extend(braid(&f, Generator::Twist(Alpha(i), Orientation::Plus), Generator::Twist(Alpha(i + 1), Orientation::Plus), 1));
        }
    }
    if g >= 2 {
        let y = Generator::Slide(Mu(1), Alpha(1), Orientation::Plus);
        for j in 3..g {
            out.extend(braid(&Word::gen(Generator::Twist(Alpha(j), Orientation::Plus)), y, y, 1));
        }
    }

    for i in 1..g {
        for len in 1..=(g - i) {
            let j = i + len - 1;
            let curves: Vec<SignedTwist> = (i..=j).map(|c| p(Alpha(c))).collect();
            let boundary: Vec<SignedTwist> = if len % 2 == 0 {
                vec![p(ChainBoundary(i, j, 1))]
            } else {
                vec![p(ChainBoundary(i, j, 1)), p(ChainBoundary(i, j, 2))]
            };
            out.extend(chain(&curves, &boundary));
        }
    }

    for i in 1..g {
        for j in 1..n {
            for k in j + 1..n {
                out.extend(lantern(
                    [p(AlphaHole(i, j)), p(Sigma(j, k)), p(AlphaHole(i, k))],
                    [p(Alpha(i)), p(Hole(j)), p(Hole(k)), p(AlphaHoles(i, j, k))],
                ));
            }
        }
    }
    for j in 1..n {
        for k in j + 1..n {
            for l in k + 1..n {
                out.extend(lantern(
                    [p(Sigma(j, k)), p(Sigma(k, l)), p(Sigma(j, l))],
                    [p(Hole(j)), p(Hole(k)), p(Hole(l)), p(HoleTriple(j, k, l))],
                ));
            }
        }
    }

    for i in 1..=g {
        for j in (i..=g).step_by(2).skip(1) {
            out.extend(crosscap_to_twists(Mu(i), Nu(i, j), p(SlideBoundary(i, j, 1)), p(SlideBoundary(i, j, 2))));
        }
    }
    if g >= 2 {
        out.extend(crosscap_to_twists(Mu(1), Alpha(1), p(SlideBoundary(1, 2, 1)), p(SlideBoundary(1, 2, 2))));
    }
    out
}

/// Both sides of an instance evaluated in the homology model.
#[derive(Clone, Debug)]
pub struct SchemaCheck {
    pub lhs: RepMatrix,
    pub rhs: RepMatrix,
}

impl SchemaCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub fn check_instance(model: &Model, inst: &SchemaInstance) -> Result<SchemaCheck> {
    let rep = model.rep(&inst.symbols())?;
    Ok(SchemaCheck { lhs: rep.eval(&inst.lhs)?, rhs: rep.eval(&inst.rhs)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use CurveName::*;

    fn p(c: CurveName) -> SignedTwist {
        SignedTwist::plus(c)
    }

    #[test]
    fn two_chain_word_shape() {
        let c = chain(&[p(Alpha(1)), p(Alpha(2))], &[p(ChainBoundary(1, 2, 1))]).unwrap();
        assert_eq!(c.lhs.len(), 12);
        assert_eq!(c.rhs, Word::gen(Generator::Twist(ChainBoundary(1, 2, 1), Orientation::Plus)));
    }

    #[test]
    fn malformed_tuples_are_rejected() {
        assert!(chain(&[], &[]).is_err());
        assert!(chain(&[p(Alpha(1))], &[p(Boundary)]).is_err());
        let bad = SignedTwist { eps: 2, ..p(Hole(1)) };
        assert!(chain(&[p(Alpha(1)), p(Alpha(2))], &[bad]).is_err());
        let outer = [p(Hole(1)), p(Hole(1)), p(Hole(2)), p(Hole(3))];
        assert!(lantern([p(Sigma(1, 2)), p(Sigma(2, 3)), p(Sigma(1, 3))], outer).is_err());
        let t = Generator::Twist(Alpha(1), Orientation::Plus);
        assert!(braid(&Word::identity(), Generator::A(1), t, 1).is_err());
    }

    #[test]
    fn lanterns_hold_with_nontrivial_sides() {
        let model = Model::new(4, 4).unwrap();
        let lanterns: Vec<_> =
            standard_instances(4, 4).into_iter().filter(|s| s.schema == Schema::Lantern).collect();
        assert!(lanterns.len() >= 3);
        let mut nontrivial = 0;
        for l in &lanterns {
            let c = check_instance(&model, l).unwrap();
            assert!(c.holds(), "{}", l.label);
            nontrivial += usize::from(!c.lhs.is_identity());
        }
        assert!(nontrivial >= 3);
    }

    #[test]
    fn chains_hold_as_matrices() {
        let model = Model::new(6, 2).unwrap();
        let chains: Vec<_> = standard_instances(6, 2).into_iter().filter(|s| s.schema == Schema::Chain).collect();
        assert!(chains.len() >= 3);
        for c in &chains {
            assert!(check_instance(&model, c).unwrap().holds(), "{}", c.label);
        }
    }

    #[test]
    fn one_chain_is_the_annulus() {
        let model = Model::new(3, 1).unwrap();
        let c = chain(&[p(Alpha(1))], &[p(ChainBoundary(1, 1, 1)), p(ChainBoundary(1, 1, 2))]).unwrap();
        assert!(check_instance(&model, &c).unwrap().holds());
        let t = model.rep(&c.symbols()).unwrap();
        assert!(!t.matrix(Generator::Twist(ChainBoundary(1, 1, 1), Orientation::Plus)).unwrap().is_identity());
    }

    #[test]
    fn a_wrong_chain_power_fails() {
        let model = Model::new(4, 1).unwrap();
        let mut c = chain(&[p(Alpha(1)), p(Alpha(2)), p(Alpha(3))], &[p(ChainBoundary(1, 3, 1)), p(ChainBoundary(1, 3, 2))]).unwrap();
        c.lhs = product(&[p(Alpha(1)), p(Alpha(2)), p(Alpha(3))]).pow(3);
        assert!(!check_instance(&model, &c).unwrap().holds());
    }

    #[test]
    fn every_standard_instance_holds() {
        for (g, n) in [(1, 1), (2, 3), (4, 4), (7, 2), (5, 5)] {
            let model = Model::new(g, n).unwrap();
            for s in standard_instances(g, n) {
                let c = check_instance(&model, &s).unwrap();
                assert!(c.holds(), "({g},{n}) {} {}", s.schema, s.label);
            }
        }
    }

    #[test]
    fn involution_relators_are_trivial() {
        let model = Model::new(5, 2).unwrap();
        for s in standard_instances(5, 2) {
            if matches!(s.schema, Schema::TwistInverse | Schema::SlideInverse) {
                let rep = model.rep(&s.symbols()).unwrap();
                assert!(rep.eval(&s.relator_word()).unwrap().is_identity());
            }
        }
    }

    #[test]
    fn every_schema_has_a_builder_instance() {
        let mut seen: Vec<Schema> = standard_instances(6, 4).iter().map(|s| s.schema).collect();
        seen.push(crosscap_product(Mu(1), Alpha(1), Nu(1, 3), Nu(1, 3)).schema);
        seen.sort();
        seen.dedup();
        assert_eq!(seen, Schema::ALL.to_vec());
    }
}
