//! Finitely generated subgroups of free groups.
//!
//! Stallings graphs give membership and rank; index-two subgroups defined by
//! a `Z/2` character get a Schreier transversal and Reidemeister-Schreier
//! rewriting. [`OrientationKernel`] specialises this to the subgroup of the
//! surface group generated by loops that preserve a local orientation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::expr::{MacroMode, Resolver, Std, Vars};
use crate::symbol::Generator;
use crate::word::Word;

type Label = (Generator, i8);

/// A labelled graph with a base vertex. After [`SubgroupGraph::fold`] it is
/// the folded core graph of the subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupGraph {
    ambient: Vec<Generator>,
    /// Outgoing half-edges per vertex; `(g, -1)` traverses a `g`-edge backwards.
    adj: Vec<BTreeMap<Label, usize>>,
}

impl SubgroupGraph {
    /// Folds the bouquet of `gens` over `ambient`.
    pub fn fold(gens: &[Word], ambient: &[Generator]) -> Result<SubgroupGraph> {
        let amb: BTreeSet<&Generator> = ambient.iter().collect();
        let mut vertices = 1usize;
        let mut edges: Vec<(usize, Generator, usize)> = Vec::new();
        for w in gens {
            for g in w.symbols() {
                if !amb.contains(&g) {
                    return Err(Error::UnknownSymbol(g.to_string()));
                }
            }
            let letters: Vec<Label> = w.letters().collect();
            let mut cur = 0;
            for (p, &(g, s)) in letters.iter().enumerate() {
                let next = if p + 1 == letters.len() {
                    0
                } else {
                    vertices += 1;
                    vertices - 1
                };
                edges.push(if s > 0 { (cur, g, next) } else { (next, g, cur) });
                cur = next;
            }
        }
        let mut uf = UnionFind::new(vertices);
        loop {
            let mut changed = false;
            let mut out: BTreeMap<(usize, Generator), usize> = BTreeMap::new();
            let mut inc: BTreeMap<(usize, Generator), usize> = BTreeMap::new();
            for &(u, g, v) in &edges {
                let (u, v) = (uf.find(u), uf.find(v));
                if let Some(&w) = out.get(&(u, g)) {
                    changed |= uf.union(w, v);
                } else {
                    out.insert((u, g), v);
                }
                if let Some(&w) = inc.get(&(v, g)) {
                    changed |= uf.union(w, u);
                } else {
                    inc.insert((v, g), u);
                }
            }
            if !changed {
                break;
            }
        }
        let mut adj: BTreeMap<usize, BTreeMap<Label, usize>> = BTreeMap::new();
        adj.insert(0, BTreeMap::new());
        for &(u, g, v) in &edges {
            let (u, v) = (uf.find(u), uf.find(v));
            adj.entry(u).or_default().insert((g, 1), v);
            adj.entry(v).or_default().insert((g, -1), u);
        }
        let index: BTreeMap<usize, usize> = adj.keys().enumerate().map(|(p, &v)| (v, p)).collect();
        let adj = adj
            .values()
            .map(|m| m.iter().map(|(&l, &u)| (l, index[&u])).collect())
            .collect();
        let mut graph = SubgroupGraph { ambient: ambient.to_vec(), adj };
        graph.prune();
        Ok(graph)
    }

    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    /// Number of (undirected) edges.
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|m| m.keys().filter(|l| l.1 > 0).count()).sum()
    }

    /// Cycle rank `E - V + 1`.
    pub fn rank(&self) -> usize {
        self.edge_count() + 1 - self.vertex_count()
    }

    /// True iff `w` reads a closed path at the base vertex.
    pub fn contains(&self, w: &Word) -> Result<bool> {
        for g in w.symbols() {
            if !self.ambient.contains(&g) {
                return Err(Error::UnknownSymbol(g.to_string()));
            }
        }
        let mut v = 0;
        for l in w.letters() {
            match self.adj[v].get(&l) {
                Some(&u) => v = u,
                None => return Ok(false),
            }
        }
        Ok(v == 0)
    }

    /// Positive edges `(from, label, to)` in BFS numbering from the base.
    /// Two folded graphs are isomorphic (as based labelled graphs) iff their
    /// canonical edge lists agree.
    pub fn canonical_edges(&self) -> Vec<(usize, Generator, usize)> {
        let mut num = vec![usize::MAX; self.adj.len()];
        let mut order = Vec::new();
        let mut q = VecDeque::from([0usize]);
        num[0] = 0;
        while let Some(v) = q.pop_front() {
            order.push(v);
            for &u in self.adj[v].values() {
                if num[u] == usize::MAX {
                    num[u] = order.len() + q.len();
                    q.push_back(u);
                }
            }
        }
        let mut edges = Vec::new();
        for (v, m) in self.adj.iter().enumerate() {
            for (&(g, s), &u) in m {
                if s > 0 {
                    edges.push((num[v], g, num[u]));
                }
            }
        }
        edges.sort();
        edges
    }

    pub fn is_isomorphic(&self, other: &SubgroupGraph) -> bool {
        self.vertex_count() == other.vertex_count() && self.canonical_edges() == other.canonical_edges()
    }

    /// Repeatedly deletes non-base vertices of degree one.
    fn prune(&mut self) {
        loop {
            let leaf = (1..self.adj.len()).find(|&v| self.adj[v].len() == 1);
            let Some(v) = leaf else { break };
            let (&(g, s), &u) = self.adj[v].iter().next().unwrap();
            self.adj[u].remove(&(g, -s));
            self.adj[v].clear();
            self.compact();
        }
    }

    /// Drops isolated non-base vertices and renumbers.
    fn compact(&mut self) {
        let keep: Vec<usize> =
            (0..self.adj.len()).filter(|&v| v == 0 || !self.adj[v].is_empty()).collect();
        let mut map = vec![usize::MAX; self.adj.len()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        self.adj = keep
            .iter()
            .map(|&old| self.adj[old].iter().map(|(&l, &u)| (l, map[u])).collect())
            .collect();
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Merges two classes keeping the smaller root; false if already merged.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        let (keep, gone) = if a < b { (a, b) } else { (b, a) };
        self.parent[gone] = keep;
        true
    }
}

/// A homomorphism from the free group on `alphabet` to `Z/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    alphabet: Vec<Generator>,
    values: Vec<u8>,
}

impl Character {
    pub fn new(alphabet: Vec<Generator>, values: Vec<u8>) -> Result<Character> {
        if alphabet.len() != values.len() || values.iter().any(|&v| v > 1) {
            return Err(Error::BadCharacter);
        }
        Ok(Character { alphabet, values })
    }

    pub fn alphabet(&self) -> &[Generator] {
        &self.alphabet
    }

    fn position(&self, g: Generator) -> Result<usize> {
        self.alphabet.iter().position(|&h| h == g).ok_or_else(|| Error::UnknownSymbol(g.to_string()))
    }

    pub fn value(&self, w: &Word) -> Result<u8> {
        let mut s = 0i64;
        for &(g, e) in w.runs() {
            s += self.values[self.position(g)?] as i64 * e as i64;
        }
        Ok(s.rem_euclid(2) as u8)
    }

    /// Shortlex-least transversal: `{1}` for the trivial character,
    /// otherwise `{1, t}` with `t` the first generator of value one.
    pub fn transversal(&self) -> Vec<Word> {
        match self.values.iter().position(|&v| v == 1) {
            None => vec![Word::identity()],
            Some(p) => vec![Word::identity(), Word::gen(self.alphabet[p])],
        }
    }

    fn rep(&self, coset: u8) -> Word {
        self.transversal()[coset as usize].clone()
    }

    /// Defining word `\overline{x u}^{-1} x u` of a Schreier symbol.
    pub fn schreier_word(&self, gen: usize, coset: u8) -> Word {
        let x = self.alphabet[gen];
        let u = self.rep(coset);
        let xu = &Word::gen(x) * &u;
        let c = (self.values[gen] + coset) % 2;
        &self.rep(c).inverse() * &xu
    }

    /// The Reidemeister-Schreier generating set, as symbols and defining
    /// words, omitting symbols whose word is trivial.
    pub fn schreier_generators(&self) -> Vec<(Generator, Word)> {
        let cosets = self.transversal().len() as u8;
        let mut out = Vec::new();
        for gen in 0..self.alphabet.len() {
            for coset in 0..cosets {
                let w = self.schreier_word(gen, coset);
                if !w.is_identity() {
                    out.push((Generator::Schreier { gen: gen as u16 + 1, coset: coset as u16 }, w));
                }
            }
        }
        out
    }

    /// Reidemeister-Schreier rewriting of a kernel element into Schreier
    /// symbols.
    pub fn rewrite(&self, w: &Word) -> Result<Word> {
        if self.value(w)? != 0 {
            return Err(Error::NotInSubgroup(w.to_string()));
        }
        let cosets = self.transversal().len() as u8;
        let letters: Vec<_> = w.letters().collect();
        let mut u: u8 = 0;
        let mut gammas = Vec::with_capacity(letters.len());
        for &(g, s) in letters.iter().rev() {
            let p = self.position(g)?;
            let next = if cosets == 1 { 0 } else { (u + self.values[p]) % 2 };
            let (coset, sign) = if s > 0 { (u, 1) } else { (next, -1) };
            if !self.schreier_word(p, coset).is_identity() {
                gammas.push((Generator::Schreier { gen: p as u16 + 1, coset: coset as u16 }, sign));
            }
            u = next;
        }
        gammas.reverse();
        Ok(Word::reduce(gammas))
    }

    /// Substitutes the defining words of Schreier symbols.
    pub fn expand(&self, w: &Word) -> Word {
        w.substitute(|g| match g {
            Generator::Schreier { gen, coset } => {
                Some(self.schreier_word(gen as usize - 1, coset as u8))
            }
            _ => None,
        })
    }
}

/// The subgroup of `π_1(N_{g,n-1}) = F(x_1..x_g, y_1..y_{n-2})` of loops
/// with even total `x`-exponent, with its distinguished free basis
/// `z_i = x_i^2`, `w_i = x_{i+1} x_i`, `y_k`, `ybar_k = x_1^{-1} y_k x_1`.
#[derive(Clone, Debug)]
pub struct OrientationKernel {
    pub g: u16,
    /// Number of `y` loops, `n - 2`.
    pub m: u16,
    character: Character,
}

impl OrientationKernel {
    /// Kernel for the step from `N_{g,n-1}` to `N_{g,n}`; needs `n >= 2`.
    pub fn new(g: u16, n: u16) -> Result<Self> {
        if g < 1 || n < 2 {
            return Err(Error::InvalidSurface { g: g as i64, n: n as i64 });
        }
        let m = n - 2;
        let mut alphabet: Vec<Generator> = (1..=g).map(Generator::X).collect();
        alphabet.extend((1..=m).map(Generator::YLoop));
        let values = alphabet.iter().map(|a| matches!(a, Generator::X(_)) as u8).collect();
        Ok(OrientationKernel { g, m, character: Character::new(alphabet, values)? })
    }

    pub fn character(&self) -> &Character {
        &self.character
    }

    pub fn ambient(&self) -> &[Generator] {
        self.character.alphabet()
    }

    /// Basis symbols `z_1..z_g, w_1..w_{g-1}, y_1..y_m, ybar_1..ybar_m`.
    pub fn basis(&self) -> Vec<Generator> {
        let mut b: Vec<Generator> = (1..=self.g).map(Generator::Z).collect();
        b.extend((1..self.g).map(Generator::W));
        b.extend((1..=self.m).map(Generator::YLoop));
        b.extend((1..=self.m).map(Generator::YBar));
        b
    }

    /// Loop represented by a basis symbol.
    pub fn basis_word(&self, s: Generator) -> Result<Word> {
        use Generator::*;
        Ok(match s {
            Z(i) if i >= 1 && i <= self.g => Word::power(X(i), 2),
            W(i) if i >= 1 && i < self.g => Word::reduce([(X(i + 1), 1), (X(i), 1)]),
            YLoop(k) if k >= 1 && k <= self.m => Word::gen(YLoop(k)),
            YBar(k) if k >= 1 && k <= self.m => {
                Word::reduce([(X(1), -1), (YLoop(k), 1), (X(1), 1)])
            }
            _ => return Err(Error::UnknownSymbol(s.to_string())),
        })
    }

    /// Basis words in the ambient group.
    pub fn basis_words(&self) -> Vec<Word> {
        self.basis().into_iter().map(|s| self.basis_word(s).expect("basis symbol")).collect()
    }

    /// Schreier symbol expressed in the distinguished basis.
    pub fn schreier_to_basis(&self, gen: u16, coset: u16) -> Result<Word> {
        use Generator::*;
        let x = *self
            .ambient()
            .get(gen as usize - 1)
            .ok_or_else(|| Error::UnknownSymbol(format!("Schreier generator {gen}")))?;
        Ok(match (x, coset) {
            (X(1), 1) => Word::gen(Z(1)),
            (X(i), 1) => {
                // x_i x_1 = w_{i-1} z_{i-1}^{-1} ... w_2 z_2^{-1} w_1
                let mut w = Word::identity();
                for p in (2..i).rev() {
                    w.push(W(p), 1);
                    w.push(Z(p), -1);
                }
                w.push(W(1), 1);
                w
            }
            (X(j), 0) if j >= 2 => {
                // x_1^{-1} x_j = w_1^{-1} z_2 w_2^{-1} z_3 ... w_{j-1}^{-1} z_j
                let mut w = Word::identity();
                for p in 1..j {
                    w.push(W(p), -1);
                    w.push(Z(p + 1), 1);
                }
                w
            }
            (YLoop(k), 0) => Word::gen(YLoop(k)),
            (YLoop(k), 1) => Word::gen(YBar(k)),
            _ => return Err(Error::UnknownSymbol(format!("Schreier generator {gen}|{coset}"))),
        })
    }

    /// Writes a kernel element in the distinguished basis.
    pub fn to_basis(&self, w: &Word) -> Result<Word> {
        let r = self.character.rewrite(w)?;
        r.try_map(|s| match s {
            Generator::Schreier { gen, coset } => self.schreier_to_basis(gen, coset),
            other => Err(Error::UnknownSymbol(other.to_string())),
        })
    }

    /// Substitutes basis symbols by their loops.
    pub fn from_basis(&self, w: &Word) -> Result<Word> {
        w.try_map(|s| self.basis_word(s))
    }

    /// Image of a kernel loop under the pushing homomorphism into the
    /// mapping class group of `N_{g,n}`: `z_i ↦ r_{i;k}`,
    /// `w_i ↦ a_{i;k} a_i^{-1}`, `y_l ↦ s_{l,k} d_l^{-1}`,
    /// `ybar_l ↦ sbar_{l,k} d_l^{-1}` with `k = n-1`.
    pub fn push(&self, loop_word: &Word) -> Result<Word> {
        let b = self.to_basis(loop_word)?;
        basis_to_mapping_classes(&b, self.m + 1)
    }
}

/// Replaces basis symbols `z, w, y, ybar` by their mapping-class images at
/// level `k`.
pub fn basis_to_mapping_classes(w: &Word, k: u16) -> Result<Word> {
    let vars = Vars::new().with('k', k as i64);
    let std = Std { mode: MacroMode::Generators };
    w.try_map(|s| match s {
        Generator::Z(i) => std.atom("R", &[i as i64], &vars),
        Generator::W(i) => std.atom("P", &[i as i64], &vars),
        Generator::YLoop(l) => std.atom("Sd", &[l as i64], &vars),
        Generator::YBar(l) => std.atom("Sbd", &[l as i64], &vars),
        other => Err(Error::UnknownSymbol(other.to_string())),
    })
}

/// Comparison of the Reidemeister-Schreier generators with the
/// distinguished basis of the orientation kernel on `N_{g,n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisReport {
    pub g: u16,
    pub n: u16,
    pub schreier_rank: usize,
    pub basis_rank: usize,
    /// `2g + 2n - 5`, from the index-two Nielsen-Schreier formula.
    pub expected_rank: usize,
    pub isomorphic: bool,
    /// Every basis word rewrites into Schreier symbols and expands back.
    pub rewrites: bool,
}

impl BasisReport {
    pub fn holds(&self) -> bool {
        self.isomorphic
            && self.rewrites
            && self.schreier_rank == self.expected_rank
            && self.basis_rank == self.expected_rank
    }
}

pub fn basis_report(g: u16, n: u16) -> Result<BasisReport> {
    let k = OrientationKernel::new(g, n)?;
    let chi = k.character();
    let schreier: Vec<Word> = chi.schreier_generators().into_iter().map(|(_, w)| w).collect();
    let basis = k.basis_words();
    let fs = SubgroupGraph::fold(&schreier, k.ambient())?;
    let fb = SubgroupGraph::fold(&basis, k.ambient())?;
    let mut rewrites = true;
    for b in &basis {
        rewrites &= chi.expand(&chi.rewrite(b)?) == *b;
        rewrites &= k.from_basis(&k.to_basis(b)?)? == *b;
    }
    Ok(BasisReport {
        g,
        n,
        schreier_rank: fs.rank(),
        basis_rank: fb.rank(),
        expected_rank: 2 * g as usize + 2 * n as usize - 5,
        isomorphic: fs.is_isomorphic(&fb),
        rewrites,
    })
}
