//! Free G-graded algebras, presented quotients and graded derivations.
//!
//! Words are ordered by length, then lexicographically by generator index.
//! Every rewrite rule replaces a word by strictly smaller ones, so reduction
//! never lengthens a word; this is what makes the bounded completion sound.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, VecDeque};
use std::cmp::{Ordering, Reverse};
use std::fmt;
use std::sync::RwLock;

use crate::cyclotomic::CycScalar;
use crate::error::{Error, Result};
use crate::grading::{AbelianGroup, Bicharacter, GroupElement};
use crate::linear::{Echelon, LinComb, SparseVec};

/// A word in the generators, stored as generator indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn gen(i: u32) -> Word {
        Word(vec![i])
    }

    pub fn from_letters(letters: Vec<u32>) -> Word {
        Word(letters)
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word(self.0[start..end].to_vec())
    }

    pub fn push(&mut self, g: u32) {
        self.0.push(g);
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Noncommutative polynomial: words with nonzero coefficients.
pub type GradedPoly = LinComb<Word>;

/// Element of `A ⊗ A`: pairs of words with nonzero coefficients.
pub type TensorSquarePoly = LinComb<(Word, Word)>;

pub fn poly_one() -> GradedPoly {
    GradedPoly::basis(Word::empty())
}

pub fn poly_scalar(c: CycScalar) -> GradedPoly {
    GradedPoly::term(Word::empty(), c)
}

pub fn poly_gen(i: u32) -> GradedPoly {
    GradedPoly::basis(Word::gen(i))
}

/// Concatenation product extended bilinearly.
pub fn poly_mul(p: &GradedPoly, q: &GradedPoly) -> GradedPoly {
    let mut out = GradedPoly::zero();
    for (u, a) in p.iter() {
        for (v, b) in q.iter() {
            out.add_term(u.concat(v), a * b);
        }
    }
    out
}

/// Product of several polynomials, left to right.
pub fn poly_product<'a>(factors: impl IntoIterator<Item = &'a GradedPoly>) -> GradedPoly {
    factors.into_iter().fold(poly_one(), |acc, f| poly_mul(&acc, f))
}

/// `p ⊗ q`.
pub fn tensor_of(p: &GradedPoly, q: &GradedPoly) -> TensorSquarePoly {
    let mut out = TensorSquarePoly::zero();
    for (u, a) in p.iter() {
        for (v, b) in q.iter() {
            out.add_term((u.clone(), v.clone()), a * b);
        }
    }
    out
}

pub fn tensor_one() -> TensorSquarePoly {
    TensorSquarePoly::basis((Word::empty(), Word::empty()))
}

/// `x ⊗ 1 + 1 ⊗ x`.
pub fn primitive_tensor(p: &GradedPoly) -> TensorSquarePoly {
    &tensor_of(p, &poly_one()) + &tensor_of(&poly_one(), p)
}

/// Names and degrees of the generators of a free graded algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorTable {
    group: AbelianGroup,
    names: Vec<String>,
    degrees: Vec<GroupElement>,
}

impl GeneratorTable {
    pub fn new(group: AbelianGroup, gens: Vec<(String, GroupElement)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut names = Vec::new();
        let mut degrees = Vec::new();
        for (name, deg) in gens {
            if !seen.insert(name.clone()) {
                return Err(Error::ShapeMismatch(format!("generator `{name}` declared twice")));
            }
            if !group.contains(&deg) {
                return Err(Error::ShapeMismatch(format!("degree {deg} of `{name}` is not in {group}")));
            }
            names.push(name);
            degrees.push(deg);
        }
        Ok(GeneratorTable { group, names, degrees })
    }

    /// Formal generators `x1, …, xn` (or `x, y` for two) of the given degrees.
    pub fn formal(group: &AbelianGroup, degrees: &[GroupElement]) -> Result<Self> {
        let names: Vec<String> = if degrees.len() == 2 {
            vec!["x".into(), "y".into()]
        } else {
            (1..=degrees.len()).map(|i| format!("x{i}")).collect()
        };
        Self::new(group.clone(), names.into_iter().zip(degrees.iter().cloned()).collect())
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: u32) -> &str {
        &self.names[i as usize]
    }

    pub fn gen_degree(&self, i: u32) -> &GroupElement {
        &self.degrees[i as usize]
    }

    pub fn degrees(&self) -> &[GroupElement] {
        &self.degrees
    }

    pub fn index_of(&self, name: &str) -> Result<u32> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| i as u32)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn gen(&self, name: &str) -> Result<GradedPoly> {
        Ok(poly_gen(self.index_of(name)?))
    }

    pub fn word_degree(&self, w: &Word) -> GroupElement {
        self.group.sum(w.letters().iter().map(|&i| &self.degrees[i as usize]))
    }

    /// The common degree of all words, `None` for the zero polynomial.
    pub fn degree(&self, p: &GradedPoly) -> Result<Option<GroupElement>> {
        let mut deg: Option<GroupElement> = None;
        for w in p.keys() {
            let d = self.word_degree(w);
            match &deg {
                None => deg = Some(d),
                Some(e) if *e != d => {
                    return Err(Error::InhomogeneousRelation(crate::syntax::render_poly(self, p)))
                }
                _ => {}
            }
        }
        Ok(deg)
    }

    pub fn is_homogeneous(&self, p: &GradedPoly) -> bool {
        self.degree(p).is_ok()
    }

    /// Every letter refers to a generator of this table.
    pub fn check_poly(&self, p: &GradedPoly) -> Result<()> {
        match p.keys().flat_map(|w| w.letters()).find(|&&i| i as usize >= self.len()) {
            Some(_) => Err(Error::TableMismatch),
            None => Ok(()),
        }
    }

    pub fn check_tensor(&self, t: &TensorSquarePoly) -> Result<()> {
        match t
            .keys()
            .flat_map(|(u, v)| u.letters().iter().chain(v.letters()))
            .find(|&&i| i as usize >= self.len())
        {
            Some(_) => Err(Error::TableMismatch),
            None => Ok(()),
        }
    }
}

/// Braided product `(u₁⊗v₁)(u₂⊗v₂) = χ(deg v₁, deg u₂)·u₁u₂ ⊗ v₁v₂`.
pub fn tensor_mul(
    table: &GeneratorTable,
    chi: &Bicharacter,
    a: &TensorSquarePoly,
    b: &TensorSquarePoly,
) -> Result<TensorSquarePoly> {
    if chi.group() != table.group() {
        return Err(Error::TableMismatch);
    }
    table.check_tensor(a)?;
    table.check_tensor(b)?;
    let left_degs: Vec<GroupElement> = b.keys().map(|(u, _)| table.word_degree(u)).collect();
    let mut out = TensorSquarePoly::zero();
    for ((u1, v1), c1) in a.iter() {
        let dv1 = table.word_degree(v1);
        for (((u2, v2), c2), du2) in b.iter().zip(&left_degs) {
            let coeff = (c1 * c2).mul_root(chi.eval_root(&dv1, du2));
            out.add_term((u1.concat(u2), v1.concat(v2)), coeff);
        }
    }
    Ok(out)
}

/// An oriented rule `lhs → rhs` with `rhs` built from smaller words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Word,
    pub rhs: GradedPoly,
}

/// Outcome of the bounded completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletionReport {
    /// No rule of the top length was produced by a critical pair, or the system is complete.
    pub stabilized: bool,
    /// Every overlap, of any length, resolves: normal forms are valid for all words.
    pub complete: bool,
    pub rules: usize,
    pub critical_pairs: usize,
    /// Longest leading word created from a critical pair (0 if none).
    pub longest_new_rule: usize,
}

/// `T(V)/I` with a rewriting system completed up to a word-length bound.
#[derive(Debug)]
pub struct PresentedAlgebra {
    table: GeneratorTable,
    rules: Vec<Rule>,
    lookup: HashMap<Vec<u32>, usize>,
    lhs_lengths: Vec<usize>,
    bound: usize,
    report: CompletionReport,
    cache: RwLock<HashMap<Word, GradedPoly>>,
}

impl Clone for PresentedAlgebra {
    fn clone(&self) -> Self {
        PresentedAlgebra {
            table: self.table.clone(),
            rules: self.rules.clone(),
            lookup: self.lookup.clone(),
            lhs_lengths: self.lhs_lengths.clone(),
            bound: self.bound,
            report: self.report.clone(),
            cache: RwLock::new(HashMap::new()),
        }
    }
}

/// Rules during completion; removed rules leave a hole so indices stay stable.
struct RuleSet {
    rules: Vec<Option<Rule>>,
    lookup: HashMap<Vec<u32>, usize>,
    lengths: BTreeMap<usize, usize>,
}

impl RuleSet {
    fn new() -> Self {
        RuleSet { rules: Vec::new(), lookup: HashMap::new(), lengths: BTreeMap::new() }
    }

    fn find(&self, w: &[u32]) -> Option<(usize, usize)> {
        find_rule(&self.lookup, self.lengths.keys().copied(), w)
    }

    fn reduce(&self, p: &GradedPoly) -> GradedPoly {
        reduce_with(|w| self.find(w).map(|(r, s)| (self.rules[r].as_ref().expect("live rule"), s)), p)
    }

    fn insert(&mut self, rule: Rule) -> usize {
        let idx = self.rules.len();
        self.lookup.insert(rule.lhs.0.clone(), idx);
        *self.lengths.entry(rule.lhs.len()).or_insert(0) += 1;
        self.rules.push(Some(rule));
        idx
    }

    fn remove(&mut self, idx: usize) -> Rule {
        let rule = self.rules[idx].take().expect("live rule");
        self.lookup.remove(&rule.lhs.0);
        let n = self.lengths.get_mut(&rule.lhs.len()).expect("length tracked");
        *n -= 1;
        if *n == 0 {
            self.lengths.remove(&rule.lhs.len());
        }
        rule
    }

    fn live(&self) -> impl Iterator<Item = (usize, &Rule)> {
        self.rules.iter().enumerate().filter_map(|(i, r)| r.as_ref().map(|r| (i, r)))
    }
}

fn find_rule(
    lookup: &HashMap<Vec<u32>, usize>,
    lengths: impl Iterator<Item = usize> + Clone,
    w: &[u32],
) -> Option<(usize, usize)> {
    for start in 0..w.len() {
        for len in lengths.clone() {
            if start + len > w.len() {
                break;
            }
            if let Some(&r) = lookup.get(&w[start..start + len]) {
                return Some((r, start));
            }
        }
    }
    None
}

/// Reduce to irreducible words, always rewriting the largest reducible term.
fn reduce_with<'a>(find: impl Fn(&[u32]) -> Option<(&'a Rule, usize)>, p: &GradedPoly) -> GradedPoly {
    let mut todo = p.clone();
    let mut out = GradedPoly::zero();
    while let Some((w, c)) = todo.pop_leading() {
        match find(&w.0) {
            None => out.add_term(w, c),
            Some((rule, start)) => {
                let prefix = &w.0[..start];
                let suffix = &w.0[start + rule.lhs.len()..];
                for (m, d) in rule.rhs.iter() {
                    let mut v = Vec::with_capacity(prefix.len() + m.len() + suffix.len());
                    v.extend_from_slice(prefix);
                    v.extend_from_slice(&m.0);
                    v.extend_from_slice(suffix);
                    todo.add_term(Word(v), &c * d);
                }
            }
        }
    }
    out
}

/// Proper overlaps `l1 = a·o`, `l2 = o·b` with `o` nonempty: yields `|o|`.
fn overlaps(l1: &Word, l2: &Word) -> Vec<usize> {
    let max = l1.len().min(l2.len());
    (1..max)
        .filter(|&k| l1.0[l1.len() - k..] == l2.0[..k])
        .collect()
}

/// `rhs₁·b − a·rhs₂` for the overlap word `a·o·b`.
fn s_poly(r1: &Rule, r2: &Rule, k: usize) -> GradedPoly {
    let b = r2.lhs.slice(k, r2.lhs.len());
    let a = r1.lhs.slice(0, r1.lhs.len() - k);
    let left = poly_mul(&r1.rhs, &GradedPoly::basis(b));
    let right = poly_mul(&GradedPoly::basis(a), &r2.rhs);
    &left - &right
}

/// Hard cap on the number of rules produced by completion.
const MAX_RULES: usize = 200_000;

/// Present `T(V)/(relations)` and complete the rewriting system below `bound`.
pub fn quotient_present(
    table: GeneratorTable,
    relations: &[GradedPoly],
    bound: usize,
) -> Result<PresentedAlgebra> {
    for r in relations {
        table.check_poly(r)?;
        table.degree(r)?;
    }
    let needed = relations.iter().flat_map(|r| r.keys().map(Word::len)).max().unwrap_or(0);
    if bound < needed {
        return Err(Error::DegreeBoundTooSmall { bound, needed });
    }

    let mut rs = RuleSet::new();
    let mut queue: VecDeque<(GradedPoly, bool)> = relations.iter().map(|r| (r.clone(), false)).collect();
    // (ambiguity length, sequence, rule, rule, overlap): shortest ambiguities first, deterministically
    type Pair = (usize, usize, usize, usize, usize);
    let mut pairs: BinaryHeap<Reverse<Pair>> = BinaryHeap::new();
    let mut seq = 0usize;
    let mut critical_pairs = 0usize;
    let mut longest_new_rule = 0usize;

    loop {
        while let Some((p, from_pair)) = queue.pop_front() {
            let p = rs.reduce(&p);
            let Some((lead, lc)) = p.leading() else { continue };
            if lead.is_empty() {
                return Err(Error::OrientationFailure(crate::syntax::render_poly(&table, &p)));
            }
            let lead = lead.clone();
            let inv = lc.inv().expect("nonzero leading coefficient");
            let mut rhs = p.scaled(&-inv);
            rhs.remove(&lead);
            if from_pair {
                longest_new_rule = longest_new_rule.max(lead.len());
            }

            // rules whose leading word contains the new one go back to the queue
            let mut reducible = Vec::new();
            for (i, r) in rs.live() {
                if contains_subword(&r.lhs, &lead) {
                    reducible.push(i);
                }
            }
            for i in reducible {
                let r = rs.remove(i);
                let mut poly = r.rhs.clone();
                poly.add_term(r.lhs, -CycScalar::one());
                queue.push_back((poly, from_pair));
            }

            let new_idx = rs.insert(Rule { lhs: lead.clone(), rhs });
            if rs.rules.len() > MAX_RULES {
                return Err(Error::IncompleteRewriteSystem);
            }
            // keep right-hand sides irreducible
            let live: Vec<usize> = rs.live().map(|(i, _)| i).collect();
            for i in live {
                let rhs = rs.rules[i].as_ref().expect("live").rhs.clone();
                if rhs.keys().any(|w| rs.find(&w.0).is_some()) {
                    let reduced = rs.reduce(&rhs);
                    rs.rules[i].as_mut().expect("live").rhs = reduced;
                }
            }
            for (j, r) in rs.live() {
                let new = rs.rules[new_idx].as_ref().expect("live");
                for k in overlaps(&new.lhs, &r.lhs) {
                    let len = new.lhs.len() + r.lhs.len() - k;
                    pairs.push(Reverse((len, seq, new_idx, j, k)));
                    seq += 1;
                }
                if j != new_idx {
                    for k in overlaps(&r.lhs, &new.lhs) {
                        let len = new.lhs.len() + r.lhs.len() - k;
                        pairs.push(Reverse((len, seq, j, new_idx, k)));
                        seq += 1;
                    }
                }
            }
        }

        let Some(Reverse((len, _, i, j, k))) = pairs.pop() else { break };
        if len > bound {
            // everything left is beyond the bound
            pairs.push(Reverse((len, 0, i, j, k)));
            break;
        }
        let (Some(r1), Some(r2)) = (&rs.rules[i], &rs.rules[j]) else { continue };
        critical_pairs += 1;
        let s = rs.reduce(&s_poly(r1, r2, k));
        if !s.is_zero() {
            queue.push_back((s, true));
        }
    }

    // overlaps beyond the bound decide global confluence
    let mut complete = true;
    for Reverse((_, _, i, j, k)) in pairs.into_sorted_vec().into_iter().rev() {
        let (Some(r1), Some(r2)) = (&rs.rules[i], &rs.rules[j]) else { continue };
        if !rs.reduce(&s_poly(r1, r2, k)).is_zero() {
            complete = false;
            break;
        }
    }

    let mut rules: Vec<Rule> = rs.rules.into_iter().flatten().collect();
    rules.sort_by(|a, b| a.lhs.cmp(&b.lhs));
    let lookup = rules.iter().enumerate().map(|(i, r)| (r.lhs.0.clone(), i)).collect();
    let lhs_lengths: Vec<usize> =
        rules.iter().map(|r| r.lhs.len()).collect::<BTreeSet<_>>().into_iter().collect();
    let report = CompletionReport {
        stabilized: complete || longest_new_rule < bound,
        complete,
        rules: rules.len(),
        critical_pairs,
        longest_new_rule,
    };
    Ok(PresentedAlgebra {
        table,
        rules,
        lookup,
        lhs_lengths,
        bound,
        report,
        cache: RwLock::new(HashMap::new()),
    })
}

fn contains_subword(w: &Word, sub: &Word) -> bool {
    sub.len() <= w.len() && w.0.windows(sub.len()).any(|win| win == sub.0.as_slice())
}

/// Irreducible words up to a length, with a finiteness flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisEnumeration {
    pub words: Vec<Word>,
    /// Some length up to the requested one has no irreducible words, so the
    /// algebra is spanned by `words`.
    pub finite: bool,
}

impl PresentedAlgebra {
    /// The free algebra (no relations); complete for every bound.
    pub fn free(table: GeneratorTable, bound: usize) -> PresentedAlgebra {
        quotient_present(table, &[], bound).expect("free algebra presents")
    }

    pub fn table(&self) -> &GeneratorTable {
        &self.table
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn report(&self) -> &CompletionReport {
        &self.report
    }

    fn find(&self, w: &[u32]) -> Option<(&Rule, usize)> {
        find_rule(&self.lookup, self.lhs_lengths.iter().copied(), w).map(|(r, s)| (&self.rules[r], s))
    }

    pub fn is_irreducible(&self, w: &Word) -> bool {
        self.find(&w.0).is_none()
    }

    fn check_length(&self, w: &Word) -> Result<()> {
        if w.len() > self.bound && !self.report.complete {
            return Err(Error::DegreeOverflow(self.render_word(w)));
        }
        Ok(())
    }

    pub fn render_word(&self, w: &Word) -> String {
        crate::syntax::render_poly(&self.table, &GradedPoly::basis(w.clone()))
    }

    pub fn normal_form_word(&self, w: &Word) -> Result<GradedPoly> {
        self.check_length(w)?;
        if let Some(p) = self.cache.read().expect("cache poisoned").get(w) {
            return Ok(p.clone());
        }
        let p = reduce_with(|x| self.find(x), &GradedPoly::basis(w.clone()));
        self.cache.write().expect("cache poisoned").insert(w.clone(), p.clone());
        Ok(p)
    }

    pub fn normal_form(&self, p: &GradedPoly) -> Result<GradedPoly> {
        self.table.check_poly(p)?;
        let mut out = GradedPoly::zero();
        for (w, c) in p.iter() {
            if self.is_irreducible(w) {
                self.check_length(w)?;
                out.add_term(w.clone(), c.clone());
            } else {
                out.add_scaled(&self.normal_form_word(w)?, c);
            }
        }
        Ok(out)
    }

    pub fn normal_form_tensor(&self, t: &TensorSquarePoly) -> Result<TensorSquarePoly> {
        let mut out = TensorSquarePoly::zero();
        for ((u, v), c) in t.iter() {
            let nu = self.normal_form_word(u)?;
            let nv = self.normal_form_word(v)?;
            out.add_scaled(&tensor_of(&nu, &nv), c);
        }
        Ok(out)
    }

    /// `NF(p·q)`.
    pub fn mul(&self, p: &GradedPoly, q: &GradedPoly) -> Result<GradedPoly> {
        self.normal_form(&poly_mul(p, q))
    }

    /// Irreducible words of length at most `max_len`, in word order.
    pub fn enumerate_basis(&self, max_len: usize) -> Result<BasisEnumeration> {
        if !self.report.stabilized {
            return Err(Error::IncompleteRewriteSystem);
        }
        if max_len > self.bound && !self.report.complete {
            return Err(Error::DegreeOverflow(format!("words of length {max_len}")));
        }
        let n = self.table.len() as u32;
        let mut words = vec![Word::empty()];
        let mut layer = vec![Word::empty()];
        let mut finite = false;
        for len in 1..=max_len {
            let mut next = Vec::new();
            for w in &layer {
                for g in 0..n {
                    let mut v = w.clone();
                    v.push(g);
                    // the prefix is irreducible, so only suffixes can match
                    let reducible = self
                        .lhs_lengths
                        .iter()
                        .take_while(|&&l| l <= len)
                        .any(|&l| self.lookup.contains_key(&v.0[len - l..]));
                    if !reducible {
                        next.push(v);
                    }
                }
            }
            if next.is_empty() {
                finite = true;
                break;
            }
            words.extend(next.iter().cloned());
            layer = next;
        }
        Ok(BasisEnumeration { words, finite })
    }

    /// The full basis, when the algebra is finite-dimensional below the bound.
    pub fn finite_basis(&self) -> Result<Vec<Word>> {
        let b = self.enumerate_basis(self.bound)?;
        if b.finite {
            Ok(b.words)
        } else {
            Err(Error::InfiniteDimensional)
        }
    }
}

/// A homogeneous linear map `d: A → A` of degree `g` given on a basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedDerivation {
    pub degree: GroupElement,
    /// `images[i] = d(basis[i])`, in normal form.
    pub images: Vec<GradedPoly>,
}

impl GradedDerivation {
    /// Apply to a normal-form polynomial whose words lie in `basis`.
    pub fn apply(&self, basis_index: &HashMap<Word, usize>, p: &GradedPoly) -> GradedPoly {
        let mut out = GradedPoly::zero();
        for (w, c) in p.iter() {
            let i = basis_index[w];
            out.add_scaled(&self.images[i], c);
        }
        out
    }
}

/// A basis of the degree-`g` solutions of `d(ab) = d(a)b + χ(g, deg a)·a·d(b)`.
pub fn derivations_solve(
    algebra: &PresentedAlgebra,
    chi: &Bicharacter,
    g: &GroupElement,
) -> Result<Vec<GradedDerivation>> {
    let basis = algebra.finite_basis()?;
    let table = algebra.table();
    let group = table.group();
    let degs: Vec<GroupElement> = basis.iter().map(|w| table.word_degree(w)).collect();

    // unknown (i, j): coefficient of basis[j] in d(basis[i]), for matching degrees
    let mut unknowns: Vec<(usize, usize)> = Vec::new();
    let mut slots: Vec<Vec<(usize, usize)>> = vec![Vec::new(); basis.len()];
    for i in 0..basis.len() {
        let target = group.add(&degs[i], g);
        for j in 0..basis.len() {
            if degs[j] == target {
                slots[i].push((j, unknowns.len()));
                unknowns.push((i, j));
            }
        }
    }
    let index: HashMap<Word, usize> = basis.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let products: Vec<Vec<GradedPoly>> = basis
        .iter()
        .map(|a| {
            basis
                .iter()
                .map(|b| algebra.mul(&GradedPoly::basis(a.clone()), &GradedPoly::basis(b.clone())))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut ech = Echelon::new();
    for a in 0..basis.len() {
        let twist = chi.eval(g, &degs[a]);
        for b in 0..basis.len() {
            // rows indexed by output basis word
            let mut rows: BTreeMap<usize, SparseVec> = BTreeMap::new();
            for (w, c) in products[a][b].iter() {
                for &(j, u) in &slots[index[w]] {
                    rows.entry(j).or_default().add_term(u, c.clone());
                }
            }
            for &(j, u) in &slots[a] {
                for (w, c) in products[j][b].iter() {
                    rows.entry(index[w]).or_default().add_term(u, -c);
                }
            }
            for &(j, u) in &slots[b] {
                for (w, c) in products[a][j].iter() {
                    rows.entry(index[w]).or_default().add_term(u, -(c * &twist));
                }
            }
            for row in rows.values() {
                if !row.is_zero() {
                    ech.insert(row);
                }
            }
        }
    }
    Ok(ech
        .kernel(unknowns.len())
        .into_iter()
        .map(|v| {
            let mut images = vec![GradedPoly::zero(); basis.len()];
            for (u, c) in v.iter() {
                let (i, j) = unknowns[*u];
                images[i].add_term(basis[j].clone(), c.clone());
            }
            GradedDerivation { degree: g.clone(), images }
        })
        .collect())
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_gen(m: u32, name: &str) -> GeneratorTable {
        let g = AbelianGroup::cyclic(m);
        let d = g.generator(0);
        GeneratorTable::new(g, vec![(name.into(), d)]).unwrap()
    }

    fn xy_c3() -> GeneratorTable {
        let g = AbelianGroup::cyclic(3);
        let d = g.generator(0);
        GeneratorTable::new(g, vec![("x".into(), d.clone()), ("y".into(), d)]).unwrap()
    }

    fn x_pow(n: usize) -> GradedPoly {
        GradedPoly::basis(Word(vec![0; n]))
    }

    #[test]
    fn word_order_is_length_then_lex() {
        let mut ws = vec![Word(vec![1]), Word(vec![0, 0]), Word(vec![]), Word(vec![0])];
        ws.sort();
        assert_eq!(ws, vec![Word(vec![]), Word(vec![0]), Word(vec![1]), Word(vec![0, 0])]);
    }

    #[test]
    fn free_products() {
        let x = poly_gen(0);
        let y = poly_gen(1);
        let s = &x + &y;
        let d = &x - &y;
        let p = poly_mul(&s, &d);
        let xy = poly_mul(&x, &y);
        let yx = poly_mul(&y, &x);
        let expected = &(&(&poly_mul(&x, &x) - &xy) + &yx) - &poly_mul(&y, &y);
        assert_eq!(p, expected);
        assert_eq!(poly_mul(&poly_one(), &p), p);
    }

    #[test]
    fn braided_tensor_examples() {
        let t = xy_c3();
        let chi = Bicharacter::new(t.group().clone(), 3, vec![vec![1]]).unwrap();
        let x = poly_gen(0);
        let y = poly_gen(1);
        let one = poly_one();
        let a = tensor_of(&x, &one);
        let b = tensor_of(&one, &y);
        assert_eq!(tensor_mul(&t, &chi, &a, &b).unwrap(), tensor_of(&x, &y));
        let a = tensor_of(&one, &x);
        let b = tensor_of(&y, &one);
        let expected = tensor_of(&y, &x).scaled(&CycScalar::root_of_unity(3, 1));
        assert_eq!(tensor_mul(&t, &chi, &a, &b).unwrap(), expected);
        assert_eq!(tensor_mul(&t, &chi, &tensor_one(), &a).unwrap(), a);
    }

    #[test]
    fn truncated_polynomial_algebras() {
        for n in 2..6 {
            let a = quotient_present(one_gen(n as u32, "x"), &[x_pow(n)], n + 2).unwrap();
            assert!(a.report().complete);
            let b = a.finite_basis().unwrap();
            assert_eq!(b.len(), n);
            assert!(a.normal_form(&x_pow(n + 5)).unwrap().is_zero());
        }
    }

    #[test]
    fn free_enumeration() {
        let a = PresentedAlgebra::free(xy_c3(), 4);
        let b = a.enumerate_basis(2).unwrap();
        assert_eq!(b.words.len(), 7);
        assert!(!b.finite);
    }

    #[test]
    fn bound_checks() {
        let t = one_gen(2, "x");
        assert_eq!(
            quotient_present(t.clone(), &[x_pow(3)], 2).err(),
            Some(Error::DegreeBoundTooSmall { bound: 2, needed: 3 })
        );
        // x² = -1 and x² = 0 together force 1 = 0
        let shifted = &x_pow(2) + &poly_one();
        assert!(quotient_present(t.clone(), std::slice::from_ref(&shifted), 4).is_ok());
        assert!(matches!(
            quotient_present(t.clone(), &[shifted, x_pow(2)], 4),
            Err(Error::OrientationFailure(_))
        ));
        let inhom = &x_pow(2) + &x_pow(1);
        assert!(matches!(
            quotient_present(t, &[inhom], 4),
            Err(Error::InhomogeneousRelation(_))
        ));
    }

    #[test]
    fn example_5_3_completion() {
        let t = xy_c3();
        let w = |s: &[u32]| GradedPoly::basis(Word(s.to_vec()));
        let rel = &(&w(&[0, 1, 1]) + &w(&[1, 0, 1])) + &w(&[1, 1, 0]);
        let a = quotient_present(t, &[w(&[0, 0, 0]), w(&[1, 1, 1]), rel], 8).unwrap();
        assert!(a.report().stabilized);
        // y²x leads the cubic relation; yxy sits below it and stays irreducible
        let nf = a.normal_form(&w(&[1, 1, 0])).unwrap();
        assert!(nf.keys().all(|k| *k < Word(vec![1, 1, 0])));
        assert!(nf.keys().all(|k| a.is_irreducible(k)));
        assert_eq!(a.normal_form(&w(&[1, 0, 1])).unwrap(), w(&[1, 0, 1]));
    }

    #[test]
    fn derivations_of_truncated_cube() {
        let t = one_gen(3, "x");
        let chi = Bicharacter::new(t.group().clone(), 3, vec![vec![1]]).unwrap();
        let a = quotient_present(t.clone(), &[x_pow(3)], 5).unwrap();
        for k in 0..3 {
            let g = t.group().element(vec![k]).unwrap();
            let ders = derivations_solve(&a, &chi, &g).unwrap();
            assert_eq!(ders.len(), 1, "degree {k}");
        }
        // the Euler derivation x^k ↦ k·x^k
        let g0 = t.group().zero();
        let d = &derivations_solve(&a, &chi, &g0).unwrap()[0];
        let ratio = d.images[2].coeff(&Word(vec![0, 0])).checked_div(&d.images[1].coeff(&Word(vec![0]))).unwrap();
        assert_eq!(ratio, CycScalar::from_int(2));
    }

    #[test]
    fn odd_derivation_of_exterior_algebra() {
        let t = one_gen(2, "x");
        let chi = Bicharacter::new(t.group().clone(), 2, vec![vec![1]]).unwrap();
        let a = quotient_present(t.clone(), &[x_pow(2)], 3).unwrap();
        let g = t.group().generator(0);
        let ders = derivations_solve(&a, &chi, &g).unwrap();
        assert_eq!(ders.len(), 1);
        assert_eq!(ders[0].images[1].leading().unwrap().0, &Word::empty());
    }
}
