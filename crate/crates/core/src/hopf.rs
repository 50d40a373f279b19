//! Braided Hopf algebras on presented algebras, their axioms, primitive
//! elements, enveloping algebras of Lie presentations, and biproducts with
//! group algebras.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

use crate::algebra::{
    poly_gen, poly_one, primitive_tensor, quotient_present, tensor_mul, tensor_of, GeneratorTable,
    GradedPoly, PresentedAlgebra, TensorSquarePoly, Word,
};
use crate::cyclotomic::{CycScalar, Root};
use crate::error::{Error, Result};
use crate::grading::{Bicharacter, GroupElement, ZetaFamily};
use crate::lie::{bracket_eval, lie_validate, BracketSource, LiePresentation, UndeclaredPolicy};
use crate::linear::{kernel, solve, LinComb, SparseVec};

/// A structure checked by [`hopf_axioms_check`], given on a basis.
pub trait HopfStructure: Sync {
    type Key: Ord + Clone + Send + Sync + fmt::Debug;

    /// Basis elements to check, in a fixed order.
    fn basis_keys(&self) -> &[Self::Key];
    /// Word-length truncation applied to the basis, if any.
    fn truncation(&self) -> Option<usize>;
    /// Length used to keep products inside the truncation.
    fn key_len(&self, k: &Self::Key) -> usize;
    /// Braiding scalar for moving `b` past `a`: `a⊗b ↦ braid(a,b)·b⊗a`.
    fn braid(&self, a: &Self::Key, b: &Self::Key) -> Root;
    fn unit(&self) -> LinComb<Self::Key>;
    fn mul_keys(&self, a: &Self::Key, b: &Self::Key) -> Result<LinComb<Self::Key>>;
    fn comultiply_key(&self, a: &Self::Key) -> Result<LinComb<(Self::Key, Self::Key)>>;
    fn counit_key(&self, a: &Self::Key) -> CycScalar;
    fn antipode_key(&self, a: &Self::Key) -> Result<LinComb<Self::Key>>;
    fn render_key(&self, a: &Self::Key) -> String;
}

fn mul_lin<H: HopfStructure>(h: &H, a: &LinComb<H::Key>, b: &LinComb<H::Key>) -> Result<LinComb<H::Key>> {
    let mut out = LinComb::zero();
    for (x, c) in a.iter() {
        for (y, d) in b.iter() {
            out.add_scaled(&h.mul_keys(x, y)?, &(c * d));
        }
    }
    Ok(out)
}

fn lift<K: Ord + Clone, J: Ord + Clone>(
    a: &LinComb<K>,
    mut f: impl FnMut(&K) -> Result<LinComb<J>>,
) -> Result<LinComb<J>> {
    let mut out = LinComb::zero();
    for (k, c) in a.iter() {
        out.add_scaled(&f(k)?, c);
    }
    Ok(out)
}

type Tensor<K> = LinComb<(K, K)>;

/// `(a₁⊗a₂)(b₁⊗b₂) = braid(a₂,b₁)·a₁b₁ ⊗ a₂b₂`.
fn tensor_mul_lin<H: HopfStructure>(h: &H, a: &Tensor<H::Key>, b: &Tensor<H::Key>) -> Result<Tensor<H::Key>> {
    let mut out = Tensor::zero();
    for ((a1, a2), c) in a.iter() {
        for ((b1, b2), d) in b.iter() {
            let coeff = (c * d).mul_root(h.braid(a2, b1));
            let left = h.mul_keys(a1, b1)?;
            let right = h.mul_keys(a2, b2)?;
            for (u, x) in left.iter() {
                for (v, y) in right.iter() {
                    out.add_term((u.clone(), v.clone()), &(&coeff * x) * y);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomResult {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub witness: Option<String>,
}

impl fmt::Display for AxiomResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AXIOM {} {}", self.name, if self.passed { "PASS" } else { "FAIL" })?;
        if let Some(w) = &self.witness {
            write!(f, " {w}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HopfReport {
    pub dimension: usize,
    /// Set when only basis words up to this length were checked.
    pub truncation: Option<usize>,
    pub axioms: Vec<AxiomResult>,
    pub commutative: bool,
    pub braided_commutative: bool,
    /// `flip∘Δ = Δ`.
    pub cocommutative: bool,
    /// `τ∘Δ = Δ` for the braiding `τ`.
    pub braided_cocommutative: bool,
}

impl HopfReport {
    pub fn passed(&self) -> bool {
        self.axioms.iter().all(|a| a.passed)
    }

    pub fn axiom(&self, name: &str) -> Option<&AxiomResult> {
        self.axioms.iter().find(|a| a.name == name)
    }
}

fn first_failure<T>(results: Vec<Result<Option<T>>>) -> Result<Option<T>> {
    for r in results {
        if let Some(w) = r? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

fn axiom(name: &'static str, checked: usize, witness: Option<String>) -> AxiomResult {
    AxiomResult { name, passed: witness.is_none(), checked, witness }
}

/// Coassociativity, counit, both antipode laws and multiplicativity of `Δ`
/// on every basis element (pairs within the truncation), plus the
/// commutativity flags.
pub fn hopf_axioms_check<H: HopfStructure>(h: &H) -> Result<HopfReport> {
    let basis = h.basis_keys();
    let unit = h.unit();
    let deltas: Vec<Tensor<H::Key>> =
        basis.par_iter().map(|k| h.comultiply_key(k)).collect::<Result<_>>()?;

    let coassoc = first_failure(
        basis
            .par_iter()
            .zip(&deltas)
            .map(|(k, d)| {
                let mut left: LinComb<(H::Key, H::Key, H::Key)> = LinComb::zero();
                let mut right: LinComb<(H::Key, H::Key, H::Key)> = LinComb::zero();
                for ((a, b), c) in d.iter() {
                    for ((a1, a2), e) in h.comultiply_key(a)?.iter() {
                        left.add_term((a1.clone(), a2.clone(), b.clone()), c * e);
                    }
                    for ((b1, b2), e) in h.comultiply_key(b)?.iter() {
                        right.add_term((a.clone(), b1.clone(), b2.clone()), c * e);
                    }
                }
                Ok((left != right).then(|| h.render_key(k)))
            })
            .collect(),
    )?;

    let counit = first_failure(
        basis
            .par_iter()
            .zip(&deltas)
            .map(|(k, d)| {
                let own = LinComb::basis(k.clone());
                let mut left = LinComb::zero();
                let mut right = LinComb::zero();
                for ((a, b), c) in d.iter() {
                    left.add_term(b.clone(), c * &h.counit_key(a));
                    right.add_term(a.clone(), c * &h.counit_key(b));
                }
                Ok((left != own || right != own).then(|| h.render_key(k)))
            })
            .collect(),
    )?;

    let antipode_side = |left_side: bool| -> Result<Option<String>> {
        first_failure(
            basis
                .par_iter()
                .zip(&deltas)
                .map(|(k, d)| {
                    let mut total = LinComb::zero();
                    for ((a, b), c) in d.iter() {
                        let term = if left_side {
                            mul_lin(h, &h.antipode_key(a)?, &LinComb::basis(b.clone()))?
                        } else {
                            mul_lin(h, &LinComb::basis(a.clone()), &h.antipode_key(b)?)?
                        };
                        total.add_scaled(&term, c);
                    }
                    Ok((total != unit.scaled(&h.counit_key(k))).then(|| h.render_key(k)))
                })
                .collect(),
        )
    };
    let antipode_left = antipode_side(true)?;
    let antipode_right = antipode_side(false)?;

    let pairs: Vec<(usize, usize)> = (0..basis.len())
        .flat_map(|i| (0..basis.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| match h.truncation() {
            Some(t) => h.key_len(&basis[i]) + h.key_len(&basis[j]) <= t,
            None => true,
        })
        .collect();
    let products: Vec<LinComb<H::Key>> =
        pairs.par_iter().map(|&(i, j)| h.mul_keys(&basis[i], &basis[j])).collect::<Result<_>>()?;
    let multiplicative = first_failure(
        pairs
            .par_iter()
            .zip(&products)
            .map(|(&(i, j), ab)| {
                let lhs = lift(ab, |k| h.comultiply_key(k))?;
                let rhs = tensor_mul_lin(h, &deltas[i], &deltas[j])?;
                let eps_ab: CycScalar = ab.iter().fold(CycScalar::zero(), |acc, (k, c)| &acc + &(c * &h.counit_key(k)));
                let eps_ok = eps_ab == &h.counit_key(&basis[i]) * &h.counit_key(&basis[j]);
                Ok((lhs != rhs || !eps_ok)
                    .then(|| format!("{}*{}", h.render_key(&basis[i]), h.render_key(&basis[j]))))
            })
            .collect(),
    )?;

    let mut commutative = true;
    let mut braided_commutative = true;
    let pair_index: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(n, &p)| (p, n)).collect();
    for (n, &(i, j)) in pairs.iter().enumerate() {
        if let Some(&m) = pair_index.get(&(j, i)) {
            let ab = &products[n];
            let ba = &products[m];
            commutative &= ab == ba;
            braided_commutative &= *ab == ba.scaled(&h.braid(&basis[i], &basis[j]).to_scalar());
        }
    }
    let mut cocommutative = true;
    let mut braided_cocommutative = true;
    for d in &deltas {
        let flip: Tensor<H::Key> = d.map_keys(|(a, b)| (b.clone(), a.clone()));
        let braided: Tensor<H::Key> =
            d.iter().map(|((a, b), c)| ((b.clone(), a.clone()), c.mul_root(h.braid(a, b)))).collect();
        cocommutative &= flip == *d;
        braided_cocommutative &= braided == *d;
    }

    let n = basis.len();
    Ok(HopfReport {
        dimension: n,
        truncation: h.truncation(),
        axioms: vec![
            axiom("coassociativity", n, coassoc),
            axiom("counit", n, counit),
            axiom("antipode_left", n, antipode_left),
            axiom("antipode_right", n, antipode_right),
            axiom("delta_multiplicative", pairs.len(), multiplicative),
        ],
        commutative,
        braided_commutative,
        cocommutative,
        braided_cocommutative,
    })
}

/// A presented algebra with `Δ`, `ε`, `S` given on generators and extended
/// as a braided bialgebra map (`Δ`, `ε`) and braided anti-map (`S`).
#[derive(Clone, Debug)]
pub struct HopfInstance {
    algebra: PresentedAlgebra,
    chi: Bicharacter,
    coproduct: Vec<TensorSquarePoly>,
    counit: Vec<CycScalar>,
    antipode: Vec<GradedPoly>,
    basis: Option<Vec<Word>>,
    truncation: Option<usize>,
}

impl HopfInstance {
    pub fn new(
        algebra: PresentedAlgebra,
        chi: Bicharacter,
        coproduct: Vec<TensorSquarePoly>,
        counit: Vec<CycScalar>,
        antipode: Vec<GradedPoly>,
    ) -> Result<Self> {
        let table = algebra.table();
        if chi.group() != table.group() {
            return Err(Error::TableMismatch);
        }
        let n = table.len();
        for len in [coproduct.len(), counit.len(), antipode.len()] {
            if len != n {
                return Err(Error::LengthMismatch { expected: n, found: len });
            }
        }
        for i in 0..n as u32 {
            let g = table.gen_degree(i);
            let d = &coproduct[i as usize];
            table.check_tensor(d)?;
            for (u, v) in d.keys() {
                let found = chi.group().add(&table.word_degree(u), &table.word_degree(v));
                if &found != g {
                    return Err(Error::DegreeMismatch {
                        index: i as usize + 1,
                        expected: g.to_string(),
                        found: found.to_string(),
                    });
                }
            }
            let s = &antipode[i as usize];
            table.check_poly(s)?;
            if let Some(found) = table.degree(s)? {
                if &found != g {
                    return Err(Error::DegreeMismatch {
                        index: i as usize + 1,
                        expected: g.to_string(),
                        found: found.to_string(),
                    });
                }
            }
            if !counit[i as usize].is_zero() && *g != chi.group().zero() {
                return Err(Error::DegreeMismatch {
                    index: i as usize + 1,
                    expected: chi.group().zero().to_string(),
                    found: g.to_string(),
                });
            }
        }
        let basis = algebra.finite_basis().ok();
        Ok(HopfInstance { algebra, chi, coproduct, counit, antipode, basis, truncation: None })
    }

    /// Every generator primitive: `Δ(x) = x⊗1 + 1⊗x`, `ε(x) = 0`, `S(x) = −x`.
    pub fn with_primitive_generators(algebra: PresentedAlgebra, chi: Bicharacter) -> Result<Self> {
        let n = algebra.table().len() as u32;
        let coproduct = (0..n).map(|i| primitive_tensor(&poly_gen(i))).collect();
        let counit = vec![CycScalar::zero(); n as usize];
        let antipode = (0..n).map(|i| -&poly_gen(i)).collect();
        HopfInstance::new(algebra, chi, coproduct, counit, antipode)
    }

    /// Check only basis words up to length `t` (pairs only up to total length `t`).
    pub fn truncated(mut self, t: usize) -> Result<Self> {
        if self.basis.is_some() && self.truncation.is_none() {
            return Ok(self);
        }
        let e = self.algebra.enumerate_basis(t)?;
        self.truncation = (!e.finite).then_some(t);
        self.basis = Some(e.words);
        Ok(self)
    }

    pub fn algebra(&self) -> &PresentedAlgebra {
        &self.algebra
    }

    pub fn chi(&self) -> &Bicharacter {
        &self.chi
    }

    pub fn table(&self) -> &GeneratorTable {
        self.algebra.table()
    }

    /// The basis, if finite or truncated.
    pub fn basis(&self) -> Option<&[Word]> {
        self.basis.as_deref()
    }

    pub fn is_finite(&self) -> bool {
        self.basis.is_some() && self.truncation.is_none()
    }

    pub fn truncation_bound(&self) -> Option<usize> {
        self.truncation
    }

    fn require_basis(&self) -> Result<&[Word]> {
        self.basis.as_deref().ok_or(Error::InfiniteDimensional)
    }

    pub fn comultiply_word(&self, w: &Word) -> Result<TensorSquarePoly> {
        let table = self.table();
        let mut out = tensor_of(&poly_one(), &poly_one());
        for &g in w.letters() {
            out = tensor_mul(table, &self.chi, &out, &self.coproduct[g as usize])?;
            out = self.algebra.normal_form_tensor(&out)?;
        }
        Ok(out)
    }

    pub fn comultiply(&self, h: &GradedPoly) -> Result<TensorSquarePoly> {
        let h = self.algebra.normal_form(h)?;
        lift(&h, |w| self.comultiply_word(w))
    }

    pub fn counit_word(&self, w: &Word) -> CycScalar {
        w.letters().iter().fold(CycScalar::one(), |acc, &g| &acc * &self.counit[g as usize])
    }

    pub fn counit(&self, h: &GradedPoly) -> Result<CycScalar> {
        let h = self.algebra.normal_form(h)?;
        Ok(h.iter().fold(CycScalar::zero(), |acc, (w, c)| &acc + &(c * &self.counit_word(w))))
    }

    /// `S(x·w) = χ(deg x, deg w)·S(w)·S(x)`.
    pub fn antipode_word(&self, w: &Word) -> Result<GradedPoly> {
        let table = self.table();
        let mut out = poly_one();
        // build from the right so `rest` is the suffix after the current letter
        let letters = w.letters();
        for k in (0..letters.len()).rev() {
            let x = letters[k];
            let rest = Word::from_letters(letters[k + 1..].to_vec());
            let c = self.chi.eval_root(table.gen_degree(x), &table.word_degree(&rest));
            out = self.algebra.mul(&out, &self.antipode[x as usize])?.scaled(&c.to_scalar());
        }
        Ok(out)
    }

    pub fn antipode(&self, h: &GradedPoly) -> Result<GradedPoly> {
        let h = self.algebra.normal_form(h)?;
        lift(&h, |w| self.antipode_word(w))
    }

    pub fn multiply(&self, a: &GradedPoly, b: &GradedPoly) -> Result<GradedPoly> {
        self.algebra.mul(a, b)
    }

    pub fn render(&self, p: &GradedPoly) -> String {
        crate::syntax::render_poly(self.table(), p)
    }

    pub fn render_tensor(&self, t: &TensorSquarePoly) -> String {
        crate::syntax::render_tensor(self.table(), t)
    }
}

impl HopfStructure for HopfInstance {
    type Key = Word;

    fn basis_keys(&self) -> &[Word] {
        self.basis.as_deref().unwrap_or(&[])
    }

    fn truncation(&self) -> Option<usize> {
        self.truncation
    }

    fn key_len(&self, k: &Word) -> usize {
        k.len()
    }

    fn braid(&self, a: &Word, b: &Word) -> Root {
        self.chi.eval_root(&self.table().word_degree(a), &self.table().word_degree(b))
    }

    fn unit(&self) -> GradedPoly {
        poly_one()
    }

    fn mul_keys(&self, a: &Word, b: &Word) -> Result<GradedPoly> {
        self.algebra.normal_form_word(&a.concat(b))
    }

    fn comultiply_key(&self, a: &Word) -> Result<TensorSquarePoly> {
        self.comultiply_word(a)
    }

    fn counit_key(&self, a: &Word) -> CycScalar {
        self.counit_word(a)
    }

    fn antipode_key(&self, a: &Word) -> Result<GradedPoly> {
        self.antipode_word(a)
    }

    fn render_key(&self, a: &Word) -> String {
        self.algebra.render_word(a)
    }
}

/// [`hopf_axioms_check`] for an instance, requiring a finite or truncated basis.
pub fn check_instance(h: &HopfInstance) -> Result<HopfReport> {
    h.require_basis()?;
    hopf_axioms_check(h)
}

/// Primitive elements `P_g(H)`, one basis per degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveSpace {
    pub by_degree: Vec<(GroupElement, Vec<GradedPoly>)>,
}

impl PrimitiveSpace {
    pub fn dimension(&self) -> usize {
        self.by_degree.iter().map(|(_, b)| b.len()).sum()
    }

    pub fn degrees(&self) -> impl Iterator<Item = &GroupElement> {
        self.by_degree.iter().filter(|(_, b)| !b.is_empty()).map(|(g, _)| g)
    }

    pub fn all(&self) -> impl Iterator<Item = &GradedPoly> {
        self.by_degree.iter().flat_map(|(_, b)| b.iter())
    }
}

/// Kernel of `v ↦ Δ(v) − v⊗1 − 1⊗v` on each degree component.
pub fn primitives_solve(h: &HopfInstance) -> Result<PrimitiveSpace> {
    let basis = h.require_basis()?;
    if h.truncation.is_some() {
        return Err(Error::InfiniteDimensional);
    }
    let table = h.table();
    let mut degrees: Vec<GroupElement> = Vec::new();
    let mut components: HashMap<GroupElement, Vec<&Word>> = HashMap::new();
    for w in basis {
        let g = table.word_degree(w);
        if !components.contains_key(&g) {
            degrees.push(g.clone());
        }
        components.entry(g).or_default().push(w);
    }
    degrees.sort();
    let mut by_degree = Vec::new();
    for g in degrees {
        let words = &components[&g];
        let mut keys: HashMap<(Word, Word), usize> = HashMap::new();
        let mut columns: Vec<Vec<(usize, CycScalar)>> = Vec::new();
        for w in words {
            let d = &h.comultiply_word(w)? - &primitive_tensor(&GradedPoly::basis((*w).clone()));
            let mut col = Vec::new();
            for (k, c) in d.into_iter() {
                let next = keys.len();
                let r = *keys.entry(k).or_insert(next);
                col.push((r, c));
            }
            columns.push(col);
        }
        let mut rows = vec![SparseVec::zero(); keys.len()];
        for (j, col) in columns.into_iter().enumerate() {
            for (r, c) in col {
                rows[r].add_term(j, c);
            }
        }
        let ker = kernel(&rows, words.len());
        let prims = ker
            .into_iter()
            .map(|v| v.iter().map(|(&j, c)| (words[j].clone(), c.clone())).collect())
            .collect();
        by_degree.push((g, prims));
    }
    Ok(PrimitiveSpace { by_degree })
}

/// Relations of `U(P)`: one per declared bracket, plus `[…] = 0` for the
/// remaining undeclared tuples when the policy makes them zero.
pub fn enveloping_relations(p: &LiePresentation) -> Result<Vec<GradedPoly>> {
    let table = p.basis();
    let chi = p.chi();
    let relation = |zeta: Root, args: &[u32], value: &GradedPoly| -> Result<GradedPoly> {
        let degs: Vec<GroupElement> = args.iter().map(|&a| table.gen_degree(a).clone()).collect();
        let fam = ZetaFamily::new(chi, zeta, degs)?;
        let xs: Vec<GradedPoly> = args.iter().map(|&a| poly_gen(a)).collect();
        Ok(&bracket_eval(table, chi, &fam, &xs)? - value)
    };
    let mut out = Vec::new();
    for e in p.entries() {
        out.push(relation(e.zeta, &e.args, &e.value)?);
    }
    for (zeta, args) in p.admissible_tuples() {
        if let (BracketSource::Undeclared, _) = p.lookup(zeta, &args)? {
            match p.policy() {
                UndeclaredPolicy::Error => {
                    return Err(Error::MissingBracket { zeta: zeta.to_string(), family: p.render_args(&args) })
                }
                UndeclaredPolicy::Zero => out.push(relation(zeta, &args, &GradedPoly::zero())?),
            }
        }
    }
    Ok(out.into_iter().filter(|r| !r.is_zero()).collect())
}

/// `U(P)` with primitive generators, completed up to word length `bound`.
/// With `require_valid`, a failing [`lie_validate`] is an error.
pub fn enveloping_build(p: &LiePresentation, bound: usize, require_valid: bool) -> Result<HopfInstance> {
    if require_valid {
        let report = lie_validate(p)?;
        if !report.passed() {
            let list: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
            return Err(Error::LieValidationFailure(list.join("; ")));
        }
    }
    let relations = enveloping_relations(p)?;
    let algebra = quotient_present(p.basis().clone(), &relations, bound)?;
    HopfInstance::with_primitive_generators(algebra, p.chi().clone())
}

/// Basis element `x ⊗ g` of `H ⋆ kG`.
pub type BiKey = (Word, GroupElement);

/// The ordinary Hopf algebra `H ⋆ kG` on the basis `(H-basis) × G`.
#[derive(Clone, Debug)]
pub struct BiproductInstance {
    h: HopfInstance,
    group: Vec<GroupElement>,
    basis: Vec<BiKey>,
    index: HashMap<BiKey, usize>,
    antipode: Vec<LinComb<BiKey>>,
}

impl BiproductInstance {
    pub fn underlying(&self) -> &HopfInstance {
        &self.h
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn group_elements(&self) -> &[GroupElement] {
        &self.group
    }

    pub fn basis(&self) -> &[BiKey] {
        &self.basis
    }

    /// `(x⊗g)(y⊗h) = χ(g, deg y)·xy ⊗ (g+h)`.
    pub fn mul_basis(&self, a: &BiKey, b: &BiKey) -> Result<LinComb<BiKey>> {
        let (x, g) = a;
        let (y, h) = b;
        let table = self.h.table();
        let c = self.h.chi.eval_root(g, &table.word_degree(y));
        let gh = table.group().add(g, h);
        let xy = self.h.algebra.normal_form_word(&x.concat(y))?;
        Ok(xy.iter().map(|(w, d)| ((w.clone(), gh.clone()), d.mul_root(c))).collect())
    }

    pub fn multiply(&self, a: &LinComb<BiKey>, b: &LinComb<BiKey>) -> Result<LinComb<BiKey>> {
        mul_lin(self, a, b)
    }

    /// `Δ(x⊗g) = Σ (y ⊗ (deg z + g)) ⊗ (z ⊗ g)` for `Δ_H(x) = Σ y⊗z`.
    pub fn comultiply_basis(&self, a: &BiKey) -> Result<Tensor<BiKey>> {
        let (x, g) = a;
        let table = self.h.table();
        let d = self.h.comultiply_word(x)?;
        Ok(d.iter()
            .map(|((y, z), c)| {
                let left = (y.clone(), table.group().add(&table.word_degree(z), g));
                ((left, (z.clone(), g.clone())), c.clone())
            })
            .collect())
    }

    /// `t = 1 ⊗ g` for a group element.
    pub fn group_like(&self, g: &GroupElement) -> LinComb<BiKey> {
        LinComb::basis((Word::empty(), g.clone()))
    }

    /// `x ⊗ 0` for an element of `H`.
    pub fn embed(&self, p: &GradedPoly) -> LinComb<BiKey> {
        let zero = self.h.table().group().zero();
        p.iter().map(|(w, c)| ((w.clone(), zero.clone()), c.clone())).collect()
    }

    pub fn render(&self, p: &LinComb<BiKey>) -> String {
        if p.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = p
            .iter()
            .map(|((w, g), c)| {
                let h = self.h.render(&GradedPoly::term(w.clone(), c.clone()));
                format!("({h})#{g}")
            })
            .collect();
        parts.join(" + ")
    }
}

impl HopfStructure for BiproductInstance {
    type Key = BiKey;

    fn basis_keys(&self) -> &[BiKey] {
        &self.basis
    }

    fn truncation(&self) -> Option<usize> {
        None
    }

    fn key_len(&self, k: &BiKey) -> usize {
        k.0.len()
    }

    fn braid(&self, _: &BiKey, _: &BiKey) -> Root {
        Root::one()
    }

    fn unit(&self) -> LinComb<BiKey> {
        self.group_like(&self.h.table().group().zero())
    }

    fn mul_keys(&self, a: &BiKey, b: &BiKey) -> Result<LinComb<BiKey>> {
        self.mul_basis(a, b)
    }

    fn comultiply_key(&self, a: &BiKey) -> Result<Tensor<BiKey>> {
        self.comultiply_basis(a)
    }

    fn counit_key(&self, a: &BiKey) -> CycScalar {
        self.h.counit_word(&a.0)
    }

    fn antipode_key(&self, a: &BiKey) -> Result<LinComb<BiKey>> {
        Ok(self.antipode[self.index[a]].clone())
    }

    fn render_key(&self, a: &BiKey) -> String {
        self.render(&LinComb::basis(a.clone()))
    }
}

/// Build `H ⋆ kG`; the antipode is the convolution inverse of the identity,
/// found by an exact linear solve.
pub fn biproduct_build(h: &HopfInstance) -> Result<BiproductInstance> {
    if !h.is_finite() {
        return Err(Error::InfiniteDimensional);
    }
    let group = h.table().group().elements()?;
    let hb = h.require_basis()?;
    let basis: Vec<BiKey> =
        hb.iter().flat_map(|w| group.iter().map(move |g| (w.clone(), g.clone()))).collect();
    let index: HashMap<BiKey, usize> = basis.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    let mut bi = BiproductInstance { h: h.clone(), group, basis, index, antipode: Vec::new() };
    bi.antipode = solve_antipode(&bi)?;
    Ok(bi)
}

/// Unknowns `s[c·dim + k]` = coefficient of basis `k` in `S(basis c)`;
/// equations `Σ S(a₁)a₂ = ε(a)·1 = Σ a₁S(a₂)` for every basis `a`.
fn solve_antipode(bi: &BiproductInstance) -> Result<Vec<LinComb<BiKey>>> {
    let dim = bi.basis.len();
    let mut table: HashMap<(usize, usize), Vec<(usize, CycScalar)>> = HashMap::new();
    let mut product = |i: usize, j: usize| -> Result<Vec<(usize, CycScalar)>> {
        if let Some(p) = table.get(&(i, j)) {
            return Ok(p.clone());
        }
        let p: Vec<(usize, CycScalar)> = bi
            .mul_basis(&bi.basis[i], &bi.basis[j])?
            .into_iter()
            .map(|(k, c)| (bi.index[&k], c))
            .collect();
        table.insert((i, j), p.clone());
        Ok(p)
    };
    let unit = bi.index[&(Word::empty(), bi.h.table().group().zero())];
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for key in &bi.basis {
        let delta = bi.comultiply_basis(key)?;
        let eps = bi.h.counit_word(&key.0);
        for left in [true, false] {
            // output coordinate m → row
            let mut eq: HashMap<usize, SparseVec> = HashMap::new();
            for ((a1, a2), c) in delta.iter() {
                let (i1, i2) = (bi.index[a1], bi.index[a2]);
                let (s_of, other) = if left { (i1, i2) } else { (i2, i1) };
                for k in 0..dim {
                    let prod = if left { product(k, other)? } else { product(other, k)? };
                    for (m, d) in prod {
                        eq.entry(m).or_default().add_term(s_of * dim + k, c * &d);
                    }
                }
            }
            let mut ms: Vec<usize> = eq.keys().copied().collect();
            ms.push(unit);
            ms.sort_unstable();
            ms.dedup();
            for m in ms {
                rows.push(eq.remove(&m).unwrap_or_default());
                rhs.push(if m == unit { eps.clone() } else { CycScalar::zero() });
            }
        }
    }
    let sol = solve(&rows, &rhs, dim * dim).ok_or(Error::AntipodeNotFound)?;
    let mut out = vec![LinComb::zero(); dim];
    for (v, c) in sol.into_iter() {
        out[v / dim].add_term(bi.basis[v % dim].clone(), c);
    }
    Ok(out)
}
