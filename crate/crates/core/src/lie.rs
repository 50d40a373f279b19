//! Generalized brackets and the identities they satisfy.
//!
//! For a ζ-family `(g₁,…,gₙ)` the bracket of homogeneous elements is
//! `[x₁,…,xₙ] = Σ_σ ρ(σ)·x_{σ(1)}⋯x_{σ(n)}`. The `check_*` functions verify
//! the symmetry, Jacobi and primitivity identities on formal generators in
//! the free algebra, which proves each instance for every algebra at once.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::algebra::{
    derivations_solve, poly_one, poly_product, primitive_tensor, tensor_mul, tensor_of,
    GeneratorTable, GradedDerivation, GradedPoly, PresentedAlgebra, TensorSquarePoly, Word,
};
use crate::cyclotomic::{CycScalar, Root};
use crate::error::{Error, Result};
use crate::grading::{format_family, rho_unchecked, Bicharacter, GroupElement, ZetaFamily};
use crate::linear::{Echelon, SparseVec};
use crate::permutation::Permutation;

/// `ρ(σ, fam)` for every `σ ∈ S_n`, in lexicographic order of `σ`.
pub fn bracket_coefficients(chi: &Bicharacter, family: &ZetaFamily) -> Vec<(Permutation, Root)> {
    Permutation::all(family.len())
        .into_iter()
        .map(|s| {
            let r = rho_unchecked(chi, &s, family.zeta(), family.members());
            (s, r)
        })
        .collect()
}

fn check_degrees(table: &GeneratorTable, family: &ZetaFamily, xs: &[GradedPoly]) -> Result<()> {
    if xs.len() != family.len() {
        return Err(Error::LengthMismatch { expected: family.len(), found: xs.len() });
    }
    for (i, (x, g)) in xs.iter().zip(family.members()).enumerate() {
        let found = match table.degree(x) {
            Ok(Some(d)) => d,
            Ok(None) => continue,
            Err(_) => {
                return Err(Error::DegreeMismatch {
                    index: i + 1,
                    expected: g.to_string(),
                    found: "inhomogeneous".into(),
                })
            }
        };
        if found != *g {
            return Err(Error::DegreeMismatch {
                index: i + 1,
                expected: g.to_string(),
                found: found.to_string(),
            });
        }
    }
    Ok(())
}

/// `[x₁,…,xₙ]` in the free algebra on `table`.
pub fn bracket_eval(
    table: &GeneratorTable,
    chi: &Bicharacter,
    family: &ZetaFamily,
    xs: &[GradedPoly],
) -> Result<GradedPoly> {
    check_degrees(table, family, xs)?;
    let mut out = GradedPoly::zero();
    // monomial arguments: each term is one concatenated word
    let monomials: Option<Vec<(&Word, &CycScalar)>> =
        xs.iter().map(|x| if x.len() == 1 { x.iter().next() } else { None }).collect();
    if let Some(m) = monomials {
        let c = m.iter().fold(CycScalar::one(), |acc, (_, a)| &acc * *a);
        for (s, r) in bracket_coefficients(chi, family) {
            let w = s.images().iter().fold(Word::empty(), |acc, &i| acc.concat(m[i].0));
            out.add_term(w, if c.is_one() { r.to_scalar() } else { c.mul_root(r) });
        }
        return Ok(out);
    }
    for (s, r) in bracket_coefficients(chi, family) {
        let prod = poly_product(s.images().iter().map(|&i| &xs[i]));
        out.add_scaled(&prod, &r.to_scalar());
    }
    Ok(out)
}

/// `[x₁,…,xₙ]` in a presented algebra, in normal form.
pub fn bracket_eval_in(
    algebra: &PresentedAlgebra,
    chi: &Bicharacter,
    family: &ZetaFamily,
    xs: &[GradedPoly],
) -> Result<GradedPoly> {
    algebra.normal_form(&bracket_eval(algebra.table(), chi, family, xs)?)
}

fn formal_gens(n: usize) -> Vec<GradedPoly> {
    (0..n as u32).map(crate::algebra::poly_gen).collect()
}

/// Requires `ζ` to be a primitive `n`-th root of unity.
fn require_primitive(zeta: Root, n: usize) -> Result<()> {
    if zeta.is_primitive(n as u32) {
        Ok(())
    } else {
        Err(Error::NotPrimitiveRoot { zeta: zeta.to_string(), n })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryReport {
    pub passed: bool,
    pub checked: usize,
    pub counterexample: Option<Permutation>,
}

/// `[x₁,…,xₙ] = ρ(σ, g)·[x_{σ(1)},…,x_{σ(n)}]` for every `σ`.
pub fn check_symmetry(chi: &Bicharacter, family: &ZetaFamily) -> Result<SymmetryReport> {
    // The formal letters are distinct, so each word occurs exactly once in an
    // expansion and the identity compares one root of unity per word.
    let perms = Permutation::all(family.len());
    let base: HashMap<&[usize], Root> =
        perms.iter().map(|p| (p.images(), rho_unchecked(chi, p, family.zeta(), family.members()))).collect();
    let mut checked = 0;
    for s in &perms {
        checked += 1;
        let permuted = family.permuted(s);
        let r = rho_unchecked(chi, s, family.zeta(), family.members());
        // term p of [x_{s(1)},…,x_{s(n)}] is the word x_{s(p(1))}…x_{s(p(n))}
        let holds = perms.iter().all(|p| {
            let word: Vec<usize> = p.images().iter().map(|&i| s.apply(i)).collect();
            let c = rho_unchecked(chi, p, permuted.zeta(), permuted.members());
            base.get(word.as_slice()) == Some(&(c * r))
        });
        if !holds {
            return Ok(SymmetryReport { passed: false, checked, counterexample: Some(s.clone()) });
        }
    }
    Ok(SymmetryReport { passed: true, checked, counterexample: None })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jacobi1Report {
    pub passed: bool,
    /// `Σᵢ ρ((i…1))·[xᵢ,[x₁,…,x̂ᵢ,…]]`; zero when the identity holds.
    pub residual: GradedPoly,
    /// Every outer pair `(gᵢ, Σ_{j≠i} g_j)` was a (−1)-family.
    pub outer_pairs_ok: bool,
    /// `ρ((i…1)) = ζ^{1−i}·∏_{j<i} χ(g_j, gᵢ)` for every `i`.
    pub coefficients_agree: bool,
}

/// First Jacobi identity for a ζ-family of length `n+1`, `ζ` primitive `n`-th.
pub fn check_jacobi1(chi: &Bicharacter, family: &ZetaFamily) -> Result<Jacobi1Report> {
    let len = family.len();
    if len < 3 {
        return Err(Error::LengthMismatch { expected: 3, found: len });
    }
    let n = len - 1;
    let zeta = family.zeta();
    require_primitive(zeta, n)?;
    let group = chi.group();
    let g = family.members();
    let table = GeneratorTable::formal(group, g)?;
    let xs = formal_gens(len);

    let mut residual = GradedPoly::zero();
    let mut outer_pairs_ok = true;
    let mut coefficients_agree = true;
    for i in 1..=len {
        let cycle = Permutation::cycle_to_front(len, i);
        let c = rho_unchecked(chi, &cycle, zeta, g);
        let direct = (0..i - 1).fold(zeta.pow(-(i as i64 - 1)), |acc, j| acc * chi.eval_root(&g[j], &g[i - 1]));
        coefficients_agree &= c == direct;

        let rest_idx: Vec<usize> = (0..len).filter(|&j| j != i - 1).collect();
        let rest_deg: Vec<GroupElement> = rest_idx.iter().map(|&j| g[j].clone()).collect();
        let inner_fam = ZetaFamily::new(chi, zeta, rest_deg.clone())?;
        let inner_args: Vec<GradedPoly> = rest_idx.iter().map(|&j| xs[j].clone()).collect();
        let inner = bracket_eval(&table, chi, &inner_fam, &inner_args)?;

        let outer_deg = vec![g[i - 1].clone(), group.sum(&rest_deg)];
        if !chi.is_zeta_family_root(Root::minus_one(), &outer_deg) {
            outer_pairs_ok = false;
            continue;
        }
        let outer_fam = ZetaFamily::new(chi, Root::minus_one(), outer_deg)?;
        let outer = bracket_eval(&table, chi, &outer_fam, &[xs[i - 1].clone(), inner])?;
        residual.add_scaled(&outer, &c.to_scalar());
    }
    Ok(Jacobi1Report {
        passed: residual.is_zero() && outer_pairs_ok && coefficients_agree,
        residual,
        outer_pairs_ok,
        coefficients_agree,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jacobi2Report {
    pub passed: bool,
    /// `[x,[y₁,…,yₙ]] − Σᵢ (∏_{j<i} χ(h, g_j))·[y₁,…,[x,yᵢ],…,yₙ]`.
    pub residual: GradedPoly,
}

/// Second Jacobi identity: `x` of degree `h`, `(h, gᵢ)` all (−1)-families.
pub fn check_jacobi2(chi: &Bicharacter, family: &ZetaFamily, h: &GroupElement) -> Result<Jacobi2Report> {
    let residual = jacobi2_residual(chi, family, h, |chi, g, j, h| chi.eval_root(h, &g[j]))?;
    Ok(Jacobi2Report { passed: residual.is_zero(), residual })
}

fn jacobi2_residual(
    chi: &Bicharacter,
    family: &ZetaFamily,
    h: &GroupElement,
    factor: impl Fn(&Bicharacter, &[GroupElement], usize, &GroupElement) -> Root,
) -> Result<GradedPoly> {
    let n = family.len();
    let zeta = family.zeta();
    require_primitive(zeta, n)?;
    let group = chi.group();
    let g = family.members();
    for (i, gi) in g.iter().enumerate() {
        if !chi.is_zeta_family_root(Root::minus_one(), &[h.clone(), gi.clone()]) {
            return Err(Error::PairNotMinusOneFamily { index: i + 1 });
        }
    }
    let mut degs = vec![h.clone()];
    degs.extend(g.iter().cloned());
    let names: Vec<(String, GroupElement)> = std::iter::once(("x".to_string(), h.clone()))
        .chain((1..=n).map(|i| (format!("y{i}"), g[i - 1].clone())))
        .collect();
    let table = GeneratorTable::new(group.clone(), names)?;
    let x = crate::algebra::poly_gen(0);
    let ys: Vec<GradedPoly> = (1..=n as u32).map(crate::algebra::poly_gen).collect();

    let inner = bracket_eval(&table, chi, family, &ys)?;
    let outer_fam = ZetaFamily::new(chi, Root::minus_one(), vec![h.clone(), group.sum(g)])?;
    let mut residual = bracket_eval(&table, chi, &outer_fam, &[x.clone(), inner])?;

    let mut coeff = Root::one();
    for i in 0..n {
        if i > 0 {
            coeff = coeff * factor(chi, g, i - 1, h);
        }
        let pair = ZetaFamily::new(chi, Root::minus_one(), vec![h.clone(), g[i].clone()])?;
        let xy = bracket_eval(&table, chi, &pair, &[x.clone(), ys[i].clone()])?;
        let mut members = g.to_vec();
        members[i] = group.add(h, &g[i]);
        let fam = ZetaFamily::new(chi, zeta, members)?;
        let mut args = ys.clone();
        args[i] = xy;
        let term = bracket_eval(&table, chi, &fam, &args)?;
        residual.add_scaled(&term, &-coeff.to_scalar());
    }
    Ok(residual)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MainTheoremReport {
    pub passed: bool,
    /// Nonzero mixed coefficients `c_{σ,i}`, `0 < i < n`, by `σ` then `i`.
    pub mixed_nonzero: Vec<(Permutation, usize, CycScalar)>,
    /// `c_{1,i}` for `i = 0, …, n` (left leg of length `i`).
    pub identity_coefficients: Vec<CycScalar>,
    /// The expansion equals `[x₁,…,xₙ]⊗1 + 1⊗[x₁,…,xₙ]`.
    pub matches_primitive: bool,
}

/// Expand `[x₁⊗1+1⊗x₁, …, xₙ⊗1+1⊗xₙ]` in the braided tensor square for any ζ.
pub fn main_theorem_expansion(chi: &Bicharacter, family: &ZetaFamily) -> Result<MainTheoremReport> {
    let n = family.len();
    let table = GeneratorTable::formal(chi.group(), family.members())?;
    let xs = formal_gens(n);
    let prims: Vec<TensorSquarePoly> = xs.iter().map(primitive_tensor).collect();

    let mut expansion = TensorSquarePoly::zero();
    for (s, r) in bracket_coefficients(chi, family) {
        let mut prod = tensor_of(&poly_one(), &poly_one());
        for &i in s.images() {
            prod = tensor_mul(&table, chi, &prod, &prims[i])?;
        }
        expansion.add_scaled(&prod, &r.to_scalar());
    }

    let word = |idx: &[usize]| Word::from_letters(idx.iter().map(|&i| i as u32).collect());
    let mut mixed_nonzero = Vec::new();
    for s in Permutation::all(n) {
        for i in 1..n {
            let key = (word(&s.images()[..i]), word(&s.images()[i..]));
            let c = expansion.coeff(&key);
            if !c.is_zero() {
                mixed_nonzero.push((s.clone(), i, c));
            }
        }
    }
    let id: Vec<usize> = (0..n).collect();
    let identity_coefficients: Vec<CycScalar> =
        (0..=n).map(|i| expansion.coeff(&(word(&id[..i]), word(&id[i..])))).collect();

    let bracket = bracket_eval(&table, chi, family, &xs)?;
    let matches_primitive = expansion == primitive_tensor(&bracket);
    let ends_ok = identity_coefficients[0].is_one() && identity_coefficients[n].is_one();
    Ok(MainTheoremReport {
        passed: mixed_nonzero.is_empty() && ends_ok && matches_primitive,
        mixed_nonzero,
        identity_coefficients,
        matches_primitive,
    })
}

/// [`main_theorem_expansion`] under the theorem's hypothesis `ζ` primitive `n`-th.
pub fn check_main_theorem(chi: &Bicharacter, family: &ZetaFamily) -> Result<MainTheoremReport> {
    require_primitive(family.zeta(), family.len())?;
    main_theorem_expansion(chi, family)
}

/// Number of partitions of `t` into at most `j` parts, each at most `i`.
pub fn partition_count(i: usize, j: usize, t: usize) -> BigInt {
    partition_polynomial(i, j).get(t).cloned().unwrap_or_else(BigInt::zero)
}

/// `Σ_t p(i, j, t) qᵗ` as a coefficient list, by the box recurrence
/// `p(i,j,t) = p(i−1,j,t) + p(i,j−1,t−i)`.
pub fn partition_polynomial(i: usize, j: usize) -> Vec<BigInt> {
    // table[a][b] = generating polynomial for the a×b box
    let mut prev: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]; j + 1];
    for a in 1..=i {
        let mut cur: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]; j + 1];
        for b in 1..=j {
            let mut poly = vec![BigInt::zero(); a * b + 1];
            for (t, c) in prev[b].iter().enumerate() {
                poly[t] += c;
            }
            for (t, c) in cur[b - 1].iter().enumerate() {
                poly[t + a] += c;
            }
            cur[b] = poly;
        }
        prev = cur;
    }
    prev[j].clone()
}

/// `(1−qⁿ)⋯(1−q^{n−i+1}) / (1−qⁱ)⋯(1−q)` as an exact integer polynomial.
pub fn sylvester_polynomial(n: usize, i: usize) -> Vec<BigInt> {
    assert!(i <= n);
    let one_minus = |k: usize| {
        let mut p = vec![BigInt::zero(); k + 1];
        p[0] = BigInt::one();
        p[k] -= BigInt::one();
        p
    };
    let mut num = vec![BigInt::one()];
    for k in (n - i + 1)..=n {
        num = int_poly_mul(&num, &one_minus(k));
    }
    for k in 1..=i {
        num = int_poly_div_exact(&num, &one_minus(k));
    }
    while num.len() > 1 && num.last().is_some_and(Zero::is_zero) {
        num.pop();
    }
    num
}

fn int_poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Division by a polynomial with constant term 1, known to be exact.
fn int_poly_div_exact(a: &[BigInt], d: &[BigInt]) -> Vec<BigInt> {
    assert!(d[0].is_one());
    let qlen = a.len() + 1 - d.len();
    let mut rem = a.to_vec();
    let mut q = vec![BigInt::zero(); qlen];
    for k in 0..qlen {
        let c = rem[k].clone();
        if c.is_zero() {
            continue;
        }
        for (j, y) in d.iter().enumerate() {
            rem[k + j] -= &c * y;
        }
        q[k] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "inexact division");
    q
}

pub fn eval_int_poly(poly: &[BigInt], x: &CycScalar) -> CycScalar {
    poly.iter().rev().fold(CycScalar::zero(), |acc, c| {
        let c = CycScalar::from_rational(num_rational::BigRational::from_integer(c.clone()));
        &(&acc * x) + &c
    })
}

/// `c_{1,i} = Σ_t p(i, n−i, t)·ζᵗ`.
pub fn gaussian_coefficient(i: usize, n: usize, zeta: &CycScalar) -> CycScalar {
    assert!(i <= n);
    eval_int_poly(&partition_polynomial(i, n - i), zeta)
}

/// Arities `n >= 2` with a primitive `n`-th root in the ambient field of `χ`.
pub fn admissible_arities(chi: &Bicharacter) -> Vec<usize> {
    let m = chi.ambient_level() as usize;
    (2..=m).filter(|n| m.is_multiple_of(*n)).collect()
}

/// Primitive `n`-th roots of unity in the ambient field, by angle.
pub fn primitive_roots(chi: &Bicharacter, n: usize) -> Vec<Root> {
    let m = chi.ambient_level();
    let mut out: Vec<Root> = (0..m as i64)
        .map(|k| Root::new(m, k))
        .filter(|r| r.is_primitive(n as u32))
        .collect();
    out.sort();
    out
}

/// All ζ-families of the given length with `ζ` a primitive `n`-th root.
pub fn families_with_primitive_zeta(chi: &Bicharacter, len: usize, n: usize) -> Result<Vec<ZetaFamily>> {
    let mut out = Vec::new();
    for zeta in primitive_roots(chi, n) {
        out.extend(chi.enumerate_zeta_families(len, zeta)?);
    }
    Ok(out)
}

/// Run a check over many families in parallel; results keep the input order.
pub fn sweep<T: Send>(families: &[ZetaFamily], check: impl Fn(&ZetaFamily) -> T + Sync + Send) -> Vec<T> {
    families.par_iter().map(check).collect()
}

/// What to do with a bracket that is neither declared nor forced by symmetry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UndeclaredPolicy {
    Error,
    Zero,
}

/// How a bracket of basis elements gets its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BracketSource {
    Declared,
    /// A stabilizing permutation has `ρ ≠ 1`, so the bracket equals a nontrivial multiple of itself.
    ForcedZero,
    /// A permutation of the arguments is declared.
    Symmetry,
    Undeclared,
}

/// A declared value `[b_{a₁}, …, b_{aₙ}] = value` for one ζ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketEntry {
    pub zeta: Root,
    pub args: Vec<u32>,
    pub value: GradedPoly,
}

/// Graded components with bases and a table of bracket structure constants.
#[derive(Clone, Debug)]
pub struct LiePresentation {
    chi: Bicharacter,
    basis: GeneratorTable,
    entries: Vec<BracketEntry>,
    index: HashMap<(Root, Vec<u32>), usize>,
    policy: UndeclaredPolicy,
}

impl LiePresentation {
    /// Basis elements are the generators of `basis`; each value must be a
    /// homogeneous linear combination of them.
    pub fn new(
        chi: Bicharacter,
        basis: GeneratorTable,
        entries: Vec<BracketEntry>,
        policy: UndeclaredPolicy,
    ) -> Result<Self> {
        if chi.group() != basis.group() {
            return Err(Error::TableMismatch);
        }
        let mut index = HashMap::new();
        for (k, e) in entries.iter().enumerate() {
            let n = e.args.len();
            let name = |e: &BracketEntry| {
                let parts: Vec<&str> = e.args.iter().map(|&a| basis.name(a)).collect();
                format!("[{}]", parts.join(","))
            };
            if n < 2 {
                return Err(Error::LieValidationFailure(format!("{} has arity below 2", name(e))));
            }
            if let Some(&a) = e.args.iter().find(|&&a| a as usize >= basis.len()) {
                return Err(Error::UnknownGenerator(format!("#{a}")));
            }
            require_primitive(e.zeta, n)?;
            let degs: Vec<GroupElement> = e.args.iter().map(|&a| basis.gen_degree(a).clone()).collect();
            ZetaFamily::new(&chi, e.zeta, degs.clone())?;
            if e.value.keys().any(|w| w.len() != 1) {
                return Err(Error::LieValidationFailure(format!(
                    "{} must be a linear combination of basis elements",
                    name(e)
                )));
            }
            basis.check_poly(&e.value)?;
            let target = chi.group().sum(&degs);
            if let Some(d) = basis.degree(&e.value)? {
                if d != target {
                    return Err(Error::DegreeMismatch {
                        index: 0,
                        expected: target.to_string(),
                        found: d.to_string(),
                    });
                }
            }
            if index.insert((e.zeta, e.args.clone()), k).is_some() {
                return Err(Error::LieValidationFailure(format!("{} declared twice", name(e))));
            }
        }
        Ok(LiePresentation { chi, basis, entries, index, policy })
    }

    pub fn chi(&self) -> &Bicharacter {
        &self.chi
    }

    pub fn basis(&self) -> &GeneratorTable {
        &self.basis
    }

    pub fn entries(&self) -> &[BracketEntry] {
        &self.entries
    }

    pub fn policy(&self) -> UndeclaredPolicy {
        self.policy
    }

    fn degrees(&self, args: &[u32]) -> Vec<GroupElement> {
        args.iter().map(|&a| self.basis.gen_degree(a).clone()).collect()
    }

    pub fn render_args(&self, args: &[u32]) -> String {
        let parts: Vec<&str> = args.iter().map(|&a| self.basis.name(a)).collect();
        format!("[{}]", parts.join(","))
    }

    /// Bracket of basis elements: declared, forced to zero by a stabilizer
    /// with `ρ ≠ 1`, or derived from a declared permutation by symmetry.
    pub fn bracket_basis(&self, zeta: Root, args: &[u32]) -> Result<GradedPoly> {
        match self.lookup(zeta, args)? {
            (_, Some(v)) => Ok(v),
            (_, None) => match self.policy {
                UndeclaredPolicy::Zero => Ok(GradedPoly::zero()),
                UndeclaredPolicy::Error => Err(Error::MissingBracket {
                    zeta: zeta.to_string(),
                    family: self.render_args(args),
                }),
            },
        }
    }

    /// Where the value of a basis bracket comes from; `None` when undeclared.
    pub fn lookup(&self, zeta: Root, args: &[u32]) -> Result<(BracketSource, Option<GradedPoly>)> {
        let degs = self.degrees(args);
        if !self.chi.is_zeta_family_root(zeta, &degs) {
            return Err(Error::NotAZetaFamily { zeta: zeta.to_string(), family: format_family(&degs) });
        }
        if let Some(&k) = self.index.get(&(zeta, args.to_vec())) {
            return Ok((BracketSource::Declared, Some(self.entries[k].value.clone())));
        }
        let n = args.len();
        for i in 0..n {
            for j in i + 1..n {
                if args[i] == args[j] {
                    let mut images: Vec<usize> = (0..n).collect();
                    images.swap(i, j);
                    let t = Permutation::from_images(images).expect("transposition");
                    if !rho_unchecked(&self.chi, &t, zeta, &degs).is_one() {
                        return Ok((BracketSource::ForcedZero, Some(GradedPoly::zero())));
                    }
                }
            }
        }
        let mut sorted = args.to_vec();
        sorted.sort_unstable();
        for e in &self.entries {
            if e.zeta != zeta || e.args.len() != n {
                continue;
            }
            let mut other = e.args.clone();
            other.sort_unstable();
            if other != sorted {
                continue;
            }
            // σ with e.args[k] = args[σ(k)]
            let mut used = vec![false; n];
            let mut images = Vec::with_capacity(n);
            for &a in &e.args {
                let p = (0..n).find(|&p| !used[p] && args[p] == a).expect("same multiset");
                used[p] = true;
                images.push(p);
            }
            let s = Permutation::from_images(images).expect("bijection");
            let r = rho_unchecked(&self.chi, &s, zeta, &degs);
            return Ok((BracketSource::Symmetry, Some(e.value.scaled(&r.to_scalar()))));
        }
        Ok((BracketSource::Undeclared, None))
    }

    /// Every basis tuple with a primitive-root family, by arity then ζ then tuple.
    pub fn admissible_tuples(&self) -> Vec<(Root, Vec<u32>)> {
        let mut out = Vec::new();
        for n in admissible_arities(&self.chi) {
            for zeta in primitive_roots(&self.chi, n) {
                out.extend(self.basis_families(n, zeta).into_iter().map(|t| (zeta, t)));
            }
        }
        out
    }

    /// Multilinear extension to homogeneous linear combinations of basis elements.
    pub fn bracket(&self, zeta: Root, xs: &[GradedPoly]) -> Result<GradedPoly> {
        let mut out = GradedPoly::zero();
        let mut args = Vec::with_capacity(xs.len());
        self.bracket_rec(zeta, xs, &mut args, CycScalar::one(), &mut out)?;
        Ok(out)
    }

    fn bracket_rec(
        &self,
        zeta: Root,
        xs: &[GradedPoly],
        args: &mut Vec<u32>,
        coeff: CycScalar,
        out: &mut GradedPoly,
    ) -> Result<()> {
        let k = args.len();
        if k == xs.len() {
            let v = self.bracket_basis(zeta, args)?;
            out.add_scaled(&v, &coeff);
            return Ok(());
        }
        for (w, c) in xs[k].iter() {
            let [a] = w.letters() else {
                return Err(Error::LieValidationFailure("bracket argument is not linear".into()));
            };
            args.push(*a);
            self.bracket_rec(zeta, xs, args, &coeff * c, out)?;
            args.pop();
        }
        Ok(())
    }

    /// Basis tuples of the given length whose degrees form a ζ-family.
    fn basis_families(&self, len: usize, zeta: Root) -> Vec<Vec<u32>> {
        let target = zeta * zeta;
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.extend_tuples(len, target, &mut stack, &mut out);
        out
    }

    fn extend_tuples(&self, len: usize, target: Root, stack: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if stack.len() == len {
            out.push(stack.clone());
            return;
        }
        for b in 0..self.basis.len() as u32 {
            let gb = self.basis.gen_degree(b);
            if stack
                .iter()
                .all(|&a| self.chi.symmetric_product(self.basis.gen_degree(a), gb) == target)
            {
                stack.push(b);
                self.extend_tuples(len, target, stack, out);
                stack.pop();
            }
        }
    }
}

/// One failed identity instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub identity: &'static str,
    pub instance: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.identity, self.instance)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieReport {
    pub symmetry_checked: usize,
    pub jacobi1_checked: usize,
    pub jacobi2_checked: usize,
    pub violations: Vec<Violation>,
}

impl LieReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check symmetry, first and second Jacobi on basis tuples.
pub fn lie_validate(p: &LiePresentation) -> Result<LieReport> {
    let chi = &p.chi;
    let mut violations = Vec::new();
    let minus = Root::minus_one();

    // symmetry: declared entries against each other and their stabilizers
    let mut symmetry_checked = 0;
    for e in &p.entries {
        let degs = p.degrees(&e.args);
        for s in Permutation::all(e.args.len()) {
            let permuted = s.permute(&e.args);
            let other = if permuted == e.args {
                Some(&e.value)
            } else {
                p.index.get(&(e.zeta, permuted.clone())).map(|&k| &p.entries[k].value)
            };
            let Some(other) = other else { continue };
            symmetry_checked += 1;
            let r = rho_unchecked(chi, &s, e.zeta, &degs);
            if e.value != other.scaled(&r.to_scalar()) {
                violations.push(Violation {
                    identity: "symmetry",
                    instance: format!(
                        "zeta={} {} vs {} sigma={}",
                        e.zeta,
                        p.render_args(&e.args),
                        p.render_args(&permuted),
                        s
                    ),
                });
            }
        }
    }

    let gen = |a: u32| crate::algebra::poly_gen(a);
    let mut jacobi1_checked = 0;
    let mut jacobi2_checked = 0;
    for n in admissible_arities(chi) {
        for zeta in primitive_roots(chi, n) {
            // first Jacobi on tuples of length n+1
            for args in p.basis_families(n + 1, zeta) {
                jacobi1_checked += 1;
                let degs = p.degrees(&args);
                let mut total = GradedPoly::zero();
                for i in 1..=n + 1 {
                    let cycle = Permutation::cycle_to_front(n + 1, i);
                    let c = rho_unchecked(chi, &cycle, zeta, &degs);
                    let rest: Vec<GradedPoly> =
                        (0..=n).filter(|&j| j != i - 1).map(|j| gen(args[j])).collect();
                    let inner = p.bracket(zeta, &rest)?;
                    if inner.is_zero() {
                        continue;
                    }
                    let outer = p.bracket(minus, &[gen(args[i - 1]), inner])?;
                    total.add_scaled(&outer, &c.to_scalar());
                }
                if !total.is_zero() {
                    violations.push(Violation {
                        identity: "jacobi1",
                        instance: format!("zeta={zeta} {}", p.render_args(&args)),
                    });
                }
            }
            // second Jacobi: x of degree h against tuples of length n
            let tuples = p.basis_families(n, zeta);
            for xa in 0..p.basis.len() as u32 {
                let h = p.basis.gen_degree(xa);
                for args in &tuples {
                    let degs = p.degrees(args);
                    if !degs.iter().all(|g| chi.is_zeta_family_root(minus, &[h.clone(), g.clone()])) {
                        continue;
                    }
                    jacobi2_checked += 1;
                    let ys: Vec<GradedPoly> = args.iter().map(|&a| gen(a)).collect();
                    let inner = p.bracket(zeta, &ys)?;
                    let mut total = if inner.is_zero() {
                        GradedPoly::zero()
                    } else {
                        p.bracket(minus, &[gen(xa), inner])?
                    };
                    let mut coeff = Root::one();
                    for i in 0..n {
                        if i > 0 {
                            coeff = coeff * chi.eval_root(h, &degs[i - 1]);
                        }
                        let xy = p.bracket(minus, &[gen(xa), ys[i].clone()])?;
                        if xy.is_zero() {
                            continue;
                        }
                        let mut zs = ys.clone();
                        zs[i] = xy;
                        let term = p.bracket(zeta, &zs)?;
                        total.add_scaled(&term, &-coeff.to_scalar());
                    }
                    if !total.is_zero() {
                        violations.push(Violation {
                            identity: "jacobi2",
                            instance: format!(
                                "zeta={zeta} x={} {}",
                                p.basis.name(xa),
                                p.render_args(args)
                            ),
                        });
                    }
                }
            }
        }
    }
    Ok(LieReport { symmetry_checked, jacobi1_checked, jacobi2_checked, violations })
}

/// Linear maps on a finite basis, stored column by column.
#[derive(Clone, Debug, PartialEq, Eq)]
struct LinearMap {
    columns: Vec<SparseVec>,
}

impl LinearMap {
    fn from_derivation(d: &GradedDerivation, index: &HashMap<Word, usize>) -> LinearMap {
        LinearMap {
            columns: d
                .images
                .iter()
                .map(|p| p.iter().map(|(w, c)| (index[w], c.clone())).collect())
                .collect(),
        }
    }

    fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::zero();
        for (i, c) in v.iter() {
            out.add_scaled(&self.columns[*i], c);
        }
        out
    }

    /// Flatten to one vector for span membership.
    fn flatten(&self) -> SparseVec {
        let dim = self.columns.len();
        let mut out = SparseVec::zero();
        for (j, col) in self.columns.iter().enumerate() {
            for (i, c) in col.iter() {
                out.add_term(j * dim + i, c.clone());
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationClosureReport {
    /// Dimension of the degree-`g` derivations, by degree.
    pub dimensions: Vec<(GroupElement, usize)>,
    pub brackets_checked: usize,
    pub failures: Vec<String>,
}

impl DerivationClosureReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Brackets of derivations, composed in `End(A)`, stay inside the solved span.
pub fn derivation_closure_check(algebra: &PresentedAlgebra, chi: &Bicharacter) -> Result<DerivationClosureReport> {
    let basis = algebra.finite_basis()?;
    let index: HashMap<Word, usize> = basis.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let group = chi.group();
    let mut by_degree: BTreeMap<GroupElement, (Vec<LinearMap>, Echelon)> = BTreeMap::new();
    let mut dimensions = Vec::new();
    for g in group.elements()? {
        let ders = derivations_solve(algebra, chi, &g)?;
        let maps: Vec<LinearMap> = ders.iter().map(|d| LinearMap::from_derivation(d, &index)).collect();
        let mut ech = Echelon::new();
        for m in &maps {
            ech.insert(&m.flatten());
        }
        dimensions.push((g.clone(), maps.len()));
        by_degree.insert(g, (maps, ech));
    }

    let dim = basis.len();
    let mut checked = 0;
    let mut failures = Vec::new();
    for n in admissible_arities(chi) {
        for zeta in primitive_roots(chi, n) {
            for fam in chi.enumerate_zeta_families(n, zeta)? {
                let choices: Vec<&Vec<LinearMap>> =
                    fam.members().iter().map(|g| &by_degree[g].0).collect();
                if choices.iter().any(|c| c.is_empty()) {
                    continue;
                }
                let target = group.sum(fam.members());
                let mut pick = vec![0usize; n];
                loop {
                    let maps: Vec<&LinearMap> = (0..n).map(|k| &choices[k][pick[k]]).collect();
                    let bracket = bracket_of_maps(chi, &fam, &maps, dim);
                    checked += 1;
                    if !by_degree[&target].1.contains(&bracket.flatten()) {
                        failures.push(format!("zeta={zeta} family={fam} choice={pick:?}"));
                    }
                    // next choice
                    let mut k = 0;
                    while k < n {
                        pick[k] += 1;
                        if pick[k] < choices[k].len() {
                            break;
                        }
                        pick[k] = 0;
                        k += 1;
                    }
                    if k == n {
                        break;
                    }
                }
            }
        }
    }
    Ok(DerivationClosureReport { dimensions, brackets_checked: checked, failures })
}

/// `Σ_σ ρ(σ)·d_{σ(1)}∘⋯∘d_{σ(n)}`, built by choosing `σ(n), σ(n−1), …`
/// and applying maps right to left so shared suffixes are computed once.
fn bracket_of_maps(chi: &Bicharacter, fam: &ZetaFamily, maps: &[&LinearMap], dim: usize) -> LinearMap {
    let n = maps.len();
    let g = fam.members();
    let zinv = fam.zeta().inv();
    let mut columns = vec![SparseVec::zero(); dim];
    for (b, col) in columns.iter_mut().enumerate() {
        let start = SparseVec::basis(b);
        let mut used = vec![false; n];
        let mut chosen: Vec<usize> = Vec::with_capacity(n);
        suffix_rec(chi, g, zinv, maps, &start, Root::one(), &mut used, &mut chosen, col);
    }
    LinearMap { columns }
}

#[allow(clippy::too_many_arguments)]
fn suffix_rec(
    chi: &Bicharacter,
    g: &[GroupElement],
    zinv: Root,
    maps: &[&LinearMap],
    v: &SparseVec,
    rho: Root,
    used: &mut [bool],
    chosen: &mut Vec<usize>,
    out: &mut SparseVec,
) {
    let n = maps.len();
    if chosen.len() == n {
        out.add_scaled(v, &rho.to_scalar());
        return;
    }
    // `chosen` holds σ(n), σ(n−1), …; the next pick fills the position before them
    for m in 0..n {
        if used[m] {
            continue;
        }
        // new inversions: later positions holding smaller indices
        let mut r = rho;
        for &later in chosen.iter() {
            if m > later {
                r = r * zinv * chi.eval_root(&g[later], &g[m]);
            }
        }
        let w = maps[m].apply(v);
        if w.is_zero() {
            continue;
        }
        used[m] = true;
        chosen.push(m);
        suffix_rec(chi, g, zinv, maps, &w, r, used, chosen, out);
        chosen.pop();
        used[m] = false;
    }
}
