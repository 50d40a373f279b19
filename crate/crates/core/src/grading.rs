//! Grading groups, bicharacters, ζ-families and the ρ coefficient.
//!
//! Groups are presented as `C_{m_1} × … × C_{m_s} × Z^r` with the invariant
//! factors supplied directly. A bicharacter is an integer exponent matrix `E`
//! with `χ(g, h) = ζ_L^{g·E·h}`; all of its values are therefore roots of unity
//! of order dividing `L`, and every ζ that can index a family of length at
//! least two lives at level `2L`.

use std::collections::BTreeMap;
use std::fmt;

use crate::cyclotomic::{CycScalar, Root};
use crate::error::{Error, Result};
use crate::permutation::Permutation;

/// A finitely generated abelian group `C_{m_1} × … × C_{m_s} × Z^r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbelianGroup {
    torsion: Vec<u32>,
    free_rank: usize,
}

/// An element of an [`AbelianGroup`] as its coordinate tuple. Torsion
/// coordinates are kept reduced into `[0, m_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(Vec<i64>);

impl GroupElement {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [] => write!(f, "0"),
            [x] => write!(f, "{x}"),
            xs => {
                write!(f, "(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl AbelianGroup {
    pub fn new(torsion: Vec<u32>, free_rank: usize) -> Result<Self> {
        if let Some(m) = torsion.iter().find(|&&m| m < 2) {
            return Err(Error::ShapeMismatch(format!("cyclic factor of order {m} (need >= 2)")));
        }
        Ok(AbelianGroup { torsion, free_rank })
    }

    pub fn trivial() -> Self {
        AbelianGroup { torsion: Vec::new(), free_rank: 0 }
    }

    pub fn cyclic(m: u32) -> Self {
        AbelianGroup::new(vec![m], 0).expect("cyclic order >= 2")
    }

    pub fn torsion(&self) -> &[u32] {
        &self.torsion
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    /// Number of coordinates (cyclic plus free generators).
    pub fn rank(&self) -> usize {
        self.torsion.len() + self.free_rank
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn order(&self) -> Option<u64> {
        self.is_finite().then(|| self.torsion.iter().map(|&m| m as u64).product())
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    pub fn generator(&self, i: usize) -> GroupElement {
        let mut v = vec![0; self.rank()];
        v[i] = 1;
        self.reduce(v)
    }

    fn reduce(&self, mut v: Vec<i64>) -> GroupElement {
        for (x, &m) in v.iter_mut().zip(&self.torsion) {
            *x = x.rem_euclid(m as i64);
        }
        GroupElement(v)
    }

    /// Element from raw coordinates, reducing torsion coordinates.
    pub fn element(&self, coords: Vec<i64>) -> Result<GroupElement> {
        if coords.len() != self.rank() {
            return Err(Error::LengthMismatch { expected: self.rank(), found: coords.len() });
        }
        Ok(self.reduce(coords))
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        g.0.len() == self.rank()
            && g.0.iter().zip(&self.torsion).all(|(&x, &m)| 0 <= x && x < m as i64)
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.reduce(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect())
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        self.reduce(a.0.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, k: i64, a: &GroupElement) -> GroupElement {
        self.reduce(a.0.iter().map(|x| k * x).collect())
    }

    pub fn sum<'a>(&self, items: impl IntoIterator<Item = &'a GroupElement>) -> GroupElement {
        items.into_iter().fold(self.zero(), |acc, g| self.add(&acc, g))
    }

    /// All elements in lexicographic order of coordinates.
    pub fn elements(&self) -> Result<Vec<GroupElement>> {
        if !self.is_finite() {
            return Err(Error::InfiniteGroup(self.free_rank));
        }
        let mut out = vec![Vec::new()];
        for &m in &self.torsion {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<i64>| {
                    (0..m as i64).map(move |x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        Ok(out.into_iter().map(GroupElement).collect())
    }

    /// Parse `3`, `(1,2)`, `1,2` or `0` (the latter for the trivial group).
    pub fn parse_element(&self, text: &str) -> Result<GroupElement> {
        let t = text.trim();
        let inner = t.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(t);
        if self.rank() == 0 && (inner.trim().is_empty() || inner.trim() == "0") {
            return Ok(self.zero());
        }
        let coords: Vec<i64> = inner
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::parse(1, format!("bad group element `{text}`")))
            })
            .collect::<Result<_>>()?;
        self.element(coords)
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.torsion.iter().map(|m| format!("C{m}")).collect();
        if self.free_rank > 0 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        if parts.is_empty() {
            write!(f, "trivial")
        } else {
            write!(f, "{}", parts.join(" x "))
        }
    }
}

/// A bicharacter `χ(g, h) = ζ_L^{Σ g_i e_ij h_j}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bicharacter {
    group: AbelianGroup,
    level: u32,
    matrix: Vec<Vec<i64>>,
}

impl Bicharacter {
    /// Validate an exponent matrix: every torsion generator of order `m_i`
    /// needs `m_i·e_ij ≡ m_i·e_ji ≡ 0 (mod L)`.
    pub fn new(group: AbelianGroup, level: u32, matrix: Vec<Vec<i64>>) -> Result<Self> {
        if level == 0 {
            return Err(Error::ShapeMismatch("bicharacter level must be positive".into()));
        }
        let r = group.rank();
        if matrix.len() != r || matrix.iter().any(|row| row.len() != r) {
            return Err(Error::ShapeMismatch(format!(
                "bicharacter matrix must be {r}x{r} for {group}"
            )));
        }
        let l = level as i64;
        let matrix: Vec<Vec<i64>> =
            matrix.into_iter().map(|row| row.into_iter().map(|e| e.rem_euclid(l)).collect()).collect();
        for (i, &m) in group.torsion.iter().enumerate() {
            let m = m as i64;
            for j in 0..r {
                if (m * matrix[i][j]) % l != 0 {
                    return Err(Error::IllDefinedBicharacter {
                        i,
                        j,
                        reason: format!("{m}*{} is not 0 mod {l}", matrix[i][j]),
                    });
                }
                if (m * matrix[j][i]) % l != 0 {
                    return Err(Error::IllDefinedBicharacter {
                        i: j,
                        j: i,
                        reason: format!("{m}*{} is not 0 mod {l}", matrix[j][i]),
                    });
                }
            }
        }
        Ok(Bicharacter { group, level, matrix })
    }

    /// `χ ≡ 1`.
    pub fn trivial(group: AbelianGroup) -> Self {
        let r = group.rank();
        Bicharacter { group, level: 1, matrix: vec![vec![0; r]; r] }
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    /// The value level `L`.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    /// Level `2L`, which contains both square roots of every `χ(g,h)χ(h,g)`.
    pub fn ambient_level(&self) -> u32 {
        2 * self.level
    }

    pub fn is_trivial(&self) -> bool {
        self.matrix.iter().flatten().all(|&e| e == 0)
    }

    fn exponent(&self, g: &GroupElement, h: &GroupElement) -> i64 {
        let l = self.level as i64;
        let mut acc = 0i64;
        for (i, gi) in g.0.iter().enumerate() {
            if *gi == 0 {
                continue;
            }
            for (j, hj) in h.0.iter().enumerate() {
                acc = (acc + gi * self.matrix[i][j] % l * hj) % l;
            }
        }
        acc
    }

    pub fn eval_root(&self, g: &GroupElement, h: &GroupElement) -> Root {
        Root::new(self.level, self.exponent(g, h))
    }

    pub fn eval(&self, g: &GroupElement, h: &GroupElement) -> CycScalar {
        self.eval_root(g, h).to_scalar_at(self.ambient_level())
    }

    /// `χ(g, h)·χ(h, g)`.
    pub fn symmetric_product(&self, g: &GroupElement, h: &GroupElement) -> Root {
        self.eval_root(g, h) * self.eval_root(h, g)
    }

    /// `|g| = χ(g, g)`.
    pub fn norm(&self, g: &GroupElement) -> Root {
        self.eval_root(g, g)
    }

    /// Validate a scalar ζ and turn it into a root of unity.
    pub fn zeta_root(zeta: &CycScalar) -> Result<Root> {
        zeta.as_root().ok_or_else(|| Error::NotARootOfUnity(zeta.to_string()))
    }

    pub fn is_zeta_family_root(&self, zeta: Root, members: &[GroupElement]) -> bool {
        let target = zeta * zeta;
        members.iter().enumerate().all(|(i, g)| {
            members[i + 1..].iter().all(|h| self.symmetric_product(g, h) == target)
        })
    }

    /// `χ(g_i,g_j)χ(g_j,g_i) = ζ²` for all `i ≠ j`; vacuous below length two.
    pub fn is_zeta_family(&self, zeta: &CycScalar, members: &[GroupElement]) -> bool {
        if members.len() <= 1 {
            return true;
        }
        match zeta.as_root() {
            Some(r) => self.is_zeta_family_root(r, members),
            None => false,
        }
    }

    /// All ζ-families of length `n` in lexicographic order of coordinate tuples.
    pub fn enumerate_zeta_families(&self, n: usize, zeta: Root) -> Result<Vec<ZetaFamily>> {
        let elements = self.group.elements()?;
        let target = zeta * zeta;
        let mut out = Vec::new();
        let mut stack: Vec<usize> = Vec::with_capacity(n);
        self.extend_families(&elements, n, target, &mut stack, &mut |idx| {
            out.push(ZetaFamily {
                zeta,
                members: idx.iter().map(|&i| elements[i].clone()).collect(),
            })
        });
        Ok(out)
    }

    fn extend_families(
        &self,
        elements: &[GroupElement],
        n: usize,
        target: Root,
        stack: &mut Vec<usize>,
        emit: &mut dyn FnMut(&[usize]),
    ) {
        if stack.len() == n {
            emit(stack);
            return;
        }
        for (i, g) in elements.iter().enumerate() {
            if stack.iter().all(|&j| self.symmetric_product(&elements[j], g) == target) {
                stack.push(i);
                self.extend_families(elements, n, target, stack, emit);
                stack.pop();
            }
        }
    }

    /// Every ζ admitting at least one family of length `n >= 2`, with the
    /// number of families, sorted by the angle of ζ.
    pub fn list_zeta_values(&self, n: usize) -> Result<Vec<(Root, usize)>> {
        let elements = self.group.elements()?;
        if n < 2 {
            return Ok(Vec::new());
        }
        let mut squares = std::collections::BTreeSet::new();
        for g in &elements {
            for h in &elements {
                squares.insert(self.symmetric_product(g, h));
            }
        }
        let two_l = self.ambient_level();
        let mut counts = BTreeMap::new();
        for v in squares {
            let e = v.exponent_at(two_l).expect("χ-products live at level L");
            // ζ = ζ_{2L}^k with 2k ≡ e (mod 2L)
            for k in [e / 2, e / 2 + self.level] {
                let zeta = Root::new(two_l, k as i64);
                if counts.contains_key(&zeta) {
                    continue;
                }
                let count = self.enumerate_zeta_families(n, zeta)?.len();
                counts.insert(zeta, count);
            }
        }
        Ok(counts.into_iter().filter(|&(_, c)| c > 0).collect())
    }
}

/// A tuple `(g_1, …, g_n)` with `χ(g_i,g_j)χ(g_j,g_i) = ζ²` for `i ≠ j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZetaFamily {
    zeta: Root,
    members: Vec<GroupElement>,
}

impl ZetaFamily {
    pub fn new(chi: &Bicharacter, zeta: Root, members: Vec<GroupElement>) -> Result<Self> {
        for g in &members {
            if !chi.group().contains(g) {
                return Err(Error::ShapeMismatch(format!("{g} is not an element of {}", chi.group())));
            }
        }
        if !chi.is_zeta_family_root(zeta, &members) {
            return Err(Error::NotAZetaFamily {
                zeta: zeta.to_string(),
                family: format_family(&members),
            });
        }
        Ok(ZetaFamily { zeta, members })
    }

    pub fn from_scalar(chi: &Bicharacter, zeta: &CycScalar, members: Vec<GroupElement>) -> Result<Self> {
        Self::new(chi, Bicharacter::zeta_root(zeta)?, members)
    }

    pub fn zeta(&self) -> Root {
        self.zeta
    }

    pub fn zeta_scalar(&self) -> CycScalar {
        self.zeta.to_scalar()
    }

    pub fn members(&self) -> &[GroupElement] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `σ(g) = (g_{σ(1)}, …, g_{σ(n)})`, again a ζ-family.
    pub fn permuted(&self, sigma: &Permutation) -> ZetaFamily {
        ZetaFamily { zeta: self.zeta, members: sigma.permute(&self.members) }
    }

    /// The same tuple as a `(-ζ)`-family.
    pub fn negated(&self) -> ZetaFamily {
        ZetaFamily { zeta: -self.zeta, members: self.members.clone() }
    }
}

impl fmt::Display for ZetaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_family(&self.members))
    }
}

pub fn format_family(members: &[GroupElement]) -> String {
    let parts: Vec<String> = members.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

/// `ρ(σ, g) = ∏_{i<j, σ(i)>σ(j)} ζ^{-1} χ(g_{σ(j)}, g_{σ(i)})` as a root of unity.
pub fn rho(chi: &Bicharacter, sigma: &Permutation, family: &ZetaFamily) -> Result<Root> {
    if sigma.len() != family.len() {
        return Err(Error::LengthMismatch { expected: family.len(), found: sigma.len() });
    }
    Ok(rho_unchecked(chi, sigma, family.zeta, &family.members))
}

pub(crate) fn rho_unchecked(
    chi: &Bicharacter,
    sigma: &Permutation,
    zeta: Root,
    members: &[GroupElement],
) -> Root {
    let zeta_inv = zeta.inv();
    sigma.inversions().fold(Root::one(), |acc, (i, j)| {
        acc * zeta_inv * chi.eval_root(&members[sigma.apply(j)], &members[sigma.apply(i)])
    })
}

pub fn rho_scalar(chi: &Bicharacter, sigma: &Permutation, family: &ZetaFamily) -> Result<CycScalar> {
    rho(chi, sigma, family).map(Root::to_scalar)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c3() -> Bicharacter {
        Bicharacter::new(AbelianGroup::cyclic(3), 3, vec![vec![1]]).unwrap()
    }

    fn super_c2() -> Bicharacter {
        Bicharacter::new(AbelianGroup::cyclic(2), 2, vec![vec![1]]).unwrap()
    }

    fn example6() -> Bicharacter {
        let g = AbelianGroup::new(vec![3, 3], 0).unwrap();
        Bicharacter::new(g, 3, vec![vec![1, 2], vec![0, 1]]).unwrap()
    }

    fn el(chi: &Bicharacter, c: &[i64]) -> GroupElement {
        chi.group().element(c.to_vec()).unwrap()
    }

    #[test]
    fn bicharacter_validation() {
        assert!(Bicharacter::new(AbelianGroup::cyclic(2), 2, vec![vec![1]]).is_ok());
        assert!(Bicharacter::new(AbelianGroup::cyclic(3), 3, vec![vec![1]]).is_ok());
        assert!(matches!(
            Bicharacter::new(AbelianGroup::cyclic(2), 3, vec![vec![1]]),
            Err(Error::IllDefinedBicharacter { i: 0, j: 0, .. })
        ));
        assert!(matches!(
            Bicharacter::new(AbelianGroup::cyclic(2), 2, vec![vec![1, 0]]),
            Err(Error::ShapeMismatch(_))
        ));
        // free generators carry no congruence
        let z = AbelianGroup::new(vec![], 1).unwrap();
        assert!(Bicharacter::new(z, 5, vec![vec![1]]).is_ok());
    }

    #[test]
    fn super_values() {
        let chi = super_c2();
        assert_eq!(chi.eval(&el(&chi, &[1]), &el(&chi, &[1])), CycScalar::from_int(-1));
        assert!(chi.eval(&el(&chi, &[0]), &el(&chi, &[1])).is_one());
    }

    #[test]
    fn evaluation_examples() {
        let chi = c3();
        assert!(chi.eval(&chi.group().zero(), &el(&chi, &[2])).is_one());
        assert_eq!(chi.eval(&el(&chi, &[1]), &el(&chi, &[2])), CycScalar::root_of_unity(3, 2));
        let chi = example6();
        let (g1, g2) = (el(&chi, &[1, 0]), el(&chi, &[0, 1]));
        assert!(chi.eval(&g2, &g1).is_one());
        assert_eq!(chi.eval(&g1, &g2), CycScalar::root_of_unity(3, 2));
        assert_eq!(chi.eval(&g1, &g1), CycScalar::root_of_unity(3, 1));
        assert_eq!(chi.eval(&g2, &g2), CycScalar::root_of_unity(3, 1));
    }

    #[test]
    fn bilinear() {
        let chi = example6();
        let elems = chi.group().elements().unwrap();
        for a in &elems {
            for b in &elems {
                for h in &elems {
                    let ab = chi.group().add(a, b);
                    assert_eq!(chi.eval_root(&ab, h), chi.eval_root(a, h) * chi.eval_root(b, h));
                    assert_eq!(chi.eval_root(h, &ab), chi.eval_root(h, a) * chi.eval_root(h, b));
                }
            }
        }
    }

    #[test]
    fn family_predicates() {
        let chi = c3();
        let zero = chi.group().zero();
        let g = el(&chi, &[1]);
        for z in [CycScalar::one(), CycScalar::from_int(-1)] {
            assert!(chi.is_zeta_family(&z, &[zero.clone(), g.clone()]));
            assert!(chi.is_zeta_family(&z, &[g.clone(), zero.clone()]));
        }
        let norm = chi.norm(&g).to_scalar();
        assert!(chi.is_zeta_family(&norm, &[g.clone(), g.clone(), g.clone()]));
        let zsq = CycScalar::root_of_unity(3, 2);
        assert!(!chi.is_zeta_family(&zsq, &[g.clone(), g.clone()]));
        assert!(chi.is_zeta_family(&CycScalar::from_int(7), std::slice::from_ref(&g)));
        assert!(!chi.is_zeta_family(&CycScalar::from_int(7), &[g.clone(), g]));
    }

    #[test]
    fn enumeration_examples() {
        let chi = c3();
        let fams = chi.enumerate_zeta_families(3, Root::new(3, 1)).unwrap();
        let tuples: Vec<String> = fams.iter().map(ToString::to_string).collect();
        assert_eq!(tuples, vec!["(1,1,1)", "(2,2,2)"]);
        assert!(chi.enumerate_zeta_families(3, Root::new(3, 2)).unwrap().is_empty());

        let pairs = chi.enumerate_zeta_families(2, Root::one()).unwrap();
        assert_eq!(pairs[0].to_string(), "(0,0)");

        let chi = super_c2();
        let fams = chi.enumerate_zeta_families(2, Root::minus_one()).unwrap();
        let tuples: Vec<String> = fams.iter().map(ToString::to_string).collect();
        assert_eq!(tuples, vec!["(0,0)", "(0,1)", "(1,0)", "(1,1)"]);

        let z = AbelianGroup::new(vec![], 1).unwrap();
        let chi = Bicharacter::trivial(z);
        assert_eq!(chi.enumerate_zeta_families(2, Root::one()), Err(Error::InfiniteGroup(1)));
    }

    #[test]
    fn zeta_value_listing() {
        let chi = Bicharacter::trivial(AbelianGroup::trivial());
        assert_eq!(chi.list_zeta_values(2).unwrap(), vec![(Root::one(), 1), (Root::minus_one(), 1)]);

        let chi = c3();
        let values = chi.list_zeta_values(3).unwrap();
        let count = |r: Root| values.iter().find(|(z, _)| *z == r).map(|(_, c)| *c);
        assert_eq!(count(Root::new(3, 1)), Some(2));
        assert_eq!(count(-Root::new(3, 1)), Some(2));

        let chi = super_c2();
        // brute force over all four pairs: every pair has χχ = 1
        let values = chi.list_zeta_values(2).unwrap();
        assert!(values.contains(&(Root::minus_one(), 4)));
        assert!(values.contains(&(Root::one(), 4)));
    }

    #[test]
    fn rho_examples() {
        let chi = c3();
        let g = el(&chi, &[1]);
        let fam = ZetaFamily::new(&chi, chi.norm(&g), vec![g.clone(); 3]).unwrap();
        for s in Permutation::all(3) {
            assert!(rho(&chi, &s, &fam).unwrap().is_one());
        }
        assert_eq!(
            rho(&chi, &Permutation::identity(2), &fam),
            Err(Error::LengthMismatch { expected: 3, found: 2 })
        );

        let chi = super_c2();
        let odd = el(&chi, &[1]);
        let fam = ZetaFamily::new(&chi, Root::minus_one(), vec![odd.clone(), odd]).unwrap();
        let swap = Permutation::from_one_line(&[2, 1]).unwrap();
        assert!(rho(&chi, &swap, &fam).unwrap().is_one());

        // |g| = 1 with ζ = -1 gives the sign character
        let even = chi.group().zero();
        let fam = ZetaFamily::new(&chi, Root::minus_one(), vec![even; 4]).unwrap();
        for s in Permutation::all(4) {
            let expected = if s.sign() == 1 { Root::one() } else { Root::minus_one() };
            assert_eq!(rho(&chi, &s, &fam).unwrap(), expected);
        }
    }

    #[test]
    fn example6_families() {
        let chi = example6();
        let (g1, g2) = (el(&chi, &[1, 0]), el(&chi, &[0, 1]));
        let zeta = Root::new(3, 1);
        assert!(chi.is_zeta_family_root(zeta, &[g1.clone(), g1.clone(), g2.clone()]));
        assert!(chi.is_zeta_family_root(zeta, &[g1, g2.clone(), g2]));
    }
}
