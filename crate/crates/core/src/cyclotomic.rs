//! Exact arithmetic in cyclotomic fields Q(ζ_M).
//!
//! A [`CycScalar`] stores its level `M` together with the rational coordinates
//! of its residue modulo the cyclotomic polynomial `Φ_M` in the power basis
//! `1, z, …, z^{φ(M)-1}`. Scalars at different levels combine after embedding
//! both into the lcm level, so every scalar lives in one big field
//! `Q(ζ_∞)` and comparisons never depend on the chosen representative.
//!
//! Roots of unity get their own lightweight type, [`Root`], which does all
//! bookkeeping with exponents; bicharacter values and ρ-coefficients are
//! computed there and only turned into field elements at the end.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Euler's totient.
pub fn euler_phi(n: u32) -> u32 {
    let mut n = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

pub(crate) fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

fn lcm(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

/// The `n`-th cyclotomic polynomial, coefficients from the constant term up.
pub fn cyclotomic_polynomial(n: u32) -> Vec<BigInt> {
    assert!(n >= 1, "cyclotomic polynomial index must be positive");
    let mut memo = HashMap::new();
    cyclotomic_memo(n, &mut memo)
}

fn cyclotomic_memo(n: u32, memo: &mut HashMap<u32, Vec<BigInt>>) -> Vec<BigInt> {
    if let Some(p) = memo.get(&n) {
        return p.clone();
    }
    // x^n - 1
    let mut p = vec![BigInt::zero(); n as usize + 1];
    p[0] = BigInt::from(-1);
    p[n as usize] = BigInt::one();
    for d in divisors(n).into_iter().filter(|&d| d < n) {
        let q = cyclotomic_memo(d, memo);
        p = exact_div_monic(&p, &q);
    }
    memo.insert(n, p.clone());
    p
}

/// Exact quotient of `num` by the monic polynomial `den` (panics on a remainder).
fn exact_div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qlen = rem.len() - dd;
    let mut quot = vec![BigInt::zero(); qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        quot[i] = c;
    }
    assert!(rem.iter().all(Zero::is_zero), "non-exact cyclotomic division");
    quot
}

/// Per-level tables: `Φ_M` and the reductions of `z^e` for `0 <= e < M`.
struct LevelData {
    phi: usize,
    reductions: Vec<Vec<i64>>,
}

fn level_data(level: u32) -> Arc<LevelData> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<LevelData>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(data) = cache.read().expect("level cache poisoned").get(&level) {
        return data.clone();
    }
    let data = Arc::new(build_level_data(level));
    cache
        .write()
        .expect("level cache poisoned")
        .entry(level)
        .or_insert(data)
        .clone()
}

fn build_level_data(level: u32) -> LevelData {
    let cyclo: Vec<i128> = cyclotomic_polynomial(level)
        .iter()
        .map(|c| c.to_i128().expect("cyclotomic coefficient overflow"))
        .collect();
    let phi = cyclo.len() - 1;
    let mut reductions = Vec::with_capacity(level as usize);
    let mut current = vec![0i128; phi];
    current[0] = 1;
    for _ in 0..level {
        reductions.push(
            current
                .iter()
                .map(|&c| i64::try_from(c).expect("cyclotomic reduction overflow"))
                .collect(),
        );
        // multiply by z and reduce the overflowing z^phi term
        let top = current[phi - 1];
        for k in (1..phi).rev() {
            current[k] = current[k - 1];
        }
        current[0] = 0;
        if top != 0 {
            for k in 0..phi {
                current[k] -= top * cyclo[k];
            }
        }
    }
    LevelData { phi, reductions }
}

/// A root of unity `exp(2πi·exp/order)`, kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Root {
    order: u32,
    exp: u32,
}

impl Root {
    /// `ζ_level^k`.
    pub fn new(level: u32, k: i64) -> Root {
        assert!(level >= 1, "root level must be positive");
        let exp = k.rem_euclid(level as i64) as u32;
        let g = exp.gcd(&level);
        Root { order: level / g, exp: exp / g }
    }

    pub fn one() -> Root {
        Root { order: 1, exp: 0 }
    }

    pub fn minus_one() -> Root {
        Root { order: 2, exp: 1 }
    }

    /// Multiplicative order.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Exponent `k` with `self = ζ_level^k`, if `level` is a multiple of the order.
    pub fn exponent_at(&self, level: u32) -> Option<u32> {
        level.is_multiple_of(self.order).then(|| self.exp * (level / self.order))
    }

    pub fn is_one(&self) -> bool {
        self.order == 1
    }

    pub fn is_primitive(&self, n: u32) -> bool {
        self.order == n
    }

    pub fn inv(self) -> Root {
        Root::new(self.order, -(self.exp as i64))
    }

    pub fn pow(self, k: i64) -> Root {
        Root::new(self.order, (self.exp as i64) * k)
    }

    pub fn to_scalar(self) -> CycScalar {
        CycScalar::root_of_unity(self.order, self.exp as i64)
    }

    /// The scalar at a fixed level; `level` must be a multiple of the order.
    pub fn to_scalar_at(self, level: u32) -> CycScalar {
        let k = self
            .exponent_at(level)
            .expect("root does not live at the requested level");
        CycScalar::root_of_unity(level, k as i64)
    }

    fn angle_cmp(&self, other: &Root) -> Ordering {
        (self.exp as u64 * other.order as u64).cmp(&(other.exp as u64 * self.order as u64))
    }
}

impl Mul for Root {
    type Output = Root;
    fn mul(self, rhs: Root) -> Root {
        let l = lcm(self.order, rhs.order);
        let e = self.exp * (l / self.order) + rhs.exp * (l / rhs.order);
        Root::new(l, e as i64)
    }
}

impl Neg for Root {
    type Output = Root;
    fn neg(self) -> Root {
        self * Root::minus_one()
    }
}

impl PartialOrd for Root {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Roots are ordered by their angle in `[0, 2π)`.
impl Ord for Root {
    fn cmp(&self, other: &Self) -> Ordering {
        self.angle_cmp(other)
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_scalar())
    }
}

/// An exact element of the cyclotomic field `Q(ζ_level)`.
#[derive(Clone, Debug)]
pub struct CycScalar {
    level: u32,
    coeffs: Vec<BigRational>,
}

/// The four field operations, for callers that dispatch on an operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Apply a field operation after embedding both operands into the lcm level.
pub fn field_op(a: &CycScalar, b: &CycScalar, op: FieldOp) -> Result<CycScalar> {
    match op {
        FieldOp::Add => Ok(a + b),
        FieldOp::Sub => Ok(a - b),
        FieldOp::Mul => Ok(a * b),
        FieldOp::Div => a.checked_div(b),
    }
}

impl CycScalar {
    pub fn zero() -> Self {
        CycScalar { level: 1, coeffs: vec![BigRational::zero()] }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(q: BigRational) -> Self {
        CycScalar { level: 1, coeffs: vec![q] }
    }

    /// Build from coordinates in the power basis at `level`; the list may be
    /// longer than `φ(level)` and is reduced modulo `Φ_level`.
    pub fn from_coeffs(level: u32, coeffs: Vec<BigRational>) -> Self {
        assert!(level >= 1, "level must be positive");
        let data = level_data(level);
        let mut acc = vec![BigRational::zero(); level as usize];
        for (k, c) in coeffs.into_iter().enumerate() {
            acc[k % level as usize] += c;
        }
        CycScalar { level, coeffs: reduce(&data, acc) }
    }

    /// `ζ_level^k`.
    pub fn root_of_unity(level: u32, k: i64) -> Self {
        assert!(level >= 1, "level must be positive");
        let data = level_data(level);
        let e = k.rem_euclid(level as i64) as usize;
        let coeffs = data.reductions[e]
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)))
            .collect();
        CycScalar { level, coeffs }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational value, when the scalar lies in `Q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.coeffs[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| &self.coeffs[0])
    }

    /// Embed into `Q(ζ_level)`; `level` must be a multiple of the current level.
    pub fn at_level(&self, level: u32) -> CycScalar {
        assert!(
            level.is_multiple_of(self.level),
            "cannot embed level {} into level {}",
            self.level,
            level
        );
        if level == self.level {
            return self.clone();
        }
        let data = level_data(level);
        let step = (level / self.level) as usize;
        let mut acc = vec![BigRational::zero(); level as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc[(k * step) % level as usize] += c;
            }
        }
        CycScalar { level, coeffs: reduce(&data, acc) }
    }

    fn aligned<'a>(
        a: &'a CycScalar,
        b: &'a CycScalar,
    ) -> (std::borrow::Cow<'a, CycScalar>, std::borrow::Cow<'a, CycScalar>) {
        use std::borrow::Cow;
        if a.level == b.level {
            return (Cow::Borrowed(a), Cow::Borrowed(b));
        }
        let l = lcm(a.level, b.level);
        let a = if a.level == l { Cow::Borrowed(a) } else { Cow::Owned(a.at_level(l)) };
        let b = if b.level == l { Cow::Borrowed(b) } else { Cow::Owned(b.at_level(l)) };
        (a, b)
    }

    pub fn scale(&self, q: &BigRational) -> CycScalar {
        CycScalar {
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    /// Multiply by a root of unity.
    pub fn mul_root(&self, r: Root) -> CycScalar {
        if r.is_one() {
            return self.clone();
        }
        let level = lcm(self.level, r.order);
        let base = self.at_level(level);
        let shift = r.exponent_at(level).expect("lcm level contains the root") as usize;
        let data = level_data(level);
        let mut acc = vec![BigRational::zero(); level as usize];
        for (k, c) in base.coeffs.into_iter().enumerate() {
            if !c.is_zero() {
                acc[(k + shift) % level as usize] = c;
            }
        }
        CycScalar { level, coeffs: reduce(&data, acc) }
    }

    pub fn checked_div(&self, other: &CycScalar) -> Result<CycScalar> {
        Ok(self * &other.inv()?)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against `Φ_level`.
    pub fn inv(&self) -> Result<CycScalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(q) = self.as_rational() {
            let inv = q.recip();
            return Ok(CycScalar::from_rational(inv).at_level(self.level));
        }
        let modulus: Vec<BigRational> = cyclotomic_polynomial(self.level)
            .into_iter()
            .map(BigRational::from_integer)
            .collect();
        let inv = poly_inverse_mod(&self.coeffs, &modulus).ok_or(Error::DivisionByZero)?;
        Ok(CycScalar::from_coeffs(self.level, inv))
    }

    pub fn pow(&self, k: i64) -> Result<CycScalar> {
        let mut base = if k < 0 { self.inv()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = CycScalar::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }

    /// The scalar as a root of unity, if it is one.
    pub fn as_root(&self) -> Option<Root> {
        if self.is_zero() {
            return None;
        }
        if self.coeffs.iter().any(|c| !c.is_integer()) {
            return None;
        }
        let data = level_data(self.level);
        let ints: Vec<i64> = self
            .coeffs
            .iter()
            .map(|c| c.to_integer().to_i64())
            .collect::<Option<_>>()?;
        for (k, red) in data.reductions.iter().enumerate() {
            if *red == ints {
                return Some(Root::new(self.level, k as i64));
            }
            if red.iter().zip(&ints).all(|(a, b)| *a == -*b) {
                return Some(Root::new(2 * self.level, 2 * k as i64 + self.level as i64));
            }
        }
        None
    }

    /// Least `n >= 1` with `self^n = 1`, or `None` when the scalar is not a root of unity.
    pub fn multiplicative_order(&self) -> Option<u32> {
        self.as_root().map(|r| r.order())
    }

    pub fn is_primitive_nth_root(&self, n: u32) -> bool {
        self.multiplicative_order() == Some(n)
    }

    /// Representation at the smallest level whose field contains the scalar.
    pub fn reduced(&self) -> CycScalar {
        if self.as_rational().is_some() {
            return CycScalar::from_rational(self.coeffs[0].clone());
        }
        for m in divisors(self.level) {
            if m == self.level {
                break;
            }
            if let Some(c) = self.restrict_to(m) {
                return c;
            }
        }
        self.clone()
    }

    /// Solve for coordinates at level `m | self.level`, if the scalar lies there.
    fn restrict_to(&self, m: u32) -> Option<CycScalar> {
        let sub_phi = euler_phi(m) as usize;
        let phi = self.coeffs.len();
        // columns: embeddings of z_m^k
        let mut rows: Vec<Vec<BigRational>> = vec![Vec::with_capacity(sub_phi + 1); phi];
        for k in 0..sub_phi {
            let col = CycScalar::root_of_unity(m, k as i64).at_level(self.level);
            for (r, c) in col.coeffs.into_iter().enumerate() {
                rows[r].push(c);
            }
        }
        for (r, c) in self.coeffs.iter().enumerate() {
            rows[r].push(c.clone());
        }
        let sol = solve_dense(rows, sub_phi)?;
        Some(CycScalar { level: m, coeffs: sol })
    }
}

fn reduce(data: &LevelData, acc: Vec<BigRational>) -> Vec<BigRational> {
    let phi = data.phi;
    let mut out: Vec<BigRational> = Vec::with_capacity(phi);
    let mut iter = acc.into_iter();
    out.extend(iter.by_ref().take(phi));
    for (e, c) in iter.enumerate() {
        if c.is_zero() {
            continue;
        }
        let red = &data.reductions[e + phi];
        for (k, &r) in red.iter().enumerate() {
            match r {
                0 => {}
                1 => out[k] += &c,
                -1 => out[k] -= &c,
                r => out[k] += &c * BigInt::from(r),
            }
        }
    }
    out
}

/// Solve an augmented dense system with `n` unknowns; `None` if inconsistent.
fn solve_dense(mut rows: Vec<Vec<BigRational>>, n: usize) -> Option<Vec<BigRational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in c..=n {
                    let sub = &f * &rows[r][j];
                    rows[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    let mut sol = vec![BigRational::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        sol[c] = rows[i][n].clone();
    }
    Some(sol)
}

fn trim(p: &mut Vec<BigRational>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut rem = a.to_vec();
    trim(&mut rem);
    let mut b = b.to_vec();
    trim(&mut b);
    let db = b.len() - 1;
    let lead_inv = b[db].recip();
    if rem.len() < b.len() {
        return (vec![BigRational::zero()], rem);
    }
    let mut quot = vec![BigRational::zero(); rem.len() - db];
    for i in (0..quot.len()).rev() {
        let c = &rem[i + db] * &lead_inv;
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            let sub = &c * bj;
            rem[i + j] -= sub;
        }
        quot[i] = c;
    }
    rem.truncate(db.max(1));
    trim(&mut rem);
    (quot, rem)
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(&mut out);
    out
}

fn poly_inverse_mod(a: &[BigRational], modulus: &[BigRational]) -> Option<Vec<BigRational>> {
    let mut r0 = modulus.to_vec();
    let mut r1 = a.to_vec();
    trim(&mut r1);
    let mut s0 = vec![BigRational::zero()];
    let mut s1 = vec![BigRational::one()];
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = poly_divmod(&r0, &r1);
        let s = poly_sub(&s0, &poly_mul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    if r0.len() != 1 {
        return None;
    }
    let c = r0[0].recip();
    Some(s0.into_iter().map(|x| x * &c).collect())
}

impl PartialEq for CycScalar {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = CycScalar::aligned(self, other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CycScalar {}

impl<'a> Add<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn add(self, rhs: &CycScalar) -> CycScalar {
        let (a, b) = CycScalar::aligned(self, rhs);
        CycScalar {
            level: a.level,
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
        }
    }
}

impl<'a> Sub<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn sub(self, rhs: &CycScalar) -> CycScalar {
        let (a, b) = CycScalar::aligned(self, rhs);
        CycScalar {
            level: a.level,
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
        }
    }
}

impl<'a> Mul<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn mul(self, rhs: &CycScalar) -> CycScalar {
        if let Some(q) = rhs.as_rational() {
            return self.scale(q);
        }
        if let Some(q) = self.as_rational() {
            return rhs.scale(q);
        }
        let (a, b) = CycScalar::aligned(self, rhs);
        let level = a.level;
        let data = level_data(level);
        let mut acc = vec![BigRational::zero(); level as usize];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                acc[(i + j) % level as usize] += x * y;
            }
        }
        CycScalar { level, coeffs: reduce(&data, acc) }
    }
}

impl Neg for &CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        CycScalar { level: self.level, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $m(self, rhs: CycScalar) -> CycScalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $m(self, rhs: &CycScalar) -> CycScalar {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for CycScalar {
    type Output = CycScalar;
    fn neg(mut self) -> CycScalar {
        for c in self.coeffs.iter_mut() {
            *c = -std::mem::take(c);
        }
        self
    }
}

impl AddAssign<&CycScalar> for CycScalar {
    fn add_assign(&mut self, rhs: &CycScalar) {
        if self.level == rhs.level {
            for (x, y) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                *x += y;
            }
        } else {
            *self = &*self + rhs;
        }
    }
}

impl SubAssign<&CycScalar> for CycScalar {
    fn sub_assign(&mut self, rhs: &CycScalar) {
        if self.level == rhs.level {
            for (x, y) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                *x -= y;
            }
        } else {
            *self = &*self - rhs;
        }
    }
}

impl From<i64> for CycScalar {
    fn from(n: i64) -> Self {
        CycScalar::from_int(n)
    }
}

impl From<Root> for CycScalar {
    fn from(r: Root) -> Self {
        r.to_scalar()
    }
}

/// Canonical text: `c0 + c1*z^1 - … @ M` at the minimal level.
impl fmt::Display for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let red = self.reduced();
        let mut first = true;
        for (k, c) in red.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let body = |abs: &BigRational| {
                if k == 0 {
                    format!("{abs}")
                } else {
                    format!("{abs}*z^{k}")
                }
            };
            if first {
                if c.is_negative() {
                    write!(f, "-{}", body(&c.abs()))?;
                } else {
                    write!(f, "{}", body(c))?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - {}", body(&c.abs()))?;
            } else {
                write!(f, " + {}", body(c))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " @ {}", red.level)
    }
}

impl FromStr for CycScalar {
    type Err = Error;

    /// Accepts the canonical text, and also the shorthands `-1`, `3/2`,
    /// `z^1@3`, `-z^2 @ 6` and parenthesized forms.
    fn from_str(s: &str) -> Result<Self> {
        let mut text = s.trim();
        if text.starts_with('(') && text.ends_with(')') {
            text = text[1..text.len() - 1].trim();
        }
        let (body, level) = match text.rfind('@') {
            Some(at) => {
                let lvl: u32 = text[at + 1..]
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(at + 2, "expected a level after `@`"))?;
                if lvl == 0 {
                    return Err(Error::parse(at + 2, "level must be positive"));
                }
                (&text[..at], Some(lvl))
            }
            None => (text, None),
        };
        let mut body = body.trim();
        if body.starts_with('(') && body.ends_with(')') {
            body = body[1..body.len() - 1].trim();
        }
        let mut powers: Vec<(i64, BigRational)> = Vec::new();
        let bytes = body.as_bytes();
        let mut pos = 0;
        let mut sign = BigRational::one();
        let mut expect_term = true;
        while pos < bytes.len() {
            let ch = bytes[pos] as char;
            if ch.is_whitespace() {
                pos += 1;
                continue;
            }
            if ch == '+' || ch == '-' {
                if ch == '-' {
                    sign = -sign;
                }
                expect_term = true;
                pos += 1;
                continue;
            }
            if !expect_term {
                return Err(Error::parse(pos + 1, "expected `+` or `-` between terms"));
            }
            // term: [rational [*]] [z^k]
            let start = pos;
            while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'/') {
                pos += 1;
            }
            let coef = if pos > start {
                parse_rational(&body[start..pos]).ok_or_else(|| Error::parse(start + 1, "bad rational"))?
            } else {
                BigRational::one()
            };
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let mut power = 0i64;
            let had_coef = pos > start;
            if pos < bytes.len() && bytes[pos] == b'*' {
                pos += 1;
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
            }
            if pos < bytes.len() && bytes[pos] == b'z' {
                pos += 1;
                power = 1;
                if pos < bytes.len() && bytes[pos] == b'^' {
                    pos += 1;
                    let es = pos;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    power = body[es..pos]
                        .parse()
                        .map_err(|_| Error::parse(es + 1, "bad exponent"))?;
                }
            } else if !had_coef {
                return Err(Error::parse(pos + 1, "expected a rational or `z^k`"));
            }
            powers.push((power, coef * &sign));
            sign = BigRational::one();
            expect_term = false;
        }
        if expect_term && !powers.is_empty() {
            return Err(Error::parse(bytes.len() + 1, "dangling operator"));
        }
        if powers.is_empty() {
            return Err(Error::parse(1, "empty scalar"));
        }
        let uses_z = powers.iter().any(|(k, _)| *k > 0);
        let level = match level {
            Some(l) => l,
            None if uses_z => return Err(Error::parse(1, "`z` requires an explicit `@ level`")),
            None => 1,
        };
        let mut coeffs = vec![BigRational::zero(); level as usize];
        for (k, c) in powers {
            coeffs[(k as usize) % level as usize] += c;
        }
        Ok(CycScalar::from_coeffs(level, coeffs))
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().ok()?;
            let d: BigInt = d.parse().ok()?;
            (!d.is_zero()).then(|| BigRational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), ints(&[-1, 1]));
        assert_eq!(cyclotomic_polynomial(2), ints(&[1, 1]));
        assert_eq!(cyclotomic_polynomial(6), ints(&[1, -1, 1]));
    }

    #[test]
    fn phi_6_by_root_counting() {
        // Φ_6 vanishes exactly at the primitive 6th roots, counted by brute force on exponents.
        let primitive: Vec<u32> = (0..6u32).filter(|k| k.gcd(&6) == 1).collect();
        assert_eq!(primitive.len(), cyclotomic_polynomial(6).len() - 1);
        for k in 0..6 {
            let z = CycScalar::root_of_unity(6, k);
            let val = &(&(&z * &z) - &z) + &CycScalar::one();
            assert_eq!(val.is_zero(), primitive.contains(&(k as u32)), "k = {k}");
        }
    }

    #[test]
    fn product_of_cyclotomics_is_x_n_minus_one() {
        for n in 1..=64u32 {
            let mut prod = ints(&[1]);
            for d in divisors(n) {
                prod = int_poly_mul(&prod, &cyclotomic_polynomial(d));
            }
            let mut expected = vec![BigInt::zero(); n as usize + 1];
            expected[0] = BigInt::from(-1);
            expected[n as usize] = BigInt::one();
            assert_eq!(prod, expected, "n = {n}");
        }
    }

    #[test]
    fn roots_of_unity() {
        let i = CycScalar::root_of_unity(4, 1);
        assert_eq!(&i * &i, CycScalar::from_int(-1));
        assert_eq!(CycScalar::root_of_unity(6, 3), CycScalar::from_int(-1));
        let z = CycScalar::root_of_unity(3, 1);
        let s = &(&CycScalar::one() + &z) + &(&z * &z);
        assert!(s.is_zero());
        assert!(CycScalar::root_of_unity(7, 0).is_one());
    }

    #[test]
    fn field_ops() {
        let a = CycScalar::root_of_unity(5, 2);
        assert_eq!(field_op(&a, &CycScalar::zero(), FieldOp::Add).unwrap(), a);
        let z3 = CycScalar::root_of_unity(3, 1);
        let z3sq = CycScalar::root_of_unity(3, 2);
        assert!(field_op(&z3, &z3sq, FieldOp::Mul).unwrap().is_one());
        let b = &CycScalar::one() + &CycScalar::root_of_unity(5, 1);
        let q = field_op(&b, &b, FieldOp::Div).unwrap();
        assert!(q.is_one());
        assert!((&b * &b.inv().unwrap()).is_one());
        assert_eq!(
            field_op(&b, &CycScalar::zero(), FieldOp::Div),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn orders() {
        assert_eq!(CycScalar::one().multiplicative_order(), Some(1));
        assert_eq!(CycScalar::root_of_unity(6, 2).multiplicative_order(), Some(3));
        let minus_z3 = -CycScalar::root_of_unity(3, 1);
        assert_eq!(minus_z3.multiplicative_order(), Some(6));
        assert_eq!(minus_z3, CycScalar::root_of_unity(6, 5));
        assert_eq!(CycScalar::from_int(2).multiplicative_order(), None);
        let not_root = &CycScalar::one() + &CycScalar::root_of_unity(5, 1);
        assert_eq!(not_root.multiplicative_order(), None);
    }

    #[test]
    fn primitive_roots() {
        assert!(CycScalar::one().is_primitive_nth_root(1));
        assert!(!CycScalar::root_of_unity(4, 2).is_primitive_nth_root(4));
        assert!(CycScalar::root_of_unity(12, 5).is_primitive_nth_root(12));
    }

    #[test]
    fn order_law() {
        for m in 1..=36u32 {
            for k in 0..m {
                let u = CycScalar::root_of_unity(m, k as i64);
                assert_eq!(u.multiplicative_order(), Some(m / m.gcd(&k)), "m={m} k={k}");
            }
        }
    }

    #[test]
    fn display_uses_minimal_level() {
        let r = -CycScalar::root_of_unity(3, 1);
        assert_eq!(r.at_level(6).to_string(), "-1*z^1 @ 3");
        assert_eq!(CycScalar::root_of_unity(6, 3).to_string(), "-1 @ 1");
        assert_eq!(CycScalar::zero().to_string(), "0 @ 1");
        let s = &CycScalar::one() - &CycScalar::root_of_unity(3, 1);
        assert_eq!(s.to_string(), "1 - 1*z^1 @ 3");
    }

    #[test]
    fn parse_shorthands() {
        assert_eq!("-1".parse::<CycScalar>().unwrap(), CycScalar::from_int(-1));
        assert_eq!("z^1@3".parse::<CycScalar>().unwrap(), CycScalar::root_of_unity(3, 1));
        assert_eq!(
            "(1 - 1*z^1 @ 3)".parse::<CycScalar>().unwrap(),
            &CycScalar::one() - &CycScalar::root_of_unity(3, 1)
        );
        assert_eq!("3/2".parse::<CycScalar>().unwrap().to_string(), "3/2 @ 1");
        assert!("z^1".parse::<CycScalar>().is_err());
        assert!("1 +".parse::<CycScalar>().is_err());
    }

    #[test]
    fn root_arithmetic_matches_scalars() {
        let a = Root::new(6, 5);
        let b = Root::new(4, 1);
        assert_eq!((a * b).to_scalar(), &a.to_scalar() * &b.to_scalar());
        assert_eq!((-Root::new(3, 1)).order(), 6);
        assert!(Root::new(5, 2).inv() * Root::new(5, 2) == Root::one());
        assert_eq!(CycScalar::root_of_unity(10, 7).as_root(), Some(Root::new(10, 7)));
    }
}
