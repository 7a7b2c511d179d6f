//! Exact SL(2,Z) arithmetic, quadratic surds, and the R/L twist-word
//! normal form of hyperbolic monodromies.
//!
//! Generator convention: `R = [[1,1],[0,1]]` is the longitude twist and
//! `L = [[1,0],[1,1]]` the meridian twist. A positive word
//! `R^l1 L^m1 ... R^lr L^mr` is recorded as the syllable list
//! `[(l1, m1), ..., (lr, mr)]`.

use std::collections::HashMap;
use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A 2x2 integer matrix of determinant one, `[[a, b], [c, d]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatSL2 {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

impl MatSL2 {
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self> {
        let m = MatSL2 {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        };
        let det = &m.a * &m.d - &m.b * &m.c;
        if !det.is_one() {
            return Err(Error::Determinant { det });
        }
        Ok(m)
    }

    // Callers guarantee ad - bc = 1.
    fn raw(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Self {
        debug_assert!((&a * &d - &b * &c).is_one());
        MatSL2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::raw(1.into(), 0.into(), 0.into(), 1.into())
    }

    /// `R^k = [[1, k], [0, 1]]`, the longitude twist to the power `k`.
    pub fn r_pow(k: impl Into<BigInt>) -> Self {
        Self::raw(1.into(), k.into(), 0.into(), 1.into())
    }

    /// `L^k = [[1, 0], [k, 1]]`, the meridian twist to the power `k`.
    pub fn l_pow(k: impl Into<BigInt>) -> Self {
        Self::raw(1.into(), 0.into(), k.into(), 1.into())
    }

    pub fn r() -> Self {
        Self::r_pow(1)
    }

    pub fn l() -> Self {
        Self::l_pow(1)
    }

    /// The quarter rotation `[[0, -1], [1, 0]]`.
    pub fn rotation() -> Self {
        Self::raw(0.into(), (-1).into(), 1.into(), 0.into())
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn entries(&self) -> [&BigInt; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &MatSL2) -> MatSL2 {
        Self::raw(
            &self.a * &other.a + &self.b * &other.c,
            &self.a * &other.b + &self.b * &other.d,
            &self.c * &other.a + &self.d * &other.c,
            &self.c * &other.b + &self.d * &other.d,
        )
    }

    pub fn inverse(&self) -> MatSL2 {
        Self::raw(self.d.clone(), -&self.b, -&self.c, self.a.clone())
    }

    pub fn negate(&self) -> MatSL2 {
        Self::raw(-&self.a, -&self.b, -&self.c, -&self.d)
    }

    pub fn pow(&self, exp: u64) -> MatSL2 {
        let mut acc = MatSL2::identity();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    /// `g * self * g^-1`.
    pub fn conjugate_by(&self, g: &MatSL2) -> MatSL2 {
        g.compose(self).compose(&g.inverse())
    }

    pub fn trace(&self) -> BigInt {
        &self.a + &self.d
    }

    /// `|trace| > 2`. Parabolic and elliptic elements are rejected.
    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > BigInt::from(2)
    }

    /// Fractional linear action on `Q ∪ {∞}`: `(p:q) ↦ (ap+bq : cp+dq)`.
    pub fn apply_to_slope(&self, s: &Slope) -> Slope {
        let p = &self.a * &s.p + &self.b * &s.q;
        let q = &self.c * &s.p + &self.d * &s.q;
        // Invertibility keeps (p, q) primitive and nonzero.
        Slope::normalized(p, q)
    }

    /// Linear action on an integer vector.
    pub fn apply_to_vector(&self, v: &(BigInt, BigInt)) -> (BigInt, BigInt) {
        (
            &self.a * &v.0 + &self.b * &v.1,
            &self.c * &v.0 + &self.d * &v.1,
        )
    }

    /// The fixed point of the fractional linear action that attracts under
    /// forward iteration, i.e. the eigendirection of the eigenvalue of
    /// modulus greater than one.
    pub fn attracting_fixed_point(&self) -> Result<QuadraticSurd> {
        if !self.is_hyperbolic() {
            return Err(Error::NonHyperbolic { trace: self.trace() });
        }
        // A hyperbolic element has c != 0: c = 0 forces ad = 1, |trace| = 2.
        let t = self.trace();
        let disc = &t * &t - 4;
        // cx + d equals the eigenvalue at the fixed point x; pick the root
        // for which it is (t ± √D)/2 with the larger modulus.
        let (p, q) = if t.is_positive() {
            (&self.a - &self.d, BigInt::from(2) * &self.c)
        } else {
            (&self.d - &self.a, BigInt::from(-2) * &self.c)
        };
        QuadraticSurd::new(p, q, disc)
    }

    pub fn to_i64(&self) -> Option<[i64; 4]> {
        Some([
            self.a.to_i64()?,
            self.b.to_i64()?,
            self.c.to_i64()?,
            self.d.to_i64()?,
        ])
    }
}

impl Mul for &MatSL2 {
    type Output = MatSL2;
    fn mul(self, rhs: &MatSL2) -> MatSL2 {
        self.compose(rhs)
    }
}

impl fmt::Display for MatSL2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Serialized as `[[a, b], [c, d]]` with integers written as decimal strings
/// when they do not fit in an `i64`.
impl Serialize for MatSL2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let cell = |x: &BigInt| match x.to_i64() {
            Some(v) => IntOrString::Int(v),
            None => IntOrString::Str(x.to_string()),
        };
        let rows = [
            [cell(&self.a), cell(&self.b)],
            [cell(&self.c), cell(&self.d)],
        ];
        rows.serialize(s)
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum IntOrString {
    Int(i64),
    Str(String),
}

/// A point of `Q ∪ {∞}` in lowest terms, `q >= 0`, with `∞ = 1/0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slope {
    p: BigInt,
    q: BigInt,
}

impl Slope {
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self> {
        let (p, q) = (p.into(), q.into());
        if p.is_zero() && q.is_zero() {
            return Err(Error::InvalidSlope { p, q });
        }
        Ok(Self::normalized(p, q))
    }

    fn normalized(p: BigInt, q: BigInt) -> Self {
        let g = p.gcd(&q);
        let (mut p, mut q) = (p / &g, q / &g);
        if q.is_negative() || (q.is_zero() && p.is_negative()) {
            p = -p;
            q = -q;
        }
        Slope { p, q }
    }

    pub fn infinity() -> Self {
        Slope {
            p: BigInt::one(),
            q: BigInt::zero(),
        }
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn is_infinity(&self) -> bool {
        self.q.is_zero()
    }

    /// The primitive vector `(p, q)` representing this slope.
    pub fn vector(&self) -> (BigInt, BigInt) {
        (self.p.clone(), self.q.clone())
    }

    /// `p*s - q*r` for `self = p/q`, `other = r/s`.
    pub fn det(&self, other: &Slope) -> BigInt {
        &self.p * &other.q - &self.q * &other.p
    }

    /// Farey adjacency: `|ps - qr| = 1`.
    pub fn is_farey_adjacent(&self, other: &Slope) -> bool {
        self.det(other).abs().is_one()
    }

    pub fn to_f64(&self) -> f64 {
        if self.q.is_zero() {
            f64::INFINITY
        } else {
            self.p.to_f64().unwrap_or(f64::NAN) / self.q.to_f64().unwrap_or(f64::NAN)
        }
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `(P + √D) / Q` with `D > 0` not a perfect square, `Q != 0` and
/// `Q | D - P²`. Stored with the largest common factor pulled out.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticSurd {
    p: BigInt,
    q: BigInt,
    d: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub preperiod: Vec<BigInt>,
    pub period: Vec<BigInt>,
}

impl QuadraticSurd {
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>, d: impl Into<BigInt>) -> Result<Self> {
        let (p, q, d) = (p.into(), q.into(), d.into());
        if !d.is_positive() {
            return Err(Error::InvalidSurd(format!("radicand {d} must be positive")));
        }
        let s = d.sqrt();
        if &s * &s == d {
            return Err(Error::InvalidSurd(format!("radicand {d} is a perfect square")));
        }
        if q.is_zero() {
            return Err(Error::InvalidSurd("denominator is zero".into()));
        }
        if !(&d - &p * &p).is_multiple_of(&q) {
            return Err(Error::InvalidSurd(format!("{q} does not divide {d} - {p}^2")));
        }
        Ok(Self::reduced(p, q, d))
    }

    fn reduced(p: BigInt, q: BigInt, d: BigInt) -> Self {
        let h = p.gcd(&q);
        let Some(h) = h.to_u64() else {
            return QuadraticSurd { p, q, d };
        };
        let mut best = 1u64;
        let mut consider = |g: u64| {
            if g <= best {
                return;
            }
            let gb = BigInt::from(g);
            if (&d % (&gb * &gb)).is_zero() && ((&d - &p * &p) % (&gb * &q)).is_zero() {
                best = g;
            }
        };
        let mut i = 1u64;
        while i * i <= h {
            if h % i == 0 {
                consider(i);
                consider(h / i);
            }
            i += 1;
        }
        let g = BigInt::from(best);
        QuadraticSurd {
            p: &p / &g,
            q: &q / &g,
            d: &d / (&g * &g),
        }
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }
    pub fn q(&self) -> &BigInt {
        &self.q
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    /// Exact floor, bracketing `√D` by the integer square root.
    pub fn floor(&self) -> BigInt {
        let s = self.d.sqrt();
        if self.q.is_positive() {
            (&self.p + &s).div_floor(&self.q)
        } else {
            (-&self.p - &s - BigInt::one()).div_floor(&-&self.q)
        }
    }

    pub fn to_f64(&self) -> f64 {
        let p = self.p.to_f64().unwrap_or(f64::NAN);
        let q = self.q.to_f64().unwrap_or(f64::NAN);
        let d = self.d.to_f64().unwrap_or(f64::NAN);
        (p + d.sqrt()) / q
    }

    /// Eventually periodic expansion `[a0; a1, a2, ...]`. The period is
    /// detected by the first repeated `(P, Q)` state and is minimal.
    pub fn continued_fraction(&self) -> ContinuedFraction {
        let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
        let mut digits = Vec::new();
        let (mut p, mut q) = (self.p.clone(), self.q.clone());
        loop {
            if let Some(&start) = seen.get(&(p.clone(), q.clone())) {
                let period = digits.split_off(start);
                return ContinuedFraction {
                    preperiod: digits,
                    period,
                };
            }
            seen.insert((p.clone(), q.clone()), digits.len());
            let step = QuadraticSurd {
                p: p.clone(),
                q: q.clone(),
                d: self.d.clone(),
            };
            let a = step.floor();
            let p_next = &a * &q - &p;
            let rem = &self.d - &p_next * &p_next;
            debug_assert!(rem.is_multiple_of(&q));
            let q_next = rem / &q;
            digits.push(a);
            p = p_next;
            q = q_next;
        }
    }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + √{})/{}", self.p, self.d, self.q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    R,
    L,
}

impl Letter {
    pub fn matrix(self) -> MatSL2 {
        match self {
            Letter::R => MatSL2::r(),
            Letter::L => MatSL2::l(),
        }
    }
}

/// `±R^l1 L^m1 ... R^lr L^mr` with every exponent at least one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TwistWord {
    sign: i8,
    syllables: Vec<(u64, u64)>,
}

impl TwistWord {
    pub fn new(sign: i8, syllables: Vec<(u64, u64)>) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidWord(format!("sign must be ±1, got {sign}")));
        }
        if syllables.is_empty() {
            return Err(Error::InvalidWord("at least one syllable is required".into()));
        }
        if let Some(i) = syllables.iter().position(|&(l, m)| l == 0 || m == 0) {
            return Err(Error::InvalidWord(format!(
                "syllable {} has a zero exponent",
                i + 1
            )));
        }
        let w = TwistWord { sign, syllables };
        w.checked_len()
            .ok_or_else(|| Error::InvalidWord("word length overflows".into()))?;
        Ok(w)
    }

    pub fn positive(syllables: Vec<(u64, u64)>) -> Result<Self> {
        Self::new(1, syllables)
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn syllables(&self) -> &[(u64, u64)] {
        &self.syllables
    }

    fn checked_len(&self) -> Option<u64> {
        self.syllables
            .iter()
            .try_fold(0u64, |acc, &(l, m)| acc.checked_add(l)?.checked_add(m))
    }

    /// Word length `n = Σ (l_i + m_i)`: the number of letters.
    pub fn len(&self) -> u64 {
        self.checked_len().expect("validated at construction")
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The flattened letter sequence `R^l1 L^m1 ...`.
    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        for &(l, m) in &self.syllables {
            out.extend(std::iter::repeat_n(Letter::R, l as usize));
            out.extend(std::iter::repeat_n(Letter::L, m as usize));
        }
        out
    }

    /// The positive product `∏ R^li L^mi`, ignoring the sign.
    pub fn positive_matrix(&self) -> MatSL2 {
        self.syllables
            .iter()
            .fold(MatSL2::identity(), |acc, &(l, m)| {
                acc.compose(&MatSL2::r_pow(l)).compose(&MatSL2::l_pow(m))
            })
    }

    /// `sign · ∏ R^li L^mi`.
    pub fn to_matrix(&self) -> MatSL2 {
        let m = self.positive_matrix();
        if self.sign < 0 {
            m.negate()
        } else {
            m
        }
    }

    pub fn with_sign(&self, sign: i8) -> Result<Self> {
        Self::new(sign, self.syllables.clone())
    }

    /// Rotate syllables left by `shift`.
    pub fn rotated(&self, shift: usize) -> TwistWord {
        let r = self.syllables.len();
        let mut s = self.syllables.clone();
        s.rotate_left(shift % r);
        TwistWord {
            sign: self.sign,
            syllables: s,
        }
    }

    /// Index of the lexicographically least syllable rotation of the
    /// flattened sequence `(l1, m1, ..., lr, mr)`.
    pub fn canonical_shift(&self) -> usize {
        let r = self.syllables.len();
        (0..r)
            .min_by(|&i, &j| {
                let a = self.syllables[i..].iter().chain(&self.syllables[..i]);
                let b = self.syllables[j..].iter().chain(&self.syllables[..j]);
                a.cmp(b).then(i.cmp(&j))
            })
            .unwrap_or(0)
    }

    pub fn canonical(&self) -> TwistWord {
        self.rotated(self.canonical_shift())
    }

    /// Whether `other` has the same syllables up to cyclic rotation.
    pub fn is_rotation_of(&self, other: &TwistWord) -> bool {
        self.syllables.len() == other.syllables.len()
            && self.canonical().syllables == other.canonical().syllables
    }
}

impl fmt::Display for TwistWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign < 0 {
            write!(f, "-")?;
        }
        for (i, &(l, m)) in self.syllables.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "R^{l} L^{m}")?;
        }
        Ok(())
    }
}

/// Result of [`rl_factorize`]: `conjugator · word.to_matrix() · conjugator⁻¹`
/// equals the input matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub word: TwistWord,
    pub conjugator: MatSL2,
}

/// Product `R^c0 L^c1 R^c2 ...` over an even-length digit list.
fn alternating_product(digits: &[BigInt]) -> MatSL2 {
    debug_assert!(digits.len() % 2 == 0);
    digits.chunks(2).fold(MatSL2::identity(), |acc, pair| {
        acc.compose(&MatSL2::r_pow(pair[0].clone()))
            .compose(&MatSL2::l_pow(pair[1].clone()))
    })
}

fn digit_to_u64(x: &BigInt) -> Result<u64> {
    x.to_u64()
        .filter(|&v| v > 0)
        .ok_or_else(|| Error::Internal(format!("period digit {x} is not a positive u64")))
}

/// Conjugates a hyperbolic matrix into the normal form
/// `±R^l1 L^m1 ... R^lr L^mr`, canonical under syllable rotation.
///
/// The period of the attracting fixed point's continued fraction, read in
/// R/L-alternating phase, gives the primitive word; the input may be a
/// proper power of it, in which case the period is repeated until the
/// traces agree. The conjugator is built from the preperiod convergents and
/// the result is checked exactly before returning.
pub fn rl_factorize(m: &MatSL2) -> Result<Factorization> {
    if !m.is_hyperbolic() {
        return Err(Error::NonHyperbolic { trace: m.trace() });
    }
    let sign: i8 = if m.trace().is_positive() { 1 } else { -1 };
    let pos = if sign > 0 { m.clone() } else { m.negate() };

    let cf = pos.attracting_fixed_point()?.continued_fraction();
    let mut prefix = cf.preperiod;
    let mut period = cf.period;
    // Digit i is an R exponent for even i and an L exponent for odd i.
    if prefix.len() % 2 == 1 {
        prefix.push(period[0].clone());
        period.rotate_left(1);
    }
    if period.len() % 2 == 1 {
        period.extend_from_within(..);
    }
    let mut conjugator = alternating_product(&prefix);

    let base: Vec<(u64, u64)> = period
        .chunks(2)
        .map(|p| Ok((digit_to_u64(&p[0])?, digit_to_u64(&p[1])?)))
        .collect::<Result<_>>()?;
    let primitive = TwistWord::positive(base.clone())?.positive_matrix();
    let target = pos.trace();
    let mut power = primitive.clone();
    let mut reps = 1usize;
    while power.trace() < target {
        power = power.compose(&primitive);
        reps += 1;
    }
    if power.trace() != target {
        return Err(Error::Internal(format!(
            "no power of the primitive word matches trace {target}"
        )));
    }
    let raw = TwistWord::positive(base.repeat(reps))?;

    let shift = raw.canonical_shift();
    let rotation = TwistWord {
        sign: 1,
        syllables: raw.syllables[..shift].to_vec(),
    };
    if shift > 0 {
        conjugator = conjugator.compose(&rotation.positive_matrix());
    }
    let word = TwistWord::new(sign, raw.rotated(shift).syllables)?;

    if word.to_matrix().conjugate_by(&conjugator) != *m {
        return Err(Error::Internal(format!(
            "conjugator check failed for {m} with word {word}"
        )));
    }
    Ok(Factorization { word, conjugator })
}

/// `sign · ∏ R^li L^mi`.
pub fn word_to_matrix(w: &TwistWord) -> MatSL2 {
    w.to_matrix()
}
