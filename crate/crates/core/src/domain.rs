//! Input spaces, vectors, predicates and predicate classes.
//!
//! Everything here is exact: domains enumerate in a fixed lexicographic
//! order (entry 0 most significant), predicates evaluate deterministically,
//! and the class statistics return closed forms next to brute-force counts
//! so the two can be compared bit for bit.

use std::fmt;
use std::sync::Arc;

use crate::bitset;
use crate::crypto::ToyScheme;
use crate::{Error, Result};

/// Widest supported bit vector. Keeps packed vectors in a `u32` and full
/// enumerations within the default domain cap.
pub const MAX_BIT_WIDTH: usize = 24;

/// Default ceiling on exact enumeration, in domain elements.
pub const DEFAULT_DOMAIN_CAP: u64 = 1 << 24;

fn is_odd_prime(p: u32) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut d = 3u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn checked_pow(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp).ok_or_else(|| {
        Error::InvalidArgument(format!("{base}^{exp} overflows the element index space"))
    })
}

/// A fixed-width vector over GF(2), packed into a `u32`.
///
/// Entry 0 is the most significant bit, so the packed integer value is also
/// the vector's rank in lexicographic enumeration order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    width: u8,
    bits: u32,
}

impl BitVector {
    pub fn zero(width: usize) -> Self {
        assert!(
            (1..=MAX_BIT_WIDTH).contains(&width),
            "bit width {width} out of range 1..={MAX_BIT_WIDTH}"
        );
        BitVector { width: width as u8, bits: 0 }
    }

    pub fn from_index(width: usize, index: u64) -> Self {
        let mut v = Self::zero(width);
        assert!(index < 1u64 << width, "index {index} out of range for width {width}");
        v.bits = index as u32;
        v
    }

    /// Parses a string of `0`/`1` characters; the width is the string length.
    pub fn parse_bits(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > MAX_BIT_WIDTH {
            return Err(Error::InvalidArgument(format!(
                "bit string length {} out of range 1..={MAX_BIT_WIDTH}",
                s.len()
            )));
        }
        let mut bits = 0u32;
        for c in s.chars() {
            bits <<= 1;
            match c {
                '0' => {}
                '1' => bits |= 1,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "invalid bit character {other:?}"
                    )))
                }
            }
        }
        Ok(BitVector { width: s.len() as u8, bits })
    }

    pub fn from_hex(width: usize, s: &str) -> Result<Self> {
        let bits = u32::from_str_radix(s, 16)
            .map_err(|e| Error::InvalidArgument(format!("bad hex vector {s:?}: {e}")))?;
        if width == 0 || width > MAX_BIT_WIDTH || (width < 32 && bits >= 1u32 << width) {
            return Err(Error::InvalidArgument(format!(
                "hex value {s:?} does not fit width {width}"
            )));
        }
        Ok(BitVector { width: width as u8, bits })
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    /// Packed integer value; also the rank in lexicographic order.
    pub fn index(&self) -> u64 {
        self.bits as u64
    }

    pub fn bit(&self, i: usize) -> u8 {
        assert!(i < self.width());
        (self.bits >> (self.width() - 1 - i) & 1) as u8
    }

    pub fn with_bit(&self, i: usize, value: u8) -> Self {
        assert!(i < self.width());
        let mask = 1u32 << (self.width() - 1 - i);
        let bits = if value & 1 == 1 { self.bits | mask } else { self.bits & !mask };
        BitVector { width: self.width, bits }
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn to_hex(&self) -> String {
        format!("{:0w$x}", self.bits, w = self.width().div_ceil(4))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.width() {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// GF(2) inner product of two equal-width bit vectors.
pub fn dot_gf2(x: &BitVector, s: &BitVector) -> Result<u8> {
    if x.width != s.width {
        return Err(Error::WidthMismatch { left: x.width(), right: s.width() });
    }
    Ok(((x.bits & s.bits).count_ones() & 1) as u8)
}

/// A fixed-width vector over `Z_p` for an odd prime `p`, indexed `0..n-1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ZpVector {
    p: u32,
    entries: Vec<u32>,
}

impl ZpVector {
    pub fn new(p: u32, entries: Vec<u32>) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::InvalidArgument(format!("modulus {p} is not an odd prime")));
        }
        if entries.is_empty() {
            return Err(Error::InvalidArgument("empty Z_p vector".into()));
        }
        if let Some(bad) = entries.iter().find(|&&e| e >= p) {
            return Err(Error::InvalidArgument(format!("entry {bad} not below modulus {p}")));
        }
        Ok(ZpVector { p, entries })
    }

    /// Decodes the mixed-radix integer `index` with entry 0 most significant.
    pub fn from_index(p: u32, width: usize, index: u64) -> Self {
        let mut entries = vec![0u32; width];
        let mut rest = index;
        for i in (0..width).rev() {
            entries[i] = (rest % p as u64) as u32;
            rest /= p as u64;
        }
        assert_eq!(rest, 0, "index out of range for width {width} base {p}");
        ZpVector { p, entries }
    }

    pub fn index(&self) -> u64 {
        let mut idx = 0u64;
        for &e in &self.entries {
            idx = idx * self.p as u64 + e as u64;
        }
        idx
    }

    pub fn width(&self) -> usize {
        self.entries.len()
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn entry(&self, i: usize) -> u32 {
        self.entries[i]
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// Inner product modulo `p`.
    pub fn dot(&self, other: &ZpVector) -> Result<u32> {
        if self.width() != other.width() {
            return Err(Error::WidthMismatch { left: self.width(), right: other.width() });
        }
        if self.p != other.p {
            return Err(Error::DomainMismatch(format!(
                "moduli differ: {} vs {}",
                self.p, other.p
            )));
        }
        let mut acc = 0u64;
        for (a, b) in self.entries.iter().zip(&other.entries) {
            acc += *a as u64 * *b as u64;
        }
        Ok((acc % self.p as u64) as u32)
    }
}

impl fmt::Display for ZpVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for ZpVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ZpVector{self} mod {}", self.p)
    }
}

/// One element of a [`Domain`].
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Point {
    Bits(BitVector),
    Zp(ZpVector),
}

impl Point {
    /// Hex form of the element's ambient lexicographic index. Used in CSV
    /// reports; stable across domain puncturing.
    pub fn to_hex(&self) -> String {
        match self {
            Point::Bits(v) => v.to_hex(),
            Point::Zp(v) => format!("{:x}", v.index()),
        }
    }

    pub fn as_bits(&self) -> Option<&BitVector> {
        match self {
            Point::Bits(v) => Some(v),
            Point::Zp(_) => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Bits(v) => write!(f, "{v}"),
            Point::Zp(v) => write!(f, "{v}"),
        }
    }
}

/// An enumerable input space. Enumeration order is lexicographic with entry 0
/// most significant, skipping punctured elements.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Domain {
    /// `{0,1}^n`
    FullCube { n: usize },
    /// `{0,1}^n` minus the all-zero vector
    PuncturedCube { n: usize },
    /// n-vectors over `Z_p` whose last `n-1` entries are not all zero
    PuncturedZp { n: usize, p: u32 },
}

impl Domain {
    pub fn full_cube(n: usize) -> Result<Self> {
        if !(1..=MAX_BIT_WIDTH).contains(&n) {
            return Err(Error::InvalidArgument(format!(
                "cube width {n} out of range 1..={MAX_BIT_WIDTH}"
            )));
        }
        Ok(Domain::FullCube { n })
    }

    pub fn punctured_cube(n: usize) -> Result<Self> {
        Self::full_cube(n)?;
        Ok(Domain::PuncturedCube { n })
    }

    pub fn punctured_zp(n: usize, p: u32) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::InvalidArgument(format!("modulus {p} is not an odd prime")));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(
                "punctured Z_p space needs width at least 2".into(),
            ));
        }
        checked_pow(p as u64, n as u32)?;
        Ok(Domain::PuncturedZp { n, p })
    }

    pub fn n(&self) -> usize {
        match *self {
            Domain::FullCube { n } | Domain::PuncturedCube { n } | Domain::PuncturedZp { n, .. } => n,
        }
    }

    /// Size of the ambient (unpunctured) space.
    pub fn ambient_cardinality(&self) -> u64 {
        match *self {
            Domain::FullCube { n } | Domain::PuncturedCube { n } => 1u64 << n,
            Domain::PuncturedZp { n, p } => (p as u64).pow(n as u32),
        }
    }

    pub fn cardinality(&self) -> u64 {
        match *self {
            Domain::FullCube { n } => 1u64 << n,
            Domain::PuncturedCube { n } => (1u64 << n) - 1,
            Domain::PuncturedZp { n, p } => (p as u64).pow(n as u32) - p as u64,
        }
    }

    pub fn check_cap(&self, cap: u64) -> Result<()> {
        let cardinality = self.cardinality();
        if cardinality > cap {
            return Err(Error::EnumerationCap { cardinality, cap });
        }
        Ok(())
    }

    pub fn contains(&self, x: &Point) -> bool {
        match (*self, x) {
            (Domain::FullCube { n }, Point::Bits(v)) => v.width() == n,
            (Domain::PuncturedCube { n }, Point::Bits(v)) => v.width() == n && !v.is_zero(),
            (Domain::PuncturedZp { n, p }, Point::Zp(v)) => {
                v.width() == n
                    && v.modulus() == p
                    && v.entries().iter().skip(1).any(|&e| e != 0)
            }
            _ => false,
        }
    }

    /// Rank of `x` in enumeration order, if `x` belongs to the domain.
    pub fn rank(&self, x: &Point) -> Option<u64> {
        if !self.contains(x) {
            return None;
        }
        Some(match (*self, x) {
            (Domain::FullCube { .. }, Point::Bits(v)) => v.index(),
            (Domain::PuncturedCube { .. }, Point::Bits(v)) => v.index() - 1,
            (Domain::PuncturedZp { n, p }, Point::Zp(v)) => {
                let idx = v.index();
                let block = (p as u64).pow(n as u32 - 1);
                idx - idx / block - 1
            }
            _ => unreachable!(),
        })
    }

    pub fn element_at(&self, rank: u64) -> Point {
        assert!(rank < self.cardinality(), "rank {rank} out of range");
        match *self {
            Domain::FullCube { n } => Point::Bits(BitVector::from_index(n, rank)),
            Domain::PuncturedCube { n } => Point::Bits(BitVector::from_index(n, rank + 1)),
            Domain::PuncturedZp { n, p } => {
                // Between consecutive excluded indices (the multiples of
                // p^{n-1}) lie exactly p^{n-1}-1 valid elements.
                let block = (p as u64).pow(n as u32 - 1);
                let idx = rank / (block - 1) * block + rank % (block - 1) + 1;
                Point::Zp(ZpVector::from_index(p, n, idx))
            }
        }
    }

    pub fn iter(&self) -> DomainIter {
        DomainIter { domain: *self, next_rank: 0 }
    }

    /// Counts the elements by walking the ambient space, without allocating.
    /// This is the brute-force side of the cardinality closed forms.
    pub fn count_by_enumeration(&self) -> u64 {
        match *self {
            Domain::FullCube { n } => 1u64 << n,
            Domain::PuncturedCube { n } => (1u64..1 << n).count() as u64,
            Domain::PuncturedZp { n, p } => {
                let block = (p as u64).pow(n as u32 - 1);
                let mut count = 0u64;
                for idx in 0..(p as u64).pow(n as u32) {
                    if idx % block != 0 {
                        count += 1;
                    }
                }
                count
            }
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Domain::FullCube { n } => write!(f, "{{0,1}}^{n}"),
            Domain::PuncturedCube { n } => write!(f, "{{0,1}}^{n} \\ {{0}}"),
            Domain::PuncturedZp { n, p } => write!(f, "Z_{p}^{n} punctured"),
        }
    }
}

pub struct DomainIter {
    domain: Domain,
    next_rank: u64,
}

impl Iterator for DomainIter {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        if self.next_rank >= self.domain.cardinality() {
            return None;
        }
        let p = self.domain.element_at(self.next_rank);
        self.next_rank += 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.domain.cardinality() - self.next_rank) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for DomainIter {}

/// A `{0,1}`-valued function over a finite domain.
#[derive(Clone, Debug)]
pub enum Predicate {
    /// Negation of the GF(2) inner product with `secret`.
    NegParity { secret: BitVector, domain: Domain },
    /// Indicator of `coeffs · x = 1 (mod p)` over a punctured `Z_p` space.
    BoolLinear { coeffs: ZpVector, domain: Domain },
    /// Explicit positive set, stored as a bitmask over domain ranks.
    SetMembership { domain: Domain, mask: Arc<Vec<u64>>, positives: u64 },
    /// Valid message/signature pairs `(m, s)` of a toy scheme, as a predicate
    /// over `{0,1}^{2n}` with `m` in the high bits.
    SigVerify { scheme: ToyScheme },
}

impl Predicate {
    /// Negative parity over the punctured cube (the usual hidden-set domain).
    pub fn neg_parity(secret: BitVector) -> Self {
        let domain = Domain::PuncturedCube { n: secret.width() };
        Predicate::NegParity { secret, domain }
    }

    pub fn neg_parity_on(secret: BitVector, domain: Domain) -> Result<Self> {
        match domain {
            Domain::FullCube { n } | Domain::PuncturedCube { n } if n == secret.width() => {
                Ok(Predicate::NegParity { secret, domain })
            }
            _ => Err(Error::DomainMismatch(format!(
                "negative parity of width {} cannot live on {domain}",
                secret.width()
            ))),
        }
    }

    pub fn bool_linear(coeffs: ZpVector) -> Result<Self> {
        let domain = Domain::punctured_zp(coeffs.width(), coeffs.modulus())?;
        Ok(Predicate::BoolLinear { coeffs, domain })
    }

    pub fn set_membership(domain: Domain, members: &[Point]) -> Result<Self> {
        let mut mask = bitset::with_capacity(domain.cardinality());
        let mut positives = 0u64;
        for m in members {
            let rank = domain
                .rank(m)
                .ok_or_else(|| Error::OutOfDomain(m.to_string()))?;
            if !bitset::get(&mask, rank) {
                bitset::set(&mut mask, rank);
                positives += 1;
            }
        }
        Ok(Predicate::SetMembership { domain, mask: Arc::new(mask), positives })
    }

    /// Membership given directly as domain ranks.
    pub fn set_membership_ranks(domain: Domain, ranks: &[u64]) -> Result<Self> {
        let cardinality = domain.cardinality();
        let mut mask = bitset::with_capacity(cardinality);
        let mut positives = 0u64;
        for &r in ranks {
            if r >= cardinality {
                return Err(Error::InvalidArgument(format!("rank {r} out of range")));
            }
            if !bitset::get(&mask, r) {
                bitset::set(&mut mask, r);
                positives += 1;
            }
        }
        Ok(Predicate::SetMembership { domain, mask: Arc::new(mask), positives })
    }

    /// The coordinate function `f(x) = x_index` over the full cube.
    pub fn dictator(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::InvalidArgument(format!(
                "dictator index {index} out of range for width {n}"
            )));
        }
        let domain = Domain::full_cube(n)?;
        let mut mask = bitset::with_capacity(domain.cardinality());
        let shift = n - 1 - index;
        for idx in 0..domain.cardinality() {
            if idx >> shift & 1 == 1 {
                bitset::set(&mut mask, idx);
            }
        }
        Ok(Predicate::SetMembership { domain, mask: Arc::new(mask), positives: 1 << (n - 1) })
    }

    pub fn constant(domain: Domain, value: bool) -> Self {
        let cardinality = domain.cardinality();
        let mask = if value {
            let mut m = bitset::with_capacity(cardinality);
            for r in 0..cardinality {
                bitset::set(&mut m, r);
            }
            m
        } else {
            bitset::with_capacity(cardinality)
        };
        Predicate::SetMembership {
            domain,
            mask: Arc::new(mask),
            positives: if value { cardinality } else { 0 },
        }
    }

    pub fn sig_verify(scheme: ToyScheme) -> Self {
        Predicate::SigVerify { scheme }
    }

    pub fn domain(&self) -> Domain {
        match self {
            Predicate::NegParity { domain, .. }
            | Predicate::BoolLinear { domain, .. }
            | Predicate::SetMembership { domain, .. } => *domain,
            Predicate::SigVerify { scheme } => Domain::FullCube { n: 2 * scheme.width() },
        }
    }

    pub fn eval(&self, x: &Point) -> Result<bool> {
        if !self.domain().contains(x) {
            return Err(Error::OutOfDomain(x.to_string()));
        }
        Ok(match (self, x) {
            (Predicate::NegParity { secret, .. }, Point::Bits(v)) => dot_gf2(v, secret)? == 0,
            (Predicate::BoolLinear { coeffs, .. }, Point::Zp(v)) => coeffs.dot(v)? == 1,
            (Predicate::SetMembership { domain, mask, .. }, _) => {
                bitset::get(mask, domain.rank(x).expect("contained point has a rank"))
            }
            (Predicate::SigVerify { scheme }, Point::Bits(v)) => {
                let idx = v.index();
                let n = scheme.width();
                scheme.verify(idx >> n, idx & ((1u64 << n) - 1))
            }
            _ => unreachable!("contains() filtered mismatched point kinds"),
        })
    }

    /// Ranks (in the predicate's own domain) of the positive set, in
    /// enumeration order.
    pub fn positive_ranks(&self, cap: u64) -> Result<Vec<u64>> {
        let domain = self.domain();
        domain.check_cap(cap)?;
        match self {
            Predicate::SetMembership { mask, positives, .. } => {
                let mut out = Vec::with_capacity(*positives as usize);
                bitset::for_each_set(mask, |r| out.push(r));
                Ok(out)
            }
            Predicate::SigVerify { scheme } => {
                // One valid signature per message under deterministic signing,
                // so enumerate messages instead of all pairs.
                let n = scheme.width();
                let mut out: Vec<u64> =
                    (0..1u64 << n).map(|m| (m << n) | scheme.sign(m)).collect();
                out.sort_unstable();
                Ok(out)
            }
            _ => {
                let mut out = Vec::new();
                for (rank, x) in domain.iter().enumerate() {
                    if self.eval(&x)? {
                        out.push(rank as u64);
                    }
                }
                Ok(out)
            }
        }
    }

    /// The positive set itself, in enumeration order.
    pub fn positive_set(&self, cap: u64) -> Result<Vec<Point>> {
        let domain = self.domain();
        Ok(self
            .positive_ranks(cap)?
            .into_iter()
            .map(|r| domain.element_at(r))
            .collect())
    }

    pub fn positive_count(&self, cap: u64) -> Result<u64> {
        match self {
            Predicate::SetMembership { positives, domain, .. } => {
                domain.check_cap(cap)?;
                Ok(*positives)
            }
            _ => Ok(self.positive_ranks(cap)?.len() as u64),
        }
    }

    /// Fraction of the domain mapped to 1, as an exact ratio in doubles.
    pub fn density(&self, cap: u64) -> Result<f64> {
        Ok(self.positive_count(cap)? as f64 / self.domain().cardinality() as f64)
    }

    pub fn describe(&self) -> String {
        match self {
            Predicate::NegParity { secret, .. } => format!("neg-parity s={secret}"),
            Predicate::BoolLinear { coeffs, .. } => {
                format!("bool-linear a={coeffs} mod {}", coeffs.modulus())
            }
            Predicate::SetMembership { positives, .. } => {
                format!("set-membership |S|={positives}")
            }
            Predicate::SigVerify { scheme } => format!("sig-verify n={}", scheme.width()),
        }
    }
}

/// A family of predicates with a deterministic enumeration producing every
/// member exactly once.
#[derive(Clone, Debug)]
pub enum PredicateClass {
    /// Negative parities over the punctured cube. The index set is `s != 0`
    /// by default; `include_zero` switches to all `s`.
    AllNegParity { n: usize, include_zero: bool },
    /// Booleanized linear functions with leading coefficient 1.
    NormalizedBoolLinear { n: usize, p: u32 },
    /// All coordinate dictator functions over the full cube.
    Dictators { n: usize },
    Custom { predicates: Vec<Predicate> },
}

impl PredicateClass {
    pub fn len(&self) -> u64 {
        match self {
            PredicateClass::AllNegParity { n, include_zero } => {
                (1u64 << n) - if *include_zero { 0 } else { 1 }
            }
            PredicateClass::NormalizedBoolLinear { n, p } => (*p as u64).pow(*n as u32 - 1),
            PredicateClass::Dictators { n } => *n as u64,
            PredicateClass::Custom { predicates } => predicates.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn member(&self, index: u64) -> Predicate {
        assert!(index < self.len(), "member index {index} out of range");
        match self {
            PredicateClass::AllNegParity { n, include_zero } => {
                let s = if *include_zero { index } else { index + 1 };
                Predicate::neg_parity(BitVector::from_index(*n, s))
            }
            PredicateClass::NormalizedBoolLinear { n, p } => {
                let tail = ZpVector::from_index(*p, *n - 1, index);
                let mut entries = Vec::with_capacity(*n);
                entries.push(1);
                entries.extend_from_slice(tail.entries());
                Predicate::bool_linear(ZpVector::new(*p, entries).expect("valid entries"))
                    .expect("valid class member")
            }
            PredicateClass::Dictators { n } => {
                Predicate::dictator(*n, index as usize).expect("valid index")
            }
            PredicateClass::Custom { predicates } => predicates[index as usize].clone(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Predicate> + '_ {
        (0..self.len()).map(|i| self.member(i))
    }

    /// The common domain of the members.
    pub fn member_domain(&self) -> Result<Domain> {
        match self {
            PredicateClass::AllNegParity { n, .. } => Domain::punctured_cube(*n),
            PredicateClass::NormalizedBoolLinear { n, p } => Domain::punctured_zp(*n, *p),
            PredicateClass::Dictators { n } => Domain::full_cube(*n),
            PredicateClass::Custom { predicates } => {
                let first = predicates
                    .first()
                    .ok_or_else(|| Error::InvalidArgument("empty custom class".into()))?
                    .domain();
                if predicates.iter().any(|f| f.domain() != first) {
                    return Err(Error::DomainMismatch(
                        "custom class members live on different domains".into(),
                    ));
                }
                Ok(first)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PredicateClass::AllNegParity { n, include_zero } => {
                format!("neg-parity class n={n} include_zero={include_zero}")
            }
            PredicateClass::NormalizedBoolLinear { n, p } => {
                format!("normalized bool-linear class n={n} p={p}")
            }
            PredicateClass::Dictators { n } => format!("dictator class n={n}"),
            PredicateClass::Custom { predicates } => format!("custom class ({})", predicates.len()),
        }
    }
}

/// Closed forms and brute-force counts for the normalized booleanized linear
/// class. Every `*_formula` field must equal its `*_counted` partner exactly;
/// `all_match` is the single switch tests assert on.
#[derive(Clone, Debug, PartialEq)]
pub struct BoolLinearClassStats {
    pub n: usize,
    pub p: u32,
    pub domain_size_formula: u64,
    pub domain_size_counted: u64,
    pub class_size_formula: u64,
    pub class_size_counted: u64,
    pub positive_size_formula: u64,
    pub positive_size_counted_min: u64,
    pub positive_size_counted_max: u64,
    pub pairwise_agreement_formula: u64,
    pub pairwise_agreement_counted_min: u64,
    pub pairwise_agreement_counted_max: u64,
    pub per_point_positive_formula: u64,
    pub per_point_positive_counted_min: u64,
    pub per_point_positive_counted_max: u64,
}

impl BoolLinearClassStats {
    pub fn all_match(&self) -> bool {
        self.domain_size_formula == self.domain_size_counted
            && self.class_size_formula == self.class_size_counted
            && self.positive_size_formula == self.positive_size_counted_min
            && self.positive_size_formula == self.positive_size_counted_max
            && self.pairwise_agreement_formula == self.pairwise_agreement_counted_min
            && self.pairwise_agreement_formula == self.pairwise_agreement_counted_max
            && self.per_point_positive_formula == self.per_point_positive_counted_min
            && self.per_point_positive_formula == self.per_point_positive_counted_max
    }
}

/// Brute-force census of the normalized booleanized linear class next to its
/// closed forms: class size `p^{n-1}`, positive-set size `p^{n-1}-1`,
/// pairwise agreement `(p^2-2p+2)p^{n-2}-p`, per-point positive count
/// `p^{n-2}` and domain size `p^n-p`.
pub fn class_stats_boollinear(n: usize, p: u32, cap: u64) -> Result<BoolLinearClassStats> {
    if n < 2 {
        return Err(Error::Precondition("class statistics need n >= 2".into()));
    }
    let domain = Domain::punctured_zp(n, p)?;
    domain.check_cap(cap)?;
    let class = PredicateClass::NormalizedBoolLinear { n, p };
    let pl = p as u64;
    let domain_size = domain.cardinality();

    // Positive masks over domain ranks, one per member.
    let mut masks: Vec<Vec<u64>> = Vec::with_capacity(class.len() as usize);
    for f in class.iter() {
        let mut mask = bitset::with_capacity(domain_size);
        for (rank, x) in domain.iter().enumerate() {
            if f.eval(&x)? {
                bitset::set(&mut mask, rank as u64);
            }
        }
        masks.push(mask);
    }

    let positive_sizes: Vec<u64> = masks.iter().map(|m| bitset::count(m)).collect();

    let mut agree_min = u64::MAX;
    let mut agree_max = 0u64;
    for i in 0..masks.len() {
        for j in (i + 1)..masks.len() {
            let agree = domain_size - bitset::xor_count(&masks[i], &masks[j]);
            agree_min = agree_min.min(agree);
            agree_max = agree_max.max(agree);
        }
    }

    let mut per_point = vec![0u64; domain_size as usize];
    for mask in &masks {
        bitset::for_each_set(mask, |r| per_point[r as usize] += 1);
    }

    Ok(BoolLinearClassStats {
        n,
        p,
        domain_size_formula: pl.pow(n as u32) - pl,
        domain_size_counted: domain.count_by_enumeration(),
        class_size_formula: pl.pow(n as u32 - 1),
        class_size_counted: masks.len() as u64,
        positive_size_formula: pl.pow(n as u32 - 1) - 1,
        positive_size_counted_min: positive_sizes.iter().copied().min().unwrap_or(0),
        positive_size_counted_max: positive_sizes.iter().copied().max().unwrap_or(0),
        pairwise_agreement_formula: (pl * pl - 2 * pl + 2) * pl.pow(n as u32 - 2) - pl,
        pairwise_agreement_counted_min: agree_min,
        pairwise_agreement_counted_max: agree_max,
        per_point_positive_formula: pl.pow(n as u32 - 2),
        per_point_positive_counted_min: per_point.iter().copied().min().unwrap_or(0),
        per_point_positive_counted_max: per_point.iter().copied().max().unwrap_or(0),
    })
}

/// Per-point positive counts for the negative-parity class, under both index
/// conventions. For every nonzero `x` exactly `2^{n-1}` of all `s` (zero
/// included) satisfy `s . x = 0`, hence `2^{n-1}-1` nonzero ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NegParityPointCounts {
    pub n: usize,
    pub with_zero_formula: u64,
    pub without_zero_formula: u64,
    pub with_zero_counted_min: u64,
    pub with_zero_counted_max: u64,
}

pub fn neg_parity_point_counts(n: usize) -> Result<NegParityPointCounts> {
    let domain = Domain::punctured_cube(n)?;
    let mut min = u64::MAX;
    let mut max = 0u64;
    for x in 1u64..domain.ambient_cardinality() {
        let mut count = 0u64;
        for s in 0..domain.ambient_cardinality() {
            if (x & s).count_ones() & 1 == 0 {
                count += 1;
            }
        }
        min = min.min(count);
        max = max.max(count);
    }
    Ok(NegParityPointCounts {
        n,
        with_zero_formula: 1u64 << (n - 1),
        without_zero_formula: (1u64 << (n - 1)) - 1,
        with_zero_counted_min: min,
        with_zero_counted_max: max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> BitVector {
        BitVector::parse_bits(s).unwrap()
    }

    fn zp(p: u32, entries: &[u32]) -> ZpVector {
        ZpVector::new(p, entries.to_vec()).unwrap()
    }

    #[test]
    fn dot_gf2_examples() {
        assert_eq!(dot_gf2(&bits("101"), &bits("101")).unwrap(), 0);
        assert_eq!(dot_gf2(&bits("101"), &bits("100")).unwrap(), 1);
        assert_eq!(dot_gf2(&bits("0000"), &bits("1111")).unwrap(), 0);
        assert!(matches!(
            dot_gf2(&bits("101"), &bits("01")),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn eval_examples() {
        let f = Predicate::bool_linear(zp(3, &[1, 1])).unwrap();
        assert!(f.eval(&Point::Zp(zp(3, &[0, 1]))).unwrap());
        let g = Predicate::bool_linear(zp(3, &[1, 2])).unwrap();
        assert!(!g.eval(&Point::Zp(zp(3, &[1, 1]))).unwrap());
        let h = Predicate::neg_parity(bits("101"));
        assert!(h.eval(&Point::Bits(bits("010"))).unwrap());
        // 0^n is outside the punctured cube.
        assert!(matches!(
            h.eval(&Point::Bits(bits("000"))),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn positive_set_examples() {
        let f = Predicate::neg_parity(bits("101"));
        let set = f.positive_set(DEFAULT_DOMAIN_CAP).unwrap();
        let rendered: Vec<String> = set.iter().map(|p| p.to_string()).collect();
        assert_eq!(rendered, vec!["010", "101", "111"]);

        let g = Predicate::bool_linear(zp(3, &[1, 1])).unwrap();
        assert_eq!(g.positive_count(DEFAULT_DOMAIN_CAP).unwrap(), 2);

        let domain = Domain::full_cube(4).unwrap();
        let member = Point::Bits(bits("1011"));
        let h = Predicate::set_membership(domain, std::slice::from_ref(&member)).unwrap();
        assert_eq!(h.positive_set(DEFAULT_DOMAIN_CAP).unwrap(), vec![member]);
    }

    #[test]
    fn density_examples() {
        let f = Predicate::neg_parity(bits("101"));
        assert_eq!(f.density(DEFAULT_DOMAIN_CAP).unwrap(), 3.0 / 7.0);

        let t = Predicate::constant(Domain::punctured_cube(5).unwrap(), true);
        assert_eq!(t.density(DEFAULT_DOMAIN_CAP).unwrap(), 1.0);

        let g = Predicate::bool_linear(zp(3, &[1, 0, 0])).unwrap();
        assert_eq!(g.density(DEFAULT_DOMAIN_CAP).unwrap(), 8.0 / 24.0);
    }

    #[test]
    fn class_stats_examples() {
        let s = class_stats_boollinear(3, 3, DEFAULT_DOMAIN_CAP).unwrap();
        assert_eq!(s.class_size_formula, 9);
        assert_eq!(s.positive_size_formula, 8);
        assert_eq!(s.per_point_positive_formula, 3);
        assert_eq!(s.pairwise_agreement_formula, 12);
        assert!(s.all_match(), "{s:?}");

        let s = class_stats_boollinear(2, 5, DEFAULT_DOMAIN_CAP).unwrap();
        assert_eq!(s.class_size_formula, 5);
        assert_eq!(s.per_point_positive_formula, 1);
        assert!(s.all_match(), "{s:?}");
    }

    #[test]
    fn punctured_zp_cardinality_and_ranks() {
        for (n, p) in [(2usize, 3u32), (3, 3), (4, 3), (2, 5), (3, 5)] {
            let d = Domain::punctured_zp(n, p).unwrap();
            assert_eq!(d.cardinality(), (p as u64).pow(n as u32) - p as u64);
            assert_eq!(d.count_by_enumeration(), d.cardinality());
            for (rank, x) in d.iter().enumerate() {
                assert_eq!(d.rank(&x), Some(rank as u64));
                assert_eq!(d.element_at(rank as u64), x);
            }
        }
    }

    #[test]
    fn trivial_positive_input_is_excluded() {
        let d = Domain::punctured_zp(4, 3).unwrap();
        let trivial = Point::Zp(zp(3, &[1, 0, 0, 0]));
        assert!(!d.contains(&trivial));
    }

    #[test]
    fn neg_parity_point_count_conventions() {
        for n in 2..=10 {
            let c = neg_parity_point_counts(n).unwrap();
            assert_eq!(c.with_zero_counted_min, c.with_zero_formula);
            assert_eq!(c.with_zero_counted_max, c.with_zero_formula);
            assert_eq!(c.without_zero_formula, c.with_zero_formula - 1);
        }
    }

    #[test]
    fn class_enumeration_is_exact() {
        let class = PredicateClass::NormalizedBoolLinear { n: 3, p: 3 };
        assert_eq!(class.iter().count() as u64, class.len());
        let class = PredicateClass::AllNegParity { n: 4, include_zero: false };
        assert_eq!(class.len(), 15);
        let class = PredicateClass::AllNegParity { n: 4, include_zero: true };
        assert_eq!(class.len(), 16);
    }

    #[test]
    fn dictator_mask() {
        let f = Predicate::dictator(4, 1).unwrap();
        assert!(f.eval(&Point::Bits(bits("0100"))).unwrap());
        assert!(!f.eval(&Point::Bits(bits("1011"))).unwrap());
        assert_eq!(f.positive_count(DEFAULT_DOMAIN_CAP).unwrap(), 8);
    }

    #[test]
    fn domain_cap_is_enforced() {
        let d = Domain::full_cube(24).unwrap();
        assert!(matches!(
            d.check_cap(1 << 20),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn hex_round_trip() {
        let v = bits("101100000001");
        let h = v.to_hex();
        assert_eq!(BitVector::from_hex(12, &h).unwrap(), v);
    }
}
