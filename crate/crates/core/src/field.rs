//! Arithmetic in small finite fields: prime fields GF(p) with p < 2^16 and
//! binary extension fields GF(2^m) for m = 1..=16.
//!
//! Every field keeps a log/antilog table pair, so multiplication, inversion
//! and exponentiation are table lookups. Raw symbols are plain `u16`
//! integers in `[0, q)`; [`FieldElement`] is the checked wrapper that carries
//! its field and rejects cross-field arithmetic.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// A raw field symbol. Always `< q` for the field it belongs to.
pub type Symbol = u16;

/// Reduction polynomials for GF(2^m), indexed by `m`. All are primitive, so
/// `x` (the integer 2) generates the multiplicative group.
pub const GF2_POLYNOMIALS: [u32; 17] = [
    0,       // unused
    0x3,     // x + 1
    0x7,     // x^2 + x + 1
    0xB,     // x^3 + x + 1
    0x13,    // x^4 + x + 1
    0x25,    // x^5 + x^2 + 1
    0x43,    // x^6 + x + 1
    0x83,    // x^7 + x + 1
    0x11D,   // x^8 + x^4 + x^3 + x^2 + 1
    0x211,   // x^9 + x^4 + 1
    0x409,   // x^10 + x^3 + 1
    0x805,   // x^11 + x^2 + 1
    0x1053,  // x^12 + x^6 + x^4 + x + 1
    0x201B,  // x^13 + x^4 + x^3 + x + 1
    0x4443,  // x^14 + x^10 + x^6 + x + 1
    0x8003,  // x^15 + x + 1
    0x1100B, // x^16 + x^12 + x^3 + x + 1
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Prime,
    BinaryExtension,
}

/// Descriptor of a supported field. Immutable, `Copy`, and comparable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    kind: FieldKind,
    characteristic: u32,
    degree: u32,
    polynomial: u32,
}

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    pub fn prime(p: u32) -> Result<Self> {
        if !is_prime(p) || p > 65536 {
            return Err(Error::UnsupportedField(format!("prime:{p}")));
        }
        Ok(Self {
            kind: FieldKind::Prime,
            characteristic: p,
            degree: 1,
            polynomial: 0,
        })
    }

    pub fn gf2(m: u32) -> Result<Self> {
        if !(1..=16).contains(&m) {
            return Err(Error::UnsupportedField(format!("gf2:{m}")));
        }
        Ok(Self {
            kind: FieldKind::BinaryExtension,
            characteristic: 2,
            degree: m,
            polynomial: GF2_POLYNOMIALS[m as usize],
        })
    }

    /// The smallest supported field with at least `min_order` elements.
    pub fn smallest_with_order(min_order: usize) -> Result<Self> {
        let min = min_order.max(2);
        if min > 65536 {
            return Err(Error::UnsupportedField(format!("order >= {min}")));
        }
        let pow2 = min.next_power_of_two() as u32;
        let prime = (min as u32..=65536).find(|&p| is_prime(p));
        match prime {
            Some(p) if p < pow2 => Self::prime(p),
            _ => Self::gf2(pow2.trailing_zeros()),
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn characteristic(&self) -> u32 {
        self.characteristic
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Reduction polynomial as a bitmask (0 for prime fields).
    pub fn polynomial(&self) -> u32 {
        self.polynomial
    }

    pub fn order(&self) -> u32 {
        self.characteristic.pow(self.degree)
    }

    /// Bits needed to store any element, i.e. the bit length of `q - 1`.
    pub fn symbol_bits(&self) -> u32 {
        32 - (self.order() - 1).leading_zeros()
    }

    /// Bits of payload one symbol can carry losslessly: `floor(log2 q)`.
    pub fn payload_bits(&self) -> u32 {
        31 - self.order().leading_zeros()
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::Prime => write!(f, "prime:{}", self.characteristic),
            FieldKind::BinaryExtension => write!(f, "gf2:{}", self.degree),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnsupportedField(s.into());
        let (kind, arg) = s.trim().split_once(':').ok_or_else(bad)?;
        let arg: u32 = arg.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "prime" => Self::prime(arg),
            "gf2" => Self::gf2(arg),
            _ => Err(bad()),
        }
    }
}

struct Tables {
    spec: FieldSpec,
    order: u32,
    // exp has 2(q-1) entries so log sums never need a modulo.
    exp: Vec<Symbol>,
    log: Vec<u32>,
}

/// Arithmetic context for one field. Cheap to clone; share freely.
#[derive(Clone)]
pub struct Field {
    tables: Arc<Tables>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.spec())
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec() == other.spec()
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(spec: FieldSpec) -> Self {
        let order = spec.order();
        let group = (order - 1) as usize;
        let mut exp = vec![0 as Symbol; 2 * group.max(1)];
        let mut log = vec![0u32; order as usize];

        let step = |x: u32, g: u32| -> u32 {
            match spec.kind {
                FieldKind::Prime => x * g % order,
                FieldKind::BinaryExtension => {
                    // g is always 2 here: shift and reduce.
                    let y = x << 1;
                    if y & order != 0 {
                        y ^ spec.polynomial
                    } else {
                        y
                    }
                }
            }
        };

        let generator = match spec.kind {
            FieldKind::BinaryExtension if order == 2 => 1,
            FieldKind::BinaryExtension => 2,
            FieldKind::Prime => (1..order.max(2))
                .find(|&g| {
                    let mut x = 1u32;
                    for i in 0..group {
                        if x == 1 && i > 0 {
                            return false;
                        }
                        x = x * g % order;
                    }
                    x == 1
                })
                .expect("every prime field has a primitive root"),
        };

        let mut x = 1u32;
        for i in 0..group {
            exp[i] = x as Symbol;
            exp[i + group] = x as Symbol;
            log[x as usize] = i as u32;
            x = if order == 2 { 1 } else { step(x, generator) };
        }
        assert_eq!(x, 1, "reduction polynomial for {spec} is not primitive");

        Self {
            tables: Arc::new(Tables { spec, order, exp, log }),
        }
    }

    pub fn spec(&self) -> FieldSpec {
        self.tables.spec
    }

    pub fn order(&self) -> u32 {
        self.tables.order
    }

    pub fn is_binary(&self) -> bool {
        self.tables.spec.kind == FieldKind::BinaryExtension
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        if self.is_binary() {
            a ^ b
        } else {
            ((a as u32 + b as u32) % self.tables.order) as Symbol
        }
    }

    #[inline]
    pub fn neg(&self, a: Symbol) -> Symbol {
        if self.is_binary() || a == 0 {
            a
        } else {
            (self.tables.order - a as u32) as Symbol
        }
    }

    #[inline]
    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        if a == 0 || b == 0 {
            return 0;
        }
        let t = &*self.tables;
        t.exp[(t.log[a as usize] + t.log[b as usize]) as usize]
    }

    #[inline]
    pub fn inv(&self, a: Symbol) -> Result<Symbol> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        let t = &*self.tables;
        Ok(t.exp[(t.order - 1 - t.log[a as usize]) as usize])
    }

    #[inline]
    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Symbol, e: u64) -> Symbol {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let t = &*self.tables;
        let group = (t.order - 1) as u64;
        t.exp[((t.log[a as usize] as u64 * (e % group)) % group) as usize]
    }

    /// `a * x + y`, the inner step of every dot product.
    #[inline]
    pub fn mul_add(&self, acc: Symbol, a: Symbol, x: Symbol) -> Symbol {
        self.add(acc, self.mul(a, x))
    }

    pub fn dot(&self, a: &[Symbol], b: &[Symbol]) -> Symbol {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).fold(0, |acc, (&x, &y)| self.mul_add(acc, x, y))
    }

    pub fn contains(&self, v: u64) -> bool {
        v < self.tables.order as u64
    }

    pub fn element(&self, value: u64) -> Result<FieldElement> {
        if !self.contains(value) {
            return Err(Error::OutOfRange {
                value,
                order: self.order(),
            });
        }
        Ok(FieldElement {
            value: value as Symbol,
            field: self.clone(),
        })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            value: 0,
            field: self.clone(),
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            value: 1,
            field: self.clone(),
        }
    }

    /// All elements in ascending integer order.
    pub fn elements(&self) -> impl Iterator<Item = Symbol> {
        (0..self.order()).map(|v| v as Symbol)
    }
}

/// A field element that remembers its field.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    value: Symbol,
    field: Field,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.value, self.field.spec())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl FieldElement {
    pub fn value(&self) -> Symbol {
        self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.spec(), other.field.spec()));
        }
        Ok(())
    }

    fn with(&self, value: Symbol) -> Self {
        Self {
            value,
            field: self.field.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(self.field.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(self.field.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(self.field.mul(self.value, other.value)))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(self.field.div(self.value, other.value)?))
    }

    pub fn neg(&self) -> Self {
        self.with(self.field.neg(self.value))
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(self.with(self.field.inv(self.value)?))
    }

    pub fn pow(&self, e: u64) -> Self {
        self.with(self.field.pow(self.value, e))
    }
}
