//! Arithmetic in binary extension fields GF(2^m), 1 <= m <= 16.
//!
//! Elements are stored as integers whose bit `i` is the coefficient of `x^i`
//! in the polynomial basis. Multiplication goes through log/antilog tables
//! built once per field from the reduction polynomial; the carry-less
//! reference product [`GfField::clmul_reduce`] is kept for table construction
//! and as an independent check.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// Errors raised by field construction and checked arithmetic.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("extension degree {0} outside supported range 1..=16")]
    UnsupportedDegree(u32),
    #[error("reduction polynomial {poly:#x} does not have degree {degree}")]
    WrongPolyDegree { poly: u32, degree: u32 },
    #[error("reduction polynomial {0:#x} is reducible over GF(2)")]
    Reducible(u32),
    #[error("value {value} is not an element of GF(2^{degree})")]
    NotInField { value: u32, degree: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// Built-in primitive reduction polynomials, indexed by degree.
const DEFAULT_POLYS: [u32; 17] = [
    0, 0b11, 0b111, 0b1011, 0b1_0011, 0b10_0101, 0b100_0011, 0b1000_1001, 0x11d, 0x211, 0x409,
    0x805, 0x1053, 0x201b, 0x4443, 0x8003, 0x1_100b,
];

/// Returns the built-in reduction polynomial for degree `m`.
pub fn default_poly(m: u32) -> Result<u32, GfError> {
    if m == 0 || m > MAX_DEGREE {
        return Err(GfError::UnsupportedDegree(m));
    }
    Ok(DEFAULT_POLYS[m as usize])
}

/// An element of some GF(2^m). Membership is checked by the owning field.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GfElement(u16);

impl GfElement {
    pub const ZERO: GfElement = GfElement(0);
    pub const ONE: GfElement = GfElement(1);

    pub fn value(self) -> u16 {
        self.0
    }

    /// Unchecked constructor for values already known to be in range.
    #[inline]
    pub(crate) fn from_raw(v: u16) -> Self {
        GfElement(v)
    }
}

impl fmt::Debug for GfElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

struct Tables {
    exp: Vec<u16>,
    log: Vec<u16>,
}

/// The field GF(2^m) defined by an irreducible reduction polynomial.
#[derive(Clone)]
pub struct GfField {
    degree: u32,
    poly: u32,
    tables: Arc<Tables>,
}

impl fmt::Debug for GfField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GfField")
            .field("degree", &self.degree)
            .field("poly", &format_args!("{:#x}", self.poly))
            .finish()
    }
}

impl PartialEq for GfField {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.poly == other.poly
    }
}

impl Eq for GfField {}

impl GfField {
    /// GF(2^m) with the built-in polynomial for `m`.
    pub fn new(degree: u32) -> Result<Self, GfError> {
        Self::with_poly(degree, default_poly(degree)?)
    }

    /// GF(2^m) with an explicit reduction polynomial given as an (m+1)-bit mask.
    pub fn with_poly(degree: u32, poly: u32) -> Result<Self, GfError> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(GfError::UnsupportedDegree(degree));
        }
        if poly >> degree != 1 {
            return Err(GfError::WrongPolyDegree { poly, degree });
        }
        if !is_irreducible(poly) {
            return Err(GfError::Reducible(poly));
        }
        let tables = build_tables(degree, poly);
        Ok(GfField {
            degree,
            poly,
            tables: Arc::new(tables),
        })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Field order q = 2^m.
    pub fn order(&self) -> usize {
        1usize << self.degree
    }

    pub fn contains(&self, a: GfElement) -> bool {
        (a.0 as usize) < self.order()
    }

    pub fn element(&self, value: u32) -> Result<GfElement, GfError> {
        if (value as usize) < self.order() {
            Ok(GfElement(value as u16))
        } else {
            Err(GfError::NotInField {
                value,
                degree: self.degree,
            })
        }
    }

    /// All field elements in integer order 0, 1, ..., q-1.
    pub fn elements(&self) -> impl Iterator<Item = GfElement> {
        (0..self.order()).map(|v| GfElement(v as u16))
    }

    fn check(&self, a: GfElement) -> Result<(), GfError> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(GfError::NotInField {
                value: a.0 as u32,
                degree: self.degree,
            })
        }
    }

    pub fn add(&self, a: GfElement, b: GfElement) -> Result<GfElement, GfError> {
        self.check(a)?;
        self.check(b)?;
        Ok(GfElement(a.0 ^ b.0))
    }

    pub fn mul(&self, a: GfElement, b: GfElement) -> Result<GfElement, GfError> {
        self.check(a)?;
        self.check(b)?;
        Ok(GfElement(self.mul_raw(a.0, b.0)))
    }

    pub fn inv(&self, a: GfElement) -> Result<GfElement, GfError> {
        self.check(a)?;
        if a.0 == 0 {
            return Err(GfError::ZeroInverse);
        }
        Ok(GfElement(self.inv_raw(a.0)))
    }

    /// Table-driven product of two in-range raw values.
    #[inline]
    pub(crate) fn mul_raw(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        let t = &*self.tables;
        t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize]
    }

    #[inline]
    pub(crate) fn inv_raw(&self, a: u16) -> u16 {
        debug_assert!(a != 0);
        let t = &*self.tables;
        let q1 = self.order() - 1;
        t.exp[(q1 - t.log[a as usize] as usize) % q1]
    }

    /// Carry-less product followed by long division by the reduction polynomial.
    pub fn clmul_reduce(&self, a: u32, b: u32) -> u32 {
        clmul_reduce(a, b, self.poly, self.degree)
    }
}

fn clmul_reduce(a: u32, b: u32, poly: u32, degree: u32) -> u32 {
    let mut acc: u64 = 0;
    for i in 0..degree {
        if (b >> i) & 1 == 1 {
            acc ^= (a as u64) << i;
        }
    }
    for bit in (degree..2 * degree).rev() {
        if (acc >> bit) & 1 == 1 {
            acc ^= (poly as u64) << (bit - degree);
        }
    }
    acc as u32
}

fn poly_degree(p: u32) -> u32 {
    31 - p.leading_zeros()
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b);
    while a != 0 && poly_degree(a) >= db {
        a ^= b << (poly_degree(a) - db);
    }
    a
}

/// Trial division by every polynomial of degree at most deg/2.
pub fn is_irreducible(poly: u32) -> bool {
    if poly < 2 {
        return false;
    }
    let deg = poly_degree(poly);
    for d in 1..=deg / 2 {
        for g in (1u32 << d)..(1u32 << (d + 1)) {
            if poly_rem(poly, g) == 0 {
                return false;
            }
        }
    }
    true
}

fn build_tables(degree: u32, poly: u32) -> Tables {
    let q = 1usize << degree;
    let q1 = q - 1;
    // Irreducible is not necessarily primitive, so search for a generator.
    let generator = (1..q as u32)
        .find(|&g| multiplicative_order(g, poly, degree) == q1)
        .expect("multiplicative group of a finite field is cyclic");
    let mut exp = vec![0u16; 2 * q1.max(1)];
    let mut log = vec![0u16; q];
    let mut x = 1u32;
    for i in 0..q1 {
        exp[i] = x as u16;
        log[x as usize] = i as u16;
        x = clmul_reduce(x, generator, poly, degree);
    }
    for i in q1..2 * q1 {
        exp[i] = exp[i - q1];
    }
    Tables { exp, log }
}

fn multiplicative_order(g: u32, poly: u32, degree: u32) -> usize {
    let mut x = g;
    let mut order = 1;
    while x != 1 {
        x = clmul_reduce(x, g, poly, degree);
        order += 1;
        if order > (1usize << degree) {
            return 0;
        }
    }
    order
}
