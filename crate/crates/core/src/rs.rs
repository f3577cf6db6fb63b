//! Reed-Solomon evaluation codes of full length q over GF(q).
//!
//! A message `(m_0, ..., m_{k-1})` is read as the polynomial
//! `m(x) = m_0 + m_1 x + ... + m_{k-1} x^{k-1}` and the codeword is its value at
//! every field element, enumerated by integer value `0, 1, ..., q-1`. Any `k`
//! evaluations determine `m`, so the code is MDS with distance `q - k + 1`.
//!
//! Erasure decoding interpolates through the first `k` unerased positions
//! (Newton form, O(k^2)) and re-evaluates; the remaining unerased positions
//! are used as a consistency check.

use thiserror::Error;

use crate::gf::{GfElement, GfError, GfField};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RsError {
    #[error("dimension {dimension} exceeds code length {length}")]
    DimensionTooLarge { dimension: usize, length: usize },
    #[error("expected {expected} symbols, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("only {available} unerased symbols, at least {needed} required")]
    UnrecoverableErasure { available: usize, needed: usize },
    #[error("unerased symbol at position {position} contradicts the interpolated codeword")]
    Inconsistent { position: usize },
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Result of a successful erasure decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasureDecoding {
    pub message: Vec<GfElement>,
    pub codeword: Vec<GfElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsCode {
    field: GfField,
    dimension: usize,
}

impl RsCode {
    pub fn new(field: GfField, dimension: usize) -> Result<Self, RsError> {
        let length = field.order();
        if dimension > length {
            return Err(RsError::DimensionTooLarge { dimension, length });
        }
        Ok(RsCode { field, dimension })
    }

    pub fn field(&self) -> &GfField {
        &self.field
    }

    pub fn length(&self) -> usize {
        self.field.order()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn min_distance(&self) -> usize {
        self.length() - self.dimension + 1
    }

    pub fn encode(&self, message: &[GfElement]) -> Result<Vec<GfElement>, RsError> {
        if message.len() != self.dimension {
            return Err(RsError::LengthMismatch {
                expected: self.dimension,
                got: message.len(),
            });
        }
        for &m in message {
            if !self.field.contains(m) {
                return Err(GfError::NotInField {
                    value: m.value() as u32,
                    degree: self.field.degree(),
                }
                .into());
            }
        }
        let coeffs: Vec<u16> = message.iter().map(|m| m.value()).collect();
        Ok((0..self.length())
            .map(|x| GfElement::from_raw(horner(&self.field, &coeffs, x as u16)))
            .collect())
    }

    pub fn erasure_decode(&self, received: &[Option<GfElement>]) -> Result<ErasureDecoding, RsError> {
        let q = self.length();
        if received.len() != q {
            return Err(RsError::LengthMismatch {
                expected: q,
                got: received.len(),
            });
        }
        let known: Vec<(u16, u16)> = received
            .iter()
            .enumerate()
            .filter_map(|(x, r)| r.map(|v| (x as u16, v.value())))
            .collect();
        if known.len() < self.dimension {
            return Err(RsError::UnrecoverableErasure {
                available: known.len(),
                needed: self.dimension,
            });
        }
        for &(_, v) in &known {
            if v as usize >= q {
                return Err(GfError::NotInField {
                    value: v as u32,
                    degree: self.field.degree(),
                }
                .into());
            }
        }
        let coeffs = interpolate(&self.field, &known[..self.dimension]);
        let codeword: Vec<GfElement> = (0..q)
            .map(|x| GfElement::from_raw(horner(&self.field, &coeffs, x as u16)))
            .collect();
        for &(x, v) in &known[self.dimension..] {
            if codeword[x as usize].value() != v {
                return Err(RsError::Inconsistent { position: x as usize });
            }
        }
        Ok(ErasureDecoding {
            message: coeffs.into_iter().map(GfElement::from_raw).collect(),
            codeword,
        })
    }
}

fn horner(field: &GfField, coeffs: &[u16], x: u16) -> u16 {
    coeffs
        .iter()
        .rev()
        .fold(0u16, |acc, &c| field.mul_raw(acc, x) ^ c)
}

/// Monomial coefficients of the unique polynomial of degree < points.len()
/// through the given (x, y) pairs. The x values must be distinct.
fn interpolate(field: &GfField, points: &[(u16, u16)]) -> Vec<u16> {
    let k = points.len();
    if k == 0 {
        return Vec::new();
    }
    let mut dd: Vec<u16> = points.iter().map(|p| p.1).collect();
    for level in 1..k {
        for i in (level..k).rev() {
            let num = dd[i] ^ dd[i - 1];
            let den = points[i].0 ^ points[i - level].0;
            dd[i] = field.mul_raw(num, field.inv_raw(den));
        }
    }
    // Expand the Newton form; subtraction is XOR in characteristic 2.
    let mut poly = vec![dd[k - 1]];
    for j in (0..k - 1).rev() {
        let xj = points[j].0;
        let mut next = vec![0u16; poly.len() + 1];
        for (d, &c) in poly.iter().enumerate() {
            next[d + 1] ^= c;
            next[d] ^= field.mul_raw(c, xj);
        }
        next[0] ^= dd[j];
        poly = next;
    }
    poly.truncate(k);
    poly
}
