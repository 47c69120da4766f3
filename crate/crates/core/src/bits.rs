//! Fixed-width bit strings in network order.
//!
//! A [`Bits`] value is an unsigned integer of `width` bits stored big-endian
//! and right-aligned in `ceil(width / 8)` octets. Bit index 0 is the most
//! significant bit of the value, which matches how header fields and lookup
//! keys are laid out on the wire.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits {
    width: usize,
    bytes: Vec<u8>,
}

impl Bits {
    pub fn zero(width: usize) -> Self {
        Bits {
            width,
            bytes: vec![0; width.div_ceil(8)],
        }
    }

    /// Builds a value from the low `width` bits of `value`. Higher bits are
    /// discarded.
    pub fn from_u128(width: usize, value: u128) -> Self {
        let mut b = Bits::zero(width);
        let take = width.min(128);
        let v = if take == 128 {
            value
        } else {
            value & ((1u128 << take) - 1)
        };
        b.set_bits(width - take, take, v);
        b
    }

    /// Interprets `bytes` as a `8 * bytes.len()`-bit value.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Bits {
            width: bytes.len() * 8,
            bytes: bytes.to_vec(),
        }
    }

    /// Parses a hex string (optional `0x` prefix, `_` separators allowed) into
    /// a value of the given width. Fails if the value does not fit.
    pub fn from_hex(width: usize, text: &str) -> Option<Self> {
        let t = text.trim();
        let t = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).unwrap_or(t);
        let digits: Vec<u8> = t
            .chars()
            .filter(|c| *c != '_')
            .map(|c| c.to_digit(16).map(|d| d as u8))
            .collect::<Option<_>>()?;
        if digits.is_empty() {
            return None;
        }
        let mut out = Bits::zero(width);
        // Walk nibbles from the least significant end.
        for (i, d) in digits.iter().rev().enumerate() {
            if *d == 0 {
                continue;
            }
            for b in 0..4 {
                if d >> b & 1 == 1 {
                    let lsb_index = i * 4 + b;
                    if lsb_index >= width {
                        return None;
                    }
                    out.set_bit(width - 1 - lsb_index, true);
                }
            }
        }
        Some(out)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Raw big-endian storage, right-aligned.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    fn pad(&self) -> usize {
        self.bytes.len() * 8 - self.width
    }

    pub fn bit(&self, index: usize) -> bool {
        assert!(index < self.width, "bit {index} out of range {}", self.width);
        let abs = self.pad() + index;
        self.bytes[abs / 8] >> (7 - abs % 8) & 1 == 1
    }

    pub fn set_bit(&mut self, index: usize, value: bool) {
        assert!(index < self.width, "bit {index} out of range {}", self.width);
        let abs = self.pad() + index;
        let m = 1u8 << (7 - abs % 8);
        if value {
            self.bytes[abs / 8] |= m;
        } else {
            self.bytes[abs / 8] &= !m;
        }
    }

    /// Reads `len <= 128` bits starting at MSB-first bit `offset`.
    pub fn get_bits(&self, offset: usize, len: usize) -> u128 {
        assert!(len <= 128 && offset + len <= self.width);
        let mut v = 0u128;
        let mut i = 0;
        while i < len {
            let abs = self.pad() + offset + i;
            // Fast path for byte-aligned runs.
            if abs.is_multiple_of(8) && len - i >= 8 {
                v = v << 8 | self.bytes[abs / 8] as u128;
                i += 8;
            } else {
                v = v << 1 | (self.bytes[abs / 8] >> (7 - abs % 8) & 1) as u128;
                i += 1;
            }
        }
        v
    }

    /// Writes the low `len <= 128` bits of `value` at MSB-first bit `offset`.
    pub fn set_bits(&mut self, offset: usize, len: usize, value: u128) {
        assert!(len <= 128 && offset + len <= self.width);
        for i in 0..len {
            let bit = value >> (len - 1 - i) & 1 == 1;
            self.set_bit(offset + i, bit);
        }
    }

    /// Value as an integer; panics if wider than 128 bits.
    pub fn to_u128(&self) -> u128 {
        self.get_bits(0, self.width)
    }

    /// Concatenates `self` (high part) with `other` (low part).
    pub fn concat(&self, other: &Bits) -> Bits {
        let mut out = Bits::zero(self.width + other.width);
        for i in 0..self.width {
            if self.bit(i) {
                out.set_bit(i, true);
            }
        }
        for i in 0..other.width {
            if other.bit(i) {
                out.set_bit(self.width + i, true);
            }
        }
        out
    }

    pub fn and(&self, other: &Bits) -> Bits {
        assert_eq!(self.width, other.width);
        Bits {
            width: self.width,
            bytes: self.bytes.iter().zip(&other.bytes).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn or(&self, other: &Bits) -> Bits {
        assert_eq!(self.width, other.width);
        Bits {
            width: self.width,
            bytes: self.bytes.iter().zip(&other.bytes).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn not(&self) -> Bits {
        let mut out = Bits {
            width: self.width,
            bytes: self.bytes.iter().map(|b| !b).collect(),
        };
        out.clear_pad();
        out
    }

    fn clear_pad(&mut self) {
        let pad = self.pad();
        if pad > 0 {
            self.bytes[0] &= 0xff >> pad;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.bytes.iter().all(|b| *b == 0)
    }

    /// A mask with the top `len` bits set.
    pub fn prefix_mask(width: usize, len: usize) -> Bits {
        assert!(len <= width);
        let mut m = Bits::zero(width);
        for i in 0..len {
            m.set_bit(i, true);
        }
        m
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(2 + self.bytes.len() * 2);
        s.push_str("0x");
        for b in &self.bytes {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits<{}>({})", self.width, self.to_hex())
    }
}

/// Lowercase hex of an octet string without prefix.
pub fn encode_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Decodes an even-length hex string without prefix.
pub fn decode_hex(text: &str) -> Option<Vec<u8>> {
    if !text.len().is_multiple_of(2) {
        return None;
    }
    (0..text.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(text.get(i..i + 2)?, 16).ok())
        .collect()
}
