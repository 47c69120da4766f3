//! Primitive action interpreter.
//!
//! Arithmetic wraps at the destination width. Operands narrower than the
//! destination are zero-extended. Shift amounts are constants; there is no
//! division and no variable shift.

use thiserror::Error;

use crate::bits::Bits;
use crate::packet::ParsedPacket;
use crate::spec::{ActionProgram, FieldRef, Operand, PipelineSpec, Relation, Step};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("access to a field of invalid header {header}")]
    InvalidFieldAccess { header: usize },
    #[error("IPv4 checksum needs exactly 20 octets, got {0}")]
    ChecksumLength(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Src {
    Field(FieldRef),
    Data { offset: usize, width: usize },
    Const(u128),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    And,
    Or,
    Xor,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Op {
    Bin {
        op: BinOp,
        dst: FieldRef,
        a: Src,
        b: Src,
    },
    Not {
        dst: FieldRef,
        a: Src,
    },
    Shl {
        dst: FieldRef,
        a: Src,
        amount: u32,
    },
    Shr {
        dst: FieldRef,
        a: Src,
        amount: u32,
    },
    Set {
        dst: FieldRef,
        a: Src,
    },
    SetValid(usize),
    SetInvalid(usize),
    Select {
        dst: FieldRef,
        lhs: Src,
        rel: Relation,
        rhs: Src,
        then: Src,
        otherwise: Src,
    },
    Checksum {
        dst: FieldRef,
        header: usize,
    },
}

/// An action program with every operand bound to a location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledAction {
    pub name: String,
    pub data_bits: usize,
    ops: Vec<Op>,
}

fn mask(width: usize) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

impl CompiledAction {
    /// Binds a validated action program against the spec.
    pub fn compile(spec: &PipelineSpec, prog: &ActionProgram) -> Self {
        let src = |t: &str| match Operand::parse(t).expect("validated operand") {
            Operand::Const(v) => Src::Const(v),
            Operand::Data(p) => {
                let (offset, width) = prog.param(&p).expect("validated parameter");
                Src::Data { offset, width }
            }
            Operand::Field(..) => Src::Field(spec.resolve_field(t).expect("validated field")),
        };
        let dst = |t: &str| spec.resolve_field(t).expect("validated destination");
        let hdr = |h: &str| spec.header_index(h).expect("validated header");
        let ops = prog
            .steps
            .iter()
            .map(|s| match s {
                Step::Add { dst: d, a, b } => Op::Bin {
                    op: BinOp::Add,
                    dst: dst(d),
                    a: src(a),
                    b: src(b),
                },
                Step::Sub { dst: d, a, b } => Op::Bin {
                    op: BinOp::Sub,
                    dst: dst(d),
                    a: src(a),
                    b: src(b),
                },
                Step::And { dst: d, a, b } => Op::Bin {
                    op: BinOp::And,
                    dst: dst(d),
                    a: src(a),
                    b: src(b),
                },
                Step::Or { dst: d, a, b } => Op::Bin {
                    op: BinOp::Or,
                    dst: dst(d),
                    a: src(a),
                    b: src(b),
                },
                Step::Xor { dst: d, a, b } => Op::Bin {
                    op: BinOp::Xor,
                    dst: dst(d),
                    a: src(a),
                    b: src(b),
                },
                Step::Not { dst: d, a } => Op::Not { dst: dst(d), a: src(a) },
                Step::ShlConst { dst: d, a, amount } => Op::Shl {
                    dst: dst(d),
                    a: src(a),
                    amount: *amount,
                },
                Step::ShrConst { dst: d, a, amount } => Op::Shr {
                    dst: dst(d),
                    a: src(a),
                    amount: *amount,
                },
                Step::SetField { dst: d, a } => Op::Set { dst: dst(d), a: src(a) },
                Step::SetValid { header } => Op::SetValid(hdr(header)),
                Step::SetInvalid { header } => Op::SetInvalid(hdr(header)),
                Step::Select {
                    dst: d,
                    cond,
                    then,
                    otherwise,
                } => Op::Select {
                    dst: dst(d),
                    lhs: src(&cond.lhs),
                    rel: cond.rel,
                    rhs: src(&cond.rhs),
                    then: src(then),
                    otherwise: src(otherwise),
                },
                Step::ChecksumIpv4 { dst: d, header } => Op::Checksum {
                    dst: dst(d),
                    header: hdr(header),
                },
            })
            .collect();
        CompiledAction {
            name: prog.name.clone(),
            data_bits: prog.data_bits(),
            ops,
        }
    }

    /// Applies the steps to a copy of `pp`.
    pub fn execute(&self, pp: &ParsedPacket, data: &Bits) -> Result<ParsedPacket, ActionError> {
        let mut out = pp.clone();
        self.execute_in_place(&mut out, data)?;
        Ok(out)
    }

    /// Applies the steps in order; each step sees its predecessors' writes.
    /// On error the packet may be partially updated and should be dropped.
    pub fn execute_in_place(&self, pp: &mut ParsedPacket, data: &Bits) -> Result<(), ActionError> {
        let read = |pp: &ParsedPacket, s: Src| -> Result<u128, ActionError> {
            match s {
                Src::Const(v) => Ok(v),
                Src::Data { offset, width } => Ok(data.get_bits(offset, width)),
                Src::Field(f) => {
                    if pp.is_valid(f.header) {
                        Ok(pp.read(f))
                    } else {
                        Err(ActionError::InvalidFieldAccess { header: f.header })
                    }
                }
            }
        };
        let write = |pp: &mut ParsedPacket, f: FieldRef, v: u128| -> Result<(), ActionError> {
            if !pp.is_valid(f.header) {
                return Err(ActionError::InvalidFieldAccess { header: f.header });
            }
            pp.write(f, v & mask(f.width));
            Ok(())
        };
        for op in &self.ops {
            match *op {
                Op::Bin { op, dst, a, b } => {
                    let (x, y) = (read(pp, a)?, read(pp, b)?);
                    let v = match op {
                        BinOp::Add => x.wrapping_add(y),
                        BinOp::Sub => x.wrapping_sub(y),
                        BinOp::And => x & y,
                        BinOp::Or => x | y,
                        BinOp::Xor => x ^ y,
                    };
                    write(pp, dst, v)?;
                }
                Op::Not { dst, a } => {
                    let v = !read(pp, a)?;
                    write(pp, dst, v)?;
                }
                Op::Shl { dst, a, amount } => {
                    let v = read(pp, a)?.checked_shl(amount).unwrap_or(0);
                    write(pp, dst, v)?;
                }
                Op::Shr { dst, a, amount } => {
                    let v = read(pp, a)?.checked_shr(amount).unwrap_or(0);
                    write(pp, dst, v)?;
                }
                Op::Set { dst, a } => {
                    let v = read(pp, a)?;
                    write(pp, dst, v)?;
                }
                Op::SetValid(h) => pp.valid[h] = true,
                Op::SetInvalid(h) => pp.valid[h] = false,
                Op::Select {
                    dst,
                    lhs,
                    rel,
                    rhs,
                    then,
                    otherwise,
                } => {
                    let chosen = if rel.holds(read(pp, lhs)?, read(pp, rhs)?) {
                        then
                    } else {
                        otherwise
                    };
                    let v = read(pp, chosen)?;
                    write(pp, dst, v)?;
                }
                Op::Checksum { dst, header } => {
                    if !pp.is_valid(header) {
                        return Err(ActionError::InvalidFieldAccess { header });
                    }
                    let mut h = pp.headers[header].clone();
                    if dst.header == header {
                        h.set_bits(dst.offset, dst.width, 0);
                    }
                    let sum = ipv4_checksum(h.as_bytes())?;
                    write(pp, dst, sum as u128)?;
                }
            }
        }
        Ok(())
    }
}

/// Internet checksum of a 20-octet IPv4 header whose checksum field is zero.
pub fn ipv4_checksum(header: &[u8]) -> Result<u16, ActionError> {
    if header.len() != 20 {
        return Err(ActionError::ChecksumLength(header.len()));
    }
    Ok(!ones_complement_sum(header))
}

/// Folded ones-complement sum of big-endian 16-bit words.
pub fn ones_complement_sum(bytes: &[u8]) -> u16 {
    let mut sum: u32 = bytes
        .chunks(2)
        .map(|c| u16::from_be_bytes([c[0], *c.get(1).unwrap_or(&0)]) as u32)
        .sum();
    while sum > 0xffff {
        sum = (sum & 0xffff) + (sum >> 16);
    }
    sum as u16
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksum_zero_header() {
        assert_eq!(ipv4_checksum(&[0; 20]).unwrap(), 0xffff);
    }

    #[test]
    fn checksum_rejects_wrong_length() {
        assert_eq!(ipv4_checksum(&[0; 19]), Err(ActionError::ChecksumLength(19)));
        assert_eq!(ipv4_checksum(&[0; 24]), Err(ActionError::ChecksumLength(24)));
    }

    #[test]
    fn checksum_self_verifies() {
        let mut h = [
            0x45, 0x00, 0x00, 0x73, 0x00, 0x00, 0x40, 0x00, 0x40, 0x11, 0x00, 0x00, 0xc0, 0xa8, 0x00, 0x01, 0xc0, 0xa8,
            0x00, 0xc7,
        ];
        let c = ipv4_checksum(&h).unwrap();
        h[10..12].copy_from_slice(&c.to_be_bytes());
        assert_eq!(ones_complement_sum(&h), 0xffff);
    }
}
