//! Bytes to field symbols and back.
//!
//! Every symbol carries `floor(log2 q)` payload bits, so any bit pattern is
//! a valid field element. Over GF(2) the bits of each byte are taken most
//! significant first. Over larger fields the input is read as a
//! little-endian bit stream: bit `i` of the stream is bit `i % 8` of byte
//! `i / 8`, and each symbol is the next `w` bits with the first one as its
//! least significant bit. For `w = 8` a symbol is a byte; for `w = 16` it is
//! a little-endian `u16`.
//!
//! Chunk files hold `α` symbols: GF(2) symbols are bit-packed eight per
//! byte (MSB first, zero-filled); otherwise each symbol takes
//! `ceil(bits(q - 1) / 8)` little-endian bytes.

use regen_core::{FieldSpec, Symbol};

fn is_gf2(spec: FieldSpec) -> bool {
    spec.order() == 2
}

/// Number of symbols needed to carry `len` bytes.
pub fn symbol_count(spec: FieldSpec, len: usize) -> usize {
    let w = spec.payload_bits() as usize;
    (len * 8).div_ceil(w)
}

pub fn bytes_to_symbols(spec: FieldSpec, bytes: &[u8]) -> Vec<Symbol> {
    if is_gf2(spec) {
        return bytes
            .iter()
            .flat_map(|&b| (0..8).rev().map(move |i| Symbol::from(b >> i & 1)))
            .collect();
    }
    let w = spec.payload_bits();
    let count = symbol_count(spec, bytes.len());
    let mut out = Vec::with_capacity(count);
    let mut acc: u32 = 0;
    let mut have = 0u32;
    let mut input = bytes.iter();
    for _ in 0..count {
        while have < w {
            acc |= u32::from(input.next().copied().unwrap_or(0)) << have;
            have += 8;
        }
        out.push((acc & ((1 << w) - 1)) as Symbol);
        acc >>= w;
        have -= w;
    }
    out
}

/// Inverse of [`bytes_to_symbols`]; symbols past `len` bytes are padding.
pub fn symbols_to_bytes(spec: FieldSpec, symbols: &[Symbol], len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    if is_gf2(spec) {
        for byte in symbols.chunks(8).take(len) {
            let mut b = 0u8;
            for (i, &s) in byte.iter().enumerate() {
                b |= ((s & 1) as u8) << (7 - i);
            }
            out.push(b);
        }
        out.resize(len, 0);
        return out;
    }
    let w = spec.payload_bits();
    let mut acc: u32 = 0;
    let mut have = 0u32;
    for &s in symbols {
        if out.len() == len {
            break;
        }
        acc |= u32::from(s) << have;
        have += w;
        while have >= 8 && out.len() < len {
            out.push(acc as u8);
            acc >>= 8;
            have -= 8;
        }
    }
    out.resize(len, 0);
    out
}

/// Bytes per stored symbol in a chunk file; `0` means bit-packed.
pub fn symbol_width(spec: FieldSpec) -> usize {
    if is_gf2(spec) {
        0
    } else {
        (spec.symbol_bits() as usize).div_ceil(8)
    }
}

/// Size in bytes of a chunk file holding `alpha` symbols.
pub fn chunk_file_len(spec: FieldSpec, alpha: usize) -> usize {
    match symbol_width(spec) {
        0 => alpha.div_ceil(8),
        w => alpha * w,
    }
}

pub fn encode_chunk(spec: FieldSpec, symbols: &[Symbol]) -> Vec<u8> {
    match symbol_width(spec) {
        0 => {
            let mut out = vec![0u8; symbols.len().div_ceil(8)];
            for (i, &s) in symbols.iter().enumerate() {
                out[i / 8] |= ((s & 1) as u8) << (7 - i % 8);
            }
            out
        }
        1 => symbols.iter().map(|&s| s as u8).collect(),
        _ => symbols.iter().flat_map(|s| s.to_le_bytes()).collect(),
    }
}

/// Reads `alpha` symbols back; `None` on a length mismatch or a value
/// outside the field.
pub fn decode_chunk(spec: FieldSpec, bytes: &[u8], alpha: usize) -> Option<Vec<Symbol>> {
    if bytes.len() != chunk_file_len(spec, alpha) {
        return None;
    }
    let symbols: Vec<Symbol> = match symbol_width(spec) {
        0 => (0..alpha)
            .map(|i| Symbol::from(bytes[i / 8] >> (7 - i % 8) & 1))
            .collect(),
        1 => bytes.iter().map(|&b| Symbol::from(b)).collect(),
        _ => bytes.chunks(2).map(|c| Symbol::from_le_bytes([c[0], c[1]])).collect(),
    };
    symbols.iter().all(|&s| u32::from(s) < spec.order()).then_some(symbols)
}
