//! Bech32 (BIP-173) encoding for version-0 segwit addresses.

pub const CHARSET: &[u8; 32] = b"qpzry9x8gf2tvdw0s3jn54khce6mua7l";

const GENERATORS: [u32; 5] = [0x3b6a57b2, 0x26508e6d, 0x1ea119fa, 0x3d4233dd, 0x2a1462b3];

const INVALID: u8 = 0xff;

const DECODE_MAP: [u8; 128] = {
    let mut map = [INVALID; 128];
    let mut i = 0;
    while i < CHARSET.len() {
        map[CHARSET[i] as usize] = i as u8;
        i += 1;
    }
    map
};

pub fn is_bech32_char(c: u8) -> bool {
    let c = c.to_ascii_lowercase();
    c < 128 && DECODE_MAP[c as usize] != INVALID
}

fn polymod(values: impl IntoIterator<Item = u8>) -> u32 {
    let mut chk: u32 = 1;
    for v in values {
        let top = chk >> 25;
        chk = ((chk & 0x1ff_ffff) << 5) ^ v as u32;
        for (i, g) in GENERATORS.iter().enumerate() {
            if (top >> i) & 1 == 1 {
                chk ^= g;
            }
        }
    }
    chk
}

fn hrp_expand(hrp: &str) -> impl Iterator<Item = u8> + '_ {
    hrp.bytes()
        .map(|b| b >> 5)
        .chain(std::iter::once(0))
        .chain(hrp.bytes().map(|b| b & 31))
}

fn create_checksum(hrp: &str, data: &[u8]) -> [u8; 6] {
    let values = hrp_expand(hrp)
        .chain(data.iter().copied())
        .chain([0u8; 6]);
    let pm = polymod(values) ^ 1;
    let mut out = [0u8; 6];
    for (i, o) in out.iter_mut().enumerate() {
        *o = ((pm >> (5 * (5 - i))) & 31) as u8;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bech32Error {
    Charset,
    Length,
    Checksum,
}

/// Splits a lower-case bech32 string into (hrp, 5-bit data without checksum).
pub fn decode(s: &str) -> Result<(String, Vec<u8>), Bech32Error> {
    if s.len() > 90 {
        return Err(Bech32Error::Length);
    }
    let sep = s.rfind('1').ok_or(Bech32Error::Charset)?;
    if sep == 0 || sep + 7 > s.len() {
        return Err(Bech32Error::Length);
    }
    let (hrp, rest) = (&s[..sep], &s[sep + 1..]);
    if hrp.bytes().any(|b| !(33..=126).contains(&b) || b.is_ascii_uppercase()) {
        return Err(Bech32Error::Charset);
    }
    let mut data = Vec::with_capacity(rest.len());
    for b in rest.bytes() {
        if b >= 128 || DECODE_MAP[b as usize] == INVALID {
            return Err(Bech32Error::Charset);
        }
        data.push(DECODE_MAP[b as usize]);
    }
    if polymod(hrp_expand(hrp).chain(data.iter().copied())) != 1 {
        return Err(Bech32Error::Checksum);
    }
    data.truncate(data.len() - 6);
    Ok((hrp.to_string(), data))
}

pub fn encode(hrp: &str, data: &[u8]) -> String {
    let checksum = create_checksum(hrp, data);
    let mut s = String::with_capacity(hrp.len() + 1 + data.len() + 6);
    s.push_str(hrp);
    s.push('1');
    s.extend(
        data.iter()
            .chain(checksum.iter())
            .map(|&d| CHARSET[d as usize] as char),
    );
    s
}

/// Regroups bits; `pad` controls whether a trailing partial group is allowed.
pub fn convert_bits(data: &[u8], from: u32, to: u32, pad: bool) -> Option<Vec<u8>> {
    let mut acc: u32 = 0;
    let mut bits: u32 = 0;
    let maxv: u32 = (1 << to) - 1;
    let mut out = Vec::with_capacity(data.len() * from as usize / to as usize + 1);
    for &value in data {
        let v = value as u32;
        if v >> from != 0 {
            return None;
        }
        acc = (acc << from) | v;
        bits += from;
        while bits >= to {
            bits -= to;
            out.push(((acc >> bits) & maxv) as u8);
        }
    }
    if pad {
        if bits > 0 {
            out.push(((acc << (to - bits)) & maxv) as u8);
        }
    } else if bits >= from || ((acc << (to - bits)) & maxv) != 0 {
        return None;
    }
    Some(out)
}

/// Encodes a segwit address from a witness version and program.
pub fn encode_segwit(hrp: &str, version: u8, program: &[u8]) -> String {
    let mut data = vec![version];
    data.extend(convert_bits(program, 8, 5, true).expect("8-bit input"));
    encode(hrp, &data)
}
