//! Minimal deterministic PNG encoder: 8-bit RGB, filter 0 scanlines, zlib
//! stream made of stored (uncompressed) deflate blocks. Values quantize as
//! round(v * 255); decoding the bytes reproduces the quantized image exactly.

use super::Image;
use crate::scalar::Real;

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1A, b'\n'];

pub fn encode_png<S: Real>(img: &Image<S>) -> Vec<u8> {
    let width = img.width;
    let height = img.height;

    // raw scanlines: one filter byte (0 = None) then RGB triples
    let mut raw = Vec::with_capacity((height as usize) * (1 + 3 * width as usize));
    for y in 0..height {
        raw.push(0u8);
        for x in 0..width {
            let px = img.pixel(x, y);
            for c in px {
                let v = (c.to_f64().clamp(0.0, 1.0) * 255.0).round();
                raw.push(v as u8);
            }
        }
    }

    let mut out = Vec::new();
    out.extend_from_slice(&PNG_SIGNATURE);

    let mut ihdr = Vec::with_capacity(13);
    ihdr.extend_from_slice(&width.to_be_bytes());
    ihdr.extend_from_slice(&height.to_be_bytes());
    ihdr.extend_from_slice(&[8, 2, 0, 0, 0]); // bit depth 8, color type RGB
    write_chunk(&mut out, b"IHDR", &ihdr);

    write_chunk(&mut out, b"IDAT", &zlib_stored(&raw));
    write_chunk(&mut out, b"IEND", &[]);
    out
}

fn write_chunk(out: &mut Vec<u8>, tag: &[u8; 4], data: &[u8]) {
    out.extend_from_slice(&(data.len() as u32).to_be_bytes());
    out.extend_from_slice(tag);
    out.extend_from_slice(data);
    let mut crc = Crc32::new();
    crc.update(tag);
    crc.update(data);
    out.extend_from_slice(&crc.finish().to_be_bytes());
}

/// zlib wrapper around stored deflate blocks (BTYPE=00, max 65535 bytes each).
fn zlib_stored(raw: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(raw.len() + raw.len() / 65_535 * 5 + 16);
    out.extend_from_slice(&[0x78, 0x01]); // CMF/FLG, 32K window, no preset dict
    let mut chunks = raw.chunks(65_535).peekable();
    if raw.is_empty() {
        out.extend_from_slice(&[0x01, 0x00, 0x00, 0xFF, 0xFF]);
    }
    while let Some(chunk) = chunks.next() {
        let last = chunks.peek().is_none();
        out.push(u8::from(last));
        let len = chunk.len() as u16;
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&(!len).to_le_bytes());
        out.extend_from_slice(chunk);
    }
    out.extend_from_slice(&adler32(raw).to_be_bytes());
    out
}

fn adler32(data: &[u8]) -> u32 {
    const MOD: u32 = 65_521;
    let mut a: u32 = 1;
    let mut b: u32 = 0;
    for &byte in data {
        a = (a + u32::from(byte)) % MOD;
        b = (b + a) % MOD;
    }
    (b << 16) | a
}

struct Crc32 {
    value: u32,
}

impl Crc32 {
    fn new() -> Self {
        Crc32 { value: 0xFFFF_FFFF }
    }

    fn update(&mut self, data: &[u8]) {
        for &byte in data {
            let idx = ((self.value ^ u32::from(byte)) & 0xFF) as usize;
            self.value = CRC_TABLE[idx] ^ (self.value >> 8);
        }
    }

    fn finish(self) -> u32 {
        self.value ^ 0xFFFF_FFFF
    }
}

const CRC_TABLE: [u32; 256] = build_crc_table();

const fn build_crc_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut n = 0usize;
    while n < 256 {
        let mut c = n as u32;
        let mut k = 0;
        while k < 8 {
            c = if c & 1 != 0 {
                0xEDB8_8320 ^ (c >> 1)
            } else {
                c >> 1
            };
            k += 1;
        }
        table[n] = c;
        n += 1;
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_white_pixel() {
        let img = Image::<f64>::filled(1, 1, [1.0, 1.0, 1.0]);
        let bytes = encode_png(&img);
        assert_eq!(&bytes[..8], &PNG_SIGNATURE);
        // raw stream is filter byte + 255,255,255; find it inside the stored block
        assert!(bytes
            .windows(4)
            .any(|w| w == [0u8, 255, 255, 255]));
    }

    #[test]
    fn encoding_is_deterministic() {
        let mut img = Image::<f64>::filled(9, 7, [0.0; 3]);
        for y in 0..7 {
            for x in 0..9 {
                let v = (x as f64) / 8.0;
                img.set_pixel(x, y, [v, 1.0 - v, 0.5]);
            }
        }
        assert_eq!(encode_png(&img), encode_png(&img));
    }

    #[test]
    fn known_crc_vector() {
        // CRC-32 of "123456789" is 0xCBF43926
        let mut crc = Crc32::new();
        crc.update(b"123456789");
        assert_eq!(crc.finish(), 0xCBF4_3926);
    }

    #[test]
    fn known_adler_vector() {
        // adler32 of "Wikipedia" is 0x11E60398
        assert_eq!(adler32(b"Wikipedia"), 0x11E6_0398);
    }
}
