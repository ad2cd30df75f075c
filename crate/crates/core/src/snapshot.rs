//! Field snapshots: a fixed self-describing header followed by raw
//! little-endian coefficient pairs. Write∘read is a bit-exact identity.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | content                               |
//! |--------|------|---------------------------------------|
//! | 0      | 5    | magic `NSLB1`                         |
//! | 5      | 4    | u32 grid size N                       |
//! | 9      | 4    | u32 component count                   |
//! | 13     | 1    | reality flag (1 = real-valued field)  |
//! | 14     | 4    | u32 label byte length L               |
//! | 18     | L    | UTF-8 label                           |
//! | 18+L   | 16·components·N³ | f64 (re, im) pairs, component-major, cells in row-major storage order |

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;

pub const MAGIC: &[u8; 5] = b"NSLB1";

pub fn write_snapshot(field: &SpectralField, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(18 + field.coeffs().len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(field.grid_n() as u32).to_le_bytes());
    out.extend_from_slice(&(field.components() as u32).to_le_bytes());
    out.push(field.is_real() as u8);
    let label = field.label().unwrap_or("").as_bytes();
    out.extend_from_slice(&(label.len() as u32).to_le_bytes());
    out.extend_from_slice(label);
    for z in field.coeffs() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<SpectralField> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

fn decode(bytes: &[u8]) -> Result<SpectralField> {
    if bytes.len() < 18 || &bytes[..5] != MAGIC {
        return Err(Error::BadMagic);
    }
    let n = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let components = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    let real = bytes[13] == 1;
    let label_len = u32::from_le_bytes(bytes[14..18].try_into().unwrap()) as usize;
    // a header that no writer could have produced is treated as corrupt
    if n < 4 || n % 2 != 0 || components == 0 || label_len > 1 << 20 {
        return Err(Error::BadMagic);
    }
    let payload_at = 18 + label_len;
    let expected = payload_at + 16 * components * n * n * n;
    if bytes.len() != expected {
        return Err(Error::TruncatedPayload {
            expected,
            got: bytes.len(),
        });
    }
    let label = std::str::from_utf8(&bytes[18..payload_at]).map_err(|_| Error::BadMagic)?;
    let coeffs: Vec<Complex64> = bytes[payload_at..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    let mut field = SpectralField::from_coeffs(n, components, coeffs, real);
    if !label.is_empty() {
        field.set_label(label);
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::random_div_free;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("nslab-snapshot-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut f = random_div_free(16, 5, 33);
        f.set_label("round-trip probe");
        let path = tmp("roundtrip.nslb");
        write_snapshot(&f, &path).unwrap();
        let g = read_snapshot(&path).unwrap();
        assert_eq!(f.grid_n(), g.grid_n());
        assert_eq!(f.components(), g.components());
        assert_eq!(f.is_real(), g.is_real());
        assert_eq!(f.label(), g.label());
        for (a, b) in f.coeffs().iter().zip(g.coeffs()) {
            assert!(a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
        }
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let f = random_div_free(8, 2, 1);
        let path = tmp("magic.nslb");
        write_snapshot(&f, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_snapshot(&path), Err(Error::BadMagic)));
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let f = random_div_free(8, 2, 2);
        let path = tmp("short.nslb");
        write_snapshot(&f, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
        match read_snapshot(&path) {
            Err(Error::TruncatedPayload { expected, got }) => {
                assert_eq!(expected, bytes.len());
                assert_eq!(got, bytes.len() - 7);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
        // trailing garbage is just as corrupt
        let mut long = bytes.clone();
        long.extend_from_slice(&[0u8; 3]);
        std::fs::write(&path, &long).unwrap();
        assert!(matches!(
            read_snapshot(&path),
            Err(Error::TruncatedPayload { .. })
        ));
    }

    #[test]
    fn nonsense_header_is_corrupt() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&7u32.to_le_bytes()); // odd grid
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.push(1);
        bytes.extend_from_slice(&0u32.to_le_bytes());
        let path = tmp("odd.nslb");
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_snapshot(&path), Err(Error::BadMagic)));
    }
}
