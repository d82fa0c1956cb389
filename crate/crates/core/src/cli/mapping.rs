//! Byte-to-code mappings for reading files.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::packed::{Alphabet, Code};

/// An injective map from some bytes to codes `0..σ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ByteMapping {
    name: String,
    codes: [Option<Code>; 256],
    alphabet: Alphabet,
}

impl ByteMapping {
    /// Identity over all bytes, σ = 256.
    pub fn byte() -> Self {
        let mut codes = [None; 256];
        for (b, c) in codes.iter_mut().enumerate() {
            *c = Some(b as Code);
        }
        ByteMapping {
            name: "byte".into(),
            codes,
            alphabet: Alphabet::bytes(),
        }
    }

    /// A → 0, C → 1, G → 2, T → 3.
    pub fn dna() -> Self {
        let mut codes = [None; 256];
        for (c, &b) in b"ACGT".iter().enumerate() {
            codes[b as usize] = Some(c as Code);
        }
        ByteMapping {
            name: "dna".into(),
            codes,
            alphabet: Alphabet::dna(),
        }
    }

    /// Parses a mapping file: one `<symbol> <code>` pair per line, where the
    /// symbol is a single printable character or `0xHH`. Blank lines and lines
    /// starting with `#` are ignored. σ is one more than the largest code.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut codes = [None; 256];
        let mut seen = std::collections::HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| Error::InvalidMapping(format!("line {}: {what}", lineno + 1));
            let mut parts = line.split_whitespace();
            let (Some(sym), Some(code), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad("expected `<symbol> <code>`"));
            };
            let byte = if let Some(hex) = sym.strip_prefix("0x") {
                u8::from_str_radix(hex, 16).map_err(|_| bad("bad hex byte"))?
            } else if sym.len() == 1 {
                sym.as_bytes()[0]
            } else {
                return Err(bad("symbol must be one character or 0xHH"));
            };
            let code: Code = code.parse().map_err(|_| bad("code must be an integer in 0..65536"))?;
            if codes[byte as usize].is_some() {
                return Err(bad("byte mapped twice"));
            }
            if let Some(prev) = seen.insert(code, byte) {
                return Err(Error::InvalidMapping(format!(
                    "bytes 0x{prev:02x} and 0x{byte:02x} both map to code {code}"
                )));
            }
            codes[byte as usize] = Some(code);
        }
        let Some(&max) = seen.keys().max() else {
            return Err(Error::InvalidMapping("mapping is empty".into()));
        };
        Ok(ByteMapping {
            name: name.into(),
            codes,
            alphabet: Alphabet::new(u32::from(max) + 1)?,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&path.display().to_string(), &fs::read_to_string(path)?)
    }

    /// `byte`, `dna`, or a mapping file path.
    pub fn from_arg(arg: &str) -> Result<Self> {
        match arg {
            "byte" => Ok(Self::byte()),
            "dna" => Ok(Self::dna()),
            path => Self::from_file(Path::new(path)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    #[inline]
    pub fn code(&self, byte: u8) -> Option<Code> {
        self.codes[byte as usize]
    }

    /// Maps `bytes`, dropping unmapped `\n`/`\r` when `strip_newlines` is set.
    /// Errors name the offset of the first unmappable byte in the input.
    pub fn map(&self, bytes: &[u8], strip_newlines: bool) -> Result<Vec<Code>> {
        let mut out = Vec::with_capacity(bytes.len());
        for (offset, &b) in bytes.iter().enumerate() {
            match self.code(b) {
                Some(c) => out.push(c),
                None if strip_newlines && (b == b'\n' || b == b'\r') => {}
                None => {
                    return Err(Error::UnmappableByte {
                        offset,
                        byte: b,
                        alphabet: self.name.clone(),
                    })
                }
            }
        }
        Ok(out)
    }
}
