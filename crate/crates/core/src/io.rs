//! Binary files for fields, sinograms and tomograms.
//!
//! ```text
//! SYMRAD1
//! kind field
//! dims 2
//! samples 128
//! half_width 5
//! end
//! <little-endian f64 values, row-major>
//! ```
//!
//! Header values are written with Rust's shortest round-trip formatting, so
//! every file reads back bit for bit. Phantoms are plain text (see
//! [`Phantom::parse`]).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::forward::{Sinogram, SinogramSpec};
use crate::ndim::{DirectionScheme, TomogramND, TomogramSpec};
use crate::phasespace::{Field, GridSpec, Phantom};

pub const MAGIC: &str = "SYMRAD1";

/// What a data file holds, from its `kind` line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Field,
    Sinogram,
    Tomogram,
}

impl FileKind {
    fn name(self) -> &'static str {
        match self {
            FileKind::Field => "field",
            FileKind::Sinogram => "sinogram",
            FileKind::Tomogram => "tomogram",
        }
    }
}

struct Header {
    entries: Vec<(String, String, usize)>,
    /// Line number the data would start on if it were text.
    data_line: usize,
}

impl Header {
    fn get(&self, key: &str) -> Result<(&str, usize)> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, line)| (v.as_str(), *line))
            .ok_or_else(|| Error::parse(self.data_line - 1, format!("missing header key `{key}`")))
    }

    fn usize(&self, key: &str) -> Result<usize> {
        let (v, line) = self.get(key)?;
        v.parse().map_err(|_| {
            Error::parse(
                line,
                format!("`{key}` must be a non-negative integer, got `{v}`"),
            )
        })
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let (v, line) = self.get(key)?;
        v.parse()
            .map_err(|_| Error::parse(line, format!("`{key}` must be a number, got `{v}`")))
    }
}

fn encode(kind: FileKind, header: &[(&str, String)], values: &[f64]) -> Vec<u8> {
    let mut text = format!("{MAGIC}\nkind {}\n", kind.name());
    for (k, v) in header {
        text.push_str(&format!("{k} {v}\n"));
    }
    text.push_str("end\n");
    let mut out = text.into_bytes();
    out.reserve(values.len() * 8);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Splits a file into its header and value payload.
fn decode(bytes: &[u8], expected: FileKind) -> Result<(Header, Vec<f64>)> {
    let mut entries = Vec::new();
    let mut pos = 0;
    let mut line = 0;
    loop {
        line += 1;
        let Some(len) = bytes[pos..].iter().position(|&b| b == b'\n') else {
            return Err(Error::parse(line, "header ends before the `end` line"));
        };
        let text = std::str::from_utf8(&bytes[pos..pos + len])
            .map_err(|_| Error::parse(line, "header line is not UTF-8"))?
            .trim();
        pos += len + 1;
        if line == 1 {
            if text != MAGIC {
                return Err(Error::parse(
                    1,
                    format!("expected `{MAGIC}`, found `{text}`"),
                ));
            }
            continue;
        }
        if text == "end" {
            break;
        }
        let (key, value) = text
            .split_once(' ')
            .ok_or_else(|| Error::parse(line, format!("expected `key value`, found `{text}`")))?;
        entries.push((key.to_string(), value.trim().to_string(), line));
    }
    let header = Header {
        entries,
        data_line: line + 1,
    };
    let (kind, kind_line) = header.get("kind")?;
    if kind != expected.name() {
        return Err(Error::parse(
            kind_line,
            format!("expected a {} file, found kind `{kind}`", expected.name()),
        ));
    }
    let payload = &bytes[pos..];
    if !payload.len().is_multiple_of(8) {
        return Err(Error::parse(
            header.data_line,
            format!(
                "data section of {} bytes is not a whole number of f64 values",
                payload.len()
            ),
        ));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((header, values))
}

fn check_count(header: &Header, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::parse(
            header.data_line,
            format!("expected {expected} values, found {found}"),
        ))
    }
}

/// Wraps a constructor error as a parse error at the data section.
fn at_data<T>(header: &Header, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::parse(header.data_line, other.to_string()),
    })
}

pub fn encode_field(f: &Field) -> Vec<u8> {
    let s = f.spec();
    encode(
        FileKind::Field,
        &[
            ("dims", s.dims.to_string()),
            ("samples", s.samples.to_string()),
            ("half_width", s.half_width.to_string()),
        ],
        f.values(),
    )
}

pub fn decode_field(bytes: &[u8]) -> Result<Field> {
    let (h, values) = decode(bytes, FileKind::Field)?;
    let spec = GridSpec {
        dims: h.usize("dims")?,
        samples: h.usize("samples")?,
        half_width: h.f64("half_width")?,
    };
    at_data(&h, spec.validate())?;
    check_count(&h, spec.len(), values.len())?;
    at_data(&h, Field::new(spec, values))
}

pub fn encode_sinogram(sg: &Sinogram) -> Vec<u8> {
    let s = sg.spec();
    encode(
        FileKind::Sinogram,
        &[
            ("dims", "2".to_string()),
            ("angles", s.n_angles.to_string()),
            ("offsets", s.n_offsets.to_string()),
            ("offset_halfwidth", s.offset_halfwidth.to_string()),
        ],
        sg.values(),
    )
}

pub fn decode_sinogram(bytes: &[u8]) -> Result<Sinogram> {
    let (h, values) = decode(bytes, FileKind::Sinogram)?;
    let (dims, line) = h.get("dims")?;
    if dims != "2" {
        return Err(Error::parse(
            line,
            format!("sinograms are 2-dimensional, found dims {dims}"),
        ));
    }
    let spec = SinogramSpec {
        n_angles: h.usize("angles")?,
        n_offsets: h.usize("offsets")?,
        offset_halfwidth: h.f64("offset_halfwidth")?,
    };
    at_data(&h, spec.validate())?;
    check_count(&h, spec.len(), values.len())?;
    at_data(&h, Sinogram::new(spec, values))
}

pub fn encode_tomogram(tg: &TomogramND) -> Vec<u8> {
    let s = tg.spec();
    encode(
        FileKind::Tomogram,
        &[
            ("dims", s.dims().to_string()),
            ("scheme", s.scheme.name().to_string()),
            ("directions", s.n_directions.to_string()),
            ("offsets", s.n_offsets.to_string()),
            ("offset_halfwidth", s.offset_halfwidth.to_string()),
        ],
        tg.values(),
    )
}

pub fn decode_tomogram(bytes: &[u8]) -> Result<TomogramND> {
    let (h, values) = decode(bytes, FileKind::Tomogram)?;
    let (name, line) = h.get("scheme")?;
    let scheme = DirectionScheme::from_name(name)
        .ok_or_else(|| Error::parse(line, format!("unknown scheme `{name}`")))?;
    let dims = h.usize("dims")?;
    if dims != scheme.dims() {
        let (_, line) = h.get("dims")?;
        return Err(Error::parse(
            line,
            format!(
                "scheme {name} is {}-dimensional, header says {dims}",
                scheme.dims()
            ),
        ));
    }
    let spec = TomogramSpec {
        scheme,
        n_directions: h.usize("directions")?,
        n_offsets: h.usize("offsets")?,
        offset_halfwidth: h.f64("offset_halfwidth")?,
    };
    at_data(&h, spec.validate())?;
    check_count(&h, spec.len(), values.len())?;
    at_data(&h, TomogramND::new(spec, values))
}

/// The `kind` of a data file without decoding its payload.
pub fn peek_kind(bytes: &[u8]) -> Result<FileKind> {
    for kind in [FileKind::Field, FileKind::Sinogram, FileKind::Tomogram] {
        match decode(bytes, kind) {
            Ok(_) => return Ok(kind),
            Err(Error::Parse { message, .. }) if message.starts_with("expected a ") => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::parse(2, "unknown kind"))
}

pub fn write_field(f: &Field, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_field(f))?)
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field> {
    decode_field(&fs::read(path)?)
}

pub fn write_sinogram(sg: &Sinogram, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_sinogram(sg))?)
}

pub fn read_sinogram(path: impl AsRef<Path>) -> Result<Sinogram> {
    decode_sinogram(&fs::read(path)?)
}

pub fn write_tomogram(tg: &TomogramND, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_tomogram(tg))?)
}

pub fn read_tomogram(path: impl AsRef<Path>) -> Result<TomogramND> {
    decode_tomogram(&fs::read(path)?)
}

pub fn write_phantom(ph: &Phantom, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, ph.to_text())?)
}

pub fn read_phantom(path: impl AsRef<Path>) -> Result<Phantom> {
    Phantom::parse(&fs::read_to_string(path)?)
}
