//! Little-endian encoding with a trailing CRC32 over the whole file.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub(crate) struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub(crate) fn new(magic: &[u8; 4], version: u16) -> Self {
        let mut e = Self { buf: Vec::new() };
        e.buf.extend_from_slice(magic);
        e.u16(version);
        e
    }

    pub(crate) fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub(crate) fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub(crate) fn u32s(&mut self, vs: &[u32]) {
        vs.iter().for_each(|&v| self.u32(v));
    }

    pub(crate) fn u16s(&mut self, vs: &[u16]) {
        vs.iter().for_each(|&v| self.u16(v));
    }

    pub(crate) fn f32s(&mut self, vs: &[f32]) {
        vs.iter().for_each(|v| self.buf.extend_from_slice(&v.to_le_bytes()));
    }

    pub(crate) fn f64s(&mut self, vs: &[f64]) {
        vs.iter().for_each(|v| self.buf.extend_from_slice(&v.to_le_bytes()));
    }

    pub(crate) fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    /// `offsets (len+1)` then the concatenated bytes; the count is stored by the caller.
    pub(crate) fn strings(&mut self, items: &[String]) {
        let mut off = 0u32;
        self.u32(0);
        for s in items {
            off += s.len() as u32;
            self.u32(off);
        }
        for s in items {
            self.bytes(s.as_bytes());
        }
    }

    pub(crate) fn finish(mut self) -> Vec<u8> {
        let crc = crc32fast::hash(&self.buf);
        self.u32(crc);
        self.buf
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))?;
    f.sync_all().map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) struct Decoder<'a> {
    path: PathBuf,
    data: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    /// Checks magic, version and checksum; the cursor starts after the version.
    pub(crate) fn open(path: &Path, data: &'a [u8], magic: &[u8; 4], version: u16) -> Result<Self> {
        if data.len() < 4 + 2 + 4 {
            return Err(Error::Truncated { path: path.into() });
        }
        let found: [u8; 4] = data[..4].try_into().expect("length checked");
        if &found != magic {
            return Err(Error::BadMagic {
                path: path.into(),
                found,
                expected: *magic,
            });
        }
        let v = u16::from_le_bytes([data[4], data[5]]);
        if v != version {
            return Err(Error::VersionMismatch {
                path: path.into(),
                found: v,
                expected: version,
            });
        }
        let (body, tail) = data.split_at(data.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().expect("four bytes"));
        let computed = crc32fast::hash(body);
        if stored != computed {
            return Err(Error::Checksum {
                path: path.into(),
                stored,
                computed,
            });
        }
        Ok(Self {
            path: path.into(),
            data: body,
            pos: 6,
        })
    }

    pub(crate) fn corrupt(&self, message: impl Into<String>) -> Error {
        Error::Corrupt {
            path: self.path.clone(),
            message: message.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len());
        match end {
            Some(end) => {
                let s = &self.data[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Truncated {
                path: self.path.clone(),
            }),
        }
    }

    pub(crate) fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("two bytes")))
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("four bytes")))
    }

    pub(crate) fn u32s(&mut self, n: usize) -> Result<Vec<u32>> {
        let raw = self.take(n.checked_mul(4).ok_or_else(|| self.corrupt("length overflow"))?)?;
        Ok(raw.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().expect("4"))).collect())
    }

    pub(crate) fn u16s(&mut self, n: usize) -> Result<Vec<u16>> {
        let raw = self.take(n.checked_mul(2).ok_or_else(|| self.corrupt("length overflow"))?)?;
        Ok(raw.chunks_exact(2).map(|c| u16::from_le_bytes(c.try_into().expect("2"))).collect())
    }

    pub(crate) fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let raw = self.take(n.checked_mul(4).ok_or_else(|| self.corrupt("length overflow"))?)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4"))).collect())
    }

    pub(crate) fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| self.corrupt("length overflow"))?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8"))).collect())
    }

    pub(crate) fn bytes(&mut self, n: usize) -> Result<Vec<u8>> {
        Ok(self.take(n)?.to_vec())
    }

    pub(crate) fn strings(&mut self, count: usize) -> Result<Vec<String>> {
        let offsets = self.u32s(count + 1)?;
        if offsets[0] != 0 || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(self.corrupt("string offsets not monotone"));
        }
        let raw = self.take(offsets[count] as usize)?;
        offsets
            .windows(2)
            .map(|w| {
                String::from_utf8(raw[w[0] as usize..w[1] as usize].to_vec())
                    .map_err(|_| self.corrupt("string is not UTF-8"))
            })
            .collect()
    }

    pub(crate) fn finish(self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(self.corrupt(format!(
                "{} trailing bytes",
                self.data.len() - self.pos
            )));
        }
        Ok(())
    }
}
