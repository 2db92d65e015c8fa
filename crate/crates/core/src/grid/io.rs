//! Flat file layouts for grid data.
//!
//! Binary layout, all little endian:
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 4     | magic `PCGD`                              |
//! | 1     | format version (1)                        |
//! | 1     | representation tag (0 physical, 1 spectral) |
//! | 1     | dim                                       |
//! | 1     | reserved, zero                            |
//! | 4     | samples per axis, `u32`                   |
//! | 8     | extent `L`, `f64`                         |
//! | 16·N^dim | row-major `(re, im)` pairs of `f64`    |
//!
//! The CSV layout carries the same header as a key row and a value row,
//! followed by a `re,im` header and one row per sample. Floats are written in
//! shortest round-trip form, so both layouts reproduce every bit.

use std::io::{BufRead, Read, Write};

use super::{Field, GridSpec, Spectrum};
use crate::{Complex64, Error, Result};

const MAGIC: &[u8; 4] = b"PCGD";
const VERSION: u8 = 1;
const CSV_HEADER: &str = "dim,samples_per_axis,extent,representation";

/// Physical or spectral grid data, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum GridData {
    Physical(Field),
    Spectral(Spectrum),
}

impl GridData {
    fn parts(&self) -> (&GridSpec, &[Complex64], u8, &'static str) {
        match self {
            GridData::Physical(f) => (f.spec(), f.values(), 0, "physical"),
            GridData::Spectral(s) => (s.spec(), s.coeffs(), 1, "spectral"),
        }
    }

    fn assemble(spec: GridSpec, tag: u8, data: Vec<Complex64>) -> Result<Self> {
        match tag {
            0 => Ok(GridData::Physical(Field::new(spec, data)?)),
            1 => Ok(GridData::Spectral(Spectrum::new(spec, data)?)),
            other => Err(Error::Format(format!("unknown representation tag {other}"))),
        }
    }

    pub fn spec(&self) -> &GridSpec {
        self.parts().0
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let (spec, data, tag, _) = self.parts();
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION, tag, spec.dim() as u8, 0])?;
        w.write_all(&(spec.samples_per_axis() as u32).to_le_bytes())?;
        w.write_all(&spec.extent().to_le_bytes())?;
        for v in data {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 20];
        r.read_exact(&mut head)?;
        if &head[..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        if head[4] != VERSION {
            return Err(Error::Format(format!("unsupported version {}", head[4])));
        }
        let tag = head[5];
        let dim = head[6] as usize;
        let n = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
        let extent = f64::from_le_bytes(head[12..20].try_into().unwrap());
        let spec = GridSpec::new(dim, n, extent)?;
        let mut raw = vec![0u8; 16 * spec.len()];
        r.read_exact(&mut raw)?;
        let data = raw
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Self::assemble(spec, tag, data)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let (spec, data, _, repr) = self.parts();
        writeln!(w, "{CSV_HEADER}")?;
        writeln!(
            w,
            "{},{},{:?},{}",
            spec.dim(),
            spec.samples_per_axis(),
            spec.extent(),
            repr
        )?;
        writeln!(w, "re,im")?;
        for v in data {
            writeln!(w, "{:?},{:?}", v.re, v.im)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Format(format!("missing {what}")))?
                .map_err(Error::from)
        };
        if next("header")?.trim() != CSV_HEADER {
            return Err(Error::Format("unexpected CSV header".into()));
        }
        let meta = next("metadata row")?;
        let fields: Vec<&str> = meta.trim().split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Format("metadata row needs 4 columns".into()));
        }
        let parse_err = |what: &str| Error::Format(format!("cannot parse {what}"));
        let dim: usize = fields[0].parse().map_err(|_| parse_err("dim"))?;
        let n: usize = fields[1].parse().map_err(|_| parse_err("samples_per_axis"))?;
        let extent: f64 = fields[2].parse().map_err(|_| parse_err("extent"))?;
        let tag = match fields[3] {
            "physical" => 0,
            "spectral" => 1,
            other => return Err(Error::Format(format!("unknown representation {other}"))),
        };
        let spec = GridSpec::new(dim, n, extent)?;
        if next("sample header")?.trim() != "re,im" {
            return Err(Error::Format("expected re,im header".into()));
        }
        let mut data = Vec::with_capacity(spec.len());
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (re, im) = line
                .trim()
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("bad sample row `{line}`")))?;
            data.push(Complex64::new(
                re.parse().map_err(|_| parse_err("real part"))?,
                im.parse().map_err(|_| parse_err("imaginary part"))?,
            ));
        }
        Self::assemble(spec, tag, data)
    }
}

/// Reads grid data from a path, choosing the layout by extension (`.csv` or binary).
pub fn read_path(path: &std::path::Path) -> Result<GridData> {
    let file = std::fs::File::open(path)?;
    if path.extension().is_some_and(|e| e == "csv") {
        GridData::read_csv(std::io::BufReader::new(file))
    } else {
        GridData::read_binary(std::io::BufReader::new(file))
    }
}
