//! Versioned little-endian container for star and pair databases.
//!
//! ```text
//! star file                         pair file
//! ---------                         ---------
//! magic      8  "STIDSTAR"          magic       8  "STIDPAIR"
//! version    u32                    version     u32
//! m_lim      f64                    m_lim       f64
//! theta_min  f64                    theta_min   f64
//! stars      u64                    theta_max   f64
//! hash       32 (SHA-256)           stars       u64
//! star rows  stars * 36             entries     u64
//!                                   hash        32 (SHA-256)
//!                                   star rows   stars * 36
//!                                   pair rows   entries * 16
//!
//! star row: id u32, x f64, y f64, z f64, vmag f64
//! pair row: id_a u32, id_b u32, theta f64
//! ```

use std::io::{Read, Write};

use nalgebra::Vector3;

use super::{Fingerprint, PairDatabase, PairEntry};
use crate::catalog::{content_hash, StarDatabase, StarRecord};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
const STAR_MAGIC: &[u8; 8] = b"STIDSTAR";
const PAIR_MAGIC: &[u8; 8] = b"STIDPAIR";

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                Error::Format("file is truncated".into())
            } else {
                Error::Io(e)
            }
        })?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn header(&mut self, magic: &[u8; 8]) -> Result<()> {
        if &self.bytes::<8>()? != magic {
            return Err(Error::Format(format!(
                "bad magic, expected {:?}",
                String::from_utf8_lossy(magic)
            )));
        }
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {version} (this build reads {FORMAT_VERSION})"
            )));
        }
        Ok(())
    }

    fn stars(&mut self, count: u64) -> Result<Vec<StarRecord>> {
        let mut stars = Vec::with_capacity(count.min(1 << 20) as usize);
        for _ in 0..count {
            let id = self.u32()?;
            let direction = Vector3::new(self.f64()?, self.f64()?, self.f64()?);
            let vmag = self.f64()?;
            stars.push(StarRecord {
                id,
                direction,
                vmag,
            });
        }
        Ok(stars)
    }

    fn finish(mut self) -> Result<()> {
        let mut probe = [0u8; 1];
        match self.inner.read(&mut probe)? {
            0 => Ok(()),
            _ => Err(Error::Format("trailing bytes after last record".into())),
        }
    }
}

fn write_stars<W: Write>(w: &mut W, stars: &[StarRecord]) -> Result<()> {
    for s in stars {
        w.write_all(&s.id.to_le_bytes())?;
        for c in s.direction.iter() {
            w.write_all(&c.to_le_bytes())?;
        }
        w.write_all(&s.vmag.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_star_db<W: Write>(mut w: W, db: &StarDatabase) -> Result<()> {
    w.write_all(STAR_MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&db.m_lim().to_le_bytes())?;
    w.write_all(&db.theta_min().to_le_bytes())?;
    w.write_all(&(db.len() as u64).to_le_bytes())?;
    w.write_all(&db.content_hash())?;
    write_stars(&mut w, db.stars())?;
    w.flush()?;
    Ok(())
}

pub fn read_star_db<R: Read>(r: R) -> Result<StarDatabase> {
    let mut r = Reader { inner: r };
    r.header(STAR_MAGIC)?;
    let m_lim = r.f64()?;
    let theta_min = r.f64()?;
    let count = r.u64()?;
    let hash = r.bytes::<32>()?;
    let stars = r.stars(count)?;
    r.finish()?;
    if content_hash(&stars) != hash {
        return Err(Error::Format(
            "star table does not match content hash".into(),
        ));
    }
    Ok(StarDatabase::from_parts(stars, m_lim, theta_min))
}

pub fn write_pair_db<W: Write>(mut w: W, pdb: &PairDatabase) -> Result<()> {
    let fp = pdb.fingerprint();
    w.write_all(PAIR_MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&fp.m_lim.to_le_bytes())?;
    w.write_all(&fp.theta_min.to_le_bytes())?;
    w.write_all(&pdb.theta_max().to_le_bytes())?;
    w.write_all(&fp.star_count.to_le_bytes())?;
    w.write_all(&(pdb.len() as u64).to_le_bytes())?;
    w.write_all(&fp.content_hash)?;
    write_stars(&mut w, pdb.stars())?;
    for e in pdb.entries() {
        w.write_all(&e.id_a.to_le_bytes())?;
        w.write_all(&e.id_b.to_le_bytes())?;
        w.write_all(&e.theta.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pair_db<R: Read>(r: R) -> Result<PairDatabase> {
    let mut r = Reader { inner: r };
    r.header(PAIR_MAGIC)?;
    let m_lim = r.f64()?;
    let theta_min = r.f64()?;
    let theta_max = r.f64()?;
    let star_count = r.u64()?;
    let entry_count = r.u64()?;
    let content_hash = r.bytes::<32>()?;
    let stars = r.stars(star_count)?;
    let mut entries = Vec::with_capacity(entry_count.min(1 << 24) as usize);
    for _ in 0..entry_count {
        entries.push(PairEntry {
            id_a: r.u32()?,
            id_b: r.u32()?,
            theta: r.f64()?,
        });
    }
    r.finish()?;
    let fingerprint = Fingerprint {
        m_lim,
        theta_min,
        star_count,
        content_hash,
    };
    PairDatabase::from_parts(entries, theta_max, stars, fingerprint)
}
