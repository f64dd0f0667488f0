//! Binary channel cache: one fixed-size record per realization plus a JSON
//! sidecar carrying the scenario.
//!
//! Record layout (little endian): `b"TRCH"`, version `u32`, `M u32`,
//! `N u32`, `L u32`, scenario code `u32`, seed `u64`, then `M*N*L` pairs of
//! `f64` (re, im) in `[(m * N + n) * L + t]` order.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{ArrayGeometry, ChannelSet, Scenario, ScenarioParams};
use crate::error::{Error, Result};
use crate::Real;

pub const CHANNEL_MAGIC: [u8; 4] = *b"TRCH";
pub const FORMAT_VERSION: u32 = 1;

/// Everything about a cache file that the binary records do not carry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSidecar {
    pub scenario: ScenarioParams,
    pub correlated: bool,
    pub num_antennas: usize,
    pub num_users: usize,
    #[serde(default)]
    pub array: Option<ArrayGeometry>,
}

impl ChannelSidecar {
    pub fn for_set<T: Real>(set: &ChannelSet<T>) -> Self {
        Self {
            scenario: set.scenario.clone(),
            correlated: set.correlated,
            num_antennas: set.num_antennas(),
            num_users: set.num_users(),
            array: None,
        }
    }

    /// Bytes occupied by one record.
    pub fn record_len(&self) -> u64 {
        32 + 16 * (self.num_antennas * self.num_users * self.scenario.num_taps) as u64
    }

    /// Fails with a header mismatch if `other` describes different channels.
    pub fn check_compatible(&self, other: &ChannelSidecar) -> Result<()> {
        let mismatch = |what: &str, a: String, b: String| {
            Err(Error::HeaderMismatch(format!("{what}: cache has {a}, expected {b}")))
        };
        if self.num_antennas != other.num_antennas {
            return mismatch("antennas", self.num_antennas.to_string(), other.num_antennas.to_string());
        }
        if self.num_users != other.num_users {
            return mismatch("users", self.num_users.to_string(), other.num_users.to_string());
        }
        if self.correlated != other.correlated {
            return mismatch("correlated", self.correlated.to_string(), other.correlated.to_string());
        }
        if self.scenario != other.scenario {
            return mismatch(
                "scenario",
                format!("{:?}", self.scenario),
                format!("{:?}", other.scenario),
            );
        }
        Ok(())
    }
}

pub(crate) fn put_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn put_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn get_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn get_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn put_complex<T: Real, W: Write>(w: &mut W, xs: &[Complex<T>]) -> Result<()> {
    for x in xs {
        w.write_all(&x.re.as_f64().to_le_bytes())?;
        w.write_all(&x.im.as_f64().to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn get_complex<T: Real, R: Read>(r: &mut R, count: usize) -> Result<Vec<Complex<T>>> {
    let mut buf = vec![0u8; 16 * count];
    r.read_exact(&mut buf).map_err(truncated)?;
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex::new(T::cast(re), T::cast(im))
        })
        .collect())
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == ErrorKind::UnexpectedEof {
        Error::Format("truncated record".into())
    } else {
        Error::Io(e)
    }
}

/// Reads a 4-byte magic; `None` on clean end of input.
pub(crate) fn get_magic<R: Read>(r: &mut R, expected: [u8; 4]) -> Result<Option<()>> {
    let mut magic = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut magic[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(Error::Format("truncated magic".into())),
            Ok(k) => got += k,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    if magic != expected {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&magic),
            String::from_utf8_lossy(&expected)
        )));
    }
    let version = get_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    Ok(Some(()))
}

pub fn write_channel_set<T: Real, W: Write>(w: &mut W, set: &ChannelSet<T>) -> Result<()> {
    w.write_all(&CHANNEL_MAGIC)?;
    put_u32(w, FORMAT_VERSION)?;
    put_u32(w, set.num_antennas() as u32)?;
    put_u32(w, set.num_users() as u32)?;
    put_u32(w, set.num_taps() as u32)?;
    put_u32(w, set.scenario.name.code())?;
    put_u64(w, set.seed)?;
    put_complex(w, set.taps())
}

/// Reads the next record, checking its header against `sidecar`.
/// Returns `None` at a clean end of input.
pub fn read_channel_set<T: Real, R: Read>(
    r: &mut R,
    sidecar: &ChannelSidecar,
) -> Result<Option<ChannelSet<T>>> {
    if get_magic(r, CHANNEL_MAGIC)?.is_none() {
        return Ok(None);
    }
    let m = get_u32(r)? as usize;
    let n = get_u32(r)? as usize;
    let l = get_u32(r)? as usize;
    let code = get_u32(r)?;
    let seed = get_u64(r)?;
    let scenario = Scenario::from_code(code)
        .ok_or_else(|| Error::Format(format!("unknown scenario code {code}")))?;
    if (m, n, l, scenario)
        != (
            sidecar.num_antennas,
            sidecar.num_users,
            sidecar.scenario.num_taps,
            sidecar.scenario.name,
        )
    {
        return Err(Error::HeaderMismatch(format!(
            "record is {m}x{n}x{l} {scenario}, sidecar says {}x{}x{} {}",
            sidecar.num_antennas, sidecar.num_users, sidecar.scenario.num_taps, sidecar.scenario.name
        )));
    }
    let taps = get_complex(r, m * n * l)?;
    ChannelSet::from_taps(m, n, taps, sidecar.scenario.clone(), sidecar.correlated, seed).map(Some)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Writes `sets` to `path` and the sidecar to `path.json`.
pub fn save_channels<T: Real>(path: &Path, sets: &[ChannelSet<T>]) -> Result<()> {
    let first = sets
        .first()
        .ok_or_else(|| Error::InvalidArgument("no channel sets to save".into()))?;
    let sidecar = ChannelSidecar::for_set(first);
    let mut w = BufWriter::new(File::create(path)?);
    for set in sets {
        sidecar.check_compatible(&ChannelSidecar::for_set(set))?;
        write_channel_set(&mut w, set)?;
    }
    w.flush()?;
    std::fs::write(sidecar_path(path), serde_json::to_vec_pretty(&sidecar)?)?;
    Ok(())
}

/// Loads every record from `path`; with `expected`, refuses caches built
/// for different parameters.
pub fn load_channels<T: Real>(
    path: &Path,
    expected: Option<&ChannelSidecar>,
) -> Result<Vec<ChannelSet<T>>> {
    let sidecar: ChannelSidecar = serde_json::from_slice(&std::fs::read(sidecar_path(path))?)?;
    if let Some(e) = expected {
        sidecar.check_compatible(e)?;
    }
    let mut r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    while let Some(set) = read_channel_set(&mut r, &sidecar)? {
        out.push(set);
    }
    Ok(out)
}
