//! Pre-filter records share the channel cache layout: `b"TRPF"`, version,
//! `M`, `N`, `L_p`, technique code, regularized bin count (`u64`), `N`
//! delay references (`u32`), then `M*N*L_p` little-endian `f64` pairs.

use std::io::{Read, Write};

use super::{PrefilterSet, Technique};
use crate::channel::FORMAT_VERSION;
use crate::channel::io::{get_complex, get_magic, get_u32, get_u64, put_complex, put_u32, put_u64};
use crate::error::{Error, Result};
use crate::Real;

pub const PREFILTER_MAGIC: [u8; 4] = *b"TRPF";

pub fn write_prefilter_set<T: Real, W: Write>(w: &mut W, set: &PrefilterSet<T>) -> Result<()> {
    w.write_all(&PREFILTER_MAGIC)?;
    put_u32(w, FORMAT_VERSION)?;
    put_u32(w, set.num_antennas() as u32)?;
    put_u32(w, set.num_users() as u32)?;
    put_u32(w, set.len() as u32)?;
    put_u32(w, set.technique.code())?;
    put_u64(w, set.regularized_bins as u64)?;
    for &d in &set.delay_reference {
        put_u32(w, d as u32)?;
    }
    put_complex(w, set.taps())
}

/// Reads the next record; `None` at a clean end of input.
pub fn read_prefilter_set<T: Real, R: Read>(r: &mut R) -> Result<Option<PrefilterSet<T>>> {
    if get_magic(r, PREFILTER_MAGIC)?.is_none() {
        return Ok(None);
    }
    let m = get_u32(r)? as usize;
    let n = get_u32(r)? as usize;
    let lp = get_u32(r)? as usize;
    let code = get_u32(r)?;
    let technique = Technique::from_code(code)
        .ok_or_else(|| Error::Format(format!("unknown technique code {code}")))?;
    let regularized_bins = get_u64(r)? as usize;
    let delay_reference = (0..n)
        .map(|_| get_u32(r).map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    let taps = get_complex(r, m * n * lp)?;
    let mut set = PrefilterSet::from_taps(m, n, lp, taps, technique, delay_reference)
        .map_err(|e| Error::Format(e.to_string()))?;
    set.regularized_bins = regularized_bins;
    Ok(Some(set))
}
