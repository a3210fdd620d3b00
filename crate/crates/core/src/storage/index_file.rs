use std::collections::BTreeMap;
use std::path::Path;

use super::codec::{read_file, write_file, Decoder, Encoder};
use crate::error::Result;
use crate::index::KeywordIndex;

pub const INDEX_MAGIC: &[u8; 4] = b"EMKI";
pub const INDEX_VERSION: u16 = 1;

/// Term table then postings:
/// `term_count, string_bytes, postings_len, term_offsets[t+1], strings,
/// posting_offsets[t+1], postings`.
pub(crate) fn encode_index(e: &mut Encoder, idx: &KeywordIndex) {
    let terms: Vec<String> = idx.terms().map(|(t, _)| t.to_string()).collect();
    let string_bytes: usize = terms.iter().map(String::len).sum();
    let postings_len: usize = idx.terms().map(|(_, l)| l.len()).sum();
    e.u32(terms.len() as u32);
    e.u32(string_bytes as u32);
    e.u32(postings_len as u32);
    e.strings(&terms);
    let mut off = 0u32;
    e.u32(0);
    for (_, l) in idx.terms() {
        off += l.len() as u32;
        e.u32(off);
    }
    for (_, l) in idx.terms() {
        e.u32s(l);
    }
}

pub(crate) fn decode_index(d: &mut Decoder) -> Result<KeywordIndex> {
    let count = d.u32()? as usize;
    let string_bytes = d.u32()? as usize;
    let postings_len = d.u32()? as usize;
    let terms = d.strings(count)?;
    if terms.iter().map(String::len).sum::<usize>() != string_bytes {
        return Err(d.corrupt("term byte count"));
    }
    let offsets = d.u32s(count + 1)?;
    if offsets[0] != 0
        || offsets[count] as usize != postings_len
        || offsets.windows(2).any(|w| w[0] > w[1])
    {
        return Err(d.corrupt("posting offsets"));
    }
    let postings = d.u32s(postings_len)?;
    let mut map = BTreeMap::new();
    for (i, t) in terms.into_iter().enumerate() {
        let list = postings[offsets[i] as usize..offsets[i + 1] as usize].to_vec();
        if list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(d.corrupt(format!("postings of `{t}` not strictly increasing")));
        }
        if map.insert(t, list).is_some() {
            return Err(d.corrupt("duplicate term"));
        }
    }
    Ok(KeywordIndex::from_postings(map))
}

pub fn write_index(idx: &KeywordIndex, path: &Path) -> Result<()> {
    let mut e = Encoder::new(INDEX_MAGIC, INDEX_VERSION);
    encode_index(&mut e, idx);
    write_file(path, &e.finish())
}

pub fn read_index(path: &Path) -> Result<KeywordIndex> {
    let bytes = read_file(path)?;
    let mut d = Decoder::open(path, &bytes, INDEX_MAGIC, INDEX_VERSION)?;
    let idx = decode_index(&mut d)?;
    d.finish()?;
    Ok(idx)
}
