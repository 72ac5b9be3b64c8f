//! Binary files: strategy stores (DHBP), training checkpoints (DHCK) and
//! bucket maps (DHBK). All little-endian, framed as magic, version u32,
//! body, and a trailing FNV-1a checksum over everything before it.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use holdem_core::abstraction::buckets::BucketMap;
use holdem_core::abstraction::profile::Abstraction;
use holdem_core::abstraction::menu::ActionMenuConfig;
use holdem_core::blueprint::{Checkpoint, StoreHeader, StrategyStore, STORE_VERSION};
use holdem_core::cfr::{InfosetTable, Policy, RngPosition};
use holdem_core::hash::fnv64;
use holdem_core::tree::{ActionSeq, InfosetKey};

use crate::error::{Error, Result};

pub const STORE_MAGIC: [u8; 4] = *b"DHBP";
pub const CHECKPOINT_MAGIC: [u8; 4] = *b"DHCK";
pub const BUCKETS_MAGIC: [u8; 4] = *b"DHBK";
pub const CHECKPOINT_VERSION: u32 = 1;
pub const BUCKETS_VERSION: u32 = 1;

const KEY_BYTES: usize = 1 + 1 + 4 + 16;

#[derive(Default)]
struct Out(Vec<u8>);

impl Out {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u128(&mut self, v: u128) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, v: &[f64]) {
        v.iter().for_each(|x| self.u64(x.to_bits()));
    }
    fn key(&mut self, k: &InfosetKey) {
        self.u8(k.player);
        self.u8(k.round);
        self.u32(k.bucket);
        self.u128(k.history.0);
    }
    fn header(&mut self, h: &StoreHeader) {
        self.u64(h.buckets_fingerprint);
        self.u64(h.menu_fingerprint);
        self.u64(h.iterations);
        self.u64(h.seed);
    }
}

struct In<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> In<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(Error::Format("unexpected end of data"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.u64().map(f64::from_bits)).collect()
    }
    fn key(&mut self) -> Result<InfosetKey> {
        Ok(InfosetKey { player: self.u8()?, round: self.u8()?, bucket: self.u32()?, history: ActionSeq(self.u128()?) })
    }
    fn header(&mut self, version: u32) -> Result<StoreHeader> {
        Ok(StoreHeader { version, buckets_fingerprint: self.u64()?, menu_fingerprint: self.u64()?, iterations: self.u64()?, seed: self.u64()? })
    }
    fn finish(&self) -> Result<()> {
        if self.pos == self.bytes.len() { Ok(()) } else { Err(Error::Format("trailing bytes")) }
    }
}

fn seal(magic: [u8; 4], version: u32, body: Out) -> Vec<u8> {
    let mut out = Vec::with_capacity(body.0.len() + 16);
    out.extend_from_slice(&magic);
    out.extend_from_slice(&version.to_le_bytes());
    out.extend_from_slice(&body.0);
    let sum = fnv64(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

/// Checks magic, checksum and version; returns the body.
fn open(bytes: &[u8], magic: [u8; 4], version: u32) -> Result<&[u8]> {
    if bytes.len() < 4 || bytes[..4] != magic {
        return Err(Error::BadMagic { expected: magic });
    }
    if bytes.len() < 16 {
        return Err(Error::Format("file too short"));
    }
    let (framed, sum) = bytes.split_at(bytes.len() - 8);
    if fnv64(framed) != u64::from_le_bytes(sum.try_into().unwrap()) {
        return Err(Error::BadChecksum);
    }
    let found = u32::from_le_bytes(framed[4..8].try_into().unwrap());
    if found != version {
        return Err(Error::Version { expected: version, found });
    }
    Ok(&framed[8..])
}

/// Records are sorted by key and preceded by an index of (key, offset)
/// pairs, offsets relative to the start of the record block.
pub fn store_to_bytes(store: &StrategyStore) -> Vec<u8> {
    let keys = store.policy.keys_sorted();
    let mut body = Out::default();
    body.header(&store.header);
    body.u64(keys.len() as u64);
    let mut records = Out::default();
    let mut index = Out::default();
    for k in &keys {
        let probs = store.policy.get(k).expect("sorted key present");
        index.key(k);
        index.u64(records.0.len() as u64);
        records.u16(probs.len() as u16);
        records.f64s(probs);
    }
    body.0.extend_from_slice(&index.0);
    body.0.extend_from_slice(&records.0);
    seal(STORE_MAGIC, store.header.version, body)
}

pub fn store_from_bytes(bytes: &[u8]) -> Result<StrategyStore> {
    let body = open(bytes, STORE_MAGIC, STORE_VERSION)?;
    let mut r = In { bytes: body, pos: 0 };
    let header = r.header(STORE_VERSION)?;
    let count = r.u64()? as usize;
    let index_len = count.checked_mul(KEY_BYTES + 8).ok_or(Error::Format("record count"))?;
    let mut index = In { bytes: r.take(index_len)?, pos: 0 };
    let mut records = In { bytes: &body[r.pos..], pos: 0 };
    let mut policy = Policy::new();
    let mut last: Option<InfosetKey> = None;
    for _ in 0..count {
        let key = index.key()?;
        if last.is_some_and(|l| l >= key) {
            return Err(Error::Format("index not sorted"));
        }
        last = Some(key);
        if index.u64()? as usize != records.pos {
            return Err(Error::Format("index offset"));
        }
        let n = records.u16()? as usize;
        policy.insert(key, records.f64s(n)?);
    }
    records.finish()?;
    Ok(StrategyStore { header, policy })
}

/// Slots are written in table order so a restored table is identical.
pub fn checkpoint_to_bytes(ck: &Checkpoint) -> Vec<u8> {
    let t = &ck.table;
    let mut body = Out::default();
    body.header(&ck.header);
    body.0.extend_from_slice(&ck.rng.seed);
    body.u128(ck.rng.word_pos);
    body.u64(t.len() as u64);
    for slot in 0..t.len() {
        body.key(&t.key(slot));
        body.u16(t.regrets(slot).len() as u16);
        body.u64(t.update_count(slot));
        body.f64s(t.regrets(slot));
        body.f64s(t.strategy_sum(slot));
    }
    seal(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, body)
}

pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<Checkpoint> {
    let body = open(bytes, CHECKPOINT_MAGIC, CHECKPOINT_VERSION)?;
    let mut r = In { bytes: body, pos: 0 };
    let header = r.header(STORE_VERSION)?;
    let seed: [u8; 32] = r.take(32)?.try_into().unwrap();
    let rng = RngPosition { seed, word_pos: r.u128()? };
    let count = r.u64()?;
    let mut table = InfosetTable::new();
    for _ in 0..count {
        let key = r.key()?;
        let n = r.u16()? as usize;
        let updates = r.u64()?;
        let regrets = r.f64s(n)?;
        let sums = r.f64s(n)?;
        table.push_slot(key, &regrets, &sums, updates)?;
    }
    r.finish()?;
    Ok(Checkpoint { header, rng, table })
}

pub fn buckets_to_bytes(map: &BucketMap) -> Vec<u8> {
    seal(BUCKETS_MAGIC, BUCKETS_VERSION, Out(map.to_bytes()))
}

pub fn buckets_from_bytes(bytes: &[u8]) -> Result<BucketMap> {
    let body = open(bytes, BUCKETS_MAGIC, BUCKETS_VERSION)?;
    Ok(BucketMap::from_bytes(body)?)
}

/// Writes through a temporary file in the same directory, then renames it
/// over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn save_store(path: &Path, store: &StrategyStore) -> Result<()> {
    write_atomic(path, &store_to_bytes(store))
}

pub fn load_store(path: &Path) -> Result<StrategyStore> {
    store_from_bytes(&fs::read(path)?)
}

pub fn save_checkpoint(path: &Path, ck: &Checkpoint) -> Result<()> {
    write_atomic(path, &checkpoint_to_bytes(ck))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    checkpoint_from_bytes(&fs::read(path)?)
}

fn bucket_path(dir: &Path, round: usize) -> PathBuf {
    dir.join(format!("round{}.dhbk", round + 1))
}

/// Saves the four bucket maps as `round1.dhbk` .. `round4.dhbk`.
pub fn save_abstraction(dir: &Path, abs: &Abstraction) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (r, map) in abs.maps.iter().enumerate() {
        write_atomic(&bucket_path(dir, r), &buckets_to_bytes(map))?;
    }
    Ok(())
}

pub fn load_abstraction(dir: &Path, menu: ActionMenuConfig) -> Result<Abstraction> {
    let mut maps = Vec::with_capacity(4);
    for r in 0..4 {
        maps.push(buckets_from_bytes(&fs::read(bucket_path(dir, r))?)?);
    }
    let maps: [BucketMap; 4] = maps.try_into().map_err(|_| Error::Format("bucket map count"))?;
    Ok(Abstraction::new(maps, menu)?)
}

pub fn has_abstraction(dir: &Path) -> bool {
    (0..4).all(|r| bucket_path(dir, r).is_file())
}
