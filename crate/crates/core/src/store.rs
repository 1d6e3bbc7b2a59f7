//! Hashed set of states with dense ids.
//!
//! States are kept zigzag/varint encoded in one byte arena; most slots hold
//! small values so this is several times denser than storing `i32`s.

use std::hash::{BuildHasher, Hasher};

use hashbrown::HashTable;
use rustc_hash::FxBuildHasher;

#[derive(Default)]
pub struct StateStore {
    width: usize,
    bytes: Vec<u8>,
    offsets: Vec<u64>,
    table: HashTable<u32>,
    scratch: Vec<u8>,
}

fn encode(s: &[i32], out: &mut Vec<u8>) {
    out.clear();
    for &v in s {
        let mut z = ((v << 1) ^ (v >> 31)) as u32;
        while z >= 0x80 {
            out.push((z as u8) | 0x80);
            z >>= 7;
        }
        out.push(z as u8);
    }
}

fn decode(mut bytes: &[u8], out: &mut Vec<i32>) {
    out.clear();
    while !bytes.is_empty() {
        let mut z: u32 = 0;
        let mut shift = 0;
        loop {
            let b = bytes[0];
            bytes = &bytes[1..];
            z |= ((b & 0x7f) as u32) << shift;
            if b < 0x80 {
                break;
            }
            shift += 7;
        }
        out.push(((z >> 1) as i32) ^ -((z & 1) as i32));
    }
}

fn hash_bytes(b: &[u8]) -> u64 {
    let mut h = FxBuildHasher.build_hasher();
    h.write(b);
    h.finish()
}

impl StateStore {
    pub fn new(width: usize) -> Self {
        StateStore {
            width,
            offsets: vec![0],
            ..StateStore::default()
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> usize {
        self.width
    }

    fn encoded(&self, id: u32) -> &[u8] {
        let i = id as usize;
        &self.bytes[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    /// Insert `s`; returns its id and whether it was new.
    pub fn insert(&mut self, s: &[i32]) -> (u32, bool) {
        debug_assert_eq!(s.len(), self.width);
        let mut scratch = std::mem::take(&mut self.scratch);
        encode(s, &mut scratch);
        let hash = hash_bytes(&scratch);
        let (bytes, offsets) = (&self.bytes, &self.offsets);
        let get = |id: u32| &bytes[offsets[id as usize] as usize..offsets[id as usize + 1] as usize];
        if let Some(&id) = self.table.find(hash, |&id| get(id) == scratch.as_slice()) {
            self.scratch = scratch;
            return (id, false);
        }
        let id = self.len() as u32;
        self.bytes.extend_from_slice(&scratch);
        self.offsets.push(self.bytes.len() as u64);
        let (bytes, offsets) = (&self.bytes, &self.offsets);
        self.table.insert_unique(hash, id, |&id| {
            hash_bytes(&bytes[offsets[id as usize] as usize..offsets[id as usize + 1] as usize])
        });
        self.scratch = scratch;
        (id, true)
    }

    pub fn lookup(&mut self, s: &[i32]) -> Option<u32> {
        let mut scratch = std::mem::take(&mut self.scratch);
        encode(s, &mut scratch);
        let hash = hash_bytes(&scratch);
        let found = self.table.find(hash, |&id| self.encoded(id) == scratch.as_slice()).copied();
        self.scratch = scratch;
        found
    }

    /// Decode state `id` into `out`.
    pub fn get_into(&self, id: u32, out: &mut Vec<i32>) {
        decode(self.encoded(id), out);
    }

    pub fn get(&self, id: u32) -> Vec<i32> {
        let mut v = Vec::with_capacity(self.width);
        self.get_into(id, &mut v);
        v
    }

    /// Approximate heap footprint in bytes.
    pub fn memory(&self) -> usize {
        self.bytes.capacity() + self.offsets.capacity() * 8 + self.table.capacity() * 4
    }
}
