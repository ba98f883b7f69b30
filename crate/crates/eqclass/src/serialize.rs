//! Versioned binary dumps.
//!
//! Layout: a fixed header (magic, format version, structure kind, n, c, k),
//! then a sequence of named fields. Each field is length-prefixed and
//! bit-packed, written as whole 64-bit words, little-endian within words.
//! Packed integer arrays carry their element width; raw bit streams use
//! width 0. Unknown trailing fields survive a read untouched, which is how
//! the command-line harness stows its label map next to a structure.
//! Round-trips are bit-exact: reading and re-writing a dump reproduces the
//! original bytes.

use std::fmt;
use std::io::{self, Read, Write};

use crate::bits::BitBuf;
use crate::bits::PackedIntVec;
use crate::dynamic::DynEq;
use crate::probe::Probes;
use crate::structures::{CompactEq, ConstEq, EquivQuery, FastEq, GroupLocation};
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"EQSD";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    Compact = 1,
    Fast = 2,
    Const = 3,
    Dynamic = 4,
}

impl StructureKind {
    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            1 => Ok(StructureKind::Compact),
            2 => Ok(StructureKind::Fast),
            3 => Ok(StructureKind::Const),
            4 => Ok(StructureKind::Dynamic),
            other => Err(Error::Malformed(format!("unknown structure kind {other}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StructureKind::Compact => "compact",
            StructureKind::Fast => "fast",
            StructureKind::Const => "const",
            StructureKind::Dynamic => "dynamic",
        }
    }
}

/// One named, bit-packed field of a dump.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    pub name: String,
    /// Element width for packed integer arrays; 0 for raw bit streams.
    pub width: u16,
    pub bits: BitBuf,
}

impl Field {
    pub fn raw(name: &str, bits: BitBuf) -> Field {
        Field {
            name: name.to_string(),
            width: 0,
            bits,
        }
    }

    pub fn packed(name: &str, values: &PackedIntVec) -> Field {
        Field {
            name: name.to_string(),
            width: values.width() as u16,
            bits: values.buf().clone(),
        }
    }

    pub fn into_raw(self) -> Result<BitBuf> {
        if self.width != 0 {
            return Err(Error::Malformed(format!(
                "field {} is a packed array, expected a raw stream",
                self.name
            )));
        }
        Ok(self.bits)
    }

    pub fn into_packed(self) -> Result<PackedIntVec> {
        if self.width == 0 {
            return Err(Error::Malformed(format!(
                "field {} is a raw stream, expected a packed array",
                self.name
            )));
        }
        PackedIntVec::from_buf(self.width as u32, self.bits)
    }

    /// Check a packed field carries the width the reader derives from the
    /// header; widths are forced, so a mismatch means corruption.
    pub fn expect_width(self, width: u32) -> Result<Field> {
        if self.width as u32 != width {
            return Err(Error::Malformed(format!(
                "field {} has width {}, expected {width}",
                self.name, self.width
            )));
        }
        Ok(self)
    }
}

/// A structure rendered as named fields plus identification scalars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dump {
    pub kind: StructureKind,
    pub n: u64,
    pub c: u64,
    pub k: u64,
    pub fields: Vec<Field>,
}

/// Failure while reading a dump: transport versus content.
#[derive(Debug)]
pub enum ReadError {
    Io(io::Error),
    Malformed(String),
}

impl fmt::Display for ReadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReadError::Io(e) => write!(f, "io error: {e}"),
            ReadError::Malformed(msg) => write!(f, "malformed dump: {msg}"),
        }
    }
}

impl std::error::Error for ReadError {}

impl From<io::Error> for ReadError {
    fn from(e: io::Error) -> Self {
        ReadError::Io(e)
    }
}

impl From<Error> for ReadError {
    fn from(e: Error) -> Self {
        ReadError::Malformed(e.to_string())
    }
}

fn write_u16(w: &mut impl Write, v: u16) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_u64(w: &mut impl Write, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn read_exact<const N: usize>(r: &mut impl Read) -> io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

impl Dump {
    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(&MAGIC)?;
        write_u16(w, FORMAT_VERSION)?;
        w.write_all(&[self.kind as u8, 0])?;
        write_u64(w, self.n)?;
        write_u64(w, self.c)?;
        write_u64(w, self.k)?;
        write_u16(w, self.fields.len() as u16)?;
        for field in &self.fields {
            let name = field.name.as_bytes();
            assert!(name.len() <= u8::MAX as usize, "field name too long");
            w.write_all(&[name.len() as u8])?;
            w.write_all(name)?;
            write_u16(w, field.width)?;
            write_u64(w, field.bits.len())?;
            for &word in field.bits.words() {
                write_u64(w, word)?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("vec write cannot fail");
        out
    }

    pub fn read_from(r: &mut impl Read) -> std::result::Result<Dump, ReadError> {
        let magic = read_exact::<4>(r)?;
        if magic != MAGIC {
            return Err(ReadError::Malformed("bad magic".into()));
        }
        let version = u16::from_le_bytes(read_exact::<2>(r)?);
        if version != FORMAT_VERSION {
            return Err(ReadError::Malformed(format!(
                "unsupported format version {version}"
            )));
        }
        let [kind_byte, _flags] = read_exact::<2>(r)?;
        let kind = StructureKind::from_byte(kind_byte)?;
        let n = u64::from_le_bytes(read_exact::<8>(r)?);
        let c = u64::from_le_bytes(read_exact::<8>(r)?);
        let k = u64::from_le_bytes(read_exact::<8>(r)?);
        let field_count = u16::from_le_bytes(read_exact::<2>(r)?);
        let mut fields = Vec::with_capacity(field_count as usize);
        for _ in 0..field_count {
            let [name_len] = read_exact::<1>(r)?;
            let mut name = vec![0u8; name_len as usize];
            r.read_exact(&mut name)?;
            let name = String::from_utf8(name)
                .map_err(|_| ReadError::Malformed("field name not utf-8".into()))?;
            let width = u16::from_le_bytes(read_exact::<2>(r)?);
            let bit_len = u64::from_le_bytes(read_exact::<8>(r)?);
            if bit_len > (1u64 << 40) {
                return Err(ReadError::Malformed(format!(
                    "field {name} implausibly large ({bit_len} bits)"
                )));
            }
            let word_count = bit_len.div_ceil(64) as usize;
            // Grow while reading: a corrupt length must hit end-of-input,
            // not reserve the memory it claims.
            let mut words = Vec::with_capacity(word_count.min(1 << 16));
            for _ in 0..word_count {
                words.push(u64::from_le_bytes(read_exact::<8>(r)?));
            }
            let bits = BitBuf::from_words(words, bit_len)?;
            fields.push(Field { name, width, bits });
        }
        Ok(Dump {
            kind,
            n,
            c,
            k,
            fields,
        })
    }

    /// Remove and return the named field.
    pub fn take(&mut self, name: &str) -> Result<Field> {
        let idx = self
            .fields
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| Error::Malformed(format!("missing field {name}")))?;
        Ok(self.fields.remove(idx))
    }
}

/// A loaded structure of any kind; what the harness works with after
/// reading a dump. Queries take `&mut self` because the dynamic variant
/// compresses paths.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyEq {
    Compact(CompactEq),
    Fast(FastEq),
    Const(ConstEq),
    Dynamic(DynEq),
}

impl AnyEq {
    pub fn kind(&self) -> StructureKind {
        match self {
            AnyEq::Compact(_) => StructureKind::Compact,
            AnyEq::Fast(_) => StructureKind::Fast,
            AnyEq::Const(_) => StructureKind::Const,
            AnyEq::Dynamic(_) => StructureKind::Dynamic,
        }
    }

    pub fn n(&self) -> u64 {
        match self {
            AnyEq::Compact(s) => s.n(),
            AnyEq::Fast(s) => s.n(),
            AnyEq::Const(s) => s.n(),
            AnyEq::Dynamic(s) => s.n(),
        }
    }

    pub fn class_count(&self) -> u64 {
        match self {
            AnyEq::Compact(s) => s.c(),
            AnyEq::Fast(s) => s.c(),
            AnyEq::Const(s) => s.c(),
            AnyEq::Dynamic(s) => s.base().c(),
        }
    }

    pub fn group_count(&self) -> u64 {
        match self {
            AnyEq::Compact(s) => s.k(),
            AnyEq::Fast(s) => s.k(),
            AnyEq::Const(s) => s.k(),
            AnyEq::Dynamic(s) => s.base().k(),
        }
    }

    pub fn same_class(&mut self, x: u64, y: u64) -> Result<bool> {
        self.same_class_probed(x, y, &mut Probes::new())
    }

    pub fn same_class_probed(&mut self, x: u64, y: u64, probes: &mut Probes) -> Result<bool> {
        match self {
            AnyEq::Compact(s) => s.same_class_probed(x, y, probes),
            AnyEq::Fast(s) => s.same_class_probed(x, y, probes),
            AnyEq::Const(s) => s.same_class_probed(x, y, probes),
            AnyEq::Dynamic(s) => s.same_probed(x, y, probes),
        }
    }

    pub fn find(&mut self, x: u64) -> Result<GroupLocation> {
        match self {
            AnyEq::Compact(s) => EquivQuery::find(s, x),
            AnyEq::Fast(s) => EquivQuery::find(s, x),
            AnyEq::Const(s) => EquivQuery::find(s, x),
            AnyEq::Dynamic(s) => EquivQuery::find(s.base(), x),
        }
    }

    pub fn space_report(&self) -> Vec<(&'static str, u64)> {
        match self {
            AnyEq::Compact(s) => s.space_report(),
            AnyEq::Fast(s) => s.space_report(),
            AnyEq::Const(s) => s.space_report(),
            AnyEq::Dynamic(s) => s.space_report(),
        }
    }

    pub fn space_bits(&self) -> u64 {
        self.space_report().iter().map(|(_, b)| b).sum()
    }

    pub fn to_dump(&self) -> Dump {
        match self {
            AnyEq::Compact(s) => s.to_dump(),
            AnyEq::Fast(s) => s.to_dump(),
            AnyEq::Const(s) => s.to_dump(),
            AnyEq::Dynamic(s) => s.to_dump(),
        }
    }

    /// Rebuild a structure from a dump; fields the structure does not own
    /// (for example a harness label map) stay behind in `dump.fields`.
    pub fn from_dump(dump: &mut Dump) -> Result<AnyEq> {
        match dump.kind {
            StructureKind::Compact => Ok(AnyEq::Compact(CompactEq::from_dump(dump)?)),
            StructureKind::Fast => Ok(AnyEq::Fast(FastEq::from_dump(dump)?)),
            StructureKind::Const => Ok(AnyEq::Const(ConstEq::from_dump(dump)?)),
            StructureKind::Dynamic => Ok(AnyEq::Dynamic(DynEq::from_dump(dump)?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::random_class_sizes;
    use crate::partition::GroupSequence;
    use crate::rng::SplitMix64;

    fn structures_for(n: u64, seed: u64) -> Vec<AnyEq> {
        let mut rng = SplitMix64::new(seed);
        let seq = GroupSequence::from_sizes(&random_class_sizes(n, &mut rng));
        vec![
            AnyEq::Compact(CompactEq::build(&seq)),
            AnyEq::Fast(FastEq::build(&seq)),
            AnyEq::Const(ConstEq::build(&seq)),
            AnyEq::Dynamic(DynEq::build(&seq)),
        ]
    }

    #[test]
    fn round_trip_is_bit_exact_for_every_kind() {
        for mut original in structures_for(5_000, 0xd00d) {
            let bytes = original.to_dump().to_bytes();
            let mut dump = Dump::read_from(&mut bytes.as_slice()).unwrap();
            let mut loaded = AnyEq::from_dump(&mut dump).unwrap();
            assert!(dump.fields.is_empty(), "structure left fields behind");
            assert_eq!(loaded, original);
            assert_eq!(loaded.to_dump().to_bytes(), bytes);
            // Behavioral spot check on top of structural equality.
            let mut rng = SplitMix64::new(9);
            for _ in 0..200 {
                let x = rng.range(1, original.n());
                let y = rng.range(1, original.n());
                assert_eq!(
                    loaded.same_class(x, y).unwrap(),
                    original.same_class(x, y).unwrap()
                );
            }
        }
    }

    #[test]
    fn dynamic_round_trip_preserves_merge_state() {
        let mut rng = SplitMix64::new(0x11);
        let seq = GroupSequence::from_sizes(&random_class_sizes(2_000, &mut rng));
        let mut dyn_eq = DynEq::build(&seq);
        // Enough merges to grow the dictionary through several capacities
        // without tripping the rebuild threshold.
        while dyn_eq.merge_count() + 1 < dyn_eq.threshold() {
            let x = rng.range(1, seq.n());
            let y = rng.range(1, seq.n());
            dyn_eq.union(x, y).unwrap();
        }
        let bytes = dyn_eq.to_dump().to_bytes();
        let mut dump = Dump::read_from(&mut bytes.as_slice()).unwrap();
        let mut loaded = match AnyEq::from_dump(&mut dump).unwrap() {
            AnyEq::Dynamic(d) => d,
            other => panic!("wrong kind {:?}", other.kind()),
        };
        assert_eq!(loaded.merge_count(), dyn_eq.merge_count());
        // Byte equality first: find() compresses paths and would perturb it.
        assert_eq!(loaded.to_dump().to_bytes(), bytes);
        for x in 1..=seq.n() {
            assert_eq!(loaded.find(x).unwrap(), dyn_eq.find(x).unwrap());
        }
    }

    #[test]
    fn corrupt_dumps_are_rejected() {
        let original = &structures_for(100, 1)[2];
        let bytes = original.to_dump().to_bytes();

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            Dump::read_from(&mut bad_magic.as_slice()),
            Err(ReadError::Malformed(_))
        ));

        let mut bad_version = bytes.clone();
        bad_version[4] = 0xff;
        assert!(Dump::read_from(&mut bad_version.as_slice()).is_err());

        let mut bad_kind = bytes.clone();
        bad_kind[6] = 9;
        assert!(Dump::read_from(&mut bad_kind.as_slice()).is_err());

        let truncated = &bytes[..bytes.len() - 3];
        assert!(matches!(
            Dump::read_from(&mut &truncated[..]),
            Err(ReadError::Io(_))
        ));
    }

    /// Replace one value of a packed field, keeping the dump structurally
    /// valid.
    fn poison_packed(dump: &mut Dump, name: &str, index: u64, value: u64) {
        let field = dump.take(name).unwrap();
        let width = field.width;
        let packed = field.into_packed().unwrap();
        let values: Vec<u64> = packed
            .iter()
            .enumerate()
            .map(|(i, v)| if i as u64 == index { value } else { v })
            .collect();
        dump.fields.push(Field::packed(
            name,
            &PackedIntVec::from_values(width as u32, values),
        ));
    }

    #[test]
    fn semantically_corrupt_dumps_are_rejected() {
        let all = structures_for(500, 0xbad);

        // Zero class count: queries would divide by it.
        let mut dump = all[2].to_dump();
        poison_packed(&mut dump, "group_counts", 0, 0);
        assert!(AnyEq::from_dump(&mut dump).is_err());

        // Non-increasing prefix sums.
        let mut dump = all[2].to_dump();
        poison_packed(&mut dump, "prefix_sums", 1, 0);
        assert!(AnyEq::from_dump(&mut dump).is_err());

        // Anchor pointing at the wrong group.
        let mut dump = all[2].to_dump();
        let first_anchor = dump
            .fields
            .iter()
            .find(|f| f.name == "anchors")
            .map(|f| f.bits.get_bits(0, f.width as u32))
            .unwrap();
        let flipped = if first_anchor == 0 { 2 } else { 0 };
        poison_packed(&mut dump, "anchors", 0, flipped);
        assert!(AnyEq::from_dump(&mut dump).is_err());

        // Compact stream totals disagreeing with the header.
        let mut dump = all[0].to_dump();
        dump.n += 1;
        assert!(AnyEq::from_dump(&mut dump).is_err());

        // Shifted shadow marks: same count of ones, wrong start.
        let mut dump = all[0].to_dump();
        let marks = dump.take("delta_marks").unwrap().into_raw().unwrap();
        let mut shifted = BitBuf::new();
        shifted.push_bit(false);
        for i in 0..marks.len() - 1 {
            shifted.push_bit(marks.get_bit(i));
        }
        dump.fields.push(Field::raw("delta_marks", shifted));
        assert!(AnyEq::from_dump(&mut dump).is_err());

        // Fast sample value off by one.
        let mut dump = all[1].to_dump();
        if dump
            .fields
            .iter()
            .any(|f| f.name == "sample_keys" && !f.bits.is_empty())
        {
            let first = dump
                .fields
                .iter()
                .find(|f| f.name == "sample_keys")
                .unwrap();
            let width = first.width as u32;
            let old = first.bits.get_bits(0, width);
            poison_packed(&mut dump, "sample_keys", 0, old + 1);
            assert!(AnyEq::from_dump(&mut dump).is_err());
        }
    }

    #[test]
    fn corrupt_merge_forests_are_rejected() {
        let mut rng = SplitMix64::new(0x77);
        let seq = GroupSequence::from_sizes(&random_class_sizes(400, &mut rng));
        let mut dyn_eq = DynEq::build(&seq);
        while dyn_eq.merge_count() < 3 {
            dyn_eq
                .union(rng.range(1, seq.n()), rng.range(1, seq.n()))
                .unwrap();
        }
        let good = dyn_eq.to_dump();

        // Parent that is not a stored representative.
        let mut dump = good.clone();
        poison_packed(&mut dump, "merge_parents", 0, seq.n());
        assert!(AnyEq::from_dump(&mut dump).is_err());

        // Two nodes pointing at each other.
        let mut dump = good.clone();
        let keys: Vec<u64> = dump
            .fields
            .iter()
            .find(|f| f.name == "merge_keys")
            .unwrap()
            .bits
            .words()
            .to_vec();
        if keys.len() >= 2 {
            poison_packed(&mut dump, "merge_parents", 0, keys[1]);
            poison_packed(&mut dump, "merge_parents", 1, keys[0]);
            assert!(AnyEq::from_dump(&mut dump).is_err());
        }

        // Counter not matching the edge count.
        let mut dump = good.clone();
        poison_packed(&mut dump, "merge_state", 0, 0);
        assert!(AnyEq::from_dump(&mut dump).is_err());

        // Representative that is not a class start: use a label inside a
        // class of size > 1 that is not in the dictionary.
        let mut dump = good;
        let big_group = (1..=seq.k()).find(|&g| seq.group(g).size > 1);
        if let Some(g) = big_group {
            let inside = seq.prefix_sum(g - 1) + 2;
            poison_packed(&mut dump, "merge_keys", 0, inside.min(seq.n()));
            let result = AnyEq::from_dump(&mut dump);
            assert!(result.is_err());
        }
    }

    #[test]
    fn corrupted_bytes_never_panic_the_loader() {
        // Single-byte mutations at every offset plus seeded multi-bit
        // damage: loads may fail however they like but must return.
        let mut rng = SplitMix64::new(0xf022);
        for original in structures_for(300, 0xf2) {
            let bytes = original.to_dump().to_bytes();
            for pos in 0..bytes.len() {
                let mut mutated = bytes.clone();
                mutated[pos] ^= 0x55;
                if let Ok(mut dump) = Dump::read_from(&mut mutated.as_slice()) {
                    let _ = AnyEq::from_dump(&mut dump);
                }
            }
            for _ in 0..200 {
                let mut mutated = bytes.clone();
                for _ in 0..=rng.below(8) {
                    let pos = rng.below(mutated.len() as u64) as usize;
                    mutated[pos] ^= 1 << rng.below(8);
                }
                let take = rng.range(1, mutated.len() as u64) as usize;
                if let Ok(mut dump) = Dump::read_from(&mut mutated[..take].as_ref()) {
                    let _ = AnyEq::from_dump(&mut dump);
                }
                if let Ok(mut dump) = Dump::read_from(&mut mutated.as_slice()) {
                    let _ = AnyEq::from_dump(&mut dump);
                }
            }
        }
    }

    #[test]
    fn missing_field_is_reported() {
        let original = &structures_for(100, 2)[0];
        let mut dump = original.to_dump();
        dump.take("sample_sums").unwrap();
        assert!(AnyEq::from_dump(&mut dump).is_err());
    }

    #[test]
    fn extra_fields_survive() {
        let original = &structures_for(100, 3)[2];
        let mut dump = original.to_dump();
        let mut extra = BitBuf::new();
        extra.push_bits(0b101, 3);
        dump.fields.push(Field::raw("companion", extra));
        let bytes = dump.to_bytes();
        let mut reread = Dump::read_from(&mut bytes.as_slice()).unwrap();
        let _structure = AnyEq::from_dump(&mut reread).unwrap();
        assert_eq!(reread.fields.len(), 1);
        assert_eq!(reread.fields[0].name, "companion");
    }
}
