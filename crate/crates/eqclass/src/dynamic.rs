//! Dynamic equivalence structure: merges on top of a static base.
//!
//! Queries run against a [`ConstEq`] base over the current labeling. Merges
//! are recorded beside it in a forest keyed by class representatives (the
//! smallest label of each static class): a small open-addressed dictionary
//! maps a representative to its parent representative, union-by-rank with
//! path compression keeps the trees shallow. Once `ceil(sqrt(n))` real
//! merges accumulate, the whole structure is rebuilt around the merged
//! class sizes, every element gets a fresh label, and the old-to-new
//! permutation is handed back as a [`RelabelEvent`] so callers can follow.
//!
//! Mutating and reading interleave freely from one thread; the structure
//! does no internal locking, and `find` compresses paths, so even reads
//! need exclusive access.

use std::collections::HashMap;

use crate::bits::PackedIntVec;
use crate::partition::GroupSequence;
use crate::probe::Probes;
use crate::serialize::{Dump, Field, StructureKind};
use crate::structures::{ConstEq, EquivQuery, GroupLocation};
use crate::Result;

/// The old-to-new label permutation emitted by a rebuild.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelabelEvent {
    pairs: Vec<(u64, u64)>,
}

impl RelabelEvent {
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    pub fn len(&self) -> u64 {
        self.pairs.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// True when the pairs form a bijection of `[1, n]` onto itself covering
    /// every label exactly once on both sides.
    pub fn is_permutation(&self, n: u64) -> bool {
        if self.len() != n {
            return false;
        }
        let mut old_seen = vec![false; n as usize + 1];
        let mut new_seen = vec![false; n as usize + 1];
        for &(old, new) in &self.pairs {
            if old == 0 || old > n || new == 0 || new > n {
                return false;
            }
            if old_seen[old as usize] || new_seen[new as usize] {
                return false;
            }
            old_seen[old as usize] = true;
            new_seen[new as usize] = true;
        }
        true
    }
}

/// Outcome of a union operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeReport {
    /// False when the two labels were already equivalent.
    pub merged: bool,
    /// True when this union triggered a rebuild.
    pub rebuilt: bool,
    pub relabel: Option<RelabelEvent>,
}

/// Forest node stored against a representative label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct MergeNode {
    /// Parent representative; 0 marks a root.
    parent: u64,
    rank: u8,
    /// Cleared when the node gains a child. Path compression may strand a
    /// false value here; the flag is monotone, never trusted as exact.
    leaf: bool,
    /// Rebuild scratch.
    visited: bool,
}

/// Open-addressed dictionary from representative label to [`MergeNode`].
/// Deterministic layout (fixed hash, insertion-driven growth) so seeded
/// runs replay identically; label 0 never occurs and marks empty slots.
#[derive(Debug, Clone, PartialEq, Eq)]
struct RepDict {
    keys: Vec<u64>,
    nodes: Vec<MergeNode>,
    len: usize,
}

const DICT_MIN_CAPACITY: usize = 16;

#[inline]
fn mix(key: u64) -> u64 {
    let mut z = key.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl RepDict {
    fn new() -> Self {
        RepDict {
            keys: vec![0; DICT_MIN_CAPACITY],
            nodes: vec![MergeNode::default(); DICT_MIN_CAPACITY],
            len: 0,
        }
    }

    fn capacity(&self) -> usize {
        self.keys.len()
    }

    fn len(&self) -> usize {
        self.len
    }

    fn slot_of(&self, key: u64, probes: &mut Probes) -> Option<usize> {
        debug_assert!(key != 0);
        let mask = self.capacity() - 1;
        let mut slot = (mix(key) as usize) & mask;
        loop {
            probes.count(1);
            match self.keys[slot] {
                0 => return None,
                k if k == key => return Some(slot),
                _ => slot = (slot + 1) & mask,
            }
        }
    }

    fn contains(&self, key: u64, probes: &mut Probes) -> bool {
        self.slot_of(key, probes).is_some()
    }

    fn node(&self, slot: usize) -> MergeNode {
        self.nodes[slot]
    }

    fn node_mut(&mut self, slot: usize) -> &mut MergeNode {
        &mut self.nodes[slot]
    }

    fn key(&self, slot: usize) -> u64 {
        self.keys[slot]
    }

    /// Insert a fresh key; the key must not be present.
    fn insert(&mut self, key: u64, node: MergeNode) {
        if (self.len + 1) * 2 > self.capacity() {
            self.grow();
        }
        let mask = self.capacity() - 1;
        let mut slot = (mix(key) as usize) & mask;
        while self.keys[slot] != 0 {
            debug_assert!(self.keys[slot] != key, "duplicate representative");
            slot = (slot + 1) & mask;
        }
        self.keys[slot] = key;
        self.nodes[slot] = node;
        self.len += 1;
    }

    fn grow(&mut self) {
        let new_cap = self.capacity() * 2;
        let old_keys = std::mem::replace(&mut self.keys, vec![0; new_cap]);
        let old_nodes = std::mem::replace(&mut self.nodes, vec![MergeNode::default(); new_cap]);
        self.len = 0;
        for (key, node) in old_keys.into_iter().zip(old_nodes) {
            if key != 0 {
                self.insert(key, node);
            }
        }
    }

    fn clear(&mut self) {
        self.keys = vec![0; DICT_MIN_CAPACITY];
        self.nodes = vec![MergeNode::default(); DICT_MIN_CAPACITY];
        self.len = 0;
    }

    fn occupied_slots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.capacity()).filter(move |&s| self.keys[s] != 0)
    }

    /// Exact bits: key and node arrays at current capacity plus the length
    /// scalar. Nodes pack to parent + rank + two flags.
    fn space_bits(&self) -> u64 {
        self.capacity() as u64 * (64 + 64 + 8 + 2) + 64
    }
}

/// Dynamic structure: static constant-probe base plus merge forest.
#[derive(Debug, Clone, PartialEq)]
pub struct DynEq {
    base: ConstEq,
    dict: RepDict,
    merge_count: u64,
    threshold: u64,
    rebuilds: u64,
}

impl DynEq {
    pub fn build(seq: &GroupSequence) -> Self {
        DynEq {
            base: ConstEq::build(seq),
            dict: RepDict::new(),
            merge_count: 0,
            threshold: crate::isqrt::ceil_sqrt_reference(seq.n()),
            rebuilds: 0,
        }
    }

    pub fn n(&self) -> u64 {
        self.base.n()
    }

    /// Real merges since the last rebuild.
    pub fn merge_count(&self) -> u64 {
        self.merge_count
    }

    /// Rebuild fires when the merge count reaches this.
    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn rebuilds(&self) -> u64 {
        self.rebuilds
    }

    /// Static base over the current labeling.
    pub fn base(&self) -> &ConstEq {
        &self.base
    }

    /// Representatives currently tracked by the merge dictionary.
    pub fn tracked_representatives(&self) -> u64 {
        self.dict.len() as u64
    }

    fn static_rep(&self, loc: &GroupLocation, probes: &mut Probes) -> u64 {
        self.base.class_start_probed(loc, probes)
    }

    /// Follow parent pointers to the root, compressing the path.
    fn root_of(&mut self, rep: u64, probes: &mut Probes) -> u64 {
        let Some(start) = self.dict.slot_of(rep, probes) else {
            return rep;
        };
        let mut path = Vec::new();
        let mut slot = start;
        loop {
            let node = self.dict.node(slot);
            if node.parent == 0 {
                break;
            }
            path.push(slot);
            slot = self
                .dict
                .slot_of(node.parent, probes)
                .expect("parent representative present");
        }
        let root = self.dict.key(slot);
        for s in path {
            self.dict.node_mut(s).parent = root;
        }
        root
    }

    /// Current representative of the class containing label `x`.
    pub fn find(&mut self, x: u64) -> Result<u64> {
        let mut probes = Probes::new();
        self.find_probed(x, &mut probes)
    }

    pub fn find_probed(&mut self, x: u64, probes: &mut Probes) -> Result<u64> {
        let loc = self.base.find_probed(x, probes)?;
        let rep = self.static_rep(&loc, probes);
        Ok(self.root_of(rep, probes))
    }

    /// Same-class query under the current (post-merge) classes.
    pub fn same(&mut self, x: u64, y: u64) -> Result<bool> {
        let mut probes = Probes::new();
        self.same_probed(x, y, &mut probes)
    }

    pub fn same_probed(&mut self, x: u64, y: u64, probes: &mut Probes) -> Result<bool> {
        let lx = self.base.find_probed(x, probes)?;
        let ly = self.base.find_probed(y, probes)?;
        if lx.same_class(&ly) {
            return Ok(true);
        }
        let rx = self.static_rep(&lx, probes);
        let ry = self.static_rep(&ly, probes);
        // A class never touched by a merge cannot have joined another.
        if !self.dict.contains(rx, probes) || !self.dict.contains(ry, probes) {
            return Ok(false);
        }
        Ok(self.root_of(rx, probes) == self.root_of(ry, probes))
    }

    /// Merge the classes of `x` and `y`. A union of already-equivalent
    /// labels reports `merged: false` and changes nothing.
    pub fn union(&mut self, x: u64, y: u64) -> Result<MergeReport> {
        let mut probes = Probes::new();
        let lx = self.base.find_probed(x, &mut probes)?;
        let ly = self.base.find_probed(y, &mut probes)?;
        let rx = self.static_rep(&lx, &mut probes);
        let ry = self.static_rep(&ly, &mut probes);
        let not_merged = MergeReport {
            merged: false,
            rebuilt: false,
            relabel: None,
        };
        if rx == ry {
            return Ok(not_merged);
        }
        let tracked_x = self.dict.contains(rx, &mut probes);
        let tracked_y = self.dict.contains(ry, &mut probes);
        if tracked_x && tracked_y && self.root_of(rx, &mut probes) == self.root_of(ry, &mut probes)
        {
            return Ok(not_merged);
        }
        for (rep, tracked) in [(rx, tracked_x), (ry, tracked_y)] {
            if !tracked {
                self.dict.insert(
                    rep,
                    MergeNode {
                        parent: 0,
                        rank: 0,
                        leaf: true,
                        visited: false,
                    },
                );
            }
        }
        let root_x = self.root_of(rx, &mut probes);
        let root_y = self.root_of(ry, &mut probes);
        debug_assert_ne!(root_x, root_y);
        let slot_x = self.dict.slot_of(root_x, &mut probes).unwrap();
        let slot_y = self.dict.slot_of(root_y, &mut probes).unwrap();
        let rank_x = self.dict.node(slot_x).rank;
        let rank_y = self.dict.node(slot_y).rank;
        let (root_slot, child_slot) = match rank_x.cmp(&rank_y) {
            std::cmp::Ordering::Greater => (slot_x, slot_y),
            std::cmp::Ordering::Less => (slot_y, slot_x),
            std::cmp::Ordering::Equal => {
                // Tie: smaller representative wins, keeping replays stable.
                let (r, c) = if root_x < root_y {
                    (slot_x, slot_y)
                } else {
                    (slot_y, slot_x)
                };
                self.dict.node_mut(r).rank += 1;
                (r, c)
            }
        };
        let root_key = self.dict.key(root_slot);
        self.dict.node_mut(child_slot).parent = root_key;
        self.dict.node_mut(root_slot).leaf = false;
        self.merge_count += 1;

        if self.merge_count >= self.threshold {
            let relabel = self.rebuild();
            return Ok(MergeReport {
                merged: true,
                rebuilt: true,
                relabel: Some(relabel),
            });
        }
        Ok(MergeReport {
            merged: true,
            rebuilt: false,
            relabel: None,
        })
    }

    /// Fold every recorded merge into a fresh static base, relabeling all
    /// elements. Returns the old-to-new permutation; clears the forest.
    pub fn rebuild(&mut self) -> RelabelEvent {
        let mut probes = Probes::new();
        let old_seq = self.base.group_sequence();
        let k = old_seq.k() as usize;
        let mut counts_remaining: Vec<u64> = old_seq.groups().iter().map(|g| g.count).collect();

        // Walk every tree once, node by node: each dictionary entry is the
        // representative of one static class that leaves its old group and
        // contributes its size to its root's merged set.
        let mut merged: HashMap<u64, (u64, Vec<u64>)> = HashMap::new();
        let slots: Vec<usize> = self.dict.occupied_slots().collect();
        for &start in &slots {
            if self.dict.node(start).visited {
                continue;
            }
            // Locate the root first, then account the unvisited path prefix.
            let mut slot = start;
            loop {
                let node = self.dict.node(slot);
                if node.parent == 0 {
                    break;
                }
                slot = self
                    .dict
                    .slot_of(node.parent, &mut probes)
                    .expect("parent present");
            }
            let root_key = self.dict.key(slot);
            let entry = merged.entry(root_key).or_insert((0, Vec::new()));
            let mut slot = start;
            loop {
                let node = self.dict.node(slot);
                if node.visited {
                    break;
                }
                self.dict.node_mut(slot).visited = true;
                let rep = self.dict.key(slot);
                let loc = self
                    .base
                    .find_probed(rep, &mut probes)
                    .expect("representative is a valid label");
                counts_remaining[(loc.group - 1) as usize] -= 1;
                entry.0 += loc.class_size;
                entry.1.push(rep);
                if node.parent == 0 {
                    break;
                }
                slot = self.dict.slot_of(node.parent, &mut probes).unwrap();
            }
        }

        // Combine surviving old groups with the merged sizes: radix sort by
        // size, then aggregate equal sizes in one scan.
        let mut sized: Vec<(u64, u64)> = Vec::with_capacity(k + merged.len());
        for (i, g) in old_seq.groups().iter().enumerate() {
            if counts_remaining[i] > 0 {
                sized.push((g.size, counts_remaining[i]));
            }
        }
        for (total, _) in merged.values() {
            sized.push((*total, 1));
        }
        radix_sort_by_key(&mut sized);
        let mut aggregated: Vec<(u64, u64)> = Vec::with_capacity(sized.len());
        for (size, count) in sized {
            match aggregated.last_mut() {
                Some((s, c)) if *s == size => *c += count,
                _ => aggregated.push((size, count)),
            }
        }
        let new_seq = GroupSequence::from_size_counts(aggregated);
        debug_assert_eq!(new_seq.n(), old_seq.n());

        // One new class per surviving old class and per merged set, bucketed
        // by size, ordered within a size by smallest old label.
        struct NewClass {
            min_old: u64,
            /// Start label and size of each member class, in emission order.
            members: Vec<(u64, u64)>,
        }
        let mut by_size: HashMap<u64, Vec<NewClass>> = HashMap::new();
        let mut merged_per_group: HashMap<u64, Vec<u64>> = HashMap::new();
        for (total, mut members) in merged.into_values() {
            members.sort_unstable();
            let mut sized_members = Vec::with_capacity(members.len());
            for &rep in &members {
                let loc = self.base.find(rep).expect("member label valid");
                merged_per_group
                    .entry(loc.group)
                    .or_default()
                    .push(loc.class_in_group);
                sized_members.push((rep, loc.class_size));
            }
            by_size.entry(total).or_default().push(NewClass {
                min_old: members[0],
                members: sized_members,
            });
        }
        for v in merged_per_group.values_mut() {
            v.sort_unstable();
        }
        for (gi, g) in old_seq.groups().iter().enumerate() {
            if counts_remaining[gi] == 0 {
                continue;
            }
            let group = gi as u64 + 1;
            let gone = merged_per_group.get(&group);
            let classes = by_size.entry(g.size).or_default();
            for idx in 1..=g.count {
                if gone.is_some_and(|v| v.binary_search(&idx).is_ok()) {
                    continue;
                }
                let start = old_seq.prefix_sum(group - 1) + (idx - 1) * g.size + 1;
                classes.push(NewClass {
                    min_old: start,
                    members: vec![(start, g.size)],
                });
            }
        }

        // Emit the permutation following the new canonical layout.
        let mut pairs: Vec<(u64, u64)> = Vec::with_capacity(old_seq.n() as usize);
        for (gi, g) in new_seq.groups().iter().enumerate() {
            let group = gi as u64 + 1;
            let mut classes = by_size.remove(&g.size).unwrap_or_default();
            classes.sort_unstable_by_key(|c| c.min_old);
            debug_assert_eq!(classes.len() as u64, g.count);
            let base = new_seq.prefix_sum(group - 1);
            for (ci, class) in classes.into_iter().enumerate() {
                let mut next = base + ci as u64 * g.size;
                for (member_start, member_size) in class.members {
                    for r in 0..member_size {
                        pairs.push((member_start + r, next + r + 1));
                    }
                    next += member_size;
                }
            }
        }
        debug_assert!(by_size.is_empty());

        self.base = ConstEq::build(&new_seq);
        self.dict.clear();
        self.merge_count = 0;
        self.rebuilds += 1;
        let event = RelabelEvent { pairs };
        debug_assert!(event.is_permutation(new_seq.n()));
        event
    }

    pub fn space_report(&self) -> Vec<(&'static str, u64)> {
        let mut report = self.base.space_report();
        report.push(("merge_dict", self.dict.space_bits()));
        report.push(("merge_state", 3 * 64));
        report
    }

    pub fn space_bits(&self) -> u64 {
        self.space_report().iter().map(|(_, b)| b).sum()
    }

    pub fn to_dump(&self) -> Dump {
        let mut fields = self.base.base_fields();
        let mut keys = PackedIntVec::new(64);
        let mut parents = PackedIntVec::new(64);
        let mut meta = PackedIntVec::new(16);
        // Key order, not slot order: the table layout depends on insertion
        // history, so only a canonical order keeps re-serialization of a
        // loaded dump byte-identical.
        let mut entries: Vec<(u64, MergeNode)> = self
            .dict
            .occupied_slots()
            .map(|slot| (self.dict.key(slot), self.dict.node(slot)))
            .collect();
        entries.sort_unstable_by_key(|&(key, _)| key);
        for (key, node) in entries {
            keys.push(key);
            parents.push(node.parent);
            meta.push(node.rank as u64 | (node.leaf as u64) << 8 | (node.visited as u64) << 9);
        }
        fields.push(Field::packed("merge_keys", &keys));
        fields.push(Field::packed("merge_parents", &parents));
        fields.push(Field::packed("merge_meta", &meta));
        fields.push(Field::packed(
            "merge_state",
            &PackedIntVec::from_values(64, [self.merge_count, self.rebuilds]),
        ));
        Dump {
            kind: StructureKind::Dynamic,
            n: self.base.n(),
            c: self.base.c(),
            k: self.base.k(),
            fields,
        }
    }

    pub fn from_dump(dump: &mut Dump) -> crate::Result<Self> {
        let base = ConstEq::from_dump(dump)?;
        let keys = dump.take("merge_keys")?.expect_width(64)?.into_packed()?;
        let parents = dump
            .take("merge_parents")?
            .expect_width(64)?
            .into_packed()?;
        let meta = dump.take("merge_meta")?.expect_width(16)?.into_packed()?;
        let state = dump.take("merge_state")?.expect_width(64)?.into_packed()?;
        if keys.len() != parents.len() || keys.len() != meta.len() || state.len() != 2 {
            return Err(crate::Error::Malformed(
                "merge dictionary arrays inconsistent".into(),
            ));
        }
        // Forest sanity: canonically ordered distinct representatives that
        // really are class starts, parents that exist, no cycles, and a
        // counter equal to the number of edges. Anything else could loop or
        // underflow a later rebuild.
        let key_list: Vec<u64> = keys.iter().collect();
        let key_set: std::collections::HashSet<u64> = key_list.iter().copied().collect();
        let mut edges = 0u64;
        let mut dict = RepDict::new();
        for i in 0..key_list.len() {
            let key = key_list[i];
            if key == 0 || key > base.n() {
                return Err(crate::Error::Malformed(format!(
                    "merge representative {key} out of range"
                )));
            }
            if i > 0 && key_list[i - 1] >= key {
                return Err(crate::Error::Malformed(
                    "merge representatives not strictly increasing".into(),
                ));
            }
            let loc = base.find(key).expect("key within range");
            if base.class_start(&loc) != key {
                return Err(crate::Error::Malformed(format!(
                    "merge representative {key} is not the start of its class"
                )));
            }
            let parent = parents.get(i as u64);
            if parent != 0 {
                if !key_set.contains(&parent) {
                    return Err(crate::Error::Malformed(format!(
                        "merge parent {parent} is not a stored representative"
                    )));
                }
                edges += 1;
            }
            let m = meta.get(i as u64);
            dict.insert(
                key,
                MergeNode {
                    parent,
                    rank: (m & 0xff) as u8,
                    leaf: m & (1 << 8) != 0,
                    visited: m & (1 << 9) != 0,
                },
            );
        }
        if state.get(0) != edges {
            return Err(crate::Error::Malformed(format!(
                "merge counter {} disagrees with {edges} forest edges",
                state.get(0)
            )));
        }
        // Walk each entry to a root with a step budget; exhausting the
        // budget means the parent pointers close a cycle somewhere.
        let mut probes = Probes::new();
        for &key in &key_list {
            let mut current = key;
            let mut steps = 0;
            loop {
                let slot = dict.slot_of(current, &mut probes).expect("key present");
                let parent = dict.node(slot).parent;
                if parent == 0 {
                    break;
                }
                steps += 1;
                if steps > key_list.len() {
                    return Err(crate::Error::Malformed(
                        "merge forest contains a cycle".into(),
                    ));
                }
                current = parent;
            }
        }
        let threshold = crate::isqrt::ceil_sqrt_reference(base.n());
        Ok(DynEq {
            base,
            dict,
            merge_count: state.get(0),
            threshold,
            rebuilds: state.get(1),
        })
    }
}

/// LSD radix sort of `(key, payload)` pairs by key, one byte per pass.
fn radix_sort_by_key(items: &mut Vec<(u64, u64)>) {
    if items.len() <= 1 {
        return;
    }
    let max_key = items.iter().map(|&(k, _)| k).max().unwrap_or(0);
    let mut scratch = vec![(0u64, 0u64); items.len()];
    let mut shift = 0u32;
    loop {
        let mut counts = [0usize; 256];
        for &(k, _) in items.iter() {
            counts[((k >> shift) & 0xff) as usize] += 1;
        }
        let mut starts = [0usize; 256];
        let mut acc = 0;
        for (b, &c) in counts.iter().enumerate() {
            starts[b] = acc;
            acc += c;
        }
        for &(k, p) in items.iter() {
            let b = ((k >> shift) & 0xff) as usize;
            scratch[starts[b]] = (k, p);
            starts[b] += 1;
        }
        std::mem::swap(items, &mut scratch);
        if shift >= 56 || (max_key >> (shift + 8)) == 0 {
            break;
        }
        shift += 8;
    }
}
