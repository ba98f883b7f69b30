//! Ground-truth reference implementations: exhaustive partition enumeration,
//! a plain array union-find, and seeded partition generators. These stay
//! deliberately simple-minded; the succinct structures are tested against
//! them, never the other way around.

use crate::partition::ClassSizes;
use crate::rng::SplitMix64;

/// All integer partitions of `n`, each as a nonincreasing part list.
pub fn enumerate_partitions(n: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(remaining: u64, max_part: u64, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        let top = remaining.min(max_part);
        for part in (1..=top).rev() {
            current.push(part);
            rec(remaining - part, part, current, out);
            current.pop();
        }
    }
    rec(n, n, &mut current, &mut out);
    out
}

/// Textbook union-find over `0..n` with path halving and union by rank.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
            sets: n,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn set_count(&self) -> usize {
        self.sets
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            let grandparent = self.parent[self.parent[x]];
            self.parent[x] = grandparent;
            x = grandparent;
        }
        x
    }

    /// Merge; returns true when two distinct sets were joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                let (root, child) = if ra < rb { (ra, rb) } else { (rb, ra) };
                self.parent[child] = root;
                self.rank[root] += 1;
            }
        }
        self.sets -= 1;
        true
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Multiset of set sizes, sorted ascending.
    pub fn set_sizes(&mut self) -> Vec<u64> {
        let n = self.len();
        let mut counts = vec![0u64; n];
        for i in 0..n {
            let r = self.find(i);
            counts[r] += 1;
        }
        let mut sizes: Vec<u64> = counts.into_iter().filter(|&c| c > 0).collect();
        sizes.sort_unstable();
        sizes
    }

    /// Elements grouped by set, each group sorted, groups ordered by their
    /// smallest member.
    pub fn members(&mut self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let r = self.find(i);
            by_root.entry(r).or_default().push(i);
        }
        // Roots are not necessarily minimal under union by rank.
        let mut groups: Vec<Vec<usize>> = by_root.into_values().collect();
        groups.sort_unstable_by_key(|g| g[0]);
        groups
    }
}

/// Seeded random multiset of class sizes summing to `n`: at most two large
/// classes for shape variety, then sizes drawn on the sqrt(n) scale with
/// singletons mixed in. Both the class count and the number of distinct
/// sizes grow like sqrt(n), the regime the grouped structures live in.
pub fn random_class_sizes(n: u64, rng: &mut SplitMix64) -> ClassSizes {
    assert!(n >= 1);
    let mut sizes = Vec::new();
    let mut remaining = n;
    for _ in 0..rng.below(3) {
        if remaining < 2 {
            break;
        }
        let size = rng.range(1, remaining / 2);
        sizes.push(size);
        remaining -= size;
    }
    let cap = crate::isqrt::ceil_sqrt_reference(2 * n);
    while remaining > 0 {
        let size = if rng.below(4) == 0 {
            1
        } else {
            rng.range(1, cap.min(remaining))
        };
        sizes.push(size);
        remaining -= size;
    }
    ClassSizes::new(sizes).unwrap()
}

/// Like [`random_class_sizes`], but with at least `min_classes` classes:
/// singleton classes are reserved up front and the remainder is drawn
/// randomly.
pub fn random_class_sizes_min_classes(
    n: u64,
    min_classes: u64,
    rng: &mut SplitMix64,
) -> ClassSizes {
    assert!(min_classes >= 1 && min_classes <= n);
    let reserved = min_classes - 1;
    let mut sizes = vec![1u64; reserved as usize];
    sizes.extend_from_slice(random_class_sizes(n - reserved, rng).sizes());
    ClassSizes::new(sizes).unwrap()
}
