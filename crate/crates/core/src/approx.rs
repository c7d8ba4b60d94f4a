//! Approximate threshold search with additive error `epsilon`.
//!
//! Every leaf of the suffix tree over the transformed text is marked with
//! the original position its suffix starts at; an internal node is marked
//! `d` when it is the lowest common ancestor of two leaves marked `d`. Each
//! marked node links to its nearest proper ancestor carrying the same mark
//! (the root stands in when there is none). For a pattern `p` whose locus is
//! `v`, the occurrences of `p` at position `d` correspond to exactly one
//! link with origin inside the subtree of `v` and target above it.
//!
//! Along a link the probability of the path prefix at `d` changes with the
//! prefix length. Links are cut into segments whose probabilities stay
//! within `epsilon` of each other, and each segment stores its maximum, so a
//! query with threshold `tau` returns every position whose probability is
//! at least `tau` and nothing below `tau - epsilon`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorize::{transform_with, TransformedText};
use crate::model::{meets, Symbol, UncertainString};
use crate::qindex::{check_tau, IndexConfig, QueryStats};
use crate::textcore::{pattern_codes, NodeId, SuffixArrayIndex, TreeView};

/// A point on the suffix tree: string depth `depth` on the edge into `node`
/// (or `node` itself when `depth` equals its string depth).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreePoint {
    pub node: NodeId,
    pub depth: u32,
}

/// Link from a marked node to its nearest marked proper ancestor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawLink {
    pub origin: NodeId,
    /// Deepest meaningful string depth at the origin: the node depth for
    /// internal nodes, the length up to the next separator for leaves.
    pub origin_depth: u32,
    pub target: NodeId,
    pub target_depth: u32,
    pub pos_id: u32,
    /// Text offset of a leaf below `origin` marked `pos_id`.
    pub witness: u32,
}

/// One segment of a partitioned raw link: covers the prefix lengths
/// `target.depth + 1 ..= origin.depth`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub origin: TreePoint,
    pub target: TreePoint,
    pub pos_id: u32,
    pub stored_prob: f64,
    /// Marked node the raw link starts at; decides subtree membership.
    pub origin_node: NodeId,
}

/// Raw links of every marked node (root origins excluded), in no
/// particular order.
pub fn build_links(tt: &TransformedText, sa: &SuffixArrayIndex, tree: &TreeView) -> Vec<RawLink> {
    let n = sa.len();
    // Leaves grouped by mark, each group in suffix-array order.
    let mut by_mark: Vec<Vec<u32>> = vec![Vec::new(); tt.source_len() + 1];
    for k in 0..n {
        if let Some(d) = tt.pos(sa.sa()[k] as usize) {
            by_mark[d].push(k as u32);
        }
    }
    let mut links = Vec::new();
    let mut marked: Vec<(NodeId, u32)> = Vec::new();
    let mut stack: Vec<NodeId> = Vec::new();
    for (d, slots) in by_mark.iter().enumerate() {
        if slots.is_empty() {
            continue;
        }
        marked.clear();
        for (j, &k) in slots.iter().enumerate() {
            let leaf = tree.leaf(k as usize);
            let o = sa.sa()[k as usize];
            marked.push((leaf, o));
            if j > 0 {
                let prev = tree.leaf(slots[j - 1] as usize);
                marked.push((tree.lca(prev, leaf), o));
            }
        }
        marked.sort_unstable_by_key(|&(v, _)| v);
        marked.dedup_by_key(|&mut (v, _)| v);
        stack.clear();
        for &(v, witness) in &marked {
            while let Some(&top) = stack.last() {
                if tree.is_ancestor(top, v) {
                    break;
                }
                stack.pop();
            }
            if v != tree.root() {
                let target = stack.last().copied().unwrap_or(tree.root());
                let origin_depth = if tree.is_leaf(v) {
                    tt.run(witness as usize)
                } else {
                    tree.depth(v)
                };
                links.push(RawLink {
                    origin: v,
                    origin_depth: origin_depth as u32,
                    target,
                    target_depth: tree.depth(target) as u32,
                    pos_id: d as u32,
                    witness,
                });
            }
            stack.push(v);
        }
    }
    links
}

/// Splits a chain of probabilities (ordered from the origin end) into
/// maximal runs whose spread `max - min` stays within `epsilon`. Returns
/// half-open index ranges.
pub fn partition_chain(probs: &[f64], epsilon: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < probs.len() {
        let (mut lo, mut hi) = (probs[start], probs[start]);
        let mut end = start + 1;
        while end < probs.len() {
            let p = probs[end];
            if p.max(hi) - p.min(lo) > epsilon {
                break;
            }
            lo = lo.min(p);
            hi = hi.max(p);
            end += 1;
        }
        out.push((start, end));
        start = end;
    }
    out
}

/// Probabilities along a raw link, from the origin end (prefix length
/// `origin_depth`) up to length `target_depth + 1`.
pub fn chain_probabilities(tt: &TransformedText, raw: &RawLink) -> Vec<f64> {
    (raw.target_depth as usize + 1..=raw.origin_depth as usize)
        .rev()
        .map(|len| tt.window_probability(raw.witness as usize, len))
        .collect()
}

/// Cuts every raw link into epsilon-bounded segments, sorted by origin node.
pub fn partition_links(tt: &TransformedText, tree: &TreeView, raw: &[RawLink], epsilon: f64) -> Vec<Link> {
    let mut links = Vec::with_capacity(raw.len());
    for r in raw {
        let probs = chain_probabilities(tt, r);
        for (s, e) in partition_chain(&probs, epsilon) {
            // probs[k] is the prefix of length origin_depth - k.
            let deep = r.origin_depth as usize - s;
            let shallow = r.origin_depth as usize - (e - 1);
            let stored = probs[s..e].iter().copied().fold(f64::MIN, f64::max);
            links.push(Link {
                origin: TreePoint {
                    node: tree.point_base(r.origin, deep),
                    depth: deep as u32,
                },
                target: TreePoint {
                    node: tree.point_base(r.origin, shallow - 1),
                    depth: (shallow - 1) as u32,
                },
                pos_id: r.pos_id,
                stored_prob: stored,
                origin_node: r.origin,
            });
        }
    }
    links.sort_by_key(|l| (l.origin_node, std::cmp::Reverse(l.origin.depth)));
    links
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkIndex {
    tt: TransformedText,
    sa: SuffixArrayIndex,
    tree: TreeView,
    epsilon: f64,
    raw_count: usize,
    chain_count: usize,
    links: Vec<Link>,
}

impl LinkIndex {
    pub fn build(u: &UncertainString, tau_min: f64, epsilon: f64, cfg: &IndexConfig) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::Argument(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        u.ensure_valid()?;
        let tt = transform_with(u, tau_min, &cfg.transform)?;
        Ok(Self::from_transformed(tt, epsilon))
    }

    pub fn from_transformed(tt: TransformedText, epsilon: f64) -> Self {
        let sa = SuffixArrayIndex::build(tt.text().to_vec());
        let tree = TreeView::build(&sa);
        let raw = build_links(&tt, &sa, &tree);
        let links = partition_links(&tt, &tree, &raw, epsilon);
        LinkIndex {
            tt,
            sa,
            tree,
            epsilon,
            raw_count: raw.len(),
            chain_count: raw.iter().filter(|r| r.origin_depth > r.target_depth).count(),
            links,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tau_min(&self) -> f64 {
        self.tt.tau_min()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn raw_count(&self) -> usize {
        self.raw_count
    }

    /// Raw links covering at least one prefix length. A leaf whose suffix
    /// hits a separator right below its parent has an empty chain.
    pub fn chain_count(&self) -> usize {
        self.chain_count
    }

    pub fn tree(&self) -> &TreeView {
        &self.tree
    }

    pub fn transformed(&self) -> &TransformedText {
        &self.tt
    }

    pub fn suffix_array(&self) -> &SuffixArrayIndex {
        &self.sa
    }

    /// Segments stabbed by the locus of `p`, regardless of probability.
    pub fn stabbed(&self, p: &[Symbol]) -> Vec<&Link> {
        self.stab(p, &mut QueryStats::default())
    }

    fn stab(&self, p: &[Symbol], stats: &mut QueryStats) -> Vec<&Link> {
        let codes = pattern_codes(p);
        let Some((sp, ep)) = self.sa.suffix_range_counted(&codes, &mut stats.range_steps) else {
            return Vec::new();
        };
        let v = self.tree.node_for_range(sp, ep).expect("suffix range is a node range");
        let end = self.tree.subtree_end(v);
        let lo = self.links.partition_point(|l| l.origin_node < v);
        let hi = self.links.partition_point(|l| l.origin_node <= end);
        let m = p.len() as u32;
        stats.scanned += (hi - lo) as u64;
        self.links[lo..hi]
            .iter()
            .filter(|l| l.target.depth < m && m <= l.origin.depth)
            .collect()
    }

    /// Positions whose stabbed segment stores a probability of at least
    /// `tau`: a superset of the exact answer at `tau` and a subset of the
    /// exact answer at `tau - epsilon`.
    pub fn query(&self, p: &[Symbol], tau: f64) -> Result<Vec<usize>> {
        Ok(self.query_detailed(p, tau)?.0.into_iter().map(|(i, _)| i).collect())
    }

    /// `(position, stored probability)` pairs sorted by position.
    pub fn query_detailed(&self, p: &[Symbol], tau: f64) -> Result<(Vec<(usize, f64)>, QueryStats)> {
        check_tau(tau, self.tau_min())?;
        if p.is_empty() {
            return Err(Error::Argument("empty pattern".into()));
        }
        let mut stats = QueryStats::default();
        let mut out: Vec<(usize, f64)> = self
            .stab(p, &mut stats)
            .into_iter()
            .filter(|l| meets(l.stored_prob, tau))
            .map(|l| (l.pos_id as usize, l.stored_prob))
            .collect();
        out.sort_unstable_by_key(|&(i, _)| i);
        debug_assert!(out.windows(2).all(|w| w[0].0 != w[1].0));
        stats.outputs = out.len() as u64;
        Ok((out, stats))
    }

    pub fn heap_bytes(&self) -> usize {
        self.tt.heap_bytes()
            + self.sa.heap_bytes()
            + self.tree.heap_bytes()
            + self.links.len() * std::mem::size_of::<Link>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorize::transform;
    use crate::model::fixtures::*;
    use crate::model::{occurrence_probability, pattern};
    use crate::oracle::{oracle_probabilities, oracle_search};
    use std::collections::{BTreeSet, HashMap};

    fn index(u: &UncertainString, tau_min: f64, eps: f64) -> LinkIndex {
        LinkIndex::build(u, tau_min, eps, &IndexConfig::default()).unwrap()
    }

    /// Marks and nearest-marked-ancestor links straight from the
    /// definition: quadratic over leaf pairs, parent walks for targets.
    fn brute_links(tt: &TransformedText, sa: &SuffixArrayIndex, tree: &TreeView) -> BTreeSet<(NodeId, NodeId, u32)> {
        let mut marks: HashMap<NodeId, BTreeSet<usize>> = HashMap::new();
        let leaves: Vec<(NodeId, usize)> = (0..sa.len())
            .filter_map(|k| tt.pos(sa.sa()[k] as usize).map(|d| (tree.leaf(k), d)))
            .collect();
        for &(a, d) in &leaves {
            marks.entry(a).or_default().insert(d);
            for &(b, e) in &leaves {
                if a != b && d == e {
                    marks.entry(tree.lca(a, b)).or_default().insert(d);
                }
            }
        }
        let mut out = BTreeSet::new();
        for (&v, ds) in &marks {
            if v == tree.root() {
                continue;
            }
            for &d in ds {
                let mut a = tree.parent(v).unwrap();
                while a != tree.root() && !marks.get(&a).is_some_and(|m| m.contains(&d)) {
                    a = tree.parent(a).unwrap();
                }
                out.insert((v, a, d as u32));
            }
        }
        out
    }

    fn raw_set(raw: &[RawLink]) -> BTreeSet<(NodeId, NodeId, u32)> {
        raw.iter().map(|r| (r.origin, r.target, r.pos_id)).collect()
    }

    #[test]
    fn raw_links_match_definition() {
        let cases = [
            UncertainString::deterministic("aa", "aa").unwrap(),
            UncertainString::deterministic("d", "abcabba").unwrap(),
            branchy(),
            genome(),
            correlated(),
        ];
        for u in cases {
            let tt = transform(&u, 0.1).unwrap();
            let sa = SuffixArrayIndex::build(tt.text().to_vec());
            let tree = TreeView::build(&sa);
            let raw = build_links(&tt, &sa, &tree);
            assert_eq!(raw_set(&raw), brute_links(&tt, &sa, &tree), "{}", u.name());
            let marked_leaves = (0..sa.len()).filter(|&k| tt.pos(sa.sa()[k] as usize).is_some()).count();
            assert!(raw.len() <= 2 * marked_leaves);
        }
    }

    #[test]
    fn single_character_factors_link_to_root() {
        let u = ustr("u", &[&[('a', 0.5), ('b', 0.5)], &[('c', 0.5), ('d', 0.5)]]);
        let tt = transform(&u, 0.3).unwrap();
        assert_eq!(tt.factors().len(), 4);
        let sa = SuffixArrayIndex::build(tt.text().to_vec());
        let tree = TreeView::build(&sa);
        let raw = build_links(&tt, &sa, &tree);
        assert_eq!(raw.len(), 4);
        assert!(raw.iter().all(|r| r.target == tree.root()));
    }

    #[test]
    fn unique_link_per_occurrence() {
        for (u, tau_min) in [(branchy(), 0.1), (genome(), 0.1), (correlated(), 0.1)] {
            let ix = index(&u, tau_min, 0.05);
            let tt = ix.transformed();
            let text = tt.display_text();
            let mut patterns = BTreeSet::new();
            for o in 0..tt.len() {
                for len in 1..=tt.run(o) {
                    patterns.insert(text[o..o + len].to_string());
                }
            }
            for p in patterns {
                let p = pattern(&p).unwrap();
                let stabbed = ix.stabbed(&p);
                for (d, prob) in oracle_probabilities(&u, &p) {
                    if meets(prob, tau_min) {
                        let n = stabbed.iter().filter(|l| l.pos_id as usize == d).count();
                        assert_eq!(n, 1, "{} at {d}", crate::model::pattern_string(&p));
                    }
                }
            }
        }
    }

    #[test]
    fn partition_examples() {
        assert_eq!(partition_chain(&[0.25, 0.24, 0.22, 0.2], 0.1), vec![(0, 4)]);
        let chain: Vec<f64> = (0..=8).map(|k| 0.1 + 0.1 * k as f64).collect();
        let segs = partition_chain(&chain, 0.2);
        assert!(segs.len() >= 3);
        for &(s, e) in &segs {
            let w = &chain[s..e];
            let spread = w.iter().copied().fold(f64::MIN, f64::max) - w.iter().copied().fold(f64::MAX, f64::min);
            assert!(spread <= 0.2 + 1e-12);
        }
        let drops = [0.9, 0.5, 0.45, 0.1];
        assert_eq!(partition_chain(&drops, 1.0), vec![(0, 4)]);
        assert_eq!(partition_chain(&[], 0.3), vec![]);
    }

    #[test]
    fn epsilon_one_is_identity() {
        let u = genome();
        let ix = index(&u, 0.1, 1.0);
        assert_eq!(ix.links().len(), ix.chain_count());
    }

    #[test]
    fn link_count_bound() {
        for eps in [0.01, 0.05, 0.2] {
            let ix = index(&branchy(), 0.05, eps);
            let bound = ix.raw_count() * (1 + (1.0 / eps).ceil() as usize);
            assert!(ix.links().len() <= bound);
        }
    }

    #[test]
    fn stored_prob_is_segment_max() {
        let u = genome();
        let ix = index(&u, 0.1, 0.05);
        let tt = ix.transformed();
        let text = tt.display_text();
        for l in ix.links() {
            // Any leaf below the origin node marked pos_id spells the path.
            let (sp, ep) = ix.tree().range(l.origin_node);
            let o = (sp..=ep)
                .map(|k| ix.suffix_array().sa()[k] as usize)
                .find(|&o| tt.pos(o) == Some(l.pos_id as usize))
                .unwrap();
            let probs: Vec<f64> = (l.target.depth + 1..=l.origin.depth)
                .map(|len| {
                    let p = pattern(&text[o..o + len as usize]).unwrap();
                    occurrence_probability(&u, &p, l.pos_id as usize).unwrap()
                })
                .collect();
            let max = probs.iter().copied().fold(f64::MIN, f64::max);
            let min = probs.iter().copied().fold(f64::MAX, f64::min);
            assert!((l.stored_prob - max).abs() < 1e-9);
            assert!(max - min <= 0.05 + 1e-12);
            assert!(l.target.depth < l.origin.depth);
            assert!(ix.tree().depth(l.origin.node) >= l.origin.depth as usize);
        }
    }

    #[test]
    fn genome_example() {
        let ix = index(&genome(), 0.1, 0.05);
        assert_eq!(ix.query(&pattern("AT").unwrap(), 0.4).unwrap(), vec![9]);
        assert!(ix.query(&pattern("ZZ").unwrap(), 0.4).unwrap().is_empty());
        assert!(matches!(
            ix.query(&pattern("AT").unwrap(), 0.05),
            Err(Error::Threshold { .. })
        ));
    }

    #[test]
    fn sandwich_on_examples() {
        for u in [branchy(), genome(), correlated()] {
            for eps in [1e-9, 0.01, 0.05, 0.2] {
                let ix = index(&u, 0.05, eps);
                let tt = ix.transformed();
                let text = tt.display_text();
                let mut patterns = BTreeSet::new();
                for o in 0..tt.len() {
                    for len in 1..=tt.run(o) {
                        patterns.insert(text[o..o + len].to_string());
                    }
                }
                for p in patterns {
                    let p = pattern(&p).unwrap();
                    for tau in [0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.8] {
                        let got = ix.query(&p, tau).unwrap();
                        let exact = oracle_search(&u, &p, tau);
                        let loose = oracle_search(&u, &p, tau - eps);
                        assert!(exact.iter().all(|i| got.contains(i)));
                        assert!(got.iter().all(|i| loose.contains(i)));
                        if eps < 1e-6 {
                            assert_eq!(got, exact);
                        }
                    }
                }
            }
        }
    }
}
