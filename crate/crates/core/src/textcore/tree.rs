use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::sa::SuffixArrayIndex;

pub type NodeId = u32;
pub const NO_NODE: NodeId = u32::MAX;

/// Suffix tree topology recovered from a suffix array and its LCP array.
///
/// Nodes are numbered in preorder (root = 0). Every node stores its parent,
/// string depth, suffix range `[sp, ep]` and the last preorder id of its
/// subtree, so `v` descends from `u` iff `u <= v <= end[u]`. Leaves have
/// the full suffix length as string depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeView {
    parent: Vec<NodeId>,
    depth: Vec<u32>,
    level: Vec<u32>,
    sp: Vec<u32>,
    ep: Vec<u32>,
    end: Vec<NodeId>,
    leaf_of_slot: Vec<NodeId>,
    internal_by_range: HashMap<(u32, u32), NodeId>,
}

struct Open {
    depth: u32,
    leaf: Option<u32>,
    children: Vec<u32>,
}

struct Built {
    depth: u32,
    leaf: Option<u32>,
    children: Vec<u32>,
}

impl TreeView {
    /// Requires a text whose suffixes are prefix-free (it ends with a
    /// separator).
    pub fn build(idx: &SuffixArrayIndex) -> Self {
        let n = idx.len();
        let sa = idx.sa();
        let lcp = idx.lcp();
        let mut built: Vec<Built> = Vec::with_capacity(2 * n + 1);
        let finish = |built: &mut Vec<Built>, o: Open| -> u32 {
            built.push(Built {
                depth: o.depth,
                leaf: o.leaf,
                children: o.children,
            });
            (built.len() - 1) as u32
        };
        let mut stack = vec![Open {
            depth: 0,
            leaf: None,
            children: Vec::new(),
        }];
        for k in 0..n {
            if k > 0 {
                let l = lcp[k];
                let mut last: Option<u32> = None;
                while stack.len() > 1 {
                    let top = stack.last().unwrap();
                    if top.depth > l || (top.leaf.is_some() && top.depth >= l) {
                        let mut o = stack.pop().unwrap();
                        if let Some(c) = last.take() {
                            o.children.push(c);
                        }
                        last = Some(finish(&mut built, o));
                    } else {
                        break;
                    }
                }
                let top = stack.last_mut().unwrap();
                if top.depth < l {
                    stack.push(Open {
                        depth: l,
                        leaf: None,
                        children: last.into_iter().collect(),
                    });
                } else if let Some(c) = last {
                    top.children.push(c);
                }
            }
            stack.push(Open {
                depth: (n - sa[k] as usize) as u32,
                leaf: Some(k as u32),
                children: Vec::new(),
            });
        }
        let mut last: Option<u32> = None;
        while let Some(mut o) = stack.pop() {
            if let Some(c) = last.take() {
                o.children.push(c);
            }
            last = Some(finish(&mut built, o));
        }
        let root = last.unwrap();

        // Preorder numbering.
        let total = built.len();
        let mut parent = vec![NO_NODE; total];
        let mut depth = vec![0; total];
        let mut level = vec![0; total];
        let mut sp = vec![0; total];
        let mut ep = vec![0; total];
        let mut end = vec![0; total];
        let mut leaf_of_slot = vec![NO_NODE; n];
        let mut order = 0u32;
        // (built id, parent preorder, level, visited)
        let mut work: Vec<(u32, NodeId, u32, bool)> = vec![(root, NO_NODE, 0, false)];
        let mut pre_of = vec![0u32; total];
        while let Some((b, par, lv, visited)) = work.pop() {
            let node = &built[b as usize];
            if visited {
                let me = pre_of[b as usize] as usize;
                end[me] = order - 1;
                if let (Some(&first), Some(&lastc)) = (node.children.first(), node.children.last()) {
                    sp[me] = sp[pre_of[first as usize] as usize];
                    ep[me] = ep[pre_of[lastc as usize] as usize];
                }
                continue;
            }
            let me = order;
            order += 1;
            pre_of[b as usize] = me;
            parent[me as usize] = par;
            depth[me as usize] = node.depth;
            level[me as usize] = lv;
            if let Some(slot) = node.leaf {
                sp[me as usize] = slot;
                ep[me as usize] = slot;
                leaf_of_slot[slot as usize] = me;
            }
            work.push((b, par, lv, true));
            for &c in node.children.iter().rev() {
                work.push((c, me, lv + 1, false));
            }
        }
        let mut internal_by_range = HashMap::new();
        for v in 0..total {
            let is_leaf = n > 0 && sp[v] == ep[v] && leaf_of_slot[sp[v] as usize] == v as u32;
            if !is_leaf {
                internal_by_range.insert((sp[v], ep[v]), v as u32);
            }
        }
        TreeView {
            parent,
            depth,
            level,
            sp,
            ep,
            end,
            leaf_of_slot,
            internal_by_range,
        }
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_of_slot.len()
    }

    #[inline]
    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let p = self.parent[v as usize];
        (p != NO_NODE).then_some(p)
    }

    #[inline]
    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v as usize] as usize
    }

    #[inline]
    pub fn level(&self, v: NodeId) -> usize {
        self.level[v as usize] as usize
    }

    #[inline]
    pub fn range(&self, v: NodeId) -> (usize, usize) {
        (self.sp[v as usize] as usize, self.ep[v as usize] as usize)
    }

    /// Last preorder id inside the subtree of `v`.
    #[inline]
    pub fn subtree_end(&self, v: NodeId) -> NodeId {
        self.end[v as usize]
    }

    #[inline]
    pub fn is_ancestor(&self, u: NodeId, v: NodeId) -> bool {
        u <= v && v <= self.end[u as usize]
    }

    #[inline]
    pub fn leaf(&self, slot: usize) -> NodeId {
        self.leaf_of_slot[slot]
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        let (sp, ep) = self.range(v);
        sp == ep && self.leaf_of_slot.get(sp) == Some(&v)
    }

    /// Node whose suffix range is exactly `[sp, ep]`.
    pub fn node_for_range(&self, sp: usize, ep: usize) -> Option<NodeId> {
        if sp == ep {
            return self.leaf_of_slot.get(sp).copied();
        }
        self.internal_by_range.get(&(sp as u32, ep as u32)).copied()
    }

    /// Shallowest node whose path is prefixed by `p`.
    pub fn locus(&self, idx: &SuffixArrayIndex, p: &[u32]) -> Option<NodeId> {
        let (sp, ep) = idx.suffix_range(p)?;
        self.node_for_range(sp, ep)
    }

    pub fn lca(&self, mut a: NodeId, mut b: NodeId) -> NodeId {
        while self.level(a) > self.level(b) {
            a = self.parent[a as usize];
        }
        while self.level(b) > self.level(a) {
            b = self.parent[b as usize];
        }
        while a != b {
            a = self.parent[a as usize];
            b = self.parent[b as usize];
        }
        a
    }

    /// The node at the lower end of the edge holding the point at string
    /// depth `d` on the root path of `v` (`v` itself if `depth(v) == d`).
    pub fn point_base(&self, mut v: NodeId, d: usize) -> NodeId {
        while let Some(p) = self.parent(v) {
            if self.depth(p) >= d {
                v = p;
            } else {
                break;
            }
        }
        v
    }

    pub fn heap_bytes(&self) -> usize {
        4 * (self.parent.len() * 6 + self.leaf_of_slot.len()) + 16 * self.internal_by_range.len()
    }
}
