//! Max-flow / min-cut with two search trees that are reused between
//! augmentations (Boykov–Kolmogorov).
//!
//! Terminal links are stored per node as a single signed residual `tr_cap`:
//! positive means residual capacity from the source, negative to the sink.

use std::collections::VecDeque;

use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;
const TERMINAL: u32 = u32::MAX - 1;
const ORPHAN: u32 = u32::MAX - 2;
const INFINITE_D: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    first: u32,
    /// Arc from this node towards its tree parent, or a sentinel.
    parent: u32,
    is_sink: bool,
    queued: bool,
    ts: u64,
    dist: u32,
    tr_cap: f64,
}

#[derive(Debug, Clone)]
struct Arc {
    head: u32,
    next: u32,
    r_cap: f64,
}

#[inline]
fn sister(a: u32) -> u32 {
    a ^ 1
}

/// Graph with terminal weights, solved in place.
#[derive(Debug, Clone, Default)]
pub struct BkGraph {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    flow: f64,
    active: VecDeque<u32>,
    orphans: VecDeque<u32>,
    time: u64,
}

impl BkGraph {
    pub fn with_capacity(nodes: usize, edges: usize) -> Self {
        Self {
            nodes: Vec::with_capacity(nodes),
            arcs: Vec::with_capacity(2 * edges),
            ..Self::default()
        }
    }

    /// Appends `n` nodes and returns the index of the first.
    pub fn add_nodes(&mut self, n: usize) -> usize {
        let first = self.nodes.len();
        self.nodes.extend((0..n).map(|_| Node {
            first: NONE,
            parent: NONE,
            is_sink: false,
            queued: false,
            ts: 0,
            dist: 0,
            tr_cap: 0.0,
        }));
        first
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Adds capacities `source → i` and `i → sink`.
    pub fn add_tweights(&mut self, i: usize, mut cap_source: f64, mut cap_sink: f64) {
        debug_assert!(cap_source >= 0.0 && cap_sink >= 0.0);
        let delta = self.nodes[i].tr_cap;
        if delta > 0.0 {
            cap_source += delta;
        } else {
            cap_sink -= delta;
        }
        self.flow += cap_source.min(cap_sink);
        self.nodes[i].tr_cap = cap_source - cap_sink;
    }

    /// Adds `i → j` with capacity `cap` and `j → i` with `rev_cap`.
    pub fn add_edge(&mut self, i: usize, j: usize, cap: f64, rev_cap: f64) {
        debug_assert!(i != j && cap >= 0.0 && rev_cap >= 0.0);
        let a = self.arcs.len() as u32;
        self.arcs.push(Arc {
            head: j as u32,
            next: self.nodes[i].first,
            r_cap: cap,
        });
        self.arcs.push(Arc {
            head: i as u32,
            next: self.nodes[j].first,
            r_cap: rev_cap,
        });
        self.nodes[i].first = a;
        self.nodes[j].first = a + 1;
    }

    /// Adds a constant to the flow value (for source → sink edges).
    pub fn add_constant_flow(&mut self, f: f64) {
        self.flow += f;
    }

    /// True when node `i` ends on the source side of the minimum cut.
    pub fn is_source_side(&self, i: usize) -> bool {
        let n = &self.nodes[i];
        n.parent != NONE && !n.is_sink
    }

    fn activate(&mut self, i: u32) {
        let n = &mut self.nodes[i as usize];
        if !n.queued {
            n.queued = true;
            self.active.push_back(i);
        }
    }

    fn next_active(&mut self) -> Option<u32> {
        while let Some(i) = self.active.pop_front() {
            self.nodes[i as usize].queued = false;
            if self.nodes[i as usize].parent != NONE {
                return Some(i);
            }
        }
        None
    }

    fn make_orphan(&mut self, i: u32) {
        self.nodes[i as usize].parent = ORPHAN;
        self.orphans.push_back(i);
    }

    fn arcs_of(&self, i: u32) -> ArcIter<'_> {
        ArcIter {
            arcs: &self.arcs,
            cur: self.nodes[i as usize].first,
        }
    }

    /// Runs to completion and returns the maximum flow value.
    pub fn maxflow(&mut self) -> f64 {
        self.active.clear();
        self.orphans.clear();
        self.time = 0;
        for i in 0..self.nodes.len() {
            let n = &mut self.nodes[i];
            n.queued = false;
            n.ts = 0;
            if n.tr_cap != 0.0 {
                n.is_sink = n.tr_cap < 0.0;
                n.parent = TERMINAL;
                n.dist = 1;
                self.activate(i as u32);
            } else {
                n.parent = NONE;
                n.is_sink = false;
            }
        }
        while let Some(middle) = self.grow() {
            self.time += 1;
            self.augment(middle);
            self.adopt();
        }
        self.flow
    }

    /// Grows both trees until they touch; returns the arc from the source
    /// tree into the sink tree.
    fn grow(&mut self) -> Option<u32> {
        while let Some(i) = self.next_active() {
            let iu = i as usize;
            let source_tree = !self.nodes[iu].is_sink;
            let mut a = self.nodes[iu].first;
            while a != NONE {
                let (j, next) = (self.arcs[a as usize].head, self.arcs[a as usize].next);
                let residual = if source_tree {
                    self.arcs[a as usize].r_cap
                } else {
                    self.arcs[sister(a) as usize].r_cap
                };
                if residual > 0.0 {
                    let ju = j as usize;
                    if self.nodes[ju].parent == NONE {
                        let (ts, dist) = (self.nodes[iu].ts, self.nodes[iu].dist);
                        let nj = &mut self.nodes[ju];
                        nj.is_sink = !source_tree;
                        nj.parent = sister(a);
                        nj.ts = ts;
                        nj.dist = dist + 1;
                        self.activate(j);
                    } else if self.nodes[ju].is_sink == source_tree {
                        // Trees touch; keep `i` active for the next round.
                        self.nodes[iu].queued = true;
                        self.active.push_front(i);
                        return Some(if source_tree { a } else { sister(a) });
                    } else if self.nodes[ju].ts <= self.nodes[iu].ts
                        && self.nodes[ju].dist > self.nodes[iu].dist
                    {
                        let (ts, dist) = (self.nodes[iu].ts, self.nodes[iu].dist);
                        let nj = &mut self.nodes[ju];
                        nj.parent = sister(a);
                        nj.ts = ts;
                        nj.dist = dist + 1;
                    }
                }
                a = next;
            }
        }
        None
    }

    fn augment(&mut self, middle: u32) {
        let src_end = self.arcs[sister(middle) as usize].head;
        let sink_end = self.arcs[middle as usize].head;

        let mut bottleneck = self.arcs[middle as usize].r_cap;
        let mut k = src_end;
        loop {
            let p = self.nodes[k as usize].parent;
            if p == TERMINAL {
                bottleneck = bottleneck.min(self.nodes[k as usize].tr_cap);
                break;
            }
            bottleneck = bottleneck.min(self.arcs[sister(p) as usize].r_cap);
            k = self.arcs[p as usize].head;
        }
        k = sink_end;
        loop {
            let p = self.nodes[k as usize].parent;
            if p == TERMINAL {
                bottleneck = bottleneck.min(-self.nodes[k as usize].tr_cap);
                break;
            }
            bottleneck = bottleneck.min(self.arcs[p as usize].r_cap);
            k = self.arcs[p as usize].head;
        }

        self.arcs[sister(middle) as usize].r_cap += bottleneck;
        self.arcs[middle as usize].r_cap -= bottleneck;

        k = src_end;
        loop {
            let p = self.nodes[k as usize].parent;
            if p == TERMINAL {
                self.nodes[k as usize].tr_cap -= bottleneck;
                if self.nodes[k as usize].tr_cap <= 0.0 {
                    self.nodes[k as usize].tr_cap = 0.0;
                    self.make_orphan(k);
                }
                break;
            }
            self.arcs[p as usize].r_cap += bottleneck;
            self.arcs[sister(p) as usize].r_cap -= bottleneck;
            let next = self.arcs[p as usize].head;
            if self.arcs[sister(p) as usize].r_cap <= 0.0 {
                self.arcs[sister(p) as usize].r_cap = 0.0;
                self.make_orphan(k);
            }
            k = next;
        }
        k = sink_end;
        loop {
            let p = self.nodes[k as usize].parent;
            if p == TERMINAL {
                self.nodes[k as usize].tr_cap += bottleneck;
                if self.nodes[k as usize].tr_cap >= 0.0 {
                    self.nodes[k as usize].tr_cap = 0.0;
                    self.make_orphan(k);
                }
                break;
            }
            self.arcs[sister(p) as usize].r_cap += bottleneck;
            self.arcs[p as usize].r_cap -= bottleneck;
            let next = self.arcs[p as usize].head;
            if self.arcs[p as usize].r_cap <= 0.0 {
                self.arcs[p as usize].r_cap = 0.0;
                self.make_orphan(k);
            }
            k = next;
        }
        self.flow += bottleneck;
    }

    /// Distance from `j` to its terminal through valid parents, or
    /// `INFINITE_D` when the chain ends in an orphan.
    fn origin_distance(&mut self, j: u32) -> u32 {
        let mut d = 0u32;
        let mut k = j;
        loop {
            let n = &self.nodes[k as usize];
            if n.ts == self.time {
                d += n.dist;
                break;
            }
            let p = n.parent;
            d += 1;
            if p == TERMINAL {
                let n = &mut self.nodes[k as usize];
                n.ts = self.time;
                n.dist = 1;
                break;
            }
            if p == ORPHAN {
                return INFINITE_D;
            }
            k = self.arcs[p as usize].head;
        }
        // Cache distances along the path.
        let mut k = j;
        let mut dd = d;
        while self.nodes[k as usize].ts != self.time {
            let n = &mut self.nodes[k as usize];
            n.ts = self.time;
            n.dist = dd;
            dd -= 1;
            k = self.arcs[n.parent as usize].head;
        }
        d
    }

    fn adopt(&mut self) {
        while let Some(i) = self.orphans.pop_front() {
            let sink_tree = self.nodes[i as usize].is_sink;
            let mut best = NONE;
            let mut d_min = INFINITE_D;
            let arcs: Vec<u32> = self.arcs_of(i).collect();
            for &a in &arcs {
                let residual = if sink_tree {
                    self.arcs[a as usize].r_cap
                } else {
                    self.arcs[sister(a) as usize].r_cap
                };
                if residual <= 0.0 {
                    continue;
                }
                let j = self.arcs[a as usize].head;
                let nj = &self.nodes[j as usize];
                if nj.is_sink != sink_tree || nj.parent == NONE {
                    continue;
                }
                let d = self.origin_distance(j);
                if d < d_min {
                    best = a;
                    d_min = d;
                }
            }
            if best != NONE {
                let n = &mut self.nodes[i as usize];
                n.parent = best;
                n.ts = self.time;
                n.dist = d_min + 1;
                continue;
            }
            // No valid parent: `i` becomes free.
            self.nodes[i as usize].parent = NONE;
            for &a in &arcs {
                let j = self.arcs[a as usize].head;
                let nj = &self.nodes[j as usize];
                if nj.is_sink != sink_tree || nj.parent == NONE {
                    continue;
                }
                let residual = if sink_tree {
                    self.arcs[a as usize].r_cap
                } else {
                    self.arcs[sister(a) as usize].r_cap
                };
                if residual > 0.0 {
                    self.activate(j);
                }
                let p = self.nodes[j as usize].parent;
                if p != TERMINAL && p != ORPHAN && self.arcs[p as usize].head == i {
                    self.make_orphan(j);
                }
            }
        }
    }
}

struct ArcIter<'a> {
    arcs: &'a [Arc],
    cur: u32,
}

impl Iterator for ArcIter<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.cur == NONE {
            return None;
        }
        let a = self.cur;
        self.cur = self.arcs[a as usize].next;
        Some(a)
    }
}

/// Directed graph with explicit source and sink vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowGraph {
    n: usize,
    source: usize,
    sink: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl FlowGraph {
    pub fn new(n: usize, source: usize, sink: usize) -> Result<Self> {
        if source >= n || sink >= n || source == sink {
            return Err(Error::InvalidArgument(format!(
                "source {source} and sink {sink} must be distinct nodes of {n}"
            )));
        }
        Ok(Self {
            n,
            source,
            sink,
            edges: Vec::new(),
        })
    }

    pub fn add_edge(&mut self, from: usize, to: usize, capacity: f64) -> Result<()> {
        if from >= self.n || to >= self.n {
            return Err(Error::InvalidArgument(format!("edge {from}->{to} out of range")));
        }
        if !(capacity >= 0.0) || !capacity.is_finite() {
            return Err(Error::InvalidArgument(format!("capacity {capacity}")));
        }
        self.edges.push((from, to, capacity));
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Total capacity of edges leaving the set marked `true`.
    pub fn cut_value(&self, source_side: &[bool]) -> f64 {
        self.edges
            .iter()
            .filter(|&&(u, v, _)| source_side[u] && !source_side[v])
            .map(|&(_, _, c)| c)
            .sum()
    }
}

/// Maximum flow value and the source side of a minimum cut (the vertices
/// reachable from the source in the final residual graph).
#[derive(Debug, Clone, PartialEq)]
pub struct MinCut {
    pub flow: f64,
    pub source_side: Vec<bool>,
}

pub fn max_flow(g: &FlowGraph) -> MinCut {
    // Internal index for every vertex except the two terminals.
    let mut index = vec![usize::MAX; g.n];
    let mut next = 0;
    for (v, slot) in index.iter_mut().enumerate() {
        if v != g.source && v != g.sink {
            *slot = next;
            next += 1;
        }
    }
    let mut bk = BkGraph::with_capacity(next, g.edges.len());
    bk.add_nodes(next);
    for &(u, v, c) in &g.edges {
        let (s, t) = (g.source, g.sink);
        match (u, v) {
            _ if u == v || c == 0.0 => {}
            _ if u == s && v == t => bk.add_constant_flow(c),
            _ if u == s => bk.add_tweights(index[v], c, 0.0),
            _ if v == t => bk.add_tweights(index[u], 0.0, c),
            // Edges into the source or out of the sink never carry flow.
            _ if v == s || u == t => {}
            _ => bk.add_edge(index[u], index[v], c, 0.0),
        }
    }
    let flow = bk.maxflow();
    let source_side = (0..g.n)
        .map(|v| v == g.source || (v != g.sink && bk.is_source_side(index[v])))
        .collect();
    MinCut { flow, source_side }
}
