//! Max-flow / min-cut with the Boykov–Kolmogorov augmenting-path algorithm.
//!
//! [`GraphCut`] is the terminal-capacity form used for pixel grids: every
//! node carries a source and a sink capacity, and node-to-node arcs are
//! added in pairs. [`FlowNetwork`] is the general directed form with an
//! explicit source and sink and reduces onto it.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Parent {
    Free,
    Terminal,
    Orphan,
    Arc(usize),
}

#[derive(Debug, Clone)]
struct Node {
    first: Option<usize>,
    parent: Parent,
    in_sink: bool,
    active: bool,
    ts: u64,
    dist: usize,
    // positive: residual to source; negative: residual to sink
    tr_cap: f64,
}

#[derive(Debug, Clone)]
struct Arc {
    head: usize,
    next: Option<usize>,
    r_cap: f64,
}

/// Terminal-capacity graph for binary labelling problems.
#[derive(Debug, Clone)]
pub struct GraphCut {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    flow: f64,
    solved: bool,
}

#[inline]
fn sister(a: usize) -> usize {
    a ^ 1
}

impl GraphCut {
    pub fn new(node_count: usize) -> Self {
        GraphCut {
            nodes: vec![
                Node {
                    first: None,
                    parent: Parent::Free,
                    in_sink: false,
                    active: false,
                    ts: 0,
                    dist: 0,
                    tr_cap: 0.0,
                };
                node_count
            ],
            arcs: Vec::new(),
            flow: 0.0,
            solved: false,
        }
    }

    pub fn with_capacity(node_count: usize, arc_pairs: usize) -> Self {
        let mut g = Self::new(node_count);
        g.arcs.reserve(2 * arc_pairs);
        g
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Adds capacity from the source to `i` and from `i` to the sink.
    pub fn add_terminal_weights(&mut self, i: usize, to_source: f64, to_sink: f64) {
        debug_assert!(to_source >= 0.0 && to_sink >= 0.0);
        let node = &mut self.nodes[i];
        let mut source = to_source;
        let mut sink = to_sink;
        if node.tr_cap > 0.0 {
            source += node.tr_cap;
        } else {
            sink -= node.tr_cap;
        }
        self.flow += source.min(sink);
        node.tr_cap = source - sink;
    }

    /// Adds arc `i -> j` with capacity `cap` and `j -> i` with `rev_cap`.
    pub fn add_edge(&mut self, i: usize, j: usize, cap: f64, rev_cap: f64) {
        debug_assert!(i != j && cap >= 0.0 && rev_cap >= 0.0);
        let a = self.arcs.len();
        self.arcs.push(Arc {
            head: j,
            next: self.nodes[i].first,
            r_cap: cap,
        });
        self.arcs.push(Arc {
            head: i,
            next: self.nodes[j].first,
            r_cap: rev_cap,
        });
        self.nodes[i].first = Some(a);
        self.nodes[j].first = Some(a + 1);
    }

    /// Runs the solver and returns the maximum flow value.
    pub fn solve(&mut self) -> f64 {
        if !self.solved {
            Solver::new(self).run();
            self.solved = true;
        }
        self.flow
    }

    /// After [`solve`](Self::solve): whether `i` stays on the source side,
    /// i.e. is reachable from the source in the residual graph.
    pub fn is_source_side(&self, i: usize) -> bool {
        let n = &self.nodes[i];
        n.parent != Parent::Free && !n.in_sink
    }
}

struct Solver<'g> {
    g: &'g mut GraphCut,
    queue: VecDeque<usize>,
    orphans: VecDeque<usize>,
    time: u64,
}

impl<'g> Solver<'g> {
    fn new(g: &'g mut GraphCut) -> Self {
        Solver {
            g,
            queue: VecDeque::new(),
            orphans: VecDeque::new(),
            time: 0,
        }
    }

    fn set_active(&mut self, i: usize) {
        if !self.g.nodes[i].active {
            self.g.nodes[i].active = true;
            self.queue.push_back(i);
        }
    }

    fn next_active(&mut self) -> Option<usize> {
        while let Some(i) = self.queue.pop_front() {
            self.g.nodes[i].active = false;
            if self.g.nodes[i].parent != Parent::Free {
                return Some(i);
            }
        }
        None
    }

    fn run(&mut self) {
        for i in 0..self.g.nodes.len() {
            let node = &mut self.g.nodes[i];
            node.ts = 0;
            if node.tr_cap != 0.0 {
                node.in_sink = node.tr_cap < 0.0;
                node.parent = Parent::Terminal;
                node.dist = 1;
                self.set_active(i);
            } else {
                node.parent = Parent::Free;
            }
        }

        let mut current: Option<usize> = None;
        loop {
            let mut i = current.take().and_then(|i| {
                self.g.nodes[i].active = false;
                (self.g.nodes[i].parent != Parent::Free).then_some(i)
            });
            if i.is_none() {
                i = self.next_active();
            }
            let Some(i) = i else { break };

            let middle = self.grow(i);
            self.time += 1;
            if let Some(a) = middle {
                // keep processing `i` next round; the flag stops re-queueing
                self.g.nodes[i].active = true;
                current = Some(i);
                self.augment(a);
                while let Some(o) = self.orphans.pop_front() {
                    if self.g.nodes[o].in_sink {
                        self.process_orphan(o, true);
                    } else {
                        self.process_orphan(o, false);
                    }
                }
            }
        }
    }

    /// Grows the tree containing `i`; returns an arc from the source tree to
    /// the sink tree when the trees touch.
    fn grow(&mut self, i: usize) -> Option<usize> {
        let in_sink = self.g.nodes[i].in_sink;
        let mut cur = self.g.nodes[i].first;
        while let Some(a) = cur {
            cur = self.g.arcs[a].next;
            let cap = if in_sink {
                self.g.arcs[sister(a)].r_cap
            } else {
                self.g.arcs[a].r_cap
            };
            if cap <= 0.0 {
                continue;
            }
            let j = self.g.arcs[a].head;
            let (ts_i, dist_i) = (self.g.nodes[i].ts, self.g.nodes[i].dist);
            let nj = &mut self.g.nodes[j];
            if nj.parent == Parent::Free {
                nj.in_sink = in_sink;
                nj.parent = Parent::Arc(sister(a));
                nj.ts = ts_i;
                nj.dist = dist_i + 1;
                self.set_active(j);
            } else if nj.in_sink != in_sink {
                return Some(if in_sink { sister(a) } else { a });
            } else if nj.ts <= ts_i && nj.dist > dist_i {
                nj.parent = Parent::Arc(sister(a));
                nj.ts = ts_i;
                nj.dist = dist_i + 1;
            }
        }
        None
    }

    fn orphan_front(&mut self, i: usize) {
        self.g.nodes[i].parent = Parent::Orphan;
        self.orphans.push_front(i);
    }

    fn orphan_rear(&mut self, i: usize) {
        self.g.nodes[i].parent = Parent::Orphan;
        self.orphans.push_back(i);
    }

    fn augment(&mut self, middle: usize) {
        let arcs = &self.g.arcs;
        let nodes = &self.g.nodes;

        let mut bottleneck = arcs[middle].r_cap;
        let mut i = arcs[sister(middle)].head;
        while let Parent::Arc(a) = nodes[i].parent {
            bottleneck = bottleneck.min(arcs[sister(a)].r_cap);
            i = arcs[a].head;
        }
        bottleneck = bottleneck.min(nodes[i].tr_cap);
        let mut i = arcs[middle].head;
        while let Parent::Arc(a) = nodes[i].parent {
            bottleneck = bottleneck.min(arcs[a].r_cap);
            i = arcs[a].head;
        }
        bottleneck = bottleneck.min(-nodes[i].tr_cap);

        self.g.arcs[sister(middle)].r_cap += bottleneck;
        self.g.arcs[middle].r_cap -= bottleneck;

        let mut i = self.g.arcs[sister(middle)].head;
        while let Parent::Arc(a) = self.g.nodes[i].parent {
            self.g.arcs[a].r_cap += bottleneck;
            self.g.arcs[sister(a)].r_cap -= bottleneck;
            let next = self.g.arcs[a].head;
            if self.g.arcs[sister(a)].r_cap <= 0.0 {
                self.orphan_front(i);
            }
            i = next;
        }
        self.g.nodes[i].tr_cap -= bottleneck;
        if self.g.nodes[i].tr_cap <= 0.0 {
            self.orphan_front(i);
        }

        let mut i = self.g.arcs[middle].head;
        while let Parent::Arc(a) = self.g.nodes[i].parent {
            self.g.arcs[sister(a)].r_cap += bottleneck;
            self.g.arcs[a].r_cap -= bottleneck;
            let next = self.g.arcs[a].head;
            if self.g.arcs[a].r_cap <= 0.0 {
                self.orphan_front(i);
            }
            i = next;
        }
        self.g.nodes[i].tr_cap += bottleneck;
        if self.g.nodes[i].tr_cap >= 0.0 {
            self.orphan_front(i);
        }

        self.g.flow += bottleneck;
    }

    /// Tries to re-attach orphan `i` to its own tree through a neighbour
    /// whose path reaches the terminal; otherwise frees it.
    fn process_orphan(&mut self, i: usize, sink_tree: bool) {
        const INFINITE_D: usize = usize::MAX;
        let mut best: Option<usize> = None;
        let mut d_min = INFINITE_D;

        let mut cur = self.g.nodes[i].first;
        while let Some(a0) = cur {
            cur = self.g.arcs[a0].next;
            let cap = if sink_tree {
                self.g.arcs[a0].r_cap
            } else {
                self.g.arcs[sister(a0)].r_cap
            };
            if cap <= 0.0 {
                continue;
            }
            let mut j = self.g.arcs[a0].head;
            if self.g.nodes[j].in_sink != sink_tree || self.g.nodes[j].parent == Parent::Free {
                continue;
            }
            let mut d = 0usize;
            loop {
                let nj = &self.g.nodes[j];
                if nj.ts == self.time {
                    d += nj.dist;
                    break;
                }
                d += 1;
                match nj.parent {
                    Parent::Terminal => {
                        let nj = &mut self.g.nodes[j];
                        nj.ts = self.time;
                        nj.dist = 1;
                        break;
                    }
                    Parent::Orphan | Parent::Free => {
                        d = INFINITE_D;
                        break;
                    }
                    Parent::Arc(a) => j = self.g.arcs[a].head,
                }
            }
            if d < INFINITE_D {
                if d < d_min {
                    best = Some(a0);
                    d_min = d;
                }
                let mut j = self.g.arcs[a0].head;
                let mut d = d;
                while self.g.nodes[j].ts != self.time {
                    let nj = &mut self.g.nodes[j];
                    nj.ts = self.time;
                    nj.dist = d;
                    d -= 1;
                    match nj.parent {
                        Parent::Arc(a) => j = self.g.arcs[a].head,
                        _ => break,
                    }
                }
            }
        }

        if let Some(a0) = best {
            let ni = &mut self.g.nodes[i];
            ni.parent = Parent::Arc(a0);
            ni.ts = self.time;
            ni.dist = d_min + 1;
            return;
        }

        self.g.nodes[i].parent = Parent::Free;
        let mut cur = self.g.nodes[i].first;
        while let Some(a0) = cur {
            cur = self.g.arcs[a0].next;
            let j = self.g.arcs[a0].head;
            let nj = &self.g.nodes[j];
            if nj.in_sink != sink_tree || nj.parent == Parent::Free {
                continue;
            }
            let cap = if sink_tree {
                self.g.arcs[a0].r_cap
            } else {
                self.g.arcs[sister(a0)].r_cap
            };
            if cap > 0.0 {
                self.set_active(j);
            }
            if let Parent::Arc(a) = self.g.nodes[j].parent {
                if self.g.arcs[a].head == i {
                    self.orphan_rear(j);
                }
            }
        }
    }
}

/// Directed network with a distinguished source and sink.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    node_count: usize,
    source: usize,
    sink: usize,
    edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxFlow {
    pub value: f64,
    /// `true` for nodes on the source side of a minimum cut (the nodes
    /// reachable from the source in the final residual graph).
    pub source_side: Vec<bool>,
}

impl MaxFlow {
    pub fn source_set(&self) -> Vec<usize> {
        (0..self.source_side.len()).filter(|&i| self.source_side[i]).collect()
    }
}

impl FlowNetwork {
    pub fn new(node_count: usize, source: usize, sink: usize) -> Result<Self> {
        if source >= node_count || sink >= node_count {
            return Err(Error::InvalidArgument(format!(
                "terminal out of range for {node_count} nodes"
            )));
        }
        if source == sink {
            return Err(Error::InvalidArgument("source and sink must differ".into()));
        }
        Ok(FlowNetwork {
            node_count,
            source,
            sink,
            edges: Vec::new(),
        })
    }

    pub fn add_edge(&mut self, from: usize, to: usize, capacity: f64) -> Result<()> {
        if from >= self.node_count || to >= self.node_count {
            return Err(Error::InvalidArgument(format!("edge ({from}, {to}) out of range")));
        }
        if !(capacity >= 0.0) || !capacity.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "capacity must be finite and non-negative, got {capacity}"
            )));
        }
        self.edges.push((from, to, capacity));
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.node_count
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

    /// Total capacity of edges leaving `side` (indexed by node).
    pub fn cut_capacity(&self, side: &[bool]) -> f64 {
        self.edges
            .iter()
            .filter(|&&(u, v, _)| side[u] && !side[v])
            .map(|&(_, _, c)| c)
            .sum()
    }
}

pub fn max_flow(net: &FlowNetwork) -> MaxFlow {
    let (s, t) = (net.source, net.sink);
    // inner nodes are renumbered skipping the terminals
    let index = |v: usize| v - usize::from(v > s) - usize::from(v > t);
    let mut g = GraphCut::new(net.node_count - 2);
    let mut direct = 0.0;
    for &(u, v, c) in &net.edges {
        if u == v || u == t || v == s || c == 0.0 {
            continue;
        }
        match (u == s, v == t) {
            (true, true) => direct += c,
            (true, false) => g.add_terminal_weights(index(v), c, 0.0),
            (false, true) => g.add_terminal_weights(index(u), 0.0, c),
            (false, false) => g.add_edge(index(u), index(v), c, 0.0),
        }
    }
    let value = g.solve() + direct;
    let source_side = (0..net.node_count)
        .map(|v| {
            if v == s {
                true
            } else if v == t {
                false
            } else {
                g.is_source_side(index(v))
            }
        })
        .collect();
    MaxFlow { value, source_side }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force_min_cut(net: &FlowNetwork) -> f64 {
        let inner: Vec<usize> = (0..net.node_count())
            .filter(|&v| v != net.source() && v != net.sink())
            .collect();
        let mut best = f64::INFINITY;
        for bits in 0u32..(1 << inner.len()) {
            let mut side = vec![false; net.node_count()];
            side[net.source()] = true;
            for (k, &v) in inner.iter().enumerate() {
                side[v] = bits & (1 << k) != 0;
            }
            best = best.min(net.cut_capacity(&side));
        }
        best
    }

    #[test]
    fn worked_example() {
        // s=0, a=1, b=2, t=3
        let mut net = FlowNetwork::new(4, 0, 3).unwrap();
        for (u, v, c) in [(0, 1, 3.0), (0, 2, 1.0), (1, 3, 2.0), (2, 3, 4.0), (1, 2, 1.0), (2, 1, 1.0)] {
            net.add_edge(u, v, c).unwrap();
        }
        let r = max_flow(&net);
        assert_eq!(r.value, 4.0);
        assert_eq!(brute_force_min_cut(&net), 4.0);
        assert_eq!(net.cut_capacity(&r.source_side), 4.0);
    }

    #[test]
    fn disconnected_and_single_edge() {
        let mut net = FlowNetwork::new(4, 0, 3).unwrap();
        net.add_edge(0, 1, 5.0).unwrap();
        net.add_edge(2, 3, 5.0).unwrap();
        let r = max_flow(&net);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.source_set(), vec![0, 1]);

        let mut net = FlowNetwork::new(2, 0, 1).unwrap();
        net.add_edge(0, 1, 7.0).unwrap();
        assert_eq!(max_flow(&net).value, 7.0);
    }

    #[test]
    fn invalid_networks() {
        assert!(FlowNetwork::new(3, 1, 1).is_err());
        assert!(FlowNetwork::new(3, 0, 3).is_err());
        let mut net = FlowNetwork::new(3, 0, 2).unwrap();
        assert!(net.add_edge(0, 1, -1.0).is_err());
        assert!(net.add_edge(0, 1, f64::INFINITY).is_err());
        assert!(net.add_edge(0, 5, 1.0).is_err());
    }

    #[test]
    fn random_networks_match_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.random_range(2..=10) + 2;
            let mut net = FlowNetwork::new(n, 0, n - 1).unwrap();
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.random_bool(0.35) {
                        net.add_edge(u, v, rng.random_range(0..=10) as f64).unwrap();
                    }
                }
            }
            let r = max_flow(&net);
            assert_eq!(r.value, brute_force_min_cut(&net));
            assert_eq!(net.cut_capacity(&r.source_side), r.value);
        }
    }

    #[test]
    fn terminal_weights_cancel() {
        let mut g = GraphCut::new(1);
        g.add_terminal_weights(0, 3.0, 5.0);
        g.add_terminal_weights(0, 4.0, 0.0);
        // source 7, sink 5
        assert_eq!(g.solve(), 5.0);
        assert!(g.is_source_side(0));
    }
}
