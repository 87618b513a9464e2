//! Information flow graphs for rack-aware cooperative repair, and an exact
//! max-flow oracle over them.
//!
//! A graph starts with every node `(h, i)` fed by the source with capacity
//! `α` and, inside each rack, ∞ edges from every node to the relayer (node
//! 0). Each repair stage adds, per rack `h` of the repair group,
//!
//! * `Virt(h)` fed by the `d` helper relayers (`β₁` each) and by the
//!   surviving nodes of `h` (`α` each),
//! * `Mid(h)` fed by `Virt(h)` (∞) and by every other `Virt` of the group
//!   (`β₂` each),
//! * a fresh incarnation of every node of `h`: survivors copy over with ∞,
//!   failed nodes are fed by `Mid(h)` with `α`.
//!
//! The collector is joined to its chosen nodes with ∞ edges.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::{self, Write as _};

use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::params::CodeParams;
use crate::tradeoff::{compositions, Composition};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IfgError {
    #[error("stage {stage}: repair group has {got} racks, expected f = {expected}")]
    GroupSize {
        stage: usize,
        got: usize,
        expected: usize,
    },
    #[error("stage {stage}: rack {rack} lists {got} failed nodes, expected e/f = {expected}")]
    FailuresPerRack {
        stage: usize,
        rack: usize,
        got: usize,
        expected: usize,
    },
    #[error("stage {stage}: {got} helper racks, expected d = {expected}")]
    HelperCount {
        stage: usize,
        got: usize,
        expected: usize,
    },
    #[error("stage {stage}: helper rack {rack} is also in the repair group")]
    HelperInGroup { stage: usize, rack: usize },
    #[error("stage {stage}: rack or node index listed twice or out of range")]
    BadIndex { stage: usize },
    #[error("collector node {0} is not the latest incarnation")]
    StaleCollector(NodeRef),
    #[error("collector has {got} nodes, expected k = {expected}")]
    CollectorSize { got: usize, expected: usize },
    #[error("collector lists a node twice or out of range")]
    BadCollector,
    #[error("negative capacity")]
    NegativeCapacity,
    #[error("sink is reachable from the source through infinite-capacity edges only")]
    Unbounded,
}

/// A node incarnation: node `node` of rack `rack` as written at repair
/// stage `stage` (0 for the original).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    pub rack: usize,
    pub node: usize,
    pub stage: usize,
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Out_{}_{}_{}", self.rack + 1, self.node + 1, self.stage)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vertex {
    Source,
    Sink,
    Out(NodeRef),
    Virt { rack: usize, stage: usize },
    Mid { rack: usize, stage: usize },
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Source => write!(f, "S"),
            Vertex::Sink => write!(f, "T"),
            Vertex::Out(n) => write!(f, "{n}"),
            Vertex::Virt { rack, stage } => write!(f, "Virt_{}_{}", rack + 1, stage),
            Vertex::Mid { rack, stage } => write!(f, "Mid_{}_{}", rack + 1, stage),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Capacity {
    Finite(Rational),
    Infinite,
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(c) => write!(f, "{c}"),
            Capacity::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub capacity: Capacity,
}

/// One simultaneous repair of `e/f` nodes in each of `f` racks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairStage {
    /// The repair group: `f` distinct racks.
    pub group: Vec<usize>,
    /// Failed node indices, one list per rack of `group`.
    pub failed: Vec<Vec<usize>>,
    /// `d` helper racks disjoint from the group.
    pub helpers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FailureHistory {
    pub stages: Vec<RepairStage>,
}

impl FailureHistory {
    pub fn validate(&self, p: &CodeParams) -> Result<(), IfgError> {
        let ef = p.failures_per_rack();
        for (idx, st) in self.stages.iter().enumerate() {
            let stage = idx + 1;
            if st.group.len() != p.f() || st.failed.len() != p.f() {
                return Err(IfgError::GroupSize {
                    stage,
                    got: st.group.len(),
                    expected: p.f(),
                });
            }
            if !distinct_below(&st.group, p.r()) || !distinct_below(&st.helpers, p.r()) {
                return Err(IfgError::BadIndex { stage });
            }
            for (rack, nodes) in st.group.iter().zip(&st.failed) {
                if nodes.len() != ef {
                    return Err(IfgError::FailuresPerRack {
                        stage,
                        rack: *rack,
                        got: nodes.len(),
                        expected: ef,
                    });
                }
                if !distinct_below(nodes, p.nodes_per_rack()) {
                    return Err(IfgError::BadIndex { stage });
                }
            }
            if st.helpers.len() != p.d() {
                return Err(IfgError::HelperCount {
                    stage,
                    got: st.helpers.len(),
                    expected: p.d(),
                });
            }
            if let Some(&rack) = st.helpers.iter().find(|h| st.group.contains(h)) {
                return Err(IfgError::HelperInGroup { stage, rack });
            }
        }
        Ok(())
    }

    /// Latest incarnation of every node after all stages.
    pub fn latest(&self, p: &CodeParams) -> Vec<Vec<usize>> {
        let mut cur = vec![vec![0usize; p.nodes_per_rack()]; p.r()];
        for (idx, st) in self.stages.iter().enumerate() {
            for &h in &st.group {
                cur[h].iter_mut().for_each(|s| *s = idx + 1);
            }
        }
        cur
    }

    pub fn latest_ref(&self, p: &CodeParams, rack: usize, node: usize) -> NodeRef {
        NodeRef {
            rack,
            node,
            stage: self.latest(p)[rack][node],
        }
    }
}

fn distinct_below(xs: &[usize], bound: usize) -> bool {
    let set: HashSet<_> = xs.iter().collect();
    set.len() == xs.len() && xs.iter().all(|&x| x < bound)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowGraph {
    vertices: Vec<Vertex>,
    index: HashMap<Vertex, usize>,
    edges: Vec<Edge>,
}

impl FlowGraph {
    fn new() -> Self {
        let mut g = FlowGraph {
            vertices: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
        };
        g.vertex(Vertex::Source);
        g.vertex(Vertex::Sink);
        g
    }

    fn vertex(&mut self, v: Vertex) -> usize {
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        self.vertices.push(v);
        self.index.insert(v, self.vertices.len() - 1);
        self.vertices.len() - 1
    }

    fn edge(&mut self, from: Vertex, to: Vertex, capacity: Capacity) {
        let (from, to) = (self.vertex(from), self.vertex(to));
        self.edges.push(Edge { from, to, capacity });
    }

    /// Graph for `history` with a collector of exactly `k` nodes.
    pub fn build(
        p: &CodeParams,
        alpha: &Rational,
        beta1: &Rational,
        beta2: &Rational,
        history: &FailureHistory,
        collector: &[NodeRef],
    ) -> Result<FlowGraph, IfgError> {
        if collector.len() != p.k() {
            return Err(IfgError::CollectorSize {
                got: collector.len(),
                expected: p.k(),
            });
        }
        Self::build_any_collector(p, alpha, beta1, beta2, history, collector)
    }

    /// As [`FlowGraph::build`] but for a collector of any size.
    pub fn build_any_collector(
        p: &CodeParams,
        alpha: &Rational,
        beta1: &Rational,
        beta2: &Rational,
        history: &FailureHistory,
        collector: &[NodeRef],
    ) -> Result<FlowGraph, IfgError> {
        history.validate(p)?;
        if [alpha, beta1, beta2].iter().any(|c| c.is_negative()) {
            return Err(IfgError::NegativeCapacity);
        }
        let latest = history.latest(p);
        let unique: HashSet<_> = collector.iter().collect();
        if unique.len() != collector.len()
            || collector
                .iter()
                .any(|n| n.rack >= p.r() || n.node >= p.nodes_per_rack())
        {
            return Err(IfgError::BadCollector);
        }
        if let Some(stale) = collector.iter().find(|n| latest[n.rack][n.node] != n.stage) {
            return Err(IfgError::StaleCollector(*stale));
        }

        let nr = p.nodes_per_rack();
        let a = Capacity::Finite(*alpha);
        let mut g = FlowGraph::new();
        let out = |rack, node, stage| Vertex::Out(NodeRef { rack, node, stage });
        let mut cur = vec![vec![0usize; nr]; p.r()];
        for h in 0..p.r() {
            for i in 0..nr {
                g.edge(Vertex::Source, out(h, i, 0), a.clone());
            }
            for i in 1..nr {
                g.edge(out(h, i, 0), out(h, 0, 0), Capacity::Infinite);
            }
        }
        for (idx, st) in history.stages.iter().enumerate() {
            let s = idx + 1;
            for (&h, failed) in st.group.iter().zip(&st.failed) {
                let virt = Vertex::Virt { rack: h, stage: s };
                let mid = Vertex::Mid { rack: h, stage: s };
                for &j in &st.helpers {
                    g.edge(out(j, 0, cur[j][0]), virt, Capacity::Finite(*beta1));
                }
                for i in (0..nr).filter(|i| !failed.contains(i)) {
                    g.edge(out(h, i, cur[h][i]), virt, a.clone());
                }
                g.edge(virt, mid, Capacity::Infinite);
            }
            for &h in &st.group {
                for &h2 in st.group.iter().filter(|&&x| x != h) {
                    g.edge(
                        Vertex::Virt { rack: h2, stage: s },
                        Vertex::Mid { rack: h, stage: s },
                        Capacity::Finite(*beta2),
                    );
                }
            }
            for (&h, failed) in st.group.iter().zip(&st.failed) {
                let mid = Vertex::Mid { rack: h, stage: s };
                for (i, &prev) in cur[h].iter().enumerate() {
                    if failed.contains(&i) {
                        g.edge(mid, out(h, i, s), a.clone());
                    } else {
                        g.edge(out(h, i, prev), out(h, i, s), Capacity::Infinite);
                    }
                }
                for i in 1..nr {
                    g.edge(out(h, i, s), out(h, 0, s), Capacity::Infinite);
                }
                cur[h].iter_mut().for_each(|x| *x = s);
            }
        }
        for n in collector {
            g.edge(Vertex::Out(*n), Vertex::Sink, Capacity::Infinite);
        }
        Ok(g)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn in_edges(&self, v: &Vertex) -> Vec<&Edge> {
        match self.index.get(v) {
            Some(&i) => self.edges.iter().filter(|e| e.to == i).collect(),
            None => Vec::new(),
        }
    }

    pub fn out_edges(&self, v: &Vertex) -> Vec<&Edge> {
        match self.index.get(v) {
            Some(&i) => self.edges.iter().filter(|e| e.from == i).collect(),
            None => Vec::new(),
        }
    }

    /// Single-path and hand-built graphs for tests and tooling.
    pub fn from_edges(edges: &[(Vertex, Vertex, Capacity)]) -> FlowGraph {
        let mut g = FlowGraph::new();
        for (a, b, c) in edges {
            g.edge(*a, *b, c.clone());
        }
        g
    }

    /// Kahn's algorithm; the graph is acyclic by construction.
    pub fn is_acyclic(&self) -> bool {
        let mut indeg = vec![0usize; self.vertices.len()];
        for e in &self.edges {
            indeg[e.to] += 1;
        }
        let mut queue: VecDeque<usize> = (0..indeg.len()).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop_front() {
            seen += 1;
            for e in self.edges.iter().filter(|e| e.from == v) {
                indeg[e.to] -= 1;
                if indeg[e.to] == 0 {
                    queue.push_back(e.to);
                }
            }
        }
        seen == self.vertices.len()
    }

    /// Same graph with every finite capacity multiplied by `factor`.
    pub fn scaled(&self, factor: &Rational) -> FlowGraph {
        let mut g = self.clone();
        for e in &mut g.edges {
            if let Capacity::Finite(c) = &mut e.capacity {
                *c *= *factor;
            }
        }
        g
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ifg {\n  rankdir=LR;\n");
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                self.vertices[e.from], self.vertices[e.to], e.capacity
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Exact maximum S–T flow.
///
/// Finite capacities are scaled to integers by the least common multiple of
/// their denominators; ∞ is a sentinel one larger than the sum of all finite
/// capacities, so a flow reaching it means the sink is unboundedly fed.
pub fn max_flow(g: &FlowGraph) -> Result<Rational, IfgError> {
    let mut lcm: i128 = 1;
    let mut total = Rational::zero();
    for e in &g.edges {
        if let Capacity::Finite(c) = &e.capacity {
            if c.is_negative() {
                return Err(IfgError::NegativeCapacity);
            }
            lcm = lcm.lcm(c.denom());
            total += *c;
        }
    }
    let scale = |c: &Rational| (*c * Rational::from_integer(lcm)).to_integer();
    let inf = scale(&total) + 1;
    let caps: Vec<i128> = g
        .edges
        .iter()
        .map(|e| match &e.capacity {
            Capacity::Finite(c) => scale(c),
            Capacity::Infinite => inf,
        })
        .collect();
    let source = g.index[&Vertex::Source];
    let sink = g.index[&Vertex::Sink];
    let mut dinic = Dinic::new(g.vertices.len());
    for (e, &c) in g.edges.iter().zip(&caps) {
        dinic.add_edge(e.from, e.to, c);
    }
    let flow = dinic.run(source, sink);
    if flow >= inf {
        return Err(IfgError::Unbounded);
    }
    Ok(Rational::new(flow, lcm))
}

struct Dinic {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i128>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    fn add_edge(&mut self, a: usize, b: usize, c: i128) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &e in &self.head[v] {
                let w = self.to[e];
                if self.cap[e] > 0 && self.level[w] < 0 {
                    self.level[w] = self.level[v] + 1;
                    q.push_back(w);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, v: usize, t: usize, pushed: i128) -> i128 {
        if v == t {
            return pushed;
        }
        while self.iter[v] < self.head[v].len() {
            let e = self.head[v][self.iter[v]];
            let w = self.to[e];
            if self.cap[e] > 0 && self.level[w] == self.level[v] + 1 {
                let got = self.dfs(w, t, pushed.min(self.cap[e]));
                if got > 0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            self.iter[v] += 1;
        }
        0
    }

    fn run(&mut self, s: usize, t: usize) -> i128 {
        let mut flow = 0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, i128::MAX);
                if f == 0 {
                    break;
                }
                flow += f;
            }
        }
        flow
    }
}

/// A failure history and collector together with the min-cut they produce.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub history: FailureHistory,
    pub collector: Vec<NodeRef>,
    /// The composition this scenario was built from, for canonical ones.
    pub composition: Option<Composition>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinCutWitness {
    pub value: Rational,
    pub scenario: Scenario,
    /// Number of scenarios evaluated.
    pub evaluated: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub random_scenarios: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            random_scenarios: 64,
            seed: 0x1f60_0001,
        }
    }
}

/// The history in which racks `0..m` are repaired `u₁, u₂, …` at a time
/// (relayers included among the failed nodes), always helped by every
/// previously collected rack, with the collector
/// taking those `m` racks whole plus `k − m·n/r` non-relayer nodes of the
/// untouched rack `m`.
pub fn canonical_scenario(p: &CodeParams, u: &Composition) -> Scenario {
    let (m, f, r, d) = (p.m(), p.f(), p.r(), p.d());
    let ef = p.failures_per_rack();
    let mut stages = Vec::new();
    let mut pre = 0;
    for &ui in u.parts() {
        let collected: Vec<usize> = (pre..pre + ui).collect();
        let fillers: Vec<usize> = (m + 1..r).take(f - ui).collect();
        let group: Vec<usize> = collected.iter().chain(&fillers).copied().collect();
        // previously collected racks first, then untouched ones, then racks
        // collected later (their relayer fails when they are repaired, so
        // their old incarnation cannot reach the collector for free)
        let helpers: Vec<usize> = (0..pre)
            .chain((m..r).filter(|h| !fillers.contains(h)))
            .chain(pre + ui..m)
            .take(d)
            .collect();
        stages.push(RepairStage {
            failed: vec![(0..ef).collect(); group.len()],
            group,
            helpers,
        });
        pre += ui;
    }
    let history = FailureHistory { stages };
    let latest = history.latest(p);
    let nr = p.nodes_per_rack();
    let mut collector: Vec<NodeRef> = (0..m)
        .flat_map(|h| (0..nr).map(move |i| (h, i)))
        .map(|(rack, node)| NodeRef {
            rack,
            node,
            stage: latest[rack][node],
        })
        .collect();
    let leftover = p.k() - m * nr;
    let partial = latest.get(m).map(Vec::as_slice).unwrap_or_default();
    for (node, &stage) in partial.iter().enumerate().skip(1).take(leftover) {
        collector.push(NodeRef {
            rack: m,
            node,
            stage,
        });
    }
    Scenario {
        history,
        collector,
        composition: Some(u.clone()),
    }
}

/// A random admissible history of `1..=max_stages` stages and a collector
/// that takes whole racks first and fills up with non-relayer nodes.
pub fn random_scenario<R: Rng>(p: &CodeParams, max_stages: usize, rng: &mut R) -> Scenario {
    let (r, f, d) = (p.r(), p.f(), p.d());
    let nr = p.nodes_per_rack();
    let ef = p.failures_per_rack();
    let stages = rng.gen_range(1..=max_stages.max(1));
    let mut history = FailureHistory::default();
    for _ in 0..stages {
        let mut racks: Vec<usize> = (0..r).collect();
        racks.shuffle(rng);
        let group = racks[..f].to_vec();
        let helpers = racks[f..f + d].to_vec();
        let failed = group
            .iter()
            .map(|_| {
                let mut nodes: Vec<usize> = (0..nr).collect();
                nodes.shuffle(rng);
                nodes[..ef].to_vec()
            })
            .collect();
        history.stages.push(RepairStage {
            group,
            failed,
            helpers,
        });
    }
    let latest = history.latest(p);
    let collector = loop {
        let whole = rng.gen_range(0..=p.m());
        let mut racks: Vec<usize> = (0..r).collect();
        racks.shuffle(rng);
        let mut nodes: Vec<(usize, usize)> = racks[..whole]
            .iter()
            .flat_map(|&h| (0..nr).map(move |i| (h, i)))
            .collect();
        let mut partial: Vec<(usize, usize)> = racks[whole..]
            .iter()
            .flat_map(|&h| (1..nr).map(move |i| (h, i)))
            .collect();
        let need = p.k() - whole * nr;
        if partial.len() < need {
            continue;
        }
        partial.shuffle(rng);
        nodes.extend_from_slice(&partial[..need]);
        break nodes;
    };
    let collector = collector
        .into_iter()
        .map(|(rack, node)| NodeRef {
            rack,
            node,
            stage: latest[rack][node],
        })
        .collect();
    Scenario {
        history,
        collector,
        composition: None,
    }
}

pub fn scenario_mincut(
    p: &CodeParams,
    alpha: &Rational,
    beta1: &Rational,
    beta2: &Rational,
    scenario: &Scenario,
) -> Result<Rational, IfgError> {
    let g = FlowGraph::build(
        p,
        alpha,
        beta1,
        beta2,
        &scenario.history,
        &scenario.collector,
    )?;
    max_flow(&g)
}

/// Minimum max-flow over the canonical scenario of every composition with at
/// most `max_stages` parts, plus seeded random scenarios.
pub fn worst_case_mincut(
    p: &CodeParams,
    alpha: &Rational,
    beta1: &Rational,
    beta2: &Rational,
    max_stages: usize,
) -> Result<MinCutWitness, IfgError> {
    worst_case_mincut_with(p, alpha, beta1, beta2, max_stages, &SearchConfig::default())
}

pub fn worst_case_mincut_with(
    p: &CodeParams,
    alpha: &Rational,
    beta1: &Rational,
    beta2: &Rational,
    max_stages: usize,
    config: &SearchConfig,
) -> Result<MinCutWitness, IfgError> {
    let mut best: Option<(Rational, Scenario)> = None;
    let mut evaluated = 0;
    let mut consider = |scenario: Scenario| -> Result<(), IfgError> {
        let v = scenario_mincut(p, alpha, beta1, beta2, &scenario)?;
        evaluated += 1;
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, scenario));
        }
        Ok(())
    };
    // the empty history: only the source edges of the collector can be cut
    let empty = FailureHistory::default();
    let mut plain: Vec<NodeRef> = (0..p.m())
        .flat_map(|h| (0..p.nodes_per_rack()).map(move |i| (h, i)))
        .map(|(rack, node)| NodeRef {
            rack,
            node,
            stage: 0,
        })
        .collect();
    plain.extend(
        (1..=p.k() - p.m() * p.nodes_per_rack()).map(|node| NodeRef {
            rack: p.m(),
            node,
            stage: 0,
        }),
    );
    consider(Scenario {
        history: empty,
        collector: plain,
        composition: None,
    })?;
    for u in compositions(p.m(), p.f()) {
        if u.stages() <= max_stages {
            consider(canonical_scenario(p, &u))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.random_scenarios {
        consider(random_scenario(p, max_stages.max(1), &mut rng))?;
    }
    let (value, scenario) = best.expect("at least one scenario");
    Ok(MinCutWitness {
        value,
        scenario,
        evaluated,
    })
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(u) = &self.composition {
            writeln!(f, "composition {u}")?;
        }
        for (i, st) in self.history.stages.iter().enumerate() {
            let one = |xs: &[usize]| {
                xs.iter()
                    .map(|x| (x + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            let failed: Vec<String> = st
                .group
                .iter()
                .zip(&st.failed)
                .map(|(h, nodes)| format!("{}:{}", h + 1, one(nodes)))
                .collect();
            writeln!(
                f,
                "stage {}: group {{{}}} failed [{}] helpers {{{}}}",
                i + 1,
                one(&st.group),
                failed.join(" "),
                one(&st.helpers)
            )?;
        }
        let col: Vec<String> = self.collector.iter().map(|n| n.to_string()).collect();
        write!(f, "collector {}", col.join(" "))
    }
}
