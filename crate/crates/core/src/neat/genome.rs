use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Input,
    Hidden,
    Output,
}

/// Node gene. Every non-input node applies a logistic sigmoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeGene {
    pub id: usize,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionGene {
    pub in_node: usize,
    pub out_node: usize,
    pub weight: f64,
    pub enabled: bool,
    pub innovation: u64,
}

/// Node and connection genes of a bias-free feed-forward network.
///
/// Nodes are kept sorted by id and connections by innovation number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub nodes: Vec<NodeGene>,
    pub connections: Vec<ConnectionGene>,
    pub fitness: Option<f64>,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Genome {
    /// Inputs fully connected to outputs with standard-normal weights.
    ///
    /// Input ids are `0..n_in`, output ids `n_in..n_in + n_out`, and the
    /// connection `i -> o` carries innovation `i * n_out + o`, so every
    /// initial genome of a run shares its innovation numbers.
    pub fn minimal<R: Rng + ?Sized>(n_in: usize, n_out: usize, rng: &mut R) -> Genome {
        let nodes = (0..n_in)
            .map(|id| NodeGene {
                id,
                kind: NodeKind::Input,
            })
            .chain((0..n_out).map(|o| NodeGene {
                id: n_in + o,
                kind: NodeKind::Output,
            }))
            .collect();
        let mut connections = Vec::with_capacity(n_in * n_out);
        for i in 0..n_in {
            for o in 0..n_out {
                connections.push(ConnectionGene {
                    in_node: i,
                    out_node: n_in + o,
                    weight: StandardNormal.sample(rng),
                    enabled: true,
                    innovation: (i * n_out + o) as u64,
                });
            }
        }
        Genome {
            nodes,
            connections,
            fitness: None,
        }
    }

    pub fn input_ids(&self) -> Vec<usize> {
        self.ids_of(NodeKind::Input)
    }

    pub fn output_ids(&self) -> Vec<usize> {
        self.ids_of(NodeKind::Output)
    }

    fn ids_of(&self, kind: NodeKind) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.kind == kind).map(|n| n.id).collect()
    }

    fn kind_of(&self, id: usize) -> Option<NodeKind> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(|i| self.nodes[i].kind)
    }

    pub fn has_connection(&self, from: usize, to: usize) -> bool {
        self.connections.iter().any(|c| c.in_node == from && c.out_node == to)
    }

    /// Whether `to` is reachable from `from` over all genes, enabled or not.
    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                stack.extend(self.connections.iter().filter(|c| c.in_node == n).map(|c| c.out_node));
            }
        }
        false
    }

    /// Topological order over every gene (disabled ones included).
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let mut indegree: BTreeMap<usize, usize> = self.nodes.iter().map(|n| (n.id, 0)).collect();
        for c in &self.connections {
            *indegree.get_mut(&c.out_node).ok_or(Error::InvalidData(format!(
                "connection references missing node {}",
                c.out_node
            )))? += 1;
        }
        let mut ready: Vec<usize> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&id, _)| id).collect();
        ready.reverse();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(n) = ready.pop() {
            order.push(n);
            for c in self.connections.iter().filter(|c| c.in_node == n) {
                let d = indegree.get_mut(&c.out_node).expect("checked above");
                *d -= 1;
                if *d == 0 {
                    ready.push(c.out_node);
                }
            }
        }
        if order.len() != self.nodes.len() {
            return Err(Error::CyclicGenome);
        }
        Ok(order)
    }

    /// Check id uniqueness, references, innovation uniqueness and acyclicity.
    pub fn validate(&self) -> Result<()> {
        let ids: BTreeSet<usize> = self.nodes.iter().map(|n| n.id).collect();
        if ids.len() != self.nodes.len() {
            return Err(Error::InvalidData("duplicate node id".into()));
        }
        let innovations: BTreeSet<u64> = self.connections.iter().map(|c| c.innovation).collect();
        if innovations.len() != self.connections.len() {
            return Err(Error::InvalidData("duplicate innovation number".into()));
        }
        for c in &self.connections {
            if !ids.contains(&c.in_node) || !ids.contains(&c.out_node) {
                return Err(Error::InvalidData(format!(
                    "connection {} references a missing node",
                    c.innovation
                )));
            }
        }
        self.topological_order().map(|_| ())
    }

    /// Evaluate the network on `inputs`; outputs lie strictly inside `(0, 1)`.
    pub fn activate(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let input_ids = self.input_ids();
        if inputs.len() != input_ids.len() {
            return Err(Error::DimensionMismatch {
                expected: input_ids.len(),
                actual: inputs.len(),
            });
        }
        let order = self.topological_order()?;
        let mut value: HashMap<usize, f64> = input_ids.iter().copied().zip(inputs.iter().copied()).collect();
        for id in order {
            if self.kind_of(id) == Some(NodeKind::Input) {
                continue;
            }
            let sum: f64 = self
                .connections
                .iter()
                .filter(|c| c.enabled && c.out_node == id)
                .map(|c| c.weight * value[&c.in_node])
                .sum();
            value.insert(id, sigmoid(sum));
        }
        Ok(self
            .output_ids()
            .iter()
            .map(|id| value[id].clamp(f64::EPSILON, 1.0 - f64::EPSILON))
            .collect())
    }
}

/// Innovation bookkeeping shared by every genome of one run.
///
/// The same structural mutation made twice within a generation receives the
/// same innovation number (and, for node splits, the same node id).
#[derive(Debug, Clone)]
pub struct InnovationTracker {
    next_innovation: u64,
    next_node: usize,
    connections: BTreeMap<(usize, usize), u64>,
    splits: BTreeMap<u64, usize>,
}

impl InnovationTracker {
    /// Tracker continuing after the genes of [`Genome::minimal`].
    pub fn new(n_in: usize, n_out: usize) -> Self {
        Self {
            next_innovation: (n_in * n_out) as u64,
            next_node: n_in + n_out,
            connections: BTreeMap::new(),
            splits: BTreeMap::new(),
        }
    }

    pub fn new_generation(&mut self) {
        self.connections.clear();
        self.splits.clear();
    }

    pub fn connection(&mut self, from: usize, to: usize) -> u64 {
        *self.connections.entry((from, to)).or_insert_with(|| {
            self.next_innovation += 1;
            self.next_innovation - 1
        })
    }

    pub fn split(&mut self, innovation: u64) -> usize {
        *self.splits.entry(innovation).or_insert_with(|| {
            self.next_node += 1;
            self.next_node - 1
        })
    }
}

/// Mutation probabilities and weight perturbation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutationRates {
    pub weight_mutation: f64,
    pub weight_sigma: f64,
    pub weight_replace: f64,
    pub weight_limit: f64,
    pub add_node: f64,
    pub add_connection: f64,
}

impl Default for MutationRates {
    fn default() -> Self {
        Self {
            weight_mutation: 0.8,
            weight_sigma: 0.5,
            weight_replace: 0.1,
            weight_limit: 8.0,
            add_node: 0.03,
            add_connection: 0.05,
        }
    }
}

fn add_connection<R: Rng + ?Sized>(g: &mut Genome, tracker: &mut InnovationTracker, rng: &mut R) {
    let mut legal = Vec::new();
    for a in g.nodes.iter().filter(|n| n.kind != NodeKind::Output) {
        for b in g.nodes.iter().filter(|n| n.kind != NodeKind::Input) {
            if a.id != b.id && !g.has_connection(a.id, b.id) && !g.reaches(b.id, a.id) {
                legal.push((a.id, b.id));
            }
        }
    }
    if legal.is_empty() {
        return;
    }
    let (from, to) = legal[rng.random_range(0..legal.len())];
    let innovation = tracker.connection(from, to);
    if g.connections.iter().any(|c| c.innovation == innovation) {
        return;
    }
    g.connections.push(ConnectionGene {
        in_node: from,
        out_node: to,
        weight: StandardNormal.sample(rng),
        enabled: true,
        innovation,
    });
    g.connections.sort_by_key(|c| c.innovation);
}

fn add_node<R: Rng + ?Sized>(g: &mut Genome, tracker: &mut InnovationTracker, rng: &mut R) {
    let enabled: Vec<usize> = (0..g.connections.len()).filter(|&i| g.connections[i].enabled).collect();
    if enabled.is_empty() {
        return;
    }
    let idx = enabled[rng.random_range(0..enabled.len())];
    let old = g.connections[idx];
    let node = tracker.split(old.innovation);
    if g.kind_of(node).is_some() {
        return;
    }
    let into = tracker.connection(old.in_node, node);
    let out = tracker.connection(node, old.out_node);
    g.connections[idx].enabled = false;
    g.nodes.push(NodeGene {
        id: node,
        kind: NodeKind::Hidden,
    });
    g.nodes.sort_by_key(|n| n.id);
    g.connections.push(ConnectionGene {
        in_node: old.in_node,
        out_node: node,
        weight: 1.0,
        enabled: true,
        innovation: into,
    });
    g.connections.push(ConnectionGene {
        in_node: node,
        out_node: old.out_node,
        weight: old.weight,
        enabled: true,
        innovation: out,
    });
    g.connections.sort_by_key(|c| c.innovation);
}

/// Apply weight, add-connection and add-node mutations with the given rates.
pub fn mutate<R: Rng + ?Sized>(
    genome: &Genome,
    rates: &MutationRates,
    tracker: &mut InnovationTracker,
    rng: &mut R,
) -> Genome {
    let mut g = genome.clone();
    if rng.random::<f64>() < rates.weight_mutation {
        for c in &mut g.connections {
            if rng.random::<f64>() < rates.weight_replace {
                c.weight = StandardNormal.sample(rng);
            } else {
                let step: f64 = StandardNormal.sample(rng);
                c.weight += rates.weight_sigma * step;
            }
            c.weight = c.weight.clamp(-rates.weight_limit, rates.weight_limit);
        }
    }
    if rng.random::<f64>() < rates.add_connection {
        add_connection(&mut g, tracker, rng);
    }
    if rng.random::<f64>() < rates.add_node {
        add_node(&mut g, tracker, rng);
    }
    if g != *genome {
        g.fitness = None;
    }
    g
}

/// NEAT crossover. The parent with higher fitness supplies disjoint and
/// excess genes; equal fitness favours `first`.
pub fn crossover<R: Rng + ?Sized>(first: &Genome, second: &Genome, rng: &mut R) -> Genome {
    let fit = |g: &Genome| g.fitness.unwrap_or(f64::NEG_INFINITY);
    let (fitter, other) = if fit(second) > fit(first) {
        (second, first)
    } else {
        (first, second)
    };
    let other_genes: HashMap<u64, &ConnectionGene> = other.connections.iter().map(|c| (c.innovation, c)).collect();
    let connections = fitter
        .connections
        .iter()
        .map(|g| match other_genes.get(&g.innovation) {
            Some(o) => {
                let mut child = if rng.random_bool(0.5) { *g } else { **o };
                child.enabled = if !g.enabled || !o.enabled {
                    rng.random::<f64>() >= 0.75
                } else {
                    true
                };
                child
            }
            None => *g,
        })
        .collect();
    Genome {
        nodes: fitter.nodes.clone(),
        connections,
        fitness: None,
    }
}

/// Standard NEAT distance `c1 E / N + c2 D / N + c3 W`.
pub fn compatibility_distance(a: &Genome, b: &Genome, c1: f64, c2: f64, c3: f64) -> f64 {
    let ga: BTreeMap<u64, f64> = a.connections.iter().map(|c| (c.innovation, c.weight)).collect();
    let gb: BTreeMap<u64, f64> = b.connections.iter().map(|c| (c.innovation, c.weight)).collect();
    let max_a = ga.keys().next_back().copied();
    let max_b = gb.keys().next_back().copied();
    let (mut excess, mut disjoint, mut matching, mut wdiff) = (0usize, 0usize, 0usize, 0.0);
    let mut classify = |own: &BTreeMap<u64, f64>, other: &BTreeMap<u64, f64>, other_max: Option<u64>| {
        for inn in own.keys().filter(|i| !other.contains_key(i)) {
            if other_max.is_none_or(|m| *inn > m) {
                excess += 1;
            } else {
                disjoint += 1;
            }
        }
    };
    classify(&ga, &gb, max_b);
    classify(&gb, &ga, max_a);
    for (inn, wa) in &ga {
        if let Some(wb) = gb.get(inn) {
            matching += 1;
            wdiff += (wa - wb).abs();
        }
    }
    let mean_w = if matching > 0 { wdiff / matching as f64 } else { 0.0 };
    let longest = ga.len().max(gb.len());
    let n = if longest < 20 { 1.0 } else { longest as f64 };
    c1 * excess as f64 / n + c2 * disjoint as f64 / n + c3 * mean_w
}
