use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        /// Samples with bin `<= bin` (equivalently value `<= threshold`) go left.
        bin: u8,
        threshold: f64,
        left: usize,
        right: usize,
        gain: f64,
    },
    Leaf {
        value: f64,
    },
}

/// Regression tree stored as a node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[inline]
fn denom(h: f64, lambda_l2: f64) -> f64 {
    (h + lambda_l2).max(1e-15)
}

/// `0.5 [G_L^2/(H_L+l2) + G_R^2/(H_R+l2) - (G_L+G_R)^2/(H_L+H_R+l2)]`.
#[inline]
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda_l2: f64) -> f64 {
    let g = gl + gr;
    0.5 * (gl * gl / denom(hl, lambda_l2) + gr * gr / denom(hr, lambda_l2) - g * g / denom(hl + hr, lambda_l2))
}

/// Newton leaf value with L1 soft-thresholding, before shrinkage.
#[inline]
pub fn leaf_value(g: f64, h: f64, lambda_l1: f64, lambda_l2: f64) -> f64 {
    -g.signum() * (g.abs() - lambda_l1).max(0.0) / denom(h, lambda_l2)
}

#[derive(Clone, Copy, Default)]
struct BinStat {
    g: f64,
    h: f64,
    n: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SplitCandidate {
    pub feature: usize,
    pub bin: u8,
    pub gain: f64,
}

pub(crate) struct GrowParams<'a> {
    /// Column-major binned features: `bins[f][row]`.
    pub bins: &'a [Vec<u8>],
    pub n_bins: &'a [usize],
    pub features: &'a [usize],
    pub grad: &'a [f64],
    pub hess: &'a [f64],
    pub max_depth: usize,
    pub num_leaves: usize,
    pub min_child_samples: usize,
    pub lambda_l1: f64,
    pub lambda_l2: f64,
    pub learning_rate: f64,
}

/// Best split of `rows` over the sampled features; ties keep the first found.
pub(crate) fn best_split(p: &GrowParams, rows: &[usize]) -> Option<SplitCandidate> {
    let mut best: Option<SplitCandidate> = None;
    let mut hist: Vec<BinStat> = Vec::new();
    let (g_tot, h_tot) = rows
        .iter()
        .fold((0.0, 0.0), |(g, h), &r| (g + p.grad[r], h + p.hess[r]));
    for &f in p.features {
        let nb = p.n_bins[f];
        if nb < 2 {
            continue;
        }
        hist.clear();
        hist.resize(nb, BinStat::default());
        let col = &p.bins[f];
        for &r in rows {
            let s = &mut hist[col[r] as usize];
            s.g += p.grad[r];
            s.h += p.hess[r];
            s.n += 1;
        }
        let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0usize);
        for (t, s) in hist.iter().enumerate().take(nb - 1) {
            gl += s.g;
            hl += s.h;
            nl += s.n;
            let nr = rows.len() - nl;
            if nl < p.min_child_samples || nr < p.min_child_samples {
                continue;
            }
            let gain = split_gain(gl, hl, g_tot - gl, h_tot - hl, p.lambda_l2);
            if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
                best = Some(SplitCandidate {
                    feature: f,
                    bin: t as u8,
                    gain,
                });
            }
        }
    }
    best
}

struct OpenLeaf {
    node: usize,
    rows: Vec<usize>,
    depth: usize,
    split: Option<SplitCandidate>,
}

/// Grow one tree best-first, bounded by `num_leaves` and `max_depth`.
pub(crate) fn grow(p: &GrowParams, rows: Vec<usize>, thresholds: &[Vec<f64>]) -> Tree {
    let leaf_of = |rows: &[usize]| {
        let (g, h) = rows
            .iter()
            .fold((0.0, 0.0), |(g, h), &r| (g + p.grad[r], h + p.hess[r]));
        Node::Leaf {
            value: p.learning_rate * leaf_value(g, h, p.lambda_l1, p.lambda_l2),
        }
    };
    let splittable = |depth: usize, rows: &[usize]| depth < p.max_depth && rows.len() >= 2 * p.min_child_samples.max(1);
    let mut nodes = vec![leaf_of(&rows)];
    let root_split = if splittable(0, &rows) {
        best_split(p, &rows)
    } else {
        None
    };
    let mut open = vec![OpenLeaf {
        node: 0,
        rows,
        depth: 0,
        split: root_split,
    }];
    let mut leaves = 1;
    while leaves < p.num_leaves {
        let pick = open
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.split.map(|s| (i, s.gain)))
            .fold(None, |acc: Option<(usize, f64)>, (i, g)| match acc {
                Some((_, bg)) if bg >= g => acc,
                _ => Some((i, g)),
            });
        let Some((idx, _)) = pick else { break };
        let leaf = open.swap_remove(idx);
        let split = leaf.split.expect("picked leaves have a split");
        let col = &p.bins[split.feature];
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = leaf.rows.iter().partition(|&&r| col[r] <= split.bin);
        let (li, ri) = (nodes.len(), nodes.len() + 1);
        nodes.push(leaf_of(&left_rows));
        nodes.push(leaf_of(&right_rows));
        nodes[leaf.node] = Node::Split {
            feature: split.feature,
            bin: split.bin,
            threshold: thresholds[split.feature][split.bin as usize],
            left: li,
            right: ri,
            gain: split.gain,
        };
        leaves += 1;
        for (node, rows) in [(li, left_rows), (ri, right_rows)] {
            let depth = leaf.depth + 1;
            let split = if splittable(depth, &rows) {
                best_split(p, &rows)
            } else {
                None
            };
            open.push(OpenLeaf {
                node,
                rows,
                depth,
                split,
            });
        }
        // Keep candidate order deterministic: by node index.
        open.sort_by_key(|l| l.node);
    }
    Tree { nodes }
}
