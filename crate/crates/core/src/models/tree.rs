use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::forest::Task;
use super::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
        samples: usize,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        samples: usize,
    },
}

/// Binary regression/classification tree; node 0 is the root. Leaf values
/// are mean targets (the positive-class fraction for classification).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn split_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Split { .. }))
            .count()
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

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub features_per_split: usize,
}

#[derive(Clone, Copy, Default)]
struct Stats {
    n: f64,
    sum: f64,
    sumsq: f64,
}

impl Stats {
    fn add(&mut self, v: f64) {
        self.n += 1.0;
        self.sum += v;
        self.sumsq += v * v;
    }

    fn minus(self, o: Stats) -> Stats {
        Stats {
            n: self.n - o.n,
            sum: self.sum - o.sum,
            sumsq: self.sumsq - o.sumsq,
        }
    }

    fn mean(self) -> f64 {
        self.sum / self.n
    }

    /// Gini impurity for 0/1 targets, variance otherwise.
    fn impurity(self, task: Task) -> f64 {
        if self.n == 0.0 {
            return 0.0;
        }
        let m = self.mean();
        match task {
            Task::Classification => 2.0 * m * (1.0 - m),
            Task::Regression => (self.sumsq / self.n - m * m).max(0.0),
        }
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    /// weighted child impurity n_l·i_l + n_r·i_r
    child_impurity: f64,
}

fn best_split_on(
    x: &Matrix,
    y: &[f64],
    idx: &mut [usize],
    feature: usize,
    total: Stats,
    task: Task,
    min_leaf: usize,
) -> Option<Candidate> {
    idx.sort_by(|&a, &b| x.get(a, feature).total_cmp(&x.get(b, feature)));
    let mut left = Stats::default();
    let mut best: Option<Candidate> = None;
    for pos in 0..idx.len() - 1 {
        left.add(y[idx[pos]]);
        let (lo, hi) = (x.get(idx[pos], feature), x.get(idx[pos + 1], feature));
        if lo == hi || pos + 1 < min_leaf || idx.len() - pos - 1 < min_leaf {
            continue;
        }
        let right = total.minus(left);
        let child = left.n * left.impurity(task) + right.n * right.impurity(task);
        if best.as_ref().is_none_or(|b| child < b.child_impurity) {
            let mid = lo + (hi - lo) / 2.0;
            let threshold = if mid < hi { mid } else { lo };
            best = Some(Candidate {
                feature,
                threshold,
                child_impurity: child,
            });
        }
    }
    best
}

/// Grows one tree on the rows in `sample` (repeats allowed). Returns the
/// tree and its unnormalized impurity-decrease importances.
pub(crate) fn grow_tree(
    x: &Matrix,
    y: &[f64],
    sample: Vec<usize>,
    task: Task,
    params: TreeParams,
    rng: &mut impl Rng,
) -> (DecisionTree, Vec<f64>) {
    let mut importances = vec![0.0; x.cols()];
    let mut nodes: Vec<Node> = Vec::new();
    let mut features: Vec<usize> = (0..x.cols()).collect();
    // (rows, depth, slot to patch in the parent)
    let mut stack: Vec<(Vec<usize>, usize, Option<(usize, bool)>)> = vec![(sample, 0, None)];

    while let Some((mut idx, depth, parent)) = stack.pop() {
        let mut total = Stats::default();
        for &i in &idx {
            total.add(y[i]);
        }
        let node_impurity = total.impurity(task);
        let here = nodes.len();
        if let Some((p, is_left)) = parent {
            if let Node::Split { left, right, .. } = &mut nodes[p] {
                if is_left {
                    *left = here;
                } else {
                    *right = here;
                }
            }
        }

        let can_split = idx.len() >= params.min_samples_split.max(2)
            && params.max_depth.is_none_or(|d| depth < d)
            && node_impurity > 0.0;
        let mut best: Option<Candidate> = None;
        if can_split {
            features.shuffle(rng);
            for (tried, &f) in features.iter().enumerate() {
                if tried >= params.features_per_split && best.is_some() {
                    break;
                }
                if let Some(c) = best_split_on(x, y, &mut idx, f, total, task, params.min_samples_leaf.max(1)) {
                    if best.as_ref().is_none_or(|b| c.child_impurity < b.child_impurity) {
                        best = Some(c);
                    }
                }
            }
        }
        let decrease = best
            .as_ref()
            .map(|b| total.n * node_impurity - b.child_impurity);
        match (best, decrease) {
            (Some(b), Some(dec)) if dec > 1e-12 * total.n.max(1.0) => {
                importances[b.feature] += dec;
                let (left, right): (Vec<usize>, Vec<usize>) =
                    idx.iter().partition(|&&i| x.get(i, b.feature) <= b.threshold);
                nodes.push(Node::Split {
                    feature: b.feature,
                    threshold: b.threshold,
                    left: usize::MAX,
                    right: usize::MAX,
                    samples: idx.len(),
                });
                stack.push((right, depth + 1, Some((here, false))));
                stack.push((left, depth + 1, Some((here, true))));
            }
            _ => nodes.push(Node::Leaf {
                value: total.mean(),
                samples: idx.len(),
            }),
        }
    }
    (DecisionTree { nodes }, importances)
}
