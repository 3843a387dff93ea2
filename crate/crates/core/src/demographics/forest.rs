//! Bagged CART classifier for binary labels.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DemographicsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means `ceil(sqrt(n_features))`.
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: None,
            max_depth: None,
            min_samples_split: 2,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        /// Fraction of positive samples that reached this leaf.
        p: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn leaf_p(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { p } => return p,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    n_features: usize,
    trees: Vec<Tree>,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    params: &'a ForestParams,
    max_features: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn build(&mut self, idx: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let n = idx.len();
        let pos = idx.iter().filter(|&&i| self.y[i]).count();
        let node_id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            p: pos as f64 / n.max(1) as f64,
        });
        let depth_capped = self.params.max_depth.is_some_and(|d| depth >= d);
        if pos == 0 || pos == n || n < self.params.min_samples_split || depth_capped {
            return node_id;
        }
        let n_features = self.x[0].len();
        let first = sample(rng, n_features, self.max_features.min(n_features)).into_vec();
        let mut best = self.best_split(idx, &first, pos);
        if best.is_none() {
            let rest: Vec<usize> = (0..n_features).filter(|f| !first.contains(f)).collect();
            best = self.best_split(idx, &rest, pos);
        }
        let Some((feature, threshold)) = best else {
            return node_id;
        };
        let mut split = 0;
        for k in 0..n {
            if self.x[idx[k]][feature] <= threshold {
                idx.swap(k, split);
                split += 1;
            }
        }
        let (l, r) = idx.split_at_mut(split);
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        self.nodes[node_id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        node_id
    }

    /// Lowest weighted Gini over `features`; `None` if every candidate
    /// feature is constant on `idx`.
    fn best_split(&self, idx: &[usize], features: &[usize], pos: usize) -> Option<(usize, f64)> {
        let n = idx.len();
        let parent = gini(pos, n);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order: Vec<usize> = idx.to_vec();
        for &f in features {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left_pos = 0;
            for k in 0..n - 1 {
                if self.y[order[k]] {
                    left_pos += 1;
                }
                let (v, next) = (self.x[order[k]][f], self.x[order[k + 1]][f]);
                if v == next {
                    continue;
                }
                let nl = k + 1;
                let nr = n - nl;
                let impurity = (nl as f64 * gini(left_pos, nl)
                    + nr as f64 * gini(pos - left_pos, nr))
                    / n as f64;
                if impurity < parent + 1e-12 && best.map_or(true, |(b, _, _)| impurity < b) {
                    best = Some((impurity, f, v + (next - v) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

impl RandomForest {
    /// Trains `params.n_trees` trees, each on a bootstrap sample with its own
    /// seed drawn from `seed`.
    pub fn fit(
        x: &[Vec<f64>],
        y: &[bool],
        params: &ForestParams,
        seed: u64,
    ) -> Result<Self, DemographicsError> {
        if x.len() != y.len() {
            return Err(DemographicsError::Degenerate(format!(
                "{} feature rows but {} labels",
                x.len(),
                y.len()
            )));
        }
        let positives = y.iter().filter(|&&b| b).count();
        if positives == 0 || positives == y.len() {
            return Err(DemographicsError::Degenerate(
                "training labels contain fewer than 2 classes".into(),
            ));
        }
        let n_features = x[0].len();
        if n_features == 0 || x.iter().any(|r| r.len() != n_features) {
            return Err(DemographicsError::Degenerate(
                "feature rows must be nonempty and equally long".into(),
            ));
        }
        if params.n_trees == 0 {
            return Err(DemographicsError::Config("n_trees must be positive".into()));
        }
        let max_features = params
            .max_features
            .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
            .clamp(1, n_features);
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let mut trees = Vec::with_capacity(params.n_trees);
        for _ in 0..params.n_trees {
            let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
            let mut idx: Vec<usize> = if params.bootstrap {
                (0..x.len()).map(|_| rng.gen_range(0..x.len())).collect()
            } else {
                (0..x.len()).collect()
            };
            let mut b = Builder {
                x,
                y,
                params,
                max_features,
                nodes: Vec::new(),
            };
            b.build(&mut idx, 0, &mut rng);
            trees.push(Tree { nodes: b.nodes });
        }
        Ok(Self { n_features, trees })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Share of trees voting positive.
    pub fn vote_share(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n_features, "feature vector length mismatch");
        let votes = self.trees.iter().filter(|t| t.leaf_p(x) > 0.5).count();
        votes as f64 / self.trees.len() as f64
    }

    /// Strict majority vote; an even split is negative.
    pub fn predict(&self, x: &[f64]) -> bool {
        self.vote_share(x) > 0.5
    }
}
