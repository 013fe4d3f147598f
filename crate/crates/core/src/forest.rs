//! Random forest of Gini-split decision trees over sparse feature vectors.
//!
//! Trees are independent: each draws its bootstrap sample and per-node
//! feature subsets from a ChaCha stream derived solely from
//! `(seed, tree_index)`, so parallel and serial training produce identical
//! forests. Absent sparse coordinates are treated as 0.0, and per-feature
//! threshold candidates are the midpoints of consecutive distinct values
//! observed at the node.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::SparseVector;
use crate::label::Label;
use crate::ModelError;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub const DEFAULT_N_TREES: usize = 500;
pub const DEFAULT_MAX_DEPTH: usize = 26;

/// A decision tree node; leaves carry the (informative, uninformative)
/// counts of the bootstrap samples that reached them.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        counts: [u32; 2],
    },
}

impl TreeNode {
    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// Proportion of INFORMATIVE samples in the leaf `x` routes to.
    fn informative_proportion(&self, x: &SparseVector) -> f64 {
        match self {
            TreeNode::Leaf { counts } => {
                let total = counts[0] + counts[1];
                counts[0] as f64 / total as f64
            }
            TreeNode::Internal { feature, threshold, left, right } => {
                if x.get(*feature) <= *threshold {
                    left.informative_proportion(x)
                } else {
                    right.informative_proportion(x)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features drawn per split; `None` means `⌈√dim⌉`.
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: DEFAULT_N_TREES,
            max_depth: DEFAULT_MAX_DEPTH,
            min_leaf: 1,
            features_per_split: None,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForestModel {
    trees: Vec<TreeNode>,
    max_depth: usize,
    min_leaf: usize,
    features_per_split: usize,
    seed: u64,
    dim: usize,
}

impl RandomForestModel {
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        trees: Vec<TreeNode>,
        max_depth: usize,
        min_leaf: usize,
        features_per_split: usize,
        seed: u64,
        dim: usize,
    ) -> Self {
        RandomForestModel { trees, max_depth, min_leaf, features_per_split, seed, dim }
    }

    pub fn trees(&self) -> &[TreeNode] {
        &self.trees
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn min_leaf(&self) -> usize {
        self.min_leaf
    }

    pub fn features_per_split(&self) -> usize {
        self.features_per_split
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Soft vote: mean of the per-tree leaf class proportions.
    pub fn informative_proportion(&self, x: &SparseVector) -> Result<f64, ModelError> {
        if x.dim() != self.dim {
            return Err(ModelError::DimensionMismatch { expected: self.dim, got: x.dim() });
        }
        let sum: f64 = self.trees.iter().map(|t| t.informative_proportion(x)).sum();
        Ok(sum / self.trees.len() as f64)
    }

    /// INFORMATIVE when the averaged proportion is ≥ 0.5 (fixed convention).
    pub fn predict(&self, x: &SparseVector) -> Result<Label, ModelError> {
        let p = self.informative_proportion(x)?;
        Ok(if p >= 0.5 { Label::Informative } else { Label::Uninformative })
    }

    /// Batch prediction; data-parallel under the `parallel` feature, output
    /// order matching input order.
    pub fn predict_batch(&self, xs: &[SparseVector]) -> Result<Vec<Label>, ModelError> {
        #[cfg(feature = "parallel")]
        {
            xs.par_iter().map(|x| self.predict(x)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            xs.iter().map(|x| self.predict(x)).collect()
        }
    }
}

/// `1 − Σ pᵢ²` over the two class proportions.
pub fn gini_impurity(counts: [u32; 2]) -> Result<f64, ModelError> {
    let total = counts[0] as f64 + counts[1] as f64;
    if total == 0.0 {
        return Err(ModelError::InvalidHyperparameter(
            "gini impurity of an empty node is undefined".into(),
        ));
    }
    let p0 = counts[0] as f64 / total;
    let p1 = counts[1] as f64 / total;
    Ok(1.0 - p0 * p0 - p1 * p1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub impurity_decrease: f64,
}

fn label_counts(y: &[Label], samples: &[usize]) -> [u32; 2] {
    let mut counts = [0u32; 2];
    for &s in samples {
        counts[y[s].index()] += 1;
    }
    counts
}

/// Best split over the candidate thresholds (midpoints of consecutive
/// distinct per-feature values), maximizing the weighted Gini decrease.
/// Ties break to the lowest feature index, then the lowest threshold;
/// returns `None` when no split decreases impurity.
pub fn best_split(
    x: &[SparseVector],
    y: &[Label],
    samples: &[usize],
    feature_subset: &[usize],
) -> Option<Split> {
    best_split_constrained(x, y, samples, feature_subset, 1)
}

fn best_split_constrained(
    x: &[SparseVector],
    y: &[Label],
    samples: &[usize],
    feature_subset: &[usize],
    min_leaf: usize,
) -> Option<Split> {
    if samples.len() < 2 || feature_subset.is_empty() {
        return None;
    }
    let parent = label_counts(y, samples);
    if parent[0] == 0 || parent[1] == 0 {
        return None;
    }
    let n = samples.len() as f64;
    let parent_gini = gini_impurity(parent).expect("node is non-empty");

    let mut best: Option<Split> = None;
    let mut features = feature_subset.to_vec();
    features.sort_unstable();
    features.dedup();

    let mut values: Vec<(f64, usize)> = Vec::with_capacity(samples.len());
    for &feature in &features {
        values.clear();
        values.extend(samples.iter().map(|&s| (x[s].get(feature), y[s].index())));
        values.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature values"));
        if values[0].0 == values[values.len() - 1].0 {
            continue;
        }
        let mut left = [0u32; 2];
        for i in 0..values.len() - 1 {
            left[values[i].1] += 1;
            if values[i].0 == values[i + 1].0 {
                continue;
            }
            let threshold = 0.5 * (values[i].0 + values[i + 1].0);
            let n_left = i + 1;
            let n_right = values.len() - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let right = [parent[0] - left[0], parent[1] - left[1]];
            let gini_left = gini_impurity(left).expect("left side non-empty");
            let gini_right = gini_impurity(right).expect("right side non-empty");
            let weighted =
                (n_left as f64 * gini_left + n_right as f64 * gini_right) / n;
            let decrease = parent_gini - weighted;
            if decrease > 0.0
                && best.as_ref().map_or(true, |b| decrease > b.impurity_decrease)
            {
                best = Some(Split { feature, threshold, impurity_decrease: decrease });
            }
        }
    }
    best
}

/// The deterministic bootstrap drawn for `(seed, tree_index)`: `n` indices
/// sampled with replacement. This is exactly the sample the trainer uses,
/// exposed so its properties can be verified from outside.
pub fn bootstrap_sample(seed: u64, tree_index: u64, n: usize) -> Vec<usize> {
    let mut rng = tree_rng(seed, tree_index);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

fn tree_rng(seed: u64, tree_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree_index);
    rng
}

fn grow(
    x: &[SparseVector],
    y: &[Label],
    samples: &[usize],
    depth: usize,
    dim: usize,
    params: &ForestParams,
    features_per_split: usize,
    rng: &mut ChaCha8Rng,
) -> TreeNode {
    let counts = label_counts(y, samples);
    let pure = counts[0] == 0 || counts[1] == 0;
    if depth == params.max_depth || pure || samples.len() < 2 * params.min_leaf {
        return TreeNode::Leaf { counts };
    }
    let subset = rand::seq::index::sample(rng, dim, features_per_split).into_vec();
    match best_split_constrained(x, y, samples, &subset, params.min_leaf) {
        None => TreeNode::Leaf { counts },
        Some(split) => {
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for &s in samples {
                if x[s].get(split.feature) <= split.threshold {
                    left.push(s);
                } else {
                    right.push(s);
                }
            }
            let left_node =
                grow(x, y, &left, depth + 1, dim, params, features_per_split, rng);
            let right_node =
                grow(x, y, &right, depth + 1, dim, params, features_per_split, rng);
            TreeNode::Internal {
                feature: split.feature,
                threshold: split.threshold,
                left: Box::new(left_node),
                right: Box::new(right_node),
            }
        }
    }
}

fn grow_tree(
    x: &[SparseVector],
    y: &[Label],
    dim: usize,
    params: &ForestParams,
    features_per_split: usize,
    tree_index: u64,
) -> TreeNode {
    let mut rng = tree_rng(params.seed, tree_index);
    let n = x.len();
    let samples: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    grow(x, y, &samples, 0, dim, params, features_per_split, &mut rng)
}

fn validate(x: &[SparseVector], y: &[Label], params: &ForestParams) -> Result<usize, ModelError> {
    if x.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    if x.len() != y.len() {
        return Err(ModelError::LengthMismatch { features: x.len(), labels: y.len() });
    }
    let dim = x[0].dim();
    if let Some(bad) = x.iter().find(|v| v.dim() != dim) {
        return Err(ModelError::DimensionMismatch { expected: dim, got: bad.dim() });
    }
    if params.n_trees == 0 {
        return Err(ModelError::InvalidHyperparameter("n_trees must be at least 1".into()));
    }
    if params.min_leaf == 0 {
        return Err(ModelError::InvalidHyperparameter("min_leaf must be at least 1".into()));
    }
    if let Some(k) = params.features_per_split {
        if k == 0 || k > dim.max(1) {
            return Err(ModelError::InvalidHyperparameter(format!(
                "features_per_split must be in 1..={}, got {k}",
                dim.max(1)
            )));
        }
    }
    Ok(dim)
}

fn resolved_features_per_split(params: &ForestParams, dim: usize) -> usize {
    params
        .features_per_split
        .unwrap_or_else(|| (dim as f64).sqrt().ceil() as usize)
        .clamp(1, dim.max(1))
}

/// Trains the forest; tree-parallel under the `parallel` feature and
/// bit-identical to [`train_forest_serial`] either way.
pub fn train_forest(
    x: &[SparseVector],
    y: &[Label],
    params: &ForestParams,
) -> Result<RandomForestModel, ModelError> {
    let dim = validate(x, y, params)?;
    let k = resolved_features_per_split(params, dim);
    #[cfg(feature = "parallel")]
    let trees: Vec<TreeNode> = (0..params.n_trees as u64)
        .into_par_iter()
        .map(|ti| grow_tree(x, y, dim, params, k, ti))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let trees: Vec<TreeNode> =
        (0..params.n_trees as u64).map(|ti| grow_tree(x, y, dim, params, k, ti)).collect();
    Ok(RandomForestModel {
        trees,
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        features_per_split: k,
        seed: params.seed,
        dim,
    })
}

/// Always-sequential training (the benchmark baseline).
pub fn train_forest_serial(
    x: &[SparseVector],
    y: &[Label],
    params: &ForestParams,
) -> Result<RandomForestModel, ModelError> {
    let dim = validate(x, y, params)?;
    let k = resolved_features_per_split(params, dim);
    let trees: Vec<TreeNode> =
        (0..params.n_trees as u64).map(|ti| grow_tree(x, y, dim, params, k, ti)).collect();
    Ok(RandomForestModel {
        trees,
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        features_per_split: k,
        seed: params.seed,
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(dim: usize, entries: &[(usize, f64)]) -> SparseVector {
        SparseVector::new(dim, entries.to_vec())
    }

    fn dense(values: &[f64]) -> SparseVector {
        SparseVector::new(
            values.len(),
            values.iter().enumerate().filter(|&(_, &v)| v != 0.0).map(|(i, &v)| (i, v)).collect(),
        )
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini_impurity([5, 0]).unwrap(), 0.0);
        assert_eq!(gini_impurity([1, 1]).unwrap(), 0.5);
        assert_eq!(gini_impurity([3, 1]).unwrap(), 0.375);
        assert!(gini_impurity([0, 0]).is_err());
    }

    #[test]
    fn best_split_one_dimensional() {
        let x = vec![dense(&[0.0]), dense(&[1.0])];
        let y = vec![Label::Uninformative, Label::Informative];
        let split = best_split(&x, &y, &[0, 1], &[0]).unwrap();
        assert_eq!(split.feature, 0);
        assert_eq!(split.threshold, 0.5);
        assert!((split.impurity_decrease - 0.5).abs() < 1e-12);
    }

    #[test]
    fn best_split_pure_node_returns_none() {
        let x = vec![dense(&[0.0]), dense(&[1.0])];
        let y = vec![Label::Informative, Label::Informative];
        assert!(best_split(&x, &y, &[0, 1], &[0]).is_none());
    }

    #[test]
    fn best_split_four_points() {
        let x: Vec<SparseVector> = [0.0, 1.0, 2.0, 3.0].iter().map(|&v| dense(&[v])).collect();
        let y = vec![
            Label::Uninformative,
            Label::Uninformative,
            Label::Informative,
            Label::Informative,
        ];
        let split = best_split(&x, &y, &[0, 1, 2, 3], &[0]).unwrap();
        assert_eq!(split.threshold, 1.5);
    }

    #[test]
    fn best_split_constant_feature_returns_none() {
        let x = vec![dense(&[1.0, 0.0]), dense(&[1.0, 0.0])];
        let y = vec![Label::Informative, Label::Uninformative];
        assert!(best_split(&x, &y, &[0, 1], &[0]).is_none());
        assert!(best_split(&x, &y, &[0, 1], &[0, 1]).is_none());
    }

    #[test]
    fn depth_zero_forest_is_a_majority_leaf() {
        let x = vec![dense(&[0.0]), dense(&[1.0]), dense(&[2.0])];
        let y = vec![Label::Informative, Label::Informative, Label::Uninformative];
        let params = ForestParams { n_trees: 1, max_depth: 0, seed: 3, ..Default::default() };
        let model = train_forest(&x, &y, &params).unwrap();
        assert_eq!(model.trees().len(), 1);
        assert!(matches!(model.trees()[0], TreeNode::Leaf { .. }));
        let boot = bootstrap_sample(3, 0, 3);
        let counts = label_counts(&y, &boot);
        let expected = if counts[0] as f64 / (counts[0] + counts[1]) as f64 >= 0.5 {
            Label::Informative
        } else {
            Label::Uninformative
        };
        assert_eq!(model.predict(&x[0]).unwrap(), expected);
    }

    #[test]
    fn xor_is_learned() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..25 {
            for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
                x.push(dense(&[a, b]));
                y.push(if (a == 1.0) ^ (b == 1.0) {
                    Label::Informative
                } else {
                    Label::Uninformative
                });
            }
        }
        let params = ForestParams { n_trees: 50, seed: 42, ..Default::default() };
        let model = train_forest(&x, &y, &params).unwrap();
        let correct = x
            .iter()
            .zip(&y)
            .filter(|(xi, &yi)| model.predict(xi).unwrap() == yi)
            .count();
        assert_eq!(correct, x.len(), "XOR training accuracy must be 100%");
    }

    #[test]
    fn fixed_seed_reproduces_the_forest() {
        let x: Vec<SparseVector> = (0..30).map(|i| sv(4, &[(i % 4, (i % 7) as f64)])).collect();
        let y: Vec<Label> = (0..30)
            .map(|i| if i % 3 == 0 { Label::Informative } else { Label::Uninformative })
            .collect();
        let params = ForestParams { n_trees: 8, seed: 5, ..Default::default() };
        let a = train_forest(&x, &y, &params).unwrap();
        let b = train_forest(&x, &y, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parallel_and_serial_forests_are_identical() {
        let x: Vec<SparseVector> = (0..40).map(|i| sv(6, &[(i % 6, (i % 5) as f64 + 0.5)])).collect();
        let y: Vec<Label> = (0..40)
            .map(|i| if (i / 2) % 2 == 0 { Label::Informative } else { Label::Uninformative })
            .collect();
        let params = ForestParams { n_trees: 12, seed: 11, ..Default::default() };
        assert_eq!(
            train_forest(&x, &y, &params).unwrap(),
            train_forest_serial(&x, &y, &params).unwrap()
        );
    }

    #[test]
    fn single_class_training_yields_pure_leaves() {
        // single-class data trains fine for a forest (every tree is a pure leaf)
        let x = vec![dense(&[0.0]), dense(&[1.0])];
        let y = vec![Label::Informative, Label::Informative];
        let model =
            train_forest(&x, &y, &ForestParams { n_trees: 3, ..Default::default() }).unwrap();
        assert_eq!(model.predict(&x[0]).unwrap(), Label::Informative);
    }

    #[test]
    fn empty_data_is_an_error() {
        assert_eq!(
            train_forest(&[], &[], &ForestParams::default()).unwrap_err(),
            ModelError::EmptyDataset
        );
    }

    #[test]
    fn prediction_checks_dimension() {
        let x = vec![dense(&[0.0, 1.0]), dense(&[1.0, 0.0])];
        let y = vec![Label::Informative, Label::Uninformative];
        let model =
            train_forest(&x, &y, &ForestParams { n_trees: 2, ..Default::default() }).unwrap();
        assert!(matches!(
            model.predict(&dense(&[1.0])),
            Err(ModelError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn soft_vote_tie_goes_to_informative() {
        let leaf_i = TreeNode::Leaf { counts: [1, 0] };
        let leaf_u = TreeNode::Leaf { counts: [0, 1] };
        let model = RandomForestModel::from_parts(vec![leaf_i, leaf_u], 0, 1, 1, 0, 1);
        let x = dense(&[0.0]);
        assert_eq!(model.informative_proportion(&x).unwrap(), 0.5);
        assert_eq!(model.predict(&x).unwrap(), Label::Informative);
    }

    #[test]
    fn all_pure_informative_trees_vote_informative() {
        let trees = vec![TreeNode::Leaf { counts: [7, 0] }; 5];
        let model = RandomForestModel::from_parts(trees, 0, 1, 1, 0, 1);
        assert_eq!(model.predict(&dense(&[0.0])).unwrap(), Label::Informative);
    }
}
