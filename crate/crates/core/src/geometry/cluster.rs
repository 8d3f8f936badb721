use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::simplex::dist_sq;
use super::GeometryError;

const LLOYD_ITERS: usize = 100;

/// Node of the binary cluster tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterNode {
    pub size: usize,
    pub depth: usize,
    pub children: Option<(usize, usize)>,
    /// Leaf index when this node is a leaf.
    pub leaf: Option<usize>,
}

/// Recursive 2-means partition. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTree {
    pub nodes: Vec<ClusterNode>,
    /// Input indices per leaf, in depth-first order.
    pub leaves: Vec<Vec<usize>>,
}

impl ClusterTree {
    pub fn num_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }
}

/// Splits `points` by recursive 2-means until every leaf holds at most
/// `max_cluster_size` points.
pub fn hierarchical_cluster(
    points: &[Vec<f64>],
    max_cluster_size: usize,
    seed: u64,
) -> Result<ClusterTree, GeometryError> {
    let dim = points.first().map_or(0, |p| p.len());
    if max_cluster_size < dim + 1 || max_cluster_size < 2 {
        return Err(GeometryError::InvalidArgument("cluster size cap must be at least dim + 1"));
    }
    let mut tree = ClusterTree { nodes: Vec::new(), leaves: Vec::new() };
    split(points, (0..points.len()).collect(), 0, max_cluster_size, seed, &mut tree);
    Ok(tree)
}

fn split(points: &[Vec<f64>], idx: Vec<usize>, depth: usize, cap: usize, seed: u64, tree: &mut ClusterTree) -> usize {
    let me = tree.nodes.len();
    tree.nodes.push(ClusterNode { size: idx.len(), depth, children: None, leaf: None });
    if idx.len() <= cap {
        tree.nodes[me].leaf = Some(tree.leaves.len());
        tree.leaves.push(idx);
        return me;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(me as u64);
    let (a, b) = match two_means(points, &idx, &mut rng) {
        Some(parts) => parts,
        None => {
            let half = idx.len() / 2;
            (idx[..half].to_vec(), idx[half..].to_vec())
        }
    };
    let l = split(points, a, depth + 1, cap, seed, tree);
    let r = split(points, b, depth + 1, cap, seed, tree);
    tree.nodes[me].children = Some((l, r));
    me
}

/// One 2-means split with k-means++ seeding. `None` when a side is empty.
fn two_means(points: &[Vec<f64>], idx: &[usize], rng: &mut ChaCha8Rng) -> Option<(Vec<usize>, Vec<usize>)> {
    let first = idx[rng.gen_range(0..idx.len())];
    let d2: Vec<f64> = idx.iter().map(|&i| dist_sq(&points[i], &points[first])).collect();
    let total: f64 = d2.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut target = rng.gen::<f64>() * total;
    let mut second = idx[idx.len() - 1];
    for (k, &i) in idx.iter().enumerate() {
        target -= d2[k];
        if target <= 0.0 && d2[k] > 0.0 {
            second = i;
            break;
        }
    }
    let mut centers = [points[first].clone(), points[second].clone()];
    let mut assign = vec![0u8; idx.len()];
    for iter in 0..LLOYD_ITERS {
        let mut changed = false;
        for (k, &i) in idx.iter().enumerate() {
            let side = u8::from(dist_sq(&points[i], &centers[1]) < dist_sq(&points[i], &centers[0]));
            if side != assign[k] || iter == 0 {
                changed |= side != assign[k];
                assign[k] = side;
            }
        }
        if iter > 0 && !changed {
            break;
        }
        let dim = centers[0].len();
        let mut sums = [vec![0.0; dim], vec![0.0; dim]];
        let mut counts = [0usize; 2];
        for (k, &i) in idx.iter().enumerate() {
            let s = assign[k] as usize;
            counts[s] += 1;
            for (acc, v) in sums[s].iter_mut().zip(&points[i]) {
                *acc += v;
            }
        }
        if counts[0] == 0 || counts[1] == 0 {
            return None;
        }
        for s in 0..2 {
            centers[s] = sums[s].iter().map(|v| v / counts[s] as f64).collect();
        }
    }
    let a: Vec<usize> = idx.iter().zip(&assign).filter(|(_, &s)| s == 0).map(|(&i, _)| i).collect();
    let b: Vec<usize> = idx.iter().zip(&assign).filter(|(_, &s)| s == 1).map(|(&i, _)| i).collect();
    if a.is_empty() || b.is_empty() {
        None
    } else {
        Some((a, b))
    }
}
