use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::dataset::Dataset;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        class: u32,
    },
    /// Objects with `value <= threshold` go left.
    Split {
        attribute: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A binary classification tree stored as a flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Index of the leaf reached by an object whose attribute values are
    /// supplied by `value`.
    #[inline]
    pub fn leaf_by(&self, value: impl Fn(usize) -> f64) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Split {
                    attribute,
                    threshold,
                    left,
                    right,
                } => at = if value(attribute) <= threshold { left } else { right },
            }
        }
    }

    #[inline]
    pub fn predict_by(&self, value: impl Fn(usize) -> f64) -> u32 {
        match self.nodes[self.leaf_by(value)] {
            Node::Leaf { class } => class,
            Node::Split { .. } => unreachable!("leaf_by stops at leaves"),
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> u32 {
        self.predict_by(|j| row[j])
    }

    /// Prediction for object `i` of `data`.
    #[inline]
    pub fn predict_object(&self, data: &Dataset, i: usize) -> u32 {
        self.predict_by(|j| data.column(j)[i])
    }

    /// Sorted, deduplicated attributes appearing in any split.
    pub fn used_attributes(&self) -> Vec<usize> {
        let mut used: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { attribute, .. } => Some(*attribute),
                Node::Leaf { .. } => None,
            })
            .collect();
        used.sort_unstable();
        used.dedup();
        used
    }

    /// Appends the attributes tested on the path of an object to `out`.
    pub(crate) fn path_attributes(&self, value: impl Fn(usize) -> f64, out: &mut Vec<usize>) {
        let mut at = 0;
        while let Node::Split {
            attribute,
            threshold,
            left,
            right,
        } = self.nodes[at]
        {
            out.push(attribute);
            at = if value(attribute) <= threshold { left } else { right };
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Dense rank codes of every column, shared by all trees of one forest.
pub(crate) struct RankedColumns {
    ranks: Vec<Vec<u32>>,
    distinct: Vec<Vec<f64>>,
}

impl RankedColumns {
    pub(crate) fn new(data: &Dataset) -> Self {
        let (ranks, distinct) = data
            .columns()
            .par_iter()
            .map(|col| rank_column(col))
            .unzip();
        RankedColumns { ranks, distinct }
    }
}

fn rank_column(col: &[f64]) -> (Vec<u32>, Vec<f64>) {
    let mut order: Vec<u32> = (0..col.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
    let mut ranks = vec![0u32; col.len()];
    let mut distinct = Vec::new();
    for &i in &order {
        let v = col[i as usize];
        if distinct.last() != Some(&v) {
            distinct.push(v);
        }
        ranks[i as usize] = (distinct.len() - 1) as u32;
    }
    (ranks, distinct)
}

pub(crate) struct GrowParams {
    pub mtry: usize,
    pub min_node_size: usize,
    pub n_classes: usize,
}

struct Candidate {
    score: f64,
    attribute: usize,
    left_rank: u32,
    right_rank: u32,
}

struct Grower<'a> {
    cols: &'a RankedColumns,
    decision: &'a [u32],
    inbag: &'a [u32],
    params: &'a GrowParams,
    hist: Vec<u32>,
    keys: Vec<u64>,
}

/// Grows one fully determined tree on the bootstrap sample described by
/// `inbag` (per-object multiplicities).
pub(crate) fn grow_tree<R: Rng>(
    cols: &RankedColumns,
    decision: &[u32],
    inbag: &[u32],
    params: &GrowParams,
    rng: &mut R,
) -> Tree {
    let mut objects: Vec<u32> = (0..inbag.len() as u32)
        .filter(|&i| inbag[i as usize] > 0)
        .collect();
    let mut g = Grower {
        cols,
        decision,
        inbag,
        params,
        hist: Vec::new(),
        keys: Vec::new(),
    };
    let n_attributes = cols.ranks.len();
    let mut nodes = vec![Node::Leaf { class: 0 }];
    let mut stack = vec![(0usize, objects.len(), 0usize)];
    let mut counts = vec![0u32; params.n_classes];

    while let Some((start, end, at)) = stack.pop() {
        let objs = &mut objects[start..end];
        counts.iter_mut().for_each(|c| *c = 0);
        for &o in objs.iter() {
            counts[decision[o as usize] as usize] += inbag[o as usize];
        }
        let total: u32 = counts.iter().sum();
        let majority = majority_class(&counts);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || (total as usize) < 2 * params.min_node_size.max(1) {
            nodes[at] = Node::Leaf { class: majority };
            continue;
        }

        let parent_score = sum_sq(&counts) as f64 / total as f64;
        let mut best: Option<Candidate> = None;
        for attribute in index::sample(rng, n_attributes, params.mtry).into_iter() {
            if let Some((score, left_rank, right_rank)) =
                g.best_split_on(attribute, objs, &counts, total)
            {
                let better = match &best {
                    None => true,
                    Some(b) => score > b.score || (score == b.score && attribute < b.attribute),
                };
                if better {
                    best = Some(Candidate {
                        score,
                        attribute,
                        left_rank,
                        right_rank,
                    });
                }
            }
        }

        let Some(best) = best.filter(|b| b.score > parent_score * (1.0 + 1e-12)) else {
            nodes[at] = Node::Leaf { class: majority };
            continue;
        };

        let ranks = &cols.ranks[best.attribute];
        let mut split = 0;
        for k in 0..objs.len() {
            if ranks[objs[k] as usize] <= best.left_rank {
                objs.swap(k, split);
                split += 1;
            }
        }
        let distinct = &cols.distinct[best.attribute];
        let lo = distinct[best.left_rank as usize];
        let hi = distinct[best.right_rank as usize];
        let mut threshold = lo + (hi - lo) * 0.5;
        if !(threshold >= lo && threshold < hi) {
            threshold = lo;
        }
        let left = nodes.len();
        nodes.push(Node::Leaf { class: 0 });
        nodes.push(Node::Leaf { class: 0 });
        nodes[at] = Node::Split {
            attribute: best.attribute,
            threshold,
            left,
            right: left + 1,
        };
        stack.push((start + split, end, left + 1));
        stack.push((start, start + split, left));
    }
    Tree { nodes }
}

fn majority_class(counts: &[u32]) -> u32 {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best as u32
}

#[inline]
fn sum_sq(counts: &[u32]) -> u64 {
    counts.iter().map(|&c| c as u64 * c as u64).sum()
}

/// Class counts are held in fixed arrays of this many slots at most.
pub(crate) const MAX_CLASSES: usize = 64;

impl Grower<'_> {
    /// Best Gini split of `objs` on `attribute`, as (score, last rank going
    /// left, first rank going right). The score is the weighted sum of
    /// squared class proportions of the children; larger is purer. The
    /// lowest threshold wins among equal scores.
    fn best_split_on(
        &mut self,
        attribute: usize,
        objs: &[u32],
        parent: &[u32],
        total: u32,
    ) -> Option<(f64, u32, u32)> {
        match self.params.n_classes {
            0..=2 => self.scan::<2>(attribute, objs, parent, total),
            3 => self.scan::<3>(attribute, objs, parent, total),
            4 => self.scan::<4>(attribute, objs, parent, total),
            5..=8 => self.scan::<8>(attribute, objs, parent, total),
            9..=16 => self.scan::<16>(attribute, objs, parent, total),
            _ => self.scan::<MAX_CLASSES>(attribute, objs, parent, total),
        }
    }

    fn scan<const C: usize>(
        &mut self,
        attribute: usize,
        objs: &[u32],
        parent_counts: &[u32],
        total: u32,
    ) -> Option<(f64, u32, u32)> {
        let n_distinct = self.cols.distinct[attribute].len();
        if n_distinct < 2 {
            return None;
        }
        let ranks = &self.cols.ranks[attribute];
        let min = self.params.min_node_size.max(1) as u32;
        let mut parent = [0u32; C];
        parent[..parent_counts.len()].copy_from_slice(parent_counts);
        let mut left = [0u32; C];
        let mut n_left = 0u32;
        let mut prev: Option<u32> = None;
        let mut best: Option<(f64, u32, u32)> = None;

        let mut consider = |left: &[u32; C], n_left: u32, lo: u32, hi: u32| {
            let n_right = total - n_left;
            if n_left < min || n_right < min {
                return;
            }
            let mut sl = 0u64;
            let mut sr = 0u64;
            for c in 0..C {
                let l = left[c] as u64;
                let r = (parent[c] - left[c]) as u64;
                sl += l * l;
                sr += r * r;
            }
            let score = sl as f64 / n_left as f64 + sr as f64 / n_right as f64;
            if best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, lo, hi));
            }
        };

        let m = objs.len();
        let log_m = (usize::BITS - m.leading_zeros()) as usize;
        if n_distinct * C <= m * (log_m + 1) {
            let need = n_distinct * C;
            if self.hist.len() < need {
                self.hist.resize(need, 0);
            }
            let hist = &mut self.hist[..need];
            for &o in objs {
                let o = o as usize;
                hist[ranks[o] as usize * C + self.decision[o] as usize] += self.inbag[o];
            }
            for (r, row) in hist.chunks_exact_mut(C).enumerate() {
                let row_total: u32 = row.iter().sum();
                if row_total == 0 {
                    continue;
                }
                if let Some(p) = prev {
                    consider(&left, n_left, p, r as u32);
                }
                for c in 0..C {
                    left[c] += row[c];
                    row[c] = 0;
                }
                n_left += row_total;
                prev = Some(r as u32);
            }
        } else {
            // rank | class | bootstrap weight, so the scan needs no lookups
            self.keys.clear();
            self.keys.extend(objs.iter().map(|&o| {
                let o = o as usize;
                ((ranks[o] as u64) << 32) | ((self.decision[o] as u64) << 24) | self.inbag[o] as u64
            }));
            self.keys.sort_unstable();
            for &key in &self.keys {
                let r = (key >> 32) as u32;
                let class = ((key >> 24) & 0xFF) as usize;
                let w = (key & 0xFF_FFFF) as u32;
                if let Some(p) = prev {
                    if p != r {
                        consider(&left, n_left, p, r);
                    }
                }
                left[class] += w;
                n_left += w;
                prev = Some(r);
            }
        }
        best
    }
}
