use serde::{Deserialize, Serialize};

use super::subshift::{SubshiftApprox, Word};
use crate::error::{Error, Result};
use crate::padic::{pow_u64, NormValue, PAdic};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    /// `p` contiguous blocks of near-equal size.
    Balanced,
    /// The `p − 1` smallest words alone, the rest in the last block.
    SingletonFirst,
}

#[derive(Clone, Debug)]
struct Node {
    /// Admissible words of one length whose cylinders make up this ball.
    words: Vec<Word>,
    /// `words` extended until there are at least `p` of them (internal nodes).
    split: Vec<Word>,
    /// Block `j` of `split` is `split[bounds[j]..bounds[j + 1]]`.
    bounds: Vec<usize>,
    children: Vec<usize>,
}

/// Finite-depth homeomorphism `w` from a subshift onto `ℤ_p`: cylinders to balls.
#[derive(Clone, Debug)]
pub struct CantorChart {
    pub subshift: SubshiftApprox,
    pub depth: usize,
    pub rule: SplitRule,
    nodes: Vec<Node>,
    /// `levels[d][i]` is the node of the ball `i + p^d ℤ_p`.
    levels: Vec<Vec<usize>>,
}

fn blocks(n: usize, p: usize, rule: SplitRule) -> Vec<usize> {
    match rule {
        SplitRule::Balanced => (0..=p).map(|j| j * n / p).collect(),
        SplitRule::SingletonFirst => (0..p).chain(std::iter::once(n)).collect(),
    }
}

pub fn build_cantor_chart(x: &SubshiftApprox, depth: usize, rule: SplitRule) -> Result<CantorChart> {
    if let Some(w) = x.isolated_witness()? {
        return Err(Error::IsolatedPoint(format!("cylinder {w:?} has a single deep extension")));
    }
    let p = x.p as usize;
    let mut nodes = vec![Node { words: vec![Vec::new()], split: Vec::new(), bounds: Vec::new(), children: Vec::new() }];
    let mut levels = vec![vec![0usize]];
    for d in 0..depth {
        let mut next = vec![usize::MAX; levels[d].len() * p];
        for (i, &id) in levels[d].iter().enumerate() {
            let mut split = nodes[id].words.clone();
            let mut len = split[0].len();
            while split.len() < p {
                len += 1;
                split = x.extend_to(&split, len).map_err(|_| {
                    Error::Exhausted(format!("level {d} needs words longer than {} letters", x.depth))
                })?;
            }
            let bounds = blocks(split.len(), p, rule);
            let mut children = Vec::with_capacity(p);
            for j in 0..p {
                let cid = nodes.len();
                nodes.push(Node {
                    words: split[bounds[j]..bounds[j + 1]].to_vec(),
                    split: Vec::new(),
                    bounds: Vec::new(),
                    children: Vec::new(),
                });
                next[i + j * levels[d].len()] = cid;
                children.push(cid);
            }
            let node = &mut nodes[id];
            node.split = split;
            node.bounds = bounds;
            node.children = children;
        }
        levels.push(next);
    }
    Ok(CantorChart { subshift: x.clone(), depth, rule, nodes, levels })
}

impl CantorChart {
    pub fn p(&self) -> u32 {
        self.subshift.p
    }

    /// Block of `split` holding `word` (a word of the split length).
    fn block_of(&self, id: usize, word: &[u8]) -> Option<usize> {
        let node = &self.nodes[id];
        let pos = node.split.binary_search_by(|w| w.as_slice().cmp(word)).ok()?;
        Some(node.bounds.partition_point(|&b| b <= pos) - 1)
    }

    /// Cylinder words of the ball `index + p^level ℤ_p` (the backward table).
    pub fn words_of(&self, level: usize, index: u64) -> &[Word] {
        &self.nodes[self.levels[level][index as usize]].words
    }

    /// Word length used to split the balls of `level`, its largest value over the level.
    pub fn split_len(&self, level: usize) -> usize {
        self.levels[level].iter().map(|&id| self.nodes[id].split[0].len()).max().unwrap_or(0)
    }

    /// Digits of `w(ξ)` for a sequence given by a long enough prefix (the forward table).
    pub fn encode(&self, seq: &[u8], digits: usize) -> Result<PAdic> {
        let mut id = self.levels[0][0];
        let mut out = Vec::with_capacity(digits);
        while out.len() < digits.min(self.depth) {
            let m = self.nodes[id].split[0].len();
            if seq.len() < m {
                return Err(Error::DepthInsufficient(format!("sequence prefix shorter than {m} letters")));
            }
            let j = self
                .block_of(id, &seq[..m])
                .ok_or_else(|| Error::BadParams(format!("{:?} is not admissible", &seq[..m])))?;
            out.push(j as u32);
            id = self.nodes[id].children[j];
        }
        PAdic::from_digits(self.p(), 0, &out)
    }

    /// Ball containing `Sⁿ(⋃ cyl(u))`, by descent from the root. Each `u` is
    /// extended in its own context before its first `n` letters are dropped;
    /// `ctx_words` keeps the extensions for later calls.
    fn descend(&self, ctx_words: &mut Vec<Word>, n: usize) -> Result<Vec<u32>> {
        let mut id = self.levels[0][0];
        let mut out = Vec::new();
        while out.len() < self.depth {
            let m = self.nodes[id].split[0].len();
            if ctx_words[0].len() < m + n {
                *ctx_words = self.subshift.extend_to(ctx_words, m + n)?;
            }
            let mut block = None;
            for u in ctx_words.iter() {
                let j = self.block_of(id, &u[n..n + m]);
                if j.is_none() || (block.is_some() && block != j) {
                    return Ok(out);
                }
                block = j;
            }
            let j = block.expect("nonempty word set");
            out.push(j as u32);
            id = self.nodes[id].children[j];
        }
        Ok(out)
    }

    fn ball(&self, digits: &[u32]) -> Result<PAdic> {
        if digits.is_empty() {
            return Ok(PAdic::zero(self.p(), 0));
        }
        PAdic::from_digits(self.p(), 0, digits)
    }

    fn leaf_words(&self, x: &PAdic) -> Result<Vec<Word>> {
        let level = (x.prec().max(0) as usize).min(self.depth);
        let index = x.index_padded(0, level as i32).ok_or_else(|| Error::WindowViolation(x.to_string()))?;
        Ok(self.words_of(level, index).to_vec())
    }

    /// Smallest balls containing `sⁿ(B)` for `n = 1..=steps`, where `B` is the
    /// ball given by `x`. Iterating [`CantorChart::shift_image`] instead loses
    /// digits at every step.
    pub fn orbit_balls(&self, x: &PAdic, steps: usize) -> Result<Vec<PAdic>> {
        let mut words = self.leaf_words(x)?;
        (1..=steps).map(|n| self.ball(&self.descend(&mut words, n)?)).collect()
    }

    /// Distance from `target` to `Sⁿ(⋃ cyl(u))`: the descent follows the
    /// target's digits while some word still agrees with them. Extensions are
    /// pruned letter by letter against the target's block.
    fn set_distance(&self, words: &[Word], n: usize, target: &PAdic) -> Result<NormValue> {
        let mut id = self.levels[0][0];
        let mut live: Vec<Word> = words.to_vec();
        for level in 0..self.depth {
            let Some(t) = target.digit(level as i32) else { break };
            let node = &self.nodes[id];
            let m = node.split[0].len();
            let block = &node.split[node.bounds[t as usize]..node.bounds[t as usize + 1]];
            let fits = |u: &Word| {
                let part = &u[n.min(u.len())..(n + m).min(u.len())];
                let i = block.partition_point(|w| w.as_slice() < part);
                i < block.len() && block[i].starts_with(part)
            };
            live.retain(fits);
            while !live.is_empty() && live[0].len() < m + n {
                let len = live[0].len() + 1;
                live = self.subshift.extend_to(&live, len)?;
                live.retain(fits);
            }
            if live.is_empty() {
                return Ok(NormValue::Pow(level as i32));
            }
            id = node.children[t as usize];
        }
        Ok(NormValue::Zero)
    }

    /// `‖targets[k−1] − s^k(B)‖` for `k = 1..=targets.len()`, distances to the
    /// image sets of the whole ball `B` given by `x`.
    pub fn orbit_distances(&self, x: &PAdic, targets: &[PAdic]) -> Result<Vec<NormValue>> {
        let words = self.leaf_words(x)?;
        targets.iter().enumerate().map(|(k, t)| self.set_distance(&words, k + 1, t)).collect()
    }

    /// `s = w∘S∘w⁻¹` on the ball given by `x`, known to the digits that the
    /// shifted ball determines.
    pub fn shift_image(&self, x: &PAdic) -> Result<PAdic> {
        let mut words = self.leaf_words(x)?;
        self.ball(&self.descend(&mut words, 1)?)
    }

    /// Ball reached by the single cylinder `word`.
    pub fn ball_of(&self, word: &[u8]) -> Result<PAdic> {
        self.ball(&self.descend(&mut vec![word.to_vec()], 0)?)
    }

    /// Every child's words extend words of its parent; blocks are nonempty.
    pub fn refinement_ok(&self) -> bool {
        self.nodes.iter().all(|n| {
            n.children.iter().all(|&c| {
                let cw = &self.nodes[c].words;
                !cw.is_empty()
                    && cw.iter().all(|w| n.words.iter().any(|u| w.starts_with(u) || u.starts_with(w)))
            })
        })
    }

    pub fn level_size(&self, level: usize) -> u64 {
        pow_u64(self.p(), level as u32)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::subshift::{build_even_subshift, build_full_shift};

    #[test]
    fn full_shift_chart_is_identity() {
        let x = build_full_shift(3, 8).unwrap();
        let chart = build_cantor_chart(&x, 5, SplitRule::Balanced).unwrap();
        for w in x.words(5).unwrap() {
            let ball = chart.ball_of(&w).unwrap();
            let digits: Vec<u8> = (0..5).map(|i| ball.digit(i).unwrap() as u8).collect();
            assert_eq!(digits, w);
        }
        let x0 = PAdic::from_digits(3, 0, &[2, 1, 0, 2, 2]).unwrap();
        let s = chart.shift_image(&x0).unwrap();
        assert_eq!(s, PAdic::from_digits(3, 0, &[1, 0, 2, 2]).unwrap());
    }

    #[test]
    fn even_chart_round_trip() {
        let x = build_even_subshift(2, 40).unwrap();
        let chart = build_cantor_chart(&x, 8, SplitRule::Balanced).unwrap();
        assert!(chart.refinement_ok());
        for i in 0..chart.level_size(6) {
            for w in chart.words_of(6, i) {
                let ball = chart.ball_of(w).unwrap();
                assert!(ball.prec() >= 6);
                assert_eq!(ball.index_padded(0, 6), Some(i));
            }
        }
    }
}
