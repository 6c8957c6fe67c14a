use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Word = Vec<u8>;

const ISOLATION_SCAN: usize = 1 << 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubshiftKind {
    /// Binary sequences whose 0-blocks between two 1s have even length.
    Even,
    /// All sequences over `{0,…,p−1}`.
    Full,
}

/// Admissible words of a one-sided subshift over `{0,…,p−1}`, up to `depth` letters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubshiftApprox {
    pub p: u32,
    pub depth: usize,
    pub kind: SubshiftKind,
}

pub fn build_even_subshift(p: u32, depth: usize) -> Result<SubshiftApprox> {
    if p < 2 || depth < 2 {
        return Err(Error::BadParams("need p ≥ 2 and depth ≥ 2".into()));
    }
    Ok(SubshiftApprox { p, depth, kind: SubshiftKind::Even })
}

pub fn build_full_shift(p: u32, depth: usize) -> Result<SubshiftApprox> {
    if p < 2 || depth < 1 {
        return Err(Error::BadParams("need p ≥ 2 and depth ≥ 1".into()));
    }
    Ok(SubshiftApprox { p, depth, kind: SubshiftKind::Full })
}

impl SubshiftApprox {
    pub fn letters(&self) -> u8 {
        match self.kind {
            SubshiftKind::Even => 2,
            SubshiftKind::Full => self.p as u8,
        }
    }

    /// Rule check, independent of `depth`.
    pub fn admissible(&self, word: &[u8]) -> bool {
        if word.iter().any(|&a| a >= self.letters()) {
            return false;
        }
        match self.kind {
            SubshiftKind::Full => true,
            SubshiftKind::Even => {
                let mut last_one: Option<usize> = None;
                for (i, &a) in word.iter().enumerate() {
                    if a == 1 {
                        if let Some(j) = last_one {
                            if (i - j - 1) % 2 == 1 {
                                return false;
                            }
                        }
                        last_one = Some(i);
                    }
                }
                true
            }
        }
    }

    /// One-letter extensions of an admissible word.
    pub fn followers(&self, word: &[u8]) -> Result<Vec<u8>> {
        if word.len() >= self.depth {
            return Err(Error::Exhausted(format!("words longer than {} letters needed", self.depth)));
        }
        let mut w = word.to_vec();
        w.push(0);
        let mut out = Vec::new();
        for a in 0..self.letters() {
            *w.last_mut().unwrap() = a;
            if self.admissible(&w) {
                out.push(a);
            }
        }
        Ok(out)
    }

    /// All admissible extensions of `words` to length `len`, sorted.
    pub fn extend_to(&self, words: &[Word], len: usize) -> Result<Vec<Word>> {
        let mut cur: Vec<Word> = words.to_vec();
        while cur.first().is_some_and(|w| w.len() < len) {
            let mut next = Vec::with_capacity(cur.len() * 2);
            for w in &cur {
                for a in self.followers(w)? {
                    let mut v = w.clone();
                    v.push(a);
                    next.push(v);
                }
            }
            cur = next;
        }
        cur.sort_unstable();
        Ok(cur)
    }

    /// Admissible words of length `len`, lexicographically sorted.
    pub fn words(&self, len: usize) -> Result<Vec<Word>> {
        self.extend_to(&[Vec::new()], len)
    }

    /// Follower table for every admissible word shorter than `depth`.
    pub fn follower_table(&self) -> Result<Vec<(Word, Vec<u8>)>> {
        let mut out = Vec::new();
        for len in 0..self.depth {
            for w in self.words(len)? {
                let f = self.followers(&w)?;
                out.push((w, f));
            }
        }
        Ok(out)
    }

    /// A word with a single admissible extension two letters further on, if
    /// any. Lengths are scanned while the word list stays small.
    pub fn isolated_witness(&self) -> Result<Option<Word>> {
        for len in 0..self.depth.saturating_sub(1) {
            let words = self.words(len)?;
            if words.len() > ISOLATION_SCAN {
                break;
            }
            for w in words {
                if self.extend_to(std::slice::from_ref(&w), len + 2)?.len() < 2 {
                    return Ok(Some(w));
                }
            }
        }
        Ok(None)
    }
}
