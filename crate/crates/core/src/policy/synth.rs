//! Programmatic candidate pools with a known reward ordering.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{pinyin_final, rhyme_family, Paragraph, FAMILIES};
use crate::{Error, Result};

use super::CandidatePool;

/// Builds Chinese candidate pools from a character bank grouped by rhyme
/// family.
///
/// One variant per pool is ideal: it reproduces the source line count and
/// per-line syllable budgets and ends every line in one rhyme family. The
/// other variants carry defects (wrong line count, syllable drift, broken
/// rhymes) that lower at least one automatic reward. Variant order is
/// shuffled.
#[derive(Clone, Debug)]
pub struct PoolGenerator {
    by_family: Vec<Vec<char>>,
    filler: Vec<char>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Defect {
    Rhythm,
    Rhyme,
    LineCount,
    Mixed,
}

impl Default for PoolGenerator {
    fn default() -> Self {
        Self::new()
    }
}

impl PoolGenerator {
    pub fn new() -> Self {
        let mut by_family = alloc::vec![Vec::new(); FAMILIES.len()];
        let mut filler = Vec::new();
        for &(c, py) in crate::corpus::pinyin::table() {
            let Some(fam) = pinyin_final(py).and_then(|f| rhyme_family(&f)) else {
                continue;
            };
            let idx = FAMILIES.iter().position(|f| *f == fam).expect("family listed");
            by_family[idx].push(c);
            filler.push(c);
        }
        PoolGenerator { by_family, filler }
    }

    fn line<R: Rng + ?Sized>(&self, len: usize, family: usize, rng: &mut R) -> String {
        let mut s = String::new();
        if len == 0 {
            return s;
        }
        for _ in 0..len - 1 {
            s.push(*self.filler.choose(rng).expect("non-empty bank"));
        }
        s.push(*self.by_family[family].choose(rng).expect("non-empty family"));
        s
    }

    fn other_family<R: Rng + ?Sized>(&self, not: usize, rng: &mut R) -> usize {
        let f = rng.gen_range(0..FAMILIES.len() - 1);
        if f >= not {
            f + 1
        } else {
            f
        }
    }

    fn render(lines: &[String], boundary: &str) -> String {
        lines.join(boundary)
    }

    /// Generates `n_variants` (at least 2) candidates for `source`.
    pub fn generate<R: Rng + ?Sized>(
        &self,
        source: &Paragraph,
        n_variants: usize,
        boundary: &str,
        rng: &mut R,
    ) -> Result<CandidatePool> {
        if n_variants < 2 {
            return Err(Error::PoolTooSmall(source.id.clone()));
        }
        let budgets: Vec<usize> = source.syllable_counts().iter().map(|&c| c as usize).collect();
        let family = rng.gen_range(0..FAMILIES.len());
        let ideal: Vec<String> = budgets.iter().map(|&b| self.line(b, family, rng)).collect();
        let mut variants = alloc::vec![Self::render(&ideal, boundary)];

        const KINDS: [Defect; 4] = [Defect::Rhythm, Defect::Rhyme, Defect::LineCount, Defect::Mixed];
        for j in 1..n_variants {
            let kind = KINDS[(j - 1) % KINDS.len()];
            let severity = 1 + (j - 1) / KINDS.len();
            let lines = self.defective(&budgets, family, kind, severity, rng);
            variants.push(Self::render(&lines, boundary));
        }
        variants.shuffle(rng);
        CandidatePool::new(source.id.clone(), variants)
    }

    fn defective<R: Rng + ?Sized>(
        &self,
        budgets: &[usize],
        family: usize,
        kind: Defect,
        severity: usize,
        rng: &mut R,
    ) -> Vec<String> {
        let n = budgets.len();
        let mut lens: Vec<usize> = budgets.to_vec();
        let mut fams: Vec<usize> = alloc::vec![family; n];
        let drift = |lens: &mut Vec<usize>, rng: &mut R| {
            let hit = rng.gen_range(0..n);
            for (i, l) in lens.iter_mut().enumerate() {
                if i == hit || rng.gen_bool(0.5) {
                    let d = severity + rng.gen_range(0..2);
                    *l = if *l > d && rng.gen_bool(0.5) { *l - d } else { *l + d };
                }
            }
        };
        let break_rhyme = |fams: &mut Vec<usize>, rng: &mut R| {
            if n < 2 {
                return;
            }
            // every other line leaves the family so adjacent pairs differ
            for i in (1..n).step_by(2) {
                fams[i] = self.other_family(family, rng);
            }
        };
        match kind {
            Defect::Rhythm => drift(&mut lens, rng),
            Defect::Rhyme => {
                if n < 2 {
                    drift(&mut lens, rng);
                }
                break_rhyme(&mut fams, rng)
            }
            Defect::LineCount => {
                if n > 1 && rng.gen_bool(0.5) {
                    lens.pop();
                    fams.pop();
                } else {
                    lens.push(budgets[n - 1].max(1));
                    fams.push(family);
                }
            }
            Defect::Mixed => {
                drift(&mut lens, rng);
                break_rhyme(&mut fams, rng);
            }
        }
        lens.iter()
            .zip(&fams)
            .map(|(&l, &f)| self.line(l, f, rng))
            .collect()
    }
}
