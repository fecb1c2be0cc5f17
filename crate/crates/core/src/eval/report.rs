use serde::{Deserialize, Serialize};

/// The `k` values reported as Hits@k.
pub const HITS_AT: [usize; 3] = [1, 3, 10];

/// Aggregate ranking metrics.
///
/// For link prediction every rank has equal weight. For multi-hop queries the
/// ranks of one query's answers are averaged first (see
/// [`RankingReport::from_groups`]), and `n` counts queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub mrr: f64,
    pub h1: f64,
    pub h3: f64,
    pub h10: f64,
    pub n: usize,
    #[serde(skip)]
    pub per_triple_ranks: Vec<usize>,
}

impl RankingReport {
    pub fn from_ranks(ranks: Vec<usize>) -> Self {
        let n = ranks.len();
        let mut report = Self::from_groups(ranks.iter().map(std::slice::from_ref));
        report.n = n;
        report.per_triple_ranks = ranks;
        report
    }

    /// Averages each group's reciprocal ranks and hit indicators, then
    /// averages over groups.
    pub fn from_groups<'a, I>(groups: I) -> Self
    where
        I: IntoIterator<Item = &'a [usize]>,
    {
        let (mut mrr, mut hits) = (0.0, [0.0; 3]);
        let mut n = 0usize;
        let mut all = Vec::new();
        for g in groups {
            if g.is_empty() {
                continue;
            }
            let len = g.len() as f64;
            mrr += g.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / len;
            for (h, k) in hits.iter_mut().zip(HITS_AT) {
                *h += g.iter().filter(|&&r| r <= k).count() as f64 / len;
            }
            all.extend_from_slice(g);
            n += 1;
        }
        let denom = n.max(1) as f64;
        Self {
            mrr: mrr / denom,
            h1: hits[0] / denom,
            h3: hits[1] / denom,
            h10: hits[2] / denom,
            n,
            per_triple_ranks: all,
        }
    }

    pub fn hits(&self, k: usize) -> Option<f64> {
        match k {
            1 => Some(self.h1),
            3 => Some(self.h3),
            10 => Some(self.h10),
            _ => None,
        }
    }

    /// `{"mrr":…,"h1":…,"h3":…,"h10":…,"n":…}`
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}
