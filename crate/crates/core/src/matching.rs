//! Closed-set identification: gallery enrollment, probe ranking, CMC curves.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    /// `1 - cos(angle)`.
    Cosine,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

/// Enrolled reference codes. Several columns may share a label.
#[derive(Debug, Clone)]
pub struct Gallery<T: Scalar> {
    codes: FeatureMatrix<T>,
    labels: Vec<String>,
    metric: Metric,
    /// Distinct labels in order of first enrollment.
    distinct: Vec<String>,
    /// For each column, its index into `distinct`.
    slot: Vec<usize>,
    norms: Vec<T>,
}

fn check_labels(labels: &[String], count: usize, what: &str) -> Result<()> {
    if labels.len() != count {
        return Err(Error::Labels(format!(
            "{what}: {} labels for {count} samples",
            labels.len()
        )));
    }
    if let Some(i) = labels.iter().position(|l| l.is_empty()) {
        return Err(Error::Labels(format!("{what}: label {i} is empty")));
    }
    Ok(())
}

fn column_norms<T: Scalar>(m: &FeatureMatrix<T>) -> Vec<T> {
    m.as_matrix().column_iter().map(|c| c.norm()).collect()
}

/// Builds a gallery; with the cosine metric, zero-norm columns are rejected.
pub fn enroll<T: Scalar>(codes: FeatureMatrix<T>, labels: Vec<String>, metric: Metric) -> Result<Gallery<T>> {
    check_labels(&labels, codes.count(), "gallery")?;
    let norms = column_norms(&codes);
    if metric == Metric::Cosine {
        if let Some(column) = norms.iter().position(|n| *n == T::zero()) {
            return Err(Error::ZeroNorm { column });
        }
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut distinct = Vec::new();
    let mut slot = Vec::with_capacity(labels.len());
    for l in &labels {
        let next = distinct.len();
        let k = *index.entry(l.as_str()).or_insert_with(|| {
            distinct.push(l.clone());
            next
        });
        slot.push(k);
    }
    Ok(Gallery {
        codes,
        labels,
        metric,
        distinct,
        slot,
        norms,
    })
}

impl<T: Scalar> Gallery<T> {
    pub fn len(&self) -> usize {
        self.codes.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.codes.dim()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn distinct_labels(&self) -> &[String] {
        &self.distinct
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn codes(&self) -> &FeatureMatrix<T> {
        &self.codes
    }
}

/// Ranking of every enrolled label for one probe.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult<T> {
    pub probe_label: String,
    /// `(label, distance)` by ascending distance; ties keep enrollment order.
    pub ranking: Vec<(String, T)>,
    /// 1-based rank of the probe's own label, `None` if it is not enrolled.
    pub rank_of_true: Option<usize>,
}

impl<T: Scalar> MatchResult<T> {
    pub fn true_distance(&self) -> Option<T> {
        self.rank_of_true.map(|r| self.ranking[r - 1].1)
    }
}

/// Ranks every gallery label for each probe column.
///
/// A label's distance is the minimum over its enrolled columns.
pub fn identify<T: Scalar>(
    gallery: &Gallery<T>,
    probe_codes: &FeatureMatrix<T>,
    probe_labels: &[String],
) -> Result<Vec<MatchResult<T>>> {
    if probe_codes.dim() != gallery.dim() {
        return Err(Error::ShapeMismatch(format!(
            "probe codes have dimension {}, gallery has {}",
            probe_codes.dim(),
            gallery.dim()
        )));
    }
    check_labels(probe_labels, probe_codes.count(), "probes")?;
    let probe_norms = column_norms(probe_codes);
    if gallery.metric == Metric::Cosine {
        if let Some(column) = probe_norms.iter().position(|n| *n == T::zero()) {
            return Err(Error::ZeroNorm { column });
        }
    }

    let g = gallery.codes.as_matrix();
    let mut results = Vec::with_capacity(probe_codes.count());
    for (j, probe) in probe_codes.as_matrix().column_iter().enumerate() {
        let mut best = vec![T::infinity(); gallery.distinct.len()];
        for (c, col) in g.column_iter().enumerate() {
            let dist = match gallery.metric {
                Metric::Euclidean => (col - probe).norm(),
                Metric::Cosine => T::one() - col.dot(&probe) / (gallery.norms[c] * probe_norms[j]),
            };
            let k = gallery.slot[c];
            if dist < best[k] {
                best[k] = dist;
            }
        }
        let mut order: Vec<usize> = (0..best.len()).collect();
        order.sort_by(|&a, &b| best[a].partial_cmp(&best[b]).unwrap_or(std::cmp::Ordering::Equal));
        let truth = &probe_labels[j];
        let rank_of_true = order
            .iter()
            .position(|&k| &gallery.distinct[k] == truth)
            .map(|p| p + 1);
        results.push(MatchResult {
            probe_label: truth.clone(),
            ranking: order
                .into_iter()
                .map(|k| (gallery.distinct[k].clone(), best[k]))
                .collect(),
            rank_of_true,
        });
    }
    Ok(results)
}

/// Cumulative match characteristic.
#[derive(Debug, Clone, PartialEq)]
pub struct CmcCurve {
    /// `accuracies[k - 1]` is the rank-`k` identification rate.
    pub accuracies: Vec<f64>,
    pub n_probes: usize,
}

impl CmcCurve {
    /// Builds the curve from per-probe true ranks and the number of ranked labels.
    pub fn from_ranks(ranks: &[Option<usize>], n_labels: usize, max_rank: usize) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::EmptyResults);
        }
        if max_rank == 0 || max_rank > n_labels {
            return Err(Error::InvalidRank {
                rank: max_rank,
                reason: format!("must lie in 1..={n_labels}"),
            });
        }
        let mut hits = vec![0usize; max_rank + 1];
        for r in ranks.iter().flatten() {
            if *r <= max_rank {
                hits[*r] += 1;
            }
        }
        let n = ranks.len();
        let mut cumulative = 0usize;
        let accuracies = hits[1..]
            .iter()
            .map(|h| {
                cumulative += h;
                fraction(cumulative, n)
            })
            .collect();
        Ok(Self {
            accuracies,
            n_probes: n,
        })
    }

    pub fn max_rank(&self) -> usize {
        self.accuracies.len()
    }

    /// Rank-`k` rate; ranks beyond the curve report its last value.
    pub fn at(&self, k: usize) -> Option<f64> {
        if k == 0 {
            return None;
        }
        self.accuracies
            .get(k.min(self.accuracies.len()) - 1)
            .copied()
    }

    /// Writes `rank,accuracy` rows under a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e: csv::Error| Error::io("<cmc csv>", std::io::Error::other(e));
        w.write_record(["rank", "accuracy"]).map_err(wrap)?;
        for (k, a) in self.accuracies.iter().enumerate() {
            w.write_record([(k + 1).to_string(), a.to_string()]).map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::io("<cmc csv>", e))
    }
}

#[inline]
fn fraction(count: usize, n: usize) -> f64 {
    count as f64 / n as f64
}

fn label_count<T>(results: &[MatchResult<T>]) -> usize {
    results.iter().map(|r| r.ranking.len()).min().unwrap_or(0)
}

/// CMC up to `max_rank`, which may not exceed the number of enrolled labels.
pub fn cmc_compute<T: Scalar>(results: &[MatchResult<T>], max_rank: usize) -> Result<CmcCurve> {
    let ranks: Vec<Option<usize>> = results.iter().map(|r| r.rank_of_true).collect();
    CmcCurve::from_ranks(&ranks, label_count(results), max_rank)
}

/// Fraction of probes whose true label is ranked within the top `k`.
pub fn rank_k_accuracy<T: Scalar>(results: &[MatchResult<T>], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidRank {
            rank: 0,
            reason: "ranks start at 1".into(),
        });
    }
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let hits = results
        .iter()
        .filter(|r| r.rank_of_true.is_some_and(|t| t <= k))
        .count();
    Ok(fraction(hits, results.len()))
}

/// One row of a rankings file.
#[derive(Debug, Clone, PartialEq)]
pub struct RankRecord {
    pub probe_label: String,
    pub true_rank: Option<usize>,
    pub gallery_labels: usize,
}

pub const RANKINGS_HEADER: [&str; 7] = [
    "probe_index",
    "probe_label",
    "true_rank",
    "gallery_labels",
    "top_label",
    "top_distance",
    "true_distance",
];

/// Writes one row per probe. `true_rank` and `true_distance` are empty when
/// the probe's label is not enrolled.
pub fn write_rankings_csv<T: Scalar, W: Write>(results: &[MatchResult<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::io("<rankings csv>", std::io::Error::other(e));
    w.write_record(RANKINGS_HEADER).map_err(wrap)?;
    for (i, r) in results.iter().enumerate() {
        let (top_label, top_dist) = r
            .ranking
            .first()
            .map(|(l, d)| (l.clone(), d.as_f64().to_string()))
            .unwrap_or_default();
        w.write_record([
            i.to_string(),
            r.probe_label.clone(),
            r.rank_of_true.map(|k| k.to_string()).unwrap_or_default(),
            r.ranking.len().to_string(),
            top_label,
            top_dist,
            r.true_distance()
                .map(|d| d.as_f64().to_string())
                .unwrap_or_default(),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io("<rankings csv>", e))
}

/// Reads back the rank columns of a rankings file.
pub fn read_rankings_csv<R: BufRead>(input: R, origin: &std::path::Path) -> Result<Vec<RankRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header_err = |reason: String| Error::Header {
        path: origin.to_path_buf(),
        reason,
    };
    let headers = rdr.headers().map_err(|e| header_err(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| header_err(format!("missing column {name:?}")))
    };
    let (label_c, rank_c, count_c) = (col("probe_label")?, col("true_rank")?, col("gallery_labels")?);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| header_err(format!("row {row}: {e}")))?;
        let parse = |c: usize| -> Result<usize> {
            let tok = rec.get(c).unwrap_or("").trim();
            tok.parse().map_err(|_| Error::Parse {
                path: origin.to_path_buf(),
                row,
                col: c + 1,
                token: tok.to_string(),
            })
        };
        let true_rank = match rec.get(rank_c).map(str::trim) {
            None | Some("") => None,
            Some(_) => Some(parse(rank_c)?),
        };
        out.push(RankRecord {
            probe_label: rec.get(label_c).unwrap_or("").to_string(),
            true_rank,
            gallery_labels: parse(count_c)?,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput(origin.to_path_buf()));
    }
    Ok(out)
}
