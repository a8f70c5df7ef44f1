//! Feature-space evaluation: cosine retrieval with recall@k, plus a
//! confusion matrix for classification reporting.
//!
//! The retrieval protocol ranks a gallery by cosine similarity to each
//! query; a retrieval at depth k counts as correct if any of the top k
//! gallery items shares the query's label.

use crate::error::{Error, Result};

/// A feature vector with its category label.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: usize,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, label: usize) -> Self {
        FeatureVector { values, label }
    }
}

/// `dot(u,v) / (|u| |v|)`; rejects zero-norm inputs.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "cosine of {}- and {}-dimensional vectors",
            u.len(),
            v.len()
        )));
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.iter().zip(v.iter()) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(dot / (nu.sqrt() * nv.sqrt()))
}

/// For each query, the indices of the `k` most cosine-similar gallery
/// vectors, best first. Exact similarity ties rank the lower index first.
///
/// When `exclude_self_index` is set, gallery position `i` is skipped for
/// query `i` — for the case where queries and gallery are the same set.
/// The default protocol keeps the two sets disjoint and passes `false`.
pub fn topk_retrieval(
    queries: &[FeatureVector],
    gallery: &[FeatureVector],
    k: usize,
    exclude_self_index: bool,
) -> Result<Vec<Vec<usize>>> {
    if gallery.is_empty() {
        return Err(Error::EmptyGallery);
    }
    let effective = gallery.len() - usize::from(exclude_self_index);
    if k == 0 || k > effective {
        return Err(Error::DimensionMismatch(format!(
            "k = {k} outside 1..={effective} for a {}-item gallery",
            gallery.len()
        )));
    }
    let mut results = Vec::with_capacity(queries.len());
    for (qi, q) in queries.iter().enumerate() {
        let mut scored = Vec::with_capacity(gallery.len());
        for (gi, g) in gallery.iter().enumerate() {
            if exclude_self_index && gi == qi {
                continue;
            }
            scored.push((cosine_similarity(&q.values, &g.values)?, gi));
        }
        // Highest similarity first; equal similarities keep index order.
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        results.push(scored.into_iter().take(k).map(|(_, gi)| gi).collect());
    }
    Ok(results)
}

/// Fraction of queries whose top-`k` retrieved items include at least one
/// gallery item with the query's label.
pub fn recall_at_k(
    retrievals: &[Vec<usize>],
    query_labels: &[usize],
    gallery_labels: &[usize],
    k: usize,
) -> Result<f64> {
    if retrievals.len() != query_labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} retrieval lists for {} query labels",
            retrievals.len(),
            query_labels.len()
        )));
    }
    if retrievals.is_empty() {
        return Err(Error::DimensionMismatch("no queries to score".into()));
    }
    let mut hits = 0usize;
    for (list, &label) in retrievals.iter().zip(query_labels.iter()) {
        if k > list.len() {
            return Err(Error::DimensionMismatch(format!(
                "k = {k} exceeds retrieval depth {}",
                list.len()
            )));
        }
        if list[..k].iter().any(|&gi| gallery_labels[gi] == label) {
            hits += 1;
        }
    }
    Ok(hits as f64 / retrievals.len() as f64)
}

/// Row-major square matrix; `matrix[true][predicted]` counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub n_classes: usize,
    pub counts: Vec<usize>,
}

impl ConfusionMatrix {
    pub fn get(&self, true_class: usize, predicted: usize) -> usize {
        self.counts[true_class * self.n_classes + predicted]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

pub fn confusion_matrix(
    predictions: &[usize],
    labels: &[usize],
    n_classes: usize,
) -> Result<ConfusionMatrix> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut counts = vec![0usize; n_classes * n_classes];
    for (&p, &y) in predictions.iter().zip(labels.iter()) {
        if p >= n_classes || y >= n_classes {
            return Err(Error::DimensionMismatch(format!(
                "class ({y}, {p}) out of range for {n_classes} classes"
            )));
        }
        counts[y * n_classes + p] += 1;
    }
    Ok(ConfusionMatrix { n_classes, counts })
}

/// Trace over total count.
pub fn accuracy(matrix: &ConfusionMatrix) -> f64 {
    let correct: usize = (0..matrix.n_classes).map(|i| matrix.get(i, i)).sum();
    let total = matrix.total();
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}
