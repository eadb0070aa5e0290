//! Global summaries of per-sample attributions: which features matter
//! most, and in which direction they push the prediction.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::shap::AttributionMatrix;

/// One feature's aggregate attribution behaviour across the explained
/// samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSummary {
    pub name: String,
    /// 1-based position after sorting by `mean_abs_shap` descending;
    /// ties keep the original feature order.
    pub rank: usize,
    pub mean_abs_shap: f64,
    /// Pearson correlation between feature value and SHAP value, the
    /// direction a beeswarm plot would show. 0.0 when undefined.
    pub correlation: f64,
    pub correlation_sign: i8,
    /// False when either the feature or its attributions have zero
    /// variance, which leaves the correlation undefined.
    pub correlation_defined: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryReport {
    /// Sorted by rank.
    pub features: Vec<FeatureSummary>,
}

impl SummaryReport {
    /// Plain-text ranked table.
    pub fn to_table(&self) -> String {
        let name_width = self
            .features
            .iter()
            .map(|f| f.name.len())
            .chain(core::iter::once("feature".len()))
            .max()
            .unwrap_or(0);
        let mut out = alloc::format!(
            "{:>4}  {:<name_width$}  {:>13}  {:>6}\n",
            "rank",
            "feature",
            "mean |SHAP|",
            "sign"
        );
        for f in &self.features {
            let sign = match (f.correlation_defined, f.correlation_sign) {
                (false, _) => "n/a",
                (true, s) if s > 0 => "+",
                (true, s) if s < 0 => "-",
                _ => "0",
            };
            out.push_str(&alloc::format!(
                "{:>4}  {:<name_width$}  {:>13.6e}  {:>6}\n",
                f.rank,
                f.name,
                f.mean_abs_shap,
                sign
            ));
        }
        out
    }
}

/// Ranks features by mean absolute SHAP value and reads off the
/// direction of each feature's effect via the correlation between its
/// values and its attributions. `features` is row-major with one row
/// per attributed sample.
pub fn summarize_attributions(
    attr: &AttributionMatrix,
    features: &[f64],
) -> Result<SummaryReport> {
    let p = attr.n_features();
    let n = attr.n_samples();
    if n == 0 {
        return Err(Error::EmptyInput("no attributed samples to summarize".into()));
    }
    if features.len() != n * p {
        return Err(Error::Validation(alloc::format!(
            "feature matrix holds {} values, attributions imply {n} x {p}",
            features.len()
        )));
    }

    let mut summaries = Vec::with_capacity(p);
    for j in 0..p {
        let mut mean_abs = 0.0;
        for i in 0..n {
            mean_abs += crate::fx::abs(attr.row(i)[j]);
        }
        mean_abs /= n as f64;
        let (correlation, defined) =
            pearson((0..n).map(|i| features[i * p + j]), (0..n).map(|i| attr.row(i)[j]), n);
        let sign = if !defined || correlation == 0.0 {
            0
        } else if correlation > 0.0 {
            1
        } else {
            -1
        };
        summaries.push(FeatureSummary {
            name: attr.feature_names[j].clone(),
            rank: 0,
            mean_abs_shap: mean_abs,
            correlation,
            correlation_sign: sign,
            correlation_defined: defined,
        });
    }

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        summaries[b]
            .mean_abs_shap
            .partial_cmp(&summaries[a].mean_abs_shap)
            .expect("mean absolute attributions are finite")
            .then(a.cmp(&b))
    });
    let mut features_out: Vec<FeatureSummary> = Vec::with_capacity(p);
    for (rank, &j) in order.iter().enumerate() {
        let mut s = summaries[j].clone();
        s.rank = rank + 1;
        features_out.push(s);
    }
    Ok(SummaryReport { features: features_out })
}

fn pearson(
    xs: impl Iterator<Item = f64>,
    ys: impl Iterator<Item = f64>,
    n: usize,
) -> (f64, bool) {
    let mut sx = 0.0;
    let mut sy = 0.0;
    let pairs: Vec<(f64, f64)> = xs.zip(ys).collect();
    for &(x, y) in &pairs {
        sx += x;
        sy += y;
    }
    let mx = sx / n as f64;
    let my = sy / n as f64;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for &(x, y) in &pairs {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return (0.0, false);
    }
    (cov / crate::fx::sqrt(vx * vy), true)
}
