//! Multi-platform ranking with the Analytic Hierarchy Process.
//!
//! Priorities come from row geometric means of reciprocal comparison
//! matrices; platform scores are the criteria-weighted sums of the
//! per-criterion platform priorities. The consistency check uses the
//! principal eigenvalue and is advisory only.

use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for `a[i][j] * a[j][i] == 1`.
pub const RECIPROCITY_TOLERANCE: f64 = 1e-12;
/// Tolerance for priority weights summing to one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;
/// `lambda_max - n` at or below this (relative to n) counts as perfectly consistent.
const CONSISTENT_EPS: f64 = 1e-10;

const SCALE_LABELS: [&str; 9] = [
    "equally preferred",
    "equally to moderately preferred",
    "moderately preferred",
    "moderately to strongly preferred",
    "strongly preferred",
    "strongly to very strongly preferred",
    "very strongly preferred",
    "very strongly to extremely preferred",
    "extremely preferred",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// X over Y: the rating itself.
    Forward,
    /// Y over X: the reciprocal.
    Reverse,
}

/// A value on the 1..9 judgment scale or its reciprocal (17 values in total).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Judgment {
    intensity: u8,
    reciprocal: bool,
}

impl Judgment {
    pub const EQUAL: Judgment = Judgment {
        intensity: 1,
        reciprocal: false,
    };

    pub fn new(intensity: u8, direction: Direction) -> Result<Self, AhpError> {
        if !(1..=9).contains(&intensity) {
            return Err(AhpError::OffScale(intensity as f64));
        }
        Ok(Judgment {
            intensity,
            reciprocal: direction == Direction::Reverse && intensity != 1,
        })
    }

    /// Snaps a number to the scale, rejecting anything that is not one of
    /// the 17 admissible values (relative tolerance 1e-6).
    pub fn from_value(value: f64) -> Result<Self, AhpError> {
        if !value.is_finite() || value <= 0.0 {
            return Err(AhpError::OffScale(value));
        }
        let (magnitude, direction) = if value >= 1.0 {
            (value, Direction::Forward)
        } else {
            (1.0 / value, Direction::Reverse)
        };
        let k = magnitude.round();
        if !(1.0..=9.0).contains(&k) || (magnitude - k).abs() > 1e-6 * k {
            return Err(AhpError::OffScale(value));
        }
        Judgment::new(k as u8, direction)
    }

    pub fn all() -> impl Iterator<Item = Judgment> {
        (2..=9u8)
            .rev()
            .map(|k| Judgment {
                intensity: k,
                reciprocal: true,
            })
            .chain((1..=9u8).map(|k| Judgment {
                intensity: k,
                reciprocal: false,
            }))
    }

    pub fn intensity(self) -> u8 {
        self.intensity
    }

    pub fn direction(self) -> Direction {
        if self.reciprocal {
            Direction::Reverse
        } else {
            Direction::Forward
        }
    }

    pub fn value(self) -> f64 {
        if self.reciprocal {
            1.0 / self.intensity as f64
        } else {
            self.intensity as f64
        }
    }

    pub fn reversed(self) -> Judgment {
        Judgment {
            intensity: self.intensity,
            reciprocal: !self.reciprocal && self.intensity != 1,
        }
    }

    /// Qualitative phrase for the judgment's intensity.
    pub fn label(self) -> &'static str {
        SCALE_LABELS[(self.intensity - 1) as usize]
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reciprocal {
            write!(f, "1/{}", self.intensity)
        } else {
            write!(f, "{}", self.intensity)
        }
    }
}

impl std::str::FromStr for Judgment {
    type Err = AhpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let off = || AhpError::OffScale(f64::NAN);
        match s.split_once('/') {
            Some((num, den)) => {
                let num: f64 = num.trim().parse().map_err(|_| off())?;
                let den: f64 = den.trim().parse().map_err(|_| off())?;
                Judgment::from_value(num / den)
            }
            None => Judgment::from_value(s.parse().map_err(|_| off())?),
        }
    }
}

impl Serialize for Judgment {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Judgment {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) => Judgment::from_value(v),
            Repr::Text(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Maps a qualitative phrase ("strongly preferred", or the full
/// "X is strongly preferred over Y") to its numeric judgment.
pub fn scale_from_label(label: &str, direction: Direction) -> Result<Judgment, AhpError> {
    let mut phrase = label.trim().to_ascii_lowercase();
    if let Some(rest) = phrase.strip_prefix("x is ") {
        phrase = rest.to_string();
    }
    for suffix in [" over y", " to y"] {
        if let Some(rest) = phrase.strip_suffix(suffix) {
            phrase = rest.to_string();
        }
    }
    let index = SCALE_LABELS
        .iter()
        .position(|l| *l == phrase)
        .ok_or_else(|| AhpError::UnknownLabel(label.to_string()))?;
    Judgment::new(index as u8 + 1, direction)
}

/// One pairwise comparison: how strongly item `i` is preferred over item `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseJudgment {
    pub i: String,
    pub j: String,
    pub value: Judgment,
}

impl PairwiseJudgment {
    pub fn new(i: impl Into<String>, j: impl Into<String>, value: Judgment) -> Self {
        PairwiseJudgment {
            i: i.into(),
            j: j.into(),
            value,
        }
    }
}

/// A problem with a judgment set, named by item ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "issue", rename_all = "kebab-case")]
pub enum JudgmentIssue {
    MissingPair { a: String, b: String },
    DuplicatePair { a: String, b: String },
    ConflictingPair {
        a: String,
        b: String,
        first: f64,
        second: f64,
    },
    UnknownItem { id: String },
    SelfComparison { id: String },
}

impl fmt::Display for JudgmentIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JudgmentIssue::MissingPair { a, b } => write!(f, "missing judgment for pair ({a}, {b})"),
            JudgmentIssue::DuplicatePair { a, b } => {
                write!(f, "duplicate judgment for pair ({a}, {b})")
            }
            JudgmentIssue::ConflictingPair {
                a,
                b,
                first,
                second,
            } => write!(
                f,
                "conflicting judgments for pair ({a}, {b}): {first} vs {second}"
            ),
            JudgmentIssue::UnknownItem { id } => write!(f, "unknown item {id:?}"),
            JudgmentIssue::SelfComparison { id } => write!(f, "item {id:?} compared with itself"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AhpError {
    #[error("value {0} is not on the 1/9..9 judgment scale")]
    OffScale(f64),
    #[error("unknown judgment phrase {0:?}")]
    UnknownLabel(String),
    #[error("comparison matrix needs at least one item")]
    Empty,
    #[error("item id list has a duplicate or empty id {0:?}")]
    BadItemId(String),
    #[error("matrix shape does not match {n} item ids")]
    Shape { n: usize },
    #[error("entry ({row}, {col}) = {value} is not a positive finite number")]
    NonPositive { row: String, col: String, value: f64 },
    #[error("diagonal entry for {id:?} is {value}, expected 1")]
    Diagonal { id: String, value: f64 },
    #[error("entries ({row}, {col}) and ({col}, {row}) are not reciprocal (product {product})")]
    NotReciprocal {
        row: String,
        col: String,
        product: f64,
    },
    #[error("{}", issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Judgments { issues: Vec<JudgmentIssue> },
    #[error("weights must be positive and sum to 1 (sum {sum})")]
    NotNormalized { sum: f64 },
    #[error("no platform comparison matrix for criterion {0:?}")]
    MissingCriterionMatrix(String),
    #[error("platform comparison matrix for {0:?}, which is not a compared criterion")]
    UnexpectedCriterionMatrix(String),
    #[error("criterion {criterion:?} compares platforms {found:?}, expected {expected:?}")]
    PlatformMismatch {
        criterion: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Positive reciprocal pairwise-judgment matrix over an ordered list of items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct ComparisonMatrix {
    item_ids: Vec<String>,
    entries: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawMatrix {
    item_ids: Vec<String>,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<RawMatrix> for ComparisonMatrix {
    type Error = AhpError;

    fn try_from(raw: RawMatrix) -> Result<Self, Self::Error> {
        ComparisonMatrix::from_rows(raw.item_ids, raw.entries)
    }
}

fn check_ids(ids: &[String]) -> Result<(), AhpError> {
    if ids.is_empty() {
        return Err(AhpError::Empty);
    }
    let mut seen = HashSet::new();
    for id in ids {
        if id.trim().is_empty() || !seen.insert(id.as_str()) {
            return Err(AhpError::BadItemId(id.clone()));
        }
    }
    Ok(())
}

impl ComparisonMatrix {
    /// Validates a full matrix given row by row.
    pub fn from_rows(
        item_ids: Vec<String>,
        entries: Vec<Vec<f64>>,
    ) -> Result<Self, AhpError> {
        check_ids(&item_ids)?;
        let n = item_ids.len();
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(AhpError::Shape { n });
        }
        for (i, row) in entries.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v > 0.0) {
                    return Err(AhpError::NonPositive {
                        row: item_ids[i].clone(),
                        col: item_ids[j].clone(),
                        value: v,
                    });
                }
            }
            if row[i] != 1.0 {
                return Err(AhpError::Diagonal {
                    id: item_ids[i].clone(),
                    value: row[i],
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let product = entries[i][j] * entries[j][i];
                if (product - 1.0).abs() > RECIPROCITY_TOLERANCE {
                    return Err(AhpError::NotReciprocal {
                        row: item_ids[j].clone(),
                        col: item_ids[i].clone(),
                        product,
                    });
                }
            }
        }
        Ok(ComparisonMatrix { item_ids, entries })
    }

    /// All-ones matrix (every pair judged equal).
    pub fn indifferent(item_ids: Vec<String>) -> Result<Self, AhpError> {
        let n = item_ids.len();
        ComparisonMatrix::from_rows(item_ids, vec![vec![1.0; n]; n])
    }

    pub fn n(&self) -> usize {
        self.item_ids.len()
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    fn to_dmatrix(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| self.entries[i][j])
    }
}

/// Builds a reciprocal matrix from exactly one judgment per unordered pair.
/// Every problem with the judgment set is reported, not just the first.
pub fn build_matrix(
    item_ids: &[String],
    judgments: &[PairwiseJudgment],
) -> Result<ComparisonMatrix, AhpError> {
    check_ids(item_ids)?;
    let n = item_ids.len();
    let index: HashMap<&str, usize> = item_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let mut issues = Vec::new();
    // value oriented from lower to higher index
    let mut given: HashMap<(usize, usize), f64> = HashMap::new();
    let mut reported: HashSet<(usize, usize)> = HashSet::new();
    for jd in judgments {
        let (Some(&a), Some(&b)) = (index.get(jd.i.as_str()), index.get(jd.j.as_str())) else {
            for id in [&jd.i, &jd.j] {
                if !index.contains_key(id.as_str()) {
                    issues.push(JudgmentIssue::UnknownItem { id: id.clone() });
                }
            }
            continue;
        };
        if a == b {
            issues.push(JudgmentIssue::SelfComparison { id: jd.i.clone() });
            continue;
        }
        let (key, value) = if a < b {
            ((a, b), jd.value.value())
        } else {
            ((b, a), jd.value.reversed().value())
        };
        match given.get(&key) {
            None => {
                given.insert(key, value);
            }
            Some(&first) => {
                if !reported.insert(key) {
                    continue;
                }
                let (ia, ib) = (item_ids[key.0].clone(), item_ids[key.1].clone());
                if first == value {
                    issues.push(JudgmentIssue::DuplicatePair { a: ia, b: ib });
                } else {
                    issues.push(JudgmentIssue::ConflictingPair {
                        a: ia,
                        b: ib,
                        first,
                        second: value,
                    });
                }
            }
        }
    }

    let mut entries = vec![vec![1.0; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            match given.get(&(a, b)) {
                Some(&v) => {
                    entries[a][b] = v;
                    entries[b][a] = 1.0 / v;
                }
                None => issues.push(JudgmentIssue::MissingPair {
                    a: item_ids[a].clone(),
                    b: item_ids[b].clone(),
                }),
            }
        }
    }

    if !issues.is_empty() {
        return Err(AhpError::Judgments { issues });
    }
    ComparisonMatrix::from_rows(item_ids.to_vec(), entries)
}

/// Normalized weight vector over an ordered list of items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorityVector {
    pub item_ids: Vec<String>,
    pub weights: Vec<f64>,
}

impl PriorityVector {
    pub fn new(item_ids: Vec<String>, weights: Vec<f64>) -> Result<Self, AhpError> {
        if item_ids.len() != weights.len() {
            return Err(AhpError::Dimension(format!(
                "{} ids for {} weights",
                item_ids.len(),
                weights.len()
            )));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0))
            || (sum - 1.0).abs() > NORMALIZATION_TOLERANCE
        {
            return Err(AhpError::NotNormalized { sum });
        }
        Ok(PriorityVector { item_ids, weights })
    }

    pub fn weight(&self, id: &str) -> Option<f64> {
        self.item_ids
            .iter()
            .position(|x| x == id)
            .map(|i| self.weights[i])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Row geometric means, normalized to sum to one.
pub fn priority_vector(matrix: &ComparisonMatrix) -> PriorityVector {
    let n = matrix.n() as f64;
    // log domain keeps long products of large/small ratios in range
    let log_means: Vec<f64> = matrix
        .entries
        .iter()
        .map(|row| row.iter().map(|v| v.ln()).sum::<f64>() / n)
        .collect();
    let shift = log_means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let means: Vec<f64> = log_means.iter().map(|l| (l - shift).exp()).collect();
    let total: f64 = means.iter().sum();
    PriorityVector {
        item_ids: matrix.item_ids.clone(),
        weights: means.into_iter().map(|m| m / total).collect(),
    }
}

/// Random consistency index table and flagging threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyConfig {
    pub threshold: f64,
    /// `random_index[n - 1]` is RI(n); the last entry is reused for larger n.
    pub random_index: Vec<f64>,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        ConsistencyConfig {
            threshold: 0.10,
            random_index: vec![0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49],
        }
    }
}

impl ConsistencyConfig {
    pub fn random_index(&self, n: usize) -> f64 {
        self.random_index
            .get(n.saturating_sub(1))
            .or(self.random_index.last())
            .copied()
            .unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub n: usize,
    pub lambda_max: f64,
    pub ci: f64,
    pub cr: f64,
    pub flagged: bool,
}

/// Principal eigenvalue of a positive matrix, from the real Schur form.
fn principal_eigenvalue(matrix: &ComparisonMatrix) -> f64 {
    let n = matrix.n();
    let schur = nalgebra::linalg::Schur::try_new(matrix.to_dmatrix(), 1e-15, 10_000);
    match schur {
        Some(schur) => schur
            .complex_eigenvalues()
            .iter()
            .map(|c| c.re)
            .fold(f64::NEG_INFINITY, f64::max),
        // Fallback: Perron root estimate from the geometric-mean vector.
        None => {
            let w = priority_vector(matrix).weights;
            (0..n)
                .map(|i| (0..n).map(|j| matrix.entries[i][j] * w[j]).sum::<f64>() / w[i])
                .sum::<f64>()
                / n as f64
        }
    }
}

/// Consistency index and ratio of a reciprocal matrix.
pub fn consistency(matrix: &ComparisonMatrix, config: &ConsistencyConfig) -> ConsistencyReport {
    let n = matrix.n();
    if n <= 2 {
        return ConsistencyReport {
            n,
            lambda_max: n as f64,
            ci: 0.0,
            cr: 0.0,
            flagged: false,
        };
    }
    let nf = n as f64;
    let lambda_max = principal_eigenvalue(matrix);
    let excess = lambda_max - nf;
    let ci = if excess <= CONSISTENT_EPS * nf {
        0.0
    } else {
        excess / (nf - 1.0)
    };
    let ri = config.random_index(n);
    let cr = if ri > 0.0 { ci / ri } else { 0.0 };
    ConsistencyReport {
        n,
        lambda_max,
        ci,
        cr,
        flagged: cr > config.threshold,
    }
}

/// Composite score of every alternative: `sum_c alternative_weights[c][i] * criteria_weights[c]`.
///
/// Works on plain slices so that rounded, not-quite-normalized published
/// values can be fed through the same arithmetic.
pub fn composite_weights(
    criteria_weights: &[f64],
    alternative_weights: &[Vec<f64>],
) -> Result<Vec<f64>, AhpError> {
    if criteria_weights.len() != alternative_weights.len() {
        return Err(AhpError::Dimension(format!(
            "{} criteria weights for {} alternative weight vectors",
            criteria_weights.len(),
            alternative_weights.len()
        )));
    }
    let m = alternative_weights.first().map_or(0, Vec::len);
    if alternative_weights.iter().any(|w| w.len() != m) {
        return Err(AhpError::Dimension(
            "alternative weight vectors differ in length".into(),
        ));
    }
    Ok((0..m)
        .map(|i| {
            criteria_weights
                .iter()
                .zip(alternative_weights)
                .map(|(cw, aw)| aw[i] * cw)
                .sum()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPlatform {
    pub platform: String,
    pub composite_weight: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingResult {
    pub criteria_priorities: PriorityVector,
    pub platform_priorities: IndexMap<String, PriorityVector>,
    pub composite: PriorityVector,
    /// Platforms by descending composite weight.
    pub ranking: Vec<RankedPlatform>,
    pub consistency: IndexMap<String, ConsistencyReport>,
    pub warnings: Vec<String>,
}

impl RankingResult {
    pub fn criteria(&self) -> &[String] {
        &self.criteria_priorities.item_ids
    }

    pub fn platforms(&self) -> &[String] {
        &self.composite.item_ids
    }
}

/// Key of the criteria matrix in [`RankingResult::consistency`].
pub const CRITERIA_MATRIX_KEY: &str = "criteria";

/// Key of a per-criterion platform matrix in [`RankingResult::consistency`].
pub fn platform_matrix_key(criterion_id: &str) -> String {
    format!("platforms/{criterion_id}")
}

pub fn rank_platforms(
    criteria_matrix: &ComparisonMatrix,
    platform_matrices: &IndexMap<String, ComparisonMatrix>,
    config: &ConsistencyConfig,
) -> Result<RankingResult, AhpError> {
    for key in platform_matrices.keys() {
        if !criteria_matrix.item_ids.contains(key) {
            return Err(AhpError::UnexpectedCriterionMatrix(key.clone()));
        }
    }
    let mut ordered = Vec::with_capacity(criteria_matrix.n());
    for c in &criteria_matrix.item_ids {
        let m = platform_matrices
            .get(c)
            .ok_or_else(|| AhpError::MissingCriterionMatrix(c.clone()))?;
        ordered.push((c, m));
    }
    let platforms = ordered[0].1.item_ids.clone();
    for (c, m) in &ordered {
        if m.item_ids != platforms {
            return Err(AhpError::PlatformMismatch {
                criterion: (*c).clone(),
                expected: platforms.clone(),
                found: m.item_ids.clone(),
            });
        }
    }

    let criteria_priorities = priority_vector(criteria_matrix);
    let mut consistency_reports = IndexMap::new();
    consistency_reports.insert(
        CRITERIA_MATRIX_KEY.to_string(),
        consistency(criteria_matrix, config),
    );
    let mut platform_priorities = IndexMap::new();
    for (c, m) in &ordered {
        platform_priorities.insert((*c).clone(), priority_vector(m));
        consistency_reports.insert(platform_matrix_key(c), consistency(m, config));
    }

    let per_criterion: Vec<Vec<f64>> = platform_priorities
        .values()
        .map(|pv: &PriorityVector| pv.weights.clone())
        .collect();
    let composite_values = composite_weights(&criteria_priorities.weights, &per_criterion)?;
    let composite = PriorityVector::new(platforms.clone(), composite_values)?;

    let mut order: Vec<usize> = (0..platforms.len()).collect();
    order.sort_by(|&a, &b| {
        composite.weights[b]
            .partial_cmp(&composite.weights[a])
            .expect("finite weights")
            .then(a.cmp(&b))
    });
    let mut ranking: Vec<RankedPlatform> = Vec::with_capacity(order.len());
    for (pos, &i) in order.iter().enumerate() {
        let w = composite.weights[i];
        let rank = match ranking.last() {
            Some(prev) if prev.composite_weight == w => prev.rank,
            _ => pos + 1,
        };
        ranking.push(RankedPlatform {
            platform: platforms[i].clone(),
            composite_weight: w,
            rank,
        });
    }

    let warnings = consistency_reports
        .iter()
        .filter(|(_, r)| r.flagged)
        .map(|(k, r)| {
            format!(
                "matrix {k}: consistency ratio {:.4} exceeds {:.2}",
                r.cr, config.threshold
            )
        })
        .collect();

    Ok(RankingResult {
        criteria_priorities,
        platform_priorities,
        composite,
        ranking,
        consistency: consistency_reports,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KiviatPoint {
    pub criterion: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KiviatSeries {
    pub platform: String,
    pub points: Vec<KiviatPoint>,
}

/// Radar-chart data: one axis per criterion, one series per platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KiviatChart {
    pub axes: Vec<String>,
    pub series: Vec<KiviatSeries>,
}

pub fn kiviat_series(result: &RankingResult) -> KiviatChart {
    let axes = result.criteria().to_vec();
    let series = result
        .platforms()
        .iter()
        .enumerate()
        .map(|(pi, platform)| KiviatSeries {
            platform: platform.clone(),
            points: axes
                .iter()
                .map(|c| KiviatPoint {
                    criterion: c.clone(),
                    weight: result.platform_priorities[c].weights[pi],
                })
                .collect(),
        })
        .collect();
    KiviatChart { axes, series }
}

/// The ranking input document: ids plus judgment sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub criteria: Vec<String>,
    pub criteria_judgments: Vec<PairwiseJudgment>,
    pub platforms: Vec<String>,
    pub platform_judgments: IndexMap<String, Vec<PairwiseJudgment>>,
}

/// A problem with one matrix of a ranking input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixIssue {
    pub matrix: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub issues: Vec<JudgmentIssue>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid ranking input: {}", .issues.iter().map(|i| format!("[{}] {}", i.matrix, i.message)).collect::<Vec<_>>().join("; "))]
pub struct RankingInputError {
    pub issues: Vec<MatrixIssue>,
}

impl RankingInput {
    fn matrix_issue(matrix: String, err: AhpError) -> MatrixIssue {
        let issues = match &err {
            AhpError::Judgments { issues } => issues.clone(),
            _ => Vec::new(),
        };
        MatrixIssue {
            matrix,
            message: err.to_string(),
            issues,
        }
    }

    /// Builds every matrix, collecting problems across all of them, then ranks.
    pub fn evaluate(&self, config: &ConsistencyConfig) -> Result<RankingResult, RankingInputError> {
        let mut issues = Vec::new();
        let criteria_matrix = build_matrix(&self.criteria, &self.criteria_judgments)
            .map_err(|e| issues.push(Self::matrix_issue(CRITERIA_MATRIX_KEY.into(), e)))
            .ok();
        let mut platform_matrices = IndexMap::new();
        for c in &self.criteria {
            let key = platform_matrix_key(c);
            match self.platform_judgments.get(c) {
                None => issues.push(Self::matrix_issue(
                    key,
                    AhpError::MissingCriterionMatrix(c.clone()),
                )),
                Some(judgments) => match build_matrix(&self.platforms, judgments) {
                    Ok(m) => {
                        platform_matrices.insert(c.clone(), m);
                    }
                    Err(e) => issues.push(Self::matrix_issue(key, e)),
                },
            }
        }
        for c in self.platform_judgments.keys() {
            if !self.criteria.contains(c) {
                issues.push(Self::matrix_issue(
                    platform_matrix_key(c),
                    AhpError::UnexpectedCriterionMatrix(c.clone()),
                ));
            }
        }
        match criteria_matrix {
            Some(cm) if issues.is_empty() => rank_platforms(&cm, &platform_matrices, config)
                .map_err(|e| RankingInputError {
                    issues: vec![Self::matrix_issue("ranking".into(), e)],
                }),
            _ => Err(RankingInputError { issues }),
        }
    }
}
