//! Single-platform assessment: Likert responses per leading question and
//! per assessor, aggregated into criterion and layer scores.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, Layer};

/// One point on the seven-point satisfaction scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct LikertRating(u8);

impl LikertRating {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 7;

    pub const LABELS: [&'static str; 7] = [
        "not at all addressed",
        "partially addressed",
        "somewhat addressed",
        "neutral",
        "mostly addressed",
        "considerably addressed",
        "completely addressed",
    ];

    pub fn new(value: i64) -> Result<Self, AssessmentError> {
        if (Self::MIN as i64..=Self::MAX as i64).contains(&value) {
            Ok(LikertRating(value as u8))
        } else {
            Err(AssessmentError::RatingOutOfRange(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn label(self) -> &'static str {
        Self::LABELS[(self.0 - 1) as usize]
    }

    /// Looks a rating up by its label (case-insensitive).
    pub fn from_label(label: &str) -> Option<Self> {
        let label = label.trim().to_ascii_lowercase();
        Self::LABELS
            .iter()
            .position(|l| *l == label)
            .map(|i| LikertRating(i as u8 + 1))
    }
}

impl TryFrom<i64> for LikertRating {
    type Error = AssessmentError;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        LikertRating::new(value)
    }
}

impl From<LikertRating> for u8 {
    fn from(r: LikertRating) -> u8 {
        r.0
    }
}

impl fmt::Display for LikertRating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.0, self.label())
    }
}

/// Maps a raw score on the 1..=7 scale onto [0, 1].
pub fn normalize(raw: f64) -> f64 {
    (raw - 1.0) / 6.0
}

/// Inverse of [`normalize`].
pub fn denormalize(normalized: f64) -> f64 {
    normalized * 6.0 + 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub assessor_id: String,
    pub question_id: String,
    pub rating: LikertRating,
    pub recorded_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub id: String,
    pub label: String,
    pub taken_at: DateTime<Utc>,
    pub responses: Vec<Response>,
}

/// How the votes of several assessors on one question are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConsensusRule {
    /// Median; the mean of the two central values for an even count.
    #[default]
    Median,
    Mean,
}

impl ConsensusRule {
    /// Aggregates ratings; `None` when there are none.
    pub fn aggregate(self, ratings: &[LikertRating]) -> Option<f64> {
        if ratings.is_empty() {
            return None;
        }
        match self {
            ConsensusRule::Mean => Some(mean(ratings.iter().map(|r| r.value() as f64))),
            ConsensusRule::Median => {
                let mut v: Vec<u8> = ratings.iter().map(|r| r.value()).collect();
                v.sort_unstable();
                let mid = v.len() / 2;
                if v.len() % 2 == 1 {
                    Some(v[mid] as f64)
                } else {
                    Some((v[mid - 1] as f64 + v[mid] as f64) / 2.0)
                }
            }
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssessmentError {
    #[error("unknown criterion id {0:?}")]
    UnknownCriterion(String),
    #[error("at least one criterion must be selected")]
    EmptySelection,
    #[error("rating {0} is outside the 1..=7 scale")]
    RatingOutOfRange(i64),
    #[error("unknown question id {0:?}")]
    UnknownQuestion(String),
    #[error("question {question:?} belongs to criterion {criterion:?}, which is not selected")]
    QuestionNotInScope { question: String, criterion: String },
    #[error("criterion {0:?} is not selected in this project")]
    CriterionNotSelected(String),
    #[error("criterion {0:?} still has recorded responses and cannot be deselected")]
    CriterionHasResponses(String),
    #[error("assessor id must not be empty")]
    EmptyAssessor,
}

/// A named, versioned evaluation of one platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentProject {
    pub id: String,
    pub name: String,
    pub platform_name: String,
    #[serde(default)]
    pub platform_description: String,
    pub selected_criteria: BTreeSet<String>,
    #[serde(default)]
    pub consensus: ConsensusRule,
    #[serde(default)]
    responses: Vec<Response>,
    #[serde(default)]
    snapshots: Vec<Snapshot>,
    version: u64,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

/// Fields of a project that may be edited after creation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectUpdate {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub platform_name: Option<String>,
    #[serde(default)]
    pub platform_description: Option<String>,
    #[serde(default)]
    pub selected_criteria: Option<BTreeSet<String>>,
    #[serde(default)]
    pub consensus: Option<ConsensusRule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionScore {
    pub criterion_id: String,
    /// Mean consensus over answered questions, on the 1..=7 scale.
    pub raw: Option<f64>,
    /// `(raw - 1) / 6`.
    pub normalized: Option<f64>,
    /// Fraction of the criterion's questions with at least one response.
    pub coverage: f64,
    pub answered: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerScore {
    pub raw: f64,
    pub score: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatisfactionReport {
    pub project_id: String,
    pub project_version: u64,
    pub criteria: Vec<CriterionScore>,
    pub layers: BTreeMap<Layer, LayerScore>,
    /// Time of the project state the report reflects.
    pub generated_at: DateTime<Utc>,
}

impl AssessmentProject {
    pub fn create(
        catalog: &Catalog,
        id: impl Into<String>,
        name: impl Into<String>,
        platform_name: impl Into<String>,
        platform_description: impl Into<String>,
        selected_criteria: impl IntoIterator<Item = impl Into<String>>,
        at: DateTime<Utc>,
    ) -> Result<Self, AssessmentError> {
        let selected: BTreeSet<String> = selected_criteria.into_iter().map(Into::into).collect();
        check_selection(catalog, &selected)?;
        Ok(AssessmentProject {
            id: id.into(),
            name: name.into(),
            platform_name: platform_name.into(),
            platform_description: platform_description.into(),
            selected_criteria: selected,
            consensus: ConsensusRule::default(),
            responses: Vec::new(),
            snapshots: Vec::new(),
            version: 1,
            created_at: at,
            updated_at: at,
        })
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn responses(&self) -> &[Response] {
        &self.responses
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn snapshot_by_id(&self, id: &str) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.id == id)
    }

    fn touch(&mut self, at: DateTime<Utc>) {
        self.version += 1;
        self.updated_at = at;
    }

    /// Checks the invariants a deserialized project must satisfy against `catalog`.
    pub fn validate(&self, catalog: &Catalog) -> Result<(), AssessmentError> {
        check_selection(catalog, &self.selected_criteria)?;
        for r in &self.responses {
            self.question_scope(catalog, &r.question_id)?;
        }
        Ok(())
    }

    fn question_scope(&self, catalog: &Catalog, question_id: &str) -> Result<(), AssessmentError> {
        let (criterion, _) = catalog
            .question(question_id)
            .ok_or_else(|| AssessmentError::UnknownQuestion(question_id.to_string()))?;
        if !self.selected_criteria.contains(&criterion.id) {
            return Err(AssessmentError::QuestionNotInScope {
                question: question_id.to_string(),
                criterion: criterion.id.clone(),
            });
        }
        Ok(())
    }

    /// Stores a rating, replacing an earlier one by the same assessor on the
    /// same question.
    pub fn record_response(
        &mut self,
        catalog: &Catalog,
        assessor_id: &str,
        question_id: &str,
        value: i64,
        at: DateTime<Utc>,
    ) -> Result<LikertRating, AssessmentError> {
        let rating = LikertRating::new(value)?;
        if assessor_id.trim().is_empty() {
            return Err(AssessmentError::EmptyAssessor);
        }
        self.question_scope(catalog, question_id)?;
        let response = Response {
            assessor_id: assessor_id.to_string(),
            question_id: question_id.to_string(),
            rating,
            recorded_at: at,
        };
        let key = |r: &Response| (r.question_id.clone(), r.assessor_id.clone());
        match self
            .responses
            .binary_search_by_key(&key(&response), key)
        {
            Ok(i) => self.responses[i] = response,
            Err(i) => self.responses.insert(i, response),
        }
        self.touch(at);
        Ok(rating)
    }

    /// Applies an edit of the descriptive fields or the criteria selection.
    pub fn update(
        &mut self,
        catalog: &Catalog,
        update: ProjectUpdate,
        at: DateTime<Utc>,
    ) -> Result<(), AssessmentError> {
        if let Some(selected) = &update.selected_criteria {
            check_selection(catalog, selected)?;
            for r in &self.responses {
                if let Some((c, _)) = catalog.question(&r.question_id) {
                    if !selected.contains(&c.id) {
                        return Err(AssessmentError::CriterionHasResponses(c.id.clone()));
                    }
                }
            }
        }
        if let Some(v) = update.name {
            self.name = v;
        }
        if let Some(v) = update.platform_name {
            self.platform_name = v;
        }
        if let Some(v) = update.platform_description {
            self.platform_description = v;
        }
        if let Some(v) = update.selected_criteria {
            self.selected_criteria = v;
        }
        if let Some(v) = update.consensus {
            self.consensus = v;
        }
        self.touch(at);
        Ok(())
    }

    /// Freezes the current responses. Returns the new snapshot's id.
    pub fn snapshot(&mut self, label: impl Into<String>, at: DateTime<Utc>) -> String {
        let id = format!("snapshot-{}", self.snapshots.len() + 1);
        self.snapshots.push(Snapshot {
            id: id.clone(),
            label: label.into(),
            taken_at: at,
            responses: self.responses.clone(),
        });
        self.touch(at);
        id
    }

    fn ratings_for(&self, question_id: &str) -> Vec<LikertRating> {
        self.responses
            .iter()
            .filter(|r| r.question_id == question_id)
            .map(|r| r.rating)
            .collect()
    }

    /// Aggregate vote of all assessors on one question, on the 1..=7 scale.
    pub fn question_consensus(&self, question_id: &str) -> Option<f64> {
        self.consensus.aggregate(&self.ratings_for(question_id))
    }

    pub fn criterion_score(
        &self,
        catalog: &Catalog,
        criterion_id: &str,
    ) -> Result<CriterionScore, AssessmentError> {
        if !self.selected_criteria.contains(criterion_id) {
            return Err(AssessmentError::CriterionNotSelected(
                criterion_id.to_string(),
            ));
        }
        let criterion = catalog
            .criterion(criterion_id)
            .ok_or_else(|| AssessmentError::UnknownCriterion(criterion_id.to_string()))?;
        let consensus: Vec<f64> = criterion
            .questions
            .iter()
            .filter_map(|q| self.question_consensus(&q.id))
            .collect();
        let total = criterion.questions.len();
        let answered = consensus.len();
        let raw = (answered > 0).then(|| mean(consensus.into_iter()));
        Ok(CriterionScore {
            criterion_id: criterion_id.to_string(),
            raw,
            normalized: raw.map(normalize),
            coverage: if total == 0 {
                0.0
            } else {
                answered as f64 / total as f64
            },
            answered,
            total,
        })
    }

    /// Per-layer mean consensus over answered questions marked applicable to
    /// that layer. Layers without such questions are omitted.
    pub fn layer_rollup(&self, catalog: &Catalog) -> BTreeMap<Layer, LayerScore> {
        let mut acc: BTreeMap<Layer, (f64, usize, usize)> = BTreeMap::new();
        for criterion in catalog
            .criteria()
            .iter()
            .filter(|c| self.selected_criteria.contains(&c.id))
        {
            for q in &criterion.questions {
                let consensus = self.question_consensus(&q.id);
                for &layer in &q.applicable_layers {
                    let e = acc.entry(layer).or_insert((0.0, 0, 0));
                    e.2 += 1;
                    if let Some(c) = consensus {
                        e.0 += c;
                        e.1 += 1;
                    }
                }
            }
        }
        acc.into_iter()
            .filter(|(_, (_, answered, _))| *answered > 0)
            .map(|(layer, (sum, answered, total))| {
                let raw = sum / answered as f64;
                (
                    layer,
                    LayerScore {
                        raw,
                        score: normalize(raw),
                        coverage: answered as f64 / total as f64,
                    },
                )
            })
            .collect()
    }

    /// Criterion scores (catalog order, answered criteria only) plus the layer rollup.
    pub fn satisfaction_report(&self, catalog: &Catalog) -> SatisfactionReport {
        let criteria = catalog
            .criteria()
            .iter()
            .filter(|c| self.selected_criteria.contains(&c.id))
            .filter_map(|c| self.criterion_score(catalog, &c.id).ok())
            .filter(|s| s.raw.is_some())
            .collect();
        SatisfactionReport {
            project_id: self.id.clone(),
            project_version: self.version,
            criteria,
            layers: self.layer_rollup(catalog),
            generated_at: self.updated_at,
        }
    }
}

fn check_selection(catalog: &Catalog, selected: &BTreeSet<String>) -> Result<(), AssessmentError> {
    if selected.is_empty() {
        return Err(AssessmentError::EmptySelection);
    }
    if let Some(unknown) = selected.iter().find(|id| catalog.criterion(id).is_none()) {
        return Err(AssessmentError::UnknownCriterion(unknown.clone()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn t(secs: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(1_700_000_000 + secs, 0).unwrap()
    }

    fn project(cat: &Catalog, selected: &[&str]) -> AssessmentProject {
        AssessmentProject::create(cat, "p1", "ROSE eval", "ROSE", "", selected.iter().copied(), t(0))
            .unwrap()
    }

    fn r(v: i64) -> LikertRating {
        LikertRating::new(v).unwrap()
    }

    #[test]
    fn labels_follow_values() {
        assert_eq!(r(1).label(), "not at all addressed");
        assert_eq!(r(4).label(), "neutral");
        assert_eq!(r(5).label(), "mostly addressed");
        assert_eq!(r(7).label(), "completely addressed");
        assert_eq!(LikertRating::from_label("Mostly addressed"), Some(r(5)));
        assert!(LikertRating::new(0).is_err());
        assert!(LikertRating::new(8).is_err());
    }

    #[test]
    fn consensus_rules() {
        let med = ConsensusRule::Median;
        assert_eq!(med.aggregate(&[r(3), r(5)]), Some(4.0));
        assert_eq!(med.aggregate(&[r(6)]), Some(6.0));
        assert_eq!(med.aggregate(&[r(2), r(2), r(7)]), Some(2.0));
        assert_eq!(med.aggregate(&[r(1), r(2)]), Some(1.5));
        assert_eq!(med.aggregate(&[]), None);
        assert_eq!(ConsensusRule::Mean.aggregate(&[r(2), r(2), r(7)]), Some(11.0 / 3.0));
    }

    #[test]
    fn create_rejects_bad_selection() {
        let cat = Catalog::bundled();
        let all: Vec<&str> = cat.criteria().iter().map(|c| c.id.as_str()).collect();
        assert_eq!(project(&cat, &all).selected_criteria.len(), 27);
        assert_eq!(
            AssessmentProject::create(&cat, "p", "n", "x", "", ["security", "no-such"], t(0))
                .unwrap_err(),
            AssessmentError::UnknownCriterion("no-such".into())
        );
        assert_eq!(
            AssessmentProject::create(&cat, "p", "n", "x", "", Vec::<String>::new(), t(0))
                .unwrap_err(),
            AssessmentError::EmptySelection
        );
    }

    #[test]
    fn record_replaces_and_bumps_version() {
        let cat = Catalog::bundled();
        let mut p = project(&cat, &["resource-discovery", "data-accumulation"]);
        assert_eq!(p.version(), 1);
        let rating = p
            .record_response(&cat, "a1", "resource-discovery-q1", 5, t(1))
            .unwrap();
        assert_eq!(rating.label(), "mostly addressed");
        let rating = p
            .record_response(&cat, "a1", "data-accumulation-q1", 7, t(2))
            .unwrap();
        assert_eq!(rating.label(), "completely addressed");
        p.record_response(&cat, "a1", "resource-discovery-q1", 3, t(3))
            .unwrap();
        assert_eq!(p.responses().len(), 2);
        assert_eq!(p.question_consensus("resource-discovery-q1"), Some(3.0));
        assert_eq!(p.version(), 4);
        assert_eq!(p.updated_at, t(3));
    }

    #[test]
    fn record_errors_leave_project_untouched() {
        let cat = Catalog::bundled();
        let mut p = project(&cat, &["resource-discovery"]);
        let before = p.clone();
        assert_eq!(
            p.record_response(&cat, "a1", "resource-discovery-q1", 0, t(1)),
            Err(AssessmentError::RatingOutOfRange(0))
        );
        assert!(matches!(
            p.record_response(&cat, "a1", "security-q1", 4, t(1)),
            Err(AssessmentError::QuestionNotInScope { .. })
        ));
        assert!(matches!(
            p.record_response(&cat, "a1", "nope-q1", 4, t(1)),
            Err(AssessmentError::UnknownQuestion(_))
        ));
        assert_eq!(p, before);
    }

    #[test]
    fn criterion_scores() {
        let cat = Catalog::bundled();
        let mut p = project(&cat, &["privacy", "security"]);
        p.record_response(&cat, "a1", "privacy-q1", 4, t(1)).unwrap();
        p.record_response(&cat, "a1", "privacy-q2", 6, t(1)).unwrap();
        let s = p.criterion_score(&cat, "privacy").unwrap();
        assert_eq!(s.raw, Some(5.0));
        assert!((s.normalized.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.coverage, 1.0);

        let s = p.criterion_score(&cat, "security").unwrap();
        assert_eq!(s.raw, None);
        assert_eq!(s.coverage, 0.0);

        assert_eq!(
            p.criterion_score(&cat, "usability"),
            Err(AssessmentError::CriterionNotSelected("usability".into()))
        );
    }

    #[test]
    fn layer_rollup_only_data_storing() {
        let cat = Catalog::bundled();
        let mut p = project(&cat, &["data-storing", "data-visualization"]);
        assert!(p.layer_rollup(&cat).is_empty());
        p.record_response(&cat, "a1", "data-storing-q1", 7, t(1)).unwrap();
        let rollup = p.layer_rollup(&cat);
        assert_eq!(rollup.keys().copied().collect::<Vec<_>>(), vec![Layer::DL]);
        assert_eq!(rollup[&Layer::DL].score, 1.0);
    }

    #[test]
    fn layer_rollup_security_pl() {
        let cat = Catalog::bundled();
        let mut p = project(&cat, &["security"]);
        // q3 (discoverability levels) and q5 (access control lists) are PL-only
        p.record_response(&cat, "a1", "security-q3", 4, t(1)).unwrap();
        p.record_response(&cat, "a1", "security-q5", 6, t(1)).unwrap();
        let rollup = p.layer_rollup(&cat);
        assert_eq!(rollup.len(), 1);
        assert_eq!(rollup[&Layer::PL].raw, 5.0);
        assert!((rollup[&Layer::PL].coverage - 2.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn snapshots_are_frozen() {
        let cat = Catalog::bundled();
        let mut p = project(&cat, &["security"]);
        let empty = p.snapshot("empty", t(1));
        assert!(p.snapshot_by_id(&empty).unwrap().responses.is_empty());

        p.record_response(&cat, "a1", "security-q1", 4, t(2)).unwrap();
        let report_before = p.satisfaction_report(&cat);
        let s1 = p.snapshot("first", t(3));
        let s2 = p.snapshot("second", t(4));
        assert_ne!(s1, s2);
        assert_eq!(
            p.snapshot_by_id(&s1).unwrap().responses,
            p.snapshot_by_id(&s2).unwrap().responses
        );
        let report_after = p.satisfaction_report(&cat);
        assert_eq!(report_before.criteria, report_after.criteria);
        assert_eq!(report_before.layers, report_after.layers);

        p.record_response(&cat, "a1", "security-q1", 6, t(5)).unwrap();
        assert_eq!(p.snapshot_by_id(&s1).unwrap().responses[0].rating, r(4));
        assert_eq!(p.responses()[0].rating, r(6));
        assert_eq!(p.version(), 6);
    }

    #[test]
    fn empty_report() {
        let cat = Catalog::bundled();
        let p = project(&cat, &["security"]);
        let report = p.satisfaction_report(&cat);
        assert!(report.criteria.is_empty());
        assert!(report.layers.is_empty());
    }

    #[test]
    fn update_cannot_orphan_responses() {
        let cat = Catalog::bundled();
        let mut p = project(&cat, &["security", "privacy"]);
        p.record_response(&cat, "a1", "security-q1", 4, t(1)).unwrap();
        let err = p
            .update(
                &cat,
                ProjectUpdate {
                    selected_criteria: Some(["privacy".to_string()].into()),
                    ..Default::default()
                },
                t(2),
            )
            .unwrap_err();
        assert_eq!(err, AssessmentError::CriterionHasResponses("security".into()));
        p.update(
            &cat,
            ProjectUpdate {
                name: Some("renamed".into()),
                ..Default::default()
            },
            t(3),
        )
        .unwrap();
        assert_eq!(p.name, "renamed");
        assert_eq!(p.version(), 3);
    }

    #[test]
    fn serde_round_trip() {
        let cat = Catalog::bundled();
        let mut p = project(&cat, &["security"]);
        p.record_response(&cat, "a1", "security-q1", 4, t(1)).unwrap();
        p.snapshot("s", t(2));
        let json = serde_json::to_string(&p).unwrap();
        let back: AssessmentProject = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(json.contains("\"rating\":4"));
        let bad = json.replace("\"rating\":4", "\"rating\":9");
        assert!(serde_json::from_str::<AssessmentProject>(&bad).is_err());
    }
}
