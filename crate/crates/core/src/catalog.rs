//! Evaluation-criteria catalog: loading, validation, queries and lints.
//!
//! A catalog is plain data. The bundled one ships with the crate, but any
//! document in the same JSON shape can replace it.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUNDLED_CATALOG: &str = include_str!("../data/catalog.json");

/// Architecture layer of an IoT platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Layer {
    /// User interface layer.
    UL,
    /// Application layer.
    AL,
    /// Service layer.
    SL,
    /// Data layer.
    DL,
    /// Physical / infrastructure layer.
    PL,
}

impl Layer {
    pub const ALL: [Layer; 5] = [Layer::UL, Layer::AL, Layer::SL, Layer::DL, Layer::PL];

    pub fn as_str(self) -> &'static str {
        match self {
            Layer::UL => "UL",
            Layer::AL => "AL",
            Layer::SL => "SL",
            Layer::DL => "DL",
            Layer::PL => "PL",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Layer::UL => "user interface",
            Layer::AL => "application",
            Layer::SL => "service",
            Layer::DL => "data",
            Layer::PL => "physical/infrastructure",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layer {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Layer::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| CatalogError::UnknownLayer {
                tag: s.to_string(),
                location: None,
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dimension {
    Functional,
    NonFunctional,
}

impl Dimension {
    pub const ALL: [Dimension; 2] = [Dimension::Functional, Dimension::NonFunctional];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Functional => "functional",
            Dimension::NonFunctional => "non-functional",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| CatalogError::UnknownDimension(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeadingQuestion {
    pub id: String,
    pub text: String,
    #[serde(rename = "layers")]
    pub applicable_layers: BTreeSet<Layer>,
}

impl LeadingQuestion {
    pub fn applies_to(&self, layer: Layer) -> bool {
        self.applicable_layers.contains(&layer)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Criterion {
    pub id: String,
    pub name: String,
    pub dimension: Dimension,
    pub description: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comments: Option<String>,
    pub questions: Vec<LeadingQuestion>,
}

impl Criterion {
    /// True when at least one of the criterion's questions applies to `layer`.
    pub fn covers_layer(&self, layer: Layer) -> bool {
        self.questions.iter().any(|q| q.applies_to(layer))
    }

    /// Union of the layers of all questions.
    pub fn layers(&self) -> BTreeSet<Layer> {
        self.questions
            .iter()
            .flat_map(|q| q.applicable_layers.iter().copied())
            .collect()
    }
}

/// An ordered list of criteria.
///
/// Values built by [`load_catalog`] or [`Catalog::new`] satisfy every type
/// invariant. [`Catalog::parse_draft`] skips the invariant checks so that
/// work-in-progress catalogs can be linted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Catalog {
    schema_version: u32,
    criteria: Vec<Criterion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("catalog parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown layer tag {tag:?}{}", location.as_ref().map(|l| format!(" in {l}")).unwrap_or_default())]
    UnknownLayer {
        tag: String,
        location: Option<String>,
    },
    #[error("unknown dimension {0:?}")]
    UnknownDimension(String),
    #[error("duplicate {what} id {id:?} at criteria[{index}]")]
    DuplicateId {
        what: &'static str,
        id: String,
        index: usize,
    },
    #[error("criterion {criterion:?} (criteria[{index}]) has no leading question (MC8 measurability)")]
    NoQuestions { criterion: String, index: usize },
    #[error("question {question:?} applies to no layer (MC2 preciseness)")]
    NoLayers { question: String },
    #[error("empty {field} at {location}")]
    EmptyField {
        field: &'static str,
        location: String,
    },
    #[error("unknown criterion id {0:?}")]
    UnknownCriterion(String),
}

// On-disk shape. Layers stay strings here so that an unknown tag can be
// reported together with its location.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    schema_version: u32,
    criteria: Vec<RawCriterion>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCriterion {
    id: String,
    name: String,
    dimension: Dimension,
    description: String,
    #[serde(default)]
    comments: Option<String>,
    questions: Vec<RawQuestion>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuestion {
    id: String,
    text: String,
    layers: Vec<String>,
}

impl Catalog {
    /// Builds a catalog and checks every invariant.
    pub fn new(schema_version: u32, criteria: Vec<Criterion>) -> Result<Self, CatalogError> {
        let catalog = Catalog {
            schema_version,
            criteria,
        };
        catalog.validate()?;
        Ok(catalog)
    }

    /// The catalog shipped with the crate.
    pub fn bundled() -> Self {
        load_catalog(BUNDLED_CATALOG).expect("bundled catalog is valid")
    }

    pub fn bundled_source() -> &'static str {
        BUNDLED_CATALOG
    }

    /// Parses a catalog document without enforcing the catalog invariants.
    pub fn parse_draft(source: &str) -> Result<Self, CatalogError> {
        let raw: RawCatalog = serde_json::from_str(source).map_err(|e| CatalogError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut criteria = Vec::with_capacity(raw.criteria.len());
        for (ci, rc) in raw.criteria.into_iter().enumerate() {
            let mut questions = Vec::with_capacity(rc.questions.len());
            for (qi, rq) in rc.questions.into_iter().enumerate() {
                let mut layers = BTreeSet::new();
                for tag in &rq.layers {
                    let layer = tag.parse::<Layer>().map_err(|_| CatalogError::UnknownLayer {
                        tag: tag.clone(),
                        location: Some(format!("criteria[{ci}].questions[{qi}] ({})", rq.id)),
                    })?;
                    layers.insert(layer);
                }
                questions.push(LeadingQuestion {
                    id: rq.id,
                    text: rq.text,
                    applicable_layers: layers,
                });
            }
            criteria.push(Criterion {
                id: rc.id,
                name: rc.name,
                dimension: rc.dimension,
                description: rc.description,
                comments: rc.comments,
                questions,
            });
        }
        Ok(Catalog {
            schema_version: raw.schema_version,
            criteria,
        })
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let mut criterion_ids = HashSet::new();
        let mut question_ids = HashSet::new();
        for (index, c) in self.criteria.iter().enumerate() {
            if c.id.trim().is_empty() {
                return Err(CatalogError::EmptyField {
                    field: "criterion id",
                    location: format!("criteria[{index}]"),
                });
            }
            if !criterion_ids.insert(c.id.as_str()) {
                return Err(CatalogError::DuplicateId {
                    what: "criterion",
                    id: c.id.clone(),
                    index,
                });
            }
            if c.questions.is_empty() {
                return Err(CatalogError::NoQuestions {
                    criterion: c.id.clone(),
                    index,
                });
            }
            for (qi, q) in c.questions.iter().enumerate() {
                if q.id.trim().is_empty() {
                    return Err(CatalogError::EmptyField {
                        field: "question id",
                        location: format!("criteria[{index}].questions[{qi}]"),
                    });
                }
                if q.text.trim().is_empty() {
                    return Err(CatalogError::EmptyField {
                        field: "question text",
                        location: format!("criteria[{index}].questions[{qi}] ({})", q.id),
                    });
                }
                if !question_ids.insert(q.id.as_str()) {
                    return Err(CatalogError::DuplicateId {
                        what: "question",
                        id: q.id.clone(),
                        index,
                    });
                }
                if q.applicable_layers.is_empty() {
                    return Err(CatalogError::NoLayers {
                        question: q.id.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn schema_version(&self) -> u32 {
        self.schema_version
    }

    pub fn criteria(&self) -> &[Criterion] {
        &self.criteria
    }

    pub fn len(&self) -> usize {
        self.criteria.len()
    }

    pub fn is_empty(&self) -> bool {
        self.criteria.is_empty()
    }

    pub fn criterion(&self, id: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.id == id)
    }

    /// Finds a question and the criterion that owns it.
    pub fn question(&self, question_id: &str) -> Option<(&Criterion, &LeadingQuestion)> {
        self.criteria.iter().find_map(|c| {
            c.questions
                .iter()
                .find(|q| q.id == question_id)
                .map(|q| (c, q))
        })
    }

    /// Returns the questions of `criterion_id`, restricted to `layer` when given.
    pub fn criterion_questions(
        &self,
        criterion_id: &str,
        layer: Option<Layer>,
    ) -> Result<Vec<&LeadingQuestion>, CatalogError> {
        let criterion = self
            .criterion(criterion_id)
            .ok_or_else(|| CatalogError::UnknownCriterion(criterion_id.to_string()))?;
        Ok(criterion
            .questions
            .iter()
            .filter(|q| layer.is_none_or(|l| q.applies_to(l)))
            .collect())
    }
}

/// Parses and validates a catalog document.
pub fn load_catalog(source: &str) -> Result<Catalog, CatalogError> {
    let catalog = Catalog::parse_draft(source)?;
    catalog.validate()?;
    Ok(catalog)
}

/// Criteria matching `dimension` (if given) that have at least one question
/// applicable to `layer` (if given), in catalog order.
pub fn filter_criteria(
    catalog: &Catalog,
    dimension: Option<Dimension>,
    layer: Option<Layer>,
) -> Vec<&Criterion> {
    catalog
        .criteria
        .iter()
        .filter(|c| dimension.is_none_or(|d| c.dimension == d))
        .filter(|c| layer.is_none_or(|l| c.covers_layer(l)))
        .collect()
}

/// The meta-criteria that can be checked mechanically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MetaCriterion {
    /// Preciseness: every question is tied to at least one layer.
    MC2,
    /// Minimum overlapping, approximated by verbatim question text reuse.
    MC3,
    /// Balance: every dimension is represented.
    MC7,
    /// Measurability: every criterion has a leading question.
    MC8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintFinding {
    pub rule: MetaCriterion,
    pub severity: Severity,
    pub subject: String,
    pub message: String,
}

/// Runs the automatable meta-criteria checks. Never fails; findings come
/// back in a deterministic order (catalog order, then rule).
pub fn lint_catalog(catalog: &Catalog) -> Vec<LintFinding> {
    let mut findings = Vec::new();

    for c in &catalog.criteria {
        if c.questions.is_empty() {
            findings.push(LintFinding {
                rule: MetaCriterion::MC8,
                severity: Severity::Error,
                subject: c.id.clone(),
                message: format!("criterion {:?} has no leading question to measure it", c.id),
            });
        }
        for q in &c.questions {
            if q.applicable_layers.is_empty() {
                findings.push(LintFinding {
                    rule: MetaCriterion::MC2,
                    severity: Severity::Error,
                    subject: q.id.clone(),
                    message: format!("question {:?} is not tied to any layer", q.id),
                });
            }
        }
    }

    for d in Dimension::ALL {
        if !catalog.criteria.iter().any(|c| c.dimension == d) {
            findings.push(LintFinding {
                rule: MetaCriterion::MC7,
                severity: Severity::Warning,
                subject: d.as_str().to_string(),
                message: format!("dimension {d} has no criteria"),
            });
        }
    }

    // first owner of each question text
    let mut seen: HashMap<&str, &str> = HashMap::new();
    let mut reported: HashSet<(&str, &str)> = HashSet::new();
    for c in &catalog.criteria {
        for q in &c.questions {
            let text = q.text.trim();
            match seen.get(text) {
                Some(&owner) if owner != c.id => {
                    if reported.insert((owner, c.id.as_str())) {
                        findings.push(LintFinding {
                            rule: MetaCriterion::MC3,
                            severity: Severity::Warning,
                            subject: c.id.clone(),
                            message: format!(
                                "criteria {owner:?} and {:?} share the question text of {:?}",
                                c.id, q.id
                            ),
                        });
                    }
                }
                Some(_) => {}
                None => {
                    seen.insert(text, c.id.as_str());
                }
            }
        }
    }

    findings
}
