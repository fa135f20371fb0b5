//! WebAssembly bindings for the single-page demo in `www/`.
//!
//! Every export takes and returns JSON strings; the plain functions below
//! the bindings do the work and are what the tests exercise.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use platform_rater_core::{
    build_matrix, consistency, kiviat_series, priority_vector, ConsistencyConfig,
    ConsistencyReport, Judgment, KiviatChart, PairwiseJudgment, RankingInput, RankingResult,
};

const WORKED_EXAMPLE: &str = include_str!("../../../fixtures/worked-example.json");

#[derive(Deserialize)]
pub struct MatrixInput {
    pub items: Vec<String>,
    pub judgments: Vec<PairwiseJudgment>,
}

#[derive(Serialize)]
pub struct MatrixSummary {
    pub items: Vec<String>,
    pub weights: Vec<f64>,
    pub entries: Vec<Vec<f64>>,
    pub consistency: ConsistencyReport,
}

#[derive(Serialize)]
pub struct RankingView {
    pub result: RankingResult,
    pub kiviat: KiviatChart,
}

#[derive(Serialize)]
pub struct ScaleEntry {
    pub value: f64,
    pub label: String,
}

/// Priorities and consistency of one pairwise comparison matrix.
pub fn explore_matrix(input: &str) -> Result<String, String> {
    let input: MatrixInput = serde_json::from_str(input).map_err(|e| e.to_string())?;
    let matrix = build_matrix(&input.items, &input.judgments).map_err(|e| e.to_string())?;
    let summary = MatrixSummary {
        weights: priority_vector(&matrix).weights,
        entries: matrix.entries().to_vec(),
        consistency: consistency(&matrix, &ConsistencyConfig::default()),
        items: input.items,
    };
    Ok(serde_json::to_string(&summary).expect("serializable"))
}

/// Full ranking plus radar-chart series.
pub fn rank(input: &str) -> Result<String, String> {
    let input: RankingInput = serde_json::from_str(input).map_err(|e| e.to_string())?;
    let result = input
        .evaluate(&ConsistencyConfig::default())
        .map_err(|e| e.to_string())?;
    let kiviat = kiviat_series(&result);
    Ok(serde_json::to_string(&RankingView { result, kiviat }).expect("serializable"))
}

/// The 17 scale values, weakest first.
pub fn scale() -> String {
    let entries: Vec<ScaleEntry> = Judgment::all()
        .map(|j| ScaleEntry {
            value: j.value(),
            label: j.to_string(),
        })
        .collect();
    serde_json::to_string(&entries).expect("serializable")
}

#[wasm_bindgen(js_name = exploreMatrix)]
pub fn explore_matrix_js(input: &str) -> Result<String, JsError> {
    explore_matrix(input).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = rank)]
pub fn rank_js(input: &str) -> Result<String, JsError> {
    rank(input).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = scale)]
pub fn scale_js() -> String {
    scale()
}

#[wasm_bindgen(js_name = workedExample)]
pub fn worked_example() -> String {
    WORKED_EXAMPLE.to_string()
}
