//! CSV renderings of reports and rankings.

use serde::Serialize;

use crate::ahp::RankingResult;
use crate::assessment::SatisfactionReport;

#[derive(Serialize)]
struct CriterionRow<'a> {
    criterion_id: &'a str,
    raw: Option<f64>,
    normalized: Option<f64>,
    coverage: f64,
}

#[derive(Serialize)]
struct LayerRow<'a> {
    layer: &'a str,
    score: f64,
    coverage: f64,
}

#[derive(Serialize)]
struct RankingRow<'a> {
    platform: &'a str,
    composite_weight: f64,
    rank: usize,
}

fn write_rows<T: Serialize>(header: &[&str], rows: impl IntoIterator<Item = T>) -> String {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.serialize(row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// `criterion_id,raw,normalized,coverage`, one row per answered criterion.
pub fn report_csv(report: &SatisfactionReport) -> String {
    write_rows(
        &["criterion_id", "raw", "normalized", "coverage"],
        report.criteria.iter().map(|c| CriterionRow {
            criterion_id: &c.criterion_id,
            raw: c.raw,
            normalized: c.normalized,
            coverage: c.coverage,
        }),
    )
}

/// `layer,score,coverage`, one row per layer with at least one answer.
pub fn layers_csv(report: &SatisfactionReport) -> String {
    write_rows(
        &["layer", "score", "coverage"],
        report.layers.iter().map(|(layer, s)| LayerRow {
            layer: layer.as_str(),
            score: s.score,
            coverage: s.coverage,
        }),
    )
}

/// `platform,composite_weight,rank` in rank order.
pub fn ranking_csv(result: &RankingResult) -> String {
    write_rows(
        &["platform", "composite_weight", "rank"],
        result.ranking.iter().map(|r| RankingRow {
            platform: &r.platform,
            composite_weight: r.composite_weight,
            rank: r.rank,
        }),
    )
}
