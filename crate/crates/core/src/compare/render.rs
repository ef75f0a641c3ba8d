//! Report emission: JSON, CSV, SVG, and plain-text tables.
//!
//! The CSV carries exactly four ranked sections of k rows each
//! (`most_important`, `least_important`, `most_different`,
//! `most_similar`); the per-model importance sections are ordered by the
//! first model's values, with the second model's value alongside. The
//! full per-model rankings for both models live in the JSON report.
//!
//! The SVG is self-contained (generic font families only) and holds a
//! signed horizontal bar chart of the residual — positive bars in the
//! blue class, negative in the red class — plus, when a membership is
//! supplied, a word cloud per ranked topic with words sized by
//! membership times mean topic importance.

use std::fs;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::aggregate::OTHER_LABEL;
use crate::error::{Error, Result};
use crate::topics::TopicMembership;

use super::{ComparisonReport, RankedRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Svg,
    Text,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<ReportFormat> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "svg" => Ok(ReportFormat::Svg),
            "text" | "txt" => Ok(ReportFormat::Text),
            other => Err(Error::InvalidParameter(format!(
                "unknown report format {other:?} (expected json, csv, svg or text)"
            ))),
        }
    }
}

/// Write all requested formats into `out_dir` as `report.<ext>`,
/// atomically (temp file + rename). Returns the written paths.
pub fn render_report(
    report: &ComparisonReport,
    membership: Option<&TopicMembership>,
    formats: &[ReportFormat],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for format in formats {
        let (name, bytes) = match format {
            ReportFormat::Json => ("report.json", render_json(report)?),
            ReportFormat::Csv => ("report.csv", render_csv(report)?),
            ReportFormat::Svg => ("report.svg", render_svg(report, membership).into_bytes()),
            ReportFormat::Text => ("report.txt", render_text(report).into_bytes()),
        };
        let path = out_dir.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn render_json(report: &ComparisonReport) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(report)
        .map_err(|e| Error::Internal(format!("serializing report: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn render_csv(report: &ComparisonReport) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Internal(format!("writing report csv: {e}"));
    writer
        .write_record(["section", "rank", "topic", "value_a", "value_b", "delta"])
        .map_err(fail)?;

    let mut section = |name: &str, rows: &[RankedRow]| -> Result<()> {
        for row in rows {
            writer
                .write_record([
                    name.to_owned(),
                    row.rank.to_string(),
                    row.topic.clone(),
                    format!("{}", row.value_a),
                    format!("{}", row.value_b),
                    format!("{}", row.delta),
                ])
                .map_err(fail)?;
        }
        Ok(())
    };

    section("most_important", &rank_section_a(report, true))?;
    section("least_important", &rank_section_a(report, false))?;
    section("most_different", &report.most_different)?;
    section("most_similar", &report.most_similar)?;

    writer
        .into_inner()
        .map_err(|e| Error::Internal(format!("finishing report csv: {e}")))
}

/// The per-model CSV sections, ranked by model A. `value_b` is
/// reconstructed from A's normalized value and the residual, which are
/// both carried in the report.
fn rank_section_a(report: &ComparisonReport, most: bool) -> Vec<RankedRow> {
    let rows = if most {
        &report.per_model.a.most_important
    } else {
        &report.per_model.a.least_important
    };
    rows.iter()
        .map(|r| {
            let delta = report.delta.get(&r.topic).copied().unwrap_or(0.0);
            RankedRow {
                rank: r.rank,
                topic: r.topic.clone(),
                value_a: r.value,
                value_b: r.value - delta,
                delta,
            }
        })
        .collect()
}

fn render_text(report: &ComparisonReport) -> String {
    let mut out = String::new();
    let [a, b] = &report.models;
    let _ = writeln!(out, "model comparison: {a} vs {b}");
    let _ = writeln!(out, "explanation distance (L1): {:.6}", report.distance_l1);
    let _ = writeln!(out);

    let width = report
        .delta
        .keys()
        .map(|l| l.len())
        .max()
        .unwrap_or(8)
        .max(8);

    let table = |out: &mut String, title: &str, rows: &[RankedRow]| {
        let _ = writeln!(out, "{title}");
        let _ = writeln!(
            out,
            "  {:>4}  {:<width$}  {:>12}  {:>12}  {:>12}",
            "rank", "topic", "value_a", "value_b", "delta"
        );
        for r in rows {
            let _ = writeln!(
                out,
                "  {:>4}  {:<width$}  {:>12.6}  {:>12.6}  {:>12.6}",
                r.rank, r.topic, r.value_a, r.value_b, r.delta
            );
        }
        let _ = writeln!(out);
    };
    table(&mut out, "most different topics (by |delta|)", &report.most_different);
    table(&mut out, "most similar topics (by |delta|)", &report.most_similar);

    for tables in [&report.per_model.a, &report.per_model.b] {
        let _ = writeln!(out, "model {}: most / least important topics", tables.model_id);
        let _ = writeln!(
            out,
            "  {:>4}  {:<width$}  {:>12}    {:<width$}  {:>12}",
            "rank", "topic", "value", "topic", "value"
        );
        for (hi, lo) in tables.most_important.iter().zip(&tables.least_important) {
            let _ = writeln!(
                out,
                "  {:>4}  {:<width$}  {:>12.6}    {:<width$}  {:>12.6}",
                hi.rank, hi.topic, hi.value, lo.topic, lo.value
            );
        }
        let _ = writeln!(out);
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn render_svg(report: &ComparisonReport, membership: Option<&TopicMembership>) -> String {
    const WIDTH: f64 = 720.0;
    const BAR_H: f64 = 20.0;
    const ROW_H: f64 = 26.0;
    const LABEL_W: f64 = 170.0;
    const TOP: f64 = 56.0;

    // bars sorted by signed delta descending, label-tiebroken
    let mut bars: Vec<(&String, f64)> = report.delta.iter().map(|(l, &d)| (l, d)).collect();
    bars.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(y.0)));
    let max_abs = bars
        .iter()
        .map(|(_, d)| d.abs())
        .fold(0.0_f64, f64::max)
        .max(1e-12);

    let plot_w = WIDTH - LABEL_W - 40.0;
    let zero_x = LABEL_W + plot_w / 2.0;
    let scale = (plot_w / 2.0) / max_abs;

    let bars_height = TOP + bars.len() as f64 * ROW_H + 24.0;

    let clouds = match membership {
        Some(m) => cloud_blocks(report, m),
        None => {
            log::warn!("no topic membership supplied; skipping word clouds in SVG");
            Vec::new()
        }
    };
    let clouds_height: f64 = clouds.iter().map(|c| c.height).sum();
    let total_height = bars_height + clouds_height + 16.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{total_height:.0}" viewBox="0 0 {WIDTH} {total_height:.0}">"#
    );
    let _ = writeln!(
        svg,
        "<style>text {{ font-family: sans-serif; fill: #222; }} \
         .pos {{ fill: #3b6fb5; }} .neg {{ fill: #c0392b; }} .zero {{ fill: #9aa0a6; }} \
         .axis {{ stroke: #666; stroke-width: 1; }} .title {{ font-size: 15px; font-weight: bold; }} \
         .lbl {{ font-size: 12px; }} .val {{ font-size: 11px; fill: #444; }}</style>"
    );
    let [a, b] = &report.models;
    let _ = writeln!(
        svg,
        r#"<text class="title" x="16" y="24">residual topic importance: {} minus {} (L1 distance {:.6})</text>"#,
        xml_escape(a),
        xml_escape(b),
        report.distance_l1
    );
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{zero_x:.2}" y1="{TOP}" x2="{zero_x:.2}" y2="{:.2}"/>"#,
        TOP + bars.len() as f64 * ROW_H
    );
    for (i, (label, delta)) in bars.iter().enumerate() {
        let y = TOP + i as f64 * ROW_H;
        let w = delta.abs() * scale;
        let (class, x) = if *delta > 0.0 {
            ("pos", zero_x)
        } else if *delta < 0.0 {
            ("neg", zero_x - w)
        } else {
            ("zero", zero_x)
        };
        let _ = writeln!(
            svg,
            r#"<rect class="{class}" x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{BAR_H}"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text class="lbl" x="12" y="{:.2}">{}</text>"#,
            y + BAR_H - 5.0,
            xml_escape(label)
        );
        let vx = if *delta >= 0.0 { zero_x + w + 6.0 } else { zero_x - w - 6.0 };
        let anchor = if *delta >= 0.0 { "start" } else { "end" };
        let _ = writeln!(
            svg,
            r#"<text class="val" x="{vx:.2}" y="{:.2}" text-anchor="{anchor}">{delta:.6}</text>"#,
            y + BAR_H - 5.0
        );
    }

    let mut y_off = bars_height;
    for cloud in &clouds {
        let _ = writeln!(svg, r#"<g transform="translate(0 {y_off:.2})">"#);
        svg.push_str(&cloud.body);
        let _ = writeln!(svg, "</g>");
        y_off += cloud.height;
    }
    let _ = writeln!(svg, "</svg>");
    svg
}

struct CloudBlock {
    height: f64,
    body: String,
}

/// Word clouds for every topic appearing in the ranked tables, in table
/// order: top-15 words by membership weight times the topic's mean
/// normalized importance across the two models.
fn cloud_blocks(report: &ComparisonReport, membership: &TopicMembership) -> Vec<CloudBlock> {
    const CLOUD_W: f64 = 680.0;
    let mut topics: Vec<&RankedRow> = Vec::new();
    for row in report.most_different.iter().chain(&report.most_similar) {
        if topics.iter().all(|r| r.topic != row.topic) {
            topics.push(row);
        }
    }

    let mut blocks = Vec::new();
    for row in topics {
        if row.topic == OTHER_LABEL {
            continue; // no membership by definition
        }
        let Some(t) = membership.labels().iter().position(|l| *l == row.topic) else {
            continue;
        };
        let importance = 0.5 * (row.value_a + row.value_b);
        let mut weighted: Vec<(&str, f64)> = membership
            .covered_words()
            .filter_map(|w| {
                membership
                    .get(w)
                    .and_then(|entries| entries.iter().find(|(ti, _)| *ti == t))
                    .map(|(_, p)| (w.as_str(), p * importance))
            })
            .collect();
        weighted.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(y.0)));
        weighted.truncate(15);
        if weighted.is_empty() {
            continue;
        }
        let max_w = weighted[0].1.max(1e-12);

        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<text class="title" x="16" y="20">topic: {} (delta {:.6})</text>"#,
            xml_escape(&row.topic),
            row.delta
        );
        let mut x = 16.0;
        let mut y = 48.0;
        for (word, weight) in &weighted {
            let size = 9.0 + 19.0 * (weight / max_w);
            let est_w = 0.62 * size * word.chars().count() as f64 + 10.0;
            if x + est_w > CLOUD_W && x > 16.0 {
                x = 16.0;
                y += 30.0;
            }
            let _ = writeln!(
                body,
                r#"<text class="cloud" x="{x:.2}" y="{y:.2}" font-size="{size:.1}">{}</text>"#,
                xml_escape(word)
            );
            x += est_w;
        }
        blocks.push(CloudBlock {
            height: y + 24.0,
            body,
        });
    }
    blocks
}
