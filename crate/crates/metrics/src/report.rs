//! Aggregate success rates, as JSON, a text table and an SVG bar chart.

use std::fmt::Write as _;

use duplexkit_sim::{Behavior, ReactionWindow};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::score::{BehaviorOutcome, Defect};

pub const METRICS_FORMAT: &str = "duplexkit-metrics/1";

/// Published success rates (%) of the reference full-duplex system. Shown
/// next to measured rates for orientation only.
pub fn reference_rate_pct(b: Behavior) -> f64 {
    match b {
        Behavior::TurnTaking => 99.7,
        Behavior::PauseHandling => 97.6,
        Behavior::Backchanneling => 93.89,
        Behavior::Interruption => 96.81,
    }
}

fn column_title(b: Behavior) -> &'static str {
    match b {
        Behavior::TurnTaking => "Turn-taking",
        Behavior::PauseHandling => "Pause Handling",
        Behavior::Backchanneling => "Backchanneling",
        Behavior::Interruption => "Interruption",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorStats {
    pub behavior: Behavior,
    pub successes: u64,
    pub total: u64,
    /// `successes / total`, null when nothing was scored.
    pub rate: Option<f64>,
    pub defects: u64,
    pub reference_rate_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format: String,
    pub suite: String,
    pub window: ReactionWindow,
    pub behaviors: Vec<BehaviorStats>,
    #[serde(default)]
    pub defects: Vec<Defect>,
    #[serde(default)]
    pub config: Value,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Counts outcomes per behavior. Defects are tallied but never enter a total.
pub fn aggregate(outcomes: &[BehaviorOutcome], defects: &[Defect]) -> MetricsReport {
    let behaviors = Behavior::ALL
        .iter()
        .map(|&b| {
            let mine = outcomes.iter().filter(|o| o.behavior == b);
            let total = mine.clone().count() as u64;
            let successes = mine.filter(|o| o.success).count() as u64;
            BehaviorStats {
                behavior: b,
                successes,
                total,
                rate: (total > 0).then(|| successes as f64 / total as f64),
                defects: defects.iter().filter(|d| d.behavior == b).count() as u64,
                reference_rate_pct: reference_rate_pct(b),
            }
        })
        .collect();
    MetricsReport {
        format: METRICS_FORMAT.to_string(),
        suite: String::new(),
        window: ReactionWindow::default(),
        behaviors,
        defects: defects.to_vec(),
        config: Value::Null,
        notes: Vec::new(),
    }
}

impl MetricsReport {
    pub fn stats(&self, b: Behavior) -> Option<&BehaviorStats> {
        self.behaviors.iter().find(|s| s.behavior == b)
    }

    pub fn rate(&self, b: Behavior) -> Option<f64> {
        self.stats(b).and_then(|s| s.rate)
    }

    /// Aligned table with one column per behavior.
    pub fn to_table(&self) -> String {
        let pct = |r: Option<f64>| r.map_or("n/a".to_string(), |r| format!("{:.2}", r * 100.0));
        let mut rows: Vec<(String, Vec<String>)> = vec![
            ("Metric".into(), self.behaviors.iter().map(|s| column_title(s.behavior).into()).collect()),
            ("Success Rate (%)".into(), self.behaviors.iter().map(|s| pct(s.rate)).collect()),
            (
                "Successes / Total".into(),
                self.behaviors.iter().map(|s| format!("{}/{}", s.successes, s.total)).collect(),
            ),
            ("Defects (excluded)".into(), self.behaviors.iter().map(|s| s.defects.to_string()).collect()),
            (
                "Reference (%)".into(),
                self.behaviors.iter().map(|s| format!("{:.2}", s.reference_rate_pct)).collect(),
            ),
        ];
        let first = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let widths: Vec<usize> = (0..self.behaviors.len())
            .map(|i| rows.iter().map(|r| r.1[i].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        if !self.suite.is_empty() {
            let _ = writeln!(out, "suite: {}", self.suite);
        }
        let _ = writeln!(
            out,
            "reaction window: {}..={} chunks",
            self.window.min_delay_chunks, self.window.max_delay_chunks
        );
        for (i, (head, cells)) in rows.iter_mut().enumerate() {
            let mut line = format!("{head:<first$}");
            for (cell, w) in cells.iter().zip(&widths) {
                let _ = write!(line, " | {cell:>w$}");
            }
            let _ = writeln!(out, "{}", line.trim_end());
            if i == 0 {
                let rule: Vec<String> = std::iter::once(first)
                    .chain(widths.iter().copied())
                    .map(|w| "-".repeat(w))
                    .collect();
                let _ = writeln!(out, "{}", rule.join("-+-"));
            }
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }

    /// Bar chart of success rates with the reference rates as ticks.
    pub fn to_svg(&self) -> String {
        const W: f64 = 560.0;
        const H: f64 = 320.0;
        const TOP: f64 = 30.0;
        const BOTTOM: f64 = 260.0;
        let plot_h = BOTTOM - TOP;
        let slot = (W - 60.0) / self.behaviors.len().max(1) as f64;
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(svg, r#"<text x="{}" y="18" text-anchor="middle">Success rate (%)</text>"#, W / 2.0);
        for tick in [0, 25, 50, 75, 100] {
            let y = BOTTOM - plot_h * tick as f64 / 100.0;
            let _ = writeln!(svg, r##"<line x1="50" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/>"##, W - 10.0);
            let _ = writeln!(svg, r#"<text x="44" y="{}" text-anchor="end">{tick}</text>"#, y + 4.0);
        }
        for (i, s) in self.behaviors.iter().enumerate() {
            let x = 60.0 + slot * i as f64;
            let bar_w = slot * 0.6;
            let cx = x + bar_w / 2.0;
            if let Some(rate) = s.rate {
                let h = plot_h * rate;
                let _ = writeln!(
                    svg,
                    r##"<rect x="{x:.1}" y="{:.1}" width="{bar_w:.1}" height="{h:.1}" fill="#4472c4"/>"##,
                    BOTTOM - h
                );
                let _ = writeln!(
                    svg,
                    r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{:.1}</text>"#,
                    BOTTOM - h - 4.0,
                    rate * 100.0
                );
            } else {
                let _ = writeln!(svg, r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">n/a</text>"#, BOTTOM - 4.0);
            }
            let ry = BOTTOM - plot_h * s.reference_rate_pct / 100.0;
            let _ = writeln!(
                svg,
                r##"<line x1="{:.1}" y1="{ry:.1}" x2="{:.1}" y2="{ry:.1}" stroke="#c00" stroke-width="2" stroke-dasharray="4 2"/>"##,
                x - 4.0,
                x + bar_w + 4.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                BOTTOM + 18.0,
                column_title(s.behavior)
            );
        }
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" text-anchor="middle" fill="#c00">dashed: reference rates</text>"##,
            W / 2.0,
            H - 16.0
        );
        svg.push_str("</svg>\n");
        svg
    }
}
