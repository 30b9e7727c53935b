//! Rendering of probe reports: CSV, Markdown, JSON and SVG scatter plots.
//!
//! Correlations, p-values and accuracies are printed with three decimals,
//! rounding exact ties away from zero; p-values below 0.0005 therefore
//! print as `0.000`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::lexicon::Dimension;
use crate::probes::{ClfProbeReport, PcaProbeReport, PcaSummary, SimProbeReport};

/// Three-decimal rendering with ties rounded away from zero.
///
/// Non-finite values render as `NA`, negative zero as `0.000`.
pub fn fmt3(x: f64) -> String {
    if !x.is_finite() {
        return "NA".to_string();
    }
    let scaled = x * 1000.0;
    // an exact decimal tie at the 4th place only happens for multiples of 1/16
    let tie = (x * 16.0).fract() == 0.0 && (scaled.abs().fract() - 0.5).abs() == 0.0;
    let s = if tie {
        let r = scaled.abs().ceil().copysign(x) / 1000.0;
        format!("{r:.3}")
    } else {
        format!("{x:.3}")
    };
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn pca_csv(report: &PcaProbeReport) -> String {
    let mut s = String::from("embedding,dimension,component,rho,p,n\n");
    for c in &report.cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            csv_field(&c.embedding),
            c.dimension,
            c.component,
            fmt3(c.result.rho),
            fmt3(c.result.p_value),
            c.result.n
        );
    }
    s
}

pub fn explained_variance_csv(report: &PcaProbeReport) -> String {
    let mut s = String::from("embedding,component,explained_variance_ratio\n");
    for e in &report.embeddings {
        for (i, r) in e.explained_variance_ratio.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", csv_field(&e.embedding), i + 1, fmt3(*r));
        }
    }
    s
}

/// Square matrix block; each cell is `rho (p)`.
pub fn similarity_csv(report: &SimProbeReport) -> String {
    let mut s = String::from("space");
    for l in &report.labels {
        let _ = write!(s, ",{}", csv_field(l));
    }
    s.push('\n');
    for (l, row) in report.labels.iter().zip(&report.matrix) {
        s.push_str(&csv_field(l));
        for r in row {
            let _ = write!(s, ",{} ({})", fmt3(r.rho), fmt3(r.p_value));
        }
        s.push('\n');
    }
    s
}

pub fn classifier_csv(report: &ClfProbeReport) -> String {
    let mut s = String::from(
        "embedding,dimension,train_n,validation_n,test_n,validation_accuracy,test_accuracy\n",
    );
    for c in &report.cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            csv_field(&c.embedding),
            c.dimension,
            c.train_n,
            c.validation_n,
            c.test_n,
            fmt3(c.validation_accuracy),
            fmt3(c.test_accuracy)
        );
    }
    s
}

pub fn pca_markdown(report: &PcaProbeReport) -> String {
    let mut s = format!(
        "# PCA probe\n\nSpearman rho (p) between principal-component scores and ratings, N = {}.\n\n",
        report.n_words
    );
    s.push_str("| Dimension | PC |");
    for e in &report.embeddings {
        let _ = write!(s, " {} |", e.embedding);
    }
    s.push_str("\n|---|---|");
    s.push_str(&"---|".repeat(report.embeddings.len()));
    s.push('\n');
    for dim in Dimension::ALL {
        for comp in 1..=report.k {
            let _ = write!(s, "| {dim} | {comp} |");
            for e in &report.embeddings {
                let cell = report
                    .cells
                    .iter()
                    .find(|c| c.embedding == e.embedding && c.dimension == dim && c.component == comp)
                    .expect("complete report");
                let _ = write!(s, " {} ({}) |", fmt3(cell.result.rho), fmt3(cell.result.p_value));
            }
            s.push('\n');
        }
    }
    s.push_str("\n## Explained variance ratio\n\n| PC |");
    for e in &report.embeddings {
        let _ = write!(s, " {} |", e.embedding);
    }
    s.push_str("\n|---|");
    s.push_str(&"---|".repeat(report.embeddings.len()));
    s.push('\n');
    for comp in 0..report.k {
        let _ = write!(s, "| {} |", comp + 1);
        for e in &report.embeddings {
            let _ = write!(s, " {} |", fmt3(e.explained_variance_ratio[comp]));
        }
        s.push('\n');
    }
    s
}

pub fn similarity_markdown(report: &SimProbeReport) -> String {
    let mut s = format!(
        "# Similarity probe\n\nSpearman rho (p) between pairwise cosine similarities of {} words from `{}`.\n\n|  |",
        report.n_words, report.sample_label
    );
    for l in &report.labels {
        let _ = write!(s, " {l} |");
    }
    s.push_str("\n|---|");
    s.push_str(&"---|".repeat(report.labels.len()));
    s.push('\n');
    for (l, row) in report.labels.iter().zip(&report.matrix) {
        let _ = write!(s, "| {l} |");
        for r in row {
            let _ = write!(s, " {} ({}) |", fmt3(r.rho), fmt3(r.p_value));
        }
        s.push('\n');
    }
    let _ = writeln!(
        s,
        "\nPairs are unordered: each space contributes n(n-1)/2 = {} similarities. \
         Counting ordered pairs would duplicate every value and leave rho unchanged.",
        report.n_pairs
    );
    s
}

pub fn classifier_markdown(report: &ClfProbeReport) -> String {
    let mut s = format!(
        "# Classifier probe\n\nLogistic probe on ratings binarized at {}; stratified {}/{} split (seed {}), \
         l2 = {}, test sample `{}`{}.\n\n",
        report.options.threshold,
        (report.split.train_fraction * 100.0).round(),
        ((1.0 - report.split.train_fraction) * 100.0).round(),
        report.split.seed,
        report.train.l2_lambda,
        report.test_sample_label,
        if report.options.allow_test_overlap {
            " (test words kept in the training pool)"
        } else {
            ""
        }
    );
    s.push_str("| Embedding | Valid. V | Valid. A | Valid. D | Test V | Test A | Test D |\n");
    s.push_str("|---|---|---|---|---|---|---|\n");
    let mut labels: Vec<&str> = Vec::new();
    for c in &report.cells {
        if !labels.contains(&c.embedding.as_str()) {
            labels.push(&c.embedding);
        }
    }
    for l in labels {
        let _ = write!(s, "| {l} |");
        for test in [false, true] {
            for dim in Dimension::ALL {
                let cell = report.get(l, dim).expect("complete report");
                let v = if test { cell.test_accuracy } else { cell.validation_accuracy };
                let _ = write!(s, " {} |", fmt3(v));
            }
        }
        s.push('\n');
    }
    s
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
    s.push('\n');
    Ok(s)
}

/// Light end of the rating color ramp (rating 0).
pub const RAMP_LOW: [u8; 3] = [0xf7, 0xfb, 0xff];
/// Dark end of the rating color ramp (rating 1).
pub const RAMP_HIGH: [u8; 3] = [0x08, 0x30, 0x6b];

/// Linear interpolation between [`RAMP_LOW`] and [`RAMP_HIGH`], per channel
/// rounded to the nearest integer; ratings are clamped to `[0, 1]`.
pub fn ramp_color(rating: f64) -> String {
    let t = if rating.is_finite() { rating.clamp(0.0, 1.0) } else { 0.0 };
    let ch = |i: usize| {
        let (lo, hi) = (f64::from(RAMP_LOW[i]), f64::from(RAMP_HIGH[i]));
        (lo + t * (hi - lo)).round() as u8
    };
    format!("#{:02x}{:02x}{:02x}", ch(0), ch(1), ch(2))
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const LEGEND: f64 = 70.0;

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        (-1.0, 1.0)
    } else if hi - lo == 0.0 {
        (lo - 1.0, hi + 1.0)
    } else {
        let pad = 0.03 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Scatter of the first two PC scores, one point per word, filled by the
/// word's rating on `dim`.
pub fn scatter_svg(summary: &PcaSummary, dim: Dimension) -> String {
    let (x0, x1) = range(summary.scatter.iter().map(|r| r.pc1));
    let (y0, y1) = range(summary.scatter.iter().map(|r| r.pc2));
    let plot_w = WIDTH - 2.0 * MARGIN - LEGEND;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * plot_h;
    let label = xml_escape(&summary.embedding);

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(s, "<title>{label}: PC1 vs PC2 colored by {dim}</title>");
    let _ = writeln!(
        s,
        "<defs><linearGradient id=\"ramp\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">\
         <stop offset=\"0\" stop-color=\"{}\"/><stop offset=\"1\" stop-color=\"{}\"/></linearGradient></defs>",
        ramp_color(0.0),
        ramp_color(1.0)
    );
    let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>");
    let _ = writeln!(
        s,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"#444444\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{label} / {dim}</text>",
        MARGIN + plot_w / 2.0,
        MARGIN / 2.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">PC1</text>",
        MARGIN + plot_w / 2.0,
        HEIGHT - MARGIN / 3.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 {:.2} {:.2})\">PC2</text>",
        MARGIN / 3.0,
        HEIGHT / 2.0,
        MARGIN / 3.0,
        HEIGHT / 2.0
    );
    for (v, anchor, x, y) in [
        (x0, "start", MARGIN, HEIGHT - MARGIN + 14.0),
        (x1, "end", MARGIN + plot_w, HEIGHT - MARGIN + 14.0),
    ] {
        let _ = writeln!(
            s,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"{anchor}\">{v:.2}</text>"
        );
    }
    for (v, y) in [(y0, HEIGHT - MARGIN), (y1, MARGIN + 10.0)] {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{v:.2}</text>",
            MARGIN - 4.0
        );
    }

    s.push_str("<g stroke=\"none\" fill-opacity=\"0.8\">\n");
    for r in &summary.scatter {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{}\"/>",
            px(r.pc1),
            py(r.pc2),
            ramp_color(r.ratings[dim.index()])
        );
    }
    s.push_str("</g>\n");

    let lx = WIDTH - MARGIN - LEGEND + 24.0;
    let _ = writeln!(
        s,
        "<rect x=\"{lx:.2}\" y=\"{MARGIN}\" width=\"16\" height=\"{plot_h}\" fill=\"url(#ramp)\" stroke=\"#444444\"/>"
    );
    for (txt, y) in [("1", MARGIN + 10.0), ("0", HEIGHT - MARGIN)] {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"10\">{txt}</text>",
            lx + 20.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Output file name for a scatter plot.
pub fn scatter_file_name(embedding: &str, dim: Dimension) -> String {
    format!("pca_scatter_{embedding}_{dim}.svg")
}
