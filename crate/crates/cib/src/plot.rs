//! Dependency-free SVG plots: correlation heatmap, ROC curve, QQ plot.
//!
//! Coordinates are formatted with fixed precision so identical inputs
//! always produce identical bytes. Every plot embeds the config hash as an
//! XML comment right after the opening tag.

use std::fmt::Write as _;

use crate::stats::normal_quantile;

const FONT: &str = "font-family=\"monospace\"";

fn svg_open(width: f64, height: f64, config_hash: &str, title: &str) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width:.0} {height:.0}\" width=\"{width:.0}\" height=\"{height:.0}\">\n<!-- config_hash: {config_hash} -->\n"
    );
    let _ = writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"22\" {FONT} font-size=\"15\" text-anchor=\"middle\">{}</text>",
        width / 2.0,
        xml_escape(title)
    );
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Maps a value in [-1, 1] onto a blue-white-red ramp.
fn diverging_color(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let (r, g, b) = if v >= 0.0 {
        let t = v;
        (255.0, 255.0 - 200.0 * t, 255.0 - 200.0 * t)
    } else {
        let t = -v;
        (255.0 - 200.0 * t, 255.0 - 200.0 * t, 255.0)
    };
    format!("rgb({},{},{})", r.round(), g.round(), b.round())
}

/// Correlation heatmap: one cell per (row, column), colored on a
/// blue-white-red ramp over [-1, 1], with the value printed in each cell.
/// `None` cells are grey.
pub fn heatmap_svg(
    row_labels: &[String],
    col_labels: &[String],
    values: &[Vec<Option<f64>>],
    title: &str,
    config_hash: &str,
) -> String {
    let cell = 64.0;
    let left = 190.0;
    let top = 70.0;
    let width = left + cell * col_labels.len() as f64 + 20.0;
    let height = top + cell * row_labels.len() as f64 + 20.0;
    let mut s = svg_open(width, height, config_hash, title);

    for (j, label) in col_labels.iter().enumerate() {
        let x = left + cell * (j as f64 + 0.5);
        let _ = writeln!(
            s,
            "<text x=\"{x:.1}\" y=\"{:.1}\" {FONT} font-size=\"11\" text-anchor=\"middle\">{}</text>",
            top - 10.0,
            xml_escape(label)
        );
    }
    for (i, label) in row_labels.iter().enumerate() {
        let y = top + cell * (i as f64 + 0.5) + 4.0;
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{y:.1}\" {FONT} font-size=\"11\" text-anchor=\"end\">{}</text>",
            left - 8.0,
            xml_escape(label)
        );
    }
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let x = left + cell * j as f64;
            let y = top + cell * i as f64;
            let fill = match v {
                Some(v) => diverging_color(*v),
                None => "rgb(220,220,220)".to_string(),
            };
            let _ = writeln!(
                s,
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell:.1}\" height=\"{cell:.1}\" fill=\"{fill}\" stroke=\"white\"/>"
            );
            let text = match v {
                Some(v) => format!("{v:.2}"),
                None => "n/a".to_string(),
            };
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{:.1}\" {FONT} font-size=\"12\" text-anchor=\"middle\">{text}</text>",
                x + cell / 2.0,
                y + cell / 2.0 + 4.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// ROC curve through the given (false positive rate, true positive rate)
/// points, with the chance diagonal and the AUC in the title area.
pub fn roc_svg(points: &[(f64, f64)], auc: f64, title: &str, config_hash: &str) -> String {
    let size = 420.0;
    let margin = 60.0;
    let plot = size - 2.0 * margin;
    let full_title = format!("{title} (AUC = {auc:.3})");
    let mut s = svg_open(size, size, config_hash, &full_title);
    let x_of = |fpr: f64| margin + fpr * plot;
    let y_of = |tpr: f64| size - margin - tpr * plot;

    let _ = writeln!(
        s,
        "<rect x=\"{margin:.1}\" y=\"{margin:.1}\" width=\"{plot:.1}\" height=\"{plot:.1}\" fill=\"none\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        s,
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"grey\" stroke-dasharray=\"4 4\"/>",
        x_of(0.0),
        y_of(0.0),
        x_of(1.0),
        y_of(1.0)
    );
    let path: Vec<String> = points
        .iter()
        .map(|(fpr, tpr)| format!("{:.2},{:.2}", x_of(*fpr), y_of(*tpr)))
        .collect();
    let _ = writeln!(
        s,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"rgb(180,40,40)\" stroke-width=\"2\"/>",
        path.join(" ")
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" {FONT} font-size=\"12\" text-anchor=\"middle\">false positive rate</text>",
        size / 2.0,
        size - 18.0
    );
    let _ = writeln!(
        s,
        "<text x=\"18\" y=\"{:.1}\" {FONT} font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">true positive rate</text>",
        size / 2.0,
        size / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// Normal QQ plot: sample quantiles against standard normal quantiles of
/// the plotting positions (i + 0.5) / n, with the identity reference line
/// through the sample's mean and standard deviation.
pub fn qq_svg(sample: &[f64], title: &str, config_hash: &str) -> String {
    let size = 420.0;
    let margin = 60.0;
    let plot = size - 2.0 * margin;
    let mut s = svg_open(size, size, config_hash, title);
    if sample.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let theo: Vec<f64> = (0..n)
        .map(|i| normal_quantile((i as f64 + 0.5) / n as f64))
        .collect();

    let (tmin, tmax) = (theo[0].min(-1.0), theo[n - 1].max(1.0));
    let (smin, smax) = (sorted[0], sorted[n - 1]);
    let s_span = if (smax - smin).abs() < 1e-12 {
        1.0
    } else {
        smax - smin
    };
    let x_of = |t: f64| margin + (t - tmin) / (tmax - tmin) * plot;
    let y_of = |v: f64| size - margin - (v - smin) / s_span * plot;

    let mean = sorted.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    let _ = writeln!(
        s,
        "<rect x=\"{margin:.1}\" y=\"{margin:.1}\" width=\"{plot:.1}\" height=\"{plot:.1}\" fill=\"none\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        s,
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"grey\" stroke-dasharray=\"4 4\"/>",
        x_of(tmin),
        y_of(mean + sd * tmin),
        x_of(tmax),
        y_of(mean + sd * tmax)
    );
    for (t, v) in theo.iter().zip(&sorted) {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"rgb(40,80,180)\"/>",
            x_of(*t),
            y_of(*v)
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" {FONT} font-size=\"12\" text-anchor=\"middle\">theoretical normal quantile</text>",
        size / 2.0,
        size - 18.0
    );
    let _ = writeln!(
        s,
        "<text x=\"18\" y=\"{:.1}\" {FONT} font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">sample quantile</text>",
        size / 2.0,
        size / 2.0
    );
    s.push_str("</svg>\n");
    s
}
