use std::fmt::Write;

use super::OutlierReport;

const CELL: f64 = 8.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 4] = ["#f0f0f0", "#d7301f", "#3182bd", "#8c0d04"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub(super) fn heatmap(report: &OutlierReport) -> String {
    let order = report.rows_by_group();
    let p = report.variable_names.len();
    let width = MARGIN * 2.0 + CELL * order.len() as f64;
    let height = MARGIN * 2.0 + CELL * p as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(out, r#"<title>Outlier map: 0 clean, 1 cellwise, 2 rowwise, 3 both</title>"#);
    for (j, name) in report.variable_names.iter().enumerate() {
        let y = MARGIN + CELL * (j as f64 + 0.8);
        let _ = writeln!(out, r#"<text x="{}" y="{y}" font-size="7" text-anchor="end">{}</text>"#, MARGIN - 2.0, escape(name));
    }
    for (col, &i) in order.iter().enumerate() {
        let x = MARGIN + CELL * col as f64;
        for j in 0..p {
            let code = report.cell_code(i, j);
            let y = MARGIN + CELL * j as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" data-row="{}" data-col="{}" data-code="{code}"/>"#,
                COLORS[code as usize],
                i + 1,
                j + 1
            );
        }
    }
    // separators between consecutive groups
    for col in 1..order.len() {
        if report.groups[order[col]] != report.groups[order[col - 1]] {
            let x = MARGIN + CELL * col as f64;
            let _ = writeln!(
                out,
                r#"<line class="group-separator" x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black" stroke-width="1.5"/>"#,
                MARGIN - 4.0,
                height - MARGIN + 4.0
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

pub(super) fn distance_plot(report: &OutlierReport) -> String {
    let n = report.n_rows();
    let (w, h) = (640.0, 360.0);
    let ymax = report
        .row_distances
        .iter()
        .cloned()
        .fold(report.row_threshold, f64::max)
        * 1.05;
    let sx = |i: usize| MARGIN + (w - 2.0 * MARGIN) * (i as f64 + 0.5) / n.max(1) as f64;
    let sy = |d: f64| h - MARGIN - (h - 2.0 * MARGIN) * d / ymax;
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r#"<title>Robust distances with the rowwise threshold</title>"#);
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{MARGIN}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        h - MARGIN,
        w - MARGIN,
        h - MARGIN
    );
    let _ = writeln!(out, r#"<line class="axis" x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{}" stroke="black"/>"#, h - MARGIN);
    let ty = sy(report.row_threshold);
    let _ = writeln!(
        out,
        r#"<line class="threshold" x1="{MARGIN}" y1="{ty}" x2="{}" y2="{ty}" stroke="red" stroke-dasharray="4 3" data-value="{}"/>"#,
        w - MARGIN,
        report.row_threshold
    );
    for i in 0..n {
        let (x, y) = (sx(i), sy(report.row_distances[i]));
        let class = if report.row_flags[i] { "point flagged" } else { "point" };
        let fill = if report.row_flags[i] { "#3182bd" } else { "#636363" };
        // alternate marker shapes per group
        if report.groups[i] % 2 == 0 {
            let _ = writeln!(
                out,
                r#"<circle class="{class}" cx="{x}" cy="{y}" r="2.5" fill="{fill}" data-row="{}" data-group="{}"/>"#,
                i + 1,
                escape(&report.group_names[report.groups[i]])
            );
        } else {
            let _ = writeln!(
                out,
                r#"<path class="{class}" d="M{} {} L{} {} L{} {} Z" fill="{fill}" data-row="{}" data-group="{}"/>"#,
                x - 3.0,
                y - 2.5,
                x + 3.0,
                y - 2.5,
                x,
                y + 3.0,
                i + 1,
                escape(&report.group_names[report.groups[i]])
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
