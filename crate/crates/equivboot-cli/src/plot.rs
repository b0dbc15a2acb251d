//! Deterministic SVG rendering of sweep tables.
//!
//! One polyline per `(scenario, n1)` group over `delta`, a dashed
//! horizontal reference at the nominal level and a dashed vertical line at
//! each scenario's boundary `delta`. Data series are the only `<polyline>`
//! elements; axes and reference lines are `<line>` elements, which keeps
//! the structure easy to assert on.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use equivboot::simulation::{BuiltinScenario, SweepRow};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 552.0;
const TOP: f64 = 28.0;
const BOTTOM: f64 = 428.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

pub fn render_svg(rows: &[SweepRow]) -> String {
    let mut groups: BTreeMap<(String, u64), Vec<&SweepRow>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.scenario.clone(), row.n1))
            .or_default()
            .push(row);
    }
    for series in groups.values_mut() {
        series.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    }

    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y_max = 0.0f64;
    for row in rows {
        x_min = x_min.min(row.delta);
        x_max = x_max.max(row.delta);
        y_max = y_max.max(row.rejection_rate);
    }
    if x_max - x_min < 1e-12 {
        x_min -= 0.5;
        x_max += 0.5;
    }
    let alpha = rows[0].alpha;
    let y_top = (y_max.max(alpha * 1.5).max(0.05) * 1.08).min(1.05);

    let to_x = |d: f64| LEFT + (d - x_min) / (x_max - x_min) * (RIGHT - LEFT);
    let to_y = |r: f64| BOTTOM - (r / y_top) * (BOTTOM - TOP);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );

    // Axes.
    let _ = writeln!(
        svg,
        "  <line class=\"axis\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"1\"/>",
        LEFT, BOTTOM, RIGHT, BOTTOM
    );
    let _ = writeln!(
        svg,
        "  <line class=\"axis\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"1\"/>",
        LEFT, TOP, LEFT, BOTTOM
    );

    // Ticks and labels.
    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let d = x_min + frac * (x_max - x_min);
        let x = to_x(d);
        let _ = writeln!(
            svg,
            "  <line class=\"tick\" x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"1\"/>",
            BOTTOM, BOTTOM + 5.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{d:.3}</text>",
            BOTTOM + 18.0
        );
        let r = frac * y_top;
        let y = to_y(r);
        let _ = writeln!(
            svg,
            "  <line class=\"tick\" x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"black\" stroke-width=\"1\"/>",
            LEFT - 5.0, LEFT
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{r:.2}</text>",
            LEFT - 9.0, y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">delta</text>",
        (LEFT + RIGHT) / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"16\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">rejection probability</text>",
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    );

    // Nominal-level reference.
    if alpha <= y_top {
        let y = to_y(alpha);
        let _ = writeln!(
            svg,
            "  <line class=\"alpha-ref\" x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#555555\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>",
            LEFT, RIGHT
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#555555\">alpha={alpha}</text>",
            RIGHT - 74.0,
            y - 4.0
        );
    }

    // Boundary reference per scenario, where the design norm hits epsilon.
    let mut boundaries: Vec<(String, f64)> = Vec::new();
    for row in rows {
        if let Ok(builtin) = row.scenario.parse::<BuiltinScenario>() {
            if let Some(delta) = builtin.boundary_delta(row.epsilon) {
                if delta >= x_min && delta <= x_max {
                    let entry = (row.scenario.clone(), delta);
                    if !boundaries.contains(&entry) {
                        boundaries.push(entry);
                    }
                }
            }
        }
    }
    boundaries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    for (_, delta) in &boundaries {
        let x = to_x(*delta);
        let _ = writeln!(
            svg,
            "  <line class=\"boundary-ref\" x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"3,3\"/>",
            TOP, BOTTOM
        );
    }

    // Data series.
    for (idx, ((scenario, n1), series)) in groups.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut points = String::new();
        for row in series {
            let _ = write!(points, "{:.2},{:.2} ", to_x(row.delta), to_y(row.rejection_rate));
        }
        let _ = writeln!(
            svg,
            "  <polyline class=\"series\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.trim_end()
        );
        let ly = TOP + 16.0 * idx as f64;
        let _ = writeln!(
            svg,
            "  <rect x=\"{:.2}\" y=\"{:.2}\" width=\"12\" height=\"4\" fill=\"{color}\"/>",
            RIGHT + 12.0,
            ly - 4.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{scenario} n={n1}</text>",
            RIGHT + 30.0,
            ly
        );
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use equivboot::NormKind;

    fn row(scenario: &str, delta: f64, n1: u64, rate: f64) -> SweepRow {
        SweepRow {
            scenario: scenario.into(),
            delta,
            n1,
            n2: n1,
            norm: NormKind::LInf,
            epsilon: 0.25,
            alpha: 0.05,
            reps: 100,
            b: 100,
            rejection_rate: rate,
            mc_stderr: 0.01,
            seed: 1,
        }
    }

    #[test]
    fn two_rows_make_one_polyline_with_two_points() {
        let rows = vec![row("det15", 0.3, 100, 0.02), row("det15", 0.45, 100, 0.8)];
        let svg = render_svg(&rows);
        assert_eq!(svg.matches("<polyline").count(), 1);
        let line = svg
            .lines()
            .find(|l| l.contains("<polyline"))
            .unwrap();
        let points = line.split("points=\"").nth(1).unwrap();
        let coords: Vec<&str> = points.split('"').next().unwrap().split(' ').collect();
        assert_eq!(coords.len(), 2);
        assert!(svg.contains("alpha-ref"));
        assert!(svg.contains("boundary-ref"));
    }

    #[test]
    fn groups_become_separate_series() {
        let rows = vec![
            row("det15", 0.3, 100, 0.1),
            row("det15", 0.4, 100, 0.5),
            row("det15", 0.3, 500, 0.05),
            row("det15", 0.4, 500, 0.9),
        ];
        let svg = render_svg(&rows);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn rendering_is_deterministic() {
        let rows = vec![row("det16", 0.2, 250, 0.03), row("det16", 0.3, 250, 0.6)];
        assert_eq!(render_svg(&rows), render_svg(&rows));
    }
}
