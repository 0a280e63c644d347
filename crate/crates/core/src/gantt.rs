//! Text renderings: Gantt charts of schedules and installment sweep tables.
//!
//! Charts have one row per link (`l1`, `l2`, ...) then one per processor
//! (`P1`, ...). Every bar stands for installment `(n, j)` of a load, both
//! 1-based. Output depends only on the exact schedule values, so repeated
//! runs are byte-identical.

use std::fmt::Write as _;

use num_traits::{ToPrimitive, Zero};

use crate::model::Schedule;
use crate::rational::{to_decimal_string, to_exact_string, to_significant, Rational};
use crate::refine::SweepPoint;

const ASCII_WIDTH: usize = 64;

/// One bar of a chart row.
#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub load: usize,
    pub installment: usize,
    pub start: Rational,
    pub end: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub label: String,
    pub bars: Vec<Bar>,
}

/// Link rows followed by processor rows, bars in `(n, j)` order.
pub fn rows(s: &Schedule) -> Vec<Row> {
    let m = s.processors();
    let collect = |starts: &[Vec<Vec<Rational>>], ends: &[Vec<Vec<Rational>>], k: usize| {
        let mut bars = Vec::new();
        for (n, load) in starts.iter().enumerate() {
            for (j, inst) in load.iter().enumerate() {
                bars.push(Bar { load: n + 1, installment: j + 1, start: inst[k].clone(), end: ends[n][j][k].clone() });
            }
        }
        bars
    };
    let mut out = Vec::new();
    for l in 0..m.saturating_sub(1) {
        out.push(Row { label: format!("l{}", l + 1), bars: collect(&s.comm_start, &s.comm_end, l) });
    }
    for i in 0..m {
        out.push(Row { label: format!("P{}", i + 1), bars: collect(&s.comp_start, &s.comp_end, i) });
    }
    out
}

fn horizon(s: &Schedule) -> Rational {
    let mut t = s.makespan.clone();
    for row in rows(s) {
        for b in row.bars {
            if b.end > t {
                t = b.end;
            }
        }
    }
    t
}

fn glyph(load: usize, installment: usize) -> char {
    let base = if installment % 2 == 1 { b'A' } else { b'a' };
    (base + ((load - 1) % 26) as u8) as char
}

fn column(t: &Rational, total: &Rational, width: usize) -> usize {
    if total.is_zero() {
        return 0;
    }
    let c = (t * Rational::from_integer(width.into()) / total).floor().to_integer();
    c.to_usize().unwrap_or(width).min(width)
}

/// Fixed-width chart plus a legend listing every bar's exact interval.
/// Letters name loads; upper case marks odd installments, lower case even
/// ones. Zero-length bars show as `|`.
pub fn ascii(s: &Schedule) -> String {
    let total = horizon(s);
    let rows = rows(s);
    let mut out = String::new();
    writeln!(out, "time 0 .. {} ({}), {} columns", to_exact_string(&total), to_decimal_string(&total), ASCII_WIDTH).unwrap();
    for row in &rows {
        let mut line = vec![' '; ASCII_WIDTH];
        for b in &row.bars {
            let (a, z) = (column(&b.start, &total, ASCII_WIDTH), column(&b.end, &total, ASCII_WIDTH));
            if b.start == b.end {
                if a < ASCII_WIDTH && line[a] == ' ' {
                    line[a] = '|';
                }
                continue;
            }
            for cell in line.iter_mut().take(z.max(a + 1).min(ASCII_WIDTH)).skip(a) {
                *cell = glyph(b.load, b.installment);
            }
        }
        writeln!(out, "{:<3}|{}|", row.label, line.into_iter().collect::<String>()).unwrap();
    }
    out.push('\n');
    for row in &rows {
        for b in &row.bars {
            writeln!(
                out,
                "{:<3} ({},{}) {} .. {}",
                row.label,
                b.load,
                b.installment,
                to_exact_string(&b.start),
                to_exact_string(&b.end)
            )
            .unwrap();
        }
    }
    out
}

const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1"];

fn f(x: f64) -> String {
    format!("{x:.2}")
}

/// SVG chart on a linear time axis.
pub fn svg(s: &Schedule) -> String {
    let total = horizon(s);
    let rows = rows(s);
    let (left, top, plot_w, row_h) = (48.0, 16.0, 720.0, 28.0);
    let height = top + row_h * rows.len() as f64 + 36.0;
    let width = left + plot_w + 24.0;
    let x = |t: &Rational| {
        if total.is_zero() {
            left
        } else {
            left + plot_w * (t / &total).to_f64().unwrap_or(0.0)
        }
    };

    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="monospace" font-size="11">"#, f(width), f(height)).unwrap();
    for (r, row) in rows.iter().enumerate() {
        let y = top + row_h * r as f64;
        writeln!(out, r#"<text x="4" y="{}">{}</text>"#, f(y + row_h / 2.0 + 4.0), row.label).unwrap();
        for b in &row.bars {
            let (x0, x1) = (x(&b.start), x(&b.end));
            let color = PALETTE[(b.load - 1) % PALETTE.len()];
            let opacity = if b.installment % 2 == 1 { "1" } else { "0.6" };
            writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{color}" fill-opacity="{opacity}" stroke="black" stroke-width="0.5"><title>({},{}) {} .. {}</title></rect>"#,
                f(x0),
                f(y + 4.0),
                f(x1 - x0),
                f(row_h - 8.0),
                b.load,
                b.installment,
                to_exact_string(&b.start),
                to_exact_string(&b.end)
            )
            .unwrap();
            if x1 - x0 >= 30.0 {
                writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">({},{})</text>"#, f((x0 + x1) / 2.0), f(y + row_h / 2.0 + 4.0), b.load, b.installment).unwrap();
            }
        }
    }
    let axis_y = top + row_h * rows.len() as f64 + 4.0;
    writeln!(out, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, f(left), f(axis_y), f(left + plot_w), f(axis_y)).unwrap();
    for k in 0..=4 {
        let t = &total * Rational::new(k.into(), 4.into());
        let tx = x(&t);
        writeln!(out, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, f(tx), f(axis_y), f(tx), f(axis_y + 4.0)).unwrap();
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, f(tx), f(axis_y + 18.0), to_significant(&t, 4)).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// `q,makespan_num,makespan_den,makespan_float`, one line per point.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("q,makespan_num,makespan_den,makespan_float\n");
    for p in points {
        writeln!(out, "{},{},{},{}", p.q, p.makespan.numer(), p.makespan.denom(), to_decimal_string(&p.makespan)).unwrap();
    }
    out
}

/// Line chart of makespan against installment count.
pub fn sweep_svg(points: &[SweepPoint]) -> String {
    let (left, top, plot_w, plot_h) = (72.0, 16.0, 480.0, 240.0);
    let values: Vec<f64> = points.iter().map(|p| p.makespan.to_f64().unwrap_or(0.0)).collect();
    let hi = values.iter().cloned().fold(f64::MIN, f64::max);
    let lo = values.iter().cloned().fold(f64::MAX, f64::min);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let q_max = points.iter().map(|p| p.q).max().unwrap_or(1).max(2) as f64;
    let q_min = points.iter().map(|p| p.q).min().unwrap_or(1) as f64;
    let px = |q: usize| left + plot_w * (q as f64 - q_min) / (q_max - q_min).max(1.0);
    let py = |v: f64| top + plot_h * (1.0 - (v - lo) / span);

    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="monospace" font-size="11">"#, f(left + plot_w + 24.0), f(top + plot_h + 40.0)).unwrap();
    writeln!(out, r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#, f(left), f(top), f(plot_w), f(plot_h)).unwrap();
    let pts: Vec<String> = points.iter().zip(&values).map(|(p, v)| format!("{},{}", f(px(p.q)), f(py(*v)))).collect();
    writeln!(out, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#, pts.join(" "), PALETTE[0]).unwrap();
    for (p, v) in points.iter().zip(&values) {
        writeln!(out, r#"<circle cx="{}" cy="{}" r="3" fill="{}"><title>Q={} makespan {}</title></circle>"#, f(px(p.q)), f(py(*v)), PALETTE[0], p.q, to_exact_string(&p.makespan)).unwrap();
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, f(px(p.q)), f(top + plot_h + 16.0), p.q).unwrap();
    }
    for (v, label) in [(hi, hi), (lo, lo)] {
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{:.6}</text>"#, f(left - 4.0), f(py(v) + 4.0), label).unwrap();
    }
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">installments per load</text>"#, f(left + plot_w / 2.0), f(top + plot_h + 32.0)).unwrap();
    out.push_str("</svg>\n");
    out
}
