//! CSV tables and SVG plots of embeddings and variance curves.

use std::fmt::Write as _;

use super::Embedding;
use crate::dataset::CentroidSet;
use crate::error::{Error, Result};

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#637939",
];

/// Fixed colour for class `j`; cycles after twelve classes.
pub fn class_color(class: usize) -> &'static str {
    PALETTE[class % PALETTE.len()]
}

/// Columns `label, y1, y2[, y3, ...]`, labels written as class names.
pub fn embedding_csv(embedding: &Embedding, class_names: &[String]) -> Result<String> {
    let mut out = String::from("label");
    for d in 1..=embedding.dim() {
        let _ = write!(out, ",y{d}");
    }
    out.push('\n');
    for (row, &l) in embedding.points.row_iter().zip(&embedding.labels) {
        let name = class_names
            .get(l)
            .ok_or_else(|| Error::contract(format!("no name for class {l}")))?;
        out.push_str(&csv_field(name));
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Columns `dimension, cumulative_fraction`, dimensions counted from 1.
pub fn variance_csv(curve: &[f64]) -> String {
    let mut out = String::from("dimension,cumulative_fraction\n");
    for (d, f) in curve.iter().enumerate() {
        let _ = writeln!(out, "{},{f}", d + 1);
    }
    out
}

const SIZE: f64 = 600.0;
const MARGIN: f64 = 40.0;
const GRID: usize = 120;

struct Frame {
    x0: f64,
    y0: f64,
    scale: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        let span = (xmax - xmin).max(ymax - ymin).max(1e-12);
        let pad = 0.05 * span;
        Self {
            x0: xmin - pad,
            y0: ymin - pad,
            scale: (SIZE - 2.0 * MARGIN) / (span + 2.0 * pad),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) * self.scale
    }

    fn py(&self, y: f64) -> f64 {
        SIZE - MARGIN - (y - self.y0) * self.scale
    }

    fn data_x(&self, px: f64) -> f64 {
        self.x0 + (px - MARGIN) / self.scale
    }

    fn data_y(&self, py: f64) -> f64 {
        self.y0 + (SIZE - MARGIN - py) / self.scale
    }
}

/// Scatter plot of a 2-D embedding. With `sites`, the plot area is shaded
/// by nearest site and the sites are drawn as crosses.
pub fn embedding_svg(embedding: &Embedding, class_names: &[String], sites: Option<&CentroidSet>) -> Result<String> {
    if embedding.dim() != 2 {
        return Err(Error::contract(format!("cannot plot a {}-D embedding", embedding.dim())));
    }
    if embedding.is_empty() {
        return Err(Error::Data("nothing to plot".into()));
    }
    let mut coords: Vec<(f64, f64)> = embedding.points.row_iter().map(|r| (r[0], r[1])).collect();
    if let Some(s) = sites {
        coords.extend(s.centroids.row_iter().map(|r| (r[0], r[1])));
    }
    let frame = Frame::fit(coords.iter().copied());
    let mut svg = header("embedding");

    if let Some(s) = sites {
        let cell = (SIZE - 2.0 * MARGIN) / GRID as f64;
        let _ = writeln!(svg, "<g opacity=\"0.18\">");
        for gy in 0..GRID {
            let cy = MARGIN + (gy as f64 + 0.5) * cell;
            let owners: Vec<usize> = (0..GRID)
                .map(|gx| {
                    let cx = MARGIN + (gx as f64 + 0.5) * cell;
                    s.nearest(&[frame.data_x(cx), frame.data_y(cy)])
                })
                .collect();
            let mut start = 0;
            while start < GRID {
                let owner = owners[start];
                let mut end = start + 1;
                while end < GRID && owners[end] == owner {
                    end += 1;
                }
                let _ = writeln!(
                    svg,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                    MARGIN + start as f64 * cell,
                    MARGIN + gy as f64 * cell,
                    (end - start) as f64 * cell,
                    cell,
                    class_color(owner)
                );
                start = end;
            }
        }
        svg.push_str("</g>\n");
    }

    let _ = writeln!(svg, "<g>");
    for (row, &l) in embedding.points.row_iter().zip(&embedding.labels) {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{}\"/>",
            frame.px(row[0]),
            frame.py(row[1]),
            class_color(l)
        );
    }
    svg.push_str("</g>\n");

    if let Some(s) = sites {
        for (j, c) in s.centroids.row_iter().enumerate() {
            let (x, y) = (frame.px(c[0]), frame.py(c[1]));
            let _ = writeln!(
                svg,
                "<path d=\"M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}\" stroke=\"black\" stroke-width=\"2.5\"/>",
                x - 7.0,
                y - 7.0,
                x + 7.0,
                y + 7.0,
                x - 7.0,
                y + 7.0,
                x + 7.0,
                y - 7.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\">{}</text>",
                x + 9.0,
                y - 9.0,
                xml_escape(class_names.get(j).map_or("?", String::as_str))
            );
        }
    }
    legend(&mut svg, (0..embedding.n_classes).map(|j| (class_color(j), class_names.get(j).map_or("?", String::as_str))));
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Line plot of one or more cumulative variance curves on `[0, 1]`.
pub fn variance_svg(curves: &[(&str, &[f64])]) -> Result<String> {
    let n = curves.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    if n == 0 {
        return Err(Error::Data("no variance curves to plot".into()));
    }
    let w = SIZE - 2.0 * MARGIN;
    let px = |d: usize| MARGIN + if n == 1 { 0.5 * w } else { (d as f64) * w / (n - 1) as f64 };
    let py = |f: f64| SIZE - MARGIN - f * w;
    let mut svg = header("variance");
    let _ = writeln!(
        svg,
        "<path d=\"M{MARGIN},{MARGIN}V{b}H{r}\" fill=\"none\" stroke=\"black\"/>",
        b = SIZE - MARGIN,
        r = SIZE - MARGIN
    );
    for (k, (_, curve)) in curves.iter().enumerate() {
        let mut d = String::new();
        for (i, &f) in curve.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { 'M' } else { 'L' }, px(i), py(f));
        }
        let _ = writeln!(
            svg,
            "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>",
            class_color(k)
        );
    }
    legend(&mut svg, curves.iter().enumerate().map(|(k, (name, _))| (class_color(k), *name)));
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <title>{title}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn legend<'a>(svg: &mut String, entries: impl Iterator<Item = (&'a str, &'a str)>) {
    for (i, (color, name)) in entries.enumerate() {
        let y = 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{color}\"/><text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>",
            SIZE - 110.0,
            y - 9.0,
            SIZE - 95.0,
            y,
            xml_escape(name)
        );
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::voronoi_sites;
    use crate::numerics::Matrix;

    fn toy() -> (Embedding, Vec<String>) {
        let pts = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.5], [4.0, 4.0], [5.0, 3.5]]).unwrap();
        let e = Embedding::new(pts, vec![0, 0, 1, 1], 2).unwrap();
        (e, vec!["a,b".to_string(), "B".to_string()])
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let (e, names) = toy();
        let csv = embedding_csv(&e, &names).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "label,y1,y2");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "\"a,b\",0,0");
        assert_eq!(lines[4], "B,5,3.5");
    }

    #[test]
    fn variance_table() {
        assert_eq!(variance_csv(&[0.75, 1.0]), "dimension,cumulative_fraction\n1,0.75\n2,1\n");
    }

    #[test]
    fn svg_is_stable_and_colours_by_class() {
        let (e, names) = toy();
        let sites = voronoi_sites(&e).unwrap();
        let a = embedding_svg(&e, &names, Some(&sites)).unwrap();
        let b = embedding_svg(&e, &names, Some(&sites)).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(class_color(0)) && a.contains(class_color(1)));
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
        let three = Embedding::new(Matrix::zeros(1, 3), vec![0], 1).unwrap();
        assert!(embedding_svg(&three, &names, None).is_err());
    }

    #[test]
    fn variance_plot() {
        let svg = variance_svg(&[("raw", &[0.2, 0.5, 1.0]), ("ce", &[0.9, 1.0, 1.0])]).unwrap();
        assert!(svg.contains("raw") && svg.contains("ce"));
        assert!(variance_svg(&[]).is_err());
    }
}
