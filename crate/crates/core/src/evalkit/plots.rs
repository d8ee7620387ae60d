//! SVG charts: F1 against epoch per configuration, and similarity against F1.

use std::path::Path;

use plotters::prelude::*;

use super::EvalError;

const PALETTE: [RGBColor; 7] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
    RGBColor(227, 119, 194),
];

fn plot_err<E: std::fmt::Display>(e: E) -> EvalError {
    EvalError::Plot(e.to_string())
}

/// One line per named series; x is the 1-based epoch.
pub fn f1_curves(path: &Path, title: &str, series: &[(String, Vec<f64>)]) -> Result<(), EvalError> {
    let epochs = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0).max(1);
    let root = SVGBackend::new(path, (720, 440)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(48)
        .build_cartesian_2d(1f64..(epochs as f64).max(2.0), 0f64..1.0)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("epoch")
        .y_desc("F1")
        .draw()
        .map_err(plot_err)?;
    for (i, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(
                values.iter().enumerate().map(|(e, &f)| ((e + 1) as f64, f)),
                color.stroke_width(2),
            ))
            .map_err(plot_err)?
            .label(name.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .position(SeriesLabelPosition::LowerRight)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

/// Labelled points of (similarity, F1).
pub fn similarity_scatter(path: &Path, title: &str, points: &[(String, f64, f64)]) -> Result<(), EvalError> {
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, x, y) in points {
        xmin = xmin.min(*x);
        xmax = xmax.max(*x);
        ymin = ymin.min(*y);
        ymax = ymax.max(*y);
    }
    if points.is_empty() {
        (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| {
        let p = ((hi - lo) * 0.15).max(0.02);
        (lo - p)..(hi + p)
    };
    let root = SVGBackend::new(path, (720, 440)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(56)
        .build_cartesian_2d(pad(xmin, xmax), pad(ymin, ymax))
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("similarity")
        .y_desc("F1")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(points.iter().enumerate().map(|(i, (name, x, y))| {
            let color = PALETTE[i % PALETTE.len()];
            EmptyElement::at((*x, *y))
                + Circle::new((0, 0), 5, color.filled())
                + Text::new(name.clone(), (8, -8), ("sans-serif", 12))
        }))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_svg_files() {
        let dir = tempfile::tempdir().unwrap();
        let curve = dir.path().join("f1.svg");
        f1_curves(
            &curve,
            "F1",
            &[
                ("all-4".into(), vec![0.5, 0.8, 0.9]),
                ("text-only".into(), vec![0.5, 0.6]),
            ],
        )
        .unwrap();
        let text = std::fs::read_to_string(&curve).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.contains("all-4"));
        let scatter = dir.path().join("s.svg");
        similarity_scatter(
            &scatter,
            "sim",
            &[("article".into(), 0.86, 0.8474), ("all-4".into(), 0.61, 0.9478)],
        )
        .unwrap();
        assert!(std::fs::read_to_string(&scatter).unwrap().contains("article"));
    }
}
