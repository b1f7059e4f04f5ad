//! Deterministic SVG plots: the quintic arc (both mirror copies), the
//! SL2(Z) fundamental-domain boundary, and one marker per data point.
//! Output is plain text with fixed-precision coordinates so identical
//! inputs produce byte-identical files.

use crate::error::{Error, Result};
use crate::hypgeo::psi_constants;
use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub width: u32,
    pub height: u32,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub arc_samples: usize,
    pub point_radius: f64,
}

impl Default for PlotSpec {
    fn default() -> Self {
        PlotSpec {
            width: 900,
            height: 620,
            x_range: (-0.62, 0.62),
            y_range: (0.80, 1.52),
            arc_samples: 400,
            point_radius: 2.5,
        }
    }
}

impl PlotSpec {
    pub fn validate(&self) -> Result<()> {
        if self.x_range.0 >= self.x_range.1 || self.y_range.0 >= self.y_range.1 {
            return Err(Error::Validation("plot ranges must be nonempty".into()));
        }
        if self.arc_samples < 2 {
            return Err(Error::Validation("arc sample count must be >= 2".into()));
        }
        Ok(())
    }

    fn to_px(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = f64::from(self.width) * (x - self.x_range.0) / (self.x_range.1 - self.x_range.0);
        let sy = f64::from(self.height) * (self.y_range.1 - y) / (self.y_range.1 - self.y_range.0);
        (sx, sy)
    }
}

fn path_from(points: &[(f64, f64)], spec: &PlotSpec) -> String {
    let mut d = String::new();
    for (i, &(x, y)) in points.iter().enumerate() {
        let (px, py) = spec.to_px(x, y);
        let _ = write!(d, "{}{px:.3} {py:.3}", if i == 0 { "M" } else { " L" });
    }
    d
}

/// Render the arc, the fundamental-domain boundary, and the data points.
pub fn render_svg(points: &[(f64, f64)], spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    let psi = psi_constants(96);
    let arc: Vec<(f64, f64)> = psi
        .sample(spec.arc_samples)
        .iter()
        .map(|z| (z.x.to_f64(), z.y.to_f64()))
        .collect();
    let mirror: Vec<(f64, f64)> = arc.iter().map(|&(x, y)| (-x, y)).collect();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        spec.width, spec.height, spec.width, spec.height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    // fundamental-domain boundary: |x| = 1/2 verticals and the unit circle
    for x in [-0.5f64, 0.5] {
        if x >= spec.x_range.0 && x <= spec.x_range.1 {
            let y_lo = spec.y_range.0.max((1.0 - x * x).max(0.0).sqrt());
            let (px0, py0) = spec.to_px(x, y_lo);
            let (px1, py1) = spec.to_px(x, spec.y_range.1);
            let _ = writeln!(
                svg,
                r##"<line x1="{px0:.3}" y1="{py0:.3}" x2="{px1:.3}" y2="{py1:.3}" stroke="#999999" stroke-width="1"/>"##
            );
        }
    }
    let circle: Vec<(f64, f64)> = (0..=200)
        .map(|i| {
            let x = -0.5 + f64::from(i) / 200.0;
            (x, (1.0 - x * x).max(0.0).sqrt())
        })
        .filter(|&(_, y)| y >= spec.y_range.0 && y <= spec.y_range.1)
        .collect();
    if circle.len() >= 2 {
        let _ = writeln!(
            svg,
            r##"<path d="{}" fill="none" stroke="#999999" stroke-width="1"/>"##,
            path_from(&circle, spec)
        );
    }

    for copy in [&arc, &mirror] {
        let _ = writeln!(
            svg,
            r##"<path d="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##,
            path_from(copy, spec)
        );
    }

    for &(x, y) in points {
        let (px, py) = spec.to_px(x, y);
        let _ = writeln!(
            svg,
            r##"<circle cx="{px:.3}" cy="{py:.3}" r="{:.2}" fill="#d62728" fill-opacity="0.75"/>"##,
            spec.point_radius
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Extract (x, y) pairs from a verify CSV (header with x and y columns) or a
/// bare two-column x,y file. Rows with empty x/y (general-p records) are
/// skipped; a malformed row fails with its line number.
pub fn points_from_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Ok(Vec::new());
    };
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let (xi, yi, has_header) =
        match (cols.iter().position(|c| *c == "x"), cols.iter().position(|c| *c == "y")) {
            (Some(xi), Some(yi)) => (xi, yi, true),
            _ => (0, 1, false),
        };
    let mut out = Vec::new();
    let mut parse_row = |lineno: usize, line: &str| -> Result<()> {
        if line.trim().is_empty() {
            return Ok(());
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let (Some(xs), Some(ys)) = (fields.get(xi), fields.get(yi)) else {
            return Err(Error::Parse(format!("line {lineno}: too few columns")));
        };
        if xs.is_empty() && ys.is_empty() {
            return Ok(());
        }
        let x: f64 = xs
            .parse()
            .map_err(|_| Error::Parse(format!("line {lineno}: bad x value '{xs}'")))?;
        let y: f64 = ys
            .parse()
            .map_err(|_| Error::Parse(format!("line {lineno}: bad y value '{ys}'")))?;
        out.push((x, y));
        Ok(())
    };
    if !has_header {
        parse_row(1, header)?;
    }
    for (i, line) in lines {
        parse_row(i + 1, line)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_deterministic_and_contains_parts() {
        let spec = PlotSpec::default();
        let pts = vec![(0.31, 1.43), (-0.5, 1.44)];
        let a = render_svg(&pts, &spec).unwrap();
        let b = render_svg(&pts, &spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.matches("<circle").count(), 2);
        // two arc copies plus the unit-circle boundary
        assert_eq!(a.matches("<path").count(), 3);
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
    }

    #[test]
    fn empty_points_gives_arc_only() {
        let svg = render_svg(&[], &PlotSpec::default()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 0);
        assert!(svg.matches("<path").count() >= 2);
    }

    #[test]
    fn bad_spec_rejected() {
        let spec = PlotSpec {
            arc_samples: 1,
            ..PlotSpec::default()
        };
        assert!(render_svg(&[], &spec).is_err());
        let spec = PlotSpec {
            x_range: (1.0, -1.0),
            ..PlotSpec::default()
        };
        assert!(render_svg(&[], &spec).is_err());
    }

    #[test]
    fn csv_parsing() {
        let text = "label,x,y,circle_residual\nA,0.31,1.43,1e-12\nB,,,\n";
        let pts = points_from_csv(text).unwrap();
        assert_eq!(pts, vec![(0.31, 1.43)]);

        let bare = "0.1,1.2\n0.2,1.3\n";
        assert_eq!(points_from_csv(bare).unwrap().len(), 2);

        let bad = "label,x,y\nA,zzz,1.0\n";
        let err = points_from_csv(bad).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
