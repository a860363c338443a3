//! Quiver plots of transition rates over the phase-space grid.
//!
//! `a1` runs horizontally and `a2` vertically (upwards). Each phase point
//! gets a dot whose radius grows with `|W|`; arrows are drawn only out of
//! points where `W` is nonzero.

use std::fmt::Write as _;

use qphase::{PhasePoint, Prime, RateMatrix, WignerFunction};

use crate::CliError;

/// Rates below this fraction of the largest `|r|` are not drawn.
pub const ARROW_CUTOFF: f64 = 0.02;

const CELL: f64 = 80.0;
const MARGIN: f64 = 60.0;
const MIN_RADIUS: f64 = 4.0;
const MAX_RADIUS: f64 = 16.0;
const MAX_WIDTH: f64 = 6.0;
const MIN_WIDTH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Dot {
    pub point: PhasePoint,
    pub w: f64,
    pub radius: f64,
    /// `|W|` above the threshold.
    pub large: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arrow {
    pub from: PhasePoint,
    pub to: PhasePoint,
    pub rate: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuiverScene {
    pub n: Prime,
    pub dots: Vec<Dot>,
    pub arrows: Vec<Arrow>,
}

impl QuiverScene {
    /// `threshold` decides which `W` values count as nonzero.
    pub fn new(w: &WignerFunction, r: &RateMatrix, threshold: f64) -> Result<Self, CliError> {
        let n = w.n();
        if r.n() != n {
            return Err(CliError::Usage(format!(
                "rates are for N = {} but the Wigner function is for N = {}",
                r.n(),
                n
            )));
        }
        let max_w = w.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dots = n
            .points()
            .map(|p| {
                let v = w.get(p);
                let frac = if max_w > 0.0 { v.abs() / max_w } else { 0.0 };
                Dot {
                    point: p,
                    w: v,
                    radius: MIN_RADIUS + (MAX_RADIUS - MIN_RADIUS) * frac,
                    large: v.abs() > threshold,
                }
            })
            .collect::<Vec<_>>();

        let rm = r.matrix();
        let max_r = rm.max_abs();
        let mut arrows = Vec::new();
        if max_r > 0.0 {
            for dot in dots.iter().filter(|d| d.large) {
                let g = dot.point.index();
                for a in n.points() {
                    let rate = rm[(a.index(), g)];
                    if a.index() == g || rate.abs() < ARROW_CUTOFF * max_r {
                        continue;
                    }
                    arrows.push(Arrow {
                        from: dot.point,
                        to: a,
                        rate,
                        width: (MAX_WIDTH * rate.abs() / max_r).max(MIN_WIDTH),
                    });
                }
            }
        }
        Ok(QuiverScene { n, dots, arrows })
    }

    fn x(&self, p: PhasePoint) -> f64 {
        MARGIN + p.a1.value() as f64 * CELL
    }

    fn y(&self, p: PhasePoint) -> f64 {
        MARGIN + (self.n.get() - 1 - p.a2.value()) as f64 * CELL
    }

    pub fn to_svg(&self) -> String {
        let span = (self.n.get() - 1) as f64 * CELL;
        let size = 2.0 * MARGIN + span;
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size:.0}" height="{size:.0}" viewBox="0 0 {size:.0} {size:.0}">"#
        );
        s.push_str(
            r##"  <defs>
    <marker id="head-positive" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="4" markerHeight="4" orient="auto">
      <path d="M0,0 L10,5 L0,10 z" fill="#1f5fa8"/>
    </marker>
    <marker id="head-negative" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="4" markerHeight="4" orient="auto">
      <path d="M0,0 L10,5 L0,10 z" fill="#b2182b"/>
    </marker>
  </defs>
  <rect width="100%" height="100%" fill="white"/>
"##,
        );

        // axes
        let base = MARGIN + span + 30.0;
        let _ = writeln!(
            s,
            r#"  <text class="axis-label" x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">a1</text>"#,
            MARGIN + span / 2.0,
            base + 20.0
        );
        let _ = writeln!(
            s,
            r#"  <text class="axis-label" x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">a2</text>"#,
            MARGIN - 45.0,
            MARGIN + span / 2.0
        );
        for k in 0..self.n.get() {
            let offset = k as f64 * CELL;
            let _ = writeln!(
                s,
                r#"  <text class="tick" x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{k}</text>"#,
                MARGIN + offset,
                base
            );
            let _ = writeln!(
                s,
                r#"  <text class="tick" x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{k}</text>"#,
                MARGIN - 30.0,
                MARGIN + span - offset + 4.0
            );
        }

        for a in &self.arrows {
            let (x1, y1) = (self.x(a.from), self.y(a.from));
            let (x2, y2) = (self.x(a.to), self.y(a.to));
            let len = ((x2 - x1).powi(2) + (y2 - y1).powi(2)).sqrt();
            let radius_to = self.dots[a.to.index()].radius;
            let radius_from = self.dots[a.from.index()].radius;
            let (ux, uy) = ((x2 - x1) / len, (y2 - y1) / len);
            let (sx, sy) = (x1 + ux * radius_from, y1 + uy * radius_from);
            let (ex, ey) = (x2 - ux * (radius_to + 3.0), y2 - uy * (radius_to + 3.0));
            let (class, color, dash, head) = if a.rate > 0.0 {
                ("arrow positive", "#1f5fa8", "", "head-positive")
            } else {
                (
                    "arrow negative",
                    "#b2182b",
                    r#" stroke-dasharray="6 4""#,
                    "head-negative",
                )
            };
            let _ = writeln!(
                s,
                r#"  <line class="{class}" data-from="{}" data-to="{}" data-rate="{:.6}" x1="{sx:.2}" y1="{sy:.2}" x2="{ex:.2}" y2="{ey:.2}" stroke="{color}" stroke-width="{:.2}"{dash} marker-end="url(#{head})"/>"#,
                a.from.index(),
                a.to.index(),
                a.rate,
                a.width
            );
        }

        for d in &self.dots {
            let class = if d.large { "dot large" } else { "dot" };
            let fill = if d.w < 0.0 { "white" } else { "black" };
            let _ = writeln!(
                s,
                r#"  <circle class="{class}" data-a1="{}" data-a2="{}" data-w="{:.6}" cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{fill}" stroke="black" stroke-width="1"/>"#,
                d.point.a1.value(),
                d.point.a2.value(),
                d.w,
                self.x(d.point),
                self.y(d.point),
                d.radius
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qphase::RealMatrix;

    #[test]
    fn arrows_only_from_occupied_points() {
        let n = Prime::new(3).unwrap();
        let mut r = RealMatrix::zeros(9);
        r[(1, 0)] = 1.0;
        r[(0, 1)] = -1.0;
        r[(4, 3)] = 0.01; // under the cutoff
        let r = RateMatrix::new(n, r, 1.0).unwrap();
        let w = WignerFunction::point_mass(n.point(0, 0));
        let scene = QuiverScene::new(&w, &r, 1e-12).unwrap();
        assert_eq!(scene.dots.len(), 9);
        assert_eq!(scene.dots.iter().filter(|d| d.large).count(), 1);
        assert_eq!(scene.arrows.len(), 1);
        assert_eq!(scene.arrows[0].to, n.point(0, 1));
        let svg = scene.to_svg();
        assert_eq!(svg.matches("<circle").count(), 9);
        assert_eq!(svg.matches(r#"class="arrow positive""#).count(), 1);
    }

    #[test]
    fn a2_points_up() {
        let n = Prime::new(3).unwrap();
        let w = WignerFunction::uniform(n);
        let scene = QuiverScene::new(&w, &RateMatrix::zeros(n), 1e-12).unwrap();
        assert!(scene.y(n.point(0, 2)) < scene.y(n.point(0, 0)));
        assert!(scene.x(n.point(2, 0)) > scene.x(n.point(0, 0)));
        assert!(scene.arrows.is_empty());
    }
}
