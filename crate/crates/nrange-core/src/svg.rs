//! Tiny self-contained SVG writer for pictures of the unit disk: regions,
//! chords, and point markers, on a fixed 1000×1000 canvas.

use crate::numrange::{ConvexRegion, SupportLine};
use crate::C64;

const CANVAS: f64 = 1000.0;
const RADIUS: f64 = 450.0;
const CENTER: f64 = 500.0;

/// Maps a point of the closed unit disk to canvas coordinates (y flipped so
/// the upper half-plane is up).
fn place(z: C64) -> (f64, f64) {
    (CENTER + RADIUS * z.re, CENTER - RADIUS * z.im)
}

/// An SVG picture of the unit disk, assembled element by element.
pub struct DiskPicture {
    elements: Vec<String>,
}

impl DiskPicture {
    /// Empty picture with the unit circle drawn as a backdrop.
    pub fn new() -> Self {
        let mut picture = Self { elements: Vec::new() };
        picture.elements.push(format!(
            "<circle cx=\"{CENTER}\" cy=\"{CENTER}\" r=\"{RADIUS}\" fill=\"none\" \
             stroke=\"#888\" stroke-width=\"1.5\"/>"
        ));
        picture
    }

    /// Filled region from its boundary polyline.
    pub fn region(&mut self, region: &ConvexRegion, fill: &str, stroke: &str) {
        let boundary = region.boundary();
        if boundary.is_empty() {
            return;
        }
        let mut d = String::new();
        for (i, &z) in boundary.iter().enumerate() {
            let (x, y) = place(z);
            let op = if i == 0 { 'M' } else { 'L' };
            d.push_str(&format!("{op}{x:.3} {y:.3} "));
        }
        d.push('Z');
        self.elements.push(format!(
            "<path d=\"{d}\" fill=\"{fill}\" fill-opacity=\"0.35\" stroke=\"{stroke}\" \
             stroke-width=\"2\"/>"
        ));
    }

    /// The chord a support line cuts out of the disk (skipped when the line
    /// misses the disk).
    pub fn chord(&mut self, line: &SupportLine, stroke: &str) {
        if let Some((a, b)) = line.chord_endpoints() {
            let (x1, y1) = place(a);
            let (x2, y2) = place(b);
            self.elements.push(format!(
                "<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" \
                 stroke=\"{stroke}\" stroke-width=\"1\" stroke-opacity=\"0.6\"/>"
            ));
        }
    }

    /// Dot markers, e.g. eigenvalues or Blaschke zeros.
    pub fn points(&mut self, points: &[C64], fill: &str) {
        for &z in points {
            let (x, y) = place(z);
            self.elements.push(format!(
                "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"4\" fill=\"{fill}\"/>"
            ));
        }
    }

    /// Cross markers on the circle, e.g. boundary point masses.
    pub fn circle_marks(&mut self, angles: &[f64], stroke: &str) {
        for &t in angles {
            let (x, y) = place(C64::from_polar(1.0, t));
            self.elements.push(format!(
                "<path d=\"M{:.3} {:.3} L{:.3} {:.3} M{:.3} {:.3} L{:.3} {:.3}\" \
                 stroke=\"{stroke}\" stroke-width=\"2\"/>",
                x - 6.0,
                y - 6.0,
                x + 6.0,
                y + 6.0,
                x - 6.0,
                y + 6.0,
                x + 6.0,
                y - 6.0,
            ));
        }
    }

    /// The complete SVG document.
    pub fn render(&self) -> String {
        let mut out = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CANVAS}\" height=\"{CANVAS}\" \
             viewBox=\"0 0 {CANVAS} {CANVAS}\">\n<rect width=\"{CANVAS}\" height=\"{CANVAS}\" \
             fill=\"white\"/>\n"
        );
        for element in &self.elements {
            out.push_str(element);
            out.push('\n');
        }
        out.push_str("</svg>\n");
        out
    }
}

impl Default for DiskPicture {
    fn default() -> Self {
        Self::new()
    }
}
