//! Barycentric SVG plots of three-label decisions.
//!
//! The simplex is cut into `resolution²` small triangles whose corners are
//! the lattice points `(a, b, c) / resolution`. Each triangle is filled
//! with the RGB color of its centroid and labeled with the decision's
//! choice there; edges between triangles with different labels are drawn
//! as region boundaries. Lattice points whose own label appears in none of
//! the surrounding triangles get a marker.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::decision::Decision;
use crate::instance::ProbVector;
use crate::rational::{self, ratio, Rational};
use crate::scheme::{scheme_assignment, TiePolicy, WeightScheme};

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("simplex plots need exactly 3 labels, got {0}")]
    NotThreeLabels(usize),
    #[error("resolution must be at least 1")]
    BadResolution,
    #[error("decision has no assignment for lattice point {0:?}")]
    MissingPoint(String),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

pub type Lattice = [u32; 3];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexCell {
    pub corners: [Lattice; 3],
    pub centroid: [Rational; 3],
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexRaster {
    pub resolution: u32,
    pub cells: Vec<SimplexCell>,
    /// Shared edges whose two cells carry different labels.
    pub boundaries: Vec<(Lattice, Lattice)>,
    /// Lattice points labeled differently from every adjacent cell.
    pub markers: Vec<(Lattice, usize)>,
}

/// What a plot shows.
pub enum PlotSource<'a> {
    Scheme(&'a WeightScheme, TiePolicy),
    /// A decision on the `simplex_grid(resolution)` instance, keyed by its ids.
    Decision(&'a Decision),
}

/// Label carrying the most mass, lowest index first.
fn dominant(v: &ProbVector) -> usize {
    let max = v.entries().iter().max().expect("non-empty");
    v.entries().iter().position(|x| x == max).expect("max present")
}

fn lattice_id(p: Lattice, n: u32) -> String {
    format!("({},{},{})/{n}", p[0], p[1], p[2])
}

fn cells(n: u32) -> Vec<[Lattice; 3]> {
    let mut out = Vec::with_capacity((n * n) as usize);
    for a in 0..n {
        for b in 0..n - a {
            let c = n - 1 - a - b;
            out.push([[a + 1, b, c], [a, b + 1, c], [a, b, c + 1]]);
        }
    }
    for a in 0..n.saturating_sub(1) {
        for b in 0..n - 1 - a {
            let c = n - 2 - a - b;
            out.push([[a + 1, b + 1, c], [a + 1, b, c + 1], [a, b + 1, c + 1]]);
        }
    }
    out
}

pub fn rasterize(source: &PlotSource, resolution: u32) -> Result<SimplexRaster, PlotError> {
    if resolution == 0 {
        return Err(PlotError::BadResolution);
    }
    let n = resolution;
    let point = |p: Lattice| {
        ProbVector::new(p.iter().map(|&v| ratio(v as i64, n as i64)).collect()).expect("lattice point")
    };
    let label_at_point = |p: Lattice| -> Result<usize, PlotError> {
        match source {
            PlotSource::Scheme(s, tie) => {
                Ok(dominant(&scheme_assignment(s, &point(p), *tie).expect("permitted set is non-empty")))
            }
            PlotSource::Decision(d) => {
                let id = lattice_id(p, n);
                d.get(&id).map(dominant).ok_or(PlotError::MissingPoint(id))
            }
        }
    };
    match source {
        PlotSource::Scheme(s, _) if s.n_labels() != 3 => return Err(PlotError::NotThreeLabels(s.n_labels())),
        PlotSource::Decision(d) => {
            if let Some((_, v)) = d.iter().next() {
                if v.len() != 3 {
                    return Err(PlotError::NotThreeLabels(v.len()));
                }
            }
        }
        _ => {}
    }

    let mut out = Vec::new();
    for corners in cells(n) {
        let centroid: [Rational; 3] = std::array::from_fn(|k| {
            ratio(corners.iter().map(|c| c[k] as i64).sum::<i64>(), 3 * n as i64)
        });
        let label = match source {
            PlotSource::Scheme(s, tie) => {
                let p = ProbVector::new(centroid.to_vec()).expect("centroid in simplex");
                dominant(&scheme_assignment(s, &p, *tie).expect("permitted set is non-empty"))
            }
            // Majority of the three corners; lowest label on a three-way split.
            PlotSource::Decision(_) => {
                let mut counts = [0u8; 3];
                for c in corners {
                    counts[label_at_point(c)?] += 1;
                }
                let best = *counts.iter().max().expect("three labels");
                counts.iter().position(|&c| c == best).expect("max present")
            }
        };
        out.push(SimplexCell { corners, centroid, label });
    }

    let mut edges: BTreeMap<(Lattice, Lattice), Vec<usize>> = BTreeMap::new();
    let mut around: BTreeMap<Lattice, Vec<usize>> = BTreeMap::new();
    for cell in &out {
        for k in 0..3 {
            let (a, b) = (cell.corners[k], cell.corners[(k + 1) % 3]);
            edges.entry((a.min(b), a.max(b))).or_default().push(cell.label);
            around.entry(cell.corners[k]).or_default().push(cell.label);
        }
    }
    let boundaries = edges
        .into_iter()
        .filter(|(_, ls)| ls.len() == 2 && ls[0] != ls[1])
        .map(|(e, _)| e)
        .collect();
    let mut markers = Vec::new();
    for (p, ls) in around {
        let own = label_at_point(p)?;
        if !ls.contains(&own) {
            markers.push((p, own));
        }
    }
    Ok(SimplexRaster {
        resolution,
        cells: out,
        boundaries,
        markers,
    })
}

const SIZE: f64 = 600.0;
const MARGIN: f64 = 30.0;

/// Screen position: first label at the top, second bottom-left, third bottom-right.
fn screen(p: [f64; 3]) -> (f64, f64) {
    let h = SIZE * 3f64.sqrt() / 2.0;
    let corners = [(SIZE / 2.0, 0.0), (0.0, h), (SIZE, h)];
    let x = p.iter().zip(&corners).map(|(w, c)| w * c.0).sum::<f64>();
    let y = p.iter().zip(&corners).map(|(w, c)| w * c.1).sum::<f64>();
    (x + MARGIN, y + MARGIN)
}

fn lattice_screen(p: Lattice, n: u32) -> (f64, f64) {
    screen(p.map(|v| v as f64 / n as f64))
}

fn rgb(c: &[Rational; 3]) -> String {
    let ch = |v: &Rational| (rational::to_f64(v) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", ch(&c[0]), ch(&c[1]), ch(&c[2]))
}

const LABEL_COLORS: [&str; 3] = ["#ff0000", "#00c000", "#0000ff"];

pub fn render_svg(raster: &SimplexRaster, labels: &[String]) -> String {
    let n = raster.resolution;
    let h = SIZE * 3f64.sqrt() / 2.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{hh:.0}" viewBox="0 0 {w:.0} {hh:.0}">"#,
        w = SIZE + 2.0 * MARGIN,
        hh = h + 2.0 * MARGIN + 20.0
    );
    let _ = writeln!(s, r#"<g id="cells" stroke="none">"#);
    for cell in &raster.cells {
        let pts: Vec<String> = cell
            .corners
            .iter()
            .map(|&c| {
                let (x, y) = lattice_screen(c, n);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{}" data-label="{}"/>"#,
            pts.join(" "),
            rgb(&cell.centroid),
            cell.label
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g id="boundaries" stroke="#000000" stroke-width="1.5">"##);
    for (a, b) in &raster.boundaries {
        let ((x1, y1), (x2, y2)) = (lattice_screen(*a, n), lattice_screen(*b, n));
        let _ = writeln!(s, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g id="markers" stroke="#000000">"##);
    for (p, l) in &raster.markers {
        let (x, y) = lattice_screen(*p, n);
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="5" fill="{}" data-label="{l}"/>"#,
            LABEL_COLORS[*l]
        );
    }
    let _ = writeln!(s, "</g>");
    let anchors = [(SIZE / 2.0 + MARGIN, MARGIN - 10.0), (MARGIN, h + MARGIN + 18.0), (SIZE + MARGIN, h + MARGIN + 18.0)];
    for (k, (x, y)) in anchors.iter().enumerate() {
        let name = labels.get(k).map(String::as_str).unwrap_or("");
        let _ = writeln!(
            s,
            r#"<text x="{x:.3}" y="{y:.3}" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
            escape(name)
        );
    }
    let _ = writeln!(s, "</svg>");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn plot_simplex(
    source: &PlotSource,
    labels: &[String],
    resolution: u32,
    path: impl AsRef<Path>,
) -> Result<SimplexRaster, PlotError> {
    if labels.len() != 3 {
        return Err(PlotError::NotThreeLabels(labels.len()));
    }
    let raster = rasterize(source, resolution)?;
    let path = path.as_ref();
    std::fs::write(path, render_svg(&raster, labels)).map_err(|source| PlotError::Write {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(raster)
}
