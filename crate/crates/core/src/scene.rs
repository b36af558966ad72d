//! Investigation-domain grid, canonical phantoms and measurement geometry.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;
/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability (H/m).
pub const MU0: f64 = 1.256_637_062_12e-6;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("side length must be positive (got {0})")]
    NonPositiveSide(f64),
    #[error("grid needs at least 2 cells per side (got {0})")]
    TooFewCells(usize),
    #[error("phantom extends outside the investigation domain (extent {extent:.4} m, half-side {half:.4} m)")]
    PhantomOutOfBounds { extent: f64, half: f64 },
    #[error("frequency must be positive (got {0})")]
    NonPositiveFrequency(f64),
    #[error("measurement ring needs at least one transmitter and one receiver")]
    EmptyRing,
    #[error("ring radius {radius:.4} m lies inside the domain (circumradius {circum:.4} m)")]
    RingInsideDomain { radius: f64, circum: f64 },
}

/// A point in the transverse plane (meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x)
    }
}

/// Square investigation domain [-L/2, L/2]^2 tiled by n x n cells.
#[derive(Debug, Clone)]
pub struct Grid {
    /// Domain side length (m).
    pub side: f64,
    /// Cells per side; the grid holds n^2 cells.
    pub n: usize,
    /// Cell side Delta = L/n (m).
    pub cell_size: f64,
    /// Radius of the equal-area disc: pi a^2 = Delta^2.
    pub cell_radius: f64,
    centers: Vec<Point>,
}

impl Grid {
    pub fn num_cells(&self) -> usize {
        self.n * self.n
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_size * self.cell_size
    }

    /// Cell centers in row-major order (y varies slowest, from -L/2 side up).
    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn center(&self, idx: usize) -> Point {
        self.centers[idx]
    }

    /// Row/column of a flat cell index.
    pub fn row_col(&self, idx: usize) -> (usize, usize) {
        (idx / self.n, idx % self.n)
    }

    /// Circumradius of the domain: the default enclosing-ball radius.
    pub fn enclosing_radius(&self) -> f64 {
        self.side / std::f64::consts::SQRT_2
    }
}

/// Build the n x n grid over a square of side `side` centered at the origin.
pub fn make_grid(side: f64, n: usize) -> Result<Grid, SceneError> {
    if !(side > 0.0) {
        return Err(SceneError::NonPositiveSide(side));
    }
    if n < 2 {
        return Err(SceneError::TooFewCells(n));
    }
    let cell = side / n as f64;
    let mut centers = Vec::with_capacity(n * n);
    for iy in 0..n {
        let y = -side / 2.0 + (iy as f64 + 0.5) * cell;
        for ix in 0..n {
            let x = -side / 2.0 + (ix as f64 + 0.5) * cell;
            centers.push(Point::new(x, y));
        }
    }
    Ok(Grid {
        side,
        n,
        cell_size: cell,
        cell_radius: cell / PI.sqrt(),
        centers,
    })
}

/// Frequency, background medium and the transceiver ring on Gamma.
#[derive(Debug, Clone)]
pub struct MeasurementSetup {
    pub frequency: f64,
    pub eps_b: f64,
    pub mu_b: f64,
    /// Background wavenumber k_b = omega sqrt(mu_b eps_b) (rad/m).
    pub k_b: f64,
    /// Background wavelength (m).
    pub lambda_b: f64,
    /// Ring radius (m).
    pub ring_radius: f64,
    pub transmitters: Vec<Point>,
    pub receivers: Vec<Point>,
    /// Radius of a ball enclosing the investigation domain, when set
    /// explicitly; defaults to the grid circumradius where needed.
    pub enclosing_radius: Option<f64>,
}

impl MeasurementSetup {
    pub fn num_views(&self) -> usize {
        self.transmitters.len()
    }

    pub fn num_receivers(&self) -> usize {
        self.receivers.len()
    }
}

/// Equiangular transmitter/receiver rings of radius `ring_radius`, free-space
/// parameters unless eps_b/mu_b override them. Receivers are rotated half a
/// step relative to transmitters so the two rings never coincide.
pub fn make_setup(
    frequency: f64,
    eps_b: f64,
    mu_b: f64,
    ring_radius: f64,
    num_tx: usize,
    num_rx: usize,
) -> Result<MeasurementSetup, SceneError> {
    if !(frequency > 0.0) {
        return Err(SceneError::NonPositiveFrequency(frequency));
    }
    if num_tx == 0 || num_rx == 0 {
        return Err(SceneError::EmptyRing);
    }
    if !(ring_radius > 0.0) {
        return Err(SceneError::RingInsideDomain {
            radius: ring_radius,
            circum: 0.0,
        });
    }
    let omega = 2.0 * PI * frequency;
    let k_b = omega * (mu_b * eps_b).sqrt();
    let ring = |count: usize, offset: f64| -> Vec<Point> {
        (0..count)
            .map(|i| {
                let th = 2.0 * PI * (i as f64 + offset) / count as f64;
                Point::new(ring_radius * th.cos(), ring_radius * th.sin())
            })
            .collect()
    };
    Ok(MeasurementSetup {
        frequency,
        eps_b,
        mu_b,
        k_b,
        lambda_b: 2.0 * PI / k_b,
        ring_radius,
        transmitters: ring(num_tx, 0.0),
        receivers: ring(num_rx, 0.5),
        enclosing_radius: None,
    })
}

/// Free-space convenience wrapper.
pub fn make_setup_free_space(
    frequency: f64,
    ring_radius: f64,
    num_tx: usize,
    num_rx: usize,
) -> Result<MeasurementSetup, SceneError> {
    make_setup(frequency, EPS0, MU0, ring_radius, num_tx, num_rx)
}

/// Checks the ring clears the domain circumradius; call where grid and setup
/// first meet.
pub fn check_ring_clearance(grid: &Grid, setup: &MeasurementSetup) -> Result<(), SceneError> {
    let circum = grid.enclosing_radius();
    if setup.ring_radius <= circum {
        return Err(SceneError::RingInsideDomain {
            radius: setup.ring_radius,
            circum,
        });
    }
    Ok(())
}

/// Complex contrast chi on the grid cells, row-major.
#[derive(Debug, Clone)]
pub struct ContrastMap {
    pub values: Vec<Complex64>,
}

impl ContrastMap {
    pub fn zeros(num_cells: usize) -> Self {
        ContrastMap {
            values: vec![Complex64::new(0.0, 0.0); num_cells],
        }
    }

    /// Indices of cells with nonzero contrast.
    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Canonical test targets. Dimensions are relative to the domain side L so
/// a phantom scales with the scene it is placed in.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phantom {
    /// The standard inverse-scattering kite curve, scaled so its bounding
    /// box spans `fill` * L (default 0.8) and centered in the domain.
    Kite {
        chi: Complex64,
        #[serde(default = "default_fill")]
        fill: f64,
    },
    /// Two discs above a ring: the classical benchmark layout
    /// (discs r = 0.2 L/2 at (+-0.3, 0.6) L/2; ring outer 0.6 L/2,
    /// inner 0.3 L/2, centered (0, -0.2) L/2).
    Austria { chi: Complex64 },
    /// Homogeneous disc. Radius and center in meters.
    Circle {
        chi: Complex64,
        radius: f64,
        #[serde(default)]
        center: (f64, f64),
    },
    /// Two homogeneous discs (e.g. twin dielectric cylinders).
    TwoCircles {
        chi: Complex64,
        radius: f64,
        centers: [(f64, f64); 2],
    },
    /// Concentric discs with distinct contrasts (outer shell hosts inner).
    NestedCircles {
        outer_chi: Complex64,
        outer_radius: f64,
        inner_chi: Complex64,
        inner_radius: f64,
        #[serde(default)]
        center: (f64, f64),
    },
}

fn default_fill() -> f64 {
    0.8
}

/// Kite boundary polygon: x(t) = cos t + 0.65 cos 2t - 0.65, y(t) = 1.5 sin t,
/// rescaled/centered per `fill`.
fn kite_polygon(side: f64, fill: f64) -> Vec<Point> {
    let samples = 720;
    let raw: Vec<Point> = (0..samples)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / samples as f64;
            Point::new(t.cos() + 0.65 * (2.0 * t).cos() - 0.65, 1.5 * t.sin())
        })
        .collect();
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in &raw {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    let scale = fill * side / (xmax - xmin).max(ymax - ymin);
    let cx = 0.5 * (xmin + xmax);
    let cy = 0.5 * (ymin + ymax);
    raw.iter()
        .map(|p| Point::new((p.x - cx) * scale, (p.y - cy) * scale))
        .collect()
}

/// Even-odd ray-casting point-in-polygon test.
fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

impl Phantom {
    /// Contrast at a point, for a phantom placed in a domain of side L.
    pub fn contrast_at(&self, p: Point, side: f64) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Phantom::Kite { chi, fill } => {
                let poly = kite_polygon(side, *fill);
                if point_in_polygon(p, &poly) {
                    *chi
                } else {
                    zero
                }
            }
            Phantom::Austria { chi } => {
                let h = side / 2.0;
                let in_disc = |cx: f64, cy: f64, r: f64| p.dist(Point::new(cx, cy)) <= r;
                let discs =
                    in_disc(0.3 * h, 0.6 * h, 0.2 * h) || in_disc(-0.3 * h, 0.6 * h, 0.2 * h);
                let d_ring = p.dist(Point::new(0.0, -0.2 * h));
                let ring = d_ring <= 0.6 * h && d_ring >= 0.3 * h;
                if discs || ring {
                    *chi
                } else {
                    zero
                }
            }
            Phantom::Circle {
                chi,
                radius,
                center,
            } => {
                if p.dist(Point::new(center.0, center.1)) <= *radius {
                    *chi
                } else {
                    zero
                }
            }
            Phantom::TwoCircles {
                chi,
                radius,
                centers,
            } => {
                for c in centers {
                    if p.dist(Point::new(c.0, c.1)) <= *radius {
                        return *chi;
                    }
                }
                zero
            }
            Phantom::NestedCircles {
                outer_chi,
                outer_radius,
                inner_chi,
                inner_radius,
                center,
            } => {
                let d = p.dist(Point::new(center.0, center.1));
                if d <= *inner_radius {
                    *inner_chi
                } else if d <= *outer_radius {
                    *outer_chi
                } else {
                    zero
                }
            }
        }
    }

    /// Largest |coordinate| the phantom can reach in a domain of side L.
    fn extent(&self, side: f64) -> f64 {
        match self {
            Phantom::Kite { fill, .. } => 0.5 * fill * side,
            Phantom::Austria { .. } => 0.8 * side / 2.0,
            Phantom::Circle { radius, center, .. } => center.0.abs().max(center.1.abs()) + radius,
            Phantom::TwoCircles {
                radius, centers, ..
            } => centers
                .iter()
                .map(|c| c.0.abs().max(c.1.abs()) + radius)
                .fold(0.0, f64::max),
            Phantom::NestedCircles {
                outer_radius,
                center,
                ..
            } => center.0.abs().max(center.1.abs()) + outer_radius,
        }
    }
}

/// Rasterize a phantom onto a grid by the cell-center membership test.
pub fn rasterize(phantom: &Phantom, grid: &Grid) -> Result<ContrastMap, SceneError> {
    let half = grid.side / 2.0;
    let extent = phantom.extent(grid.side);
    if extent >= half {
        return Err(SceneError::PhantomOutOfBounds { extent, half });
    }
    // The kite polygon is rebuilt per cell in contrast_at; hoist it here.
    let values = match phantom {
        Phantom::Kite { chi, fill } => {
            let poly = kite_polygon(grid.side, *fill);
            grid.centers()
                .iter()
                .map(|&p| {
                    if point_in_polygon(p, &poly) {
                        *chi
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        }
        _ => grid
            .centers()
            .iter()
            .map(|&p| phantom.contrast_at(p, grid.side))
            .collect(),
    };
    Ok(ContrastMap { values })
}
