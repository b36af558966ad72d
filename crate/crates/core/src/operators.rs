//! Discretized radiation operators.
//!
//! Pulse-basis, point-matching discretization with the equal-area
//! circular-cell equivalence: each square cell is replaced by the disc of
//! identical area, for which the kernel integrals have closed forms (the
//! cylindrical addition theorems reduce them to single Bessel products).
//! The internal operator additionally splits exactly into an entire part
//! with a J_0 kernel and a singular part with a Y_0 kernel; the split is
//! enforced elementwise so `ai = ai_j0 + ai_y0` holds to rounding.

use crate::linalg;
use crate::scene::{ContrastMap, Grid, MeasurementSetup, Point};
use crate::specfun::{bessel_j, hankel2};
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Default cell-count guard for full operator assembly (three N_c x N_c
/// matrices live at once).
pub const DEFAULT_MAX_CELLS: usize = 8192;
/// Guard for single-matrix assembly (forward-solver path).
pub const MAX_CELLS_SINGLE: usize = 14000;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("grid has {cells} cells, above the assembly guard of {max} (raise the limit explicitly for larger runs)")]
    TooManyCells { cells: usize, max: usize },
}

/// Background Green's function G_b(r, r') = -(j/4) k_b^2 H_0^(2)(k_b |r - r'|).
///
/// Panics on coincident points; cell self-terms use the integrated forms
/// below instead.
pub fn greens(r: Point, r_src: Point, k_b: f64) -> Complex64 {
    let d = r.dist(r_src);
    assert!(
        d > 0.0,
        "greens: coincident points; use the cell-integrated self-term"
    );
    -J / 4.0 * k_b * k_b * hankel2(0, k_b * d)
}

/// Integral of H_0^(2)(k |r - r'|) over a disc of radius `a`, evaluated at
/// distance `rho >= a` from the disc center: (2 pi a / k) J_1(ka) H_0^(2)(k rho).
pub fn disc_integral_h0(k: f64, a: f64, rho: f64) -> Complex64 {
    2.0 * std::f64::consts::PI * a / k * bessel_j(1, k * a) * hankel2(0, k * rho)
}

/// Self-term: integral of H_0^(2)(k |r'|) over the disc of radius `a`,
/// evaluated at its center: (2 pi a / k) H_1^(2)(ka) - 4j/k^2.
pub fn disc_integral_h0_self(k: f64, a: f64) -> Complex64 {
    2.0 * std::f64::consts::PI * a / k * hankel2(1, k * a) - 4.0 * J / (k * k)
}

/// Integral of J_0(k |r - r'|) over a disc of radius `a` at any center
/// distance `rho` (the J_0 addition theorem holds everywhere, so this form
/// covers the self-cell too): (2 pi a / k) J_1(ka) J_0(k rho).
pub fn disc_integral_j0(k: f64, a: f64, rho: f64) -> f64 {
    2.0 * std::f64::consts::PI * a / k * bessel_j(1, k * a) * bessel_j(0, k * rho)
}

/// The assembled radiation operators on a grid/setup pair.
pub struct DiscreteOperators {
    /// External operator, receivers x cells.
    pub ae: Array2<Complex64>,
    /// Internal operator with the full Hankel kernel, cells x cells.
    pub ai: Array2<Complex64>,
    /// Entire part (J_0 kernel): finite everywhere, including the diagonal.
    pub ai_j0: Array2<Complex64>,
    /// Singular part (Y_0 kernel): ai - ai_j0, exact in the discrete system.
    pub ai_y0: Array2<Complex64>,
}

/// Offset tables over (dy, dx) in [0, n)^2 for the grid-to-grid kernels;
/// the matrices are block-Toeplitz so only n^2 distinct values occur.
struct OffsetTables {
    h0: Vec<Complex64>,
    j0: Vec<f64>,
    n: usize,
}

fn build_offset_tables(grid: &Grid, k_b: f64) -> OffsetTables {
    let n = grid.n;
    let d = grid.cell_size;
    let a = grid.cell_radius;
    let pref = -J / 4.0 * k_b * k_b;
    let mut h0 = vec![Complex64::new(0.0, 0.0); n * n];
    let mut j0 = vec![0.0f64; n * n];
    for dy in 0..n {
        for dx in 0..n {
            let rho = d * ((dy * dy + dx * dx) as f64).sqrt();
            let idx = dy * n + dx;
            j0[idx] = disc_integral_j0(k_b, a, rho);
            h0[idx] = if dy == 0 && dx == 0 {
                disc_integral_h0_self(k_b, a)
            } else {
                disc_integral_h0(k_b, a, rho)
            };
        }
    }
    for v in h0.iter_mut() {
        *v *= pref;
    }
    OffsetTables { h0, j0, n }
}

/// Internal operator A_i (full Hankel kernel) on the grid.
pub fn assemble_ai(grid: &Grid, k_b: f64) -> Result<Array2<Complex64>, OperatorError> {
    let nc = grid.num_cells();
    if nc > MAX_CELLS_SINGLE {
        return Err(OperatorError::TooManyCells {
            cells: nc,
            max: MAX_CELLS_SINGLE,
        });
    }
    let t = build_offset_tables(grid, k_b);
    Ok(fill_from_offsets(grid, |idx| t.h0[idx]))
}

/// Entire (J_0-kernel) part of the internal operator, prefactor included.
pub fn assemble_ai_j0(grid: &Grid, k_b: f64) -> Result<Array2<Complex64>, OperatorError> {
    let nc = grid.num_cells();
    if nc > MAX_CELLS_SINGLE {
        return Err(OperatorError::TooManyCells {
            cells: nc,
            max: MAX_CELLS_SINGLE,
        });
    }
    let t = build_offset_tables(grid, k_b);
    let pref = -J / 4.0 * k_b * k_b;
    Ok(fill_from_offsets(grid, |idx| pref * t.j0[idx]))
}

fn fill_from_offsets<F>(grid: &Grid, value: F) -> Array2<Complex64>
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let n = grid.n;
    let nc = grid.num_cells();
    let mut data = vec![Complex64::new(0.0, 0.0); nc * nc];
    data.par_chunks_mut(nc).enumerate().for_each(|(p, row)| {
        let (py, px) = (p / n, p % n);
        for qy in 0..n {
            let dy = py.abs_diff(qy);
            let base = qy * n;
            for qx in 0..n {
                let dx = px.abs_diff(qx);
                row[base + qx] = value(dy * n + dx);
            }
        }
    });
    Array2::from_shape_vec((nc, nc), data).expect("shape")
}

/// External operator A_e: receiver rows, cell columns.
pub fn assemble_ae(grid: &Grid, setup: &MeasurementSetup) -> Array2<Complex64> {
    assemble_ae_rows(grid, &setup.receivers, setup.k_b)
}

/// External operator rows for arbitrary receiver positions.
pub fn assemble_ae_rows(grid: &Grid, receivers: &[Point], k_b: f64) -> Array2<Complex64> {
    let nc = grid.num_cells();
    let a = grid.cell_radius;
    let pref = -J / 4.0 * k_b * k_b;
    let mut out = Array2::zeros((receivers.len(), nc));
    for (m, rx) in receivers.iter().enumerate() {
        for (p, c) in grid.centers().iter().enumerate() {
            out[[m, p]] = pref * disc_integral_h0(k_b, a, rx.dist(*c));
        }
    }
    out
}

/// Assemble the full operator set. The Y_0 part is defined as the exact
/// elementwise difference so the discrete split identity holds to rounding.
pub fn assemble(grid: &Grid, setup: &MeasurementSetup) -> Result<DiscreteOperators, OperatorError> {
    assemble_with_limit(grid, setup, DEFAULT_MAX_CELLS)
}

pub fn assemble_with_limit(
    grid: &Grid,
    setup: &MeasurementSetup,
    max_cells: usize,
) -> Result<DiscreteOperators, OperatorError> {
    let nc = grid.num_cells();
    if nc > max_cells {
        return Err(OperatorError::TooManyCells {
            cells: nc,
            max: max_cells,
        });
    }
    let t = build_offset_tables(grid, setup.k_b);
    let pref = -J / 4.0 * setup.k_b * setup.k_b;
    let ai = fill_from_offsets(grid, |idx| t.h0[idx]);
    let ai_j0 = fill_from_offsets(grid, |idx| pref * t.j0[idx]);
    let ai_y0 = &ai - &ai_j0;
    Ok(DiscreteOperators {
        ae: assemble_ae(grid, setup),
        ai,
        ai_j0,
        ai_y0,
    })
}

/// Largest singular value (operator 2-norm).
pub fn operator_norm(a: &Array2<Complex64>) -> f64 {
    linalg::spectral_norm(a)
}

/// Operator norms of A_i and A_i^{Y_0} on circular domains of growing
/// electrical size.
pub struct NormSweep {
    /// Radii in units of the background wavelength.
    pub radii: Vec<f64>,
    pub norm_ai: Vec<f64>,
    pub norm_ai_y0: Vec<f64>,
}

impl NormSweep {
    /// CSV rows: R_over_lambda, norm_Ai, norm_AiY0.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("R_over_lambda,norm_Ai,norm_AiY0\n");
        for i in 0..self.radii.len() {
            s.push_str(&format!(
                "{},{},{}\n",
                self.radii[i], self.norm_ai[i], self.norm_ai_y0[i]
            ));
        }
        s
    }
}

/// Sweep of the two internal-operator norms over circular domains of radius
/// R/lambda_b. Wavelength-invariant, so it is computed at lambda = 1. The
/// circle is realized by masking a square grid with `cells_per_lambda`
/// resolution to the cells whose centers fall inside.
pub fn norm_sweep(radii_over_lambda: &[f64], cells_per_lambda: usize) -> NormSweep {
    assert!(
        radii_over_lambda.windows(2).all(|w| w[0] < w[1]),
        "radii must be ascending"
    );
    let k_b = 2.0 * std::f64::consts::PI; // lambda = 1
    let mut norm_ai = Vec::with_capacity(radii_over_lambda.len());
    let mut norm_ai_y0 = Vec::with_capacity(radii_over_lambda.len());
    for &r in radii_over_lambda {
        assert!(r > 0.0, "radii must be positive");
        let side = 2.0 * r;
        let n = ((side * cells_per_lambda as f64).ceil() as usize).max(2);
        let grid = crate::scene::make_grid(side, n).expect("valid sweep grid");
        let mask: Vec<usize> = grid
            .centers()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() <= r)
            .map(|(i, _)| i)
            .collect();
        let t = build_offset_tables(&grid, k_b);
        let pref = -J / 4.0 * k_b * k_b;
        let nm = mask.len();
        let mut ai = Array2::zeros((nm, nm));
        let mut ai_y0 = Array2::zeros((nm, nm));
        for (i, &p) in mask.iter().enumerate() {
            let (py, px) = grid.row_col(p);
            for (jj, &q) in mask.iter().enumerate() {
                let (qy, qx) = grid.row_col(q);
                let idx = py.abs_diff(qy) * t.n + px.abs_diff(qx);
                let h = t.h0[idx];
                ai[[i, jj]] = h;
                ai_y0[[i, jj]] = h - pref * t.j0[idx];
            }
        }
        norm_ai.push(operator_norm(&ai));
        norm_ai_y0.push(operator_norm(&ai_y0));
    }
    NormSweep {
        radii: radii_over_lambda.to_vec(),
        norm_ai,
        norm_ai_y0,
    }
}

/// Partial Neumann sum: sum_{p=0..terms} (A_i X)^p applied to the columns
/// of `e_i` (one column per view).
pub fn neumann_series_apply(
    ai: &Array2<Complex64>,
    chi: &ContrastMap,
    e_i: &Array2<Complex64>,
    terms: usize,
) -> Array2<Complex64> {
    assert_eq!(ai.nrows(), e_i.nrows());
    assert_eq!(chi.values.len(), e_i.nrows());
    let mut current = e_i.clone();
    let mut sum = e_i.clone();
    for _ in 0..terms {
        let mut scaled = current.clone();
        for (row, &chi_p) in scaled.outer_iter_mut().zip(chi.values.iter()) {
            for v in row {
                *v *= chi_p;
            }
        }
        current = linalg::matmul(ai, &scaled);
        sum += &current;
    }
    sum
}
