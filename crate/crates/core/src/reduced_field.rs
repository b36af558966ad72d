//! Extraction of the J_0 field contribution from measured scattered data.
//!
//! The entire part of the internal operator applied to the induced
//! currents, E_J0 = integral of J_0(k_b |r - r'|) W(r') dr', is computable
//! from receiver data alone: expanding the data in cylindrical harmonics on
//! the measurement circle and resumming against J_n(k_b |r|) reproduces the
//! J_0 convolution. In operator terms, the circle quadrature of
//! E_s * K^TM equals -(j k_b^2 / 4) E_J0; this module returns the raw
//! integral and leaves that prefactor to `reduced_incident`, so each
//! constant has exactly one home. The truncation order follows the
//! degrees-of-freedom rule n_max = ceil(k_b a) + slack, capped at
//! (M - 1) / 2 when applied to M receivers so the circle quadrature stays
//! alias-free.

use crate::forward::{FieldKind, MultiviewField};
use crate::linalg;
use crate::scene::{Grid, MeasurementSetup, Point};
use crate::specfun::{bessel_j_seq, hankel2_seq};
use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::PI;

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Discretized kernel of the data-to-E_J0 map on a measurement circle.
pub struct KernelKTM {
    /// Receivers x cells.
    pub values: Array2<Complex64>,
    /// Harmonic truncation order actually used.
    pub n_max: usize,
}

/// Single kernel value: K(rho, dphi) =
/// (1/(2 pi R)) sum_{|n| <= n_max} J_n(k rho) / H_n^(2)(k R) e^{j n dphi},
/// which collapses to a cosine series because the +-n terms pair up.
pub fn ktm_entry(k_b: f64, ring_radius: f64, n_max: usize, rho: f64, dphi: f64) -> Complex64 {
    let j = bessel_j_seq(n_max as u32, k_b * rho);
    let h = hankel2_seq(n_max as u32, k_b * ring_radius);
    let mut acc = Complex64::new(j[0], 0.0) / h[0];
    for n in 1..=n_max {
        acc += 2.0 * j[n] / h[n] * (n as f64 * dphi).cos();
    }
    acc / (2.0 * PI * ring_radius)
}

/// Default truncation: ceil(k_b a) + slack with a the enclosing-ball radius.
pub fn truncation_order(grid: &Grid, setup: &MeasurementSetup, n_slack: usize) -> usize {
    let a = setup
        .enclosing_radius
        .unwrap_or_else(|| grid.enclosing_radius());
    (setup.k_b * a).ceil() as usize + n_slack
}

/// Build the kernel matrix for the setup's receiver ring.
pub fn kernel_ktm(grid: &Grid, setup: &MeasurementSetup, n_slack: usize) -> KernelKTM {
    let n_max = truncation_order(grid, setup, n_slack);
    kernel_ktm_n(grid, setup, n_max)
}

pub fn kernel_ktm_n(grid: &Grid, setup: &MeasurementSetup, n_max: usize) -> KernelKTM {
    let big_r = setup.ring_radius;
    assert!(big_r > 0.0, "measurement circle must have positive radius");
    let k = setup.k_b;
    let h = hankel2_seq(n_max as u32, k * big_r);
    let nc = grid.num_cells();
    let m = setup.receivers.len();
    // precompute per-cell radial factors J_n(k rho_p) / H_n(k R)
    let mut values = Array2::zeros((m, nc));
    for (p, c) in grid.centers().iter().enumerate() {
        let jp = bessel_j_seq(n_max as u32, k * c.norm());
        let phi_p = c.angle();
        for (mi, rx) in setup.receivers.iter().enumerate() {
            let dphi = phi_p - rx.angle();
            let mut acc = Complex64::new(jp[0], 0.0) / h[0];
            for n in 1..=n_max {
                acc += 2.0 * jp[n] / h[n] * (n as f64 * dphi).cos();
            }
            values[[mi, p]] = acc / (2.0 * PI * big_r);
        }
    }
    KernelKTM { values, n_max }
}

/// E_J0 extracted from full-ring data along with a degradation flag.
pub struct EJ0Result {
    pub field: MultiviewField,
    /// Set when the measurement geometry breaks the identity's assumptions
    /// (non-uniform spacing or an open arc).
    pub degraded: bool,
}

/// Extract E_J0 (raw J_0 integral, no Green prefactor) from scattered data
/// on the setup's receiver ring. `e_s` is receivers x views.
pub fn e_j0_from_data(
    e_s: &Array2<Complex64>,
    grid: &Grid,
    setup: &MeasurementSetup,
    n_slack: usize,
) -> EJ0Result {
    let m = setup.receivers.len();
    assert_eq!(e_s.nrows(), m, "data rows must match receivers");
    // alias-free cap for an M-point circle quadrature
    let n_req = truncation_order(grid, setup, n_slack);
    let n_max = n_req.min((m - 1) / 2);
    let kernel = kernel_ktm_n(grid, setup, n_max);
    let degraded = !receivers_uniform(&setup.receivers, setup.ring_radius);
    let weight = 2.0 * PI * setup.ring_radius / m as f64;
    // raw sum approximates the Gamma integral of E_s * K^TM, which equals
    // -(j k^2/4) * E_J0; undo the prefactor here
    let k = setup.k_b;
    let scale = 4.0 * J / (k * k) * weight;
    let mut field = linalg::matmul_transpose_left(&kernel.values, e_s);
    field.mapv_inplace(|v| v * scale);
    EJ0Result {
        field: MultiviewField::new(FieldKind::EJ0, field),
        degraded,
    }
}

fn receivers_uniform(rx: &[Point], ring_radius: f64) -> bool {
    let m = rx.len();
    if m < 2 {
        return false;
    }
    let tol = 1e-9 * ring_radius.max(1.0);
    if rx.iter().any(|p| (p.norm() - ring_radius).abs() > tol) {
        return false;
    }
    let step = 2.0 * PI / m as f64;
    let base = rx[0].angle();
    rx.iter().enumerate().all(|(i, p)| {
        let want = base + step * i as f64;
        let mut d = p.angle() - want;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        d.abs() < 1e-9
    })
}

/// E_J0 from per-view receiver arcs (experimental data: the receiver set
/// may differ per view and cover only part of the circle). Returns the
/// degradation flag whenever any view's arc is open.
pub fn e_j0_from_view_arcs(
    e_s_views: &[Vec<Complex64>],
    rx_views: &[Vec<Point>],
    grid: &Grid,
    k_b: f64,
    ring_radius: f64,
    n_max: usize,
) -> EJ0Result {
    assert_eq!(e_s_views.len(), rx_views.len());
    let nc = grid.num_cells();
    let views = e_s_views.len();
    let mut field = Array2::zeros((nc, views));
    let mut degraded = false;
    let scale_pref = 4.0 * J / (k_b * k_b);
    for (v, (data, rxs)) in e_s_views.iter().zip(rx_views).enumerate() {
        assert_eq!(data.len(), rxs.len());
        let m = rxs.len();
        if m == 0 {
            degraded = true;
            continue;
        }
        // angular span of the arc; full ring when endpoints wrap
        let mut angles: Vec<f64> = rxs.iter().map(|p| p.angle()).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut max_gap = 2.0 * PI + angles[0] - angles[m - 1];
        for w in angles.windows(2) {
            max_gap = max_gap.max(w[1] - w[0]);
        }
        let mean_step = 2.0 * PI / m as f64;
        let open_arc = max_gap > 2.5 * mean_step;
        let span = if open_arc { 2.0 * PI - max_gap } else { 2.0 * PI };
        if open_arc {
            degraded = true;
        }
        let weight = span * ring_radius / m as f64;
        let n_eff = n_max.min((m.saturating_sub(1)) / 2);
        for (d, rx) in data.iter().zip(rxs) {
            let phi_m = rx.angle();
            for (p, c) in grid.centers().iter().enumerate() {
                let kv = ktm_entry(k_b, ring_radius, n_eff, c.norm(), c.angle() - phi_m);
                field[[p, v]] += d * kv * weight * scale_pref;
            }
        }
    }
    EJ0Result {
        field: MultiviewField::new(FieldKind::EJ0, field),
        degraded,
    }
}

/// Far-field pattern samples from large-ring receiver data: strips the
/// cylindrical spreading factor, f(rhat) = E_s(R rhat) sqrt(pi k R / 2)
/// e^{+j(kR - pi/4)} (4j / k^2).
pub fn far_field_pattern_from_near(
    e_s: &Array2<Complex64>,
    setup: &MeasurementSetup,
) -> Array2<Complex64> {
    let k = setup.k_b;
    let big_r = setup.ring_radius;
    let phase = Complex64::from_polar(1.0, k * big_r - PI / 4.0);
    let conv = (PI * k * big_r / 2.0).sqrt() * phase * 4.0 * J / (k * k);
    e_s.mapv(|v| v * conv)
}

/// E_J0 from far-field pattern samples on uniformly spaced directions:
/// E_J0(r) = (1/2 pi) integral of f(rhat) e^{-j k r . rhat} d rhat.
pub fn e_j0_far_field(
    pattern: &Array2<Complex64>,
    directions: &[f64],
    grid: &Grid,
    k_b: f64,
) -> MultiviewField {
    assert_eq!(pattern.nrows(), directions.len());
    let nc = grid.num_cells();
    let views = pattern.ncols();
    let d = directions.len();
    let mut field = Array2::zeros((nc, views));
    for (p, c) in grid.centers().iter().enumerate() {
        for (di, th) in directions.iter().enumerate() {
            let phase = Complex64::from_polar(
                1.0,
                -k_b * (c.x * th.cos() + c.y * th.sin()),
            );
            for v in 0..views {
                field[[p, v]] += pattern[[di, v]] * phase;
            }
        }
    }
    field.mapv_inplace(|v| v / d as f64);
    MultiviewField::new(FieldKind::EJ0, field)
}

/// Minimum-norm TSVD solution of the data equation: the radiating part of
/// the induced currents. Keeps singular values >= threshold * sigma_1.
pub fn radiating_currents_tsvd(
    e_s: &Array2<Complex64>,
    ae: &Array2<Complex64>,
    threshold: f64,
) -> Array2<Complex64> {
    assert!(
        threshold > 0.0 && threshold <= 1.0,
        "TSVD threshold must lie in (0, 1]"
    );
    let svd = linalg::thin_svd(ae).expect("SVD of the external operator");
    let sigma1 = svd.s.first().copied().unwrap_or(0.0);
    let keep = svd.s.iter().take_while(|&&s| s >= threshold * sigma1).count();
    let nc = ae.ncols();
    let views = e_s.ncols();
    // W = V_k diag(1/sigma) U_k^H E_s
    let coeffs = linalg::matmul_adjoint_left(&svd.u, e_s); // k x views (full k)
    let mut w = Array2::zeros((nc, views));
    for i in 0..keep {
        let inv_s = 1.0 / svd.s[i];
        for p in 0..nc {
            let vpi = svd.v[[p, i]];
            for v in 0..views {
                w[[p, v]] += vpi * coeffs[[i, v]] * inv_s;
            }
        }
    }
    w
}

/// Reduced incident field: E_hat_i = E_i - j (k_b^2 / 4) E_J0. This is the
/// one place the Green prefactor of the J_0 integral is applied.
pub fn reduced_incident(
    e_i: &Array2<Complex64>,
    e_j0: &Array2<Complex64>,
    k_b: f64,
) -> MultiviewField {
    assert_eq!(e_i.dim(), e_j0.dim(), "field shapes must match");
    let pref = J * k_b * k_b / 4.0;
    let values = e_i - &e_j0.mapv(|v| v * pref);
    MultiviewField::new(FieldKind::ReducedIncident, values)
}

/// Health metric of the extracted reduced field: relative residual of the
/// transformed state equation chi .* E_hat_i + chi .* (A_i^Y0 W) - W over
/// all views. Zero up to quadrature/truncation error of the extraction.
pub fn model_residual(
    chi: &[Complex64],
    e_hat_i: &Array2<Complex64>,
    ai_y0: &Array2<Complex64>,
    w: &Array2<Complex64>,
) -> f64 {
    let scattered_part = linalg::matmul(ai_y0, w);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((p, v), wv) in w.indexed_iter() {
        let r = chi[p] * (e_hat_i[[p, v]] + scattered_part[[p, v]]) - wv;
        num += r.norm_sqr();
        den += wv.norm_sqr();
    }
    (num / den.max(1e-300)).sqrt()
}
