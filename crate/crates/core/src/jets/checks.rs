//! Exact-identity checks for the jet family.
//!
//! The pointwise identities are verified through independent formula
//! routes (cross-product algebra vs. Laplacian/Hessian closed forms vs.
//! temporal chain rule), so they probe the implementation rather than the
//! grid resolution. Means and norms go through factorized profile
//! quadrature; sublattice periodicity and pairwise support disjointness
//! are checked on the carrier grid.

use super::{JetFamily, JetScalarGrids};
use crate::error::Result;
use crate::field::{div, lp_norm, ScalarField};
use crate::grid::Grid;
use crate::profiles::refine_quadrature;
use crate::profiles::ProfileSet;
use crate::scalar::{c as sc, Real};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct DirectionIdentityChecks {
    /// `|div(W + W^c)|_inf / |grad W|_inf` (two independent routes).
    pub div_w_wc_rel: f64,
    /// `|W + W^c - curl curl V|_inf / |W|_inf`.
    pub curl_curl_rel: f64,
    /// `|div(W (x) W) - (1/mu) d_t(phi^2 psi^2 xi)|_inf` relative.
    pub transport_rel: f64,
    /// `|mean W|` from factorized quadrature.
    pub mean_abs: f64,
    /// Per-entry error of `mean(W (x) W) = xi (x) xi`.
    pub mean_tensor_err: f64,
    /// `sqrt(mean |W|^2)` (the rms normalization; 1 by construction).
    pub l2_rms: f64,
    /// Same quantity from carrier-grid quadrature (diagnostic only; the
    /// tubes may be much thinner than the grid).
    pub grid_l2_rms: f64,
    /// Largest spectral coefficient off the `sigma`-sublattice, relative.
    pub off_lattice_rel: f64,
    /// `|div W^t|_inf / (lambda |W^t|_inf)` (spectral, Leray-projected).
    pub wt_div_rel: f64,
    /// `|mean W^t|`.
    pub wt_mean_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct JetIdentityReport {
    pub per_direction: Vec<DirectionIdentityChecks>,
    /// No grid point lies in two distinct tube supports.
    pub disjoint_on_grid: bool,
    pub overlap_points: usize,
    /// Exact minimum axis separation against the required one.
    pub min_axis_separation: f64,
    pub required_separation: f64,
    /// Two-route Fubini factorization check of `|phi^2 psi^2|_{L^p}`.
    pub fubini_rel: f64,
    /// Rescaled-profile norm checks.
    pub phi_l2_sq_err: f64,
    pub psi_l2_sq_err: f64,
}

struct PointAccum {
    max_div_sum: f64,
    max_grad_w: f64,
    max_cc_diff: f64,
    max_w: f64,
    max_tr_diff: f64,
    max_tr_b: f64,
    sum_f2: f64,
}

impl PointAccum {
    fn new() -> Self {
        PointAccum {
            max_div_sum: 0.0,
            max_grad_w: 0.0,
            max_cc_diff: 0.0,
            max_w: 0.0,
            max_tr_diff: 0.0,
            max_tr_b: 0.0,
            sum_f2: 0.0,
        }
    }
    fn merge(mut self, o: PointAccum) -> PointAccum {
        self.max_div_sum = self.max_div_sum.max(o.max_div_sum);
        self.max_grad_w = self.max_grad_w.max(o.max_grad_w);
        self.max_cc_diff = self.max_cc_diff.max(o.max_cc_diff);
        self.max_w = self.max_w.max(o.max_w);
        self.max_tr_diff = self.max_tr_diff.max(o.max_tr_diff);
        self.max_tr_b = self.max_tr_b.max(o.max_tr_b);
        self.sum_f2 += o.sum_f2;
        self
    }
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Evaluate every per-direction identity plus the family-level checks.
pub fn jet_identity_report<T: Real>(
    family: &JetFamily<T>,
    grid: &Grid,
    t: f64,
    fubini_p: f64,
) -> Result<JetIdentityReport> {
    let mut per_direction = Vec::new();
    for dir in 0..family.directions() {
        per_direction.push(direction_checks(family, grid, dir, t)?);
    }

    // Pairwise grid disjointness of the tube supports.
    let masks: Vec<Vec<bool>> = (0..family.directions())
        .map(|d| family.support_mask(d, grid))
        .collect();
    let mut overlap = 0usize;
    for i in 0..masks.len() {
        for j in (i + 1)..masks.len() {
            overlap += masks[i]
                .iter()
                .zip(masks[j].iter())
                .filter(|(a, b)| **a && **b)
                .count();
        }
    }

    let (fubini_rel, _, _) = fubini_check(family, fubini_p)?;

    Ok(JetIdentityReport {
        per_direction,
        disjoint_on_grid: overlap == 0,
        overlap_points: overlap,
        min_axis_separation: family.min_axis_separation,
        required_separation: family.required_separation,
        fubini_rel,
        phi_l2_sq_err: (family.phi_rescaled_l2_sq
            - 4.0 * std::f64::consts::PI.powi(2))
        .abs()
            / (4.0 * std::f64::consts::PI.powi(2)),
        psi_l2_sq_err: (family.psi_rescaled_l2_sq - std::f64::consts::TAU).abs()
            / std::f64::consts::TAU,
    })
}

fn direction_checks<T: Real>(
    family: &JetFamily<T>,
    grid: &Grid,
    dir: usize,
    t: f64,
) -> Result<DirectionIdentityChecks> {
    let n = grid.n;
    let h = grid.spacing();
    let d = &family.placed[dir];
    let xi = d.xi;
    let av = d.a;
    let bv = d.b;
    let cfac = family.params.freq_factor() as f64;
    let r2 = family.params.r_perp * family.params.r_perp;
    let inv_nl2 = 1.0
        / (family.params.n_star as f64 * family.params.n_star as f64
            * family.params.lambda
            * family.params.lambda);
    let mu = family.params.mu;
    let tt = sc::<T>(t);

    let acc = (0..n)
        .into_par_iter()
        .map(|ix| {
            let mut acc = PointAccum::new();
            let x0 = sc::<T>(h * ix as f64);
            for iy in 0..n {
                let x1 = sc::<T>(h * iy as f64);
                for iz in 0..n {
                    let x2 = sc::<T>(h * iz as f64);
                    let s = family.sample(dir, [x0, x1, x2], tt);
                    let psi0 = s.psi[0].to_f64();
                    let psi1 = s.psi[1].to_f64();
                    let psi2 = s.psi[2].to_f64();
                    let phi = s.phi.to_f64();
                    let pg = [s.phi_g[0].to_f64(), s.phi_g[1].to_f64()];
                    let cap = s.cap.to_f64();
                    let cg = [s.cap_g[0].to_f64(), s.cap_g[1].to_f64()];
                    let chs = [s.cap_h[0].to_f64(), s.cap_h[1].to_f64(), s.cap_h[2].to_f64()];

                    let f = psi0 * phi;
                    // grad F = c [psi' phi xi + psi (phi_1 A + phi_2 B)].
                    let grad_f: [f64; 3] = std::array::from_fn(|k| {
                        cfac * (psi1 * phi * xi[k] + psi0 * (pg[0] * av[k] + pg[1] * bv[k]))
                    });
                    let grad_f_dot_xi =
                        grad_f[0] * xi[0] + grad_f[1] * xi[1] + grad_f[2] * xi[2];
                    let div_w = grad_f_dot_xi;

                    // W^c via the cross-product route.
                    let grad_psi: [f64; 3] = std::array::from_fn(|k| cfac * psi1 * xi[k]);
                    let grad_cap: [f64; 3] = std::array::from_fn(|k| {
                        cfac * (cg[0] * av[k] + cg[1] * bv[k])
                    });
                    let q = cross3(grad_cap, xi);
                    let wc_cross = cross3(grad_psi, q).map(|v| v * inv_nl2);

                    // div W^c via the Hessian route.
                    let mut div_wc = 0.0;
                    for k in 0..3 {
                        let d_k_p1 = cfac
                            * (psi2 * xi[k] * cg[0]
                                + psi1 * (chs[0] * av[k] + chs[1] * bv[k]));
                        let d_k_p2 = cfac
                            * (psi2 * xi[k] * cg[1]
                                + psi1 * (chs[1] * av[k] + chs[2] * bv[k]));
                        div_wc += r2 * (d_k_p1 * av[k] + d_k_p2 * bv[k]);
                    }

                    acc.max_div_sum = acc.max_div_sum.max((div_w + div_wc).abs());
                    acc.max_grad_w = acc.max_grad_w.max(norm3(grad_f));

                    // curl curl V via the Laplacian/Hessian route.
                    let lap_term = chs[0] + chs[2];
                    let cc: [f64; 3] = std::array::from_fn(|k| {
                        r2 * (psi1 * (cg[0] * av[k] + cg[1] * bv[k]) - psi0 * lap_term * xi[k])
                    });
                    let w: [f64; 3] = std::array::from_fn(|k| f * xi[k]);
                    let lhs: [f64; 3] = std::array::from_fn(|k| w[k] + wc_cross[k]);
                    let diff: [f64; 3] = std::array::from_fn(|k| lhs[k] - cc[k]);
                    acc.max_cc_diff = acc.max_cc_diff.max(norm3(diff));
                    acc.max_w = acc.max_w.max(f.abs());

                    // Transport identity routes.
                    let tr_a = 2.0 * f * grad_f_dot_xi;
                    let f_t = cfac * mu * psi1 * phi;
                    let tr_b = 2.0 * f * f_t / mu;
                    acc.max_tr_diff = acc.max_tr_diff.max((tr_a - tr_b).abs());
                    acc.max_tr_b = acc.max_tr_b.max(tr_b.abs());

                    acc.sum_f2 += f * f;
                    let _ = cap;
                }
            }
            acc
        })
        .reduce(PointAccum::new, PointAccum::merge);

    // Factorized means.
    let p64: ProfileSet<f64> = ProfileSet {
        c_phi: family.profiles.c_phi.to_f64(),
        c_psi: family.profiles.c_psi.to_f64(),
        phi_norm_check: 0.0,
        psi_norm_check: 0.0,
    };
    let rpar = family.params.r_par;
    let rperp = family.params.r_perp;
    let mean_psi = refine_quadrature(|y| p64.psi(y / rpar) / rpar.sqrt(), -rpar, rpar, 1e-13)?
        / std::f64::consts::TAU;
    let mean_phi = std::f64::consts::PI
        * refine_quadrature(
            |s| p64.phi((s / (rperp * rperp)).sqrt(), 0.0) / rperp,
            0.0,
            rperp * rperp,
            1e-13,
        )?
        / std::f64::consts::TAU.powi(2);
    let mean_abs = (mean_psi * mean_phi).abs();

    let (q_psi, q_phi) = family.factor_means_sq()?;
    let mean_tensor_err = (q_psi * q_phi - 1.0).abs();
    let l2_rms = (q_psi * q_phi).sqrt();
    let grid_l2_rms = (acc.sum_f2 / (n * n * n) as f64).sqrt();

    // Sublattice periodicity of the sampled field.
    let tables = family.scalar_grids(dir, grid, t);
    let f_field = ScalarField::from_values(*grid, &tables.f);
    let sigma = family.params.sigma as i64;
    let mut max_on = 0.0f64;
    let mut max_off = 0.0f64;
    for ix in 0..n {
        let kx = grid.wavenumber(ix);
        for iy in 0..n {
            let ky = grid.wavenumber(iy);
            for iz in 0..n {
                let kz = grid.wavenumber(iz);
                let m = f_field.coeff(kx, ky, kz).norm().to_f64();
                if kx % sigma == 0 && ky % sigma == 0 && kz % sigma == 0 {
                    max_on = max_on.max(m);
                } else {
                    max_off = max_off.max(m);
                }
            }
        }
    }
    let off_lattice_rel = if max_on > 0.0 { max_off / max_on } else { 0.0 };

    // Temporal corrector: divergence-free and zero-mean by construction.
    let wt = family.jet_wt(dir, grid, t)?;
    let wt_linf = wt.linf().to_f64();
    let wt_div = lp_norm(&div(&wt)?, f64::INFINITY)?.to_f64();
    let wt_div_rel = if wt_linf > 0.0 {
        wt_div / (wt_linf * family.params.nominal_bandwidth())
    } else {
        0.0
    };
    let wt_mean = wt.mean();
    let wt_mean_abs = wt_mean
        .iter()
        .fold(0.0f64, |a, &b| a.max(b.to_f64().abs()));

    Ok(DirectionIdentityChecks {
        div_w_wc_rel: if acc.max_grad_w > 0.0 {
            acc.max_div_sum / acc.max_grad_w
        } else {
            0.0
        },
        curl_curl_rel: if acc.max_w > 0.0 {
            acc.max_cc_diff / acc.max_w
        } else {
            0.0
        },
        transport_rel: if acc.max_tr_b > 0.0 {
            acc.max_tr_diff / acc.max_tr_b
        } else {
            0.0
        },
        mean_abs,
        mean_tensor_err,
        l2_rms,
        grid_l2_rms,
        off_lattice_rel,
        wt_div_rel,
        wt_mean_abs,
    })
}

/// Two-route check of `|phi_xi^2 psi_xi^2|_{L^p}`:
/// `|phi^2 psi^2|_p = |phi^2|_p |psi^2|_p / (2 pi)^{3/p}`.
///
/// Route A integrates the joint integrand over the 3-D support box by a
/// midpoint tensor rule; route B combines separate radial/axial trapezoid
/// quadratures of the factors. Returns `(relative difference, A, B)`.
pub fn fubini_check<T: Real>(family: &JetFamily<T>, p: f64) -> Result<(f64, f64, f64)> {
    let p64: ProfileSet<f64> = ProfileSet {
        c_phi: family.profiles.c_phi.to_f64(),
        c_psi: family.profiles.c_psi.to_f64(),
        phi_norm_check: 0.0,
        psi_norm_check: 0.0,
    };
    let rpar = family.params.r_par;
    let rperp = family.params.r_perp;

    // Route A: int_{box} |phibar^2 psibar^2|^p by a joint midpoint rule.
    let n1 = 1024usize;
    let n2 = 512usize;
    let mut plane = 0.0f64;
    for i in 0..n2 {
        let y1 = -rperp + 2.0 * rperp * (i as f64 + 0.5) / n2 as f64;
        for j in 0..n2 {
            let y2 = -rperp + 2.0 * rperp * (j as f64 + 0.5) / n2 as f64;
            let phibar = p64.phi(y1 / rperp, y2 / rperp) / rperp;
            plane += (phibar * phibar).powf(p);
        }
    }
    plane *= (2.0 * rperp / n2 as f64).powi(2);
    let mut axis = 0.0f64;
    for i in 0..n1 {
        let y3 = -rpar + 2.0 * rpar * (i as f64 + 0.5) / n1 as f64;
        let psibar = p64.psi(y3 / rpar) / rpar.sqrt();
        axis += (psibar * psibar).powf(p);
    }
    axis *= 2.0 * rpar / n1 as f64;
    let route_a = (plane * axis).powf(1.0 / p);

    // Route B: |phi^2|_p^p = 2 pi * int_{T^2}, |psi^2|_p^p = (2 pi)^2 * int_T,
    // divided by (2 pi)^{3/p}; the volume factors cancel exactly.
    let phi_p = std::f64::consts::PI
        * refine_quadrature(
            |s| {
                let v = p64.phi((s / (rperp * rperp)).sqrt(), 0.0) / rperp;
                (v * v).powf(p)
            },
            0.0,
            rperp * rperp,
            1e-12,
        )?;
    let psi_p = 2.0
        * refine_quadrature(
            |y| {
                let v = p64.psi(y / rpar) / rpar.sqrt();
                (v * v).powf(p)
            },
            0.0,
            rpar,
            1e-12,
        )?;
    let route_b = (phi_p * psi_p).powf(1.0 / p);
    let rel = (route_a - route_b).abs() / route_b.abs().max(1e-300);
    Ok((rel, route_a, route_b))
}
