//! `L^p` scaling-law measurements for the jet fields.
//!
//! Norms are measured in profile coordinates: because the triads are
//! rational and orthonormal, the rotated evaluation map is a
//! measure-preserving covering of the torus, so torus means of any
//! expression in the profile factors equal the corresponding profile-box
//! means. Every derivative magnitude of `psi_xi, phi_xi, W, W^c, V`
//! with `N, M <= 1` decomposes as
//! `prefactor * sqrt( sum_k coeff_k^2 u_k(y3)^2 v_k(y1,y2)^2 )`
//! over the orthonormal triad, which is what the term tables below encode.

use crate::error::{CoreError, Result};
use crate::profiles::ProfileSet;
use crate::scalar::Real;
use serde::Serialize;
use std::io::Write;

/// Which field a measurement refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldKind {
    Psi,
    Phi,
    W,
    Wc,
    V,
}

impl FieldKind {
    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::Psi => "psi",
            FieldKind::Phi => "phi",
            FieldKind::W => "W",
            FieldKind::Wc => "Wc",
            FieldKind::V => "V",
        }
    }

    pub fn all() -> [FieldKind; 5] {
        [
            FieldKind::Psi,
            FieldKind::Phi,
            FieldKind::W,
            FieldKind::Wc,
            FieldKind::V,
        ]
    }
}

/// Axial factor: `psibar^(k)` or the constant 1.
#[derive(Debug, Clone, Copy)]
enum UKind {
    Psi(usize),
    One,
}

/// Planar factor: the tube profile, potential, or their derivatives.
#[derive(Debug, Clone, Copy)]
enum VKind {
    PhiVal,
    PhiG1,
    PhiG2,
    CapVal,
    CapG1,
    CapG2,
    CapH11,
    CapH12,
    CapH22,
    One,
}

struct Term {
    coeff: f64,
    u: UKind,
    v: VKind,
}

/// Jet parameters entering the measurements (no grid, no snapping).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeasureParams {
    pub lambda: f64,
    pub r_perp: f64,
    pub r_par: f64,
    pub mu: f64,
    pub n_star: u32,
}

impl MeasureParams {
    /// The asymptotic closed forms
    /// `r_perp = lambda^(-6/7) (2 pi)^(-1/7)`, `r_par = lambda^(-4/7)`,
    /// `mu = lambda^(9/7) (2 pi)^(1/7)`.
    pub fn from_lambda(lambda: f64, n_star: u32) -> Result<Self> {
        let tau = std::f64::consts::TAU;
        let r_perp = lambda.powf(-6.0 / 7.0) * tau.powf(-1.0 / 7.0);
        let r_par = lambda.powf(-4.0 / 7.0);
        if !(r_perp < r_par && r_par < std::f64::consts::PI) {
            return Err(CoreError::InvalidConfig(format!(
                "lambda = {lambda} gives unusable concentration scales \
                 (r_perp = {r_perp:.3e}, r_par = {r_par:.3e})"
            )));
        }
        Ok(MeasureParams {
            lambda,
            r_perp,
            r_par,
            mu: lambda.powf(9.0 / 7.0) * tau.powf(1.0 / 7.0),
            n_star,
        })
    }
}

/// Derivative-magnitude decomposition of a field.
fn terms(kind: FieldKind, n: usize, m: usize) -> Option<(f64, Vec<Term>)> {
    let t = |coeff: f64, u: UKind, v: VKind| Term { coeff, u, v };
    match kind {
        FieldKind::Psi => Some((
            1.0,
            vec![t(1.0, UKind::Psi(n + m), VKind::One)],
        )),
        FieldKind::Phi => {
            if m > 0 {
                return None;
            }
            let terms = if n == 0 {
                vec![t(1.0, UKind::One, VKind::PhiVal)]
            } else {
                vec![
                    t(1.0, UKind::One, VKind::PhiG1),
                    t(1.0, UKind::One, VKind::PhiG2),
                ]
            };
            Some((1.0, terms))
        }
        FieldKind::W => {
            let terms = if n == 0 {
                vec![t(1.0, UKind::Psi(m), VKind::PhiVal)]
            } else {
                vec![
                    t(1.0, UKind::Psi(m + 1), VKind::PhiVal),
                    t(1.0, UKind::Psi(m), VKind::PhiG1),
                    t(1.0, UKind::Psi(m), VKind::PhiG2),
                ]
            };
            Some((1.0, terms))
        }
        FieldKind::Wc => {
            let terms = if n == 0 {
                vec![
                    t(1.0, UKind::Psi(m + 1), VKind::CapG1),
                    t(1.0, UKind::Psi(m + 1), VKind::CapG2),
                ]
            } else {
                vec![
                    t(1.0, UKind::Psi(m + 2), VKind::CapG1),
                    t(1.0, UKind::Psi(m + 2), VKind::CapG2),
                    t(1.0, UKind::Psi(m + 1), VKind::CapH11),
                    t(std::f64::consts::SQRT_2, UKind::Psi(m + 1), VKind::CapH12),
                    t(1.0, UKind::Psi(m + 1), VKind::CapH22),
                ]
            };
            Some((1.0, terms))
        }
        FieldKind::V => {
            let terms = if n == 0 {
                vec![t(1.0, UKind::Psi(m), VKind::CapVal)]
            } else {
                vec![
                    t(1.0, UKind::Psi(m + 1), VKind::CapVal),
                    t(1.0, UKind::Psi(m), VKind::CapG1),
                    t(1.0, UKind::Psi(m), VKind::CapG2),
                ]
            };
            Some((1.0, terms))
        }
    }
}

/// Overall prefactor `c^N (c mu)^M` times the field's own scale.
fn prefactor(kind: FieldKind, n: usize, m: usize, p: &MeasureParams) -> f64 {
    let c = p.n_star as f64 * p.r_perp * p.lambda;
    let base = c.powi(n as i32) * (c * p.mu).powi(m as i32);
    match kind {
        FieldKind::Psi | FieldKind::Phi | FieldKind::W => base,
        FieldKind::Wc => base * p.r_perp * p.r_perp,
        FieldKind::V => base / (p.n_star as f64 * p.n_star as f64 * p.lambda * p.lambda),
    }
}

/// Table of `|u|` values over the axial support.
fn u_table(profiles: &ProfileSet<f64>, kind: UKind, r_par: f64, nodes: usize) -> Vec<f64> {
    (0..nodes)
        .map(|i| {
            let y = -r_par + 2.0 * r_par * (i as f64 + 0.5) / nodes as f64;
            let x = y / r_par;
            let s = r_par.sqrt();
            match kind {
                UKind::One => 1.0,
                UKind::Psi(0) => profiles.psi(x) / s,
                UKind::Psi(1) => profiles.psi_d1(x) / (s * r_par),
                UKind::Psi(2) => profiles.psi_d2(x) / (s * r_par * r_par),
                UKind::Psi(3) => profiles.psi_d3(x) / (s * r_par * r_par * r_par),
                UKind::Psi(_) => unreachable!("psi derivatives beyond order 3"),
            }
        })
        .collect()
}

/// Table of `|v|` values over the planar support box.
fn v_table(profiles: &ProfileSet<f64>, kind: VKind, r_perp: f64, nodes: usize) -> Vec<f64> {
    let r2 = r_perp * r_perp;
    let r3 = r2 * r_perp;
    let mut out = vec![0.0; nodes * nodes];
    for i in 0..nodes {
        let y1 = -r_perp + 2.0 * r_perp * (i as f64 + 0.5) / nodes as f64;
        for j in 0..nodes {
            let y2 = -r_perp + 2.0 * r_perp * (j as f64 + 0.5) / nodes as f64;
            let (x1, x2) = (y1 / r_perp, y2 / r_perp);
            out[i * nodes + j] = match kind {
                VKind::One => 1.0,
                VKind::PhiVal => profiles.phi(x1, x2) / r_perp,
                VKind::PhiG1 => profiles.phi_grad(x1, x2)[0] / r2,
                VKind::PhiG2 => profiles.phi_grad(x1, x2)[1] / r2,
                VKind::CapVal => profiles.phi_cap(x1, x2) / r_perp,
                VKind::CapG1 => profiles.phi_cap_grad(x1, x2)[0] / r2,
                VKind::CapG2 => profiles.phi_cap_grad(x1, x2)[1] / r2,
                VKind::CapH11 => profiles.phi_cap_hess(x1, x2)[0] / r3,
                VKind::CapH12 => profiles.phi_cap_hess(x1, x2)[1] / r3,
                VKind::CapH22 => profiles.phi_cap_hess(x1, x2)[2] / r3,
            };
        }
    }
    out
}

const U_NODES: usize = 768;
const V_NODES: usize = 192;

/// `(mean_{T^3} |grad^N d_t^M field|^p)^(1/p)`.
pub fn measure_norm(
    profiles: &ProfileSet<f64>,
    kind: FieldKind,
    n: usize,
    m: usize,
    p: f64,
    params: &MeasureParams,
) -> Result<Option<f64>> {
    let Some((scale0, term_list)) = terms(kind, n, m) else {
        return Ok(None);
    };
    let pref = scale0 * prefactor(kind, n, m, params);
    let tau = std::f64::consts::TAU;
    let u_tables: Vec<Vec<f64>> = term_list
        .iter()
        .map(|t| u_table(profiles, t.u, params.r_par, U_NODES))
        .collect();
    let v_tables: Vec<Vec<f64>> = term_list
        .iter()
        .map(|t| v_table(profiles, t.v, params.r_perp, V_NODES))
        .collect();
    let du = 2.0 * params.r_par / U_NODES as f64;
    let dv_cell = (2.0 * params.r_perp / V_NODES as f64).powi(2);
    // Period-mean of |factor|^q: supported factors integrate over their
    // support box; a constant factor means to exactly 1.
    let mean_u = |k: usize, q: f64| -> f64 {
        match term_list[k].u {
            UKind::One => 1.0,
            _ => u_tables[k].iter().map(|x| x.abs().powf(q)).sum::<f64>() * du / tau,
        }
    };
    let mean_v = |k: usize, q: f64| -> f64 {
        match term_list[k].v {
            VKind::One => 1.0,
            _ => {
                v_tables[k].iter().map(|x| x.abs().powf(q)).sum::<f64>() * dv_cell / (tau * tau)
            }
        }
    };

    let mean = if (p - 2.0).abs() < 1e-14 {
        // Exactly separable: mean |expr|^2 = sum coeff^2 mean(u^2) mean(v^2).
        term_list
            .iter()
            .enumerate()
            .map(|(k, t)| t.coeff * t.coeff * mean_u(k, 2.0) * mean_v(k, 2.0))
            .sum()
    } else if term_list.len() == 1 {
        let t = &term_list[0];
        t.coeff.powf(p) * mean_u(0, p) * mean_v(0, p)
    } else {
        // Nested tensor quadrature for non-separable magnitudes. Constant
        // factors never occur in multi-term decompositions.
        let k = term_list.len();
        let coeff2: Vec<f64> = term_list.iter().map(|t| t.coeff * t.coeff).collect();
        let mut acc = 0.0f64;
        for i in 0..U_NODES {
            let u2: Vec<f64> = (0..k).map(|j| u_tables[j][i] * u_tables[j][i]).collect();
            let mut plane = 0.0f64;
            for idx in 0..V_NODES * V_NODES {
                let mut s = 0.0;
                for j in 0..k {
                    let v = v_tables[j][idx];
                    s += coeff2[j] * u2[j] * v * v;
                }
                plane += s.sqrt().powf(p);
            }
            acc += plane * dv_cell;
        }
        acc * du / (tau * tau * tau)
    };
    Ok(Some(pref * mean.powf(1.0 / p)))
}

/// Predicted `lambda`-exponent from the concentration-scale substitutions.
pub fn predicted_exponent(kind: FieldKind, n: usize, m: usize, p: f64) -> f64 {
    let w = (2.0 / p - 1.0) * (-6.0 / 7.0) + (1.0 / p - 0.5) * (-4.0 / 7.0)
        + n as f64
        + 2.0 * m as f64;
    match kind {
        FieldKind::W => w,
        FieldKind::Wc => w - 2.0 / 7.0,
        FieldKind::V => w - 2.0,
        FieldKind::Psi => (1.0 / p - 0.5) * (-4.0 / 7.0) + 5.0 / 7.0 * n as f64 + 2.0 * m as f64,
        FieldKind::Phi => (2.0 / p - 1.0) * (-6.0 / 7.0) + n as f64,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRecord {
    pub field: String,
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub lambda: f64,
    pub measured: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    pub field: String,
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub predicted_exponent: f64,
    pub fitted_exponent: f64,
    /// `|fitted - predicted|`, relative when the prediction is nonzero.
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub records: Vec<ScalingRecord>,
    pub fits: Vec<ScalingFit>,
}

/// Least-squares log-log fits of the measured norms against the sweep.
pub fn scaling_report<T: Real>(
    profiles: &ProfileSet<T>,
    n_star: u32,
    lambda_sweep: &[f64],
    p_list: &[f64],
) -> Result<ScalingReport> {
    if lambda_sweep.len() < 2 {
        return Err(CoreError::DegenerateFit(format!(
            "need at least 2 sweep points (got {})",
            lambda_sweep.len()
        )));
    }
    let p64 = ProfileSet::<f64> {
        c_phi: profiles.c_phi.to_f64(),
        c_psi: profiles.c_psi.to_f64(),
        phi_norm_check: 0.0,
        psi_norm_check: 0.0,
    };
    let mut records = Vec::new();
    let mut fits = Vec::new();
    for kind in FieldKind::all() {
        for n in 0..=1usize {
            for m in 0..=1usize {
                for &p in p_list {
                    let mut pts: Vec<(f64, f64)> = Vec::new();
                    for &lambda in lambda_sweep {
                        let params = MeasureParams::from_lambda(lambda, n_star)?;
                        if let Some(v) = measure_norm(&p64, kind, n, m, p, &params)? {
                            records.push(ScalingRecord {
                                field: kind.name().into(),
                                n,
                                m,
                                p,
                                lambda,
                                measured: v,
                            });
                            if v > 0.0 {
                                pts.push((lambda.ln(), v.ln()));
                            }
                        }
                    }
                    if pts.is_empty() {
                        continue;
                    }
                    if pts.len() < 2 {
                        return Err(CoreError::DegenerateFit(format!(
                            "{} N={n} M={m} p={p}: fewer than 2 usable points",
                            kind.name()
                        )));
                    }
                    let fitted = slope(&pts);
                    let predicted = predicted_exponent(kind, n, m, p);
                    let error = if predicted.abs() > 1e-12 {
                        (fitted - predicted).abs() / predicted.abs()
                    } else {
                        (fitted - predicted).abs()
                    };
                    fits.push(ScalingFit {
                        field: kind.name().into(),
                        n,
                        m,
                        p,
                        predicted_exponent: predicted,
                        fitted_exponent: fitted,
                        error,
                    });
                }
            }
        }
    }
    Ok(ScalingReport { records, fits })
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// CSV emitter: one row per measurement with its fit columns.
pub fn write_scaling_csv<W: Write>(w: &mut W, report: &ScalingReport) -> Result<()> {
    writeln!(
        w,
        "field,N,M,p,lambda,measured,predicted_exponent,fitted_exponent"
    )?;
    for r in &report.records {
        let fit = report
            .fits
            .iter()
            .find(|f| f.field == r.field && f.n == r.n && f.m == r.m && f.p == r.p);
        let (pe, fe) = fit
            .map(|f| (f.predicted_exponent, f.fitted_exponent))
            .unwrap_or((f64::NAN, f64::NAN));
        writeln!(
            w,
            "{},{},{},{},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.field, r.n, r.m, r.p, r.lambda, r.measured, pe, fe
        )?;
    }
    Ok(())
}
