//! Decay-envelope fits. For a candidate rate `c` the prefactor is the
//! smallest admissible one, `C(c) = max K/env(c)`; the reported `c` is the
//! one whose envelope hugs the data best (least mean log-gap).

use schrodinger_core::PotentialSpec;
use serde::{Deserialize, Serialize};

use crate::error::{KernelError, Result};
use crate::kernel::{KernelKind, KernelMatrix};
use crate::special::psi_t;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeForm {
    #[serde(rename = "prop61_boundG")]
    BoundG,
    #[serde(rename = "prop61_GN_minus_G")]
    GnMinusG,
    #[serde(rename = "prop63_gradG")]
    GradG,
    #[serde(rename = "prop74_Gnu")]
    Gnu,
    #[serde(rename = "heat_envelope")]
    Heat,
}

impl EnvelopeForm {
    pub fn name(self) -> &'static str {
        match self {
            EnvelopeForm::BoundG => "prop61_boundG",
            EnvelopeForm::GnMinusG => "prop61_GN_minus_G",
            EnvelopeForm::GradG => "prop63_gradG",
            EnvelopeForm::Gnu => "prop74_Gnu",
            EnvelopeForm::Heat => "heat_envelope",
        }
    }

    fn accepts(self, kind: KernelKind) -> bool {
        match self {
            EnvelopeForm::BoundG => matches!(kind, KernelKind::Green | KernelKind::GreenTruncated),
            EnvelopeForm::GnMinusG => kind == KernelKind::GreenDifference,
            EnvelopeForm::GradG => kind == KernelKind::GradientNorm,
            EnvelopeForm::Gnu => kind == KernelKind::QuantumGreen,
            EnvelopeForm::Heat => kind == KernelKind::Heat,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundFit {
    pub form: EnvelopeForm,
    #[serde(rename = "c")]
    pub fitted_c: f64,
    #[serde(rename = "C")]
    pub fitted_big_c: f64,
    pub violation_fraction: f64,
    #[serde(rename = "pairs")]
    pub sample_pairs: usize,
    pub max_ratio_location: [[f64; 2]; 2],
    pub mean_log_gap: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitOptions {
    /// Pairs closer than this many lattice spacings are skipped.
    pub min_separation: f64,
    /// Entries below `noise_floor * max|K|` are skipped.
    pub noise_floor: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub c_points: usize,
    /// Keep at most this many scatter rows for plotting.
    pub max_samples: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            min_separation: 2.0,
            noise_floor: 1e-10,
            c_min: 1e-4,
            c_max: 1e2,
            c_points: 73,
            max_samples: 2000,
        }
    }
}

/// One scatter row `(|x-y|, K(x,y), C env(x,y;c))`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitSample {
    pub r: f64,
    pub kernel: f64,
    pub envelope: f64,
}

struct Pair {
    ln_k: f64,
    r: f64,
    gmax: f64,
    gy: f64,
    radial: f64,
    t: f64,
    loc: [[f64; 2]; 2],
}

struct Scales {
    n_cut: Option<f64>,
    nu: Option<f64>,
    t: f64,
    kappa: f64,
}

fn log_envelope(form: EnvelopeForm, p: &Pair, s: &Scales, c: f64) -> f64 {
    let r = p.r;
    match form {
        EnvelopeForm::BoundG | EnvelopeForm::Gnu => {
            let sg = p.gmax.sqrt();
            let mut pre = (-(r * sg).ln()).max(0.0);
            let cap = match form {
                EnvelopeForm::BoundG => s.n_cut.map(f64::ln),
                _ => s.nu.map(|nu| -nu.ln()),
            };
            if let Some(cap) = cap {
                pre = pre.min(cap);
            }
            pre.max(1.0).ln() - c * r * sg
        }
        EnvelopeForm::GnMinusG => {
            let n = s.n_cut.expect("checked");
            let x = n * r * r;
            let a = (1.0 + (-x.ln()).max(0.0)).ln();
            let b = -c * x - x.ln();
            a.min(b)
        }
        EnvelopeForm::GradG => -r.ln() - c * r * p.gy.sqrt(),
        EnvelopeForm::Heat => {
            let t = p.t;
            let g = p.gmax;
            let rad = p.radial;
            let mut terms = vec![-c * g * t, -c * rad * g.sqrt(), -c * t.cbrt() * rad.powf(2.0 / 3.0) * g.powf(2.0 / 3.0)];
            if rad == 0.0 || t <= 1.0 / (g * g * rad * rad) {
                terms.push(0.0);
            }
            let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + terms.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
            psi_t(t, r * r).ln() - s.kappa * t - 0.5 * c * t + lse
        }
    }
}

fn collect_pairs(k: &KernelMatrix, spec: &PotentialSpec, form: EnvelopeForm, opts: &FitOptions, t: f64) -> Result<Vec<Pair>> {
    let grid = k.grid().ok_or(KernelError::MissingGrid)?;
    let pos = grid.positions();
    let gt: Vec<f64> = pos.iter().map(|x| spec.g_tilde(*x)).collect();
    let floor = opts.noise_floor * k.max_abs();
    let min_r = opts.min_separation * grid.spacing();
    let symmetric = form != EnvelopeForm::GradG;
    let mut pairs = Vec::new();
    for i in 0..k.dim() {
        let j0 = if symmetric { i + 1 } else { 0 };
        for j in j0..k.dim() {
            if i == j {
                continue;
            }
            let v = k.get(i, j);
            if !(v > floor) {
                continue;
            }
            let r = grid.distance(i, j);
            if r < min_r {
                continue;
            }
            let norm = |x: [f64; 2]| x[0].hypot(x[1]);
            pairs.push(Pair {
                ln_k: v.ln(),
                r,
                gmax: gt[i].max(gt[j]),
                gy: gt[j],
                radial: norm(pos[i]) + norm(pos[j]),
                t,
                loc: [pos[i], pos[j]],
            });
        }
    }
    if pairs.is_empty() {
        return Err(KernelError::NoPairs);
    }
    Ok(pairs)
}

/// `(ln C(c), mean log-gap, index of the tightest pair)`.
fn evaluate(form: EnvelopeForm, pairs: &[Pair], s: &Scales, c: f64) -> (f64, f64, usize) {
    let mut ln_c = f64::NEG_INFINITY;
    let mut arg = 0;
    let mut sum = 0.0;
    for (idx, p) in pairs.iter().enumerate() {
        let d = p.ln_k - log_envelope(form, p, s, c);
        sum += d;
        if d > ln_c {
            ln_c = d;
            arg = idx;
        }
    }
    (ln_c, ln_c - sum / pairs.len() as f64, arg)
}

pub fn fit_decay_bound(k: &KernelMatrix, spec: &PotentialSpec, form: EnvelopeForm) -> Result<BoundFit> {
    fit_decay_bound_detailed(k, spec, form, &FitOptions::default()).map(|(f, _)| f)
}

pub fn fit_decay_bound_detailed(
    k: &KernelMatrix,
    spec: &PotentialSpec,
    form: EnvelopeForm,
    opts: &FitOptions,
) -> Result<(BoundFit, Vec<FitSample>)> {
    if !form.accepts(k.kind()) {
        return Err(KernelError::KindMismatch {
            expected: form.name(),
            got: k.kind().name(),
        });
    }
    let params = k.params();
    let scales = Scales {
        n_cut: params.n_cut,
        nu: params.nu,
        t: params.t.unwrap_or(0.0),
        kappa: spec.kappa,
    };
    match form {
        EnvelopeForm::GnMinusG if scales.n_cut.is_none() => {
            return Err(KernelError::BadParameter {
                name: "N",
                reason: "truncation envelope needs a finite cutoff".into(),
            })
        }
        EnvelopeForm::Gnu if scales.nu.is_none() => {
            return Err(KernelError::BadParameter {
                name: "nu",
                reason: "quantum envelope needs ν".into(),
            })
        }
        _ => {}
    }
    let pairs = collect_pairs(k, spec, form, opts, scales.t)?;
    fit_pairs(form, &pairs, &scales, opts)
}

/// A heat-kernel value measured off the lattice (e.g. by path integrals).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HeatSample {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub t: f64,
    pub value: f64,
}

/// Fit the heat-kernel envelope to scattered samples with varying `t`.
/// Nonpositive values carry no decay information and are skipped.
pub fn fit_heat_samples(samples: &[HeatSample], spec: &PotentialSpec, opts: &FitOptions) -> Result<(BoundFit, Vec<FitSample>)> {
    let norm = |x: [f64; 2]| x[0].hypot(x[1]);
    let pairs: Vec<Pair> = samples
        .iter()
        .filter(|s| s.value > 0.0 && s.t > 0.0)
        .map(|s| Pair {
            ln_k: s.value.ln(),
            r: (s.x[0] - s.y[0]).hypot(s.x[1] - s.y[1]),
            gmax: spec.g_tilde(s.x).max(spec.g_tilde(s.y)),
            gy: spec.g_tilde(s.y),
            radial: norm(s.x) + norm(s.y),
            t: s.t,
            loc: [s.x, s.y],
        })
        .collect();
    if pairs.is_empty() {
        return Err(KernelError::NoPairs);
    }
    let scales = Scales {
        n_cut: None,
        nu: None,
        t: 0.0,
        kappa: spec.kappa,
    };
    fit_pairs(EnvelopeForm::Heat, &pairs, &scales, opts)
}

fn fit_pairs(form: EnvelopeForm, pairs: &[Pair], scales: &Scales, opts: &FitOptions) -> Result<(BoundFit, Vec<FitSample>)> {

    // c = 0 plus a geometric grid, then golden-section refinement in log c
    let mut cands = vec![0.0];
    let ratio = (opts.c_max / opts.c_min).ln() / (opts.c_points - 1) as f64;
    cands.extend((0..opts.c_points).map(|i| opts.c_min * (ratio * i as f64).exp()));
    let gaps: Vec<f64> = cands.iter().map(|&c| evaluate(form, pairs, scales, c).1).collect();
    let best = (0..cands.len())
        .min_by(|&a, &b| gaps[a].partial_cmp(&gaps[b]).unwrap())
        .unwrap();
    let mut c_best = cands[best];
    if best >= 1 {
        let lo = if best == 1 { opts.c_min * (-ratio).exp() } else { cands[best - 1] };
        let hi = if best + 1 < cands.len() { cands[best + 1] } else { opts.c_max };
        let (mut a, mut b) = (lo.ln(), hi.ln());
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let f = |x: f64| evaluate(form, pairs, scales, x.exp()).1;
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..40 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = f(x2);
            }
        }
        let xm = 0.5 * (a + b);
        if f(xm) < gaps[best] {
            c_best = xm.exp();
        }
    }
    if !(c_best > 0.0) {
        return Err(KernelError::NonPositiveDecay {
            form: form.name().into(),
        });
    }
    let (ln_c, gap, arg) = evaluate(form, pairs, scales, c_best);
    let violations = pairs
        .iter()
        .filter(|p| p.ln_k > ln_c + log_envelope(form, p, scales, c_best) + 1e-12)
        .count();
    let stride = (pairs.len() / opts.max_samples.max(1)).max(1);
    let samples = pairs
        .iter()
        .step_by(stride)
        .map(|p| FitSample {
            r: p.r,
            kernel: p.ln_k.exp(),
            envelope: (ln_c + log_envelope(form, p, scales, c_best)).exp(),
        })
        .collect();
    Ok((
        BoundFit {
            form,
            fitted_c: c_best,
            fitted_big_c: ln_c.exp(),
            violation_fraction: violations as f64 / pairs.len() as f64,
            sample_pairs: pairs.len(),
            max_ratio_location: pairs[arg].loc,
            mean_log_gap: gap,
        },
        samples,
    ))
}
