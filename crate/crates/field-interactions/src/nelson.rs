//! Empirical tail `P(e^{-V_N} > t)` and its stretched-exponential fit.

use serde::{Deserialize, Serialize};

/// Fewer tail events than this make a point too noisy to fit.
pub const MIN_TAIL_EVENTS: usize = 30;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NelsonTail {
    /// `(t, P(e^{-V} > t))`
    pub points: Vec<(f64, f64)>,
    pub events: Vec<usize>,
    /// Slope of `log(-log P)` against `log log t` over well-populated points.
    pub exponent: Option<f64>,
    /// Quadratic coefficient of the same fit and its standard error.
    pub curvature: Option<(f64, f64)>,
    pub monotone: bool,
    /// Curvature is not significantly positive (3 standard errors).
    pub concave: bool,
    pub inconclusive: bool,
}

fn lstsq(x: &[f64], y: &[f64], degree: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let p = degree + 1;
    let n = x.len();
    if n <= p {
        return None;
    }
    let mut ata = vec![vec![0.0; p]; p];
    let mut aty = vec![0.0; p];
    for (xi, yi) in x.iter().zip(y) {
        let row: Vec<f64> = (0..p).map(|k| xi.powi(k as i32)).collect();
        for a in 0..p {
            aty[a] += row[a] * yi;
            for b in 0..p {
                ata[a][b] += row[a] * row[b];
            }
        }
    }
    let inv = invert(ata)?;
    let coef: Vec<f64> = (0..p).map(|a| (0..p).map(|b| inv[a][b] * aty[b]).sum()).collect();
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let f: f64 = (0..p).map(|k| coef[k] * xi.powi(k as i32)).sum();
            (yi - f).powi(2)
        })
        .sum();
    let sigma2 = rss / (n - p) as f64;
    let se = (0..p).map(|a| (sigma2 * inv[a][a]).max(0.0).sqrt()).collect();
    Some((coef, se))
}

fn invert(mut m: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let p = m.len();
    let mut inv: Vec<Vec<f64>> = (0..p).map(|i| (0..p).map(|j| (i == j) as u8 as f64).collect()).collect();
    for c in 0..p {
        let piv = (c..p).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[piv][c].abs() < 1e-300 {
            return None;
        }
        m.swap(c, piv);
        inv.swap(c, piv);
        let d = m[c][c];
        for k in 0..p {
            m[c][k] /= d;
            inv[c][k] /= d;
        }
        for r in 0..p {
            if r != c {
                let f = m[r][c];
                for k in 0..p {
                    m[r][k] -= f * m[c][k];
                    inv[r][k] -= f * inv[c][k];
                }
            }
        }
    }
    Some(inv)
}

/// Tail curve on `points` log-spaced thresholds `t > 1`, up to `e^{max(-V)}`.
pub fn nelson_tail(values: &[f64], points: usize) -> NelsonTail {
    let neg_max = values.iter().map(|v| -v).fold(f64::NEG_INFINITY, f64::max);
    let total = values.len() as f64;
    let mut pts = Vec::new();
    let mut events = Vec::new();
    if neg_max > 0.0 && points > 0 {
        for k in 1..=points {
            // thresholds in log t, strictly inside (0, max(-V))
            let lt = neg_max * k as f64 / (points + 1) as f64;
            let count = values.iter().filter(|&&v| -v > lt).count();
            pts.push((lt.exp(), count as f64 / total));
            events.push(count);
        }
    }
    let monotone = pts.windows(2).all(|w| w[1].1 <= w[0].1);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (&(t, p), &e) in pts.iter().zip(&events) {
        if e >= MIN_TAIL_EVENTS && p < 1.0 {
            x.push(t.ln().ln());
            y.push((-p.ln()).ln());
        }
    }
    let linear = lstsq(&x, &y, 1);
    let quad = lstsq(&x, &y, 2);
    let exponent = linear.map(|(c, _)| c[1]);
    let curvature = quad.map(|(c, se)| (c[2], se[2]));
    let inconclusive = exponent.is_none();
    let concave = match curvature {
        Some((q, se)) => q <= 3.0 * se,
        None => true,
    };
    NelsonTail {
        points: pts,
        events,
        exponent,
        curvature,
        monotone,
        concave,
        inconclusive,
    }
}
