//! Field monomials, their Wick-ordered versions and free correlations.

use serde::{Deserialize, Serialize};

/// `(x_1..x_p; x~_1..x~_p)` as grid site indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointTuple {
    pub x: Vec<usize>,
    pub xt: Vec<usize>,
}

impl PointTuple {
    pub fn new(x: Vec<usize>, xt: Vec<usize>) -> Self {
        Self { x, xt }
    }

    pub fn p(&self) -> usize {
        self.x.len()
    }

    /// Swap the two blocks (the Hermitian adjoint).
    pub fn adjoint(&self) -> Self {
        Self {
            x: self.xt.clone(),
            xt: self.x.clone(),
        }
    }
}

#[inline]
pub(crate) fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

/// `prod φ̄(x~_j) prod φ(x_i)` over the index subsets given as bitmasks.
pub fn monomial(phi: &dyn Fn(usize) -> (f64, f64), pts: &PointTuple, xs: u32, xts: u32) -> (f64, f64) {
    let mut acc = (1.0, 0.0);
    for (i, &x) in pts.x.iter().enumerate() {
        if xs >> i & 1 == 1 {
            acc = cmul(acc, phi(x));
        }
    }
    for (j, &y) in pts.xt.iter().enumerate() {
        if xts >> j & 1 == 1 {
            let (r, i) = phi(y);
            acc = cmul(acc, (r, -i));
        }
    }
    acc
}

/// Permanent of `G(x_S, x~_T)`, summing over bijections `S -> T`.
pub fn permanent(g: &dyn Fn(usize, usize) -> f64, pts: &PointTuple, xs: u32, xts: u32) -> f64 {
    if xs == 0 {
        return if xts == 0 { 1.0 } else { 0.0 };
    }
    let i = xs.trailing_zeros();
    let rest = xs & !(1 << i);
    let mut total = 0.0;
    let mut t = xts;
    while t != 0 {
        let j = t.trailing_zeros();
        t &= t - 1;
        total += g(pts.x[i as usize], pts.xt[j as usize]) * permanent(g, pts, rest, xts & !(1 << j));
    }
    total
}

/// `γ⁰_p = sum_{π ∈ S_p} prod_i G(x_i, x~_{π(i)})`.
pub fn free_corr(g: &dyn Fn(usize, usize) -> f64, pts: &PointTuple) -> f64 {
    let full = (1u32 << pts.p()) - 1;
    permanent(g, pts, full, full)
}

/// `:prod φ̄(x~) prod φ(x):` by the recursion
/// `:A φ(x): = :A: φ(x) - sum_{φ̄(y) ∈ A} G(x,y) :A \ φ̄(y):`.
pub fn wick_monomial(phi: &dyn Fn(usize) -> (f64, f64), g: &dyn Fn(usize, usize) -> f64, pts: &PointTuple) -> (f64, f64) {
    let p = pts.p();
    let full = (1u32 << p) - 1;
    // memo over (x mask, x~ mask)
    let mut memo = vec![None; 1 << (2 * p)];
    wick_rec(phi, g, pts, full, full, &mut memo)
}

fn wick_rec(
    phi: &dyn Fn(usize) -> (f64, f64),
    g: &dyn Fn(usize, usize) -> f64,
    pts: &PointTuple,
    xs: u32,
    xts: u32,
    memo: &mut Vec<Option<(f64, f64)>>,
) -> (f64, f64) {
    let key = (xs | xts << pts.p()) as usize;
    if let Some(v) = memo[key] {
        return v;
    }
    let out = if xs == 0 {
        // only φ̄ factors: no self-contractions
        monomial(phi, pts, 0, xts)
    } else {
        let i = 31 - xs.leading_zeros();
        let rest = xs & !(1 << i);
        let x = pts.x[i as usize];
        let mut acc = cmul(wick_rec(phi, g, pts, rest, xts, memo), phi(x));
        let mut t = xts;
        while t != 0 {
            let j = t.trailing_zeros();
            t &= t - 1;
            let sub = wick_rec(phi, g, pts, rest, xts & !(1 << j), memo);
            let c = g(x, pts.xt[j as usize]);
            acc.0 -= c * sub.0;
            acc.1 -= c * sub.1;
        }
        acc
    };
    memo[key] = Some(out);
    out
}

/// Integrand of the combination route
/// `γ̂_p = sum_k (-1)^{p-k} sum_{|S|=|T|=k} γ_k(x_S, x~_T) γ⁰_{p-k}(x_{S^c}, x~_{T^c})`,
/// which is `sum_k C(p,k)^2 (-1)^{p-k} P(γ_k ⊗ γ⁰_{p-k}) P` written on
/// subsets: each pair `(S, T)` arises from `(k!(p-k)!)^2` permutation pairs.
/// Returns one term per `k` so the caller can estimate each `γ_k` separately.
pub fn combination_terms(
    phi: &dyn Fn(usize) -> (f64, f64),
    g: &dyn Fn(usize, usize) -> f64,
    pts: &PointTuple,
) -> Vec<(f64, f64)> {
    let p = pts.p();
    let full = (1u32 << p) - 1;
    let mut terms = vec![(0.0, 0.0); p + 1];
    for s in 0..=full {
        for t in 0..=full {
            let k = s.count_ones();
            if k != t.count_ones() {
                continue;
            }
            let free = permanent(g, pts, full & !s, full & !t);
            if free == 0.0 {
                continue;
            }
            let m = monomial(phi, pts, s, t);
            let sign = if (p as u32 - k) % 2 == 0 { 1.0 } else { -1.0 };
            terms[k as usize].0 += sign * free * m.0;
            terms[k as usize].1 += sign * free * m.1;
        }
    }
    terms
}

/// The symmetrised weight is the sum of these over all `(π_1, π_2, π_3)`;
/// a single configuration: product over connected components of the
/// unit-distance graph of `1/(1 + |rep|^θ)`, `rep` the member of least norm.
pub fn upsilon(points: &[[f64; 2]], theta: f64) -> f64 {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = (points[i][0] - points[j][0]).hypot(points[i][1] - points[j][1]);
            if d <= 1.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut rep: Vec<Option<f64>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        let norm = points[i][0].hypot(points[i][1]);
        rep[r] = Some(rep[r].map_or(norm, |m: f64| m.min(norm)));
    }
    rep.iter().flatten().map(|r| 1.0 / (1.0 + r.powf(theta))).product()
}

fn permutations(p: usize) -> Vec<Vec<usize>> {
    if p == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for perm in permutations(p - 1) {
        for pos in 0..=perm.len() {
            let mut q = perm.clone();
            q.insert(pos, p - 1);
            out.push(q);
        }
    }
    out
}

/// `Υ_θ(x, x~) = sum_{π1,π2,π3 ∈ S_p} prod_i Υ_θ(x_i, x_{π1 i}, x~_{π2 i}, x~_{π3 i})`.
pub fn upsilon_symmetrised(x: &[[f64; 2]], xt: &[[f64; 2]], theta: f64) -> f64 {
    let p = x.len();
    let perms = permutations(p);
    let mut total = 0.0;
    for p1 in &perms {
        for p2 in &perms {
            for p3 in &perms {
                total += (0..p)
                    .map(|i| upsilon(&[x[i], x[p1[i]], xt[p2[i]], xt[p3[i]]], theta))
                    .product::<f64>();
            }
        }
    }
    total
}
