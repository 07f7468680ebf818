//! Brute-force Gauss-Hermite evaluation of `‖V_M - V_N‖` for systems with
//! two modes. The integrand is a polynomial of degree 8 in each of eight
//! real Gaussian coordinates, so five nodes per axis integrate it exactly.

use faer::Mat;
use green_kernels::Cutoff;

use crate::l2::SparseV;

/// Nodes and weights for `E[f(Z)]`, `Z ~ N(0,1)` (Golub-Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let j = Mat::from_fn(n, n, |i, k| {
        if i + 1 == k || k + 1 == i {
            (i.max(k) as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = j.self_adjoint_eigen(faer::Side::Lower).expect("tridiagonal eigen");
    let vals = eig.S().column_vector();
    let vecs = eig.U();
    let nodes = (0..n).map(|i| vals[i]).collect();
    let weights = (0..n).map(|i| vecs[(0, i)] * vecs[(0, i)]).collect();
    (nodes, weights)
}

fn kernel(eig: &[f64; 2], u: &Mat<f64>, amp: &[f64; 2]) -> Mat<f64> {
    let _ = eig;
    Mat::from_fn(u.nrows(), u.nrows(), |x, y| {
        (0..2).map(|k| amp[k] * amp[k] * u[(x, k)] * u[(y, k)]).sum()
    })
}

/// Wick-ordered `V` of a single field configuration.
pub fn wick_v(w: f64, sv: &SparseV, g: &Mat<f64>, re: &[f64], im: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, nb) in sv.iter().enumerate() {
        let nx = re[x] * re[x] + im[x] * im[x];
        for &(y, v) in nb {
            let ny = re[y] * re[y] + im[y] * im[y];
            let cross = re[x] * re[y] + im[x] * im[y];
            acc += v
                * (nx * ny - g[(x, x)] * ny - g[(y, y)] * nx - 2.0 * g[(x, y)] * cross
                    + g[(x, x)] * g[(y, y)]
                    + g[(x, y)] * g[(x, y)]);
        }
    }
    0.5 * w * w * acc
}

/// `‖V_M - V_N‖` for a two-mode system with eigenvalues `eig`, modes `u`
/// (sites x 2, normalised so that `w sum u^2 = 1`) and weights `sv`.
pub fn two_mode_truncation(eig: [f64; 2], u: &Mat<f64>, w: f64, sv: &SparseV, n: f64, m: f64, cutoff: Cutoff) -> f64 {
    let amp_n = [0, 1].map(|k| (cutoff.weight(eig[k] / n) / eig[k]).sqrt());
    let amp_m = [0, 1].map(|k| (cutoff.weight(eig[k] / m) / eig[k]).sqrt());
    let amp_psi = [0, 1].map(|k| (amp_m[k] * amp_m[k] - amp_n[k] * amp_n[k]).max(0.0).sqrt());
    let gn = kernel(&eig, u, &amp_n);
    let gm = kernel(&eig, u, &amp_m);
    let (nodes, weights) = gauss_hermite(5);
    let d = u.nrows();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut idx = [0usize; 8];
    let mut total = 0.0;
    let mut rn = vec![0.0; d];
    let mut in_ = vec![0.0; d];
    let mut rm = vec![0.0; d];
    let mut im = vec![0.0; d];
    loop {
        let z: Vec<f64> = idx.iter().map(|&i| nodes[i] * s).collect();
        let wt: f64 = idx.iter().map(|&i| weights[i]).product();
        for x in 0..d {
            let (mut a, mut b, mut c, mut e) = (0.0, 0.0, 0.0, 0.0);
            for k in 0..2 {
                a += amp_n[k] * z[2 * k] * u[(x, k)];
                b += amp_n[k] * z[2 * k + 1] * u[(x, k)];
                c += amp_psi[k] * z[4 + 2 * k] * u[(x, k)];
                e += amp_psi[k] * z[5 + 2 * k] * u[(x, k)];
            }
            rn[x] = a;
            in_[x] = b;
            rm[x] = a + c;
            im[x] = b + e;
        }
        let diff = wick_v(w, sv, &gm, &rm, &im) - wick_v(w, sv, &gn, &rn, &in_);
        total += wt * diff * diff;
        let mut p = 0;
        loop {
            idx[p] += 1;
            if idx[p] < nodes.len() {
                break;
            }
            idx[p] = 0;
            p += 1;
            if p == 8 {
                return total.max(0.0).sqrt();
            }
        }
    }
}
