//! Independent reference implementations used as test oracles. Everything here
//! works on plain `Vec<Vec<f64>>` and avoids the library's numerical code.

#![allow(dead_code)]

use hawkes_branch::{Event, EventSequence, HawkesParams, Matrix, TransitionMatrix};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_dense(m: &Matrix<f64>) -> Dense {
    m.to_rows()
}

pub fn from_dense(d: &Dense) -> Matrix<f64> {
    Matrix::from_rows(d)
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Random row-stochastic lower-triangular matrix with support entries drawn
/// from `[lo, 1)` before normalization.
pub fn random_transition(n: usize, lo: f64, rng: &mut impl Rng) -> TransitionMatrix<f64> {
    let rows: Dense = (0..n)
        .map(|i| {
            let r: Vec<f64> = (0..n).map(|j| if j <= i { rng.random_range(lo..1.0) } else { 0.0 }).collect();
            let s: f64 = r.iter().sum();
            r.into_iter().map(|x| x / s).collect()
        })
        .collect();
    TransitionMatrix::from_rows(&rows).unwrap()
}

/// Random lower-triangular matrix with entries uniform in `[lo, hi)`.
pub fn random_lower(n: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Matrix<f64> {
    Matrix::from_fn(n, n, |i, j| if j <= i { rng.random_range(lo..hi) } else { 0.0 })
}

/// Minimizer of `(ρ/2)(x − v)² + w|x|` by exhaustive search over the grid
/// `k·h`, `h = 1e-4`, covering `[min(0, v), max(0, v)]` with a margin.
pub fn grid_scalar_prox(v: f64, rho: f64, w: f64) -> f64 {
    let h = 1e-4;
    let lo = (v.min(0.0) / h).floor() as i64 - 10;
    let hi = (v.max(0.0) / h).ceil() as i64 + 10;
    let f = |x: f64| 0.5 * rho * (x - v) * (x - v) + w * x.abs();
    let mut best = (f64::INFINITY, 0.0);
    for k in lo..=hi {
        let x = k as f64 * h;
        let fx = f(x);
        if fx < best.0 {
            best = (fx, x);
        }
    }
    best.1
}

fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Minimizer of `KL(B‖B0) + ρ Σᵢ (⟨Zᵢ, B⟩ + KL(B‖Xᵢ))` over row simplices on the
/// lower-triangular support, by Euclidean projected gradient descent. Inputs
/// must be strictly positive on the support.
pub fn b_update_oracle(b0: &Dense, xs: [&Dense; 2], zs: [&Dense; 2], rho: f64, steps: usize) -> Dense {
    let n = b0.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        let m = i + 1;
        // gradient of the row objective: (1+2ρ)(ln b + 1) − ln b0 − ρ Σ (ln x − z)
        let lin: Vec<f64> = (0..m)
            .map(|j| b0[i][j].ln() + rho * ((xs[0][i][j].ln() - zs[0][i][j]) + (xs[1][i][j].ln() - zs[1][i][j])))
            .collect();
        let c = 1.0 + 2.0 * rho;
        let mut b = vec![1.0 / m as f64; m];
        for _ in 0..steps {
            let min_b = b.iter().copied().fold(f64::INFINITY, f64::min);
            let eta = 0.5 * min_b / c;
            let grad: Vec<f64> = (0..m).map(|j| c * (b[j].ln() + 1.0) - lin[j]).collect();
            let step: Vec<f64> = (0..m).map(|j| b[j] - eta * grad[j]).collect();
            b = project_simplex(&step);
        }
        out[i][..m].copy_from_slice(&b);
    }
    out
}

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    (0..n).map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect()
}

fn transpose(a: &Dense) -> Dense {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

fn fro(a: &Dense) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(a: &Dense) -> Option<Dense> {
    let n = a.len();
    let mut m: Dense = a.iter().enumerate().map(|(i, r)| {
        let mut row = r.clone();
        row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
        row
    }).collect();
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap())?;
        if m[p][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, p);
        let d = m[col][col];
        for x in m[col].iter_mut() {
            *x /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Orthogonal polar factor `UVᵀ` of a nonsingular matrix by scaled Newton iteration.
pub fn polar_factor(a: &Dense) -> Option<Dense> {
    let mut x = a.clone();
    for _ in 0..100 {
        let inv = inverse(&x)?;
        let zeta = (fro(&inv) / fro(&x)).sqrt();
        let invt = transpose(&inv);
        let next: Dense = x
            .iter()
            .zip(&invt)
            .map(|(r, s)| r.iter().zip(s).map(|(p, q)| 0.5 * (zeta * p + q / zeta)).collect())
            .collect();
        let diff: f64 = next.iter().flatten().zip(x.iter().flatten()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        x = next;
        if diff < 1e-14 {
            break;
        }
    }
    Some(x)
}

/// Minimizer of `(ρ/2)‖X − M‖²_F + w‖X‖_*` by subgradient descent with step
/// `1/(ρ(k+1))`, which makes every iterate the running average of
/// `M − (w/ρ) UₖVₖᵀ`.
pub fn nuclear_prox_oracle(m: &Dense, rho: f64, w: f64, iters: usize) -> Dense {
    let n = m.len();
    let mut x = m.clone();
    for k in 0..iters {
        let g = polar_factor(&x).unwrap_or_else(|| vec![vec![0.0; n]; n]);
        let eta = 1.0 / (k + 1) as f64;
        for i in 0..n {
            for j in 0..n {
                x[i][j] -= eta * ((x[i][j] - m[i][j]) + (w / rho) * g[i][j]);
            }
        }
    }
    x
}

/// Minimizer of `(ρ/2)‖x − v‖² + w1‖x‖₁ + w2‖x‖₂` by subgradient descent with
/// step `1/(ρ(k+1))`.
pub fn group_prox_oracle(v: &[f64], rho: f64, w1: f64, w2: f64, iters: usize) -> Vec<f64> {
    let mut x = v.to_vec();
    for k in 0..iters {
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let eta = 1.0 / (k + 1) as f64;
        let g: Vec<f64> = x
            .iter()
            .zip(v)
            .map(|(&xi, &vi)| {
                let s = if xi > 0.0 { 1.0 } else if xi < 0.0 { -1.0 } else { 0.0 };
                let grp = if norm > 0.0 { xi / norm } else { 0.0 };
                (xi - vi) + (w1 * s + w2 * grp) / rho
            })
            .collect();
        for (xi, gi) in x.iter_mut().zip(g) {
            *xi -= eta * gi;
        }
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

pub fn singular_values_oracle(a: &Dense) -> Vec<f64> {
    let mut s: Vec<f64> = jacobi_eigenvalues(&matmul(&transpose(a), a)).into_iter().map(|e| e.max(0.0).sqrt()).collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// `KL(B‖B0) + λ(α‖B‖₁ + (1−α)R(B))` from the definitions.
pub fn objective_oracle(b: &Dense, b0: &Dense, lambda: f64, alpha: f64, nuclear: bool, floor: f64) -> f64 {
    let n = b.len();
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..=i {
            if b[i][j] > 0.0 {
                kl += b[i][j] * (b[i][j].ln() - b0[i][j].max(floor).ln());
            }
        }
    }
    if lambda == 0.0 {
        return kl;
    }
    let l1: f64 = b.iter().flatten().map(|x| x.abs()).sum();
    let reg: f64 = if nuclear {
        singular_values_oracle(b).iter().sum()
    } else {
        (0..n).map(|j| b.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt()).sum()
    };
    kl + lambda * (alpha * l1 + (1.0 - alpha) * reg)
}

/// Total intensity `Σ_c λ_c(t)` with the first `upto` events as history.
fn total_intensity(mu: &[f64], a: &Dense, beta: f64, events: &[(f64, usize)], upto: usize, t: f64) -> f64 {
    (0..mu.len())
        .map(|c| mu[c] + events[..upto].iter().map(|&(s, k)| a[c][k] * beta * (-beta * (t - s)).exp()).sum::<f64>())
        .sum()
}

/// Log-likelihood with the compensator computed by the trapezoid rule,
/// `steps` sub-intervals between consecutive events.
pub fn trapezoid_log_likelihood(params: &HawkesParams<f64>, seq: &EventSequence<f64>, steps: usize) -> f64 {
    let mu = params.mu().to_vec();
    let a = params.infectivity().to_rows();
    let beta = params.kernel().beta();
    let events: Vec<(f64, usize)> = seq.events().iter().map(|e: &Event<f64>| (e.t, e.c)).collect();
    let mut log_sum = 0.0;
    for (n, &(t, c)) in events.iter().enumerate() {
        let lam = mu[c] + events[..n].iter().map(|&(s, k)| a[c][k] * beta * (-beta * (t - s)).exp()).sum::<f64>();
        log_sum += lam.ln();
    }
    let mut bounds = vec![0.0];
    bounds.extend(events.iter().map(|e| e.0));
    bounds.push(seq.horizon());
    let mut integral = 0.0;
    for seg in 0..bounds.len() - 1 {
        let (lo, hi) = (bounds[seg], bounds[seg + 1]);
        if hi <= lo {
            continue;
        }
        let h = (hi - lo) / steps as f64;
        let f = |t: f64| total_intensity(&mu, &a, beta, &events, seg, t);
        let mut s = 0.5 * (f(lo) + f(hi));
        for k in 1..steps {
            s += f(lo + k as f64 * h);
        }
        integral += s * h;
    }
    log_sum - integral
}
