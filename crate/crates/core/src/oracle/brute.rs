use crate::error::{HoaError, Result};
use crate::models::Model;

// Ridders' extrapolated central difference: successive steps shrink by CON and
// the tableau stops once the error estimate grows.
const CON: f64 = 1.4;
const NTAB: usize = 10;

fn ridders(f: &dyn Fn(f64) -> f64, x: f64, h0: f64) -> f64 {
    let con2 = CON * CON;
    let mut a = [[0.0f64; NTAB]; NTAB];
    let mut h = h0;
    a[0][0] = (f(x + h) - f(x - h)) / (2.0 * h);
    let mut best = a[0][0];
    let mut err = f64::MAX;
    for i in 1..NTAB {
        h /= CON;
        a[0][i] = (f(x + h) - f(x - h)) / (2.0 * h);
        let mut fac = con2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= con2;
            let e = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    best
}

fn initial_step(x: f64) -> f64 {
    0.05 * (1.0 + x.abs())
}

fn partial(f: &dyn Fn(&[f64]) -> f64, x: &[f64], k: usize, h: f64) -> f64 {
    let g = |t: f64| {
        let mut z = x.to_vec();
        z[k] = t;
        f(&z)
    };
    ridders(&g, x[k], h)
}

fn det(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => (0..n)
            .map(|c| {
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect())
                    .collect();
                let s = if c % 2 == 0 { 1.0 } else { -1.0 };
                s * m[0][c] * det(&minor)
            })
            .sum(),
    }
}

fn solve(m: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let d = det(m);
    if d == 0.0 || !d.is_finite() {
        return Err(HoaError::Singular {
            context: "brute-force solve",
            rank: 0,
            cols: m.len(),
        });
    }
    Ok((0..m.len())
        .map(|c| {
            let mc: Vec<Vec<f64>> = m
                .iter()
                .zip(b)
                .map(|(row, &bi)| {
                    let mut r = row.clone();
                    r[c] = bi;
                    r
                })
                .collect();
            det(&mc) / d
        })
        .collect())
}

/// Intermediate quantities of the brute-force evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    pub theta_hat: Vec<f64>,
    pub theta_psi: Vec<f64>,
    pub phi_hat: Vec<f64>,
    pub phi_psi: Vec<f64>,
    pub q: f64,
}

struct Oracle<'a> {
    model: &'a dyn Model<f64>,
}

impl Oracle<'_> {
    fn score(&self, th: &[f64]) -> Vec<f64> {
        if let Some(g) = self.model.score(th) {
            return g;
        }
        let f = |t: &[f64]| self.model.loglik(t);
        (0..th.len()).map(|k| partial(&f, th, k, initial_step(th[k]) * 0.1)).collect()
    }

    fn info(&self, th: &[f64]) -> Vec<Vec<f64>> {
        if let Some(j) = self.model.obs_info(th) {
            return j.to_rows();
        }
        let p = th.len();
        let mut m = vec![vec![0.0; p]; p];
        for a in 0..p {
            let ga = |t: &[f64]| -self.score(t)[a];
            for (b, v) in m[a].iter_mut().enumerate() {
                *v = partial(&ga, th, b, initial_step(th[b]) * 0.1);
            }
        }
        for a in 0..p {
            for b in 0..a {
                let v = 0.5 * (m[a][b] + m[b][a]);
                m[a][b] = v;
                m[b][a] = v;
            }
        }
        m
    }

    // Newton ascent on the coordinates in `free`, others held fixed.
    fn maximise(&self, mut th: Vec<f64>, free: &[usize]) -> Result<Vec<f64>> {
        let dom = self.model.domain();
        for _ in 0..500 {
            let g = self.score(&th);
            let j = self.info(&th);
            let gs: Vec<f64> = free.iter().map(|&i| g[i]).collect();
            let js: Vec<Vec<f64>> = free.iter().map(|&a| free.iter().map(|&b| j[a][b]).collect()).collect();
            let step = solve(&js, &gs)?;
            let f0 = self.model.loglik(&th);
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let mut trial = th.clone();
                for (s, &i) in step.iter().zip(free) {
                    trial[i] += t * s;
                }
                if dom.contains(&trial) {
                    let f1 = self.model.loglik(&trial);
                    if f1.is_finite() && f1 >= f0 - 1e-12 * (1.0 + f0.abs()) {
                        th = trial;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            let size = step.iter().map(|s| s.abs()).fold(0.0, f64::max);
            if !moved || size <= 1e-14 * (1.0 + th.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
                return Ok(th);
            }
        }
        Err(HoaError::NotConverged {
            iterations: 500,
            last: th,
        })
    }

    fn directions(&self, theta_hat: &[f64]) -> Result<Vec<Vec<f64>>> {
        if let Some(m) = self.model.sufficient_directions(theta_hat) {
            return Ok(m.to_rows());
        }
        let y = self.model.observations();
        let d = self.model.obs_dim();
        let p = self.model.dim();
        let mut v = vec![vec![0.0; p]; y.len()];
        for j in 0..self.model.n_obs() {
            let yj = &y[j * d..(j + 1) * d];
            let z = |yy: &[f64], th: &[f64], c: usize| {
                self.model.pivot(j, yy, th).map(|z| z[c]).unwrap_or(f64::NAN)
            };
            if self.model.pivot(j, yj, theta_hat).is_none() {
                return Err(HoaError::Unsupported(format!(
                    "model '{}' exposes neither pivots nor directions",
                    self.model.id()
                )));
            }
            let dz_dy: Vec<Vec<f64>> = (0..d)
                .map(|c| (0..d).map(|i| partial(&|yy: &[f64]| z(yy, theta_hat, c), yj, i, initial_step(yj[i]) * 0.1)).collect())
                .collect();
            for k in 0..p {
                let dz_dk: Vec<f64> = (0..d)
                    .map(|c| partial(&|th: &[f64]| z(yj, th, c), theta_hat, k, initial_step(theta_hat[k]) * 0.1))
                    .collect();
                let col = solve(&dz_dy, &dz_dk)?;
                for (i, c) in col.into_iter().enumerate() {
                    v[j * d + i][k] = -c;
                }
            }
        }
        Ok(v)
    }

    fn phi(&self, v: &[Vec<f64>], th: &[f64]) -> Vec<f64> {
        let p = th.len();
        if let Some(g) = self.model.dloglik_dy(th) {
            return (0..p).map(|k| v.iter().zip(&g).map(|(row, gi)| row[k] * gi).sum()).collect();
        }
        let y0 = self.model.observations();
        (0..p)
            .map(|k| {
                let f = |t: f64| {
                    let y: Vec<f64> = y0.iter().zip(v).map(|(&yi, row)| yi + t * row[k]).collect();
                    self.model.loglik_at(th, &y)
                };
                ridders(&f, 0.0, 0.01)
            })
            .collect()
    }

    fn dphi(&self, v: &[Vec<f64>], th: &[f64]) -> Vec<Vec<f64>> {
        let p = th.len();
        let mut m = vec![vec![0.0; p]; p];
        for (a, row) in m.iter_mut().enumerate() {
            for (b, val) in row.iter_mut().enumerate() {
                *val = partial(&|t: &[f64]| self.phi(v, t)[a], th, b, initial_step(th[b]) * 0.1);
            }
        }
        m
    }
}

/// `q(ψ)` from the determinant expression
/// `|φ̂ − φ_ψ, ∂φ/∂λ(θ̂_ψ)| / |∂φ/∂θ(θ̂)| · {|ȷ(θ̂)|/|ȷ_λλ(θ̂_ψ)|}^{1/2}`,
/// with its own optimiser, Ridders-extrapolated derivatives and cofactor
/// determinants. Continuous models with `p ≤ 3` only.
pub fn brute_force_q28(model: &dyn Model<f64>, psi: f64) -> Result<BruteForce> {
    let p = model.dim();
    if p > 3 {
        return Err(HoaError::Unsupported("brute-force q is limited to p <= 3".into()));
    }
    if model.structure().is_discrete() {
        return Err(HoaError::Unsupported("brute-force q covers continuous models only".into()));
    }
    let k = model.interest_index();
    let o = Oracle { model };
    let all: Vec<usize> = (0..p).collect();
    let theta_hat = o.maximise(model.start(), &all)?;
    let nuisance: Vec<usize> = (0..p).filter(|&i| i != k).collect();
    let mut start = theta_hat.clone();
    start[k] = psi;
    let theta_psi = if nuisance.is_empty() {
        start
    } else {
        o.maximise(start, &nuisance)?
    };
    let v = o.directions(&theta_hat)?;
    let phi_hat = o.phi(&v, &theta_hat);
    let phi_psi = o.phi(&v, &theta_psi);
    let j_hat = o.dphi(&v, &theta_hat);
    let j_psi = o.dphi(&v, &theta_psi);
    let mut num = j_psi.clone();
    for (row, (a, b)) in num.iter_mut().zip(phi_hat.iter().zip(&phi_psi)) {
        row[k] = a - b;
    }
    let info_hat = o.info(&theta_hat);
    let info_psi = o.info(&theta_psi);
    let ll: Vec<Vec<f64>> = nuisance.iter().map(|&a| nuisance.iter().map(|&b| info_psi[a][b]).collect()).collect();
    let ratio = det(&info_hat) / det(&ll);
    if !(ratio > 0.0) {
        return Err(HoaError::InformationSign { value: ratio });
    }
    let q = det(&num) / det(&j_hat) * ratio.sqrt();
    Ok(BruteForce {
        theta_hat,
        theta_psi,
        phi_hat,
        phi_psi,
        q,
    })
}
