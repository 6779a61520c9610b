//! Dense non-Hermitian eigenvalue solver.
//!
//! The pipeline is the classical one: permutation balancing isolates
//! eigenvalues sitting in rows or columns with no off-diagonal coupling,
//! diagonal scaling equilibrates the remaining active block, Householder
//! reflections reduce it to upper Hessenberg form, and implicitly shifted
//! complex QR sweeps (Wilkinson shifts, exceptional shifts every ten
//! stalled iterations) deflate it one eigenvalue at a time.
//!
//! Only eigenvalues are computed, so each QR sweep touches the active
//! window alone.
//!
//! Permutation balancing matters here: the open baker has `N/3` exactly
//! zero columns and the Walsh toy model has `3^k − 2^k` states that are
//! annihilated after finitely many steps. Both are isolated exactly, so
//! the zero eigenvalues come out as exact zeros instead of an
//! `ε^{1/m}`-sized cloud from nilpotent Jordan blocks.

use crate::matrix::{ComplexMatrix, C64, ZERO};
use crate::{Error, Result};

const ULP: f64 = f64::EPSILON;
const SAFE_MIN: f64 = f64::MIN_POSITIVE;

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// QR iterations allowed per deflated eigenvalue before giving up.
    pub iterations_per_eigenvalue: usize,
    pub scale: bool,
    /// Eigenpairs checked by inverse iteration for the residual estimate.
    pub residual_samples: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            iterations_per_eigenvalue: 30,
            scale: true,
            residual_samples: 6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenvalues {
    pub values: Vec<C64>,
    /// Largest `‖Hv − λv‖ / ‖H‖_F` over sampled pairs, on the reduced active block.
    pub residual: f64,
    /// Eigenvalues isolated exactly by permutation balancing.
    pub isolated: usize,
}

pub fn eigenvalues(m: &ComplexMatrix) -> Result<Eigenvalues> {
    eigenvalues_with(m, &EigenOptions::default())
}

pub fn eigenvalues_with(m: &ComplexMatrix, opts: &EigenOptions) -> Result<Eigenvalues> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let (isolated, active) = isolate(m);
    let mut values: Vec<C64> = isolated.iter().map(|&i| m[(i, i)]).collect();
    let mut residual = 0.0;
    if !active.is_empty() {
        let mut block = m.principal_submatrix(&active);
        if opts.scale {
            scale_balance(&mut block);
        }
        let dim = block.dim();
        let mut h = block.as_slice().to_vec();
        hessenberg_reduce(&mut h, dim);
        let hess = h.clone();
        let active_values = hessenberg_qr(&mut h, dim, opts.iterations_per_eigenvalue)?;
        residual = sampled_residual(&hess, dim, &active_values, opts.residual_samples);
        values.extend(active_values);
    }
    Ok(Eigenvalues {
        values,
        residual,
        isolated: isolated.len(),
    })
}

/// Splits indices into those whose eigenvalue is isolated by a symmetric
/// permutation and the remaining active set (in original order).
///
/// A row with no off-diagonal nonzero among the active columns, or a
/// column with none among the active rows, isolates its diagonal entry.
/// Removals are driven by a work queue over nonzero counts, so the cost is
/// `O(n²)` however long the cascade is.
fn isolate(m: &ComplexMatrix) -> (Vec<usize>, Vec<usize>) {
    let n = m.dim();
    let mut row_count = vec![0usize; n];
    let mut col_count = vec![0usize; n];
    for (i, rc) in row_count.iter_mut().enumerate() {
        for (j, z) in m.row(i).iter().enumerate() {
            if i != j && *z != ZERO {
                *rc += 1;
                col_count[j] += 1;
            }
        }
    }
    let mut alive = vec![true; n];
    let mut queue: Vec<usize> = (0..n)
        .filter(|&i| row_count[i] == 0 || col_count[i] == 0)
        .collect();
    let mut removed = Vec::new();
    while let Some(v) = queue.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        removed.push(v);
        for x in 0..n {
            if x == v || !alive[x] {
                continue;
            }
            if m[(x, v)] != ZERO {
                row_count[x] -= 1;
                if row_count[x] == 0 {
                    queue.push(x);
                }
            }
            if m[(v, x)] != ZERO {
                col_count[x] -= 1;
                if col_count[x] == 0 {
                    queue.push(x);
                }
            }
        }
    }
    let active = (0..n).filter(|&i| alive[i]).collect();
    (removed, active)
}

/// Parlett–Reinsch diagonal scaling by powers of two.
fn scale_balance(a: &mut ComplexMatrix) {
    let n = a.dim();
    if n < 2 {
        return;
    }
    const RADIX: f64 = 2.0;
    let radix_sq = RADIX * RADIX;
    loop {
        let mut changed = false;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].l1_norm();
                    r += a[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= radix_sq;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= radix_sq;
            }
            if (c + r) / f < 0.95 * s {
                changed = true;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                    a[(j, i)] *= f;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// In-place reduction of a row-major `n × n` matrix to upper Hessenberg
/// form by Hermitian Householder reflections `H = I − τ v v†`.
fn hessenberg_reduce(a: &mut [C64], n: usize) {
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    for k in 0..n - 2 {
        let len = n - k - 1;
        let x = |i: usize| a[(k + 1 + i) * n + k];
        let norm = (0..len).map(|i| x(i).norm_sqr()).sum::<f64>().sqrt();
        let tail = (1..len).map(|i| x(i).norm_sqr()).sum::<f64>();
        if tail == 0.0 {
            continue;
        }
        let x0 = x(0);
        let phase = if x0 == ZERO {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        // v = x + e^{iθ}‖x‖ e₁, so H x = −e^{iθ}‖x‖ e₁.
        let v = &mut v[..len];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = x(i);
        }
        v[0] += phase * norm;
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm_sq;

        // Left: rows k+1.., columns k..
        let w = &mut w[k..n];
        w.fill(ZERO);
        for (i, vi) in v.iter().enumerate() {
            let cv = vi.conj();
            let row = &a[(k + 1 + i) * n + k..(k + 2 + i) * n];
            for (wj, aij) in w.iter_mut().zip(row) {
                *wj += cv * aij;
            }
        }
        for (i, vi) in v.iter().enumerate() {
            let s = vi * tau;
            let row = &mut a[(k + 1 + i) * n + k..(k + 2 + i) * n];
            for (aij, wj) in row.iter_mut().zip(w.iter()) {
                *aij -= s * wj;
            }
        }
        // Exact zeros below the subdiagonal.
        a[(k + 1) * n + k] = -phase * norm;
        for i in 1..len {
            a[(k + 1 + i) * n + k] = ZERO;
        }

        // Right: all rows, columns k+1..
        for i in 0..n {
            let row = &mut a[i * n + k + 1..(i + 1) * n];
            let u: C64 = row.iter().zip(v.iter()).map(|(x, y)| x * y).sum();
            let s = u * tau;
            for (aij, vj) in row.iter_mut().zip(v.iter()) {
                *aij -= s * vj.conj();
            }
        }
    }
}

#[inline]
fn cabs1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Givens rotation `G = [c s; −s̄ c]` with `G [x; y] = [r; 0]`.
#[inline]
fn givens(x: C64, y: C64) -> (f64, C64, C64) {
    if y == ZERO {
        return (1.0, ZERO, x);
    }
    if x == ZERO {
        let ay = y.norm();
        return (0.0, y.conj() / ay, C64::new(ay, 0.0));
    }
    let ax = x.norm();
    let norm = ax.hypot(y.norm());
    let phase = x / ax;
    (ax / norm, phase * y.conj() / norm, phase * norm)
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR.
fn hessenberg_qr(h: &mut [C64], n: usize, iterations_per_eigenvalue: usize) -> Result<Vec<C64>> {
    let at = |i: usize, j: usize| i * n + j;
    let mut values = vec![ZERO; n];
    let smlnum = SAFE_MIN * (n as f64 / ULP);
    let max_its = iterations_per_eigenvalue.max(10) * n.max(10);
    let mut total_its = 0usize;
    let mut hi = n - 1;
    let mut its = 0usize;
    loop {
        // Locate the top of the unreduced block ending at `hi`.
        let mut l = hi;
        while l > 0 {
            let sub = h[at(l, l - 1)];
            if cabs1(sub) <= smlnum {
                break;
            }
            let mut tst = cabs1(h[at(l - 1, l - 1)]) + cabs1(h[at(l, l)]);
            if tst == 0.0 {
                if l >= 2 {
                    tst += h[at(l - 1, l - 2)].re.abs();
                }
                if l < hi {
                    tst += h[at(l + 1, l)].re.abs();
                }
            }
            if cabs1(sub) <= ULP * tst {
                // Ahues & Tisseur conservative deflation test.
                let ab = cabs1(sub).max(cabs1(h[at(l - 1, l)]));
                let ba = cabs1(sub).min(cabs1(h[at(l - 1, l)]));
                let diff = h[at(l - 1, l - 1)] - h[at(l, l)];
                let aa = cabs1(h[at(l, l)]).max(cabs1(diff));
                let bb = cabs1(h[at(l, l)]).min(cabs1(diff));
                let s = aa + ab;
                if ba * (ab / s) <= smlnum.max(ULP * (bb * (aa / s))) {
                    break;
                }
            }
            l -= 1;
        }
        if l > 0 {
            h[at(l, l - 1)] = ZERO;
        }
        if l == hi {
            values[hi] = h[at(hi, hi)];
            its = 0;
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }

        its += 1;
        total_its += 1;
        if total_its > max_its || its > iterations_per_eigenvalue.max(10) * 10 {
            return Err(Error::NonConvergence {
                iterations: total_its,
                active: hi - l + 1,
            });
        }

        let shift = if its % 20 == 10 {
            h[at(l, l)] + 0.75 * cabs1(h[at(l + 1, l)])
        } else if its.is_multiple_of(20) {
            h[at(hi, hi)] + 0.75 * cabs1(h[at(hi, hi - 1)])
        } else {
            wilkinson_shift(
                h[at(hi - 1, hi - 1)],
                h[at(hi - 1, hi)],
                h[at(hi, hi - 1)],
                h[at(hi, hi)],
            )
        };

        let mut x = h[at(l, l)] - shift;
        let mut y = h[at(l + 1, l)];
        for k in l..hi {
            if k > l {
                x = h[at(k, k - 1)];
                y = h[at(k + 1, k - 1)];
            }
            let (c, s, r) = givens(x, y);
            if k > l {
                h[at(k, k - 1)] = r;
                h[at(k + 1, k - 1)] = ZERO;
            }
            let start = if k > l { k } else { l };
            for j in start..=hi {
                let a = h[at(k, j)];
                let b = h[at(k + 1, j)];
                h[at(k, j)] = a * c + s * b;
                h[at(k + 1, j)] = -s.conj() * a + b * c;
            }
            let sc = s.conj();
            for i in l..=(k + 2).min(hi) {
                let a = h[at(i, k)];
                let b = h[at(i, k + 1)];
                h[at(i, k)] = a * c + b * sc;
                h[at(i, k + 1)] = b * c - a * s;
            }
        }
    }
    Ok(values)
}

/// Eigenvalue of the trailing 2×2 block `[a b; c d]` closest to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let u = b.sqrt() * c.sqrt();
    let s = cabs1(u);
    if s == 0.0 {
        return d;
    }
    let x = (a - d) * 0.5;
    let sx = cabs1(x);
    let s = s.max(sx);
    let xs = x / s;
    let us = u / s;
    let mut y = (xs * xs + us * us).sqrt() * s;
    if sx > 0.0 {
        let xn = x / sx;
        if xn.re * y.re + xn.im * y.im < 0.0 {
            y = -y;
        }
    }
    d - u * (u / (x + y))
}

/// Inverse iteration on the Hessenberg form for a few evenly spaced
/// eigenvalues; returns the worst relative residual.
fn sampled_residual(hess: &[C64], n: usize, values: &[C64], samples: usize) -> f64 {
    if samples == 0 || values.is_empty() {
        return 0.0;
    }
    let hnorm = hess.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if hnorm == 0.0 {
        return 0.0;
    }
    let step = (values.len() / samples).max(1);
    let mut worst = 0.0f64;
    for &lambda in values.iter().step_by(step).take(samples) {
        let x = hessenberg_inverse_iteration(hess, n, lambda, hnorm);
        let mut res = 0.0;
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            let lo = i.saturating_sub(1);
            let mut acc = -lambda * x[i];
            for j in lo..n {
                acc += hess[i * n + j] * x[j];
            }
            res += acc.norm_sqr();
        }
        worst = worst.max(res.sqrt() / (hnorm * xnorm));
    }
    worst
}

fn hessenberg_inverse_iteration(hess: &[C64], n: usize, lambda: C64, hnorm: f64) -> Vec<C64> {
    // Perturb the shift slightly so the factorization stays nonsingular.
    let sigma = lambda + C64::new(ULP * hnorm, 0.0);
    let mut x: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + (i % 7) as f64 * 0.1, (i % 5) as f64 * 0.05))
        .collect();
    for _ in 0..3 {
        x = hessenberg_solve(hess, n, sigma, &x, hnorm);
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        for z in x.iter_mut() {
            *z /= norm;
        }
    }
    x
}

/// Solves `(H − σI) x = b` by Gaussian elimination with partial pivoting,
/// exploiting the single subdiagonal.
fn hessenberg_solve(hess: &[C64], n: usize, sigma: C64, b: &[C64], hnorm: f64) -> Vec<C64> {
    let mut a = hess.to_vec();
    for i in 0..n {
        a[i * n + i] -= sigma;
    }
    let mut rhs = b.to_vec();
    let tiny = ULP * hnorm.max(SAFE_MIN);
    for k in 0..n {
        if k + 1 < n && cabs1(a[(k + 1) * n + k]) > cabs1(a[k * n + k]) {
            for j in k..n {
                a.swap(k * n + j, (k + 1) * n + j);
            }
            rhs.swap(k, k + 1);
        }
        if a[k * n + k].norm() < tiny {
            a[k * n + k] = C64::new(tiny, 0.0);
        }
        if k + 1 < n {
            let factor = a[(k + 1) * n + k] / a[k * n + k];
            if factor != ZERO {
                for j in k..n {
                    let akj = a[k * n + j];
                    a[(k + 1) * n + j] -= factor * akj;
                }
                let rk = rhs[k];
                rhs[k + 1] -= factor * rk;
            }
        }
    }
    let mut x = vec![ZERO; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for j in i + 1..n {
            acc -= a[i * n + j] * x[j];
        }
        x[i] = acc / a[i * n + i];
    }
    x
}
