//! Small numerical utilities: adaptive quadrature, bisection, Poisson and
//! binomial probability mass functions.

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Bisection for a root of `f` on `[lo, hi]`, assuming `f(lo)` and `f(hi)`
/// have opposite signs. Stops when the bracket is narrower than `xtol`.
pub fn bisect<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    max_iter: usize,
) -> f64 {
    let mut flo = f(lo);
    for _ in 0..max_iter {
        if hi - lo <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if (fmid > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Poisson PMF values `P[N = 0..=n_max]` for mean `mu`.
pub fn poisson_pmf(mu: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut term = (-mu).exp();
    out.push(term);
    for n in 1..=n_max {
        term *= mu / n as f64;
        out.push(term);
    }
    out
}

/// Tail mass `P[N > n]` of a Poisson distribution with mean `mu`, summed
/// directly rather than as `1 - cdf` so it stays accurate far below 1e-16.
pub fn poisson_tail(mu: f64, n: usize) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    // Start from log pmf(n + 1) to avoid underflow of the running product.
    let k = (n + 1) as f64;
    let mut term = (k * mu.ln() - mu - ln_factorial(n + 1)).exp();
    let mut sum = 0.0;
    let mut j = n + 1;
    loop {
        sum += term;
        j += 1;
        term *= mu / j as f64;
        if term < 1e-30 * sum || term == 0.0 {
            break;
        }
    }
    sum
}

/// Smallest `n` such that `P[N > n] < tol`.
pub fn poisson_truncation(mu: f64, tol: f64) -> usize {
    let mut n = 0;
    while poisson_tail(mu, n) >= tol {
        n += 1;
    }
    n
}

pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

pub fn binomial_coefficient(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// Binomial(n, q) PMF over `0..=n`.
pub fn binomial_pmf(n: usize, q: f64) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            binomial_coefficient(n as u64, k as u64)
                * q.powi(k as i32)
                * (1.0 - q).powi((n - k) as i32)
        })
        .collect()
}
