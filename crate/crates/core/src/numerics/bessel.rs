use std::f64::consts::{FRAC_PI_4, PI};

/// Bessel function of the first kind, order zero.
///
/// Miller's backward recurrence normalized by `J0 + 2ΣJ_2k = 1` for
/// `|x| <= 25`, Hankel's asymptotic expansion beyond that. Absolute error
/// stays below 1e-13 on `|x| <= 100`.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax == 0.0 {
        return 1.0;
    }
    if ax <= 25.0 {
        miller_j0(ax)
    } else {
        hankel_j0(ax)
    }
}

fn miller_j0(x: f64) -> f64 {
    // Start well above x so the seed's error has decayed by the time n reaches 0.
    let mut n = (x as usize + 30 + (10.0 * x.sqrt()) as usize) | 1;
    n += 1; // even start
    let mut j_next = 0.0; // J_{n+1}
    let mut j_cur = 1e-300; // J_n
    let mut even_sum = 0.0; // Σ_{k>=1} J_{2k}
    while n > 0 {
        let j_prev = (2.0 * n as f64 / x) * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        n -= 1;
        if n % 2 == 0 && n > 0 {
            even_sum += j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            even_sum *= 1e-250;
        }
    }
    j_cur / (j_cur + 2.0 * even_sum)
}

fn hankel_j0(x: f64) -> f64 {
    // a_k = Π_{j=1..k} (2j-1)^2 / (k! 8^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut xpow = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60usize {
        if k > 0 {
            let t = (2 * k - 1) as f64;
            a *= t * t / (k as f64 * 8.0);
            xpow *= x;
        }
        let term = a / xpow;
        if term > last {
            break;
        }
        last = term;
        // a_k(0) carries (-1)^k, so Q starts at -1/(8x).
        match k % 4 {
            0 => p += term,
            1 => q -= term,
            2 => p -= term,
            _ => q += term,
        }
        if term < 1e-18 {
            break;
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
