//! Integer-order Bessel functions of the first kind.

use super::FloquetError;

/// Largest |order| accepted by [`bessel_j`].
pub const MAX_ORDER: i32 = 200;
/// Largest |argument| accepted by [`bessel_j`] and the coupling series.
pub const MAX_ARG: f64 = 50.0;

const RESCALE_ABOVE: f64 = 1e250;

/// J_s(x) for integer `s`.
///
/// Orders at or below |x| use forward recurrence seeded with J₀, J₁; higher
/// orders come straight out of Miller's normalized downward recurrence.
pub fn bessel_j(s: i32, x: f64) -> Result<f64, FloquetError> {
    if s.abs() > MAX_ORDER || !(x.abs() <= MAX_ARG) {
        return Err(FloquetError::BesselOutOfRange { order: s, arg: x });
    }
    let n = s.unsigned_abs() as usize;
    let parity = if s < 0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let value = if n >= 2 && (n as f64) <= x.abs() {
        let seeds = bessel_sequence(1, x);
        let (mut prev, mut cur) = (seeds[0], seeds[1]);
        for k in 1..n {
            let next = 2.0 * k as f64 / x * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    } else {
        bessel_sequence(n, x)[n]
    };
    Ok(parity * value)
}

/// J₀(x), …, J_nmax(x) by Miller's algorithm with the sum rule
/// J₀ + 2ΣJ₂ₖ = 1 as normalization.
pub fn bessel_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = nmax.max(ax.ceil() as usize);
    let mut start = top + 20 + (160.0 * top as f64).sqrt().ceil() as usize;
    start += start % 2;

    let mut above = 0.0;
    let mut cur = 1e-30;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        // cur holds J_k up to scale; step down to J_{k-1}
        let below = 2.0 * k as f64 / ax * cur - above;
        above = cur;
        cur = below;
        let order = k - 1;
        if order <= nmax {
            out[order] = cur;
        }
        if order % 2 == 0 && order > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > RESCALE_ABOVE {
            let f = 1.0 / RESCALE_ABOVE;
            cur *= f;
            above *= f;
            norm *= f;
            for v in out.iter_mut().skip(order) {
                *v *= f;
            }
        }
    }
    norm += cur;
    for (order, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && order % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// Upper bound on Σ_{n > s} (x/2)^n / n!, which dominates Σ_{n>s} |J_n(x)|.
pub fn tail_bound(s: usize, x: f64) -> f64 {
    let half = x.abs() / 2.0;
    if half == 0.0 {
        return 0.0;
    }
    let mut log_term: f64 = (1..=s + 1).map(|n| half.ln() - (n as f64).ln()).sum();
    let mut total = 0.0;
    let mut n = s + 1;
    loop {
        let term = log_term.exp();
        total += term;
        n += 1;
        log_term += half.ln() - (n as f64).ln();
        if term < 1e-300 || (term < total * 1e-17 && (n as f64) > half) {
            break;
        }
    }
    total
}
