//! Two-qubit correlation measures: Wootters concurrence, entanglement of
//! formation, mutual information and projective-measurement discord.
//! Entropies are in bits.

use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;
use thiserror::Error;

use crate::lindblad::Trajectory;
use crate::metrics::trapezoid;
use crate::qops::{entropy_of_spectrum, hermitian_eig, kron, pauli, ComplexMatrix, DensityMatrix, QopsError};

const STATE_TOL: f64 = 1e-8;
const THETA_POINTS: usize = 64;
const PHI_POINTS: usize = 32;
/// Refinement stops once the compass step is below this (radians).
const STEP_TOL: f64 = 1e-8;
const MAX_REFINE_ITERS: usize = 20_000;
/// Number of best grid points each refined separately.
const REFINE_STARTS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorrelationError {
    #[error("expected a two-qubit state, got dimension {0}")]
    NotTwoQubit(usize),
    #[error("not a valid density matrix: {0}")]
    InvalidState(String),
    #[error("trajectory has no reduced states on sites {0:?}")]
    MissingReducedStates(Vec<usize>),
    #[error("empty correlation series")]
    EmptySeries,
    #[error("series ends at ct = {last} before the horizon {horizon}")]
    ShortSeries { last: f64, horizon: f64 },
    #[error(transparent)]
    Qops(#[from] QopsError),
}

/// Which qubit of the pair the projective measurement acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measured {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscordResult {
    /// Discord clamped at zero.
    pub value: f64,
    /// Value before clamping; slightly negative only through optimizer round-off.
    pub raw: f64,
    /// Maximal classical correlation J found.
    pub classical: f64,
    /// Whether every local refinement reached the step tolerance.
    pub converged: bool,
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<(), CorrelationError> {
    let m = rho.matrix();
    if m.rows() != 4 || m.cols() != 4 {
        return Err(CorrelationError::NotTwoQubit(m.rows()));
    }
    let res = m.hermiticity_residual();
    if res > STATE_TOL {
        return Err(CorrelationError::InvalidState(format!("Hermiticity residual {res:.3e}")));
    }
    let tr = m.trace().re;
    if (tr - 1.0).abs() > 1e-6 {
        return Err(CorrelationError::InvalidState(format!("trace {tr}")));
    }
    Ok(())
}

fn symmetrized(m: &ComplexMatrix) -> ComplexMatrix {
    (m + &m.adjoint()).scale_real(0.5)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of_spectrum(&[p, 1.0 - p])
}

/// Eigenvalues of a 2×2 Hermitian matrix `[[a, b], [b*, d]]`.
fn eig2(a: f64, d: f64, b: C64) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - r, mean + r]
}

fn entropy2(m: &[C64; 4]) -> f64 {
    entropy_of_spectrum(&eig2(m[0].re, m[3].re, m[1]))
}

/// Reduced 2×2 state of one qubit of a 4×4 pair, row-major.
fn reduced(m: &ComplexMatrix, keep: Measured) -> [C64; 4] {
    let mut out = [C64::new(0.0, 0.0); 4];
    for i in 0..2 {
        for j in 0..2 {
            out[i * 2 + j] = match keep {
                Measured::First => m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)],
                Measured::Second => m[(i, j)] + m[(2 + i, 2 + j)],
            };
        }
    }
    out
}

fn spectrum(rho: &DensityMatrix) -> Result<Vec<f64>, CorrelationError> {
    let eig = hermitian_eig(&symmetrized(rho.matrix()))?;
    if eig.values[0] < -STATE_TOL {
        return Err(CorrelationError::InvalidState(format!("eigenvalue {:.3e}", eig.values[0])));
    }
    Ok(eig.values)
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`.
///
/// The λᵢ are square roots of the eigenvalues of `√ρ ρ̃ √ρ`, which is Hermitian
/// and shares its spectrum with `ρ ρ̃`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64, CorrelationError> {
    check_two_qubit(rho)?;
    let m = symmetrized(rho.matrix());
    let eig = hermitian_eig(&m)?;
    if eig.values[0] < -STATE_TOL {
        return Err(CorrelationError::InvalidState(format!("eigenvalue {:.3e}", eig.values[0])));
    }
    let sqrt_rho = eig.map_spectrum(|l| l.max(0.0).sqrt());
    let yy = kron(&pauli::sigma_y(), &pauli::sigma_y());
    let tilde = &(&yy * &m.conj()) * &yy;
    let r = symmetrized(&(&(&sqrt_rho * &tilde) * &sqrt_rho));
    let mut lambdas: Vec<f64> =
        hermitian_eig(&r)?.values.into_iter().map(|v| v.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}

/// `h((1 + √(1 − C²))/2)`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt()))
}

/// Entanglement of formation in bits.
pub fn eof(rho: &DensityMatrix) -> Result<f64, CorrelationError> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

/// `S(ρ_A) + S(ρ_B) − S(ρ)`.
pub fn mutual_information(rho: &DensityMatrix) -> Result<f64, CorrelationError> {
    check_two_qubit(rho)?;
    let m = rho.matrix();
    let s_ab = entropy_of_spectrum(&spectrum(rho)?);
    Ok((entropy2(&reduced(m, Measured::First)) + entropy2(&reduced(m, Measured::Second)) - s_ab)
        .max(0.0))
}

/// Measurement basis vector `cos(ϑ/2)|0⟩ + e^{iϕ} sin(ϑ/2)|1⟩` and its orthogonal partner.
fn basis(theta: f64, phi: f64) -> [[C64; 2]; 2] {
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let e = C64::from_polar(1.0, phi);
    [[C64::new(c, 0.0), e * s], [-e.conj() * s, C64::new(c, 0.0)]]
}

/// Σ_k p_k S(ρ_other|k) for the projective measurement along (ϑ, ϕ).
fn conditional_entropy(m: &ComplexMatrix, side: Measured, theta: f64, phi: f64) -> f64 {
    let mut total = 0.0;
    for k in basis(theta, phi) {
        // unnormalized ⟨k|ρ|k⟩ on the measured qubit
        let mut block = [C64::new(0.0, 0.0); 4];
        for x in 0..2 {
            for y in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..2 {
                    for j in 0..2 {
                        let (r, c) = match side {
                            Measured::First => (2 * i + x, 2 * j + y),
                            Measured::Second => (2 * x + i, 2 * y + j),
                        };
                        acc += k[i].conj() * k[j] * m[(r, c)];
                    }
                }
                block[2 * x + y] = acc;
            }
        }
        let p = block[0].re + block[3].re;
        if p > 1e-14 {
            for v in block.iter_mut() {
                *v /= p;
            }
            total += p * entropy2(&block);
        }
    }
    total
}

/// Compass search on the sphere of measurement directions, from `start`.
fn refine(f: &impl Fn(f64, f64) -> f64, start: (f64, f64), step0: f64) -> ((f64, f64), f64, bool) {
    let (mut x, mut best) = (start, f(start.0, start.1));
    let mut step = step0;
    for _ in 0..MAX_REFINE_ITERS {
        if step < STEP_TOL {
            return (x, best, true);
        }
        let mut improved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let cand = (x.0 + dt, x.1 + dp);
            let v = f(cand.0, cand.1);
            if v < best {
                best = v;
                x = cand;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, best, false)
}

/// Discord `I(ρ) − J(ρ)` with `J` maximized over projective measurements on `side`:
/// a 64×32 grid over (ϑ ∈ [0, π], ϕ ∈ [0, 2π)) followed by compass refinement
/// of the best grid points.
pub fn discord(rho: &DensityMatrix, side: Measured) -> Result<DiscordResult, CorrelationError> {
    check_two_qubit(rho)?;
    let m = symmetrized(rho.matrix());
    let s_ab = entropy_of_spectrum(&spectrum(rho)?);
    let other = match side {
        Measured::First => Measured::Second,
        Measured::Second => Measured::First,
    };
    let s_measured = entropy2(&reduced(&m, side));
    let s_other = entropy2(&reduced(&m, other));
    let mutual = s_measured + s_other - s_ab;

    let f = |t: f64, p: f64| conditional_entropy(&m, side, t, p);
    let dt = PI / (THETA_POINTS - 1) as f64;
    let dp = 2.0 * PI / PHI_POINTS as f64;
    let mut samples = Vec::with_capacity(THETA_POINTS * PHI_POINTS);
    for i in 0..THETA_POINTS {
        for j in 0..PHI_POINTS {
            let (t, p) = (i as f64 * dt, j as f64 * dp);
            samples.push((f(t, p), t, p));
        }
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = samples[0].0;
    let mut converged = true;
    for &(_, t, p) in samples.iter().take(REFINE_STARTS) {
        let (_, v, ok) = refine(&f, (t, p), dt.min(dp));
        converged &= ok;
        best = best.min(v);
    }
    let classical = s_other - best;
    let raw = mutual - classical;
    if raw < -1e-6 {
        log::warn!("discord optimizer produced {raw:.3e} before clamping");
    }
    Ok(DiscordResult { value: raw.max(0.0), raw, classical, converged })
}

/// Correlations of the pair at one record time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelationSample {
    pub ct: f64,
    pub eof: f64,
    /// Discord with the measurement on the first site of the pair.
    pub discord_2: f64,
    /// Discord with the measurement on the second site of the pair.
    pub discord_4: f64,
    pub mutual_info: f64,
}

impl CorrelationSample {
    pub fn of_state(ct: f64, rho: &DensityMatrix) -> Result<Self, CorrelationError> {
        Ok(CorrelationSample {
            ct,
            eof: eof(rho)?,
            discord_2: discord(rho, Measured::First)?.value,
            discord_4: discord(rho, Measured::Second)?.value,
            mutual_info: mutual_information(rho)?,
        })
    }
}

/// Correlations of the reduced pair `[2, 4]` along a trajectory.
pub fn correlation_series(traj: &Trajectory) -> Result<Vec<CorrelationSample>, CorrelationError> {
    correlation_series_on(traj, &[2, 4])
}

/// Correlations of the reduced state on `pair` along a trajectory.
pub fn correlation_series_on(
    traj: &Trajectory,
    pair: &[usize],
) -> Result<Vec<CorrelationSample>, CorrelationError> {
    let series = traj
        .reduced_on(pair)
        .ok_or_else(|| CorrelationError::MissingReducedStates(pair.to_vec()))?;
    traj.ct
        .iter()
        .zip(&series.states)
        .map(|(&ct, rho)| CorrelationSample::of_state(ct, rho))
        .collect()
}

/// Trapezoidal time average of each measure over `[0, horizon]`.
pub fn time_average(
    series: &[CorrelationSample],
    horizon: f64,
) -> Result<CorrelationSample, CorrelationError> {
    let first = series.first().ok_or(CorrelationError::EmptySeries)?;
    let last = series.last().expect("nonempty").ct;
    let slack = 1e-9 * horizon.abs().max(1.0);
    if last < horizon - slack || first.ct > slack {
        return Err(CorrelationError::ShortSeries { last, horizon });
    }
    let used: Vec<&CorrelationSample> = series.iter().filter(|s| s.ct <= horizon + slack).collect();
    let ct: Vec<f64> = used.iter().map(|s| s.ct).collect();
    let mean = |get: fn(&CorrelationSample) -> f64| -> f64 {
        if used.len() == 1 {
            return get(used[0]);
        }
        let y: Vec<f64> = used.iter().map(|s| get(s)).collect();
        trapezoid(&ct, &y).expect("two or more samples") / (ct[ct.len() - 1] - ct[0])
    };
    Ok(CorrelationSample {
        ct: horizon,
        eof: mean(|s| s.eof),
        discord_2: mean(|s| s.discord_2),
        discord_4: mean(|s| s.discord_4),
        mutual_info: mean(|s| s.mutual_info),
    })
}

/// CSV with columns `ct, eof, discord2, discord4, mutual_info`.
pub fn write_series_csv(series: &[CorrelationSample], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "ct,eof,discord2,discord4,mutual_info")?;
    for s in series {
        writeln!(
            w,
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
            s.ct, s.eof, s.discord_2, s.discord_4, s.mutual_info
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell_eg_ge() -> DensityMatrix {
        let s = 0.5f64.sqrt();
        DensityMatrix::from_pure(&[c(0.0), c(s), c(s), c(0.0)]).unwrap()
    }

    fn werner(p: f64) -> DensityMatrix {
        let s = 0.5f64.sqrt();
        let phi = [c(s), c(0.0), c(0.0), c(s)];
        let bell = ComplexMatrix::outer(&phi, &phi).scale_real(p);
        let noise = ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
        DensityMatrix::new(&bell + &noise).unwrap()
    }

    fn mixed_pair() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::real_diagonal(&[0.0, 0.5, 0.5, 0.0])).unwrap()
    }

    /// Cyclic Jacobi rotations for a real symmetric matrix; independent of the
    /// library eigensolver. Returns (eigenvalues, eigenvectors as columns).
    fn jacobi(mut a: [[f64; 4]; 4]) -> ([f64; 4], [[f64; 4]; 4]) {
        let mut v = [[0.0; 4]; 4];
        for (i, row) in v.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for _ in 0..100 {
            let off: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[i][j] * a[i][j]).sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..4 {
                for q in p + 1..4 {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let (cs, sn) = (1.0 / (t * t + 1.0).sqrt(), t / (t * t + 1.0).sqrt());
                    for k in 0..4 {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = cs * akp - sn * akq;
                        a[k][q] = sn * akp + cs * akq;
                    }
                    for k in 0..4 {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = cs * apk - sn * aqk;
                        a[q][k] = sn * apk + cs * aqk;
                    }
                    for row in v.iter_mut() {
                        let (vp, vq) = (row[p], row[q]);
                        row[p] = cs * vp - sn * vq;
                        row[q] = sn * vp + cs * vq;
                    }
                }
            }
        }
        ([a[0][0], a[1][1], a[2][2], a[3][3]], v)
    }

    /// Concurrence of a real two-qubit state via Jacobi eigen-decompositions.
    fn concurrence_oracle(rho: &[[f64; 4]; 4]) -> f64 {
        let mul = |x: &[[f64; 4]; 4], y: &[[f64; 4]; 4]| {
            let mut o = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    o[i][j] = (0..4).map(|k| x[i][k] * y[k][j]).sum();
                }
            }
            o
        };
        let (vals, vecs) = jacobi(*rho);
        let mut sq = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                sq[i][j] = (0..4).map(|k| vecs[i][k] * vecs[j][k] * vals[k].max(0.0).sqrt()).sum();
            }
        }
        // σy⊗σy is real: anti-diagonal with signs (−1, 1, 1, −1)
        let mut yy = [[0.0; 4]; 4];
        for (i, s) in [-1.0, 1.0, 1.0, -1.0].iter().enumerate() {
            yy[i][3 - i] = *s;
        }
        let tilde = mul(&mul(&yy, rho), &yy);
        let r = mul(&mul(&sq, &tilde), &sq);
        let (mut l, _) = jacobi(r);
        for x in l.iter_mut() {
            *x = x.max(0.0).sqrt();
        }
        l.sort_by(|a, b| b.total_cmp(a));
        (l[0] - l[1] - l[2] - l[3]).max(0.0)
    }

    fn real_parts(rho: &DensityMatrix) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = rho.matrix()[(i, j)].re;
            }
        }
        out
    }

    /// Conditional entropy through full 4×4 projector algebra.
    fn conditional_entropy_oracle(rho: &DensityMatrix, side: Measured, theta: f64, phi: f64) -> f64 {
        let (cth, sth) = ((0.5 * theta).cos(), (0.5 * theta).sin());
        let e = C64::from_polar(1.0, phi);
        let up = [c(cth), e * sth];
        let down = [-e.conj() * sth, c(cth)];
        let mut total = 0.0;
        for v in [up, down] {
            let proj = ComplexMatrix::outer(&v, &v);
            let full = match side {
                Measured::First => kron(&proj, &ComplexMatrix::identity(2)),
                Measured::Second => kron(&ComplexMatrix::identity(2), &proj),
            };
            let post = &(&full * rho.matrix()) * &full;
            let p = post.trace().re;
            if p < 1e-14 {
                continue;
            }
            let keep = match side {
                Measured::First => 2,
                Measured::Second => 1,
            };
            let red = crate::qops::partial_trace(&DensityMatrix::new_unchecked(post.scale_real(1.0 / p)), &[keep]).unwrap();
            total += p * entropy_of_spectrum(&hermitian_eig(red.matrix()).unwrap().values);
        }
        total
    }

    fn discord_oracle(rho: &DensityMatrix, side: Measured) -> f64 {
        let (nt, np) = (512, 256);
        let mut best = f64::INFINITY;
        for i in 0..nt {
            for j in 0..np {
                let t = PI * i as f64 / (nt - 1) as f64;
                let p = 2.0 * PI * j as f64 / np as f64;
                best = best.min(conditional_entropy_oracle(rho, side, t, p));
            }
        }
        let keep_other = match side {
            Measured::First => 2,
            Measured::Second => 1,
        };
        let keep_measured = 3 - keep_other;
        let s = |r: &DensityMatrix| entropy_of_spectrum(&hermitian_eig(r.matrix()).unwrap().values);
        let s_a = s(&crate::qops::partial_trace(rho, &[keep_measured]).unwrap());
        s_a - s(rho) + best
    }

    fn random_state(rng: &mut impl Rng, rank: usize) -> DensityMatrix {
        let mut m = ComplexMatrix::zeros(4, 4);
        for _ in 0..rank {
            let v: Vec<C64> = (0..4).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            m = &m + &ComplexMatrix::outer(&v, &v);
        }
        let tr = m.trace().re;
        DensityMatrix::new(m.scale_real(1.0 / tr)).unwrap()
    }

    fn random_unitary2(rng: &mut impl Rng) -> ComplexMatrix {
        let (t, p, l) = (rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
        let b = basis(t, p);
        ComplexMatrix::from_fn(2, 2, |i, j| b[j][i] * C64::from_polar(1.0, l * j as f64))
    }

    #[test]
    fn concurrence_examples() {
        assert_abs_diff_eq!(concurrence(&bell_eg_ge()).unwrap(), 1.0, epsilon = 1e-12);
        let product = DensityMatrix::new(kron(
            &ComplexMatrix::real_diagonal(&[0.3, 0.7]),
            &ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]),
        ))
        .unwrap();
        assert_abs_diff_eq!(concurrence(&product).unwrap(), 0.0, epsilon = 1e-7);
        let w = werner(0.6);
        let got = concurrence(&w).unwrap();
        assert_abs_diff_eq!(got, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(got, concurrence_oracle(&real_parts(&w)), epsilon = 1e-12);
        assert_eq!(concurrence(&werner(0.2)).unwrap(), 0.0);
    }

    #[test]
    fn concurrence_matches_jacobi_oracle_on_random_real_states() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(21);
        for _ in 0..20 {
            let mut m = ComplexMatrix::zeros(4, 4);
            for _ in 0..2 {
                let v: Vec<C64> = (0..4).map(|_| c(rng.gen_range(-1.0..1.0))).collect();
                m = &m + &ComplexMatrix::outer(&v, &v);
            }
            let tr = m.trace().re;
            let rho = DensityMatrix::new(m.scale_real(1.0 / tr)).unwrap();
            let oracle = concurrence_oracle(&real_parts(&rho));
            assert_abs_diff_eq!(concurrence(&rho).unwrap(), oracle, epsilon = 1e-7);
        }
    }

    #[test]
    fn eof_examples() {
        assert_abs_diff_eq!(eof(&bell_eg_ge()).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eof_from_concurrence(0.0), 0.0);
        assert_abs_diff_eq!(eof_from_concurrence(1.0), 1.0);
        let x: f64 = 0.5 * (1.0 + 0.84f64.sqrt());
        let direct = -x * x.log2() - (1.0 - x) * (1.0 - x).log2();
        assert_abs_diff_eq!(eof(&werner(0.6)).unwrap(), direct, epsilon = 1e-12);
        let mut last = 0.0;
        for k in 0..=100 {
            let e = eof_from_concurrence(k as f64 / 100.0);
            assert!(e >= last && (0.0..=1.0).contains(&e));
            last = e;
        }
    }

    #[test]
    fn discord_examples() {
        for side in [Measured::First, Measured::Second] {
            let d = discord(&bell_eg_ge(), side).unwrap();
            assert_abs_diff_eq!(d.value, 1.0, epsilon = 1e-9);
            assert!(d.converged);
            assert_abs_diff_eq!(discord(&mixed_pair(), side).unwrap().value, 0.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(mutual_information(&mixed_pair()).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mutual_information(&bell_eg_ge()).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn discord_of_werner_matches_brute_force_grid() {
        let w = werner(0.5);
        for side in [Measured::First, Measured::Second] {
            let got = discord(&w, side).unwrap().value;
            assert_abs_diff_eq!(got, discord_oracle(&w, side), epsilon = 1e-4);
        }
    }

    #[test]
    fn discord_of_random_state_matches_brute_force_grid() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        let rho = random_state(&mut rng, 2);
        for side in [Measured::First, Measured::Second] {
            let got = discord(&rho, side).unwrap().value;
            // the optimizer can only beat the grid, by at most its resolution
            let oracle = discord_oracle(&rho, side);
            assert!(got <= oracle + 1e-9 && got > oracle - 1e-4, "{got} vs {oracle}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let big = DensityMatrix::maximally_mixed(8);
        assert!(matches!(concurrence(&big), Err(CorrelationError::NotTwoQubit(8))));
        let neg = DensityMatrix::new_unchecked(ComplexMatrix::real_diagonal(&[1.5, -0.5, 0.0, 0.0]));
        assert!(concurrence(&neg).is_err());
        assert!(discord(&neg, Measured::First).is_err());
        let bad_trace = DensityMatrix::new_unchecked(ComplexMatrix::real_diagonal(&[0.5, 0.0, 0.0, 0.0]));
        assert!(matches!(mutual_information(&bad_trace), Err(CorrelationError::InvalidState(_))));
    }

    #[test]
    fn time_average_examples() {
        let mk = |ct: f64, v: f64| CorrelationSample { ct, eof: v, discord_2: v, discord_4: v, mutual_info: v };
        let constant: Vec<_> = (0..=10).map(|k| mk(k as f64, 0.3)).collect();
        let avg = time_average(&constant, 10.0).unwrap();
        assert_abs_diff_eq!(avg.eof, 0.3, epsilon = 1e-15);
        let ramp: Vec<_> = (0..=1000).map(|k| mk(k as f64 * 0.01, k as f64 / 1000.0)).collect();
        let avg = time_average(&ramp, 10.0).unwrap();
        assert_abs_diff_eq!(avg.discord_2, 0.5, epsilon = 1e-9);
        assert!(matches!(time_average(&[], 1.0), Err(CorrelationError::EmptySeries)));
        assert!(matches!(time_average(&ramp, 20.0), Err(CorrelationError::ShortSeries { .. })));
        // horizon inside the series averages only the prefix
        let avg = time_average(&ramp, 5.0).unwrap();
        assert_abs_diff_eq!(avg.mutual_info, 0.25, epsilon = 1e-9);
    }

    #[test]
    fn series_requires_reduced_states() {
        let traj = Trajectory {
            ct: vec![0.0],
            populations: vec![vec![0.0; 4]],
            reduced: vec![],
            snapshots: vec![],
            diagnostics: vec![],
            steps: 0,
        };
        assert!(matches!(correlation_series(&traj), Err(CorrelationError::MissingReducedStates(_))));
    }

    #[test]
    fn series_csv_header() {
        let s = CorrelationSample::of_state(0.0, &bell_eg_ge()).unwrap();
        let mut buf = Vec::new();
        write_series_csv(&[s], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("ct,eof,discord2,discord4,mutual_info\n0.00000000000e0,1.00000000000e0,"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn measures_are_bounded(seed in any::<u64>(), rank in 1usize..=4) {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let rho = random_state(&mut rng, rank);
            let cval = concurrence(&rho).unwrap();
            prop_assert!((0.0..=1.0).contains(&cval));
            let e = eof(&rho).unwrap();
            prop_assert!((0.0..=1.0).contains(&e));
            let mi = mutual_information(&rho).unwrap();
            for side in [Measured::First, Measured::Second] {
                let d = discord(&rho, side).unwrap();
                prop_assert!(d.raw > -1e-6);
                prop_assert!(d.value <= mi + 1e-9);
                let m = symmetrized(rho.matrix());
                prop_assert!(d.value <= entropy2(&reduced(&m, side)) + 1e-9);
            }
        }

        /// States diagonal in a product basis carry no discord on either side.
        #[test]
        fn classical_states_have_zero_discord(seed in any::<u64>()) {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let mut w: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..1.0)).collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
            let u = kron(&random_unitary2(&mut rng), &random_unitary2(&mut rng));
            let m = &(&u * &ComplexMatrix::real_diagonal(&w)) * &u.adjoint();
            let rho = DensityMatrix::new(symmetrized(&m)).unwrap();
            for side in [Measured::First, Measured::Second] {
                prop_assert!(discord(&rho, side).unwrap().value < 1e-6);
            }
        }

        /// Swapping the qubits exchanges the two discords.
        #[test]
        fn swap_symmetric_states_have_equal_discords(seed in any::<u64>()) {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let rho = random_state(&mut rng, 2);
            let swap = ComplexMatrix::from_fn(4, 4, |i, j| {
                let s = [0, 2, 1, 3];
                if s[i] == j { c(1.0) } else { c(0.0) }
            });
            let swapped = &(&swap * rho.matrix()) * &swap;
            let sym = DensityMatrix::new((&swapped + rho.matrix()).scale_real(0.5)).unwrap();
            let d2 = discord(&sym, Measured::First).unwrap().value;
            let d4 = discord(&sym, Measured::Second).unwrap().value;
            prop_assert!((d2 - d4).abs() < 1e-6);
        }
    }
}
