//! Explicit Runge–Kutta steppers on a flat complex state.

use num_complex::Complex64 as C64;

use super::LindbladError;

/// Right-hand side `f(t, y) -> dy`.
pub(crate) trait Rhs {
    fn eval(&mut self, t: f64, y: &[C64], dy: &mut [C64]);
}

fn axpy_into(out: &mut [C64], y: &[C64], terms: &[(f64, &[C64])], h: f64) {
    for i in 0..out.len() {
        let mut acc = C64::new(0.0, 0.0);
        for (w, k) in terms {
            acc += k[i] * *w;
        }
        out[i] = y[i] + acc * h;
    }
}

/// Classical fourth-order Runge–Kutta.
pub(crate) struct Rk4 {
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Rk4 { k: [z.clone(), z.clone(), z.clone(), z.clone()], tmp: z }
    }

    pub fn step(&mut self, f: &mut impl Rhs, t: f64, h: f64, y: &mut [C64]) {
        let [k1, k2, k3, k4] = &mut self.k;
        f.eval(t, y, k1);
        axpy_into(&mut self.tmp, y, &[(0.5, k1)], h);
        f.eval(t + 0.5 * h, &self.tmp, k2);
        axpy_into(&mut self.tmp, y, &[(0.5, k2)], h);
        f.eval(t + 0.5 * h, &self.tmp, k3);
        axpy_into(&mut self.tmp, y, &[(1.0, k3)], h);
        f.eval(t + h, &self.tmp, k4);
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus the embedded fourth-order ones
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Dormand–Prince 5(4) with a standard proportional step controller.
pub(crate) struct Dopri5 {
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    y_new: Vec<C64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub accepted: usize,
    pub rejected: usize,
}

impl Dopri5 {
    pub fn new(n: usize, rel_tol: f64, abs_tol: f64) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Dopri5 {
            k: std::array::from_fn(|_| z.clone()),
            tmp: z.clone(),
            y_new: z,
            rel_tol,
            abs_tol,
            accepted: 0,
            rejected: 0,
        }
    }

    /// Advances `y` from `t0` to exactly `t1`, starting from step `h` and
    /// returning the step to try next. `after_step` runs on every accepted state.
    pub fn integrate(
        &mut self,
        f: &mut impl Rhs,
        t0: f64,
        t1: f64,
        mut h: f64,
        y: &mut [C64],
        mut after_step: impl FnMut(&mut [C64]),
    ) -> Result<f64, LindbladError> {
        let mut t = t0;
        let h_floor = 1e-13 * t1.abs().max(1.0);
        while t < t1 {
            let remaining = t1 - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let err = self.attempt(f, t, step, y);
            if err.is_finite() && err <= 1.0 {
                y.copy_from_slice(&self.y_new);
                after_step(y);
                t = if last { t1 } else { t + step };
                self.accepted += 1;
            } else {
                self.rejected += 1;
            }
            let factor = if err == 0.0 {
                5.0
            } else if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                0.2
            };
            let next = step * factor;
            // keep the proposal when the accepted step was clipped at the end
            if !(last && err <= 1.0) || next > h {
                h = next;
            }
            if h < h_floor && t < t1 {
                return Err(LindbladError::StepUnderflow { t, h });
            }
        }
        Ok(h)
    }

    /// One trial step; fills `y_new` and returns the scaled error norm.
    fn attempt(&mut self, f: &mut impl Rhs, t: f64, h: f64, y: &[C64]) -> f64 {
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        f.eval(t, y, k1);
        axpy_into(&mut self.tmp, y, &[(A21, k1)], h);
        f.eval(t + C2 * h, &self.tmp, k2);
        axpy_into(&mut self.tmp, y, &[(A31, k1), (A32, k2)], h);
        f.eval(t + C3 * h, &self.tmp, k3);
        axpy_into(&mut self.tmp, y, &[(A41, k1), (A42, k2), (A43, k3)], h);
        f.eval(t + C4 * h, &self.tmp, k4);
        axpy_into(&mut self.tmp, y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], h);
        f.eval(t + C5 * h, &self.tmp, k5);
        axpy_into(&mut self.tmp, y, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)], h);
        f.eval(t + h, &self.tmp, k6);
        axpy_into(&mut self.y_new, y, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)], h);
        f.eval(t + h, &self.y_new, k7);

        let mut err: f64 = 0.0;
        for i in 0..y.len() {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let scale = self.abs_tol + self.rel_tol * y[i].norm().max(self.y_new[i].norm());
            err = err.max(e.norm() / scale);
        }
        if self.y_new.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return f64::INFINITY;
        }
        err
    }
}
