//! Dormand–Prince 5(4) integration with per-step error control.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Local error bound per step, mixed absolute/relative: `tol·(1 + |y|)`.
    pub tol: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { tol: 1e-9, initial_step: None, max_steps: 1_000_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights are A[6]; E = fifth - fourth
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `dy/dt = f(t, y)` from `times[0]` and returns the state at every
/// requested time. Steps are clipped so that each output time is hit exactly.
///
/// `on_step` is called with every accepted `(t, y)` and may abort the run.
pub fn integrate<const D: usize, F, G>(
    mut f: F,
    y0: [f64; D],
    times: &[f64],
    opts: &OdeOptions,
    mut on_step: G,
) -> Result<Vec<[f64; D]>>
where
    F: FnMut(f64, &[f64; D]) -> Result<[f64; D]>,
    G: FnMut(f64, &[f64; D]) -> Result<()>,
{
    if times.is_empty() {
        return Err(Error::InvalidArgument("no output times requested".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("output times must be strictly increasing".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }

    let mut out = Vec::with_capacity(times.len());
    out.push(y0);
    let mut t = times[0];
    let mut y = y0;
    let mut k0 = f(t, &y)?;
    let span = times[times.len() - 1] - times[0];
    let mut h = opts.initial_step.unwrap_or_else(|| (span * 1e-3).max(1e-6));
    let mut steps = 0usize;

    for &target in &times[1..] {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepUnderflow { t, step: h });
            }
            let last = h >= target - t;
            let step = if last { target - t } else { h };
            let min_step = 1e-14 * t.abs().max(span).max(1.0);
            if step < min_step && !last {
                return Err(Error::StepUnderflow { t, step });
            }

            let mut k = [[0.0; D]; 7];
            k[0] = k0;
            for s in 1..7 {
                let mut ys = y;
                for d in 0..D {
                    ys[d] += step * (0..s).map(|j| A[s][j] * k[j][d]).sum::<f64>();
                }
                k[s] = f(t + C[s] * step, &ys)?;
            }
            let mut y_new = y;
            let mut err = 0.0f64;
            for d in 0..D {
                y_new[d] += step * (0..6).map(|j| A[6][j] * k[j][d]).sum::<f64>();
                let e = step * (0..7).map(|j| E[j] * k[j][d]).sum::<f64>();
                let scale = opts.tol * (1.0 + y[d].abs().max(y_new[d].abs()));
                err = err.max((e / scale).abs());
            }
            if !err.is_finite() {
                h = step * 0.2;
                continue;
            }

            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                // FSAL: the last stage is f(t + h, y_new)
                k0 = k[6];
                on_step(t, &y)?;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                if !last {
                    h = step * factor;
                }
            } else {
                h = step * factor.min(1.0);
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_hook<const D: usize>(_: f64, _: &[f64; D]) -> Result<()> {
        Ok(())
    }

    #[test]
    fn exponential_growth_matches_closed_form() {
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let ys = integrate(|_, y| Ok([y[0]]), [1.0], &times, &OdeOptions::with_tol(1e-11), no_hook)
            .unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0] - t.exp()).abs() < 1e-9 * t.exp());
        }
    }

    #[test]
    fn harmonic_oscillator_period() {
        let times = [0.0, std::f64::consts::TAU];
        let ys = integrate(
            |_, y| Ok([y[1], -y[0]]),
            [1.0, 0.0],
            &times,
            &OdeOptions::with_tol(1e-12),
            no_hook,
        )
        .unwrap();
        assert!((ys[1][0] - 1.0).abs() < 1e-9);
        assert!(ys[1][1].abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_times_and_tolerance() {
        let f = |_: f64, y: &[f64; 1]| Ok([y[0]]);
        assert!(integrate(f, [1.0], &[0.0, 0.0], &OdeOptions::default(), no_hook).is_err());
        assert!(integrate(f, [1.0], &[0.0, 1.0], &OdeOptions::with_tol(0.0), no_hook).is_err());
    }

    #[test]
    fn singular_field_underflows() {
        // dy/dt = 1/(1-t)^2 blows up at t = 1
        let opts = OdeOptions { max_steps: 100_000, ..OdeOptions::with_tol(1e-10) };
        let r = integrate(|t, _| Ok([1.0 / (1.0 - t).powi(2)]), [0.0], &[0.0, 2.0], &opts, no_hook);
        assert!(matches!(r, Err(Error::StepUnderflow { .. })));
    }

    #[test]
    fn field_errors_propagate() {
        let r = integrate(
            |t, y: &[f64; 1]| if t > 0.5 { Err(Error::WindowExit { t }) } else { Ok([y[0]]) },
            [1.0],
            &[0.0, 1.0],
            &OdeOptions::default(),
            no_hook,
        );
        assert!(matches!(r, Err(Error::WindowExit { .. })));
    }
}
