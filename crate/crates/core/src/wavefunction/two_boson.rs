use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::two_slit::SlitParams;

/// Bracket of the symmetrized amplitude at the screen,
/// `exp{ik/2L[(x1-a)²+(x2+a)²]} + exp{ik/2L[(x1+a)²+(x2-a)²]}`.
///
/// Exchange-symmetric bitwise: swapping the arguments swaps the two terms.
pub fn two_slit_bracket(x1: f64, x2: f64, params: &SlitParams) -> Complex64 {
    let path_a = |x: f64| (x - params.a()).powi(2);
    let path_b = |x: f64| (x + params.a()).powi(2);
    let g = params.k() / (2.0 * params.l());
    Complex64::from_polar(1.0, g * (path_a(x1) + path_b(x2)))
        + Complex64::from_polar(1.0, g * (path_a(x2) + path_b(x1)))
}

/// Two-boson amplitude `Ψ(x1, L; x2, L)` in the paraxial spherical-wave form.
///
/// The `(1 + (y-L)/L)^{-1}` factors equal one in the screen plane, leaving the
/// prefactor `e^{2ikL}/L²`.
pub fn build_two_slit_wavefunction(x1: f64, x2: f64, params: &SlitParams) -> Result<Complex64> {
    let limit = params.window();
    for x in [x1, x2] {
        if !(x.abs() <= limit) {
            return Err(Error::ParaxialViolation { x: x.abs(), limit });
        }
    }
    let y = params.l();
    let lateral = |yy: f64| 1.0 / (1.0 + (yy - params.l()) / params.l());
    let prefactor = Complex64::from_polar(
        lateral(y) * lateral(y) / (params.l() * params.l()),
        params.k() * (y + y),
    );
    Ok(prefactor * two_slit_bracket(x1, x2, params))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent evaluation of ψ_A(x1)ψ_B(x2) + ψ_A(x2)ψ_B(x1) from the
    // single-slit spherical waves at y = L.
    fn product_oracle(x1: f64, x2: f64, p: &SlitParams) -> Complex64 {
        let (k, a, l) = (p.k(), p.a(), p.l());
        let psi_a = |x: f64| Complex64::from_polar(1.0 / l, k * l) * Complex64::from_polar(1.0, k * (x - a) * (x - a) / (2.0 * l));
        let psi_b = |x: f64| Complex64::from_polar(1.0 / l, k * l) * Complex64::from_polar(1.0, k * (x + a) * (x + a) / (2.0 * l));
        psi_a(x1) * psi_b(x2) + psi_a(x2) * psi_b(x1)
    }

    #[test]
    fn matches_two_factor_oracle() {
        let p = SlitParams::default();
        for &(x1, x2) in &[(0.3, -1.7), (4.2, 9.9), (-10.0, 10.0), (0.0, 0.0), (2.5, 2.5)] {
            let got = build_two_slit_wavefunction(x1, x2, &p).unwrap();
            let want = product_oracle(x1, x2, &p);
            assert!((got - want).norm() <= 1e-12 * want.norm().max(1e-300), "{x1},{x2}: {got} vs {want}");
        }
    }

    #[test]
    fn exchange_symmetry_is_exact() {
        let p = SlitParams::default();
        for &(x1, x2) in &[(0.3, -1.7), (4.2, 9.9), (-3.3333, 7.1), (1e-9, -2.0)] {
            assert_eq!(
                build_two_slit_wavefunction(x1, x2, &p).unwrap(),
                build_two_slit_wavefunction(x2, x1, &p).unwrap()
            );
        }
    }

    #[test]
    fn origin_bracket_is_twice_the_common_phase() {
        let p = SlitParams::default();
        let b = two_slit_bracket(0.0, 0.0, &p);
        let want = 2.0 * Complex64::from_polar(1.0, p.k() * p.a() * p.a() / p.l());
        assert!((b - want).norm() < 1e-14);
    }

    #[test]
    fn paraxial_window_enforced() {
        let p = SlitParams::default();
        assert!(matches!(
            build_two_slit_wavefunction(10.5, 0.0, &p),
            Err(Error::ParaxialViolation { .. })
        ));
        assert!(build_two_slit_wavefunction(10.0, -10.0, &p).is_ok());
    }
}
