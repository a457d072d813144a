#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use super::{MimoConfig, PilotLayout, PilotMatrix, UNITARY_TOL, UNIT_MODULUS_TOL};
use crate::error::{dimension, invalid, Error, Result};
use crate::linalg::{identity_deviation, CMatrix, Complex64};

/// Zadoff-Chu sequence of length `len` with root `root` (coprime to `len`).
pub fn zadoff_chu(root: u64, len: usize) -> Vec<Complex64> {
    let n = len as u64;
    let odd = n % 2;
    (0..n)
        .map(|k| {
            // k (k + odd) is even, so reduce modulo 2n before the float conversion.
            let q = (root % (2 * n)) * ((k * (k + odd)) % (2 * n)) % (2 * n);
            let phase = -core::f64::consts::PI * q as f64 / n as f64;
            Complex64::new(phase.cos(), phase.sin())
        })
        .collect()
}

fn check_power(power: f64) -> Result<()> {
    if power >= 0.0 && power.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("pilot power must be finite and >= 0, got {power}")))
    }
}

fn check_scrambling(code: Option<&[Complex64]>, n: usize) -> Result<Option<Vec<Complex64>>> {
    let Some(code) = code else { return Ok(None) };
    if code.len() != n {
        return Err(dimension(format!("scrambling code has length {} but n = {n}", code.len())));
    }
    for (index, c) in code.iter().enumerate() {
        let modulus = c.norm();
        if (modulus - 1.0).abs() > UNIT_MODULUS_TOL {
            return Err(Error::NonUnitScrambling { index, modulus });
        }
    }
    Ok(Some(code.to_vec()))
}

fn check_structure(cfg: &MimoConfig, repeats: usize) -> Result<()> {
    if repeats == 0 || cfg.symbols != repeats * cfg.tx_antennas {
        return Err(dimension(format!(
            "structured pilot needs n = m * l_t, got n={} m={repeats} l_t={}",
            cfg.symbols, cfg.tx_antennas
        )));
    }
    Ok(())
}

/// Scrambled periodic pilot `S = sqrt(rho) C [O; O; ..; O]` with `m` stacked
/// copies of the unitary `O` (identity by default).
pub fn make_periodic_pilot(
    cfg: &MimoConfig,
    repeats: usize,
    power: f64,
    scrambling: Option<&[Complex64]>,
    mixing: Option<&CMatrix>,
) -> Result<PilotMatrix> {
    check_structure(cfg, repeats)?;
    check_power(power)?;
    let lt = cfg.tx_antennas;
    let code = check_scrambling(scrambling, cfg.symbols)?;
    let mixing = match mixing {
        Some(o) => {
            if o.shape() != (lt, lt) {
                return Err(dimension(format!("mixing matrix must be {lt}x{lt}, got {}x{}", o.nrows(), o.ncols())));
            }
            let dev = identity_deviation(&(o.adjoint() * o), 1.0);
            if dev > UNITARY_TOL {
                return Err(Error::NonUnitaryMixing(dev));
            }
            Some(o.clone())
        }
        None => None,
    };
    let amp = power.sqrt();
    let entries = CMatrix::from_fn(cfg.symbols, lt, |k, t| {
        let c = code.as_ref().map_or(Complex64::new(1.0, 0.0), |c| c[k]);
        let o = match &mixing {
            Some(o) => o[(k % lt, t)],
            None if k % lt == t => Complex64::new(1.0, 0.0),
            None => Complex64::new(0.0, 0.0),
        };
        c * o * amp
    });
    Ok(PilotMatrix::from_parts(entries, PilotLayout::Periodic, code, mixing))
}

/// Scrambled time-division pilot: antenna `t` alone sends `m` scrambled
/// symbols in rows `t m .. (t + 1) m`.
pub fn make_td_pilot(
    cfg: &MimoConfig,
    repeats: usize,
    power: f64,
    scrambling: Option<&[Complex64]>,
) -> Result<PilotMatrix> {
    check_structure(cfg, repeats)?;
    check_power(power)?;
    let code = check_scrambling(scrambling, cfg.symbols)?;
    let amp = power.sqrt();
    let entries = CMatrix::from_fn(cfg.symbols, cfg.tx_antennas, |k, t| {
        if k / repeats == t {
            code.as_ref().map_or(Complex64::new(1.0, 0.0), |c| c[k]) * amp
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(PilotMatrix::from_parts(entries, PilotLayout::TimeDivision, code, None))
}

/// Periodic segment on top of a time-division segment.
///
/// Without a tail the head is returned unchanged.
pub fn make_combined_pilot(head: &PilotMatrix, tail: Option<&PilotMatrix>) -> Result<PilotMatrix> {
    if head.layout() != PilotLayout::Periodic {
        return Err(Error::WrongLayout("periodic (combined head)"));
    }
    let Some(tail) = tail else { return Ok(head.clone()) };
    if tail.layout() != PilotLayout::TimeDivision {
        return Err(Error::WrongLayout("time-division (combined tail)"));
    }
    if head.tx_antennas() != tail.tx_antennas() {
        return Err(dimension(format!(
            "combined pilot segments disagree on l_t: {} vs {}",
            head.tx_antennas(),
            tail.tx_antennas()
        )));
    }
    let (nh, nt, lt) = (head.symbols(), tail.symbols(), head.tx_antennas());
    let mut entries = CMatrix::zeros(nh + nt, lt);
    entries.view_mut((0, 0), (nh, lt)).copy_from(head.entries());
    entries.view_mut((nh, 0), (nt, lt)).copy_from(tail.entries());
    let scrambling = match (head.scrambling(), tail.scrambling()) {
        (None, None) => None,
        (a, b) => {
            let mut code = Vec::with_capacity(nh + nt);
            code.extend((0..nh).map(|k| a.map_or(Complex64::new(1.0, 0.0), |c| c[k])));
            code.extend((0..nt).map(|k| b.map_or(Complex64::new(1.0, 0.0), |c| c[k])));
            Some(code)
        }
    };
    Ok(PilotMatrix::from_parts(entries, PilotLayout::Combined, scrambling, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn as_real(p: &PilotMatrix) -> Vec<Vec<f64>> {
        (0..p.symbols()).map(|k| (0..p.tx_antennas()).map(|t| p.symbol(k, t).re).collect()).collect()
    }

    #[test]
    fn periodic_example_matrix() {
        let cfg = MimoConfig::new(3, 1, 6).unwrap();
        let p = make_periodic_pilot(&cfg, 2, 1.0, None, None).unwrap();
        let want = [[1., 0., 0.], [0., 1., 0.], [0., 0., 1.], [1., 0., 0.], [0., 1., 0.], [0., 0., 1.]];
        assert_eq!(as_real(&p), want.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
        assert!(p.entries().iter().all(|z| z.im == 0.0));
        assert_eq!(p.layout(), PilotLayout::Periodic);
    }

    #[test]
    fn td_example_matrix() {
        let cfg = MimoConfig::new(3, 1, 6).unwrap();
        let p = make_td_pilot(&cfg, 2, 1.0, None).unwrap();
        let want = [[1., 0., 0.], [1., 0., 0.], [0., 1., 0.], [0., 1., 0.], [0., 0., 1.], [0., 0., 1.]];
        assert_eq!(as_real(&p), want.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    }

    #[test]
    fn single_antenna_layouts_coincide() {
        let cfg = MimoConfig::new(1, 1, 7).unwrap();
        let p = make_periodic_pilot(&cfg, 7, 1.0, None, None).unwrap();
        let t = make_td_pilot(&cfg, 7, 1.0, None).unwrap();
        assert_eq!(p.entries(), t.entries());
        assert!(p.entries().iter().all(|z| *z == c(1.0)));
    }

    #[test]
    fn zadoff_chu_scrambled_periodic_power_and_gram() {
        let cfg = MimoConfig::new(2, 1, 8).unwrap();
        let zc = zadoff_chu(1, 8);
        let p = make_periodic_pilot(&cfg, 4, 2.0, Some(&zc), None).unwrap();
        assert!((p.power() - 2.0).abs() < 2e-12);
        assert!(identity_deviation(&p.gram(), 8.0) < 1e-10);
        assert!(p.is_orthogonal());
    }

    #[test]
    fn td_gram_is_scaled_identity() {
        let cfg = MimoConfig::new(2, 1, 16).unwrap();
        let p = make_td_pilot(&cfg, 8, 1.0, None).unwrap();
        assert!(identity_deviation(&p.gram(), 8.0) < 1e-12);
    }

    #[test]
    fn combined_pilot_shape_and_gram() {
        let seg = MimoConfig::new(2, 1, 8).unwrap();
        let head = make_periodic_pilot(&seg, 4, 1.0, None, None).unwrap();
        let tail = make_td_pilot(&seg, 4, 1.0, None).unwrap();
        let p = make_combined_pilot(&head, Some(&tail)).unwrap();
        assert_eq!((p.symbols(), p.tx_antennas()), (16, 2));
        assert_eq!(p.layout(), PilotLayout::Combined);
        assert!((p.power() - 1.0).abs() < 1e-12);
        assert!(identity_deviation(&p.gram(), 8.0) < 1e-12);
        assert_eq!(p.symbol(8, 0), c(1.0));
        assert_eq!(p.symbol(12, 1), c(1.0));
        assert_eq!(make_combined_pilot(&head, None).unwrap(), head);
        let other = make_td_pilot(&MimoConfig::new(1, 1, 4).unwrap(), 4, 1.0, None).unwrap();
        assert!(make_combined_pilot(&head, Some(&other)).is_err());
    }

    #[test]
    fn constructor_errors() {
        let cfg = MimoConfig::new(2, 1, 8).unwrap();
        assert!(make_periodic_pilot(&cfg, 3, 1.0, None, None).is_err());
        assert!(make_td_pilot(&cfg, 3, 1.0, None).is_err());
        let mut code = alloc::vec![c(1.0); 8];
        code[3] = c(1.1);
        assert!(matches!(
            make_periodic_pilot(&cfg, 4, 1.0, Some(&code), None),
            Err(Error::NonUnitScrambling { index: 3, .. })
        ));
        assert!(make_td_pilot(&cfg, 4, 1.0, Some(&code[..4])).is_err());
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!(matches!(make_periodic_pilot(&cfg, 4, 1.0, None, Some(&bad)), Err(Error::NonUnitaryMixing(_))));
    }

    #[test]
    fn hadamard_mixing_keeps_orthogonality() {
        let h = 1.0 / 2f64.sqrt();
        let o = CMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)]);
        let cfg = MimoConfig::new(2, 1, 10).unwrap();
        let p = make_periodic_pilot(&cfg, 5, 1.5, Some(&zadoff_chu(1, 10)), Some(&o)).unwrap();
        assert!(p.orthogonality_deviation() < 1e-10);
    }

    #[test]
    fn zadoff_chu_is_unit_modulus_with_ideal_autocorrelation() {
        for len in [7usize, 8, 16] {
            let z = zadoff_chu(1, len);
            assert!(z.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
            for shift in 1..len {
                let acc: Complex64 = (0..len).map(|k| z[k] * z[(k + shift) % len].conj()).sum();
                assert!(acc.norm() < 1e-9, "len {len} shift {shift}: {acc}");
            }
        }
    }

    proptest! {
        #[test]
        fn scrambling_leaves_power_and_gram_unchanged(
            phases in proptest::collection::vec(-3.2f64..3.2, 12),
            lt in 1usize..4,
        ) {
            let n = 12 - 12 % lt;
            let cfg = MimoConfig::new(lt, 1, n).unwrap();
            let code: Vec<Complex64> = phases[..n].iter().map(|&p| Complex64::new(p.cos(), p.sin())).collect();
            for (plain, scrambled) in [
                (make_periodic_pilot(&cfg, n / lt, 1.3, None, None).unwrap(),
                 make_periodic_pilot(&cfg, n / lt, 1.3, Some(&code), None).unwrap()),
                (make_td_pilot(&cfg, n / lt, 1.3, None).unwrap(),
                 make_td_pilot(&cfg, n / lt, 1.3, Some(&code)).unwrap()),
            ] {
                prop_assert!((plain.power() - scrambled.power()).abs() < 1e-12);
                prop_assert!(max_abs(&(plain.gram() - scrambled.gram())) < 1e-12);
                prop_assert!(scrambled.orthogonality_deviation() < 1e-10);
            }
        }
    }
}
