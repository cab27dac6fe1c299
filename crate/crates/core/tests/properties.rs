use proptest::prelude::*;
use std::f64::consts::PI;
use znd_core::evans::{jump_data, l1, l1_from_t1};
use znd_core::linsys::{s_branch, spectral_point};
use znd_core::profile::reference_profile;
use znd_core::specfun::{airy, bessel_i, bessel_k, gamma};
use znd_core::turning::{regime_classify_infinity, RegimeOptions};
use znd_core::{c64, C64};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn airy_connection(r in 0.0f64..6.0, th in -PI..PI) {
        let z = C64::from_polar(r, th);
        let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
        let t = [airy(z).0, w * airy(w * z).0, w * w * airy(w * w * z).0];
        let scale = t.iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!((t[0] + t[1] + t[2]).norm() <= 1e-9 * scale);
    }

    #[test]
    fn bessel_wronskian(nr in 0.0f64..3.0, ni in -1.0f64..1.0, zr in 0.1f64..20.0, zi in -5.0f64..5.0) {
        let (nu, z) = (c64(nr, ni), c64(zr, zi));
        let i = bessel_i(nu, z).unwrap();
        let k = bessel_k(nu, z).unwrap();
        let w = (i.f * k.fp - i.fp * k.f) * (i.log_scale + k.log_scale).exp();
        prop_assert!((w * z + 1.0).norm() < 1e-9);
    }

    #[test]
    fn gamma_on_the_line_re_one(t in -10.0f64..10.0) {
        prop_assume!(t.abs() > 1e-8);
        let g = gamma(c64(1.0, t)).unwrap().norm_sqr();
        prop_assert!((g / (PI * t / (PI * t).sinh()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn s_squares_to_zeta_squared_plus_c(zr in 0.0f64..5.0, zi in -5.0f64..5.0, c in 0.05f64..3.0) {
        let z = c64(zr, zi);
        let s = s_branch(z, c);
        prop_assert!((s * s - (z * z + c)).norm() <= 1e-12 * (z * z + c).norm().max(1.0));
        // Re s > 0 off the imaginary axis.
        if zr > 1e-9 {
            prop_assert!(s.re > 0.0);
        }
    }

    #[test]
    fn one_decaying_mode_at_the_endstate(zr in 1e-4f64..5.0, zi in -5.0f64..5.0) {
        let rep = reference_profile();
        let sd = spectral_point(&rep.gas, &rep.endstate, c64(zr, zi));
        prop_assert_eq!(sd.mu.iter().filter(|m| m.re < 0.0).count(), 1);
        prop_assert!(sd.mu[0].re < 0.0);
    }

    #[test]
    fn l1_two_routes(zr in 0.0f64..5.0, zi in -5.0f64..5.0) {
        let rep = reference_profile();
        let jd = jump_data(rep);
        let z = c64(zr, zi);
        let (a, b) = (l1(&jd, z), l1_from_t1(rep, &jd, z));
        prop_assert!((a - b).norm() <= 1e-8 * a.norm());
    }

    #[test]
    fn alpha_squares_to_shifted_frequency(r in 0.0f64..0.2, th in -PI / 2.0..PI / 2.0, h in 1e-3f64..0.1) {
        let rep = reference_profile();
        let zi = c64(0.0, rep.zeta_inf_abs());
        let z = zi + C64::from_polar(r, th);
        let rd = regime_classify_infinity(rep, z, h, &RegimeOptions::default()).unwrap();
        let want = C64::i() * (z - zi);
        prop_assert!((rd.alpha * rd.alpha - want).norm() <= 1e-14 * want.norm().max(1e-300) + 1e-300);
        prop_assert!(rd.alpha.re >= 0.0);
    }
}
