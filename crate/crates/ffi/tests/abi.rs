use std::ffi::CStr;
use std::ptr;

use eeopt_ffi::*;

const DELTA: f64 = 1e-8;

fn params(case_id: u32) -> EeoptLinkParams {
    let mut p = EeoptLinkParams {
        bandwidth_hz: 0.0,
        noise_power_w: 0.0,
        pa_efficiency: 0.0,
        kappa: 0.0,
        p_static_w: 0.0,
        case_id: 0,
        mean_gain: 0.0,
        nakagami_m: 0.0,
        alpha: 0.0,
        quadrature_order: 0,
    };
    assert_eq!(unsafe { eeopt_link_params_default(case_id, &mut p) }, EeoptStatus::Ok);
    p
}

struct Handle(*mut EeoptLink);

impl Handle {
    fn new(p: &EeoptLinkParams) -> Result<Self, EeoptStatus> {
        let mut h = ptr::null_mut();
        match unsafe { eeopt_link_new(p, &mut h) } {
            EeoptStatus::Ok => Ok(Handle(h)),
            s => {
                assert!(h.is_null());
                Err(s)
            }
        }
    }
}

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { eeopt_link_free(self.0) }
    }
}

fn last_error() -> String {
    let n = unsafe { eeopt_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as std::ffi::c_char; n];
    unsafe { eeopt_last_error_message(buf.as_mut_ptr(), n) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn optimum(h: &Handle) -> EeoptOptimum {
    let mut r = EeoptOptimum::default();
    assert_eq!(unsafe { eeopt_link_optimize(h.0, DELTA, 0.0, &mut r) }, EeoptStatus::Ok);
    r
}

#[test]
fn optimum_matches_library_for_every_case() {
    let cfg = eeopt::config::RunConfig::default();
    for (id, case) in [
        (EEOPT_CASE_STATIC_CSIT, eeopt::CaseSelector::StaticCsit),
        (EEOPT_CASE_FADING_CDIT, eeopt::CaseSelector::FadingCdit),
        (EEOPT_CASE_FADING_CSIT, eeopt::CaseSelector::FadingCsit),
    ] {
        let h = Handle::new(&params(id)).unwrap();
        let r = optimum(&h);
        let want = cfg.link_params(case).unwrap().link().unwrap().optimize(DELTA).unwrap();
        assert_eq!(r.c_star, want.c_star);
        assert_eq!(r.ee_star, want.ee_star);
        assert_eq!(r.iterations, want.iterations);
        assert!(r.final_bracket_width <= DELTA);
    }
}

#[test]
fn scalar_evaluations_are_consistent() {
    let p = params(EEOPT_CASE_FADING_CSIT);
    let h = Handle::new(&p).unwrap();
    let c = optimum(&h).c_star;
    let (mut power, mut ee, mut gamma, mut psi) = (0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(eeopt_link_total_power(h.0, 2.0, &mut power), EeoptStatus::Ok);
        assert_eq!(eeopt_link_ee(h.0, 2.0, &mut ee), EeoptStatus::Ok);
        assert_eq!(eeopt_link_psi(h.0, 2.0, &mut psi), EeoptStatus::Ok);
        assert_eq!(eeopt_link_gamma(h.0, c + 1e-3, &mut gamma), EeoptStatus::Ok);
    }
    assert!((ee - power / (p.bandwidth_hz * 2.0)).abs() <= 1e-15 * ee);
    assert!(power > p.p_static_w);
    assert!(psi > 0.0);
    assert!(gamma > 0.0);
    unsafe { eeopt_link_ee(h.0, 0.0, &mut ee) };
    assert_eq!(ee, f64::INFINITY);
}

#[test]
fn tradeoff_fills_every_point() {
    let h = Handle::new(&params(EEOPT_CASE_STATIC_CSIT)).unwrap();
    let grid = [0.0, 1.0, 4.0, 8.0, 12.0];
    let mut out = [EeoptPoint::default(); 5];
    assert_eq!(
        unsafe { eeopt_link_tradeoff(h.0, grid.as_ptr(), grid.len(), out.as_mut_ptr()) },
        EeoptStatus::Ok
    );
    assert_eq!(out.map(|p| p.c), grid);
    assert_eq!(out[0].ee, f64::INFINITY);
    assert!(out[3].ee < out[1].ee && out[3].ee < out[4].ee);

    let unsorted = [2.0, 1.0];
    let status = unsafe { eeopt_link_tradeoff(h.0, unsorted.as_ptr(), 2, out.as_mut_ptr()) };
    assert_ne!(status, EeoptStatus::Ok);
}

#[test]
fn limits() {
    let h = Handle::new(&params(EEOPT_CASE_STATIC_CSIT)).unwrap();
    let mut c1 = 0.0;
    assert_eq!(unsafe { eeopt_link_limit_kappa_zero(h.0, &mut c1) }, EeoptStatus::Ok);
    assert!((c1 - optimum(&h).c_star).abs() < 1e-6);

    // a linear circuit has no noise-free limit
    let mut c2 = 0.0;
    assert_eq!(
        unsafe { eeopt_link_limit_noise_zero(h.0, 0, &mut c2) },
        EeoptStatus::NoRoot
    );

    let convex = EeoptLinkParams {
        alpha: 1.3,
        ..params(EEOPT_CASE_STATIC_CSIT)
    };
    let h = Handle::new(&convex).unwrap();
    let (mut scaled, mut bare) = (0.0, 0.0);
    unsafe {
        assert_eq!(eeopt_link_limit_noise_zero(h.0, 0, &mut scaled), EeoptStatus::Ok);
        assert_eq!(eeopt_link_limit_noise_zero(h.0, 1, &mut bare), EeoptStatus::Ok);
    }
    assert!((bare / scaled - convex.bandwidth_hz).abs() < 1e-6 * convex.bandwidth_hz);
}

#[test]
fn mean_gain_from_distance() {
    let mut g = 0.0;
    assert_eq!(
        unsafe { eeopt_mean_gain_from_distance(10.0, 1e-7, 3.5, &mut g) },
        EeoptStatus::Ok
    );
    assert!((g - 1e-7 * 10f64.powf(-3.5)).abs() < 1e-25);
    assert_eq!(
        unsafe { eeopt_mean_gain_from_distance(-1.0, 1e-7, 3.5, &mut g) },
        EeoptStatus::Domain
    );
}

#[test]
fn invalid_parameters_report_a_message() {
    let mut p = params(EEOPT_CASE_FADING_CDIT);
    p.pa_efficiency = 1.5;
    assert_eq!(Handle::new(&p).err(), Some(EeoptStatus::InvalidParameter));
    assert!(last_error().contains("pa_efficiency"), "{}", last_error());

    let mut p = params(EEOPT_CASE_FADING_CDIT);
    p.case_id = 7;
    assert_eq!(Handle::new(&p).err(), Some(EeoptStatus::InvalidParameter));
    assert!(last_error().contains("case_id"));

    let mut p = params(EEOPT_CASE_FADING_CDIT);
    p.nakagami_m = 0.2;
    assert_eq!(Handle::new(&p).err(), Some(EeoptStatus::InvalidParameter));

    let mut p = params(EEOPT_CASE_STATIC_CSIT);
    p.alpha = 0.5;
    assert_eq!(Handle::new(&p).err(), Some(EeoptStatus::InvalidParameter));
}

#[test]
fn solver_errors_map_to_status() {
    let h = Handle::new(&params(EEOPT_CASE_STATIC_CSIT)).unwrap();
    let mut r = EeoptOptimum::default();
    assert_eq!(
        unsafe { eeopt_link_optimize(h.0, DELTA, 4.0, &mut r) },
        EeoptStatus::UnboundedRoot
    );
    assert_eq!(r, EeoptOptimum::default());
    let mut x = 0.0;
    assert_eq!(unsafe { eeopt_link_ee(h.0, -1.0, &mut x) }, EeoptStatus::Domain);
    assert!(last_error().contains("domain"));
}

#[test]
fn null_pointers_are_rejected() {
    let h = Handle::new(&params(EEOPT_CASE_STATIC_CSIT)).unwrap();
    let mut x = 0.0;
    unsafe {
        assert_eq!(eeopt_link_ee(ptr::null(), 1.0, &mut x), EeoptStatus::NullPointer);
        assert_eq!(eeopt_link_ee(h.0, 1.0, ptr::null_mut()), EeoptStatus::NullPointer);
        assert_eq!(
            eeopt_link_new(ptr::null(), &mut ptr::null_mut()),
            EeoptStatus::NullPointer
        );
        eeopt_link_free(ptr::null_mut());
    }
    assert_eq!(last_error(), "null pointer: params");
}

#[test]
fn truncated_error_message_stays_terminated() {
    let mut p = params(EEOPT_CASE_STATIC_CSIT);
    p.kappa = -1.0;
    assert!(Handle::new(&p).is_err());
    let full = last_error();
    let mut buf = [1 as std::ffi::c_char; 8];
    let n = unsafe { eeopt_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(n, full.len() + 1);
    let short = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert_eq!(short, &full[..7]);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(eeopt_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
