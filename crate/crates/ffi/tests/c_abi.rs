use std::ffi::{CStr, CString};
use std::ptr;

use ffsim_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ffsim_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn run_default_room_one() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(ffsim_config_default(&mut cfg), FfsimStatus::Ok);
        assert_eq!(ffsim_config_set_room(cfg, 1), FfsimStatus::Ok);
        assert_eq!(ffsim_config_set_seed(cfg, 7), FfsimStatus::Ok);
        let mut res = ptr::null_mut();
        assert_eq!(ffsim_run(cfg, &mut res), FfsimStatus::Ok);

        let mut outcome = FfsimOutcome::TimeoutFind;
        assert_eq!(ffsim_result_outcome(res, &mut outcome), FfsimStatus::Ok);
        assert_eq!(outcome, FfsimOutcome::Success);
        let (mut ttf, mut total) = (0.0, 0.0);
        assert_eq!(ffsim_result_time_to_flame(res, &mut ttf), FfsimStatus::Ok);
        assert_eq!(ffsim_result_total_time(res, &mut total), FfsimStatus::Ok);
        assert!(0.0 < ttf && ttf < total);

        let mut n = 0usize;
        assert_eq!(ffsim_result_trajectory_len(res, &mut n), FfsimStatus::Ok);
        assert!(n > 1);
        let mut p = FfsimPose::default();
        assert_eq!(ffsim_result_trajectory_pose(res, 0, &mut p), FfsimStatus::Ok);
        assert_eq!(p, FfsimPose { x: 0.25, y: 1.22, theta: 0.0 });
        assert_eq!(ffsim_result_trajectory_pose(res, n, &mut p), FfsimStatus::InvalidArgument);

        ffsim_result_free(res);
        ffsim_config_free(cfg);
    }
}

#[test]
fn stepping_matches_batch_run() {
    unsafe {
        let mut cfg = ptr::null_mut();
        ffsim_config_default(&mut cfg);
        ffsim_config_set_room(cfg, 2);
        let mut batch = ptr::null_mut();
        assert_eq!(ffsim_run(cfg, &mut batch), FfsimStatus::Ok);

        let mut sim = ptr::null_mut();
        assert_eq!(ffsim_sim_new(cfg, &mut sim), FfsimStatus::Ok);
        let mut done = false;
        while !done {
            assert_eq!(ffsim_sim_step(sim, &mut done), FfsimStatus::Ok);
        }
        assert_eq!(ffsim_sim_step(sim, &mut done), FfsimStatus::Finished);
        let mut t = 0.0;
        ffsim_sim_time(sim, &mut t);
        let mut stepped = ptr::null_mut();
        assert_eq!(ffsim_sim_finish(sim, &mut stepped), FfsimStatus::Ok);

        let (mut a, mut b) = (0.0, 0.0);
        ffsim_result_total_time(batch, &mut a);
        ffsim_result_total_time(stepped, &mut b);
        assert_eq!(a, b);
        assert_eq!(a, t);
        ffsim_result_free(batch);
        ffsim_result_free(stepped);
        ffsim_config_free(cfg);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        assert_eq!(ffsim_config_default(ptr::null_mut()), FfsimStatus::NullPointer);
        assert!(last_error().contains("null"));

        let mut cfg = ptr::null_mut();
        ffsim_config_default(&mut cfg);
        assert_eq!(ffsim_config_set_room(cfg, 5), FfsimStatus::InvalidArgument);
        assert!(last_error().contains("1..=4"));
        ffsim_config_free(cfg);

        let bad = CString::new("[sim]\ndt = \"fast\"\n").unwrap();
        assert_eq!(ffsim_config_from_toml(bad.as_ptr(), &mut cfg), FfsimStatus::ConfigError);

        let zero_dt = CString::new("[sim]\ndt = 0.0\n").unwrap();
        assert_eq!(ffsim_config_from_toml(zero_dt.as_ptr(), &mut cfg), FfsimStatus::Ok);
        let mut count = 0usize;
        assert_eq!(ffsim_config_validate(cfg, &mut count), FfsimStatus::Ok);
        assert_eq!(count, 1);
        let mut res = ptr::null_mut();
        assert_eq!(ffsim_run(cfg, &mut res), FfsimStatus::ConfigError);
        assert!(last_error().contains("sim.dt"));
        assert!(res.is_null());
        ffsim_config_free(cfg);

        ffsim_config_free(ptr::null_mut());
        ffsim_result_free(ptr::null_mut());
        ffsim_sim_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/ffsim.h");
    let src = include_str!("../src/lib.rs");
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from ffsim.h");
    }
    for ty in ["typedef struct FfsimConfig FfsimConfig;", "typedef struct FfsimSim FfsimSim;", "typedef struct FfsimResult FfsimResult;"] {
        assert!(header.contains(ty), "opaque {ty}");
    }
    assert!(header.contains("FFSIM_STATUS_OK = 0"));
}
