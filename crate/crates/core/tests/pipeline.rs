use std::io::Cursor;

use haarqmc::cubature::{exactness_report, qmc_pc, qmc_wavelet};
use haarqmc::fractional::{frac_discrepancy, DiscrepancyMethod};
use haarqmc::haar::{Exponent, PiecewiseConstant, SpaceParams, WaveletIndex};
use haarqmc::io;
use haarqmc::nets::{faure_net, t_value, verify_net, GeneratorMatrices, digital_net};
use haarqmc::wce::{wce_exact_hilbert, wce_upper_dual};
use proptest::prelude::*;

#[test]
fn net_survives_a_text_round_trip_with_identical_results() {
    let p = faure_net(3, 3, 2).unwrap();
    let mut buf = Vec::new();
    io::write_point_set(&p, &mut buf).unwrap();
    let q = io::read_point_set(Cursor::new(buf)).unwrap();
    assert_eq!(p, q);
    assert!(verify_net(&q, 0).unwrap().verified);
    assert!(exactness_report(&q, 0).unwrap().is_exact());
    let two = Exponent::Finite(2.0);
    let sp = SpaceParams::new(3, 2, 0.75, two, two).unwrap();
    assert_eq!(wce_upper_dual(&p, &sp, None).unwrap(), wce_upper_dual(&q, &sp, None).unwrap());
    assert_eq!(wce_exact_hilbert(&p, 0.75).unwrap(), wce_exact_hilbert(&q, 0.75).unwrap());
}

#[test]
fn matrices_file_reproduces_the_faure_net() {
    let g = GeneratorMatrices::faure(5, 3, 3).unwrap();
    let mut buf = Vec::new();
    io::write_matrices(&g, &mut buf).unwrap();
    let back = io::read_matrices(Cursor::new(buf), 5, 3).unwrap();
    let p = digital_net(&back).unwrap();
    assert_eq!(p, faure_net(5, 3, 3).unwrap());
    assert_eq!(t_value(&p).unwrap(), 0);
}

#[test]
fn warnock_and_quadrature_agree_after_reload() {
    let p = faure_net(2, 4, 2).unwrap();
    let mut buf = Vec::new();
    io::write_point_set(&p, &mut buf).unwrap();
    let q = io::read_point_set(Cursor::new(buf)).unwrap();
    let two = Exponent::Finite(2.0);
    let w = frac_discrepancy(&q, 0.8, two, two, DiscrepancyMethod::Warnock, 0.0).unwrap();
    let t = frac_discrepancy(&q, 0.8, two, two, DiscrepancyMethod::TensorQuad, 1e-6).unwrap();
    assert!((w.value - t.value).abs() <= 1e-6 * w.value + w.error_estimate + t.error_estimate);
}

proptest! {
    #[test]
    fn wavelet_rule_matches_its_piecewise_constant_form(
        m in 1u32..5,
        s in 1usize..3,
        raw_j in prop::collection::vec(0u32..5, 2),
        raw_k in prop::collection::vec(any::<u64>(), 2),
        raw_i in prop::collection::vec(0u32..2, 2),
    ) {
        let b = 2;
        let p = faure_net(b, m, s).unwrap();
        let j: Vec<u32> = raw_j[..s].iter().map(|&x| x.min(m)).collect();
        let k: Vec<u128> = j.iter().zip(&raw_k).map(|(&jl, &r)| if jl == 0 { 0 } else { r as u128 % (1u128 << (jl - 1)) }).collect();
        let i: Vec<u32> = j.iter().zip(&raw_i).map(|(&jl, &r)| if jl == 0 { 0 } else { r }).collect();
        let w = WaveletIndex::new(b, j, k, i).unwrap();
        let scale = (1u64 << m) as f64;
        let f = PiecewiseConstant::from_fn(b, m, s, |cell| {
            let x: Vec<f64> = cell.iter().map(|&c| c as f64 / scale).collect();
            w.eval_f64(b, &x)
        }).unwrap();
        let direct = qmc_wavelet(&p, &w).unwrap();
        let via_pc = qmc_pc(&p, &f).unwrap();
        prop_assert!((direct - via_pc).abs() < 1e-12, "{} vs {}", direct, via_pc);
    }
}
