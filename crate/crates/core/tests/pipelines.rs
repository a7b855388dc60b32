//! Flows that cross module boundaries.

use std::io::BufReader;

use lab_core::dispersion::{certify_dispersing, fourth_moment_check, markov_tail};
use lab_core::oracle1::{build_oracle, identify, SingleLevelOracle};
use lab_core::paulichain::{lumped_matrix, run_walkers, total_variation, weight_histogram, PauliString};
use lab_core::rfs::{
    classical_solver, evaluate, read_log_jsonl, write_log_jsonl, z_referee, Answer, OracleRef, RecursiveOracleSpec,
};
use lab_core::rng::{child, stream};
use lab_core::simcore::{RandomCircuit, UnitaryAction};

#[test]
fn compiled_oracle_survives_serialization() {
    let c = RandomCircuit::generate(4, 4 * 64, 17).unwrap();
    let labels: Vec<usize> = (0..16).collect();
    let o = build_oracle(&c, &labels).unwrap();
    let back = SingleLevelOracle::from_instance_json(&o.to_instance_json()).unwrap();
    for &a in &labels {
        for x in 0..16 {
            assert_eq!(o.f(a, x).unwrap(), back.f(a, x).unwrap());
        }
        let p1 = identify(&c, &o, a, 0, &mut stream(0)).unwrap().success_prob;
        let p2 = identify(&c, &back, a, 0, &mut stream(0)).unwrap().success_prob;
        assert!((p1 - p2).abs() < 1e-12);
    }
}

#[test]
fn dispersing_labels_identify_at_the_predicted_rate() {
    let c = RandomCircuit::generate(5, 4 * 125, 3).unwrap();
    let report = certify_dispersing(&c, 0.5).unwrap();
    let o = build_oracle(&c, &report.achieving_set).unwrap();
    for (k, &a) in report.achieving_set.iter().enumerate() {
        assert!(o.meta[k].beta >= 0.5 - 1e-12);
        let p = identify(&c, &o, a, 0, &mut stream(1)).unwrap().success_prob;
        assert!(p >= (1.0 / std::f64::consts::PI).powi(2) - 1e-12);
    }
}

#[test]
fn classical_log_replays_through_the_referee() {
    let file_dir = tempfile_dir();
    let oracle_ref = OracleRef::Hadamard { n: 3, card_a: 8, label_seed: 0 };
    let spec = RecursiveOracleSpec::generate(oracle_ref.resolve().unwrap(), 2, 21).unwrap();
    let spec_file = spec.to_file(oracle_ref);
    let path = file_dir.join("spec.json");
    std::fs::write(&path, serde_json::to_string(&spec_file).unwrap()).unwrap();
    let reread: lab_core::rfs::SpecFile = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let spec2 = RecursiveOracleSpec::from_file(&reread).unwrap();
    assert_eq!(spec2.secret_at(&[]).unwrap(), spec.secret_at(&[]).unwrap());

    let run = classical_solver(&spec2).unwrap();
    assert_eq!(run.answer, spec.b_root);
    let mut buf = Vec::new();
    write_log_jsonl(&run.log, &mut buf).unwrap();
    let log = read_log_jsonl(BufReader::new(&buf[..])).unwrap();
    assert_eq!(log, run.log);
    let r = z_referee(&spec2, &log).unwrap();
    assert!(r.exact_properties_hold());
    assert!(r.root_hit);
    assert_eq!(evaluate(&spec2, &[], Some(spec2.secret_at(&[]).unwrap())).unwrap(), Answer::from_bit(spec.b_root));
    std::fs::remove_dir_all(file_dir).ok();
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("lab-core-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn full_and_lumped_chains_agree() {
    let n = 3;
    let t = 20;
    let walkers = run_walkers(&PauliString::from_codes(&[1, 0, 0]).unwrap(), t, 100_000, 31).unwrap();
    let hist = weight_histogram(&walkers, n);
    let mut init = vec![0.0; n];
    init[0] = 1.0;
    let evolved = lumped_matrix(n).unwrap().evolve(&init, t).unwrap();
    assert_eq!(hist[0], 0.0);
    assert!(total_variation(&hist[1..], &evolved) <= 0.02);
}

#[test]
fn collisions_feed_the_fourth_moment_inequality() {
    // For Y_x = 2^{n/2}|⟨x|ψ⟩|, EY² = 1 and EY⁴ = 2^n·Q, so E|Y| ≥ (2^n Q)^{-1/2}.
    let n = 5;
    let c = RandomCircuit::generate(n, 4 * 125, 8).unwrap();
    let mut psi = vec![lab_core::C64::new(0.0, 0.0); 32];
    psi[0] = lab_core::C64::new(1.0, 0.0);
    c.apply_adjoint(&mut psi);
    let ys: Vec<f64> = psi.iter().map(|z| z.norm() * (32f64).sqrt()).collect();
    let fm = fourth_moment_check(&ys).unwrap();
    assert!(fm.pass);
    let q: f64 = psi.iter().map(|z| z.norm_sqr().powi(2)).sum();
    assert!((fm.rhs - 1.0 / (32.0 * q).sqrt()).abs() < 1e-9);
    let tail = markov_tail(&[q], n, 0.5);
    assert!(tail.bound >= tail.fraction || tail.fraction == 0.0);
}

#[test]
fn seeded_streams_are_independent_of_call_order() {
    use rand::Rng;
    let a: Vec<u64> = (0..4).map(|i| child(5, i).random()).collect();
    let b: Vec<u64> = (0..4).rev().map(|i| child(5, i).random()).collect();
    assert_eq!(a, b.into_iter().rev().collect::<Vec<_>>());
}
