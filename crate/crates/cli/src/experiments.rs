use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use lab_core::dispersion::{certify_dispersing, markov_tail, pseudo_search};
use lab_core::oracle1::{build_oracle, identify};
use lab_core::paulichain::{
    circuit_collisions, exact_gap, gap_table, lumped_matrix, moment_compare, q_t_statistics, run_walkers,
    total_variation, uniform_nonzero_tv, verify_mean_ad2, weight_histogram, PauliString,
};
use lab_core::rfs::{
    classical_solver, find_coherent_tiny, find_simulate, hadamard_family, lower_bound, random_strategy, z_referee,
    Corruption, FindParams, JunkMode, RecursiveOracleSpec,
};
use lab_core::rng::{child, derive_seed, stream};
use lab_core::signs::{best_phase_signs, brute_force_signs};
use lab_core::simcore::linalg::complex_gaussian;
use lab_core::simcore::{group_fourier, CyclicQft, GroupSpec, Hadamard, Identity, RandomCircuit, UnitaryAction};
use lab_core::C64;

use crate::config::{Experiment, Params};
use crate::error::{CliError, CliResult};

/// CSV payload of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub metrics: BTreeMap<String, f64>,
    pub failed: Vec<String>,
    pub table: Option<Table>,
}

impl RunOutput {
    /// Non-finite values cannot round-trip through JSON and are left out.
    fn put(&mut self, name: &str, v: f64) {
        if v.is_finite() {
            self.metrics.insert(name.to_string(), v);
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failed.push(what.into());
        }
    }
}

fn need<T: Clone>(v: &Option<T>, flag: &str) -> CliResult<T> {
    v.clone().ok_or_else(|| CliError::Config(format!("missing parameter --{flag}")))
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn build_unitary(name: &str, n: usize, t: Option<usize>, seed: u64) -> CliResult<Box<dyn UnitaryAction>> {
    Ok(match name {
        "hadamard" => Box::new(Hadamard { n }),
        "qft" => Box::new(CyclicQft::new(n)),
        "identity" => Box::new(Identity { n }),
        "random" => Box::new(RandomCircuit::generate(n, need(&t, "t")?, seed)?),
        other => return Err(CliError::Config(format!("unknown unitary '{other}' (hadamard, qft, identity, random)"))),
    })
}

/// Runs one experiment with resolved parameters.
pub fn execute(experiment: Experiment, p: &Params, seed: u64) -> CliResult<RunOutput> {
    match experiment {
        Experiment::Dispersion if p.group.is_some() => pseudo_dispersion(p, seed),
        Experiment::Dispersion => dispersion(p, seed),
        Experiment::Signs => signs(p, seed),
        Experiment::Oracle => oracle(p, seed),
        Experiment::Rfs => rfs(p, seed),
        Experiment::Markov => markov(p, seed),
        Experiment::Ad2 => ad2(p, seed),
        Experiment::Qt => qt(p, seed),
    }
}

fn dispersion(p: &Params, seed: u64) -> CliResult<RunOutput> {
    let n = need(&p.n, "n")?;
    let beta = need(&p.beta, "beta")?;
    let name = need(&p.unitary, "unitary")?;
    let u = build_unitary(&name, n, p.t, seed)?;
    let r = certify_dispersing(u.as_ref(), beta)?;
    let mut out = RunOutput::default();
    out.put("alpha_achieved", r.alpha_achieved);
    out.put("achieving_count", r.achieving_set.len() as f64);
    out.put("threshold", r.threshold());
    out.put("min_l1", r.per_label_l1.iter().copied().fold(f64::INFINITY, f64::min));
    out.put("max_l1", r.per_label_l1.iter().copied().fold(0.0, f64::max));
    if name == "hadamard" && beta <= 1.0 {
        out.check(r.alpha_achieved == 1.0, "H^n is (1,1)-dispersing: not every label reached the threshold");
    }
    let mut table = Table::new(&["a", "l1"]);
    for (a, v) in r.per_label_l1.iter().enumerate() {
        table.rows.push(vec![a.to_string(), format!("{v:.16e}")]);
    }
    out.table = Some(table);
    Ok(out)
}

fn pseudo_dispersion(p: &Params, seed: u64) -> CliResult<RunOutput> {
    let group = GroupSpec::by_name(&need(&p.group, "group")?)?;
    group.validate()?;
    let f = group_fourier(&group)?;
    let samples = need(&p.samples, "samples")?;
    let labels = f.labels();
    let reports = labels
        .par_iter()
        .enumerate()
        .map(|(k, &(irrep, i))| pseudo_search(&f, irrep, i, samples, &mut child(seed, k as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = RunOutput::default();
    let mut table = Table::new(&["irrep", "i", "mean", "std_err", "best", "bound"]);
    let mut mean_margin = f64::INFINITY;
    let mut best_margin = f64::INFINITY;
    for r in &reports {
        mean_margin = mean_margin.min(r.mean - (r.bound - 3.0 * r.std_err));
        best_margin = best_margin.min(r.best_value - r.bound);
        table.rows.push(vec![
            r.irrep.to_string(),
            r.index.to_string(),
            format!("{:.16e}", r.mean),
            format!("{:.16e}", r.std_err),
            format!("{:.16e}", r.best_value),
            format!("{:.16e}", r.bound),
        ]);
    }
    out.put("labels", labels.len() as f64);
    out.put("order", f.order() as f64);
    out.put("bound", (f.order() as f64 / 2.0).sqrt());
    out.put("min_mean_margin", mean_margin);
    out.put("min_best_margin", best_margin);
    out.put("alpha", reports[0].alpha);
    out.put("fourier_unitarity_deviation", f.unitarity_deviation());
    out.check(mean_margin >= 0.0, "some label's mean L1 is below sqrt(|G|/2) - 3 standard errors");
    out.check(best_margin >= 0.0, "some label's best sample is below sqrt(|G|/2)");
    out.table = Some(table);
    Ok(out)
}

fn signs(p: &Params, seed: u64) -> CliResult<RunOutput> {
    let samples = need(&p.samples, "samples")?;
    let d_max = need(&p.n, "n")?.max(1);
    let rows = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = child(seed, i as u64);
            let d = r.random_range(1..=d_max);
            let x: Vec<C64> = (0..d).map(|_| complex_gaussian(&mut r)).collect();
            let s = best_phase_signs(&x)?;
            let brute = if d <= 12 { Some(brute_force_signs(&x)?.1) } else { None };
            Ok((s.value, s.l1, brute))
        })
        .collect::<Result<Vec<_>, lab_core::Error>>()?;
    let mut out = RunOutput::default();
    let (mut min_ratio, mut max_excess, mut lower_bad, mut upper_bad, mut checked) =
        (f64::INFINITY, f64::NEG_INFINITY, 0, 0, 0);
    for &(value, l1, brute) in &rows {
        min_ratio = min_ratio.min(value / l1);
        if value < 2.0 / PI * l1 - 1e-12 * l1 {
            lower_bad += 1;
        }
        if let Some(b) = brute {
            checked += 1;
            max_excess = max_excess.max(value - b);
            if value > b + 1e-12 {
                upper_bad += 1;
            }
        }
    }
    out.put("instances", samples as f64);
    out.put("min_ratio", min_ratio);
    out.put("two_over_pi", 2.0 / PI);
    out.put("brute_checked", checked as f64);
    out.put("max_excess_over_brute", max_excess);
    out.put("lower_violations", lower_bad as f64);
    out.put("upper_violations", upper_bad as f64);
    out.check(lower_bad == 0, format!("{lower_bad} instances below (2/pi)·L1"));
    out.check(upper_bad == 0, format!("{upper_bad} instances above the brute-force maximum"));
    Ok(out)
}

fn oracle(p: &Params, seed: u64) -> CliResult<RunOutput> {
    let n = need(&p.n, "n")?;
    let name = need(&p.unitary, "unitary")?;
    let shots = need(&p.trials, "trials")? as u64;
    let u = build_unitary(&name, n, p.t, seed)?;
    let labels: Vec<usize> = (0..1usize << n).collect();
    let o = build_oracle(u.as_ref(), &labels)?;
    let results = labels
        .par_iter()
        .map(|&a| identify(u.as_ref(), &o, a, shots, &mut child(seed, a as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = RunOutput::default();
    let (mut min_success, mut min_margin, mut hits, mut min_beta) = (f64::INFINITY, f64::INFINITY, 0u64, f64::INFINITY);
    for (k, r) in results.iter().enumerate() {
        min_success = min_success.min(r.success_prob);
        min_margin = min_margin.min(r.success_prob - o.meta[k].predicted);
        min_beta = min_beta.min(o.meta[k].beta);
        hits += r.sampled_hits;
    }
    out.put("labels", labels.len() as f64);
    out.put("min_success", min_success);
    out.put("min_margin_over_prediction", min_margin);
    out.put("min_beta", min_beta);
    out.put("sampled_hit_rate", hits as f64 / (shots.max(1) * labels.len() as u64) as f64);
    out.put("queries_per_identification", 1.0);
    out.check(min_margin >= -1e-9, "some label identified below (2·beta/pi)^2");
    if name == "hadamard" {
        out.check((1.0 - min_success).abs() <= 1e-9, "Hadamard-compiled oracle not identified exactly");
    }
    Ok(out)
}

fn hadamard_spec(n: usize, l: usize, seed: u64) -> CliResult<RecursiveOracleSpec> {
    Ok(RecursiveOracleSpec::generate(hadamard_family(n, 1 << n, seed)?, l, seed)?)
}

fn rfs(p: &Params, seed: u64) -> CliResult<RunOutput> {
    let l = need(&p.l, "l")?;
    let delta = need(&p.delta, "delta")?;
    if need(&p.unitary, "unitary")? != "hadamard" {
        return Err(CliError::Config("recursive experiments use --unitary hadamard".into()));
    }
    let mut out = RunOutput::default();
    match need(&p.mode, "mode")?.as_str() {
        "find" => {
            let n = need(&p.n, "n")?;
            let spec = hadamard_spec(n, l, seed)?;
            let r = find_simulate(&spec, &Hadamard { n }, &FindParams::worst_case(delta))?;
            out.put("Q0", r.q0_counted as f64);
            out.put("Q0_closed_form", r.q0_closed_form as f64);
            out.put("Q0_paper_estimate", r.q0_paper);
            out.put("m", r.m as f64);
            out.put("epsilon", r.epsilon);
            out.put("root_success", r.root_success);
            out.put("answer_correct", flag(r.answer_correct));
            out.put("copies_certified", flag(r.copies_certified));
            out.put("errors_certified", flag(r.errors_certified));
            out.put("min_copy_success", r.levels.iter().map(|x| x.min_copy_success).fold(f64::INFINITY, f64::min));
            out.put("max_failure_amp_sq", r.levels.iter().map(|x| x.max_failure_amp_sq).fold(0.0, f64::max));
            out.check(r.answer_correct, "FIND answer differs from the root bit");
            out.check(r.copies_certified, "some copy succeeds with probability below delta/2");
            out.check(r.errors_certified, "some node error exceeds epsilon");
            out.check(r.q0_counted == r.q0_closed_form, "counted queries differ from the recurrence");
        }
        "classical" => {
            let n = need(&p.n, "n")?;
            let spec = hadamard_spec(n, l, seed)?;
            let r = classical_solver(&spec)?;
            out.put("queries", r.queries as f64);
            out.put("answer_correct", flag(r.answer == spec.b_root));
            out.check(r.answer == spec.b_root, "classical answer differs from the root bit");
        }
        "table" => {
            let mut table = Table::new(&["n", "classical_queries", "find_q0"]);
            let mut prev: Option<(usize, u128)> = None;
            for n in [4usize, 6, 8] {
                let spec = hadamard_spec(n, l, derive_seed(seed, n as u64))?;
                let c = classical_solver(&spec)?;
                let f = find_simulate(&spec, &Hadamard { n }, &FindParams::worst_case(delta))?;
                out.put(&format!("classical_queries_n{n}"), c.queries as f64);
                out.put(&format!("find_q0_n{n}"), f.q0_counted as f64);
                if let Some((pc, pf)) = prev {
                    out.check(c.queries > pc, format!("classical queries not increasing at n = {n}"));
                    out.check(f.q0_counted == pf, format!("FIND queries changed at n = {n}"));
                }
                prev = Some((c.queries, f.q0_counted));
                table.rows.push(vec![n.to_string(), c.queries.to_string(), f.q0_counted.to_string()]);
            }
            out.table = Some(table);
        }
        "referee" => {
            let n = need(&p.n, "n")?;
            let runs = need(&p.trials, "trials")?;
            let queries = need(&p.t, "t")?;
            let reports = (0..runs)
                .into_par_iter()
                .map(|k| {
                    let spec = hadamard_spec(n, l, derive_seed(seed, k as u64))?;
                    let log = random_strategy(&spec, queries, &mut child(seed, k as u64))?;
                    Ok(z_referee(&spec, &log)?)
                })
                .collect::<CliResult<Vec<_>>>()?;
            let exact = reports.iter().filter(|r| r.exact_properties_hold()).count();
            let mut groups: BTreeMap<usize, (usize, f64, f64, f64)> = BTreeMap::new();
            for r in &reports {
                for g in &r.p5 {
                    let e = groups.entry(g.prior_queries).or_insert((0, 0.0, 0.0, g.bound));
                    e.0 += g.count;
                    e.1 += g.sum;
                    e.2 += g.sum_sq;
                }
            }
            let mut worst = f64::NEG_INFINITY;
            for (&prior, &(count, sum, sum_sq, bound)) in &groups {
                if !bound.is_finite() || count < 2 {
                    continue;
                }
                let mean = sum / count as f64;
                let var = ((sum_sq - sum * sum / count as f64) / (count - 1) as f64).max(0.0);
                let margin = mean - bound - 3.0 * (var / count as f64).sqrt();
                worst = worst.max(margin);
                out.check(margin <= 0.0, format!("P5 mean exceeds its bound for {prior} prior queries"));
            }
            out.put("runs", runs as f64);
            out.put("exact_property_runs", exact as f64);
            out.put("p5_worst_margin", worst);
            out.put("max_final_z", reports.iter().map(|r| r.final_z).fold(0.0, f64::max));
            out.put("lower_bound_q10_a2e30_l5", lower_bound(10.0, 2f64.powi(30), 5).value);
            out.check(exact == runs, format!("P1-P4 failed on {} runs", runs - exact));
        }
        "coherent" => {
            let n = need(&p.n, "n")?;
            let draws = need(&p.trials, "trials")?;
            let eps = need(&p.beta, "beta")?;
            let spec = hadamard_spec(n, l, seed)?;
            let root = spec.secret_at(&[])?;
            let children: Vec<usize> =
                (0..spec.symbols()).filter(|&x| spec.f(root, x).unwrap_or(0) == 1).take(1).collect();
            let corruption = Corruption { eps, children };
            let u = Hadamard { n };
            let c = find_coherent_tiny(&spec, &u, 1, Some(&corruption), &mut stream(seed))?;
            let s = find_simulate(
                &spec,
                &u,
                &FindParams {
                    delta,
                    m_override: Some(1),
                    junk: JunkMode::Sampled { draws, seed },
                    corruption: Some(corruption),
                },
            )?;
            let diff = (c.success_prob - s.root_success).abs();
            out.put("qubits", c.qubits as f64);
            out.put("coherent_success", c.success_prob);
            out.put("simulated_success", s.root_success);
            out.put("abs_diff", diff);
            out.check(diff <= 0.05, "coherent and simulated success differ by more than 0.05");
        }
        other => return Err(CliError::Config(format!("unknown rfs mode '{other}'"))),
    }
    Ok(out)
}

fn markov(p: &Params, seed: u64) -> CliResult<RunOutput> {
    let mut out = RunOutput::default();
    match need(&p.mode, "mode")?.as_str() {
        "gap" => {
            let n = need(&p.n, "n")?;
            let chain = lumped_matrix(n)?;
            let gap = exact_gap(n)?;
            out.put("gap", gap);
            out.put("gap_n", gap * n as f64);
            out.put("gap_n2", gap * (n * n) as f64);
            out.put("detailed_balance_error", chain.detailed_balance_error());
            out.put("row_sum_error", chain.max_row_sum_error());
            out.check(gap > 0.0, "spectral gap is not positive");
            out.check(chain.detailed_balance_error() <= 1e-12, "detailed balance violated");
            out.check(chain.max_row_sum_error() <= 1e-12, "rows do not sum to one");
        }
        "table" => {
            let rows = gap_table(&[4, 8, 16, 32, 64])?;
            let mut table = Table::new(&["n", "gap", "gap_n", "gap_n2"]);
            for r in &rows {
                out.put(&format!("gap_n{}", r.n), r.gap);
                out.check(r.gap > 0.0, format!("gap({}) is not positive", r.n));
                table.rows.push(r.csv_line().split(',').map(str::to_string).collect());
            }
            out.put("gap_2", exact_gap(2)?);
            out.check(exact_gap(2)? == 1.0, "gap(2) is not exactly 1");
            out.table = Some(table);
        }
        "stationary" => {
            let n = need(&p.n, "n")?;
            let start = single_z(n)?;
            let walkers = run_walkers(&start, need(&p.t, "t")?, need(&p.samples, "samples")?, seed)?;
            let tv = uniform_nonzero_tv(&walkers)?;
            out.put("tv_uniform", tv);
            out.check(tv <= 0.02, "walkers are more than 0.02 from uniform in TV");
        }
        "lumped" => {
            let n = need(&p.n, "n")?;
            let t = need(&p.t, "t")?;
            let walkers = run_walkers(&single_z(n)?, t, need(&p.samples, "samples")?, seed)?;
            let hist = weight_histogram(&walkers, n);
            let chain = lumped_matrix(n)?;
            let mut init = vec![0.0; n];
            init[0] = 1.0;
            let evolved = chain.evolve(&init, t)?;
            let tv = total_variation(&hist[1..], &evolved);
            out.put("tv_lumped", tv);
            out.check(tv <= 0.02, "full chain and lumped chain differ by more than 0.02 in TV");
            let mut table = Table::new(&["weight", "full_chain", "lumped"]);
            for w in 1..=n {
                table.rows.push(vec![w.to_string(), format!("{:.16e}", hist[w]), format!("{:.16e}", evolved[w - 1])]);
            }
            out.table = Some(table);
        }
        "moments" => {
            let n = need(&p.n, "n")?;
            let r = moment_compare(n, need(&p.t, "t")?, need(&p.samples, "samples")?, seed)?;
            out.put("tv", r.tv);
            out.check(r.tv <= 0.03, "circuit moments differ from the chain by more than 0.03 in TV");
            let mut table = Table::new(&["p", "circuit_average", "chain"]);
            for (k, (a, b)) in r.averaged.masses.iter().zip(&r.evolved.masses).enumerate() {
                let codes: String =
                    PauliString::from_index(n, k).codes().iter().map(|c| char::from(b'0' + c)).collect();
                table.rows.push(vec![codes, format!("{a:.16e}"), format!("{b:.16e}")]);
            }
            out.table = Some(table);
        }
        other => return Err(CliError::Config(format!("unknown markov mode '{other}'"))),
    }
    Ok(out)
}

fn single_z(n: usize) -> CliResult<PauliString> {
    let mut codes = vec![0u8; n];
    if let Some(c) = codes.first_mut() {
        *c = 1;
    }
    Ok(PauliString::from_codes(&codes)?)
}

fn ad2(p: &Params, seed: u64) -> CliResult<RunOutput> {
    let r = verify_mean_ad2(need(&p.samples, "samples")?, seed)?;
    let mut out = RunOutput::default();
    out.put("frobenius", r.frobenius);
    out.put("pp_rows_distance", r.pp_rows_distance);
    out.put("expected_noise", r.expected_noise);
    out.put("max_orthogonality_dev", r.max_orthogonality_dev);
    out.put("max_first_row_dev", r.max_first_row_dev);
    out.put("max_imag", r.max_imag);
    out.check(r.frobenius <= 0.05, "Frobenius distance to the projector exceeds 0.05");
    out.check(r.max_orthogonality_dev <= 1e-10, "some ad_W is not orthogonal within 1e-10");
    out.check(r.max_first_row_dev <= 1e-12, "some ad_W has first row/column away from e_00");
    Ok(out)
}

fn qt(p: &Params, seed: u64) -> CliResult<RunOutput> {
    let n = need(&p.n, "n")?;
    let t = need(&p.t, "t")?;
    let circuits = need(&p.samples, "samples")?;
    let beta = need(&p.beta, "beta")?;
    let stats = q_t_statistics(n, t, circuits, seed, false)?;
    let grid = circuit_collisions(n, t, circuits, seed)?;
    let flat: Vec<f64> = grid.iter().flatten().copied().collect();
    let tail = markov_tail(&flat, n, beta);
    let dim = (1u64 << n) as f64;
    let mut out = RunOutput::default();
    out.put("mean_q", stats.mean);
    out.put("std_err", stats.std_err);
    out.put("mean_q_times_dim", stats.mean * dim);
    out.put("tail_fraction", tail.fraction);
    out.put("tail_markov_bound", tail.bound);
    out.put("tail_cutoff", tail.cutoff);
    out.check(stats.mean <= 2.2 / dim, "mean Q_t exceeds 2.2·2^-n");
    out.check(tail.fraction <= 2.0 * beta * beta + 0.05, "tail fraction exceeds 2·beta^2 + 0.05");
    let mut table = Table::new(&["circuit", "q"]);
    for (k, q) in stats.values.iter().enumerate() {
        table.rows.push(vec![k.to_string(), format!("{q:.16e}")]);
    }
    out.table = Some(table);
    Ok(out)
}
