//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line, in order.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use chaos_certs::bounds::{ldp_bound, lln_series_bound, lln_threshold_bound, BoundEvaluator};
use chaos_certs::commands::{run_toral, ToralRequest, ToralSource};
use chaos_certs::constants::{compute_a_interval, epsilon_range, z0_range, ConstantsBundle, SystemParams};
use chaos_certs::optimize::{optimize_bundle, Objective, DEFAULT_MARGIN};
use chaos_certs::bounds::BoundQuery;
use chaos_certs::precision::{Arith, Interval, Precision};
use chaos_certs::renewal::{
    monte_carlo_occupation, occupation_at_zero, occupation_series, tau_pmf, tau_series, verify_key_inequality,
    RenewalChain,
};
use chaos_certs::shift::{
    correlation_profile, empirical_clt, empirical_ldp, empirical_lln, equilibrium_measure, green_kubo_sigma2,
    martingale_decomposition, operator_identities, simulated_variance, transfer_matrix, CylinderFunction,
    MarkovShiftModel,
};
use chaos_certs::toral::{build_family_matrix, quoted, Parameterization};
use chaos_certs::Error;
use common::{Fx, Reference};

const SEED: u64 = 20_240_917;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn ar() -> Arith {
    Arith::certified(Precision::default())
}

fn unit_params() -> SystemParams {
    SystemParams::new(0.5, 1.0, 1.0).unwrap()
}

fn two_state() -> MarkovShiftModel {
    MarkovShiftModel::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]], 0.5).unwrap()
}

/// Indicator of `x₀ = 0` minus its mean `2/3`.
fn two_state_observable() -> CylinderFunction {
    CylinderFunction::from_fn(2, 0, |w| if w[0] == 0 { 1.0 / 3.0 } else { -2.0 / 3.0 })
}

fn shift_evaluator(model: &MarkovShiftModel, phi: &CylinderFunction) -> Result<BoundEvaluator, String> {
    let ar = ar();
    let params = model.system_params(phi).map_err(err)?;
    let opt = optimize_bundle(&params, Objective::AsymptoticRate, DEFAULT_MARGIN, &ar).map_err(err)?;
    BoundEvaluator::new(&params, &opt.bundle, &ar).map_err(err)
}

fn within(elapsed: Duration, limit: f64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, || {
        format!("{what} took {:.2} s, limit {limit} s", elapsed.as_secs_f64())
    })
}

fn generating_function_identity() -> Outcome {
    let start = Instant::now();
    let ar = ar();
    let chain = RenewalChain::canonical(&unit_params());
    let tau = tau_series(&chain, &ar.parse("1.05").unwrap(), 1e-15, &ar).map_err(err)?;
    let table = occupation_at_zero(&chain, 2000).map_err(err)?;
    let (occ, terms) = occupation_series(&table, 1.05);
    let rhs = 1.0 / (1.0 - tau.value.mid_f64());
    let rel = ((occ - rhs) / rhs).abs();
    let elapsed = start.elapsed();
    ensure(rel <= 1e-8, || format!("relative deviation {rel:e}"))?;
    ensure(terms < table.occupation.len(), || "occupation series not converged".into())?;
    within(elapsed, 1.0, "identity")?;
    Ok(format!("relative deviation {rel:.2e}, {} return-time terms, {:.3} s", tau.terms, elapsed.as_secs_f64()))
}

fn constant_rate_chain() -> Outcome {
    let ar = ar();
    let chain = RenewalChain::constant(0.3).map_err(err)?;
    let mut worst = 0.0f64;
    for k in 1..=100usize {
        let exact = 0.7f64.powi(k as i32 - 1) * 0.3;
        let got = tau_pmf(&chain, k).map_err(err)?;
        worst = worst.max((got - exact).abs() / exact);
    }
    ensure(worst <= 1e-12, || format!("pmf deviation {worst:e}"))?;
    let mut worst_series = 0.0f64;
    for z in ["0.5", "1", "1.2", "1.4"] {
        let zf: f64 = z.parse().unwrap();
        let s = tau_series(&chain, &ar.parse(z).unwrap(), 1e-15, &ar).map_err(err)?;
        let closed = 0.3 * zf / (1.0 - 0.7 * zf);
        worst_series = worst_series.max((s.value.mid_f64() - closed).abs() / closed);
    }
    ensure(worst_series <= 1e-12, || format!("series deviation {worst_series:e}"))?;
    Ok(format!("pmf deviation {worst:.1e} (k <= 100), series deviation {worst_series:.1e}"))
}

fn monte_carlo_vs_dp() -> Outcome {
    let start = Instant::now();
    let chain = RenewalChain::canonical(&unit_params());
    let paths = 1_000_000u64;
    let counts = monte_carlo_occupation(&chain, 20, paths, SEED);
    let table = occupation_at_zero(&chain, 20).map_err(err)?;
    let elapsed = start.elapsed();
    let mut worst = 0.0f64;
    for k in [1usize, 2, 5, 10, 20] {
        let p = table.occupation[k];
        let sd = (p * (1.0 - p) / paths as f64).sqrt();
        let z = (counts[k] as f64 / paths as f64 - p).abs() / sd;
        worst = worst.max(z);
    }
    ensure(worst <= 4.0, || format!("largest deviation {worst:.2} sd"))?;
    within(elapsed, 30.0, "monte carlo")?;
    Ok(format!("largest deviation {worst:.2} sd over k in {{1,2,5,10,20}}, {:.2} s", elapsed.as_secs_f64()))
}

fn renewal_equation() -> Outcome {
    let chain = RenewalChain::canonical(&unit_params());
    let table = occupation_at_zero(&chain, 500).map_err(err)?;
    let r = table.renewal_residual();
    ensure(r <= 1e-12, || format!("residual {r:e}"))?;
    Ok(format!("max residual {r:.1e} for k <= 500"))
}

fn key_inequality() -> Outcome {
    let ar = ar();
    let p = unit_params();
    let opt = optimize_bundle(&p, Objective::AsymptoticRate, DEFAULT_MARGIN, &ar).map_err(err)?;
    let rep = verify_key_inequality(&p, &opt.bundle, &ar).map_err(err)?;
    let failed: Vec<_> = rep.verdicts.iter().filter(|v| !v.holds).map(|v| v.check.clone()).collect();
    ensure(failed.is_empty(), || format!("failed: {}", failed.join("; ")))?;
    ensure(rep.weighted_horizon >= 10_000, || "horizon below 10^4".into())?;
    Ok(format!(
        "{} verdicts hold; tau series {:.6e} <= a + eps {:.6e}",
        rep.verdicts.len(),
        rep.tau_series,
        rep.a_plus_eps
    ))
}

fn correlation_domination() -> Outcome {
    let model = two_state();
    let phi = two_state_observable();
    let ev = shift_evaluator(&model, &phi)?;
    let profile = correlation_profile(&model, &phi, 200).map_err(err)?;
    for (n, &c) in profile.iter().enumerate() {
        let b = ev.correlation(n as u64).lo_f64();
        ensure(c <= b, || format!("n = {n}: {c:e} > {b:e}"))?;
    }
    let op = transfer_matrix(&model, 1).map_err(err)?;
    let eig = op.dense().complex_eigenvalues();
    let mut moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    let rate = moduli[1];
    ensure((rate - 0.7).abs() <= 1e-9, || format!("second eigenvalue {rate}"))?;
    // the exact profile decays like 0.7^n: |P^n φ| = 0.7^n |φ|
    let dev = (1..=20).map(|n| (profile[n] / profile[0] - 0.7f64.powi(n as i32)).abs()).fold(0.0, f64::max);
    ensure(dev <= 1e-9, || format!("profile deviates from 0.7^n by {dev:e}"))?;
    Ok(format!("exact <= bound for n <= 200; decay rate {rate:.12}"))
}

fn operator_identities_hold() -> Outcome {
    let model = two_state();
    let id = operator_identities(&model, 100, SEED).map_err(err)?;
    ensure(id.constant_defect <= 1e-14, || format!("|P1 - 1| = {:e}", id.constant_defect))?;
    ensure(id.duality_defect <= 1e-12, || format!("duality defect {:e}", id.duality_defect))?;
    ensure(id.pairs == 100, || format!("{} pairs", id.pairs))?;
    let mu = &id.marginal;
    let dev = (mu[0] - 2.0 / 3.0).abs().max((mu[1] - 1.0 / 3.0).abs());
    ensure(dev <= 1e-12, || format!("stationary vector {mu:?}"))?;
    Ok(format!(
        "|P1 - 1| = {:.1e}, duality {:.1e} over 100 pairs, stationary deviation {dev:.1e}",
        id.constant_defect, id.duality_defect
    ))
}

fn green_kubo() -> Outcome {
    let start = Instant::now();
    let coin = MarkovShiftModel::iid(&[0.5, 0.5], 0.5).map_err(err)?;
    let pm = CylinderFunction::from_fn(2, 0, |w| if w[0] == 0 { 1.0 } else { -1.0 });
    let iid = green_kubo_sigma2(&coin, &pm, 1e-12, None).map_err(err)?;
    ensure((iid.sigma2 - 1.0).abs() <= 1e-12, || format!("iid variance {}", iid.sigma2))?;

    let model = two_state();
    let phi = two_state_observable();
    let ev = shift_evaluator(&model, &phi)?;
    let gk = green_kubo_sigma2(&model, &phi, 1e-12, Some(&ev)).map_err(err)?;
    let sim = simulated_variance(&model, &phi, 10_000, 1_000, SEED).map_err(err)?;
    let z = (sim.estimate - gk.sigma2).abs() / sim.std_error;
    let elapsed = start.elapsed();
    ensure(z <= 3.0, || format!("simulated {} vs {} ({z:.2} SE)", sim.estimate, gk.sigma2))?;
    within(elapsed, 60.0, "green-kubo")?;
    Ok(format!(
        "iid variance {:.15}; two-state {:.12} vs simulated {:.5} ({z:.2} SE, 10^7 steps), {:.2} s",
        iid.sigma2,
        gk.sigma2,
        sim.estimate,
        elapsed.as_secs_f64()
    ))
}

fn martingale() -> Outcome {
    let model = two_state();
    let phi = two_state_observable();
    let ev = shift_evaluator(&model, &phi)?;
    let dec = martingale_decomposition(&model, &phi, 50).map_err(err)?;
    let steps = dec.step_defect_sum();
    ensure(steps <= 1e-10, || format!("summed step defect {steps:e}"))?;
    let tel = dec.check_telescoping(20_000, SEED);
    ensure(tel.max_residual <= 1e-10, || format!("sampled telescoping residual {:e}", tel.max_residual))?;
    let eq = equilibrium_measure(&model).map_err(err)?;
    let orth = dec.orthogonality_defect(&eq);
    ensure(orth <= 1e-10, || format!("orthogonality defect {orth:e}"))?;
    let h_env = ev.coboundary_envelope().lo_f64();
    let psi_env = ev.martingale_sup_envelope().lo_f64();
    ensure(dec.sup_h() <= h_env, || format!("sup H {} > {h_env:e}", dec.sup_h()))?;
    ensure(dec.sup_psi() <= psi_env, || format!("sup psi {} > {psi_env:e}", dec.sup_psi()))?;
    Ok(format!(
        "step defects {steps:.1e}, sampled residual {:.1e} ({} words), orthogonality {orth:.1e}, sup H {:.4} <= {h_env:.3e}, sup psi {:.4} <= {psi_env:.3e}",
        tel.max_residual,
        tel.words,
        dec.sup_h(),
        dec.sup_psi()
    ))
}

fn empirical_clt_check() -> Outcome {
    let model = two_state();
    let phi = two_state_observable();
    let ev = shift_evaluator(&model, &phi)?;
    let gk = green_kubo_sigma2(&model, &phi, 1e-12, Some(&ev)).map_err(err)?;
    let est = empirical_clt(&model, &phi, gk.sigma2, 1.0, 4096, 100_000, SEED).map_err(err)?;
    ensure(est.distance < 0.05, || format!("distance {}", est.distance))?;
    let bound = ev.clt_error(1.0, 4096);
    let vacuous = bound.hi_f64() >= 2.0;
    ensure(est.distance <= bound.hi_f64() + 4.0 * est.std_error, || {
        format!("distance {} above bound {}", est.distance, bound.hi_f64())
    })?;
    let zero = empirical_clt(&model, &phi, gk.sigma2, 0.0, 4096, 1000, SEED).map_err(err)?;
    ensure(zero.distance == 0.0, || format!("t = 0 distance {}", zero.distance))?;
    ensure(ev.clt_error(0.0, 4096).is_zero(), || "t = 0 bound is not zero".into())?;
    Ok(format!(
        "distance {:.4} (sd {:.4}) < 0.05; bound {:.3e}{}; t = 0 gives 0",
        est.distance,
        est.std_error,
        bound.hi_f64(),
        if vacuous { " (vacuous)" } else { "" }
    ))
}

fn empirical_ldp_lln() -> Outcome {
    let ar = ar();
    let model = two_state();
    let phi = two_state_observable();
    let params = model.system_params(&phi).map_err(err)?;
    let opt = optimize_bundle(&params, Objective::AsymptoticRate, DEFAULT_MARGIN, &ar).map_err(err)?;
    let ev = BoundEvaluator::new(&params, &opt.bundle, &ar).map_err(err)?;
    let est = empirical_ldp(&model, &phi, 0.2, 1000, 100_000, SEED).map_err(err)?;
    let bound = ev.ldp(0.2, 1000).hi_f64();
    if bound < 1.0 {
        ensure(est.frequency <= bound, || format!("frequency {} > bound {bound}", est.frequency))?;
    }
    let at_zero = ldp_bound(&params, &opt.bundle, 0.0, 1000, &ar).map_err(err)?;
    ensure(at_zero.value.to_f64() == 2.0 && ev.ldp(0.0, 1000).lo_f64() == 2.0, || {
        format!("ldp at u = 0 is {}", at_zero.value.to_sci(20))
    })?;

    let census = empirical_lln(&model, &phi, 0.49, 10_000, 100, SEED).map_err(err)?;
    ensure(census.observed.len() == 100, || "census incomplete".into())?;
    ensure(census.observed.iter().all(|&n| n <= 10_000), || "threshold beyond horizon".into())?;
    let lln = match lln_threshold_bound(&params, &opt.bundle, 0.49, &ar) {
        Ok(s) => format!("bound {}", s.value.to_sci(6)),
        Err(Error::NonconvergentAtPrecision { required_terms, .. }) => {
            format!("bound needs {required_terms:.1e} terms (reported as nonconvergent)")
        }
        Err(e) => return Err(err(e)),
    };
    Ok(format!(
        "ldp frequency {} vs bound {bound:.3e}{}; ldp(0) = 2; lln thresholds max {} mean {:.2}, {} censored; {lln}",
        est.frequency,
        if bound >= 1.0 { " (vacuous)" } else { "" },
        census.max,
        census.mean,
        census.censored.iter().filter(|&&c| c).count()
    ))
}

fn toral_one_block() -> Outcome {
    let map = build_family_matrix(1).map_err(err)?;
    ensure(map.matrix == vec![vec![10, 7], vec![7, 5]], || format!("matrix {:?}", map.matrix))?;
    let r = 221f64.sqrt();
    let exact = [(15.0 + r) / 2.0, (15.0 - r) / 2.0];
    let dev = map
        .eigenvalues
        .iter()
        .zip(exact)
        .map(|(l, e)| (l - e).abs() / e)
        .fold(0.0, f64::max);
    ensure(dev <= 1e-12, || format!("eigenvalues {:?}", map.eigenvalues))?;
    let theta = 2.0 / (15.0 + r);
    let tdev = (map.theta() - theta).abs() / theta;
    ensure(tdev <= 1e-12, || format!("theta {}", map.theta()))?;
    Ok(format!("f = [[10,7],[7,5]], eigenvalue deviation {dev:.1e}, theta deviation {tdev:.1e}"))
}

fn fx(x: &Interval) -> Fx {
    Fx::dec(&x.to_sci(50))
}

fn toral_three_blocks() -> Outcome {
    let ar = ar();
    let map = build_family_matrix(3).map_err(err)?;
    ensure(map.is_symmetric(), || "not symmetric".into())?;
    ensure(map.determinant == 1, || format!("det {}", map.determinant))?;
    ensure(map.unstable_count() == 3, || format!("{} expanding eigenvalues", map.unstable_count()))?;

    let stated = Parameterization::quoted(3, &ar);
    let params = stated.params(1.0, &ar).map_err(err)?;
    let a = compute_a_interval(&params, &ar);
    ensure(format!("{:.4}", a.mid_f64()) == quoted::A, || format!("a = {}", a.to_sci(12)))?;
    let eps = ar.parse(quoted::EPSILON).unwrap();
    ensure(epsilon_range(&params, &a, &ar).contains(&eps), || "epsilon not admissible".into())?;

    let report = run_toral(
        &ToralRequest {
            source: ToralSource::Family(3),
            phi_norm: 1.0,
            objective: Objective::AsymptoticRate,
            query: BoundQuery { n: 100, t: 1.0, u: 0.1, delta: 0.25 },
        },
        Precision::default(),
    )
    .map_err(err)?;
    for needle in ["z0", "clt leading coefficient", "ldp linear coefficient", "ldp quadratic coefficient"] {
        ensure(report.ledger.iter().any(|e| e.quantity.contains(needle)), || format!("ledger lacks {needle}"))?;
    }

    // independent reference on the stated bundle
    let bundle = ConstantsBundle::from_decimal(&params, quoted::EPSILON, quoted::Z0, &ar).map_err(err)?;
    let ev = BoundEvaluator::new(&params, &bundle, &ar).map_err(err)?;
    let theta = (&Fx::int(9) - &Fx::int(77).sqrt()).half();
    let phi_p = &Fx::int(3) * &(&Fx::int(15) + &Fx::int(221).sqrt()).half().ln();
    let r = Reference::new(theta, phi_p, Fx::one(), Fx::dec(quoted::EPSILON), Fx::dec(quoted::Z0));
    let (w, _) = r.z_minus_one();
    let zr = z0_range(&params, &bundle.a, &bundle.epsilon, &ar).map_err(err)?;
    let (k1, k2) = ev.ldp_coefficients();
    let (r1, r2) = r.ldp_coefficients();
    let pairs = [
        ("a", fx(&bundle.a).rel_diff(&r.a)),
        ("U", fx(&bundle.u).rel_diff(&r.u_exp)),
        ("Z - 1", fx(&zr.w_max).rel_diff(&w)),
        ("clt coefficient", fx(&ev.clt_leading_coefficient()).rel_diff(&r.clt_leading_coefficient())),
        ("kappa1", fx(&k1).rel_diff(&r1)),
        ("kappa2", fx(&k2).rel_diff(&r2)),
    ];
    let worst = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    for (name, d) in pairs {
        ensure(d <= 1e-20, || format!("{name} deviates from the reference by {d:e}"))?;
    }
    let clt_dev = report
        .ledger
        .iter()
        .find(|e| e.quantity == "clt leading coefficient")
        .map_or(f64::NAN, |e| e.relative_deviation);
    Ok(format!(
        "structure ok; a = {:.4}; eps admissible; reference agreement {worst:.1e}; stated bundle admissible: {}; clt coefficient deviation from quoted {clt_dev:.2e}",
        a.mid_f64(),
        bundle.admissible
    ))
}

/// Every bound family at one precision, in the given mode.
fn bound_panel(digits: u32, certified: bool) -> Result<Vec<(String, Interval)>, String> {
    let p = Precision::new(digits).map_err(err)?;
    let ar = if certified { Arith::certified(p) } else { Arith::nearest(p) };
    let params = unit_params();
    let bundle = ConstantsBundle::from_decimal(&params, "0.1", "1.001", &ar).map_err(err)?;
    let ev = BoundEvaluator::new(&params, &bundle, &ar).map_err(err)?;
    let mut out = Vec::new();
    for n in [0u64, 10, 1000, 100_000] {
        out.push((format!("correlation n={n}"), ev.correlation(n)));
    }
    for (t, n) in [(1.0, 100u64), (0.5, 1_000_000)] {
        out.push((format!("clt t={t} n={n}"), ev.clt_error(t, n)));
    }
    for (u, n) in [(0.1, 100u64), (0.5, 1u64 << 60)] {
        out.push((format!("ldp u={u} n={n}"), ev.ldp(u, n)));
    }
    let lln = lln_series_bound(&ar.parse("0.001").unwrap(), &ar.int(10), 0.25, &ar).map_err(err)?;
    out.push(("lln c=10".into(), ar.parse(&lln.value.to_sci(60)).map_err(err)?));
    Ok(out)
}

fn precision_robustness() -> Outcome {
    let lo = bound_panel(60, true)?;
    let hi = bound_panel(120, true)?;
    let near = bound_panel(60, false)?;
    let mut worst = 0.0f64;
    for ((name, a), (_, b)) in lo.iter().zip(&hi) {
        let d = fx(a).rel_diff(&fx(b));
        ensure(d < 1e-10, || format!("{name} moved by {d:e}"))?;
        worst = worst.max(d);
    }
    for ((name, c), (_, n)) in lo.iter().zip(&near) {
        ensure(Fx::dec(&c.upper().to_sci(50)) >= Fx::dec(&n.upper().to_sci(50)), || {
            format!("{name}: certified {} below nearest {}", c.upper().to_sci(30), n.upper().to_sci(30))
        })?;
    }
    Ok(format!("{} bounds; largest relative change 60 -> 120 digits {worst:.1e}; certified >= nearest", lo.len()))
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_chaos-certs");
    let commands: Vec<Vec<&str>> = vec![
        vec!["constants", "--theta", "0.5", "--phi-p-norm", "1", "--optimize", "rate"],
        vec!["constants", "--theta", "0.5", "--phi-p-norm", "1", "--epsilon", "0.1", "--z0", "1.001", "--format", "csv"],
        vec!["renewal-verify", "--theta", "0.5", "--phi-p-norm", "1", "--paths", "20000", "--kmax", "2000"],
        vec!["shift", "--model", "models/twostate.json", "--trials", "2000", "verify", "--n-max", "50", "--horizon", "12"],
        vec!["shift", "--model", "models/twostate.json", "--trials", "2000", "clt", "--n", "256"],
        vec!["shift", "--model", "models/twostate.json", "--trials", "2000", "ldp", "--n", "200"],
        vec!["shift", "--model", "models/twostate.json", "--trials", "20", "lln", "--horizon", "1000"],
        vec!["toral", "--d", "1"],
        vec!["toral", "--d", "3"],
    ];
    for args in &commands {
        let run = || Command::new(bin).args(args).output().map_err(|e| e.to_string());
        let first = run()?;
        let second = run()?;
        ensure(first.status.code() == Some(0), || {
            format!("{} exited with {:?}: {}", args.join(" "), first.status.code(), String::from_utf8_lossy(&first.stderr))
        })?;
        ensure(first.stdout == second.stdout, || format!("{} differs between runs", args.join(" ")))?;
        ensure(!first.stdout.is_empty(), || format!("{} printed nothing", args.join(" ")))?;
    }
    Ok(format!("{} commands byte-identical across two runs", commands.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 15] = [
        ("renewal generating-function identity", generating_function_identity),
        ("constant-rate chain against the geometric law", constant_rate_chain),
        ("monte carlo occupation against the recursion", monte_carlo_vs_dp),
        ("renewal equation", renewal_equation),
        ("key inequality for the optimized bundle", key_inequality),
        ("correlation bound domination and decay rate", correlation_domination),
        ("transfer-operator identities", operator_identities_hold),
        ("green-kubo variance", green_kubo),
        ("martingale decomposition", martingale),
        ("empirical clt", empirical_clt_check),
        ("empirical ldp and lln", empirical_ldp_lln),
        ("toral family, one block", toral_one_block),
        ("toral family, three blocks", toral_three_blocks),
        ("precision robustness", precision_robustness),
        ("cli determinism", cli_determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
