//! The batch commands behind the `chaos-certs` binary, callable as library
//! functions. Each returns a [`VerificationReport`]; the binary only parses
//! flags and writes the report.

use serde::Serialize;

use crate::bounds::{BoundEvaluator, BoundQuery};
use crate::constants::{compute_a_interval, epsilon_range, z0_range, ConstantsBundle, SystemParams, Z0_CONSTRAINTS};
use crate::error::{Error, Result};
use crate::optimize::{optimize_bundle, Objective, DEFAULT_MARGIN};
use crate::precision::{Arith, Precision};
use crate::renewal::{monte_carlo_occupation, occupation_at_zero, verify_key_inequality_with, RenewalChain};
use crate::report::{down, mid, num, rel_dev, up, VerificationReport};
use crate::shift::martingale::martingale_decomposition;
use crate::shift::operator::{autocovariances, spectrum_moduli};
use crate::shift::sample::{empirical_clt, empirical_ldp, empirical_lln};
use crate::shift::{
    center, correlation_profile, equilibrium_measure, green_kubo_sigma2, operator_identities, transfer_matrix,
    CylinderFunction, MarkovShiftModel,
};
use crate::toral::{self, quoted, MatrixFile, Parameterization, ToralMap};

/// Seed used whenever none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

impl Error {
    /// Process exit code: 2 for unusable input, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Parse { .. } | Error::Io(_) | Error::NonzeroMean(_) | Error::DepthTooSmall { .. } => 2,
            _ => 1,
        }
    }
}

/// `(θ, ‖φ_p‖, ‖φ‖)` as decimal strings, read at working precision.
#[derive(Clone, Debug, Serialize)]
pub struct ParamsInput {
    pub theta: String,
    pub phi_p_norm: String,
    pub phi_norm: String,
}

impl ParamsInput {
    pub fn build(&self, ar: &Arith) -> Result<SystemParams> {
        let field = |name: &str, s: &str| ar.parse(s).map_err(|e| Error::parse(name, e.to_string()));
        SystemParams::from_intervals(
            field("theta", &self.theta)?,
            field("phi_p_norm", &self.phi_p_norm)?,
            field("phi_norm", &self.phi_norm)?,
        )
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum BundleChoice {
    Explicit { epsilon: String, z0: String },
    Optimize { objective: Objective, margin: f64 },
}

impl Default for BundleChoice {
    fn default() -> Self {
        BundleChoice::Optimize {
            objective: Objective::AsymptoticRate,
            margin: DEFAULT_MARGIN,
        }
    }
}

fn resolve_bundle(params: &SystemParams, choice: &BundleChoice, ar: &Arith) -> Result<ConstantsBundle> {
    match choice {
        BundleChoice::Explicit { epsilon, z0 } => {
            let eps = ar.parse(epsilon).map_err(|e| Error::parse("epsilon", e.to_string()))?;
            let z0 = ar.parse(z0).map_err(|e| Error::parse("z0", e.to_string()))?;
            ConstantsBundle::assemble(params, &eps, &(&z0 - &ar.one()), ar)
        }
        BundleChoice::Optimize { objective, margin } => Ok(optimize_bundle(params, *objective, *margin, ar)?.bundle),
    }
}

fn admissibility_rows(rep: &mut VerificationReport, label: &str, b: &ConstantsBundle) {
    for m in &b.margins {
        rep.check(
            &format!("admissibility/{label}"),
            &m.constraint,
            None,
            Some(num(m.slack)),
            m.slack,
            0.0,
            m.holds,
        );
    }
}

/// The four theorem bounds for one evaluator.
fn bound_rows(rep: &mut VerificationReport, section: &str, ev: &BoundEvaluator, q: &BoundQuery) {
    rep.info(section, &format!("correlation bound at n={}", q.n), up(&ev.correlation(q.n)), None);
    let [c1, c2, c3, total] = ev.clt_terms(q.t, q.n);
    rep.info(section, &format!("clt error at t={}, n={}", q.t, q.n), up(&total), None);
    rep.info(section, "clt error, leading term", up(&c1), None);
    rep.info(section, "clt error, second term", up(&c2), None);
    rep.info(section, "clt error, third term", up(&c3), None);
    rep.info(section, "clt leading coefficient", up(&ev.clt_leading_coefficient()), None);
    let ldp = ev.ldp(q.u, q.n);
    rep.probability(section, &format!("ldp bound at u={}, n={}", q.u, q.n), up(&ldp), ldp.lo_f64() >= 1.0);
    let (k1, k2) = ev.ldp_coefficients();
    rep.info(section, "ldp linear coefficient", down(&k1), None);
    rep.info(section, "ldp quadratic coefficient", down(&k2), None);
    lln_row(rep, section, ev, q.delta);
}

fn lln_row(rep: &mut VerificationReport, section: &str, ev: &BoundEvaluator, delta: f64) -> Option<f64> {
    let quantity = format!("lln threshold bound at delta={delta}");
    match ev.lln(delta) {
        Ok(s) => {
            rep.info(section, &quantity, s.value.to_sci(crate::report::REPORT_DIGITS), Some(format!("{} terms", s.terms)));
            Some(s.value.to_f64())
        }
        Err(Error::NonconvergentAtPrecision { reason, required_terms }) => {
            rep.info(section, &quantity, None, Some(format!("nonconvergent: {reason}; about {required_terms:e} terms needed")));
            None
        }
        Err(e) => {
            rep.info(section, &quantity, None, Some(format!("error: {e}")));
            None
        }
    }
}

fn params_rows(rep: &mut VerificationReport, params: &SystemParams, ar: &Arith) -> Result<()> {
    let a = compute_a_interval(params, ar);
    let er = epsilon_range(params, &a, ar);
    rep.info("constants", "a", up(&a), None);
    rep.info("constants", "epsilon upper limit", down(&er.eps_max), None);
    Ok(())
}

fn bundle_rows(rep: &mut VerificationReport, label: &str, params: &SystemParams, b: &ConstantsBundle, ar: &Arith) -> Result<()> {
    rep.bundle(label, b);
    if b.epsilon.certainly_positive() && b.admissible {
        let zr = z0_range(params, &b.a, &b.epsilon, ar)?;
        rep.info(&format!("constants/{label}"), "U", mid(&b.u), None);
        rep.info(
            &format!("constants/{label}"),
            &format!("Z - 1, binding {}", Z0_CONSTRAINTS[zr.binding]),
            down(&zr.w_max),
            None,
        );
    }
    admissibility_rows(rep, label, b);
    Ok(())
}

// ---------------------------------------------------------------- constants

#[derive(Clone, Debug)]
pub struct ConstantsRequest {
    pub params: ParamsInput,
    pub bundle: BundleChoice,
    pub query: BoundQuery,
}

pub fn run_constants(req: &ConstantsRequest, precision: Precision) -> Result<VerificationReport> {
    req.query.validate()?;
    let ar = Arith::certified(precision);
    let params = req.params.build(&ar)?;
    let mut rep = VerificationReport::new("constants", precision.digits());
    rep.input("params", &req.params).input("bundle", &req.bundle).input("query", req.query);
    params_rows(&mut rep, &params, &ar)?;
    let bundle = resolve_bundle(&params, &req.bundle, &ar)?;
    bundle_rows(&mut rep, "selected", &params, &bundle, &ar)?;
    if bundle.admissible {
        let ev = BoundEvaluator::new(&params, &bundle, &ar)?;
        bound_rows(&mut rep, "bounds", &ev, &req.query);
    }
    Ok(rep)
}

// ------------------------------------------------------------------ renewal

#[derive(Clone, Debug, Serialize)]
pub struct RenewalRequest {
    pub params: ParamsInput,
    pub bundle: BundleChoice,
    /// Horizon of the weighted occupation check.
    pub kmax: usize,
    /// Relative tolerance of the generating-function identity.
    pub tol: f64,
    /// Monte Carlo paths (0 skips the simulation).
    pub paths: u64,
    pub seed: u64,
}

/// Occupation times compared against simulation.
pub const MC_TIMES: [usize; 5] = [1, 2, 5, 10, 20];

/// Horizon of the renewal-equation residual check.
pub const RENEWAL_EQ_HORIZON: usize = 500;

pub fn run_renewal_verify(req: &RenewalRequest, precision: Precision) -> Result<VerificationReport> {
    if req.kmax == 0 || !(req.tol > 0.0) {
        return Err(Error::invalid("kmax must be >= 1 and tol > 0"));
    }
    let ar = Arith::certified(precision);
    let params = req.params.build(&ar)?;
    let mut rep = VerificationReport::new("renewal-verify", precision.digits());
    rep.input("request", req).seed("monte_carlo", req.seed);
    let bundle = resolve_bundle(&params, &req.bundle, &ar)?;
    bundle_rows(&mut rep, "selected", &params, &bundle, &ar)?;

    let key = verify_key_inequality_with(&params, &bundle, req.kmax, req.tol, &ar)?;
    for v in &key.verdicts {
        rep.check("key inequality", &v.check, Some(num(v.rhs)), Some(num(v.lhs)), v.rhs - v.lhs, v.tolerance, v.holds);
    }

    let chain = RenewalChain::canonical(&params);
    let table = occupation_at_zero(&chain, RENEWAL_EQ_HORIZON)?;
    let res = table.renewal_residual();
    rep.check("renewal", "renewal equation residual, k <= 500", None, Some(num(res)), res, 1e-12, res <= 1e-12);
    let mass = table.max_mass_error;
    rep.info("renewal", "probability mass defect", None, Some(num(mass)));

    if req.paths > 0 {
        let counts = monte_carlo_occupation(&chain, MC_TIMES[MC_TIMES.len() - 1], req.paths, req.seed);
        let n = req.paths as f64;
        for k in MC_TIMES {
            let p = table.occupation[k];
            let sd = (p * (1.0 - p) / n).sqrt();
            let hat = counts[k] as f64 / n;
            rep.check(
                "monte carlo",
                &format!("P(S_{k} = 0)"),
                Some(num(p)),
                Some(num(hat)),
                hat - p,
                4.0 * sd,
                (hat - p).abs() <= 4.0 * sd,
            );
        }
    }
    Ok(rep)
}

// -------------------------------------------------------------------- shift

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "action")]
pub enum ShiftAction {
    Verify {
        n_max: usize,
        horizon: usize,
        pairs: usize,
    },
    Clt {
        t: f64,
        n: usize,
    },
    Ldp {
        u: f64,
        n: usize,
    },
    Lln {
        delta: f64,
        horizon: usize,
    },
}

#[derive(Clone, Debug)]
pub struct ShiftRequest {
    pub model: MarkovShiftModel,
    pub observable: CylinderFunction,
    pub source: String,
    pub action: ShiftAction,
    pub objective: Objective,
    pub trials: u64,
    pub seed: u64,
}

/// `1{x₀ = 0}` minus its mean.
pub fn default_observable(model: &MarkovShiftModel) -> Result<CylinderFunction> {
    let eq = equilibrium_measure(model)?;
    let ind = CylinderFunction::from_fn(model.alphabet_size(), 0, |w| if w[0] == 0 { 1.0 } else { 0.0 });
    Ok(center(&eq, &ind))
}

/// Random-pair count for the duality check and the sample count for the
/// telescoping check when exhaustion is too large.
pub const TELESCOPING_SAMPLES: u64 = 20_000;

pub fn run_shift(req: &ShiftRequest, precision: Precision) -> Result<VerificationReport> {
    let ar = Arith::certified(precision);
    let model = &req.model;
    let phi = &req.observable;
    let eq = equilibrium_measure(model)?;
    let mean = eq.expectation(phi);
    if mean.abs() > crate::shift::operator::MEAN_TOL {
        return Err(Error::NonzeroMean(mean));
    }
    let params = model.system_params(phi)?;
    let opt = optimize_bundle(&params, req.objective, DEFAULT_MARGIN, &ar)?;
    let ev = BoundEvaluator::new(&params, &opt.bundle, &ar)?;

    let mut rep = VerificationReport::new("shift", precision.digits());
    rep.input("model", &req.source)
        .input("alphabet_size", model.alphabet_size())
        .input("potential_depth", model.depth())
        .input("theta", model.theta())
        .input("observable_depth", phi.depth())
        .input("objective", req.objective)
        .input("action", &req.action)
        .input("trials", req.trials);
    rep.seed("monte_carlo", req.seed);
    rep.info("model", "phi_p norm", None, Some(num(params.phi_p_norm_f64())));
    rep.info("model", "observable norm", None, Some(num(params.phi_norm_f64())));
    rep.info("model", "spectral gap of the base chain", None, Some(num(eq.spectral_gap)));
    bundle_rows(&mut rep, "optimized", &params, &opt.bundle, &ar)?;

    match req.action {
        ShiftAction::Verify { n_max, horizon, pairs } => shift_verify(&mut rep, req, &ev, n_max, horizon, pairs)?,
        ShiftAction::Clt { t, n } => {
            let gk = green_kubo_sigma2(model, phi, 1e-12, Some(&ev))?;
            rep.info("clt", "green-kubo variance", None, Some(num(gk.sigma2)));
            rep.info("clt", "green-kubo tail bound", None, Some(num(gk.tail_bound)));
            let est = empirical_clt(model, phi, gk.sigma2, t, n, req.trials, req.seed)?;
            let bound = ev.clt_error(t, n as u64);
            rep.info("clt", "empirical characteristic function (re)", None, Some(num(est.re)));
            rep.info("clt", "empirical characteristic function (im)", None, Some(num(est.im)));
            rep.info("clt", "gaussian limit", Some(num(est.target)), None);
            rep.info("clt", "standard error", None, Some(num(est.std_error)));
            rep.domination(
                "clt",
                "distance to gaussian limit <= clt error",
                bound.hi_f64(),
                up(&bound),
                est.distance,
                4.0 * est.std_error,
                2.0,
            );
        }
        ShiftAction::Ldp { u, n } => {
            let bound = ev.ldp(u, n as u64);
            let est = empirical_ldp(model, phi, u, n, req.trials, req.seed)?;
            rep.info("ldp", "hits", None, Some(est.hits.to_string()));
            rep.domination(
                "ldp",
                &format!("P(|S_n/n| >= {u}) <= ldp bound"),
                bound.hi_f64(),
                up(&bound),
                est.frequency,
                4.0 * est.std_error,
                1.0,
            );
        }
        ShiftAction::Lln { delta, horizon } => {
            let census = empirical_lln(model, phi, delta, horizon, req.trials, req.seed)?;
            let n = census.observed.len() as f64;
            let var = census.observed.iter().map(|&x| (x as f64 - census.mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            let se = (var / n).sqrt();
            rep.info("lln", "largest observed threshold", None, Some(census.max.to_string()));
            rep.info(
                "lln",
                "censored trajectories",
                None,
                Some(census.censored.iter().filter(|&&c| c).count().to_string()),
            );
            match lln_row(&mut rep, "lln", &ev, delta) {
                Some(b) => {
                    rep.domination("lln", "mean observed threshold <= lln bound", b, num(b), census.mean, 4.0 * se, f64::INFINITY);
                }
                None => {
                    rep.info("lln", "mean observed threshold", None, Some(num(census.mean)));
                }
            }
        }
    }
    Ok(rep)
}

fn shift_verify(
    rep: &mut VerificationReport,
    req: &ShiftRequest,
    ev: &BoundEvaluator,
    n_max: usize,
    horizon: usize,
    pairs: usize,
) -> Result<()> {
    let model = &req.model;
    let phi = &req.observable;
    let eq = equilibrium_measure(model)?;
    let id = operator_identities(model, pairs, req.seed)?;
    rep.check("operator", "|P1 - 1|", None, Some(num(id.constant_defect)), id.constant_defect, 1e-14, id.constant_defect <= 1e-14);
    rep.check(
        "operator",
        &format!("duality defect over {pairs} random pairs"),
        None,
        Some(num(id.duality_defect)),
        id.duality_defect,
        1e-12,
        id.duality_defect <= 1e-12,
    );
    rep.check(
        "operator",
        "shift invariance of the equilibrium measure",
        None,
        Some(num(id.invariance_defect)),
        id.invariance_defect,
        1e-12,
        id.invariance_defect <= 1e-12,
    );
    for (a, p) in id.marginal.iter().enumerate() {
        rep.info("operator", &format!("mu[x0 = {a}]"), None, Some(num(*p)));
    }

    let r = model.depth().max(phi.depth());
    let moduli = spectrum_moduli(&transfer_matrix(model, r)?.dense());
    rep.info("operator", "second eigenvalue modulus", None, Some(num(moduli.get(1).copied().unwrap_or(0.0))));

    // correlation decay against the theorem bound
    let profile = correlation_profile(model, phi, n_max)?;
    let mut worst = (0usize, f64::NEG_INFINITY);
    for (n, &c) in profile.iter().enumerate() {
        let b = ev.correlation(n as u64).lo_f64();
        if c - b > worst.1 {
            worst = (n, c - b);
        }
    }
    rep.check(
        "correlation",
        &format!("exact <= bound for all n <= {n_max} (worst n = {})", worst.0),
        Some(down(&ev.correlation(worst.0 as u64))),
        Some(num(profile[worst.0])),
        -worst.1,
        0.0,
        worst.1 <= 0.0,
    );
    for n in [0, 1, 10, 100, 200].into_iter().filter(|&n| n <= n_max) {
        rep.info("correlation", &format!("|P^n phi| at n={n}"), up(&ev.correlation(n as u64)), Some(num(profile[n])));
    }
    // last step still well above round-off
    if let Some(i) = (1..=n_max).rev().find(|&i| profile[i] > 1e-8 * profile[0]) {
        rep.info("correlation", &format!("decay ratio at n={i}"), None, Some(num(profile[i] / profile[i - 1])));
    }

    let gk = green_kubo_sigma2(model, phi, 1e-12, Some(ev))?;
    rep.info("variance", "green-kubo variance", None, Some(num(gk.sigma2)));
    rep.info("variance", "green-kubo tail bound", None, Some(num(gk.tail_bound)));
    rep.info("variance", "lag-0 autocovariance", None, Some(num(autocovariances(model, phi, 1)?[0])));

    let dec = martingale_decomposition(model, phi, horizon)?;
    let steps = dec.step_defect_sum();
    rep.check(
        "martingale",
        &format!("telescoping identity on every cylinder, N = {horizon} (summed step defects)"),
        None,
        Some(num(steps)),
        steps,
        1e-10,
        steps <= 1e-10,
    );
    let tel = dec.check_telescoping(TELESCOPING_SAMPLES, req.seed);
    rep.check(
        "martingale",
        &format!(
            "telescoping identity, N = {horizon} ({} {} words)",
            if tel.exhaustive { "all" } else { "sampled" },
            tel.words
        ),
        None,
        Some(num(tel.max_residual)),
        tel.max_residual,
        1e-10,
        tel.max_residual <= 1e-10,
    );
    let orth = dec.orthogonality_defect(&eq);
    rep.check("martingale", "orthogonality defect", None, Some(num(orth)), orth, 1e-10, orth <= 1e-10);
    let h_env = ev.coboundary_envelope().lo_f64();
    let sup_h = dec.sup_h();
    rep.check("martingale", "sup |H_n| <= envelope", Some(num(h_env)), Some(num(sup_h)), h_env - sup_h, 0.0, sup_h <= h_env);
    let psi_env = ev.martingale_sup_envelope().lo_f64();
    let sup_psi = dec.sup_psi();
    rep.check(
        "martingale",
        "sup |psi_n| <= envelope",
        Some(num(psi_env)),
        Some(num(sup_psi)),
        psi_env - sup_psi,
        0.0,
        sup_psi <= psi_env,
    );
    let theta = model.theta();
    let mut lip_ok = true;
    let mut worst_ratio = 0.0f64;
    for (n, psi) in dec.psi.iter().enumerate() {
        let env = ev.martingale_lip_envelope(n as u64).lo_f64();
        let lip = psi.lipschitz(theta);
        lip_ok &= lip <= env;
        worst_ratio = worst_ratio.max(lip / env);
    }
    rep.check(
        "martingale",
        "Lip(psi_n) <= envelope(n) for all n",
        Some("1".into()),
        Some(num(worst_ratio)),
        1.0 - worst_ratio,
        0.0,
        lip_ok,
    );
    Ok(())
}

// -------------------------------------------------------------------- toral

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ToralSource {
    Family(usize),
    Matrix(MatrixFile),
}

#[derive(Clone, Debug)]
pub struct ToralRequest {
    pub source: ToralSource,
    pub phi_norm: f64,
    pub objective: Objective,
    pub query: BoundQuery,
}

/// Tolerance for comparisons of computed spectra.
pub const SPECTRUM_TOL: f64 = 1e-9;

pub fn run_toral(req: &ToralRequest, precision: Precision) -> Result<VerificationReport> {
    req.query.validate()?;
    let ar = Arith::certified(precision);
    let (map, family) = match &req.source {
        ToralSource::Family(d) => (toral::build_family_matrix(*d)?, Some(*d)),
        ToralSource::Matrix(f) => (f.build()?, None),
    };
    let mut rep = VerificationReport::new("toral", precision.digits());
    rep.input("source", &req.source)
        .input("phi_norm", req.phi_norm)
        .input("objective", req.objective)
        .input("query", req.query);
    structure_rows(&mut rep, &map);

    let d = map.half_dimension();
    let mut parameterizations = vec![Parameterization::numerical(&map, &ar)];
    if let Some(d) = family {
        let cf = toral::closed_form_eigs(d);
        for (i, (x, y)) in map.eigenvalues.iter().zip(&cf).enumerate() {
            rep.info("spectrum", &format!("closed form lambda_{}", i + 1), Some(num(*y)), Some(num(*x)));
        }
        parameterizations.push(Parameterization::closed_form(d, &ar));
        if d == 3 {
            parameterizations.push(Parameterization::quoted(d, &ar));
        }
    }
    for p in &parameterizations {
        rep.info(&format!("parameters/{}", p.label), "theta", mid(&p.theta), None);
        rep.info(&format!("parameters/{}", p.label), "phi_p norm", mid(&p.phi_p_norm), None);
    }

    let params = parameterizations[0].params(req.phi_norm, &ar)?;
    params_rows(&mut rep, &params, &ar)?;
    let opt = optimize_bundle(&params, req.objective, DEFAULT_MARGIN, &ar)?;
    bundle_rows(&mut rep, "optimized", &params, &opt.bundle, &ar)?;
    let ev = BoundEvaluator::new(&params, &opt.bundle, &ar)?;
    bound_rows(&mut rep, "bounds", &ev, &req.query);

    if family == Some(3) && d == 3 {
        quoted_example_rows(&mut rep, &parameterizations[2], req, &ar)?;
    }
    Ok(rep)
}

fn structure_rows(rep: &mut VerificationReport, map: &ToralMap) {
    let d = map.half_dimension();
    rep.input("matrix", &map.matrix);
    rep.check("structure", "symmetric", None, None, 0.0, 0.0, map.is_symmetric());
    rep.check(
        "structure",
        "determinant",
        Some("1".into()),
        Some(map.determinant.to_string()),
        (map.determinant - 1) as f64,
        0.0,
        map.determinant == 1,
    );
    let closest = map.eigenvalues.iter().map(|l| (l.abs() - 1.0).abs()).fold(f64::INFINITY, f64::min);
    rep.check("structure", "hyperbolic", None, Some(num(closest)), closest, toral::HYPERBOLICITY_TOL, closest > toral::HYPERBOLICITY_TOL);
    let unstable = map.unstable_count();
    rep.check(
        "structure",
        "eigenvalues above 1",
        Some(d.to_string()),
        Some(unstable.to_string()),
        unstable as f64 - d as f64,
        0.0,
        unstable == d,
    );
    rep.check(
        "structure",
        "eigenpair residual",
        None,
        Some(num(map.max_residual)),
        map.max_residual,
        toral::RESIDUAL_TOL,
        map.max_residual <= toral::RESIDUAL_TOL * map.eigenvalues[0].abs().max(1.0),
    );
    rep.check(
        "structure",
        "imaginary parts",
        None,
        Some(num(map.max_imaginary)),
        map.max_imaginary,
        1e-12,
        map.max_imaginary < 1e-12,
    );
    let pd = map.product_defect();
    rep.check("structure", "product of eigenvalues = det", None, Some(num(pd)), pd, SPECTRUM_TOL, pd <= SPECTRUM_TOL);
    for (i, l) in map.eigenvalues.iter().enumerate() {
        rep.info("spectrum", &format!("lambda_{}", i + 1), None, Some(num(*l)));
    }
    let pairing = map.pairing_defects().into_iter().fold(0.0, f64::max);
    rep.info("spectrum", "reciprocal pairing defect", Some(num(SPECTRUM_TOL)), Some(num(pairing)));
}

/// The published three-block constants, evaluated both ways.
fn quoted_example_rows(rep: &mut VerificationReport, quoted_params: &Parameterization, req: &ToralRequest, ar: &Arith) -> Result<()> {
    let params = quoted_params.params(req.phi_norm, ar)?;
    let a = compute_a_interval(&params, ar);
    let a4 = (a.mid_f64() * 1e4).round() / 1e4;
    rep.check(
        "quoted example",
        "a to four decimals",
        Some(quoted::A.into()),
        Some(format!("{a4:.4}")),
        a.mid_f64() - 0.9999,
        5e-5,
        (a4 - 0.9999).abs() < 1e-12,
    );
    rep.ledger("a", up(&a), a.mid_f64(), quoted::A, "direct formula on the quoted theta and phi_p norm");
    let alt = toral::quoted_a_expression(3, ar);
    rep.ledger("a (alternative closed form)", up(&alt), alt.mid_f64(), quoted::A, "second expression given with the example");
    let eps = ar.parse(quoted::EPSILON)?;
    let er = epsilon_range(&params, &a, ar);
    rep.check(
        "quoted example",
        "epsilon admissible",
        Some(down(&er.eps_max)),
        Some(quoted::EPSILON.into()),
        er.eps_max.lo_f64() - eps.hi_f64(),
        0.0,
        er.contains(&eps),
    );

    let bundle = ConstantsBundle::from_decimal(&params, quoted::EPSILON, quoted::Z0, ar)?;
    rep.bundle("quoted", &bundle);
    for m in &bundle.margins {
        rep.info("admissibility/quoted", &m.constraint, None, Some(format!("slack {:e}, holds {}", m.slack, m.holds)));
    }
    rep.info("quoted example", "quoted bundle admissible", None, Some(bundle.admissible.to_string()));
    let zr = z0_range(&params, &a, &eps, ar)?;
    let quoted_w = &ar.parse(quoted::Z0)? - &ar.one();
    rep.ledger(
        "z0 - 1 (largest admissible)",
        down(&zr.w_max),
        zr.w_max.mid_f64(),
        &format!("{:e}", quoted_w.mid_f64()),
        "quoted z0 minus one",
    );

    let ev = BoundEvaluator::new(&params, &bundle, ar)?;
    let clt = ev.clt_leading_coefficient();
    rep.ledger("clt leading coefficient", up(&clt), clt.mid_f64(), quoted::CLT_COEFFICIENT, "quoted bundle");
    let (k1, k2) = ev.ldp_coefficients();
    rep.ledger("ldp linear coefficient", down(&k1), k1.mid_f64(), quoted::LDP_LINEAR, "quoted bundle");
    rep.ledger("ldp quadratic coefficient", down(&k2), k2.mid_f64(), quoted::LDP_QUADRATIC, "quoted bundle");
    bound_rows(rep, "bounds/quoted bundle", &ev, &req.query);

    // The optimizer on the quoted parameters, for comparison with the quoted z0.
    let opt = optimize_bundle(&params, req.objective, DEFAULT_MARGIN, ar)?;
    let ours = opt.bundle.log_sqrt_z0();
    let theirs = bundle.log_sqrt_z0();
    rep.info(
        "quoted example",
        "optimized ln sqrt(z0) vs quoted",
        Some(mid(&theirs)),
        Some(format!("{} (relative deviation {:e})", mid(&ours), rel_dev(ours.mid_f64(), theirs.mid_f64()))),
    );
    Ok(())
}
