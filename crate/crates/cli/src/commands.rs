use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use serde_json::json;
use spectral_lab::acceptance::{self, CRITERIA};
use spectral_lab::dynamics::{envelope_sweep, transfer_solve};
use spectral_lab::eigen::decay_fit;
use spectral_lab::lattice::{Lattice, Potential, Tail};
use spectral_lab::report::{self, pretty, Format, Table};
use spectral_lab::variational::{
    adapted_energy_formula, criticality_certificate, cutoff_energy, ground_state_identity, CutoffKind, CutoffProfile,
    GroundStateModel, Outcome, Perturbation, SearchParams,
};
use spectral_lab::wvn::{
    bargmann_sweep, build_wvn, comparison_potentials, lower_bound_check, operator_inequality_check,
    resolved_spectrum, standard_probes,
};
use spectral_lab::{Error, Result};

use crate::{
    AcceptanceArgs, BargmannArgs, Command, CriticalityArgs, CutoffArg, CutoffCommand, CutoffEnergyArgs, DecayArgs,
    EigenCheckArgs, EigenCommand, EnvelopeArgs, Expectation, GroundStateArgs, IdentityCommand, InequalityArgs,
    LowerBoundArgs, ModelArgs, ModelKind, PolnArgs, PotentialArgs, PotentialKind, RunConfig, SpectrumArgs,
    TransferArgs, WvnArgs, WvnCommand,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
}

impl Status {
    fn from_check(ok: bool) -> Self {
        if ok {
            Status::Passed
        } else {
            Status::Failed
        }
    }
}

fn bad_input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

pub fn dispatch(cfg: &RunConfig) -> Result<Status> {
    match &cfg.command {
        Command::Wvn(WvnCommand::Build(a)) => wvn_build(cfg, a),
        Command::Wvn(WvnCommand::Spectrum(a)) => wvn_spectrum(cfg, a),
        Command::Wvn(WvnCommand::Decay(a)) => wvn_decay(cfg, a),
        Command::Wvn(WvnCommand::Bargmann(a)) => wvn_bargmann(cfg, a),
        Command::Wvn(WvnCommand::LowerBound(a)) => wvn_lower_bound(cfg, a),
        Command::Wvn(WvnCommand::Inequality(a)) => wvn_inequality(cfg, a),
        Command::Transfer(a) => transfer(cfg, a),
        Command::Envelope(a) => envelope(cfg, a),
        Command::Identity(IdentityCommand::Poln(a)) => identity_poln(cfg, a),
        Command::Identity(IdentityCommand::GroundState(a)) => identity_ground_state(cfg, a),
        Command::Cutoff(CutoffCommand::Energy(a)) => cutoff_energy_cmd(cfg, a),
        Command::Criticality(a) => criticality(cfg, a),
        Command::Eigen(EigenCommand::Check(a)) => eigen_check(cfg, a),
        Command::Acceptance(a) => acceptance_cmd(cfg, a),
    }
}

fn report_path(cfg: &RunConfig, name: &str, format: Format) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| cfg.output_dir.join(format!("{name}.{}", format.extension())))
}

fn emit_text(cfg: &RunConfig, name: &str, format: Format, text: &str) -> Result<()> {
    let path = report_path(cfg, name, format);
    report::write_report(&path, text)?;
    println!("report: {}", path.display());
    Ok(())
}

fn emit(cfg: &RunConfig, name: &str, table: &Table) -> Result<()> {
    let format = cfg.format.into();
    emit_text(cfg, name, format, &table.render(format))
}

fn wvn_build(cfg: &RunConfig, a: &WvnArgs) -> Result<Status> {
    let pair = build_wvn(a.alpha, a.window)?;
    let residual = pair.eigen_residual()?;
    println!("alpha {} window [0, {}]: relative residual of h_V ψ = 0 is {residual:e}", a.alpha, a.window);
    if !pair.guaranteed() {
        println!("note: alpha below sqrt 7, the decay and lower-bound statements are not guaranteed");
    }
    emit(cfg, "wvn_build", &report::wvn_table(&pair))?;
    Ok(Status::Passed)
}

fn wvn_spectrum(cfg: &RunConfig, a: &SpectrumArgs) -> Result<Status> {
    let pair = build_wvn(a.wvn.alpha, a.wvn.window)?;
    let spec = resolved_spectrum(&pair, a.wvn.window as i64, a.tol)?;
    println!("{} bound states, {} resolved on [0, {}]", spec.list.len(), spec.resolved_count(), a.wvn.window);
    emit(cfg, "wvn_spectrum", &report::resolved_table(&spec))?;
    Ok(Status::Passed)
}

fn wvn_decay(cfg: &RunConfig, a: &DecayArgs) -> Result<Status> {
    let pair = build_wvn(a.wvn.alpha, a.wvn.window)?;
    let spec = resolved_spectrum(&pair, a.wvn.window as i64, a.tol)?;
    let to = a.to.unwrap_or_else(|| spec.resolved_count());
    let fit = decay_fit(&spec.list, a.from..=to)?;
    println!(
        "n = {}..{to}: slope {} (rate {}), rms {}, power-law rms {}",
        a.from,
        fit.slope,
        fit.rate(),
        fit.residual,
        fit.power_law_residual
    );
    emit(cfg, "wvn_decay", &report::decay_table(&spec.list, &fit))?;
    Ok(Status::from_check(fit.slope < 0.0 && fit.residual < 0.5))
}

fn wvn_bargmann(cfg: &RunConfig, a: &BargmannArgs) -> Result<Status> {
    if a.k_min < 1 || a.k_max < a.k_min {
        return Err(bad_input(format!("need 1 <= k-min <= k-max, got {}..{}", a.k_min, a.k_max)));
    }
    let pair = build_wvn(a.wvn.alpha, a.wvn.window)?;
    let set = comparison_potentials(&pair)?;
    let lambdas: Vec<f64> = (a.k_min..=a.k_max).map(|k| 2f64.powi(-k)).collect();
    let rows = bargmann_sweep(&pair, &set, a.wvn.window as i64, &lambdas)?;
    let c = rows.iter().map(|r| r.count as f64 / (1.0 + (1.0 / r.lambda).ln())).fold(0.0, f64::max);
    println!("count <= C log(1/lambda) + C with C = {c}");
    emit(cfg, "wvn_bargmann", &report::bargmann_table(&rows))?;
    Ok(Status::Passed)
}

fn wvn_lower_bound(cfg: &RunConfig, a: &LowerBoundArgs) -> Result<Status> {
    let pair = build_wvn(a.alpha, 10)?;
    let rows = (1..=a.max_n).map(|n| lower_bound_check(&pair, n)).collect::<Result<Vec<_>>>()?;
    for r in &rows {
        println!("n = {} m = {}: m * form = {} ({})", r.n, r.m, r.scaled(), if r.holds() { "holds" } else { "below 1" });
    }
    emit(cfg, "wvn_lower_bound", &report::lower_bound_table(&rows))?;
    Ok(Status::from_check(rows.iter().all(|r| r.holds())))
}

fn wvn_inequality(cfg: &RunConfig, a: &InequalityArgs) -> Result<Status> {
    let pair = build_wvn(a.alpha, a.window)?;
    let set = comparison_potentials(&pair)?;
    let probes = standard_probes(a.window + 1, a.probes, a.seed);
    let r = operator_inequality_check(&pair, &set, a.window as i64, &probes)?;
    println!("bottom eigenvalues: plus {}, minus {}", r.plus_bottom, r.minus_bottom);
    println!("probe minima: plus {}, minus {}", r.plus_probe_min, r.minus_probe_min);
    let mut t = Table::new(&["difference", "bottom_eigenvalue", "probe_minimum", "probes"]);
    t.push(vec!["plus".into(), r.plus_bottom.into(), r.plus_probe_min.into(), r.probes.into()])?;
    t.push(vec!["minus".into(), r.minus_bottom.into(), r.minus_probe_min.into(), r.probes.into()])?;
    emit(cfg, "wvn_inequality", &t)?;
    Ok(Status::from_check(r.holds(a.tol)))
}

fn potential(a: &PotentialArgs) -> Result<Potential<f64>> {
    if let Some(path) = &a.potential_file {
        let v = Potential::from_text(&fs::read_to_string(path)?)?;
        if v.lattice() != Lattice::HalfLine {
            return Err(bad_input("the transfer recursion runs on the half-line"));
        }
        return Ok(v);
    }
    match a.potential {
        PotentialKind::Free => Ok(Potential::zero(Lattice::HalfLine)),
        PotentialKind::Wvn => {
            // validates alpha
            build_wvn(a.alpha, 0)?;
            Potential::new(Lattice::HalfLine, 0, vec![], Tail::Wvn { alpha: a.alpha })
        }
    }
}

fn transfer(cfg: &RunConfig, a: &TransferArgs) -> Result<Status> {
    let v = potential(&a.potential)?;
    let t = transfer_solve(&v, a.energy, a.theta, a.sites)?;
    println!(
        "E = {} theta = {}: R({}) = {}, max R/n^2 = {}, {} rescalings",
        a.energy,
        a.theta,
        a.sites,
        t.envelope(a.sites),
        t.power_constant(2.0),
        t.rescales.len()
    );
    emit(cfg, "transfer", &report::envelope_table(&t))?;
    Ok(Status::Passed)
}

fn envelope(cfg: &RunConfig, a: &EnvelopeArgs) -> Result<Status> {
    let v = potential(&a.potential)?;
    let thetas = if a.thetas.is_empty() { (0..5).map(|k| k as f64 * PI / 8.0).collect() } else { a.thetas.clone() };
    if !(a.energy.abs() > 0.0 && a.energy.abs() < 2.0) {
        println!("note: E = {} is outside 0 < |E| < 2, where no envelope exponent is claimed", a.energy);
    }
    let fits = envelope_sweep(&v, a.energy, &thetas, a.sites, (a.start, a.sites))?;
    let upper = fits.iter().map(|(_, f)| f.upper_slope).fold(f64::NEG_INFINITY, f64::max);
    let lower = fits.iter().map(|(_, f)| f.lower_slope).fold(f64::INFINITY, f64::min);
    println!("slopes of R over the sweep: upper <= {upper}, lower >= {lower}");
    emit(cfg, "envelope", &report::envelope_fit_table(&fits))?;
    // R grows like n^(2η); only the sanity bound η < 2 is enforced
    Ok(Status::from_check(upper < 4.0 && lower > -4.0))
}

fn identity_poln(cfg: &RunConfig, a: &PolnArgs) -> Result<Status> {
    let worst = acceptance::polarization_sweep(a.seed, a.trials)?;
    println!("{} instances, max relative error {worst:e}", a.trials);
    let mut t = Table::new(&["seed", "trials", "max_relative_error"]);
    t.push(vec![(a.seed as i64).into(), a.trials.into(), worst.into()])?;
    emit(cfg, "identity_poln", &t)?;
    Ok(Status::from_check(worst <= a.tol))
}

fn model(a: &ModelArgs) -> Result<GroundStateModel<f64>> {
    Ok(match a.model {
        ModelKind::Free1d => GroundStateModel::free_1d(),
        ModelKind::Free2d => GroundStateModel::free_2d(),
        ModelKind::Lattice1d => GroundStateModel::random_lattice_1d(a.half_width, a.seed)?,
        ModelKind::Lattice2d => GroundStateModel::random_lattice_2d(a.half_width, a.seed)?,
        ModelKind::Gaussian => GroundStateModel::gaussian(),
        ModelKind::Constant => GroundStateModel::continuum_constant(),
        ModelKind::LinearGrowth => GroundStateModel::continuum_linear_growth(),
    })
}

fn profile(model: &GroundStateModel<f64>, kind: CutoffArg, m: f64, n: f64) -> Result<CutoffProfile<f64>> {
    match kind {
        CutoffArg::Linear => CutoffProfile::linear(m, n),
        CutoffArg::Log => CutoffProfile::log_2d(m, n),
        CutoffArg::Adapted => CutoffProfile::adapted(model, m, n),
    }
}

fn cutoff_kind(kind: CutoffArg) -> CutoffKind {
    match kind {
        CutoffArg::Linear => CutoffKind::Linear1d,
        CutoffArg::Log => CutoffKind::Log2d,
        CutoffArg::Adapted => CutoffKind::Adapted1d,
    }
}

fn identity_ground_state(cfg: &RunConfig, a: &GroundStateArgs) -> Result<Status> {
    let model = model(&a.model)?;
    let p = profile(&model, a.cutoff, a.m, a.n)?;
    let (form, edges) = ground_state_identity(&model, &p)?;
    let err = (form - edges).abs() / edges.abs().max(1.0);
    let tol = if model.domain().is_discrete() { 1e-10 } else { 1e-8 };
    println!("form {form}, edge sum {edges}, relative error {err:e} (tolerance {tol:e})");
    let mut t = Table::new(&["model", "cutoff", "M", "N", "form", "edge_sum", "relative_error"]);
    t.push(vec![
        model.domain().name().into(),
        p.kind().name().into(),
        a.m.into(),
        a.n.into(),
        form.into(),
        edges.into(),
        err.into(),
    ])?;
    emit(cfg, "identity_ground_state", &t)?;
    Ok(Status::from_check(err <= tol))
}

fn cutoff_energy_cmd(cfg: &RunConfig, a: &CutoffEnergyArgs) -> Result<Status> {
    let model = model(&a.model)?;
    let p = profile(&model, a.cutoff, a.m, a.n)?;
    let energy = cutoff_energy(&model, &p)?;
    let formula = match a.cutoff {
        CutoffArg::Adapted => adapted_energy_formula(&model, a.m, a.n)?,
        _ => f64::NAN,
    };
    println!("{} cutoff, M = {}, N = {}: energy {energy}", p.kind().name(), a.m, a.n);
    if formula.is_finite() {
        println!("closed-form adapted energy {formula}");
    }
    let mut t = Table::new(&["model", "cutoff", "M", "N", "energy", "adapted_formula"]);
    t.push(vec![
        model.domain().name().into(),
        p.kind().name().into(),
        a.m.into(),
        a.n.into(),
        energy.into(),
        formula.into(),
    ])?;
    emit(cfg, "cutoff_energy", &t)?;
    Ok(Status::Passed)
}

fn parse_value(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| bad_input(format!("bad perturbation value `{s}`")))
}

fn parse_site(s: &str) -> Result<i64> {
    s.trim().parse::<i64>().map_err(|_| bad_input(format!("bad site `{s}`")))
}

/// `site:value` entries; 2D sites are `x,y` and entries are separated by `;`.
pub fn parse_perturbation(text: &str, two_d: bool) -> Result<Perturbation<f64>> {
    let seps: &[char] = if two_d { &[';'] } else { &[';', ','] };
    let entries = text.split(seps).map(str::trim).filter(|e| !e.is_empty());
    let split = |e: &str| -> Result<(String, f64)> {
        let (site, value) =
            e.split_once(':').ok_or_else(|| bad_input(format!("expected `site:value`, got `{e}`")))?;
        Ok((site.to_string(), parse_value(value)?))
    };
    if two_d {
        let mut out = Vec::new();
        for e in entries {
            let (site, value) = split(e)?;
            let (x, y) = site.split_once(',').ok_or_else(|| bad_input(format!("2D sites are `x,y`, got `{site}`")))?;
            out.push(([parse_site(x)?, parse_site(y)?], value));
        }
        Ok(Perturbation::Lattice2d(out))
    } else {
        let mut out = Vec::new();
        for e in entries {
            let (site, value) = split(e)?;
            out.push((parse_site(&site)?, value));
        }
        Ok(Perturbation::Lattice1d(out))
    }
}

fn criticality(cfg: &RunConfig, a: &CriticalityArgs) -> Result<Status> {
    let model = match a.model {
        ModelKind::Free1d => GroundStateModel::free_1d(),
        ModelKind::Free2d => GroundStateModel::free_2d(),
        ModelKind::Lattice1d => GroundStateModel::random_lattice_1d(a.half_width, a.seed)?,
        ModelKind::Lattice2d => GroundStateModel::random_lattice_2d(a.half_width, a.seed)?,
        other => {
            return Err(bad_input(format!("criticality runs on lattice models; {other:?} is a line model")));
        }
    };
    let two_d = matches!(a.model, ModelKind::Free2d | ModelKind::Lattice2d);
    let v = parse_perturbation(&a.v, two_d)?;
    let params = SearchParams {
        support_radius: a.support_radius,
        n_cap: a.n_cap,
        cutoff: a.cutoff.map(cutoff_kind),
        oracle: !a.no_oracle,
    };
    let format: Format = cfg.format.into();
    let outcome = criticality_certificate(&model, &v, &params)?;
    let found = match &outcome {
        Outcome::Found(c) => {
            println!(
                "certificate: {} has an eigenvalue beyond E0 (epsilon {}, M {}, N {}, form total {})",
                c.sign.name(),
                c.epsilon,
                c.m,
                c.n,
                c.form_total
            );
            if let Some(e) = c.oracle_eigenvalue {
                println!("oracle eigenvalue {e}");
            }
            let text = match format {
                Format::Json => c.to_json() + "\n",
                Format::Csv => {
                    let mut t = Table::new(&[
                        "sign",
                        "epsilon",
                        "M",
                        "N",
                        "pairing",
                        "form_total",
                        "oracle_eigenvalue",
                        "cutoff_kind",
                    ]);
                    t.push(vec![
                        c.sign.name().into(),
                        c.epsilon.into(),
                        c.m.into(),
                        c.n.into(),
                        c.pairing.into(),
                        c.form_total.into(),
                        c.oracle_eigenvalue.unwrap_or(f64::NAN).into(),
                        c.cutoff.kind().name().into(),
                    ])?;
                    t.to_csv()
                }
            };
            emit_text(cfg, "criticality", format, &text)?;
            c.oracle_confirms(&model) != Some(false)
        }
        Outcome::NotFound(nf) => {
            println!("no certificate: {}", nf.reason);
            let value = json!({
                "outcome": "not_found",
                "reason": nf.reason,
                "last_N": nf.last_n,
                "cutoff_energy": nf.cutoff_energy,
            });
            let text = match format {
                Format::Json => pretty(&value),
                Format::Csv => {
                    let mut t = Table::new(&["outcome", "reason", "last_N", "cutoff_energy"]);
                    t.push(vec![
                        "not_found".into(),
                        nf.reason.clone().into(),
                        nf.last_n.unwrap_or(f64::NAN).into(),
                        nf.cutoff_energy.unwrap_or(f64::NAN).into(),
                    ])?;
                    t.to_csv()
                }
            };
            emit_text(cfg, "criticality", format, &text)?;
            false
        }
    };
    Ok(Status::from_check(found == (a.expect == Expectation::Found)))
}

fn eigen_check(cfg: &RunConfig, a: &EigenCheckArgs) -> Result<Status> {
    let worst = acceptance::oracle_agreement(a.seed, a.systems, a.max_size)?;
    println!("{} systems up to size {}: max |bisection - dense| = {worst:e}", a.systems, a.max_size);
    let mut t = Table::new(&["seed", "systems", "max_size", "max_abs_error"]);
    t.push(vec![(a.seed as i64).into(), a.systems.into(), a.max_size.into(), worst.into()])?;
    emit(cfg, "eigen_check", &t)?;
    Ok(Status::from_check(worst <= a.tol))
}

fn acceptance_cmd(cfg: &RunConfig, a: &AcceptanceArgs) -> Result<Status> {
    let ids: Vec<u8> = match a.criterion {
        Some(id) => vec![id],
        None => CRITERIA.iter().map(|c| c.0).collect(),
    };
    let mut reports = Vec::new();
    for id in ids {
        let r = acceptance::run(id)?;
        println!("{}", r.line());
        reports.push(r);
    }
    let format: Format = cfg.format.into();
    let text = match format {
        Format::Json => pretty(&json!(reports.iter().map(|r| r.to_json()).collect::<Vec<_>>())),
        Format::Csv => {
            let mut t = Table::new(&["criterion", "title", "checks_passed", "summary"]);
            for r in &reports {
                t.push(vec![(r.id as i64).into(), r.title.into(), r.checks_passed.into(), r.summary.clone().into()])?;
            }
            t.to_csv()
        }
    };
    let name = match a.criterion {
        Some(id) => format!("acceptance_{id}"),
        None => "acceptance".to_string(),
    };
    emit_text(cfg, &name, format, &text)?;
    Ok(Status::from_check(reports.iter().all(|r| r.passed)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbation_parsing() {
        let Perturbation::Lattice1d(v) = parse_perturbation("0:1, 3:-0.5", false).unwrap() else { panic!() };
        assert_eq!(v, vec![(0, 1.0), (3, -0.5)]);
        let Perturbation::Lattice2d(v) = parse_perturbation("0,0:1;1,-2:0.25", true).unwrap() else { panic!() };
        assert_eq!(v, vec![([0, 0], 1.0), ([1, -2], 0.25)]);
        let Perturbation::Lattice1d(v) = parse_perturbation("", false).unwrap() else { panic!() };
        assert!(v.is_empty());
        for bad in ["0", "a:1", "0:x"] {
            assert!(parse_perturbation(bad, false).err().unwrap().is_input_error(), "{bad}");
        }
        assert!(parse_perturbation("0:1", true).is_err());
    }
}
