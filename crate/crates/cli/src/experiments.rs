// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! The five named experiments.

use std::sync::Arc;

use oqs_core::bath::BathSpec;
use oqs_core::brownian::{
    extrapolate_inverse_square, fock_defect, BrownianLimit, FOCK_INVARIANCE_TOLERANCE,
};
use oqs_core::dissipators::{
    build_generator, channel_decompositions, relative_weight_expansion, splitting_variance,
    BathChannel, DecompositionParams, GeneratorKind, TimeDependentGenerator, Truncation,
};
use oqs_core::evolve::{
    average_over, propagate, steady_state, time_averaged_distance, trace_distance, uniform_grid,
    ChainObservables, InitialState, SimulationRecord, DENSE_LIMIT,
};
use oqs_core::exec::Execution;
use oqs_core::models::{
    build_fermion_basis, build_oscillator, diagonalize, hubbard_on, number_operator, FermionBasis,
    OscillatorModel, SpectrumDecomposition,
};
use oqs_core::trajectories::{ness_imbalance, NessSetup, TrajectoryConfig};
use oqs_core::OqsError;
use serde_json::{json, Value};

use crate::config::{positive, Axis, ChainConfig, Coupling, ExperimentConfig, Method};
use crate::output::{num, Table};

/// Largest chain for direct (density-matrix) solves.
pub const DIRECT_SITES: usize = 7;
/// Largest chain for error maps without `--full`.
pub const DESK_SITES: usize = 6;
const RTOL: f64 = 1e-8;
const ATOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl From<OqsError> for Failure {
    fn from(e: OqsError) -> Self {
        match e {
            OqsError::InvalidModel(_)
            | OqsError::InvalidParameter(_)
            | OqsError::FockTruncation { .. }
            | OqsError::DegenerateCutoff { .. } => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn config_err<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Config(msg.into()))
}

type Outcome = Result<Table, Failure>;

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub full: bool,
    pub seed: u64,
    pub exec: Execution,
}

fn axis(a: &Option<Axis>, default: Axis, name: &str) -> Result<Vec<f64>, Failure> {
    let v = a
        .as_ref()
        .unwrap_or(&default)
        .values()
        .map_err(|e| Failure::Config(format!("{name}: {e}")))?;
    for &x in &v {
        positive(name, x).map_err(Failure::Config)?;
    }
    Ok(v)
}

fn reject(present: bool, what: &str, command: &str) -> Result<(), Failure> {
    if present {
        config_err(format!("{what} is not used by {command}"))
    } else {
        Ok(())
    }
}

fn pos(name: &str, v: f64) -> Result<f64, Failure> {
    positive(name, v).map_err(Failure::Config)
}

struct Chain {
    basis: FermionBasis,
    spectrum: SpectrumDecomposition,
}

fn chain(model: &ChainConfig, sites: usize) -> Result<Chain, Failure> {
    let particles = model.particles.unwrap_or(sites / 2);
    if !model.hopping.is_finite() || !model.interaction.is_finite() {
        return config_err("hopping and interaction must be finite");
    }
    let basis = build_fermion_basis(sites, particles)?;
    let spectrum = diagonalize(&hubbard_on(&basis, model.hopping, model.interaction))?;
    Ok(Chain { basis, spectrum })
}

fn direct_limit(chain: &Chain) -> Result<(), Failure> {
    let n = chain.spectrum.dim().pow(2);
    if n > DENSE_LIMIT {
        return config_err(format!(
            "Liouvillian dimension {n} exceeds the dense limit {DENSE_LIMIT}"
        ));
    }
    Ok(())
}

fn site_channels(
    chain: &Chain,
    sites: &[usize],
    bath: BathSpec,
) -> Result<Vec<BathChannel>, Failure> {
    let corr = Arc::new(bath.correlation()?);
    sites
        .iter()
        .map(|&i| {
            let n = number_operator(i, &chain.basis)?;
            Ok(BathChannel::from_operator(
                &n,
                &chain.spectrum,
                corr.clone(),
                format!("n{i}"),
            )?)
        })
        .collect()
}

fn kind(m: Method) -> GeneratorKind {
    match m {
        Method::Redfield => GeneratorKind::Redfield,
        Method::Rwa => GeneratorKind::Rwa,
        Method::Pseudo => GeneratorKind::PseudoLindblad(Truncation::Optimal),
        Method::Truncated => GeneratorKind::Truncated(Truncation::Optimal),
        Method::TruncatedFixed => {
            GeneratorKind::Truncated(Truncation::Fixed(DecompositionParams::FIXED))
        }
    }
}

fn weight_ratio(
    channels: &[BathChannel],
    spectrum: &SpectrumDecomposition,
) -> Result<f64, Failure> {
    let decs = channel_decompositions(channels, spectrum, f64::INFINITY, Truncation::Optimal)?;
    let (wp, wm) = decs
        .iter()
        .fold((0.0, 0.0), |(p, m), d| (p + d.weights.0, m + d.weights.1));
    Ok(wm / wp)
}

fn transient(
    kind: GeneratorKind,
    channels: &[BathChannel],
    spectrum: &SpectrumDecomposition,
    initial: InitialState,
    grid: &[f64],
) -> Result<SimulationRecord, Failure> {
    let gen = TimeDependentGenerator::new(kind, channels.to_vec(), spectrum.clone())?;
    Ok(propagate(
        &gen,
        &initial.density(spectrum.dim()),
        grid,
        RTOL,
        ATOL,
    )?)
}

/// Steady-state and transient errors of the RWA and the truncated equation
/// over a `(T, γ)` grid.
pub fn errormap(cfg: &ExperimentConfig, opts: RunOptions) -> Outcome {
    reject(cfg.oscillator.is_some(), "oscillator", "errormap")?;
    reject(cfg.trajectories.is_some(), "trajectories", "errormap")?;
    reject(cfg.generators.is_some(), "generators", "errormap")?;
    reject(
        cfg.grid.sites.is_some() || cfg.grid.betas.is_some(),
        "grid.sites/grid.betas",
        "errormap",
    )?;
    reject(
        cfg.bath.gamma.is_some() || cfg.bath.temperature.is_some(),
        "bath.gamma/bath.temperature (use the grid)",
        "errormap",
    )?;
    let model = cfg.model.clone().unwrap_or_default();
    let sites = model.sites.unwrap_or(if opts.full { 8 } else { 5 });
    let mut table = Table::new(&[
        "temperature",
        "gamma",
        "d_rwa_ss",
        "d_trunc_ss",
        "d_rwa_transient",
        "d_trunc_transient",
        "w_ratio",
        "redfield_negative",
    ]);
    if sites > DESK_SITES {
        if !opts.full {
            return config_err(format!(
                "errormap with {sites} sites needs --full (desk limit {DESK_SITES})"
            ));
        }
        let msg = format!("errormap at l = {sites}: expect a long run");
        eprintln!("warning: {msg}");
        table.warnings.push(msg);
    }
    let chain = chain(&model, sites)?;
    direct_limit(&chain)?;
    let global = cfg.bath.coupling == Coupling::Global;
    let cutoff = pos(
        "bath.cutoff",
        cfg.bath.cutoff.unwrap_or(if global { 40.0 } else { 17.0 }),
    )?;
    let temps = axis(
        &cfg.grid.temperatures,
        Axis::range(0.5, 50.0, 12),
        "grid.temperatures",
    )?;
    let gammas = axis(&cfg.grid.gammas, Axis::range(0.01, 1.0, 12), "grid.gammas")?;
    let points = cfg.grid.points.unwrap_or(101).max(2);
    reject(
        cfg.grid.t_max.is_some(),
        "grid.t_max (the window is τ_R)",
        "errormap",
    )?;
    let coupled: Vec<usize> = if global {
        (1..=sites).collect()
    } else {
        vec![1]
    };
    let (initial, window) = if global {
        (InitialState::GroundExcitedSuperposition, 1.0)
    } else {
        (InitialState::GroundState, 2.0)
    };

    let cells: Vec<(f64, f64)> = temps
        .iter()
        .flat_map(|&t| gammas.iter().map(move |&g| (t, g)))
        .collect();
    let rows = opts
        .exec
        .map(cells.len(), |k| -> Result<Vec<String>, Failure> {
            let (t, g) = cells[k];
            let channels = site_channels(&chain, &coupled, BathSpec::new(g, cutoff, t))?;
            let ss = |m: Method| -> Result<_, Failure> {
                let gen = build_generator(kind(m), &channels, &chain.spectrum, f64::INFINITY)?;
                Ok(steady_state(gen.as_ref(), Execution::Sequential)?)
            };
            let red = ss(Method::Redfield)?;
            let rwa = ss(Method::Rwa)?;
            let tr = ss(Method::Truncated)?;
            let tau = window / g;
            let grid = uniform_grid(tau, points);
            let rec = |m| transient(kind(m), &channels, &chain.spectrum, initial, &grid);
            let red_t = rec(Method::Redfield)?;
            let d_rwa_t = time_averaged_distance(&rec(Method::Rwa)?, &red_t, tau)?;
            let d_tr_t = time_averaged_distance(&rec(Method::Truncated)?, &red_t, tau)?;
            Ok(vec![
                num(t),
                num(g),
                num(trace_distance(&rwa.rho, &red.rho)),
                num(trace_distance(&tr.rho, &red.rho)),
                num(d_rwa_t),
                num(d_tr_t),
                num(weight_ratio(&channels, &chain.spectrum)?),
                red.negative.to_string(),
            ])
        });
    for r in rows {
        table.push(r?);
    }
    table.summary.insert("sites".into(), json!(sites));
    table
        .summary
        .insert("particles".into(), json!(chain.basis.particles()));
    table.summary.insert("cutoff".into(), json!(cutoff));
    table.summary.insert(
        "coupling".into(),
        json!(if global { "global" } else { "local" }),
    );
    table
        .summary
        .insert("averaging_window".into(), json!(format!("{window}/gamma")));
    Ok(table)
}

/// Nonequilibrium particle imbalance between two baths at the chain ends.
pub fn imbalance(cfg: &ExperimentConfig, opts: RunOptions) -> Outcome {
    reject(cfg.oscillator.is_some(), "oscillator", "imbalance")?;
    reject(
        cfg.grid.temperatures.is_some() || cfg.grid.betas.is_some(),
        "grid.temperatures/grid.betas",
        "imbalance",
    )?;
    reject(
        cfg.bath.gamma.is_some() || cfg.bath.temperature.is_some(),
        "bath.gamma/bath.temperature",
        "imbalance",
    )?;
    reject(
        cfg.bath.coupling == Coupling::Global,
        "global coupling",
        "imbalance",
    )?;
    let model = cfg.model.clone().unwrap_or_default();
    reject(
        model.sites.is_some() || model.particles.is_some(),
        "model.sites/model.particles (use grid.sites)",
        "imbalance",
    )?;
    let sizes = cfg.grid.sites.clone().unwrap_or_else(|| vec![4, 5, 6]);
    let gammas = axis(
        &cfg.grid.gammas,
        Axis::List(vec![0.05, 0.1, 0.2, 0.4]),
        "grid.gammas",
    )?;
    let cutoff = pos("bath.cutoff", cfg.bath.cutoff.unwrap_or(17.0))?;
    let t_left = pos(
        "bath.temperature_left",
        cfg.bath.temperature_left.unwrap_or(7.0),
    )?;
    let t_right = pos(
        "bath.temperature_right",
        cfg.bath.temperature_right.unwrap_or(13.0),
    )?;
    let methods = cfg
        .generators
        .clone()
        .unwrap_or_else(|| vec![Method::Rwa, Method::Redfield, Method::Truncated]);
    if let Some(t) = &cfg.trajectories {
        if t.count < 2 {
            return config_err("trajectories.count must be at least 2");
        }
    }

    let mut table = Table::new(&["sites", "gamma", "method", "delta_n", "stderr"]);
    for &l in &sizes {
        if l < 2 {
            return config_err("chains need at least 2 sites");
        }
        let max_traj = cfg.trajectories.as_ref().map_or(0, |t| t.max_sites.min(10));
        if l > DIRECT_SITES && l > max_traj {
            return config_err(format!(
                "l = {l} exceeds the direct limit {DIRECT_SITES} and the trajectory limit"
            ));
        }
        let chain = chain(&model, l)?;
        let obs = ChainObservables::new(&chain.basis, &chain.spectrum)?;
        for &g in &gammas {
            let left = BathSpec::new(g, cutoff, t_left);
            let right = BathSpec::new(g, cutoff, t_right);
            if l <= DIRECT_SITES {
                let mut channels = site_channels(&chain, &[1], left)?;
                channels.extend(site_channels(&chain, &[l], right)?);
                for &m in &methods {
                    let gen = build_generator(kind(m), &channels, &chain.spectrum, f64::INFINITY)?;
                    let ss = steady_state(gen.as_ref(), opts.exec)?;
                    let dn = obs.evaluate(&ss.rho).imbalance;
                    table.push(vec![
                        l.to_string(),
                        num(g),
                        m.name().into(),
                        num(dn),
                        num(0.0),
                    ]);
                }
            }
            if let Some(t) = &cfg.trajectories {
                if l <= max_traj {
                    let setup = NessSetup {
                        sites: l,
                        particles: l / 2,
                        hopping: model.hopping,
                        interaction: model.interaction,
                        left,
                        right,
                    };
                    let tc = TrajectoryConfig::for_coupling(g, t.count, opts.seed);
                    let est = ness_imbalance(&setup, &tc, opts.exec)?;
                    let (mean, err) = (est.mean("imbalance"), est.stderr("imbalance"));
                    table.push(vec![
                        l.to_string(),
                        num(g),
                        "truncated-trajectories".into(),
                        num(mean.unwrap_or(f64::NAN)),
                        num(err.unwrap_or(f64::NAN)),
                    ]);
                }
            }
        }
    }
    table
        .summary
        .insert("temperature_left".into(), json!(t_left));
    table
        .summary
        .insert("temperature_right".into(), json!(t_right));
    table.summary.insert("cutoff".into(), json!(cutoff));
    Ok(table)
}

/// Transient with optimal and fixed `λ²` against Redfield and the RWA.
pub fn optim_compare(cfg: &ExperimentConfig, _opts: RunOptions) -> Outcome {
    reject(cfg.oscillator.is_some(), "oscillator", "optim_compare")?;
    reject(cfg.trajectories.is_some(), "trajectories", "optim_compare")?;
    reject(
        cfg.grid.temperatures.is_some()
            || cfg.grid.gammas.is_some()
            || cfg.grid.betas.is_some()
            || cfg.grid.sites.is_some(),
        "grid axes",
        "optim_compare",
    )?;
    let model = cfg.model.clone().unwrap_or_default();
    let sites = model.sites.unwrap_or(5);
    if sites > DIRECT_SITES {
        return config_err(format!("optim_compare is limited to {DIRECT_SITES} sites"));
    }
    let chain = chain(&model, sites)?;
    if chain.spectrum.dim() < 2 {
        return config_err("optim_compare needs at least two eigenstates");
    }
    let gamma = pos("bath.gamma", cfg.bath.gamma.unwrap_or(0.2))?;
    let temperature = pos("bath.temperature", cfg.bath.temperature.unwrap_or(2.0))?;
    let cutoff = pos("bath.cutoff", cfg.bath.cutoff.unwrap_or(17.0))?;
    let coupled: Vec<usize> = match cfg.bath.coupling {
        Coupling::Local => vec![1],
        Coupling::Global => (1..=sites).collect(),
    };
    let channels = site_channels(&chain, &coupled, BathSpec::new(gamma, cutoff, temperature))?;
    let t_max = pos("grid.t_max", cfg.grid.t_max.unwrap_or(2.0 / gamma))?;
    let grid = uniform_grid(t_max, cfg.grid.points.unwrap_or(201).max(2));
    let mut methods = cfg.generators.clone().unwrap_or_else(|| {
        vec![
            Method::Redfield,
            Method::Truncated,
            Method::TruncatedFixed,
            Method::Rwa,
        ]
    });
    methods.retain(|&m| m != Method::Redfield);
    methods.insert(0, Method::Redfield);

    let records = methods
        .iter()
        .map(|&m| {
            transient(
                kind(m),
                &channels,
                &chain.spectrum,
                InitialState::GroundState,
                &grid,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut columns = vec!["time".to_string()];
    for m in &methods {
        for c in ["p0", "p1", "coherence", "distance"] {
            columns.push(format!("{}_{c}", m.name()));
        }
    }
    let mut table = Table {
        columns,
        ..Default::default()
    };
    let reference = &records[0];
    for (k, &t) in grid.iter().enumerate() {
        let mut row = vec![num(t)];
        for rec in &records {
            let rho = &rec.states[k];
            row.push(num(rho[(0, 0)].re));
            row.push(num(rho[(1, 1)].re));
            row.push(num(rho[(0, 1)].norm()));
            row.push(num(trace_distance(rho, &reference.states[k])));
        }
        table.push(row);
    }
    let mut averaged = serde_json::Map::new();
    for (m, rec) in methods.iter().zip(&records).skip(1) {
        let d = rec.distances(reference)?;
        averaged.insert(m.name().into(), json!(average_over(&grid, &d, t_max)?));
    }
    table
        .summary
        .insert("time_averaged_distance".into(), Value::Object(averaged));
    let fixed = channel_decompositions(
        &channels,
        &chain.spectrum,
        f64::INFINITY,
        Truncation::Fixed(DecompositionParams::FIXED),
    )?;
    let optimal = channel_decompositions(
        &channels,
        &chain.spectrum,
        f64::INFINITY,
        Truncation::Optimal,
    )?;
    let wm = |d: &[oqs_core::dissipators::ChannelDecomposition]| {
        d.iter().map(|c| c.weights.1).sum::<f64>()
    };
    table
        .summary
        .insert("negative_weight_fixed".into(), json!(wm(&fixed)));
    table
        .summary
        .insert("negative_weight_optimal".into(), json!(wm(&optimal)));
    Ok(table)
}

/// High-temperature limit of the damped harmonic oscillator.
pub fn brownian(cfg: &ExperimentConfig, _opts: RunOptions) -> Outcome {
    reject(cfg.model.is_some(), "model", "brownian")?;
    reject(
        cfg.trajectories.is_some() || cfg.generators.is_some(),
        "trajectories/generators",
        "brownian",
    )?;
    reject(
        cfg.grid.gammas.is_some() || cfg.grid.betas.is_some() || cfg.grid.sites.is_some(),
        "grid.gammas/betas/sites",
        "brownian",
    )?;
    reject(
        cfg.bath.temperature.is_some(),
        "bath.temperature (use grid.temperatures)",
        "brownian",
    )?;
    let osc_cfg = cfg.oscillator.clone().unwrap_or_default();
    let (mass, omega) = (
        pos("oscillator.mass", osc_cfg.mass)?,
        pos("oscillator.omega", osc_cfg.omega)?,
    );
    let gamma = pos("bath.gamma", cfg.bath.gamma.unwrap_or(0.1))?;
    let cutoff = pos("bath.cutoff", cfg.bath.cutoff.unwrap_or(100.0 * omega))?;
    let temps = axis(
        &cfg.grid.temperatures,
        Axis::List(vec![5.0, 10.0, 20.0, 50.0]),
        "grid.temperatures",
    )?;
    let t_top = temps.iter().cloned().fold(0.0, f64::max);
    let levels = osc_cfg
        .levels
        .unwrap_or_else(|| OscillatorModel::required_levels(omega, t_top));
    let limit = BrownianLimit::new(build_oscillator(mass, omega, levels)?)?;

    let mut table = Table::new(&[
        "temperature",
        "lambda_ratio",
        "phi",
        "chi",
        "ratio_re",
        "ratio_im",
        "asymptotic_ratio",
        "ratio_agreement",
        "weight_ratio",
    ]);
    for &t in &temps {
        let p = limit.point(BathSpec::new(gamma, cutoff, t))?;
        table.push(vec![
            num(t),
            num(p.lambda_ratio),
            num(p.phi),
            num(p.chi),
            num(p.coefficient_ratio.re),
            num(p.coefficient_ratio.im),
            num(p.asymptotic_ratio),
            num(p.ratio_agreement),
            num(p.weight_ratio),
        ]);
    }
    let [t1, t2] = cfg
        .grid
        .extrapolation
        .unwrap_or([200.0 * omega, 400.0 * omega]);
    let (t1, t2) = (
        pos("grid.extrapolation", t1)?,
        pos("grid.extrapolation", t2)?,
    );
    if t1 == t2 {
        return config_err("grid.extrapolation needs two distinct temperatures");
    }
    // a linear coupling gives the same decomposition for any Fock size
    let small = BrownianLimit::new(build_oscillator(mass, omega, 64)?)?;
    let (b1, b2) = (
        BathSpec::new(gamma, cutoff, t1),
        BathSpec::new(gamma, cutoff, t2),
    );
    let defect = fock_defect(&small, b1)?.max(fock_defect(&small, b2)?);
    if defect > FOCK_INVARIANCE_TOLERANCE {
        return Err(Failure::Numerical(format!(
            "decomposition depends on the Fock size (defect {defect:e})"
        )));
    }
    let (p1, p2) = (small.point_unresolved(b1)?, small.point_unresolved(b2)?);
    table.summary.insert("levels".into(), json!(levels));
    table
        .summary
        .insert("extrapolation_temperatures".into(), json!([t1, t2]));
    table.summary.insert("fock_defect".into(), json!(defect));
    table.summary.insert(
        "ratio_agreement_extrapolated".into(),
        json!(extrapolate_inverse_square(
            t1,
            p1.ratio_agreement,
            t2,
            p2.ratio_agreement
        )),
    );
    table.summary.insert(
        "lambda_ratio_extrapolated".into(),
        json!(extrapolate_inverse_square(
            t1,
            p1.lambda_ratio,
            t2,
            p2.lambda_ratio
        )),
    );
    Ok(table)
}

/// Exact weights against the high-temperature expansion over a `β` grid.
pub fn weights(cfg: &ExperimentConfig, _opts: RunOptions) -> Outcome {
    reject(
        cfg.trajectories.is_some() || cfg.generators.is_some(),
        "trajectories/generators",
        "weights",
    )?;
    reject(
        cfg.grid.gammas.is_some() || cfg.grid.sites.is_some() || cfg.grid.temperatures.is_some(),
        "grid.gammas/sites/temperatures (use grid.betas)",
        "weights",
    )?;
    reject(
        cfg.bath.temperature.is_some(),
        "bath.temperature (use grid.betas)",
        "weights",
    )?;
    reject(
        cfg.bath.coupling == Coupling::Global,
        "global coupling (weights needs a single channel)",
        "weights",
    )?;
    if cfg.model.is_some() && cfg.oscillator.is_some() {
        return config_err("give either model or oscillator, not both");
    }
    let gamma = pos("bath.gamma", cfg.bath.gamma.unwrap_or(0.1))?;
    let betas = axis(&cfg.grid.betas, Axis::range(1e-3, 1e-1, 12), "grid.betas")?;
    let (spectrum, op, cutoff) = match &cfg.oscillator {
        Some(o) => {
            let osc = build_oscillator(
                pos("oscillator.mass", o.mass)?,
                pos("oscillator.omega", o.omega)?,
                o.levels.unwrap_or(40),
            )?;
            let spectrum = diagonalize(&osc.hamiltonian())?;
            let cutoff = cfg.bath.cutoff.unwrap_or(100.0 * o.omega);
            (spectrum, osc.coupling(), cutoff)
        }
        None => {
            let model = cfg.model.clone().unwrap_or_default();
            let c = chain(&model, model.sites.unwrap_or(5))?;
            let op = number_operator(1, &c.basis)?;
            (c.spectrum, op, cfg.bath.cutoff.unwrap_or(17.0))
        }
    };
    let cutoff = pos("bath.cutoff", cutoff)?;
    let mut table = Table::new(&["beta", "w_plus", "w_minus", "ratio", "expansion"]);
    let mut variance = None;
    for &beta in &betas {
        let corr = BathSpec::new(gamma, cutoff, 1.0 / beta).correlation()?;
        let ch = BathChannel::from_operator(&op, &spectrum, Arc::new(corr), "s")?;
        let v = *variance.get_or_insert_with(|| splitting_variance(ch.op(), &spectrum));
        let (wp, wm) =
            channel_decompositions(&[ch], &spectrum, f64::INFINITY, Truncation::Optimal)?[0]
                .weights;
        let expansion = relative_weight_expansion(beta, cutoff, v)?;
        table.push(vec![
            num(beta),
            num(wp),
            num(wm),
            num(wm / wp),
            num(expansion),
        ]);
    }
    table
        .summary
        .insert("splitting_variance".into(), json!(variance));
    table.summary.insert("cutoff".into(), json!(cutoff));
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse;

    fn opts() -> RunOptions {
        RunOptions {
            full: false,
            seed: 0,
            exec: Execution::Sequential,
        }
    }

    #[test]
    fn error_classes() {
        assert!(matches!(
            Failure::from(OqsError::InvalidParameter("x".into())),
            Failure::Config(_)
        ));
        assert!(matches!(
            Failure::from(OqsError::Stiffness { t: 1.0 }),
            Failure::Numerical(_)
        ));
        assert!(matches!(
            Failure::from(OqsError::DegenerateSteadyState("x".into())),
            Failure::Numerical(_)
        ));
    }

    #[test]
    fn errormap_needs_full_for_large_chains() {
        let cfg = parse(r#"{"experiment": "e", "model": {"sites": 8}}"#).unwrap();
        assert!(matches!(errormap(&cfg, opts()), Err(Failure::Config(_))));
    }

    #[test]
    fn weights_shrink_with_beta() {
        let cfg = parse(
            r#"{"experiment": "w", "model": {"sites": 3}, "grid": {"betas": [0.01, 0.005]}}"#,
        )
        .unwrap();
        let t = weights(&cfg, opts()).unwrap();
        let ratio: Vec<f64> = t.rows.iter().map(|r| r[3].parse().unwrap()).collect();
        assert!(ratio[1] < ratio[0]);
    }

    #[test]
    fn irrelevant_blocks_rejected() {
        let cfg = parse(r#"{"experiment": "w", "oscillator": {}}"#).unwrap();
        assert!(matches!(errormap(&cfg, opts()), Err(Failure::Config(_))));
        let cfg = parse(r#"{"experiment": "w", "model": {"sites": 4}}"#).unwrap();
        assert!(matches!(brownian(&cfg, opts()), Err(Failure::Config(_))));
    }

    #[test]
    fn insufficient_fock_space_is_a_config_error() {
        let cfg = parse(
            r#"{"experiment": "b", "oscillator": {"levels": 10}, "grid": {"temperatures": [50]}}"#,
        )
        .unwrap();
        assert!(matches!(brownian(&cfg, opts()), Err(Failure::Config(_))));
    }
}
