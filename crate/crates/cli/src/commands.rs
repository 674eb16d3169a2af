//! The four scenario commands. Each returns rendered tables; nothing here touches the filesystem.

use dce_core::dressed_me::{build_liouvillian_with, dressed_jump_sets};
use dce_core::evolve::{
    default_tau_max, emission_spectrum, linspace, propagate_with, qrt_correlation_decayed, steady_state, uniform_grid,
    Propagator,
};
use dce_core::model::{
    level_sweep, locate_avoided_crossing, locate_resonance, perturbative_splitting, solve, RESONANCE_PAIR,
};
use dce_core::observables::{ModeObservables, G2_POPULATION_FLOOR};
use dce_core::{DensityMatrix, SystemParams};
use rayon::prelude::*;

use crate::config::{InitialState, Scenario, ScenarioConfig};
use crate::error::CliResult;
use crate::table::{Cell, Table};

/// Output of one command: the main table and, for `levels`, the crossing summary.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub main: Table,
    pub crossings: Option<Table>,
}

pub fn run(cfg: &ScenarioConfig) -> CliResult<CommandOutput> {
    match cfg.scenario {
        Scenario::Levels => levels(cfg),
        Scenario::Dynamics => dynamics(cfg).map(|main| CommandOutput { main, crossings: None }),
        Scenario::Spectrum => spectrum(cfg).map(|main| CommandOutput { main, crossings: None }),
        Scenario::Splitting => splitting(cfg).map(|main| CommandOutput { main, crossings: None }),
    }
}

fn describe(t: &mut Table, command: &str, p: &SystemParams) {
    t.meta("command", command)
        .meta("omega_m", p.omega_m)
        .meta("omega_c", p.omega_c)
        .meta("g", p.g)
        .meta("eta", p.eta())
        .meta("kappa", p.kappa)
        .meta("gamma", p.gamma)
        .meta("t_kappa", p.t_kappa)
        .meta("t_gamma", p.t_gamma)
        .meta("truncation", p.dims)
        .meta("include_dce", p.include_dce);
}

fn describe_generator(t: &mut Table, cfg: &ScenarioConfig, p: &SystemParams) {
    let o = cfg.liouvillian_options(p);
    t.meta("pairs", format!("{:?}", o.pairs))
        .meta("bin_tolerance", o.dressing.bin_tol)
        .meta("omega_min", o.dressing.omega_min);
}

pub fn levels(cfg: &ScenarioConfig) -> CliResult<CommandOutput> {
    let w = &cfg.sweep;
    let p = cfg.params_at(cfg.system.omega_m)?;
    let grid = linspace(w.omega_c_min, w.omega_c_max, w.points);
    let sweep = level_sweep(&p, &grid, w.levels + 1, true)?;

    let mut header = vec!["omega_c_over_omega_m".to_string()];
    header.extend((1..=w.levels).map(|l| format!("E{l}_over_omega_m")));
    let mut main = Table::new(header);
    describe(&mut main, "levels", &p);
    main.meta("sweep_points", w.points).meta("reference", "ground level subtracted");
    for (x, row) in grid.iter().zip(&sweep.levels) {
        let mut cells = vec![Cell::Num(*x)];
        cells.extend(row[1..].iter().map(|e| Cell::Num(*e)));
        main.push(cells);
    }

    let mut crossings = Table::new(["lower_level", "upper_level", "omega_r_over_omega_m", "gap_min_over_omega_m"]);
    describe(&mut crossings, "levels", &p);
    for pair in &w.tracked_pairs {
        let pair = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        let best = (0..grid.len()).min_by(|&i, &j| sweep.gap(i, pair).total_cmp(&sweep.gap(j, pair))).unwrap_or(0);
        // a minimum on the grid edge has no bracket; it is reported as undefined
        let record = if best == 0 || best + 1 == grid.len() {
            None
        } else {
            locate_avoided_crossing(&p, pair, grid[best - 1], grid[best + 1], 1e-10).ok()
        };
        let (x, gap) = record.map_or((f64::NAN, f64::NAN), |r| (r.omega_r, r.gap_min / p.omega_m));
        crossings.push(vec![Cell::Int(pair.0), Cell::Int(pair.1), Cell::Num(x), Cell::Num(gap)]);
        main.meta(&format!("crossing_{}_{}", pair.0, pair.1), format!("omega_r = {x}, gap = {gap}"));
    }
    Ok(CommandOutput { main, crossings: Some(crossings) })
}

fn initial_state(cfg: &ScenarioConfig, p: &SystemParams, eig: &dce_core::EigenSystem) -> CliResult<DensityMatrix> {
    let t = cfg.dynamics.initial_temperature.unwrap_or(p.t_kappa);
    Ok(match cfg.dynamics.initial_state {
        InitialState::Ground => DensityMatrix::ground(eig),
        InitialState::Gibbs => DensityMatrix::gibbs(eig, t)?,
        InitialState::ProductThermal => DensityMatrix::product_thermal(p, t, t)?,
    })
}

pub fn dynamics(cfg: &ScenarioConfig) -> CliResult<Table> {
    let (p, omega_r) = cfg.resolve()?;
    let eig = solve(&p)?;
    let opts = cfg.liouvillian_options(&p);
    let l = build_liouvillian_with(&eig, &p, opts)?;
    let (cav, mech) = dressed_jump_sets(&eig, &p, opts.dressing)?;
    let (photon, phonon) = (ModeObservables::dressed(&cav), ModeObservables::dressed(&mech));
    let rho0 = initial_state(cfg, &p, &eig)?;
    let times = uniform_grid(cfg.dynamics.t_max, cfg.dynamics.dt)?;

    let mut t = Table::new(["t_times_omega_m", "mean_photons", "mean_phonons", "g2_photon", "g2_phonon", "trace_error", "min_eig"]);
    describe(&mut t, "dynamics", &p);
    describe_generator(&mut t, cfg, &p);
    if let Some(r) = omega_r {
        t.meta("omega_r", r);
    }
    t.meta("initial_state", format!("{:?}", cfg.dynamics.initial_state))
        .meta("positivity_tolerance", cfg.dynamics.positivity_tolerance)
        .meta("trace_tolerance", cfg.dynamics.trace_tolerance);
    let mut rows = Vec::with_capacity(times.len());
    let summary = propagate_with(&Propagator::new(&l), &rho0, &times, cfg.propagation_options(), |f| {
        let g2 = |m: &ModeObservables| m.g2(&f.state, G2_POPULATION_FLOOR).unwrap_or(f64::NAN);
        rows.push(vec![
            Cell::Num(f.time * p.omega_m),
            Cell::Num(photon.population(&f.state)),
            Cell::Num(phonon.population(&f.state)),
            Cell::Num(g2(&photon)),
            Cell::Num(g2(&phonon)),
            Cell::Num(f.trace_error),
            Cell::Num(f.min_eigenvalue),
        ]);
    })?;
    t.meta("min_eigenvalue", summary.min_eigenvalue)
        .meta("max_trace_error", summary.max_trace_error)
        .meta("max_guard_population", summary.max_guard_population)
        .meta("truncation_flag", summary.truncation_flag);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn spectrum(cfg: &ScenarioConfig) -> CliResult<Table> {
    let (p, located) = cfg.resolve()?;
    // metadata only; truncations too small to resolve the crossing report nan
    let omega_r = located.unwrap_or_else(|| locate_resonance(&p).map_or(f64::NAN, |r| r.omega_r));
    let s = &cfg.spectrum;
    let eig = solve(&p)?;
    let opts = cfg.liouvillian_options(&p);
    let l = build_liouvillian_with(&eig, &p, opts)?;
    let ss = steady_state(&l)?;
    let (cav, _) = dressed_jump_sets(&eig, &p, opts.dressing)?;
    let tau_max = s.tau_max.unwrap_or_else(|| default_tau_max(p.gamma_tot()));
    let cap = tau_max * 2f64.powi(s.max_window_doublings as i32);
    let corr = qrt_correlation_decayed(&Propagator::new(&l), &ss, &cav, s.tau_step, tau_max, cap * (1.0 + 1e-12))?;
    let omegas = linspace(s.omega_min * p.omega_m, s.omega_max * p.omega_m, s.points);
    let spec = emission_spectrum(&corr, &omegas)?;
    let spec = if s.normalize { spec.normalized() } else { spec };

    let mut t = Table::new(["omega_over_omega_m", if s.normalize { "S_normalized" } else { "S_arb_units" }]);
    describe(&mut t, "spectrum", &p);
    describe_generator(&mut t, cfg, &p);
    t.meta("gamma_tot", p.gamma_tot())
        .meta("omega_r", omega_r)
        .meta("detuning", p.omega_c / p.omega_m - omega_r)
        .meta("tau_max", corr.taus.last().copied().unwrap_or(0.0))
        .meta("tau_step", s.tau_step)
        .meta("decay_ratio", corr.decay_ratio())
        .meta("steady_state_mean_photons", ModeObservables::dressed(&cav).population(&ss));
    for (w, v) in spec.omegas.iter().zip(&spec.values) {
        t.push(vec![Cell::Num(w / p.omega_m), Cell::Num(*v)]);
    }
    Ok(t)
}

pub fn splitting(cfg: &ScenarioConfig) -> CliResult<Table> {
    let s = &cfg.splitting;
    let base = cfg.params_at(cfg.system.omega_m)?;
    let rows = s
        .etas
        .par_iter()
        .map(|&eta| {
            let p = SystemParams { g: eta * base.omega_m, ..base.clone() };
            let exact = locate_avoided_crossing(&p, RESONANCE_PAIR, s.omega_c_min, s.omega_c_max, s.x_tolerance)?;
            let gap = exact.gap_min / p.omega_m;
            let first_order = perturbative_splitting(eta, p.g) / p.omega_m;
            let relative = if first_order == 0.0 { f64::NAN } else { (gap - first_order).abs() / gap };
            Ok(vec![Cell::Num(eta), Cell::Num(exact.omega_r), Cell::Num(gap), Cell::Num(first_order), Cell::Num(relative)])
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut t = Table::new(["eta", "omega_r_over_omega_m", "gap_exact_over_omega_m", "gap_perturbative_over_omega_m", "relative_error"]);
    describe(&mut t, "splitting", &base);
    t.meta("levels", format!("{:?}", RESONANCE_PAIR));
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}
