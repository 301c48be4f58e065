use khlab_core::dynamics::{
    beat_analysis, default_dt, frequency_spectrum, sample_product_states, sampled_correlations, step_certificate,
    StateVector, TimeGrid, TtcSeries,
};
use khlab_core::hamiltonian::{build_from_couplings, build_kh, ModelSpec};
use khlab_core::operator::to_sparse;
use khlab_core::pauli::{build_spin_flip, PauliSum};
use khlab_core::spectral::{
    eigensystem, entanglement_entropy, full_spectrum, lowest_k, structure_factor, LanczosOptions, SpectrumResult,
    DENSE_CAP, DEGENERACY_TOL,
};
use khlab_core::zeromode::{build_zero_mode, normalized_residual, ZeroModeSpec};
use khlab_core::Axis;
use khlab_iontrap::run_pipeline;
use serde_json::{json, Value};

use crate::config::{DynamicsParams, ExperimentConfig, Mode, SpectrumParams, ZeroModeParams};
use crate::error::CliResult;
use crate::metrics::{envelope_decay_time, first_node};
use crate::output::{blob_hash, csv_table, Artifacts};

/// Runs the experiment described by a resolved config.
pub fn run(mode: Mode, cfg: &ExperimentConfig) -> CliResult<Artifacts> {
    match mode {
        Mode::Spectrum => spectrum(cfg.model.as_ref().unwrap(), cfg.spectrum.as_ref().unwrap()),
        Mode::Dynamics => {
            let spec = cfg.model.as_ref().unwrap();
            let mut art = Artifacts::default();
            let h = build_kh(spec)?;
            art.hamiltonian_hash = Some(blob_hash(&h.to_text()));
            let dynamics = dynamics(&h, cfg.dynamics.as_ref().unwrap(), &mut art)?;
            art.report = json!({ "mode": mode.as_str(), "model": spec, "dynamics": dynamics });
            Ok(art)
        }
        Mode::Zeromode => zeromode(cfg.zeromode.as_ref().unwrap()),
        Mode::Iontrap | Mode::IontrapDynamics => iontrap(mode, cfg),
    }
}

fn spectrum_files(art: &mut Artifacts, s: &SpectrumResult) {
    let rows = s.eigenvalues.iter().enumerate().map(|(i, e)| [i as f64, *e]);
    art.add("spectrum.csv", csv_table(&["index", "energy"], rows));
    let rows = s.multiplets.iter().enumerate().map(|(i, m)| [i as f64, m.energy, m.multiplicity as f64]);
    art.add("multiplets.csv", csv_table(&["level", "energy", "multiplicity"], rows));
}

fn spectrum(spec: &ModelSpec, p: &SpectrumParams) -> CliResult<Artifacts> {
    let mut art = Artifacts::default();
    let h = build_kh(spec)?;
    art.hamiltonian_hash = Some(blob_hash(&h.to_text()));
    let op = to_sparse(&h)?;
    let need_state = p.entropy || !p.structure_factor.is_empty();
    let mut residuals = None;
    let (result, ground): (SpectrumResult, Option<StateVector>) = if p.lowest == 0 {
        if need_state {
            let eig = eigensystem(&op, DENSE_CAP)?;
            let amps: Vec<_> = eig.vectors.column(0).iter().copied().collect();
            let psi = StateVector::from_amplitudes(spec.len, amps)?;
            (SpectrumResult::from_eigenvalues(eig.values, DEGENERACY_TOL), Some(psi))
        } else {
            (full_spectrum(&op, DENSE_CAP)?, None)
        }
    } else {
        let low = lowest_k(&op, p.lowest, &LanczosOptions::default())?;
        residuals = Some(low.residuals.clone());
        let psi = low.vectors.into_iter().next();
        (low.spectrum, psi)
    };
    spectrum_files(&mut art, &result);
    let mut report = json!({
        "mode": "spectrum",
        "model": spec,
        "levels": result.eigenvalues.len(),
        "ground_energy": result.ground_energy(),
        "ground_multiplicity": result.multiplets[0].multiplicity,
        "multiplets": result.multiplets.len(),
        "gaps": result.gaps().ok(),
    });
    if let Some(r) = residuals {
        report["lanczos_residuals"] = json!(r);
    }
    if let Some(psi) = ground {
        if p.entropy {
            let rows = (1..spec.len).map(|l| entanglement_entropy(&psi, l).map(|s| [l as f64, s]));
            let rows: Vec<[f64; 2]> = rows.collect::<khlab_core::Result<_>>()?;
            art.add("entropy.csv", csv_table(&["l", "S"], rows));
        }
        for &axis in &p.structure_factor {
            let rows = structure_factor(&psi, axis)?.into_iter().map(|(q, v)| [q, v]);
            art.add(format!("structure_factor_{axis}.csv"), csv_table(&["q", "P"], rows));
        }
    }
    art.report = report;
    Ok(art)
}

/// Correlation runs for every configured axis; writes the series and their spectra.
pub fn dynamics(h: &PauliSum, d: &DynamicsParams, art: &mut Artifacts) -> CliResult<Value> {
    let op = to_sparse(h)?;
    let dt = d.dt.unwrap_or_else(|| default_dt(&op));
    let grid = TimeGrid::new(d.interval, d.t_final)?;
    let mut series = Vec::new();
    for &axis in &d.axes {
        for ttc in sampled_correlations(&op, axis, &d.sites, d.n, d.seed, d.fixed_edge, dt, &grid)? {
            series.push(series_files(art, &ttc)?);
        }
    }
    let certificate = if d.certify {
        let psi0 = sample_product_states(d.axes[0], h.len(), 1, d.seed, d.fixed_edge)?.remove(0).state;
        Some(step_certificate(&op, &psi0, dt, &grid)?)
    } else {
        None
    };
    Ok(json!({
        "dt": dt,
        "norm_bound": op.norm_bound(),
        "T": grid.t_final(),
        "interval": grid.interval,
        "samples": grid.n,
        "N": d.n,
        "seed": d.seed,
        "step_certificate": certificate,
        "series": series,
    }))
}

fn series_files(art: &mut Artifacts, ttc: &TtcSeries) -> CliResult<Value> {
    let tag = format!("site{}_{}", ttc.site, ttc.axis);
    let rows = (0..ttc.times.len()).map(|k| [ttc.times[k], ttc.mean[k].re, ttc.mean[k].im, ttc.variance[k]]);
    art.add(format!("ttc_{tag}.csv"), csv_table(&["t", "re", "im", "variance"], rows));
    let fs = frequency_spectrum(&ttc.times, &ttc.aligned())?;
    let rows = (0..fs.omega.len()).map(|k| [fs.omega[k], fs.modulus_of_mean[k], fs.mean_of_modulus[k], fs.variance[k]]);
    art.add(format!("spectrum_{tag}.csv"), csv_table(&["omega", "modulus", "mean_of_modulus", "variance"], rows));
    let mean = ttc.mean_re();
    let beat = beat_analysis(&ttc.times, &mean).ok();
    Ok(json!({
        "site": ttc.site,
        "axis": ttc.axis,
        "states": ttc.n_states(),
        "initial": mean[0],
        "final": mean[mean.len() - 1],
        "beat": beat,
    }))
}

fn zeromode(p: &ZeroModeParams) -> CliResult<Artifacts> {
    let mut art = Artifacts::default();
    let spec = ZeroModeSpec::new(p.kind, p.len, p.delta).with_m(p.m);
    let model = ModelSpec::kitaev(p.len, p.perturbation, p.delta);
    let h = build_kh(&model)?;
    art.hamiltonian_hash = Some(blob_hash(&h.to_text()));
    let psi = build_zero_mode(&spec)?;
    let comm = h.commutator(&psi)?;
    let square = psi.mul(&psi)?.sub(&PauliSum::identity(p.len)?)?.frobenius_norm().abs();
    let mut anti = serde_json::Map::new();
    for axis in Axis::ALL {
        let g = PauliSum::from_string(1.0.into(), build_spin_flip(axis, p.len)?)?;
        anti.insert(format!("G{axis}"), json!(psi.anticommutator(&g)?.frobenius_norm().abs()));
    }
    art.add("zeromode.txt", psi.to_text() + "\n");
    art.add("commutator.txt", comm.to_text() + "\n");
    art.report = json!({
        "mode": "zeromode",
        "zeromode": p,
        "normalization": spec.normalization(),
        "terms": psi.num_terms(),
        "commutator_terms": comm.num_terms(),
        "normalized_residual": normalized_residual(&h, &spec)?,
        "square_minus_identity": square,
        "anticommutator_norm": anti,
    });
    Ok(art)
}

fn iontrap(mode: Mode, cfg: &ExperimentConfig) -> CliResult<Artifacts> {
    let trap = cfg.trap.as_ref().unwrap();
    let mut art = Artifacts::default();
    let run = run_pipeline(trap)?;
    art.add("crystal.csv", run.crystal.to_csv());
    art.add("modes.csv", run.modes.to_csv());
    art.add("couplings_raw.csv", run.raw.to_csv());
    art.add("couplings.csv", run.matched.couplings.to_csv());
    let mut report = json!({
        "mode": mode.as_str(),
        "trap": run.report,
        "active": run.map,
        "matching": run.matched,
    });
    if mode == Mode::IontrapDynamics {
        let h = build_from_couplings(&run.matched.couplings)?;
        art.hamiltonian_hash = Some(blob_hash(&h.to_text()));
        let d = cfg.dynamics.as_ref().unwrap();
        report["dynamics"] = dynamics(&h, d, &mut art)?;
        report["metrics"] = edge_metrics(&art)?;
    }
    art.report = report;
    Ok(art)
}

fn read_series(art: &Artifacts, name: &str) -> Option<(Vec<f64>, Vec<f64>)> {
    let text = art.text(name)?;
    let (mut t, mut x) = (Vec::new(), Vec::new());
    for line in text.lines().skip(1) {
        let mut cells = line.split(',');
        t.push(cells.next()?.parse().ok()?);
        x.push(cells.next()?.parse().ok()?);
    }
    Some((t, x))
}

/// Site-1 revival node of `x` and oscillation decay time of `z`, when those series exist.
fn edge_metrics(art: &Artifacts) -> CliResult<Value> {
    let node = read_series(art, "ttc_site1_x.csv").and_then(|(t, x)| first_node(&t, &x, 0.2));
    let decay = match read_series(art, "ttc_site1_z.csv") {
        Some((t, z)) => envelope_decay_time(&t, &z)?,
        None => None,
    };
    Ok(json!({ "x_first_node": node, "z_decay_time": decay }))
}
