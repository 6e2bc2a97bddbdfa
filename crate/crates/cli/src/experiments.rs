use holo_mimo::capacity::{
    capacity_asymptotic, capacity_csir_mc_sweep, capacity_csit_mc_sweep, db_to_linear, CapacityResult, Normalization,
};
use holo_mimo::channel::{
    build_basis, clarke_correlation, correlation_matrix, discard_fraction, estimate_variances,
    generate_from_correlation, ChannelModel, MAX_EXPLICIT_SIDE,
};
use holo_mimo::geometry::{CellLattice, PlanarArray};
use holo_mimo::linalg::symmetric_eigenvalues;
use holo_mimo::spectra::{coupling_variances, receive_variances, significant_count, CouplingMatrix, SpectralFactor};
use serde_json::{json, Map, Value as Json};

use crate::config::{CapacityKind, EigenModel, Experiment, ExperimentConfig, GenerationPath};
use crate::output::Table;

/// Tables to write plus a summary for the manifest.
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub summary: Json,
}

pub fn run(cfg: &ExperimentConfig, seed: u64) -> holo_mimo::Result<RunOutput> {
    match cfg.experiment {
        Experiment::Variances => variances(cfg),
        Experiment::Eigenvalues => eigenvalues(cfg),
        Experiment::CapacityVsSpacing => capacity_vs_spacing(cfg, seed),
        Experiment::CapacityVsSnr => capacity_vs_snr(cfg, seed),
        Experiment::Estimate => estimate(cfg, seed),
        Experiment::Generate => generate(cfg, seed),
    }
}

// configs are validated before this point
fn receive_array(cfg: &ExperimentConfig, spacing: Option<f64>) -> PlanarArray<f64> {
    cfg.receive.build("receive", spacing).expect("validated")
}

fn source_array(cfg: &ExperimentConfig, spacing: Option<f64>) -> PlanarArray<f64> {
    cfg.source_spec().build("source", spacing).expect("validated")
}

fn spectra(cfg: &ExperimentConfig) -> Vec<(String, SpectralFactor<f64>)> {
    cfg.spectrum
        .iter()
        .enumerate()
        .map(|(i, s)| (s.name.clone(), s.build(&format!("spectrum[{i}]")).expect("validated")))
        .collect()
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Sum in row order; re-reading the written column reproduces it exactly.
fn column_sum(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, |a, b| a + b)
}

fn variances(cfg: &ExperimentConfig) -> holo_mimo::Result<RunOutput> {
    let array = receive_array(cfg, None);
    let lattice = CellLattice::new(&array)?;
    let mut tables = Vec::new();
    let mut summary = Map::new();
    for (name, spec) in spectra(cfg) {
        let v = receive_variances(&spec, &lattice)?;
        let max = v.max();
        let mut t = Table::new(format!("variances_{name}"), vec!["lx", "ly", "variance", "strength_db"]);
        for (cell, &s) in lattice.cells.iter().zip(v.iter()) {
            t.push(vec![cell.lx.into(), cell.ly.into(), s.into(), db(s / max).into()]);
        }
        summary.insert(
            name,
            json!({
                "cells": v.len(),
                "significant": significant_count(v.as_slice(), cfg.sweep.significant_fraction),
                "significant_fraction": cfg.sweep.significant_fraction,
                "variance_sum": column_sum(v.iter().copied()),
                "variance_max": max,
            }),
        );
        tables.push(t);
    }
    Ok(RunOutput {
        tables,
        summary: Json::Object(summary),
    })
}

fn spacings(cfg: &ExperimentConfig) -> Vec<Option<f64>> {
    if cfg.sweep.spacings.is_empty() {
        vec![None]
    } else {
        cfg.sweep.spacings.iter().map(|&d| Some(d)).collect()
    }
}

fn eigenvalues(cfg: &ExperimentConfig) -> holo_mimo::Result<RunOutput> {
    let mut t = Table::new("eigenvalues", vec!["spacing", "n_antennas", "model", "index", "eigenvalue", "eigenvalue_db"]);
    let mut summary = Vec::new();
    let wavelength = cfg.receive.wavelength;
    let lattice = CellLattice::new(&receive_array(cfg, None))?;
    let marginals: Vec<(String, Vec<f64>)> = if cfg.sweep.models.contains(&EigenModel::Fourier) {
        spectra(cfg)
            .into_iter()
            .map(|(name, spec)| receive_variances(&spec, &lattice).map(|v| (name, v.as_slice().to_vec())))
            .collect::<holo_mimo::Result<_>>()?
    } else {
        Vec::new()
    };
    for d in spacings(cfg) {
        let array = receive_array(cfg, d);
        let n = array.len();
        let spacing = array.spacing_x() / wavelength;
        let mut emit = |model: String, mut eig: Vec<f64>| {
            eig.sort_by(|a, b| b.total_cmp(a));
            let top = eig[0];
            for (i, &e) in eig.iter().enumerate() {
                t.push(vec![
                    spacing.into(),
                    n.into(),
                    model.clone().into(),
                    (i + 1).into(),
                    e.into(),
                    db(e.max(0.0) / top).into(),
                ]);
            }
        };
        for &model in &cfg.sweep.models {
            match model {
                EigenModel::Fourier => {
                    for (name, v) in &marginals {
                        let mut eig: Vec<f64> = v.iter().map(|s| n as f64 * s).collect();
                        eig.resize(n.max(eig.len()), 0.0);
                        summary.push(json!({
                            "spacing": spacing,
                            "model": format!("fourier-{name}"),
                            "significant": significant_count(v, cfg.sweep.significant_fraction),
                            "rank": v.iter().filter(|&&x| x > 0.0).count(),
                        }));
                        emit(format!("fourier-{name}"), eig);
                    }
                }
                EigenModel::Clarke => {
                    if n > MAX_EXPLICIT_SIDE {
                        return Err(holo_mimo::Error::SizeLimit {
                            requested: n,
                            limit: MAX_EXPLICIT_SIDE,
                        });
                    }
                    let eig = symmetric_eigenvalues(&clarke_correlation(&array));
                    let keep = lattice.len().min(n);
                    summary.push(json!({
                        "spacing": spacing,
                        "model": "clarke",
                        "kept": keep,
                        "discard_fraction": discard_fraction(&eig, keep),
                    }));
                    emit("clarke".into(), eig);
                }
                EigenModel::Iid => emit("iid".into(), vec![1.0; n]),
            }
        }
    }
    let rows = t.rows.len();
    Ok(RunOutput {
        tables: vec![t],
        summary: json!({ "rows": rows, "models": summary }),
    })
}

fn capacity_columns() -> Vec<&'static str> {
    vec!["spacing", "n_receive", "n_source", "model", "regime", "snr_db", "capacity", "std_error", "trials"]
}

struct Couplings {
    entries: Vec<(String, CouplingMatrix<f64>)>,
}

fn couplings(cfg: &ExperimentConfig) -> holo_mimo::Result<Couplings> {
    let receive = CellLattice::new(&receive_array(cfg, None))?;
    let source = CellLattice::new(&source_array(cfg, None))?;
    let entries = spectra(cfg)
        .into_iter()
        .map(|(name, spec)| coupling_variances(&spec, &source, &receive).map(|c| (name, c)))
        .collect::<holo_mimo::Result<_>>()?;
    Ok(Couplings { entries })
}

/// Rows for every snr at one spacing. Monte Carlo regimes draw each
/// realization once and evaluate it at all snrs.
fn capacity_rows(
    cfg: &ExperimentConfig,
    t: &mut Table,
    couplings: &Couplings,
    spacing: Option<f64>,
    seed: u64,
) -> holo_mimo::Result<Vec<(String, String, f64)>> {
    let (ra, sa) = (receive_array(cfg, spacing), source_array(cfg, spacing));
    let (nr, ns) = (ra.len(), sa.len());
    let spacing = ra.spacing_x() / cfg.receive.wavelength;
    let snrs: Vec<f64> = cfg.snr_db.iter().map(|&d| db_to_linear(d)).collect();
    let norm: Normalization = cfg.sweep.normalization.into();
    let asymptotic = |fr: &[f64], fs: &[f64]| -> holo_mimo::Result<Vec<CapacityResult>> {
        snrs.iter().map(|&snr| capacity_asymptotic(fr, fs, nr, ns, snr, norm).map(|r| r.0)).collect()
    };
    let mut curves: Vec<(String, Vec<CapacityResult>)> = Vec::new();
    for &kind in &cfg.sweep.capacities {
        match kind {
            CapacityKind::IidAsymptotic => {
                let mut rs = asymptotic(&vec![1.0 / nr as f64; nr], &vec![1.0 / ns as f64; ns])?;
                for r in &mut rs {
                    r.regime = holo_mimo::capacity::Regime::IidBaseline;
                }
                curves.push(("iid".into(), rs));
            }
            _ => {
                for (name, c) in &couplings.entries {
                    let rs = match kind {
                        CapacityKind::CsirMc => capacity_csir_mc_sweep(c, nr, ns, &snrs, cfg.trials, seed)?,
                        CapacityKind::CsitMc => capacity_csit_mc_sweep(c, nr, ns, &snrs, cfg.trials, seed)?,
                        CapacityKind::CsirAsymptotic => {
                            let (rv, sv) = c.separable.as_ref().ok_or(holo_mimo::Error::NotSeparable)?;
                            asymptotic(rv.as_slice(), sv.as_slice())?
                        }
                        CapacityKind::IidAsymptotic => unreachable!(),
                    };
                    curves.push((name.clone(), rs));
                }
            }
        }
    }
    let mut out = Vec::new();
    for (i, &snr_db) in cfg.snr_db.iter().enumerate() {
        for (model, rs) in &curves {
            let r = &rs[i];
            let regime = r.regime.to_string();
            t.push(vec![
                spacing.into(),
                nr.into(),
                ns.into(),
                model.as_str().into(),
                regime.as_str().into(),
                snr_db.into(),
                r.mean.into(),
                r.std_error.into(),
                r.trials.into(),
            ]);
            out.push((model.clone(), regime, r.mean));
        }
    }
    Ok(out)
}

fn capacity_summary(rows: Vec<(String, String, f64)>) -> Json {
    Json::Array(
        rows.into_iter()
            .map(|(m, r, c)| json!({ "model": m, "regime": r, "capacity": c }))
            .collect(),
    )
}

fn capacity_vs_spacing(cfg: &ExperimentConfig, seed: u64) -> holo_mimo::Result<RunOutput> {
    // the cell lattice depends on the aperture only, so couplings are shared
    let c = couplings(cfg)?;
    let mut t = Table::new("capacity_vs_spacing", capacity_columns());
    let mut rows = Vec::new();
    for d in spacings(cfg) {
        rows.extend(capacity_rows(cfg, &mut t, &c, d, seed)?);
    }
    Ok(RunOutput {
        tables: vec![t],
        summary: json!({ "capacity_sum": column_sum(rows.iter().map(|r| r.2)), "points": capacity_summary(rows) }),
    })
}

fn capacity_vs_snr(cfg: &ExperimentConfig, seed: u64) -> holo_mimo::Result<RunOutput> {
    let c = couplings(cfg)?;
    let mut t = Table::new("capacity_vs_snr", capacity_columns());
    let rows = capacity_rows(cfg, &mut t, &c, None, seed)?;
    Ok(RunOutput {
        tables: vec![t],
        summary: json!({ "capacity_sum": column_sum(rows.iter().map(|r| r.2)), "points": capacity_summary(rows) }),
    })
}

fn estimate(cfg: &ExperimentConfig, seed: u64) -> holo_mimo::Result<RunOutput> {
    let c = couplings(cfg)?;
    let mut tables = Vec::new();
    let mut summary = Map::new();
    for (name, coupling) in c.entries {
        let model = ChannelModel::new(receive_array(cfg, None), source_array(cfg, None), coupling)?;
        let est = estimate_variances(
            |k| model.spatial(seed, k as u64).map(|h| h.matrix),
            &model.receive_basis,
            &model.source_basis,
            cfg.trials,
        )?;
        let truth = &model.coupling;
        let floor = cfg.sweep.estimate_floor * truth.values.max();
        let mut t = Table::new(
            format!("estimate_{name}"),
            vec!["lx", "ly", "mx", "my", "truth", "estimate", "relative_error"],
        );
        let (mut worst, mut held) = (0.0f64, 0usize);
        for (j, &(mx, my)) in truth.source_cells.iter().enumerate() {
            for (i, &(lx, ly)) in truth.receive_cells.iter().enumerate() {
                let (v, e) = (truth.values[(i, j)], est.values[(i, j)]);
                let rel = if v > 0.0 { (e - v).abs() / v } else { f64::INFINITY };
                if v >= floor && v > 0.0 {
                    held += 1;
                    worst = worst.max(rel);
                }
                t.push(vec![lx.into(), ly.into(), mx.into(), my.into(), v.into(), e.into(), rel.into()]);
            }
        }
        summary.insert(
            name,
            json!({ "trials": est.trials, "entries_above_floor": held, "max_relative_error": worst }),
        );
        tables.push(t);
    }
    Ok(RunOutput {
        tables,
        summary: Json::Object(summary),
    })
}

fn generate(cfg: &ExperimentConfig, seed: u64) -> holo_mimo::Result<RunOutput> {
    let c = couplings(cfg)?;
    let mut tables = Vec::new();
    let mut summary = Map::new();
    for (name, coupling) in c.entries {
        let model = ChannelModel::new(receive_array(cfg, None), source_array(cfg, None), coupling)?;
        let mut t = Table::new(format!("channel_{name}"), vec!["realization", "row", "column", "re", "im"]);
        let bases = match cfg.sweep.path {
            GenerationPath::Correlation => Some((
                build_basis(&model.receive_array, &model.receive_lattice),
                build_basis(&model.source_array, &model.source_lattice),
            )),
            GenerationPath::Series => None,
        };
        let factors = bases
            .as_ref()
            .map(|(br, bs)| correlation_matrix(&model.coupling, br, bs))
            .transpose()?;
        let mut power = 0.0;
        for k in 0..cfg.trials as u64 {
            let h = match &factors {
                Some(f) => generate_from_correlation(f, seed, k),
                None => model.spatial(seed, k)?,
            };
            for j in 0..h.matrix.ncols() {
                for i in 0..h.matrix.nrows() {
                    let z = h.matrix[(i, j)];
                    power += z.norm_sqr();
                    t.push(vec![(k as usize).into(), i.into(), j.into(), z.re.into(), z.im.into()]);
                }
            }
        }
        let entries = (model.receive_array.len() * model.source_array.len() * cfg.trials) as f64;
        summary.insert(name, json!({ "realizations": cfg.trials, "mean_entry_power": power / entries }));
        tables.push(t);
    }
    Ok(RunOutput {
        tables,
        summary: Json::Object(summary),
    })
}
