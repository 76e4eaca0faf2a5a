use super::config::RunConfig;
use super::output::{num, stamp, write_text, CsvOut};
use crate::classical::{
    canonical_momentum, classical_a, classical_observables, classify_orbit, orbit_state,
    ClassicalOrbit, Sector,
};
use crate::coherent::{
    build_lattice, evolve, ln_norm_sqr, mean_geometry, wavefunction, CoherentParams, MeanReport,
};
use crate::error::Result;
use crate::spectrum::level_diagram;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

/// `levels.csv` and the per-Landau-level split summary `splitting.csv`.
pub fn run_spectrum(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let flux = cfg.flux_config()?;
    let hash = cfg.hash();
    let s = &cfg.spectrum;
    let levels = if s.l_min <= s.l_max {
        level_diagram(&flux, s.m_max, s.l_min, s.l_max)
    } else {
        Vec::new()
    };
    let dir = &cfg.output_dir;
    let mut out = CsvOut::create(
        dir,
        "levels.csv",
        &hash,
        &["j", "m", "l", "mu", "energy_hw", "lz_hbar"],
    )?;
    // (Landau level of the flux-free problem, sector) → (energy, count)
    let mut split: BTreeMap<(u64, u8), (f64, usize)> = BTreeMap::new();
    for e in &levels {
        let q = &e.qn;
        out.row([
            q.j.index().to_string(),
            q.m.to_string(),
            q.l.to_string(),
            num(q.mu),
            num(e.energy),
            num(e.lz),
        ])?;
        let base = match q.j {
            Sector::J1 => q.m as u64 + q.l as u64,
            Sector::J0 => q.m as u64,
        };
        split.entry((base, q.j.index())).or_insert((e.energy, 0)).1 += 1;
    }
    let mut paths = vec![out.finish()?];
    let mut out = CsvOut::create(
        dir,
        "splitting.csv",
        &hash,
        &["landau_level", "j", "energy_hw", "shift_hw", "count"],
    )?;
    for ((base, j), (energy, count)) in split {
        out.row([
            base.to_string(),
            j.to_string(),
            num(energy),
            num(energy - (base as f64 + 0.5)),
            count.to_string(),
        ])?;
    }
    paths.push(out.finish()?);
    Ok(paths)
}

/// `orbit.csv` sampled over the configured periods and `classical.json`.
pub fn run_classical(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let flux = cfg.flux_config()?;
    let units = cfg.units;
    let hash = cfg.hash();
    let c = &cfg.classical;
    let orbit = c.orbit()?;
    let obs = classical_observables(&orbit, &units, &flux);
    let period = 2.0 * PI / units.omega;
    let mut out = CsvOut::create(
        &cfg.output_dir,
        "orbit.csv",
        &hash,
        &[
            "t",
            "x",
            "y",
            "z",
            "px",
            "py",
            "canonical_px",
            "canonical_py",
        ],
    )?;
    for k in 0..c.samples {
        let t = c.periods * period * k as f64 / c.samples as f64;
        let pt = orbit_state(&orbit, &units, t);
        let (qx, qy) = canonical_momentum(&pt, &units, &flux);
        out.row([
            num(t),
            num(pt.x),
            num(pt.y),
            num(pt.z),
            num(pt.px),
            num(pt.py),
            num(qx),
            num(qy),
        ])?;
    }
    let mut paths = vec![out.finish()?];
    let (a1, a2) = classical_a(&orbit, &units, 0.0);
    let summary = json!({
        "config_hash": hash,
        "version": super::output::VERSION,
        "orbit": orbit,
        "sector": classify_orbit(&orbit).to_string(),
        "touches_solenoid": orbit.touches_solenoid(),
        "energy": obs.energy,
        "lz": obs.lz,
        "a1": [a1.re, a1.im],
        "a2": [a2.re, a2.im],
    });
    paths.push(write_text(
        &cfg.output_dir,
        "classical.json",
        &serde_json::to_string_pretty(&summary).expect("json"),
    )?);
    Ok(paths)
}

fn report_json(p: &CoherentParams, m: &MeanReport) -> serde_json::Value {
    let c = |z: Complex64| json!([z.re, z.im]);
    json!({
        "j": p.j.index(),
        "mu": p.mu,
        "l0": p.l0,
        "z1": c(p.z1),
        "z2": c(p.z2),
        "n1_mean": m.n1_mean,
        "n2_mean": m.n2_mean,
        "a1_mean": c(m.a1_mean),
        "a2_mean": c(m.a2_mean),
        "position_mean": c(m.position_mean),
        "r_mean": m.r_mean,
        "rc_mean": m.rc_mean,
        "var_r2": m.var_r2,
        "var_rc2": m.var_rc2,
        "var_position": m.var_position,
    })
}

/// `means.json` and the coefficient lattice `lattice.txt`.
pub fn run_coherent(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let p = cfg.coherent_params()?;
    let hash = cfg.hash();
    let m = mean_geometry(&p, &cfg.units)?;
    let lat = build_lattice(&p, cfg.tolerance.lattice)?;
    let mut v = report_json(&p, &m);
    v["config_hash"] = json!(hash);
    v["version"] = json!(super::output::VERSION);
    v["ln_norm"] = json!(ln_norm_sqr(&p)?);
    v["semiclassical"] = json!(p.semiclassical());
    v["lattice_cells"] = json!(lat.len());
    v["tail_mass"] = json!(lat.tail_mass);
    let dir = &cfg.output_dir;
    let a = write_text(
        dir,
        "means.json",
        &serde_json::to_string_pretty(&v).expect("json"),
    )?;
    let b = write_text(
        dir,
        "lattice.txt",
        &format!("{}\n{}", stamp(&hash), lat.to_text()),
    )?;
    Ok(vec![a, b])
}

/// Trajectory of the means, a density snapshot and the matching classical orbit.
pub fn run_evolve(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let p = cfg.coherent_params()?;
    let units = cfg.units;
    let e = &cfg.evolve;
    let hash = cfg.hash();
    let dir = &cfg.output_dir;
    let period = 2.0 * PI / units.omega;
    let times: Vec<f64> = (0..=e.samples)
        .map(|k| e.periods * period * k as f64 / e.samples as f64)
        .collect();
    let rows: Vec<(f64, MeanReport)> = times
        .par_iter()
        .map(|&t| Ok((t, mean_geometry(&evolve(&p, t, &units), &units)?)))
        .collect::<Result<_>>()?;
    let mut out = CsvOut::create(
        dir,
        "trajectory.csv",
        &hash,
        &[
            "t",
            "mean_x",
            "mean_y",
            "R_mean",
            "Rc_mean",
            "var_position",
            "var_R2",
            "var_Rc2",
            "n1_mean",
            "n2_mean",
        ],
    )?;
    for (t, m) in &rows {
        out.row([
            num(*t),
            num(m.position_mean.re),
            num(m.position_mean.im),
            num(m.r_mean),
            num(m.rc_mean),
            num(m.var_position),
            num(m.var_r2),
            num(m.var_rc2),
            num(m.n1_mean),
            num(m.n2_mean),
        ])?;
    }
    let mut paths = vec![out.finish()?];

    // |Ψ|² as a probability density per unit area on a polar grid
    let lsq = units.magnetic_length_sq();
    let m0 = &rows[0].1;
    let r_max = if e.r_max > 0.0 {
        e.r_max
    } else {
        m0.r_mean + m0.rc_mean + 4.0 * lsq.sqrt()
    };
    let norm = ln_norm_sqr(&p)?;
    let cells: Vec<(usize, usize)> = (0..e.grid_r)
        .flat_map(|i| (0..e.grid_phi).map(move |k| (i, k)))
        .collect();
    let dens: Vec<(f64, f64, f64)> = cells
        .par_iter()
        .map(|&(i, k)| {
            let r = r_max * (i as f64 + 0.5) / e.grid_r as f64;
            let phi = 2.0 * PI * k as f64 / e.grid_phi as f64;
            let psi = wavefunction(&p, &units, e.pz, e.t_spread, r, phi, 0.0)?;
            let d = (psi.norm_sqr().ln() - norm).exp() / (PI * lsq);
            Ok((r, phi, d))
        })
        .collect::<Result<_>>()?;
    let mut out = CsvOut::create(dir, "spread.csv", &hash, &["r", "phi", "x", "y", "density"])?;
    for (r, phi, d) in dens {
        out.row([
            num(r),
            num(phi),
            num(r * phi.cos()),
            num(r * phi.sin()),
            num(d),
        ])?;
    }
    paths.push(out.finish()?);

    let orbit = ClassicalOrbit::from_a(p.z1, p.z2, &units);
    let mut out = CsvOut::create(
        dir,
        "classical_orbit.csv",
        &hash,
        &["t", "x", "y", "R", "Rc"],
    )?;
    for &t in &times {
        let pt = orbit_state(&orbit, &units, t);
        out.row([num(t), num(pt.x), num(pt.y), num(orbit.r), num(orbit.rc)])?;
    }
    paths.push(out.finish()?);
    Ok(paths)
}

/// Means over the grid of sweep parameters, sorted by (j, mu, |z1|, |z2|).
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let flux = cfg.flux_config()?;
    let s = &cfg.sweep;
    let mut points = Vec::new();
    for &j in &s.j {
        for &mu in &s.mu {
            for &a in &s.abs_z1 {
                for &b in &s.abs_z2 {
                    points.push((j, mu, a, b));
                }
            }
        }
    }
    let units = cfg.units;
    type Row = ((i64, f64, f64, f64), Vec<String>);
    let mut rows: Vec<Row> = points
        .par_iter()
        .map(|&(j, mu, a, b)| {
            let res = CoherentParams::new(
                j,
                Complex64::from_polar(a, s.arg_z1),
                Complex64::from_polar(b, s.arg_z2),
                mu,
                flux.l0,
            )
            .and_then(|p| mean_geometry(&p, &units));
            let mut row = vec![j.to_string(), num(mu), num(a), num(b)];
            match res {
                Ok(m) => {
                    for v in [
                        m.n1_mean,
                        m.n2_mean,
                        m.r_mean,
                        m.rc_mean,
                        m.var_r2,
                        m.var_rc2,
                        m.var_position,
                    ] {
                        row.push(num(v));
                    }
                    row.push("ok".into());
                }
                Err(e) => {
                    row.extend(std::iter::repeat_n(String::new(), 7));
                    row.push(e.to_string());
                }
            }
            ((j, mu, a, b), row)
        })
        .collect();
    rows.sort_by(|x, y| {
        let (a, b) = (x.0, y.0);
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.total_cmp(&b.3))
    });
    let mut out = CsvOut::create(
        &cfg.output_dir,
        "sweep.csv",
        &cfg.hash(),
        &[
            "j",
            "mu",
            "abs_z1",
            "abs_z2",
            "n1_mean",
            "n2_mean",
            "R_mean",
            "Rc_mean",
            "var_R2",
            "var_Rc2",
            "var_position",
            "status",
        ],
    )?;
    for (_, r) in rows {
        out.row(r)?;
    }
    Ok(vec![out.finish()?])
}
