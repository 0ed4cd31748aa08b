//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::Result;

use srdem::force::CurvatureModel;
use srdem::scenarios::{
    analytic_wall_impact, run_drum_observed, run_packing_observed, run_pair_impact_with,
    run_wall_impact_with, PairImpactResult,
};
use srdem::shape::{build_profile, revolve_mesh, revolve_properties, voxel_properties};
use srdem::validation::{run_fast_suite, Check, SuiteOptions};

use crate::config::{parse_config, SimConfig};
use crate::output::{write_snapshot, Number, Table};

/// Options shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Global {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub deterministic: bool,
}

/// Load a config, apply the global overrides and write the resolved copy
/// into the output directory.
pub fn load(path: &Path, global: &Global) -> Result<SimConfig> {
    let mut config = parse_config(path)?;
    if let Some(seed) = global.seed {
        config.run.seed = seed;
    }
    if global.deterministic {
        config.run.deterministic = true;
    }
    std::fs::create_dir_all(&global.out)?;
    std::fs::write(global.out.join("resolved.toml"), config.to_toml()?)?;
    Ok(config)
}

fn number(config: &SimConfig) -> Number {
    Number {
        deterministic: config.run.deterministic,
    }
}

fn warn_timestep(config: &SimConfig, template: &srdem::body::ShapeTemplate) {
    let limit = config.recommended_dt(template);
    if config.run.dt > limit {
        eprintln!(
            "warning: dt = {:e} s exceeds the critical step / n_safety = {:e} s",
            config.run.dt, limit
        );
    }
}

fn finish(table: &Table, path: PathBuf) -> Result<()> {
    table.write(&path)?;
    print!("{}", table.as_str());
    eprintln!("wrote {}", path.display());
    Ok(())
}

pub fn props(path: &Path, global: &Global, voxels: usize, around: usize) -> Result<()> {
    let config = load(path, global)?;
    let profile = build_profile(&config.shape)?;
    let density = config.material.density;
    let exact = revolve_properties(&profile, density)?;
    let voxel = voxel_properties(&revolve_mesh(&profile, around), voxels, density)?;
    let mut table = Table::new(
        "method,mass,center_of_mass_z,ix,iy,iz,volume",
        config.run.seed,
        number(&config),
    );
    for (name, m) in [("revolve", exact), ("voxel", voxel)] {
        table.push_tagged(
            &[name],
            &[m.mass, m.center_of_mass_z, m.ix, m.iy, m.iz, m.volume],
        );
        eprintln!(
            "{name}: mass = {:.4e} kg, Ix = {:.4e}, Iy = {:.4e}, Iz = {:.4e} kg m^2",
            m.mass, m.ix, m.iy, m.iz
        );
    }
    finish(&table, global.out.join("props.csv"))
}

pub fn sdf(path: &Path, global: &Global) -> Result<()> {
    let config = load(path, global)?;
    let template = config.template()?;
    let file = global.out.join("sdf.txt");
    std::fs::write(&file, template.sdf.dump())?;
    let (lo, hi) = template.sdf.extent();
    println!(
        "cells = {}, leaves = {}, extent = [{:e}, {:e}] x [{:e}, {:e}]",
        template.sdf.cell_count(),
        template.sdf.leaf_count(),
        lo.x,
        hi.x,
        lo.y,
        hi.y
    );
    eprintln!("wrote {}", file.display());
    Ok(())
}

pub fn impact_wall(path: &Path, global: &Global, theta_list: Option<Vec<f64>>) -> Result<()> {
    let config = load(path, global)?;
    let (wall, mut angles) = config.wall_impact()?;
    if let Some(list) = theta_list {
        angles = list;
    }
    let template = config.template()?;
    warn_timestep(&config, &template);
    let tablet = config.tablet().is_some();
    let rb = if tablet {
        wall.geometry.band_radius
    } else {
        template.profile.x_max()
    };
    let header = if tablet {
        "theta_deg,v_ratio,omega_ratio,v_ratio_analytic,omega_ratio_analytic"
    } else {
        "theta_deg,v_ratio,omega_ratio"
    };
    let mut table = Table::new(header, config.run.seed, number(&config));
    for theta in angles {
        let sim = run_wall_impact_with(&wall, template.clone(), theta)?;
        let mut row = vec![theta, sim.velocity_ratio(), sim.omega_ratio(rb)];
        if tablet {
            let exact = analytic_wall_impact(
                theta,
                &wall.geometry,
                wall.restitution,
                template.mass.mass,
                template.mass.iy,
                sim.v_before,
            )?;
            row.extend([exact.velocity_ratio(), exact.omega_ratio(rb)]);
        }
        table.push(&row);
    }
    finish(&table, global.out.join("impact_wall.csv"))
}

fn model_name(m: CurvatureModel) -> &'static str {
    match m {
        CurvatureModel::Mean => "mean",
        CurvatureModel::Equivalent => "equivalent",
    }
}

fn peak_r_star(r: &PairImpactResult) -> f64 {
    r.trace
        .iter()
        .max_by(|a, b| a.overlap.total_cmp(&b.overlap))
        .map_or(f64::NAN, |t| t.r_star)
}

pub fn impact_pair(path: &Path, global: &Global) -> Result<()> {
    let config = load(path, global)?;
    let (pair, geometry) = config.pair_impact()?;
    let template = config.template()?;
    warn_timestep(&config, &template);
    let num = number(&config);
    let seed = config.run.seed;
    let mut summary = Table::new(
        "orientation_deg,curvature,contact_duration,rebound_speed,rebound_vz,rebound_omega_y,peak_overlap,peak_r_star",
        seed,
        num,
    );
    for &angle in &geometry.orientations {
        for &model in &geometry.curvature_models {
            let r = run_pair_impact_with(&pair, template.clone(), angle, model)?;
            let mut trace = Table::new(
                "time,overlap,normal_force,elastic_force,r_star,velocity_z,omega_y",
                seed,
                num,
            );
            for t in &r.trace {
                trace.push(&[
                    t.time,
                    t.overlap,
                    t.normal_force,
                    t.elastic_force,
                    t.r_star,
                    t.velocity_z,
                    t.omega_y,
                ]);
            }
            let name = format!("trace_{angle}_{}.csv", model_name(model));
            trace.write(&global.out.join(name))?;
            let peak = r.trace.iter().map(|t| t.overlap).fold(0.0, f64::max);
            summary.push_tagged(
                &[&num.fmt(angle), model_name(model)],
                &[
                    r.contact_duration,
                    r.rebound_speed(),
                    r.rebound_velocity.z,
                    r.rebound_omega.y,
                    peak,
                    peak_r_star(&r),
                ],
            );
        }
    }
    finish(&summary, global.out.join("impact_pair.csv"))
}

pub fn pack(path: &Path, global: &Global) -> Result<()> {
    let config = load(path, global)?;
    let packing = config.packing()?;
    warn_timestep(&config, &*packing.template()?);
    let mut series = Vec::new();
    let result = run_packing_observed(&packing, |engine, batch| {
        eprintln!(
            "batch {batch}: {} particles at t = {:.3} s",
            engine.particles.len(),
            engine.time
        );
        series.push(engine.snapshot());
    })?;
    let num = number(&config);
    write_snapshot(&series, &global.out.join("snapshots"), num, config.run.seed)?;
    let mut table = Table::new(
        "fill_height,raw_max,bins_used,time,steps,batches,particles",
        config.run.seed,
        num,
    );
    table.push(&[
        result.fill.height,
        result.fill.raw_max,
        result.fill.bins_used as f64,
        result.time,
        result.steps as f64,
        result.batches as f64,
        result.particles.len() as f64,
    ]);
    finish(&table, global.out.join("packing.csv"))
}

pub fn drum(path: &Path, global: &Global) -> Result<()> {
    let config = load(path, global)?;
    let drum = config.drum()?;
    warn_timestep(&config, &*drum.template()?);
    let mut series = Vec::new();
    let result = run_drum_observed(&drum, |engine, k| {
        eprintln!("snapshot {k} at t = {:.3} s", engine.time);
        series.push(engine.snapshot());
    })?;
    let num = number(&config);
    let seed = config.run.seed;
    write_snapshot(&series, &global.out.join("snapshots"), num, seed)?;
    for (k, points) in result.profiles.iter().enumerate() {
        let mut t = Table::new("x_over_r,z_over_r", seed, num);
        for p in points {
            t.push(&[p.x, p.y]);
        }
        t.write(&global.out.join(format!("surface_{k:02}.csv")))?;
    }
    let mut table = Table::new("snapshot,time,daor_deg", seed, num);
    for (k, (a, s)) in result.angles.iter().zip(&series).enumerate() {
        table.push(&[k as f64, s.time, *a]);
    }
    finish(&table, global.out.join("daor.csv"))?;
    println!(
        "# mean DAoR = {:.3} deg, std = {:.3} deg, steady at t = {:.3} s",
        result.mean, result.std, result.steady_time
    );
    Ok(())
}

/// Run the fast suite; true when every check passed.
pub fn validate(global: &Global, options: &SuiteOptions) -> Result<bool> {
    std::fs::create_dir_all(&global.out)?;
    let checks = run_fast_suite(options, |c| println!("{c}"));
    let mut table = Table::new(
        "criterion,name,passed,detail",
        options.seed,
        Number {
            deterministic: true,
        },
    );
    for Check {
        id,
        name,
        passed,
        detail,
    } in &checks
    {
        let id = id.to_string();
        let detail = format!("\"{}\"", detail.replace('"', "'"));
        table.push_tagged(
            &[&id, name, if *passed { "true" } else { "false" }, &detail],
            &[],
        );
    }
    table.write(&global.out.join("validate.csv"))?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        println!("all {} checks passed", checks.len());
    } else {
        println!("{failed} of {} checks failed", checks.len());
    }
    Ok(failed == 0)
}
