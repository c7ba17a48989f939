//! The individual experiments.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Check, ExperimentConfig, Outcome, Relation};
use crate::billiard::{initial_state, random_generic_position, sample_fpl, FplSample, FplSource, MicroState, Scene, ScattererConfig};
use crate::error::Result;
use crate::flight::{
    generate_chain, init_state, lt_estimate, semigroup_ensembles, write_chains_csv, DirectionLaw, Divergence, Ensembles, InitMode,
    InitialDistribution, PhaseSet, SemigroupReport,
};
use crate::geometry::{Direction, Vec2};
use crate::kernel::{asymptotic_constants, f0_quadrature, f_density, f_quadrature, f_survival, normalization, CdfTable, ExponentialKernel, FreePathLaw, PeriodicKernel};
use crate::lattice_space::{estimate_curve_mc, modular_cell_mass, renormalize, sample_frame, write_estimates_csv, CurveEstimate, EstimateRow};
use crate::parallel::{derive_seed, Dispatch};
use crate::path::PathChain;
use crate::stats::{chi_square_2d, ks_2d_two_sample, ks_one_sample, ks_two_sample, kuiper, memory_two_test, EmpiricalCdf, Estimate, Partition2d};

fn dispatch(cfg: &ExperimentConfig) -> Dispatch {
    Dispatch {
        workers: cfg.workers,
        block: cfg.block,
    }
}

fn tables(cfg: &ExperimentConfig) -> Result<(CdfTable, CdfTable)> {
    Ok((
        CdfTable::build(FreePathLaw::Center, cfg.t_max, cfg.kernel_step)?,
        CdfTable::build(FreePathLaw::Generic, cfg.t_max, cfg.kernel_step)?,
    ))
}

fn billiard_fpl(cfg: &ExperimentConfig, scat: &ScattererConfig, source: FplSource, seed: u64) -> Result<FplSample> {
    let parts = dispatch(cfg).run(cfg.samples, seed, |count, rng| Ok(sample_fpl(scat, source, count, cfg.t_max, rng)))?;
    let mut all = FplSample {
        xi_max: cfg.t_max,
        ..Default::default()
    };
    for p in parts {
        all.extend(p);
    }
    Ok(all)
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub(super) fn fpl_convergence(cfg: &ExperimentConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let (f0, f) = tables(cfg)?;
    let mut csv = String::from("rho,n,ks_generic,p_generic,censored_generic,ks_center,p_center,censored_center\n");
    let mut grid = String::from("rho,xi,billiard_generic,F,billiard_center,F0\n");
    let mut ks = Vec::new();
    for rho in sorted_desc(&cfg.rho) {
        let scat = cfg.lattice.scatterers(rho)?;
        let g = billiard_fpl(cfg, &scat, FplSource::Generic, derive_seed(seed, &format!("generic-{rho}")))?;
        let c = billiard_fpl(cfg, &scat, FplSource::LatticeCenter, derive_seed(seed, &format!("center-{rho}")))?;
        let (ge, ce) = (g.ecdf(), c.ecdf());
        let rg = ks_one_sample(&ge, |x| f.cdf(x), cfg.alpha)?;
        let rc = ks_one_sample(&ce, |x| f0.cdf(x), cfg.alpha)?;
        writeln!(
            csv,
            "{rho},{},{},{},{},{},{},{}",
            g.n(),
            rg.statistic,
            rg.p_value,
            g.censored,
            rc.statistic,
            rc.p_value,
            c.censored
        )
        .ok();
        for &xi in &cfg.xi {
            writeln!(grid, "{rho},{xi},{},{},{},{}", ge.cdf(xi), f.cdf(xi), ce.cdf(xi), f0.cdf(xi)).ok();
        }
        out.metric(format!("ks_generic_rho_{rho}"), rg.statistic);
        out.metric(format!("ks_center_rho_{rho}"), rc.statistic);
        out.report(format!("ks_generic_rho_{rho}"), rg.clone());
        out.report(format!("ks_center_rho_{rho}"), rc.clone());
        ks.push((rg.statistic, rc.statistic));
    }
    let (first, last) = (ks[0], ks[ks.len() - 1]);
    out.check(Check::new("ks_generic_smallest_rho", last.0, Relation::Below, 0.02));
    out.check(Check::new("ks_center_smallest_rho", last.1, Relation::Below, 0.02));
    if ks.len() > 1 {
        out.check(Check::new("ks_generic_decreases", last.0 - first.0, Relation::Below, 0.0));
        out.check(Check::new("ks_center_decreases", last.1 - first.1, Relation::Below, 0.0));
    }
    out.artifact("fpl-convergence.csv", csv);
    out.artifact("fpl-ecdf.csv", grid);
    Ok(())
}

pub(super) fn kernel_tables(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let mut csv = String::from("xi,F0,F,f0_density,f_density,one_minus_F\n");
    let mut worst_support: f64 = 0.0;
    for &xi in &cfg.xi {
        let (a, b) = (f0_quadrature(xi)?, f_quadrature(xi)?);
        writeln!(csv, "{xi},{a},{b},{},{},{}", crate::kernel::f0_density(xi), f_density(xi)?, f_survival(xi)?).ok();
        if xi >= 1.0 {
            worst_support = worst_support.max((1.0 - a).abs());
        }
    }
    for xi in [1.0, 1.5, 2.0, 5.0, 10.0, 100.0] {
        worst_support = worst_support.max((1.0 - f0_quadrature(xi)?).abs());
    }
    out.check(Check::new("f0_equals_one_beyond_one", worst_support, Relation::AtMost, 1e-8));
    let mut norm = String::from("s,integral\n");
    let mut worst_norm: f64 = 0.0;
    for &s in &cfg.exit_params {
        let v = normalization(s)?;
        writeln!(norm, "{s},{v}").ok();
        worst_norm = worst_norm.max((v - 1.0).abs());
    }
    out.check(Check::new("normalization_error", worst_norm, Relation::AtMost, 1e-4));
    let c = asymptotic_constants(2)?;
    let small = 1e-3;
    let r0 = f0_quadrature(small)? / small / c.f0_slope - 1.0;
    let r1 = f_quadrature(small)? / small / c.f_slope - 1.0;
    let r2 = 50.0 * f_survival(50.0)? / c.f_tail - 1.0;
    out.check(Check::new("f0_slope_rel_error", r0.abs(), Relation::Below, 0.01));
    out.check(Check::new("f_slope_rel_error", r1.abs(), Relation::Below, 0.01));
    out.check(Check::new("f_tail_rel_error", r2.abs(), Relation::Below, 0.10));
    out.artifact("kernel-tables.csv", csv);
    out.artifact("kernel-normalization.csv", norm);
    Ok(())
}

fn mc_curve(cfg: &ExperimentConfig, affine: bool, seed: u64) -> Result<CurveEstimate> {
    let parts = dispatch(cfg).run(cfg.mc_samples, seed, |count, rng| Ok(estimate_curve_mc(&cfg.xi, count, affine, rng)))?;
    Ok(parts[1..].iter().fold(parts[0].clone(), |acc, p| acc.merge(p)))
}

/// Rows equally spaced in `1/y` between the bottom of the fundamental
/// domain and `y = 10`, so rows carry comparable mass.
fn modular_partition(n: usize) -> Partition2d {
    let (inv_lo, inv_hi) = (0.1, 2.0 / 3f64.sqrt());
    let ys = (0..=n).map(|k| 1.0 / (inv_hi - (inv_hi - inv_lo) * k as f64 / n as f64)).collect();
    let xs = (0..=n).map(|k| -0.5 + k as f64 / n as f64).collect();
    Partition2d { xs, ys }
}

pub(super) fn lattice_mc(cfg: &ExperimentConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let c0 = mc_curve(cfg, false, derive_seed(seed, "x1"))?;
    let c1 = mc_curve(cfg, true, derive_seed(seed, "x"))?;
    let mut rows = Vec::new();
    let mut cmp = String::from("xi,F0_quad,F_quad,z_F0,z_F\n");
    let mut worst: f64 = 0.0;
    for (k, &xi) in cfg.xi.iter().enumerate() {
        let (q0, q1) = (f0_quadrature(xi)?, f_quadrature(xi)?);
        let exact = |p| Estimate { p, stderr: 0.0, n: 0 };
        let (z0, z1) = (c0.estimates[k].z_distance(&exact(q0)), c1.estimates[k].z_distance(&exact(q1)));
        // zero-variance estimates agree exactly or not at all
        let z0 = if c0.estimates[k].stderr == 0.0 && (c0.estimates[k].p - q0).abs() <= 1e-8 { 0.0 } else { z0 };
        worst = worst.max(z0).max(z1);
        writeln!(cmp, "{xi},{q0},{q1},{z0},{z1}").ok();
        out.metric(format!("z_f0_xi_{xi}"), z0);
        out.metric(format!("z_f_xi_{xi}"), z1);
        rows.push(EstimateRow {
            xi,
            f0: c0.estimates[k],
            f: c1.estimates[k],
        });
    }
    out.check(Check::new("mc_vs_quadrature_max_z", worst, Relation::AtMost, 3.0));
    let boundary = (c0.boundary + c1.boundary) as f64 / (2 * cfg.mc_samples) as f64;
    out.check(Check::new("boundary_fraction", boundary, Relation::AtMost, 1e-6));

    let frames = dispatch(cfg).collect(cfg.mc_samples, derive_seed(seed, "frames"), |count, rng| {
        Ok((0..count).map(|_| sample_frame(rng)).collect())
    })?;
    let xy: Vec<(f64, f64)> = frames.iter().map(|f| (f.x, f.y)).collect();
    let chi = chi_square_2d(&xy, modular_cell_mass, &modular_partition(20), cfg.alpha)?;
    let theta = EmpiricalCdf::new(frames.iter().map(|f| f.theta).collect());
    let kp = kuiper(&theta, |t| (t / (2.0 * PI)).clamp(0.0, 1.0), cfg.alpha)?;
    out.check(Check::verdict("haar_chi_square", &chi, true));
    out.check(Check::verdict("rotation_kuiper", &kp, true));
    out.report("haar_chi_square", chi);
    out.report("rotation_kuiper", kp);

    let mut csv = Vec::new();
    write_estimates_csv(&mut csv, &rows)?;
    out.artifact("lattice-mc.csv", String::from_utf8(csv).expect("ascii"));
    out.artifact("lattice-mc-compare.csv", cmp);
    Ok(())
}

/// First `k` macroscopic segments of billiard paths from generic starts;
/// paths with a flight longer than `t_max` macroscopic units are redrawn.
fn billiard_segments<const K: usize>(cfg: &ExperimentConfig, scat: &ScattererConfig, seed: u64) -> Result<(Vec<[Vec2; K]>, usize)> {
    let rho = scat.rho();
    let cap = 1e3 * cfg.t_max / rho;
    let parts = dispatch(cfg).run(cfg.samples, seed, |count, rng| {
        let mut segs = Vec::with_capacity(count);
        let mut dropped = 0;
        while segs.len() < count {
            let s = initial_state(scat, FplSource::Generic, rng);
            let t = Scene::new(scat, rng.random(), s.q).trajectory(&s, K, cap);
            if t.truncated {
                dropped += 1;
                continue;
            }
            segs.push(std::array::from_fn(|j| rho * t.chain.segments[j]));
        }
        Ok((segs, dropped))
    })?;
    let dropped = parts.iter().map(|p| p.1).sum();
    Ok((parts.into_iter().flat_map(|p| p.0).collect(), dropped))
}

fn flight_segments<const K: usize>(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<[Vec2; K]>> {
    let dist = InitialDistribution::fixed(Vec2::zeros(), DirectionLaw::Uniform);
    dispatch(cfg).collect(cfg.samples, seed, |count, rng| {
        (0..count)
            .map(|_| {
                let st = init_state(&PeriodicKernel, &dist, InitMode::Exact, rng)?;
                let c = generate_chain(&PeriodicKernel, st, K, rng)?;
                Ok(std::array::from_fn(|j| c.segments[j]))
            })
            .collect()
    })
}

fn lengths(segs: &[[Vec2; 2]]) -> Vec<(f64, f64)> {
    segs.iter().map(|s| (s[0].norm(), s[1].norm())).collect()
}

/// Sets for the time-`t` comparison: displacement `x` below or above
/// `split`, velocity in the upper or lower half-plane.
fn comparison_sets(split: f64) -> Vec<PhaseSet> {
    PhaseSet::quadrants(Vec2::new(split, 0.0))
}

/// Direction law for the time-`t` comparison; a sector so that the sets
/// are not equiprobable by symmetry.
const COMPARISON_DIRECTIONS: DirectionLaw = DirectionLaw::Sector { from: 0.0, to: 1.0 };
const COMPARISON_SPLIT: f64 = 0.3;

fn billiard_sets(cfg: &ExperimentConfig, scat: &ScattererConfig, t: f64, sets: &[PhaseSet], seed: u64) -> Result<Vec<Estimate>> {
    let rho = scat.rho();
    let parts = dispatch(cfg).run(cfg.samples, seed, |count, rng| {
        let mut hits = vec![0usize; sets.len()];
        for _ in 0..count {
            let q = random_generic_position(scat, rng);
            let s = MicroState::new(q, COMPARISON_DIRECTIONS.sample(rng));
            let traj = Scene::new(scat, rng.random(), q).trajectory_until(&s, t / rho);
            let (pos, v) = traj.chain.evaluate_at_times(&[t / rho])?[0];
            let disp = rho * (pos - q);
            for (h, set) in hits.iter_mut().zip(sets) {
                *h += usize::from(set.contains(disp, &v));
            }
        }
        Ok(hits)
    })?;
    let total = parts.iter().fold(vec![0usize; sets.len()], |mut acc, h| {
        acc.iter_mut().zip(h).for_each(|(a, b)| *a += b);
        acc
    });
    Ok(total.into_iter().map(|h| Estimate::from_hits(h, cfg.samples)).collect())
}

fn flight_sets(cfg: &ExperimentConfig, t: f64, sets: &[PhaseSet], seed: u64) -> Result<Vec<Estimate>> {
    let dist = InitialDistribution::fixed(Vec2::zeros(), COMPARISON_DIRECTIONS);
    let parts = dispatch(cfg).run(cfg.samples, seed, |count, rng| lt_estimate(&PeriodicKernel, &dist, InitMode::Exact, t, sets, count, rng))?;
    let mut hits = vec![0usize; sets.len()];
    for p in &parts {
        for (h, e) in hits.iter_mut().zip(p) {
            *h += (e.p * e.n as f64).round() as usize;
        }
    }
    Ok(hits.into_iter().map(|h| Estimate::from_hits(h, cfg.samples)).collect())
}

pub(super) fn flight_vs_billiard(cfg: &ExperimentConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let rho = cfg.min_rho();
    let main = cfg.lattice.scatterers(rho)?;
    let alt = cfg.alt_lattice.scatterers(rho)?;
    let (bm, dm) = billiard_segments::<2>(cfg, &main, derive_seed(seed, "billiard-main"))?;
    let (ba, da) = billiard_segments::<2>(cfg, &alt, derive_seed(seed, "billiard-alt"))?;
    let fl = flight_segments::<2>(cfg, derive_seed(seed, "flight"))?;
    out.metric("dropped_paths", (dm + da) as f64);
    let mut ks = String::from("comparison,statistic,p_value,n,m\n");
    let mut record = |out: &mut Outcome, name: &str, r: crate::stats::TestReport| {
        writeln!(ks, "{name},{},{},{},{}", r.statistic, r.p_value, r.n, r.m.unwrap_or(0)).ok();
        out.check(Check::new(name, r.statistic, Relation::Below, 0.03));
        out.report(name, r);
    };
    let (lf, lm, la) = (lengths(&fl), lengths(&bm), lengths(&ba));
    record(out, "ks2d_flight_vs_billiard", ks_2d_two_sample(&lf, &lm, cfg.ks_grid, cfg.alpha)?);
    record(out, "ks2d_lattice_vs_alt", ks_2d_two_sample(&lm, &la, cfg.ks_grid, cfg.alpha)?);
    for j in 0..2 {
        let a = EmpiricalCdf::new(lm.iter().map(|p| if j == 0 { p.0 } else { p.1 }).collect());
        let b = EmpiricalCdf::new(la.iter().map(|p| if j == 0 { p.0 } else { p.1 }).collect());
        record(out, &format!("ks_segment{}_lattice_vs_alt", j + 1), ks_two_sample(&a, &b, cfg.alpha)?);
    }

    let sets = comparison_sets(COMPARISON_SPLIT);
    let t = cfg.time;
    let fe = flight_sets(cfg, t, &sets, derive_seed(seed, "lt-flight"))?;
    let be = billiard_sets(cfg, &main, t, &sets, derive_seed(seed, "lt-billiard"))?;
    let mut csv = String::from("set,x0,x1,a0,a1,flight_p,flight_se,billiard_p,billiard_se,z\n");
    let mut worst: f64 = 0.0;
    for (k, ((set, f), b)) in sets.iter().zip(&fe).zip(&be).enumerate() {
        let z = f.z_distance(b);
        worst = worst.max(z);
        writeln!(
            csv,
            "{k},{},{},{},{},{},{},{},{},{z}",
            set.x[0], set.x[1], set.angle[0], set.angle[1], f.p, f.stderr, b.p, b.stderr
        )
        .ok();
    }
    out.check(Check::new("lt_max_z", worst, Relation::AtMost, 3.0));
    out.artifact("flight-vs-billiard-ks.csv", ks);
    out.artifact("flight-vs-billiard-sets.csv", csv);
    Ok(())
}

fn ensembles(cfg: &ExperimentConfig, kernel: &dyn crate::kernel::CollisionKernel, seed: u64) -> Result<Ensembles> {
    let dist = InitialDistribution::fixed(Vec2::zeros(), DirectionLaw::Uniform);
    let parts = dispatch(cfg).run(cfg.samples, seed, |count, rng: &mut ChaCha8Rng| semigroup_ensembles(kernel, &dist, cfg.s, cfg.time, count, rng))?;
    let mut all = Ensembles::default();
    parts.into_iter().for_each(|p| all.extend(p));
    Ok(all)
}

pub(super) fn semigroup(cfg: &ExperimentConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let k = ensembles(cfg, &PeriodicKernel, derive_seed(seed, "periodic"))?;
    let c = ensembles(cfg, &ExponentialKernel, derive_seed(seed, "exponential"))?;
    let rep = SemigroupReport::new(
        cfg.s,
        cfg.time,
        Divergence::from_ensembles("periodic", &k, cfg.alpha)?,
        Divergence::from_ensembles("exponential", &c, cfg.alpha)?,
    );
    let mut csv = String::from("kernel,observable,statistic,p_value,n\n");
    for d in [&rep.kernel, &rep.control] {
        for (obs, r) in [("free_time", &d.free_time), ("displacement", &d.displacement)] {
            writeln!(csv, "{},{obs},{},{},{}", d.kernel, r.statistic, r.p_value, r.n).ok();
            out.report(format!("{}_{obs}", d.kernel), r.clone());
        }
    }
    out.metric("noise_floor", rep.noise_floor);
    out.metric("periodic_divergence", rep.kernel.max_statistic());
    out.check(Check::new("divergence_over_noise_floor", rep.ratio, Relation::Above, 5.0));
    out.check(Check::new("control_significant_tests", f64::from(u8::from(rep.control.significant())), Relation::AtMost, 0.0));
    out.artifact("semigroup.csv", csv);
    Ok(())
}

pub(super) fn poisson_baseline(cfg: &ExperimentConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let exact = |x: f64| 1.0 - (-2.0 * x).exp();
    let mut csv = String::from("rho,n,ks,p_value,censored\n");
    let mut grid = String::from("rho,xi,empirical,exact\n");
    for rho in sorted_desc(&cfg.rho) {
        let scat = ScattererConfig::poisson(1.0, rho)?;
        let s = billiard_fpl(cfg, &scat, FplSource::Generic, derive_seed(seed, &format!("poisson-{rho}")))?;
        let e = s.ecdf();
        let r = ks_one_sample(&e, exact, cfg.alpha)?;
        writeln!(csv, "{rho},{},{},{},{}", s.n(), r.statistic, r.p_value, s.censored).ok();
        for &xi in &cfg.xi {
            writeln!(grid, "{rho},{xi},{},{}", e.cdf(xi), exact(xi)).ok();
        }
        out.check(Check::new(format!("ks_poisson_rho_{rho}"), r.statistic, Relation::Below, 0.01));
        out.report(format!("ks_poisson_rho_{rho}"), r);
    }
    // The flight process with the exponential kernel has the same law.
    let dist = InitialDistribution::fixed(Vec2::zeros(), DirectionLaw::Uniform);
    let xs = dispatch(cfg).collect(cfg.samples, derive_seed(seed, "exp-flight"), |count, rng| {
        (0..count).map(|_| Ok(init_state(&ExponentialKernel, &dist, InitMode::Exact, rng)?.xi)).collect()
    })?;
    let r = ks_one_sample(&EmpiricalCdf::new(xs), exact, cfg.alpha)?;
    out.check(Check::new("ks_exponential_flight", r.statistic, Relation::Below, 0.01));
    out.report("ks_exponential_flight", r);
    out.artifact("poisson-baseline.csv", csv);
    out.artifact("poisson-ecdf.csv", grid);
    Ok(())
}

pub(super) fn memory_test(cfg: &ExperimentConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let fl = flight_segments::<4>(cfg, derive_seed(seed, "flight"))?;
    let scat = cfg.lattice.scatterers(cfg.min_rho())?;
    let (bl, dropped) = billiard_segments::<4>(cfg, &scat, derive_seed(seed, "billiard"))?;
    out.metric("dropped_paths", dropped as f64);
    // S₄ takes the length of S₁: memory reaching three segments back.
    let neg: Vec<[Vec2; 4]> = fl.iter().map(|s| [s[0], s[1], s[2], s[0].norm() * s[3].normalize()]).collect();
    let mut csv = String::from("source,u_bin,v_bin,count,statistic,p_value\n");
    for (name, segs, want) in [("flight", &fl, true), ("billiard", &bl, true), ("negative_control", &neg, false)] {
        let m = memory_two_test(segs, cfg.bins, cfg.min_cell, cfg.alpha)?;
        for c in &m.cells {
            writeln!(csv, "{name},{},{},{},{},{}", c.u_bin, c.v_bin, c.count, c.statistic, c.p_value).ok();
        }
        out.metric(format!("{name}_underpopulated"), m.underpopulated as f64);
        out.check(Check::verdict(format!("memory_two_{name}"), &m.report, want));
        out.report(format!("memory_two_{name}"), m.report);
    }
    out.artifact("memory-test.csv", csv);
    Ok(())
}

pub(super) fn renormalization_check(cfg: &ExperimentConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let base = cfg.lattice.scatterers(cfg.min_rho())?;
    // Identity on random (q, v, ρ, ξ).
    let mismatch: usize = dispatch(cfg)
        .run(cfg.instances, derive_seed(seed, "identity"), |count, rng| {
            let mut bad = 0;
            for _ in 0..count {
                let q = Vec2::new(rng.random(), rng.random());
                let v = Direction::random(rng);
                let rho = 0.005 + 0.095 * rng.random::<f64>();
                let xi = 0.05 + 4.95 * rng.random::<f64>();
                let (a, b) = renormalize(&base, q, &v, rho, xi)?;
                bad += usize::from(a != b);
            }
            Ok(bad)
        })?
        .into_iter()
        .sum();
    out.check(Check::new("identity_mismatches", mismatch as f64, Relation::AtMost, 0.0));
    let mut csv = String::from("rho,n,agreement\n");
    for rho in sorted_desc(&cfg.rho) {
        let scat = cfg.lattice.scatterers(rho)?;
        let agree: usize = dispatch(cfg)
            .run(cfg.instances, derive_seed(seed, &format!("agree-{rho}")), |count, rng| {
                let mut ok = 0;
                for k in 0..count {
                    let xi = cfg.xi[k % cfg.xi.len()];
                    let q = random_generic_position(&scat, rng);
                    let v = Direction::random(rng);
                    let (_, hit) = renormalize(&scat, q, &v, rho, xi)?;
                    let fp = crate::billiard::free_path(&scat, &MicroState::new(q, v), xi / rho)?;
                    ok += usize::from(hit == fp.is_some_and(|r| rho * r.tau <= xi));
                }
                Ok(ok)
            })?
            .into_iter()
            .sum();
        let rate = agree as f64 / cfg.instances as f64;
        writeln!(csv, "{rho},{},{rate}", cfg.instances).ok();
        out.metric(format!("agreement_rho_{rho}"), rate);
    }
    let smallest = out.metrics[&format!("agreement_rho_{}", cfg.min_rho())];
    out.check(Check::new("agreement_smallest_rho", smallest, Relation::AtLeast, 0.99));
    out.artifact("renormalization.csv", csv);
    Ok(())
}

pub(super) fn trajectory_dump(cfg: &ExperimentConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let rho = cfg.min_rho();
    let scat = cfg.lattice.scatterers(rho)?;
    let mut rng = crate::parallel::block_rng(derive_seed(seed, "billiard"), 0);
    let s = initial_state(&scat, FplSource::Generic, &mut rng);
    let traj = Scene::new(&scat, 0, s.q).trajectory(&s, cfg.collisions, cfg.t_max / rho);
    let mut buf = Vec::new();
    traj.write_csv(&mut buf)?;
    out.artifact("billiard-trajectory.csv", String::from_utf8(buf).expect("ascii"));

    let dist = InitialDistribution::fixed(Vec2::zeros(), DirectionLaw::Uniform);
    let chains: Vec<PathChain> = dispatch(cfg).collect(cfg.paths, derive_seed(seed, "flight"), |count, rng| {
        (0..count)
            .map(|_| {
                let st = init_state(&PeriodicKernel, &dist, InitMode::Exact, rng)?;
                generate_chain(&PeriodicKernel, st, cfg.collisions, rng)
            })
            .collect()
    })?;
    let admissible = chains.iter().all(|c| c.directions().windows(2).all(|w| w[0] != w[1]));
    out.check(Check::new("flight_chains_admissible", f64::from(u8::from(admissible)), Relation::AtLeast, 1.0));
    let mut buf = Vec::new();
    write_chains_csv(&mut buf, &chains)?;
    out.artifact("flight-chains.csv", String::from_utf8(buf).expect("ascii"));
    Ok(())
}
