use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use grf_core::equilibria::{is_z3, residual_report, ANALYTIC_TOL, SIMULATED_TOL};
use grf_core::group::{right_cosets, subgroup_of_square};
use grf_core::{
    classify, null_space, nullity_bruteforce, parse_group_spec, simulate, skew, z3_classify, Ensemble,
    EquilibriumReport, Error, FiniteGroup, Result, SimConfig, Trajectory, Z3Class,
};
use log::{debug, info};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{ClassifyArgs, Format, GroupInfoArgs, RunArgs, SimulateArgs, SweepArgs};
use crate::envelope::{AnyEnsemble, EnvelopeScalar, Meta, StateEnvelope};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DIVERGED: u8 = 2;
pub const EXIT_NOT_EQUILIBRIUM: u8 = 3;

fn sim_config(run: &RunArgs) -> Result<SimConfig> {
    let cfg = SimConfig {
        dt: run.dt,
        t_final: run.t_final,
        renormalize: run.renormalize,
        record_every: run.record_every,
        seed: run.seed,
        ..SimConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

/// Trajectory CSV with times shifted by `t0`.
fn shifted_csv<T: EnvelopeScalar>(tr: &Trajectory<T>, t0: f64) -> String {
    if t0 == 0.0 {
        return tr.to_csv();
    }
    let mut out = String::from(grf_core::Diagnostics::CSV_HEADER);
    out.push('\n');
    for r in &tr.records {
        let mut r = *r;
        r.t += t0;
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

struct RunOutput {
    csv: String,
    final_state: AnyEnsemble,
    last: grf_core::Diagnostics,
    converged_at: Option<f64>,
}

fn run_typed<T: EnvelopeScalar>(
    ens: &Ensemble<T>,
    cfg: &SimConfig,
    t0: f64,
    wrap: fn(Ensemble<T>) -> AnyEnsemble,
) -> Result<RunOutput> {
    let tr = simulate(ens, cfg)?;
    Ok(RunOutput {
        csv: shifted_csv(&tr, t0),
        last: *tr.last(),
        converged_at: tr.converged_at.map(|t| t + t0),
        final_state: wrap(tr.final_state),
    })
}

fn run_any(ens: &AnyEnsemble, cfg: &SimConfig, t0: f64) -> Result<RunOutput> {
    match ens {
        AnyEnsemble::Real(e) => run_typed(e, cfg, t0, AnyEnsemble::Real),
        AnyEnsemble::Complex(e) => run_typed(e, cfg, t0, AnyEnsemble::Complex),
    }
}

fn n_agents(ens: &AnyEnsemble) -> usize {
    match ens {
        AnyEnsemble::Real(e) => e.n_agents(),
        AnyEnsemble::Complex(e) => e.n_agents(),
    }
}

pub fn simulate_cmd(a: &SimulateArgs) -> Result<u8> {
    let cfg = sim_config(&a.run)?;
    let (ens, group_spec, seed, t0) = match &a.init {
        Some(path) => {
            let env = StateEnvelope::read(path)?;
            let mut ens = env.ensemble()?;
            if let Some(spec) = &a.group {
                let want = parse_group_spec(spec)?;
                if !want.same_structure(&*env.group()?) {
                    return Err(Error::InvalidParameter(format!(
                        "--group {spec} does not match the group {} of {}",
                        env.group_spec,
                        path.display()
                    )));
                }
            }
            if let Some(n) = a.n_agents {
                if n != n_agents(&ens) {
                    return Err(Error::InvalidParameter(format!(
                        "--n-agents {n} does not match the {} agents of {}",
                        n_agents(&ens),
                        path.display()
                    )));
                }
            }
            if let Some(k) = a.kappa {
                ens = ens.with_kappa(k)?;
            }
            (ens, env.group_spec, env.meta.seed, env.meta.t)
        }
        None => {
            let spec = a
                .group
                .as_deref()
                .ok_or_else(|| Error::InvalidParameter("--group is required without --init".into()))?;
            let n = a
                .n_agents
                .ok_or_else(|| Error::InvalidParameter("--n-agents is required without --init".into()))?;
            let group = Arc::new(parse_group_spec(spec)?);
            let kappa = a.kappa.unwrap_or(1.0);
            let ens = AnyEnsemble::random(&group, a.run.field.into(), n, kappa, a.run.seed)?;
            (ens, spec.to_string(), Some(a.run.seed), 0.0)
        }
    };
    info!(
        "simulate {} {} N={} dt={} T={}",
        group_spec,
        ens.field_mode().as_str(),
        n_agents(&ens),
        cfg.dt,
        cfg.t_final
    );
    let out = run_any(&ens, &cfg, t0)?;
    write_file(&a.out, &out.csv)?;
    if let Some(path) = &a.snapshot_out {
        let meta = Meta {
            seed,
            t: t0 + cfg.t_final,
            source: Some("simulate".into()),
            dt: Some(cfg.dt),
            renormalize: Some(cfg.renormalize),
        };
        StateEnvelope::from_any(&out.final_state, &group_spec, meta).write(path)?;
    }
    let d = &out.last;
    println!(
        "t={} R2={} V={} residual={} converged_at={}",
        d.t + t0,
        d.r2,
        d.v,
        d.residual,
        out.converged_at.map_or("none".to_string(), |t| t.to_string())
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ClassifyOutput<'a> {
    group: &'a str,
    field_mode: &'a str,
    report: &'a EquilibriumReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    z3_class: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
}

const COMPLEX_NOTE: &str =
    "per-element classification is defined for real coefficients only; equilibrium is decided by the residual";

pub fn classify_cmd(a: &ClassifyArgs) -> Result<u8> {
    let env = StateEnvelope::read(&a.state)?;
    let ens = env.ensemble()?;
    let tol = a.tol.unwrap_or(if env.meta.source.as_deref() == Some("simulate") {
        SIMULATED_TOL
    } else {
        ANALYTIC_TOL
    });
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "--tol must be a nonnegative number, got {tol}"
        )));
    }
    let (report, z3, note) = match &ens {
        AnyEnsemble::Real(e) => {
            let z3 = if is_z3(e.group()) {
                Some(z3_classify(e, tol)?)
            } else {
                None
            };
            (classify(e, tol)?, z3, None)
        }
        AnyEnsemble::Complex(e) => (residual_report(e, tol), None, Some(COMPLEX_NOTE)),
    };
    match a.format {
        Format::Json => {
            let out = ClassifyOutput {
                group: &env.group_spec,
                field_mode: env.field_mode.as_str(),
                report: &report,
                z3_class: z3.map(Z3Class::as_str),
                note,
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&out).map_err(|e| Error::Syntax(e.to_string()))?
            );
        }
        Format::Text => print!("{}", report_text(&env, &report, z3, note)),
    }
    Ok(if report.is_equilibrium {
        EXIT_OK
    } else {
        EXIT_NOT_EQUILIBRIUM
    })
}

fn report_text(env: &StateEnvelope, r: &EquilibriumReport, z3: Option<Z3Class>, note: Option<&str>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "group: {} ({})", env.group_spec, env.field_mode.as_str());
    let _ = writeln!(s, "residual: {:e}", r.residual);
    let _ = writeln!(s, "tolerance: {:e}", r.tolerance);
    let _ = writeln!(s, "equilibrium: {}", if r.is_equilibrium { "yes" } else { "no" });
    let _ = writeln!(s, "zero centroid: {}", if r.global_zero { "yes" } else { "no" });
    for e in &r.elements {
        let _ = writeln!(
            s,
            "g={:<6} label={:<4} null_check={:e} max_defect={:e}",
            e.g_name, e.label, e.null_check_value, e.max_orthogonality_defect
        );
    }
    if let Some(c) = z3 {
        let _ = writeln!(s, "z3 class: {}", c.as_str());
    }
    if let Some(n) = note {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

fn is_cyclic_spec(label: &str) -> bool {
    label.starts_with('Z') && !label.contains('x')
}

fn names(g: &FiniteGroup, ids: &[grf_core::GroupElementId]) -> String {
    ids.iter().map(|&x| g.name(x)).collect::<Vec<_>>().join(", ")
}

pub fn group_info_text(spec: &str) -> Result<(String, bool)> {
    let g = Arc::new(parse_group_spec(spec)?);
    let mut s = String::new();
    let mut consistent = true;
    let _ = writeln!(s, "group: {}", g.render());
    let _ = writeln!(s, "order: {}", g.order());
    let _ = writeln!(s, "abelian: {}", if g.is_abelian() { "yes" } else { "no" });
    let width = g.names().iter().map(String::len).max().unwrap_or(1);
    let _ = writeln!(s, "cayley table:");
    let _ = write!(s, "  {:>width$} |", "*");
    for b in g.elements() {
        let _ = write!(s, " {:>width$}", g.name(b));
    }
    let _ = writeln!(s);
    for a in g.elements() {
        let _ = write!(s, "  {:>width$} |", g.name(a));
        for b in g.elements() {
            let _ = write!(s, " {:>width$}", g.name(g.mul(a, b)));
        }
        let _ = writeln!(s);
    }
    let _ = writeln!(s, "elements:");
    let mut rows = Vec::new();
    for a in g.elements() {
        let h = subgroup_of_square(&g, a)?;
        let cosets = right_cosets(&g, &h);
        let formula = g.order() / h.order();
        let coset = null_space(&g, a)?.nullity();
        let brute = nullity_bruteforce(&g, a)?;
        let ok = formula == coset && coset == brute;
        consistent &= ok;
        let _ = writeln!(s, "  g={}", g.name(a));
        let _ = writeln!(s, "    inverse: {}", g.name(g.inverse(a)));
        let _ = writeln!(s, "    order: {}", g.element_order(a));
        let _ = writeln!(s, "    H(g): {{{}}}", names(&g, h.members()));
        let _ = writeln!(s, "    |H(g)|: {}", h.order());
        let blocks: Vec<String> = cosets.iter().map(|c| format!("{{{}}}", names(&g, c))).collect();
        let _ = writeln!(s, "    right cosets: {}", blocks.join(" "));
        let _ = writeln!(
            s,
            "    skew zero: {}",
            if skew(&g, a)?.is_zero() { "yes" } else { "no" }
        );
        let _ = writeln!(
            s,
            "    nullity: {formula} (coset formula), {brute} (integer rank){}",
            if ok { "" } else { "  MISMATCH" }
        );
        rows.push((a, brute));
    }
    let _ = writeln!(s, "nullities:");
    let cyclic = is_cyclic_spec(g.render());
    for (a, n) in rows {
        if cyclic {
            let _ = writeln!(s, "  m={}: {n}", a.index());
        } else {
            let _ = writeln!(s, "  {}: {n}", g.name(a));
        }
    }
    Ok((s, consistent))
}

pub fn group_info_cmd(a: &GroupInfoArgs) -> Result<u8> {
    let (text, consistent) = group_info_text(&a.group)?;
    print!("{text}");
    if !consistent {
        eprintln!("error: coset-formula and integer-rank nullities disagree");
        return Ok(EXIT_USAGE);
    }
    Ok(EXIT_OK)
}

/// Inclusive grid `lo:hi:step`.
pub fn parse_kappa_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Syntax(format!("--kappa expects lo:hi:step, got {text:?}"));
    let [lo, hi, step] = parts.as_slice() else {
        return Err(bad());
    };
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
        return Err(Error::InvalidParameter(format!(
            "empty kappa range {text:?}: need finite lo <= hi and step > 0"
        )));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

pub const SUMMARY_HEADER: &str = "kappa,trial,final_R2,final_V,final_residual,converged_at_t";

pub fn sweep_cmd(a: &SweepArgs) -> Result<u8> {
    let grid = parse_kappa_grid(&a.kappa)?;
    if a.trials == 0 {
        return Err(Error::InvalidParameter("--trials must be at least 1".into()));
    }
    let cfg = sim_config(&a.run)?;
    let group = Arc::new(parse_group_spec(&a.group)?);
    std::fs::create_dir_all(&a.out).map_err(|e| Error::Io(format!("cannot create {}: {e}", a.out.display())))?;
    let jobs: Vec<(usize, f64, usize)> = grid
        .iter()
        .enumerate()
        .flat_map(|(ki, &k)| (0..a.trials).map(move |t| (ki, k, t)))
        .collect();
    info!("sweep {} over {} jobs", a.group, jobs.len());
    let rows = jobs
        .par_iter()
        .map(|&(ki, kappa, trial)| -> Result<String> {
            let seed = a.run.seed.wrapping_add(trial as u64);
            let ens = AnyEnsemble::random(&group, a.run.field.into(), a.n_agents, kappa, seed)?;
            let out = run_any(&ens, &cfg, 0.0)?;
            let path = a.out.join(format!("kappa_{ki:03}_trial_{trial:03}.csv"));
            write_file(&path, &out.csv)?;
            debug!("wrote {}", path.display());
            let d = &out.last;
            Ok(format!(
                "{kappa},{trial},{},{},{},{}",
                d.r2,
                d.v,
                d.residual,
                out.converged_at.map_or(String::new(), |t| t.to_string())
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    for r in rows {
        summary.push_str(&r);
        summary.push('\n');
    }
    let path = a.out.join("summary.csv");
    write_file(&path, &summary)?;
    println!("{}", path.display());
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_grid_is_inclusive() {
        assert_eq!(parse_kappa_grid("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        let g = parse_kappa_grid("0.1:0.3:0.1").unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(parse_kappa_grid("2:2:1").unwrap(), vec![2.0]);
    }

    #[test]
    fn bad_kappa_grids() {
        assert!(parse_kappa_grid("1:0:0.1").is_err());
        assert!(parse_kappa_grid("0:1:0").is_err());
        assert!(parse_kappa_grid("0:1").is_err());
        assert!(parse_kappa_grid("a:b:c").is_err());
    }

    #[test]
    fn group_info_reports_cyclic_nullities() {
        let (text, ok) = group_info_text("Z6").unwrap();
        assert!(ok);
        assert!(text.contains("  m=1: 2\n"));
        assert!(text.contains("  m=0: 6\n"));
        let (text, _) = group_info_text("Z5").unwrap();
        for m in 1..5 {
            assert!(text.contains(&format!("  m={m}: 1\n")));
        }
        let (text, ok) = group_info_text("Z2xZ2").unwrap();
        assert!(ok);
        assert_eq!(text.matches("skew zero: yes").count(), 4);
        assert_eq!(text.matches("nullity: 4 (coset formula), 4 (integer rank)").count(), 4);
    }

    #[test]
    fn group_info_on_nonabelian_groups() {
        let (text, ok) = group_info_text("S3").unwrap();
        assert!(ok);
        assert!(text.contains("abelian: no"));
        assert!(!text.contains("MISMATCH"));
    }
}
