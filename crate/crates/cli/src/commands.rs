use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use wirescatter::confinement::channels_from_k0;
use wirescatter::freescatt::{low_energy_coefficient, phase_table, scattering_length, PhaseShifts};
use wirescatter::solver::{
    amplitudes, bound_state, cir_comparison, conservation_residual, find_pole, g1d, single_mode_point,
    solve_t, SolveOptions, G1d, DEFAULT_L_MAX,
};
use wirescatter::{CouplingContext, LowEnergyPhaseShifts, ModeSet, PotentialPhaseShifts, Sector};

use crate::config::{Format, SectorSpec, SweepVariable, Validated};
use crate::{CliError, Command};

pub const FORMAT_TAG: &str = "wirescatter-v1";

/// Rows whose conservation residual reaches this are flagged.
pub const RESIDUAL_FLAG: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub l_max: Option<usize>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub warnings: Vec<String>,
    pub written_to: Option<PathBuf>,
}

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// A table with a fixed header; renders to either output format.
struct Table {
    subcommand: &'static str,
    metadata: Vec<(&'static str, Value)>,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    records: Vec<Value>,
}

impl Table {
    fn render(self, format: Format, warnings: &[String], skipped: &[f64]) -> Result<String, CliError> {
        match format {
            Format::Csv => {
                let mut out = format!("# {FORMAT_TAG}\n");
                for (k, v) in &self.metadata {
                    out.push_str(&format!("# {k}={v}\n"));
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                let csv_err = |e: csv::Error| CliError::Io { context: "csv output".into(), source: e.into() };
                w.write_record(&self.header).map_err(csv_err)?;
                for r in &self.rows {
                    w.write_record(r).map_err(csv_err)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Io { context: "csv output".into(), source: e.into_error() })?;
                out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
                Ok(out)
            }
            Format::Json => {
                let meta: serde_json::Map<String, Value> =
                    self.metadata.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
                let doc = json!({
                    "format": FORMAT_TAG,
                    "subcommand": self.subcommand,
                    "metadata": meta,
                    "warnings": warnings,
                    "skipped": skipped,
                    "records": self.records,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
                s.push('\n');
                Ok(s)
            }
        }
    }
}

fn need(cond: bool, msg: &str) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(vec![msg.to_string()]))
    }
}

fn sweep_variable(v: &Validated) -> Option<SweepVariable> {
    v.config.sweep.as_ref().map(|s| s.variable)
}

fn base_metadata(v: &Validated) -> Vec<(&'static str, Value)> {
    let mut m = vec![("d_u", json!(v.d_u_native)), ("cprime", json!(v.modes.cprime()))];
    if let Some(u) = &v.config.units {
        m.push(("length_unit", json!(u.length_unit)));
    }
    m
}

/// Runs one subcommand. Sweep points are solved in parallel and assembled in
/// grid order.
pub fn run(cmd: Command, v: &Validated, opts: &RunOptions) -> Result<Output, CliError> {
    let mut warnings = v.warnings.clone();
    let table = match cmd {
        Command::Modes => modes_table(v),
        Command::Phaseshifts => return phaseshifts(v, opts, warnings),
        Command::Amplitudes => amplitudes_table(v, opts, &mut warnings)?,
        Command::Cir => cir_table(v)?,
        Command::Bound => bound_table(v)?,
        Command::Pole => pole_table(v, opts)?,
    };
    let text = table.render(opts.format, &warnings, &v.skipped)?;
    Ok(Output { text, warnings, written_to: None })
}

fn modes_table(v: &Validated) -> Table {
    let m = &v.modes;
    let eps0 = m.eps[0];
    let rows = (0..m.len())
        .map(|n| vec![n.to_string(), num(m.q[n]), num(m.eps[n] / eps0), num(m.phi0sq[n])])
        .collect();
    let records = (0..m.len())
        .map(|n| json!({"n": n, "q_n": m.q[n], "eps_over_eps0": m.eps[n] / eps0, "phi0_sq": m.phi0sq[n]}))
        .collect();
    let mut metadata = base_metadata(v);
    metadata.push(("r_u", json!(m.r_u)));
    Table { subcommand: "modes", metadata, header: vec!["n", "q_n", "eps_over_eps0", "phi0_sq"], rows, records }
}

fn phaseshifts(v: &Validated, opts: &RunOptions, mut warnings: Vec<String>) -> Result<Output, CliError> {
    let pot = v.potential.as_ref().ok_or_else(|| CliError::Config(vec!["phaseshifts needs a potential".into()]))?;
    need(sweep_variable(v) == Some(SweepVariable::K), "phaseshifts needs a sweep over k")?;
    let mut grid = v.grid.clone();
    if grid.len() > 1 && grid[1] < grid[0] {
        grid.reverse();
    }
    let table = phase_table(pot, opts.l_max.unwrap_or(DEFAULT_L_MAX), &grid)?;
    warnings.extend(table.warnings.iter().cloned());
    let text = match opts.format {
        Format::Csv => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("csv output is utf-8")
        }
        Format::Json => {
            let mut records = Vec::new();
            for l in 0..=table.l_max {
                for (i, k) in table.k_grid.iter().enumerate() {
                    records.push(json!({"l": l, "k": k, "delta": table.delta[l][i]}));
                }
            }
            let doc = json!({
                "format": FORMAT_TAG,
                "subcommand": "phaseshifts",
                "metadata": table.sidecar_json(),
                "warnings": warnings,
                "records": records,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
            s.push('\n');
            s
        }
    };
    Ok(Output { text, warnings, written_to: None })
}

enum Source {
    LowEnergy(LowEnergyPhaseShifts),
    Potential(PotentialPhaseShifts),
}

impl Source {
    fn get(&self) -> &dyn PhaseShifts<f64> {
        match self {
            Source::LowEnergy(s) => s,
            Source::Potential(s) => s,
        }
    }
}

struct AmpPoint {
    k0_over_q0: f64,
    a: Option<f64>,
    n_open: usize,
    f_plus: Vec<Complex64>,
    f_minus: Vec<Complex64>,
    f0g: Complex64,
    f0u: Complex64,
    delta_g: Option<f64>,
    delta_u: Option<f64>,
    residual: f64,
    warnings: Vec<String>,
}

fn amplitude_point(
    modes: &ModeSet,
    src: &dyn PhaseShifts<f64>,
    k0_over_q0: f64,
    a: Option<f64>,
    l_max: usize,
) -> Result<AmpPoint, CliError> {
    let k0 = k0_over_q0 * modes.q0();
    let ch = channels_from_k0(modes, k0)?;
    if ch.n_e == 0 {
        let p = single_mode_point(modes, src, k0, l_max)?;
        let amp = p.amplitudes;
        return Ok(AmpPoint {
            k0_over_q0,
            a,
            n_open: 1,
            f_plus: amp.f_plus,
            f_minus: amp.f_minus,
            f0g: amp.f0g,
            f0u: amp.f0u,
            delta_g: amp.delta_g,
            delta_u: amp.delta_u,
            residual: p.residual.total,
            warnings: p.warnings.iter().map(|w| format!("k0/q0 = {k0_over_q0}: {w}")).collect(),
        });
    }
    let n_open = ch.n_e + 1;
    let ctx = CouplingContext::new(modes, ch)?;
    let mut b = vec![Complex64::new(0.0, 0.0); n_open];
    b[0] = Complex64::new(1.0, 0.0);
    let sol = solve_t(&ctx, src, &b, l_max, SolveOptions::default())?;
    let amp = amplitudes(&sol, &ctx)?;
    let res = conservation_residual(&amp, &ctx.ch.k_n, &b);
    Ok(AmpPoint {
        k0_over_q0,
        a,
        n_open,
        f_plus: amp.f_plus,
        f_minus: amp.f_minus,
        f0g: amp.f0g,
        f0u: amp.f0u,
        delta_g: amp.delta_g,
        delta_u: amp.delta_u,
        residual: res.total,
        warnings: Vec::new(),
    })
}

fn amplitudes_table(v: &Validated, opts: &RunOptions, warnings: &mut Vec<String>) -> Result<Table, CliError> {
    let l_max = opts.l_max.unwrap_or(DEFAULT_L_MAX);
    let points: Vec<(f64, Option<f64>, Arc<Source>)> = match sweep_variable(v) {
        Some(SweepVariable::K0) => {
            let (src, a) = if let Some(c) = &v.low_energy {
                (Source::LowEnergy(LowEnergyPhaseShifts::new(c.clone())), Some(c[0]))
            } else if let Some(p) = &v.potential {
                let a = scattering_length(p)?.value;
                (Source::Potential(PotentialPhaseShifts::new(p.clone())), Some(a))
            } else {
                return Err(CliError::Config(vec!["amplitudes needs a potential or low_energy block".into()]));
            };
            let shared = Arc::new(src);
            v.grid.iter().map(|&k| (k, a, shared.clone())).collect()
        }
        Some(SweepVariable::A) => {
            let k0 = v
                .config
                .k0
                .ok_or_else(|| CliError::Config(vec!["scattering-length sweeps of amplitudes need `k0`".into()]))?;
            let rest = v.low_energy.clone().unwrap_or_else(|| vec![0.0, 0.0]);
            v.grid
                .iter()
                .map(|&a| {
                    let mut c = rest.clone();
                    c[0] = a;
                    (k0, Some(a), Arc::new(Source::LowEnergy(LowEnergyPhaseShifts::new(c))))
                })
                .collect()
        }
        _ => return Err(CliError::Config(vec!["amplitudes needs a sweep over k0 or a".into()])),
    };
    amplitudes_over(v, l_max, warnings, points)
}

fn amplitudes_over(
    v: &Validated,
    l_max: usize,
    warnings: &mut Vec<String>,
    points: Vec<(f64, Option<f64>, Arc<Source>)>,
) -> Result<Table, CliError> {
    let results: Vec<Option<AmpPoint>> = points
        .par_iter()
        .map(|(k0, a, src)| {
            if v.skipped.contains(k0) {
                return Ok(None);
            }
            amplitude_point(&v.modes, src.get(), *k0, *a, l_max).map(Some)
        })
        .collect::<Result<_, CliError>>()?;
    let header = vec![
        "k0_over_q0", "a_over_du", "n_open", "re_f_plus", "im_f_plus", "re_f_minus", "im_f_minus", "re_f0g",
        "im_f0g", "re_f0u", "im_f0u", "delta_g", "delta_u", "residual", "flag",
    ];
    let mut rows = Vec::with_capacity(points.len());
    let mut records = Vec::with_capacity(points.len());
    let mut flagged = 0;
    for ((k0, a, _), r) in points.iter().zip(results) {
        let Some(p) = r else {
            let mut row = vec![num(*k0), opt(*a)];
            row.extend(std::iter::repeat_n(String::new(), 12));
            row.push("threshold".into());
            rows.push(row);
            records.push(json!({"inputs": {"k0_over_q0": k0, "a_over_du": a}, "flag": "threshold"}));
            continue;
        };
        warnings.extend(p.warnings);
        let flag = if p.residual < RESIDUAL_FLAG { "ok" } else { "residual" };
        if flag != "ok" {
            flagged += 1;
        }
        let (fp, fm) = (p.f_plus[0], p.f_minus[0]);
        rows.push(vec![
            num(p.k0_over_q0),
            opt(p.a),
            p.n_open.to_string(),
            num(fp.re),
            num(fp.im),
            num(fm.re),
            num(fm.im),
            num(p.f0g.re),
            num(p.f0g.im),
            num(p.f0u.re),
            num(p.f0u.im),
            opt(p.delta_g),
            opt(p.delta_u),
            num(p.residual),
            flag.into(),
        ]);
        records.push(json!({
            "inputs": {"k0_over_q0": p.k0_over_q0, "a_over_du": p.a, "l_max": l_max},
            "f_plus": p.f_plus.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
            "f_minus": p.f_minus.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
            "f0g": cjson(p.f0g),
            "f0u": cjson(p.f0u),
            "delta_g": p.delta_g,
            "delta_u": p.delta_u,
            "residual": p.residual,
            "flag": flag,
        }));
    }
    if flagged > 0 {
        warnings.push(format!("{flagged} row(s) have a conservation residual of at least {RESIDUAL_FLAG:e}"));
    }
    let mut metadata = base_metadata(v);
    metadata.push(("l_max", json!(l_max)));
    Ok(Table { subcommand: "amplitudes", metadata, header, rows, records })
}

fn cir_table(v: &Validated) -> Result<Table, CliError> {
    need(sweep_variable(v) == Some(SweepVariable::A), "cir needs a sweep over a")?;
    let cmp = cir_comparison(&v.modes);
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &a in &v.grid {
        let (val, status) = match g1d(a, &v.modes) {
            G1d::Finite(g) => (Some(g), "finite"),
            G1d::Resonance => (None, "resonance"),
        };
        rows.push(vec![num(a), opt(val), status.into()]);
        records.push(json!({"a_over_du": a, "g1d": val, "status": status}));
    }
    let mut metadata = base_metadata(v);
    metadata.extend([
        ("a_star_over_du", json!(cmp.a_star)),
        ("a_star_pseudo_over_du", json!(cmp.a_star_pseudo)),
        ("c_pseudo", json!(cmp.c_pseudo)),
        ("fractional_shift", json!(cmp.fractional_shift)),
    ]);
    Ok(Table { subcommand: "cir", metadata, header: vec!["a_over_du", "g1d", "status"], rows, records })
}

fn bound_table(v: &Validated) -> Result<Table, CliError> {
    need(sweep_variable(v) == Some(SweepVariable::A), "bound needs a sweep over a (in units of d_U)")?;
    let states = v
        .grid
        .par_iter()
        .map(|&s| bound_state(s, &v.modes))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = states.iter().map(|b| vec![num(b.s), num(b.x_b), num(b.e_b_over_eps0)]).collect();
    let records =
        states.iter().map(|b| json!({"s": b.s, "x_B": b.x_b, "E_B_over_eps0": b.e_b_over_eps0})).collect();
    Ok(Table {
        subcommand: "bound",
        metadata: base_metadata(v),
        header: vec!["s", "x_b", "e_b_over_eps0"],
        rows,
        records,
    })
}

fn pole_table(v: &Validated, opts: &RunOptions) -> Result<Table, CliError> {
    let spec = v.config.pole.as_ref().ok_or_else(|| CliError::Config(vec!["pole needs a `pole` block".into()]))?;
    let sector = match spec.sector {
        SectorSpec::Even => Sector::Even,
        SectorSpec::Odd => Sector::Odd,
    };
    let l_max = opts.l_max.unwrap_or(DEFAULT_L_MAX);
    let coeffs = match (&v.low_energy, &v.potential) {
        (Some(c), _) => c.clone(),
        (None, Some(p)) => (0..=l_max)
            .map(|l| low_energy_coefficient(p, l).map(|e| e.value))
            .collect::<Result<Vec<_>, _>>()?,
        (None, None) => return Err(CliError::Config(vec!["pole needs a potential or low_energy block".into()])),
    };
    let a = coeffs[0];
    let q0 = v.modes.q0();
    let seed = match spec.seed {
        Some([re, im]) => Complex64::new(re * q0, im * q0),
        None if sector == Sector::Even && a != 0.0 => {
            let bs = bound_state(a / v.modes.d_u, &v.modes)?;
            Complex64::new(0.0, bs.decay)
        }
        None => return Err(CliError::Config(vec!["pole needs a seed for this sector".into()])),
    };
    let src = LowEnergyPhaseShifts::new(coeffs);
    let p = find_pole(&v.modes, &src, sector, seed, l_max)?;
    let exploratory = l_max > 0 || sector == Sector::Odd;
    let x_b = (a != 0.0 && sector == Sector::Even).then(|| p.x_b(a));
    let e_over = p.energy.re / v.modes.eps[0];
    let name = match sector {
        Sector::Even => "even",
        Sector::Odd => "odd",
    };
    let rows = vec![vec![
        name.into(),
        l_max.to_string(),
        num(p.k0.re / q0),
        num(p.k0.im / q0),
        opt(x_b),
        num(e_over),
        p.iterations.to_string(),
        exploratory.to_string(),
    ]];
    let records = vec![json!({
        "sector": name,
        "l_max": l_max,
        "k0_over_q0": [p.k0.re / q0, p.k0.im / q0],
        "x_B": x_b,
        "E_over_eps0": e_over,
        "iterations": p.iterations,
        "exploratory": exploratory,
    })];
    Ok(Table {
        subcommand: "pole",
        metadata: base_metadata(v),
        header: vec![
            "sector", "l_max", "re_k0_over_q0", "im_k0_over_q0", "x_b", "e_over_eps0", "iterations", "exploratory",
        ],
        rows,
        records,
    })
}
