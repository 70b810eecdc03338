use std::fmt;

use amplispace::continuous::{
    anchor_constant_p, anchor_constant_x, evolve_free, gaussian_wavepacket, marginal_p, marginal_structure, marginal_x,
    phase_space_from_position,
};
use amplispace::entangled::{
    bell_report, chsh, classical_bound, pair_probabilities_vectors, triple_interference, CorrelationRow,
};
use amplispace::spin::{ensemble_marginal_bruteforce, ensemble_marginal_closed, sign_probabilities};
use amplispace::twoslit::{
    decohere_average, fringe_contrast, mixture, pattern_rows, positivity_check, screen_pattern, slit_amplitudes,
    write_pattern_csv,
};
use amplispace::{
    CorrelationTable, DirectionSet, Grid1D, GridWavefunction, PhaseShiftModel, Quaternion, RunMeta, Sign, SlitGeometry,
    SpinEnsemble, UnitVector3,
};
use anyhow::Result;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    ChshArgs, Command, Dump, EvolveArgs, GlobalArgs, Method, PacketArgs, PhaseMode, PhaseSpaceArgs, SingletArgs,
    SpinMarginalArgs, TripleArgs, TwoSlitArgs,
};
use crate::output::{emit, write_table};

/// Bad flag values caught before reaching the library.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_error<T>(msg: impl Into<String>) -> Result<T> {
    Err(InputError(msg.into()).into())
}

pub fn run(command: &Command, global: &GlobalArgs) -> Result<()> {
    match command {
        Command::SpinMarginal(a) => spin_marginal(a, global),
        Command::Singlet(a) => singlet(a, global),
        Command::Chsh(a) => run_chsh(a, global),
        Command::ClassicalCheck(a) => classical_check(a, global),
        Command::Triple(a) => triple(a, global),
        Command::TwoSlit(a) => two_slit(a, global),
        Command::PhaseSpace(a) => phase_space(a, global),
        Command::Evolve(a) => evolve(a, global),
    }
}

fn inputs<T: Serialize>(args: &T, global: &GlobalArgs) -> Result<Value> {
    let mut v = serde_json::to_value(args)?;
    if let Value::Object(map) = &mut v {
        map.insert("planar".into(), json!(global.planar));
    }
    Ok(v)
}

fn document(command: &str, inputs: Value, result: Value) -> Value {
    let mut doc = serde_json::Map::new();
    doc.insert("command".into(), json!(command));
    doc.insert("inputs".into(), inputs);
    if let Value::Object(fields) = result {
        doc.extend(fields);
    }
    Value::Object(doc)
}

fn parse_direction(text: &str, planar: bool) -> Result<UnitVector3> {
    if planar {
        let Ok(deg) = text.trim().parse::<f64>() else {
            return input_error(format!("`{text}` is not an angle in degrees"));
        };
        if !deg.is_finite() {
            return input_error(format!("angle `{text}` must be finite"));
        }
        return Ok(UnitVector3::planar_degrees(deg));
    }
    let parts: Vec<&str> = text.split(',').collect();
    let parsed: Vec<f64> = parts.iter().filter_map(|p| p.trim().parse::<f64>().ok()).collect();
    if parts.len() != 3 || parsed.len() != 3 {
        return input_error(format!(
            "`{text}` is not a direction; use x,y,z or pass --planar with degrees"
        ));
    }
    Ok(UnitVector3::new(parsed[0], parsed[1], parsed[2])?)
}

fn parse_sign(text: &str) -> Result<Sign> {
    Ok(text.parse::<Sign>()?)
}

fn parse_constraint(text: &str) -> Result<(usize, Sign)> {
    let Some((index, sign)) = text.split_once(':') else {
        return input_error(format!("constraint `{text}` must look like INDEX:SIGN, e.g. 0:+"));
    };
    let Ok(index) = index.trim().parse::<usize>() else {
        return input_error(format!("constraint index `{index}` is not a non-negative integer"));
    };
    Ok((index, parse_sign(sign)?))
}

fn quaternion_json(q: Quaternion) -> Value {
    json!(q.components())
}

fn fmt_sign(s: Sign) -> String {
    s.symbol().to_string()
}

fn spin_marginal(args: &SpinMarginalArgs, global: &GlobalArgs) -> Result<()> {
    let dirs = match &args.directions {
        Some(path) => DirectionSet::load(path)?,
        None if args.direction.is_empty() => {
            return input_error("give the directions with --directions FILE or repeated --direction")
        }
        None => DirectionSet::new(
            args.direction
                .iter()
                .map(|d| parse_direction(d, global.planar))
                .collect::<Result<Vec<_>>>()?,
        )?,
    };
    let mut ens = SpinEnsemble::new(dirs);
    for c in &args.constraint {
        let (index, sign) = parse_constraint(c)?;
        ens = ens.with_constraint(index, sign)?;
    }
    let method = match args.method {
        Method::Auto if ens.constraints().len() == 1 => Method::Closed,
        Method::Auto => Method::Brute,
        m => m,
    };
    let (plus, minus) = match method {
        Method::Closed => ensemble_marginal_closed(&ens, args.target)?,
        _ => ensemble_marginal_bruteforce(&ens, args.target)?,
    };
    let (p_plus, p_minus) = sign_probabilities(plus, minus)?;

    let mut echo = inputs(args, global)?;
    echo["resolved_directions"] = json!(ens
        .directions()
        .directions()
        .iter()
        .map(|d| d.to_array())
        .collect::<Vec<_>>());
    let result = json!({
        "method": method,
        "marginal": { "plus": quaternion_json(plus), "minus": quaternion_json(minus) },
        "probabilities": { "plus": p_plus, "minus": p_minus },
    });
    emit(
        global.format,
        global.out.as_deref(),
        document("spin-marginal", echo, result),
        |w| {
            let rows = [(Sign::Plus, plus, p_plus), (Sign::Minus, minus, p_minus)]
                .iter()
                .map(|(s, q, p)| {
                    let mut r = vec![fmt_sign(*s)];
                    r.extend(q.components().iter().map(f64::to_string));
                    r.push(p.to_string());
                    r
                })
                .collect::<Vec<_>>();
            write_table(w, &["sign", "w", "x", "y", "z", "P"], &rows)
        },
    )
}

fn singlet(args: &SingletArgs, global: &GlobalArgs) -> Result<()> {
    let a = parse_direction(&args.a, global.planar)?;
    let b = parse_direction(&args.b, global.planar)?;
    let row = CorrelationRow::new(a, b, pair_probabilities_vectors(a, b)?);
    let result = json!({
        "a": a.to_array(),
        "b": b.to_array(),
        "Ppp": row.ppp,
        "Ppm": row.ppm,
        "Pmp": row.pmp,
        "Pmm": row.pmm,
        "E": row.e,
    });
    emit(
        global.format,
        global.out.as_deref(),
        document("singlet", inputs(args, global)?, result),
        |w| {
            let table = CorrelationTable { rows: vec![row] };
            Ok(table.write_csv(w)?)
        },
    )
}

fn settings(args: &ChshArgs, planar: bool) -> Result<[UnitVector3; 4]> {
    Ok([
        parse_direction(&args.a, planar)?,
        parse_direction(&args.a2, planar)?,
        parse_direction(&args.b, planar)?,
        parse_direction(&args.b2, planar)?,
    ])
}

fn run_chsh(args: &ChshArgs, global: &GlobalArgs) -> Result<()> {
    let [a, a2, b, b2] = settings(args, global.planar)?;
    let report = bell_report(a, a2, b, b2)?;
    let e = report.quantum.correlations;
    let result = json!({
        "S": report.quantum.s,
        "abs_S": report.quantum.abs_s,
        "correlations": { "E_ab": e[0], "E_ab2": e[1], "E_a2b": e[2], "E_a2b2": e[3] },
        "classical_bound": report.classical_bound,
        "tsirelson_bound": 2.0 * std::f64::consts::SQRT_2,
        "gap": report.gap,
        "violates": report.violates,
    });
    emit(
        global.format,
        global.out.as_deref(),
        document("chsh", inputs(args, global)?, result),
        |w| {
            let row: Vec<String> = [
                report.quantum.s,
                report.quantum.abs_s,
                e[0],
                e[1],
                e[2],
                e[3],
                report.classical_bound,
                report.gap,
            ]
            .iter()
            .map(f64::to_string)
            .collect();
            write_table(
                w,
                &[
                    "S",
                    "abs_S",
                    "E_ab",
                    "E_ab2",
                    "E_a2b",
                    "E_a2b2",
                    "classical_bound",
                    "gap",
                ],
                &[row],
            )
        },
    )
}

fn classical_check(args: &ChshArgs, global: &GlobalArgs) -> Result<()> {
    let [a, a2, b, b2] = settings(args, global.planar)?;
    let bound = classical_bound(a, a2, b, b2);
    let quantum = chsh(a, a2, b, b2)?;
    let result = json!({
        "classical_bound": bound.bound,
        "best": bound.best,
        "strategies": bound.strategies,
        "quantum_abs_S": quantum.abs_s,
        "gap": quantum.abs_s - bound.bound,
    });
    emit(
        global.format,
        global.out.as_deref(),
        document("classical-check", inputs(args, global)?, result),
        |w| {
            let rows = bound
                .strategies
                .iter()
                .map(|s| {
                    let mut r: Vec<String> = s.outcomes.iter().map(i8::to_string).collect();
                    r.push(s.s.to_string());
                    r
                })
                .collect::<Vec<_>>();
            write_table(w, &["s_a", "s_a2", "s_b", "s_b2", "S"], &rows)
        },
    )
}

fn triple(args: &TripleArgs, global: &GlobalArgs) -> Result<()> {
    let a = parse_direction(&args.a, global.planar)?;
    let b = parse_direction(&args.b, global.planar)?;
    let c = parse_direction(&args.c, global.planar)?;
    let dirs = DirectionSet::new(vec![a, b, c])?;
    let pick = |s: &Option<String>| -> Result<Vec<Sign>> {
        Ok(match s {
            Some(text) => vec![parse_sign(text)?],
            None => Sign::BOTH.to_vec(),
        })
    };
    let mut cells = Vec::new();
    for s1 in pick(&args.s1)? {
        for s2 in pick(&args.s2)? {
            cells.push(triple_interference(&dirs, 0, 1, 2, s1, s2)?);
        }
    }
    let json_cells: Vec<Value> = cells
        .iter()
        .map(|r| {
            json!({
                "s1": fmt_sign(r.s1),
                "s2": fmt_sign(r.s2),
                "component_norms": r.component_norms,
                "components": r.interference.components,
                "cross": r.interference.cross,
                "bracket": r.interference.bracket,
                "pair_norm_sq": r.pair_norm_sq,
                "discrepancy": r.pair_norm_sq - r.interference.components,
                "pair_probability": r.pair_probability,
                "summed_triple_probability": r.summed_triple_probability,
            })
        })
        .collect();
    let result = json!({
        "dots": { "ab": a.dot(&b), "ac": a.dot(&c), "bc": b.dot(&c) },
        "cells": json_cells,
    });
    emit(
        global.format,
        global.out.as_deref(),
        document("triple", inputs(args, global)?, result),
        |w| {
            let rows = cells
                .iter()
                .map(|r| {
                    let mut row = vec![fmt_sign(r.s1), fmt_sign(r.s2)];
                    row.extend(
                        [
                            r.component_norms[0],
                            r.component_norms[1],
                            r.interference.cross,
                            r.pair_norm_sq,
                            r.pair_probability,
                            r.summed_triple_probability,
                        ]
                        .iter()
                        .map(f64::to_string),
                    );
                    row
                })
                .collect::<Vec<_>>();
            write_table(
                w,
                &[
                    "s1",
                    "s2",
                    "norm_plus3",
                    "norm_minus3",
                    "cross",
                    "pair_norm_sq",
                    "P_pair",
                    "P_summed_triple",
                ],
                &rows,
            )
        },
    )
}

fn two_slit(args: &TwoSlitArgs, global: &GlobalArgs) -> Result<()> {
    let geom = SlitGeometry::new(
        args.separation,
        args.width,
        args.wavelength,
        args.screen_distance,
        args.points,
        args.extent,
    )?;
    let model = match args.phase {
        PhaseMode::Fixed => PhaseShiftModel::Fixed { theta: args.theta },
        PhaseMode::Quadrature => PhaseShiftModel::Quadrature { samples: args.samples },
        PhaseMode::Random => PhaseShiftModel::Random {
            samples: args.samples,
            seed: args.seed,
        },
    };
    model.validate()?;
    let sa = slit_amplitudes(&geom);
    let pattern = match model {
        PhaseShiftModel::Fixed { theta } => screen_pattern(&sa, theta),
        m => decohere_average(&sa, m)?,
    };
    let mix = mixture(&sa);
    let contrast = fringe_contrast(&pattern, &mix);
    let positivity = positivity_check(&sa, args.hidden_size, args.seed)?;
    let rows = pattern_rows(&sa, &pattern);
    let result = json!({
        "fresnel_number": geom.fresnel_number(),
        "fringe_spacing": geom.fringe_spacing(),
        "dx": sa.dx(),
        "phase_model": model,
        "fringe_contrast": contrast,
        "positivity": positivity,
        "pattern": rows,
    });
    emit(
        global.format,
        global.out.as_deref(),
        document("two-slit", inputs(args, global)?, result),
        |w| Ok(write_pattern_csv(w, &geom, &rows)?),
    )
}

fn packet(args: &PacketArgs) -> Result<GridWavefunction> {
    let grid = Grid1D::new(args.points, args.length, args.hbar)?;
    Ok(gaussian_wavepacket(grid, args.center, args.momentum, args.sigma)?)
}

fn phase_space(args: &PhaseSpaceArgs, global: &GlobalArgs) -> Result<()> {
    let psi = packet(&args.packet)?;
    let hbar = args.packet.hbar;
    let z = phase_space_from_position(&psi, args.x0, args.p0)?;
    let mx = marginal_x(&z)?;
    let mp = marginal_p(&z)?;
    let sx = marginal_structure(&mx, &z.psi, -args.p0 / hbar, 1e-6)?;
    let sp = marginal_structure(&mp, &z.xi, args.x0 / hbar, 1e-6)?;
    let result = json!({
        "dx": psi.grid.dx(),
        "dp": psi.grid.dp(),
        "norm_sq": psi.norm_sq(),
        "std_x": psi.std_dev(),
        "std_p": z.xi.std_dev(),
        "anchor_constant_x": anchor_constant_x(&z),
        "anchor_constant_p": anchor_constant_p(&z),
        "marginal_x": sx,
        "marginal_p": sp,
    });
    let meta = RunMeta {
        n: psi.grid.len(),
        length: psi.grid.length(),
        hbar,
        mass: args.packet.mass,
        x0: args.x0,
        p0: args.p0,
    };
    emit(
        global.format,
        global.out.as_deref(),
        document("phase-space", inputs(args, global)?, result),
        |w| {
            match args.dump {
                Dump::PhaseSpace => z.write_csv(w, args.packet.mass)?,
                Dump::MarginalX => mx.write_csv(w, &meta)?,
                Dump::MarginalP => mp.write_csv(w, &meta)?,
            }
            Ok(())
        },
    )
}

fn evolve(args: &EvolveArgs, global: &GlobalArgs) -> Result<()> {
    if args.steps == 0 {
        return input_error("--steps must be at least 1");
    }
    if !args.time.is_finite() {
        return input_error("--time must be finite");
    }
    let p = &args.packet;
    let mut psi = packet(p)?;
    let dt = args.time / args.steps as f64;
    let expected_std =
        |t: f64| p.sigma / 2f64.sqrt() * (1.0 + (p.hbar * t / (p.mass * p.sigma * p.sigma)).powi(2)).sqrt();
    let row = |t: f64, psi: &GridWavefunction| {
        json!({
            "t": t,
            "mean": psi.mean(),
            "expected_mean": p.center + p.momentum * t / p.mass,
            "std_dev": psi.std_dev(),
            "expected_std_dev": expected_std(t),
            "norm_sq": psi.norm_sq(),
        })
    };
    let mut trajectory = vec![row(0.0, &psi)];
    for k in 1..=args.steps {
        psi = evolve_free(&psi, p.mass, dt)?;
        trajectory.push(row(dt * k as f64, &psi));
    }
    let result = json!({ "dt": dt, "trajectory": trajectory });
    let meta = RunMeta {
        n: p.points,
        length: p.length,
        hbar: p.hbar,
        mass: p.mass,
        x0: p.center + p.momentum * args.time / p.mass,
        p0: p.momentum,
    };
    emit(
        global.format,
        global.out.as_deref(),
        document("evolve", inputs(args, global)?, result),
        |w| Ok(psi.write_csv(w, &meta)?),
    )
}
