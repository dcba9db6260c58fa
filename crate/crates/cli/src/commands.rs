use std::path::Path;

use cpinf_core::clusters::{additivity_report, cluster_criticality, detect_clusters};
use cpinf_core::integrals::{fit_multiplier, grad_hamiltonian, residual_from_gradient};
use cpinf_core::io::{parse_record, parse_sequence, to_json, StateRecord};
use cpinf_core::sequences::{classify, diagnose, ClassifyOptions, DiagnosticRow};
use cpinf_core::state::{angular_momentum, inertia, iz_kz, kinetic};
use cpinf_core::{
    bifurcation_values, generate_horizontal, reduce_two_body, solve_relative_equilibrium, to_multiplier_coordinates,
    Multiplier, Schedule, State, System,
};
use serde_json::{json, Value};

use crate::output::{create, print_json, print_text, read, sci, table, write_all, CliError};
use crate::{Format, SequenceArgs};

pub fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b] = parts[..] else {
        return Err(format!("expected two comma-separated indices, got '{s}'"));
    };
    let parse = |t: &str| t.parse::<usize>().map_err(|_| format!("'{t}' is not a body index"));
    let (i, j) = (parse(a)?, parse(b)?);
    if i == 0 || j == 0 || i == j {
        return Err("indices are 1-based and must differ".into());
    }
    Ok((i, j))
}

pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(v).map_err(|_| format!("expected three comma-separated numbers, got '{s}'"))
}

fn load_system(path: &Path) -> Result<System, CliError> {
    Ok(parse_record(&read(path)?)?.system()?)
}

fn zero_based(sys: &System, pair: (usize, usize)) -> Result<(usize, usize), CliError> {
    for i in [pair.0, pair.1] {
        if i > sys.n() {
            return Err(cpinf_core::Error::InvalidArgument(format!("body {i} does not exist in a {}-body system", sys.n())).into());
        }
    }
    Ok((pair.0 - 1, pair.1 - 1))
}

pub fn bifurcation(system: &Path, format: Format) -> Result<(), CliError> {
    let sys = load_system(system)?;
    let values = bifurcation_values(&sys)?;
    match format {
        Format::Json => print_json(&Value::Array(
            values
                .iter()
                .map(|b| json!({ "pair": [b.pair.0 + 1, b.pair.1 + 1], "gamma": b.gamma, "mu": b.mu, "nu": b.nu }))
                .collect(),
        )),
        Format::Table => {
            let rows: Vec<Vec<String>> = values
                .iter()
                .map(|b| vec![format!("{},{}", b.pair.0 + 1, b.pair.1 + 1), sci(b.gamma), sci(b.mu), sci(b.nu)])
                .collect();
            print_text(&table(&["pair", "gamma", "mu", "nu"], &rows));
        }
    }
    Ok(())
}

pub fn re(system: &Path, pair: (usize, usize), ell: f64, format: Format) -> Result<(), CliError> {
    let sys = load_system(system)?;
    let p = zero_based(&sys, pair)?;
    let red = reduce_two_body(&sys, p)?;
    let re = solve_relative_equilibrium(&red, ell)?;
    let fields = [
        ("mu", red.mu),
        ("gamma", red.gamma),
        ("r_star", re.r_star),
        ("omega", re.omega),
        ("h", re.h),
        ("nu", re.nu),
    ];
    match format {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("pair".into(), json!([pair.0, pair.1]));
            obj.insert("ell".into(), json!(ell));
            for (k, v) in fields {
                obj.insert(k.into(), json!(v));
            }
            print_json(&Value::Object(obj));
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = fields.iter().map(|(k, v)| vec![k.to_string(), sci(*v)]).collect();
            print_text(&table(&["quantity", "value"], &rows));
        }
    }
    Ok(())
}

pub const CSV_HEADER: [&str; 16] = [
    "k",
    "z",
    "residual_norm",
    "H",
    "K",
    "I",
    "V",
    "Lx",
    "Ly",
    "Lz",
    "Iz",
    "Kz",
    "lambda_norm",
    "ratio_kplusv",
    "min_pair_dist",
    "min_center_dist",
];

fn csv_row(r: &DiagnosticRow) -> Vec<String> {
    let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), sci);
    vec![
        r.k.to_string(),
        opt(r.z),
        sci(r.residual_norm),
        sci(r.h),
        sci(r.kinetic),
        sci(r.inertia),
        sci(r.v),
        sci(r.l[0]),
        sci(r.l[1]),
        sci(r.l[2]),
        sci(r.iz),
        sci(r.kz),
        sci(r.lambda_norm),
        sci(r.ratio_kplusv),
        sci(r.min_pair_dist),
        opt(r.min_center_dist),
    ]
}

pub fn sequence(args: &SequenceArgs) -> Result<(), CliError> {
    let sys = load_system(&args.system)?;
    let pair = zero_based(&sys, args.pair)?;
    if args.singleton == 0 || args.singleton > sys.n() {
        return Err(cpinf_core::Error::InvalidArgument(format!("singleton {} does not exist", args.singleton)).into());
    }
    let singleton = args.singleton - 1;
    let mut csv_out: Option<(std::fs::File, &Path)> = args.out.as_deref().map(|p| create(p).map(|f| (f, p))).transpose()?;
    let mut states_out = args.states_out.as_deref().map(|p| create(p).map(|f| (f, p))).transpose()?;
    let mut summary_out = args.summary.as_deref().map(|p| create(p).map(|f| (f, p))).transpose()?;

    let re = solve_relative_equilibrium(&reduce_two_body(&sys, pair)?, args.ell)?;
    let mut schedule = Schedule::default_for(&re);
    schedule.rho = args.rho;
    schedule.count = args.count;
    if let Some(z0) = args.z0 {
        schedule.z0 = z0;
    }
    let seq = generate_horizontal(&sys, pair, singleton, args.ell, &schedule)?;
    let diag = diagnose(&seq)?;
    let class = classify(&seq, &diag, &ClassifyOptions::default())?;

    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in &diag.rows {
        w.write_record(csv_row(r)).expect("in-memory write");
    }
    let csv_text = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8");
    match &mut csv_out {
        Some((f, p)) => write_all(f, p, &csv_text)?,
        None => write_all(&mut std::io::stdout(), Path::new("<stdout>"), &csv_text)?,
    }
    if let Some((f, p)) = &mut states_out {
        let lam = seq.multipliers();
        let z = seq.abscissa();
        let mut text = String::new();
        for (k, s) in seq.states().iter().enumerate() {
            let rec = StateRecord::from_state(&sys, s, Some(k), z.map(|z| z[k]), lam.map(|l| &l[k]));
            text += &to_json(&rec);
            text.push('\n');
        }
        write_all(f, p, &text)?;
    }
    let last = diag.rows.last().expect("count >= 1");
    let l2: f64 = last.l.iter().map(|v| v * v).sum();
    let summary = json!({
        "classification": one_based_evidence(serde_json::to_value(&class).expect("values serialise")),
        "pair": [args.pair.0, args.pair.1],
        "singleton": args.singleton,
        "ell": args.ell,
        "schedule": { "z0": schedule.z0, "rho": schedule.rho, "count": schedule.count },
        "relative_equilibrium": re,
        "nu_last": -last.h * l2,
        "trends": diag.trends,
    });
    let text = serde_json::to_string_pretty(&summary).expect("values serialise") + "\n";
    match (&mut summary_out, &csv_out) {
        (Some((f, p)), _) => write_all(f, p, &text)?,
        (None, Some(_)) => print_text(&text),
        (None, None) => {}
    }
    Ok(())
}

/// The library reports blocks with 0-based indices; the CLI speaks 1-based.
fn one_based_evidence(mut v: Value) -> Value {
    let shift = |block: &mut Value| {
        if let Some(items) = block.as_array_mut() {
            for i in items {
                *i = json!(i.as_u64().unwrap_or(0) + 1);
            }
        }
    };
    let ev = &mut v["evidence"];
    if let Some(blocks) = ev["partition"].as_array_mut() {
        blocks.iter_mut().for_each(shift);
    }
    if let Some(rows) = ev["block_verdicts"].as_array_mut() {
        rows.iter_mut().for_each(|row| shift(&mut row[0]));
    }
    v
}

fn state_report(sys: &System, s: &State, lambda: Multiplier<f64>, source: &str) -> Result<Value, CliError> {
    let pot = sys.potential();
    let v = pot.value(s)?;
    let g = grad_hamiltonian(s, &pot)?;
    let best = fit_multiplier(&g, s, true)?;
    let k = kinetic(s);
    let l = angular_momentum(s);
    let h = k / 2.0 + v;
    let frame = match to_multiplier_coordinates(s, &lambda) {
        Ok(fr) => Some(fr),
        Err(cpinf_core::Error::ZeroMultiplier) => None,
        Err(e) => return Err(e.into()),
    };
    let frame_json = frame.map(|fr| {
        let izkz = iz_kz(&fr.state);
        json!({
            "Iz": izkz.iz,
            "Kz": izkz.kz,
            "Lz": angular_momentum(&fr.state)[2],
            "R_norm": fr.state.r().norm(),
        })
    });
    Ok(json!({
        "n": s.n(),
        "H": h,
        "K": k,
        "I": inertia(s),
        "V": v,
        "L": l,
        "nu": -h * l.iter().map(|x| x * x).sum::<f64>(),
        "lambda": lambda.lambda,
        "lambda_source": source,
        "lambda_norm": lambda.norm(),
        "residual_norm": residual_from_gradient(&g, s, &lambda).norm,
        "grad_h_norm": g.norm(),
        "best_lambda": best.lambda,
        "best_residual_norm": residual_from_gradient(&g, s, &best).norm,
        "multiplier_frame": frame_json,
    }))
}

pub fn verify(path: &Path, lambda: Option<[f64; 3]>, format: Format) -> Result<(), CliError> {
    let rec = parse_record(&read(path)?)?;
    let sys = rec.system()?;
    let s = rec.state(&sys)?.ok_or_else(|| cpinf_core::Error::Parse("state file has no positions".into()))?;
    let (lam, source) = match (lambda, rec.lambda) {
        (Some(l), _) => (Multiplier::new(l), "argument"),
        (None, Some(l)) => (Multiplier::new(l), "file"),
        (None, None) => {
            let g = grad_hamiltonian(&s, &sys.potential())?;
            (fit_multiplier(&g, &s, true)?, "fitted")
        }
    };
    let report = state_report(&sys, &s, lam, source)?;
    match format {
        Format::Json => print_json(&report),
        Format::Table => {
            let mut rows = Vec::new();
            for key in ["H", "K", "I", "V", "nu", "lambda_norm", "residual_norm", "grad_h_norm", "best_residual_norm"] {
                rows.push(vec![key.to_string(), sci(report[key].as_f64().unwrap_or(f64::NAN))]);
            }
            for (i, axis) in ["x", "y", "z"].iter().enumerate() {
                rows.push(vec![format!("L{axis}"), sci(report["L"][i].as_f64().unwrap_or(f64::NAN))]);
            }
            rows.push(vec!["lambda_source".into(), source.into()]);
            print_text(&table(&["quantity", "value"], &rows));
        }
    }
    Ok(())
}

pub fn clusters(input: &Path, window: usize, threshold: f64) -> Result<(), CliError> {
    let parsed = parse_sequence(&read(input)?)?;
    let part = detect_clusters(&parsed.states, window, threshold)?;
    let pot = parsed.system.potential();
    let additivity = additivity_report(&parsed.states, &pot, &part)?;
    let (multipliers, source) = match parsed.multipliers {
        Some(m) => (m, "file"),
        None => (
            parsed
                .states
                .iter()
                .map(|s| fit_multiplier(&grad_hamiltonian(s, &pot)?, s, true))
                .collect::<cpinf_core::Result<Vec<_>>>()?,
            "fitted",
        ),
    };
    let crit = cluster_criticality(&parsed.states, &pot, &part, &multipliers, parsed.abscissa.as_deref())?;
    let one_based = |b: &[usize]| b.iter().map(|i| i + 1).collect::<Vec<_>>();
    let report = json!({
        "states": parsed.states.len(),
        "partition": part.blocks().iter().map(|b| one_based(b)).collect::<Vec<_>>(),
        "additivity": additivity,
        "criticality": {
            "multipliers": source,
            "whole": crit.whole,
            "whole_trend": crit.whole_trend,
            "consistent": crit.consistent,
            "blocks": crit.blocks.iter().map(|b| json!({
                "block": one_based(&b.block),
                "residuals": b.residuals,
                "trend": b.trend,
            })).collect::<Vec<_>>(),
        },
    });
    print_json(&report);
    Ok(())
}
