use std::path::{Path, PathBuf};

use macrosize::entanglement::reduced_group_state;
use macrosize::io::{format_number, to_json, Header, Loaded, StateDocument, StateFile};
use macrosize::mapping::{
    absorb_density, approx_absorb, exact_propagate_threads, mapping_fidelity, verify_disentangling_identity,
    verify_operator_map, JointState,
};
use macrosize::measures::{measure, Channel, DispatchParams, MeasureId};
use macrosize::scaling::{
    sweep, table1, FamilyId, MeasureParams, SpinRule, StateFamily, SweepReport, Table1Params,
};
use macrosize::states::{default_cutoff, make_coherent, BuiltPair, BuiltState, ComplexParam, StateName, StateParams, StateSpec};
use macrosize::symcore::{c64, BasisTag, DensityOp};
use macrosize::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{config_hash, emit, json_with_header, read_input, Format};
use crate::{AbsorbArgs, AbsorbMode, Cli, CliError, Command, MeasureArgs, StateArgs, SweepArgs, Table1Args, VerifyArgs};

pub fn run(cli: &Cli, threads: usize) -> Result<(), CliError> {
    match &cli.command {
        Command::State(a) => state(cli, a),
        Command::Measure(a) => measure_cmd(cli, a),
        Command::Absorb(a) => absorb(cli, a, threads),
        Command::Table1(a) => table(cli, a, threads),
        Command::Sweep(a) => sweep_cmd(cli, a, threads),
        Command::VerifyMapping(a) => verify(cli, a),
    }
}

/// Writes a flat record in the requested format.
fn emit_record(format: Format, header: &Header, payload: &impl Serialize, out: Option<&PathBuf>) -> Result<(), CliError> {
    let text = match format {
        Format::Json => json_with_header(header, payload)?,
        Format::Csv | Format::Text => {
            let value = serde_json::to_value(payload).map_err(|e| CliError::Input(e.to_string()))?;
            let mut rows = Vec::new();
            flatten("", &value, &mut rows);
            let mut s = header.comment_lines();
            if format == Format::Csv {
                s.push_str("key,value\n");
                for (k, v) in rows {
                    s.push_str(&format!("{k},{}\n", csv_field(&v)));
                }
            } else {
                let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in rows {
                    s.push_str(&format!("{k:<width$}  {v}\n"));
                }
            }
            s
        }
    };
    emit(out, &text)
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(o) => o.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            rows.push((prefix.to_string(), a.iter().map(scalar).collect::<Vec<_>>().join(" ")))
        }
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows)),
        other => rows.push((prefix.to_string(), scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => n.as_f64().map(format_number).unwrap_or_default(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn parse_measure(s: &str) -> Result<MeasureId, CliError> {
    MeasureId::parse(s).map_err(|e| CliError::Input(e.to_string()))
}

fn load(path: &Path) -> Result<(Vec<u8>, Loaded), CliError> {
    let bytes = read_input(path)?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::Input(format!("{} is not UTF-8", path.display())))?;
    let doc = StateDocument::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let loaded = doc.state.load().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((bytes, loaded))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Summary {
    kind: &'static str,
    basis: BasisTag,
    norm: f64,
    mean_excitation: f64,
}

fn density_summary(rho: &DensityOp) -> Summary {
    let tag = rho.tag();
    let m = rho.matrix();
    let excitation = |i: usize| match tag {
        BasisTag::Fock { cutoff, modes: 2 } => (i / (cutoff + 1) + i % (cutoff + 1)) as f64,
        _ => i as f64,
    };
    Summary {
        kind: "density operator",
        basis: tag,
        norm: (0..rho.dim()).map(|i| m[(i, i)].re).sum(),
        mean_excitation: (0..rho.dim()).map(|i| m[(i, i)].re * excitation(i)).sum(),
    }
}

fn summary(l: &Loaded) -> Value {
    let one = |l: &Loaded| -> Summary {
        match l {
            Loaded::Photonic(p) => Summary {
                kind: "photonic state",
                basis: p.tag(),
                norm: p.amps().norm(),
                mean_excitation: (0..p.modes()).map(|m| p.mean_photons(m)).sum(),
            },
            Loaded::Spin(s) => Summary {
                kind: "spin state",
                basis: BasisTag::DickeSector { spins: s.spins(), cutoff: s.basis().cutoff() },
                norm: s.amps().norm(),
                mean_excitation: s.mean_excitation(),
            },
            Loaded::Density(r) => density_summary(r),
            _ => unreachable!(),
        }
    };
    match l {
        Loaded::PhotonPair(p) => json!({
            "kind": l.kind(),
            "overlap": [p.overlap().re, p.overlap().im],
            "psi0": one(&Loaded::Photonic(p.psi0.clone())),
            "psi1": one(&Loaded::Photonic(p.psi1.clone())),
        }),
        Loaded::SpinPair(p) => json!({
            "kind": l.kind(),
            "overlap": [p.overlap().re, p.overlap().im],
            "psi0": one(&Loaded::Spin(p.psi0.clone())),
            "psi1": one(&Loaded::Spin(p.psi1.clone())),
        }),
        single => serde_json::to_value(one(single)).unwrap_or(Value::Null),
    }
}

fn state_spec(a: &StateArgs) -> Result<(StateSpec, Vec<u8>), CliError> {
    if let Some(path) = &a.spec {
        let bytes = read_input(path)?;
        let spec: StateSpec = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Input(format!("{}: malformed state spec: {e}", path.display())))?;
        return Ok((spec, bytes));
    }
    let name = a.name.as_deref().ok_or_else(|| CliError::Input("give --name or --spec".into()))?;
    let name = StateName::parse(name).map_err(|e| CliError::Input(e.to_string()))?;
    let alpha = match (a.alpha, a.alpha_im) {
        (None, None) => None,
        (Some(re), None) => Some(ComplexParam::Real(re)),
        (re, Some(im)) => Some(ComplexParam::Complex([re.unwrap_or(0.0), im])),
    };
    let params = StateParams { alpha, n: a.n, m: a.m, k_cutoff: a.k, d: a.d, cutoff: a.cutoff };
    Ok((StateSpec { name, params }, Vec::new()))
}

fn input_error(e: Error) -> CliError {
    match e {
        Error::Undefined(_) | Error::Numerical(_) => CliError::Core(e),
        other => CliError::Input(other.to_string()),
    }
}

fn state(cli: &Cli, a: &StateArgs) -> Result<(), CliError> {
    let (spec, spec_bytes) = state_spec(a)?;
    let loaded = if a.components {
        match spec.build_components().map_err(input_error)? {
            BuiltPair::Photonic(p) => Loaded::PhotonPair(p),
            BuiltPair::Spin(p) => Loaded::SpinPair(p),
        }
    } else {
        match spec.build().map_err(input_error)? {
            BuiltState::Photonic(p) => Loaded::Photonic(p),
            BuiltState::Spin(s) => Loaded::Spin(s),
            BuiltState::Density(r) => Loaded::Density(r),
        }
    };
    let hash = config_hash("state", &json!({"spec": spec, "components": a.components}), &[&spec_bytes])?;
    let header = Header::new(hash, cli.seed);
    let doc = StateDocument { header: Some(header.clone()), state: StateFile::from_loaded(&loaded) };
    let file = to_json(&doc)? + "\n";
    let info = summary(&loaded);
    match &a.out {
        Some(path) => {
            emit(Some(path), &file)?;
            let format = Format::resolve(cli.format, None, Format::Json);
            emit_record(format, &header, &info, None)
        }
        None => {
            eprintln!("{}", serde_json::to_string(&info).unwrap_or_default());
            emit(None, &file)
        }
    }
}

fn measure_cmd(cli: &Cli, a: &MeasureArgs) -> Result<(), CliError> {
    let id = parse_measure(&a.measure)?;
    let (bytes, input) = load(&a.input)?;
    let params = DispatchParams {
        delta: a.delta,
        p_g: a.p_g,
        channel: a.homodyne.map_or(Channel::PhotonCount, |theta| Channel::Homodyne { theta }),
        spins: a.spins,
    };
    let hash = config_hash("measure", a, &[&bytes])?;
    let header = Header::new(hash, cli.seed);
    let result = measure(id, &input, &params)?;
    emit_record(Format::resolve(cli.format, None, Format::Json), &header, &result, None)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AbsorbReport {
    mode: AbsorbMode,
    spins: usize,
    g: f64,
    output: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual_photon_population: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    single_spin_purity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    product_check: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

/// Largest single-spin impurity accepted as product structure.
const PRODUCT_TOL: f64 = 1e-3;

fn absorb(cli: &Cli, a: &AbsorbArgs, threads: usize) -> Result<(), CliError> {
    let (bytes, input) = load(&a.input)?;
    let hash = config_hash("absorb", a, &[&bytes])?;
    let header = Header::new(hash, cli.seed);
    let mut report = AbsorbReport {
        mode: a.mode,
        spins: a.spins,
        g: a.g,
        output: "spin state",
        fidelity: None,
        residual_photon_population: None,
        single_spin_purity: None,
        product_check: None,
        note: None,
    };
    let mapped = match (&input, a.mode) {
        (Loaded::Photonic(psi), AbsorbMode::Approx) => {
            let phi = approx_absorb(psi, a.spins)?;
            let m = mapping_fidelity(psi, a.spins, a.g)?;
            report.fidelity = Some(m.fidelity);
            report.residual_photon_population = Some(m.residual_photon_population);
            let purity = reduced_group_state(&phi, 1)?.purity();
            report.single_spin_purity = Some(purity);
            report.product_check = Some(1.0 - purity <= PRODUCT_TOL);
            Loaded::Spin(phi)
        }
        (Loaded::Photonic(psi), AbsorbMode::Exact) => {
            let joint = JointState::with_ground_spins(psi, a.spins, psi.cutoff().min(a.spins))?;
            let out = exact_propagate_threads(&joint, a.g, threads)?;
            let approx = approx_absorb(psi, a.spins)?;
            report.fidelity = Some(approx.amps().dotc(&out.vacuum_spin_amplitudes()).norm_sqr());
            report.residual_photon_population = Some((1.0 - out.photon_vacuum_population()).max(0.0));
            report.output = "spin marginal";
            Loaded::Density(out.spin_marginal()?)
        }
        (Loaded::Density(rho), AbsorbMode::Approx) => {
            report.note = Some("density input: fidelity against exact evolution not computed".into());
            Loaded::Density(absorb_density(rho, a.spins)?)
        }
        (Loaded::Density(_), AbsorbMode::Exact) => {
            return Err(CliError::Input("exact absorption takes a pure photonic state".into()))
        }
        (other, _) => return Err(CliError::Input(format!("absorb takes a photonic state, got a {}", other.kind()))),
    };
    let doc = StateDocument { header: Some(header.clone()), state: StateFile::from_loaded(&mapped) };
    let file = to_json(&doc)? + "\n";
    match &a.out {
        Some(path) => emit(Some(path), &file)?,
        None => eprintln!("no output file given; spin state not written"),
    }
    emit_record(Format::resolve(cli.format, None, Format::Json), &header, &report, None)
}

fn table(cli: &Cli, a: &Table1Args, threads: usize) -> Result<(), CliError> {
    let params = Table1Params {
        ladder: a.ladder.clone(),
        spin_rule: SpinRule::PerExcitation(a.spins_per_excitation),
        measure: MeasureParams { delta: a.delta, p_g: a.p_g },
        m_sweep_size: a.m_sweep_size,
        m_sweep_spins: a.m_sweep_spins.clone(),
    };
    let hash = config_hash("table1", a, &[])?;
    let header = Header::new(hash, cli.seed);
    let report = table1(&params, threads).map_err(input_error)?;
    let text = match Format::resolve(cli.format, a.out.as_deref(), Format::Text) {
        Format::Json => json_with_header(&header, &report)?,
        Format::Csv => header.comment_lines() + &report.to_csv(),
        Format::Text => header.comment_lines() + &report.to_text(),
    };
    emit(a.out.as_ref(), &text)
}

fn sweep_csv(header: &Header, r: &SweepReport) -> String {
    let mut s = header.comment_lines();
    s.push_str(&format!("# family: {}\n# measure: {}\n", r.family.name(), r.measure.name()));
    match (&r.fit, &r.fit_error) {
        (Some(f), _) => s.push_str(&format!(
            "# exponent: {}\n# ci95: {}\n# intercept: {}\n# residual: {}\n",
            format_number(f.exponent),
            format_number(f.ci95),
            format_number(f.intercept),
            format_number(f.residual)
        )),
        (None, Some(e)) => s.push_str(&format!("# fit: {e}\n")),
        (None, None) => {}
    }
    s.push_str("size,value,M,ln_size,ln_value,error\n");
    for p in &r.points {
        let (value, ln_value) = match p.value {
            Some(v) => (format_number(v), if v > 0.0 { format_number(v.ln()) } else { String::new() }),
            None => (String::new(), String::new()),
        };
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.size,
            value,
            p.spins,
            format_number((p.size as f64).ln()),
            ln_value,
            csv_field(p.error.as_deref().unwrap_or(""))
        ));
    }
    s
}

fn sweep_text(header: &Header, r: &SweepReport) -> String {
    let mut s = header.comment_lines();
    s.push_str(&format!("{} / {}\n", r.family.name(), r.measure.name()));
    s.push_str(&format!("{:>8}  {:>10}  {:>20}\n", "N", "M", "value"));
    for p in &r.points {
        let v = match (&p.value, &p.error) {
            (Some(v), _) => format_number(*v),
            (None, Some(e)) => e.clone(),
            _ => String::new(),
        };
        s.push_str(&format!("{:>8}  {:>10}  {:>20}\n", p.size, p.spins, v));
    }
    match (&r.fit, &r.fit_error) {
        (Some(f), _) => s.push_str(&format!(
            "exponent {} ± {} (residual {})\n",
            format_number(f.exponent),
            format_number(f.ci95),
            format_number(f.residual)
        )),
        (None, Some(e)) => s.push_str(&format!("no fit: {e}\n")),
        _ => {}
    }
    s
}

fn sweep_cmd(cli: &Cli, a: &SweepArgs, threads: usize) -> Result<(), CliError> {
    let family_id = FamilyId::parse(&a.family).map_err(|e| CliError::Input(e.to_string()))?;
    let id = parse_measure(&a.measure)?;
    if id.needs_pair() && matches!(family_id, FamilyId::Fock | FamilyId::Coherent) {
        return Err(CliError::Core(Error::Undefined(format!(
            "{} is a single component; {} is not defined",
            family_id.name(),
            id.name()
        ))));
    }
    let rule = a.spins.map_or(SpinRule::PerExcitation(a.spins_per_excitation), SpinRule::Fixed);
    let family = StateFamily::new(family_id, a.ladder.clone(), rule).map_err(input_error)?;
    let hash = config_hash("sweep", a, &[])?;
    let header = Header::new(hash, cli.seed);
    let report = sweep(&family, id, &MeasureParams { delta: a.delta, p_g: a.p_g }, threads).map_err(input_error)?;
    let text = match Format::resolve(cli.format, a.out.as_deref(), Format::Csv) {
        Format::Json => json_with_header(&header, &report)?,
        Format::Csv => sweep_csv(&header, &report),
        Format::Text => sweep_text(&header, &report),
    };
    emit(a.out.as_ref(), &text)
}

/// Ratio window for "halves when M doubles".
const HALVING: (f64, f64) = (0.4, 0.6);
const MIN_FIDELITY: f64 = 0.99;
const DISENTANGLING_TOL: f64 = 1e-8;

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Check<T: Serialize> {
    values: T,
    pass: bool,
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<(), CliError> {
    let hash = config_hash("verify-mapping", a, &[])?;
    let header = Header::new(hash, cli.seed);
    if a.alpha_sq.is_nan() || a.alpha_sq < 0.0 {
        return Err(CliError::Input(format!("alpha-sq must be non-negative, got {}", a.alpha_sq)));
    }
    let probe = make_coherent(c64(a.alpha_sq.sqrt(), 0.0), default_cutoff(a.alpha_sq))?;
    let fidelities = a
        .fidelity_spins
        .iter()
        .map(|&m| Ok(json!({"M": m, "fidelity": mapping_fidelity(&probe, m, std::f64::consts::FRAC_PI_2)?.fidelity})))
        .collect::<Result<Vec<Value>, Error>>()?;
    let fid_ok = fidelities.iter().all(|v| v["fidelity"].as_f64().unwrap_or(0.0) >= MIN_FIDELITY);

    let deviations =
        a.spins.iter().map(|&m| verify_operator_map(m, a.cutoff)).collect::<Result<Vec<f64>, Error>>()?;
    let ratios: Vec<f64> = deviations.windows(2).map(|w| w[1] / w[0]).collect();
    let op_ok = ratios.iter().all(|r| (HALVING.0..=HALVING.1).contains(r));

    let dis = (1..=a.max_two_j)
        .map(|tj| verify_disentangling_identity(tj, a.lambda))
        .collect::<Result<Vec<f64>, Error>>()?;
    let worst = dis.iter().cloned().fold(0.0, f64::max);
    let dis_ok = worst <= DISENTANGLING_TOL;

    let report = json!({
        "fidelity": Check { values: fidelities, pass: fid_ok },
        "operatorMap": Check {
            values: json!({"M": a.spins, "K": a.cutoff, "deviation": deviations, "ratio": ratios}),
            pass: op_ok,
        },
        "disentangling": Check {
            values: json!({"maxTwoJ": a.max_two_j, "lambda": a.lambda, "worstRelativeDeviation": worst}),
            pass: dis_ok,
        },
    });
    emit_record(Format::resolve(cli.format, a.out.as_deref(), Format::Json), &header, &report, a.out.as_ref())?;
    let failed: Vec<&str> = [("fidelity", fid_ok), ("operator map", op_ok), ("disentangling identity", dis_ok)]
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| *n)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(failed.join(", ")))
    }
}
