//! Command-line front end: parse field and form input, run the
//! decomposition or one of the debug commands, render text or JSON.
//!
//! Exit codes: 0 ok, 1 degenerate form, 2 parse error, 3 unsupported field,
//! 4 internal verification failure.

use crate::aniso::{anisotropic_part, AnisoError};
use crate::field::{FieldElt, NumberField};
use crate::ideals::{dyadic_primes, parse_prime, PrimeIdeal};
use crate::local::{self, Place};
use crate::witt::{adim, certificate, dyadic_union, DiagonalForm};
use std::sync::Arc;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DEGENERATE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_FIELD: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Decompose,
    Adim,
    Isotropic,
    Hilbert { a: String, b: String, p: String },
    LocalAdim { p: String },
    SingularGroup { primes: Vec<String> },
}

/// A validated job: the field, the (possibly diagonalized) form and flags.
#[derive(Debug, Clone)]
pub struct JobSpec {
    pub field: Arc<NumberField>,
    pub form: Option<DiagonalForm>,
    pub command: Command,
    pub verify: bool,
    pub trace: bool,
    pub json: bool,
}

#[derive(Debug)]
pub struct CliFailure {
    pub message: String,
    pub code: i32,
}

fn parse_fail(msg: impl Into<String>) -> CliFailure {
    CliFailure {
        message: msg.into(),
        code: EXIT_PARSE,
    }
}

fn field_fail(msg: impl Into<String>) -> CliFailure {
    CliFailure {
        message: msg.into(),
        code: EXIT_FIELD,
    }
}

fn degenerate_fail(msg: impl Into<String>) -> CliFailure {
    CliFailure {
        message: msg.into(),
        code: EXIT_DEGENERATE,
    }
}

/// Parses the input text (a `field` line and a `form` or `gram` line) plus
/// the already-split command, into a validated job.
pub fn parse_job(
    command: Command,
    input: Option<&str>,
    verify: bool,
    trace: bool,
    json: bool,
) -> Result<JobSpec, CliFailure> {
    let mut field_spec: Option<String> = None;
    let mut form_line: Option<String> = None;
    let mut gram_line: Option<String> = None;
    if let Some(text) = input {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("field ") {
                field_spec = Some(rest.trim().to_string());
            } else if let Some(rest) = line.strip_prefix("form ") {
                form_line = Some(rest.trim().to_string());
            } else if let Some(rest) = line.strip_prefix("gram ") {
                gram_line = Some(rest.trim().to_string());
            } else {
                return Err(parse_fail(format!(
                    "line {}: expected `field`, `form` or `gram`",
                    lineno + 1
                )));
            }
        }
    }
    let field = match &field_spec {
        Some(spec) => NumberField::parse_spec(spec).map_err(|e| field_fail(e.to_string()))?,
        None => NumberField::rationals(),
    };
    let needs_form = matches!(
        command,
        Command::Decompose | Command::Adim | Command::Isotropic | Command::LocalAdim { .. }
    );
    let form = match (form_line, gram_line) {
        (Some(_), Some(_)) => {
            return Err(parse_fail("give either a form line or a gram line, not both"))
        }
        (Some(f), None) => Some(parse_form_line(&field, &f)?),
        (None, Some(g)) => Some(diagonalize_gram(&field, &parse_gram(&field, &g)?)?),
        (None, None) => {
            if needs_form {
                return Err(parse_fail("missing `form` (or `gram`) line in the input"));
            }
            None
        }
    };
    Ok(JobSpec {
        field,
        form,
        command,
        verify,
        trace,
        json,
    })
}

fn parse_form_line(field: &Arc<NumberField>, line: &str) -> Result<DiagonalForm, CliFailure> {
    let mut coeffs = Vec::new();
    for part in line.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(parse_fail("empty coefficient in the form line"));
        }
        let c = field
            .parse_elt(part)
            .map_err(|e| parse_fail(format!("coefficient {part:?}: {e}")))?;
        coeffs.push(c);
    }
    DiagonalForm::new(field, coeffs).map_err(|e| degenerate_fail(e.to_string()))
}

fn parse_gram(field: &Arc<NumberField>, line: &str) -> Result<Vec<Vec<FieldElt>>, CliFailure> {
    // [[a, b], [c, d]] with field-element entries
    let inner = line
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| parse_fail("gram matrix must look like [[...],[...]]"))?;
    let mut rows = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in inner.chars() {
        match ch {
            '[' => {
                depth += 1;
                if depth == 1 {
                    cur.clear();
                    continue;
                }
            }
            ']' => {
                depth -= 1;
                if depth == 0 {
                    let entries: Result<Vec<FieldElt>, CliFailure> = cur
                        .split(',')
                        .map(|e| {
                            field
                                .parse_elt(e.trim())
                                .map_err(|err| parse_fail(format!("gram entry {e:?}: {err}")))
                        })
                        .collect();
                    rows.push(entries?);
                    continue;
                }
            }
            ',' if depth == 0 => continue,
            _ => {}
        }
        if depth >= 1 {
            cur.push(ch);
        }
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(parse_fail("gram matrix must be square"));
    }
    for i in 0..n {
        for j in 0..n {
            if rows[i][j] != rows[j][i] {
                return Err(parse_fail("gram matrix must be symmetric"));
            }
        }
    }
    Ok(rows)
}

/// Symmetric Gaussian diagonalization over the field (characteristic zero).
fn diagonalize_gram(
    field: &Arc<NumberField>,
    gram: &[Vec<FieldElt>],
) -> Result<DiagonalForm, CliFailure> {
    let n = gram.len();
    let mut m: Vec<Vec<FieldElt>> = gram.to_vec();
    let mut diag = Vec::new();
    for i in 0..n {
        if m[i][i].is_zero() {
            // try a later index with a nonzero diagonal entry
            if let Some(j) = ((i + 1)..n).find(|&j| !m[j][j].is_zero()) {
                m.swap(i, j);
                for row in m.iter_mut() {
                    row.swap(i, j);
                }
            } else if let Some(j) = ((i + 1)..n).find(|&j| !m[i][j].is_zero()) {
                // q(e_i + e_j) = 2 m_ij is nonzero in characteristic 0
                for k in 0..n {
                    let t = m[j][k].clone();
                    m[i][k] = field.add(&m[i][k], &t);
                }
                for row in m.iter_mut() {
                    let t = row[j].clone();
                    row[i] = field.add(&row[i], &t);
                }
            } else {
                return Err(degenerate_fail("gram matrix is singular"));
            }
        }
        let pivot = m[i][i].clone();
        for j in (i + 1)..n {
            if m[i][j].is_zero() {
                continue;
            }
            let f = field.div(&m[i][j], &pivot).unwrap();
            for k in 0..n {
                let t = field.mul(&f, &m[i][k]);
                m[j][k] = field.sub(&m[j][k], &t);
            }
            for row in m.iter_mut() {
                let t = field.mul(&f, &row[i]);
                row[j] = field.sub(&row[j], &t);
            }
        }
        diag.push(pivot);
    }
    DiagonalForm::new(field, diag).map_err(|e| degenerate_fail(e.to_string()))
}

fn resolve_prime(field: &Arc<NumberField>, spec: &str) -> Result<PrimeIdeal, CliFailure> {
    let trimmed = spec.trim();
    let display_form = if trimmed.starts_with('(') {
        trimmed.to_string()
    } else {
        format!("({trimmed})")
    };
    parse_prime(field, &display_form)
        .map_err(|e| parse_fail(format!("prime {spec:?}: {e} (split primes need the (p, g) form)")))
}

/// Runs a validated job; returns the rendered output and the exit code.
pub fn run(job: &JobSpec) -> (String, i32) {
    match run_inner(job) {
        Ok(s) => (s, EXIT_OK),
        Err(f) => (format!("error: {}\n", f.message), f.code),
    }
}

fn run_inner(job: &JobSpec) -> Result<String, CliFailure> {
    let field = &job.field;
    match &job.command {
        Command::Hilbert { a, b, p } => {
            let a = field.parse_elt(a).map_err(|e| parse_fail(e.to_string()))?;
            let b = field.parse_elt(b).map_err(|e| parse_fail(e.to_string()))?;
            let prime = resolve_prime(field, p)?;
            let s = local::hilbert(field, &a, &b, &Place::Finite(prime))
                .map_err(|e| degenerate_fail(e.to_string()))?;
            if job.json {
                Ok(format!("{}\n", serde_json::json!({ "hilbert": s })))
            } else {
                Ok(format!("{s}\n"))
            }
        }
        Command::LocalAdim { p } => {
            let q = job.form.as_ref().expect("parse_job enforced a form");
            let prime = resolve_prime(field, p)?;
            let a = local::local_adim(field, &q.coeffs, &Place::Finite(prime))
                .map_err(|e| degenerate_fail(e.to_string()))?;
            if job.json {
                Ok(format!("{}\n", serde_json::json!({ "local_adim": a })))
            } else {
                Ok(format!("{a}\n"))
            }
        }
        Command::SingularGroup { primes } => {
            let mut s: Vec<PrimeIdeal> = dyadic_primes(field);
            for spec in primes {
                let p = resolve_prime(field, spec)?;
                if !s.contains(&p) {
                    s.push(p);
                }
            }
            let sb = crate::class_group::singular_group_basis(field, &s)
                .map_err(|e| field_fail(e.to_string()))?;
            if job.json {
                let basis: Vec<String> =
                    sb.basis.iter().map(|b| field.print_elt(b)).collect();
                Ok(format!(
                    "{}\n",
                    serde_json::json!({
                        "s": sb.s_primes.iter().map(|p| p.display()).collect::<Vec<_>>(),
                        "basis": basis,
                        "unit_part": sb.unit_part_size,
                        "class_part": sb.class_part_size,
                    })
                ))
            } else {
                let mut out = String::new();
                out.push_str(&format!(
                    "S = {{{}}}\n",
                    sb.s_primes
                        .iter()
                        .map(|p| p.display())
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
                for b in &sb.basis {
                    out.push_str(&format!("{}\n", field.print_elt(b)));
                }
                Ok(out)
            }
        }
        Command::Adim => {
            let q = job.form.as_ref().unwrap();
            let a = adim(q).map_err(|e| degenerate_fail(e.to_string()))?;
            if job.json {
                Ok(format!("{}\n", serde_json::json!({ "adim": a })))
            } else {
                Ok(format!("{a}\n"))
            }
        }
        Command::Isotropic => {
            let q = job.form.as_ref().unwrap();
            let a = adim(q).map_err(|e| degenerate_fail(e.to_string()))?;
            let iso = a < q.dim();
            if job.json {
                Ok(format!("{}\n", serde_json::json!({ "isotropic": iso })))
            } else {
                Ok(format!("{}\n", if iso { "isotropic" } else { "anisotropic" }))
            }
        }
        Command::Decompose => run_decompose(job),
    }
}

fn run_decompose(job: &JobSpec) -> Result<String, CliFailure> {
    let field = &job.field;
    let q = job.form.as_ref().unwrap();
    let (qa, w, trace) = anisotropic_part(q).map_err(|e| match e {
        AnisoError::Degenerate => degenerate_fail(e.to_string()),
        AnisoError::Internal(_) | AnisoError::LoopBudgetExceeded => CliFailure {
            message: e.to_string(),
            code: EXIT_INTERNAL,
        },
        AnisoError::WrongAdim { .. } => CliFailure {
            message: e.to_string(),
            code: EXIT_INTERNAL,
        },
    })?;
    let coeff_strs: Vec<String> = qa.coeffs.iter().map(|c| field.print_elt(c)).collect();
    let mut verification = None;
    if job.verify || job.json {
        let primes = dyadic_union(q, &qa).map_err(|e| degenerate_fail(e.to_string()))?;
        let cert_q = certificate(q, &primes).map_err(|e| degenerate_fail(e.to_string()))?;
        let recomposed = qa.pad_hyperbolic(w);
        let cert_r = certificate(&recomposed, &primes)
            .map_err(|e| degenerate_fail(e.to_string()))?;
        let matches = cert_q.dim == cert_r.dim
            && field.same_square_class(&cert_q.signed_disc, &cert_r.signed_disc)
            && cert_q.signatures == cert_r.signatures
            && cert_q.hasse_bits == cert_r.hasse_bits;
        if !matches {
            return Err(CliFailure {
                message: "certificate mismatch between q and qa + w x H".into(),
                code: EXIT_INTERNAL,
            });
        }
        verification = Some((cert_q, cert_r));
    }
    if job.json {
        let (cert_q, cert_r) = verification.as_ref().unwrap();
        let mut obj = serde_json::json!({
            "adim": qa.dim(),
            "witt_index": w,
            "anisotropic_part": coeff_strs,
            "certificate_q": cert_q.to_json(field),
            "certificate_decomposition": cert_r.to_json(field),
            "verified": true,
        });
        if job.trace {
            obj["trace"] = trace.to_json(field);
        }
        return Ok(format!("{obj}\n"));
    }
    let mut out = String::new();
    out.push_str(&format!("adim: {}\n", qa.dim()));
    out.push_str(&format!("witt_index: {w}\n"));
    out.push_str(&format!("anisotropic_part: {}\n", coeff_strs.join(", ")));
    if let Some((cert_q, cert_r)) = verification {
        out.push_str(&format!("certificate_q: {}\n", cert_q.to_json(field)));
        out.push_str(&format!(
            "certificate_decomposition: {}\n",
            cert_r.to_json(field)
        ));
        out.push_str("verified: certificates match\n");
    }
    if job.trace {
        out.push_str(&format!("trace: {}\n", trace.to_json(field)));
    }
    Ok(out)
}

/// Argv-level entry point used by the binary; reads stdin or --input when a
/// command needs a field/form description.
pub fn main_entry(args: &[String], stdin: &mut dyn std::io::Read) -> (String, i32) {
    let mut verify = false;
    let mut trace = false;
    let mut json = false;
    let mut input_path: Option<String> = None;
    let mut positional: Vec<String> = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--verify" => verify = true,
            "--trace" => trace = true,
            "--json" => json = true,
            "--input" => match it.next() {
                Some(p) => input_path = Some(p.clone()),
                None => return (usage("--input needs a path"), EXIT_PARSE),
            },
            other => positional.push(other.to_string()),
        }
    }
    if positional.is_empty() {
        return (usage("missing subcommand"), EXIT_PARSE);
    }
    let command = match positional[0].as_str() {
        "decompose" => Command::Decompose,
        "adim" => Command::Adim,
        "isotropic" => Command::Isotropic,
        "hilbert" => {
            if positional.len() != 4 {
                return (usage("hilbert takes <a> <b> <p>"), EXIT_PARSE);
            }
            Command::Hilbert {
                a: positional[1].clone(),
                b: positional[2].clone(),
                p: positional[3].clone(),
            }
        }
        "local-adim" => {
            if positional.len() != 2 {
                return (usage("local-adim takes <p>"), EXIT_PARSE);
            }
            Command::LocalAdim {
                p: positional[1].clone(),
            }
        }
        "singular-group" => Command::SingularGroup {
            primes: positional[1..].to_vec(),
        },
        other => return (usage(&format!("unknown subcommand {other:?}")), EXIT_PARSE),
    };
    // commands that read a field/form description
    let wants_input = !matches!(command, Command::Hilbert { .. } | Command::SingularGroup { .. })
        || input_path.is_some();
    let input_text = if wants_input {
        match &input_path {
            Some(path) => match std::fs::read_to_string(path) {
                Ok(t) => Some(t),
                Err(e) => return (format!("error: cannot read {path}: {e}\n"), EXIT_PARSE),
            },
            None => {
                let mut buf = String::new();
                if stdin.read_to_string(&mut buf).is_err() {
                    return ("error: cannot read stdin\n".into(), EXIT_PARSE);
                }
                Some(buf)
            }
        }
    } else {
        None
    };
    match parse_job(command, input_text.as_deref(), verify, trace, json) {
        Ok(job) => run(&job),
        Err(f) => (format!("error: {}\n", f.message), f.code),
    }
}

fn usage(msg: &str) -> String {
    format!(
        "error: {msg}\n\
         usage: wittdec <decompose|adim|isotropic|hilbert <a> <b> <p>|local-adim <p>|singular-group [primes...]>\n\
         \x20      [--verify] [--trace] [--json] [--input <file>]\n\
         input: a `field <spec>` line plus a `form <c1, c2, ...>` or `gram [[...],...]` line\n"
    )
}
