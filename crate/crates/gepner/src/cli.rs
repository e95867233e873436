//! Command-line front end. `run` parses argv, executes one subcommand and
//! returns the rendered output with an exit code: 0 on success, 1 when a
//! verification fails, 2 on usage errors.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::classify::{self, Geometry, TypeRow};
use crate::exactmath::{embed, parse_rational, CycloNum, Q};
use crate::extcalc;
use crate::geomcharge::{self, ChClass, GeomModel};
use crate::hearts::{self, CaseId};
use crate::mfcore::WeightedType;
use crate::quiverrep::{self, Field, StabilitySpec};

#[derive(Parser, Debug)]
#[command(name = "gepner", about = "Exact Gepner type stability computations")]
struct Cli {
    /// Emit a JSON report instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Bits of precision for numeric renderings.
    #[arg(long, global = true, default_value_t = 64)]
    precision: u32,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct TypeArg {
    /// Weighted type "a1,...,an:d".
    #[arg(long = "type")]
    ty: String,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Enumerate stacky-free Fermat types with Calabi-Yau or Fano geometry.
    Classify {
        /// Range of n, e.g. "2..4" or "3".
        #[arg(long, default_value = "2..4")]
        n: String,
        #[arg(long, default_value_t = 6)]
        dmax: u32,
    },
    /// The twelve reference types.
    Table1,
    /// Geometric charge of a sheaf class on X.
    Charge {
        #[command(flatten)]
        t: TypeArg,
        /// Comma-separated Chern character coordinates.
        #[arg(long)]
        class: String,
    },
    /// Z_G of a class in the heart lattice.
    Zg {
        #[command(flatten)]
        t: TypeArg,
        /// Comma-separated integer coordinates in the lattice basis.
        #[arg(long)]
        class: String,
    },
    /// Verify Z∘τ = ζ·Z on every basis vector.
    GepnerCheck {
        #[command(flatten)]
        t: TypeArg,
    },
    /// Phases of the named objects.
    Phases {
        #[command(flatten)]
        t: TypeArg,
    },
    /// Graded Ext table between C(j) and C(0) or a point.
    Ext {
        #[command(flatten)]
        t: TypeArg,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Stability of a named object of the heart quiver over prime fields.
    Stability {
        #[command(flatten)]
        t: TypeArg,
        /// One of C1m1, C2m1, tauPsiOx, PsiOx, C0.
        #[arg(long)]
        object: String,
        /// Point index for the point objects (1-based).
        #[arg(long, default_value_t = 1)]
        point: usize,
        #[arg(long, default_value = "5,7")]
        primes: String,
    },
    /// Harder-Narasimhan filtration of a representation given as JSON.
    Hn {
        /// Weighted type; may also be given as "type" in the JSON file.
        #[arg(long = "type")]
        ty: Option<String>,
        #[arg(long)]
        rep: String,
        /// Primes used when the representation is over Q.
        #[arg(long, default_value = "5")]
        primes: String,
    },
}

/// Machine-readable record of one invocation.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    /// None when the command verifies nothing.
    pub verified: Option<bool>,
}

/// Result of `run`: the text that goes to stdout or stderr, and the exit code.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Option<Report>,
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

type R<T> = Result<T, Usage>;

pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { report: None, stdout: text, stderr: String::new(), code }
            } else {
                Outcome { report: None, stdout: String::new(), stderr: text, code }
            };
        }
    };
    match execute(&cli) {
        Ok((report, text)) => {
            let code = if report.verified == Some(false) { 1 } else { 0 };
            let stdout = if cli.json { serde_json::to_string_pretty(&report).expect("report serializes") + "\n" } else { text };
            Outcome { report: Some(report), stdout, stderr: String::new(), code }
        }
        Err(Usage(msg)) => Outcome { report: None, stdout: String::new(), stderr: format!("error: {msg}\n"), code: 2 },
    }
}

fn parse_type(s: &str) -> R<WeightedType> {
    Ok(WeightedType::parse(s)?)
}

fn parse_list<T: std::str::FromStr>(s: &str) -> R<Vec<T>> {
    s.split(',').map(|x| x.trim().parse::<T>().map_err(|_| Usage(format!("cannot parse {x:?}")))).collect()
}

fn parse_n_range(s: &str) -> R<std::ops::RangeInclusive<usize>> {
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse()?, b.trim_start_matches('=').trim().parse()?),
        None => {
            let n = s.trim().parse()?;
            (n, n)
        }
    };
    if a == 0 || a > b {
        return Err(Usage(format!("bad range {s:?}")));
    }
    Ok(a..=b)
}

fn numeric(z: &CycloNum, precision: u32) -> String {
    let (re, im) = embed(z, precision).mid_f64();
    format!("{re:.10} {} {:.10}i", if im < 0.0 { '-' } else { '+' }, im.abs())
}

fn cyclo_json(z: &CycloNum, precision: u32) -> Value {
    json!({ "exact": z.to_string(), "coeffs": z.to_json(), "numeric": numeric(z, precision) })
}

fn rows_table(rows: &[TypeRow]) -> String {
    let mut s = format!("{:<12} {:>3} {:>4}  {:<28} {}\n", "weights", "d", "eps", "W", "geometry");
    for r in rows {
        let w: Vec<String> = r.weights.iter().map(|a| a.to_string()).collect();
        s += &format!("{:<12} {:>3} {:>4}  {:<28} {}\n", format!("({})", w.join(",")), r.d, r.epsilon, r.w_string, r.geometry);
    }
    s
}

fn execute(cli: &Cli) -> R<(Report, String)> {
    let prec = cli.precision;
    match &cli.cmd {
        Cmd::Classify { n, dmax } => {
            let range = parse_n_range(n)?;
            let rows = classify::enumerate_types(range, *dmax);
            let report = Report { command: "classify".into(), inputs: json!({ "n": n, "dmax": dmax }), results: json!(rows), verified: None };
            Ok((report, rows_table(&rows)))
        }
        Cmd::Table1 => {
            let rows = classify::table1();
            let ok = rows.len() == 12;
            let text = rows_table(&rows) + &format!("{} rows\n", rows.len());
            Ok((Report { command: "table1".into(), inputs: json!({}), results: json!(rows), verified: Some(ok) }, text))
        }
        Cmd::Charge { t, class } => charge(&parse_type(&t.ty)?, class, prec),
        Cmd::Zg { t, class } => zg(&parse_type(&t.ty)?, class, prec),
        Cmd::GepnerCheck { t } => gepner_check(&parse_type(&t.ty)?, prec),
        Cmd::Phases { t } => phases(&parse_type(&t.ty)?),
        Cmd::Ext { t, from, to } => ext(&parse_type(&t.ty)?, from, to),
        Cmd::Stability { t, object, point, primes } => stability(&parse_type(&t.ty)?, object, *point, &parse_list(primes)?),
        Cmd::Hn { ty, rep, primes } => hn(ty.as_deref(), rep, &parse_list(primes)?),
    }
}

fn sheaf_class(geom: &Geometry, c: &[Q]) -> R<ChClass> {
    let want = match geom {
        Geometry::Points { .. } => 1,
        Geometry::Curve { .. } | Geometry::Elliptic { .. } => 2,
        Geometry::K3 { .. } => 3,
    };
    if c.len() != want {
        return Err(Usage(format!("{geom} needs {want} Chern character coordinates, got {}", c.len())));
    }
    Ok(match *geom {
        Geometry::Points { count } => ChClass::points(count, c[0].clone()),
        Geometry::Curve { genus, degree } => ChClass::curve(genus, degree, c[0].clone(), c[1].clone()),
        Geometry::Elliptic { h } => ChClass::elliptic(h, c[0].clone(), c[1].clone()),
        Geometry::K3 { h2 } => ChClass::k3(h2, c[0].clone(), c[1].clone(), c[2].clone()),
    })
}

fn charge(ty: &WeightedType, class: &str, prec: u32) -> R<(Report, String)> {
    let geom = classify::geometry(ty).ok_or_else(|| Usage(format!("{ty} has no supported geometry")))?;
    let coords = class.split(',').map(|x| parse_rational(x.trim())).collect::<Result<Vec<_>, _>>()?;
    let e = sheaf_class(&geom, &coords)?;
    let model = GeomModel::new(ty)?;
    let dag = geomcharge::zg_dag(&e, &model.sol)?;
    let full = geomcharge::zg_geom(&e, &model.sol, &model.consts)?;
    let text = format!(
        "X: {geom}\nZ_G^dag = {dag}  ~ {}\nZ_G     = {full}  ~ {}\nC_W = {}, theta_W = {}\n",
        numeric(&dag, prec),
        numeric(&full, prec),
        model.consts.c_w,
        model.consts.theta_w
    );
    let results = json!({
        "geometry": geom,
        "zg_dag": cyclo_json(&dag, prec),
        "zg": cyclo_json(&full, prec),
        "c_w": cyclo_json(&model.consts.c_w, prec),
        "theta_w": model.consts.theta_w.to_string(),
    });
    Ok((Report { command: "charge".into(), inputs: json!({ "type": ty.to_string(), "class": class }), results, verified: None }, text))
}

fn zg(ty: &WeightedType, class: &str, prec: u32) -> R<(Report, String)> {
    let l = hearts::build_lattice(ty)?;
    let v: Vec<i64> = parse_list(class)?;
    if v.len() != l.rank() {
        return Err(Usage(format!("the lattice has rank {} (basis {})", l.rank(), l.labels.join(", "))));
    }
    let dag = l.zg_class(&v);
    let full = l.zg_full(&v);
    let mu = l.slope_mu(&v);
    let text = format!(
        "basis: {}\nZ_G^dag = {dag}  ~ {}\nZ_G     = {full}  ~ {}\nmu      = {}\n",
        l.labels.join(", "),
        numeric(&dag, prec),
        numeric(&full, prec),
        l.slope.render(&mu)
    );
    let results = json!({
        "basis": l.labels,
        "class": v,
        "zg_dag": cyclo_json(&dag, prec),
        "zg": cyclo_json(&full, prec),
        "mu": l.slope.render(&mu),
    });
    Ok((Report { command: "zg".into(), inputs: json!({ "type": ty.to_string(), "class": class }), results, verified: None }, text))
}

fn gepner_check(ty: &WeightedType, prec: u32) -> R<(Report, String)> {
    let l = hearts::build_lattice(ty);
    // the constructor refuses lattices that fail the identity
    let l = match l {
        Ok(l) => l,
        Err(hearts::HeartError::GepnerIdentityFailure(bad)) => {
            let text = format!("Z∘τ = ζ·Z: FAILED on basis vectors {bad:?}\n");
            let results = json!({ "failures": bad });
            return Ok((Report { command: "gepner-check".into(), inputs: json!({ "type": ty.to_string() }), results, verified: Some(false) }, text));
        }
        Err(e) => return Err(e.into()),
    };
    let zeta = crate::exactmath::cyclo(l.d(), 1);
    let mut text = format!("case {} basis {}\n", l.case_id, l.labels.join(", "));
    let mut rows = Vec::new();
    for (i, label) in l.labels.iter().enumerate() {
        let mut e = vec![0; l.rank()];
        e[i] = 1;
        let lhs = l.zg_class(&l.tau_apply(&e));
        let rhs = &zeta * &l.zg_class(&e);
        let ok = lhs == rhs;
        text += &format!("  {label:<10} Z(τe) = {lhs}  ζZ(e) = {rhs}  {}\n", if ok { "ok" } else { "MISMATCH" });
        rows.push(json!({ "basis": label, "z_tau": cyclo_json(&lhs, prec), "zeta_z": cyclo_json(&rhs, prec), "ok": ok }));
    }
    let ok = l.verify_gepner();
    text += &format!("Z∘τ = ζ·Z: {} ({} basis vectors)\n", if ok { "OK" } else { "FAILED" }, l.rank());
    let results = json!({ "case": l.case_id, "rows": rows });
    Ok((Report { command: "gepner-check".into(), inputs: json!({ "type": ty.to_string() }), results, verified: Some(ok) }, text))
}

fn phases(ty: &WeightedType) -> R<(Report, String)> {
    let inputs = json!({ "type": ty.to_string() });
    if ty.epsilon < 0 && hearts::case_of(ty).is_some() {
        let l = hearts::build_lattice(ty)?;
        let rows = hearts::phase_table(&l)?;
        let ok = rows.iter().all(|r| r.agree) && hearts::window_inequalities(&l);
        let mut text = format!("theta_W = {}, theta = {}\n", l.theta_w, l.theta);
        for r in &rows {
            text += &format!(
                "  {:<10} computed {:<8} closed form {:<8} {}\n",
                r.label,
                r.computed.as_deref().unwrap_or("-"),
                r.closed_form,
                if r.agree { "agree" } else { "DIFFER" }
            );
        }
        let results = json!({ "theta_w": l.theta_w.to_string(), "theta": l.theta.to_string(), "rows": rows });
        return Ok((Report { command: "phases".into(), inputs, results, verified: Some(ok) }, text));
    }
    if let Ok(rows) = hearts::finite_phases(ty) {
        let ok = rows.iter().all(|r| r.ray_consistent);
        let mut text = String::new();
        for r in &rows {
            text += &format!("  {:<10} {:<8} {}\n", r.label, r.phase, if r.ray_consistent { "on ray" } else { "OFF RAY" });
        }
        return Ok((Report { command: "phases".into(), inputs, results: json!({ "rows": rows }), verified: Some(ok) }, text));
    }
    let l = hearts::build_lattice(ty)?;
    let mut text = format!("theta = {}\n", l.theta);
    let mut rows = Vec::new();
    let mut ok = true;
    for c in l.named_classes() {
        let p = l.heart_phase(&c.class)?;
        ok &= p.is_some();
        let shown = p.as_ref().map(|x| x.to_string()).unwrap_or_else(|| "outside window".into());
        text += &format!("  {:<10} {}\n", c.label, shown);
        rows.push(json!({ "label": c.label, "class": c.class, "phase": p.map(|x| x.to_string()) }));
    }
    Ok((Report { command: "phases".into(), inputs, results: json!({ "theta": l.theta.to_string(), "rows": rows }), verified: Some(ok) }, text))
}

/// "C(j)" ↦ j.
fn c_index(s: &str) -> Option<i64> {
    s.trim().strip_prefix("C(")?.strip_suffix(')')?.trim().parse().ok()
}

fn ext(ty: &WeightedType, from: &str, to: &str) -> R<(Report, String)> {
    let a = c_index(from).ok_or_else(|| Usage(format!("--from must be C(j), got {from:?}")))?;
    let mut rows = Vec::new();
    let mut text = format!("Hom^i({from}, {to})\n");
    if let Some(b) = c_index(to) {
        let j = a - b;
        for i in 0..=3 {
            let e = extcalc::ext_cc(ty, j, i)?;
            text += &format!("  i={i}: {}\n", e.dim);
            rows.push(json!({ "i": i, "dim": e.dim, "in_table_range": e.in_table_range }));
        }
    } else {
        let k: usize = to.trim().strip_prefix('p').and_then(|s| if s.is_empty() { Some(1) } else { s.parse().ok() }).ok_or_else(|| Usage(format!("--to must be C(j) or p<k>, got {to:?}")))?;
        let pts = extcalc::fermat_points(ty)?;
        let p = pts.get(k.wrapping_sub(1)).ok_or_else(|| Usage(format!("there are {} points", pts.len())))?;
        text = format!("Hom^i({from}, O_x) at x = ({}, {})\n", p.0, p.1);
        for i in 0..=3 {
            let e = extcalc::ext_cm(ty, a, p, i)?;
            text += &format!("  i={i}: {}\n", e.dim);
            rows.push(json!({ "i": i, "dim": e.dim, "in_table_range": e.in_table_range, "witness_valid": e.witness_valid }));
        }
    }
    Ok((Report { command: "ext".into(), inputs: json!({ "type": ty.to_string(), "from": from, "to": to }), results: json!(rows), verified: None }, text))
}

fn stability(ty: &WeightedType, object: &str, point: usize, primes: &[u64]) -> R<(Report, String)> {
    let q = quiverrep::heart_quiver(ty)?;
    for &p in primes {
        if !quiverrep::good_prime(&q, p) {
            return Err(Usage(format!("p = {p} is not a good prime for this point model")));
        }
    }
    let rep = quiverrep::stability_over_primes(ty, object, point, primes)?;
    let mut text = format!("{object} dims {:?} over {}\n{}\n", rep.dims, q.vertices.join(", "), rep.summary());
    let mut results = json!(rep);
    let l = hearts::build_lattice(ty)?;
    if object == "C2m1" && l.case_id == CaseId::PointsInK3 && ty.degree == 6 {
        let shown = hearts::displayed_c2m1_d6();
        let ours = quiverrep::class_of(&rep.dims);
        text += &format!(
            "class used (Gepner-consistent): {ours:?}, Z^dag = {}, mu = {}\nclass as displayed:             {shown:?}, Z^dag = {}, mu = {}\n",
            l.zg_class(&ours),
            l.slope.render(&l.slope_mu(&ours)),
            l.zg_class(&shown),
            l.slope.render(&l.slope_mu(&shown)),
        );
        results["displayed_class"] = json!(shown);
    }
    let inputs = json!({ "type": ty.to_string(), "object": object, "point": point, "primes": primes });
    Ok((Report { command: "stability".into(), inputs, results, verified: Some(rep.stable()) }, text))
}

fn hn(ty: Option<&str>, path: &str, primes: &[u64]) -> R<(Report, String)> {
    let raw = std::fs::read_to_string(path).map_err(|e| Usage(format!("{path}: {e}")))?;
    let v: Value = serde_json::from_str(&raw)?;
    let ty_s = ty.map(str::to_string).or_else(|| v.get("type").and_then(|t| t.as_str()).map(str::to_string)).ok_or_else(|| Usage("missing --type".into()))?;
    let ty = parse_type(&ty_s)?;
    let q = quiverrep::heart_quiver(&ty)?;
    let spec = StabilitySpec::for_lattice(&hearts::build_lattice(&ty)?);
    let (rep, field) = quiverrep::rep_from_json(&q, &v)?;
    let ps: Vec<u64> = match field {
        Field::Fp(p) => vec![p],
        Field::Q => primes.to_vec(),
    };
    let mut text = String::new();
    let mut out = Vec::new();
    let mut ok = true;
    for p in ps {
        let r = rep.reduce(p)?;
        if let Some(i) = r.violated_relation(&q) {
            return Err(Usage(format!("relation {i} fails over F_{p}")));
        }
        let check = quiverrep::hn_checked(&q, &r, &spec)?;
        ok &= check.ok();
        text += &format!("over F_{p}:\n");
        for (f, k) in check.factors.iter().zip(&check.keys) {
            text += &format!("  factor {f:?}  key {k}\n");
        }
        text += &format!("  telescopes {}, semistable factors {}, decreasing {}\n", check.telescopes, check.semistable, check.decreasing);
        out.push(json!({ "p": p, "hn": check }));
    }
    Ok((Report { command: "hn".into(), inputs: json!({ "type": ty.to_string(), "rep": path }), results: json!(out), verified: Some(ok) }, text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &[&str]) -> Outcome {
        run(std::iter::once("gepner").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(go(&["nope"]).code, 2);
        assert_eq!(go(&["zg", "--type", "1,1:4", "--class", "1,2"]).code, 2);
        assert_eq!(go(&["gepner-check", "--type", "x"]).code, 2);
        assert_eq!(go(&["--help"]).code, 0);
    }

    #[test]
    fn gepner_check_line() {
        let o = go(&["gepner-check", "--type", "1,1:4"]);
        assert_eq!(o.code, 0);
        assert!(o.stdout.contains("Z∘τ = ζ·Z: OK (6 basis vectors)"), "{}", o.stdout);
    }

    #[test]
    fn stability_line() {
        let o = go(&["stability", "--type", "1,1:3", "--object", "C1m1", "--primes", "5,7"]);
        assert_eq!(o.code, 0);
        assert!(o.stdout.contains("stable (verified over F_5, F_7)"));
        let o = go(&["stability", "--type", "3,1:6", "--object", "C2m1"]);
        assert!(o.stdout.contains("as displayed"));
    }

    #[test]
    fn json_reports_parse() {
        let o = go(&["--json", "table1"]);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["results"].as_array().unwrap().len(), 12);
        let o = go(&["charge", "--type", "1,1,1,1:4", "--class", "1,0,0", "--json"]);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["results"]["zg_dag"]["exact"], "-1 + z4");
    }

    #[test]
    fn ext_tables() {
        let o = go(&["ext", "--type", "1,1:4", "--from", "C(1)", "--to", "C(0)"]);
        assert!(o.stdout.contains("i=1: 2"));
        let o = go(&["ext", "--type", "1,1:4", "--from", "C(1)", "--to", "p2"]);
        assert!(o.stdout.contains("i=2: 1"), "{}", o.stdout);
    }
}
