use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nbhd_core::classes::{from_kripke, to_kripke, ClassError, KripkeModel};
use nbhd_core::constructions::{quotient, ConstructionError};
use nbhd_core::decision::{self, DecisionError, DecisionResult};
use nbhd_core::equivalence::oracle::brute_force;
use nbhd_core::equivalence::{
    behavioural_equivalence, behavioural_report, bisimulation_report, cocongruence_check,
    distinguishing_formula, is_bisimulation, is_precocongruence, is_precongruence, largest_bisimulation,
    largest_congruence, largest_precocongruence, precocongruence_report, Certificate, Kind, Verdict,
    Violation,
};
use nbhd_core::fixtures;
use nbhd_core::fol::{fotrans, st};
use nbhd_core::model::{bounded_morphism_violation, MorphismViolation};
use nbhd_core::ufext::ultrafilter_extension;
use nbhd_core::{parse, Formula, NeighbourhoodModel, Relation, StateFunction};
use serde_json::{json, Value};

use crate::{Command, ExampleArg, KindArg};

pub struct Outcome {
    pub code: u8,
    pub json: Value,
    pub lines: Vec<String>,
}

impl Outcome {
    fn new(code: u8, json: Value, lines: Vec<String>) -> Self {
        Outcome { code, json, lines }
    }

    fn ok(json: Value, lines: Vec<String>) -> Self {
        Outcome::new(0, json, lines)
    }

    fn check(holds: bool, json: Value, lines: Vec<String>) -> Self {
        Outcome::new(if holds { 0 } else { 1 }, json, lines)
    }
}

enum CliError {
    Input(String),
    Cap(String),
}

impl CliError {
    fn into_outcome(self) -> Outcome {
        let (code, message) = match self {
            CliError::Input(m) => (2, m),
            CliError::Cap(m) => (3, m),
        };
        Outcome::new(
            code,
            json!({ "error": message }),
            vec![format!("error: {message}")],
        )
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

impl From<DecisionError> for CliError {
    fn from(e: DecisionError) -> Self {
        match e {
            DecisionError::NotValid => CliError::Input(e.to_string()),
            _ => CliError::Cap(e.to_string()),
        }
    }
}

pub fn run(command: &Command) -> Outcome {
    dispatch(command).unwrap_or_else(CliError::into_outcome)
}

fn dispatch(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Check {
            model,
            formula,
            state,
        } => check(model, formula, state.as_deref()),
        Command::Equiv {
            left,
            right,
            kind,
            relation,
        } => equiv(left, right, *kind, relation.as_deref()),
        Command::Morphism { from, to, map } => morphism(from, to, map),
        Command::Quotient { model, relation } => quotient_cmd(model, relation),
        Command::Minimize { model } => minimize(model),
        Command::Ufext { model } => ufext(model),
        Command::Translate { model, formula, var } => translate(model.as_deref(), formula.as_deref(), var),
        Command::FromKripke { kripke } => {
            let text = read(kripke)?;
            let k = KripkeModel::from_json(&text).map_err(input)?;
            let m = from_kripke(&k);
            Ok(Outcome::ok(
                m.to_json_value(),
                vec![format!("{} states", m.len())],
            ))
        }
        Command::ToKripke { model } => to_kripke_cmd(model),
        Command::Sat { formula } => {
            let phi = formula_arg(formula)?;
            Ok(decision_outcome(decision::satisfiable(&phi)?))
        }
        Command::Valid { formula, premise } => {
            let phi = formula_arg(formula)?;
            let premises = premise
                .iter()
                .map(|p| formula_arg(p))
                .collect::<Result<Vec<_>, _>>()?;
            let result = if premises.is_empty() {
                decision::valid(&phi)?
            } else {
                decision::consequence(&premises, &phi)?
            };
            Ok(decision_outcome(result))
        }
        Command::Interpolate {
            left,
            right,
            max_size,
        } => interpolate(left, right, *max_size),
        Command::Examples { which } => Ok(match which {
            ExampleArg::Ex1 => example_one(),
            ExampleArg::Ex2 => example_two(),
        }),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<NeighbourhoodModel, CliError> {
    NeighbourhoodModel::from_json(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_pairs(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn formula_arg(text: &str) -> Result<Formula, CliError> {
    parse(text).map_err(|e| CliError::Input(format!("{text:?}: {e}")))
}

fn pairs_text(rel: &Relation, left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> String {
    let pairs: Vec<String> = rel
        .to_names(left, right)
        .iter()
        .map(|(a, b)| format!("({a},{b})"))
        .collect();
    format!("{{{}}}", pairs.join(", "))
}

fn check(model: &Path, formula: &str, state: Option<&str>) -> Result<Outcome, CliError> {
    let m = load_model(model)?;
    let phi = formula_arg(formula)?;
    let truth = m.truth_set(&phi);
    let mut out = json!({ "formula": phi.to_string(), "truth_set": m.names_of(truth) });
    let mut lines = vec![format!("[[{phi}]] = {{{}}}", m.names_of(truth).join(", "))];
    let Some(name) = state else {
        return Ok(Outcome::ok(out, lines));
    };
    let holds = m.satisfies_named(name, &phi).map_err(input)?;
    out["state"] = json!(name);
    out["holds"] = json!(holds);
    lines.push(format!("{name} {} {phi}", if holds { "|=" } else { "|/=" }));
    Ok(Outcome::check(holds, out, lines))
}

fn kinds(kind: KindArg) -> Vec<Kind> {
    match kind {
        KindArg::Bis => vec![Kind::Bisimulation],
        KindArg::Precocong => vec![Kind::Precocongruence],
        KindArg::Beh => vec![Kind::Behavioural],
        KindArg::All => vec![Kind::Bisimulation, Kind::Precocongruence, Kind::Behavioural],
    }
}

/// Whether every pair of `rel` is behaviourally equivalent, with a
/// distinguishing formula for the first pair that is not.
fn behavioural_verdict(rel: &Relation, left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> Verdict {
    rel.iter()
        .find_map(|(a, b)| {
            distinguishing_formula(left, a, right, b).map(|formula| Certificate {
                left: a,
                right: b,
                violation: Violation::Distinguished { formula },
            })
        })
        .map_or(Verdict::Holds, Verdict::Fails)
}

fn equiv(left: &Path, right: &Path, kind: KindArg, relation: Option<&Path>) -> Result<Outcome, CliError> {
    let (l, r) = (load_model(left)?, load_model(right)?);
    let given = match relation {
        Some(path) => Some(Relation::from_names(&load_pairs(path)?, &l, &r).map_err(input)?),
        None => None,
    };
    let mut results = BTreeMap::new();
    let mut lines = Vec::new();
    let mut all_hold = true;
    for k in kinds(kind) {
        let value = match &given {
            None => {
                let report = match k {
                    Kind::Bisimulation => bisimulation_report(&l, &r),
                    Kind::Precocongruence => precocongruence_report(&l, &r),
                    Kind::Behavioural => behavioural_report(&l, &r),
                };
                lines.push(format!(
                    "{}: {}",
                    k.as_str(),
                    pairs_text(&report.relation, &l, &r)
                ));
                report.to_json(&l, &r)
            }
            Some(rel) => {
                let verdict = match k {
                    Kind::Bisimulation => is_bisimulation(rel, &l, &r),
                    Kind::Precocongruence => is_precocongruence(rel, &l, &r),
                    Kind::Behavioural => behavioural_verdict(rel, &l, &r),
                };
                all_hold &= verdict.holds();
                let certificate = verdict.certificate().map(|c| c.to_json(&l, &r));
                lines.push(match &certificate {
                    None => format!("{}: holds", k.as_str()),
                    Some(c) => format!("{}: fails, {c}", k.as_str()),
                });
                json!({
                    "kind": k.as_str(),
                    "pairs": rel.to_names(&l, &r),
                    "holds": verdict.holds(),
                    "certificate": certificate,
                })
            }
        };
        results.insert(k.as_str(), value);
    }
    let out = if results.len() == 1 {
        results.into_values().next().expect("one kind")
    } else {
        json!(results)
    };
    Ok(Outcome::check(all_hold, out, lines))
}

fn violation_json(v: &MorphismViolation, source: &NeighbourhoodModel, target: &NeighbourhoodModel) -> Value {
    match v {
        MorphismViolation::Neighbourhood {
            state,
            target_set,
            in_source,
        } => json!({
            "violation": "neighbourhood",
            "state": source.name(*state),
            "set": target.names_of(*target_set),
            "preimage_is_neighbourhood": in_source,
        }),
        MorphismViolation::Atom { state, atom } => json!({
            "violation": "atom",
            "state": source.name(*state),
            "atom": format!("p{atom}"),
        }),
        MorphismViolation::Shape => json!({ "violation": "shape" }),
    }
}

fn morphism(from: &Path, to: &Path, map: &Path) -> Result<Outcome, CliError> {
    let (source, target) = (load_model(from)?, load_model(to)?);
    let names: BTreeMap<String, String> =
        serde_json::from_str(&read(map)?).map_err(|e| CliError::Input(format!("{}: {e}", map.display())))?;
    for key in names.keys() {
        source.state(key).map_err(input)?;
    }
    let mut image = Vec::with_capacity(source.len());
    for name in source.states() {
        let t = names
            .get(name)
            .ok_or_else(|| CliError::Input(format!("map has no image for {name:?}")))?;
        image.push(target.state(t).map_err(input)?);
    }
    let f = StateFunction::new(image, target.len()).map_err(input)?;
    let atoms = source
        .atom_support()
        .union(&target.atom_support())
        .copied()
        .collect();
    let violation = bounded_morphism_violation(&f, &source, &target, &atoms);
    let detail = violation.as_ref().map(|v| violation_json(v, &source, &target));
    let line = match &detail {
        None => "bounded morphism".to_string(),
        Some(d) => format!("not a bounded morphism: {d}"),
    };
    Ok(Outcome::check(
        violation.is_none(),
        json!({ "bounded_morphism": violation.is_none(), "violation": detail }),
        vec![line],
    ))
}

fn quotient_cmd(model: &Path, relation: &Path) -> Result<Outcome, CliError> {
    let m = load_model(model)?;
    let rel = Relation::from_names(&load_pairs(relation)?, &m, &m).map_err(input)?;
    match quotient(&m, &rel) {
        Ok(q) => {
            let map: BTreeMap<&str, &str> = (0..m.len())
                .map(|s| (m.name(s), q.model.name(q.map.apply(s))))
                .collect();
            Ok(Outcome::ok(
                json!({ "congruence": true, "model": q.model.to_json_value(), "map": map }),
                vec![format!("quotient has {} states", q.model.len())],
            ))
        }
        Err(ConstructionError::NotACongruence(cert)) => {
            let c = cert.to_json(&m, &m);
            Ok(Outcome::check(
                false,
                json!({ "congruence": false, "certificate": c }),
                vec![format!("not a congruence: {c}")],
            ))
        }
        Err(e) => Err(input(e)),
    }
}

fn minimize(model: &Path) -> Result<Outcome, CliError> {
    let m = load_model(model)?;
    let partition = largest_congruence(&m);
    let q = quotient(&m, &partition.to_relation()).expect("the largest congruence is a congruence");
    let blocks: Vec<Vec<&str>> = partition.blocks().iter().map(|&b| m.names_of(b)).collect();
    let line = format!("{} states -> {} states", m.len(), q.model.len());
    Ok(Outcome::ok(
        json!({ "model": q.model.to_json_value(), "blocks": blocks }),
        vec![line],
    ))
}

fn ufext(model: &Path) -> Result<Outcome, CliError> {
    let m = load_model(model)?;
    let ext = ultrafilter_extension(&m);
    let principal: BTreeMap<&str, &str> = (0..m.len())
        .map(|s| (m.name(s), ext.model.name(ext.principal.apply(s))))
        .collect();
    let line = format!("{} ultrafilters, all principal", ext.ultrafilters.len());
    Ok(Outcome::ok(
        json!({ "model": ext.model.to_json_value(), "principal": principal }),
        vec![line],
    ))
}

fn translate(model: Option<&Path>, formula: Option<&str>, var: &str) -> Result<Outcome, CliError> {
    if let Some(path) = model {
        let structure = fotrans(&load_model(path)?);
        let line = format!(
            "{} states, {} neighbourhoods",
            structure.states.len(),
            structure.nbhds.len()
        );
        return Ok(Outcome::ok(structure.to_json_value(), vec![line]));
    }
    let phi = formula_arg(formula.expect("clap requires --model or --formula"))?;
    let translated = st(&phi, var).to_string();
    Ok(Outcome::ok(
        json!({ "formula": phi.to_string(), "variable": var, "st": translated }),
        vec![translated],
    ))
}

fn to_kripke_cmd(model: &Path) -> Result<Outcome, CliError> {
    let m = load_model(model)?;
    match to_kripke(&m) {
        Ok(k) => Ok(Outcome::ok(
            k.to_json_value(),
            vec![format!("{} edges", k.edges().len())],
        )),
        Err(ClassError::NotAugmented(state)) | Err(ClassError::NotMonotonic(state)) => Ok(Outcome::check(
            false,
            json!({ "augmented": false, "state": state }),
            vec![format!("not augmented at {state}")],
        )),
        Err(e) => Err(input(e)),
    }
}

fn decision_outcome(result: DecisionResult) -> Outcome {
    let verdict = result.verdict();
    let (model, witness) = match result.certificate() {
        Some((m, w)) => (m.to_json_value(), json!(m.name(w))),
        None => (Value::Null, Value::Null),
    };
    let mut lines = vec![verdict.to_string()];
    if let Some((m, w)) = result.certificate() {
        lines.push(format!("witness {} in a {}-state model", m.name(w), m.len()));
    }
    let holds = matches!(result, DecisionResult::Sat { .. } | DecisionResult::Valid);
    Outcome::check(
        holds,
        json!({ "verdict": verdict, "model": model, "witness": witness, "interpolant": null }),
        lines,
    )
}

fn interpolate(left: &str, right: &str, max_size: usize) -> Result<Outcome, CliError> {
    let (a, b) = (formula_arg(left)?, formula_arg(right)?);
    let (code, verdict, chi) = match decision::interpolant(&a, &b, max_size) {
        Ok(chi) => (0, "FOUND", Some(chi.to_string())),
        Err(DecisionError::NotValid) => (1, "NOT_VALID", None),
        Err(DecisionError::NotFoundWithinBound { .. }) => (3, "NOT_FOUND_WITHIN_BOUND", None),
        Err(e) => return Err(e.into()),
    };
    let line = match &chi {
        Some(c) => format!("{verdict}: {c}"),
        None => verdict.to_string(),
    };
    Ok(Outcome::new(
        code,
        json!({ "verdict": verdict, "model": null, "witness": null, "interpolant": chi, "max_size": max_size }),
        vec![line],
    ))
}

struct Facts {
    facts: Vec<Value>,
    lines: Vec<String>,
    all: bool,
}

impl Facts {
    fn new() -> Self {
        Facts {
            facts: Vec::new(),
            lines: Vec::new(),
            all: true,
        }
    }

    fn record(&mut self, fact: &str, holds: bool, detail: Value) {
        self.all &= holds;
        self.lines
            .push(format!("[{}] {fact}", if holds { "ok" } else { "FAILED" }));
        self.facts
            .push(json!({ "fact": fact, "holds": holds, "detail": detail }));
    }

    fn finish(mut self, name: &str, models: Value, summary: String) -> Outcome {
        self.lines.push(summary.clone());
        Outcome::check(
            self.all,
            json!({ "example": name, "models": models, "facts": self.facts, "summary": summary }),
            self.lines,
        )
    }
}

fn relation_of(n1: usize, n2: usize, pairs: &[(usize, usize)]) -> Relation {
    Relation::new(n1, n2, pairs.iter().copied()).expect("pairs in range")
}

fn morphism_fact(
    facts: &mut Facts,
    label: &str,
    f: &StateFunction,
    source: &NeighbourhoodModel,
    target: &NeighbourhoodModel,
) {
    let atoms = source
        .atom_support()
        .union(&target.atom_support())
        .copied()
        .collect();
    let violation = bounded_morphism_violation(f, source, target, &atoms);
    let detail = violation.as_ref().map(|v| violation_json(v, source, target));
    facts.record(
        &format!("{label} is a bounded morphism"),
        violation.is_none(),
        json!(detail),
    );
}

fn example_one() -> Outcome {
    let (t, s, u) = (fixtures::t(), fixtures::s(), fixtures::u());
    let mut facts = Facts::new();
    morphism_fact(&mut facts, "f1: T -> U", &fixtures::f1(), &t, &u);
    morphism_fact(&mut facts, "f2: S -> U", &fixtures::f2(), &s, &u);

    let expected = relation_of(3, 1, &[(0, 0), (1, 0)]);
    let bis = largest_bisimulation(&t, &s);
    facts.record(
        "largest bisimulation between T and S is empty",
        bis.is_empty(),
        json!(bis.to_names(&t, &s)),
    );
    let pre = largest_precocongruence(&t, &s);
    facts.record(
        "largest precocongruence between T and S is {(t1,s),(t2,s)}",
        pre == expected,
        json!(pre.to_names(&t, &s)),
    );
    let beh = behavioural_equivalence(&t, &s);
    facts.record(
        "behavioural equivalence between T and S is {(t1,s),(t2,s)}",
        beh == expected,
        json!(beh.to_names(&t, &s)),
    );
    let cocong = cocongruence_check(&t, &s, &u, &fixtures::f1(), &fixtures::f2());
    facts.record(
        "the pullback of f1 and f2 is a cocongruence relating (t1,s) and (t2,s)",
        cocong.as_ref().is_ok_and(|r| r == &expected),
        json!(cocong.as_ref().map(|r| r.to_names(&t, &s)).ok()),
    );
    let r_prime = relation_of(3, 3, &[(0, 1)]);
    let precong = is_precongruence(&r_prime, &t);
    facts.record(
        "R' = {(t1,t2)} is a precongruence on T",
        precong.holds(),
        json!(precong.certificate().map(|c| c.to_json(&t, &t))),
    );
    let precocong = is_precocongruence(&r_prime, &t, &t);
    facts.record(
        "R' = {(t1,t2)} is not a precocongruence from T to T",
        !precocong.holds(),
        json!(precocong.certificate().map(|c| c.to_json(&t, &t))),
    );
    let no_bis = brute_force(&t, &s, Kind::Bisimulation).expect("within the brute-force caps");
    facts.record(
        "exhaustive search finds no non-empty bisimulation between T and S",
        no_bis.is_empty(),
        json!(no_bis.to_names(&t, &s)),
    );

    let summary = format!(
        "largest bisimulation {}; largest precocongruence {}; behavioural equivalence {}",
        if bis.is_empty() {
            "empty".to_string()
        } else {
            pairs_text(&bis, &t, &s)
        },
        pairs_text(&pre, &t, &s),
        pairs_text(&beh, &t, &s),
    );
    let models = json!({
        "T": t.to_json_value(),
        "S": s.to_json_value(),
        "U": u.to_json_value(),
    });
    facts.finish("ex1", models, summary)
}

fn example_two() -> Outcome {
    let (tp, s, u) = (fixtures::t_prime(), fixtures::s(), fixtures::u());
    let mut facts = Facts::new();
    morphism_fact(&mut facts, "f1': T' -> U", &fixtures::f1_prime(), &tp, &u);
    morphism_fact(&mut facts, "f2: S -> U", &fixtures::f2(), &s, &u);

    let pre = largest_precocongruence(&tp, &s);
    facts.record(
        "largest precocongruence between T' and S is empty",
        pre.is_empty(),
        json!(pre.to_names(&tp, &s)),
    );
    let beh = behavioural_equivalence(&tp, &s);
    facts.record(
        "behavioural equivalence relates (t1,s)",
        beh.contains(0, 0),
        json!(beh.to_names(&tp, &s)),
    );
    let cocong = cocongruence_check(&tp, &s, &u, &fixtures::f1_prime(), &fixtures::f2());
    facts.record(
        "the pullback of f1' and f2 is a cocongruence containing (t1,s)",
        cocong.as_ref().is_ok_and(|r| r.contains(0, 0)),
        json!(cocong.as_ref().map(|r| r.to_names(&tp, &s)).ok()),
    );
    let exhaustive = brute_force(&tp, &s, Kind::Precocongruence).expect("within the brute-force caps");
    facts.record(
        "exhaustive search finds no precocongruence containing (t1,s)",
        !exhaustive.contains(0, 0),
        json!(exhaustive.to_names(&tp, &s)),
    );

    let related: Vec<String> = beh
        .to_names(&tp, &s)
        .iter()
        .map(|(a, b)| format!("({a},{b})"))
        .collect();
    let summary = format!(
        "largest precocongruence {}; behavioural equivalence relates {}",
        if pre.is_empty() {
            "empty".to_string()
        } else {
            pairs_text(&pre, &tp, &s)
        },
        related.join(", "),
    );
    let models = json!({
        "T'": tp.to_json_value(),
        "S": s.to_json_value(),
        "U": u.to_json_value(),
    });
    facts.finish("ex2", models, summary)
}
