//! Loader for textual model definition files.
//!
//! A model file is a sequence of INI-style sections. `[model]` names the
//! bundle and declares its rank, one `[chart]` per frame patch gives
//! coordinate names and the coordinate box (the unique chart marked
//! `principal = true` is the one integrals run over), `[connection]`
//! lists the upper connection entries as comma-separated per-coordinate
//! expressions, `[transition]` gives the frame-change matrix between two
//! charts, and `[reference]` records the expected Euler number. Lines
//! starting with `#` are comments. Parsed models pass through exactly
//! the same structural validation as the built-in catalog.
//!
//! ```text
//! [model]
//! name = sphere_round
//! rank = 2
//!
//! [chart]
//! name = sphere
//! coords = theta, phi
//! box = 0 : 3.141592653589793, 0 : 6.283185307179586
//! principal = true
//!
//! [connection]
//! chart = sphere
//! omega_1_2 = 0, cos(theta)
//!
//! [reference]
//! chi = 2
//! derivation = chi(S^2) = 2
//! ```

use super::ModelBundle;
use crate::bundles::{FrameTransition, FramedBundle, MetricConnection};
use crate::error::{Error, Result};
use crate::exprlang::{parse, Expr};
use crate::forms::{ChartDomain, ChartForm, Coefficient};
use crate::pfaffian::SkewFormMatrix;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

/// Read and validate a model definition file.
pub fn load_model_file(path: impl AsRef<Path>) -> Result<ModelBundle> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_model_text(&text, &path.display().to_string())
}

/// Parse model text; `source` labels error messages (usually the path).
pub fn parse_model_text(text: &str, source: &str) -> Result<ModelBundle> {
    let sections = split_sections(text, source)?;
    let mut model: Option<Section> = None;
    let mut charts: Vec<Section> = Vec::new();
    let mut connections: Vec<Section> = Vec::new();
    let mut transitions: Vec<Section> = Vec::new();
    let mut reference: Option<Section> = None;
    for section in sections {
        let line = section.line;
        let fail = move |reason: &str| err(source, line, reason);
        match section.name.as_str() {
            "model" => {
                if model.replace(section).is_some() {
                    return Err(fail("duplicate [model] section"));
                }
            }
            "chart" => charts.push(section),
            "connection" => connections.push(section),
            "transition" => transitions.push(section),
            "reference" => {
                if reference.replace(section).is_some() {
                    return Err(fail("duplicate [reference] section"));
                }
            }
            other => return Err(fail(&format!("unknown section [{other}]"))),
        }
    }
    let model = model.ok_or_else(|| err(source, 1, "missing [model] section"))?;
    let reference = reference.ok_or_else(|| err(source, 1, "missing [reference] section"))?;
    if charts.is_empty() {
        return Err(err(source, 1, "a model needs at least one [chart]"));
    }

    let name = model.required(source, "name")?.to_string();
    let rank: usize = model.parsed(source, "rank")?;
    model.finish(source)?;

    let parsed_charts = build_charts(source, &charts)?;
    let chart_index = |label: &str, line: usize| -> Result<usize> {
        parsed_charts
            .iter()
            .position(|c| c.name() == label)
            .ok_or_else(|| err(source, line, &format!("unknown chart `{label}`")))
    };

    let mut matrices: Vec<Option<SkewFormMatrix>> = vec![None; parsed_charts.len()];
    for section in &connections {
        let label = section.required(source, "chart")?;
        let index = chart_index(label, section.line)?;
        let chart = parsed_charts[index].clone();
        let matrix = build_connection(source, section, chart, rank)?;
        if matrices[index].replace(matrix).is_some() {
            return Err(err(
                source,
                section.line,
                &format!("chart `{label}` has two [connection] sections"),
            ));
        }
    }
    let matrices: Vec<SkewFormMatrix> = matrices
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            m.ok_or_else(|| {
                err(
                    source,
                    1,
                    &format!("chart `{}` has no [connection] section", parsed_charts[i].name()),
                )
            })
        })
        .collect::<Result<_>>()?;

    let mut parsed_transitions = Vec::new();
    for section in &transitions {
        let from_label = section.required(source, "from")?;
        let to_label = section.required(source, "to")?;
        let from = chart_index(from_label, section.line)?;
        let to = chart_index(to_label, section.line)?;
        let coords = parsed_charts[from].coordinates().to_vec();
        let intervals = parse_box(source, section, "region", &coords)?;
        let region = ChartDomain::new(
            format!("overlap_{from_label}_{to_label}"),
            coords.clone(),
            intervals,
            false,
        )?;
        let mut matrix = Vec::with_capacity(rank);
        for i in 1..=rank {
            let mut row = Vec::with_capacity(rank);
            for j in 1..=rank {
                let key = format!("a_{i}_{j}");
                let (value, line) = section.required_with_line(source, &key)?;
                row.push(parse_expr(source, line, value, &coords)?);
            }
            matrix.push(row);
        }
        section.finish(source)?;
        parsed_transitions.push(FrameTransition::new(from, to, region, matrix));
    }

    let chi: i64 = reference.parsed(source, "chi")?;
    let derivation = reference.optional("derivation").unwrap_or("").to_string();
    let degree: Option<i64> = reference.parsed_optional(source, "degree")?;
    reference.finish(source)?;

    let bundle = FramedBundle::new(&name, rank, parsed_charts, parsed_transitions)?;
    let connection = MetricConnection::new(&bundle, matrices)?;
    ModelBundle::assemble(name, bundle, connection, chi, derivation, degree)
}

fn err(source: &str, line: usize, reason: &str) -> Error {
    Error::ModelFile {
        path: source.to_string(),
        line,
        reason: reason.to_string(),
    }
}

/// One `[name]` block: its keys, with the line each value came from, and
/// a consumption mark so unknown keys can be reported.
struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, (String, usize)>,
    consumed: std::cell::RefCell<Vec<String>>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&(String, usize)> {
        let found = self.entries.get(key);
        if found.is_some() {
            self.consumed.borrow_mut().push(key.to_string());
        }
        found
    }

    fn optional(&self, key: &str) -> Option<&str> {
        self.get(key).map(|(v, _)| v.as_str())
    }

    fn required(&self, source: &str, key: &str) -> Result<&str> {
        self.required_with_line(source, key).map(|(v, _)| v)
    }

    fn required_with_line(&self, source: &str, key: &str) -> Result<(&str, usize)> {
        self.get(key)
            .map(|(v, line)| (v.as_str(), *line))
            .ok_or_else(|| {
                err(
                    source,
                    self.line,
                    &format!("[{}] is missing `{key}`", self.name),
                )
            })
    }

    fn parsed<T: std::str::FromStr>(&self, source: &str, key: &str) -> Result<T> {
        let (value, line) = self.required_with_line(source, key)?;
        value
            .parse()
            .map_err(|_| err(source, line, &format!("`{key}` has a malformed value `{value}`")))
    }

    fn parsed_optional<T: std::str::FromStr>(&self, source: &str, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((value, line)) => value.parse().map(Some).map_err(|_| {
                err(source, *line, &format!("`{key}` has a malformed value `{value}`"))
            }),
        }
    }

    fn mark_consumed(&self, key: &str) {
        self.consumed.borrow_mut().push(key.to_string());
    }

    /// Reject keys nothing consumed — typos otherwise vanish silently.
    fn finish(&self, source: &str) -> Result<()> {
        let consumed = self.consumed.borrow();
        for (key, (_, line)) in &self.entries {
            if !consumed.iter().any(|c| c == key) {
                return Err(err(
                    source,
                    *line,
                    &format!("unknown key `{key}` in [{}]", self.name),
                ));
            }
        }
        Ok(())
    }
}

fn split_sections(text: &str, source: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let number = index + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(header) = line.strip_prefix('[') {
            let name = header
                .strip_suffix(']')
                .ok_or_else(|| err(source, number, "unterminated section header"))?;
            sections.push(Section {
                name: name.trim().to_string(),
                line: number,
                entries: BTreeMap::new(),
                consumed: std::cell::RefCell::new(Vec::new()),
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(source, number, "expected `key = value`"))?;
        let section = sections
            .last_mut()
            .ok_or_else(|| err(source, number, "entry before any [section] header"))?;
        let key = key.trim().to_string();
        if section
            .entries
            .insert(key.clone(), (value.trim().to_string(), number))
            .is_some()
        {
            return Err(err(source, number, &format!("duplicate key `{key}`")));
        }
    }
    Ok(sections)
}

fn build_charts(source: &str, sections: &[Section]) -> Result<Vec<Arc<ChartDomain>>> {
    let mut principal = Vec::new();
    let mut auxiliary = Vec::new();
    for section in sections {
        let name = section.required(source, "name")?.to_string();
        let coords: Vec<String> = section
            .required(source, "coords")?
            .split(',')
            .map(|c| c.trim().to_string())
            .collect();
        let intervals = parse_box(source, section, "box", &coords)?;
        let is_principal = match section.optional("principal") {
            None => false,
            Some("true") => true,
            Some("false") => false,
            Some(other) => {
                return Err(err(
                    source,
                    section.line,
                    &format!("`principal` must be true or false, got `{other}`"),
                ))
            }
        };
        section.finish(source)?;
        let chart = ChartDomain::new(name, coords, intervals, is_principal)?;
        if is_principal {
            principal.push((chart, section.line));
        } else {
            auxiliary.push(chart);
        }
    }
    if principal.len() != 1 {
        return Err(err(
            source,
            principal.get(1).map(|(_, l)| *l).unwrap_or(1),
            &format!(
                "exactly one chart must set `principal = true`, found {}",
                principal.len()
            ),
        ));
    }
    let mut charts = vec![principal.remove(0).0];
    charts.extend(auxiliary);
    let mut names: Vec<&str> = charts.iter().map(|c| c.name()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(err(source, 1, "chart names must be unique"));
    }
    Ok(charts)
}

/// Parse `lo : hi, lo : hi, ...` — one interval per coordinate. The bounds
/// are constant expressions, so `6.28` and `2*3.14` both work.
fn parse_box(
    source: &str,
    section: &Section,
    key: &str,
    coords: &[String],
) -> Result<Vec<(f64, f64)>> {
    let (value, line) = section.required_with_line(source, key)?;
    let pieces: Vec<&str> = value.split(',').collect();
    if pieces.len() != coords.len() {
        return Err(err(
            source,
            line,
            &format!(
                "`{key}` lists {} intervals for {} coordinates",
                pieces.len(),
                coords.len()
            ),
        ));
    }
    pieces
        .iter()
        .map(|piece| {
            let (lo, hi) = piece.split_once(':').ok_or_else(|| {
                err(source, line, &format!("`{key}` intervals are written `lo : hi`"))
            })?;
            Ok((constant(source, line, lo)?, constant(source, line, hi)?))
        })
        .collect()
}

fn constant(source: &str, line: usize, src: &str) -> Result<f64> {
    let no_coords: [&str; 0] = [];
    let expr = parse_expr(source, line, src, &no_coords)?;
    expr.eval(&[])
        .map_err(|e| err(source, line, &format!("`{}`: {e}", src.trim())))
}

fn parse_expr<S: AsRef<str>>(source: &str, line: usize, src: &str, coords: &[S]) -> Result<Expr> {
    parse(src.trim(), coords).map_err(|e| err(source, line, &e.to_string()))
}

/// Build one chart's connection matrix from its `omega_i_j` keys (1-based,
/// upper triangle). A section with no `omega` keys is a flat connection.
fn build_connection(
    source: &str,
    section: &Section,
    chart: Arc<ChartDomain>,
    rank: usize,
) -> Result<SkewFormMatrix> {
    let coords = chart.coordinates().to_vec();
    let mut upper = Vec::new();
    for (key, (value, line)) in &section.entries {
        if key == "chart" {
            continue;
        }
        let indices: Option<(usize, usize)> = key.strip_prefix("omega_").and_then(|rest| {
            let (i, j) = rest.split_once('_')?;
            Some((i.parse().ok()?, j.parse().ok()?))
        });
        let (i, j) = indices.ok_or_else(|| {
            err(
                source,
                *line,
                &format!("unknown key `{key}` in [connection] (expected `omega_i_j`)"),
            )
        })?;
        if i == 0 || j == 0 || i >= j || j > rank {
            return Err(err(
                source,
                *line,
                &format!("`{key}` must satisfy 1 <= i < j <= {rank}"),
            ));
        }
        let components: Vec<Coefficient> = value
            .split(',')
            .map(|piece| Ok(Coefficient::Symbolic(parse_expr(source, *line, piece, &coords)?)))
            .collect::<Result<_>>()?;
        if components.len() != chart.dim() {
            return Err(err(
                source,
                *line,
                &format!(
                    "`{key}` lists {} components for {} coordinates",
                    components.len(),
                    chart.dim()
                ),
            ));
        }
        let form = ChartForm::one_form(chart.clone(), components)?;
        upper.push((i - 1, j - 1, form));
        section.mark_consumed(key);
    }
    section.finish(source)?;
    Ok(SkewFormMatrix::from_upper(chart, rank, 1, upper)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin;

    const SPHERE_TEXT: &str = "\
# Tangent bundle of the round sphere, two frames.
[model]
name = sphere_from_file
rank = 2

[chart]
name = sphere
coords = theta, phi
box = 0 : 3.141592653589793, 0 : 6.283185307179586
principal = true

[chart]
name = rotated
coords = theta, phi
box = 0 : 3.141592653589793, 0 : 6.283185307179586

[connection]
chart = sphere
omega_1_2 = 0, cos(theta)

[connection]
chart = rotated
omega_1_2 = cos(theta), 3 + cos(theta)

[transition]
from = sphere
to = rotated
region = 0 : 3.141592653589793, 0 : 6.283185307179586
a_1_1 = cos(3*phi + sin(theta))
a_1_2 = sin(3*phi + sin(theta))
a_2_1 = -sin(3*phi + sin(theta))
a_2_2 = cos(3*phi + sin(theta))

[reference]
chi = 2
derivation = chi(S^2) = 2
";

    #[test]
    fn file_model_matches_the_builtin_sphere() {
        let from_file = parse_model_text(SPHERE_TEXT, "inline").unwrap();
        let built_in = builtin("sphere_round").unwrap();
        assert_eq!(from_file.reference_chi(), 2);
        assert_eq!(from_file.rank(), 2);
        let a = from_file.gauss_bonnet(64).unwrap();
        let b = built_in.gauss_bonnet(64).unwrap();
        assert!((a - b).abs() < 1e-12, "file {a} vs builtin {b}");
    }

    #[test]
    fn an_empty_connection_section_means_flat() {
        let text = "\
[model]
name = flat
rank = 2
[chart]
name = torus
coords = u, v
box = 0 : 6.283185307179586, 0 : 6.283185307179586
principal = true
[connection]
chart = torus
[reference]
chi = 0
";
        let model = parse_model_text(text, "inline").unwrap();
        assert_eq!(model.gauss_bonnet(16).unwrap(), 0.0);
    }

    #[test]
    fn a_reflection_transition_is_rejected() {
        let text = SPHERE_TEXT.replace(
            "a_2_1 = -sin(3*phi + sin(theta))\na_2_2 = cos(3*phi + sin(theta))",
            "a_2_1 = sin(3*phi + sin(theta))\na_2_2 = -cos(3*phi + sin(theta))",
        );
        match parse_model_text(&text, "inline") {
            Err(Error::BadTransition { reason, .. }) => {
                assert!(reason.contains("orientation-reversing"), "{reason}")
            }
            other => panic!("expected a determinant rejection, got {other:?}"),
        }
    }

    #[test]
    fn a_connection_violating_the_frame_change_law_is_rejected() {
        // Drop the dtheta component of the rotated-frame connection.
        let text = SPHERE_TEXT.replace(
            "omega_1_2 = cos(theta), 3 + cos(theta)",
            "omega_1_2 = 0, 3 + cos(theta)",
        );
        match parse_model_text(&text, "inline") {
            Err(Error::ModelInvariant { check, .. }) => {
                assert_eq!(check, "frame_change_connection")
            }
            other => panic!("expected an invariant failure, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_the_offending_line() {
        let text = "\
[model]
name = broken
rank = 2
[chart]
name = c
coords = x, y
box = 0 : 1, 0 : 1
principal = true
[connection]
chart = c
omega_1_2 = x +, 0
[reference]
chi = 0
";
        match parse_model_text(text, "broken.model") {
            Err(Error::ModelFile { path, line, .. }) => {
                assert_eq!(path, "broken.model");
                assert_eq!(line, 11);
            }
            other => panic!("expected a located parse error, got {other:?}"),
        }
    }

    #[test]
    fn the_shipped_example_files_load_and_reproduce_their_references() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models");
        let mut seen = 0;
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().and_then(|e| e.to_str()) != Some("model") {
                continue;
            }
            seen += 1;
            let model = load_model_file(&path).unwrap_or_else(|e| {
                panic!("{} failed to load: {e}", path.display())
            });
            let chi = model.gauss_bonnet(96).unwrap();
            assert!(
                (chi - model.reference_chi() as f64).abs() < 1e-3,
                "{}: computed {chi}, reference {}",
                model.name(),
                model.reference_chi()
            );
        }
        assert!(seen >= 3, "expected shipped example files in {}", dir.display());
    }

    #[test]
    fn unknown_keys_and_malformed_sections_are_rejected() {
        let typo = SPHERE_TEXT.replace("principal = true", "principle = true");
        assert!(matches!(
            parse_model_text(&typo, "inline"),
            Err(Error::ModelFile { .. })
        ));
        let no_reference = SPHERE_TEXT.replace("[reference]", "[notes]");
        assert!(matches!(
            parse_model_text(&no_reference, "inline"),
            Err(Error::ModelFile { .. })
        ));
    }
}
