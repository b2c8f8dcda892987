//! JSON file formats for graphs, base games and transformed-game tensors.
//!
//! Numbers are stored as JSON floats; values written by this module parse
//! back bit-identically.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::game::{CommandProfile, Mechanism, MoveLabels, NormalFormGame, Provenance, StrategicGame, TransformedGame};
use crate::graph::{HierarchyGraph, Role, Vertex};
use crate::influence::InfluenceModel;
use crate::payoff::ShareMatrix;
use crate::scalar::Scalar;
use crate::spin::Spin;
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: Vec<VertexEntry>,
    edges: Vec<EdgeEntry>,
    free_float: f64,
    noise_sigma: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexEntry {
    id: String,
    role: Role,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    from: String,
    to: String,
    weight: f64,
}

/// Parses a graph, checking only that ids resolve.
pub fn parse_graph<T: Scalar>(text: &str) -> Result<HierarchyGraph<T>> {
    let f: GraphFile = serde_json::from_str(text)?;
    HierarchyGraph::new(
        f.vertices.into_iter().map(|v| Vertex { id: v.id, role: v.role }).collect(),
        f.edges.into_iter().map(|e| (e.from, e.to, T::lit(e.weight))).collect(),
        T::lit(f.free_float),
        T::lit(f.noise_sigma),
    )
}

/// Parses a graph and enforces the hierarchy invariants.
pub fn read_graph<T: Scalar>(text: &str) -> Result<HierarchyGraph<T>> {
    let g = parse_graph(text)?;
    g.ensure_valid()?;
    Ok(g)
}

pub fn write_graph<T: Scalar>(g: &HierarchyGraph<T>) -> String {
    let f = GraphFile {
        vertices: g.vertices().iter().map(|v| VertexEntry { id: v.id.clone(), role: v.role }).collect(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeEntry {
                from: g.id(e.from).to_string(),
                to: g.id(e.to).to_string(),
                weight: e.weight.as_f64(),
            })
            .collect(),
        free_float: g.free_float().as_f64(),
        noise_sigma: g.noise_sigma().as_f64(),
    };
    serde_json::to_string_pretty(&f).expect("graph serializes")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    players: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<BTreeMap<String, String>>,
    payoffs: Vec<PayoffEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PayoffEntry {
    profile: Vec<String>,
    u: Vec<f64>,
}

fn labels_from_map(map: Option<BTreeMap<String, String>>) -> Result<MoveLabels> {
    let Some(mut map) = map else {
        return Ok(MoveLabels::default());
    };
    let up = map.remove("+1").ok_or_else(|| Error::Parse("labels need a \"+1\" entry".into()))?;
    let down = map.remove("-1").ok_or_else(|| Error::Parse("labels need a \"-1\" entry".into()))?;
    if let Some(k) = map.keys().next() {
        return Err(Error::Parse(format!("unexpected label key {k:?}")));
    }
    Ok(MoveLabels { up, down })
}

fn labels_to_map(labels: &MoveLabels) -> BTreeMap<String, String> {
    BTreeMap::from([("+1".to_string(), labels.up.clone()), ("-1".to_string(), labels.down.clone())])
}

/// A move written either as its label or as `+1` / `-1`.
fn parse_move(m: &str, labels: &MoveLabels) -> Result<Spin> {
    labels
        .parse(m)
        .or(match m {
            "+1" | "1" => Some(Spin::Up),
            "-1" => Some(Spin::Down),
            _ => None,
        })
        .ok_or_else(|| Error::Parse(format!("unknown move {m:?}")))
}

pub fn read_game<T: Scalar>(text: &str) -> Result<NormalFormGame<T>> {
    let f: GameFile = serde_json::from_str(text)?;
    let labels = labels_from_map(f.labels)?;
    let table = f
        .payoffs
        .into_iter()
        .map(|e| {
            let profile = e.profile.iter().map(|m| parse_move(m, &labels)).collect::<Result<Vec<_>>>()?;
            Ok((profile, e.u.into_iter().map(T::lit).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    NormalFormGame::new(f.players, labels, table)
}

pub fn write_game<T: Scalar>(game: &NormalFormGame<T>) -> String {
    let labels = game.labels();
    let f = GameFile {
        players: game.players().to_vec(),
        labels: Some(labels_to_map(labels)),
        payoffs: game
            .table()
            .map(|(profile, u)| PayoffEntry {
                profile: profile.iter().map(|&s| labels.label(s).to_string()).collect(),
                u: u.iter().map(|v| v.as_f64()).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&f).expect("game serializes")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorFile {
    deciders: Vec<String>,
    executives: Vec<String>,
    labels: BTreeMap<String, String>,
    /// `shares[λ][i]`.
    shares: Vec<Vec<f64>>,
    provenance: ProvenanceEntry,
    payoffs: Vec<TensorEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProvenanceEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    mechanism: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    free_float: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise_sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mode: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorEntry {
    /// One row of commands per decider.
    profile: Vec<Vec<String>>,
    nu: Vec<f64>,
}

pub fn write_tensor<T: Scalar>(t: &TransformedGame<T>) -> String {
    let n = t.executives.len();
    let p = &t.provenance;
    let f = TensorFile {
        deciders: t.deciders().to_vec(),
        executives: t.executives.clone(),
        labels: labels_to_map(&t.labels),
        shares: t.shares.entries().iter().map(|row| row.iter().map(|v| v.as_f64()).collect()).collect(),
        provenance: ProvenanceEntry {
            source: p.source.clone(),
            mechanism: p.mechanism.as_str().into(),
            model: p.model.map(|m| m.as_str().into()),
            free_float: p.free_float,
            noise_sigma: p.noise_sigma,
            mode: p.mode.map(|m| m.as_str().into()),
        },
        payoffs: t
            .game
            .payoffs()
            .iter()
            .enumerate()
            .map(|(k, nu)| TensorEntry {
                profile: CommandProfile::from_strategies(&t.game.profile(k), n)
                    .commands
                    .iter()
                    .map(|row| row.iter().map(|&s| t.labels.label(s).to_string()).collect())
                    .collect(),
                nu: nu.iter().map(|v| v.as_f64()).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&f).expect("tensor serializes")
}

pub fn read_tensor<T: Scalar>(text: &str) -> Result<TransformedGame<T>> {
    let f: TensorFile = serde_json::from_str(text)?;
    let labels = labels_from_map(Some(f.labels))?;
    let (m, n) = (f.deciders.len(), f.executives.len());
    if n >= usize::BITS as usize {
        return Err(Error::Parse(format!("{n} executives")));
    }
    let shares = ShareMatrix::new(
        f.deciders.clone(),
        f.executives.clone(),
        f.shares.into_iter().map(|row| row.into_iter().map(T::lit).collect()).collect(),
    )?;
    let shape = StrategicGame::<T>::new(f.deciders.clone(), vec![1 << n; m], vec![vec![T::zero(); m]; 1 << (n * m)])
        .map_err(|_| Error::Parse("tensor too large".into()))?;
    let mut payoffs: Vec<Option<Vec<T>>> = vec![None; shape.profile_count()];
    for e in f.payoffs {
        let commands = e
            .profile
            .iter()
            .map(|row| row.iter().map(|mv| parse_move(mv, &labels)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        if commands.len() != m || commands.iter().any(|row| row.len() != n) || e.nu.len() != m {
            return Err(Error::Parse("tensor entry has the wrong shape".into()));
        }
        let k = shape.index(&CommandProfile { commands }.strategies());
        if payoffs[k].replace(e.nu.into_iter().map(T::lit).collect()).is_some() {
            return Err(Error::Parse("duplicate tensor entry".into()));
        }
    }
    let payoffs = payoffs
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Parse("tensor is missing command profiles".into()))?;
    let p = f.provenance;
    Ok(TransformedGame {
        game: StrategicGame::new(f.deciders, vec![1 << n; m], payoffs)?,
        executives: f.executives,
        labels,
        shares,
        provenance: Provenance {
            source: p.source,
            mechanism: p.mechanism.parse::<Mechanism>()?,
            model: p.model.map(|s| s.parse::<InfluenceModel>()).transpose()?,
            free_float: p.free_float,
            noise_sigma: p.noise_sigma,
            mode: p.mode.map(|s| s.parse()).transpose()?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::transform_summary;
    use crate::graph::{crossed_chains, sigma_for_beta, ChainLengths};
    use crate::influence::Summary;

    const PD: &str = r#"{"players":["1","2"], "labels":{"+1":"C","-1":"D"}, "payoffs":[{"profile":["C","C"],"u":[1,1]}, {"profile":["C","D"],"u":[-3,3]}, {"profile":["D","C"],"u":[3,-3]}, {"profile":["D","D"],"u":[-1,-1]}]}"#;

    #[test]
    fn reads_prisoners_dilemma() {
        let g: NormalFormGame<f64> = read_game(PD).unwrap();
        assert_eq!(g, NormalFormGame::prisoners_dilemma());
        assert_eq!(read_game::<f64>(&write_game(&g)).unwrap(), g);
    }

    #[test]
    fn graph_round_trip() {
        let g = crossed_chains::<f64>(ChainLengths::uniform(4), 0.5, sigma_for_beta(1.0)).unwrap();
        let text = write_graph(&g);
        assert_eq!(read_graph::<f64>(&text).unwrap(), g);
    }

    #[test]
    fn invalid_graph_names_vertex() {
        let text = r#"{"vertices":[{"id":"λ","role":"decider"},{"id":"1","role":"executive"}],
            "edges":[{"from":"λ","to":"1","weight":0.9}],"free_float":0.5,"noise_sigma":1.0}"#;
        assert!(parse_graph::<f64>(text).is_ok());
        let err = read_graph::<f64>(text).unwrap_err();
        assert!(err.to_string().contains("predecessor weights of vertex 1 sum to 0.9"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(matches!(read_game::<f64>(r#"{"players":[],"payoffs":[],"extra":1}"#), Err(Error::Parse(_))));
    }

    #[test]
    fn tensor_round_trip() {
        let t = transform_summary(&NormalFormGame::<f64>::prisoners_dilemma(), Summary::symmetric(0.3, 0.85))
            .unwrap()
            .with_source("summary");
        let back: TransformedGame<f64> = read_tensor(&write_tensor(&t)).unwrap();
        assert_eq!(back, t);
    }
}
